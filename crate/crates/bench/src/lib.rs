//! Shared inputs for the criterion benches in `benches/`.

use heisenpaley::fourier::{LambdaGrid, Truncation};
use heisenpaley::profile::PolyradialSpec;

/// A coarser grid than the default, so one table takes milliseconds.
pub fn bench_grid() -> LambdaGrid {
    LambdaGrid {
        min: 1e-2,
        max: 1e2,
        points_per_side: 32,
    }
}

pub fn bench_truncation(alpha_max: u32) -> Truncation {
    Truncation::Fixed { m_max: 0, alpha_max }
}

pub fn gaussian(n: usize) -> PolyradialSpec {
    PolyradialSpec::gaussian(n, 1.0, 1.0, 1.0)
}
