//! Complex helpers, the radix-2 FFT, compensated sums and adaptive quadrature.

pub mod fft;
pub mod quad;
pub mod special;
pub mod sum;

pub use fft::{fft_forward, FftPlan};
pub use num_complex::Complex64;
pub use quad::{integrate_adaptive, QuadResult};
pub use sum::pairwise_sum;

/// The imaginary unit.
pub const I: Complex64 = Complex64::new(0.0, 1.0);

/// Complex value with both parts finite.
pub fn is_finite(z: Complex64) -> bool {
    z.re.is_finite() && z.im.is_finite()
}
