//! Characteristic functions of the centered log-forward `X = ln(F_T / F)`.
//!
//! Throughout the crate `fhat(w) = E[exp(-i w X)]`, so `fhat(w) = phi(-w)`
//! where `phi(u) = E[exp(i u X)]` is the usual characteristic function.

mod black_scholes;
mod contract;
mod heston;

pub use black_scholes::{black_price, bs_cf, BlackScholesCf};
pub use contract::{OptionStyle, VanillaContract};
pub use heston::{heston_cf, heston_cumulants, HestonCf, HestonParams};

use num_complex::Complex64;

/// First, second and fourth cumulants of `X`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cumulants {
    pub c1: f64,
    pub c2: f64,
    pub c4: f64,
}

impl Cumulants {
    /// `|c1| + L sqrt(|c2| + sqrt(|c4|))`.
    pub fn halfwidth(&self, l: f64) -> f64 {
        self.c1.abs() + l * (self.c2.abs() + self.c4.abs().sqrt()).sqrt()
    }
}

pub trait CharacteristicFunction: Send + Sync {
    /// `ln E[exp(i u X)]` for complex `u`.
    fn log_phi(&self, u: Complex64) -> Complex64;

    fn maturity(&self) -> f64;

    fn cumulants(&self) -> Cumulants;

    /// Exponent `nu` of the decay bound `|fhat(w)| <= C exp(-d T |w|^nu)`.
    fn decay_order(&self) -> f64;

    fn decay_known(&self) -> bool {
        true
    }

    /// `E[exp(i u X)]`.
    fn phi(&self, u: Complex64) -> Complex64 {
        self.log_phi(u).exp()
    }

    /// `fhat(w) = E[exp(-i w X)]`; exactly one at the origin and exactly
    /// conjugate-symmetric.
    fn eval(&self, omega: f64) -> Complex64 {
        if omega == 0.0 {
            return Complex64::new(1.0, 0.0);
        }
        let v = self.phi(Complex64::new(omega.abs(), 0.0));
        if omega > 0.0 {
            v.conj()
        } else {
            v
        }
    }

    /// `fhat'(w)` by a fourth-order central difference. The step follows
    /// the frequency scale `1 / spread` on which `fhat` varies.
    fn derivative(&self, omega: f64) -> Complex64 {
        let c = self.cumulants();
        let spread = (c.c2.abs() + c.c4.abs().sqrt()).sqrt().max(1e-300);
        let h = (1e-3 / spread).min(1.0).max(1e-7 * omega.abs()).max(1e-5);
        let f = |w: f64| self.eval(w);
        (f(omega - 2.0 * h) - f(omega + 2.0 * h) + (f(omega + h) - f(omega - h)) * 8.0)
            / (12.0 * h)
    }
}

/// Free-function form of [`CharacteristicFunction::derivative`].
pub fn cf_derivative(cf: &dyn CharacteristicFunction, omega: f64) -> Complex64 {
    cf.derivative(omega)
}
