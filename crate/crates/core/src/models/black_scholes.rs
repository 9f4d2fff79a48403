use num_complex::Complex64;

use super::{CharacteristicFunction, Cumulants, OptionStyle, VanillaContract};
use crate::error::{invalid, Result};

/// Lognormal forward: `X ~ N(-vol^2 T / 2, vol^2 T)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlackScholesCf {
    vol: f64,
    maturity: f64,
}

impl BlackScholesCf {
    pub fn new(vol: f64, maturity: f64) -> Result<Self> {
        if !(vol > 0.0 && vol.is_finite()) {
            return Err(invalid("vol", format!("must be positive, got {vol}")));
        }
        if !(maturity > 0.0 && maturity.is_finite()) {
            return Err(invalid("maturity", format!("must be positive, got {maturity}")));
        }
        Ok(Self { vol, maturity })
    }

    pub fn vol(&self) -> f64 {
        self.vol
    }

    fn variance(&self) -> f64 {
        self.vol * self.vol * self.maturity
    }

    /// Density of `X`.
    pub fn density(&self, x: f64) -> f64 {
        let w = self.variance();
        let z = x + 0.5 * w;
        (-0.5 * z * z / w).exp() / (2.0 * std::f64::consts::PI * w).sqrt()
    }
}

/// Black formula for a European option on a forward.
pub fn black_price(contract: &VanillaContract, vol: f64) -> f64 {
    let sd = vol * contract.maturity.sqrt();
    let (f, k) = (contract.forward, contract.strike);
    let n = |z: f64| 0.5 * libm::erfc(-z / std::f64::consts::SQRT_2);
    let d1 = ((f / k).ln() + 0.5 * sd * sd) / sd;
    let d2 = d1 - sd;
    let undiscounted = match contract.style {
        OptionStyle::Call => f * n(d1) - k * n(d2),
        OptionStyle::Put => k * n(-d2) - f * n(-d1),
    };
    contract.discount * undiscounted
}

pub fn bs_cf(vol: f64, maturity: f64) -> Result<BlackScholesCf> {
    BlackScholesCf::new(vol, maturity)
}

impl CharacteristicFunction for BlackScholesCf {
    fn log_phi(&self, u: Complex64) -> Complex64 {
        let i = Complex64::new(0.0, 1.0);
        -0.5 * self.variance() * (u * u + i * u)
    }

    fn maturity(&self) -> f64 {
        self.maturity
    }

    fn cumulants(&self) -> Cumulants {
        let w = self.variance();
        Cumulants {
            c1: -0.5 * w,
            c2: w,
            c4: 0.0,
        }
    }

    fn decay_order(&self) -> f64 {
        2.0
    }

    fn derivative(&self, omega: f64) -> Complex64 {
        let i = Complex64::new(0.0, 1.0);
        -0.5 * self.variance() * (2.0 * omega - i) * self.eval(omega)
    }
}
