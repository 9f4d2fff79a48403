use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{CharacteristicFunction, Cumulants};
use crate::error::{invalid, Result};
use crate::numerics::special::{log1p_over, phi1};

/// Heston stochastic-volatility parameters. The Feller condition is not
/// required.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HestonParams {
    pub kappa: f64,
    pub theta: f64,
    pub sigma: f64,
    pub rho: f64,
    pub v0: f64,
}

impl HestonParams {
    pub fn new(kappa: f64, theta: f64, sigma: f64, rho: f64, v0: f64) -> Result<Self> {
        let p = Self {
            kappa,
            theta,
            sigma,
            rho,
            v0,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.kappa, self.theta, self.sigma, self.rho, self.v0]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(invalid("heston", "parameters must be finite"));
        }
        if self.sigma <= 0.0 {
            return Err(invalid("sigma", format!("must be positive, got {}", self.sigma)));
        }
        if self.v0 < 0.0 {
            return Err(invalid("v0", format!("must be non-negative, got {}", self.v0)));
        }
        if self.theta < 0.0 {
            return Err(invalid("theta", format!("must be non-negative, got {}", self.theta)));
        }
        if self.kappa < 0.0 {
            return Err(invalid("kappa", format!("must be non-negative, got {}", self.kappa)));
        }
        if !(self.rho > -1.0 && self.rho < 1.0) {
            return Err(invalid("rho", format!("must lie in (-1, 1), got {}", self.rho)));
        }
        Ok(())
    }

    /// Expected integrated variance over `[0, T]`.
    pub fn integrated_variance(&self, maturity: f64) -> f64 {
        let kt = self.kappa * maturity;
        // (1 - e^{-kT}) / k, continuous at k = 0
        let decay = maturity * phi1(Complex64::new(-kt, 0.0)).re;
        self.theta * maturity + (self.v0 - self.theta) * decay
    }
}

/// Heston characteristic function at a fixed maturity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HestonCf {
    params: HestonParams,
    maturity: f64,
    cumulants: Cumulants,
}

impl HestonCf {
    pub fn new(params: HestonParams, maturity: f64) -> Result<Self> {
        params.validate()?;
        if !(maturity > 0.0 && maturity.is_finite()) {
            return Err(invalid("maturity", format!("must be positive, got {maturity}")));
        }
        Ok(Self {
            params,
            maturity,
            cumulants: moment_hierarchy(&params, maturity),
        })
    }

    pub fn params(&self) -> &HestonParams {
        &self.params
    }
}

pub fn heston_cf(params: HestonParams, maturity: f64) -> Result<HestonCf> {
    HestonCf::new(params, maturity)
}

pub fn heston_cumulants(params: HestonParams, maturity: f64) -> Result<Cumulants> {
    Ok(HestonCf::new(params, maturity)?.cumulants)
}

impl CharacteristicFunction for HestonCf {
    /// Little-trap formulation, rewritten so that neither `sigma -> 0` nor
    /// `kappa -> 0` divides by a vanishing quantity:
    ///
    /// ```text
    /// q = (b - d) / sigma^2 = -s / (b + d),   s = iu + u^2
    /// D = q (1 - e^{-dT}) / (1 - g e^{-dT})
    /// C = kappa theta q T (1 - phi1(-dT) ln(1 + z) / z),  z = sigma^2 q T phi1(-dT) / 2
    /// ```
    fn log_phi(&self, u: Complex64) -> Complex64 {
        let HestonParams {
            kappa,
            theta,
            sigma,
            rho,
            v0,
        } = self.params;
        let t = self.maturity;
        let i = Complex64::new(0.0, 1.0);
        let s = u * (u + i);
        if s == Complex64::new(0.0, 0.0) {
            return s;
        }
        let b = kappa - rho * sigma * i * u;
        let d = (b * b + sigma * sigma * s).sqrt();
        let bd = b + d;
        let q = -s / bd;
        let g = sigma * sigma * q / bd;
        let dt = d * t;
        let p1 = phi1(-dt);
        let one_minus_e = dt * p1;
        let e = 1.0 - one_minus_e;
        let big_d = q * one_minus_e / (1.0 - g * e);
        let z = 0.5 * sigma * sigma * q * t * p1;
        let big_c = kappa * theta * q * t * (1.0 - p1 * log1p_over(z));
        big_c + v0 * big_d
    }

    fn maturity(&self) -> f64 {
        self.maturity
    }

    fn cumulants(&self) -> Cumulants {
        self.cumulants
    }

    fn decay_order(&self) -> f64 {
        1.0
    }
}

/// Cumulants from the Taylor coefficients of the Riccati system
/// `B' = (s^2 - s)/2 + (rho sigma s - kappa) B + sigma^2 B^2 / 2`,
/// `A' = kappa theta B`, in powers of `s`. `ln E[e^{sX}] = A + v0 B`, so
/// `c_n = n! [s^n](A + v0 B)`. The triangular ODE system is integrated with
/// RK4 and one Richardson step; no case split is needed at `kappa = 0`.
fn moment_hierarchy(p: &HestonParams, maturity: f64) -> Cumulants {
    let coarse = integrate_hierarchy(p, maturity, 8192);
    let fine = integrate_hierarchy(p, maturity, 16384);
    let mut y = [0.0; 8];
    for n in 0..8 {
        y[n] = fine[n] + (fine[n] - coarse[n]) / 15.0;
    }
    let coeff = |n: usize| y[4 + n] + p.v0 * y[n];
    Cumulants {
        c1: coeff(0),
        c2: 2.0 * coeff(1),
        c4: 24.0 * coeff(3),
    }
}

fn integrate_hierarchy(p: &HestonParams, maturity: f64, steps: usize) -> [f64; 8] {
    let rs = p.rho * p.sigma;
    let s2 = p.sigma * p.sigma;
    let (k, kt) = (p.kappa, p.kappa * p.theta);
    let rhs = |y: &[f64; 8]| -> [f64; 8] {
        let [b1, b2, b3, b4, ..] = *y;
        [
            -0.5 - k * b1,
            0.5 + rs * b1 - k * b2 + 0.5 * s2 * b1 * b1,
            rs * b2 - k * b3 + s2 * b1 * b2,
            rs * b3 - k * b4 + 0.5 * s2 * (2.0 * b1 * b3 + b2 * b2),
            kt * b1,
            kt * b2,
            kt * b3,
            kt * b4,
        ]
    };
    let h = maturity / steps as f64;
    let mut y = [0.0; 8];
    let axpy = |y: &[f64; 8], k: &[f64; 8], a: f64| -> [f64; 8] {
        let mut out = *y;
        for i in 0..8 {
            out[i] += a * k[i];
        }
        out
    };
    for _ in 0..steps {
        let k1 = rhs(&y);
        let k2 = rhs(&axpy(&y, &k1, 0.5 * h));
        let k3 = rhs(&axpy(&y, &k2, 0.5 * h));
        let k4 = rhs(&axpy(&y, &k3, h));
        for i in 0..8 {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    y
}
