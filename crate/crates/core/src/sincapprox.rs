//! Finite cosine-sum approximations of `sinc(x) = (1/pi) int_0^pi cos(t x) dt`
//! and the a-priori error bound of the mid-point (Vieta) form.

use crate::error::{Result, SwiftError};
use crate::numerics::pairwise_sum;
use crate::numerics::special::{cos_pi, sin_pi};

/// Leading Euler-Maclaurin constant of the mid-point rule.
pub const B1: f64 = 1.0 / 24.0;
/// Leading Euler-Maclaurin constant of the trapezoidal rule.
pub const A1: f64 = 2.0 * B1;
/// Bound on the ratio `b_k / b_{k-1}` of successive constants.
pub const EM_RATIO: f64 = 0.08;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SincKind {
    /// `(1/J) sum_{j=1}^J cos(w_j x)`, `w_j = pi (j - 1/2) / J`.
    VietaMidpoint,
    /// End-weighted cosine sum on the nodes `pi j / J`, `j = 0..J`.
    Trapezoid,
    /// Mid-point plus `-pi x sin(pi x) / (24 J^2)`.
    MidpointD1,
    /// Trapezoid plus `+pi x sin(pi x) / (12 J^2)`.
    TrapezoidD1,
    /// Composite Simpson on the `2J + 1` nodes `pi j / (2J)`.
    Simpson,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SincVariant {
    pub kind: SincKind,
    pub j: usize,
}

impl SincVariant {
    pub fn new(kind: SincKind, j: usize) -> Result<Self> {
        if j == 0 {
            return Err(SwiftError::InvalidParameter {
                name: "J",
                reason: "must be at least 1".into(),
            });
        }
        Ok(Self { kind, j })
    }
}

fn midpoint_sum(x: f64, j: usize) -> f64 {
    let jf = j as f64;
    let terms: Vec<f64> = (1..=j)
        .map(|i| cos_pi((2.0 * i as f64 - 1.0) * x / (2.0 * jf)))
        .collect();
    pairwise_sum(&terms) / jf
}

fn trapezoid_sum(x: f64, j: usize) -> f64 {
    let jf = j as f64;
    let mut terms: Vec<f64> = (1..j).map(|i| cos_pi(i as f64 * x / jf)).collect();
    terms.push(0.5 + 0.5 * cos_pi(x));
    pairwise_sum(&terms) / jf
}

fn simpson_sum(x: f64, j: usize) -> f64 {
    let n = 2 * j;
    let nf = n as f64;
    let terms: Vec<f64> = (0..=n)
        .map(|i| {
            let w = if i == 0 || i == n {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            w * cos_pi(i as f64 * x / nf)
        })
        .collect();
    pairwise_sum(&terms) / (3.0 * nf)
}

/// First Euler-Maclaurin term `pi x sin(pi x) / J^2` (without the constant).
fn derivative_term(x: f64, j: usize) -> f64 {
    std::f64::consts::PI * x * sin_pi(x) / (j as f64 * j as f64)
}

pub fn sinc_approx(x: f64, v: SincVariant) -> f64 {
    debug_assert!(v.j >= 1);
    match v.kind {
        SincKind::VietaMidpoint => midpoint_sum(x, v.j),
        SincKind::Trapezoid => trapezoid_sum(x, v.j),
        SincKind::MidpointD1 => midpoint_sum(x, v.j) - B1 * derivative_term(x, v.j),
        SincKind::TrapezoidD1 => trapezoid_sum(x, v.j) + A1 * derivative_term(x, v.j),
        SincKind::Simpson => simpson_sum(x, v.j),
    }
}

fn bound_with(coeff: f64, x: f64, j: usize) -> Result<f64> {
    let limit = std::f64::consts::PI * EM_RATIO.sqrt() * x.abs();
    let jf = j as f64;
    if j == 0 || jf <= limit {
        return Err(SwiftError::BoundDiverges { j, limit });
    }
    let r = std::f64::consts::PI * x / jf;
    Ok(coeff * std::f64::consts::PI * x.abs() / (jf * jf) / (1.0 - EM_RATIO * r * r))
}

/// Upper bound on `|sinc(x) - VietaMidpoint(x, J)|`, valid for
/// `J > pi sqrt(0.08) |x|`. Any `J >= ceil(|x|)` qualifies.
pub fn sinc_error_bound(x: f64, j: usize) -> Result<f64> {
    bound_with(B1, x, j)
}

/// Same bound for the trapezoidal form, with `a_1 = 2 b_1`.
pub fn trapezoid_error_bound(x: f64, j: usize) -> Result<f64> {
    bound_with(A1, x, j)
}
