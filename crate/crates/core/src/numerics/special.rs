//! Cancellation-free complex helper functions.

use num_complex::Complex64;

const SERIES_RADIUS: f64 = 0.5;

/// `(e^z - 1) / z`, equal to 1 at the origin.
pub fn phi1(z: Complex64) -> Complex64 {
    if z.norm() < SERIES_RADIUS {
        // sum z^n / (n+1)!
        let mut term = Complex64::new(1.0, 0.0);
        let mut acc = term;
        for n in 1..24 {
            term = term * z / (n as f64 + 1.0);
            acc += term;
        }
        acc
    } else {
        (z.exp() - 1.0) / z
    }
}

/// `(e^z - 1 - z) / z^2`, equal to 1/2 at the origin.
pub fn phi2(z: Complex64) -> Complex64 {
    if z.norm() < SERIES_RADIUS {
        let mut term = Complex64::new(0.5, 0.0);
        let mut acc = term;
        for n in 1..24 {
            term = term * z / (n as f64 + 2.0);
            acc += term;
        }
        acc
    } else {
        (z.exp() - 1.0 - z) / (z * z)
    }
}

/// `ln(1 + z) / z`, equal to 1 at the origin.
pub fn log1p_over(z: Complex64) -> Complex64 {
    if z.norm() < 0.1 {
        let mut power = Complex64::new(1.0, 0.0);
        let mut acc = Complex64::new(0.0, 0.0);
        for n in 0..24 {
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            acc += power * (sign / (n as f64 + 1.0));
            power *= z;
        }
        acc
    } else {
        (1.0 + z).ln() / z
    }
}

/// `sin(pi t)` with exact argument reduction.
pub fn sin_pi(t: f64) -> f64 {
    let r = t - 2.0 * (0.5 * t).round();
    (std::f64::consts::PI * r).sin()
}

/// `cos(pi t)` with exact argument reduction.
pub fn cos_pi(t: f64) -> f64 {
    let r = t - 2.0 * (0.5 * t).round();
    (std::f64::consts::PI * r).cos()
}

/// Normalized cardinal sine `sin(pi t) / (pi t)`.
pub fn sinc(t: f64) -> f64 {
    if t == 0.0 {
        1.0
    } else {
        sin_pi(t) / (std::f64::consts::PI * t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol * b.norm().max(1e-300)
    }

    #[test]
    fn series_and_closed_forms_meet() {
        for &r in &[0.49999, 0.50001] {
            for k in 0..8 {
                let z = Complex64::from_polar(r, k as f64 * 0.7);
                let p1 = (z.exp() - 1.0) / z;
                let p2 = (z.exp() - 1.0 - z) / (z * z);
                assert!(close(phi1(z), p1, 1e-14));
                assert!(close(phi2(z), p2, 1e-13));
            }
        }
        assert_eq!(phi1(Complex64::new(0.0, 0.0)), Complex64::new(1.0, 0.0));
        assert_eq!(phi2(Complex64::new(0.0, 0.0)), Complex64::new(0.5, 0.0));
    }

    #[test]
    fn log1p_over_is_continuous() {
        for &r in &[0.09999, 0.10001] {
            let z = Complex64::from_polar(r, 2.1);
            assert!(close(log1p_over(z), (1.0 + z).ln() / z, 1e-14));
        }
    }

    #[test]
    fn sinc_values() {
        assert_eq!(sinc(0.0), 1.0);
        assert!(sinc(3.0).abs() < 1e-16);
        assert!(sinc(1e6 + 0.5) > 0.0);
        assert!((sinc(0.5) - 2.0 / std::f64::consts::PI).abs() < 1e-16);
    }
}
