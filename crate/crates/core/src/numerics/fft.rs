//! In-place iterative radix-2 FFT.
//!
//! Convention: `Y[n] = sum_j x[j] * exp(-2 pi i j n / N)`, no normalization.
//! Callers map bins back to wavelet indices themselves.

use num_complex::Complex64;

use crate::error::{Result, SwiftError};

/// Precomputed twiddles and bit-reversal table for one power-of-two length.
#[derive(Clone, Debug)]
pub struct FftPlan {
    len: usize,
    twiddles: Vec<Complex64>,
    bit_reverse: Vec<u32>,
}

impl FftPlan {
    pub fn new(len: usize) -> Result<Self> {
        if len == 0 || !len.is_power_of_two() {
            return Err(SwiftError::NotPowerOfTwo(len));
        }
        let bits = len.trailing_zeros();
        let twiddles = (0..len / 2)
            .map(|k| {
                let angle = -2.0 * std::f64::consts::PI * (k as f64) / (len as f64);
                let (s, c) = angle.sin_cos();
                Complex64::new(c, s)
            })
            .collect();
        let bit_reverse = (0..len as u32)
            .map(|i| if bits == 0 { 0 } else { i.reverse_bits() >> (32 - bits) })
            .collect();
        Ok(Self {
            len,
            twiddles,
            bit_reverse,
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn forward_in_place(&self, buf: &mut [Complex64]) -> Result<()> {
        if buf.len() != self.len {
            return Err(SwiftError::LengthMismatch {
                left: buf.len(),
                right: self.len,
            });
        }
        for (i, &r) in self.bit_reverse.iter().enumerate() {
            let r = r as usize;
            if i < r {
                buf.swap(i, r);
            }
        }
        let n = self.len;
        let mut half = 1;
        while half < n {
            let stride = n / (2 * half);
            for block in buf.chunks_exact_mut(2 * half) {
                let (lo, hi) = block.split_at_mut(half);
                for (k, (a, b)) in lo.iter_mut().zip(hi.iter_mut()).enumerate() {
                    let t = *b * self.twiddles[k * stride];
                    *b = *a - t;
                    *a += t;
                }
            }
            half *= 2;
        }
        Ok(())
    }
}

/// Forward transform of a power-of-two length sequence.
pub fn fft_forward(seq: &[Complex64]) -> Result<Vec<Complex64>> {
    let plan = FftPlan::new(seq.len())?;
    let mut out = seq.to_vec();
    plan.forward_in_place(&mut out)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn naive_dft(x: &[Complex64]) -> Vec<Complex64> {
        let n = x.len();
        (0..n)
            .map(|k| {
                x.iter()
                    .enumerate()
                    .map(|(j, &v)| {
                        // exact modular reduction keeps the oracle accurate
                        let r = ((j * k) % n) as f64 / n as f64;
                        v * Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * r)
                    })
                    .sum()
            })
            .collect()
    }

    fn max_rel_gap(a: &[Complex64], b: &[Complex64]) -> f64 {
        let scale = b.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1e-300);
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y).norm() / scale)
            .fold(0.0, f64::max)
    }

    #[test]
    fn impulse_gives_ones() {
        let mut x = vec![Complex64::new(0.0, 0.0); 16];
        x[0] = Complex64::new(1.0, 0.0);
        let y = fft_forward(&x).unwrap();
        assert!(y.iter().all(|z| *z == Complex64::new(1.0, 0.0)));
    }

    #[test]
    fn constant_gives_spike() {
        let x = vec![Complex64::new(1.0, 0.0); 8];
        let y = fft_forward(&x).unwrap();
        assert!((y[0] - Complex64::new(8.0, 0.0)).norm() < 1e-15);
        assert!(y[1..].iter().all(|z| z.norm() < 1e-15));
    }

    #[test]
    fn length_one_and_rejections() {
        let y = fft_forward(&[Complex64::new(2.5, -1.0)]).unwrap();
        assert_eq!(y, vec![Complex64::new(2.5, -1.0)]);
        assert_eq!(fft_forward(&[]).unwrap_err(), SwiftError::NotPowerOfTwo(0));
        assert_eq!(
            fft_forward(&vec![Complex64::new(0.0, 0.0); 12]).unwrap_err(),
            SwiftError::NotPowerOfTwo(12)
        );
    }

    #[test]
    fn random_64_matches_naive() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let x: Vec<Complex64> = (0..64)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        assert!(max_rel_gap(&fft_forward(&x).unwrap(), &naive_dft(&x)) < 1e-12);
    }

    fn signal(len: usize) -> impl Strategy<Value = Vec<Complex64>> {
        prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), len)
            .prop_map(|v| v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect())
    }

    fn pow2_signal() -> impl Strategy<Value = Vec<Complex64>> {
        (0u32..=10).prop_flat_map(|p| signal(1 << p))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn agrees_with_naive_dft(x in pow2_signal()) {
            prop_assert!(max_rel_gap(&fft_forward(&x).unwrap(), &naive_dft(&x)) < 1e-12);
        }

        #[test]
        fn linear(p in 0u32..=9, a in -2.0f64..2.0, b in -2.0f64..2.0, seed in any::<u64>()) {
            use rand::{Rng, SeedableRng};
            let n = 1usize << p;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut draw = || Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let x: Vec<Complex64> = (0..n).map(|_| draw()).collect();
            let y: Vec<Complex64> = (0..n).map(|_| draw()).collect();
            let mix: Vec<Complex64> = x.iter().zip(&y).map(|(u, v)| u * a + v * b).collect();
            let fx = fft_forward(&x).unwrap();
            let fy = fft_forward(&y).unwrap();
            let expected: Vec<Complex64> = fx.iter().zip(&fy).map(|(u, v)| u * a + v * b).collect();
            prop_assert!(max_rel_gap(&fft_forward(&mix).unwrap(), &expected) < 1e-12);
        }

        #[test]
        fn real_input_is_conjugate_symmetric(x in (1u32..=10).prop_flat_map(|p| prop::collection::vec(-1.0f64..1.0, 1usize << p))) {
            let n = x.len();
            let z: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
            let y = fft_forward(&z).unwrap();
            let scale = y.iter().map(|v| v.norm()).fold(1e-300, f64::max);
            for k in 1..n {
                prop_assert!((y[k] - y[n - k].conj()).norm() <= 1e-12 * scale);
            }
        }
    }
}
