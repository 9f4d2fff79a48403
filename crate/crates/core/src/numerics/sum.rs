use std::ops::Add;

const BLOCK: usize = 32;

/// Pairwise (cascade) summation. Rounding error grows like O(log n) instead
/// of O(n) for the naive loop.
pub fn pairwise_sum<T>(values: &[T]) -> T
where
    T: Copy + Default + Add<Output = T>,
{
    if values.len() <= BLOCK {
        return values.iter().fold(T::default(), |acc, &v| acc + v);
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_and_large() {
        assert_eq!(pairwise_sum::<f64>(&[]), 0.0);
        assert_eq!(pairwise_sum(&[1.0, 2.0, 3.5]), 6.5);
        let v = vec![0.1; 1 << 20];
        let s = pairwise_sum(&v);
        assert!((s - 104857.6f64).abs() < 1e-9);
    }
}
