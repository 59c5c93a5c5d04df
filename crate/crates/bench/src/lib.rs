//! Fixtures shared by the benchmarks.

use eqbtq_core::{AdmissibleSymbol, Precision, WeightedProjectiveOracle};
use num_complex::Complex64;

/// A generic unit vector in C^n with all coordinates nonzero.
pub fn generic_point(n: usize) -> Vec<Complex64> {
    let raw: Vec<Complex64> = (0..n)
        .map(|j| Complex64::from_polar(1.0 + 0.3 * j as f64, 0.7 * j as f64))
        .collect();
    let norm = raw.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    raw.into_iter().map(|z| z / norm).collect()
}

pub fn oracle(weights: &[u32], precision: Precision) -> WeightedProjectiveOracle {
    WeightedProjectiveOracle::new(weights, precision).expect("valid weights")
}

/// The non-commuting invariant pair on CP^2 with weights (1,1,2).
pub fn noncommuting_pair() -> (AdmissibleSymbol, AdmissibleSymbol) {
    (
        AdmissibleSymbol::pair_re(3, 0, 1),
        AdmissibleSymbol::pair_im(3, 0, 1),
    )
}

/// Levels and a synthetic `1 + 2/k + 3/k²` series.
pub fn synthetic_series() -> (Vec<f64>, Vec<f64>) {
    let ks: Vec<f64> = (0..16).map(|i| 100.0 + 20.0 * i as f64).collect();
    let v = ks.iter().map(|k| 1.0 + 2.0 / k + 3.0 / (k * k)).collect();
    (ks, v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_are_valid() {
        let x = generic_point(3);
        let n: f64 = x.iter().map(|z| z.norm_sqr()).sum();
        assert!((n - 1.0).abs() < 1e-14);
        let o = oracle(&[1, 1, 2], Precision::Extended);
        assert!(o.szego_diag(10, &x).unwrap() > 0.0);
    }
}
