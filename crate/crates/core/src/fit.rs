//! Coefficient extraction from k-sweeps.
//!
//! Values are modelled as `Σ_j c_j k^{-p_j}`. Columns are rescaled to unit
//! norm before the SVD solve so the reported condition number reflects the
//! geometry of the sample grid rather than the magnitudes of `k`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};

/// Condition numbers above this produce a warning in the fit result.
pub const CONDITION_WARN: f64 = 1e12;

#[derive(Clone, Debug, Serialize)]
pub struct FitResult {
    pub powers: Vec<f64>,
    pub coeffs: Vec<f64>,
    pub std_errs: Vec<f64>,
    pub rms_residual: f64,
    pub condition: f64,
    pub warning: Option<String>,
}

impl FitResult {
    /// Coefficient of `k^{-p}`, if that power was fitted.
    pub fn coeff(&self, p: f64) -> Option<f64> {
        self.powers
            .iter()
            .position(|&q| q == p)
            .map(|i| self.coeffs[i])
    }

    pub fn std_err(&self, p: f64) -> Option<f64> {
        self.powers
            .iter()
            .position(|&q| q == p)
            .map(|i| self.std_errs[i])
    }

    pub fn eval(&self, k: f64) -> f64 {
        self.powers
            .iter()
            .zip(&self.coeffs)
            .map(|(p, c)| c * k.powf(-p))
            .sum()
    }
}

/// Least squares in the basis `k^{-p}` for `p` in `powers`.
pub fn fit_powers(ks: &[f64], values: &[f64], powers: &[f64]) -> Result<FitResult> {
    if ks.len() != values.len() {
        return Err(Error::Dimension {
            expected: ks.len(),
            got: values.len(),
        });
    }
    let mut distinct = ks.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    let p = powers.len();
    if distinct.len() < p + 1 {
        return Err(Error::Config(format!(
            "fit with {p} terms needs at least {} distinct k, got {}",
            p + 1,
            distinct.len()
        )));
    }
    if ks.iter().any(|&k| k <= 0.0) {
        return Err(Error::Config("k must be positive".into()));
    }
    let n = ks.len();
    let mut a = DMatrix::<f64>::from_fn(n, p, |i, j| ks[i].powf(-powers[j]));
    let scales: Vec<f64> = (0..p).map(|j| a.column(j).norm()).collect();
    for (j, s) in scales.iter().enumerate() {
        a.column_mut(j).scale_mut(1.0 / s);
    }
    let b = DVector::from_column_slice(values);
    let svd = a.clone().svd(true, true);
    let sv = &svd.singular_values;
    let smax = sv.max();
    let smin = sv.min();
    let condition = if smin > 0.0 {
        smax / smin
    } else {
        f64::INFINITY
    };
    let x = svd
        .solve(&b, 0.0)
        .map_err(|e| Error::Config(format!("least squares failed: {e}")))?;
    let resid = &b - &a * &x;
    let rss = resid.norm_squared();
    let dof = (n - p).max(1) as f64;
    let sigma2 = rss / dof;
    // (AᵀA)^{-1} = V Σ^{-2} Vᵀ
    let v_t = svd.v_t.as_ref().expect("requested V");
    let std_errs: Vec<f64> = (0..p)
        .map(|j| {
            let var: f64 = (0..sv.len())
                .map(|i| {
                    let vij = v_t[(i, j)];
                    if sv[i] > 0.0 {
                        vij * vij / (sv[i] * sv[i])
                    } else {
                        f64::INFINITY
                    }
                })
                .sum();
            (sigma2 * var).sqrt() / scales[j]
        })
        .collect();
    let coeffs: Vec<f64> = x.iter().zip(&scales).map(|(c, s)| c / s).collect();
    let warning = (condition > CONDITION_WARN)
        .then(|| format!("ill-conditioned fit: condition number {condition:.3e}"));
    Ok(FitResult {
        powers: powers.to_vec(),
        coeffs,
        std_errs,
        rms_residual: (rss / n as f64).sqrt(),
        condition,
        warning,
    })
}

/// Fit `Σ_{j ≤ order} c_j k^{-j}`.
pub fn fit_coefficients(ks: &[f64], values: &[f64], order: usize) -> Result<FitResult> {
    let powers: Vec<f64> = (0..=order).map(|j| j as f64).collect();
    fit_powers(ks, values, &powers)
}

#[derive(Clone, Debug, Serialize)]
pub struct HalfPowerReport {
    pub fit: FitResult,
    /// Largest half-integer coefficient relative to the `k^{-1}` coefficient.
    pub ratio: f64,
    pub flagged: bool,
}

/// Threshold on [`HalfPowerReport::ratio`].
pub const HALF_POWER_TOL: f64 = 1e-3;

/// Fits integer powers up to `order` together with `k^{-1/2}` and `k^{-3/2}`
/// and flags the data when the half powers carry weight.
pub fn half_power_check(ks: &[f64], values: &[f64], order: usize) -> Result<HalfPowerReport> {
    let mut powers: Vec<f64> = (0..=order).map(|j| j as f64).collect();
    powers.extend([0.5, 1.5]);
    let fit = fit_powers(ks, values, &powers)?;
    let k1 = fit.coeff(1.0).unwrap_or(0.0).abs();
    let half = fit
        .coeff(0.5)
        .unwrap_or(0.0)
        .abs()
        .max(fit.coeff(1.5).unwrap_or(0.0).abs());
    let ratio = if k1 > 0.0 { half / k1 } else { f64::INFINITY };
    Ok(HalfPowerReport {
        flagged: ratio > HALF_POWER_TOL,
        ratio,
        fit,
    })
}

/// Polynomial extrapolation in `1/k` to `1/k = 0` (Neville's scheme).
pub fn richardson(ks: &[f64], values: &[f64]) -> Result<f64> {
    if ks.is_empty() || ks.len() != values.len() {
        return Err(Error::Config(
            "richardson needs matching nonempty samples".into(),
        ));
    }
    let h: Vec<f64> = ks.iter().map(|k| 1.0 / k).collect();
    let mut p = values.to_vec();
    let n = p.len();
    for m in 1..n {
        for i in 0..n - m {
            p[i] = (h[i + m] * p[i] - h[i] * p[i + 1]) / (h[i + m] - h[i]);
        }
    }
    Ok(p[0])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Vec<f64> {
        (0..16).map(|i| 100.0 + 20.0 * i as f64).collect()
    }

    #[test]
    fn recovers_synthetic_coefficients() {
        let ks = grid();
        let v: Vec<f64> = ks.iter().map(|k| 1.0 + 2.0 / k + 3.0 / (k * k)).collect();
        let f = fit_coefficients(&ks, &v, 2).unwrap();
        assert!((f.coeffs[0] - 1.0).abs() < 1e-9);
        assert!((f.coeffs[1] - 2.0).abs() < 1e-9);
        assert!(f.warning.is_none());
    }

    #[test]
    fn too_few_points() {
        assert!(fit_coefficients(&[1.0, 2.0], &[1.0, 1.0], 1).is_err());
    }

    #[test]
    fn half_power_detector() {
        let ks: Vec<f64> = (0..15).map(|i| 50.0 + 25.0 * i as f64).collect();
        let clean: Vec<f64> = ks.iter().map(|k| 1.0 + 2.0 / k).collect();
        assert!(!half_power_check(&ks, &clean, 3).unwrap().flagged);
        let dirty: Vec<f64> = ks
            .iter()
            .map(|k| 1.0 + 2.0 / k + 0.5 * k.powf(-1.5))
            .collect();
        assert!(half_power_check(&ks, &dirty, 3).unwrap().flagged);
    }

    #[test]
    fn richardson_is_exact_on_polynomials() {
        let ks = [10.0, 20.0, 40.0];
        let v: Vec<f64> = ks.iter().map(|k| 5.0 - 1.0 / k + 4.0 / (k * k)).collect();
        assert!((richardson(&ks, &v).unwrap() - 5.0).abs() < 1e-12);
    }
}
