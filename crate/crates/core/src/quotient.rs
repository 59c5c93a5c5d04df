//! Hamiltonian circle actions and their symplectic quotient charts.
//!
//! For a weighted action on ℂP^d the quotient chart is the holomorphic slice
//! `λ = (1, z)`. The slice point is pushed onto the unit sphere along the
//! complexified orbit, `x_j = U^{w_j/2} λ_j`, where `U > 0` solves
//! `Σ_j U^{w_j} |λ_j|² = 1`. The quotient potential is `Ξ_N = −log U`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::kahler::KahlerChart;
use crate::polarized::{DomainHint, Jet, PolarizedScalar, RootEquation};
use crate::symbol::AdmissibleSymbol;

/// Angles sampled by the statistical invariance check.
pub const INVARIANCE_SAMPLES: usize = 8;
/// Accepted spread of an invariant function along a sampled orbit.
pub const INVARIANCE_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub enum CircleAction {
    /// Fibrewise rotation only; `Φ ≡ 1`.
    Trivial,
    /// `g · x = (g^{−w_j} x_j)` on homogeneous coordinates.
    Weighted(Vec<u32>),
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

#[derive(Clone, Debug)]
pub struct HamiltonianCircleModel {
    label: String,
    base: KahlerChart,
    phi: PolarizedScalar,
    action: CircleAction,
}

impl HamiltonianCircleModel {
    /// The standard quantization of `base`: trivial action and `Φ ≡ 1`.
    pub fn trivial(base: KahlerChart) -> Self {
        let d = base.dim();
        HamiltonianCircleModel {
            label: format!("{} (trivial action)", base.label()),
            base,
            phi: PolarizedScalar::real(d, 1.0),
            action: CircleAction::Trivial,
        }
    }

    /// ℂP^d with the action of positive integer weights `w_0..w_d`.
    pub fn weighted_projective(weights: &[u32]) -> Result<Self> {
        if weights.len() < 2 {
            return Err(Error::InvalidModel(
                "need at least two homogeneous coordinates".into(),
            ));
        }
        if weights.contains(&0) {
            return Err(Error::InvalidModel(format!(
                "weights must be positive, got {weights:?}"
            )));
        }
        let g = weights.iter().fold(0, |acc, &w| gcd(acc, w));
        if g != 1 {
            return Err(Error::InvalidModel(format!(
                "generic stabilizer has order {g}; weights {weights:?} must have gcd 1"
            )));
        }
        let d = weights.len() - 1;
        let base = KahlerChart::fubini_study(d);
        let phi = AdmissibleSymbol::moment_map(weights).to_affine_kernel();
        let label = format!(
            "CP^{d} weights ({})",
            weights
                .iter()
                .map(|w| w.to_string())
                .collect::<Vec<_>>()
                .join(",")
        );
        Ok(HamiltonianCircleModel {
            label,
            base,
            phi,
            action: CircleAction::Weighted(weights.to_vec()),
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    pub fn base(&self) -> &KahlerChart {
        &self.base
    }

    /// `Φ` on the base chart.
    pub fn phi(&self) -> &PolarizedScalar {
        &self.phi
    }

    pub fn action(&self) -> &CircleAction {
        &self.action
    }

    pub fn weights(&self) -> Option<&[u32]> {
        match &self.action {
            CircleAction::Weighted(w) => Some(w),
            CircleAction::Trivial => None,
        }
    }

    /// Order of the generic stabilizer (always 1 for a valid model).
    pub fn generic_stabilizer_order(&self) -> u32 {
        self.weights()
            .map(|w| w.iter().fold(0, |acc, &x| gcd(acc, x)))
            .unwrap_or(1)
    }

    /// Checks `Φ > 0` at the given base chart points.
    pub fn validate(&self, points: &[Vec<Complex64>]) -> Result<()> {
        for p in points {
            let v = self.phi.value(p)?;
            if !(v.re > 0.0) || v.im.abs() > 1e-12 * (1.0 + v.re.abs()) {
                return Err(Error::InvalidModel(format!("moment map is {v} at {p:?}")));
            }
        }
        Ok(())
    }

    /// Action of `e^{iθ}` on a base chart point.
    pub fn rotate(&self, z: &[Complex64], theta: f64) -> Vec<Complex64> {
        match &self.action {
            CircleAction::Trivial => z.to_vec(),
            CircleAction::Weighted(w) => z
                .iter()
                .enumerate()
                .map(|(j, &zj)| {
                    let shift = w[j + 1] as f64 - w[0] as f64;
                    zj * Complex64::from_polar(1.0, -shift * theta)
                })
                .collect(),
        }
    }

    /// Largest deviation of `f` along sampled orbits through `points`.
    pub fn invariance_spread(&self, f: &PolarizedScalar, points: &[Vec<Complex64>]) -> Result<f64> {
        let mut spread: f64 = 0.0;
        for p in points {
            let f0 = f.value(p)?;
            for s in 1..INVARIANCE_SAMPLES {
                let theta = 2.0 * PI * s as f64 / INVARIANCE_SAMPLES as f64 + 0.1;
                let v = f.value(&self.rotate(p, theta))?;
                spread = spread.max((v - f0).norm() / (1.0 + f0.norm()));
            }
        }
        Ok(spread)
    }

    pub fn check_invariant(&self, f: &PolarizedScalar, points: &[Vec<Complex64>]) -> Result<()> {
        let spread = self.invariance_spread(f, points)?;
        if spread > INVARIANCE_TOL {
            return Err(Error::NotInvariant { spread });
        }
        Ok(())
    }

    /// Transfer form of the quotient Laplacian: `Φ · Δ_M f`.
    pub fn laplacian_n(&self, f: &PolarizedScalar) -> Result<PolarizedScalar> {
        Ok(&self.phi * &self.base.laplacian(f)?)
    }

    /// Transfer form of the quotient Laplacian including the slice
    /// correction `−(d/2) ⟨grad_M Φ, grad_M f⟩_M`. This is what the intrinsic
    /// quotient-chart Laplacian equals for invariant `f`.
    pub fn laplacian_n_corrected(&self, f: &PolarizedScalar) -> Result<PolarizedScalar> {
        let half_d = 0.5 * self.dim() as f64;
        let corr = self.base.grad_inner(&self.phi, f)?.scale_real(half_d);
        Ok(&self.laplacian_n(f)? - &corr)
    }

    /// Transfer form `Φ ‖grad_M f‖²_M`.
    pub fn grad_norm_sq_n(&self, f: &PolarizedScalar) -> Result<PolarizedScalar> {
        Ok(&self.phi * &self.base.grad_norm_sq(f)?)
    }

    /// Transfer form `Φ {f, g}_M`.
    pub fn poisson_n(&self, f: &PolarizedScalar, g: &PolarizedScalar) -> Result<PolarizedScalar> {
        Ok(&self.phi * &self.base.poisson_bracket(f, g)?)
    }

    /// Quotient chart centred at `center` (a slice coordinate).
    pub fn quotient_chart(&self, center: &[Complex64]) -> Result<QuotientChart> {
        let d = self.dim();
        let q = match &self.action {
            CircleAction::Trivial => QuotientChart {
                model: self.clone(),
                chart: self.base.clone(),
                phi: self.phi.clone(),
                normalization: None,
                holo_map: (0..d).map(|j| PolarizedScalar::z(d, j)).collect(),
                anti_map: (0..d).map(|j| PolarizedScalar::zeta(d, j)).collect(),
                center: center.to_vec(),
            },
            CircleAction::Weighted(w) => {
                let eq: Arc<dyn RootEquation> =
                    Arc::new(WeightedNormalization { weights: w.clone() });
                let args: Vec<PolarizedScalar> = (0..d)
                    .map(|j| &PolarizedScalar::z(d, j) * &PolarizedScalar::zeta(d, j))
                    .collect();
                let u = PolarizedScalar::root(eq, &args).with_hermitian(true);
                let xi = (-&u.ln())
                    .with_hermitian(true)
                    .with_domain(DomainHint::unbounded());
                let chart = KahlerChart::new(format!("quotient of {}", self.label), xi)?;
                let phi = AdmissibleSymbol::moment_map(w).to_slice_kernel(w, &u);
                let mut holo_map = Vec::with_capacity(d);
                let mut anti_map = Vec::with_capacity(d);
                for j in 0..d {
                    let shift = w[j + 1] as i64 - w[0] as i64;
                    let s = if shift % 2 == 0 {
                        u.powi((shift / 2) as i32)
                    } else {
                        u.powf(shift as f64 / 2.0)
                    };
                    holo_map.push(&s * &PolarizedScalar::z(d, j));
                    anti_map.push(&s * &PolarizedScalar::zeta(d, j));
                }
                QuotientChart {
                    model: self.clone(),
                    chart,
                    phi,
                    normalization: Some(u),
                    holo_map,
                    anti_map,
                    center: center.to_vec(),
                }
            }
        };
        match q.chart.metric_at(center) {
            Ok(_) => Ok(q),
            Err(Error::DegenerateMetric {
                point,
                min_eigenvalue,
            }) => Err(Error::DegenerateQuotient {
                point,
                min_eigenvalue,
            }),
            Err(e) => Err(e),
        }
    }
}

/// `Σ_j U^{w_j} q_j − 1 = 0` with `q_0 = 1` and `q_j = z_j ζ_j`.
#[derive(Debug)]
pub struct WeightedNormalization {
    pub weights: Vec<u32>,
}

impl WeightedNormalization {
    fn g(&self, t: Complex64, q: &[Complex64]) -> Complex64 {
        let mut s = t.powu(self.weights[0]) - 1.0;
        for (j, qj) in q.iter().enumerate() {
            s += qj * t.powu(self.weights[j + 1]);
        }
        s
    }

    fn dg(&self, t: Complex64, q: &[Complex64]) -> Complex64 {
        let w0 = self.weights[0];
        let mut s = (w0 as f64) * t.powu(w0 - 1);
        for (j, qj) in q.iter().enumerate() {
            let w = self.weights[j + 1];
            s += qj * (w as f64) * t.powu(w - 1);
        }
        s
    }

    /// Safeguarded Newton on the bracket `[0, 1]` for real `q ≥ 0`.
    fn solve_real(&self, q: &[f64]) -> Result<f64> {
        let qc: Vec<Complex64> = q.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        if self.g(Complex64::new(1.0, 0.0), &qc).re <= 0.0 {
            return Ok(1.0);
        }
        let mut t = 0.5;
        for _ in 0..200 {
            let gv = self.g(Complex64::new(t, 0.0), &qc).re;
            if gv > 0.0 {
                hi = t;
            } else {
                lo = t;
            }
            let slope = self.dg(Complex64::new(t, 0.0), &qc).re;
            let mut next = t - gv / slope;
            if !(next > lo && next < hi) || !next.is_finite() {
                next = 0.5 * (lo + hi);
            }
            if (next - t).abs() <= 1e-15 * t.max(1e-300) || hi - lo <= 1e-15 * hi {
                return Ok(next);
            }
            t = next;
        }
        Err(Error::Normalization {
            lo,
            hi,
            detail: "bracketed Newton did not reach 1e-14 relative".into(),
        })
    }

    fn newton(&self, mut t: Complex64, q: &[Complex64]) -> Option<Complex64> {
        for _ in 0..60 {
            let step = self.g(t, q) / self.dg(t, q);
            if !step.re.is_finite() || !step.im.is_finite() {
                return None;
            }
            t -= step;
            if step.norm() <= 1e-15 * t.norm() {
                return Some(t);
            }
        }
        if self.g(t, q).norm() < 1e-13 {
            Some(t)
        } else {
            None
        }
    }
}

impl RootEquation for WeightedNormalization {
    fn name(&self) -> &'static str {
        "orbit normalization"
    }

    fn residual(&self, t: &Jet, args: &[Jet]) -> Jet {
        let mut s = t
            .powi(self.weights[0] as i32)
            .add_scalar(Complex64::new(-1.0, 0.0));
        for (j, a) in args.iter().enumerate() {
            s = s.add(&a.mul(&t.powi(self.weights[j + 1] as i32)));
        }
        s
    }

    fn slope(&self, t: Complex64, args: &[Complex64]) -> Complex64 {
        self.dg(t, args)
    }

    fn solve(&self, args: &[Complex64]) -> Result<Complex64> {
        let real: Vec<f64> = args.iter().map(|q| q.re.max(0.0)).collect();
        let t0 = self.solve_real(&real)?;
        let is_real = args
            .iter()
            .zip(&real)
            .all(|(q, r)| q.im == 0.0 && q.re == *r);
        if is_real {
            return Ok(Complex64::new(t0, 0.0));
        }
        // continuation from the real problem to the complex arguments
        let steps = 8;
        let mut t = Complex64::new(t0, 0.0);
        for s in 1..=steps {
            let frac = s as f64 / steps as f64;
            let q: Vec<Complex64> = args
                .iter()
                .zip(&real)
                .map(|(a, r)| Complex64::new(*r, 0.0) + (a - r) * frac)
                .collect();
            t = self.newton(t, &q).ok_or_else(|| Error::Normalization {
                lo: 0.0,
                hi: 1.0,
                detail: format!("complex continuation failed at step {s}/{steps} for {args:?}"),
            })?;
        }
        Ok(t)
    }
}

/// The symplectic quotient in slice coordinates.
#[derive(Clone, Debug)]
pub struct QuotientChart {
    model: HamiltonianCircleModel,
    chart: KahlerChart,
    phi: PolarizedScalar,
    normalization: Option<PolarizedScalar>,
    holo_map: Vec<PolarizedScalar>,
    anti_map: Vec<PolarizedScalar>,
    center: Vec<Complex64>,
}

impl QuotientChart {
    pub fn model(&self) -> &HamiltonianCircleModel {
        &self.model
    }

    pub fn chart(&self) -> &KahlerChart {
        &self.chart
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    pub fn center(&self) -> &[Complex64] {
        &self.center
    }

    /// `Φ` in slice coordinates.
    pub fn phi(&self) -> &PolarizedScalar {
        &self.phi
    }

    /// `U = s²`, the orbit normalization (weighted actions only).
    pub fn normalization(&self) -> Option<&PolarizedScalar> {
        self.normalization.as_ref()
    }

    /// Base chart point lying under the slice point `n`.
    pub fn base_point(&self, n: &[Complex64]) -> Result<Vec<Complex64>> {
        self.holo_map.iter().map(|m| m.value(n)).collect()
    }

    /// Unit-sphere lift `x_j = U^{w_j/2} λ_j` of the slice point `n`.
    pub fn sphere_point(&self, n: &[Complex64]) -> Result<Vec<Complex64>> {
        match (&self.model.action, &self.normalization) {
            (CircleAction::Weighted(w), Some(u)) => {
                let u = u.value(n)?.re;
                let mut x = vec![Complex64::new(u.powf(w[0] as f64 / 2.0), 0.0)];
                for (j, zj) in n.iter().enumerate() {
                    x.push(zj * u.powf(w[j + 1] as f64 / 2.0));
                }
                Ok(x)
            }
            _ => {
                let norm = (1.0 + n.iter().map(|z| z.norm_sqr()).sum::<f64>()).sqrt();
                let mut x = vec![Complex64::new(1.0 / norm, 0.0)];
                x.extend(n.iter().map(|z| z / norm));
                Ok(x)
            }
        }
    }

    /// `∂g/∂U` at the normalization root over `n`; positive by monotonicity.
    pub fn normalization_slope(&self, n: &[Complex64]) -> Result<f64> {
        match (&self.model.action, &self.normalization) {
            (CircleAction::Weighted(w), Some(u)) => {
                let eq = WeightedNormalization { weights: w.clone() };
                let q: Vec<Complex64> = n
                    .iter()
                    .map(|z| Complex64::new(z.norm_sqr(), 0.0))
                    .collect();
                Ok(eq.slope(u.value(n)?, &q).re)
            }
            _ => Ok(1.0),
        }
    }

    /// Invariant function of the base chart, expressed in slice coordinates.
    pub fn transport(&self, f: &PolarizedScalar) -> PolarizedScalar {
        if self.normalization.is_none() {
            return f.clone();
        }
        let args: Vec<PolarizedScalar> = self
            .holo_map
            .iter()
            .chain(&self.anti_map)
            .cloned()
            .collect();
        f.substitute(&args).with_hermitian(f.is_hermitian())
    }

    /// Sphere symbol expressed in slice coordinates.
    pub fn symbol_kernel(&self, s: &AdmissibleSymbol) -> Result<PolarizedScalar> {
        match (&self.model.action, &self.normalization) {
            (CircleAction::Weighted(w), Some(u)) => {
                s.check_invariant(w)?;
                Ok(s.to_slice_kernel(w, u))
            }
            _ => Ok(s.to_affine_kernel()),
        }
    }

    /// Intrinsic quotient Laplacian `Δ_N`.
    pub fn laplacian(&self, f: &PolarizedScalar) -> Result<PolarizedScalar> {
        self.chart.laplacian(f)
    }

    pub fn grad_norm_sq(&self, f: &PolarizedScalar) -> Result<PolarizedScalar> {
        self.chart.grad_norm_sq(f)
    }

    pub fn poisson_bracket(
        &self,
        f: &PolarizedScalar,
        g: &PolarizedScalar,
    ) -> Result<PolarizedScalar> {
        self.chart.poisson_bracket(f, g)
    }

    pub fn scalar_curvature(&self) -> Result<PolarizedScalar> {
        self.chart.scalar_curvature()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn weights_with_common_factor_are_rejected() {
        assert!(HamiltonianCircleModel::weighted_projective(&[2, 4]).is_err());
        assert!(HamiltonianCircleModel::weighted_projective(&[0, 1]).is_err());
    }

    #[test]
    fn normalization_matches_closed_form() {
        let m = HamiltonianCircleModel::weighted_projective(&[1, 2]).unwrap();
        let q = m.quotient_chart(&[c(0.0, 0.0)]).unwrap();
        let u = q.normalization().unwrap();
        for z in [c(1.0, 0.0), c(0.3, -0.4), c(2.0, 1.0)] {
            let r = z.norm_sqr();
            let want = (-1.0 + (1.0 + 4.0 * r).sqrt()) / (2.0 * r);
            let got = u.value(&[z]).unwrap();
            assert!((got.re - want).abs() <= 1e-14 * want);
        }
    }

    #[test]
    fn complex_slot_root_agrees_with_closed_form() {
        let m = HamiltonianCircleModel::weighted_projective(&[1, 2]).unwrap();
        let q = m.quotient_chart(&[c(0.0, 0.0)]).unwrap();
        let u = q.normalization().unwrap();
        let (z, w) = (c(0.5, 0.1), c(0.45, -0.05));
        let got = u.eval_offdiag(&[z], &[w]).unwrap();
        let p = z * w.conj();
        let want = (-1.0 + (1.0 + 4.0 * p).sqrt()) / (2.0 * p);
        assert!((got - want).norm() < 1e-13);
    }

    #[test]
    fn equal_weights_reduce_to_base() {
        let m = HamiltonianCircleModel::weighted_projective(&[1, 1]).unwrap();
        let q = m.quotient_chart(&[c(0.0, 0.0)]).unwrap();
        for z in [c(0.2, 0.1), c(-1.0, 0.5)] {
            let a = q.chart().potential().value(&[z]).unwrap();
            let b = m.base().potential().value(&[z]).unwrap();
            assert!((a - b).norm() < 1e-14);
            assert!((q.phi().value(&[z]).unwrap() - c(1.0, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn slice_phi_is_two_minus_u() {
        let m = HamiltonianCircleModel::weighted_projective(&[1, 2]).unwrap();
        let q = m.quotient_chart(&[c(0.0, 0.0)]).unwrap();
        let z = [c(0.5, 0.0)];
        let u = q.normalization().unwrap().value(&z).unwrap();
        assert!((q.phi().value(&z).unwrap() - (2.0 - u)).norm() < 1e-14);
        let transported = q.transport(m.phi());
        assert!((transported.value(&z).unwrap() - (2.0 - u)).norm() < 1e-14);
    }

    #[test]
    fn rotation_preserves_phi() {
        let m = HamiltonianCircleModel::weighted_projective(&[1, 1, 2]).unwrap();
        let pts = vec![vec![c(0.3, 0.1), c(-0.2, 0.4)]];
        m.check_invariant(m.phi(), &pts).unwrap();
        let z1 = PolarizedScalar::z(2, 1);
        assert!(matches!(
            m.check_invariant(&z1, &pts),
            Err(Error::NotInvariant { .. })
        ));
    }
}
