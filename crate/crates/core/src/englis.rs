//! Laplace integrals against the diastasis and their asymptotic expansion.
//!
//! `I(λ, y) = ∫ e^{−λ D(x,y)} f(x) det G(x) dx` behaves like
//! `(π/λ)^d Σ_j λ^{−j} R_j(f)(y)` with `R_0 = id` and `R_1 = Δ − ϱ/2`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kahler::KahlerChart;
use crate::polarized::PolarizedScalar;
use crate::quadrature::GaussLegendre;

pub type EnglisOp =
    Arc<dyn Fn(&KahlerChart, &PolarizedScalar) -> Result<PolarizedScalar> + Send + Sync>;

/// Ordered list of the operators `R_0, R_1, …`.
#[derive(Clone)]
pub struct EnglisOperators {
    ops: Vec<EnglisOp>,
}

impl fmt::Debug for EnglisOperators {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "EnglisOperators(max_order = {})", self.max_order())
    }
}

impl Default for EnglisOperators {
    fn default() -> Self {
        Self::standard()
    }
}

impl EnglisOperators {
    /// `R_0 = id`, `R_1 = Δ − ϱ/2`.
    pub fn standard() -> Self {
        let r0: EnglisOp = Arc::new(|_, f| Ok(f.clone()));
        let r1: EnglisOp = Arc::new(|chart, f| {
            let half_rho = chart.scalar_curvature()?.scale_real(0.5);
            Ok((&chart.laplacian(f)? - &(&half_rho * f)).with_hermitian(f.is_hermitian()))
        });
        EnglisOperators { ops: vec![r0, r1] }
    }

    /// Identity only; useful to exercise capability errors.
    pub fn identity_only() -> Self {
        let r0: EnglisOp = Arc::new(|_, f| Ok(f.clone()));
        EnglisOperators { ops: vec![r0] }
    }

    /// Appends `R_{max_order+1}`.
    pub fn push(mut self, op: EnglisOp) -> Self {
        self.ops.push(op);
        self
    }

    pub fn max_order(&self) -> usize {
        self.ops.len() - 1
    }

    pub fn apply(
        &self,
        j: usize,
        chart: &KahlerChart,
        f: &PolarizedScalar,
    ) -> Result<PolarizedScalar> {
        match self.ops.get(j) {
            Some(op) => op(chart, f),
            None => Err(Error::Capability(format!(
                "Englis operator R_{j} requested, only R_0..R_{} are available",
                self.max_order()
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureConfig {
    /// Nodes per axis on the first pass.
    pub initial_nodes: usize,
    /// Refinement stops with an error beyond this many nodes per axis.
    pub max_nodes: usize,
    pub rel_tol: f64,
    /// Truncation where `λ D` exceeds this value.
    pub cutoff: f64,
    /// Smallest `λ` accepted as asymptotic.
    pub min_lambda: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            initial_nodes: 32,
            max_nodes: 512,
            rel_tol: 1e-9,
            cutoff: 40.0,
            min_lambda: 10.0,
        }
    }
}

struct Integrand<'a> {
    chart: &'a KahlerChart,
    f: &'a PolarizedScalar,
    y: &'a [Complex64],
    xi_y: f64,
    lambda: f64,
}

impl Integrand<'_> {
    fn diastasis(&self, x: &[Complex64]) -> Result<f64> {
        let xi = self.chart.potential();
        Ok(xi.value(x)?.re + self.xi_y - 2.0 * xi.eval_offdiag(x, self.y)?.re)
    }

    fn eval(&self, x: &[Complex64]) -> Result<f64> {
        // one second-order jet of Ξ gives both Ξ(x) and det G(x); walking the
        // symbolic determinant is an order of magnitude slower
        let d = x.len();
        let xi = self.chart.potential();
        let xbar: Vec<Complex64> = x.iter().map(|c| c.conj()).collect();
        let jet = xi.taylor(x, &xbar, 2)?;
        let mut multi = vec![0u8; 2 * d];
        let mut g = |a: usize, b: usize| {
            multi.iter_mut().for_each(|m| *m = 0);
            multi[a] += 1;
            multi[d + b] += 1;
            jet.derivative(&multi)
        };
        let det = match d {
            1 => g(0, 0).re,
            2 => (g(0, 0) * g(1, 1) - g(0, 1) * g(1, 0)).re,
            _ => self.chart.volume_density().value(x)?.re,
        };
        let dist = jet.value().re + self.xi_y - 2.0 * xi.eval_offdiag(x, self.y)?.re;
        let fx = self.f.value(x)?.re;
        Ok((-self.lambda * dist).exp() * fx * det)
    }

    fn point(&self, dir: &[Complex64], r: f64) -> Vec<Complex64> {
        self.y.iter().zip(dir).map(|(y, u)| y + u * r).collect()
    }

    /// Radius along `dir` where `λ D` first exceeds the cutoff.
    fn radial_limit(&self, dir: &[Complex64], cutoff: f64) -> Result<f64> {
        let over = |r: f64| -> Result<bool> {
            Ok(self.lambda * self.diastasis(&self.point(dir, r))? > cutoff)
        };
        let mut hi = 1e-3;
        while !over(hi)? {
            hi *= 1.5;
            if hi > 1e4 {
                // on compact charts D is bounded, so small λ never localises
                return Err(Error::Capability(format!(
                    "lambda * D stays below the cutoff {cutoff} along a ray at lambda = {}",
                    self.lambda
                )));
            }
        }
        let mut lo = 0.0;
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if over(mid)? {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(hi)
    }
}

/// Trapezoid rule on the circle; spectrally accurate for smooth periodic
/// integrands.
fn periodic(n: usize) -> Vec<(f64, f64)> {
    let h = 2.0 * PI / n as f64;
    (0..n).map(|j| (h * j as f64, h)).collect()
}

fn integrate_1d(ig: &Integrand<'_>, n: usize, cutoff: f64) -> Result<f64> {
    let rule = GaussLegendre::new(n);
    let thetas = periodic(n);
    let parts: Vec<Result<f64>> = thetas
        .par_iter()
        .map(|&(theta, wt)| {
            let dir = [Complex64::from_polar(1.0, theta)];
            let rmax = ig.radial_limit(&dir, cutoff)?;
            let mut s = 0.0;
            for (r, wr) in rule.mapped(0.0, rmax) {
                s += wr * r * ig.eval(&ig.point(&dir, r))?;
            }
            Ok(wt * s)
        })
        .collect();
    parts.into_iter().sum()
}

fn ball_radius_2d(ig: &Integrand<'_>, cutoff: f64) -> Result<f64> {
    let mut rmax: f64 = 0.0;
    let steps = 8;
    for a in 0..=steps {
        let mix = (PI / 2.0) * a as f64 / steps as f64;
        for p in 0..steps {
            for q in 0..steps {
                let t1 = 2.0 * PI * p as f64 / steps as f64;
                let t2 = 2.0 * PI * q as f64 / steps as f64;
                let dir = [
                    Complex64::from_polar(mix.cos(), t1),
                    Complex64::from_polar(mix.sin(), t2),
                ];
                rmax = rmax.max(ig.radial_limit(&dir, cutoff)?);
            }
        }
    }
    Ok(1.1 * rmax)
}

fn integrate_2d(ig: &Integrand<'_>, n: usize, radius: f64) -> Result<f64> {
    let rule = GaussLegendre::new(n);
    let rs: Vec<(f64, f64)> = rule.mapped(0.0, radius).collect();
    let ts = periodic(n);
    let outer: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).collect();
    let parts: Vec<Result<f64>> = outer
        .par_iter()
        .map(|&(i, j)| {
            let (r1, w1) = rs[i];
            let (t1, v1) = ts[j];
            let z1 = ig.y[0] + Complex64::from_polar(r1, t1);
            let mut s = 0.0;
            for &(r2, w2) in &rs {
                for &(t2, v2) in &ts {
                    let z2 = ig.y[1] + Complex64::from_polar(r2, t2);
                    s += w2 * v2 * r2 * ig.eval(&[z1, z2])?;
                }
            }
            Ok(w1 * v1 * r1 * s)
        })
        .collect();
    parts.into_iter().sum()
}

/// `I(λ, y)` by polar quadrature (Gauss–Legendre radially, trapezoid in the
/// angles), refined until successive passes agree.
pub fn laplace_integral(
    chart: &KahlerChart,
    y: &[Complex64],
    f: &PolarizedScalar,
    lambda: f64,
    quad: &QuadratureConfig,
) -> Result<f64> {
    let d = chart.dim();
    if d > 2 {
        return Err(Error::Capability(format!(
            "quadrature supports d <= 2, got d = {d}"
        )));
    }
    if !(lambda >= quad.min_lambda) {
        return Err(Error::Capability(format!(
            "lambda = {lambda} is below the asymptotic guard {}",
            quad.min_lambda
        )));
    }
    let ig = Integrand {
        chart,
        f,
        y,
        xi_y: chart.potential().value(y)?.re,
        lambda,
    };
    let radius = if d == 2 {
        ball_radius_2d(&ig, quad.cutoff)?
    } else {
        0.0
    };
    let run = |n: usize| -> Result<f64> {
        if d == 1 {
            integrate_1d(&ig, n, quad.cutoff)
        } else {
            integrate_2d(&ig, n, radius)
        }
    };
    let mut n = quad.initial_nodes;
    let mut prev = run(n)?;
    let mut change = f64::INFINITY;
    // growing by half keeps the last, most expensive pass small in d = 2
    while n + n / 2 <= quad.max_nodes {
        n += n / 2;
        let cur = run(n)?;
        change = (cur - prev).abs() / cur.abs().max(f64::MIN_POSITIVE);
        if change < quad.rel_tol {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::Quadrature {
        estimate: change,
        nodes: n,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ExpansionRow {
    pub lambda: f64,
    /// `(λ/π)^d I(λ, y)`
    pub scaled: f64,
    /// `Σ_{j ≤ max_order} λ^{−j} R_j(f)(y)`
    pub prediction: f64,
    pub residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExpansionReport {
    pub rows: Vec<ExpansionRow>,
    /// Fitted `p` in `|residual| ~ λ^{−p}`; absent when the expansion terminates.
    pub exponent: Option<f64>,
    pub expected_exponent: f64,
    /// All residuals are at roundoff level.
    pub terminated: bool,
}

/// Least-squares slope of `log |r|` against `log λ`, negated.
pub fn decay_exponent(lambdas: &[f64], residuals: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = lambdas
        .iter()
        .zip(residuals)
        .filter(|(_, r)| r.abs() > 0.0)
        .map(|(l, r)| (l.ln(), r.abs().ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Some(-sxy / sxx)
}

/// Compares quadrature against the truncated expansion over `lambdas`.
pub fn expansion_check(
    chart: &KahlerChart,
    y: &[Complex64],
    f: &PolarizedScalar,
    ops: &EnglisOperators,
    lambdas: &[f64],
    quad: &QuadratureConfig,
) -> Result<ExpansionReport> {
    let d = chart.dim() as i32;
    let mut coeffs = Vec::with_capacity(ops.max_order() + 1);
    for j in 0..=ops.max_order() {
        coeffs.push(ops.apply(j, chart, f)?.value(y)?.re);
    }
    let mut rows = Vec::with_capacity(lambdas.len());
    for &lambda in lambdas {
        let integral = laplace_integral(chart, y, f, lambda, quad)?;
        let scaled = (lambda / PI).powi(d) * integral;
        let prediction: f64 = coeffs
            .iter()
            .enumerate()
            .map(|(j, c)| c * lambda.powi(-(j as i32)))
            .sum();
        rows.push(ExpansionRow {
            lambda,
            scaled,
            prediction,
            residual: scaled - prediction,
        });
    }
    let scale = coeffs.iter().fold(1.0f64, |m, c| m.max(c.abs()));
    let terminated = rows.iter().all(|r| r.residual.abs() <= 1e-8 * scale);
    let exponent = if terminated {
        None
    } else {
        let l: Vec<f64> = rows.iter().map(|r| r.lambda).collect();
        let res: Vec<f64> = rows.iter().map(|r| r.residual).collect();
        decay_exponent(&l, &res)
    };
    Ok(ExpansionReport {
        rows,
        exponent,
        expected_exponent: (ops.max_order() + 1) as f64,
        terminated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn flat_gaussian_is_exact() {
        let chart = KahlerChart::flat(1);
        let one = PolarizedScalar::real(1, 1.0);
        let y = [c(0.3, -0.2)];
        let i = laplace_integral(&chart, &y, &one, 50.0, &QuadratureConfig::default()).unwrap();
        assert!((i * 50.0 / PI - 1.0).abs() < 1e-12);
    }

    #[test]
    fn r1_of_one_on_fs() {
        let fs = KahlerChart::fubini_study(1);
        let ops = EnglisOperators::standard();
        let r1 = ops.apply(1, &fs, &PolarizedScalar::real(1, 1.0)).unwrap();
        assert!((r1.value(&[c(0.4, 0.1)]).unwrap() - c(-1.0, 0.0)).norm() < 1e-12);
        assert!(ops.apply(2, &fs, &PolarizedScalar::real(1, 1.0)).is_err());
    }

    #[test]
    fn lambda_guard() {
        let fs = KahlerChart::fubini_study(1);
        let one = PolarizedScalar::real(1, 1.0);
        let r = laplace_integral(&fs, &[c(0.0, 0.0)], &one, 1.0, &QuadratureConfig::default());
        assert!(matches!(r, Err(Error::Capability(_))));
    }
}
