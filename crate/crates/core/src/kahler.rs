//! Chart-level Kähler geometry from a potential.
//!
//! The single metric tensor is `G_{ab̄} = ∂_a ∂_b̄ Ξ`. Every operator below
//! (Laplacian, gradient norm, Poisson bracket, curvature) is built from `G`
//! as a polarized kernel, so its values and its sesquiholomorphic extension
//! come from the same expression graph.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::polarized::{DerivativeRequest, DomainHint, PolarizedScalar};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Smallest eigenvalue accepted for a positive definite metric.
pub const MIN_EIGENVALUE: f64 = 1e-10;

/// A Kähler potential on a coordinate chart together with its metric.
#[derive(Clone, Debug)]
pub struct KahlerChart {
    label: String,
    potential: PolarizedScalar,
    metric: Arc<MetricKernels>,
}

#[derive(Debug)]
struct MetricKernels {
    // g[a][b] = G_{ab̄}
    g: Vec<Vec<PolarizedScalar>>,
    // inv[b][a] = G^{b̄a}
    inv: Vec<Vec<PolarizedScalar>>,
    det: PolarizedScalar,
}

/// Numeric metric at a chart point.
#[derive(Clone, Debug)]
pub struct MetricAtPoint {
    pub g: DMatrix<Complex64>,
    pub g_inv: DMatrix<Complex64>,
    pub det: f64,
    pub min_eigenvalue: f64,
}

impl KahlerChart {
    pub fn new(label: impl Into<String>, potential: PolarizedScalar) -> Result<Self> {
        let d = potential.dim();
        let mut g = Vec::with_capacity(d);
        for a in 0..d {
            let mut row = Vec::with_capacity(d);
            for b in 0..d {
                row.push(potential.partial(&DerivativeRequest::mixed(d, a, b))?);
            }
            g.push(row);
        }
        let (inv, det) = gauss_jordan(&g);
        Ok(KahlerChart {
            label: label.into(),
            potential,
            metric: Arc::new(MetricKernels { g, inv, det }),
        })
    }

    /// `Ξ = Σ z_j ζ_j`
    pub fn flat(dim: usize) -> Self {
        Self::new(format!("flat C^{dim}"), PolarizedScalar::flat_norm_sq(dim))
            .expect("flat potential is differentiable")
    }

    /// `Ξ = log(1 + Σ z_j ζ_j)` on the standard affine chart of ℂP^d.
    pub fn fubini_study(dim: usize) -> Self {
        let one = PolarizedScalar::real(dim, 1.0);
        let xi = (&one + &PolarizedScalar::flat_norm_sq(dim))
            .ln()
            .with_hermitian(true);
        Self::new(format!("Fubini-Study CP^{dim}"), xi).expect("FS potential is differentiable")
    }

    /// `Ξ = Σ_j log(1 + z_j ζ_j)`, the product of `dim` projective lines.
    pub fn product_fubini_study(dim: usize) -> Self {
        let one = PolarizedScalar::real(dim, 1.0);
        let mut xi = PolarizedScalar::real(dim, 0.0);
        for j in 0..dim {
            let zz = &PolarizedScalar::z(dim, j) * &PolarizedScalar::zeta(dim, j);
            xi = &xi + &(&one + &zz).ln();
        }
        Self::new(format!("(CP^1)^{dim}"), xi.with_hermitian(true))
            .expect("product potential is differentiable")
    }

    pub fn dim(&self) -> usize {
        self.potential.dim()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn potential(&self) -> &PolarizedScalar {
        &self.potential
    }

    pub fn domain(&self) -> &DomainHint {
        self.potential.domain()
    }

    /// `G_{ab̄}` as a kernel.
    pub fn metric_entry(&self, a: usize, b: usize) -> &PolarizedScalar {
        &self.metric.g[a][b]
    }

    /// `G^{b̄a}` as a kernel.
    pub fn inverse_entry(&self, b: usize, a: usize) -> &PolarizedScalar {
        &self.metric.inv[b][a]
    }

    /// `det G` as a kernel (the volume density).
    pub fn volume_density(&self) -> &PolarizedScalar {
        &self.metric.det
    }

    pub fn metric_at(&self, z: &[Complex64]) -> Result<MetricAtPoint> {
        let d = self.dim();
        let mut g = DMatrix::<Complex64>::zeros(d, d);
        for a in 0..d {
            for b in 0..d {
                g[(a, b)] = self.metric.g[a][b].value(z)?;
            }
        }
        // symmetrize away roundoff before the Hermitian eigen-solve
        let h = (&g + g.adjoint()).scale(0.5);
        let min_eigenvalue = h
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        if !(min_eigenvalue > MIN_EIGENVALUE) {
            return Err(Error::DegenerateMetric {
                point: z.to_vec(),
                min_eigenvalue,
            });
        }
        let g_inv = h.clone().try_inverse().ok_or(Error::DegenerateMetric {
            point: z.to_vec(),
            min_eigenvalue,
        })?;
        let det = h.determinant().re;
        Ok(MetricAtPoint {
            g,
            g_inv,
            det,
            min_eigenvalue,
        })
    }

    fn contract(
        &self,
        pairs: impl Fn(usize, usize) -> Result<PolarizedScalar>,
    ) -> Result<PolarizedScalar> {
        let d = self.dim();
        let mut acc: Option<PolarizedScalar> = None;
        for a in 0..d {
            for b in 0..d {
                let term = &self.metric.inv[b][a] * &pairs(a, b)?;
                acc = Some(match acc {
                    None => term,
                    Some(s) => &s + &term,
                });
            }
        }
        Ok(acc.expect("dimension is positive"))
    }

    /// `Δf = G^{b̄a} ∂_a ∂_b̄ f`
    pub fn laplacian(&self, f: &PolarizedScalar) -> Result<PolarizedScalar> {
        let d = self.dim();
        let out = self.contract(|a, b| f.partial(&DerivativeRequest::mixed(d, a, b)))?;
        Ok(out.with_hermitian(f.is_hermitian()))
    }

    /// `‖grad f‖² = 2 G^{b̄a} (∂_a f)(∂_b̄ f)`
    pub fn grad_norm_sq(&self, f: &PolarizedScalar) -> Result<PolarizedScalar> {
        let out = self.contract(|a, b| Ok(&f.d_holo(a)? * &f.d_anti(b)?))?;
        Ok(out.scale_real(2.0).with_hermitian(f.is_hermitian()))
    }

    /// Real inner product `⟨grad f, grad g⟩ = G^{b̄a}(∂_a f ∂_b̄ g + ∂_a g ∂_b̄ f)`.
    pub fn grad_inner(&self, f: &PolarizedScalar, g: &PolarizedScalar) -> Result<PolarizedScalar> {
        let out = self.contract(|a, b| {
            Ok(&(&f.d_holo(a)? * &g.d_anti(b)?) + &(&g.d_holo(a)? * &f.d_anti(b)?))
        })?;
        Ok(out.with_hermitian(f.is_hermitian() && g.is_hermitian()))
    }

    /// `G^{b̄a} (∂_a g)(∂_b̄ f)`, the (1,0)–(0,1) gradient pairing.
    pub fn gradient_pairing(
        &self,
        f: &PolarizedScalar,
        g: &PolarizedScalar,
    ) -> Result<PolarizedScalar> {
        self.contract(|a, b| Ok(&g.d_holo(a)? * &f.d_anti(b)?))
    }

    /// `{f, g} = −i G^{b̄a} (∂_a f ∂_b̄ g − ∂_a g ∂_b̄ f)`
    pub fn poisson_bracket(
        &self,
        f: &PolarizedScalar,
        g: &PolarizedScalar,
    ) -> Result<PolarizedScalar> {
        let out = self.contract(|a, b| {
            Ok(&(&f.d_holo(a)? * &g.d_anti(b)?) - &(&g.d_holo(a)? * &f.d_anti(b)?))
        })?;
        Ok(out
            .scale(-I)
            .with_hermitian(f.is_hermitian() && g.is_hermitian()))
    }

    /// `ϱ = Δ(−log det G)`
    pub fn scalar_curvature(&self) -> Result<PolarizedScalar> {
        let ricci_potential = -&self.metric.det.ln();
        Ok(self.laplacian(&ricci_potential)?.with_hermitian(true))
    }

    /// `ϱ = G^{b̄a} G^{d̄c} R_{ab̄cd̄}` with
    /// `R_{ab̄cd̄} = −∂_c∂_d̄ G_{ab̄} + G^{q̄p} (∂_c G_{aq̄})(∂_d̄ G_{pb̄})`.
    pub fn scalar_curvature_tensor(&self) -> Result<PolarizedScalar> {
        let d = self.dim();
        let g = &self.metric.g;
        let inv = &self.metric.inv;
        let mut acc = PolarizedScalar::real(d, 0.0);
        for a in 0..d {
            for b in 0..d {
                for c in 0..d {
                    for e in 0..d {
                        let mut r = -&g[a][b].partial(&DerivativeRequest::mixed(d, c, e))?;
                        for p in 0..d {
                            for q in 0..d {
                                let t = &(&inv[q][p] * &g[a][q].d_holo(c)?) * &g[p][b].d_anti(e)?;
                                r = &r + &t;
                            }
                        }
                        acc = &acc + &(&(&inv[b][a] * &inv[e][c]) * &r);
                    }
                }
            }
        }
        Ok(acc.with_hermitian(true))
    }

    /// Calabi diastasis `Ξ(z) + Ξ(w) − Ξ̃(z,w) − Ξ̃(w,z)` with its imaginary
    /// roundoff kept.
    pub fn diastasis_complex(&self, z: &[Complex64], w: &[Complex64]) -> Result<Complex64> {
        let xi = &self.potential;
        Ok(xi.value(z)? + xi.value(w)? - xi.eval_offdiag(z, w)? - xi.eval_offdiag(w, z)?)
    }

    pub fn diastasis(&self, z: &[Complex64], w: &[Complex64]) -> Result<f64> {
        Ok(self.diastasis_complex(z, w)?.re)
    }

    /// `F_f(p) = f(p) / (f̃(p, p0) f̃(p0, p))`.
    pub fn normalized_kernel(
        &self,
        f: &PolarizedScalar,
        p0: &[Complex64],
    ) -> Result<PolarizedScalar> {
        let f0 = f.value(p0)?;
        if f0.norm() == 0.0 {
            return Err(Error::VanishingExtension { point: p0.to_vec() });
        }
        let f1 = f.freeze_anti(p0);
        let f2 = f.freeze_holo(p0);
        Ok((f / &(&f1 * &f2)).with_hermitian(f.is_hermitian()))
    }
}

/// Inverse and determinant of a kernel matrix by Gauss-Jordan elimination
/// without pivoting. Valid near the diagonal, where the matrix is positive
/// definite.
fn gauss_jordan(g: &[Vec<PolarizedScalar>]) -> (Vec<Vec<PolarizedScalar>>, PolarizedScalar) {
    let d = g.len();
    let dim = g[0][0].dim();
    if d == 1 {
        let det = g[0][0].clone().with_hermitian(true);
        return (vec![vec![det.recip()]], det);
    }
    let zero = PolarizedScalar::real(dim, 0.0);
    let one = PolarizedScalar::real(dim, 1.0);
    let mut m: Vec<Vec<PolarizedScalar>> = g.to_vec();
    let mut inv: Vec<Vec<PolarizedScalar>> = (0..d)
        .map(|i| {
            (0..d)
                .map(|j| if i == j { one.clone() } else { zero.clone() })
                .collect()
        })
        .collect();
    let mut det = one.clone();
    for col in 0..d {
        let pivot = m[col][col].clone();
        det = &det * &pivot;
        let rp = pivot.recip();
        for j in 0..d {
            m[col][j] = &m[col][j] * &rp;
            inv[col][j] = &inv[col][j] * &rp;
        }
        for row in 0..d {
            if row == col {
                continue;
            }
            let factor = m[row][col].clone();
            for j in 0..d {
                m[row][j] = &m[row][j] - &(&factor * &m[col][j]);
                inv[row][j] = &inv[row][j] - &(&factor * &inv[col][j]);
            }
        }
    }
    // inv holds H^{-1} with H[a][b] = G_{ab̄}; G^{b̄a} = (H^{-1})[b][a]
    (inv, det.with_hermitian(true))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn flat_metric_is_identity() {
        let m = KahlerChart::flat(1).metric_at(&[c(0.4, -1.0)]).unwrap();
        assert!((m.g[(0, 0)] - c(1.0, 0.0)).norm() < 1e-15);
        assert!((m.det - 1.0).abs() < 1e-15);
    }

    #[test]
    fn fs_metric_at_one_is_quarter() {
        let fs = KahlerChart::fubini_study(1);
        let m = fs.metric_at(&[c(1.0, 0.0)]).unwrap();
        assert!((m.g[(0, 0)].re - 0.25).abs() < 1e-15);
        assert!((fs.metric_at(&[c(0.0, 0.0)]).unwrap().det - 1.0).abs() < 1e-15);
    }

    #[test]
    fn fs_curvature_is_two() {
        let fs = KahlerChart::fubini_study(1);
        let rho = fs.scalar_curvature().unwrap();
        let rho_t = fs.scalar_curvature_tensor().unwrap();
        for z in [c(0.0, 0.0), c(0.3, 0.2), c(-1.1, 0.7)] {
            assert!((rho.value(&[z]).unwrap() - c(2.0, 0.0)).norm() < 1e-12);
            assert!((rho_t.value(&[z]).unwrap() - c(2.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn product_curvature_is_four() {
        let ch = KahlerChart::product_fubini_study(2);
        let rho = ch.scalar_curvature().unwrap();
        let p = [c(0.2, 0.1), c(-0.4, 0.3)];
        assert!((rho.value(&p).unwrap() - c(4.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn fs_cp2_metric_inverse() {
        let ch = KahlerChart::fubini_study(2);
        let p = [c(0.2, 0.1), c(-0.4, 0.3)];
        let m = ch.metric_at(&p).unwrap();
        let prod = &m.g * &m.g_inv;
        for i in 0..2 {
            for j in 0..2 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((prod[(i, j)] - c(want, 0.0)).norm() < 1e-12);
            }
        }
        let inv = ch.inverse_entry(1, 0).value(&p).unwrap();
        assert!((inv - m.g_inv[(1, 0)]).norm() < 1e-12);
        let rho = ch.scalar_curvature().unwrap().value(&p).unwrap();
        let rho_t = ch.scalar_curvature_tensor().unwrap().value(&p).unwrap();
        // CP^2 with this normalization has constant curvature d(d+1) = 6
        assert!((rho - c(6.0, 0.0)).norm() < 1e-11);
        assert!((rho_t - c(6.0, 0.0)).norm() < 1e-11);
    }

    #[test]
    fn diastasis_examples() {
        let fs = KahlerChart::fubini_study(1);
        let d = fs.diastasis(&[c(1.0, 0.0)], &[c(0.0, 0.0)]).unwrap();
        assert!((d - 2f64.ln()).abs() < 1e-15);
        let flat = KahlerChart::flat(1);
        let (z, w) = (c(0.3, 0.4), c(-0.1, 0.2));
        assert!((flat.diastasis(&[z], &[w]).unwrap() - (z - w).norm_sqr()).abs() < 1e-15);
    }

    #[test]
    fn degenerate_metric_is_reported() {
        let zz = PolarizedScalar::flat_norm_sq(1);
        let ch = KahlerChart::new("neg", zz.scale_real(-1.0)).unwrap();
        assert!(matches!(
            ch.metric_at(&[c(0.0, 0.0)]),
            Err(Error::DegenerateMetric { .. })
        ));
    }
}
