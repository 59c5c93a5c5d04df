//! Coefficients of the equivariant Szegő and Toeplitz expansions.
//!
//! Everything here lives on the quotient chart: `Φ`, `Δ`, `ϱ` and the
//! gradient norms are those of the slice coordinates. Kernels depending on a
//! base point `n₀` carry it in parameter slots, so that restricting to the
//! diagonal `n = n₀` yields an ordinary kernel in `n₀`.

use num_complex::Complex64;

use crate::englis::EnglisOperators;
use crate::error::{Error, Result};
use crate::polarized::PolarizedScalar;
use crate::quotient::QuotientChart;

/// Weight of `G^{b̄a}(∂_a g)(∂_b̄ f)` inside the composition coefficient.
pub const PAIRING_FACTOR: f64 = 1.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Provenance {
    Recursion,
    ClosedForm,
}

#[derive(Clone, Debug)]
pub struct CoefficientEntry {
    pub j: usize,
    pub kernel: PolarizedScalar,
    pub provenance: Provenance,
}

/// `S_0, S_1, …` for one quotient chart.
#[derive(Clone, Debug)]
pub struct CoefficientTable {
    quotient: QuotientChart,
    entries: Vec<CoefficientEntry>,
}

/// `S_0 = Φ^{−(d+1)}`
pub fn s0(q: &QuotientChart) -> PolarizedScalar {
    let d = q.dim() as i32;
    q.phi().powi(-(d + 1)).with_hermitian(true)
}

/// Slot variables `(z, ζ)` and base-point parameters `(p, π)`.
struct Slots {
    z: Vec<PolarizedScalar>,
    zeta: Vec<PolarizedScalar>,
    p: Vec<PolarizedScalar>,
    pi: Vec<PolarizedScalar>,
}

impl Slots {
    fn new(d: usize) -> Self {
        Slots {
            z: (0..d).map(|i| PolarizedScalar::z(d, i)).collect(),
            zeta: (0..d).map(|i| PolarizedScalar::zeta(d, i)).collect(),
            p: (0..d)
                .map(|i| PolarizedScalar::param(d, 2 * d, i))
                .collect(),
            pi: (0..d)
                .map(|i| PolarizedScalar::param(d, 2 * d, d + i))
                .collect(),
        }
    }

    /// `S̃(n₀, n)`
    fn from_base(&self, s: &PolarizedScalar) -> PolarizedScalar {
        let args: Vec<PolarizedScalar> = self.p.iter().chain(&self.zeta).cloned().collect();
        s.substitute(&args)
    }

    /// `S̃(n, n₀)`
    fn to_base(&self, s: &PolarizedScalar) -> PolarizedScalar {
        let args: Vec<PolarizedScalar> = self.z.iter().chain(&self.pi).cloned().collect();
        s.substitute(&args)
    }

    /// `K(n₀, n₀)` as a kernel in `n₀`.
    fn diagonal(&self, k: &PolarizedScalar) -> PolarizedScalar {
        if k.params() == 0 {
            return k.clone();
        }
        let args: Vec<PolarizedScalar> = self
            .z
            .iter()
            .chain(&self.zeta)
            .chain(&self.z)
            .chain(&self.zeta)
            .cloned()
            .collect();
        k.substitute(&args)
    }

    /// Fixes the parameters at `n₀`.
    fn bind(&self, k: &PolarizedScalar, n0: &[Complex64]) -> PolarizedScalar {
        if k.params() == 0 {
            return k.clone();
        }
        let d = self.z.len();
        let mut args: Vec<PolarizedScalar> = self.z.iter().chain(&self.zeta).cloned().collect();
        args.extend(n0.iter().map(|&c| PolarizedScalar::constant(d, c)));
        args.extend(n0.iter().map(|&c| PolarizedScalar::constant(d, c.conj())));
        k.substitute(&args)
    }
}

impl CoefficientTable {
    /// Table holding `S_0` only.
    pub fn new(q: &QuotientChart) -> Self {
        CoefficientTable {
            quotient: q.clone(),
            entries: vec![CoefficientEntry {
                j: 0,
                kernel: s0(q),
                provenance: Provenance::ClosedForm,
            }],
        }
    }

    /// Table `S_0, …, S_order` built by the recursion.
    pub fn build(q: &QuotientChart, ops: &EnglisOperators, order: usize) -> Result<Self> {
        let mut t = Self::new(q);
        while t.top() < order {
            t = t.next_s(ops)?;
        }
        Ok(t)
    }

    pub fn quotient(&self) -> &QuotientChart {
        &self.quotient
    }

    pub fn entries(&self) -> &[CoefficientEntry] {
        &self.entries
    }

    /// Highest `j` present.
    pub fn top(&self) -> usize {
        self.entries.len() - 1
    }

    pub fn s(&self, j: usize) -> Result<&PolarizedScalar> {
        self.entries
            .get(j)
            .map(|e| &e.kernel)
            .ok_or(Error::MissingCoefficient(j))
    }

    /// `Z_j(n₀, n) = Φ(n)^{d+1} Σ_{a+b=j} S̃_a(n₀, n) S̃_b(n, n₀)` with `n₀`
    /// left in parameter slots.
    fn zj_param(&self, j: usize, slots: &Slots) -> Result<PolarizedScalar> {
        let d = self.quotient.dim() as i32;
        let mut sum: Option<PolarizedScalar> = None;
        for a in 0..=j {
            let term = &slots.from_base(self.s(a)?) * &slots.to_base(self.s(j - a)?);
            sum = Some(match sum {
                None => term,
                Some(s) => &s + &term,
            });
        }
        let sum = sum.expect("at least one term");
        Ok(&self.quotient.phi().powi(d + 1) * &sum)
    }

    /// `Z_j(n₀, ·)` as a kernel in `n`.
    pub fn zj(&self, j: usize, n0: &[Complex64]) -> Result<PolarizedScalar> {
        let slots = Slots::new(self.quotient.dim());
        Ok(slots.bind(&self.zj_param(j, &slots)?, n0))
    }

    /// Extends the table by `S_{j+1}` from
    /// `S_{j+1} = −Φ^{d+1} Σ_{l=1}^{j} S_l S_{j+1−l} − Σ_{r=1}^{j+1} R_r(Z_{j+1−r}(n₀,·))|_{n₀}`.
    pub fn next_s(&self, ops: &EnglisOperators) -> Result<CoefficientTable> {
        let j = self.top();
        if ops.max_order() < j + 1 {
            return Err(Error::Capability(format!(
                "S_{} needs R_{}, only R_0..R_{} are available",
                j + 1,
                j + 1,
                ops.max_order()
            )));
        }
        let q = &self.quotient;
        let d = q.dim();
        let slots = Slots::new(d);
        let chart = q.chart();
        let mut acc = PolarizedScalar::real(d, 0.0);
        if j >= 1 {
            let mut quad = PolarizedScalar::real(d, 0.0);
            for l in 1..=j {
                quad = &quad + &(self.s(l)? * self.s(j + 1 - l)?);
            }
            acc = &acc - &(&q.phi().powi(d as i32 + 1) * &quad);
        }
        for r in 1..=j + 1 {
            let z = self.zj_param(j + 1 - r, &slots)?;
            let applied = ops.apply(r, chart, &z)?;
            acc = &acc - &slots.diagonal(&applied);
        }
        let mut out = self.clone();
        out.entries.push(CoefficientEntry {
            j: j + 1,
            kernel: acc.with_hermitian(true),
            provenance: Provenance::Recursion,
        });
        Ok(out)
    }
}

/// `S_1 = ½ ϱ Φ^{−(d+1)} + (d+1) Φ^{−(d+2)} [‖grad Φ‖²/(2Φ) − ΔΦ]`.
pub fn s1_closed_form(q: &QuotientChart) -> Result<PolarizedScalar> {
    let d = q.dim() as i32;
    let phi = q.phi();
    let rho = q.scalar_curvature()?;
    let lead = &rho.scale_real(0.5) * &phi.powi(-(d + 1));
    let bracket = &(&q.grad_norm_sq(phi)? / &phi.scale_real(2.0)) - &q.laplacian(phi)?;
    let corr = &phi.powi(-(d + 2)).scale_real((d + 1) as f64) * &bracket;
    Ok((&lead + &corr).with_hermitian(true))
}

/// `S_j[f](n₀) = Σ_{r+s=j} R_r(f · Z_s(n₀, ·))|_{n₀}` for `f` in slice
/// coordinates.
pub fn toeplitz_sj(
    table: &CoefficientTable,
    f: &PolarizedScalar,
    ops: &EnglisOperators,
    j: usize,
) -> Result<PolarizedScalar> {
    if ops.max_order() < j {
        return Err(Error::Capability(format!(
            "S_{j}[f] needs R_{j}, only R_0..R_{} are available",
            ops.max_order()
        )));
    }
    let q = table.quotient();
    let d = q.dim();
    let slots = Slots::new(d);
    let mut acc = PolarizedScalar::real(d, 0.0);
    for r in 0..=j {
        let z = table.zj_param(j - r, &slots)?;
        let applied = ops.apply(r, q.chart(), &(f * &z))?;
        acc = &acc + &slots.diagonal(&applied);
    }
    Ok(acc.with_hermitian(f.is_hermitian()))
}

/// `S_0[f], …, S_order[f]`.
pub fn toeplitz_table(
    table: &CoefficientTable,
    f: &PolarizedScalar,
    ops: &EnglisOperators,
    order: usize,
) -> Result<Vec<PolarizedScalar>> {
    (0..=order).map(|j| toeplitz_sj(table, f, ops, j)).collect()
}

/// `S_1[f] = Φ^{−(d+1)} Δ f + S_1 f`.
pub fn toeplitz_s1_closed_form(q: &QuotientChart, f: &PolarizedScalar) -> Result<PolarizedScalar> {
    let d = q.dim() as i32;
    let lap = &q.phi().powi(-(d + 1)) * &q.laplacian(f)?;
    Ok((&lap + &(&s1_closed_form(q)? * f)).with_hermitian(f.is_hermitian()))
}

/// Coefficients `B_j f` of the Berezin transform as the formal ratio of the
/// Toeplitz and Szegő series.
pub fn berezin_expansion(
    toeplitz: &[PolarizedScalar],
    szego: &[PolarizedScalar],
) -> Result<Vec<PolarizedScalar>> {
    if toeplitz.len() != szego.len() || szego.is_empty() {
        return Err(Error::OrderMismatch(format!(
            "{} Toeplitz coefficients against {} Szego coefficients",
            toeplitz.len(),
            szego.len()
        )));
    }
    let inv0 = szego[0].recip();
    let mut b: Vec<PolarizedScalar> = Vec::with_capacity(szego.len());
    for j in 0..szego.len() {
        let mut num = toeplitz[j].clone();
        for i in 1..=j {
            num = &num - &(&szego[i] * &b[j - i]);
        }
        let h = toeplitz[j].is_hermitian();
        b.push((&num * &inv0).with_hermitian(h));
    }
    Ok(b)
}

/// `−i Φ^{−(d+1)} {f, g}_N`, the `k^{−1}` coefficient of the commutator
/// diagonal.
pub fn commutator_leading(
    q: &QuotientChart,
    f: &PolarizedScalar,
    g: &PolarizedScalar,
) -> Result<PolarizedScalar> {
    let d = q.dim() as i32;
    let pb = q.poisson_bracket(f, g)?;
    Ok((&q.phi().powi(-(d + 1)) * &pb).scale(Complex64::new(0.0, -1.0)))
}

/// The same coefficient written on the base chart, `−i Φ^{−d} {f, g}_M`.
pub fn commutator_leading_base(
    q: &QuotientChart,
    f_base: &PolarizedScalar,
    g_base: &PolarizedScalar,
) -> Result<PolarizedScalar> {
    let model = q.model();
    let d = model.dim() as i32;
    let pb = model.base().poisson_bracket(f_base, g_base)?;
    Ok((&model.phi().powi(-d) * &pb).scale(Complex64::new(0.0, -1.0)))
}

/// `A_1[f, g] = Φ^{−(d+1)} [f Δg + g Δf + G^{b̄a}(∂_a g)(∂_b̄ f)] + S_1 f g`,
/// the `k^{−1}` coefficient of the composition diagonal.
pub fn a1_composition(
    table: &CoefficientTable,
    f: &PolarizedScalar,
    g: &PolarizedScalar,
) -> Result<PolarizedScalar> {
    let q = table.quotient();
    let d = q.dim() as i32;
    let inner = &(&(f * &q.laplacian(g)?) + &(g * &q.laplacian(f)?))
        + &q.chart().gradient_pairing(f, g)?.scale_real(PAIRING_FACTOR);
    let s1 = table.s(1)?;
    Ok(&(&q.phi().powi(-(d + 1)) * &inner) + &(&(s1 * f) * g))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kahler::KahlerChart;
    use crate::quotient::HamiltonianCircleModel;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn fs_s1_is_one() {
        let m = HamiltonianCircleModel::trivial(KahlerChart::fubini_study(1));
        let q = m.quotient_chart(&[c(0.0, 0.0)]).unwrap();
        let t = CoefficientTable::build(&q, &EnglisOperators::standard(), 1).unwrap();
        for z in [c(0.0, 0.0), c(0.4, -0.3)] {
            assert!((t.s(1).unwrap().value(&[z]).unwrap() - c(1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn recursion_matches_closed_form_weighted() {
        let m = HamiltonianCircleModel::weighted_projective(&[1, 2]).unwrap();
        let q = m.quotient_chart(&[c(0.0, 0.0)]).unwrap();
        let t = CoefficientTable::build(&q, &EnglisOperators::standard(), 1).unwrap();
        let cf = s1_closed_form(&q).unwrap();
        for z in [c(0.5, 0.0), c(0.2, 0.7), c(-1.0, 0.3)] {
            let a = t.s(1).unwrap().value(&[z]).unwrap();
            let b = cf.value(&[z]).unwrap();
            assert!((a - b).norm() <= 1e-9 * b.norm(), "{a} vs {b}");
        }
        // oracle fit at z = 0.5
        let v = cf.value(&[c(0.5, 0.0)]).unwrap().re;
        assert!((v - 0.94194173813).abs() < 1e-9);
    }

    #[test]
    fn next_s_needs_operators() {
        let m = HamiltonianCircleModel::weighted_projective(&[1, 2]).unwrap();
        let q = m.quotient_chart(&[c(0.0, 0.0)]).unwrap();
        let t = CoefficientTable::new(&q);
        assert!(matches!(
            t.next_s(&EnglisOperators::identity_only()),
            Err(Error::Capability(_))
        ));
        let t1 = t.next_s(&EnglisOperators::standard()).unwrap();
        assert!(matches!(
            t1.next_s(&EnglisOperators::standard()),
            Err(Error::Capability(_))
        ));
    }

    #[test]
    fn z0_diagonal_and_z1() {
        let m = HamiltonianCircleModel::weighted_projective(&[1, 2]).unwrap();
        let q = m.quotient_chart(&[c(0.0, 0.0)]).unwrap();
        let t = CoefficientTable::build(&q, &EnglisOperators::standard(), 1).unwrap();
        let n0 = [c(0.3, 0.2)];
        let phi = q.phi().value(&n0).unwrap();
        let z0 = t.zj(0, &n0).unwrap().value(&n0).unwrap();
        assert!((z0 - phi.powi(-2)).norm() < 1e-14);
        let z1 = t.zj(1, &n0).unwrap().value(&n0).unwrap();
        let s1 = t.s(1).unwrap().value(&n0).unwrap();
        assert!((z1 - s1 * 2.0).norm() < 1e-12);
    }
}
