//! Runtime property suites, one per module.
//!
//! Each property samples a handful of points from a seeded generator and
//! reports the worst deviation it saw against a fixed threshold.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::coefficients::{
    berezin_expansion, s0, s1_closed_form, toeplitz_s1_closed_form, toeplitz_table,
    CoefficientTable,
};
use crate::englis::{laplace_integral, EnglisOperators, QuadratureConfig};
use crate::error::Result;
use crate::fit::{fit_coefficients, half_power_check, HALF_POWER_TOL};
use crate::kahler::KahlerChart;
use crate::oracle::{Precision, WeightedProjectiveOracle};
use crate::polarized::{DerivativeRequest, PolarizedScalar};
use crate::quadrature::GaussLegendre;
use crate::quotient::HamiltonianCircleModel;
use crate::symbol::AdmissibleSymbol;

#[derive(Clone, Debug, Serialize)]
pub struct InvariantOutcome {
    pub suite: &'static str,
    pub name: &'static str,
    /// Worst observed deviation.
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

fn outcome(
    suite: &'static str,
    name: &'static str,
    value: Result<f64>,
    tolerance: f64,
) -> InvariantOutcome {
    let value = value.unwrap_or(f64::INFINITY);
    InvariantOutcome {
        suite,
        name,
        value,
        tolerance,
        passed: value <= tolerance,
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn disc_point(rng: &mut ChaCha8Rng, dim: usize, radius: f64) -> Vec<Complex64> {
    (0..dim)
        .map(|_| {
            let r = radius * rng.gen::<f64>().sqrt();
            Complex64::from_polar(r, 2.0 * PI * rng.gen::<f64>())
        })
        .collect()
}

fn sphere_point(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
    let v: Vec<Complex64> = (0..n)
        .map(|_| c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
        .collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.iter().map(|z| z / norm).collect()
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}

pub fn polarized_suite(seed: u64) -> Vec<InvariantOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts: Vec<(Vec<Complex64>, Vec<Complex64>)> = (0..8)
        .map(|_| (disc_point(&mut rng, 2, 0.7), disc_point(&mut rng, 2, 0.7)))
        .collect();
    let pot = KahlerChart::fubini_study(2).potential().clone();
    let hermitian = (|| {
        let mut worst: f64 = 0.0;
        for (z, w) in &pts {
            let a = pot.eval_offdiag(z, w)?;
            let b = pot.eval_offdiag(w, z)?.conj();
            worst = worst.max((a - b).norm());
        }
        Ok(worst)
    })();
    let schwarz = (|| {
        let mut worst: f64 = 0.0;
        let f = (&pot * &PolarizedScalar::z(2, 1)).exp();
        let ab = f.d_holo(0)?.d_anti(1)?.d_holo(1)?;
        let ba = f.d_holo(1)?.d_anti(1)?.d_holo(0)?;
        let joint = f.partial(&DerivativeRequest::new(vec![1, 1], vec![0, 1]))?;
        for (z, _) in &pts {
            let (x, y, j) = (ab.value(z)?, ba.value(z)?, joint.value(z)?);
            worst = worst.max(rel(x, y)).max(rel(j, y));
        }
        Ok(worst)
    })();
    let division = (|| {
        let mut worst: f64 = 0.0;
        let f = pot.exp();
        let g = &PolarizedScalar::real(2, 2.0) + &PolarizedScalar::flat_norm_sq(2);
        let back = &(&f * &g) / &g;
        for (z, _) in &pts {
            worst = worst.max(rel(back.value(z)?, f.value(z)?));
        }
        Ok(worst)
    })();
    vec![
        outcome("polarized", "hermitian-extension", hermitian, 1e-12),
        outcome("polarized", "mixed-partials-commute", schwarz, 1e-10),
        outcome("polarized", "div-mul-roundtrip", division, 1e-12),
    ]
}

pub fn kahler_suite(seed: u64) -> Vec<InvariantOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
    let mut out = Vec::new();
    for (d, expected, name) in [
        (1, 2.0, "fs1-scalar-curvature"),
        (2, 6.0, "fs2-scalar-curvature"),
    ] {
        let pts: Vec<Vec<Complex64>> = (0..5).map(|_| disc_point(&mut rng, d, 1.5)).collect();
        let v = (|| {
            let chart = KahlerChart::fubini_study(d);
            let rho = chart.scalar_curvature()?;
            let mut worst: f64 = 0.0;
            for p in &pts {
                worst = worst.max((rho.value(p)? - expected).norm());
            }
            Ok(worst)
        })();
        out.push(outcome("kahler", name, v, 1e-10));
    }
    let pts: Vec<(Vec<Complex64>, Vec<Complex64>)> = (0..6)
        .map(|_| (disc_point(&mut rng, 2, 1.0), disc_point(&mut rng, 2, 1.0)))
        .collect();
    let diastasis = (|| {
        let chart = KahlerChart::fubini_study(2);
        let mut worst: f64 = 0.0;
        for (z, w) in &pts {
            worst = worst.max(chart.diastasis(z, z)?.abs());
            // positivity off the diagonal counts as a violation of its size
            worst = worst.max((-chart.diastasis(z, w)?).max(0.0));
        }
        Ok(worst)
    })();
    out.push(outcome("kahler", "diastasis-nonnegative", diastasis, 1e-12));
    let positive = (|| {
        let chart = KahlerChart::fubini_study(2);
        let mut worst: f64 = 0.0;
        for (z, _) in &pts {
            let m = chart.metric_at(z)?;
            worst = worst.max(-m.min_eigenvalue);
        }
        Ok(worst)
    })();
    out.push(outcome("kahler", "metric-positive", positive, 0.0));
    out
}

pub fn quotient_suite(seed: u64) -> Vec<InvariantOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(2));
    let mut out = Vec::new();
    let cases: [(&[u32], &'static str, &'static str, &'static str); 2] = [
        (
            &[1, 2],
            "moment-map-invariant-w12",
            "grad-transfer-w12",
            "laplacian-transfer-w12",
        ),
        (
            &[1, 1, 2],
            "moment-map-invariant-w112",
            "grad-transfer-w112",
            "laplacian-transfer-w112",
        ),
    ];
    for (weights, inv_name, grad_name, lap_name) in cases {
        let d = weights.len() - 1;
        let pts: Vec<Vec<Complex64>> = (0..5).map(|_| disc_point(&mut rng, d, 0.8)).collect();
        let Ok(m) = HamiltonianCircleModel::weighted_projective(weights) else {
            out.push(outcome("quotient", inv_name, Ok(f64::INFINITY), 1e-9));
            continue;
        };
        out.push(outcome(
            "quotient",
            inv_name,
            m.invariance_spread(m.phi(), &pts),
            1e-9,
        ));
        let f = AdmissibleSymbol::coordinate_density(d + 1, 1).to_affine_kernel();
        let g = m.phi().clone();
        let transfer =
            |direct: &dyn Fn(&crate::quotient::QuotientChart) -> Result<PolarizedScalar>,
             via: &dyn Fn() -> Result<PolarizedScalar>|
             -> Result<f64> {
                let q = m.quotient_chart(&vec![c(0.0, 0.0); d])?;
                let a = direct(&q)?;
                let b = q.transport(&via()?);
                let mut worst: f64 = 0.0;
                for p in &pts {
                    worst = worst.max(rel(a.value(p)?, b.value(p)?));
                }
                Ok(worst)
            };
        let grad = transfer(&|q| q.grad_norm_sq(&q.transport(&f)), &|| {
            m.grad_norm_sq_n(&f)
        });
        out.push(outcome("quotient", grad_name, grad, 1e-7));
        let lap = transfer(&|q| q.laplacian(&q.transport(&g)), &|| {
            m.laplacian_n_corrected(&g)
        });
        out.push(outcome("quotient", lap_name, lap, 1e-7));
    }
    out
}

pub fn coefficients_suite(seed: u64) -> Vec<InvariantOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(3));
    let pts: Vec<Vec<Complex64>> = (0..4).map(|_| disc_point(&mut rng, 1, 1.0)).collect();
    let ops = EnglisOperators::standard();
    let setup = || -> Result<_> {
        let m = HamiltonianCircleModel::weighted_projective(&[1, 2])?;
        let q = m.quotient_chart(&[c(0.0, 0.0)])?;
        let t = CoefficientTable::build(&q, &ops, 1)?;
        Ok((q, t))
    };
    let s1 = (|| {
        let (q, t) = setup()?;
        let cf = s1_closed_form(&q)?;
        let mut worst: f64 = 0.0;
        for p in &pts {
            worst = worst.max(rel(t.s(1)?.value(p)?, cf.value(p)?));
        }
        Ok(worst)
    })();
    let toeplitz = (|| {
        let (q, t) = setup()?;
        let f = q.symbol_kernel(&AdmissibleSymbol::coordinate_density(2, 1))?;
        let rec = toeplitz_table(&t, &f, &ops, 1)?;
        let cf = toeplitz_s1_closed_form(&q, &f)?;
        let mut worst: f64 = 0.0;
        for p in &pts {
            worst = worst.max(rel(rec[1].value(p)?, cf.value(p)?));
        }
        Ok(worst)
    })();
    let berezin = (|| {
        let (q, t) = setup()?;
        let f = q.symbol_kernel(&AdmissibleSymbol::coordinate_density(2, 1))?;
        let b = berezin_expansion(
            &toeplitz_table(&t, &f, &ops, 1)?,
            &[s0(&q), t.s(1)?.clone()],
        )?;
        let lap = q.laplacian(&f)?;
        let mut worst: f64 = 0.0;
        for p in &pts {
            worst = worst.max(rel(b[1].value(p)?, lap.value(p)?));
        }
        Ok(worst)
    })();
    let tyz = (|| {
        let m = HamiltonianCircleModel::trivial(KahlerChart::fubini_study(1));
        let q = m.quotient_chart(&[c(0.0, 0.0)])?;
        let t = CoefficientTable::build(&q, &ops, 1)?;
        let mut worst: f64 = 0.0;
        for p in &pts {
            worst = worst.max((t.s(1)?.value(p)? - 1.0).norm());
        }
        Ok(worst)
    })();
    vec![
        outcome("coefficients", "s1-recursion-vs-closed-form", s1, 1e-9),
        outcome(
            "coefficients",
            "toeplitz-s1-recursion-vs-closed-form",
            toeplitz,
            1e-9,
        ),
        outcome("coefficients", "berezin-b1-is-laplacian", berezin, 1e-9),
        outcome("coefficients", "fs-s1-is-half-curvature", tyz, 1e-10),
    ]
}

/// `π^d/d! · E[Π r_j^{α_j}]` for `r` uniform on the simplex, by collapsed
/// Gauss–Legendre quadrature (`d ≤ 2`).
fn simplex_moment(alpha: &[u32]) -> f64 {
    let g = GaussLegendre::new(48);
    let d = alpha.len() - 1;
    let integral: f64 = if d == 1 {
        g.mapped(0.0, 1.0)
            .map(|(u, w)| w * u.powi(alpha[0] as i32) * (1.0 - u).powi(alpha[1] as i32))
            .sum()
    } else {
        let mut s = 0.0;
        for (u, wu) in g.mapped(0.0, 1.0) {
            for (v, wv) in g.mapped(0.0, 1.0) {
                let r = [u, (1.0 - u) * v, (1.0 - u) * (1.0 - v)];
                let m: f64 = r
                    .iter()
                    .zip(alpha)
                    .map(|(x, &a)| x.powi(a as i32))
                    .product();
                s += wu * wv * (1.0 - u) * m;
            }
        }
        s
    };
    // the sphere measure pushes forward to d! times Lebesgue on the simplex
    PI.powi(d as i32) * integral
}

pub fn oracle_suite(seed: u64) -> Vec<InvariantOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(4));
    let mut out = Vec::new();
    let norms = (|| {
        let mut worst: f64 = 0.0;
        for i in 0..10 {
            let n = 2 + i % 2;
            let weights = if n == 2 { vec![1, 2] } else { vec![1, 1, 2] };
            let o = WeightedProjectiveOracle::new(&weights, Precision::Extended)?;
            let alpha: Vec<u32> = (0..n).map(|_| rng.gen_range(0..6)).collect();
            let exact = o.monomial_norm_sq(&alpha).to_f64();
            worst = worst.max((simplex_moment(&alpha) - exact).abs() / exact);
        }
        Ok(worst)
    })();
    out.push(outcome(
        "oracle",
        "monomial-norms-vs-quadrature",
        norms,
        1e-4,
    ));

    let o = WeightedProjectiveOracle::new(&[1, 2], Precision::Extended).expect("valid weights");
    let xs: Vec<Vec<Complex64>> = (0..4).map(|_| sphere_point(&mut rng, 2)).collect();
    let one = AdmissibleSymbol::constant(2, 1.0);
    let self_consistent = (|| {
        let mut worst: f64 = 0.0;
        for x in &xs {
            for k in [7, 30] {
                let a = o.toeplitz_diag(k, &one, x)?;
                let b = o.szego_diag(k, x)?;
                worst = worst.max((a - b).abs() / b);
            }
        }
        Ok(worst)
    })();
    out.push(outcome(
        "oracle",
        "toeplitz-of-one-is-szego",
        self_consistent,
        1e-14,
    ));
    let character = (|| {
        let mut worst: f64 = 0.0;
        for x in &xs {
            let theta = 2.0 * PI * rng.gen::<f64>();
            let gx: Vec<Complex64> = x
                .iter()
                .zip(o.weights())
                .map(|(z, &w)| z * Complex64::from_polar(1.0, w as f64 * theta))
                .collect();
            let fiber: Vec<Complex64> = x
                .iter()
                .map(|z| z * Complex64::from_polar(1.0, theta))
                .collect();
            let y = &xs[0];
            for k in [5i64, 24] {
                let lhs = o.szego_offdiag(k, &gx, y)?;
                let rhs =
                    Complex64::from_polar(1.0, k as f64 * theta) * o.szego_offdiag(k, x, y)?;
                let scale = o.szego_diag(k, x)?;
                worst = worst.max((lhs - rhs).norm() / scale);
                let d = (o.szego_diag(k, &fiber)? - o.szego_diag(k, x)?).abs() / scale;
                worst = worst.max(d);
            }
        }
        Ok(worst)
    })();
    out.push(outcome("oracle", "character-law", character, 1e-12));
    let hermitian = (|| {
        let o3 = WeightedProjectiveOracle::new(&[1, 1, 2], Precision::Extended)?;
        let f = AdmissibleSymbol::pair_re(3, 0, 1).add(&AdmissibleSymbol::moment_map(&[1, 1, 2]));
        let m = o3.toeplitz_matrix(8, &f)?;
        Ok((&m - m.adjoint()).norm() / m.norm())
    })();
    out.push(outcome(
        "oracle",
        "toeplitz-matrix-hermitian",
        hermitian,
        1e-13,
    ));
    let commutator = (|| {
        let o3 = WeightedProjectiveOracle::new(&[1, 1, 2], Precision::Extended)?;
        let f = AdmissibleSymbol::pair_re(3, 0, 1);
        let g = AdmissibleSymbol::pair_im(3, 0, 1);
        let x = sphere_point(&mut rng, 3);
        let mut worst: f64 = 0.0;
        for k in [6, 12] {
            let d = o3.compose_diag(k, &f, &g, &x)? - o3.compose_diag(k, &g, &f, &x)?;
            worst = worst.max(d.re.abs() / d.norm().max(o3.szego_diag(k, &x)? * 1e-3));
        }
        Ok(worst)
    })();
    out.push(outcome(
        "oracle",
        "commutator-purely-imaginary",
        commutator,
        1e-12,
    ));
    out.push(outcome("oracle", "rapid-decay", rapid_decay(&o), 1e-3));
    out.push(outcome(
        "oracle",
        "no-half-powers",
        half_powers(&o),
        HALF_POWER_TOL,
    ));
    out
}

/// Ratio of the last to the first value of `|Π_k(x,y)| k³` over
/// `k = 50..400` for separated points; infinite if the tail ever grows.
pub fn rapid_decay(o: &WeightedProjectiveOracle) -> Result<f64> {
    let x = [c(0.6, 0.0), c(0.48, 0.64)];
    let y = [c(0.8, 0.0), c(0.0, -0.6)];
    let mut tail = Vec::new();
    for k in (50..=400).step_by(50) {
        tail.push(o.szego_offdiag(k, &x, &y)?.norm() * (k as f64).powi(3));
    }
    if tail.windows(2).any(|w| w[1] > w[0]) {
        return Ok(f64::INFINITY);
    }
    Ok(tail[tail.len() - 1] / tail[0])
}

/// Half-power weight in the scaled diagonal at a generic point.
pub fn half_powers(o: &WeightedProjectiveOracle) -> Result<f64> {
    let x = [c(0.6, 0.0), c(0.48, 0.64)];
    let d = o.dim() as i32;
    let ks: Vec<f64> = (0..15).map(|i| 50.0 + 25.0 * i as f64).collect();
    let mut v = Vec::with_capacity(ks.len());
    for &k in &ks {
        v.push(o.szego_diag(k as i64, &x)? * (PI / k).powi(d));
    }
    Ok(half_power_check(&ks, &v, 4)?.ratio)
}

pub fn fit_suite() -> Vec<InvariantOutcome> {
    let ks: Vec<f64> = (0..16).map(|i| 100.0 + 20.0 * i as f64).collect();
    let v: Vec<f64> = ks.iter().map(|k| 1.0 + 2.0 / k + 3.0 / (k * k)).collect();
    let synthetic = fit_coefficients(&ks, &v, 2)
        .map(|f| (f.coeffs[0] - 1.0).abs().max((f.coeffs[1] - 2.0).abs()));
    vec![outcome("fit", "synthetic-recovery", synthetic, 1e-9)]
}

pub fn englis_suite() -> Vec<InvariantOutcome> {
    let flat = (|| {
        let chart = KahlerChart::flat(1);
        let one = PolarizedScalar::real(1, 1.0);
        let i = laplace_integral(
            &chart,
            &[c(0.3, -0.2)],
            &one,
            50.0,
            &QuadratureConfig::default(),
        )?;
        Ok((i * 50.0 / PI - 1.0).abs())
    })();
    vec![outcome("englis", "flat-gaussian-exact", flat, 1e-12)]
}

/// Every suite, in a fixed order.
pub fn run_all(seed: u64) -> Vec<InvariantOutcome> {
    let mut out = polarized_suite(seed);
    out.extend(kahler_suite(seed));
    out.extend(quotient_suite(seed));
    out.extend(coefficients_suite(seed));
    out.extend(oracle_suite(seed));
    out.extend(fit_suite());
    out.extend(englis_suite());
    out
}
