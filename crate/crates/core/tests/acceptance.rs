//! End-to-end acceptance criteria A1 to A8, one summary line each.
//!
//! Every clause is evaluated and printed on every run. Clauses marked as
//! known shortfalls only make the process exit non-zero under `--ignored` or
//! `--include-ignored`, mirroring how the matching unit tests are ignored.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use eqbtq_core::experiments::ExperimentReport;
use eqbtq_core::fit::half_power_check;
use eqbtq_core::invariants::{half_powers, rapid_decay};
use eqbtq_core::{
    run, AdmissibleSymbol, ExperimentConfig, HamiltonianCircleModel, KahlerChart, PolarizedScalar,
    Precision, WeightedProjectiveOracle,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Clause {
    name: String,
    value: f64,
    tol: f64,
    known: Option<&'static str>,
}

impl Clause {
    fn new(name: impl Into<String>, value: f64, tol: f64) -> Self {
        Clause {
            name: name.into(),
            value,
            tol,
            known: None,
        }
    }

    fn known(mut self, why: &'static str) -> Self {
        self.known = Some(why);
        self
    }

    fn passed(&self) -> bool {
        self.value <= self.tol
    }
}

struct Criterion {
    id: &'static str,
    title: &'static str,
    clauses: Vec<Clause>,
}

impl Criterion {
    fn passed(&self) -> bool {
        self.clauses.iter().all(Clause::passed)
    }

    fn only_known_failures(&self) -> bool {
        self.clauses.iter().all(|c| c.passed() || c.known.is_some())
    }
}

fn timed(
    id: &'static str,
    title: &'static str,
    budget: f64,
    body: impl FnOnce() -> Vec<Clause>,
) -> Criterion {
    let t = Instant::now();
    let mut clauses = body();
    clauses.push(Clause::new(
        "runtime-seconds",
        t.elapsed().as_secs_f64(),
        budget,
    ));
    Criterion { id, title, clauses }
}

fn load(text: &str) -> ExperimentReport {
    let cfg = ExperimentConfig::from_json(text).expect("shipped config parses");
    run(&cfg).expect("experiment runs")
}

fn worst(rep: &ExperimentReport, check: &str) -> f64 {
    let vals: Vec<f64> = rep
        .checks()
        .filter(|(_, c)| c.name == check)
        .map(|(_, c)| c.value)
        .collect();
    if vals.is_empty() || vals.iter().any(|v| v.is_nan()) {
        return f64::INFINITY;
    }
    vals.into_iter().fold(0.0, f64::max)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn cx(pairs: &[[f64; 2]]) -> Vec<Complex64> {
    pairs.iter().map(|p| Complex64::new(p[0], p[1])).collect()
}

/// Moment map of weights (1,2) at slice coordinate `n`, solving
/// `U + U²|n|² = 1` in closed form.
fn phi_w12(n: Complex64) -> f64 {
    let s = n.norm_sqr();
    let u = if s == 0.0 {
        1.0
    } else {
        (-1.0 + (1.0 + 4.0 * s).sqrt()) / (2.0 * s)
    };
    u + 2.0 * u * u * s
}

fn a1() -> Criterion {
    timed("A1", "TYZ baseline on CP^1", 10.0, || {
        let rep = load(include_str!("../../../configs/tyz-baseline.json"));
        let o = WeightedProjectiveOracle::new(&[1, 1], Precision::Extended).unwrap();
        let mut exact: f64 = 0.0;
        for p in &rep.points {
            let x = cx(p.sphere.as_ref().unwrap());
            for k in 1..=200i64 {
                let expected = (k + 1) as f64 / PI;
                exact = exact.max(rel(o.szego_diag(k, &x).unwrap(), expected));
            }
        }
        let rho = KahlerChart::fubini_study(1).scalar_curvature().unwrap();
        let curvature = rep
            .points
            .iter()
            .map(|p| (rho.value(&cx(p.chart.as_ref().unwrap())).unwrap() - 2.0).norm())
            .fold(0.0, f64::max);
        vec![
            Clause::new("diag-equals-(k+1)/pi", exact, 1e-10),
            Clause::new(
                "report-oracle-identity",
                worst(&rep, "oracle-identity"),
                1e-10,
            ),
            Clause::new(
                "two-term-with-S1=rho/2",
                worst(&rep, "geometric-two-term"),
                1e-8,
            ),
            Clause::new("fs-curvature-is-2", curvature, 1e-10),
            Clause::new("points", (5 - rep.points.len() as i64).abs() as f64, 0.0),
        ]
    })
}

fn a2() -> Criterion {
    timed("A2", "weighted (1,2) leading and subleading", 60.0, || {
        let rep = load(include_str!("../../../configs/szego-sweep.json"));
        let mut s0: f64 = 0.0;
        for p in &rep.points {
            let n = cx(p.chart.as_ref().unwrap())[0];
            let fitted = p.fit.as_ref().unwrap().s0;
            s0 = s0.max(rel(fitted, phi_w12(n).powi(-2)));
        }
        vec![
            Clause::new("S0-vs-phi^-2", s0, 1e-6),
            Clause::new("S1-vs-closed-form", worst(&rep, "fit-S1"), 1e-3),
        ]
    })
}

fn a3() -> Criterion {
    timed("A3", "Toeplitz coefficients on (1,2)", 60.0, || {
        let base = include_str!("../../../configs/toeplitz-sweep.json");
        let density = load(base);
        let mut v: serde_json::Value = serde_json::from_str(base).unwrap();
        v["f"] = serde_json::json!({ "kind": "moment-map" });
        let moment = load(&v.to_string());
        let mut lead: f64 = 0.0;
        for (rep, is_moment) in [(&density, false), (&moment, true)] {
            for p in &rep.points {
                let x = cx(p.sphere.as_ref().unwrap());
                let phi = phi_w12(cx(p.chart.as_ref().unwrap())[0]);
                let f = if is_moment { phi } else { x[1].norm_sqr() };
                lead = lead.max(rel(p.fit.as_ref().unwrap().s0, f / (phi * phi)));
            }
        }
        vec![
            Clause::new("S0[f]-vs-phi^-2-f", lead, 1e-6),
            Clause::new("S1[density]", worst(&density, "fit-S1"), 1e-3),
            Clause::new("S1[phi]", worst(&moment, "fit-S1"), 1e-3),
        ]
    })
}

fn disc_points(rng: &mut ChaCha8Rng, d: usize, count: usize) -> Vec<Vec<Complex64>> {
    (0..count)
        .map(|_| {
            (0..d)
                .map(|_| {
                    Complex64::from_polar(
                        0.8 * rng.gen::<f64>().sqrt(),
                        2.0 * PI * rng.gen::<f64>(),
                    )
                })
                .collect()
        })
        .collect()
}

/// Worst `|direct − transfer|` over `points`, relative to `scale` where given
/// and to the transfer value otherwise.
fn compare(
    direct: &PolarizedScalar,
    transfer: &PolarizedScalar,
    scale: Option<&PolarizedScalar>,
    points: &[Vec<Complex64>],
) -> f64 {
    points
        .iter()
        .map(|p| {
            let (a, b) = (direct.value(p).unwrap(), transfer.value(p).unwrap());
            let s = scale.map_or(b.norm(), |s| s.value(p).unwrap().norm().max(b.norm()));
            (a - b).norm() / s
        })
        .fold(0.0, f64::max)
}

fn a4_clauses() -> Vec<Clause> {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut lap: f64 = 0.0;
    let mut grad: f64 = 0.0;
    let mut poisson: f64 = 0.0;
    for weights in [&[1u32, 2][..], &[1, 1, 2]] {
        let d = weights.len() - 1;
        let m = HamiltonianCircleModel::weighted_projective(weights).unwrap();
        let q = m
            .quotient_chart(&vec![Complex64::new(0.0, 0.0); d])
            .unwrap();
        let pts = disc_points(&mut rng, d, 20);
        let density = AdmissibleSymbol::coordinate_density(d + 1, 1).to_affine_kernel();
        let phi = m.phi().clone();
        for f in [&density, &phi] {
            lap = lap.max(compare(
                &q.laplacian(&q.transport(f)).unwrap(),
                &q.transport(&m.laplacian_n(f).unwrap()),
                None,
                &pts,
            ));
            grad = grad.max(compare(
                &q.grad_norm_sq(&q.transport(f)).unwrap(),
                &q.transport(&m.grad_norm_sq_n(f).unwrap()),
                None,
                &pts,
            ));
        }
        // on CP^1 invariant functions are radial and Poisson-commute, so the
        // comparison is scaled by Φ |grad f| |grad g|
        let (f, g) = if d == 1 {
            (density.clone(), phi.clone())
        } else {
            (
                AdmissibleSymbol::pair_re(3, 0, 1).to_affine_kernel(),
                AdmissibleSymbol::pair_im(3, 0, 1).to_affine_kernel(),
            )
        };
        let scale = (&m.grad_norm_sq_n(&f).unwrap() * &m.grad_norm_sq_n(&g).unwrap()).powf(0.5);
        poisson = poisson.max(compare(
            &q.poisson_bracket(&q.transport(&f), &q.transport(&g))
                .unwrap(),
            &q.transport(&m.poisson_n(&f, &g).unwrap()),
            Some(&q.transport(&scale)),
            &pts,
        ));
    }
    vec![
        Clause::new("laplacian-phi-times-base", lap, 1e-7).known(
            "the slice term -(d/2)<grad phi, grad f> is missing from the plain transfer law",
        ),
        Clause::new("grad-norm-transfer", grad, 1e-7),
        Clause::new("poisson-transfer", poisson, 1e-7),
    ]
}

fn a4() -> Criterion {
    timed("A4", "quotient two-route identities", 5.0, a4_clauses)
}

fn a5() -> Criterion {
    timed(
        "A5",
        "Laplace-integral expansion, flat and FS",
        30.0,
        || {
            let flat = load(include_str!("../../../configs/englis-flat.json"));
            let fs = load(include_str!("../../../configs/englis-fs.json"));
            // gaussian symbol on the flat chart integrates to λ/(λ+1) exactly
            let gaussian = flat
                .rows()
                .map(|r| rel(r.oracle, r.k as f64 / (r.k as f64 + 1.0)))
                .fold(0.0, f64::max);
            let fs200 = fs
                .rows()
                .find(|r| r.k == 200)
                .map_or(f64::INFINITY, |r| (r.oracle - (1.0 - 1.0 / 200.0)).abs());
            vec![
                Clause::new(
                    "flat-residual*lambda^2",
                    worst(&flat, "residual-times-lambda-squared"),
                    5.0,
                ),
                Clause::new(
                    "flat-exponent-offset",
                    worst(&flat, "decay-exponent-offset"),
                    0.3,
                ),
                Clause::new(
                    "fs-residual*lambda^2",
                    worst(&fs, "residual-times-lambda-squared"),
                    5.0,
                ),
                Clause::new(
                    "fs-exponent-offset",
                    worst(&fs, "decay-exponent-offset"),
                    0.3,
                ),
                Clause::new("flat-gaussian-exact", gaussian, 1e-10),
                Clause::new("fs-one-at-200", fs200, 3e-4),
            ]
        },
    )
}

fn a6() -> Criterion {
    timed(
        "A6",
        "commutator and Poisson bracket on CP^2 (1,1,2)",
        300.0,
        || {
            let rep = load(include_str!("../../../configs/commutator.json"));
            vec![
                Clause::new(
                    "antisymmetric-part-imaginary",
                    worst(&rep, "antisymmetric-part-imaginary"),
                    1e-10,
                ),
                Clause::new("raw-at-k=60", worst(&rep, "raw-at-kmax"), 2e-2)
                    .known("the k^-1 correction is about (d+1)/k, i.e. 5e-2 at k=60"),
                Clause::new("richardson", worst(&rep, "richardson"), 5e-3),
                Clause::new("symmetric-part-vs-composition", worst(&rep, "fit-S1"), 5e-2),
            ]
        },
    )
}

fn a7() -> Criterion {
    timed("A7", "near-diagonal scaling on (1,2)", 60.0, || {
        let rep = load(include_str!("../../../configs/near-diagonal.json"));
        vec![
            Clause::new(
                "worst-relative-at-k=400",
                worst(&rep, "worst-relative-at-kmax"),
                3e-2,
            )
            .known("a k^-1/2 term from the varying moment map leaves 5e-2 at k=400"),
            Clause::new("stabilizer-parity", worst(&rep, "stabilizer-parity"), 0.0),
        ]
    })
}

fn a8() -> Criterion {
    timed("A8", "rapid decay and half-power suppression", 60.0, || {
        let o12 = WeightedProjectiveOracle::new(&[1, 2], Precision::Extended).unwrap();
        let o13 = WeightedProjectiveOracle::new(&[1, 3], Precision::Extended).unwrap();
        // on (1,3) the Z_3 point contributes an exponentially small term that
        // oscillates with k mod 3; below k ≈ 150 it is still visible to the fit
        let x = [Complex64::new(0.6, 0.0), Complex64::new(0.48, 0.64)];
        let ks: Vec<f64> = (0..11).map(|i| 150.0 + 25.0 * i as f64).collect();
        let v: Vec<f64> = ks
            .iter()
            .map(|&k| o13.szego_diag(k as i64, &x).unwrap() * PI / k)
            .collect();
        let w13 = half_power_check(&ks, &v, 4).map_or(f64::INFINITY, |r| r.ratio);
        vec![
            Clause::new(
                "rapid-decay-w12",
                rapid_decay(&o12).unwrap_or(f64::INFINITY),
                1e-3,
            ),
            Clause::new(
                "half-powers-w12",
                half_powers(&o12).unwrap_or(f64::INFINITY),
                1e-3,
            ),
            Clause::new(
                "rapid-decay-w13",
                rapid_decay(&o13).unwrap_or(f64::INFINITY),
                1e-3,
            ),
            Clause::new("half-powers-w13-k>=150", w13, 1e-3),
        ]
    })
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.iter().any(|a| a == "--list") {
        return ExitCode::SUCCESS;
    }
    let strict = args
        .iter()
        .any(|a| a == "--ignored" || a == "--include-ignored");
    let criteria = [a1(), a2(), a3(), a4(), a5(), a6(), a7(), a8()];
    let mut ok = true;
    println!();
    for c in &criteria {
        let verdict = if c.passed() { "PASS" } else { "FAIL" };
        let failing: Vec<String> = c
            .clauses
            .iter()
            .filter(|k| !k.passed())
            .map(|k| {
                let note = k.known.map_or(String::new(), |w| format!(" [known: {w}]"));
                format!("{} = {:.3e} > {:.1e}{note}", k.name, k.value, k.tol)
            })
            .collect();
        let detail = if failing.is_empty() {
            let worst = c
                .clauses
                .iter()
                .filter(|k| k.name != "runtime-seconds")
                .map(|k| format!("{} {:.2e}", k.name, k.value))
                .collect::<Vec<_>>()
                .join(", ");
            worst
        } else {
            failing.join("; ")
        };
        println!("{} {verdict} {}: {detail}", c.id, c.title);
        if !c.passed() && (strict || !c.only_known_failures()) {
            ok = false;
        }
    }
    let passed = criteria.iter().filter(|c| c.passed()).count();
    println!("\nacceptance: {passed}/{} criteria pass\n", criteria.len());
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
