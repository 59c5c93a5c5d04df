//! Experiment configurations, the sweep runner and report emission.
//!
//! A configuration is a JSON document carrying a `schema` tag. Running it
//! evaluates the oracle over a `(point, k)` grid in parallel, compares the
//! values with the geometric expansion and collects rows in a fixed order,
//! so the emitted CSV is byte-identical across runs and thread counts.

use std::f64::consts::PI;
use std::path::PathBuf;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coefficients::{
    a1_composition, berezin_expansion, commutator_leading, s0, toeplitz_table, CoefficientTable,
};
use crate::englis::{expansion_check, EnglisOperators, QuadratureConfig};
use crate::error::{Error, Result};
use crate::fit::{fit_coefficients, richardson, FitResult};
use crate::invariants;
use crate::kahler::KahlerChart;
use crate::oracle::{psi2, Precision, WeightedProjectiveOracle};
use crate::polarized::PolarizedScalar;
use crate::quotient::{HamiltonianCircleModel, QuotientChart};
use crate::symbol::{AdmissibleSymbol, SymbolTerm};

pub const SCHEMA: &str = "eqbtq-experiment/1";

/// Largest admissible level per base dimension.
pub fn k_limit(d: usize) -> Option<i64> {
    match d {
        1 => Some(512),
        2 => Some(96),
        _ => None,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    TyzBaseline,
    SzegoSweep,
    ToeplitzSweep,
    Berezin,
    Commutator,
    EnglisCheck,
    NearDiagonal,
    Invariants,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::TyzBaseline => "tyz-baseline",
            ExperimentKind::SzegoSweep => "szego-sweep",
            ExperimentKind::ToeplitzSweep => "toeplitz-sweep",
            ExperimentKind::Berezin => "berezin",
            ExperimentKind::Commutator => "commutator",
            ExperimentKind::EnglisCheck => "englis-check",
            ExperimentKind::NearDiagonal => "near-diagonal",
            ExperimentKind::Invariants => "invariants",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChartKind {
    Flat,
    FubiniStudy,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub weights: Option<Vec<u32>>,
    #[serde(default)]
    pub chart: Option<ChartKind>,
    #[serde(default)]
    pub d: Option<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ModelInfo {
    pub name: &'static str,
    pub weights: Option<&'static [u32]>,
    pub chart: Option<ChartKind>,
    pub d: usize,
    pub description: &'static str,
}

pub fn shipped_models() -> Vec<ModelInfo> {
    let w = |name, weights: &'static [u32], description| ModelInfo {
        name,
        weights: Some(weights),
        chart: None,
        d: weights.len() - 1,
        description,
    };
    let ch = |name, chart, d, description| ModelInfo {
        name,
        weights: None,
        chart: Some(chart),
        d,
        description,
    };
    vec![
        w("cp1", &[1, 1], "CP^1, standard action, constant moment map"),
        w("cp1-w12", &[1, 2], "CP^1, weights (1,2)"),
        w("cp1-w13", &[1, 3], "CP^1, weights (1,3)"),
        w(
            "cp2",
            &[1, 1, 1],
            "CP^2, standard action, constant moment map",
        ),
        w("cp2-w112", &[1, 1, 2], "CP^2, weights (1,1,2)"),
        w("cp2-w123", &[1, 2, 3], "CP^2, weights (1,2,3)"),
        ch(
            "flat1",
            ChartKind::Flat,
            1,
            "C with the flat metric (Laplace checks only)",
        ),
        ch(
            "fs1",
            ChartKind::FubiniStudy,
            1,
            "affine chart of CP^1 (Laplace checks only)",
        ),
        ch(
            "fs2",
            ChartKind::FubiniStudy,
            2,
            "affine chart of CP^2 (Laplace checks only)",
        ),
    ]
}

#[derive(Clone, Debug)]
enum Model {
    Weighted {
        label: String,
        weights: Vec<u32>,
    },
    Chart {
        label: String,
        kind: ChartKind,
        d: usize,
    },
}

impl Model {
    fn dim(&self) -> usize {
        match self {
            Model::Weighted { weights, .. } => weights.len() - 1,
            Model::Chart { d, .. } => *d,
        }
    }
}

fn weights_label(w: &[u32]) -> String {
    let parts: Vec<String> = w.iter().map(|x| x.to_string()).collect();
    format!("wp[{}]", parts.join(" "))
}

impl ModelSpec {
    fn resolve(&self) -> Result<Model> {
        let model = if let Some(name) = &self.name {
            let info = shipped_models()
                .into_iter()
                .find(|m| m.name == name)
                .ok_or_else(|| Error::Config(format!("unknown model `{name}`")))?;
            match (info.weights, info.chart) {
                (Some(w), _) => Model::Weighted {
                    label: name.clone(),
                    weights: w.to_vec(),
                },
                (None, Some(kind)) => Model::Chart {
                    label: name.clone(),
                    kind,
                    d: info.d,
                },
                _ => unreachable!("shipped models carry weights or a chart"),
            }
        } else if let Some(w) = &self.weights {
            HamiltonianCircleModel::weighted_projective(w)?;
            Model::Weighted {
                label: weights_label(w),
                weights: w.clone(),
            }
        } else if let Some(kind) = self.chart {
            let d = self
                .d
                .ok_or_else(|| Error::Config("chart models need `d`".into()))?;
            let label = match kind {
                ChartKind::Flat => format!("flat{d}"),
                ChartKind::FubiniStudy => format!("fs{d}"),
            };
            Model::Chart { label, kind, d }
        } else {
            return Err(Error::Config(
                "model needs `name`, `weights` or `chart`".into(),
            ));
        };
        if let Some(d) = self.d {
            if d != model.dim() {
                return Err(Error::Config(format!(
                    "model has d = {}, config says {d}",
                    model.dim()
                )));
            }
        }
        Ok(model)
    }
}

/// One configured point, or a batch of random chart points.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PointSpec {
    /// Slice (quotient chart) or base chart coordinates as `[re, im]` pairs.
    Chart(Vec<[f64; 2]>),
    /// Unit vector in C^{d+1}.
    Sphere(Vec<[f64; 2]>),
    Random {
        count: usize,
        radius: f64,
    },
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KRange {
    pub min: i64,
    pub max: i64,
    pub step: i64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SymbolSpec {
    Constant { value: f64 },
    MomentMap,
    CoordinateDensity { index: usize },
    PairRe { a: usize, b: usize },
    PairIm { a: usize, b: usize },
    Terms { terms: Vec<SymbolTerm> },
    Sum { parts: Vec<SymbolSpec> },
}

impl SymbolSpec {
    pub fn build(&self, weights: &[u32]) -> Result<AdmissibleSymbol> {
        let n = weights.len();
        let idx = |i: usize| {
            if i < n {
                Ok(i)
            } else {
                Err(Error::Config(format!(
                    "symbol index {i} out of range for {n} coordinates"
                )))
            }
        };
        let s = match self {
            SymbolSpec::Constant { value } => AdmissibleSymbol::constant(n, *value),
            SymbolSpec::MomentMap => AdmissibleSymbol::moment_map(weights),
            SymbolSpec::CoordinateDensity { index } => {
                AdmissibleSymbol::coordinate_density(n, idx(*index)?)
            }
            SymbolSpec::PairRe { a, b } => AdmissibleSymbol::pair_re(n, idx(*a)?, idx(*b)?),
            SymbolSpec::PairIm { a, b } => AdmissibleSymbol::pair_im(n, idx(*a)?, idx(*b)?),
            SymbolSpec::Terms { terms } => AdmissibleSymbol::new(n, terms.clone())?,
            SymbolSpec::Sum { parts } => {
                let mut acc = AdmissibleSymbol::constant(n, 0.0);
                for p in parts {
                    acc = acc.add(&p.build(weights)?);
                }
                acc
            }
        };
        s.check_invariant(weights)?;
        Ok(s)
    }
}

/// Function integrated in `englis-check`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TestFunction {
    One,
    /// `exp(−|z − y|²)` centred at the evaluation point.
    #[default]
    Gaussian,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default)]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: OutputFormat,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    pub oracle_identity: Option<f64>,
    pub geometric_identity: Option<f64>,
    pub s0_rel: Option<f64>,
    pub s1_rel: Option<f64>,
    pub commutator_raw: Option<f64>,
    pub commutator_richardson: Option<f64>,
    pub composition_sym: Option<f64>,
    pub englis_constant: Option<f64>,
    pub exponent_band: Option<f64>,
    pub near_diagonal: Option<f64>,
}

/// Tolerances with defaults filled in.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Tol {
    pub oracle_identity: f64,
    pub geometric_identity: f64,
    pub s0_rel: f64,
    pub s1_rel: f64,
    pub commutator_raw: f64,
    pub commutator_richardson: f64,
    pub composition_sym: f64,
    pub englis_constant: f64,
    pub exponent_band: f64,
    pub near_diagonal: f64,
}

impl Tolerances {
    pub fn resolve(&self) -> Tol {
        Tol {
            oracle_identity: self.oracle_identity.unwrap_or(1e-10),
            geometric_identity: self.geometric_identity.unwrap_or(1e-8),
            s0_rel: self.s0_rel.unwrap_or(1e-6),
            s1_rel: self.s1_rel.unwrap_or(1e-3),
            commutator_raw: self.commutator_raw.unwrap_or(2e-2),
            commutator_richardson: self.commutator_richardson.unwrap_or(5e-3),
            composition_sym: self.composition_sym.unwrap_or(5e-2),
            englis_constant: self.englis_constant.unwrap_or(5.0),
            exponent_band: self.exponent_band.unwrap_or(0.3),
            near_diagonal: self.near_diagonal.unwrap_or(3e-2),
        }
    }
}

fn default_fit_order() -> usize {
    3
}

fn default_grid_radius() -> f64 {
    1.0
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema: String,
    pub experiment: ExperimentKind,
    #[serde(default)]
    pub model: ModelSpec,
    #[serde(default)]
    pub points: Vec<PointSpec>,
    #[serde(default)]
    pub k_range: Option<KRange>,
    #[serde(default)]
    pub k_values: Option<Vec<i64>>,
    #[serde(default)]
    pub f: Option<SymbolSpec>,
    #[serde(default)]
    pub g: Option<SymbolSpec>,
    #[serde(default)]
    pub test_function: TestFunction,
    #[serde(default)]
    pub output: Option<OutputSpec>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub precision: Precision,
    #[serde(default = "default_fit_order")]
    pub fit_order: usize,
    /// Radius of the `(v, w)` grid in `near-diagonal`.
    #[serde(default = "default_grid_radius")]
    pub grid_radius: f64,
    #[serde(default)]
    pub tolerances: Tolerances,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text)
            .map_err(|e| Error::Config(format!("config parse error: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Levels in increasing order.
    pub fn ks(&self) -> Result<Vec<i64>> {
        let mut ks = match (&self.k_range, &self.k_values) {
            (Some(r), None) => {
                if r.step < 1 || r.min > r.max {
                    return Err(Error::Config(format!("bad k_range {r:?}")));
                }
                (r.min..=r.max).step_by(r.step as usize).collect()
            }
            (None, Some(v)) => v.clone(),
            (Some(_), Some(_)) => {
                return Err(Error::Config(
                    "give either k_range or k_values, not both".into(),
                ))
            }
            (None, None) => return Err(Error::Config("missing k_range".into())),
        };
        ks.sort_unstable();
        ks.dedup();
        if ks.first().is_some_and(|&k| k < 1) {
            return Err(Error::Config("levels must be positive".into()));
        }
        Ok(ks)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema != SCHEMA {
            return Err(Error::Config(format!(
                "unsupported schema `{}` (expected `{SCHEMA}`)",
                self.schema
            )));
        }
        if self.experiment == ExperimentKind::Invariants {
            return Ok(());
        }
        let model = self.model.resolve()?;
        if self.points.is_empty() {
            return Err(Error::Config("points must be nonempty".into()));
        }
        let ks = self.ks()?;
        let d = model.dim();
        match (&model, self.experiment) {
            (Model::Chart { .. }, ExperimentKind::EnglisCheck) => {}
            (Model::Chart { .. }, e) => {
                return Err(Error::Config(format!(
                    "{} needs a weighted model",
                    e.name()
                )));
            }
            (Model::Weighted { .. }, ExperimentKind::EnglisCheck) => {
                return Err(Error::Config("englis-check needs a chart model".into()));
            }
            (Model::Weighted { weights, .. }, e) => {
                let limit = k_limit(d).ok_or_else(|| {
                    Error::Config(format!("oracle sweeps support d <= 2, got {d}"))
                })?;
                if *ks.last().expect("nonempty") > limit {
                    return Err(Error::Config(format!("k_max exceeds {limit} for d = {d}")));
                }
                if e == ExperimentKind::TyzBaseline && weights.iter().any(|&w| w != 1) {
                    return Err(Error::Config(
                        "tyz-baseline needs all weights equal to 1".into(),
                    ));
                }
                if matches!(
                    e,
                    ExperimentKind::ToeplitzSweep
                        | ExperimentKind::Berezin
                        | ExperimentKind::Commutator
                ) && self.f.is_none()
                {
                    return Err(Error::Config(format!("{} needs a symbol `f`", e.name())));
                }
                if e == ExperimentKind::Commutator && self.g.is_none() {
                    return Err(Error::Config("commutator needs a symbol `g`".into()));
                }
                let fitted = !matches!(e, ExperimentKind::NearDiagonal);
                if fitted && ks.len() < self.fit_order + 2 {
                    return Err(Error::Config(format!(
                        "fit of order {} needs at least {} levels",
                        self.fit_order,
                        self.fit_order + 2
                    )));
                }
            }
        }
        Ok(())
    }
}

// ---- report ------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

/// One CSV line.
#[derive(Clone, Debug, Serialize)]
pub struct Row {
    pub experiment: &'static str,
    pub model: String,
    pub point_id: String,
    pub k: i64,
    pub oracle: f64,
    pub pred0: Option<f64>,
    pub pred1: Option<f64>,
    pub resid0: Option<f64>,
    pub resid1: Option<f64>,
    #[serde(rename = "fit_S0")]
    pub fit_s0: Option<f64>,
    #[serde(rename = "fit_S1")]
    pub fit_s1: Option<f64>,
    pub fit_err: Option<f64>,
    pub status: Status,
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    fn at_most(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Check {
            name: name.into(),
            value,
            tolerance,
            passed: value <= tolerance,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FitSummary {
    pub s0: f64,
    pub s1: f64,
    pub s0_std_err: f64,
    pub s1_std_err: f64,
    pub condition: f64,
    pub warning: Option<String>,
}

impl FitSummary {
    fn from_fit(f: &FitResult) -> Self {
        FitSummary {
            s0: f.coeffs[0],
            s1: f.coeffs[1],
            s0_std_err: f.std_errs[0],
            s1_std_err: f.std_errs[1],
            condition: f.condition,
            warning: f.warning.clone(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PointReport {
    pub point_id: String,
    pub sphere: Option<Vec<[f64; 2]>>,
    pub chart: Option<Vec<[f64; 2]>>,
    pub fit: Option<FitSummary>,
    pub checks: Vec<Check>,
    pub rows: Vec<Row>,
}

impl PointReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    fn seal(mut self) -> Self {
        let status = if self.passed() {
            Status::Pass
        } else {
            Status::Fail
        };
        for r in &mut self.rows {
            r.status = status;
        }
        self
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentReport {
    pub schema: &'static str,
    pub experiment: ExperimentKind,
    pub model: String,
    pub precision: Precision,
    pub seed: u64,
    pub passed: bool,
    pub warnings: Vec<String>,
    pub points: Vec<PointReport>,
}

impl ExperimentReport {
    pub fn rows(&self) -> impl Iterator<Item = &Row> {
        self.points.iter().flat_map(|p| &p.rows)
    }

    pub fn checks(&self) -> impl Iterator<Item = (&str, &Check)> {
        self.points
            .iter()
            .flat_map(|p| p.checks.iter().map(move |c| (p.point_id.as_str(), c)))
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::WriterBuilder::new()
            .has_headers(false)
            .from_writer(Vec::new());
        // serde's header comes from the first record; write it explicitly so
        // that empty reports still carry the schema
        w.write_record([
            "experiment",
            "model",
            "point_id",
            "k",
            "oracle",
            "pred0",
            "pred1",
            "resid0",
            "resid1",
            "fit_S0",
            "fit_S1",
            "fit_err",
            "status",
        ])
        .map_err(csv_err)?;
        for r in self.rows() {
            w.serialize(r).map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Io(e.to_string()))
    }

    pub fn render(&self, format: OutputFormat) -> Result<String> {
        match format {
            OutputFormat::Csv => self.to_csv(),
            OutputFormat::Json => self.to_json(),
        }
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

// ---- runner ------------------------------------------------------------------

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn to_pairs(v: &[Complex64]) -> Vec<[f64; 2]> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

fn from_pairs(v: &[[f64; 2]]) -> Vec<Complex64> {
    v.iter().map(|p| c(p[0], p[1])).collect()
}

fn rel_err(a: f64, b: f64) -> f64 {
    if b.abs() > 1e-14 {
        (a - b).abs() / b.abs()
    } else {
        (a - b).abs()
    }
}

/// Slice coordinates of the orbit through the unit vector `x`, if it meets
/// the slice `{x_0 > 0}`.
pub fn slice_point(weights: &[u32], x: &[Complex64]) -> Option<Vec<Complex64>> {
    let r0 = x[0].norm();
    if r0 < 1e-12 {
        return None;
    }
    let theta = x[0].arg() / weights[0] as f64;
    let u = r0.powf(2.0 / weights[0] as f64);
    Some(
        x.iter()
            .zip(weights)
            .skip(1)
            .map(|(z, &w)| {
                z * Complex64::from_polar(1.0, -(w as f64) * theta) / u.powf(w as f64 / 2.0)
            })
            .collect(),
    )
}

struct ResolvedPoint {
    id: String,
    chart: Option<Vec<Complex64>>,
    sphere: Option<Vec<Complex64>>,
}

/// Chart and sphere coordinates, whichever the config gave.
type RawPoint = (Option<Vec<Complex64>>, Option<Vec<Complex64>>);

fn resolve_points(cfg: &ExperimentConfig, dim: usize) -> Result<Vec<RawPoint>> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut out = Vec::new();
    for p in &cfg.points {
        match p {
            PointSpec::Chart(v) => {
                if v.len() != dim {
                    return Err(Error::Dimension {
                        expected: dim,
                        got: v.len(),
                    });
                }
                out.push((Some(from_pairs(v)), None));
            }
            PointSpec::Sphere(v) => {
                if v.len() != dim + 1 {
                    return Err(Error::Dimension {
                        expected: dim + 1,
                        got: v.len(),
                    });
                }
                out.push((None, Some(from_pairs(v))));
            }
            PointSpec::Random { count, radius } => {
                for _ in 0..*count {
                    let z = (0..dim)
                        .map(|_| {
                            Complex64::from_polar(
                                radius * rng.gen::<f64>().sqrt(),
                                2.0 * PI * rng.gen::<f64>(),
                            )
                        })
                        .collect();
                    out.push((Some(z), None));
                }
            }
        }
    }
    Ok(out)
}

struct Weighted {
    label: String,
    weights: Vec<u32>,
    quotient: QuotientChart,
    table: CoefficientTable,
    oracle: WeightedProjectiveOracle,
    ops: EnglisOperators,
}

impl Weighted {
    fn new(label: String, weights: Vec<u32>, precision: Precision) -> Result<Self> {
        let model = HamiltonianCircleModel::weighted_projective(&weights)?;
        let d = model.dim();
        let quotient = model.quotient_chart(&vec![c(0.0, 0.0); d])?;
        let ops = EnglisOperators::standard();
        let table = CoefficientTable::build(&quotient, &ops, 1)?;
        let oracle = WeightedProjectiveOracle::new(&weights, precision)?;
        Ok(Weighted {
            label,
            weights,
            quotient,
            table,
            oracle,
            ops,
        })
    }

    fn dim(&self) -> usize {
        self.weights.len() - 1
    }

    fn points(&self, cfg: &ExperimentConfig) -> Result<Vec<ResolvedPoint>> {
        let raw = resolve_points(cfg, self.dim())?;
        raw.into_iter()
            .enumerate()
            .map(|(i, (chart, sphere))| {
                let (chart, sphere) = match (chart, sphere) {
                    (Some(n), _) => {
                        let x = self.quotient.sphere_point(&n)?;
                        (Some(n), x)
                    }
                    (None, Some(x)) => (slice_point(&self.weights, &x), x),
                    (None, None) => unreachable!("points carry coordinates"),
                };
                Ok(ResolvedPoint {
                    id: format!("p{i}"),
                    chart,
                    sphere: Some(sphere),
                })
            })
            .collect()
    }

    fn slice(&self, p: &ResolvedPoint) -> Result<Vec<Complex64>> {
        p.chart.clone().ok_or_else(|| {
            Error::UnsupportedPoint(format!("{} does not meet the slice chart x_0 > 0", p.id))
        })
    }

    fn scale(&self, k: i64) -> f64 {
        (PI / k as f64).powi(self.dim() as i32)
    }
}

struct RowSeed {
    k: i64,
    oracle: f64,
    pred0: Option<f64>,
    pred1: Option<f64>,
}

fn make_rows(
    kind: ExperimentKind,
    model: &str,
    point_id: &str,
    seeds: Vec<RowSeed>,
    fit: Option<(f64, Option<f64>, f64)>,
) -> Vec<Row> {
    seeds
        .into_iter()
        .map(|s| Row {
            experiment: kind.name(),
            model: model.to_string(),
            point_id: point_id.to_string(),
            k: s.k,
            oracle: s.oracle,
            pred0: s.pred0,
            pred1: s.pred1,
            resid0: s.pred0.map(|p| s.oracle - p),
            resid1: s.pred1.map(|p| s.oracle - p),
            fit_s0: fit.map(|f| f.0),
            fit_s1: fit.and_then(|f| f.1),
            fit_err: fit.map(|f| f.2),
            status: Status::Pass,
        })
        .collect()
}

/// Rows, fit and coefficient checks for a sweep of `S_0 + S_1/k`.
#[allow(clippy::too_many_arguments)]
fn series_point(
    cfg: &ExperimentConfig,
    tol: &Tol,
    label: &str,
    p: &ResolvedPoint,
    id: &str,
    ks: &[i64],
    values: &[f64],
    s0: f64,
    s1: f64,
    check_s0: bool,
) -> Result<PointReport> {
    let kf: Vec<f64> = ks.iter().map(|&k| k as f64).collect();
    let fit = fit_coefficients(&kf, values, cfg.fit_order)?;
    let seeds = ks
        .iter()
        .zip(values)
        .map(|(&k, &v)| RowSeed {
            k,
            oracle: v,
            pred0: Some(s0),
            pred1: Some(s0 + s1 / k as f64),
        })
        .collect();
    let mut checks = Vec::new();
    if check_s0 {
        checks.push(Check::at_most(
            "fit-S0",
            rel_err(fit.coeffs[0], s0),
            tol.s0_rel,
        ));
        checks.push(Check::at_most(
            "fit-S1",
            rel_err(fit.coeffs[1], s1),
            tol.s1_rel,
        ));
    } else {
        checks.push(Check::at_most(
            "fit-S1",
            rel_err(fit.coeffs[1], s1),
            tol.composition_sym,
        ));
    }
    Ok(PointReport {
        point_id: id.to_string(),
        sphere: p.sphere.as_deref().map(to_pairs),
        chart: p.chart.as_deref().map(to_pairs),
        rows: make_rows(
            cfg.experiment,
            label,
            id,
            seeds,
            Some((fit.coeffs[0], Some(fit.coeffs[1]), fit.std_errs[1])),
        ),
        fit: Some(FitSummary::from_fit(&fit)),
        checks,
    })
}

fn sweep<F>(ks: &[i64], f: F) -> Result<Vec<f64>>
where
    F: Fn(i64) -> Result<f64> + Sync,
{
    ks.par_iter().map(|&k| f(k)).collect()
}

fn run_szego(cfg: &ExperimentConfig, w: &Weighted, tol: &Tol) -> Result<Vec<PointReport>> {
    let ks = cfg.ks()?;
    let mut out = Vec::new();
    for p in w.points(cfg)? {
        let n = w.slice(&p)?;
        let x = p
            .sphere
            .clone()
            .expect("weighted points carry a sphere lift");
        let values = sweep(&ks, |k| Ok(w.oracle.szego_diag(k, &x)? * w.scale(k)))?;
        let s0v = s0(&w.quotient).real_value(&n)?;
        let s1v = w.table.s(1)?.real_value(&n)?;
        let mut rep = series_point(cfg, tol, &w.label, &p, &p.id, &ks, &values, s0v, s1v, true)?;
        if cfg.experiment == ExperimentKind::TyzBaseline {
            // (π/k)^d Π_k = Π_{i ≤ d} (1 + i/k) / d! · d! exactly on the standard model
            let d = w.dim();
            let exact = ks
                .iter()
                .zip(&values)
                .map(|(&k, &v)| {
                    let e: f64 = (1..=d).map(|i| 1.0 + i as f64 / k as f64).product();
                    rel_err(v, e)
                })
                .fold(0.0, f64::max);
            let geometric = rep
                .rows
                .iter()
                .map(|r| r.resid1.unwrap_or(f64::INFINITY).abs() / r.oracle.abs())
                .fold(0.0, f64::max);
            rep.checks = vec![
                Check::at_most("oracle-identity", exact, tol.oracle_identity),
                if d == 1 {
                    Check::at_most("geometric-two-term", geometric, tol.geometric_identity)
                } else {
                    rep.checks[1].clone()
                },
            ];
        }
        out.push(rep.seal());
    }
    Ok(out)
}

fn run_toeplitz(cfg: &ExperimentConfig, w: &Weighted, tol: &Tol) -> Result<Vec<PointReport>> {
    let ks = cfg.ks()?;
    let f = cfg.f.as_ref().expect("validated").build(&w.weights)?;
    let fk = w.quotient.symbol_kernel(&f)?;
    let coeffs = toeplitz_table(&w.table, &fk, &w.ops, 1)?;
    let berezin = if cfg.experiment == ExperimentKind::Berezin {
        Some(berezin_expansion(
            &coeffs,
            &[s0(&w.quotient), w.table.s(1)?.clone()],
        )?)
    } else {
        None
    };
    let mut out = Vec::new();
    for p in w.points(cfg)? {
        let n = w.slice(&p)?;
        let x = p
            .sphere
            .clone()
            .expect("weighted points carry a sphere lift");
        let rep = match &berezin {
            None => {
                let values = sweep(&ks, |k| Ok(w.oracle.toeplitz_diag(k, &f, &x)? * w.scale(k)))?;
                let (a, b) = (coeffs[0].real_value(&n)?, coeffs[1].real_value(&n)?);
                series_point(cfg, tol, &w.label, &p, &p.id, &ks, &values, a, b, true)?
            }
            Some(b) => {
                let values = sweep(&ks, |k| {
                    Ok(w.oracle.toeplitz_diag(k, &f, &x)? / w.oracle.szego_diag(k, &x)?)
                })?;
                let (b0, b1) = (b[0].real_value(&n)?, b[1].real_value(&n)?);
                series_point(cfg, tol, &w.label, &p, &p.id, &ks, &values, b0, b1, true)?
            }
        };
        out.push(rep.seal());
    }
    Ok(out)
}

fn run_commutator(cfg: &ExperimentConfig, w: &Weighted, tol: &Tol) -> Result<Vec<PointReport>> {
    let ks = cfg.ks()?;
    let f = cfg.f.as_ref().expect("validated").build(&w.weights)?;
    let g = cfg.g.as_ref().expect("validated").build(&w.weights)?;
    let fk = w.quotient.symbol_kernel(&f)?;
    let gk = w.quotient.symbol_kernel(&g)?;
    let lead = commutator_leading(&w.quotient, &fk, &gk)?;
    let a1_fg = a1_composition(&w.table, &fk, &gk)?;
    let a1_gf = a1_composition(&w.table, &gk, &fk)?;
    let s0k = s0(&w.quotient);
    let mut out = Vec::new();
    for p in w.points(cfg)? {
        let n = w.slice(&p)?;
        let x = p
            .sphere
            .clone()
            .expect("weighted points carry a sphere lift");
        let pairs: Vec<(Complex64, Complex64)> = ks
            .par_iter()
            .map(|&k| {
                Ok((
                    w.oracle.compose_diag(k, &f, &g, &x)?,
                    w.oracle.compose_diag(k, &g, &f, &x)?,
                ))
            })
            .collect::<Result<_>>()?;
        let kf: Vec<f64> = ks.iter().map(|&k| k as f64).collect();
        let im: Vec<f64> = pairs
            .iter()
            .zip(&ks)
            .map(|((a, b), &k)| k as f64 * w.scale(k) * (a - b).im)
            .collect();
        let real_leak = pairs
            .iter()
            .map(|(a, b)| (a - b).re.abs() / (a - b).norm().max(1e-300))
            .fold(0.0, f64::max);
        let target = lead.value(&n)?.im;
        let tail = ks.len().saturating_sub(3);
        let extrapolated = richardson(&kf[tail..], &im[tail..])?;
        let raw = rel_err(*im.last().expect("nonempty"), target);
        let rich = rel_err(extrapolated, target);
        let im_id = format!("{}/im", p.id);
        let seeds = ks
            .iter()
            .zip(&im)
            .map(|(&k, &v)| RowSeed {
                k,
                oracle: v,
                pred0: Some(target),
                pred1: None,
            })
            .collect();
        out.push(
            PointReport {
                point_id: im_id.clone(),
                sphere: Some(to_pairs(&x)),
                chart: Some(to_pairs(&n)),
                rows: make_rows(
                    cfg.experiment,
                    &w.label,
                    &im_id,
                    seeds,
                    Some((extrapolated, None, rich)),
                ),
                fit: None,
                checks: vec![
                    Check::at_most("antisymmetric-part-imaginary", real_leak, 1e-10),
                    Check::at_most("raw-at-kmax", raw, tol.commutator_raw),
                    Check::at_most("richardson", rich, tol.commutator_richardson),
                ],
            }
            .seal(),
        );
        let sym: Vec<f64> = pairs
            .iter()
            .zip(&ks)
            .map(|((a, b), &k)| w.scale(k) * 0.5 * (a + b).re)
            .collect();
        let s0v = (s0k.value(&n)? * fk.value(&n)? * gk.value(&n)?).re;
        let s1v = 0.5 * (a1_fg.value(&n)? + a1_gf.value(&n)?).re;
        let sym_id = format!("{}/sym", p.id);
        out.push(series_point(cfg, tol, &w.label, &p, &sym_id, &ks, &sym, s0v, s1v, false)?.seal());
    }
    Ok(out)
}

/// `3 × 3` grid in C scaled into the disc of radius `r`.
pub fn near_diagonal_grid(r: f64) -> Vec<Complex64> {
    let s = r / 2f64.sqrt();
    (-1..=1)
        .flat_map(|a| (-1..=1).map(move |b| c(a as f64 * s, b as f64 * s)))
        .collect()
}

fn run_near_diagonal(cfg: &ExperimentConfig, w: &Weighted, tol: &Tol) -> Result<Vec<PointReport>> {
    let ks = cfg.ks()?;
    let d = w.dim();
    let mut out = Vec::new();
    for p in w.points(cfg)? {
        let x = p
            .sphere
            .clone()
            .expect("weighted points carry a sphere lift");
        let order = w.oracle.stabilizer_order(&x);
        if order > 1 {
            let seeds: Vec<RowSeed> = ks
                .iter()
                .map(|&k| {
                    let chi = w.oracle.stabilizer_character_sum(&x, k)?;
                    Ok(RowSeed {
                        k,
                        oracle: w.oracle.support_count(k, &x) as f64,
                        pred0: Some(chi.re / order as f64),
                        pred1: None,
                    })
                })
                .collect::<Result<_>>()?;
            let mismatch = seeds
                .iter()
                .map(|s| (s.oracle - s.pred0.unwrap_or(f64::NAN)).abs())
                .fold(0.0, f64::max);
            out.push(
                PointReport {
                    point_id: p.id.clone(),
                    sphere: Some(to_pairs(&x)),
                    chart: p.chart.as_deref().map(to_pairs),
                    rows: make_rows(cfg.experiment, &w.label, &p.id, seeds, None),
                    fit: None,
                    checks: vec![Check::at_most("stabilizer-parity", mismatch, 1e-12)],
                }
                .seal(),
            );
            continue;
        }
        let h = w.oracle.hlc(&x)?;
        let grid = near_diagonal_grid(cfg.grid_radius);
        let lead = h.phi.powi(-(d as i32 + 1));
        let embed = |z: Complex64| {
            let mut v = vec![c(0.0, 0.0); d];
            v[0] = z;
            v
        };
        let mut cells: Vec<(usize, usize, i64)> = Vec::new();
        for i in 0..grid.len() {
            for j in 0..grid.len() {
                cells.extend(ks.iter().map(|&k| (i, j, k)));
            }
        }
        let ratios: Vec<Complex64> = cells
            .par_iter()
            .map(|&(i, j, k)| {
                let root = (k as f64).sqrt();
                let (v, u) = (embed(grid[i]), embed(grid[j]));
                let a = h.point(&v.iter().map(|z| z / root).collect::<Vec<_>>());
                let b = h.point(&u.iter().map(|z| z / root).collect::<Vec<_>>());
                Ok(w.oracle.szego_offdiag(k, &a, &b)? * w.scale(k) * (-psi2(&v, &u) / h.phi).exp())
            })
            .collect::<Result<_>>()?;
        let kmax = *ks.last().expect("nonempty");
        let mut worst: f64 = 0.0;
        let mut rows = Vec::new();
        for ((i, j, k), r) in cells.iter().zip(&ratios) {
            if *k == kmax {
                worst = worst.max((r - lead).norm() / lead);
            }
            let id = format!("{}/v{i}w{j}", p.id);
            rows.extend(make_rows(
                cfg.experiment,
                &w.label,
                &id,
                vec![RowSeed {
                    k: *k,
                    oracle: r.re,
                    pred0: Some(lead),
                    pred1: None,
                }],
                None,
            ));
        }
        out.push(
            PointReport {
                point_id: p.id.clone(),
                sphere: Some(to_pairs(&x)),
                chart: p.chart.as_deref().map(to_pairs),
                rows,
                fit: None,
                checks: vec![Check::at_most(
                    "worst-relative-at-kmax",
                    worst,
                    tol.near_diagonal,
                )],
            }
            .seal(),
        );
    }
    Ok(out)
}

fn gaussian_at(d: usize, y: &[Complex64]) -> PolarizedScalar {
    let mut q = PolarizedScalar::real(d, 0.0);
    for (i, yi) in y.iter().enumerate() {
        let a = &PolarizedScalar::z(d, i) - &PolarizedScalar::constant(d, *yi);
        let b = &PolarizedScalar::zeta(d, i) - &PolarizedScalar::constant(d, yi.conj());
        q = &q + &(&a * &b);
    }
    q.scale_real(-1.0).exp().with_hermitian(true)
}

fn run_englis(
    cfg: &ExperimentConfig,
    label: &str,
    kind: ChartKind,
    d: usize,
    tol: &Tol,
) -> Result<Vec<PointReport>> {
    let chart = match kind {
        ChartKind::Flat => KahlerChart::flat(d),
        ChartKind::FubiniStudy => KahlerChart::fubini_study(d),
    };
    let ops = EnglisOperators::standard();
    let lambdas: Vec<f64> = cfg.ks()?.iter().map(|&k| k as f64).collect();
    let mut out = Vec::new();
    for (i, (pt, sphere)) in resolve_points(cfg, d)?.into_iter().enumerate() {
        if sphere.is_some() {
            return Err(Error::Config("englis-check takes chart points".into()));
        }
        let y = pt.expect("chart point");
        let f = match cfg.test_function {
            TestFunction::One => PolarizedScalar::real(d, 1.0),
            TestFunction::Gaussian => gaussian_at(d, &y),
        };
        let rep = expansion_check(&chart, &y, &f, &ops, &lambdas, &QuadratureConfig::default())?;
        let f0 = f.real_value(&y)?;
        let id = format!("p{i}");
        let seeds = rep
            .rows
            .iter()
            .map(|r| RowSeed {
                k: r.lambda as i64,
                oracle: r.scaled,
                pred0: Some(f0),
                pred1: Some(r.prediction),
            })
            .collect();
        let bound = rep
            .rows
            .iter()
            .map(|r| r.residual.abs() * r.lambda * r.lambda)
            .fold(0.0, f64::max);
        let exponent = match rep.exponent {
            None if rep.terminated => 0.0,
            None => f64::INFINITY,
            Some(e) => (e - rep.expected_exponent).abs(),
        };
        out.push(
            PointReport {
                point_id: id.clone(),
                sphere: None,
                chart: Some(to_pairs(&y)),
                rows: make_rows(cfg.experiment, label, &id, seeds, None),
                fit: None,
                checks: vec![
                    Check::at_most("residual-times-lambda-squared", bound, tol.englis_constant),
                    Check::at_most("decay-exponent-offset", exponent, tol.exponent_band),
                ],
            }
            .seal(),
        );
    }
    Ok(out)
}

fn run_invariants(cfg: &ExperimentConfig) -> Vec<PointReport> {
    invariants::run_all(cfg.seed)
        .into_iter()
        .map(|o| {
            let id = format!("{}/{}", o.suite, o.name);
            PointReport {
                point_id: id.clone(),
                sphere: None,
                chart: None,
                rows: make_rows(
                    cfg.experiment,
                    "all",
                    &id,
                    vec![RowSeed {
                        k: 0,
                        oracle: o.value,
                        pred0: None,
                        pred1: None,
                    }],
                    None,
                ),
                fit: None,
                checks: vec![Check::at_most(o.name, o.value, o.tolerance)],
            }
            .seal()
        })
        .collect()
}

/// Runs a validated configuration.
pub fn run(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let tol = cfg.tolerances.resolve();
    let (label, points) = if cfg.experiment == ExperimentKind::Invariants {
        ("all".to_string(), run_invariants(cfg))
    } else {
        match cfg.model.resolve()? {
            Model::Chart { label, kind, d } => {
                let pts = run_englis(cfg, &label, kind, d, &tol)?;
                (label, pts)
            }
            Model::Weighted { label, weights } => {
                let w = Weighted::new(label.clone(), weights, cfg.precision)?;
                let pts = match cfg.experiment {
                    ExperimentKind::TyzBaseline | ExperimentKind::SzegoSweep => {
                        run_szego(cfg, &w, &tol)?
                    }
                    ExperimentKind::ToeplitzSweep | ExperimentKind::Berezin => {
                        run_toeplitz(cfg, &w, &tol)?
                    }
                    ExperimentKind::Commutator => run_commutator(cfg, &w, &tol)?,
                    ExperimentKind::NearDiagonal => run_near_diagonal(cfg, &w, &tol)?,
                    ExperimentKind::EnglisCheck | ExperimentKind::Invariants => {
                        unreachable!("handled above")
                    }
                };
                (label, pts)
            }
        }
    };
    let warnings = points
        .iter()
        .filter_map(|p| {
            p.fit
                .as_ref()
                .and_then(|f| f.warning.as_ref())
                .map(|w| format!("{}: {w}", p.point_id))
        })
        .collect();
    Ok(ExperimentReport {
        schema: SCHEMA,
        experiment: cfg.experiment,
        model: label,
        precision: cfg.precision,
        seed: cfg.seed,
        passed: points.iter().all(|p| p.passed()),
        warnings,
        points,
    })
}
