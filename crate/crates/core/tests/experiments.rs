use eqbtq_core::experiments::{shipped_models, OutputFormat};
use eqbtq_core::{run, Error, ExperimentConfig, ExperimentKind};

const SWEEP: &str = include_str!("../../../configs/szego-sweep.json");

fn with(base: &str, edit: impl FnOnce(&mut serde_json::Value)) -> String {
    let mut v: serde_json::Value = serde_json::from_str(base).unwrap();
    edit(&mut v);
    v.to_string()
}

#[test]
fn shipped_configs_parse() {
    for text in [
        include_str!("../../../configs/tyz-baseline.json"),
        SWEEP,
        include_str!("../../../configs/toeplitz-sweep.json"),
        include_str!("../../../configs/berezin.json"),
        include_str!("../../../configs/commutator.json"),
        include_str!("../../../configs/englis-flat.json"),
        include_str!("../../../configs/englis-fs.json"),
        include_str!("../../../configs/near-diagonal.json"),
        include_str!("../../../configs/invariants.json"),
    ] {
        ExperimentConfig::from_json(text).unwrap();
    }
}

#[test]
fn output_is_identical_across_thread_counts() {
    let cfg = ExperimentConfig::from_json(SWEEP).unwrap();
    let render = |threads| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        pool.install(|| run(&cfg).unwrap().to_csv().unwrap())
    };
    let one = render(1);
    assert_eq!(one, render(4));
    assert_eq!(one, render(3));
}

#[test]
fn csv_and_json_carry_the_same_rows() {
    let rep = run(&ExperimentConfig::from_json(SWEEP).unwrap()).unwrap();
    let csv = rep.render(OutputFormat::Csv).unwrap();
    let json: serde_json::Value =
        serde_json::from_str(&rep.render(OutputFormat::Json).unwrap()).unwrap();
    let nested: usize = json["points"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| p["rows"].as_array().unwrap().len())
        .sum();
    assert_eq!(csv.lines().count() - 1, nested);
    assert_eq!(nested, 3 * 16);
    let first = &json["points"][0]["rows"][0];
    for key in [
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
    ] {
        assert!(first.get(key).is_some(), "missing {key}");
    }
    assert_eq!(json["schema"], "eqbtq-experiment/1");
}

#[test]
fn seeded_random_points_are_reproducible() {
    let text = include_str!("../../../configs/tyz-baseline.json");
    let a = run(&ExperimentConfig::from_json(text).unwrap()).unwrap();
    let b = run(&ExperimentConfig::from_json(text).unwrap()).unwrap();
    assert_eq!(a.to_csv().unwrap(), b.to_csv().unwrap());
    let other = with(text, |v| v["seed"] = 12.into());
    let c = run(&ExperimentConfig::from_json(&other).unwrap()).unwrap();
    assert_ne!(a.to_csv().unwrap(), c.to_csv().unwrap());
}

fn rejected(text: &str) -> bool {
    matches!(ExperimentConfig::from_json(text), Err(Error::Config(_)))
}

#[test]
fn invalid_configs_are_rejected() {
    assert!(rejected(
        &with(SWEEP, |v| v["schema"] = "eqbtq-experiment/2".into())
    ));
    assert!(rejected(&with(SWEEP, |v| v["colour"] = "blue".into())));
    assert!(rejected(&with(SWEEP, |v| v["k_range"]["max"] = 2000.into())));
    assert!(rejected(&with(SWEEP, |v| v["model"] =
        serde_json::json!({ "name": "nope" }))));
    assert!(rejected(
        &with(SWEEP, |v| v["points"] = serde_json::json!([]))
    ));
    assert!(rejected(
        &with(SWEEP, |v| v["experiment"] = "commutator".into())
    ));
    assert!(rejected(
        &with(SWEEP, |v| v["experiment"] = "tyz-baseline".into())
    ));
    assert!(rejected(
        &with(SWEEP, |v| v["k_values"] = serde_json::json!([100, 200]))
    ));
    assert!(rejected("not json"));
}

#[test]
fn wrong_point_dimension_is_an_error() {
    let text = with(SWEEP, |v| {
        v["points"] = serde_json::json!([{ "chart": [[0.1, 0.0], [0.2, 0.0]] }])
    });
    let cfg = ExperimentConfig::from_json(&text).unwrap();
    assert!(matches!(
        run(&cfg),
        Err(Error::Dimension {
            expected: 1,
            got: 2
        })
    ));
}

#[test]
fn point_off_the_slice_is_reported() {
    let text = with(SWEEP, |v| {
        v["points"] = serde_json::json!([{ "sphere": [[0.0, 0.0], [1.0, 0.0]] }])
    });
    let cfg = ExperimentConfig::from_json(&text).unwrap();
    assert!(matches!(run(&cfg), Err(Error::UnsupportedPoint(_))));
}

#[test]
fn model_catalogue() {
    let names: Vec<&str> = shipped_models().into_iter().map(|m| m.name).collect();
    for n in ["cp1", "cp1-w12", "cp2", "cp2-w112", "flat1", "fs1"] {
        assert!(names.contains(&n), "{n}");
    }
    assert_eq!(ExperimentKind::NearDiagonal.name(), "near-diagonal");
}
