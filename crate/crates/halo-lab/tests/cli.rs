use std::path::{Path, PathBuf};
use std::process::Command;

use num_bigint::BigInt;
use num_integer::Integer;
use serde_json::{json, Value};

use halo_core::fredholm::{EntireSeriesTrunc, Tail};
use halo_core::ring::{BoundarySeriesElem, PadicScalar, PrimeConfig, RingTag, WeightPoint};
use halo_lab::error::CheckFailure;
use halo_lab::{run_experiment, slope_scan, ExperimentConfig, LabError, Stages, Status};

fn toy(n_max: usize) -> Value {
    json!({
        "primeConfig": { "p": 3, "pPrecision": 40, "xWindow": [-4, 39] },
        "weight": { "kind": "universal", "eta": 0 },
        "operator": { "type": "toy-up" },
        "radius": [1, 1],
        "truncation": 16,
        "nMax": n_max,
        "targetPrecision": 10
    })
}

fn write_config(dir: &Path, v: &Value) -> PathBuf {
    let path = dir.join("config.json");
    std::fs::write(&path, serde_json::to_string_pretty(v).unwrap()).unwrap();
    path
}

fn halo(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_halo-lab")).args(args).output().unwrap();
    (out.status.code().unwrap(), String::from_utf8_lossy(&out.stderr).into_owned())
}

fn files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect();
    v.sort();
    v
}

// Gauss valuation of a printed element "c*X^n + ... + O(val>=k)", recomputed from the digits.
fn gauss_of(text: &str, p: u64) -> Option<i64> {
    let mut best: Option<i64> = None;
    for term in text.split(" + ") {
        if term.starts_with("O(") {
            continue;
        }
        let (c, n) = match term.split_once("*X") {
            Some((c, rest)) => (c, rest.strip_prefix('^').map_or(1, |e| e.parse::<i64>().unwrap())),
            None => (term, 0),
        };
        let mut c: BigInt = c.parse().unwrap();
        if c == BigInt::from(0) {
            continue;
        }
        let mut v = 0;
        let pb = BigInt::from(p);
        while c.is_multiple_of(&pb) {
            c /= &pb;
            v += 1;
        }
        best = Some(best.map_or(v + n, |b: i64| b.min(v + n)));
    }
    best
}

#[test]
fn even_prime_is_rejected() {
    let mut v = toy(4);
    v["primeConfig"]["p"] = json!(2);
    let cfg = ExperimentConfig::from_json(&v.to_string()).unwrap();
    match cfg.validate() {
        Err(LabError::Config(m)) => assert!(m.contains("p must be odd")),
        other => panic!("{other:?}"),
    }
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), &v);
    let (code, err) = halo(&["run", path.to_str().unwrap(), "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(code, 2, "{err}");
}

#[test]
fn unknown_fields_are_rejected() {
    let mut v = toy(4);
    v["seed"] = json!(1);
    assert!(matches!(ExperimentConfig::from_json(&v.to_string()), Err(LabError::Config(_))));
    let mut v = toy(4);
    v["weight"]["colour"] = json!("red");
    assert!(ExperimentConfig::from_json(&v.to_string()).is_err());
}

#[test]
fn toy_up_meets_lambda_bound() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), &toy(8));
    let out = dir.path().join("o");
    let (code, err) = halo(&["lambda-check", path.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    let csv = std::fs::read_to_string(out.join("coefficients.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("# halo-lab coefficients v1"));
    assert_eq!(lines.next(), Some("n,valuation,precision_modulus,lambda_n,ok"));
    let rows: Vec<_> = lines.collect();
    assert_eq!(rows.len(), 9);
    assert!(rows.iter().all(|r| r.ends_with(",true")));
    // recompute each valuation from the printed coefficient
    let report: Value = serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    for c in report["coefficients"].as_array().unwrap() {
        let got = gauss_of(c["value"].as_str().unwrap(), 3);
        let prec = c["precisionModulus"].as_i64();
        let lam = c["lambdaN"].as_i64().unwrap();
        let lower = match (got, prec) {
            (Some(v), Some(k)) => v.min(k),
            (Some(v), None) => v,
            (None, Some(k)) => k,
            (None, None) => i64::MAX,
        };
        assert!(lower >= lam, "{c}");
        if c["certified"].as_bool().unwrap() {
            assert_eq!(got, c["valuation"].as_i64());
        }
    }
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let mut v = toy(6);
    v["points"] = json!([{ "kind": "modP" }, { "kind": "weight", "k": 1 }, { "kind": "classical", "x": 6 }]);
    v["outputs"] = json!({ "formats": ["csv", "json", "svg", "dat"] });
    let path = write_config(dir.path(), &v);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert_eq!(halo(&["run", path.to_str().unwrap(), "--out", a.to_str().unwrap()]).0, 0);
    assert_eq!(halo(&["run", path.to_str().unwrap(), "--out", b.to_str().unwrap(), "--jobs", "4"]).0, 0);
    let fa = files(&a);
    assert!(fa.iter().any(|(n, _)| n == "polygon_modp.svg"));
    assert_eq!(fa, files(&b));
}

#[test]
fn report_matches_the_shipped_schema() {
    let schema: Value =
        serde_json::from_str(include_str!("../schema/report.schema.json")).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    let mut v = toy(6);
    v["points"] = json!([{ "kind": "modP" }, { "kind": "weight", "k": 1 }]);
    v["factor"] = json!({ "point": { "kind": "weight", "k": 1 }, "h": [1, 1], "precision": 8, "riesz": true });
    let cfg = ExperimentConfig::from_json(&v.to_string()).unwrap();
    let report = run_experiment(&cfg, Stages::ALL).unwrap();
    let value = serde_json::to_value(&report).unwrap();
    let errors: Vec<String> = validator.iter_errors(&value).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{errors:?}");
    let fac = report.factorization.unwrap();
    assert_eq!(fac.degree, 1);
    assert_eq!(fac.riesz.unwrap().dimension, 1);
    // a report without optional parts validates too
    let bare = run_experiment(&cfg, Stages::CHARSERIES).unwrap();
    assert!(validator.is_valid(&serde_json::to_value(&bare).unwrap()));
}

#[test]
fn hash_ignores_layout() {
    let v = toy(6);
    let a = ExperimentConfig::from_json(&v.to_string()).unwrap();
    let b = ExperimentConfig::from_json(&serde_json::to_string_pretty(&v).unwrap()).unwrap();
    assert_eq!(a.hash(), b.hash());
    let mut w = v.clone();
    w["nMax"] = json!(7);
    assert_ne!(a.hash(), ExperimentConfig::from_json(&w.to_string()).unwrap().hash());
}

#[test]
fn exit_codes_are_distinct() {
    use halo_core::HaloError;
    let errs = [
        LabError::Config(String::new()),
        LabError::Compute { stage: "x", source: HaloError::ZeroResidue },
        LabError::Io { path: String::new(), message: String::new() },
        LabError::EntryBound(HaloError::ZeroResidue),
        LabError::Check(CheckFailure::Lambda),
        LabError::Check(CheckFailure::Residual),
        LabError::Check(CheckFailure::SlopeAgreement),
    ];
    let mut codes: Vec<i32> = errs.iter().map(|e| e.exit_code()).collect();
    assert!(codes.iter().all(|&c| c != 0));
    assert_eq!(&codes[3..6], &[11, 10, 12]);
    codes.sort();
    codes.dedup();
    assert_eq!(codes.len(), errs.len());
}

#[test]
fn pushforward_slopes_do_not_depend_on_the_point() {
    let v = json!({
        "primeConfig": { "p": 3, "pPrecision": 60, "xWindow": [-4, 59] },
        "weight": { "kind": "universal", "eta": 0 },
        "operator": { "type": "mult-by-p" },
        "radius": [1, 1],
        "truncation": 30,
        "nMax": 8,
        "targetPrecision": 20,
        "points": [{ "kind": "weight", "k": 1 }, { "kind": "classical", "x": 6 }, { "kind": "classical", "x": 9 }, { "kind": "weight", "k": 4 }],
        "expectSlopeAgreement": 5
    });
    let cfg = ExperimentConfig::from_json(&v.to_string()).unwrap();
    let r = run_experiment(&cfg, Stages::ALL).unwrap();
    assert_eq!(r.checks.slope_agreement, Some(Status::Pass));
    let first = &r.points[0].slopes;
    assert!(r.points.iter().all(|p| &p.slopes == first));
    assert_eq!(first.iter().take(5).map(|s| s.slope_num).collect::<Vec<_>>(), vec![0, 1, 2, 3, 4]);
}

#[test]
fn linear_series_scans_to_slope_one() {
    let cfg = PrimeConfig::new(5, 20, (-4, 20)).unwrap();
    let x = BoundarySeriesElem::x(&cfg, RingTag::LambdaEta).unwrap();
    let f = EntireSeriesTrunc::new(vec![BoundarySeriesElem::one(&cfg, RingTag::LambdaEta), x.neg()], Tail::Zero).unwrap();
    let pts: Vec<_> = [5, 10, 15, 20].iter().map(|&x| WeightPoint::classical(PadicScalar::from_int(5, x))).collect();
    let scan = slope_scan(&f, &pts, 1).unwrap();
    for p in &scan {
        assert_eq!(p.slopes.len(), 1);
        assert_eq!((p.slopes[0].slope_num, p.slopes[0].slope_den, p.slopes[0].multiplicity), (1, 1, 1));
        assert_eq!(p.ratios, vec!["1".to_string()]);
    }
}

#[test]
fn bad_format_and_missing_file_are_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), &toy(4));
    assert_eq!(halo(&["charseries", path.to_str().unwrap(), "--format", "xml"]).0, 2);
    assert_eq!(halo(&["charseries", dir.path().join("nope.json").to_str().unwrap()]).0, 2);
}
