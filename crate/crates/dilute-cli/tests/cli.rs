use clap::Parser;
use dilute_cli::config::parse_complex;
use dilute_cli::report::canonical_json;
use dilute_cli::{catalog, execute, run, Flags, Outcome};
use proptest::prelude::*;

fn flags(args: &str) -> Flags {
    Flags::try_parse_from(std::iter::once("dilute").chain(args.split_whitespace())).unwrap()
}

fn go(args: &str) -> Outcome {
    execute(flags(args)).unwrap()
}

fn canonical(o: &Outcome) -> String {
    canonical_json(o.config.as_ref().unwrap(), &o.results)
}

#[test]
fn enumerate_three_sites_no_defects() {
    let o = go("enumerate --N 3 --d 0");
    let lines: Vec<&str> = o.rendered.lines().collect();
    assert_eq!(lines.len(), 8);
    assert_eq!(lines[7], "dim=7");
    assert!(o.passed());
    assert_eq!(run(["dilute", "enumerate", "--N", "3", "--d", "0", "--output", "/dev/null"]), 0);
}

#[test]
fn dimensions_of_every_sector() {
    let o = go("enumerate --N 6 --format json");
    assert_eq!(o.results.len(), 7);
    assert!(o.results.iter().all(|r| r.check == "dimension" && r.pass && r.residual == 0.0));
}

#[test]
fn dlm_1_2_preset_closes() {
    let o = go("suite --preset dlm-1-2 --N 3 --format json");
    let cfg = o.config.as_ref().unwrap();
    assert_eq!(cfg.subcommand, "suite");
    assert!(o.passed(), "{:?}", o.results.iter().find(|r| !r.pass));
    let closure: Vec<_> = o.results.iter().filter(|r| r.check.starts_with("closure.")).collect();
    assert!(!closure.is_empty());
    for r in &closure {
        assert_eq!((r.params["a"].as_u64(), r.params["b"].as_u64()), (Some(1), Some(4)));
    }
    for id in ["closure.closure-a", "closure.closure-b", "closure.extra-a", "closure.extra-b", "closure.quartic"] {
        assert!(closure.iter().any(|r| r.check == id), "{id} missing");
    }
    assert!(o.results.iter().any(|r| r.check == "tba.nodes"));
}

#[test]
fn local_check_is_seeded() {
    let a = go("local-check --id ybe --trials 20 --seed 7 --format json");
    let b = go("local-check --id ybe --trials 20 --seed 7 --format json --threads 1");
    assert_eq!(a.results.len(), 20);
    let ra: Vec<f64> = a.results.iter().map(|r| r.residual).collect();
    let rb: Vec<f64> = b.results.iter().map(|r| r.residual).collect();
    assert_eq!(ra, rb);
    assert_eq!(canonical(&a), canonical(&b));
    let c = go("local-check --id ybe --trials 20 --seed 8 --format json");
    assert_ne!(canonical(&a), canonical(&c));
}

#[test]
fn reports_are_reproducible_across_pools() {
    let args = "suite --preset dlm-2-3 --N 2 --format json";
    let a = go(&format!("{args} --threads 4"));
    let b = go(&format!("{args} --threads 1"));
    assert_eq!(canonical(&a), canonical(&b));
}

#[test]
fn json_schema() {
    let o = go("transfer --N 2 --format json");
    let v: serde_json::Value = serde_json::from_str(&o.rendered).unwrap();
    assert!(v["header"]["config"].is_object());
    assert_eq!(v["header"]["versions"]["dilute"], dilute::VERSION);
    for r in v["results"].as_array().unwrap() {
        for k in ["check", "params", "residual", "tolerance", "pass", "wall_time"] {
            assert!(r.get(k).is_some(), "{k}");
        }
        let (res, tol) = (r["residual"].as_f64().unwrap(), r["tolerance"].as_f64().unwrap());
        assert!(res.is_finite() && res >= 0.0 && tol.is_finite() && tol >= 0.0);
    }
}

#[test]
fn csv_mirrors_json() {
    let j = go("tsystem --N 2 --format json");
    let c = go("tsystem --N 2 --format csv");
    let mut rd = csv::Reader::from_reader(c.rendered.as_bytes());
    assert_eq!(
        rd.headers().unwrap().iter().collect::<Vec<_>>(),
        ["check", "params", "residual", "tolerance", "pass", "wall_time"]
    );
    let rows: Vec<csv::StringRecord> = rd.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), j.results.len());
    for (row, r) in rows.iter().zip(&j.results) {
        assert_eq!(&row[0], r.check);
        assert_eq!(row[1].parse::<serde_json::Value>().unwrap(), serde_json::to_value(&r.params).unwrap());
        assert_eq!(row[2].parse::<f64>().unwrap(), r.residual);
    }
}

#[test]
fn lambda_precedence() {
    let o = go("enumerate --N 1 --lambda 0.3 --a 1 --b 3 --p 1 --pp 2 --format json");
    let cfg = o.config.unwrap();
    assert_eq!(cfg.root, Some((1, 4)));
    assert_eq!(cfg.p_pprime, Some((1, 2)));
    assert!((cfg.lambda - 3.0 * std::f64::consts::PI / 8.0).abs() < 1e-15);
    assert_eq!(cfg.overridden, ["a = 1", "b = 3", "lambda = 0.3"]);
    let o = go("enumerate --N 1 --lambda 0.3 --a 1 --b 3");
    assert_eq!(o.config.unwrap().root, Some((1, 3)));
    let o = go("enumerate --N 1 --lambda 0.3");
    assert_eq!(o.config.unwrap().lambda, 0.3);
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.json");
    std::fs::write(&path, r#"{"subcommand": "closure", "N": 2, "p": 1, "pp": 2, "d": "0", "m-max": 3}"#).unwrap();
    let o = go(&format!("--config {} --N 1 --format json", path.display()));
    let cfg = o.config.as_ref().unwrap();
    assert_eq!((cfg.n, cfg.root, cfg.m_max), (1, Some((1, 4)), 3));
    assert_eq!(cfg.d, [0]);
    assert!(o.passed());

    std::fs::write(&path, r#"{"subcommand": "enumerate", "nope": 1}"#).unwrap();
    let err = execute(flags(&format!("--config {}", path.display()))).err().unwrap();
    assert_eq!(err.field, "nope");
    assert_eq!(run(["dilute", "--config", path.to_str().unwrap()]), 2);
}

#[test]
fn configuration_errors_name_the_field() {
    for (args, field) in [
        ("frobnicate", "subcommand"),
        ("enumerate --N 0", "N"),
        ("enumerate --N 2 --d 3", "d"),
        ("enumerate --lambda 1.5707963267948966", "lambda"),
        ("enumerate --p 2", "pp"),
        ("enumerate --a 2 --b 4", "b"),
        ("closure --N 2", "a"),
        ("enumerate --xi 0.1,0.2 --N 3", "xi"),
        ("enumerate --omega abc", "omega"),
        ("enumerate --tol dimension=-1", "tol"),
        ("enumerate --tol nothing=1", "tol"),
        ("enumerate --format xml", "format"),
        ("suite --preset dlm-2-4", "preset"),
        ("suite", "preset"),
        ("local-check --id nope", "id"),
        ("--explain nope", "explain"),
    ] {
        let err = execute(flags(args)).err().unwrap_or_else(|| panic!("{args} accepted"));
        assert_eq!(err.field, field, "{args}: {err}");
    }
    assert_eq!(run(["dilute", "enumerate", "--N", "0"]), 2);
    assert_eq!(run(["dilute", "enumerate", "--no-such-flag"]), 2);
}

#[test]
fn failing_check_exits_one() {
    let o = go("local-check --id triangle_A4d --trials 2");
    assert!(!o.passed());
    assert_eq!(run(["dilute", "local-check", "--id", "triangle_A4d", "--trials", "2", "--output", "/dev/null"]), 1);
    // a zero tolerance passes only exact agreement
    let o = go("local-check --id ybe --trials 2 --tol local.ybe=0");
    for r in &o.results {
        assert_eq!(r.tolerance, 0.0);
        assert_eq!(r.pass, r.residual == 0.0);
    }
}

#[test]
fn every_listed_check_is_explained() {
    let list = go("--list").rendered;
    let ids: Vec<&str> = list.lines().map(|l| l.split_whitespace().next().unwrap()).collect();
    assert_eq!(ids.len(), catalog::catalog().len());
    let mut seen = std::collections::HashSet::new();
    for id in ids {
        assert!(seen.insert(id), "{id} listed twice");
        let text = go(&format!("--explain {id}")).rendered;
        assert!(text.starts_with(id) && text.lines().count() == 3, "{id}");
    }
}

#[test]
fn every_emitted_check_is_listed() {
    let o = go("suite --preset full --N 2 --trials 2 --format json");
    for r in &o.results {
        assert!(catalog::is_known(&r.check), "{}", r.check);
    }
}

#[test]
fn tba_export_document() {
    let o = go("tba-export --p 1 --pp 2");
    assert!(o.passed());
    assert_eq!(o.rendered.lines().filter(|l| l.starts_with("node ")).count(), 6);
    assert!(o.rendered.lines().any(|l| l == "edge 5 5 numerator 4"));
    let j = go("tba-export --a 1 --b 3 --format json");
    let v: serde_json::Value = serde_json::from_str(&j.rendered).unwrap();
    assert_eq!(v["nodes"].as_array().unwrap().len(), 5);
}

#[test]
fn transfer_dump() {
    let o = go("transfer --N 2 --d 1 --dump --u 0.2-0.1i");
    let lines: Vec<&str> = o.rendered.lines().collect();
    assert!(lines[0].starts_with("# N=2 d=1 u=0.2-0.1i"));
    assert_eq!(lines.len(), 1 + 2 * 2);
}

proptest! {
    #[test]
    fn complex_text_round_trips(re in -1e3f64..1e3, im in -1e3f64..1e3) {
        let text = format!("{re}{im:+}i");
        let z = parse_complex(&text).unwrap();
        prop_assert_eq!((z.re, z.im), (re, im));
        prop_assert_eq!(parse_complex(&format!("{re}")).unwrap().re, re);
    }
}
