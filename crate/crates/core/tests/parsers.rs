//! The fuzz-target invariants, run over the checked-in corpus and over
//! generated inputs.

use std::fmt::Display;
use std::fs;
use std::path::PathBuf;
use std::str::FromStr;

use maxlab::diffeo::DiffeoKind;
use maxlab::experiment::{ExperimentConfig, RunReport};
use maxlab::fields::{CoefficientKind, FieldKind, ScalarKind};
use maxlab::geometry::GraphKind;
use maxlab::maxwell::SweepMode;
use proptest::prelude::*;

fn corpus(target: &str) -> Vec<(String, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fuzz/corpus")
        .join(target);
    let mut out: Vec<(String, String)> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| {
            let p = e.unwrap().path();
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                fs::read_to_string(&p).unwrap(),
            )
        })
        .collect();
    out.sort();
    out
}

fn display_roundtrip<T: FromStr + Display>(text: &str) -> Option<bool> {
    let v = text.parse::<T>().ok()?;
    let shown = v.to_string();
    let back: T = shown
        .parse()
        .unwrap_or_else(|_| panic!("`{shown}` from `{text}` does not parse"));
    assert_eq!(back.to_string(), shown);
    Some(true)
}

fn any_catalog(text: &str) -> bool {
    [
        display_roundtrip::<GraphKind>(text),
        display_roundtrip::<FieldKind>(text),
        display_roundtrip::<ScalarKind>(text),
        display_roundtrip::<CoefficientKind>(text),
        display_roundtrip::<DiffeoKind>(text),
        display_roundtrip::<SweepMode>(text),
    ]
    .iter()
    .any(Option::is_some)
}

fn config_roundtrip(text: &str) -> bool {
    match ExperimentConfig::parse(text) {
        Ok(cfg) => {
            let again = ExperimentConfig::parse(&cfg.to_toml().unwrap()).unwrap();
            assert_eq!(again, cfg);
            true
        }
        Err(e) => {
            assert_eq!(e.exit_status(), 2, "{e}");
            false
        }
    }
}

#[test]
fn config_corpus() {
    let seeds = corpus("config_parse");
    let accepted: Vec<&str> = seeds
        .iter()
        .filter(|(_, t)| config_roundtrip(t))
        .map(|(n, _)| n.as_str())
        .collect();
    assert!(accepted.contains(&"sweep-paraboloid"));
    assert!(!accepted.contains(&"bad-catalog"));
    assert!(!accepted.contains(&"bad-resolutions"));
}

#[test]
fn catalog_corpus() {
    let seeds = corpus("catalog_names");
    let parsed = seeds.iter().filter(|(_, t)| any_catalog(t)).count();
    // `blob` and the unbalanced `wedge(` are the only rejects.
    assert_eq!(parsed, seeds.len() - 2);
}

#[test]
fn report_corpus() {
    let mut decoded = 0;
    for (name, text) in corpus("report_decode") {
        if let Ok(r) = RunReport::from_json(&text) {
            let again = RunReport::from_json(&r.to_json().unwrap()).unwrap();
            assert_eq!(again.to_json().unwrap(), r.to_json().unwrap(), "{name}");
            decoded += 1;
        }
    }
    assert_eq!(decoded, 3);
}

fn catalog_word() -> impl Strategy<Value = String> {
    prop_oneof![
        Just("flat"),
        Just("wedge"),
        Just("linear"),
        Just("cap"),
        Just("const"),
        Just("aniso"),
        Just("scalar"),
        Just("sin"),
        Just("affine"),
        Just("scale"),
        Just("poly"),
        Just("cusp32"),
        Just("magnetic"),
    ]
    .prop_map(str::to_string)
}

proptest! {
    #[test]
    fn catalog_display_is_a_fixed_point(
        word in catalog_word(),
        args in prop::collection::vec(-5.0f64..5.0, 0..13),
        sep in prop_oneof![Just(" "), Just(", "), Just(":")],
    ) {
        let text = if args.is_empty() {
            word
        } else {
            let a: Vec<String> = args.iter().map(|v| v.to_string()).collect();
            format!("{word}{sep}{}", a.join(" "))
        };
        any_catalog(&text);
    }

    #[test]
    fn config_parse_never_panics(text in "[a-z_=\\[\\]\"0-9., \n]{0,80}") {
        config_roundtrip(&text);
    }

    #[test]
    fn generated_configs_roundtrip(
        seed in any::<u64>(),
        res in prop::collection::btree_set(1usize..64, 1..4),
        rho in 0.1f64..3.0,
    ) {
        let res: Vec<String> = res.iter().map(|r| r.to_string()).collect();
        let text = format!(
            "kind = \"gaffney\"\nseed = {seed}\n[domain]\nname = \"cap 2\"\nrho = {rho}\n[quadrature]\nresolutions = [{}]\n",
            res.join(", ")
        );
        prop_assert!(config_roundtrip(&text));
    }
}
