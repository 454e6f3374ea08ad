//! Every checked-in fuzz seed goes through its decoder. Seeds named `bad_*`
//! must be rejected, the rest accepted.

use std::fs;
use std::path::{Path, PathBuf};

use hodge_hardy::calculus::SymbolFunction;
use hodge_hardy::complex::io::parse_complex;
use hodge_hardy::harness::ExperimentConfig;
use hodge_hardy::operators::io::parse_form;
use hodge_hardy::tent::parse_field;

fn seeds(target: &str) -> Vec<(PathBuf, String)> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<_> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| {
            let p = e.unwrap().path();
            let text = fs::read_to_string(&p).unwrap();
            (p, text)
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

fn check(target: &str, accepts: impl Fn(&str) -> bool) {
    for (path, text) in seeds(target) {
        let bad = path.file_name().unwrap().to_string_lossy().starts_with("bad_");
        assert_eq!(accepts(&text), !bad, "{}", path.display());
    }
}

#[test]
fn complex_seeds() {
    check("complex_json", |t| parse_complex(t).is_ok());
}

#[test]
fn form_seeds() {
    check("form_json", |t| parse_form(t, &[3, 2]).is_ok());
}

#[test]
fn field_seeds() {
    check("field_json", |t| parse_field(t, &[2, 1]).is_ok());
}

#[test]
fn config_seeds() {
    check("config_json", |t| ExperimentConfig::parse(t).is_ok());
}

#[test]
fn symbol_seeds() {
    check("symbol_name", |t| t.parse::<SymbolFunction>().is_ok());
}
