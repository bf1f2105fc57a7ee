//! Replays the checked-in fuzz corpus through the same parser entry points.

use std::fs;
use std::path::PathBuf;

use blpinn_core::config::{ExperimentConfig, ForcingSelector};
use blpinn_core::{Forcing, ProblemKind, Sampling};

fn corpus(target: &str) -> Vec<(PathBuf, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<_> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| e.unwrap().path())
        .filter_map(|p| fs::read(&p).ok().map(|b| (p, String::from_utf8_lossy(&b).into_owned())))
        .collect();
    out.sort();
    assert!(!out.is_empty(), "empty corpus for {target}");
    out
}

#[test]
fn config_corpus() {
    let mut accepted = 0;
    for (path, text) in corpus("config_parse") {
        if let Ok(cfg) = ExperimentConfig::parse(&text) {
            accepted += 1;
            let _ = cfg.sweep_eps();
            if !matches!(cfg.forcing, ForcingSelector::File(_)) {
                if let Ok(eps) = cfg.single_eps() {
                    let _ = cfg.problem_spec(eps);
                }
            }
        } else {
            let err = ExperimentConfig::parse(&text).unwrap_err().to_string();
            assert!(err.contains("line"), "{}: {err}", path.display());
        }
    }
    assert!(accepted > 0);
}

#[test]
fn forcing_table_corpus() {
    for (_, text) in corpus("forcing_table") {
        if let Ok(f) = Forcing::parse_table(&text) {
            for i in 0..=16 {
                assert!(f.eval(i as f64 / 16.0).is_finite());
            }
        }
    }
}

#[test]
fn selector_corpus() {
    for (_, text) in corpus("cli_selectors") {
        if let Ok(kind) = text.parse::<ProblemKind>() {
            assert_eq!(kind.to_string().parse::<ProblemKind>().ok(), Some(kind));
        }
        let _ = text.parse::<ForcingSelector>();
        let _ = text.parse::<Sampling>();
    }
}
