#![no_main]

use blpinn_core::config::{ExperimentConfig, ForcingSelector};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(cfg) = ExperimentConfig::parse(text) {
            let _ = cfg.sweep_eps();
            // file forcing would touch the filesystem
            if matches!(cfg.forcing, ForcingSelector::File(_)) {
                return;
            }
            if let Ok(eps) = cfg.single_eps() {
                let _ = cfg.problem_spec(eps);
            }
        }
    }
});
