#![no_main]

use blpinn_core::config::ForcingSelector;
use blpinn_core::{ProblemKind, Sampling};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(kind) = text.parse::<ProblemKind>() {
            assert_eq!(kind.to_string().parse::<ProblemKind>().ok(), Some(kind));
        }
        let _ = text.parse::<ForcingSelector>();
        let _ = text.parse::<Sampling>();
    }
});
