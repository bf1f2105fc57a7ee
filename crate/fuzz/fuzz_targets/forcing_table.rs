#![no_main]

use blpinn_core::Forcing;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(f) = Forcing::parse_table(text) {
            for i in 0..=16 {
                let x = i as f64 / 16.0;
                assert!(f.eval(x).is_finite());
            }
        }
    }
});
