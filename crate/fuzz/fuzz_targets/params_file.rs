#![no_main]

use libfuzzer_sys::fuzz_target;
use sympeig::format::parse_params;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = parse_params(text, 1e-10);
    }
});
