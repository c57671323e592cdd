#![no_main]

use libfuzzer_sys::fuzz_target;
use sympeig::format::{parse_inline_matrix, parse_vector};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let _ = parse_vector(text);
    if let Ok(w) = parse_inline_matrix(text) {
        assert!(w.is_square() && w.nrows() % 2 == 0);
    }
});
