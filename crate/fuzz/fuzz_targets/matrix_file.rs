#![no_main]

use libfuzzer_sys::fuzz_target;
use sympeig::format::{parse_matrix_file, write_matrix_file};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(w) = parse_matrix_file(text) {
        if w.iter().all(|x| x.is_finite()) {
            assert_eq!(parse_matrix_file(&write_matrix_file(&w)).unwrap(), w);
        }
    }
});
