#![no_main]

use libfuzzer_sys::fuzz_target;
use sympeig::format::Record;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(rec) = Record::parse(text) {
        // Whatever parses must survive a write/parse cycle unchanged.
        let again = Record::parse(&rec.to_text()).expect("rewritten record parses");
        assert_eq!(rec.entries(), again.entries());
    }
});
