#![no_main]

use libfuzzer_sys::fuzz_target;
use sympeig::format::read_grid_csv;

fuzz_target!(|data: &[u8]| {
    if let Ok((points, samples)) = read_grid_csv(data) {
        assert_eq!(points.len(), samples.len());
    }
});
