#![no_main]

use libfuzzer_sys::fuzz_target;
use rhtn_core::harness::read_csv;

fuzz_target!(|data: &[u8]| {
    if let Ok(rows) = read_csv(data) {
        for row in rows {
            assert!(row.episodes > 0);
            assert!(row.mean_goals.is_finite() && row.mean_goals >= 0.0);
        }
    }
});
