#![no_main]

use libfuzzer_sys::fuzz_target;
use mlsmoke::emit::parse_csv;

fuzz_target!(|data: &[u8]| {
    if let Ok(table) = parse_csv(data) {
        let _ = table.feature_values();
    }
});
