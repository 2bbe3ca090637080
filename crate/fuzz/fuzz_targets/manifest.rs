#![no_main]

use libfuzzer_sys::fuzz_target;
use mlsmoke::emit::{read_csv_partition, SuiteManifest};

// Input: manifest JSON, a NUL byte, then CSV bytes checked against it.
fuzz_target!(|data: &[u8]| {
    let (json, csv) = match data.iter().position(|b| *b == 0) {
        Some(i) => (&data[..i], &data[i + 1..]),
        None => (data, &[][..]),
    };
    let Ok(text) = std::str::from_utf8(json) else {
        return;
    };
    if let Ok(m) = SuiteManifest::parse(text) {
        let _ = m.referenced_files();
        let _ = read_csv_partition(csv, &m);
    }
});
