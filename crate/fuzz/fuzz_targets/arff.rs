#![no_main]

use libfuzzer_sys::fuzz_target;
use mlsmoke::emit::parse_arff;

fuzz_target!(|data: &[u8]| {
    let text = String::from_utf8_lossy(data);
    if let Ok(file) = parse_arff(&text) {
        let _ = file.to_partition();
    }
});
