//! Descriptor YAML: parse must not panic, and whatever parses must survive a
//! serialize/parse round trip unchanged.

#![no_main]

use libfuzzer_sys::fuzz_target;
use mlsmoke::combinatorics::{count_exhaustive, count_linear};
use mlsmoke::descriptor::parse_descriptor;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(d) = parse_descriptor(text) else {
        return;
    };
    let again = parse_descriptor(&d.to_yaml()).expect("serialized descriptor must parse");
    assert_eq!(again, d);
    let _ = count_exhaustive(&d);
    let _ = count_linear(&d);
});
