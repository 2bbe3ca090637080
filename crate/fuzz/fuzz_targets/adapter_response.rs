#![no_main]

use libfuzzer_sys::fuzz_target;
use mlsmoke::runner::{classify_response, parse_response, Capabilities, TestEvent};

fuzz_target!(|data: &[u8]| {
    let text = String::from_utf8_lossy(data);
    if let Ok(resp) = parse_response(&text) {
        let _ = Capabilities::from_response(&resp);
        let _ = classify_response(&TestEvent::Response(resp), &regex::RegexSet::empty());
    }
});
