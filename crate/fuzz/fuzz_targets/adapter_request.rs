#![no_main]

use libfuzzer_sys::fuzz_target;
use mlsmoke::runner::parse_request;

fuzz_target!(|data: &[u8]| {
    let text = String::from_utf8_lossy(data);
    if let Ok(req) = parse_request(&text) {
        assert_eq!(parse_request(&req.to_line()).as_ref(), Ok(&req));
    }
});
