#![no_main]

use libfuzzer_sys::fuzz_target;
use mlsmoke::emit::{Bindings, Template};

fuzz_target!(|data: &[u8]| {
    let text = String::from_utf8_lossy(data);
    if let Ok(t) = Template::parse(&text) {
        let _ = t.placeholders();
        let _ = t.render(
            &Bindings::new()
                .text("name", "x")
                .list("tests", vec![Bindings::new()]),
        );
    }
});
