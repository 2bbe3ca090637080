#![no_main]

use libfuzzer_sys::fuzz_target;
use mlsmoke::runner::{summarize, Report};

fuzz_target!(|data: &[u8]| {
    let text = String::from_utf8_lossy(data);
    if let Ok(report) = Report::parse(&text) {
        let summary = summarize(&report.records);
        let _ = summary.to_markdown();
        let _ = summary.to_csv();
        let _ = report.summary.to_csv();
    }
});
