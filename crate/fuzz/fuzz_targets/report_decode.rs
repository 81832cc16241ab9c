#![no_main]

use libfuzzer_sys::fuzz_target;
use maxlab::experiment::RunReport;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(report) = RunReport::from_json(text) {
        let again = report.to_json().expect("encode decoded report");
        RunReport::from_json(&again).expect("decode re-encoded report");
        let _ = report.to_markdown();
    }
});
