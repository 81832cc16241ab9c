#![no_main]

use libfuzzer_sys::fuzz_target;
use maxlab::experiment::ExperimentConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(cfg) = ExperimentConfig::parse(text) {
        // An accepted config must survive a serialize/parse cycle.
        let again = cfg.to_toml().expect("serialize accepted config");
        ExperimentConfig::parse(&again).expect("reparse accepted config");
    }
});
