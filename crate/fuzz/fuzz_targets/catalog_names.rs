#![no_main]

use std::fmt::Display;
use std::str::FromStr;

use libfuzzer_sys::fuzz_target;
use maxlab::diffeo::DiffeoKind;
use maxlab::fields::{CoefficientKind, FieldKind, ScalarKind};
use maxlab::geometry::GraphKind;
use maxlab::maxwell::SweepMode;

/// Parsing a displayed name gives back the same display.
fn check<T: FromStr + Display>(text: &str) {
    if let Ok(v) = text.parse::<T>() {
        let shown = v.to_string();
        let back: T = shown
            .parse()
            .unwrap_or_else(|_| panic!("display `{shown}` does not parse"));
        assert_eq!(back.to_string(), shown);
    }
}

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    check::<GraphKind>(text);
    check::<FieldKind>(text);
    check::<ScalarKind>(text);
    check::<CoefficientKind>(text);
    check::<DiffeoKind>(text);
    check::<SweepMode>(text);
});
