#![no_main]
use libfuzzer_sys::fuzz_target;
use theta_semigroup::io::{coeffs_to_json, parse_coeffs_json};

fuzz_target!(|s: &str| {
    if let Ok(c) = parse_coeffs_json(s) {
        let again = parse_coeffs_json(&coeffs_to_json(&c)).expect("writer output parses");
        assert_eq!(again.halfwidth(), c.halfwidth());
    }
});
