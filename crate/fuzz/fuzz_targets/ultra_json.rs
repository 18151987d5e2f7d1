#![no_main]
use libfuzzer_sys::fuzz_target;
use theta_semigroup::io::{parse_ultra_json, ultra_to_json};
use theta_semigroup::ultradist::check_membership;

fuzz_target!(|s: &str| {
    if let Ok(d) = parse_ultra_json(s) {
        let _ = parse_ultra_json(&ultra_to_json(&d)).expect("writer output parses");
        if let Some(class) = d.declared_class() {
            let _ = check_membership(d.coeffs(), class);
        }
    }
});
