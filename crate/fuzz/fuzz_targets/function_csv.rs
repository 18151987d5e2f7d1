#![no_main]
use libfuzzer_sys::fuzz_target;
use theta_semigroup::io::{function_to_csv, parse_function_csv};

fuzz_target!(|s: &str| {
    if let Ok(f) = parse_function_csv(s) {
        // accepted input must survive a round trip
        let again = parse_function_csv(&function_to_csv(&f)).expect("writer output parses");
        assert_eq!(again.grid(), f.grid());
    }
});
