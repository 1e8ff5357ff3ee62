#![no_main]

use libfuzzer_sys::fuzz_target;
use rhtn_core::harness::{parse_policies, parse_probabilities, PROBABILITIES};

fuzz_target!(|text: &str| {
    if let Ok(ps) = parse_probabilities(text) {
        assert!(!ps.is_empty());
        assert!(ps.windows(2).all(|w| w[0] < w[1]));
        assert!(ps.iter().all(|p| PROBABILITIES.contains(p)));
    }
    if let Ok(policies) = parse_policies(text) {
        assert!(!policies.is_empty() && policies.len() <= 3);
    }
});
