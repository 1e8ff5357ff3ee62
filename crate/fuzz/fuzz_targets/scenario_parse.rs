#![no_main]

use libfuzzer_sys::fuzz_target;
use rhtn_core::gridworld::Scenario;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(scenario) = Scenario::parse(text) else {
        return;
    };
    // Accepted scenarios name only real destinations and survive a round trip.
    let map = scenario.map();
    assert!(scenario.goals.iter().all(|g| map.destination(&g.destination).is_some()));
    let again = Scenario::parse(&scenario.to_toml().unwrap()).unwrap();
    assert_eq!(again, scenario);
});
