#![no_main]

use libfuzzer_sys::fuzz_target;
use xva_core::exposure::MarketData;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(market) = MarketData::from_json_str(text) else { return };
    if market.validate().is_err() {
        return;
    }
    for t in [0.0, 0.5, 1.0, 10.0, 50.0] {
        let _ = market.curve.discount(t);
        let _ = market.curve.forward(t);
    }
    // accepted data must survive a round trip
    let again = MarketData::from_json_str(&market.to_json_pretty()).expect("round trip");
    assert_eq!(again.curve.pillars(), market.curve.pillars());
});
