#![no_main]

use libfuzzer_sys::fuzz_target;
use xva_cli::config;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(mut cfg) = config::parse(text) else { return };
    // no filesystem access from the fuzzer
    cfg.market_file = None;
    let diags = cfg.validate(None);
    if diags.is_empty() {
        let _ = cfg.price_of_risk_for(0.02);
        let _ = cfg.bps_notional();
    }
});
