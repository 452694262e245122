//! Built-in run configurations, usable wherever a config path is expected.

pub const NAMES: [&str; 3] = ["base-case", "warehouse-pos", "warehouse-neg"];

pub fn get(name: &str) -> Option<&'static str> {
    match name {
        "base-case" => Some(include_str!("../presets/base-case.json")),
        "warehouse-pos" => Some(include_str!("../presets/warehouse-pos.json")),
        "warehouse-neg" => Some(include_str!("../presets/warehouse-neg.json")),
        _ => None,
    }
}
