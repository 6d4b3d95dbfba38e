//! Scenario presets shipped with the binary.

/// `(name, TOML text)` for every preset, figures first.
pub const PRESETS: &[(&str, &str)] = &[
    ("fig1", include_str!("../presets/fig1.toml")),
    ("fig2", include_str!("../presets/fig2.toml")),
    ("fig3", include_str!("../presets/fig3.toml")),
    ("fig4", include_str!("../presets/fig4.toml")),
    ("fig5", include_str!("../presets/fig5.toml")),
    ("fig6", include_str!("../presets/fig6.toml")),
    ("fig7", include_str!("../presets/fig7.toml")),
    ("acc1", include_str!("../presets/acc1.toml")),
    ("acc2", include_str!("../presets/acc2.toml")),
    ("acc3", include_str!("../presets/acc3.toml")),
    ("acc4", include_str!("../presets/acc4.toml")),
    ("acc5", include_str!("../presets/acc5.toml")),
    ("acc6", include_str!("../presets/acc6.toml")),
    ("acc7", include_str!("../presets/acc7.toml")),
    ("acc8", include_str!("../presets/acc8.toml")),
    ("acc9", include_str!("../presets/acc9.toml")),
    ("acc10", include_str!("../presets/acc10.toml")),
    ("acc11", include_str!("../presets/acc11.toml")),
    ("acc12", include_str!("../presets/acc12.toml")),
    ("acc13", include_str!("../presets/acc13.toml")),
];

pub fn find(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, text)| *text)
}

/// First `description` line of a preset, for listings.
pub fn description(text: &str) -> &str {
    text.lines()
        .find_map(|l| l.strip_prefix("description = \""))
        .and_then(|l| l.strip_suffix('"'))
        .unwrap_or("")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::load;

    #[test]
    fn every_preset_validates() {
        for (name, text) in PRESETS {
            let plan = load(text).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert_eq!(plan.name, *name);
            assert!(!description(text).is_empty(), "{name} lacks a description");
        }
    }
}
