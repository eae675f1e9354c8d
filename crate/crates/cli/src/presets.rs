//! Bundled experiment configurations, compiled into the binary so the
//! reference datasets can be regenerated from any working directory.

/// Preset names with their embedded TOML text, in display order.
pub const PRESETS: [(&str, &str); 9] = [
    ("fig1", include_str!("../../../configs/fig1.toml")),
    ("fig2", include_str!("../../../configs/fig2.toml")),
    ("fig3", include_str!("../../../configs/fig3.toml")),
    ("fig4", include_str!("../../../configs/fig4.toml")),
    ("fig5", include_str!("../../../configs/fig5.toml")),
    ("fig6", include_str!("../../../configs/fig6.toml")),
    ("fig7", include_str!("../../../configs/fig7.toml")),
    ("fig8", include_str!("../../../configs/fig8.toml")),
    ("fig9", include_str!("../../../configs/fig9.toml")),
];

/// TOML text of the named preset, if it exists.
pub fn preset_text(name: &str) -> Option<&'static str> {
    PRESETS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| *text)
}

/// Comma-separated preset catalogue for error messages.
pub fn preset_catalogue() -> String {
    PRESETS
        .iter()
        .map(|(n, _)| *n)
        .collect::<Vec<_>>()
        .join(", ")
}
