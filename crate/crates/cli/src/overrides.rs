//! Configuration loading with dotted-key command-line overrides.
//!
//! The file or preset text is first parsed into a generic TOML document (JSON
//! files are transcoded into the same representation), the `--set` overrides
//! are spliced in, and only then is the document deserialized and validated,
//! so overrides participate in the usual unknown-key and invariant checks.

use sgdlab_harness::{ExperimentConfig, HarnessError};
use toml::Value;

use crate::args::ConfigArgs;
use crate::presets::{preset_catalogue, preset_text};

/// Loads the configuration selected by `--config`/`--preset`, applies `--set`
/// and `--seed` overrides, and validates the result.
pub fn load_config(args: &ConfigArgs) -> Result<ExperimentConfig, HarnessError> {
    let (text, is_json) = match (&args.config, &args.preset) {
        (Some(path), None) => {
            let text =
                std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
            let is_json = path
                .extension()
                .is_some_and(|ext| ext.eq_ignore_ascii_case("json"));
            (text, is_json)
        }
        (None, Some(name)) => match preset_text(name) {
            Some(text) => (text.to_string(), false),
            None => {
                return Err(HarnessError::Config(format!(
                    "unknown preset `{name}`; available presets: {}",
                    preset_catalogue()
                )))
            }
        },
        (None, None) => {
            return Err(HarnessError::Config(
                "either --config or --preset is required".into(),
            ))
        }
        // clap's conflicts_with rules this out.
        (Some(_), Some(_)) => unreachable!("--config conflicts with --preset"),
    };

    let mut doc: Value = if is_json {
        serde_json::from_str(&text)?
    } else {
        toml::from_str(&text)?
    };
    for entry in &args.set {
        apply_set(&mut doc, entry)?;
    }
    if let Some(seed) = args.seed {
        apply_set(&mut doc, &format!("master_seed={seed}"))?;
    }

    let cfg: ExperimentConfig = doc.try_into()?;
    cfg.validate()?;
    Ok(cfg)
}

/// Splices one `key=value` override into the document, creating intermediate
/// tables along the dotted path as needed.
fn apply_set(doc: &mut Value, entry: &str) -> Result<(), HarnessError> {
    let (key, raw) = entry.split_once('=').ok_or_else(|| {
        HarnessError::Config(format!("override `{entry}` is not of the form key=value"))
    })?;
    let key = key.trim();
    let parts: Vec<&str> = key.split('.').collect();
    if key.is_empty() || parts.iter().any(|p| p.is_empty()) {
        return Err(HarnessError::Config(format!(
            "override `{entry}` has an empty key segment"
        )));
    }

    let mut node = doc;
    for (depth, part) in parts.iter().enumerate() {
        let table = node.as_table_mut().ok_or_else(|| {
            HarnessError::Config(format!(
                "override key `{key}`: `{}` is not a table",
                parts[..depth].join(".")
            ))
        })?;
        if depth + 1 == parts.len() {
            table.insert((*part).to_string(), parse_value(raw));
            return Ok(());
        }
        node = table
            .entry((*part).to_string())
            .or_insert_with(|| Value::Table(toml::map::Map::new()));
    }
    unreachable!("the loop inserts at the final path segment")
}

/// Parses an override value with TOML literal syntax (numbers, booleans,
/// quoted strings, arrays, `inf`); anything unparseable is taken verbatim as
/// a string, so `--set init.kind=warm` needs no quoting.
fn parse_value(raw: &str) -> Value {
    let wrapped = format!("v = {raw}");
    match toml::from_str::<toml::Table>(&wrapped) {
        Ok(mut table) => table
            .remove("v")
            .unwrap_or_else(|| Value::String(raw.trim().to_string())),
        Err(_) => Value::String(raw.trim().to_string()),
    }
}
