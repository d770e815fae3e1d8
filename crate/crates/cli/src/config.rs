//! TOML run configurations for `solve1` and `solve2`.
//!
//! ```toml
//! R = 3.0
//! delta = 1e-6
//! N = 100                 # optional
//! data = "inverse_square" # or a table:
//! # [data]
//! # generator = "designer"
//! # alpha = 0.25
//! ```
//!
//! Keys are flat apart from the data table. `--set key=value` overrides a
//! key (`--set data.alpha=0.4` reaches into the table).

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::data::DataSpec;
use crate::error::{CliError, Result};
use crate::grid::GridSpec;
use crate::io::fmt_f64;

/// Data given inline as a spec string or as a table with a `generator` (or
/// `source`) name plus parameters. A table with only `file = "h.csv"` reads a
/// coefficient table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DataField {
    Spec(String),
    Table(BTreeMap<String, toml::Value>),
}

impl DataField {
    pub fn to_spec(&self, name_keys: &[&str]) -> Result<DataSpec> {
        match self {
            DataField::Spec(s) => s.parse(),
            DataField::Table(t) => {
                let name_key = name_keys
                    .iter()
                    .find(|k| t.contains_key(**k))
                    .ok_or_else(|| CliError::usage(format!("data table needs a `{}` key", name_keys[0])))?;
                let mut spec = match &t[*name_key] {
                    toml::Value::String(s) if *name_key == "file" => DataSpec::new("file").with("path", s),
                    toml::Value::String(s) => DataSpec::new(s),
                    other => return Err(CliError::usage(format!("`{name_key}` must be a string, got {other}"))),
                };
                for (k, v) in t.iter().filter(|(k, _)| k.as_str() != *name_key) {
                    let text = match v {
                        toml::Value::String(s) => s.clone(),
                        toml::Value::Integer(i) => i.to_string(),
                        toml::Value::Float(x) => fmt_f64(*x),
                        other => return Err(CliError::usage(format!("data.{k}: unsupported value {other}"))),
                    };
                    spec = spec.with(k, text);
                }
                Ok(spec)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Solve1Config {
    #[serde(rename = "R")]
    pub radius: f64,
    pub delta: f64,
    #[serde(rename = "N", default)]
    pub order: Option<usize>,
    pub data: DataField,
    /// `none`, `finite` or `geometric:ratio=..,power=..`.
    #[serde(default)]
    pub tail: Option<String>,
    #[serde(default)]
    pub grid_extent: Option<f64>,
    #[serde(default)]
    pub grid_resolution: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Solve2Config {
    pub delta: f64,
    #[serde(rename = "N", default)]
    pub order: Option<usize>,
    pub source: DataField,
    #[serde(default)]
    pub nodes: Option<usize>,
    #[serde(default)]
    pub grid_extent: Option<f64>,
    #[serde(default)]
    pub grid_resolution: Option<usize>,
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(CliError::invalid(format!("delta must lie in (0, 1), got {delta}")));
    }
    Ok(())
}

fn check_order(order: Option<usize>) -> Result<()> {
    if order == Some(0) {
        return Err(CliError::invalid("N must be at least 1"));
    }
    Ok(())
}

fn grid(extent: Option<f64>, resolution: Option<usize>, default_extent: f64) -> Result<Option<GridSpec>> {
    match (extent, resolution) {
        (_, None) => Ok(None),
        (e, Some(res)) => {
            let extent = e.unwrap_or(default_extent);
            if !(extent > 0.0 && extent.is_finite()) || res < 2 {
                return Err(CliError::invalid(format!(
                    "grid needs extent > 0 and resolution >= 2, got {extent} and {res}"
                )));
            }
            Ok(Some(GridSpec { extent, resolution: res }))
        }
    }
}

impl Solve1Config {
    pub fn validate(&self) -> Result<()> {
        if !(self.radius > 1.0 && self.radius.is_finite()) {
            return Err(CliError::invalid(format!("R must exceed 1, got {}", self.radius)));
        }
        check_delta(self.delta)?;
        check_order(self.order)?;
        self.grid()?;
        Ok(())
    }

    pub fn grid(&self) -> Result<Option<GridSpec>> {
        grid(self.grid_extent, self.grid_resolution, self.radius)
    }
}

impl Solve2Config {
    pub fn validate(&self) -> Result<()> {
        check_delta(self.delta)?;
        check_order(self.order)?;
        if self.nodes == Some(0) {
            return Err(CliError::invalid("nodes must be at least 1"));
        }
        self.grid()?;
        Ok(())
    }

    pub fn grid(&self) -> Result<Option<GridSpec>> {
        grid(self.grid_extent, self.grid_resolution, 4.0)
    }
}

/// Parses `text`, applies `overrides` and deserializes. Returns the typed
/// config and the effective table for the manifest.
pub fn parse<T: DeserializeOwned>(text: &str, origin: &str, overrides: &[String]) -> Result<(T, toml::Table)> {
    let mut table: toml::Table = text.parse().map_err(|e| CliError::usage(format!("{origin}: {e}")))?;
    if overrides.is_empty() {
        let typed = toml::from_str(text).map_err(|e| CliError::usage(format!("{origin}: {e}")))?;
        return Ok((typed, table));
    }
    for o in overrides {
        apply_override(&mut table, o)?;
    }
    let typed = T::deserialize(toml::Value::Table(table.clone()))
        .map_err(|e| CliError::usage(format!("{origin} (with overrides): {e}")))?;
    Ok((typed, table))
}

pub fn load<T: DeserializeOwned>(path: &Path, overrides: &[String]) -> Result<(T, toml::Table)> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(format!("reading {}", path.display()), e))?;
    parse(&text, &path.display().to_string(), overrides)
}

/// `key=value` with a TOML value; bare words are taken as strings.
pub fn apply_override(table: &mut toml::Table, item: &str) -> Result<()> {
    let (key, raw) = item
        .split_once('=')
        .ok_or_else(|| CliError::usage(format!("override {item:?} is not key=value")))?;
    let value = format!("v = {}", raw.trim())
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.trim().to_string()));
    let path: Vec<&str> = key.trim().split('.').collect();
    let (last, parents) = path.split_last().expect("split yields one item");
    let mut cur = table;
    for p in parents {
        let entry = cur.entry(p.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        if let toml::Value::String(s) = entry {
            // promote an inline spec string to a table so one field can change
            let spec: DataSpec = s.parse()?;
            let mut t = toml::Table::new();
            t.insert("generator".into(), toml::Value::String(spec.kind.clone()));
            for (k, v) in &spec.params {
                t.insert(k.clone(), toml::Value::String(v.clone()));
            }
            *entry = toml::Value::Table(t);
        }
        cur = match entry {
            toml::Value::Table(t) => t,
            _ => return Err(CliError::usage(format!("override {item:?}: {p} is not a table"))),
        };
    }
    cur.insert(last.to_string(), value);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config() {
        let (c, _): (Solve1Config, _) = parse("R = 3.0\ndelta = 1e-6\ndata = \"inverse_square\"\n", "t", &[]).unwrap();
        assert_eq!(c.radius, 3.0);
        assert_eq!(c.order, None);
        assert_eq!(c.data.to_spec(&["generator"]).unwrap(), DataSpec::new("inverse_square"));
        c.validate().unwrap();
    }

    #[test]
    fn table_data_and_overrides() {
        let text = "R = 3\ndelta = 0.001\n[data]\ngenerator = \"designer\"\nalpha = 0.25\n";
        let over = vec!["data.alpha=0.4".to_string(), "N=50".to_string()];
        let (c, table): (Solve1Config, _) = parse(text, "t", &over).unwrap();
        assert_eq!(c.order, Some(50));
        assert_eq!(c.data.to_spec(&["generator"]).unwrap().to_string(), "designer:alpha=0.4");
        assert!(table.contains_key("N"));

        let (c, _): (Solve1Config, _) =
            parse("R = 3\ndelta = 0.1\ndata = \"geometric:ratio=0.2\"\n", "t", &["data.ratio=0.3".into()]).unwrap();
        assert_eq!(c.data.to_spec(&["generator"]).unwrap().to_string(), "geometric:ratio=0.3");
    }

    #[test]
    fn syntax_errors_report_lines() {
        let err = parse::<Solve1Config>("R = 3\ndelta = \ndata = \"x\"\n", "cfg.toml", &[]).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("cfg.toml") && msg.contains("line 2"), "{msg}");
        assert_eq!(err.exit_code(), crate::error::exit::USAGE);

        let err = parse::<Solve1Config>("R = 3\ndelta = 0.1\ndata = \"x\"\nradius = 2\n", "c", &[]).unwrap_err();
        assert!(err.to_string().contains("line 4"), "{err}");
    }

    #[test]
    fn physical_validation() {
        for (r, d) in [(1.0, 0.1), (0.5, 0.1), (3.0, 0.0), (3.0, 1.0), (3.0, -1e-3)] {
            let text = format!("R = {r:?}\ndelta = {d:?}\ndata = \"inverse_square\"\n");
            let (c, _): (Solve1Config, _) = parse(&text, "t", &[]).unwrap();
            let err = c.validate().unwrap_err();
            assert_eq!(err.exit_code(), crate::error::exit::INVALID);
        }
    }
}
