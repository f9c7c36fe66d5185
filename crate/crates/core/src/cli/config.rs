//! Run configuration files.
//!
//! ```json
//! {
//!   "schemaVersion": 1,
//!   "field": {"p": 2, "c": 1, "modulusPoly": [1, 1, 1]},
//!   "grid": {"M": 2, "N": 2},
//!   "lattice": {"s": 0, "t": 0},
//!   "window": {"domain": "time", "terms": [{"k": 0, "h": "0", "re": 1.0, "im": 0.0}]},
//!   "seed": 7,
//!   "count": 200,
//!   "sizes": [256, 1024, 4096]
//! }
//! ```
//!
//! `window` may also be a path, resolved against the config file's directory.
//! Every key is optional; commands ask for what they need.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::field::{Field, FieldParams};
use crate::gabor::{IndexRanges, LatticeParams, WindowSpec};
use crate::json;
use crate::transform::GridSpec;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawField {
    p: u32,
    #[serde(default = "one")]
    c: u32,
    #[serde(rename = "modulusPoly")]
    modulus: Option<Vec<u32>>,
}

fn one() -> u32 {
    1
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    #[serde(rename = "M")]
    m: u32,
    #[serde(rename = "N")]
    n: u32,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(rename = "schemaVersion", default = "schema")]
    schema_version: u32,
    field: Option<RawField>,
    grid: Option<RawGrid>,
    lattice: Option<LatticeParams>,
    window: Option<serde_json::Value>,
    seed: Option<u64>,
    count: Option<usize>,
    sizes: Option<Vec<usize>>,
}

fn schema() -> u32 {
    json::SCHEMA_VERSION
}

#[derive(Debug, Clone, Default)]
pub struct RunConfig {
    pub field: Option<Field>,
    pub grid: Option<GridSpec>,
    pub lattice: Option<LatticeParams>,
    pub window: Option<WindowSpec>,
    pub seed: Option<u64>,
    pub count: Option<usize>,
    pub sizes: Option<Vec<usize>>,
}

fn named(key: &str, e: Error) -> Error {
    Error::Config(format!("{key}: {e}"))
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text, path.parent())
    }

    /// Parse config text; relative window paths resolve against `base`.
    pub fn parse(text: &str, base: Option<&Path>) -> Result<Self> {
        let raw: RawConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("config: {e}")))?;
        if raw.schema_version != json::SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "schemaVersion: unsupported value {}",
                raw.schema_version
            )));
        }
        let field = raw
            .field
            .map(|f| match f.modulus {
                Some(m) => FieldParams::with_modulus(f.p, f.c, m),
                None => FieldParams::new(f.p, f.c),
            })
            .transpose()
            .map_err(|e| named("field", e))?;
        let grid = match (raw.grid, &field) {
            (Some(g), Some(f)) => Some(GridSpec::new(f, g.m, g.n).map_err(|e| named("grid", e))?),
            (Some(_), None) => return Err(Error::Config("grid: requires field".into())),
            (None, _) => None,
        };
        if let (Some(lat), Some(g)) = (raw.lattice, &grid) {
            IndexRanges::compute(g, lat).map_err(|e| named("lattice", e))?;
        }
        let window = match raw.window {
            None => None,
            Some(value) => {
                let f = field
                    .as_ref()
                    .ok_or_else(|| Error::Config("window: requires field".into()))?;
                let value = match value {
                    serde_json::Value::String(p) => read_window_file(&resolve(base, &p))?,
                    other => other,
                };
                Some(WindowSpec::from_json_value(&value, f)?)
            }
        };
        if let Some(sizes) = &raw.sizes {
            if sizes.is_empty() {
                return Err(Error::Config("sizes: must not be empty".into()));
            }
        }
        Ok(RunConfig {
            field,
            grid,
            lattice: raw.lattice,
            window,
            seed: raw.seed,
            count: raw.count,
            sizes: raw.sizes,
        })
    }

    pub fn require_grid(&self, command: &str) -> Result<&GridSpec> {
        self.grid
            .as_ref()
            .ok_or_else(|| Error::Config(format!("grid: required by {command}")))
    }

    pub fn require_lattice(&self, command: &str) -> Result<LatticeParams> {
        self.lattice
            .ok_or_else(|| Error::Config(format!("lattice: required by {command}")))
    }

    pub fn require_window(&self, command: &str) -> Result<&WindowSpec> {
        self.window
            .as_ref()
            .ok_or_else(|| Error::Config(format!("window: required by {command}")))
    }
}

fn resolve(base: Option<&Path>, path: &str) -> PathBuf {
    let p = PathBuf::from(path);
    match base {
        Some(b) if p.is_relative() => b.join(p),
        _ => p,
    }
}

fn read_window_file(path: &Path) -> Result<serde_json::Value> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("window: cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("window: {e}")))
}
