//! Frozen channel parameter sets shipped with the crate.
//!
//! Set `UWOC_FIXTURE_DIR` to a directory of `<name>.json` files to override or extend them.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::egg_channel::EggParams;
use crate::error::{Error, Result};

pub const FIXTURE_DIR_ENV: &str = "UWOC_FIXTURE_DIR";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fixture {
    pub name: String,
    pub omega: f64,
    pub lambda: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    #[serde(default)]
    pub metadata: serde_json::Map<String, serde_json::Value>,
}

impl Fixture {
    pub fn params(&self) -> EggParams {
        EggParams { omega: self.omega, lambda: self.lambda, a: self.a, b: self.b, c: self.c }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: Fixture =
            serde_json::from_str(text).map_err(|e| Error::InvalidParameter(format!("fixture JSON: {e}")))?;
        f.params().validate()?;
        Ok(f)
    }
}

const BUILTIN: [(&str, &str); 4] = [
    ("egg_a", include_str!("../fixtures/egg_a.json")),
    ("egg_b", include_str!("../fixtures/egg_b.json")),
    ("pure_exp", include_str!("../fixtures/pure_exp.json")),
    ("pure_gg", include_str!("../fixtures/pure_gg.json")),
];

fn normalize(name: &str) -> String {
    name.trim().to_ascii_lowercase().replace('-', "_")
}

/// Names of the built-in fixtures.
pub fn builtin_names() -> Vec<&'static str> {
    BUILTIN.iter().map(|(n, _)| *n).collect()
}

/// Loads a fixture by name (`egg-a`, `EGG_A`, ... are equivalent).
pub fn load(name: &str) -> Result<Fixture> {
    let key = normalize(name);
    if let Some(dir) = std::env::var_os(FIXTURE_DIR_ENV) {
        let path = PathBuf::from(dir).join(format!("{key}.json"));
        if path.is_file() {
            let text = std::fs::read_to_string(&path)
                .map_err(|e| Error::InvalidParameter(format!("reading {}: {e}", path.display())))?;
            return Fixture::from_json(&text);
        }
    }
    BUILTIN.iter().find(|(n, _)| *n == key).map(|(_, text)| Fixture::from_json(text)).unwrap_or_else(|| {
        Err(Error::InvalidParameter(format!("unknown fixture {name:?}; available: {}", builtin_names().join(", "))))
    })
}

/// Convenience: the parameters of a fixture.
pub fn params(name: &str) -> Result<EggParams> {
    load(name).map(|f| f.params())
}
