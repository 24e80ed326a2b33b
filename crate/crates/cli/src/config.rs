//! Resolved run configuration, embedded verbatim in every report.

use std::path::Path;

use serde::{Deserialize, Serialize};
use tubetop::hardy::DumpEncoding;
use tubetop::toeplitz::{DEFAULT_BLOCK_SIZES, DEFAULT_SIZES};
use tubetop::verify::Suite;
use tubetop::{ProductDomain, Tolerances};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Winding,
    Verify,
    Index,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Gk,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub suite: Option<Suite>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<ProductDomain>,
    /// Parsed symbol spec (file contents when a path was given).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub symbol: Option<serde_json::Value>,
    #[serde(default)]
    pub matrix: bool,
    pub seed: u64,
    pub tolerances: Tolerances,
    pub d_max: usize,
    pub l_max: i64,
    pub sizes: Vec<usize>,
    pub base_points: usize,
    /// Random composite loops of the factorization check; 0 disables it.
    pub factorization_loops: usize,
    pub family: Family,
    pub count: usize,
    pub format: Format,
    /// `index` only: write the truncated operator here.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dump: Option<String>,
    #[serde(default = "default_dump_encoding")]
    pub dump_encoding: DumpEncoding,
}

fn default_dump_encoding() -> DumpEncoding {
    DumpEncoding::Base64
}

impl RunConfig {
    pub fn defaults(command: Command) -> Self {
        Self {
            command,
            suite: None,
            domain: None,
            symbol: None,
            matrix: false,
            seed: 0,
            tolerances: Tolerances::default(),
            d_max: 2,
            l_max: 3,
            sizes: DEFAULT_SIZES.to_vec(),
            base_points: 8,
            factorization_loops: 0,
            family: Family::Gk,
            count: 30,
            format: Format::Json,
            dump: None,
            dump_encoding: default_dump_encoding(),
        }
    }

    pub fn default_block_sizes() -> Vec<usize> {
        DEFAULT_BLOCK_SIZES.to_vec()
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.sizes.is_empty() || self.sizes[0] == 0 || self.sizes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(format!("--sizes must be positive and strictly increasing, got {:?}", self.sizes));
        }
        if self.l_max < 0 {
            return Err("--lmax must be non-negative".into());
        }
        if self.base_points == 0 {
            return Err("--base-points must be positive".into());
        }
        Tolerances::new(self.tolerances.eq_tol, self.tolerances.psd_tol).map_err(|e| e.to_string())?;
        match self.command {
            Command::Winding => {
                if self.domain.is_none() {
                    return Err("winding needs --domain".into());
                }
                if self.symbol.is_none() {
                    return Err("winding needs --symbol".into());
                }
            }
            Command::Index => {
                if self.symbol.is_none() {
                    return Err("index needs --symbol".into());
                }
                if self.dump.is_some() && self.matrix {
                    return Err("--dump is available for scalar symbols only".into());
                }
            }
            Command::Verify => {
                if self.suite.is_none() {
                    return Err("verify needs a suite".into());
                }
            }
        }
        Ok(())
    }
}

/// Inline JSON, or the path of a JSON file.
pub fn load_symbol(arg: &str) -> Result<serde_json::Value, String> {
    let trimmed = arg.trim_start();
    let text = if trimmed.starts_with('{') || trimmed.starts_with('[') {
        arg.to_string()
    } else {
        std::fs::read_to_string(Path::new(arg)).map_err(|e| format!("cannot read symbol file {arg}: {e}"))?
    };
    serde_json::from_str(&text).map_err(|e| format!("symbol is not valid JSON: {e}"))
}

/// A bare config, or a report carrying one under `"config"`.
pub fn load_config(path: &Path) -> Result<RunConfig, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let mut v: serde_json::Value = serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    if let Some(inner) = v.get_mut("config") {
        v = inner.take();
    }
    serde_json::from_value(v).map_err(|e| format!("invalid config: {e}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_round_trip_and_unknown_fields() {
        let mut c = RunConfig::defaults(Command::Winding);
        c.domain = Some("I2xIV3".parse().unwrap());
        c.symbol = Some(serde_json::json!({"family": "norm_pow", "k": [2, -1]}));
        let s = serde_json::to_string(&c).unwrap();
        let back: RunConfig = serde_json::from_str(&s).unwrap();
        assert_eq!(back, c);
        let mut v: serde_json::Value = serde_json::from_str(&s).unwrap();
        v["bogus"] = serde_json::json!(1);
        assert!(serde_json::from_value::<RunConfig>(v).is_err());
    }

    #[test]
    fn validation() {
        let mut c = RunConfig::defaults(Command::Winding);
        assert!(c.validate().is_err());
        c.domain = Some("I1".parse().unwrap());
        c.symbol = Some(serde_json::json!({}));
        assert!(c.validate().is_ok());
        c.sizes = vec![32, 16];
        assert!(c.validate().is_err());
    }

    #[test]
    fn inline_symbol() {
        let v = load_symbol(r#"{"family":"constant","value":[1,0]}"#).unwrap();
        assert_eq!(v["family"], "constant");
        assert!(load_symbol("/nonexistent/symbol.json").is_err());
        assert!(load_symbol("{not json").is_err());
    }
}
