//! Report rendering. JSON reports carry a frozen schema version and the full
//! resolved config; CSV flattens the main table of each command.

use serde::Serialize;
use serde_json::Value;

use crate::commands::{ErrorInfo, Outcome, Status};
use crate::config::{Command, Format, RunConfig};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Serialize)]
pub struct Report<'a> {
    pub schema_version: u32,
    pub tool: &'static str,
    pub tool_version: &'static str,
    pub config: &'a RunConfig,
    pub status: Status,
    pub exit_code: i32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub result: Option<&'a Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<&'a ErrorInfo>,
}

pub fn render(cfg: &RunConfig, outcome: &Outcome) -> Result<String, String> {
    let report = Report {
        schema_version: SCHEMA_VERSION,
        tool: "tubetop",
        tool_version: env!("CARGO_PKG_VERSION"),
        config: cfg,
        status: outcome.status,
        exit_code: outcome.exit_code,
        result: outcome.result.as_ref(),
        error: outcome.error.as_ref(),
    };
    match cfg.format {
        Format::Json => serde_json::to_string_pretty(&report).map(|s| s + "\n").map_err(|e| e.to_string()),
        Format::Csv => csv_table(cfg, outcome).map_err(|e| e.to_string()),
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn csv_table(cfg: &RunConfig, outcome: &Outcome) -> Result<String, Box<dyn std::error::Error>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    match (&outcome.error, &outcome.result) {
        (Some(e), _) => {
            w.write_record(["schema_version", "status", "kind", "message"])?;
            w.write_record([SCHEMA_VERSION.to_string(), "error".into(), e.kind.into(), e.message.clone()])?;
        }
        (None, Some(r)) => match cfg.command {
            Command::Winding => {
                w.write_record(["factor", "rank", "raw_winding", "k"])?;
                let wr = &r["winding"];
                let domain = cfg.domain.as_ref().map(|d| d.factors().to_vec()).unwrap_or_default();
                for (j, f) in domain.iter().enumerate() {
                    w.write_record([f.to_string(), cell(&wr["ranks"][j]), cell(&wr["raw_windings"][j]), cell(&wr["k"][j])])?;
                }
            }
            Command::Verify => {
                w.write_record(["suite", "check", "passed", "value", "bound", "limit", "detail"])?;
                for s in r["suites"].as_array().into_iter().flatten() {
                    for c in s["checks"].as_array().into_iter().flatten() {
                        w.write_record([
                            cell(&s["suite"]),
                            cell(&c["name"]),
                            cell(&c["passed"]),
                            cell(&c["value"]),
                            cell(&c["bound"]),
                            cell(&c["limit"]),
                            cell(&c["detail"]),
                        ])?;
                    }
                }
            }
            Command::Index => {
                let verdict = if r["mode"] == "u2_reduction" { &r["reduction"]["circle"] } else { &r["verdict"] };
                let (index, k, matched) = if r["mode"] == "u2_reduction" {
                    (&r["reduction"]["per_sector_index"], &r["reduction"]["k"], &r["reduction"]["match"])
                } else {
                    (&verdict["analytic_index"], &verdict["topological_index"], &verdict["match"])
                };
                w.write_record(["size", "dim_ker", "dim_coker", "sigma_min", "analytic_index", "k", "match"])?;
                for row in verdict["sweep"]["results"].as_array().into_iter().flatten() {
                    w.write_record([
                        cell(&row["size"]),
                        cell(&row["dim_ker"]),
                        cell(&row["dim_coker"]),
                        cell(&row["sigma_min"]),
                        cell(index),
                        cell(&k[0]),
                        cell(matched),
                    ])?;
                }
            }
        },
        (None, None) => {}
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}
