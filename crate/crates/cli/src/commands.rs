use serde::Serialize;
use serde_json::{json, Value};
use tubetop::hardy::{multiplication_matrix, TruncatedOperator, Truncation};
use tubetop::symbol::{MatrixSymbol, Symbol, SymbolSpec};
use tubetop::toeplitz::{
    block_index, circle_sections, compose_with_norm, finite_section_index, fredholm_proxy, u2_reduction_check,
    IndexVerdict,
};
use tubetop::verify::{self, VerifyConfig};
use tubetop::winding::{factorize_check, winding_vector};
use tubetop::{DomainFactor, Error, ProductDomain};

use crate::config::{Command, RunConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Error,
}

#[derive(Debug, Clone, Serialize)]
pub struct ErrorInfo {
    pub kind: &'static str,
    pub message: String,
}

/// Result of one command before rendering.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub status: Status,
    pub exit_code: i32,
    pub result: Option<Value>,
    pub error: Option<ErrorInfo>,
}

impl Outcome {
    fn done(passed: bool, result: Value) -> Self {
        let (status, exit_code) = if passed { (Status::Pass, EXIT_OK) } else { (Status::Fail, EXIT_FAIL) };
        Self { status, exit_code, result: Some(result), error: None }
    }

    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            status: Status::Error,
            exit_code: EXIT_USAGE,
            result: None,
            error: Some(ErrorInfo { kind: "usage", message: message.into() }),
        }
    }

    fn from_error(e: Error) -> Self {
        let (kind, exit_code) = if e.is_numerical() { ("numerical", EXIT_NUMERICAL) } else { ("usage", EXIT_USAGE) };
        Self { status: Status::Error, exit_code, result: None, error: Some(ErrorInfo { kind, message: e.to_string() }) }
    }
}

pub fn run(cfg: &RunConfig) -> Outcome {
    if let Err(msg) = cfg.validate() {
        return Outcome::usage(msg);
    }
    let res = match cfg.command {
        Command::Winding => cmd_winding(cfg),
        Command::Verify => cmd_verify(cfg),
        Command::Index => cmd_index(cfg),
    };
    res.unwrap_or_else(Outcome::from_error)
}

fn parse_spec(cfg: &RunConfig) -> Result<SymbolSpec, Error> {
    let v = cfg.symbol.clone().ok_or_else(|| Error::Spec("missing symbol".into()))?;
    Ok(serde_json::from_value(v)?)
}

fn to_value<T: Serialize>(v: &T) -> Result<Value, Error> {
    Ok(serde_json::to_value(v)?)
}

pub fn cmd_winding(cfg: &RunConfig) -> Result<Outcome, Error> {
    let domain = cfg.domain.clone().ok_or_else(|| Error::Spec("missing domain".into()))?;
    let sym = Symbol::from_spec(&domain, &parse_spec(cfg)?)?;
    let report = winding_vector(&sym, cfg.base_points, cfg.seed)?;
    let mut out = json!({ "winding": to_value(&report)? });
    let mut passed = true;
    if cfg.factorization_loops > 0 {
        let f = factorize_check(&sym, &report.k, cfg.factorization_loops, cfg.seed)?;
        passed = f.passed;
        out["factorization"] = to_value(&f)?;
    }
    Ok(Outcome::done(passed, out))
}

pub fn cmd_verify(cfg: &RunConfig) -> Result<Outcome, Error> {
    let suite = cfg.suite.ok_or_else(|| Error::Spec("missing suite".into()))?;
    let vc = VerifyConfig {
        seed: cfg.seed,
        tolerances: cfg.tolerances,
        d_max: cfg.d_max,
        l_max: cfg.l_max,
        sizes: cfg.sizes.clone(),
        count: cfg.count,
    };
    let reports = verify::run(suite, &vc)?;
    let passed = reports.iter().all(|r| r.passed);
    Ok(Outcome::done(passed, json!({ "suites": to_value(&reports)? })))
}

fn verdict_outcome(v: &IndexVerdict, extra: Value) -> Outcome {
    let mut out = extra;
    out["verdict"] = serde_json::to_value(v).expect("verdict serializes");
    if v.matches {
        return Outcome::done(true, out);
    }
    let mut o = Outcome::done(false, out);
    if v.winding_error.is_some() {
        // the symbol (numerically) vanishes: diagnostics are reported, no index
        o.exit_code = EXIT_NUMERICAL;
    }
    o
}

/// Writes `op` when `--dump` is set and records it in the result.
fn with_dump(cfg: &RunConfig, op: impl FnOnce() -> Result<TruncatedOperator, Error>, mut o: Outcome) -> Result<Outcome, Error> {
    let Some(path) = &cfg.dump else { return Ok(o) };
    let op = op()?;
    if let Err(e) = std::fs::write(path, op.dump(cfg.dump_encoding)?) {
        return Ok(Outcome::usage(format!("cannot write dump {path}: {e}")));
    }
    if let Some(r) = o.result.as_mut() {
        r["dump"] = json!({ "path": path, "encoding": to_value(&cfg.dump_encoding)?, "dim": op.dim() });
    }
    Ok(o)
}

pub fn cmd_index(cfg: &RunConfig) -> Result<Outcome, Error> {
    let domain = cfg.domain.clone().unwrap_or_else(ProductDomain::circle);
    let spec = parse_spec(cfg)?;
    match domain.factors() {
        [DomainFactor::TypeI(1)] if cfg.matrix => {
            let SymbolSpec::Matrix { entries } = spec else {
                return Err(Error::Spec("--matrix expects a {\"family\":\"matrix\"} symbol".into()));
            };
            let m = MatrixSymbol::from_spec(&domain, &entries)?;
            let v = block_index(&m, &cfg.sizes, cfg.seed)?;
            Ok(verdict_outcome(&v, json!({ "mode": "block", "block_size": m.size() })))
        }
        [DomainFactor::TypeI(1)] => {
            let f = Symbol::from_spec(&domain, &spec)?;
            let v = finite_section_index(&f, &cfg.sizes, cfg.seed)?;
            let mut extra = json!({ "mode": "circle" });
            if !v.matches {
                extra["fredholm"] = to_value(&fredholm_proxy(&f, &cfg.sizes)?)?;
            }
            let m = *cfg.sizes.last().expect("validated sizes");
            with_dump(cfg, || circle_sections(&f, m), verdict_outcome(&v, extra))
        }
        [DomainFactor::TypeI(2)] => {
            let SymbolSpec::NormLaurent { factor: 0, coeffs } = spec else {
                return Err(Error::Unsupported(
                    "on I2 the index is computed for symbols f(N) given as {\"family\":\"norm_laurent\"}".into(),
                ));
            };
            let f = Symbol::from_spec(&ProductDomain::circle(), &SymbolSpec::NormLaurent { factor: 0, coeffs })?;
            let t = Truncation::u2(0, cfg.l_max, cfg.d_max)?;
            let r = u2_reduction_check(&f, &t, &cfg.sizes, cfg.seed)?;
            let o = Outcome::done(r.matches, json!({ "mode": "u2_reduction", "reduction": to_value(&r)? }));
            with_dump(cfg, || multiplication_matrix(&compose_with_norm(&f)?, &t, true), o)
        }
        _ => Err(Error::Unsupported(format!("index is implemented for I1 and I2, not {domain}"))),
    }
}
