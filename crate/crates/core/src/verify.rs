//! Invariant suites behind `tubetop verify`.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::domain::{DomainFactor, ProductDomain};
use crate::element::Element;
use crate::error::{Error, Result};
use crate::hardy::{self, extract_ab, gram_matrix, multiplication_matrix, split_consistency, HardyModel, Truncation};
use crate::jordan::{generic_norm, is_maximal_tripotent, triple_product, Tolerances};
use crate::linalg::{ginibre, max_abs_diff, CMatrix};
use crate::pfaffian::{pfaffian, symplectic_j};
use crate::shilov::{random_element, rng_from_seed, sample_boundary};
use crate::symbol::{LaurentTerm, Symbol, SymbolSpec};
use crate::toeplitz::{
    block_index, finite_section_index, fredholm_proxy, gk_family, random_block_symbol, u2_reduction_check,
    DEFAULT_BLOCK_SIZES,
};
use crate::winding::{winding_vector, WindingVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Jordan,
    Shilov,
    Hardy,
    Index,
    All,
}

impl std::str::FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "jordan" => Ok(Suite::Jordan),
            "shilov" => Ok(Suite::Shilov),
            "hardy" => Ok(Suite::Hardy),
            "index" => Ok(Suite::Index),
            "all" => Ok(Suite::All),
            other => Err(Error::Spec(format!("unknown suite {other:?}"))),
        }
    }
}

/// Factor types exercised by the algebraic suites.
pub const SUITE_FACTORS: [DomainFactor; 12] = [
    DomainFactor::TypeI(1),
    DomainFactor::TypeI(2),
    DomainFactor::TypeI(3),
    DomainFactor::TypeI(4),
    DomainFactor::TypeII(2),
    DomainFactor::TypeII(4),
    DomainFactor::TypeIII(2),
    DomainFactor::TypeIII(3),
    DomainFactor::TypeIII(4),
    DomainFactor::TypeIV(3),
    DomainFactor::TypeIV(4),
    DomainFactor::TypeIV(5),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    pub seed: u64,
    pub tolerances: Tolerances,
    pub d_max: usize,
    pub l_max: i64,
    pub sizes: Vec<usize>,
    /// Number of seeded symbols in the index suite.
    pub count: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            tolerances: Tolerances::default(),
            d_max: 2,
            l_max: 3,
            sizes: crate::toeplitz::DEFAULT_SIZES.to_vec(),
            count: 30,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Bound {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">=")]
    AtLeast,
}

/// One invariant: `value` compared with `limit`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub bound: Bound,
    pub limit: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl Check {
    pub fn at_most(name: &str, value: f64, limit: f64) -> Self {
        Self { name: name.into(), passed: value <= limit, value, bound: Bound::AtMost, limit, detail: None }
    }

    pub fn at_least(name: &str, value: f64, limit: f64) -> Self {
        Self { name: name.into(), passed: value >= limit, value, bound: Bound::AtLeast, limit, detail: None }
    }

    pub fn detail(mut self, d: impl Into<String>) -> Self {
        self.detail = Some(d.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    fn new(suite: Suite, checks: Vec<Check>) -> Self {
        Self { suite, passed: checks.iter().all(|c| c.passed), checks }
    }
}

/// Runs one suite, or all of them in a fixed order.
pub fn run(suite: Suite, cfg: &VerifyConfig) -> Result<Vec<SuiteReport>> {
    Ok(match suite {
        Suite::Jordan => vec![jordan_suite(cfg)?],
        Suite::Shilov => vec![shilov_suite(cfg)?],
        Suite::Hardy => vec![hardy_suite(cfg)?],
        Suite::Index => vec![index_suite(cfg)?],
        Suite::All => vec![jordan_suite(cfg)?, shilov_suite(cfg)?, hardy_suite(cfg)?, index_suite(cfg)?],
    })
}

/// `{x y {a b c}} - ({{x y a} b c} - {a {y x b} c} + {a b {x y c}})`.
pub fn jordan_identity_residual(x: &Element, y: &Element, a: &Element, b: &Element, c: &Element) -> Result<f64> {
    let lhs = triple_product(x, y, &triple_product(a, b, c)?)?;
    let t1 = triple_product(&triple_product(x, y, a)?, b, c)?;
    let t2 = triple_product(a, &triple_product(y, x, b)?, c)?;
    let t3 = triple_product(a, b, &triple_product(x, y, c)?)?;
    Ok(lhs.sub(&t1)?.add(&t2)?.sub(&t3)?.norm())
}

fn random_antisymmetric<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let g = ginibre(n, rng);
    (&g - g.transpose()).scale(0.5)
}

fn jordan_suite(cfg: &VerifyConfig) -> Result<SuiteReport> {
    let mut rng = rng_from_seed(cfg.seed);
    let (mut identity, mut homog) = (0.0f64, 0.0f64);
    for &f in &SUITE_FACTORS {
        for _ in 0..100 {
            let e: Vec<Element> = (0..5).map(|_| random_element(f, &mut rng)).collect();
            identity = identity.max(jordan_identity_residual(&e[0], &e[1], &e[2], &e[3], &e[4])?);
            let lam = Complex64::from_polar(rng.gen_range(0.5..2.0), rng.gen_range(0.0..std::f64::consts::TAU));
            let want = lam.powi(f.rank() as i32) * generic_norm(&e[0]);
            let got = generic_norm(&e[0].scale(lam));
            homog = homog.max((got - want).norm() / want.norm().max(1.0));
        }
    }
    let mut pf = 0.0f64;
    for n in (2..=8).step_by(2) {
        for _ in 0..20 {
            let a = random_antisymmetric(n, &mut rng);
            let p = pfaffian(&a)?;
            let det = a.determinant();
            pf = pf.max((p * p - det).norm() / det.norm().max(1.0));
        }
    }
    let pf_j = (1..=4)
        .map(|n| pfaffian(&symplectic_j(n)).map(|p| (p - 1.0).norm()))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    Ok(SuiteReport::new(
        Suite::Jordan,
        vec![
            Check::at_most("jordan_identity", identity, 1e-10).detail("100 random unit-norm 5-tuples per factor type"),
            Check::at_most("norm_homogeneity", homog, 1e-10),
            Check::at_most("pfaffian_squared_is_det", pf, 1e-10),
            Check::at_most("pfaffian_of_j", pf_j, 0.0),
        ],
    ))
}

fn shilov_suite(cfg: &VerifyConfig) -> Result<SuiteReport> {
    let mut rng = rng_from_seed(cfg.seed);
    let (mut dev, mut not_maximal) = (0.0f64, 0usize);
    for &f in &SUITE_FACTORS {
        for _ in 0..1000 {
            let e = sample_boundary(f, &mut rng)?;
            dev = dev.max((generic_norm(&e).norm() - 1.0).abs());
            if !is_maximal_tripotent(&e, &cfg.tolerances) {
                not_maximal += 1;
            }
        }
    }
    let mut mismatches = Vec::new();
    for &f in &SUITE_FACTORS {
        let dom = ProductDomain::single(f)?;
        for m in -3..=3 {
            let sym = Symbol::norm_power(&dom, &[m])?;
            match winding_vector(&sym, 8, cfg.seed) {
                Ok(r) if r.k == WindingVector(vec![m]) => {}
                Ok(r) => mismatches.push(format!("{f} m={m}: k={:?}", r.k.0)),
                Err(e) => mismatches.push(format!("{f} m={m}: {e}")),
            }
        }
    }
    let winding = Check::at_most("winding_normalization", mismatches.len() as f64, 0.0);
    let winding = if mismatches.is_empty() { winding } else { winding.detail(mismatches.join("; ")) };
    Ok(SuiteReport::new(
        Suite::Shilov,
        vec![
            Check::at_most("boundary_norm_modulus", dev, 1e-9).detail("1000 samples per factor type"),
            Check::at_most("samples_not_maximal", not_maximal as f64, 0.0),
            winding,
        ],
    ))
}

fn unit_matrix(i: usize, j: usize) -> Result<Element> {
    Element::from_fn(DomainFactor::TypeI(2), |a, b| Complex64::new(((a, b) == (i, j)) as u8 as f64, 0.0))
}

fn hardy_suite(cfg: &VerifyConfig) -> Result<SuiteReport> {
    let t = Truncation::u2(-cfg.l_max, cfg.l_max, cfg.d_max)?;
    let dom = HardyModel::U2.domain();
    let n = t.len();
    let gram = max_abs_diff(&gram_matrix(&t)?, &CMatrix::identity(n, n));

    let norm = Symbol::norm_power(&dom, &[1])?;
    let op = multiplication_matrix(&norm, &t, false)?;
    let shift = CMatrix::from_fn(n, n, |a, b| {
        let (ia, ib) = (op.indices[a], op.indices[b]);
        let hit = ia.l == ib.l + 1 && (ia.d, ia.j, ia.k) == (ib.d, ib.j, ib.k);
        Complex64::new(hit as u8 as f64, 0.0)
    });
    let shift_res = max_abs_diff(&op.matrix, &shift);
    let conj_res = max_abs_diff(&multiplication_matrix(&norm.conj(), &t, false)?.matrix, &op.matrix.adjoint());

    let one = Symbol::constant(&dom, Complex64::new(1.0, 0.0));
    let compressed = multiplication_matrix(&one, &t, true)?;
    let hardy_dim = t.indices().iter().filter(|b| b.l >= 0).count();
    let proj = if compressed.dim() == hardy_dim {
        max_abs_diff(&compressed.matrix, &CMatrix::identity(hardy_dim, hardy_dim))
    } else {
        f64::INFINITY
    };

    let mut rng = rng_from_seed(cfg.seed);
    let mut us = vec![unit_matrix(0, 0)?, unit_matrix(0, 1)?, unit_matrix(1, 0)?, unit_matrix(1, 1)?];
    for _ in 0..5 {
        us.push(Element::new(DomainFactor::TypeI(2), ginibre(2, &mut rng))?);
    }
    let split_t = Truncation::u2(-2, 2, cfg.d_max.max(1))?;
    let (mut leak, mut consistency) = (0.0f64, 0.0f64);
    for u in &us {
        match extract_ab(u, &split_t) {
            Ok(s) => leak = leak.max(s.leak),
            Err(Error::Leak { leak: l }) => leak = leak.max(l),
            Err(e) => return Err(e),
        }
        consistency = consistency.max(split_consistency(u, &split_t).unwrap_or(f64::INFINITY));
    }
    Ok(SuiteReport::new(
        Suite::Hardy,
        vec![
            Check::at_most("gram_identity", gram, 1e-8).detail(format!("{n} basis functions, |l| <= {}, d <= {}", cfg.l_max, cfg.d_max)),
            Check::at_most("norm_level_shift", shift_res, 1e-8),
            Check::at_most("conj_norm_is_adjoint", conj_res, 1e-8),
            Check::at_most("hardy_projection", proj, 1e-8),
            Check::at_most("ab_leak", leak, hardy::LEAK_TOL).detail("E11, E12, E21, E22 and 5 random u"),
            Check::at_most("ab_shift_consistency", consistency, 1e-8),
        ],
    ))
}

fn laurent(terms: &[(i64, f64, f64)]) -> Result<Symbol> {
    let coeffs = terms.iter().map(|&(p, re, im)| LaurentTerm(p, re, im)).collect();
    Symbol::from_spec(&ProductDomain::circle(), &SymbolSpec::NormLaurent { factor: 0, coeffs })
}

fn index_suite(cfg: &VerifyConfig) -> Result<SuiteReport> {
    let circle = ProductDomain::circle();
    let cases = gk_family(cfg.count, 4, cfg.seed);
    let mut gk_bad = Vec::new();
    for (i, case) in cases.iter().enumerate() {
        let f = Symbol::from_spec(&circle, &case.spec)?;
        let v = finite_section_index(&f, &cfg.sizes, cfg.seed)?;
        if !v.matches || v.analytic_index.value() != Some(-case.k) {
            gk_bad.push(format!("#{i} k={}", case.k));
        }
    }
    let gk = Check::at_most("gk_family_mismatches", gk_bad.len() as f64, 0.0)
        .detail(format!("{}/{} match{}", cases.len() - gk_bad.len(), cases.len(), fmt_list(&gk_bad)));

    let mut block_bad = Vec::new();
    for i in 0..4u64 {
        let size = 2 + (i as usize % 2);
        let (m, k) = random_block_symbol(size, 2, cfg.seed.wrapping_add(i))?;
        let v = block_index(&m, &DEFAULT_BLOCK_SIZES, cfg.seed)?;
        if !v.matches || v.analytic_index.value() != Some(-k) {
            block_bad.push(format!("#{i} size={size} k={k}"));
        }
    }
    let blocks = Check::at_most("block_mismatches", block_bad.len() as f64, 0.0).detail(format!("4 block symbols{}", fmt_list(&block_bad)));

    let t = Truncation::u2(0, cfg.l_max.max(1), cfg.d_max)?;
    let f = laurent(&[(2, 1.0, 0.0), (0, 0.1, 0.0)])?;
    let red = u2_reduction_check(&f, &t, &[16, 32, 64], cfg.seed);
    let (res, red_ok) = match &red {
        Ok(r) => (r.max_residual, r.matches),
        Err(Error::SectorMismatch { residual, .. }) => (*residual, false),
        Err(_) => (f64::INFINITY, false),
    };
    let mut sector = Check::at_most("u2_sector_residual", res, 1e-8);
    if !red_ok {
        sector.passed = false;
        sector = sector.detail("per-sector index does not match -k");
    }

    let good = fredholm_proxy(&laurent(&[(1, 1.0, 0.0), (0, -2.0, 0.0)])?, &cfg.sizes)?;
    let bad = fredholm_proxy(&laurent(&[(1, 1.0, 0.0), (0, -1.0, 0.0)])?, &cfg.sizes)?;
    let mut zero = Check::at_most("vanishing_symbol_sigma_last", *bad.sigma_min.last().unwrap_or(&0.0), bad.sigma_min[0] * 0.5);
    if !bad.decaying || bad.analytic_index.value().is_some() {
        zero.passed = false;
    }
    Ok(SuiteReport::new(
        Suite::Index,
        vec![gk, blocks, sector, Check::at_least("invertible_symbol_sigma_min", good.lower_bound, 0.9), zero],
    ))
}

fn fmt_list(v: &[String]) -> String {
    if v.is_empty() {
        String::new()
    } else {
        format!("; failing: {}", v.join(", "))
    }
}
