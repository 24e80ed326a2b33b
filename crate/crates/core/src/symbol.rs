//! Symbols: non-vanishing continuous functions on a product Shilov boundary.
//!
//! A [`Symbol`] pairs a pure evaluator with a [`SymbolMeta`] record of how it
//! was built. Symbols usually come from a JSON [`SymbolSpec`]:
//!
//! ```json
//! {"family": "product", "factors": [
//!     {"family": "norm_pow", "k": [2, -1]},
//!     {"family": "exp_poly", "degree": 2, "terms": 6, "amplitude": 0.2, "seed": 7}
//! ]}
//! ```

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::domain::ProductDomain;
use crate::element::{standard_basis, Element};
use crate::error::{Error, Result};
use crate::jordan::{generic_norm, trace_inner_product};
use crate::shilov::{rng_from_seed, BoundaryPoint};

pub type Evaluator = Arc<dyn Fn(&BoundaryPoint) -> Complex64 + Send + Sync>;

/// One term `coeff * λ^power` of a Laurent polynomial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaurentTerm(pub i64, pub f64, pub f64);

impl LaurentTerm {
    pub fn power(&self) -> i64 {
        self.0
    }
    pub fn coeff(&self) -> Complex64 {
        Complex64::new(self.1, self.2)
    }
}

/// Evaluates `sum c_m λ^m`.
pub fn eval_laurent(terms: &[LaurentTerm], lambda: Complex64) -> Complex64 {
    terms.iter().map(|t| t.coeff() * lambda.powi(t.power() as i32)).sum()
}

/// JSON description of a scalar symbol.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum SymbolSpec {
    /// Constant `re + i im`.
    Constant { value: [f64; 2] },
    /// `prod_j (e^{i phase_j} N_j)^{k_j}`; the optional phases replace each
    /// generic norm by another admissible normalization.
    NormPow {
        k: Vec<i64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        phases: Option<Vec<f64>>,
    },
    /// `exp(p)` with `p` a seeded random polynomial in the stored entries and
    /// their conjugates: `terms` monomials of degree `1..=degree`, coefficient
    /// moduli uniform in `[0, amplitude]`.
    ExpPoly { degree: usize, terms: usize, amplitude: f64, seed: u64 },
    /// `ℓ_u(z_factor) + c` with `ℓ_u(z) = <z, u>` the trace inner product.
    Linear { factor: usize, u: Element, c: [f64; 2] },
    /// `f(N_factor(z_factor))` for a Laurent polynomial `f` given as
    /// `[power, re, im]` triples.
    NormLaurent {
        #[serde(default)]
        factor: usize,
        coeffs: Vec<LaurentTerm>,
    },
    Exp { of: Box<SymbolSpec> },
    Conj { of: Box<SymbolSpec> },
    Sum { terms: Vec<SymbolSpec> },
    Product { factors: Vec<SymbolSpec> },
    Power { base: Box<SymbolSpec>, exponent: i64 },
    /// Determinant of a square matrix of scalar specs (row-major rows).
    Matrix { entries: Vec<Vec<SymbolSpec>> },
}

impl SymbolSpec {
    /// Total polynomial degree in the entries and their conjugates, when the
    /// symbol is a polynomial on the boundary (negative powers of generic
    /// norms count as conjugate polynomials).
    pub fn degree(&self, domain: &ProductDomain) -> Option<usize> {
        let ranks = domain.ranks();
        match self {
            SymbolSpec::Constant { .. } => Some(0),
            SymbolSpec::NormPow { k, .. } => {
                Some(k.iter().zip(&ranks).map(|(k, r)| k.unsigned_abs() as usize * r).sum())
            }
            SymbolSpec::ExpPoly { .. } | SymbolSpec::Exp { .. } => None,
            SymbolSpec::Linear { .. } => Some(1),
            SymbolSpec::NormLaurent { factor, coeffs } => {
                let r = *ranks.get(*factor)?;
                Some(coeffs.iter().map(|t| t.power().unsigned_abs() as usize * r).max().unwrap_or(0))
            }
            SymbolSpec::Conj { of } => of.degree(domain),
            SymbolSpec::Sum { terms } => terms.iter().map(|t| t.degree(domain)).try_fold(0, |a, d| Some(a.max(d?))),
            SymbolSpec::Product { factors } => factors.iter().map(|t| t.degree(domain)).try_fold(0, |a, d| Some(a + d?)),
            SymbolSpec::Power { base, exponent } => {
                let d = base.degree(domain)?;
                if *exponent >= 0 || base.is_unimodular_monomial() {
                    Some(d * exponent.unsigned_abs() as usize)
                } else {
                    None
                }
            }
            SymbolSpec::Matrix { entries } => {
                let n = entries.len();
                let mut worst = 0;
                for row in entries {
                    for e in row {
                        worst = worst.max(e.degree(domain)?);
                    }
                }
                Some(worst * n)
            }
        }
    }

    fn is_unimodular_monomial(&self) -> bool {
        match self {
            SymbolSpec::NormPow { .. } => true,
            SymbolSpec::NormLaurent { coeffs, .. } => coeffs.len() == 1 && (coeffs[0].coeff().norm() - 1.0).abs() < 1e-15,
            _ => false,
        }
    }

    /// Convenience: `N_j^{k_j}` on every factor.
    pub fn norm_pow(k: Vec<i64>) -> Self {
        SymbolSpec::NormPow { k, phases: None }
    }

    pub fn constant(c: Complex64) -> Self {
        SymbolSpec::Constant { value: [c.re, c.im] }
    }

    pub fn product(factors: Vec<SymbolSpec>) -> Self {
        SymbolSpec::Product { factors }
    }
}

/// Construction record of a symbol.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SymbolMeta {
    Spec(SymbolSpec),
    Opaque { label: String, degree: Option<usize> },
    Product(Vec<SymbolMeta>),
    Power { base: Box<SymbolMeta>, exponent: i64 },
    Conj(Box<SymbolMeta>),
    Det(Vec<SymbolMeta>),
}

impl SymbolMeta {
    pub fn degree(&self, domain: &ProductDomain) -> Option<usize> {
        match self {
            SymbolMeta::Spec(s) => s.degree(domain),
            SymbolMeta::Opaque { degree, .. } => *degree,
            SymbolMeta::Product(parts) => parts.iter().map(|p| p.degree(domain)).try_fold(0, |a, d| Some(a + d?)),
            SymbolMeta::Power { base, exponent } => {
                if *exponent >= 0 {
                    Some(base.degree(domain)? * *exponent as usize)
                } else {
                    None
                }
            }
            SymbolMeta::Conj(m) => m.degree(domain),
            SymbolMeta::Det(entries) => {
                let n = (entries.len() as f64).sqrt().round() as usize;
                let mut worst = 0;
                for e in entries {
                    worst = worst.max(e.degree(domain)?);
                }
                Some(worst * n)
            }
        }
    }
}

/// A continuous function on the Shilov boundary of `domain`, assumed non-vanishing.
#[derive(Clone)]
pub struct Symbol {
    domain: ProductDomain,
    eval: Evaluator,
    meta: SymbolMeta,
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Symbol").field("domain", &self.domain).field("meta", &self.meta).finish()
    }
}

impl Symbol {
    /// Wraps a user evaluator. `degree` is its polynomial degree if known.
    pub fn from_fn<F>(domain: ProductDomain, label: impl Into<String>, degree: Option<usize>, f: F) -> Self
    where
        F: Fn(&BoundaryPoint) -> Complex64 + Send + Sync + 'static,
    {
        Self { domain, eval: Arc::new(f), meta: SymbolMeta::Opaque { label: label.into(), degree } }
    }

    /// A function of `λ` on the unit circle, seen as the boundary of `I1`.
    pub fn circle_fn<F>(label: impl Into<String>, degree: Option<usize>, f: F) -> Self
    where
        F: Fn(Complex64) -> Complex64 + Send + Sync + 'static,
    {
        Self::from_fn(ProductDomain::circle(), label, degree, move |p| f(p.part(0).data()[(0, 0)]))
    }

    pub fn from_spec(domain: &ProductDomain, spec: &SymbolSpec) -> Result<Self> {
        let eval = compile(domain, spec)?;
        Ok(Self { domain: domain.clone(), eval, meta: SymbolMeta::Spec(spec.clone()) })
    }

    pub fn constant(domain: &ProductDomain, value: Complex64) -> Self {
        Self::from_spec(domain, &SymbolSpec::constant(value)).expect("constant spec is valid")
    }

    /// `prod_j N_j^{k_j}`.
    pub fn norm_power(domain: &ProductDomain, k: &[i64]) -> Result<Self> {
        Self::from_spec(domain, &SymbolSpec::norm_pow(k.to_vec()))
    }

    pub fn domain(&self) -> &ProductDomain {
        &self.domain
    }

    pub fn meta(&self) -> &SymbolMeta {
        &self.meta
    }

    pub fn degree(&self) -> Option<usize> {
        self.meta.degree(&self.domain)
    }

    #[inline]
    pub fn eval(&self, p: &BoundaryPoint) -> Complex64 {
        debug_assert_eq!(p.domain(), &self.domain);
        (self.eval)(p)
    }

    /// Evaluates a circle symbol at `λ`.
    pub fn eval_circle(&self, lambda: Complex64) -> Complex64 {
        (self.eval)(&BoundaryPoint::circle(lambda))
    }

    pub fn mul(&self, other: &Symbol) -> Result<Symbol> {
        self.check_domain(other)?;
        let (a, b) = (self.eval.clone(), other.eval.clone());
        Ok(Symbol {
            domain: self.domain.clone(),
            eval: Arc::new(move |p| a(p) * b(p)),
            meta: SymbolMeta::Product(vec![self.meta.clone(), other.meta.clone()]),
        })
    }

    pub fn powi(&self, exponent: i64) -> Symbol {
        let a = self.eval.clone();
        Symbol {
            domain: self.domain.clone(),
            eval: Arc::new(move |p| a(p).powi(exponent as i32)),
            meta: SymbolMeta::Power { base: Box::new(self.meta.clone()), exponent },
        }
    }

    /// Pointwise complex conjugate.
    pub fn conj(&self) -> Symbol {
        let a = self.eval.clone();
        Symbol {
            domain: self.domain.clone(),
            eval: Arc::new(move |p| a(p).conj()),
            meta: SymbolMeta::Conj(Box::new(self.meta.clone())),
        }
    }

    fn check_domain(&self, other: &Symbol) -> Result<()> {
        if self.domain != other.domain {
            return Err(Error::Spec(format!("domain mismatch: {} vs {}", self.domain, other.domain)));
        }
        Ok(())
    }
}

/// `M x M` array of scalar symbols on a common domain.
#[derive(Clone, Debug)]
pub struct MatrixSymbol {
    domain: ProductDomain,
    size: usize,
    entries: Vec<Symbol>,
}

impl MatrixSymbol {
    /// `entries` in row-major order.
    pub fn new(domain: ProductDomain, size: usize, entries: Vec<Symbol>) -> Result<Self> {
        if size == 0 || entries.len() != size * size {
            return Err(Error::Shape(format!("{} entries for a {size}x{size} matrix symbol", entries.len())));
        }
        if let Some(bad) = entries.iter().find(|e| e.domain() != &domain) {
            return Err(Error::Spec(format!("entry on {} in a matrix symbol on {domain}", bad.domain())));
        }
        Ok(Self { domain, size, entries })
    }

    pub fn from_spec(domain: &ProductDomain, rows: &[Vec<SymbolSpec>]) -> Result<Self> {
        let size = rows.len();
        if rows.iter().any(|r| r.len() != size) {
            return Err(Error::Spec("matrix symbol rows must form a square array".into()));
        }
        let entries = rows
            .iter()
            .flatten()
            .map(|s| Symbol::from_spec(domain, s))
            .collect::<Result<Vec<_>>>()?;
        Self::new(domain.clone(), size, entries)
    }

    pub fn identity(domain: &ProductDomain, size: usize) -> Self {
        let entries = (0..size * size)
            .map(|k| {
                let v = if k / size == k % size { 1.0 } else { 0.0 };
                Symbol::constant(domain, Complex64::new(v, 0.0))
            })
            .collect();
        Self { domain: domain.clone(), size, entries }
    }

    pub fn domain(&self) -> &ProductDomain {
        &self.domain
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn entry(&self, i: usize, j: usize) -> &Symbol {
        &self.entries[i * self.size + j]
    }

    pub fn eval(&self, p: &BoundaryPoint) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.size, self.size, |i, j| self.entry(i, j).eval(p))
    }

    /// Pointwise conjugate transpose.
    pub fn adjoint(&self) -> MatrixSymbol {
        let n = self.size;
        let entries = (0..n * n).map(|k| self.entry(k % n, k / n).conj()).collect();
        MatrixSymbol { domain: self.domain.clone(), size: n, entries }
    }
}

/// Pointwise determinant of a matrix symbol.
pub fn det_symbol(m: &MatrixSymbol) -> Symbol {
    let entries: Vec<Evaluator> = m.entries.iter().map(|e| e.eval.clone()).collect();
    let n = m.size;
    Symbol {
        domain: m.domain.clone(),
        eval: Arc::new(move |p| det_of(n, &entries, p)),
        meta: SymbolMeta::Det(m.entries.iter().map(|e| e.meta.clone()).collect()),
    }
}

fn det_of(n: usize, entries: &[Evaluator], p: &BoundaryPoint) -> Complex64 {
    let v: Vec<Complex64> = entries.iter().map(|e| e(p)).collect();
    match n {
        1 => v[0],
        2 => v[0] * v[3] - v[1] * v[2],
        _ => DMatrix::from_row_slice(n, n, &v).determinant(),
    }
}

fn compile(domain: &ProductDomain, spec: &SymbolSpec) -> Result<Evaluator> {
    let n = domain.len();
    Ok(match spec {
        SymbolSpec::Constant { value } => {
            let v = Complex64::new(value[0], value[1]);
            Arc::new(move |_| v)
        }
        SymbolSpec::NormPow { k, phases } => {
            if k.len() != n {
                return Err(Error::Spec(format!("norm_pow has {} exponents for {n} factors", k.len())));
            }
            let phases = match phases {
                Some(p) if p.len() != n => {
                    return Err(Error::Spec(format!("norm_pow has {} phases for {n} factors", p.len())));
                }
                Some(p) => p.iter().map(|&a| Complex64::from_polar(1.0, a)).collect(),
                None => vec![Complex64::new(1.0, 0.0); n],
            };
            let k = k.clone();
            Arc::new(move |p| {
                p.parts()
                    .iter()
                    .zip(&k)
                    .zip(&phases)
                    .filter(|((_, &kj), _)| kj != 0)
                    .map(|((u, &kj), &ph)| (ph * generic_norm(u)).powi(kj as i32))
                    .product()
            })
        }
        SymbolSpec::ExpPoly { degree, terms, amplitude, seed } => {
            if *degree == 0 {
                return Err(Error::Spec("exp_poly degree must be positive".into()));
            }
            let poly = RandomPoly::new(domain, *degree, *terms, *amplitude, *seed);
            Arc::new(move |p| poly.eval(p).exp())
        }
        SymbolSpec::Linear { factor, u, c } => {
            let f = *domain
                .factors()
                .get(*factor)
                .ok_or_else(|| Error::Spec(format!("factor index {factor} out of range")))?;
            if u.factor() != f {
                return Err(Error::FactorMismatch { expected: f.to_string(), found: u.factor().to_string() });
            }
            // ℓ_u(z) = sum_a z_a <b_a, u> in standard coordinates
            let weights: Vec<Complex64> = standard_basis(f)
                .iter()
                .map(|b| trace_inner_product(b, u))
                .collect::<Result<_>>()?;
            let shift = Complex64::new(c[0], c[1]);
            let j = *factor;
            Arc::new(move |p| {
                let z = p.part(j).coordinates();
                z.iter().zip(&weights).map(|(a, w)| a * w).sum::<Complex64>() + shift
            })
        }
        SymbolSpec::NormLaurent { factor, coeffs } => {
            if *factor >= n {
                return Err(Error::Spec(format!("factor index {factor} out of range")));
            }
            let (j, coeffs) = (*factor, coeffs.clone());
            Arc::new(move |p| eval_laurent(&coeffs, generic_norm(p.part(j))))
        }
        SymbolSpec::Exp { of } => {
            let a = compile(domain, of)?;
            Arc::new(move |p| a(p).exp())
        }
        SymbolSpec::Conj { of } => {
            let a = compile(domain, of)?;
            Arc::new(move |p| a(p).conj())
        }
        SymbolSpec::Sum { terms } => {
            let parts = terms.iter().map(|t| compile(domain, t)).collect::<Result<Vec<_>>>()?;
            Arc::new(move |p| parts.iter().map(|f| f(p)).sum())
        }
        SymbolSpec::Product { factors } => {
            let parts = factors.iter().map(|t| compile(domain, t)).collect::<Result<Vec<_>>>()?;
            Arc::new(move |p| parts.iter().map(|f| f(p)).product())
        }
        SymbolSpec::Power { base, exponent } => {
            let a = compile(domain, base)?;
            let e = *exponent as i32;
            Arc::new(move |p| a(p).powi(e))
        }
        SymbolSpec::Matrix { entries } => {
            let size = entries.len();
            if size == 0 || entries.iter().any(|r| r.len() != size) {
                return Err(Error::Spec("matrix symbol rows must form a nonempty square array".into()));
            }
            let parts = entries
                .iter()
                .flatten()
                .map(|t| compile(domain, t))
                .collect::<Result<Vec<_>>>()?;
            Arc::new(move |p| det_of(size, &parts, p))
        }
    })
}

/// Seeded random polynomial in the stored entries and their conjugates.
#[derive(Debug, Clone)]
struct RandomPoly {
    /// `(coefficient, [(factor, flat index, conjugated)])`
    monomials: Vec<(Complex64, Vec<(usize, usize, bool)>)>,
}

impl RandomPoly {
    fn new(domain: &ProductDomain, degree: usize, terms: usize, amplitude: f64, seed: u64) -> Self {
        let mut rng = rng_from_seed(seed);
        let monomials = (0..terms)
            .map(|_| {
                let modulus: f64 = rng.gen_range(0.0..=amplitude);
                let arg: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
                let deg = rng.gen_range(1..=degree);
                let vars = (0..deg)
                    .map(|_| {
                        let j = rng.gen_range(0..domain.len());
                        let (r, c) = domain.factors()[j].shape();
                        (j, rng.gen_range(0..r * c), rng.gen_bool(0.5))
                    })
                    .collect();
                (Complex64::from_polar(modulus, arg), vars)
            })
            .collect();
        Self { monomials }
    }

    fn eval(&self, p: &BoundaryPoint) -> Complex64 {
        self.monomials
            .iter()
            .map(|(c, vars)| {
                vars.iter().fold(*c, |acc, &(j, idx, conj)| {
                    let d = p.part(j).data();
                    let v = d[(idx / d.ncols(), idx % d.ncols())];
                    acc * if conj { v.conj() } else { v }
                })
            })
            .sum()
    }
}
