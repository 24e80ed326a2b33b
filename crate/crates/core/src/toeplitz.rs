//! Finite sections of Toeplitz operators on the circle and their indices.
//!
//! A square `M x M` section has kernel and cokernel of the same dimension, so
//! defect numbers are read from tall sections instead: `dim ker T_f` is the
//! nullity of the first `M` columns of `T_f` (with `M + pad` rows), and
//! `dim coker T_f = dim ker T_{f*}` is obtained the same way from the adjoint
//! symbol.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use rand::Rng;
use serde::{Serialize, Serializer};

use crate::domain::ProductDomain;
use crate::error::{Error, Result};
use crate::hardy::{multiplication_matrix, HardyModel, TruncatedOperator, Truncation};
use crate::linalg::{singular_values, CMatrix};
use crate::quadrature::circle_grid;
use crate::shilov::rng_from_seed;
use crate::symbol::{det_symbol, MatrixSymbol, Symbol, SymbolSpec};
use crate::winding::{winding_vector, WindingVector};

/// Relative singular-value threshold for null counts.
pub const SVD_THRESHOLD: f64 = 1e-8;

/// Default sweep for scalar symbols.
pub const DEFAULT_SIZES: [usize; 5] = [16, 32, 64, 128, 256];

/// Default sweep for block symbols.
pub const DEFAULT_BLOCK_SIZES: [usize; 4] = [16, 32, 64, 128];

/// Over the top three sizes, `σ_min(last) / σ_min(first)` below this means
/// the sections are drifting towards singularity and no index is reported.
pub const SIGMA_DECAY_RATIO: f64 = 0.5;

/// Tolerance of [`u2_reduction_check`].
pub const SECTOR_TOL: f64 = 1e-8;

const BASE_POINTS: usize = 4;

fn pad_rows(m: usize) -> usize {
    (m / 4).max(8)
}

/// Fourier coefficients `ĉ(m)` of a function on the circle from `n` samples.
#[derive(Debug, Clone)]
pub struct FourierTable {
    spectrum: Vec<Complex64>,
}

impl FourierTable {
    pub fn new(f: impl Fn(Complex64) -> Complex64, n: usize) -> Self {
        let mut buf: Vec<Complex64> = circle_grid(n).into_iter().map(f).collect();
        FftPlanner::new().plan_fft_forward(n).process(&mut buf);
        let scale = 1.0 / n as f64;
        Self { spectrum: buf.into_iter().map(|z| z * scale).collect() }
    }

    pub fn coeff(&self, m: i64) -> Complex64 {
        self.spectrum[m.rem_euclid(self.spectrum.len() as i64) as usize]
    }
}

/// Grid size for sections with `rows` rows: at least `8 * rows`, and alias-free
/// for polynomial symbols of known degree.
fn grid_size(rows: usize, degree: Option<usize>) -> usize {
    let n = 8 * rows.max(1);
    match degree {
        Some(d) => n.max(2 * rows + d + 1),
        None => n,
    }
}

fn circle_check(domain: &ProductDomain) -> Result<()> {
    match HardyModel::from_domain(domain)? {
        HardyModel::Circle => Ok(()),
        HardyModel::U2 => Err(Error::Spec("section operators live on the circle; use u2_reduction_check on U(2)".into())),
    }
}

fn tables(f: &MatrixSymbol, rows: usize) -> Vec<FourierTable> {
    let b = f.size();
    (0..b * b)
        .map(|e| {
            let s = f.entry(e / b, e % b);
            FourierTable::new(|l| s.eval_circle(l), grid_size(rows, s.degree()))
        })
        .collect()
}

/// Rows `a < rows`, columns `c < cols` of the block Toeplitz matrix with blocks
/// `F̂(a - c)`.
fn block_section(tables: &[FourierTable], b: usize, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows * b, cols * b, |r, c| {
        let (a, i) = (r / b, r % b);
        let (col, j) = (c / b, c % b);
        tables[i * b + j].coeff(a as i64 - col as i64)
    })
}

/// `M x M` section `[ĉ(a - b)]` of `T_f`.
pub fn circle_sections(f: &Symbol, m: usize) -> Result<TruncatedOperator> {
    circle_check(f.domain())?;
    let table = FourierTable::new(|l| f.eval_circle(l), grid_size(m, f.degree()));
    let t = Truncation::circle(0, m as i64 - 1)?;
    Ok(TruncatedOperator {
        indices: t.indices(),
        truncation: t,
        matrix: block_section(&[table], 1, m, m),
        hardy_compressed: true,
        symbol: Some(f.meta().clone()),
    })
}

/// `MB x MB` section of the block Toeplitz operator `T_F`.
pub fn block_sections(f: &MatrixSymbol, m: usize) -> Result<CMatrix> {
    circle_check(f.domain())?;
    Ok(block_section(&tables(f, m), f.size(), m, m))
}

/// Analytic index of one sweep, or `"unstable"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnalyticIndex {
    Value(i64),
    Unstable,
}

impl AnalyticIndex {
    pub fn value(&self) -> Option<i64> {
        match self {
            AnalyticIndex::Value(v) => Some(*v),
            AnalyticIndex::Unstable => None,
        }
    }
}

impl Serialize for AnalyticIndex {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            AnalyticIndex::Value(v) => s.serialize_i64(*v),
            AnalyticIndex::Unstable => s.serialize_str("unstable"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SectionResult {
    pub size: usize,
    pub dim_ker: usize,
    pub dim_coker: usize,
    /// Smallest singular value above the null threshold, over both sections.
    pub sigma_min: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SectionSweep {
    pub sizes: Vec<usize>,
    pub svd_threshold: f64,
    pub results: Vec<SectionResult>,
}

impl SectionSweep {
    pub fn sigma_min(&self) -> Vec<f64> {
        self.results.iter().map(|r| r.sigma_min).collect()
    }

    /// Index once the defect numbers agree on the top three sizes and the
    /// smallest non-null singular value has not decayed.
    pub fn analytic_index(&self) -> AnalyticIndex {
        let top = &self.results[self.results.len().saturating_sub(3)..];
        let Some(first) = top.first() else { return AnalyticIndex::Unstable };
        let last = top.last().expect("non-empty");
        let same = top.iter().all(|r| (r.dim_ker, r.dim_coker) == (first.dim_ker, first.dim_coker));
        let kept = last.sigma_min >= SIGMA_DECAY_RATIO * first.sigma_min;
        if same && kept {
            AnalyticIndex::Value(first.dim_ker as i64 - first.dim_coker as i64)
        } else {
            AnalyticIndex::Unstable
        }
    }
}

fn check_sizes(sizes: &[usize]) -> Result<()> {
    if sizes.is_empty() || sizes[0] == 0 || sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Spec(format!("section sizes must be positive and strictly increasing: {sizes:?}")));
    }
    Ok(())
}

/// Nullity and smallest non-null singular value of a tall section.
fn null_count(m: &CMatrix, threshold: f64) -> (usize, f64) {
    let sv = singular_values(m);
    let top = sv.first().copied().unwrap_or(0.0);
    let cut = threshold * top.max(f64::MIN_POSITIVE);
    let null = sv.iter().filter(|&&s| s <= cut).count();
    let smallest = sv.iter().copied().filter(|&s| s > cut).fold(f64::INFINITY, f64::min);
    (null, smallest)
}

/// Defect numbers of `T_F` at every size of `sizes`.
pub fn sweep(f: &MatrixSymbol, sizes: &[usize], threshold: f64) -> Result<SectionSweep> {
    circle_check(f.domain())?;
    check_sizes(sizes)?;
    let b = f.size();
    let max_rows = sizes.last().map(|&m| m + pad_rows(m)).unwrap_or(0);
    let direct = tables(f, max_rows);
    let adjoint = tables(&f.adjoint(), max_rows);
    let results = sizes
        .par_iter()
        .map(|&m| {
            let rows = m + pad_rows(m);
            let (dim_ker, s1) = null_count(&block_section(&direct, b, rows, m), threshold);
            let (dim_coker, s2) = null_count(&block_section(&adjoint, b, rows, m), threshold);
            SectionResult { size: m, dim_ker, dim_coker, sigma_min: s1.min(s2) }
        })
        .collect();
    Ok(SectionSweep { sizes: sizes.to_vec(), svd_threshold: threshold, results })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndexVerdict {
    pub analytic_index: AnalyticIndex,
    /// Winding vector of the (scalarized) symbol; absent when it could not be
    /// computed, e.g. for a vanishing symbol.
    pub topological_index: Option<WindingVector>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub winding_error: Option<String>,
    #[serde(rename = "match")]
    pub matches: bool,
    pub sweep: SectionSweep,
}

fn verdict(sweep: SectionSweep, scalar: &Symbol, seed: u64) -> IndexVerdict {
    let analytic_index = sweep.analytic_index();
    let (topological_index, winding_error) = match winding_vector(scalar, BASE_POINTS, seed) {
        Ok(r) => (Some(r.k), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let matches = match (analytic_index.value(), &topological_index) {
        (Some(ind), Some(k)) => ind == -k.0.iter().sum::<i64>(),
        _ => false,
    };
    IndexVerdict { analytic_index, topological_index, winding_error, matches, sweep }
}

/// Index of `T_f` on the circle compared with `-k`.
pub fn finite_section_index(f: &Symbol, sizes: &[usize], seed: u64) -> Result<IndexVerdict> {
    let m = MatrixSymbol::new(f.domain().clone(), 1, vec![f.clone()])?;
    let s = sweep(&m, sizes, SVD_THRESHOLD)?;
    Ok(verdict(s, f, seed))
}

/// Index of the block operator `T_F` compared with `-winding(det F)`.
pub fn block_index(f: &MatrixSymbol, sizes: &[usize], seed: u64) -> Result<IndexVerdict> {
    let s = sweep(f, sizes, SVD_THRESHOLD)?;
    Ok(verdict(s, &det_symbol(f), seed))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FredholmReport {
    pub sizes: Vec<usize>,
    /// Smallest singular value of the tall sections of `T_f` and `T_{f*}`
    /// once the `|winding|` smallest ones, spanning the index-induced kernel,
    /// are set aside.
    pub sigma_min: Vec<f64>,
    /// `min |f|` on a fine grid.
    pub min_abs_symbol: f64,
    /// Winding of `f`, absent when it vanishes numerically.
    pub winding: Option<i64>,
    pub analytic_index: AnalyticIndex,
    /// `σ_min` is non-increasing and its last value is below half the first.
    pub decaying: bool,
    pub lower_bound: f64,
}

fn smallest_after(m: &CMatrix, skip: usize) -> f64 {
    let mut sv = singular_values(m);
    sv.sort_by(|a, b| a.total_cmp(b));
    sv.get(skip).copied().unwrap_or(f64::INFINITY)
}

/// Smallest-singular-value diagnostics distinguishing invertible symbols from
/// symbols with zeros.
pub fn fredholm_proxy(f: &Symbol, sizes: &[usize]) -> Result<FredholmReport> {
    let m = MatrixSymbol::new(f.domain().clone(), 1, vec![f.clone()])?;
    let s = sweep(&m, sizes, SVD_THRESHOLD)?;
    let grid = 16 * sizes.last().copied().unwrap_or(16);
    let min_abs_symbol = circle_grid(grid).into_iter().map(|l| f.eval_circle(l).norm()).fold(f64::INFINITY, f64::min);
    let winding = winding_vector(f, BASE_POINTS, 0).ok().map(|r| r.k.0[0]);
    // T_f has kernel of dimension max(-w, 0), T_{f*} of dimension max(w, 0)
    let w = winding.unwrap_or(0);
    let (skip_direct, skip_adjoint) = ((-w).max(0) as usize, w.max(0) as usize);
    let max_rows = sizes.last().map(|&m| m + pad_rows(m)).unwrap_or(0);
    let direct = tables(&m, max_rows);
    let adjoint = tables(&m.adjoint(), max_rows);
    let sigma_min: Vec<f64> = sizes
        .par_iter()
        .map(|&size| {
            let rows = size + pad_rows(size);
            let a = smallest_after(&block_section(&direct, 1, rows, size), skip_direct);
            let b = smallest_after(&block_section(&adjoint, 1, rows, size), skip_adjoint);
            a.min(b)
        })
        .collect();
    let monotone = sigma_min.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-9));
    let decaying = monotone && sigma_min.last() < sigma_min.first().map(|v| 0.5 * v).as_ref();
    let lower_bound = sigma_min.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(FredholmReport {
        sizes: sizes.to_vec(),
        analytic_index: s.analytic_index(),
        sigma_min,
        min_abs_symbol,
        winding,
        decaying,
        lower_bound,
    })
}

/// Outcome of [`u2_reduction_check`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct U2ReductionReport {
    pub truncation: Truncation,
    pub sectors: usize,
    /// Max deviation of any sector block from the circle section, and of any
    /// cross-sector entry from zero.
    pub max_residual: f64,
    /// Index of every sector, i.e. of the circle Toeplitz operator of `f`.
    pub per_sector_index: AnalyticIndex,
    /// Winding vector of `f ∘ N` on `U(2)`.
    pub k: Option<WindingVector>,
    #[serde(rename = "match")]
    pub matches: bool,
    pub circle: IndexVerdict,
}

/// `f ∘ det` as a symbol on `U(2)`.
pub fn compose_with_norm(f: &Symbol) -> Result<Symbol> {
    circle_check(f.domain())?;
    let g = f.clone();
    let label = format!("{:?} o N", f.meta());
    let degree = f.degree().map(|d| 2 * d);
    Ok(Symbol::from_fn(HardyModel::U2.domain(), label, degree, move |p| {
        let m = p.part(0).data();
        g.eval_circle(m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)])
    }))
}

/// Compares the Hardy compression of `f ∘ N` on `U(2)` sector by sector with
/// the circle section of `f`, then reports the common index against the
/// winding of `f ∘ N`.
pub fn u2_reduction_check(f: &Symbol, t: &Truncation, sizes: &[usize], seed: u64) -> Result<U2ReductionReport> {
    if t.model != HardyModel::U2 {
        return Err(Error::Spec("u2_reduction_check needs a U(2) truncation".into()));
    }
    let f_n = compose_with_norm(f)?;
    let op = multiplication_matrix(&f_n, t, true)?;
    let levels = (t.l_max + 1) as usize;
    let circle = circle_sections(f, levels)?;
    let mut max_residual = 0.0f64;
    for (a, ba) in op.indices.iter().enumerate() {
        for (b, bb) in op.indices.iter().enumerate() {
            let want = if (ba.d, ba.j, ba.k) == (bb.d, bb.j, bb.k) {
                circle.matrix[(ba.l as usize, bb.l as usize)]
            } else {
                Complex64::new(0.0, 0.0)
            };
            max_residual = max_residual.max((op.matrix[(a, b)] - want).norm());
        }
    }
    if max_residual > SECTOR_TOL {
        return Err(Error::SectorMismatch { residual: max_residual, tol: SECTOR_TOL });
    }
    let circle_verdict = finite_section_index(f, sizes, seed)?;
    let k = winding_vector(&f_n, BASE_POINTS, seed).ok().map(|r| r.k);
    let per_sector_index = circle_verdict.analytic_index;
    let matches = match (per_sector_index.value(), &k) {
        (Some(ind), Some(k)) => ind == -k.0[0],
        _ => false,
    };
    Ok(U2ReductionReport {
        truncation: t.clone(),
        sectors: op.indices.len() / levels,
        max_residual,
        per_sector_index,
        k,
        matches,
        circle: circle_verdict,
    })
}

/// Seeded scalar symbol `λ^k · exp(p(λ, λ̄))` with a small random polynomial `p`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GkCase {
    pub k: i64,
    pub spec: SymbolSpec,
}

/// `count` Gohberg-Krein test symbols with `|k| <= max_k`.
pub fn gk_family(count: usize, max_k: i64, seed: u64) -> Vec<GkCase> {
    let mut rng = rng_from_seed(seed);
    (0..count)
        .map(|_| {
            let k = rng.gen_range(-max_k..=max_k);
            let spec = SymbolSpec::Product {
                factors: vec![
                    SymbolSpec::norm_pow(vec![k]),
                    SymbolSpec::ExpPoly { degree: 3, terms: 4, amplitude: 0.25, seed: rng.gen() },
                ],
            };
            GkCase { k, spec }
        })
        .collect()
}

/// Seeded block symbol `L(λ) · diag(λ^{k_i} e^{p_i}) · R(λ)` with `L` unit
/// lower and `R` unit upper triangular Laurent polynomials, so that
/// `det = prod λ^{k_i} e^{p_i}` never vanishes. Returns the symbol and `sum k_i`.
pub fn random_block_symbol(size: usize, max_k: i64, seed: u64) -> Result<(MatrixSymbol, i64)> {
    let dom = ProductDomain::circle();
    let mut rng = rng_from_seed(seed);
    let ks: Vec<i64> = (0..size).map(|_| rng.gen_range(-max_k..=max_k)).collect();
    let diag = ks
        .iter()
        .map(|&k| {
            let spec = SymbolSpec::Product {
                factors: vec![
                    SymbolSpec::norm_pow(vec![k]),
                    SymbolSpec::ExpPoly { degree: 2, terms: 3, amplitude: 0.2, seed: rng.gen() },
                ],
            };
            Symbol::from_spec(&dom, &spec)
        })
        .collect::<Result<Vec<_>>>()?;
    // off-diagonal Laurent coefficients for powers -1, 0, 1
    let mut laurent = || -> [Complex64; 3] {
        std::array::from_fn(|_| Complex64::new(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)))
    };
    let lower: Vec<[Complex64; 3]> = (0..size * size).map(|_| laurent()).collect();
    let upper: Vec<[Complex64; 3]> = (0..size * size).map(|_| laurent()).collect();
    let tri = move |coeffs: &[[Complex64; 3]], l: Complex64, i: usize, j: usize, low: bool| -> Complex64 {
        if i == j {
            Complex64::new(1.0, 0.0)
        } else if (i > j) == low {
            let c = &coeffs[i * size + j];
            c[0] / l + c[1] + c[2] * l
        } else {
            Complex64::new(0.0, 0.0)
        }
    };
    let diag = Arc::new(diag);
    let (lower, upper) = (Arc::new(lower), Arc::new(upper));
    let entries = (0..size * size)
        .map(|e| {
            let (i, j) = (e / size, e % size);
            let (d, lo, up) = (diag.clone(), lower.clone(), upper.clone());
            Symbol::circle_fn(format!("LDR[{i},{j}]"), None, move |l| {
                (0..size)
                    .map(|m| tri(&lo, l, i, m, true) * d[m].eval_circle(l) * tri(&up, l, m, j, false))
                    .sum()
            })
        })
        .collect();
    Ok((MatrixSymbol::new(dom, size, entries)?, ks.iter().sum()))
}
