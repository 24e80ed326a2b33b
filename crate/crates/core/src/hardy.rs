//! Hardy-space models on the circle and on `U(2)`.
//!
//! `L²(U(2))` splits as the orthogonal sum over `l ∈ Z` and `d ≥ 0` of
//! `det^l · span{D^d_{jk}}`, where `D^d` is the unitary representation of
//! `U(2)` on binary forms of degree `d`. The Hardy space is the part with
//! `l ≥ 0`. The circle is the special case `d = j = k = 0`, `det = λ`.
//!
//! Matrices are assembled with the determinant phase integrated first: every
//! basis function is `e^{imφ} G(g)` for `u = e^{iφ} g`, `g ∈ SU(2)`, with
//! `m = 2l + d`, so an entry only needs one Fourier coefficient of the symbol
//! along each phase orbit.

use base64::Engine;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::{DomainFactor, ProductDomain};
use crate::element::Element;
use crate::error::{Error, Result};
use crate::linalg::{operator_norm, CMatrix};
use crate::quadrature::{circle_grid, QuadratureOrders, Su2Rule};
use crate::shilov::BoundaryPoint;
use crate::symbol::{Symbol, SymbolMeta, SymbolSpec};

/// Assumed polynomial degree for symbols that do not declare one (e.g.
/// exponentials). Smooth symbols are then integrated to near machine precision.
pub const DEFAULT_SMOOTH_DEGREE: usize = 24;

/// Tolerance on `|norm_d^2 - (d+1)| / (d+1)` for the numeric normalization.
pub const NORMALIZATION_TOL: f64 = 1e-10;

/// Maximal leak allowed by [`extract_ab`].
pub const LEAK_TOL: f64 = 1e-8;

const ASSEMBLY_CHUNKS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HardyModel {
    Circle,
    U2,
}

impl HardyModel {
    pub fn domain(&self) -> ProductDomain {
        match self {
            HardyModel::Circle => ProductDomain::circle(),
            HardyModel::U2 => ProductDomain::single(DomainFactor::TypeI(2)).expect("I2 is valid"),
        }
    }

    pub fn from_domain(domain: &ProductDomain) -> Result<Self> {
        match domain.factors() {
            [DomainFactor::TypeI(1)] => Ok(HardyModel::Circle),
            [DomainFactor::TypeI(2)] => Ok(HardyModel::U2),
            _ => Err(Error::Unsupported(format!("no Hardy model for {domain}"))),
        }
    }
}

/// Label of a basis function `det^l · sqrt(d+1) · D^d_{jk}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BasisIndex {
    pub l: i64,
    pub d: usize,
    pub j: usize,
    pub k: usize,
}

impl BasisIndex {
    pub fn circle(l: i64) -> Self {
        Self { l, d: 0, j: 0, k: 0 }
    }

    /// Frequency along the determinant phase.
    fn phase_frequency(&self, model: HardyModel) -> i64 {
        match model {
            HardyModel::Circle => self.l,
            HardyModel::U2 => 2 * self.l + self.d as i64,
        }
    }

    fn check(&self, model: HardyModel) -> Result<()> {
        let ok = match model {
            HardyModel::Circle => self.d == 0 && self.j == 0 && self.k == 0,
            HardyModel::U2 => self.j <= self.d && self.k <= self.d,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange(format!("{self:?} for {model:?}")))
        }
    }
}

/// A finite window of the basis: levels `l_min..=l_max`, degrees `0..=d_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Truncation {
    pub model: HardyModel,
    pub l_min: i64,
    pub l_max: i64,
    #[serde(default)]
    pub d_max: usize,
    /// Explicit quadrature sizes; chosen from the symbol degree when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quadrature: Option<QuadratureOrders>,
}

impl Truncation {
    pub fn circle(l_min: i64, l_max: i64) -> Result<Self> {
        Self { model: HardyModel::Circle, l_min, l_max, d_max: 0, quadrature: None }.validated()
    }

    pub fn u2(l_min: i64, l_max: i64, d_max: usize) -> Result<Self> {
        Self { model: HardyModel::U2, l_min, l_max, d_max, quadrature: None }.validated()
    }

    pub fn with_quadrature(mut self, orders: QuadratureOrders) -> Self {
        self.quadrature = Some(orders);
        self
    }

    pub fn validated(self) -> Result<Self> {
        if self.l_min > 0 || self.l_max < 0 {
            return Err(Error::Spec(format!("need l_min <= 0 <= l_max, got [{}, {}]", self.l_min, self.l_max)));
        }
        if self.model == HardyModel::Circle && self.d_max != 0 {
            return Err(Error::Spec("circle truncation has d_max = 0".into()));
        }
        if let Some(q) = &self.quadrature {
            if q.phase == 0 || q.xi == 0 || q.gauss == 0 {
                return Err(Error::Spec("quadrature orders must be positive".into()));
            }
        }
        Ok(self)
    }

    /// Ordered enumeration: `l`, then `d`, `j`, `k`.
    pub fn indices(&self) -> Vec<BasisIndex> {
        let mut out = Vec::new();
        for l in self.l_min..=self.l_max {
            for d in 0..=self.d_max {
                for j in 0..=d {
                    for k in 0..=d {
                        out.push(BasisIndex { l, d, j, k });
                    }
                }
            }
        }
        out
    }

    pub fn len(&self) -> usize {
        let per_level: usize = (0..=self.d_max).map(|d| (d + 1) * (d + 1)).sum();
        per_level * (self.l_max - self.l_min + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Smallest orders that make every matrix entry exact for a symbol that is
    /// a polynomial of degree `symbol_degree` in the entries and conjugates.
    pub fn required_orders(&self, symbol_degree: usize) -> QuadratureOrders {
        match self.model {
            HardyModel::Circle => QuadratureOrders {
                phase: (self.l_max - self.l_min) as usize + symbol_degree + 1,
                xi: 1,
                gauss: 1,
            },
            HardyModel::U2 => QuadratureOrders::exact_for(
                2 * (self.l_max - self.l_min) as usize + self.d_max + symbol_degree,
                2 * self.d_max + symbol_degree,
                self.d_max + 2,
            ),
        }
    }

    fn resolve_orders(&self, symbol_degree: Option<usize>) -> Result<QuadratureOrders> {
        let required = self.required_orders(symbol_degree.unwrap_or(DEFAULT_SMOOTH_DEGREE));
        match (self.quadrature, symbol_degree) {
            (Some(q), Some(deg)) if !q.covers(&required) => Err(Error::QuadratureTooCoarse(format!(
                "{q:?} below {required:?} needed for symbol degree {deg}"
            ))),
            (Some(q), _) => Ok(q),
            (None, _) => Ok(required),
        }
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Matrix of `u` acting on binary forms of degree `d` by `p(x, y) ↦ p((x, y) u)`,
/// in the orthonormal basis `sqrt(C(d, j)) x^{d-j} y^j`. `u` is row-major.
pub fn sym_power(u: &[Complex64; 4], d: usize) -> CMatrix {
    let zero = Complex64::new(0.0, 0.0);
    // x' = u11 x + u21 y, y' = u12 x + u22 y; coefficient vectors indexed by y-power
    let lin_x = [u[0], u[2]];
    let lin_y = [u[1], u[3]];
    let mut pow_x = vec![vec![Complex64::new(1.0, 0.0)]];
    let mut pow_y = vec![vec![Complex64::new(1.0, 0.0)]];
    for e in 1..=d {
        pow_x.push(convolve(&pow_x[e - 1], &lin_x));
        pow_y.push(convolve(&pow_y[e - 1], &lin_y));
    }
    let mut m = CMatrix::from_element(d + 1, d + 1, zero);
    for k in 0..=d {
        let col = convolve(&pow_x[d - k], &pow_y[k]);
        for j in 0..=d {
            m[(j, k)] = col[j] * (binomial(d, k) / binomial(d, j)).sqrt();
        }
    }
    m
}

fn convolve(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Unit-norm factors for degrees `0..=d_max`, computed by quadrature on
/// `SU(2)` and checked against `sqrt(d+1)`.
pub fn basis_normalizations(d_max: usize) -> Result<Vec<f64>> {
    let rule = Su2Rule::new(2 * d_max + 1, d_max + 2);
    let mut mean_sq = vec![0.0; d_max + 1];
    for (g, w) in rule.nodes.iter().zip(&rule.weights) {
        for (d, acc) in mean_sq.iter_mut().enumerate() {
            // rows and columns of D^d are unit vectors pointwise, so a single
            // coefficient is the informative one
            *acc += w * sym_power(g, d)[(0, 0)].norm_sqr();
        }
    }
    mean_sq
        .iter()
        .enumerate()
        .map(|(d, &ms)| {
            let norm_sq = 1.0 / ms;
            let expect = (d + 1) as f64;
            if ((norm_sq - expect) / expect).abs() > NORMALIZATION_TOL {
                return Err(Error::Normalization {
                    degree: d,
                    detail: format!("numeric norm^2 {norm_sq} vs {expect}"),
                });
            }
            Ok(norm_sq.sqrt())
        })
        .collect()
}

fn point_matrix(p: &BoundaryPoint, model: HardyModel) -> Result<[Complex64; 4]> {
    if p.domain() != &model.domain() {
        return Err(Error::Spec(format!("point on {} for {model:?} model", p.domain())));
    }
    let m = p.part(0).data();
    Ok(match model {
        HardyModel::Circle => [m[(0, 0)], Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
        HardyModel::U2 => [m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]],
    })
}

/// Value of the basis function `b` at `u`.
pub fn basis_eval(b: &BasisIndex, u: &BoundaryPoint) -> Result<Complex64> {
    let model = HardyModel::from_domain(u.domain())?;
    b.check(model)?;
    let m = point_matrix(u, model)?;
    let det = m[0] * m[3] - m[1] * m[2];
    let det_pow = if b.l >= 0 { det.powi(b.l as i32) } else { det.conj().powi((-b.l) as i32) };
    if model == HardyModel::Circle {
        return Ok(det_pow);
    }
    let norm = basis_normalizations(b.d)?[b.d];
    Ok(det_pow * norm * sym_power(&m, b.d)[(b.j, b.k)])
}

/// Dense matrix of a multiplication (or Toeplitz) operator on a basis window.
#[derive(Debug, Clone, Serialize)]
pub struct TruncatedOperator {
    pub truncation: Truncation,
    pub indices: Vec<BasisIndex>,
    pub matrix: CMatrix,
    pub hardy_compressed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub symbol: Option<SymbolMeta>,
}

/// Binary layout of an operator dump.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DumpEncoding {
    /// One JSON document, matrix in a base64 string.
    Base64,
    /// A JSON header line, then raw little-endian `f64` pairs.
    Binary,
}

pub const DUMP_SCHEMA_VERSION: u32 = 1;

#[derive(Serialize)]
struct DumpHeader<'a> {
    schema_version: u32,
    truncation: &'a Truncation,
    hardy_compressed: bool,
    symbol: &'a Option<SymbolMeta>,
    indices: &'a [BasisIndex],
    rows: usize,
    cols: usize,
    layout: &'static str,
    encoding: DumpEncoding,
    #[serde(skip_serializing_if = "Option::is_none")]
    data: Option<String>,
}

impl TruncatedOperator {
    pub fn dim(&self) -> usize {
        self.indices.len()
    }

    /// Row-major interleaved `re, im` little-endian bytes.
    pub fn matrix_bytes(&self) -> Vec<u8> {
        let (r, c) = self.matrix.shape();
        let mut out = Vec::with_capacity(r * c * 16);
        for i in 0..r {
            for j in 0..c {
                let z = self.matrix[(i, j)];
                out.extend_from_slice(&z.re.to_le_bytes());
                out.extend_from_slice(&z.im.to_le_bytes());
            }
        }
        out
    }

    pub fn dump(&self, encoding: DumpEncoding) -> Result<Vec<u8>> {
        let bytes = self.matrix_bytes();
        let (rows, cols) = self.matrix.shape();
        let mut header = DumpHeader {
            schema_version: DUMP_SCHEMA_VERSION,
            truncation: &self.truncation,
            hardy_compressed: self.hardy_compressed,
            symbol: &self.symbol,
            indices: &self.indices,
            rows,
            cols,
            layout: "row_major_complex_f64_le",
            encoding,
            data: None,
        };
        match encoding {
            DumpEncoding::Base64 => {
                header.data = Some(base64::engine::general_purpose::STANDARD.encode(&bytes));
                let mut out = serde_json::to_vec(&header)?;
                out.push(b'\n');
                Ok(out)
            }
            DumpEncoding::Binary => {
                let mut out = serde_json::to_vec(&header)?;
                out.push(b'\n');
                out.extend_from_slice(&bytes);
                Ok(out)
            }
        }
    }
}

/// Orthogonal projection onto `l ≥ 0` on the full window of `t`.
pub fn hardy_projection(t: &Truncation) -> TruncatedOperator {
    let indices = t.indices();
    let n = indices.len();
    let matrix = CMatrix::from_fn(n, n, |a, b| {
        if a == b && indices[a].l >= 0 {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    TruncatedOperator { truncation: t.clone(), indices, matrix, hardy_compressed: false, symbol: None }
}

/// `<b_a, b_b>` for every pair, by the full product rule evaluated pointwise.
///
/// Deliberately independent of [`multiplication_matrix`]: it samples basis
/// functions on `U(2)` directly instead of integrating out the phase.
pub fn gram_matrix(t: &Truncation) -> Result<CMatrix> {
    let indices = t.indices();
    let orders = t.resolve_orders(Some(0))?;
    let model = t.model;
    let norms = basis_normalizations(t.d_max)?;
    let phases = circle_grid(orders.phase);
    let (nodes, weights) = match model {
        HardyModel::Circle => (vec![identity4()], vec![1.0]),
        HardyModel::U2 => {
            let r = Su2Rule::new(orders.xi, orders.gauss);
            (r.nodes, r.weights)
        }
    };
    let npts = nodes.len() * phases.len();
    // column a holds sqrt(w_q) b_a(u_q)
    let mut samples = CMatrix::zeros(npts, indices.len());
    let mut q = 0;
    for (g, w) in nodes.iter().zip(&weights) {
        let sw = (w / phases.len() as f64).sqrt();
        for ph in &phases {
            let u = [g[0] * ph, g[1] * ph, g[2] * ph, g[3] * ph];
            let det = u[0] * u[3] - u[1] * u[2];
            let reps: Vec<CMatrix> = (0..=t.d_max).map(|d| sym_power(&u, d)).collect();
            for (a, b) in indices.iter().enumerate() {
                let det_pow = if b.l >= 0 { det.powi(b.l as i32) } else { det.conj().powi((-b.l) as i32) };
                let v = match model {
                    HardyModel::Circle => det_pow,
                    HardyModel::U2 => det_pow * norms[b.d] * reps[b.d][(b.j, b.k)],
                };
                samples[(q, a)] = v * sw;
            }
            q += 1;
        }
    }
    let n = indices.len();
    let cols: Vec<Vec<Complex64>> = (0..n)
        .into_par_iter()
        .map(|a| {
            let ca = samples.column(a);
            (0..n).map(|b| ca.dotc(&samples.column(b))).collect()
        })
        .collect();
    Ok(CMatrix::from_fn(n, n, |a, b| cols[a][b]))
}

fn identity4() -> [Complex64; 4] {
    let (o, z) = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
    [o, z, z, o]
}

/// `<b_a, φ b_b>` for rows `a ∈ rows`, columns `b ∈ cols`.
fn assemble(phi: &Symbol, model: HardyModel, rows: &[BasisIndex], cols: &[BasisIndex], orders: &QuadratureOrders, norms: &[f64]) -> CMatrix {
    let domain = model.domain();
    let factor = domain.factors()[0];
    let (nodes, weights) = match model {
        HardyModel::Circle => (vec![identity4()], vec![1.0]),
        HardyModel::U2 => {
            let r = Su2Rule::new(orders.xi, orders.gauss);
            (r.nodes, r.weights)
        }
    };
    let phases = circle_grid(orders.phase);
    let n_phase = phases.len();
    let m_rows: Vec<i64> = rows.iter().map(|b| b.phase_frequency(model)).collect();
    let m_cols: Vec<i64> = cols.iter().map(|b| b.phase_frequency(model)).collect();
    let lo = m_rows.iter().min().copied().unwrap_or(0) - m_cols.iter().max().copied().unwrap_or(0);
    let hi = m_rows.iter().max().copied().unwrap_or(0) - m_cols.iter().min().copied().unwrap_or(0);
    let d_max = rows.iter().chain(cols).map(|b| b.d).max().unwrap_or(0);

    let g_values = |g: &[Complex64; 4], set: &[BasisIndex]| -> Vec<Complex64> {
        match model {
            HardyModel::Circle => vec![Complex64::new(1.0, 0.0); set.len()],
            HardyModel::U2 => {
                let reps: Vec<CMatrix> = (0..=d_max).map(|d| sym_power(g, d)).collect();
                set.iter().map(|b| reps[b.d][(b.j, b.k)] * norms[b.d]).collect()
            }
        }
    };

    let chunk = nodes.len().div_ceil(ASSEMBLY_CHUNKS).max(1);
    let partials: Vec<CMatrix> = nodes
        .par_chunks(chunk)
        .zip(weights.par_chunks(chunk))
        .map(|(gs, ws)| {
            let mut acc = CMatrix::zeros(rows.len(), cols.len());
            let mut coeffs = vec![Complex64::new(0.0, 0.0); (hi - lo + 1) as usize];
            for (g, &w) in gs.iter().zip(ws) {
                let samples: Vec<Complex64> = phases
                    .iter()
                    .map(|ph| {
                        let u = DMatrix::from_fn(factor.shape().0, factor.shape().1, |i, j| g[2 * i + j] * ph);
                        let p = BoundaryPoint::from_parts_unchecked(domain.clone(), vec![Element::from_raw(factor, u)]);
                        phi.eval(&p)
                    })
                    .collect();
                for (slot, c) in coeffs.iter_mut().enumerate() {
                    let freq = lo + slot as i64;
                    let mut s = Complex64::new(0.0, 0.0);
                    for (p, v) in samples.iter().enumerate() {
                        // e^{-i freq θ_p}, θ_p = 2πp/n
                        let idx = (freq * p as i64).rem_euclid(n_phase as i64) as usize;
                        s += v * phases[idx].conj();
                    }
                    *c = s / n_phase as f64;
                }
                let gr = g_values(g, rows);
                let gc = g_values(g, cols);
                for (b, (gb, mb)) in gc.iter().zip(&m_cols).enumerate() {
                    for (a, (ga, ma)) in gr.iter().zip(&m_rows).enumerate() {
                        acc[(a, b)] += ga.conj() * gb * coeffs[(ma - mb - lo) as usize] * w;
                    }
                }
            }
            acc
        })
        .collect();
    let mut total = CMatrix::zeros(rows.len(), cols.len());
    for p in &partials {
        total += p;
    }
    total
}

/// Matrix of multiplication by `φ` on the window `t`; with `compress`, only the
/// `l ≥ 0` rows and columns are kept, i.e. the Toeplitz compression.
pub fn multiplication_matrix(phi: &Symbol, t: &Truncation, compress: bool) -> Result<TruncatedOperator> {
    let model = HardyModel::from_domain(phi.domain())?;
    if model != t.model {
        return Err(Error::Spec(format!("symbol on {} for {:?} truncation", phi.domain(), t.model)));
    }
    let orders = t.resolve_orders(phi.degree())?;
    let norms = basis_normalizations(t.d_max)?;
    let indices: Vec<BasisIndex> = t.indices().into_iter().filter(|b| !compress || b.l >= 0).collect();
    let matrix = assemble(phi, model, &indices, &indices, &orders, &norms);
    Ok(TruncatedOperator {
        truncation: t.clone(),
        indices,
        matrix,
        hardy_compressed: compress,
        symbol: Some(phi.meta().clone()),
    })
}

/// `A_u` and `B_u` blocks of multiplication by `conj(ℓ_u)` on the `l = 0`
/// harmonic block.
#[derive(Debug, Clone, Serialize)]
pub struct SplitAB {
    /// Labels `(d, j, k)` of one level, shared by rows and columns.
    pub sector: Vec<(usize, usize, usize)>,
    /// Component landing in level `-1`.
    pub a: CMatrix,
    /// Component staying in level `0`.
    pub b: CMatrix,
    /// Operator norm of the components in other levels (top degree excluded).
    pub leak: f64,
}

fn conj_linear(u: &Element) -> Result<Symbol> {
    let domain = HardyModel::U2.domain();
    let spec = SymbolSpec::Conj {
        of: Box::new(SymbolSpec::Linear { factor: 0, u: u.clone(), c: [0.0, 0.0] }),
    };
    Symbol::from_spec(&domain, &spec)
}

/// Splits `conj(ℓ_u) p = N^{-1} A_u p + B_u p` on harmonic polynomials of
/// degree `≤ d_max`.
pub fn extract_ab(u: &Element, t: &Truncation) -> Result<SplitAB> {
    if t.model != HardyModel::U2 || u.factor() != DomainFactor::TypeI(2) {
        return Err(Error::Unsupported("A_u/B_u splitting is defined on U(2)".into()));
    }
    let work = Truncation { l_min: -2, l_max: 1, ..t.clone() };
    let sym = conj_linear(u)?;
    let orders = work.resolve_orders(sym.degree())?;
    let norms = basis_normalizations(work.d_max)?;
    let all = work.indices();
    let level0: Vec<BasisIndex> = all.iter().copied().filter(|b| b.l == 0).collect();
    let full = assemble(&sym, HardyModel::U2, &all, &level0, &orders, &norms);

    let pick = |pred: &dyn Fn(&BasisIndex) -> bool| -> CMatrix {
        let rows: Vec<usize> = (0..all.len()).filter(|&r| pred(&all[r])).collect();
        CMatrix::from_fn(rows.len(), level0.len(), |i, j| full[(rows[i], j)])
    };
    let a = pick(&|b| b.l == -1);
    let b = pick(&|b| b.l == 0);
    let rest = pick(&|b| b.l != -1 && b.l != 0 && b.d < work.d_max);
    let leak = if rest.nrows() == 0 { 0.0 } else { operator_norm(&rest) };
    if leak > LEAK_TOL {
        return Err(Error::Leak { leak });
    }
    let sector = level0.iter().map(|b| (b.d, b.j, b.k)).collect();
    Ok(SplitAB { sector, a, b, leak })
}

/// Max deviation of the full multiplication matrix of `conj(ℓ_u)` on `t` from
/// `(down-shift ⊗ A_u) + (1 ⊗ B_u)`.
pub fn split_consistency(u: &Element, t: &Truncation) -> Result<f64> {
    let split = extract_ab(u, t)?;
    let op = multiplication_matrix(&conj_linear(u)?, t, false)?;
    let per_level = split.sector.len();
    let mut worst = 0.0f64;
    for (r, br) in op.indices.iter().enumerate() {
        for (c, bc) in op.indices.iter().enumerate() {
            let (ri, ci) = (r % per_level, c % per_level);
            let expect = if br.l == bc.l - 1 {
                split.a[(ri, ci)]
            } else if br.l == bc.l {
                split.b[(ri, ci)]
            } else {
                Complex64::new(0.0, 0.0)
            };
            worst = worst.max((op.matrix[(r, c)] - expect).norm());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, haar_unitary, max_abs_diff};
    use crate::quadrature::haar_quadrature_u2;
    use crate::shilov::rng_from_seed;
    use crate::symbol::LaurentTerm;

    fn u2_point(m: &CMatrix) -> BoundaryPoint {
        BoundaryPoint::new(HardyModel::U2.domain(), vec![Element::new(DomainFactor::TypeI(2), m.clone()).unwrap()]).unwrap()
    }

    fn identity(n: usize) -> CMatrix {
        CMatrix::identity(n, n)
    }

    fn to4(m: &CMatrix) -> [Complex64; 4] {
        [m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]]
    }

    #[test]
    fn basis_eval_examples() {
        let lam = Complex64::from_polar(1.0, 0.7);
        let v = basis_eval(&BasisIndex::circle(3), &BoundaryPoint::circle(lam)).unwrap();
        assert!((v - lam.powi(3)).norm() < 1e-15);
        let mut rng = rng_from_seed(1);
        let u = haar_unitary(2, &mut rng);
        let v = basis_eval(&BasisIndex { l: 0, d: 0, j: 0, k: 0 }, &u2_point(&u)).unwrap();
        assert!((v - 1.0).norm() < 1e-15);
        let v = basis_eval(&BasisIndex { l: 1, d: 1, j: 0, k: 0 }, &u2_point(&identity(2))).unwrap();
        assert!((v - 2f64.sqrt()).norm() < 1e-12);
        assert!(matches!(
            basis_eval(&BasisIndex { l: 0, d: 1, j: 2, k: 0 }, &u2_point(&identity(2))),
            Err(Error::IndexOutOfRange(_))
        ));
        assert!(basis_eval(&BasisIndex { l: 0, d: 1, j: 0, k: 0 }, &BoundaryPoint::circle(lam)).is_err());
    }

    #[test]
    fn sym_power_is_a_unitary_representation() {
        let mut rng = rng_from_seed(5);
        let u = haar_unitary(2, &mut rng);
        let v = haar_unitary(2, &mut rng);
        let uv = &u * &v;
        for d in 0..5 {
            let (du, dv, duv) = (sym_power(&to4(&u), d), sym_power(&to4(&v), d), sym_power(&to4(&uv), d));
            assert!(max_abs_diff(&(du.adjoint() * &du), &identity(d + 1)) < 1e-12);
            // p ↦ p((x,y)u) composes as D(uv) = D(u) D(v)
            assert!(max_abs_diff(&duv, &(&du * &dv)) < 1e-12, "d={d}");
        }
        // degree one is u itself
        assert!(max_abs_diff(&sym_power(&to4(&u), 1), &u) < 1e-14);
    }

    #[test]
    fn normalizations_match_dimension() {
        let n = basis_normalizations(4).unwrap();
        for (d, v) in n.iter().enumerate() {
            assert!((v - ((d + 1) as f64).sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn basis_norm_by_direct_quadrature() {
        let o = QuadratureOrders::exact_for(8, 8, 5);
        let b = BasisIndex { l: -1, d: 2, j: 1, k: 2 };
        let v = haar_quadrature_u2(|m| basis_eval(&b, &u2_point(m)).unwrap().norm_sqr().into(), &o);
        assert!((v - 1.0).norm() < 1e-12);
    }

    #[test]
    fn gram_examples() {
        let g = gram_matrix(&Truncation::circle(-2, 2).unwrap()).unwrap();
        assert_eq!(g.shape(), (5, 5));
        assert!(max_abs_diff(&g, &identity(5)) < 1e-13);
        let g = gram_matrix(&Truncation::u2(0, 0, 1).unwrap()).unwrap();
        assert_eq!(g.shape(), (5, 5));
        assert!(max_abs_diff(&g, &identity(5)) < 1e-12);
        let t = Truncation::u2(0, 1, 2).unwrap();
        let g = gram_matrix(&t).unwrap();
        let idx = t.indices();
        for (a, ba) in idx.iter().enumerate() {
            for (b, bb) in idx.iter().enumerate() {
                if ba.l == 1 && bb.l == 0 {
                    assert!(g[(a, b)].norm() < 1e-12);
                }
            }
        }
        assert!(max_abs_diff(&g, &identity(idx.len())) < 1e-12);
    }

    #[test]
    fn split_assembly_agrees_with_direct_gram() {
        let t = Truncation::u2(-1, 1, 2).unwrap();
        let one = Symbol::constant(&HardyModel::U2.domain(), c(1.0, 0.0));
        let m = multiplication_matrix(&one, &t, false).unwrap();
        let g = gram_matrix(&t).unwrap();
        assert!(max_abs_diff(&m.matrix, &g) < 1e-12);
        assert!(max_abs_diff(&m.matrix, &identity(t.len())) < 1e-12);
    }

    #[test]
    fn circle_shift() {
        let t = Truncation::circle(-2, 2).unwrap();
        let z = Symbol::circle_fn("z", Some(1), |l| l);
        let m = multiplication_matrix(&z, &t, false).unwrap().matrix;
        for a in 0..5 {
            for b in 0..5 {
                let want = if a == b + 1 { 1.0 } else { 0.0 };
                assert!((m[(a, b)] - want).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn norm_is_a_level_shift_and_conj_is_adjoint() {
        let t = Truncation::u2(-2, 2, 2).unwrap();
        let dom = HardyModel::U2.domain();
        let n = Symbol::norm_power(&dom, &[1]).unwrap();
        let op = multiplication_matrix(&n, &t, false).unwrap();
        for (a, ba) in op.indices.iter().enumerate() {
            for (b, bb) in op.indices.iter().enumerate() {
                let shifted = ba.l == bb.l + 1 && (ba.d, ba.j, ba.k) == (bb.d, bb.j, bb.k);
                let want = if shifted { 1.0 } else { 0.0 };
                assert!((op.matrix[(a, b)] - want).norm() < 1e-12, "{ba:?} {bb:?}");
            }
        }
        let nbar = multiplication_matrix(&n.conj(), &t, false).unwrap();
        assert!(max_abs_diff(&nbar.matrix, &op.matrix.adjoint()) < 1e-12);
    }

    #[test]
    fn hardy_projection_kills_negative_levels() {
        let t = Truncation::u2(-2, 2, 1).unwrap();
        let one = Symbol::constant(&HardyModel::U2.domain(), c(1.0, 0.0));
        let full = multiplication_matrix(&one, &t, false).unwrap();
        let p = hardy_projection(&t);
        let compressed = &p.matrix * &full.matrix * &p.matrix;
        for (a, b) in t.indices().iter().enumerate() {
            let want = if b.l >= 0 { 1.0 } else { 0.0 };
            assert_eq!(p.matrix[(a, a)].re, want);
            assert!((compressed[(a, a)] - want).norm() < 1e-12);
        }
        let op = multiplication_matrix(&one, &t, true).unwrap();
        assert!(op.hardy_compressed);
        assert!(op.indices.iter().all(|b| b.l >= 0));
        assert!(max_abs_diff(&op.matrix, &identity(op.dim())) < 1e-12);
    }

    #[test]
    fn tensor_reduction_for_functions_of_the_norm() {
        let coeffs = vec![LaurentTerm(2, 1.0, 0.0), LaurentTerm(-1, 0.3, -0.2), LaurentTerm(0, 0.1, 0.0)];
        let f_u2 = Symbol::from_spec(&HardyModel::U2.domain(), &SymbolSpec::NormLaurent { factor: 0, coeffs: coeffs.clone() }).unwrap();
        let f_c = Symbol::from_spec(&ProductDomain::circle(), &SymbolSpec::NormLaurent { factor: 0, coeffs }).unwrap();
        let t = Truncation::u2(-2, 3, 2).unwrap();
        let op = multiplication_matrix(&f_u2, &t, false).unwrap();
        let circ = multiplication_matrix(&f_c, &Truncation::circle(-2, 3).unwrap(), false).unwrap();
        for (a, ba) in op.indices.iter().enumerate() {
            for (b, bb) in op.indices.iter().enumerate() {
                let want = if (ba.d, ba.j, ba.k) == (bb.d, bb.j, bb.k) {
                    circ.matrix[((ba.l + 2) as usize, (bb.l + 2) as usize)]
                } else {
                    Complex64::new(0.0, 0.0)
                };
                assert!((op.matrix[(a, b)] - want).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn adjointness_for_smooth_symbols() {
        let dom = HardyModel::U2.domain();
        let spec = SymbolSpec::ExpPoly { degree: 2, terms: 4, amplitude: 0.3, seed: 11 };
        let phi = Symbol::from_spec(&dom, &spec).unwrap();
        let t = Truncation::u2(-1, 1, 1).unwrap();
        let m = multiplication_matrix(&phi, &t, false).unwrap();
        let mc = multiplication_matrix(&phi.conj(), &t, false).unwrap();
        assert!(max_abs_diff(&mc.matrix, &m.matrix.adjoint()) < 1e-12);
    }

    #[test]
    fn coarse_quadrature_is_rejected() {
        let dom = HardyModel::U2.domain();
        let n3 = Symbol::norm_power(&dom, &[3]).unwrap();
        let t = Truncation::u2(0, 2, 2).unwrap().with_quadrature(QuadratureOrders { phase: 4, xi: 4, gauss: 3 });
        assert!(matches!(multiplication_matrix(&n3, &t, false), Err(Error::QuadratureTooCoarse(_))));
        // smooth symbols without a declared degree are not checked
        let e = Symbol::from_spec(&dom, &SymbolSpec::ExpPoly { degree: 1, terms: 2, amplitude: 0.1, seed: 1 }).unwrap();
        assert!(multiplication_matrix(&e, &t, false).is_ok());
        assert!(Truncation::u2(1, 2, 0).is_err());
        assert!(Truncation { model: HardyModel::Circle, l_min: 0, l_max: 1, d_max: 1, quadrature: None }.validated().is_err());
    }

    #[test]
    fn ab_split() {
        let t = Truncation::u2(-2, 2, 2).unwrap();
        let zero = Element::zeros(DomainFactor::TypeI(2));
        let s = extract_ab(&zero, &t).unwrap();
        assert!(s.a.iter().all(|z| z.norm() < 1e-15) && s.b.iter().all(|z| z.norm() < 1e-15));

        let e11 = Element::from_fn(DomainFactor::TypeI(2), |i, j| c((i == 0 && j == 0) as u8 as f64, 0.0)).unwrap();
        let s = extract_ab(&e11, &t).unwrap();
        assert!(s.leak <= LEAK_TOL);
        assert!(s.a.norm() > 0.1 && s.b.norm() > 0.1);
        // A raises the degree, B lowers it
        for (r, &(dr, _, _)) in s.sector.iter().enumerate() {
            for (col, &(dc, _, _)) in s.sector.iter().enumerate() {
                if dr != dc + 1 {
                    assert!(s.a[(r, col)].norm() < 1e-12);
                }
                if dr + 1 != dc {
                    assert!(s.b[(r, col)].norm() < 1e-12);
                }
            }
        }
        assert!(split_consistency(&e11, &t).unwrap() < 1e-12);
        let mut rng = rng_from_seed(3);
        let u = Element::new(DomainFactor::TypeI(2), crate::linalg::ginibre(2, &mut rng)).unwrap();
        assert!(split_consistency(&u, &t).unwrap() < 1e-12);
    }

    #[test]
    fn dump_formats() {
        let t = Truncation::circle(-1, 1).unwrap();
        let z = Symbol::circle_fn("z", Some(1), |l| l);
        let op = multiplication_matrix(&z, &t, false).unwrap();
        let raw = op.dump(DumpEncoding::Base64).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&raw).unwrap();
        assert_eq!(v["rows"], 3);
        let bytes = base64::engine::general_purpose::STANDARD.decode(v["data"].as_str().unwrap()).unwrap();
        assert_eq!(bytes, op.matrix_bytes());
        let bin = op.dump(DumpEncoding::Binary).unwrap();
        let nl = bin.iter().position(|&b| b == b'\n').unwrap();
        assert_eq!(&bin[nl + 1..], &op.matrix_bytes()[..]);
        // entry (1, 0) of the shift is 1: row-major offset 3 complexes
        let re = f64::from_le_bytes(bin[nl + 1 + 48..nl + 1 + 56].try_into().unwrap());
        assert!((re - 1.0).abs() < 1e-14);
    }
}
