//! Winding vectors of non-vanishing symbols on product Shilov boundaries.
//!
//! For a symbol `φ` on `S = S_1 x ... x S_n` there are unique integers
//! `k_1, ..., k_n` with `φ = (prod_j N_j^{k_j}) e^ψ`. Along the generator loop
//! `t -> (..., e^{it} u_j, ...)` the factor `N_j^{k_j}` winds `r_j k_j` times
//! and `e^ψ` does not wind, so each `k_j` is read off a single loop winding
//! divided by the rank `r_j`.

use std::f64::consts::{FRAC_PI_2, TAU};

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::ProductDomain;
use crate::error::{Error, Result};
use crate::shilov::{rng_from_seed, sample_product_boundary, BoundaryPoint};
use crate::symbol::{Symbol, SymbolSpec};

/// Parameters of the adaptive phase unwrapping.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoopParams {
    /// Uniform samples on `[0, 2π]` before refinement.
    pub initial_samples: usize,
    /// Bisection depth limit per initial interval.
    pub max_depth: usize,
    /// Largest accepted phase increment between neighbouring samples.
    pub max_jump: f64,
    /// Abort when `|f| < min_modulus_ratio * max |f|` on any sample.
    pub min_modulus_ratio: f64,
    /// Relative tolerance for `f(0) = f(2π)`.
    pub closure_tol: f64,
}

impl Default for LoopParams {
    fn default() -> Self {
        Self { initial_samples: 64, max_depth: 20, max_jump: FRAC_PI_2, min_modulus_ratio: 1e-7, closure_tol: 1e-8 }
    }
}

/// Result of unwrapping one closed loop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoopWinding {
    pub winding: i64,
    pub min_abs: f64,
    pub max_abs: f64,
    pub depth: usize,
}

/// Winding number of a closed loop `f: [0, 2π] -> C \ {0}`.
pub fn loop_winding<F>(f: F, params: &LoopParams) -> Result<LoopWinding>
where
    F: Fn(f64) -> Complex64,
{
    let n = params.initial_samples.max(4);
    let ts: Vec<f64> = (0..=n).map(|i| TAU * i as f64 / n as f64).collect();
    let vals: Vec<Complex64> = ts.iter().map(|&t| f(t)).collect();
    let max_abs = vals.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if !(max_abs > 0.0) || !max_abs.is_finite() {
        return Err(Error::NearZero { value: max_abs, scale: max_abs });
    }
    let gap = (vals[0] - vals[n]).norm();
    if gap > params.closure_tol * max_abs {
        return Err(Error::OpenLoop(gap));
    }
    let mut st = Unwrap { params, floor: params.min_modulus_ratio * max_abs, scale: max_abs, min_abs: f64::INFINITY, depth: 0 };
    for v in &vals {
        st.guard(*v)?;
    }
    let mut total = 0.0;
    for i in 0..n {
        total += st.segment(&f, ts[i], vals[i], ts[i + 1], vals[i + 1], 0)?;
    }
    let turns = total / TAU;
    let winding = turns.round();
    if (turns - winding).abs() > 1e-6 {
        return Err(Error::NonIntegralWinding(turns - winding));
    }
    Ok(LoopWinding { winding: winding as i64, min_abs: st.min_abs, max_abs, depth: st.depth })
}

struct Unwrap<'a> {
    params: &'a LoopParams,
    floor: f64,
    scale: f64,
    min_abs: f64,
    depth: usize,
}

impl Unwrap<'_> {
    fn guard(&mut self, v: Complex64) -> Result<()> {
        let a = v.norm();
        self.min_abs = self.min_abs.min(a);
        if !(a >= self.floor) {
            return Err(Error::NearZero { value: a, scale: self.scale });
        }
        Ok(())
    }

    fn segment<F: Fn(f64) -> Complex64>(
        &mut self,
        f: &F,
        t0: f64,
        f0: Complex64,
        t1: f64,
        f1: Complex64,
        depth: usize,
    ) -> Result<f64> {
        let jump = (f1 / f0).arg();
        if jump.abs() < self.params.max_jump {
            return Ok(jump);
        }
        if depth >= self.params.max_depth {
            return Err(Error::RefinementDepth(self.params.max_depth));
        }
        self.depth = self.depth.max(depth + 1);
        let tm = 0.5 * (t0 + t1);
        let fm = f(tm);
        self.guard(fm)?;
        Ok(self.segment(f, t0, f0, tm, fm, depth + 1)? + self.segment(f, tm, fm, t1, f1, depth + 1)?)
    }
}

/// The integers `k_1, ..., k_n` of the factorization `φ = prod N_j^{k_j} e^ψ`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct WindingVector(pub Vec<i64>);

impl WindingVector {
    pub fn zeros(n: usize) -> Self {
        Self(vec![0; n])
    }

    pub fn unit(n: usize, j: usize, m: i64) -> Self {
        let mut v = vec![0; n];
        v[j] = m;
        Self(v)
    }

    pub fn as_slice(&self) -> &[i64] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&k| k == 0)
    }
}

/// Diagnostics of a winding-vector computation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindingReport {
    pub k: WindingVector,
    /// `W_j = r_j k_j`, the winding of the `j`-th generator loop.
    pub raw_windings: Vec<i64>,
    pub ranks: Vec<usize>,
    pub base_point_count: usize,
    pub min_abs_symbol: f64,
    pub refinement_depth: usize,
}

/// Computes the winding vector of `phi` from `base_points` random base points
/// per factor. All base points must agree and each `W_j` must be divisible by
/// the rank `r_j`.
pub fn winding_vector(phi: &Symbol, base_points: usize, seed: u64) -> Result<WindingReport> {
    winding_vector_with(phi, base_points, seed, &LoopParams::default())
}

pub fn winding_vector_with(phi: &Symbol, base_points: usize, seed: u64, params: &LoopParams) -> Result<WindingReport> {
    let domain = phi.domain().clone();
    let n = domain.len();
    let base_points = base_points.max(1);
    let mut rng = rng_from_seed(seed);
    let bases = (0..base_points)
        .map(|_| sample_product_boundary(&domain, &mut rng))
        .collect::<Result<Vec<_>>>()?;

    let jobs: Vec<(usize, usize)> = (0..n).flat_map(|j| (0..base_points).map(move |b| (j, b))).collect();
    let results: Vec<Result<LoopWinding>> = jobs
        .par_iter()
        .map(|&(j, b)| {
            let base = &bases[b];
            loop_winding(|t| phi.eval(&base.rotate_factor(j, Complex64::from_polar(1.0, t))), params)
        })
        .collect();

    // first error in job order keeps reports deterministic
    let results = results.into_iter().collect::<Result<Vec<_>>>()?;
    let ranks = domain.ranks();
    let mut raw = Vec::with_capacity(n);
    let mut k = Vec::with_capacity(n);
    let (mut min_abs, mut depth) = (f64::INFINITY, 0);
    for j in 0..n {
        let chunk = &results[j * base_points..(j + 1) * base_points];
        for lw in chunk {
            min_abs = min_abs.min(lw.min_abs);
            depth = depth.max(lw.depth);
        }
        let windings: Vec<i64> = chunk.iter().map(|lw| lw.winding).collect();
        if windings.iter().any(|&w| w != windings[0]) {
            return Err(Error::BasePointDisagreement { factor: j, windings });
        }
        let w = windings[0];
        let r = ranks[j] as i64;
        if w % r != 0 {
            return Err(Error::NotDivisible { factor: j, winding: w, rank: ranks[j] });
        }
        raw.push(w);
        k.push(w / r);
    }
    Ok(WindingReport {
        k: WindingVector(k),
        raw_windings: raw,
        ranks,
        base_point_count: base_points,
        min_abs_symbol: min_abs,
        refinement_depth: depth,
    })
}

/// `θ(p) = prod_j N_j(p_j)^{k_j}`.
pub fn theta_eval(domain: &ProductDomain, k: &WindingVector, p: &BoundaryPoint) -> Complex64 {
    debug_assert_eq!(p.domain(), domain);
    p.norms().iter().zip(&k.0).map(|(n, &kj)| n.powi(kj as i32)).product()
}

/// The symbol `θ` attached to a winding vector.
pub fn theta_symbol(domain: &ProductDomain, k: &WindingVector) -> Result<Symbol> {
    Symbol::from_spec(domain, &SymbolSpec::norm_pow(k.0.clone()))
}

/// Winding of a composite loop `t -> (e^{i m_j t} u_j)_j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompositeLoop {
    pub multipliers: Vec<i64>,
    pub winding: i64,
}

/// Outcome of [`factorize_check`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorizationReport {
    pub passed: bool,
    pub k: WindingVector,
    /// Winding vector of `φ θ^{-1}` over the generator loops.
    pub residual: WindingVector,
    pub residual_raw: Vec<i64>,
    pub composite: Vec<CompositeLoop>,
}

/// Checks that `φ θ^{-1}` has zero winding on `loops` random generator loops
/// per factor and on `loops` random composite loops, which certifies that it
/// admits a continuous logarithm along all of them.
pub fn factorize_check(phi: &Symbol, k: &WindingVector, loops: usize, seed: u64) -> Result<FactorizationReport> {
    let domain = phi.domain().clone();
    let n = domain.len();
    if k.0.len() != n {
        return Err(Error::Spec(format!("winding vector of length {} for {n} factors", k.0.len())));
    }
    let residual_symbol = phi.mul(&theta_symbol(&domain, k)?.powi(-1))?;
    let report = winding_vector(&residual_symbol, loops, seed)?;

    let params = LoopParams::default();
    let mut rng = rng_from_seed(seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut specs = Vec::with_capacity(loops.max(1));
    for _ in 0..loops.max(1) {
        let base = sample_product_boundary(&domain, &mut rng)?;
        let mut m: Vec<i64> = (0..n).map(|_| rng.gen_range(-2..=2)).collect();
        if m.iter().all(|&x| x == 0) {
            m[rng.gen_range(0..n)] = 1;
        }
        specs.push((base, m));
    }
    let composite = specs
        .par_iter()
        .map(|(base, m)| {
            let lw = loop_winding(
                |t| {
                    let lambdas: Vec<Complex64> = m.iter().map(|&mj| Complex64::from_polar(1.0, mj as f64 * t)).collect();
                    residual_symbol.eval(&base.rotate_all(&lambdas))
                },
                &params,
            )?;
            Ok(CompositeLoop { multipliers: m.clone(), winding: lw.winding })
        })
        .collect::<Vec<Result<_>>>()
        .into_iter()
        .collect::<Result<Vec<_>>>()?;

    let passed = report.k.is_zero() && composite.iter().all(|c| c.winding == 0);
    Ok(FactorizationReport { passed, k: k.clone(), residual: report.k, residual_raw: report.raw_windings, composite })
}

/// All `k'` in the box `center ± radius` for which [`factorize_check`] passes.
pub fn uniqueness_search(
    phi: &Symbol,
    center: &WindingVector,
    radius: i64,
    loops: usize,
    seed: u64,
) -> Result<Vec<WindingVector>> {
    let n = center.0.len();
    let side = (2 * radius + 1) as usize;
    let total = side.pow(n as u32);
    let mut hits = Vec::new();
    for idx in 0..total {
        let mut rem = idx;
        let cand: Vec<i64> = center
            .0
            .iter()
            .map(|&c| {
                let off = (rem % side) as i64 - radius;
                rem /= side;
                c + off
            })
            .collect();
        let cand = WindingVector(cand);
        if factorize_check(phi, &cand, loops, seed)?.passed {
            hits.push(cand);
        }
    }
    Ok(hits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::DomainFactor;
    use crate::element::Element;
    use crate::linalg::c;
    use nalgebra::DMatrix;
    use std::f64::consts::PI;

    fn brute_force_winding(f: impl Fn(f64) -> Complex64, samples: usize) -> i64 {
        // dense uniform grid, plain principal-branch increments
        let mut total = 0.0;
        let mut prev = f(0.0);
        for i in 1..=samples {
            let cur = f(TAU * i as f64 / samples as f64);
            total += (cur / prev).arg();
            prev = cur;
        }
        (total / TAU).round() as i64
    }

    #[test]
    fn loop_examples() {
        let p = LoopParams::default();
        assert_eq!(loop_winding(|t| Complex64::from_polar(1.0, 3.0 * t), &p).unwrap().winding, 3);
        assert_eq!(loop_winding(|_| c(-2.0, 0.5), &p).unwrap().winding, 0);
        let f = |t: f64| {
            Complex64::from_polar(1.0, -2.0 * t) * (c(0.4 * t.cos(), 0.1 * (3.0 * t).sin())).exp()
        };
        let oracle = brute_force_winding(f, 100_000);
        assert_eq!(oracle, -2);
        assert_eq!(loop_winding(f, &p).unwrap().winding, oracle);
    }

    #[test]
    fn refinement_handles_fast_loops() {
        // 37 turns over 64 samples: every initial increment is above π/2
        let p = LoopParams::default();
        let lw = loop_winding(|t| Complex64::from_polar(2.0, 37.0 * t), &p).unwrap();
        assert_eq!(lw.winding, 37);
        assert_eq!(lw.depth, 2);
        let shallow = LoopParams { max_depth: 1, ..LoopParams::default() };
        assert!(matches!(loop_winding(|t| Complex64::from_polar(1.0, 37.0 * t), &shallow), Err(Error::RefinementDepth(1))));
    }

    #[test]
    fn loop_errors() {
        let p = LoopParams::default();
        // vanishes at t = π
        let r = loop_winding(|t| Complex64::from_polar(1.0, t) - c(-1.0, 0.0), &p);
        assert!(matches!(r, Err(Error::NearZero { .. })));
        let r = loop_winding(|t| c(1.0 + t, 0.0), &p);
        assert!(matches!(r, Err(Error::OpenLoop(_))));
    }

    #[test]
    fn determinant_on_u2() {
        let d = ProductDomain::single(DomainFactor::TypeI(2)).unwrap();
        let rep = winding_vector(&Symbol::norm_power(&d, &[1]).unwrap(), 4, 1).unwrap();
        assert_eq!(rep.k, WindingVector(vec![1]));
        assert_eq!(rep.raw_windings, vec![2]);
        let five = Symbol::constant(&d, c(5.0, 0.0));
        assert!(winding_vector(&five, 3, 2).unwrap().k.is_zero());
    }

    #[test]
    fn product_domain_example() {
        // φ(u, v) = N1(u)^2 N2(v)^{-1} exp(0.3 tr u) on I2 x I1
        let d: ProductDomain = "I2xI1".parse().unwrap();
        let n2 = Symbol::norm_power(&d, &[2, -1]).unwrap();
        let tr = Symbol::from_fn(d.clone(), "exp(0.3 tr u)", None, |p| (p.part(0).data().trace() * 0.3).exp());
        let phi = n2.mul(&tr).unwrap();
        // oracle: dense-grid unwrapping along each generator loop at a fixed base point
        let base = sample_product_boundary(&d, &mut rng_from_seed(17)).unwrap();
        let w0 = brute_force_winding(|t| phi.eval(&base.rotate_factor(0, Complex64::from_polar(1.0, t))), 100_000);
        let w1 = brute_force_winding(|t| phi.eval(&base.rotate_factor(1, Complex64::from_polar(1.0, t))), 100_000);
        assert_eq!((w0, w1), (4, -1));
        let rep = winding_vector(&phi, 8, 3).unwrap();
        assert_eq!(rep.k, WindingVector(vec![2, -1]));
        assert_eq!(rep.raw_windings, vec![4, -1]);
    }

    #[test]
    fn theta_examples() {
        let d = ProductDomain::single(DomainFactor::TypeI(2)).unwrap();
        let p = sample_product_boundary(&d, &mut rng_from_seed(1)).unwrap();
        assert_eq!(theta_eval(&d, &WindingVector::zeros(1), &p), c(1.0, 0.0));
        let diag = Element::new(
            DomainFactor::TypeI(2),
            DMatrix::from_row_slice(2, 2, &[c(0., 1.), c(0., 0.), c(0., 0.), c(1., 0.)]),
        )
        .unwrap();
        let p = BoundaryPoint::new(d.clone(), vec![diag]).unwrap();
        assert!((theta_eval(&d, &WindingVector(vec![1]), &p) - c(0., 1.)).norm() < 1e-15);

        let d4 = ProductDomain::single(DomainFactor::TypeIV(3)).unwrap();
        let e = Element::vector(DomainFactor::TypeIV(3), &[Complex64::from_polar(1.0, PI / 6.0), c(0., 0.), c(0., 0.)]).unwrap();
        let p = BoundaryPoint::new(d4.clone(), vec![e]).unwrap();
        let v = theta_eval(&d4, &WindingVector(vec![-2]), &p);
        assert!((v - Complex64::from_polar(1.0, -2.0 * PI / 3.0)).norm() < 1e-14);
    }

    #[test]
    fn factorization_examples() {
        let d = ProductDomain::single(DomainFactor::TypeI(2)).unwrap();
        let n3 = Symbol::norm_power(&d, &[3]).unwrap();
        let ok = factorize_check(&n3, &WindingVector(vec![3]), 3, 1).unwrap();
        assert!(ok.passed);
        assert!(ok.residual.is_zero() && ok.composite.iter().all(|c| c.winding == 0));
        let bad = factorize_check(&n3, &WindingVector(vec![2]), 3, 1).unwrap();
        assert!(!bad.passed);
        assert_eq!(bad.residual, WindingVector(vec![1]));

        let spec = SymbolSpec::product(vec![
            SymbolSpec::norm_pow(vec![-1]),
            SymbolSpec::ExpPoly { degree: 2, terms: 6, amplitude: 0.4, seed: 21 },
        ]);
        let phi = Symbol::from_spec(&d, &spec).unwrap();
        let k = winding_vector(&phi, 4, 5).unwrap().k;
        assert_eq!(k, WindingVector(vec![-1]));
        assert!(factorize_check(&phi, &k, 4, 6).unwrap().passed);
    }

    #[test]
    fn divisibility_is_enforced() {
        // tr(u) winds once along t -> e^{it} u, which no power of det can match
        let d = ProductDomain::single(DomainFactor::TypeI(2)).unwrap();
        let tr = Symbol::from_fn(d, "tr u", Some(1), |p| p.part(0).data().trace());
        assert!(matches!(winding_vector(&tr, 2, 1), Err(Error::NotDivisible { winding: 1, rank: 2, .. })));
    }
}
