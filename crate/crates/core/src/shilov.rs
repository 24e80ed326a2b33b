//! Shilov boundaries of the classical factors and of their products.
//!
//! The Shilov boundary of a factor is its set of maximal tripotents; for a
//! product it is the product of the factor boundaries. The samplers below
//! cover the boundary and every output is validated by the predicates in
//! [`crate::jordan`]. Only the type I sampler is exactly Haar distributed.

use std::f64::consts::TAU;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::domain::{DomainFactor, ProductDomain};
use crate::element::Element;
use crate::error::{Error, Result};
use crate::jordan::{generic_norm, is_maximal_tripotent, Tolerances};
use crate::linalg::haar_unitary;
use crate::pfaffian::symplectic_j;

/// Deterministic generator used throughout the crate.
pub type SampleRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SampleRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A point of the Shilov boundary of a product domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PointRepr", into = "PointRepr")]
pub struct BoundaryPoint {
    domain: ProductDomain,
    parts: Vec<Element>,
}

impl BoundaryPoint {
    /// Validated constructor: each part must be a maximal tripotent of its factor
    /// with unimodular generic norm.
    pub fn new(domain: ProductDomain, parts: Vec<Element>) -> Result<Self> {
        Self::with_tol(domain, parts, &Tolerances::default())
    }

    pub fn with_tol(domain: ProductDomain, parts: Vec<Element>, tol: &Tolerances) -> Result<Self> {
        if parts.len() != domain.len() {
            return Err(Error::Shape(format!("{} parts for {} factors", parts.len(), domain.len())));
        }
        for (f, p) in domain.factors().iter().zip(&parts) {
            if p.factor() != *f {
                return Err(Error::FactorMismatch { expected: f.to_string(), found: p.factor().to_string() });
            }
            check_boundary_part(p, tol).map_err(|detail| Error::NotMaximalTripotent(detail))?;
        }
        Ok(Self { domain, parts })
    }

    /// Skips validation; callers guarantee the invariants (e.g. circle actions
    /// on validated points).
    pub(crate) fn from_parts_unchecked(domain: ProductDomain, parts: Vec<Element>) -> Self {
        Self { domain, parts }
    }

    /// Circle point `λ` of `I1`.
    pub fn circle(lambda: Complex64) -> Self {
        let e = Element::from_raw(DomainFactor::TypeI(1), DMatrix::from_element(1, 1, lambda));
        Self { domain: ProductDomain::circle(), parts: vec![e] }
    }

    pub fn domain(&self) -> &ProductDomain {
        &self.domain
    }

    pub fn parts(&self) -> &[Element] {
        &self.parts
    }

    pub fn part(&self, j: usize) -> &Element {
        &self.parts[j]
    }

    /// Generic norms `N_j(u_j)` of all parts.
    pub fn norms(&self) -> Vec<Complex64> {
        self.parts.iter().map(generic_norm).collect()
    }

    /// The point with part `j` multiplied by `λ`, `|λ| = 1`.
    pub fn rotate_factor(&self, j: usize, lambda: Complex64) -> Self {
        let mut parts = self.parts.clone();
        parts[j] = parts[j].scale(lambda);
        Self { domain: self.domain.clone(), parts }
    }

    /// The point with every part `j` multiplied by `λ_j`.
    pub fn rotate_all(&self, lambdas: &[Complex64]) -> Self {
        let parts = self.parts.iter().zip(lambdas).map(|(p, &l)| p.scale(l)).collect();
        Self { domain: self.domain.clone(), parts }
    }

    /// True when every part has `N_j = 1` within `tol`.
    pub fn is_reduced(&self, tol: &Tolerances) -> bool {
        self.norms().iter().all(|n| (n - Complex64::new(1.0, 0.0)).norm() <= tol.eq_tol)
    }
}

fn check_boundary_part(p: &Element, tol: &Tolerances) -> std::result::Result<(), String> {
    if !is_maximal_tripotent(p, tol) {
        return Err(format!("{} part is not a maximal tripotent", p.factor()));
    }
    let n = generic_norm(p).norm();
    if (n - 1.0).abs() > tol.eq_tol {
        return Err(format!("{} part has |N| = {n}", p.factor()));
    }
    Ok(())
}

/// Samples a maximal tripotent of `factor`.
///
/// * I: Haar unitary.
/// * II: `v J v^T` with `v` a Haar unitary.
/// * III: `v v^T` with `v` a Haar unitary.
/// * IV: `e^{iθ} x` with `θ` uniform and `x` uniform on the real unit sphere.
pub fn sample_boundary<R: Rng + ?Sized>(factor: DomainFactor, rng: &mut R) -> Result<Element> {
    let data = match factor {
        DomainFactor::TypeI(n) => haar_unitary(n, rng),
        DomainFactor::TypeII(m) => {
            let v = haar_unitary(m, rng);
            &v * symplectic_j(m / 2) * v.transpose()
        }
        DomainFactor::TypeIII(n) => {
            let v = haar_unitary(n, rng);
            &v * v.transpose()
        }
        DomainFactor::TypeIV(n) => {
            let x: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
            let len = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            let theta: f64 = rng.gen_range(0.0..TAU);
            let ph = Complex64::from_polar(1.0, theta);
            DMatrix::from_iterator(n, 1, x.into_iter().map(|v| ph * (v / len)))
        }
    };
    // the congruences above produce (anti)symmetric matrices up to roundoff
    let data = match factor {
        DomainFactor::TypeII(_) => (&data - data.transpose()).scale(0.5),
        DomainFactor::TypeIII(_) => (&data + data.transpose()).scale(0.5),
        _ => data,
    };
    let e = Element::from_raw(factor, data);
    check_boundary_part(&e, &Tolerances::default())
        .map_err(|detail| Error::SamplerValidation { factor: factor.to_string(), detail })?;
    Ok(e)
}

/// Independent samples of every factor.
pub fn sample_product_boundary<R: Rng + ?Sized>(domain: &ProductDomain, rng: &mut R) -> Result<BoundaryPoint> {
    let parts = domain
        .factors()
        .iter()
        .map(|&f| sample_boundary(f, rng))
        .collect::<Result<Vec<_>>>()?;
    Ok(BoundaryPoint::from_parts_unchecked(domain.clone(), parts))
}

/// Gaussian element of `factor` scaled to unit Frobenius norm; not on the
/// boundary, used for algebraic identities.
pub fn random_element<R: Rng + ?Sized>(factor: DomainFactor, rng: &mut R) -> Element {
    let (r, c) = factor.shape();
    let m = DMatrix::from_fn(r, c, |_, _| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    let m = match factor {
        DomainFactor::TypeII(_) => (&m - m.transpose()).scale(0.5),
        DomainFactor::TypeIII(_) => (&m + m.transpose()).scale(0.5),
        _ => m,
    };
    let norm = m.norm();
    Element::from_raw(factor, m.unscale(norm))
}

/// Moves a maximal tripotent onto the reduced boundary `N = 1`.
///
/// Returns `(e^{-iθ/r} e, θ)` where `N(e) = e^{iθ}`, `θ ∈ [0, 2π)` and `r` is the
/// rank. The principal `r`-th root is used.
pub fn reduce_phase(e: &Element) -> Result<(Element, f64)> {
    let tol = Tolerances::default();
    check_boundary_part(e, &tol).map_err(Error::NotMaximalTripotent)?;
    let n = generic_norm(e);
    let mut theta = n.arg().rem_euclid(TAU);
    if theta >= TAU {
        theta = 0.0;
    }
    // phases within roundoff of 2π are reported as 0
    if (TAU - theta) < 1e-12 {
        theta = 0.0;
    }
    let r = e.factor().rank() as f64;
    let reduced = e.scale(Complex64::from_polar(1.0, -theta / r));
    Ok((reduced, theta))
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PointRepr {
    domain: ProductDomain,
    parts: Vec<Element>,
}

impl TryFrom<PointRepr> for BoundaryPoint {
    type Error = Error;
    fn try_from(r: PointRepr) -> Result<Self> {
        BoundaryPoint::new(r.domain, r.parts)
    }
}

impl From<BoundaryPoint> for PointRepr {
    fn from(p: BoundaryPoint) -> Self {
        PointRepr { domain: p.domain, parts: p.parts }
    }
}
