//! Jordan triple products and the predicates built on them.
//!
//! For the matrix types the product is `{xyz} = (x y* z + z y* x) / 2`. For
//! the Lie ball (type IV) it is `{xyz} = (x.ȳ) z - (x.z) ȳ + (z.ȳ) x` with the
//! bilinear dot product `x.y = sum x_j y_j`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::domain::DomainFactor;
use crate::element::{standard_basis, Element};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigenvalues, CMatrix};
use crate::pfaffian::pfaffian_cofactor;
use crate::pfaffian::{pfaffian_parlett_reid, COFACTOR_MAX_DIM};

/// Tolerances for the predicates of this module.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Relative tolerance for equalities such as `{eee} = e`.
    pub eq_tol: f64,
    /// Eigenvalue cutoff for positive definiteness.
    pub psd_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { eq_tol: 1e-9, psd_tol: 1e-10 }
    }
}

impl Tolerances {
    pub fn new(eq_tol: f64, psd_tol: f64) -> Result<Self> {
        if !(eq_tol > 0.0 && psd_tol > 0.0) {
            return Err(Error::Spec(format!("tolerances must be positive, got {eq_tol}, {psd_tol}")));
        }
        Ok(Self { eq_tol, psd_tol })
    }
}

fn bilinear_dot(x: &CMatrix, y: &CMatrix) -> Complex64 {
    x.iter().zip(y.iter()).map(|(a, b)| a * b).sum()
}

fn check_same(x: &Element, y: &Element, z: &Element) -> Result<()> {
    x.same_factor(y)?;
    x.same_factor(z)
}

/// `{xyz}`: linear in `x` and `z`, conjugate-linear in `y`, symmetric in `x <-> z`.
pub fn triple_product(x: &Element, y: &Element, z: &Element) -> Result<Element> {
    check_same(x, y, z)?;
    Ok(triple_unchecked(x, y, z))
}

fn triple_unchecked(x: &Element, y: &Element, z: &Element) -> Element {
    let (xd, yd, zd) = (x.data(), y.data(), z.data());
    let out = match x.factor() {
        DomainFactor::TypeIV(_) => {
            let ybar = yd.map(|v| v.conj());
            let xy = bilinear_dot(xd, &ybar);
            let xz = bilinear_dot(xd, zd);
            let zy = bilinear_dot(zd, &ybar);
            zd * xy - ybar * xz + xd * zy
        }
        _ => {
            let ys = yd.adjoint();
            (xd * &ys * zd + zd * &ys * xd).scale(0.5)
        }
    };
    Element::from_raw(x.factor(), out)
}

/// Matrix of `z -> {x y z}` in the standard basis of the factor.
pub fn left_mult_matrix(x: &Element, y: &Element) -> Result<CMatrix> {
    x.same_factor(y)?;
    let basis = standard_basis(x.factor());
    let dim = basis.len();
    let mut m = DMatrix::zeros(dim, dim);
    for (k, b) in basis.iter().enumerate() {
        let col = triple_unchecked(x, y, b).coordinates();
        for (i, v) in col.into_iter().enumerate() {
            m[(i, k)] = v;
        }
    }
    Ok(m)
}

/// `<x, y> = trace L(x, y)`.
pub fn trace_inner_product(x: &Element, y: &Element) -> Result<Complex64> {
    Ok(left_mult_matrix(x, y)?.trace())
}

/// `Q_x z = {x z x}`.
pub fn quadratic_rep(x: &Element, z: &Element) -> Result<Element> {
    triple_product(x, z, x)
}

pub fn is_tripotent(e: &Element, tol: &Tolerances) -> bool {
    let eee = triple_unchecked(e, e, e);
    let r = (eee.data() - e.data()).norm();
    r <= tol.eq_tol * e.norm().max(1.0)
}

/// `{e1 e1 e2} = 0`.
pub fn are_orthogonal(e1: &Element, e2: &Element, tol: &Tolerances) -> Result<bool> {
    let t = triple_product(e1, e1, e2)?;
    Ok(t.norm() <= tol.eq_tol)
}

/// Generic norm: determinant (I, III), Pfaffian normalized by `Pf(J) = 1` (II),
/// and `z.z` (IV).
pub fn generic_norm(z: &Element) -> Complex64 {
    let d = z.data();
    match z.factor() {
        DomainFactor::TypeI(_) | DomainFactor::TypeIII(_) => d.clone().determinant(),
        DomainFactor::TypeII(m) => {
            let a = (d - d.transpose()).scale(0.5);
            if m <= COFACTOR_MAX_DIM {
                pfaffian_cofactor(&a)
            } else {
                pfaffian_parlett_reid(a)
            }
        }
        DomainFactor::TypeIV(_) => bilinear_dot(d, d),
    }
}

pub fn is_invertible(z: &Element, tol: &Tolerances) -> bool {
    generic_norm(z).norm() > tol.eq_tol
}

/// Maximal tripotents are exactly the invertible tripotents.
pub fn is_maximal_tripotent(e: &Element, tol: &Tolerances) -> bool {
    is_tripotent(e, tol) && is_invertible(e, tol)
}

/// Gram matrix `G_ab = <b_a, b_b>` of the trace form on the standard basis.
pub fn gram_matrix(factor: DomainFactor) -> CMatrix {
    let basis = standard_basis(factor);
    let n = basis.len();
    DMatrix::from_fn(n, n, |a, b| {
        left_mult_matrix(&basis[a], &basis[b]).expect("same factor").trace()
    })
}

/// Eigenvalues of `L(z, z)` as a self-adjoint map for the trace inner product.
pub fn left_mult_spectrum(z: &Element) -> Vec<f64> {
    let m = left_mult_matrix(z, z).expect("same factor");
    // L(z,z) is self-adjoint for the trace form with coordinate Gram K = conj(G).
    // With K = C C*, the matrix C* M C^{-*} is hermitian and similar to M.
    let k = gram_matrix(z.factor()).conjugate();
    let chol = k.cholesky().expect("trace form is positive definite");
    let cmat = chol.l();
    let cstar = cmat.adjoint();
    let cinv_star = cstar
        .clone()
        .try_inverse()
        .expect("cholesky factor is invertible");
    let h = &cstar * m * cinv_star;
    hermitian_eigenvalues(&h)
}

/// `1 - L(z, z)` positive definite.
pub fn in_domain(z: &Element, tol: &Tolerances) -> bool {
    let ev = left_mult_spectrum(z);
    ev.iter().all(|&l| 1.0 - l > tol.psd_tol)
}

/// Explicit description of the Lie ball for this triple product:
/// `z.z̄ + sqrt((z.z̄)^2 - |z.z|^2) < 1`.
///
/// The right-hand side is 1 because the real unit vectors are maximal
/// tripotents and must lie on the boundary.
pub fn in_lie_ball(z: &Element) -> Result<bool> {
    if !matches!(z.factor(), DomainFactor::TypeIV(_)) {
        return Err(Error::FactorMismatch { expected: "IV".into(), found: z.factor().to_string() });
    }
    let d = z.data();
    let zz_bar: f64 = d.iter().map(|v| v.norm_sqr()).sum();
    let zz = bilinear_dot(d, d).norm();
    Ok(zz_bar + (zz_bar * zz_bar - zz * zz).max(0.0).sqrt() < 1.0)
}
