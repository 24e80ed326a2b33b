//! Points of the ambient space `Z` of one factor.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::domain::DomainFactor;
use crate::error::{Error, Result};

/// Relative tolerance used when validating the (anti)symmetry of stored matrices.
pub const SHAPE_TOL: f64 = 1e-9;

/// An element of `Z` for one factor.
///
/// Types II and III are stored as full square matrices; their symmetry is a
/// checked invariant. Type IV elements are `n x 1` columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ElementRepr", into = "ElementRepr")]
pub struct Element {
    factor: DomainFactor,
    data: DMatrix<Complex64>,
}

impl Element {
    pub fn new(factor: DomainFactor, data: DMatrix<Complex64>) -> Result<Self> {
        Self::with_tol(factor, data, SHAPE_TOL)
    }

    pub fn with_tol(factor: DomainFactor, data: DMatrix<Complex64>, tol: f64) -> Result<Self> {
        let shape = factor.shape();
        if data.shape() != shape {
            return Err(Error::Shape(format!(
                "{factor} expects {}x{}, got {}x{}",
                shape.0,
                shape.1,
                data.nrows(),
                data.ncols()
            )));
        }
        let scale = data.norm();
        match factor {
            DomainFactor::TypeII(_) => {
                let r = (&data + data.transpose()).norm();
                if r > tol * scale.max(f64::MIN_POSITIVE) && r > 0.0 {
                    return Err(Error::Shape(format!("{factor} element not antisymmetric ({r:.2e})")));
                }
            }
            DomainFactor::TypeIII(_) => {
                let r = (&data - data.transpose()).norm();
                if r > tol * scale.max(f64::MIN_POSITIVE) && r > 0.0 {
                    return Err(Error::Shape(format!("{factor} element not symmetric ({r:.2e})")));
                }
            }
            _ => {}
        }
        Ok(Self { factor, data })
    }

    /// Builds an element without validating symmetry; used internally where the
    /// algebra guarantees it.
    pub(crate) fn from_raw(factor: DomainFactor, data: DMatrix<Complex64>) -> Self {
        debug_assert_eq!(data.shape(), factor.shape());
        Self { factor, data }
    }

    pub fn zeros(factor: DomainFactor) -> Self {
        let (r, c) = factor.shape();
        Self::from_raw(factor, DMatrix::zeros(r, c))
    }

    /// Column vector element of a Type IV factor.
    pub fn vector(factor: DomainFactor, coords: &[Complex64]) -> Result<Self> {
        let (r, c) = factor.shape();
        if c != 1 || coords.len() != r {
            return Err(Error::Shape(format!("{factor} cannot hold a vector of length {}", coords.len())));
        }
        Self::new(factor, DMatrix::from_column_slice(r, 1, coords))
    }

    pub fn from_fn(factor: DomainFactor, f: impl FnMut(usize, usize) -> Complex64) -> Result<Self> {
        let (r, c) = factor.shape();
        Self::new(factor, DMatrix::from_fn(r, c, f))
    }

    pub fn factor(&self) -> DomainFactor {
        self.factor
    }

    pub fn data(&self) -> &DMatrix<Complex64> {
        &self.data
    }

    pub fn into_data(self) -> DMatrix<Complex64> {
        self.data
    }

    /// Frobenius norm of the stored array.
    pub fn norm(&self) -> f64 {
        self.data.norm()
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self::from_raw(self.factor, self.data.map(|z| z * s))
    }

    pub fn conj(&self) -> Self {
        Self::from_raw(self.factor, self.data.map(|z| z.conj()))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_factor(other)?;
        Ok(Self::from_raw(self.factor, &self.data + &other.data))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.same_factor(other)?;
        Ok(Self::from_raw(self.factor, &self.data - &other.data))
    }

    pub(crate) fn same_factor(&self, other: &Self) -> Result<()> {
        if self.factor != other.factor {
            return Err(Error::FactorMismatch {
                expected: self.factor.to_string(),
                found: other.factor.to_string(),
            });
        }
        Ok(())
    }

    /// Coordinates in the standard basis of the factor (see [`standard_basis`]).
    pub fn coordinates(&self) -> Vec<Complex64> {
        let d = &self.data;
        match self.factor {
            DomainFactor::TypeI(_) | DomainFactor::TypeIV(_) => {
                let (r, c) = d.shape();
                (0..r).flat_map(|i| (0..c).map(move |j| d[(i, j)])).collect()
            }
            DomainFactor::TypeII(m) => {
                let mut out = Vec::with_capacity(self.factor.dim());
                for i in 0..m {
                    for j in i + 1..m {
                        out.push(d[(i, j)]);
                    }
                }
                out
            }
            DomainFactor::TypeIII(n) => {
                let mut out = Vec::with_capacity(self.factor.dim());
                for i in 0..n {
                    for j in i..n {
                        out.push(d[(i, j)]);
                    }
                }
                out
            }
        }
    }
}

/// Standard basis of the ambient space of a factor.
///
/// * I: matrix units `E_ab` in row-major order.
/// * II: `E_ab - E_ba`, `a < b`.
/// * III: `E_aa` and `E_ab + E_ba`, `a < b`, upper triangle row-major.
/// * IV: unit vectors.
///
/// Coordinates returned by [`Element::coordinates`] are taken against this basis.
pub fn standard_basis(factor: DomainFactor) -> Vec<Element> {
    let one = Complex64::new(1.0, 0.0);
    let (r, c) = factor.shape();
    let unit = |pairs: &[(usize, usize, f64)]| {
        let mut m = DMatrix::zeros(r, c);
        for &(i, j, s) in pairs {
            m[(i, j)] = one * s;
        }
        Element::from_raw(factor, m)
    };
    match factor {
        DomainFactor::TypeI(n) => (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| unit(&[(i, j, 1.0)]))
            .collect(),
        DomainFactor::TypeII(m) => (0..m)
            .flat_map(|i| (i + 1..m).map(move |j| (i, j)))
            .map(|(i, j)| unit(&[(i, j, 1.0), (j, i, -1.0)]))
            .collect(),
        DomainFactor::TypeIII(n) => (0..n)
            .flat_map(|i| (i..n).map(move |j| (i, j)))
            .map(|(i, j)| if i == j { unit(&[(i, i, 1.0)]) } else { unit(&[(i, j, 1.0), (j, i, 1.0)]) })
            .collect(),
        DomainFactor::TypeIV(n) => (0..n).map(|i| unit(&[(i, 0, 1.0)])).collect(),
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ElementRepr {
    factor: DomainFactor,
    rows: usize,
    cols: usize,
    /// Row-major, interleaved `re, im`.
    data: Vec<f64>,
}

impl TryFrom<ElementRepr> for Element {
    type Error = Error;
    fn try_from(r: ElementRepr) -> Result<Self> {
        if r.data.len() != 2 * r.rows * r.cols {
            return Err(Error::Shape(format!(
                "expected {} interleaved values, got {}",
                2 * r.rows * r.cols,
                r.data.len()
            )));
        }
        let m = DMatrix::from_fn(r.rows, r.cols, |i, j| {
            let k = 2 * (i * r.cols + j);
            Complex64::new(r.data[k], r.data[k + 1])
        });
        Element::new(r.factor, m)
    }
}

impl From<Element> for ElementRepr {
    fn from(e: Element) -> Self {
        let (rows, cols) = e.data.shape();
        let mut data = Vec::with_capacity(2 * rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                let z = e.data[(i, j)];
                data.push(z.re);
                data.push(z.im);
            }
        }
        ElementRepr { factor: e.factor, rows, cols, data }
    }
}
