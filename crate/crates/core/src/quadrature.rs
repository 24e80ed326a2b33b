//! Quadrature rules for the circle, `SU(2)` and `U(2)`.
//!
//! `U(2)` is parametrized as `u = e^{iφ} g` with `g ∈ SU(2)`,
//! `g = [[a, -b̄], [b, ā]]`, `a = sqrt(1-s) e^{iξ1}`, `b = sqrt(s) e^{iξ2}`.
//! Haar measure is uniform in `φ, ξ1, ξ2` and in `s ∈ [0, 1]`; the angles use
//! trapezoidal grids and `s` a Gauss-Legendre rule.

use std::f64::consts::{PI, TAU};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, z);
        dp = if d != 0.0 { d } else { dp };
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, z);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Sizes of the product rule on `U(2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureOrders {
    /// Points of the uniform grid in the determinant phase `φ` (also the
    /// circle grid size for the circle model).
    pub phase: usize,
    /// Points of each uniform grid in `ξ1`, `ξ2`.
    pub xi: usize,
    /// Gauss-Legendre points in `s`.
    pub gauss: usize,
}

impl QuadratureOrders {
    /// Orders that integrate exactly every polynomial of total degree `degree`
    /// in the entries of `g` and their conjugates, with the determinant-phase
    /// grid exact up to frequency `phase_degree`.
    pub fn exact_for(phase_degree: usize, degree: usize, min_gauss: usize) -> Self {
        let gauss = ((degree / 2 + 2) / 2).max(min_gauss).max(1);
        Self { phase: phase_degree + 1, xi: degree + 1, gauss }
    }

    pub fn covers(&self, other: &QuadratureOrders) -> bool {
        self.phase >= other.phase && self.xi >= other.xi && self.gauss >= other.gauss
    }
}

/// Nodes of the `SU(2)` part of the rule, with weights summing to 1.
#[derive(Debug, Clone)]
pub struct Su2Rule {
    /// `g` stored row-major: `[g11, g12, g21, g22]`.
    pub nodes: Vec<[Complex64; 4]>,
    pub weights: Vec<f64>,
}

impl Su2Rule {
    pub fn new(xi: usize, gauss: usize) -> Self {
        let (x, w) = gauss_legendre(gauss);
        let mut nodes = Vec::with_capacity(xi * xi * gauss);
        let mut weights = Vec::with_capacity(xi * xi * gauss);
        for (xg, wg) in x.iter().zip(&w) {
            let s = 0.5 * (xg + 1.0);
            let (ra, rb) = ((1.0 - s).sqrt(), s.sqrt());
            for i1 in 0..xi {
                let a = Complex64::from_polar(ra, TAU * i1 as f64 / xi as f64);
                for i2 in 0..xi {
                    let b = Complex64::from_polar(rb, TAU * i2 as f64 / xi as f64);
                    nodes.push([a, -b.conj(), b, a.conj()]);
                    weights.push(0.5 * wg / (xi * xi) as f64);
                }
            }
        }
        Self { nodes, weights }
    }
}

/// Uniform grid on the circle, `e^{2πik/n}`.
pub fn circle_grid(n: usize) -> Vec<Complex64> {
    (0..n).map(|k| Complex64::from_polar(1.0, TAU * k as f64 / n as f64)).collect()
}

/// `∫_{U(2)} f dμ` by the full product rule.
pub fn haar_quadrature_u2<F>(f: F, orders: &QuadratureOrders) -> Complex64
where
    F: Fn(&DMatrix<Complex64>) -> Complex64,
{
    let rule = Su2Rule::new(orders.xi, orders.gauss);
    let phases = circle_grid(orders.phase);
    let mut total = Complex64::new(0.0, 0.0);
    for (g, w) in rule.nodes.iter().zip(&rule.weights) {
        let mut inner = Complex64::new(0.0, 0.0);
        for ph in &phases {
            let u = DMatrix::from_row_slice(2, 2, &[g[0] * ph, g[1] * ph, g[2] * ph, g[3] * ph]);
            inner += f(&u);
        }
        total += inner * (*w / orders.phase as f64);
    }
    total
}
