//! Dense complex matrix helpers, Laurent fits and joint diagonalisation.

use faer::linalg::solvers::DenseSolveCore;
use faer::prelude::*;
use faer::Mat;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

pub type CMat = Mat<C64>;

pub fn identity(n: usize) -> CMat {
    Mat::from_fn(n, n, |i, j| if i == j { C64::from(1.0) } else { C64::from(0.0) })
}

pub fn zeros(n: usize) -> CMat {
    Mat::zeros(n, n)
}

pub fn scaled(m: &CMat, c: C64) -> CMat {
    Scale(c) * m
}

pub fn norm(m: &CMat) -> f64 {
    m.norm_l2()
}

/// `‖a − b‖ / max(‖a‖, ‖b‖)`, zero when both vanish.
pub fn rel_residual(a: &CMat, b: &CMat) -> f64 {
    let d = (a - b).norm_l2();
    let s = a.norm_l2().max(b.norm_l2());
    if s == 0.0 {
        0.0
    } else {
        d / s
    }
}

/// `‖ab − ba‖ / (‖a‖ ‖b‖)`.
pub fn rel_commutator(a: &CMat, b: &CMat) -> f64 {
    let c = a * b - b * a;
    let s = a.norm_l2() * b.norm_l2();
    if s == 0.0 {
        0.0
    } else {
        c.norm_l2() / s
    }
}

/// Frobenius norm of the off-diagonal part relative to the whole.
pub fn offdiag_mass(m: &CMat) -> f64 {
    let mut off = 0.0;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            if i != j {
                off += m[(i, j)].norm_sqr();
            }
        }
    }
    let s = m.norm_l2();
    if s == 0.0 {
        0.0
    } else {
        off.sqrt() / s
    }
}

/// Coefficients `c_{−d}..c_{d}` of a centered Laurent polynomial in `z`
/// through `2d + 1` samples, solved from the Vandermonde system.
pub fn laurent_fit(zs: &[C64], samples: &[CMat], degree: usize) -> Result<Vec<CMat>> {
    let k = 2 * degree + 1;
    if zs.len() != k || samples.len() != k {
        return Err(Error::InterfaceMismatch(format!("{} samples for degree {degree}", zs.len())));
    }
    let (r, c) = (samples[0].nrows(), samples[0].ncols());
    let v = Mat::from_fn(k, k, |i, p| zs[i].powi(p as i32 - degree as i32));
    let rhs = Mat::from_fn(k, r * c, |i, e| samples[i][(e % r, e / r)]);
    let sol = v.partial_piv_lu().solve(&rhs);
    Ok((0..k).map(|p| Mat::from_fn(r, c, |i, j| sol[(p, i + j * r)])).collect())
}

pub fn laurent_eval(coeffs: &[CMat], z: C64) -> CMat {
    let degree = (coeffs.len() - 1) / 2;
    let mut out = Mat::zeros(coeffs[0].nrows(), coeffs[0].ncols());
    for (p, c) in coeffs.iter().enumerate() {
        out += Scale(z.powi(p as i32 - degree as i32)) * c;
    }
    out
}

/// Largest `|p|` whose coefficient exceeds `tol` relative to the largest.
pub fn laurent_degree(coeffs: &[CMat], tol: f64) -> usize {
    let degree = (coeffs.len() - 1) / 2;
    let big = coeffs.iter().map(|c| c.norm_l2()).fold(0.0, f64::max);
    (0..=degree)
        .rev()
        .find(|&p| {
            coeffs[degree + p].norm_l2() > tol * big || coeffs[degree - p].norm_l2() > tol * big
        })
        .unwrap_or(0)
}

/// `2d + 1` equispaced points on the unit circle, rotated by `phase`.
pub fn circle_points(count: usize, phase: f64) -> Vec<C64> {
    (0..count)
        .map(|j| C64::from_polar(1.0, phase + 2.0 * std::f64::consts::PI * j as f64 / count as f64))
        .collect()
}

/// Eigenvector basis of a diagonalisable matrix and its inverse.
pub struct EigenBasis {
    pub vectors: CMat,
    pub inverse: CMat,
}

impl EigenBasis {
    pub fn new(a: &CMat) -> Result<Self> {
        let evd = a.eigen().map_err(|_| Error::DegenerateSpectrum(f64::INFINITY))?;
        let vectors = evd.U().to_owned();
        let inverse = vectors.partial_piv_lu().inverse();
        Ok(Self { vectors, inverse })
    }

    /// Diagonal of `V⁻¹ M V` and the relative off-diagonal defect.
    pub fn eigenvalues(&self, m: &CMat) -> (Vec<C64>, f64) {
        let d = &self.inverse * m * &self.vectors;
        let vals = (0..d.nrows()).map(|i| d[(i, i)]).collect();
        (vals, offdiag_mass(&d))
    }
}
