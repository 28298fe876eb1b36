//! Quaternions, points of H^n and their complex embedding.

mod hyperhermitian;
mod symmetric;

pub use hyperhermitian::{
    complex_embedding, hyperhermitian_eigenvalues, mixed_discriminant, moore_det,
    quadratic_value, random_hyperhermitian, random_positive_hyperhermitian, HyperhermitianMatrix, PAIRING_TOL,
};
pub use symmetric::{
    elementary_symmetric, extremal_eigen_sum, extremal_eigen_sum_closed_form,
    extremal_eigenvalues,
};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::ops::{Add, Mul, Neg, Sub};

/// `x0 + i x1 + j x2 + k x3`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Quaternion {
    pub x0: f64,
    pub x1: f64,
    pub x2: f64,
    pub x3: f64,
}

impl Quaternion {
    pub const ZERO: Self = Self::new(0.0, 0.0, 0.0, 0.0);
    pub const ONE: Self = Self::new(1.0, 0.0, 0.0, 0.0);
    pub const I: Self = Self::new(0.0, 1.0, 0.0, 0.0);
    pub const J: Self = Self::new(0.0, 0.0, 1.0, 0.0);
    pub const K: Self = Self::new(0.0, 0.0, 0.0, 1.0);

    pub const fn new(x0: f64, x1: f64, x2: f64, x3: f64) -> Self {
        Self { x0, x1, x2, x3 }
    }

    pub const fn real(x0: f64) -> Self {
        Self::new(x0, 0.0, 0.0, 0.0)
    }

    pub fn from_array(x: [f64; 4]) -> Self {
        Self::new(x[0], x[1], x[2], x[3])
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.x0, self.x1, self.x2, self.x3]
    }

    pub fn conj(self) -> Self {
        Self::new(self.x0, -self.x1, -self.x2, -self.x3)
    }

    pub fn norm_sqr(self) -> f64 {
        self.x0 * self.x0 + self.x1 * self.x1 + self.x2 * self.x2 + self.x3 * self.x3
    }

    pub fn norm(self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Largest absolute imaginary component.
    pub fn imag_abs_max(self) -> f64 {
        self.x1.abs().max(self.x2.abs()).max(self.x3.abs())
    }

    pub fn scale(self, t: f64) -> Self {
        Self::new(t * self.x0, t * self.x1, t * self.x2, t * self.x3)
    }

    pub fn abs_diff(self, other: Self) -> f64 {
        (self - other).to_array().iter().fold(0.0f64, |a, v| a.max(v.abs()))
    }
}

impl Add for Quaternion {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.x0 + o.x0, self.x1 + o.x1, self.x2 + o.x2, self.x3 + o.x3)
    }
}

impl Sub for Quaternion {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.x0 - o.x0, self.x1 - o.x1, self.x2 - o.x2, self.x3 - o.x3)
    }
}

impl Neg for Quaternion {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale(-1.0)
    }
}

impl Mul for Quaternion {
    type Output = Self;
    fn mul(self, q: Self) -> Self {
        quat_mul(self, q)
    }
}

impl Mul<f64> for Quaternion {
    type Output = Self;
    fn mul(self, t: f64) -> Self {
        self.scale(t)
    }
}

/// Hamilton product.
pub fn quat_mul(p: Quaternion, q: Quaternion) -> Quaternion {
    Quaternion::new(
        p.x0 * q.x0 - p.x1 * q.x1 - p.x2 * q.x2 - p.x3 * q.x3,
        p.x0 * q.x1 + p.x1 * q.x0 + p.x2 * q.x3 - p.x3 * q.x2,
        p.x0 * q.x2 - p.x1 * q.x3 + p.x2 * q.x0 + p.x3 * q.x1,
        p.x0 * q.x3 + p.x1 * q.x2 - p.x2 * q.x1 + p.x3 * q.x0,
    )
}

/// A point of H^n, stored as its n quaternionic coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QPoint {
    coords: Vec<Quaternion>,
}

impl QPoint {
    pub fn new(coords: Vec<Quaternion>) -> Self {
        assert!(!coords.is_empty(), "a point of H^n needs n >= 1 coordinates");
        Self { coords }
    }

    /// From real coordinates `x_0..x_{4n-1}`, grouped four at a time.
    pub fn from_real(x: &[f64]) -> Self {
        assert!(!x.is_empty() && x.len() % 4 == 0, "real length must be 4n");
        Self::new(
            x.chunks_exact(4)
                .map(|c| Quaternion::new(c[0], c[1], c[2], c[3]))
                .collect(),
        )
    }

    pub fn to_real(&self) -> Vec<f64> {
        self.coords.iter().flat_map(|q| q.to_array()).collect()
    }

    pub fn n(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[Quaternion] {
        &self.coords
    }

    pub fn norm_sqr(&self) -> f64 {
        self.coords.iter().map(|q| q.norm_sqr()).sum()
    }
}

/// 2x2 complex block of the conjugate embedding of one quaternion.
pub(crate) fn tau_block(q: Quaternion) -> [[Complex64; 2]; 2] {
    let c = Complex64::new;
    [
        [c(q.x0, -q.x1), c(-q.x2, q.x3)],
        [c(q.x2, q.x3), c(q.x0, q.x1)],
    ]
}

/// Inverse of [`tau_block`] on blocks of the right shape; returns the
/// quaternion and the structural defect of the block.
pub(crate) fn tau_unblock(b: [[Complex64; 2]; 2]) -> (Quaternion, f64) {
    let x0 = 0.5 * (b[0][0].re + b[1][1].re);
    let x1 = 0.5 * (b[1][1].im - b[0][0].im);
    let x2 = 0.5 * (b[1][0].re - b[0][1].re);
    let x3 = 0.5 * (b[1][0].im + b[0][1].im);
    let q = Quaternion::new(x0, x1, x2, x3);
    let r = tau_block(q);
    let mut defect = 0.0f64;
    for i in 0..2 {
        for j in 0..2 {
            defect = defect.max((r[i][j] - b[i][j]).norm());
        }
    }
    (q, defect)
}

/// Row blocks of the conjugate embedding H^n -> C^{2n x 2}.
pub fn embed_tau(p: &QPoint) -> DMatrix<Complex64> {
    let n = p.n();
    let mut out = DMatrix::zeros(2 * n, 2);
    for (l, &q) in p.coords().iter().enumerate() {
        let b = tau_block(q);
        for i in 0..2 {
            for j in 0..2 {
                out[(2 * l + i, j)] = b[i][j];
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defining_relations() {
        use Quaternion as Q;
        assert_eq!(Q::I * Q::J, Q::K);
        assert_eq!(Q::J * Q::I, -Q::K);
        assert_eq!(Q::J * Q::K, Q::I);
        assert_eq!(Q::K * Q::I, Q::J);
        assert_eq!(Q::I * Q::I, Q::real(-1.0));
        let q = Q::new(0.3, -1.2, 2.0, 0.5);
        assert_eq!(Q::ONE * q, q);
        assert_eq!(q * Q::ONE, q);
    }

    #[test]
    fn conjugate_reverses_products() {
        let p = Quaternion::new(1.0, 2.0, -0.5, 0.25);
        let q = Quaternion::new(-0.75, 0.5, 3.0, 1.0);
        assert!(((p * q).conj()).abs_diff(q.conj() * p.conj()) < 1e-15);
    }

    #[test]
    fn tau_of_units() {
        let one = embed_tau(&QPoint::new(vec![Quaternion::ONE]));
        assert_eq!(one, DMatrix::identity(2, 2));
        let i = embed_tau(&QPoint::new(vec![Quaternion::I]));
        let c = Complex64::new;
        assert_eq!(i, DMatrix::from_row_slice(2, 2, &[c(0.0, -1.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 1.0)]));
        let zero = embed_tau(&QPoint::new(vec![Quaternion::ZERO; 3]));
        assert!(zero.iter().all(|z| *z == Complex64::new(0.0, 0.0)));
    }

    #[test]
    fn tau_unblock_inverts() {
        let q = Quaternion::new(0.1, -2.0, 0.7, 1.5);
        let (r, d) = tau_unblock(tau_block(q));
        assert_eq!(d, 0.0);
        assert!(r.abs_diff(q) < 1e-15);
    }
}
