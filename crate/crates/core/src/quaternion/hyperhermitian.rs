use super::{quat_mul, tau_block, Quaternion};
use rand::Rng;
use crate::error::{Error, Result};
use nalgebra::DMatrix;
use num_complex::Complex64;

/// Relative gap allowed between the two members of an eigenvalue pair.
pub const PAIRING_TOL: f64 = 1e-8;

const HERMITIAN_TOL: f64 = 1e-12;

/// Quaternionic n x n matrix with `A = A*`.
#[derive(Clone, Debug, PartialEq)]
pub struct HyperhermitianMatrix {
    n: usize,
    entries: Vec<Quaternion>,
}

impl HyperhermitianMatrix {
    /// Row-major entries; rejects matrices that are not hyperhermitian up to
    /// a relative tolerance of 1e-12.
    pub fn new(n: usize, entries: Vec<Quaternion>) -> Result<Self> {
        if n == 0 || entries.len() != n * n {
            return Err(Error::Invalid(format!(
                "need n >= 1 and n*n entries, got n = {n} with {} entries",
                entries.len()
            )));
        }
        let scale = entries.iter().fold(1.0f64, |a, q| a.max(q.norm()));
        let mut defect = 0.0f64;
        for j in 0..n {
            defect = defect.max(entries[j * n + j].imag_abs_max());
            for k in 0..j {
                defect = defect.max(entries[j * n + k].abs_diff(entries[k * n + j].conj()));
            }
        }
        if !entries.iter().all(|q| q.to_array().iter().all(|v| v.is_finite())) {
            return Err(Error::Invalid("non-finite entry".into()));
        }
        if defect > HERMITIAN_TOL * scale {
            return Err(Error::NotHyperhermitian { defect });
        }
        Ok(Self { n, entries })
    }

    /// Builds from the upper triangle; the lower triangle is filled by conjugation
    /// and the diagonal is forced real.
    pub fn from_upper(n: usize, upper: impl Fn(usize, usize) -> Quaternion) -> Self {
        let mut entries = vec![Quaternion::ZERO; n * n];
        for j in 0..n {
            entries[j * n + j] = Quaternion::real(upper(j, j).x0);
            for k in j + 1..n {
                let q = upper(j, k);
                entries[j * n + k] = q;
                entries[k * n + j] = q.conj();
            }
        }
        Self { n, entries }
    }

    pub fn identity(n: usize) -> Self {
        Self::diag(&vec![1.0; n])
    }

    pub fn diag(a: &[f64]) -> Self {
        Self::from_upper(a.len(), |j, k| if j == k { Quaternion::real(a[j]) } else { Quaternion::ZERO })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, j: usize, k: usize) -> Quaternion {
        self.entries[j * self.n + k]
    }

    pub fn entries(&self) -> &[Quaternion] {
        &self.entries
    }

    pub fn scale(&self, t: f64) -> Self {
        Self { n: self.n, entries: self.entries.iter().map(|q| q.scale(t)).collect() }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::Mismatch(format!("sizes {} and {}", self.n, other.n)));
        }
        Ok(Self {
            n: self.n,
            entries: self.entries.iter().zip(&other.entries).map(|(a, b)| *a + *b).collect(),
        })
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.entries
            .iter()
            .zip(&other.entries)
            .fold(0.0f64, |a, (p, q)| a.max(p.abs_diff(*q)))
    }
}

/// Hermitian 2n x 2n complex matrix built blockwise from the conjugate embedding.
pub fn complex_embedding(a: &HyperhermitianMatrix) -> DMatrix<Complex64> {
    let n = a.n();
    let mut out = DMatrix::zeros(2 * n, 2 * n);
    for l in 0..n {
        for k in 0..n {
            let b = tau_block(a.get(l, k));
            for i in 0..2 {
                for j in 0..2 {
                    out[(2 * l + i, 2 * k + j)] = b[i][j];
                }
            }
        }
    }
    out
}

/// One eigenvalue per doubled pair of the embedding's spectrum, descending.
pub fn hyperhermitian_eigenvalues(a: &HyperhermitianMatrix) -> Result<Vec<f64>> {
    let mut ev: Vec<f64> = complex_embedding(a).symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(|x, y| y.total_cmp(x));
    let scale = ev.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tol = PAIRING_TOL * scale;
    let mut out = Vec::with_capacity(a.n());
    for pair in ev.chunks_exact(2) {
        let gap = (pair[0] - pair[1]).abs();
        if gap > tol {
            return Err(Error::Pairing { gap, tol });
        }
        out.push(0.5 * (pair[0] + pair[1]));
    }
    Ok(out)
}

/// Product of the paired eigenvalues.
pub fn moore_det(a: &HyperhermitianMatrix) -> Result<f64> {
    Ok(hyperhermitian_eigenvalues(a)?.iter().product())
}

/// Symmetric multilinear polarization of [`moore_det`]:
/// `(1/n!) Σ_S (-1)^{n-|S|} det(Σ_{i∈S} A_i)`.
pub fn mixed_discriminant(args: &[HyperhermitianMatrix]) -> Result<f64> {
    let n = args.len();
    if n == 0 || args.iter().any(|a| a.n() != n) {
        return Err(Error::Mismatch("mixed discriminant needs n matrices of size n".into()));
    }
    let mut total = 0.0;
    for mask in 1u32..(1 << n) {
        let mut sum = HyperhermitianMatrix::from_upper(n, |_, _| Quaternion::ZERO);
        for (i, a) in args.iter().enumerate() {
            if mask & (1 << i) != 0 {
                sum = sum.add(a)?;
            }
        }
        let sign = if (n as u32 - mask.count_ones()) % 2 == 0 { 1.0 } else { -1.0 };
        total += sign * moore_det(&sum)?;
    }
    let fact: f64 = (1..=n).map(|k| k as f64).product();
    Ok(total / fact)
}

/// Hyperhermitian matrix with entries drawn uniformly from `[-1, 1]`.
pub fn random_hyperhermitian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> HyperhermitianMatrix {
    let mut draw = || Quaternion::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    let upper: Vec<Quaternion> = (0..n * n).map(|_| draw()).collect();
    HyperhermitianMatrix::from_upper(n, |j, k| upper[j * n + k])
}

/// `B*B + floor·I` for a random `B`; positive definite when `floor > 0`.
pub fn random_positive_hyperhermitian<R: Rng + ?Sized>(n: usize, floor: f64, rng: &mut R) -> HyperhermitianMatrix {
    let b: Vec<Quaternion> = (0..n * n)
        .map(|_| Quaternion::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    HyperhermitianMatrix::from_upper(n, |l, k| {
        let mut acc = (0..n).fold(Quaternion::ZERO, |acc, j| acc + quat_mul(b[j * n + l].conj(), b[j * n + k]));
        if l == k {
            acc = acc + Quaternion::real(floor);
        }
        acc
    })
}

/// `Re Σ q̄_l a_lk q_k` at the real point `x` of `H^n`.
pub fn quadratic_value(a: &HyperhermitianMatrix, x: &[f64]) -> f64 {
    let n = a.n();
    let q: Vec<Quaternion> = (0..n).map(|l| Quaternion::new(x[4 * l], x[4 * l + 1], x[4 * l + 2], x[4 * l + 3])).collect();
    let mut acc = 0.0;
    for l in 0..n {
        for k in 0..n {
            acc += quat_mul(q[l].conj(), quat_mul(a.get(l, k), q[k])).x0;
        }
    }
    acc
}
