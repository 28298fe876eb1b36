//! Sparse exterior algebra over C^{2n} with basis 1-forms `ω^0, …, ω^{2n-1}`.
//!
//! Basis subsets are bitmasks, so `2n <= 64`.

mod kernel;
mod twoform;

pub use kernel::MixedTop;
pub use twoform::{
    beta, cone_membership, hyperhermitian_from_twoform, power, real_defect,
    twoform_from_hyperhermitian, ConeReport, TwoForm, DEFAULT_CONE_TOL,
};

use crate::error::{Error, Result};
use num_complex::Complex64;
use std::collections::BTreeMap;

pub(crate) const MAX_N: usize = 32;

/// Homogeneous element of `Λ^k C^{2n}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Multivector {
    n: usize,
    degree: usize,
    terms: BTreeMap<u64, Complex64>,
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 || n > MAX_N {
        return Err(Error::Invalid(format!("dimension n = {n} outside 1..={MAX_N}")));
    }
    Ok(())
}

/// Sign of moving the indices of `b` past those of `a` into sorted order.
fn merge_sign(a: u64, b: u64) -> f64 {
    let mut swaps = 0u32;
    let mut rest = b;
    while rest != 0 {
        let j = rest.trailing_zeros();
        swaps += (a >> j >> 1).count_ones();
        rest &= rest - 1;
    }
    if swaps % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

impl Multivector {
    pub fn zero(n: usize, degree: usize) -> Self {
        Self { n, degree, terms: BTreeMap::new() }
    }

    pub fn scalar(n: usize, c: Complex64) -> Self {
        let mut m = Self::zero(n, 0);
        m.insert(0, c);
        m
    }

    /// `ω^{i_1} ∧ … ∧ ω^{i_k}` for indices in any order (zero if one repeats).
    pub fn basis(n: usize, indices: &[usize]) -> Result<Self> {
        check_n(n)?;
        let mut out = Self::scalar(n, Complex64::new(1.0, 0.0));
        for &i in indices {
            if i >= 2 * n {
                return Err(Error::Invalid(format!("basis index {i} >= 2n = {}", 2 * n)));
            }
            let mut one = Self::zero(n, 1);
            one.insert(1 << i, Complex64::new(1.0, 0.0));
            out = wedge(&out, &one)?;
        }
        Ok(out)
    }

    /// `Ω_{2n} = ω^0 ∧ … ∧ ω^{2n-1}`.
    pub fn volume(n: usize) -> Self {
        let mut m = Self::zero(n, 2 * n);
        m.insert(full_mask(n), Complex64::new(1.0, 0.0));
        m
    }

    /// Terms keyed by strictly increasing index lists.
    pub fn from_terms<I>(n: usize, degree: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<usize>, Complex64)>,
    {
        check_n(n)?;
        if degree > 2 * n {
            return Err(Error::Invalid(format!("degree {degree} > 2n")));
        }
        let mut out = Self::zero(n, degree);
        for (idx, c) in terms {
            if idx.len() != degree || idx.windows(2).any(|w| w[0] >= w[1]) || idx.iter().any(|&i| i >= 2 * n) {
                return Err(Error::Invalid(format!("bad basis key {idx:?} for degree {degree}")));
            }
            let key = idx.iter().fold(0u64, |k, &i| k | (1 << i));
            out.insert(key, c);
        }
        Ok(out)
    }

    fn insert(&mut self, key: u64, c: Complex64) {
        let e = self.terms.entry(key).or_insert(Complex64::new(0.0, 0.0));
        *e += c;
        if *e == Complex64::new(0.0, 0.0) {
            self.terms.remove(&key);
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Coefficient of `ω^I` for a strictly increasing `I`.
    pub fn coefficient(&self, indices: &[usize]) -> Complex64 {
        let key = indices.iter().fold(0u64, |k, &i| k | (1 << i));
        self.terms.get(&key).copied().unwrap_or_default()
    }

    pub fn terms(&self) -> impl Iterator<Item = (Vec<usize>, Complex64)> + '_ {
        self.terms.iter().map(|(&k, &c)| (mask_indices(k), c))
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let mut out = Self::zero(self.n, self.degree);
        for (&k, &v) in &self.terms {
            out.insert(k, v * c);
        }
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.n != other.n || self.degree != other.degree {
            return Err(Error::Mismatch("multivectors of different shape".into()));
        }
        let mut out = self.clone();
        for (&k, &v) in &other.terms {
            out.insert(k, v);
        }
        Ok(out)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut d = 0.0f64;
        for (k, v) in &self.terms {
            d = d.max((v - other.terms.get(k).copied().unwrap_or_default()).norm());
        }
        for (k, v) in &other.terms {
            if !self.terms.contains_key(k) {
                d = d.max(v.norm());
            }
        }
        d
    }

    pub fn top_coefficient(&self) -> Result<Complex64> {
        top_coefficient(self)
    }
}

pub(crate) fn full_mask(n: usize) -> u64 {
    if 2 * n == 64 {
        u64::MAX
    } else {
        (1u64 << (2 * n)) - 1
    }
}

fn mask_indices(mut k: u64) -> Vec<usize> {
    let mut out = Vec::with_capacity(k.count_ones() as usize);
    while k != 0 {
        out.push(k.trailing_zeros() as usize);
        k &= k - 1;
    }
    out
}

pub fn wedge(a: &Multivector, b: &Multivector) -> Result<Multivector> {
    if a.n != b.n {
        return Err(Error::Mismatch(format!("wedge of n = {} and n = {}", a.n, b.n)));
    }
    if a.degree + b.degree > 2 * a.n {
        return Err(Error::DegreeOverflow { left: a.degree, right: b.degree, max: 2 * a.n });
    }
    let mut out = Multivector::zero(a.n, a.degree + b.degree);
    for (&ka, &ca) in &a.terms {
        for (&kb, &cb) in &b.terms {
            if ka & kb == 0 {
                out.insert(ka | kb, ca * cb * merge_sign(ka, kb));
            }
        }
    }
    Ok(out)
}

/// Coefficient relative to `Ω_{2n}`.
pub fn top_coefficient(f: &Multivector) -> Result<Complex64> {
    if f.degree != 2 * f.n {
        return Err(Error::WrongDegree { expected: 2 * f.n, found: f.degree });
    }
    Ok(f.terms.get(&full_mask(f.n)).copied().unwrap_or_default())
}
