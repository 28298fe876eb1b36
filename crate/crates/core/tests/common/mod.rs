//! Test-side generators and oracles, written independently of the library's
//! own helpers.
#![allow(dead_code)]

use num_complex::Complex64;
use qhess::calculus::{GridField, GridSpec, RadialProfile};
use qhess::exterior::{Multivector, TwoForm};
use rand::Rng;

pub fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

/// `8β` written out by hand: `c_{2l,2l+1} = 8`.
pub fn eight_beta(n: usize) -> TwoForm {
    TwoForm::from_upper(n, |i, j| if i % 2 == 0 && j == i + 1 { Complex64::new(8.0, 0.0) } else { Complex64::new(0.0, 0.0) })
}

/// Dense cubic polynomial in `d` variables: every monomial of degree ≤ 3.
pub struct Cubic {
    terms: Vec<([usize; 3], f64)>,
}

impl Cubic {
    pub fn random<R: Rng>(d: usize, rng: &mut R) -> Self {
        let none = usize::MAX;
        let mut terms = vec![([none; 3], rng.gen_range(-1.0..1.0))];
        for a in 0..d {
            terms.push(([a, none, none], rng.gen_range(-1.0..1.0)));
            for b in a..d {
                terms.push(([a, b, none], rng.gen_range(-1.0..1.0)));
                for c in b..d {
                    terms.push(([a, b, c], rng.gen_range(-1.0..1.0)));
                }
            }
        }
        Self { terms }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(idx, c)| c * idx.iter().filter(|&&i| i != usize::MAX).map(|&i| x[i]).product::<f64>())
            .sum()
    }
}

pub fn random_int_form<R: Rng>(n: usize, degree: usize, rng: &mut R) -> Multivector {
    let mut terms = Vec::new();
    let d = 2 * n;
    for mask in 0u32..(1 << d) {
        if mask.count_ones() as usize == degree && rng.gen_bool(0.6) {
            let idx: Vec<usize> = (0..d).filter(|i| mask >> i & 1 == 1).collect();
            terms.push((idx, Complex64::new(rng.gen_range(-5..=5) as f64, rng.gen_range(-5..=5) as f64)));
        }
    }
    Multivector::from_terms(n, degree, terms).unwrap()
}

/// `a(1 − |x − c|²/r²)^4` inside the ball, zero outside.
pub fn bump(x: &[f64], c: &[f64], r: f64, a: f64) -> f64 {
    let q = x.iter().zip(c).map(|(u, v)| (u - v) * (u - v)).sum::<f64>() / (r * r);
    if q < 1.0 {
        a * (1.0 - q).powi(4)
    } else {
        0.0
    }
}

/// Random bump whose support stays `clear` away from every face of the cube.
pub fn random_bump_field<R: Rng>(spec: &GridSpec, clear: f64, rng: &mut R) -> GridField {
    let room = spec.half_width - clear;
    let r = rng.gen_range(0.4 * room..0.8 * room);
    let c: Vec<f64> = (0..spec.dim()).map(|_| rng.gen_range(-(room - r)..(room - r))).collect();
    let a = rng.gen_range(0.5..2.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
    GridField::sample(spec, |x| bump(x, &c, r, a)).unwrap()
}

/// `Σ_{j≤3} c_j (s^{2j} − R^{2j})` with `c_j ≥ 0`, not all tiny.
pub fn random_radial<R: Rng>(n: usize, outer: f64, k: usize, rng: &mut R) -> RadialProfile {
    let c: Vec<f64> = (0..3).map(|j| if j == 0 { rng.gen_range(0.2..1.5) } else { rng.gen_range(0.0..1.0) }).collect();
    RadialProfile::sample(n, outer, k, |s| (1..=3).map(|j| c[j - 1] * (s.powi(2 * j as i32) - outer.powi(2 * j as i32))).sum())
        .unwrap()
}

/// Plain Jacobi relaxation for `Σ_a (u(x+he_a) − 2u(x) + u(x−he_a))/h² = f`
/// on the points at least two cells from every face, zero elsewhere.
pub fn jacobi_poisson(spec: &GridSpec, f: &[f64], tol: f64) -> Vec<f64> {
    let d = spec.dim();
    let h2 = spec.spacing().powi(2);
    let strides = spec.strides();
    let inside: Vec<usize> = (0..spec.len()).filter(|&i| spec.margin_of(i) >= 2).collect();
    let mut u = vec![0.0; spec.len()];
    loop {
        let mut next = u.clone();
        let mut change = 0.0f64;
        for &i in &inside {
            let nb: f64 = strides.iter().map(|&s| u[i + s] + u[i - s]).sum();
            next[i] = (nb - h2 * f[i]) / (2.0 * d as f64);
            change = change.max((next[i] - u[i]).abs());
        }
        u = next;
        if change < tol {
            return u;
        }
    }
}

/// Projected Jacobi for the classical obstacle problem: the largest discrete
/// subharmonic function that is `≤ −1` on `set`, `≤ 0` elsewhere, with the
/// two outer layers held at zero.
pub fn jacobi_obstacle(spec: &GridSpec, set: &[bool], tol: f64) -> Vec<f64> {
    let d = spec.dim() as f64;
    let strides = spec.strides();
    let inside: Vec<usize> = (0..spec.len()).filter(|&i| spec.margin_of(i) >= 2).collect();
    let mut u: Vec<f64> = (0..spec.len()).map(|i| if spec.margin_of(i) >= 2 { -1.0 } else { 0.0 }).collect();
    loop {
        let mut next = u.clone();
        let mut change = 0.0f64;
        for &i in &inside {
            let mean = strides.iter().map(|&s| u[i + s] + u[i - s]).sum::<f64>() / (2.0 * d);
            let cap = if set[i] { -1.0 } else { 0.0 };
            next[i] = mean.min(cap);
            change = change.max((next[i] - u[i]).abs());
        }
        u = next;
        if change < tol {
            return u;
        }
    }
}

/// Exact binomial over `i128`.
pub fn binom(n: i64, k: i64) -> i128 {
    if k < 0 || k > n {
        return 0;
    }
    (0..k).fold(1i128, |acc, i| acc * (n - i) as i128 / (i + 1) as i128)
}
