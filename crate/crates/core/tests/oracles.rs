//! Library results against values computed here by independent means.

mod common;

use common::*;
use nalgebra::DMatrix;
use num_complex::Complex64;
use qhess::calculus::{radial_density, GridField, GridSpec, RadialProfile};
use qhess::envelope::{dirichlet_radial, radial_capacity, AnnulusConfig, RadialObstacle, SweepOptions};
use qhess::hessian::hessian_density;
use qhess::quaternion::{moore_det, random_hyperhermitian, HyperhermitianMatrix, Quaternion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

/// `z + w j ↦ [[z, w], [−w̄, z̄]]`, assembled blockwise.
fn embed(a: &HyperhermitianMatrix) -> DMatrix<Complex64> {
    let n = a.n();
    DMatrix::from_fn(2 * n, 2 * n, |r, c| {
        let q = a.get(r / 2, c / 2);
        let z = Complex64::new(q.x0, q.x1);
        let w = Complex64::new(q.x2, q.x3);
        match (r % 2, c % 2) {
            (0, 0) => z,
            (0, 1) => w,
            (1, 0) => -w.conj(),
            _ => z.conj(),
        }
    })
}

#[test]
fn moore_determinant_squared_is_complex_determinant() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for n in 1..=4 {
        for _ in 0..30 {
            let a = random_hyperhermitian(n, &mut rng);
            let d = moore_det(&a).unwrap();
            let c = embed(&a).determinant();
            assert!(c.im.abs() < 1e-10, "{c}");
            assert!((d * d - c.re).abs() < 1e-10 * c.re.abs().max(1.0), "n={n}: {d}^2 vs {}", c.re);
        }
    }
}

#[test]
fn two_by_two_moore_determinant() {
    let q = Quaternion::new(0.3, -1.2, 0.7, 2.0);
    let a = HyperhermitianMatrix::from_upper(2, |j, k| match (j, k) {
        (0, 0) => Quaternion::real(1.5),
        (1, 1) => Quaternion::real(-4.0),
        _ => q,
    });
    let expected = 1.5 * -4.0 - (0.09 + 1.44 + 0.49 + 4.0);
    assert!((moore_det(&a).unwrap() - expected).abs() < 1e-13);
    assert_eq!(moore_det(&HyperhermitianMatrix::diag(&[2.0, -3.0, 0.5])).unwrap(), -3.0);
}

#[test]
fn density_of_norm_squared_on_grids() {
    // (8β)^m ∧ β^{n−m} has top coefficient 8^m n!
    let spec = GridSpec::new(2, 1.0, 7).unwrap();
    let u = GridField::sample(&spec, norm2).unwrap();
    for (m, expected) in [(1, 16.0), (2, 128.0)] {
        let d = hessian_density(&u, m).unwrap();
        assert!(d.values().iter().all(|v| (v - expected).abs() < 1e-10 * expected), "m={m}");
    }
}

#[test]
fn radial_density_of_norm_squared_is_exact() {
    for n in 1..=4usize {
        let p = RadialProfile::sample(n, 1.3, 37, |s| s * s).unwrap();
        let fact: f64 = (1..=n).map(|k| k as f64).product();
        for m in 1..=n {
            let expected = 8f64.powi(m as i32) * fact;
            let d = radial_density(&p, m).unwrap();
            assert!(d.iter().all(|v| (v - expected).abs() < 1e-9 * expected), "n={n} m={m}: {:?}", &d[..3]);
        }
    }
}

#[test]
fn radial_poisson_against_polynomial_solution() {
    // g'' + 3g'/s = (1 − s²)² with g(1) = 0
    let g = |s: f64| (s * s - 1.0) / 8.0 - (s.powi(4) - 1.0) / 12.0 + (s.powi(6) - 1.0) / 48.0;
    let mut errs = Vec::new();
    for k in [100usize, 200, 400] {
        let ds = 1.0 / k as f64;
        let f: Vec<f64> = (0..k).map(|i| (1.0 - (i as f64 * ds).powi(2)).powi(2)).collect();
        let p = dirichlet_radial(&f, 1, 1, 1.0).unwrap();
        errs.push(p.values.iter().enumerate().fold(0.0f64, |a, (i, v)| a.max((v - g(i as f64 * ds)).abs())));
    }
    assert!(errs[2] < 1e-4, "{errs:?}");
    for w in errs.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!((1.7..2.3).contains(&order), "{errs:?}");
    }
}

#[test]
fn newtonian_capacity_of_a_ball() {
    // n = m = 1 is the Laplacian on R^4: cap = |S^3| · 2/(r^{-2} − R^{-2})
    let cfg = AnnulusConfig::new(1, 1, 0.5, 1.0).unwrap();
    let exact = 4.0 * PI * PI / 3.0;
    assert!((cfg.capacity() - exact).abs() < 1e-12 * exact);
    let opts = SweepOptions { tol: 1e-13, max_sweeps: 2_000_000 };
    let got = radial_capacity(&RadialObstacle::ball(1, 1, 0.5, 1.0, 400).unwrap(), &opts).unwrap().capacity;
    assert!((got - exact).abs() < 1e-3 * exact, "{got} vs {exact}");
}

#[test]
fn frozen_quaternionic_capacity() {
    // n = m = 2, r = 1/2, R = 1: |S^7|·4·(2/3)² = 16π⁴/27
    let exact = 16.0 * PI.powi(4) / 27.0;
    let cfg = AnnulusConfig::new(2, 2, 0.5, 1.0).unwrap();
    assert!((cfg.capacity() - exact).abs() < 1e-12 * exact);
    assert!((exact - 57.723_905_8).abs() < 1e-6);
    let opts = SweepOptions { tol: 1e-12, max_sweeps: 2_000_000 };
    let got = radial_capacity(&RadialObstacle::ball(2, 2, 0.5, 1.0, 400).unwrap(), &opts).unwrap().capacity;
    assert!((got - exact).abs() < 1e-4 * exact, "{got}");
}

#[test]
fn extremal_function_frozen_values() {
    // (2,2): a = 2, u(s) = (1 − s^{-2})/3 outside r = 1/2
    let cfg = AnnulusConfig::new(2, 2, 0.5, 1.0).unwrap();
    for (s, v) in [(0.25, -1.0), (0.5, -1.0), (0.8, -0.1875), (1.0, 0.0)] {
        assert!((cfg.extremal_value(s) - v).abs() < 1e-15, "s={s}");
    }
    // (3,2): a = 3, u(s) = (1 − s^{-4})/15
    let cfg = AnnulusConfig::new(3, 2, 0.5, 1.0).unwrap();
    assert!((cfg.extremal_value(0.75) - (1.0 - 0.75f64.powi(-4)) / 15.0).abs() < 1e-15);
}
