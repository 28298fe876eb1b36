//! The identity suite: exact algebra, quadratic exactness of the discrete
//! operators, first-order operator identities on cubic polynomials and the
//! Moore determinant path.

use crate::calculus::{baston, d0, d1, FormField, GridField, GridSpec};
use crate::error::Result;
use crate::exterior::{beta, power, top_coefficient, twoform_from_hyperhermitian, wedge, Multivector};
use crate::hessian::density_at;
use crate::quaternion::{
    elementary_symmetric, extremal_eigen_sum, extremal_eigen_sum_closed_form, extremal_eigenvalues, moore_det,
    quadratic_value, random_hyperhermitian, HyperhermitianMatrix,
};
use num_complex::Complex64;
use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

#[derive(Clone, Debug, Serialize)]
pub struct IdentityCheck {
    pub name: String,
    pub cases: usize,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl IdentityCheck {
    fn new(name: &str, cases: usize, max_deviation: f64, tolerance: f64) -> Self {
        Self { name: name.into(), cases, max_deviation, tolerance, pass: max_deviation <= tolerance }
    }
}

#[derive(Clone, Debug)]
pub struct SuiteOptions {
    /// Quaternionic dimension of the quadratic-exactness grids.
    pub n: usize,
    pub points: usize,
    /// Random cubic polynomials for the first-order identities.
    pub polynomials: usize,
    /// Random matrices per dimension for the Moore path.
    pub matrices: usize,
    /// Include the closedness checks, which need a grid with `n = 2`.
    pub closedness: bool,
    pub seed: u64,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self { n: 1, points: 9, polynomials: 20, matrices: 100, closedness: true, seed: 0 }
    }
}

pub fn identity_suite(opts: &SuiteOptions) -> Result<Vec<IdentityCheck>> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut out = vec![beta_powers()?];
    out.extend(wedge_laws(&mut rng)?);
    out.push(sigma_identity());
    out.extend(quadratic_exactness(opts.n, opts.points, &mut rng)?);
    out.extend(first_order_identities(opts.polynomials, opts.closedness, &mut rng)?);
    for n in [2, 3] {
        out.push(moore_path(n, opts.matrices, &mut rng)?);
    }
    Ok(out)
}

fn beta_powers() -> Result<IdentityCheck> {
    let mut dev = 0.0f64;
    for n in 1..=4 {
        let fact: f64 = (1..=n).map(|k| k as f64).product();
        dev = dev.max((top_coefficient(&power(&beta(n), n)?)? - fact).norm());
    }
    Ok(IdentityCheck::new("beta_power_top_coefficient", 4, dev, 0.0))
}

fn random_multivector<R: Rng>(n: usize, degree: usize, rng: &mut R) -> Result<Multivector> {
    let mut terms = Vec::new();
    for mask in 0u32..(1 << (2 * n)) {
        if mask.count_ones() as usize == degree && rng.gen_bool(0.5) {
            let idx: Vec<usize> = (0..2 * n).filter(|i| mask & (1 << i) != 0).collect();
            terms.push((idx, Complex64::new(rng.gen_range(-3..=3) as f64, rng.gen_range(-3..=3) as f64)));
        }
    }
    Multivector::from_terms(n, degree, terms)
}

fn wedge_laws<R: Rng>(rng: &mut R) -> Result<Vec<IdentityCheck>> {
    let n = 3;
    let (mut anti, mut assoc) = (0.0f64, 0.0f64);
    let cases = 50;
    for _ in 0..cases {
        let p = rng.gen_range(1..=3);
        let q = rng.gen_range(1..=3);
        let r = rng.gen_range(0..=(2 * n - p - q).min(2));
        let (a, b, c) = (random_multivector(n, p, rng)?, random_multivector(n, q, rng)?, random_multivector(n, r, rng)?);
        let sign = if (p * q) % 2 == 0 { 1.0 } else { -1.0 };
        anti = anti.max(wedge(&a, &b)?.max_abs_diff(&wedge(&b, &a)?.scale(Complex64::new(sign, 0.0))));
        assoc = assoc.max(wedge(&wedge(&a, &b)?, &c)?.max_abs_diff(&wedge(&a, &wedge(&b, &c)?)?));
    }
    Ok(vec![
        IdentityCheck::new("wedge_graded_anticommutativity", cases, anti, 0.0),
        IdentityCheck::new("wedge_associativity", cases, assoc, 0.0),
    ])
}

/// Exact rational comparison; deviation is the largest mismatch as `f64`.
fn sigma_identity() -> IdentityCheck {
    let mut dev = 0.0f64;
    let mut cases = 0;
    for n in 1..=6usize {
        for m in 1..=n {
            let lambda = extremal_eigenvalues(n, m);
            for p in 1..=m {
                cases += 1;
                let s = extremal_eigen_sum(n, m, p);
                let closed = extremal_eigen_sum_closed_form(n, m, p);
                let sigma: Ratio<i64> = elementary_symmetric(&lambda, p) / Ratio::from_integer(1i64 << (p - 1));
                for d in [s - closed, sigma - s] {
                    dev = dev.max((*d.numer() as f64 / *d.denom() as f64).abs());
                }
            }
        }
    }
    IdentityCheck::new("sigma_p_extremal_identity", cases, dev, 0.0)
}

fn quadratic_exactness<R: Rng>(n: usize, points: usize, rng: &mut R) -> Result<Vec<IdentityCheck>> {
    let spec = GridSpec::new(n, 1.0, points)?;
    let norm = GridField::sample(&spec, |x| x.iter().map(|v| v * v).sum())?;
    let target = beta(n).scale(8.0);
    let a = random_hyperhermitian(n, rng);
    let quad = GridField::sample(&spec, |x| quadratic_value(&a, x))?;
    let form = twoform_from_hyperhermitian(&a.scale(4.0));
    Ok(vec![
        IdentityCheck::new("baston_of_norm_squared", 1, baston(&norm)?.max_deviation_from(&target), 1e-12),
        IdentityCheck::new("baston_of_quadratic", 1, baston(&quad)?.max_deviation_from(&form), 1e-12),
    ])
}

/// Random cubic in `4n` variables with `terms` monomials.
fn random_cubic<R: Rng>(n: usize, terms: usize, rng: &mut R) -> Vec<(Vec<usize>, f64)> {
    (0..terms)
        .map(|_| {
            let deg = rng.gen_range(0..=3);
            let vars = (0..deg).map(|_| rng.gen_range(0..4 * n)).collect();
            (vars, rng.gen_range(-1.0..1.0))
        })
        .collect()
}

fn eval_poly(p: &[(Vec<usize>, f64)], x: &[f64]) -> f64 {
    p.iter().map(|(vars, c)| c * vars.iter().map(|&i| x[i]).product::<f64>()).sum()
}

fn first_order_identities<R: Rng>(count: usize, closedness: bool, rng: &mut R) -> Result<Vec<IdentityCheck>> {
    let spec = GridSpec::new(1, 1.0, 9)?;
    let (mut d00, mut d11, mut anti, mut lap) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..count {
        let p = random_cubic(1, 35, rng);
        let u = GridField::sample(&spec, |x| eval_poly(&p, x))?;
        let f = FormField::from_scalar(&u)?;
        let (a, b) = (d0(&f)?, d1(&f)?);
        d00 = d00.max(d0(&a)?.max_abs());
        d11 = d11.max(d1(&b)?.max_abs());
        let d01 = d0(&b)?;
        anti = anti.max(d01.add(&d1(&a)?)?.max_abs());
        lap = lap.max(d01.sub(&baston(&u)?.to_form_field())?.max_abs());
    }
    let mut out = vec![
        IdentityCheck::new("d0_squared_vanishes", count, d00, 1e-9),
        IdentityCheck::new("d1_squared_vanishes", count, d11, 1e-9),
        IdentityCheck::new("d0_d1_anticommute", count, anti, 1e-9),
        IdentityCheck::new("baston_is_d0_d1", count, lap, 1e-9),
    ];
    if closedness {
        // Forms of degree three need n = 2; 7 points leave one fully supported point.
        let spec = GridSpec::new(2, 1.0, 7)?;
        let (mut c0, mut c1) = (0.0f64, 0.0f64);
        let cases = 2;
        for _ in 0..cases {
            let p = random_cubic(2, 40, rng);
            let u = GridField::sample(&spec, |x| eval_poly(&p, x))?;
            let form = baston(&u)?.to_form_field();
            c0 = c0.max(d0(&form)?.max_abs());
            c1 = c1.max(d1(&form)?.max_abs());
        }
        out.push(IdentityCheck::new("d0_of_baston_vanishes", cases, c0, 1e-9));
        out.push(IdentityCheck::new("d1_of_baston_vanishes", cases, c1, 1e-9));
    }
    Ok(out)
}

/// Density of `Re q̄ᵀAq` against `c₀·moore_det(4A)`, with `c₀` taken once from
/// `A = I` and then held fixed.
fn moore_path<R: Rng>(n: usize, count: usize, rng: &mut R) -> Result<IdentityCheck> {
    let h = 0.5;
    let origin = vec![0.0; 4 * n];
    let id = HyperhermitianMatrix::identity(n);
    let c0 = density_at(&|x: &[f64]| quadratic_value(&id, x), &origin, h, n)? / moore_det(&id.scale(4.0))?;
    let mut dev = 0.0f64;
    for _ in 0..count {
        let a = random_hyperhermitian(n, rng);
        let x: Vec<f64> = (0..4 * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let wedge_side = density_at(&|y: &[f64]| quadratic_value(&a, y), &x, h, n)?;
        let moore_side = c0 * moore_det(&a.scale(4.0))?;
        dev = dev.max((wedge_side - moore_side).abs() / moore_side.abs().max(f64::MIN_POSITIVE));
    }
    Ok(IdentityCheck::new(&format!("moore_determinant_path_n{n}"), count, dev, 1e-9))
}
