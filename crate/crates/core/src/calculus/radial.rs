//! Radial reduction: functions `u(q) = g(‖q‖)` sampled at `s_k = k·ds`.
//!
//! Hessian densities use a conservative finite-volume form
//! `C_{n,m} s^{1−4n} (s^{4n−m} g′^m)′`, which telescopes, is exact on `s²`
//! and keeps the discrete energies symmetric.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    pub n: usize,
    pub ds: f64,
    pub values: Vec<f64>,
}

impl RadialProfile {
    pub fn new(n: usize, ds: f64, values: Vec<f64>) -> Result<Self> {
        if n == 0 || n > 8 {
            return Err(Error::Invalid(format!("radial dimension n = {n} outside 1..=8")));
        }
        if !(ds.is_finite() && ds > 0.0) {
            return Err(Error::Invalid(format!("radial step must be positive, got {ds}")));
        }
        if values.len() < 3 {
            return Err(Error::Invalid("radial profile needs at least 3 samples".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Invalid("radial profile has non-finite samples".into()));
        }
        Ok(Self { n, ds, values })
    }

    /// Samples `f` at `K + 1` radii on `[0, outer]`.
    pub fn sample(n: usize, outer: f64, intervals: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        if intervals < 2 {
            return Err(Error::Invalid("need at least 2 radial intervals".into()));
        }
        let ds = outer / intervals as f64;
        Self::new(n, ds, (0..=intervals).map(|k| f(k as f64 * ds)).collect())
    }

    pub fn zeros(n: usize, outer: f64, intervals: usize) -> Result<Self> {
        Self::sample(n, outer, intervals, |_| 0.0)
    }

    /// Number of intervals `K`.
    pub fn intervals(&self) -> usize {
        self.values.len() - 1
    }

    pub fn outer(&self) -> f64 {
        self.intervals() as f64 * self.ds
    }

    pub fn radius(&self, k: usize) -> f64 {
        k as f64 * self.ds
    }

    pub fn radii(&self) -> Vec<f64> {
        (0..self.values.len()).map(|k| self.radius(k)).collect()
    }

    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        if values.len() != self.values.len() {
            return Err(Error::Mismatch(format!("expected {} samples, got {}", self.values.len(), values.len())));
        }
        Self::new(self.n, self.ds, values)
    }

    pub fn same_grid(&self, other: &Self) -> bool {
        self.n == other.n && self.ds == other.ds && self.values.len() == other.values.len()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.values.iter().zip(&other.values).fold(0.0f64, |a, (x, y)| a.max((x - y).abs()))
    }

    /// Forward differences `(g_{k+1} − g_k)/ds`, one per interval.
    pub fn slopes(&self) -> Vec<f64> {
        self.values.windows(2).map(|w| (w[1] - w[0]) / self.ds).collect()
    }
}

/// `|S^{4n−1}| = 2π^{2n}/(2n−1)!`.
pub fn sphere_area(n: usize) -> f64 {
    2.0 * PI.powi(2 * n as i32) / factorial(2 * n - 1)
}

/// Volume of the ball of radius `s` in `R^{4n}`.
pub fn ball_volume(n: usize, s: f64) -> f64 {
    PI.powi(2 * n as i32) / factorial(2 * n) * s.powi(4 * n as i32)
}

/// `C_{n,m} = 4^{m−1}(m−1)!(n−m)!·C(n−1, m−1)`.
pub fn density_constant(n: usize, m: usize) -> f64 {
    4f64.powi(m as i32 - 1) * factorial(m - 1) * factorial(n - m) * binom(n - 1, m - 1)
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

fn binom(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn check_order(n: usize, m: usize) -> Result<()> {
    if m == 0 || m > n {
        return Err(Error::Invalid(format!("order m = {m} outside 1..={n}")));
    }
    Ok(())
}

/// Lebesgue volume of the control shell around node `k`, `k = 0…K−1`:
/// `[s_{k−½}, s_{k+½}]`, with the ball `[0, ds/2]` at the origin.
pub fn shell_volumes(n: usize, ds: f64, intervals: usize) -> Vec<f64> {
    (0..intervals)
        .map(|k| {
            let hi = (k as f64 + 0.5) * ds;
            let lo = if k == 0 { 0.0 } else { (k as f64 - 0.5) * ds };
            ball_volume(n, hi) - ball_volume(n, lo)
        })
        .collect()
}

/// Shell volume divided by the sphere area, `(hi^{4n} − lo^{4n})/(4n)`.
fn unit_shell(n: usize, ds: f64, k: usize) -> f64 {
    let e = 4 * n as i32;
    let hi = (k as f64 + 0.5) * ds;
    let lo = if k == 0 { 0.0 } else { (k as f64 - 0.5) * ds };
    (hi.powi(e) - lo.powi(e)) / (4 * n) as f64
}

/// Fluxes `F_{k+½} = s_{k+½}^{4n−m} Π_i slope_i` per interval.
fn fluxes(n: usize, ds: f64, slopes: &[Vec<f64>]) -> Vec<f64> {
    let m = slopes.len();
    (0..slopes[0].len())
        .map(|k| {
            let s = (k as f64 + 0.5) * ds;
            s.powi((4 * n - m) as i32) * slopes.iter().map(|g| g[k]).product::<f64>()
        })
        .collect()
}

fn densities_from_fluxes(n: usize, m: usize, ds: f64, flux: &[f64]) -> Vec<f64> {
    let c = density_constant(n, m);
    (0..flux.len())
        .map(|k| {
            let below = if k == 0 { 0.0 } else { flux[k - 1] };
            c * (flux[k] - below) / unit_shell(n, ds, k)
        })
        .collect()
}

/// `(Δu)^m ∧ β^{n−m}` per node `k = 0…K−1` (the boundary node carries none).
pub fn radial_density(p: &RadialProfile, m: usize) -> Result<Vec<f64>> {
    check_order(p.n, m)?;
    let s = p.slopes();
    let slopes: Vec<Vec<f64>> = (0..m).map(|_| s.clone()).collect();
    Ok(densities_from_fluxes(p.n, m, p.ds, &fluxes(p.n, p.ds, &slopes)))
}

/// `Δu_1 ∧ … ∧ Δu_m ∧ β^{n−m}` per node for radial arguments.
pub fn radial_mixed_density(profiles: &[&RadialProfile]) -> Result<Vec<f64>> {
    let first = profiles.first().ok_or_else(|| Error::Invalid("no profiles given".into()))?;
    check_order(first.n, profiles.len())?;
    if profiles.iter().any(|p| !p.same_grid(first)) {
        return Err(Error::Mismatch("radial profiles on different grids".into()));
    }
    let slopes: Vec<Vec<f64>> = profiles.iter().map(|p| p.slopes()).collect();
    Ok(densities_from_fluxes(first.n, profiles.len(), first.ds, &fluxes(first.n, first.ds, &slopes)))
}

/// Total Hessian mass of the ball: telescopes to `|S|·C·F_{K−½}`.
pub fn radial_total_mass(p: &RadialProfile, m: usize) -> Result<f64> {
    let d = radial_density(p, m)?;
    Ok(integrate(&d, &shell_volumes(p.n, p.ds, p.intervals())))
}

/// Closed-form total mass from the outermost flux.
pub fn radial_boundary_flux_mass(p: &RadialProfile, m: usize) -> Result<f64> {
    check_order(p.n, m)?;
    let k = p.intervals();
    let s = (k as f64 - 0.5) * p.ds;
    let slope = (p.values[k] - p.values[k - 1]) / p.ds;
    Ok(sphere_area(p.n) * density_constant(p.n, m) * s.powi((4 * p.n - m) as i32) * slope.powi(m as i32))
}

/// Deterministic pairwise sum of `values[k]·weights[k]`.
pub fn integrate(values: &[f64], weights: &[f64]) -> f64 {
    let prod: Vec<f64> = values.iter().zip(weights).map(|(a, b)| a * b).collect();
    pairwise_sum(&prod)
}

pub fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 8 {
        return v.iter().sum();
    }
    let (a, b) = v.split_at(v.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

/// Pointwise `(λ_rad, λ_tan)` of the Hessian from central differences:
/// `λ_tan = 2g′/s`, `λ_rad = ½(g″ + 3g′/s)`, both `2g″` at the origin.
/// Multiplicities are 1 and `n − 1`.
pub fn radial_eigenvalues(p: &RadialProfile) -> Vec<(f64, f64)> {
    let g = &p.values;
    let ds = p.ds;
    let k_max = p.intervals();
    (0..=k_max)
        .map(|k| {
            if k == 0 {
                let g2 = 2.0 * (g[1] - g[0]) / (ds * ds);
                return (2.0 * g2, 2.0 * g2);
            }
            let (g1, g2) = if k < k_max {
                ((g[k + 1] - g[k - 1]) / (2.0 * ds), (g[k + 1] - 2.0 * g[k] + g[k - 1]) / (ds * ds))
            } else {
                let (a, b, c) = (g[k], g[k - 1], g[k - 2]);
                let g1 = (3.0 * a - 4.0 * b + c) / (2.0 * ds);
                let g2 = if k >= 3 { (2.0 * a - 5.0 * b + 4.0 * c - g[k - 3]) / (ds * ds) } else { (a - 2.0 * b + c) / (ds * ds) };
                (g1, g2)
            };
            let s = k as f64 * ds;
            (0.5 * (g2 + 3.0 * g1 / s), 2.0 * g1 / s)
        })
        .collect()
}

/// `2^m m!(n−m)! σ_m(λ_rad, λ_tan, …, λ_tan)`: the density a pointwise
/// eigenvalue pair would give.
pub fn density_from_eigenvalues(n: usize, m: usize, rad: f64, tan: f64) -> f64 {
    let sigma = binom(n - 1, m) * tan.powi(m as i32) + rad * binom(n - 1, m - 1) * tan.powi(m as i32 - 1);
    2f64.powi(m as i32) * factorial(m) * factorial(n - m) * sigma
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn norm_squared_is_exact() {
        for (n, m) in [(1, 1), (2, 1), (2, 2), (3, 2), (4, 4)] {
            let p = RadialProfile::sample(n, 1.0, 40, |s| s * s).unwrap();
            let want = 8f64.powi(m as i32) * factorial(n);
            for d in radial_density(&p, m).unwrap() {
                assert!((d - want).abs() < 1e-9 * want, "n={n} m={m}: {d}");
            }
        }
    }

    #[test]
    fn mass_telescopes() {
        let p = RadialProfile::sample(2, 1.3, 50, |s| (s * s - 1.0).powi(2) + s).unwrap();
        for m in 1..=2 {
            let a = radial_total_mass(&p, m).unwrap();
            let b = radial_boundary_flux_mass(&p, m).unwrap();
            assert!((a - b).abs() < 1e-11 * b.abs());
        }
    }

    #[test]
    fn shells_fill_the_ball() {
        let v = shell_volumes(2, 0.1, 10);
        let total: f64 = v.iter().sum();
        assert!((total - ball_volume(2, 0.95)).abs() < 1e-14);
        assert!((sphere_area(1) - 2.0 * PI * PI).abs() < 1e-12);
    }

    #[test]
    fn eigenvalues_of_norm_squared() {
        let p = RadialProfile::sample(2, 1.0, 20, |s| s * s).unwrap();
        for (r, t) in radial_eigenvalues(&p) {
            assert!((r - 4.0).abs() < 1e-9 && (t - 4.0).abs() < 1e-9);
        }
    }

    #[test]
    fn constant_density_matches_eigenvalue_form() {
        // for s², both eigenvalues are 4
        for (n, m) in [(2, 1), (3, 2), (3, 3)] {
            let want = 8f64.powi(m as i32) * factorial(n);
            assert!((density_from_eigenvalues(n, m, 4.0, 4.0) - want).abs() < 1e-9 * want);
        }
    }
}
