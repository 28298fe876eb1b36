//! Relatively extremal functions, projections onto the m-subharmonic class,
//! capacities and radial Dirichlet solves.
//!
//! Radial problems reduce m-subharmonicity to one linear inequality per node:
//! `s_{k+½}^e (g_{k+1} − g_k) ≥ s_{k−½}^e (g_k − g_{k−1})` with `e = 4n/m − 1`,
//! so the largest admissible value at a node is a weighted mean of its two
//! neighbours and the envelope is found by projected SOR.

use crate::calculus::radial::{density_constant, pairwise_sum, shell_volumes, sphere_area};
use crate::calculus::{mollify, second_partials, BastonTable, GridField, GridSpec, RadialProfile};
use crate::error::{Error, Result};
use crate::exterior::{beta, MixedTop};
use crate::hessian::hessian_density;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

/// Ball `B(r)` inside `B(R)` in `H^n`, order `m`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AnnulusConfig {
    pub n: usize,
    pub m: usize,
    pub inner: f64,
    pub outer: f64,
}

impl AnnulusConfig {
    pub fn new(n: usize, m: usize, inner: f64, outer: f64) -> Result<Self> {
        if n == 0 || m == 0 || m > n {
            return Err(Error::Invalid(format!("need 1 <= m <= n, got n = {n}, m = {m}")));
        }
        if !(inner > 0.0 && inner < outer && outer.is_finite()) {
            return Err(Error::Invalid(format!("need 0 < r < R, got r = {inner}, R = {outer}")));
        }
        Ok(Self { n, m, inner, outer })
    }

    /// `a = 2n/m`.
    pub fn exponent(&self) -> f64 {
        2.0 * self.n as f64 / self.m as f64
    }

    /// `max((R^{2−2a} − s^{2−2a})/(r^{2−2a} − R^{2−2a}), −1)`.
    pub fn extremal_value(&self, s: f64) -> f64 {
        if s <= self.inner {
            return -1.0;
        }
        let e = 2.0 - 2.0 * self.exponent();
        let v = (self.outer.powf(e) - s.powf(e)) / (self.inner.powf(e) - self.outer.powf(e));
        v.max(-1.0)
    }

    /// `|S^{4n−1}|·C_{n,m}·((2a−2)/(r^{2−2a} − R^{2−2a}))^m`, the Hessian
    /// mass of the extremal function.
    pub fn capacity(&self) -> f64 {
        let a = self.exponent();
        let e = 2.0 - 2.0 * a;
        let slope = (2.0 * a - 2.0) / (self.inner.powf(e) - self.outer.powf(e));
        sphere_area(self.n) * density_constant(self.n, self.m) * slope.powi(self.m as i32)
    }
}

/// Closed-form extremal function sampled on `K + 1` radii of `[0, R]`.
pub fn extremal_radial(cfg: &AnnulusConfig, intervals: usize) -> Result<RadialProfile> {
    RadialProfile::sample(cfg.n, cfg.outer, intervals, |s| cfg.extremal_value(s))
}

/// Largest `|density_m|` over nodes strictly inside the annulus.
pub fn annulus_residual(p: &RadialProfile, m: usize, inner: f64, outer: f64) -> Result<f64> {
    let d = crate::calculus::radial_density(p, m)?;
    Ok(d.iter()
        .enumerate()
        .filter(|(k, _)| {
            let s = p.radius(*k);
            s > inner + 1e-12 * outer && s < outer
        })
        .fold(0.0f64, |a, (_, v)| a.max(v.abs())))
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct SweepOptions {
    /// Stop when the sup-norm change of one sweep drops below this.
    pub tol: f64,
    pub max_sweeps: usize,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self { tol: 1e-8, max_sweeps: 200_000 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Sweep<T> {
    pub solution: T,
    pub sweeps: usize,
    pub change: f64,
}

/// Radial obstacle problem: nodes in `set` are held at or below −1.
#[derive(Clone, Debug)]
pub struct RadialObstacle {
    pub n: usize,
    pub m: usize,
    pub outer: f64,
    pub intervals: usize,
    pub set: Vec<bool>,
}

impl RadialObstacle {
    pub fn ball(n: usize, m: usize, inner: f64, outer: f64, intervals: usize) -> Result<Self> {
        let cfg = AnnulusConfig::new(n, m, inner, outer)?;
        let ds = outer / intervals as f64;
        let set = (0..=intervals).map(|k| k as f64 * ds <= cfg.inner * (1.0 + 1e-12)).collect();
        Self::new(n, m, outer, intervals, set)
    }

    pub fn new(n: usize, m: usize, outer: f64, intervals: usize, set: Vec<bool>) -> Result<Self> {
        if n == 0 || m == 0 || m > n {
            return Err(Error::Invalid(format!("need 1 <= m <= n, got n = {n}, m = {m}")));
        }
        if intervals < 2 || set.len() != intervals + 1 {
            return Err(Error::Invalid("obstacle mask must have one entry per radius".into()));
        }
        if set[intervals] {
            return Err(Error::Precondition("obstacle set touches the outer sphere".into()));
        }
        Ok(Self { n, m, outer, intervals, set })
    }

    fn upper(&self) -> Vec<f64> {
        self.set.iter().map(|&e| if e { -1.0 } else { 0.0 }).collect()
    }
}

fn radial_weights(n: usize, m: usize, ds: f64, intervals: usize) -> Vec<f64> {
    let e = 4.0 * n as f64 / m as f64 - 1.0;
    (0..intervals).map(|k| ((k as f64 + 0.5) * ds).powf(e)).collect()
}

/// Projected SOR for the largest admissible profile below `upper`, node `K`
/// held at `upper[K]`.
fn radial_psor(n: usize, m: usize, ds: f64, upper: &[f64], start: f64, opts: &SweepOptions) -> Result<Sweep<Vec<f64>>> {
    let k_max = upper.len() - 1;
    let w = radial_weights(n, m, ds, k_max);
    let omega = 2.0 / (1.0 + (PI / k_max as f64).sin());
    let mut g: Vec<f64> = upper.iter().map(|&u| start.min(u)).collect();
    g[k_max] = upper[k_max];
    let mut change = f64::INFINITY;
    for sweep in 1..=opts.max_sweeps {
        change = 0.0;
        for k in 0..k_max {
            let star = if k == 0 { g[1] } else { (w[k] * g[k + 1] + w[k - 1] * g[k - 1]) / (w[k] + w[k - 1]) };
            let new = upper[k].min(g[k] + omega * (star - g[k]));
            change = change.max((new - g[k]).abs());
            g[k] = new;
        }
        if change < opts.tol {
            return Ok(Sweep { solution: g, sweeps: sweep, change });
        }
    }
    Err(Error::NonConvergence { iterations: opts.max_sweeps, change })
}

/// Relatively extremal function of a radial obstacle set.
pub fn radial_envelope(p: &RadialObstacle, opts: &SweepOptions) -> Result<Sweep<RadialProfile>> {
    let ds = p.outer / p.intervals as f64;
    let s = radial_psor(p.n, p.m, ds, &p.upper(), -1.0, opts)?;
    Ok(Sweep { solution: RadialProfile::new(p.n, ds, s.solution)?, sweeps: s.sweeps, change: s.change })
}

/// `true` when every node satisfies the radial cone inequality to `tol`
/// (relative to the largest flux).
pub fn radial_admissible(p: &RadialProfile, m: usize, tol: f64) -> bool {
    let k_max = p.intervals();
    let w = radial_weights(p.n, m, p.ds, k_max);
    let flux: Vec<f64> = (0..k_max).map(|k| w[k] * (p.values[k + 1] - p.values[k])).collect();
    let scale = flux.iter().fold(0.0f64, |a, f| a.max(f.abs()));
    let slack = tol * scale;
    flux[0] >= -slack && flux.windows(2).all(|f| f[1] >= f[0] - slack)
}

/// Largest admissible profile below `target`, with the outer value kept.
pub fn radial_projection(target: &RadialProfile, m: usize, opts: &SweepOptions) -> Result<Sweep<RadialProfile>> {
    if radial_admissible(target, m, 0.0) {
        return Ok(Sweep { solution: target.clone(), sweeps: 0, change: 0.0 });
    }
    let low = target.values.iter().copied().fold(f64::INFINITY, f64::min) - 1.0;
    let s = radial_psor(target.n, m, target.ds, &target.values, low, opts)?;
    Ok(Sweep { solution: target.with_values(s.solution)?, sweeps: s.sweeps, change: s.change })
}

#[derive(Clone, Debug, Serialize)]
pub struct CapacityReport {
    pub capacity: f64,
    /// Mollification radius (0 when the density is taken directly).
    pub eps: f64,
    pub h: f64,
    pub sweeps: usize,
    pub change: f64,
}

/// Hessian mass of the radial envelope; the conservative radial density
/// needs no mollification.
pub fn radial_capacity(p: &RadialObstacle, opts: &SweepOptions) -> Result<CapacityReport> {
    let env = radial_envelope(p, opts)?;
    let capacity = crate::calculus::radial_total_mass(&env.solution, p.m)?;
    Ok(CapacityReport { capacity, eps: 0.0, h: env.solution.ds, sweeps: env.sweeps, change: env.change })
}

/// Solves `(Δu)^m ∧ β^{n−m} = f` for radial `f` given per node `k < K`, with
/// `u(R) = 0`, by integrating the conservative flux outward and the slope
/// inward.
pub fn dirichlet_radial(f: &[f64], n: usize, m: usize, outer: f64) -> Result<RadialProfile> {
    if n == 0 || m == 0 || m > n {
        return Err(Error::Invalid(format!("need 1 <= m <= n, got n = {n}, m = {m}")));
    }
    if f.len() < 2 {
        return Err(Error::Invalid("need at least 2 radial samples".into()));
    }
    if let Some(k) = f.iter().position(|&v| !(v >= 0.0) || !v.is_finite()) {
        return Err(Error::Precondition(format!("right-hand side must be finite and >= 0 (node {k}: {})", f[k])));
    }
    let k_max = f.len();
    let ds = outer / k_max as f64;
    let unit: Vec<f64> = shell_volumes(n, ds, k_max).iter().map(|v| v / sphere_area(n)).collect();
    let c = density_constant(n, m);
    let mut flux = 0.0;
    let mut slopes = Vec::with_capacity(k_max);
    for k in 0..k_max {
        flux += f[k] * unit[k] / c;
        let s = (k as f64 + 0.5) * ds;
        slopes.push((flux / s.powi((4 * n - m) as i32)).powf(1.0 / m as f64));
    }
    let mut g = vec![0.0; k_max + 1];
    for k in (0..k_max).rev() {
        g[k] = g[k + 1] - ds * slopes[k];
    }
    RadialProfile::new(n, ds, g)
}

/// Grid obstacle problem on `[−L, L]^{4n}` with zero boundary layers.
#[derive(Clone, Debug)]
pub struct ObstacleProblem {
    pub spec: GridSpec,
    pub m: usize,
    pub set: Vec<bool>,
}

impl ObstacleProblem {
    pub fn new(spec: GridSpec, m: usize, set: impl Fn(&[f64]) -> bool + Sync) -> Result<Self> {
        if m == 0 || m > spec.n {
            return Err(Error::Invalid(format!("order m = {m} outside 1..={}", spec.n)));
        }
        let mask: Vec<bool> = (0..spec.len()).into_par_iter().map(|i| set(&spec.point(i))).collect();
        if mask.iter().enumerate().any(|(i, &e)| e && spec.margin_of(i) < crate::calculus::INTERIOR_MARGIN) {
            return Err(Error::Precondition("obstacle set reaches the boundary layers".into()));
        }
        Ok(Self { spec, m, set: mask })
    }

    pub fn ball(spec: GridSpec, m: usize, radius: f64) -> Result<Self> {
        Self::new(spec, m, move |x| x.iter().map(|v| v * v).sum::<f64>() <= radius * radius * (1.0 + 1e-12))
    }
}

/// Unknown grid points (margin ≥ 2) split by index parity.
fn colors(spec: &GridSpec) -> [Vec<usize>; 2] {
    let bx = spec.sub_box(crate::calculus::INTERIOR_MARGIN).expect("grid has an interior");
    let mut out = [Vec::new(), Vec::new()];
    let mut idx = vec![0; spec.dim()];
    for l in 0..bx.len() {
        let g = bx.to_grid(l);
        spec.unflatten(g, &mut idx);
        out[idx.iter().sum::<usize>() % 2].push(g);
    }
    out
}

/// Red–black projected SOR for the mean-value (m = 1) inequality.
fn grid_psor_laplace(spec: &GridSpec, upper: &[f64], start: &[f64], opts: &SweepOptions) -> Result<Sweep<Vec<f64>>> {
    let strides = spec.strides();
    let dim = spec.dim() as f64;
    let omega = 2.0 / (1.0 + (PI / (spec.points - 1) as f64).sin());
    let mut u = start.to_vec();
    let classes = colors(spec);
    let mut change = f64::INFINITY;
    for sweep in 1..=opts.max_sweeps {
        change = 0.0;
        for class in &classes {
            let updates: Vec<(usize, f64)> = class
                .par_iter()
                .map(|&g| {
                    let mean = strides.iter().map(|&s| u[g + s] + u[g - s]).sum::<f64>() / (2.0 * dim);
                    (g, upper[g].min(u[g] + omega * (mean - u[g])))
                })
                .collect();
            for (g, v) in updates {
                change = change.max((v - u[g]).abs());
                u[g] = v;
            }
        }
        if change < opts.tol {
            return Ok(Sweep { solution: u, sweeps: sweep, change });
        }
    }
    Err(Error::NonConvergence { iterations: opts.max_sweeps, change })
}

/// Gauss–Seidel sweeps for `m ≥ 2`: each point is raised to the largest value
/// keeping its local Baston form in the cone, found by bisection.
fn grid_sweep_cone(spec: &GridSpec, m: usize, upper: &[f64], start: &[f64], opts: &SweepOptions) -> Result<Sweep<Vec<f64>>> {
    let n = spec.n;
    let d = spec.dim();
    let h = spec.spacing();
    let strides = spec.strides();
    let table = BastonTable::new(n);
    let kernels: Vec<MixedTop> = (1..=m).map(|k| MixedTop::new(n, k)).collect::<Result<_>>()?;
    let b = beta(n).to_pairs();
    let mut u = start.to_vec();
    let order: Vec<usize> = {
        let [a, c] = colors(spec);
        let mut all: Vec<usize> = a.into_iter().chain(c).collect();
        all.sort_unstable();
        all
    };
    let mut hess = vec![0.0; d * d];
    let mut form = vec![Complex64::new(0.0, 0.0); table.num_pairs()];
    let mut trial = form.clone();
    let mut change = f64::INFINITY;
    for sweep in 1..=opts.max_sweeps {
        change = 0.0;
        for &g in &order {
            let keep = u[g];
            u[g] = 0.0;
            second_partials(&u, &strides, h, g, &mut hess);
            u[g] = keep;
            table.apply(&hess, &mut form);
            let scale = form.iter().fold(1e-300f64, |a, z| a.max(z.norm()));
            let mut inside = |t: f64| {
                let shift = 8.0 * t / (h * h);
                for ((x, f), bb) in trial.iter_mut().zip(&form).zip(&b) {
                    *x = *f - shift * bb;
                }
                kernels.iter().all(|k| k.eval_same(&trial).re >= 0.0)
            };
            let new = if inside(upper[g]) {
                upper[g]
            } else {
                let mut hi = upper[g];
                let mut lo = keep.min(hi);
                let mut step = (scale * h * h).max(1e-12);
                while !inside(lo) {
                    hi = lo;
                    lo -= step;
                    step *= 2.0;
                }
                let width = opts.tol * h * h;
                while hi - lo > width {
                    let mid = 0.5 * (lo + hi);
                    if inside(mid) {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                lo
            };
            change = change.max((new - u[g]).abs());
            u[g] = new;
        }
        if change < opts.tol {
            return Ok(Sweep { solution: u, sweeps: sweep, change });
        }
    }
    Err(Error::NonConvergence { iterations: opts.max_sweeps, change })
}

fn grid_sweep(spec: &GridSpec, m: usize, upper: &[f64], start: &[f64], opts: &SweepOptions) -> Result<Sweep<Vec<f64>>> {
    if m == 1 {
        grid_psor_laplace(spec, upper, start, opts)
    } else {
        grid_sweep_cone(spec, m, upper, start, opts)
    }
}

/// Relatively extremal function of the obstacle set on the grid.
pub fn extremal_envelope(p: &ObstacleProblem, opts: &SweepOptions) -> Result<Sweep<GridField>> {
    let spec = &p.spec;
    let upper: Vec<f64> = p.set.iter().map(|&e| if e { -1.0 } else { 0.0 }).collect();
    let start: Vec<f64> = (0..spec.len())
        .map(|i| if spec.margin_of(i) < crate::calculus::INTERIOR_MARGIN { 0.0 } else { -1.0 })
        .collect();
    let s = grid_sweep(spec, p.m, &upper, &start, opts)?;
    Ok(Sweep { solution: GridField::new(spec.clone(), s.solution)?, sweeps: s.sweeps, change: s.change })
}

/// Capacity as the Hessian mass of the mollified envelope (`ε = 4h` unless
/// given).
pub fn capacity(p: &ObstacleProblem, opts: &SweepOptions, eps: Option<f64>) -> Result<CapacityReport> {
    let env = extremal_envelope(p, opts)?;
    let h = p.spec.spacing();
    let eps = eps.unwrap_or(4.0 * h);
    let smooth = mollify(&env.solution, eps)?;
    let capacity = hessian_density(&smooth, p.m)?.total_mass(|_| true);
    Ok(CapacityReport { capacity, eps, h, sweeps: env.sweeps, change: env.change })
}

/// `true` when every unknown point passes the local cone test (mean-value
/// inequality for `m = 1`) to `tol` relative to the field's size.
pub fn grid_admissible(u: &GridField, m: usize, tol: f64) -> Result<bool> {
    let spec = u.spec();
    let scale = u.values().iter().fold(0.0f64, |a, v| a.max(v.abs())).max(f64::MIN_POSITIVE);
    let [a, b] = colors(spec);
    let strides = spec.strides();
    if m == 1 {
        let v = u.values();
        let dim = spec.dim() as f64;
        return Ok(a.iter().chain(&b).all(|&g| {
            let mean = strides.iter().map(|&s| v[g + s] + v[g - s]).sum::<f64>() / (2.0 * dim);
            mean - v[g] >= -tol * scale
        }));
    }
    let r = crate::hessian::is_msh(u, m, tol, 0)?;
    Ok(r.minima.iter().all(|&v| v >= -tol))
}

/// Largest admissible grid function below `target`, outer layers kept.
pub fn projection(target: &GridField, m: usize, opts: &SweepOptions) -> Result<Sweep<GridField>> {
    let spec = target.spec();
    if m == 0 || m > spec.n {
        return Err(Error::Invalid(format!("order m = {m} outside 1..={}", spec.n)));
    }
    if m == 1 && grid_admissible(target, 1, 0.0)? {
        return Ok(Sweep { solution: target.clone(), sweeps: 0, change: 0.0 });
    }
    // m = 1 is a linear complementarity problem: projected SOR converges from
    // any start, so the target itself is used. The cone sweep needs a start
    // from below.
    let start: Vec<f64> = if m == 1 {
        target.values().to_vec()
    } else {
        let low = target.values().iter().copied().fold(f64::INFINITY, f64::min) - 1.0;
        (0..spec.len())
            .map(|i| if spec.margin_of(i) < crate::calculus::INTERIOR_MARGIN { target.values()[i] } else { low })
            .collect()
    };
    let s = grid_sweep(spec, m, target.values(), &start, opts)?;
    Ok(Sweep { solution: GridField::new(spec.clone(), s.solution)?, sweeps: s.sweeps, change: s.change })
}

/// Total mass of a radial density given per node `k < K`.
pub fn radial_mass(f: &[f64], n: usize, ds: f64) -> f64 {
    let v = shell_volumes(n, ds, f.len());
    let t: Vec<f64> = f.iter().zip(&v).map(|(a, b)| a * b).collect();
    pairwise_sum(&t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_endpoints() {
        let c = AnnulusConfig::new(2, 2, 0.5, 1.0).unwrap();
        assert_eq!(c.extremal_value(0.5), -1.0);
        assert!(c.extremal_value(1.0).abs() < 1e-15);
        assert_eq!(c.extremal_value(0.0), -1.0);
        assert!(AnnulusConfig::new(2, 3, 0.5, 1.0).is_err());
        assert!(AnnulusConfig::new(2, 1, 1.0, 0.5).is_err());
    }

    #[test]
    fn dirichlet_inverts_density() {
        let p = RadialProfile::sample(2, 1.0, 100, |s| s * s - 1.0).unwrap();
        for m in 1..=2 {
            let f = crate::calculus::radial_density(&p, m).unwrap();
            let g = dirichlet_radial(&f, 2, m, 1.0).unwrap();
            assert!(g.max_abs_diff(&p) < 1e-12);
        }
        assert!(dirichlet_radial(&[1.0, -1.0, 0.0], 1, 1, 1.0).is_err());
    }

    #[test]
    fn radial_envelope_of_whole_domain_is_minus_one() {
        let mut set = vec![true; 41];
        set[40] = false;
        let p = RadialObstacle::new(2, 1, 1.0, 40, set).unwrap();
        let e = radial_envelope(&p, &SweepOptions::default()).unwrap();
        assert!(e.solution.values[..40].iter().all(|&v| v == -1.0));
    }

    #[test]
    fn admissible_targets_are_fixed_points() {
        let p = RadialProfile::sample(2, 1.0, 50, |s| s * s - 1.0).unwrap();
        let r = radial_projection(&p, 2, &SweepOptions::default()).unwrap();
        assert_eq!(r.sweeps, 0);
        assert_eq!(r.solution, p);
    }

    #[test]
    fn small_grid_envelope_is_bounded() {
        let spec = GridSpec::new(1, 1.0, 9).unwrap();
        let p = ObstacleProblem::ball(spec, 1, 0.3).unwrap();
        let e = extremal_envelope(&p, &SweepOptions::default()).unwrap().solution;
        assert!(e.values().iter().all(|&v| (-1.0..=0.0).contains(&v)));
        let centre = e.spec().len() / 2;
        assert_eq!(e.values()[centre], -1.0);
        assert!(grid_admissible(&e, 1, 1e-6).unwrap());
    }
}
