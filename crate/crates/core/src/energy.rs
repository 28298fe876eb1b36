//! Energies `E_p`, mutual energies, the Hölder-type inequality, the functional
//! `F_μ = E/(m+1) + ∫u dμ` and a projected descent solver for
//! `(Δφ)^m ∧ β^{n−m} = μ`.
//!
//! Everything is written once against [`EnergyDomain`], implemented for
//! radial profiles and for grid fields with fixed boundary layers.

use crate::calculus::radial::{density_constant, pairwise_sum, shell_volumes};
use crate::calculus::{GridField, RadialProfile};
use crate::envelope::{projection, radial_projection, SweepOptions};
use crate::error::{Error, Result};
use crate::hessian::{hessian_density, mixed_hessian_density};
use rayon::prelude::*;
use serde::Serialize;

/// A function space carrying Hessian densities at a fixed set of nodes.
pub trait EnergyDomain: Clone + Send + Sync {
    fn node_count(&self) -> usize;
    fn node_values(&self) -> Vec<f64>;
    /// Lebesgue volume attached to each node.
    fn volumes(&self) -> Vec<f64>;
    fn density(&self, m: usize) -> Result<Vec<f64>>;
    /// `Δself ∧ Δothers… ∧ β^{n−m}` with `m = 1 + others.len()`.
    fn mixed_density(&self, others: &[&Self]) -> Result<Vec<f64>>;
    /// Largest `|u|` on the fixed boundary values.
    fn boundary_defect(&self) -> f64;
    /// Solves `(L − κ)x = rhs` at the nodes, `L` the `density_1` operator with
    /// zero boundary values.
    fn screened_solve(&self, rhs: &[f64], kappa: f64) -> Result<Vec<f64>>;
    /// Same with `L` replaced by the linearization of `density_m` at `self`
    /// where the domain supports it.
    fn linearized_solve(&self, m: usize, rhs: &[f64], kappa: f64) -> Result<Vec<f64>> {
        let _ = m;
        self.screened_solve(rhs, kappa)
    }
    /// `self + t·x` at the nodes, boundary values unchanged.
    fn add_nodes(&self, x: &[f64], t: f64) -> Result<Self>;
    /// Largest admissible function below `self`.
    fn project(&self, m: usize, opts: &SweepOptions) -> Result<Self>;
    fn zero_like(&self) -> Self;
}

impl EnergyDomain for RadialProfile {
    fn node_count(&self) -> usize {
        self.intervals()
    }

    fn node_values(&self) -> Vec<f64> {
        self.values[..self.intervals()].to_vec()
    }

    fn volumes(&self) -> Vec<f64> {
        shell_volumes(self.n, self.ds, self.intervals())
    }

    fn density(&self, m: usize) -> Result<Vec<f64>> {
        crate::calculus::radial_density(self, m)
    }

    fn mixed_density(&self, others: &[&Self]) -> Result<Vec<f64>> {
        let mut all = vec![self];
        all.extend_from_slice(others);
        crate::calculus::radial_mixed_density(&all)
    }

    fn boundary_defect(&self) -> f64 {
        self.values[self.intervals()].abs()
    }

    fn screened_solve(&self, rhs: &[f64], kappa: f64) -> Result<Vec<f64>> {
        let c = density_constant(self.n, 1);
        let e = (4 * self.n - 1) as i32;
        let w: Vec<f64> = (0..self.intervals()).map(|k| c * ((k as f64 + 0.5) * self.ds).powi(e) / self.ds).collect();
        radial_flux_solve(self, &w, rhs, kappa)
    }

    fn linearized_solve(&self, m: usize, rhs: &[f64], kappa: f64) -> Result<Vec<f64>> {
        if m == 1 {
            return self.screened_solve(rhs, kappa);
        }
        // d/dg of C s^{4n−m} g′^m is C m s^{4n−m} g′^{m−1}; slopes are floored
        // so flat regions (and the zero start) still get a definite operator.
        let slopes = self.slopes();
        let top = slopes.iter().fold(0.0f64, |a, &b| a.max(b));
        let floor = if top > 0.0 { 1e-2 * top } else { 1.0 };
        let c = density_constant(self.n, m) * m as f64;
        let e = (4 * self.n - m) as i32;
        let w: Vec<f64> = slopes
            .iter()
            .enumerate()
            .map(|(k, &g)| c * ((k as f64 + 0.5) * self.ds).powi(e) * g.max(floor).powi(m as i32 - 1) / self.ds)
            .collect();
        radial_flux_solve(self, &w, rhs, kappa)
    }

    fn add_nodes(&self, x: &[f64], t: f64) -> Result<Self> {
        let mut v = self.values.clone();
        for (a, b) in v.iter_mut().zip(x) {
            *a += t * b;
        }
        self.with_values(v)
    }

    fn project(&self, m: usize, opts: &SweepOptions) -> Result<Self> {
        Ok(radial_projection(self, m, opts)?.solution)
    }

    fn zero_like(&self) -> Self {
        self.with_values(vec![0.0; self.values.len()]).expect("zeros are finite")
    }
}

/// `(D_w − κ)x = rhs` with `D_w x = (w_k(x_{k+1} − x_k) − w_{k−1}(x_k − x_{k−1}))/U_k`
/// over unit-sphere shell volumes `U_k`, zero value at the outer node.
fn radial_flux_solve(p: &RadialProfile, w: &[f64], rhs: &[f64], kappa: f64) -> Result<Vec<f64>> {
    let k_max = p.intervals();
    if rhs.len() != k_max {
        return Err(Error::Mismatch(format!("expected {k_max} right-hand side values, got {}", rhs.len())));
    }
    let area = crate::calculus::sphere_area(p.n);
    let unit: Vec<f64> = shell_volumes(p.n, p.ds, k_max).iter().map(|v| v / area).collect();
    let mut lower = vec![0.0; k_max];
    let mut diag = vec![0.0; k_max];
    let mut upper = vec![0.0; k_max];
    for k in 0..k_max {
        let left = if k == 0 { 0.0 } else { w[k - 1] };
        lower[k] = left / unit[k];
        upper[k] = if k + 1 < k_max { w[k] / unit[k] } else { 0.0 };
        diag[k] = -(left + w[k]) / unit[k] - kappa;
    }
    Ok(thomas(&lower, &diag, &upper, rhs))
}

fn thomas(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = upper[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for k in 1..n {
        let den = diag[k] - lower[k] * c[k - 1];
        c[k] = upper[k] / den;
        d[k] = (rhs[k] - lower[k] * d[k - 1]) / den;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d[n - 1];
    for k in (0..n - 1).rev() {
        x[k] = d[k] - c[k] * x[k + 1];
    }
    x
}

impl EnergyDomain for GridField {
    fn node_count(&self) -> usize {
        self.spec().sub_box(self.interior_margin()).map(|b| b.len()).unwrap_or(0)
    }

    fn node_values(&self) -> Vec<f64> {
        let b = self.spec().sub_box(self.interior_margin()).expect("grid has an interior");
        (0..b.len()).map(|l| self.values()[b.to_grid(l)]).collect()
    }

    fn volumes(&self) -> Vec<f64> {
        vec![self.spec().cell_volume(); self.node_count()]
    }

    fn density(&self, m: usize) -> Result<Vec<f64>> {
        Ok(hessian_density(self, m)?.values().to_vec())
    }

    fn mixed_density(&self, others: &[&Self]) -> Result<Vec<f64>> {
        if others.iter().any(|o| o.interior_margin() != self.interior_margin()) {
            return Err(Error::Mismatch("grid fields with different valid regions".into()));
        }
        let mut all = vec![self];
        all.extend_from_slice(others);
        Ok(mixed_hessian_density(&all)?.values().to_vec())
    }

    fn boundary_defect(&self) -> f64 {
        self.shell_max_abs(self.interior_margin())
    }

    fn screened_solve(&self, rhs: &[f64], kappa: f64) -> Result<Vec<f64>> {
        let spec = self.spec();
        let bx = spec.sub_box(self.interior_margin())?;
        if rhs.len() != bx.len() {
            return Err(Error::Mismatch(format!("expected {} right-hand side values, got {}", bx.len(), rhs.len())));
        }
        // density_1 = (n−1)!·Lap with 3-point second differences
        let c = factorial(spec.n - 1) / (spec.spacing() * spec.spacing());
        let local = bx.local_strides();
        let side = bx.side;
        let dim = spec.dim();
        // (κ − L) y, y zero outside the box
        let apply = |y: &[f64]| -> Vec<f64> {
            (0..y.len())
                .into_par_iter()
                .map(|l| {
                    let mut idx = l;
                    let mut lap = -2.0 * dim as f64 * y[l];
                    for a in (0..dim).rev() {
                        let i = idx % side;
                        idx /= side;
                        if i + 1 < side {
                            lap += y[l + local[a]];
                        }
                        if i > 0 {
                            lap += y[l - local[a]];
                        }
                    }
                    kappa * y[l] - c * lap
                })
                .collect()
        };
        let b: Vec<f64> = rhs.iter().map(|v| -v).collect();
        Ok(conjugate_gradient(apply, &b, 1e-12, 10 * bx.len().max(100)))
    }

    fn add_nodes(&self, x: &[f64], t: f64) -> Result<Self> {
        let bx = self.spec().sub_box(self.interior_margin())?;
        let mut v = self.values().to_vec();
        for (l, d) in x.iter().enumerate() {
            v[bx.to_grid(l)] += t * d;
        }
        GridField::with_margin(self.spec().clone(), v, self.valid_margin())
    }

    fn project(&self, m: usize, opts: &SweepOptions) -> Result<Self> {
        Ok(projection(self, m, opts)?.solution)
    }

    fn zero_like(&self) -> Self {
        GridField::zeros(self.spec().clone())
    }
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    let t: Vec<f64> = a.par_iter().zip(b).map(|(x, y)| x * y).collect();
    pairwise_sum(&t)
}

fn conjugate_gradient(apply: impl Fn(&[f64]) -> Vec<f64>, b: &[f64], rtol: f64, max_iter: usize) -> Vec<f64> {
    let mut x = vec![0.0; b.len()];
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut rr = dot(&r, &r);
    let stop = rtol * rtol * rr;
    for _ in 0..max_iter {
        if rr <= stop || rr == 0.0 {
            break;
        }
        let ap = apply(&p);
        let alpha = rr / dot(&p, &ap);
        x.par_iter_mut().zip(&p).for_each(|(a, b)| *a += alpha * b);
        r.par_iter_mut().zip(&ap).for_each(|(a, b)| *a -= alpha * b);
        let next = dot(&r, &r);
        let beta = next / rr;
        p.par_iter_mut().zip(&r).for_each(|(a, b)| *a = b + beta * *a);
        rr = next;
    }
    x
}

fn weighted_sum(values: &[f64], weights: &[f64]) -> f64 {
    let t: Vec<f64> = values.iter().zip(weights).map(|(a, b)| a * b).collect();
    pairwise_sum(&t)
}

/// Checks `u ≤ tol` at the nodes and `|u| ≤ tol` on the boundary.
fn check_admissible<D: EnergyDomain>(u: &D, tol: f64) -> Result<Vec<f64>> {
    let b = u.boundary_defect();
    if b > tol {
        return Err(Error::Precondition(format!("function does not vanish on the boundary (max |u| = {b:.3e})")));
    }
    let v = u.node_values();
    let top = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if top > tol {
        return Err(Error::Precondition(format!("function must be <= 0 (max {top:.3e})")));
    }
    Ok(v)
}

fn neg_pow(v: &[f64], p: f64) -> Vec<f64> {
    v.iter().map(|&x| (-x).max(0.0).powf(p)).collect()
}

/// `E_p(u) = ∫ (−u)^p (Δu)^m ∧ β^{n−m}`.
pub fn energy_p<D: EnergyDomain>(u: &D, m: usize, p: f64, tol: f64) -> Result<f64> {
    let v = check_admissible(u, tol)?;
    let d = u.density(m)?;
    let w: Vec<f64> = neg_pow(&v, p).iter().zip(u.volumes()).map(|(a, b)| a * b).collect();
    Ok(weighted_sum(&d, &w))
}

/// `E_p(u_0; u_1, …, u_m) = ∫ (−u_0)^p Δu_1 ∧ … ∧ Δu_m ∧ β^{n−m}`.
pub fn mutual_energy_p<D: EnergyDomain>(u0: &D, us: &[&D], p: f64, tol: f64) -> Result<f64> {
    let (first, rest) = us.split_first().ok_or_else(|| Error::Invalid("need at least one slot".into()))?;
    let v = check_admissible(u0, tol)?;
    for u in us {
        check_admissible(*u, tol)?;
    }
    let d = first.mixed_density(rest)?;
    if d.len() != v.len() {
        return Err(Error::Mismatch("arguments live on different nodes".into()));
    }
    let w: Vec<f64> = neg_pow(&v, p).iter().zip(u0.volumes()).map(|(a, b)| a * b).collect();
    Ok(weighted_sum(&d, &w))
}

/// `α(m, p) = (p+2)((p+1)/p)^{m−1} − (p+1)`.
pub fn holder_alpha(m: usize, p: f64) -> f64 {
    (p + 2.0) * ((p + 1.0) / p).powi(m as i32 - 1) - (p + 1.0)
}

/// `D_p = p^{pα/(p−1)}` for `p > 1`, `D_1 = 1`.
pub fn holder_constant(m: usize, p: f64) -> f64 {
    if p == 1.0 {
        1.0
    } else {
        p.powf(p * holder_alpha(m, p) / (p - 1.0))
    }
}

/// The other reading of the exponent, `p^{α−1}`.
pub fn holder_constant_alternative(m: usize, p: f64) -> f64 {
    if p == 1.0 {
        1.0
    } else {
        p.powf(holder_alpha(m, p) - 1.0)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EnergyReport {
    pub p: f64,
    pub m: usize,
    pub energy: f64,
    pub energies: Vec<f64>,
    pub mutual: f64,
    /// `D_p E_p(u)^{p/(m+p)} Π E_p(v_i)^{1/(m+p)}`
    pub bound: f64,
    pub alpha: f64,
    pub d_p: f64,
    /// Present when the other exponent reading gives a different constant.
    pub d_p_alternative: Option<f64>,
    pub holds: bool,
}

/// Both sides of `E_p(u, v_1, …, v_m) ≤ D_p E_p(u)^{p/(m+p)} Π E_p(v_i)^{1/(m+p)}`;
/// `holds` allows a relative slack `tol`.
pub fn holder_check<D: EnergyDomain>(u: &D, vs: &[&D], p: f64, tol: f64) -> Result<EnergyReport> {
    let m = vs.len();
    let energy = energy_p(u, m, p, tol)?;
    let energies = vs.iter().map(|v| energy_p(*v, m, p, tol)).collect::<Result<Vec<_>>>()?;
    let mutual = mutual_energy_p(u, vs, p, tol)?;
    let mp = (m as f64) + p;
    let d_p = holder_constant(m, p);
    let alt = holder_constant_alternative(m, p);
    let bound = d_p * energy.max(0.0).powf(p / mp) * energies.iter().map(|e| e.max(0.0).powf(1.0 / mp)).product::<f64>();
    let holds = mutual <= bound * (1.0 + tol) + tol * f64::MIN_POSITIVE;
    Ok(EnergyReport {
        p,
        m,
        energy,
        energies,
        mutual,
        bound,
        alpha: holder_alpha(m, p),
        d_p,
        d_p_alternative: if (alt - d_p).abs() > 1e-12 * d_p { Some(alt) } else { None },
        holds,
    })
}

/// `F_μ(u) = E_1(u)/(m+1) + Σ u μ dV` with `μ` given per node.
pub fn functional_f<D: EnergyDomain>(u: &D, mu: &[f64], m: usize) -> Result<f64> {
    let v = u.node_values();
    if mu.len() != v.len() {
        return Err(Error::Mismatch(format!("measure has {} values, expected {}", mu.len(), v.len())));
    }
    let vol = u.volumes();
    let d = u.density(m)?;
    let e: Vec<f64> = v.iter().zip(&d).zip(&vol).map(|((a, b), c)| -a * b * c).collect();
    let l: Vec<f64> = v.iter().zip(mu).zip(&vol).map(|((a, b), c)| a * b * c).collect();
    Ok(pairwise_sum(&e) / (m as f64 + 1.0) + pairwise_sum(&l))
}

/// Largest `∫(−u)^p dμ / E_p(u)^{p/(m+p)}` over the samples (a lower bound
/// for the `M_p` constant); samples with zero energy are skipped.
pub fn mp_estimate<D: EnergyDomain>(mu: &[f64], m: usize, p: f64, samples: &[&D], tol: f64) -> Result<f64> {
    let mut best = 0.0f64;
    for u in samples {
        let e = energy_p(*u, m, p, tol)?;
        if e <= 0.0 {
            continue;
        }
        let v = u.node_values();
        if v.len() != mu.len() {
            return Err(Error::Mismatch("measure and sample on different nodes".into()));
        }
        let w: Vec<f64> = neg_pow(&v, p).iter().zip(u.volumes()).map(|(a, b)| a * b).collect();
        let num = weighted_sum(mu, &w);
        best = best.max(num / e.powf(p / (m as f64 + p)));
    }
    Ok(best)
}

/// Checks `∫_V (Δφ)^m ∧ β^{n−m} ≤ M·C^{p/(p+m)}·E_p(φ)^{m/(p+m)}` where `V` is
/// given by a node mask and `capacity` is its capacity. Returns both sides.
pub fn capacity_energy_bound<D: EnergyDomain>(
    phi: &D,
    m: usize,
    p: f64,
    set: &[bool],
    capacity: f64,
    tol: f64,
) -> Result<(f64, f64)> {
    let d = phi.density(m)?;
    let vol = phi.volumes();
    let t: Vec<f64> = (0..d.len()).map(|k| if set[k] { d[k] * vol[k] } else { 0.0 }).collect();
    let lhs = pairwise_sum(&t);
    let e = energy_p(phi, m, p, tol)?;
    let mp = m as f64 + p;
    Ok((lhs, holder_constant(m, p) * capacity.powf(p / mp) * e.powf(m as f64 / mp)))
}

/// `(E(P(u + t v)) − E(u))/t` next to `(m+1)∫(−v)(Δu)^m ∧ β^{n−m}`.
pub fn derivative_check<D: EnergyDomain>(u: &D, v: &D, m: usize, t: f64, opts: &SweepOptions) -> Result<(f64, f64)> {
    let e0 = energy_p(u, m, 1.0, f64::INFINITY)?;
    let moved = u.add_nodes(&v.node_values(), t)?.project(m, opts)?;
    let e1 = energy_p(&moved, m, 1.0, f64::INFINITY)?;
    let d = u.density(m)?;
    let vol = u.volumes();
    let w: Vec<f64> = v.node_values().iter().zip(&vol).map(|(a, b)| -a * b).collect();
    Ok(((e1 - e0) / t, (m as f64 + 1.0) * weighted_sum(&d, &w)))
}

/// `Σ_{j≤3} c_j (s^{2j} − R^{2j})` with seeded `c_j ∈ [0, 1)`, `c_1 ≥ 0.1`:
/// increasing and convex in `s`, hence m-subharmonic for every `m`.
pub fn random_radial_profile<R: rand::Rng + ?Sized>(n: usize, outer: f64, intervals: usize, rng: &mut R) -> Result<RadialProfile> {
    let c = [rng.gen_range(0.1..1.0), rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)];
    RadialProfile::sample(n, outer, intervals, |s| {
        (1..=3).map(|j| c[j - 1] * (s.powi(2 * j as i32) - outer.powi(2 * j as i32))).sum()
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SolverOptions {
    /// Stop when `Σ|ρ − μ|dV / Σ μ dV` drops below this.
    pub tol: f64,
    pub max_iter: usize,
    /// Mass term of the screened lift.
    pub kappa: f64,
    pub armijo: f64,
    pub min_step: f64,
    /// Truncation levels `j` for `min(μ, j)`, solved in order before `μ`.
    pub continuation: Vec<f64>,
    pub sweep: SweepOptions,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 500,
            kappa: 1e-3,
            armijo: 1e-4,
            min_step: 1e-12,
            continuation: Vec::new(),
            sweep: SweepOptions { tol: 1e-13, max_sweeps: 200_000 },
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SolveReport<D> {
    #[serde(skip)]
    pub solution: D,
    pub iterations: usize,
    pub residuals: Vec<f64>,
    pub f_trace: Vec<f64>,
    /// Continuation stage of each trace entry (the last stage is `μ` itself).
    pub stages: Vec<usize>,
    pub converged: bool,
}

fn relative_residual(rho: &[f64], mu: &[f64], vol: &[f64]) -> f64 {
    let diff: Vec<f64> = rho.iter().zip(mu).zip(vol).map(|((a, b), c)| (a - b).abs() * c).collect();
    let mass: Vec<f64> = mu.iter().zip(vol).map(|(a, b)| a * b).collect();
    let total = pairwise_sum(&mass);
    let d = pairwise_sum(&diff);
    if total > 0.0 {
        d / total
    } else {
        d
    }
}

/// Projected descent on `F_μ`: `u ← P(u − τ g)`, `g = (L − κ)^{-1}(ρ(u) − μ)`,
/// with Armijo backtracking from `τ = 1`.
pub fn variational_solve<D: EnergyDomain>(start: &D, mu: &[f64], m: usize, opts: &SolverOptions) -> Result<SolveReport<D>> {
    if mu.len() != start.node_count() {
        return Err(Error::Mismatch(format!("measure has {} values, expected {}", mu.len(), start.node_count())));
    }
    if let Some(k) = mu.iter().position(|&v| !(v >= 0.0) || !v.is_finite()) {
        return Err(Error::Precondition(format!("measure density must be finite and >= 0 (node {k})")));
    }
    let vol = start.volumes();
    let mut u = start.clone();
    let mut report = SolveReport {
        solution: start.clone(),
        iterations: 0,
        residuals: Vec::new(),
        f_trace: Vec::new(),
        stages: Vec::new(),
        converged: false,
    };
    let mut levels: Vec<Option<f64>> = opts.continuation.iter().map(|&j| Some(j)).collect();
    levels.push(None);
    let last = levels.len() - 1;
    for (stage, level) in levels.into_iter().enumerate() {
        let target: Vec<f64> = match level {
            Some(j) => mu.iter().map(|&v| v.min(j)).collect(),
            None => mu.to_vec(),
        };
        let mut f_now = functional_f(&u, &target, m)?;
        let mut done = false;
        for _ in 0..opts.max_iter {
            let rho = u.density(m)?;
            let res = relative_residual(&rho, &target, &vol);
            report.residuals.push(res);
            report.f_trace.push(f_now);
            report.stages.push(stage);
            if res < opts.tol {
                done = true;
                break;
            }
            report.iterations += 1;
            let r: Vec<f64> = rho.iter().zip(&target).map(|(a, b)| a - b).collect();
            let g = u.linearized_solve(m, &r, opts.kappa)?;
            let slope = weighted_sum(&r.iter().zip(&g).map(|(a, b)| a * b).collect::<Vec<_>>(), &vol);
            let mut tau = 1.0;
            loop {
                let cand = u.add_nodes(&g, -tau)?.project(m, &opts.sweep)?;
                let f_cand = functional_f(&cand, &target, m)?;
                if f_cand <= f_now + opts.armijo * tau * slope && f_cand <= f_now {
                    u = cand;
                    f_now = f_cand;
                    break;
                }
                tau *= 0.5;
                if tau < opts.min_step {
                    return Err(Error::Backtracking { iteration: report.iterations, step: tau });
                }
            }
        }
        if !done {
            if stage == last {
                let change = report.residuals.last().copied().unwrap_or(f64::NAN);
                return Err(Error::NonConvergence { iterations: report.iterations, change });
            }
        } else if stage == last {
            report.converged = true;
        }
    }
    report.solution = u;
    Ok(report)
}
