//! Pointwise m-Hessian densities `(Δu)^m ∧ β^{n−m}`, mixed densities, the
//! m-subharmonicity test, quadrature and the integration-by-parts and
//! comparison diagnostics.
//!
//! Densities are the real part of the coefficient against `Ω_{2n}`; the
//! measure is `density · dV` with `dV` the Lebesgue cell volume. Since
//! `β^n = n!·Ω_{2n}`, `‖q‖²` has density `8^m n!`.

use crate::calculus::radial::{pairwise_sum, shell_volumes};
use crate::calculus::{baston, second_partials, BastonTable, GridField, GridSpec, RadialProfile, SubBox, TwoFormField};
use crate::error::{Error, Result};
use crate::exterior::{hyperhermitian_from_twoform, twoform_from_hyperhermitian, MixedTop, TwoForm};
use crate::quaternion::{moore_det, random_positive_hyperhermitian};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

/// `c₀ = 2ⁿ n!`: density of `Re Σ q̄_l a_lk q_k` is `c₀·moore_det(4A)`.
pub fn moore_constant(n: usize) -> f64 {
    2f64.powi(n as i32) * factorial(n)
}

/// Coefficient of `β^n` against `Ω_{2n}`.
pub fn beta_top(n: usize) -> f64 {
    factorial(n)
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// Real density per point of the sub-box at `margin`.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityField {
    spec: GridSpec,
    region: SubBox,
    values: Vec<f64>,
}

impl DensityField {
    pub fn new(spec: GridSpec, margin: usize, values: Vec<f64>) -> Result<Self> {
        let region = spec.sub_box(margin)?;
        if values.len() != region.len() {
            return Err(Error::Invalid(format!("expected {} density values, got {}", region.len(), values.len())));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Invalid("non-finite density".into()));
        }
        Ok(Self { spec, region, values })
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn margin(&self) -> usize {
        self.region.margin
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Grid-wide flat index of local point `local`.
    pub fn grid_index(&self, local: usize) -> usize {
        self.region.to_grid(local)
    }

    pub fn point(&self, local: usize) -> Vec<f64> {
        self.spec.point(self.grid_index(local))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.values.iter().zip(&other.values).fold(0.0f64, |a, (x, y)| a.max((x - y).abs()))
    }

    /// Midpoint rule over the points whose coordinates satisfy `region`.
    pub fn total_mass(&self, region: impl Fn(&[f64]) -> bool + Sync) -> f64 {
        let dv = self.spec.cell_volume();
        let terms: Vec<f64> = (0..self.len())
            .into_par_iter()
            .map(|l| if region(&self.point(l)) { self.values[l] * dv } else { 0.0 })
            .collect();
        pairwise_sum(&terms)
    }

    /// Mass restricted by a per-point mask over local indices.
    pub fn masked_mass(&self, mask: &[bool]) -> f64 {
        let dv = self.spec.cell_volume();
        let terms: Vec<f64> = self.values.iter().zip(mask).map(|(&v, &k)| if k { v * dv } else { 0.0 }).collect();
        pairwise_sum(&terms)
    }

    /// Embeds into a full grid field, zero outside, marked invalid there.
    pub fn to_grid_field(&self) -> GridField {
        let mut values = vec![0.0; self.spec.len()];
        for (l, v) in self.values.iter().enumerate() {
            values[self.grid_index(l)] = *v;
        }
        GridField::with_margin(self.spec.clone(), values, self.region.margin).expect("finite by construction")
    }

    pub fn from_grid_field(g: &GridField) -> Result<Self> {
        let region = g.spec().sub_box(g.valid_margin())?;
        let values = (0..region.len()).map(|l| g.values()[region.to_grid(l)]).collect();
        Self::new(g.spec().clone(), region.margin, values)
    }

    /// Values of `u` at the same points.
    pub fn restrict(&self, u: &GridField) -> Vec<f64> {
        (0..self.len()).map(|l| u.values()[self.grid_index(l)]).collect()
    }
}

/// Densities of a stored Baston field.
pub fn density_of_forms(field: &TwoFormField, m: usize) -> Result<DensityField> {
    let n = field.spec().n;
    let kernel = MixedTop::new(n, m)?;
    let values = (0..field.len()).into_par_iter().map(|l| kernel.eval_same(field.pairs_at(l)).re).collect();
    DensityField::new(field.spec().clone(), field.margin(), values)
}

/// `(Δu)^m ∧ β^{n−m}` on the interior.
pub fn hessian_density(u: &GridField, m: usize) -> Result<DensityField> {
    density_of_forms(&baston(u)?, m)
}

/// `Δu_1 ∧ … ∧ Δu_m ∧ β^{n−m}` on the common interior.
pub fn mixed_hessian_density(us: &[&GridField]) -> Result<DensityField> {
    let first = us.first().ok_or_else(|| Error::Invalid("no fields given".into()))?;
    if us.iter().any(|u| u.spec() != first.spec()) {
        return Err(Error::Mismatch("mixed density of fields on different grids".into()));
    }
    let margin = us.iter().map(|u| u.interior_margin()).max().unwrap_or(2);
    let kernel = MixedTop::new(first.spec().n, us.len())?;
    let spec = first.spec().clone();
    let region = spec.sub_box(margin)?;
    let table = BastonTable::new(spec.n);
    let strides = spec.strides();
    let h = spec.spacing();
    let d = spec.dim();
    let pairs = table.num_pairs();
    let values = (0..region.len())
        .into_par_iter()
        .map_init(
            || (vec![0.0; d * d], vec![Complex64::new(0.0, 0.0); pairs * us.len()]),
            |(hess, forms), l| {
                let g = region.to_grid(l);
                for (t, u) in us.iter().enumerate() {
                    second_partials(u.values(), &strides, h, g, hess);
                    table.apply(hess, &mut forms[t * pairs..(t + 1) * pairs]);
                }
                let slots: Vec<&[Complex64]> = forms.chunks(pairs).collect();
                kernel.eval_pairs(&slots).re
            },
        )
        .collect();
    DensityField::new(spec, margin, values)
}

/// `m = n` density through the Moore determinant of the associated matrix.
pub fn moore_density(u: &GridField) -> Result<DensityField> {
    let field = baston(u)?;
    let n = field.spec().n;
    let c0 = moore_constant(n);
    let values: Result<Vec<f64>> = (0..field.len())
        .into_par_iter()
        .map(|l| Ok(c0 * moore_det(&hyperhermitian_from_twoform(&field.form_at(l))?)?))
        .collect();
    DensityField::new(field.spec().clone(), field.margin(), values?)
}

/// Density at a single point from on-demand samples of `f` (no stored grid).
pub fn density_at<F>(f: &F, x: &[f64], h: f64, m: usize) -> Result<f64>
where
    F: Fn(&[f64]) -> f64 + ?Sized,
{
    let form = crate::calculus::baston_at(f, x, h);
    Ok(MixedTop::new(form.n(), m)?.eval(&vec![&form; m])?.re)
}

/// Result of [`is_msh`].
#[derive(Clone, Debug, Serialize)]
pub struct MshReport {
    /// Smallest normalized `density_k`, `k = 1..=m`.
    pub minima: Vec<f64>,
    /// Smallest normalized mixed density against the sampled cone elements.
    pub sampled_min: f64,
    pub verdict: bool,
    pub worst_point: Vec<f64>,
    pub worst_order: usize,
    pub points: usize,
}

const CONE_SAMPLES: usize = 6;

/// Cone test of `Δu` at every interior point plus sampled m-positivity
/// against baston images of seeded random convex quadratics.
///
/// Each point's densities are divided by `(max_ab |∂²u/∂x_a∂x_b|)^k` so the
/// tolerance is relative to the size of the real Hessian.
pub fn is_msh(u: &GridField, m: usize, tol: f64, seed: u64) -> Result<MshReport> {
    is_msh_where(u, m, tol, seed, |_| true)
}

/// [`is_msh`] restricted to interior points satisfying `region`.
pub fn is_msh_where(
    u: &GridField,
    m: usize,
    tol: f64,
    seed: u64,
    region: impl Fn(&[f64]) -> bool + Sync,
) -> Result<MshReport> {
    let spec = u.spec().clone();
    let n = spec.n;
    let kernels: Vec<MixedTop> = (1..=m).map(|k| MixedTop::new(n, k)).collect::<Result<_>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples: Vec<Vec<Vec<Complex64>>> = if m > 1 {
        (0..CONE_SAMPLES)
            .map(|_| {
                (0..m - 1)
                    .map(|_| {
                        let a = twoform_from_hyperhermitian(&random_positive_hyperhermitian(n, 0.1, &mut rng));
                        a.scale(1.0 / a.max_abs()).to_pairs()
                    })
                    .collect()
            })
            .collect()
    } else {
        Vec::new()
    };
    let norm = factorial(n);
    let bx = spec.sub_box(u.interior_margin())?;
    let table = BastonTable::new(n);
    let strides = spec.strides();
    let h = spec.spacing();
    let d = spec.dim();

    // (min per k, sampled min, worst value, worst k, worst index, count)
    type Acc = (Vec<f64>, f64, f64, usize, usize, usize);
    let fresh = || -> Acc { (vec![f64::INFINITY; m], f64::INFINITY, f64::INFINITY, 0, 0, 0) };
    let acc = (0..bx.len())
        .into_par_iter()
        .fold(
            || (fresh(), vec![0.0; d * d], vec![Complex64::new(0.0, 0.0); table.num_pairs()]),
            |(mut acc, mut hess, mut form), l| {
                let g = bx.to_grid(l);
                if !region(&spec.point(g)) {
                    return (acc, hess, form);
                }
                second_partials(u.values(), &strides, h, g, &mut hess);
                let scale = hess.iter().fold(0.0f64, |a, v| a.max(v.abs()));
                acc.5 += 1;
                if scale == 0.0 {
                    for v in acc.0.iter_mut() {
                        *v = v.min(0.0);
                    }
                    return (acc, hess, form);
                }
                table.apply(&hess, &mut form);
                form.iter_mut().for_each(|z| *z /= scale);
                for (k, kernel) in kernels.iter().enumerate() {
                    let v = kernel.eval_same(&form).re / norm;
                    acc.0[k] = acc.0[k].min(v);
                    if v < acc.2 {
                        acc.2 = v;
                        acc.3 = k + 1;
                        acc.4 = g;
                    }
                }
                for alphas in &samples {
                    let mut slots: Vec<&[Complex64]> = vec![&form];
                    slots.extend(alphas.iter().map(|a| a.as_slice()));
                    let v = kernels[m - 1].eval_pairs(&slots).re / norm;
                    acc.1 = acc.1.min(v);
                }
                (acc, hess, form)
            },
        )
        .map(|(acc, _, _)| acc)
        .reduce(fresh, |a, b| {
            let minima = a.0.iter().zip(&b.0).map(|(x, y)| x.min(*y)).collect();
            // ties broken by grid index so the report is thread-count independent
            let (wv, wk, wi) = if (b.2, b.4) < (a.2, a.4) { (b.2, b.3, b.4) } else { (a.2, a.3, a.4) };
            (minima, a.1.min(b.1), wv, wk, wi, a.5 + b.5)
        });
    let (minima, sampled, _, worst_order, worst, points) = acc;
    let sampled_min = if samples.is_empty() { f64::INFINITY } else { sampled };
    let verdict = minima.iter().all(|&v| v >= -tol) && sampled_min >= -tol;
    Ok(MshReport {
        minima,
        sampled_min: if sampled_min.is_finite() { sampled_min } else { 0.0 },
        verdict,
        worst_point: if points > 0 { spec.point(worst) } else { Vec::new() },
        worst_order,
        points,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct RadialMshReport {
    pub minima: Vec<f64>,
    pub verdict: bool,
}

/// Radial cone test: `density_k ≥ −tol·Λ^k·(8^k n!)/4^k` per node, where
/// `Λ` is the node's largest eigenvalue magnitude.
pub fn radial_is_msh(p: &RadialProfile, m: usize, tol: f64) -> Result<RadialMshReport> {
    let eig = crate::calculus::radial_eigenvalues(p);
    let mut minima = Vec::with_capacity(m);
    for k in 1..=m {
        let dens = crate::calculus::radial_density(p, k)?;
        let unit = crate::calculus::density_from_eigenvalues(p.n, k, 1.0, 1.0);
        let worst = dens
            .iter()
            .zip(&eig)
            .map(|(&d, &(r, t))| {
                let lam = r.abs().max(t.abs());
                if lam == 0.0 {
                    0.0
                } else {
                    d / (unit * lam.powi(k as i32))
                }
            })
            .fold(f64::INFINITY, f64::min);
        minima.push(worst);
    }
    let verdict = minima.iter().all(|&v| v >= -tol);
    Ok(RadialMshReport { minima, verdict })
}

#[derive(Clone, Debug, Serialize)]
pub struct StokesReport {
    /// `∫ v Δu ∧ Δw_1 ∧ … ∧ β^{n−m}`
    pub lhs: f64,
    /// `∫ u Δv ∧ Δw_1 ∧ … ∧ β^{n−m}`
    pub rhs: f64,
    pub gap: f64,
}

/// Both sides of `∫ v Δu ∧ T = ∫ u Δv ∧ T`, `T = Δw_1 ∧ … ∧ Δw_{m−1} ∧ β^{n−m}`.
/// `u` and `v` must vanish on the outer `INTERIOR_MARGIN + 1` layers.
pub fn stokes_check(u: &GridField, v: &GridField, ws: &[&GridField]) -> Result<StokesReport> {
    if u.spec() != v.spec() || ws.iter().any(|w| w.spec() != u.spec()) {
        return Err(Error::Mismatch("integration by parts on different grids".into()));
    }
    let layers = crate::calculus::INTERIOR_MARGIN + 1;
    if u.shell_max_abs(layers) != 0.0 {
        return Err(Error::SupportTouchesBoundary("u"));
    }
    if v.shell_max_abs(layers) != 0.0 {
        return Err(Error::SupportTouchesBoundary("v"));
    }
    let mut left: Vec<&GridField> = vec![u];
    left.extend_from_slice(ws);
    let mut right: Vec<&GridField> = vec![v];
    right.extend_from_slice(ws);
    let du = mixed_hessian_density(&left)?;
    let dv = mixed_hessian_density(&right)?;
    let weigh = |d: &DensityField, f: &GridField| {
        let vals = d.restrict(f);
        let terms: Vec<f64> = vals.iter().zip(d.values()).map(|(a, b)| a * b * d.spec().cell_volume()).collect();
        pairwise_sum(&terms)
    };
    let lhs = weigh(&du, v);
    let rhs = weigh(&dv, u);
    let scale = lhs.abs().max(rhs.abs());
    let gap = if scale == 0.0 { 0.0 } else { (lhs - rhs).abs() / scale };
    Ok(StokesReport { lhs, rhs, gap })
}

#[derive(Clone, Debug, Serialize)]
pub struct ComparisonReport {
    /// `∫_{u<v} (Δu)^m ∧ β^{n−m}`
    pub mass_u: f64,
    /// `∫_{u<v} (Δv)^m ∧ β^{n−m}`
    pub mass_v: f64,
    pub set_points: usize,
    pub holds: bool,
}

fn comparison_verdict(mass_u: f64, mass_v: f64, tol: f64) -> bool {
    mass_v <= mass_u + tol * mass_u.abs().max(mass_v.abs())
}

/// Masses of `{u < v}`; requires `u ≥ v − tol` on the outer layers.
pub fn comparison_check(u: &GridField, v: &GridField, m: usize, tol: f64) -> Result<ComparisonReport> {
    if u.spec() != v.spec() {
        return Err(Error::Mismatch("comparison of fields on different grids".into()));
    }
    let spec = u.spec();
    let margin = u.interior_margin().max(v.interior_margin());
    for (i, (a, b)) in u.values().iter().zip(v.values()).enumerate() {
        if spec.margin_of(i) < margin && a - b < -tol {
            return Err(Error::Precondition(format!("u < v near the boundary at {:?}", spec.point(i))));
        }
    }
    let du = hessian_density(u, m)?;
    let dv = hessian_density(v, m)?;
    let mask: Vec<bool> = (0..du.len()).map(|l| {
        let g = du.grid_index(l);
        u.values()[g] < v.values()[g]
    }).collect();
    let mass_u = du.masked_mass(&mask);
    let mass_v = dv.masked_mass(&mask);
    let set_points = mask.iter().filter(|&&k| k).count();
    Ok(ComparisonReport { mass_u, mass_v, set_points, holds: comparison_verdict(mass_u, mass_v, tol) })
}

/// Radial comparison; requires `u ≥ v − tol` at the outer radius.
pub fn radial_comparison_check(u: &RadialProfile, v: &RadialProfile, m: usize, tol: f64) -> Result<ComparisonReport> {
    if !u.same_grid(v) {
        return Err(Error::Mismatch("radial profiles on different grids".into()));
    }
    let k = u.intervals();
    if u.values[k] - v.values[k] < -tol {
        return Err(Error::Precondition("u < v at the outer radius".into()));
    }
    let du = crate::calculus::radial_density(u, m)?;
    let dv = crate::calculus::radial_density(v, m)?;
    let vol = shell_volumes(u.n, u.ds, k);
    let mask: Vec<bool> = (0..k).map(|i| u.values[i] < v.values[i]).collect();
    let sum = |d: &[f64]| {
        let t: Vec<f64> = (0..k).map(|i| if mask[i] { d[i] * vol[i] } else { 0.0 }).collect();
        pairwise_sum(&t)
    };
    let (mass_u, mass_v) = (sum(&du), sum(&dv));
    let set_points = mask.iter().filter(|&&b| b).count();
    Ok(ComparisonReport { mass_u, mass_v, set_points, holds: comparison_verdict(mass_u, mass_v, tol) })
}

/// Constant form check used by the identity suite: Baston form of `‖q‖²`.
pub fn norm_squared_form(n: usize) -> TwoForm {
    crate::exterior::beta(n).scale(8.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn norm2(x: &[f64]) -> f64 {
        x.iter().map(|v| v * v).sum()
    }

    #[test]
    fn norm_squared_density() {
        let spec = GridSpec::new(1, 1.0, 9).unwrap();
        let u = GridField::sample(&spec, norm2).unwrap();
        let d = hessian_density(&u, 1).unwrap();
        assert!(d.values().iter().all(|&v| (v - 8.0).abs() < 1e-12));
        let mass = d.total_mass(|_| true);
        let vol = (d.spec().spacing() * 5.0).powi(4);
        assert!((mass - 8.0 * vol).abs() < 1e-12 * mass);
    }

    #[test]
    fn moore_path_agrees() {
        let spec = GridSpec::new(1, 1.0, 7).unwrap();
        let u = GridField::sample(&spec, |x| 1.5 * norm2(x) + x[0] * x[1] - 0.3 * x[2] * x[3]).unwrap();
        let a = hessian_density(&u, 1).unwrap();
        let b = moore_density(&u).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-9);
    }

    #[test]
    fn norm_squared_is_msh_and_its_negative_is_not() {
        let spec = GridSpec::new(1, 1.0, 9).unwrap();
        let u = GridField::sample(&spec, norm2).unwrap();
        assert!(is_msh(&u, 1, 1e-10, 1).unwrap().verdict);
        let r = is_msh(&u.map(|v| -v).unwrap(), 1, 1e-10, 1).unwrap();
        assert!(!r.verdict && r.worst_order == 1);
    }

    #[test]
    fn pointwise_density_for_n2() {
        let x = [0.1, -0.2, 0.3, 0.0, 0.5, 0.25, -0.1, 0.2];
        let d = density_at(&norm2, &x, 0.5, 2).unwrap();
        assert!((d - 128.0).abs() < 1e-9);
    }

    #[test]
    fn comparison_with_shifted_copy() {
        let spec = GridSpec::new(1, 1.0, 9).unwrap();
        let u = GridField::sample(&spec, norm2).unwrap();
        let v = u.map(|x| x - 1.0).unwrap();
        let r = comparison_check(&u, &v, 1, 1e-12).unwrap();
        assert_eq!(r.set_points, 0);
        assert!(r.holds && r.mass_u == 0.0 && r.mass_v == 0.0);
    }
}
