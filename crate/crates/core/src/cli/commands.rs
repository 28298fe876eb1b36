use super::identities::{identity_suite, SuiteOptions};
use super::{Context, FieldKind, Report};
use crate::calculus::{mollify, radial_density, GridField, GridSpec, RadialProfile};
use crate::config::Reader;
use crate::energy::{
    energy_p, holder_check, random_radial_profile, variational_solve, EnergyDomain, SolverOptions,
};
use crate::envelope::{
    annulus_residual, capacity as grid_capacity, extremal_envelope, extremal_radial, grid_admissible,
    radial_capacity, radial_envelope, AnnulusConfig, ObstacleProblem, RadialObstacle, SweepOptions,
};
use crate::error::{Error, Result};
use crate::hessian::{beta_top, hessian_density, is_msh, moore_constant};
use crate::io::{load_grid, save_grid, save_profile, write_csv, Header};
use crate::quaternion::{quadratic_value, random_hyperhermitian};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};
use std::path::Path;

fn object(v: Value) -> Map<String, Value> {
    match v {
        Value::Object(m) => m,
        _ => Map::new(),
    }
}

fn to_value<T: serde::Serialize>(t: &T) -> Value {
    serde_json::to_value(t).unwrap_or(Value::Null)
}

fn check_orders(r: &Reader, n: usize, m: usize) -> Result<()> {
    if !(1..=4).contains(&n) || m == 0 || m > n {
        return Err(Error::Config { line: r.line_of("m"), msg: format!("need 1 <= m <= n <= 4, got n = {n}, m = {m}") });
    }
    Ok(())
}

fn mode(r: &Reader) -> Result<bool> {
    match r.string("mode", "radial").as_str() {
        "radial" => Ok(true),
        "grid" => Ok(false),
        other => Err(Error::Config { line: r.line_of("mode"), msg: format!("mode must be `radial` or `grid`, got `{other}`") }),
    }
}

pub fn identities(ctx: &Context) -> Result<Report> {
    let r = Reader::new(&ctx.config, "identities");
    let opts = SuiteOptions {
        n: r.usize("n", 1)?,
        points: r.usize("points", 9)?,
        polynomials: r.usize("polynomials", 20)?,
        matrices: r.usize("matrices", 100)?,
        closedness: r.string("closedness", "true") == "true",
        seed: ctx.seed,
    };
    r.finish()?;
    if !(1..=2).contains(&opts.n) {
        return Err(Error::Invalid("identity grids support n = 1 or 2".into()));
    }
    let checks = identity_suite(&opts)?;
    let pass = checks.iter().all(|c| c.pass);
    Ok(Report { pass, summary: object(json!({ "checks": checks })) })
}

pub fn field(ctx: &Context, kind: FieldKind, n: usize, points: usize, half_width: f64, name: &str) -> Result<Report> {
    let spec = GridSpec::new(n, half_width, points)?;
    let norm = |x: &[f64]| x.iter().map(|v| v * v).sum::<f64>();
    let u = match kind {
        FieldKind::Norm2 => GridField::sample(&spec, norm)?,
        FieldKind::NegNorm2 => GridField::sample(&spec, |x| -norm(x))?,
        FieldKind::Affine => GridField::sample(&spec, |x| 0.5 + x.iter().enumerate().map(|(i, v)| (i as f64 + 1.0) * v).sum::<f64>())?,
        FieldKind::Quadratic => {
            let a = random_hyperhermitian(n, &mut ChaCha8Rng::seed_from_u64(ctx.seed));
            GridField::sample(&spec, |x| quadratic_value(&a, x))?
        }
    };
    let path = ctx.path(name);
    let mut meta = ctx.meta();
    meta.insert("field".into(), Value::String(format!("{kind:?}")));
    save_grid(&path, &u, &Header::grid("field", &u).with_meta(meta))?;
    Ok(Report { pass: true, summary: object(json!({ "file": name, "points": spec.len() })) })
}

pub fn hessian(ctx: &Context, input: &Path, order: Option<usize>, eps: Option<f64>) -> Result<Report> {
    let r = Reader::new(&ctx.config, "hessian");
    let m = match order {
        Some(m) => m,
        None => r.usize("m", 1)?,
    };
    let eps = match eps {
        Some(e) => e,
        None => r.f64("eps", 0.0)?,
    };
    let output = r.string("output", "density.bin");
    r.finish()?;
    let (u, _) = load_grid(input)?;
    let n = u.spec().n;
    if m == 0 || m > n {
        return Err(Error::Invalid(format!("order m = {m} outside 1..={n}")));
    }
    let u = if eps > 0.0 { mollify(&u, eps)? } else { u };
    let density = hessian_density(&u, m)?;
    let msh = is_msh(&u, m, ctx.tol.unwrap_or(1e-8), ctx.seed)?;
    let warning = !msh.verdict;
    let mut meta = ctx.meta();
    let h = u.spec().spacing();
    let info = json!({
        "m": m,
        "h": h,
        "eps": eps,
        "c0": moore_constant(n),
        "beta_top": beta_top(n),
        "not_m_subharmonic": warning,
    });
    meta.extend(object(info.clone()));
    let grid = density.to_grid_field();
    save_grid(&ctx.path(&output), &grid, &Header::grid("density", &grid).with_meta(meta))?;
    let mut summary = object(info);
    summary.insert("file".into(), Value::String(output));
    summary.insert("min".into(), json!(density.min()));
    summary.insert("max".into(), json!(density.max()));
    summary.insert("total_mass".into(), json!(density.total_mass(|_| true)));
    summary.insert("msh".into(), to_value(&msh));
    Ok(Report { pass: true, summary })
}

/// Measured order `log2(r_K / r_{2K})`.
fn order(coarse: f64, fine: f64) -> f64 {
    (coarse / fine).log2()
}

pub fn extremal(ctx: &Context) -> Result<Report> {
    let r = Reader::new(&ctx.config, "extremal");
    let n = r.usize("n", 2)?;
    let m = r.usize("m", 2)?;
    let inner = r.f64("inner", 0.5)?;
    let outer = r.f64("outer", 1.0)?;
    let radial = mode(&r)?;
    let intervals = r.usize("intervals", 400)?;
    let points = r.usize("points", 17)?;
    let max_error = r.f64("max_error", 0.02)?;
    let sweep = SweepOptions { tol: r.f64("sweep_tol", 1e-12)?, max_sweeps: r.usize("max_sweeps", 2_000_000)? };
    r.finish()?;
    check_orders(&r, n, m)?;
    let cfg = AnnulusConfig::new(n, m, inner, outer)?;
    let max_error = ctx.tol.unwrap_or(max_error);
    if radial {
        let closed = extremal_radial(&cfg, intervals)?;
        let env = radial_envelope(&RadialObstacle::ball(n, m, inner, outer, intervals)?, &sweep)?;
        let err: Vec<f64> = env.solution.values.iter().zip(&closed.values).map(|(a, b)| a - b).collect();
        let sup = err.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
        let res = annulus_residual(&closed, m, inner, outer)?;
        let res_fine = annulus_residual(&extremal_radial(&cfg, 2 * intervals)?, m, inner, outer)?;
        let header = Header::radial(&env.solution).with_meta(ctx.meta());
        save_profile(&ctx.path("extremal.csv"), &env.solution, &header, &[("closed_form", closed.values.clone()), ("error", err)])?;
        let summary = json!({
            "mode": "radial",
            "n": n, "m": m, "inner": inner, "outer": outer, "intervals": intervals,
            "sup_error": sup,
            "max_error": max_error,
            "sweeps": env.sweeps,
            "closed_form_residual": res,
            "closed_form_residual_refined": res_fine,
            "residual_order": order(res, res_fine),
            "capacity_closed_form": cfg.capacity(),
        });
        Ok(Report { pass: sup <= max_error, summary: object(summary) })
    } else {
        let spec = GridSpec::new(n, outer, points)?;
        let env = extremal_envelope(&ObstacleProblem::ball(spec, m, inner)?, &sweep)?;
        let admissible = grid_admissible(&env.solution, m, 1e-6)?;
        let header = Header::grid("extremal", &env.solution).with_meta(ctx.meta());
        save_grid(&ctx.path("extremal.bin"), &env.solution, &header)?;
        let summary = json!({
            "mode": "grid",
            "n": n, "m": m, "inner": inner, "half_width": outer, "points": points,
            "sweeps": env.sweeps,
            "change": env.change,
            "admissible": admissible,
        });
        Ok(Report { pass: admissible, summary: object(summary) })
    }
}

pub fn capacity(ctx: &Context) -> Result<Report> {
    let r = Reader::new(&ctx.config, "capacity");
    let n = r.usize("n", 2)?;
    let m = r.usize("m", 2)?;
    let outer = r.f64("outer", 1.0)?;
    let radial = mode(&r)?;
    let intervals = r.usize("intervals", 400)?;
    let points = r.usize("points", 17)?;
    let mut radii = r.f64_list("radii", &[0.2, 0.3, 0.4, 0.5, 0.6])?;
    let sweep = SweepOptions { tol: r.f64("sweep_tol", 1e-12)?, max_sweeps: r.usize("max_sweeps", 2_000_000)? };
    r.finish()?;
    check_orders(&r, n, m)?;
    if radii.is_empty() || radii.iter().any(|&x| !(x > 0.0 && x < outer)) {
        return Err(Error::Config { line: r.line_of("radii"), msg: "radii must lie in (0, outer)".into() });
    }
    radii.sort_by(f64::total_cmp);
    let mut rows = Vec::new();
    for &rad in &radii {
        let closed = AnnulusConfig::new(n, m, rad, outer)?.capacity();
        let rep = if radial {
            radial_capacity(&RadialObstacle::ball(n, m, rad, outer, intervals)?, &sweep)?
        } else {
            grid_capacity(&ObstacleProblem::ball(GridSpec::new(n, outer, points)?, m, rad)?, &sweep, None)?
        };
        rows.push(vec![rad, rep.capacity, closed, (rep.capacity - closed) / closed]);
    }
    let monotone = rows.windows(2).all(|w| w[1][1] >= w[0][1]);
    let header = Header::table("capacity", n).with_meta(ctx.meta());
    write_csv(std::fs::File::create(ctx.path("capacity.csv"))?, &header, &["radius", "capacity", "closed_form", "relative_error"], &rows)?;
    let summary = json!({
        "mode": if radial { "radial" } else { "grid" },
        "n": n, "m": m, "outer": outer,
        "radii": radii,
        "capacities": rows.iter().map(|r| r[1]).collect::<Vec<_>>(),
        "closed_form": rows.iter().map(|r| r[2]).collect::<Vec<_>>(),
        "monotone": monotone,
    });
    Ok(Report { pass: monotone, summary: object(summary) })
}

fn solver_options(r: &Reader, ctx: &Context) -> Result<SolverOptions> {
    let d = SolverOptions::default();
    Ok(SolverOptions {
        tol: ctx.tol.unwrap_or(r.f64("tol", d.tol)?),
        max_iter: r.usize("max_iter", d.max_iter)?,
        kappa: r.f64("kappa", d.kappa)?,
        armijo: r.f64("armijo", d.armijo)?,
        min_step: d.min_step,
        continuation: r.f64_list("continuation", &[])?,
        sweep: SweepOptions { tol: r.f64("sweep_tol", d.sweep.tol)?, max_sweeps: d.sweep.max_sweeps },
    })
}

pub fn solve(ctx: &Context) -> Result<Report> {
    let r = Reader::new(&ctx.config, "solve");
    let n = r.usize("n", 2)?;
    let m = r.usize("m", 2)?;
    let radial = mode(&r)?;
    let outer = r.f64("outer", 1.0)?;
    let intervals = r.usize("intervals", 200)?;
    let points = r.usize("points", 17)?;
    let measure = r.string("measure", if radial { "manufactured" } else { "constant" });
    let value = r.f64("value", 1.0)?;
    let (a, b) = (r.f64("a", 1.0)?, r.f64("b", 0.5)?);
    let max_error = r.f64("max_error", 0.01)?;
    let opts = solver_options(&r, ctx)?;
    r.finish()?;
    check_orders(&r, n, m)?;
    let bad_measure = || Error::Config { line: r.line_of("measure"), msg: format!("unknown measure `{measure}`") };
    if radial {
        let exact = RadialProfile::sample(n, outer, intervals, |s| a * (s * s - outer * outer) + b * (s.powi(4) - outer.powi(4)))?;
        let mu = match measure.as_str() {
            "manufactured" => radial_density(&exact, m)?,
            "constant" => vec![value; intervals],
            _ => return Err(bad_measure()),
        };
        let start = RadialProfile::zeros(n, outer, intervals)?;
        let rep = variational_solve(&start, &mu, m, &opts)?;
        let monotone = rep.f_trace.windows(2).all(|w| w[1] <= w[0]);
        let mut extra = vec![("mu", mu.clone())];
        let mut summary = object(json!({ "mode": "radial", "n": n, "m": m, "intervals": intervals, "monotone_f": monotone }));
        let mut pass = rep.converged && monotone;
        if measure == "manufactured" {
            let scale = exact.values.iter().fold(0.0f64, |x, &y| x.max(y.abs()));
            let err = rep.solution.max_abs_diff(&exact) / scale;
            summary.insert("relative_sup_error".into(), json!(err));
            summary.insert("max_error".into(), json!(max_error));
            pass &= err <= max_error;
            extra.push(("exact", exact.values.clone()));
        }
        summary.insert("solver".into(), to_value(&rep));
        let header = Header::radial(&rep.solution).with_meta(ctx.meta());
        save_profile(&ctx.path("solve.csv"), &rep.solution, &header, &extra)?;
        Ok(Report { pass, summary })
    } else {
        if measure != "constant" {
            return Err(bad_measure());
        }
        let spec = GridSpec::new(n, outer, points)?;
        let start = GridField::zeros(spec);
        let mu = vec![value; start.node_count()];
        let rep = variational_solve(&start, &mu, m, &opts)?;
        let monotone = rep.f_trace.windows(2).all(|w| w[1] <= w[0]);
        let header = Header::grid("solution", &rep.solution).with_meta(ctx.meta());
        save_grid(&ctx.path("solve.bin"), &rep.solution, &header)?;
        let mut summary = object(json!({ "mode": "grid", "n": n, "m": m, "points": points, "monotone_f": monotone }));
        summary.insert("solver".into(), to_value(&rep));
        Ok(Report { pass: rep.converged && monotone, summary })
    }
}

pub fn energy(ctx: &Context) -> Result<Report> {
    let r = Reader::new(&ctx.config, "energy");
    let n = r.usize("n", 2)?;
    let m = r.usize("m", 2)?;
    let p = r.f64("p", 1.0)?;
    let samples = r.usize("samples", 50)?;
    let intervals = r.usize("intervals", 200)?;
    let outer = r.f64("outer", 1.0)?;
    let tol = ctx.tol.unwrap_or(r.f64("tol", 1e-9)?);
    r.finish()?;
    check_orders(&r, n, m)?;
    if p < 1.0 {
        return Err(Error::Config { line: r.line_of("p"), msg: "p must be >= 1".into() });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let mut rows = Vec::new();
    let mut violations = 0;
    let mut worst_exponent_error = 0.0f64;
    for _ in 0..samples {
        let u = random_radial_profile(n, outer, intervals, &mut rng)?;
        let vs = (0..m).map(|_| random_radial_profile(n, outer, intervals, &mut rng)).collect::<Result<Vec<_>>>()?;
        let refs: Vec<&RadialProfile> = vs.iter().collect();
        let rep = holder_check(&u, &refs, p, tol)?;
        violations += usize::from(!rep.holds);
        let e1 = energy_p(&u, m, p, f64::INFINITY)?;
        let e2 = energy_p(&u.add_nodes(&u.node_values(), 1.0)?, m, p, f64::INFINITY)?;
        let exponent = (e2 / e1).log2();
        worst_exponent_error = worst_exponent_error.max((exponent - (m as f64 + p)).abs());
        rows.push(vec![rep.mutual, rep.bound, rep.energy, exponent]);
    }
    let header = Header::table("energy", n).with_meta(ctx.meta());
    write_csv(std::fs::File::create(ctx.path("energy.csv"))?, &header, &["mutual", "bound", "energy", "homogeneity_exponent"], &rows)?;
    let summary = json!({
        "n": n, "m": m, "p": p, "samples": samples,
        "violations": violations,
        "homogeneity_exponent_error": worst_exponent_error,
        "d_p": crate::energy::holder_constant(m, p),
        "d_p_alternative": crate::energy::holder_constant_alternative(m, p),
    });
    Ok(Report { pass: violations == 0 && worst_exponent_error < 1e-6, summary: object(summary) })
}
