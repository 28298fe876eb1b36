use super::grid::GridField;
use crate::error::{Error, Result};
use rayon::prelude::*;

/// Convolution with the bump `(1 − |x|²/ε²)³`, normalized on the grid so
/// constants are reproduced exactly.
///
/// Points closer than `⌊ε/h⌋` cells to the valid region's edge keep their
/// input values and are marked invalid through `valid_margin`.
pub fn mollify(u: &GridField, eps: f64) -> Result<GridField> {
    let spec = u.spec();
    let h = spec.spacing();
    if !(eps >= h * (1.0 - 1e-12)) || !eps.is_finite() {
        return Err(Error::Invalid(format!("mollifier width {eps} below grid spacing {h}")));
    }
    let reach = (eps / h + 1e-9).floor() as usize;
    let margin = u.valid_margin() + reach;
    if 2 * (margin + super::grid::INTERIOR_MARGIN) >= spec.points {
        return Err(Error::MollifierTooWide { eps });
    }
    let d = spec.dim();
    let strides = spec.strides();
    let weights = offsets(d, reach, eps / h);
    let total: f64 = weights.iter().map(|(_, w)| w).sum();
    let kernel: Vec<(isize, f64)> = weights
        .into_iter()
        .map(|(o, w)| {
            let shift = o.iter().zip(&strides).map(|(&k, &s)| k * s as isize).sum();
            (shift, w / total)
        })
        .collect();
    let inner = spec.sub_box(margin)?;
    let src = u.values();
    let smoothed: Vec<f64> = (0..inner.len())
        .into_par_iter()
        .map(|l| {
            let c = inner.to_grid(l) as isize;
            kernel.iter().map(|&(o, w)| w * src[(c + o) as usize]).sum()
        })
        .collect();
    let mut values = src.to_vec();
    for (l, v) in smoothed.into_iter().enumerate() {
        values[inner.to_grid(l)] = v;
    }
    GridField::with_margin(spec.clone(), values, margin)
}

/// Integer offsets with `|o| < radius` and their unnormalized weights.
fn offsets(d: usize, reach: usize, radius: f64) -> Vec<(Vec<isize>, f64)> {
    let r = reach as isize;
    let side = 2 * reach + 1;
    let mut out = Vec::new();
    let mut o = vec![0isize; d];
    for flat in 0..side.pow(d as u32) {
        let mut rest = flat;
        for a in (0..d).rev() {
            o[a] = (rest % side) as isize - r;
            rest /= side;
        }
        let q = o.iter().map(|&k| (k * k) as f64).sum::<f64>() / (radius * radius);
        if q < 1.0 {
            out.push((o.clone(), (1.0 - q).powi(3)));
        }
    }
    out
}
