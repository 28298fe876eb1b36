use crate::error::{Error, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Layers next to each face that differential outputs never cover.
pub const INTERIOR_MARGIN: usize = 2;

const MAX_POINTS: usize = 1 << 31;

/// Uniform grid on `[-L, L]^{4n}` with `N` points per axis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n: usize,
    pub half_width: f64,
    pub points: usize,
}

impl GridSpec {
    pub fn new(n: usize, half_width: f64, points: usize) -> Result<Self> {
        if n == 0 || n > 4 {
            return Err(Error::Invalid(format!("grid dimension n = {n} outside 1..=4")));
        }
        if points < 5 || points % 2 == 0 {
            return Err(Error::Invalid(format!("points per axis must be odd and >= 5, got {points}")));
        }
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::Invalid(format!("half width must be positive, got {half_width}")));
        }
        let total = (points as f64).powi(4 * n as i32);
        if total > MAX_POINTS as f64 {
            return Err(Error::Invalid(format!("{points}^{} grid points is too many", 4 * n)));
        }
        Ok(Self { n, half_width, points })
    }

    pub fn dim(&self) -> usize {
        4 * self.n
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / (self.points - 1) as f64
    }

    pub fn len(&self) -> usize {
        self.points.pow(self.dim() as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim() as i32)
    }

    pub fn coord(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.spacing()
    }

    /// Row-major strides, axis 0 slowest.
    pub fn strides(&self) -> Vec<usize> {
        let d = self.dim();
        (0..d).map(|a| self.points.pow((d - 1 - a) as u32)).collect()
    }

    pub fn unflatten(&self, mut flat: usize, out: &mut [usize]) {
        for a in (0..self.dim()).rev() {
            out[a] = flat % self.points;
            flat /= self.points;
        }
    }

    pub fn flatten(&self, idx: &[usize]) -> usize {
        idx.iter().fold(0, |acc, &i| acc * self.points + i)
    }

    pub fn point(&self, flat: usize) -> Vec<f64> {
        let mut idx = vec![0; self.dim()];
        self.unflatten(flat, &mut idx);
        idx.iter().map(|&i| self.coord(i)).collect()
    }

    /// Distance in cells from `flat` to the nearest face.
    pub fn margin_of(&self, flat: usize) -> usize {
        let mut idx = vec![0; self.dim()];
        self.unflatten(flat, &mut idx);
        idx.iter().map(|&i| i.min(self.points - 1 - i)).min().unwrap_or(0)
    }

    pub fn sub_box(&self, margin: usize) -> Result<SubBox> {
        SubBox::new(self, margin)
    }
}

/// The points at least `margin` cells from every face, with their own
/// row-major local numbering.
#[derive(Clone, Debug, PartialEq)]
pub struct SubBox {
    pub margin: usize,
    pub side: usize,
    points: usize,
    dim: usize,
}

impl SubBox {
    pub fn new(spec: &GridSpec, margin: usize) -> Result<Self> {
        if 2 * margin >= spec.points {
            return Err(Error::Invalid(format!("margin {margin} leaves no points on a {}-point axis", spec.points)));
        }
        Ok(Self { margin, side: spec.points - 2 * margin, points: spec.points, dim: spec.dim() })
    }

    pub fn len(&self) -> usize {
        self.side.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn local_strides(&self) -> Vec<usize> {
        (0..self.dim).map(|a| self.side.pow((self.dim - 1 - a) as u32)).collect()
    }

    /// Grid-wide flat index of local point `local`.
    pub fn to_grid(&self, mut local: usize) -> usize {
        let mut flat = 0;
        let mut mul = 1;
        for _ in 0..self.dim {
            flat += (local % self.side + self.margin) * mul;
            local /= self.side;
            mul *= self.points;
        }
        flat
    }

    /// Local index inside `self` of local point `local` of a box with larger margin.
    pub fn from_inner(&self, inner: &SubBox, mut local: usize) -> usize {
        debug_assert!(inner.margin >= self.margin);
        let shift = inner.margin - self.margin;
        let mut out = 0;
        let mut mul = 1;
        for _ in 0..self.dim {
            out += (local % inner.side + shift) * mul;
            local /= inner.side;
            mul *= self.side;
        }
        out
    }
}

/// Real samples of a function on a [`GridSpec`].
///
/// `valid_margin` counts face layers whose values are placeholders (for
/// instance after mollification); derivatives are only taken further in.
#[derive(Clone, Debug, PartialEq)]
pub struct GridField {
    spec: GridSpec,
    values: Vec<f64>,
    valid_margin: usize,
}

impl GridField {
    pub fn new(spec: GridSpec, values: Vec<f64>) -> Result<Self> {
        Self::with_margin(spec, values, 0)
    }

    pub fn with_margin(spec: GridSpec, values: Vec<f64>, valid_margin: usize) -> Result<Self> {
        if values.len() != spec.len() {
            return Err(Error::Invalid(format!("expected {} values, got {}", spec.len(), values.len())));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Invalid(format!("non-finite value at point {:?}", spec.point(i))));
        }
        Ok(Self { spec, values, valid_margin })
    }

    pub fn zeros(spec: GridSpec) -> Self {
        let len = spec.len();
        Self { spec, values: vec![0.0; len], valid_margin: 0 }
    }

    pub fn sample<F>(spec: &GridSpec, f: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> f64 + Sync,
    {
        let d = spec.dim();
        let values: Vec<f64> = (0..spec.len())
            .into_par_iter()
            .map_init(
                || (vec![0usize; d], vec![0.0; d]),
                |(idx, x), flat| {
                    spec.unflatten(flat, idx);
                    for a in 0..d {
                        x[a] = spec.coord(idx[a]);
                    }
                    f(x)
                },
            )
            .collect();
        Self::new(spec.clone(), values)
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn valid_margin(&self) -> usize {
        self.valid_margin
    }

    /// Margin of the points where second-order stencils read valid data.
    pub fn interior_margin(&self) -> usize {
        INTERIOR_MARGIN.max(self.valid_margin + 1)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64 + Sync) -> Result<Self> {
        Self::with_margin(self.spec.clone(), self.values.par_iter().map(|&v| f(v)).collect(), self.valid_margin)
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64 + Sync) -> Result<Self> {
        if self.spec != other.spec {
            return Err(Error::Mismatch("fields on different grids".into()));
        }
        let values = self.values.par_iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Self::with_margin(self.spec.clone(), values, self.valid_margin.max(other.valid_margin))
    }

    /// Largest `|u|` over points closer than `layers` cells to a face.
    pub fn shell_max_abs(&self, layers: usize) -> f64 {
        let mut idx = vec![0; self.spec.dim()];
        let mut worst = 0.0f64;
        for (flat, v) in self.values.iter().enumerate() {
            self.spec.unflatten(flat, &mut idx);
            if idx.iter().any(|&i| i < layers || i + layers >= self.spec.points) {
                worst = worst.max(v.abs());
            }
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_validation() {
        assert!(GridSpec::new(1, 1.0, 4).is_err());
        assert!(GridSpec::new(1, 1.0, 3).is_err());
        assert!(GridSpec::new(0, 1.0, 5).is_err());
        assert!(GridSpec::new(1, -1.0, 5).is_err());
        let s = GridSpec::new(1, 1.0, 33).unwrap();
        assert_eq!(s.spacing(), 1.0 / 16.0);
        assert_eq!(s.len(), 33usize.pow(4));
    }

    #[test]
    fn flatten_round_trip() {
        let s = GridSpec::new(1, 1.0, 5).unwrap();
        let mut idx = vec![0; 4];
        for flat in [0, 7, 311, s.len() - 1] {
            s.unflatten(flat, &mut idx);
            assert_eq!(s.flatten(&idx), flat);
        }
    }

    #[test]
    fn sub_box_indices() {
        let s = GridSpec::new(1, 1.0, 7).unwrap();
        let b = s.sub_box(2).unwrap();
        assert_eq!(b.len(), 81);
        let g = b.to_grid(0);
        assert_eq!(s.margin_of(g), 2);
        let outer = s.sub_box(1).unwrap();
        let l = outer.from_inner(&b, 0);
        assert_eq!(outer.to_grid(l), g);
        let last = b.to_grid(b.len() - 1);
        assert_eq!(outer.to_grid(outer.from_inner(&b, b.len() - 1)), last);
    }

    #[test]
    fn sampling_is_row_major() {
        let s = GridSpec::new(1, 2.0, 5).unwrap();
        let f = GridField::sample(&s, |x| x[3]).unwrap();
        assert_eq!(f.values()[1] - f.values()[0], s.spacing());
        let f = GridField::sample(&s, |x| x[0]).unwrap();
        assert_eq!(f.values()[s.strides()[0]] - f.values()[0], s.spacing());
        assert!(GridField::sample(&s, |_| f64::NAN).is_err());
    }
}
