use super::grid::{GridField, GridSpec, SubBox};
use super::stencil::{second_partials, BastonTable, NablaTable};
use crate::error::{Error, Result};
use crate::exterior::TwoForm;
use num_complex::Complex64;
use rayon::prelude::*;
use std::collections::BTreeMap;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// A 2-form per point of the sub-box at `margin`, stored as pair coefficients.
#[derive(Clone, Debug)]
pub struct TwoFormField {
    spec: GridSpec,
    region: SubBox,
    pairs: usize,
    data: Vec<Complex64>,
}

impl TwoFormField {
    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn region(&self) -> &SubBox {
        &self.region
    }

    pub fn margin(&self) -> usize {
        self.region.margin
    }

    pub fn len(&self) -> usize {
        self.region.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Pair coefficients at local point `local`.
    pub fn pairs_at(&self, local: usize) -> &[Complex64] {
        &self.data[local * self.pairs..(local + 1) * self.pairs]
    }

    pub fn form_at(&self, local: usize) -> TwoForm {
        TwoForm::from_pairs(self.spec.n, self.pairs_at(local))
    }

    /// Largest coefficient deviation from a constant form over all points.
    pub fn max_deviation_from(&self, form: &TwoForm) -> f64 {
        let want = form.to_pairs();
        self.data
            .par_chunks(self.pairs)
            .map(|c| c.iter().zip(&want).fold(0.0f64, |a, (x, y)| a.max((x - y).norm())))
            .reduce(|| 0.0, f64::max)
    }

    pub fn to_form_field(&self) -> FormField {
        let d = 2 * self.spec.n;
        let mut coeffs = BTreeMap::new();
        let mut p = 0;
        for i in 0..d {
            for j in i + 1..d {
                let col: Vec<Complex64> = (0..self.len()).map(|l| self.data[l * self.pairs + p]).collect();
                coeffs.insert((1u64 << i) | (1u64 << j), col);
                p += 1;
            }
        }
        FormField { spec: self.spec.clone(), region: self.region.clone(), degree: 2, coeffs }
    }
}

/// Baston form `Σ_{i<j} c_ij ω^i∧ω^j`, `c_ij = 2Δ_ij u`, on the interior.
pub fn baston(u: &GridField) -> Result<TwoFormField> {
    let spec = u.spec().clone();
    let region = spec.sub_box(u.interior_margin())?;
    let table = BastonTable::new(spec.n);
    let pairs = table.num_pairs();
    let d = spec.dim();
    let strides = spec.strides();
    let h = spec.spacing();
    let mut data = vec![ZERO; region.len() * pairs];
    data.par_chunks_mut(pairs).enumerate().for_each_init(
        || vec![0.0; d * d],
        |hess, (local, out)| {
            second_partials(u.values(), &strides, h, region.to_grid(local), hess);
            table.apply(hess, out);
        },
    );
    Ok(TwoFormField { spec, region, pairs, data })
}

/// Differential form with complex coefficient arrays on a sub-box.
///
/// Each first-order operator consumes one layer, so `margin` grows by one per
/// application.
#[derive(Clone, Debug)]
pub struct FormField {
    spec: GridSpec,
    region: SubBox,
    degree: usize,
    coeffs: BTreeMap<u64, Vec<Complex64>>,
}

impl FormField {
    pub fn from_scalar(u: &GridField) -> Result<Self> {
        let region = u.spec().sub_box(u.valid_margin())?;
        let vals: Vec<Complex64> =
            (0..region.len()).map(|l| Complex64::new(u.values()[region.to_grid(l)], 0.0)).collect();
        let mut coeffs = BTreeMap::new();
        coeffs.insert(0u64, vals);
        Ok(Self { spec: u.spec().clone(), region, degree: 0, coeffs })
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn margin(&self) -> usize {
        self.region.margin
    }

    pub fn len(&self) -> usize {
        self.region.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Coefficient array of `ω^I`, `I` strictly increasing.
    pub fn coefficient(&self, indices: &[usize]) -> Option<&[Complex64]> {
        let key = indices.iter().fold(0u64, |k, &i| k | (1 << i));
        self.coeffs.get(&key).map(|v| v.as_slice())
    }

    /// Values at the grid points of a box with larger margin.
    pub fn restrict(&self, margin: usize) -> Result<Self> {
        if margin < self.region.margin {
            return Err(Error::Invalid(format!("cannot widen margin {} to {margin}", self.region.margin)));
        }
        let inner = self.spec.sub_box(margin)?;
        let coeffs = self
            .coeffs
            .iter()
            .map(|(&k, v)| (k, (0..inner.len()).map(|l| v[self.region.from_inner(&inner, l)]).collect()))
            .collect();
        Ok(Self { spec: self.spec.clone(), region: inner, degree: self.degree, coeffs })
    }

    fn aligned(&self, other: &Self) -> Result<(Self, Self)> {
        if self.spec != other.spec {
            return Err(Error::Mismatch("form fields on different grids".into()));
        }
        let m = self.region.margin.max(other.region.margin);
        Ok((self.restrict(m)?, other.restrict(m)?))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.combine(other, 1.0)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.combine(other, -1.0)
    }

    fn combine(&self, other: &Self, sign: f64) -> Result<Self> {
        if self.degree != other.degree {
            return Err(Error::Mismatch(format!("degrees {} and {}", self.degree, other.degree)));
        }
        let (mut a, b) = self.aligned(other)?;
        for (k, v) in b.coeffs {
            let e = a.coeffs.entry(k).or_insert_with(|| vec![ZERO; v.len()]);
            for (x, y) in e.iter_mut().zip(v) {
                *x += sign * y;
            }
        }
        Ok(a)
    }

    pub fn scale(&self, t: f64) -> Self {
        let mut out = self.clone();
        for v in out.coeffs.values_mut() {
            v.iter_mut().for_each(|z| *z *= t);
        }
        out
    }

    /// Pointwise wedge product.
    pub fn wedge(&self, other: &Self) -> Result<Self> {
        let d = 2 * self.spec.n;
        if self.degree + other.degree > d {
            return Err(Error::DegreeOverflow { left: self.degree, right: other.degree, max: d });
        }
        let (a, b) = self.aligned(other)?;
        let mut coeffs: BTreeMap<u64, Vec<Complex64>> = BTreeMap::new();
        for (&ka, va) in &a.coeffs {
            for (&kb, vb) in &b.coeffs {
                if ka & kb != 0 {
                    continue;
                }
                let sign = merge_sign(ka, kb);
                let e = coeffs.entry(ka | kb).or_insert_with(|| vec![ZERO; va.len()]);
                for ((x, y), z) in e.iter_mut().zip(va).zip(vb) {
                    *x += sign * y * z;
                }
            }
        }
        Ok(Self { spec: a.spec, region: a.region, degree: a.degree + b.degree, coeffs })
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.values().flatten().fold(0.0f64, |a, z| a.max(z.norm()))
    }

    /// Two-form coefficients as a [`TwoFormField`].
    pub fn to_twoform_field(&self) -> Result<TwoFormField> {
        if self.degree != 2 {
            return Err(Error::WrongDegree { expected: 2, found: self.degree });
        }
        let d = 2 * self.spec.n;
        let pairs = self.spec.n * (d - 1);
        let mut data = vec![ZERO; self.len() * pairs];
        let mut p = 0;
        for i in 0..d {
            for j in i + 1..d {
                if let Some(col) = self.coeffs.get(&((1u64 << i) | (1u64 << j))) {
                    for (l, z) in col.iter().enumerate() {
                        data[l * pairs + p] = *z;
                    }
                }
                p += 1;
            }
        }
        Ok(TwoFormField { spec: self.spec.clone(), region: self.region.clone(), pairs, data })
    }
}

fn merge_sign(a: u64, b: u64) -> f64 {
    let mut swaps = 0u32;
    let mut rest = b;
    while rest != 0 {
        let j = rest.trailing_zeros();
        swaps += (a >> j >> 1).count_ones();
        rest &= rest - 1;
    }
    if swaps % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `Σ_a c_a ∂_a` of one coefficient array, by central differences, on the box
/// one layer further in.
fn derivative(
    spec: &GridSpec,
    from: &SubBox,
    to: &SubBox,
    values: &[Complex64],
    row: &[(usize, Complex64)],
) -> Vec<Complex64> {
    let strides = from.local_strides();
    let scale = 1.0 / (2.0 * spec.spacing());
    (0..to.len())
        .into_par_iter()
        .map(|l| {
            let c = from.from_inner(to, l);
            row.iter().fold(ZERO, |acc, &(a, k)| {
                let s = strides[a];
                acc + k * (values[c + s] - values[c - s]) * scale
            })
        })
        .collect()
}

/// `∇_{jα} u` as a degree-0 form field on the box one layer in.
pub fn nabla(u: &GridField, j: usize, alpha: usize) -> Result<FormField> {
    let n = u.spec().n;
    if j >= 2 * n || alpha > 1 {
        return Err(Error::Invalid(format!("operator index ({j}, {alpha}) out of range")));
    }
    let f = FormField::from_scalar(u)?;
    let to = u.spec().sub_box(f.margin() + 1)?;
    let row = NablaTable::new(n).row(j, alpha);
    let vals = derivative(u.spec(), &f.region, &to, &f.coeffs[&0], &row);
    let mut coeffs = BTreeMap::new();
    coeffs.insert(0u64, vals);
    Ok(FormField { spec: u.spec().clone(), region: to, degree: 0, coeffs })
}

/// `d_α F = Σ_{k,I} ∇_{kα} f_I ω^k ∧ ω^I`.
pub fn d_alpha(f: &FormField, alpha: usize) -> Result<FormField> {
    let n = f.spec.n;
    if f.degree >= 2 * n {
        return Err(Error::DegreeOverflow { left: f.degree, right: 1, max: 2 * n });
    }
    let table = NablaTable::new(n);
    let to = f.spec.sub_box(f.margin() + 1)?;
    let mut coeffs: BTreeMap<u64, Vec<Complex64>> = BTreeMap::new();
    for (&key, vals) in &f.coeffs {
        for k in 0..2 * n {
            if key & (1 << k) != 0 {
                continue;
            }
            let sign = if (key & ((1u64 << k) - 1)).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            let dv = derivative(&f.spec, &f.region, &to, vals, &table.row(k, alpha));
            let e = coeffs.entry(key | (1 << k)).or_insert_with(|| vec![ZERO; to.len()]);
            for (x, y) in e.iter_mut().zip(dv) {
                *x += sign * y;
            }
        }
    }
    Ok(FormField { spec: f.spec.clone(), region: to, degree: f.degree + 1, coeffs })
}

pub fn d0(f: &FormField) -> Result<FormField> {
    d_alpha(f, 0)
}

pub fn d1(f: &FormField) -> Result<FormField> {
    d_alpha(f, 1)
}

/// `γ(u, v) = ½(d₀u ∧ d₁v − d₁u ∧ d₀v)`.
pub fn gamma(u: &GridField, v: &GridField) -> Result<TwoFormField> {
    if u.spec() != v.spec() {
        return Err(Error::Mismatch("gamma of fields on different grids".into()));
    }
    let fu = FormField::from_scalar(u)?;
    let fv = FormField::from_scalar(v)?;
    let a = d0(&fu)?.wedge(&d1(&fv)?)?;
    let b = d1(&fu)?.wedge(&d0(&fv)?)?;
    a.sub(&b)?.scale(0.5).to_twoform_field()
}
