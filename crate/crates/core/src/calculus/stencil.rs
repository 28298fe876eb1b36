//! Coefficient tables for the first-order operators `∇_{jα}` and the Baston
//! coefficients, plus the finite-difference second partials they act on.

use crate::exterior::TwoForm;
use num_complex::Complex64;

/// `∇_{jα} = Σ_a c[j][α][a] ∂_a` on `R^{4n}`.
#[derive(Clone, Debug)]
pub struct NablaTable {
    n: usize,
    c: Vec<Complex64>,
}

impl NablaTable {
    pub fn new(n: usize) -> Self {
        let d = 4 * n;
        let mut c = vec![Complex64::new(0.0, 0.0); 2 * n * 2 * d];
        let i = Complex64::new(0.0, 1.0);
        let one = Complex64::new(1.0, 0.0);
        let mut put = |j: usize, alpha: usize, a: usize, v: Complex64| c[(j * 2 + alpha) * d + a] = v;
        for l in 0..n {
            let x = 4 * l;
            put(2 * l, 0, x, one);
            put(2 * l, 0, x + 1, i);
            put(2 * l, 1, x + 2, -one);
            put(2 * l, 1, x + 3, -i);
            put(2 * l + 1, 0, x + 2, one);
            put(2 * l + 1, 0, x + 3, -i);
            put(2 * l + 1, 1, x, one);
            put(2 * l + 1, 1, x + 1, -i);
        }
        Self { n, c }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coeff(&self, j: usize, alpha: usize, axis: usize) -> Complex64 {
        self.c[(j * 2 + alpha) * 4 * self.n + axis]
    }

    /// Nonzero `(axis, coefficient)` entries of `∇_{jα}`.
    pub fn row(&self, j: usize, alpha: usize) -> Vec<(usize, Complex64)> {
        (0..4 * self.n)
            .map(|a| (a, self.coeff(j, alpha, a)))
            .filter(|(_, v)| *v != Complex64::new(0.0, 0.0))
            .collect()
    }
}

/// For each pair `i < j`, the stored coefficient `c_ij = 2Δ_ij u =
/// ∇_{i0}∇_{j1}u − ∇_{i1}∇_{j0}u` as a combination of second partials `H_ab`,
/// `a <= b`.
#[derive(Clone, Debug)]
pub struct BastonTable {
    n: usize,
    rows: Vec<Vec<(usize, usize, Complex64)>>,
}

impl BastonTable {
    pub fn new(n: usize) -> Self {
        let nabla = NablaTable::new(n);
        let d = 4 * n;
        let mut rows = Vec::with_capacity(n * (4 * n - 1));
        for i in 0..2 * n {
            for j in i + 1..2 * n {
                let mut k = vec![Complex64::new(0.0, 0.0); d * d];
                for a in 0..d {
                    for b in 0..d {
                        k[a * d + b] = nabla.coeff(i, 0, a) * nabla.coeff(j, 1, b)
                            - nabla.coeff(i, 1, a) * nabla.coeff(j, 0, b);
                    }
                }
                let mut row = Vec::new();
                for a in 0..d {
                    for b in a..d {
                        let v = if a == b { k[a * d + a] } else { k[a * d + b] + k[b * d + a] };
                        if v != Complex64::new(0.0, 0.0) {
                            row.push((a, b, v));
                        }
                    }
                }
                rows.push(row);
            }
        }
        Self { n, rows }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_pairs(&self) -> usize {
        self.rows.len()
    }

    /// Baston pair coefficients from a symmetric row-major Hessian.
    pub fn apply(&self, hess: &[f64], out: &mut [Complex64]) {
        let d = 4 * self.n;
        for (o, row) in out.iter_mut().zip(&self.rows) {
            let mut acc = Complex64::new(0.0, 0.0);
            for &(a, b, v) in row {
                acc += v * hess[a * d + b];
            }
            *o = acc;
        }
    }

    pub fn form(&self, hess: &[f64]) -> TwoForm {
        let mut pairs = vec![Complex64::new(0.0, 0.0); self.num_pairs()];
        self.apply(hess, &mut pairs);
        TwoForm::from_pairs(self.n, &pairs)
    }
}

/// Central second differences at grid index `p`: 3-point on the diagonal,
/// 4-point cross for mixed partials. Fills the full symmetric matrix.
pub fn second_partials(values: &[f64], strides: &[usize], h: f64, p: usize, out: &mut [f64]) {
    let d = strides.len();
    let inv = 1.0 / (h * h);
    let u = values[p];
    for a in 0..d {
        let sa = strides[a];
        out[a * d + a] = (values[p + sa] - 2.0 * u + values[p - sa]) * inv;
        for b in a + 1..d {
            let sb = strides[b];
            let v = (values[p + sa + sb] - values[p + sa - sb] - values[p - sa + sb] + values[p - sa - sb])
                * (0.25 * inv);
            out[a * d + b] = v;
            out[b * d + a] = v;
        }
    }
}

/// Same stencils applied to a function evaluated on demand around `x`.
pub fn second_partials_at<F>(f: &F, x: &[f64], h: f64, out: &mut [f64])
where
    F: Fn(&[f64]) -> f64 + ?Sized,
{
    let d = x.len();
    let mut y = x.to_vec();
    let u = f(x);
    let inv = 1.0 / (h * h);
    let eval = |y: &mut Vec<f64>, moves: &[(usize, f64)]| {
        for &(a, s) in moves {
            y[a] += s;
        }
        let v = f(y);
        for &(a, s) in moves {
            y[a] -= s;
        }
        v
    };
    for a in 0..d {
        let up = eval(&mut y, &[(a, h)]);
        let dn = eval(&mut y, &[(a, -h)]);
        out[a * d + a] = (up - 2.0 * u + dn) * inv;
        for b in a + 1..d {
            let pp = eval(&mut y, &[(a, h), (b, h)]);
            let pm = eval(&mut y, &[(a, h), (b, -h)]);
            let mp = eval(&mut y, &[(a, -h), (b, h)]);
            let mm = eval(&mut y, &[(a, -h), (b, -h)]);
            let v = (pp - pm - mp + mm) * (0.25 * inv);
            out[a * d + b] = v;
            out[b * d + a] = v;
        }
    }
}

/// Baston form of `f` at `x` from on-demand samples with spacing `h`.
pub fn baston_at<F>(f: &F, x: &[f64], h: f64) -> TwoForm
where
    F: Fn(&[f64]) -> f64 + ?Sized,
{
    assert!(!x.is_empty() && x.len() % 4 == 0, "point must have 4n coordinates");
    let d = x.len();
    let mut hess = vec![0.0; d * d];
    second_partials_at(f, x, h, &mut hess);
    BastonTable::new(d / 4).form(&hess)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exterior::beta;

    #[test]
    fn nabla_rows_follow_the_table() {
        let t = NablaTable::new(2);
        let i = Complex64::new(0.0, 1.0);
        let one = Complex64::new(1.0, 0.0);
        assert_eq!(t.row(2, 0), vec![(4, one), (5, i)]);
        assert_eq!(t.row(2, 1), vec![(6, -one), (7, -i)]);
        assert_eq!(t.row(3, 0), vec![(6, one), (7, -i)]);
        assert_eq!(t.row(3, 1), vec![(4, one), (5, -i)]);
    }

    #[test]
    fn identity_hessian_gives_four_beta() {
        for n in 1..=3 {
            let d = 4 * n;
            let mut h = vec![0.0; d * d];
            for a in 0..d {
                h[a * d + a] = 1.0;
            }
            let f = BastonTable::new(n).form(&h);
            assert!(f.max_abs_diff(&beta(n).scale(4.0)) < 1e-15);
        }
    }

    #[test]
    fn squared_coordinate() {
        // u = x_0^2: Hessian 2 e_0 e_0^T, stored coefficient c_01 = 2
        let f = baston_at(&|x: &[f64]| x[0] * x[0], &[0.5, -0.25, 1.0, 0.0], 0.5);
        assert!((f.get(0, 1) - Complex64::new(2.0, 0.0)).norm() < 1e-12);
        assert!(f.max_abs() <= 2.0 + 1e-12);
    }
}
