use super::{check_n, top_coefficient, wedge, Multivector};
use crate::error::{Error, Result};
use crate::quaternion::{tau_block, tau_unblock, HyperhermitianMatrix, Quaternion};
use num_complex::Complex64;
use serde::Serialize;

/// Verdict tolerance on unit-normalized forms.
pub const DEFAULT_CONE_TOL: f64 = 1e-10;

const REAL_TOL: f64 = 1e-10;

/// `Σ_{i<j} c_ij ω^i ∧ ω^j`, stored as the full antisymmetric matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoForm {
    n: usize,
    c: Vec<Complex64>,
}

impl TwoForm {
    pub fn zeros(n: usize) -> Self {
        Self { n, c: vec![Complex64::new(0.0, 0.0); 4 * n * n] }
    }

    /// Fills `c_ij` from `f(i, j)` for `i < j`.
    pub fn from_upper(n: usize, f: impl Fn(usize, usize) -> Complex64) -> Self {
        let mut out = Self::zeros(n);
        for i in 0..2 * n {
            for j in i + 1..2 * n {
                out.set(i, j, f(i, j));
            }
        }
        out
    }

    /// Row-major `2n x 2n` matrix; must be antisymmetric.
    pub fn from_matrix(n: usize, c: Vec<Complex64>) -> Result<Self> {
        check_n(n)?;
        let d = 2 * n;
        if c.len() != d * d {
            return Err(Error::Invalid(format!("expected {} coefficients, got {}", d * d, c.len())));
        }
        let scale = c.iter().fold(1.0f64, |a, z| a.max(z.norm()));
        for i in 0..d {
            for j in 0..=i {
                if (c[i * d + j] + c[j * d + i]).norm() > 1e-12 * scale {
                    return Err(Error::Invalid(format!("coefficients not antisymmetric at ({i}, {j})")));
                }
            }
        }
        Ok(Self { n, c })
    }

    /// Coefficients in pair order `(0,1), (0,2), …, (2n-2, 2n-1)`.
    pub fn from_pairs(n: usize, upper: &[Complex64]) -> Self {
        let mut out = Self::zeros(n);
        let mut it = upper.iter();
        for i in 0..2 * n {
            for j in i + 1..2 * n {
                out.set(i, j, *it.next().expect("pair vector too short"));
            }
        }
        out
    }

    pub fn to_pairs(&self) -> Vec<Complex64> {
        let d = 2 * self.n;
        let mut out = Vec::with_capacity(self.n * (d - 1));
        for i in 0..d {
            for j in i + 1..d {
                out.push(self.get(i, j));
            }
        }
        out
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.c[i * 2 * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        assert!(i != j, "diagonal of a 2-form is zero");
        let d = 2 * self.n;
        self.c[i * d + j] = v;
        self.c[j * d + i] = -v;
    }

    pub fn matrix(&self) -> &[Complex64] {
        &self.c
    }

    pub fn scale(&self, t: f64) -> Self {
        Self { n: self.n, c: self.c.iter().map(|z| z * t).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        Self { n: self.n, c: self.c.iter().zip(&other.c).map(|(a, b)| a + b).collect() }
    }

    pub fn max_abs(&self) -> f64 {
        self.c.iter().fold(0.0f64, |a, z| a.max(z.norm()))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.c.iter().zip(&other.c).fold(0.0f64, |a, (x, y)| a.max((x - y).norm()))
    }

    pub fn to_multivector(&self) -> Multivector {
        let d = 2 * self.n;
        let mut terms = Vec::new();
        for i in 0..d {
            for j in i + 1..d {
                let v = self.get(i, j);
                if v != Complex64::new(0.0, 0.0) {
                    terms.push((vec![i, j], v));
                }
            }
        }
        Multivector::from_terms(self.n, 2, terms).expect("valid 2-form keys")
    }
}

/// `Σ_l ω^{2l} ∧ ω^{2l+1}`.
pub fn beta(n: usize) -> TwoForm {
    let mut b = TwoForm::zeros(n);
    for l in 0..n {
        b.set(2 * l, 2 * l + 1, Complex64::new(1.0, 0.0));
    }
    b
}

/// `F^k` as a form of degree `2k`.
pub fn power(f: &TwoForm, k: usize) -> Result<Multivector> {
    if k > f.n {
        return Err(Error::DegreeOverflow { left: 2 * k, right: 0, max: 2 * f.n });
    }
    let base = f.to_multivector();
    let mut out = Multivector::scalar(f.n, Complex64::new(1.0, 0.0));
    for _ in 0..k {
        out = wedge(&out, &base)?;
    }
    Ok(out)
}

/// `2·J·τ(A)` with `J = blockdiag([[0,1],[-1,0]])`; maps the identity to `2β`
/// and the Hessian of `Re Σ q̄_l a_lk q_k` (which is `4A`) to its Baston form.
pub fn twoform_from_hyperhermitian(a: &HyperhermitianMatrix) -> TwoForm {
    let n = a.n();
    let d = 2 * n;
    let mut c = vec![Complex64::new(0.0, 0.0); d * d];
    for l in 0..n {
        for k in 0..n {
            let b = tau_block(a.get(l, k));
            for j in 0..2 {
                c[(2 * l) * d + 2 * k + j] = 2.0 * b[1][j];
                c[(2 * l + 1) * d + 2 * k + j] = -2.0 * b[0][j];
            }
        }
    }
    TwoForm { n, c }
}

fn unwind(alpha: &TwoForm) -> (HyperhermitianMatrix, f64) {
    let n = alpha.n;
    // τ(A) = -½ J C
    let x = |r: usize, col: usize| -> Complex64 {
        if r % 2 == 0 {
            -0.5 * alpha.get(r + 1, col)
        } else {
            0.5 * alpha.get(r - 1, col)
        }
    };
    let mut q = vec![Quaternion::ZERO; n * n];
    let mut defect = 0.0f64;
    for l in 0..n {
        for k in 0..n {
            let b = [
                [x(2 * l, 2 * k), x(2 * l, 2 * k + 1)],
                [x(2 * l + 1, 2 * k), x(2 * l + 1, 2 * k + 1)],
            ];
            let (v, d) = tau_unblock(b);
            q[l * n + k] = v;
            defect = defect.max(d);
        }
    }
    for l in 0..n {
        defect = defect.max(q[l * n + l].imag_abs_max());
        for k in 0..l {
            defect = defect.max(q[l * n + k].abs_diff(q[k * n + l].conj()));
        }
    }
    let a = HyperhermitianMatrix::from_upper(n, |l, k| {
        if l == k {
            q[l * n + l]
        } else {
            (q[l * n + k] + q[k * n + l].conj()).scale(0.5)
        }
    });
    (a, defect)
}

/// Distance of `alpha` from the real 2-forms, relative to its size.
pub fn real_defect(alpha: &TwoForm) -> f64 {
    let scale = alpha.max_abs();
    if scale == 0.0 {
        return 0.0;
    }
    unwind(alpha).1 / scale
}

/// Inverse of [`twoform_from_hyperhermitian`]; fails when `alpha` is not real.
pub fn hyperhermitian_from_twoform(alpha: &TwoForm) -> Result<HyperhermitianMatrix> {
    let (a, defect) = unwind(alpha);
    let scale = alpha.max_abs();
    if defect > REAL_TOL * scale {
        return Err(Error::NonReal { defect: defect / scale.max(f64::MIN_POSITIVE) });
    }
    Ok(a)
}

#[derive(Clone, Debug, Serialize)]
pub struct ConeReport {
    /// `density_k` for `k = 1..=m` of the unit-normalized form.
    pub densities: Vec<f64>,
    pub member: bool,
    /// The factor the form was divided by (its largest coefficient).
    pub scale: f64,
}

/// Tests `α^k ∧ β^{n-k} >= -tol` for `k = 1..=m` after scaling `α` to unit
/// max-coefficient; densities are divided by the `β^n` coefficient `n!`.
pub fn cone_membership(alpha: &TwoForm, m: usize, tol: f64) -> Result<ConeReport> {
    let n = alpha.n;
    if m == 0 || m > n {
        return Err(Error::Invalid(format!("order m = {m} outside 1..={n}")));
    }
    let defect = real_defect(alpha);
    if defect > REAL_TOL {
        return Err(Error::NonReal { defect });
    }
    let scale = alpha.max_abs();
    if scale == 0.0 {
        return Ok(ConeReport { densities: vec![0.0; m], member: true, scale });
    }
    let unit = alpha.scale(1.0 / scale);
    let b = beta(n);
    let norm = top_coefficient(&power(&b, n)?)?.re;
    let mut densities = Vec::with_capacity(m);
    for k in 1..=m {
        let f = wedge(&power(&unit, k)?, &power(&b, n - k)?)?;
        densities.push(top_coefficient(&f)?.re / norm);
    }
    let member = densities.iter().all(|&d| d >= -tol);
    Ok(ConeReport { densities, member, scale })
}
