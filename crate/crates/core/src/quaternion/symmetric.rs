//! Elementary symmetric polynomials and the eigenvalue pattern of the radial
//! extremal function, in exact arithmetic where it matters.

use num_rational::Ratio;
use num_traits::{One, Zero};

/// `σ_k(values)`; works for floats and exact rationals alike.
pub fn elementary_symmetric<T>(values: &[T], k: usize) -> T
where
    T: Clone + Zero + One,
{
    if k > values.len() {
        return T::zero();
    }
    let mut e = vec![T::zero(); k + 1];
    e[0] = T::one();
    for x in values {
        for j in (1..=k).rev() {
            e[j] = e[j].clone() + e[j - 1].clone() * x.clone();
        }
    }
    e[k].clone()
}

fn binom(n: i64, k: i64) -> i64 {
    if k < 0 || k > n {
        return 0;
    }
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

fn factorial(n: i64) -> i64 {
    (1..=n).product()
}

/// Hessian eigenvalues of `‖q‖^{2-2a}` up to a positive factor:
/// `(2, …, 2, 2 - a)` with `a = 2n/m`.
pub fn extremal_eigenvalues(n: usize, m: usize) -> Vec<Ratio<i64>> {
    assert!(1 <= m && m <= n);
    let a = Ratio::new(2 * n as i64, m as i64);
    let mut v = vec![Ratio::from_integer(2); n];
    v[n - 1] = Ratio::from_integer(2) - a;
    v
}

/// `2·C(n-1, p) + (2 - a)·C(n-1, p-1)`, the sum obtained by splitting off the
/// distinguished eigenvalue; equals `σ_p(extremal_eigenvalues) / 2^{p-1}`.
pub fn extremal_eigen_sum(n: usize, m: usize, p: usize) -> Ratio<i64> {
    assert!(1 <= p && p <= n && 1 <= m && m <= n);
    let (n, m, p) = (n as i64, m as i64, p as i64);
    let a = Ratio::new(2 * n, m);
    Ratio::from_integer(2 * binom(n - 1, p)) + (Ratio::from_integer(2) - a) * binom(n - 1, p - 1)
}

/// `2(n-1)!/((p-1)!(n-p)!) · (n/p - n/m)`.
pub fn extremal_eigen_sum_closed_form(n: usize, m: usize, p: usize) -> Ratio<i64> {
    assert!(1 <= p && p <= n && 1 <= m && m <= n);
    let (n, m, p) = (n as i64, m as i64, p as i64);
    let lead = Ratio::new(2 * factorial(n - 1), factorial(p - 1) * factorial(n - p));
    lead * (Ratio::new(n, p) - Ratio::new(n, m))
}
