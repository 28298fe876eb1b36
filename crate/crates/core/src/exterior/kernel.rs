use super::{check_n, top_coefficient, Multivector, TwoForm};
use crate::error::{Error, Result};
use num_complex::Complex64;

/// Precomputed expansion of `top(α_1 ∧ … ∧ α_m ∧ β^{n-m})` as a polynomial in
/// the upper-triangular coefficients of the `α_t`.
///
/// Built once from the sparse wedge, then evaluated per grid point without
/// allocating.
#[derive(Clone, Debug)]
pub struct MixedTop {
    n: usize,
    m: usize,
    pairs: Vec<(usize, usize)>,
    /// (coefficient, pair index per slot)
    terms: Vec<(f64, Vec<usize>)>,
}

#[cfg(test)]
/// Index of `(i, j)`, `i < j`, in the pair ordering `(0,1), (0,2), …`.
pub(crate) fn pair_index(d: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < d);
    i * d - i * (i + 1) / 2 + (j - i - 1)
}

impl MixedTop {
    pub fn new(n: usize, m: usize) -> Result<Self> {
        check_n(n)?;
        if m == 0 || m > n {
            return Err(Error::Invalid(format!("order m = {m} outside 1..={n}")));
        }
        let d = 2 * n;
        let mut pairs = Vec::with_capacity(n * (d - 1));
        for i in 0..d {
            for j in i + 1..d {
                pairs.push((i, j));
            }
        }
        let fact: f64 = (1..=n - m).map(|k| k as f64).product();
        let mut terms = Vec::new();
        let mut chosen = Vec::with_capacity(m);
        collect(&pairs, m, 0u64, &mut chosen, &mut |sel: &[usize], used: u64| {
            // β^{n-m} must fill the complement with whole blocks {2l, 2l+1}.
            let free = super::full_mask(n) & !used;
            let blocks_ok = (0..n).all(|l| {
                let b = (free >> (2 * l)) & 3;
                b == 0 || b == 3
            });
            if !blocks_ok {
                return Ok(());
            }
            let mut idx: Vec<usize> = sel.iter().flat_map(|&p| [pairs[p].0, pairs[p].1]).collect();
            for l in 0..n {
                if (free >> (2 * l)) & 3 == 3 {
                    idx.extend([2 * l, 2 * l + 1]);
                }
            }
            let sign = top_coefficient(&Multivector::basis(n, &idx)?)?.re;
            terms.push((sign * fact, sel.to_vec()));
            Ok(())
        })?;
        Ok(Self { n, m, pairs, terms })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> usize {
        self.m
    }

    pub fn num_pairs(&self) -> usize {
        self.pairs.len()
    }

    /// Evaluates with one upper-triangular coefficient vector per slot.
    pub fn eval_pairs(&self, slots: &[&[Complex64]]) -> Complex64 {
        debug_assert_eq!(slots.len(), self.m);
        let mut acc = Complex64::new(0.0, 0.0);
        for (c, sel) in &self.terms {
            let mut prod = Complex64::new(*c, 0.0);
            for (slot, &p) in slots.iter().zip(sel) {
                prod *= slot[p];
            }
            acc += prod;
        }
        acc
    }

    /// Same as [`eval_pairs`](Self::eval_pairs) with every slot equal.
    pub fn eval_same(&self, alpha: &[Complex64]) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (c, sel) in &self.terms {
            let mut prod = Complex64::new(*c, 0.0);
            for &p in sel {
                prod *= alpha[p];
            }
            acc += prod;
        }
        acc
    }

    pub fn eval(&self, forms: &[&TwoForm]) -> Result<Complex64> {
        if forms.len() != self.m || forms.iter().any(|f| f.n() != self.n) {
            return Err(Error::Mismatch(format!("expected {} forms with n = {}", self.m, self.n)));
        }
        let pv: Vec<Vec<Complex64>> = forms.iter().map(|f| f.to_pairs()).collect();
        let slots: Vec<&[Complex64]> = pv.iter().map(|v| v.as_slice()).collect();
        Ok(self.eval_pairs(&slots))
    }
}

fn collect<F>(pairs: &[(usize, usize)], m: usize, used: u64, chosen: &mut Vec<usize>, f: &mut F) -> Result<()>
where
    F: FnMut(&[usize], u64) -> Result<()>,
{
    if chosen.len() == m {
        return f(chosen, used);
    }
    for (p, &(i, j)) in pairs.iter().enumerate() {
        let bits = (1u64 << i) | (1u64 << j);
        if used & bits == 0 {
            chosen.push(p);
            collect(pairs, m, used | bits, chosen, f)?;
            chosen.pop();
        }
    }
    Ok(())
}

#[cfg(test)]
/// Reference path: `top(α_1 ∧ … ∧ α_m ∧ β^{n-m})` through the sparse wedge.
pub(crate) fn mixed_top_by_wedge(forms: &[&TwoForm]) -> Result<Complex64> {
    let n = forms[0].n();
    let mut acc = Multivector::scalar(n, Complex64::new(1.0, 0.0));
    for f in forms {
        acc = super::wedge(&acc, &f.to_multivector())?;
    }
    let rest = super::power(&super::beta(n), n - forms.len())?;
    top_coefficient(&super::wedge(&acc, &rest)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pair_index_matches_enumeration() {
        for d in [2, 4, 6, 8] {
            let mut k = 0;
            for i in 0..d {
                for j in i + 1..d {
                    assert_eq!(pair_index(d, i, j), k);
                    k += 1;
                }
            }
        }
    }

    #[test]
    fn kernel_agrees_with_wedge_on_simple_forms() {
        for n in 1..=3 {
            for m in 1..=n {
                let k = MixedTop::new(n, m).unwrap();
                let forms: Vec<TwoForm> = (0..m)
                    .map(|t| {
                        TwoForm::from_upper(n, |i, j| {
                            Complex64::new((i + 2 * j + t) as f64 % 5.0 - 2.0, ((i * j + t) % 3) as f64 - 1.0)
                        })
                    })
                    .collect();
                let refs: Vec<&TwoForm> = forms.iter().collect();
                let a = k.eval(&refs).unwrap();
                let b = mixed_top_by_wedge(&refs).unwrap();
                assert!((a - b).norm() < 1e-12, "n={n} m={m}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn beta_top() {
        for n in 1..=4 {
            let k = MixedTop::new(n, n).unwrap();
            let b = super::super::beta(n).to_pairs();
            let fact: f64 = (1..=n).map(|k| k as f64).product();
            assert_eq!(k.eval_same(&b), Complex64::new(fact, 0.0));
        }
    }
}
