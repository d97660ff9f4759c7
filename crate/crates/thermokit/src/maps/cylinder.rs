//! Depth-`d` cylinder enumeration.
//!
//! A word `w = (i_1, …, i_d)` names the set of points that visit branches
//! `i_1, …, i_d` in order; its cylinder is the image of `[0, 1]` under the
//! composed inverse branch `φ_w = φ_{i_1} ∘ ⋯ ∘ φ_{i_d}`.  Because every
//! branch form in this crate has monotone `|T'|`, the supremum and infimum of
//! `|(T^d)'|` over a cylinder are attained at its endpoints, so the bounds
//! reported here are exact endpoint evaluations, not inflated estimates.

use super::MapModel;
use crate::error::Error;
use crate::Result;

/// One depth-`d` cylinder: the word (1-based branch positions), its interval,
/// and exact bounds for `|(T^d)'|` over it.
#[derive(Clone, Debug)]
pub struct CylinderWord {
    pub word: Vec<u32>,
    pub lo: f64,
    pub hi: f64,
    pub deriv_inf: f64,
    pub deriv_sup: f64,
}

/// Apply the inverse branches of `word` to `y`, right to left, returning the
/// cylinder endpoint `φ_w(y)` and `log |(T^d)'|` at that endpoint.
pub(crate) fn endpoint_chain(model: &MapModel, word: &[u32], y: f64) -> (f64, f64) {
    let mut z = y;
    let mut log_deriv = 0.0;
    for &i in word.iter().rev() {
        let b = model.branch(i as u64);
        z = b.inverse(z);
        log_deriv += b.deriv_abs(z).ln();
    }
    (z, log_deriv)
}

/// Compute the full cylinder record for one word.
pub(crate) fn word_record(model: &MapModel, word: &[u32]) -> CylinderWord {
    let (x0, ld0) = endpoint_chain(model, word, 0.0);
    let (x1, ld1) = endpoint_chain(model, word, 1.0);
    let (lo, hi) = if x0 <= x1 { (x0, x1) } else { (x1, x0) };
    CylinderWord {
        word: word.to_vec(),
        lo,
        hi,
        deriv_inf: ld0.min(ld1).exp(),
        deriv_sup: ld0.max(ld1).exp(),
    }
}

/// Stream every depth-`depth` cylinder over branches `1..=n_branches` in
/// lexicographic word order.  Errors up front if the word count exceeds
/// `budget`.
pub fn cylinders(
    model: &MapModel,
    n_branches: u32,
    depth: u32,
    budget: u64,
    f: &mut dyn FnMut(&CylinderWord),
) -> Result<()> {
    if n_branches == 0 || depth == 0 {
        return Err(Error::config("cylinders needs n_branches ≥ 1 and depth ≥ 1"));
    }
    if let Some(count) = model.branch_count() {
        if u64::from(n_branches) > count {
            return Err(Error::config(format!(
                "cylinders over {n_branches} branches, model has {count}"
            )));
        }
    }
    let words = (u64::from(n_branches) as u128).checked_pow(depth).unwrap_or(u128::MAX);
    if words > u128::from(budget) {
        return Err(Error::BudgetExceeded { requested: words, budget: u128::from(budget) });
    }
    let mut word = vec![1u32; depth as usize];
    loop {
        f(&word_record(model, &word));
        // next word in lexicographic order (odometer with carry)
        let mut k = depth as usize;
        loop {
            if k == 0 {
                return Ok(());
            }
            k -= 1;
            if word[k] < n_branches {
                word[k] += 1;
                for w in word.iter_mut().skip(k + 1) {
                    *w = 1;
                }
                break;
            }
        }
    }
}

/// Convenience wrapper collecting the stream into a vector.
pub fn cylinders_collect(
    model: &MapModel,
    n_branches: u32,
    depth: u32,
    budget: u64,
) -> Result<Vec<CylinderWord>> {
    let mut out = Vec::new();
    cylinders(model, n_branches, depth, budget, &mut |c| out.push(c.clone()))?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_depth2_known_cylinders() {
        let g = MapModel::gauss();
        let cs = cylinders_collect(&g, 2, 2, 100).unwrap();
        assert_eq!(cs.len(), 4);
        // lexicographic order
        let words: Vec<Vec<u32>> = cs.iter().map(|c| c.word.clone()).collect();
        assert_eq!(words, vec![vec![1, 1], vec![1, 2], vec![2, 1], vec![2, 2]]);
        // [1,1]: φ(y) = (1+y)/(2+y) gives [1/2, 2/3], |T²'| ∈ [4, 9]
        let c11 = &cs[0];
        assert!((c11.lo - 0.5).abs() < 1e-12);
        assert!((c11.hi - 2.0 / 3.0).abs() < 1e-12);
        assert!((c11.deriv_inf - 4.0).abs() < 1e-9);
        assert!((c11.deriv_sup - 9.0).abs() < 1e-9);
        // [1,2]: φ(y) = (2+y)/(3+y) gives [2/3, 3/4], |T²'| ∈ [9, 16]
        let c12 = &cs[1];
        assert!((c12.lo - 2.0 / 3.0).abs() < 1e-12);
        assert!((c12.hi - 0.75).abs() < 1e-12);
        assert!((c12.deriv_inf - 9.0).abs() < 1e-9);
        assert!((c12.deriv_sup - 16.0).abs() < 1e-9);
    }

    #[test]
    fn renyi_parabolic_cylinder_touches_zero() {
        let r = MapModel::renyi();
        let cs = cylinders_collect(&r, 2, 2, 100).unwrap();
        // [1,1]: φ(y) = y/(1+2y) gives [0, 1/3], |T²'| ∈ [1, 9]
        let c11 = &cs[0];
        assert!(c11.lo.abs() < 1e-14);
        assert!((c11.hi - 1.0 / 3.0).abs() < 1e-12);
        assert!((c11.deriv_inf - 1.0).abs() < 1e-9);
        assert!((c11.deriv_sup - 9.0).abs() < 1e-9);
    }

    #[test]
    fn cylinders_partition_at_each_depth() {
        // Truncated to n branches the depth-d cylinders tile the depth-(d-1)
        // ones; for gauss with n=3 check the depth-2 intervals are disjoint
        // and lengths sum to the depth-1 total.
        let g = MapModel::gauss();
        let d1: f64 = cylinders_collect(&g, 3, 1, 100)
            .unwrap()
            .iter()
            .map(|c| c.hi - c.lo)
            .sum();
        let cs = cylinders_collect(&g, 3, 2, 100).unwrap();
        let d2: f64 = cs.iter().map(|c| c.hi - c.lo).sum();
        assert!(d2 < d1);
        // each depth-2 cylinder sits inside its leading depth-1 branch
        for c in &cs {
            let b = g.branch(c.word[0] as u64);
            assert!(c.lo >= b.lo - 1e-12 && c.hi <= b.hi + 1e-12);
        }
    }

    #[test]
    fn mean_value_consistency() {
        // |cylinder| · deriv_inf ≤ |T^d(cylinder)| = 1 ≤ |cylinder| · deriv_sup
        let models = [
            MapModel::gauss(),
            MapModel::renyi(),
            MapModel::infinite_mp(0.8).unwrap(),
        ];
        for m in models {
            for c in cylinders_collect(&m, 4, 3, 1000).unwrap() {
                let len = c.hi - c.lo;
                assert!(len * c.deriv_inf <= 1.0 + 1e-9, "{:?}", c.word);
                assert!(len * c.deriv_sup >= 1.0 - 1e-9, "{:?}", c.word);
            }
        }
    }

    #[test]
    fn infinite_mp_word_21_exact_lower_bound() {
        // Word (2,1): enter branch 2 then branch 1.  At the y = 0 endpoint the
        // second step lands on the parabolic fixed point where T' = 1, so the
        // product is exactly the affine slope 6.
        let m = MapModel::infinite_mp(1.0).unwrap();
        let c = word_record(&m, &[2, 1]);
        assert!((c.deriv_inf - 6.0).abs() < 1e-9);
        assert!(c.deriv_sup > c.deriv_inf);
        assert!(c.deriv_sup <= 18.0 + 1e-9);
        let b2 = m.branch(2);
        assert!(c.lo >= b2.lo - 1e-12 && c.hi <= b2.hi + 1e-12);
    }

    #[test]
    fn budget_guard_trips() {
        let g = MapModel::gauss();
        let err = cylinders_collect(&g, 10, 9, 1_000_000).unwrap_err();
        match err {
            Error::BudgetExceeded { requested, budget } => {
                assert_eq!(requested, 1_000_000_000);
                assert_eq!(budget, 1_000_000);
            }
            other => panic!("expected BudgetExceeded, got {other:?}"),
        }
    }

    #[test]
    fn linear_custom_cylinders_are_dyadic() {
        let m = MapModel::linear_custom(&[(0.0, 0.5, 2.0), (0.5, 1.0, 2.0)]).unwrap();
        let cs = cylinders_collect(&m, 2, 3, 100).unwrap();
        assert_eq!(cs.len(), 8);
        for (k, c) in cs.iter().enumerate() {
            assert!((c.lo - k as f64 / 8.0).abs() < 1e-12);
            assert!((c.deriv_inf - 8.0).abs() < 1e-9);
            assert!((c.deriv_sup - 8.0).abs() < 1e-9);
        }
    }
}
