//! Branch constructors for the built-in families.

use super::{patho_slope, Branch, BranchForm};

/// Gauss map branch `n`: `T(x) = 1/x - n` on `[1/(n+1), 1/n]`, decreasing.
pub(super) fn gauss_branch(n: u64) -> Branch {
    let nf = n as f64;
    Branch {
        index: n,
        lo: 1.0 / (nf + 1.0),
        hi: 1.0 / nf,
        // (−n x + 1) / x
        form: BranchForm::Mobius { a: -nf, b: 1.0, c: 1.0, d: 0.0 },
        parabolic: false,
    }
}

/// Renyi map branch `n`: `T(x) = 1/(1-x) - n` on `[1 - 1/n, 1 - 1/(n+1)]`,
/// increasing; branch 1 is `x/(1-x)` with the neutral fixed point at 0.
pub(super) fn renyi_branch(n: u64) -> Branch {
    let nf = n as f64;
    Branch {
        index: n,
        lo: 1.0 - 1.0 / nf,
        hi: 1.0 - 1.0 / (nf + 1.0),
        // (n x + 1 - n) / (-x + 1)
        form: BranchForm::Mobius { a: nf, b: 1.0 - nf, c: -1.0, d: 1.0 },
        parabolic: n == 1,
    }
}

/// Manneville–Pomeau style branch: parabolic `x + 2^β x^{1+β}` on `[0, 1/2]`,
/// then affine slope `n(n+1)` on `[(n-1)/n, n/(n+1)]` for `n ≥ 2`.
pub(super) fn infinite_mp_branch(beta: f64, n: u64) -> Branch {
    if n == 1 {
        // coeff = 2^β makes T(1/2) = 1 exactly.
        Branch {
            index: 1,
            lo: 0.0,
            hi: 0.5,
            form: BranchForm::Parabolic { beta, coeff: 2f64.powf(beta) },
            parabolic: true,
        }
    } else {
        let nf = n as f64;
        let slope = nf * (nf + 1.0);
        let lo = (nf - 1.0) / nf;
        Branch {
            index: n,
            lo,
            hi: nf / (nf + 1.0),
            // slope · (x - lo) = slope·x - (n² - 1)
            form: BranchForm::Affine { slope, intercept: -(nf * nf - 1.0) },
            parabolic: false,
        }
    }
}

/// Pathological family branch at 1-based position `pos`: position 1 is the
/// parabolic branch (β = 1 form) on `[0, 1/2]`; position `k ≥ 2` is the
/// affine branch with series label `n_start + k - 1`, packed at
/// `packing[k - 2]` with slope `x(label)`.
pub(super) fn pathological_branch(n_start: u64, packing: &[f64], pos: u64) -> Branch {
    if pos == 1 {
        return Branch {
            index: 1,
            lo: 0.0,
            hi: 0.5,
            form: BranchForm::Parabolic { beta: 1.0, coeff: 2.0 },
            parabolic: true,
        };
    }
    let k = (pos - 2) as usize;
    assert!(
        k < packing.len(),
        "pathological branch position {pos} beyond materialised packing"
    );
    let label = n_start + pos - 1;
    let slope = patho_slope(label);
    let lo = packing[k];
    Branch {
        index: label,
        lo,
        hi: lo + 1.0 / slope,
        form: BranchForm::Affine { slope, intercept: -slope * lo },
        parabolic: false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_branch_is_full() {
        for n in [1u64, 2, 9] {
            let b = gauss_branch(n);
            // decreasing: left endpoint maps to 1, right to 0
            assert!((b.eval(b.lo) - 1.0).abs() < 1e-12);
            assert!(b.eval(b.hi).abs() < 1e-12);
        }
    }

    #[test]
    fn renyi_branch_is_full() {
        for n in [1u64, 2, 9] {
            let b = renyi_branch(n);
            assert!(b.eval(b.lo).abs() < 1e-12);
            assert!((b.eval(b.hi) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn renyi_inverse_matches_closed_form() {
        // φ_n(y) = 1 - 1/(n+y)
        for n in [1u64, 3, 17] {
            let b = renyi_branch(n);
            for &y in &[0.0, 0.3, 1.0] {
                let expect = 1.0 - 1.0 / (n as f64 + y);
                assert!((b.inverse(y) - expect).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn mp_affine_branches_tile() {
        let b2 = infinite_mp_branch(0.7, 2);
        let b3 = infinite_mp_branch(0.7, 3);
        assert!((b2.hi - b3.lo).abs() < 1e-15);
        assert!((b3.eval(b3.lo)).abs() < 1e-12);
        assert!((b3.eval(b3.hi) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mp_parabolic_derivative_at_zero_is_one() {
        let b = infinite_mp_branch(0.4, 1);
        assert!((b.deriv_abs(0.0) - 1.0).abs() < 1e-15);
        assert!(b.deriv_abs(0.4) > 1.0);
    }
}
