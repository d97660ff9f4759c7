//! Small numerical building blocks shared across the crate.
//!
//! Everything here is deterministic: compensated sums are accumulated in the
//! order supplied by the caller, and the helpers never consult global state.

/// Kahan–Babuska compensated accumulator.
///
/// Terms are added in caller order; the compensation keeps the running error
/// at a few ulps even over hundreds of millions of terms, which is what makes
/// the fixed-order parallel reductions bit-stable.
#[derive(Clone, Copy, Debug, Default)]
pub struct Kahan {
    sum: f64,
    carry: f64,
}

impl Kahan {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    /// Fold another accumulator in (used when combining per-branch partials).
    pub fn merge(&mut self, other: Kahan) {
        self.add(other.sum);
        self.add(other.carry);
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// Accumulates `Σ exp(ℓ_i)` given terms on the log scale, without overflow
/// or underflow, returning the total as a log.
///
/// The accumulator keeps a floating reference scale: the running sum is
/// `exp(scale) * mantissa` with `mantissa` kept in a compensated sum.  Terms
/// far below the current scale are still added (they just contribute tiny
/// mantissa increments), terms far above trigger a rescale.
#[derive(Clone, Copy, Debug)]
pub struct LogSum {
    scale: f64,
    mantissa: Kahan,
}

impl Default for LogSum {
    fn default() -> Self {
        Self::new()
    }
}

impl LogSum {
    pub fn new() -> Self {
        LogSum { scale: f64::NEG_INFINITY, mantissa: Kahan::new() }
    }

    #[inline]
    pub fn add_log(&mut self, l: f64) {
        if l == f64::NEG_INFINITY {
            return;
        }
        if self.scale == f64::NEG_INFINITY {
            self.scale = l;
            self.mantissa = Kahan::new();
            self.mantissa.add(1.0);
            return;
        }
        let d = l - self.scale;
        if d <= 0.0 {
            self.mantissa.add(d.exp());
        } else if d < 40.0 {
            // Rescale so the new term becomes the reference.
            let m = self.mantissa.value() * (-d).exp();
            self.scale = l;
            self.mantissa = Kahan::new();
            self.mantissa.add(m);
            self.mantissa.add(1.0);
        } else {
            // New term dwarfs everything accumulated so far.
            self.scale = l;
            self.mantissa = Kahan::new();
            self.mantissa.add(1.0);
        }
    }

    /// Merge, keeping determinism: `other` is folded in as one unit.
    pub fn merge(&mut self, other: LogSum) {
        if other.scale == f64::NEG_INFINITY {
            return;
        }
        let m = other.mantissa.value();
        if m > 0.0 {
            self.add_log(other.scale + m.ln());
        }
    }

    /// log of the accumulated sum (−∞ if empty).
    pub fn log_value(&self) -> f64 {
        if self.scale == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            self.scale + self.mantissa.value().ln()
        }
    }
}

/// Bisection for a monotone sign change of `f` on `[lo, hi]`.
///
/// Requires `f(lo)` and `f(hi)` to have opposite signs; returns the midpoint
/// of the final bracket once its width drops below `tol`.
pub fn bisect(mut lo: f64, mut hi: f64, tol: f64, mut f: impl FnMut(f64) -> f64) -> Option<f64> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Some(lo);
    }
    if fhi == 0.0 {
        return Some(hi);
    }
    if flo.signum() == fhi.signum() {
        return None;
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 {
            return Some(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// One Aitken Δ² step on the last three terms of a sequence.
///
/// Returns `None` when the step is numerically unsafe (tiny or sign-flipping
/// difference-of-differences), in which case the caller should fall back to
/// the raw last term.
pub fn aitken_last(seq: &[f64]) -> Option<f64> {
    let n = seq.len();
    if n < 3 {
        return None;
    }
    let (a, b, c) = (seq[n - 3], seq[n - 2], seq[n - 1]);
    let d1 = b - a;
    let d2 = c - b;
    let denom = d2 - d1;
    if denom.abs() < 1e-14 * (d1.abs() + d2.abs() + 1e-300) {
        return None;
    }
    let acc = c - d2 * d2 / denom;
    // Reject wild extrapolations (non-geometric tails can make Δ² explode).
    if (acc - c).abs() > 4.0 * d2.abs() + 1e-12 {
        return None;
    }
    Some(acc)
}

/// Ordinary least squares for `y ≈ a + b x`; returns `(a, b, max_residual)`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    assert_eq!(xs.len(), ys.len());
    assert!(xs.len() >= 2);
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    let b = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let a = my - b * mx;
    let mut max_r: f64 = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        max_r = max_r.max((y - (a + b * x)).abs());
    }
    (a, b, max_r)
}

/// Pool-adjacent-violators projection onto nondecreasing sequences.
///
/// Used to enforce convexity of interpolated pressure curves: the sampled
/// derivative is projected to the closest (L²) nondecreasing sequence before
/// it is inverted for the Legendre transform.
pub fn isotonic_nondecreasing(v: &[f64]) -> Vec<f64> {
    // Classic PAV with weights 1.
    let mut level: Vec<f64> = Vec::with_capacity(v.len());
    let mut weight: Vec<f64> = Vec::with_capacity(v.len());
    for &x in v {
        level.push(x);
        weight.push(1.0);
        while level.len() >= 2 {
            let n = level.len();
            if level[n - 2] <= level[n - 1] {
                break;
            }
            let w = weight[n - 2] + weight[n - 1];
            let merged = (level[n - 2] * weight[n - 2] + level[n - 1] * weight[n - 1]) / w;
            level.truncate(n - 2);
            weight.truncate(n - 2);
            level.push(merged);
            weight.push(w);
        }
    }
    let mut out = Vec::with_capacity(v.len());
    for (l, w) in level.iter().zip(&weight) {
        for _ in 0..(*w as usize) {
            out.push(*l);
        }
    }
    out
}

/// Tail `Σ_{n > n0} n^{-s}` of a polynomial series, by Euler–Maclaurin.
///
/// Accurate to ~1e-12 for `n0 ≥ 10`, `s > 1`. Diverges (`+∞`) for `s ≤ 1`.
pub fn poly_tail(n0: u64, s: f64) -> f64 {
    if s <= 1.0 {
        return f64::INFINITY;
    }
    // Push the start out for accuracy, summing the skipped terms directly.
    let mut direct = 0.0;
    let mut m = n0;
    while m < n0.max(32) {
        m += 1;
        direct += (m as f64).powf(-s);
    }
    let a = m as f64; // tail starts strictly after `a`
    let t1 = a.powf(1.0 - s) / (s - 1.0);
    let t2 = -0.5 * a.powf(-s);
    let t3 = s / 12.0 * a.powf(-s - 1.0);
    let t5 = -s * (s + 1.0) * (s + 2.0) / 720.0 * a.powf(-s - 3.0);
    direct + t1 + t2 + t3 + t5
}

/// `Σ_{k ≥ 1} (a + k)^{-s}` for a real offset `a ≥ 0`, by Euler–Maclaurin.
///
/// Same contract as [`poly_tail`] (which it generalises): `+∞` for `s ≤ 1`.
pub fn poly_tail_real(a: f64, s: f64) -> f64 {
    if s <= 1.0 {
        return f64::INFINITY;
    }
    debug_assert!(a >= 0.0);
    // Sum explicit terms until the start is large enough for the expansion.
    let explicit = if a >= 32.0 { 0 } else { (34.0 - a) as usize };
    let mut direct = 0.0;
    for k in 1..=explicit {
        direct += (a + k as f64).powf(-s);
    }
    let b = a + explicit as f64;
    let t1 = b.powf(1.0 - s) / (s - 1.0);
    let t2 = -0.5 * b.powf(-s);
    let t3 = s / 12.0 * b.powf(-s - 1.0);
    let t5 = -s * (s + 1.0) * (s + 2.0) / 720.0 * b.powf(-s - 3.0);
    direct + t1 + t2 + t3 + t5
}

/// Three-point derivative estimates on a nonuniform grid.
///
/// Interior points use the standard unequal-spacing parabola; endpoints use
/// one-sided two-point slopes. Returns a vector the same length as `x`.
pub fn grad_nonuniform(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    assert!(n >= 2 && y.len() == n);
    let mut g = vec![0.0; n];
    g[0] = (y[1] - y[0]) / (x[1] - x[0]);
    g[n - 1] = (y[n - 1] - y[n - 2]) / (x[n - 1] - x[n - 2]);
    for i in 1..n - 1 {
        let h1 = x[i] - x[i - 1];
        let h2 = x[i + 1] - x[i];
        g[i] = (y[i + 1] * h1 * h1 - y[i - 1] * h2 * h2 + y[i] * (h2 * h2 - h1 * h1))
            / (h1 * h2 * (h1 + h2));
    }
    g
}

/// Golden-section search for the minimizer of a unimodal `f` on `[lo, hi]`.
///
/// Returns `(x*, f(x*))` once the bracket width drops below `tol`.  On a
/// convex function the local minimum found is the global one.
pub fn golden_min(mut lo: f64, mut hi: f64, tol: f64, mut f: impl FnMut(f64) -> f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut a = hi - INV_PHI * (hi - lo);
    let mut b = lo + INV_PHI * (hi - lo);
    let mut fa = f(a);
    let mut fb = f(b);
    while hi - lo > tol {
        if fa <= fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - INV_PHI * (hi - lo);
            fa = f(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + INV_PHI * (hi - lo);
            fb = f(b);
        }
    }
    let x = 0.5 * (lo + hi);
    (x, f(x))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kahan_handles_many_small_terms() {
        let mut k = Kahan::new();
        for _ in 0..1_000_000 {
            k.add(0.1);
        }
        assert!((k.value() - 100_000.0).abs() < 1e-6);
    }

    #[test]
    fn logsum_matches_direct_sum() {
        let logs = [-3.0, -1.0, 0.5, -700.0, 2.0];
        let mut acc = LogSum::new();
        for &l in &logs {
            acc.add_log(l);
        }
        let direct: f64 = logs.iter().map(|l| l.exp()).sum();
        assert!((acc.log_value() - direct.ln()).abs() < 1e-12);
    }

    #[test]
    fn logsum_survives_extreme_scales() {
        let mut acc = LogSum::new();
        acc.add_log(-2000.0);
        acc.add_log(1500.0);
        acc.add_log(1500.0);
        assert!((acc.log_value() - (1500.0 + 2f64.ln())).abs() < 1e-12);
    }

    #[test]
    fn bisect_finds_sqrt2() {
        let r = bisect(0.0, 2.0, 1e-12, |x| x * x - 2.0).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-11);
    }

    #[test]
    fn aitken_accelerates_geometric() {
        // s_n = 1 - 0.5^n -> 1
        let seq: Vec<f64> = (1..=5).map(|n| 1.0 - 0.5f64.powi(n)).collect();
        let acc = aitken_last(&seq).unwrap();
        assert!((acc - 1.0).abs() < 1e-12);
    }

    #[test]
    fn isotonic_projects_violations() {
        let v = [1.0, 3.0, 2.0, 4.0];
        let p = isotonic_nondecreasing(&v);
        assert_eq!(p.len(), 4);
        for w in p.windows(2) {
            assert!(w[0] <= w[1] + 1e-15);
        }
        assert!((p[1] - 2.5).abs() < 1e-12 && (p[2] - 2.5).abs() < 1e-12);
    }

    #[test]
    fn poly_tail_real_matches_brute_force() {
        let a = 7.3;
        let s = 1.9;
        let mut brute = 0.0;
        for k in 1..400_000u64 {
            brute += (a + k as f64).powf(-s);
        }
        // close the brute sum with the analytic remainder from a large start
        brute += poly_tail_real(a + 399_999.0, s);
        let got = poly_tail_real(a, s);
        assert!((got - brute).abs() < 1e-9, "{got} vs {brute}");
        // integer offsets agree with the integer version
        assert!((poly_tail_real(50.0, 2.4) - poly_tail(50, 2.4)).abs() < 1e-12);
        assert!(poly_tail_real(10.0, 0.9).is_infinite());
    }

    #[test]
    fn poly_tail_matches_brute_force() {
        let brute: f64 = (101..200_000u64).map(|n| (n as f64).powf(-1.7)).sum();
        let tail = poly_tail(100, 1.7) - poly_tail(199_999, 1.7);
        assert!((brute - tail).abs() < 1e-9, "brute {brute} vs tail {tail}");
    }

    #[test]
    fn golden_finds_asymmetric_minimum() {
        let (x, fx) = golden_min(0.0, 3.0, 1e-10, |x| (x - 1.3) * (x - 1.3) + 0.25 * x);
        // vertex of x² - 2.6x + 0.25x + const is at 2.35/2
        assert!((x - 1.175).abs() < 1e-8, "x = {x}");
        assert!((fx - ((1.175f64 - 1.3).powi(2) + 0.25 * 1.175)).abs() < 1e-12);
    }

    #[test]
    fn gradient_exact_on_parabola() {
        let x = [0.0, 0.3, 0.7, 1.2];
        let y: Vec<f64> = x.iter().map(|&t| 2.0 * t * t - t + 1.0).collect();
        let g = grad_nonuniform(&x, &y);
        // interior points are exact for a quadratic
        assert!((g[1] - (4.0 * 0.3 - 1.0)).abs() < 1e-12);
        assert!((g[2] - (4.0 * 0.7 - 1.0)).abs() < 1e-12);
    }
}
