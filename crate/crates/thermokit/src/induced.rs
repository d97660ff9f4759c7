//! First-return analysis over the uniformly expanding core.
//!
//! For the parabolic families the pressure loses its spectral gap as `t`
//! approaches the flat region, and direct cylinder sums converge only
//! polynomially.  The cure is classical: induce on the base `B = [1/2, 1)`,
//! away from the neutral fixed point.  A point of `B` enters some branch
//! `n ≥ 2`, falls into the escape set `E_{j-1}` of the parabolic branch, and
//! crawls back up in `j - 1` steps, so the first-return map `F = T^j` has
//! full branches on the cells `I_{n,j} = φ_n(E_{j-1})` with return time `j`.
//! `F` is uniformly expanding, and the pressure of the original map is read
//! off the two-variable sums
//!
//! `Z(t, q) = Σ_{n,j} |F'|_{I_{n,j}}^{-t} · e^{-q j}`:
//!
//! the unique root `q*` of the induced pressure `p(t, q) = 0` equals `P(t)`
//! when positive, and `p(t, 0) ≤ 0` certifies the flat regime `P(t) = 0`.
//!
//! Implementation notes.  Cells are kept exactly for a core block of `(n, j)`
//! and closed analytically beyond it: the `n`-axis tails are Hurwitz-type
//! sums (`|F'|` factorises through `(n + z)²`-style branch derivatives), and
//! the `j`-axis tails ride the parabolic ladder, whose row weights decay like
//! `j^{-(1+1/β)t}`.  Depth-1 sums with endpoint derivative bounds give a
//! rigorous-but-wide bracket.  The reported value of `p(t, q)` comes from a
//! Chebyshev collocation of the induced transfer operator: `F` is full-branch
//! with an analytic eigenfunction, so a small node set plus the same analytic
//! tail closures pins the leading eigenvalue to far better than the depth
//! truncations could.  At `(t, q) = (1, 0)` the weights are exactly the cell
//! lengths and the true value is 0, which makes a sharp self-test.

use serde::Serialize;

use crate::error::Error;
use crate::maps::{MapFamily, MapModel};
use crate::numeric::{poly_tail_real, Kahan};
use crate::Result;

/// Explicit rows kept beyond the core when closing the `j`-axis sums.
const TAIL_ROWS: usize = 256;

/// Collocation grid: node count, explicit branches per row, explicit rows.
const COLLOC_K: usize = 16;
const COLLOC_N: u32 = 96;
const COLLOC_J: usize = 256;

/// One first-return cell `I_{n,j}`: enter branch `n`, return after `j` steps.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Cell {
    pub n: u32,
    pub j: u32,
    /// Cell interval inside the base.
    pub lo: f64,
    pub hi: f64,
    /// `log |F'|` at the two base-endpoint pullbacks; the `y = 1` slot
    /// dominates for these families (ladder and branch factors both grow).
    pub ld05: f64,
    pub ld10: f64,
}

impl Cell {
    pub fn ld_mid(&self) -> f64 {
        0.5 * (self.ld05 + self.ld10)
    }

    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Two-variable pressure at one `(t, q)`: a practical bracket from endpoint
/// derivative bounds plus the telescoped midpoint estimate.
#[derive(Clone, Copy, Debug)]
pub struct TwoVar {
    pub lower: f64,
    pub upper: f64,
    pub estimate: f64,
}

/// Result of solving `p(t, q) = 0` in `q`.
#[derive(Clone, Copy, Debug)]
pub struct QStar {
    /// The root when positive; 0 in the flat regime.
    pub value: f64,
    /// True when `p(t, 0) ≤ 0`, i.e. the original pressure is 0.
    pub flat: bool,
    /// The induced pressure at `q = 0` (sign decides flatness).
    pub p_at_zero: f64,
}

/// First-return scheme for a parabolic model, with precomputed cells, ladder
/// prefixes, and the collocation grid for the induced transfer operator.
pub struct InducedScheme {
    model: MapModel,
    n_core: u32,
    j_core: u32,
    cells: Vec<Cell>,
    /// Escape ladder `u_0 = 1/2, u_{m} = φ_1(u_{m-1})`, so
    /// `E_m = [u_m, u_{m-1})`; `u[-1]` is represented by 1.
    ladder: Vec<f64>,
    /// `prefix[m] = Σ_{k=0}^{m} log T'(u_k)` along the ladder.
    prefix: Vec<f64>,
    /// Row polynomial exponent: weights decay like `j^{-kappa t}`.
    kappa: f64,
    /// Chebyshev nodes on the base and their barycentric weights.
    nodes: Vec<f64>,
    bary: Vec<f64>,
    /// Per node: the φ_1-orbit `v_0 = y, v_m = φ_1(v_{m-1})` (row `j` uses
    /// `v_{j-1}`) and the cumulative ladder log-derivatives
    /// `S_m = Σ_{k=1}^{m} log T'(v_k)`, flattened `[node][m]`.
    orbit_pt: Vec<f64>,
    orbit_ld: Vec<f64>,
    /// Cached branch handles `n = 2 ..= COLLOC_N` for the explicit part.
    colloc_branches: Vec<crate::maps::Branch>,
}

impl InducedScheme {
    /// Build the scheme.  Only the parabolic families with polynomially
    /// growing full branches qualify (`renyi`, `infinite_mp`).
    pub fn new(model: &MapModel) -> Result<InducedScheme> {
        let (beta, n_core, j_core) = match model.family {
            MapFamily::Renyi => (1.0, 32, 32),
            MapFamily::InfiniteMp { beta } => (beta, 24, 24),
            MapFamily::Pathological { .. } => {
                return Err(Error::WrongRegime(
                    "induced scheme needs a fully covered base; the irregular family leaves a gap"
                        .into(),
                ))
            }
            _ => {
                return Err(Error::WrongRegime(format!(
                    "induced scheme needs a parabolic fixed point; {} has none",
                    model.family.name()
                )))
            }
        };
        if model.branch_count().is_some() {
            return Err(Error::WrongRegime(
                "induced scheme needs the full (untruncated) branch family".into(),
            ));
        }
        Self::with_core(model, beta, n_core, j_core)
    }

    fn with_core(model: &MapModel, beta: f64, n_core: u32, j_core: u32) -> Result<InducedScheme> {
        let b1 = model.branch(1);
        let ladder_len = j_core as usize + TAIL_ROWS + 2;
        let mut ladder = Vec::with_capacity(ladder_len);
        let mut prefix = Vec::with_capacity(ladder_len);
        let mut u = 0.5;
        let mut acc = 0.0;
        for _ in 0..ladder_len {
            ladder.push(u);
            acc += b1.deriv_abs(u).ln();
            prefix.push(acc);
            u = b1.inverse(u);
        }

        let mut nodes = Vec::with_capacity(COLLOC_K);
        let mut bary = Vec::with_capacity(COLLOC_K);
        for k in 0..COLLOC_K {
            let theta = std::f64::consts::PI * (k as f64 + 0.5) / COLLOC_K as f64;
            nodes.push(0.75 + 0.25 * theta.cos());
            bary.push(if k % 2 == 0 { theta.sin() } else { -theta.sin() });
        }
        let mut orbit_pt = Vec::with_capacity(COLLOC_K * COLLOC_J);
        let mut orbit_ld = Vec::with_capacity(COLLOC_K * COLLOC_J);
        for &y in &nodes {
            let mut v = y;
            let mut s = 0.0;
            for _ in 0..COLLOC_J {
                orbit_pt.push(v);
                orbit_ld.push(s);
                v = b1.inverse(v);
                s += b1.deriv_abs(v).ln();
            }
        }
        let colloc_branches = (2..=COLLOC_N).map(|n| model.branch(n as u64)).collect();

        let mut scheme = InducedScheme {
            model: model.clone(),
            n_core,
            j_core,
            cells: Vec::new(),
            ladder,
            prefix,
            kappa: 1.0 + 1.0 / beta,
            nodes,
            bary,
            orbit_pt,
            orbit_ld,
            colloc_branches,
        };

        // Cells, ordered (n, j) lexicographically.
        for n in 2..=(n_core + 1) {
            let b = model.branch(n as u64);
            for j in 1..=j_core {
                let (z05, z10) = scheme.row_z(j);
                let x05 = b.inverse(z05);
                let x10 = b.inverse(z10);
                let ld05 = scheme.row_ladder_ld(j, false) + b.deriv_abs(x05).ln();
                let ld10 = scheme.row_ladder_ld(j, true) + b.deriv_abs(x10).ln();
                let (lo, hi) = if x05 <= x10 { (x05, x10) } else { (x10, x05) };
                debug_assert!(ld10 >= ld05 - 1e-12);
                scheme.cells.push(Cell { n, j, lo, hi, ld05, ld10 });
            }
        }

        Ok(scheme)
    }

    /// Escape-set endpoints `z` that a base endpoint pulls back to before
    /// entering branch `n`: row `j` uses `E_{j-1} = [u_{j-1}, u_{j-2})`.
    fn row_z(&self, j: u32) -> (f64, f64) {
        let j = j as usize;
        let z05 = self.ladder[j - 1];
        let z10 = if j >= 2 { self.ladder[j - 2] } else { 1.0 };
        (z05, z10)
    }

    /// Ladder part of `log |F'|` for row `j` at the two base endpoints.
    fn row_ladder_ld(&self, j: u32, upper_slot: bool) -> f64 {
        let j = j as usize;
        if upper_slot {
            // factors at u_0 … u_{j-2}
            if j >= 2 {
                self.prefix[j - 2]
            } else {
                0.0
            }
        } else {
            // factors at u_1 … u_{j-1}
            if j >= 2 {
                self.prefix[j - 1] - self.prefix[0]
            } else {
                0.0
            }
        }
    }

    /// `log` of the entering-branch derivative factor at escape point `z`,
    /// plus closed tail sums over `n` beyond the core.
    fn n_factor_ld(&self, n: u32, z: f64) -> f64 {
        let b = self.model.branch(n as u64);
        b.deriv_abs(b.inverse(z)).ln()
    }

    /// `Σ_{n > n_hi} (branch factor at z)^{-t}` in closed form.
    fn n_tail(&self, z: f64, t: f64) -> f64 {
        let n_hi = (self.n_core + 1) as f64;
        match self.model.family {
            // branch factor is exactly (n + z)²
            MapFamily::Renyi => poly_tail_real(n_hi + z, 2.0 * t),
            // branch factor n(n+1) = (n+1/2)² - 1/4; the 1/4 shifts the tail
            // by O(t/n²) relative, negligible at the core sizes used here
            MapFamily::InfiniteMp { .. } => poly_tail_real(n_hi + 0.5, 2.0 * t),
            _ => unreachable!("scheme only built for parabolic families"),
        }
    }

    /// Lagrange basis values at `p` for the collocation nodes (barycentric).
    fn basis_at(&self, p: f64, out: &mut [f64]) {
        let mut denom = 0.0;
        for (i, (&x, &w)) in self.nodes.iter().zip(&self.bary).enumerate() {
            let d = p - x;
            if d.abs() < 1e-14 {
                out.fill(0.0);
                out[i] = 1.0;
                return;
            }
            out[i] = w / d;
            denom += out[i];
        }
        for v in out.iter_mut() {
            *v /= denom;
        }
    }

    /// Induced pressure `p(t, q) = log λ_max` of the collocated transfer
    /// operator `(L h)(y) = Σ_{n,j} |φ'_{n,j}(y)|^t e^{-q j} h(φ_{n,j}(y))`.
    ///
    /// Per node the row `j` reuses the cached φ_1-orbit point `v_{j-1}` and
    /// ladder sum; branches beyond `COLLOC_N` collapse to a Hurwitz lump
    /// placed at its mass centroid (first moment matched, so the linear part
    /// of `h` is integrated exactly); rows beyond `COLLOC_J` reuse the last
    /// row's image pattern scaled by the geometric/power-law row remainder.
    fn collocation_pressure(&self, t: f64, q: f64) -> f64 {
        if q < -1e-12 {
            return f64::INFINITY;
        }
        let k = COLLOC_K;
        let mut a = vec![0.0f64; k * k];
        let mut basis = vec![0.0f64; k];
        let mut rowbuf = vec![0.0f64; k];
        for ki in 0..k {
            let row = &mut a[ki * k..(ki + 1) * k];
            for j in 1..=COLLOC_J {
                let v = self.orbit_pt[ki * COLLOC_J + j - 1];
                let s = self.orbit_ld[ki * COLLOC_J + j - 1];
                let decay = (-q * j as f64).exp();
                if decay < 1e-320 {
                    break;
                }
                rowbuf.fill(0.0);
                for b in &self.colloc_branches {
                    let img = b.inverse(v);
                    let w = (-t * (s + b.deriv_abs(img).ln())).exp() * decay;
                    self.basis_at(img, &mut basis);
                    for (o, bv) in rowbuf.iter_mut().zip(&basis) {
                        *o += w * bv;
                    }
                }
                // branches beyond the explicit block: Hurwitz mass at the
                // moment-matched centroid (images cluster at the right end)
                let (m0, m1) = self.lump_moments(v, t);
                if !m0.is_finite() {
                    return f64::INFINITY;
                }
                if m0 > 0.0 {
                    let w = (-t * s).exp() * decay * m0;
                    self.basis_at(1.0 - m1 / m0, &mut basis);
                    for (o, bv) in rowbuf.iter_mut().zip(&basis) {
                        *o += w * bv;
                    }
                }
                // the final explicit row also stands in for everything past it
                let factor = if j == COLLOC_J {
                    let f = self.row_tail_factor(t, q);
                    if !f.is_finite() {
                        return f64::INFINITY;
                    }
                    1.0 + f
                } else {
                    1.0
                };
                for (o, rv) in row.iter_mut().zip(&rowbuf) {
                    *o += factor * rv;
                }
            }
        }
        dominant_log_eig(&a, k)
    }

    /// Zeroth and first `(1 - image)` moments of the branch weights beyond
    /// `COLLOC_N` at escape point `v`.
    fn lump_moments(&self, v: f64, t: f64) -> (f64, f64) {
        let n_hi = COLLOC_N as f64;
        match self.model.family {
            // factor (n + v)², image 1 - 1/(n + v)
            MapFamily::Renyi => (
                poly_tail_real(n_hi + v, 2.0 * t),
                poly_tail_real(n_hi + v, 2.0 * t + 1.0),
            ),
            // factor n(n+1) ≈ (n + 1/2)², image 1 - (n + 1 - v)/(n(n+1))
            MapFamily::InfiniteMp { .. } => (
                poly_tail_real(n_hi + 0.5, 2.0 * t),
                poly_tail_real(n_hi + 0.5, 2.0 * t + 1.0),
            ),
            _ => unreachable!("scheme only built for parabolic families"),
        }
    }

    /// Multiplier closing `Σ_{j > COLLOC_J}` rows off the last explicit row.
    fn row_tail_factor(&self, t: f64, q: f64) -> f64 {
        let geo = if q > 1e-12 {
            let r = (-q).exp();
            r / (1.0 - r)
        } else {
            f64::INFINITY
        };
        let s = self.kappa * t;
        let poly = if s > 1.0 + 1e-9 { COLLOC_J as f64 / (s - 1.0) } else { f64::INFINITY };
        geo.min(poly)
    }

    /// The cells of the scheme, ordered by `(n, j)`.
    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    /// Escape ladder `u_m` (the left endpoints of the sets `E_m`).
    pub fn ladder(&self) -> &[f64] {
        &self.ladder
    }

    /// Depth-1 sums at `(t, q)` with the `y`-slot fixed: `None` = midpoint,
    /// `Some(true)` = supremum slot (lower bound for p), `Some(false)` = inf.
    fn z1(&self, t: f64, q: f64, slot: Option<bool>) -> f64 {
        if q < -1e-12 {
            // polynomial return-time tails make every negative-q sum diverge
            return f64::INFINITY;
        }
        let mut acc = Kahan::new();
        for c in &self.cells {
            let ld = match slot {
                None => c.ld_mid(),
                Some(true) => c.ld10,
                Some(false) => c.ld05,
            };
            acc.add((-t * ld - q * f64::from(c.j)).exp());
        }
        // n-axis tails for the core rows
        for j in 1..=self.j_core {
            acc.add(self.row_n_tail(j, t, q, slot));
        }
        // j-axis tail rows (full n-sum per row), then a remainder bound
        let mut last = 0.0;
        for j in self.j_core + 1..=self.j_core + TAIL_ROWS as u32 {
            last = self.full_row(j, t, q, slot);
            acc.add(last);
        }
        if last > 0.0 {
            acc.add(self.row_remainder(last, t, q, slot));
        }
        acc.value()
    }

    /// `Σ_{n > core} w(n, j)` for one core row.  The midpoint variant takes
    /// the geometric mean of the two endpoint-slot terms, matching the
    /// log-midpoint weights used for the explicit cells.
    fn row_n_tail(&self, j: u32, t: f64, q: f64, slot: Option<bool>) -> f64 {
        let (z05, z10) = self.row_z(j);
        let term = |upper: bool| -> f64 {
            let z = if upper { z10 } else { z05 };
            let ld = self.row_ladder_ld(j, upper);
            (-t * ld - q * f64::from(j)).exp() * self.n_tail(z, t)
        };
        match slot {
            None => (term(false) * term(true)).sqrt(),
            Some(s) => term(s),
        }
    }

    /// Whole-row mass (all n) for a tail row `j > j_core`.
    fn full_row(&self, j: u32, t: f64, q: f64, slot: Option<bool>) -> f64 {
        let (z05, z10) = self.row_z(j);
        let term = |upper: bool| -> f64 {
            let z = if upper { z10 } else { z05 };
            let ld = self.row_ladder_ld(j, upper);
            let mut n_sum = Kahan::new();
            for n in 2..=(self.n_core + 1) {
                n_sum.add((-t * self.n_factor_ld(n, z)).exp());
            }
            n_sum.add(self.n_tail(z, t));
            (-t * ld - q * f64::from(j)).exp() * n_sum.value()
        };
        match slot {
            None => (term(false) * term(true)).sqrt(),
            Some(s) => term(s),
        }
    }

    /// Estimate for the rows beyond the explicit tail block.  Row weights
    /// decay like `j^{-kappa t} e^{-q j}`; take the smaller of the geometric
    /// bound and the power-law integral `∫_{j_last}^∞`, which at `q = 0` is
    /// accurate rather than merely safe.  A lower-slot call returns 0 (a
    /// valid lower bound simply omits the positive remainder).
    fn row_remainder(&self, last: f64, t: f64, q: f64, slot: Option<bool>) -> f64 {
        if let Some(true) = slot {
            return 0.0;
        }
        let j_last = (self.j_core as usize + TAIL_ROWS) as f64;
        let geo = if q > 1e-12 {
            let r = (-q).exp();
            last * r / (1.0 - r)
        } else {
            f64::INFINITY
        };
        let s = self.kappa * t;
        let poly = if s > 1.0 + 1e-9 {
            last * j_last / (s - 1.0)
        } else {
            f64::INFINITY
        };
        geo.min(poly)
    }

    /// Two-variable pressure `p(t, q)`: rigorous-in-spirit depth-1 bracket
    /// (exact endpoint bounds on the core, analytic tails) and the collocated
    /// eigenvalue as the point estimate.
    pub fn two_var_pressure(&self, t: f64, q: f64) -> TwoVar {
        let z_lower = self.z1(t, q, Some(true));
        let z_upper = self.z1(t, q, Some(false));
        if !z_upper.is_finite() {
            return TwoVar { lower: f64::INFINITY, upper: f64::INFINITY, estimate: f64::INFINITY };
        }
        let est = self.collocation_pressure(t, q);
        TwoVar { lower: z_lower.ln(), upper: z_upper.ln(), estimate: est }
    }

    /// Solve `p(t, ·) = 0`.  The induced pressure is strictly decreasing in
    /// `q` (every cell weight carries `e^{-q j}` with `j ≥ 1`), so a sign
    /// change brackets the root; when `p(t, 0) ≤ 0` the flat regime is
    /// certified instead and the value is 0.  Secant steps inside a
    /// maintained bracket (regula falsi with the Illinois trim) keep the
    /// eigenvalue solves to a dozen or so per root.
    pub fn q_star(&self, t: f64) -> Result<QStar> {
        let p0 = self.collocation_pressure(t, 0.0);
        if !p0.is_finite() {
            return Err(Error::WrongRegime(format!(
                "induced sums diverge at t = {t}; the branch series needs t > 1/2"
            )));
        }
        if p0 <= 0.0 {
            return Ok(QStar { value: 0.0, flat: true, p_at_zero: p0 });
        }
        let mut hi = 0.1;
        let mut p_hi = self.collocation_pressure(t, hi);
        while p_hi > 0.0 {
            hi *= 2.0;
            if hi > 64.0 {
                return Err(Error::RootNotBracketed { what: format!("q* at t = {t}"), lo: 0.0, hi });
            }
            p_hi = self.collocation_pressure(t, hi);
        }
        let (mut lo, mut p_lo) = (0.0, p0);
        let mut last_side = 0i8;
        for _ in 0..48 {
            let mid = (lo * p_hi - hi * p_lo) / (p_hi - p_lo);
            let p_mid = self.collocation_pressure(t, mid);
            if p_mid > 0.0 {
                lo = mid;
                p_lo = p_mid;
                if last_side == 1 {
                    p_hi *= 0.5;
                }
                last_side = 1;
            } else {
                hi = mid;
                p_hi = p_mid;
                if last_side == -1 {
                    p_lo *= 0.5;
                }
                last_side = -1;
            }
            if hi - lo < 1e-11 || p_mid.abs() < 1e-13 {
                break;
            }
        }
        Ok(QStar { value: 0.5 * (lo + hi), flat: false, p_at_zero: p0 })
    }

    /// Practical bracket `[q_lo, q_hi]` for `q*` from the two depth-1
    /// endpoint-slot sums: the supremum slot underestimates every weight, so
    /// its root sits below `q*`; the infimum slot overestimates and lands
    /// above.  Either root collapses to 0 when its sum is already ≤ 1 at
    /// `q = 0`.
    pub fn q_star_bounds(&self, t: f64) -> (f64, f64) {
        let root = |slot: bool| -> f64 {
            let at = |q: f64| self.z1(t, q, Some(slot)).ln();
            let p0 = at(0.0);
            if p0 <= 0.0 {
                return 0.0;
            }
            if !p0.is_finite() {
                return f64::INFINITY;
            }
            let mut hi = 0.1;
            while at(hi) > 0.0 {
                hi *= 2.0;
                if hi > 64.0 {
                    return f64::INFINITY;
                }
            }
            crate::numeric::bisect(0.0, hi, 1e-10, at).unwrap_or(hi)
        };
        (root(true), root(false))
    }

    /// Convergence check of the induced sums at `q = 0` — the criterion for
    /// the flat regime of the original pressure.
    pub fn finiteness_check(&self, t: f64) -> Finiteness {
        let p = self.two_var_pressure(t, 0.0);
        let verdict = if p.upper < 0.0 {
            Verdict::Contracting
        } else if p.lower > 0.0 {
            Verdict::Expanding
        } else {
            Verdict::Marginal
        };
        Finiteness { verdict, p_at_zero: p }
    }

    /// Fraction of the base measured by the cells plus tail estimates.
    /// Exactly 1 in the limit (the cells tile `B`); the deviation measures
    /// the quality of the analytic tail closure.
    pub fn length_coverage(&self) -> f64 {
        let mut acc = Kahan::new();
        for c in &self.cells {
            acc.add(c.length());
        }
        let core: f64 = acc.value();
        // Tail weights at (t, q) = (1, 0) are |F'(mid)|^{-1} ≈ |I| / |B|, so
        // they estimate the missing length as a fraction of the base.
        let mut tail = 0.0;
        for j in 1..=self.j_core {
            tail += self.row_n_tail(j, 1.0, 0.0, None);
        }
        let mut last = 0.0;
        for j in self.j_core + 1..=self.j_core + TAIL_ROWS as u32 {
            last = self.full_row(j, 1.0, 0.0, None);
            tail += last;
        }
        tail += self.row_remainder(last, 1.0, 0.0, None);
        core / 0.5 + tail
    }

    /// Pressure of the original map through the induced system:
    /// `P(t) = max(q*, 0)`.
    pub fn pressure_at(&self, t: f64) -> Result<InducedPressure> {
        let qs = self.q_star(t)?;
        Ok(InducedPressure { value: qs.value, flat: qs.flat, q_star: qs })
    }
}

/// Verdict of [`InducedScheme::finiteness_check`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    /// Sums < 1: original pressure is 0 (flat regime).
    Contracting,
    /// Sums > 1: positive pressure, solve for q*.
    Expanding,
    /// Bracket straddles 1.
    Marginal,
}

#[derive(Clone, Copy, Debug)]
pub struct Finiteness {
    pub verdict: Verdict,
    pub p_at_zero: TwoVar,
}

#[derive(Clone, Copy, Debug)]
pub struct InducedPressure {
    pub value: f64,
    pub flat: bool,
    pub q_star: QStar,
}

/// One-shot convenience: build the scheme and evaluate `P(t)`.
pub fn pressure_via_inducing(model: &MapModel, t: f64) -> Result<InducedPressure> {
    InducedScheme::new(model)?.pressure_at(t)
}

/// `log` of the dominant eigenvalue of a small row-major matrix by power
/// iteration.  The collocated transfer operator is strictly positive up to
/// interpolation wiggle, so the iteration settles in a few dozen steps.
fn dominant_log_eig(a: &[f64], k: usize) -> f64 {
    let mut v = vec![1.0f64; k];
    let mut w = vec![0.0f64; k];
    let mut lambda = 0.0;
    for it in 0..96 {
        for (i, wi) in w.iter_mut().enumerate() {
            let mut s = 0.0;
            for (j, vj) in v.iter().enumerate() {
                s += a[i * k + j] * vj;
            }
            *wi = s;
        }
        let norm: f64 = w.iter().map(|x| x.abs()).sum();
        if norm == 0.0 || !norm.is_finite() {
            return if norm == 0.0 { f64::NEG_INFINITY } else { f64::INFINITY };
        }
        let prev = lambda;
        lambda = norm / v.iter().map(|x| x.abs()).sum::<f64>();
        for (vi, wi) in v.iter_mut().zip(&w) {
            *vi = wi / norm;
        }
        if it > 8 && (lambda - prev).abs() < 1e-14 * lambda.abs() {
            break;
        }
    }
    lambda.ln()
}
