//! Topological pressure `P(t)` of the geometric potential `-t log |T'|`.
//!
//! The workhorse is the depth-`d` cylinder sum: with `W_d` the admissible
//! words and `deriv_inf/sup` the exact endpoint derivative bounds per word,
//!
//! `(1/d) log Σ_{w ∈ W_d} deriv_sup(w)^{-t}  ≤  P(t)  ≤  (1/d) log Σ deriv_inf(w)^{-t}`
//!
//! for `t ≥ 0`, with both sides closing in on `P` as the depth grows (the
//! bracket width is controlled by the total distortion of depth-`d` words).
//! The reported point value telescopes consecutive mid-weight levels,
//! `L_d - L_{d-1}`, and accelerates the last three increments with one
//! Aitken Δ² step — the increments converge geometrically wherever the
//! pressure is analytic, so the extrapolation buys one to two digits.
//!
//! Countable families are handled by truncation to the first `N` branches
//! plus a tail correction: subsystem estimates satisfy
//! `exp(est_N) ≈ A - B τ_N(t)` with `τ_N(t) = Σ_{n > N} n^{-γ t}` for the
//! derivative-growth exponent `γ` (a partial sum is the full sum minus its
//! tail), so fitting the ladder in the exponentiated domain and reading off
//! `τ = 0` recovers the full-family value.  The ladder runs at one uniform
//! depth — mixing depths would fold depth bias into the tail fit.
//!
//! Near the series boundary `t ≈ t_c` the weights decay too slowly for deep
//! words to matter; wide-and-shallow sums (thousands of branches, depth 2)
//! feed the same extrapolation instead.  The parabolic families hand their
//! whole finite-pressure window to the induced first-return scheme — depth
//! convergence of raw cylinder sums degrades to polynomial near a neutral
//! fixed point — and the irregular packed family follows its own series
//! rule: its branch series has critical exponent 1, so the pressure jumps
//! from `+∞` straight to the flat floor with no analytic window in between.

use serde::Serialize;

use crate::error::Error;
use crate::induced::InducedScheme;
use crate::maps::{patho_slope, Branch, MapFamily, MapModel};
use crate::numeric::{aitken_last, bisect, linear_fit, poly_tail, LogSum};
use crate::Result;

/// Default node budget for one cylinder enumeration (all levels combined).
pub const DEFAULT_BUDGET: u64 = 40_000_000;

/// Truncation ladder for the mid-range schedule: small truncations at one
/// uniform large depth beat large-`N` shallow trees — the depth residual of
/// the telescoped estimate shrinks by an order of magnitude per level, while
/// the branch tail is exactly what the `τ` fit removes.
const DEEP_TRUNCATIONS: [u64; 4] = [12, 16, 20, 25];
/// Wide-and-shallow ladder used near the series boundary.
const WIDE_TRUNCATIONS: [u64; 3] = [500, 1000, 2000];
/// Band above `t_c` treated as boundary/wide-shallow territory.
const STAR_BAND: f64 = 0.11;
/// Classification slack around transition points.
const EDGE_BAND: f64 = 0.02;
/// Largest tail sum for which the three-point quadratic read-off is used;
/// beyond it the quadratic chases curvature it cannot resolve and the plain
/// linear fit is safer.
const QUAD_TAU_MAX: f64 = 0.2;
/// Explicit terms of the irregular family's branch series.
const SERIES_PARTIAL: u64 = 1 << 20;
/// Pressure level treated as zero when locating the dimension root.
const DIM_ETA: f64 = 1e-4;
/// One-sided derivative gap above which the pressure is declared
/// non-differentiable at the dimension.
const ALPHA_GAP: f64 = 0.1;

/// Where `t` sits relative to the transitions of the pressure function.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Band {
    /// Below the critical exponent of the branch series: `P = +∞`.
    Infinite,
    /// Within numerical slack of the series boundary.
    Boundary,
    /// Finite, strictly convex, real-analytic stretch.
    Analytic,
    /// Flat region `P = 0` forced by the neutral fixed point.
    Flat,
    /// The packed family's transition: `+∞` drops straight to the flat
    /// floor, with no analytic window in between.
    DegenerateJump,
}

/// Classification of one parameter value, with the transition data used.
#[derive(Clone, Debug, Serialize)]
pub struct BandReport {
    pub t: f64,
    pub band: Band,
    /// Critical exponent of the branch derivative series, when one exists.
    pub critical_t: Option<f64>,
    /// Left edge of the flat region, when the family has one.
    pub flat_onset: Option<f64>,
    pub note: String,
}

/// Family-level shape of the pressure function.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RegimeTag {
    /// No neutral fixed point: analytic through the dimension root.
    GaussLike,
    /// Neutral point, pressure differentiable at the dimension.
    RenyiLike,
    /// Neutral point, kink at the dimension (left slope stays away from 0).
    InfiniteMpLike,
    /// Branch series with critical exponent at the dimension: pressure
    /// jumps from `+∞` to the flat floor.
    Degenerate,
}

/// Model-level classification: transition points plus differentiability of
/// the pressure at the dimension root.
#[derive(Clone, Debug, Serialize)]
pub struct RegimeReport {
    /// Critical exponent below which the pressure is `+∞` (0 for finite
    /// families — their series never diverges).
    pub t_star: f64,
    /// Smallest root of `P(t) = 0`.
    pub dim_estimate: f64,
    pub regime: RegimeTag,
    pub differentiable_at_dim: bool,
    /// How far the measured one-sided derivative gap sits from the decision
    /// threshold, clamped to [0, 1]; 1 means unambiguous.
    pub confidence: f64,
    /// Extrapolated left slope `-P'(dim⁻)` for parabolic families.
    pub alpha_star: Option<f64>,
}

/// How a pressure value was produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Direct cylinder sums on a finite branch family.
    Cylinder,
    /// Truncation ladder extrapolated in the tail sum `τ_N`.
    Extrapolated,
    /// Wide-and-shallow ladder near the series boundary.
    WideShallow,
    /// First-return scheme root `q*`.
    Induced,
    /// Branch-series rule of the degenerate family.
    Series,
    /// Flat region: exact 0.
    FlatRule,
    /// Divergent series (or boundary slack): `+∞` sentinel.
    InfiniteRule,
}

/// One computed pressure value with a practical bracket.
///
/// `lower` is a genuine lower bound wherever cylinder sums are involved
/// (subsystem sums only undercount for `t ≥ 0`); `upper` adds the fitted
/// tail correction to the deepest upper sum and is honest-but-heuristic.
/// `n` and `depth` record the largest truncation and the uniform depth the
/// value was computed from, when a cylinder engine was involved.
#[derive(Clone, Debug, Serialize)]
pub struct PressureValue {
    pub t: f64,
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    pub method: Method,
    pub band: Band,
    pub n: Option<u64>,
    pub depth: Option<u32>,
}

/// Normalized cylinder log-sums of one level: `(1/d) log Σ (...)^{-t}`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct LevelSums {
    pub depth: u32,
    pub lower: f64,
    pub upper: f64,
    pub mid: f64,
}

/// Depth-resolved cylinder pressure of a finite branch family.
#[derive(Clone, Debug, Serialize)]
pub struct CylinderPressure {
    pub n_branches: u64,
    pub depth: u32,
    pub levels: Vec<LevelSums>,
    /// Bounds from the deepest level.
    pub lower: f64,
    pub upper: f64,
    /// Telescoped and Δ²-accelerated point estimate.
    pub estimate: f64,
    /// Whether the final bracket closed below the requested tolerance;
    /// `false` is the warning flag for distortion-limited families.
    pub tight: bool,
}

impl CylinderPressure {
    pub fn bracket_width(&self) -> f64 {
        self.upper - self.lower
    }
}

/// Tunables for the pressure engines.
#[derive(Clone, Debug)]
pub struct PressureOptions {
    /// Total enumerated-word budget per cylinder run.
    pub budget: u64,
    /// Hard cap on cylinder depth.
    pub depth_cap: u32,
    /// Truncation ladder for the mid-range schedule.
    pub deep_truncations: Vec<u64>,
    /// Ladder for the near-boundary schedule.
    pub wide_truncations: Vec<u64>,
    /// Bracket width under which a cylinder run is reported as tight.
    pub bracket_tol: f64,
}

impl Default for PressureOptions {
    fn default() -> Self {
        PressureOptions {
            budget: DEFAULT_BUDGET,
            depth_cap: 6,
            deep_truncations: DEEP_TRUNCATIONS.to_vec(),
            wide_truncations: WIDE_TRUNCATIONS.to_vec(),
            bracket_tol: 1e-6,
        }
    }
}

/// Per-level log-sum accumulators for the word walk.
struct LevelAcc {
    lower: LogSum,
    upper: LogSum,
    mid: LogSum,
}

fn fresh_levels(depth: u32) -> Vec<LevelAcc> {
    (0..depth)
        .map(|_| LevelAcc { lower: LogSum::new(), upper: LogSum::new(), mid: LogSum::new() })
        .collect()
}

/// Record the word whose endpoint pullbacks and accumulated log-derivatives
/// are given, then extend it on the left through every branch.  Extending `w`
/// to `b·w` maps the stored endpoints through one more inverse branch, so
/// each node costs O(1) regardless of depth.  `|φ_w'|` is monotone on the
/// cylinder for every family here (Möbius words outright; otherwise all
/// branches increase and each factor decreases), so the two endpoint
/// log-derivatives bound the word exactly.
fn descend(branches: &[Branch], t: f64, x0: f64, x1: f64, ld0: f64, ld1: f64, level: usize, depth: usize, sums: &mut [LevelAcc]) {
    // Weighting by the two endpoints and keeping the smaller/larger of the
    // signed products handles every sign of t: for t < 0 the roles of the
    // sup- and inf-derivative simply swap.
    let (wa, wb) = (-t * ld0, -t * ld1);
    let acc = &mut sums[level];
    acc.lower.add_log(wa.min(wb));
    acc.upper.add_log(wa.max(wb));
    acc.mid.add_log(0.5 * (wa + wb));
    if level + 1 < depth {
        for b in branches {
            let nx0 = b.inverse(x0);
            let nx1 = b.inverse(x1);
            let nld0 = ld0 + b.deriv_abs(nx0).ln();
            let nld1 = ld1 + b.deriv_abs(nx1).ln();
            descend(branches, t, nx0, nx1, nld0, nld1, level + 1, depth, sums);
        }
    }
}

/// Total nodes of the full `count`-ary tree through `depth` levels.
fn tree_nodes(count: u64, depth: u32) -> u128 {
    let mut total: u128 = 0;
    let mut level: u128 = 1;
    for _ in 0..depth {
        level = level.saturating_mul(count as u128);
        total = total.saturating_add(level);
    }
    total
}

/// Deepest depth whose full tree fits the budget (at least 1, at most `cap`).
fn auto_depth(count: u64, budget: u64, cap: u32) -> u32 {
    let mut d = 1;
    while d < cap && tree_nodes(count, d + 1) <= budget as u128 {
        d += 1;
    }
    d
}

/// Depth-resolved cylinder pressure of a model with finitely many branches.
///
/// Deterministic: fixed lexicographic enumeration, compensated log-sums, and
/// worker partials merged in branch order regardless of pool size.
pub fn pressure_cylinder(model: &MapModel, t: f64, depth: u32, budget: u64) -> Result<CylinderPressure> {
    if !t.is_finite() {
        return Err(Error::config("pressure parameter must be finite"));
    }
    if depth == 0 {
        return Err(Error::config("cylinder depth must be at least 1"));
    }
    let count = model.branch_count().ok_or_else(|| {
        Error::config("cylinder pressure needs a finite branch family; truncate the model first")
    })?;
    let requested = tree_nodes(count, depth);
    if requested > budget as u128 {
        return Err(Error::BudgetExceeded { requested, budget: budget as u128 });
    }
    let branches: Vec<Branch> = (1..=count).map(|n| model.branch(n)).collect();
    let parts: Vec<Vec<LevelAcc>> = crate::parallel::install(|| {
        use rayon::prelude::*;
        branches
            .par_iter()
            .map(|b| {
                let mut part = fresh_levels(depth);
                let x0 = b.inverse(0.0);
                let x1 = b.inverse(1.0);
                let ld0 = b.deriv_abs(x0).ln();
                let ld1 = b.deriv_abs(x1).ln();
                descend(&branches, t, x0, x1, ld0, ld1, 0, depth as usize, &mut part);
                part
            })
            .collect()
    });
    let mut sums = fresh_levels(depth);
    for part in parts {
        for (acc, p) in sums.iter_mut().zip(part) {
            acc.lower.merge(p.lower);
            acc.upper.merge(p.upper);
            acc.mid.merge(p.mid);
        }
    }

    let mut levels = Vec::with_capacity(depth as usize);
    let mut mids = Vec::with_capacity(depth as usize);
    for (i, acc) in sums.iter().enumerate() {
        let d = (i + 1) as f64;
        levels.push(LevelSums {
            depth: i as u32 + 1,
            lower: acc.lower.log_value() / d,
            upper: acc.upper.log_value() / d,
            mid: acc.mid.log_value() / d,
        });
        mids.push(acc.mid.log_value());
    }
    // Telescope the mid-weight levels; the increments L_d - L_{d-1} converge
    // geometrically, so one Δ² step on the last three sharpens the tail.
    let mut incs = Vec::with_capacity(mids.len());
    for (i, &m) in mids.iter().enumerate() {
        incs.push(if i == 0 { m } else { m - mids[i - 1] });
    }
    let estimate = aitken_last(&incs).unwrap_or(*incs.last().unwrap());
    let last = levels.last().unwrap();
    Ok(CylinderPressure {
        n_branches: count,
        depth,
        lower: last.lower,
        upper: last.upper,
        estimate,
        tight: last.upper - last.lower < 1e-9,
        levels,
    })
}

/// Cylinder pressure of the first-`n` subsystem, at the deepest depth the
/// budget allows.
pub fn pressure_truncated(model: &MapModel, t: f64, n: u64, opts: &PressureOptions) -> Result<CylinderPressure> {
    let sub = if model.branch_count() == Some(n) { model.clone() } else { model.truncate(n)? };
    let depth = auto_depth(n, opts.budget, opts.depth_cap);
    let mut cyl = pressure_cylinder(&sub, t, depth, opts.budget)?;
    cyl.tight = cyl.bracket_width() < opts.bracket_tol;
    Ok(cyl)
}

/// Value at `x = 0` of the parabola through three `(x, y)` points.
fn quad_at_zero(x: &[f64], y: &[f64]) -> f64 {
    let l0 = y[0] * x[1] * x[2] / ((x[0] - x[1]) * (x[0] - x[2]));
    let l1 = y[1] * x[0] * x[2] / ((x[1] - x[0]) * (x[1] - x[2]));
    let l2 = y[2] * x[0] * x[1] / ((x[2] - x[0]) * (x[2] - x[1]));
    l0 + l1 + l2
}

/// Truncation-ladder pressure: subsystem estimates at one uniform depth,
/// fitted against the tail sums `τ_N(t)` in the exponentiated domain and
/// read off at `τ = 0`.
pub(crate) fn extrapolated(model: &MapModel, t: f64, truncations: &[u64], method: Method, band: Band, opts: &PressureOptions) -> Result<PressureValue> {
    let gamma = model
        .gamma_hint
        .ok_or_else(|| Error::config("truncation extrapolation needs a derivative-growth exponent"))?;
    let depth = truncations
        .iter()
        .map(|&n| auto_depth(n, opts.budget, opts.depth_cap))
        .min()
        .ok_or_else(|| Error::config("empty truncation ladder"))?;
    let mut taus = Vec::with_capacity(truncations.len());
    let mut exps = Vec::with_capacity(truncations.len());
    let mut lower = f64::NEG_INFINITY;
    let mut last: Option<CylinderPressure> = None;
    for &n in truncations {
        let sub = model.truncate(n)?;
        let cyl = pressure_cylinder(&sub, t, depth, opts.budget)?;
        let tau = poly_tail(n, gamma * t);
        if !tau.is_finite() {
            return Err(Error::WrongRegime(format!(
                "tail sums diverge at t = {t}; extrapolation needs γt > 1"
            )));
        }
        lower = lower.max(cyl.lower);
        taus.push(tau);
        exps.push(cyl.estimate.exp());
        last = Some(cyl);
    }
    let last = last.expect("non-empty truncation ladder");
    let (a_lin, b_lin, resid) = linear_fit(&taus, &exps);
    // Thin tails: the quadratic through the three smallest-τ points absorbs
    // the second-order tail curvature the linear fit leaves behind.  Fat
    // tails (τ of order 1): the read-off distance is too long for the
    // quadratic to be trustworthy — stay linear.
    let k = taus.len();
    let a = if k >= 3 && taus[0] <= QUAD_TAU_MAX {
        quad_at_zero(&taus[k - 3..], &exps[k - 3..])
    } else {
        a_lin
    };
    let (value, allowance) = if a > 0.0 {
        let model_spread = if a_lin > 0.0 { (a.ln() - a_lin.ln()).abs() } else { 0.0 };
        // The deepest subsystem misses tail mass ≈ B τ_min of the full
        // exponentiated value; in the log domain that gap is
        // log(A) - log(A - B τ_min), which the small-τ linearization would
        // understate badly near the boundary where the tail is a sizable
        // fraction of A.
        let missing = b_lin.abs() * taus.last().unwrap() + 2.0 * resid;
        let gap = if missing < a { (a / (a - missing)).ln() } else { f64::INFINITY };
        (a.ln(), gap + model_spread)
    } else {
        // Degenerate fit (badly noisy ladder): fall back to the log domain.
        let ests: Vec<f64> = exps.iter().map(|e| e.ln()).collect();
        let (a2, b2, r2) = linear_fit(&taus, &ests);
        (a2, b2.abs() * taus.last().unwrap() + 2.0 * r2)
    };
    Ok(PressureValue {
        t,
        value,
        lower,
        upper: last.upper + allowance,
        method,
        band,
        n: truncations.last().copied(),
        depth: Some(depth),
    })
}

/// Critical exponent of the branch derivative series, with the Raabe ratio
/// diagnostics at the root.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct CriticalT {
    pub value: f64,
    /// Raabe ratios at the two probe octaves, evaluated at the root.
    pub raabe: (f64, f64),
}

/// Raabe ratio `R(n) = n (1 - a_{n+1}/a_n)` for `a_n = deriv_sup(n)^{-t}`,
/// extrapolated to `n = ∞` linearly in `1/log(2n)` from two octaves.  The
/// series converges iff the limit exceeds 1, so the critical exponent is the
/// root of `R̂_∞(t) = 1` — and the `1/log` model absorbs exactly the slowly
/// varying correction that a log-squared derivative factor produces.
fn raabe_extrapolated(model: &MapModel, t: f64, n1: u64, n2: u64) -> (f64, f64, f64) {
    let r_at = |n: u64| -> f64 {
        let a = model.branch(n).deriv_sup().ln();
        let b = model.branch(n + 1).deriv_sup().ln();
        n as f64 * (1.0 - (-t * (b - a)).exp())
    };
    let (r1, r2) = (r_at(n1), r_at(n2));
    let l1 = 1.0 / (2.0 * n1 as f64).ln();
    let l2 = 1.0 / (2.0 * n2 as f64).ln();
    ((r1 * l2 - r2 * l1) / (l2 - l1), r1, r2)
}

/// Critical exponent `t_c` of `Σ_n deriv_sup(n)^{-t}` for countable families.
pub fn critical_t(model: &MapModel) -> Result<CriticalT> {
    if model.branch_count().is_some() {
        return Err(Error::WrongRegime(
            "a finite branch family has no series convergence boundary".into(),
        ));
    }
    let (n1, n2) = (2048, 4096);
    let root = bisect(0.05, 8.0, 1e-9, |t| raabe_extrapolated(model, t, n1, n2).0 - 1.0)
        .ok_or_else(|| Error::RootNotBracketed { what: "critical exponent".into(), lo: 0.05, hi: 8.0 })?;
    let (_, r1, r2) = raabe_extrapolated(model, root, n1, n2);
    Ok(CriticalT { value: root, raabe: (r1, r2) })
}

/// Classify where `t` falls for this family.
pub fn band_at(model: &MapModel, t: f64) -> Result<BandReport> {
    if model.branch_count().is_some() {
        return Ok(BandReport {
            t,
            band: Band::Analytic,
            critical_t: None,
            flat_onset: None,
            note: "finite branch family: the pressure is finite and real-analytic for all t ≥ 0".into(),
        });
    }
    let tc = critical_t(model)?.value;
    let (band, flat_onset, note) = match model.family {
        MapFamily::Pathological { .. } => {
            if t < tc - EDGE_BAND {
                (Band::Infinite, Some(tc), "branch series diverges: P = +∞".to_string())
            } else if t <= tc + EDGE_BAND {
                (
                    Band::DegenerateJump,
                    Some(tc),
                    "series boundary and flat onset coincide: P drops from +∞ to 0".to_string(),
                )
            } else {
                (Band::Flat, Some(tc), "branch series sums below 1: P = 0".to_string())
            }
        }
        MapFamily::Renyi | MapFamily::InfiniteMp { .. } => {
            if t <= tc {
                (Band::Infinite, Some(1.0), "branch series diverges: P = +∞".to_string())
            } else if t <= tc + EDGE_BAND {
                (Band::Boundary, Some(1.0), format!("within {EDGE_BAND} of the series boundary"))
            } else if t < 1.0 {
                (Band::Analytic, Some(1.0), "between the series boundary and the flat onset".to_string())
            } else {
                (Band::Flat, Some(1.0), "neutral fixed point pins P to 0 for t ≥ 1".to_string())
            }
        }
        MapFamily::Gauss => {
            if t <= tc {
                (Band::Infinite, None, "branch series diverges: P = +∞".to_string())
            } else if t <= tc + EDGE_BAND {
                (Band::Boundary, None, format!("within {EDGE_BAND} of the series boundary"))
            } else {
                (Band::Analytic, None, "uniformly expanding: analytic for all t past the boundary".to_string())
            }
        }
        MapFamily::LinearCustom => unreachable!("finite family handled above"),
    };
    Ok(BandReport { t, band, critical_t: Some(tc), flat_onset, note })
}

/// Branch series of the packed family: partial sum over the affine branches
/// plus an integral tail, as `(partial, tail)`.  Diverges for `t < 1`.
fn degenerate_series(n_start: u64, t: f64) -> (f64, f64) {
    let mut partial = 0.0;
    for n in (n_start + 1)..=(n_start + SERIES_PARTIAL) {
        let term = patho_slope(n).powf(-t);
        partial += term;
        if term < 1e-18 * partial {
            break;
        }
    }
    let m = (2 * (n_start + SERIES_PARTIAL)) as f64;
    let tail = if t < 1.0 - 1e-12 {
        f64::INFINITY
    } else if t < 1.0 + 1e-12 {
        // ∫_M^∞ dx / (x (log x)²) = 1 / log M, and the slope-2x substitution
        // halves it.
        0.5 / m.ln()
    } else {
        // (1/2) ∫ e^{s(1-t)} s^{-2t} ds beyond s₀ = log M, midpoint blocks.
        let s0 = m.ln();
        let mut acc = 0.0;
        let mut s = s0;
        let h = (0.5 / (t - 1.0)).min(4.0);
        loop {
            let mid = s + 0.5 * h;
            let term = ((1.0 - t) * mid).exp() * mid.powf(-2.0 * t) * h;
            acc += term;
            s += h;
            if term < 1e-18 * acc || s > s0 + 4000.0 {
                break;
            }
        }
        0.5 * acc
    };
    (partial, tail)
}

/// Pressure by the degenerate family's series rule: `P = max(0, log B̂)`
/// with `B̂` the affine branch series — the neutral branch only supplies the
/// flat floor at 0.
fn series_rule(model: &MapModel, t: f64, band: Band) -> PressureValue {
    let n_start = match model.family {
        MapFamily::Pathological { n_start } => n_start,
        _ => unreachable!("series rule is specific to the packed family"),
    };
    let (partial, tail) = degenerate_series(n_start, t);
    let total = partial + tail;
    let value = if total.is_finite() { total.ln().max(0.0) } else { f64::INFINITY };
    PressureValue {
        t,
        value,
        lower: partial.ln().max(0.0),
        upper: if total.is_finite() { (partial + 2.0 * tail).ln().max(0.0) } else { f64::INFINITY },
        method: Method::Series,
        band,
        n: None,
        depth: None,
    }
}

/// Pressure through the induced first-return scheme.
fn induced_value(model: &MapModel, t: f64, band: Band) -> Result<PressureValue> {
    let scheme = InducedScheme::new(model)?;
    let ip = scheme.pressure_at(t)?;
    let (lo, hi) = scheme.q_star_bounds(t);
    Ok(PressureValue {
        t,
        value: ip.value,
        lower: lo,
        upper: hi,
        method: if ip.flat { Method::FlatRule } else { Method::Induced },
        band,
        n: None,
        depth: None,
    })
}

fn infinite_value(t: f64, band: Band) -> PressureValue {
    PressureValue {
        t,
        value: f64::INFINITY,
        lower: f64::INFINITY,
        upper: f64::INFINITY,
        method: Method::InfiniteRule,
        band,
        n: None,
        depth: None,
    }
}

/// Pressure at one parameter, dispatching on the band: finite families go
/// straight to cylinder sums; countable ones use the wide-shallow ladder
/// near the series boundary, the truncation ladder in the analytic
/// mid-range (parabolic families swap in the induced scheme there), and the
/// series rule for the degenerate family.  Inside the boundary slack the
/// honest answer is the `+∞` sentinel — no engine resolves the mass there.
pub fn pressure(model: &MapModel, t: f64, opts: &PressureOptions) -> Result<PressureValue> {
    if model.branch_count().is_none() && !(t >= 0.0) {
        // Countable-family weights n^{-γt} only sum for positive t; the
        // finite case is fine on the whole line.
        return Err(Error::config("countable-family pressure needs t ≥ 0"));
    }
    if let Some(count) = model.branch_count() {
        let depth = auto_depth(count, opts.budget, opts.depth_cap);
        let cyl = pressure_cylinder(model, t, depth, opts.budget)?;
        return Ok(PressureValue {
            t,
            value: cyl.estimate,
            lower: cyl.lower,
            upper: cyl.upper,
            method: Method::Cylinder,
            band: Band::Analytic,
            n: Some(count),
            depth: Some(depth),
        });
    }
    let rep = band_at(model, t)?;
    let tc = rep.critical_t.expect("countable families carry a critical exponent");
    match rep.band {
        Band::Infinite | Band::Boundary => Ok(infinite_value(t, rep.band)),
        Band::DegenerateJump => Ok(series_rule(model, t, rep.band)),
        Band::Flat => match model.family {
            MapFamily::Pathological { .. } => Ok(series_rule(model, t, rep.band)),
            _ => induced_value(model, t, rep.band),
        },
        Band::Analytic => {
            if t <= tc + STAR_BAND {
                extrapolated(model, t, &opts.wide_truncations, Method::WideShallow, rep.band, opts)
            } else if model.is_parabolic() {
                induced_value(model, t, rep.band)
            } else {
                extrapolated(model, t, &opts.deep_truncations, Method::Extrapolated, rep.band, opts)
            }
        }
    }
}

/// Smallest root of `P(t) = DIM_ETA` — numerically, the Bowen root.
fn dim_root(model: &MapModel, opts: &PressureOptions) -> Result<f64> {
    if model.branch_count().is_some() {
        // Finite family: P(0) = log(count) > 0 and P decreases without
        // bound, so expand until the sign flips.
        let at = |t: f64| pressure(model, t, opts).map(|p| p.value - DIM_ETA);
        let mut hi = 1.0;
        while at(hi)? > 0.0 {
            hi *= 2.0;
            if hi > 512.0 {
                return Err(Error::RootNotBracketed {
                    what: "dimension root".into(),
                    lo: 0.0,
                    hi,
                });
            }
        }
        return bisect(0.0, hi, 1e-4, |t| {
            pressure(model, t, opts).map(|p| p.value - DIM_ETA).unwrap_or(f64::NAN)
        })
        .ok_or_else(|| Error::RootNotBracketed { what: "dimension root".into(), lo: 0.0, hi });
    }
    let tc = critical_t(model)?.value;
    if matches!(model.family, MapFamily::Pathological { .. }) {
        // The jump point: +∞ on one side, 0 on the other.
        return Ok(tc);
    }
    let lo = tc + EDGE_BAND + 2e-3;
    let hi = 3.0;
    let f = |t: f64| pressure(model, t, opts).map(|p| p.value - DIM_ETA).unwrap_or(f64::NAN);
    let (flo, fhi) = (f(lo), f(hi));
    if !(flo > 0.0 && fhi < 0.0) {
        return Err(Error::RootNotBracketed { what: "dimension root".into(), lo, hi });
    }
    bisect(lo, hi, 1e-4, f)
        .ok_or_else(|| Error::RootNotBracketed { what: "dimension root".into(), lo, hi })
}

/// Extrapolated left slope `-P'(dim⁻)` for a parabolic family: the raw
/// ratios `q*(1-h)/h` close in on their limit only like `1/log(1/h)`, so a
/// two-parameter fit in that variable is read off at `h = 0`.
fn left_slope_at_dim(model: &MapModel) -> Result<f64> {
    let scheme = InducedScheme::new(model)?;
    let hs = [0.12, 0.07, 0.04];
    let mut xs = Vec::with_capacity(hs.len());
    let mut ys = Vec::with_capacity(hs.len());
    for &h in &hs {
        let q = scheme.q_star(1.0 - h)?;
        xs.push(1.0 / (1.0 / h).ln());
        ys.push(q.value / h);
    }
    let (a, _b, _r) = linear_fit(&xs, &ys);
    Ok(a.max(0.0))
}

/// Family-level classification: transition points and differentiability of
/// the pressure at its dimension root.
pub fn classify_regime(model: &MapModel, opts: &PressureOptions) -> Result<RegimeReport> {
    if model.branch_count().is_some() {
        return Ok(RegimeReport {
            t_star: 0.0,
            dim_estimate: dim_root(model, opts)?,
            regime: RegimeTag::GaussLike,
            differentiable_at_dim: true,
            confidence: 1.0,
            alpha_star: None,
        });
    }
    let tc = critical_t(model)?.value;
    if matches!(model.family, MapFamily::Pathological { .. }) {
        return Ok(RegimeReport {
            t_star: tc,
            dim_estimate: tc,
            regime: RegimeTag::Degenerate,
            differentiable_at_dim: false,
            confidence: 1.0,
            alpha_star: None,
        });
    }
    let dim = dim_root(model, opts)?;
    if !model.is_parabolic() {
        return Ok(RegimeReport {
            t_star: tc,
            dim_estimate: dim,
            regime: RegimeTag::GaussLike,
            differentiable_at_dim: true,
            confidence: 1.0,
            alpha_star: None,
        });
    }
    let alpha = left_slope_at_dim(model)?;
    let differentiable = alpha <= ALPHA_GAP;
    Ok(RegimeReport {
        t_star: tc,
        dim_estimate: dim,
        regime: if differentiable { RegimeTag::RenyiLike } else { RegimeTag::InfiniteMpLike },
        differentiable_at_dim: differentiable,
        confidence: ((alpha - ALPHA_GAP).abs() / ALPHA_GAP).min(1.0),
        alpha_star: Some(alpha),
    })
}

/// A pressure curve over a `t` grid.
#[derive(Clone, Debug, Serialize)]
pub struct PressureCurve {
    pub family: String,
    pub values: Vec<PressureValue>,
}

impl PressureCurve {
    /// Evaluate the curve pointwise; fails on the first bad parameter.
    pub fn compute(model: &MapModel, ts: &[f64], opts: &PressureOptions) -> Result<PressureCurve> {
        let mut values = Vec::with_capacity(ts.len());
        for &t in ts {
            values.push(pressure(model, t, opts)?);
        }
        Ok(PressureCurve { family: model.family.name().to_string(), values })
    }

    /// The grid.
    pub fn ts(&self) -> impl Iterator<Item = f64> + '_ {
        self.values.iter().map(|v| v.t)
    }

    /// Finite values only, as `(t, P)` pairs.
    pub fn finite_points(&self) -> Vec<(f64, f64)> {
        self.values
            .iter()
            .filter(|v| v.value.is_finite())
            .map(|v| (v.t, v.value))
            .collect()
    }
}

/// Slope of the curve at `t` by the closest usable finite differences:
/// centered when finite neighbors straddle `t`, one-sided at the edges of
/// the finite region.
pub fn pressure_derivative(curve: &PressureCurve, t: f64) -> Result<f64> {
    let pts = curve.finite_points();
    if pts.len() < 2 {
        return Err(Error::config("derivative needs at least two finite curve points"));
    }
    let left = pts
        .iter()
        .filter(|(x, _)| *x < t - 1e-12)
        .cloned()
        .max_by(|a, b| a.0.total_cmp(&b.0));
    let right = pts
        .iter()
        .filter(|(x, _)| *x > t + 1e-12)
        .cloned()
        .min_by(|a, b| a.0.total_cmp(&b.0));
    match (left, right) {
        (Some((x0, y0)), Some((x1, y1))) => Ok((y1 - y0) / (x1 - x0)),
        _ => {
            // One-sided: take the two nearest points on the populated side.
            let mut by_dist: Vec<(f64, f64)> = pts;
            by_dist.sort_by(|a, b| (a.0 - t).abs().total_cmp(&(b.0 - t).abs()));
            let (x0, y0) = by_dist[0];
            let (x1, y1) = by_dist[1];
            if (x0 - x1).abs() < 1e-12 {
                return Err(Error::config("degenerate grid for one-sided derivative"));
            }
            Ok((y1 - y0) / (x1 - x0))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn opts() -> PressureOptions {
        PressureOptions::default()
    }

    #[test]
    fn linear_two_branch_is_exact() {
        // Two slope-2 branches: P(t) = (1 - t) log 2, exactly, at any depth,
        // and distortion-free words make the bracket collapse.
        let m = MapModel::linear_custom(&[(0.0, 0.5, 2.0), (0.5, 1.0, 2.0)]).unwrap();
        for t in [-1.0, 0.0, 0.5, 1.0, 2.0] {
            let c = pressure_cylinder(&m, t, 3, 1_000_000).unwrap();
            let exact = (1.0 - t) * 2.0f64.ln();
            assert!((c.estimate - exact).abs() < 1e-12, "t={t}: {} vs {exact}", c.estimate);
            assert!((c.lower - exact).abs() < 1e-12);
            assert!((c.upper - exact).abs() < 1e-12);
            assert!(c.tight);
        }
    }

    #[test]
    fn budget_is_enforced() {
        let m = MapModel::gauss().truncate(10).unwrap();
        let err = pressure_cylinder(&m, 1.0, 6, 1000).unwrap_err();
        assert!(matches!(err, Error::BudgetExceeded { .. }), "{err:?}");
    }

    #[test]
    fn bounds_tighten_with_doubled_depth() {
        // Fekete along doublings: sup-sums undercount submultiplicatively and
        // inf-sums overcount supermultiplicatively, so depth 2d at least
        // matches depth d on both sides.
        let m = MapModel::gauss().truncate(10).unwrap();
        let c = pressure_cylinder(&m, 1.3, 4, 1_000_000).unwrap();
        let l = |d: usize| c.levels[d - 1];
        assert!(l(2).lower >= l(1).lower - 1e-12);
        assert!(l(4).lower >= l(2).lower - 1e-12);
        assert!(l(2).upper <= l(1).upper + 1e-12);
        assert!(l(4).upper <= l(2).upper + 1e-12);
        assert!(c.lower <= c.estimate && c.estimate <= c.upper);
        assert!(!c.tight, "distortion keeps countable-family brackets open");
    }

    #[test]
    fn truncated_subsystems_are_monotone_in_n() {
        // Adding a branch adds positive mass to every cylinder sum, so at
        // matched depth both bounds — hence the midpoint — grow with N.
        let m = MapModel::gauss();
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        for _ in 0..50 {
            let t: f64 = rng.gen_range(0.0..3.0);
            let n: u64 = rng.gen_range(2..30);
            let a = pressure_cylinder(&m.truncate(n).unwrap(), t, 3, 1_000_000).unwrap();
            let b = pressure_cylinder(&m.truncate(n + 1).unwrap(), t, 3, 1_000_000).unwrap();
            let mid_a = 0.5 * (a.lower + a.upper);
            let mid_b = 0.5 * (b.lower + b.upper);
            assert!(mid_b >= mid_a - 1e-12, "t={t} n={n}: {mid_a} vs {mid_b}");
            assert!(b.lower >= a.lower - 1e-12);
            assert!(b.upper >= a.upper - 1e-12);
        }
    }

    #[test]
    fn gauss_matches_spectral_oracle() {
        // Frozen reference values from a high-order collocation of the
        // transfer operator (an independent method): the full-family
        // extrapolation must land within the stated tolerance per point.
        let m = MapModel::gauss();
        let cases = [
            (0.75, 0.762079256564, 5e-3),
            (0.9, 0.257347881509, 1.5e-3),
            (1.0, 0.0, 1e-3),
            (1.5, -0.925244160875, 1e-3),
            (2.0, -1.612147488303, 1e-3),
            (3.0, -2.758249623644, 1.5e-3),
        ];
        for (t, want, tol) in cases {
            let p = pressure(&m, t, &opts()).unwrap();
            assert!(
                (p.value - want).abs() < tol,
                "P({t}) = {} vs oracle {want} (tol {tol})",
                p.value
            );
            assert!(p.lower <= p.value + 1e-9 && p.value <= p.upper + 1e-9, "bracket at t={t}");
            assert_eq!(p.method, Method::Extrapolated);
        }
    }

    #[test]
    fn gauss_near_boundary_uses_wide_ladder() {
        let m = MapModel::gauss();
        let p = pressure(&m, 0.55, &opts()).unwrap();
        assert_eq!(p.method, Method::WideShallow);
        assert!((p.value - 2.344675650417).abs() < 2e-2, "P(0.55) = {}", p.value);
        let q = pressure(&m, 0.6, &opts()).unwrap();
        assert_eq!(q.method, Method::WideShallow);
        assert!((q.value - 1.672799108771).abs() < 2.5e-2, "P(0.6) = {}", q.value);
    }

    #[test]
    fn boundary_slack_returns_sentinel() {
        // Inside the numerical slack around the series boundary no engine
        // resolves the mass; the honest answer is the sentinel.
        let m = MapModel::gauss();
        let p = pressure(&m, 0.51, &opts()).unwrap();
        assert_eq!(p.value, f64::INFINITY);
        assert_eq!(p.band, Band::Boundary);
        assert_eq!(p.method, Method::InfiniteRule);
        let inf = pressure(&m, 0.4, &opts()).unwrap();
        assert_eq!(inf.value, f64::INFINITY);
        assert_eq!(inf.band, Band::Infinite);
    }

    #[test]
    fn critical_exponents() {
        for m in [MapModel::gauss(), MapModel::renyi(), MapModel::infinite_mp(0.5).unwrap()] {
            let tc = critical_t(&m).unwrap().value;
            assert!((tc - 0.5).abs() < 5e-3, "{}: tc = {tc}", m.family.name());
        }
        let tc = critical_t(&MapModel::pathological(1).unwrap()).unwrap().value;
        assert!((tc - 1.0).abs() < 2e-2, "packed family: tc = {tc}");
        assert!(critical_t(&MapModel::gauss().truncate(5).unwrap()).is_err());
    }

    #[test]
    fn band_table() {
        let g = MapModel::gauss();
        assert_eq!(band_at(&g, 0.3).unwrap().band, Band::Infinite);
        assert_eq!(band_at(&g, 0.51).unwrap().band, Band::Boundary);
        assert_eq!(band_at(&g, 1.5).unwrap().band, Band::Analytic);

        let r = MapModel::renyi();
        assert_eq!(band_at(&r, 0.8).unwrap().band, Band::Analytic);
        assert_eq!(band_at(&r, 1.0).unwrap().band, Band::Flat);
        assert_eq!(band_at(&r, 1.4).unwrap().band, Band::Flat);

        let p = MapModel::pathological(1).unwrap();
        assert_eq!(band_at(&p, 0.9).unwrap().band, Band::Infinite);
        assert_eq!(band_at(&p, 1.0).unwrap().band, Band::DegenerateJump);
        assert_eq!(band_at(&p, 1.5).unwrap().band, Band::Flat);

        let l = MapModel::linear_custom(&[(0.0, 0.5, 2.0), (0.5, 1.0, 2.0)]).unwrap();
        assert_eq!(band_at(&l, 2.0).unwrap().band, Band::Analytic);
    }

    #[test]
    fn renyi_engines_agree_in_overlap() {
        // The truncation ladder and the induced scheme are wholly
        // independent.  Raw cylinder depths converge only polynomially near
        // the neutral point, so the ladder's point estimate keeps a small
        // depth bias — but its rigorous envelope must still contain the
        // induced value, and the two must agree coarsely.
        let m = MapModel::renyi();
        let t = 0.8;
        let deep = extrapolated(&m, t, &DEEP_TRUNCATIONS, Method::Extrapolated, Band::Analytic, &opts()).unwrap();
        let ind = induced_value(&m, t, Band::Analytic).unwrap();
        assert!(
            deep.lower <= ind.value && ind.value <= deep.upper,
            "induced {} outside ladder envelope [{}, {}]",
            ind.value,
            deep.lower,
            deep.upper
        );
        assert!(
            (deep.value - ind.value).abs() < 3e-2,
            "deep = {}, induced = {}",
            deep.value,
            ind.value
        );
        // And the dispatcher must hand this range to the induced engine.
        let via = pressure(&m, t, &opts()).unwrap();
        assert_eq!(via.method, Method::Induced);
        assert_eq!(via.value, ind.value);
    }

    #[test]
    fn renyi_flat_and_analytic_values() {
        let m = MapModel::renyi();
        for t in [1.0, 1.2, 1.5] {
            let flat = pressure(&m, t, &opts()).unwrap();
            assert_eq!(flat.value, 0.0, "P({t})");
            assert_eq!(flat.method, Method::FlatRule);
            assert_eq!(flat.band, Band::Flat);
        }

        let p95 = pressure(&m, 0.95, &opts()).unwrap();
        assert_eq!(p95.method, Method::Induced);
        assert!((p95.value - 0.0547).abs() < 2e-3, "P(0.95) = {}", p95.value);
        assert!(p95.lower <= p95.value && p95.value <= p95.upper);
    }

    #[test]
    fn packed_family_jumps() {
        let m = MapModel::pathological(1).unwrap();
        assert_eq!(pressure(&m, 0.9, &opts()).unwrap().value, f64::INFINITY);
        let at_one = pressure(&m, 1.0, &opts()).unwrap();
        assert_eq!(at_one.value, 0.0, "series mass below 1 pins P(1) to 0");
        assert_eq!(at_one.band, Band::DegenerateJump);
        let above = pressure(&m, 1.3, &opts()).unwrap();
        assert_eq!(above.value, 0.0);
        assert_eq!(above.band, Band::Flat);
    }

    #[test]
    fn packed_series_mass_at_one() {
        // Σ 1/(2n log²(2n)) over the packed labels stays safely below 1:
        // that is the whole point of the family.
        let (partial, tail) = degenerate_series(1, 1.0);
        let total = partial + tail;
        assert!(total > 0.35 && total < 0.55, "B(1) = {total}");
    }

    #[test]
    fn regime_tags() {
        let o = opts();
        let g = classify_regime(&MapModel::gauss(), &o).unwrap();
        assert_eq!(g.regime, RegimeTag::GaussLike);
        assert!((g.t_star - 0.5).abs() < 1e-2);
        assert!((g.dim_estimate - 1.0).abs() < 1e-2, "gauss dim = {}", g.dim_estimate);
        assert!(g.differentiable_at_dim);

        let r = classify_regime(&MapModel::renyi(), &o).unwrap();
        assert_eq!(r.regime, RegimeTag::RenyiLike);
        assert!(r.differentiable_at_dim);
        assert!((r.dim_estimate - 1.0).abs() < 1e-2, "renyi dim = {}", r.dim_estimate);
        assert!(r.alpha_star.unwrap() < ALPHA_GAP, "renyi α* = {:?}", r.alpha_star);

        let i = classify_regime(&MapModel::infinite_mp(0.5).unwrap(), &o).unwrap();
        assert_eq!(i.regime, RegimeTag::InfiniteMpLike);
        assert!(!i.differentiable_at_dim);
        assert!(i.alpha_star.unwrap() > ALPHA_GAP, "infMP α* = {:?}", i.alpha_star);

        let p = classify_regime(&MapModel::pathological(1).unwrap(), &o).unwrap();
        assert_eq!(p.regime, RegimeTag::Degenerate);
        assert!((p.dim_estimate - 1.0).abs() < 2e-2);

        let l = classify_regime(
            &MapModel::linear_custom(&[(0.0, 1.0 / 3.0, 3.0), (1.0 / 3.0, 1.0, 1.5)]).unwrap(),
            &o,
        )
        .unwrap();
        assert_eq!(l.regime, RegimeTag::GaussLike);
        assert!((l.dim_estimate - 1.0).abs() < 1e-3, "affine dim = {}", l.dim_estimate);
    }

    #[test]
    fn derivative_on_linear_oracle() {
        let (a, b) = (3.0f64, 1.5f64);
        let m = MapModel::linear_custom(&[(0.0, 1.0 / 3.0, a), (1.0 / 3.0, 1.0, b)]).unwrap();
        let ts: Vec<f64> = (0..=40).map(|i| 0.5 + 0.05 * i as f64).collect();
        let curve = PressureCurve::compute(&m, &ts, &opts()).unwrap();
        let t = 1.25;
        let exact = (-(a.powf(-t)) * a.ln() - b.powf(-t) * b.ln()) / (a.powf(-t) + b.powf(-t));
        let got = pressure_derivative(&curve, t).unwrap();
        // Centered difference on an analytic curve: h² error with h = 0.05.
        assert!((got - exact).abs() < 2e-3, "{got} vs {exact}");
    }

    #[test]
    fn gauss_derivative_at_dimension() {
        // The slope at t = 1 is the (negative) a.e. orbit growth rate,
        // π²/(6 log 2) ≈ 2.37314.
        let m = MapModel::gauss();
        let ts = [0.9, 0.95, 1.0, 1.05, 1.1];
        let curve = PressureCurve::compute(&m, &ts, &opts()).unwrap();
        let got = pressure_derivative(&curve, 1.0).unwrap();
        let want = -std::f64::consts::PI.powi(2) / (6.0 * 2.0f64.ln());
        assert!((got - want).abs() < 0.05, "{got} vs {want}");
    }

    #[test]
    fn curve_is_monotone_convex_and_bracketed() {
        let m = MapModel::gauss();
        let ts = [0.7, 0.9, 1.2, 1.6, 2.2, 3.0];
        let curve = PressureCurve::compute(&m, &ts, &opts()).unwrap();
        for w in curve.values.windows(2) {
            assert!(w[1].value <= w[0].value + 1e-9, "not nonincreasing at t={}", w[1].t);
        }
        for w in curve.values.windows(3) {
            let tol = 2.0 * (w[1].upper - w[1].lower).max(0.0);
            let chord = ((w[2].t - w[1].t) * w[0].value + (w[1].t - w[0].t) * w[2].value)
                / (w[2].t - w[0].t);
            assert!(w[1].value <= chord + tol, "convexity violated at t={}", w[1].t);
        }
        for v in &curve.values {
            assert!(
                v.lower <= v.value + 1e-9 && v.value <= v.upper + 1e-9,
                "bracket at t={}: [{}, {}] value {}",
                v.t,
                v.lower,
                v.upper,
                v.value
            );
            assert!(v.n.is_some() && v.depth.is_some());
        }
    }

    #[test]
    fn curve_is_deterministic() {
        let m = MapModel::gauss().truncate(12).unwrap();
        let ts = [0.7, 1.0, 1.6];
        let a = PressureCurve::compute(&m, &ts, &opts()).unwrap();
        let b = PressureCurve::compute(&m, &ts, &opts()).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            assert_eq!(x.value.to_bits(), y.value.to_bits());
        }
    }
}
