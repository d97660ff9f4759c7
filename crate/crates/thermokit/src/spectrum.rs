//! Lyapunov spectra from pressure curves.
//!
//! The exponent-level dimension satisfies
//!
//! `L(α) = (1/α) · inf_t [ P(-t log|T'|) + t α ]`
//!
//! so everything here is a Legendre-type read-out of an already computed
//! pressure curve: for each `α` the minimizing `t_α` is located on the
//! curve's finite region (convexity makes the discrete argmin global) and
//! refined by a local parabola.  The same machinery yields `t_α` witnesses,
//! the curvature residual `R(α) = P(t_α) + (α²/2) t'_α` — which equals
//! `(α³/2) L''(α)`, so its zeros are exactly the inflection points of the
//! spectrum — and the feature extraction: maximum, asymptote, `α*`, `α_min`,
//! and inflection list.
//!
//! Families with a neutral fixed point flatten the pressure at the dimension
//! root, which caps the spectrum: for `α` below the left-derivative limit
//! `α*` the infimum saturates at the flat edge and `L` pins to the
//! dimension.  That happens by itself here whenever the input curve extends
//! into the flat region; a right-edge plateau is also recognized explicitly
//! so curves cut off exactly at the dimension still saturate instead of
//! being marked out of domain.

use serde::Serialize;

use crate::error::Error;
use crate::maps::MapModel;
use crate::numeric::{golden_min, linear_fit};
use crate::pressure::{self, Band, Method, PressureCurve, PressureOptions};
use crate::Result;

/// Branch cap when enumerating periodic words for `alpha_min`.
const ALPHA_MIN_BRANCHES: u64 = 24;
/// Residuals and plateau detection treat pressure values below this as zero.
const FLAT_EPS: f64 = 5e-3;

/// Validity of one spectrum grid point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PointStatus {
    /// Interior minimizer found; `L` and `t_alpha` are meaningful.
    InDomain,
    /// Infimum saturates at the flat edge: `L` equals the dimension.
    Saturated,
    /// No exponent of this size exists for the model (empty level set).
    Absent,
}

/// One `α` grid point of a spectrum.  Numeric fields are NaN when the
/// status says they carry no information.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SpectrumPoint {
    pub alpha: f64,
    pub status: PointStatus,
    pub l: f64,
    pub l_lower: f64,
    pub l_upper: f64,
    pub t_alpha: f64,
    /// `R(α) = P(t_α) + (α²/2) t'_α = (α³/2) L''(α)`; NaN where a centered
    /// difference is unavailable.
    pub residual: f64,
}

/// A Lyapunov spectrum over an `α` grid, tied to its source pressure curve.
#[derive(Clone, Debug, Serialize)]
pub struct SpectrumCurve {
    pub family: String,
    /// Finite `t` range of the source pressure curve.
    pub t_lo: f64,
    pub t_hi: f64,
    pub points: Vec<SpectrumPoint>,
}

impl SpectrumCurve {
    /// Points whose `L` is meaningful (in-domain or saturated).
    pub fn present(&self) -> impl Iterator<Item = &SpectrumPoint> {
        self.points.iter().filter(|p| p.status != PointStatus::Absent)
    }

    /// Linear interpolation of `(L, t_α)` at `alpha` from present points.
    pub fn interpolate(&self, alpha: f64) -> Option<(f64, f64)> {
        let pts: Vec<&SpectrumPoint> = self.present().collect();
        let i = pts.iter().position(|p| p.alpha >= alpha)?;
        if i == 0 {
            return (pts[0].alpha - alpha < 1e-9).then(|| (pts[0].l, pts[0].t_alpha));
        }
        let (a, b) = (pts[i - 1], pts[i]);
        let w = (alpha - a.alpha) / (b.alpha - a.alpha);
        Some((a.l + w * (b.l - a.l), a.t_alpha + w * (b.t_alpha - a.t_alpha)))
    }
}

/// Feature summary of a spectrum.
#[derive(Clone, Debug, Serialize)]
pub struct SpectrumFeatures {
    /// Left-limit of `-P'` at the dimension root (slope of the spectrum's
    /// flat cap for neutral families; the derivative at the Bowen root
    /// otherwise).
    pub alpha_star: f64,
    pub alpha_star_slow: bool,
    /// Smallest exponent over periodic orbits; 0 for neutral families.
    pub alpha_min: f64,
    /// Location of the spectrum's maximum.
    pub alpha_max_at: f64,
    pub l_at_max: f64,
    /// Large-`α` limit estimate of `L` (should match the series critical
    /// exponent).
    pub asymptote: f64,
    /// Disagreement between the two asymptote fit models; an honest error
    /// bar on `asymptote`.
    pub asymptote_bar: f64,
    /// Sign-change locations of the curvature residual, left to right.
    pub inflections: Vec<f64>,
    /// False when interior residual gaps could hide a sign change.
    pub inflections_complete: bool,
}

/// Finite-region table extracted from a pressure curve.
struct CurveTable {
    ts: Vec<f64>,
    ps: Vec<f64>,
    lowers: Vec<f64>,
    uppers: Vec<f64>,
    /// Right edge sits on a `P ≈ 0` plateau (neutral-family flat region).
    plateau: bool,
}

impl CurveTable {
    fn build(curve: &PressureCurve) -> Result<CurveTable> {
        let mut rows: Vec<(f64, f64, f64, f64)> = curve
            .values
            .iter()
            .filter(|v| v.value.is_finite())
            .map(|v| (v.t, v.value, v.lower, v.upper))
            .collect();
        rows.sort_by(|a, b| a.0.total_cmp(&b.0));
        rows.dedup_by(|a, b| (a.0 - b.0).abs() < 1e-12);
        if rows.len() < 3 {
            return Err(Error::config(
                "spectrum needs a pressure curve with at least three finite points",
            ));
        }
        let k = rows.len();
        let plateau = rows[k - 1].1.abs() < FLAT_EPS && rows[k - 2].1.abs() < FLAT_EPS;
        Ok(CurveTable {
            ts: rows.iter().map(|r| r.0).collect(),
            ps: rows.iter().map(|r| r.1).collect(),
            lowers: rows.iter().map(|r| r.2).collect(),
            uppers: rows.iter().map(|r| r.3).collect(),
            plateau,
        })
    }

    fn lerp_bars(&self, t: f64) -> (f64, f64) {
        let i = match self.ts.iter().position(|&x| x >= t) {
            Some(0) | None => return (f64::NEG_INFINITY, f64::INFINITY),
            Some(i) => i,
        };
        let w = (t - self.ts[i - 1]) / (self.ts[i] - self.ts[i - 1]);
        (
            self.lowers[i - 1] + w * (self.lowers[i] - self.lowers[i - 1]),
            self.uppers[i - 1] + w * (self.uppers[i] - self.uppers[i - 1]),
        )
    }

    /// Solve the infimum for one `α`.  The residual is filled in later.
    fn legendre_point(&self, alpha: f64) -> SpectrumPoint {
        let nan = f64::NAN;
        let absent = SpectrumPoint {
            alpha,
            status: PointStatus::Absent,
            l: nan,
            l_lower: nan,
            l_upper: nan,
            t_alpha: nan,
            residual: nan,
        };
        let k = self.ts.len();
        let mut best = 0;
        let mut besty = f64::INFINITY;
        for i in 0..k {
            let y = self.ps[i] + self.ts[i] * alpha;
            if y < besty {
                besty = y;
                best = i;
            }
        }
        if best == 0 {
            // Steeper than anything the curve's finite region reaches.
            return absent;
        }
        if best == k - 1 {
            if !self.plateau {
                // Shallower than the attainable minimum: empty level set.
                return absent;
            }
            // Flat right edge: the infimum saturates at the dimension.
            let t = self.ts[k - 1];
            let l = (self.ps[k - 1] + t * alpha) / alpha;
            let (blo, bhi) = (self.lowers[k - 1], self.uppers[k - 1]);
            return SpectrumPoint {
                alpha,
                status: PointStatus::Saturated,
                l,
                l_lower: ((blo + t * alpha) / alpha).min(l),
                l_upper: ((bhi + t * alpha) / alpha).max(l),
                t_alpha: t,
                residual: nan,
            };
        }
        // Parabola through the argmin and its neighbors.  Refinement is
        // skipped when the argmin sits on the flat-edge corner of a neutral
        // family: the objective has a genuine kink there, the quadratic
        // model is meaningless, and its vertex drifts into the plateau
        // where the piecewise-linear objective only grows.
        let (t0, t1, t2) = (self.ts[best - 1], self.ts[best], self.ts[best + 1]);
        let y = |i: usize| self.ps[i] + self.ts[i] * alpha;
        let (y0, y1, y2) = (y(best - 1), y(best), y(best + 1));
        let s1 = (y1 - y0) / (t1 - t0);
        let s2 = (y2 - y1) / (t2 - t1);
        let a2 = (s2 - s1) / (t2 - t0);
        let at_kink = self.plateau && self.ps[best].abs() < FLAT_EPS;
        let (tv, yv) = if a2 > 0.0 && !at_kink {
            let b1 = s1 - a2 * (t0 + t1);
            let v = (-b1 / (2.0 * a2)).clamp(t0, t2);
            (v, a2 * v * v + b1 * v + (y0 - a2 * t0 * t0 - b1 * t0))
        } else {
            (t1, y1)
        };
        let l = yv / alpha;
        let (blo, bhi) = self.lerp_bars(tv);
        SpectrumPoint {
            alpha,
            status: PointStatus::InDomain,
            l,
            l_lower: ((blo + tv * alpha) / alpha).min(l),
            l_upper: ((bhi + tv * alpha) / alpha).max(l),
            t_alpha: tv,
            residual: nan,
        }
    }
}

fn fill_residuals(points: &mut [SpectrumPoint]) {
    let n = points.len();
    for i in 1..n.saturating_sub(1) {
        let (prev, this, next) = (points[i - 1], points[i], points[i + 1]);
        if this.status == PointStatus::Absent
            || prev.status == PointStatus::Absent
            || next.status == PointStatus::Absent
        {
            continue;
        }
        let tp = (next.t_alpha - prev.t_alpha) / (next.alpha - prev.alpha);
        let p_at = this.alpha * (this.l - this.t_alpha);
        points[i].residual = p_at + 0.5 * this.alpha * this.alpha * tp;
    }
}

/// The Legendre-type spectrum of a pressure curve over an `α` grid.
///
/// Grid values must be strictly increasing and positive.  Points whose
/// exponent the model cannot attain come back `Absent` rather than zero:
/// an empty level set has no dimension value.
pub fn legendre_spectrum(curve: &PressureCurve, alpha_grid: &[f64]) -> Result<SpectrumCurve> {
    if alpha_grid.is_empty() {
        return Err(Error::config("empty alpha grid"));
    }
    for w in alpha_grid.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::config("alpha grid must be strictly increasing"));
        }
    }
    if alpha_grid[0] <= 0.0 {
        return Err(Error::config("alpha grid must be positive"));
    }
    let tab = CurveTable::build(curve)?;
    let mut points: Vec<SpectrumPoint> =
        alpha_grid.iter().map(|&a| tab.legendre_point(a)).collect();
    fill_residuals(&mut points);
    Ok(SpectrumCurve {
        family: curve.family.clone(),
        t_lo: tab.ts[0],
        t_hi: *tab.ts.last().unwrap(),
        points,
    })
}

/// Left-derivative extrapolation result.
#[derive(Clone, Debug, Serialize)]
pub struct AlphaStarEstimate {
    pub value: f64,
    /// Raised when the chord sequence is still drifting at the finest
    /// spacing — the hallmark of the logarithmically slow neutral case.
    pub slow_convergence: bool,
    /// Chord slopes `-ΔP/Δt` approaching the dimension, coarse to fine.
    pub chords: Vec<f64>,
}

/// Extrapolated left limit of `-P'(t)` as `t → dim⁻`, from the curve's own
/// points.  Chord slopes on the approach are fitted against a step variable
/// chosen by the curve's tail geometry: when the curve runs into a flat
/// `P ≈ 0` plateau (a neutral family, where the slope creeps to its limit
/// logarithmically) the chords are fitted against `1/log(1/h)`, otherwise
/// against the plain distance `h` (analytic crossing, chord error `O(h)`).
/// Picking the model by fit residual instead does not work: over a narrow
/// window the two step variables are nearly collinear, so both fit equally
/// well while extrapolating very differently.
pub fn alpha_star(curve: &PressureCurve, dim: f64) -> Result<AlphaStarEstimate> {
    let mut finite: Vec<(f64, f64)> = curve
        .values
        .iter()
        .filter(|v| v.value.is_finite())
        .map(|v| (v.t, v.value))
        .collect();
    finite.sort_by(|a, b| a.0.total_cmp(&b.0));
    finite.dedup_by(|a, b| (a.0 - b.0).abs() < 1e-12);
    let n = finite.len();
    let neutral = n >= 2 && finite[n - 1].1.abs() < FLAT_EPS && finite[n - 2].1.abs() < FLAT_EPS;
    let pts: Vec<(f64, f64)> = finite
        .into_iter()
        .filter(|&(t, _)| t < dim - 1e-9 && dim - t < 0.5)
        .collect();
    if pts.len() < 4 {
        return Err(Error::config(
            "alpha_star needs at least four curve points approaching the dimension",
        ));
    }
    let mut chords = Vec::new();
    let mut hbars = Vec::new();
    for w in pts.windows(2) {
        chords.push(-(w[1].1 - w[0].1) / (w[1].0 - w[0].0));
        hbars.push(dim - 0.5 * (w[0].0 + w[1].0));
    }
    let k = chords.len();
    let take = k.min(3);
    let s = &chords[k - take..];
    let xs: Vec<f64> = if neutral {
        hbars[k - take..].iter().map(|&h| 1.0 / (1.0 / h).ln()).collect()
    } else {
        hbars[k - take..].to_vec()
    };
    let (value, _, _) = linear_fit(&xs, s);
    let value = value.max(0.0);
    let spread = s.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - s.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(AlphaStarEstimate {
        value,
        slow_convergence: spread > 0.15 * (value.abs() + 0.1),
        chords,
    })
}

/// Smallest Lyapunov exponent over periodic orbits of period `≤ period_cap`
/// (0 for families with a neutral fixed point — the neutral orbit itself).
///
/// Each periodic point is the fixed point of a composed inverse branch,
/// found by straight iteration (the composition is a contraction), and its
/// exponent is the cycle-averaged log-derivative.
pub fn alpha_min(model: &MapModel, period_cap: u32) -> Result<f64> {
    if period_cap == 0 {
        return Err(Error::config("alpha_min needs period_cap ≥ 1"));
    }
    if model.is_parabolic() {
        return Ok(0.0);
    }
    let n_max = model.branch_count().unwrap_or(ALPHA_MIN_BRANCHES).min(ALPHA_MIN_BRANCHES);
    let branches: Vec<_> = (1..=n_max).map(|n| model.branch(n)).collect();
    let mut best = f64::INFINITY;
    for k in 1..=period_cap {
        let mut word = vec![0usize; k as usize];
        loop {
            // Fixed point of the word's composed inverse branch.
            let mut x = 0.5;
            for _ in 0..200 {
                let mut y = x;
                for &i in word.iter().rev() {
                    y = branches[i].inverse(y);
                }
                if (y - x).abs() < 1e-15 {
                    x = y;
                    break;
                }
                x = y;
            }
            // Cycle-averaged log|T'| along the orbit through x.
            let mut ld = 0.0;
            let mut y = x;
            for &i in word.iter().rev() {
                y = branches[i].inverse(y);
                ld += branches[i].deriv_abs(y).ln();
            }
            best = best.min(ld / k as f64);
            // Next word in lexicographic order.
            let mut pos = word.len();
            loop {
                if pos == 0 {
                    break;
                }
                pos -= 1;
                word[pos] += 1;
                if word[pos] < branches.len() {
                    break;
                }
                word[pos] = 0;
            }
            if pos == 0 && word[0] == 0 {
                break;
            }
        }
    }
    Ok(best)
}

/// Dimension read directly off a pressure curve: the interpolated zero
/// crossing, or the left edge of a flat plateau.
pub fn dim_from_curve(curve: &PressureCurve) -> Option<f64> {
    let mut pts: Vec<(f64, f64)> = curve
        .values
        .iter()
        .filter(|v| v.value.is_finite())
        .map(|v| (v.t, v.value))
        .collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    // A neutral family's flat region carries tiny positive solver residue
    // rather than exact zeros, so "reaches zero" means "drops below tol" —
    // a plain sign test would interpolate across the residue and land a
    // full grid step too far right.
    let tol = 1e-5;
    for w in pts.windows(2) {
        if w[0].1 > tol && w[1].1 <= tol {
            let span = w[0].1 - w[1].1;
            let x = w[0].0 + (w[1].0 - w[0].0) * w[0].1 / span;
            return Some(x.clamp(w[0].0, w[1].0));
        }
    }
    None
}

/// Solve a 3×3 linear system by Gaussian elimination with partial pivoting.
fn solve3(mut m: [[f64; 4]; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let piv = (col..3).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))?;
        m.swap(col, piv);
        if m[col][col].abs() < 1e-300 {
            return None;
        }
        for row in col + 1..3 {
            let f = m[row][col] / m[col][col];
            for j in col..4 {
                m[row][j] -= f * m[col][j];
            }
        }
    }
    let mut x = [0.0; 3];
    for row in (0..3).rev() {
        let mut acc = m[row][3];
        for j in row + 1..3 {
            acc -= m[row][j] * x[j];
        }
        x[row] = acc / m[row][row];
    }
    Some(x)
}

/// Feature extraction: maximum, asymptote, `α*`, `α_min`, inflections.
pub fn features(curve: &PressureCurve, spectrum: &SpectrumCurve, model: &MapModel) -> Result<SpectrumFeatures> {
    let tab = CurveTable::build(curve)?;
    let dim = dim_from_curve(curve)
        .ok_or_else(|| Error::config("curve does not cross zero; cannot locate the dimension"))?;
    let star = alpha_star(curve, dim)?;

    let present: Vec<&SpectrumPoint> = spectrum.present().collect();
    if present.len() < 4 {
        return Err(Error::config("spectrum has too few usable points for features"));
    }
    // Maximum by golden-section on the continuous Legendre read-out (the
    // grid alone would quantize the location).
    let lo = present.first().unwrap().alpha;
    let hi = present.last().unwrap().alpha;
    let (alpha_max_at, neg_l) = golden_min(lo, hi, 1e-4 * (hi - lo), |a| {
        let p = tab.legendre_point(a);
        if p.status == PointStatus::Absent { f64::INFINITY } else { -p.l }
    });
    let l_at_max = -neg_l;

    // Asymptote from three large-α points: exact fit of
    // L = t* + (c + d log α)/α, cross-checked against the plain
    // two-parameter L = t* + c/α least squares.  The three points are
    // spread (top, ~-30%, ~-50%) rather than adjacent — three clustered
    // grid points make the 3×3 system nearly collinear and amplify the
    // small errors in L.
    let k = present.len();
    let three: Vec<&SpectrumPoint> = if k >= 11 {
        vec![present[k - 11], present[k - 6], present[k - 1]]
    } else {
        present[k - 3..].to_vec()
    };
    let mut rows = [[0.0; 4]; 3];
    for (i, p) in three.iter().enumerate() {
        rows[i] = [1.0, 1.0 / p.alpha, p.alpha.ln() / p.alpha, p.l];
    }
    let primary = solve3(rows).map(|x| x[0]);
    let xs: Vec<f64> = three.iter().map(|p| 1.0 / p.alpha).collect();
    let ys: Vec<f64> = three.iter().map(|p| p.l).collect();
    let (plain, _, _) = linear_fit(&xs, &ys);
    let asymptote = primary.unwrap_or(plain);
    let asymptote_bar = (asymptote - plain).abs().max(1e-3);

    // Inflections: sign changes of the curvature residual, which only count
    // past α* (the flat cap and its edge carry no curvature information).
    let mut inflections = Vec::new();
    let usable: Vec<&SpectrumPoint> = present
        .iter()
        .copied()
        .filter(|p| p.status == PointStatus::InDomain && p.alpha > star.value)
        .collect();
    for w in usable.windows(2) {
        let (a, b) = (w[0], w[1]);
        if a.residual.is_nan() || b.residual.is_nan() {
            continue;
        }
        if a.residual.signum() != b.residual.signum() && a.residual != 0.0 {
            let cross = a.alpha
                + (b.alpha - a.alpha) * a.residual.abs() / (a.residual.abs() + b.residual.abs());
            inflections.push(cross);
        }
    }
    // Residuals at the two grid ends never exist; a gap only matters strictly
    // inside the scanned window.
    let interior_gap = usable.len() >= 3
        && usable[1..usable.len() - 1].iter().any(|p| p.residual.is_nan());

    Ok(SpectrumFeatures {
        alpha_star: star.value,
        alpha_star_slow: star.slow_convergence,
        alpha_min: alpha_min(model, 4)?,
        alpha_max_at,
        l_at_max,
        asymptote,
        asymptote_bar,
        inflections,
        inflections_complete: !interior_gap,
    })
}

/// `|t_α - L|` at a located maximum: the entropy identity makes the two
/// sides coincide there, so the return value is a consistency defect.
pub fn maximum_t_identity(spectrum: &SpectrumCurve, at: f64) -> Result<f64> {
    let (l, t) = spectrum
        .interpolate(at)
        .ok_or_else(|| Error::config("maximum location outside the spectrum grid"))?;
    Ok((t - l).abs())
}

/// One truncated-spectrum evaluation.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct TruncatedEntry {
    pub n: u64,
    /// `None` when `α` falls outside the subsystem's attainable range.
    pub l: Option<f64>,
}

/// Subsystem spectra at one exponent, against the full-model value.
#[derive(Clone, Debug, Serialize)]
pub struct TruncatedSpectra {
    pub alpha: f64,
    pub entries: Vec<TruncatedEntry>,
    pub full_l: Option<f64>,
    /// Present entries never decrease with the truncation size.
    pub monotone: bool,
    /// `full_l` minus the largest truncation's value.
    pub gap: Option<f64>,
}

/// Budget for the quick subsystem evaluations here; accuracy needs are mild
/// (the interesting content is the ordering, not the digits).
const TRUNC_BUDGET: u64 = 2_000_000;

/// Direct Legendre value of one finite subsystem by golden-section over `t`.
fn truncated_l(model: &MapModel, n: u64, alpha: f64, depth_cap: u32) -> Result<Option<f64>> {
    let sub = if model.branch_count() == Some(n) { model.clone() } else { model.truncate(n)? };
    let count = sub.branch_count().expect("truncated model is finite");
    let mut depth = 1;
    while depth < depth_cap {
        let next: u128 = (1..=depth + 1).map(|d| (count as u128).pow(d)).sum();
        if next > TRUNC_BUDGET as u128 {
            break;
        }
        depth += 1;
    }
    let eval = |t: f64| -> f64 {
        pressure::pressure_cylinder(&sub, t, depth, TRUNC_BUDGET)
            .map(|c| c.estimate + t * alpha)
            .unwrap_or(f64::INFINITY)
    };
    let mut half = 4.0;
    loop {
        let (x, y) = golden_min(-half, half, 1e-8 * half, eval);
        if half - x.abs() > 0.05 * half {
            return Ok(Some(y / alpha));
        }
        half *= 2.0;
        if half > 256.0 {
            // Minimizer keeps running to the edge: α outside the subsystem's
            // slope range.
            return Ok(None);
        }
    }
}

/// Spectrum values of the first-`N` subsystems at one exponent, with the
/// full-model value for comparison.  Subsystems only ever see a subset of
/// the dynamics, so their spectra increase with `N` toward the full one.
pub fn truncated_spectra(model: &MapModel, alpha: f64, n_list: &[u64], opts: &PressureOptions) -> Result<TruncatedSpectra> {
    if !(alpha > 0.0) {
        return Err(Error::config("truncated_spectra needs α > 0"));
    }
    let mut entries = Vec::with_capacity(n_list.len());
    for &n in n_list {
        entries.push(TruncatedEntry { n, l: truncated_l(model, n, alpha, opts.depth_cap)? });
    }
    let full_l = full_model_l(model, alpha, opts)?;
    let present: Vec<f64> = entries.iter().filter_map(|e| e.l).collect();
    let monotone = present.windows(2).all(|w| w[1] >= w[0] - 1e-6);
    let gap = match (full_l, entries.iter().rev().find_map(|e| e.l)) {
        (Some(f), Some(last)) => Some(f - last),
        _ => None,
    };
    Ok(TruncatedSpectra { alpha, entries, full_l, monotone, gap })
}

/// Quick full-model `L(α)` by golden-section over the pressure in `t`.
fn full_model_l(model: &MapModel, alpha: f64, opts: &PressureOptions) -> Result<Option<f64>> {
    if model.branch_count().is_some() {
        let count = model.branch_count().unwrap();
        return truncated_l(model, count, alpha, opts.depth_cap);
    }
    let tc = pressure::critical_t(model)?.value;
    let lo = tc + 0.13;
    let eval: Box<dyn Fn(f64) -> f64> = if model.is_parabolic() {
        Box::new(|t: f64| {
            pressure::pressure(model, t, opts)
                .map(|p| p.value + t * alpha)
                .unwrap_or(f64::INFINITY)
        })
    } else {
        // Light truncation ladder: diagnostics need three digits, not six.
        Box::new(move |t: f64| {
            pressure::extrapolated(model, t, &[8, 10, 12], Method::Extrapolated, Band::Analytic, opts)
                .map(|p| p.value + t * alpha)
                .unwrap_or(f64::INFINITY)
        })
    };
    let hi = if model.is_parabolic() { 1.2 } else { 3.5 };
    let (x, y) = golden_min(lo, hi, 1e-5 * (hi - lo), &*eval);
    if x - lo < 0.02 * (hi - lo) || (!model.is_parabolic() && hi - x < 0.02 * (hi - lo)) {
        return Ok(None);
    }
    Ok(Some(y / alpha))
}

#[cfg(test)]
mod tests {
    use super::*;
    use once_cell::sync::Lazy;
    use rand::{Rng, SeedableRng};

    /// Shared full-range pressure curve of the continued-fraction family.
    /// Building it dominates this module's test cost, so every test that
    /// needs it reads the same instance; the ladder is lighter than the
    /// default because spectrum-level tolerances are looser than the
    /// pressure oracle's.
    static GAUSS_CURVE: Lazy<PressureCurve> = Lazy::new(|| {
        let mut opts = PressureOptions::default();
        opts.deep_truncations = vec![10, 13, 16, 20];
        let mut ts: Vec<f64> = vec![0.523, 0.527, 0.532, 0.538, 0.545, 0.555, 0.57, 0.585, 0.60];
        let mut t = 0.62;
        while t < 0.895 {
            ts.push(t);
            t += 0.05;
        }
        t = 0.90;
        while t < 1.155 {
            ts.push(t);
            t += 0.02;
        }
        t = 1.16;
        while t < 1.59 {
            ts.push(t);
            t += 0.05;
        }
        t = 1.6;
        while t < 3.05 {
            ts.push(t);
            t += 0.1;
        }
        PressureCurve::compute(&MapModel::gauss(), &ts, &opts).unwrap()
    });

    static RENYI_CURVE: Lazy<PressureCurve> = Lazy::new(|| {
        let opts = PressureOptions::default();
        let mut ts: Vec<f64> = vec![0.64, 0.68, 0.72, 0.76, 0.80, 0.84, 0.88, 0.92];
        for h in [0.05, 0.03, 0.02, 0.01, 0.005, 0.002] {
            ts.push(1.0 - h);
        }
        ts.extend([1.0, 1.05, 1.1, 1.2]);
        PressureCurve::compute(&MapModel::renyi(), &ts, &opts).unwrap()
    });

    fn geometric_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        let r = (hi / lo).powf(1.0 / (n - 1) as f64);
        (0..n).map(|i| lo * r.powi(i as i32)).collect()
    }

    fn affine_curve() -> (MapModel, PressureCurve) {
        let m = MapModel::linear_custom(&[(0.0, 1.0 / 3.0, 3.0), (1.0 / 3.0, 1.0, 1.5)]).unwrap();
        let ts: Vec<f64> = (0..=5200).map(|i| -40.0 + 0.01 * i as f64).collect();
        let c = PressureCurve::compute(&m, &ts, &PressureOptions::default()).unwrap();
        (m, c)
    }

    /// Closed-form two-branch pressure and its brute-force Legendre value.
    fn affine_oracle(alpha: f64) -> (f64, f64) {
        let p = |t: f64| ((3.0f64).powf(-t) + (1.5f64).powf(-t)).ln();
        let (t, y) = golden_min(-80.0, 40.0, 1e-12, |t| p(t) + t * alpha);
        (y / alpha, t)
    }

    #[test]
    fn affine_legendre_matches_brute_force() {
        let (_, curve) = affine_curve();
        let alphas = [0.45, 0.6, 0.752, 0.9, 1.05];
        let spec = legendre_spectrum(&curve, &alphas).unwrap();
        let mut rng = rand::rngs::StdRng::seed_from_u64(11);
        for pt in &spec.points {
            assert_eq!(pt.status, PointStatus::InDomain, "α={}", pt.alpha);
            let (want_l, want_t) = affine_oracle(pt.alpha);
            assert!(
                (pt.l - want_l).abs() < 1e-5,
                "α={}: L={} vs {}",
                pt.alpha,
                pt.l,
                want_l
            );
            assert!((pt.t_alpha - want_t).abs() < 5e-3);
            // inf property against random probes
            for _ in 0..20 {
                let t: f64 = rng.gen_range(-40.0..12.0);
                let p = ((3.0f64).powf(-t) + (1.5f64).powf(-t)).ln();
                assert!(pt.l * pt.alpha <= p + t * pt.alpha + 1e-9);
            }
        }
        // out-of-range exponents map to empty level sets
        let out = legendre_spectrum(&curve, &[0.2, 1.3]).unwrap();
        assert!(out.points.iter().all(|p| p.status == PointStatus::Absent));
    }

    #[test]
    fn affine_residual_is_scaled_second_difference() {
        // R(α) = (α³/2) L''(α) exactly; its numeric twin comes from second
        // differences of L on a uniform grid.
        let (_, curve) = affine_curve();
        let alphas: Vec<f64> = (0..=120).map(|i| 0.5 + 0.005 * i as f64).collect();
        let spec = legendre_spectrum(&curve, &alphas).unwrap();
        let h = 0.005;
        let pts = &spec.points;
        let mut checked = 0;
        for i in 2..pts.len() - 2 {
            let lpp = (pts[i + 1].l - 2.0 * pts[i].l + pts[i - 1].l) / (h * h);
            let want = 0.5 * pts[i].alpha.powi(3) * lpp;
            if want.abs() < 0.02 || pts[i].residual.is_nan() {
                continue;
            }
            assert!(
                (pts[i].residual - want).abs() < 0.15 * want.abs() + 5e-3,
                "α={}: R={} vs (α³/2)L''={}",
                pts[i].alpha,
                pts[i].residual,
                want
            );
            checked += 1;
        }
        assert!(checked > 40, "only {checked} comparable points");
    }

    #[test]
    fn gauss_spectrum_shape() {
        let grid = geometric_grid(1.2, 45.0, 56);
        let spec = legendre_spectrum(&GAUSS_CURVE, &grid).unwrap();
        let dim = dim_from_curve(&GAUSS_CURVE).unwrap();
        assert!((dim - 1.0).abs() < 5e-3, "dim = {dim}");
        let mut last_t = f64::INFINITY;
        for pt in spec.present() {
            assert!(pt.l >= -1e-9 && pt.l <= dim + 0.02, "L({}) = {}", pt.alpha, pt.l);
            assert!(pt.t_alpha <= last_t + 1e-6, "t_α not nonincreasing at {}", pt.alpha);
            last_t = pt.t_alpha;
            assert!(pt.l_lower <= pt.l && pt.l <= pt.l_upper);
        }
        // rises to the maximum, falls beyond it
        let l_at = |a: f64| spec.interpolate(a).unwrap().0;
        assert!(l_at(1.5) < l_at(2.0) && l_at(2.0) < l_at(2.37));
        assert!(l_at(2.37) > l_at(4.0) && l_at(4.0) > l_at(10.0));
        // the measured mid-tail value; a frozen regression guard
        let l30 = l_at(30.0);
        assert!(l30 > 0.60 && l30 < 0.65, "L(30) = {l30}");
    }

    #[test]
    fn gauss_features_match_known_constants() {
        let grid = geometric_grid(1.2, 45.0, 56);
        let spec = legendre_spectrum(&GAUSS_CURVE, &grid).unwrap();
        let f = features(&GAUSS_CURVE, &spec, &MapModel::gauss()).unwrap();
        // the almost-sure exponent π²/(6 log 2), where the spectrum peaks
        let levy_exponent = std::f64::consts::PI.powi(2) / (6.0 * 2.0f64.ln());
        assert!((f.alpha_max_at - levy_exponent).abs() < 0.05, "max at {}", f.alpha_max_at);
        assert!(f.l_at_max > 0.99 && f.l_at_max < 1.01, "L(max) = {}", f.l_at_max);
        assert!((f.alpha_star - levy_exponent).abs() < 0.05, "α* = {}", f.alpha_star);
        assert!(!f.alpha_star_slow);
        let golden = (0.5 * (1.0 + 5.0f64.sqrt())).ln() * 2.0;
        assert!((f.alpha_min - golden).abs() < 1e-3, "α_min = {}", f.alpha_min);
        assert!((f.asymptote - 0.5).abs() < 0.02, "asymptote = {}", f.asymptote);
        assert!(!f.inflections.is_empty(), "no inflection found");
        for &a in &f.inflections {
            assert!(a > f.alpha_star, "inflection {a} below α* {}", f.alpha_star);
        }
        assert!(f.inflections_complete);
        // identity at the maximum: t_α = L there
        let defect = maximum_t_identity(&spec, f.alpha_max_at).unwrap();
        assert!(defect < 0.02, "identity defect {defect}");
        // unbounded domain: the tail keeps sliding down toward the asymptote
        // (it closes only logarithmically, so the gap is still visible here)
        let l_mid = spec.interpolate(25.0).unwrap().0;
        let l_far = spec.interpolate(39.0).unwrap().0;
        assert!(l_mid > l_far && l_far > f.asymptote, "tail not descending: {l_mid} {l_far}");
        assert!(l_far - f.asymptote < 0.12, "tail gap {}", l_far - f.asymptote);
    }

    #[test]
    fn affine_identity_at_maximum_is_sharp() {
        let (_, curve) = affine_curve();
        let grid: Vec<f64> = (0..=300).map(|i| 0.42 + 0.0022 * i as f64).collect();
        let spec = legendre_spectrum(&curve, &grid).unwrap();
        let tab_max = spec
            .present()
            .max_by(|a, b| a.l.total_cmp(&b.l))
            .map(|p| p.alpha)
            .unwrap();
        // refine with the oracle around the discrete winner
        let (at, _) = golden_min(tab_max - 0.01, tab_max + 0.01, 1e-10, |a| -affine_oracle(a).0);
        let defect = maximum_t_identity(&spec, at).unwrap();
        assert!(defect < 1e-4, "defect {defect} at α = {at}");
        // and the exact identity on the oracle itself
        let (l, t) = affine_oracle(at);
        assert!((l - t).abs() < 1e-6);
    }

    #[test]
    fn renyi_spectrum_caps_and_decreases() {
        let grid = geometric_grid(0.02, 2.0, 40);
        let spec = legendre_spectrum(&RENYI_CURVE, &grid).unwrap();
        let l_at = |a: f64| spec.interpolate(a).unwrap().0;
        assert!(l_at(0.02) > 0.85, "L(0.02) = {}", l_at(0.02));
        // Exponents below the finest resolved chord slope all land on the
        // flat-edge corner, so the curve caps at the dimension there and
        // only turns strictly downward once the argmin moves interior.
        for w in [0.05, 0.2, 0.4, 0.8].windows(2) {
            assert!(l_at(w[1]) <= l_at(w[0]) + 1e-9, "rises between {} and {}", w[0], w[1]);
            assert!(l_at(w[1]) <= 1.0 + 1e-9);
        }
        for w in [0.8, 1.2, 1.8].windows(2) {
            assert!(l_at(w[1]) < l_at(w[0]), "not decreasing between {} and {}", w[0], w[1]);
        }
        // The creeping slope never settles at this resolution: the estimate
        // must flag itself slow, sit below the finest chord, and the chord
        // sequence itself must still be falling.
        let star = alpha_star(&RENYI_CURVE, dim_from_curve(&RENYI_CURVE).unwrap()).unwrap();
        assert!(star.value >= 0.0, "α* = {}", star.value);
        assert!(star.value < *star.chords.last().unwrap(), "α* = {} above last chord", star.value);
        assert!(star.slow_convergence, "neutral creep should raise the slow flag");
        let k = star.chords.len();
        assert!(star.chords[k - 1] < star.chords[k - 3], "chords not decreasing: {:?}", star.chords);
    }

    #[test]
    fn neutral_saturation_pins_l_to_dimension() {
        let opts = PressureOptions::default();
        let mut ts: Vec<f64> = Vec::new();
        for h in [0.3, 0.2, 0.12, 0.07, 0.04, 0.02, 0.01] {
            ts.push(1.0 - h);
        }
        ts.extend([1.0, 1.1, 1.2]);
        let curve = PressureCurve::compute(&MapModel::infinite_mp(0.5).unwrap(), &ts, &opts).unwrap();
        let spec = legendre_spectrum(&curve, &[0.02, 0.05, 0.6, 1.0, 1.6]).unwrap();
        let low = &spec.points[0..2];
        for pt in low {
            assert!((pt.l - 1.0).abs() < 0.01, "L({}) = {}", pt.alpha, pt.l);
        }
        let star = alpha_star(&curve, dim_from_curve(&curve).unwrap()).unwrap();
        assert!(star.value > 0.1, "α* = {}", star.value);
        // beyond the cap the spectrum comes down
        let l_at = |a: f64| spec.interpolate(a).unwrap().0;
        assert!(l_at(1.6) < l_at(1.0));
    }

    #[test]
    fn alpha_min_closed_forms() {
        let golden = (0.5 * (1.0 + 5.0f64.sqrt())).ln() * 2.0;
        let g = alpha_min(&MapModel::gauss(), 3).unwrap();
        assert!((g - golden).abs() < 1e-3, "gauss α_min = {g}");
        assert_eq!(alpha_min(&MapModel::renyi(), 3).unwrap(), 0.0);
        assert_eq!(alpha_min(&MapModel::pathological(1).unwrap(), 2).unwrap(), 0.0);
        let m = MapModel::linear_custom(&[(0.0, 1.0 / 3.0, 3.0), (1.0 / 3.0, 1.0, 1.5)]).unwrap();
        let l = alpha_min(&m, 3).unwrap();
        assert!((l - 1.5f64.ln()).abs() < 1e-9, "affine α_min = {l}");
    }

    #[test]
    fn truncated_spectra_increase_toward_full() {
        let opts = PressureOptions::default();
        let g = truncated_spectra(&MapModel::gauss(), 2.5, &[5, 25, 100], &opts).unwrap();
        assert!(g.monotone, "gauss entries {:?}", g.entries);
        assert!(g.entries.iter().all(|e| e.l.is_some()));
        let gap = g.gap.unwrap();
        assert!(gap > -1e-3 && gap < 0.1, "gauss gap {gap}");

        let r = truncated_spectra(&MapModel::renyi(), 1.0, &[5, 25, 100], &opts).unwrap();
        assert!(r.monotone, "renyi entries {:?}", r.entries);
        let rgap = r.gap.unwrap();
        assert!(rgap.abs() < 0.05, "renyi gap {rgap}");

        // pointwise domination: every subsystem value sits below the full one
        let full = g.full_l.unwrap();
        for e in &g.entries {
            assert!(e.l.unwrap() <= full + 1e-3, "N={} exceeds full", e.n);
        }
    }

    #[test]
    fn duality_scan_matches_refined_argmin() {
        // The refined (P(t_α) + t_α α) must agree with the brute scan over
        // the raw grid to within grid resolution.
        let grid = geometric_grid(1.5, 20.0, 12);
        let spec = legendre_spectrum(&GAUSS_CURVE, &grid).unwrap();
        let tab: Vec<(f64, f64)> = GAUSS_CURVE
            .values
            .iter()
            .filter(|v| v.value.is_finite())
            .map(|v| (v.t, v.value))
            .collect();
        for pt in spec.present() {
            let scan = tab
                .iter()
                .map(|&(t, p)| p + t * pt.alpha)
                .fold(f64::INFINITY, f64::min);
            let refined = pt.l * pt.alpha;
            assert!(
                refined <= scan + 1e-9,
                "refined {} above scan {} at α={}",
                refined,
                scan,
                pt.alpha
            );
            assert!((refined - scan).abs() < 0.02 * (1.0 + scan.abs()), "α={}", pt.alpha);
        }
    }
}
