//! Map families: full-branch interval maps with countably many branches.
//!
//! Every model exposes its branches through [`MapModel::branch`]; a branch
//! knows its domain interval, a closed form for the map and its derivative,
//! and the inverse branch from `[0, 1]` back into the domain interval.  Four
//! built-in families cover the interesting behaviours:
//!
//! * `gauss` — `x ↦ 1/x mod 1`, uniformly expanding after one step;
//! * `renyi` — `x ↦ 1/(1-x) mod 1`, parabolic fixed point at 0;
//! * `infinite_mp` — affine branches with slope `n(n+1)` plus a parabolic
//!   first branch `x + 2^β x^{1+β}` on `[0, 1/2)`;
//! * `pathological` — affine branches whose slopes grow like `2n(log 2n)²`,
//!   which breaks the polynomial-growth requirement and produces a pressure
//!   function that jumps from `+∞` to `0`;
//!
//! plus `linear_custom` for explicit finite affine maps (the exactly solvable
//! case used by the test oracles).

mod config;
pub mod cylinder;
mod families;
pub mod validate;

pub use config::{model_from_config, model_from_json};
pub use cylinder::{cylinders, cylinders_collect, CylinderWord};
pub use validate::{validate, ValidationReport};

use crate::error::Error;
use crate::Result;

/// Which built-in family a model belongs to.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case", tag = "family")]
pub enum MapFamily {
    Gauss,
    Renyi,
    InfiniteMp { beta: f64 },
    Pathological { n_start: u64 },
    LinearCustom,
}

impl MapFamily {
    pub fn name(&self) -> &'static str {
        match self {
            MapFamily::Gauss => "gauss",
            MapFamily::Renyi => "renyi",
            MapFamily::InfiniteMp { .. } => "infinite_mp",
            MapFamily::Pathological { .. } => "pathological",
            MapFamily::LinearCustom => "linear_custom",
        }
    }
}

/// Closed form of one branch of the map.
#[derive(Clone, Copy, Debug)]
pub enum BranchForm {
    /// `T(x) = (a x + b) / (c x + d)`.
    Mobius { a: f64, b: f64, c: f64, d: f64 },
    /// `T(x) = slope · x + intercept`.
    Affine { slope: f64, intercept: f64 },
    /// `T(x) = x + coeff · x^(1+beta)`, parabolic at `x = 0`.
    Parabolic { beta: f64, coeff: f64 },
}

/// One full branch `T : I_n → [0, 1]`.
#[derive(Clone, Copy, Debug)]
pub struct Branch {
    /// 1-based branch label (for `pathological` this is the series label `n`,
    /// which starts above the constructor's `n_start`).
    pub index: u64,
    /// Domain interval `[lo, hi]` (closed here; orientation decides which
    /// endpoint maps to 0).
    pub lo: f64,
    pub hi: f64,
    pub form: BranchForm,
    /// True on the branch containing the parabolic fixed point.
    pub parabolic: bool,
}

impl Branch {
    /// Forward image of `x` (callers keep `x` inside `[lo, hi]`).
    pub fn eval(&self, x: f64) -> f64 {
        match self.form {
            BranchForm::Mobius { a, b, c, d } => (a * x + b) / (c * x + d),
            BranchForm::Affine { slope, intercept } => slope * x + intercept,
            BranchForm::Parabolic { beta, coeff } => x + coeff * x.powf(1.0 + beta),
        }
    }

    /// `|T'(x)|`.
    pub fn deriv_abs(&self, x: f64) -> f64 {
        match self.form {
            BranchForm::Mobius { a, b, c, d } => {
                let den = c * x + d;
                ((a * d - b * c) / (den * den)).abs()
            }
            BranchForm::Affine { slope, .. } => slope.abs(),
            BranchForm::Parabolic { beta, coeff } => 1.0 + coeff * (1.0 + beta) * x.powf(beta),
        }
    }

    /// Inverse branch: the unique `x ∈ [lo, hi]` with `T(x) = y`, `y ∈ [0, 1]`.
    pub fn inverse(&self, y: f64) -> f64 {
        match self.form {
            BranchForm::Mobius { a, b, c, d } => {
                // x = (d y - b) / (a - c y)
                (d * y - b) / (a - c * y)
            }
            BranchForm::Affine { slope, intercept } => (y - intercept) / slope,
            BranchForm::Parabolic { beta, coeff } => invert_parabolic(beta, coeff, y),
        }
    }

    /// True when the branch is increasing.
    pub fn increasing(&self) -> bool {
        match self.form {
            BranchForm::Mobius { a, b, c, d } => a * d - b * c > 0.0,
            BranchForm::Affine { slope, .. } => slope > 0.0,
            BranchForm::Parabolic { .. } => true,
        }
    }

    /// Infimum of `|T'|` over the branch interval.
    ///
    /// All branch forms used here have monotone `|T'|`, so the extrema sit at
    /// the interval endpoints.
    pub fn deriv_inf(&self) -> f64 {
        self.deriv_abs(self.lo).min(self.deriv_abs(self.hi))
    }

    /// Supremum of `|T'|` over the branch interval.
    pub fn deriv_sup(&self) -> f64 {
        self.deriv_abs(self.lo).max(self.deriv_abs(self.hi))
    }
}

/// Solve `x + coeff x^(1+beta) = y` on `[0, 1/2]` (monotone increasing).
fn invert_parabolic(beta: f64, coeff: f64, y: f64) -> f64 {
    if y <= 0.0 {
        return 0.0;
    }
    // Newton from a slightly shrunk seed; the map is convex so iterates
    // approach from above and stay in the bracket.
    let mut x = y.min(0.5);
    for _ in 0..60 {
        let fx = x + coeff * x.powf(1.0 + beta) - y;
        let dfx = 1.0 + coeff * (1.0 + beta) * x.powf(beta);
        let step = fx / dfx;
        x -= step;
        if x < 0.0 {
            x = 0.0;
        }
        if step.abs() < 1e-16 * (1.0 + x.abs()) {
            break;
        }
    }
    x
}

/// A full-branch interval map, possibly truncated to its first `N` branches.
#[derive(Clone, Debug)]
pub struct MapModel {
    pub family: MapFamily,
    /// Parabolic fixed point, when the family has one (always 0 here).
    pub parabolic_point: Option<f64>,
    /// Declared repeller dimension when the family is known to have one.
    pub dim_repeller: Option<f64>,
    /// Declared polynomial growth exponent of the branch derivatives.
    pub gamma_hint: Option<f64>,
    /// True for families that deliberately violate the polynomial growth
    /// requirement.
    pub non_condition5: bool,
    /// `Some(N)`: only branches `1..=N` exist (truncated or finite model).
    truncation: Option<u64>,
    /// Explicit branches for `linear_custom`.
    custom: Option<Vec<Branch>>,
    /// Pathological family: left endpoints of the packed affine intervals,
    /// `packing[k]` = left endpoint for label `n_start + 1 + k`.
    packing: Option<Vec<f64>>,
}

/// Largest pathological branch label materialised at construction time.
/// Enumerations in this crate stay far below it; asking for more is a bug.
const PATHOLOGICAL_CAP: usize = 1 << 14;

impl MapModel {
    /// The continued-fraction (Gauss) map `x ↦ 1/x - ⌊1/x⌋`.
    pub fn gauss() -> MapModel {
        MapModel {
            family: MapFamily::Gauss,
            parabolic_point: None,
            dim_repeller: Some(1.0),
            gamma_hint: Some(2.0),
            non_condition5: false,
            truncation: None,
            custom: None,
            packing: None,
        }
    }

    /// The backward continued-fraction (Renyi) map `x ↦ 1/(1-x) - ⌊1/(1-x)⌋`.
    pub fn renyi() -> MapModel {
        MapModel {
            family: MapFamily::Renyi,
            parabolic_point: Some(0.0),
            dim_repeller: Some(1.0),
            gamma_hint: Some(2.0),
            non_condition5: false,
            truncation: None,
            custom: None,
            packing: None,
        }
    }

    /// Manneville–Pomeau style map with countably many affine branches.
    ///
    /// Branch 1 is `x + 2^β x^{1+β}` on `[0, 1/2)`; branch `n ≥ 2` is affine
    /// with slope `n(n+1)` on `[(n-1)/n, n/(n+1))`. Rejects `beta ≤ 0`.
    pub fn infinite_mp(beta: f64) -> Result<MapModel> {
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(Error::config(format!(
                "infinite_mp requires beta > 0, got {beta}"
            )));
        }
        Ok(MapModel {
            family: MapFamily::InfiniteMp { beta },
            parabolic_point: Some(0.0),
            dim_repeller: Some(1.0),
            gamma_hint: Some(2.0),
            non_condition5: false,
            truncation: None,
            custom: None,
            packing: None,
        })
    }

    /// The irregular family: affine branches of length `1/x(n)` with
    /// `x(n) = 2n (log 2n)²` for labels `n > n_start`, packed contiguously
    /// from `1/2`, plus the parabolic branch (β = 1) on `[0, 1/2)`.
    ///
    /// Rejects `n_start` values for which the packed lengths do not fit in
    /// `[1/2, 1]`.
    pub fn pathological(n_start: u64) -> Result<MapModel> {
        if n_start == 0 {
            return Err(Error::config("pathological requires n_start ≥ 1"));
        }
        // Check the packing fits: Σ_{n > n_start} 1/x(n) ≤ 1/2, with the
        // series tail bounded by ∫ dx / (2x (log 2x)²) = 1/(2 log 2M).
        let head: f64 = (n_start + 1..=n_start + 200_000)
            .map(|n| 1.0 / patho_slope(n))
            .sum();
        let m = (n_start + 200_000) as f64;
        let tail = 1.0 / (2.0 * (2.0 * m + 1.0).ln());
        if head + tail > 0.5 {
            return Err(Error::config(format!(
                "pathological(n_start={n_start}): packed length {:.4} exceeds 1/2",
                head + tail
            )));
        }
        let mut packing = Vec::with_capacity(PATHOLOGICAL_CAP);
        let mut pos = 0.5;
        for k in 0..PATHOLOGICAL_CAP {
            packing.push(pos);
            pos += 1.0 / patho_slope(n_start + 1 + k as u64);
        }
        Ok(MapModel {
            family: MapFamily::Pathological { n_start },
            parabolic_point: Some(0.0),
            dim_repeller: None,
            gamma_hint: None,
            non_condition5: true,
            truncation: None,
            custom: None,
            packing: Some(packing),
        })
    }

    /// Explicit finite affine map: full increasing branches `(interval, slope)`
    /// tiling `[0, 1)`.
    pub fn linear_custom(branches: &[(f64, f64, f64)]) -> Result<MapModel> {
        if branches.len() < 2 {
            return Err(Error::config("linear_custom needs at least 2 branches"));
        }
        let mut out = Vec::with_capacity(branches.len());
        let mut cursor = 0.0;
        for (i, &(lo, hi, slope)) in branches.iter().enumerate() {
            if (lo - cursor).abs() > 1e-9 {
                return Err(Error::config(format!(
                    "branch {} starts at {lo}, expected {cursor} (branches must tile [0,1))",
                    i + 1
                )));
            }
            if hi <= lo {
                return Err(Error::config(format!("branch {} has empty interval", i + 1)));
            }
            let implied = 1.0 / (hi - lo);
            if (slope - implied).abs() > 1e-6 * implied {
                return Err(Error::config(format!(
                    "branch {}: slope {slope} is not full-branch (interval implies {implied})",
                    i + 1
                )));
            }
            out.push(Branch {
                index: (i + 1) as u64,
                lo,
                hi,
                form: BranchForm::Affine { slope: implied, intercept: -implied * lo },
                parabolic: false,
            });
            cursor = hi;
        }
        if (cursor - 1.0).abs() > 1e-9 {
            return Err(Error::config(format!(
                "branches end at {cursor}, expected 1 (must tile [0,1))"
            )));
        }
        let n = out.len() as u64;
        Ok(MapModel {
            family: MapFamily::LinearCustom,
            parabolic_point: None,
            dim_repeller: None,
            gamma_hint: None,
            non_condition5: false,
            truncation: Some(n),
            custom: Some(out),
            packing: None,
        })
    }

    /// Restrict to the first `n` branches (the repeller of the restriction is
    /// the set of points whose whole orbit stays in those branches).
    pub fn truncate(&self, n: u64) -> Result<MapModel> {
        if n < 2 {
            return Err(Error::config("truncation needs at least 2 branches"));
        }
        if let Some(count) = self.branch_count() {
            if n > count {
                return Err(Error::config(format!(
                    "truncation to {n} branches, model has {count}"
                )));
            }
        }
        let mut m = self.clone();
        m.truncation = Some(n);
        Ok(m)
    }

    /// Number of branches, `None` when countably infinite.
    pub fn branch_count(&self) -> Option<u64> {
        self.truncation
    }

    /// True when the model has a parabolic fixed point.
    pub fn is_parabolic(&self) -> bool {
        self.parabolic_point.is_some()
    }

    /// The `n`-th branch (1-based).
    ///
    /// Panics if `n` is 0 or beyond the truncation; countable families
    /// construct branches on demand.
    pub fn branch(&self, n: u64) -> Branch {
        assert!(n >= 1, "branches are 1-based");
        if let Some(t) = self.truncation {
            assert!(n <= t, "branch {n} beyond truncation {t}");
        }
        match &self.family {
            MapFamily::Gauss => families::gauss_branch(n),
            MapFamily::Renyi => families::renyi_branch(n),
            MapFamily::InfiniteMp { beta } => families::infinite_mp_branch(*beta, n),
            MapFamily::Pathological { n_start } => {
                let packing = self.packing.as_ref().expect("pathological packing");
                families::pathological_branch(*n_start, packing, n)
            }
            MapFamily::LinearCustom => self.custom.as_ref().expect("custom branches")[(n - 1) as usize],
        }
    }

    /// Branch label containing `x ∈ [0, 1)`, `None` if `x` falls in a packing
    /// gap (pathological family) or outside the truncation.
    pub fn branch_of_point(&self, x: f64) -> Option<u64> {
        if !(0.0..1.0).contains(&x) {
            return None;
        }
        let n = match &self.family {
            MapFamily::Gauss => {
                if x == 0.0 {
                    return None;
                }
                (1.0 / x).floor() as u64
            }
            MapFamily::Renyi | MapFamily::InfiniteMp { .. } => {
                if x < 0.5 {
                    1
                } else {
                    (1.0 / (1.0 - x)).floor() as u64
                }
            }
            MapFamily::Pathological { n_start } => {
                if x < 0.5 {
                    1
                } else {
                    let packing = self.packing.as_ref().unwrap();
                    // last packed start ≤ x
                    let k = match packing.binary_search_by(|p| p.partial_cmp(&x).unwrap()) {
                        Ok(k) => k,
                        Err(0) => return None,
                        Err(k) => k - 1,
                    };
                    let label = n_start + 1 + k as u64;
                    if x >= packing[k] + 1.0 / patho_slope(label) {
                        return None; // gap beyond the packed region
                    }
                    // Convert label to a 1-based branch position: branch 1 is
                    // parabolic, branch 2 has label n_start+1, etc.
                    (k + 2) as u64
                }
            }
            MapFamily::LinearCustom => {
                let branches = self.custom.as_ref().unwrap();
                let k = branches
                    .partition_point(|b| b.hi <= x);
                if k >= branches.len() {
                    return None;
                }
                (k + 1) as u64
            }
        };
        match self.truncation {
            Some(t) if n > t => None,
            _ => Some(n),
        }
    }

    /// One forward step: `(T(x), branch label)`.
    pub fn forward(&self, x: f64) -> Option<(f64, u64)> {
        let n = self.branch_of_point(x)?;
        let b = self.branch(n);
        let y = self.eval_on_branch(&b, x);
        Some((y, n))
    }

    /// Evaluate on a known branch, clamping tiny numerical overshoot.
    fn eval_on_branch(&self, b: &Branch, x: f64) -> f64 {
        let y = b.eval(x);
        y.clamp(0.0, 1.0 - 1e-17).max(0.0)
    }

    /// `|T'(x)|` at a point (0 when outside every branch).
    pub fn deriv_at(&self, x: f64) -> f64 {
        match self.branch_of_point(x) {
            Some(n) => self.branch(n).deriv_abs(x),
            None => 0.0,
        }
    }
}

/// Slope `x(n) = 2 n (log 2n)²` of the pathological family.
pub(crate) fn patho_slope(n: u64) -> f64 {
    let l = (2.0 * n as f64).ln();
    2.0 * n as f64 * l * l
}
