//! Numerical toolkit for the thermodynamic formalism of full-branch interval
//! maps with countably many branches.
//!
//! The crate is organised around a small set of map families (`maps`): the
//! continued-fraction map, its backward cousin, an affine Manneville–Pomeau
//! style map with infinitely many branches, a deliberately irregular family
//! used to probe degenerate behaviour, and user-supplied finite affine maps.
//! On top of those sit:
//!
//! * [`pressure`] — cylinder-sum estimates of the pressure function
//!   `t ↦ P(-t log|T'|)`, truncation/extrapolation schedules, the critical
//!   exponent of the branch series, and regime classification;
//! * [`induced`] — first-return (inducing) schemes over the uniformly
//!   expanding core, and the two-variable pressure used to recover the
//!   pressure of parabolic maps below the dimension;
//! * [`spectrum`] — Legendre-transform Lyapunov spectra, their features
//!   (extremes, asymptote, inflection points) and finite-branch
//!   approximations;
//! * [`symbolic`] — countable-state transition rules (renewal-like graphs),
//!   Gurevich pressure estimates and an itinerary-conjugacy checker;
//! * [`orbits`] — continued-fraction expansions, convergents in exact integer
//!   arithmetic, and Birkhoff/approximant Lyapunov estimators.
//!
//! Heavy enumerations honour a word budget and run on a rayon pool sized by
//! the `THERMOKIT_THREADS` environment variable; all reductions are performed
//! in a fixed order so results are bit-identical across worker counts.

pub mod error;
pub mod induced;
pub mod maps;
pub mod numeric;
pub mod orbits;
pub mod parallel;
pub mod pressure;
pub mod report;
pub mod spectrum;
pub mod symbolic;

pub use error::Error;
pub use maps::{Branch, MapFamily, MapModel};
pub use pressure::{Band, PressureCurve, PressureValue, RegimeReport, RegimeTag};
pub use orbits::{BirkhoffSample, CFExpansion, CFKind};
pub use spectrum::{SpectrumCurve, SpectrumFeatures};
pub use symbolic::{CyclePotential, RuleKind, TransitionRule};

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
