//! Run-wide numerical tolerances.
//!
//! Two regimes: `exact` for quantities computed purely from jets and small
//! linear algebra, `fd` for anything contaminated by finite differencing of
//! frame fields. Constancy verdicts use a relative spread bound with an
//! absolute floor.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Jet-only quantities (frame residuals, algebraic identities).
    pub exact: f64,
    /// Finite-difference contaminated quantities (shape operators, τ).
    pub fd: f64,
    /// Relative spread bound for "constant along the grid" verdicts.
    pub rel: f64,
    /// Absolute floor guarding divisions and relative spreads.
    pub floor: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            exact: 1e-9,
            fd: 1e-5,
            rel: 1e-6,
            floor: 1e-9,
        }
    }
}

/// Central-difference step for derivatives of derived scalars and frames.
pub const FD_STEP: f64 = 1e-4;

/// Rank gap factor for the degenerate-metric test: smallest singular value
/// must sit below `RADICAL_REL_TOL * σ_max` and the next one well above it.
pub const RADICAL_REL_TOL: f64 = 1e-8;
