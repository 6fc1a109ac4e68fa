//! Numerical tolerances shared by every solver and guarantee check.

use serde::Serialize;

/// LP row and bound feasibility.
pub const EPS_FEAS: f64 = 1e-7;
/// SDP linear residual.
pub const TAU_LIN: f64 = 1e-6;
/// SDP minimum eigenvalue.
pub const TAU_PSD: f64 = 1e-6;
/// Smallest value a variable may have to be conditioned on; also the 0/1 snapping band.
pub const DELTA_COND: f64 = 1e-6;
/// Relative objective accuracy of the SDP solver.
pub const DELTA_OBJ: f64 = 1e-5;
/// Bound used when checking that items which cannot fit have vanished.
pub const DELTA_SLACK: f64 = 10.0 * TAU_LIN / DELTA_COND;

pub fn delta_obj(obj: f64) -> f64 {
    DELTA_OBJ * (1.0 + obj.abs())
}

/// Allowed slack in branch inequalities that use the quadratic form of the rewards.
pub fn tau_margin(reward_norm_sq: f64) -> f64 {
    10.0 * TAU_PSD * reward_norm_sq
}

/// The tolerance ledger attached to every report.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct Tolerances {
    pub eps_feas: f64,
    pub tau_lin: f64,
    pub tau_psd: f64,
    pub delta_cond: f64,
    pub delta_obj: f64,
    pub delta_slack: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            eps_feas: EPS_FEAS,
            tau_lin: TAU_LIN,
            tau_psd: TAU_PSD,
            delta_cond: DELTA_COND,
            delta_obj: DELTA_OBJ,
            delta_slack: DELTA_SLACK,
        }
    }
}
