//! LP and SDP solvers, moment vectors, PSD checks, and conditioning.

pub mod linalg;
pub mod lp;
pub mod moment;
pub mod psd;
pub mod sdp;

pub use lp::{
    lp_solve, lp_solve_with, FarkasRay, LpOptions, LpProblem, LpRow, LpSolution, LpStatus,
    Relation, Sense,
};
pub use moment::{build_moment_matrix, condition, localized_matrix, MomentMatrix, MomentVector};
pub use psd::{psd_check, PsdCheck};
pub use sdp::{
    sdp_solve, sdp_solve_with, MomentExpr, MomentSdp, SdpBlock, SdpLinear, SdpOptions, SdpProblem,
    SdpSolution, SdpStatus,
};
