//! Identity, inequality and trend checks on assembled models.
//!
//! Every check reports the measured discrepancy next to its tolerance. Checks
//! on degenerate ground clusters run on each orthonormal member (or on the
//! whole span, for quadratic-form bounds) and report the worst case.

pub mod algebra;
pub mod bounds;
pub mod identities;
pub mod ir;
pub mod pf;
mod report;

pub use algebra::{a_m_check, brute_force_dgamma_spectrum, ccr_check, dg1_check, dgamma_commutator_check, dgamma_spectrum_check};
pub use bounds::{delta_trend, 
    interaction_commutator_check, massive_bound_check, multiplicity_check, overlap_delta, overlap_delta_check,
    relative_bound_check, relative_bound_constant, resolvent_convergence_check, sup_ratio, MultiplicityReport,
    OverlapReport, ResolventPoint, ResolventReport, INEQUALITY_TOL, TREND_SLACK,
};
pub use identities::{
    annihilator_eigen_relation, carleman_columns, hs_invariance_check, number_formula_check, number_identity_check,
    number_identity_outcome, pull_through_check, HsReport, NumberReport, PullThroughReport, EXACT_REL_TOL,
    PULL_THROUGH_TOL,
};
pub use ir::{ir_classify, ir_point, ir_probe, IrClass, IrPoint, IrReport, SATURATION_WEIGHT};
pub use pf::{
    binding_energy_check, pf_commutator_check, position_ratio, spatial_decay_check, BindingReport, CommutatorReport,
    DecayReport, DecayWeight,
};
pub use report::{decreasing_with_slack, CheckOutcome, Status, Tier, VerificationReport};
