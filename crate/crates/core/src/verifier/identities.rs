//! Pull-through, number-operator and Hilbert-Schmidt identities on ground states.

use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::Rng;

use super::report::{CheckOutcome, Status, Tier};
use crate::error::{Error, Result};
use crate::model::AssembledModel;
use crate::rng::random_unitary;
use crate::spectral::{GroundStateResult, ResolventSolver, SpectralConfig};
use crate::vecops::{axpy, dot, norm, norm_sqr, sub};

/// Exact-tier tolerance for identities that hold to rounding.
pub const EXACT_REL_TOL: f64 = 1e-10;
/// Bound on the defect-corrected pull-through residual.
pub const PULL_THROUGH_TOL: f64 = 1e-8;

fn normalized(v: &[C64]) -> Vec<C64> {
    let mut u = v.to_vec();
    crate::vecops::normalize(&mut u);
    u
}

#[derive(Debug, Clone, PartialEq)]
pub struct NumberReport {
    /// `⟨φ, (1⊗N) φ⟩`
    pub lhs: f64,
    /// `Σ_m ‖a_m φ‖²`
    pub mid: f64,
    /// `g² Σ_m ‖(H−E+ω_m)⁻¹ T_m φ‖²`, absent for the partial identity check.
    pub rhs: Option<f64>,
    pub rel_err_mid: f64,
    pub rel_err_rhs: Option<f64>,
    pub top_sector_weight: f64,
    /// Allowed `|lhs − rhs|`.
    pub budget: Option<f64>,
}

/// `⟨φ, Nφ⟩ = Σ_m ‖a_m φ‖²` for a normalized `φ`.
pub fn number_identity_check(model: &AssembledModel, phi: &[C64]) -> NumberReport {
    let phi = normalized(phi);
    let lhs = dot(&phi, &model.number.matvec(&phi)).re;
    let mid: f64 = model.lowers.iter().map(|a| norm_sqr(&a.matvec(&phi))).sum();
    NumberReport {
        lhs,
        mid,
        rhs: None,
        rel_err_mid: (lhs - mid).abs() / lhs.max(1.0),
        rel_err_rhs: None,
        top_sector_weight: model.top_sector_weight(&phi),
        budget: None,
    }
}

impl NumberReport {
    pub fn identity_outcome(&self) -> CheckOutcome {
        CheckOutcome::bounded("number_identity", Tier::Exact, self.rel_err_mid, EXACT_REL_TOL)
            .metric("lhs", self.lhs)
            .metric("mid", self.mid)
    }

    pub fn formula_outcome(&self) -> CheckOutcome {
        let rhs = self.rhs.unwrap_or(f64::NAN);
        let budget = self.budget.unwrap_or(f64::NAN);
        CheckOutcome::bounded("number_formula", Tier::Truncation, (self.lhs - rhs).abs(), budget)
            .and(self.rel_err_mid <= EXACT_REL_TOL)
            .metric("lhs", self.lhs)
            .metric("mid", self.mid)
            .metric("rhs", rhs)
            .metric("top_sector_weight", self.top_sector_weight)
    }
}

/// `κ_m = (H − E + ω_m)⁻¹ T_m φ` for every mode.
pub fn carleman_columns(model: &AssembledModel, solver: &ResolventSolver<'_>, phi: &[C64]) -> Result<Vec<Vec<C64>>> {
    model
        .t_ops
        .iter()
        .zip(&model.omega)
        .map(|(t, &w)| solver.solve(w, &t.matvec(phi)))
        .collect()
}

/// All three routes to `⟨N⟩`; reports the worst cluster member.
pub fn number_formula_check(model: &AssembledModel, gs: &GroundStateResult, cfg: &SpectralConfig) -> Result<NumberReport> {
    let solver = ResolventSolver::for_ground_state(&model.h, gs, cfg);
    let g2 = model.coupling * model.coupling;
    let mut worst: Option<NumberReport> = None;
    for v in &gs.vectors {
        let phi = normalized(v);
        let mut rep = number_identity_check(model, &phi);
        let kappa = carleman_columns(model, &solver, &phi)?;
        let rhs = g2 * kappa.iter().map(|k| norm_sqr(k)).sum::<f64>();
        rep.rhs = Some(rhs);
        rep.rel_err_rhs = Some((rep.lhs - rhs).abs() / rep.lhs.max(1.0));
        rep.budget = Some(10.0 * rep.top_sector_weight + 1e-8);
        let replace = match &worst {
            None => true,
            Some(w) => (rep.lhs - rhs).abs() > (w.lhs - w.rhs.unwrap_or(0.0)).abs(),
        };
        if replace {
            worst = Some(rep);
        }
    }
    worst.ok_or_else(|| Error::invalid("ground state", "empty cluster"))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PullThroughReport {
    /// `‖a_m φ − g R_m [H_I, a_m] φ‖` per mode, worst cluster member.
    pub raw: Vec<f64>,
    /// `‖D_m φ‖` per mode.
    pub defect: Vec<f64>,
    /// `‖a_m φ − R_m(g [H_I, a_m] φ + D_m φ)‖` per mode.
    pub corrected: Vec<f64>,
    pub max_raw: f64,
    pub max_corrected: f64,
    pub top_sector_weight: f64,
}

impl PullThroughReport {
    pub fn outcome(&self) -> CheckOutcome {
        CheckOutcome::bounded("pull_through", Tier::Truncation, self.max_corrected, PULL_THROUGH_TOL)
            .metric("max_raw_residual", self.max_raw)
            .metric("max_defect", self.defect.iter().copied().fold(0.0, f64::max))
            .metric("top_sector_weight", self.top_sector_weight)
    }
}

/// Finite-dimensional pull-through formula.
///
/// With `[H_I, a_m] = −T_m`, the truncated algebra gives
/// `(H − E + ω_m) a_m φ = −g T_m φ + D_m φ` where
/// `D_m = [H, a_m] + ω_m a_m + g T_m` lives on the top sectors.
pub fn pull_through_check(model: &AssembledModel, gs: &GroundStateResult, cfg: &SpectralConfig) -> Result<PullThroughReport> {
    let solver = ResolventSolver::for_ground_state(&model.h, gs, cfg);
    let g = model.coupling;
    let modes = model.modes();
    let mut raw = alloc::vec![0.0f64; modes];
    let mut defect = alloc::vec![0.0f64; modes];
    let mut corrected = alloc::vec![0.0f64; modes];
    let mut top = 0.0f64;
    for v in &gs.vectors {
        let phi = normalized(v);
        top = top.max(model.top_sector_weight(&phi));
        let h_phi = model.h.matvec(&phi);
        for m in 0..modes {
            let a = &model.lowers[m];
            let w = model.omega[m];
            let a_phi = a.matvec(&phi);
            let mut src = model.t_ops[m].matvec(&phi);
            crate::vecops::scale(C64::new(-g, 0.0), &mut src);
            let x_raw = solver.solve(w, &src)?;
            raw[m] = raw[m].max(norm(&sub(&a_phi, &x_raw)));

            let mut d = model.h.matvec(&a_phi);
            axpy(C64::new(-1.0, 0.0), &a.matvec(&h_phi), &mut d);
            axpy(C64::new(w, 0.0), &a_phi, &mut d);
            axpy(C64::new(-1.0, 0.0), &src, &mut d);
            defect[m] = defect[m].max(norm(&d));
            let mut full_src = src;
            axpy(C64::new(1.0, 0.0), &d, &mut full_src);
            let x_cor = solver.solve(w, &full_src)?;
            corrected[m] = corrected[m].max(norm(&sub(&a_phi, &x_cor)));
        }
    }
    Ok(PullThroughReport {
        max_raw: raw.iter().copied().fold(0.0, f64::max),
        max_corrected: corrected.iter().copied().fold(0.0, f64::max),
        raw,
        defect,
        corrected,
        top_sector_weight: top,
    })
}

/// `⟨φ, a_m φ⟩` and `‖a_m φ − ⟨φ, a_m φ⟩ φ‖`: how close `φ` is to an
/// eigenvector of the annihilator.
pub fn annihilator_eigen_relation(model: &AssembledModel, phi: &[C64], m: usize) -> (C64, f64) {
    let phi = normalized(phi);
    let a_phi = model.lowers[m].matvec(&phi);
    let beta = dot(&phi, &a_phi);
    let mut r = a_phi;
    axpy(-beta, &phi, &mut r);
    (beta, norm(&r))
}

#[derive(Debug, Clone, PartialEq)]
pub struct HsReport {
    /// `Σ_m ‖κ_m‖²` in the original mode basis.
    pub reference: f64,
    /// Sum in each rotated basis (identity and reversal first).
    pub rotated: Vec<f64>,
    pub max_rel_deviation: f64,
}

impl HsReport {
    pub fn outcome(&self) -> CheckOutcome {
        CheckOutcome::bounded("hs_invariance", Tier::Exact, self.max_rel_deviation, EXACT_REL_TOL)
            .metric("frobenius_sum", self.reference)
            .metric("bases", self.rotated.len() as f64)
    }
}

/// `Σ_m ‖Σ_{m'} U_{m'm} κ_{m'}‖²` is independent of the unitary `U`.
pub fn hs_invariance_check<R: Rng>(
    model: &AssembledModel,
    gs: &GroundStateResult,
    trials: usize,
    rng: &mut R,
    cfg: &SpectralConfig,
) -> Result<HsReport> {
    let solver = ResolventSolver::for_ground_state(&model.h, gs, cfg);
    let phi = normalized(&gs.vectors[0]);
    let kappa = carleman_columns(model, &solver, &phi)?;
    let modes = kappa.len();
    let reference: f64 = kappa.iter().map(|k| norm_sqr(k)).sum();

    let mut unitaries = alloc::vec![
        DMatrix::<C64>::identity(modes, modes),
        DMatrix::from_fn(modes, modes, |i, j| if i + j + 1 == modes { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) }),
    ];
    unitaries.extend((0..trials).map(|_| random_unitary(rng, modes)));

    let n = phi.len();
    let mut rotated = Vec::with_capacity(unitaries.len());
    for u in &unitaries {
        let mut s = 0.0;
        for m in 0..modes {
            let mut col = crate::vecops::zeros(n);
            for (mp, k) in kappa.iter().enumerate() {
                axpy(u[(mp, m)], k, &mut col);
            }
            s += norm_sqr(&col);
        }
        rotated.push(s);
    }
    let denom = reference.max(f64::MIN_POSITIVE);
    let max_rel_deviation = rotated.iter().map(|s| (s - reference).abs() / denom).fold(0.0, f64::max);
    Ok(HsReport {
        reference,
        rotated,
        max_rel_deviation: if reference == 0.0 { 0.0 } else { max_rel_deviation },
    })
}

/// Converts the exact number identity on arbitrary states into an outcome.
pub fn number_identity_outcome(reports: &[NumberReport]) -> CheckOutcome {
    if reports.is_empty() {
        return CheckOutcome::with_status("number_identity", Tier::Exact, Status::Skipped, "no states");
    }
    let worst = reports.iter().map(|r| r.rel_err_mid).fold(0.0, f64::max);
    CheckOutcome::bounded("number_identity", Tier::Exact, worst, EXACT_REL_TOL).metric("states", reports.len() as f64)
}
