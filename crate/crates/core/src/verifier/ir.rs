//! Infrared probe: boson number along a sequence of shrinking IR cutoffs.

use alloc::vec::Vec;

use super::report::{CheckOutcome, Status, Tier};
use crate::error::Result;
use crate::model::AssembledModel;
use crate::spectral::{GroundStateResult, SpectralConfig};
use crate::vecops::dot;

/// Top-sector weight above which a refinement is flagged as cutoff-saturated.
pub const SATURATION_WEIGHT: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IrClass {
    /// `⟨N⟩` should settle as `k_min → 0`.
    Regular,
    /// `⟨N⟩` should keep growing as `k_min → 0`.
    Divergent,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IrPoint {
    pub k_min: f64,
    pub modes: usize,
    pub mean_number: f64,
    pub top_sector_weight: f64,
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IrReport {
    pub expected: IrClass,
    pub points: Vec<IrPoint>,
    pub status: Status,
    /// Regular: relative change over the last refinement. Divergent: last
    /// increment divided by the previous one.
    pub statistic: f64,
}

impl IrReport {
    pub fn outcome(&self) -> CheckOutcome {
        let (name, tol) = match self.expected {
            IrClass::Regular => ("ir_probe_regular", 0.05),
            IrClass::Divergent => ("ir_probe_divergent", 0.5),
        };
        let flagged = self.points.iter().filter(|p| p.flagged).count();
        let note = if flagged > 0 { "some refinements saturate the cutoff" } else { "" };
        let mut o = CheckOutcome::with_status(name, Tier::Trend, self.status, note);
        o.measured = self.statistic;
        o.tolerance = tol;
        o.metric("refinements", self.points.len() as f64).metric("flagged", flagged as f64)
    }
}

/// Runs the probe on models ordered by decreasing `k_min`. Refinements whose
/// top-sector weight exceeds [`SATURATION_WEIGHT`] are flagged in the report
/// rather than dropped.
pub fn ir_probe(family: &[(f64, AssembledModel)], expected: IrClass, cfg: &SpectralConfig) -> Result<IrReport> {
    let mut points = Vec::with_capacity(family.len());
    for (k_min, model) in family {
        let gs = model.ground_state(cfg)?;
        points.push(ir_point(*k_min, model, &gs));
    }
    Ok(ir_classify(points, expected))
}

/// One refinement of the probe from an already solved ground state.
pub fn ir_point(k_min: f64, model: &AssembledModel, gs: &GroundStateResult) -> IrPoint {
    // Largest ⟨N⟩ over the cluster, a basis-independent choice.
    let mean_number = gs
        .vectors
        .iter()
        .map(|v| dot(v, &model.number.matvec(v)).re)
        .fold(0.0, f64::max);
    let top = gs.top_sector_weights.iter().copied().fold(0.0, f64::max);
    IrPoint {
        k_min,
        modes: model.modes(),
        mean_number,
        top_sector_weight: top,
        flagged: top > SATURATION_WEIGHT,
    }
}

/// Classifies refinements ordered by decreasing `k_min`.
pub fn ir_classify(points: Vec<IrPoint>, expected: IrClass) -> IrReport {
    let n: Vec<f64> = points.iter().map(|p| p.mean_number).collect();
    let (status, statistic) = match expected {
        IrClass::Regular => {
            if n.len() < 2 {
                (Status::Inconclusive, f64::NAN)
            } else {
                let (a, b) = (n[n.len() - 2], n[n.len() - 1]);
                let rel = if b == 0.0 && a == 0.0 { 0.0 } else { (b - a).abs() / b.abs().max(a.abs()) };
                (Status::from_bool(rel <= 0.05), rel)
            }
        }
        IrClass::Divergent => {
            if n.len() < 4 {
                (Status::Inconclusive, f64::NAN)
            } else {
                let increasing = n.windows(2).all(|w| w[1] > w[0]);
                let k = n.len();
                let last = n[k - 1] - n[k - 2];
                let prev = n[k - 2] - n[k - 3];
                let ratio = last / prev;
                (Status::from_bool(increasing && ratio >= 0.5), ratio)
            }
        }
    };
    IrReport {
        expected,
        points,
        status,
        statistic,
    }
}
