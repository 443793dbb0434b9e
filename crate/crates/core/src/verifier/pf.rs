//! Checks specific to the one-dimensional Pauli-Fierz toy model.

use alloc::vec::Vec;

use num_complex::Complex64 as C64;
#[allow(unused_imports)]
use num_traits::Float;

use super::bounds::mask_below;
use super::report::{CheckOutcome, Status, Tier};
use crate::error::{Error, Result};
use crate::model::{AssembledModel, PfParts};
use crate::spectral::{eigh, GroundStateResult, SpectralConfig};
use crate::vecops::{axpy, norm, sub};

fn parts(model: &AssembledModel) -> Result<&PfParts> {
    model
        .pf
        .as_ref()
        .ok_or_else(|| Error::invalid("model", "check requires the Pauli-Fierz toy model"))
}

#[derive(Debug, Clone, PartialEq)]
pub struct BindingReport {
    pub e_full: f64,
    pub e_free: f64,
    pub e_particle: f64,
    /// `E(H with V = 0) − E(H)`
    pub binding: f64,
    /// `binding + E(h_p)`; the inequality asserts this is non-negative.
    pub margin: f64,
    pub tolerance: f64,
    pub status: Status,
}

impl BindingReport {
    pub fn outcome(&self) -> CheckOutcome {
        let mut o = CheckOutcome::with_status("binding_energy", Tier::Inequality, self.status, "");
        o.measured = -self.margin;
        o.tolerance = self.tolerance;
        o.metric("binding", self.binding)
            .metric("e_particle", self.e_particle)
            .metric("e_full", self.e_full)
            .metric("e_free", self.e_free)
    }
}

/// `E_bin = E(H⁰) − E(H) ≥ −E(h_p)` where `H⁰` drops the potential.
pub fn binding_energy_check(model: &AssembledModel, free: &AssembledModel, cfg: &SpectralConfig) -> Result<BindingReport> {
    let p = parts(model)?;
    let e_particle = eigh(&p.h_p).values[0];
    let gs = model.ground_state(cfg)?;
    let gs_free = free.ground_state(cfg)?;
    let binding = gs_free.energy - gs.energy;
    let margin = binding + e_particle;
    let tolerance = 1e-6 * gs.scale;
    let status = if e_particle >= 0.0 {
        Status::Skipped
    } else {
        Status::from_bool(margin >= -tolerance)
    };
    Ok(BindingReport {
        e_full: gs.energy,
        e_free: gs_free.energy,
        e_particle,
        binding,
        margin,
        tolerance,
        status,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecayWeight {
    /// `G(x) = |x|`
    Abs,
    /// `G ≡ 1`; the bound needs `∇G ≠ 0`, so only the ratio is reported.
    One,
}

/// `‖(G⊗1)φ‖ / ‖φ‖`.
pub fn position_ratio(model: &AssembledModel, phi: &[C64], weight: DecayWeight) -> Result<f64> {
    let p = parts(model)?;
    let per_site = model.dim() / p.positions.len();
    let mut num = 0.0;
    let mut den = 0.0;
    for (i, z) in phi.iter().enumerate() {
        let g = match weight {
            DecayWeight::Abs => p.positions[i / per_site].abs(),
            DecayWeight::One => 1.0,
        };
        num += g * g * z.norm_sqr();
        den += z.norm_sqr();
    }
    Ok((num / den).sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayReport {
    pub ratio: f64,
    pub c_exp: f64,
    pub a_prime: f64,
    pub b: f64,
    pub epsilon: f64,
    pub status: Status,
}

impl DecayReport {
    pub fn outcome(&self) -> CheckOutcome {
        let mut o = CheckOutcome::with_status("spatial_decay", Tier::Inequality, self.status, "");
        o.measured = self.ratio - self.c_exp;
        o.tolerance = 0.0;
        o.metric("ratio", self.ratio).metric("c_exp", self.c_exp).metric("epsilon", self.epsilon)
    }
}

/// `‖(|x|⊗1)φ‖/‖φ‖ ≤ c_exp = √((a′ + b)/(E_bin − V_∞ − ε))` with
/// `a′ = max x²|V(x)|`, `b = 1/2m`, `V_∞ = 0`, `ε = E_bin/10`.
pub fn spatial_decay_check(model: &AssembledModel, gs: &GroundStateResult, binding: f64, weight: DecayWeight) -> Result<DecayReport> {
    let p = parts(model)?;
    let mut ratio = 0.0f64;
    for v in &gs.vectors {
        ratio = ratio.max(position_ratio(model, v, weight)?);
    }
    let a_prime = p
        .positions
        .iter()
        .zip(&p.potential)
        .map(|(x, v)| x * x * v.abs())
        .fold(0.0, f64::max);
    let b = 1.0 / (2.0 * p.mass);
    let epsilon = binding / 10.0;
    let v_inf = 0.0;
    let denom = binding - v_inf - epsilon;
    let c_exp = if denom > 0.0 { ((a_prime + b) / denom).sqrt() } else { f64::NAN };
    let status = match weight {
        DecayWeight::One => Status::Skipped,
        DecayWeight::Abs if !(denom > 0.0) => Status::Skipped,
        DecayWeight::Abs => Status::from_bool(ratio <= c_exp),
    };
    Ok(DecayReport {
        ratio,
        c_exp,
        a_prime,
        b,
        epsilon,
        status,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CommutatorReport {
    /// `‖([x, H] − (i/m)(p − eA))φ‖` on interior sites below the top sector.
    pub below_cutoff: f64,
    /// Same, without any restriction. Includes the wrap-around term of the
    /// periodic grid, where `x` jumps by `L`.
    pub full: f64,
    /// Scale of the right-hand side, for context.
    pub rhs_norm: f64,
    /// Interior defect against the lattice form `(i/m)(p − e(SA + AS)/2)`,
    /// where `iS = [x, p]` is the two-site average of the central difference.
    pub lattice_defect: f64,
}

impl CommutatorReport {
    pub fn outcome(&self) -> CheckOutcome {
        CheckOutcome::bounded("pf_commutator", Tier::Exact, self.below_cutoff, 1e-8)
            .metric("full_defect", self.full)
            .metric("rhs_norm", self.rhs_norm)
            .metric("lattice_defect", self.lattice_defect)
    }
}

/// `[x⊗1, H]φ = (i/m)(p⊗1 − eA)φ` on the sectors below the cutoff and on
/// sites whose stencil does not wrap around the box, worst over the cluster.
pub fn pf_commutator_check(model: &AssembledModel, gs: &GroundStateResult) -> Result<CommutatorReport> {
    let p = parts(model)?;
    let d = model.fock_dim();
    let limit = model.basis.sector_range(model.basis.n_max()).start;
    let n_x = p.positions.len();
    let mut below = 0.0f64;
    let mut full = 0.0f64;
    let mut rhs_norm = 0.0f64;
    let mut lattice = 0.0f64;
    let s_op = p.position.commutator(&p.momentum)?.scaled(C64::new(0.0, -1.0));
    let sa = s_op.matmul(&p.vector_potential)?.add(&p.vector_potential.matmul(&s_op)?)?;
    let interior = |v: Vec<C64>| -> Vec<C64> {
        let mut v = mask_below(&v, d, limit);
        for (i, z) in v.iter_mut().enumerate() {
            let site = i / (2 * d);
            if site == 0 || site + 1 == n_x {
                *z = C64::new(0.0, 0.0);
            }
        }
        v
    };
    for phi in &gs.vectors {
        let x_h_phi = p.position.matvec(&model.h.matvec(phi));
        let h_x_phi = model.h.matvec(&p.position.matvec(phi));
        let lhs = sub(&x_h_phi, &h_x_phi);
        let mut kin = p.momentum.matvec(phi);
        axpy(C64::new(-p.charge, 0.0), &p.vector_potential.matvec(phi), &mut kin);
        let rhs: Vec<C64> = kin.iter().map(|z| z * C64::new(0.0, 1.0 / p.mass)).collect();
        let diff = sub(&lhs, &rhs);
        full = full.max(norm(&diff));
        below = below.max(norm(&interior(diff)));
        let mut kin_lat = p.momentum.matvec(phi);
        axpy(C64::new(-p.charge / 2.0, 0.0), &sa.matvec(phi), &mut kin_lat);
        let rhs_lat: Vec<C64> = kin_lat.iter().map(|z| z * C64::new(0.0, 1.0 / p.mass)).collect();
        lattice = lattice.max(norm(&interior(sub(&lhs, &rhs_lat))));
        rhs_norm = rhs_norm.max(norm(&rhs));
    }
    Ok(CommutatorReport {
        below_cutoff: below,
        full,
        rhs_norm,
        lattice_defect: lattice,
    })
}
