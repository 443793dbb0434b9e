//! Overlap, multiplicity, resolvent-convergence and massive-number bounds.

use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;

use super::report::{decreasing_with_slack, CheckOutcome, Status, Tier};
use crate::error::{Error, Result};
use crate::model::{AssembledModel, ModelKind};
use crate::rng::random_unit_vector;
use crate::spectral::{eigh, spectral_norm, GroundStateResult, ResolventSolver, SpectralConfig};
use crate::vecops::{dot, norm, normalize};

/// Slack allowed in monotone trends.
pub const TREND_SLACK: f64 = 0.10;
/// Violation allowed in literal inequalities.
pub const INEQUALITY_TOL: f64 = 1e-10;

/// `‖H_I (H̄₀ + 1)⁻¹‖`, the relative-bound constant used for both `a` and `b`.
pub fn relative_bound_constant(model: &AssembledModel, cfg: &SpectralConfig) -> Result<f64> {
    let n = model.dim();
    let e0 = model.e_h0();
    if n <= cfg.dense_threshold {
        let eig = eigh(&model.h0.to_dense());
        let inv = eig.function_matrix(|l| C64::new(1.0 / (l - e0 + 1.0), 0.0));
        return Ok(spectral_norm(&(model.h_int.to_dense() * inv)));
    }
    // Power iteration on K H_I² K with K = (H̄₀ + 1)⁻¹ applied by CG.
    let solver = ResolventSolver::new(&model.h0, e0, cfg, None);
    let mut rng = crate::rng::seeded(cfg.seed ^ 0xb0);
    let mut v = random_unit_vector(&mut rng, n);
    let mut est = 0.0f64;
    for _ in 0..cfg.max_restarts * 10 {
        let kv = solver.solve(1.0, &v)?;
        let hkv = model.h_int.matvec(&kv);
        let w = solver.solve(1.0, &model.h_int.matvec(&hkv))?;
        let lam = norm(&w);
        if lam == 0.0 {
            return Ok(0.0);
        }
        v = w;
        normalize(&mut v);
        let done = (lam - est).abs() <= 1e-8 * lam;
        est = lam;
        if done {
            return Ok(est.sqrt());
        }
    }
    Err(Error::NoConvergence {
        method: "relative bound power iteration",
        iterations: cfg.max_restarts * 10,
        residual: f64::NAN,
    })
}

/// `‖H_I ψ‖ ≤ a(‖H̄₀ψ‖ + ‖ψ‖)` on random vectors.
pub fn relative_bound_check<R: Rng>(model: &AssembledModel, a: f64, samples: usize, rng: &mut R) -> CheckOutcome {
    let h0bar = model.h0_bar();
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..samples {
        let psi = random_unit_vector(rng, model.dim());
        let lhs = norm(&model.h_int.matvec(&psi));
        let rhs = a * (norm(&h0bar.matvec(&psi)) + 1.0);
        worst = worst.max(lhs - rhs);
    }
    CheckOutcome::bounded("relative_bound", Tier::Inequality, worst, INEQUALITY_TOL * a.max(1.0))
        .metric("a", a)
        .metric("samples", samples as f64)
}

/// Compares the assembled `T_m` with the numerically computed `[a_m, H_I]` on
/// columns the truncation cannot reach: below the top sector for the GSB
/// model, below the top two for the PF toy, whose `A²` term adds two bosons.
pub fn interaction_commutator_check(model: &AssembledModel) -> Result<CheckOutcome> {
    let d = model.fock_dim();
    let reach = match model.kind {
        ModelKind::Gsb => 1,
        ModelKind::PfToy => 2,
    };
    let n_max = model.basis.n_max();
    if n_max < reach {
        return Ok(CheckOutcome::with_status("interaction_commutator", Tier::Exact, Status::Skipped, "cutoff too small"));
    }
    let limit = model.basis.sector_range(n_max + 1 - reach).start;
    let mut worst = 0.0f64;
    let mut scale = 0.0f64;
    for (a, t) in model.lowers.iter().zip(&model.t_ops) {
        let c = a.commutator(&model.h_int)?.sub(t)?;
        for (_, col, v) in c.triplets() {
            if col % d < limit {
                worst = worst.max(v.norm());
            }
        }
        scale = scale.max(t.max_abs());
    }
    Ok(CheckOutcome::bounded("interaction_commutator", Tier::Exact, worst, 1e-12 * scale.max(1.0)))
}

fn cluster_matrix(vectors: &[Vec<C64>], op: impl Fn(&[C64]) -> Vec<C64>) -> DMatrix<C64> {
    let applied: Vec<Vec<C64>> = vectors.iter().map(|v| op(v)).collect();
    DMatrix::from_fn(vectors.len(), vectors.len(), |i, j| dot(&vectors[i], &applied[j]))
}

#[derive(Debug, Clone, PartialEq)]
pub struct OverlapReport {
    pub coupling: f64,
    /// `min ⟨φ, (P_A⊗P_Ω) φ⟩ / ‖φ‖²` over the ground cluster.
    pub overlap: f64,
    pub delta: f64,
    pub c: f64,
    pub c_int: f64,
    pub a: f64,
    pub b: f64,
    pub eps_gap: f64,
    /// `E(H) − E(H₀)`
    pub e_shift: f64,
    /// `overlap − (1 − δ)`; only meaningful when `δ < 1`.
    pub margin: f64,
    pub in_regime: bool,
}

impl OverlapReport {
    pub fn outcome(&self) -> CheckOutcome {
        let base = if self.in_regime {
            CheckOutcome::bounded("overlap_delta", Tier::Inequality, -self.margin, INEQUALITY_TOL)
        } else {
            let mut o = CheckOutcome::with_status("overlap_delta", Tier::Inequality, Status::Skipped, "delta >= 1: out of regime");
            o.measured = -self.margin;
            o.tolerance = INEQUALITY_TOL;
            o
        };
        base.and(self.overlap > 0.0)
            .metric("coupling", self.coupling)
            .metric("overlap", self.overlap)
            .metric("delta", self.delta)
            .metric("c", self.c)
            .metric("c_int", self.c_int)
            .metric("a", self.a)
            .metric("eps_gap", self.eps_gap)
    }
}

/// Ground-state overlap with `P_A ⊗ P_Ω` against the lower bound `1 − δ(g)`.
///
/// `δ(g) = c(g)² + 2|g| c_int / (ε_gap − E(H_q))` with
/// `c_int = a(E(H_q) + |g|b)/(1 − a|g|) + b`, `E(H_q) = E(H) − E(H₀)` and
/// `c(g)² = max ⟨φ, Nφ⟩` over unit vectors of the cluster.
pub fn overlap_delta(model: &AssembledModel, gs: &GroundStateResult, cfg: &SpectralConfig) -> Result<OverlapReport> {
    if !(model.atom.gap > 0.0) {
        return Err(Error::invalid("atom", "overlap bound needs a positive atom gap"));
    }
    let g = model.coupling.abs();
    let a = relative_bound_constant(model, cfg)?;
    let b = a;
    let e_shift = gs.energy - model.e_h0();
    let eps_gap = model.atom.gap;

    let n_mat = cluster_matrix(&gs.vectors, |v| model.number.matvec(v));
    let c2 = eigh(&n_mat).values.last().copied().unwrap_or(0.0).max(0.0);

    let p_vecs = model.ground_product_vectors();
    let p_mat = cluster_matrix(&gs.vectors, |v| {
        let mut out = crate::vecops::zeros(v.len());
        for p in &p_vecs {
            crate::vecops::axpy(dot(p, v), p, &mut out);
        }
        out
    });
    let overlap = eigh(&p_mat).values[0];

    let (c_int, delta) = if g == 0.0 {
        (b, c2)
    } else if a * g < 1.0 {
        let c_int = a * (e_shift + g * b) / (1.0 - a * g) + b;
        let tail = if eps_gap.is_infinite() { 0.0 } else { 2.0 * g * c_int / (eps_gap - e_shift) };
        (c_int, c2 + tail)
    } else {
        (f64::INFINITY, f64::INFINITY)
    };
    Ok(OverlapReport {
        coupling: model.coupling,
        overlap,
        delta,
        c: c2.sqrt(),
        c_int,
        a,
        b,
        eps_gap,
        e_shift,
        margin: overlap - (1.0 - delta),
        in_regime: delta < 1.0,
    })
}

/// Overlap reports over a coupling family plus the `δ(g) ↓ 0` trend, in the
/// order given (strongest coupling first).
pub fn overlap_delta_check(family: &[(AssembledModel, GroundStateResult)], cfg: &SpectralConfig) -> Result<(Vec<OverlapReport>, CheckOutcome)> {
    let reports = family
        .iter()
        .map(|(m, gs)| overlap_delta(m, gs, cfg))
        .collect::<Result<Vec<_>>>()?;
    let deltas: Vec<f64> = reports.iter().map(|r| r.delta).collect();
    let trend = delta_trend(&deltas);
    Ok((reports, trend))
}

/// `δ(g) ↓ 0` over values ordered from strongest coupling to weakest.
pub fn delta_trend(deltas: &[f64]) -> CheckOutcome {
    let ok = decreasing_with_slack(deltas, TREND_SLACK) && deltas.last() <= deltas.first();
    let mut o = CheckOutcome::with_status("overlap_delta_trend", Tier::Trend, Status::from_bool(ok && deltas.len() >= 2), "");
    if let (Some(&first), Some(&last)) = (deltas.first(), deltas.last()) {
        o.measured = if first > 0.0 { last / first } else { last };
        o.tolerance = 1.0;
    }
    o.metric("first_delta", deltas.first().copied().unwrap_or(f64::NAN))
        .metric("last_delta", deltas.last().copied().unwrap_or(f64::NAN))
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultiplicityReport {
    pub coupling: f64,
    pub cluster: usize,
    pub atom_multiplicity: usize,
    pub gap: f64,
    /// Largest Rayleigh quotient in the cluster minus the ground energy.
    pub spread: f64,
    /// Gap divided by the cluster detection width.
    pub gap_ratio: f64,
    pub ambiguous: bool,
    pub status: Status,
}

impl MultiplicityReport {
    pub fn outcome(&self) -> CheckOutcome {
        let mut o = CheckOutcome::with_status("multiplicity", Tier::Inequality, self.status, if self.ambiguous { "gap below 10x cluster width" } else { "" });
        o.measured = self.cluster as f64;
        o.tolerance = self.atom_multiplicity as f64;
        o.metric("coupling", self.coupling)
            .metric("gap", self.gap)
            .metric("gap_ratio", self.gap_ratio)
            .metric("spread", self.spread)
    }
}

/// Asserts `m(H) ≤ m(A)`, or `m(H) = expected` when an exact count is known.
pub fn multiplicity_check(model: &AssembledModel, gs: &GroundStateResult, expected: Option<usize>) -> MultiplicityReport {
    let spread = gs
        .vectors
        .iter()
        .map(|v| dot(v, &model.h.matvec(v)).re - gs.energy)
        .fold(0.0, f64::max);
    let ambiguous = gs.is_ambiguous();
    let ok = match expected {
        Some(k) => gs.multiplicity == k,
        None => gs.multiplicity <= model.atom.multiplicity,
    };
    MultiplicityReport {
        coupling: model.coupling,
        cluster: gs.multiplicity,
        atom_multiplicity: expected.unwrap_or(model.atom.multiplicity),
        gap: gs.gap,
        spread,
        gap_ratio: gs.gap / gs.cluster_width,
        ambiguous,
        status: if ambiguous { Status::Inconclusive } else { Status::from_bool(ok) },
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResolventPoint {
    pub coupling: f64,
    /// `‖(H_g − E(H₀) − z)⁻¹ − (H̄₀ − z)⁻¹‖`
    pub n: f64,
    pub bound: f64,
    pub d_g: f64,
    pub a: f64,
    /// `|E(H_g) − E(H₀)|`
    pub energy_shift: f64,
    pub energy_bound: f64,
    pub bound_applies: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResolventReport {
    pub points: Vec<ResolventPoint>,
    pub k0_hi_k0: f64,
    pub d_zero: f64,
    pub decreasing: bool,
    pub final_ratio: f64,
}

impl ResolventReport {
    pub fn outcomes(&self) -> Vec<CheckOutcome> {
        let mut out = Vec::new();
        for p in &self.points {
            let o = if p.bound_applies {
                CheckOutcome::bounded("resolvent_bound", Tier::Inequality, p.n - p.bound, INEQUALITY_TOL)
            } else {
                CheckOutcome::with_status("resolvent_bound", Tier::Inequality, Status::Skipped, "a|g| >= 1")
            };
            out.push(o.and(p.energy_shift <= p.energy_bound).metric("coupling", p.coupling).metric("n", p.n).metric("bound", p.bound).metric("energy_shift", p.energy_shift));
        }
        out.push(
            CheckOutcome::bounded("resolvent_trend", Tier::Trend, self.final_ratio, 0.25)
                .and(self.decreasing)
                .metric("points", self.points.len() as f64),
        );
        out
    }
}

/// `sup_{λ ≥ λ_min} |λ + c| / |λ − z|²` by checking the endpoint and the
/// stationary points `λ = x − (x + c) ± √((x + c)² + y²)`.
pub fn sup_ratio(lambda_min: f64, c: f64, z: C64) -> f64 {
    let (x, y) = (z.re, z.im);
    let f = |l: f64| (l + c).abs() / ((l - x) * (l - x) + y * y);
    let s = ((x + c) * (x + c) + y * y).sqrt();
    let mut best = f(lambda_min);
    for u in [-(x + c) + s, -(x + c) - s] {
        let l = x + u;
        if l >= lambda_min {
            best = best.max(f(l));
        }
    }
    best
}

/// Resolvent convergence `(H_g − E(H₀) − z)⁻¹ → (H̄₀ − z)⁻¹` with the
/// proof-chain bound `n(g) ≤ |g| D(g) D(0) ‖K₀ H_I K₀‖`.
pub fn resolvent_convergence_check(family: &[AssembledModel], z: C64, cfg: &SpectralConfig) -> Result<ResolventReport> {
    let first = family.first().ok_or_else(|| Error::invalid("family", "empty coupling family"))?;
    let dim = first.dim();
    if dim > cfg.dense_threshold {
        return Err(Error::TooLargeForDense {
            dim,
            threshold: cfg.dense_threshold,
        });
    }
    let e0 = first.e_h0();
    let h0_eig = eigh(&first.h0.to_dense());
    let r0 = h0_eig.function_matrix(|l| C64::new(1.0, 0.0) / (C64::new(l - e0, 0.0) - z));
    let k0 = h0_eig.function_matrix(|l| C64::new(1.0 / (l - e0 + 1.0).sqrt(), 0.0));
    let inv_im = 1.0 / z.im.abs();
    // D(0): H̄₀ ≥ 0, so the supremum runs over λ ≥ 0 with c = 0.
    let d_zero = sup_ratio(0.0, 0.0, z).sqrt() + inv_im;

    let mut points = Vec::with_capacity(family.len());
    let mut k0_hi_k0 = 0.0f64;
    for model in family {
        let g = model.coupling.abs();
        let hi = model.h_int.to_dense();
        let khk = spectral_norm(&(&k0 * &hi * &k0));
        k0_hi_k0 = k0_hi_k0.max(khk);
        let a = relative_bound_constant(model, cfg)?;
        let b = a;
        let hg_eig = eigh(&model.h.to_dense());
        let rg = hg_eig.function_matrix(|l| C64::new(1.0, 0.0) / (C64::new(l - e0, 0.0) - z));
        let n = spectral_norm(&(rg - &r0));
        let lambda_min = hg_eig.values[0] - e0;
        let bound_applies = a * g < 1.0;
        let (d_g, bound) = if bound_applies {
            let d = sup_ratio(lambda_min, g * b, z) / (1.0 - g * a);
            let d_g = d.sqrt() + inv_im;
            (d_g, g * d_g * d_zero * khk)
        } else {
            (f64::INFINITY, f64::INFINITY)
        };
        let energy_shift = (hg_eig.values[0] - e0).abs();
        points.push(ResolventPoint {
            coupling: model.coupling,
            n,
            bound,
            d_g,
            a,
            energy_shift,
            energy_bound: 2.0 * a * g * e0.abs().max(1.0),
            bound_applies,
        });
    }
    let ns: Vec<f64> = points.iter().map(|p| p.n).collect();
    let final_ratio = match (ns.first(), ns.last()) {
        (Some(&f), Some(&l)) if f > 0.0 => l / f,
        _ => f64::NAN,
    };
    Ok(ResolventReport {
        decreasing: decreasing_with_slack(&ns, TREND_SLACK),
        final_ratio,
        points,
        k0_hi_k0,
        d_zero,
    })
}

/// `‖(1⊗N)ψ‖ ≤ (1/ν)‖(1⊗dΓ(ω_ν))ψ‖` on the given states plus random ones.
pub fn massive_bound_check<R: Rng>(model: &AssembledModel, states: &[Vec<C64>], random: usize, rng: &mut R) -> Result<CheckOutcome> {
    let nu = model.mass;
    if !(nu > 0.0) {
        return Ok(CheckOutcome::with_status("massive_bound", Tier::Inequality, Status::Skipped, "massless dispersion"));
    }
    let mut all: Vec<Vec<C64>> = states.to_vec();
    all.extend((0..random).map(|_| random_unit_vector(rng, model.dim())));
    let mut worst = f64::NEG_INFINITY;
    for psi in &all {
        let lhs = norm(&model.number.matvec(psi));
        let rhs = norm(&model.field_energy.matvec(psi)) / nu;
        worst = worst.max(lhs - rhs);
    }
    Ok(CheckOutcome::bounded("massive_bound", Tier::Inequality, worst, INEQUALITY_TOL)
        .metric("mass", nu)
        .metric("states", all.len() as f64))
}

/// Keeps only the columns with Fock index below `limit` in each atom block.
pub(crate) fn mask_below(v: &[C64], fock_dim: usize, limit: usize) -> Vec<C64> {
    v.iter()
        .enumerate()
        .map(|(i, &z)| if i % fock_dim < limit { z } else { C64::new(0.0, 0.0) })
        .collect()
}
