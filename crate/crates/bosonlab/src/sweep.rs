//! Parameter sweeps over a base configuration, family-level trend checks and
//! convergence-rate fits.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc;
use std::thread;

use bosonlab_core::verifier::{delta_trend, ir_classify, resolvent_convergence_check, CheckOutcome, IrClass, IrPoint, Status, Tier, SATURATION_WEIGHT};
use bosonlab_core::Error as CoreError;

use crate::config::{CheckKind, LambdaConfig, ModelKindConfig, RunConfig, DEFAULT_CELL_CAP};
use crate::pipeline::{build_model, configure, error_outcome, evaluate_cell};
use crate::report::{CellRecord, FamilyRecord, Provenance, Report};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SweepError {
    #[error("a sweep needs at least one axis")]
    NoAxes,
    #[error("axis `{0}` has no values")]
    EmptyAxis(String),
    #[error("axis `{0}` appears twice")]
    DuplicateAxis(String),
    #[error("{cells} cells exceed the cap of {cap}")]
    TooManyCells { cells: u128, cap: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPlan {
    pub base: RunConfig,
    /// Axes in nesting order: the first varies slowest.
    pub axes: Vec<(String, Vec<f64>)>,
    pub cell_cap: usize,
}

impl SweepPlan {
    /// Validates the axes. When a trend-tier check is enabled, each coupling
    /// axis gains a `0` anchor if it lacks one.
    pub fn new(base: RunConfig, mut axes: Vec<(String, Vec<f64>)>, cell_cap: usize) -> Result<Self, SweepError> {
        if axes.is_empty() {
            return Err(SweepError::NoAxes);
        }
        for (i, (name, values)) in axes.iter().enumerate() {
            if values.is_empty() {
                return Err(SweepError::EmptyAxis(name.clone()));
            }
            if axes[..i].iter().any(|(n, _)| n == name) {
                return Err(SweepError::DuplicateAxis(name.clone()));
            }
        }
        if base.checks.enabled.iter().any(CheckKind::has_trend) {
            for (name, values) in &mut axes {
                if RunConfig::is_coupling_axis(name) && !values.contains(&0.0) {
                    values.push(0.0);
                }
            }
        }
        let cells: u128 = axes.iter().map(|(_, v)| v.len() as u128).product();
        if cells > cell_cap as u128 {
            return Err(SweepError::TooManyCells { cells, cap: cell_cap });
        }
        Ok(Self { base, axes, cell_cap })
    }

    /// Plan from the `[sweep]` section of a configuration.
    pub fn from_config(cfg: &RunConfig) -> Result<Self, SweepError> {
        let s = cfg.sweep.as_ref().ok_or(SweepError::NoAxes)?;
        Self::new(cfg.clone(), s.axes.clone(), s.cell_cap)
    }

    /// One cell at the base parameters, used by single-model verification.
    pub fn single(base: RunConfig) -> Self {
        Self {
            base,
            axes: Vec::new(),
            cell_cap: DEFAULT_CELL_CAP,
        }
    }

    /// Parameter assignments of every cell in index order.
    pub fn cells(&self) -> Vec<Vec<(String, f64)>> {
        let mut out = vec![Vec::new()];
        for (name, values) in &self.axes {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    values.iter().map(move |&v| {
                        let mut p: Vec<(String, f64)> = prefix.clone();
                        p.push((name.clone(), v));
                        p
                    })
                })
                .collect();
        }
        out
    }

    fn coupling_axis(&self) -> Option<&str> {
        self.axes.iter().map(|(n, _)| n.as_str()).find(|n| RunConfig::is_coupling_axis(n))
    }
}

/// Maps `f` over `items` on a bounded pool of scoped workers. Results come
/// back through one channel and are placed by index, so the output order never
/// depends on completion order.
pub fn parallel_map<T: Sync, R: Send>(items: &[T], threads: usize, f: impl Fn(usize, &T) -> R + Sync) -> Vec<R> {
    let threads = threads.max(1).min(items.len().max(1));
    let next = AtomicUsize::new(0);
    let (tx, rx) = mpsc::channel();
    let mut slots: Vec<Option<R>> = (0..items.len()).map(|_| None).collect();
    thread::scope(|s| {
        for _ in 0..threads {
            let tx = tx.clone();
            let (next, f) = (&next, &f);
            s.spawn(move || loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= items.len() {
                    break;
                }
                if tx.send((i, f(i, &items[i]))).is_err() {
                    break;
                }
            });
        }
        drop(tx);
        for (i, r) in rx {
            slots[i] = Some(r);
        }
    });
    slots.into_iter().map(|r| r.expect("every item is processed")).collect()
}

/// Default worker count: available parallelism.
pub fn default_threads() -> usize {
    thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

/// Runs every cell, then every family-level check. Cell failures are
/// recorded and never abort the sweep.
pub fn run_sweep(plan: &SweepPlan, threads: usize) -> Report {
    let cells = plan.cells();
    let records = parallel_map(&cells, threads, |i, params| evaluate_cell(&plan.base, i, params));
    let jobs = family_jobs(plan, &records);
    let families = parallel_map(&jobs, threads, |_, job| run_family(plan, &records, job));
    Report {
        provenance: Provenance::new(&plan.base.config_hash, plan.base.seed()),
        cells: records,
        families,
    }
}

struct FamilyJob {
    kind: CheckKind,
    axis: String,
    fixed: Vec<(String, f64)>,
    members: Vec<usize>,
}

/// Groups cells that agree on every parameter except `axis`.
type Group = (Vec<(String, f64)>, Vec<usize>);

fn group_by_axis(records: &[CellRecord], axis: &str) -> Vec<Group> {
    let mut groups: Vec<Group> = Vec::new();
    for r in records {
        let fixed: Vec<(String, f64)> = r.params.iter().filter(|(n, _)| n != axis).cloned().collect();
        match groups.iter_mut().find(|(f, _)| f.len() == fixed.len() && f.iter().zip(&fixed).all(|(a, b)| a.0 == b.0 && a.1.to_bits() == b.1.to_bits())) {
            Some((_, members)) => members.push(r.index),
            None => groups.push((fixed, vec![r.index])),
        }
    }
    groups
}

fn family_jobs(plan: &SweepPlan, records: &[CellRecord]) -> Vec<FamilyJob> {
    let mut jobs = Vec::new();
    for &kind in &plan.base.checks.enabled {
        let axis = match kind {
            CheckKind::Overlap | CheckKind::Resolvent => plan.coupling_axis(),
            CheckKind::IrProbe => plan.axes.iter().map(|(n, _)| n.as_str()).find(|n| *n == "k_min"),
            _ => continue,
        };
        let Some(axis) = axis else {
            if kind.is_family() {
                jobs.push(FamilyJob {
                    kind,
                    axis: String::new(),
                    fixed: Vec::new(),
                    members: Vec::new(),
                });
            }
            continue;
        };
        for (fixed, mut members) in group_by_axis(records, axis) {
            // Strongest coupling or largest infrared cutoff first.
            let key = |i: &usize| records[*i].param(axis).unwrap_or(0.0).abs();
            members.sort_by(|a, b| key(b).total_cmp(&key(a)));
            jobs.push(FamilyJob {
                kind,
                axis: axis.to_string(),
                fixed,
                members,
            });
        }
    }
    jobs
}

fn family_outcome_name(kind: CheckKind) -> &'static str {
    match kind {
        CheckKind::Overlap => "overlap_delta_trend",
        CheckKind::Resolvent => "resolvent_trend",
        _ => "ir_probe",
    }
}

fn run_family(plan: &SweepPlan, records: &[CellRecord], job: &FamilyJob) -> FamilyRecord {
    let checks = match family_checks(plan, records, job) {
        Ok(c) => c,
        Err(e) => vec![error_outcome(job.kind, &e)],
    };
    FamilyRecord {
        axis: job.axis.clone(),
        fixed: job.fixed.clone(),
        cells: job.members.clone(),
        checks,
    }
}

fn family_checks(plan: &SweepPlan, records: &[CellRecord], job: &FamilyJob) -> Result<Vec<CheckOutcome>, CoreError> {
    let name = family_outcome_name(job.kind);
    let skip = |why: &str| Ok(vec![CheckOutcome::with_status(name, Tier::Trend, Status::Skipped, why)]);
    if job.axis.is_empty() {
        return skip(match job.kind {
            CheckKind::IrProbe => "needs a k_min axis",
            _ => "needs a coupling axis",
        });
    }
    let members: Vec<&CellRecord> = job.members.iter().map(|&i| &records[i]).collect();
    let failed: Vec<usize> = members.iter().filter(|r| r.failure.is_some()).map(|r| r.index).collect();
    let ok: Vec<&CellRecord> = members.iter().copied().filter(|r| r.failure.is_none()).collect();
    let failed_note = if failed.is_empty() { String::new() } else { format!("failed cells excluded: {failed:?}") };
    match job.kind {
        CheckKind::Overlap => {
            let deltas: Vec<f64> = ok.iter().map(|r| r.delta).collect();
            if deltas.len() < 2 || deltas.iter().any(|d| d.is_nan()) {
                return skip("needs two or more cells with a defined delta");
            }
            Ok(vec![append_note(delta_trend(&deltas), &failed_note)])
        }
        CheckKind::Resolvent => {
            let nonzero: Vec<&CellRecord> = ok.iter().copied().filter(|r| r.param(&job.axis) != Some(0.0)).collect();
            if nonzero.len() < 2 {
                return skip("needs two or more non-zero couplings");
            }
            let mut models = Vec::with_capacity(nonzero.len());
            for r in &nonzero {
                let cfg = configure(&plan.base, &r.params).map_err(|e| CoreError::InvalidArgument { field: "sweep", reason: e })?;
                models.push(build_model(&cfg)?);
            }
            match resolvent_convergence_check(&models, plan.base.checks.resolvent_z, &plan.base.solver) {
                Ok(rep) => Ok(rep.outcomes().into_iter().map(|o| if o.check == "resolvent_trend" { append_note(o, &failed_note) } else { o }).collect()),
                Err(CoreError::TooLargeForDense { dim, threshold }) => skip(&format!("dimension {dim} above dense threshold {threshold}")),
                Err(e) => Err(e),
            }
        }
        CheckKind::IrProbe => {
            let cfg = configure(&plan.base, &job.fixed).map_err(|e| CoreError::InvalidArgument { field: "sweep", reason: e })?;
            if cfg.coupling() == 0.0 {
                return skip("decoupled anchor");
            }
            let expected = match (plan.base.checks.ir_expect, &cfg.model.kind) {
                (Some(c), _) => c,
                (None, ModelKindConfig::SpinBoson { beta, .. }) => default_ir_class(*beta),
                (None, ModelKindConfig::Gsb { couplings, .. }) => match couplings.first().map(|c| &c.lambda) {
                    Some(LambdaConfig::Preset { beta, .. }) => default_ir_class(*beta),
                    _ => return skip("set checks.ir_expect for explicit form factors"),
                },
                (None, ModelKindConfig::PfToy { .. }) => return skip("set checks.ir_expect for the Pauli-Fierz toy model"),
            };
            let mut points = Vec::with_capacity(ok.len());
            for r in &ok {
                let c = configure(&plan.base, &r.params).map_err(|e| CoreError::InvalidArgument { field: "sweep", reason: e })?;
                points.push(IrPoint {
                    k_min: r.param("k_min").unwrap_or(f64::NAN),
                    modes: c.mode_grid()?.len(),
                    mean_number: r.mean_number,
                    top_sector_weight: r.top_sector_weight,
                    flagged: r.top_sector_weight > SATURATION_WEIGHT,
                });
            }
            Ok(vec![append_note(ir_classify(points, expected).outcome(), &failed_note)])
        }
        _ => Ok(Vec::new()),
    }
}

fn append_note(mut o: CheckOutcome, extra: &str) -> CheckOutcome {
    if !extra.is_empty() {
        o.note = if o.note.is_empty() { extra.to_string() } else { format!("{}; {extra}", o.note) };
    }
    o
}

/// Non-negative exponents are expected to give a convergent boson number.
fn default_ir_class(beta: f64) -> IrClass {
    if beta >= 0.0 {
        IrClass::Regular
    } else {
        IrClass::Divergent
    }
}

// ---------------------------------------------------------------------------
// Convergence fits

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitModel {
    /// `value ≈ C · rate^parameter`; the rate is the factor per unit step.
    Geometric,
    /// `value ≈ C · parameter^rate`; the rate is the exponent.
    Power,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceFit {
    pub rate: f64,
    pub prefactor: f64,
    /// Coefficient of determination of the log-space fit.
    pub r2: f64,
    /// False when the fitted law does not decay as the parameter grows.
    pub converging: bool,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FitError {
    #[error("need at least 3 points, got {0}")]
    TooFewPoints(usize),
    #[error("value {0} at position {1} is not positive and finite")]
    NonPositiveValue(f64, usize),
    #[error("parameter {0} at position {1} is not positive and finite")]
    NonPositiveParameter(f64, usize),
    #[error("all parameters are equal")]
    DegenerateParameters,
}

/// Least-squares fit of `log(value)` against the parameter (geometric) or its
/// logarithm (power).
pub fn fit_convergence(series: &[(f64, f64)], model: FitModel) -> Result<ConvergenceFit, FitError> {
    if series.len() < 3 {
        return Err(FitError::TooFewPoints(series.len()));
    }
    let mut xs = Vec::with_capacity(series.len());
    let mut ys = Vec::with_capacity(series.len());
    for (i, &(p, v)) in series.iter().enumerate() {
        if !(v > 0.0 && v.is_finite()) {
            return Err(FitError::NonPositiveValue(v, i));
        }
        let x = match model {
            FitModel::Geometric if p.is_finite() => p,
            FitModel::Power if p > 0.0 && p.is_finite() => p.ln(),
            _ => return Err(FitError::NonPositiveParameter(p, i)),
        };
        xs.push(x);
        ys.push(v.ln());
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(FitError::DegenerateParameters);
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let ss_res: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let tiny = 1e-24 * ys.iter().map(|y| y * y).sum::<f64>().max(1.0);
    let r2 = if ss_tot <= tiny { 1.0 } else { 1.0 - ss_res / ss_tot };
    // Slopes within rounding of zero count as flat.
    let flat = slope.abs() <= 1e-12 * (1.0 + my.abs());
    let (rate, converging) = match model {
        FitModel::Geometric => {
            let rate = if flat { 1.0 } else { slope.exp() };
            (rate, rate < 1.0)
        }
        FitModel::Power => {
            let rate = if flat { 0.0 } else { slope };
            (rate, rate < 0.0)
        }
    };
    Ok(ConvergenceFit {
        rate,
        prefactor: intercept.exp(),
        r2,
        converging,
    })
}
