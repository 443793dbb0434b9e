//! Run configuration: a TOML document with the sections `model`, `grid`,
//! `solver`, `checks`, `sweep` and `output`. See the README for the grammar.

use std::collections::HashMap;
use std::fmt;
use std::path::PathBuf;

use bosonlab_core::fock::{ModeGrid, DEFAULT_DIMENSION_CAP};
use bosonlab_core::model::{
    dispersion_grid, form_factor_preset, pf_positions, spin_boson_preset, square_well, CouplingTerm, Dispersion, GsbSpec, PfToySpec, Quadrature,
    Window,
};
use bosonlab_core::spectral::SpectralConfig;
use bosonlab_core::verifier::IrClass;
use bosonlab_core::{Error as CoreError, C64};
use nalgebra::DMatrix;
use sha2::{Digest, Sha256};
use toml::de::{DeTable, DeValue};
use toml::{Table, Value};

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigIssue {
    /// Dotted path of the offending field, or `"<syntax>"`.
    pub field: String,
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}: {}", self.field, self.message),
            None => write!(f, "{}: {}", self.field, self.message),
        }
    }
}

/// Every problem found in a configuration, not just the first.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub struct ConfigError {
    pub issues: Vec<ConfigIssue>,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "invalid configuration ({} problem(s)):", self.issues.len())?;
        for i in &self.issues {
            writeln!(f, "  {i}")?;
        }
        Ok(())
    }
}

impl ConfigError {
    pub fn mentions(&self, field: &str) -> bool {
        self.issues.iter().any(|i| i.field == field)
    }
}

/// Every check the pipeline knows, in execution order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CheckKind {
    Algebra,
    NumberIdentity,
    PullThrough,
    NumberFormula,
    HsInvariance,
    Overlap,
    Multiplicity,
    RelativeBound,
    InteractionCommutator,
    MassiveBound,
    BindingEnergy,
    SpatialDecay,
    PfCommutator,
    Resolvent,
    IrProbe,
}

impl CheckKind {
    pub const ALL: [CheckKind; 15] = [
        CheckKind::Algebra,
        CheckKind::NumberIdentity,
        CheckKind::PullThrough,
        CheckKind::NumberFormula,
        CheckKind::HsInvariance,
        CheckKind::Overlap,
        CheckKind::Multiplicity,
        CheckKind::RelativeBound,
        CheckKind::InteractionCommutator,
        CheckKind::MassiveBound,
        CheckKind::BindingEnergy,
        CheckKind::SpatialDecay,
        CheckKind::PfCommutator,
        CheckKind::Resolvent,
        CheckKind::IrProbe,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            CheckKind::Algebra => "algebra",
            CheckKind::NumberIdentity => "number_identity",
            CheckKind::PullThrough => "pull_through",
            CheckKind::NumberFormula => "number_formula",
            CheckKind::HsInvariance => "hs_invariance",
            CheckKind::Overlap => "overlap",
            CheckKind::Multiplicity => "multiplicity",
            CheckKind::RelativeBound => "relative_bound",
            CheckKind::InteractionCommutator => "interaction_commutator",
            CheckKind::MassiveBound => "massive_bound",
            CheckKind::BindingEnergy => "binding_energy",
            CheckKind::SpatialDecay => "spatial_decay",
            CheckKind::PfCommutator => "pf_commutator",
            CheckKind::Resolvent => "resolvent",
            CheckKind::IrProbe => "ir_probe",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|k| k.name() == s)
    }

    /// Checks with a trend-tier component evaluated over a sweep family.
    pub fn has_trend(&self) -> bool {
        matches!(self, CheckKind::Overlap | CheckKind::Resolvent | CheckKind::IrProbe)
    }

    /// Checks that only make sense over a family of cells.
    pub fn is_family(&self) -> bool {
        matches!(self, CheckKind::Resolvent | CheckKind::IrProbe)
    }

    fn default_on(&self) -> bool {
        !self.is_family()
    }
}

/// Parses a comma-separated check list such as `pull_through,overlap`.
pub fn parse_check_list(list: &str) -> Result<Vec<CheckKind>, String> {
    let mut out = Vec::new();
    for name in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        match CheckKind::parse(name) {
            Some(k) if !out.contains(&k) => out.push(k),
            Some(_) => {}
            None => return Err(format!("unknown check `{name}`")),
        }
    }
    out.sort_by_key(|k| CheckKind::ALL.iter().position(|x| x == k));
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub enum LambdaConfig {
    /// `ω^β · window · √w` on the configured grid.
    Preset { beta: f64, window: Window },
    Explicit(Vec<C64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CouplingConfig {
    pub b: DMatrix<C64>,
    pub lambda: LambdaConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PotentialConfig {
    SquareWell { depth: f64, half_width: f64 },
    Samples(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelKindConfig {
    SpinBoson {
        epsilon: f64,
        delta: f64,
        beta: f64,
        window: Window,
        alpha: f64,
    },
    Gsb {
        atom: DMatrix<C64>,
        couplings: Vec<CouplingConfig>,
        alpha: f64,
    },
    PfToy {
        n_x: usize,
        length: f64,
        mass: f64,
        charge: f64,
        potential: PotentialConfig,
        /// One value for every mode, or per-mode samples.
        form_factor: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    pub kind: ModelKindConfig,
    pub n_max: usize,
    pub dimension_cap: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModesConfig {
    Count(usize),
    /// Cells per factor of two in `k_max / k_min`, rounded.
    PerOctave(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub enum GridConfig {
    Dispersion {
        dispersion: Dispersion,
        k_min: f64,
        k_max: f64,
        modes: ModesConfig,
        quadrature: Quadrature,
    },
    Explicit {
        k_points: Vec<f64>,
        weights: Vec<f64>,
        omega: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChecksConfig {
    pub enabled: Vec<CheckKind>,
    /// Overrides keyed by outcome name.
    pub tolerances: Vec<(String, f64)>,
    pub random_states: usize,
    pub massive_random: usize,
    pub hs_trials: usize,
    pub relative_bound_samples: usize,
    pub resolvent_z: C64,
    pub ir_expect: Option<IrClass>,
    pub multiplicity_expected: Option<usize>,
}

impl Default for ChecksConfig {
    fn default() -> Self {
        Self {
            enabled: CheckKind::ALL.iter().copied().filter(CheckKind::default_on).collect(),
            tolerances: Vec::new(),
            random_states: 10,
            massive_random: 20,
            hs_trials: 5,
            relative_bound_samples: 100,
            resolvent_z: C64::new(0.0, 1.0),
            ir_expect: None,
            multiplicity_expected: None,
        }
    }
}

impl ChecksConfig {
    pub fn is_enabled(&self, k: CheckKind) -> bool {
        self.enabled.contains(&k)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub axes: Vec<(String, Vec<f64>)>,
    pub cell_cap: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

impl Format {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "json" | "jsonl" | "json-lines" => Some(Format::Json),
            "csv" => Some(Format::Csv),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputConfig {
    pub dir: Option<PathBuf>,
    pub formats: Vec<Format>,
    pub name: String,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: None,
            formats: vec![Format::Json],
            name: "report".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub model: ModelConfig,
    pub grid: GridConfig,
    pub solver: SpectralConfig,
    pub checks: ChecksConfig,
    pub sweep: Option<SweepConfig>,
    pub output: OutputConfig,
    /// SHA-256 of the configuration text, hex encoded.
    pub config_hash: String,
}

/// Parameters a sweep axis may vary.
pub const AXIS_NAMES: [&str; 13] = [
    "coupling", "alpha", "charge", "n_max", "modes", "k_min", "k_max", "mass", "beta", "epsilon", "delta", "well_depth", "n_x",
];

pub const DEFAULT_CELL_CAP: usize = 10_000;

impl RunConfig {
    pub fn seed(&self) -> u64 {
        self.solver.seed
    }

    /// `α` for spin-boson and GSB models, `e` for the Pauli-Fierz toy.
    pub fn coupling(&self) -> f64 {
        match &self.model.kind {
            ModelKindConfig::SpinBoson { alpha, .. } | ModelKindConfig::Gsb { alpha, .. } => *alpha,
            ModelKindConfig::PfToy { charge, .. } => *charge,
        }
    }

    /// True for axis names that move the coupling constant.
    pub fn is_coupling_axis(name: &str) -> bool {
        matches!(name, "coupling" | "alpha" | "charge")
    }

    /// Sets one named parameter, as used by sweep axes.
    pub fn set_param(&mut self, name: &str, value: f64) -> Result<(), String> {
        let as_count = |v: f64| -> Result<usize, String> {
            if v >= 0.0 && v.fract() == 0.0 && v <= u32::MAX as f64 {
                Ok(v as usize)
            } else {
                Err(format!("`{name}` needs a non-negative integer, got {v}"))
            }
        };
        let wrong_model = || Err(format!("parameter `{name}` does not apply to this model"));
        match (name, &mut self.model.kind) {
            ("coupling" | "alpha", ModelKindConfig::SpinBoson { alpha, .. } | ModelKindConfig::Gsb { alpha, .. }) => *alpha = value,
            ("coupling" | "charge", ModelKindConfig::PfToy { charge, .. }) => *charge = value,
            ("beta", ModelKindConfig::SpinBoson { beta, .. }) => *beta = value,
            ("epsilon", ModelKindConfig::SpinBoson { epsilon, .. }) => *epsilon = value,
            ("delta", ModelKindConfig::SpinBoson { delta, .. }) => *delta = value,
            ("well_depth", ModelKindConfig::PfToy { potential, .. }) => match potential {
                PotentialConfig::SquareWell { depth, .. } => *depth = value,
                PotentialConfig::Samples(_) => return Err("`well_depth` needs a square-well potential".into()),
            },
            ("n_x", ModelKindConfig::PfToy { n_x, .. }) => *n_x = as_count(value)?,
            ("n_max", _) => self.model.n_max = as_count(value)?,
            ("modes" | "k_min" | "k_max" | "mass", _) => {
                let GridConfig::Dispersion {
                    dispersion,
                    k_min,
                    k_max,
                    modes,
                    ..
                } = &mut self.grid
                else {
                    return Err(format!("`{name}` needs a dispersion grid"));
                };
                match name {
                    "modes" => *modes = ModesConfig::Count(as_count(value)?),
                    "k_min" => *k_min = value,
                    "k_max" => *k_max = value,
                    _ => {
                        *dispersion = if value == 0.0 { Dispersion::Massless } else { Dispersion::Massive(value) };
                    }
                }
            }
            _ if AXIS_NAMES.contains(&name) => return wrong_model(),
            _ => return Err(format!("unknown parameter `{name}`")),
        }
        Ok(())
    }

    pub fn mode_grid(&self) -> Result<ModeGrid, CoreError> {
        match &self.grid {
            GridConfig::Dispersion {
                dispersion,
                k_min,
                k_max,
                modes,
                quadrature,
            } => {
                let m = match modes {
                    ModesConfig::Count(m) => *m,
                    ModesConfig::PerOctave(r) => {
                        let oct = if *k_min > 0.0 && k_max > k_min { (k_max / k_min).log2() } else { 0.0 };
                        ((r * oct).round() as usize).max(1)
                    }
                };
                dispersion_grid(*dispersion, *k_min, *k_max, m, *quadrature)
            }
            GridConfig::Explicit { k_points, weights, omega } => {
                let mass = omega.iter().copied().fold(f64::INFINITY, f64::min);
                // Bounds of the midpoint cells around the first and last points.
                let (first, w_first) = (k_points.first().copied().unwrap_or(0.0), weights.first().copied().unwrap_or(0.0));
                let (last, w_last) = (k_points.last().copied().unwrap_or(0.0), weights.last().copied().unwrap_or(0.0));
                let k_min = if first - w_first / 2.0 > 0.0 { first - w_first / 2.0 } else { first / 2.0 };
                let k_max = last + w_last / 2.0;
                ModeGrid::new(k_points.clone(), weights.clone(), omega.clone(), if mass.is_finite() { mass } else { 0.0 }, k_min, k_max)
            }
        }
    }

    /// Mass ν of the dispersion, zero when massless.
    pub fn grid_mass(&self) -> f64 {
        match &self.grid {
            GridConfig::Dispersion { dispersion, .. } => dispersion.mass(),
            GridConfig::Explicit { .. } => 0.0,
        }
    }
}

/// A built model specification.
#[derive(Debug, Clone)]
pub enum ModelSpec {
    Gsb(GsbSpec),
    Pf(PfToySpec),
}

impl RunConfig {
    pub fn model_spec(&self) -> Result<ModelSpec, CoreError> {
        let grid = self.mode_grid()?;
        let n_max = self.model.n_max;
        let cap = self.model.dimension_cap;
        Ok(match &self.model.kind {
            ModelKindConfig::SpinBoson {
                epsilon,
                delta,
                beta,
                window,
                alpha,
            } => {
                let mut s = spin_boson_preset(*epsilon, *delta, grid, *beta, *window, *alpha, n_max);
                s.dimension_cap = cap;
                ModelSpec::Gsb(s)
            }
            ModelKindConfig::Gsb { atom, couplings, alpha } => {
                let couplings = couplings
                    .iter()
                    .map(|c| CouplingTerm {
                        b: c.b.clone(),
                        lambda: match &c.lambda {
                            LambdaConfig::Preset { beta, window } => form_factor_preset(&grid, *beta, *window),
                            LambdaConfig::Explicit(v) => v.clone(),
                        },
                    })
                    .collect();
                ModelSpec::Gsb(GsbSpec {
                    atom: atom.clone(),
                    couplings,
                    alpha: *alpha,
                    grid,
                    n_max,
                    dimension_cap: cap,
                })
            }
            ModelKindConfig::PfToy {
                n_x,
                length,
                mass,
                charge,
                potential,
                form_factor,
            } => {
                let v = match potential {
                    PotentialConfig::SquareWell { depth, half_width } => square_well(&pf_positions(*n_x, *length), *depth, *half_width),
                    PotentialConfig::Samples(s) => s.clone(),
                };
                let phi = if form_factor.len() == 1 { vec![form_factor[0]; grid.len()] } else { form_factor.clone() };
                let mut s = PfToySpec::new(*n_x, *length, *mass, *charge, v, grid, phi, n_max);
                s.dimension_cap = cap;
                ModelSpec::Pf(s)
            }
        })
    }

    /// The same Pauli-Fierz configuration with the potential switched off.
    pub fn without_potential(&self) -> Option<RunConfig> {
        let mut c = self.clone();
        match &mut c.model.kind {
            ModelKindConfig::PfToy { potential, n_x, .. } => {
                *potential = PotentialConfig::Samples(vec![0.0; *n_x]);
                Some(c)
            }
            _ => None,
        }
    }
}

// ---------------------------------------------------------------------------
// Parsing

struct Issues {
    list: Vec<ConfigIssue>,
    lines: HashMap<String, usize>,
}

impl Issues {
    fn push(&mut self, field: &str, message: impl Into<String>) {
        let line = self.lines.get(field).copied().or_else(|| {
            // Fall back to the enclosing table.
            let mut f = field;
            while let Some(i) = f.rfind('.') {
                f = &f[..i];
                if let Some(&l) = self.lines.get(f) {
                    return Some(l);
                }
            }
            None
        });
        self.list.push(ConfigIssue {
            field: field.to_string(),
            line,
            message: message.into(),
        });
    }
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].bytes().filter(|&b| b == b'\n').count() + 1
}

fn collect_lines(text: &str, table: &DeTable<'_>, prefix: &str, out: &mut HashMap<String, usize>) {
    for (k, v) in table {
        let path = if prefix.is_empty() { k.get_ref().to_string() } else { format!("{prefix}.{}", k.get_ref()) };
        out.entry(path.clone()).or_insert_with(|| line_of(text, k.span().start));
        collect_value_lines(text, v.get_ref(), &path, out);
    }
}

fn collect_value_lines(text: &str, v: &DeValue<'_>, path: &str, out: &mut HashMap<String, usize>) {
    match v {
        DeValue::Table(t) => collect_lines(text, t, path, out),
        DeValue::Array(a) => {
            for (i, item) in a.iter().enumerate() {
                let p = format!("{path}[{i}]");
                out.entry(p.clone()).or_insert_with(|| line_of(text, item.span().start));
                collect_value_lines(text, item.get_ref(), &p, out);
            }
        }
        _ => {}
    }
}

/// One table being consumed; keys left over at the end are unknown.
struct Sec {
    path: String,
    t: Table,
}

impl Sec {
    fn new(path: &str, t: Table) -> Self {
        Self { path: path.into(), t }
    }

    fn field(&self, key: &str) -> String {
        if self.path.is_empty() {
            key.into()
        } else {
            format!("{}.{key}", self.path)
        }
    }

    fn take(&mut self, key: &str) -> Option<Value> {
        self.t.remove(key)
    }

    fn f64(&mut self, key: &str, iss: &mut Issues) -> Option<f64> {
        let v = self.take(key)?;
        match as_f64(&v) {
            Some(x) if x.is_finite() => Some(x),
            _ => {
                iss.push(&self.field(key), "expected a finite number");
                None
            }
        }
    }

    fn f64_or(&mut self, key: &str, default: f64, iss: &mut Issues) -> f64 {
        self.f64(key, iss).unwrap_or(default)
    }

    fn usize(&mut self, key: &str, iss: &mut Issues) -> Option<usize> {
        let v = self.take(key)?;
        match v {
            Value::Integer(i) if i >= 0 => Some(i as usize),
            Value::Integer(_) => {
                iss.push(&self.field(key), "must be a non-negative integer");
                None
            }
            _ => {
                iss.push(&self.field(key), "expected an integer");
                None
            }
        }
    }

    fn usize_or(&mut self, key: &str, default: usize, iss: &mut Issues) -> usize {
        self.usize(key, iss).unwrap_or(default)
    }

    fn str(&mut self, key: &str, iss: &mut Issues) -> Option<String> {
        match self.take(key)? {
            Value::String(s) => Some(s),
            _ => {
                iss.push(&self.field(key), "expected a string");
                None
            }
        }
    }

    fn f64_list(&mut self, key: &str, iss: &mut Issues) -> Option<Vec<f64>> {
        let v = self.take(key)?;
        let out = match &v {
            Value::Array(a) => a.iter().map(as_f64).collect::<Option<Vec<f64>>>(),
            _ => None,
        };
        match out {
            Some(x) if x.iter().all(|v| v.is_finite()) => Some(x),
            _ => {
                iss.push(&self.field(key), "expected an array of finite numbers");
                None
            }
        }
    }

    fn matrix(&mut self, key: &str, iss: &mut Issues) -> Option<Vec<Vec<f64>>> {
        let v = self.take(key)?;
        let rows = match &v {
            Value::Array(rows) => rows
                .iter()
                .map(|r| match r {
                    Value::Array(a) => a.iter().map(as_f64).collect::<Option<Vec<f64>>>(),
                    _ => None,
                })
                .collect::<Option<Vec<_>>>(),
            _ => None,
        };
        match rows {
            Some(r) if !r.is_empty() && r.iter().all(|row| row.len() == r.len()) => Some(r),
            _ => {
                iss.push(&self.field(key), "expected a square array of number rows");
                None
            }
        }
    }

    fn table(&mut self, key: &str, iss: &mut Issues) -> Option<Sec> {
        match self.take(key)? {
            Value::Table(t) => Some(Sec::new(&self.field(key), t)),
            _ => {
                iss.push(&self.field(key), "expected a table");
                None
            }
        }
    }

    fn finish(self, iss: &mut Issues) {
        for k in self.t.keys() {
            iss.push(&self.field(k), "unknown key");
        }
    }
}

fn as_f64(v: &Value) -> Option<f64> {
    match v {
        Value::Float(x) => Some(*x),
        Value::Integer(i) => Some(*i as f64),
        _ => None,
    }
}

fn complex_matrix(field: &str, re: Vec<Vec<f64>>, im: Option<Vec<Vec<f64>>>, iss: &mut Issues) -> Option<DMatrix<C64>> {
    let n = re.len();
    if let Some(im) = &im {
        if im.len() != n {
            iss.push(field, "imaginary part has a different shape");
            return None;
        }
    }
    let m = DMatrix::from_fn(n, n, |i, j| C64::new(re[i][j], im.as_ref().map_or(0.0, |m| m[i][j])));
    let dev = (&m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    let scale = m.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
    if dev > 1e-12 * scale {
        iss.push(field, format!("matrix is not Hermitian (deviation {dev:e})"));
        return None;
    }
    Some(m)
}

fn parse_window(sec: &mut Sec, iss: &mut Issues) -> Window {
    match sec.f64("window_cutoff", iss) {
        Some(c) if c > 0.0 => Window::Gaussian(c),
        Some(_) => {
            iss.push(&sec.field("window_cutoff"), "must be positive");
            Window::Unit
        }
        None => Window::Unit,
    }
}

fn parse_model(mut sec: Sec, iss: &mut Issues) -> Option<ModelConfig> {
    let kind = sec.str("kind", iss).unwrap_or_else(|| "spin-boson".into());
    let n_max = sec.usize_or("n_max", 4, iss);
    let dimension_cap = sec.usize_or("dimension_cap", DEFAULT_DIMENSION_CAP, iss);
    if dimension_cap == 0 {
        iss.push(&sec.field("dimension_cap"), "must be positive");
    }
    let kind = match kind.as_str() {
        "spin-boson" | "spin_boson" => {
            let epsilon = sec.f64_or("epsilon", 1.0, iss);
            let delta = sec.f64_or("delta", 0.5, iss);
            let beta = sec.f64_or("beta", 0.0, iss);
            let alpha = sec.f64_or("alpha", 0.1, iss);
            let window = parse_window(&mut sec, iss);
            Some(ModelKindConfig::SpinBoson {
                epsilon,
                delta,
                beta,
                window,
                alpha,
            })
        }
        "gsb" => {
            let alpha = sec.f64_or("alpha", 0.1, iss);
            let atom_field = sec.field("atom");
            let re = sec.matrix("atom", iss);
            let im = sec.matrix("atom_imag", iss);
            if re.is_none() && !iss.list.iter().any(|i| i.field == atom_field) {
                iss.push(&atom_field, "required for kind = \"gsb\"");
            }
            let atom = re.and_then(|re| complex_matrix(&atom_field, re, im, iss));
            let mut couplings = Vec::new();
            match sec.take("coupling") {
                Some(Value::Array(items)) if !items.is_empty() => {
                    for (i, item) in items.into_iter().enumerate() {
                        let path = format!("{}[{i}]", sec.field("coupling"));
                        let Value::Table(t) = item else {
                            iss.push(&path, "expected a table");
                            continue;
                        };
                        let mut c = Sec::new(&path, t);
                        let b_field = c.field("b");
                        let b_re = c.matrix("b", iss);
                        if b_re.is_none() && !iss.list.iter().any(|x| x.field == b_field) {
                            iss.push(&b_field, "required");
                        }
                        let b_im = c.matrix("b_imag", iss);
                        let b = b_re.and_then(|re| complex_matrix(&b_field, re, b_im, iss));
                        let lambda = match c.f64_list("lambda", iss) {
                            Some(re) => {
                                let im = c.f64_list("lambda_imag", iss).unwrap_or_else(|| vec![0.0; re.len()]);
                                if im.len() != re.len() {
                                    iss.push(&c.field("lambda_imag"), "length differs from `lambda`");
                                }
                                LambdaConfig::Explicit(re.iter().zip(im.iter().chain(std::iter::repeat(&0.0))).map(|(&a, &b)| C64::new(a, b)).collect())
                            }
                            None => {
                                let beta = c.f64_or("beta", 0.0, iss);
                                let window = parse_window(&mut c, iss);
                                LambdaConfig::Preset { beta, window }
                            }
                        };
                        c.finish(iss);
                        if let (Some(b), Some(a)) = (&b, &atom) {
                            if b.nrows() != a.nrows() {
                                iss.push(&b_field, "dimension differs from `atom`");
                            }
                        }
                        if let Some(b) = b {
                            couplings.push(CouplingConfig { b, lambda });
                        }
                    }
                }
                Some(_) => iss.push(&sec.field("coupling"), "expected a non-empty array of tables ([[model.coupling]])"),
                None => iss.push(&sec.field("coupling"), "at least one [[model.coupling]] entry is required"),
            }
            atom.map(|atom| ModelKindConfig::Gsb { atom, couplings, alpha })
        }
        "pf-toy" | "pf_toy" => {
            let n_x = sec.usize_or("n_x", 16, iss);
            if n_x < 4 {
                iss.push(&sec.field("n_x"), "need at least 4 grid points");
            }
            let length = sec.f64_or("length", n_x as f64 / 2.0, iss);
            if length <= 0.0 {
                iss.push(&sec.field("length"), "must be positive");
            }
            let mass = sec.f64_or("mass", 1.0, iss);
            if mass <= 0.0 {
                iss.push(&sec.field("mass"), "must be positive");
            }
            let charge = sec.f64_or("charge", 0.05, iss);
            let potential = match sec.f64_list("potential", iss) {
                Some(v) => {
                    if v.len() != n_x {
                        iss.push(&sec.field("potential"), format!("needs {n_x} samples, got {}", v.len()));
                    }
                    PotentialConfig::Samples(v)
                }
                None => {
                    let depth = sec.f64_or("well_depth", 2.0, iss);
                    let half_width = sec.f64_or("well_half_width", 1.5, iss);
                    if half_width <= 0.0 {
                        iss.push(&sec.field("well_half_width"), "must be positive");
                    }
                    PotentialConfig::SquareWell { depth, half_width }
                }
            };
            let form_factor = match sec.take("form_factor") {
                None => vec![1.0],
                Some(v) => match (as_f64(&v), &v) {
                    (Some(x), _) => vec![x],
                    (None, Value::Array(a)) => match a.iter().map(as_f64).collect::<Option<Vec<_>>>() {
                        Some(x) if !x.is_empty() => x,
                        _ => {
                            iss.push(&sec.field("form_factor"), "expected a number or an array of numbers");
                            vec![1.0]
                        }
                    },
                    _ => {
                        iss.push(&sec.field("form_factor"), "expected a number or an array of numbers");
                        vec![1.0]
                    }
                },
            };
            Some(ModelKindConfig::PfToy {
                n_x,
                length,
                mass,
                charge,
                potential,
                form_factor,
            })
        }
        other => {
            iss.push(&sec.field("kind"), format!("unknown model kind `{other}` (expected spin-boson, gsb or pf-toy)"));
            None
        }
    };
    sec.finish(iss);
    kind.map(|kind| ModelConfig { kind, n_max, dimension_cap })
}

fn parse_grid(mut sec: Sec, iss: &mut Issues) -> GridConfig {
    if sec.t.contains_key("omega") {
        let k_points = sec.f64_list("k_points", iss).unwrap_or_default();
        let weights = sec.f64_list("weights", iss).unwrap_or_default();
        let omega = sec.f64_list("omega", iss).unwrap_or_default();
        if k_points.len() != omega.len() || weights.len() != omega.len() {
            iss.push(&sec.field("omega"), "k_points, weights and omega need equal lengths");
        }
        sec.finish(iss);
        return GridConfig::Explicit { k_points, weights, omega };
    }
    let dispersion = sec.str("dispersion", iss).unwrap_or_else(|| "massive".into());
    let mass = sec.f64("mass", iss);
    let dispersion = match dispersion.as_str() {
        "massless" => {
            if mass.is_some_and(|m| m != 0.0) {
                iss.push(&sec.field("mass"), "a massless dispersion takes no mass");
            }
            Dispersion::Massless
        }
        "massive" => {
            let nu = mass.unwrap_or(0.5);
            if nu <= 0.0 {
                iss.push(&sec.field("mass"), "must be positive for a massive dispersion");
            }
            Dispersion::Massive(nu)
        }
        other => {
            iss.push(&sec.field("dispersion"), format!("unknown dispersion `{other}` (expected massless or massive)"));
            Dispersion::Massless
        }
    };
    let k_min = sec.f64_or("k_min", 0.5, iss);
    let k_max = sec.f64_or("k_max", 2.0, iss);
    if k_min <= 0.0 {
        iss.push(&sec.field("k_min"), "must be positive: a mode at k = 0 gives ω = 0 for massless fields and ω^β diverges for β < 0");
    }
    if k_max <= k_min {
        iss.push(&sec.field("k_max"), "must exceed k_min");
    }
    let modes = match (sec.usize("modes", iss), sec.f64("modes_per_octave", iss)) {
        (Some(_), Some(_)) => {
            iss.push(&sec.field("modes_per_octave"), "give either `modes` or `modes_per_octave`");
            ModesConfig::Count(1)
        }
        (Some(0), None) => {
            iss.push(&sec.field("modes"), "at least one mode is required");
            ModesConfig::Count(1)
        }
        (Some(m), None) => ModesConfig::Count(m),
        (None, Some(r)) if r > 0.0 => ModesConfig::PerOctave(r),
        (None, Some(_)) => {
            iss.push(&sec.field("modes_per_octave"), "must be positive");
            ModesConfig::Count(1)
        }
        (None, None) => ModesConfig::Count(3),
    };
    let quadrature = match sec.str("quadrature", iss).as_deref() {
        None | Some("uniform") => Quadrature::UniformMidpoint,
        Some("geometric") => Quadrature::GeometricMidpoint,
        Some(other) => {
            iss.push(&sec.field("quadrature"), format!("unknown quadrature `{other}` (expected uniform or geometric)"));
            Quadrature::UniformMidpoint
        }
    };
    sec.finish(iss);
    GridConfig::Dispersion {
        dispersion,
        k_min,
        k_max,
        modes,
        quadrature,
    }
}

fn parse_solver(mut sec: Sec, iss: &mut Issues) -> SpectralConfig {
    let d = SpectralConfig::default();
    let cfg = SpectralConfig {
        dense_threshold: sec.usize_or("dense_threshold", d.dense_threshold, iss),
        eigen_tol: sec.f64_or("eigen_tol", d.eigen_tol, iss),
        gap_rel: sec.f64_or("gap_rel", d.gap_rel, iss),
        krylov_dim: sec.usize_or("krylov_dim", d.krylov_dim, iss),
        max_restarts: sec.usize_or("max_restarts", d.max_restarts, iss),
        max_cluster: sec.usize_or("max_cluster", d.max_cluster, iss),
        seed: sec.usize_or("seed", d.seed as usize, iss) as u64,
        cg_tol: sec.f64_or("cg_tol", d.cg_tol, iss),
        cg_max_iter: sec.usize_or("cg_max_iter", d.cg_max_iter, iss),
    };
    if let Err(CoreError::InvalidArgument { field, reason }) = cfg.validate() {
        iss.push(&sec.field(field), reason);
    }
    sec.finish(iss);
    cfg
}

fn parse_checks(mut sec: Sec, iss: &mut Issues) -> ChecksConfig {
    let mut c = ChecksConfig::default();
    let mut toggled = false;
    for kind in CheckKind::ALL {
        match sec.take(kind.name()) {
            Some(Value::Boolean(on)) => {
                toggled = true;
                c.enabled.retain(|k| *k != kind);
                if on {
                    c.enabled.push(kind);
                }
            }
            Some(_) => iss.push(&sec.field(kind.name()), "expected true or false"),
            None => {}
        }
    }
    if toggled {
        c.enabled.sort_by_key(|k| CheckKind::ALL.iter().position(|x| x == k));
    }
    c.random_states = sec.usize_or("random_states", c.random_states, iss);
    c.massive_random = sec.usize_or("massive_random", c.massive_random, iss);
    c.hs_trials = sec.usize_or("hs_trials", c.hs_trials, iss);
    c.relative_bound_samples = sec.usize_or("relative_bound_samples", c.relative_bound_samples, iss);
    let z_re = sec.f64_or("resolvent_z_re", 0.0, iss);
    let z_im = sec.f64_or("resolvent_z_im", 1.0, iss);
    if z_im == 0.0 {
        iss.push(&sec.field("resolvent_z_im"), "must be non-zero");
    }
    c.resolvent_z = C64::new(z_re, z_im);
    c.ir_expect = match sec.str("ir_expect", iss).as_deref() {
        None => None,
        Some("regular") => Some(IrClass::Regular),
        Some("divergent") => Some(IrClass::Divergent),
        Some(other) => {
            iss.push(&sec.field("ir_expect"), format!("unknown class `{other}` (expected regular or divergent)"));
            None
        }
    };
    c.multiplicity_expected = sec.usize("multiplicity_expected", iss);
    if let Some(mut tol) = sec.table("tolerance", iss) {
        let keys: Vec<String> = tol.t.keys().cloned().collect();
        for k in keys {
            if let Some(v) = tol.f64(&k, iss) {
                if v >= 0.0 {
                    c.tolerances.push((k, v));
                } else {
                    iss.push(&tol.field(&k), "tolerance must be non-negative");
                }
            }
        }
        tol.finish(iss);
    }
    sec.finish(iss);
    c
}

fn parse_sweep(mut sec: Sec, iss: &mut Issues) -> SweepConfig {
    let cell_cap = sec.usize_or("cell_cap", DEFAULT_CELL_CAP, iss);
    let mut axes = Vec::new();
    match sec.table("axes", iss) {
        Some(mut t) => {
            let keys: Vec<String> = t.t.keys().cloned().collect();
            for k in keys {
                if !AXIS_NAMES.contains(&k.as_str()) {
                    t.take(&k);
                    iss.push(&t.field(&k), format!("unknown sweep axis (expected one of {})", AXIS_NAMES.join(", ")));
                    continue;
                }
                if let Some(v) = t.f64_list(&k, iss) {
                    if v.is_empty() {
                        iss.push(&t.field(&k), "axis needs at least one value");
                    } else {
                        axes.push((k, v));
                    }
                }
            }
            t.finish(iss);
        }
        None => iss.push(&sec.field("axes"), "a sweep needs at least one axis"),
    }
    if axes.is_empty() && !iss.list.iter().any(|i| i.field.starts_with("sweep.axes")) {
        iss.push("sweep.axes", "a sweep needs at least one axis");
    }
    let cells: u128 = axes.iter().map(|(_, v)| v.len() as u128).product();
    if cells > cell_cap as u128 {
        iss.push(&sec.field("axes"), format!("{cells} cells exceed the cap of {cell_cap}"));
    }
    sec.finish(iss);
    SweepConfig { axes, cell_cap }
}

fn parse_output(mut sec: Sec, iss: &mut Issues) -> OutputConfig {
    let mut o = OutputConfig::default();
    if let Some(d) = sec.str("dir", iss) {
        o.dir = Some(PathBuf::from(d));
    }
    if let Some(n) = sec.str("name", iss) {
        if n.is_empty() || n.contains(['/', '\\']) {
            iss.push(&sec.field("name"), "must be a plain file stem");
        } else {
            o.name = n;
        }
    }
    match sec.take("format") {
        None => {}
        Some(Value::String(s)) => match Format::parse(&s) {
            Some(f) => o.formats = vec![f],
            None => iss.push(&sec.field("format"), format!("unknown format `{s}` (expected json or csv)")),
        },
        Some(Value::Array(a)) => {
            let mut fs = Vec::new();
            for v in a {
                match v.as_str().and_then(Format::parse) {
                    Some(f) if !fs.contains(&f) => fs.push(f),
                    Some(_) => {}
                    None => iss.push(&sec.field("format"), "expected json or csv entries"),
                }
            }
            if !fs.is_empty() {
                o.formats = fs;
            }
        }
        Some(_) => iss.push(&sec.field("format"), "expected a string or an array of strings"),
    }
    sec.finish(iss);
    o
}

/// Cross-field checks that need the assembled specification.
fn validate_physics(cfg: &RunConfig, iss: &mut Issues) {
    if iss.list.iter().any(|i| i.field.starts_with("grid")) {
        return;
    }
    let grid = match cfg.mode_grid() {
        Ok(g) => g,
        Err(e) => {
            iss.push("grid", e.to_string());
            return;
        }
    };
    if let ModelKindConfig::SpinBoson { beta, .. } = &cfg.model.kind {
        if *beta < 0.0 && grid.omega().iter().any(|&w| w <= 0.0) {
            iss.push("model.beta", "negative exponent with a zero-frequency mode");
        }
    }
    match &cfg.model.kind {
        ModelKindConfig::Gsb { couplings, .. } => {
            for (i, c) in couplings.iter().enumerate() {
                if let LambdaConfig::Explicit(l) = &c.lambda {
                    if l.len() != grid.len() {
                        iss.push(&format!("model.coupling[{i}].lambda"), format!("needs {} entries (one per mode), got {}", grid.len(), l.len()));
                    }
                }
            }
        }
        ModelKindConfig::PfToy { form_factor, .. } => {
            if form_factor.len() != 1 && form_factor.len() != grid.len() {
                iss.push("model.form_factor", format!("needs 1 or {} entries, got {}", grid.len(), form_factor.len()));
            }
        }
        ModelKindConfig::SpinBoson { .. } => {}
    }
    if iss.list.is_empty() {
        let res = match cfg.model_spec() {
            Ok(ModelSpec::Gsb(s)) => s.validate(),
            Ok(ModelSpec::Pf(s)) => s.validate(),
            Err(e) => Err(e),
        };
        if let Err(e) = res {
            let field = match &e {
                CoreError::InvalidArgument { field, .. } => format!("model.{field}"),
                CoreError::DimensionCap { .. } => "model.n_max".into(),
                _ => "model".into(),
            };
            iss.push(&field, e.to_string());
        }
    }
}

/// Parses and validates a configuration, reporting every problem found.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let de = match DeTable::parse(text) {
        Ok(t) => t,
        Err(e) => {
            let line = e.span().map(|s| line_of(text, s.start));
            return Err(ConfigError {
                issues: vec![ConfigIssue {
                    field: "<syntax>".into(),
                    line,
                    message: e.message().trim().to_string(),
                }],
            });
        }
    };
    let mut lines = HashMap::new();
    collect_lines(text, de.get_ref(), "", &mut lines);
    let table: Table = toml::from_str(text).map_err(|e| ConfigError {
        issues: vec![ConfigIssue {
            field: "<syntax>".into(),
            line: e.span().map(|s| line_of(text, s.start)),
            message: e.message().trim().to_string(),
        }],
    })?;
    let mut iss = Issues { list: Vec::new(), lines };
    let mut root = Sec::new("", table);

    let model = match root.table("model", &mut iss) {
        Some(s) => parse_model(s, &mut iss),
        None => {
            if !iss.list.iter().any(|i| i.field == "model") {
                iss.push("model", "missing [model] section");
            }
            None
        }
    };
    let grid = parse_grid(root.table("grid", &mut iss).unwrap_or_else(|| Sec::new("grid", Table::new())), &mut iss);
    let solver = parse_solver(root.table("solver", &mut iss).unwrap_or_else(|| Sec::new("solver", Table::new())), &mut iss);
    let checks = parse_checks(root.table("checks", &mut iss).unwrap_or_else(|| Sec::new("checks", Table::new())), &mut iss);
    let sweep = root.table("sweep", &mut iss).map(|s| parse_sweep(s, &mut iss));
    let output = parse_output(root.table("output", &mut iss).unwrap_or_else(|| Sec::new("output", Table::new())), &mut iss);
    root.finish(&mut iss);

    let hash = Sha256::digest(text.as_bytes());
    let config_hash = hash.iter().map(|b| format!("{b:02x}")).collect();
    let Some(model) = model else {
        return Err(ConfigError { issues: iss.list });
    };
    let cfg = RunConfig {
        model,
        grid,
        solver,
        checks,
        sweep,
        output,
        config_hash,
    };
    validate_physics(&cfg, &mut iss);
    if iss.list.is_empty() {
        Ok(cfg)
    } else {
        Err(ConfigError { issues: iss.list })
    }
}
