//! Report records and their two serializations: JSON-lines (canonical) and CSV.
//!
//! Floating-point values are written with 17 significant digits so that every
//! finite `f64` survives a round trip bit for bit. Non-finite values are
//! written as the strings `"nan"`, `"inf"` and `"-inf"`. Wall-clock times go to
//! CSV only, which keeps JSON-lines output reproducible.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use bosonlab_core::verifier::{CheckOutcome, Status, Tier};
use serde_json::{Map, Value};

use crate::config::Format;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Provenance {
    /// SHA-256 of the configuration text.
    pub config_hash: String,
    pub seed: u64,
    pub version: String,
    pub core_version: String,
}

impl Provenance {
    pub fn new(config_hash: &str, seed: u64) -> Self {
        Self {
            config_hash: config_hash.to_string(),
            seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            core_version: bosonlab_core::VERSION.to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FailureKind {
    /// The parameters of the cell do not describe a valid model.
    Config,
    /// An eigen or linear solve did not converge.
    Solver,
    Other,
}

impl FailureKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            FailureKind::Config => "config",
            FailureKind::Solver => "solver",
            FailureKind::Other => "other",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "config" => Some(FailureKind::Config),
            "solver" => Some(FailureKind::Solver),
            "other" => Some(FailureKind::Other),
            _ => None,
        }
    }

    pub fn of(e: &bosonlab_core::Error) -> Self {
        use bosonlab_core::Error as E;
        match e {
            E::NoConvergence { .. } | E::Indefinite { .. } => FailureKind::Solver,
            E::DimensionCap { .. } | E::InvalidArgument { .. } | E::NotHermitian { .. } => FailureKind::Config,
            _ => FailureKind::Other,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellFailure {
    pub kind: FailureKind,
    pub reason: String,
}

/// One sweep cell. Observables are `NaN` when not applicable or when the cell failed.
#[derive(Debug, Clone, PartialEq)]
pub struct CellRecord {
    pub index: usize,
    pub params: Vec<(String, f64)>,
    pub failure: Option<CellFailure>,
    pub dim: usize,
    pub energy: f64,
    pub multiplicity: usize,
    pub gap: f64,
    pub mean_number: f64,
    pub overlap: f64,
    pub delta: f64,
    pub top_sector_weight: f64,
    pub checks: Vec<CheckOutcome>,
    /// Seconds; CSV only.
    pub wall_time: f64,
}

impl CellRecord {
    pub fn failed(index: usize, params: Vec<(String, f64)>, failure: CellFailure) -> Self {
        Self {
            index,
            params,
            failure: Some(failure),
            dim: 0,
            energy: f64::NAN,
            multiplicity: 0,
            gap: f64::NAN,
            mean_number: f64::NAN,
            overlap: f64::NAN,
            delta: f64::NAN,
            top_sector_weight: f64::NAN,
            checks: Vec::new(),
            wall_time: 0.0,
        }
    }

    pub fn param(&self, name: &str) -> Option<f64> {
        self.params.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
    }

    pub fn check(&self, name: &str) -> Option<&CheckOutcome> {
        self.checks.iter().find(|o| o.check == name)
    }
}

/// Outcomes of a family-level check over cells that differ along one axis.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilyRecord {
    pub axis: String,
    /// Parameters shared by every member.
    pub fixed: Vec<(String, f64)>,
    /// Member cell indices in evaluation order.
    pub cells: Vec<usize>,
    pub checks: Vec<CheckOutcome>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub provenance: Provenance,
    pub cells: Vec<CellRecord>,
    pub families: Vec<FamilyRecord>,
}

impl Report {
    pub fn outcomes(&self) -> impl Iterator<Item = &CheckOutcome> {
        self.cells.iter().flat_map(|c| &c.checks).chain(self.families.iter().flat_map(|f| &f.checks))
    }

    pub fn count(&self, status: Status) -> usize {
        self.outcomes().filter(|o| o.status == status).count()
    }

    /// Exit code: 3 configuration error in a cell, 4 solver failure, 2 any
    /// failed check, 0 otherwise.
    pub fn exit_code(&self) -> i32 {
        let kinds: Vec<FailureKind> = self.cells.iter().filter_map(|c| c.failure.as_ref().map(|f| f.kind)).collect();
        let solver_note = self.outcomes().any(|o| o.note.starts_with("error[solver]"));
        if kinds.contains(&FailureKind::Config) {
            3
        } else if kinds.contains(&FailureKind::Solver) || solver_note {
            4
        } else if !kinds.is_empty() || self.outcomes().any(CheckOutcome::failed) {
            2
        } else {
            0
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] io::Error),
}

// ---------------------------------------------------------------------------
// Numbers

/// Formats with 17 significant digits, or `nan`/`inf`/`-inf`.
pub fn format_number(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

pub fn parse_number(s: &str) -> Option<f64> {
    match s {
        "nan" => Some(f64::NAN),
        "inf" => Some(f64::INFINITY),
        "-inf" => Some(f64::NEG_INFINITY),
        _ => s.parse().ok(),
    }
}

/// Bitwise equality, with every NaN equal to every other NaN.
pub fn same_number(a: f64, b: f64) -> bool {
    (a.is_nan() && b.is_nan()) || a.to_bits() == b.to_bits()
}

struct Sig17;

impl serde_json::ser::Formatter for Sig17 {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        write!(w, "{v:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, v: f32) -> io::Result<()> {
        write!(w, "{v:.8e}")
    }
}

/// JSON value for a float; non-finite values become strings.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        Value::from(x)
    } else {
        Value::String(format_number(x))
    }
}

fn pairs(p: &[(String, f64)]) -> Value {
    Value::Object(p.iter().map(|(k, v)| (k.clone(), num(*v))).collect())
}

fn tier_parse(s: &str) -> Option<Tier> {
    [Tier::Exact, Tier::Truncation, Tier::Inequality, Tier::Trend].into_iter().find(|t| t.as_str() == s)
}

fn status_parse(s: &str) -> Option<Status> {
    [Status::Pass, Status::Fail, Status::Skipped, Status::Inconclusive].into_iter().find(|t| t.as_str() == s)
}

fn outcome_value(o: &CheckOutcome) -> Value {
    let mut m = Map::new();
    m.insert("check".into(), o.check.clone().into());
    m.insert("tier".into(), o.tier.as_str().into());
    m.insert("status".into(), o.status.as_str().into());
    m.insert("measured".into(), num(o.measured));
    m.insert("tolerance".into(), num(o.tolerance));
    m.insert("note".into(), o.note.clone().into());
    m.insert("metrics".into(), pairs(&o.metrics));
    Value::Object(m)
}

fn provenance_value(p: &Provenance) -> Value {
    let mut m = Map::new();
    m.insert("config_hash".into(), p.config_hash.clone().into());
    m.insert("seed".into(), p.seed.into());
    m.insert("version".into(), p.version.clone().into());
    m.insert("core_version".into(), p.core_version.clone().into());
    Value::Object(m)
}

fn cell_value(c: &CellRecord, p: &Provenance) -> Value {
    let mut m = Map::new();
    m.insert("record".into(), "cell".into());
    m.insert("index".into(), c.index.into());
    m.insert("params".into(), pairs(&c.params));
    m.insert(
        "failure".into(),
        match &c.failure {
            None => Value::Null,
            Some(f) => serde_json::json!({ "kind": f.kind.as_str(), "reason": f.reason }),
        },
    );
    m.insert("dim".into(), c.dim.into());
    m.insert("energy".into(), num(c.energy));
    m.insert("multiplicity".into(), c.multiplicity.into());
    m.insert("gap".into(), num(c.gap));
    m.insert("mean_number".into(), num(c.mean_number));
    m.insert("overlap".into(), num(c.overlap));
    m.insert("delta".into(), num(c.delta));
    m.insert("top_sector_weight".into(), num(c.top_sector_weight));
    m.insert("checks".into(), Value::Array(c.checks.iter().map(outcome_value).collect()));
    m.insert("provenance".into(), provenance_value(p));
    Value::Object(m)
}

fn family_value(f: &FamilyRecord, p: &Provenance) -> Value {
    let mut m = Map::new();
    m.insert("record".into(), "family".into());
    m.insert("axis".into(), f.axis.clone().into());
    m.insert("fixed".into(), pairs(&f.fixed));
    m.insert("cells".into(), Value::Array(f.cells.iter().map(|&i| i.into()).collect()));
    m.insert("checks".into(), Value::Array(f.checks.iter().map(outcome_value).collect()));
    m.insert("provenance".into(), provenance_value(p));
    Value::Object(m)
}

/// Writes one JSON value on its own line with 17-digit floats.
pub fn write_line<W: Write>(w: &mut W, v: &Value) -> io::Result<()> {
    let mut ser = serde_json::Serializer::with_formatter(&mut *w, Sig17);
    serde::Serialize::serialize(v, &mut ser).map_err(io::Error::other)?;
    w.write_all(b"\n")
}

/// Writes one line per cell followed by one line per family.
pub fn write_json_lines<W: Write>(report: &Report, mut w: W) -> io::Result<()> {
    for c in &report.cells {
        write_line(&mut w, &cell_value(c, &report.provenance))?;
    }
    for f in &report.families {
        write_line(&mut w, &family_value(f, &report.provenance))?;
    }
    w.flush()
}

pub fn json_lines_string(report: &Report) -> String {
    let mut buf = Vec::new();
    write_json_lines(report, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("JSON output is UTF-8")
}

// ---------------------------------------------------------------------------
// Reading JSON-lines

struct Reader {
    line: usize,
}

impl Reader {
    fn err<T>(&self, message: impl Into<String>) -> Result<T, ReportError> {
        Err(ReportError::Parse {
            line: self.line,
            message: message.into(),
        })
    }

    fn field<'v>(&self, v: &'v Value, key: &str) -> Result<&'v Value, ReportError> {
        match v.get(key) {
            Some(x) => Ok(x),
            None => self.err(format!("missing field `{key}`")),
        }
    }

    fn num(&self, v: &Value, key: &str) -> Result<f64, ReportError> {
        match value_number(self.field(v, key)?) {
            Some(x) => Ok(x),
            None => self.err(format!("`{key}` is not a number")),
        }
    }

    fn uint(&self, v: &Value, key: &str) -> Result<u64, ReportError> {
        match self.field(v, key)?.as_u64() {
            Some(x) => Ok(x),
            None => self.err(format!("`{key}` is not an unsigned integer")),
        }
    }

    fn str<'v>(&self, v: &'v Value, key: &str) -> Result<&'v str, ReportError> {
        match self.field(v, key)?.as_str() {
            Some(x) => Ok(x),
            None => self.err(format!("`{key}` is not a string")),
        }
    }

    fn pairs(&self, v: &Value, key: &str) -> Result<Vec<(String, f64)>, ReportError> {
        let Some(obj) = self.field(v, key)?.as_object() else {
            return self.err(format!("`{key}` is not an object"));
        };
        obj.iter()
            .map(|(k, x)| match value_number(x) {
                Some(x) => Ok((k.clone(), x)),
                None => self.err(format!("`{key}.{k}` is not a number")),
            })
            .collect()
    }

    fn outcome(&self, v: &Value) -> Result<CheckOutcome, ReportError> {
        let tier = self.str(v, "tier")?;
        let status = self.str(v, "status")?;
        let (Some(tier), Some(status)) = (tier_parse(tier), status_parse(status)) else {
            return self.err("unknown tier or status");
        };
        Ok(CheckOutcome {
            check: self.str(v, "check")?.to_string(),
            tier,
            status,
            measured: self.num(v, "measured")?,
            tolerance: self.num(v, "tolerance")?,
            note: self.str(v, "note")?.to_string(),
            metrics: self.pairs(v, "metrics")?,
        })
    }

    fn outcomes(&self, v: &Value) -> Result<Vec<CheckOutcome>, ReportError> {
        match self.field(v, "checks")?.as_array() {
            Some(a) => a.iter().map(|o| self.outcome(o)).collect(),
            None => self.err("`checks` is not an array"),
        }
    }

    fn provenance(&self, v: &Value) -> Result<Provenance, ReportError> {
        let p = self.field(v, "provenance")?;
        Ok(Provenance {
            config_hash: self.str(p, "config_hash")?.to_string(),
            seed: self.uint(p, "seed")?,
            version: self.str(p, "version")?.to_string(),
            core_version: self.str(p, "core_version")?.to_string(),
        })
    }

    fn cell(&self, v: &Value) -> Result<CellRecord, ReportError> {
        let failure = match self.field(v, "failure")? {
            Value::Null => None,
            f => {
                let Some(kind) = FailureKind::parse(self.str(f, "kind")?) else {
                    return self.err("unknown failure kind");
                };
                Some(CellFailure {
                    kind,
                    reason: self.str(f, "reason")?.to_string(),
                })
            }
        };
        Ok(CellRecord {
            index: self.uint(v, "index")? as usize,
            params: self.pairs(v, "params")?,
            failure,
            dim: self.uint(v, "dim")? as usize,
            energy: self.num(v, "energy")?,
            multiplicity: self.uint(v, "multiplicity")? as usize,
            gap: self.num(v, "gap")?,
            mean_number: self.num(v, "mean_number")?,
            overlap: self.num(v, "overlap")?,
            delta: self.num(v, "delta")?,
            top_sector_weight: self.num(v, "top_sector_weight")?,
            checks: self.outcomes(v)?,
            wall_time: f64::NAN,
        })
    }

    fn family(&self, v: &Value) -> Result<FamilyRecord, ReportError> {
        let cells = match self.field(v, "cells")?.as_array() {
            Some(a) => a.iter().map(|x| x.as_u64().map(|i| i as usize)).collect::<Option<Vec<_>>>(),
            None => None,
        };
        let Some(cells) = cells else {
            return self.err("`cells` is not an array of indices");
        };
        Ok(FamilyRecord {
            axis: self.str(v, "axis")?.to_string(),
            fixed: self.pairs(v, "fixed")?,
            cells,
            checks: self.outcomes(v)?,
        })
    }
}

fn value_number(v: &Value) -> Option<f64> {
    match v {
        Value::Number(n) => n.as_f64(),
        Value::String(s) => parse_number(s).filter(|x| !x.is_finite()),
        _ => None,
    }
}

/// Parses JSON-lines output. Wall times are not stored there and read back as `NaN`.
pub fn read_json_lines(text: &str) -> Result<Report, ReportError> {
    let mut report = Report {
        provenance: Provenance::new("", 0),
        cells: Vec::new(),
        families: Vec::new(),
    };
    let mut seen_provenance = false;
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let r = Reader { line: i + 1 };
        let v: Value = serde_json::from_str(line).map_err(|e| ReportError::Parse {
            line: i + 1,
            message: e.to_string(),
        })?;
        let p = r.provenance(&v)?;
        if !seen_provenance {
            report.provenance = p;
            seen_provenance = true;
        } else if p != report.provenance {
            return r.err("provenance differs from earlier records");
        }
        match r.str(&v, "record")? {
            "cell" => report.cells.push(r.cell(&v)?),
            "family" => report.families.push(r.family(&v)?),
            other => return r.err(format!("unknown record type `{other}`")),
        }
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// CSV

const CELL_COLUMNS: [&str; 13] = [
    "status",
    "failure_kind",
    "failure_reason",
    "dim",
    "energy",
    "multiplicity",
    "gap",
    "mean_number",
    "overlap",
    "delta",
    "top_sector_weight",
    "wall_time_s",
    "checks_failed",
];

fn ordered_union<'a>(lists: impl Iterator<Item = impl Iterator<Item = &'a str>>) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for l in lists {
        for s in l {
            if !out.iter().any(|x| x == s) {
                out.push(s.to_string());
            }
        }
    }
    out
}

/// One row per cell in index order. Columns: `cell`, parameters, observables,
/// then status, measured value and tolerance of every check, then provenance.
pub fn write_cells_csv<W: Write>(report: &Report, w: W) -> Result<(), ReportError> {
    let params = ordered_union(report.cells.iter().map(|c| c.params.iter().map(|(k, _)| k.as_str())));
    let checks = ordered_union(report.cells.iter().map(|c| c.checks.iter().map(|o| o.check.as_str())));
    let mut wtr = csv::Writer::from_writer(w);
    let mut header: Vec<String> = vec!["cell".into()];
    header.extend(params.iter().cloned());
    header.extend(CELL_COLUMNS.iter().map(|s| s.to_string()));
    for c in &checks {
        header.push(format!("{c}:status"));
        header.push(format!("{c}:measured"));
        header.push(format!("{c}:tolerance"));
    }
    header.extend(["config_hash", "seed", "version"].map(String::from));
    wtr.write_record(&header)?;
    let p = &report.provenance;
    for c in &report.cells {
        let mut row: Vec<String> = vec![c.index.to_string()];
        row.extend(params.iter().map(|k| c.param(k).map(format_number).unwrap_or_default()));
        row.push(if c.failure.is_some() { "failed" } else { "ok" }.into());
        row.push(c.failure.as_ref().map(|f| f.kind.as_str().to_string()).unwrap_or_default());
        row.push(c.failure.as_ref().map(|f| f.reason.clone()).unwrap_or_default());
        row.push(c.dim.to_string());
        row.push(format_number(c.energy));
        row.push(c.multiplicity.to_string());
        for x in [c.gap, c.mean_number, c.overlap, c.delta, c.top_sector_weight, c.wall_time] {
            row.push(format_number(x));
        }
        row.push(c.checks.iter().filter(|o| o.failed()).count().to_string());
        for name in &checks {
            match c.check(name) {
                Some(o) => {
                    row.push(o.status.as_str().into());
                    row.push(format_number(o.measured));
                    row.push(format_number(o.tolerance));
                }
                None => row.extend([String::new(), String::new(), String::new()]),
            }
        }
        row.extend([p.config_hash.clone(), p.seed.to_string(), p.version.clone()]);
        wtr.write_record(&row)?;
    }
    wtr.flush()?;
    Ok(())
}

/// One row per family-level check outcome.
pub fn write_family_csv<W: Write>(report: &Report, w: W) -> Result<(), ReportError> {
    let fixed = ordered_union(report.families.iter().map(|f| f.fixed.iter().map(|(k, _)| k.as_str())));
    let mut wtr = csv::Writer::from_writer(w);
    let mut header: Vec<String> = ["family", "axis", "check", "tier", "status", "measured", "tolerance", "note", "cells"].map(String::from).to_vec();
    header.extend(fixed.iter().cloned());
    header.push("metrics".into());
    wtr.write_record(&header)?;
    for (i, f) in report.families.iter().enumerate() {
        for o in &f.checks {
            let mut row = vec![
                i.to_string(),
                f.axis.clone(),
                o.check.clone(),
                o.tier.as_str().into(),
                o.status.as_str().into(),
                format_number(o.measured),
                format_number(o.tolerance),
                o.note.clone(),
                f.cells.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(" "),
            ];
            row.extend(fixed.iter().map(|k| f.fixed.iter().find(|(n, _)| n == k).map(|(_, v)| format_number(*v)).unwrap_or_default()));
            row.push(o.metrics.iter().map(|(k, v)| format!("{k}={}", format_number(*v))).collect::<Vec<_>>().join(";"));
            wtr.write_record(&row)?;
        }
    }
    wtr.flush()?;
    Ok(())
}

/// Header and rows of a CSV document.
pub fn read_csv(text: &str) -> Result<(Vec<String>, Vec<Vec<String>>), ReportError> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let header = rdr.headers()?.iter().map(String::from).collect();
    let rows = rdr.records().map(|r| r.map(|r| r.iter().map(String::from).collect())).collect::<Result<_, _>>()?;
    Ok((header, rows))
}

/// Writes the report in each requested format under `dir`, returning the paths.
pub fn emit_report(report: &Report, dir: &Path, name: &str, formats: &[Format]) -> Result<Vec<PathBuf>, ReportError> {
    fs::create_dir_all(dir)?;
    let mut out = Vec::new();
    for f in formats {
        match f {
            Format::Json => {
                let path = dir.join(format!("{name}.jsonl"));
                write_json_lines(report, io::BufWriter::new(fs::File::create(&path)?))?;
                out.push(path);
            }
            Format::Csv => {
                let path = dir.join(format!("{name}.csv"));
                write_cells_csv(report, fs::File::create(&path)?)?;
                out.push(path);
                let path = dir.join(format!("{name}_family.csv"));
                write_family_csv(report, fs::File::create(&path)?)?;
                out.push(path);
            }
        }
    }
    Ok(out)
}
