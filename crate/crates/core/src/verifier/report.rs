use alloc::string::{String, ToString};
use alloc::vec::Vec;

/// How a check's tolerance is interpreted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tier {
    /// Identity that holds to rounding in finite dimension.
    Exact,
    /// Identity whose residual is budgeted by the top-sector weight.
    Truncation,
    /// Literal inequality; the measured value is the violation (negative margin).
    Inequality,
    /// Monotone trend over a family, with slack.
    Trend,
}

impl Tier {
    pub fn as_str(&self) -> &'static str {
        match self {
            Tier::Exact => "exact",
            Tier::Truncation => "truncation",
            Tier::Inequality => "inequality",
            Tier::Trend => "trend",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    /// Hypotheses of the check do not hold for this input.
    Skipped,
    /// Numerical evidence too weak to assert either way.
    Inconclusive,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Skipped => "skipped",
            Status::Inconclusive => "inconclusive",
        }
    }

    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }
}

/// One self-describing check result: the measured discrepancy travels with
/// its tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub check: String,
    pub tier: Tier,
    pub status: Status,
    pub measured: f64,
    pub tolerance: f64,
    pub note: String,
    pub metrics: Vec<(String, f64)>,
}

impl CheckOutcome {
    /// Passes when `measured <= tolerance`.
    pub fn bounded(check: &str, tier: Tier, measured: f64, tolerance: f64) -> Self {
        Self {
            check: check.to_string(),
            tier,
            status: Status::from_bool(measured <= tolerance),
            measured,
            tolerance,
            note: String::new(),
            metrics: Vec::new(),
        }
    }

    pub fn with_status(check: &str, tier: Tier, status: Status, note: &str) -> Self {
        Self {
            check: check.to_string(),
            tier,
            status,
            measured: f64::NAN,
            tolerance: f64::NAN,
            note: note.to_string(),
            metrics: Vec::new(),
        }
    }

    pub fn metric(mut self, name: &str, value: f64) -> Self {
        self.metrics.push((name.to_string(), value));
        self
    }

    pub fn note(mut self, note: &str) -> Self {
        self.note = note.to_string();
        self
    }

    pub fn and(mut self, ok: bool) -> Self {
        if !ok && self.status == Status::Pass {
            self.status = Status::Fail;
        }
        self
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    pub fn failed(&self) -> bool {
        self.status == Status::Fail
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct VerificationReport {
    pub outcomes: Vec<CheckOutcome>,
}

impl VerificationReport {
    pub fn push(&mut self, o: CheckOutcome) {
        self.outcomes.push(o);
    }

    pub fn extend(&mut self, os: impl IntoIterator<Item = CheckOutcome>) {
        self.outcomes.extend(os);
    }

    pub fn any_failed(&self) -> bool {
        self.outcomes.iter().any(CheckOutcome::failed)
    }

    pub fn get(&self, check: &str) -> Option<&CheckOutcome> {
        self.outcomes.iter().find(|o| o.check == check)
    }
}

/// True when every consecutive pair satisfies `next <= (1 + slack) * prev`.
pub fn decreasing_with_slack(values: &[f64], slack: f64) -> bool {
    values.windows(2).all(|w| w[1] <= (1.0 + slack) * w[0])
}
