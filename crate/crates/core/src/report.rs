//! Structured results: functional values with quadrature metadata, and
//! verification reports with their hypothesis gate and conclusions.

use serde::{Deserialize, Serialize};

use crate::domain::QuadratureEcho;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FunctionalName {
    Volume,
    Energy,
    PushforwardVolume,
    Flux,
    Sigma1Integral,
    Sigma2Integral,
    DomainVolume,
}

/// One integrated quantity, always with the quadrature that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionalResult {
    pub name: FunctionalName,
    pub value: f64,
    /// Monte Carlo standard error; absent for tensor-product quadrature.
    pub std_error: Option<f64>,
    /// Milnor parameter for pushforward volumes.
    pub t: Option<f64>,
    pub domain_label: String,
    pub field_label: String,
    pub quadrature: QuadratureEcho,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hypothesis {
    pub description: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = ">=")]
    GreaterEqual,
    #[serde(rename = "==")]
    Equal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Conclusion {
    pub id: String,
    pub description: String,
    pub lhs: f64,
    pub rhs: f64,
    pub relation: Relation,
    /// Allowed shortfall (for ≥) or deviation (for =).
    pub slack: f64,
    /// `None` when the hypotheses were not met and the conclusion was not judged.
    pub pass: Option<bool>,
}

impl Conclusion {
    pub fn new(id: &str, description: impl Into<String>, lhs: f64, relation: Relation, rhs: f64, slack: f64) -> Self {
        Conclusion {
            id: id.to_string(),
            description: description.into(),
            lhs,
            rhs,
            relation,
            slack,
            pass: None,
        }
    }

    pub fn margin(&self) -> f64 {
        self.lhs - self.rhs
    }

    pub fn holds(&self) -> bool {
        match self.relation {
            Relation::GreaterEqual => self.lhs >= self.rhs - self.slack,
            Relation::Equal => (self.lhs - self.rhs).abs() <= self.slack,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Passed,
    /// Hypotheses held but a conclusion failed; indicates a defect.
    Failed,
    HypothesesNotMet,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub check_id: String,
    pub field: String,
    pub domain: String,
    pub t: Vec<f64>,
    pub hypotheses: Vec<Hypothesis>,
    pub conclusions: Vec<Conclusion>,
    pub status: Status,
    /// Every functional value the report used.
    pub records: Vec<FunctionalResult>,
    pub notes: Vec<String>,
}

impl VerificationReport {
    pub fn new(check_id: &str, field: &str, domain: &str, t: Vec<f64>) -> Self {
        VerificationReport {
            check_id: check_id.to_string(),
            field: field.to_string(),
            domain: domain.to_string(),
            t,
            hypotheses: Vec::new(),
            conclusions: Vec::new(),
            status: Status::HypothesesNotMet,
            records: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn hypothesis(&mut self, description: impl Into<String>, value: f64, tolerance: f64, pass: bool) {
        self.hypotheses.push(Hypothesis {
            description: description.into(),
            value,
            tolerance,
            pass,
        });
    }

    pub fn hypotheses_pass(&self) -> bool {
        self.hypotheses.iter().all(|h| h.pass)
    }

    /// Judges conclusions if the hypothesis gate passes and sets the status.
    pub fn finalize(mut self) -> Self {
        if self.hypotheses_pass() {
            for c in &mut self.conclusions {
                c.pass = Some(c.holds());
            }
            self.status = if self.conclusions.iter().all(|c| c.pass == Some(true)) {
                Status::Passed
            } else {
                Status::Failed
            };
        } else {
            for c in &mut self.conclusions {
                c.pass = None;
            }
            self.status = Status::HypothesesNotMet;
        }
        self
    }

    pub fn conclusion(&self, id: &str) -> Option<&Conclusion> {
        self.conclusions.iter().find(|c| c.id == id)
    }

    pub fn record(&self, name: FunctionalName) -> Option<&FunctionalResult> {
        self.records.iter().find(|r| r.name == name)
    }
}

/// 15 significant digits.
pub fn format_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.14e}")
    } else {
        x.to_string()
    }
}

pub const CSV_HEADER: [&str; 9] = [
    "check_id",
    "field",
    "domain",
    "t",
    "hypothesis_pass",
    "lhs",
    "rhs",
    "margin",
    "pass",
];

/// One CSV row per conclusion, identified as `<check_id>/<conclusion id>`.
pub fn csv_rows(reports: &[VerificationReport]) -> Vec<[String; 9]> {
    let mut rows = Vec::new();
    for r in reports {
        let t = r.t.iter().map(|t| format_float(*t)).collect::<Vec<_>>().join(";");
        let hyp = r.hypotheses_pass().to_string();
        for c in &r.conclusions {
            rows.push([
                format!("{}/{}", r.check_id, c.id),
                r.field.clone(),
                r.domain.clone(),
                t.clone(),
                hyp.clone(),
                format_float(c.lhs),
                format_float(c.rhs),
                format_float(c.margin()),
                match c.pass {
                    Some(true) => "true".into(),
                    Some(false) => "false".into(),
                    None => "n/a".into(),
                },
            ]);
        }
    }
    rows
}
