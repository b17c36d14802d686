//! Serializable reports with stable field names.

use std::fmt;

use diagnef::model::{AdmissibilityVerdict, Atom, ModelError, Outcome, StarMethod, StarReport};
use diagnef::roots::{DiagonalVFParams, Quartic, RootSet};
use diagnef::scalar::{format_rational, Rational, Scalar};
use serde::{Deserialize, Serialize};

use crate::config::PARAM_NAMES;

/// An exact rational rendered as `p/q`, or a float.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Num {
    Exact(String),
    Float(f64),
}

impl Num {
    pub fn of<T: Scalar>(x: &T) -> Self {
        match x.to_rational() {
            Some(q) if T::EXACT => Num::Exact(format_rational(&q)),
            _ => Num::Float(x.to_f64()),
        }
    }
}

impl fmt::Display for Num {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Num::Exact(s) => f.write_str(s),
            Num::Float(x) => write!(f, "{x}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamsEcho {
    #[serde(rename = "A")]
    pub quadratic: String,
    pub a: String,
    pub b: String,
    pub c: String,
    pub d: String,
    pub e: String,
    pub f: String,
}

impl ParamsEcho {
    pub fn new(p: &DiagonalVFParams<Rational>) -> Self {
        let [quadratic, a, b, c, d, e, f] = p.to_array().map(|x| format_rational(&x));
        Self { quadratic, a, b, c, d, e, f }
    }

    pub fn values(&self) -> [&str; 7] {
        [&self.quadratic, &self.a, &self.b, &self.c, &self.d, &self.e, &self.f]
    }
}

impl fmt::Display for ParamsEcho {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = PARAM_NAMES.iter().zip(self.values()).map(|(n, v)| format!("{n}={v}")).collect();
        f.write_str(&parts.join(" "))
    }
}

/// Coefficients `c0..c4`, constant term first.
pub fn quartic_echo(q: &Quartic<Rational>) -> Vec<String> {
    q.coeffs().iter().map(format_rational).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RootEntry {
    pub re: f64,
    pub im: f64,
    pub mult: usize,
}

pub fn root_entries(roots: &RootSet) -> Vec<RootEntry> {
    roots
        .entries()
        .iter()
        .map(|r| RootEntry { re: r.value.re, im: r.value.im, mult: r.multiplicity })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomEntry {
    pub lambda: Num,
    pub nu: Num,
}

impl AtomEntry {
    pub fn new<T: Scalar>(a: &Atom<T>) -> Self {
        Self { lambda: Num::of(&a.lambda), nu: Num::of(&a.nu) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictEntry {
    pub case: String,
    #[serde(rename = "N")]
    pub n: Option<u32>,
    pub reason: Option<String>,
    /// Machine-readable form of `reason`.
    pub code: Option<String>,
    pub inconclusive: bool,
}

impl VerdictEntry {
    pub fn from_verdict(v: &AdmissibilityVerdict) -> Self {
        let (case, n, reason, code) = match v.outcome {
            Outcome::CaseA { n } => ("CaseA", Some(n), None, None),
            Outcome::CaseB { n } => ("CaseB", Some(n), None, None),
            Outcome::Rejected { reason } => {
                let code = serde_json::to_value(reason).ok().and_then(|c| c.as_str().map(String::from));
                ("Rejected", None, Some(reason.to_string()), code)
            }
        };
        Self { case: case.into(), n, reason, code, inconclusive: v.inconclusive }
    }

    pub fn from_model_error(e: &ModelError) -> Self {
        let code = match e {
            ModelError::NRootDeficit { .. } => "n-root-deficit",
            ModelError::WeightCountMismatch { .. } => "weight-count-mismatch",
            ModelError::DuplicateAbscissa => "duplicate-abscissa",
            ModelError::NonPositiveExponent => "non-positive-exponent",
            ModelError::UnsupportedArity(_) => "unsupported-arity",
            ModelError::Roots(_) => "roots",
        };
        Self { case: "Rejected".into(), n: None, reason: Some(e.to_string()), code: Some(code.into()), inconclusive: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StarEntry {
    pub holds: bool,
    pub witness: Option<[String; 3]>,
    pub method: String,
    pub kernel_dim: usize,
}

impl From<&StarReport> for StarEntry {
    fn from(s: &StarReport) -> Self {
        Self {
            holds: s.holds,
            witness: s.witness.as_ref().map(|w| w.clone().map(|x| x.to_string())),
            method: match s.method {
                StarMethod::ExactKernel => "exact-kernel".into(),
                StarMethod::BoundedSearch { bound } => format!("bounded-search({bound})"),
            },
            kernel_dim: s.kernel_dim,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckEntry {
    pub max_dev: f64,
    pub pass: bool,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionEntry {
    pub max_dev: f64,
    pub pass: bool,
    pub exact: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesEntry {
    pub depth: usize,
    /// Lowest order carrying a negative coefficient.
    pub first_negative: Option<usize>,
    pub pivot: usize,
    pub pivot_case: String,
    pub terms: usize,
    pub complete: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchEntry {
    pub denominator: u32,
    pub tried: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    Admissible,
    Rejected,
    Inconclusive,
    #[serde(rename = "Degenerate-Admissible")]
    DegenerateAdmissible,
}

impl Status {
    pub fn exit_code(self) -> u8 {
        match self {
            Status::Rejected => 1,
            _ => 0,
        }
    }

    pub fn is_admissible(self) -> bool {
        matches!(self, Status::Admissible | Status::DegenerateAdmissible)
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Admissible => "Admissible",
            Status::Rejected => "Rejected",
            Status::Inconclusive => "Inconclusive",
            Status::DegenerateAdmissible => "Degenerate-Admissible",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub params: ParamsEcho,
    pub quartic: Vec<String>,
    pub roots: Vec<RootEntry>,
    pub pattern: String,
    pub n_r: usize,
    /// `"exact"` when the model was built over the rationals.
    pub arithmetic: String,
    pub atoms: Vec<AtomEntry>,
    pub weights: Vec<String>,
    pub r: String,
    pub verdict: VerdictEntry,
    pub star: Option<StarEntry>,
    pub diag_check: Option<CheckEntry>,
    pub regression: Option<RegressionEntry>,
    pub series: Option<SeriesEntry>,
    pub weight_search: Option<SearchEntry>,
    pub notes: Vec<String>,
    pub status: Status,
}

impl PipelineReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    pub fn exit_code(&self) -> u8 {
        self.status.exit_code()
    }
}

impl fmt::Display for PipelineReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "params      {}", self.params)?;
        writeln!(f, "quartic     {}", format_poly(&self.quartic))?;
        let roots: Vec<String> = self.roots.iter().map(format_root).collect();
        writeln!(f, "roots       {}", roots.join(", "))?;
        writeln!(f, "pattern     {} (n_r = {})", self.pattern, self.n_r)?;
        if !self.atoms.is_empty() {
            let atoms: Vec<String> = self.atoms.iter().map(|a| format!("({}, {})", a.lambda, a.nu)).collect();
            writeln!(f, "atoms       {} [{}]", atoms.join(" "), self.arithmetic)?;
        }
        writeln!(f, "weights     {}", self.weights.join(" "))?;
        writeln!(f, "r           {}", self.r)?;
        let v = &self.verdict;
        match (&v.n, &v.reason) {
            (Some(n), _) => writeln!(f, "verdict     {}(N = {n})", v.case)?,
            (None, Some(reason)) => writeln!(f, "verdict     {}: {reason}", v.case)?,
            _ => writeln!(f, "verdict     {}", v.case)?,
        }
        if let Some(s) = &self.star {
            let witness = s.witness.as_ref().map_or(String::new(), |w| format!(", witness ({})", w.join(", ")));
            writeln!(f, "star        holds = {} via {}{witness}", s.holds, s.method)?;
        }
        if let Some(c) = &self.diag_check {
            writeln!(f, "diag check  max dev {:e} over {} points: {}", c.max_dev, c.points, pass(c.pass))?;
        }
        if let Some(c) = &self.regression {
            let kind = if c.exact { "exact" } else { "float" };
            writeln!(f, "regression  max dev {:e} ({kind}): {}", c.max_dev, pass(c.pass))?;
        }
        if let Some(s) = &self.series {
            let neg = s.first_negative.map_or("none".to_string(), |k| format!("order {k}"));
            writeln!(f, "series      depth {}, {} terms, first negative: {neg}", s.depth, s.terms)?;
        }
        if let Some(s) = &self.weight_search {
            writeln!(f, "search      denominator {}, {} vectors tried", s.denominator, s.tried)?;
        }
        for note in &self.notes {
            writeln!(f, "note        {note}")?;
        }
        write!(f, "status      {}", self.status)
    }
}

fn pass(ok: bool) -> &'static str {
    if ok {
        "pass"
    } else {
        "FAIL"
    }
}

fn format_root(r: &RootEntry) -> String {
    let mult = if r.mult > 1 { format!(" (x{})", r.mult) } else { String::new() };
    if r.im == 0.0 {
        format!("{}{mult}", r.re)
    } else {
        format!("{}{:+}i{mult}", r.re, r.im)
    }
}

fn format_poly(coeffs: &[String]) -> String {
    let mut out = String::new();
    for (k, c) in coeffs.iter().enumerate().rev() {
        if c == "0" {
            continue;
        }
        let (sign, mag) = match c.strip_prefix('-') {
            Some(m) => ("-", m),
            None => ("+", c.as_str()),
        };
        let mono = match k {
            0 => mag.to_string(),
            _ => {
                let coef = if mag == "1" { String::new() } else { format!("{mag} ") };
                let power = if k == 1 { "x".to_string() } else { format!("x^{k}") };
                format!("{coef}{power}")
            }
        };
        if out.is_empty() {
            out = if sign == "-" { format!("-{mono}") } else { mono };
        } else {
            out.push_str(&format!(" {sign} {mono}"));
        }
    }
    if out.is_empty() {
        "0".into()
    } else {
        out
    }
}
