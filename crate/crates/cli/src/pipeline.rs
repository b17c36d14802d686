//! The characterization pipeline and the single-stage runs behind each
//! subcommand.

use diagnef::measure::{
    cumulant_eval, diag_variance_check, realize_measure, regression_check, theta_grid, tilt_member, MeasureError,
    Point,
};
use diagnef::model::{
    admissibility_verdict, candidate_model, candidate_model_exact, star_condition, CandidateModel, ModelError,
    VerdictOptions,
};
use diagnef::roots::{
    build_characteristic_quartic, classify_root_pattern, rational_real_roots, solve_quartic,
    unchecked_dual_ordinate, DiagonalVFParams, RootSet,
};
use diagnef::scalar::{format_rational, Rational, Scalar};
use diagnef::series::{expand_series, linear_grid, magnitude_scan, EliminationForm, SeriesError, SeriesReport};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{Config, ConfigError};
use crate::report::{
    quartic_echo, root_entries, AtomEntry, CheckEntry, Num, ParamsEcho, PipelineReport, RegressionEntry, RootEntry,
    SearchEntry, SeriesEntry, StarEntry, Status, VerdictEntry,
};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

impl PipelineError {
    /// 2 for problems with the input, 1 for models the pipeline rejects.
    pub fn exit_code(&self) -> u8 {
        match self {
            PipelineError::Config(_) | PipelineError::Input(_) => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    pub tol: f64,
    /// Side of the square parameter grid for the variance check.
    pub grid: usize,
    pub depth: usize,
    pub bound: u32,
    /// Replaces the regular grid by `grid * grid` uniform draws.
    pub seed: Option<u64>,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { tol: 1e-8, grid: 11, depth: 8, bound: 50, seed: None }
    }
}

impl RunOptions {
    fn check_grid(&self) -> Vec<Point> {
        match self.seed {
            None => theta_grid(self.grid, -1.0, 1.0),
            Some(seed) => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                (0..self.grid * self.grid)
                    .map(|_| [rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0)])
                    .collect()
            }
        }
    }

    fn verdict_options(&self) -> VerdictOptions {
        VerdictOptions { sum_tol: self.tol, search_bound: self.bound, ..VerdictOptions::default() }
    }
}

struct Stage {
    params: DiagonalVFParams<Rational>,
    roots: RootSet,
    n_r: usize,
}

impl Stage {
    fn new(params: &DiagonalVFParams<Rational>, tol: f64) -> Self {
        let roots = solve_quartic(&build_characteristic_quartic(params).to_f64(), tol);
        let n_r = roots.n_real();
        Self { params: params.clone(), roots, n_r }
    }

    fn skeleton(&self, weights: &[Rational]) -> PipelineReport {
        PipelineReport {
            params: ParamsEcho::new(&self.params),
            quartic: quartic_echo(&build_characteristic_quartic(&self.params)),
            roots: root_entries(&self.roots),
            pattern: classify_root_pattern(&self.roots).to_string(),
            n_r: self.n_r,
            arithmetic: "float".into(),
            atoms: Vec::new(),
            weights: weights.iter().map(format_rational).collect(),
            r: format_rational(&self.params.exponent()),
            verdict: VerdictEntry::from_model_error(&ModelError::NRootDeficit { n_r: self.n_r }),
            star: None,
            diag_check: None,
            regression: None,
            series: None,
            weight_search: None,
            notes: Vec::new(),
            status: Status::Rejected,
        }
    }
}

/// Runs every stage from the parameters to the verdict and its checks.
///
/// Rejections (too few real roots, a failed clause) are reported, not
/// returned as errors; errors are reserved for unusable input.
pub fn run_characterize(cfg: &Config, opts: &RunOptions) -> Result<PipelineReport, PipelineError> {
    let stage = Stage::new(cfg.require_params()?, opts.tol);
    match (&cfg.weights, cfg.search) {
        (Some(w), _) => evaluate(&stage, w, opts),
        (None, Some(den)) => search_weights(&stage, den, opts),
        (None, None) => Err(ConfigError::Missing("weights").into()),
    }
}

/// Tries positive weight vectors `k / den` in lexicographic order and keeps
/// the first admissible one.
fn search_weights(stage: &Stage, den: u32, opts: &RunOptions) -> Result<PipelineReport, PipelineError> {
    if stage.n_r < 2 {
        return evaluate(stage, &[], opts);
    }
    let mut last = None;
    for (i, parts) in positive_compositions(den, stage.n_r).into_iter().enumerate() {
        let w: Vec<Rational> =
            parts.iter().map(|&k| Rational::new(k.into(), den.into())).collect();
        let mut report = evaluate(stage, &w, opts)?;
        let found = report.status.is_admissible();
        report.weight_search = Some(SearchEntry { denominator: den, tried: i + 1 });
        last = Some(report);
        if found {
            break;
        }
    }
    last.ok_or_else(|| {
        PipelineError::Input(format!("denominator {den} is too small for {} positive weights", stage.n_r))
    })
}

fn positive_compositions(total: u32, parts: usize) -> Vec<Vec<u32>> {
    if parts == 1 {
        return if total >= 1 { vec![vec![total]] } else { Vec::new() };
    }
    let mut out = Vec::new();
    for first in 1..total {
        for mut rest in positive_compositions(total - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

fn evaluate(stage: &Stage, weights: &[Rational], opts: &RunOptions) -> Result<PipelineReport, PipelineError> {
    let mut report = stage.skeleton(weights);
    if stage.n_r < 2 {
        return Ok(report);
    }
    if weights.len() != stage.n_r {
        return Err(PipelineError::Input(format!(
            "expected {} weights, one per distinct real root, got {}",
            stage.n_r,
            weights.len()
        )));
    }
    match candidate_model_exact(&stage.params, weights, opts.tol) {
        Ok(Some(m)) => {
            report.arithmetic = "exact".into();
            finish(&mut report, &m, &stage.params, opts);
        }
        Ok(None) => {
            let w: Vec<f64> = weights.iter().map(Scalar::to_f64).collect();
            let p = stage.params.to_f64();
            match candidate_model(&p, &w, opts.tol) {
                Ok(m) => finish(&mut report, &m, &p, opts),
                Err(e) => model_failure(&mut report, &e),
            }
        }
        Err(e) => model_failure(&mut report, &e),
    }
    Ok(report)
}

fn model_failure(report: &mut PipelineReport, e: &ModelError) {
    report.verdict = VerdictEntry::from_model_error(e);
    report.status = match e {
        ModelError::NRootDeficit { .. } => Status::Rejected,
        _ => Status::Inconclusive,
    };
}

fn finish<T: Scalar>(report: &mut PipelineReport, m: &CandidateModel<T>, p: &DiagonalVFParams<T>, opts: &RunOptions) {
    report.atoms = m.atoms().iter().map(AtomEntry::new).collect();
    let verdict = admissibility_verdict(m, &opts.verdict_options());
    report.verdict = VerdictEntry::from_verdict(&verdict);
    report.star = verdict.star.as_ref().map(StarEntry::from);

    match expand_series(m, opts.depth) {
        Ok(s) => report.series = Some(series_entry(&s)),
        Err(e) => report.notes.push(format!("series: {e}")),
    }

    if !verdict.outcome.is_accepted() {
        report.status = if verdict.inconclusive { Status::Inconclusive } else { Status::Rejected };
        return;
    }
    let mu = match realize_measure(m, &verdict) {
        Ok(mu) => mu,
        Err(e) => {
            report.notes.push(format!("measure: {e}"));
            report.status = Status::Inconclusive;
            return;
        }
    };
    let grid = opts.check_grid();
    match diag_variance_check(m, p, &grid, opts.tol) {
        Ok(c) => report.diag_check = Some(CheckEntry { max_dev: c.max_deviation, pass: c.pass, points: grid.len() }),
        Err(e) => report.notes.push(format!("diag check: {e}")),
    }
    let reg = regression_check(&mu, p, opts.tol);
    report.regression = Some(RegressionEntry { max_dev: reg.max_deviation, pass: reg.pass, exact: reg.exact });

    let checks = report.diag_check.as_ref().is_some_and(|c| c.pass) && reg.pass;
    report.status = match (checks, mu.is_degenerate()) {
        (false, _) => Status::Inconclusive,
        (true, false) => Status::Admissible,
        (true, true) => Status::DegenerateAdmissible,
    };
}

fn series_entry(s: &SeriesReport) -> SeriesEntry {
    SeriesEntry {
        depth: s.depth,
        first_negative: s.first_negative.map(|t| t.order),
        pivot: s.pivot,
        pivot_case: serde_json::to_value(s.pivot_case)
            .ok()
            .and_then(|v| v.as_str().map(String::from))
            .unwrap_or_default(),
        terms: s.terms.len(),
        complete: s.complete,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootsReport {
    pub params: ParamsEcho,
    pub quartic: Vec<String>,
    pub roots: Vec<RootEntry>,
    pub pattern: String,
    pub n_r: usize,
    /// Real roots paired with their dual ordinates.
    pub atoms: Vec<AtomEntry>,
}

pub fn run_roots(cfg: &Config, opts: &RunOptions) -> Result<RootsReport, PipelineError> {
    let p = cfg.require_params()?;
    let stage = Stage::new(p, opts.tol);
    let exact_q = build_characteristic_quartic(p);
    let atoms = match rational_real_roots(&exact_q, &stage.roots) {
        Some(exact) => exact
            .iter()
            .map(|(l, _)| AtomEntry { lambda: Num::of(l), nu: Num::of(&unchecked_dual_ordinate(l, p).nu) })
            .collect(),
        None => {
            let pf = p.to_f64();
            stage
                .roots
                .distinct_real()
                .iter()
                .map(|l| AtomEntry { lambda: Num::Float(*l), nu: Num::Float(unchecked_dual_ordinate(l, &pf).nu) })
                .collect()
        }
    };
    let skeleton = stage.skeleton(&[]);
    Ok(RootsReport {
        params: skeleton.params,
        quartic: skeleton.quartic,
        roots: skeleton.roots,
        pattern: skeleton.pattern,
        n_r: stage.n_r,
        atoms,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeReport {
    pub matrix: [[String; 3]; 3],
    pub star: StarEntry,
}

pub fn run_lattice(cfg: &Config, opts: &RunOptions) -> Result<LatticeReport, PipelineError> {
    let m = cfg.matrix.as_ref().ok_or(ConfigError::Missing("matrix"))?;
    Ok(LatticeReport { matrix: m.to_strings(), star: StarEntry::from(&star_condition(m, opts.bound)) })
}

/// Candidate model from the config, built exactly when the roots allow it.
pub fn build_model(cfg: &Config, opts: &RunOptions) -> Result<CandidateModel<f64>, PipelineError> {
    let p = cfg.require_params()?;
    let w = cfg.weights.as_ref().ok_or(ConfigError::Missing("weights"))?;
    let stage = Stage::new(p, opts.tol);
    if stage.n_r >= 2 && w.len() != stage.n_r {
        return Err(PipelineError::Input(format!(
            "expected {} weights, one per distinct real root, got {}",
            stage.n_r,
            w.len()
        )));
    }
    if let Some(m) = candidate_model_exact(p, w, opts.tol)? {
        return Ok(m.to_f64());
    }
    let wf: Vec<f64> = w.iter().map(Scalar::to_f64).collect();
    Ok(candidate_model(&p.to_f64(), &wf, opts.tol)?)
}

pub fn run_expand(cfg: &Config, opts: &RunOptions) -> Result<SeriesReport, PipelineError> {
    Ok(expand_series(&build_model(cfg, opts)?, opts.depth)?)
}

pub const SCAN_RANGE: [f64; 2] = [-50.0, 50.0];
pub const SCAN_POINTS: usize = 4001;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanEntry {
    pub label: String,
    /// First `t` with `|f(it)|^r > 1`.
    pub witness: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub r: f64,
    pub range: [f64; 2],
    pub points: usize,
    pub forms: Vec<ScanEntry>,
    pub unbounded: bool,
}

/// Scans an explicit form from the config, or the model's transform along
/// eight directions of the half plane.
pub fn run_scan(cfg: &Config, opts: &RunOptions) -> Result<ScanReport, PipelineError> {
    let grid = linear_grid(SCAN_RANGE[0], SCAN_RANGE[1], SCAN_POINTS);
    let (r, forms): (f64, Vec<(String, EliminationForm)>) = match &cfg.form {
        Some(form) => {
            let r = cfg.r.as_ref().ok_or(ConfigError::Missing("r"))?.to_f64();
            (r, vec![("form".into(), form.clone())])
        }
        None => {
            let m = build_model(cfg, opts)?;
            let dirs = (0..8).map(|k| {
                let phi = std::f64::consts::PI * k as f64 / 8.0;
                let u = [phi.cos(), phi.sin()];
                (format!("direction ({:.4}, {:.4})", u[0], u[1]), EliminationForm::along_line(&m, u))
            });
            (*m.exponent(), dirs.collect())
        }
    };
    let forms: Vec<ScanEntry> = forms
        .into_iter()
        .map(|(label, f)| ScanEntry { label, witness: magnitude_scan(&f, r, &grid) })
        .collect();
    let unbounded = forms.iter().any(|f| f.witness.is_some());
    Ok(ScanReport { r, range: SCAN_RANGE, points: SCAN_POINTS, forms, unbounded })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub theta: Point,
    pub k: f64,
    pub mean: Point,
    pub variance: [[f64; 2]; 2],
}

pub fn run_eval(cfg: &Config, theta: Point, opts: &RunOptions) -> Result<EvalReport, PipelineError> {
    let c = cumulant_eval(&build_model(cfg, opts)?, theta)?;
    Ok(EvalReport { theta, k: c.k, mean: c.mean, variance: c.variance })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TiltReport {
    pub theta: Point,
    pub points: Vec<Point>,
    pub masses: Vec<f64>,
}

/// The member of the family at `theta`: the realized measure, tilted.
pub fn run_tilt(cfg: &Config, theta: Point, opts: &RunOptions) -> Result<TiltReport, PipelineError> {
    let m = build_model(cfg, opts)?;
    let verdict = admissibility_verdict(&m, &opts.verdict_options());
    let mu = tilt_member(&realize_measure(&m, &verdict)?, theta);
    Ok(TiltReport { theta, points: mu.points().to_vec(), masses: mu.masses().to_vec() })
}
