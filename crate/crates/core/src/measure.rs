//! Finite atomic measures behind admissible transforms, their cumulant
//! function and the identities they must satisfy.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{AdmissibilityVerdict, CandidateModel, Outcome, RejectReason};
use crate::roots::DiagonalVFParams;
use crate::scalar::{powi, Scalar};

pub type Point = [f64; 2];
pub type Matrix2 = [[f64; 2]; 2];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MeasureError {
    #[error("model is not admissible: {0}")]
    NotAdmissible(RejectReason),
    #[error("mixture sum is {0} <= 0 at this parameter")]
    DomainViolation(f64),
    #[error("target mean lies outside the interior of the mean domain")]
    OutOfMeanDomain,
    #[error("support is collinear; the mean map is not invertible")]
    Degenerate,
    #[error("mean inversion needs weights of one sign")]
    SignedWeights,
    #[error("Newton iteration stopped after {iterations} steps with residual {residual:e}")]
    NoConvergence { iterations: usize, residual: f64 },
}

/// Distance below which two support points are merged in floating point.
pub const MERGE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteMeasure<T = f64> {
    points: Vec<[T; 2]>,
    masses: Vec<T>,
    /// Support contained in one affine line.
    degenerate: bool,
}

impl<T: Scalar> FiniteMeasure<T> {
    /// Merges coincident points and drops zero masses.
    pub fn from_parts(points: Vec<[T; 2]>, masses: Vec<T>) -> Self {
        let tol = T::tolerance(MERGE_TOLERANCE);
        let mut out_p: Vec<[T; 2]> = Vec::new();
        let mut out_m: Vec<T> = Vec::new();
        for (p, m) in points.into_iter().zip(masses) {
            if m.is_zero() {
                continue;
            }
            let hit = out_p.iter().position(|q| {
                (q[0].clone() - p[0].clone()).abs() <= tol && (q[1].clone() - p[1].clone()).abs() <= tol
            });
            match hit {
                Some(i) => out_m[i] = out_m[i].clone() + m,
                None => {
                    out_p.push(p);
                    out_m.push(m);
                }
            }
        }
        let degenerate = collinear(&out_p);
        Self { points: out_p, masses: out_m, degenerate }
    }

    pub fn points(&self) -> &[[T; 2]] {
        &self.points
    }

    pub fn masses(&self) -> &[T] {
        &self.masses
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    pub fn total_mass(&self) -> T {
        self.masses.iter().cloned().fold(T::zero(), |a, b| a + b)
    }

    pub fn mass_at(&self, x: &[T; 2]) -> T {
        self.points
            .iter()
            .position(|p| p == x)
            .map(|i| self.masses[i].clone())
            .unwrap_or_else(T::zero)
    }

    /// Mean and covariance, in the measure's own arithmetic.
    pub fn moments(&self) -> ([T; 2], [[T; 2]; 2]) {
        let total = self.total_mass();
        let mut mean = [T::zero(), T::zero()];
        for (p, m) in self.points.iter().zip(&self.masses) {
            for k in 0..2 {
                mean[k] = mean[k].clone() + m.clone() * p[k].clone();
            }
        }
        let mean = mean.map(|x| x / total.clone());
        let mut cov: [[T; 2]; 2] = [[T::zero(), T::zero()], [T::zero(), T::zero()]];
        for (p, m) in self.points.iter().zip(&self.masses) {
            let d = [p[0].clone() - mean[0].clone(), p[1].clone() - mean[1].clone()];
            for i in 0..2 {
                for j in 0..2 {
                    cov[i][j] = cov[i][j].clone() + m.clone() * d[i].clone() * d[j].clone();
                }
            }
        }
        let cov = cov.map(|row| row.map(|x| x / total.clone()));
        (mean, cov)
    }

    /// `sum mass(x) exp(<theta, x>)`.
    pub fn laplace(&self, theta: Point) -> f64 {
        self.points
            .iter()
            .zip(&self.masses)
            .map(|(p, m)| m.to_f64() * (theta[0] * p[0].to_f64() + theta[1] * p[1].to_f64()).exp())
            .sum()
    }

    pub fn to_f64(&self) -> FiniteMeasure<f64> {
        FiniteMeasure {
            points: self.points.iter().map(|p| [p[0].to_f64(), p[1].to_f64()]).collect(),
            masses: self.masses.iter().map(Scalar::to_f64).collect(),
            degenerate: self.degenerate,
        }
    }
}

fn collinear<T: Scalar>(points: &[[T; 2]]) -> bool {
    let Some(o) = points.first() else {
        return true;
    };
    let tol = T::tolerance(MERGE_TOLERANCE);
    let Some(dir) = points.iter().find(|p| {
        (p[0].clone() - o[0].clone()).abs() > tol || (p[1].clone() - o[1].clone()).abs() > tol
    }) else {
        return true;
    };
    let u = [dir[0].clone() - o[0].clone(), dir[1].clone() - o[1].clone()];
    let scale = u[0].abs() + u[1].abs();
    points.iter().all(|p| {
        let w = [p[0].clone() - o[0].clone(), p[1].clone() - o[1].clone()];
        let cross = u[0].clone() * w[1].clone() - u[1].clone() * w[0].clone();
        cross.abs() <= tol.clone() * scale.clone() * (T::one() + w[0].abs() + w[1].abs())
    })
}

/// Compositions of `n` into `k` non-negative parts.
fn compositions(n: u32, k: usize) -> Vec<Vec<u32>> {
    if k == 0 {
        return if n == 0 { vec![vec![]] } else { vec![] };
    }
    if k == 1 {
        return vec![vec![n]];
    }
    let mut out = Vec::new();
    for first in (0..=n).rev() {
        for mut rest in compositions(n - first, k - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

fn multinomial<T: Scalar>(parts: &[u32]) -> T {
    // product of binomials C(n_1 + ... + n_i, n_i)
    let mut acc = T::one();
    let mut total = 0u64;
    for &p in parts {
        for j in 1..=p as u64 {
            total += 1;
            acc = acc * T::from_u64(total).expect("small integer") / T::from_u64(j).expect("small integer");
        }
    }
    acc
}

/// The `N`-fold convolution of the atomic mixture with weights `|alpha_i|`.
pub fn realize_measure<T: Scalar>(
    m: &CandidateModel<T>,
    verdict: &AdmissibilityVerdict,
) -> Result<FiniteMeasure<T>, MeasureError> {
    let n = match verdict.outcome {
        Outcome::CaseA { n } | Outcome::CaseB { n } => n,
        Outcome::Rejected { reason } => return Err(MeasureError::NotAdmissible(reason)),
    };
    let active = m.without_zero_weights();
    let weights: Vec<T> = active.weights().iter().map(|w| w.abs()).collect();
    let atoms = active.atoms();
    let mut points = Vec::new();
    let mut masses = Vec::new();
    for parts in compositions(n, atoms.len()) {
        let mut mass = multinomial::<T>(&parts);
        let mut point = [T::zero(), T::zero()];
        for ((&k, w), a) in parts.iter().zip(&weights).zip(atoms) {
            mass = mass * powi(w, k as usize);
            let k = T::from_u32(k).expect("small integer");
            point[0] = point[0].clone() + k.clone() * a.lambda.clone();
            point[1] = point[1].clone() + k * a.nu.clone();
        }
        points.push(point);
        masses.push(mass);
    }
    Ok(FiniteMeasure::from_parts(points, masses))
}

/// Exponential tilt `mass(x) exp(<theta, x>) / L(theta)`.
pub fn tilt_member<T: Scalar>(mu: &FiniteMeasure<T>, theta: Point) -> FiniteMeasure<f64> {
    let base = mu.to_f64();
    let exponents: Vec<f64> = base
        .points
        .iter()
        .map(|p| theta[0] * p[0] + theta[1] * p[1])
        .collect();
    let shift = exponents.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let raw: Vec<f64> = base
        .masses
        .iter()
        .zip(&exponents)
        .map(|(m, x)| m * (x - shift).exp())
        .collect();
    let total: f64 = raw.iter().sum();
    FiniteMeasure {
        points: base.points,
        masses: raw.into_iter().map(|x| x / total).collect(),
        degenerate: base.degenerate,
    }
}

/// Floating-point view of a model: exponent vectors, oriented weights and `r`.
#[derive(Debug, Clone, PartialEq)]
pub struct CumulantContext {
    vectors: Vec<Point>,
    weights: Vec<f64>,
    power: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CumulantValue {
    pub k: f64,
    pub mean: Point,
    pub variance: Matrix2,
}

impl CumulantContext {
    pub fn new<T: Scalar>(m: &CandidateModel<T>) -> Self {
        let active = m.without_zero_weights();
        Self {
            vectors: active.atoms().iter().map(|a| [a.lambda.to_f64(), a.nu.to_f64()]).collect(),
            weights: active.oriented_weights().iter().map(Scalar::to_f64).collect(),
            power: active.exponent().to_f64(),
        }
    }

    pub fn vectors(&self) -> &[Point] {
        &self.vectors
    }

    pub fn power(&self) -> f64 {
        self.power
    }

    pub fn positive_weights(&self) -> bool {
        self.weights.iter().all(|&w| w > 0.0)
    }

    /// Mixture probabilities `p_i(theta)` and `log S(theta)`.
    fn tilted(&self, theta: Point) -> Result<(Vec<f64>, f64), MeasureError> {
        let exps: Vec<f64> = self.vectors.iter().map(|v| theta[0] * v[0] + theta[1] * v[1]).collect();
        let shift = exps.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let terms: Vec<f64> = self
            .weights
            .iter()
            .zip(&exps)
            .map(|(w, x)| w * (x - shift).exp())
            .collect();
        let s: f64 = terms.iter().sum();
        if !(s > 0.0) {
            return Err(MeasureError::DomainViolation(s * shift.exp()));
        }
        Ok((terms.into_iter().map(|t| t / s).collect(), s.ln() + shift))
    }

    pub fn eval(&self, theta: Point) -> Result<CumulantValue, MeasureError> {
        let (p, log_s) = self.tilted(theta)?;
        let mut m = [0.0; 2];
        let mut second = [[0.0; 2]; 2];
        for (pi, v) in p.iter().zip(&self.vectors) {
            for i in 0..2 {
                m[i] += pi * v[i];
                for j in 0..2 {
                    second[i][j] += pi * v[i] * v[j];
                }
            }
        }
        let r = self.power;
        let mut variance = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                variance[i][j] = r * (second[i][j] - m[i] * m[j]);
            }
        }
        variance[1][0] = variance[0][1];
        Ok(CumulantValue { k: r * log_s, mean: [r * m[0], r * m[1]], variance })
    }

    pub fn k(&self, theta: Point) -> Result<f64, MeasureError> {
        self.tilted(theta).map(|(_, log_s)| self.power * log_s)
    }
}

/// Cumulant function, mean and covariance at `theta`.
pub fn cumulant_eval<T: Scalar>(m: &CandidateModel<T>, theta: Point) -> Result<CumulantValue, MeasureError> {
    CumulantContext::new(m).eval(theta)
}

/// Transform of the model itself, `S(theta)^r` with oriented weights.
pub fn model_laplace<T: Scalar>(m: &CandidateModel<T>, theta: Point) -> Result<f64, MeasureError> {
    CumulantContext::new(m).k(theta).map(f64::exp)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InversionOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for InversionOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_iter: 100 }
    }
}

/// Parameter whose mean is `target`, by damped Newton from the origin.
pub fn mean_to_theta<T: Scalar>(
    m: &CandidateModel<T>,
    target: Point,
    opts: &InversionOptions,
) -> Result<Point, MeasureError> {
    let ctx = CumulantContext::new(m);
    if !ctx.positive_weights() {
        return Err(MeasureError::SignedWeights);
    }
    let hull: Vec<Point> = ctx.vectors.iter().map(|v| [ctx.power * v[0], ctx.power * v[1]]).collect();
    if collinear(&hull) {
        return Err(MeasureError::Degenerate);
    }
    if !strictly_inside(&convex_hull(&hull), target) {
        return Err(MeasureError::OutOfMeanDomain);
    }

    // phi(theta) = k(theta) - <theta, target> is convex with gradient `res`
    let residual = |theta: Point| -> Result<(Point, f64, Matrix2, f64), MeasureError> {
        let c = ctx.eval(theta)?;
        let r = [c.mean[0] - target[0], c.mean[1] - target[1]];
        let phi = c.k - theta[0] * target[0] - theta[1] * target[1];
        Ok((r, r[0].hypot(r[1]), c.variance, phi))
    };
    let mut theta = [0.0, 0.0];
    let (mut res, mut norm, mut var, mut phi) = residual(theta)?;
    for _ in 0..opts.max_iter {
        if norm <= opts.tol {
            return Ok(theta);
        }
        let det = var[0][0] * var[1][1] - var[0][1] * var[1][0];
        if det.abs() < f64::MIN_POSITIVE {
            break;
        }
        let step = [
            (var[1][1] * res[0] - var[0][1] * res[1]) / det,
            (var[0][0] * res[1] - var[1][0] * res[0]) / det,
        ];
        let slope = res[0] * step[0] + res[1] * step[1];
        let flat = slope <= 1e-10 * (1.0 + phi.abs());
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let cand = [theta[0] - t * step[0], theta[1] - t * step[1]];
            if let Ok((r, n, v, p)) = residual(cand) {
                // Armijo on phi; once the decrease is below rounding, residual decrease
                if p <= phi - 1e-4 * t * slope || (flat && n < norm) {
                    (theta, res, norm, var, phi) = (cand, r, n, v, p);
                    accepted = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    if norm <= opts.tol {
        Ok(theta)
    } else {
        Err(MeasureError::NoConvergence { iterations: opts.max_iter, residual: norm })
    }
}

fn cross(o: Point, a: Point, b: Point) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Counter-clockwise hull by the monotone chain.
fn convex_hull(points: &[Point]) -> Vec<Point> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut lower: Vec<Point> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<Point> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

fn strictly_inside(hull: &[Point], x: Point) -> bool {
    if hull.len() < 3 {
        return false;
    }
    let n = hull.len();
    (0..n).all(|i| {
        let a = hull[i];
        let b = hull[(i + 1) % n];
        let len = (b[0] - a[0]).hypot(b[1] - a[1]);
        cross(a, b, x) > 1e-12 * len * (1.0 + x[0].abs() + x[1].abs())
    })
}

/// `n x n` grid on `[lo, hi]^2`, row-major in the first coordinate.
pub fn theta_grid(n: usize, lo: f64, hi: f64) -> Vec<Point> {
    let at = |i: usize| if n == 1 { (lo + hi) / 2.0 } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 };
    (0..n).flat_map(|i| (0..n).map(move |j| [at(i), at(j)])).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagCheckReport {
    pub grid: Vec<Point>,
    /// Absolute deviations of the two diagonal entries at each grid point.
    pub deviations: Vec<[f64; 2]>,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Compares the covariance diagonal with the quadratic variance function
/// along the parameter grid.
pub fn diag_variance_check<T: Scalar>(
    m: &CandidateModel<T>,
    p: &DiagonalVFParams<T>,
    grid: &[Point],
    tol: f64,
) -> Result<DiagCheckReport, MeasureError> {
    let ctx = CumulantContext::new(m);
    let p = p.to_f64();
    let mut deviations = Vec::with_capacity(grid.len());
    for &theta in grid {
        let c = ctx.eval(theta)?;
        let want = p.diagonal_at(c.mean);
        deviations.push([
            (c.variance[0][0] - want[0]).abs(),
            (c.variance[1][1] - want[1]).abs(),
        ]);
    }
    let max_deviation = deviations
        .iter()
        .flat_map(|d| d.iter().copied())
        .fold(0.0, f64::max);
    Ok(DiagCheckReport {
        grid: grid.to_vec(),
        deviations,
        max_deviation,
        tolerance: tol,
        pass: max_deviation <= tol,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionReport {
    pub max_deviation: f64,
    /// Computed in exact arithmetic; `pass` then means zero deviation.
    pub exact: bool,
    /// Number of distinct values of `x + y`.
    pub sums: usize,
    pub pass: bool,
}

/// For independent `X, Y ~ mu`, compares
/// `E[(X1 - Y1)^2 - 2A X1 Y1 | X + Y = s]` with `a s1 + b s2 + 2e` and the
/// second-coordinate counterpart with `c s1 + d s2 + 2f`, over all `s`.
pub fn regression_check<T: Scalar>(mu: &FiniteMeasure<T>, p: &DiagonalVFParams<T>, tol: f64) -> RegressionReport {
    struct Group<T> {
        s: [T; 2],
        weight: T,
        first: T,
        second: T,
    }
    let merge = T::tolerance(MERGE_TOLERANCE);
    let two = T::one() + T::one();
    let big_a = p.quadratic.clone();
    let mut groups: Vec<Group<T>> = Vec::new();
    for (x, mx) in mu.points.iter().zip(&mu.masses) {
        for (y, my) in mu.points.iter().zip(&mu.masses) {
            let w = mx.clone() * my.clone();
            let s = [x[0].clone() + y[0].clone(), x[1].clone() + y[1].clone()];
            let stat = |k: usize| {
                let diff = x[k].clone() - y[k].clone();
                diff.clone() * diff - two.clone() * big_a.clone() * x[k].clone() * y[k].clone()
            };
            let (f, g) = (stat(0), stat(1));
            let idx = groups.iter().position(|gr| {
                (gr.s[0].clone() - s[0].clone()).abs() <= merge && (gr.s[1].clone() - s[1].clone()).abs() <= merge
            });
            let idx = idx.unwrap_or_else(|| {
                groups.push(Group { s, weight: T::zero(), first: T::zero(), second: T::zero() });
                groups.len() - 1
            });
            let gr = &mut groups[idx];
            gr.weight = gr.weight.clone() + w.clone();
            gr.first = gr.first.clone() + w.clone() * f;
            gr.second = gr.second.clone() + w * g;
        }
    }
    let mut worst = T::zero();
    for gr in &groups {
        let want1 = p.a.clone() * gr.s[0].clone() + p.b.clone() * gr.s[1].clone() + two.clone() * p.e.clone();
        let want2 = p.c.clone() * gr.s[0].clone() + p.d.clone() * gr.s[1].clone() + two.clone() * p.f.clone();
        let d1 = (gr.first.clone() / gr.weight.clone() - want1).abs();
        let d2 = (gr.second.clone() / gr.weight.clone() - want2).abs();
        for d in [d1, d2] {
            if d > worst {
                worst = d;
            }
        }
    }
    let pass = if T::EXACT { worst.is_zero() } else { worst.to_f64() <= tol };
    RegressionReport { max_deviation: worst.to_f64(), exact: T::EXACT, sums: groups.len(), pass }
}

/// `lambda^2 - a lambda - b nu + eA` at a point; zero on the support
/// parabola of a single mixture.
pub fn parabola_residual<T: Scalar>(x: &[T; 2], p: &DiagonalVFParams<T>) -> T {
    x[0].clone() * x[0].clone() - p.a.clone() * x[0].clone() - p.b.clone() * x[1].clone()
        + p.e.clone() * p.quadratic.clone()
}

/// Central second differences of `f`; off-diagonals averaged.
pub fn fd_hessian<F: Fn(Point) -> f64>(f: F, theta: Point, h: f64) -> Matrix2 {
    let at = |d0: f64, d1: f64| f([theta[0] + d0, theta[1] + d1]);
    let f0 = at(0.0, 0.0);
    let h00 = (at(h, 0.0) - 2.0 * f0 + at(-h, 0.0)) / (h * h);
    let h11 = (at(0.0, h) - 2.0 * f0 + at(0.0, -h)) / (h * h);
    let cross = (at(h, h) - at(h, -h) - at(-h, h) + at(-h, -h)) / (4.0 * h * h);
    let alt = (at(h, h) - at(h, 0.0) - at(0.0, h) + 2.0 * f0 - at(-h, 0.0) - at(0.0, -h) + at(-h, -h))
        / (2.0 * h * h);
    let off = 0.5 * (cross + alt);
    [[h00, off], [off, h11]]
}

/// [`fd_hessian`] of the model's cumulant function.
pub fn fd_hessian_model<T: Scalar>(m: &CandidateModel<T>, theta: Point, h: f64) -> Result<Matrix2, MeasureError> {
    let ctx = CumulantContext::new(m);
    for dx in [-h, 0.0, h] {
        for dy in [-h, 0.0, h] {
            ctx.k([theta[0] + dx, theta[1] + dy])?;
        }
    }
    Ok(fd_hessian(|t| ctx.k(t).unwrap_or(f64::NAN), theta, h))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{admissibility_verdict, candidate_model, Atom, VerdictOptions};
    use crate::scalar::Rational;
    use num_bigint::BigInt;

    fn e1_params() -> DiagonalVFParams {
        DiagonalVFParams::from_array([-1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 0.0]).unwrap()
    }

    fn e1() -> CandidateModel {
        candidate_model(&e1_params(), &[0.25, 0.5, 0.25], 1e-8).unwrap()
    }

    fn realized(m: &CandidateModel) -> FiniteMeasure {
        realize_measure(m, &admissibility_verdict(m, &VerdictOptions::default())).unwrap()
    }

    #[test]
    fn single_fold_is_the_mixture() {
        let mu = realized(&e1());
        assert_eq!(mu.points(), &[[-1.0, 1.0], [0.0, 0.0], [1.0, 1.0]]);
        assert_eq!(mu.masses(), &[0.25, 0.5, 0.25]);
        assert!(!mu.is_degenerate());
    }

    #[test]
    fn two_atoms_squared() {
        let m = CandidateModel::new(vec![Atom::new(0.0, 0.0), Atom::new(1.0, 2.0)], vec![0.5, 0.5], 2.0).unwrap();
        let mu = realized(&m);
        assert_eq!(mu.mass_at(&[0.0, 0.0]), 0.25);
        assert_eq!(mu.mass_at(&[1.0, 2.0]), 0.5);
        assert_eq!(mu.mass_at(&[2.0, 4.0]), 0.25);
        assert!(mu.is_degenerate());
    }

    #[test]
    fn six_points_in_exact_arithmetic() {
        let q = |n: i64, d: i64| Rational::new(BigInt::from(n), BigInt::from(d));
        let atoms = vec![Atom::new(q(0, 1), q(0, 1)), Atom::new(q(1, 1), q(1, 1)), Atom::new(q(2, 1), q(0, 1))];
        let m = CandidateModel::new(atoms, vec![q(1, 4), q(1, 2), q(1, 4)], q(2, 1)).unwrap();
        let v = admissibility_verdict(&m, &VerdictOptions::default());
        let mu = realize_measure(&m, &v).unwrap();
        assert_eq!(mu.len(), 6);
        assert_eq!(mu.mass_at(&[q(2, 1), q(2, 1)]), q(1, 4));
        assert_eq!(mu.mass_at(&[q(2, 1), q(0, 1)]), q(1, 8));
        assert_eq!(mu.total_mass(), q(1, 1));
    }

    #[test]
    fn rejected_models_are_not_realized() {
        let m = e1();
        let mut v = admissibility_verdict(&m, &VerdictOptions::default());
        v.outcome = Outcome::Rejected { reason: RejectReason::MixedSigns };
        assert_eq!(realize_measure(&m, &v), Err(MeasureError::NotAdmissible(RejectReason::MixedSigns)));
    }

    #[test]
    fn cumulants_at_origin() {
        let c = cumulant_eval(&e1(), [0.0, 0.0]).unwrap();
        assert_eq!(c.k, 0.0);
        assert_eq!(c.mean, [0.0, 0.5]);
        assert_eq!(c.variance, [[0.5, 0.0], [0.0, 0.25]]);

        let p2 = DiagonalVFParams::from_array([-1.0, 0.0, 1.0, 0.0, -1.0, 1.0, 0.0]).unwrap();
        let m = candidate_model(&p2, &[0.25, 0.5, 0.25], 1e-8).unwrap();
        let c = cumulant_eval(&m, [0.0, 0.0]).unwrap();
        assert_eq!(c.mean, [0.0, -0.5]);
        assert_eq!(c.variance, [[0.5, 0.0], [0.0, 0.25]]);
    }

    #[test]
    fn domain_violation_for_signed_mixtures() {
        let m = CandidateModel::new(vec![Atom::new(0.0, 0.0), Atom::new(1.0, 0.0)], vec![2.0, -1.0], 1.0).unwrap();
        assert!(cumulant_eval(&m, [0.0, 0.0]).is_ok());
        assert!(matches!(cumulant_eval(&m, [1.0, 0.0]), Err(MeasureError::DomainViolation(_))));
    }

    #[test]
    fn inversion() {
        let m = e1();
        assert_eq!(mean_to_theta(&m, [0.0, 0.5], &InversionOptions::default()).unwrap(), [0.0, 0.0]);
        let theta = mean_to_theta(&m, [0.2, 0.6], &InversionOptions::default()).unwrap();
        let back = cumulant_eval(&m, theta).unwrap().mean;
        assert!((back[0] - 0.2).abs() <= 1e-10 && (back[1] - 0.6).abs() <= 1e-10);
        assert_eq!(mean_to_theta(&m, [5.0, 5.0], &InversionOptions::default()), Err(MeasureError::OutOfMeanDomain));
        let line = CandidateModel::new(vec![Atom::new(0.0, 0.0), Atom::new(1.0, 1.0)], vec![0.5, 0.5], 1.0).unwrap();
        assert_eq!(mean_to_theta(&line, [0.5, 0.5], &InversionOptions::default()), Err(MeasureError::Degenerate));
    }

    #[test]
    fn diagonal_check_examples() {
        let grid = theta_grid(11, -1.0, 1.0);
        let r = diag_variance_check(&e1(), &e1_params(), &grid, 1e-10).unwrap();
        assert!(r.pass, "{}", r.max_deviation);
        assert_eq!(r.grid.len(), 121);

        let p2 = DiagonalVFParams::from_array([-1.0, 0.0, 1.0, 0.0, -1.0, 1.0, 0.0]).unwrap();
        let m = candidate_model(&p2, &[0.25, 0.5, 0.25], 1e-8).unwrap();
        assert!(diag_variance_check(&m, &p2, &grid, 1e-10).unwrap().pass);

        let shifted = CandidateModel::new(
            vec![Atom::new(-1.0, 2.0), Atom::new(0.0, 1.0), Atom::new(1.0, 2.0)],
            vec![0.25, 0.5, 0.25],
            1.0,
        )
        .unwrap();
        let r = diag_variance_check(&shifted, &p2, &grid, 1e-10).unwrap();
        assert!(!r.pass);
        assert!(r.max_deviation >= 0.5);
    }

    #[test]
    fn regression_examples() {
        let mu = realized(&e1());
        let r = regression_check(&mu, &e1_params(), 1e-12);
        assert!(r.pass);
        assert_eq!(r.max_deviation, 0.0);

        let mut off = e1_params();
        off.e += 0.1;
        let r = regression_check(&mu, &off, 1e-12);
        assert!(!r.pass);
        assert!((r.max_deviation - 0.2).abs() < 1e-12);
    }

    #[test]
    fn tilting() {
        let mu = realized(&e1());
        assert_eq!(tilt_member(&mu, [0.0, 0.0]), mu);
        let far = tilt_member(&mu, [10.0, 0.0]);
        assert!(far.mass_at(&[1.0, 1.0]) > 0.99);
        let theta = [0.3, -0.7];
        let (mean, cov) = tilt_member(&mu, theta).moments();
        let c = cumulant_eval(&e1(), theta).unwrap();
        for i in 0..2 {
            assert!((mean[i] - c.mean[i]).abs() < 1e-14);
            for j in 0..2 {
                assert!((cov[i][j] - c.variance[i][j]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn hessians() {
        let h = fd_hessian_model(&e1(), [0.0, 0.0], 1e-4).unwrap();
        let want = [[0.5, 0.0], [0.0, 0.25]];
        for i in 0..2 {
            for j in 0..2 {
                assert!((h[i][j] - want[i][j]).abs() < 1e-6);
            }
        }
        let q = fd_hessian(|t| t[0] * t[0] + t[1] * t[1], [0.3, -0.2], 1e-3);
        for i in 0..2 {
            for j in 0..2 {
                let want = if i == j { 2.0 } else { 0.0 };
                assert!((q[i][j] - want).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn parabola_support() {
        let mu = realized(&e1());
        for x in mu.points() {
            assert_eq!(parabola_residual(x, &e1_params()), 0.0);
        }
    }

    #[test]
    fn hull() {
        let h = convex_hull(&[[0.0, 0.0], [1.0, 0.0], [0.5, 0.2], [0.0, 1.0], [1.0, 1.0]]);
        assert_eq!(h.len(), 4);
        assert!(strictly_inside(&h, [0.5, 0.5]));
        assert!(!strictly_inside(&h, [1.0, 0.5]));
    }
}
