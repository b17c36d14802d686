//! Generalized binomial expansions of `L = S^r` around a dominant atom, and
//! unboundedness witnesses on the imaginary axis.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::measure::Point;
use crate::model::CandidateModel;
use crate::scalar::{near_integer, Scalar};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SeriesError {
    #[error("no parameter makes a single atom dominate the mixture")]
    NoDominantAtom,
    #[error("weights sum to {0}, expected +1 or -1")]
    NotNormalized(f64),
}

/// Exponent keys are rounded to this grid before aggregation.
pub const KEY_QUANTUM: f64 = 1e-9;

/// Coefficients with value below `-NEGATIVE_TOLERANCE` count as negative.
pub const NEGATIVE_TOLERANCE: f64 = 1e-12;

pub const DEFAULT_DEPTH: usize = 8;

/// `r (r - 1) ... (r - k + 1) / k!`.
pub fn generalized_binomial(r: f64, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (r - i as f64) / (i + 1) as f64)
}

/// Position of the pivot among the active atoms, ordered by abscissa.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PivotCase {
    /// Pivot is the first atom; the other exponents lie above it.
    Lowest,
    /// Pivot is the last atom; the other exponents lie below it.
    Highest,
    /// Pivot sits between other atoms and carries the dominant weight.
    Interior,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesTerm {
    /// Absolute exponent vector `r v_pivot + sum n_i (v_i - v_pivot)`.
    pub point: Point,
    /// Smallest total order `sum n_i` producing this exponent.
    pub order: usize,
    pub coefficient: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesReport {
    pub depth: usize,
    /// Index of the pivot among atoms with non-zero weight.
    pub pivot: usize,
    pub pivot_case: PivotCase,
    /// Parameter at which the non-pivot terms sum to less than one in modulus.
    pub probe: Point,
    pub probe_ratio: f64,
    pub terms: Vec<SeriesTerm>,
    pub first_negative: Option<SeriesTerm>,
    /// No two multi-indices of order at most `depth` share an exponent, or
    /// the series terminates.
    pub complete: bool,
    /// `r` is a non-negative integer not above `depth`: the series is finite.
    pub terminates: bool,
}

fn key(p: Point) -> (i64, i64) {
    ((p[0] / KEY_QUANTUM).round() as i64, (p[1] / KEY_QUANTUM).round() as i64)
}

/// Sum of `|alpha_i / alpha_pivot| exp(<d_i, theta>)` over non-pivot atoms.
fn ratio(rel: &[(Point, f64)], theta: Point) -> f64 {
    rel.iter()
        .map(|(d, w)| w.abs() * (d[0] * theta[0] + d[1] * theta[1]).exp())
        .sum()
}

/// Scans directions and radii for a parameter at which the pivot dominates.
fn find_probe(rel: &[(Point, f64)]) -> Option<(Point, f64)> {
    let at_origin = ratio(rel, [0.0, 0.0]);
    if at_origin < 1.0 {
        return Some(([0.0, 0.0], at_origin));
    }
    const DIRECTIONS: usize = 144;
    let radii = (0..=40).map(|k| 0.25 * 1.25f64.powi(k));
    for t in radii {
        let best = (0..DIRECTIONS)
            .map(|k| {
                let phi = std::f64::consts::TAU * k as f64 / DIRECTIONS as f64;
                let theta = [t * phi.cos(), t * phi.sin()];
                (theta, ratio(rel, theta))
            })
            .min_by(|a, b| a.1.total_cmp(&b.1))?;
        if best.1 < 1.0 {
            return Some(best);
        }
    }
    None
}

/// Compositions of `n` into `k` non-negative parts.
fn compositions(n: usize, k: usize, out: &mut Vec<Vec<usize>>) {
    fn go(n: usize, k: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k == 1 {
            prefix.push(n);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for first in 0..=n {
            prefix.push(first);
            go(n - first, k - 1, prefix, out);
            prefix.pop();
        }
    }
    if k == 0 {
        if n == 0 {
            out.push(Vec::new());
        }
        return;
    }
    go(n, k, &mut Vec::new(), out);
}

fn multinomial(parts: &[usize]) -> f64 {
    let mut acc = 1.0;
    let mut total = 0.0;
    for &p in parts {
        for j in 1..=p {
            total += 1.0;
            acc = acc * total / j as f64;
        }
    }
    acc
}

/// Expands `L(theta) = alpha_p^r e^{r <v_p, theta>} (1 + sum rho_i e^{<d_i, theta>})^r`
/// with `rho_i = alpha_i / alpha_p`, `d_i = v_i - v_p`, up to total order `depth`.
///
/// The pivot is the atom with the largest weight after orienting the weights
/// to a positive sum; the probe certifies that the series converges near it.
pub fn expand_series<T: Scalar>(m: &CandidateModel<T>, depth: usize) -> Result<SeriesReport, SeriesError> {
    let active = m.without_zero_weights();
    let atoms: Vec<Point> = active.atoms().iter().map(|a| [a.lambda.to_f64(), a.nu.to_f64()]).collect();
    let weights: Vec<f64> = active.oriented_weights().iter().map(Scalar::to_f64).collect();
    let r = active.exponent().to_f64();
    if atoms.is_empty() {
        return Err(SeriesError::NoDominantAtom);
    }
    let pivot = (0..weights.len())
        .fold(0, |best, i| if weights[i].abs() > weights[best].abs() { i } else { best });
    let alpha_p = weights[pivot];
    if alpha_p <= 0.0 {
        return Err(SeriesError::NoDominantAtom);
    }
    let vp = atoms[pivot];
    let rel: Vec<(Point, f64)> = atoms
        .iter()
        .zip(&weights)
        .enumerate()
        .filter(|(i, _)| *i != pivot)
        .map(|(_, (v, w))| ([v[0] - vp[0], v[1] - vp[1]], w / alpha_p))
        .collect();
    let (probe, probe_ratio) = find_probe(&rel).ok_or(SeriesError::NoDominantAtom)?;

    let pivot_case = if pivot == 0 {
        PivotCase::Lowest
    } else if pivot == atoms.len() - 1 {
        PivotCase::Highest
    } else {
        PivotCase::Interior
    };
    let terminates = near_integer(&r, 1e-9).is_some_and(|n| n >= 0 && n as usize <= depth);

    let lead = alpha_p.powf(r);
    let base = [r * vp[0], r * vp[1]];
    let mut acc: BTreeMap<(i64, i64), (SeriesTerm, usize)> = BTreeMap::new();
    let mut collision = false;
    for order in 0..=depth {
        let binom = generalized_binomial(r, order);
        let mut parts = Vec::new();
        compositions(order, rel.len(), &mut parts);
        for n in parts {
            let mut coef = lead * binom * multinomial(&n);
            let mut point = base;
            for (&k, (d, rho)) in n.iter().zip(&rel) {
                coef *= rho.powi(k as i32);
                point[0] += k as f64 * d[0];
                point[1] += k as f64 * d[1];
            }
            let entry = acc
                .entry(key(point))
                .or_insert((SeriesTerm { point, order, coefficient: 0.0 }, 0));
            entry.0.coefficient += coef;
            entry.1 += 1;
            if entry.1 > 1 {
                collision = true;
            }
        }
    }
    let terms: Vec<SeriesTerm> = acc
        .into_values()
        .map(|(t, _)| t)
        .filter(|t| t.coefficient != 0.0)
        .collect();
    let first_negative = terms
        .iter()
        .filter(|t| t.coefficient < -NEGATIVE_TOLERANCE)
        .min_by(|a, b| a.order.cmp(&b.order).then(a.point[0].total_cmp(&b.point[0])))
        .copied();
    Ok(SeriesReport {
        depth,
        pivot,
        pivot_case,
        probe,
        probe_ratio,
        terms,
        first_negative,
        complete: terminates || !collision,
        terminates,
    })
}

/// Least `k <= depth` at which `alpha_1^r binom(r, k) (alpha_2 / alpha_1)^k`
/// is negative, for a two-atom mixture with weights summing to `+-1`.
pub fn first_negative_coefficient(
    alpha1: f64,
    alpha2: f64,
    r: f64,
    depth: usize,
) -> Result<Option<usize>, SeriesError> {
    let sum = alpha1 + alpha2;
    let sign = if (sum - 1.0).abs() <= 1e-9 {
        1.0
    } else if (sum + 1.0).abs() <= 1e-9 {
        -1.0
    } else {
        return Err(SeriesError::NotNormalized(sum));
    };
    let (a1, a2) = (sign * alpha1, sign * alpha2);
    if a1 <= 0.0 {
        return Err(SeriesError::NoDominantAtom);
    }
    let lead = a1.powf(r);
    let q = a2 / a1;
    Ok((0..=depth).find(|&k| lead * generalized_binomial(r, k) * q.powi(k as i32) < 0.0))
}

/// `e^{lambda t} [(a0 + t b0) cos(gamma t) + (a1 + t b1) sin(gamma t)]`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct OscillatoryBlock {
    pub lambda: f64,
    pub gamma: f64,
    pub a0: f64,
    pub a1: f64,
    pub b0: f64,
    pub b1: f64,
}

/// `P_m(t) + sum A_i e^{lambda_i t} + B t e^{gamma t} + oscillatory blocks`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct EliminationForm {
    /// Polynomial coefficients, constant term first.
    pub polynomial: Vec<f64>,
    /// Pairs `(A_i, lambda_i)`.
    pub exponentials: Vec<(f64, f64)>,
    /// Pair `(B, gamma)`.
    pub linear_exponential: Option<(f64, f64)>,
    pub blocks: Vec<OscillatoryBlock>,
}

impl EliminationForm {
    pub fn is_empty(&self) -> bool {
        self.polynomial.is_empty()
            && self.exponentials.is_empty()
            && self.linear_exponential.is_none()
            && self.blocks.is_empty()
    }

    /// `t -> S(t u)` for the mixture of `m` along direction `u`.
    pub fn along_line<T: Scalar>(m: &CandidateModel<T>, u: Point) -> Self {
        let active = m.without_zero_weights();
        let exponentials = active
            .atoms()
            .iter()
            .zip(active.oriented_weights())
            .map(|(a, w)| (w.to_f64(), a.lambda.to_f64() * u[0] + a.nu.to_f64() * u[1]))
            .collect();
        Self { exponentials, ..Self::default() }
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        let poly = self
            .polynomial
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c);
        let exps: Complex64 = self.exponentials.iter().map(|&(a, l)| a * (l * z).exp()).sum();
        let linear = self
            .linear_exponential
            .map_or(Complex64::new(0.0, 0.0), |(b, g)| b * z * (g * z).exp());
        let blocks: Complex64 = self
            .blocks
            .iter()
            .map(|k| {
                (k.lambda * z).exp()
                    * ((k.a0 + z * k.b0) * (k.gamma * z).cos() + (k.a1 + z * k.b1) * (k.gamma * z).sin())
            })
            .sum();
        poly + exps + linear + blocks
    }

    /// `|f(i t)|^r`.
    pub fn magnitude(&self, t: f64, r: f64) -> f64 {
        self.eval(Complex64::new(0.0, t)).norm().powf(r)
    }
}

/// Threshold above which `|f(it)|^r` cannot be a characteristic function.
pub const MAGNITUDE_SLACK: f64 = 1e-6;

/// First grid point with `|f(it)|^r > 1 + MAGNITUDE_SLACK`.
pub fn magnitude_scan(f: &EliminationForm, r: f64, grid: &[f64]) -> Option<f64> {
    grid.iter().copied().find(|&t| f.magnitude(t, r) > 1.0 + MAGNITUDE_SLACK)
}

/// `n` equally spaced points on `[lo, hi]`.
pub fn linear_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}
