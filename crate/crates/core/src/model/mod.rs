//! Candidate Laplace transforms `L = (sum_i alpha_i exp(lambda_i t1 + nu_i t2))^r`
//! and the decision whether they belong to probability measures.

mod lattice;

pub use lattice::{
    is_mixed_sign, star_condition, LatticeMatrix, StarMethod, StarReport, DEFAULT_SEARCH_BOUND,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::roots::{
    build_characteristic_quartic, dual_ordinate, rational_real_roots, solve_quartic,
    DiagonalVFParams, RootsError,
};
use crate::scalar::{near_integer, Rational, Scalar};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("only {n_r} distinct real root(s); at least two are required")]
    NRootDeficit { n_r: usize },
    #[error("expected {expected} weights, got {got}")]
    WeightCountMismatch { expected: usize, got: usize },
    #[error("atoms must have pairwise distinct abscissas")]
    DuplicateAbscissa,
    #[error("the exponent r must be positive")]
    NonPositiveExponent,
    #[error("lattice matrix needs 3 or 4 atoms, got {0}")]
    UnsupportedArity(usize),
    #[error(transparent)]
    Roots(#[from] RootsError),
}

/// Exponent vector `(lambda, nu)` of one mixture component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Atom<T = f64> {
    pub lambda: T,
    pub nu: T,
}

impl<T: Scalar> Atom<T> {
    pub fn new(lambda: T, nu: T) -> Self {
        Self { lambda, nu }
    }

    pub fn to_f64(&self) -> Atom<f64> {
        Atom { lambda: self.lambda.to_f64(), nu: self.nu.to_f64() }
    }

    pub fn point(&self) -> [T; 2] {
        [self.lambda.clone(), self.nu.clone()]
    }
}

/// Atoms sorted by abscissa, their weights and the exponent `r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateModel<T = f64> {
    atoms: Vec<Atom<T>>,
    weights: Vec<T>,
    exponent: T,
}

impl<T: Scalar> CandidateModel<T> {
    /// Sorts atoms (with their weights) by abscissa.
    pub fn new(atoms: Vec<Atom<T>>, weights: Vec<T>, exponent: T) -> Result<Self, ModelError> {
        if atoms.len() != weights.len() {
            return Err(ModelError::WeightCountMismatch { expected: atoms.len(), got: weights.len() });
        }
        if exponent <= T::zero() {
            return Err(ModelError::NonPositiveExponent);
        }
        let mut pairs: Vec<_> = atoms.into_iter().zip(weights).collect();
        pairs.sort_by(|x, y| {
            x.0.lambda
                .partial_cmp(&y.0.lambda)
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        if pairs.windows(2).any(|w| w[0].0.lambda == w[1].0.lambda) {
            return Err(ModelError::DuplicateAbscissa);
        }
        let (atoms, weights) = pairs.into_iter().unzip();
        Ok(Self { atoms, weights, exponent })
    }

    pub fn atoms(&self) -> &[Atom<T>] {
        &self.atoms
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn exponent(&self) -> &T {
        &self.exponent
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn weight_sum(&self) -> T {
        self.weights.iter().cloned().fold(T::zero(), |a, b| a + b)
    }

    /// Weights with the overall sign flipped when they sum to a negative
    /// number, so that the mixture sum is positive near the origin.
    pub fn oriented_weights(&self) -> Vec<T> {
        if self.weight_sum() < T::zero() {
            self.weights.iter().map(|w| -w.clone()).collect()
        } else {
            self.weights.clone()
        }
    }

    /// Same model without zero-weight atoms.
    pub fn without_zero_weights(&self) -> Self {
        let (atoms, weights) = self
            .atoms
            .iter()
            .zip(&self.weights)
            .filter(|(_, w)| !w.is_zero())
            .map(|(a, w)| (a.clone(), w.clone()))
            .unzip();
        Self { atoms, weights, exponent: self.exponent.clone() }
    }

    pub fn to_f64(&self) -> CandidateModel<f64> {
        CandidateModel {
            atoms: self.atoms.iter().map(Atom::to_f64).collect(),
            weights: self.weights.iter().map(Scalar::to_f64).collect(),
            exponent: self.exponent.to_f64(),
        }
    }
}

/// Atoms over the given distinct real roots, ordinates from the first
/// parabola relation, exponent `-1/A`.
pub fn model_from_roots<T: Scalar>(
    p: &DiagonalVFParams<T>,
    roots: &[T],
    weights: &[T],
    tol: f64,
) -> Result<CandidateModel<T>, ModelError> {
    if roots.len() < 2 {
        return Err(ModelError::NRootDeficit { n_r: roots.len() });
    }
    if weights.len() != roots.len() {
        return Err(ModelError::WeightCountMismatch { expected: roots.len(), got: weights.len() });
    }
    let atoms = roots
        .iter()
        .map(|l| dual_ordinate(l, p, tol).map(|d| Atom::new(l.clone(), d.nu)))
        .collect::<Result<Vec<_>, _>>()?;
    CandidateModel::new(atoms, weights.to_vec(), p.exponent())
}

/// Solves the characteristic quartic and attaches `weights` positionally to
/// the distinct real roots in ascending order.
pub fn candidate_model(
    p: &DiagonalVFParams<f64>,
    weights: &[f64],
    tol: f64,
) -> Result<CandidateModel<f64>, ModelError> {
    let roots = solve_quartic(&build_characteristic_quartic(p), tol);
    model_from_roots(p, &roots.distinct_real(), weights, tol)
}

/// Exact counterpart of [`candidate_model`], available when every real root
/// of the quartic is rational. `Ok(None)` otherwise.
pub fn candidate_model_exact(
    p: &DiagonalVFParams<Rational>,
    weights: &[Rational],
    tol: f64,
) -> Result<Option<CandidateModel<Rational>>, ModelError> {
    let exact_q = build_characteristic_quartic(p);
    let roots = solve_quartic(&exact_q.to_f64(), tol);
    let Some(exact_roots) = rational_real_roots(&exact_q, &roots) else {
        return Ok(None);
    };
    let lambdas: Vec<Rational> = exact_roots.into_iter().map(|(x, _)| x).collect();
    model_from_roots(p, &lambdas, weights, 0.0).map(Some)
}

/// Moves the first atom to the origin: `(lambda_i - lambda_1, lambda_i^2 - lambda_1^2)`.
pub fn normalize_model<T: Scalar>(m: &CandidateModel<T>) -> CandidateModel<T> {
    let Some(first) = m.atoms.first() else {
        return m.clone();
    };
    let l1 = first.lambda.clone();
    let atoms = m
        .atoms
        .iter()
        .map(|a| {
            Atom::new(
                a.lambda.clone() - l1.clone(),
                a.lambda.clone() * a.lambda.clone() - l1.clone() * l1.clone(),
            )
        })
        .collect();
    CandidateModel { atoms, weights: m.weights.clone(), exponent: m.exponent.clone() }
}

/// Rows `(lambda_i - lambda_1, lambda_i^2 - lambda_1^2, 0)` for `i >= 2`,
/// zero-padded to three rows. Computed exactly from the abscissas.
pub fn build_lambda_matrix<T: Scalar>(m: &CandidateModel<T>) -> Result<LatticeMatrix, ModelError> {
    let n = m.len();
    if !(3..=4).contains(&n) {
        return Err(ModelError::UnsupportedArity(n));
    }
    let lambdas: Vec<Rational> = m
        .atoms
        .iter()
        .map(|a| a.lambda.to_rational().ok_or(RootsError::NonFinite))
        .collect::<Result<_, _>>()?;
    let l1 = &lambdas[0];
    let mut rows: [[Rational; 3]; 3] = Default::default();
    for (row, li) in rows.iter_mut().zip(&lambdas[1..]) {
        row[0] = li - l1;
        row[1] = li * li - l1 * l1;
    }
    Ok(LatticeMatrix::new(rows))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RejectReason {
    /// Fewer than two atoms carry non-zero weight.
    TooFewAtoms,
    /// Weights of both signs.
    MixedSigns,
    /// Weights do not sum to `+1` (positive) or `-1` (negative).
    WeightSumNotUnit,
    ExponentNotPositiveInteger,
    /// Negative weights need an even exponent.
    ExponentNotEven,
}

impl std::fmt::Display for RejectReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            RejectReason::TooFewAtoms => "fewer than two atoms with non-zero weight",
            RejectReason::MixedSigns => "weights of mixed sign",
            RejectReason::WeightSumNotUnit => "weights do not sum to +1 or -1",
            RejectReason::ExponentNotPositiveInteger => "exponent not a positive integer",
            RejectReason::ExponentNotEven => "exponent not an even positive integer",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "case")]
pub enum Outcome {
    /// Non-negative weights summing to one, `r = n`.
    CaseA { n: u32 },
    /// Non-positive weights summing to minus one, `r = n` even.
    CaseB { n: u32 },
    Rejected { reason: RejectReason },
}

impl Outcome {
    pub fn is_accepted(&self) -> bool {
        !matches!(self, Outcome::Rejected { .. })
    }

    /// Convolution power of an accepted verdict.
    pub fn power(&self) -> Option<u32> {
        match *self {
            Outcome::CaseA { n } | Outcome::CaseB { n } => Some(n),
            Outcome::Rejected { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VerdictRoute {
    /// Two atoms: the transform reduces to `(alpha_1 + alpha_2 e^t)^r` on a line.
    OneDimensional,
    /// Three or four atoms: the exponent rows are tested for mixed-sign
    /// integer relations.
    Lattice,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityVerdict {
    pub outcome: Outcome,
    /// Accepted transforms are finite on the whole plane.
    pub full_plane: bool,
    pub route: VerdictRoute,
    pub star: Option<StarReport>,
    /// Set on rejections the lattice argument cannot certify because the
    /// star condition fails for this atom configuration.
    pub inconclusive: bool,
    /// Atoms left after dropping zero weights.
    pub active_atoms: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerdictOptions {
    /// Tolerance on `|sum(alpha) -/+ 1|`.
    pub sum_tol: f64,
    /// Tolerance on `|r - round(r)|`.
    pub integrality_tol: f64,
    pub search_bound: u32,
}

impl Default for VerdictOptions {
    fn default() -> Self {
        Self { sum_tol: 1e-8, integrality_tol: 1e-9, search_bound: DEFAULT_SEARCH_BOUND }
    }
}

pub fn admissibility_verdict<T: Scalar>(
    m: &CandidateModel<T>,
    opts: &VerdictOptions,
) -> AdmissibilityVerdict {
    let active = m.without_zero_weights();
    let n_active = active.len();
    let route = if n_active <= 2 { VerdictRoute::OneDimensional } else { VerdictRoute::Lattice };
    let star = if (3..=4).contains(&n_active) {
        build_lambda_matrix(&normalize_model(&active))
            .ok()
            .map(|lm| star_condition(&lm, opts.search_bound))
    } else {
        None
    };

    let outcome = match weight_clauses(&active, opts) {
        Ok(outcome) => outcome,
        Err(reason) => Outcome::Rejected { reason },
    };
    let inconclusive =
        !outcome.is_accepted() && star.as_ref().is_some_and(|s| !s.holds);
    AdmissibilityVerdict {
        full_plane: outcome.is_accepted(),
        outcome,
        route,
        star,
        inconclusive,
        active_atoms: n_active,
    }
}

fn weight_clauses<T: Scalar>(m: &CandidateModel<T>, opts: &VerdictOptions) -> Result<Outcome, RejectReason> {
    if m.len() < 2 {
        return Err(RejectReason::TooFewAtoms);
    }
    let positive = m.weights.iter().all(|w| *w > T::zero());
    let negative = m.weights.iter().all(|w| *w < T::zero());
    if !positive && !negative {
        return Err(RejectReason::MixedSigns);
    }
    let target = if positive { T::one() } else { -T::one() };
    if (m.weight_sum() - target).abs() > T::tolerance(opts.sum_tol) {
        return Err(RejectReason::WeightSumNotUnit);
    }
    let n = near_integer(&m.exponent, opts.integrality_tol)
        .filter(|&n| n >= 1 && n <= u32::MAX as i64)
        .ok_or(RejectReason::ExponentNotPositiveInteger)? as u32;
    if positive {
        Ok(Outcome::CaseA { n })
    } else if n % 2 == 0 {
        Ok(Outcome::CaseB { n })
    } else {
        Err(RejectReason::ExponentNotEven)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn e1() -> DiagonalVFParams {
        DiagonalVFParams::from_array([-1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 0.0]).unwrap()
    }

    fn p2() -> DiagonalVFParams {
        DiagonalVFParams::from_array([-1.0, 0.0, 1.0, 0.0, -1.0, 1.0, 0.0]).unwrap()
    }

    fn points(m: &CandidateModel) -> Vec<(f64, f64)> {
        m.atoms().iter().map(|a| (a.lambda, a.nu)).collect()
    }

    fn model(lambdas: &[f64], weights: &[f64], r: f64) -> CandidateModel {
        let atoms = lambdas.iter().map(|&l| Atom::new(l, l * l)).collect();
        CandidateModel::new(atoms, weights.to_vec(), r).unwrap()
    }

    #[test]
    fn candidate_model_examples() {
        let m = candidate_model(&e1(), &[0.25, 0.5, 0.25], 1e-8).unwrap();
        assert_eq!(points(&m), vec![(-1.0, 1.0), (0.0, 0.0), (1.0, 1.0)]);
        assert_eq!(*m.exponent(), 1.0);

        let m = candidate_model(&p2(), &[0.25, 0.5, 0.25], 1e-8).unwrap();
        assert_eq!(points(&m), vec![(-1.0, 0.0), (0.0, -1.0), (1.0, 0.0)]);
    }

    #[test]
    fn quadruple_root_is_deficit() {
        // lambda^4: A = -1, a = 0, b = 1, e = 0, d = 0, c = 0, f = 0
        let p = DiagonalVFParams::from_array([-1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(
            candidate_model(&p, &[1.0], 1e-8),
            Err(ModelError::NRootDeficit { n_r: 1 })
        );
    }

    #[test]
    fn weight_count_mismatch() {
        assert_eq!(
            candidate_model(&e1(), &[0.5, 0.5], 1e-8),
            Err(ModelError::WeightCountMismatch { expected: 3, got: 2 })
        );
    }

    #[test]
    fn exact_model_for_rational_roots() {
        let q = |n: i64, d: i64| Rational::new(BigInt::from(n), BigInt::from(d));
        let p = DiagonalVFParams::from_array([q(-1, 1), q(0, 1), q(1, 1), q(0, 1), q(-1, 1), q(1, 1), q(0, 1)]).unwrap();
        let m = candidate_model_exact(&p, &[q(1, 4), q(1, 2), q(1, 4)], 1e-8).unwrap().unwrap();
        let nus: Vec<_> = m.atoms().iter().map(|a| a.nu.clone()).collect();
        assert_eq!(nus, vec![q(0, 1), q(-1, 1), q(0, 1)]);
        assert_eq!(*m.exponent(), q(1, 1));
    }

    #[test]
    fn exact_model_unavailable_for_irrational_roots() {
        let q = |n: i64| Rational::from_integer(BigInt::from(n));
        // lambda^4 - 3 lambda^2 + 2 has roots +-1, +-sqrt(2)
        let target = crate::roots::Quartic::monic(q(2), q(0), q(-3), q(0));
        let p = crate::roots::params_for_quartic(q(-1), q(1), q(0), &target).unwrap();
        let w = vec![Rational::new(BigInt::from(1), BigInt::from(4)); 4];
        assert_eq!(candidate_model_exact(&p, &w, 1e-8).unwrap(), None);
    }

    #[test]
    fn normalize_examples() {
        let m = model(&[-1.0, 0.0, 1.0], &[0.25, 0.5, 0.25], 1.0);
        assert_eq!(points(&normalize_model(&m)), vec![(0.0, 0.0), (1.0, -1.0), (2.0, 0.0)]);

        let m0 = model(&[0.0, 1.5, 2.0], &[0.2, 0.3, 0.5], 1.0);
        let n0 = normalize_model(&m0);
        assert_eq!(points(&n0), vec![(0.0, 0.0), (1.5, 2.25), (2.0, 4.0)]);
        assert_eq!(normalize_model(&n0), n0);

        let two = CandidateModel::new(
            vec![Atom::new(0.0, 7.0), Atom::new(1.0, -3.0)],
            vec![0.5, 0.5],
            2.0,
        )
        .unwrap();
        assert_eq!(points(&normalize_model(&two)), vec![(0.0, 0.0), (1.0, 1.0)]);
    }

    #[test]
    fn lambda_matrix_examples() {
        let m = model(&[-1.0, 0.0, 1.0], &[0.25, 0.5, 0.25], 1.0);
        assert_eq!(
            build_lambda_matrix(&m).unwrap(),
            LatticeMatrix::from_integers([[1, -1, 0], [2, 0, 0], [0, 0, 0]])
        );
        let m = model(&[0.0, 1.0, 2.0, 3.0], &[0.25; 4], 1.0);
        assert_eq!(
            build_lambda_matrix(&m).unwrap(),
            LatticeMatrix::from_integers([[1, 1, 0], [2, 4, 0], [3, 9, 0]])
        );
        let m = model(&[0.0, 1.0], &[0.5, 0.5], 1.0);
        assert_eq!(build_lambda_matrix(&m), Err(ModelError::UnsupportedArity(2)));
    }

    #[test]
    fn three_atom_lattice_satisfies_star() {
        let m = model(&[-1.0, 0.0, 1.0], &[0.25, 0.5, 0.25], 1.0);
        let r = star_condition(&build_lambda_matrix(&normalize_model(&m)).unwrap(), 50);
        assert!(r.holds);
    }

    #[test]
    fn four_atom_lattice_has_mixed_relation() {
        // Three exponent vectors in a plane are always dependent; for atoms
        // on a parabola the relation has mixed signs: 3 v2 - 3 v3 + v4 = 0.
        let m = model(&[0.0, 1.0, 2.0, 3.0], &[0.25; 4], 1.0);
        let r = star_condition(&build_lambda_matrix(&m).unwrap(), 50);
        assert!(!r.holds);
        assert_eq!(r.witness, Some([3, -3, 1].map(BigInt::from)));
    }

    #[test]
    fn verdict_examples() {
        let opts = VerdictOptions::default();
        let v = admissibility_verdict(&model(&[-1.0, 0.0, 1.0], &[0.25, 0.5, 0.25], 1.0), &opts);
        assert_eq!(v.outcome, Outcome::CaseA { n: 1 });
        assert!(v.full_plane);
        assert!(v.star.as_ref().unwrap().holds);

        let third = -1.0 / 3.0;
        let v = admissibility_verdict(&model(&[-1.0, 0.0, 1.0], &[third; 3], 2.0), &opts);
        assert_eq!(v.outcome, Outcome::CaseB { n: 2 });

        let v = admissibility_verdict(&model(&[-1.0, 0.0, 1.0], &[0.25, 0.5, 0.25], 1.5), &opts);
        assert_eq!(
            v.outcome,
            Outcome::Rejected { reason: RejectReason::ExponentNotPositiveInteger }
        );
        assert_eq!(RejectReason::ExponentNotPositiveInteger.to_string(), "exponent not a positive integer");
        assert!(!v.full_plane);
        assert!(!v.inconclusive);
    }

    #[test]
    fn verdict_reasons() {
        let opts = VerdictOptions::default();
        let reason = |w: &[f64], r: f64| match admissibility_verdict(&model(&[-1.0, 0.0, 1.0], w, r), &opts).outcome {
            Outcome::Rejected { reason } => Some(reason),
            _ => None,
        };
        assert_eq!(reason(&[0.6, -0.1, 0.5], 1.0), Some(RejectReason::MixedSigns));
        assert_eq!(reason(&[0.2, 0.2, 0.2], 1.0), Some(RejectReason::WeightSumNotUnit));
        assert_eq!(reason(&[-0.2, -0.3, -0.5], 3.0), Some(RejectReason::ExponentNotEven));
        assert_eq!(reason(&[0.0, 0.0, 1.0], 1.0), Some(RejectReason::TooFewAtoms));
        // zero weights drop out: two active atoms remain
        let v = admissibility_verdict(&model(&[-1.0, 0.0, 1.0], &[0.5, 0.0, 0.5], 2.0), &opts);
        assert_eq!(v.outcome, Outcome::CaseA { n: 2 });
        assert_eq!(v.route, VerdictRoute::OneDimensional);
        assert_eq!(v.active_atoms, 2);
        assert!(v.star.is_none());
    }

    #[test]
    fn four_atom_rejection_is_inconclusive() {
        let opts = VerdictOptions::default();
        let v = admissibility_verdict(&model(&[0.0, 1.0, 2.0, 3.0], &[0.25; 4], 0.5), &opts);
        assert!(!v.outcome.is_accepted());
        assert!(v.inconclusive);
        // sufficiency does not depend on the lattice
        let v = admissibility_verdict(&model(&[0.0, 1.0, 2.0, 3.0], &[0.25; 4], 2.0), &opts);
        assert_eq!(v.outcome, Outcome::CaseA { n: 2 });
        assert!(!v.inconclusive);
    }

    #[test]
    fn exact_verdict() {
        let q = |n: i64, d: i64| Rational::new(BigInt::from(n), BigInt::from(d));
        let atoms = vec![Atom::new(q(-1, 1), q(1, 1)), Atom::new(q(0, 1), q(0, 1)), Atom::new(q(1, 1), q(1, 1))];
        let m = CandidateModel::new(atoms.clone(), vec![q(1, 4), q(1, 2), q(1, 4)], q(3, 1)).unwrap();
        assert_eq!(admissibility_verdict(&m, &VerdictOptions::default()).outcome, Outcome::CaseA { n: 3 });
        let off = CandidateModel::new(atoms, vec![q(1, 4), q(1, 2), q(1, 4)], q(3_000_000_001, 1_000_000_000)).unwrap();
        assert!(!admissibility_verdict(&off, &VerdictOptions::default()).outcome.is_accepted());
    }

    #[test]
    fn constructor_sorts_and_validates() {
        let m = CandidateModel::new(
            vec![Atom::new(1.0, 1.0), Atom::new(-1.0, 1.0)],
            vec![0.7, 0.3],
            1.0,
        )
        .unwrap();
        assert_eq!(m.atoms()[0].lambda, -1.0);
        assert_eq!(m.weights(), &[0.3, 0.7]);
        assert_eq!(
            CandidateModel::new(vec![Atom::new(1.0, 1.0), Atom::new(1.0, 2.0)], vec![0.5, 0.5], 1.0),
            Err(ModelError::DuplicateAbscissa)
        );
        assert_eq!(
            CandidateModel::new(vec![Atom::new(1.0, 1.0)], vec![1.0], 0.0),
            Err(ModelError::NonPositiveExponent)
        );
    }
}
