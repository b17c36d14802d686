use diagnef::model::{
    admissibility_verdict, build_lambda_matrix, candidate_model, is_mixed_sign, normalize_model, star_condition,
    Atom, CandidateModel, LatticeMatrix, Outcome, RejectReason, StarMethod, VerdictOptions,
};
use diagnef::roots::{params_for_quartic, Quartic};
use diagnef::scalar::Rational;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn q(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Rational matrix with small entries. Most are built around a planted
/// integer relation with entries in `[-5, 5]` (one relation, or a rank-one
/// matrix) so that every relation the exact test can find is also within
/// reach of a bounded enumeration.
fn random_matrix(rng: &mut impl Rng) -> LatticeMatrix {
    let mut rows: [[Rational; 3]; 3] = Default::default();
    for row in rows.iter_mut() {
        for x in row.iter_mut() {
            *x = q(rng.gen_range(-4..=4), rng.gen_range(1..=3));
        }
    }
    let zero_column = rng.gen_bool(0.5);
    if zero_column {
        for row in rows.iter_mut() {
            row[2] = Rational::zero();
        }
    }
    match rng.gen_range(0..4) {
        0 | 1 => {
            let mut k = [0i64; 3];
            while k.iter().all(|&x| x == 0) {
                k = [rng.gen_range(-5..=5), rng.gen_range(-5..=5), rng.gen_range(-5..=5)];
            }
            let j = (0..3).find(|&j| k[j] != 0).unwrap();
            for c in 0..3 {
                let mut acc = Rational::zero();
                for i in (0..3).filter(|&i| i != j) {
                    acc += q(k[i], 1) * &rows[i][c];
                }
                rows[j][c] = -acc / q(k[j], 1);
            }
        }
        2 => {
            let u = rows[0].clone();
            for row in rows.iter_mut() {
                let s = q(rng.gen_range(-2..=2), rng.gen_range(1..=2));
                *row = u.clone().map(|x| x * &s);
            }
        }
        _ if zero_column => {
            // three rows in a plane: keep the relation small by reusing one
            rows[2] = rows[0].clone().map(|x| -x);
        }
        _ => {}
    }
    LatticeMatrix::new(rows)
}

/// Integer matrix proportional to `m`.
fn integer_rows(m: &LatticeMatrix) -> [[i64; 3]; 3] {
    let lcm = m
        .rows()
        .iter()
        .flatten()
        .fold(BigInt::from(1), |acc, x| acc.lcm(x.denom()));
    m.rows()
        .clone()
        .map(|r| r.map(|x| (x * Rational::from_integer(lcm.clone())).to_integer().to_i64().unwrap()))
}

/// Mixed-sign `a` with `|a_i| <= bound` and `a^T M = 0`, by brute force.
fn enumerate_mixed(m: &[[i64; 3]; 3], bound: i64) -> Option<[i64; 3]> {
    for a0 in -bound..=bound {
        for a1 in -bound..=bound {
            for a2 in -bound..=bound {
                let a = [a0, a1, a2];
                let mixed = a.iter().any(|&x| x > 0) && a.iter().any(|&x| x < 0);
                if mixed && (0..3).all(|k| a[0] * m[0][k] + a[1] * m[1][k] + a[2] * m[2][k] == 0) {
                    return Some(a);
                }
            }
        }
    }
    None
}

#[test]
fn star_agrees_with_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut failures = 0;
    let mut holds = 0;
    for _ in 0..200 {
        let m = random_matrix(&mut rng);
        let report = star_condition(&m, 50);
        let brute = enumerate_mixed(&integer_rows(&m), 20);
        holds += usize::from(report.holds);
        if report.holds != brute.is_none() {
            failures += 1;
        }
        if let Some(w) = &report.witness {
            assert!(is_mixed_sign(w));
            assert!(m.combine_rows(w).iter().all(Zero::is_zero));
        }
    }
    assert_eq!(failures, 0);
    assert!((30..=170).contains(&holds), "{holds} of 200 hold");
}

#[test]
fn kernel_dimension_selects_method() {
    let m = LatticeMatrix::from_integers([[1, 2, 0], [2, 4, 0], [3, 6, 0]]);
    let r = star_condition(&m, 50);
    assert_eq!(r.kernel_dim, 2);
    assert_eq!(r.method, StarMethod::BoundedSearch { bound: 50 });
    assert!(!r.holds);
    let m = LatticeMatrix::from_integers([[1, 2, 0], [0, 1, 0], [0, 0, 0]]);
    assert_eq!(star_condition(&m, 50).method, StarMethod::ExactKernel);
}

fn parabola_model(lambdas: &[f64], weights: &[f64], r: f64) -> CandidateModel {
    let atoms = lambdas.iter().map(|&l| Atom::new(l, l * l)).collect();
    CandidateModel::new(atoms, weights.to_vec(), r).unwrap()
}

#[test]
fn three_atom_lattices_hold_for_forward_models() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..100 {
        let mut l: Vec<i64> = (-12..=12).collect();
        l.shuffle(&mut rng);
        let mut lam: Vec<f64> = l[..3].iter().map(|&k| k as f64 / 4.0).collect();
        lam.sort_by(f64::total_cmp);
        let double = lam[rng.gen_range(0..3)];
        let target = Quartic::from_real_roots([lam[0], lam[1], lam[2], double]);
        let b = if rng.gen_bool(0.5) { 1.0 } else { -0.5 };
        let p = params_for_quartic(-1.0, b, rng.gen_range(-2..=2) as f64, &target).unwrap();
        let m = candidate_model(&p, &[0.25, 0.5, 0.25], 1e-8).unwrap();
        let lm = build_lambda_matrix(&normalize_model(&m)).unwrap();
        let r = star_condition(&lm, 50);
        assert!(r.holds, "{:?}", lm.to_strings());
        assert_eq!(r.kernel_dim, 1);
    }
}

#[test]
fn four_atom_lattices_carry_a_row_relation() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..50 {
        let mut l: Vec<i64> = (-12..=12).collect();
        l.shuffle(&mut rng);
        let lam: Vec<f64> = l[..4].iter().map(|&k| k as f64 / 2.0).collect();
        let m = parabola_model(&lam, &[0.25; 4], 1.0);
        let lm = build_lambda_matrix(&m).unwrap();
        let r = star_condition(&lm, 50);
        assert_eq!(r.kernel_dim, 1);
        let w = r.witness.expect("rows in a plane are dependent");
        assert!(lm.combine_rows(&w).iter().all(Zero::is_zero));
    }
}

#[test]
fn normalize_is_idempotent_from_the_origin() {
    let m = parabola_model(&[0.0, 0.5, 1.5, 4.0], &[0.25; 4], 2.0);
    let n = normalize_model(&m);
    assert_eq!(normalize_model(&n), n);
    assert_eq!(n.atoms()[0], Atom::new(0.0, 0.0));
}

fn weights_strategy(n: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(prop_oneof![Just(0.0), -1.0..1.0f64, Just(0.25), Just(-0.5)], n)
}

proptest! {
    #[test]
    fn verdict_ignores_atom_order(
        w in weights_strategy(4),
        r in prop_oneof![Just(1.0), Just(2.0), Just(3.0), 0.1..5.0f64],
        seed in any::<u64>(),
    ) {
        let lam = [-1.5, 0.0, 0.5, 2.0];
        let atoms: Vec<Atom> = lam.iter().map(|&l| Atom::new(l, l * l - 1.0)).collect();
        let base = CandidateModel::new(atoms.clone(), w.clone(), r).unwrap();
        let mut idx: Vec<usize> = (0..4).collect();
        idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let shuffled = CandidateModel::new(
            idx.iter().map(|&i| atoms[i].clone()).collect(),
            idx.iter().map(|&i| w[i]).collect(),
            r,
        ).unwrap();
        let opts = VerdictOptions::default();
        prop_assert_eq!(admissibility_verdict(&base, &opts), admissibility_verdict(&shuffled, &opts));
    }

    #[test]
    fn verdict_is_total_and_consistent(
        w in weights_strategy(3),
        r in prop_oneof![Just(1.0), Just(2.0), Just(4.0), 0.1..5.0f64],
    ) {
        let m = parabola_model(&[-1.0, 0.0, 1.0], &w, r);
        let v = admissibility_verdict(&m, &VerdictOptions::default());
        let active: Vec<f64> = w.iter().copied().filter(|x| *x != 0.0).collect();
        let sum: f64 = active.iter().sum();
        match v.outcome {
            Outcome::CaseA { n } => {
                prop_assert!(active.iter().all(|&x| x > 0.0));
                prop_assert!((sum - 1.0).abs() <= 1e-8);
                prop_assert_eq!(n as f64, r.round());
                prop_assert!(v.full_plane);
            }
            Outcome::CaseB { n } => {
                prop_assert!(active.iter().all(|&x| x < 0.0));
                prop_assert!((sum + 1.0).abs() <= 1e-8);
                prop_assert_eq!(n % 2, 0);
            }
            Outcome::Rejected { reason } => {
                prop_assert!(!v.full_plane);
                let expected = if active.len() < 2 {
                    RejectReason::TooFewAtoms
                } else if !(active.iter().all(|&x| x > 0.0) || active.iter().all(|&x| x < 0.0)) {
                    RejectReason::MixedSigns
                } else if (sum.abs() - 1.0).abs() > 1e-8 {
                    RejectReason::WeightSumNotUnit
                } else if (r - r.round()).abs() > 1e-9 || r.round() < 1.0 {
                    RejectReason::ExponentNotPositiveInteger
                } else {
                    RejectReason::ExponentNotEven
                };
                prop_assert_eq!(reason, expected);
            }
        }
    }
}
