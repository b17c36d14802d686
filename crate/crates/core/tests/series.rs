use diagnef::measure::realize_measure;
use diagnef::model::{admissibility_verdict, normalize_model, Atom, CandidateModel, VerdictOptions};
use diagnef::series::{
    expand_series, first_negative_coefficient, linear_grid, magnitude_scan, EliminationForm, OscillatoryBlock,
};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn parabola_model(lambdas: &[f64], weights: &[f64], r: f64) -> CandidateModel {
    let atoms = lambdas.iter().map(|&l| Atom::new(l, l * l)).collect();
    CandidateModel::new(atoms, weights.to_vec(), r).unwrap()
}

/// Taylor coefficients of `(a1 + a2 x)^r` from a discrete Cauchy integral
/// on a circle inside the disc of convergence.
fn cauchy_coefficients(a1: f64, a2: f64, r: f64, depth: usize) -> Vec<f64> {
    let rho = 0.5 * a1 / a2.abs().max(1e-300);
    let n = 256;
    (0..=depth)
        .map(|k| {
            let sum: Complex64 = (0..n)
                .map(|j| {
                    let phi = std::f64::consts::TAU * j as f64 / n as f64;
                    let z = Complex64::from_polar(rho, phi);
                    (a1 + a2 * z).powf(r) * Complex64::from_polar(1.0, -(k as f64) * phi)
                })
                .sum();
            sum.re / n as f64 / rho.powi(k as i32)
        })
        .collect()
}

#[test]
fn integer_powers_reproduce_masses() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..40 {
        let n = rng.gen_range(2..=4);
        let lam: Vec<f64> = {
            let mut v: Vec<f64> = (0..n).map(|i| i as f64 * 0.75 + rng.gen_range(0.0..0.5)).collect();
            v.sort_by(f64::total_cmp);
            v
        };
        let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..1.0)).collect();
        let total: f64 = raw.iter().sum();
        let w: Vec<f64> = raw.iter().map(|x| x / total).collect();
        let r = rng.gen_range(1..=4) as f64;
        let m = normalize_model(&parabola_model(&lam, &w, r));
        let rep = expand_series(&m, 8).unwrap();
        assert!(rep.terminates);
        let mu = realize_measure(&m, &admissibility_verdict(&m, &VerdictOptions::default())).unwrap();
        assert_eq!(rep.terms.len(), mu.len());
        for t in &rep.terms {
            let i = mu
                .points()
                .iter()
                .position(|p| (p[0] - t.point[0]).abs() < 1e-9 && (p[1] - t.point[1]).abs() < 1e-9)
                .expect("term at a support point");
            assert!((mu.masses()[i] - t.coefficient).abs() <= 1e-10);
        }
        assert!(rep.first_negative.is_none());
    }
}

#[test]
fn expansion_of_fractional_power_matches_cauchy_oracle() {
    let m = CandidateModel::new(vec![Atom::new(0.0, 0.0), Atom::new(1.0, 0.0)], vec![0.75, 0.25], 0.5).unwrap();
    let rep = expand_series(&m, 6).unwrap();
    let oracle = cauchy_coefficients(0.75, 0.25, 0.5, 6);
    for t in &rep.terms {
        let k = (t.point[0] - 0.0).round() as usize;
        assert!((t.coefficient - oracle[k]).abs() < 1e-12, "k={k}");
    }
    assert_eq!(rep.first_negative.map(|t| t.order), Some(2));
}

proptest! {
    #[test]
    fn first_negative_within_bound_and_matches_oracle(
        a1 in 0.5..0.95f64,
        r in (0.05..6.0f64).prop_filter("non-integer", |r| (r - r.round()).abs() > 1e-3),
    ) {
        let a2 = 1.0 - a1;
        let bound = r.ceil() as usize + 1;
        let k = first_negative_coefficient(a1, a2, r, 8).unwrap();
        prop_assert!(k.is_some_and(|k| k <= bound), "k={:?} r={}", k, r);
        let k = k.unwrap();
        let oracle = cauchy_coefficients(a1, a2, r, 8);
        let scale = oracle[0].abs();
        prop_assert!(oracle[k] < 0.0);
        for c in &oracle[..k] {
            prop_assert!(*c > -1e-12 * scale);
        }
    }

    #[test]
    fn integer_powers_have_no_negative_coefficient(a1 in 0.5..0.95f64, r in 1u32..7) {
        prop_assert_eq!(first_negative_coefficient(a1, 1.0 - a1, r as f64, 12).unwrap(), None);
    }

    #[test]
    fn genuine_mixtures_stay_bounded(
        w in proptest::collection::vec(0.05..1.0f64, 2..5),
        lam in proptest::collection::vec(-3.0..3.0f64, 4),
        r in prop_oneof![Just(0.5), Just(1.0), Just(2.0)],
    ) {
        let total: f64 = w.iter().sum();
        let f = EliminationForm {
            exponentials: w.iter().zip(&lam).map(|(a, l)| (a / total, *l)).collect(),
            ..Default::default()
        };
        prop_assert_eq!(magnitude_scan(&f, r, &linear_grid(-50.0, 50.0, 1001)), None);
    }

    #[test]
    fn polynomial_parts_are_unbounded(
        slope in prop_oneof![-2.0..-0.05f64, 0.05..2.0f64],
        degree in 1usize..4,
        r in prop_oneof![Just(0.5), Just(1.0), Just(2.0)],
    ) {
        let mut poly = vec![0.0; degree + 1];
        poly[0] = 0.5;
        poly[degree] = slope;
        let f = EliminationForm { polynomial: poly, exponentials: vec![(0.5, 1.0)], ..Default::default() };
        prop_assert!(magnitude_scan(&f, r, &linear_grid(-50.0, 50.0, 1001)).is_some());
    }

    #[test]
    fn oscillatory_blocks_are_unbounded(
        gamma in 0.1..2.0f64,
        coeff in prop_oneof![-1.0..-0.05f64, 0.05..1.0f64],
        which in 0usize..4,
        r in prop_oneof![Just(0.5), Just(1.0), Just(2.0)],
    ) {
        let mut block = OscillatoryBlock { lambda: 0.7, gamma, ..Default::default() };
        match which {
            0 => block.a0 = coeff,
            1 => block.a1 = coeff,
            2 => block.b0 = coeff,
            _ => block.b1 = coeff,
        }
        let f = EliminationForm { exponentials: vec![(1.0, 0.0)], blocks: vec![block], ..Default::default() };
        prop_assert!(magnitude_scan(&f, r, &linear_grid(-50.0, 50.0, 1001)).is_some());
    }
}
