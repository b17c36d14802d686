//! Variance-function parameters, the characteristic quartic and its roots.
//!
//! A diagonal of the form
//!
//! ```text
//! V11(m) = A m1^2 + a m1 + b m2 + e
//! V22(m) = A m2^2 + c m1 + d m2 + f
//! ```
//!
//! with `A < 0` forces every atom `(lambda, nu)` of the generating mixture to
//! satisfy the pair of parabola relations
//!
//! ```text
//! lambda^2 = a lambda + b nu - e A
//! nu^2     = c lambda + d nu - f A
//! ```
//!
//! Eliminating `nu` gives the characteristic quartic in `lambda`; eliminating
//! `lambda` gives the dual quartic in `nu`.

mod pattern;
mod solve;

pub use pattern::{classify_root_pattern, RootPattern};
pub use solve::{default_cluster_tolerance, solve_quartic, Root, RootSet};

use num_complex::Complex64;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::{powi, rational_candidate, Rational, Scalar};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RootsError {
    #[error("the quadratic coefficient A must be strictly negative (got {0})")]
    NonNegativeQuadratic(f64),
    #[error("the coefficient b must be non-zero")]
    ZeroB,
    #[error("non-finite parameter")]
    NonFinite,
    #[error("quartic leading coefficient is zero")]
    ZeroLeading,
    #[error("{lambda} is not a root of the characteristic quartic (residual {residual:e})")]
    NotARoot { lambda: f64, residual: f64 },
}

/// The seven coefficients `(A, a, b, c, d, e, f)` of the diagonal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagonalVFParams<T = f64> {
    /// `A`, shared coefficient of `m1^2` and `m2^2`.
    pub quadratic: T,
    pub a: T,
    pub b: T,
    pub c: T,
    pub d: T,
    pub e: T,
    pub f: T,
}

impl<T: Scalar> DiagonalVFParams<T> {
    pub fn new(quadratic: T, a: T, b: T, c: T, d: T, e: T, f: T) -> Result<Self, RootsError> {
        let p = Self { quadratic, a, b, c, d, e, f };
        p.validate()?;
        Ok(p)
    }

    /// From `[A, a, b, c, d, e, f]`.
    pub fn from_array(v: [T; 7]) -> Result<Self, RootsError> {
        let [quadratic, a, b, c, d, e, f] = v;
        Self::new(quadratic, a, b, c, d, e, f)
    }

    pub fn to_array(&self) -> [T; 7] {
        [
            self.quadratic.clone(),
            self.a.clone(),
            self.b.clone(),
            self.c.clone(),
            self.d.clone(),
            self.e.clone(),
            self.f.clone(),
        ]
    }

    pub fn validate(&self) -> Result<(), RootsError> {
        if self.to_array().iter().any(|x| !x.to_f64().is_finite()) {
            return Err(RootsError::NonFinite);
        }
        if self.quadratic >= T::zero() {
            return Err(RootsError::NonNegativeQuadratic(self.quadratic.to_f64()));
        }
        if self.b.is_zero() {
            return Err(RootsError::ZeroB);
        }
        Ok(())
    }

    pub fn to_f64(&self) -> DiagonalVFParams<f64> {
        DiagonalVFParams {
            quadratic: self.quadratic.to_f64(),
            a: self.a.to_f64(),
            b: self.b.to_f64(),
            c: self.c.to_f64(),
            d: self.d.to_f64(),
            e: self.e.to_f64(),
            f: self.f.to_f64(),
        }
    }

    /// `r = -1/A`, the exponent of the candidate Laplace transform.
    pub fn exponent(&self) -> T {
        -(T::one() / self.quadratic.clone())
    }

    /// Right-hand sides of the two diagonal entries at mean `m`.
    pub fn diagonal_at(&self, m: [T; 2]) -> [T; 2] {
        let [m1, m2] = m;
        let v11 = self.quadratic.clone() * m1.clone() * m1.clone()
            + self.a.clone() * m1.clone()
            + self.b.clone() * m2.clone()
            + self.e.clone();
        let v22 = self.quadratic.clone() * m2.clone() * m2.clone()
            + self.c.clone() * m1
            + self.d.clone() * m2
            + self.f.clone();
        [v11, v22]
    }
}

/// Monic quartic `x^4 + c3 x^3 + c2 x^2 + c1 x + c0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Quartic<T = f64> {
    /// `[c0, c1, c2, c3, 1]`, lowest degree first.
    coeffs: [T; 5],
}

impl<T: Scalar> Quartic<T> {
    pub fn monic(c0: T, c1: T, c2: T, c3: T) -> Self {
        Self { coeffs: [c0, c1, c2, c3, T::one()] }
    }

    /// Divides through by the leading coefficient.
    pub fn from_coeffs(coeffs: [T; 5]) -> Result<Self, RootsError> {
        let [c0, c1, c2, c3, c4] = coeffs;
        if c4.is_zero() {
            return Err(RootsError::ZeroLeading);
        }
        Ok(Self::monic(
            c0 / c4.clone(),
            c1 / c4.clone(),
            c2 / c4.clone(),
            c3 / c4,
        ))
    }

    /// Monic quartic with the given four roots (real coefficients assumed).
    pub fn from_real_roots(roots: [T; 4]) -> Self {
        let mut c = vec![T::one()];
        for r in roots {
            let mut next = vec![T::zero(); c.len() + 1];
            for (i, ci) in c.iter().enumerate() {
                next[i + 1] = next[i + 1].clone() + ci.clone();
                next[i] = next[i].clone() - ci.clone() * r.clone();
            }
            c = next;
        }
        Self::monic(c[0].clone(), c[1].clone(), c[2].clone(), c[3].clone())
    }

    pub fn coeffs(&self) -> &[T; 5] {
        &self.coeffs
    }

    pub fn eval(&self, x: &T) -> T {
        self.coeffs
            .iter()
            .rev()
            .fold(T::zero(), |acc, c| acc * x.clone() + c.clone())
    }

    /// Coefficients of the `order`-th derivative divided by `order!`,
    /// lowest degree first.
    pub fn taylor_coeffs(&self, order: usize) -> Vec<T> {
        (order..5)
            .map(|k| self.coeffs[k].clone() * T::from_usize_lossy(binomial(k, order)))
            .collect()
    }

    pub fn to_f64(&self) -> Quartic<f64> {
        Quartic {
            coeffs: [
                self.coeffs[0].to_f64(),
                self.coeffs[1].to_f64(),
                self.coeffs[2].to_f64(),
                self.coeffs[3].to_f64(),
                1.0,
            ],
        }
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| c.to_f64().abs()).fold(0.0, f64::max)
    }
}

impl Quartic<f64> {
    pub fn eval_complex(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::zero(), |acc, &c| acc * z + c)
    }
}

pub(crate) fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// Eliminates `nu` from the parabola pair; the distinct real roots are the
/// candidate atom abscissas.
pub fn build_characteristic_quartic<T: Scalar>(p: &DiagonalVFParams<T>) -> Quartic<T> {
    let two = T::from_i32(2).unwrap();
    let (aa, a, b, c, d, e, f) = (
        p.quadratic.clone(),
        p.a.clone(),
        p.b.clone(),
        p.c.clone(),
        p.d.clone(),
        p.e.clone(),
        p.f.clone(),
    );
    let c3 = -(two.clone() * a.clone());
    let c2 = two.clone() * aa.clone() * e.clone() + a.clone() * a.clone() - d.clone() * b.clone();
    let c1 = -(two * aa.clone() * a.clone() * e.clone() - a * d.clone() * b.clone()
        + c * b.clone() * b.clone());
    let c0 = aa.clone() * aa.clone() * e.clone() * e.clone() - e * d * b.clone() * aa.clone()
        + f * b.clone() * b * aa;
    Quartic::monic(c0, c1, c2, c3)
}

/// Eliminates `lambda` instead; its roots are the atom ordinates.
pub fn build_dual_quartic<T: Scalar>(p: &DiagonalVFParams<T>) -> Quartic<T> {
    let two = T::from_i32(2).unwrap();
    let (aa, a, b, c, d, e, f) = (
        p.quadratic.clone(),
        p.a.clone(),
        p.b.clone(),
        p.c.clone(),
        p.d.clone(),
        p.e.clone(),
        p.f.clone(),
    );
    let c3 = -(two.clone() * d.clone());
    let c2 = two.clone() * aa.clone() * f.clone() - a.clone() * c.clone() + d.clone() * d.clone();
    let c1 = -(b * c.clone() * c.clone() - a.clone() * c.clone() * d.clone()
        + two * d * f.clone() * aa.clone());
    let c0 = aa.clone() * aa.clone() * f.clone() * f.clone() - a * c.clone() * f * aa.clone()
        + e * c.clone() * c * aa;
    Quartic::monic(c0, c1, c2, c3)
}

/// Ordinate paired with a root `lambda`, together with the residual of the
/// second parabola relation (zero at exact roots).
#[derive(Debug, Clone, PartialEq)]
pub struct DualOrdinate<T> {
    pub nu: T,
    pub residual: T,
}

/// `nu = (lambda^2 - a lambda + e A) / b`, checked against the quartic.
///
/// The quartic residual at `lambda` must be at most `tol * max(1, |lambda|^4)`
/// (exact zero for rational scalars).
pub fn dual_ordinate<T: Scalar>(
    lambda: &T,
    p: &DiagonalVFParams<T>,
    tol: f64,
) -> Result<DualOrdinate<T>, RootsError> {
    let q = build_characteristic_quartic(p);
    let qr = q.eval(lambda);
    let scale = T::one().max_with(powi(&lambda.abs(), 4));
    if qr.abs() > T::tolerance(tol) * scale {
        return Err(RootsError::NotARoot {
            lambda: lambda.to_f64(),
            residual: qr.to_f64(),
        });
    }
    Ok(unchecked_dual_ordinate(lambda, p))
}

/// Same formula without the root check.
pub fn unchecked_dual_ordinate<T: Scalar>(lambda: &T, p: &DiagonalVFParams<T>) -> DualOrdinate<T> {
    let nu = (lambda.clone() * lambda.clone() - p.a.clone() * lambda.clone()
        + p.e.clone() * p.quadratic.clone())
        / p.b.clone();
    let residual = nu.clone() * nu.clone()
        - p.c.clone() * lambda.clone()
        - p.d.clone() * nu.clone()
        + p.f.clone() * p.quadratic.clone();
    DualOrdinate { nu, residual }
}

trait MaxWith {
    fn max_with(self, other: Self) -> Self;
}

impl<T: Scalar> MaxWith for T {
    fn max_with(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }
}

/// Parameters whose characteristic quartic is `q`, for chosen `A`, `b`, `e`.
///
/// The cubic coefficient of `q` fixes `a`; the remaining three coefficients
/// are affine in `d`, `c` and `f` respectively, so any monic quartic is
/// reachable. This is how admissible models are built forwards from chosen
/// abscissas.
pub fn params_for_quartic<T: Scalar>(
    quadratic: T,
    b: T,
    e: T,
    q: &Quartic<T>,
) -> Result<DiagonalVFParams<T>, RootsError> {
    if quadratic >= T::zero() {
        return Err(RootsError::NonNegativeQuadratic(quadratic.to_f64()));
    }
    if b.is_zero() {
        return Err(RootsError::ZeroB);
    }
    let two = T::from_i32(2).unwrap();
    let [c0, c1, c2, c3, _] = q.coeffs().clone();
    let a = -(c3 / two.clone());
    let d = (two.clone() * quadratic.clone() * e.clone() + a.clone() * a.clone() - c2) / b.clone();
    let c = (-c1 - two * quadratic.clone() * a.clone() * e.clone() + a.clone() * d.clone() * b.clone())
        / (b.clone() * b.clone());
    let f = (c0 - quadratic.clone() * quadratic.clone() * e.clone() * e.clone()
        + e.clone() * d.clone() * b.clone() * quadratic.clone())
        / (b.clone() * b.clone() * quadratic.clone());
    DiagonalVFParams::new(quadratic, a, b, c, d, e, f)
}

/// Exact distinct real roots of `exact`, when every real root in `roots` is
/// a small-denominator rational whose multiplicity checks out exactly.
pub fn rational_real_roots(exact: &Quartic<Rational>, roots: &RootSet) -> Option<Vec<(Rational, usize)>> {
    let mut out = Vec::new();
    for (x, mult) in roots.real_roots() {
        let cand = rational_candidate(x, 1_000_000, 1e-9)?;
        for order in 0..mult {
            let t = Quartic::<Rational> { coeffs: taylor_array(exact, order) };
            if !t.eval(&cand).is_zero() {
                return None;
            }
        }
        let next = Quartic::<Rational> { coeffs: taylor_array(exact, mult) };
        if mult < 4 && next.eval(&cand).is_zero() {
            return None;
        }
        out.push((cand, mult));
    }
    Some(out)
}

fn taylor_array(q: &Quartic<Rational>, order: usize) -> [Rational; 5] {
    let mut t = q.taylor_coeffs(order);
    t.resize(5, Rational::zero());
    t.try_into().expect("five coefficients")
}
