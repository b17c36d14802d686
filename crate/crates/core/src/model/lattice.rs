//! Exact left kernels of 3x3 rational matrices and the mixed-sign test.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::scalar::{format_rational, parse_rational, ParseNumberError, Rational};

/// Three exponent rows, exact.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticeMatrix {
    rows: [[Rational; 3]; 3],
}

impl LatticeMatrix {
    pub fn new(rows: [[Rational; 3]; 3]) -> Self {
        Self { rows }
    }

    pub fn from_integers(rows: [[i64; 3]; 3]) -> Self {
        Self::new(rows.map(|r| r.map(|x| Rational::from_integer(BigInt::from(x)))))
    }

    /// Exact binary values of the floats; `None` if any is non-finite.
    pub fn from_f64(rows: [[f64; 3]; 3]) -> Option<Self> {
        let mut out: [[Rational; 3]; 3] = Default::default();
        for (o, r) in out.iter_mut().zip(rows) {
            for (x, v) in o.iter_mut().zip(r) {
                *x = Rational::from_float(v)?;
            }
        }
        Some(Self::new(out))
    }

    pub fn parse(rows: &[[&str; 3]; 3]) -> Result<Self, ParseNumberError> {
        let mut out: [[Rational; 3]; 3] = Default::default();
        for (o, r) in out.iter_mut().zip(rows) {
            for (x, v) in o.iter_mut().zip(r) {
                *x = parse_rational(v)?;
            }
        }
        Ok(Self::new(out))
    }

    pub fn rows(&self) -> &[[Rational; 3]; 3] {
        &self.rows
    }

    pub fn to_strings(&self) -> [[String; 3]; 3] {
        self.rows.clone().map(|r| r.map(|x| format_rational(&x)))
    }

    /// `a^T M`, the integer combination of the rows.
    pub fn combine_rows(&self, a: &[BigInt; 3]) -> [Rational; 3] {
        let mut out: [Rational; 3] = Default::default();
        for (coef, row) in a.iter().zip(&self.rows) {
            let coef = Rational::from_integer(coef.clone());
            for (o, x) in out.iter_mut().zip(row) {
                *o += coef.clone() * x;
            }
        }
        out
    }

    /// Basis of `{a : a^T M = 0}` as primitive integer vectors.
    pub fn left_kernel(&self) -> Vec<[BigInt; 3]> {
        // a^T M = 0  <=>  M^T a = 0
        let mut t: [[Rational; 3]; 3] = Default::default();
        for (i, row) in self.rows.iter().enumerate() {
            for (j, x) in row.iter().enumerate() {
                t[j][i] = x.clone();
            }
        }
        nullspace(t).into_iter().map(primitive).collect()
    }
}

fn nullspace(mut m: [[Rational; 3]; 3]) -> Vec<[Rational; 3]> {
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..3 {
        let Some(p) = (row..3).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(row, p);
        let inv = m[row][col].recip();
        for x in m[row].iter_mut() {
            *x *= inv.clone();
        }
        for r in 0..3 {
            if r != row && !m[r][col].is_zero() {
                let factor = m[r][col].clone();
                for c in 0..3 {
                    let delta = factor.clone() * m[row][c].clone();
                    m[r][c] -= delta;
                }
            }
        }
        pivots.push(col);
        row += 1;
        if row == 3 {
            break;
        }
    }
    (0..3)
        .filter(|c| !pivots.contains(c))
        .map(|free| {
            let mut v: [Rational; 3] = Default::default();
            v[free] = Rational::one();
            for (r, &pc) in pivots.iter().enumerate() {
                v[pc] = -m[r][free].clone();
            }
            v
        })
        .collect()
}

/// Scales a rational vector to a primitive integer one with its first
/// non-zero entry positive.
fn primitive(v: [Rational; 3]) -> [BigInt; 3] {
    let lcm = v.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let ints = v.map(|x| (x * Rational::from_integer(lcm.clone())).to_integer());
    normalize_sign(reduce(ints))
}

fn reduce(v: [BigInt; 3]) -> [BigInt; 3] {
    let g = v.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if g.is_zero() || g.is_one() {
        v
    } else {
        v.map(|x| x / &g)
    }
}

fn normalize_sign(v: [BigInt; 3]) -> [BigInt; 3] {
    match v.iter().find(|x| !x.is_zero()) {
        Some(first) if first.is_negative() => v.map(|x| -x),
        _ => v,
    }
}

/// Two coordinates of strictly opposite sign.
pub fn is_mixed_sign(v: &[BigInt; 3]) -> bool {
    v.iter().any(|x| x.is_positive()) && v.iter().any(|x| x.is_negative())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StarMethod {
    /// Kernel of dimension at most one: decided exactly.
    ExactKernel,
    /// Kernel of dimension two or three: searched over integer combinations
    /// of a kernel basis with coefficients bounded by `bound`.
    BoundedSearch { bound: u32 },
}

/// Outcome of the test "no integer `a` with `a^T M = 0` has two coordinates
/// of opposite sign".
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StarReport {
    pub holds: bool,
    /// Mixed-sign kernel vector, present exactly when `holds` is false.
    #[serde(with = "witness_strings")]
    pub witness: Option<[BigInt; 3]>,
    pub method: StarMethod,
    pub kernel_dim: usize,
}

mod witness_strings {
    use num_bigint::BigInt;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(w: &Option<[BigInt; 3]>, s: S) -> Result<S::Ok, S::Error> {
        w.as_ref()
            .map(|v| v.clone().map(|x| x.to_string()))
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<[BigInt; 3]>, D::Error> {
        let raw: Option<[String; 3]> = Option::deserialize(d)?;
        raw.map(|v| {
            let mut out: [BigInt; 3] = Default::default();
            for (o, s) in out.iter_mut().zip(v) {
                *o = s.parse().map_err(serde::de::Error::custom)?;
            }
            Ok(out)
        })
        .transpose()
    }
}

pub const DEFAULT_SEARCH_BOUND: u32 = 50;

pub fn star_condition(m: &LatticeMatrix, bound: u32) -> StarReport {
    let basis = m.left_kernel();
    let kernel_dim = basis.len();
    match kernel_dim {
        0 => StarReport { holds: true, witness: None, method: StarMethod::ExactKernel, kernel_dim },
        1 => {
            let g = &basis[0];
            let mixed = is_mixed_sign(g);
            StarReport {
                holds: !mixed,
                witness: mixed.then(|| g.clone()),
                method: StarMethod::ExactKernel,
                kernel_dim,
            }
        }
        _ => {
            let witness = search_mixed(&basis, bound);
            StarReport {
                holds: witness.is_none(),
                witness,
                method: StarMethod::BoundedSearch { bound },
                kernel_dim,
            }
        }
    }
}

/// Basis vectors first, then integer combinations shell by shell in
/// increasing max-norm of the coefficients.
fn search_mixed(basis: &[[BigInt; 3]], bound: u32) -> Option<[BigInt; 3]> {
    if let Some(v) = basis.iter().find(|v| is_mixed_sign(v)) {
        return Some(v.clone());
    }
    let dim = basis.len();
    let bound = bound as i64;
    for shell in 1..=bound {
        let mut coeffs = vec![-shell; dim];
        loop {
            if coeffs.iter().any(|c| c.abs() == shell) {
                let mut v: [BigInt; 3] = Default::default();
                for (c, b) in coeffs.iter().zip(basis) {
                    for (x, y) in v.iter_mut().zip(b) {
                        *x += BigInt::from(*c) * y;
                    }
                }
                if is_mixed_sign(&v) {
                    return Some(normalize_sign(reduce(v)));
                }
            }
            // odometer over [-shell, shell]^dim
            let mut i = 0;
            loop {
                if i == dim {
                    break;
                }
                coeffs[i] += 1;
                if coeffs[i] > shell {
                    coeffs[i] = -shell;
                    i += 1;
                } else {
                    break;
                }
            }
            if i == dim {
                break;
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(v: [i64; 3]) -> [BigInt; 3] {
        v.map(BigInt::from)
    }

    #[test]
    fn parabola_three_atoms_holds() {
        let m = LatticeMatrix::from_integers([[1, -1, 0], [2, 0, 0], [0, 0, 0]]);
        let r = star_condition(&m, DEFAULT_SEARCH_BOUND);
        assert!(r.holds);
        assert_eq!(r.kernel_dim, 1);
        assert_eq!(m.left_kernel(), vec![ints([0, 0, 1])]);
        assert_eq!(r.method, StarMethod::ExactKernel);
    }

    #[test]
    fn parallel_rows_fail() {
        let m = LatticeMatrix::from_integers([[1, 1, 0], [2, 2, 0], [0, 0, 0]]);
        let r = star_condition(&m, DEFAULT_SEARCH_BOUND);
        assert!(!r.holds);
        assert_eq!(r.witness, Some(ints([2, -1, 0])));
        assert_eq!(r.method, StarMethod::BoundedSearch { bound: 50 });
        let w = r.witness.unwrap();
        assert!(m.combine_rows(&w).iter().all(|x| x.is_zero()));
    }

    #[test]
    fn identity_has_trivial_kernel() {
        let m = LatticeMatrix::from_integers([[1, 0, 0], [0, 1, 0], [0, 0, 1]]);
        let r = star_condition(&m, DEFAULT_SEARCH_BOUND);
        assert!(r.holds);
        assert_eq!(r.kernel_dim, 0);
        assert_eq!(r.witness, None);
    }

    #[test]
    fn zero_matrix_fails_with_small_witness() {
        let m = LatticeMatrix::from_integers([[0; 3]; 3]);
        let r = star_condition(&m, 3);
        assert_eq!(r.kernel_dim, 3);
        assert!(!r.holds);
        assert!(is_mixed_sign(r.witness.as_ref().unwrap()));
    }

    #[test]
    fn one_sign_kernel_holds() {
        // rows r1 + r2 + r3 = 0 would be one-signed: (1,1,1) generator.
        let m = LatticeMatrix::from_integers([[1, 0, 0], [0, 1, 0], [-1, -1, 0]]);
        let r = star_condition(&m, 50);
        assert_eq!(m.left_kernel(), vec![ints([1, 1, 1])]);
        assert!(r.holds);
    }

    #[test]
    fn rational_entries() {
        let m = LatticeMatrix::parse(&[["1/2", "1/3", "0"], ["3/2", "1", "0"], ["0", "0", "7"]]).unwrap();
        let r = star_condition(&m, 50);
        assert_eq!(r.witness, Some(ints([3, -1, 0])));
    }
}
