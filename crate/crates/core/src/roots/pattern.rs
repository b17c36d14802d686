use serde::{Deserialize, Serialize};

use super::RootSet;

/// The nine root configurations a real quartic can have.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RootPattern {
    FourSingleReal,
    DoublePlusTwoSingleReal,
    SinglePlusTripleReal,
    QuadrupleReal,
    TwoDoubleReal,
    TwoRealTwoComplex,
    FourComplex,
    TwoDoubleComplex,
    DoubleRealPlusComplexPair,
}

impl RootPattern {
    pub const ALL: [RootPattern; 9] = [
        RootPattern::FourSingleReal,
        RootPattern::DoublePlusTwoSingleReal,
        RootPattern::SinglePlusTripleReal,
        RootPattern::QuadrupleReal,
        RootPattern::TwoDoubleReal,
        RootPattern::TwoRealTwoComplex,
        RootPattern::FourComplex,
        RootPattern::TwoDoubleComplex,
        RootPattern::DoubleRealPlusComplexPair,
    ];

    /// Number of distinct real roots in this configuration.
    pub fn n_real(self) -> usize {
        match self {
            RootPattern::FourSingleReal => 4,
            RootPattern::DoublePlusTwoSingleReal => 3,
            RootPattern::SinglePlusTripleReal
            | RootPattern::TwoDoubleReal
            | RootPattern::TwoRealTwoComplex => 2,
            RootPattern::QuadrupleReal | RootPattern::DoubleRealPlusComplexPair => 1,
            RootPattern::FourComplex | RootPattern::TwoDoubleComplex => 0,
        }
    }

    /// Classifies from the multiplicities of the real roots and of the
    /// complex roots (each conjugate counted separately).
    pub fn from_multiplicities(real: &[usize], complex: &[usize]) -> Option<RootPattern> {
        let mut real = real.to_vec();
        let mut complex = complex.to_vec();
        real.sort_unstable();
        complex.sort_unstable();
        let pattern = match (real.as_slice(), complex.as_slice()) {
            ([1, 1, 1, 1], []) => RootPattern::FourSingleReal,
            ([1, 1, 2], []) => RootPattern::DoublePlusTwoSingleReal,
            ([1, 3], []) => RootPattern::SinglePlusTripleReal,
            ([4], []) => RootPattern::QuadrupleReal,
            ([2, 2], []) => RootPattern::TwoDoubleReal,
            ([1, 1], [1, 1]) => RootPattern::TwoRealTwoComplex,
            ([], [1, 1, 1, 1]) => RootPattern::FourComplex,
            ([], [2, 2]) => RootPattern::TwoDoubleComplex,
            ([2], [1, 1]) => RootPattern::DoubleRealPlusComplexPair,
            _ => return None,
        };
        Some(pattern)
    }
}

impl std::fmt::Display for RootPattern {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        std::fmt::Debug::fmt(self, f)
    }
}

pub fn classify_root_pattern(roots: &RootSet) -> RootPattern {
    let (real, complex): (Vec<&super::Root>, Vec<&super::Root>) =
        roots.entries().iter().partition(|r| r.is_real());
    let real: Vec<usize> = real.iter().map(|r| r.multiplicity).collect();
    let complex: Vec<usize> = complex.iter().map(|r| r.multiplicity).collect();
    RootPattern::from_multiplicities(&real, &complex)
        .expect("a valid root set of a real quartic has one of the nine patterns")
}
