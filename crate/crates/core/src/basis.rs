//! Monomial bases: the full simplex `N^n_d` and the Newton half-polytope basis.

use std::collections::{BTreeSet, HashMap};

use thiserror::Error;

use crate::lp::{self, LpFailure};
use crate::poly::{Exponent, Polynomial};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BasisError {
    #[error("basis N^{n}_{d} has more than usize::MAX elements")]
    Overflow { n: usize, d: u32 },
    #[error("the Newton polytope of the zero polynomial is empty")]
    ZeroPolynomial,
    #[error("LP membership test failed for candidate {candidate:?}")]
    Lp { candidate: Exponent },
    #[error("duplicate basis element {0:?}")]
    Duplicate(Exponent),
    #[error("basis element {0:?} has the wrong number of variables")]
    WrongLength(Exponent),
}

/// An ordered, duplicate-free list of exponents with O(1) index lookup.
#[derive(Clone, Debug)]
pub struct MonomialBasis {
    n: usize,
    elements: Vec<Exponent>,
    index: HashMap<Exponent, usize>,
}

impl PartialEq for MonomialBasis {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.elements == other.elements
    }
}

impl MonomialBasis {
    /// Sorts `elements` into the crate's graded order and removes duplicates.
    pub fn sorted(n: usize, elements: impl IntoIterator<Item = Exponent>) -> Self {
        let set: BTreeSet<Exponent> = elements.into_iter().collect();
        Self::build(n, set.into_iter().collect())
    }

    /// Keeps the caller's order; used to reproduce explicitly listed bases.
    pub fn with_order(n: usize, elements: Vec<Exponent>) -> Result<Self, BasisError> {
        let mut seen = BTreeSet::new();
        for e in &elements {
            if e.nvars() != n {
                return Err(BasisError::WrongLength(e.clone()));
            }
            if !seen.insert(e.clone()) {
                return Err(BasisError::Duplicate(e.clone()));
            }
        }
        Ok(Self::build(n, elements))
    }

    fn build(n: usize, elements: Vec<Exponent>) -> Self {
        let index = elements
            .iter()
            .enumerate()
            .map(|(i, e)| (e.clone(), i))
            .collect();
        MonomialBasis { n, elements, index }
    }

    pub fn nvars(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn get(&self, i: usize) -> &Exponent {
        &self.elements[i]
    }

    pub fn index_of(&self, e: &Exponent) -> Option<usize> {
        self.index.get(e).copied()
    }

    pub fn contains(&self, e: &Exponent) -> bool {
        self.index.contains_key(e)
    }

    pub fn elements(&self) -> &[Exponent] {
        &self.elements
    }

    pub fn iter(&self) -> impl Iterator<Item = &Exponent> {
        self.elements.iter()
    }

    /// All pairwise sums `B + B`.
    pub fn sumset(&self) -> BTreeSet<Exponent> {
        let mut out = BTreeSet::new();
        for (i, a) in self.elements.iter().enumerate() {
            for b in &self.elements[i..] {
                out.insert(a + b);
            }
        }
        out
    }
}

/// `C(n + d, d)`, or `None` on overflow.
pub fn simplex_size(n: usize, d: u32) -> Option<usize> {
    let mut acc: u128 = 1;
    for i in 1..=d as u128 {
        acc = acc.checked_mul(n as u128 + i)? / i;
        if acc > usize::MAX as u128 {
            return None;
        }
    }
    usize::try_from(acc).ok()
}

/// Every exponent of total degree exactly `deg`, largest-first lexicographic.
fn exponents_of_degree(n: usize, deg: u32, out: &mut Vec<Exponent>) {
    fn rec(prefix: &mut Vec<u32>, n: usize, left: u32, out: &mut Vec<Exponent>) {
        if prefix.len() + 1 == n {
            prefix.push(left);
            out.push(Exponent::new(prefix.clone()));
            prefix.pop();
            return;
        }
        for first in (0..=left).rev() {
            prefix.push(first);
            rec(prefix, n, left - first, out);
            prefix.pop();
        }
    }
    if n == 0 {
        if deg == 0 {
            out.push(Exponent::new(Vec::new()));
        }
        return;
    }
    rec(&mut Vec::with_capacity(n), n, deg, out);
}

/// `N^n_d`: all exponents of total degree at most `d`, in graded order.
pub fn standard_basis(n: usize, d: u32) -> Result<MonomialBasis, BasisError> {
    let size = simplex_size(n, d).ok_or(BasisError::Overflow { n, d })?;
    let mut elements = Vec::with_capacity(size);
    for deg in 0..=d {
        exponents_of_degree(n, deg, &mut elements);
    }
    debug_assert_eq!(elements.len(), size);
    Ok(MonomialBasis::build(n, elements))
}

/// Half Newton polytope basis of `f`: all `α` with `2α ∈ conv(supp f)`.
pub fn newton_half_basis(f: &Polynomial) -> Result<MonomialBasis, BasisError> {
    let supp: Vec<Exponent> = f.support().into_iter().collect();
    newton_half_basis_of_support(f.nvars(), &supp)
}

/// Same as [`newton_half_basis`] for an explicit support set.
pub fn newton_half_basis_of_support(
    n: usize,
    support: &[Exponent],
) -> Result<MonomialBasis, BasisError> {
    if support.is_empty() {
        return Err(BasisError::ZeroPolynomial);
    }
    let max_deg = support.iter().map(Exponent::degree).max().unwrap_or(0);
    let half_deg = max_deg.div_ceil(2);
    let mut lo = vec![u32::MAX; n];
    let mut hi = vec![0u32; n];
    for s in support {
        for (i, &v) in s.entries().iter().enumerate() {
            lo[i] = lo[i].min(v);
            hi[i] = hi[i].max(v);
        }
    }
    let points: Vec<Vec<f64>> = support
        .iter()
        .map(|s| s.entries().iter().map(|&v| v as f64).collect())
        .collect();
    let present: BTreeSet<&Exponent> = support.iter().collect();

    let mut members = Vec::new();
    for deg in 0..=half_deg {
        let mut candidates = Vec::new();
        exponents_of_degree(n, deg, &mut candidates);
        for alpha in candidates {
            let in_box = alpha
                .entries()
                .iter()
                .enumerate()
                .all(|(i, &a)| 2 * a >= lo[i] && 2 * a <= hi[i]);
            if !in_box {
                continue;
            }
            let doubled = alpha.scaled(2);
            let inside = if present.contains(&doubled) {
                true
            } else {
                let target: Vec<f64> = doubled.entries().iter().map(|&v| v as f64).collect();
                lp::in_convex_hull(&points, &target).map_err(|LpFailure::IterationLimit| {
                    BasisError::Lp {
                        candidate: alpha.clone(),
                    }
                })?
            };
            if inside {
                members.push(alpha);
            }
        }
    }
    Ok(MonomialBasis::sorted(n, members))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::parse_polynomial;

    fn e(v: &[u32]) -> Exponent {
        Exponent::new(v.to_vec())
    }

    #[test]
    fn standard_sizes() {
        let b = standard_basis(2, 1).unwrap();
        assert_eq!(b.elements(), &[e(&[0, 0]), e(&[1, 0]), e(&[0, 1])]);
        assert_eq!(standard_basis(8, 4).unwrap().len(), 495);
        assert_eq!(standard_basis(9, 5).unwrap().len(), 2002);
        assert_eq!(standard_basis(3, 0).unwrap().len(), 1);
    }

    #[test]
    fn standard_basis_is_sorted() {
        let b = standard_basis(3, 3).unwrap();
        assert!(b.elements().windows(2).all(|w| w[0] < w[1]));
        for (i, x) in b.iter().enumerate() {
            assert_eq!(b.index_of(x), Some(i));
        }
    }

    #[test]
    fn overflow_is_reported() {
        assert!(matches!(
            standard_basis(usize::MAX / 2, 40),
            Err(BasisError::Overflow { .. })
        ));
    }

    #[test]
    fn newton_sign_symmetry_example() {
        let f = parse_polynomial("1+x1^2*x2^4+x1^4*x2^2+x1^4*x2^4-x1*x2^2-3*x1^2*x2^2", 2).unwrap();
        let b = newton_half_basis(&f).unwrap();
        let expected: BTreeSet<_> = [e(&[0, 0]), e(&[1, 1]), e(&[1, 2]), e(&[2, 1]), e(&[2, 2])]
            .into_iter()
            .collect();
        assert_eq!(b.iter().cloned().collect::<BTreeSet<_>>(), expected);
    }

    #[test]
    fn newton_unconstrained_example() {
        let f = parse_polynomial("1+x1^4+x2^4+x3^4+x1*x2*x3+x2", 3).unwrap();
        let b = newton_half_basis(&f).unwrap();
        let listed = [
            e(&[0, 0, 0]),
            e(&[0, 1, 0]),
            e(&[2, 0, 0]),
            e(&[0, 2, 0]),
            e(&[1, 0, 1]),
            e(&[0, 0, 2]),
            e(&[1, 0, 0]),
            e(&[0, 1, 1]),
            e(&[0, 0, 1]),
            e(&[1, 1, 0]),
        ];
        assert_eq!(b.len(), 10);
        for x in &listed {
            assert!(b.contains(x), "missing {x:?}");
        }
    }

    #[test]
    fn newton_single_point() {
        let f = parse_polynomial("x1^2", 1).unwrap();
        assert_eq!(newton_half_basis(&f).unwrap().elements(), &[e(&[1])]);
        assert_eq!(
            newton_half_basis(&Polynomial::zero(2)),
            Err(BasisError::ZeroPolynomial).map(|_: ()| unreachable!())
        );
    }

    #[test]
    fn with_order_rejects_duplicates() {
        assert!(matches!(
            MonomialBasis::with_order(1, vec![e(&[1]), e(&[1])]),
            Err(BasisError::Duplicate(_))
        ));
    }
}
