//! Sign symmetries: the GF(2) orthogonal complement of the support parities
//! and the basis partition it induces.

use std::collections::BTreeMap;

use crate::basis::MonomialBasis;
use crate::poly::Exponent;
use crate::tsp::BlockPartition;

/// A GF(2) vector of length `n`, packed into 64-bit words.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Gf2Vec {
    n: usize,
    words: Vec<u64>,
}

impl Gf2Vec {
    pub fn zeros(n: usize) -> Self {
        Gf2Vec {
            n,
            words: vec![0; n.div_ceil(64)],
        }
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b {
                v.flip(i);
            }
        }
        v
    }

    /// Parity vector `(α)_2`.
    pub fn parity_of(e: &Exponent) -> Self {
        Self::from_bits(&e.parity())
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize) -> bool {
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn flip(&mut self, i: usize) {
        self.words[i / 64] ^= 1 << (i % 64);
    }

    pub fn xor_assign(&mut self, other: &Gf2Vec) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn dot(&self, other: &Gf2Vec) -> bool {
        let ones: u32 = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones())
            .sum();
        ones % 2 == 1
    }

    pub fn bits(&self) -> Vec<bool> {
        (0..self.n).map(|i| self.get(i)).collect()
    }
}

impl std::fmt::Debug for Gf2Vec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s: String = self.bits().iter().map(|&b| if b { '1' } else { '0' }).collect();
        write!(f, "Gf2Vec({s})")
    }
}

/// Reduced row echelon form; returns the nonzero rows and their pivot columns.
pub fn rref(rows: &[Gf2Vec], n: usize) -> (Vec<Gf2Vec>, Vec<usize>) {
    let mut m: Vec<Gf2Vec> = rows.iter().filter(|r| !r.is_zero()).cloned().collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..n {
        let Some(p) = (r..m.len()).find(|&i| m[i].get(col)) else {
            continue;
        };
        m.swap(r, p);
        let pivot_row = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i != r && row.get(col) {
                row.xor_assign(&pivot_row);
            }
        }
        pivots.push(col);
        r += 1;
        if r == m.len() {
            break;
        }
    }
    m.truncate(r);
    (m, pivots)
}

/// Basis of `{r : r·v = 0 for every row v}` over GF(2).
pub fn null_space(rows: &[Gf2Vec], n: usize) -> Vec<Gf2Vec> {
    let (m, pivots) = rref(rows, n);
    let mut is_pivot = vec![false; n];
    for &p in &pivots {
        is_pivot[p] = true;
    }
    let mut basis = Vec::new();
    for free in (0..n).filter(|&c| !is_pivot[c]) {
        let mut v = Gf2Vec::zeros(n);
        v.flip(free);
        for (row, &p) in m.iter().zip(&pivots) {
            if row.get(free) {
                v.flip(p);
            }
        }
        basis.push(v);
    }
    rref(&basis, n).0
}

/// Basis of the sign-symmetry space `(A)_2^⊥`, in reduced row echelon form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignSymmetryBasis {
    pub n: usize,
    pub vectors: Vec<Gf2Vec>,
}

impl SignSymmetryBasis {
    /// Enumerates the whole span (size `2^rank`); intended for small ranks.
    pub fn span(&self) -> Vec<Gf2Vec> {
        let k = self.vectors.len();
        assert!(k < 32, "span of rank {k} is too large to enumerate");
        (0u64..1 << k)
            .map(|mask| {
                let mut v = Gf2Vec::zeros(self.n);
                for (i, b) in self.vectors.iter().enumerate() {
                    if mask >> i & 1 == 1 {
                        v.xor_assign(b);
                    }
                }
                v
            })
            .collect()
    }

    /// The parity key `R^T α mod 2`, one bit per basis vector.
    pub fn key(&self, e: &Exponent) -> Vec<bool> {
        let p = Gf2Vec::parity_of(e);
        self.vectors.iter().map(|r| r.dot(&p)).collect()
    }

    /// Whether `R^T α ≡ 0 (mod 2)`.
    pub fn annihilates(&self, e: &Exponent) -> bool {
        self.key(e).iter().all(|&b| !b)
    }
}

pub fn sign_symmetries<'a>(
    support: impl IntoIterator<Item = &'a Exponent>,
    n: usize,
) -> SignSymmetryBasis {
    let rows: Vec<Gf2Vec> = support.into_iter().map(Gf2Vec::parity_of).collect();
    SignSymmetryBasis {
        n,
        vectors: null_space(&rows, n),
    }
}

/// Groups basis elements by `R^T β mod 2`; `β ~ γ` iff `R^T(β+γ) ≡ 0`.
pub fn signsym_partition(basis: &MonomialBasis, r: &SignSymmetryBasis) -> BlockPartition {
    let mut classes: BTreeMap<Vec<bool>, Vec<usize>> = BTreeMap::new();
    for (i, b) in basis.iter().enumerate() {
        classes.entry(r.key(b)).or_default().push(i);
    }
    let mut blocks: Vec<Vec<usize>> = classes.into_values().collect();
    blocks.sort_by_key(|b| b[0]);
    BlockPartition {
        blocks,
        dropped: Vec::new(),
    }
}
