//! Term-sparsity patterns: support extension, block closure and the
//! iterations that produce the block structure of each relaxation.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use thiserror::Error;

use crate::basis::{standard_basis, BasisError, MonomialBasis};
use crate::poly::{Exponent, Polynomial};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TspError {
    #[error("support exponent {0} is not a sum of two basis elements")]
    NotInSumset(Exponent),
    #[error("sparse order must be at least 1")]
    ZeroOrder,
    #[error("relaxation order {d_hat} is below the minimum {required}")]
    OrderTooLow { d_hat: u32, required: u32 },
    #[error("polynomial has {got} variables, expected {expected}")]
    VariableMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Basis(#[from] BasisError),
}

/// Symmetric 0/1 matrix stored densely; diagonal entries are explicit.
#[derive(Clone, PartialEq, Eq)]
pub struct BinaryPattern {
    size: usize,
    bits: Vec<bool>,
}

impl BinaryPattern {
    pub fn empty(size: usize) -> Self {
        BinaryPattern {
            size,
            bits: vec![false; size * size],
        }
    }

    pub fn identity(size: usize) -> Self {
        let mut p = Self::empty(size);
        for i in 0..size {
            p.set(i, i);
        }
        p
    }

    pub fn full(size: usize) -> Self {
        BinaryPattern {
            size,
            bits: vec![true; size * size],
        }
    }

    /// Builds a pattern from rows of `'0'`/`'1'` characters. Returns `None`
    /// when the rows are ragged, contain other characters, or are asymmetric.
    pub fn from_rows(rows: &[&str]) -> Option<Self> {
        let size = rows.len();
        let mut p = Self::empty(size);
        for (i, row) in rows.iter().enumerate() {
            let row: Vec<char> = row.chars().filter(|c| !c.is_whitespace()).collect();
            if row.len() != size {
                return None;
            }
            for (j, c) in row.iter().enumerate() {
                match c {
                    '1' => p.bits[i * size + j] = true,
                    '0' => {}
                    _ => return None,
                }
            }
        }
        (0..size)
            .all(|i| (0..size).all(|j| p.get(i, j) == p.get(j, i)))
            .then_some(p)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.bits[i * self.size + j]
    }

    /// Sets both `(i, j)` and `(j, i)`.
    pub fn set(&mut self, i: usize, j: usize) {
        self.bits[i * self.size + j] = true;
        self.bits[j * self.size + i] = true;
    }

    /// Upper-triangle entries `(i, j)` with `i <= j`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.size).flat_map(move |i| (i..self.size).filter(move |&j| self.get(i, j)).map(move |j| (i, j)))
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_subset(&self, other: &BinaryPattern) -> bool {
        self.size == other.size && self.bits.iter().zip(&other.bits).all(|(&a, &b)| !a || b)
    }

    pub fn union(&self, other: &BinaryPattern) -> BinaryPattern {
        assert_eq!(self.size, other.size);
        BinaryPattern {
            size: self.size,
            bits: self.bits.iter().zip(&other.bits).map(|(&a, &b)| a || b).collect(),
        }
    }

    pub fn rows(&self) -> Vec<String> {
        (0..self.size)
            .map(|i| (0..self.size).map(|j| if self.get(i, j) { '1' } else { '0' }).collect())
            .collect()
    }
}

impl fmt::Debug for BinaryPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BinaryPattern({})", self.size)?;
        for row in self.rows() {
            writeln!(f, "  {row}")?;
        }
        Ok(())
    }
}

/// Connected components of a pattern, plus indices that were discarded
/// because their diagonal entry is zero and they have no edges.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct BlockPartition {
    pub blocks: Vec<Vec<usize>>,
    pub dropped: Vec<usize>,
}

impl BlockPartition {
    pub fn sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(Vec::len).collect()
    }

    pub fn max_block(&self) -> usize {
        self.blocks.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// `(size, count)` pairs, largest size first.
    pub fn block_table(&self) -> Vec<(usize, usize)> {
        let mut hist: BTreeMap<usize, usize> = BTreeMap::new();
        for b in &self.blocks {
            *hist.entry(b.len()).or_default() += 1;
        }
        hist.into_iter().rev().collect()
    }

    /// Renders the block table as e.g. `"6×1, 2×2"` (size × count).
    pub fn table_string(&self) -> String {
        self.block_table()
            .iter()
            .map(|(s, c)| format!("{s}×{c}"))
            .collect::<Vec<_>>()
            .join(", ")
    }

    /// Maps each index to its block, `None` for dropped indices.
    pub fn block_of(&self, size: usize) -> Vec<Option<usize>> {
        let mut out = vec![None; size];
        for (b, members) in self.blocks.iter().enumerate() {
            for &i in members {
                out[i] = Some(b);
            }
        }
        out
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

/// Completes every connected component of `p` to a full block.
pub fn block_closure(p: &BinaryPattern) -> (BinaryPattern, BlockPartition) {
    let r = p.size();
    let mut uf = UnionFind::new(r);
    let mut active = vec![false; r];
    for (i, j) in p.edges() {
        active[i] = true;
        active[j] = true;
        if i != j {
            uf.union(i, j);
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    let mut dropped = Vec::new();
    for i in 0..r {
        if active[i] {
            groups.entry(uf.find(i)).or_default().push(i);
        } else {
            dropped.push(i);
        }
    }
    // Roots are the smallest member, so map order is block order.
    let blocks: Vec<Vec<usize>> = groups.into_values().collect();
    let mut closed = BinaryPattern::empty(r);
    for b in &blocks {
        for &i in b {
            for &j in b {
                closed.bits[i * r + j] = true;
            }
        }
    }
    (closed, BlockPartition { blocks, dropped })
}

/// `C[β,γ] = 1` iff `(shifts + β + γ) ∩ support ≠ ∅`.
fn support_extension(
    basis: &MonomialBasis,
    shifts: &[Exponent],
    support: &HashSet<Exponent>,
) -> BinaryPattern {
    let r = basis.len();
    let mut p = BinaryPattern::empty(r);
    for i in 0..r {
        for j in i..r {
            let s = basis.get(i) + basis.get(j);
            if shifts.iter().any(|a| support.contains(&(a + &s))) {
                p.set(i, j);
            }
        }
    }
    p
}

/// `shifts + {β+γ : p[β,γ] = 1}`.
fn pattern_support(basis: &MonomialBasis, shifts: &[Exponent], p: &BinaryPattern) -> BTreeSet<Exponent> {
    let mut out = BTreeSet::new();
    for (i, j) in p.edges() {
        let s = basis.get(i) + basis.get(j);
        for a in shifts {
            out.insert(a + &s);
        }
    }
    out
}

/// One term-sparsity step for a single basis.
#[derive(Clone, Debug)]
pub struct TspStep {
    pub k: usize,
    /// Support-extension pattern `C^(k)`.
    pub extension: BinaryPattern,
    /// Block-closed pattern `B^(k)`.
    pub pattern: BinaryPattern,
    pub partition: BlockPartition,
    /// `S^(k)`: exponents covered by the pattern.
    pub support: BTreeSet<Exponent>,
}

/// Unconstrained iteration output: one step per distinct pattern.
#[derive(Clone, Debug)]
pub struct TspRun {
    pub steps: Vec<TspStep>,
    pub stabilized: bool,
}

impl TspRun {
    pub fn last(&self) -> &TspStep {
        self.steps.last().expect("a run has at least one step")
    }
}

/// Runs support extension + block closure from `S^(0) = A ∪ 2B` for up to
/// `k_max` steps. Stops early, with `stabilized = true`, at the first `k`
/// whose next step would reproduce the same pattern. One extra step is
/// computed at `k_max` to decide stability; it is not recorded.
pub fn tsp_iterate_unconstrained(
    support: &BTreeSet<Exponent>,
    basis: &MonomialBasis,
    k_max: usize,
) -> Result<TspRun, TspError> {
    if k_max == 0 {
        return Err(TspError::ZeroOrder);
    }
    let sumset = basis.sumset();
    if let Some(bad) = support.iter().find(|a| !sumset.contains(*a)) {
        return Err(TspError::NotInSumset(bad.clone()));
    }
    let shifts = [Exponent::zero(basis.nvars())];
    let mut current: HashSet<Exponent> = support.iter().cloned().collect();
    current.extend(basis.iter().map(|b| b.scaled(2)));

    let step_from = |k: usize, current: &HashSet<Exponent>| {
        let extension = support_extension(basis, &shifts, current);
        let (pattern, partition) = block_closure(&extension);
        let support = pattern_support(basis, &shifts, &pattern);
        TspStep {
            k,
            extension,
            pattern,
            partition,
            support,
        }
    };

    let mut steps: Vec<TspStep> = Vec::new();
    for k in 1..=k_max.saturating_add(1) {
        let step = step_from(k, &current);
        if let Some(prev) = steps.last() {
            if prev.pattern == step.pattern {
                return Ok(TspRun {
                    steps,
                    stabilized: true,
                });
            }
        }
        if k > k_max {
            break;
        }
        current = step.support.iter().cloned().collect();
        steps.push(step);
    }
    Ok(TspRun {
        steps,
        stabilized: false,
    })
}

/// Constrained iteration state: one basis, pattern and support per
/// generator `g_0 = 1, g_1, ..., g_m`.
#[derive(Clone, Debug)]
pub struct TspState {
    pub d_hat: u32,
    pub k: usize,
    pub n: usize,
    /// `g_0 = 1` followed by the constraints.
    pub generators: Vec<Polynomial>,
    pub bases: Vec<MonomialBasis>,
    pub extensions: Vec<BinaryPattern>,
    pub patterns: Vec<BinaryPattern>,
    pub partitions: Vec<BlockPartition>,
    pub supports: Vec<BTreeSet<Exponent>>,
    pub stabilized: bool,
    shifts: Vec<Vec<Exponent>>,
}

/// `⌈deg g / 2⌉`.
pub fn half_degree(p: &Polynomial) -> u32 {
    p.degree().div_ceil(2)
}

/// Smallest admissible relaxation order for `f` subject to `gs`.
pub fn minimum_order(f: &Polynomial, gs: &[Polynomial]) -> u32 {
    gs.iter().map(half_degree).fold(half_degree(f), u32::max)
}

impl TspState {
    /// Builds the `k = 0` state: `S_0 = A ∪ {2α : α ∈ N_d̂}`, `S_j = ∅`.
    pub fn new(f: &Polynomial, gs: &[Polynomial], d_hat: u32) -> Result<Self, TspError> {
        let n = f.nvars();
        if let Some(g) = gs.iter().find(|g| g.nvars() != n) {
            return Err(TspError::VariableMismatch {
                expected: n,
                got: g.nvars(),
            });
        }
        let required = minimum_order(f, gs);
        if d_hat < required {
            return Err(TspError::OrderTooLow { d_hat, required });
        }
        let mut generators = vec![Polynomial::constant(n, 1.0)];
        generators.extend(gs.iter().cloned());
        let mut bases = Vec::with_capacity(generators.len());
        let mut shifts = Vec::with_capacity(generators.len());
        for g in &generators {
            bases.push(standard_basis(n, d_hat - half_degree(g))?);
            shifts.push(g.support().into_iter().collect::<Vec<_>>());
        }

        let mut s0: BTreeSet<Exponent> = f.support();
        for g in gs {
            s0.extend(g.support());
        }
        s0.extend(bases[0].iter().map(|b| b.scaled(2)));
        let mut supports = vec![BTreeSet::new(); generators.len()];
        supports[0] = s0;
        let patterns = bases.iter().map(|b| BinaryPattern::empty(b.len())).collect::<Vec<_>>();
        Ok(TspState {
            d_hat,
            k: 0,
            n,
            generators,
            extensions: patterns.clone(),
            partitions: vec![BlockPartition::default(); bases.len()],
            patterns,
            bases,
            supports,
            stabilized: false,
            shifts,
        })
    }

    /// Adds exponents to `S_0^(0)`, e.g. the support of parameter
    /// polynomials. Only meaningful before the first step.
    pub fn add_initial_support(&mut self, extra: impl IntoIterator<Item = Exponent>) {
        debug_assert_eq!(self.k, 0);
        self.supports[0].extend(extra);
    }

    /// Number of generators including `g_0`.
    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    /// `⋃_j S_j`.
    pub fn union_support(&self) -> BTreeSet<Exponent> {
        self.supports.iter().flatten().cloned().collect()
    }

    /// Advances one sparse order. The result is marked stabilized when every
    /// pattern equals the one it replaced.
    pub fn step(&self) -> TspState {
        let union: HashSet<Exponent> = self.supports.iter().flatten().cloned().collect();
        let mut next = self.clone();
        next.k = self.k + 1;
        for j in 0..self.len() {
            let ext = support_extension(&self.bases[j], &self.shifts[j], &union);
            let (pattern, partition) = block_closure(&ext);
            next.supports[j] = pattern_support(&self.bases[j], &self.shifts[j], &pattern);
            next.extensions[j] = ext;
            next.patterns[j] = pattern;
            next.partitions[j] = partition;
        }
        next.stabilized = self.k > 0 && next.patterns == self.patterns;
        next
    }
}

/// Iterates the constrained hierarchy up to `k_max`, stopping at the first
/// stable pattern. The returned state has `k` equal to the last distinct
/// pattern's order.
pub fn tsp_iterate_constrained(
    f: &Polynomial,
    gs: &[Polynomial],
    d_hat: u32,
    k_max: usize,
) -> Result<TspState, TspError> {
    iterate_from(TspState::new(f, gs, d_hat)?, k_max)
}

/// Same as [`tsp_iterate_constrained`] from an explicit initial state.
pub fn iterate_from(initial: TspState, k_max: usize) -> Result<TspState, TspError> {
    if k_max == 0 {
        return Err(TspError::ZeroOrder);
    }
    let mut state = initial.step();
    while !state.stabilized {
        let next = state.step();
        if next.stabilized {
            state.stabilized = true;
            break;
        }
        if state.k >= k_max {
            break;
        }
        state = next;
    }
    Ok(state)
}
