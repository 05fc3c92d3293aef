//! Elimination of free scalar variables by substitution, so that the
//! interior-point method only sees PSD blocks.

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::DMatrix;

use super::{MatrixEntry, SdpProblem};

const DROP_TOL: f64 = 1e-13;

#[derive(Clone, Debug, Default)]
struct Row {
    entries: BTreeMap<(usize, usize, usize), f64>,
    free: BTreeMap<usize, f64>,
    rhs: f64,
}

impl Row {
    fn len(&self) -> usize {
        self.entries.len() + self.free.len()
    }

    /// `self -= factor * other`, skipping free variable `skip`. Returns the
    /// free variables whose membership changed as `(var, now_present)`.
    fn subtract(&mut self, factor: f64, other: &Row, skip: usize) -> Vec<(usize, bool)> {
        for (&k, &v) in &other.entries {
            update(&mut self.entries, k, -factor * v);
        }
        let mut changed = Vec::new();
        for (&k, &v) in &other.free {
            if k == skip {
                continue;
            }
            let before = self.free.contains_key(&k);
            update(&mut self.free, k, -factor * v);
            let after = self.free.contains_key(&k);
            if before != after {
                changed.push((k, after));
            }
        }
        self.rhs -= factor * other.rhs;
        changed
    }
}

fn update<K: Ord>(map: &mut BTreeMap<K, f64>, key: K, delta: f64) {
    match map.entry(key) {
        std::collections::btree_map::Entry::Occupied(mut e) => {
            let old = *e.get();
            let new = old + delta;
            if new.abs() <= DROP_TOL * old.abs().max(delta.abs()) {
                e.remove();
            } else {
                *e.get_mut() = new;
            }
        }
        std::collections::btree_map::Entry::Vacant(e) => {
            if delta != 0.0 {
                e.insert(delta);
            }
        }
    }
}

/// Block-only problem left after elimination, in maximize sense:
/// `max <objective, X> + offset  s.t.  <rows_i, X> = rhs_i`.
#[derive(Clone, Debug)]
pub(crate) struct Reduced {
    pub blocks: Vec<usize>,
    pub rows: Vec<Vec<MatrixEntry>>,
    pub rhs: Vec<f64>,
    pub objective: Vec<MatrixEntry>,
    pub offset: f64,
    num_free: usize,
    /// `(var, pivot coefficient, pivot row)` in elimination order.
    eliminated: Vec<(usize, f64, Row)>,
}

#[derive(Clone, Debug)]
pub(crate) enum Presolved {
    Reduced(Reduced),
    Infeasible(String),
    Unbounded(String),
}

fn to_entries(m: &BTreeMap<(usize, usize, usize), f64>) -> Vec<MatrixEntry> {
    m.iter()
        .map(|(&(block, i, j), &coef)| MatrixEntry { block, i, j, coef })
        .collect()
}

pub(crate) fn presolve(problem: &SdpProblem) -> Presolved {
    let to_row = |form: &super::LinearForm, rhs: f64| {
        let c = form.canonical();
        Row {
            entries: c.entries.iter().map(|e| ((e.block, e.i, e.j), e.coef)).collect(),
            free: c.free.into_iter().collect(),
            rhs,
        }
    };
    let mut rows: Vec<Option<Row>> = problem
        .constraints
        .iter()
        .map(|c| Some(to_row(&c.form, c.rhs)))
        .collect();
    let mut objective = to_row(&problem.objective, 0.0);
    let mut offset = 0.0;
    let mut var_rows: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); problem.num_free];
    for (r, row) in rows.iter().enumerate() {
        for &k in row.as_ref().unwrap().free.keys() {
            var_rows[k].insert(r);
        }
    }
    let mut eliminated = Vec::new();
    let mut with_free: BTreeSet<usize> = (0..rows.len())
        .filter(|&r| !rows[r].as_ref().unwrap().free.is_empty())
        .collect();

    while let Some(&pivot_idx) = with_free.iter().min_by_key(|&&r| {
        let row = rows[r].as_ref().unwrap();
        (row.free.len(), row.len(), r)
    }) {
        let pivot = rows[pivot_idx].take().unwrap();
        with_free.remove(&pivot_idx);
        let (&var, &a) = pivot
            .free
            .iter()
            .max_by(|x, y| x.1.abs().total_cmp(&y.1.abs()).then(y.0.cmp(x.0)))
            .unwrap();
        for &k in pivot.free.keys() {
            var_rows[k].remove(&pivot_idx);
        }
        let targets: Vec<usize> = var_rows[var].iter().copied().collect();
        for r in targets {
            let row = rows[r].as_mut().unwrap();
            let c = row.free.remove(&var).unwrap();
            for (k, present) in row.subtract(c / a, &pivot, var) {
                if present {
                    var_rows[k].insert(r);
                } else {
                    var_rows[k].remove(&r);
                }
            }
            if row.free.is_empty() {
                with_free.remove(&r);
            }
        }
        var_rows[var].clear();
        if let Some(c) = objective.free.remove(&var) {
            objective.subtract(c / a, &pivot, var);
            offset += c / a * pivot.rhs;
        }
        eliminated.push((var, a, pivot));
    }

    if let Some((&k, _)) = objective.free.iter().find(|(_, c)| c.abs() > DROP_TOL) {
        return Presolved::Unbounded(format!("free variable {k} is unconstrained and has nonzero cost"));
    }

    let scale = 1.0 + problem.constraints.iter().map(|c| c.rhs.abs()).fold(0.0, f64::max);
    let mut kept_rows = Vec::new();
    let mut rhs = Vec::new();
    for (r, row) in rows.into_iter().enumerate() {
        let Some(row) = row else { continue };
        if row.entries.is_empty() {
            if row.rhs.abs() > 1e-9 * scale {
                return Presolved::Infeasible(format!(
                    "constraint {r} reduces to 0 = {:e}",
                    row.rhs
                ));
            }
            continue;
        }
        kept_rows.push(to_entries(&row.entries));
        rhs.push(row.rhs);
    }
    Presolved::Reduced(Reduced {
        blocks: problem.blocks.clone(),
        rows: kept_rows,
        rhs,
        objective: to_entries(&objective.entries),
        offset,
        num_free: problem.num_free,
        eliminated,
    })
}

impl Reduced {
    /// Recovers the free variables from block values by back-substitution.
    pub fn recover_free(&self, blocks: &[DMatrix<f64>]) -> Vec<f64> {
        let mut z = vec![0.0; self.num_free];
        for (var, a, row) in self.eliminated.iter().rev() {
            let mut rest = 0.0;
            for (&(b, i, j), &c) in &row.entries {
                let w = if i == j { 1.0 } else { 2.0 };
                rest += w * c * blocks[b][(i, j)];
            }
            for (&k, &c) in &row.free {
                if k != *var {
                    rest += c * z[k];
                }
            }
            z[*var] = (row.rhs - rest) / a;
        }
        z
    }
}
