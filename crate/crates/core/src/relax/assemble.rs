//! SDP assembly for the SOS (Gram) and moment forms.

use std::collections::{BTreeMap, BTreeSet};

use crate::basis::MonomialBasis;
use crate::poly::{Exponent, Polynomial};
use crate::sdp::{BlockLabel, Form, LinearForm, SdpProblem};
use crate::tsp::{block_closure, BinaryPattern, BlockPartition, TspState};

use super::{Pop, RelaxError};

/// Gram blocks for one generator `g_j` (with `g_0 = 1`).
pub(crate) struct GramSpec<'a> {
    pub j: usize,
    pub generator: &'a Polynomial,
    pub basis: &'a MonomialBasis,
    pub partition: &'a BlockPartition,
}

fn specs_from_state(state: &TspState) -> Vec<GramSpec<'_>> {
    (0..state.len())
        .map(|j| GramSpec {
            j,
            generator: &state.generators[j],
            basis: &state.bases[j],
            partition: &state.partitions[j],
        })
        .collect()
}

/// Calls `visit(block, a, c, alpha, coef)` for every upper-triangle block
/// entry and every term of the block's generator.
fn for_each_entry(specs: &[GramSpec], mut visit: impl FnMut(usize, usize, usize, Exponent, f64)) -> Vec<BlockLabel> {
    let mut labels = Vec::new();
    for spec in specs {
        let terms: Vec<(Exponent, f64)> = spec.generator.terms().map(|(e, c)| (e.clone(), c)).collect();
        for (bk, members) in spec.partition.blocks.iter().enumerate() {
            let b = labels.len();
            labels.push(BlockLabel {
                j: spec.j,
                block: bk,
                monomials: members.iter().map(|&i| spec.basis.get(i).clone()).collect(),
            });
            for a in 0..members.len() {
                for c in a..members.len() {
                    let s = spec.basis.get(members[a]) + spec.basis.get(members[c]);
                    for (ge, gc) in &terms {
                        visit(b, a, c, ge + &s, *gc);
                    }
                }
            }
        }
    }
    labels
}

/// `max λ  s.t.  Σ_j <Q_j, D^j_α> + Σ_i t_i (p_i)_α + λ[α=0] = f_α - floor Σ_i (p_i)_α`.
pub(crate) fn sos_problem(
    f: &Polynomial,
    specs: &[GramSpec],
    params: &[Polynomial],
    floor: f64,
) -> Result<SdpProblem, RelaxError> {
    let n = f.nvars();
    let mut rows: BTreeMap<Exponent, LinearForm> = BTreeMap::new();
    let labels = for_each_entry(specs, |b, a, c, alpha, coef| {
        rows.entry(alpha).or_default().add_entry(b, a, c, coef);
    });
    let mut blocks: Vec<usize> = labels.iter().map(|l| l.monomials.len()).collect();
    let mut rhs: BTreeMap<Exponent, f64> = f.terms().map(|(e, c)| (e.clone(), c)).collect();
    for p in params {
        let b = blocks.len();
        blocks.push(1);
        for (e, c) in p.terms() {
            rows.entry(e.clone()).or_default().add_entry(b, 0, 0, c);
            *rhs.entry(e.clone()).or_default() -= floor * c;
        }
    }
    rows.entry(Exponent::zero(n)).or_default().add_free(0, 1.0);
    if let Some((alpha, _)) = rhs.iter().find(|(a, v)| **v != 0.0 && !rows.contains_key(*a)) {
        return Err(RelaxError::Unmatched(alpha.clone()));
    }
    let mut problem = SdpProblem::new(blocks, 1);
    for (alpha, form) in rows {
        let b = rhs.get(&alpha).copied().unwrap_or(0.0);
        problem.add_constraint(form, b);
        problem.meta.constraint_labels.push(Some(alpha));
    }
    problem.objective.add_free(0, 1.0);
    problem.meta.form = Some(Form::Sos);
    problem.meta.block_labels = labels;
    problem.meta.free_labels = vec![Exponent::zero(n)];
    Ok(problem)
}

/// `max -Σ f_α y_α  s.t.  X_b[a,c] = Σ_s (g_j)_s y_{s+β_a+β_c},  y_0 = 1`.
pub(crate) fn moment_problem(f: &Polynomial, specs: &[GramSpec]) -> Result<SdpProblem, RelaxError> {
    let n = f.nvars();
    let mut cells: Vec<(usize, usize, usize, Exponent, f64)> = Vec::new();
    let labels = for_each_entry(specs, |b, a, c, alpha, coef| cells.push((b, a, c, alpha, coef)));
    let mut moments: BTreeSet<Exponent> = cells.iter().map(|c| c.3.clone()).collect();
    moments.insert(Exponent::zero(n));
    if let Some(alpha) = f.support().into_iter().find(|a| !moments.contains(a)) {
        return Err(RelaxError::Unmatched(alpha));
    }
    let index: BTreeMap<Exponent, usize> = moments.iter().cloned().enumerate().map(|(i, e)| (e, i)).collect();

    let blocks: Vec<usize> = labels.iter().map(|l| l.monomials.len()).collect();
    let mut problem = SdpProblem::new(blocks, index.len());
    let mut current: Option<(usize, usize, usize)> = None;
    let mut form = LinearForm::default();
    for (b, a, c, alpha, coef) in cells {
        if current != Some((b, a, c)) {
            if current.is_some() {
                problem.add_constraint(std::mem::take(&mut form), 0.0);
                problem.meta.constraint_labels.push(None);
            }
            current = Some((b, a, c));
            form.add_entry(b, a, c, if a == c { 1.0 } else { 0.5 });
        }
        form.add_free(index[&alpha], -coef);
    }
    if current.is_some() {
        problem.add_constraint(form, 0.0);
        problem.meta.constraint_labels.push(None);
    }
    let mut norm = LinearForm::default();
    norm.add_free(index[&Exponent::zero(n)], 1.0);
    problem.add_constraint(norm, 1.0);
    problem.meta.constraint_labels.push(Some(Exponent::zero(n)));
    for (e, c) in f.terms() {
        problem.objective.add_free(index[e], -c);
    }
    problem.meta.form = Some(Form::Moment);
    problem.meta.block_labels = labels;
    problem.meta.free_labels = moments.into_iter().collect();
    Ok(problem)
}

/// Maximize `λ` with `f - λ` a sum of squares over the partition blocks.
pub fn assemble_unconstrained_sos(
    f: &Polynomial,
    partition: &BlockPartition,
    basis: &MonomialBasis,
) -> Result<SdpProblem, RelaxError> {
    let one = Polynomial::constant(f.nvars(), 1.0);
    let spec = GramSpec {
        j: 0,
        generator: &one,
        basis,
        partition,
    };
    sos_problem(f, &[spec], &[], 0.0)
}

/// Moment relaxation masked by a block-closed pattern.
pub fn assemble_unconstrained_moment(
    f: &Polynomial,
    pattern: &BinaryPattern,
    basis: &MonomialBasis,
) -> Result<SdpProblem, RelaxError> {
    let (closed, partition) = block_closure(pattern);
    if &closed != pattern {
        return Err(RelaxError::NotBlockClosed);
    }
    let one = Polynomial::constant(f.nvars(), 1.0);
    let spec = GramSpec {
        j: 0,
        generator: &one,
        basis,
        partition: &partition,
    };
    moment_problem(f, &[spec])
}

fn check_state(pop: &Pop, state: &TspState) -> Result<(), RelaxError> {
    if state.len() != pop.constraints.len() + 1 || state.n != pop.n {
        return Err(RelaxError::StateMismatch);
    }
    Ok(())
}

/// Moment relaxation with masked moment and localizing matrices.
pub fn assemble_constrained_moment(pop: &Pop, state: &TspState) -> Result<SdpProblem, RelaxError> {
    check_state(pop, state)?;
    if !pop.params.is_empty() {
        return Err(RelaxError::ParamsNeedSos);
    }
    moment_problem(&pop.objective, &specs_from_state(state))
}

/// Sparse Putinar SOS relaxation, including any affine parameters of `pop`.
pub fn assemble_constrained_sos(pop: &Pop, state: &TspState) -> Result<SdpProblem, RelaxError> {
    check_state(pop, state)?;
    sos_problem(&pop.objective, &specs_from_state(state), &pop.params, pop.param_floor)
}
