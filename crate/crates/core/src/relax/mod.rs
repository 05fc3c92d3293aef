//! Relaxation drivers: choose a basis, run the term-sparsity iteration,
//! assemble an SOS or moment SDP and solve it.

mod assemble;
mod certificate;

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::DMatrix;
use thiserror::Error;

use crate::basis::{newton_half_basis_of_support, standard_basis, BasisError, MonomialBasis};
use crate::poly::{Exponent, Polynomial};
use crate::sdp::{self, Form, SdpError, SdpProblem, SdpSolution, SolveStatus, SolverConfig};
use crate::tsp::{self, half_degree, minimum_order, TspError, TspRun, TspState};

pub use assemble::{
    assemble_constrained_moment, assemble_constrained_sos, assemble_unconstrained_moment,
    assemble_unconstrained_sos,
};
pub use certificate::{
    certificate_support_ok, extract_certificate, verify_certificate, Certificate, CertificateBlock,
    VerifyReport,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RelaxError {
    #[error("coefficient of {0} cannot be matched by any block entry")]
    Unmatched(Exponent),
    #[error("moment pattern is not block-closed")]
    NotBlockClosed,
    #[error("pattern state does not belong to this problem")]
    StateMismatch,
    #[error("parametric problems are only supported in SOS form")]
    ParamsNeedSos,
    #[error("polynomial has {got} variables, expected {expected}")]
    VariableMismatch { expected: usize, got: usize },
    #[error("certificate requires an optimal result, got {0}")]
    NotOptimal(SolveStatus),
    #[error("certificate block {index} has a {rows}x{cols} Gram matrix for {monomials} monomials")]
    GramShape {
        index: usize,
        rows: usize,
        cols: usize,
        monomials: usize,
    },
    #[error(transparent)]
    Basis(#[from] BasisError),
    #[error(transparent)]
    Tsp(#[from] TspError),
    #[error(transparent)]
    Sdp(#[from] SdpError),
}

/// `min f(x)` subject to `g_j(x) >= 0`. Optional parameter polynomials
/// `p_i` turn the problem into `max λ` with `f - Σ λ_i p_i - λ` certified
/// nonnegative on the set and `λ_i >= param_floor`.
#[derive(Clone, Debug, PartialEq)]
pub struct Pop {
    pub n: usize,
    pub objective: Polynomial,
    pub constraints: Vec<Polynomial>,
    pub params: Vec<Polynomial>,
    pub param_floor: f64,
}

impl Pop {
    pub fn new(objective: Polynomial, constraints: Vec<Polynomial>) -> Result<Self, RelaxError> {
        let n = objective.nvars();
        if let Some(g) = constraints.iter().find(|g| g.nvars() != n) {
            return Err(RelaxError::VariableMismatch {
                expected: n,
                got: g.nvars(),
            });
        }
        Ok(Pop {
            n,
            objective,
            constraints,
            params: Vec::new(),
            param_floor: 0.0,
        })
    }

    pub fn unconstrained(objective: Polynomial) -> Self {
        Pop {
            n: objective.nvars(),
            objective,
            constraints: Vec::new(),
            params: Vec::new(),
            param_floor: 0.0,
        }
    }

    pub fn with_params(mut self, params: Vec<Polynomial>, floor: f64) -> Result<Self, RelaxError> {
        if let Some(p) = params.iter().find(|p| p.nvars() != self.n) {
            return Err(RelaxError::VariableMismatch {
                expected: self.n,
                got: p.nvars(),
            });
        }
        self.params = params;
        self.param_floor = floor;
        Ok(self)
    }

    /// `g_0 = 1` followed by the constraints.
    pub fn generators(&self) -> Vec<Polynomial> {
        let mut g = vec![Polynomial::constant(self.n, 1.0)];
        g.extend(self.constraints.iter().cloned());
        g
    }

    /// Smallest admissible relaxation order.
    pub fn minimum_order(&self) -> u32 {
        let mut all = self.constraints.clone();
        all.extend(self.params.iter().cloned());
        minimum_order(&self.objective, &all)
    }

    /// No constraints and no parameters.
    pub fn is_plain(&self) -> bool {
        self.constraints.is_empty() && self.params.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SparseOrder {
    Fixed(usize),
    Stabilize,
}

impl SparseOrder {
    fn k_max(self) -> usize {
        match self {
            SparseOrder::Fixed(k) => k,
            // Patterns grow monotonically, so this is never reached.
            SparseOrder::Stabilize => usize::MAX / 2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BasisChoice {
    Newton,
    Standard,
}

#[derive(Clone, Debug)]
pub struct RelaxOptions {
    pub sparse_order: SparseOrder,
    pub basis: BasisChoice,
    pub form: Form,
    /// Relaxation order `d̂`; defaults to the minimum. Ignored by plain
    /// unconstrained problems, which always use the Newton or standard
    /// half-degree basis.
    pub order: Option<u32>,
    pub solver: SolverConfig,
}

impl Default for RelaxOptions {
    fn default() -> Self {
        RelaxOptions {
            sparse_order: SparseOrder::Fixed(1),
            basis: BasisChoice::Newton,
            form: Form::Sos,
            order: None,
            solver: SolverConfig::default(),
        }
    }
}

/// Gram matrix of one block of generator `j`.
#[derive(Clone, Debug)]
pub struct GramBlock {
    pub j: usize,
    pub monomials: Vec<Exponent>,
    pub matrix: DMatrix<f64>,
}

#[derive(Clone, Debug)]
pub struct RelaxationResult {
    pub form: Form,
    /// Lower bound on the relaxation value certified by the solver: the
    /// attained `λ` in SOS form, the dual bound in moment form.
    pub bound: f64,
    /// Status with the moment problem taken as the primal.
    pub status: SolveStatus,
    pub k_used: usize,
    pub stabilized: bool,
    pub d_hat: Option<u32>,
    /// Per generator `j`: `(block size, count)`, largest first.
    pub block_stats: Vec<Vec<(usize, usize)>>,
    pub gram_blocks: Vec<GramBlock>,
    pub moment_vector: Option<BTreeMap<Exponent, f64>>,
    /// Parameter values `λ_i` for parametric problems.
    pub params: Vec<f64>,
    pub gap: f64,
    pub iterations: usize,
    pub message: String,
}

/// Unconstrained relaxation basis for `f`.
pub fn unconstrained_basis(f: &Polynomial, choice: BasisChoice) -> Result<MonomialBasis, RelaxError> {
    let n = f.nvars();
    match choice {
        BasisChoice::Newton => {
            let mut supp = f.support();
            supp.insert(Exponent::zero(n));
            let supp: Vec<Exponent> = supp.into_iter().collect();
            Ok(newton_half_basis_of_support(n, &supp)?)
        }
        BasisChoice::Standard => Ok(standard_basis(n, half_degree(f))?),
    }
}

/// `{0} ∪ supp(f)`.
pub fn sos_support(f: &Polynomial) -> BTreeSet<Exponent> {
    let mut a = f.support();
    a.insert(Exponent::zero(f.nvars()));
    a
}

/// Runs the unconstrained pattern iteration used by [`solve_unconstrained`].
pub fn unconstrained_patterns(
    f: &Polynomial,
    basis: &MonomialBasis,
    sparse_order: SparseOrder,
) -> Result<TspRun, RelaxError> {
    Ok(tsp::tsp_iterate_unconstrained(&sos_support(f), basis, sparse_order.k_max())?)
}

/// Runs the constrained pattern iteration used by [`solve_constrained`].
pub fn constrained_patterns(pop: &Pop, d_hat: u32, sparse_order: SparseOrder) -> Result<TspState, RelaxError> {
    let required = pop.minimum_order();
    if d_hat < required {
        return Err(TspError::OrderTooLow { d_hat, required }.into());
    }
    let mut state = TspState::new(&pop.objective, &pop.constraints, d_hat)?;
    state.add_initial_support(pop.params.iter().flat_map(|p| p.support()));
    Ok(tsp::iterate_from(state, sparse_order.k_max())?)
}

fn relaxation_status(form: Form, s: SolveStatus) -> SolveStatus {
    match (form, s) {
        (Form::Sos, SolveStatus::PrimalInfeasible) => SolveStatus::DualInfeasible,
        (Form::Sos, SolveStatus::DualInfeasible) => SolveStatus::PrimalInfeasible,
        _ => s,
    }
}

fn finish(
    problem: &SdpProblem,
    sol: SdpSolution,
    k_used: usize,
    stabilized: bool,
    d_hat: Option<u32>,
    block_stats: Vec<Vec<(usize, usize)>>,
    floor: f64,
) -> RelaxationResult {
    let form = problem.meta.form.unwrap_or(Form::Sos);
    let labels = &problem.meta.block_labels;
    let grams = match form {
        Form::Sos => &sol.block_values,
        Form::Moment => &sol.dual_blocks,
    };
    let gram_blocks = labels
        .iter()
        .zip(grams)
        .map(|(l, m)| GramBlock {
            j: l.j,
            monomials: l.monomials.clone(),
            matrix: m.clone(),
        })
        .collect();
    let params = sol.block_values[labels.len()..]
        .iter()
        .map(|t| floor + t[(0, 0)])
        .collect();
    let (bound, moment_vector) = match form {
        Form::Sos => (sol.primal_obj, None),
        Form::Moment => (
            -sol.dual_obj,
            Some(
                problem
                    .meta
                    .free_labels
                    .iter()
                    .cloned()
                    .zip(sol.free_values.iter().copied())
                    .collect(),
            ),
        ),
    };
    RelaxationResult {
        form,
        bound,
        status: relaxation_status(form, sol.status),
        k_used,
        stabilized,
        d_hat,
        block_stats,
        gram_blocks,
        moment_vector,
        params,
        gap: sol.gap(),
        iterations: sol.iterations,
        message: sol.message,
    }
}

/// `θ_k = sup{λ : f - λ ∈ Σ_k}` over the Newton (or standard) basis.
pub fn solve_unconstrained(f: &Polynomial, opts: &RelaxOptions) -> Result<RelaxationResult, RelaxError> {
    let basis = unconstrained_basis(f, opts.basis)?;
    let run = unconstrained_patterns(f, &basis, opts.sparse_order)?;
    let step = run.last();
    let problem = match opts.form {
        Form::Sos => assemble_unconstrained_sos(f, &step.partition, &basis)?,
        Form::Moment => assemble_unconstrained_moment(f, &step.pattern, &basis)?,
    };
    let sol = sdp::solve(&problem, &opts.solver)?;
    Ok(finish(
        &problem,
        sol,
        step.k,
        run.stabilized,
        None,
        vec![step.partition.block_table()],
        0.0,
    ))
}

/// `θ^(k)_d̂` for a constrained or parametric problem over standard bases.
pub fn solve_constrained(pop: &Pop, opts: &RelaxOptions) -> Result<RelaxationResult, RelaxError> {
    let d_hat = opts.order.unwrap_or_else(|| pop.minimum_order());
    let state = constrained_patterns(pop, d_hat, opts.sparse_order)?;
    let problem = match opts.form {
        Form::Sos => assemble_constrained_sos(pop, &state)?,
        Form::Moment => assemble_constrained_moment(pop, &state)?,
    };
    let sol = sdp::solve(&problem, &opts.solver)?;
    Ok(finish(
        &problem,
        sol,
        state.k,
        state.stabilized,
        Some(d_hat),
        state.partitions.iter().map(|p| p.block_table()).collect(),
        pop.param_floor,
    ))
}

/// Dispatches to [`solve_unconstrained`] for plain problems and to
/// [`solve_constrained`] otherwise.
pub fn solve_pop(pop: &Pop, opts: &RelaxOptions) -> Result<RelaxationResult, RelaxError> {
    if pop.is_plain() {
        solve_unconstrained(&pop.objective, opts)
    } else {
        solve_constrained(pop, opts)
    }
}

/// Solves the unconstrained problem with the all-ones pattern on `basis`.
pub fn solve_dense_unconstrained(
    f: &Polynomial,
    basis: &MonomialBasis,
    form: Form,
    solver: &SolverConfig,
) -> Result<RelaxationResult, RelaxError> {
    let full = tsp::BinaryPattern::full(basis.len());
    let (_, partition) = tsp::block_closure(&full);
    let problem = match form {
        Form::Sos => assemble_unconstrained_sos(f, &partition, basis)?,
        Form::Moment => assemble_unconstrained_moment(f, &full, basis)?,
    };
    let sol = sdp::solve(&problem, solver)?;
    Ok(finish(&problem, sol, 0, true, None, vec![partition.block_table()], 0.0))
}

/// Solves the constrained problem at order `d̂` with every pattern full.
pub fn solve_dense_constrained(
    pop: &Pop,
    d_hat: u32,
    form: Form,
    solver: &SolverConfig,
) -> Result<RelaxationResult, RelaxError> {
    let mut state = TspState::new(&pop.objective, &pop.constraints, d_hat)?;
    for j in 0..state.len() {
        let full = tsp::BinaryPattern::full(state.bases[j].len());
        let (p, part) = tsp::block_closure(&full);
        state.patterns[j] = p;
        state.partitions[j] = part;
    }
    let problem = match form {
        Form::Sos => assemble_constrained_sos(pop, &state)?,
        Form::Moment => assemble_constrained_moment(pop, &state)?,
    };
    let sol = sdp::solve(&problem, solver)?;
    Ok(finish(
        &problem,
        sol,
        0,
        true,
        Some(d_hat),
        state.partitions.iter().map(|p| p.block_table()).collect(),
        pop.param_floor,
    ))
}

/// Builds the SDP that [`solve_pop`] solves, without solving it.
pub fn build_problem(pop: &Pop, opts: &RelaxOptions) -> Result<SdpProblem, RelaxError> {
    if pop.is_plain() {
        let f = &pop.objective;
        let basis = unconstrained_basis(f, opts.basis)?;
        let run = unconstrained_patterns(f, &basis, opts.sparse_order)?;
        let step = run.last();
        match opts.form {
            Form::Sos => assemble_unconstrained_sos(f, &step.partition, &basis),
            Form::Moment => assemble_unconstrained_moment(f, &step.pattern, &basis),
        }
    } else {
        let d_hat = opts.order.unwrap_or_else(|| pop.minimum_order());
        let state = constrained_patterns(pop, d_hat, opts.sparse_order)?;
        match opts.form {
            Form::Sos => assemble_constrained_sos(pop, &state),
            Form::Moment => assemble_constrained_moment(pop, &state),
        }
    }
}
