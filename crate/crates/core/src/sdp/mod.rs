//! Block-diagonal semidefinite programs and a primal-dual interior-point
//! solver.
//!
//! Problems are stated in maximize form over PSD blocks `X_b` and free
//! scalars `z`:
//!
//! ```text
//! maximize  <c, (X, z)>   s.t.  <a_i, (X, z)> = b_i,  X_b ⪰ 0
//! ```
//!
//! A linear form stores upper-triangle matrix entries; an off-diagonal entry
//! with coefficient `a` contributes `2 a X_ij` (it is the value of the
//! symmetric coefficient matrix at both `(i, j)` and `(j, i)`).

mod ipm;
mod presolve;
mod sdpa;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::poly::Exponent;

pub use ipm::InteriorPoint;
pub use sdpa::{export_sdpa, read_sdpa, write_sdpa, SdpaError};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixEntry {
    pub block: usize,
    pub i: usize,
    pub j: usize,
    pub coef: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LinearForm {
    pub entries: Vec<MatrixEntry>,
    pub free: Vec<(usize, f64)>,
}

impl LinearForm {
    /// Adds `coef` at `(i, j)`; the pair is normalized to `i <= j`.
    pub fn add_entry(&mut self, block: usize, i: usize, j: usize, coef: f64) {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        self.entries.push(MatrixEntry { block, i, j, coef });
    }

    pub fn add_free(&mut self, var: usize, coef: f64) {
        self.free.push((var, coef));
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty() && self.free.is_empty()
    }

    /// Evaluates the form at `(X, z)`.
    pub fn evaluate(&self, blocks: &[DMatrix<f64>], free: &[f64]) -> f64 {
        let mut v = 0.0;
        for e in &self.entries {
            let w = if e.i == e.j { 1.0 } else { 2.0 };
            v += w * e.coef * blocks[e.block][(e.i, e.j)];
        }
        for &(k, a) in &self.free {
            v += a * free[k];
        }
        v
    }

    /// Merges repeated positions and drops zero coefficients; entries end up
    /// sorted by `(block, i, j)` and free terms by index.
    pub fn canonical(&self) -> LinearForm {
        use std::collections::BTreeMap;
        let mut m: BTreeMap<(usize, usize, usize), f64> = BTreeMap::new();
        for e in &self.entries {
            *m.entry((e.block, e.i, e.j)).or_default() += e.coef;
        }
        let mut f: BTreeMap<usize, f64> = BTreeMap::new();
        for &(k, a) in &self.free {
            *f.entry(k).or_default() += a;
        }
        LinearForm {
            entries: m
                .into_iter()
                .filter(|(_, c)| *c != 0.0)
                .map(|((block, i, j), coef)| MatrixEntry { block, i, j, coef })
                .collect(),
            free: f.into_iter().filter(|(_, a)| *a != 0.0).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub form: LinearForm,
    pub rhs: f64,
}

/// Which relaxation a problem encodes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Form {
    Sos,
    Moment,
}

/// Where a PSD block came from: generator `j` and block index within its
/// partition, with the basis monomials indexing its rows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockLabel {
    pub j: usize,
    pub block: usize,
    pub monomials: Vec<Exponent>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ProblemMeta {
    pub form: Option<Form>,
    pub constraint_labels: Vec<Option<Exponent>>,
    pub block_labels: Vec<BlockLabel>,
    pub free_labels: Vec<Exponent>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SdpProblem {
    pub blocks: Vec<usize>,
    pub num_free: usize,
    pub constraints: Vec<Constraint>,
    pub objective: LinearForm,
    pub meta: ProblemMeta,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SdpError {
    #[error("{what} references block {block}, but there are {count} blocks")]
    BadBlock { what: String, block: usize, count: usize },
    #[error("{what} references entry ({i}, {j}) outside a block of size {size}")]
    BadEntry { what: String, i: usize, j: usize, size: usize },
    #[error("{what} references free variable {var}, but there are {count}")]
    BadFree { what: String, var: usize, count: usize },
    #[error("{what} contains a non-finite value")]
    NonFinite { what: String },
    #[error("block {0} has size zero")]
    EmptyBlock(usize),
}

impl SdpProblem {
    pub fn new(blocks: Vec<usize>, num_free: usize) -> Self {
        SdpProblem {
            blocks,
            num_free,
            ..Default::default()
        }
    }

    pub fn add_constraint(&mut self, form: LinearForm, rhs: f64) {
        self.constraints.push(Constraint { form, rhs });
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    /// Checks indices and finiteness. Entries are accepted with either
    /// `i <= j` or `i > j`; the solver normalizes them.
    pub fn validate(&self) -> Result<(), SdpError> {
        if let Some(b) = self.blocks.iter().position(|&s| s == 0) {
            return Err(SdpError::EmptyBlock(b));
        }
        let check = |what: String, form: &LinearForm| -> Result<(), SdpError> {
            for e in &form.entries {
                let Some(&size) = self.blocks.get(e.block) else {
                    return Err(SdpError::BadBlock {
                        what,
                        block: e.block,
                        count: self.blocks.len(),
                    });
                };
                if e.i >= size || e.j >= size {
                    return Err(SdpError::BadEntry {
                        what,
                        i: e.i,
                        j: e.j,
                        size,
                    });
                }
                if !e.coef.is_finite() {
                    return Err(SdpError::NonFinite { what });
                }
            }
            for &(k, a) in &form.free {
                if k >= self.num_free {
                    return Err(SdpError::BadFree {
                        what,
                        var: k,
                        count: self.num_free,
                    });
                }
                if !a.is_finite() {
                    return Err(SdpError::NonFinite { what });
                }
            }
            Ok(())
        };
        check("objective".to_string(), &self.objective)?;
        for (r, c) in self.constraints.iter().enumerate() {
            check(format!("constraint {r}"), &c.form)?;
            if !c.rhs.is_finite() {
                return Err(SdpError::NonFinite {
                    what: format!("constraint {r}"),
                });
            }
        }
        Ok(())
    }

    /// Maximum of `|<a_i, (X, z)> - b_i|` over constraints.
    pub fn max_residual(&self, blocks: &[DMatrix<f64>], free: &[f64]) -> f64 {
        self.constraints
            .iter()
            .map(|c| (c.form.evaluate(blocks, free) - c.rhs).abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub gap_tol: f64,
    pub feas_tol: f64,
    pub max_iter: usize,
    pub verbose: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            gap_tol: 1e-8,
            feas_tol: 1e-8,
            max_iter: 200,
            verbose: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    PrimalInfeasible,
    DualInfeasible,
    IterationLimit,
    NumericalFailure,
}

impl SolveStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::PrimalInfeasible => "primal_infeasible",
            SolveStatus::DualInfeasible => "dual_infeasible",
            SolveStatus::IterationLimit => "iteration_limit",
            SolveStatus::NumericalFailure => "numerical_failure",
        }
    }
}

impl std::fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Solver output in the problem's maximize sense: `primal_obj` is the value
/// attained by `(block_values, free_values)`, `dual_obj` the upper bound
/// certified by the dual iterate. `dual_blocks` holds the dual slack matrix
/// of each PSD block.
#[derive(Clone, Debug)]
pub struct SdpSolution {
    pub status: SolveStatus,
    pub primal_obj: f64,
    pub dual_obj: f64,
    pub block_values: Vec<DMatrix<f64>>,
    pub dual_blocks: Vec<DMatrix<f64>>,
    pub free_values: Vec<f64>,
    pub iterations: usize,
    pub message: String,
}

impl SdpSolution {
    pub fn gap(&self) -> f64 {
        (self.primal_obj - self.dual_obj).abs()
    }

    /// Midpoint of the primal and dual objectives.
    pub fn value(&self) -> f64 {
        0.5 * (self.primal_obj + self.dual_obj)
    }

    pub(crate) fn failed(status: SolveStatus, problem: &SdpProblem, iterations: usize, message: String) -> Self {
        SdpSolution {
            status,
            primal_obj: f64::NAN,
            dual_obj: f64::NAN,
            block_values: problem.blocks.iter().map(|&s| DMatrix::zeros(s, s)).collect(),
            dual_blocks: problem.blocks.iter().map(|&s| DMatrix::zeros(s, s)).collect(),
            free_values: vec![0.0; problem.num_free],
            iterations,
            message,
        }
    }
}

/// A solver for [`SdpProblem`]s.
pub trait SdpBackend {
    fn solve(&self, problem: &SdpProblem, config: &SolverConfig) -> Result<SdpSolution, SdpError>;
}

/// Solves with the built-in interior-point backend.
pub fn solve(problem: &SdpProblem, config: &SolverConfig) -> Result<SdpSolution, SdpError> {
    InteriorPoint.solve(problem, config)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validate_reports_bad_indices() {
        let mut p = SdpProblem::new(vec![2], 1);
        let mut f = LinearForm::default();
        f.add_entry(0, 0, 2, 1.0);
        p.add_constraint(f, 1.0);
        assert!(matches!(p.validate(), Err(SdpError::BadEntry { .. })));

        let mut p = SdpProblem::new(vec![2], 1);
        p.objective.add_free(3, 1.0);
        assert!(matches!(p.validate(), Err(SdpError::BadFree { .. })));
    }

    #[test]
    fn form_evaluation_weights_off_diagonal() {
        let mut f = LinearForm::default();
        f.add_entry(0, 1, 0, 0.5);
        f.add_entry(0, 1, 1, 2.0);
        f.add_free(0, 3.0);
        let x = DMatrix::from_row_slice(2, 2, &[1.0, 4.0, 4.0, 5.0]);
        assert_eq!(f.evaluate(&[x], &[2.0]), 4.0 + 10.0 + 6.0);
    }
}
