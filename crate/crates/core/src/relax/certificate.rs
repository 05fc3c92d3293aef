//! Sparse Putinar certificates: extraction from a solved relaxation and
//! numerical verification by polynomial recomposition.

use nalgebra::DMatrix;

use crate::poly::{Exponent, Polynomial};
use crate::sdp::SolveStatus;
use crate::signsym::SignSymmetryBasis;

use super::{Pop, RelaxError, RelaxationResult};

#[derive(Clone, Debug)]
pub struct CertificateBlock {
    pub j: usize,
    pub monomials: Vec<Exponent>,
    pub gram: DMatrix<f64>,
}

/// `f - λ - Σ λ_i p_i = Σ_j g_j Σ_blocks v^T Q v` with `g_0 = 1`.
#[derive(Clone, Debug)]
pub struct Certificate {
    pub lambda: f64,
    pub blocks: Vec<CertificateBlock>,
    pub params: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyReport {
    pub max_residual: f64,
    pub min_eigenvalue: f64,
    pub passed: bool,
}

pub fn extract_certificate(result: &RelaxationResult, pop: &Pop) -> Result<Certificate, RelaxError> {
    if result.status != SolveStatus::Optimal {
        return Err(RelaxError::NotOptimal(result.status));
    }
    let blocks = result
        .gram_blocks
        .iter()
        .map(|g| CertificateBlock {
            j: g.j,
            monomials: g.monomials.clone(),
            gram: g.matrix.clone(),
        })
        .collect();
    debug_assert_eq!(result.params.len(), pop.params.len());
    Ok(Certificate {
        lambda: result.bound,
        blocks,
        params: result.params.clone(),
    })
}

/// Expands the certificate into `Σ_j g_j s_j + Σ λ_i p_i`.
pub fn recompose(cert: &Certificate, pop: &Pop) -> Result<Polynomial, RelaxError> {
    let n = pop.n;
    let generators = pop.generators();
    let mut total = Polynomial::zero(n);
    for (index, b) in cert.blocks.iter().enumerate() {
        let r = b.monomials.len();
        if b.gram.nrows() != r || b.gram.ncols() != r {
            return Err(RelaxError::GramShape {
                index,
                rows: b.gram.nrows(),
                cols: b.gram.ncols(),
                monomials: r,
            });
        }
        if let Some(m) = b.monomials.iter().find(|m| m.nvars() != n) {
            return Err(RelaxError::VariableMismatch {
                expected: n,
                got: m.nvars(),
            });
        }
        let g = generators.get(b.j).ok_or(RelaxError::StateMismatch)?;
        let mut s = Polynomial::zero(n);
        for a in 0..r {
            for c in 0..r {
                s.add_term(&b.monomials[a] + &b.monomials[c], b.gram[(a, c)]);
            }
        }
        total = &total + &(g * &s);
    }
    if cert.params.len() != pop.params.len() {
        return Err(RelaxError::StateMismatch);
    }
    for (lam, p) in cert.params.iter().zip(&pop.params) {
        total = &total + &p.scale(*lam);
    }
    Ok(total)
}

/// Compares the recomposed certificate with `f - λ`. Passes when every
/// coefficient matches within `tol` and every Gram eigenvalue (and every
/// parameter slack `λ_i - floor`) is at least `-tol`.
pub fn verify_certificate(cert: &Certificate, pop: &Pop, lambda: f64, tol: f64) -> Result<VerifyReport, RelaxError> {
    let lhs = recompose(cert, pop)?;
    let target = &pop.objective - &Polynomial::constant(pop.n, lambda);
    let diff = &lhs - &target;
    let max_residual = diff.max_abs_coeff();
    let mut min_eigenvalue = f64::INFINITY;
    for b in &cert.blocks {
        if b.gram.nrows() > 0 {
            let sym = (&b.gram + b.gram.transpose()) * 0.5;
            min_eigenvalue = min_eigenvalue.min(sym.symmetric_eigenvalues().min());
        }
    }
    for lam in &cert.params {
        min_eigenvalue = min_eigenvalue.min(lam - pop.param_floor);
    }
    Ok(VerifyReport {
        max_residual,
        min_eigenvalue,
        passed: max_residual <= tol && min_eigenvalue >= -tol,
    })
}

/// Whether every Gram support exponent `β + γ` (for `β, γ` in one block)
/// is annihilated by the sign symmetries.
pub fn certificate_support_ok(cert: &Certificate, r: &SignSymmetryBasis) -> bool {
    cert.blocks.iter().all(|b| {
        b.monomials
            .iter()
            .enumerate()
            .all(|(i, x)| b.monomials[i..].iter().all(|y| r.annihilates(&(x + y))))
    })
}
