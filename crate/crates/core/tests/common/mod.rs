#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use tssos::relax::Pop;
use tssos::sdp::{LinearForm, SdpProblem};
use tssos::{Exponent, MonomialBasis, Polynomial};

pub fn poly(text: &str, n: usize) -> Polynomial {
    Polynomial::parse(text, n).unwrap()
}

pub fn exp(e: &[u32]) -> Exponent {
    Exponent::new(e.to_vec())
}

/// `1 + x1⁴ + x2⁴ + x3⁴ + x1x2x3 + x2`.
pub fn unconstrained_example() -> Polynomial {
    poly("1+x1^4+x2^4+x3^4+x1*x2*x3+x2", 3)
}

/// `{1, x2, x1², x2², x1x3, x3², x1, x2x3, x3, x1x2}`.
pub fn unconstrained_example_basis() -> MonomialBasis {
    let order = [
        [0, 0, 0],
        [0, 1, 0],
        [2, 0, 0],
        [0, 2, 0],
        [1, 0, 1],
        [0, 0, 2],
        [1, 0, 0],
        [0, 1, 1],
        [0, 0, 1],
        [1, 1, 0],
    ];
    MonomialBasis::with_order(3, order.iter().map(|e| exp(e)).collect()).unwrap()
}

/// `min x1⁴ + x2⁴ - x1x2` over `1 - 2x1² - x2² >= 0`.
pub fn constrained_example() -> Pop {
    Pop::new(poly("x1^4+x2^4-x1*x2", 2), vec![poly("1-2*x1^2-x2^2", 2)]).unwrap()
}

/// `27 - ((x1-x2)² + (y1-y2)²)((x1-x3)² + (y1-y3)²)((x2-x3)² + (y2-y3)²)`
/// over the sphere `Σ x_i² + Σ y_i² = 3`, written as two inequalities.
/// Variables are ordered `x1, x2, x3, y1, y2, y3`.
pub fn sphere_example() -> Pop {
    let n = 6;
    let v = |i: usize| Polynomial::var(n, i);
    let sq = |a: usize, b: usize| {
        let d = &v(a) - &v(b);
        &d * &d
    };
    let p = &(&sq(0, 1) + &sq(3, 4)) * &(&(&sq(0, 2) + &sq(3, 5)) * &(&sq(1, 2) + &sq(4, 5)));
    let f = &Polynomial::constant(n, 27.0) - &p;
    let g = poly("x1^2+x2^2+x3^2+x4^2+x5^2+x6^2-3", n);
    Pop::new(f, vec![g.clone(), -&g]).unwrap()
}

pub fn random_sym(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let a = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    (&a + a.transpose()) * 0.5
}

/// Diagonal-only SDP: an LP `max c'x, Ax = b, x >= 0` over the diagonals.
pub struct DiagonalLp {
    pub problem: SdpProblem,
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    pub c: DVector<f64>,
}

pub fn random_diagonal_lp(rng: &mut ChaCha8Rng) -> DiagonalLp {
    let nblocks = rng.random_range(1..=3);
    let sizes: Vec<usize> = (0..nblocks).map(|_| rng.random_range(1..=8)).collect();
    let cells: Vec<(usize, usize)> = sizes
        .iter()
        .enumerate()
        .flat_map(|(b, &s)| (0..s).map(move |i| (b, i)))
        .take(12)
        .collect();
    let nv = cells.len();
    let m = rng.random_range(1..=3usize).min(nv);
    let mut a = DMatrix::zeros(m, nv);
    for v in 0..nv {
        a[(0, v)] = rng.random_range(0.5..2.0);
        for r in 1..m {
            a[(r, v)] = rng.random_range(-1.0..1.0);
        }
    }
    let x0 = DVector::from_fn(nv, |_, _| rng.random_range(0.1..1.0));
    let b = &a * &x0;
    let c = DVector::from_fn(nv, |_, _| rng.random_range(-1.0..1.0));
    let mut problem = SdpProblem::new(sizes, 0);
    for r in 0..m {
        let mut f = LinearForm::default();
        for (v, &(blk, i)) in cells.iter().enumerate() {
            f.add_entry(blk, i, i, a[(r, v)]);
        }
        problem.add_constraint(f, b[r]);
    }
    for (v, &(blk, i)) in cells.iter().enumerate() {
        problem.objective.add_entry(blk, i, i, c[v]);
    }
    DiagonalLp { problem, a, b, c }
}

fn subsets(len: usize, size: usize) -> Vec<Vec<usize>> {
    if size == 0 {
        return vec![vec![]];
    }
    if len < size {
        return vec![];
    }
    let mut out = subsets(len - 1, size);
    for mut s in subsets(len - 1, size - 1) {
        s.push(len - 1);
        out.push(s);
    }
    out
}

/// Best basic feasible solution by vertex enumeration.
pub fn lp_vertex_oracle(a: &DMatrix<f64>, b: &DVector<f64>, c: &DVector<f64>) -> f64 {
    let (m, n) = a.shape();
    let mut best = f64::NEG_INFINITY;
    for cols in subsets(n, m) {
        let sub = DMatrix::from_fn(m, m, |r, k| a[(r, cols[k])]);
        let Some(xb) = sub.lu().solve(b) else { continue };
        let check = DMatrix::from_fn(m, m, |r, k| a[(r, cols[k])]) * &xb - b;
        if check.norm() > 1e-9 || xb.iter().any(|&v| v < -1e-10) {
            continue;
        }
        let val: f64 = cols.iter().enumerate().map(|(k, &j)| c[j] * xb[k]).sum();
        best = best.max(val);
    }
    best
}

/// `max Σ <C_k, X_k>  s.t. Σ tr X_k = 1`, optimum `max_k λ_max(C_k)`.
pub fn eigen_max_problem(cs: &[DMatrix<f64>]) -> SdpProblem {
    let mut p = SdpProblem::new(cs.iter().map(|c| c.nrows()).collect(), 0);
    let mut tr = LinearForm::default();
    for (k, c) in cs.iter().enumerate() {
        for i in 0..c.nrows() {
            tr.add_entry(k, i, i, 1.0);
            for j in i..c.nrows() {
                p.objective.add_entry(k, i, j, c[(i, j)]);
            }
        }
    }
    p.add_constraint(tr, 1.0);
    p
}

/// `max t  s.t. X + tI = C`, optimum `λ_min(C)`.
pub fn eigen_min_problem(c: &DMatrix<f64>) -> SdpProblem {
    let n = c.nrows();
    let mut p = SdpProblem::new(vec![n], 1);
    for i in 0..n {
        for j in i..n {
            let mut f = LinearForm::default();
            f.add_entry(0, i, j, if i == j { 1.0 } else { 0.5 });
            if i == j {
                f.add_free(0, 1.0);
            }
            p.add_constraint(f, c[(i, j)]);
        }
    }
    p.objective.add_free(0, 1.0);
    p
}

/// Coefficients with full 53-bit mantissas and a spread of exponents.
fn awkward(rng: &mut ChaCha8Rng) -> f64 {
    let mantissa: f64 = rng.random_range(-1.0..1.0);
    mantissa * 10f64.powi(rng.random_range(-12..12))
}

pub fn random_problem(rng: &mut ChaCha8Rng) -> SdpProblem {
    let nblocks = rng.random_range(1..=4);
    let sizes: Vec<usize> = (0..nblocks).map(|_| rng.random_range(1..=6)).collect();
    let nfree = rng.random_range(0..=3);
    let mut p = SdpProblem::new(sizes.clone(), nfree);
    let m = rng.random_range(0..=8);
    let random_form = |rng: &mut ChaCha8Rng| {
        let mut f = LinearForm::default();
        for _ in 0..rng.random_range(1..=6) {
            let b = rng.random_range(0..sizes.len());
            let i = rng.random_range(0..sizes[b]);
            let j = rng.random_range(0..sizes[b]);
            f.add_entry(b, i, j, awkward(rng));
        }
        for k in 0..nfree {
            if rng.random_bool(0.5) {
                f.add_free(k, awkward(rng));
            }
        }
        f
    };
    for _ in 0..m {
        let f = random_form(rng);
        let rhs = awkward(rng);
        p.add_constraint(f, rhs);
    }
    p.objective = random_form(rng);
    p
}
