//! Infeasible primal-dual path-following method with the HKM direction and
//! Mehrotra predictor-corrector steps.
//!
//! After presolve the problem is the standard pair
//!
//! ```text
//! (P) min <C, X>  s.t. A(X) = b, X ⪰ 0
//! (D) max b'y     s.t. A*(y) + S = C, S ⪰ 0
//! ```
//!
//! with `C = -objective`.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use super::presolve::{presolve, Presolved, Reduced};
use super::{SdpBackend, SdpError, SdpProblem, SdpSolution, SolveStatus, SolverConfig};

const STEP_FRACTION: f64 = 0.99;
const RAY_TOL: f64 = 1e-8;
const REG_RETRIES: usize = 6;
const REFINE_STEPS: usize = 10;
const STALL_ITERS: usize = 8;

/// The built-in interior-point backend.
#[derive(Clone, Copy, Debug, Default)]
pub struct InteriorPoint;

impl SdpBackend for InteriorPoint {
    fn solve(&self, problem: &SdpProblem, config: &SolverConfig) -> Result<SdpSolution, SdpError> {
        problem.validate()?;
        let reduced = match presolve(problem) {
            Presolved::Reduced(r) => r,
            Presolved::Infeasible(msg) => {
                return Ok(SdpSolution::failed(SolveStatus::PrimalInfeasible, problem, 0, msg))
            }
            Presolved::Unbounded(msg) => {
                return Ok(SdpSolution::failed(SolveStatus::DualInfeasible, problem, 0, msg))
            }
        };
        let mut sol = Ipm::new(&reduced).run(config);
        sol.free_values = reduced.recover_free(&sol.block_values);
        Ok(sol)
    }
}

struct Best {
    merit: f64,
    gap: f64,
    pinf: f64,
    dinf: f64,
    iter: usize,
    x: Vec<DMatrix<f64>>,
    s: Vec<DMatrix<f64>>,
    y: DVector<f64>,
}

/// One constraint's entries in a block, expanded to both triangles.
struct BlockRow {
    row: usize,
    entries: Vec<(usize, usize, f64)>,
}

struct Ipm<'a> {
    red: &'a Reduced,
    m: usize,
    n_total: usize,
    by_block: Vec<Vec<BlockRow>>,
    c: Vec<DMatrix<f64>>,
    b: DVector<f64>,
}

fn inner(a: &[DMatrix<f64>], b: &[DMatrix<f64>]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.dot(y)).sum()
}

fn frob(a: &[DMatrix<f64>]) -> f64 {
    inner(a, a).sqrt()
}

fn sym(a: &DMatrix<f64>) -> DMatrix<f64> {
    (a + a.transpose()) * 0.5
}

fn chol(a: &DMatrix<f64>) -> Option<Cholesky<f64, Dyn>> {
    Cholesky::new(a.clone())
}

/// Solves `M d = r` with a possibly regularized factor of `M`, followed by
/// a few rounds of iterative refinement against `M` itself.
fn refined_solve(factor: &Cholesky<f64, Dyn>, mm: &DMatrix<f64>, rhs: &DVector<f64>) -> DVector<f64> {
    let mut d = factor.solve(rhs);
    let mut best = (rhs - mm * &d).norm();
    for _ in 0..REFINE_STEPS {
        if best <= 1e-15 * rhs.norm() {
            break;
        }
        let r = rhs - mm * &d;
        let cand = &d + factor.solve(&r);
        let res = (rhs - mm * &cand).norm();
        if res >= best {
            break;
        }
        d = cand;
        best = res;
    }
    d
}

/// Largest `α` with `X + α dX ⪰ 0`, or infinity.
fn max_step(x: &DMatrix<f64>, dx: &DMatrix<f64>) -> f64 {
    let Some(ch) = chol(x) else { return 0.0 };
    let l = ch.l();
    let Some(t) = l.solve_lower_triangular(dx) else {
        return 0.0;
    };
    let Some(t) = l.solve_lower_triangular(&t.transpose()) else {
        return 0.0;
    };
    let lam = sym(&t).symmetric_eigenvalues().min();
    if lam >= 0.0 {
        f64::INFINITY
    } else {
        -1.0 / lam
    }
}

fn step_length(xs: &[DMatrix<f64>], dxs: &[DMatrix<f64>]) -> f64 {
    let a = xs
        .iter()
        .zip(dxs)
        .map(|(x, dx)| max_step(x, dx))
        .fold(f64::INFINITY, f64::min);
    (STEP_FRACTION * a).min(1.0)
}

fn axpy(x: &[DMatrix<f64>], alpha: f64, dx: &[DMatrix<f64>]) -> Vec<DMatrix<f64>> {
    x.iter().zip(dx).map(|(a, d)| a + d * alpha).collect()
}

fn all_pd(xs: &[DMatrix<f64>]) -> bool {
    xs.iter().all(|x| chol(x).is_some())
}

impl<'a> Ipm<'a> {
    fn new(red: &'a Reduced) -> Self {
        let m = red.rows.len();
        let mut by_block: Vec<Vec<BlockRow>> = red.blocks.iter().map(|_| Vec::new()).collect();
        for (r, row) in red.rows.iter().enumerate() {
            for e in row {
                let list = &mut by_block[e.block];
                if list.last().map(|br| br.row) != Some(r) {
                    list.push(BlockRow {
                        row: r,
                        entries: Vec::new(),
                    });
                }
                let br = list.last_mut().unwrap();
                br.entries.push((e.i, e.j, e.coef));
                if e.i != e.j {
                    br.entries.push((e.j, e.i, e.coef));
                }
            }
        }
        let mut c: Vec<DMatrix<f64>> = red.blocks.iter().map(|&s| DMatrix::zeros(s, s)).collect();
        for e in &red.objective {
            c[e.block][(e.i, e.j)] -= e.coef;
            if e.i != e.j {
                c[e.block][(e.j, e.i)] -= e.coef;
            }
        }
        Ipm {
            red,
            m,
            n_total: red.blocks.iter().sum(),
            by_block,
            c,
            b: DVector::from_vec(red.rhs.clone()),
        }
    }

    /// `A(Y)` for symmetric `Y`.
    fn apply_a(&self, y: &[DMatrix<f64>]) -> DVector<f64> {
        let mut out = DVector::zeros(self.m);
        for (r, row) in self.red.rows.iter().enumerate() {
            let mut v = 0.0;
            for e in row {
                let w = if e.i == e.j { 1.0 } else { 2.0 };
                v += w * e.coef * y[e.block][(e.i, e.j)];
            }
            out[r] = v;
        }
        out
    }

    /// `A*(y) = Σ y_i A_i`.
    fn apply_at(&self, y: &DVector<f64>) -> Vec<DMatrix<f64>> {
        let mut out: Vec<DMatrix<f64>> = self.red.blocks.iter().map(|&s| DMatrix::zeros(s, s)).collect();
        for (r, row) in self.red.rows.iter().enumerate() {
            let yr = y[r];
            if yr == 0.0 {
                continue;
            }
            for e in row {
                out[e.block][(e.i, e.j)] += yr * e.coef;
                if e.i != e.j {
                    out[e.block][(e.j, e.i)] += yr * e.coef;
                }
            }
        }
        out
    }

    /// Schur complement `M_ij = trace(A_i X A_j Z)` with `Z = S^{-1}`.
    fn schur(&self, x: &[DMatrix<f64>], z: &[DMatrix<f64>]) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.m, self.m);
        for (bi, rows) in self.by_block.iter().enumerate() {
            let (xb, zb) = (&x[bi], &z[bi]);
            for (ia, ra) in rows.iter().enumerate() {
                for rb in &rows[ia..] {
                    let mut s = 0.0;
                    for &(p, q, a) in &ra.entries {
                        for &(r, t, c) in &rb.entries {
                            s += a * c * xb[(q, r)] * zb[(t, p)];
                        }
                    }
                    m[(ra.row, rb.row)] += s;
                }
            }
        }
        // Only the upper triangle was accumulated.
        for i in 0..self.m {
            for j in 0..i {
                m[(i, j)] = m[(j, i)];
            }
        }
        m
    }

    fn initial_point(&self) -> (Vec<DMatrix<f64>>, Vec<DMatrix<f64>>) {
        let mut row_norms = vec![0.0f64; self.m];
        for (r, row) in self.red.rows.iter().enumerate() {
            row_norms[r] = row
                .iter()
                .map(|e| if e.i == e.j { e.coef * e.coef } else { 2.0 * e.coef * e.coef })
                .sum::<f64>()
                .sqrt();
        }
        let mut xs = Vec::new();
        let mut ss = Vec::new();
        for (bi, &size) in self.red.blocks.iter().enumerate() {
            let n = size as f64;
            let mut xi: f64 = 1.0f64.max(n.sqrt());
            let mut eta: f64 = 1.0f64.max(n.sqrt()).max(self.c[bi].norm());
            for br in &self.by_block[bi] {
                let norm = br.entries.iter().map(|e| e.2 * e.2).sum::<f64>().sqrt();
                xi = xi.max(n * (1.0 + self.b[br.row].abs()) / (1.0 + norm));
                eta = eta.max(norm).max(row_norms[br.row]);
            }
            xs.push(DMatrix::identity(size, size) * xi);
            ss.push(DMatrix::identity(size, size) * eta);
        }
        (xs, ss)
    }

    fn run(&self, config: &SolverConfig) -> SdpSolution {
        let offset = self.red.offset;
        let b_norm = self.b.norm();
        let c_norm = frob(&self.c);
        let (mut x, mut s) = self.initial_point();
        let mut y = DVector::zeros(self.m);

        let finish = |status: SolveStatus,
                      x: Vec<DMatrix<f64>>,
                      s: Vec<DMatrix<f64>>,
                      y: &DVector<f64>,
                      iterations: usize,
                      message: String| {
            let pobj = inner(&self.c, &x);
            let dobj = self.b.dot(y);
            SdpSolution {
                status,
                primal_obj: offset - pobj,
                dual_obj: offset - dobj,
                block_values: x,
                dual_blocks: s,
                free_values: Vec::new(),
                iterations,
                message,
            }
        };

        // Failure exits report the iterate with the smallest merit seen.
        let mut best: Option<Best> = None;
        let fail = |status: SolveStatus,
                    x: Vec<DMatrix<f64>>,
                    s: Vec<DMatrix<f64>>,
                    y: DVector<f64>,
                    merit: f64,
                    iterations: usize,
                    message: String,
                    best: Option<Best>| {
            match best {
                Some(b) if b.merit < merit => finish(
                    status,
                    b.x,
                    b.s,
                    &b.y,
                    iterations,
                    format!("{message}; returning iterate {} (gap {:.2e}, pinf {:.2e}, dinf {:.2e})", b.iter, b.gap, b.pinf, b.dinf),
                ),
                _ => finish(status, x, s, &y, iterations, message),
            }
        };

        if self.n_total == 0 {
            return finish(SolveStatus::Optimal, x, s, &y, 0, "no matrix variables".into());
        }

        let mut last_merit = f64::INFINITY;
        for iter in 0..config.max_iter {
            let ax = self.apply_a(&x);
            let rp = &self.b - &ax;
            let aty = self.apply_at(&y);
            let rd: Vec<DMatrix<f64>> = (0..x.len()).map(|k| &self.c[k] - &aty[k] - &s[k]).collect();
            let pobj = inner(&self.c, &x);
            let dobj = self.b.dot(&y);
            let mu = inner(&x, &s) / self.n_total as f64;
            let pinf = rp.norm() / (1.0 + b_norm);
            let dinf = frob(&rd) / (1.0 + c_norm);
            let (pmax, dmax) = (offset - pobj, offset - dobj);
            if config.verbose {
                eprintln!(
                    "iter {iter:3}  pobj {pmax:+.8e}  dobj {dmax:+.8e}  pinf {pinf:.2e}  dinf {dinf:.2e}  mu {mu:.2e}  |X| {:.2e}  |S| {:.2e}",
                    frob(&x),
                    frob(&s)
                );
            }
            if (pmax - dmax).abs() <= config.gap_tol * (1.0 + pmax.abs())
                && pinf <= config.feas_tol
                && dinf <= config.feas_tol
            {
                return finish(SolveStatus::Optimal, x, s, &y, iter, "converged".into());
            }
            let gap = (pmax - dmax).abs() / (1.0 + pmax.abs());
            let merit = gap.max(pinf).max(dinf);
            if best.as_ref().is_none_or(|b| merit < b.merit) {
                best = Some(Best {
                    merit,
                    gap,
                    pinf,
                    dinf,
                    iter,
                    x: x.clone(),
                    s: s.clone(),
                    y: y.clone(),
                });
            } else if best
                .as_ref()
                .is_some_and(|b| iter - b.iter >= STALL_ITERS && b.merit <= config.gap_tol.sqrt())
            {
                return fail(
                    SolveStatus::NumericalFailure,
                    x,
                    s,
                    y,
                    merit,
                    iter,
                    format!("no progress for {STALL_ITERS} iterations"),
                    best,
                );
            }
            last_merit = merit;
            // Diverging dual ray: A*(y) ⪯ 0 with b'y > 0.
            let ray_d = frob(&aty.iter().zip(&s).map(|(a, b)| a + b).collect::<Vec<_>>());
            if dobj > 0.0 && y.norm() > 1e6 * (1.0 + c_norm) && ray_d <= RAY_TOL * dobj {
                return finish(
                    SolveStatus::PrimalInfeasible,
                    x,
                    s,
                    &y,
                    iter,
                    format!("dual ray with b'y = {dobj:.3e}"),
                );
            }
            // Diverging primal ray: A(X) = 0, <C, X> < 0.
            if pobj < 0.0 && frob(&x) > 1e6 * (1.0 + b_norm) && ax.norm() <= RAY_TOL * -pobj {
                return finish(
                    SolveStatus::DualInfeasible,
                    x,
                    s,
                    &y,
                    iter,
                    format!("primal ray with <C,X> = {pobj:.3e}"),
                );
            }

            let mut z = Vec::with_capacity(s.len());
            for sb in &s {
                match chol(sb) {
                    Some(ch) => z.push(ch.inverse()),
                    None => {
                        return fail(
                            SolveStatus::NumericalFailure,
                            x,
                            s,
                            y,
                            last_merit,
                            iter,
                            format!("dual slack lost definiteness at iteration {iter}"),
                            best,
                        )
                    }
                }
            }
            let mm = self.schur(&x, &z);
            let Some(factor) = self.factor_schur(mm.clone()) else {
                return fail(
                    SolveStatus::NumericalFailure,
                    x,
                    s,
                    y,
                    last_merit,
                    iter,
                    format!("Schur complement factorization failed at iteration {iter}"),
                    best,
                );
            };
            // A(sym(X Rd Z)) is shared by both directions.
            let xrdz: Vec<DMatrix<f64>> = (0..x.len()).map(|k| sym(&(&x[k] * &rd[k] * &z[k]))).collect();
            let base_rhs = &rp + self.apply_a(&xrdz);

            let direction = |rcz: &[DMatrix<f64>]| {
                let rhs = &base_rhs - self.apply_a(rcz);
                let dy = if self.m == 0 { DVector::zeros(0) } else { refined_solve(&factor, &mm, &rhs) };
                let atdy = self.apply_at(&dy);
                let ds: Vec<DMatrix<f64>> = (0..x.len()).map(|k| &rd[k] - &atdy[k]).collect();
                let dx: Vec<DMatrix<f64>> = (0..x.len())
                    .map(|k| sym(&(&rcz[k] - &x[k] * &ds[k] * &z[k])))
                    .collect();
                (dx, dy, ds)
            };

            // Predictor: Rc = -XS, so Rc Z = -X.
            let rcz: Vec<DMatrix<f64>> = x.iter().map(|xb| -xb).collect();
            let (dxa, _, dsa) = direction(&rcz);
            let ap = step_length(&x, &dxa);
            let ad = step_length(&s, &dsa);
            let mu_aff = inner(&axpy(&x, ap, &dxa), &axpy(&s, ad, &dsa)) / self.n_total as f64;
            let sigma = if mu > 0.0 { (mu_aff / mu).clamp(0.0, 1.0).powi(3) } else { 0.0 };

            // Corrector: Rc = σμI - XS - dXa dSa.
            let rcz: Vec<DMatrix<f64>> = (0..x.len())
                .map(|k| sym(&(&z[k] * (sigma * mu) - &x[k] - &dxa[k] * &dsa[k] * &z[k])))
                .collect();
            let (dx, dy, ds) = direction(&rcz);
            // A common step keeps the iterates centered when one side of the
            // optimal face is unbounded.
            let mut ap = step_length(&x, &dx).min(step_length(&s, &ds));
            let mut ad = ap;

            let mut x_new = axpy(&x, ap, &dx);
            let mut tries = 0;
            while !all_pd(&x_new) && tries < 30 {
                ap *= 0.8;
                x_new = axpy(&x, ap, &dx);
                tries += 1;
            }
            let mut s_new = axpy(&s, ad, &ds);
            tries = 0;
            while !all_pd(&s_new) && tries < 30 {
                ad *= 0.8;
                s_new = axpy(&s, ad, &ds);
                tries += 1;
            }
            if !all_pd(&x_new) || !all_pd(&s_new) {
                return fail(
                    SolveStatus::NumericalFailure,
                    x,
                    s,
                    y,
                    last_merit,
                    iter,
                    format!("no positive definite step at iteration {iter}"),
                    best,
                );
            }
            x = x_new;
            s = s_new;
            y += dy * ad;
        }
        let iters = config.max_iter;
        fail(
            SolveStatus::IterationLimit,
            x,
            s,
            y,
            last_merit,
            iters,
            format!("stopped after {iters} iterations"),
            best,
        )
    }

    fn factor_schur(&self, mut mm: DMatrix<f64>) -> Option<Cholesky<f64, Dyn>> {
        if self.m == 0 {
            return Cholesky::new(DMatrix::zeros(0, 0));
        }
        if let Some(f) = chol(&mm) {
            return Some(f);
        }
        let scale = (0..self.m).map(|i| mm[(i, i)].abs()).fold(0.0, f64::max).max(1e-300);
        let mut delta = 1e-14 * scale;
        for _ in 0..REG_RETRIES {
            for i in 0..self.m {
                mm[(i, i)] += delta;
            }
            if let Some(f) = chol(&mm) {
                return Some(f);
            }
            delta *= 100.0;
        }
        None
    }
}
