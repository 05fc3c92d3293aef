//! Phase-1 dense simplex for convex-hull membership.

/// Feasibility threshold on the phase-1 objective.
pub const FEAS_TOL: f64 = 1e-8;

const PIVOT_TOL: f64 = 1e-11;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpFailure {
    IterationLimit,
}

/// Decides whether `target` is a convex combination of `points`, i.e. whether
/// `λ ≥ 0, Σλ = 1, Σ λ_i p_i = target` is feasible.
pub fn in_convex_hull(points: &[Vec<f64>], target: &[f64]) -> Result<bool, LpFailure> {
    if points.is_empty() {
        return Ok(false);
    }
    let dim = target.len();
    let m = dim + 1;
    let s = points.len();
    // Columns: s structural, m artificial, then rhs.
    let width = s + m + 1;
    let rhs_col = s + m;
    let mut tab = vec![vec![0.0; width]; m + 1];
    for (r, row) in tab.iter_mut().take(m).enumerate() {
        let row_rhs = if r == 0 { 1.0 } else { target[r - 1] };
        let sign = if row_rhs < 0.0 { -1.0 } else { 1.0 };
        for (i, cell) in row.iter_mut().take(s).enumerate() {
            let a = if r == 0 { 1.0 } else { points[i][r - 1] };
            *cell = sign * a;
        }
        row[s + r] = 1.0;
        row[rhs_col] = sign * row_rhs;
    }
    // Phase-1 objective row: minimize the sum of artificials, stored as
    // reduced costs after pricing out the artificial basis.
    for c in 0..width {
        if (s..s + m).contains(&c) {
            continue;
        }
        let total: f64 = (0..m).map(|r| tab[r][c]).sum();
        tab[m][c] = -total;
    }
    let mut basis: Vec<usize> = (s..s + m).collect();

    let max_iter = 50 * (s + m) + 1000;
    for _ in 0..max_iter {
        // Bland's rule: lowest-index column with negative reduced cost.
        let entering = (0..s + m).find(|&c| tab[m][c] < -PIVOT_TOL);
        let Some(col) = entering else {
            let infeas = -tab[m][rhs_col];
            return Ok(infeas <= FEAS_TOL);
        };
        let mut leave: Option<(usize, f64)> = None;
        for r in 0..m {
            let a = tab[r][col];
            if a > PIVOT_TOL {
                let ratio = tab[r][rhs_col] / a;
                match leave {
                    None => leave = Some((r, ratio)),
                    Some((lr, best)) => {
                        if ratio < best - 1e-14 || (ratio <= best + 1e-14 && basis[r] < basis[lr]) {
                            leave = Some((r, ratio));
                        }
                    }
                }
            }
        }
        let Some((row, _)) = leave else {
            // Phase-1 objective is bounded below by 0, so this cannot happen
            // with exact arithmetic; treat as converged.
            let infeas = -tab[m][rhs_col];
            return Ok(infeas <= FEAS_TOL);
        };
        pivot(&mut tab, row, col);
        basis[row] = col;
    }
    Err(LpFailure::IterationLimit)
}

fn pivot(tab: &mut [Vec<f64>], row: usize, col: usize) {
    let p = tab[row][col];
    for v in tab[row].iter_mut() {
        *v /= p;
    }
    let pivot_row = tab[row].clone();
    for (r, line) in tab.iter_mut().enumerate() {
        if r == row {
            continue;
        }
        let factor = line[col];
        if factor != 0.0 {
            for (v, pv) in line.iter_mut().zip(&pivot_row) {
                *v -= factor * pv;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_membership() {
        let pts = vec![vec![0.0, 0.0], vec![2.0, 0.0], vec![0.0, 2.0], vec![2.0, 2.0]];
        assert!(in_convex_hull(&pts, &[1.0, 1.0]).unwrap());
        assert!(in_convex_hull(&pts, &[2.0, 0.0]).unwrap());
        assert!(!in_convex_hull(&pts, &[2.5, 1.0]).unwrap());
    }

    #[test]
    fn degenerate_segment() {
        let pts = vec![vec![0.0, 0.0], vec![4.0, 4.0]];
        assert!(in_convex_hull(&pts, &[2.0, 2.0]).unwrap());
        assert!(!in_convex_hull(&pts, &[2.0, 1.0]).unwrap());
    }
}
