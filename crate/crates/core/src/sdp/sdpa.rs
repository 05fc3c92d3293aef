//! SDPA sparse format (`.dat-s`).
//!
//! A problem `max <c, X> s.t. <a_i, X> = b_i` is written as the SDPA dual
//! `max <F0, Y> s.t. <F_i, Y> = c_i`, so matrix 0 holds the objective and
//! matrix `i` holds constraint `i`. Free scalars `z_k` are split as
//! `z_k = u - v` with `u, v >= 0` and stored in a final diagonal block of
//! size `-2p`: `+a` at position `2k+1` and `-a` at `2k+2`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use super::{LinearForm, SdpProblem};

#[derive(Debug, Error)]
pub enum SdpaError {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

fn parse_err(line: usize, msg: impl Into<String>) -> SdpaError {
    SdpaError::Parse {
        line,
        msg: msg.into(),
    }
}

/// Renders `problem` in SDPA sparse format. Entries are merged, sorted by
/// `(matno, blkno, i, j)` and printed with 17 significant digits.
pub fn write_sdpa(problem: &SdpProblem) -> String {
    let mut out = String::new();
    let p = problem.num_free;
    let mut sizes: Vec<String> = problem.blocks.iter().map(|s| s.to_string()).collect();
    if p > 0 {
        sizes.push(format!("-{}", 2 * p));
    }
    let free_block = problem.blocks.len() + 1;
    let _ = writeln!(out, "{}", problem.constraints.len());
    let _ = writeln!(out, "{}", sizes.len());
    let _ = writeln!(out, "{}", sizes.join(" "));
    let rhs: Vec<String> = problem.constraints.iter().map(|c| format!("{:.16e}", c.rhs)).collect();
    let _ = writeln!(out, "{}", rhs.join(" "));

    let forms = std::iter::once(&problem.objective).chain(problem.constraints.iter().map(|c| &c.form));
    for (matno, form) in forms.enumerate() {
        let form = form.canonical();
        let mut lines: BTreeMap<(usize, usize, usize), f64> = BTreeMap::new();
        for e in &form.entries {
            lines.insert((e.block + 1, e.i + 1, e.j + 1), e.coef);
        }
        for &(k, a) in &form.free {
            lines.insert((free_block, 2 * k + 1, 2 * k + 1), a);
            lines.insert((free_block, 2 * k + 2, 2 * k + 2), -a);
        }
        for ((blk, i, j), v) in lines {
            let _ = writeln!(out, "{matno} {blk} {i} {j} {v:.16e}");
        }
    }
    out
}

pub fn export_sdpa(problem: &SdpProblem, path: &Path) -> Result<(), SdpaError> {
    std::fs::write(path, write_sdpa(problem))?;
    Ok(())
}

/// Parses SDPA sparse text. A final negative-size block whose entries come
/// in `(+a, -a)` pairs on positions `(2k+1, 2k+2)` is read back as free
/// variables; any other negative-size block becomes an ordinary block.
pub fn read_sdpa(text: &str) -> Result<SdpProblem, SdpaError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('"') && !l.starts_with('*'));
    let clean = |l: &str| -> String {
        l.chars()
            .map(|c| if "{}(),".contains(c) { ' ' } else { c })
            .collect()
    };
    let mut next = |what: &str| {
        lines
            .next()
            .map(|(n, l)| (n, clean(l)))
            .ok_or_else(|| parse_err(0, format!("missing {what}")))
    };

    let (ln, l) = next("constraint count")?;
    let m: usize = l
        .split_whitespace()
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| parse_err(ln, "expected constraint count"))?;
    let (ln, l) = next("block count")?;
    let nblocks: usize = l
        .split_whitespace()
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| parse_err(ln, "expected block count"))?;
    let (ln, l) = next("block sizes")?;
    let sizes: Vec<i64> = l
        .split_whitespace()
        .take(nblocks)
        .map(|t| t.parse().map_err(|_| parse_err(ln, format!("bad block size {t:?}"))))
        .collect::<Result<_, _>>()?;
    if sizes.len() != nblocks || sizes.contains(&0) {
        return Err(parse_err(ln, "block sizes do not match the block count"));
    }
    let rhs: Vec<f64> = if m == 0 {
        // The right-hand-side line may be empty and thus filtered out.
        Vec::new()
    } else {
        let (ln, l) = next("right-hand side")?;
        let v: Vec<f64> = l
            .split_whitespace()
            .take(m)
            .map(|t| t.parse().map_err(|_| parse_err(ln, format!("bad number {t:?}"))))
            .collect::<Result<_, _>>()?;
        if v.len() != m {
            return Err(parse_err(ln, "too few right-hand-side values"));
        }
        v
    };

    let mut raw: Vec<(usize, usize, usize, usize, f64)> = Vec::new();
    for (ln, l) in lines {
        let l = clean(l);
        let t: Vec<&str> = l.split_whitespace().collect();
        if t.len() < 5 {
            return Err(parse_err(ln, "expected `matno blkno i j value`"));
        }
        let idx = |s: &str| s.parse::<usize>().map_err(|_| parse_err(ln, format!("bad index {s:?}")));
        let (mat, blk, i, j) = (idx(t[0])?, idx(t[1])?, idx(t[2])?, idx(t[3])?);
        let v: f64 = t[4].parse().map_err(|_| parse_err(ln, format!("bad value {:?}", t[4])))?;
        if mat > m || blk == 0 || blk > nblocks {
            return Err(parse_err(ln, "matrix or block number out of range"));
        }
        let size = sizes[blk - 1].unsigned_abs() as usize;
        if i == 0 || j == 0 || i > size || j > size {
            return Err(parse_err(ln, "entry index out of range"));
        }
        if sizes[blk - 1] < 0 && i != j {
            return Err(parse_err(ln, "off-diagonal entry in a diagonal block"));
        }
        raw.push((mat, blk - 1, i - 1, j - 1, v));
    }

    let last = nblocks.checked_sub(1);
    let free_pairs = last.and_then(|lb| {
        let size = sizes[lb];
        if size >= 0 || size % 2 != 0 {
            return None;
        }
        let mut vals: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for &(mat, blk, i, _, v) in &raw {
            if blk == lb {
                *vals.entry((mat, i)).or_default() += v;
            }
        }
        let paired = vals.iter().all(|(&(mat, i), &v)| {
            let partner = if i % 2 == 0 { i + 1 } else { i - 1 };
            vals.get(&(mat, partner)).copied().unwrap_or(0.0) == -v
        });
        paired.then_some((lb, size.unsigned_abs() as usize / 2))
    });

    let (nmat_blocks, num_free) = match free_pairs {
        Some((lb, p)) => (lb, p),
        None => (nblocks, 0),
    };
    let blocks: Vec<usize> = sizes[..nmat_blocks].iter().map(|s| s.unsigned_abs() as usize).collect();
    let mut forms: Vec<LinearForm> = vec![LinearForm::default(); m + 1];
    for (mat, blk, i, j, v) in raw {
        if blk < nmat_blocks {
            forms[mat].add_entry(blk, i, j, v);
        } else if i % 2 == 0 {
            forms[mat].add_free(i / 2, v);
        }
    }
    let mut forms = forms.into_iter();
    let mut problem = SdpProblem::new(blocks, num_free);
    problem.objective = forms.next().unwrap().canonical();
    for (form, b) in forms.zip(rhs) {
        problem.add_constraint(form.canonical(), b);
    }
    Ok(problem)
}
