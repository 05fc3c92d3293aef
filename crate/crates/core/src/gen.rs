//! Seeded benchmark families: random SOS and coercive polynomials, the
//! Broyden banded function and two networked-system Lyapunov problems.
//!
//! All randomness comes from `ChaCha8Rng::seed_from_u64(seed)`, so a given
//! spec produces the same polynomial on every platform.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::basis::{standard_basis, BasisError};
use crate::poly::{Exponent, Polynomial};
use crate::relax::{Pop, RelaxError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GenError {
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("no monomial was sampled after two attempts")]
    EmptySample,
    #[error("requested {requested} distinct exponents but only {available} exist")]
    TooManyTerms { requested: usize, available: usize },
    #[error(transparent)]
    Basis(#[from] BasisError),
    #[error(transparent)]
    Relax(#[from] RelaxError),
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn coef(rng: &mut ChaCha8Rng) -> f64 {
    rng.random_range(-1.0..=1.0)
}

/// Uniform on `(0, 1]`.
fn positive(rng: &mut ChaCha8Rng) -> f64 {
    1.0 - rng.random::<f64>()
}

fn check_even(two_d: u32) -> Result<(), GenError> {
    if two_d == 0 || two_d % 2 != 0 {
        return Err(GenError::InvalidParam(format!("degree {two_d} must be positive and even")));
    }
    Ok(())
}

/// `Σ_{i=1}^t f_i²` where each monomial of `N^n_d` is kept with
/// probability `p` and assigned to a uniformly chosen `f_i` with a
/// coefficient uniform on `[-1, 1]`.
pub fn randpoly1(n: usize, two_d: u32, t: usize, p: f64, seed: u64) -> Result<Polynomial, GenError> {
    check_even(two_d)?;
    if !(p > 0.0 && p <= 1.0) {
        return Err(GenError::InvalidParam(format!("probability {p} is not in (0, 1]")));
    }
    if t == 0 {
        return Err(GenError::InvalidParam("need at least one square".into()));
    }
    let basis = standard_basis(n, two_d / 2)?;
    let mut rng = rng(seed);
    let mut chosen: Vec<Exponent> = Vec::new();
    for _ in 0..2 {
        chosen = basis.iter().filter(|_| rng.random_bool(p)).cloned().collect();
        if !chosen.is_empty() {
            break;
        }
    }
    if chosen.is_empty() {
        return Err(GenError::EmptySample);
    }
    let mut parts = vec![Polynomial::zero(n); t];
    for e in chosen {
        let i = rng.random_range(0..t);
        let c = coef(&mut rng);
        parts[i].add_term(e, c);
    }
    Ok(parts
        .iter()
        .fold(Polynomial::zero(n), |acc, fi| &acc + &(fi * fi)))
}

/// `c_0 + Σ c_i x_i^{2d} + Σ_{j=1}^{s-n-1} c'_j x^{α_j}` with `c_0, c_i`
/// uniform on `(0, 1]`, `α_j` distinct in `N^n_{2d-1} \ {0}` and `c'_j`
/// uniform on `[-1, 1]`.
pub fn randpoly2(n: usize, two_d: u32, s: usize, seed: u64) -> Result<Polynomial, GenError> {
    check_even(two_d)?;
    if s < n + 1 {
        return Err(GenError::InvalidParam(format!("s = {s} must be at least n + 1 = {}", n + 1)));
    }
    let mut rng = rng(seed);
    let mut f = Polynomial::constant(n, positive(&mut rng));
    for i in 0..n {
        let c = positive(&mut rng);
        f.add_term(Exponent::unit(n, i).scaled(two_d), c);
    }
    let pool = standard_basis(n, two_d - 1)?;
    let available = pool.len() - 1;
    let requested = s - n - 1;
    if requested > available {
        return Err(GenError::TooManyTerms { requested, available });
    }
    // Index 0 of the pool is the constant monomial.
    for idx in sample(&mut rng, available, requested) {
        let c = coef(&mut rng);
        f.add_term(pool.get(idx + 1).clone(), c);
    }
    Ok(f)
}

/// `Σ_i (x_i(2 + 5x_i²) + 1 - Σ_{j∈J_i} (1 + x_j)x_j)²` with
/// `J_i = {j ≠ i : max(1, i-5) <= j <= min(n, i+1)}`.
pub fn broyden_banded(n: usize) -> Polynomial {
    let x = |i: usize| Polynomial::var(n, i);
    let one = Polynomial::constant(n, 1.0);
    let mut f = Polynomial::zero(n);
    for i in 0..n {
        let xi = x(i);
        let mut r = &(&xi * &(&Polynomial::constant(n, 2.0) + &(&xi * &xi).scale(5.0))) + &one;
        let lo = i.saturating_sub(5);
        let hi = (i + 1).min(n - 1);
        for j in (lo..=hi).filter(|&j| j != i) {
            let xj = x(j);
            r = &r - &(&(&one + &xj) * &xj);
        }
        f = &f + &(&r * &r);
    }
    f
}

/// `Σ a_i(x_i² + x_i⁴) - Σ_i Σ_k b_ik x_i² x_k²` with `a_i ∈ [1, 2]` and
/// `b_ik ∈ [0.5/N, 1.5/N]`.
pub fn network_lyapunov1(n: usize, seed: u64) -> Result<Polynomial, GenError> {
    if n < 2 {
        return Err(GenError::InvalidParam("need at least two nodes".into()));
    }
    let mut rng = rng(seed);
    let nn = n as f64;
    let mut f = Polynomial::zero(n);
    for i in 0..n {
        let a = rng.random_range(1.0..=2.0);
        f.add_term(Exponent::unit(n, i).scaled(2), a);
        f.add_term(Exponent::unit(n, i).scaled(4), a);
    }
    for i in 0..n {
        for k in 0..n {
            let b = rng.random_range(0.5 / nn..=1.5 / nn);
            let e = &Exponent::unit(n, i).scaled(2) + &Exponent::unit(n, k).scaled(2);
            f.add_term(e, -b);
        }
    }
    Ok(f)
}

/// Lower bound imposed on each multiplier `λ_i` of [`network_lyapunov2`].
pub const NETWORK_MULTIPLIER_FLOOR: f64 = 1e-6;

/// Duffing-oscillator energy
/// `V = Σ a_i(x_i²/2 - x_i⁴/4) + ½ Σ_i Σ_k b_ik (x_i - x_k)⁴/4`
/// with `a_i ∈ [0.5, 1.5]`, `b_ik ∈ [0.5/N, 1.5/N]`, posed as the
/// parametric problem `V - Σ λ_i x_i²(g - x_i²) >= 0`, `λ_i >= 1e-6`.
/// The relaxation bound is nonnegative (up to solver accuracy) exactly
/// when some admissible `λ` is certified.
pub fn network_lyapunov2(n: usize, g: f64, seed: u64) -> Result<Pop, GenError> {
    if n < 2 {
        return Err(GenError::InvalidParam("need at least two nodes".into()));
    }
    if !(g > 0.0) {
        return Err(GenError::InvalidParam(format!("g = {g} must be positive")));
    }
    let mut rng = rng(seed);
    let nn = n as f64;
    let x = |i: usize| Polynomial::var(n, i);
    let mut v = Polynomial::zero(n);
    for i in 0..n {
        let a = rng.random_range(0.5..=1.5);
        v.add_term(Exponent::unit(n, i).scaled(2), a / 2.0);
        v.add_term(Exponent::unit(n, i).scaled(4), -a / 4.0);
    }
    for i in 0..n {
        for k in 0..n {
            let b = rng.random_range(0.5 / nn..=1.5 / nn);
            if i != k {
                let d = &x(i) - &x(k);
                v = &v + &d.pow(4).scale(b / 8.0);
            }
        }
    }
    let params = (0..n)
        .map(|i| {
            let xi2 = x(i).pow(2);
            &xi2 * &(&Polynomial::constant(n, g) - &xi2)
        })
        .collect();
    Ok(Pop::unconstrained(v).with_params(params, NETWORK_MULTIPLIER_FLOOR)?)
}

/// A benchmark instance description, usable from the CLI and job files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum GeneratorSpec {
    Randpoly1 { n: usize, two_d: u32, t: usize, p: f64, seed: u64 },
    Randpoly2 { n: usize, two_d: u32, s: usize, seed: u64 },
    Broyden { n: usize },
    Network1 { n: usize, seed: u64 },
    Network2 { n: usize, g: f64, seed: u64 },
}

impl GeneratorSpec {
    pub fn generate(&self) -> Result<Pop, GenError> {
        Ok(match *self {
            GeneratorSpec::Randpoly1 { n, two_d, t, p, seed } => Pop::unconstrained(randpoly1(n, two_d, t, p, seed)?),
            GeneratorSpec::Randpoly2 { n, two_d, s, seed } => Pop::unconstrained(randpoly2(n, two_d, s, seed)?),
            GeneratorSpec::Broyden { n } => {
                if n == 0 {
                    return Err(GenError::InvalidParam("n must be positive".into()));
                }
                Pop::unconstrained(broyden_banded(n))
            }
            GeneratorSpec::Network1 { n, seed } => Pop::unconstrained(network_lyapunov1(n, seed)?),
            GeneratorSpec::Network2 { n, g, seed } => network_lyapunov2(n, g, seed)?,
        })
    }
}
