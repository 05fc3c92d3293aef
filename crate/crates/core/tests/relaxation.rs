mod common;

use common::{exp, poly};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tssos::relax::{
    assemble_unconstrained_sos, extract_certificate, unconstrained_basis, BasisChoice, solve_constrained, solve_dense_constrained,
    solve_dense_unconstrained, solve_pop, solve_unconstrained, verify_certificate, Certificate, CertificateBlock,
    Pop, RelaxError, RelaxOptions, SparseOrder,
};
use tssos::sdp::{solve, Form, SolveStatus, SolverConfig};
use tssos::tsp::{block_closure, BinaryPattern};
use tssos::{MonomialBasis, Polynomial};

fn opts(form: Form) -> RelaxOptions {
    RelaxOptions {
        form,
        ..RelaxOptions::default()
    }
}

fn full_partition(size: usize) -> tssos::tsp::BlockPartition {
    block_closure(&BinaryPattern::full(size)).1
}

#[test]
fn square_of_variable_with_basis_without_constant() {
    let f = poly("x1^2", 1);
    let basis = MonomialBasis::with_order(1, vec![exp(&[1])]).unwrap();
    let p = assemble_unconstrained_sos(&f, &full_partition(1), &basis).unwrap();
    let sol = solve(&p, &SolverConfig::default()).unwrap();
    assert_eq!(sol.status, SolveStatus::Optimal);
    assert!(sol.primal_obj.abs() < 1e-7);
}

#[test]
fn exact_square_has_zero_bound() {
    let r = solve_unconstrained(&poly("x1^2-2*x1*x2+x2^2", 2), &opts(Form::Sos)).unwrap();
    assert_eq!(r.status, SolveStatus::Optimal);
    assert!(r.bound.abs() < 1e-6, "{}", r.bound);
}

#[test]
fn constant_polynomial_moment_form() {
    let r = solve_unconstrained(&Polynomial::constant(2, 3.5), &opts(Form::Moment)).unwrap();
    assert!((r.bound - 3.5).abs() < 1e-7, "{}", r.bound);
}

#[test]
fn quartic_minus_square() {
    for form in [Form::Sos, Form::Moment] {
        let r = solve_unconstrained(&poly("x1^4-x1^2", 1), &opts(form)).unwrap();
        assert!((r.bound + 0.25).abs() < 1e-6, "{form:?}: {}", r.bound);
    }
}

#[test]
fn linear_objective_on_half_line() {
    let pop = Pop::new(poly("x1", 1), vec![poly("x1", 1)]).unwrap();
    for form in [Form::Sos, Form::Moment] {
        let o = RelaxOptions {
            order: Some(1),
            ..opts(form)
        };
        let r = solve_constrained(&pop, &o).unwrap();
        assert!(r.bound.abs() < 1e-6, "{form:?}: {}", r.bound);
    }
}

#[test]
fn bilinear_on_unit_ball() {
    let pop = Pop::new(poly("x1*x2", 2), vec![poly("1-x1^2-x2^2", 2)]).unwrap();
    // Independent check: dense grid over the disk.
    let mut grid_min = f64::INFINITY;
    for i in 0..=400 {
        let t = std::f64::consts::TAU * i as f64 / 400.0;
        grid_min = grid_min.min(t.cos() * t.sin());
    }
    for form in [Form::Sos, Form::Moment] {
        let r = solve_dense_constrained(&pop, 1, form, &SolverConfig::default()).unwrap();
        assert!((r.bound + 0.5).abs() < 1e-6, "{form:?}: {}", r.bound);
        assert!((r.bound - grid_min).abs() < 1e-3);
    }
}

#[test]
fn unmatched_coefficient_is_structural_error() {
    let f = poly("x1^4+x1^3", 1);
    let basis = MonomialBasis::with_order(1, vec![exp(&[0]), exp(&[1])]).unwrap();
    assert!(matches!(
        assemble_unconstrained_sos(&f, &full_partition(2), &basis),
        Err(RelaxError::Unmatched(_))
    ));
}

#[test]
fn sos_infeasible_reported_as_dual_infeasible() {
    let r = solve_unconstrained(&poly("-x1^2", 1), &opts(Form::Sos)).unwrap();
    assert_eq!(r.status, SolveStatus::DualInfeasible, "{}", r.message);
    assert!(matches!(
        extract_certificate(&r, &Pop::unconstrained(poly("-x1^2", 1))),
        Err(RelaxError::NotOptimal(_))
    ));
}

#[test]
fn constrained_example_certificate() {
    let pop = common::constrained_example();
    let o = RelaxOptions {
        order: Some(2),
        ..RelaxOptions::default()
    };
    let r = solve_constrained(&pop, &o).unwrap();
    let cert = extract_certificate(&r, &pop).unwrap();
    let blocks: Vec<(usize, Vec<String>)> = cert
        .blocks
        .iter()
        .map(|b| (b.j, b.monomials.iter().map(|m| m.to_string()).collect()))
        .collect();
    let want = |j: usize, ms: &[&str]| (j, ms.iter().map(|s| s.to_string()).collect::<Vec<_>>());
    assert_eq!(
        blocks,
        vec![
            want(0, &["1", "x1^2", "x1*x2", "x2^2"]),
            want(0, &["x1", "x2"]),
            want(1, &["1"]),
            want(1, &["x1", "x2"]),
        ]
    );
    let report = verify_certificate(&cert, &pop, r.bound, 1e-6).unwrap();
    assert!(report.passed, "{report:?}");

    let mut broken = cert.clone();
    broken.blocks[0].gram[(0, 0)] += 1.0;
    let bad = verify_certificate(&broken, &pop, r.bound, 1e-6).unwrap();
    assert!(!bad.passed);
    assert!((bad.max_residual - 1.0).abs() < 1e-6);
}

#[test]
fn zero_certificate_for_zero_polynomial() {
    let pop = Pop::unconstrained(Polynomial::zero(2));
    let cert = Certificate {
        lambda: 0.0,
        blocks: vec![CertificateBlock {
            j: 0,
            monomials: vec![exp(&[0, 0])],
            gram: nalgebra::DMatrix::zeros(1, 1),
        }],
        params: vec![],
    };
    let report = verify_certificate(&cert, &pop, 0.0, 1e-9).unwrap();
    assert!(report.passed);
    assert_eq!(report.max_residual, 0.0);
}

#[test]
fn monotone_in_relaxation_order() {
    let pop = common::constrained_example();
    let mut prev = f64::NEG_INFINITY;
    for d in 2..=4 {
        let o = RelaxOptions {
            order: Some(d),
            ..RelaxOptions::default()
        };
        let r = solve_constrained(&pop, &o).unwrap();
        assert!(r.bound >= prev - 1e-6);
        prev = r.bound;
    }
}

#[test]
fn bounds_are_below_sampled_values() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let f = common::unconstrained_example();
    let r = solve_unconstrained(&f, &RelaxOptions::default()).unwrap();
    for _ in 0..2000 {
        let x: Vec<f64> = (0..3).map(|_| rng.random_range(-2.0..2.0)).collect();
        assert!(r.bound <= f.evaluate(&x).unwrap() + 1e-7);
    }
    let pop = common::constrained_example();
    let o = RelaxOptions {
        order: Some(2),
        ..RelaxOptions::default()
    };
    let r = solve_constrained(&pop, &o).unwrap();
    for _ in 0..2000 {
        let x: Vec<f64> = (0..2).map(|_| rng.random_range(-1.0..1.0)).collect();
        if pop.constraints[0].evaluate(&x).unwrap() >= 0.0 {
            assert!(r.bound <= pop.objective.evaluate(&x).unwrap() + 1e-7);
        }
    }
}

#[test]
fn stabilized_matches_dense_unconstrained_example() {
    let f = common::unconstrained_example();
    let o = RelaxOptions {
        sparse_order: SparseOrder::Stabilize,
        ..RelaxOptions::default()
    };
    let r = solve_pop(&Pop::unconstrained(f.clone()), &o).unwrap();
    assert!(r.stabilized);
    let basis = unconstrained_basis(&f, BasisChoice::Newton).unwrap();
    let dense = solve_dense_unconstrained(&f, &basis, Form::Sos, &SolverConfig::default()).unwrap();
    assert!((r.bound - dense.bound).abs() < 1e-6);
}

fn arb_quadratic() -> impl Strategy<Value = Polynomial> {
    (prop::collection::vec(-1.0f64..1.0, 6), prop::collection::vec(0.2f64..2.0, 3)).prop_map(|(off, diag)| {
        let n = 3;
        let mut f = Polynomial::zero(n);
        let mut k = 0;
        for i in 0..n {
            f.add_term(tssos::Exponent::unit(n, i).scaled(2), diag[i] + 2.0);
            for j in i + 1..n {
                f.add_term(&tssos::Exponent::unit(n, i) + &tssos::Exponent::unit(n, j), off[k]);
                k += 1;
            }
            f.add_term(tssos::Exponent::unit(n, i), off[3 + i]);
        }
        f
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn quadratic_first_order_is_dense(f in arb_quadratic()) {
        let r = solve_unconstrained(&f, &RelaxOptions::default()).unwrap();
        let basis = unconstrained_basis(&f, BasisChoice::Newton).unwrap();
        let dense = solve_dense_unconstrained(&f, &basis, Form::Sos, &SolverConfig::default()).unwrap();
        prop_assert_eq!(r.status, SolveStatus::Optimal);
        prop_assert!((r.bound - dense.bound).abs() < 1e-6);
    }

    #[test]
    fn moment_and_sos_agree(f in arb_quadratic()) {
        let a = solve_unconstrained(&f, &opts(Form::Sos)).unwrap();
        let b = solve_unconstrained(&f, &opts(Form::Moment)).unwrap();
        prop_assert!((a.bound - b.bound).abs() < 1e-6);
    }
}
