mod common;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tssos::relax::{build_problem, solve_constrained, RelaxOptions};
use common::random_problem;
use tssos::sdp::{export_sdpa, read_sdpa, solve, write_sdpa, LinearForm, SdpProblem, SolverConfig};

fn assert_same(a: &SdpProblem, b: &SdpProblem) {
    assert_eq!(a.blocks, b.blocks);
    assert_eq!(a.num_free, b.num_free);
    assert_eq!(a.constraints.len(), b.constraints.len());
    for (x, y) in a.constraints.iter().zip(&b.constraints) {
        assert_eq!(x.form.canonical(), y.form.canonical());
        assert_eq!(x.rhs.to_bits(), y.rhs.to_bits());
    }
    assert_eq!(a.objective.canonical(), b.objective.canonical());
}

#[test]
fn twenty_random_problems_round_trip_exactly() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for _ in 0..20 {
        let p = random_problem(&mut rng);
        let text = write_sdpa(&p);
        let q = read_sdpa(&text).unwrap();
        assert_same(&p, &q);
        assert_eq!(write_sdpa(&q), text);
    }
}

#[test]
fn constrained_example_file_solves_to_same_value() {
    let pop = common::constrained_example();
    let opts = RelaxOptions {
        order: Some(2),
        ..RelaxOptions::default()
    };
    let p = build_problem(&pop, &opts).unwrap();
    let dir = std::env::temp_dir().join(format!("sdpa-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("example.dat-s");
    export_sdpa(&p, &path).unwrap();
    let q = read_sdpa(&std::fs::read_to_string(&path).unwrap()).unwrap();
    std::fs::remove_dir_all(&dir).ok();
    let reread = solve(&q, &SolverConfig::default()).unwrap();
    let direct = solve_constrained(&pop, &opts).unwrap();
    assert!((reread.primal_obj - direct.bound).abs() < 1e-6);
    assert!((reread.primal_obj + 0.125).abs() < 1e-6);
}

#[test]
fn header_for_two_blocks() {
    let mut p = SdpProblem::new(vec![2, 1], 0);
    for k in 0..3 {
        let mut f = LinearForm::default();
        f.add_entry(k % 2, 0, 0, 1.0);
        p.add_constraint(f, k as f64);
    }
    let text = write_sdpa(&p);
    let lines: Vec<&str> = text.lines().take(3).collect();
    assert_eq!(lines, vec!["3", "2", "2 1"]);
}
