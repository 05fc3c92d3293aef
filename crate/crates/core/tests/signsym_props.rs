mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;
use tssos::relax::Pop;
use tssos::signsym::{null_space, sign_symmetries, signsym_partition, Gf2Vec};
use tssos::tsp::tsp_iterate_constrained;
use tssos::{standard_basis, Exponent, Polynomial};

fn all_vectors(n: usize) -> Vec<Vec<bool>> {
    (0u32..1 << n).map(|m| (0..n).map(|i| m >> i & 1 == 1).collect()).collect()
}

fn dot(a: &[bool], b: &[bool]) -> bool {
    a.iter().zip(b).fold(false, |acc, (&x, &y)| acc ^ (x & y))
}

fn span_of(vs: &[Vec<bool>], n: usize) -> BTreeSet<Vec<bool>> {
    all_vectors(n)
        .into_iter()
        .filter(|cand| {
            // cand ∈ span(vs) iff cand ⟂ every vector orthogonal to vs.
            all_vectors(n)
                .iter()
                .filter(|w| vs.iter().all(|v| !dot(v, w)))
                .all(|w| !dot(cand, w))
        })
        .collect()
}

fn arb_rows(n: usize) -> impl Strategy<Value = Vec<Vec<bool>>> {
    prop::collection::vec(prop::collection::vec(any::<bool>(), n), 0..6)
}

fn arb_support(n: usize) -> impl Strategy<Value = Vec<Exponent>> {
    prop::collection::vec(prop::collection::vec(0u32..=3, n), 1..6)
        .prop_map(|s| s.into_iter().map(Exponent::new).collect())
}

proptest! {
    #[test]
    fn double_complement_is_span(n in 1usize..7, rows in arb_rows(6)) {
        let rows: Vec<Vec<bool>> = rows.into_iter().map(|r| r[..n].to_vec()).collect();
        let packed: Vec<Gf2Vec> = rows.iter().map(|r| Gf2Vec::from_bits(r)).collect();
        let perp = null_space(&packed, n);
        let perp_perp = null_space(&perp, n);
        let got: BTreeSet<Vec<bool>> = span_of(&perp_perp.iter().map(|v| v.bits()).collect::<Vec<_>>(), n);
        prop_assert_eq!(got, span_of(&rows, n));
    }

    #[test]
    fn sign_symmetries_match_brute_force(n in 1usize..6, support in arb_support(5)) {
        let support: Vec<Exponent> = support.iter().map(|e| Exponent::new(e.entries()[..n].to_vec())).collect();
        let r = sign_symmetries(&support, n);
        let brute: BTreeSet<Vec<bool>> = all_vectors(n)
            .into_iter()
            .filter(|c| support.iter().all(|a| !dot(c, &Gf2Vec::parity_of(a).bits())))
            .collect();
        let span: BTreeSet<Vec<bool>> = r.span().iter().map(|v| v.bits()).collect();
        prop_assert_eq!(span, brute);
        prop_assert_eq!(1usize << r.vectors.len(), r.span().len());
    }

    #[test]
    fn stabilized_pattern_equals_sign_symmetry_partition(
        f in prop::collection::vec((prop::collection::vec(0u32..=2, 2), 1i32..=3), 1..5),
        g in prop::collection::vec((prop::collection::vec(0u32..=1, 2), 1i32..=3), 1..3),
    ) {
        let n = 2;
        let f = Polynomial::from_terms(n, f.into_iter().map(|(e, c)| (Exponent::new(e), c as f64)));
        let g = Polynomial::from_terms(n, g.into_iter().map(|(e, c)| (Exponent::new(e), c as f64)));
        let pop = Pop::new(f.clone(), vec![g.clone()]).unwrap();
        let d_hat = pop.minimum_order().max(1) + 1;
        let st = tsp_iterate_constrained(&f, &[g.clone()], d_hat, 50).unwrap();
        prop_assert!(st.stabilized);
        let mut support = f.support();
        support.extend(g.support());
        let r = sign_symmetries(&support, n);
        for j in 0..st.len() {
            let expected = signsym_partition(&st.bases[j], &r);
            let mut got = st.partitions[j].blocks.clone();
            got.sort_by_key(|b| b[0]);
            prop_assert_eq!(got, expected.blocks, "generator {}", j);
        }
    }
}

#[test]
fn sign_symmetry_of_all_even_support() {
    let support = vec![common::exp(&[2, 0]), common::exp(&[0, 4]), common::exp(&[2, 2])];
    assert_eq!(sign_symmetries(&support, 2).vectors.len(), 2);
}

#[test]
fn full_symmetry_groups_by_parity() {
    let r = sign_symmetries(&[common::exp(&[0, 0, 0])], 3);
    let basis = standard_basis(3, 2).unwrap();
    let part = signsym_partition(&basis, &r);
    for b in &part.blocks {
        let parities: BTreeSet<Vec<bool>> = b.iter().map(|&i| basis.get(i).parity()).collect();
        assert_eq!(parities.len(), 1);
    }
    assert_eq!(part.blocks.len(), 7);
}
