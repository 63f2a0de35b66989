//! Randomized comparisons against brute-force oracles written with plain
//! machine integers.

mod common;

use bbdegen::complex::transport;
use common::*;
use proptest::prelude::*;

fn points(dim: std::ops::RangeInclusive<usize>, count: std::ops::RangeInclusive<usize>, range: i64) -> impl Strategy<Value = Vec<Pt>> {
    (dim, count).prop_flat_map(move |(d, n)| {
        proptest::collection::vec(proptest::collection::vec(-range..=range, d), n).prop_map(|mut v| {
            v.sort();
            v.dedup();
            v
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 128, ..ProptestConfig::default() })]

    #[test]
    fn face_lattice_matches_brute_force(pts in points(2..=5, 6..=20, 2)) {
        prop_assume!(full_dimensional(&pts));
        let r = check_face_lattice(&pts);
        prop_assert!(r.is_ok(), "{}", r.unwrap_err());
    }

    #[test]
    fn minkowski_faces_match_brute_force(
        (a, b) in (1usize..=3).prop_flat_map(|d| {
            let pts = move || proptest::collection::vec(proptest::collection::vec(-2i64..=2, d), 1..=6);
            (pts(), pts())
        })
    ) {
        let r = check_minkowski(&a, &b);
        prop_assert!(r.is_ok(), "{}", r.unwrap_err());
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 400, ..ProptestConfig::default() })]

    #[test]
    fn monodromy_matches_chart_composition(which in 0usize..10, a in any::<u64>(), b in any::<u64>(), c in any::<u64>(), e in any::<u64>()) {
        let all = corpus_complexes();
        let ac = &all[which % all.len()];
        prop_assume!(ac.dim() >= 1);
        let (v, cell, v2, cell2) = pick_loop(ac, a, b, c, e);
        let r = check_transport(ac, v, cell, v2, cell2);
        prop_assert!(r.is_ok(), "{}", r.unwrap_err());
    }
}

#[test]
fn monodromy_oracle_meets_nontrivial_loops() {
    // every nontrivial discriminant loop of the corpus complexes
    let mut checked = 0;
    for ac in corpus_complexes() {
        if ac.dim() < 2 {
            continue;
        }
        for &f in &ac.by_dim[ac.dim() - 1] {
            let star = ac.star(f);
            if star.len() != 2 {
                continue;
            }
            let vs = &ac.cells[f].vertices;
            for (i, &v) in vs.iter().enumerate() {
                for &v2 in &vs[i + 1..] {
                    if transport(ac, v, star[0], v2, star[1]).unwrap().is_identity() {
                        continue;
                    }
                    assert!(check_transport(ac, v, star[0], v2, star[1]).unwrap());
                    checked += 1;
                }
            }
        }
    }
    assert!(checked >= 100, "only {} nontrivial loops", checked);
}
