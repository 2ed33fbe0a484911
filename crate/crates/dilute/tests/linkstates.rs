mod common;

use dilute::linkstates::{compose, enumerate_link_states, standard_action, trinomial, Diagram, LinkState, Site};
use dilute::transfer::{consistent_configurations, row_diagram};
use proptest::prelude::*;

#[test]
fn dimensions_match_trinomial_oracle() {
    let table = common::oracle()["trinomial"].as_object().unwrap();
    for n in 1..=8usize {
        let frozen: Vec<u64> = table[&n.to_string()].as_array().unwrap().iter().map(|v| v.as_u64().unwrap()).collect();
        for d in 0..=n {
            assert_eq!(trinomial(n, d as i64), frozen[d], "trinomial({n},{d})");
            assert_eq!(enumerate_link_states(n, d).unwrap().len() as u64, frozen[d], "|V_{n},{d}|");
        }
    }
}

#[test]
fn three_site_sectors() {
    let dims: Vec<usize> = (0..=3).map(|d| enumerate_link_states(3, d).unwrap().len()).collect();
    assert_eq!(dims, [7, 6, 3, 1]);
    let v30: Vec<String> = enumerate_link_states(3, 0).unwrap().states.iter().map(|s| s.to_string()).collect();
    // each vacancy placement carries the arc in front of or through the cut
    for (front, back) in [("()V", "[]V"), ("(V)", "[V]"), ("V()", "V[]")] {
        let back: String = back.chars().map(|c| match c { '[' => ']', ']' => '[', c => c }).collect();
        assert!(v30.contains(&front.to_string()), "{front} in {v30:?}");
        assert!(v30.contains(&back), "{back} in {v30:?}");
    }
    assert!(v30.contains(&"VVV".to_string()));
}

#[test]
fn out_of_range_trinomial_is_zero() {
    assert_eq!(trinomial(3, 4), 0);
    assert_eq!(trinomial(3, -4), 0);
    assert_eq!(trinomial(6, 6), 1);
}

#[test]
fn basis_order_is_deterministic() {
    for n in 1..=6 {
        for d in 0..=n {
            let a = enumerate_link_states(n, d).unwrap();
            let b = enumerate_link_states(n, d).unwrap();
            assert_eq!(a.states, b.states);
            let mut keys: Vec<_> = a.states.iter().map(|s| s.sort_key()).collect();
            let sorted = {
                let mut k = keys.clone();
                k.sort();
                k
            };
            assert_eq!(keys, sorted);
            keys.dedup();
            assert_eq!(keys.len(), a.len());
        }
    }
}

fn diagram(n: usize, links: &[(usize, usize, i32)]) -> Diagram {
    let mut d = Diagram::empty(n);
    for &(a, b, w) in links {
        d.links[a] = Some((b, w));
        d.links[b] = Some((a, -w));
    }
    d
}

// Width-five worked examples; top nodes 0..5, bottom nodes 5..10.

#[test]
fn worked_action_defect_winding() {
    let w = LinkState::parse("()DDV").unwrap();
    // top 1–2 arc, top 0 down to bottom 2, top 3 round the back to bottom 0
    let a = diagram(5, &[(1, 2, 0), (0, 7, 0), (3, 5, -1)]);
    let (sc, out) = standard_action(&a, &w).unwrap().expect("non-zero");
    assert_eq!(out.to_string(), "DVDVV");
    assert_eq!((sc.n_alpha, sc.n_beta, sc.n_omega), (0, 0, -1));
}

#[test]
fn worked_action_joined_defects_vanish() {
    let w = LinkState::parse("DV()D").unwrap();
    let a = diagram(5, &[(3, 4, 0), (2, 0, -1), (6, 7, 0), (5, 8, 0)]);
    assert!(standard_action(&a, &w).unwrap().is_none());
}

#[test]
fn worked_action_two_loops() {
    let w = LinkState::parse("(V)()").unwrap();
    let a = diagram(5, &[(3, 4, 0), (2, 0, -1), (6, 7, 0), (5, 8, 0)]);
    let (sc, out) = standard_action(&a, &w).unwrap().expect("non-zero");
    assert_eq!(out.to_string(), "(())V");
    assert_eq!((sc.n_alpha, sc.n_beta, sc.n_omega), (1, 1, 0));
}

#[test]
fn worked_action_segment_on_vacancy_vanishes() {
    let w = LinkState::parse("DD()V").unwrap();
    let a = diagram(5, &[(0, 8, 1), (2, 9, 1), (5, 7, 0)]);
    assert!(standard_action(&a, &w).unwrap().is_none());
}

#[test]
fn malformed_diagram_rejected() {
    let w = LinkState::parse("DD").unwrap();
    assert!(standard_action(&Diagram::empty(3), &w).is_err());
    let mut lopsided = Diagram::empty(2);
    lopsided.links[0] = Some((2, 0));
    assert!(standard_action(&lopsided, &w).is_err());
}

#[test]
fn identity_rows_fix_every_state() {
    for n in 1..=6 {
        for d in 0..=n {
            for s in enumerate_link_states(n, d).unwrap().states {
                let occ: Vec<bool> = s.sites().iter().map(|x| *x != Site::Vacant).collect();
                let (sc, out) = standard_action(&Diagram::through_strands(&occ), &s).unwrap().unwrap();
                assert_eq!(out, s);
                assert_eq!((sc.n_alpha, sc.n_beta, sc.n_omega), (0, 0, 0));
            }
        }
    }
}

fn row_strategy() -> impl Strategy<Value = (usize, usize, usize, usize)> {
    (1usize..=4).prop_flat_map(|n| {
        let rows = consistent_configurations(n).len();
        (Just(n), 0..rows, 0..rows, 0..=n)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn acting_twice_matches_composed((n, i, j, d) in row_strategy()) {
        let rows = consistent_configurations(n);
        let lower = row_diagram(&rows[i]);
        let upper = row_diagram(&rows[j]);
        let composed = compose(&lower, &upper).unwrap();
        for w in enumerate_link_states(n, d).unwrap().states {
            let twice = standard_action(&upper, &w).unwrap().and_then(|(s1, w1)| {
                standard_action(&lower, &w1).unwrap().map(|(s2, w2)| (s1.combine(s2), w2))
            });
            let once = composed.as_ref().and_then(|c| standard_action(c, &w).unwrap());
            let lhs = twice.map(|(s, w)| (s.n_alpha, s.n_beta, s.n_omega, w));
            let rhs = once.map(|(s, w)| (s.n_alpha, s.n_beta, s.n_omega, w));
            prop_assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn canonical_form_is_idempotent(n in 1usize..=7, pick in any::<prop::sample::Index>()) {
        let d = pick.index(n + 1);
        let basis = enumerate_link_states(n, d).unwrap();
        let s = &basis.states[pick.index(basis.len())];
        let once = LinkState::parse(&s.to_string()).unwrap();
        let twice = LinkState::parse(&once.to_string()).unwrap();
        prop_assert_eq!(&once, s);
        prop_assert_eq!(once, twice);
    }

    #[test]
    fn alpha_and_omega_are_sector_exclusive((n, i, _j, d) in row_strategy()) {
        let row = row_diagram(&consistent_configurations(n)[i]);
        for w in enumerate_link_states(n, d).unwrap().states {
            if let Some((s, _)) = standard_action(&row, &w).unwrap() {
                prop_assert!(s.n_alpha == 0 || d == 0);
                prop_assert!(s.n_omega == 0 || d > 0);
            }
        }
    }
}
