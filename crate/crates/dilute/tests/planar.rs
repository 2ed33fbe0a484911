mod common;

use dilute::linalg::{circle_points, laurent_eval, laurent_fit, CMat};
use dilute::planar::*;
use dilute::projectors::PrefactorFamily;
use dilute::scalars::loop_fugacity;
use dilute::C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const LOCAL_TOL: f64 = 1e-11;
const DRAWS: usize = 20;

fn registry_residuals(id: &str) -> Vec<(f64, LocalParams)> {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    (0..DRAWS)
        .map(|_| {
            let p = random_params(&mut rng, id);
            (verify_local_identity(id, &p).unwrap(), p)
        })
        .collect()
}

macro_rules! registry_test {
    ($name:ident, $id:literal) => {
        #[test]
        fn $name() {
            for (r, p) in registry_residuals($id) {
                assert!(r < LOCAL_TOL, "{} residual {r:e} at {p:?}", $id);
            }
        }
    };
}

registry_test!(initial_condition, "initial");
registry_test!(crossing, "crossing");
registry_test!(inversion, "inversion");
registry_test!(yang_baxter, "ybe");
registry_test!(factorisation_at_three_lambda, "factor_3lambda");
registry_test!(factorisation_at_two_lambda, "factor_2lambda");
registry_test!(push_through_triangle, "push_triangle");
registry_test!(push_through_arc, "push_arc");
registry_test!(braid_push_through_arc, "braid_push_arc");
registry_test!(braid_push_through_vacancy, "braid_push_vacancy");
registry_test!(triangle_relation_a, "triangle_A4a");
registry_test!(triangle_relation_b, "triangle_A4b");
registry_test!(triangle_relation_c, "triangle_A4c");
registry_test!(triangle_relation_d, "triangle_A4d");

#[test]
fn registry_is_complete() {
    assert_eq!(IDENTITIES.len(), 14);
    assert!(matches!(
        verify_local_identity("no_such_identity", &LocalParams::new(0.1, 0.2, 0.55)),
        Err(dilute::Error::UnknownIdentity(_))
    ));
    assert!(matches!(
        verify_local_identity("ybe", &LocalParams::new(0.1, 0.2, std::f64::consts::FRAC_PI_2)),
        Err(dilute::Error::SingularLambda(_))
    ));
}

#[test]
fn yang_baxter_examples() {
    assert!(verify_local_identity("ybe", &LocalParams::new(0.37, 1.11, 0.55)).unwrap() < 1e-12);
    assert!(verify_local_identity("ybe", &LocalParams::new(0.37, 0.37, 0.55)).unwrap() < 1e-14);
    assert!(verify_local_identity("inversion", &LocalParams::new(0.8, 0.0, 0.55)).unwrap() < 1e-12);
}

#[test]
fn second_triangle_relation_both_families() {
    for family in PrefactorFamily::ALL {
        let p = LocalParams { m: 2, family, ..LocalParams::new(0.3, 0.5, 0.4) };
        assert!(verify_local_identity("triangle_A4b", &p).unwrap() < 1e-12, "{family:?}");
    }
}

#[test]
fn face_at_zero_is_identity() {
    let f = face_tangle(C64::from(0.0), 0.55).unwrap();
    let one = C64::from(1.0);
    let mut id = DiskTangle::empty(4);
    for links in [&[(0, 3)][..], &[(1, 2)], &[(0, 3), (1, 2)]] {
        id.add_term(pairing_from_links(4, links), one);
    }
    assert_eq!(f.len(), 4);
    assert!(residual(&id, &f) < 1e-14);
}

#[test]
fn braid_tangle_coefficients() {
    let lam = 0.55;
    let b = braid_tangle(1, lam);
    let mut coefs: Vec<C64> = b.terms().map(|(_, c)| *c).collect();
    let i = C64::new(0.0, 1.0);
    let mut expect = vec![
        C64::from(1.0),
        C64::from(1.0),
        C64::from(1.0),
        -(2.0 * lam * i).exp(),
        -(-2.0 * lam * i).exp(),
    ];
    let key = |c: &C64| (c.re * 1e6).round() as i64 * 10_000_000 + (c.im * 1e6).round() as i64;
    coefs.sort_by_key(key);
    expect.sort_by_key(key);
    assert_eq!(coefs.len(), 5);
    for (c, e) in coefs.iter().zip(&expect) {
        assert!((c - e).norm() < 1e-14);
    }
}

fn random_tangle(rng: &mut impl Rng, n: usize, terms: usize) -> DiskTangle {
    let mut t = DiskTangle::zero(n);
    for _ in 0..terms {
        // balanced word over {vacant, open, close}
        let mut p: Vec<u8> = (0..n as u8).collect();
        let mut stack = Vec::new();
        for i in 0..n {
            let left = n - i;
            match rng.gen_range(0..3) {
                1 if stack.len() < left - 1 => stack.push(i),
                2 if !stack.is_empty() => {
                    let j = stack.pop().unwrap();
                    p[i] = j as u8;
                    p[j] = i as u8;
                }
                _ if stack.len() >= left => {
                    let j = stack.pop().unwrap();
                    p[i] = j as u8;
                    p[j] = i as u8;
                }
                _ => {}
            }
        }
        assert!(is_planar(&p));
        t.add_term(p, C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    }
    t
}

#[test]
fn glue_identity_absorbs() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let beta = loop_fugacity(0.55);
    let strand = dashed();
    for _ in 0..30 {
        let x = random_tangle(&mut rng, 4, 5);
        // a dashed strand glued at node 3 hands node 3 back
        let g = x.glue(&strand, &[(3, 0)], beta).unwrap();
        assert!(residual(&x, &g) < 1e-14);
    }
}

#[test]
fn segment_meeting_vacancy_drops_term() {
    let beta = loop_fugacity(0.55);
    let arc = DiskTangle::from_links(2, &[(0, 1)], C64::from(1.0));
    let vac = DiskTangle::empty(2);
    let g = arc.glue(&vac, &[(0, 1), (1, 0)], beta).unwrap();
    assert!(g.is_empty());
    let closed = arc.glue(&arc, &[(0, 1), (1, 0)], beta).unwrap();
    assert!((closed.coefficient(&[]) - beta).norm() < 1e-15);
}

#[test]
fn glue_is_bilinear_and_associative() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let beta = loop_fugacity(0.41);
    for _ in 0..40 {
        let n = rng.gen_range(3..=8);
        let a1 = random_tangle(&mut rng, n, 4);
        let a2 = random_tangle(&mut rng, n, 4);
        let b = random_tangle(&mut rng, 4, 4);
        let c = random_tangle(&mut rng, 4, 4);
        let k = C64::new(0.3, -0.7);
        let face = [(n - 2, 1), (n - 1, 0)];
        let lhs = a1.clone().plus(&a2.clone().scale(k)).glue(&b, &face, beta).unwrap();
        let rhs = a1.glue(&b, &face, beta).unwrap().plus(&a2.glue(&b, &face, beta).unwrap().scale(k));
        assert!(residual(&lhs, &rhs) < 1e-13);

        let ab_c = a1.glue(&b, &face, beta).unwrap().glue(&c, &[(n - 2, 1), (n - 1, 0)], beta).unwrap();
        let bc = b.glue(&c, &[(2, 1), (3, 0)], beta).unwrap();
        let a_bc = a1.glue(&bc, &face, beta).unwrap();
        assert!(residual(&ab_c, &a_bc) < 1e-13);
    }
}

#[test]
fn inversion_sides_are_degree_four_laurent() {
    let lam = 0.55;
    let sides = |u: f64| local_identity_sides("inversion", &LocalParams::new(u, 0.0, lam)).unwrap();
    let keys: Vec<Pairing> = {
        let (l, r) = sides(0.3);
        let mut k: Vec<Pairing> = l.terms().chain(r.terms()).map(|(p, _)| p.clone()).collect();
        k.sort();
        k.dedup();
        k
    };
    let column = |t: &DiskTangle| CMat::from_fn(keys.len(), 1, |i, _| t.coefficient(&keys[i]));
    let zs = circle_points(9, 0.17);
    let arg = |z: C64| z.arg();
    for pick in [0usize, 1] {
        let samples: Vec<CMat> = zs
            .iter()
            .map(|&z| {
                let (l, r) = sides(arg(z));
                column(if pick == 0 { &l } else { &r })
            })
            .collect();
        let fit = laurent_fit(&zs, &samples, 4).unwrap();
        for z in circle_points(5, 0.61) {
            let (l, r) = sides(arg(z));
            let direct = column(if pick == 0 { &l } else { &r });
            let interp = laurent_eval(&fit, z);
            assert!(dilute::linalg::rel_residual(&direct, &interp) < 1e-10);
        }
    }
}
