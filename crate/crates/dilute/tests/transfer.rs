mod common;

use std::f64::consts::PI;

use common::{complex, generic_ctx, oracle};
use dilute::fusion::normalized_limit;
use dilute::linalg::*;
use dilute::linkstates::trinomial;
use dilute::scalars::{braid_eigenvalue, SpectralContext};
use dilute::transfer::*;
use dilute::C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_u(rng: &mut impl Rng) -> C64 {
    C64::new(rng.gen_range(-1.5..1.5), rng.gen_range(-0.4..0.4))
}

#[test]
fn frontier_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for n in 1..=4 {
        let ctx = generic_ctx(n);
        for d in 0..=n {
            let s = Sector::new(n, d).unwrap();
            assert_eq!(s.dim() as u64, trinomial(n, d as i64));
            let u = random_u(&mut rng);
            let t = build_fundamental(u, &s, &ctx).unwrap();
            assert_eq!((t.entries.nrows(), t.entries.ncols()), (s.dim(), s.dim()));
            let bf = build_fundamental_bruteforce(u, &s.basis, &ctx);
            assert!(rel_residual(&t.entries, &bf) < 1e-13, "N={n} d={d}");
        }
    }
}

#[test]
fn all_defect_row_matches_oracle() {
    let ctx = generic_ctx(4);
    let s = Sector::new(4, 4).unwrap();
    let t = build_fundamental(C64::new(0.37, 0.1), &s, &ctx).unwrap();
    assert_eq!(t.entries.nrows(), 1);
    let frozen = complex(&oracle()["all_defect_row_N4"]);
    assert!((t.entries[(0, 0)] - frozen).norm() < 1e-12 * frozen.norm());
}

#[test]
fn commuting_periodic_and_crossing_symmetric() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let lam = common::LAMBDA;
    for n in 1..=4 {
        let ctx = generic_ctx(n);
        for d in 0..=n {
            let s = Sector::new(n, d).unwrap();
            let (u, v) = (random_u(&mut rng), random_u(&mut rng));
            let tu = build_fundamental(u, &s, &ctx).unwrap().entries;
            let tv = build_fundamental(v, &s, &ctx).unwrap().entries;
            assert!(rel_commutator(&tu, &tv) < 1e-11, "commutator N={n} d={d}");
            let tp = build_fundamental(u + PI, &s, &ctx).unwrap().entries;
            assert!(rel_residual(&tu, &tp) < 1e-11, "periodicity N={n} d={d}");
            let conj = build_conjugate(u, &s, &ctx).unwrap().entries;
            let shifted = build_fundamental(u + lam, &s, &ctx).unwrap().entries;
            assert!(rel_residual(&conj, &shifted) < 1e-11, "crossing N={n} d={d}");
            let at_lambda = build_conjugate(C64::from(lam), &s, &ctx).unwrap().entries;
            let at_two = build_fundamental(C64::from(2.0 * lam), &s, &ctx).unwrap().entries;
            assert!(rel_residual(&at_lambda, &at_two) < 1e-11);
        }
    }
}

#[test]
fn crossing_holds_for_random_inhomogeneities() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for n in 2..=3 {
        for _ in 0..3 {
            let xi: Vec<C64> = (0..n).map(|_| random_u(&mut rng) * 0.3).collect();
            let ctx = SpectralContext::new(n, 0.47).unwrap().with_xi(xi).unwrap().with_omega(common::omega());
            for d in 0..=n {
                let s = Sector::new(n, d).unwrap();
                let u = random_u(&mut rng);
                let a = build_conjugate(u, &s, &ctx).unwrap().entries;
                let b = build_fundamental(u + 0.47, &s, &ctx).unwrap().entries;
                assert!(rel_residual(&a, &b) < 1e-11);
            }
        }
    }
}

#[test]
fn braid_rows_are_scalar_and_central() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for phase in [0.0, 0.7, 2.1] {
        for n in 1..=6 {
            let ctx = SpectralContext::new(n, common::LAMBDA)
                .unwrap()
                .with_xi(common::xi(n))
                .unwrap()
                .with_omega(C64::from_polar(1.0, phase));
            for d in 0..=n {
                let s = Sector::new(n, d).unwrap();
                let t = build_fundamental(random_u(&mut rng), &s, &ctx).unwrap().entries;
                for sign in [1, -1] {
                    let b = build_braid(sign, &s, &ctx).unwrap().entries;
                    assert!(offdiag_mass(&b) < 1e-12);
                    let ev = braid_eigenvalue(d, sign, &ctx);
                    for i in 0..s.dim() {
                        assert!((b[(i, i)] - ev).norm() < 1e-10, "N={n} d={d} sign={sign}");
                    }
                    if n <= 4 {
                        assert!(rel_commutator(&b, &t) < 1e-11);
                    }
                }
            }
        }
    }
}

#[test]
fn laurent_degree_two_n() {
    for n in 1..=4 {
        let ctx = generic_ctx(n);
        for d in 0..=n {
            let s = Sector::new(n, d).unwrap();
            let sample = |z: C64| build_fundamental(-C64::i() * z.ln(), &s, &ctx).unwrap().entries;
            let zs = circle_points(4 * n + 1, 0.13);
            let samples: Vec<CMat> = zs.iter().map(|&z| sample(z)).collect();
            let fit = laurent_fit(&zs, &samples, 2 * n).unwrap();
            for (z, m) in zs.iter().zip(&samples) {
                assert!(rel_residual(&laurent_eval(&fit, *z), m) < 1e-9);
            }
            for z in circle_points(3, 0.71) {
                assert!(rel_residual(&laurent_eval(&fit, z), &sample(z)) < 1e-9, "N={n} d={d}");
            }
            assert_eq!(laurent_degree(&fit, 1e-9), 2 * n);
        }
    }
}

#[test]
fn normalised_limit_approaches_braid() {
    for n in 1..=3 {
        let ctx = generic_ctx(n);
        for d in 0..=n {
            let s = Sector::new(n, d).unwrap();
            for sign in [1, -1] {
                let lim = normalized_limit(1, 0, sign, 25.0, &s, &ctx).unwrap();
                let b = build_braid(sign, &s, &ctx).unwrap().entries;
                assert!(rel_residual(&lim, &b) < 1e-8, "N={n} d={d} sign={sign}");
            }
        }
    }
}

#[test]
fn dump_has_header_and_column_major_body() {
    let ctx = generic_ctx(2);
    let s = Sector::new(2, 1).unwrap();
    let t = build_fundamental(C64::new(0.3, 0.1), &s, &ctx).unwrap();
    let text = dump(&t, &ctx);
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    assert!(header.starts_with("# N=2 d=1 u=0.3+0.1i lambda=0.55"));
    let body: Vec<C64> = lines
        .map(|l| {
            let mut it = l.split_whitespace().map(|x| x.parse::<f64>().unwrap());
            C64::new(it.next().unwrap(), it.next().unwrap())
        })
        .collect();
    assert_eq!(body.len(), s.dim() * s.dim());
    assert_eq!(body[1], t.entries[(1, 0)]);
}

#[test]
fn mismatched_context_rejected() {
    let ctx = generic_ctx(3);
    let s = Sector::new(2, 0).unwrap();
    assert!(build_fundamental(C64::from(0.2), &s, &ctx).is_err());
    assert!(Sector::new(2, 3).is_err());
}
