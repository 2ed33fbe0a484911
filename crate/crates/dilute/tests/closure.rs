mod common;

use common::root_ctx;
use dilute::closure::*;
use dilute::scalars::{j_eigenvalue, Normalization, RootOfUnity, SpectralContext};
use dilute::transfer::Sector;
use dilute::{Error, C64};

const ROOTS: [(u32, u32); 5] = [(1, 2), (1, 3), (1, 4), (3, 4), (2, 5)];

fn closure_cap(b: u32) -> f64 {
    1e-8 * 10f64.powi(b as i32 - 2)
}

fn each_sector(mut f: impl FnMut(u32, u32, usize, &SpectralContext, &Sector)) {
    for (a, b) in ROOTS {
        for n in 1..=3 {
            let ctx = root_ctx(n, a, b);
            for d in 0..=n {
                f(a, b, n, &ctx, &Sector::new(n, d).unwrap());
            }
        }
    }
}

#[test]
fn symmetries_under_two_b_shifts() {
    each_sector(|a, b, n, ctx, s| {
        let r = check_root_symmetries(ctx, s, 5).unwrap();
        assert!(r < 1e-9, "({a},{b}) N={n} d={}: {r:e}", s.d());
    });
}

#[test]
fn j_is_scalar_central_and_constant() {
    each_sector(|a, b, n, ctx, s| {
        let root = RootOfUnity::new(a, b).unwrap();
        let j = compute_j(ctx, s, 1).unwrap();
        assert!(j.offdiag < 1e-9);
        assert!((j.measured - j_eigenvalue(s.d(), root, ctx)).norm() < 1e-9);
        let (independence, centrality) = j_consistency(ctx, s, 3).unwrap();
        assert!(independence < 1e-9 && centrality < 1e-9, "({a},{b}) N={n} d={}", s.d());
        // e^{iΛ} + 1 + e^{−iΛ} = σ^a J
        let sg = ctx.sigma();
        let e = lambda_phase(j.measured, root, sg);
        let sa = sg.powi(a as i32);
        assert!((e + 1.0 + e.inv() - sa * j.measured).norm() < 1e-9);
        assert!((0.0..=std::f64::consts::PI + 1e-12).contains(&e.arg()));
    });
}

#[test]
fn j_eigenvalue_example() {
    let root = RootOfUnity::new(1, 4).unwrap();
    let om = C64::from_polar(1.0, std::f64::consts::PI / 5.0);
    for n in 1..=3 {
        let ctx = SpectralContext::root_of_unity(n, root, Normalization::Standard)
            .unwrap()
            .with_xi(common::xi(n))
            .unwrap()
            .with_omega(om);
        let j = compute_j(&ctx, &Sector::new(n, 1).unwrap(), 1).unwrap();
        assert!((j.measured - j_eigenvalue(1, root, &ctx)).norm() < 1e-9);
    }
}

#[test]
fn closure_relations() {
    each_sector(|a, b, n, ctx, s| {
        for id in ["closure-a", "closure-b"] {
            let r = closure_residual(ctx, s, id, None, Grid::Single, 7).unwrap();
            assert!(r < closure_cap(b), "{id} ({a},{b}) N={n} d={}: {r:e}", s.d());
        }
    });
}

#[test]
fn extra_closure_relations_every_k() {
    each_sector(|a, b, n, ctx, s| {
        for id in ["extra-a", "extra-b"] {
            for k in extra_k_range(b as i32) {
                let r = closure_residual(ctx, s, id, Some(k), Grid::Single, 7).unwrap();
                assert!(r < closure_cap(b), "{id}[{k}] ({a},{b}) N={n} d={}: {r:e}", s.d());
            }
        }
    });
}

#[test]
fn closure_on_interpolation_grids() {
    for (a, b) in [(1, 2), (1, 3), (1, 4)] {
        for n in 1..=3 {
            let ctx = root_ctx(n, a, b);
            for d in 0..=n {
                let s = Sector::new(n, d).unwrap();
                for grid in [Grid::Small, Grid::Large] {
                    for id in ["closure-a", "closure-b"] {
                        let r = closure_residual(&ctx, &s, id, None, grid, 1).unwrap();
                        assert!(r < closure_cap(b), "{id} {grid:?} ({a},{b}) N={n} d={d}: {r:e}");
                    }
                }
            }
        }
    }
    // the worked examples
    let s = Sector::new(3, 0).unwrap();
    assert!(closure_residual(&root_ctx(3, 1, 2), &s, "closure-a", None, Grid::Single, 2).unwrap() < 1e-8);
    let s2 = Sector::new(2, 1).unwrap();
    for id in ["closure-a", "closure-b"] {
        assert!(closure_residual(&root_ctx(2, 1, 3), &s2, id, None, Grid::Single, 2).unwrap() < 1e-8);
    }
    assert!(closure_residual(&root_ctx(3, 1, 4), &s, "closure-a", None, Grid::Large, 2).unwrap() < 1e-7);
}

#[test]
fn extra_k_outside_range_rejected() {
    let ctx = root_ctx(2, 1, 4);
    let s = Sector::new(2, 0).unwrap();
    assert!(matches!(
        closure_residual(&ctx, &s, "extra-a", Some(4), Grid::Single, 7),
        Err(Error::IndexOutOfRange { .. })
    ));
    assert!(matches!(
        closure_residual(&ctx, &s, "extra-a", Some(0), Grid::Single, 7),
        Err(Error::IndexOutOfRange { .. })
    ));
}

#[test]
fn quartic_relation() {
    for (a, b) in [(1, 3), (1, 4), (3, 4), (2, 5)] {
        for n in 1..=3 {
            let ctx = root_ctx(n, a, b);
            for d in 0..=n {
                let s = Sector::new(n, d).unwrap();
                let r = closure_residual(&ctx, &s, "quartic", None, Grid::Single, 7).unwrap();
                assert!(r < 1e-6, "({a},{b}) N={n} d={d}: {r:e}");
            }
        }
    }
    let s = Sector::new(2, 0).unwrap();
    assert!(matches!(
        closure_residual(&root_ctx(2, 1, 2), &s, "quartic", None, Grid::Single, 7),
        Err(Error::IndexOutOfRange { .. })
    ));
}

#[test]
fn restricted_set_suffices() {
    each_sector(|a, b, n, ctx, s| {
        let r = restricted_set_residual(ctx, s, 9).unwrap();
        assert!(r < 1e-7, "({a},{b}) N={n} d={}: {r:e}", s.d());
    });
}

#[test]
fn y_system_closure() {
    each_sector(|a, b, n, ctx, s| {
        let raw = y_closure_residuals(ctx, s, YForm::Raw, 9).unwrap();
        let product = y_closure_residuals(ctx, s, YForm::Product, 9).unwrap();
        assert_eq!((raw.len(), product.len()), (1, 3));
        for r in raw.iter().chain(&product) {
            assert!(*r < 1e-6, "({a},{b}) N={n} d={}: raw {raw:?} product {product:?}", s.d());
        }
        // the first product relation is the raw one rewritten
        assert!((raw[0] - product[0]).abs() < 1e-9);
    });
}

#[test]
fn closure_needs_root_of_unity() {
    let ctx = common::generic_ctx(2);
    let s = Sector::new(2, 0).unwrap();
    assert!(matches!(compute_j(&ctx, &s, 1), Err(Error::NotRootOfUnity)));
    assert!(matches!(y_closure_residual(&ctx, &s, YForm::Raw, 1), Err(Error::NotRootOfUnity)));
}

#[test]
fn tba_diagram_shape() {
    for (p, pp) in [(1u32, 2u32), (2, 3), (3, 4), (1, 3), (2, 5), (3, 5)] {
        let root = RootOfUnity::from_pp(p, pp).unwrap();
        let d = export_tba_diagram(root);
        let expect = if p % 2 == 0 { pp + 2 } else { 2 * pp + 2 };
        assert_eq!(d.nodes.len() as u32, expect, "(p,p')=({p},{pp})");
        assert_eq!(d.nodes.len() as u32, root.b + 2);
        assert_eq!(d.self_edge_multiplicity("y"), 4);
        assert_eq!(d.nodes.iter().filter(|n| n.label == "x").count(), 3);
        let text = d.to_text();
        assert_eq!(text.lines().filter(|l| l.starts_with("node ")).count(), d.nodes.len());
        assert!(text.contains("mixed 2"));
    }
}
