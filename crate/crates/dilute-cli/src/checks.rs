//! Check runners. Each returns a batch of report lines; batches are
//! independent and may run on any worker.

use std::f64::consts::PI;
use std::sync::Arc;

use dilute::closure::{
    check_root_symmetries, closure_residual, compute_j, export_tba_diagram, extra_k_range, j_consistency,
    lambda_phase, restricted_set_residual, y_closure_residuals, Grid, YForm,
};
use dilute::fusion::{
    braid_fused_check, generic_u, polynomiality_check, regularity_check, Construction, FusedFamily, RELATIONS,
};
use dilute::linalg::{circle_points, laurent_degree, laurent_eval, laurent_fit, offdiag_mass, rel_commutator, rel_residual, CMat};
use dilute::linkstates::{enumerate_link_states, trinomial};
use dilute::planar::{random_params, verify_local_identity, IDENTITIES};
use dilute::projectors::{
    build_projector, check_projector, mirror_residual, projected_fused_transfer, PrefactorFamily, ProjectorLabel,
};
use dilute::scalars::{braid_eigenvalue, SpectralContext};
use dilute::transfer::{build_braid, build_conjugate, build_fundamental, Sector};
use dilute::{Error, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::catalog::default_tolerance;
use crate::config::RunConfig;
use crate::report::{measure, Params, VerificationReport};

pub type Batch = Box<dyn FnOnce() -> Vec<VerificationReport> + Send>;

/// Deterministic per-batch seed.
pub fn mix(seed: u64, parts: &[u64]) -> u64 {
    let mut h = seed ^ 0x9e37_79b9_7f4a_7c15;
    for &p in parts {
        h = (h ^ p).wrapping_mul(0x0100_0000_01b3).rotate_left(17);
    }
    h
}

fn check(cfg: &RunConfig, id: &str, params: Params, f: impl FnOnce() -> dilute::Result<f64>) -> VerificationReport {
    measure(cfg, id, default_tolerance(id), params, f)
}

fn cplx(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

fn ctx_of(cfg: &RunConfig, n: usize) -> SpectralContext {
    cfg.context(n).expect("contexts are validated before scheduling")
}

fn sectors(cfg: &RunConfig, n: usize, all: bool) -> Vec<usize> {
    if all || n != cfg.n {
        (0..=n).collect()
    } else {
        cfg.d.clone()
    }
}

// ---------------------------------------------------------------- dimension

pub fn dimension(cfg: Arc<RunConfig>, n: usize, all: bool) -> Batch {
    Box::new(move || {
        sectors(&cfg, n, all)
            .into_iter()
            .map(|d| {
                check(&cfg, "dimension", Params::new().with("N", n).with("d", d), || {
                    let basis = enumerate_link_states(n, d)?;
                    Ok((basis.len() as f64 - trinomial(n, d as i64) as f64).abs())
                })
            })
            .collect()
    })
}

// ---------------------------------------------------------------- local

pub fn local(cfg: Arc<RunConfig>, id: &'static str, trials: usize) -> Batch {
    Box::new(move || {
        let index = IDENTITIES.iter().position(|&x| x == id).unwrap_or(0) as u64;
        let mut rng = ChaCha8Rng::seed_from_u64(mix(cfg.seed, &[1, index]));
        let name = format!("local.{id}");
        (0..trials)
            .map(|trial| {
                let p = random_params(&mut rng, id);
                let params = Params::new()
                    .with("trial", trial)
                    .with("lambda", p.lambda)
                    .with("u", cplx(p.u))
                    .with("v", cplx(p.v))
                    .with("m", p.m)
                    .with("family", p.family)
                    .with("sign", p.sign);
                check(&cfg, &name, params, || verify_local_identity(id, &p))
            })
            .collect()
    })
}

// ---------------------------------------------------------------- transfer

fn random_u(rng: &mut impl Rng) -> C64 {
    C64::new(rng.gen_range(-1.5..1.5), rng.gen_range(-0.4..0.4))
}

/// Row-transfer properties of one sector; `full = false` keeps only the
/// braid-limit checks (cheap at larger N).
pub fn transfer(cfg: Arc<RunConfig>, n: usize, d: usize, full: bool) -> Batch {
    Box::new(move || {
        let ctx = ctx_of(&cfg, n);
        let mut out = Vec::new();
        let s = match Sector::new(n, d) {
            Ok(s) => s,
            Err(e) => {
                out.push(check(&cfg, "transfer.commutativity", Params::new().with("N", n).with("d", d), || Err(e)));
                return out;
            }
        };
        let mut rng = ChaCha8Rng::seed_from_u64(mix(cfg.seed, &[2, n as u64, d as u64]));
        let base = Params::new().with("N", n).with("d", d);
        let t = |u: C64| build_fundamental(u, &s, &ctx).map(|t| t.entries);
        if full {
            let (u, v) = (random_u(&mut rng), random_u(&mut rng));
            let p = base.clone().with("u", cplx(u));
            out.push(check(&cfg, "transfer.commutativity", p.clone().with("v", cplx(v)), || {
                Ok(rel_commutator(&t(u)?, &t(v)?))
            }));
            out.push(check(&cfg, "transfer.periodicity", p.clone(), || Ok(rel_residual(&t(u)?, &t(u + PI)?))));
            out.push(check(&cfg, "transfer.crossing", p, || {
                let conj = build_conjugate(u, &s, &ctx)?.entries;
                Ok(rel_residual(&conj, &t(u + ctx.lambda)?))
            }));
            let mut detected = 0usize;
            out.push(check(&cfg, "transfer.laurent-fit", base.clone(), || {
                let at = |z: C64| t(-C64::i() * z.ln());
                let zs = circle_points(4 * n + 1, 0.13);
                let samples: Vec<CMat> = zs.iter().map(|&z| at(z)).collect::<dilute::Result<_>>()?;
                let fit = laurent_fit(&zs, &samples, 2 * n)?;
                detected = laurent_degree(&fit, 1e-9);
                let mut worst = 0.0f64;
                for z in circle_points(3, 0.71) {
                    worst = worst.max(rel_residual(&laurent_eval(&fit, z), &at(z)?));
                }
                Ok(worst)
            }));
            out.push(check(&cfg, "transfer.degree", base.clone().with("detected", detected), || {
                Ok((detected as f64 - 2.0 * n as f64).abs())
            }));
        }
        for sign in [1, -1] {
            let p = base.clone().with("sign", sign);
            let b = build_braid(sign, &s, &ctx).map(|b| b.entries);
            out.push(check(&cfg, "transfer.braid-offdiag", p.clone(), || Ok(offdiag_mass(&b.clone()?))));
            out.push(check(&cfg, "transfer.braid-eigenvalue", p.clone(), || {
                let b = b.clone()?;
                let ev = braid_eigenvalue(d, sign, &ctx);
                Ok((0..b.nrows()).map(|i| (b[(i, i)] - ev).norm()).fold(0.0, f64::max))
            }));
            for m in 1..=cfg.m_max {
                out.push(check(&cfg, "transfer.braid-fused", p.clone().with("m", m), || {
                    let (ev, off) = braid_fused_check(m, sign, &s, &ctx)?;
                    Ok(ev.max(off))
                }));
            }
        }
        out
    })
}

/// The `transfer --dump` text for every configured sector.
pub fn dump(cfg: &RunConfig) -> Result<String, Error> {
    let ctx = ctx_of(cfg, cfg.n);
    let u = C64::new(cfg.u[0], cfg.u[1]);
    let mut s = String::new();
    for &d in &cfg.d {
        let sector = Sector::new(cfg.n, d)?;
        s.push_str(&dilute::transfer::dump(&build_fundamental(u, &sector, &ctx)?, &ctx));
    }
    Ok(s)
}

// ---------------------------------------------------------------- fusion

fn construction(name: &str) -> Construction {
    if name == "determinant" {
        Construction::Determinant
    } else {
        Construction::Recursion
    }
}

fn index_sets(arity: usize, m_max: i32) -> Vec<Vec<i32>> {
    match arity {
        0 => vec![vec![]],
        1 => (0..=m_max).map(|a| vec![a]).collect(),
        _ => (0..=m_max).flat_map(|a| (0..=m_max - a).map(move |b| vec![a, b])).collect(),
    }
}

/// Every relation whose id passes `keep`, at every legal index set.
fn relations(
    cfg: &RunConfig,
    fam: &mut FusedFamily,
    base: &Params,
    keep: impl Fn(&str) -> bool,
    out: &mut Vec<VerificationReport>,
) {
    for rel in RELATIONS.iter().filter(|r| keep(r.id)) {
        for idx in index_sets(rel.params.len(), cfg.m_max) {
            let start = std::time::Instant::now();
            let r = fam.verify_functional_relation(rel.id, &idx);
            if matches!(r, Err(Error::IndexOutOfRange { .. })) {
                continue;
            }
            let elapsed = start.elapsed().as_secs_f64();
            let id = format!("fusion.{}", rel.id);
            let mut rep = check(cfg, &id, base.clone().with("indices", &idx), || r);
            rep.wall_time = elapsed;
            out.push(rep);
        }
    }
}

fn family(cfg: &RunConfig, n: usize, d: usize, cons: Construction) -> dilute::Result<FusedFamily> {
    let ctx = ctx_of(cfg, n);
    let s = Sector::new(n, d)?;
    FusedFamily::generic(ctx, s, cons, mix(cfg.seed, &[3, n as u64, d as u64]), cfg.m_max.max(4))
}

pub fn fusion(cfg: Arc<RunConfig>, n: usize, d: usize) -> Batch {
    Box::new(move || {
        let mut out = Vec::new();
        for cname in &cfg.constructions {
            let base = Params::new().with("N", n).with("d", d).with("construction", cname);
            match family(&cfg, n, d, construction(cname)) {
                Ok(mut fam) => {
                    let base = base.with("u", cplx(fam.u()));
                    relations(&cfg, &mut fam, &base, |id| !id.starts_with("tsystem"), &mut out);
                }
                Err(e) => out.push(check(&cfg, "fusion.determinant", base, || Err(e))),
            }
        }
        let ctx = ctx_of(&cfg, n);
        let g = generic_u(&ctx, mix(cfg.seed, &[4, n as u64]), 2);
        for label in [(2, 0), (1, 1)] {
            let p = Params::new().with("N", n).with("d", d).with("label", label);
            out.push(check(&cfg, "fusion.regularity", p, || regularity_check(&ctx, &Sector::new(n, d)?, label, g)));
        }
        if n <= 3 {
            for (m, k) in [(2, 0), (0, 2), (1, 1), (2, 1)] {
                let mut p = Params::new().with("N", n).with("d", d).with("label", (m, k));
                let r = Sector::new(n, d).and_then(|s| polynomiality_check(&ctx, &s, m, k, Construction::Recursion));
                if let Ok(r) = &r {
                    p = p.with("expected", r.expected).with("detected", r.detected).with("fit", r.residual);
                }
                out.push(check(&cfg, "fusion.degree", p, || {
                    let r = r?;
                    Ok((r.detected as f64 - r.expected as f64).abs())
                }));
            }
        }
        out
    })
}

pub fn tsystem(cfg: Arc<RunConfig>, n: usize, d: usize) -> Batch {
    Box::new(move || {
        let mut out = Vec::new();
        let base = Params::new().with("N", n).with("d", d);
        match family(&cfg, n, d, Construction::Recursion) {
            Ok(mut fam) => {
                let base = base.with("u", cplx(fam.u()));
                relations(&cfg, &mut fam, &base, |id| id.starts_with("tsystem"), &mut out);
            }
            Err(e) => out.push(check(&cfg, "fusion.tsystem", base, || Err(e))),
        }
        out
    })
}

pub fn ysystem(cfg: Arc<RunConfig>, n: usize, d: usize) -> Batch {
    Box::new(move || {
        let seed = mix(cfg.seed, &[5, n as u64, d as u64]);
        let mut fam = match family(&cfg, n, d, Construction::Recursion) {
            Ok(f) => f,
            Err(e) => return vec![check(&cfg, "ysystem", Params::new().with("N", n).with("d", d), || Err(e))],
        };
        (1..=cfg.m_max.min(3))
            .map(|m| {
                let p = Params::new().with("N", n).with("d", d).with("m", m).with("u", cplx(fam.u()));
                check(&cfg, "ysystem", p, || fam.ysystem_residual(m, seed))
            })
            .collect()
    })
}

// ---------------------------------------------------------------- closure

fn grid(name: &str) -> Grid {
    match name {
        "small" => Grid::Small,
        "large" => Grid::Large,
        _ => Grid::Single,
    }
}

pub fn closure(cfg: Arc<RunConfig>, n: usize, d: usize) -> Batch {
    Box::new(move || {
        let root = cfg.root_of_unity().expect("closure is scheduled only at roots of unity");
        let b = root.b as i32;
        let cap = |id: &str| cfg.tolerance(id, default_tolerance(id) * 10f64.powi(b - 2));
        let ctx = ctx_of(&cfg, n);
        let seed = mix(cfg.seed, &[6, n as u64, d as u64]);
        let base = Params::new().with("N", n).with("d", d).with("a", root.a).with("b", root.b);
        let mut out = Vec::new();
        let s = match Sector::new(n, d) {
            Ok(s) => s,
            Err(e) => return vec![check(&cfg, "closure.symmetries", base, || Err(e))],
        };
        out.push(check(&cfg, "closure.symmetries", base.clone(), || check_root_symmetries(&ctx, &s, seed)));
        let j = compute_j(&ctx, &s, 1);
        out.push(check(&cfg, "closure.j-offdiag", base.clone(), || Ok(j.clone()?.offdiag)));
        out.push(check(&cfg, "closure.j-eigenvalue", base.clone(), || {
            let j = j.clone()?;
            Ok((j.measured - j.expected).norm())
        }));
        let consistency = j_consistency(&ctx, &s, seed);
        out.push(check(&cfg, "closure.j-independence", base.clone(), || Ok(consistency.clone()?.0)));
        out.push(check(&cfg, "closure.j-centrality", base.clone(), || Ok(consistency.clone()?.1)));
        out.push(check(&cfg, "closure.lambda", base.clone(), || {
            let j = j.clone()?;
            let sg = ctx.sigma();
            let e = lambda_phase(j.measured, root, sg);
            Ok((e + 1.0 + e.inv() - sg.powi(root.a as i32) * j.measured).norm())
        }));
        let g = grid(&cfg.grid);
        for id in ["closure-a", "closure-b"] {
            let name = format!("closure.{id}");
            let mut rep = check(&cfg, &name, base.clone().with("grid", &cfg.grid), || {
                closure_residual(&ctx, &s, id, None, g, seed)
            });
            rep.tolerance = cap(&name);
            rep.pass = rep.residual <= rep.tolerance;
            out.push(rep);
        }
        for id in ["extra-a", "extra-b"] {
            let name = format!("closure.{id}");
            for k in extra_k_range(b) {
                let mut rep = check(&cfg, &name, base.clone().with("k", k).with("grid", &cfg.grid), || {
                    closure_residual(&ctx, &s, id, Some(k), g, seed)
                });
                rep.tolerance = cap(&name);
                rep.pass = rep.residual <= rep.tolerance;
                out.push(rep);
            }
        }
        if b >= 3 {
            out.push(check(&cfg, "closure.quartic", base.clone(), || {
                closure_residual(&ctx, &s, "quartic", None, Grid::Single, seed)
            }));
        }
        let mut rep = check(&cfg, "closure.restricted", base.clone(), || restricted_set_residual(&ctx, &s, seed));
        rep.tolerance = cap("closure.restricted");
        rep.pass = rep.residual <= rep.tolerance;
        out.push(rep);
        out.push(check(&cfg, "closure.y-raw", base.clone(), || {
            Ok(y_closure_residuals(&ctx, &s, YForm::Raw, seed)?[0])
        }));
        match y_closure_residuals(&ctx, &s, YForm::Product, seed) {
            Ok(v) => {
                for (i, r) in v.into_iter().enumerate() {
                    out.push(check(&cfg, "closure.y-product", base.clone().with("relation", i + 1), || Ok(r)));
                }
            }
            Err(e) => out.push(check(&cfg, "closure.y-product", base.clone(), || Err(e))),
        }
        out
    })
}

pub fn tba(cfg: Arc<RunConfig>) -> Batch {
    Box::new(move || {
        let root = cfg.root_of_unity().expect("tba is scheduled only at roots of unity");
        let (p, pp) = root.to_pp();
        let diagram = export_tba_diagram(root);
        let expect = if p % 2 == 0 { pp + 2 } else { 2 * pp + 2 };
        let base = Params::new().with("p", p).with("pp", pp);
        vec![
            check(&cfg, "tba.nodes", base.clone().with("nodes", diagram.nodes.len()).with("expected", expect), || {
                Ok((diagram.nodes.len() as f64 - expect as f64).abs())
            }),
            check(&cfg, "tba.y-self-edge", base.with("multiplicity", diagram.self_edge_multiplicity("y")), || {
                Ok((diagram.self_edge_multiplicity("y") as f64 - 4.0).abs())
            }),
        ]
    })
}

// ---------------------------------------------------------------- projectors

fn prefactor_family(name: &str) -> PrefactorFamily {
    if name == "alternate" {
        PrefactorFamily::Alternate
    } else {
        PrefactorFamily::Primary
    }
}

pub fn projector_labels(m_max: usize) -> Vec<ProjectorLabel> {
    use ProjectorLabel::*;
    let mut v = Vec::new();
    for m in 1..=m_max {
        v.push(Symmetric(m));
        v.push(ConjugateSymmetric(m));
    }
    for m in 1..m_max {
        v.push(Hook(m));
    }
    for k in 2..m_max {
        v.push(ConjugateHook(k));
    }
    v
}

pub fn projector(cfg: Arc<RunConfig>, label: ProjectorLabel, fam_name: String) -> Batch {
    Box::new(move || {
        let family = prefactor_family(&fam_name);
        let base = Params::new().with("label", label.pair()).with("family", &fam_name).with("lambda", cfg.lambda);
        let report = build_projector(label, family, cfg.lambda).and_then(|p| check_projector(&p));
        let mut out = Vec::new();
        for (id, pick) in [
            ("projector.idempotency", 0usize),
            ("projector.annihilation", 1),
            ("projector.absorption", 2),
        ] {
            let r = report.clone();
            let p = match &r {
                Ok(rep) => base.clone().with("terms", rep.terms),
                Err(_) => base.clone(),
            };
            out.push(check(&cfg, id, p, || {
                let r = r?;
                Ok([r.idempotency, r.annihilation, r.absorption][pick])
            }));
        }
        if let ProjectorLabel::ConjugateSymmetric(k) | ProjectorLabel::ConjugateHook(k) = label {
            let hook = matches!(label, ProjectorLabel::ConjugateHook(_));
            out.push(check(&cfg, "projector.mirror", base, || mirror_residual(k, hook, family, cfg.lambda)));
        }
        out
    })
}

pub fn projected_transfer(cfg: Arc<RunConfig>, n: usize, d: usize, fam_name: String) -> Batch {
    Box::new(move || {
        let family = prefactor_family(&fam_name);
        let ctx = ctx_of(&cfg, n);
        let mut out = Vec::new();
        let fam = Sector::new(n, d).and_then(|s| {
            FusedFamily::generic(ctx.clone(), s.clone(), Construction::Recursion, mix(cfg.seed, &[7, n as u64]), 4)
                .map(|f| (s, f))
        });
        let (s, mut fam) = match fam {
            Ok(x) => x,
            Err(e) => return vec![check(&cfg, "projector.transfer", Params::new().with("N", n).with("d", d), || Err(e))],
        };
        let u = fam.u();
        for (label, m, k) in [
            (ProjectorLabel::Symmetric(1), 1, 0),
            (ProjectorLabel::Symmetric(2), 2, 0),
            (ProjectorLabel::Hook(1), 1, 1),
        ] {
            let p = Params::new()
                .with("N", n)
                .with("d", d)
                .with("label", (m, k))
                .with("family", &fam_name)
                .with("u", cplx(u));
            out.push(check(&cfg, "projector.transfer", p, || {
                let t = projected_fused_transfer(label, family, u, &s, &ctx)?;
                Ok(rel_residual(&t.entries, &fam.fused(m, k, 0)?))
            }));
        }
        out
    })
}
