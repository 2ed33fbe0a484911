//! Root-of-unity structure: the `2b` periodicities, the central tangle `J`,
//! the closure relations of the fusion hierarchy, the quartic relation, the
//! closed Y-system and its TBA diagram.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fusion::{braid_fused, generic_u, scalar_residual, Construction, FusedFamily};
use crate::linalg::{offdiag_mass, rel_residual, scaled, CMat};
use crate::scalars::{j_eigenvalue, RootOfUnity, SpectralContext};
use crate::transfer::Sector;

/// Tolerance on the scalar-ness and eigenvalue of `J`.
const J_TOL: f64 = 1e-9;

fn root_of(ctx: &SpectralContext) -> Result<RootOfUnity> {
    ctx.root.ok_or(Error::NotRootOfUnity)
}

fn pm(sigma: f64, p: i64) -> C64 {
    C64::from(if p.rem_euclid(2) == 0 { 1.0 } else { sigma })
}

/// Largest residual over the four `2b`-periodicities, at a seeded generic
/// base point and shifts `k ∈ [−3, 3]`.
pub fn check_root_symmetries(ctx: &SpectralContext, sector: &Sector, seed: u64) -> Result<f64> {
    let root = root_of(ctx)?;
    let b = root.b as i32;
    let sign = pm(ctx.sigma(), (root.b - root.a) as i64);
    let mut fam = FusedFamily::generic(ctx.clone(), sector.clone(), Construction::Recursion, seed, 2)?;
    let mut worst = 0.0f64;
    for k in -3..=3 {
        worst = worst.max(scalar_residual(fam.f(k + 2 * b), sign * fam.f(k)));
        for (m, n, factor) in [(1, 0, 1.0.into()), (2, 0, 1.0.into()), (0, 1, 1.0.into()), (0, 2, 1.0.into()), (1, 1, sign)] {
            let a = fam.fused(m, n, k + 2 * b)?;
            let c = scaled(&fam.fused(m, n, k)?, factor);
            worst = worst.max(rel_residual(&a, &c));
        }
    }
    Ok(worst)
}

/// `J` on one sector with its validation data.
#[derive(Clone, Debug)]
pub struct JTangle {
    pub matrix: CMat,
    /// Mean diagonal entry.
    pub measured: C64,
    pub expected: C64,
    pub offdiag: f64,
}

/// `J = σ^{−a}(T^{b,0}_{∞} − T^{b−2,1}_{∞} + T^{b−3,0}_{∞})` from the braid
/// hierarchy, checked to be scalar with the closed-form eigenvalue.
pub fn compute_j(ctx: &SpectralContext, sector: &Sector, sign: i32) -> Result<JTangle> {
    let root = root_of(ctx)?;
    let b = root.b as i32;
    let t = braid_fused(b, 0, sign, sector, ctx)? - braid_fused(b - 2, 1, sign, sector, ctx)?
        + braid_fused(b - 3, 0, sign, sector, ctx)?;
    let matrix = scaled(&t, pm(ctx.sigma(), root.a as i64).inv());
    let dim = matrix.nrows();
    let measured = (0..dim).map(|i| matrix[(i, i)]).sum::<C64>() / dim as f64;
    let expected = j_eigenvalue(sector.d(), root, ctx);
    let offdiag = offdiag_mass(&matrix);
    let spread = (0..dim).map(|i| (matrix[(i, i)] - expected).norm()).fold(0.0, f64::max);
    if offdiag > J_TOL || spread > J_TOL * expected.norm().max(1.0) {
        return Err(Error::EigenvalueMismatch {
            measured: format!("{measured} (off-diagonal {offdiag:e})"),
            expected: format!("{expected}"),
        });
    }
    Ok(JTangle { matrix, measured, expected, offdiag })
}

/// `e^{iΛ}` from `σ^a J = e^{iΛ} + 1 + e^{−iΛ}`, on the branch with
/// `Re Λ ∈ [0, π]`.
pub fn lambda_phase(j_value: C64, root: RootOfUnity, sigma: f64) -> C64 {
    let c = pm(sigma, root.a as i64) * j_value - 1.0;
    // q² − c q + 1 = 0
    let disc = (c * c - 4.0).sqrt();
    let (q1, q2) = ((c + disc) / 2.0, (c - disc) / 2.0);
    let re_lambda = |q: C64| q.arg();
    if (0.0..=std::f64::consts::PI).contains(&re_lambda(q1)) {
        q1
    } else {
        q2
    }
}

/// A linear closure relation: `coef · T^{lhs} = Σ coef_i · [J] · T^{label_i}`,
/// with `None` standing for the identity.
#[derive(Clone, Debug)]
pub struct LinearRelation {
    pub lhs_coef: C64,
    pub lhs: (i32, i32, i32),
    pub rhs: Vec<Term>,
}

#[derive(Clone, Copy, Debug)]
pub struct Term {
    pub coef: C64,
    pub times_j: bool,
    pub label: Option<(i32, i32, i32)>,
}

/// Closure relations that the verifier knows, with their legal `k` range.
pub const CLOSURE_IDS: &[(&str, &str)] = &[
    ("closure-a", "T^{b,0} through the restricted set (b = 2, 3, ≥4 forms)"),
    ("closure-b", "T^{0,b} through the restricted set (b = 2, 3, ≥4 forms)"),
    ("extra-a", "T^{b,k}, 1 ≤ k ≤ b−1"),
    ("extra-b", "T^{k,b}, 1 ≤ k ≤ b−1"),
    ("quartic", "quartic relation among T^{b−1,0}, T^{b−2,0} and their folds (b ≥ 3)"),
];

/// Legal `k` values of `extra-a` / `extra-b` for a given `b`.
pub fn extra_k_range(b: i32) -> std::ops::RangeInclusive<i32> {
    1..=(b - 1)
}

/// The linear relation `id` at offset `k`, shifted to base `u + sλ`.
pub fn linear_relation(
    fam: &mut FusedFamily,
    root: RootOfUnity,
    id: &str,
    k: Option<i32>,
    s: i32,
) -> Result<LinearRelation> {
    let (a, b) = (root.a as i64, root.b as i32);
    let sg = fam.sigma();
    let p = |e: i64| pm(sg, e);
    let bma = b as i64 - a;
    let one = C64::from(1.0);
    let mut f = |ks: &[i32]| -> C64 { ks.iter().map(|&j| fam.f(j + s)).product() };
    let t = |m: i32, n: i32, k: i32| Some((m, n, k + s));
    let term = |coef: C64, times_j: bool, label| Term { coef, times_j, label };
    let bad = |detail: String| Error::IndexOutOfRange { id: id.to_string(), detail };
    let rel = match id {
        "closure-a" | "closure-b" => {
            if k.is_some() {
                return Err(bad("takes no k".into()));
            }
            let first = id == "closure-a";
            match (b, first) {
                (2, true) => LinearRelation {
                    lhs_coef: one,
                    lhs: (2, 0, s),
                    rhs: vec![term(one, false, t(0, 1, 2)), term(f(&[-3, -2]), true, None)],
                },
                (2, false) => LinearRelation {
                    lhs_coef: one,
                    lhs: (0, 2, s),
                    rhs: vec![term(one, false, t(1, 0, 0)), term(f(&[-2, -1]), true, None)],
                },
                (3, true) => LinearRelation {
                    lhs_coef: f(&[-1]),
                    lhs: (3, 0, s),
                    rhs: vec![
                        term(p(a), false, t(1, 1, 2)),
                        term(-sg * f(&[-5, -4, -3]), false, None),
                        term(f(&[-3, -2, -1]), true, None),
                    ],
                },
                (3, false) => LinearRelation {
                    lhs_coef: f(&[-3]),
                    lhs: (0, 3, s),
                    rhs: vec![
                        term(sg.into(), false, t(1, 1, 0)),
                        term(-sg * f(&[-1, 0, 1]), false, None),
                        term(f(&[-3, -2, -1]), true, None),
                    ],
                },
                (_, true) => LinearRelation {
                    lhs_coef: f(&[-1]),
                    lhs: (b, 0, s),
                    rhs: vec![
                        term(p(bma - 1), false, t(b - 2, 1, 2)),
                        term(-sg * f(&[-3]), false, t(b - 3, 0, 4)),
                        term(f(&[-3, -2, -1]), true, None),
                    ],
                },
                (_, false) => LinearRelation {
                    lhs_coef: f(&[-3]),
                    lhs: (0, b, s),
                    rhs: vec![
                        term(sg.into(), false, t(1, b - 2, 0)),
                        term(-sg * f(&[-1]), false, t(0, b - 3, 2)),
                        term(f(&[-3, -2, -1]), true, None),
                    ],
                },
            }
        }
        "extra-a" | "extra-b" => {
            let k = k.ok_or_else(|| bad("requires k".into()))?;
            if !extra_k_range(b).contains(&k) {
                return Err(bad(format!("k = {k} outside 1..={}", b - 1)));
            }
            let first = id == "extra-a";
            let sgc = C64::from(sg);
            if k <= b - 4 {
                if first {
                    LinearRelation {
                        lhs_coef: one,
                        lhs: (b, k, s),
                        rhs: vec![
                            term(sgc, false, t(b - 2, k + 1, 2)),
                            term(-p(bma - 1) * f(&[-3]), false, t(b - 3 - k, 0, 2 * k + 4)),
                            term(p(bma) * f(&[-3]), true, t(0, k, 0)),
                        ],
                    }
                } else {
                    LinearRelation {
                        lhs_coef: one,
                        lhs: (k, b, s),
                        rhs: vec![
                            term(sgc, false, t(k + 1, b - 2, 0)),
                            term(-sgc * f(&[2 * k - 1]), false, t(0, b - 3 - k, 2 * k + 2)),
                            term(f(&[2 * k - 1]), true, t(k, 0, 0)),
                        ],
                    }
                }
            } else if k == b - 3 {
                if first {
                    LinearRelation {
                        lhs_coef: one,
                        lhs: (b, b - 3, s),
                        rhs: vec![
                            term(sgc, false, t(b - 2, b - 2, 2)),
                            term(-p(bma - 1) * f(&[-5, -4, -3]), false, None),
                            term(p(bma) * f(&[-3]), true, t(0, b - 3, 0)),
                        ],
                    }
                } else {
                    LinearRelation {
                        lhs_coef: one,
                        lhs: (b - 3, b, s),
                        rhs: vec![
                            term(sgc, false, t(b - 2, b - 2, 0)),
                            term(-p(bma - 1) * f(&[-7, -6, -5]), false, None),
                            term(p(bma) * f(&[-7]), true, t(b - 3, 0, 0)),
                        ],
                    }
                }
            } else if k == b - 2 {
                if first {
                    LinearRelation {
                        lhs_coef: one,
                        lhs: (b, b - 2, s),
                        rhs: vec![
                            term(sgc, false, t(b - 2, b - 1, 2)),
                            term(p(bma) * f(&[-3]), true, t(0, b - 2, 0)),
                        ],
                    }
                } else {
                    LinearRelation {
                        lhs_coef: one,
                        lhs: (b - 2, b, s),
                        rhs: vec![
                            term(sgc, false, t(b - 1, b - 2, 0)),
                            term(p(bma) * f(&[-5]), true, t(b - 2, 0, 0)),
                        ],
                    }
                }
            } else if b == 2 {
                // T^{0,2} and T^{2,0} are boundary labels here and carry an
                // extra f_{−1}.
                if first {
                    LinearRelation {
                        lhs_coef: one,
                        lhs: (2, 1, s),
                        rhs: vec![
                            term(sgc * f(&[-1]), false, t(0, 2, 2)),
                            term(sgc * f(&[-3]), true, t(0, 1, 0)),
                        ],
                    }
                } else {
                    LinearRelation {
                        lhs_coef: one,
                        lhs: (1, 2, s),
                        rhs: vec![
                            term(f(&[-1]), false, t(2, 0, 0)),
                            term(sgc * f(&[-3]), true, t(1, 0, 0)),
                        ],
                    }
                }
            } else if first {
                LinearRelation {
                    lhs_coef: one,
                    lhs: (b, b - 1, s),
                    rhs: vec![
                        term(sgc, false, t(b - 2, b, 2)),
                        term(p(bma) * f(&[-3]), true, t(0, b - 1, 0)),
                    ],
                }
            } else {
                LinearRelation {
                    lhs_coef: one,
                    lhs: (b - 1, b, s),
                    rhs: vec![
                        term(sgc, false, t(b, b - 2, 0)),
                        term(p(bma) * f(&[-3]), true, t(b - 1, 0, 0)),
                    ],
                }
            }
        }
        _ => return Err(Error::UnknownIdentity(id.to_string())),
    };
    Ok(rel)
}

fn eval_terms(fam: &mut FusedFamily, j: &CMat, terms: &[Term]) -> Result<CMat> {
    let mut acc = scaled(&fam.identity(), C64::from(0.0));
    for term in terms {
        let base = match term.label {
            Some((m, n, k)) => fam.fused(m, n, k)?,
            None => fam.identity(),
        };
        let base = if term.times_j { j * base } else { base };
        acc += scaled(&base, term.coef);
    }
    Ok(acc)
}

/// Both sides of closure relation `id` (or the quartic relation) at the
/// family's base point.
pub fn closure_sides(fam: &mut FusedFamily, j: &CMat, id: &str, k: Option<i32>) -> Result<(CMat, CMat)> {
    let root = root_of(fam.ctx())?;
    if id == "quartic" {
        if k.is_some() {
            return Err(Error::IndexOutOfRange { id: id.into(), detail: "takes no k".into() });
        }
        if root.b < 3 {
            return Err(Error::IndexOutOfRange { id: id.into(), detail: "needs b ≥ 3".into() });
        }
        return quartic_sides(fam, j, root);
    }
    let rel = linear_relation(fam, root, id, k, 0)?;
    let (m, n, s) = rel.lhs;
    let lhs = scaled(&fam.fused(m, n, s)?, rel.lhs_coef);
    let rhs = eval_terms(fam, j, &rel.rhs)?;
    Ok((lhs, rhs))
}

fn quartic_sides(fam: &mut FusedFamily, j: &CMat, root: RootOfUnity) -> Result<(CMat, CMat)> {
    let b = root.b as i32;
    let sg = fam.sigma();
    let a = root.a as i64;
    let top0 = fam.fused(b - 1, 0, 0)?;
    let top2 = fam.fused(b - 1, 0, 2)?;
    let fold_top = fam.fused(0, b - 1, 0)?;
    let low2 = fam.fused(b - 2, 0, 2)?;
    let fold_low0 = fam.fused(0, b - 2, 0)?;
    let fold_low2 = fam.fused(0, b - 2, 2)?;
    let lhs = (&top0 * &fold_top - &low2 * &fold_low0) * (&top2 * &fold_top - &low2 * &fold_low2);
    let cube = |x: &CMat| x * x * x;
    let rhs = scaled(&cube(&fold_top), pm(sg, a - 1))
        + j * &fold_top * &fold_top * &low2
        + scaled(&(j * &fold_top * &low2 * &low2), sg.into())
        + scaled(&cube(&low2), pm(sg, a));
    let g = fam.f(-3) * fam.f(-2);
    Ok((lhs, scaled(&rhs, g)))
}

/// Evaluation points for a closure check.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Grid {
    /// One seeded generic base point.
    Single,
    /// `4N + 1` points on a circle, enough for a degree-`2N` identity.
    Small,
    /// `6N + 1` points on a circle, enough for a degree-`3N` identity.
    Large,
}

fn grid_points(ctx: &SpectralContext, grid: Grid, seed: u64) -> Vec<C64> {
    let count = match grid {
        Grid::Single => return vec![generic_u(ctx, seed, ctx.root.map_or(4, |r| r.b as i32 + 2))],
        Grid::Small => 4 * ctx.n + 1,
        Grid::Large => 6 * ctx.n + 1,
    };
    let phase = 0.29 + 0.01 * (seed % 17) as f64;
    (0..count)
        .map(|i| C64::new(phase + std::f64::consts::TAU * i as f64 / count as f64, 0.23))
        .collect()
}

/// Largest relative residual of closure relation `id` over `grid`.
pub fn closure_residual(
    ctx: &SpectralContext,
    sector: &Sector,
    id: &str,
    k: Option<i32>,
    grid: Grid,
    seed: u64,
) -> Result<f64> {
    let j = compute_j(ctx, sector, 1)?.matrix;
    let mut worst = 0.0f64;
    for u in grid_points(ctx, grid, seed) {
        let mut fam = FusedFamily::new(ctx.clone(), sector.clone(), u, Construction::Recursion)?;
        let (l, r) = closure_sides(&mut fam, &j, id, k)?;
        worst = worst.max(rel_residual(&l, &r));
    }
    Ok(worst)
}

/// `T^{m,n}_k` rebuilt through closure relations from labels inside the
/// rhombus `0 ≤ m, n ≤ b − 1` only.
pub fn restricted_expansion(fam: &mut FusedFamily, j: &CMat, m: i32, n: i32, k: i32) -> Result<CMat> {
    let root = root_of(fam.ctx())?;
    let b = root.b as i32;
    if m < b && n < b {
        return fam.fused(m, n, k);
    }
    let (id, kk) = match (m, n) {
        (m, 0) if m == b => ("closure-a", None),
        (0, n) if n == b => ("closure-b", None),
        (m, n) if m == b && n < b => ("extra-a", Some(n)),
        (m, n) if n == b && m < b => ("extra-b", Some(m)),
        _ => {
            return Err(Error::IndexOutOfRange {
                id: "restricted-expansion".into(),
                detail: format!("({m},{n}) lies more than one step outside the rhombus"),
            })
        }
    };
    let rel = linear_relation(fam, root, id, kk, k)?;
    let mut acc = scaled(&fam.identity(), C64::from(0.0));
    for term in &rel.rhs {
        let base = match term.label {
            Some((m2, n2, k2)) => restricted_expansion(fam, j, m2, n2, k2)?,
            None => fam.identity(),
        };
        let base = if term.times_j { j * base } else { base };
        acc += scaled(&base, term.coef);
    }
    Ok(scaled(&acc, rel.lhs_coef.inv()))
}

/// Largest residual between direct builds and restricted-set expansions of
/// every label `(b, k)` and `(k, b)`, `0 ≤ k ≤ b − 1`.
pub fn restricted_set_residual(ctx: &SpectralContext, sector: &Sector, seed: u64) -> Result<f64> {
    let root = root_of(ctx)?;
    let b = root.b as i32;
    let j = compute_j(ctx, sector, 1)?.matrix;
    let mut fam = FusedFamily::generic(ctx.clone(), sector.clone(), Construction::Recursion, seed, b + 2)?;
    let mut worst = 0.0f64;
    for k in 0..b {
        for (m, n) in [(b, k), (k, b)] {
            let direct = fam.fused(m, n, 0)?;
            let expanded = restricted_expansion(&mut fam, &j, m, n, 0)?;
            worst = worst.max(rel_residual(&direct, &expanded));
        }
    }
    Ok(worst)
}

/// Largest relative difference between `J` built at two base points and
/// its relative commutator with transfer matrices, as `(u_independence,
/// centrality)`. `J` is built from both braid limits and also recovered
/// from the `closure-a` relation at two generic points. The recovery
/// divides through the `f_k` of the recursion, so the two points are the
/// best conditioned (largest `min |f_k| / max |f_k|`) of eight seeded
/// candidates.
pub fn j_consistency(ctx: &SpectralContext, sector: &Sector, seed: u64) -> Result<(f64, f64)> {
    let root = root_of(ctx)?;
    let max_label = root.b as i32 + 2;
    let jt = compute_j(ctx, sector, 1)?;
    let jm = compute_j(ctx, sector, -1)?;
    let mut independence = rel_residual(&jt.matrix, &jm.matrix);
    let conditioning = |u: C64| {
        let f: Vec<f64> = (-5..=2 * max_label + 2).map(|k| ctx.f(u, k).norm()).collect();
        f.iter().cloned().fold(f64::INFINITY, f64::min) / f.iter().cloned().fold(0.0, f64::max)
    };
    let mut us: Vec<C64> = (0..8).map(|k| generic_u(ctx, seed.wrapping_add(k), max_label)).collect();
    us.sort_by(|a, b| conditioning(*b).total_cmp(&conditioning(*a)));
    let mut central = 0.0f64;
    for &u in &us[..2] {
        let mut fam = FusedFamily::new(ctx.clone(), sector.clone(), u, Construction::Recursion)?;
        let recovered = recover_j(&mut fam, root)?;
        independence = independence.max(rel_residual(&recovered, &jt.matrix));
        for (m, n) in [(1, 0), (0, 1), (1, 1)] {
            central = central.max(crate::linalg::rel_commutator(&jt.matrix, &fam.fused(m, n, 0)?));
        }
    }
    Ok((independence, central))
}

/// Solves the `closure-a` relation for its `J` term at the family's base.
fn recover_j(fam: &mut FusedFamily, root: RootOfUnity) -> Result<CMat> {
    let zero = scaled(&fam.identity(), C64::from(0.0));
    let rel = linear_relation(fam, root, "closure-a", None, 0)?;
    let (m, n, s) = rel.lhs;
    let mut rest = scaled(&fam.fused(m, n, s)?, rel.lhs_coef);
    let mut jcoef = C64::from(0.0);
    for term in &rel.rhs {
        if term.times_j && term.label.is_none() {
            jcoef += term.coef;
        } else {
            rest -= eval_terms(fam, &zero, &[*term])?;
        }
    }
    Ok(scaled(&rest, jcoef.inv()))
}

/// Which form of the Y-system closure to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum YForm {
    /// The closure written with `T^{b−2,0}_2 / T^{b−1,0}_1` ratios.
    Raw,
    /// The product form with `x`, `y` and `e^{±iΛ}` (all three relations).
    Product,
}

/// Eigenvalue sequences `x_k = σ T^{b−2,0}_{k+2} / T^{b−1,0}_{k+1}` and
/// `y_k = −x_{k−1} x_k`, indexed `k = −1..=3`.
#[derive(Clone, Debug)]
pub struct XYFunctions {
    x: Vec<Vec<C64>>,
    y: Vec<Vec<C64>>,
}

const XY_MIN: i32 = -1;

impl XYFunctions {
    pub fn build(fam: &mut FusedFamily, seed: u64) -> Result<Self> {
        let b = root_of(fam.ctx())?.b as i32;
        let sg = C64::from(fam.sigma());
        let mut x: Vec<Vec<C64>> = Vec::new();
        for k in XY_MIN..=3 {
            let num = fam.eigenvalues(b - 2, 0, k + 2, seed)?;
            let den = fam.eigenvalues(b - 1, 0, k + 1, seed)?;
            x.push(num.iter().zip(&den).map(|(p, q)| sg * p / q).collect());
        }
        let mut y = vec![Vec::new()];
        for k in (XY_MIN + 1)..=3 {
            let (i, prev) = ((k - XY_MIN) as usize, (k - 1 - XY_MIN) as usize);
            let row: Vec<C64> = x[prev].iter().zip(&x[i]).map(|(p, q)| -p * q).collect();
            y.push(row);
        }
        Ok(Self { x, y })
    }

    pub fn x(&self, k: i32) -> &[C64] {
        &self.x[(k - XY_MIN) as usize]
    }

    /// Defined for `k ≥ 0`.
    pub fn y(&self, k: i32) -> &[C64] {
        &self.y[(k - XY_MIN) as usize]
    }
}

/// Eigenvalue-wise residual of the Y-system closure, worst over its
/// relations.
pub fn y_closure_residual(ctx: &SpectralContext, sector: &Sector, form: YForm, seed: u64) -> Result<f64> {
    Ok(y_closure_residuals(ctx, sector, form, seed)?.into_iter().fold(0.0, f64::max))
}

/// Worst eigenvalue-wise residual of each relation: one entry for the raw
/// form, three (`t`, `x₀x₂`, `y₁y₃`) for the product form.
pub fn y_closure_residuals(ctx: &SpectralContext, sector: &Sector, form: YForm, seed: u64) -> Result<Vec<f64>> {
    let root = root_of(ctx)?;
    let b = root.b as i32;
    let sg = ctx.sigma();
    let a = root.a as i64;
    let jt = compute_j(ctx, sector, 1)?;
    let jv = jt.measured;
    let mut fam = FusedFamily::generic(ctx.clone(), sector.clone(), Construction::Recursion, seed, b + 2)?;
    let one = C64::from(1.0);
    let t0 = fam.t_ratio(b - 1, 0, seed)?;
    let mut worst = vec![0.0f64; if form == YForm::Raw { 1 } else { 3 }];
    match form {
        YForm::Raw => {
            let r: Vec<C64> = {
                let p = fam.eigenvalues(b - 2, 0, 2, seed)?;
                let q = fam.eigenvalues(b - 1, 0, 1, seed)?;
                p.iter().zip(&q).map(|(p, q)| p / q).collect()
            };
            let ev = |fam: &mut FusedFamily, m, k| fam.eigenvalues(m, 0, k, seed);
            let (l1, l2, l3) = (ev(&mut fam, b - 2, 1)?, ev(&mut fam, b - 2, 2)?, ev(&mut fam, b - 2, 3)?);
            let (h0, h1, h2) = (ev(&mut fam, b - 1, 0)?, ev(&mut fam, b - 1, 1)?, ev(&mut fam, b - 1, 2)?);
            for i in 0..t0.len() {
                let num = one + pm(sg, a - 1) * jv * r[i] + pm(sg, a) * jv * r[i] * r[i] + sg * r[i].powi(3);
                let den = (one - l1[i] * l2[i] / (h0[i] * h1[i])) * (one - l2[i] * l3[i] / (h1[i] * h2[i]));
                worst[0] = worst[0].max(scalar_residual(one + t0[i], num / den));
            }
        }
        YForm::Product => {
            let e = lambda_phase(jv, root, sg);
            let xy = XYFunctions::build(&mut fam, seed)?;
            let tb2 = fam.t_ratio(b - 2, 2, seed)?;
            let tb3 = fam.t_ratio(b - 2, 3, seed)?;
            let triple = |x: C64| (one + e * x) * (one + x.inv()) * (one + e.inv() * x);
            for i in 0..t0.len() {
                let (x0, x1, x2) = (xy.x(0)[i], xy.x(1)[i], xy.x(2)[i]);
                let (y0, y1, y2, y3) = (xy.y(0)[i], xy.y(1)[i], xy.y(2)[i], xy.y(3)[i]);
                let a_rhs = (one + e * x0) * (one + x0) * (one + e.inv() * x0) / ((one + y0) * (one + y1));
                worst[0] = worst[0].max(scalar_residual(one + t0[i], a_rhs));
                let b_rhs = (one + tb2[i]) * (one + y1) * (one + y2) / triple(x1);
                worst[1] = worst[1].max(scalar_residual(x0 * x2, b_rhs));
                let c_rhs = (one + tb2[i]) * (one + tb3[i]) * (one + y1) * (one + y2).powi(2) * (one + y3)
                    / (triple(x1) * triple(x2));
                worst[2] = worst[2].max(scalar_residual(y1 * y3, c_rhs));
            }
        }
    }
    Ok(worst)
}

/// Role of an edge in the TBA diagram.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeRole {
    Numerator,
    Denominator,
    /// Denominator in one relation, numerator in the other.
    Mixed,
}

#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct TbaNode {
    pub id: usize,
    pub label: String,
}

#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct TbaEdge {
    pub from: usize,
    pub to: usize,
    pub role: EdgeRole,
    pub multiplicity: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct TbaDiagram {
    pub a: u32,
    pub b: u32,
    pub p: u32,
    pub p_prime: u32,
    pub nodes: Vec<TbaNode>,
    pub edges: Vec<TbaEdge>,
}

impl TbaDiagram {
    pub fn self_edge_multiplicity(&self, label: &str) -> u32 {
        let Some(node) = self.nodes.iter().find(|n| n.label == label) else { return 0 };
        self.edges
            .iter()
            .filter(|e| e.from == node.id && e.to == node.id)
            .map(|e| e.multiplicity)
            .sum()
    }

    /// Plain-text node and edge records.
    pub fn to_text(&self) -> String {
        let mut out = format!("# TBA diagram (a,b)=({},{}) (p,p')=({},{})\n", self.a, self.b, self.p, self.p_prime);
        for n in &self.nodes {
            out += &format!("node {} {}\n", n.id, n.label);
        }
        for e in &self.edges {
            let role = match e.role {
                EdgeRole::Numerator => "numerator",
                EdgeRole::Denominator => "denominator",
                EdgeRole::Mixed => "mixed",
            };
            out += &format!("edge {} {} {} {}\n", e.from, e.to, role, e.multiplicity);
        }
        out
    }
}

/// Nodes `t¹..t^{b−2}, x, x, x, y` and the edges of the closed Y-system.
pub fn export_tba_diagram(root: RootOfUnity) -> TbaDiagram {
    let b = root.b as usize;
    let (p, p_prime) = root.to_pp();
    let mut nodes: Vec<TbaNode> = (1..=b.saturating_sub(2))
        .map(|m| TbaNode { id: m - 1, label: format!("t{m}") })
        .collect();
    let first_x = nodes.len();
    for i in 0..3 {
        nodes.push(TbaNode { id: first_x + i, label: "x".into() });
    }
    let y = nodes.len();
    nodes.push(TbaNode { id: y, label: "y".into() });
    let xs = [first_x, first_x + 1, first_x + 2];
    let last_t = first_x.checked_sub(1);
    let edge = |from, to, role, multiplicity| TbaEdge { from, to, role, multiplicity };
    let mut edges = Vec::new();
    for m in 0..first_x {
        if m + 1 < first_x {
            edges.push(edge(m, m + 1, EdgeRole::Numerator, 1));
        }
        edges.push(edge(m, m, EdgeRole::Denominator, 1));
    }
    for &x in &xs {
        if let Some(t) = last_t {
            edges.push(edge(t, x, EdgeRole::Numerator, 1));
        }
        edges.push(edge(x, x, EdgeRole::Denominator, 1));
    }
    for i in 0..3 {
        for j in i + 1..3 {
            edges.push(edge(xs[i], xs[j], EdgeRole::Denominator, 1));
        }
    }
    if let Some(t) = last_t {
        edges.push(edge(t, y, EdgeRole::Mixed, 2));
    }
    for &x in &xs {
        edges.push(edge(x, y, EdgeRole::Mixed, 2));
    }
    edges.push(edge(y, y, EdgeRole::Numerator, 4));
    TbaDiagram { a: root.a, b: root.b, p, p_prime, nodes, edges }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tba_counts() {
        let d = export_tba_diagram(RootOfUnity::from_pp(1, 2).unwrap());
        assert_eq!(d.nodes.len(), 6);
        assert_eq!(d.self_edge_multiplicity("y"), 4);
        let d = export_tba_diagram(RootOfUnity::from_pp(2, 3).unwrap());
        assert_eq!(d.nodes.len(), 5);
    }

    #[test]
    fn lambda_phase_round_trip() {
        let root = RootOfUnity::new(1, 4).unwrap();
        let e = C64::from_polar(1.0, 1.1);
        let j = e + 1.0 + e.inv();
        let q = lambda_phase(j, root, 1.0);
        assert!((q + q.inv() + 1.0 - j).norm() < 1e-12);
        assert!((0.0..=std::f64::consts::PI).contains(&q.arg()));
    }
}

