//! Triangle-operator prefactors and the partial Wenzl–Jones projectors
//! `P^{m,0}`, `P^{m,1}`, `P^{0,n}`, `P^{1,n}`.

use std::collections::HashMap;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::CMat;
use crate::linkstates::{act, ActionScalar, Diagram};
use crate::planar::{
    contract, dashed, dashed_pairs, dotted_triangle, labelled_triangle, residual, wavy_triangle, DiskTangle,
    BOTTOM, LEFT, RIGHT, TILES, TOP,
};
use crate::scalars::{loop_fugacity, SpectralContext};
use crate::transfer::{Sector, TransferMatrix};

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Denominators smaller than this are treated as vanishing.
const DEGENERATE: f64 = 1e-12;

/// `[m] = x^m − x^{−m}` and `{m} = x^m + x^{−m}` at `x = e^{iλ}`.
#[derive(Clone, Copy, Debug)]
pub struct BracketValues {
    x: C64,
}

impl BracketValues {
    pub fn new(lambda: f64) -> Self {
        Self { x: (I * lambda).exp() }
    }

    pub fn square(&self, m: i32) -> C64 {
        self.x.powi(m) - self.x.powi(-m)
    }

    pub fn curly(&self, m: i32) -> C64 {
        self.x.powi(m) + self.x.powi(-m)
    }
}

/// Which of the two prefactor solutions to use.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PrefactorFamily {
    #[default]
    Primary,
    /// The second solution, with some `[·]` replaced by `{·}`.
    Alternate,
}

impl PrefactorFamily {
    pub const ALL: [PrefactorFamily; 2] = [PrefactorFamily::Primary, PrefactorFamily::Alternate];
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PrefactorKind {
    Kappa,
    Epsilon,
    KappaBar,
    EpsilonBar,
}

/// One bracket factor: `(argument, curly?)`.
type Factor = (i32, bool);

fn ratio(b: &BracketValues, num: &[Factor], den: &[Factor], sign: f64) -> Result<C64> {
    let eval = |&(k, curly): &Factor| if curly { b.curly(k) } else { b.square(k) };
    let mut d = C64::from(1.0);
    for f in den {
        let v = eval(f);
        if v.norm() < DEGENERATE {
            return Err(Error::DegenerateBracket(f.0));
        }
        d *= v;
    }
    Ok(sign * num.iter().map(eval).product::<C64>() / d)
}

/// κ_i(m) or ε_i(m) (and their barred versions) at `x = e^{iλ}`.
pub fn prefactors(kind: PrefactorKind, i: usize, m: i32, lambda: f64) -> Result<C64> {
    let b = BracketValues::new(lambda);
    let sq = |k: i32| (k, false);
    let cu = |k: i32| (k, true);
    let t = 2 * m;
    match (kind, i) {
        (PrefactorKind::Kappa, 1) => ratio(&b, &[sq(t), sq(t + 1)], &[sq(t + 2), sq(t + 3)], -1.0),
        (PrefactorKind::Kappa, 2) => ratio(&b, &[sq(t)], &[sq(t + 2)], -1.0),
        (PrefactorKind::Kappa, 3) => ratio(&b, &[sq(t), sq(t + 1)], &[sq(t - 1), sq(t + 2)], 1.0),
        (PrefactorKind::Kappa, 4) => {
            ratio(&b, &[sq(1), sq(2), sq(t)], &[sq(t - 1), sq(t + 2), sq(t + 3)], 1.0)
        }
        (PrefactorKind::Epsilon, 1) => ratio(&b, &[sq(t), sq(t + 1)], &[sq(t + 3), sq(t + 4)], 1.0),
        (PrefactorKind::Epsilon, 2) => {
            ratio(&b, &[sq(t), sq(t + 1), sq(t + 5)], &[sq(t - 1), sq(t + 3), sq(t + 4)], 1.0)
        }
        (PrefactorKind::KappaBar, 1) => ratio(&b, &[sq(t), cu(t + 1)], &[sq(t + 2), cu(t + 3)], -1.0),
        (PrefactorKind::KappaBar, 2) => ratio(&b, &[sq(t)], &[sq(t + 2)], 1.0),
        (PrefactorKind::KappaBar, 3) => ratio(&b, &[sq(t), cu(t + 1)], &[cu(t - 1), sq(t + 2)], 1.0),
        (PrefactorKind::KappaBar, 4) => {
            ratio(&b, &[sq(1), sq(2), sq(t)], &[cu(t - 1), sq(t + 2), cu(t + 3)], 1.0)
        }
        (PrefactorKind::EpsilonBar, 1) => ratio(&b, &[sq(t), cu(t + 1)], &[cu(t + 3), sq(t + 4)], -1.0),
        (PrefactorKind::EpsilonBar, 2) => {
            ratio(&b, &[sq(t), cu(t + 1), cu(t + 5)], &[cu(t - 1), cu(t + 3), sq(t + 4)], 1.0)
        }
        _ => Err(Error::IndexOutOfRange {
            id: format!("{kind:?}"),
            detail: format!("index {i}"),
        }),
    }
}

/// κ₁..κ₄ for the given family.
pub fn kappas(family: PrefactorFamily, m: i32, lambda: f64) -> Result<[C64; 4]> {
    let kind = match family {
        PrefactorFamily::Primary => PrefactorKind::Kappa,
        PrefactorFamily::Alternate => PrefactorKind::KappaBar,
    };
    Ok([
        prefactors(kind, 1, m, lambda)?,
        prefactors(kind, 2, m, lambda)?,
        prefactors(kind, 3, m, lambda)?,
        prefactors(kind, 4, m, lambda)?,
    ])
}

/// ε₁, ε₂ for the given family.
pub fn epsilons(family: PrefactorFamily, m: i32, lambda: f64) -> Result<[C64; 2]> {
    let kind = match family {
        PrefactorFamily::Primary => PrefactorKind::Epsilon,
        PrefactorFamily::Alternate => PrefactorKind::EpsilonBar,
    };
    Ok([prefactors(kind, 1, m, lambda)?, prefactors(kind, 2, m, lambda)?])
}


// Box tangles on `k` strands have `2k` nodes: bottom nodes `0..k` left to
// right, then top nodes right to left, so bottom `i` is `i` and top `i` is
// `2k − 1 − i`.

fn top(k: usize, i: usize) -> usize {
    2 * k - 1 - i
}

/// Dashed vertical lines on `k` strands.
pub fn identity_box(k: usize) -> DiskTangle {
    let pairs: Vec<(usize, usize)> = (0..k).map(|i| (i, top(k, i))).collect();
    dashed_pairs(2 * k, &pairs)
}

/// `upper` drawn on top of `lower`.
pub fn stack(lower: &DiskTangle, upper: &DiskTangle, beta: C64) -> Result<DiskTangle> {
    if lower.n() != upper.n() || lower.n() % 2 != 0 {
        return Err(Error::InterfaceMismatch(format!("stacking {} over {} nodes", upper.n(), lower.n())));
    }
    let k = lower.n() / 2;
    // wire labels: bottom i -> i, middle i -> k + i, top i -> 2k + i
    let mut lw = vec![0; 2 * k];
    let mut uw = vec![0; 2 * k];
    for i in 0..k {
        lw[i] = i;
        lw[top(k, i)] = k + i;
        uw[i] = k + i;
        uw[top(k, i)] = 2 * k + i;
    }
    let mut boundary: Vec<usize> = (0..k).collect();
    boundary.extend((0..k).rev().map(|i| 2 * k + i));
    contract(&[(lower, &lw), (upper, &uw)], &boundary, beta)
}

/// `left` and `right` side by side.
pub fn tensor(left: &DiskTangle, right: &DiskTangle) -> Result<DiskTangle> {
    let (a, b) = (left.n() / 2, right.n() / 2);
    let k = a + b;
    // left bottom i -> i, left top i -> k + i; right bottom i -> a + i, right top i -> k + a + i
    let lw: Vec<usize> = (0..2 * a).map(|x| if x < a { x } else { k + (2 * a - 1 - x) }).collect();
    let rw: Vec<usize> = (0..2 * b).map(|x| if x < b { a + x } else { k + a + (2 * b - 1 - x) }).collect();
    let mut boundary: Vec<usize> = (0..k).collect();
    boundary.extend((0..k).rev().map(|i| k + i));
    contract(&[(left, &lw), (right, &rw)], &boundary, C64::from(1.0))
}

/// Reflection of a box tangle about a vertical axis.
pub fn mirror(t: &DiskTangle) -> DiskTangle {
    let k = t.n() / 2;
    let order: Vec<usize> = (0..2 * k).map(|x| if x < k { k - 1 - x } else { 3 * k - 1 - x }).collect();
    t.reorder(&order)
}

/// Two-strand insertion of the `P^{m,0}` recursion: the labelled `m − 1`
/// triangle under the dotted triangle, glued along their flat sides.
fn dotted_insertion(m: i32, family: PrefactorFamily, lambda: f64) -> Result<DiskTangle> {
    let lab = labelled_triangle(m - 1, family, lambda)?;
    let dot = dotted_triangle(lambda);
    // box nodes: 0 bl, 1 br, 2 tr, 3 tl; wire 9 joins the flat sides
    contract(&[(&lab, &[0, 1, 9]), (&dot, &[3, 2, 9])], &[0, 1, 2, 3], loop_fugacity(lambda))
}

/// Two-strand insertion of the `P^{m,1}` recursion: the wavy `m` triangle
/// under a dashed cap.
fn wavy_insertion(m: i32, family: PrefactorFamily, lambda: f64) -> Result<DiskTangle> {
    let wav = wavy_triangle(m, family, lambda)?;
    let cap = dashed();
    let vac = DiskTangle::empty(1);
    contract(&[(&wav, &[0, 1, 9]), (&vac, &[9]), (&cap, &[3, 2])], &[0, 1, 2, 3], C64::from(1.0))
}

/// Projector label shapes with a recursive construction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum ProjectorLabel {
    /// `(m, 0)`
    Symmetric(usize),
    /// `(m, 1)`
    Hook(usize),
    /// `(0, n)`
    ConjugateSymmetric(usize),
    /// `(1, n)`
    ConjugateHook(usize),
}

impl ProjectorLabel {
    pub fn from_pair(m: usize, n: usize) -> Result<Self> {
        match (m, n) {
            (m, 0) if m >= 1 => Ok(Self::Symmetric(m)),
            (0, n) if n >= 1 => Ok(Self::ConjugateSymmetric(n)),
            (1, 1) => Ok(Self::Hook(1)),
            (m, 1) if m >= 2 => Ok(Self::Hook(m)),
            (1, n) if n >= 2 => Ok(Self::ConjugateHook(n)),
            _ => Err(Error::UnsupportedLabel(m, n)),
        }
    }

    pub fn pair(&self) -> (usize, usize) {
        match *self {
            Self::Symmetric(m) => (m, 0),
            Self::Hook(m) => (m, 1),
            Self::ConjugateSymmetric(n) => (0, n),
            Self::ConjugateHook(n) => (1, n),
        }
    }

    /// Number of strands the projector acts on.
    pub fn strands(&self) -> usize {
        let (m, n) = self.pair();
        m + n
    }
}

#[derive(Clone, Debug)]
pub struct ProjectorTangle {
    pub label: ProjectorLabel,
    pub prefactor_family: PrefactorFamily,
    pub lambda: f64,
    pub tangle: DiskTangle,
}

impl ProjectorTangle {
    pub fn strands(&self) -> usize {
        self.label.strands()
    }
}

/// `P^{m,0}` and `P^{m,1}` by their recursions, `P^{0,n}` and `P^{1,n}` by
/// the mirrored recursions (insertions on the left).
pub fn build_projector(label: ProjectorLabel, family: PrefactorFamily, lambda: f64) -> Result<ProjectorTangle> {
    if crate::scalars::is_singular_lambda(lambda) {
        return Err(Error::SingularLambda(lambda));
    }
    let tangle = match label {
        ProjectorLabel::Symmetric(m) => symmetric(m, family, lambda, false)?,
        ProjectorLabel::ConjugateSymmetric(n) => symmetric(n, family, lambda, true)?,
        ProjectorLabel::Hook(m) => hook(m, family, lambda, false)?,
        ProjectorLabel::ConjugateHook(n) => hook(n, family, lambda, true)?,
    };
    Ok(ProjectorTangle { label, prefactor_family: family, lambda, tangle })
}

/// `X ⊗ id` (or `id ⊗ X` when mirrored).
fn extend(x: &DiskTangle, mirrored: bool) -> Result<DiskTangle> {
    if mirrored {
        tensor(&identity_box(1), x)
    } else {
        tensor(x, &identity_box(1))
    }
}

/// `base − base · insertion · base`, with the insertion on the last two
/// strands (first two when mirrored).
fn subtract_sandwich(base: &DiskTangle, insertion: &DiskTangle, mirrored: bool, beta: C64) -> Result<DiskTangle> {
    let k = base.n() / 2;
    let pad = identity_box(k - 2);
    let mid = if mirrored {
        tensor(&mirror(insertion), &pad)?
    } else {
        tensor(&pad, insertion)?
    };
    let sandwich = stack(&stack(base, &mid, beta)?, base, beta)?;
    Ok(base.clone().minus(&sandwich))
}

fn symmetric(m: usize, family: PrefactorFamily, lambda: f64, mirrored: bool) -> Result<DiskTangle> {
    if m == 0 {
        return Err(Error::UnsupportedLabel(0, 0));
    }
    let beta = loop_fugacity(lambda);
    let mut p = identity_box(1);
    for j in 2..=m {
        let base = extend(&p, mirrored)?;
        let ins = dotted_insertion(j as i32, family, lambda)?;
        p = subtract_sandwich(&base, &ins, mirrored, beta)?;
    }
    Ok(p)
}

fn hook(m: usize, family: PrefactorFamily, lambda: f64, mirrored: bool) -> Result<DiskTangle> {
    let beta = loop_fugacity(lambda);
    let base = extend(&symmetric(m, family, lambda, mirrored)?, mirrored)?;
    let ins = wavy_insertion(m as i32, family, lambda)?;
    subtract_sandwich(&base, &ins, mirrored, beta)
}

/// Residuals of the defining properties of one projector.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ProjectorReport {
    pub label: (usize, usize),
    pub family: PrefactorFamily,
    pub terms: usize,
    /// `‖P·P − P‖ / ‖P‖`.
    pub idempotency: f64,
    /// Size of `P` with the designated triangle attached, relative to `‖P‖`.
    pub annihilation: f64,
    /// Worst `P^{m,·}` against its products with smaller projectors.
    pub absorption: f64,
}

/// Attaches a dotted triangle (symmetric labels) or a dashed cap (hook
/// labels) under the two designated bottom nodes.
pub fn annihilation_residual(p: &ProjectorTangle) -> Result<f64> {
    let k = p.strands();
    if k < 2 {
        return Ok(0.0);
    }
    let beta = loop_fugacity(p.lambda);
    let mirrored = matches!(p.label, ProjectorLabel::ConjugateSymmetric(_) | ProjectorLabel::ConjugateHook(_));
    let (a, b) = if mirrored { (0, 1) } else { (k - 2, k - 1) };
    let wires: Vec<usize> = (0..2 * k).collect();
    let mut boundary: Vec<usize> = (0..2 * k).filter(|&x| x != a && x != b).collect();
    let attached = match p.label {
        ProjectorLabel::Symmetric(_) | ProjectorLabel::ConjugateSymmetric(_) => {
            boundary.push(100);
            let t = dotted_triangle(p.lambda);
            contract(&[(&p.tangle, &wires), (&t, &[a, b, 100])], &boundary, beta)?
        }
        ProjectorLabel::Hook(_) | ProjectorLabel::ConjugateHook(_) => {
            let cap = dashed();
            contract(&[(&p.tangle, &wires), (&cap, &[a, b])], &boundary, beta)?
        }
    };
    Ok(attached.max_coefficient() / p.tangle.max_coefficient())
}

pub fn idempotency_residual(p: &ProjectorTangle) -> Result<f64> {
    let pp = stack(&p.tangle, &p.tangle, loop_fugacity(p.lambda))?;
    Ok(residual(&p.tangle, &pp))
}

/// `P^{m,0}` against `P^{m,0}·(P^{n,0} ⊗ id)` and `(P^{n,0} ⊗ id)·P^{m,0}`
/// for `1 ≤ n ≤ m`; hook labels against `P^{m,0} ⊗ id` on either side.
pub fn absorption_residual(p: &ProjectorTangle) -> Result<f64> {
    let beta = loop_fugacity(p.lambda);
    let k = p.strands();
    let mirrored = matches!(p.label, ProjectorLabel::ConjugateSymmetric(_) | ProjectorLabel::ConjugateHook(_));
    let pad = |t: DiskTangle, extra: usize| -> Result<DiskTangle> {
        if extra == 0 {
            return Ok(t);
        }
        if mirrored {
            tensor(&identity_box(extra), &t)
        } else {
            tensor(&t, &identity_box(extra))
        }
    };
    let smaller: Vec<DiskTangle> = match p.label {
        ProjectorLabel::Symmetric(m) | ProjectorLabel::ConjugateSymmetric(m) => (1..=m)
            .map(|n| pad(symmetric(n, p.prefactor_family, p.lambda, mirrored)?, m - n))
            .collect::<Result<_>>()?,
        ProjectorLabel::Hook(m) | ProjectorLabel::ConjugateHook(m) => {
            vec![pad(symmetric(m, p.prefactor_family, p.lambda, mirrored)?, 1)?]
        }
    };
    let mut worst = 0.0f64;
    for s in &smaller {
        debug_assert_eq!(s.n(), 2 * k);
        worst = worst.max(residual(&p.tangle, &stack(&p.tangle, s, beta)?));
        worst = worst.max(residual(&p.tangle, &stack(s, &p.tangle, beta)?));
    }
    Ok(worst)
}

pub fn check_projector(p: &ProjectorTangle) -> Result<ProjectorReport> {
    Ok(ProjectorReport {
        label: p.label.pair(),
        family: p.prefactor_family,
        terms: p.tangle.len(),
        idempotency: idempotency_residual(p)?,
        annihilation: annihilation_residual(p)?,
        absorption: absorption_residual(p)?,
    })
}

/// `P^{0,n}` from the mirrored recursion against the reflection of `P^{n,0}`
/// (and likewise `P^{1,n}` against `P^{n,1}`).
pub fn mirror_residual(n: usize, hook_label: bool, family: PrefactorFamily, lambda: f64) -> Result<f64> {
    let (direct, reflected) = if hook_label {
        (ProjectorLabel::ConjugateHook(n), ProjectorLabel::Hook(n))
    } else {
        (ProjectorLabel::ConjugateSymmetric(n), ProjectorLabel::Symmetric(n))
    };
    let a = build_projector(direct, family, lambda)?;
    let b = build_projector(reflected, family, lambda)?;
    Ok(residual(&a.tangle, &mirror(&b.tangle)))
}

/// Relative difference between the two prefactor families' projectors.
pub fn family_difference(label: ProjectorLabel, lambda: f64) -> Result<f64> {
    let a = build_projector(label, PrefactorFamily::Primary, lambda)?;
    let b = build_projector(label, PrefactorFamily::Alternate, lambda)?;
    Ok(residual(&a.tangle, &b.tangle))
}

/// Shifts `k` of the faces stacked in one fused column, bottom first:
/// `0, 2, …, 2m − 2` then `2m + 1, 2m + 3, …, 2m + 2n − 1`.
pub fn column_shifts(m: usize, n: usize) -> Vec<i32> {
    let (m, n) = (m as i32, n as i32);
    (0..m).map(|i| 2 * i).chain((0..n).map(|i| 2 * m + 1 + 2 * i)).collect()
}

/// Shifts `k` of the `1/s_k` normalization of one fused face.
pub fn column_normalization(m: usize, n: usize) -> Vec<i32> {
    let (m, n) = (m as i32, n as i32);
    (-1..=2 * m + 2 * n - 3).filter(|&k| k != 2 * m - 3 && k != 2 * m - 1).collect()
}

/// `T^{m,n}(u)` from a row of projector-sandwiched face columns: between
/// neighbouring columns one projector acts on the `m + n` horizontal
/// strands. Cost grows like `(9^{m+n})^N`; meant for `N ≤ 3`, `m + n ≤ 3`.
pub fn projected_fused_transfer(
    label: ProjectorLabel,
    family: PrefactorFamily,
    u: C64,
    sector: &Sector,
    ctx: &SpectralContext,
) -> Result<TransferMatrix> {
    if ctx.n != sector.n() || ctx.xi.len() != ctx.n {
        return Err(Error::InvalidSector { n: ctx.n, d: sector.d() });
    }
    let (m, n) = label.pair();
    let k = m + n;
    let width = sector.n();
    let p = build_projector(label, family, ctx.lambda)?;
    let shifts = column_shifts(m, n);
    let norm = column_normalization(m, n);
    let lam = C64::from(ctx.lambda);
    // weights[j][h][tile]
    let weights: Vec<Vec<[C64; 9]>> = ctx
        .xi
        .iter()
        .map(|&x| shifts.iter().map(|&s| ctx.face(u + lam * s as f64 - x).rho).collect())
        .collect();
    let scale: C64 = ctx
        .xi
        .iter()
        .map(|&x| norm.iter().map(|&s| ctx.s(u - x, s)).product::<C64>())
        .product::<C64>()
        .inv();

    let columns = column_stacks(k);
    let projector_terms: Vec<(Vec<u8>, C64)> = p.tangle.terms().map(|(q, c)| (q.clone(), *c)).collect();
    let basis = &sector.basis;
    let dim = basis.len();
    let mut out = CMat::zeros(dim, dim);
    let mut value_cache: HashMap<ActionScalar, C64> = HashMap::new();
    let mut chosen_cols = vec![0usize; width];
    let mut chosen_proj = vec![0usize; width];

    // Depth-first over columns then projectors, pruning on occupancy.
    struct Search<'a> {
        k: usize,
        width: usize,
        columns: &'a [Vec<u8>],
        projectors: &'a [(Vec<u8>, C64)],
        weights: &'a [Vec<[C64; 9]>],
    }
    impl Search<'_> {
        fn side_occupancy(&self, col: &[u8], side: usize) -> Vec<bool> {
            col.iter().map(|&t| occupies(t as usize, side)).collect()
        }
        fn projector_fits(&self, q: &[u8], left_col: &[u8], right_col: &[u8]) -> bool {
            let k = self.k;
            let r = self.side_occupancy(left_col, RIGHT);
            let l = self.side_occupancy(right_col, LEFT);
            (0..k).all(|i| (q[top(k, i)] as usize != top(k, i)) == r[i] && (q[i] as usize != i) == l[i])
        }
    }
    let search = Search { k, width, columns: &columns, projectors: &projector_terms, weights: &weights };

    fn walk(
        s: &Search,
        level: usize,
        weight: C64,
        cols: &mut Vec<usize>,
        projs: &mut Vec<usize>,
        emit: &mut dyn FnMut(&[usize], &[usize], C64),
    ) {
        if level == s.width {
            // close the ring with the projector between the last and first columns
            let (lc, rc) = (&s.columns[cols[s.width - 1]], &s.columns[cols[0]]);
            for (pi, (q, c)) in s.projectors.iter().enumerate() {
                if s.projector_fits(q, lc, rc) {
                    projs[s.width - 1] = pi;
                    emit(cols, projs, weight * c);
                }
            }
            return;
        }
        for (ci, col) in s.columns.iter().enumerate() {
            let w: C64 = col.iter().enumerate().map(|(h, &t)| s.weights[level][h][t as usize]).product();
            if w == C64::from(0.0) {
                continue;
            }
            cols[level] = ci;
            if level == 0 {
                walk(s, 1, weight * w, cols, projs, emit);
                continue;
            }
            let lc = &s.columns[cols[level - 1]];
            for (pi, (q, c)) in s.projectors.iter().enumerate() {
                if s.projector_fits(q, lc, col) {
                    projs[level - 1] = pi;
                    walk(s, level + 1, weight * w * c, cols, projs, emit);
                }
            }
        }
    }

    let mut emit = |cols: &[usize], projs: &[usize], w: C64| {
        let col_shapes: Vec<&[u8]> = cols.iter().map(|&c| columns[c].as_slice()).collect();
        let proj_pairings: Vec<&[u8]> = projs.iter().map(|&q| projector_terms[q].0.as_slice()).collect();
        let diagram = network_diagram(&col_shapes, &proj_pairings);
        for (i, st) in basis.states.iter().enumerate() {
            if let Some((sc, img)) = act(&diagram, st) {
                let o = basis.index_of(&img).expect("image lies in the basis");
                let v = *value_cache.entry(sc).or_insert_with(|| sc.value(ctx));
                out[(o, i)] += w * v;
            }
        }
    };
    walk(&search, 0, C64::from(1.0), &mut chosen_cols, &mut chosen_proj, &mut emit);
    Ok(TransferMatrix { label: (m, n), shift: 0, n: width, d: sector.d(), u, entries: out * faer::Scale(scale) })
}

fn occupies(tile: usize, side: usize) -> bool {
    TILES[tile].1.iter().any(|&(a, b)| a == side || b == side)
}

/// Vertically consistent stacks of `k` tiles, bottom first.
fn column_stacks(k: usize) -> Vec<Vec<u8>> {
    let mut out = vec![Vec::new()];
    for _ in 0..k {
        let mut next = Vec::new();
        for col in &out {
            for t in 0..9u8 {
                if let Some(&below) = col.last() {
                    if occupies(below as usize, TOP) != occupies(t as usize, BOTTOM) {
                        continue;
                    }
                }
                let mut c: Vec<u8> = col.clone();
                c.push(t);
                next.push(c);
            }
        }
        out = next;
    }
    out
}

/// Connectivity of a periodic row of face columns joined by box pairings;
/// `pairings[j]` sits between column `j` and column `j + 1`, and the seam
/// runs just right of the last one.
fn network_diagram(columns: &[&[u8]], pairings: &[&[u8]]) -> Diagram {
    let width = columns.len();
    let k = columns[0].len();
    let faces = 4 * k * width;
    let face = |j: usize, h: usize, side: usize| 4 * (k * j + h) + side;
    let pnode = |j: usize, x: usize| faces + 2 * k * j + x;
    let total = faces + 2 * k * width;
    let mut adj: Vec<Vec<(usize, i32)>> = vec![Vec::new(); total];
    let join = |adj: &mut Vec<Vec<(usize, i32)>>, a: usize, b: usize, w: i32| {
        adj[a].push((b, w));
        adj[b].push((a, -w));
    };
    for j in 0..width {
        for h in 0..k {
            for &(a, b) in TILES[columns[j][h] as usize].1.iter() {
                join(&mut adj, face(j, h, a), face(j, h, b), 0);
            }
            if h + 1 < k && occupies(columns[j][h] as usize, TOP) {
                join(&mut adj, face(j, h, TOP), face(j, h + 1, BOTTOM), 0);
            }
        }
        let q = pairings[j];
        for x in 0..2 * k {
            let y = q[x] as usize;
            if y > x {
                join(&mut adj, pnode(j, x), pnode(j, y), 0);
            }
        }
        let next = (j + 1) % width;
        let seam = if j == width - 1 { -1 } else { 0 };
        for i in 0..k {
            if q[top(k, i)] as usize != top(k, i) {
                join(&mut adj, face(j, i, RIGHT), pnode(j, top(k, i)), 0);
            }
            if q[i] as usize != i {
                join(&mut adj, pnode(j, i), face(next, i, LEFT), seam);
            }
        }
    }
    let terminal = |x: usize| -> Option<usize> {
        if x >= faces {
            return None;
        }
        let (cell, side) = (x / 4, x % 4);
        let (j, h) = (cell / k, cell % k);
        match side {
            TOP if h == k - 1 => Some(j),
            BOTTOM if h == 0 => Some(width + j),
            _ => None,
        }
    };
    let mut d = Diagram::empty(width);
    let mut seen = vec![false; total];
    for start in 0..faces {
        let Some(si) = terminal(start) else { continue };
        if seen[start] || adj[start].is_empty() {
            continue;
        }
        seen[start] = true;
        let (mut prev, (mut cur, mut wind)) = (start, adj[start][0]);
        loop {
            seen[cur] = true;
            if let Some(ei) = terminal(cur) {
                d.links[si] = Some((ei, wind));
                d.links[ei] = Some((si, -wind));
                break;
            }
            let &(nx, w) = adj[cur].iter().find(|&&(y, _)| y != prev).expect("degree two");
            prev = cur;
            cur = nx;
            wind += w;
        }
    }
    for start in 0..total {
        if seen[start] || adj[start].is_empty() {
            continue;
        }
        let (mut prev, mut cur, mut wind) = (start, adj[start][0].0, adj[start][0].1);
        seen[start] = true;
        while cur != start {
            seen[cur] = true;
            let &(nx, w) = adj[cur].iter().find(|&&(y, _)| y != prev).expect("degree two");
            prev = cur;
            cur = nx;
            wind += w;
        }
        if wind == 0 {
            d.loops.n_beta += 1;
        } else {
            d.loops.n_alpha += 1;
        }
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bracket_symmetries() {
        let b = BracketValues::new(0.4);
        assert_eq!(b.square(0), C64::from(0.0));
        assert!((b.curly(0) - 2.0).norm() < 1e-15);
        for m in 1..6 {
            assert!((b.square(-m) + b.square(m)).norm() < 1e-14);
            assert!((b.curly(-m) - b.curly(m)).norm() < 1e-14);
        }
        assert!((b.square(1) - 2.0 * I * 0.4f64.sin()).norm() < 1e-15);
    }

    #[test]
    fn kappa_two_at_one() {
        let b = BracketValues::new(0.4);
        let k2 = prefactors(PrefactorKind::Kappa, 2, 1, 0.4).unwrap();
        assert!((k2 + b.square(2) / b.square(4)).norm() < 1e-15);
    }

    #[test]
    fn degenerate_denominator() {
        // [4] = 0 at λ = π/4
        let r = prefactors(PrefactorKind::Kappa, 2, 1, std::f64::consts::FRAC_PI_4);
        assert!(matches!(r, Err(Error::DegenerateBracket(4))));
    }
}
