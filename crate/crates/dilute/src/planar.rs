//! Dilute planar tangles on a disk and the registry of local identities.
//!
//! A pairing of `n` boundary nodes is stored as `p[i] = j` for a strand
//! joining `i` and `j`, and `p[i] = i` for a vacancy. Tangles are finite
//! linear combinations of pairings.

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::projectors::{epsilons, kappas, PrefactorFamily};
use crate::scalars::{face_weights, loop_fugacity, s_k, FaceWeights};

pub type Pairing = Vec<u8>;

const PRUNE: f64 = 1e-14;

/// Face boundary nodes, counter-clockwise from the left edge.
pub const LEFT: usize = 0;
pub const BOTTOM: usize = 1;
pub const RIGHT: usize = 2;
pub const TOP: usize = 3;

#[derive(Clone, Debug, PartialEq)]
pub struct DiskTangle {
    n: usize,
    terms: BTreeMap<Pairing, C64>,
}

impl DiskTangle {
    pub fn zero(n: usize) -> Self {
        Self { n, terms: BTreeMap::new() }
    }

    /// The all-vacant pairing with coefficient one.
    pub fn empty(n: usize) -> Self {
        Self::from_links(n, &[], C64::from(1.0))
    }

    /// A single pairing given by its strands; unlisted nodes are vacant.
    pub fn from_links(n: usize, links: &[(usize, usize)], coef: C64) -> Self {
        let mut t = Self::zero(n);
        t.add_term(pairing_from_links(n, links), coef);
        t
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Pairing, &C64)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, p: &[u8]) -> C64 {
        self.terms.get(p).copied().unwrap_or_default()
    }

    /// Accumulates without pruning; call sites prune once at the end.
    fn accumulate(&mut self, p: Pairing, c: C64) {
        debug_assert_eq!(p.len(), self.n);
        *self.terms.entry(p).or_default() += c;
    }

    pub fn add_term(&mut self, p: Pairing, c: C64) {
        self.accumulate(p, c);
        self.prune();
    }

    pub fn scale(mut self, c: C64) -> Self {
        for v in self.terms.values_mut() {
            *v *= c;
        }
        self.prune();
        self
    }

    pub fn plus(mut self, other: &DiskTangle) -> Self {
        assert_eq!(self.n, other.n, "adding tangles of different sizes");
        for (p, c) in &other.terms {
            *self.terms.entry(p.clone()).or_default() += c;
        }
        self.prune();
        self
    }

    pub fn minus(self, other: &DiskTangle) -> Self {
        let neg = other.clone().scale(C64::from(-1.0));
        self.plus(&neg)
    }

    fn prune(&mut self) {
        self.terms.retain(|_, v| v.norm() >= PRUNE);
    }

    pub fn max_coefficient(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Relabels boundary nodes: node `k` of the result is node `order[k]`
    /// of `self`.
    pub fn reorder(&self, order: &[usize]) -> Self {
        assert_eq!(order.len(), self.n);
        let mut inv = vec![0usize; self.n];
        for (k, &o) in order.iter().enumerate() {
            inv[o] = k;
        }
        let mut out = Self::zero(self.n);
        for (p, c) in &self.terms {
            let mut q = vec![0u8; self.n];
            for (k, &o) in order.iter().enumerate() {
                q[k] = inv[p[o] as usize] as u8;
            }
            out.accumulate(q, *c);
        }
        out.prune();
        out
    }

    /// Product with a tangle drawn on the other side of shared nodes; see
    /// [`contract`]. The result lists `self`'s free nodes, then `other`'s,
    /// each in ascending order.
    pub fn glue(&self, other: &DiskTangle, interface: &[(usize, usize)], beta: C64) -> Result<Self> {
        let a_wires: Vec<usize> = (0..self.n).collect();
        let mut b_wires: Vec<usize> = (self.n..self.n + other.n).collect();
        let mut a_used = vec![false; self.n];
        let mut b_used = vec![false; other.n];
        for &(ia, ib) in interface {
            if ia >= self.n || ib >= other.n || a_used[ia] || b_used[ib] {
                return Err(Error::InterfaceMismatch(format!("bad identification ({ia}, {ib})")));
            }
            a_used[ia] = true;
            b_used[ib] = true;
            b_wires[ib] = a_wires[ia];
        }
        let mut boundary: Vec<usize> = (0..self.n).filter(|&i| !a_used[i]).map(|i| a_wires[i]).collect();
        boundary.extend((0..other.n).filter(|&j| !b_used[j]).map(|j| b_wires[j]));
        contract(&[(self, &a_wires), (other, &b_wires)], &boundary, beta)
    }
}

/// Builds a pairing from strands; unlisted nodes are vacant.
pub fn pairing_from_links(n: usize, links: &[(usize, usize)]) -> Pairing {
    let mut p: Pairing = (0..n as u8).collect();
    for &(a, b) in links {
        p[a] = b as u8;
        p[b] = a as u8;
    }
    p
}

/// `V`, `(`, `)` bracket string of a planar pairing.
pub fn pairing_key(p: &[u8]) -> String {
    p.iter()
        .enumerate()
        .map(|(i, &j)| match (j as usize).cmp(&i) {
            std::cmp::Ordering::Equal => 'V',
            std::cmp::Ordering::Greater => '(',
            std::cmp::Ordering::Less => ')',
        })
        .collect()
}

/// True when the strands of `p` do not cross inside the disk.
pub fn is_planar(p: &[u8]) -> bool {
    let mut stack = Vec::new();
    for (i, &j) in p.iter().enumerate() {
        let j = j as usize;
        if j > i {
            stack.push(j);
        } else if j < i && stack.pop() != Some(i) {
            return false;
        }
    }
    stack.is_empty()
}

#[derive(Clone, Copy, Debug)]
enum End {
    Node(usize),
    Boundary(usize),
}

/// Contracts a network of tangles. Each part lists one wire label per
/// node; a label shared by two nodes joins them, a label in `boundary`
/// makes the node free at that boundary position. Strand segments meeting
/// vacancies kill a term and every closed loop contributes `beta`.
pub fn contract(parts: &[(&DiskTangle, &[usize])], boundary: &[usize], beta: C64) -> Result<DiskTangle> {
    let mut offsets = Vec::with_capacity(parts.len());
    let mut total = 0;
    for (t, w) in parts {
        if w.len() != t.n {
            return Err(Error::InterfaceMismatch(format!("{} labels for {} nodes", w.len(), t.n)));
        }
        offsets.push(total);
        total += t.n;
    }
    let mut ends: HashMap<usize, Vec<End>> = HashMap::new();
    for (p, (_, w)) in parts.iter().enumerate() {
        for (i, &label) in w.iter().enumerate() {
            ends.entry(label).or_default().push(End::Node(offsets[p] + i));
        }
    }
    for (pos, &label) in boundary.iter().enumerate() {
        ends.entry(label).or_default().push(End::Boundary(pos));
    }
    let mut across = vec![End::Boundary(usize::MAX); total];
    let mut boundary_node = vec![0usize; boundary.len()];
    // constraints[p] = node pairs whose occupancies must match once part p is fixed
    let mut constraints: Vec<Vec<(usize, usize)>> = vec![Vec::new(); parts.len()];
    let part_of = |g: usize| offsets.iter().rposition(|&o| o <= g).unwrap();
    for (label, e) in &ends {
        match e.as_slice() {
            [End::Node(a), End::Node(b)] => {
                across[*a] = End::Node(*b);
                across[*b] = End::Node(*a);
                let later = part_of(*a).max(part_of(*b));
                constraints[later].push((*a, *b));
            }
            [End::Node(a), End::Boundary(q)] | [End::Boundary(q), End::Node(a)] => {
                across[*a] = End::Boundary(*q);
                boundary_node[*q] = *a;
            }
            _ => return Err(Error::InterfaceMismatch(format!("wire {label} has {} ends", e.len()))),
        }
    }

    let term_lists: Vec<Vec<(&Pairing, &C64)>> = parts.iter().map(|(t, _)| t.terms().collect()).collect();
    let mut inner = vec![0usize; total];
    let mut out = DiskTangle::zero(boundary.len());
    let mut ctx = Walk {
        parts,
        offsets: &offsets,
        constraints: &constraints,
        term_lists: &term_lists,
        across: &across,
        boundary_node: &boundary_node,
        beta,
        inner: &mut inner,
        out: &mut out,
    };
    ctx.descend(0, C64::from(1.0));
    out.prune();
    Ok(out)
}

struct Walk<'a> {
    parts: &'a [(&'a DiskTangle, &'a [usize])],
    offsets: &'a [usize],
    constraints: &'a [Vec<(usize, usize)>],
    term_lists: &'a [Vec<(&'a Pairing, &'a C64)>],
    across: &'a [End],
    boundary_node: &'a [usize],
    beta: C64,
    inner: &'a mut Vec<usize>,
    out: &'a mut DiskTangle,
}

impl Walk<'_> {
    fn descend(&mut self, level: usize, coef: C64) {
        if level == self.parts.len() {
            self.trace(coef);
            return;
        }
        let off = self.offsets[level];
        for &(p, c) in &self.term_lists[level] {
            for (i, &j) in p.iter().enumerate() {
                self.inner[off + i] = off + j as usize;
            }
            let ok = self.constraints[level]
                .iter()
                .all(|&(a, b)| (self.inner[a] == a) == (self.inner[b] == b));
            if ok {
                self.descend(level + 1, coef * c);
            }
        }
    }

    fn trace(&mut self, mut coef: C64) {
        let total = self.inner.len();
        let nb = self.boundary_node.len();
        let mut seen = vec![false; total];
        let mut result: Pairing = (0..nb as u8).collect();
        for q in 0..nb {
            let mut g = self.boundary_node[q];
            if self.inner[g] == g || seen[g] {
                continue;
            }
            loop {
                seen[g] = true;
                let h = self.inner[g];
                seen[h] = true;
                match self.across[h] {
                    End::Boundary(r) => {
                        result[q] = r as u8;
                        result[r] = q as u8;
                        break;
                    }
                    End::Node(k) => g = k,
                }
            }
        }
        for g0 in 0..total {
            if seen[g0] || self.inner[g0] == g0 {
                continue;
            }
            let mut g = g0;
            loop {
                seen[g] = true;
                let h = self.inner[g];
                seen[h] = true;
                match self.across[h] {
                    End::Node(k) => g = k,
                    End::Boundary(_) => unreachable!("loop reached the boundary"),
                }
                if g == g0 {
                    break;
                }
            }
            coef *= self.beta;
        }
        self.out.accumulate(result, coef);
    }
}

/// The nine elementary tiles: weight index (zero-based) and strands over
/// the face nodes `LEFT, BOTTOM, RIGHT, TOP`.
pub const TILES: [(usize, &[(usize, usize)]); 9] = [
    (0, &[]),
    (1, &[(LEFT, TOP)]),
    (2, &[(BOTTOM, RIGHT)]),
    (3, &[(LEFT, BOTTOM)]),
    (4, &[(TOP, RIGHT)]),
    (5, &[(LEFT, RIGHT)]),
    (6, &[(BOTTOM, TOP)]),
    (7, &[(LEFT, TOP), (BOTTOM, RIGHT)]),
    (8, &[(LEFT, BOTTOM), (TOP, RIGHT)]),
];

pub fn face_from_weights(w: &FaceWeights) -> DiskTangle {
    let mut t = DiskTangle::zero(4);
    for (k, links) in TILES {
        t.add_term(pairing_from_links(4, links), w.rho[k]);
    }
    t
}

pub fn face_tangle(u: C64, lambda: f64) -> Result<DiskTangle> {
    Ok(face_from_weights(&face_weights(u, lambda)?))
}

/// A strand segment or a vacancy across two nodes.
pub fn dashed() -> DiskTangle {
    DiskTangle::from_links(2, &[(0, 1)], C64::from(1.0)).plus(&DiskTangle::empty(2))
}

/// Product of dashed segments; unlisted nodes of the `n` are left out of
/// every segment, so each must appear in exactly one pair.
pub fn dashed_pairs(n: usize, pairs: &[(usize, usize)]) -> DiskTangle {
    let mut t = DiskTangle::zero(n);
    for mask in 0..(1u32 << pairs.len()) {
        let chosen: Vec<(usize, usize)> =
            pairs.iter().enumerate().filter(|(k, _)| mask >> k & 1 == 1).map(|(_, &p)| p).collect();
        t.add_term(pairing_from_links(n, &chosen), C64::from(1.0));
    }
    t
}

/// `2cosλ · empty +` each of the three single strands.
pub fn dotted_triangle(lambda: f64) -> DiskTangle {
    let mut t = DiskTangle::empty(3).scale(C64::from(2.0 * lambda.cos()));
    for links in [(0, 1), (0, 2), (1, 2)] {
        t.add_term(pairing_from_links(3, &[links]), C64::from(1.0));
    }
    t
}

/// Labelled triangle with nodes `[A, B, C]` (the two slanted sides, then
/// the flat side).
pub fn labelled_triangle(m: i32, family: PrefactorFamily, lambda: f64) -> Result<DiskTangle> {
    let k = kappas(family, m, lambda)?;
    let mut t = DiskTangle::zero(3);
    t.add_term(pairing_from_links(3, &[(0, 1)]), k[0]);
    t.add_term(pairing_from_links(3, &[(0, 2)]), k[1]);
    t.add_term(pairing_from_links(3, &[(1, 2)]), k[2]);
    t.add_term(pairing_from_links(3, &[]), k[3]);
    Ok(t)
}

/// Wavy triangle with nodes `[A, B, C]`; `C` is always vacant.
pub fn wavy_triangle(m: i32, family: PrefactorFamily, lambda: f64) -> Result<DiskTangle> {
    let e = epsilons(family, m, lambda)?;
    let mut t = DiskTangle::zero(3);
    t.add_term(pairing_from_links(3, &[(0, 1)]), e[0]);
    t.add_term(pairing_from_links(3, &[]), e[1]);
    Ok(t)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TriangleKind {
    /// No decoration: all three nodes vacant.
    Plain,
    Dotted,
    Wavy(i32),
    Labelled(i32),
}

pub fn triangle_up(kind: TriangleKind, family: PrefactorFamily, lambda: f64) -> Result<DiskTangle> {
    match kind {
        TriangleKind::Plain => Ok(DiskTangle::empty(3)),
        TriangleKind::Dotted => Ok(dotted_triangle(lambda)),
        TriangleKind::Wavy(m) => wavy_triangle(m, family, lambda),
        TriangleKind::Labelled(m) => labelled_triangle(m, family, lambda),
    }
}

/// Braid tile coefficients in [`TILES`] order; `sign = +1` is `u → +i∞`.
pub fn braid_weights(sign: i32, lambda: f64) -> FaceWeights {
    let i = C64::new(0.0, 1.0);
    let ph = (sign as f64 * 2.0 * lambda * i).exp();
    let z = C64::from(0.0);
    let one = C64::from(1.0);
    FaceWeights { rho: [one, z, z, z, z, one, one, -ph, -ph.inv()] }
}

pub fn braid_tangle(sign: i32, lambda: f64) -> DiskTangle {
    face_from_weights(&braid_weights(sign, lambda))
}

/// Parameters for a local identity.
#[derive(Clone, Copy, Debug)]
pub struct LocalParams {
    pub u: C64,
    pub v: C64,
    pub lambda: f64,
    pub m: i32,
    pub family: PrefactorFamily,
    pub sign: i32,
}

impl LocalParams {
    pub fn new(u: f64, v: f64, lambda: f64) -> Self {
        Self { u: C64::from(u), v: C64::from(v), lambda, m: 1, family: PrefactorFamily::Primary, sign: 1 }
    }
}

pub const IDENTITIES: [&str; 14] = [
    "initial",
    "crossing",
    "inversion",
    "ybe",
    "factor_3lambda",
    "factor_2lambda",
    "push_triangle",
    "push_arc",
    "braid_push_arc",
    "braid_push_vacancy",
    "triangle_A4a",
    "triangle_A4b",
    "triangle_A4c",
    "triangle_A4d",
];

/// Residual `max |L − R| / max |L|` over pairings (absolute when `L = 0`).
pub fn residual(lhs: &DiskTangle, rhs: &DiskTangle) -> f64 {
    let diff = lhs.clone().minus(rhs);
    let scale = lhs.max_coefficient();
    let d = diff.max_coefficient();
    if scale > 0.0 {
        d / scale
    } else {
        d
    }
}

pub fn verify_local_identity(id: &str, params: &LocalParams) -> Result<f64> {
    let (l, r) = local_identity_sides(id, params)?;
    Ok(residual(&l, &r))
}

/// Both sides of a registered identity, expanded over pairings of the
/// common boundary.
pub fn local_identity_sides(id: &str, p: &LocalParams) -> Result<(DiskTangle, DiskTangle)> {
    let lam = p.lambda;
    let beta = loop_fugacity(lam);
    let one = C64::from(1.0);
    let lc = C64::from(lam);
    match id {
        "initial" => {
            let l = face_tangle(C64::from(0.0), lam)?;
            Ok((l, dashed_pairs(4, &[(LEFT, TOP), (BOTTOM, RIGHT)])))
        }
        "crossing" => {
            let l = face_tangle(p.u, lam)?;
            let r = face_tangle(3.0 * lc - p.u, lam)?.reorder(&[1, 2, 3, 0]);
            Ok((l, r))
        }
        "inversion" => {
            let a = face_tangle(p.u, lam)?;
            let b = face_tangle(-p.u, lam)?;
            // wires: a = [L, B, R, T], b = [L', B', R', T'] with T–L', R–B'
            let l = contract(&[(&a, &[0, 1, 10, 11]), (&b, &[11, 10, 2, 3])], &[0, 1, 2, 3], beta)?;
            let w = face_weights(p.u, lam)?.rho[7] * face_weights(-p.u, lam)?.rho[7];
            // boundary [L, B, R', T']: L–T', B–R'
            Ok((l, dashed_pairs(4, &[(0, 3), (1, 2)]).scale(w)))
        }
        "ybe" => {
            let d = face_tangle(p.u - p.v, lam)?;
            let fu = face_tangle(p.u, lam)?;
            let fv = face_tangle(p.v, lam)?;
            // boundary labels 0..6: L_u~UL_d, L_v~LL_d, B, R_lower, R_upper, T
            let l = contract(
                &[(&d, &[0, 1, 20, 21]), (&fu, &[20, 2, 3, 22]), (&fv, &[21, 22, 4, 5])],
                &[0, 1, 2, 3, 4, 5],
                beta,
            )?;
            let r = contract(
                &[(&fv, &[1, 2, 30, 31]), (&fu, &[0, 31, 32, 5]), (&d, &[32, 30, 3, 4])],
                &[0, 1, 2, 3, 4, 5],
                beta,
            )?;
            Ok((l, r))
        }
        "factor_3lambda" => {
            let l = face_tangle(3.0 * lc, lam)?;
            Ok((l, dashed_pairs(4, &[(LEFT, BOTTOM), (TOP, RIGHT)])))
        }
        "factor_2lambda" => {
            let l = face_tangle(2.0 * lc, lam)?;
            let t = dotted_triangle(lam);
            let r = contract(&[(&t, &[LEFT, BOTTOM, 9]), (&t, &[TOP, RIGHT, 9])], &[0, 1, 2, 3], beta)?;
            let c = lam.sin() / (3.0 * lam).sin();
            Ok((l, r.scale(C64::from(c))))
        }
        "push_triangle" => {
            let f0 = face_tangle(p.u, lam)?;
            let f2 = face_tangle(p.u + 2.0 * lc, lam)?;
            let f1 = face_tangle(p.u + lc, lam)?;
            let t = dotted_triangle(lam);
            // boundary: 0 lower-left, 1 bottom, 2 right, 3 top, 4 upper-left
            let l = contract(
                &[(&f0, &[0, 1, 10, 11]), (&f2, &[4, 11, 12, 3]), (&t, &[10, 12, 2])],
                &[0, 1, 2, 3, 4],
                beta,
            )?;
            let r = contract(&[(&t, &[0, 4, 20]), (&f1, &[20, 1, 2, 3])], &[0, 1, 2, 3, 4], beta)?;
            let c = s_k(p.u, 2, lam)? * s_k(-p.u, 3, lam)?;
            Ok((l, r.scale(c)))
        }
        "push_arc" => {
            let f0 = face_tangle(p.u, lam)?;
            let f3 = face_tangle(p.u + 3.0 * lc, lam)?;
            let arc = dashed();
            // boundary: 0 L0, 1 B0, 2 T3, 3 L3
            let l = contract(
                &[(&f0, &[0, 1, 10, 11]), (&f3, &[3, 11, 12, 2]), (&arc, &[10, 12])],
                &[0, 1, 2, 3],
                beta,
            )?;
            let c = s_k(p.u, 2, lam)? * s_k(-p.u, 2, lam)? * s_k(p.u, 3, lam)? * s_k(-p.u, 3, lam)?;
            Ok((l, dashed_pairs(4, &[(0, 3), (1, 2)]).scale(c)))
        }
        "braid_push_arc" => {
            let b = braid_tangle(p.sign, lam);
            let cap = DiskTangle::from_links(2, &[(0, 1)], one);
            // boundary: 0 L1, 1 B1, 2 B2, 3 R2
            let l = contract(
                &[(&b, &[0, 1, 10, 11]), (&b, &[10, 2, 3, 12]), (&cap, &[11, 12])],
                &[0, 1, 2, 3],
                beta,
            )?;
            let r = DiskTangle::from_links(4, &[(0, 3), (1, 2)], one)
                .plus(&DiskTangle::from_links(4, &[(1, 2)], one));
            Ok((l, r))
        }
        "braid_push_vacancy" => {
            let b = braid_tangle(p.sign, lam);
            let vac = DiskTangle::empty(1);
            // boundary: 0 L, 1 B, 2 R
            let l = contract(&[(&b, &[0, 1, 2, 10]), (&vac, &[10])], &[0, 1, 2], beta)?;
            let r = dashed_pairs(3, &[(0, 2)]);
            Ok((l, r))
        }
        "triangle_A4a" => {
            let t1 = labelled_triangle(1, p.family, lam)?;
            let d = dotted_triangle(lam);
            // boundary: 0 top (C), 1 bottom (dotted base)
            let l = contract(&[(&t1, &[10, 11, 0]), (&d, &[10, 11, 1])], &[0, 1], beta)?;
            Ok((l, dashed()))
        }
        "triangle_A4b" => {
            let (l, _) = a4_composite(p, false)?;
            let m = p.m;
            let t1 = labelled_triangle(m + 1, p.family, lam)?;
            let d = dotted_triangle(lam);
            let w = wavy_triangle(m, p.family, lam)?;
            let x = contract(&[(&t1, &[10, 11, 0]), (&d, &[10, 11, 3])], &[0, 3], beta)?;
            // boundary: 0 C1, 1 UL, 2 LL, 3 base
            let mut r = dashed_pairs(4, &[(1, 2), (0, 3)]).scale(C64::from(-1.0));
            let dll = dashed();
            let t2 = contract(&[(&dll, &[1, 2]), (&x, &[0, 3])], &[0, 1, 2, 3], beta)?;
            let vac = DiskTangle::empty(1);
            let t3 = contract(&[(&dll, &[1, 0]), (&w, &[2, 3, 9]), (&vac, &[9])], &[0, 1, 2, 3], beta)?;
            r = r.plus(&t2).plus(&t3);
            Ok((l, r))
        }
        "triangle_A4c" => {
            let w = wavy_triangle(1, p.family, lam)?;
            let arc = dashed();
            let vac = DiskTangle::empty(1);
            let l = contract(&[(&w, &[10, 11, 12]), (&arc, &[10, 11]), (&vac, &[12])], &[], beta)?;
            Ok((l, DiskTangle::empty(0)))
        }
        "triangle_A4d" => {
            let (l, _) = a4_composite(p, true)?;
            let w = wavy_triangle(p.m + 1, p.family, lam)?;
            let e = w.coefficient(&pairing_from_links(3, &[(0, 1)])) * beta
                + w.coefficient(&pairing_from_links(3, &[]));
            // C1 stays vacant; the other three nodes carry the dashed line
            let r = dashed_pairs(4, &[(1, 2)]);
            let r = contract(&[(&r, &[1, 2, 3, 9]), (&DiskTangle::empty(1), &[0]), (&DiskTangle::empty(1), &[9])], &[0, 1, 2, 3], beta)?;
            Ok((l, r.scale(e - 1.0)))
        }
        other => Err(Error::UnknownIdentity(other.to_string())),
    }
}

/// The four-triangle composite: labelled (or wavy) `m+1` on top, dotted
/// on its left, labelled `m` below that, dotted below the first, with the
/// right-hand sides of the top and bottom triangles joined by a dashed
/// segment. Boundary `[C1, UL, LL, base]`.
fn a4_composite(p: &LocalParams, wavy_top: bool) -> Result<(DiskTangle, ())> {
    let lam = p.lambda;
    let beta = loop_fugacity(lam);
    let top = if wavy_top {
        wavy_triangle(p.m + 1, p.family, lam)?
    } else {
        labelled_triangle(p.m + 1, p.family, lam)?
    };
    let d = dotted_triangle(lam);
    let mid = labelled_triangle(p.m, p.family, lam)?;
    let seg = dashed();
    // wires: 10 = A1 (top ∩ left dotted), 11 = B1, 12 = left dotted base = mid C,
    // 13 = mid B = lower dotted left, 14 = lower dotted right
    let l = contract(
        &[
            (&top, &[10, 11, 0]),
            (&d, &[1, 10, 12]),
            (&mid, &[2, 13, 12]),
            (&d, &[13, 14, 3]),
            (&seg, &[14, 11]),
        ],
        &[0, 1, 2, 3],
        beta,
    )?;
    Ok((l, ()))
}

/// Twenty seeded random draws for a registry identity, in the admissible
/// λ window away from singular points.
pub fn random_params(rng: &mut impl rand::Rng, id: &str) -> LocalParams {
    let lambda = loop {
        let l = if rng.gen_bool(0.5) {
            rng.gen_range(0.1..PI / 4.0)
        } else {
            rng.gen_range(PI / 4.0 + 0.05..0.45 * PI)
        };
        if !crate::scalars::is_singular_lambda(l) && (l - PI / 3.0).abs() > 0.02 {
            break l;
        }
    };
    let u = C64::new(rng.gen_range(-1.5..1.5), rng.gen_range(-0.5..0.5));
    let v = C64::new(rng.gen_range(-1.5..1.5), rng.gen_range(-0.5..0.5));
    let m = if id.starts_with("triangle") { rng.gen_range(1..=4) } else { 1 };
    let family = if rng.gen_bool(0.5) { PrefactorFamily::Primary } else { PrefactorFamily::Alternate };
    let sign = if rng.gen_bool(0.5) { 1 } else { -1 };
    LocalParams { u, v, lambda, m, family, sign }
}
