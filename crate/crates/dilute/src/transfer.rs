//! Single-row transfer matrices on the standard modules.
//!
//! A row of `N` faces is expanded over tile configurations whose
//! horizontal edges agree on occupancy. Each configuration is a `pdTL_N`
//! connectivity; its action on every basis state is computed once per
//! sector and reused for every spectral parameter and weight choice.

use std::collections::HashMap;
use std::sync::Arc;

use faer::Mat;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::CMat;
use crate::linkstates::{act, enumerate_link_states, ActionScalar, Diagram, ModuleBasis, Site};
use crate::planar::{braid_weights, BOTTOM, LEFT, RIGHT, TILES, TOP};
use crate::scalars::{FaceWeights, SpectralContext};

/// Largest |Im u| at which trigonometric weights are evaluated.
pub const MAX_IMAG_U: f64 = 30.0;

/// Per-tile side partner: `PARTNER[tile][side]` is the side joined to
/// `side`, or `None` when the side is vacant.
fn partner_table() -> [[Option<usize>; 4]; 9] {
    let mut t = [[None; 4]; 9];
    for (k, (_, links)) in TILES.iter().enumerate() {
        for &(a, b) in links.iter() {
            t[k][a] = Some(b);
            t[k][b] = Some(a);
        }
    }
    t
}

/// Tile obtained by rotating tile `k` a quarter turn counter-clockwise.
pub fn rotate_tile(k: usize) -> usize {
    let rot = |s: usize| (s + 1) % 4;
    let mut target: Vec<(usize, usize)> = TILES[k].1.iter().map(|&(a, b)| {
        let (x, y) = (rot(a), rot(b));
        (x.min(y), x.max(y))
    }).collect();
    target.sort();
    TILES
        .iter()
        .position(|(_, links)| {
            let mut l: Vec<(usize, usize)> = links.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
            l.sort();
            l == target
        })
        .expect("tile set closed under rotation")
}

/// Row connectivity of a tile configuration.
pub fn row_diagram(shapes: &[u8]) -> Diagram {
    let n = shapes.len();
    let partner = partner_table();
    let mut d = Diagram::empty(n);
    for start in 0..2 * n {
        if d.links[start].is_some() {
            continue;
        }
        let (mut j, mut side) = if start < n { (start, TOP) } else { (start - n, BOTTOM) };
        let mut wind = 0;
        let Some(mut s2) = partner[shapes[j] as usize][side] else { continue };
        loop {
            match s2 {
                TOP => {
                    d.links[start] = Some((j, wind));
                    d.links[j] = Some((start, -wind));
                    break;
                }
                BOTTOM => {
                    d.links[start] = Some((n + j, wind));
                    d.links[n + j] = Some((start, -wind));
                    break;
                }
                RIGHT => {
                    if j == n - 1 {
                        wind -= 1;
                        j = 0;
                    } else {
                        j += 1;
                    }
                    side = LEFT;
                }
                _ => {
                    if j == 0 {
                        wind += 1;
                        j = n - 1;
                    } else {
                        j -= 1;
                    }
                    side = RIGHT;
                }
            }
            s2 = partner[shapes[j] as usize][side].expect("occupancy-consistent configuration");
        }
    }
    if shapes.iter().all(|&s| s == 5) {
        d.loops.n_alpha = 1;
    }
    d
}

fn left_occupied(k: usize) -> bool {
    TILES[k].1.iter().any(|&(a, b)| a == LEFT || b == LEFT)
}

fn right_occupied(k: usize) -> bool {
    TILES[k].1.iter().any(|&(a, b)| a == RIGHT || b == RIGHT)
}

fn top_occupied(k: usize) -> bool {
    TILES[k].1.iter().any(|&(a, b)| a == TOP || b == TOP)
}

/// Tile configurations with matching horizontal occupancies, in
/// lexicographic order.
pub fn consistent_configurations(n: usize) -> Vec<Vec<u8>> {
    fn grow(n: usize, first_left: bool, prev_right: bool, cur: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
        if cur.len() == n {
            if prev_right == first_left {
                out.push(cur.clone());
            }
            return;
        }
        for k in 0..9 {
            let want = if cur.is_empty() { first_left } else { prev_right };
            if left_occupied(k) != want {
                continue;
            }
            cur.push(k as u8);
            grow(n, first_left, right_occupied(k), cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    for first_left in [false, true] {
        grow(n, first_left, false, &mut Vec::new(), &mut out);
    }
    out.sort();
    out
}

struct RowConfig {
    shapes: Vec<u8>,
    /// `(out, in, scalar)` for every basis state with a nonzero image.
    entries: Vec<(u32, u32, ActionScalar)>,
}

/// Cached action of every row configuration on one sector.
pub struct RowStructure {
    configs: Vec<RowConfig>,
}

impl RowStructure {
    pub fn new(basis: &ModuleBasis) -> Self {
        let n = basis.n;
        let mut by_top: HashMap<Vec<bool>, Vec<usize>> = HashMap::new();
        for (i, s) in basis.states.iter().enumerate() {
            let occ = s.sites().iter().map(|x| *x != Site::Vacant).collect();
            by_top.entry(occ).or_default().push(i);
        }
        let configs = consistent_configurations(n)
            .into_iter()
            .filter_map(|shapes| {
                let occ: Vec<bool> = shapes.iter().map(|&k| top_occupied(k as usize)).collect();
                let states = by_top.get(&occ)?;
                let diagram = row_diagram(&shapes);
                let entries: Vec<_> = states
                    .iter()
                    .filter_map(|&i| {
                        let (sc, out) = act(&diagram, &basis.states[i])?;
                        let o = basis.index_of(&out).expect("image lies in the basis");
                        Some((o as u32, i as u32, sc))
                    })
                    .collect();
                (!entries.is_empty()).then_some(RowConfig { shapes, entries })
            })
            .collect();
        Self { configs }
    }

    pub fn len(&self) -> usize {
        self.configs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.configs.is_empty()
    }

    /// `Σ_config Π_j weights[j][shape_j] · action`.
    pub fn assemble(&self, dim: usize, weights: &[FaceWeights], ctx: &SpectralContext) -> CMat {
        let mut cache: HashMap<ActionScalar, C64> = HashMap::new();
        let mut m: CMat = Mat::zeros(dim, dim);
        for cfg in &self.configs {
            let w: C64 = cfg.shapes.iter().zip(weights).map(|(&k, fw)| fw.rho[k as usize]).product();
            if w == C64::from(0.0) {
                continue;
            }
            for &(o, i, sc) in &cfg.entries {
                let v = *cache.entry(sc).or_insert_with(|| sc.value(ctx));
                m[(o as usize, i as usize)] += w * v;
            }
        }
        m
    }
}

/// Basis and cached row action for `V_{N,d}`.
#[derive(Clone)]
pub struct Sector {
    pub basis: Arc<ModuleBasis>,
    row: Arc<RowStructure>,
}

impl Sector {
    pub fn new(n: usize, d: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidWidth);
        }
        let basis = enumerate_link_states(n, d)?;
        let row = RowStructure::new(&basis);
        Ok(Self { basis: Arc::new(basis), row: Arc::new(row) })
    }

    pub fn n(&self) -> usize {
        self.basis.n
    }

    pub fn d(&self) -> usize {
        self.basis.d
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn row(&self) -> &RowStructure {
        &self.row
    }
}

/// A transfer matrix on one sector, with its fusion label and shift.
#[derive(Clone, Debug)]
pub struct TransferMatrix {
    pub label: (usize, usize),
    pub shift: i32,
    pub n: usize,
    pub d: usize,
    pub u: C64,
    pub entries: CMat,
}

fn check_ctx(sector: &Sector, ctx: &SpectralContext) -> Result<()> {
    if ctx.n != sector.n() {
        return Err(Error::InvalidSector { n: ctx.n, d: sector.d() });
    }
    if ctx.xi.len() != ctx.n {
        return Err(Error::InvalidXi { expected: ctx.n, got: ctx.xi.len() });
    }
    Ok(())
}

fn guard_imag(u: C64) -> Result<()> {
    if u.im.abs() > MAX_IMAG_U {
        return Err(Error::NearSingularU { k: 0, value: u.im });
    }
    Ok(())
}

/// `T^{1,0}(u)`: faces at `u − ξ_j`.
pub fn build_fundamental(u: C64, sector: &Sector, ctx: &SpectralContext) -> Result<TransferMatrix> {
    check_ctx(sector, ctx)?;
    guard_imag(u)?;
    let weights: Vec<FaceWeights> = ctx.xi.iter().map(|&x| ctx.face(u - x)).collect();
    Ok(TransferMatrix {
        label: (1, 0),
        shift: 0,
        n: sector.n(),
        d: sector.d(),
        u,
        entries: sector.row.assemble(sector.dim(), &weights, ctx),
    })
}

/// `T^{0,1}(u)`: quarter-turned faces at `2λ − u + ξ_j`.
pub fn build_conjugate(u: C64, sector: &Sector, ctx: &SpectralContext) -> Result<TransferMatrix> {
    check_ctx(sector, ctx)?;
    guard_imag(u)?;
    let lam = C64::from(ctx.lambda);
    let weights: Vec<FaceWeights> = ctx
        .xi
        .iter()
        .map(|&x| {
            let w = ctx.face(2.0 * lam - u + x);
            let mut r = FaceWeights { rho: [C64::from(0.0); 9] };
            for k in 0..9 {
                r.rho[rotate_tile(k)] = w.rho[k];
            }
            r
        })
        .collect();
    Ok(TransferMatrix {
        label: (0, 1),
        shift: 0,
        n: sector.n(),
        d: sector.d(),
        u,
        entries: sector.row.assemble(sector.dim(), &weights, ctx),
    })
}

/// `T_{±∞}` from the braid tiles; `sign = +1` is `u → +i∞`.
pub fn build_braid(sign: i32, sector: &Sector, ctx: &SpectralContext) -> Result<TransferMatrix> {
    check_ctx(sector, ctx)?;
    let weights = vec![braid_weights(sign, ctx.lambda); sector.n()];
    Ok(TransferMatrix {
        label: (1, 0),
        shift: 0,
        n: sector.n(),
        d: sector.d(),
        u: C64::new(0.0, sign as f64 * f64::INFINITY),
        entries: sector.row.assemble(sector.dim(), &weights, ctx),
    })
}

/// Brute-force `T^{1,0}(u)` over all `9^N` tile assignments, tracing each
/// row through a generic edge graph. Reference implementation for small N.
pub fn build_fundamental_bruteforce(u: C64, basis: &ModuleBasis, ctx: &SpectralContext) -> CMat {
    let n = basis.n;
    let weights: Vec<FaceWeights> = ctx.xi.iter().map(|&x| ctx.face(u - x)).collect();
    let dim = basis.len();
    let mut m: CMat = Mat::zeros(dim, dim);
    let total = 9usize.pow(n as u32);
    for code in 0..total {
        let mut c = code;
        let shapes: Vec<u8> = (0..n)
            .map(|_| {
                let k = (c % 9) as u8;
                c /= 9;
                k
            })
            .collect();
        let Some(diagram) = graph_row(&shapes) else { continue };
        let w: C64 = shapes.iter().zip(&weights).map(|(&k, fw)| fw.rho[k as usize]).product();
        for (i, s) in basis.states.iter().enumerate() {
            if let Some((sc, out)) = act(&diagram, s) {
                let o = basis.index_of(&out).unwrap();
                m[(o, i)] += w * sc.value(ctx);
            }
        }
    }
    m
}

/// Row connectivity built from an explicit graph: vertices are face sides,
/// edges are tile strands (winding 0) and horizontal bonds (winding −1 when
/// crossing the cut rightwards). Returns `None` on occupancy mismatch.
fn graph_row(shapes: &[u8]) -> Option<Diagram> {
    let n = shapes.len();
    let v = |j: usize, s: usize| 4 * j + s;
    let mut adj: Vec<Vec<(usize, i32)>> = vec![Vec::new(); 4 * n];
    for (j, &k) in shapes.iter().enumerate() {
        for &(a, b) in TILES[k as usize].1.iter() {
            adj[v(j, a)].push((v(j, b), 0));
            adj[v(j, b)].push((v(j, a), 0));
        }
    }
    for j in 0..n {
        let (r, l) = (v(j, RIGHT), v((j + 1) % n, LEFT));
        let (ro, lo) = (!adj[r].is_empty(), !adj[l].is_empty());
        if ro != lo {
            return None;
        }
        if ro {
            let w = if j == n - 1 { -1 } else { 0 };
            adj[r].push((l, w));
            adj[l].push((r, -w));
        }
    }
    let terminal = |x: usize| x % 4 == TOP || x % 4 == BOTTOM;
    let index = |x: usize| if x % 4 == TOP { x / 4 } else { n + x / 4 };
    let mut d = Diagram::empty(n);
    let mut seen = vec![false; 4 * n];
    for start in (0..4 * n).filter(|&x| terminal(x)) {
        if seen[start] || adj[start].is_empty() {
            continue;
        }
        let (mut prev, mut cur, mut wind) = (start, adj[start][0].0, adj[start][0].1);
        seen[start] = true;
        while !terminal(cur) {
            seen[cur] = true;
            let &(nx, w) = adj[cur].iter().find(|&&(y, _)| y != prev).expect("degree two");
            prev = cur;
            cur = nx;
            wind += w;
        }
        seen[cur] = true;
        d.links[index(start)] = Some((index(cur), wind));
        d.links[index(cur)] = Some((index(start), -wind));
    }
    // closed loops live on horizontal bonds only
    if (0..4 * n).any(|x| !seen[x] && !adj[x].is_empty()) {
        d.loops.n_alpha = 1;
    }
    Some(d)
}

/// Column-major dump with a one-line header.
pub fn dump(t: &TransferMatrix, ctx: &SpectralContext) -> String {
    use std::fmt::Write;
    let mut s = String::new();
    let xi: Vec<String> = ctx.xi.iter().map(|x| format!("{}{:+}i", x.re, x.im)).collect();
    let _ = writeln!(
        s,
        "# N={} d={} u={}{:+}i lambda={} xi=[{}] omega={}{:+}i label=({},{}) shift={}",
        t.n,
        t.d,
        t.u.re,
        t.u.im,
        ctx.lambda,
        xi.join(","),
        ctx.omega.re,
        ctx.omega.im,
        t.label.0,
        t.label.1,
        t.shift
    );
    for j in 0..t.entries.ncols() {
        for i in 0..t.entries.nrows() {
            let v = t.entries[(i, j)];
            let _ = writeln!(s, "{:.17e} {:.17e}", v.re, v.im);
        }
    }
    s
}
