//! Standard-module bases of the periodic dilute Temperley–Lieb algebra and
//! the scalar bookkeeping of its action.
//!
//! Nodes are numbered `0..N` from left to right; the cylinder is cut between
//! node `N − 1` and node `0`. A path crossing that cut while moving left
//! contributes `+1` to its winding, moving right `−1`.

use std::collections::HashMap;
use std::fmt;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::scalars::SpectralContext;

/// Coefficient of `x^k` in `(x + 1 + 1/x)^n`.
pub fn trinomial(n: usize, k: i64) -> u64 {
    if k.unsigned_abs() as usize > n {
        return 0;
    }
    // row[j] holds the coefficient of x^{j - n}
    let mut row = vec![0u64; 2 * n + 1];
    row[n] = 1;
    for _ in 0..n {
        let mut next = vec![0u64; 2 * n + 1];
        for (j, &c) in row.iter().enumerate() {
            if c == 0 {
                continue;
            }
            next[j] += c;
            if j > 0 {
                next[j - 1] += c;
            }
            if j + 1 < next.len() {
                next[j + 1] += c;
            }
        }
        row = next;
    }
    row[(k + n as i64) as usize]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Site {
    Vacant,
    Defect,
    /// Arc endpoint; `seam` is true when the arc passes through the cut.
    Arc { partner: u8, seam: bool },
}

/// A dilute link state on the boundary of a half-infinite cylinder.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LinkState {
    sites: Vec<Site>,
}

impl LinkState {
    /// Builds a state and checks it is planar.
    pub fn new(sites: Vec<Site>) -> Result<Self> {
        let s = Self { sites };
        s.validate()?;
        Ok(s)
    }

    pub fn sites(&self) -> &[Site] {
        &self.sites
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn defects(&self) -> usize {
        self.sites.iter().filter(|s| matches!(s, Site::Defect)).count()
    }

    /// Arcs as `(i, j, seam)` with `i < j`.
    pub fn arcs(&self) -> Vec<(usize, usize, bool)> {
        self.sites
            .iter()
            .enumerate()
            .filter_map(|(i, s)| match *s {
                Site::Arc { partner, seam } if i < partner as usize => Some((i, partner as usize, seam)),
                _ => None,
            })
            .collect()
    }

    /// Winding picked up walking the arc from `i` to its partner.
    fn arc_winding(&self, i: usize) -> i32 {
        match self.sites[i] {
            Site::Arc { partner, seam: true } => {
                if i < partner as usize {
                    1
                } else {
                    -1
                }
            }
            _ => 0,
        }
    }

    /// Sort key: roles (with partners) first, then seam flags.
    pub fn sort_key(&self) -> (Vec<(u8, u8)>, Vec<bool>) {
        let roles = self
            .sites
            .iter()
            .enumerate()
            .map(|(i, s)| match *s {
                Site::Vacant => (0, 0),
                Site::Defect => (1, 0),
                Site::Arc { partner, .. } if (partner as usize) > i => (2, partner),
                Site::Arc { partner, .. } => (3, partner),
            })
            .collect();
        let seams = self.arcs().into_iter().map(|(_, _, s)| s).collect();
        (roles, seams)
    }

    /// Unrolled planarity test: three adjacent copies of the fundamental
    /// domain, every arc drawn as a chord on the line. Valid iff no two
    /// chords cross and no chord covers a defect.
    pub fn validate(&self) -> Result<()> {
        let n = self.sites.len();
        let mut chords = Vec::new();
        let mut defects = Vec::new();
        for (i, s) in self.sites.iter().enumerate() {
            match *s {
                Site::Vacant => {}
                Site::Defect => defects.push(i),
                Site::Arc { partner, seam } => {
                    let j = partner as usize;
                    if j >= n || j == i {
                        return Err(Error::MalformedDiagram(format!("bad partner at node {i}")));
                    }
                    match self.sites[j] {
                        Site::Arc { partner: back, seam: s2 } if back as usize == i && s2 == seam => {}
                        _ => return Err(Error::MalformedDiagram(format!("unmatched arc at node {i}"))),
                    }
                    if i < j {
                        chords.push(if seam { (j, i + n) } else { (i, j) });
                    }
                }
            }
        }
        let mut all = Vec::new();
        let mut pins = Vec::new();
        for copy in 0..3 {
            let off = copy * n;
            all.extend(chords.iter().map(|&(a, b)| (a + off, b + off)));
            pins.extend(defects.iter().map(|&p| p + off));
        }
        for (x, &(a, b)) in all.iter().enumerate() {
            if pins.iter().any(|&p| a < p && p < b) {
                return Err(Error::MalformedDiagram(format!("arc covers a defect: {self}")));
            }
            for &(c, d) in &all[x + 1..] {
                if (a < c && c < b && b < d) || (c < a && a < d && d < b) {
                    return Err(Error::MalformedDiagram(format!("crossing arcs: {self}")));
                }
            }
        }
        Ok(())
    }

    /// Parses the dump format: `V`, `D`, `(`/`)` for arcs in front of the
    /// cut, `]`/`[` for arcs through it.
    pub fn parse(text: &str) -> Result<Self> {
        let chars: Vec<char> = text.trim().chars().collect();
        let n = chars.len();
        let mut sites = vec![Site::Vacant; n];
        let mut stack = Vec::new();
        let mut closers = Vec::new();
        let mut openers = Vec::new();
        for (i, &c) in chars.iter().enumerate() {
            match c {
                'V' => {}
                'D' => sites[i] = Site::Defect,
                '(' => stack.push(i),
                ')' => {
                    let j = stack
                        .pop()
                        .ok_or_else(|| Error::MalformedDiagram(format!("unbalanced `)` in {text}")))?;
                    sites[i] = Site::Arc { partner: j as u8, seam: false };
                    sites[j] = Site::Arc { partner: i as u8, seam: false };
                }
                ']' => closers.push(i),
                '[' => openers.push(i),
                other => return Err(Error::MalformedDiagram(format!("unexpected `{other}`"))),
            }
        }
        if !stack.is_empty() || closers.len() != openers.len() {
            return Err(Error::MalformedDiagram(format!("unbalanced brackets in {text}")));
        }
        for (&i, &j) in closers.iter().zip(openers.iter().rev()) {
            sites[i] = Site::Arc { partner: j as u8, seam: true };
            sites[j] = Site::Arc { partner: i as u8, seam: true };
        }
        Self::new(sites)
    }
}

impl fmt::Display for LinkState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.sites.iter().enumerate() {
            let c = match *s {
                Site::Vacant => 'V',
                Site::Defect => 'D',
                Site::Arc { partner, seam: false } => {
                    if (partner as usize) > i {
                        '('
                    } else {
                        ')'
                    }
                }
                Site::Arc { partner, seam: true } => {
                    if (partner as usize) > i {
                        ']'
                    } else {
                        '['
                    }
                }
            };
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

/// Ordered basis of `V_{N,d}`.
#[derive(Clone, Debug)]
pub struct ModuleBasis {
    pub n: usize,
    pub d: usize,
    pub states: Vec<LinkState>,
    index: HashMap<LinkState, usize>,
}

impl ModuleBasis {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn index_of(&self, s: &LinkState) -> Option<usize> {
        self.index.get(s).copied()
    }
}

/// All link states of width `n` with exactly `d` defects, sorted.
pub fn enumerate_link_states(n: usize, d: usize) -> Result<ModuleBasis> {
    if d > n {
        return Err(Error::InvalidSector { n, d });
    }
    let mut out = Vec::new();
    let mut word = Vec::with_capacity(n);
    grow(n, d, &mut word, 0, false, 0, 0, &mut out);
    let mut states: Vec<LinkState> = out
        .into_iter()
        .filter_map(|w: String| LinkState::parse(&w).ok())
        .collect();
    states.sort_by_key(|s| s.sort_key());
    let index = states.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect();
    Ok(ModuleBasis { n, d, states, index })
}

#[allow(clippy::too_many_arguments)]
fn grow(
    n: usize,
    d: usize,
    word: &mut Vec<char>,
    open: usize,
    seen_opener: bool,
    closers: usize,
    defects: usize,
    out: &mut Vec<String>,
) {
    let left = n - word.len();
    if left == 0 {
        if open == 0 && defects == d && closers == 0 {
            out.push(word.iter().collect());
        }
        return;
    }
    // `closers` counts seam arcs still waiting for their `[`
    if open + closers > left || defects + left < d {
        return;
    }
    let mut push = |c: char, open, seen, closers, defects| {
        word.push(c);
        grow(n, d, word, open, seen, closers, defects, out);
        word.pop();
    };
    push('V', open, seen_opener, closers, defects);
    if defects < d {
        push('D', open, seen_opener, closers, defects + 1);
    }
    push('(', open + 1, seen_opener, closers, defects);
    if open > 0 {
        push(')', open - 1, seen_opener, closers, defects);
    }
    if !seen_opener {
        push(']', open, false, closers + 1, defects);
    }
    if closers > 0 {
        push('[', open, true, closers - 1, defects);
    }
}

/// Exponents of α, β and ω produced by one action.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct ActionScalar {
    pub n_alpha: u32,
    pub n_beta: u32,
    pub n_omega: i32,
}

impl ActionScalar {
    pub fn value(&self, ctx: &SpectralContext) -> C64 {
        let w = if ctx.flip_winding { -self.n_omega } else { self.n_omega };
        ctx.alpha.powu(self.n_alpha) * ctx.beta().powu(self.n_beta) * ctx.omega.powi(w)
    }

    pub fn combine(self, other: Self) -> Self {
        Self {
            n_alpha: self.n_alpha + other.n_alpha,
            n_beta: self.n_beta + other.n_beta,
            n_omega: self.n_omega + other.n_omega,
        }
    }
}

/// A connectivity of `pdTL_N`: `n` top nodes (indices `0..n`) and `n`
/// bottom nodes (indices `n..2n`). `links[i] = Some((j, w))` joins `i` to
/// `j` with winding `w` when walked from `i` to `j`; `None` is a vacancy.
/// Loops already closed off are kept in `loops`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Diagram {
    pub n: usize,
    pub links: Vec<Option<(usize, i32)>>,
    pub loops: ActionScalar,
}

impl Diagram {
    /// Straight vertical strands through the occupied nodes only; the
    /// identity of the algebra is the sum of these over all occupancies.
    pub fn through_strands(occupied: &[bool]) -> Self {
        let n = occupied.len();
        let mut links = vec![None; 2 * n];
        for j in (0..n).filter(|&j| occupied[j]) {
            links[j] = Some((n + j, 0));
            links[n + j] = Some((j, 0));
        }
        Self { n, links, loops: ActionScalar::default() }
    }

    /// Every node vacant.
    pub fn empty(n: usize) -> Self {
        Self { n, links: vec![None; 2 * n], loops: ActionScalar::default() }
    }

    fn check(&self) -> Result<()> {
        if self.links.len() != 2 * self.n {
            return Err(Error::MalformedDiagram(format!(
                "{} endpoints for width {}",
                self.links.len(),
                self.n
            )));
        }
        for (i, l) in self.links.iter().enumerate() {
            if let Some((j, w)) = *l {
                if j >= self.links.len() || self.links[j] != Some((i, -w)) {
                    return Err(Error::MalformedDiagram(format!("link {i} -> {j} not symmetric")));
                }
            }
        }
        Ok(())
    }
}

/// Standard action: `w` sits on top of `diagram`, the result is read from
/// its bottom nodes. `Ok(None)` is the zero vector.
pub fn standard_action(diagram: &Diagram, w: &LinkState) -> Result<Option<(ActionScalar, LinkState)>> {
    let n = diagram.n;
    if w.len() != n {
        return Err(Error::MalformedDiagram(format!("state width {} vs diagram width {n}", w.len())));
    }
    diagram.check()?;
    Ok(act(diagram, w))
}

pub(crate) fn act(diagram: &Diagram, w: &LinkState) -> Option<(ActionScalar, LinkState)> {
    let n = diagram.n;
    let sites = w.sites();
    for j in 0..n {
        if diagram.links[j].is_some() != !matches!(sites[j], Site::Vacant) {
            return None;
        }
    }
    let mut scalar = diagram.loops;
    let mut seen = vec![false; n];
    let mut out = vec![Site::Vacant; n];
    let mut found = 0usize;
    for b in 0..n {
        if !matches!(out[b], Site::Vacant) {
            continue;
        }
        let Some((mut next, mut wind)) = diagram.links[n + b] else { continue };
        loop {
            if next >= n {
                let c = next - n;
                // walked b -> c; arcs are stored with their seam flag read i -> j, i < j
                let (lo, hi, wlo) = if b < c { (b, c, wind) } else { (c, b, -wind) };
                debug_assert!(wlo == 0 || wlo == 1, "arc winding {wlo}");
                let seam = wlo != 0;
                out[lo] = Site::Arc { partner: hi as u8, seam };
                out[hi] = Site::Arc { partner: lo as u8, seam };
                break;
            }
            let t = next;
            seen[t] = true;
            match sites[t] {
                Site::Defect => {
                    out[b] = Site::Defect;
                    // the defect travels downward: reverse the walk
                    scalar.n_omega -= wind;
                    found += 1;
                    break;
                }
                Site::Arc { partner, .. } => {
                    wind += w.arc_winding(t);
                    let p = partner as usize;
                    seen[p] = true;
                    let (nx, dw) = diagram.links[p].expect("occupancy checked");
                    next = nx;
                    wind += dw;
                }
                Site::Vacant => unreachable!("occupancy checked"),
            }
        }
    }
    if found != w.defects() {
        return None;
    }
    for t in 0..n {
        if seen[t] || matches!(sites[t], Site::Vacant) {
            continue;
        }
        let mut cur = t;
        let mut wind = 0;
        loop {
            seen[cur] = true;
            let Site::Arc { partner, .. } = sites[cur] else { unreachable!("defects all reached") };
            wind += w.arc_winding(cur);
            let p = partner as usize;
            seen[p] = true;
            let (nx, dw) = diagram.links[p].expect("occupancy checked");
            debug_assert!(nx < n, "closed loop reached a bottom node");
            wind += dw;
            cur = nx;
            if cur == t {
                break;
            }
        }
        if wind == 0 {
            scalar.n_beta += 1;
        } else {
            scalar.n_alpha += 1;
        }
    }
    Some((scalar, LinkState { sites: out }))
}

/// Product `lower · upper`: `upper` stacked above `lower`. `None` is zero.
pub fn compose(lower: &Diagram, upper: &Diagram) -> Result<Option<Diagram>> {
    if lower.n != upper.n {
        return Err(Error::MalformedDiagram("width mismatch".into()));
    }
    lower.check()?;
    upper.check()?;
    let n = lower.n;
    // middle node j: upper bottom (n + j) == lower top (j)
    for j in 0..n {
        if upper.links[n + j].is_some() != lower.links[j].is_some() {
            return Ok(None);
        }
    }
    // result nodes: upper top 0..n, lower bottom n..2n
    let mut links = vec![None; 2 * n];
    let mut loops = lower.loops.combine(upper.loops);
    let mut mid_seen = vec![false; n];
    // endpoint e in result numbering: (diagram, local index)
    let start = |e: usize| if e < n { (true, e) } else { (false, e) };
    for e in 0..2 * n {
        if links[e].is_some() {
            continue;
        }
        let (mut in_upper, mut idx) = start(e);
        let first = if in_upper { upper.links[idx] } else { lower.links[idx] };
        let Some((mut nx, mut wind)) = first else { continue };
        loop {
            let in_middle = if in_upper { nx >= n } else { nx < n };
            if !in_middle {
                let end = nx;
                links[e] = Some((end, wind));
                links[end] = Some((e, -wind));
                break;
            }
            let j = if in_upper { nx - n } else { nx };
            mid_seen[j] = true;
            // cross to the other diagram
            if in_upper {
                in_upper = false;
                idx = j;
                let (a, w) = lower.links[idx].expect("occupancy checked");
                nx = a;
                wind += w;
            } else {
                in_upper = true;
                idx = n + j;
                let (a, w) = upper.links[idx].expect("occupancy checked");
                nx = a;
                wind += w;
            }
        }
    }
    for j in 0..n {
        if mid_seen[j] || lower.links[j].is_none() {
            continue;
        }
        // closed loop through the middle row
        let mut wind = 0;
        let mut cur = j;
        loop {
            mid_seen[cur] = true;
            let (a, w) = lower.links[cur].unwrap();
            debug_assert!(a < n);
            wind += w;
            mid_seen[a] = true;
            let (b, w2) = upper.links[n + a].unwrap();
            debug_assert!(b >= n);
            wind += w2;
            cur = b - n;
            if cur == j {
                break;
            }
        }
        if wind == 0 {
            loops.n_beta += 1;
        } else {
            loops.n_alpha += 1;
        }
    }
    Ok(Some(Diagram { n, links, loops }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trinomial_values() {
        assert_eq!(trinomial(3, 1), 6);
        assert_eq!(trinomial(4, 0), 19);
        assert_eq!(trinomial(5, 5), 1);
        assert_eq!(trinomial(3, 4), 0);
        assert_eq!(trinomial(3, -1), 6);
    }

    #[test]
    fn small_sectors() {
        let dims: Vec<usize> = (0..=3).map(|d| enumerate_link_states(3, d).unwrap().len()).collect();
        assert_eq!(dims, vec![7, 6, 3, 1]);
    }

    #[test]
    fn parse_round_trip() {
        for n in 1..=6 {
            for d in 0..=n {
                for s in enumerate_link_states(n, d).unwrap().states {
                    assert_eq!(LinkState::parse(&s.to_string()).unwrap(), s);
                }
            }
        }
    }

    #[test]
    fn identity_action() {
        for n in 1..=5 {
            for d in 0..=n {
                for s in enumerate_link_states(n, d).unwrap().states {
                    let occ: Vec<bool> = s.sites().iter().map(|x| *x != Site::Vacant).collect();
                    let id = Diagram::through_strands(&occ);
                    let (sc, r) = act(&id, &s).unwrap();
                    assert_eq!(sc, ActionScalar::default());
                    assert_eq!(r, s);
                }
            }
        }
    }
}
