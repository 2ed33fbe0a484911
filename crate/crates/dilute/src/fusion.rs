//! Fused transfer matrices `T^{m,n}` built from the two fundamentals by the
//! fusion hierarchy, or independently from the formal determinants, and the
//! functional relations they satisfy.
//!
//! Indices follow the usual shorthand: `T^{m,n}_k = T^{m,n}(u + kλ)` and
//! `f_k = Π_j s_k(u − ξ_j)`, both relative to the family's base point `u`.

use std::collections::HashMap;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{
    circle_points, identity, laurent_degree, laurent_eval, laurent_fit, rel_commutator, rel_residual,
    scaled, zeros, CMat, EigenBasis,
};
use crate::scalars::{fused_braid_eigenvalue, SpectralContext};
use crate::transfer::{build_braid, build_conjugate, build_fundamental, Sector};

/// A divisor `f_k` smaller than this fraction of the median `|f_j|` is
/// refused.
const DIVISOR_FLOOR: f64 = 1e-9;
/// Rejection threshold used when drawing a generic base point.
const GENERIC_FLOOR: f64 = 1e-3;
/// Acceptable diagonality defect of a common eigenbasis.
const EIGEN_DEFECT: f64 = 1e-8;

/// How the fused matrices beyond the fundamentals are obtained.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Construction {
    /// Bilinear fusion hierarchy, shallowest path.
    #[default]
    Recursion,
    /// Formal determinants in the fundamentals.
    Determinant,
}

/// `T^{m,n}_k` on one sector at a fixed base point, memoised by `(m, n, k)`.
pub struct FusedFamily {
    ctx: SpectralContext,
    sector: Sector,
    u: C64,
    construction: Construction,
    cache: HashMap<(i32, i32, i32), CMat>,
    fvals: HashMap<i32, C64>,
    floor: f64,
    eigen: Option<EigenBasis>,
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.total_cmp(b));
    v[v.len() / 2]
}

fn f_scale(ctx: &SpectralContext, u: C64, ks: impl Iterator<Item = i32>) -> (f64, Vec<(i32, f64)>) {
    let vals: Vec<(i32, f64)> = ks.map(|k| (k, ctx.f(u, k).norm())).collect();
    (median(vals.iter().map(|v| v.1).collect()), vals)
}

impl FusedFamily {
    pub fn new(ctx: SpectralContext, sector: Sector, u: C64, construction: Construction) -> Result<Self> {
        if ctx.n != sector.n() {
            return Err(Error::InvalidSector { n: ctx.n, d: sector.d() });
        }
        let (scale, _) = f_scale(&ctx, u, -8..=16);
        Ok(Self {
            ctx,
            sector,
            u,
            construction,
            cache: HashMap::new(),
            fvals: HashMap::new(),
            floor: DIVISOR_FLOOR * scale,
            eigen: None,
        })
    }

    /// Base point drawn from a seeded generator, rejected while any
    /// `|f_k|`, `k ∈ [−5, 2·max_label + 2]`, is below `10⁻³ ×` their median.
    pub fn generic(
        ctx: SpectralContext,
        sector: Sector,
        construction: Construction,
        seed: u64,
        max_label: i32,
    ) -> Result<Self> {
        let u = generic_u(&ctx, seed, max_label);
        Self::new(ctx, sector, u, construction)
    }

    pub fn ctx(&self) -> &SpectralContext {
        &self.ctx
    }

    pub fn sector(&self) -> &Sector {
        &self.sector
    }

    pub fn u(&self) -> C64 {
        self.u
    }

    pub fn construction(&self) -> Construction {
        self.construction
    }

    pub fn sigma(&self) -> f64 {
        self.ctx.sigma()
    }

    pub fn dim(&self) -> usize {
        self.sector.dim()
    }

    pub fn f(&mut self, k: i32) -> C64 {
        let (ctx, u) = (&self.ctx, self.u);
        *self.fvals.entry(k).or_insert_with(|| ctx.f(u, k))
    }

    /// Product of `f_k` over `ks`, refusing near-vanishing factors.
    fn divisor(&mut self, ks: &[i32]) -> Result<C64> {
        let mut p = C64::from(1.0);
        for &k in ks {
            let v = self.f(k);
            if v.norm() < self.floor {
                return Err(Error::NearSingularU { k, value: v.norm() });
            }
            p *= v;
        }
        Ok(p)
    }

    fn fprod(&mut self, ks: &[i32]) -> C64 {
        ks.iter().map(|&k| self.f(k)).product()
    }

    pub fn identity(&self) -> CMat {
        identity(self.dim())
    }

    /// All cached `(m, n, k)` labels.
    pub fn cached_labels(&self) -> Vec<(i32, i32, i32)> {
        let mut v: Vec<_> = self.cache.keys().copied().collect();
        v.sort();
        v
    }

    pub fn cached(&self, m: i32, n: i32, k: i32) -> Option<&CMat> {
        self.cache.get(&(m, n, k))
    }

    /// `T^{m,n}_k`, with `T^{0,0}_k = f_{k−3} f_{k−2} I` and any negative
    /// label giving zero.
    pub fn fused(&mut self, m: i32, n: i32, k: i32) -> Result<CMat> {
        if m < 0 || n < 0 {
            return Ok(zeros(self.dim()));
        }
        if let Some(t) = self.cache.get(&(m, n, k)) {
            return Ok(t.clone());
        }
        let lam = self.ctx.lambda;
        let at = self.u + k as f64 * lam;
        let t = match (m, n) {
            (0, 0) => {
                let c = self.fprod(&[k - 3, k - 2]);
                scaled(&self.identity(), c)
            }
            (1, 0) => build_fundamental(at, &self.sector, &self.ctx)?.entries,
            (0, 1) => build_conjugate(at, &self.sector, &self.ctx)?.entries,
            _ => match self.construction {
                Construction::Recursion => self.recurse(m, n, k)?,
                Construction::Determinant => self.determinant(m, n, k)?,
            },
        };
        self.cache.insert((m, n, k), t.clone());
        Ok(t)
    }

    fn recurse(&mut self, m: i32, n: i32, k: i32) -> Result<CMat> {
        let s = self.sigma();
        let c = |x: f64| C64::from(x);
        let (num, den): (CMat, Vec<i32>) = match (m, n) {
            (2, 0) => {
                let a = self.fused(1, 0, k)? * self.fused(1, 0, k + 2)?;
                let b = self.fused(0, 1, k)?;
                let g = c(s) * self.fprod(&[k - 3, k + 2]);
                (a - scaled(&b, g), vec![k - 1, k])
            }
            (0, 2) => {
                let a = self.fused(0, 1, k)? * self.fused(0, 1, k + 2)?;
                let b = self.fused(1, 0, k + 2)?;
                let g = c(s) * self.fprod(&[k - 2, k + 3]);
                (a - scaled(&b, g), vec![k, k + 1])
            }
            (1, 1) => {
                let a = self.fused(1, 0, k)? * self.fused(0, 1, k + 2)?;
                let g = self.fprod(&[k - 3, k - 2, k + 2, k + 3]);
                (a - scaled(&self.identity(), g), vec![k])
            }
            (m, 0) => {
                // T^{m−1,0}_0 T^{1,0}_{2m−2} = f_{2m−5} f_{2m−4} T^{m,0}_0 + σ f_{2m−2} T^{m−2,1}_0
                let a = self.fused(m - 1, 0, k)? * self.fused(1, 0, k + 2 * m - 2)?;
                let b = self.fused(m - 2, 1, k)?;
                let g = c(s) * self.f(k + 2 * m - 2);
                (a - scaled(&b, g), vec![k + 2 * m - 5, k + 2 * m - 4])
            }
            (0, n) => {
                // T^{0,1}_0 T^{0,n−1}_2 = f_0 f_1 T^{0,n}_0 + σ f_{−2} T^{1,n−2}_2
                let a = self.fused(0, 1, k)? * self.fused(0, n - 1, k + 2)?;
                let b = self.fused(1, n - 2, k + 2)?;
                let g = c(s) * self.f(k - 2);
                (a - scaled(&b, g), vec![k, k + 1])
            }
            (m, 1) => {
                // T^{m,0}_0 T^{0,1}_{2m} = f_{2m−2} T^{m,1}_0 + f_{2m} f_{2m+1} T^{m−1,0}_0
                let a = self.fused(m, 0, k)? * self.fused(0, 1, k + 2 * m)?;
                let b = self.fused(m - 1, 0, k)?;
                let g = self.fprod(&[k + 2 * m, k + 2 * m + 1]);
                (a - scaled(&b, g), vec![k + 2 * m - 2])
            }
            (1, n) => {
                // T^{1,0}_0 T^{0,n}_2 = f_0 T^{1,n}_0 + f_{−3} f_{−2} T^{0,n−1}_4
                let a = self.fused(1, 0, k)? * self.fused(0, n, k + 2)?;
                let b = self.fused(0, n - 1, k + 4)?;
                let g = self.fprod(&[k - 3, k - 2]);
                (a - scaled(&b, g), vec![k])
            }
            (m, n) => {
                // T^{m,0}_0 T^{0,n}_{2m} = f_{2m−2} T^{m,n}_0 + T^{m−1,0}_0 T^{0,n−1}_{2m+2}
                let a = self.fused(m, 0, k)? * self.fused(0, n, k + 2 * m)?;
                let b = self.fused(m - 1, 0, k)? * self.fused(0, n - 1, k + 2 * m + 2)?;
                (a - b, vec![k + 2 * m - 2])
            }
        };
        let d = self.divisor(&den)?;
        Ok(scaled(&num, d.inv()))
    }

    fn determinant(&mut self, m: i32, n: i32, k: i32) -> Result<CMat> {
        let (entries, den) = determinant_layout(m, n);
        let size = if m == 0 { n } else if n == 0 { m } else { m + n } as usize;
        let mut grid: Vec<Vec<Option<CMat>>> = vec![vec![None; size]; size];
        let s = C64::from(self.sigma());
        for (i, j, e) in entries {
            let v = match e {
                Entry::Fund10(sh) => self.fused(1, 0, k + sh)?,
                Entry::Fund01(sh) => self.fused(0, 1, k + sh)?,
                Entry::SigmaFF(a, b) => {
                    let g = s * self.fprod(&[k + a, k + b]);
                    scaled(&self.identity(), g)
                }
            };
            grid[i][j] = Some(v);
        }
        let det = formal_det(&grid, self.dim());
        let den: Vec<i32> = den.into_iter().map(|j| j + k).collect();
        let d = self.divisor(&den)?;
        Ok(scaled(&det, d.inv()))
    }

    /// Common eigenbasis of the commuting family, from
    /// `T^{1,0}_0 + c T^{1,0}_1` with a seeded random `c`; up to five tries.
    pub fn eigenbasis(&mut self, seed: u64) -> Result<&EigenBasis> {
        if self.eigen.is_none() {
            let a = self.fused(1, 0, 0)?;
            let b = self.fused(1, 0, 1)?;
            let probe = self.fused(0, 1, 3)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut worst = f64::INFINITY;
            for _ in 0..5 {
                let c = C64::from_polar(rng.gen_range(0.5..2.0), rng.gen_range(0.0..std::f64::consts::TAU));
                let basis = EigenBasis::new(&(&a + scaled(&b, c)))?;
                let defect = [&a, &b, &probe].iter().map(|t| basis.eigenvalues(t).1).fold(0.0, f64::max);
                if defect < EIGEN_DEFECT {
                    self.eigen = Some(basis);
                    break;
                }
                worst = worst.min(defect);
            }
            if self.eigen.is_none() {
                return Err(Error::DegenerateSpectrum(worst));
            }
        }
        Ok(self.eigen.as_ref().expect("set above"))
    }

    /// Eigenvalues of `T^{m,n}_k` in the common eigenbasis (same order for
    /// every label).
    pub fn eigenvalues(&mut self, m: i32, n: i32, k: i32, seed: u64) -> Result<Vec<C64>> {
        let t = self.fused(m, n, k)?;
        let basis = self.eigenbasis(seed)?;
        let (vals, defect) = basis.eigenvalues(&t);
        let scale = t.norm_l2();
        if defect > EIGEN_DEFECT && scale > 0.0 {
            return Err(Error::DegenerateSpectrum(defect));
        }
        Ok(vals)
    }

    /// Largest pairwise relative commutator among cached matrices.
    pub fn max_commutator(&self) -> f64 {
        let mats: Vec<&CMat> = self.cache.values().collect();
        let mut worst = 0.0f64;
        for i in 0..mats.len() {
            for j in i + 1..mats.len() {
                worst = worst.max(rel_commutator(mats[i], mats[j]));
            }
        }
        worst
    }
}

/// Seeded generic base point; see [`FusedFamily::generic`].
pub fn generic_u(ctx: &SpectralContext, seed: u64, max_label: i32) -> C64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let hi = 2 * max_label.max(1) + 2;
    loop {
        let u = C64::new(rng.gen_range(0.0..std::f64::consts::PI), rng.gen_range(-0.4..0.4));
        let (scale, vals) = f_scale(ctx, u, -5..=hi);
        if vals.iter().all(|&(_, v)| v >= GENERIC_FLOOR * scale) {
            return u;
        }
    }
}

#[derive(Clone, Copy, Debug)]
enum Entry {
    Fund10(i32),
    Fund01(i32),
    /// `σ f_a f_b` times the identity.
    SigmaFF(i32, i32),
}

/// Non-zero entries of the determinant matrix for `(m, n)` and the `f`
/// indices of its prefactor.
fn determinant_layout(m: i32, n: i32) -> (Vec<(usize, usize, Entry)>, Vec<i32>) {
    let mut out = Vec::new();
    // m × m block (shift 0) placed at offset `off`.
    let corner = |m: i32, off: usize, out: &mut Vec<(usize, usize, Entry)>| {
        for i in 0..m {
            let r = i as usize + off;
            out.push((r, r, Entry::Fund10(2 * (m - 1 - i))));
            if i + 1 < m {
                out.push((r, r + 1, Entry::Fund01(2 * (m - 2 - i))));
                let q = m - 2 - i;
                out.push((r + 1, r, Entry::SigmaFF(2 * q - 3, 2 * q + 2)));
            }
            if i + 2 < m {
                let q = m - 3 - i;
                out.push((r, r + 2, Entry::SigmaFF(2 * q - 2, 2 * q + 3)));
            }
        }
    };
    // n × n block with every shift raised by `sh`.
    let conj = |n: i32, sh: i32, out: &mut Vec<(usize, usize, Entry)>| {
        for i in 0..n {
            let r = i as usize;
            out.push((r, r, Entry::Fund01(2 * (n - 1 - i) + sh)));
            if i + 1 < n {
                out.push((r + 1, r, Entry::Fund10(2 * (n - 1 - i) + sh)));
                let q = n - 2 - i;
                out.push((r, r + 1, Entry::SigmaFF(2 * q - 2 + sh, 2 * q + 3 + sh)));
            }
            if i + 2 < n {
                let q = n - 3 - i;
                out.push((r + 2, r, Entry::SigmaFF(2 * q - 1 + sh, 2 * q + 4 + sh)));
            }
        }
    };
    let den: Vec<i32>;
    if n == 0 {
        corner(m, 0, &mut out);
        den = (-1..=2 * m - 4).collect();
    } else if m == 0 {
        conj(n, 0, &mut out);
        den = (0..=2 * n - 3).collect();
    } else {
        conj(n, 2 * m, &mut out);
        corner(m, n as usize, &mut out);
        let b = n as usize;
        out.push((b - 1, b, Entry::SigmaFF(2 * m - 4, 2 * m + 1)));
        out.push((b, b - 1, Entry::SigmaFF(2 * m - 5, 2 * m)));
        den = (-1..=2 * m + 2 * n - 3).filter(|&j| j != 2 * m - 3 && j != 2 * m - 1).collect();
    }
    (out, den)
}

/// Determinant of a matrix whose entries commute, by Laplace expansion
/// along rows with the remaining column set memoised.
fn formal_det(grid: &[Vec<Option<CMat>>], dim: usize) -> CMat {
    let size = grid.len();
    let mut memo: HashMap<u32, CMat> = HashMap::new();
    memo.insert(0, identity(dim));
    // Process masks in increasing popcount: mask = columns used by the
    // last `popcount` rows.
    let full: u32 = (1u32 << size) - 1;
    let mut masks: Vec<u32> = (1..=full).collect();
    masks.sort_by_key(|m| m.count_ones());
    for mask in masks {
        let row = size - mask.count_ones() as usize;
        let mut acc: Option<CMat> = None;
        let mut pos = 0;
        for col in 0..size {
            if mask & (1 << col) == 0 {
                continue;
            }
            let sign = if pos % 2 == 0 { 1.0 } else { -1.0 };
            pos += 1;
            let Some(e) = &grid[row][col] else { continue };
            let Some(minor) = memo.get(&(mask & !(1 << col))) else { continue };
            let term = scaled(&(e * minor), C64::from(sign));
            acc = Some(match acc {
                Some(a) => a + term,
                None => term,
            });
        }
        if let Some(a) = acc {
            memo.insert(mask, a);
        }
    }
    memo.remove(&full).unwrap_or_else(|| zeros(dim))
}

/// A functional relation known to the verifier.
#[derive(Clone, Copy, Debug)]
pub struct RelationInfo {
    pub id: &'static str,
    /// Names of the integer indices it takes.
    pub params: &'static [&'static str],
    pub range: &'static str,
    pub summary: &'static str,
}

pub const RELATIONS: &[RelationInfo] = &[
    RelationInfo { id: "fh-corner-1", params: &[], range: "", summary: "T¹⁰₀T¹⁰₂ = f₋₁f₀T²⁰₀ + σf₋₃f₂T⁰¹₀" },
    RelationInfo { id: "fh-corner-2", params: &[], range: "", summary: "T¹⁰₀T⁰¹₂ = f₀T¹¹₀ + f₋₃f₋₂f₂f₃ I" },
    RelationInfo { id: "fh-corner-3", params: &[], range: "", summary: "T⁰¹₀T⁰¹₂ = f₀f₁T⁰²₀ + σf₋₂f₃T¹⁰₂" },
    RelationInfo { id: "fh-boundary-1", params: &["m"], range: "m>1", summary: "Tᵐ⁰₀T¹⁰₂ₘ = f₂ₘ₋₃f₂ₘ₋₂Tᵐ⁺¹'⁰₀ + σf₂ₘTᵐ⁻¹'¹₀" },
    RelationInfo { id: "fh-boundary-2", params: &["n"], range: "n>1", summary: "T⁰¹₀T⁰ⁿ₂ = f₀f₁T⁰'ⁿ⁺¹₀ + σf₋₂T¹'ⁿ⁻¹₂" },
    RelationInfo { id: "fh-adjacent-1", params: &["m"], range: "m>1", summary: "Tᵐ⁰₀T⁰¹₂ₘ = f₂ₘ₋₂Tᵐ¹₀ + f₂ₘf₂ₘ₊₁Tᵐ⁻¹'⁰₀" },
    RelationInfo { id: "fh-adjacent-2", params: &["n"], range: "n>1", summary: "T¹⁰₀T⁰ⁿ₂ = f₀T¹ⁿ₀ + f₋₃f₋₂T⁰'ⁿ⁻¹₄" },
    RelationInfo { id: "fh-bulk", params: &["m", "n"], range: "m>1, n>1", summary: "Tᵐ⁰₀T⁰ⁿ₂ₘ = f₂ₘ₋₂Tᵐⁿ₀ + Tᵐ⁻¹'⁰₀T⁰'ⁿ⁻¹₂ₘ₊₂" },
    RelationInfo { id: "three-term-left", params: &["m", "n"], range: "m>3, n≥0", summary: "f₋₁f₀f₁Tᵐⁿ₀ = f₁T¹⁰₀Tᵐ⁻¹'ⁿ₂ − σf₋₃T⁰¹₀Tᵐ⁻²'ⁿ₄ + σf₋₃f₋₂f₋₁Tᵐ⁻³'ⁿ₆" },
    RelationInfo { id: "three-term-right", params: &["m", "n"], range: "n>3, m≥0", summary: "f_{2m+2n−3}f_{2m+2n−4}f_{2m+2n−5}Tᵐⁿ₀ = …" },
    RelationInfo { id: "two-row", params: &["n"], range: "n≥1", summary: "f₋₁f₀T²ⁿ₀ = T¹⁰₀T¹ⁿ₂ − σf₋₃T⁰¹₀T⁰ⁿ₄" },
    RelationInfo { id: "three-row", params: &["n"], range: "n≥1", summary: "f₋₁f₀f₁T³ⁿ₀ = f₁T¹⁰₀T²ⁿ₂ − σf₋₃T⁰¹₀T¹ⁿ₄ + σf₋₃f₋₂f₋₁f₃T⁰ⁿ₆" },
    RelationInfo { id: "two-column", params: &["m"], range: "m≥1", summary: "f₂ₘf₂ₘ₊₁Tᵐ²₀ = Tᵐ¹₀T⁰¹₂ₘ₊₂ − σf₂ₘ₊₃Tᵐ⁰₀T¹⁰₂ₘ₊₂" },
    RelationInfo { id: "three-column", params: &["m"], range: "m≥1", summary: "f₂ₘ₊₁f₂ₘ₊₂f₂ₘ₊₃Tᵐ³₀ = f₂ₘ₊₁Tᵐ²₀T⁰¹₂ₘ₊₄ − σf₂ₘ₊₅Tᵐ¹₀T¹⁰₂ₘ₊₄ + σf₂ₘ₋₁f₂ₘ₊₃f₂ₘ₊₄f₂ₘ₊₅Tᵐ⁰₀" },
    RelationInfo { id: "tsystem", params: &["m"], range: "m≥0", summary: "Tᵐ⁰₀Tᵐ⁰₂ = σᵐf₋₃f₂ₘTᵐ⁰₁ + Tᵐ⁺¹'⁰₀Tᵐ⁻¹'⁰₂" },
    RelationInfo { id: "tsystem-folded", params: &["m"], range: "m≥1", summary: "Tᵐ⁰₀Tᵐ⁰₂ = σᵐf₋₃f₂ₘT⁰ᵐ₀ + Tᵐ⁺¹'⁰₀Tᵐ⁻¹'⁰₂" },
    RelationInfo { id: "tsystem-general", params: &["m", "k"], range: "1≤k<m", summary: "Tᵐ⁰₀Tᵐ⁻ᵏ'⁰₂ₖ₊₂ = σᵐ⁻ᵏf₂ₘTᵏ'ᵐ⁻ᵏ₀ + Tᵐ⁺¹'⁰₀Tᵐ⁻¹⁻ᵏ'⁰₂ₖ₊₂" },
    RelationInfo { id: "folding", params: &["m"], range: "m≥1", summary: "T⁰ᵐ₀ = Tᵐ⁰₁" },
    RelationInfo { id: "periodicity", params: &["m", "n"], range: "m,n≥0", summary: "Tᵐⁿ(u+π) = σ^{[m,n≥1]} Tᵐⁿ(u)" },
    RelationInfo { id: "determinant", params: &["m", "n"], range: "m,n≥0", summary: "recursion and determinant constructions agree" },
];

pub fn relation_info(id: &str) -> Option<&'static RelationInfo> {
    RELATIONS.iter().find(|r| r.id == id)
}

fn bad_index(id: &str, detail: impl Into<String>) -> Error {
    Error::IndexOutOfRange { id: id.to_string(), detail: detail.into() }
}

impl FusedFamily {
    /// Both sides of relation `id` at `indices`, as matrices.
    pub fn relation_sides(&mut self, id: &str, indices: &[i32]) -> Result<(CMat, CMat)> {
        let info = relation_info(id).ok_or_else(|| Error::UnknownIdentity(id.to_string()))?;
        if indices.len() != info.params.len() {
            return Err(bad_index(id, format!("expected {} indices, got {}", info.params.len(), indices.len())));
        }
        let ix = |i: usize| indices[i];
        let need = |ok: bool, what: &str| if ok { Ok(()) } else { Err(bad_index(id, format!("{indices:?} violates {what}"))) };
        let s = C64::from(self.sigma());
        let one = C64::from(1.0);
        // Shorthand: products of T's and scalar factors.
        macro_rules! t {
            ($m:expr, $n:expr, $k:expr) => {
                self.fused($m, $n, $k)?
            };
        }
        macro_rules! ff {
            ($($k:expr),*) => { self.fprod(&[$($k),*]) };
        }
        let sides = match id {
            "fh-corner-1" => {
                let l = t!(1, 0, 0) * t!(1, 0, 2);
                let r = scaled(&t!(2, 0, 0), ff!(-1, 0)) + scaled(&t!(0, 1, 0), s * ff!(-3, 2));
                (l, r)
            }
            "fh-corner-2" => {
                let l = t!(1, 0, 0) * t!(0, 1, 2);
                let r = scaled(&t!(1, 1, 0), ff!(0)) + scaled(&self.identity(), ff!(-3, -2, 2, 3));
                (l, r)
            }
            "fh-corner-3" => {
                let l = t!(0, 1, 0) * t!(0, 1, 2);
                let r = scaled(&t!(0, 2, 0), ff!(0, 1)) + scaled(&t!(1, 0, 2), s * ff!(-2, 3));
                (l, r)
            }
            "fh-boundary-1" => {
                let m = ix(0);
                need(m > 1, "m>1")?;
                let l = t!(m, 0, 0) * t!(1, 0, 2 * m);
                let r = scaled(&t!(m + 1, 0, 0), ff!(2 * m - 3, 2 * m - 2))
                    + scaled(&t!(m - 1, 1, 0), s * ff!(2 * m));
                (l, r)
            }
            "fh-boundary-2" => {
                let n = ix(0);
                need(n > 1, "n>1")?;
                let l = t!(0, 1, 0) * t!(0, n, 2);
                let r = scaled(&t!(0, n + 1, 0), ff!(0, 1)) + scaled(&t!(1, n - 1, 2), s * ff!(-2));
                (l, r)
            }
            "fh-adjacent-1" => {
                let m = ix(0);
                need(m > 1, "m>1")?;
                let l = t!(m, 0, 0) * t!(0, 1, 2 * m);
                let r = scaled(&t!(m, 1, 0), ff!(2 * m - 2))
                    + scaled(&t!(m - 1, 0, 0), ff!(2 * m, 2 * m + 1));
                (l, r)
            }
            "fh-adjacent-2" => {
                let n = ix(0);
                need(n > 1, "n>1")?;
                let l = t!(1, 0, 0) * t!(0, n, 2);
                let r = scaled(&t!(1, n, 0), ff!(0)) + scaled(&t!(0, n - 1, 4), ff!(-3, -2));
                (l, r)
            }
            "fh-bulk" => {
                let (m, n) = (ix(0), ix(1));
                need(m > 1 && n > 1, "m>1, n>1")?;
                let l = t!(m, 0, 0) * t!(0, n, 2 * m);
                let r = scaled(&t!(m, n, 0), ff!(2 * m - 2)) + t!(m - 1, 0, 0) * t!(0, n - 1, 2 * m + 2);
                (l, r)
            }
            "three-term-left" => {
                let (m, n) = (ix(0), ix(1));
                need(m > 3 && n >= 0, "m>3, n≥0")?;
                let l = scaled(&t!(m, n, 0), ff!(-1, 0, 1));
                let r = scaled(&(t!(1, 0, 0) * t!(m - 1, n, 2)), ff!(1))
                    - scaled(&(t!(0, 1, 0) * t!(m - 2, n, 4)), s * ff!(-3))
                    + scaled(&t!(m - 3, n, 6), s * ff!(-3, -2, -1));
                (l, r)
            }
            "three-term-right" => {
                let (m, n) = (ix(0), ix(1));
                need(n > 3 && m >= 0, "n>3, m≥0")?;
                let j = 2 * m + 2 * n;
                let l = scaled(&t!(m, n, 0), ff!(j - 3, j - 4, j - 5));
                let r = scaled(&(t!(m, n - 1, 0) * t!(0, 1, j - 2)), ff!(j - 5))
                    - scaled(&(t!(m, n - 2, 0) * t!(1, 0, j - 2)), s * ff!(j - 1))
                    + scaled(&t!(m, n - 3, 0), s * ff!(j - 1, j - 2, j - 3));
                (l, r)
            }
            "two-row" => {
                let n = ix(0);
                need(n >= 1, "n≥1")?;
                let l = scaled(&t!(2, n, 0), ff!(-1, 0));
                let r = t!(1, 0, 0) * t!(1, n, 2) - scaled(&(t!(0, 1, 0) * t!(0, n, 4)), s * ff!(-3));
                (l, r)
            }
            "three-row" => {
                let n = ix(0);
                need(n >= 1, "n≥1")?;
                let l = scaled(&t!(3, n, 0), ff!(-1, 0, 1));
                let r = scaled(&(t!(1, 0, 0) * t!(2, n, 2)), ff!(1))
                    - scaled(&(t!(0, 1, 0) * t!(1, n, 4)), s * ff!(-3))
                    + scaled(&t!(0, n, 6), s * ff!(-3, -2, -1, 3));
                (l, r)
            }
            "two-column" => {
                let m = ix(0);
                need(m >= 1, "m≥1")?;
                let l = scaled(&t!(m, 2, 0), ff!(2 * m, 2 * m + 1));
                let r = t!(m, 1, 0) * t!(0, 1, 2 * m + 2)
                    - scaled(&(t!(m, 0, 0) * t!(1, 0, 2 * m + 2)), s * ff!(2 * m + 3));
                (l, r)
            }
            "three-column" => {
                let m = ix(0);
                need(m >= 1, "m≥1")?;
                let l = scaled(&t!(m, 3, 0), ff!(2 * m + 1, 2 * m + 2, 2 * m + 3));
                let r = scaled(&(t!(m, 2, 0) * t!(0, 1, 2 * m + 4)), ff!(2 * m + 1))
                    - scaled(&(t!(m, 1, 0) * t!(1, 0, 2 * m + 4)), s * ff!(2 * m + 5))
                    + scaled(&t!(m, 0, 0), s * ff!(2 * m - 1, 2 * m + 3, 2 * m + 4, 2 * m + 5));
                (l, r)
            }
            "tsystem" => {
                let m = ix(0);
                need(m >= 0, "m≥0")?;
                let l = t!(m, 0, 0) * t!(m, 0, 2);
                let r = scaled(&t!(m, 0, 1), s.powi(m) * ff!(-3, 2 * m)) + t!(m + 1, 0, 0) * t!(m - 1, 0, 2);
                (l, r)
            }
            "tsystem-folded" => {
                let m = ix(0);
                need(m >= 1, "m≥1")?;
                let l = t!(m, 0, 0) * t!(m, 0, 2);
                let r = scaled(&t!(0, m, 0), s.powi(m) * ff!(-3, 2 * m)) + t!(m + 1, 0, 0) * t!(m - 1, 0, 2);
                (l, r)
            }
            "tsystem-general" => {
                let (m, k) = (ix(0), ix(1));
                need(1 <= k && k < m, "1≤k<m")?;
                let l = t!(m, 0, 0) * t!(m - k, 0, 2 * k + 2);
                let r = scaled(&t!(k, m - k, 0), s.powi(m - k) * ff!(2 * m))
                    + t!(m + 1, 0, 0) * t!(m - 1 - k, 0, 2 * k + 2);
                (l, r)
            }
            "folding" => {
                let m = ix(0);
                need(m >= 1, "m≥1")?;
                (t!(0, m, 0), t!(m, 0, 1))
            }
            "periodicity" => {
                let (m, n) = (ix(0), ix(1));
                need(m >= 0 && n >= 0, "m,n≥0")?;
                let mut shifted = FusedFamily::new(
                    self.ctx.clone(),
                    self.sector.clone(),
                    self.u + std::f64::consts::PI,
                    self.construction,
                )?;
                let sign = if m >= 1 && n >= 1 { s } else { one };
                (shifted.fused(m, n, 0)?, scaled(&t!(m, n, 0), sign))
            }
            "determinant" => {
                let (m, n) = (ix(0), ix(1));
                need(m >= 0 && n >= 0, "m,n≥0")?;
                let other = match self.construction {
                    Construction::Recursion => Construction::Determinant,
                    Construction::Determinant => Construction::Recursion,
                };
                let mut alt = FusedFamily::new(self.ctx.clone(), self.sector.clone(), self.u, other)?;
                (t!(m, n, 0), alt.fused(m, n, 0)?)
            }
            _ => return Err(Error::UnknownIdentity(id.to_string())),
        };
        Ok(sides)
    }

    /// `‖LHS − RHS‖ / max(‖LHS‖, ‖RHS‖)` for relation `id`.
    pub fn verify_functional_relation(&mut self, id: &str, indices: &[i32]) -> Result<f64> {
        let (l, r) = self.relation_sides(id, indices)?;
        Ok(rel_residual(&l, &r))
    }

    /// Eigenvalues of `t^m_k = T^{m+1,0}_k T^{m−1,0}_{k+2} / (σ^m f_{k−3} f_{k+2m} T^{m,0}_{k+1})`.
    pub fn t_ratio(&mut self, m: i32, k: i32, seed: u64) -> Result<Vec<C64>> {
        if m == 0 {
            return Ok(vec![C64::from(0.0); self.dim()]);
        }
        let a = self.eigenvalues(m + 1, 0, k, seed)?;
        let b = self.eigenvalues(m - 1, 0, k + 2, seed)?;
        let c = self.eigenvalues(m, 0, k + 1, seed)?;
        let g = C64::from(self.sigma().powi(m)) * self.fprod(&[k - 3, k + 2 * m]);
        Ok((0..a.len()).map(|i| a[i] * b[i] / (g * c[i])).collect())
    }

    /// Largest eigenvalue-wise relative residual of
    /// `t^m_0 t^m_2 = (1 + t^{m−1}_2)(1 + t^{m+1}_0) / (1 + 1/t^m_1)`.
    pub fn ysystem_residual(&mut self, m: i32, seed: u64) -> Result<f64> {
        if m < 1 {
            return Err(bad_index("ysystem", "m≥1"));
        }
        let t0 = self.t_ratio(m, 0, seed)?;
        let t1 = self.t_ratio(m, 1, seed)?;
        let t2 = self.t_ratio(m, 2, seed)?;
        let dn = self.t_ratio(m - 1, 2, seed)?;
        let up = self.t_ratio(m + 1, 0, seed)?;
        let one = C64::from(1.0);
        let mut worst = 0.0f64;
        for i in 0..t0.len() {
            let l = t0[i] * t2[i];
            let r = (one + dn[i]) * (one + up[i]) / (one + t1[i].inv());
            worst = worst.max(scalar_residual(l, r));
        }
        Ok(worst)
    }
}

/// `|a − b| / max(|a|, |b|)`, zero when both vanish.
pub fn scalar_residual(a: C64, b: C64) -> f64 {
    let s = a.norm().max(b.norm());
    if s == 0.0 {
        0.0
    } else {
        (a - b).norm() / s
    }
}

/// Expected centered-Laurent degree of `T^{m,n}` in `z = e^{iu}`.
pub fn expected_degree(m: i32, n: i32, width: usize) -> usize {
    if m == 0 || n == 0 {
        2 * width
    } else {
        3 * width
    }
}

/// Outcome of a polynomiality check.
#[derive(Clone, Copy, Debug, serde::Serialize)]
pub struct PolyReport {
    pub expected: usize,
    pub detected: usize,
    /// Largest relative error of the degree-`expected` interpolant at
    /// held-out points.
    pub residual: f64,
}

/// Samples on the circle `u = θ + iη`, i.e. `|z| = e^{−η}`.
fn grid(count: usize, phase: f64, eta: f64) -> Vec<C64> {
    circle_points(count, phase).into_iter().map(|z| C64::new(z.arg(), eta)).collect()
}

fn z_of(u: C64) -> C64 {
    (C64::i() * u).exp()
}

/// Builds `T^{m,n}(u)` freshly at each of `us`, with the whole grid
/// retried under a rotated phase when any point is near-singular.
pub fn sample_fused(
    ctx: &SpectralContext,
    sector: &Sector,
    construction: Construction,
    m: i32,
    n: i32,
    count: usize,
    phase: f64,
    eta: f64,
) -> Result<(Vec<C64>, Vec<CMat>)> {
    let mut last = None;
    for attempt in 0..5 {
        let us = grid(count, phase + 0.173 * attempt as f64, eta);
        let built: Result<Vec<CMat>> = us
            .iter()
            .map(|&u| FusedFamily::new(ctx.clone(), sector.clone(), u, construction)?.fused(m, n, 0))
            .collect();
        match built {
            Ok(v) => return Ok((us, v)),
            Err(e @ Error::NearSingularU { .. }) => last = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last.expect("five failed attempts"))
}

/// Fits `T^{m,n}` by a centered Laurent polynomial of the expected degree
/// on `2·deg + 1` points, validates it at held-out points, and detects the
/// actual degree from an oversampled fit.
pub fn polynomiality_check(
    ctx: &SpectralContext,
    sector: &Sector,
    m: i32,
    n: i32,
    construction: Construction,
) -> Result<PolyReport> {
    let expected = expected_degree(m, n, ctx.n);
    let eta = 0.21;
    let (us, samples) = sample_fused(ctx, sector, construction, m, n, 2 * expected + 1, 0.31, eta)?;
    let zs: Vec<C64> = us.iter().map(|&u| z_of(u)).collect();
    let fit = laurent_fit(&zs, &samples, expected)?;
    let (hold_us, hold) = sample_fused(ctx, sector, construction, m, n, 5, 1.07, eta)?;
    let mut residual = 0.0f64;
    for (u, t) in hold_us.iter().zip(&hold) {
        residual = residual.max(rel_residual(&laurent_eval(&fit, z_of(*u)), t));
    }
    let over = expected + 3;
    let (ous, osamples) = sample_fused(ctx, sector, construction, m, n, 2 * over + 1, 0.57, eta)?;
    let ozs: Vec<C64> = ous.iter().map(|&u| z_of(u)).collect();
    let ofit = laurent_fit(&ozs, &osamples, over)?;
    // Coefficients are compared on the circle |z| = e^{−η}: rescale so that
    // the detection threshold is not biased by the radius.
    let r = (-eta).exp();
    let norm: Vec<CMat> = ofit
        .iter()
        .enumerate()
        .map(|(p, c)| scaled(c, C64::from(r.powi(p as i32 - over as i32))))
        .collect();
    Ok(PolyReport { expected, detected: laurent_degree(&norm, 1e-9), residual })
}

/// Regularity at `u = ξ_N`: norm of the numerator of the `(2,0)` or `(1,1)`
/// recursion there, relative to its norm at a generic point.
pub fn regularity_check(ctx: &SpectralContext, sector: &Sector, label: (i32, i32), generic: C64) -> Result<f64> {
    let numerator = |u: C64| -> Result<CMat> {
        let mut fam = FusedFamily::new(ctx.clone(), sector.clone(), u, Construction::Recursion)?;
        let s = C64::from(ctx.sigma());
        match label {
            (2, 0) => {
                let a = fam.fused(1, 0, 0)? * fam.fused(1, 0, 2)?;
                let g = s * fam.fprod(&[-3, 2]);
                Ok(a - scaled(&fam.fused(0, 1, 0)?, g))
            }
            (1, 1) => {
                let a = fam.fused(1, 0, 0)? * fam.fused(0, 1, 2)?;
                let g = fam.fprod(&[-3, -2, 2, 3]);
                Ok(a - scaled(&fam.identity(), g))
            }
            (m, n) => Err(bad_index("regularity", format!("label ({m},{n}) not in {{(2,0),(1,1)}}"))),
        }
    };
    let at_zero = numerator(ctx.xi[ctx.n - 1])?;
    let reference = numerator(generic)?;
    Ok(at_zero.norm_l2() / reference.norm_l2())
}

/// `T^{m,n}_{±∞}` from the braid hierarchy, starting from the fundamental
/// braid matrix with `T^{0,0}_{±∞} = I`.
pub fn braid_fused(m: i32, n: i32, sign: i32, sector: &Sector, ctx: &SpectralContext) -> Result<CMat> {
    let b = build_braid(sign, sector, ctx)?.entries;
    let mut memo = HashMap::new();
    Ok(braid_rec(m, n, &b, &mut memo))
}

fn braid_rec(m: i32, n: i32, b: &CMat, memo: &mut HashMap<(i32, i32), CMat>) -> CMat {
    let dim = b.nrows();
    if m < 0 || n < 0 {
        return zeros(dim);
    }
    if let Some(t) = memo.get(&(m, n)) {
        return t.clone();
    }
    let t = match (m, n) {
        (0, 0) => identity(dim),
        (1, 0) | (0, 1) => b.clone(),
        (m, 0) => braid_rec(m - 1, 0, b, memo) * b - braid_rec(m - 2, 1, b, memo),
        (0, n) => braid_rec(n, 0, b, memo),
        (m, n) => {
            braid_rec(m, 0, b, memo) * braid_rec(0, n, b, memo)
                - braid_rec(m - 1, 0, b, memo) * braid_rec(0, n - 1, b, memo)
        }
    };
    memo.insert((m, n), t.clone());
    t
}

/// Largest relative deviation of the diagonal of `T^{m,0}_{±∞}` from the
/// `sℓ(3)` Chebyshev value, together with its off-diagonal mass.
pub fn braid_fused_check(m: i32, sign: i32, sector: &Sector, ctx: &SpectralContext) -> Result<(f64, f64)> {
    let t = braid_fused(m, 0, sign, sector, ctx)?;
    let expect = fused_braid_eigenvalue(m, sector.d(), sign, ctx);
    let scale = expect.norm().max(1.0);
    let worst = (0..t.nrows()).map(|i| (t[(i, i)] - expect).norm() / scale).fold(0.0, f64::max);
    Ok((worst, crate::linalg::offdiag_mass(&t)))
}

/// `e^{∓i(π−2λ)N(m+n)} T^{m,n}(u) / D(u)` at `u = ±iR`, with
/// `D = f_{−3} f_{−2}` for `(m, 0)`, `f_{−2} f_{−1}` for `(0, n)` (the
/// `(n, 0)` normaliser at `u + λ`, so that folding survives the limit) and
/// `f_{−3} f_{−2} f_{2m−1}` otherwise.
pub fn normalized_limit(
    m: i32,
    n: i32,
    sign: i32,
    r: f64,
    sector: &Sector,
    ctx: &SpectralContext,
) -> Result<CMat> {
    let u = C64::new(0.0, sign as f64 * r);
    let mut fam = FusedFamily::new(ctx.clone(), sector.clone(), u, Construction::Recursion)?;
    let t = fam.fused(m, n, 0)?;
    let den = match (m, n) {
        (0, _) => fam.fprod(&[-2, -1]),
        (_, 0) => fam.fprod(&[-3, -2]),
        _ => fam.fprod(&[-3, -2, 2 * m - 1]),
    };
    let phase = ctx.braid_phase(sign).powi((ctx.n as i32) * (m + n));
    Ok(scaled(&t, phase / den))
}
