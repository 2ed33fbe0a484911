//! Scalar functions of the spectral data: face weights, the `s_k`/`f_k`
//! helpers, fugacities, root-of-unity parameterisations and the closed-form
//! braid eigenvalues.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Distance below which λ counts as one of the singular points π/3, π/2, 2π/3.
const SINGULAR_EPS: f64 = 1e-9;

/// Below this separation the ratio formula for `U_m` is abandoned.
const CHEBYSHEV_COLLISION: f64 = 1e-8;

fn csin(z: C64) -> C64 {
    z.sin()
}

/// `true` when `sin 2λ · sin 3λ` vanishes (mod π).
pub fn is_singular_lambda(lambda: f64) -> bool {
    let r = lambda.rem_euclid(PI);
    [0.0, PI / 3.0, PI / 2.0, 2.0 * PI / 3.0, PI]
        .iter()
        .any(|p| (r - p).abs() < SINGULAR_EPS)
}

fn check_lambda(lambda: f64) -> Result<()> {
    if is_singular_lambda(lambda) {
        Err(Error::SingularLambda(lambda))
    } else {
        Ok(())
    }
}

/// Nine face weights ρ₁..ρ₉, stored zero-based (`rho[0]` is ρ₁).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FaceWeights {
    pub rho: [C64; 9],
}

impl FaceWeights {
    pub fn get(&self, one_based: usize) -> C64 {
        self.rho[one_based - 1]
    }

    pub fn scale(mut self, c: C64) -> Self {
        for r in &mut self.rho {
            *r *= c;
        }
        self
    }
}

/// Face weights exactly as written: every weight carries the
/// `sin 2λ sin 3λ` (or `sin 3λ`) denominator.
pub fn face_weights(u: C64, lambda: f64) -> Result<FaceWeights> {
    check_lambda(lambda)?;
    let n = (2.0 * lambda).sin() * (3.0 * lambda).sin();
    let s3 = (3.0 * lambda).sin();
    let l = C64::from(lambda);
    let su = csin(u);
    let s3mu = csin(3.0 * l - u);
    let r67 = su * s3mu / n;
    let r23 = s3mu / s3;
    let r45 = su / s3;
    Ok(FaceWeights {
        rho: [
            1.0 + r67,
            r23,
            r23,
            r45,
            r45,
            r67,
            r67,
            csin(2.0 * l - u) * s3mu / n,
            -su * csin(l - u) / n,
        ],
    })
}

/// Face weights multiplied through by `sin 2λ sin 3λ`. Finite at every λ,
/// including λ = π/3 where the written form diverges.
pub fn cleared_face_weights(u: C64, lambda: f64) -> FaceWeights {
    let s2 = (2.0 * lambda).sin();
    let s3 = (3.0 * lambda).sin();
    let l = C64::from(lambda);
    let su = csin(u);
    let s3mu = csin(3.0 * l - u);
    let r67 = su * s3mu;
    FaceWeights {
        rho: [
            s2 * s3 + r67,
            s2 * s3mu,
            s2 * s3mu,
            s2 * su,
            s2 * su,
            r67,
            r67,
            csin(2.0 * l - u) * s3mu,
            -su * csin(l - u),
        ],
    }
}

/// Contractible-loop fugacity β = −2 cos 4λ.
pub fn loop_fugacity(lambda: f64) -> C64 {
    C64::from(-2.0 * (4.0 * lambda).cos())
}

/// Principal square root of `sin 2λ sin 3λ`, the normaliser inside `s_k`.
pub fn s_normaliser(lambda: f64) -> C64 {
    C64::from((2.0 * lambda).sin() * (3.0 * lambda).sin()).sqrt()
}

/// `s_k(u) = sin(u + kλ) / (sin 2λ sin 3λ)^{1/2}`.
pub fn s_k(u: C64, k: i32, lambda: f64) -> Result<C64> {
    check_lambda(lambda)?;
    Ok(csin(u + k as f64 * lambda) / s_normaliser(lambda))
}

/// Greatest common divisor.
pub fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Coprime pair `(a, b)` with λ = (b − a)π / 2b.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct RootOfUnity {
    pub a: u32,
    pub b: u32,
}

impl RootOfUnity {
    pub fn new(a: u32, b: u32) -> Result<Self> {
        if b < 2 || a == 0 || a >= b || gcd(a, b) != 1 {
            return Err(Error::InvalidRoot { a, b });
        }
        Ok(Self { a, b })
    }

    /// `(p, p')` → `(a, b)`: p odd gives (p, 2p'), p even gives (p/2, p').
    pub fn from_pp(p: u32, pp: u32) -> Result<Self> {
        if p == 0 || pp == 0 || gcd(p, pp) != 1 || p >= 2 * pp {
            return Err(Error::InvalidRoot { a: p, b: pp });
        }
        if p % 2 == 1 {
            Self::new(p, 2 * pp)
        } else {
            Self::new(p / 2, pp)
        }
    }

    pub fn lambda(&self) -> f64 {
        (self.b - self.a) as f64 * PI / (2.0 * self.b as f64)
    }

    /// Inverse of [`RootOfUnity::from_pp`].
    pub fn to_pp(&self) -> (u32, u32) {
        if self.b % 2 == 0 && self.a % 2 == 1 {
            (self.a, self.b / 2)
        } else {
            (2 * self.a, self.b)
        }
    }
}

/// How face weights and `s_k` are normalised.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Normalization {
    /// Weights as written, with the `sin 2λ sin 3λ` denominators.
    #[default]
    Standard,
    /// Denominators cleared: `ρ → sin2λ sin3λ · ρ`, `s_k → sin(u + kλ)`.
    /// Every tested identity is homogeneous, so it holds in either form.
    Cleared,
}

/// All scalar parameters of one computation.
#[derive(Clone, Debug)]
pub struct SpectralContext {
    pub n: usize,
    pub lambda: f64,
    pub root: Option<RootOfUnity>,
    pub xi: Vec<C64>,
    pub omega: C64,
    pub alpha: C64,
    pub tolerance: f64,
    pub normalization: Normalization,
    /// Reverse the sign convention for defect winding.
    pub flip_winding: bool,
}

impl SpectralContext {
    /// Generic λ, homogeneous ξ = 0, ω = 1, α = ω + ω⁻¹.
    pub fn new(n: usize, lambda: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidWidth);
        }
        check_lambda(lambda)?;
        Ok(Self {
            n,
            lambda,
            root: None,
            xi: vec![C64::from(0.0); n],
            omega: C64::from(1.0),
            alpha: C64::from(2.0),
            tolerance: 1e-9,
            normalization: Normalization::Standard,
            flip_winding: false,
        })
    }

    /// λ = (b − a)π / 2b. Singular λ is rejected unless `normalization`
    /// is [`Normalization::Cleared`].
    pub fn root_of_unity(n: usize, root: RootOfUnity, normalization: Normalization) -> Result<Self> {
        let lambda = root.lambda();
        if normalization == Normalization::Standard {
            check_lambda(lambda)?;
        }
        if n == 0 {
            return Err(Error::InvalidWidth);
        }
        Ok(Self {
            n,
            lambda,
            root: Some(root),
            xi: vec![C64::from(0.0); n],
            omega: C64::from(1.0),
            alpha: C64::from(2.0),
            tolerance: 1e-9,
            normalization,
            flip_winding: false,
        })
    }

    pub fn with_xi(mut self, xi: Vec<C64>) -> Result<Self> {
        if xi.len() != self.n {
            return Err(Error::InvalidXi { expected: self.n, got: xi.len() });
        }
        self.xi = xi;
        Ok(self)
    }

    /// Sets ω and resets α to ω + ω⁻¹.
    pub fn with_omega(mut self, omega: C64) -> Self {
        self.omega = omega;
        self.alpha = omega + omega.inv();
        self
    }

    pub fn with_alpha(mut self, alpha: C64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_normalization(mut self, normalization: Normalization) -> Result<Self> {
        if normalization == Normalization::Standard {
            check_lambda(self.lambda)?;
        }
        self.normalization = normalization;
        Ok(self)
    }

    /// σ = (−1)^N.
    pub fn sigma(&self) -> f64 {
        if self.n % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    pub fn beta(&self) -> C64 {
        loop_fugacity(self.lambda)
    }

    /// x = e^{iλ}.
    pub fn x(&self) -> C64 {
        (I * self.lambda).exp()
    }

    pub fn face(&self, u: C64) -> FaceWeights {
        match self.normalization {
            Normalization::Standard => {
                face_weights(u, self.lambda).expect("context λ validated at construction")
            }
            Normalization::Cleared => cleared_face_weights(u, self.lambda),
        }
    }

    pub fn s(&self, u: C64, k: i32) -> C64 {
        let v = csin(u + k as f64 * self.lambda);
        match self.normalization {
            Normalization::Standard => v / s_normaliser(self.lambda),
            Normalization::Cleared => v,
        }
    }

    /// `f_k(u) = Π_j s_k(u − ξ_j)`.
    pub fn f(&self, u: C64, k: i32) -> C64 {
        self.xi.iter().map(|&x| self.s(u - x, k)).product()
    }

    /// The braid phase `e^{∓i(π − 2λ)}`; `sign = +1` is the `u → +i∞` limit.
    pub fn braid_phase(&self, sign: i32) -> C64 {
        (-(sign as f64) * I * (PI - 2.0 * self.lambda)).exp()
    }
}

/// Unique eigenvalue of the braid transfer matrix on `V_{N,d}`.
pub fn braid_eigenvalue(d: usize, sign: i32, ctx: &SpectralContext) -> C64 {
    if d == 0 {
        return ctx.alpha + 1.0;
    }
    let w = ctx.braid_phase(sign).powi(d as i32);
    ctx.omega * w + 1.0 + ctx.omega.inv() * w.inv()
}

/// `U_m(y1, y2)` with `y3 = 1/(y1 y2)`. Collisions between the `y`'s are
/// handled through the recursion `U_m = e1 U_{m−1} − e2 U_{m−2} + U_{m−3}`.
pub fn chebyshev_u(m: i32, y1: C64, y2: C64) -> C64 {
    if m < 0 {
        return C64::from(0.0);
    }
    let y3 = (y1 * y2).inv();
    let sep = (y1 - y2).norm().min((y1 - y3).norm()).min((y2 - y3).norm());
    if sep < CHEBYSHEV_COLLISION {
        return chebyshev_u_recursive(m, y1, y2);
    }
    let p = m + 2;
    (y1.powi(p) * (y2 - y3) + y2.powi(p) * (y3 - y1) + y3.powi(p) * (y1 - y2))
        / ((y1 - y2) * (y1 - y3) * (y2 - y3))
}

/// Complete homogeneous symmetric polynomials in (y1, y2, y3), via the
/// three-term recursion with elementary symmetric `e1`, `e2` and `e3 = 1`.
pub fn chebyshev_u_recursive(m: i32, y1: C64, y2: C64) -> C64 {
    if m < 0 {
        return C64::from(0.0);
    }
    let y3 = (y1 * y2).inv();
    let e1 = y1 + y2 + y3;
    let e2 = y1 * y2 + y1 * y3 + y2 * y3;
    let mut h = vec![C64::from(0.0); (m + 1) as usize];
    for k in 0..=m as usize {
        let at = |j: isize| if j < 0 { C64::from(0.0) } else { h[j as usize] };
        h[k] = if k == 0 {
            C64::from(1.0)
        } else {
            e1 * at(k as isize - 1) - e2 * at(k as isize - 2) + at(k as isize - 3)
        };
    }
    h[m as usize]
}

/// Eigenvalue of `T^{m,0}_{±∞}` on `V_{N,d}`.
pub fn fused_braid_eigenvalue(m: i32, d: usize, sign: i32, ctx: &SpectralContext) -> C64 {
    let y1 = ctx.omega * ctx.braid_phase(sign).powi(d as i32);
    chebyshev_u(m, y1, C64::from(1.0))
}

/// Unique eigenvalue of the central tangle J on `V_{N,d}`:
/// `σ^{−a}((−1)^{ad}(ω^b + ω^{−b}) + 1)`.
pub fn j_eigenvalue(d: usize, root: RootOfUnity, ctx: &SpectralContext) -> C64 {
    let sign_ad = if (root.a as usize * d) % 2 == 0 { 1.0 } else { -1.0 };
    let sig_a = ctx.sigma().powi(root.a as i32);
    let ob = ctx.omega.powi(root.b as i32);
    (sign_ad * (ob + ob.inv()) + 1.0) / sig_a
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> C64 {
        C64::from(x)
    }

    #[test]
    fn weights_at_zero_are_identity() {
        let w = face_weights(c(0.0), 0.55).unwrap();
        for (k, expect) in [1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0].iter().enumerate() {
            assert!((w.rho[k] - expect).norm() < 1e-15, "rho{}", k + 1);
        }
    }

    #[test]
    fn weights_at_three_lambda() {
        let l = 3.0 * PI / 8.0;
        let w = face_weights(c(3.0 * l), l).unwrap();
        for (k, expect) in [1.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 1.0].iter().enumerate() {
            assert!((w.rho[k] - expect).norm() < 1e-12, "rho{}", k + 1);
        }
        assert!(face_weights(c(2.0 * 0.55), 0.55).unwrap().rho[7].norm() < 1e-15);
    }

    #[test]
    fn singular_lambda_rejected() {
        for l in [PI / 3.0, PI / 2.0, 2.0 * PI / 3.0] {
            assert!(matches!(face_weights(c(0.2), l), Err(Error::SingularLambda(_))));
        }
    }

    #[test]
    fn fugacities() {
        assert!(loop_fugacity(3.0 * PI / 8.0).norm() < 1e-15);
        assert!((loop_fugacity(PI / 3.0) - 1.0).norm() < 1e-15);
        assert!((loop_fugacity(5.0 * PI / 16.0) - 2f64.sqrt()).norm() < 1e-15);
    }

    #[test]
    fn pp_conversion() {
        assert_eq!(RootOfUnity::from_pp(1, 2).unwrap(), RootOfUnity { a: 1, b: 4 });
        assert_eq!(RootOfUnity::from_pp(2, 3).unwrap(), RootOfUnity { a: 1, b: 3 });
        for (p, pp) in [(1, 2), (2, 3), (3, 4), (1, 3), (3, 5), (4, 5)] {
            let r = RootOfUnity::from_pp(p, pp).unwrap();
            assert_eq!(r.to_pp(), (p, pp));
            let l = (2 * pp - p) as f64 * PI / (4 * pp) as f64;
            assert!((r.lambda() - l).abs() < 1e-15);
        }
        assert!(RootOfUnity::new(2, 4).is_err());
    }

    #[test]
    fn chebyshev_low_orders() {
        let (y1, y2) = (C64::new(0.3, 1.2), C64::new(-0.7, 0.4));
        assert!((chebyshev_u(0, y1, y2) - 1.0).norm() < 1e-13);
        let y3 = (y1 * y2).inv();
        assert!((chebyshev_u(1, y1, y2) - (y1 + y2 + y3)).norm() < 1e-12);
        for m in 0..7 {
            let a = chebyshev_u(m, y1, y2);
            let b = chebyshev_u_recursive(m, y1, y2);
            assert!((a - b).norm() < 1e-10 * (1.0 + a.norm()), "m={m}");
        }
        // all three roots equal 1: U_m(1,1) = (m+1)(m+2)/2
        for m in 0..6 {
            let v = chebyshev_u(m, c(1.0), c(1.0));
            assert!((v - ((m + 1) * (m + 2) / 2) as f64).norm() < 1e-12);
        }
    }
}
