#![allow(dead_code)]

use std::sync::OnceLock;

use dilute::scalars::{Normalization, RootOfUnity, SpectralContext};
use dilute::C64;

pub const LAMBDA: f64 = 0.55;

/// Frozen reference values produced by `oracles/dilute_oracle.py`.
pub fn oracle() -> &'static serde_json::Value {
    static CELL: OnceLock<serde_json::Value> = OnceLock::new();
    CELL.get_or_init(|| serde_json::from_str(include_str!("../data/oracle.json")).expect("oracle json"))
}

pub fn complex(v: &serde_json::Value) -> C64 {
    C64::new(v[0].as_f64().unwrap(), v[1].as_f64().unwrap())
}

pub fn xi(n: usize) -> Vec<C64> {
    (0..n).map(|j| C64::new(0.13 * j as f64, 0.05 - 0.02 * j as f64)).collect()
}

pub fn omega() -> C64 {
    C64::from_polar(1.0, 0.7)
}

/// Generic-λ context with the inhomogeneities used throughout the tests.
pub fn generic_ctx(n: usize) -> SpectralContext {
    SpectralContext::new(n, LAMBDA).unwrap().with_xi(xi(n)).unwrap().with_omega(omega())
}

pub fn root_ctx(n: usize, a: u32, b: u32) -> SpectralContext {
    // b = 3 places λ at π/3, where the standard normalisation is singular
    let norm = if b == 3 { Normalization::Cleared } else { Normalization::Standard };
    SpectralContext::root_of_unity(n, RootOfUnity::new(a, b).unwrap(), norm)
        .unwrap()
        .with_xi(xi(n))
        .unwrap()
        .with_omega(omega())
}

pub fn close(a: C64, b: C64, tol: f64) -> bool {
    (a - b).norm() <= tol * a.norm().max(b.norm()).max(1.0)
}
