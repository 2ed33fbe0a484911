//! Flag parsing, config-file merging and resolution into a [`RunConfig`].

use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::Parser;
use dilute::scalars::{is_singular_lambda, Normalization, RootOfUnity, SpectralContext};
use dilute::C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
#[error("invalid `{field}`: {message}")]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

pub fn config_error(field: &str, message: impl Into<String>) -> ConfigError {
    ConfigError { field: field.to_string(), message: message.into() }
}

pub const SUBCOMMANDS: [&str; 10] = [
    "enumerate",
    "local-check",
    "transfer",
    "fusion-check",
    "tsystem",
    "ysystem",
    "closure",
    "projector-check",
    "tba-export",
    "suite",
];

/// Raw flags. A JSON config file uses the same keys (long flag names).
#[derive(Parser, Debug, Default, Clone, Serialize, Deserialize)]
#[command(
    name = "dilute",
    version,
    about = "Residual checks for the periodic dilute loop model",
    after_help = "subcommands: enumerate, local-check, transfer, fusion-check, tsystem, ysystem, closure, projector-check, tba-export, suite"
)]
#[serde(deny_unknown_fields, default)]
pub struct Flags {
    /// Which checks to run.
    #[arg(value_name = "SUBCOMMAND")]
    pub subcommand: Option<String>,
    /// JSON file with flat keys mirroring the flags; flags win.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,

    /// System width.
    #[arg(long = "N", value_name = "N")]
    #[serde(rename = "N")]
    pub n: Option<usize>,
    /// Defect counts: comma list or `all`.
    #[arg(long)]
    pub d: Option<String>,
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Root of unity λ = (b − a)π/2b.
    #[arg(long)]
    pub a: Option<u32>,
    #[arg(long)]
    pub b: Option<u32>,
    /// Root of unity in (p, p′) form; takes precedence over a/b.
    #[arg(long)]
    pub p: Option<u32>,
    #[arg(long = "pp", alias = "p-prime")]
    pub pp: Option<u32>,
    /// Comma list of complex numbers, or `random:SEED`.
    #[arg(long)]
    pub xi: Option<String>,
    /// Complex number, or `phase:θ` for e^{iθ}.
    #[arg(long)]
    pub omega: Option<String>,
    /// Overrides α = ω + ω⁻¹.
    #[arg(long)]
    pub alpha: Option<String>,
    /// Tolerance override, `CHECK=VALUE`; repeatable.
    #[arg(long = "tol", value_name = "CHECK=VALUE")]
    pub tol: Vec<String>,

    /// Local identity (or `all`) for local-check.
    #[arg(long)]
    pub id: Option<String>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Spectral parameter for `transfer --dump`.
    #[arg(long)]
    pub u: Option<String>,
    /// Print the transfer matrix instead of checking it.
    #[arg(long)]
    pub dump: bool,
    /// Largest fusion / projector label.
    #[arg(long = "m-max")]
    #[serde(rename = "m-max")]
    pub m_max: Option<i32>,
    /// primary | alternate | both
    #[arg(long)]
    pub family: Option<String>,
    /// recursion | determinant | both
    #[arg(long)]
    pub construction: Option<String>,
    /// single | small | large
    #[arg(long)]
    pub grid: Option<String>,
    /// Suite preset: `generic`, `full` or `dlm-P-P′`.
    #[arg(long)]
    pub preset: Option<String>,

    /// json | csv | text
    #[arg(long)]
    pub format: Option<String>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Worker threads.
    #[arg(long)]
    pub threads: Option<usize>,
    /// List check ids and exit.
    #[arg(long)]
    pub list: bool,
    /// Describe one check id and exit.
    #[arg(long)]
    pub explain: Option<String>,
}

impl Flags {
    /// `self` wins wherever it is set.
    pub fn over(self, file: Flags) -> Flags {
        macro_rules! pick {
            ($($f:ident),*) => {{
                let base = self.clone();
                Flags { $($f: self.$f.or(file.$f),)* ..base }
            }};
        }
        let mut merged = pick!(
            subcommand, n, d, lambda, a, b, p, pp, xi, omega, alpha, id, trials, seed, u, m_max, family,
            construction, grid, preset, format, output, threads, explain
        );
        merged.dump = self.dump || file.dump;
        merged.list = self.list || file.list;
        if self.tol.is_empty() {
            merged.tol = file.tol;
        }
        merged
    }
}

pub fn load_file(path: &PathBuf) -> Result<Flags, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| config_error("config", format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| {
        let msg = e.to_string();
        // serde names the field in the message; surface it as the field
        let field = msg
            .split('`')
            .nth(1)
            .filter(|_| msg.contains("field"))
            .unwrap_or("config")
            .to_string();
        ConfigError { field, message: msg }
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LambdaSource {
    PPrime,
    AB,
    Float,
    Default,
}

/// Fully resolved run configuration; echoed in every report header.
#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub subcommand: String,
    #[serde(rename = "N")]
    pub n: usize,
    pub d: Vec<usize>,
    pub lambda: f64,
    pub lambda_source: LambdaSource,
    /// `(a, b)` and `(p, p′)` when λ is a root of unity.
    pub root: Option<(u32, u32)>,
    pub p_pprime: Option<(u32, u32)>,
    /// Inputs that lost to a higher-precedence λ specification.
    pub overridden: Vec<String>,
    pub normalization: Normalization,
    pub xi_spec: String,
    pub xi: Vec<[f64; 2]>,
    pub omega: [f64; 2],
    pub alpha: [f64; 2],
    pub tolerances: BTreeMap<String, f64>,
    pub id: String,
    pub trials: usize,
    pub seed: u64,
    pub u: [f64; 2],
    pub dump: bool,
    pub m_max: i32,
    pub families: Vec<String>,
    pub constructions: Vec<String>,
    pub grid: String,
    pub preset: Option<String>,
    pub format: Format,
    #[serde(skip)]
    pub output: Option<PathBuf>,
    #[serde(skip)]
    pub threads: usize,
}

pub fn parse_complex(s: &str) -> Option<C64> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if let Some(theta) = t.strip_prefix("phase:") {
        return theta.parse::<f64>().ok().map(|th| C64::from_polar(1.0, th));
    }
    let Some(body) = t.strip_suffix('i') else {
        return t.parse::<f64>().ok().map(C64::from);
    };
    // split at the last sign that is not an exponent sign
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (&body[..k], &body[k..]),
        None => ("0", body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        x => x.parse().ok()?,
    };
    Some(C64::new(re.parse().ok()?, im))
}

fn complex_field(field: &str, s: &str) -> Result<C64, ConfigError> {
    parse_complex(s).ok_or_else(|| config_error(field, format!("`{s}` is not a complex number")))
}

fn pair(c: C64) -> [f64; 2] {
    [c.re, c.im]
}

/// Inhomogeneities for width `n`: seeded draws, or a prefix of the list.
pub fn xi_values(spec: &str, n: usize) -> Result<Vec<C64>, ConfigError> {
    if let Some(seed) = spec.strip_prefix("random:") {
        let seed: u64 = seed.parse().map_err(|_| config_error("xi", format!("bad seed in `{spec}`")))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        return Ok((0..n).map(|_| C64::new(rng.gen_range(-0.3..0.3), rng.gen_range(-0.1..0.1))).collect());
    }
    if spec == "zero" {
        return Ok(vec![C64::from(0.0); n]);
    }
    let vals: Vec<C64> = spec.split(',').map(|s| complex_field("xi", s)).collect::<Result<_, _>>()?;
    if vals.len() < n {
        return Err(config_error("xi", format!("{} values given, N = {n}", vals.len())));
    }
    Ok(vals[..n].to_vec())
}

fn choice(field: &str, value: Option<&str>, default: &str, allowed: &[&str]) -> Result<Vec<String>, ConfigError> {
    let v = value.unwrap_or(default);
    if v == "both" {
        return Ok(allowed.iter().map(|s| s.to_string()).collect());
    }
    if allowed.contains(&v) {
        Ok(vec![v.to_string()])
    } else {
        Err(config_error(field, format!("`{v}` is not one of {}, both", allowed.join(", "))))
    }
}

impl RunConfig {
    pub fn resolve(f: Flags) -> Result<Self, ConfigError> {
        let subcommand = f.subcommand.clone().ok_or_else(|| config_error("subcommand", "missing"))?;
        if !SUBCOMMANDS.contains(&subcommand.as_str()) {
            return Err(config_error("subcommand", format!("unknown subcommand `{subcommand}`")));
        }
        let default_n = if subcommand == "projector-check" { 2 } else { 3 };
        let n = f.n.unwrap_or(default_n);
        if n == 0 || n > 10 {
            return Err(config_error("N", format!("{n} outside 1..=10")));
        }
        let d = match f.d.as_deref() {
            None | Some("all") => (0..=n).collect(),
            Some(list) => {
                let mut v = Vec::new();
                for s in list.split(',') {
                    let x: usize =
                        s.trim().parse().map_err(|_| config_error("d", format!("`{s}` is not a defect count")))?;
                    if x > n {
                        return Err(config_error("d", format!("{x} exceeds N = {n}")));
                    }
                    v.push(x);
                }
                v
            }
        };

        // λ precedence: (p, p′) > (a, b) > float
        let mut overridden = Vec::new();
        let (root, source) = match (f.p, f.pp, f.a, f.b) {
            (Some(p), Some(pp), ..) => {
                for (k, v) in [("a", f.a), ("b", f.b)] {
                    if let Some(v) = v {
                        overridden.push(format!("{k} = {v}"));
                    }
                }
                let r = RootOfUnity::from_pp(p, pp).map_err(|e| config_error("pp", e.to_string()))?;
                (Some(r), LambdaSource::PPrime)
            }
            (Some(_), None, ..) => return Err(config_error("pp", "p given without pp")),
            (None, Some(_), ..) => return Err(config_error("p", "pp given without p")),
            (None, None, Some(a), Some(b)) => {
                (Some(RootOfUnity::new(a, b).map_err(|e| config_error("b", e.to_string()))?), LambdaSource::AB)
            }
            (None, None, Some(_), None) => return Err(config_error("b", "a given without b")),
            (None, None, None, Some(_)) => return Err(config_error("a", "b given without a")),
            (None, None, None, None) => (None, if f.lambda.is_some() { LambdaSource::Float } else { LambdaSource::Default }),
        };
        if root.is_some() {
            if let Some(l) = f.lambda {
                overridden.push(format!("lambda = {l}"));
            }
        }
        let lambda = match root {
            Some(r) => r.lambda(),
            None => f.lambda.unwrap_or(0.55),
        };
        let normalization = if root.is_some() && is_singular_lambda(lambda) {
            Normalization::Cleared
        } else if is_singular_lambda(lambda) || !(lambda > 0.0 && lambda < std::f64::consts::FRAC_PI_2) {
            return Err(config_error("lambda", format!("{lambda} is singular or outside (0, π/2)")));
        } else {
            Normalization::Standard
        };
        if matches!(subcommand.as_str(), "closure" | "tba-export") && root.is_none() {
            return Err(config_error("a", format!("{subcommand} needs a root of unity: set a/b or p/pp")));
        }

        let xi_spec = f.xi.clone().unwrap_or_else(|| "random:1".into());
        let xi = xi_values(&xi_spec, n)?;
        let omega = complex_field("omega", f.omega.as_deref().unwrap_or("phase:0.7"))?;
        let alpha = match f.alpha.as_deref() {
            Some(s) => complex_field("alpha", s)?,
            None => omega + omega.inv(),
        };

        let mut tolerances = BTreeMap::new();
        for t in &f.tol {
            let (k, v) = t.split_once('=').ok_or_else(|| config_error("tol", format!("`{t}` is not CHECK=VALUE")))?;
            let v: f64 = v.parse().map_err(|_| config_error("tol", format!("`{v}` is not a number")))?;
            if !(v.is_finite() && v >= 0.0) {
                return Err(config_error("tol", format!("{k}: tolerance must be finite and non-negative")));
            }
            if !crate::catalog::is_known(k) {
                return Err(config_error("tol", format!("unknown check `{k}`")));
            }
            tolerances.insert(k.to_string(), v);
        }

        let id = f.id.clone().unwrap_or_else(|| "all".into());
        if id != "all" && !dilute::planar::IDENTITIES.contains(&id.as_str()) {
            return Err(config_error("id", format!("unknown identity `{id}`")));
        }
        let m_max = f.m_max.unwrap_or(4);
        if !(1..=6).contains(&m_max) {
            return Err(config_error("m-max", format!("{m_max} outside 1..=6")));
        }
        let families = choice("family", f.family.as_deref(), "both", &["primary", "alternate"])?;
        let constructions = choice("construction", f.construction.as_deref(), "both", &["recursion", "determinant"])?;
        let grid = f.grid.clone().unwrap_or_else(|| "single".into());
        if !["single", "small", "large"].contains(&grid.as_str()) {
            return Err(config_error("grid", format!("`{grid}` is not one of single, small, large")));
        }
        let preset = f.preset.clone();
        if subcommand == "suite" {
            let p = preset.as_deref().ok_or_else(|| config_error("preset", "suite needs a preset"))?;
            crate::suite::Preset::parse(p)?;
        }
        let format = match f.format.as_deref().unwrap_or("text") {
            "json" => Format::Json,
            "csv" => Format::Csv,
            "text" => Format::Text,
            x => return Err(config_error("format", format!("`{x}` is not one of json, csv, text"))),
        };
        let threads = f.threads.unwrap_or_else(|| std::thread::available_parallelism().map_or(4, |n| n.get()).min(8));
        if threads == 0 {
            return Err(config_error("threads", "must be positive"));
        }

        Ok(Self {
            subcommand,
            n,
            d,
            lambda,
            lambda_source: source,
            root: root.map(|r| (r.a, r.b)),
            p_pprime: root.map(|r| r.to_pp()),
            overridden,
            normalization,
            xi_spec,
            xi: xi.into_iter().map(pair).collect(),
            omega: pair(omega),
            alpha: pair(alpha),
            tolerances,
            id,
            trials: f.trials.unwrap_or(20),
            seed: f.seed.unwrap_or(1),
            u: pair(complex_field("u", f.u.as_deref().unwrap_or("0.37+0.1i"))?),
            dump: f.dump,
            m_max,
            families,
            constructions,
            grid,
            preset,
            format,
            output: f.output.clone(),
            threads,
        })
    }

    /// The same run at root of unity `root` (suite presets).
    pub fn with_root(&self, root: RootOfUnity) -> Self {
        let lambda = root.lambda();
        Self {
            lambda,
            lambda_source: LambdaSource::PPrime,
            root: Some((root.a, root.b)),
            p_pprime: Some(root.to_pp()),
            normalization: if is_singular_lambda(lambda) { Normalization::Cleared } else { Normalization::Standard },
            ..self.clone()
        }
    }

    pub fn root_of_unity(&self) -> Option<RootOfUnity> {
        self.root.map(|(a, b)| RootOfUnity { a, b })
    }

    /// Context of width `n` (a prefix of the configured inhomogeneities).
    pub fn context(&self, n: usize) -> Result<SpectralContext, ConfigError> {
        let err = |e: dilute::Error| config_error("lambda", e.to_string());
        let base = match self.root_of_unity() {
            Some(r) => SpectralContext::root_of_unity(n, r, self.normalization).map_err(err)?,
            None => SpectralContext::new(n, self.lambda).map_err(err)?,
        };
        let xi = xi_values(&self.xi_spec, n)?;
        let omega = C64::new(self.omega[0], self.omega[1]);
        Ok(base
            .with_xi(xi)
            .map_err(|e| config_error("xi", e.to_string()))?
            .with_omega(omega)
            .with_alpha(C64::new(self.alpha[0], self.alpha[1])))
    }

    pub fn tolerance(&self, check: &str, default: f64) -> f64 {
        self.tolerances.get(check).copied().unwrap_or(default)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_forms() {
        assert_eq!(parse_complex("0.3"), Some(C64::new(0.3, 0.0)));
        assert_eq!(parse_complex("0.3+0.1i"), Some(C64::new(0.3, 0.1)));
        assert_eq!(parse_complex("-0.3-2i"), Some(C64::new(-0.3, -2.0)));
        assert_eq!(parse_complex("1e-3-1e-2i"), Some(C64::new(1e-3, -1e-2)));
        assert_eq!(parse_complex("-i"), Some(C64::new(0.0, -1.0)));
        assert_eq!(parse_complex("0.5i"), Some(C64::new(0.0, 0.5)));
        assert!((parse_complex("phase:0.7").unwrap() - C64::from_polar(1.0, 0.7)).norm() < 1e-16);
        assert_eq!(parse_complex("x"), None);
    }
}
