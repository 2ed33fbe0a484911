//! Suite presets and the scheduling of checks into batches.

use std::sync::Arc;

use dilute::planar::IDENTITIES;
use dilute::scalars::RootOfUnity;

use crate::checks::{self, Batch};
use crate::config::{config_error, ConfigError, RunConfig};

/// Roots exercised by the `full` preset, as `(a, b)`.
pub const ROOTS: [(u32, u32); 4] = [(1, 2), (1, 3), (1, 4), (3, 4)];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preset {
    /// Everything that does not need a root of unity.
    Generic,
    /// Closure and TBA checks at the root with this `(p, p′)`.
    Dlm(RootOfUnity),
    /// `generic` plus every root in [`ROOTS`].
    Full,
}

impl Preset {
    pub fn parse(s: &str) -> Result<Self, ConfigError> {
        match s {
            "generic" => return Ok(Self::Generic),
            "full" => return Ok(Self::Full),
            _ => {}
        }
        let bad = || config_error("preset", format!("`{s}` is not generic, full or dlm-P-P′"));
        let rest = s.strip_prefix("dlm-").ok_or_else(bad)?;
        let (p, pp) = rest.split_once('-').ok_or_else(bad)?;
        let (p, pp) = (p.parse().map_err(|_| bad())?, pp.parse().map_err(|_| bad())?);
        RootOfUnity::from_pp(p, pp).map(Self::Dlm).map_err(|e| config_error("preset", e.to_string()))
    }
}

fn validate(cfg: &RunConfig, widths: impl IntoIterator<Item = usize>) -> Result<(), ConfigError> {
    for n in widths {
        cfg.context(n)?;
    }
    Ok(())
}

fn closure_batches(cfg: &Arc<RunConfig>, widths: std::ops::RangeInclusive<usize>, out: &mut Vec<Batch>) -> Result<(), ConfigError> {
    validate(cfg, widths.clone())?;
    for n in widths {
        let ds: Vec<usize> = if n == cfg.n { cfg.d.clone() } else { (0..=n).collect() };
        for d in ds {
            out.push(checks::closure(cfg.clone(), n, d));
        }
    }
    out.push(checks::tba(cfg.clone()));
    Ok(())
}

fn generic_batches(cfg: &Arc<RunConfig>, out: &mut Vec<Batch>) -> Result<(), ConfigError> {
    let top = cfg.n.min(4);
    validate(cfg, 1..=6)?;
    for n in 1..=8 {
        out.push(checks::dimension(cfg.clone(), n, true));
    }
    for id in IDENTITIES {
        out.push(checks::local(cfg.clone(), id, cfg.trials));
    }
    for n in 1..=6 {
        for d in 0..=n {
            out.push(checks::transfer(cfg.clone(), n, d, n <= top));
        }
    }
    for n in 1..=cfg.n.min(3) {
        for d in 0..=n {
            out.push(checks::fusion(cfg.clone(), n, d));
            out.push(checks::tsystem(cfg.clone(), n, d));
            out.push(checks::ysystem(cfg.clone(), n, d));
        }
    }
    projector_batches(cfg, 2, true, out);
    Ok(())
}

fn projector_batches(cfg: &Arc<RunConfig>, n: usize, all: bool, out: &mut Vec<Batch>) {
    for fam in &cfg.families {
        for label in checks::projector_labels(cfg.m_max as usize) {
            out.push(checks::projector(cfg.clone(), label, fam.clone()));
        }
    }
    if n <= 3 {
        let ds: Vec<usize> = if all { (0..=n).collect() } else { cfg.d.clone() };
        for d in ds {
            for fam in &cfg.families {
                out.push(checks::projected_transfer(cfg.clone(), n, d, fam.clone()));
            }
        }
    }
}

/// Batches for the configured subcommand, in report order.
pub fn schedule(cfg: &RunConfig) -> Result<Vec<Batch>, ConfigError> {
    let arc = Arc::new(cfg.clone());
    let mut out: Vec<Batch> = Vec::new();
    let n = cfg.n;
    validate(cfg, [n])?;
    match cfg.subcommand.as_str() {
        "enumerate" => out.push(checks::dimension(arc, n, false)),
        "local-check" => {
            for id in IDENTITIES.iter().filter(|&&id| cfg.id == "all" || cfg.id == id) {
                out.push(checks::local(arc.clone(), id, cfg.trials));
            }
        }
        "transfer" => {
            for &d in &cfg.d {
                out.push(checks::transfer(arc.clone(), n, d, true));
            }
        }
        "fusion-check" | "tsystem" | "ysystem" => {
            for &d in &cfg.d {
                out.push(match cfg.subcommand.as_str() {
                    "fusion-check" => checks::fusion(arc.clone(), n, d),
                    "tsystem" => checks::tsystem(arc.clone(), n, d),
                    _ => checks::ysystem(arc.clone(), n, d),
                });
            }
        }
        "closure" => closure_batches(&arc, n..=n, &mut out)?,
        "projector-check" => projector_batches(&arc, n, false, &mut out),
        "tba-export" => out.push(checks::tba(arc)),
        "suite" => {
            let preset = Preset::parse(cfg.preset.as_deref().unwrap_or_default())?;
            let widths = 1..=n.min(3);
            match preset {
                Preset::Generic => generic_batches(&arc, &mut out)?,
                Preset::Dlm(root) => closure_batches(&Arc::new(cfg.with_root(root)), widths, &mut out)?,
                Preset::Full => {
                    generic_batches(&arc, &mut out)?;
                    for (a, b) in ROOTS {
                        let root = RootOfUnity::new(a, b).expect("fixed admissible roots");
                        closure_batches(&Arc::new(cfg.with_root(root)), widths.clone(), &mut out)?;
                    }
                }
            }
        }
        other => return Err(config_error("subcommand", format!("unknown subcommand `{other}`"))),
    }
    Ok(out)
}
