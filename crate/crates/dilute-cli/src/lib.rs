//! Command-line front end for the dilute loop-model checks: configuration,
//! orchestration over a bounded worker pool, and report emission.

pub mod catalog;
pub mod checks;
pub mod config;
pub mod report;
pub mod suite;

use std::ffi::OsString;

use clap::Parser;
use dilute::closure::export_tba_diagram;
use dilute::linkstates::enumerate_link_states;
use rayon::prelude::*;

pub use config::{ConfigError, Flags, Format, RunConfig};
pub use report::VerificationReport;

/// Exit codes.
pub const PASS: i32 = 0;
pub const FAIL: i32 = 1;
pub const CONFIG: i32 = 2;

/// Everything a run produced: the resolved configuration, the report
/// lines and the text that was (or would be) written.
pub struct Outcome {
    pub config: Option<RunConfig>,
    pub results: Vec<VerificationReport>,
    pub rendered: String,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.results.iter().all(|r| r.pass)
    }
}

fn info_only(rendered: String) -> Outcome {
    Outcome { config: None, results: Vec::new(), rendered }
}

/// Parses, schedules and runs; does not print or write anything.
pub fn execute(flags: Flags) -> Result<Outcome, ConfigError> {
    let flags = match &flags.config {
        Some(path) => {
            let file = config::load_file(path)?;
            flags.over(file)
        }
        None => flags,
    };
    if flags.list {
        let mut s = String::new();
        for c in catalog::catalog() {
            s.push_str(&format!("{:<28} {:e}\n", c.id, c.tolerance));
        }
        return Ok(info_only(s));
    }
    if let Some(id) = &flags.explain {
        let c = catalog::find(id).ok_or_else(|| config::config_error("explain", format!("unknown check `{id}`")))?;
        return Ok(info_only(format!("{}\n  tolerance: {:e}\n  {}\n", c.id, c.tolerance, c.explain)));
    }
    let cfg = RunConfig::resolve(flags)?;
    if cfg.subcommand == "transfer" && cfg.dump {
        let text = checks::dump(&cfg).map_err(|e| config::config_error("d", e.to_string()))?;
        return Ok(Outcome { config: Some(cfg), results: Vec::new(), rendered: text });
    }
    let batches = suite::schedule(&cfg)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| config::config_error("threads", e.to_string()))?;
    // order of the collected batches follows the schedule, not completion
    let results: Vec<VerificationReport> =
        pool.install(|| batches.into_par_iter().map(|b| b()).collect::<Vec<_>>()).into_iter().flatten().collect();

    let rendered = match (cfg.subcommand.as_str(), cfg.format) {
        ("enumerate", Format::Text) => {
            let mut s = String::new();
            for &d in &cfg.d {
                let basis = enumerate_link_states(cfg.n, d).map_err(|e| config::config_error("d", e.to_string()))?;
                for st in &basis.states {
                    s.push_str(&format!("{st}\n"));
                }
                s.push_str(&format!("dim={}\n", basis.len()));
            }
            s
        }
        ("tba-export", Format::Text | Format::Json) => {
            let root = cfg.root_of_unity().expect("resolved with a root");
            let diagram = export_tba_diagram(root);
            if cfg.format == Format::Text {
                diagram.to_text()
            } else {
                serde_json::to_string_pretty(&diagram).expect("diagram serialises") + "\n"
            }
        }
        _ => report::render(&cfg, &results, cfg.format),
    };
    Ok(Outcome { config: Some(cfg), results, rendered })
}

/// Runs the CLI on `argv` (program name first) and returns the exit code:
/// 0 when every check passes, 1 on any failure, 2 on a configuration error.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let flags = match Flags::try_parse_from(argv) {
        Ok(f) => f,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { CONFIG } else { PASS };
        }
    };
    let outcome = match execute(flags) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return CONFIG;
        }
    };
    let target = outcome.config.as_ref().and_then(|c| c.output.clone());
    match target {
        Some(path) => {
            if let Err(e) = std::fs::write(&path, &outcome.rendered) {
                eprintln!("error: invalid `output`: {}: {e}", path.display());
                return CONFIG;
            }
        }
        None => print!("{}", outcome.rendered),
    }
    let failed = outcome.results.iter().filter(|r| !r.pass).count();
    if failed > 0 {
        eprintln!("{failed} of {} checks failed", outcome.results.len());
        FAIL
    } else {
        PASS
    }
}
