//! Command-line front end. Exit codes: 0 success, 1 bad input or usage,
//! 2 resource cap, 3 internal invariant violation.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use serde_json::json;

use crate::asp::{emit_assumptions, GroundProgram};
use crate::bnb::{BnbConfig, StopMode};
use crate::demo::run_demo;
use crate::error::{Error, Result};
use crate::lattice::{AtomSet, Interval};
use crate::specanalysis::{
    analyze, assumption_lattice, parse_mini, stable_assumption_sets, verdict, Mode,
};

#[derive(Debug, Parser)]
#[command(
    name = "fixbound",
    version,
    about = "Bound and enumerate fixed points of non-monotone operators"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Answer set programs.
    #[command(subcommand)]
    Asp(AspCommand),
    /// Refine the best-response map on the unit square.
    Demo {
        #[arg(long, default_value_t = 8)]
        steps: usize,
        #[arg(long)]
        json: bool,
    },
    /// Sign analysis with speculative assumptions.
    #[command(subcommand)]
    Spec(SpecCommand),
}

#[derive(Debug, Subcommand)]
pub enum AspCommand {
    /// Print the well-founded bound, or with --bnb search for stable models.
    Bounds(BoundsArgs),
    /// Specialize a program to a bound.
    Preprocess {
        file: PathBuf,
        /// JSON file `{"lower": [...], "excluded": [...]}`.
        #[arg(long)]
        bounds: PathBuf,
        #[arg(long, value_enum, default_value_t = Emit::Program)]
        emit: Emit,
    },
    /// Stable models by exhaustive guessing.
    Oracle {
        file: PathBuf,
        /// Largest number of candidates to try.
        #[arg(long, default_value_t = 1 << 20)]
        cap: u64,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    pub file: PathBuf,
    #[arg(long)]
    pub bnb: bool,
    /// Maximum number of active intervals.
    #[arg(long)]
    pub budget: Option<usize>,
    /// Maximum number of outer iterations.
    #[arg(long)]
    pub outer_max: Option<usize>,
    /// Maximum number of refinement steps per interval.
    #[arg(long)]
    pub ir_max: Option<usize>,
    /// Stop once a stable model has been found.
    #[arg(long)]
    pub first: bool,
    #[arg(long)]
    pub json: bool,
    #[arg(long)]
    pub parallel: bool,
    /// Largest interval scanned when a stalled interval is enumerated.
    #[arg(long, default_value_t = 1 << 20)]
    pub enum_cap: u64,
}

#[derive(Debug, Subcommand)]
pub enum SpecCommand {
    /// Print the sign table under a set of assumptions.
    Analyze {
        file: PathBuf,
        /// Assumption label such as `loop:x>0`; repeatable.
        #[arg(long = "assume")]
        assume: Vec<String>,
        #[arg(long, value_enum, default_value_t = ModeArg::May)]
        mode: ModeArg,
        #[arg(long)]
        json: bool,
    },
    /// List the stable assumption sets.
    Stable {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = ModeArg::May)]
        mode: ModeArg,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Emit {
    Program,
    Assumptions,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    May,
    Proved,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::May => Mode::May,
            ModeArg::Proved => Mode::Proved,
        }
    }
}

/// The bounds file of `asp preprocess`.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsFile {
    #[serde(default)]
    pub lower: Vec<String>,
    #[serde(default)]
    pub excluded: Vec<String>,
}

impl BoundsFile {
    pub fn to_interval(&self, p: &GroundProgram) -> Result<Interval<AtomSet>> {
        let lat = p.lattice();
        let lo = lat.set(self.lower.iter().map(String::as_str))?;
        let out = lat.set(self.excluded.iter().map(String::as_str))?;
        if !lo.is_disjoint(&out) {
            return Err(Error::usage("an atom is both required and excluded"));
        }
        Ok(Interval::new(lo, out.complement()))
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        ))
    })
}

fn pretty(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("plain data");
    s.push('\n');
    s
}

fn asp_bounds(a: &BoundsArgs) -> Result<String> {
    let p = GroundProgram::from_text(&read(&a.file)?)?;
    let lat = p.lattice();
    if !a.bnb {
        let wf = p.well_founded_bound();
        return Ok(if a.json {
            pretty(&json!({ "well_founded": lat.interval_to_visible_json(&wf) }))
        } else {
            format!("well-founded bound: {}\n", lat.format_interval(&wf))
        });
    }
    let mut cfg = BnbConfig {
        budget: a.budget,
        outer_cap: a.outer_max,
        parallel: a.parallel,
        stop_mode: if a.first {
            StopMode::FirstFixedPoint
        } else {
            StopMode::Exhaustive
        },
        ..BnbConfig::default()
    };
    cfg.ir.max_f_steps = a.ir_max;
    cfg.validate()?;
    let r = p.stable_models(&cfg, a.enum_cap)?;
    if a.json {
        return Ok(pretty(&r.to_json(&lat)));
    }
    let mut out = String::new();
    let _ = writeln!(
        out,
        "well-founded bound: {}",
        lat.format_interval(&r.well_founded)
    );
    let _ = writeln!(out, "final intervals ({}):", r.search.final_bounds.len());
    for b in &r.search.final_bounds {
        let tag = if r.search.stalled.contains(b) {
            " (stalled)"
        } else {
            ""
        };
        let _ = writeln!(out, "  {}{tag}", lat.format_interval(b));
    }
    if !r.search.bounds.is_empty() {
        let _ = writeln!(out, "active intervals ({}):", r.search.bounds.len());
        for b in &r.search.bounds {
            let _ = writeln!(out, "  {}", lat.format_interval(b));
        }
    }
    let _ = writeln!(out, "stable models ({}):", r.models.len());
    for m in &r.models {
        let _ = writeln!(out, "  {}", lat.format_set(m));
    }
    let _ = writeln!(
        out,
        "outer iterations: {}, refinement runs: {}, complete: {}",
        r.search.outer_iterations,
        r.search.ir_calls,
        if r.complete { "yes" } else { "no" }
    );
    Ok(out)
}

fn asp_preprocess(file: &Path, bounds: &Path, emit: Emit) -> Result<String> {
    let p = GroundProgram::from_text(&read(file)?)?;
    let spec: BoundsFile = serde_json::from_str(&read(bounds)?)?;
    let b = spec.to_interval(&p)?;
    match emit {
        Emit::Program => Ok(p.partial_eval(&b)?.to_text()),
        Emit::Assumptions => emit_assumptions(&b, p.universe()),
    }
}

fn asp_oracle(file: &Path, cap: u64, as_json: bool) -> Result<String> {
    let p = GroundProgram::from_text(&read(file)?)?;
    let lat = p.lattice();
    let models = p.oracle_stable_models(cap)?;
    if as_json {
        let v: Vec<Vec<String>> = models.iter().map(|m| lat.visible_names_of(m)).collect();
        return Ok(pretty(&json!({ "models": v })));
    }
    let mut out = format!("stable models ({}):\n", models.len());
    for m in &models {
        let _ = writeln!(out, "  {}", lat.format_set(m));
    }
    Ok(out)
}

fn demo(steps: usize, as_json: bool) -> Result<String> {
    let t = run_demo(steps)?;
    if !as_json {
        return Ok(t.render_text());
    }
    let mut out = String::new();
    for line in t.to_json_lines() {
        out.push_str(&line.to_string());
        out.push('\n');
    }
    Ok(out)
}

fn spec_analyze(file: &Path, assume: &[String], mode: Mode, as_json: bool) -> Result<String> {
    let p = parse_mini(&read(file)?)?;
    let lat = assumption_lattice(&p);
    let sigma = lat.set(assume.iter().map(String::as_str))?;
    let s = analyze(&p, &sigma);
    let rows: Vec<(String, bool, _)> = p
        .assumptions
        .iter()
        .enumerate()
        .map(|(i, a)| (a.label.clone(), sigma.contains(i), verdict(&p, i, &s)))
        .collect();
    let kept = crate::specanalysis::safe(&p, &s, mode);
    if as_json {
        return Ok(pretty(&json!({
            "signs": s.to_json(&p),
            "assumptions": rows.iter().map(|(l, a, v)| json!({"label": l, "assumed": a, "verdict": v})).collect::<Vec<_>>(),
            "safe": lat.names_of(&kept),
        })));
    }
    let mut out = s.render(&p);
    for (l, a, v) in &rows {
        let mark = if *a { "*" } else { " " };
        let _ = writeln!(out, "{mark} {l}: {}", format!("{v:?}").to_lowercase());
    }
    let _ = writeln!(out, "safe: {}", lat.format_set(&kept));
    Ok(out)
}

fn spec_stable(file: &Path, mode: Mode, as_json: bool) -> Result<String> {
    let p = Arc::new(parse_mini(&read(file)?)?);
    let lat = assumption_lattice(&p);
    let r = stable_assumption_sets(&p, mode, &BnbConfig::default(), 1 << 20)?;
    if as_json {
        return Ok(pretty(&r.to_json(&p, &lat)));
    }
    let mut out = format!("stable assumption sets ({}):\n", r.sets.len());
    for (s, _) in &r.sets {
        let _ = writeln!(out, "  {}", lat.format_set(s));
    }
    if !r.complete {
        out.push_str("search incomplete\n");
    }
    Ok(out)
}

/// Runs a parsed command and returns what it prints on success.
pub fn execute(cli: &Cli) -> Result<String> {
    match &cli.command {
        Command::Asp(AspCommand::Bounds(a)) => asp_bounds(a),
        Command::Asp(AspCommand::Preprocess { file, bounds, emit }) => {
            asp_preprocess(file, bounds, *emit)
        }
        Command::Asp(AspCommand::Oracle { file, cap, json }) => asp_oracle(file, *cap, *json),
        Command::Demo { steps, json } => demo(*steps, *json),
        Command::Spec(SpecCommand::Analyze {
            file,
            assume,
            mode,
            json,
        }) => spec_analyze(file, assume, (*mode).into(), *json),
        Command::Spec(SpecCommand::Stable { file, mode, json }) => {
            spec_stable(file, (*mode).into(), *json)
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
/// Returns `(exit code, stdout, stderr)`.
pub fn run<I, T>(args: I) -> (i32, String, String)
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            return if code == 0 {
                (0, text, String::new())
            } else {
                (1, String::new(), text)
            };
        }
    };
    match execute(&cli) {
        Ok(out) => (0, out, String::new()),
        Err(e) => (e.exit_code(), String::new(), format!("error: {e}\n")),
    }
}
