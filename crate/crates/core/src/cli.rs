//! Configuration files and the `solve`, `sweep` and `probe` commands.
//!
//! A run is described by one JSON file holding a `problem` block and
//! exactly one command block. Unknown keys are rejected. Output files are
//! written to `--out` (default: the current directory):
//!
//! | command | files |
//! |---------|-------|
//! | `solve` | `coefficients.csv`, `field.csv` when `field_grid` is given |
//! | `sweep` | `convergence.csv`, `summary.json` |
//! | `probe` | `probe.csv` |
//!
//! Exit codes: 0 success, 2 configuration error, 3 numeric failure,
//! 1 I/O failure while writing outputs.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::Error;
use crate::solver::{c_coeff, gamma_coeff, solve, ProblemSpec};
use crate::spectral::FourierModes;
use crate::study::{
    asymptotic_c, geometric_radii, run_sweep, NormKind, SweepConfig, MIN_FIT_POINTS,
};

#[derive(Debug, Parser)]
#[command(name = "radmin", version, about = "Radiation-functional minimiser on an annulus")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Solve for one outer radius and write mode coefficients (and field samples).
    Solve(CommandArgs),
    /// Sweep the outer radius and fit convergence slopes.
    Sweep(CommandArgs),
    /// Per-mode coefficient diagnostics over a list of outer radii.
    Probe(CommandArgs),
}

#[derive(Debug, Clone, clap::Args)]
pub struct CommandArgs {
    /// Path to the JSON run configuration.
    pub config: PathBuf,
    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Suppress the summary printed on stdout.
    #[arg(long)]
    pub quiet: bool,
}

impl Command {
    pub fn args(&self) -> &CommandArgs {
        match self {
            Command::Solve(a) | Command::Sweep(a) | Command::Probe(a) => a,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Command::Solve(_) => "solve",
            Command::Sweep(_) => "sweep",
            Command::Probe(_) => "probe",
        }
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numeric error: {0}")]
    Numeric(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

fn numeric(context: impl std::fmt::Display) -> impl FnOnce(Error) -> CliError {
    move |e| CliError::Numeric(format!("{context}: {e}"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemBlock,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solve: Option<SolveBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe: Option<ProbeBlock>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemBlock {
    pub k: f64,
    pub r0: f64,
    pub modes: Vec<ModeEntry>,
    /// Require `f_{-n} = conj(f_n)`.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub real_data: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeEntry {
    pub n: i32,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveBlock {
    #[serde(rename = "R")]
    pub outer: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field_grid: Option<FieldGrid>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldGrid {
    pub r_points: usize,
    pub omega_points: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_max: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geometric: Option<GeometricRange>,
    /// Defaults to `2 r0`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_star: Option<f64>,
    /// Defaults to both norms.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub norms: Option<Vec<NormKind>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometricRange {
    pub min: f64,
    pub max: f64,
    pub per_decade: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeBlock {
    pub n: i32,
    #[serde(rename = "R")]
    pub radii: Vec<f64>,
}

fn positive(name: &str, value: f64) -> Result<(), CliError> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(CliError::Config(format!("{name} must be positive and finite, got {value}")))
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises")
    }

    /// Checks the schema-level invariants and that the single command block
    /// present is the one for `command`.
    pub fn validate(&self, command: &str) -> Result<(), CliError> {
        let present: Vec<&str> = [
            ("solve", self.solve.is_some()),
            ("sweep", self.sweep.is_some()),
            ("probe", self.probe.is_some()),
        ]
        .iter()
        .filter(|(_, p)| *p)
        .map(|(n, _)| *n)
        .collect();
        if present.len() != 1 {
            return Err(CliError::Config(format!(
                "expected exactly one command block, found {present:?}"
            )));
        }
        if present[0] != command {
            return Err(CliError::Config(format!(
                "command `{command}` needs a `{command}` block, found `{}`",
                present[0]
            )));
        }
        positive("problem.k", self.problem.k)?;
        positive("problem.r0", self.problem.r0)?;
        let mut seen = BTreeSet::new();
        for (i, m) in self.problem.modes.iter().enumerate() {
            if !seen.insert(m.n) {
                return Err(CliError::Config(format!("problem.modes[{i}]: duplicate mode n = {}", m.n)));
            }
            if !(m.re.is_finite() && m.im.is_finite()) {
                return Err(CliError::Config(format!("problem.modes[{i}]: non-finite coefficient")));
            }
        }
        if let Some(s) = &self.solve {
            positive("solve.R", s.outer)?;
            if let Some(g) = &s.field_grid {
                if g.r_points < 2 || g.omega_points < 1 {
                    return Err(CliError::Config(
                        "solve.field_grid needs r_points >= 2 and omega_points >= 1".into(),
                    ));
                }
                if let Some(v) = g.r_min {
                    positive("solve.field_grid.r_min", v)?;
                }
                if let Some(v) = g.r_max {
                    positive("solve.field_grid.r_max", v)?;
                }
            }
        }
        if let Some(s) = &self.sweep {
            match (&s.r_values, &s.geometric) {
                (Some(values), None) => {
                    for (i, &r) in values.iter().enumerate() {
                        positive(&format!("sweep.r_values[{i}]"), r)?;
                    }
                }
                (None, Some(g)) => {
                    positive("sweep.geometric.min", g.min)?;
                    positive("sweep.geometric.max", g.max)?;
                    if g.per_decade == 0 {
                        return Err(CliError::Config("sweep.geometric.per_decade must be >= 1".into()));
                    }
                }
                _ => {
                    return Err(CliError::Config(
                        "sweep needs exactly one of `r_values` or `geometric`".into(),
                    ))
                }
            }
            if let Some(r) = s.r_star {
                positive("sweep.r_star", r)?;
            }
        }
        if let Some(p) = &self.probe {
            if p.radii.is_empty() {
                return Err(CliError::Config("probe.R must list at least one radius".into()));
            }
            for (i, &r) in p.radii.iter().enumerate() {
                positive(&format!("probe.R[{i}]"), r)?;
            }
        }
        Ok(())
    }

    pub fn problem_spec(&self) -> Result<ProblemSpec, CliError> {
        let p = &self.problem;
        let data = FourierModes::from_pairs(p.modes.iter().map(|m| (m.n, Complex64::new(m.re, m.im))))
            .map_err(|e| CliError::Config(format!("problem.modes: {e}")))?;
        if p.real_data {
            data.enforce_real(1e-12 * data.max_abs().max(1.0))
                .map_err(|e| CliError::Config(format!("problem.modes: {e}")))?;
        }
        ProblemSpec::new(p.k, p.r0, data).map_err(|e| match e {
            Error::Invalid(msg) => CliError::Config(format!("problem: {msg}")),
            other => CliError::Numeric(format!("problem: {other}")),
        })
    }
}

/// Scientific notation with 17 significant digits.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    Ok(path)
}

/// Result of a command: files written plus a short human summary.
#[derive(Debug, Clone)]
pub struct CommandOutput {
    pub files: Vec<PathBuf>,
    pub summary: String,
}

pub fn cmd_solve(config: &RunConfig, out: &Path) -> Result<CommandOutput, CliError> {
    config.validate("solve")?;
    let block = config.solve.as_ref().expect("validated");
    let spec = config.problem_spec()?;
    let sol = solve(&spec, block.outer).map_err(numeric(format!("solve at R = {}", block.outer)))?;

    let mut csv = String::from("n,re_f,im_f,c,re_gamma,im_gamma,re_v,im_v\n");
    for m in sol.modes() {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{},{}",
            m.mode,
            fmt_num(m.f.re),
            fmt_num(m.f.im),
            fmt_num(m.c),
            fmt_num(m.gamma.re),
            fmt_num(m.gamma.im),
            fmt_num(m.v.re),
            fmt_num(m.v.im)
        );
    }
    let mut files = vec![write_file(out, "coefficients.csv", &csv)?];

    if let Some(grid) = &block.field_grid {
        let r_min = grid.r_min.unwrap_or(spec.r0());
        let r_max = grid.r_max.unwrap_or(block.outer);
        if !(r_min >= spec.r0() && r_max <= block.outer && r_min <= r_max) {
            return Err(CliError::Config(format!(
                "solve.field_grid radii [{r_min}, {r_max}] must lie in [{}, {}]",
                spec.r0(),
                block.outer
            )));
        }
        let u = sol.u_modes();
        let psi = sol.psi_modes();
        let mut csv = String::from("r,omega,re_u,im_u,re_psi,im_psi,abs_u_minus_psi\n");
        for i in 0..grid.r_points {
            let r = if i + 1 == grid.r_points {
                r_max
            } else {
                r_min + (r_max - r_min) * i as f64 / (grid.r_points - 1) as f64
            };
            for j in 0..grid.omega_points {
                let w = std::f64::consts::TAU * j as f64 / grid.omega_points as f64;
                let uv = u.evaluate(r, w).map_err(numeric(format!("field at r = {r}")))?;
                let pv = psi.evaluate(r, w).map_err(numeric(format!("field at r = {r}")))?;
                let _ = writeln!(
                    csv,
                    "{},{},{},{},{},{},{}",
                    fmt_num(r),
                    fmt_num(w),
                    fmt_num(uv.re),
                    fmt_num(uv.im),
                    fmt_num(pv.re),
                    fmt_num(pv.im),
                    fmt_num((uv - pv).norm())
                );
            }
        }
        files.push(write_file(out, "field.csv", &csv)?);
    }
    Ok(CommandOutput {
        files,
        summary: format!("solved {} modes at R = {}", sol.modes().len(), block.outer),
    })
}

/// Contents of `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub slope_fixed: Option<f64>,
    pub residual_fixed: Option<f64>,
    pub slope_full: Option<f64>,
    pub residual_full: Option<f64>,
    pub r_star: f64,
    pub n_points: usize,
}

pub fn cmd_sweep(config: &RunConfig, out: &Path) -> Result<CommandOutput, CliError> {
    config.validate("sweep")?;
    let block = config.sweep.as_ref().expect("validated");
    let spec = config.problem_spec()?;
    let r_values = match (&block.r_values, &block.geometric) {
        (Some(v), _) => v.clone(),
        (None, Some(g)) => geometric_radii(g.min, g.max, g.per_decade)
            .map_err(|e| CliError::Config(format!("sweep.geometric: {e}")))?,
        _ => unreachable!("validated"),
    };
    if r_values.len() < MIN_FIT_POINTS {
        return Err(CliError::Config(format!(
            "sweep yields {} radii; slope fits need at least {MIN_FIT_POINTS}",
            r_values.len()
        )));
    }
    let r_star = block.r_star.unwrap_or(2.0 * spec.r0());
    let norms = block
        .norms
        .clone()
        .unwrap_or_else(|| vec![NormKind::FixedWindow, NormKind::FullDomain]);
    let n_points = r_values.len();
    let sweep = SweepConfig::new(spec, r_values, r_star, norms)
        .map_err(|e| CliError::Config(format!("sweep: {e}")))?;
    let report = run_sweep(&sweep).map_err(numeric("sweep"))?;

    let mut csv = String::from("R,err_fixed,err_full,I_R,max_mode_gamma,max_mode_Rgc\n");
    for row in &report.rows {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{}",
            fmt_num(row.outer),
            fmt_num(row.error_fixed),
            fmt_num(row.error_full),
            fmt_num(row.reduced_functional),
            fmt_num(row.max_abs_gamma()),
            fmt_num(row.max_r_gamma_over_c())
        );
    }
    let summary = SweepSummary {
        slope_fixed: report.slope_fixed.map(|f| f.slope),
        residual_fixed: report.slope_fixed.map(|f| f.residual),
        slope_full: report.slope_full.map(|f| f.slope),
        residual_full: report.slope_full.map(|f| f.residual),
        r_star,
        n_points,
    };
    let json = serde_json::to_string_pretty(&summary).expect("summary serialises") + "\n";
    let files = vec![
        write_file(out, "convergence.csv", &csv)?,
        write_file(out, "summary.json", &json)?,
    ];
    let show = |v: Option<f64>| v.map_or("-".to_string(), |s| format!("{s:.4}"));
    Ok(CommandOutput {
        files,
        summary: format!(
            "{n_points} radii, slope_fixed = {}, slope_full = {}",
            show(summary.slope_fixed),
            show(summary.slope_full)
        ),
    })
}

pub fn cmd_probe(config: &RunConfig, out: &Path) -> Result<CommandOutput, CliError> {
    config.validate("probe")?;
    let block = config.probe.as_ref().expect("validated");
    let spec = config.problem_spec()?;
    let n = block.n;
    let f = spec.data().get(n);
    let mut csv = String::from("n,R,c,abs_gamma,abs_v,R_times_gamma_over_c,c_over_asymptotic_c\n");
    for &outer in &block.radii {
        let ctx = format!("mode {n} at R = {outer}");
        let c = c_coeff(n, outer, &spec).map_err(numeric(&ctx))?;
        let gamma = gamma_coeff(n, outer, &spec).map_err(numeric(&ctx))?;
        let c_inf = asymptotic_c(n, outer, &spec).map_err(numeric(&ctx))?;
        let v = -f * gamma / c;
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{}",
            n,
            fmt_num(outer),
            fmt_num(c),
            fmt_num(gamma.norm()),
            fmt_num(v.norm()),
            fmt_num(outer * gamma.norm() / c),
            fmt_num(c / c_inf)
        );
    }
    Ok(CommandOutput {
        files: vec![write_file(out, "probe.csv", &csv)?],
        summary: format!("probed mode {n} at {} radii", block.radii.len()),
    })
}

pub fn run(command: &Command) -> Result<CommandOutput, CliError> {
    let args = command.args();
    let config = RunConfig::load(&args.config)?;
    match command {
        Command::Solve(_) => cmd_solve(&config, &args.out),
        Command::Sweep(_) => cmd_sweep(&config, &args.out),
        Command::Probe(_) => cmd_probe(&config, &args.out),
    }
}
