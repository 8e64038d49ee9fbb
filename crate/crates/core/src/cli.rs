//! Command-line front end. Every command prints a table as CSV (12
//! significant digits) or JSON; failures map to exit codes 2 (input could
//! not be parsed), 3 (solver failure) and 4 (domain error).

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::conic::{hypothesis_testing, SolverOptions};
use crate::divergence::{
    d_max, d_min_f, d_min_projector, petz_renyi, relative_entropy, relative_entropy_variance,
    sandwiched_renyi, DivergenceValue,
};
use crate::error::{Error, Result};
use crate::io::read_operator;
use crate::operator::{
    random_state, seeded_rng, BipartiteLabel, DensityOperator, HermitianOperator, StateKind,
};
use crate::randomness::{fig3_rows, log_spaced_n};
use crate::smoothing::{
    bracket_sweep, smooth_dmax, smooth_hmin, BracketOptions, SeesawOptions, SmoothingSet,
};

pub const CONFIG_ENV: &str = "SMOOTHDIV_CONFIG";
/// First line of every CSV output.
pub const CSV_VERSION_LINE: &str = "# smoothdiv-csv v1";
const DEFAULT_EPS_GRID: &str = "0.05:0.5:10";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum, Default)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub tol_gap_abs: f64,
    pub tol_gap_rel: f64,
    pub tol_feas: f64,
    pub max_iter: u32,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let o = SolverOptions::default();
        Self {
            tol_gap_abs: o.tol_gap_abs,
            tol_gap_rel: o.tol_gap_rel,
            tol_feas: o.tol_feas,
            max_iter: o.max_iter,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SeesawConfig {
    pub restarts: usize,
    pub max_iters: usize,
    pub tol: f64,
}

impl Default for SeesawConfig {
    fn default() -> Self {
        let o = SeesawOptions::default();
        Self {
            restarts: o.restarts,
            max_iters: o.max_iters,
            tol: o.tol,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeltaGridConfig {
    /// Number of log-spaced δ values per ε.
    pub points: usize,
}

impl Default for DeltaGridConfig {
    fn default() -> Self {
        Self { points: 40 }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub format: Format,
    pub solver: SolverConfig,
    pub seesaw: SeesawConfig,
    pub delta_grid: DeltaGridConfig,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Parse(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Parse(format!("config {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always serializable")
    }

    pub fn validate(&self) -> Result<()> {
        let s = &self.solver;
        for (name, v) in [
            ("solver.tol_gap_abs", s.tol_gap_abs),
            ("solver.tol_gap_rel", s.tol_gap_rel),
            ("solver.tol_feas", s.tol_feas),
            ("seesaw.tol", self.seesaw.tol),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Domain(format!("{name} must be positive, got {v}")));
            }
        }
        if s.max_iter == 0 || self.seesaw.restarts == 0 || self.seesaw.max_iters == 0 {
            return Err(Error::Domain(
                "iteration and restart counts must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn solver_options(&self) -> SolverOptions {
        SolverOptions {
            tol_gap_abs: self.solver.tol_gap_abs,
            tol_gap_rel: self.solver.tol_gap_rel,
            tol_feas: self.solver.tol_feas,
            max_iter: self.solver.max_iter,
            ..SolverOptions::default()
        }
    }

    pub fn bracket_options(&self) -> BracketOptions {
        BracketOptions {
            seesaw: SeesawOptions {
                restarts: self.seesaw.restarts,
                max_iters: self.seesaw.max_iters,
                tol: self.seesaw.tol,
                seed: self.seed,
            },
            delta_points: self.delta_grid.points,
            solver: self.solver_options(),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "smoothdiv",
    version,
    about = "Smoothed quantum divergences and their bounds"
)]
pub struct Cli {
    /// TOML run configuration; flags override its values.
    #[arg(long, global = true, env = CONFIG_ENV)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub restarts: Option<usize>,
    /// Number of log-spaced δ points.
    #[arg(long = "delta-grid", global = true)]
    pub delta_grid: Option<usize>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DivergenceKind {
    Relative,
    Variance,
    Sandwiched,
    Petz,
    Dmax,
    Dmin,
    Dminf,
    Hypothesis,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FigureName {
    Fig3,
    Fig4,
    Fig5,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SetArg {
    Subnormalized,
    Normalized,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate one divergence of two operator files.
    Divergence {
        kind: DivergenceKind,
        rho: PathBuf,
        sigma: PathBuf,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        eps: Option<f64>,
    },
    /// Lower and upper bounds on the smooth F-min-relative entropy over an ε grid.
    Bracket {
        rho: Option<PathBuf>,
        sigma: Option<PathBuf>,
        /// Draw a random pair of this dimension instead of reading files.
        #[arg(long)]
        dim: Option<usize>,
        /// `a:b:k`, k evenly spaced points from a to b.
        #[arg(long = "eps-grid")]
        eps_grid: Option<String>,
        #[arg(long, conflicts_with = "eps_grid")]
        eps: Option<f64>,
    },
    /// Emit a figure dataset.
    Figure {
        name: FigureName,
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long, default_value_t = 0.3)]
        p: f64,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long = "eps-grid")]
        eps_grid: Option<String>,
        /// Number of n values for fig3.
        #[arg(long, default_value_t = 50)]
        points: usize,
    },
    /// Smooth conditional min-entropy of a bipartite operator.
    Hmin {
        rho: PathBuf,
        /// `dA,dB`.
        #[arg(long, value_parser = parse_dims)]
        dims: (usize, usize),
        #[arg(long)]
        eps: f64,
    },
    /// Smooth max-relative entropy.
    SmoothDmax {
        rho: PathBuf,
        sigma: PathBuf,
        #[arg(long)]
        eps: f64,
        #[arg(long, value_enum, default_value_t = SetArg::Subnormalized)]
        set: SetArg,
    },
    /// Configuration utilities.
    Config {
        #[command(subcommand)]
        action: ConfigAction,
    },
}

#[derive(Debug, Subcommand)]
pub enum ConfigAction {
    /// Print the effective configuration as TOML.
    Show,
}

fn parse_dims(s: &str) -> std::result::Result<(usize, usize), String> {
    let (a, b) = s
        .split_once([',', 'x'])
        .ok_or_else(|| format!("expected dA,dB, got `{s}`"))?;
    let a = a.trim().parse().map_err(|e| format!("dA: {e}"))?;
    let b = b.trim().parse().map_err(|e| format!("dB: {e}"))?;
    Ok((a, b))
}

/// `a:b:k` → `k` evenly spaced points from `a` to `b` inclusive.
pub fn parse_eps_grid(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    let [a, b, k] = parts[..] else {
        return Err(Error::Parse(format!(
            "eps grid `{s}` is not of the form a:b:k"
        )));
    };
    let num = |t: &str, what: &str| {
        t.trim()
            .parse::<f64>()
            .map_err(|e| Error::Parse(format!("eps grid {what} `{t}`: {e}")))
    };
    let (a, b) = (num(a, "start")?, num(b, "end")?);
    let k: usize = k
        .trim()
        .parse()
        .map_err(|e| Error::Parse(format!("eps grid count `{k}`: {e}")))?;
    Ok(match k {
        0 => vec![],
        1 => vec![a],
        _ => (0..k)
            .map(|i| a + (b - a) * i as f64 / (k - 1) as f64)
            .collect(),
    })
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse(_) | Error::Io(_) => 2,
        Error::SolverFailure(_)
        | Error::AllRestartsFailed(_)
        | Error::InfeasibleSmoothing
        | Error::Model(_) => 3,
        _ => 4,
    }
}

/// Fixed 12-significant-digit decimal formatting.
pub fn format_sig12(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.into();
    }
    if x == 0.0 {
        return "0.00000000000".into();
    }
    let exp = x.abs().log10().floor() as i32;
    if !(-5..=15).contains(&exp) {
        return format!("{x:.11e}");
    }
    let decimals = (11 - exp).max(0) as usize;
    format!("{x:.decimals$}")
}

#[derive(Debug, Clone)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(x) => format_sig12(*x),
            Cell::Int(n) => n.to_string(),
            Cell::Text(t) => t.clone(),
        }
    }

    fn json(&self) -> serde_json::Value {
        match self {
            Cell::Num(x) if x.is_finite() => serde_json::json!(x),
            Cell::Num(x) => serde_json::json!(format_sig12(*x)),
            Cell::Int(n) => serde_json::json!(n),
            Cell::Text(t) => serde_json::json!(t),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    fn new(columns: &[&'static str]) -> Self {
        Self {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => {
                let mut out = String::new();
                let _ = writeln!(out, "{CSV_VERSION_LINE}");
                let _ = writeln!(out, "{}", self.columns.join(","));
                for r in &self.rows {
                    let line: Vec<String> = r.iter().map(Cell::csv).collect();
                    let _ = writeln!(out, "{}", line.join(","));
                }
                out
            }
            Format::Json => {
                let rows: Vec<serde_json::Value> = self
                    .rows
                    .iter()
                    .map(|r| {
                        let obj: serde_json::Map<String, serde_json::Value> = self
                            .columns
                            .iter()
                            .zip(r)
                            .map(|(c, v)| (c.to_string(), v.json()))
                            .collect();
                        serde_json::Value::Object(obj)
                    })
                    .collect();
                let mut s = serde_json::to_string_pretty(&rows).expect("rows serialize");
                s.push('\n');
                s
            }
        }
    }
}

fn effective_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(r) = cli.restarts {
        cfg.seesaw.restarts = r;
    }
    if let Some(d) = cli.delta_grid {
        cfg.delta_grid.points = d;
    }
    if let Some(f) = cli.format {
        cfg.format = f;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn read_state(path: &Path) -> Result<DensityOperator> {
    let op = read_operator(path)?;
    let kind = if (op.trace() - 1.0).abs() <= 1e-8 {
        StateKind::Normalized
    } else {
        StateKind::Subnormalized
    };
    DensityOperator::new(op, kind)
}

fn branch(v: &DivergenceValue) -> &'static str {
    if v.support_condition_met {
        "finite"
    } else {
        "support-violation"
    }
}

fn cmd_divergence(
    kind: DivergenceKind,
    rho: &Path,
    sigma: &Path,
    alpha: Option<f64>,
    eps: Option<f64>,
    cfg: &RunConfig,
) -> Result<Table> {
    let rho = read_state(rho)?;
    let sigma: HermitianOperator = read_operator(sigma)?;
    let need_alpha =
        || alpha.ok_or_else(|| Error::Domain("--alpha is required for this divergence".into()));
    let (v, note) = match kind {
        DivergenceKind::Relative => (relative_entropy(&rho, &sigma)?, None),
        DivergenceKind::Variance => (relative_entropy_variance(&rho, &sigma)?, None),
        DivergenceKind::Sandwiched => (sandwiched_renyi(&rho, &sigma, need_alpha()?)?, None),
        DivergenceKind::Petz => (petz_renyi(&rho, &sigma, need_alpha()?)?, None),
        DivergenceKind::Dmax => (d_max(&rho, &sigma)?, None),
        DivergenceKind::Dmin => (d_min_projector(&rho, &sigma)?, None),
        DivergenceKind::Dminf => (d_min_f(&rho, &sigma)?, None),
        DivergenceKind::Hypothesis => {
            let eps =
                eps.ok_or_else(|| Error::Domain("--eps is required for hypothesis".into()))?;
            let h = hypothesis_testing(&rho, &sigma, eps, &cfg.solver_options())?;
            let v = DivergenceValue {
                bits: h.bits,
                support_condition_met: h.bits.is_finite(),
            };
            (v, Some(h.gap))
        }
    };
    let mut t = Table::new(&["kind", "bits", "branch", "gap"]);
    let name = kind
        .to_possible_value()
        .map(|p| p.get_name().to_string())
        .unwrap_or_default();
    t.rows.push(vec![
        Cell::Text(name),
        Cell::Num(v.bits),
        Cell::Text(branch(&v).into()),
        Cell::Num(note.unwrap_or(0.0)),
    ]);
    Ok(t)
}

fn bracket_table(
    rho: &DensityOperator,
    sigma: &HermitianOperator,
    grid: &[f64],
    cfg: &RunConfig,
) -> Result<Table> {
    let brackets = bracket_sweep(rho, sigma, grid, &cfg.bracket_options())?;
    let mut t = Table::new(&["eps", "lower", "upper", "delta_star", "gap"]);
    for b in brackets {
        t.rows.push(vec![
            Cell::Num(b.eps),
            Cell::Num(b.lower_bits),
            Cell::Num(b.upper_bits),
            Cell::Num(b.delta_star),
            Cell::Num(b.width()),
        ]);
    }
    Ok(t)
}

fn random_pair(dim: usize, seed: u64) -> Result<(DensityOperator, HermitianOperator)> {
    if dim == 0 {
        return Err(Error::Domain("dimension must be positive".into()));
    }
    let mut rng = seeded_rng(seed);
    let rho = random_state(&mut rng, dim);
    let sigma = random_state(&mut rng, dim);
    Ok((rho, sigma.into_op()))
}

fn eps_grid(grid: Option<&str>, eps: Option<f64>) -> Result<Vec<f64>> {
    match (grid, eps) {
        (_, Some(e)) => Ok(vec![e]),
        (Some(g), None) => parse_eps_grid(g),
        (None, None) => parse_eps_grid(DEFAULT_EPS_GRID),
    }
}

fn cmd_figure(
    name: FigureName,
    d: usize,
    p: f64,
    eps: Option<f64>,
    grid: Option<&str>,
    points: usize,
    cfg: &RunConfig,
) -> Result<Table> {
    match name {
        FigureName::Fig3 => {
            let ns = log_spaced_n(100, 1_000_000, points);
            let rows = fig3_rows(d, p, eps.unwrap_or(1e-4), &ns)?;
            let mut t = Table::new(&[
                "n",
                "lower_curve",
                "upper_curve",
                "lower_asymptote",
                "upper_asymptote",
            ]);
            for r in rows {
                t.rows.push(vec![
                    Cell::Int(r.n),
                    Cell::Num(r.lower_curve),
                    Cell::Num(r.upper_curve),
                    Cell::Num(r.lower_asymptote),
                    Cell::Num(r.upper_asymptote),
                ]);
            }
            Ok(t)
        }
        FigureName::Fig4 | FigureName::Fig5 => {
            let dim = if name == FigureName::Fig4 { 2 } else { 4 };
            let (rho, sigma) = random_pair(dim, cfg.seed)?;
            bracket_table(&rho, &sigma, &eps_grid(grid, eps)?, cfg)
        }
    }
}

fn smoothing_row(t: &mut Table, eps: f64, r: &crate::smoothing::SmoothingResult) {
    t.rows.push(vec![
        Cell::Num(eps),
        Cell::Num(r.value_bits),
        Cell::Num(r.dual_bits.unwrap_or(f64::NAN)),
        Cell::Num(r.gap.unwrap_or(f64::NAN)),
        Cell::Text(format!("{:?}", r.status).to_lowercase()),
    ]);
}

fn execute(cli: &Cli) -> Result<String> {
    let cfg = effective_config(cli)?;
    let table = match &cli.command {
        Command::Config {
            action: ConfigAction::Show,
        } => return Ok(cfg.to_toml()),
        Command::Divergence {
            kind,
            rho,
            sigma,
            alpha,
            eps,
        } => cmd_divergence(*kind, rho, sigma, *alpha, *eps, &cfg)?,
        Command::Bracket {
            rho,
            sigma,
            dim,
            eps_grid: grid,
            eps,
        } => {
            let (r, s) = match (rho, sigma, dim) {
                (Some(r), Some(s), None) => (read_state(r)?, read_operator(s)?),
                (None, None, Some(d)) => random_pair(*d, cfg.seed)?,
                _ => {
                    return Err(Error::Parse(
                        "bracket needs either two operator files or --dim".into(),
                    ))
                }
            };
            bracket_table(&r, &s, &eps_grid(grid.as_deref(), *eps)?, &cfg)?
        }
        Command::Figure {
            name,
            d,
            p,
            eps,
            eps_grid: grid,
            points,
        } => cmd_figure(*name, *d, *p, *eps, grid.as_deref(), *points, &cfg)?,
        Command::Hmin { rho, dims, eps } => {
            let label = BipartiteLabel::new(dims.0, dims.1)?;
            let r = smooth_hmin(&read_state(rho)?, label, *eps, &cfg.solver_options())?;
            let mut t = Table::new(&["eps", "primal_bits", "dual_bits", "gap", "status"]);
            smoothing_row(&mut t, *eps, &r);
            t
        }
        Command::SmoothDmax {
            rho,
            sigma,
            eps,
            set,
        } => {
            let set = match set {
                SetArg::Subnormalized => SmoothingSet::Subnormalized,
                SetArg::Normalized => SmoothingSet::Normalized,
            };
            let r = smooth_dmax(
                &read_state(rho)?,
                &read_operator(sigma)?,
                *eps,
                set,
                &cfg.solver_options(),
            )?;
            let mut t = Table::new(&["eps", "primal_bits", "dual_bits", "gap", "status"]);
            smoothing_row(&mut t, *eps, &r);
            t
        }
    };
    Ok(table.render(cfg.format))
}

/// Parse `args`, run the command and return the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                out.write_all(text.as_bytes())
            } else {
                err.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match execute(&cli) {
        Ok(text) => {
            let _ = out.write_all(text.as_bytes());
            0
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig12_formatting() {
        assert_eq!(format_sig12(0.390159695283), "0.390159695283");
        assert_eq!(format_sig12(1234.56789012345), "1234.56789012");
        assert_eq!(format_sig12(-1.0), "-1.00000000000");
        assert_eq!(format_sig12(0.0), "0.00000000000");
        assert_eq!(format_sig12(f64::INFINITY), "inf");
        assert_eq!(format_sig12(1.5e-7), "1.50000000000e-7");
    }

    #[test]
    fn eps_grid_parsing() {
        let g = parse_eps_grid("0.05:0.5:10").unwrap();
        assert_eq!(g.len(), 10);
        assert!((g[9] - 0.5).abs() < 1e-15);
        assert!(parse_eps_grid("0.1:0.2:0").unwrap().is_empty());
        assert!(matches!(parse_eps_grid("0.1:0.2"), Err(Error::Parse(_))));
        assert!(matches!(parse_eps_grid("a:0.2:3"), Err(Error::Parse(_))));
    }

    #[test]
    fn config_round_trip() {
        let cfg = RunConfig::default();
        let back = RunConfig::from_toml(&cfg.to_toml()).unwrap();
        assert_eq!(cfg, back);
        let partial = RunConfig::from_toml("seed = 7\n[seesaw]\nrestarts = 3\n").unwrap();
        assert_eq!(partial.seed, 7);
        assert_eq!(partial.seesaw.restarts, 3);
        assert_eq!(partial.seesaw.max_iters, 50);
        assert!(matches!(
            RunConfig::from_toml("seed = \"x\""),
            Err(Error::Parse(_))
        ));
        assert!(matches!(
            RunConfig::from_toml("[solver]\ntol_feas = 0.0\n"),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::Parse("x".into())), 2);
        assert_eq!(exit_code(&Error::SolverFailure("x".into())), 3);
        assert_eq!(exit_code(&Error::EmptyGrid), 4);
        assert_eq!(exit_code(&Error::Domain("x".into())), 4);
    }
}
