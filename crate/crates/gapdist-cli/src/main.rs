//! Command-line front end: enumeration, gap statistics, the limiting
//! distribution, comparison, rendering, and group checks.

// `!(b > a)` rejects NaN inputs along with bad orderings.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod csvio;
mod render;

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use gapdist::config::{BuiltinKind, ConfigError, FordConfig};
use gapdist::enumerate::{
    enumerate_tangencies, EnumerateError, EnumerateParams,
};
use gapdist::geom::MobiusMap;
use gapdist::groups::{good_census, normality_report, GroupsError};
use gapdist::stats::{conformal_pushforward, gap_cdf, ks_distance, StatsError};
use gapdist::theory::{
    build_regions, density, limiting_f, limiting_f_mc, pair_classes, TheoryError,
};
use gapdist::Interval;

#[derive(Parser)]
#[command(
    name = "gapdist",
    version,
    about = "Circle packings generated by reflections: tangency enumeration and gap distributions"
)]
struct Cli {
    /// Worker threads (1 is the reproducibility reference).
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    /// Seed for Monte-Carlo cross-checks.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Show or validate a configuration.
    Config {
        #[command(subcommand)]
        action: ConfigAction,
    },
    /// Enumerate tangencies with curvature up to the bound.
    Enumerate {
        #[command(flatten)]
        config: ConfigArg,
        #[arg(long = "max-curvature", short = 'T')]
        max_curvature: f64,
        /// Half-open interval `a:b` on the base line (default one period).
        #[arg(long)]
        interval: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Empirical gap distribution of an enumeration.
    Gaps {
        #[command(flatten)]
        config: ConfigArg,
        #[arg(long = "max-curvature", short = 'T')]
        max_curvature: f64,
        #[arg(long)]
        interval: Option<String>,
        /// Sample grid `a:b:n`.
        #[arg(long, default_value = "0:6:600")]
        grid: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Limiting gap distribution F(s).
    Theory {
        #[command(flatten)]
        config: ConfigArg,
        #[arg(long, default_value = "0:6:600")]
        grid: String,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long)]
        out: PathBuf,
        /// Dump the region constraint lists as JSON.
        #[arg(long)]
        dump_regions: Option<PathBuf>,
        /// Gap size at which regions are dumped.
        #[arg(long, default_value_t = 1.0)]
        dump_s: f64,
        /// Cross-check F at `--mc-s` with this many Monte-Carlo samples per
        /// region (seeded by `--seed`).
        #[arg(long)]
        mc_check: Option<u64>,
        #[arg(long, default_value_t = 2.0)]
        mc_s: f64,
    },
    /// Density F'(s) of the limiting distribution.
    Density {
        #[command(flatten)]
        config: ConfigArg,
        #[arg(long, default_value = "0:6:600")]
        grid: String,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Kolmogorov-Smirnov distance between two sampled distributions.
    Compare {
        #[arg(long)]
        empirical: PathBuf,
        #[arg(long)]
        theory: PathBuf,
        /// Optional merged output `s,F_empirical,F_theory`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render one period strip of the packing as SVG.
    Render {
        #[command(flatten)]
        config: ConfigArg,
        #[arg(long = "max-curvature", short = 'T')]
        max_curvature: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Verify the published conjugation and word identities.
    GroupsCheck {
        #[command(flatten)]
        config: ConfigArg,
        #[arg(long)]
        json: bool,
    },
    /// Lattice-point census in Iwasawa coordinates (slow diagnostic).
    GoodCensus {
        #[command(flatten)]
        config: ConfigArg,
        #[arg(long = "max-curvature", short = 'T', default_value_t = 50.0)]
        max_curvature: f64,
        #[arg(long, default_value = "0:1")]
        x_interval: String,
        /// Angle window inside `0:3.141592653589793`.
        #[arg(long)]
        theta_interval: Option<String>,
        #[arg(long, default_value_t = 10)]
        max_word_len: u32,
        #[arg(long)]
        json: bool,
    },
    /// Transport the packing by a Möbius map and measure gaps on the image.
    Transfer {
        #[command(flatten)]
        config: ConfigArg,
        #[arg(long = "max-curvature", short = 'T')]
        max_curvature: f64,
        /// Real matrix entries `a,b,c,d` of the map.
        #[arg(long)]
        mobius: String,
        /// Arc `a:b` on the image base (parameters on M(R)).
        #[arg(long)]
        image_arc: String,
        #[arg(long, default_value_t = 0.25)]
        margin: f64,
        #[arg(long, default_value = "0:6:600")]
        grid: String,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum ConfigAction {
    /// Print the configuration and its constants.
    Show {
        #[command(flatten)]
        config: ConfigArg,
    },
    /// Check the structural invariants of a configuration file.
    Validate { path: PathBuf },
}

#[derive(Args)]
struct ConfigArg {
    /// `classical`, `ap3`, `ap9`, or a path to a JSON file.
    #[arg(long, default_value = "classical")]
    config: String,
}

enum CliError {
    Validation(String),
    Runtime(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Validation(m) | CliError::Runtime(m) => m,
        }
    }
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Runtime(format!("{e:#}"))
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        match e {
            ConfigError::Invalid(_) | ConfigError::InvalidPair(_, _) | ConfigError::Json(_) => {
                CliError::Validation(e.to_string())
            }
            ConfigError::Geom(_) => CliError::Runtime(e.to_string()),
        }
    }
}

impl From<EnumerateError> for CliError {
    fn from(e: EnumerateError) -> Self {
        match e {
            EnumerateError::Config(c) => c.into(),
            EnumerateError::EmptyInterval | EnumerateError::BadBound => {
                CliError::Validation(e.to_string())
            }
            EnumerateError::BudgetExceeded(_) => CliError::Runtime(e.to_string()),
        }
    }
}

impl From<TheoryError> for CliError {
    fn from(e: TheoryError) -> Self {
        match e {
            TheoryError::Config(c) => c.into(),
            TheoryError::InvalidPair(_, _) => CliError::Validation(e.to_string()),
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

impl From<StatsError> for CliError {
    fn from(e: StatsError) -> Self {
        match e {
            StatsError::Enumerate(inner) => inner.into(),
            StatsError::TooFewPoints
            | StatsError::GridMismatch
            | StatsError::ArcThroughInfinity => CliError::Validation(e.to_string()),
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

impl From<GroupsError> for CliError {
    fn from(e: GroupsError) -> Self {
        match e {
            GroupsError::InvalidQ | GroupsError::BallNotSaturated(_) => {
                CliError::Validation(e.to_string())
            }
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

fn parse_interval(s: &str) -> Result<Interval<f64>, CliError> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 2 {
        return Err(CliError::Validation(format!(
            "interval must be `a:b`, got `{s}`"
        )));
    }
    let a: f64 = parts[0]
        .parse()
        .map_err(|e| CliError::Validation(format!("interval `{s}`: {e}")))?;
    let b: f64 = parts[1]
        .parse()
        .map_err(|e| CliError::Validation(format!("interval `{s}`: {e}")))?;
    if !(b > a) {
        return Err(CliError::Validation(format!(
            "interval `{s}` must have a < b"
        )));
    }
    Ok(Interval::new(a, b))
}

fn parse_grid(s: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(CliError::Validation(format!(
            "grid must be `a:b:n`, got `{s}`"
        )));
    }
    let a: f64 = parts[0]
        .parse()
        .map_err(|e| CliError::Validation(format!("grid `{s}`: {e}")))?;
    let b: f64 = parts[1]
        .parse()
        .map_err(|e| CliError::Validation(format!("grid `{s}`: {e}")))?;
    let n: usize = parts[2]
        .parse()
        .map_err(|e| CliError::Validation(format!("grid `{s}`: {e}")))?;
    if n < 2 || !(b > a) {
        return Err(CliError::Validation(format!(
            "grid `{s}` needs a < b and at least two points"
        )));
    }
    Ok((0..n)
        .map(|k| a + (b - a) * k as f64 / (n - 1) as f64)
        .collect())
}

fn parse_mobius(s: &str) -> Result<MobiusMap<f64>, CliError> {
    let vals: Result<Vec<f64>, _> = s.split(',').map(|x| x.trim().parse::<f64>()).collect();
    let vals = vals.map_err(|e| CliError::Validation(format!("mobius `{s}`: {e}")))?;
    if vals.len() != 4 {
        return Err(CliError::Validation(format!(
            "mobius must be `a,b,c,d`, got `{s}`"
        )));
    }
    MobiusMap::from_real(vals[0], vals[1], vals[2], vals[3])
        .map_err(|e| CliError::Validation(format!("mobius `{s}`: {e}")))
}

fn load_config(spec: &str) -> Result<FordConfig<f64>, CliError> {
    if let Ok(kind) = BuiltinKind::from_str(spec) {
        return Ok(FordConfig::builtin(kind));
    }
    let text = std::fs::read_to_string(spec)
        .map_err(|e| CliError::Validation(format!("config `{spec}`: {e}")))?;
    Ok(FordConfig::from_json_str(&text)?)
}

fn enum_params(threads: usize) -> EnumerateParams {
    EnumerateParams {
        parallel: threads > 1,
        ..Default::default()
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let threads = cli.threads.max(1);
    let params = enum_params(threads);
    match cli.cmd {
        Cmd::Config { action } => match action {
            ConfigAction::Show { config } => {
                let cfg = load_config(&config.config)?;
                println!("{}", cfg.to_json_string()?);
                let violations = cfg.validate(gapdist::default_tol());
                if violations.is_empty() {
                    let k = cfg.constants()?;
                    println!("h         = {}", cfg.h());
                    println!("period t  = {:.17}", cfg.period());
                    for (i, d) in k.d_parts.iter().enumerate() {
                        println!("D_{}       = {:.17}", i + 1, d);
                    }
                    println!("D         = {:.17}", k.d);
                    println!("c         = {:.17}", k.c);
                    println!("area      = {:.17}", k.area_gamma);
                    println!("delta     = {:.17}", k.delta);
                } else {
                    for v in &violations {
                        println!("violation: {v}");
                    }
                    return Err(CliError::Validation("configuration invalid".into()));
                }
            }
            ConfigAction::Validate { path } => {
                let cfg = load_config(&path.display().to_string())?;
                let violations = cfg.validate(gapdist::default_tol());
                if violations.is_empty() {
                    println!("OK");
                } else {
                    for v in &violations {
                        println!("violation: {v}");
                    }
                    return Err(CliError::Validation(format!(
                        "{} violation(s)",
                        violations.len()
                    )));
                }
            }
        },
        Cmd::Enumerate {
            config,
            max_curvature,
            interval,
            out,
        } => {
            let cfg = load_config(&config.config)?;
            let iv = match interval {
                Some(s) => parse_interval(&s)?,
                None => Interval::new(0.0, cfg.period()),
            };
            let pts = enumerate_tangencies(&cfg, max_curvature, iv, &params)?;
            let rows: Vec<Vec<f64>> = pts.iter().map(|t| vec![t.alpha, t.kappa]).collect();
            csvio::write_csv(&out, "alpha,kappa", &rows)?;
            let (count, ratio) = (
                pts.len(),
                pts.len() as f64 / (iv.len() * cfg.density_constant() * max_curvature),
            );
            println!("count = {count}");
            println!("count / (l(I)·c·T) = {ratio:.6}");
        }
        Cmd::Gaps {
            config,
            max_curvature,
            interval,
            grid,
            out,
        } => {
            let cfg = load_config(&config.config)?;
            let iv = match interval {
                Some(s) => parse_interval(&s)?,
                None => Interval::new(0.0, cfg.period()),
            };
            let g = parse_grid(&grid)?;
            let pts = enumerate_tangencies(&cfg, max_curvature, iv, &params)?;
            let cdf = gap_cdf(&pts, iv, &g)?;
            let rows: Vec<Vec<f64>> = g
                .iter()
                .zip(&cdf.values)
                .map(|(s, v)| vec![*s, *v])
                .collect();
            csvio::write_csv(&out, "s,F_empirical", &rows)?;
            println!("tangencies = {}", cdf.n);
        }
        Cmd::Theory {
            config,
            grid,
            tol,
            out,
            dump_regions,
            dump_s,
            mc_check,
            mc_s,
        } => {
            let cfg = load_config(&config.config)?;
            let g = parse_grid(&grid)?;
            let f = limiting_f(&cfg, &g, tol)?;
            let rows: Vec<Vec<f64>> = g.iter().zip(&f).map(|(s, v)| vec![*s, *v]).collect();
            csvio::write_csv(&out, "s,F", &rows)?;
            if let Some(path) = dump_regions {
                let mut dump = Vec::new();
                for pc in pair_classes(&cfg) {
                    let regions = build_regions(&cfg, pc.i, pc.j, dump_s)?;
                    for (branch, region) in regions.iter().enumerate() {
                        dump.push(serde_json::json!({
                            "i": pc.i,
                            "j": pc.j,
                            "weight": pc.weight,
                            "branch": branch,
                            "s": dump_s,
                            "region": region,
                        }));
                    }
                }
                let text = serde_json::to_string_pretty(&dump)
                    .map_err(|e| CliError::Runtime(e.to_string()))?;
                std::fs::write(&path, text)
                    .map_err(|e| CliError::Runtime(format!("writing {}: {e}", path.display())))?;
            }
            if let Some(samples) = mc_check {
                let mc = limiting_f_mc(&cfg, mc_s, samples, cli.seed)?;
                let exact = limiting_f(&cfg, &[mc_s], tol)?[0];
                println!("F({mc_s}) quadrature = {exact:.8}");
                println!("F({mc_s}) monte-carlo = {mc:.8} (seed {})", cli.seed);
            }
        }
        Cmd::Density {
            config,
            grid,
            tol,
            out,
        } => {
            let cfg = load_config(&config.config)?;
            let g = parse_grid(&grid)?;
            let dens = density(&cfg, &g, tol)?;
            let rows: Vec<Vec<f64>> = g.iter().zip(&dens).map(|(s, v)| vec![*s, *v]).collect();
            csvio::write_csv(&out, "s,density", &rows)?;
        }
        Cmd::Compare {
            empirical,
            theory,
            out,
        } => {
            let (_, emp) = csvio::read_csv(&empirical)?;
            let (_, the) = csvio::read_csv(&theory)?;
            let col = |rows: &[Vec<f64>], k: usize| -> Vec<f64> {
                rows.iter().map(|r| r[k]).collect()
            };
            if emp.iter().any(|r| r.len() < 2) || the.iter().any(|r| r.len() < 2) {
                return Err(CliError::Validation(
                    "compare inputs need two numeric columns".into(),
                ));
            }
            let (ge, ve) = (col(&emp, 0), col(&emp, 1));
            let (gt, vt) = (col(&the, 0), col(&the, 1));
            let ks = ks_distance(&ge, &ve, &gt, &vt)?;
            println!("KS = {ks:.8}");
            if let Some(path) = out {
                let rows: Vec<Vec<f64>> = ge
                    .iter()
                    .zip(ve.iter().zip(&vt))
                    .map(|(s, (a, b))| vec![*s, *a, *b])
                    .collect();
                csvio::write_csv(&path, "s,F_empirical,F_theory", &rows)?;
            }
        }
        Cmd::Render {
            config,
            max_curvature,
            out,
        } => {
            let cfg = load_config(&config.config)?;
            render::render_svg(&cfg, max_curvature, &params, &out)?;
        }
        Cmd::GroupsCheck { config, json } => {
            let kind = BuiltinKind::from_str(&config.config).map_err(CliError::Validation)?;
            let report = normality_report::<f64>(kind);
            if json {
                let checks: Vec<_> = report
                    .checks
                    .iter()
                    .map(|c| {
                        serde_json::json!({
                            "name": c.name,
                            "residual": c.residual,
                            "ok": c.ok,
                        })
                    })
                    .collect();
                println!(
                    "{}",
                    serde_json::json!({"config": kind.to_string(), "checks": checks})
                );
            } else {
                for c in &report.checks {
                    println!(
                        "{} {} (residual {:.3e})",
                        if c.ok { "ok  " } else { "FAIL" },
                        c.name,
                        c.residual
                    );
                }
            }
            if !report.all_ok() {
                return Err(CliError::Validation("identity checks failed".into()));
            }
        }
        Cmd::GoodCensus {
            config,
            max_curvature,
            x_interval,
            theta_interval,
            max_word_len,
            json,
        } => {
            let kind = BuiltinKind::from_str(&config.config).map_err(CliError::Validation)?;
            let xi = parse_interval(&x_interval)?;
            let ti = match theta_interval {
                Some(s) => parse_interval(&s)?,
                None => Interval::new(0.0, std::f64::consts::PI),
            };
            let res = good_census::<f64>(kind, max_curvature, xi, ti, max_word_len)?;
            if json {
                println!(
                    "{}",
                    serde_json::json!({
                        "count": res.count,
                        "predicted": res.predicted,
                        "ratio": res.ratio,
                        "ball_size": res.ball_size,
                        "max_word_len": res.max_word_len,
                    })
                );
            } else {
                println!("count      = {}", res.count);
                println!("predicted  = {:.4}", res.predicted);
                println!("ratio      = {:.4}", res.ratio);
                println!("ball size  = {}", res.ball_size);
            }
        }
        Cmd::Transfer {
            config,
            max_curvature,
            mobius,
            image_arc,
            margin,
            grid,
            tol,
            out,
        } => {
            let cfg = load_config(&config.config)?;
            let m = parse_mobius(&mobius)?;
            let arc = parse_interval(&image_arc)?;
            let g = parse_grid(&grid)?;
            let pts = conformal_pushforward(&cfg, &m, max_curvature, arc, margin, &params)?;
            let cdf = gap_cdf(&pts, arc, &g)?;
            let rows: Vec<Vec<f64>> = g
                .iter()
                .zip(&cdf.values)
                .map(|(s, v)| vec![*s, *v])
                .collect();
            csvio::write_csv(&out, "s,F_empirical", &rows)?;
            let f = limiting_f(&cfg, &g, tol)?;
            let ks = ks_distance(&g, &cdf.values, &g, &f)?;
            println!("tangencies = {}", cdf.n);
            println!("KS(transfer, theory) = {ks:.8}");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };
    let threads = cli.threads.max(1);
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match pool.install(|| run(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
