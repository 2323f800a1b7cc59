//! Command-line front end: `map-conv`, `map-irs`, `sweep` and `compare`.
//!
//! Without `--candidates` or `--irs`, `sweep` and `compare` search a grid of
//! IRS positions covering the micro cell at the configured panel height,
//! spaced `--step` meters apart.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::coverage::{sinr_map_conventional, sinr_map_irs};
use crate::error::{config, Error, Result};
use crate::linkbudget::Position3D;
use crate::placement::{
    compare_models, optimize_placement, write_ranked_csv, CandidateSpec, Objective,
};
use crate::scenario::{load_scenario, Scenario};

/// Caps the rayon pool size; 0 or unset uses every core.
pub const THREADS_ENV: &str = "IRS_PLANNER_THREADS";

pub const DEFAULT_SWEEP_STEP: f64 = 10.0;

#[derive(Debug, Parser)]
#[command(
    name = "irs-planner",
    version,
    about = "SINR coverage maps and IRS placement search",
    arg_required_else_help = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Conventional (direct-path) SINR map as CSV.
    MapConv(Options),
    /// IRS-assisted SINR map as CSV.
    MapIrs(Options),
    /// Rank candidate IRS positions by cell-edge SINR.
    Sweep(Options),
    /// Compare the conventional model against the best IRS placement.
    Compare(Options),
}

#[derive(Debug, Args)]
struct Options {
    /// Scenario config file; defaults apply when omitted.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output file; stdout when omitted.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    #[arg(long, value_parser = ["min", "mean"])]
    objective: Option<String>,
    /// Grid spacing in meters.
    #[arg(long, value_name = "METERS", allow_hyphen_values = true)]
    resolution: Option<f64>,
    /// CSV of candidate IRS positions with an `x_m,y_m,z_m` header.
    #[arg(long, value_name = "PATH")]
    candidates: Option<PathBuf>,
    /// Micro BS position.
    #[arg(long, value_name = "X,Y,Z", value_parser = parse_triple, allow_hyphen_values = true)]
    bs: Option<Position3D>,
    /// IRS position (a single candidate for `sweep`/`compare`).
    #[arg(long, value_name = "X,Y,Z", value_parser = parse_triple, allow_hyphen_values = true)]
    irs: Option<Position3D>,
    /// Candidate spacing for the default grid sweep.
    #[arg(long, value_name = "METERS", default_value_t = DEFAULT_SWEEP_STEP, allow_hyphen_values = true)]
    step: f64,
}

fn parse_triple(s: &str) -> std::result::Result<Position3D, String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("`{p}`: {e}")))
        .collect::<std::result::Result<_, _>>()?;
    match parts[..] {
        [x, y, z] if x.is_finite() && y.is_finite() && z.is_finite() => {
            Ok(Position3D::new(x, y, z))
        }
        _ => Err(format!("expected three finite numbers X,Y,Z, got `{s}`")),
    }
}

/// Reads `x_m,y_m,z_m` rows; the header line is mandatory.
pub fn parse_candidates(text: &str) -> Result<Vec<Position3D>> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, header)) if header.split(',').map(str::trim).eq(["x_m", "y_m", "z_m"]) => {}
        Some((idx, header)) => {
            return Err(Error::Parse {
                line: idx + 1,
                message: format!("expected header `x_m,y_m,z_m`, got `{header}`"),
            })
        }
        None => return config("candidate file is empty"),
    }
    lines
        .map(|(idx, line)| {
            parse_triple(line).map_err(|message| Error::Parse {
                line: idx + 1,
                message,
            })
        })
        .collect()
}

fn build_scenario(opts: &Options) -> Result<Scenario> {
    let mut scenario = match &opts.config {
        Some(path) => load_scenario(path)?,
        None => Scenario::default(),
    };
    if let Some(objective) = &opts.objective {
        scenario.objective = objective.parse::<Objective>()?;
    }
    if let Some(r) = opts.resolution {
        scenario.grid_resolution = r;
    }
    if let Some(bs) = opts.bs {
        scenario.micro_bs_position = bs;
    }
    if let Some(irs) = opts.irs {
        scenario.panel.position = irs;
    }
    scenario.validate()?;
    Ok(scenario)
}

fn candidate_spec(opts: &Options, scenario: &Scenario) -> Result<CandidateSpec> {
    if let Some(path) = &opts.candidates {
        if opts.irs.is_some() {
            return config("--candidates and --irs are mutually exclusive");
        }
        return Ok(CandidateSpec::ExplicitList(parse_candidates(
            &std::fs::read_to_string(path)?,
        )?));
    }
    if let Some(irs) = opts.irs {
        return Ok(CandidateSpec::ExplicitList(vec![irs]));
    }
    Ok(CandidateSpec::GridSweep {
        extent: scenario.micro_extent,
        step: opts.step,
        height: scenario.panel.position.z,
    })
}

fn execute(command: &Command) -> Result<(Vec<u8>, Option<PathBuf>)> {
    let mut buf = Vec::new();
    let opts = match command {
        Command::MapConv(o) | Command::MapIrs(o) | Command::Sweep(o) | Command::Compare(o) => o,
    };
    let scenario = build_scenario(opts)?;
    match command {
        Command::MapConv(_) => sinr_map_conventional(&scenario)?.write_csv(&mut buf)?,
        Command::MapIrs(_) => sinr_map_irs(&scenario)?.write_csv(&mut buf)?,
        Command::Sweep(_) => {
            let ranked = optimize_placement(
                &scenario,
                &candidate_spec(opts, &scenario)?,
                scenario.objective,
            )?;
            write_ranked_csv(&ranked, &mut buf)?;
        }
        Command::Compare(_) => {
            let ranked = optimize_placement(
                &scenario,
                &candidate_spec(opts, &scenario)?,
                scenario.objective,
            )?;
            compare_models(&scenario, &ranked[0])?.write_csv(&mut buf)?;
        }
    }
    Ok((buf, opts.out.clone()))
}

fn thread_pool() -> Result<rayon::ThreadPool> {
    let threads = match std::env::var(THREADS_ENV) {
        Ok(raw) if !raw.trim().is_empty() => raw.trim().parse::<usize>().map_err(|_| {
            Error::Config(format!(
                "{THREADS_ENV} must be a non-negative integer, got `{raw}`"
            ))
        })?,
        _ => 0,
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))
}

/// Runs the CLI against explicit output streams and returns the exit status:
/// 0 on success, 1 on runtime errors, 2 on usage errors.
pub fn run_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            let _ = if code == 0 {
                stdout.write_all(text.as_bytes())
            } else {
                stderr.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let outcome = thread_pool().and_then(|pool| pool.install(|| execute(&cli.command)));
    let written = outcome.and_then(|(bytes, out)| match out {
        Some(path) => std::fs::write(path, bytes).map_err(Error::from),
        None => stdout.write_all(&bytes).map_err(Error::from),
    });
    match written {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            1
        }
    }
}

pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with(
        args,
        &mut std::io::stdout().lock(),
        &mut std::io::stderr().lock(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triples() {
        assert_eq!(
            parse_triple("100, 100,6").unwrap(),
            Position3D::new(100.0, 100.0, 6.0)
        );
        assert!(parse_triple("1,2").is_err());
        assert!(parse_triple("1,2,x").is_err());
        assert!(parse_triple("1,2,inf").is_err());
    }

    #[test]
    fn candidate_files() {
        let got = parse_candidates("x_m,y_m,z_m\n0,200,5\n\n100,100,6\n").unwrap();
        assert_eq!(
            got,
            vec![
                Position3D::new(0.0, 200.0, 5.0),
                Position3D::new(100.0, 100.0, 6.0)
            ]
        );
        assert!(matches!(
            parse_candidates("0,200,5\n"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_candidates("x_m,y_m,z_m\n0,200\n"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(parse_candidates("").is_err());
    }

    #[test]
    fn usage_errors_exit_2() {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        assert_eq!(run_with(["irs-planner"], &mut out, &mut err), 2);
        assert!(!err.is_empty() || !out.is_empty());
        assert_eq!(
            run_with(["irs-planner", "frobnicate"], &mut out, &mut err),
            2
        );
        assert_eq!(
            run_with(["irs-planner", "sweep", "--bogus"], &mut out, &mut err),
            2
        );
        assert_eq!(
            run_with(
                ["irs-planner", "sweep", "--objective", "max"],
                &mut out,
                &mut err
            ),
            2
        );
    }

    #[test]
    fn runtime_errors_exit_1() {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run_with(
            [
                "irs-planner",
                "map-conv",
                "--config",
                "/nonexistent/scenario.conf",
            ],
            &mut out,
            &mut err,
        );
        assert_eq!(code, 1);
        assert!(String::from_utf8(err).unwrap().starts_with("error:"));
        let (mut out, mut err) = (Vec::new(), Vec::new());
        assert_eq!(
            run_with(
                ["irs-planner", "map-irs", "--resolution", "-1"],
                &mut out,
                &mut err
            ),
            1
        );
        assert!(out.is_empty());
        assert_eq!(
            run_with(
                [
                    "irs-planner",
                    "sweep",
                    "--irs",
                    "-20,0,5",
                    "--bs",
                    "-20,0,5"
                ],
                &mut out,
                &mut err
            ),
            1
        );
    }
}
