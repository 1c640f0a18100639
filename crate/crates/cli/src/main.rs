//! `parade`: run herd scenarios and write their trajectories, plots and
//! theorem certificates.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use parade_core::export::{certificates_document, events_document, export_csv, report_document};
use parade_core::svg::render_svg;
use parade_core::verify::certify_trajectory;
use parade_core::{
    builtin, builtin_scenarios, parse_scenario, simulate, EngineError, HomecomingReport, PlotStyle,
    ScenarioConfig, ScenarioError, Trajectory,
};
use rayon::prelude::*;

const EXIT_HELP: &str = "\
Exit status:
  0  success
  2  invalid command line
  3  scenario file missing or unreadable
  4  malformed or invalid scenario
  5  engine diagnostic (event localization failed, too many events, ...)
  6  output could not be written

A SCENARIO is a TOML file or the name of a builtin (see list-builtins).
Output goes to --out, else to $PARADE_OUT/<scenario name>, else to
out/<scenario name>.";

#[derive(Parser)]
#[command(name = "parade", version, about = "Simulate herds of penguins walking home", after_help = EXIT_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write trajectory.csv, events.txt, report.txt and plot.svg.
    #[command(after_help = EXIT_HELP)]
    Simulate {
        scenario: String,
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
    },
    /// Run a scenario and write theorem certificates to certificates.txt.
    #[command(after_help = EXIT_HELP)]
    Verify {
        scenario: String,
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
    },
    /// Run seeded random variants of a scenario and write summary.csv plus
    /// one report per seed.
    #[command(after_help = EXIT_HELP)]
    Sweep {
        scenario: String,
        /// Seed range, `A..B` (B excluded) or `A..=B`.
        #[arg(long, value_parser = parse_seeds)]
        seeds: SeedRange,
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
    },
    /// Print the names of the builtin scenarios.
    ListBuiltins,
}

#[derive(Clone, Copy, Debug)]
struct SeedRange {
    start: u64,
    end: u64,
}

fn parse_seeds(text: &str) -> Result<SeedRange, String> {
    let (a, b, inclusive) = if let Some((a, b)) = text.split_once("..=") {
        (a, b, true)
    } else if let Some((a, b)) = text.split_once("..") {
        (a, b, false)
    } else {
        return Err(format!("expected A..B or A..=B, got `{text}`"));
    };
    let start: u64 = a.trim().parse().map_err(|e| format!("seed `{a}`: {e}"))?;
    let last: u64 = b.trim().parse().map_err(|e| format!("seed `{b}`: {e}"))?;
    let end = if inclusive {
        last.checked_add(1).ok_or("seed range overflows")?
    } else {
        last
    };
    if end <= start {
        return Err(format!("empty seed range `{text}`"));
    }
    Ok(SeedRange { start, end })
}

enum Failure {
    Missing(anyhow::Error),
    Scenario(anyhow::Error),
    Engine(anyhow::Error),
    Output(anyhow::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Missing(_) => 3,
            Failure::Scenario(_) => 4,
            Failure::Engine(_) => 5,
            Failure::Output(_) => 6,
        }
    }

    fn error(&self) -> &anyhow::Error {
        match self {
            Failure::Missing(e)
            | Failure::Scenario(e)
            | Failure::Engine(e)
            | Failure::Output(e) => e,
        }
    }
}

fn load(arg: &str) -> Result<ScenarioConfig, Failure> {
    let path = Path::new(arg);
    if !path.exists() {
        return match builtin(arg) {
            Ok(config) => Ok(config),
            Err(ScenarioError::UnknownBuiltin(_)) => Err(Failure::Missing(anyhow::anyhow!(
                "{arg}: no such file or builtin scenario"
            ))),
            Err(e) => Err(Failure::Scenario(e.into())),
        };
    }
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(Failure::Missing)?;
    parse_scenario(&text)
        .with_context(|| format!("in {}", path.display()))
        .map_err(Failure::Scenario)
}

fn out_dir(out: Option<PathBuf>, config: &ScenarioConfig) -> PathBuf {
    out.unwrap_or_else(|| {
        let base = std::env::var_os("PARADE_OUT")
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from("out"));
        base.join(&config.name)
    })
}

fn run(config: &ScenarioConfig) -> Result<Trajectory, EngineError> {
    simulate(&config.initial_state(), &config.params, &config.settings)
}

fn write_files(dir: &Path, files: &[(&str, String)]) -> Result<(), Failure> {
    fs::create_dir_all(dir)
        .with_context(|| format!("creating {}", dir.display()))
        .map_err(Failure::Output)?;
    for (name, body) in files {
        let path = dir.join(name);
        fs::write(&path, body)
            .with_context(|| format!("writing {}", path.display()))
            .map_err(Failure::Output)?;
    }
    Ok(())
}

fn engine_failure(config: &ScenarioConfig, err: EngineError) -> Failure {
    Failure::Engine(anyhow::Error::new(err).context(format!("simulating {}", config.name)))
}

fn cmd_simulate(scenario: &str, out: Option<PathBuf>) -> Result<(), Failure> {
    let config = load(scenario)?;
    let traj = run(&config).map_err(|e| engine_failure(&config, e))?;
    let report = HomecomingReport::new(&traj);
    let dir = out_dir(out, &config);
    let shoreline = match config.params.environment {
        parade_core::Environment::Waves { shoreline, .. } => shoreline,
        parade_core::Environment::Neutral => 0.0,
    };
    let style = PlotStyle {
        shoreline,
        ..PlotStyle::default()
    };
    write_files(
        &dir,
        &[
            ("trajectory.csv", export_csv(&traj)),
            ("events.txt", events_document(&traj)),
            ("report.txt", report_document(&report)),
            ("plot.svg", render_svg(&traj, &style)),
        ],
    )?;
    println!(
        "{}: {}/{} home at t = {}, {} merges, {} groups left; wrote {}",
        config.name,
        report.home_at_end,
        report.total,
        report.end_time,
        traj.merge_count(),
        traj.final_state.len(),
        dir.display()
    );
    Ok(())
}

fn cmd_verify(scenario: &str, out: Option<PathBuf>) -> Result<(), Failure> {
    let config = load(scenario)?;
    let traj = run(&config).map_err(|e| engine_failure(&config, e))?;
    let certificates = certify_trajectory(&traj, &config.params);
    let dir = out_dir(out, &config);
    write_files(
        &dir,
        &[("certificates.txt", certificates_document(&certificates))],
    )?;

    let applicable = certificates.iter().filter(|c| c.applicable).count();
    let witnessed = certificates.iter().filter(|c| c.witnessed).count();
    let counterexamples: Vec<_> = certificates
        .iter()
        .filter(|c| c.is_counterexample())
        .collect();
    println!(
        "{}: {} certificates, {applicable} applicable, {witnessed} witnessed, {} counterexamples; wrote {}",
        config.name,
        certificates.len(),
        counterexamples.len(),
        dir.join("certificates.txt").display()
    );
    for cert in counterexamples {
        eprintln!(
            "counterexample: theorem {} at t_o = {} group {}: {}",
            cert.theorem, cert.t_o, cert.group_index, cert.note
        );
    }
    Ok(())
}

struct SweepRow {
    seed: u64,
    groups: usize,
    population: u64,
    outcome: Result<(HomecomingReport, usize), String>,
}

fn cmd_sweep(scenario: &str, seeds: SeedRange, out: Option<PathBuf>) -> Result<(), Failure> {
    let config = load(scenario)?;
    let dir = out_dir(out, &config);
    let rows: Vec<SweepRow> = (seeds.start..seeds.end)
        .into_par_iter()
        .map(|seed| {
            let variant = config.randomized(seed);
            let initial = variant.initial_state();
            let outcome = run(&variant)
                .map(|traj| (HomecomingReport::new(&traj), traj.merge_count()))
                .map_err(|e| e.to_string());
            if let Ok((report, _)) = &outcome {
                let seed_dir = dir.join(format!("seed-{seed}"));
                if let Err(e) = write_files(&seed_dir, &[("report.txt", report_document(report))]) {
                    return SweepRow {
                        seed,
                        groups: initial.len(),
                        population: initial.total_weight(),
                        outcome: Err(format!("{:#}", e.error())),
                    };
                }
            }
            SweepRow {
                seed,
                groups: initial.len(),
                population: initial.total_weight(),
                outcome,
            }
        })
        .collect();

    let mut summary = String::from("seed,groups,population,home,merges,end_time,frozen,status\n");
    let mut failures = 0;
    for row in &rows {
        match &row.outcome {
            Ok((report, merges)) => writeln!(
                summary,
                "{},{},{},{},{merges},{},{},ok",
                row.seed,
                row.groups,
                row.population,
                report.home_at_end,
                parade_core::export::format_sig(report.end_time),
                report.frozen_at_end.len()
            ),
            Err(message) => {
                failures += 1;
                writeln!(
                    summary,
                    "{},{},{},,,,,\"error: {}\"",
                    row.seed,
                    row.groups,
                    row.population,
                    message.replace('"', "'")
                )
            }
        }
        .expect("writing to a String");
    }
    write_files(&dir, &[("summary.csv", summary)])?;

    let all_home = rows
        .iter()
        .filter(|r| matches!(&r.outcome, Ok((rep, _)) if rep.home_at_end == rep.total))
        .count();
    println!(
        "{}: {} variants, {all_home} fully home, {failures} failed; wrote {}",
        config.name,
        rows.len(),
        dir.join("summary.csv").display()
    );
    if failures > 0 {
        return Err(Failure::Engine(anyhow::anyhow!(
            "{failures} of {} variants failed, see summary.csv",
            rows.len()
        )));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate { scenario, out } => cmd_simulate(&scenario, out),
        Command::Verify { scenario, out } => cmd_verify(&scenario, out),
        Command::Sweep {
            scenario,
            seeds,
            out,
        } => cmd_sweep(&scenario, seeds, out),
        Command::ListBuiltins => {
            for config in builtin_scenarios() {
                println!("{}", config.name);
            }
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {:#}", failure.error());
            ExitCode::from(failure.code())
        }
    }
}
