use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use lagflock::engine::{self, Scenario};
use lagflock::report::{self, PlotKind};
use lagflock::scenario;
use lagflock::verify::{self, Suite};
use lagflock::Error;

#[derive(Parser)]
#[command(name = "lagflock", version, about = "Leader-follower flocking of Euler-Lagrange agents")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a scenario file (or a bundled name: case1, case2, case3).
    Run {
        scenario: String,
        /// Directory for the CSV log and SVG plots.
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Render an SVG from a CSV log written by `run`.
    Plot {
        log: PathBuf,
        #[arg(long, value_parser = |s: &str| s.parse::<PlotKind>())]
        kind: PlotKind,
        /// Output file; defaults to `<log stem>_<kind>.svg` next to the log.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Sensing radius used to draw the initial edges, m.
        #[arg(long, default_value_t = 200.0)]
        radius: f64,
    },
    /// Run a property suite: matrices, plant, potential, lyapunov or all.
    Verify {
        #[arg(value_parser = |s: &str| s.parse::<Suite>())]
        suite: Suite,
        #[arg(long, default_value_t = verify::DEFAULT_SEED)]
        seed: u64,
    },
}

mod exit {
    pub const PARSE: u8 = 3;
    pub const VALIDATION: u8 = 4;
    pub const DIVERGENCE: u8 = 5;
    pub const BARRIER: u8 = 6;
    pub const VERIFY_FAILED: u8 = 7;
    pub const IO: u8 = 8;
    pub const INTERNAL: u8 = 1;
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Parse { .. } => exit::PARSE,
        Error::Validation { .. } | Error::Unit { .. } | Error::Config(_) => exit::VALIDATION,
        Error::Divergence { .. } | Error::Singularity => exit::DIVERGENCE,
        Error::BarrierViolation { .. } | Error::Collision(..) => exit::BARRIER,
        Error::Io { .. } => exit::IO,
        Error::Contract(_) => exit::INTERNAL,
    }
}

fn load(arg: &str) -> lagflock::Result<Scenario> {
    let path = Path::new(arg);
    if !path.exists() {
        if let Some(text) = scenario::bundled(arg) {
            return scenario::parse_scenario_str(text, arg);
        }
    }
    scenario::parse_scenario(path)
}

fn run(arg: &str, out: &Path) -> lagflock::Result<()> {
    let sc = load(arg)?;
    let gains = sc.gain_report()?;
    println!(
        "scenario {}: {} followers, law {}, dt {} s, t_end {} s",
        sc.name,
        sc.n(),
        sc.controller.law.name(),
        sc.integration.dt,
        sc.integration.t_end
    );
    println!(
        "sigma_l {:.6e}, lambda_min(H0) {:.6e}, alpha threshold {:.6e}",
        gains.sigma_l, gains.lambda_min_h0, gains.alpha_threshold
    );
    let log = engine::run(&sc)?;
    for w in &log.warnings {
        eprintln!("warning: {w}");
    }
    std::fs::create_dir_all(out).map_err(|e| Error::Io {
        path: out.to_path_buf(),
        source: e,
    })?;
    let csv = out.join(format!("{}.csv", sc.name));
    report::emit_csv(&log, &csv)?;
    for kind in [PlotKind::TrajectoryXy, PlotKind::VelocityError] {
        report::emit_plot(&log, &out.join(format!("{}_{}.svg", sc.name, kind.name())), kind)?;
    }
    let d = &log.diagnostics;
    println!("final max velocity error {:.6e} m/s", log.final_max_velocity_error());
    println!(
        "edges added {}, removed {}, initial edges lost {}",
        d.edges_added, d.edges_removed, d.initial_edges_lost
    );
    println!(
        "min distance {:.6} m, gradient cap engagements {}, max V increase {:.3e}",
        log.min_distance,
        log.cap_engagements,
        d.max_total_increase()
    );
    println!("wrote {}", csv.display());
    Ok(())
}

fn plot(log: &Path, kind: PlotKind, out: Option<PathBuf>, radius: f64) -> lagflock::Result<()> {
    let table = report::read_csv(log)?;
    let svg = report::plot_table(&table, kind, radius)?;
    let out = out.unwrap_or_else(|| {
        let stem = log.file_stem().and_then(|s| s.to_str()).unwrap_or("log");
        log.with_file_name(format!("{stem}_{}.svg", kind.name()))
    });
    std::fs::write(&out, svg).map_err(|e| Error::Io {
        path: out.clone(),
        source: e,
    })?;
    println!("wrote {}", out.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { scenario, out } => run(&scenario, &out),
        Command::Plot { log, kind, out, radius } => plot(&log, kind, out, radius),
        Command::Verify { suite, seed } => match verify::verify(suite, seed) {
            Ok(report) => {
                println!("{report}");
                if !report.passed() {
                    return ExitCode::from(exit::VERIFY_FAILED);
                }
                Ok(())
            }
            Err(e) => Err(e),
        },
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_are_distinct() {
        let errors = [
            Error::Parse { line: 1, message: String::new() },
            Error::Validation { key: "integration.dt".into(), message: String::new() },
            Error::Divergence { t: 0.0, what: String::new() },
            Error::BarrierViolation { a: 0, b: 1, distance: 200.0 },
            Error::Io {
                path: PathBuf::new(),
                source: std::io::Error::other("x"),
            },
        ];
        let mut codes: Vec<u8> = errors.iter().map(exit_code).collect();
        codes.push(exit::VERIFY_FAILED);
        let mut unique = codes.clone();
        unique.sort_unstable();
        unique.dedup();
        assert_eq!(unique.len(), codes.len());
        assert!(codes.iter().all(|&c| c != 0 && c != 2));
        assert_eq!(exit_code(&Error::Collision(0, 1)), exit::BARRIER);
        assert_eq!(exit_code(&Error::Unit { key: "k".into(), expected: "m", found: "kg".into() }), exit::VALIDATION);
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
