use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rayon::prelude::*;

use nashnet::engine::{run, Scenario, Trace};
use nashnet::error::{Error, Result};
use nashnet::oracle::{grid_minimax_with, verify_saddle, GridOptions, SaddleReport};
use nashnet::scenario::metrics::{
    compute_metrics, derive_reference, final_distance, resolve_reference, stored_reference, MetricsSeries,
    CERTIFY_SAMPLES,
};
use nashnet::scenario::output::{write_metrics_csv, write_plot_csv, write_saddle_report, write_trace_csv};
use nashnet::scenario::{example, graph_report, load_scenario, LoadedScenario};

#[derive(Parser)]
#[command(name = "nashnet", version, about = "Nash equilibrium seeking between two agent subnetworks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a scenario and write its trace and metrics.
    Run {
        scenario: PathBuf,
        #[arg(long)]
        iters: Option<usize>,
        /// Trace CSV path.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Metrics CSV path.
        #[arg(long)]
        metrics: Option<PathBuf>,
    },
    /// Saddle point of the (weighted) first-subnet objective sum by grid min-max.
    Oracle {
        scenario: PathBuf,
        /// Comma-separated weights, one per first-subnet agent.
        #[arg(long, value_delimiter = ',')]
        weights: Option<Vec<f64>>,
        #[arg(long, default_value_t = 2001)]
        grid: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Report the connectivity assumptions of a scenario's graphs.
    GraphCheck { scenario: PathBuf },
    /// Run a bundled example and write trace, metrics, plot data and reference.
    Reproduce {
        #[arg(value_parser = clap::value_parser!(u8).range(1..=3))]
        id: u8,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Use the stored reference instead of re-deriving it.
        #[arg(long)]
        trust_bundled: bool,
    },
    /// Run several scenarios, each into its own directory.
    Sweep {
        scenarios: Vec<PathBuf>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long, default_value = "sweep")]
        out: PathBuf,
        #[arg(long)]
        iters: Option<usize>,
    },
}

fn load(path: &Path) -> Result<LoadedScenario> {
    let l = load_scenario(path)?;
    for w in &l.warnings {
        eprintln!("warning: {w}");
    }
    Ok(l)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

fn simulate(sc: &Scenario, iters: usize, reference: &SaddleReport) -> Result<(Trace, MetricsSeries)> {
    let trace = run(sc, iters)?;
    let metrics = compute_metrics(&trace, sc, reference)?;
    Ok((trace, metrics))
}

fn summary(sc: &Scenario, m: &MetricsSeries) -> String {
    let (first, last) = (&m.rows[0], m.last());
    format!(
        "{}: k={} nash_error {:.6e} -> {:.6e}, h1={:.3e}, h2={:.3e}",
        sc.name, last.k, first.nash_error, last.nash_error, last.h1, last.h2
    )
}

fn write_outputs(dir: &Path, trace: &Trace, m: &MetricsSeries, reference: &SaddleReport) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut w = create(&dir.join("trace.csv"))?;
    write_trace_csv(&mut w, trace)?;
    w.flush()?;
    let mut w = create(&dir.join("metrics.csv"))?;
    write_metrics_csv(&mut w, m)?;
    w.flush()?;
    let mut w = create(&dir.join("plot.csv"))?;
    write_plot_csv(&mut w, Some(trace), m)?;
    w.flush()?;
    let mut w = create(&dir.join("saddle.csv"))?;
    write_saddle_report(&mut w, reference)?;
    w.flush()?;
    Ok(())
}

fn cmd_run(path: &Path, iters: Option<usize>, out: Option<PathBuf>, metrics: Option<PathBuf>) -> Result<()> {
    let sc = load(path)?.scenario;
    let reference = resolve_reference(&sc, true)?;
    let (trace, m) = simulate(&sc, iters.unwrap_or(sc.iterations), &reference)?;
    if let Some(p) = out {
        let mut w = create(&p)?;
        write_trace_csv(&mut w, &trace)?;
        w.flush()?;
    }
    if let Some(p) = metrics {
        let mut w = create(&p)?;
        write_metrics_csv(&mut w, &m)?;
        w.flush()?;
    }
    println!("{}", summary(&sc, &m));
    Ok(())
}

fn cmd_oracle(path: &Path, weights: Option<Vec<f64>>, grid: usize, out: Option<PathBuf>) -> Result<()> {
    let sc = load(path)?.scenario;
    let objective = match &weights {
        Some(mu) => sc.weighted_objective(mu)?,
        None => sc.total_objective()?,
    };
    let report = grid_minimax_with(&objective, &sc.x_box, &sc.y_box, &GridOptions::certified(grid))?;
    let violation = verify_saddle(
        &objective,
        (&report.x_star, &report.y_star),
        &sc.x_box,
        &sc.y_box,
        CERTIFY_SAMPLES,
    )?;
    match out {
        Some(p) => {
            let mut w = create(&p)?;
            write_saddle_report(&mut w, &report)?;
            w.flush()?;
        }
        None => write_saddle_report(&mut io::stdout().lock(), &report)?,
    }
    eprintln!("sampled saddle violation: {violation:.3e}");
    Ok(())
}

fn cmd_graph_check(path: &Path) -> Result<()> {
    let sc = load(path)?.scenario;
    let report = graph_report(&sc);
    for line in &report.lines {
        println!("{line}");
    }
    if report.holds() {
        Ok(())
    } else {
        Err(Error::Validation(report.failed))
    }
}

fn cmd_reproduce(id: u8, out: Option<PathBuf>, trust: bool) -> Result<()> {
    let loaded = example(id)?;
    for w in &loaded.warnings {
        eprintln!("warning: {w}");
    }
    let sc = loaded.scenario;
    let reference = if trust {
        resolve_reference(&sc, true)?
    } else {
        let derived = derive_reference(&sc)?;
        if let Some((stored, _)) = stored_reference(&sc)? {
            let d = final_distance_between(&stored, &derived);
            eprintln!("re-derived reference differs from the bundled one by {d:.3e}");
        }
        derived
    };
    let (trace, m) = simulate(&sc, sc.iterations, &reference)?;
    let dir = out.unwrap_or_else(|| PathBuf::from(format!("reproduce-{id}")));
    write_outputs(&dir, &trace, &m, &reference)?;
    println!("{}", summary(&sc, &m));
    println!(
        "largest final distance to ({}, {}): {:.3e}",
        fmt_point(&reference.x_star),
        fmt_point(&reference.y_star),
        final_distance(&trace, &reference.x_star, &reference.y_star)
    );
    Ok(())
}

fn final_distance_between(a: &SaddleReport, b: &SaddleReport) -> f64 {
    a.x_star
        .iter()
        .zip(&b.x_star)
        .chain(a.y_star.iter().zip(&b.y_star))
        .map(|(p, q)| (p - q).abs())
        .fold(0.0, f64::max)
}

fn fmt_point(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.6}")).collect::<Vec<_>>().join(" ")
}

fn sweep_one(path: &Path, out: &Path, iters: Option<usize>) -> Result<String> {
    let sc = load(path)?.scenario;
    let reference = resolve_reference(&sc, true)?;
    let (trace, m) = simulate(&sc, iters.unwrap_or(sc.iterations), &reference)?;
    let stem = path.file_stem().map_or_else(|| sc.name.clone(), |s| s.to_string_lossy().into_owned());
    write_outputs(&out.join(stem), &trace, &m, &reference)?;
    Ok(summary(&sc, &m))
}

fn cmd_sweep(paths: &[PathBuf], jobs: usize, out: &Path, iters: Option<usize>) -> Result<()> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Resource(e.to_string()))?;
    let results: Vec<Result<String>> = pool.install(|| paths.par_iter().map(|p| sweep_one(p, out, iters)).collect());
    let mut first_err = None;
    for (p, r) in paths.iter().zip(results) {
        match r {
            Ok(line) => println!("{line}"),
            Err(e) => {
                eprintln!("{}: {e}", p.display());
                first_err.get_or_insert(e);
            }
        }
    }
    first_err.map_or(Ok(()), Err)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            scenario,
            iters,
            out,
            metrics,
        } => cmd_run(&scenario, iters, out, metrics),
        Command::Oracle {
            scenario,
            weights,
            grid,
            out,
        } => cmd_oracle(&scenario, weights, grid, out),
        Command::GraphCheck { scenario } => cmd_graph_check(&scenario),
        Command::Reproduce { id, out, trust_bundled } => cmd_reproduce(id, out, trust_bundled),
        Command::Sweep {
            scenarios,
            jobs,
            out,
            iters,
        } => cmd_sweep(&scenarios, jobs, &out, iters),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
