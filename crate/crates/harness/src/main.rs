use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use inbi_core::pipeline::AlgorithmId;
use inbi_harness::cases::{case, CaseId, Consideration};
use inbi_harness::config::HarnessConfig;
use inbi_harness::experiments::{
    building_counts, case_pipeline, case_problem, case_row, compare_all, format_case_table, run_case,
    smoothing_experiment, trr_deviation_experiment,
};
use inbi_harness::io;
use inbi_harness::synth::synthesize_scenario;
use inbi_harness::Result;
use inbi_core::pipeline::RunResult;

#[derive(Debug, Parser)]
#[command(name = "inbi", version, about = "Multi-objective dispatch of a smart-building cluster")]
struct Cli {
    /// TOML configuration file; built-in defaults otherwise.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Scenario seed, overriding the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// INBI frontier of the standard case with stage reports.
    Frontier,
    /// One built-in case under one algorithm.
    Case {
        /// "standard" or 1 to 12.
        #[arg(long)]
        id: CaseId,
        #[arg(long, default_value = "inbi")]
        alg: AlgorithmId,
    },
    /// Every case under every algorithm.
    CompareAll,
    /// Allocation deviation with the TRR penalty off and on.
    TrrExp,
    /// Equipment-cost optimization degree against building count.
    Smoothing {
        #[arg(long)]
        from: Option<usize>,
        #[arg(long)]
        to: Option<usize>,
        #[arg(long)]
        step: Option<usize>,
    },
    /// Write a synthetic scenario as CSV files plus a manifest.
    Synth,
    /// Print the effective configuration.
    Config,
}

fn load_config(cli: &Cli) -> Result<HarnessConfig> {
    let mut cfg = match &cli.config {
        Some(path) => HarnessConfig::load(path)?,
        None => HarnessConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.synthesis.seed = seed;
    }
    Ok(cfg)
}

fn write_run(dir: &Path, run: &RunResult) -> Result<()> {
    io::write_frontier(&dir.join("frontier.csv"), &run.frontier)?;
    io::write_compromise(&dir.join("compromise.csv"), run)?;
    if let Some(aws) = &run.aws {
        io::write_aws_report(&dir.join("aws.csv"), aws)?;
    }
    if let Some(auam) = &run.auam {
        io::write_auam_trace(&dir.join("auam_trace.csv"), auam)?;
    }
    Ok(())
}

fn execute(cli: &Cli) -> Result<()> {
    let cfg = load_config(cli)?;
    let out = &cli.out;
    match &cli.command {
        Command::Frontier => {
            let standard = case(CaseId::Standard);
            let problem = case_problem(&cfg, Consideration::None)?;
            let run = inbi_core::run(&problem, AlgorithmId::Inbi, &case_pipeline(&cfg, &standard))?;
            case_row(&standard, &run)?;
            write_run(out, &run)?;
            let m = &run.metrics;
            println!(
                "frontier: {} NBI points, {} after AWS, {} selected; spacing CV {:.3} -> {:.3}",
                m.nbi_points,
                m.frontier_points,
                m.selected_points,
                m.nbi_cv.unwrap_or(f64::NAN),
                m.selected_cv.unwrap_or(f64::NAN)
            );
        }
        Command::Case { id, alg } => {
            let c = case(*id);
            let (row, run) = run_case(&cfg, &c, *alg)?;
            let dir = out.join(format!("case_{}_{}", c.id, alg));
            write_run(&dir, &run)?;
            io::write_rows(&dir.join("summary.csv"), std::slice::from_ref(&row))?;
            print!("{}", format_case_table(&[row]));
        }
        Command::CompareAll => {
            let rows = compare_all(&cfg)?;
            io::write_rows(&out.join("compare_all.csv"), &rows)?;
            let table = format_case_table(&rows);
            io::write_text(&out.join("compare_all.txt"), &table)?;
            print!("{table}");
        }
        Command::TrrExp => {
            let exp = trr_deviation_experiment(&cfg)?;
            io::write_rows(&out.join("trr_deviation.csv"), &exp.rows)?;
            io::write_rows(&out.join("trr_seeds.csv"), &exp.seeds)?;
            io::write_trr_series(&out.join("trr_series.csv"), &exp.series.0, &exp.series.1)?;
            for s in &exp.seeds {
                println!("seed {:>4}: mean deviation {:.4} off, {:.4} on", s.seed, s.mean_off, s.mean_on);
            }
            println!(
                "average {:.4} -> {:.4} ({:.1}% reduction)",
                exp.mean_off(),
                exp.mean_on(),
                exp.reduction_pct()
            );
        }
        Command::Smoothing { from, to, step } => {
            let e = &cfg.experiments;
            let counts = building_counts(
                from.unwrap_or(e.smoothing_from),
                to.unwrap_or(e.smoothing_to),
                step.unwrap_or(e.smoothing_step),
            )?;
            let rows = smoothing_experiment(&cfg, &counts)?;
            io::write_rows(&out.join("smoothing.csv"), &rows)?;
            for r in &rows {
                println!("{:>3} buildings {:<5} {:>8.2}%", r.n_buildings, r.algorithm, r.optimization_degree);
            }
        }
        Command::Synth => {
            let scenario = synthesize_scenario(&cfg.synthesis)?;
            let manifest = io::write_scenario(out, &scenario, cfg.synthesis.must_take)?;
            println!("{}", manifest.display());
        }
        Command::Config => print!("{}", cfg.to_toml()?),
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
