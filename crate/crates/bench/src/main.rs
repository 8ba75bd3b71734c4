use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use sigp_core::linalg;
use sigp_core::planner::PlannerRegistry;
use sigp_core::sim::{run_episode, Episode, Metrics, Scenario};

#[derive(Parser)]
#[command(name = "sigp-bench", version, about = "Run crowd navigation planners on simulated scenarios")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario with one planner and write its artifacts.
    Run(RunArgs),
    /// Run every planner/seed combination and write aggregate comparisons.
    Compare(CompareArgs),
    /// Print the registered planner names.
    List,
}

#[derive(Args, Clone)]
struct Common {
    #[arg(long)]
    scenario: PathBuf,
    /// Override samples drawn per agent.
    #[arg(long)]
    samples: Option<usize>,
    /// Override the planning horizon in steps.
    #[arg(long)]
    horizon: Option<usize>,
    #[arg(long, env = "SIGP_OUT_DIR", default_value = "runs")]
    out: PathBuf,
    /// Overwrite existing run directories.
    #[arg(long)]
    force: bool,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: Common,
    /// Planner name; defaults to the scenario's `default_planner`.
    #[arg(long)]
    planner: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_delimiter = ',', required = true)]
    planners: Vec<String>,
    #[arg(long, value_delimiter = ',', default_value = "0")]
    seeds: Vec<u64>,
}

struct RunOutput {
    run_id: String,
    episode: Episode,
}

fn prepare(common: &Common, seed: Option<u64>) -> Result<Scenario> {
    let mut s = Scenario::load(&common.scenario)?;
    if let Some(seed) = seed {
        s.seed = seed;
    }
    if let Some(n) = common.samples {
        s.planner.samples_per_agent = n;
    }
    if let Some(h) = common.horizon {
        s.planner.horizon = h;
    }
    s.validate()?;
    Ok(s)
}

fn claim_dir(dir: &Path, force: bool) -> Result<()> {
    if dir.exists() {
        if !force {
            bail!("{} already exists; pass --force to overwrite", dir.display());
        }
        fs::remove_dir_all(dir).with_context(|| format!("removing {}", dir.display()))?;
    }
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(())
}

fn distance_csv(ep: &Episode) -> String {
    let mut out = String::from("step,min_distance_m\n");
    for (s, d) in ep.log.robot_distances() {
        writeln!(out, "{s},{d}").expect("string write");
    }
    out
}

fn coefficient_mass_csv(ep: &Episode) -> String {
    let mut out = String::from("step,rank,log_coeff,mass_share\n");
    for c in &ep.cycles {
        let logs: Vec<f64> = c.top.iter().map(|b| b.log_coeff).collect();
        let total = linalg::log_sum_exp(&logs);
        for (rank, b) in c.top.iter().enumerate() {
            let share = if total.is_finite() { (b.log_coeff - total).exp() } else { 0.0 };
            writeln!(out, "{},{},{},{}", c.step, rank, b.log_coeff, share).expect("string write");
        }
    }
    out
}

/// Runs one episode and writes its artifacts into `root/<run_id>/`.
fn execute(scenario: &Scenario, planner_name: &str, root: &Path, force: bool) -> Result<RunOutput> {
    let registry = PlannerRegistry::with_defaults();
    let planner = registry.create(planner_name)?;
    let mut resolved = scenario.resolved();
    resolved.default_planner = Some(planner_name.to_string());
    let run_id = format!("{}_{}_s{}", resolved.name, planner_name, resolved.seed);
    let dir = root.join(&run_id);
    claim_dir(&dir, force)?;
    resolved.save(dir.join("resolved.toml"))?;
    let episode = run_episode(&resolved, planner.as_ref(), &run_id)?;
    let m = &episode.metrics;
    fs::write(dir.join("metrics.csv"), format!("{}\n{}\n", Metrics::CSV_HEADER, m.csv_row()))?;
    fs::write(dir.join("trajectory.txt"), episode.log.to_text())?;
    fs::write(dir.join("distance.csv"), distance_csv(&episode))?;
    fs::write(dir.join("coefficient_mass.csv"), coefficient_mass_csv(&episode))?;
    Ok(RunOutput { run_id, episode })
}

fn run(args: RunArgs) -> Result<ExitCode> {
    let scenario = prepare(&args.common, args.seed)?;
    let name = match args.planner.or_else(|| scenario.default_planner.clone()) {
        Some(n) => n,
        None => bail!("no --planner given and the scenario names no default_planner"),
    };
    let out = execute(&scenario, &name, &args.common.out, args.common.force)?;
    println!("{}", Metrics::CSV_HEADER);
    println!("{}", out.episode.metrics.csv_row());
    if out.episode.failed {
        eprintln!("episode {} failed: planner stayed degraded", out.run_id);
        return Ok(ExitCode::from(1));
    }
    Ok(ExitCode::SUCCESS)
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = values.collect();
    if v.is_empty() { f64::NAN } else { v.iter().sum::<f64>() / v.len() as f64 }
}

fn compare(args: CompareArgs) -> Result<ExitCode> {
    let registry = PlannerRegistry::with_defaults();
    for p in &args.planners {
        registry.create(p)?;
    }
    let base = prepare(&args.common, None)?;
    let root = args.common.out.join(format!("compare_{}", base.name));
    claim_dir(&root, args.common.force)?;
    let mut runs = format!("planner,seed,status,{}\n", Metrics::CSV_HEADER);
    // (planner, seed) -> metrics for successful runs
    let mut results: Vec<(String, u64, Option<Metrics>)> = Vec::new();
    for planner in &args.planners {
        for &seed in &args.seeds {
            let mut s = base.clone();
            s.seed = seed;
            match execute(&s, planner, &root, true) {
                Ok(out) => {
                    let status = if out.episode.failed { "failed" } else { "ok" };
                    writeln!(runs, "{planner},{seed},{status},{}", out.episode.metrics.csv_row())?;
                    results.push((planner.clone(), seed, Some(out.episode.metrics)));
                }
                Err(e) => {
                    let msg = format!("{e:#}").replace([',', '\n'], ";");
                    writeln!(runs, "{planner},{seed},error: {msg},,,,,,,")?;
                    eprintln!("{planner} seed {seed}: {e:#}");
                    results.push((planner.clone(), seed, None));
                }
            }
        }
    }
    fs::write(root.join("runs.csv"), &runs)?;

    let mut header =
        String::from("planner,runs,errors,mean_safety_m,mean_speed_mps,mean_runtime_s,total_collisions,goal_rate");
    for p in &args.planners {
        write!(header, ",safer_than_{p}")?;
    }
    let mut table = header + "\n";
    for p in &args.planners {
        let ok: Vec<&Metrics> = results.iter().filter(|r| &r.0 == p).filter_map(|r| r.2.as_ref()).collect();
        let errors = results.iter().filter(|r| &r.0 == p && r.2.is_none()).count();
        write!(
            table,
            "{p},{},{errors},{},{},{},{},{}",
            ok.len(),
            mean(ok.iter().map(|m| m.safety_m)),
            mean(ok.iter().map(|m| m.speed_mps)),
            mean(ok.iter().map(|m| m.runtime_s)),
            ok.iter().map(|m| m.collisions).sum::<usize>(),
            mean(ok.iter().map(|m| m.reached_goal as u8 as f64)),
        )?;
        for q in &args.planners {
            // share of common seeds where p kept a strictly larger distance than q
            let mut wins = 0usize;
            let mut shared = 0usize;
            for &seed in &args.seeds {
                let find = |name: &str| {
                    results.iter().find(|r| r.0 == name && r.1 == seed).and_then(|r| r.2.as_ref())
                };
                if let (Some(a), Some(b)) = (find(p), find(q)) {
                    shared += 1;
                    wins += (a.safety_m > b.safety_m) as usize;
                }
            }
            write!(table, ",{}", if shared == 0 { f64::NAN } else { wins as f64 / shared as f64 })?;
        }
        table.push('\n');
    }
    fs::write(root.join("comparison.csv"), &table)?;
    print!("{table}");
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(a) => run(a),
        Command::Compare(a) => compare(a),
        Command::List => {
            for n in PlannerRegistry::with_defaults().names() {
                println!("{n}");
            }
            Ok(ExitCode::SUCCESS)
        }
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
