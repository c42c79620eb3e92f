//! `gapr`: generate instances, validate them, solve single (phi, alpha)
//! scenarios and run full grid sweeps with CSV output.
//!
//! Exit codes: 0 success, 2 validation failure, 3 solve failure.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gapr_core::assignment::{self, ScenarioParams};
use gapr_core::netmodel::{self, BBox, GeneratorConfig, Instance};
use gapr_core::pathgen::ODPathSet;
use gapr_core::sweep::{self, SweepConfig};

const EXIT_VALIDATION: u8 = 2;
const EXIT_SOLVE: u8 = 3;

#[derive(Parser)]
#[command(name = "gapr", version, about = "Gathering-avoiding pedestrian routing toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random instance and write it as JSON.
    Generate(GenerateArgs),
    /// Validate an instance file; prints violations if any.
    Validate {
        #[arg(long)]
        instance: PathBuf,
    },
    /// Solve a single (phi, alpha) scenario and dump the assignment.
    Solve(SolveArgs),
    /// Run the (phi, alpha) grid sweep and emit a CSV report.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    nodes: usize,
    #[arg(long)]
    density: f64,
    #[arg(long)]
    od: usize,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 2.0)]
    safety_distance: f64,
    #[arg(long, default_value_t = 1.4)]
    walking_speed: f64,
    #[arg(long, default_value_t = 0.5)]
    node_cap_fraction: f64,
    #[arg(long, default_value_t = 0.3)]
    demand_fraction: f64,
    #[arg(long, default_value_t = 1.0)]
    node_time_min: f64,
    #[arg(long, default_value_t = 10.0)]
    node_time_max: f64,
    #[arg(long, default_value_t = 2000.0)]
    bbox: f64,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    phi: f64,
    #[arg(long)]
    alpha: f64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 1000)]
    paths_cap: usize,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Comma-separated phi values, ascending; 0 contributes the UE cell.
    #[arg(long = "phi-list", value_delimiter = ',')]
    phi_list: Option<Vec<f64>>,
    /// Comma-separated alpha values, descending.
    #[arg(long = "alpha-list", value_delimiter = ',')]
    alpha_list: Option<Vec<f64>>,
    #[arg(long)]
    csv: PathBuf,
    #[arg(long, default_value_t = 1000)]
    paths_cap: usize,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Optional JSON-lines dump of every eligible path set.
    #[arg(long)]
    dump_paths: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_VALIDATION)
        }
        Err(CliError::Solve(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_SOLVE)
        }
        Err(CliError::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}

enum CliError {
    Validation(String),
    Solve(String),
    Io(String),
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

fn load(path: &Path) -> Result<Instance, CliError> {
    let file = File::open(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    netmodel::load_instance(file).map_err(|e| CliError::Validation(e.to_string()))
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Generate(args) => generate(args),
        Command::Validate { instance } => {
            let file =
                File::open(&instance).map_err(|e| CliError::Io(format!("{}: {e}", instance.display())))?;
            match netmodel::load_instance(file) {
                Ok(inst) => {
                    println!(
                        "{}: valid ({} vertices, {} arcs, {} OD pairs)",
                        inst.name,
                        inst.vertices.len(),
                        inst.arcs.len(),
                        inst.od_pairs.len()
                    );
                    Ok(())
                }
                Err(e) => Err(CliError::Validation(e.to_string())),
            }
        }
        Command::Solve(args) => solve(args),
        Command::Sweep(args) => sweep_cmd(args),
    }
}

fn generate(args: GenerateArgs) -> Result<(), CliError> {
    let config = GeneratorConfig {
        n_vertices: args.nodes,
        arc_density: args.density,
        n_od_pairs: args.od,
        safety_distance: args.safety_distance,
        walking_speed: args.walking_speed,
        node_cap_fraction: args.node_cap_fraction,
        node_time_window: (args.node_time_min, args.node_time_max),
        demand_fraction: args.demand_fraction,
        bbox: BBox {
            width: args.bbox,
            height: args.bbox,
        },
        seed: args.seed,
    };
    let instance =
        netmodel::generate_instance(&config).map_err(|e| CliError::Validation(e.to_string()))?;
    let file = File::create(&args.out)?;
    netmodel::save_instance(&instance, BufWriter::new(file))
        .map_err(|e| CliError::Io(e.to_string()))?;
    println!(
        "wrote {} ({} vertices, {} arcs, {} OD pairs)",
        args.out.display(),
        instance.vertices.len(),
        instance.arcs.len(),
        instance.od_pairs.len()
    );
    Ok(())
}

fn solve(args: SolveArgs) -> Result<(), CliError> {
    if !(0.0..=1.0).contains(&args.alpha) || args.phi < 0.0 {
        return Err(CliError::Validation("need phi >= 0 and alpha in [0, 1]".into()));
    }
    let instance = load(&args.instance)?;
    let path_sets = assignment::enumerate_path_sets(&instance, args.phi, args.paths_cap)
        .map_err(|e| CliError::Solve(e.to_string()))?;
    let a = assignment::solve_with_path_sets(
        &instance,
        &path_sets,
        ScenarioParams::new(args.phi, args.alpha, args.paths_cap),
    )
    .map_err(|e| CliError::Solve(e.to_string()))?;
    let dump = assignment::assignment_to_json(&instance, &path_sets, &a);
    let mut file = BufWriter::new(File::create(&args.out)?);
    serde_json::to_writer_pretty(&mut file, &dump).map_err(|e| CliError::Io(e.to_string()))?;
    file.write_all(b"\n")?;
    println!(
        "phi={} alpha={}: tau={:.6} eta={:.6} objective={:.6} -> {}",
        args.phi,
        args.alpha,
        a.tau,
        a.eta,
        a.scalarized_objective,
        args.out.display()
    );
    Ok(())
}

fn dump_path_sets(path: &Path, sets_by_phi: &[(f64, Vec<ODPathSet>)]) -> Result<(), CliError> {
    let mut file = BufWriter::new(File::create(path)?);
    for (phi, sets) in sets_by_phi {
        for set in sets {
            let line = serde_json::json!({
                "od": set.od.id,
                "phi": phi,
                "paths": set.paths.iter().map(|p| &p.vertex_sequence).collect::<Vec<_>>(),
                "times": set.paths.iter().map(|p| p.time).collect::<Vec<_>>(),
                "truncated": set.truncated,
            });
            writeln!(file, "{line}")?;
        }
    }
    Ok(())
}

fn sweep_cmd(args: SweepArgs) -> Result<(), CliError> {
    let instance = load(&args.instance)?;
    let defaults = SweepConfig::default();
    let config = SweepConfig {
        phi_grid: args.phi_list.unwrap_or(defaults.phi_grid),
        alpha_grid: args.alpha_list.unwrap_or(defaults.alpha_grid),
        max_paths: args.paths_cap,
        parallel_cells: args.jobs,
    };
    let report = sweep::run_sweep(&instance, &config).map_err(|e| CliError::Solve(e.to_string()))?;
    let file = BufWriter::new(File::create(&args.csv)?);
    let lines = sweep::emit_csv(&report, file).map_err(|e| CliError::Io(e.to_string()))?;
    if let Some(dump) = &args.dump_paths {
        let mut sets_by_phi = Vec::new();
        for &phi in &config.phi_grid {
            let cap = if phi == 0.0 { 1 } else { config.max_paths };
            let sets = assignment::enumerate_path_sets(&instance, phi, cap)
                .map_err(|e| CliError::Solve(e.to_string()))?;
            sets_by_phi.push((phi, sets));
        }
        dump_path_sets(dump, &sets_by_phi)?;
    }
    println!(
        "{}: {} cells -> {} ({} lines)",
        report.instance_name,
        report.records.len(),
        args.csv.display(),
        lines
    );
    Ok(())
}
