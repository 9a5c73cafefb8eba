use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use triopf::io::{load_case, write_results};
use triopf::lp::write_lp;
use triopf::{
    stage1, stage2, stage3, validate_case, AttackOptions, MitigationOptions, Mode, Network,
    ScenarioConfig, ScenarioResult, TermWeights,
};

#[derive(Parser)]
#[command(
    name = "triopf",
    version,
    about = "Tri-level robust OPF for radial feeders"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a case file and print its dimensions.
    Validate { case: PathBuf },
    /// Run dispatch, attack and mitigation and write the results.
    Run {
        case: PathBuf,
        /// Attack budget per hour.
        #[arg(long, default_value_t = 3.0)]
        k: f64,
        #[arg(long, value_enum, default_value_t = ModeArg::Full)]
        mode: ModeArg,
        #[command(flatten)]
        opts: ScenarioArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run k = 0, 1, ..., k-max, one subdirectory per budget.
    Sweep {
        case: PathBuf,
        #[arg(long)]
        k_max: u32,
        #[arg(long, value_enum, default_value_t = ModeArg::Full)]
        mode: ModeArg,
        #[command(flatten)]
        opts: ScenarioArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write one stage's model in text form. Stages 2 and 3 solve the
    /// preceding stages first.
    DumpLp {
        case: PathBuf,
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
        stage: u8,
        #[arg(long, default_value_t = 3.0)]
        k: f64,
        #[command(flatten)]
        opts: ScenarioArgs,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Full,
    Rolling,
}

#[derive(Args)]
struct ScenarioArgs {
    /// Restrict attack fractions to 0 or 1.
    #[arg(long)]
    binary_attack: bool,
    /// Forbid any limit violation after mitigation.
    #[arg(long)]
    hard_limits: bool,
    /// Take the generators at these nodes out of service.
    #[arg(long, value_delimiter = ',', value_name = "NODES")]
    disable_gen: Vec<u32>,
    #[arg(long, default_value_t = 1.0)]
    weight_line: f64,
    #[arg(long, default_value_t = 1.0)]
    weight_node: f64,
}

impl ScenarioArgs {
    fn config(&self, k: f64, mode: ModeArg) -> ScenarioConfig {
        ScenarioConfig {
            k,
            mode: match mode {
                ModeArg::Full => Mode::FullHorizon,
                ModeArg::Rolling => Mode::Rolling,
            },
            binary_attack: self.binary_attack,
            hard_limits: self.hard_limits,
            weights: TermWeights {
                line: self.weight_line,
                node: self.weight_node,
            },
        }
    }
}

fn load(path: &Path, disable: &[u32]) -> Result<Network, String> {
    let net = load_case(path).map_err(|e| e.to_string())?;
    if disable.is_empty() {
        return Ok(net);
    }
    let case = net.case.with_generators_out_of_service(disable);
    validate_case(case).map_err(|errs| {
        let lines: Vec<String> = errs.iter().map(|e| format!("  {e}")).collect();
        format!("{}: invalid case:\n{}", path.display(), lines.join("\n"))
    })
}

fn report(result: &ScenarioResult) {
    let t = &result.timings;
    println!(
        "stage1  cost {:>12.4}  worst line {:>9.4}  worst node {:>9.4}  {:>8.1} ms",
        result.dispatch.total_cost,
        result.dispatch_violations.worst_line_margin,
        result.dispatch_violations.worst_node_margin,
        t.dispatch.as_secs_f64() * 1e3
    );
    println!(
        "stage2  obj  {:>12.4}  worst line {:>9.4}  worst node {:>9.4}  {:>8.1} ms",
        result.attack.objective_value,
        result.attack.violations.worst_line_margin,
        result.attack.violations.worst_node_margin,
        t.attack.as_secs_f64() * 1e3
    );
    println!(
        "stage3  obj  {:>12.4}  worst line {:>9.4}  worst node {:>9.4}  {:>8.1} ms",
        result.mitigation.objective_value,
        result.mitigation.violations.worst_line_margin,
        result.mitigation.violations.worst_node_margin,
        t.mitigation.as_secs_f64() * 1e3
    );
}

fn run(cli: Cli) -> Result<(), String> {
    match cli.command {
        Command::Validate { case } => {
            let net = load(&case, &[])?;
            let sub = &net.case.generators[net.substation];
            println!(
                "{}: ok ({} nodes, {} lines, {} generators, {} storage units, {} hours, substation at node {})",
                case.display(),
                net.num_nodes(),
                net.num_lines(),
                net.case.generators.len(),
                net.case.storage.len(),
                net.horizon(),
                sub.node
            );
        }
        Command::Run {
            case,
            k,
            mode,
            opts,
            out,
        } => {
            let net = load(&case, &opts.disable_gen)?;
            let result =
                triopf::run_scenario(&net, &opts.config(k, mode)).map_err(|e| e.to_string())?;
            report(&result);
            write_results(&net, &result, &out).map_err(|e| e.to_string())?;
            println!("results written to {}", out.display());
        }
        Command::Sweep {
            case,
            k_max,
            mode,
            opts,
            out,
        } => {
            let net = load(&case, &opts.disable_gen)?;
            let ks: Vec<f64> = (0..=k_max).map(f64::from).collect();
            let results = triopf::sweep(&net, &opts.config(0.0, mode), &ks);
            fs::create_dir_all(&out)
                .map_err(|e| format!("cannot create {}: {e}", out.display()))?;
            let mut failures = Vec::new();
            let mut table = String::from(
                "k,stage2_objective,stage2_worst_margin,stage3_objective,stage3_worst_margin\n",
            );
            for (k, result) in ks.iter().zip(results) {
                match result {
                    Ok(r) => {
                        println!("k = {k}");
                        report(&r);
                        table.push_str(&format!(
                            "{k},{},{},{},{}\n",
                            r.attack.objective_value,
                            r.attack.violations.worst_margin(),
                            r.mitigation.objective_value,
                            r.mitigation.violations.worst_margin()
                        ));
                        write_results(&net, &r, out.join(format!("k{k}")))
                            .map_err(|e| e.to_string())?;
                    }
                    Err(e) => failures.push(format!("k = {k}: {e}")),
                }
            }
            let path = out.join("sweep.csv");
            fs::write(&path, table).map_err(|e| format!("cannot write {}: {e}", path.display()))?;
            if !failures.is_empty() {
                return Err(failures.join("\n"));
            }
            println!("results written to {}", out.display());
        }
        Command::DumpLp {
            case,
            stage,
            k,
            opts,
            out,
        } => {
            let net = load(&case, &opts.disable_gen)?;
            let config = opts.config(k, ModeArg::Full);
            let attack_opts = AttackOptions {
                binary_attack: config.binary_attack,
                weights: config.weights,
            };
            let lp = match stage {
                1 => stage1::build_base_opf(&net).lp,
                _ => {
                    let dispatch = triopf::solve_base_opf(&net).map_err(|e| e.to_string())?;
                    if stage == 2 {
                        stage2::build_attack_model(&net, &dispatch, k, &attack_opts).lp
                    } else {
                        let attack = triopf::assess_worst_attack(&net, &dispatch, k, &attack_opts)
                            .map_err(|e| e.to_string())?;
                        let mit = MitigationOptions {
                            hard_limits: config.hard_limits,
                            weights: config.weights,
                        };
                        stage3::build_mitigation_model(&net, &dispatch, &attack, &mit).lp
                    }
                }
            };
            let file =
                File::create(&out).map_err(|e| format!("cannot create {}: {e}", out.display()))?;
            let mut writer = BufWriter::new(file);
            write_lp(&lp, &mut writer)
                .and_then(|()| writer.flush())
                .map_err(|e| format!("cannot write {}: {e}", out.display()))?;
            println!(
                "stage {stage} model ({} variables, {} constraints) written to {}",
                lp.num_vars(),
                lp.constraints.len(),
                out.display()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
