use std::ffi::OsString;
use std::fmt::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use tcn_core::calibrate::{calibrate, table1_targets, Lattice};
use tcn_core::mapper::{execute_plan, plan_network, MappingPlan, Objective};
use tcn_core::oracle::network_reference;
use tcn_core::KernelVariant;

use crate::error::{Result, ToolError};
use crate::generators::{generate, random_input, NetKind};
use crate::io::{load_network, read_hardware, read_tensor, store_network, write_bytes, write_hardware, write_tensor};
use crate::plan_file::{read_plan, write_plan};
use crate::report::RunReport;
use crate::sweep::{sweep, sweep_csv, SweepBase, SweepParam, SweepRange};
use crate::threads::Threads;

#[derive(Debug, Parser)]
#[command(name = "tcn", version, about = "Plan, run and model int8 TCN inference on a scratchpad cluster")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Choose a kernel and tiling for every layer and write the plan.
    Plan {
        net: PathBuf,
        hw: PathBuf,
        #[arg(long, default_value = "model")]
        objective: String,
        /// Use this convolution variant for every conv layer.
        #[arg(long)]
        force: Option<String>,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Execute a plan on an input tensor; writes the output and a CSV report.
    Run {
        net: PathBuf,
        hw: PathBuf,
        plan: PathBuf,
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Host threads used to run the simulated cores.
        #[arg(long, default_value_t = 1)]
        workers: usize,
        /// Also run the reference pipeline and require identical output.
        #[arg(long)]
        check_oracle: bool,
    },
    /// Sweep one layer parameter and record predicted and event cycles.
    Sweep {
        hw: PathBuf,
        #[arg(long)]
        param: String,
        #[arg(long)]
        range: String,
        #[arg(long, default_value = "all")]
        variant: String,
        #[arg(long, default_value_t = 64)]
        cin: usize,
        #[arg(long, default_value_t = 64)]
        cout: usize,
        #[arg(long, default_value_t = 64)]
        t: usize,
        #[arg(long, default_value_t = 3)]
        k: usize,
        #[arg(long, default_value_t = 1)]
        d: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Search the constant lattice for a model that reproduces the target selections.
    Calibrate {
        hw: PathBuf,
        #[arg(long, default_value = "table1")]
        target: String,
        /// `default`, or `diagonal` (all constants equal).
        #[arg(long, default_value = "default")]
        lattice: String,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Write a generated network (JSON plus weight tensors) to a directory.
    GenNet {
        #[arg(long)]
        kind: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Write a random input tensor for a network.
    GenInput {
        net: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: PathBuf,
    },
}

fn parse_arg<T: std::str::FromStr>(s: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    s.parse().map_err(|e: T::Err| ToolError::Usage(e.to_string()))
}

/// Path of the CSV report written next to `output`: `<output>.report.csv`.
pub fn report_path(output: &Path) -> PathBuf {
    let mut name = output.as_os_str().to_owned();
    name.push(".report.csv");
    PathBuf::from(name)
}

fn plan_table(plan: &MappingPlan) -> String {
    let mut s = format!("{:>5}  {:<9}  {:>6}  {:>9}  {:>16}  {:>8}\n", "layer", "kernel", "tile_t", "tile_cout", "pred_cycles", "l1_bytes");
    for l in &plan.layers {
        let _ = writeln!(
            s,
            "{:>5}  {:<9}  {:>6}  {:>9}  {:>16.4}  {:>8}",
            l.index,
            l.kernel.name(),
            l.tile_t_out,
            l.tile_c_out,
            l.predicted_cycles,
            l.l1_bytes_used.total()
        );
    }
    let _ = writeln!(s, "{:>5}  {:<9}  {:>6}  {:>9}  {:>16.4}", "", "total", "", "", plan.total_predicted_cycles);
    s
}

/// Runs one command; returns the text for stdout.
pub fn execute(cmd: Command) -> Result<String> {
    match cmd {
        Command::Plan { net, hw, objective, force, output } => {
            let objective: Objective = parse_arg(&objective)?;
            let force: Option<KernelVariant> = force.as_deref().map(parse_arg).transpose()?;
            let net = load_network(&net)?;
            let hw = read_hardware(&hw)?;
            let plan = plan_network(&net, &hw, objective, force)?;
            write_plan(&output, &plan)?;
            Ok(plan_table(&plan))
        }
        Command::Run { net, hw, plan, input, output, workers, check_oracle } => {
            if workers == 0 {
                return Err(ToolError::Usage("--workers must be at least 1".into()));
            }
            let net = load_network(&net)?;
            let hw = read_hardware(&hw)?;
            let plan = read_plan(&plan)?;
            let x = read_tensor(&input)?;
            let run = execute_plan(&Threads::new(workers), &net, &plan, &x, &hw, hw.n_cores)?;
            write_tensor(&output, &run.output)?;
            let report = RunReport::new(&net, &plan, &run);
            write_bytes(&report_path(&output), report.csv().as_bytes())?;
            let mut text = report.table();
            if check_oracle {
                let want = network_reference(&net, &x)?;
                if want.data() != run.output.data() {
                    let at = want.data().iter().zip(run.output.data()).position(|(a, b)| a != b);
                    return Err(ToolError::OracleMismatch(match at {
                        Some(i) => format!("first difference at flat offset {i}"),
                        None => "output dimensions differ".into(),
                    }));
                }
                text.push_str("oracle check: identical\n");
            }
            Ok(text)
        }
        Command::Sweep { hw, param, range, variant, cin, cout, t, k, d, seed, workers, output } => {
            let param: SweepParam = param.parse()?;
            let range: SweepRange = range.parse()?;
            let variants = match variant.as_str() {
                "all" => KernelVariant::ALL.to_vec(),
                v => vec![parse_arg::<KernelVariant>(v)?],
            };
            let base = SweepBase { c_in: cin, c_out: cout, t, k, d };
            if [cin, cout, t, k, d].contains(&0) {
                return Err(ToolError::Usage("layer dimensions must be positive".into()));
            }
            let hw = read_hardware(&hw)?;
            let rows = sweep(&Threads::new(workers), &hw, base, param, range, &variants, seed)?;
            write_bytes(&output, sweep_csv(param, &rows).as_bytes())?;
            Ok(format!("{} sweep points written to {}\n", rows.len(), output.display()))
        }
        Command::Calibrate { hw, target, lattice, output } => {
            if target != "table1" {
                return Err(ToolError::Usage(format!("unknown calibration target {target:?}")));
            }
            let lattice = match lattice.as_str() {
                "default" => Lattice::default(),
                "diagonal" => Lattice::Diagonal(vec![0.125, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0]),
                other => return Err(ToolError::Usage(format!("unknown lattice {other:?}"))),
            };
            let base = read_hardware(&hw)?;
            let hw = calibrate(&base, &lattice, &table1_targets())?;
            write_hardware(&output, &hw)?;
            Ok(format!(
                "alpha={} beta={} gamma={} delta={} epsilon={} gamma_prime={}\n",
                hw.alpha, hw.beta, hw.gamma, hw.delta, hw.epsilon, hw.gamma_prime
            ))
        }
        Command::GenNet { kind, seed, output } => {
            let kind: NetKind = kind.parse()?;
            let path = store_network(&generate(kind, seed), &output, kind.name())?;
            Ok(format!("{}\n", path.display()))
        }
        Command::GenInput { net, seed, output } => {
            let net = load_network(&net)?;
            write_tensor(&output, &random_input(&net, seed))?;
            Ok(format!("{}\n", output.display()))
        }
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok(text) => {
            print!("{text}");
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
