use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use mbqc_core::codes::CODE_NAMES;
use mbqc_core::fusion::{resolve_block, StepBlock};
use mbqc_core::noise::{self, Scenario};
use mbqc_core::{
    choi_state, code_switch_block, decoder_block, ec_block, encoder_block, get_code, rotation_gadget, run_pipeline,
    states_equal, Axis, CliffordCircuit, Error, PipelineSpec, ResourceBlock,
};

#[derive(Parser)]
#[command(
    name = "mbqc",
    version,
    about = "Resource-state synthesis, fusion runs and noise thresholds"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize a resource block and write it as JSON.
    Synth(SynthArgs),
    /// Run a pipeline and print its transcript as JSON lines.
    Run(RunArgs),
    /// Threshold report with provenance tags.
    Threshold(ThresholdArgs),
    /// Monte Carlo sweep of the logical error rate of one EC round.
    Sweep(SweepArgs),
    /// Magic-state fidelity under local depolarizing noise.
    Magic {
        #[arg(long)]
        p: f64,
    },
}

#[derive(Args)]
#[command(group(clap::ArgGroup::new("source").required(true)))]
struct SynthArgs {
    /// Encoder block of a registry code (decoder with --decoder).
    #[arg(long, group = "source")]
    code: Option<String>,
    /// Choi block of a circuit: a name (cz, cnot, h, ...) or `h 0; cz 0 1`.
    #[arg(long, group = "source")]
    circuit: Option<String>,
    /// Code switch `from:to`.
    #[arg(long, group = "source")]
    switch: Option<String>,
    /// Error-correction block of a code.
    #[arg(long, group = "source")]
    ec: Option<String>,
    /// Rotation gadget about `x` or `z`.
    #[arg(long, group = "source")]
    gadget: Option<String>,
    #[arg(long, requires = "code")]
    decoder: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the graph-state form as DOT.
    #[arg(long)]
    dot: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    pipeline: PathBuf,
    #[arg(long)]
    seed: u64,
    /// Write the transcript here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Copy, Clone, ValueEnum)]
enum ScenarioArg {
    Memory,
    EqualNoise,
    Communication,
}

#[derive(Args)]
#[command(group(clap::ArgGroup::new("pcode").required(true)))]
struct ThresholdArgs {
    #[arg(long, group = "pcode")]
    code: Option<String>,
    /// Derive p_Code by exact enumeration instead of using the stored value.
    #[arg(long, requires = "code")]
    derive: bool,
    #[arg(long, group = "pcode")]
    p_code: Option<f64>,
    /// Print the full constants table instead.
    #[arg(long, group = "pcode")]
    table: bool,
    #[arg(long, value_enum, default_value = "memory")]
    scenario: ScenarioArg,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    code: String,
    /// Grid `start:stop:step` or a single value.
    #[arg(long)]
    p: String,
    #[arg(long, default_value_t = 1.0)]
    q: f64,
    /// Trial count; scientific notation such as `1e5` is accepted.
    #[arg(long, value_parser = parse_trials)]
    trials: u64,
    #[arg(long)]
    seed: u64,
    /// Worker threads (default: available parallelism).
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_trials(s: &str) -> Result<u64, String> {
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if v < 1.0 || v.fract() != 0.0 || v > u64::MAX as f64 {
        return Err(format!("trials must be a positive integer, got `{s}`"));
    }
    Ok(v as u64)
}

fn write_or_print(path: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn parse_circuit(s: &str) -> anyhow::Result<CliffordCircuit> {
    if let Some(c) = CliffordCircuit::named(s) {
        return Ok(c);
    }
    Ok(s.parse()?)
}

fn synth(args: SynthArgs) -> anyhow::Result<()> {
    let block = if let Some(name) = &args.code {
        let code = get_code(name)?;
        if args.decoder {
            decoder_block(code)?
        } else {
            encoder_block(code)?
        }
    } else if let Some(c) = &args.circuit {
        let circ = parse_circuit(c)?;
        choi_state(&circ, circ.width())?
    } else if let Some(s) = &args.switch {
        let (a, b) = s.split_once(':').context("--switch expects from:to")?;
        code_switch_block(get_code(a)?, get_code(b)?)?
    } else if let Some(c) = &args.ec {
        ec_block(get_code(c)?)?
    } else if let Some(axis) = &args.gadget {
        match axis.as_str() {
            "x" => rotation_gadget(Axis::X).block,
            "z" => rotation_gadget(Axis::Z).block,
            other => bail!(Error::Parse(format!("unknown gadget axis `{other}`"))),
        }
    } else {
        unreachable!("clap requires a source")
    };
    let json = serde_json::to_string_pretty(&block.to_json())? + "\n";
    match &args.out {
        Some(p) => std::fs::write(p, &json).with_context(|| format!("writing {}", p.display()))?,
        None => print!("{json}"),
    }
    if let Some(p) = &args.dot {
        std::fs::write(p, block.to_dot()).with_context(|| format!("writing {}", p.display()))?;
    }
    let summary = format!(
        "{}: {} qubits (in {}, out {}, open {}), minimal: {}",
        block.name,
        block.num_qubits(),
        block.in_count(),
        block.out_count(),
        block.open_count(),
        if block.is_minimal() { "yes" } else { "no" }
    );
    if args.out.is_some() {
        println!("{summary}");
    } else {
        eprintln!("{summary}");
    }
    Ok(())
}

/// Rebuild a block from its metadata and compare states.
fn reverify(block: &ResourceBlock) -> anyhow::Result<()> {
    let m = &block.metadata;
    let fresh = match m.kind.as_str() {
        "encoder" => m.encodes.as_deref().map(|c| get_code(c).and_then(encoder_block)),
        "decoder" => m.decodes.as_deref().map(|c| get_code(c).and_then(decoder_block)),
        "choi" => m
            .circuit
            .as_deref()
            .map(|c| c.parse::<CliffordCircuit>().and_then(|c| choi_state(&c, c.width()))),
        "gadget" => m.axis.map(|a| Ok(rotation_gadget(a).block)),
        _ => resolve_block(&block.name).ok().map(Ok),
    };
    if let Some(fresh) = fresh {
        let fresh = fresh?;
        if fresh.ports() != block.ports() || !states_equal(fresh.state(), block.state())? {
            bail!(Error::InvalidState(format!(
                "block `{}` does not match its description",
                block.name
            )));
        }
    }
    Ok(())
}

fn run(args: RunArgs) -> anyhow::Result<()> {
    let text =
        std::fs::read_to_string(&args.pipeline).with_context(|| format!("reading {}", args.pipeline.display()))?;
    let v: serde_json::Value = serde_json::from_str(&text).map_err(Error::from)?;
    let base = args.pipeline.parent();
    let spec = PipelineSpec::from_json(&v, base)?;
    for (k, s) in spec.steps.iter().enumerate() {
        let b = match &s.block {
            StepBlock::Block(b) => b.as_ref(),
            StepBlock::Gadget { gadget, .. } => &gadget.block,
        };
        reverify(b).with_context(|| format!("step {k}"))?;
    }
    let result = run_pipeline(&spec, args.seed)?;
    write_or_print(args.out.as_deref(), &result.transcript())
}

fn threshold(args: ThresholdArgs) -> anyhow::Result<()> {
    if args.table {
        let table: serde_json::Map<String, serde_json::Value> = noise::constants_table()?
            .into_iter()
            .map(|(k, c)| (k, serde_json::to_value(c).expect("constant serializes")))
            .collect();
        let v = serde_json::json!({"format": 1, "constants": table});
        println!("{}", serde_json::to_string_pretty(&v)?);
        return Ok(());
    }
    let scenario = match args.scenario {
        ScenarioArg::Memory => Scenario::Memory,
        ScenarioArg::EqualNoise => Scenario::EqualNoise,
        ScenarioArg::Communication => Scenario::Communication,
    };
    let (name, p_code) = match (&args.code, args.p_code) {
        (Some(c), None) => (Some(c.as_str()), noise::code_p_code(get_code(c)?, args.derive)?),
        (None, Some(v)) => (None, noise::stated_constant(v, "supplied on the command line")),
        _ => unreachable!("clap enforces one p_Code source"),
    };
    let report = noise::threshold_report(name, p_code, scenario)?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}

fn sweep(args: SweepArgs) -> anyhow::Result<()> {
    let code = get_code(&args.code)?;
    let grid = noise::parse_grid(&args.p)?;
    let spec = noise::ec_round_pipeline(code)?;
    let rows = noise::sweep(&spec, &grid, args.q, args.trials, args.seed, args.workers)?;
    write_or_print(args.out.as_deref(), &noise::sweep_csv(&rows))
}

fn magic(p: f64) -> anyhow::Result<()> {
    let r = noise::magic_state_check(p)?;
    println!("{}", serde_json::to_string_pretty(&r)?);
    Ok(())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.chain().find_map(|e| e.downcast_ref::<Error>()) {
        Some(e) if e.is_infeasible() => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Synth(a) => synth(a),
        Command::Run(a) => run(a),
        Command::Threshold(a) => threshold(a),
        Command::Sweep(a) => sweep(a),
        Command::Magic { p } => magic(p),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.chain().any(|c| {
                c.downcast_ref::<Error>()
                    .is_some_and(|e| matches!(e, Error::UnknownCode(_)))
            }) {
                eprintln!("known codes: {}", CODE_NAMES.join(", "));
            }
            ExitCode::from(exit_code(&e))
        }
    }
}
