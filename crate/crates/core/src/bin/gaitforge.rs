use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use gaitforge::harness::{
    append_csv, dump_replay, emit_csv, evaluate, evaluate_parallel, record_buffer, run_cpg, serve_policy, verify_buffer, CpgPolicy,
    EvalReport, ExternPolicy, TransitionBuffer, ZeroPolicy, DEFAULT_TRANSITIONS,
};
use gaitforge::model::{load_morphology, BUILTIN_NAMES, CONFIG_DIR_ENV};
use gaitforge::{MorphologySpec, Result};

#[derive(Parser)]
#[command(name = "gaitforge", version, about = "Legged-locomotion environments, CPG demonstrators and prior-data buffers")]
#[command(
    after_help = "Morphologies are looked up as <name>.toml in $GAITFORGE_CONFIG_DIR first, then among the built-ins; a path to a TOML file also works."
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Roll the CPG demonstrator and write a report CSV
    RunCpg {
        #[arg(long)]
        morph: String,
        #[arg(long, default_value_t = 5)]
        episodes: usize,
        /// Comma-separated seeds; missing ones continue after the largest
        #[arg(long, value_delimiter = ',')]
        seeds: Vec<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write one row per episode
        #[arg(long)]
        per_seed: bool,
    },
    /// Record CPG transitions into a prior-data buffer
    Record {
        #[arg(long)]
        morph: String,
        #[arg(long, default_value_t = DEFAULT_TRANSITIONS)]
        transitions: usize,
        #[arg(long, value_delimiter = ',')]
        seeds: Vec<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate a policy with deterministic rollouts (seeds 0..episodes)
    Eval {
        #[arg(long)]
        morph: String,
        #[arg(long, value_enum, default_value_t = PolicyKind::Cpg)]
        policy: PolicyKind,
        #[arg(long, default_value_t = 10)]
        episodes: usize,
        /// External action server command (with --policy extern)
        #[arg(long = "cmd", num_args = 1.., allow_hyphen_values = true)]
        command: Vec<String>,
        /// Append the aggregate row to this CSV
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Replay a buffer from its seeds and stored actions and check every field
    VerifyBuffer {
        file: PathBuf,
        /// Morphology to check against (defaults to the one named in the file)
        #[arg(long)]
        morph: Option<String>,
    },
    /// Write per-step body poses of one CPG rollout as JSON lines
    DumpReplay {
        #[arg(long)]
        morph: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = PolicyKind::Cpg)]
        policy: PolicyKind,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print a morphology as TOML (a starting point for custom configs)
    ExportSpec {
        #[arg(long)]
        morph: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the built-in morphologies with their dimensions
    List,
    /// Answer the action protocol on stdin/stdout with a constant action (reference server)
    ServeConstant {
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        value: f64,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PolicyKind {
    Cpg,
    Zero,
    Extern,
}

fn print_report(r: &EvalReport) {
    println!("morphology        {}", r.morphology);
    println!("policy            {}", r.policy);
    println!("episodes          {}", r.len());
    println!("mean return       {:.4}", r.mean_return());
    println!("std return (pop.) {:.4}", r.std_return());
    println!("mean displacement {:.4} m", r.mean_displacement());
    println!("gait compliance   {:.4}", r.compliance_rate());
    println!("steps in v band   {:.4}", r.band_rate());
    println!("survival rate     {:.4}", r.survival_rate());
    for e in &r.episodes {
        println!(
            "  seed {:>4}  return {:>10.4}  length {:>5}  displacement {:>8.3}  {}",
            e.seed,
            e.ret,
            e.length,
            e.displacement,
            if e.terminated { "terminated" } else { "horizon" }
        );
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Cmd::RunCpg { morph, episodes, seeds, out, per_seed } => {
            let spec = load_morphology(&morph)?;
            let report = run_cpg(&spec, episodes, &seeds)?;
            print_report(&report);
            if let Some(path) = out {
                emit_csv(&report.csv_rows(per_seed), &path)?;
                println!("wrote {}", path.display());
            }
        }
        Cmd::Record { morph, transitions, seeds, out } => {
            let spec = load_morphology(&morph)?;
            let buf = record_buffer(&spec, transitions, &seeds)?;
            buf.write(&out)?;
            println!(
                "wrote {} transitions from {} episodes to {} (+ {})",
                buf.len(),
                buf.meta.seeds.len(),
                out.display(),
                TransitionBuffer::sidecar_path(&out).display()
            );
        }
        Cmd::Eval { morph, policy, episodes, command, out } => {
            let spec = load_morphology(&morph)?;
            let report = match policy {
                PolicyKind::Cpg => evaluate_parallel(&spec, episodes, &[], || CpgPolicy)?,
                PolicyKind::Zero => evaluate_parallel(&spec, episodes, &[], || ZeroPolicy)?,
                PolicyKind::Extern => {
                    let (program, args) = command
                        .split_first()
                        .ok_or_else(|| gaitforge::Error::InvalidInput("--policy extern needs --cmd <program> [args..]".into()))?;
                    let mut p = ExternPolicy::spawn(program, args, &spec)?;
                    evaluate(&spec, &mut p, episodes)?
                }
            };
            print_report(&report);
            if let Some(path) = out {
                append_csv(&report.csv_rows(false), &path)?;
            }
        }
        Cmd::VerifyBuffer { file, morph } => {
            let buf = TransitionBuffer::read(&file)?;
            let spec: MorphologySpec = load_morphology(morph.as_deref().unwrap_or(&buf.meta.morphology))?;
            let v = verify_buffer(&buf, &spec)?;
            println!(
                "ok: {} transitions in {} episodes of `{}`; max |Δreward| {:e}, max |Δobs| {:e}{}",
                v.transitions,
                v.episodes,
                buf.meta.morphology,
                v.max_reward_error,
                v.max_obs_error,
                if buf.meta.truncated_final_episode { " (final episode cut short)" } else { "" }
            );
        }
        Cmd::DumpReplay { morph, seed, policy, out } => {
            let spec = load_morphology(&morph)?;
            let w = BufWriter::new(File::create(&out)?);
            let n = match policy {
                PolicyKind::Cpg => dump_replay(&spec, &mut CpgPolicy, seed, w)?,
                PolicyKind::Zero => dump_replay(&spec, &mut ZeroPolicy, seed, w)?,
                PolicyKind::Extern => return Err(gaitforge::Error::InvalidInput("dump-replay supports cpg and zero".into())),
            };
            println!("wrote {n} frames to {}", out.display());
        }
        Cmd::ExportSpec { morph, out } => {
            let text = load_morphology(&morph)?.to_toml();
            match out {
                Some(path) => std::fs::write(path, text)?,
                None => print!("{text}"),
            }
        }
        Cmd::List => {
            if let Ok(dir) = std::env::var(CONFIG_DIR_ENV) {
                println!("config dir: {dir}");
            }
            for name in BUILTIN_NAMES {
                let spec = load_morphology(name)?;
                println!("{:8} legs {}  n_u {:2}  bodies {:2}  obs {}", spec.name, spec.n_legs, spec.n_u, spec.n_body, spec.obs_dim());
            }
        }
        Cmd::ServeConstant { value } => {
            let served = serve_constant(value)?;
            eprintln!("served {served} actions");
        }
    }
    Ok(())
}

/// Answers with `value` on every actuator; the action width comes from HELLO.
fn serve_constant(value: f64) -> Result<usize> {
    let stdin = std::io::stdin().lock();
    let stdout = BufWriter::new(std::io::stdout().lock());
    serve_policy(stdin, stdout, move |n_u, _obs| vec![value; n_u])
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
