//! Command-line interface: learn, sample, entropy, compare, describe.
//!
//! Exit codes: 0 success, 1 usage error, 2 file or format error,
//! 3 validation or resource error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use kutato::entropy::{brute_force_entropy, empirical_network_entropy, network_entropy};
use kutato::estimation::EstimationMode;
use kutato::evalcmp::{cpt_max_abs_error, distribution_kl, structural_diff};
use kutato::formats::{
    read_cases, read_network, write_cases_file, write_network_file, write_trace_file, FormatError,
};
use kutato::learner::{kutato_learn, LearnConfig, VariableOrder};
use kutato::sampling::{logic_sample, SampleSpec};

const EXIT_USAGE: u8 = 1;
const EXIT_FILE: u8 = 2;
const EXIT_VALIDATION: u8 = 3;

#[derive(Parser)]
#[command(
    name = "kutato",
    about = "Entropy-driven belief-network learning, sampling, and comparison",
    version,
    disable_help_subcommand = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Learn a network from a case CSV.
    Learn(LearnArgs),
    /// Draw cases from a network by logic sampling.
    Sample(SampleArgs),
    /// Print a network's entropy, per node and total.
    Entropy(EntropyArgs),
    /// Compare a learned network against a reference.
    Compare(CompareArgs),
    /// Summarize a network file.
    Describe(DescribeArgs),
}

#[derive(Args)]
struct LearnArgs {
    /// Case CSV to learn from.
    #[arg(long)]
    data: PathBuf,
    /// Total order on variables: comma-separated names, @file, or "random"
    /// (with --seed).
    #[arg(long, group = "direction")]
    order: Option<String>,
    /// Let the learner orient arcs itself.
    #[arg(long, group = "direction")]
    learn_directions: bool,
    /// Significance level for accepting an arc.
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, value_enum, default_value_t = EstimatorArg::Dirichlet)]
    estimator: EstimatorArg,
    /// Cap on parents per node.
    #[arg(long)]
    max_parents: Option<usize>,
    /// Minimum entropy decrease the best candidate must achieve.
    #[arg(long, default_value_t = 0.0)]
    min_delta: f64,
    /// Seed for --order random.
    #[arg(long)]
    seed: Option<u64>,
    /// Output network file.
    #[arg(long)]
    out: PathBuf,
    /// Optional trace TSV.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long)]
    net: PathBuf,
    /// Number of cases to draw.
    #[arg(long)]
    n: usize,
    #[arg(long)]
    seed: u64,
    /// Output case CSV.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EntropyArgs {
    #[arg(long)]
    net: PathBuf,
    /// Also compute the full-joint entropy and report the difference.
    #[arg(long)]
    brute_force: bool,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long)]
    learned: PathBuf,
    #[arg(long)]
    reference: PathBuf,
    /// Also report KL divergence (and max CPT error when structures match).
    #[arg(long)]
    kl: bool,
}

#[derive(Args)]
struct DescribeArgs {
    #[arg(long)]
    net: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum EstimatorArg {
    Dirichlet,
    Ml,
}

impl From<EstimatorArg> for EstimationMode {
    fn from(arg: EstimatorArg) -> Self {
        match arg {
            EstimatorArg::Dirichlet => EstimationMode::Dirichlet,
            EstimatorArg::Ml => EstimationMode::MaximumLikelihood,
        }
    }
}

struct CmdError {
    code: u8,
    message: String,
}

impl CmdError {
    fn usage(message: impl Into<String>) -> Self {
        CmdError {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    fn validation(message: impl Into<String>) -> Self {
        CmdError {
            code: EXIT_VALIDATION,
            message: message.into(),
        }
    }
}

impl From<FormatError> for CmdError {
    fn from(err: FormatError) -> Self {
        let code = match err {
            FormatError::Validation(_) => EXIT_VALIDATION,
            _ => EXIT_FILE,
        };
        CmdError {
            code,
            message: err.to_string(),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // Help and version requests are not errors.
            use clap::error::ErrorKind;
            if matches!(err.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{err}");
                return ExitCode::SUCCESS;
            }
            eprint!("{err}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let result = match cli.command {
        Command::Learn(args) => cmd_learn(args),
        Command::Sample(args) => cmd_sample(args),
        Command::Entropy(args) => cmd_entropy(args),
        Command::Compare(args) => cmd_compare(args),
        Command::Describe(args) => cmd_describe(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", err.message);
            ExitCode::from(err.code)
        }
    }
}

fn resolve_order(
    spec: &str,
    seed: Option<u64>,
    variable_names: &[String],
) -> Result<Vec<String>, CmdError> {
    if spec == "random" {
        let seed = seed.ok_or_else(|| CmdError::usage("--order random requires --seed"))?;
        let mut names = variable_names.to_vec();
        names.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        return Ok(names);
    }
    if let Some(path) = spec.strip_prefix('@') {
        let text = std::fs::read_to_string(path).map_err(|e| CmdError {
            code: EXIT_FILE,
            message: format!("{path}: {e}"),
        })?;
        return Ok(text.split_whitespace().map(str::to_string).collect());
    }
    Ok(spec
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_string)
        .collect())
}

fn cmd_learn(args: LearnArgs) -> Result<(), CmdError> {
    let db = read_cases(&args.data)?;
    let variable_names: Vec<String> = db
        .variables()
        .iter()
        .map(|v| v.name().to_string())
        .collect();

    let order = match (&args.order, args.learn_directions) {
        (Some(spec), false) => VariableOrder::Given(resolve_order(spec, args.seed, &variable_names)?),
        (None, true) => VariableOrder::LearnDirections,
        _ => return Err(CmdError::usage("exactly one of --order / --learn-directions")),
    };
    if !(0.0..1.0).contains(&args.alpha) || args.alpha <= 0.0 {
        return Err(CmdError::usage("--alpha must lie in (0, 1)"));
    }

    let config = LearnConfig {
        order,
        alpha: args.alpha,
        mode: args.estimator.into(),
        max_parents: args.max_parents,
        min_delta: args.min_delta,
        parallel: false,
    };
    let (net, trace) = kutato_learn(&db, &config).map_err(|e| CmdError::validation(e.to_string()))?;

    write_network_file(&args.out, &net)?;
    if let Some(path) = &args.trace {
        write_trace_file(path, &trace, net.variables())?;
    }

    println!("arcs added: {}", trace.steps.len());
    match empirical_network_entropy(&net, &db, config.mode) {
        Ok(report) => println!("final entropy: {:.6} nats", report.total),
        Err(_) => println!("final entropy: n/a (some family has no complete rows)"),
    }
    println!("halt: {}", trace.halt_reason);
    Ok(())
}

fn cmd_sample(args: SampleArgs) -> Result<(), CmdError> {
    let net = read_network(&args.net)?;
    let db = logic_sample(
        &net,
        &SampleSpec {
            n_cases: args.n,
            seed: args.seed,
        },
    );
    write_cases_file(&args.out, &db)?;
    println!("wrote {} cases", db.num_rows());
    Ok(())
}

fn cmd_entropy(args: EntropyArgs) -> Result<(), CmdError> {
    let net = read_network(&args.net)?;
    let report = network_entropy(&net).map_err(|e| CmdError::validation(e.to_string()))?;
    for (x, h) in report.per_node.iter().enumerate() {
        println!("{}: {:.6}", net.variable(x).name(), h);
    }
    println!("total: {:.6} nats", report.total);
    if args.brute_force {
        let oracle = brute_force_entropy(&net).map_err(|e| CmdError::validation(e.to_string()))?;
        println!("brute-force: {:.6} nats", oracle);
        println!("difference: {:.2e}", (report.total - oracle).abs());
    }
    Ok(())
}

fn cmd_compare(args: CompareArgs) -> Result<(), CmdError> {
    let learned = read_network(&args.learned)?;
    let reference = read_network(&args.reference)?;
    let diff = structural_diff(&learned, &reference)
        .map_err(|e| CmdError::validation(e.to_string()))?;

    let arc_name = |&(f, t): &(usize, usize)| {
        format!(
            "{} -> {}",
            reference.variable(f).name(),
            reference.variable(t).name()
        )
    };
    for arc in &diff.missing {
        println!("missing: {}", arc_name(arc));
    }
    for arc in &diff.extra {
        println!("extra: {}", arc_name(arc));
    }
    for arc in &diff.reversed {
        println!("reversed: {}", arc_name(arc));
    }
    println!(
        "counts: missing {} extra {} reversed {}",
        diff.missing.len(),
        diff.extra.len(),
        diff.reversed.len()
    );

    if args.kl {
        if diff.is_empty() {
            let err = cpt_max_abs_error(&learned, &reference)
                .map_err(|e| CmdError::validation(e.to_string()))?;
            println!("max cpt error: {:.6}", err);
        } else {
            println!("max cpt error: n/a (structures differ)");
        }
        let kl = distribution_kl(&learned, &reference)
            .map_err(|e| CmdError::validation(e.to_string()))?;
        println!("kl divergence: {:.6} nats", kl);
    }
    Ok(())
}

fn cmd_describe(args: DescribeArgs) -> Result<(), CmdError> {
    let net = read_network(&args.net)?;
    if net.num_variables() == 0 {
        return Err(CmdError::validation("network has no variables"));
    }
    println!("network: {}", net.name());
    println!("nodes: {}", net.num_variables());
    println!("arcs: {}", net.num_arcs());
    let joint_size = net
        .arities()
        .iter()
        .fold(BigUint::from(1u32), |acc, &a| acc * BigUint::from(a));
    println!("joint size: {joint_size}");
    for x in 0..net.num_variables() {
        let parent_names: Vec<&str> = net
            .parents(x)
            .iter()
            .map(|&p| net.variable(p).name())
            .collect();
        println!(
            "{} ({} values){}{}",
            net.variable(x).name(),
            net.arity(x),
            if parent_names.is_empty() { "" } else { " <- " },
            parent_names.join(" ")
        );
    }
    Ok(())
}
