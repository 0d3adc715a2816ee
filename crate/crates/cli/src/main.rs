use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use tracerec::eval::{run_experiment, trial_input, trial_traces, write_csv, Algorithm, ExperimentConfig};
use tracerec::multi::ml_exhaustive_traces;
use tracerec::single::{ml_exhaustive, posterior_single};
use tracerec::verify::{run_suite, Suite};
use tracerec::{Alphabet, BitSeq, GradAscentConfig, PriorVec};

/// Trace reconstruction for the binary deletion channel.
#[derive(Parser, Debug)]
#[command(name = "tracerec", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Draw traces of random (or given) inputs through the deletion channel.
    Simulate(SimulateArgs),
    /// Print Pr(X_i = 1 | trace) for each position, one per line.
    Posterior(PosteriorArgs),
    /// Estimate the input from one or more traces.
    Reconstruct(ReconstructArgs),
    /// Run a Monte Carlo benchmark described by a key=value config file.
    Benchmark(BenchmarkArgs),
    /// Check the algorithms against brute-force oracles.
    Verify(VerifyArgs),
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    delta: f64,
    #[arg(long)]
    t: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Inputs, one per line; each line is one trial. Random inputs otherwise.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Number of random inputs when no --input is given.
    #[arg(long, default_value_t = 1)]
    trials: usize,
}

#[derive(Args, Debug)]
struct PosteriorArgs {
    #[arg(long)]
    trace: String,
    #[arg(long)]
    n: usize,
    /// Whitespace-separated prior probabilities, uniform if absent.
    #[arg(long)]
    priors: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ReconstructArgs {
    /// smapexact, smapseq, indcomb, gradasc, bma, mlexhaustive, smap1 or coordswitch.
    #[arg(long)]
    algo: String,
    #[arg(long)]
    n: usize,
    /// A trace; repeat for several.
    #[arg(long)]
    trace: Vec<String>,
    /// File with one trace per line.
    #[arg(long)]
    traces: Option<PathBuf>,
    #[arg(long, default_value_t = 0.01)]
    epsilon: f64,
    #[arg(long, default_value_t = 100)]
    max_iters: usize,
    #[arg(long, default_value_t = 1e-3)]
    conv_rel_tol: f64,
}

#[derive(Args, Debug)]
struct BenchmarkArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value = "results.csv")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long, default_value = "all")]
    suite: String,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

type CliResult<T> = Result<T, String>;

fn read_file(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))
}

/// One sequence per line. A line holding only `-` is the empty sequence, so
/// that simulated output can separate trials with blank lines.
fn parse_line(line: &str) -> CliResult<BitSeq> {
    let line = line.trim();
    if line == "-" {
        return Ok(BitSeq::empty());
    }
    BitSeq::parse_binary(line).map_err(|e| format!("{line:?}: {e}"))
}

fn render(s: &BitSeq) -> String {
    if s.is_empty() {
        "-".to_string()
    } else {
        s.render(&Alphabet::binary())
    }
}

fn simulate(args: &SimulateArgs, out: &mut impl Write) -> CliResult<()> {
    if !(0.0..1.0).contains(&args.delta) {
        return Err(format!("delta must be in [0, 1), got {}", args.delta));
    }
    if args.t == 0 {
        return Err("t must be at least 1".into());
    }
    let inputs: Vec<BitSeq> = match &args.input {
        Some(path) => {
            let text = read_file(path)?;
            let xs = text
                .lines()
                .filter(|l| !l.trim().is_empty())
                .map(parse_line)
                .collect::<CliResult<Vec<_>>>()?;
            if let Some(x) = xs.iter().find(|x| x.len() != args.n) {
                return Err(format!("input {} has length {}, expected --n {}", render(x), x.len(), args.n));
            }
            xs
        }
        None => (0..args.trials).map(|k| trial_input(args.seed, k, args.n)).collect(),
    };
    for (k, x) in inputs.iter().enumerate() {
        if k > 0 {
            writeln!(out).map_err(|e| e.to_string())?;
        }
        for y in trial_traces(args.seed, 0, k, x, args.delta, args.t) {
            writeln!(out, "{}", render(&y)).map_err(|e| e.to_string())?;
        }
    }
    Ok(())
}

fn read_priors(path: &Path, n: usize) -> CliResult<PriorVec> {
    let probs = read_file(path)?
        .split_whitespace()
        .map(|s| s.parse::<f64>().map_err(|_| format!("bad prior {s:?}")))
        .collect::<CliResult<Vec<_>>>()?;
    if probs.len() != n {
        return Err(format!("{} priors given for --n {n}", probs.len()));
    }
    PriorVec::new(probs).map_err(|e| e.to_string())
}

fn posterior(args: &PosteriorArgs, out: &mut impl Write) -> CliResult<()> {
    let y = parse_line(&args.trace)?;
    let p = match &args.priors {
        Some(path) => read_priors(path, args.n)?,
        None => PriorVec::uniform(args.n),
    };
    let q = posterior_single(&p, &y).map_err(|e| e.to_string())?;
    for v in q.probs() {
        writeln!(out, "{v}").map_err(|e| e.to_string())?;
    }
    Ok(())
}

fn collect_traces(args: &ReconstructArgs) -> CliResult<Vec<BitSeq>> {
    if !args.trace.is_empty() {
        if args.traces.is_some() {
            log::warn!("both --trace and --traces given; using the inline traces");
        }
        return args.trace.iter().map(|s| parse_line(s)).collect();
    }
    match &args.traces {
        Some(path) => read_file(path)?
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(parse_line)
            .collect(),
        None => Err("no traces: pass --trace or --traces".into()),
    }
}

fn reconstruct(args: &ReconstructArgs, out: &mut impl Write) -> CliResult<()> {
    let algo: Algorithm = args.algo.parse().map_err(|e: tracerec::Error| e.to_string())?;
    let traces = collect_traces(args)?;
    let grad = GradAscentConfig::new(args.epsilon, args.max_iters, args.conv_rel_tol).map_err(|e| e.to_string())?;
    let single = matches!(algo, Algorithm::Smap1 | Algorithm::CoordSwitch);
    if single && traces.len() > 1 {
        log::warn!("{algo} uses only the first of {} traces", traces.len());
    }
    let estimates: Vec<BitSeq> = match algo {
        // print every maximiser
        Algorithm::MlExhaustive if traces.len() == 1 => {
            ml_exhaustive(args.n, &traces[0]).map_err(|e| e.to_string())?.argmax
        }
        Algorithm::MlExhaustive => ml_exhaustive_traces(args.n, &traces).map_err(|e| e.to_string())?.argmax,
        _ => vec![algo.run(args.n, &traces, &grad).map_err(|e| e.to_string())?],
    };
    for x in &estimates {
        writeln!(out, "{}", render(x)).map_err(|e| e.to_string())?;
    }
    Ok(())
}

fn benchmark(args: &BenchmarkArgs) -> CliResult<()> {
    let cfg = ExperimentConfig::parse(&read_file(&args.config)?).map_err(|e| e.to_string())?;
    let rows = run_experiment(&cfg).map_err(|e| e.to_string())?;
    let file = fs::File::create(&args.out).map_err(|e| format!("cannot create {}: {e}", args.out.display()))?;
    write_csv(&rows, io::BufWriter::new(file)).map_err(|e| e.to_string())?;
    eprintln!("wrote {} rows to {}", rows.len(), args.out.display());
    Ok(())
}

fn verify(args: &VerifyArgs, out: &mut impl Write) -> CliResult<bool> {
    let suite: Suite = args.suite.parse().map_err(|e: tracerec::Error| e.to_string())?;
    let checks = run_suite(suite, args.seed).map_err(|e| e.to_string())?;
    for c in &checks {
        writeln!(out, "{c}").map_err(|e| e.to_string())?;
    }
    Ok(checks.iter().all(|c| c.passed()))
}

fn main() -> ExitCode {
    env_logger::Builder::new()
        .filter_level(log::LevelFilter::Warn)
        .format_timestamp(None)
        .init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let result = match &cli.command {
        Command::Simulate(a) => simulate(a, &mut out),
        Command::Posterior(a) => posterior(a, &mut out),
        Command::Reconstruct(a) => reconstruct(a, &mut out),
        Command::Benchmark(a) => benchmark(a),
        Command::Verify(a) => match verify(a, &mut out) {
            Ok(true) => Ok(()),
            Ok(false) => return ExitCode::from(2),
            Err(e) => Err(e),
        },
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
