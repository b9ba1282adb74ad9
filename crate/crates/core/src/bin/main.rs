use std::io::Read as _;
use std::net::{IpAddr, SocketAddr};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use amoebot_le::engine::{self, RunOptions, Strategy, Trace};
use amoebot_le::modelcheck::{self, ExploreOptions, McReport};
use amoebot_le::render::{self, RenderFormat, RenderSpec};
use amoebot_le::verify::{self, CheckReport};
use amoebot_le::{generate_random, Configuration};

const EXIT_CHECK_FAILED: u8 = 1;
const EXIT_USAGE: u8 = 2;

#[derive(Parser)]
#[command(name = "amoebot-le", version, about = "Leader election by movement on the triangular grid")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random connected configuration.
    Gen(GenArgs),
    /// Run the scheduler on a configuration.
    Run(RunArgs),
    /// Replay and verify a trace.
    Check(CheckArgs),
    /// Explore every schedule of small instances.
    Mc(McArgs),
    /// Draw a configuration.
    Render(RenderArgs),
    /// Serve the session API over HTTP.
    Serve(ServeArgs),
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0.0)]
    expanded_frac: f64,
    #[arg(long, default_value_t = 0.0)]
    hole_bias: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    /// Configuration file, or `-` for stdin.
    #[arg(long)]
    config: PathBuf,
    /// random, round-robin, greedy, or scripted:<pid>,<pid>,...
    #[arg(long, default_value = "random")]
    strategy: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = engine::DEFAULT_MAX_STEPS)]
    max_steps: u64,
    /// Check every step and the final configuration.
    #[arg(long)]
    verify: bool,
    #[arg(long)]
    trace_out: Option<PathBuf>,
}

#[derive(Args)]
struct CheckArgs {
    #[arg(long)]
    trace: PathBuf,
}

#[derive(Args)]
#[group(required = true, multiple = false, id = "instances")]
struct McTarget {
    /// Every connected configuration with this many particles.
    #[arg(long)]
    n: Option<usize>,
    /// A single configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct McArgs {
    #[command(flatten)]
    target: McTarget,
    #[arg(long, default_value_t = modelcheck::DEFAULT_BUDGET)]
    budget: usize,
    /// Only contracted starting shapes.
    #[arg(long)]
    contracted_only: bool,
    /// Machine-readable report.
    #[arg(long)]
    json: bool,
    /// Omit passing instances from the text report.
    #[arg(long)]
    failures_only: bool,
}

#[derive(Args)]
struct RenderArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value = "ascii", value_parser = parse_format)]
    format: RenderFormat,
    #[arg(long)]
    no_leaders: bool,
    #[arg(long)]
    no_conditions: bool,
    #[arg(long)]
    no_boundaries: bool,
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long, default_value_t = 8080)]
    port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    host: IpAddr,
}

fn parse_format(s: &str) -> Result<RenderFormat, String> {
    s.parse()
}

/// A failure and its exit code.
struct Failure(u8, String);

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure(EXIT_USAGE, message.into())
    }

    fn check(message: impl Into<String>) -> Self {
        Failure(EXIT_CHECK_FAILED, message.into())
    }
}

fn read_input(path: &PathBuf) -> Result<String, Failure> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| Failure::usage(format!("reading stdin: {e}")))?;
        return Ok(s);
    }
    std::fs::read_to_string(path).map_err(|e| Failure::usage(format!("reading {}: {e}", path.display())))
}

fn load_config(path: &PathBuf) -> Result<Configuration, Failure> {
    Configuration::parse(&read_input(path)?).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn write_output(path: &PathBuf, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| Failure::usage(format!("writing {}: {e}", path.display())))
}

fn cmd_gen(a: GenArgs) -> Result<(), Failure> {
    let config = generate_random(a.n, a.expanded_frac, a.hole_bias, a.seed).map_err(|e| Failure::usage(e.to_string()))?;
    let text = config.to_json_by_pid();
    match a.out {
        Some(path) => write_output(&path, &format!("{text}\n")),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn cmd_run(a: RunArgs) -> Result<(), Failure> {
    let config = load_config(&a.config)?;
    let strategy = Strategy::from_name(&a.strategy, a.seed).map_err(|e| Failure::usage(e.to_string()))?;
    let options = RunOptions {
        max_steps: a.max_steps,
        verify: a.verify,
    };
    let result = engine::run(&config, strategy, options).map_err(|e| match e {
        engine::EngineError::NotActivable { .. } => Failure::check(e.to_string()),
        _ => Failure::usage(e.to_string()),
    })?;
    if let Some(path) = &a.trace_out {
        write_output(path, &result.trace.to_jsonl())?;
    }
    let final_config = &result.final_config;
    let leaders: Vec<String> = verify::leaders(final_config).iter().map(|p| p.to_string()).collect();
    println!("steps: {}", result.trace.events.len());
    println!("stop: {:?}", result.trace.stop);
    println!("leaders: {}", if leaders.is_empty() { "none".into() } else { leaders.join(" ") });
    println!(
        "progress: {}",
        verify::progress_vector_unchecked(final_config, result.trace.boundaries)
    );
    println!("final: {}", final_config.to_json_by_pid());
    if !a.verify {
        return Ok(());
    }
    let mut failed = !result.step_failures.is_empty();
    for (step, report) in result.step_failures.iter().take(20) {
        print!("step {step}: {report}");
    }
    if result.step_failures.len() > 20 {
        println!("... {} failing steps in total", result.step_failures.len());
    }
    match &result.final_report {
        Some(report) => {
            print!("final {report}");
            failed |= !report.passed;
        }
        None => {
            println!("final check: not reached ({:?})", result.trace.stop);
            failed = true;
        }
    }
    if failed {
        Err(Failure::check("verification failed"))
    } else {
        println!("verify: passed");
        Ok(())
    }
}

fn cmd_check(a: CheckArgs) -> Result<(), Failure> {
    let text = read_input(&a.trace)?;
    let trace = Trace::parse_jsonl(&text).map_err(|e| Failure::check(format!("{}: {e}", a.trace.display())))?;
    let configs = trace.replay().map_err(|e| Failure::check(format!("replay failed: {e}")))?;
    let mut report = CheckReport::new();
    for (i, e) in trace.events.iter().enumerate() {
        let step = verify::check_transition(&configs[i], &configs[i + 1], e, trace.boundaries);
        if !step.passed {
            println!("step {}: {step}", e.step);
        }
        report.merge(step);
    }
    let last = configs.last().unwrap();
    if trace.terminal() {
        let fin = verify::check_final_properties(last).expect("replay confirmed the final flag");
        print!("final {fin}");
        report.merge(fin);
    }
    println!("replayed {} steps, stop {:?}", trace.events.len(), trace.stop);
    if report.passed {
        println!("check: passed");
        Ok(())
    } else {
        Err(Failure::check(format!("{} violations", report.violations.len())))
    }
}

fn cmd_mc(a: McArgs) -> Result<(), Failure> {
    let options = ExploreOptions {
        budget: a.budget,
        memoize: true,
    };
    let report = match (a.target.n, a.target.config) {
        (Some(n), None) => {
            if n == 0 || n > modelcheck::MAX_ENUMERATION {
                return Err(Failure::usage(format!(
                    "--n must be between 1 and {}",
                    modelcheck::MAX_ENUMERATION
                )));
            }
            modelcheck::check_all(n, !a.contracted_only, options)
        }
        (None, Some(path)) => {
            let config = load_config(&path)?;
            if config.len() > modelcheck::MAX_SINGLE_INSTANCE {
                return Err(Failure::usage(format!(
                    "single instances are limited to {} particles",
                    modelcheck::MAX_SINGLE_INSTANCE
                )));
            }
            if !config.is_connected() {
                return Err(Failure::usage("configuration is not connected"));
            }
            McReport::from_reports(None, vec![modelcheck::explore(&config, options)])
        }
        _ => unreachable!("clap enforces exactly one target"),
    };
    if a.json {
        println!("{}", report.to_json());
    } else {
        print!("{}", report.to_text(a.failures_only));
    }
    if report.passed() {
        Ok(())
    } else {
        Err(Failure(EXIT_CHECK_FAILED, String::new()))
    }
}

fn cmd_render(a: RenderArgs) -> Result<(), Failure> {
    let config = load_config(&a.config)?;
    let spec = RenderSpec {
        format: a.format,
        leaders: !a.no_leaders,
        conditions: !a.no_conditions,
        boundaries: !a.no_boundaries,
    };
    print!("{}", render::render(&config, &spec));
    Ok(())
}

fn cmd_serve(a: ServeArgs) -> Result<(), Failure> {
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(|e| Failure::usage(e.to_string()))?;
    runtime
        .block_on(amoebot_le::service::http::serve(SocketAddr::new(a.host, a.port)))
        .map_err(|e| Failure::usage(format!("serve: {e}")))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Run(a) => cmd_run(a),
        Command::Check(a) => cmd_check(a),
        Command::Mc(a) => cmd_mc(a),
        Command::Render(a) => cmd_render(a),
        Command::Serve(a) => cmd_serve(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure(code, message)) => {
            if !message.is_empty() {
                eprintln!("error: {message}");
            }
            ExitCode::from(code)
        }
    }
}
