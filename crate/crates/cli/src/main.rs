use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use klcore::ffield::DEFAULT_BUDGET;
use klcore::report::{emit, exit_code, trace_rows, verify_targets, Format, ReportError, VerifyOptions};
use klcore::spaces::{build_orthogonal_space, build_symplectic_space, build_trace_functional, Family, Profile};
use klcore::symbolic::{derivation_ids, run_derivation, DerivationParams};
use klcore::tracesum::trace_report;
use klcore::varieties::{registry, registry_names};

#[derive(Parser)]
#[command(name = "klverify", version, about = "Recompute Euler characteristics and trace identities by point counting")]
struct Cli {
    /// Worker threads; overrides KLVERIFY_THREADS.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// C, B, D or 2D.
    #[arg(long)]
    family: Option<Family>,
    #[arg(long)]
    n: Option<usize>,
    /// A list or range: 1,2,3 or 1..3.
    #[arg(long, value_parser = parse_ds)]
    d: Option<Ds>,
    /// non-degenerate or degenerate (orthogonal only).
    #[arg(long)]
    profile: Option<Profile>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Maximum number of points enumerated per count.
    #[arg(long, default_value_t = DEFAULT_BUDGET.0)]
    budget: u64,
    #[arg(long, default_value = "json")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Debug)]
struct Ds(Vec<usize>);

fn parse_ds(s: &str) -> Result<Ds, String> {
    let bad = || format!("bad d list {s:?}");
    if let Some((a, b)) = s.split_once("..") {
        let a: usize = a.trim().parse().map_err(|_| bad())?;
        let b: usize = b.trim_start_matches('=').trim().parse().map_err(|_| bad())?;
        if a > b {
            return Err(bad());
        }
        return Ok(Ds((a..=b).collect()));
    }
    s.split(',').map(|x| x.trim().parse().map_err(|_| bad())).collect::<Result<_, _>>().map(Ds)
}

fn parse_list(s: &str) -> Result<Vec<u32>, String> {
    s.split(',').map(|x| x.trim().parse().map_err(|_| format!("bad list {s:?}"))).collect()
}

#[derive(Subcommand)]
enum Command {
    /// Check targets against point counts and the replayed derivations.
    Verify {
        /// Target ids, or "all".
        #[arg(required = true)]
        targets: Vec<String>,
        /// Comma separated primes for the fits.
        #[arg(long, value_parser = parse_list)]
        primes: Option<Vec<u32>>,
        #[command(flatten)]
        common: Common,
    },
    /// Exact character sums and the identities between them.
    Trace {
        #[arg(long)]
        p: u32,
        /// Comma separated x values; all of F_p^x when absent.
        #[arg(long, value_parser = parse_list)]
        x: Option<Vec<u32>>,
        #[command(flatten)]
        common: Common,
    },
    /// List the named loci of a space, or print one as JSON.
    Registry {
        name: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Replay a derivation and print its trace.
    Derivation {
        /// Derivation id; lists the ids when absent.
        id: Option<String>,
        #[arg(long)]
        m: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
}

enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<ReportError> for Failure {
    fn from(e: ReportError) -> Self {
        match e {
            ReportError::UnknownTarget(_) | ReportError::Usage(_) => Failure::Usage(e.to_string()),
            ReportError::Space(_) | ReportError::Symbolic(_) => Failure::Usage(e.to_string()),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

fn write_out(common: &Common, text: &str) -> Result<(), Failure> {
    match &common.out {
        Some(path) => fs::write(path, text).map_err(|e| Failure::Runtime(format!("{}: {e}", path.display()))),
        None => {
            let mut out = io::stdout().lock();
            let written = out.write_all(text.as_bytes()).and_then(|_| if text.ends_with('\n') { Ok(()) } else { out.write_all(b"\n") });
            match written {
                Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(Failure::Runtime(format!("stdout: {e}"))),
                _ => Ok(()),
            }
        }
    }
}

#[derive(Serialize)]
struct Invocation<'a> {
    command: &'a str,
    targets: &'a [String],
    options: &'a VerifyOptions,
}

fn one_d(common: &Common) -> Result<usize, Failure> {
    match common.d.as_ref().map(|d| d.0.as_slice()) {
        Some([d]) => Ok(*d),
        _ => Err(Failure::Usage("exactly one --d is needed".into())),
    }
}

fn space_of(common: &Common) -> Result<klcore::spaces::GradedSpace, Failure> {
    let d = one_d(common)?;
    let family = common.family.unwrap_or(Family::C);
    let built = match family {
        Family::C => {
            if common.profile.is_some() {
                return Err(Failure::Usage("--profile applies to orthogonal families".into()));
            }
            build_symplectic_space(common.n.unwrap_or(2 * d), d)
        }
        f => build_orthogonal_space(f, common.n.unwrap_or_else(|| klcore::report::default_orthogonal_n(f, d)), d, common.profile),
    };
    built.map_err(|e| Failure::Usage(e.to_string()))
}

fn run(command: Command) -> Result<i32, Failure> {
    match command {
        Command::Verify { targets, primes, common } => {
            let opts = VerifyOptions {
                family: common.family,
                n: common.n,
                d: common.d.clone().map(|d| d.0).unwrap_or_default(),
                profile: common.profile,
                primes,
                seed: common.seed,
                budget: common.budget,
            };
            let rows = verify_targets(&targets, &opts)?;
            let inv = Invocation { command: "verify", targets: &targets, options: &opts };
            write_out(&common, &emit(&rows, common.format, Some(&inv)))?;
            Ok(exit_code(&rows))
        }
        Command::Trace { p, x, common } => {
            if p == 2 {
                return Err(Failure::Usage("p must be odd".into()));
            }
            let space = space_of(&common)?;
            let phi = build_trace_functional(&space, common.seed, p).map_err(|e| Failure::Usage(e.to_string()))?;
            let report = trace_report(&space, &phi, x.as_deref().unwrap_or(&[]), klcore::ffield::Budget(common.budget))
                .map_err(|e| Failure::Usage(e.to_string()))?;
            let text = match common.format {
                Format::Json => report.to_json(),
                f => emit::<()>(&trace_rows(&report), f, None),
            };
            write_out(&common, &text)?;
            Ok(if report.passed() { 0 } else { 1 })
        }
        Command::Registry { name, common } => {
            let space = space_of(&common)?;
            let text = match name {
                None => registry_names(&space).join("\n"),
                Some(name) => {
                    let spec = registry(&space, &name).map_err(|e| Failure::Usage(e.to_string()))?;
                    serde_json::to_string_pretty(&spec).expect("spec serializes")
                }
            };
            write_out(&common, &text)?;
            Ok(0)
        }
        Command::Derivation { id: None, common, .. } => {
            write_out(&common, &derivation_ids().join("\n"))?;
            Ok(0)
        }
        Command::Derivation { id: Some(id), m, common } => {
            let d = one_d(&common)?;
            let family = common.family.unwrap_or(Family::C);
            let mut params = match family {
                Family::C => DerivationParams::symplectic(d),
                f => DerivationParams::orthogonal(f, d, common.profile.unwrap_or(Profile::NonDegenerate)),
            };
            params.n = common.n;
            params.m = m;
            let expr = run_derivation(&id, &params).map_err(|e| Failure::Usage(e.to_string()))?;
            let text = match common.format {
                Format::Markdown => expr.to_markdown(&id),
                _ => expr.to_json(),
            };
            write_out(&common, &text)?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = match cli.threads {
        Some(t) => Some(t),
        None => match std::env::var("KLVERIFY_THREADS") {
            Ok(v) => match v.trim().parse() {
                Ok(t) => Some(t),
                Err(_) => {
                    eprintln!("klverify: KLVERIFY_THREADS={v:?} is not a thread count");
                    return ExitCode::from(2);
                }
            },
            Err(_) => None,
        },
    };
    if let Some(t) = threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("klverify: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli.command) {
        Ok(code) => ExitCode::from(code as u8),
        Err(Failure::Usage(msg)) => {
            eprintln!("klverify: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("klverify: {msg}");
            ExitCode::from(1)
        }
    }
}
