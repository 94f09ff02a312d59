//! `avwc`: batch front end for the channel-uncertainty computations.
//!
//! Exit codes: 0 on success, 1 when a solver fails, 2 on invalid input,
//! 3 when a checked inequality is violated.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use avwc_core::capacity::{cr_capacity_avc, secrecy_capacity_dichotomy, SecrecyOptions, MINIMAX_TOL};
use avwc_core::codes::{robustness_check, AnyCode, WiretapCode, STATE_SEQ_CAP};
use avwc_core::info::{channel_distance, directed_family_distance, family_distance, uncertainty_distance};
use avwc_core::scenarios::{self, discontinuity_sweep, linear_grid, sweep_to_csv};
use avwc_core::suites::{rows_to_csv, run_suite, violations, Suite};
use avwc_core::symmetrize::{guaranteed_radius, min_f, verify_symmetrizer, Symmetrizer};
use avwc_core::{Channel, ChannelFamily, Error, WiretapUncertainty};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

#[derive(Parser, Debug)]
#[command(name = "avwc", version, about = "Distances, symmetrizability, capacities and robustness checks for wiretap channel families")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Duality-gap tolerance of the minimax capacity solver.
    #[arg(long, global = true, default_value_t = MINIMAX_TOL)]
    tol: f64,

    /// Write the primary output here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Output format; `sweep` and `verify` default to csv, the rest to json.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Upper limit on enumerated state sequences.
    #[arg(long, global = true, default_value_t = STATE_SEQ_CAP as u64)]
    cap: u64,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Distance between two channels, families or wiretap files of the same kind.
    Distance { a: PathBuf, b: PathBuf },
    /// Symmetrizability verdict for a family (or the legitimate side of a wiretap file).
    Symcheck { input: PathBuf },
    /// CR capacity of a family, or the secrecy capacities of a wiretap file.
    Capacity { input: PathBuf },
    /// Symmetrizability and capacities of the λ-family along a grid.
    Sweep {
        /// Grid as start:stop:step.
        #[arg(long, default_value = "0:1:0.02")]
        grid: String,
    },
    /// Randomized inequality checks.
    Verify {
        /// Suite name or `all`.
        #[arg(long, default_value = "all")]
        suite: String,
        /// Trials per suite; defaults to each suite's acceptance count.
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Leakage of a code under a family and a perturbed family.
    Robustness { code: PathBuf, v: PathBuf, v_star: PathBuf },
    /// Built-in example channels and their verification residuals.
    Examples,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

enum Failure {
    Core(Error),
    Io(PathBuf, std::io::Error),
    Usage(String),
    Violation(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Core(Error::SolverFailure(_) | Error::NoConvergence { .. }) => 1,
            Failure::Core(_) | Failure::Io(..) | Failure::Usage(_) => 2,
            Failure::Violation(_) => 3,
        }
    }

    fn line(&self) -> String {
        match self {
            Failure::Core(e) => format!("ERROR {}: {e}", e.kind()),
            Failure::Io(path, e) => format!("ERROR io: {}: {e}", path.display()),
            Failure::Usage(msg) => format!("ERROR usage: {msg}"),
            Failure::Violation(msg) => format!("ERROR property_violation: {msg}"),
        }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

/// Primary output plus an optional violation raised after it is written.
struct Output {
    text: String,
    violation: Option<String>,
}

impl Output {
    fn ok(text: String) -> Self {
        Output { text, violation: None }
    }
}

enum Input {
    Channel(Channel),
    Family(ChannelFamily),
    Wiretap(WiretapUncertainty),
}

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| Failure::Io(path.to_path_buf(), e))
}

fn load(path: &Path) -> CliResult<Input> {
    let text = read(path)?;
    let value: Value = serde_json::from_str(&text).map_err(Error::from)?;
    let has = |key: &str| value.get(key).is_some();
    Ok(if has("legitimate") {
        Input::Wiretap(WiretapUncertainty::from_json(&text)?)
    } else if has("channels") {
        Input::Family(ChannelFamily::from_json(&text)?)
    } else {
        Input::Channel(Channel::from_json(&text)?)
    })
}

fn load_family(path: &Path) -> CliResult<ChannelFamily> {
    match load(path)? {
        Input::Family(f) => Ok(f),
        Input::Wiretap(u) => Ok(u.legitimate().clone()),
        Input::Channel(c) => Ok(ChannelFamily::single(c)),
    }
}

fn pretty(value: Value) -> String {
    let mut text = serde_json::to_string_pretty(&value).expect("JSON values serialize");
    text.push('\n');
    text
}

fn require_json(format: Option<Format>, command: &str) -> CliResult<()> {
    match format {
        Some(Format::Csv) => Err(Failure::Usage(format!("{command} only writes json"))),
        _ => Ok(()),
    }
}

fn parse_grid(spec: &str) -> CliResult<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let nums = parts
        .iter()
        .map(|p| p.trim().parse::<f64>())
        .collect::<std::result::Result<Vec<_>, _>>();
    match (parts.len(), nums) {
        (3, Ok(n)) => Ok(linear_grid(n[0], n[1], n[2])?),
        _ => Err(Failure::Usage(format!("grid must be start:stop:step, got {spec:?}"))),
    }
}

fn distance(a: &Path, b: &Path) -> CliResult<Value> {
    Ok(match (load(a)?, load(b)?) {
        (Input::Channel(x), Input::Channel(y)) => json!({
            "schema_version": "distance/v1",
            "kind": "channel",
            "distance": channel_distance(&x, &y)?,
        }),
        (Input::Family(x), Input::Family(y)) => json!({
            "schema_version": "distance/v1",
            "kind": "family",
            "distance": family_distance(&x, &y)?,
            "directed_a_to_b": directed_family_distance(&x, &y)?,
            "directed_b_to_a": directed_family_distance(&y, &x)?,
        }),
        (Input::Wiretap(x), Input::Wiretap(y)) => json!({
            "schema_version": "distance/v1",
            "kind": "wiretap",
            "distance": uncertainty_distance(&x, &y)?,
            "legitimate": family_distance(x.legitimate(), y.legitimate())?,
            "eavesdropper": family_distance(x.eavesdropper(), y.eavesdropper())?,
        }),
        _ => return Err(Failure::Usage("both inputs must be the same kind of file".into())),
    })
}

fn symcheck(path: &Path) -> CliResult<Value> {
    let fam = load_family(path)?;
    let v = min_f(&fam)?;
    let (radius, guaranteed) = if v.symmetrizable {
        (None, None)
    } else {
        (Some(v.min_f / 4.0), Some(guaranteed_radius(&fam)?))
    };
    Ok(json!({
        "schema_version": "symcheck/v1",
        "min_f": v.min_f,
        "symmetrizable": v.symmetrizable,
        "certificate": v.certificate.as_ref().map(Symmetrizer::to_rows),
        "residual": v.residual,
        "radius": radius,
        "guaranteed_radius": guaranteed,
    }))
}

fn capacity(path: &Path, cli: &Cli) -> CliResult<Value> {
    let family_json = |fam: &ChannelFamily| -> CliResult<Value> {
        let r = cr_capacity_avc(fam, cli.tol)?;
        Ok(json!({
            "schema_version": "capacity/v1",
            "kind": "cr_capacity",
            "value": r.value,
            "optimizer_p": r.optimizer_p.as_slice(),
            "worst_q": r.worst_q.as_ref().map(|q| q.as_slice()),
            "gap": r.duality_gap,
            "iterations": r.iterations,
        }))
    };
    match load(path)? {
        Input::Channel(c) => family_json(&ChannelFamily::single(c)),
        Input::Family(f) => family_json(&f),
        Input::Wiretap(u) => {
            let opts = SecrecyOptions {
                tol: cli.tol,
                seed: cli.seed,
                ..SecrecyOptions::default()
            };
            let v = secrecy_capacity_dichotomy(&u, &opts)?;
            Ok(json!({
                "schema_version": "capacity/v1",
                "kind": "secrecy",
                "regime": v.regime,
                "cs": v.cs_value,
                "cs_cr": v.cs_cr_value,
                "value": v.cs_value.lower(),
                "legitimate_cr": v.legitimate_cr.value,
                "worst_q": v.legitimate_cr.worst_q.as_ref().map(|q| q.as_slice()),
                "gap": v.legitimate_cr.duality_gap,
                "min_f": v.symmetry.min_f,
                "symmetrizable": v.symmetry.symmetrizable,
            }))
        }
    }
}

fn sweep(grid: &str, cli: &Cli) -> CliResult<String> {
    let rows = discontinuity_sweep(&parse_grid(grid)?, cli.tol)?;
    Ok(match cli.format.unwrap_or(Format::Csv) {
        Format::Csv => sweep_to_csv(&rows),
        Format::Json => pretty(json!({"schema_version": "sweep/v1", "rows": rows})),
    })
}

fn verify(suite: &str, trials: Option<usize>, cli: &Cli) -> CliResult<Output> {
    let suites = if suite == "all" {
        Suite::ALL.to_vec()
    } else {
        vec![suite.parse::<Suite>()?]
    };
    if trials == Some(0) {
        return Err(Failure::Usage("--trials must be positive".into()));
    }
    let mut rows = Vec::new();
    let mut failed = Vec::new();
    for s in suites {
        let n = trials.unwrap_or(s.default_trials());
        let part = run_suite(s, n, cli.seed)?;
        let bad = violations(&part);
        log::info!("suite {s}: {n} trials, {bad} violations");
        if bad > 0 {
            failed.push(format!("{s} ({bad} of {n})"));
        }
        rows.extend(part);
    }
    let text = match cli.format.unwrap_or(Format::Csv) {
        Format::Csv => rows_to_csv(&rows),
        Format::Json => pretty(json!({
            "schema_version": "verify/v1",
            "violations": violations(&rows),
            "rows": rows,
        })),
    };
    let violation = (!failed.is_empty()).then(|| format!("inequality failed in {}", failed.join(", ")));
    Ok(Output { text, violation })
}

fn robustness(code: &Path, v: &Path, v_star: &Path, cli: &Cli) -> CliResult<Output> {
    let code = WiretapCode::from_json(&read(code)?)?;
    let (v, v_star) = (load_family(v)?, load_family(v_star)?);
    let r = robustness_check(AnyCode::Plain(&code), &v, &v_star, cli.cap as u128)?;
    let violation = (!r.bound.holds).then(|| {
        format!(
            "perturbed leakage rate {} exceeds bound {}",
            r.bound.lhs, r.bound.rhs
        )
    });
    let mut value = serde_json::to_value(&r).map_err(Error::from)?;
    value["schema_version"] = json!("robustness/v1");
    Ok(Output {
        text: pretty(value),
        violation,
    })
}

fn examples() -> CliResult<Value> {
    let rows = |c: &Channel| c.to_rows();
    let black = scenarios::blackwell_family();
    let (wstar, sigma) = scenarios::wstar_instance();
    let black_verdict = min_f(&black)?;
    Ok(json!({
        "schema_version": "examples/v1",
        "blackwell": {
            "w1": rows(&scenarios::blackwell_w1()),
            "w2": rows(&scenarios::blackwell_w2()),
            "min_f": black_verdict.min_f,
            "identity_symmetrizer_residual": verify_symmetrizer(&black, &Symmetrizer::identity(2))?,
        },
        "w_hat": rows(&scenarios::w_hat()),
        "useless": rows(&scenarios::useless_channel()),
        "wstar": {
            "w1": rows(&scenarios::wstar_w1()),
            "w2": rows(&scenarios::wstar_w2()),
            "sigma": sigma.to_rows(),
            "sigma_residual": verify_symmetrizer(wstar.legitimate(), &sigma)?,
        },
    }))
}

fn run(cli: &Cli) -> CliResult<Output> {
    match &cli.command {
        Command::Sweep { grid } => sweep(grid, cli).map(Output::ok),
        Command::Verify { suite, trials } => verify(suite, *trials, cli),
        Command::Robustness { code, v, v_star } => {
            require_json(cli.format, "robustness")?;
            robustness(code, v, v_star, cli)
        }
        other => {
            let (name, value) = match other {
                Command::Distance { a, b } => ("distance", distance(a, b)),
                Command::Symcheck { input } => ("symcheck", symcheck(input)),
                Command::Capacity { input } => ("capacity", capacity(input, cli)),
                _ => ("examples", examples()),
            };
            require_json(cli.format, name)?;
            value.map(|v| Output::ok(pretty(v)))
        }
    }
}

fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| Failure::Io(path.to_path_buf(), e)),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Failure::Io("<stdout>".into(), e)),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            eprintln!("ERROR usage: {}", e.to_string().trim_end());
            return ExitCode::from(2);
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    let result = run(&cli).and_then(|output| {
        emit(cli.out.as_deref(), &output.text)?;
        match output.violation {
            Some(msg) => Err(Failure::Violation(msg)),
            None => Ok(()),
        }
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", f.line());
            ExitCode::from(f.exit_code())
        }
    }
}
