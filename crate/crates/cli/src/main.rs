use std::io::{ErrorKind, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ioid_core::graph::condition_report;
use ioid_core::identifiability::{
    analyze, check_function, parse_function, witness_transformation, AnalyzeOptions, Method, WitnessMap,
};
use ioid_core::io_equations::{cramer_io_equations, full_io_equations, resolve_ordering};
use ioid_core::model::{parse_model, Model};
use ioid_core::report::{
    analysis_report, io_section, render_text, transfer_section, CheckSection, Randomness, Report, WitnessSection,
    MEMBERSHIP_SEMANTICS,
};
use ioid_core::transfer::transfer_matrix;
use ioid_core::AnalysisError;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Parser)]
#[command(name = "ioident", version, about = "Input-output equations and identifiability of linear ODE models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Conditions, generators, equations, diagnostics and transfer matrix.
    Analyze(Common),
    /// Input-output equations only.
    Io(Common),
    /// Transfer-function matrix.
    Transfer(Common),
    /// Graph conditions and the certificates they grant.
    Certify(Common),
    /// Whether a parameter function depends on the generators.
    Check {
        #[command(flatten)]
        common: Common,
        /// Parameter expression, e.g. `a01*a12`.
        #[arg(long)]
        function: String,
    },
    /// Whether a substitution of parameters and initial values preserves outputs.
    Witness {
        #[command(flatten)]
        common: Common,
        /// Substitutions such as `x -> k*x, c -> c/k`; free symbols are sampled.
        #[arg(long)]
        map: String,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Elimination,
    Cramer,
    Transfer,
    All,
}

#[derive(Args)]
struct Common {
    /// Model file.
    model: PathBuf,
    /// Output ordering, lowest first, e.g. `y2,y1`.
    #[arg(long, value_delimiter = ',')]
    ordering: Option<Vec<String>>,
    #[arg(long, value_enum, default_value = "all")]
    method: MethodArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Series truncation order for the solvability diagnostic.
    #[arg(long)]
    series_order: Option<usize>,
    /// Trials per randomized test: points per prime for rank tests, and
    /// trajectories for solvability and witness checks.
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

impl Common {
    fn options(&self) -> AnalyzeOptions {
        let mut o = AnalyzeOptions {
            ordering: self.ordering.clone(),
            method: match self.method {
                MethodArg::Elimination => Method::Elimination,
                MethodArg::Cramer => Method::Cramer,
                MethodArg::Transfer => Method::Transfer,
                MethodArg::All => Method::All,
            },
            seed: self.seed,
            series_order: self.series_order,
            ..AnalyzeOptions::default()
        };
        if let Some(t) = self.trials {
            o.rank_trials.points = t;
            o.solvability_trials = t;
        }
        o
    }
}

enum Failure {
    Input(String),
    Internal(String),
}

impl From<AnalysisError> for Failure {
    fn from(e: AnalysisError) -> Self {
        match e {
            AnalysisError::Model(_)
            | AnalysisError::BadOrdering(_)
            | AnalysisError::UnknownSymbol(_)
            | AnalysisError::Unsupported(_) => Failure::Input(e.to_string()),
            _ => Failure::Internal(e.to_string()),
        }
    }
}

fn load(path: &Path) -> Result<Model, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    parse_model(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn run(cmd: &Command) -> Result<(Report, Format), Failure> {
    let report = match cmd {
        Command::Analyze(c) => analysis_report(&analyze(&load(&c.model)?, &c.options())?),
        Command::Io(c) => {
            let m = load(&c.model)?;
            let lm = m.to_linear();
            let ordering = resolve_ordering(&lm, c.ordering.as_deref())?;
            let mut r = Report::new("io", &lm, m.as_compartment().is_some());
            if matches!(c.method, MethodArg::Elimination | MethodArg::All) {
                r.io.push(io_section(&lm, "elimination", &ordering, &full_io_equations(&lm, &ordering)?, true));
            }
            if matches!(c.method, MethodArg::Cramer | MethodArg::All) {
                match m.as_compartment() {
                    Some(cm) => {
                        let full = condition_report(&m).cramer_gate();
                        let all: Vec<usize> = (0..lm.m()).collect();
                        r.io.push(io_section(&lm, "cramer", &all, &cramer_io_equations(cm), full));
                    }
                    None if matches!(c.method, MethodArg::Cramer) => {
                        return Err(Failure::Input("method `cramer` needs a compartment model".into()));
                    }
                    None => {}
                }
            }
            if matches!(c.method, MethodArg::Transfer) {
                return Err(Failure::Input("use the `transfer` command for transfer functions".into()));
            }
            r
        }
        Command::Transfer(c) => {
            let m = load(&c.model)?;
            let lm = m.to_linear();
            let mut r = Report::new("transfer", &lm, m.as_compartment().is_some());
            r.transfer = Some(transfer_section(&lm, &transfer_matrix(&lm)));
            r
        }
        Command::Certify(c) => {
            let m = load(&c.model)?;
            let lm = m.to_linear();
            let mut r = Report::new("certify", &lm, m.as_compartment().is_some());
            let cond = condition_report(&m);
            cond.check_consistency().map_err(Failure::Internal)?;
            r.conditions = Some(cond);
            r
        }
        Command::Check { common: c, function } => {
            let m = load(&c.model)?;
            let a = analyze(&m, &c.options())?;
            let h = parse_function(&a.model, function)?;
            let (verdict, check_log) = check_function(&a, &h, c.options().rank_trials, c.seed)?;
            let mut log = a.rank_log.clone();
            log.merge(check_log);
            let mut r = analysis_report(&a);
            r.command = "check";
            r.check = Some(CheckSection { function: function.clone(), verdict, semantics: MEMBERSHIP_SEMANTICS });
            r.randomness = Some(Randomness::new(c.seed, &log));
            r
        }
        Command::Witness { common: c, map } => {
            let m = load(&c.model)?;
            let lm = m.to_linear();
            let wm = WitnessMap::parse(map)?;
            let trials = c.trials.unwrap_or(5);
            let mut rng = ChaCha8Rng::seed_from_u64(c.seed);
            let ok = witness_transformation(&lm, &wm, trials, &mut rng)?;
            let mut r = Report::new("witness", &lm, m.as_compartment().is_some());
            r.witness = Some(WitnessSection { map: map.clone(), trials, preserves_outputs: ok });
            r
        }
    };
    let format = match cmd {
        Command::Analyze(c) | Command::Io(c) | Command::Transfer(c) | Command::Certify(c) => c.format,
        Command::Check { common, .. } | Command::Witness { common, .. } => common.format,
    };
    Ok((report, format))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let (text, code) = match run(&cli.command) {
        Ok((report, Format::Text)) => (render_text(&report), ExitCode::SUCCESS),
        Ok((report, Format::Json)) => {
            (serde_json::to_string_pretty(&report).expect("report serializes") + "\n", ExitCode::SUCCESS)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(1);
        }
        Err(Failure::Internal(msg)) => {
            eprintln!("internal error: {msg}");
            return ExitCode::from(2);
        }
    };
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|()| out.flush()) {
        Err(e) if e.kind() != ErrorKind::BrokenPipe => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        _ => code,
    }
}
