use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use wittlat::cover::{boundedness_audit, spanning_reduction_check};
use wittlat::dop::{classify, off_grid_points};
use wittlat::enveloping::RhsForm;
use wittlat::gmod::{GradedAction, GradedModuleSpec, MBar, MBarDual, Trivial, Window};
use wittlat::suites::{self, run_suite, SuiteOptions};
use wittlat::{Error, LatticeEmbedding, LatticePoint};

#[derive(Parser, Debug)]
#[command(name = "wittlat", version, about = "Exact checks for lattice Witt-type Lie algebras")]
struct Cli {
    /// Embedding config (`{"rank": N, "images": [[x, y], ...]}`); the demo
    /// embedding is used when omitted.
    #[arg(long, global = true)]
    embedding: Option<PathBuf>,

    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the admissibility conditions of the embedding.
    LatticeCheck {
        #[arg(long, default_value_t = 8)]
        radius: u32,
    },
    /// Run one identity-verification suite.
    Verify {
        #[arg(long)]
        suite: String,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 5)]
        order: u32,
        #[arg(long, default_value_t = 2)]
        radius: i64,
        /// Right-hand side used by the bf-identity suite.
        #[arg(long, value_enum, default_value_t = Form::Printed)]
        form: Form,
    },
    /// Classify a graded module from its D(λ) operators.
    Classify {
        #[arg(long)]
        module: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Windowed cover ranks and the spanning reduction for a module.
    Cover {
        #[arg(long)]
        module: PathBuf,
        /// Probe/generator window radius.
        #[arg(long, default_value_t = 1)]
        radius: i64,
        /// Reduction order, also the `n` of the `d·n^N` bound.
        #[arg(long, default_value_t = 5)]
        order: u32,
        /// Component to audit, as comma-separated lattice coordinates.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        gamma: Option<Vec<i64>>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Form {
    Printed,
    Corrected,
}

/// Usage and config errors never reach here; they exit 2 from `main`.
enum Outcome {
    Pass(Value),
    Fail(Value),
}

fn usage(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn read(path: &Path) -> Result<String, String> {
    std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn load_embedding(path: Option<&Path>) -> Result<Arc<LatticeEmbedding>, String> {
    match path {
        None => Ok(Arc::new(LatticeEmbedding::demo())),
        Some(p) => LatticeEmbedding::from_json(&read(p)?).map(Arc::new).map_err(usage),
    }
}

fn run(cli: &Cli) -> Result<Outcome, String> {
    let e = load_embedding(cli.embedding.as_deref())?;
    match &cli.cmd {
        Command::LatticeCheck { radius } => {
            let report = e.check_conditions(*radius);
            let v = json!({
                "embedding": e.to_json(),
                "radius": radius,
                "passed": report.all_pass(),
                "report": report,
            });
            Ok(if report.all_pass() { Outcome::Pass(v) } else { Outcome::Fail(v) })
        }
        Command::Verify { suite, trials, seed, order, radius, form } => {
            let opts = SuiteOptions {
                trials: *trials,
                seed: *seed,
                order: *order,
                radius: *radius,
                bf_form: match form {
                    Form::Printed => RhsForm::Printed,
                    Form::Corrected => RhsForm::Corrected,
                },
            };
            let report = run_suite(suite, e, &opts).map_err(|err| match err {
                Error::Config(_) => format!("{err}; known suites: {}", suites::SUITES.join(", ")),
                other => other.to_string(),
            })?;
            let passed = report.passed;
            let v = serde_json::to_value(&report).map_err(usage)?;
            Ok(if passed { Outcome::Pass(v) } else { Outcome::Fail(v) })
        }
        Command::Classify { module, seed } => {
            let spec = GradedModuleSpec::from_json(&read(module)?, e.clone()).map_err(usage)?;
            let mut g = suites::rng(*seed);
            let val = off_grid_points(e.rank(), 2, 20, &mut g);
            match classify(&spec, &val) {
                Ok(c) => Ok(Outcome::Pass(json!({
                    "module": spec.label(),
                    "classification": c,
                }))),
                Err(err) => Ok(Outcome::Fail(json!({
                    "module": spec.label(),
                    "error": err.to_string(),
                }))),
            }
        }
        Command::Cover { module, radius, order, gamma } => {
            let text = read(module)?;
            let m = load_module(&text, e.clone())?;
            let gamma = match gamma {
                Some(c) if c.len() == e.rank() => LatticePoint(c.clone()),
                Some(c) => return Err(format!("--gamma has {} coordinates, rank is {}", c.len(), e.rank())),
                None => LatticePoint::zero(e.rank()),
            };
            Ok(cover_report(m.as_ref(), &gamma, *radius, *order))
        }
    }
}

/// Module configs for `cover` additionally accept the fixtures
/// `{"kind": "mbar" | "mbar-dual" | "trivial"}`.
fn load_module(text: &str, e: Arc<LatticeEmbedding>) -> Result<Box<dyn GradedAction>, String> {
    let v: Value = serde_json::from_str(text).map_err(usage)?;
    match v.get("kind").and_then(Value::as_str) {
        Some("mbar") => Ok(Box::new(MBar::new(e))),
        Some("mbar-dual") => Ok(Box::new(MBarDual::new(e))),
        Some("trivial") => Ok(Box::new(Trivial::new(e))),
        _ => GradedModuleSpec::from_json(text, e)
            .map(|m| Box::new(m) as Box<dyn GradedAction>)
            .map_err(usage),
    }
}

fn cover_report(m: &dyn GradedAction, gamma: &LatticePoint, radius: i64, order: u32) -> Outcome {
    let rank = m.rank();
    let w = Window::radius(rank, radius);
    let d = m.fiber_dim(gamma) as u64;
    let audit = boundedness_audit(m, d, order as u64, std::slice::from_ref(gamma), &w, &w);

    // reduce the component one step below γ along ε₁
    let alpha = {
        let mut c = gamma.0.clone();
        c[0] -= 1;
        LatticePoint(c)
    };
    let reduction = match spanning_reduction_check(m, order, gamma, &alpha, 0, 1, &w.points()) {
        Ok(r) => serde_json::to_value(&r).unwrap_or(Value::Null),
        Err(err) => json!({ "skipped": err.to_string() }),
    };
    let reduction_ok = reduction.get("zero").and_then(Value::as_bool).unwrap_or(true);
    let ok = audit.within_bound() && audit.all_stabilized() && reduction_ok;
    let v = json!({
        "audit": audit,
        "reduction": reduction,
        "passed": ok,
    });
    if ok {
        Outcome::Pass(v)
    } else {
        Outcome::Fail(v)
    }
}

fn emit(cli: &Cli, v: &Value) -> Result<(), String> {
    let mut text = serde_json::to_string_pretty(v).map_err(usage)?;
    text.push('\n');
    match &cli.out {
        Some(p) => std::fs::write(p, text).map_err(|e| format!("{}: {e}", p.display())),
        None => {
            use std::io::Write;
            match std::io::stdout().lock().write_all(text.as_bytes()) {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.to_string()),
                _ => Ok(()),
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let (v, code) = match run(&cli) {
        Ok(Outcome::Pass(v)) => (v, 0),
        Ok(Outcome::Fail(v)) => (v, 1),
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };
    if let Err(msg) = emit(&cli, &v) {
        eprintln!("error: {msg}");
        return ExitCode::from(2);
    }
    ExitCode::from(code)
}
