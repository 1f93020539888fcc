use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use klr::cli::{self, Config};
use klr::KlrError;
use serde_json::Value;

#[derive(Parser)]
#[command(name = "klr", about = "Quiver Hecke algebra computations and verification suites")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct Common {
    /// preset Cartan type: A1, A2, A3, B2, C2
    #[arg(long = "type")]
    ty: Option<String>,
    /// Cartan datum as JSON (index_set, gcm, symmetrizers)
    #[arg(long)]
    cartan: Option<String>,
    /// vertex label i (default: the first)
    #[arg(long)]
    i: Option<String>,
    /// canonical, lambda+ or lambda-
    #[arg(long)]
    assoc: Option<String>,
    /// Q or F<p> with p an odd prime
    #[arg(long, default_value = "Q")]
    field: String,
    #[arg(long, default_value_t = 4)]
    trunc: u32,
    #[arg(long, default_value_t = 4)]
    ht: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// write JSON to this file instead of stdout
    #[arg(long)]
    out: Option<String>,
}

#[derive(Subcommand)]
enum Cmd {
    /// normal form of a product, e.g. "tau(1)*tau(1)*e(1,2)"
    Mul {
        expr: String,
        /// multiplicities of the weight, comma separated
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        beta: Vec<i64>,
        #[command(flatten)]
        common: Common,
    },
    /// Λ, Λ̃ and δ of two catalogued modules
    Lambda {
        m: String,
        n: String,
        #[command(flatten)]
        common: Common,
    },
    /// run a verification suite
    Verify {
        suite: String,
        #[command(flatten)]
        common: Common,
    },
    /// generator images, braid relations and the cleared DiEi sequence
    ReflectCheck {
        #[command(flatten)]
        common: Common,
    },
}

fn config(c: &Common) -> klr::Result<Config> {
    let datum = cli::load_datum(c.ty.as_deref(), c.cartan.as_deref())?;
    let i = match &c.i {
        Some(l) => datum.index_of(l)?,
        None => 0,
    };
    Ok(Config {
        i,
        assoc: c.assoc.as_deref().map(cli::parse_assoc).transpose()?,
        field: cli::parse_field(&c.field)?,
        trunc: c.trunc,
        ht: c.ht,
        seed: c.seed,
        datum,
    })
}

fn emit(c: &Common, v: &Value) -> std::io::Result<()> {
    let text = serde_json::to_string_pretty(v).expect("json");
    match &c.out {
        Some(path) => std::fs::write(path, text + "\n"),
        None => {
            println!("{}", text);
            Ok(())
        }
    }
}

fn fail(e: &KlrError) -> ExitCode {
    eprintln!("error: {}", e);
    if let Some(g) = cli::guidance(e) {
        eprintln!("hint: {}", g);
    }
    ExitCode::from(cli::exit_code(e) as u8)
}

fn run(cmd: Cmd) -> Result<u8, KlrError> {
    match cmd {
        Cmd::Mul { expr, beta, common } => {
            let cfg = config(&common)?;
            println!("{}", cli::cmd_mul(&cfg, &expr, &beta)?);
            Ok(0)
        }
        Cmd::Lambda { m, n, common } => {
            let cfg = config(&common)?;
            let v = cli::cmd_lambda(&cfg, &m, &n)?;
            emit(&common, &v).map_err(|e| KlrError::Parse { pos: 0, msg: e.to_string() })?;
            Ok(0)
        }
        Cmd::Verify { suite, common } => {
            let cfg = config(&common)?;
            let rep = cli::run_suite(&cfg, &suite)?;
            emit(&common, &rep.to_json()).map_err(|e| KlrError::Parse { pos: 0, msg: e.to_string() })?;
            for c in rep.failures() {
                eprintln!("FAIL {}", c.case);
            }
            Ok(if rep.pass() { 0 } else { 1 })
        }
        Cmd::ReflectCheck { common } => {
            let cfg = config(&common)?;
            let rep = cli::cmd_reflect_check(&cfg)?;
            emit(&common, &rep.to_json()).map_err(|e| KlrError::Parse { pos: 0, msg: e.to_string() })?;
            Ok(if rep.pass() { 0 } else { 1 })
        }
    }
}

fn main() -> ExitCode {
    let args = match Cli::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(args.cmd) {
        Ok(code) => ExitCode::from(code),
        Err(e) => fail(&e),
    }
}
