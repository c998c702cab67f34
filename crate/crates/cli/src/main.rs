use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value as Json};

use spinr_core::expr::{self, corpus, Environment, Kind};
use spinr_core::suite::{run_suite, SuiteConfig};
use spinr_core::verify::ricci_identity_symbol;
use spinr_core::{
    build_twisted_rep, constant_curvature, models, qk_model, random_curvature, CurvatureTensor, GeometricDatum,
    Spinor, SymTensor2, VerificationReport,
};

const DEFAULT_TOL: f64 = 1e-10;
const TOL_ENV: &str = "SPINR_TOL";

#[derive(Parser)]
#[command(name = "spinr", version, about = "Twisted spinor workbench: models, identity checks and the verification suite")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum GenKind {
    Random,
    Constant,
    Qk,
    /// random symmetric 2-tensor
    Sym,
    /// random trace-free symmetric 2-tensor
    SymTraceless,
}

#[derive(Clone, Copy, ValueEnum)]
enum CurvKind {
    Random,
    Constant,
    Zero,
}

#[derive(Subcommand)]
enum Cmd {
    /// Write a curvature tensor or symmetric 2-tensor as JSON.
    Gen {
        #[arg(long, value_enum)]
        kind: GenKind,
        #[arg(long, default_value_t = 4)]
        n: usize,
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        kappa: f64,
        #[arg(long, default_value_t = 1)]
        m: usize,
        #[arg(long, default_value_t = -1, allow_hyphen_values = true)]
        sign: i32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build a model datum (spinor, curvature, Θ) and write it as JSON.
    Model {
        #[arg(long)]
        label: String,
        #[arg(long, default_value_t = 4)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        r: usize,
        #[arg(long, default_value_t = 1)]
        m: usize,
        #[arg(long, default_value_t = -1, allow_hyphen_values = true)]
        sign: i32,
        /// curvature for taut-spin-n
        #[arg(long, value_enum, default_value = "random")]
        curv: CurvKind,
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        kappa: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate an index expression against a datum or curvature file.
    Eval {
        #[arg(long, allow_hyphen_values = true)]
        expr: String,
        #[command(flatten)]
        bind: BindArgs,
    },
    /// Check an identity lhs = rhs (or every entry of a definitions file).
    Check {
        #[arg(long, allow_hyphen_values = true, requires = "rhs", conflicts_with = "defs")]
        lhs: Option<String>,
        #[arg(long, allow_hyphen_values = true, requires = "lhs")]
        rhs: Option<String>,
        /// JSON list of {"name", "lhs", "rhs", "tol"}
        #[arg(long)]
        defs: Option<PathBuf>,
        /// built-in identity corpus
        #[arg(long, conflicts_with_all = ["lhs", "defs"])]
        corpus: bool,
        #[arg(long)]
        tol: Option<f64>,
        #[command(flatten)]
        bind: BindArgs,
    },
    /// Run the acceptance battery; exit 0 iff every check passes.
    Suite {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(clap::Args)]
struct BindArgs {
    /// GeometricDatum or CurvatureTensor JSON; a random test datum when absent
    #[arg(long)]
    datum: Option<PathBuf>,
    /// SymTensor2 JSON bound to h (random when absent)
    #[arg(long)]
    h: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug)]
enum Failure {
    /// bad input, parse or evaluation error
    Usage(String),
    /// a check or construction failed
    Check(String),
}

impl From<spinr_core::Error> for Failure {
    fn from(e: spinr_core::Error) -> Self {
        match e {
            spinr_core::Error::Construction(_) | spinr_core::Error::NotPurifiable(_) => Failure::Check(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

impl From<expr::ExprError> for Failure {
    fn from(e: expr::ExprError) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

type Outcome = Result<bool, Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), Failure> {
    match out {
        Some(p) => fs::write(p, format!("{text}\n")).map_err(|e| Failure::Usage(format!("{}: {e}", p.display()))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn default_tol() -> Result<f64, Failure> {
    match std::env::var(TOL_ENV) {
        Ok(s) => s.trim().parse().map_err(|_| Failure::Usage(format!("{TOL_ENV}={s:?} is not a number"))),
        Err(_) => Ok(DEFAULT_TOL),
    }
}

fn cmd_gen(kind: GenKind, n: usize, kappa: f64, m: usize, sign: i32, seed: u64, out: Option<&Path>) -> Outcome {
    use rand::SeedableRng;
    let text = match kind {
        GenKind::Random => serde_json::to_string(&random_curvature(n, seed)?)?,
        GenKind::Constant => serde_json::to_string(&constant_curvature(n, kappa)?)?,
        GenKind::Qk => serde_json::to_string(&qk_model(m, sign)?.curvature)?,
        GenKind::Sym | GenKind::SymTraceless => {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let h = if matches!(kind, GenKind::Sym) {
                SymTensor2::random(n, &mut rng)
            } else {
                SymTensor2::random_traceless(n, &mut rng)
            };
            serde_json::to_string(&h)?
        }
    };
    emit(&text, out)?;
    Ok(true)
}

#[allow(clippy::too_many_arguments)]
fn cmd_model(label: &str, n: usize, r: usize, m: usize, sign: i32, curv: CurvKind, kappa: f64, seed: u64, out: Option<&Path>) -> Outcome {
    let curvature = match (label, curv) {
        (models::TAUTOLOGICAL, CurvKind::Random) => Some(random_curvature(n, seed)?),
        (models::TAUTOLOGICAL, CurvKind::Constant) => Some(constant_curvature(n, kappa)?),
        (models::TAUTOLOGICAL, CurvKind::Zero) => Some(CurvatureTensor::zeros(n)),
        _ => None,
    };
    let datum = models::build_by_label(label, n, r, m, sign, curvature, seed)?;
    emit(&datum.to_json()?, out)?;
    Ok(true)
}

/// Loads the bindings: a full datum, a bare curvature tensor (with the
/// untwisted rep of the same dimension), or a random test datum.
fn environment(bind: &BindArgs) -> Result<Environment, Failure> {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(bind.seed);
    let (mut env, curvature) = match &bind.datum {
        Some(path) => {
            let text = read(path)?;
            let raw: Json = serde_json::from_str(&text)?;
            if raw.get("rep").is_some() {
                let datum = GeometricDatum::from_json(&text)?;
                datum.check_shapes()?;
                (Environment::from_datum(&datum)?, datum.curvature)
            } else {
                let r: CurvatureTensor = serde_json::from_value(raw)?;
                (curvature_env(&r, &mut rng)?, r)
            }
        }
        None => {
            let r = random_curvature(4, bind.seed)?;
            (curvature_env(&r, &mut rng)?, r)
        }
    };
    let n = curvature.n();
    let h = match &bind.h {
        Some(path) => serde_json::from_str::<SymTensor2>(&read(path)?)?,
        None => SymTensor2::random(n, &mut rng),
    };
    if h.n() != n {
        return Err(Failure::Usage(format!("h has dimension {}, datum has {n}", h.n())));
    }
    env.bind_h(&h)?;
    env.bind_t(&ricci_identity_symbol(&curvature, &h, bind.seed)?)?;
    Ok(env)
}

fn curvature_env(r: &CurvatureTensor, rng: &mut rand_chacha::ChaCha8Rng) -> Result<Environment, Failure> {
    let n = r.n();
    let mut env = Environment::new(n);
    env.bind_curvature(r)?;
    if n <= 12 {
        let rep = build_twisted_rep(n, 0, 1)?;
        env.bind_rep(&rep)?;
        let psi = Spinor::random_unit(rep.dim(), rng);
        env.bind_psi(&psi)?;
    }
    Ok(env)
}

fn value_json(v: &expr::Value) -> Json {
    if let Some(x) = v.as_scalar() {
        return json!(x);
    }
    let mut data = Vec::with_capacity(v.len());
    let extents = v.extents.clone();
    let mut multi = vec![0usize; extents.len()];
    for _ in 0..v.len() {
        let block = v.entry(&multi);
        data.push(match v.kind {
            Kind::Real => json!(block[0].re),
            _ => Json::Array(block.iter().map(|z| json!([z.re, z.im])).collect()),
        });
        for a in (0..multi.len()).rev() {
            multi[a] += 1;
            if multi[a] < extents[a] {
                break;
            }
            multi[a] = 0;
        }
    }
    json!({
        "indices": v.indices,
        "extents": v.extents,
        "kind": format!("{:?}", v.kind).to_lowercase(),
        "dim": v.dim,
        "data": data,
    })
}

fn cmd_eval(text: &str, bind: &BindArgs) -> Outcome {
    let e = expr::parse(text)?;
    let env = environment(bind)?;
    let v = expr::evaluate(&e, &env)?;
    // shortest round-trip form: 12.0 prints as 12
    match v.as_scalar() {
        Some(x) => println!("{x}"),
        None => println!("{}", value_json(&v)),
    }
    Ok(true)
}

fn cmd_check(lhs: Option<&str>, rhs: Option<&str>, defs: Option<&Path>, use_corpus: bool, tol: Option<f64>, bind: &BindArgs) -> Outcome {
    let specs = match (lhs, rhs, defs) {
        (Some(l), Some(r), _) => vec![corpus::IdentitySpec { name: "cli".into(), lhs: l.into(), rhs: r.into(), tol: f64::NAN }],
        (_, _, Some(path)) => corpus::load(&read(path)?)?,
        _ if use_corpus => corpus::builtin(),
        _ => return Err(Failure::Usage("give --lhs/--rhs, --defs or --corpus".into())),
    };
    let env = environment(bind)?;
    let fallback = match tol {
        Some(t) => t,
        None => default_tol()?,
    };
    let mut reports: Vec<VerificationReport> = Vec::new();
    for s in &specs {
        let t = if tol.is_some() || !s.tol.is_finite() { fallback } else { s.tol };
        let (l, r) = (expr::parse(&s.lhs)?, expr::parse(&s.rhs)?);
        reports.push(expr::check_identity(&s.name, &l, &r, &env, t)?);
    }
    let pass = reports.iter().all(|r| r.pass);
    let text = if reports.len() == 1 {
        serde_json::to_string_pretty(&reports[0])?
    } else {
        serde_json::to_string_pretty(&reports)?
    };
    println!("{text}");
    Ok(pass)
}

fn cmd_suite(config: Option<&Path>, out: Option<&Path>) -> Outcome {
    let cfg = match config {
        Some(p) => SuiteConfig::from_json(&read(p)?)?,
        None => SuiteConfig::default(),
    };
    let outcome = run_suite(&cfg)?;
    for c in &outcome.criteria {
        eprintln!(
            "criterion {:>2}: {} — {} ({:.0} ms): {}",
            c.id,
            if c.pass { "PASS" } else { "FAIL" },
            c.title,
            c.elapsed_ms,
            c.summary
        );
    }
    let text = serde_json::to_string_pretty(&outcome.reports)?;
    let target = out.map(Path::to_path_buf).or_else(|| cfg.output.as_ref().map(PathBuf::from));
    emit(&text, target.as_deref())?;
    Ok(outcome.pass())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.cmd {
        Cmd::Gen { kind, n, kappa, m, sign, seed, out } => cmd_gen(*kind, *n, *kappa, *m, *sign, *seed, out.as_deref()),
        Cmd::Model { label, n, r, m, sign, curv, kappa, seed, out } => {
            cmd_model(label, *n, *r, *m, *sign, *curv, *kappa, *seed, out.as_deref())
        }
        Cmd::Eval { expr, bind } => cmd_eval(expr, bind),
        Cmd::Check { lhs, rhs, defs, corpus, tol, bind } => {
            cmd_check(lhs.as_deref(), rhs.as_deref(), defs.as_deref(), *corpus, *tol, bind)
        }
        Cmd::Suite { config, out } => cmd_suite(config.as_deref(), out.as_deref()),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Check(msg)) => {
            eprintln!("spinr: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("spinr: {msg}");
            ExitCode::from(2)
        }
    }
}
