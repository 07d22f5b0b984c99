//! The `daugavet` command line.
//!
//! Exit codes: 0 when the Daugavet equation holds (or nothing was found),
//! 1 when it fails or a finding is reported, 2 on any input error.

pub mod format;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex;
use serde_json::Value;

use daugavet_core::asymptotic::{dual_study, refinement_study, RefinementStudy};
use daugavet_core::daugavet::{
    brute_force_norm, complex_sweep_max, daugavet_report, norm_id_plus_scaled, BRUTE_FORCE_MAX_N,
};
use daugavet_core::foias::{
    escalate, verify_chain, ContinuityMode, EscalationOutcome, EscalationParams, KernelOracle,
    Mock, SpecOracle, WitnessChain,
};
use daugavet_core::models::{KernelSpec, RandomClass};
use daugavet_core::scalar::parse_rational;
use daugavet_core::search::{search_counterexamples, Predicate, SearchConfig};
use daugavet_core::{KernelOperator, Rational, Scalar, Tolerance, Weight};

use format::{
    parse_kernel_file, report_file, show_complex, show_surd, Body, CliScalar, KernelFile,
    ScalarMode,
};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Core(#[from] daugavet_core::Error),
    #[error("{0}")]
    Format(String),
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

pub const EXIT_HOLDS: i32 = 0;
pub const EXIT_FAILS: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "daugavet",
    version,
    about = "Check the Daugavet equation for kernel operators on C(S)"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Daugavet report for a matrix or a discretized spec.
    Check(CheckArgs),
    /// Reports across grid levels, as CSV.
    Refine(RefineArgs),
    /// Maximise ‖I + λT‖ over |λ| = 1.
    Sweep(InputArgs),
    /// Build a witness chain along a negative-diagonal patch.
    Escalate(EscalateArgs),
    /// Seeded search for predicate violations.
    Search(SearchArgs),
    /// Compare the closed-form norms with sign-vector enumeration.
    Oracle(InputArgs),
}

#[derive(Debug, Args)]
struct CheckArgs {
    #[arg(long)]
    input: PathBuf,
    /// Grid level for spec inputs.
    #[arg(long)]
    level: Option<usize>,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RefineArgs {
    #[arg(long)]
    spec: PathBuf,
    #[arg(long, value_delimiter = ',', required = true)]
    levels: Vec<usize>,
    /// Study transposes (the ℓ1 picture).
    #[arg(long)]
    dual: bool,
    /// CSV destination; stdout when omitted.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct InputArgs {
    #[arg(long)]
    input: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Atom,
    Norm,
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("oracle").required(true).args(["spec", "mock"])))]
struct EscalateArgs {
    #[arg(long)]
    spec: Option<PathBuf>,
    /// const-neg-quarter, diag-neg-quarter or identity.
    #[arg(long)]
    mock: Option<String>,
    #[arg(long)]
    beta: String,
    /// Claimed bound B on sup_s ‖μ_s‖.
    #[arg(long)]
    bound: String,
    #[arg(long, default_value_t = 6)]
    max_level: usize,
    #[arg(long, value_enum, default_value = "atom")]
    mode: ModeArg,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ScalarArg {
    Exact,
    Float,
}

#[derive(Debug, Args)]
struct SearchArgs {
    /// signed, positive or rational-signed.
    #[arg(long)]
    class: String,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    trials: u64,
    #[arg(long)]
    seed: u64,
    /// prop1-identity, lemma5-biconditional, positive-defect-zero,
    /// star-implies-defect-zero or defect-zero.
    #[arg(long)]
    predicate: String,
    /// Defaults to exact for rational-signed kernels and exact-only
    /// predicates, float otherwise.
    #[arg(long, value_enum)]
    scalar: Option<ScalarArg>,
    #[arg(long, default_value_t = 1.0)]
    magnitude: f64,
}

/// Runs the command line with `args` (including the program name).
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = out.write_all(text.as_bytes());
                    EXIT_HOLDS
                }
                _ => {
                    let _ = err.write_all(text.as_bytes());
                    EXIT_ERROR
                }
            };
        }
    };
    let mut buf = String::new();
    let result = match cli.command {
        Command::Check(a) => cmd_check(&a, &mut buf),
        Command::Refine(a) => cmd_refine(&a, &mut buf),
        Command::Sweep(a) => cmd_sweep(&a.input, &mut buf),
        Command::Escalate(a) => cmd_escalate(&a, &mut buf),
        Command::Search(a) => cmd_search(&a, &mut buf),
        Command::Oracle(a) => cmd_oracle(&a.input, &mut buf),
    };
    // Output goes out once, after the command finishes.
    let _ = out.write_all(buf.as_bytes());
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_ERROR
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

fn load(path: &Path) -> Result<KernelFile, CliError> {
    parse_kernel_file(&read(path)?).map_err(|e| match e {
        CliError::Format(m) => CliError::Format(format!("{}: {m}", path.display())),
        other => other,
    })
}

fn real_matrix<S: CliScalar>(file: &KernelFile) -> Result<KernelOperator<S>, CliError> {
    match &file.body {
        Body::Matrix { complex: true, .. } => Err(CliError::Usage(
            "complex entries are only accepted by `sweep`".into(),
        )),
        Body::Matrix { matrix, .. } => {
            let m = S::entries(matrix).expect("matrix parsed in the file's mode");
            let real = m
                .iter()
                .map(|row| row.iter().map(|z| z.re.clone()).collect())
                .collect();
            Ok(KernelOperator::from_matrix(real)?)
        }
        Body::Spec(_) => Err(CliError::Usage("expected a `matrix` input".into())),
    }
}

fn kernel_for_check<S: CliScalar>(
    file: &KernelFile,
    level: Option<usize>,
) -> Result<KernelOperator<S>, CliError> {
    match (&file.body, level) {
        (Body::Spec(spec), Some(n)) => Ok(spec.discretize(n)?),
        (Body::Spec(_), None) => Err(CliError::Usage("spec inputs need --level".into())),
        (Body::Matrix { .. }, Some(_)) => Err(CliError::Usage(
            "--level applies to spec inputs only".into(),
        )),
        (Body::Matrix { .. }, None) => real_matrix(file),
    }
}

fn cmd_check(a: &CheckArgs, out: &mut String) -> Result<i32, CliError> {
    let file = load(&a.input)?;
    match file.mode {
        ScalarMode::Exact => check_in::<Rational>(a, &file, out),
        ScalarMode::Float => check_in::<f64>(a, &file, out),
    }
}

fn check_in<S: CliScalar>(
    a: &CheckArgs,
    file: &KernelFile,
    out: &mut String,
) -> Result<i32, CliError> {
    let t = kernel_for_check::<S>(file, a.level)?;
    let report = daugavet_report(&t, file.tol);
    let json = report_file(&report, file, &a.input.display().to_string(), a.level);
    let text = serde_json::to_string_pretty(&json).expect("reports serialize") + "\n";
    let holds = report.holds(file.tol);
    match &a.output {
        Some(path) => {
            write_file(path, &text)?;
            out.push_str(&format!(
                "n = {}\nopnorm = {}\ndefect = {}\ndefect_bound = {}\ndouble_star = {}\ndaugavet: {}\n",
                t.n(),
                report.opnorm.show(),
                report.defect.show(),
                report.defect_bound.show(),
                report.double_star,
                if holds { "holds" } else { "fails" },
            ));
        }
        None => out.push_str(&text),
    }
    Ok(if holds { EXIT_HOLDS } else { EXIT_FAILS })
}

fn spec_of(file: &KernelFile) -> Result<&KernelSpec, CliError> {
    match &file.body {
        Body::Spec(s) => Ok(s),
        Body::Matrix { .. } => Err(CliError::Usage("expected a `spec` input".into())),
    }
}

fn cmd_refine(a: &RefineArgs, out: &mut String) -> Result<i32, CliError> {
    let file = load(&a.spec)?;
    let spec = spec_of(&file)?;
    let csv = match file.mode {
        ScalarMode::Exact => refine_csv::<Rational>(spec, a, file.tol),
        ScalarMode::Float => refine_csv::<f64>(spec, a, file.tol),
    };
    let (csv, exponent) = match csv {
        Ok(v) => v,
        Err(CliError::Core(e @ daugavet_core::Error::DiffuseBoundViolated { .. })) => {
            out.push_str(&format!("{e}\n"));
            return Ok(EXIT_FAILS);
        }
        Err(e) => return Err(e),
    };
    match &a.csv {
        Some(path) => {
            write_file(path, &csv)?;
            let exponent = exponent.map_or("none".to_string(), |e| format!("{e}"));
            out.push_str(&format!(
                "wrote {} levels to {}\ndecay exponent: {exponent}\n",
                a.levels.len(),
                path.display()
            ));
        }
        None => out.push_str(&csv),
    }
    Ok(EXIT_HOLDS)
}

/// Values are written as shortest round-trip decimals.
pub fn study_csv<S: Scalar>(study: &RefinementStudy<S>) -> String {
    let mut csv = String::from("level,opnorm,defect,defect_bound,max_abs_diag\n");
    for r in &study.results {
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            r.level,
            r.opnorm.to_f64(),
            r.defect.to_f64(),
            r.defect_bound.to_f64(),
            r.max_abs_diagonal.to_f64()
        ));
    }
    csv
}

fn refine_csv<S: CliScalar>(
    spec: &KernelSpec,
    a: &RefineArgs,
    tol: Tolerance,
) -> Result<(String, Option<f64>), CliError> {
    let study = if a.dual {
        dual_study::<S>(spec, &a.levels, tol)?
    } else {
        refinement_study::<S>(spec, &a.levels, tol)?
    };
    Ok((study_csv(&study), study.decay_exponent))
}

fn cmd_sweep(input: &Path, out: &mut String) -> Result<i32, CliError> {
    let file = load(input)?;
    match file.mode {
        ScalarMode::Exact => sweep_in::<Rational>(&file, out),
        ScalarMode::Float => sweep_in::<f64>(&file, out),
    }
}

fn sweep_in<S>(file: &KernelFile, out: &mut String) -> Result<i32, CliError>
where
    S: CliScalar,
    Complex<S>: Weight<Real = S>,
{
    let Body::Matrix { matrix, .. } = &file.body else {
        return Err(CliError::Usage("sweep needs a `matrix` input".into()));
    };
    let t = KernelOperator::from_matrix(S::entries(matrix).expect("parsed in mode").clone())?;
    let sweep = complex_sweep_max(&t);
    let target = S::one() + t.sup_operator_norm();
    let holds = sweep
        .value
        .eq_within(&daugavet_core::Surd::rational(target.clone()), file.tol);
    out.push_str(&format!(
        "lambda* = {}\nvalue = {}\n1 + norm = {}\ndaugavet: {}\n",
        show_complex(&sweep.lambda),
        show_surd(&sweep.value),
        target.show(),
        if holds { "holds" } else { "fails" }
    ));
    Ok(if holds { EXIT_HOLDS } else { EXIT_FAILS })
}

fn scalar_arg<S: CliScalar>(text: &str, name: &str) -> Result<S, CliError> {
    parse_rational(text)
        .map(|r| S::from_rational(&r))
        .ok_or_else(|| CliError::Usage(format!("--{name}: not a number: {text:?}")))
}

fn cmd_escalate(a: &EscalateArgs, out: &mut String) -> Result<i32, CliError> {
    match (&a.spec, &a.mock) {
        (_, Some(name)) => {
            let mock = Mock::from_name(name).ok_or_else(|| {
                CliError::Usage(format!(
                    "unknown mock `{name}`; expected one of {}",
                    Mock::NAMES.join(", ")
                ))
            })?;
            escalate_in::<Rational>(&mock, a, out)
        }
        (Some(path), None) => {
            let file = load(path)?;
            let spec = spec_of(&file)?.clone();
            match file.mode {
                ScalarMode::Exact => escalate_in::<Rational>(
                    &SpecOracle::new::<Rational>(spec, a.max_level)?,
                    a,
                    out,
                ),
                ScalarMode::Float => {
                    escalate_in::<f64>(&SpecOracle::new::<f64>(spec, a.max_level)?, a, out)
                }
            }
        }
        (None, None) => Err(CliError::Usage(
            "one of --spec or --mock is required".into(),
        )),
    }
}

fn write_chain<S: CliScalar>(chain: &WitnessChain<S>, out: &mut String) {
    out.push_str(&format!(
        "patch [{}, {}]\n",
        format::format_decimal(&chain.patch.0),
        format::format_decimal(&chain.patch.1)
    ));
    for (k, p) in chain.points.iter().enumerate() {
        let members = if k == 0 {
            String::new()
        } else {
            let set = &chain.members[k - 1];
            format!(", |U_{k}| = {} at level {}", set.len(), set.level)
        };
        out.push_str(&format!(
            "s_{k} = {} (level {}, index {}){members}\n",
            format::format_decimal(&p.coordinate()),
            p.level,
            p.index
        ));
    }
}

fn escalate_in<S: CliScalar>(
    oracle: &dyn KernelOracle<S>,
    a: &EscalateArgs,
    out: &mut String,
) -> Result<i32, CliError> {
    let params = EscalationParams {
        beta: scalar_arg::<S>(&a.beta, "beta")?,
        bound: scalar_arg::<S>(&a.bound, "bound")?,
        mode: match a.mode {
            ModeArg::Atom => ContinuityMode::Atom,
            ModeArg::Norm => ContinuityMode::Norm,
        },
        max_level: a.max_level,
    };
    match escalate(oracle, &params)? {
        EscalationOutcome::BoundViolated(chain) => {
            out.push_str(&format!(
                "BoundViolated, {} points, mass {}\n",
                chain.points.len(),
                chain.certified_mass.show()
            ));
            write_chain(&chain, out);
            out.push_str(&format!("verified: {}\n", verify_chain(oracle, &chain)));
            Ok(EXIT_FAILS)
        }
        EscalationOutcome::Stalled {
            step,
            reason,
            chain,
        } => {
            out.push_str(&format!("Stalled at step {step}: {}\n", reason.name()));
            write_chain(&chain, out);
            Ok(EXIT_HOLDS)
        }
        EscalationOutcome::NoNegativePatch => {
            out.push_str("NoNegativePatch\n");
            Ok(EXIT_HOLDS)
        }
    }
}

fn cmd_search(a: &SearchArgs, out: &mut String) -> Result<i32, CliError> {
    let class = RandomClass::from_name(&a.class)
        .ok_or_else(|| CliError::Usage(format!("unknown class `{}`", a.class)))?;
    let predicate = Predicate::from_name(&a.predicate)
        .ok_or_else(|| CliError::Usage(format!("unknown predicate `{}`", a.predicate)))?;
    if !(a.magnitude.is_finite() && a.magnitude > 0.0) {
        return Err(CliError::Usage("--magnitude must be positive".into()));
    }
    let mut config = SearchConfig::new(class, a.n, a.trials, a.seed, predicate);
    config.magnitude = a.magnitude;
    let exact = match a.scalar {
        Some(ScalarArg::Exact) => true,
        Some(ScalarArg::Float) => false,
        None => predicate.requires_exact() || class == RandomClass::RationalSigned,
    };
    let (count, lines) = if exact {
        search_lines::<Rational>(&config)?
    } else {
        search_lines::<f64>(&config)?
    };
    out.push_str(&format!(
        "findings: {count} (predicate {}, class {}, n {}, trials {}, seed {})\n",
        predicate.name(),
        class.name(),
        a.n,
        a.trials,
        a.seed
    ));
    out.push_str(&lines);
    Ok(if count > 0 && predicate.is_theorem() {
        EXIT_FAILS
    } else {
        EXIT_HOLDS
    })
}

fn search_lines<S: CliScalar>(config: &SearchConfig) -> Result<(usize, String), CliError> {
    let findings = search_counterexamples::<S>(config)?;
    let lines = findings
        .iter()
        .map(|f| {
            let kernel: Vec<Value> = f
                .kernel
                .iter()
                .map(|row| Value::Array(row.iter().map(|x| x.to_json()).collect()))
                .collect();
            format!(
                "trial {}: defect {} kernel {}\n",
                f.trial,
                f.report.defect.show(),
                Value::Array(kernel)
            )
        })
        .collect();
    Ok((findings.len(), lines))
}

fn cmd_oracle(input: &Path, out: &mut String) -> Result<i32, CliError> {
    let file = load(input)?;
    match file.mode {
        ScalarMode::Exact => oracle_in::<Rational>(&file, out),
        ScalarMode::Float => oracle_in::<f64>(&file, out),
    }
}

fn oracle_in<S: CliScalar>(file: &KernelFile, out: &mut String) -> Result<i32, CliError> {
    let t = real_matrix::<S>(file)?;
    if t.n() > BRUTE_FORCE_MAX_N {
        return Err(daugavet_core::Error::SizeGuard(format!(
            "oracle enumerates sign vectors for n <= {BRUTE_FORCE_MAX_N}, got {}",
            t.n()
        ))
        .into());
    }
    let one = S::one();
    let pairs = [
        ("norm T", t.sup_operator_norm(), brute_force_norm(&t)?),
        (
            "norm I+T",
            norm_id_plus_scaled(&t, &one),
            brute_force_norm(&t.identity_plus(&one)?)?,
        ),
        (
            "norm I-T",
            norm_id_plus_scaled(&t, &-one.clone()),
            brute_force_norm(&t.identity_plus(&-one.clone())?)?,
        ),
    ];
    let mut all = true;
    for (name, closed, brute) in &pairs {
        let ok = file.tol.eq(closed, brute);
        all &= ok;
        out.push_str(&format!(
            "{name}: closed form {}, brute force {} ({})\n",
            closed.show(),
            brute.show(),
            if ok { "match" } else { "mismatch" }
        ));
    }
    out.push_str(if all { "match\n" } else { "mismatch\n" });
    Ok(if all { EXIT_HOLDS } else { EXIT_FAILS })
}
