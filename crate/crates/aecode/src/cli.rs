//! Command-line front end.
//!
//! Exit codes: 0 pass, 1 usage or malformed input, 2 verification failure.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::{Read, Write};
use std::path::PathBuf;

use aecode_core::codes::{binomial_ae_code, counter_symmetric_code, detection_code, symmetric_code, validate};
use aecode_core::kl::{detection_check, kl_check, reduction_check, Engine, KlReport, DEFAULT_TOLERANCE};
use aecode_core::search::scan::{describe, Ansatz, ScanConfig, ScanTable};
use aecode_core::search::{solution_to_code, solve, SearchProblem, Solution};
use aecode_core::{first_order_channel, order_n_channel, Code, ErrorSet, Family, HalfInt, Mode};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value as Json};

use crate::format::{code_from_json, code_to_json, kl_report_json, reduction_report_json, scan_csv, scan_json, solution_json};
use crate::fuzz::{fuzz, FuzzConfig, DEFAULT_SEED};
use crate::parallel::parallel_scan;
use crate::report::props_report;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_FAIL: i32 = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum EngineName {
    Exact,
    Float,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
    Human,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum VerifyMode {
    Correct,
    Detect,
    Reduce,
    All,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FamilyName {
    Symmetric,
    Detection,
    CounterSymmetric,
    Binomial,
}

#[derive(Parser, Debug)]
#[command(name = "aecode", version, about = "Exact construction, verification and search for angular momentum codes")]
pub struct Cli {
    /// Arithmetic engine; exact is the reference
    #[arg(long, global = true, value_enum, env = "AE_ENGINE", default_value = "exact")]
    pub engine: EngineName,

    /// Relative tolerance for the float engine
    #[arg(long, global = true, default_value_t = DEFAULT_TOLERANCE)]
    pub tolerance: f64,

    /// Output format (csv only for scan)
    #[arg(long, global = true, value_enum)]
    pub format: Option<OutputFormat>,

    /// Worker threads for scan and fuzz
    #[arg(long, global = true, default_value_t = 1)]
    pub jobs: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build a code from one of the closed-form families
    Construct(ConstructArgs),
    /// Check a code file against the full, detection and reduced conditions
    Verify(VerifyArgs),
    /// Operator product polynomials and adjoint symmetries
    Props(PropsArgs),
    /// Solve the moment system over one pair of supports
    Search(SearchArgs),
    /// Enumerate supports under an ansatz and solve each
    Scan(ScanArgs),
    /// Randomized agreement between the reduction and the full check
    Fuzz(FuzzArgs),
}

#[derive(Args, Debug)]
pub struct ConstructArgs {
    #[arg(value_enum)]
    pub family: FamilyName,
    #[arg(long, allow_hyphen_values = true)]
    pub ell: Option<HalfInt>,
    #[arg(long, allow_hyphen_values = true)]
    pub m: Option<HalfInt>,
    #[arg(long, allow_hyphen_values = true)]
    pub m1: Option<HalfInt>,
    #[arg(long, allow_hyphen_values = true)]
    pub m2: Option<HalfInt>,
    #[arg(long, allow_hyphen_values = true)]
    pub n: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    pub ell0: Option<HalfInt>,
    #[arg(long, allow_hyphen_values = true)]
    pub m0: Option<HalfInt>,
    /// Detection variant (counter-symmetric and binomial)
    #[arg(long)]
    pub detect: bool,
    /// Write to a file instead of stdout
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Code JSON file, or `-` for stdin
    pub file: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub order: i64,
    #[arg(long, value_enum, default_value = "all")]
    pub mode: VerifyMode,
}

#[derive(Args, Debug)]
pub struct PropsArgs {
    #[arg(long, default_value = "10")]
    pub ell0: HalfInt,
    #[arg(long, default_value_t = 2)]
    pub n: i64,
    /// Largest J for the symmetry relations
    #[arg(long, default_value_t = 10)]
    pub j_max: i64,
}

#[derive(Args, Debug)]
pub struct SearchArgs {
    #[arg(long)]
    pub ell0: HalfInt,
    /// Comma-separated m values of codeword 0
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    pub support0: Vec<HalfInt>,
    /// Comma-separated m values of codeword 1
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    pub support1: Vec<HalfInt>,
    #[arg(long, default_value_t = 1)]
    pub n: i64,
    #[arg(long)]
    pub detect: bool,
    /// Print the representative code instead of the solution family
    #[arg(long)]
    pub emit_code: bool,
}

#[derive(Args, Debug)]
pub struct ScanArgs {
    #[arg(long, default_value_t = 1)]
    pub n: i64,
    /// Defaults to counter_symmetric, or exhaustive_small with --detect
    #[arg(long)]
    pub ansatz: Option<Ansatz>,
    #[arg(long, default_value = "1/2")]
    pub min_ell: HalfInt,
    #[arg(long, default_value = "6")]
    pub max_ell: HalfInt,
    /// Points per codeword
    #[arg(long, default_value_t = 3)]
    pub max_points: usize,
    #[arg(long)]
    pub detect: bool,
}

#[derive(Args, Debug)]
pub struct FuzzArgs {
    #[arg(long, default_value_t = 1)]
    pub n: i64,
    #[arg(long, default_value_t = 10_000)]
    pub cases: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, default_value = "14")]
    pub max_ell: HalfInt,
    #[arg(long)]
    pub detect: bool,
}

/// Validated run settings shared by every command.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub command: &'static str,
    pub parameters: BTreeMap<String, String>,
    pub output_format: OutputFormat,
    pub engine: Engine,
    pub tolerance: f64,
    pub parallelism: usize,
}

impl RunConfig {
    pub fn from_cli(cli: &Cli) -> Result<Self, String> {
        if !(cli.tolerance > 0.0 && cli.tolerance.is_finite()) {
            return Err(format!("--tolerance must be positive, got {}", cli.tolerance));
        }
        if cli.jobs == 0 {
            return Err(String::from("--jobs must be at least 1"));
        }
        let engine = match cli.engine {
            EngineName::Exact => Engine::Exact,
            EngineName::Float => Engine::Float { tolerance: cli.tolerance },
        };
        let (command, default_format) = match &cli.command {
            Command::Construct(_) => ("construct", OutputFormat::Json),
            Command::Verify(_) => ("verify", OutputFormat::Json),
            Command::Props(_) => ("props", OutputFormat::Json),
            Command::Search(_) => ("search", OutputFormat::Json),
            Command::Scan(_) => ("scan", OutputFormat::Csv),
            Command::Fuzz(_) => ("fuzz", OutputFormat::Json),
        };
        let output_format = cli.format.unwrap_or(default_format);
        if output_format == OutputFormat::Csv && command != "scan" {
            return Err(format!("csv output is only available for scan, not {command}"));
        }
        let parameters = BTreeMap::from([(String::from("arguments"), format!("{:?}", cli.command))]);
        Ok(RunConfig { command, parameters, output_format, engine, tolerance: cli.tolerance, parallelism: cli.jobs })
    }
}

/// Outcome of a command: text for stdout, optional notes for stderr, exit code.
struct Output {
    stdout: String,
    stderr: String,
    code: i32,
}

impl Output {
    fn ok(stdout: String) -> Self {
        Output { stdout, stderr: String::new(), code: EXIT_PASS }
    }
    fn usage(message: impl Into<String>) -> Self {
        Output { stdout: String::new(), stderr: message.into(), code: EXIT_USAGE }
    }
}

fn pretty(doc: &Json) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("JSON value serializes");
    s.push('\n');
    s
}

fn require<T: Copy>(value: Option<T>, flag: &str, family: &str) -> Result<T, String> {
    value.ok_or_else(|| format!("{family} code needs --{flag}"))
}

fn construct(args: &ConstructArgs) -> Result<Code, String> {
    let mode = if args.detect { Mode::Detection } else { Mode::Correction };
    let built = match args.family {
        FamilyName::Symmetric => {
            let f = "symmetric";
            symmetric_code(require(args.ell, "ell", f)?, require(args.m1, "m1", f)?, require(args.m2, "m2", f)?)
        }
        FamilyName::Detection => {
            let f = "detection";
            detection_code(require(args.ell, "ell", f)?, require(args.m, "m", f)?)
        }
        FamilyName::CounterSymmetric => {
            let f = "counter-symmetric";
            counter_symmetric_code(require(args.ell, "ell", f)?, require(args.m1, "m1", f)?, require(args.m2, "m2", f)?, mode)
        }
        FamilyName::Binomial => {
            let f = "binomial";
            let ell0 = args.ell0.or(args.ell);
            binomial_ae_code(require(args.n, "n", f)?, require(ell0, "ell0", f)?, require(args.m0, "m0", f)?, mode)
        }
    };
    built.map_err(|e| e.to_string())
}

fn cmd_construct(args: &ConstructArgs) -> Output {
    let code = match construct(args) {
        Ok(c) => c,
        Err(e) => return Output::usage(e),
    };
    let mut text = code_to_json(&code);
    text.push('\n');
    match &args.output {
        Some(path) => match std::fs::write(path, &text) {
            Ok(()) => Output::ok(String::new()),
            Err(e) => Output::usage(format!("cannot write {}: {e}", path.display())),
        },
        None => Output::ok(text),
    }
}

fn read_input(path: &PathBuf) -> std::io::Result<String> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s)?;
        Ok(s)
    } else {
        std::fs::read_to_string(path)
    }
}

/// The nine first-order operators at order 1, the general channel above.
pub fn channel_for(ell0: HalfInt, order: i64) -> aecode_core::Result<ErrorSet> {
    if order == 1 {
        first_order_channel(ell0)
    } else {
        order_n_channel(ell0, order)
    }
}

fn family_mode(family: Family) -> Mode {
    match family {
        Family::Detection | Family::CounterSymmetric(Mode::Detection) | Family::Binomial(Mode::Detection) => Mode::Detection,
        _ => Mode::Correction,
    }
}

fn human_kl(name: &str, r: &KlReport, out: &mut String) {
    let verdict = if r.passed() { "pass" } else { "FAIL" };
    out.push_str(&format!(
        "{name}: {verdict} ({} pairs checked, {} structurally satisfied, {} violations)\n",
        r.pairs.len(),
        r.structurally_satisfied.len(),
        r.violations.len()
    ));
    for v in r.violations.iter().take(20) {
        out.push_str(&format!("  {}\n", aecode_core::kl::describe_violation(r, v)));
    }
}

fn cmd_verify(args: &VerifyArgs, run: &RunConfig) -> Output {
    let text = match read_input(&args.file) {
        Ok(t) => t,
        Err(e) => return Output::usage(format!("cannot read {}: {e}", args.file.display())),
    };
    let code = match code_from_json(&text) {
        Ok(c) => c,
        Err(e) => return Output::usage(format!("{}: {e}", args.file.display())),
    };
    let findings = validate(&code);
    let needs_channel = matches!(args.mode, VerifyMode::Correct | VerifyMode::Detect | VerifyMode::All);
    let channel = if needs_channel {
        match channel_for(code.ell0(), args.order) {
            Ok(c) => Some(c),
            Err(e) => return Output::usage(e.to_string()),
        }
    } else if args.order < 1 {
        return Output::usage(format!("--order must be at least 1, got {}", args.order));
    } else {
        None
    };
    let mut checks = serde_json::Map::new();
    let mut human = format!("code: {} on ℓ₀ = {}, order {}\n", code.family.name(), code.ell0(), args.order);
    let mut passed = findings.is_empty();
    for f in &findings {
        human.push_str(&format!("invalid: {f}\n"));
    }
    let run_correct = matches!(args.mode, VerifyMode::Correct | VerifyMode::All);
    let run_detect = matches!(args.mode, VerifyMode::Detect | VerifyMode::All);
    let run_reduce = matches!(args.mode, VerifyMode::Reduce | VerifyMode::All);
    if let Some(ch) = &channel {
        if run_correct {
            let r = kl_check(&code, ch, run.engine).expect("manifold matches by construction");
            passed &= r.passed();
            human_kl("correction", &r, &mut human);
            checks.insert("correction".into(), kl_report_json(&r));
        }
        if run_detect {
            let r = detection_check(&code, ch, run.engine).expect("manifold matches by construction");
            passed &= r.passed();
            human_kl("detection", &r, &mut human);
            checks.insert("detection".into(), kl_report_json(&r));
        }
    }
    if run_reduce {
        let mode = family_mode(code.family);
        let r = reduction_check(&code, args.order, mode, run.engine);
        passed &= r.passed();
        human.push_str(&format!(
            "reduction ({:?}): {} (spacing {} vs {} required, mismatched powers {:?})\n",
            mode,
            if r.passed() { "pass" } else { "FAIL" },
            r.spacing.map_or_else(|| String::from("n/a"), |s| s.to_string()),
            r.required_spacing,
            r.mismatched
        ));
        checks.insert("reduction".into(), reduction_report_json(&r));
    }
    human.push_str(if passed { "verdict: pass\n" } else { "verdict: FAIL\n" });
    let doc = json!({
        "code": { "family": code.family.name(), "ell0_times_2": code.ell0().twice() },
        "order": args.order,
        "findings": findings.iter().map(ToString::to_string).collect::<Vec<_>>(),
        "checks": Json::Object(checks),
        "passed": passed,
    });
    let stdout = match run.output_format {
        OutputFormat::Human => human,
        _ => pretty(&doc),
    };
    Output { stdout, stderr: String::new(), code: if passed { EXIT_PASS } else { EXIT_FAIL } }
}

fn cmd_props(args: &PropsArgs, run: &RunConfig) -> Output {
    let (passed, doc) = match props_report(args.ell0, args.n, args.j_max) {
        Ok(r) => r,
        Err(e) => return Output::usage(e.to_string()),
    };
    let stdout = match run.output_format {
        OutputFormat::Human => {
            let s = &doc["summary"];
            format!(
                "ℓ₀ = {}, n = {}: {} pairs, {} fit, {} structurally zero, {} too few points, {} fail; symmetry {}/{} hold\nverdict: {}\n",
                args.ell0,
                args.n,
                s["pairs"],
                s["fits"],
                s["structurally_zero"],
                s["too_few_points"],
                s["fails"],
                s["symmetry_checks"].as_u64().unwrap_or(0) - s["symmetry_failures"].as_u64().unwrap_or(0),
                s["symmetry_checks"],
                if passed { "pass" } else { "FAIL" }
            )
        }
        _ => pretty(&doc),
    };
    Output { stdout, stderr: String::new(), code: if passed { EXIT_PASS } else { EXIT_FAIL } }
}

fn cmd_search(args: &SearchArgs, run: &RunConfig) -> Output {
    let mode = if args.detect { Mode::Detection } else { Mode::Correction };
    let problem = SearchProblem::new(args.ell0, args.support0.clone(), args.support1.clone(), args.n, mode);
    let solution = match solve(&problem) {
        Ok(s) => s,
        Err(e) => return Output::usage(e.to_string()),
    };
    if args.emit_code {
        return match &solution {
            Solution::Feasible(f) => match solution_to_code(&problem, &f.particular) {
                Ok(code) => Output::ok(code_to_json(&code) + "\n"),
                Err(e) => Output::usage(e.to_string()),
            },
            Solution::Infeasible(c) => Output { stdout: String::new(), stderr: format!("{c}\n"), code: EXIT_PASS },
        };
    }
    let stdout = match run.output_format {
        OutputFormat::Human => match &solution {
            Solution::Feasible(f) => {
                let fmt = |v: &[num_rational::BigRational]| {
                    v.iter().map(crate::format::rational_string).collect::<Vec<_>>().join(", ")
                };
                let mut s = format!(
                    "feasible, {} free dimension(s)\nrepresentative: p = [{}], q = [{}]\n",
                    f.free_dimension,
                    fmt(&f.particular.p),
                    fmt(&f.particular.q)
                );
                for v in f.vertices.iter().flatten() {
                    s.push_str(&format!("vertex: p = [{}], q = [{}]\n", fmt(&v.p), fmt(&v.q)));
                }
                s
            }
            Solution::Infeasible(c) => format!("{c}\n"),
        },
        _ => pretty(&solution_json(&problem, &solution)),
    };
    Output::ok(stdout)
}

fn scan_config(args: &ScanArgs) -> ScanConfig {
    let mode = if args.detect { Mode::Detection } else { Mode::Correction };
    let ansatz = args.ansatz.unwrap_or(if args.detect { Ansatz::ExhaustiveSmall } else { Ansatz::CounterSymmetric });
    let mut config = ScanConfig::new(args.n, ansatz, mode, args.max_ell);
    config.min_ell0 = args.min_ell;
    config.max_points = args.max_points;
    config
}

fn human_scan(table: &ScanTable) -> String {
    let mut s = format!("{}\n", describe(&table.config));
    for r in &table.rows {
        s.push_str(&format!(
            "ℓ₀ = {:>5}  {:?} | {:?}  p = {:?}  q = {:?}  verified = {}\n",
            r.ell0.to_string(),
            r.support0.iter().map(ToString::to_string).collect::<Vec<_>>(),
            r.support1.iter().map(ToString::to_string).collect::<Vec<_>>(),
            r.probs.p.iter().map(crate::format::rational_string).collect::<Vec<_>>(),
            r.probs.q.iter().map(crate::format::rational_string).collect::<Vec<_>>(),
            r.kl_verified
        ));
    }
    s
}

fn minimal_note(table: &ScanTable) -> String {
    match table.minimal_ell0() {
        Some(ell) => format!("minimal ℓ₀ = {ell} ({} feasible of {} configurations)\n", table.rows.len(), table.configurations),
        None => format!("no verified code ({} feasible of {} configurations)\n", table.rows.len(), table.configurations),
    }
}

fn cmd_scan(args: &ScanArgs, run: &RunConfig) -> Output {
    let config = scan_config(args);
    let table = match parallel_scan(&config, run.engine, run.parallelism) {
        Ok(t) => t,
        Err(e) => return Output::usage(e.to_string()),
    };
    let stdout = match run.output_format {
        OutputFormat::Csv => scan_csv(&table),
        OutputFormat::Json => pretty(&scan_json(&table)),
        OutputFormat::Human => human_scan(&table) + &minimal_note(&table),
    };
    Output { stdout, stderr: minimal_note(&table), code: EXIT_PASS }
}

fn cmd_fuzz(args: &FuzzArgs, run: &RunConfig) -> Output {
    let mut config = FuzzConfig::new(args.n, args.cases, args.seed);
    config.max_ell0 = args.max_ell;
    config.mode = if args.detect { Mode::Detection } else { Mode::Correction };
    if args.n < 1 {
        return Output::usage(format!("--n must be at least 1, got {}", args.n));
    }
    if args.max_ell < HalfInt::from_int(args.n) {
        return Output::usage(format!("--max-ell must be at least n = {}", args.n));
    }
    let report = match fuzz(&config, run.engine, run.parallelism) {
        Ok(r) => r,
        Err(e) => return Output::usage(e.to_string()),
    };
    let stdout = match run.output_format {
        OutputFormat::Human => format!(
            "n = {}, {} cases (seed {}): reduction pass {}, full pass {}, agree {}, converse findings {}, soundness violations {}\n",
            report.n,
            report.cases,
            report.seed,
            report.reduction_pass,
            report.kl_pass,
            report.agreements,
            report.converse_findings,
            report.soundness_violations.len()
        ),
        _ => pretty(&serde_json::to_value(&report).expect("report serializes")),
    };
    Output { stdout, stderr: String::new(), code: if report.passed() { EXIT_PASS } else { EXIT_FAIL } }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
            let rendered = e.render().to_string();
            let _ = if e.use_stderr() { stderr.write_all(rendered.as_bytes()) } else { stdout.write_all(rendered.as_bytes()) };
            return code;
        }
    };
    let run = match RunConfig::from_cli(&cli) {
        Ok(r) => r,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return EXIT_USAGE;
        }
    };
    let out = match &cli.command {
        Command::Construct(a) => cmd_construct(a),
        Command::Verify(a) => cmd_verify(a, &run),
        Command::Props(a) => cmd_props(a, &run),
        Command::Search(a) => cmd_search(a, &run),
        Command::Scan(a) => cmd_scan(a, &run),
        Command::Fuzz(a) => cmd_fuzz(a, &run),
    };
    let _ = stdout.write_all(out.stdout.as_bytes());
    if !out.stderr.is_empty() {
        let prefix = if out.code == EXIT_USAGE { "error: " } else { "" };
        let _ = write!(stderr, "{prefix}{}", out.stderr);
        if !out.stderr.ends_with('\n') {
            let _ = writeln!(stderr);
        }
    }
    out.code
}
