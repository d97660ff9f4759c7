//! Command-line front end for the thermokit library.
//!
//! Every subcommand reads its inputs (usually a map-description JSON file),
//! runs one library pipeline, and writes a CSV or JSON artifact to `--out`
//! (stdout by default).  Artifacts are pure functions of the flags: re-running
//! a command byte-for-byte reproduces the file.  CSV artifacts start with a
//! versioned `# thermokit <command> v1` comment; JSON artifacts carry a
//! `schema_version` field.
//!
//! Exit codes: 0 success; 2 configuration error (bad flags, malformed map
//! file, a computation requested for the wrong kind of map — nothing is
//! written); 3 numeric non-convergence (per-point failures are flagged in the
//! artifact, which is still written); 4 word budget exceeded.

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use thermokit::induced::InducedScheme;
use thermokit::maps::model_from_json;
use thermokit::orbits::{self, CFKind};
use thermokit::pressure::{self, PressureOptions, PressureValue};
use thermokit::report::{self, ReportOptions};
use thermokit::spectrum;
use thermokit::symbolic::{self, CyclePotential, RuleKind};
use thermokit::{Error as TkError, MapModel};

/// Version stamp written into every artifact.
const SCHEMA_VERSION: u32 = 1;

#[derive(Parser)]
#[command(
    name = "thermokit",
    version,
    about = "Pressure, Lyapunov spectra, and symbolic dynamics of countable-branch interval maps"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Pressure t ↦ P(−t log|T′|) over a parameter grid.
    PressureCurve(PressureCurveArgs),
    /// Lyapunov spectrum L(α): Legendre transform of the pressure curve.
    Spectrum(SpectrumArgs),
    /// Spectrum features: slope limits, extremes, asymptote, inflections.
    Inflection(InflectionArgs),
    /// Parse a map description and print its structural summary.
    ValidateMap(ValidateMapArgs),
    /// Capped cycle pressure of a countable-state transition rule.
    Gurevich(GurevichArgs),
    /// Exhaustive finite-depth itinerary conjugacy check for a truncation.
    ShiftCheck(ShiftCheckArgs),
    /// Seeded Birkhoff averages of log|T′| along forward orbits.
    OrbitStats(OrbitStatsArgs),
    /// Continued-fraction digits, with approximants for regular digits.
    Cf(CfArgs),
    /// Full per-family battery as a single JSON document.
    Report(ReportArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodFlag {
    /// Automatic dispatch over cylinder sums and truncation ladders.
    Cylinder,
    /// First-return (inducing) root; parabolic families only.
    Induced,
}

#[derive(Args)]
struct MapArg {
    /// Map description file (JSON).
    #[arg(long, value_name = "FILE")]
    map: PathBuf,
}

#[derive(Args)]
struct OutArgs {
    /// Artifact path; stdout when omitted.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Artifact format.
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args)]
struct EngineArgs {
    /// Cylinder depth cap.
    #[arg(long, value_name = "K")]
    depth_cap: Option<u32>,
    /// Truncation ladder for the extrapolation schedule, e.g. 25,50,100.
    #[arg(long, value_delimiter = ',', value_name = "N,N,...")]
    truncations: Option<Vec<u64>>,
    /// Root-bracketing tolerance.
    #[arg(long, value_name = "X")]
    tol: Option<f64>,
}

impl EngineArgs {
    fn options(&self) -> PressureOptions {
        let mut opts = PressureOptions::default();
        if let Some(d) = self.depth_cap {
            opts.depth_cap = d;
        }
        if let Some(list) = &self.truncations {
            opts.deep_truncations = list.clone();
        }
        if let Some(tol) = self.tol {
            opts.bracket_tol = tol;
        }
        opts
    }
}

/// `a:b:n` → `n` evenly spaced values from `a` to `b` inclusive.
#[derive(Clone)]
struct Grid(Vec<f64>);

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let [a, b, n] = parts[..] else {
            return Err(format!("expected a:b:n, got `{s}`"));
        };
        let a: f64 = a.parse().map_err(|e| format!("bad grid start: {e}"))?;
        let b: f64 = b.parse().map_err(|e| format!("bad grid end: {e}"))?;
        let n: usize = n.parse().map_err(|e| format!("bad grid count: {e}"))?;
        if !a.is_finite() || !b.is_finite() {
            return Err("grid endpoints must be finite".into());
        }
        if n == 0 {
            return Err("grid needs at least one point".into());
        }
        if n == 1 {
            if a != b {
                return Err("a 1-point grid needs matching endpoints".into());
            }
            return Ok(Grid(vec![a]));
        }
        if b <= a {
            return Err("grid end must exceed its start".into());
        }
        let step = (b - a) / (n - 1) as f64;
        Ok(Grid((0..n).map(|i| a + step * i as f64).collect()))
    }
}

#[derive(Args)]
struct PressureCurveArgs {
    #[command(flatten)]
    map: MapArg,
    /// Parameter grid `a:b:n`; a family default when omitted.
    #[arg(long, value_name = "A:B:N")]
    t_grid: Option<Grid>,
    /// Pressure route.
    #[arg(long, value_enum, default_value = "cylinder")]
    method: MethodFlag,
    #[command(flatten)]
    engine: EngineArgs,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct SpectrumArgs {
    #[command(flatten)]
    map: MapArg,
    /// Parameter grid for the underlying pressure curve.
    #[arg(long, value_name = "A:B:N")]
    t_grid: Option<Grid>,
    /// Exponent grid `a:b:n`; a family default when omitted.
    #[arg(long, value_name = "A:B:N")]
    alpha_grid: Option<Grid>,
    #[command(flatten)]
    engine: EngineArgs,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct InflectionArgs {
    #[command(flatten)]
    map: MapArg,
    #[arg(long, value_name = "A:B:N")]
    t_grid: Option<Grid>,
    #[arg(long, value_name = "A:B:N")]
    alpha_grid: Option<Grid>,
    #[command(flatten)]
    engine: EngineArgs,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct ValidateMapArgs {
    #[command(flatten)]
    map: MapArg,
    /// Summary path; stdout when omitted (always JSON).
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum RuleFlag {
    /// Single renewal vertex with a descending tail.
    Renewal,
    /// Full block on the first N+2 vertices over the tail.
    NRenewal,
    /// Full even rows; odd rows step down.
    InfiniteRenewal,
}

/// `zero` or `const:<c>` — the cycle weight applied per step.
#[derive(Clone)]
enum PhiSpec {
    Zero,
    Const(f64),
}

impl FromStr for PhiSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "zero" {
            return Ok(PhiSpec::Zero);
        }
        if let Some(c) = s.strip_prefix("const:") {
            let c: f64 = c.parse().map_err(|e| format!("bad constant: {e}"))?;
            if !c.is_finite() {
                return Err("potential constant must be finite".into());
            }
            return Ok(PhiSpec::Const(c));
        }
        Err(format!("expected `zero` or `const:<c>`, got `{s}`"))
    }
}

impl PhiSpec {
    fn build(&self) -> CyclePotential {
        match self {
            PhiSpec::Zero => CyclePotential::zero(),
            PhiSpec::Const(c) => CyclePotential::constant(*c),
        }
    }
}

#[derive(Args)]
struct GurevichArgs {
    /// Transition rule family.
    #[arg(long, value_enum)]
    rule: RuleFlag,
    /// Block size N for the n-renewal rule.
    #[arg(long, value_name = "N")]
    n: Option<u32>,
    /// Base vertex the cycles must pass through.
    #[arg(long, default_value_t = 0)]
    base: u64,
    /// Longest cycle length examined.
    #[arg(long, default_value_t = 200, value_name = "L")]
    n_max: u32,
    /// Vertex cap of the finite restriction.
    #[arg(long, default_value_t = 12, value_name = "V")]
    cap: u64,
    /// Per-step cycle weight: `zero` or `const:<c>`.
    #[arg(long, default_value = "zero")]
    phi: PhiSpec,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct ShiftCheckArgs {
    #[command(flatten)]
    map: MapArg,
    /// Truncation size (branches kept).
    #[arg(long, value_name = "N")]
    n_branches: u64,
    /// Word length examined exhaustively.
    #[arg(long, default_value_t = 4)]
    depth: u32,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct OrbitStatsArgs {
    #[command(flatten)]
    map: MapArg,
    /// Number of seeded starting points.
    #[arg(long, default_value_t = 100)]
    count: u32,
    /// Forward steps per orbit.
    #[arg(long, default_value_t = 1000)]
    steps: u32,
    /// Generator seed.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindFlag {
    /// Gauss digits `a_k ≥ 1`.
    Regular,
    /// Backward digits `b_k ≥ 2`.
    Backward,
}

#[derive(Args)]
struct CfArgs {
    /// Seed as a decimal string, e.g. 0.4142135623730951.
    #[arg(long, value_name = "0.D...")]
    x: String,
    /// Digits requested.
    #[arg(long, default_value_t = 20)]
    n: u32,
    /// Digit law.
    #[arg(long, value_enum, default_value = "regular")]
    kind: KindFlag,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct ReportArgs {
    #[command(flatten)]
    map: MapArg,
    #[arg(long, value_name = "A:B:N")]
    t_grid: Option<Grid>,
    #[arg(long, value_name = "A:B:N")]
    alpha_grid: Option<Grid>,
    #[command(flatten)]
    engine: EngineArgs,
    /// Document path; stdout when omitted (always JSON).
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            let code = match err.downcast_ref::<TkError>() {
                Some(TkError::BudgetExceeded { .. }) => 4,
                Some(TkError::RootNotBracketed { .. }) => 3,
                Some(_) | None => 2,
            };
            ExitCode::from(code)
        }
    }
}

fn run(command: Command) -> anyhow::Result<u8> {
    match command {
        Command::PressureCurve(args) => run_pressure_curve(args),
        Command::Spectrum(args) => run_spectrum(args),
        Command::Inflection(args) => run_inflection(args),
        Command::ValidateMap(args) => run_validate_map(args),
        Command::Gurevich(args) => run_gurevich(args),
        Command::ShiftCheck(args) => run_shift_check(args),
        Command::OrbitStats(args) => run_orbit_stats(args),
        Command::Cf(args) => run_cf(args),
        Command::Report(args) => run_report(args),
    }
}

fn load_model(arg: &MapArg) -> anyhow::Result<MapModel> {
    let text = fs::read_to_string(&arg.map)
        .with_context(|| format!("reading map file {}", arg.map.display()))?;
    Ok(model_from_json(&text)?)
}

fn emit(out: &Option<PathBuf>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(path) => fs::write(path, text)
            .with_context(|| format!("writing artifact {}", path.display()))?,
        None => print!("{text}"),
    }
    Ok(())
}

/// Snake-case tag of a serializable enum value (matches the JSON artifacts).
fn enum_tag<T: serde::Serialize>(v: &T) -> String {
    match serde_json::to_value(v) {
        Ok(Value::String(s)) => s,
        other => format!("{other:?}"),
    }
}

/// CSV cell for an optional integer.
fn opt_cell<T: std::fmt::Display>(v: &Option<T>) -> String {
    v.as_ref().map(|x| x.to_string()).unwrap_or_default()
}

fn run_pressure_curve(args: PressureCurveArgs) -> anyhow::Result<u8> {
    let model = load_model(&args.map)?;
    let opts = args.engine.options();
    let ts = match &args.t_grid {
        Some(g) => g.0.clone(),
        None => {
            let regime = pressure::classify_regime(&model, &opts)?;
            report::default_t_grid(&model, &regime)
        }
    };

    // Each row is either a full pressure value or a flagged failure; a
    // bracketing failure at one parameter must not discard the others.
    let mut rows: Vec<(f64, Option<PressureValue>)> = Vec::with_capacity(ts.len());
    let mut flagged = false;
    match args.method {
        MethodFlag::Cylinder => {
            for &t in &ts {
                match pressure::pressure(&model, t, &opts) {
                    Ok(v) => rows.push((t, Some(v))),
                    Err(TkError::RootNotBracketed { .. }) => {
                        flagged = true;
                        rows.push((t, None));
                    }
                    Err(e) => return Err(e.into()),
                }
            }
        }
        MethodFlag::Induced => {
            let scheme = InducedScheme::new(&model)?;
            for &t in &ts {
                match scheme.q_star(t) {
                    Ok(q) => {
                        let (lo, hi) = scheme.q_star_bounds(t);
                        let band = pressure::band_at(&model, t)?;
                        rows.push((
                            t,
                            Some(PressureValue {
                                t,
                                value: q.value,
                                lower: lo.min(hi),
                                upper: lo.max(hi),
                                method: pressure::Method::Induced,
                                band: band.band,
                                n: None,
                                depth: None,
                            }),
                        ));
                    }
                    Err(TkError::RootNotBracketed { .. }) => {
                        flagged = true;
                        rows.push((t, None));
                    }
                    Err(e) => return Err(e.into()),
                }
            }
        }
    }

    let text = match args.out.format {
        Format::Csv => {
            let mut s = String::new();
            writeln!(s, "# thermokit pressure-curve v1")?;
            writeln!(s, "# map: {}", model.family.name())?;
            writeln!(s, "t,pressure,lower,upper,method,band,depth,n,status")?;
            for (t, row) in &rows {
                match row {
                    Some(v) => writeln!(
                        s,
                        "{t},{},{},{},{},{},{},{},ok",
                        v.value,
                        v.lower,
                        v.upper,
                        enum_tag(&v.method),
                        enum_tag(&v.band),
                        opt_cell(&v.depth),
                        opt_cell(&v.n),
                    )?,
                    None => writeln!(s, "{t},NaN,NaN,NaN,,,,,no_bracket")?,
                }
            }
            s
        }
        Format::Json => {
            let rows: Vec<Value> = rows
                .iter()
                .map(|(t, row)| match row {
                    Some(v) => {
                        let mut v = serde_json::to_value(v).expect("serializable row");
                        v["status"] = json!("ok");
                        v
                    }
                    None => json!({ "t": t, "status": "no_bracket" }),
                })
                .collect();
            let doc = json!({
                "schema_version": SCHEMA_VERSION,
                "command": "pressure-curve",
                "family": model.family.name(),
                "rows": rows,
            });
            serde_json::to_string_pretty(&doc)? + "\n"
        }
    };
    emit(&args.out.out, &text)?;
    Ok(if flagged { 3 } else { 0 })
}

/// Curve + spectrum on explicit or family-default grids.
fn curve_and_spectrum(
    model: &MapModel,
    t_grid: &Option<Grid>,
    alpha_grid: &Option<Grid>,
    opts: &PressureOptions,
) -> anyhow::Result<(pressure::PressureCurve, spectrum::SpectrumCurve)> {
    let ts = match t_grid {
        Some(g) => g.0.clone(),
        None => {
            let regime = pressure::classify_regime(model, opts)?;
            report::default_t_grid(model, &regime)
        }
    };
    let curve = pressure::PressureCurve::compute(model, &ts, opts)?;
    let alphas = match alpha_grid {
        Some(g) => g.0.clone(),
        None => report::default_alpha_grid(model, &curve),
    };
    let spec = spectrum::legendre_spectrum(&curve, &alphas)?;
    Ok((curve, spec))
}

fn run_spectrum(args: SpectrumArgs) -> anyhow::Result<u8> {
    let model = load_model(&args.map)?;
    let opts = args.engine.options();
    let (_, spec) = curve_and_spectrum(&model, &args.t_grid, &args.alpha_grid, &opts)?;

    let text = match args.out.format {
        Format::Csv => {
            let mut s = String::new();
            writeln!(s, "# thermokit spectrum v1")?;
            writeln!(s, "# map: {}", model.family.name())?;
            writeln!(s, "alpha,status,l,l_lower,l_upper,t_alpha,residual")?;
            for p in &spec.points {
                writeln!(
                    s,
                    "{},{},{},{},{},{},{}",
                    p.alpha,
                    enum_tag(&p.status),
                    p.l,
                    p.l_lower,
                    p.l_upper,
                    p.t_alpha,
                    p.residual,
                )?;
            }
            s
        }
        Format::Json => {
            let doc = json!({
                "schema_version": SCHEMA_VERSION,
                "command": "spectrum",
                "family": model.family.name(),
                "spectrum": spec,
            });
            serde_json::to_string_pretty(&doc)? + "\n"
        }
    };
    emit(&args.out.out, &text)?;
    Ok(0)
}

fn run_inflection(args: InflectionArgs) -> anyhow::Result<u8> {
    let model = load_model(&args.map)?;
    let opts = args.engine.options();
    let (curve, spec) = curve_and_spectrum(&model, &args.t_grid, &args.alpha_grid, &opts)?;
    let feats = spectrum::features(&curve, &spec, &model)?;

    let text = match args.out.format {
        Format::Csv => {
            let mut s = String::new();
            writeln!(s, "# thermokit inflection v1")?;
            writeln!(s, "# map: {}", model.family.name())?;
            writeln!(s, "# alpha_star {} slow {}", feats.alpha_star, feats.alpha_star_slow)?;
            writeln!(s, "# complete {}", feats.inflections_complete)?;
            writeln!(s, "index,alpha")?;
            for (i, a) in feats.inflections.iter().enumerate() {
                writeln!(s, "{},{}", i + 1, a)?;
            }
            s
        }
        Format::Json => {
            let doc = json!({
                "schema_version": SCHEMA_VERSION,
                "command": "inflection",
                "family": model.family.name(),
                "features": feats,
            });
            serde_json::to_string_pretty(&doc)? + "\n"
        }
    };
    emit(&args.out.out, &text)?;
    Ok(0)
}

fn run_validate_map(args: ValidateMapArgs) -> anyhow::Result<u8> {
    let model = load_model(&args.map)?;
    let branches: Value = match model.branch_count() {
        Some(n) => {
            let list: Vec<Value> = (1..=n)
                .map(|k| {
                    let b = model.branch(k);
                    json!({
                        "index": b.index,
                        "interval": [b.lo, b.hi],
                        "parabolic": b.parabolic,
                        "deriv_range": [b.deriv_inf(), b.deriv_sup()],
                    })
                })
                .collect();
            json!(list)
        }
        None => Value::Null,
    };
    let doc = json!({
        "schema_version": SCHEMA_VERSION,
        "command": "validate-map",
        "family": model.family.name(),
        "valid": true,
        "branch_count": model.branch_count(),
        "parabolic": model.is_parabolic(),
        "dim_repeller": model.dim_repeller,
        "branches": branches,
    });
    emit(&args.out, &(serde_json::to_string_pretty(&doc)? + "\n"))?;
    Ok(0)
}

fn run_gurevich(args: GurevichArgs) -> anyhow::Result<u8> {
    let kind = match (args.rule, args.n) {
        (RuleFlag::Renewal, None) => RuleKind::Renewal,
        (RuleFlag::NRenewal, Some(n)) => RuleKind::NRenewal(n),
        (RuleFlag::InfiniteRenewal, None) => RuleKind::InfiniteRenewal,
        (RuleFlag::NRenewal, None) => bail!("--rule n-renewal requires --n"),
        (_, Some(_)) => bail!("--n only applies to --rule n-renewal"),
    };
    let rule = symbolic::build_rule(kind)?;
    let phi = args.phi.build();
    let run = symbolic::gurevich_pressure(&rule, &phi, args.base, args.n_max, args.cap)?;
    let mixing = symbolic::check_mixing(&rule, args.cap)?;

    let rule_name = match kind {
        RuleKind::Renewal => "renewal".to_string(),
        RuleKind::NRenewal(n) => format!("n_renewal({n})"),
        RuleKind::InfiniteRenewal => "infinite_renewal".to_string(),
    };
    let text = match args.out.format {
        Format::Csv => {
            let mut s = String::new();
            writeln!(s, "# thermokit gurevich v1")?;
            writeln!(
                s,
                "# rule {rule_name} base {} cap {} phi {} mixing {mixing}",
                run.base, run.vertex_cap, run.phi_tag,
            )?;
            writeln!(s, "n,log_z_avg")?;
            for (n, v) in &run.entries {
                writeln!(s, "{n},{v}")?;
            }
            writeln!(s, "# stabilized {}", run.estimate)?;
            s
        }
        Format::Json => {
            let doc = json!({
                "schema_version": SCHEMA_VERSION,
                "command": "gurevich",
                "rule": rule_name,
                "base": run.base,
                "vertex_cap": run.vertex_cap,
                "phi": run.phi_tag,
                "mixing": mixing,
                "entries": run.entries,
                "estimate": run.estimate,
            });
            serde_json::to_string_pretty(&doc)? + "\n"
        }
    };
    emit(&args.out.out, &text)?;
    Ok(0)
}

fn run_shift_check(args: ShiftCheckArgs) -> anyhow::Result<u8> {
    let model = load_model(&args.map)?;
    let rep = symbolic::itinerary_conjugacy_check(&model, args.n_branches, args.depth)?;

    let text = match args.out.format {
        Format::Csv => {
            let mut s = String::new();
            writeln!(s, "# thermokit shift-check v1")?;
            writeln!(s, "# map: {}", model.family.name())?;
            writeln!(s, "n_branches,depth,words_checked,cycles_checked,mismatches,clean")?;
            writeln!(
                s,
                "{},{},{},{},{},{}",
                rep.n_branches,
                rep.depth,
                rep.words_checked,
                rep.cycles_checked,
                rep.mismatches.len(),
                rep.clean(),
            )?;
            s
        }
        Format::Json => {
            let doc = json!({
                "schema_version": SCHEMA_VERSION,
                "command": "shift-check",
                "family": model.family.name(),
                "n_branches": rep.n_branches,
                "depth": rep.depth,
                "words_checked": rep.words_checked,
                "cycles_checked": rep.cycles_checked,
                "mismatches": rep.mismatches,
                "clean": rep.clean(),
            });
            serde_json::to_string_pretty(&doc)? + "\n"
        }
    };
    emit(&args.out.out, &text)?;
    Ok(0)
}

fn run_orbit_stats(args: OrbitStatsArgs) -> anyhow::Result<u8> {
    let model = load_model(&args.map)?;
    let samples = orbits::sample_lyapunov(&model, args.count, args.steps, args.seed)?;
    let mut kept: Vec<f64> = samples
        .iter()
        .filter(|s| !s.escaped)
        .map(|s| s.lambda_hat)
        .collect();
    kept.sort_by(f64::total_cmp);
    let median = if kept.is_empty() {
        f64::NAN
    } else {
        kept[kept.len() / 2]
    };

    let text = match args.out.format {
        Format::Csv => {
            let mut s = String::new();
            writeln!(s, "# thermokit orbit-stats v1")?;
            writeln!(
                s,
                "# map: {} count {} steps {} seed {}",
                model.family.name(),
                args.count,
                args.steps,
                args.seed,
            )?;
            writeln!(s, "x0,n,lambda_hat,escaped")?;
            for b in &samples {
                writeln!(s, "{},{},{},{}", b.x0, b.n, b.lambda_hat, b.escaped)?;
            }
            writeln!(s, "# median {median}")?;
            s
        }
        Format::Json => {
            let rows: Vec<Value> = samples
                .iter()
                .map(|b| {
                    json!({
                        "x0": b.x0,
                        "n": b.n,
                        "lambda_hat": b.lambda_hat,
                        "escaped": b.escaped,
                    })
                })
                .collect();
            let doc = json!({
                "schema_version": SCHEMA_VERSION,
                "command": "orbit-stats",
                "family": model.family.name(),
                "count": args.count,
                "steps": args.steps,
                "seed": args.seed,
                "median": median,
                "samples": rows,
            });
            serde_json::to_string_pretty(&doc)? + "\n"
        }
    };
    emit(&args.out.out, &text)?;
    Ok(0)
}

fn run_cf(args: CfArgs) -> anyhow::Result<u8> {
    let kind = match args.kind {
        KindFlag::Regular => CFKind::Regular,
        KindFlag::Backward => CFKind::Backward,
    };
    let exp = orbits::cf_expand_decimal(&args.x, args.n, kind)?;
    // The p/q recurrence below matches regular digits only; backward digits
    // obey a different one, so their artifact carries digits alone.
    let convergents: Option<Vec<(String, String)>> = match kind {
        CFKind::Regular => Some(
            orbits::approximants(&exp.digits)
                .into_iter()
                .map(|(p, q)| (p.to_string(), q.to_string()))
                .collect(),
        ),
        CFKind::Backward => None,
    };

    let text = match args.out.format {
        Format::Csv => {
            let mut s = String::new();
            writeln!(s, "# thermokit cf v1")?;
            writeln!(
                s,
                "# x {} kind {} truncated {}",
                exp.origin_f64(),
                enum_tag_cf(kind),
                exp.truncated,
            )?;
            match &convergents {
                Some(list) => {
                    writeln!(s, "k,digit,p,q")?;
                    for (i, (d, (p, q))) in exp.digits.iter().zip(list).enumerate() {
                        writeln!(s, "{},{},{},{}", i + 1, d, p, q)?;
                    }
                }
                None => {
                    writeln!(s, "k,digit")?;
                    for (i, d) in exp.digits.iter().enumerate() {
                        writeln!(s, "{},{}", i + 1, d)?;
                    }
                }
            }
            s
        }
        Format::Json => {
            let doc = json!({
                "schema_version": SCHEMA_VERSION,
                "command": "cf",
                "x": exp.origin_f64(),
                "kind": enum_tag_cf(kind),
                "digits": exp.digits,
                "truncated": exp.truncated,
                "approximants": convergents,
            });
            serde_json::to_string_pretty(&doc)? + "\n"
        }
    };
    emit(&args.out.out, &text)?;
    Ok(0)
}

fn enum_tag_cf(kind: CFKind) -> &'static str {
    match kind {
        CFKind::Regular => "regular",
        CFKind::Backward => "backward",
    }
}

fn run_report(args: ReportArgs) -> anyhow::Result<u8> {
    let model = load_model(&args.map)?;
    let opts = ReportOptions {
        t_grid: args.t_grid.as_ref().map(|g| g.0.clone()),
        alpha_grid: args.alpha_grid.as_ref().map(|g| g.0.clone()),
        pressure: args.engine.options(),
    };
    let doc = report::family_report(&model, &opts)?;
    emit(&args.out, &(serde_json::to_string_pretty(&doc)? + "\n"))?;
    Ok(0)
}
