//! Command-line front end: configuration file, mode dispatch and the files
//! each mode writes. Exit codes are 0 on success, 2 for configuration errors
//! and 3 for numerical or I/O failures.

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::contour::PatchGeometry;
use crate::error::Error;
use crate::functional::{FunctionalContext, QuadratureConfig};
use crate::green::{Domain, GreenKernel, Point};
use crate::kr::{find_critical_points, CriticalPoint, CriticalSearch, KrConvention, VortexConfiguration};
use crate::solver::{
    continue_in_eps, verify_solution, ContinuationOptions, ContinuationState, NewtonTrace, Verification,
};
use crate::special::SigmaSpectrum;
use crate::validation::{self, Check, Suite};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Spectrum,
    KrCritical,
    #[default]
    Solve,
    Validate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainKind {
    #[default]
    Disc,
    #[serde(alias = "free_space")]
    Free,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DomainConfig {
    pub kind: DomainKind,
    /// Disc radius; ignored in free space.
    pub radius: f64,
}

impl Default for DomainConfig {
    fn default() -> Self {
        Self { kind: DomainKind::Disc, radius: 1.0 }
    }
}

impl DomainConfig {
    pub fn domain(&self) -> Domain {
        match self.kind {
            DomainKind::Disc => Domain::Disc { radius: self.radius },
            DomainKind::Free => Domain::FreeSpace,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PatchConfig {
    pub kappa: f64,
    /// Starting point of the critical-point search.
    pub center_seed: Point,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KrConfig {
    pub convention: KrConvention,
    /// Tolerance on `‖∇W_m‖₂`.
    pub tol: f64,
}

impl Default for KrConfig {
    fn default() -> Self {
        Self { convention: KrConvention::ContourConsistent, tol: 1e-12 }
    }
}

/// Everything a run needs. Plain keys come before tables so that the struct
/// serializes to TOML in declaration order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub mode: Mode,
    pub gamma: f64,
    /// Fourier truncation `N`; the spectrum table has `N` rows.
    pub n: usize,
    pub eps_targets: Vec<f64>,
    /// Output directory.
    pub out: PathBuf,
    pub domain: DomainConfig,
    pub kr: KrConfig,
    pub quadrature: QuadratureConfig,
    pub continuation: ContinuationOptions,
    pub patches: Vec<PatchConfig>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            mode: Mode::Solve,
            gamma: 1.5,
            n: 64,
            eps_targets: vec![0.01, 0.02, 0.04],
            out: PathBuf::from("out"),
            domain: DomainConfig::default(),
            kr: KrConfig::default(),
            quadrature: QuadratureConfig::default(),
            continuation: ContinuationOptions::default(),
            patches: vec![PatchConfig { kappa: std::f64::consts::PI, center_seed: [0.0, 0.0] }],
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "gsqg-patch", version, about = "Stationary gSQG vortex patches near point-vortex equilibria")]
pub struct Cli {
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    /// TOML configuration file; unset keys take their defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Print the effective configuration and exit.
    #[arg(long)]
    pub print_config: bool,
    /// Solve mode: re-solve the last state with refined quadrature and
    /// report the change.
    #[arg(long)]
    pub verify: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Config(String),
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Runtime(m) => write!(f, "{m}"),
        }
    }
}

fn numerical(module: &str, e: Error) -> CliError {
    match e {
        Error::Config(m) => CliError::Config(format!("{module}: {m}")),
        e => CliError::Runtime(format!("{module}: {e}")),
    }
}

fn io(path: &Path, e: std::io::Error) -> CliError {
    CliError::Runtime(format!("io: {}: {e}", path.display()))
}

/// A configuration together with where each key came from, for error
/// messages.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: RunConfig,
    text: Option<(PathBuf, String)>,
    from_flags: BTreeSet<&'static str>,
}

impl LoadedConfig {
    /// `"<file>:<line>"` of the first line assigning `key`, the flag that set
    /// it, or `"default"`.
    fn origin(&self, key: &'static str) -> String {
        if self.from_flags.contains(key) {
            return format!("--{key}");
        }
        if let Some((path, text)) = &self.text {
            for (i, line) in text.lines().enumerate() {
                let t = line.trim_start();
                let hit = t
                    .strip_prefix(key)
                    .is_some_and(|rest| rest.trim_start().starts_with('='))
                    || (key == "patches" && t.starts_with("[[patches]]"));
                if hit {
                    return format!("{}:{}", path.display(), i + 1);
                }
            }
        }
        "default".into()
    }

    fn error(&self, key: &'static str, msg: impl std::fmt::Display) -> CliError {
        CliError::Config(format!("{} ({key}): {msg}", self.origin(key)))
    }
}

pub fn load(cli: &Cli) -> Result<LoadedConfig, CliError> {
    let (mut config, text) = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            let cfg: RunConfig =
                toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            (cfg, Some((path.clone(), text)))
        }
        None => (RunConfig::default(), None),
    };
    let mut from_flags = BTreeSet::new();
    if let Some(m) = cli.mode {
        config.mode = m;
        from_flags.insert("mode");
    }
    if let Some(g) = cli.gamma {
        config.gamma = g;
        from_flags.insert("gamma");
    }
    if let Some(n) = cli.n {
        config.n = n;
        from_flags.insert("n");
    }
    if let Some(o) = &cli.out {
        config.out = o.clone();
        from_flags.insert("out");
    }
    Ok(LoadedConfig { config, text, from_flags })
}

/// Rejects configurations the selected mode cannot run. Returns warnings for
/// accepted but untested settings.
pub fn validate_config(loaded: &LoadedConfig) -> Result<Vec<String>, CliError> {
    let c = &loaded.config;
    let mut warnings = Vec::new();
    let g = c.gamma;
    match c.mode {
        Mode::Validate if g > 0.0 && g < 1.0 => {
            warnings.push(format!("gamma = {g} is in the untested range (0, 1); only the trigonometric moment check runs"));
        }
        Mode::Validate if g > 1.0 && g < 2.0 => {}
        Mode::Validate => return Err(loaded.error("gamma", format!("{g} is outside (0, 1) and (1, 2)"))),
        _ if !(g > 1.0 && g < 2.0) => return Err(loaded.error("gamma", format!("{g} is outside (1, 2)"))),
        _ => {}
    }
    if c.n < 2 {
        return Err(loaded.error("n", format!("truncation {} is below 2", c.n)));
    }
    if c.domain.kind == DomainKind::Disc && !(c.domain.radius > 0.0 && c.domain.radius.is_finite()) {
        return Err(loaded.error("radius", format!("disc radius {} is not positive", c.domain.radius)));
    }
    if matches!(c.mode, Mode::KrCritical | Mode::Solve) {
        if c.patches.is_empty() {
            return Err(loaded.error("patches", "at least one patch is required"));
        }
        for (i, p) in c.patches.iter().enumerate() {
            if !(p.kappa > 0.0 && p.kappa.is_finite()) {
                return Err(loaded.error("kappa", format!("patch {i}: kappa {} is not positive", p.kappa)));
            }
            let inside = match c.domain.domain() {
                Domain::Disc { radius } => p.center_seed[0].hypot(p.center_seed[1]) < radius,
                Domain::FreeSpace => p.center_seed.iter().all(|v| v.is_finite()),
            };
            if !inside {
                return Err(loaded.error("center_seed", format!("patch {i}: seed {:?} is outside the domain", p.center_seed)));
            }
        }
    }
    if c.mode == Mode::Solve {
        let t = &c.eps_targets;
        if t.is_empty() {
            return Err(loaded.error("eps_targets", "no targets given"));
        }
        if let Some(e) = t.iter().find(|e| !(**e > 0.0 && e.is_finite())) {
            return Err(loaded.error("eps_targets", format!("{e} is not positive")));
        }
        if t.windows(2).any(|w| w[1] <= w[0]) {
            return Err(loaded.error("eps_targets", "targets must be strictly increasing"));
        }
        if c.quadrature.grid_factor < 3 {
            return Err(loaded.error("grid_factor", format!("{} is below 3", c.quadrature.grid_factor)));
        }
    }
    Ok(warnings)
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| io(path, e))
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("result types serialize");
    s.push('\n');
    s
}

/// Rows `j = 1..N` of `j, σ_j, σ_j j`.
pub fn spectrum_csv(gamma: f64, n: usize) -> crate::Result<String> {
    let spec = SigmaSpectrum::new(gamma, n)?;
    let mut s = String::from("j,sigma_j,sigma_j_times_j\n");
    for j in 1..=n {
        let v = spec.get(j);
        let _ = writeln!(s, "{j},{v},{}", v * j as f64);
    }
    Ok(s)
}

#[derive(Debug, Serialize)]
struct Provenance<'a> {
    crate_version: &'static str,
    gamma: f64,
    n: usize,
    domain: &'a DomainConfig,
    kr: &'a KrConfig,
    quadrature: &'a QuadratureConfig,
    continuation: &'a ContinuationOptions,
}

#[derive(Debug, Serialize)]
struct KrOutput<'a> {
    schema_version: u32,
    mode: Mode,
    provenance: Provenance<'a>,
    search: &'a CriticalSearch,
}

#[derive(Debug, Serialize)]
struct CurvePoint<'a> {
    eps: f64,
    state: &'a ContinuationState,
    newton: &'a NewtonTrace,
    bisected_at: Option<f64>,
    verification: Verification,
    boundary_csv: String,
}

#[derive(Debug, Serialize)]
struct SolveOutput<'a> {
    schema_version: u32,
    mode: Mode,
    provenance: Provenance<'a>,
    seed: &'a CriticalPoint,
    eps_max: f64,
    center_ball: f64,
    curve: Vec<CurvePoint<'a>>,
    stopped: Option<&'a str>,
    cross_checks: Vec<Check>,
}

#[derive(Debug, Default, Serialize)]
struct Timings {
    stages: Vec<(String, f64)>,
    total_seconds: f64,
}

#[derive(Debug, Serialize)]
struct ValidationOutput<'a> {
    schema_version: u32,
    mode: Mode,
    gamma: f64,
    untested_range: bool,
    passed: usize,
    failed: usize,
    suite: &'a Suite,
}

/// Rows `patch_index, beta, x, y, curvature` on the collocation grid.
pub fn boundary_csv(ctx: &FunctionalContext, state: &ContinuationState) -> String {
    let mut s = String::from("patch_index,beta,x,y,curvature\n");
    for (i, p) in state.patches(ctx.gamma()).iter().enumerate() {
        for &b in &ctx.grid().betas() {
            let z = p.boundary_point(b);
            let _ = writeln!(s, "{i},{b},{},{},{}", z[0], z[1], PatchGeometry::signed_curvature(p, b));
        }
    }
    s
}

fn kernel_of(c: &RunConfig) -> Result<GreenKernel, CliError> {
    let k = match c.domain.domain() {
        Domain::Disc { radius } => GreenKernel::disc(radius, c.gamma),
        Domain::FreeSpace => GreenKernel::free_space(c.gamma),
    };
    k.map_err(|e| numerical("green", e))
}

fn seeds_of(c: &RunConfig) -> Result<VortexConfiguration, CliError> {
    VortexConfiguration::new(
        c.patches.iter().map(|p| p.center_seed).collect(),
        c.patches.iter().map(|p| p.kappa).collect(),
    )
    .map_err(|e| numerical("kr", e))
}

fn provenance(c: &RunConfig) -> Provenance<'_> {
    Provenance {
        crate_version: env!("CARGO_PKG_VERSION"),
        gamma: c.gamma,
        n: c.n,
        domain: &c.domain,
        kr: &c.kr,
        quadrature: &c.quadrature,
        continuation: &c.continuation,
    }
}

/// Runs the configured mode and writes its files under `config.out`.
/// Returns the messages meant for standard output.
pub fn run(loaded: &LoadedConfig, verify: bool) -> Result<Vec<String>, CliError> {
    let c = &loaded.config;
    fs::create_dir_all(&c.out).map_err(|e| io(&c.out, e))?;
    let mut messages = Vec::new();
    match c.mode {
        Mode::Spectrum => {
            let path = c.out.join("spectrum.csv");
            write_file(&path, &spectrum_csv(c.gamma, c.n).map_err(|e| numerical("special", e))?)?;
            messages.push(format!("wrote {}", path.display()));
        }
        Mode::KrCritical => {
            let kernel = kernel_of(c)?;
            let search = find_critical_points(&kernel, &[seeds_of(c)?], c.kr.tol, c.kr.convention);
            let path = c.out.join("kr_critical.json");
            let out = KrOutput { schema_version: SCHEMA_VERSION, mode: c.mode, provenance: provenance(c), search: &search };
            write_file(&path, &to_json(&out))?;
            messages.push(format!("{} critical point(s), {} failed seed(s); wrote {}", search.points.len(), search.failures.len(), path.display()));
            if search.points.is_empty() {
                return Err(CliError::Runtime(format!("kr: no critical point found: {:?}", search.failures)));
            }
        }
        Mode::Solve => messages.extend(solve(c, verify)?),
        Mode::Validate => {
            let untested = c.gamma < 1.0;
            let suite = if untested { validation::untested_range_suite(c.gamma) } else { validation::suite_at(c.gamma) }
                .map_err(|e| numerical("validation", e))?;
            let passed = suite.all().filter(|k| k.passed).count();
            let failed = suite.all().count() - passed;
            messages.extend(suite.all().map(Check::line));
            let path = c.out.join("validation.json");
            let out = ValidationOutput { schema_version: SCHEMA_VERSION, mode: c.mode, gamma: c.gamma, untested_range: untested, passed, failed, suite: &suite };
            write_file(&path, &to_json(&out))?;
            messages.push(format!("{passed} passed, {failed} failed; wrote {}", path.display()));
        }
    }
    Ok(messages)
}

fn solve(c: &RunConfig, verify: bool) -> Result<Vec<String>, CliError> {
    let t_start = Instant::now();
    let mut timings = Timings::default();
    let mut lap = Instant::now();
    let mut stage = |name: &str, timings: &mut Timings| {
        timings.stages.push((name.to_string(), lap.elapsed().as_secs_f64()));
        lap = Instant::now();
    };

    let kernel = kernel_of(c)?;
    let search = find_critical_points(&kernel, &[seeds_of(c)?], c.kr.tol, c.kr.convention);
    let Some(seed) = search.points.first() else {
        return Err(CliError::Runtime(format!("kr: no critical point from the seeds: {:?}", search.failures)));
    };
    if !seed.nondegenerate_mod_symmetry {
        return Err(CliError::Runtime(format!(
            "kr: critical point {:?} is degenerate (Hessian eigenvalues {:?})",
            seed.config.points, seed.hessian_eigenvalues
        )));
    }
    stage("kr_critical", &mut timings);

    let ctx = FunctionalContext::new(kernel, c.n, c.quadrature.clone()).map_err(|e| numerical("functional", e))?;
    let s0 = ContinuationState::from_points(&seed.config, c.n, c.gamma).map_err(|e| numerical("solver", e))?;
    let run = continue_in_eps(&ctx, &s0, &c.eps_targets, &c.continuation).map_err(|e| numerical("solver", e))?;
    stage("continuation", &mut timings);

    let mut curve = Vec::new();
    let mut messages = Vec::new();
    for step in &run.steps {
        let verification = verify_solution(&ctx, &step.state, &s0).map_err(|e| numerical("solver", e))?;
        let name = format!("boundary_eps_{}.csv", step.state.eps);
        write_file(&c.out.join(&name), &boundary_csv(&ctx, &step.state))?;
        messages.push(format!(
            "eps {}: {} Newton iteration(s), residual {:.3e}, curvature positive {}",
            step.state.eps,
            step.trace.iterations(),
            verification.residual_norm,
            verification.patches.iter().all(|p| p.curvature_positive)
        ));
        curve.push(CurvePoint {
            eps: step.state.eps,
            state: &step.state,
            newton: &step.trace,
            bisected_at: step.bisected_at,
            verification,
            boundary_csv: name,
        });
    }
    stage("verification", &mut timings);

    let mut cross_checks = Vec::new();
    if verify {
        if let Some(last) = run.steps.last() {
            let (fine, r) = validation::refine_solution(&ctx, &last.state, &c.continuation.newton)
                .map_err(|e| numerical("validation", e))?;
            cross_checks.push(validation::self_convergence("last state", &last.state, &fine, r, c.gamma, c.continuation.shape_norm_order));
            cross_checks.push(validation::quadratic_convergence("last step", &last.trace));
            messages.extend(cross_checks.iter().map(Check::line));
        }
        stage("cross_checks", &mut timings);
    }

    let out = SolveOutput {
        schema_version: SCHEMA_VERSION,
        mode: c.mode,
        provenance: provenance(c),
        seed,
        eps_max: run.eps_max,
        center_ball: run.center_ball,
        curve,
        stopped: run.stopped.as_deref(),
        cross_checks,
    };
    let path = c.out.join("result.json");
    write_file(&path, &to_json(&out))?;
    timings.total_seconds = t_start.elapsed().as_secs_f64();
    write_file(&c.out.join("timings.json"), &to_json(&timings))?;
    messages.push(format!("wrote {}", path.display()));
    if let Some(why) = &run.stopped {
        return Err(CliError::Runtime(format!("solver: curve stopped early ({why}); partial results in {}", path.display())));
    }
    Ok(messages)
}

/// Parses `args`, runs, prints, and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let result = load(&cli).and_then(|loaded| {
        if cli.print_config {
            print!("{}", toml::to_string(&loaded.config).expect("config serializes"));
            return Ok(());
        }
        for w in validate_config(&loaded)? {
            eprintln!("warning: {w}");
        }
        for m in run(&loaded, cli.verify)? {
            println!("{m}");
        }
        Ok(())
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}
