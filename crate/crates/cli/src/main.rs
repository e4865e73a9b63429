//! `walkgroups`: group of the walk, reflection groups and elliptic periods
//! for weighted small-step models.
//!
//! Exit codes: 0 success, 1 input error, 2 hypothesis failure (H1 violated,
//! or a family instance failing its check), 3 inconclusive verdict under
//! `--strict`.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use walkgroups::analysis::{self, AnalysisOptions, AnalysisReport};
use walkgroups::classify::{self, CensusMode, CensusOptions, Check3DOptions, FamilyId, FamilyParams, SearchSpec};
use walkgroups::elliptic::{self, ProbeVerdict};
use walkgroups::geometry::DEFAULT_ANGLE_TOL;
use walkgroups::group::{Order, DEFAULT_GROUP_BOUND};
use walkgroups::rational::{self, format_rational, Q};
use walkgroups::{catalog, walk, Error, Step, WeightedModel};

#[derive(Parser)]
#[command(name = "walkgroups", version, about = "Finiteness and structure of the group of weighted lattice walk models")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Global {
    /// Emit JSON (one line per model) instead of a table.
    #[arg(long, global = true)]
    json: bool,
    /// Worker threads for batch and census commands.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Seed of the orbit-search test points.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Bound on the group order searched.
    #[arg(long, global = true)]
    bound: Option<usize>,
    /// Angle tolerance for the reflection-group checks.
    #[arg(long, global = true, default_value_t = DEFAULT_ANGLE_TOL)]
    tol: f64,
    /// Exit with status 3 when a verdict is inconclusive (bound exceeded).
    #[arg(long, global = true)]
    strict: bool,
}

#[derive(Subcommand)]
enum Command {
    /// H1, group order, critical point, covariance and reflection group of a
    /// model file, a catalog name, or every `*.json` in a directory.
    Analyze { model: String },
    /// Census of the unweighted step sets of the square.
    Classify2d {
        #[arg(long, value_enum, default_value_t = Mode::Reduced)]
        mode: Mode,
        /// Skip the elliptic corroboration.
        #[arg(long)]
        no_elliptic: bool,
    },
    /// Weyl-property check of a 3D model with its slice groups.
    Classify3d { model: String },
    /// Period ratio r(t), rationality probe, small-t limit and theta checks.
    Elliptic {
        model: String,
        /// Comma-separated values of t in (0, 1/4].
        #[arg(long, value_delimiter = ',')]
        t: Option<Vec<f64>>,
        /// Estimate the small-t limit r0.
        #[arg(long)]
        r0: bool,
        /// Bits of the exact small-t branch points (default: WALKGROUPS_PRECISION or 256).
        #[arg(long)]
        bits: Option<u64>,
    },
    /// Exact series of confined walk counts from P to Q.
    Count {
        model: String,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        from: Vec<i64>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        to: Vec<i64>,
        #[arg(long)]
        n: usize,
    },
    /// Check a named family: 4a, order8-third-model, order10-triple,
    /// A3-family1, A3-family2, B3-model1, B3-model2, Z2xD2k.
    VerifyFamilies {
        #[arg(long)]
        family: String,
        /// Weight quadruples separated by ';', entries by ','.
        #[arg(long)]
        weights: Option<String>,
        /// Values of c for A3-family1, comma-separated.
        #[arg(long, value_delimiter = ',')]
        c: Option<Vec<String>>,
        /// Triples a,b,c for A3-family2 separated by ';'.
        #[arg(long)]
        abc: Option<String>,
        /// Base 2D models (files or catalog names) for Z2xD2k.
        #[arg(long)]
        base: Vec<String>,
    },
    /// Enumerate 3D models and report those with the Weyl property.
    Search3d {
        /// Allowed steps as `x,y,z` separated by ';' (default: all 26).
        #[arg(long)]
        support: Option<String>,
        #[arg(long)]
        max_steps: Option<usize>,
        /// Candidate weights per step, comma-separated (0 = absent; default 0,1).
        #[arg(long, value_delimiter = ',')]
        weights: Option<Vec<String>>,
        /// Keep one model per permutation of the coordinates.
        #[arg(long)]
        quotient: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Raw,
    Reduced,
}

/// Failure carrying an exit status.
struct Exit(u8, String);

impl From<anyhow::Error> for Exit {
    fn from(e: anyhow::Error) -> Self {
        let code = match e.downcast_ref::<Error>() {
            Some(Error::H1Violated { .. }) => 2,
            _ => 1,
        };
        Exit(code, format!("{e:#}"))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(Exit(code, msg)) => {
            if !msg.is_empty() {
                eprintln!("error: {msg}");
            }
            ExitCode::from(code)
        }
    }
}

fn run(cli: &Cli) -> Result<u8, Exit> {
    let g = &cli.global;
    match &cli.command {
        Command::Analyze { model } => cmd_analyze(g, model),
        Command::Classify2d { mode, no_elliptic } => cmd_classify2d(g, *mode, !no_elliptic),
        Command::Classify3d { model } => cmd_classify3d(g, model),
        Command::Elliptic { model, t, r0, bits } => cmd_elliptic(g, model, t.as_deref(), *r0, *bits),
        Command::Count { model, from, to, n } => cmd_count(g, model, from, to, *n),
        Command::VerifyFamilies { family, weights, c, abc, base } => {
            cmd_verify(g, family, weights.as_deref(), c.as_deref(), abc.as_deref(), base)
        }
        Command::Search3d { support, max_steps, weights, quotient } => {
            cmd_search3d(g, support.as_deref(), *max_steps, weights.as_deref(), *quotient)
        }
    }
}

// ---------------------------------------------------------------------------
// input

fn load_model(spec: &str) -> anyhow::Result<WeightedModel> {
    let path = Path::new(spec);
    if path.is_file() {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {spec}"))?;
        return WeightedModel::parse(&text).with_context(|| format!("parsing {spec}"));
    }
    catalog::by_name(spec).ok_or_else(|| anyhow!("{spec}: no such file or catalog model"))
}

/// Model files of a batch: a directory gives its `*.json` files in name order.
fn model_sources(spec: &str) -> anyhow::Result<Option<Vec<PathBuf>>> {
    let path = Path::new(spec);
    if !path.is_dir() {
        return Ok(None);
    }
    let mut files: Vec<PathBuf> = std::fs::read_dir(path)
        .with_context(|| format!("reading directory {spec}"))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    Ok(Some(files))
}

fn parse_q(s: &str) -> anyhow::Result<Q> {
    Ok(rational::parse_decimal_or_rational(s.trim())?)
}

fn parse_groups(s: &str) -> anyhow::Result<Vec<Vec<Q>>> {
    s.split(';').filter(|g| !g.trim().is_empty()).map(|g| g.split(',').map(parse_q).collect()).collect()
}

fn fmt_f(x: f64) -> String {
    format!("{x:.16e}")
}

fn json_line<T: Serialize>(v: &T) -> String {
    serde_json::to_string(v).expect("report serializes")
}

// ---------------------------------------------------------------------------
// analyze

#[derive(Serialize)]
struct BatchLine<T> {
    source: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    report: Option<T>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

fn analysis_options(g: &Global) -> AnalysisOptions {
    AnalysisOptions { bound: g.bound.unwrap_or(DEFAULT_GROUP_BOUND), seed: g.seed, tol: g.tol, ..Default::default() }
}

fn analysis_status(g: &Global, r: &AnalysisReport) -> u8 {
    if !r.h1.satisfied {
        2
    } else if g.strict && r.inconclusive() {
        3
    } else {
        0
    }
}

fn print_analysis(r: &AnalysisReport) {
    let m = WeightedModel::from_document(&r.model).map(|m| m.summary()).unwrap_or_default();
    println!("model: {m}");
    match &r.h1.witness {
        None => println!("H1: satisfied"),
        Some(w) => println!("H1: violated (half-space normal ({}))", w.join(",")),
    }
    if let Some(gv) = &r.group {
        println!("group order: {}", gv.order);
    }
    if let Some(x0) = &r.x0 {
        println!("x0: [{}]", x0.iter().map(|v| fmt_f(*v)).collect::<Vec<_>>().join(", "));
    }
    for p in &r.pairs {
        let m = p.m.map(|o| o.to_string()).unwrap_or_else(|| "?".into());
        println!("a{}{}: {}  theta/pi: {}  angle: {:?}  m{}{}: {}", p.i + 1, p.j + 1, fmt_f(p.a), fmt_f(p.theta), p.angle, p.i + 1, p.j + 1, m);
    }
    if let Some(l) = &r.coxeter_label {
        let o = r.coxeter_order.map(|o| o.to_string()).unwrap_or_else(|| "?".into());
        println!("reflection group: {l} (order {o})");
    }
    if let Some(w) = &r.weyl {
        println!("weyl: {}  triplet: {:?}", w.weyl, w.triplet);
        for reason in &w.reasons {
            println!("  {reason}");
        }
    }
    if let Some(e) = &r.elliptic {
        match (&e.probe, &e.error) {
            (Some(ProbeVerdict::Rational { p, q, .. }), _) => println!("elliptic: r = {p}/{q} (order {})", 2 * q),
            (Some(ProbeVerdict::NonConstant { spread, .. }), _) => println!("elliptic: r not constant (spread {})", fmt_f(*spread)),
            (None, Some(err)) => println!("elliptic: {err}"),
            _ => {}
        }
    }
    for e in &r.errors {
        println!("error: {e}");
    }
}

fn cmd_analyze(g: &Global, spec: &str) -> Result<u8, Exit> {
    let opts = analysis_options(g);
    if let Some(files) = model_sources(spec)? {
        let lines: Vec<(String, u8)> = classify::with_jobs(g.jobs, || {
            files
                .par_iter()
                .map(|f| {
                    let source = f.display().to_string();
                    match load_model(&source) {
                        Ok(m) => {
                            let r = analysis::analyze(&m, &opts);
                            let code = analysis_status(g, &r);
                            (json_line(&BatchLine { source, report: Some(r), error: None }), code)
                        }
                        Err(e) => (json_line(&BatchLine::<AnalysisReport> { source, report: None, error: Some(format!("{e:#}")) }), 1),
                    }
                })
                .collect()
        });
        for (l, _) in &lines {
            println!("{l}");
        }
        return Ok(lines.iter().map(|x| x.1).max().unwrap_or(0));
    }
    let m = load_model(spec)?;
    let r = analysis::analyze(&m, &opts);
    if g.json {
        println!("{}", json_line(&r));
    } else {
        print_analysis(&r);
    }
    Ok(analysis_status(g, &r))
}

// ---------------------------------------------------------------------------
// classify2d

fn cmd_classify2d(g: &Global, mode: Mode, elliptic: bool) -> Result<u8, Exit> {
    let mode = match mode {
        Mode::Raw => CensusMode::Raw,
        Mode::Reduced => CensusMode::Reduced,
    };
    let opts = CensusOptions { bound: g.bound.unwrap_or(32), seed: g.seed, elliptic, jobs: g.jobs };
    let r = classify::enumerate_2d_unweighted(mode, &opts);
    if g.json {
        println!("{}", json_line(&r));
    } else {
        for s in &r.stages {
            println!("filter {:<24} subsets {:>3}  classes {:>3}", s.name, s.subsets, s.classes);
        }
        for e in &r.entries {
            let order = e.order.map(|o| o.to_string()).unwrap_or_else(|| "-".into());
            let ell = e.elliptic_order.map(|o| o.to_string()).unwrap_or_else(|| "-".into());
            let h1 = if e.h1 { "ok" } else { "singular" };
            println!("{:>3}  {:<48} {:<8} order {:>4}  elliptic {:>3}", e.mask, e.steps.join(" "), h1, order, ell);
        }
        println!("{}", r.summary_line());
    }
    let inconclusive = r.entries.iter().any(|e| matches!(e.order, Some(Order::ExceedsBound(_))));
    Ok(if g.strict && inconclusive { 3 } else { 0 })
}

// ---------------------------------------------------------------------------
// classify3d

fn check3d_options(g: &Global) -> Check3DOptions {
    let mut o = Check3DOptions { seed: g.seed, tol: g.tol, ..Default::default() };
    if let Some(b) = g.bound {
        o.group_bound = b;
    }
    o
}

fn print_weyl(r: &classify::WeylReport3D) {
    println!("model: {}", r.model);
    println!("triplet (m12, m13, m23): {:?}  canonical: {:?}", r.triplet, r.canonical_triplet);
    println!("a12, a13, a23: {}, {}, {}", fmt_f(r.a[0]), fmt_f(r.a[1]), fmt_f(r.a[2]));
    println!("weyl: {}  label: {}", r.weyl, r.label);
    for reason in &r.reasons {
        println!("  {reason}");
    }
    if let Some(o) = r.group_order {
        println!("group order: {o}");
    }
    for s in &r.slices {
        let axis = ["x", "y", "z"][s.axis];
        let o = s.order.map(|o| o.to_string()).unwrap_or_else(|| "-".into());
        let e = s.expected.map(|o| o.to_string()).unwrap_or_else(|| "-".into());
        println!("slice {axis} = {:<4} order {o:>4} expected {e:>3} {}", s.value, if s.consistent { "ok" } else { "MISMATCH" });
    }
    println!("slice condition: {}  list entry: {}", r.slice_condition, r.list_entry.as_deref().unwrap_or("none"));
}

fn weyl_status(g: &Global, r: &classify::WeylReport3D) -> u8 {
    let inconclusive = r.triplet.is_none() || matches!(r.group_order, Some(Order::ExceedsBound(_)));
    if g.strict && inconclusive {
        3
    } else {
        0
    }
}

fn cmd_classify3d(g: &Global, spec: &str) -> Result<u8, Exit> {
    let opts = check3d_options(g);
    if let Some(files) = model_sources(spec)? {
        let lines: Vec<(String, u8)> = classify::with_jobs(g.jobs, || {
            files
                .par_iter()
                .map(|f| {
                    let source = f.display().to_string();
                    let res = load_model(&source).and_then(|m| Ok(classify::classify3d_check(&m, &opts)?));
                    match res {
                        Ok(r) => {
                            let code = weyl_status(g, &r);
                            (json_line(&BatchLine { source, report: Some(r), error: None }), code)
                        }
                        Err(e) => {
                            let Exit(code, msg) = Exit::from(e);
                            (json_line(&BatchLine::<classify::WeylReport3D> { source, report: None, error: Some(msg) }), code)
                        }
                    }
                })
                .collect()
        });
        for (l, _) in &lines {
            println!("{l}");
        }
        return Ok(lines.iter().map(|x| x.1).max().unwrap_or(0));
    }
    let m = load_model(spec)?;
    let r = classify::classify3d_check(&m, &opts).map_err(anyhow::Error::from)?;
    if g.json {
        println!("{}", json_line(&r));
    } else {
        print_weyl(&r);
    }
    Ok(weyl_status(g, &r))
}

// ---------------------------------------------------------------------------
// elliptic

#[derive(Serialize)]
struct EllipticReport {
    t: Vec<f64>,
    r: Vec<f64>,
    probe: ProbeVerdict,
    theta: Option<elliptic::ThetaCheck>,
    #[serde(skip_serializing_if = "Option::is_none")]
    theta_error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    r0: Option<elliptic::R0Estimate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    order10_residuals: Option<Vec<f64>>,
}

fn cmd_elliptic(g: &Global, spec: &str, t: Option<&[f64]>, r0: bool, bits: Option<u64>) -> Result<u8, Exit> {
    let m = load_model(spec)?;
    if m.dim() != 2 {
        return Err(Exit(1, format!("elliptic analysis needs a 2D model, got d = {}", m.dim())));
    }
    if let walkgroups::H1Verdict::Violated { witness } = m.check_h1() {
        let w: Vec<String> = witness.iter().map(format_rational).collect();
        return Err(anyhow::Error::from(Error::H1Violated { witness: format!("({})", w.join(",")) }).into());
    }
    let ts = t.map(|v| v.to_vec()).unwrap_or_else(|| elliptic::DEFAULT_T_SAMPLES.to_vec());
    let invs = elliptic::invariants_at(&m, &ts).map_err(anyhow::Error::from)?;
    let probe = elliptic::rationality_probe(&m, &ts, elliptic::DEFAULT_QMAX, 1e-9).map_err(anyhow::Error::from)?;
    // theta identities at the middle sample
    let mid = &invs[invs.len() / 2];
    let (theta, theta_error) = match elliptic::theta_check_of(mid, 1e-8) {
        Ok(c) => (Some(c), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let precision = bits.or_else(elliptic::precision_from_env);
    let r0 = if r0 {
        Some(elliptic::estimate_r0(&m, &elliptic::DEFAULT_T_SMALL, precision).map_err(anyhow::Error::from)?)
    } else {
        None
    };
    let order10_residuals = if classify::verify_order10_models(&m) {
        let b = precision.unwrap_or(elliptic::DEFAULT_PRECISION_BITS);
        elliptic::order10_residuals(&m, &[1e-2, 1e-3, 1e-4], b).ok()
    } else {
        None
    };
    let report = EllipticReport { t: ts, r: invs.iter().map(|i| i.r).collect(), probe, theta, theta_error, r0, order10_residuals };
    if g.json {
        println!("{}", json_line(&report));
    } else {
        for (t, r) in report.t.iter().zip(&report.r) {
            println!("t = {}  r = {}", fmt_f(*t), fmt_f(*r));
        }
        match &report.probe {
            ProbeVerdict::Rational { p, q, .. } => println!("r constant = {p}/{q}  (group order {})", 2 * q),
            ProbeVerdict::NonConstant { spread, .. } => println!("r not constant (spread {})", fmt_f(*spread)),
        }
        if let Some(c) = &report.theta {
            println!(
                "theta ({:?} nome q = {}): k2 residual {}, w2 residual {}",
                c.convention,
                fmt_f(c.q),
                fmt_f(c.k2_residual),
                fmt_f(c.w2_residual)
            );
        }
        if let Some(e) = &report.theta_error {
            println!("theta: {e}");
        }
        if let Some(r) = &report.r0 {
            println!("r0 ~ {}  nearest {}/{} (distance {})", fmt_f(r.estimate), r.nearest.0, r.nearest.1, fmt_f(r.distance));
        }
        if let Some(v) = &report.order10_residuals {
            println!("order-10 residual at t = 1e-2, 1e-3, 1e-4: {}", v.iter().map(|x| fmt_f(*x)).collect::<Vec<_>>().join(", "));
        }
    }
    Ok(0)
}

// ---------------------------------------------------------------------------
// count

fn cmd_count(g: &Global, spec: &str, from: &[i64], to: &[i64], n: usize) -> Result<u8, Exit> {
    let m = load_model(spec)?;
    let terms = walk::series_terms(&m, from, to, n).map_err(anyhow::Error::from)?;
    let strings: Vec<String> = terms.iter().map(format_rational).collect();
    if g.json {
        println!("{}", json_line(&strings));
    } else {
        println!("[{}]", strings.join(", "));
    }
    Ok(0)
}

// ---------------------------------------------------------------------------
// verify-families

fn cmd_verify(
    g: &Global,
    family: &str,
    weights: Option<&str>,
    c: Option<&[String]>,
    abc: Option<&str>,
    base: &[String],
) -> Result<u8, Exit> {
    let id = FamilyId::parse(family).map_err(anyhow::Error::from)?;
    let mut params = FamilyParams { seed: g.seed, ..Default::default() };
    if let Some(w) = weights {
        for grp in parse_groups(w)? {
            let arr: [Q; 4] = grp.try_into().map_err(|_| anyhow!("--weights expects groups of four"))?;
            params.weights.push(arr);
        }
    }
    if let Some(c) = c {
        params.c = c.iter().map(|s| parse_q(s)).collect::<anyhow::Result<_>>()?;
    }
    if let Some(abc) = abc {
        for grp in parse_groups(abc)? {
            let arr: [Q; 3] = grp.try_into().map_err(|_| anyhow!("--abc expects groups of three"))?;
            params.abc.push(arr);
        }
    }
    for b in base {
        params.base.push(load_model(b)?);
    }
    let cases = classify::verify_family(id, &params);
    if g.json {
        for c in &cases {
            println!("{}", json_line(c));
        }
    } else {
        for c in &cases {
            let order = c.order.map(|o| o.to_string()).unwrap_or_else(|| "-".into());
            let exp = c.expected_order.map(|o| o.to_string()).unwrap_or_else(|| "-".into());
            let trip = c.triplet.map(|t| format!("{t:?}")).unwrap_or_default();
            println!(
                "{:<5} {:<20} {:<24} accepted {:<5} order {:>4} (expected {:>3}) {}",
                if c.passed { "PASS" } else { "FAIL" },
                c.family,
                c.instance,
                c.accepted,
                order,
                exp,
                trip
            );
            if let Some(n) = &c.note {
                if !c.passed {
                    println!("      {n}");
                }
            }
        }
    }
    Ok(if cases.iter().all(|c| c.passed) { 0 } else { 2 })
}

// ---------------------------------------------------------------------------
// search3d

fn cmd_search3d(g: &Global, support: Option<&str>, max_steps: Option<usize>, weights: Option<&[String]>, quotient: bool) -> Result<u8, Exit> {
    let steps = match support {
        Some(s) => Some(
            s.split(';')
                .filter(|x| !x.trim().is_empty())
                .map(|x| Step::parse(x.trim()).map_err(anyhow::Error::from))
                .collect::<anyhow::Result<Vec<Step>>>()?,
        ),
        None => None,
    };
    let mut spec = SearchSpec::unweighted(steps, max_steps);
    if let Some(w) = weights {
        let grid: Vec<Q> = w.iter().map(|s| parse_q(s)).collect::<anyhow::Result<_>>()?;
        if grid.iter().any(|q| q < &Q::from_integer(0.into())) {
            return Err(Exit(1, "weights must be nonnegative".into()));
        }
        for c in &mut spec.candidates {
            c.1 = grid.clone();
        }
    }
    spec.symmetry_quotient = quotient;
    spec.seed = g.seed;
    spec.tol = g.tol;
    spec.jobs = g.jobs;
    let hits = match classify::search3d(&spec) {
        Ok(h) => h,
        Err(e @ Error::SearchOverflow(_)) => return Err(Exit(1, e.to_string())),
        Err(e) => return Err(anyhow::Error::from(e).into()),
    };
    if g.json {
        for h in &hits {
            println!("{}", json_line(h));
        }
    } else {
        for h in &hits {
            let triplet = h.canonical_triplet.map(|t| format!("({},{},{})", t[0], t[1], t[2])).unwrap_or_else(|| "-".into());
            println!("{}  triplet {triplet}  {}  order {}", h.model, h.label, h.group_order.map(|o| o.to_string()).unwrap_or_default());
        }
        println!("{} models with the Weyl property", hits.len());
    }
    Ok(0)
}
