//! tanlip: boundary flatness curves, exact contact orders, and tangential
//! Hölder-gain experiments on pseudoconvex model domains.
//!
//! Every subcommand prints a JSON report (schema_version 1) to stdout and
//! maps its verdict onto the exit code: 0 for PASS, 2 for FAIL, 1 for usage
//! or runtime errors. CSV and gnuplot artifacts are written only when asked
//! for. All randomness is seeded; TANLIP_SEED overrides any configured seed.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use tanlip_core::config::RunConfig;
use tanlip_core::contact::{
    self, ContactReport, HoloCurve, LeadingSign, OrderValue, ParityStatus,
};
use tanlip_core::disc::{self, DiscContext, OrderEstimate, RadiusMode, RadiusOutcome};
use tanlip_core::domain::{self, Domain};
use tanlip_core::error::Error;
use tanlip_core::geom;
use tanlip_core::lipschitz::{self, TestFunction};
use tanlip_core::rational::{rationalize, GRat};
use tanlip_core::report::{
    complex_value, complex_vec_value, csv_table, json_f64, plot_script, write_text, Report,
    Verdict,
};

type Result<T> = std::result::Result<T, Error>;

#[derive(Parser)]
#[command(
    name = "tanlip",
    version,
    about = "Boundary flatness functionals S and R, contact orders, and Lipschitz gain experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct DomainOpts {
    /// Domain name: a builtin (halfspace, ball, herbort, dangelo, egg4, egg6)
    /// or an entry of --registry.
    #[arg(long)]
    domain: String,

    /// JSON registry file with additional domains.
    #[arg(long)]
    registry: Option<PathBuf>,

    /// Index into the domain's base-point list.
    #[arg(long, default_value_t = 0)]
    base_index: usize,
}

#[derive(Args, Clone)]
struct ConfigOpts {
    /// RNG seed; the TANLIP_SEED environment variable overrides this.
    #[arg(long)]
    seed: Option<u64>,

    /// Angular grid size for disc maximization.
    #[arg(long)]
    n_theta: Option<usize>,

    /// Radial grid size for disc maximization.
    #[arg(long)]
    n_rho: Option<usize>,

    /// Nodes for Cauchy quadrature.
    #[arg(long)]
    quad_points: Option<usize>,

    /// Disc fill fraction for interior sampling.
    #[arg(long)]
    fill: Option<f64>,

    /// Samples per disc.
    #[arg(long)]
    samples: Option<usize>,

    /// Also write the JSON report to this path.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Definition,
    Inverse,
    /// Run both modes and require agreement.
    #[default]
    Checked,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the defining function at a point.
    Eval {
        #[command(flatten)]
        domain: DomainOpts,
        #[command(flatten)]
        config: ConfigOpts,
        /// Comma-separated complex coordinates, e.g. "0,0,-0.1" or "0.1+0.2i,0,0".
        #[arg(long)]
        point: String,
    },
    /// Outward unit normal at a boundary point.
    Normal {
        #[command(flatten)]
        domain: DomainOpts,
        #[command(flatten)]
        config: ConfigOpts,
        /// Boundary point; defaults to the domain's base point.
        #[arg(long)]
        point: Option<String>,
    },
    /// Normal plus an orthonormal basis of the complex tangent space.
    Frame {
        #[command(flatten)]
        domain: DomainOpts,
        #[command(flatten)]
        config: ConfigOpts,
    },
    /// Tabulate S(t) and R(t) along a tangent direction.
    Scurve {
        #[command(flatten)]
        domain: DomainOpts,
        #[command(flatten)]
        config: ConfigOpts,
        /// Tangent direction, comma-separated complex components.
        #[arg(long)]
        dir: String,
        /// CSV output path (header t,S,R).
        #[arg(long)]
        out: Option<PathBuf>,
        /// gnuplot script output path (log-log S, R vs t).
        #[arg(long)]
        plot: Option<PathBuf>,
        /// Explicit comma-separated t grid; default is the dyadic grid.
        #[arg(long)]
        grid: Option<String>,
    },
    /// Tabulate the inner disc radius R over a depth grid.
    Rcurve {
        #[command(flatten)]
        domain: DomainOpts,
        #[command(flatten)]
        config: ConfigOpts,
        #[arg(long)]
        dir: String,
        /// CSV output path (header delta,R).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t)]
        mode: ModeArg,
        #[arg(long)]
        grid: Option<String>,
    },
    /// Estimate the contact order k0 from the S-curve slope.
    K0 {
        #[command(flatten)]
        domain: DomainOpts,
        #[command(flatten)]
        config: ConfigOpts,
        #[arg(long)]
        dir: String,
    },
    /// Exact contact order of a holomorphic curve or tangent line.
    Type {
        #[command(flatten)]
        domain: DomainOpts,
        #[command(flatten)]
        config: ConfigOpts,
        /// Curve components as polynomials in ζ (written z), e.g. "z^3; z^2; 0".
        #[arg(long, conflicts_with = "dir")]
        curve: Option<String>,
        /// Tangent line direction (rationalized, exactly re-tangented).
        #[arg(long)]
        dir: Option<String>,
    },
    /// Max line type over a deterministic direction sweep.
    Sweep {
        #[command(flatten)]
        domain: DomainOpts,
        #[command(flatten)]
        config: ConfigOpts,
        #[arg(long, default_value_t = 64)]
        n_dirs: usize,
    },
    /// Audit even order / positive leading coefficient for given curves.
    Parity {
        #[command(flatten)]
        domain: DomainOpts,
        #[command(flatten)]
        config: ConfigOpts,
        /// Curve to audit (repeatable).
        #[arg(long = "curve", required = true)]
        curves: Vec<String>,
    },
    /// Cauchy-integral derivative bounds for the conjugate completion.
    DerivAudit {
        #[command(flatten)]
        domain: DomainOpts,
        #[command(flatten)]
        config: ConfigOpts,
        #[arg(long, default_value_t = 0.3)]
        alpha: f64,
        /// Number of sampled (point, direction, radius) configurations.
        #[arg(long, default_value_t = 200)]
        configs: usize,
    },
    /// Hardy-Littlewood growth profile of the conjugate completion.
    HlCheck {
        #[command(flatten)]
        domain: DomainOpts,
        #[command(flatten)]
        config: ConfigOpts,
        #[arg(long, default_value_t = 0.3)]
        alpha: f64,
        /// Interior sample count across the distance decades.
        #[arg(long, default_value_t = 400)]
        growth_samples: usize,
    },
    /// Tangential gain sweep over dyadic depth levels.
    Gain {
        #[command(flatten)]
        domain: DomainOpts,
        #[command(flatten)]
        config: ConfigOpts,
        #[arg(long)]
        dir: String,
        #[arg(long)]
        alpha: f64,
        /// Dyadic depth levels (default from config).
        #[arg(long)]
        levels: Option<usize>,
        /// Starting depth; default delta0_factor · t_max.
        #[arg(long)]
        delta0: Option<f64>,
        /// CSV output path (header delta,sup_ratio,mean_ratio).
        #[arg(long)]
        out: Option<PathBuf>,
        /// gnuplot script output path (sup ratio vs delta).
        #[arg(long)]
        plot: Option<PathBuf>,
    },
    /// Three-leg box decomposition at one disc point.
    #[command(name = "box")]
    BoxCmd {
        #[command(flatten)]
        domain: DomainOpts,
        #[command(flatten)]
        config: ConfigOpts,
        #[arg(long)]
        dir: String,
        #[arg(long)]
        alpha: f64,
        /// Depth of the disc center.
        #[arg(long)]
        delta: f64,
        /// Disc coordinate ζ: the probe point is P_δ + ζ·dir.
        #[arg(long)]
        zeta: String,
    },
    /// Re-run the model-example bundle and write its artifacts.
    Reproduce {
        /// Bundle name; only "s2" exists.
        which: String,
        /// Directory for the emitted artifacts.
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are successes, anything else is usage.
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0u8,
                _ => 1u8,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(verdict) => ExitCode::from(verdict.exit_code() as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

// --- argument helpers --------------------------------------------------------------

/// Parse one complex number: "1.5", "-2", "0.5+0.25i", "1e-3-2e-4i", "i", "-i".
fn parse_complex(token: &str) -> Result<Complex64> {
    let s = token.trim();
    if s.is_empty() {
        return Err(Error::ParameterRange { msg: "empty complex component".into() });
    }
    let bad = |what: &str| Error::ParameterRange { msg: format!("bad complex component '{s}': {what}") };
    // Split at the last '+'/'-' that is not a leading sign or an exponent sign.
    let bytes = s.as_bytes();
    let mut split = None;
    for i in (1..bytes.len()).rev() {
        let c = bytes[i];
        if (c == b'+' || c == b'-') && !matches!(bytes[i - 1], b'e' | b'E') {
            split = Some(i);
            break;
        }
    }
    let parse_imag = |part: &str| -> Result<f64> {
        let body = part.strip_suffix('i').ok_or_else(|| bad("imaginary part must end in i"))?;
        match body {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            other => other.parse::<f64>().map_err(|_| bad("imaginary part is not a number")),
        }
    };
    if let Some(i) = split {
        let (left, right) = (&s[..i], &s[i..]);
        if right.ends_with('i') {
            let re = left.parse::<f64>().map_err(|_| bad("real part is not a number"))?;
            return Ok(Complex64::new(re, parse_imag(right)?));
        }
    }
    if s.ends_with('i') {
        return Ok(Complex64::new(0.0, parse_imag(s)?));
    }
    Ok(Complex64::new(s.parse::<f64>().map_err(|_| bad("not a number"))?, 0.0))
}

fn parse_complex_vec(text: &str) -> Result<Vec<Complex64>> {
    text.split(',').map(parse_complex).collect()
}

fn parse_f64_vec(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<f64>()
                .map_err(|_| Error::ParameterRange { msg: format!("bad grid value '{tok}'") })
        })
        .collect()
}

fn load_domain(opts: &DomainOpts) -> Result<Domain> {
    let extra = match &opts.registry {
        Some(path) => domain::load_registry(path)?,
        None => Vec::new(),
    };
    let d = domain::find_domain(&extra, &opts.domain)?;
    if opts.base_index >= d.base_points.len() {
        return Err(Error::ParameterRange {
            msg: format!(
                "base index {} out of range: {} has {} base points",
                opts.base_index,
                d.name,
                d.base_points.len()
            ),
        });
    }
    Ok(d)
}

fn build_config(opts: &ConfigOpts) -> Result<RunConfig> {
    let mut config = RunConfig::default();
    if let Some(seed) = opts.seed {
        config.seed = seed;
    }
    if let Some(n) = opts.n_theta {
        config.n_theta = n;
    }
    if let Some(n) = opts.n_rho {
        config.n_rho = n;
    }
    if let Some(m) = opts.quad_points {
        config.quadrature_points = m;
    }
    if let Some(fill) = opts.fill {
        config.fill = fill;
    }
    if let Some(s) = opts.samples {
        config.samples = s;
    }
    config.apply_env_seed()?;
    config.validate()?;
    Ok(config)
}

/// Print to stdout, optionally persist, map the verdict to the exit code.
fn finish(report: Report, report_path: &Option<PathBuf>) -> Result<Verdict> {
    print!("{}", report.to_json()?);
    if let Some(path) = report_path {
        report.write(path)?;
    }
    Ok(report.verdict)
}

fn order_estimate_json(order: &OrderEstimate) -> Value {
    match order {
        OrderEstimate::Determined(k) => json!(k),
        OrderEstimate::Infinite => json!("inf"),
        OrderEstimate::Undetermined => json!("undetermined"),
    }
}

fn order_value_json(order: &OrderValue) -> Value {
    match order {
        OrderValue::Finite(k) => json!(k),
        OrderValue::Infinite => json!("inf"),
    }
}

fn leading_json(leading: &LeadingSign) -> Value {
    json!(match leading {
        LeadingSign::Positive => "positive",
        LeadingSign::Zero => "zero",
        LeadingSign::Negative => "negative",
        LeadingSign::Mixed => "mixed",
    })
}

fn contact_report_constants(report: &Report, contact: &ContactReport) -> Report {
    let mut r = report.clone();
    r.set_constant("ord", order_value_json(&contact.order));
    r.set_constant("curve_order", json!(contact.curve_order));
    r.set_constant(
        "ratio",
        match contact.ratio {
            Some((num, den)) => json!([num, den]),
            None => Value::Null,
        },
    );
    r.set_constant("leading", leading_json(&contact.leading));
    r.set_constant(
        "leading_coefficient",
        match &contact.leading_coefficient {
            Some(c) => json!(c.to_string()),
            None => Value::Null,
        },
    );
    r
}

/// Rationalize the base point exactly; refuse coordinates that do not
/// round-trip (the exact oracle cannot anchor there).
fn exact_base(point: &[Complex64]) -> Result<Vec<GRat>> {
    point
        .iter()
        .map(|z| {
            let q = GRat::new(
                rationalize(z.re, contact::RATIONALIZE_DENOMINATOR_CAP),
                rationalize(z.im, contact::RATIONALIZE_DENOMINATOR_CAP),
            );
            if (q.to_c64() - z).norm() > 1e-12 {
                return Err(Error::NonRationalBasePoint);
            }
            Ok(q)
        })
        .collect()
}

// --- command bodies ----------------------------------------------------------------

fn run(command: Command) -> Result<Verdict> {
    match command {
        Command::Eval { domain, config, point } => {
            let d = load_domain(&domain)?;
            let cfg = build_config(&config)?;
            let z = parse_complex_vec(&point)?;
            let value = d.defining.eval(&z)?;
            let mut report = Report::new("eval", &cfg);
            report.push_row(json!({
                "point": complex_vec_value(&z),
                "r": json_f64(value.re),
            }));
            report.set_constant("domain", json!(d.name));
            finish(report, &config.report)
        }

        Command::Normal { domain, config, point } => {
            let d = load_domain(&domain)?;
            let cfg = build_config(&config)?;
            let z = match point {
                Some(text) => parse_complex_vec(&text)?,
                None => d.base_points[domain.base_index].clone(),
            };
            let normal = geom::outward_normal(&d.defining, &z)?;
            let mut report = Report::new("normal", &cfg);
            report.push_row(json!({
                "point": complex_vec_value(&z),
                "normal": complex_vec_value(&normal),
            }));
            report.set_constant("domain", json!(d.name));
            finish(report, &config.report)
        }

        Command::Frame { domain, config } => {
            let d = load_domain(&domain)?;
            let cfg = build_config(&config)?;
            let base = d.base_points[domain.base_index].clone();
            let frame = geom::tangent_frame(&d.defining, &base)?;
            let mut report = Report::new("frame", &cfg);
            report.push_row(json!({
                "base": complex_vec_value(&frame.base_point),
                "normal": complex_vec_value(&frame.normal),
                "tangent_basis": frame.tangent_basis.iter().map(|v| complex_vec_value(v)).collect::<Vec<_>>(),
            }));
            report.set_constant("domain", json!(d.name));
            finish(report, &config.report)
        }

        Command::Scurve { domain, config, dir, out, plot, grid } => {
            let d = load_domain(&domain)?;
            let cfg = build_config(&config)?;
            let base = d.base_points[domain.base_index].clone();
            let v = parse_complex_vec(&dir)?;
            let ctx = DiscContext::new(&d, &base, &v, &cfg)?;
            let grid = match grid {
                Some(text) => Some(parse_f64_vec(&text)?),
                None => None,
            };
            let curve = disc::build_scurve(&ctx, grid)?;
            let mut report = Report::new("scurve", &cfg);
            let mut csv_rows = Vec::with_capacity(curve.t_grid.len());
            for ((&t, &s), &r) in curve.t_grid.iter().zip(&curve.s_values).zip(&curve.r_values) {
                report.push_row(json!({"t": json_f64(t), "S": json_f64(s), "R": json_f64(r)}));
                csv_rows.push(vec![t, s, r]);
            }
            report.set_constant("k0", order_estimate_json(&curve.k0));
            report.set_constant("c_limit", curve.c_limit.map(json_f64).unwrap_or(Value::Null));
            report.set_constant("residual", curve.residual.map(json_f64).unwrap_or(Value::Null));
            report.set_constant("t_max", json_f64(ctx.t_max));
            if let Some(path) = &out {
                write_text(path, &csv_table("t,S,R", &csv_rows))?;
            }
            if let Some(path) = &plot {
                let csv_name = out
                    .as_ref()
                    .map(|p| p.to_string_lossy().into_owned())
                    .unwrap_or_else(|| "scurve.csv".into());
                write_text(
                    path,
                    &plot_script(&csv_name, "boundary flatness", 1, &[(2, "S"), (3, "R")], true, true),
                )?;
            }
            finish(report, &config.report)
        }

        Command::Rcurve { domain, config, dir, out, mode, grid } => {
            let d = load_domain(&domain)?;
            let cfg = build_config(&config)?;
            let base = d.base_points[domain.base_index].clone();
            let v = parse_complex_vec(&dir)?;
            let ctx = DiscContext::new(&d, &base, &v, &cfg)?;
            let grid = match grid {
                Some(text) => parse_f64_vec(&text)?,
                None => disc::dyadic_grid(&ctx),
            };
            let mut report = Report::new("rcurve", &cfg);
            let mut csv_rows = Vec::with_capacity(grid.len());
            for &depth in &grid {
                let result = match mode {
                    ModeArg::Definition => disc::r_of_t(&ctx, depth, RadiusMode::Definition)?,
                    ModeArg::Inverse => disc::r_of_t(&ctx, depth, RadiusMode::Inverse)?,
                    ModeArg::Checked => disc::r_of_t_checked(&ctx, depth)?,
                };
                let outcome = match result.outcome {
                    RadiusOutcome::Converged => "converged",
                    RadiusOutcome::ClampedToTMax => "clamped_to_t_max",
                    RadiusOutcome::NoFit => "no_fit",
                };
                report.push_row(json!({
                    "delta": json_f64(depth),
                    "R": json_f64(result.radius),
                    "outcome": outcome,
                }));
                csv_rows.push(vec![depth, result.radius]);
            }
            report.set_constant("t_max", json_f64(ctx.t_max));
            if let Some(path) = &out {
                write_text(path, &csv_table("delta,R", &csv_rows))?;
            }
            finish(report, &config.report)
        }

        Command::K0 { domain, config, dir } => {
            let d = load_domain(&domain)?;
            let cfg = build_config(&config)?;
            let base = d.base_points[domain.base_index].clone();
            let v = parse_complex_vec(&dir)?;
            let ctx = DiscContext::new(&d, &base, &v, &cfg)?;
            let est = disc::estimate_k0(&ctx)?;
            let mut report = Report::new("k0", &cfg);
            for &t in &disc::dyadic_grid(&ctx) {
                report.push_row(json!({"t": json_f64(t), "S": json_f64(disc::s_of_t(&ctx, t)?)}));
            }
            report.set_constant("k0", order_estimate_json(&est.order));
            report.set_constant("c_limit", est.c_limit.map(json_f64).unwrap_or(Value::Null));
            report.set_constant("residual", est.residual.map(json_f64).unwrap_or(Value::Null));
            report.set_constant("slope", est.slope.map(json_f64).unwrap_or(Value::Null));
            report.set_verdict(est.order != OrderEstimate::Undetermined);
            finish(report, &config.report)
        }

        Command::Type { domain, config, curve, dir } => {
            let d = load_domain(&domain)?;
            let cfg = build_config(&config)?;
            let poly = d.poly.clone().ok_or_else(|| Error::ParameterRange {
                msg: format!("domain {} has no exact polynomial form; use k0", d.name),
            })?;
            let base = exact_base(&d.base_points[domain.base_index])?;
            let contact_report = match (curve, dir) {
                (Some(src), None) => {
                    let curve = HoloCurve::parse(&src, d.dimension)?;
                    // The order is anchored at the domain's base point.
                    if curve.base() != base {
                        return Err(Error::ParameterRange {
                            msg: "curve must be based at the domain base point".into(),
                        });
                    }
                    contact::compose_order(&poly, &curve)?
                }
                (None, Some(text)) => {
                    let float_dir = parse_complex_vec(&text)?;
                    let dir = exact_tangent(&poly, &base, &float_dir)?;
                    contact::line_type(&poly, &base, &dir)?
                }
                _ => {
                    return Err(Error::ParameterRange {
                        msg: "exactly one of --curve and --dir is required".into(),
                    })
                }
            };
            let report = Report::new("type", &cfg);
            let report = contact_report_constants(&report, &contact_report);
            finish(report, &config.report)
        }

        Command::Sweep { domain, config, n_dirs } => {
            let d = load_domain(&domain)?;
            let cfg = build_config(&config)?;
            let base = d.base_points[domain.base_index].clone();
            let sweep = contact::line_type_sweep(&d, &base, n_dirs, &cfg)?;
            let mut report = Report::new("sweep", &cfg);
            for (order, count) in &sweep.histogram {
                report.push_row(json!({"order": order, "count": count}));
            }
            report.set_constant("max_order", order_value_json(&sweep.max_order));
            report.set_constant("argmax", complex_vec_value(&sweep.argmax));
            report.set_constant("infinite_count", json!(sweep.infinite_count));
            report.set_constant("undetermined_count", json!(sweep.undetermined_count));
            report.set_constant("exact", json!(sweep.exact));
            report.set_constant("n_dirs", json!(sweep.n_dirs));
            finish(report, &config.report)
        }

        Command::Parity { domain, config, curves } => {
            let d = load_domain(&domain)?;
            let cfg = build_config(&config)?;
            let poly = d.poly.clone().ok_or_else(|| Error::ParameterRange {
                msg: format!("domain {} has no exact polynomial form", d.name),
            })?;
            let base = exact_base(&d.base_points[domain.base_index])?;
            let parsed: Vec<HoloCurve> = curves
                .iter()
                .map(|src| HoloCurve::parse(src, d.dimension))
                .collect::<Result<_>>()?;
            let audit = contact::parity_audit(&poly, &base, &parsed)?;
            let mut report = Report::new("parity", &cfg);
            for entry in &audit.entries {
                let status = match entry.status {
                    ParityStatus::Checked => "checked",
                    ParityStatus::SkippedFlat => "skipped_flat",
                    ParityStatus::SkippedTransverse => "skipped_transverse",
                };
                report.push_row(json!({
                    "index": entry.index,
                    "ord": order_value_json(&entry.order),
                    "leading": leading_json(&entry.leading),
                    "status": status,
                    "ok": entry.ok,
                }));
            }
            report.set_constant("violations", json!(audit.violations));
            report.set_verdict(audit.passed);
            finish(report, &config.report)
        }

        Command::DerivAudit { domain, config, alpha, configs } => {
            let d = load_domain(&domain)?;
            let cfg = build_config(&config)?;
            let base = d.base_points[domain.base_index].clone();
            let f = lipschitz::make_conjugate_completion(&d, &base, alpha, &cfg)?;
            let audit = derivative_audit(&d, &f, configs, &cfg)?;
            let mut report = Report::new("deriv-audit", &cfg);
            report.set_constant("configs", json!(audit.configs));
            report.set_constant("alpha", json_f64(alpha));
            report.set_constant("lip_bound", json_f64(f.lip_bound));
            report.set_constant("max_first_slack", json_f64(audit.max_first_slack));
            report.set_constant("max_second_slack", json_f64(audit.max_second_slack));
            report.set_constant("max_quad_rel_err", json_f64(audit.max_quad_rel_err));
            report.set_verdict(audit.passed());
            finish(report, &config.report)
        }

        Command::HlCheck { domain, config, alpha, growth_samples } => {
            let d = load_domain(&domain)?;
            let cfg = build_config(&config)?;
            let base = d.base_points[domain.base_index].clone();
            let f = lipschitz::make_conjugate_completion(&d, &base, alpha, &cfg)?;
            let hl = lipschitz::hl_growth_check(&d, &f, &base, growth_samples, &cfg)?;
            let mut report = Report::new("hl-check", &cfg);
            for row in &hl.rows {
                report.push_row(json!({
                    "dist_lo": json_f64(row.dist_lo),
                    "dist_hi": json_f64(row.dist_hi),
                    "samples": row.samples,
                    "sup_product": json_f64(row.sup_product),
                }));
            }
            report.set_constant("alpha", json_f64(alpha));
            report.set_constant("overall_sup", json_f64(hl.overall_sup));
            report.set_constant("decade_ratio", json_f64(hl.decade_ratio));
            report.set_verdict(hl.passed);
            finish(report, &config.report)
        }

        Command::Gain { domain, config, dir, alpha, levels, delta0, out, plot } => {
            let d = load_domain(&domain)?;
            let cfg = build_config(&config)?;
            let base = d.base_points[domain.base_index].clone();
            let v = parse_complex_vec(&dir)?;
            let ctx = DiscContext::new(&d, &base, &v, &cfg)?;
            let f = lipschitz::make_conjugate_completion(&d, &base, alpha, &cfg)?;
            let levels = levels.unwrap_or(cfg.delta_levels);
            let delta0 = delta0.unwrap_or(cfg.delta0_factor * ctx.t_max);
            let gain =
                lipschitz::verify_main_theorem(&f, &ctx, alpha, delta0, levels, cfg.fill, cfg.samples)?;
            let mut report = Report::new("gain", &cfg);
            let mut csv_rows = Vec::with_capacity(gain.rows.len());
            for row in &gain.rows {
                report.push_row(json!({
                    "delta": json_f64(row.delta),
                    "radius": json_f64(row.radius),
                    "sup_ratio": json_f64(row.sup_ratio),
                    "mean_ratio": json_f64(row.mean_ratio),
                    "argmax": complex_vec_value(&row.argmax),
                    "box": {
                        "i": json_f64(row.box_terms.i),
                        "ii": json_f64(row.box_terms.ii),
                        "iii": json_f64(row.box_terms.iii),
                        "h": json_f64(row.box_terms.h),
                    },
                }));
                csv_rows.push(vec![row.delta, row.sup_ratio, row.mean_ratio]);
            }
            report.set_constant("alpha", json_f64(gain.alpha));
            report.set_constant("k0", json!(gain.k0));
            report.set_constant("C", json_f64(gain.c_constant));
            report.set_constant("band_ratio", json_f64(gain.band_ratio));
            report.set_verdict(gain.passed);
            if let Some(path) = &out {
                write_text(path, &csv_table("delta,sup_ratio,mean_ratio", &csv_rows))?;
            }
            if let Some(path) = &plot {
                let csv_name = out
                    .as_ref()
                    .map(|p| p.to_string_lossy().into_owned())
                    .unwrap_or_else(|| "gain.csv".into());
                write_text(
                    path,
                    &plot_script(&csv_name, "gain ratios", 1, &[(2, "sup"), (3, "mean")], true, false),
                )?;
            }
            finish(report, &config.report)
        }

        Command::BoxCmd { domain, config, dir, alpha, delta, zeta } => {
            let d = load_domain(&domain)?;
            let cfg = build_config(&config)?;
            let base = d.base_points[domain.base_index].clone();
            let v = parse_complex_vec(&dir)?;
            let ctx = DiscContext::new(&d, &base, &v, &cfg)?;
            let f = lipschitz::make_conjugate_completion(&d, &base, alpha, &cfg)?;
            let zeta = parse_complex(&zeta)?;
            let center: Vec<Complex64> = base
                .iter()
                .zip(ctx.normal.iter())
                .map(|(p, nu)| p - nu * delta)
                .collect();
            let w: Vec<Complex64> =
                center.iter().zip(ctx.direction.iter()).map(|(c, v)| c + v * zeta).collect();
            let terms = lipschitz::box_decomposition(&f, &ctx, delta, &w)?;
            let direct = (f.eval(&center)? - f.eval(&w)?).norm();
            let ratio = lipschitz::gain_ratio(&f, &ctx, delta, &w, alpha)?;
            let mut report = Report::new("box", &cfg);
            report.push_row(json!({
                "delta": json_f64(delta),
                "zeta": complex_value(&zeta),
                "w": complex_vec_value(&w),
                "i": json_f64(terms.i),
                "ii": json_f64(terms.ii),
                "iii": json_f64(terms.iii),
                "h": json_f64(terms.h),
                "direct": json_f64(direct),
                "gain_ratio": json_f64(ratio),
            }));
            report.set_constant("alpha", json_f64(alpha));
            // The three legs must dominate the straight hop.
            report.set_verdict(terms.i + terms.ii + terms.iii >= direct - 1e-12);
            finish(report, &config.report)
        }

        Command::Reproduce { which, out_dir, seed } => {
            if which != "s2" {
                return Err(Error::ParameterRange {
                    msg: format!("unknown bundle '{which}'; only s2 exists"),
                });
            }
            let mut cfg = RunConfig::default();
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            cfg.apply_env_seed()?;
            cfg.validate()?;
            reproduce_s2(&out_dir, &cfg)
        }
    }
}

/// Exact tangency projection: rationalize a float direction, then cancel its
/// pairing with the holomorphic gradient against the largest gradient entry.
fn exact_tangent(
    poly: &tanlip_core::expr::PolyExpr,
    base: &[GRat],
    dir: &[Complex64],
) -> Result<Vec<GRat>> {
    let mut exact: Vec<GRat> = dir
        .iter()
        .map(|z| {
            GRat::new(
                rationalize(z.re, contact::RATIONALIZE_DENOMINATOR_CAP),
                rationalize(z.im, contact::RATIONALIZE_DENOMINATOR_CAP),
            )
        })
        .collect();
    let grad: Vec<GRat> = (0..base.len())
        .map(|j| poly.derivative(j, false).eval_exact(base))
        .collect::<Result<_>>()?;
    let pairing = exact
        .iter()
        .zip(grad.iter())
        .fold(GRat::zero(), |acc, (d, g)| acc + d.clone() * g.clone());
    if !pairing.is_zero() {
        let pivot = grad
            .iter()
            .enumerate()
            .max_by(|a, b| {
                a.1.to_c64().norm().partial_cmp(&b.1.to_c64().norm()).expect("finite")
            })
            .map(|(j, _)| j)
            .expect("nonempty gradient");
        let inv = grad[pivot].clone().inv().ok_or(Error::DegenerateGradient {
            value: 0.0,
            tol: 0.0,
        })?;
        exact[pivot] = exact[pivot].clone() - pairing * inv;
    }
    Ok(exact)
}

// --- derivative audit ---------------------------------------------------------------

struct DerivAuditOutcome {
    configs: usize,
    max_first_slack: f64,
    max_second_slack: f64,
    max_quad_rel_err: f64,
}

impl DerivAuditOutcome {
    fn passed(&self) -> bool {
        self.max_first_slack <= 1.01 && self.max_second_slack <= 1.01 && self.max_quad_rel_err <= 1e-8
    }
}

/// Sample (point, direction, radius) configurations and audit the interior
/// derivative bounds plus quadrature accuracy against the exact evaluator.
fn derivative_audit(
    d: &Domain,
    f: &TestFunction,
    configs: usize,
    cfg: &RunConfig,
) -> Result<DerivAuditOutcome> {
    let mut rng = cfg.rng();
    let pool = lipschitz::sample_interior(d, configs.max(8), &mut rng)?;
    let n = d.dimension;
    let mut done = 0usize;
    let mut max_first_slack = 0.0f64;
    let mut max_second_slack = 0.0f64;
    let mut max_rel = 0.0f64;
    let mut attempts = 0usize;
    let random_dir = |rng: &mut ChaCha8Rng| -> Vec<Complex64> {
        loop {
            let v: Vec<Complex64> = (0..n)
                .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm > 1e-3 {
                return v.iter().map(|z| z / norm).collect();
            }
        }
    };
    while done < configs && attempts < 60 * configs {
        attempts += 1;
        let z = &pool[attempts % pool.len()];
        let dist = geom::dist_to_boundary_est(&d.defining, z)?;
        if dist <= 1e-6 {
            continue;
        }
        let dir = random_dir(&mut rng);
        let rho = dist * rng.gen_range(0.2..0.7);
        let quad = match lipschitz::cauchy_derivative(d, f, z, &dir, rho, cfg.quadrature_points) {
            Ok(v) => v,
            // The first-order distance estimate overshot: not an audit
            // failure, just a rejected configuration.
            Err(Error::DiscNotInterior { .. }) => continue,
            Err(e) => return Err(e),
        };
        let exact = f.directional_derivative(z, &dir)?;
        let rel = (quad - exact).norm() / exact.norm().max(1e-300);
        let first_slack = quad.norm() / (f.lip_bound * rho.powf(f.alpha - 1.0));
        let dir2 = random_dir(&mut rng);
        let delta2 = dist * rng.gen_range(0.1..0.4);
        let rho2 = dist * rng.gen_range(0.1..0.4);
        let mixed =
            match lipschitz::bidisc_second_derivative(d, f, z, &dir, &dir2, delta2, rho2, 32) {
                Ok(v) => v,
                Err(Error::DiscNotInterior { .. }) => continue,
                Err(e) => return Err(e),
            };
        let second_slack = mixed.norm() / (f.lip_bound / rho2 * delta2.powf(f.alpha - 1.0));
        max_rel = max_rel.max(rel);
        max_first_slack = max_first_slack.max(first_slack);
        max_second_slack = max_second_slack.max(second_slack);
        done += 1;
    }
    if done < configs {
        return Err(Error::InteriorSample {
            msg: format!("only {done} of {configs} derivative configurations realized"),
        });
    }
    Ok(DerivAuditOutcome {
        configs: done,
        max_first_slack,
        max_second_slack,
        max_quad_rel_err: max_rel,
    })
}

// --- the s2 bundle -------------------------------------------------------------------

struct Expectation {
    example: &'static str,
    check: &'static str,
    expected: String,
    computed: String,
    ok: bool,
}

fn reproduce_s2(out_dir: &std::path::Path, cfg: &RunConfig) -> Result<Verdict> {
    std::fs::create_dir_all(out_dir)?;
    let mut checks: Vec<Expectation> = Vec::new();
    let mut check = |example: &'static str, name: &'static str, expected: String, computed: String, ok: bool| {
        checks.push(Expectation { example, check: name, expected, computed, ok });
    };

    // Quadratic model: the unit ball, S(t) = t², k0 = 2.
    {
        let d = domain::find_domain(&[], "ball")?;
        let base = d.base_point().to_vec();
        let dir = vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
        let ctx = DiscContext::new(&d, &base, &dir, cfg)?;
        let curve = disc::build_scurve(&ctx, None)?;
        let rows: Vec<Vec<f64>> = curve
            .t_grid
            .iter()
            .zip(&curve.s_values)
            .zip(&curve.r_values)
            .map(|((&t, &s), &r)| vec![t, s, r])
            .collect();
        write_text(&out_dir.join("ball_scurve.csv"), &csv_table("t,S,R", &rows))?;
        let worst = curve
            .t_grid
            .iter()
            .zip(&curve.s_values)
            .map(|(&t, &s)| ((s - t * t) / (t * t)).abs())
            .fold(0.0, f64::max);
        check("ball", "S(t) = t^2", "rel err <= 1e-9".into(), format!("{worst:.3e}"), worst <= 1e-9);
        check(
            "ball",
            "k0",
            "2".into(),
            format!("{:?}", curve.k0),
            curve.k0 == OrderEstimate::Determined(2),
        );
    }

    // Hexic model: S = |v1|^6 t^6 + |v1 v2|^2 t^4 + |v2|^6 t^6.
    {
        let d = domain::find_domain(&[], "herbort")?;
        let base = d.base_point().to_vec();
        let axis = vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
        ];
        let ctx = DiscContext::new(&d, &base, &axis, cfg)?;
        let curve = disc::build_scurve(&ctx, None)?;
        let rows: Vec<Vec<f64>> = curve
            .t_grid
            .iter()
            .zip(&curve.s_values)
            .zip(&curve.r_values)
            .map(|((&t, &s), &r)| vec![t, s, r])
            .collect();
        write_text(&out_dir.join("herbort_scurve.csv"), &csv_table("t,S,R", &rows))?;
        write_text(
            &out_dir.join("herbort_scurve.gp"),
            &plot_script("herbort_scurve.csv", "hexic model flatness", 1, &[(2, "S"), (3, "R")], true, true),
        )?;
        let worst = curve
            .t_grid
            .iter()
            .zip(&curve.s_values)
            .map(|(&t, &s)| ((s - t.powi(6)) / t.powi(6)).abs())
            .fold(0.0, f64::max);
        check("herbort", "S(t) = t^6 on axis", "rel err <= 1e-9".into(), format!("{worst:.3e}"), worst <= 1e-9);
        check(
            "herbort",
            "k0 axis",
            "6".into(),
            format!("{:?}", curve.k0),
            curve.k0 == OrderEstimate::Determined(6),
        );

        let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
        let diag = vec![
            Complex64::new(inv_sqrt2, 0.0),
            Complex64::new(inv_sqrt2, 0.0),
            Complex64::new(0.0, 0.0),
        ];
        let ctx = DiscContext::new(&d, &base, &diag, cfg)?;
        let curve = disc::build_scurve(&ctx, None)?;
        let rows: Vec<Vec<f64>> = curve
            .t_grid
            .iter()
            .zip(&curve.s_values)
            .zip(&curve.r_values)
            .map(|((&t, &s), &r)| vec![t, s, r])
            .collect();
        write_text(&out_dir.join("herbort_diag_scurve.csv"), &csv_table("t,S,R", &rows))?;
        let worst = curve
            .t_grid
            .iter()
            .zip(&curve.s_values)
            .map(|(&t, &s)| {
                let want = 0.25 * t.powi(4) + 0.25 * t.powi(6);
                ((s - want) / want).abs()
            })
            .fold(0.0, f64::max);
        check(
            "herbort",
            "S(t) = t^4/4 + t^6/4 on diagonal",
            "rel err <= 1e-9".into(),
            format!("{worst:.3e}"),
            worst <= 1e-9,
        );
        check(
            "herbort",
            "k0 diagonal",
            "4".into(),
            format!("{:?}", curve.k0),
            curve.k0 == OrderEstimate::Determined(4),
        );
        let c_ok = curve.c_limit.map(|c| (c - 0.25).abs() <= 1e-3).unwrap_or(false);
        check(
            "herbort",
            "c_limit diagonal",
            "0.25 +- 1e-3".into(),
            format!("{:?}", curve.c_limit),
            c_ok,
        );
    }

    // Singular-square model: infinite-type curve witness, finite line types.
    {
        let d = domain::find_domain(&[], "dangelo")?;
        let poly = d.poly.clone().expect("builtin has exact form");
        let base = exact_base(d.base_point())?;
        let witness = HoloCurve::parse("z^3; z^2; 0", 3)?;
        let wreport = contact::compose_order(&poly, &witness)?;
        check(
            "dangelo",
            "curve (z^3, z^2, 0) order",
            "inf".into(),
            wreport.order.to_string(),
            wreport.order == OrderValue::Infinite,
        );
        let one = GRat::one();
        let zero = GRat::zero();
        let e1 = vec![one.clone(), zero.clone(), zero.clone()];
        let e2 = vec![zero.clone(), one.clone(), zero.clone()];
        let l1 = contact::line_type(&poly, &base, &e1)?;
        let l2 = contact::line_type(&poly, &base, &e2)?;
        check("dangelo", "line type e1", "4".into(), l1.order.to_string(), l1.order == OrderValue::Finite(4));
        check("dangelo", "line type e2", "6".into(), l2.order.to_string(), l2.order == OrderValue::Finite(6));

        let mut type_report = Report::new("type", cfg);
        type_report = contact_report_constants(&type_report, &wreport);
        write_text(&out_dir.join("dangelo_type.json"), &type_report.to_json()?)?;
    }

    // Summary artifacts.
    let all_ok = checks.iter().all(|c| c.ok);
    let mut summary = Report::new("reproduce s2", cfg);
    for c in &checks {
        summary.push_row(json!({
            "example": c.example,
            "check": c.check,
            "expected": c.expected,
            "computed": c.computed,
            "ok": c.ok,
        }));
    }
    summary.set_constant("checks", json!(checks.len()));
    summary.set_verdict(all_ok);
    summary.write(&out_dir.join("summary.json"))?;

    let mut table = String::new();
    table.push_str(&format!(
        "{:<10} {:<36} {:<22} {:<26} {}\n",
        "example", "check", "expected", "computed", "ok"
    ));
    for c in &checks {
        table.push_str(&format!(
            "{:<10} {:<36} {:<22} {:<26} {}\n",
            c.example, c.check, c.expected, c.computed, c.ok
        ));
    }
    write_text(&out_dir.join("summary.txt"), &table)?;

    print!("{}", summary.to_json()?);
    Ok(summary.verdict)
}
