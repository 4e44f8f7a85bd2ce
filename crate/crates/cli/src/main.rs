//! `divlim`: divergence analysis, regularization, finite parts and
//! renormalization-group running for rational integrands on `[0, inf)`.
//!
//! Exit codes: 0 ok, 2 parse error, 3 evaluation error, 4 precondition
//! violated, 5 consistency-check failure.

mod report;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use divlim_core::divergence;
use divlim_core::error::Error as CoreError;
use divlim_core::expr::{parse, to_rational, Bindings, Expr};
use divlim_core::regfin::{
    cross_regulator_check, finite_part_cutoff_limit, finite_part_direct, infer_scale_name,
    regularized_value, symmetry_check, Regulator, SubtractionSpec, DEFAULT_PARTNER_FAMILY,
};
use divlim_core::renorm::{
    observable_additive, observable_multiplicative, rg_flow, rg_residual_additive,
    rg_residual_multiplicative, running_g, running_mu, AdditiveModel, MultiplicativeModel,
};

use report::{json_number, Format, Report};

const DEFAULT_INTEGRAND: &str = "1/(p+q+m^2)";

#[derive(Parser)]
#[command(
    name = "divlim",
    version,
    about = "Divergent half-line integrals of rational integrands: analysis, regularization, finite parts, renormalization and RG running",
    after_help = "Integrands are formulas over `p` (integration variable), `q` (external momentum)\nand named parameters, e.g. \"1/(p+q+m^2)\". Defaults: tolerance 1e-10 (override\nwith --tol or DIVLIM_TOL), subtraction point 0, subtraction order max(omega, 0)."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Absolute tolerance for quadrature and limit extraction
    #[arg(long, env = "DIVLIM_TOL", default_value_t = divlim_core::quad::DEFAULT_TOL, global = false)]
    tol: f64,
    /// Output format
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
    /// Write the report to this path instead of standard output
    #[arg(long)]
    out: Option<PathBuf>,
    /// Value bound to the mass parameter `m`
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    m: f64,
    /// Additional parameter binding NAME=VALUE (repeatable)
    #[arg(long = "bind", value_name = "NAME=VALUE")]
    bind: Vec<String>,
}

impl Common {
    fn bindings(&self) -> Result<Bindings<f64>, CliError> {
        let mut b = Bindings::new();
        b.set("m", self.m).map_err(CliError::Core)?;
        for item in &self.bind {
            let (name, value) = item
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("binding `{item}` is not NAME=VALUE")))?;
            let value: f64 = value.parse().map_err(|_| {
                CliError::Config(format!("binding `{item}` has a non-numeric value"))
            })?;
            b.set(name, value).map_err(CliError::Core)?;
        }
        Ok(b)
    }

    fn check_tol(&self) -> Result<(), CliError> {
        if !(self.tol > 0.0) || !self.tol.is_finite() {
            return Err(CliError::Config("tolerance must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Subcommand)]
enum Command {
    /// Superficial degree of divergence, pole scan and numeric scaling check
    Analyze {
        /// Integrand formula over `p`, `q` and parameters
        integrand: String,
        /// External momentum
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        q: f64,
        /// Base point of the numeric scaling probe
        #[arg(long, default_value_t = 1.0)]
        p0: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Regularized value at a fixed regulator scale
    Regularize {
        /// Integrand formula over `p`, `q` and parameters
        integrand: String,
        /// Regularization scheme
        #[arg(long, value_enum)]
        scheme: Scheme,
        /// Hard-cutoff scale Lambda
        #[arg(long, default_value_t = 1e4)]
        cutoff: f64,
        /// Partner scale M
        #[arg(long, default_value_t = 100.0)]
        mscale: f64,
        /// Partner family expression (scale symbol inferred)
        #[arg(long, default_value = DEFAULT_PARTNER_FAMILY)]
        partner_family: String,
        /// External momentum
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        q: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Finite part of the integral by subtraction, with optional regulator limits
    FinitePart {
        /// Integrand formula over `p`, `q` and parameters
        integrand: String,
        /// External momentum
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        q: f64,
        /// Subtraction order k (default: max(omega, 0))
        #[arg(long)]
        order: Option<u32>,
        /// Subtraction point q_s
        #[arg(long, default_value_t = 0.0)]
        point: f64,
        /// Which finite-part routes to evaluate
        #[arg(long, value_enum, default_value_t = Methods::All)]
        methods: Methods,
        /// Partner family expression (scale symbol inferred)
        #[arg(long, default_value = DEFAULT_PARTNER_FAMILY)]
        partner_family: String,
        /// Hard-cutoff scale for the fixed-scale scheme constructor
        #[arg(long, default_value_t = 1e4)]
        cutoff: f64,
        /// Partner scale for the scheme constructor
        #[arg(long, default_value_t = 100.0)]
        mscale: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Consistency suite: regulator independence, symmetry, RG residuals
    Check {
        /// Integrand formula over `p`, `q` and parameters
        #[arg(default_value = DEFAULT_INTEGRAND)]
        integrand: String,
        /// q grid start:stop:step (or a single value)
        #[arg(long, default_value = "0.5:2.5:1.0")]
        qgrid: String,
        /// Subtraction order k (default: max(omega, 0))
        #[arg(long)]
        order: Option<u32>,
        /// Subtraction point q_s
        #[arg(long, default_value_t = 0.0)]
        point: f64,
        /// Partner family expression (scale symbol inferred)
        #[arg(long, default_value = DEFAULT_PARTNER_FAMILY)]
        partner_family: String,
        /// Hard-cutoff scale for the symmetry classification
        #[arg(long, default_value_t = 1e4)]
        cutoff: f64,
        /// Partner scale for the symmetry classification
        #[arg(long, default_value_t = 100.0)]
        mscale: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Renormalized observable from a reference parameter at q_s = 0
    Renorm {
        /// Additive (mass-like) or multiplicative (coupling-like) insertion
        #[arg(long, value_enum)]
        mode: Mode,
        /// Renormalized parameter mu_R(0) (additive mode)
        #[arg(long, allow_negative_numbers = true)]
        mu: Option<f64>,
        /// Renormalized coupling g_R(0) (multiplicative mode)
        #[arg(long, allow_negative_numbers = true)]
        g: Option<f64>,
        /// External momentum
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        q: f64,
        /// Subtraction point q_s
        #[arg(long, default_value_t = 0.0)]
        point: f64,
        /// Integrand formula over `p`, `q` and parameters
        #[arg(default_value = DEFAULT_INTEGRAND)]
        integrand: String,
        #[command(flatten)]
        common: Common,
    },
    /// Running parameters over a subtraction-point grid
    RgFlow {
        /// Renormalized parameter mu_R(0)
        #[arg(long, allow_negative_numbers = true)]
        mu: f64,
        /// Renormalized coupling g_R(0)
        #[arg(long, allow_negative_numbers = true)]
        g: f64,
        /// q_s grid start:stop:step (or a single value)
        #[arg(long)]
        grid: String,
        /// Integrand formula over `p`, `q` and parameters
        #[arg(default_value = DEFAULT_INTEGRAND)]
        integrand: String,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Scheme {
    Cutoff,
    Partner,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Methods {
    Direct,
    Cutoff,
    Partner,
    All,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Additive,
    Multiplicative,
}

#[derive(Debug)]
enum CliError {
    Core(CoreError),
    Config(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Config(msg) => write!(f, "invalid configuration: {msg}"),
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 4,
            CliError::Core(e) => match e {
                CoreError::SyntaxError { .. } | CoreError::NonIntegerExponent { .. } => 2,
                CoreError::InsufficientOrder { .. }
                | CoreError::InvalidRegulator(_)
                | CoreError::InvalidConfig(_)
                | CoreError::ReservedSymbol(_)
                | CoreError::PerturbativityWarning(_) => 4,
                CoreError::RegulatorDisagreement { .. } => 5,
                _ => 3,
            },
        }
    }
}

struct Output {
    report: Report,
    format: Format,
    out: Option<PathBuf>,
    failures: Vec<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(output) => {
            let rendered = output.report.render(output.format);
            if let Some(path) = &output.out {
                if let Err(e) = fs::write(path, &rendered) {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    return ExitCode::from(1);
                }
            } else {
                print!("{rendered}");
            }
            if output.failures.is_empty() {
                ExitCode::SUCCESS
            } else {
                for f in &output.failures {
                    eprintln!("check failed: {f}");
                }
                ExitCode::from(5)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn parse_grid(text: &str) -> Result<Vec<f64>, CliError> {
    let bad = |msg: &str| CliError::Config(format!("grid `{text}`: {msg}"));
    if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        if parts.len() != 3 {
            return Err(bad("expected start:stop:step"));
        }
        let nums: Vec<f64> = parts
            .iter()
            .map(|s| s.parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| bad("non-numeric component"))?;
        let (start, stop, step) = (nums[0], nums[1], nums[2]);
        if !(step > 0.0) {
            return Err(bad("step must be positive"));
        }
        if stop < start {
            return Err(bad("stop must be >= start"));
        }
        let mut grid = Vec::new();
        let mut i = 0u32;
        loop {
            let v = start + step * i as f64;
            if v > stop + 0.5 * step {
                break;
            }
            grid.push(v);
            i += 1;
        }
        Ok(grid)
    } else {
        let v: f64 = text.parse().map_err(|_| bad("not a number"))?;
        Ok(vec![v])
    }
}

fn auto_order(e: &Expr<f64>, requested: Option<u32>) -> Result<(i64, u32), CliError> {
    let omega = divergence::sdd(&to_rational(e)?);
    Ok((omega, requested.unwrap_or(omega.max(0) as u32)))
}

fn partner_regulator(
    e: &Expr<f64>,
    family_text: &str,
    scale: f64,
    b: &Bindings<f64>,
) -> Result<Regulator<f64>, CliError> {
    let family = parse::<f64>(family_text)?;
    let scale_name = infer_scale_name(e, &family, b)?;
    Ok(Regulator::partner(e, family, scale_name, scale, b)?)
}

fn run(command: Command) -> Result<Output, CliError> {
    match command {
        Command::Analyze {
            integrand,
            q,
            p0,
            common,
        } => {
            common.check_tol()?;
            let e = parse::<f64>(&integrand)?;
            let b = common.bindings()?;
            let r = to_rational(&e)?;
            let analysis = divergence::analyze(&r, q, &b)?;
            let slope = divergence::verify_sdd_numeric(&e, q, &b, p0)?;
            let mut report = Report::new("analyze");
            report.push_str("integrand", &integrand);
            report.push_f64("q", q);
            report.push("omega", json!(analysis.omega));
            report.push_bool("pole_free", analysis.pole_free);
            report.push("verdict", serde_json::to_value(analysis.verdict).unwrap());
            report.push_f64("numeric_slope", slope);
            Ok(Output {
                report,
                format: common.format,
                out: common.out,
                failures: Vec::new(),
            })
        }
        Command::Regularize {
            integrand,
            scheme,
            cutoff,
            mscale,
            partner_family,
            q,
            common,
        } => {
            common.check_tol()?;
            let e = parse::<f64>(&integrand)?;
            let b = common.bindings()?;
            let (reg, scheme_name, scale) = match scheme {
                Scheme::Cutoff => (Regulator::hard_cutoff(cutoff)?, "cutoff", cutoff),
                Scheme::Partner => (
                    partner_regulator(&e, &partner_family, mscale, &b)?,
                    "partner",
                    mscale,
                ),
            };
            let value = regularized_value(&e, &reg, q, &b, common.tol)?;
            let mut report = Report::new("regularize");
            report.push_str("integrand", &integrand);
            report.push_str("scheme", scheme_name);
            report.push_f64("scale", scale);
            report.push_f64("q", q);
            report.push_f64("value", value.value);
            report.push_f64("abs_error_estimate", value.abs_error_estimate);
            report.push("subdivisions", json!(value.subdivisions));
            Ok(Output {
                report,
                format: common.format,
                out: common.out,
                failures: Vec::new(),
            })
        }
        Command::FinitePart {
            integrand,
            q,
            order,
            point,
            methods,
            partner_family,
            cutoff,
            mscale,
            common,
        } => {
            common.check_tol()?;
            let e = parse::<f64>(&integrand)?;
            let b = common.bindings()?;
            let (omega, order) = auto_order(&e, order)?;
            let spec = SubtractionSpec::new(order, point);

            let mut results = Vec::new();
            if matches!(methods, Methods::Direct | Methods::All) {
                results.push(finite_part_direct(&e, &spec, q, &b, common.tol)?);
            }
            if matches!(methods, Methods::Cutoff | Methods::All) {
                let reg = Regulator::hard_cutoff(cutoff)?;
                results.push(finite_part_cutoff_limit(
                    &e, &reg, &spec, q, &b, common.tol,
                )?);
            }
            if matches!(methods, Methods::Partner | Methods::All) {
                let reg = partner_regulator(&e, &partner_family, mscale, &b)?;
                results.push(finite_part_cutoff_limit(
                    &e, &reg, &spec, q, &b, common.tol,
                )?);
            }

            let mut report = Report::new("finite-part");
            report.push_str("integrand", &integrand);
            report.push_f64("q", q);
            report.push("omega", json!(omega));
            report.push("order", json!(order));
            report.push_f64("point", point);
            let mut max_gap: f64 = 0.0;
            for i in 0..results.len() {
                for j in i + 1..results.len() {
                    let gap = (results[i].value - results[j].value).abs();
                    max_gap = max_gap.max(gap);
                    report.push_f64(
                        &format!("discrepancy_{}_{}", results[i].method, results[j].method),
                        gap,
                    );
                }
            }
            if results.len() > 1 {
                report.push_f64("max_discrepancy", max_gap);
            }
            report.set_table(
                vec!["method".into(), "value".into(), "abs_error_estimate".into()],
                results
                    .iter()
                    .map(|r| {
                        vec![
                            json!(r.method.to_string()),
                            json_number(r.value),
                            json_number(r.abs_error_estimate),
                        ]
                    })
                    .collect(),
            );
            Ok(Output {
                report,
                format: common.format,
                out: common.out,
                failures: Vec::new(),
            })
        }
        Command::Check {
            integrand,
            qgrid,
            order,
            point,
            partner_family,
            cutoff,
            mscale,
            common,
        } => {
            common.check_tol()?;
            let e = parse::<f64>(&integrand)?;
            let b = common.bindings()?;
            let grid = parse_grid(&qgrid)?;
            let (omega, order) = auto_order(&e, order)?;
            let spec = SubtractionSpec::new(order, point);
            let family = parse::<f64>(&partner_family)?;
            let mut failures = Vec::new();

            let mut report = Report::new("check");
            report.push_str("integrand", &integrand);
            report.push("omega", json!(omega));
            report.push("order", json!(order));

            // regulator independence of the finite part (Err -> exit 5 path)
            let cross = cross_regulator_check(&e, &spec, &grid, &b, common.tol, &family)?;
            report.push_f64("cross_check_max_discrepancy", cross.max_discrepancy);

            // symmetry classification under m -> -m, both schemes
            let reg = Regulator::hard_cutoff(cutoff)?;
            let sym = symmetry_check(&e, "m", &reg, grid[0], &b, common.tol)?;
            report.push(
                "cutoff_symmetry",
                serde_json::to_value(sym.outcome).unwrap(),
            );
            report.push(
                "cutoff_subtraction_symmetry",
                serde_json::to_value(sym.subtraction_outcome).unwrap(),
            );
            if sym.outcome != sym.subtraction_outcome {
                failures.push(
                    "cutoff scheme: value and subtraction symmetry classifications differ".into(),
                );
            }
            match partner_regulator(&e, &partner_family, mscale, &b) {
                Ok(partner) => {
                    let sym = symmetry_check(&e, "m", &partner, grid[0], &b, common.tol)?;
                    report.push(
                        "partner_symmetry",
                        serde_json::to_value(sym.outcome).unwrap(),
                    );
                    report.push(
                        "partner_subtraction_symmetry",
                        serde_json::to_value(sym.subtraction_outcome).unwrap(),
                    );
                    if !sym.flipped_poles.is_empty() {
                        report.push_f64("partner_flipped_pole", sym.flipped_poles[0]);
                    }
                    if sym.outcome != sym.subtraction_outcome {
                        failures.push(
                            "partner scheme: value and subtraction symmetry classifications differ"
                                .into(),
                        );
                    }
                }
                Err(e) => {
                    report.push_str("partner_symmetry", &format!("skipped ({e})"));
                }
            }

            // subtraction-point independence of observables; the scalar
            // running formulas apply to the omega <= 0 (order 0) case
            if order == 0 {
                let q_probe = grid[grid.len() / 2];
                let qs_grid = [0.0, 0.5, 1.0, 2.0];
                let add = AdditiveModel::new(1.0, e.clone(), b.clone())?;
                let res_add = rg_residual_additive(&add, q_probe, &qs_grid, common.tol)?;
                report.push_f64("rg_residual_additive", res_add);
                if res_add > 1e-7 {
                    failures.push(format!("additive RG residual {res_add:e} above 1e-7"));
                }
                let mult = MultiplicativeModel::new(0.01, e.clone(), b.clone())?;
                let res_mult = rg_residual_multiplicative(&mult, q_probe, &qs_grid, common.tol)?;
                report.push_f64("rg_residual_multiplicative", res_mult);
                if res_mult > 5e-6 {
                    failures.push(format!(
                        "multiplicative RG residual {res_mult:e} above 5e-6"
                    ));
                }
            } else {
                report.push_str("rg_residual", "skipped (scalar running needs omega <= 0)");
            }

            report.push_bool("pass", failures.is_empty());
            Ok(Output {
                report,
                format: common.format,
                out: common.out,
                failures,
            })
        }
        Command::Renorm {
            mode,
            mu,
            g,
            q,
            point,
            integrand,
            common,
        } => {
            common.check_tol()?;
            let e = parse::<f64>(&integrand)?;
            let b = common.bindings()?;
            let mut report = Report::new("renorm");
            report.push_str("integrand", &integrand);
            report.push_f64("q", q);
            report.push_f64("q_s", point);
            match mode {
                Mode::Additive => {
                    let mu =
                        mu.ok_or_else(|| CliError::Config("additive mode needs --mu".into()))?;
                    let model = AdditiveModel::new(mu, e, b)?;
                    let running = running_mu(&model, point, common.tol)?;
                    let observable = observable_additive(&model, q, point, common.tol)?;
                    report.push_str("mode", "additive");
                    report.push_f64("mu_R_reference", mu);
                    report.push_f64("mu_R_at_point", running);
                    report.push_f64("finite_part", observable - running);
                    report.push_f64("observable", observable);
                }
                Mode::Multiplicative => {
                    let g =
                        g.ok_or_else(|| CliError::Config("multiplicative mode needs --g".into()))?;
                    let model = MultiplicativeModel::new(g, e, b)?;
                    if !model.is_perturbative() {
                        eprintln!(
                            "warning: |g_R| = {} is outside the perturbative regime (< 0.3)",
                            g.abs()
                        );
                    }
                    let running = running_g(&model, point, common.tol)?;
                    let observable = observable_multiplicative(&model, q, point, common.tol)?;
                    report.push_str("mode", "multiplicative");
                    report.push_f64("g_R_reference", g);
                    report.push_f64("g_R_at_point", running);
                    report.push_f64("observable", observable);
                }
            }
            Ok(Output {
                report,
                format: common.format,
                out: common.out,
                failures: Vec::new(),
            })
        }
        Command::RgFlow {
            mu,
            g,
            grid,
            integrand,
            common,
        } => {
            common.check_tol()?;
            let e = parse::<f64>(&integrand)?;
            let b = common.bindings()?;
            let grid = parse_grid(&grid)?;
            let add = AdditiveModel::new(mu, e.clone(), b.clone())?;
            let mult = MultiplicativeModel::new(g, e, b)?;
            let table = rg_flow(&add, &mult, &grid, common.tol)?;
            let mut report = Report::new("rg-flow");
            report.push_str("integrand", &integrand);
            report.push_f64("mu_R_reference", mu);
            report.push_f64("g_R_reference", g);
            report.set_table(
                vec!["q_s".into(), "delta".into(), "mu_R".into(), "g_R".into()],
                table
                    .rows
                    .iter()
                    .map(|r| {
                        vec![
                            json_number(r.q_s),
                            json_number(r.delta),
                            json_number(r.mu_r),
                            json_number(r.g_r),
                        ]
                    })
                    .collect(),
            );
            Ok(Output {
                report,
                format: common.format,
                out: common.out,
                failures: Vec::new(),
            })
        }
    }
}
