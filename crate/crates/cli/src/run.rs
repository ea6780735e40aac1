//! Subcommand implementations. Every artifact is written by the calling thread after the
//! parallel work has finished, in parameter order.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use frackpz_core::diagnostics::{
    self, check_m00, comparison_check, exponent_bootstrap, green_bounds_refinement, hardy_constant, m00_on_box,
    singular_weight_study, ComparisonSide, ComparisonVerdict,
};
use frackpz_core::io::{csv_table, format_f64};
use frackpz_core::operators::FracLapMatrix;
use frackpz_core::params::Regime;
use frackpz_core::solvers::{
    c0_probes, lambda_star_closed_form, measure_c0_with, monotone_with_solver, picard_with_box, schauder_exponent,
    schauder_radius, schauder_with_solver, LinearSolver, PotentialBox, SolveReport,
};
use frackpz_core::special::{fraclap_constant, getoor_constant, riesz_constant};
use frackpz_core::supersolutions::{
    optimal_candidate, verify_candidate, PowerSupersolSpec, RadialBumpSpec, Supersolution, Verdict,
};
use frackpz_core::{finite_gradient, Error, GridFunction, ProblemParams, SourceSpec};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::config::{ConfigError, Family, LoadedConfig, RunConfig, Scheme};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_NONCONVERGENT: i32 = 2;
pub const EXIT_VERIFY_FAILED: i32 = 3;

#[derive(Debug)]
pub enum CliError {
    Config(ConfigError),
    Io(String),
    Numeric(Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => EXIT_CONFIG,
            // Parameter combinations a scheme cannot handle are configuration errors.
            CliError::Numeric(Error::InvalidParameter(_) | Error::InvalidDomain(_) | Error::Unsupported(_)) => {
                EXIT_CONFIG
            }
            CliError::Numeric(_) => EXIT_NONCONVERGENT,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(e) => write!(f, "config error: {e}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
            CliError::Numeric(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Numeric(e)
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum VerifyTarget {
    #[value(name = "greenbounds")]
    GreenBounds,
    M00,
    Hardy,
    Supersolution,
    Comparison,
    #[value(name = "singularweight")]
    SingularWeight,
    Bootstrap,
}

fn write_file(dir: &Path, name: &str, contents: &str) -> CliResult<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    Ok(path)
}

fn to_json<T: Serialize>(value: &T) -> CliResult<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// Scheme chosen for `params`, and why.
pub fn route(scheme: Scheme, params: &ProblemParams) -> (Scheme, String) {
    if scheme != Scheme::Auto {
        return (scheme, "requested".into());
    }
    let regime = params.exponents().regime;
    match regime {
        Regime::SubcriticalLow | Regime::Subcritical => (Scheme::Monotone, format!("{}: q < 2s", regime.as_str())),
        Regime::Critical => (Scheme::Schauder, "CRITICAL: q = 2s".into()),
        Regime::Supercritical => (Scheme::Schauder, "SUPERCRITICAL: q > 2s".into()),
    }
}

/// Barrier family for the monotone scheme.
pub fn barrier_family(family: Family, params: &ProblemParams) -> Family {
    if family != Family::Auto {
        return family;
    }
    let n = params.dim as f64;
    let radial = params.domain.is_radial();
    let p_star = params.exponents().p_star;
    if radial && params.dim >= 2 && params.q > p_star && params.q < 2.0 * params.s {
        Family::Power
    } else if radial && n > 2.0 * params.s {
        Family::Bump
    } else {
        Family::Torsion
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BarrierSummary {
    pub candidate: Supersolution,
    /// Largest `λ` for which the sampled candidate passes the residual check.
    pub lambda_admissible: f64,
    pub verified_at_lambda: bool,
}

/// Constants measured or supplied for the chosen scheme.
#[derive(Debug, Clone, Default, Serialize)]
pub struct SchemeConstants {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c0_probe: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l_star: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda_star: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gradient_constant: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub config: RunConfig,
    pub scheme: Scheme,
    pub routing: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub barrier: Option<BarrierSummary>,
    pub constants: SchemeConstants,
    pub report: SolveReport,
}

/// λ-independent state shared by every solve of one configuration.
pub struct SolveContext {
    pub params: ProblemParams,
    pub source: SourceSpec,
    pub scheme: Scheme,
    pub routing: String,
    solver: Option<LinearSolver>,
    barrier: Option<(Supersolution, f64)>,
    barrier_note: Option<String>,
    potential: Option<PotentialBox>,
    constants: SchemeConstants,
    config: RunConfig,
}

impl SolveContext {
    pub fn new(loaded: &LoadedConfig) -> CliResult<Self> {
        let params = loaded.problem()?;
        let cfg = &loaded.config;
        let source = cfg.source.clone();
        let (scheme, routing) = route(cfg.solver.scheme, &params);
        let mut ctx = SolveContext {
            params: params.clone(),
            source: source.clone(),
            scheme,
            routing,
            solver: None,
            barrier: None,
            barrier_note: None,
            potential: None,
            constants: SchemeConstants::default(),
            config: cfg.clone(),
        };
        match scheme {
            Scheme::Monotone => {
                let solver = LinearSolver::for_params(&params, cfg.solver.backend)?;
                match build_barrier(cfg, &params, &solver.op, &source) {
                    Ok(b) => ctx.barrier = b,
                    Err(e) => ctx.barrier_note = Some(format!("no barrier: {e}")),
                }
                ctx.solver = Some(solver);
            }
            Scheme::Schauder => {
                let (e, q_eff) = schauder_exponent(&params)?;
                let solver = LinearSolver::for_params(&params, cfg.solver.backend)?;
                let (c0, probe) = match cfg.solver.c0 {
                    Some(c) => (c, "supplied".to_string()),
                    None => {
                        let est = measure_c0_with(
                            &solver,
                            params.m,
                            q_eff,
                            &c0_probes(&params.domain, params.m, cfg.seed, 4),
                        )?;
                        (est.c0, est.probe)
                    }
                };
                let norm_f = source.lm_norm(&params.domain, params.m)?;
                if norm_f > 0.0 {
                    let (l_star, lambda_star) = lambda_star_closed_form(e, c0, norm_f)?;
                    ctx.constants.l_star = Some(l_star);
                    ctx.constants.lambda_star = Some(lambda_star);
                }
                ctx.constants.c0 = Some(c0);
                ctx.constants.c0_probe = Some(probe);
                ctx.solver = Some(solver);
            }
            Scheme::Picard => {
                let pb = PotentialBox::new(&params.domain, params.s)?;
                let c1 = match cfg.solver.c1 {
                    Some(c) => c,
                    None => m00_on_box(&pb.i2s1, &source, &params.domain, params.q)?,
                };
                ctx.constants.c1 = Some(c1);
                ctx.constants.gradient_constant = Some(pb.gradient_constant);
                ctx.potential = Some(pb);
            }
            Scheme::Auto => unreachable!("routing resolves auto"),
        }
        Ok(ctx)
    }

    pub fn analytic_lambda_star(&self) -> Option<f64> {
        self.constants.lambda_star
    }

    /// One solve at `lambda`.
    pub fn solve(&self, lambda: f64) -> CliResult<RunReport> {
        let params = self.params.with_lambda(lambda);
        let opts = self.config.solver.options();
        let mut constants = self.constants.clone();
        let mut barrier_summary = None;
        let report = match self.scheme {
            Scheme::Monotone => {
                let solver = self.solver.as_ref().expect("monotone context has a solver");
                let mut w = None;
                if let Some((cand, lam_adm)) = &self.barrier {
                    let check = verify_candidate(&solver.op, cand, &params, &self.source)?;
                    let ok = check.verdict == Verdict::Supersolution;
                    if ok {
                        w = Some(check.w.clone());
                    }
                    barrier_summary = Some(BarrierSummary {
                        candidate: cand.clone(),
                        lambda_admissible: *lam_adm,
                        verified_at_lambda: ok,
                    });
                }
                let mut r = monotone_with_solver(solver, &params, &self.source, w.as_ref(), &opts)?;
                if let Some(note) = &self.barrier_note {
                    r.notes.push(note.clone());
                }
                if barrier_summary.as_ref().is_some_and(|b| !b.verified_at_lambda) {
                    r.notes
                        .push("barrier not verified at this lambda; run unbounded".into());
                }
                r
            }
            Scheme::Schauder => {
                let solver = self.solver.as_ref().expect("schauder context has a solver");
                let (e, _) = schauder_exponent(&params)?;
                let c0 = constants.c0.expect("measured in the context");
                let norm_f = self.source.lm_norm(&params.domain, params.m)?;
                let l = if norm_f > 0.0 {
                    schauder_radius(e, c0, norm_f, lambda)?
                        .or(constants.l_star)
                        .unwrap_or(0.0)
                } else {
                    0.0
                };
                constants.l = Some(l);
                schauder_with_solver(solver, &params, &self.source, l, lambda, &opts)?
            }
            Scheme::Picard => {
                let pb = self.potential.as_ref().expect("picard context has a potential box");
                picard_with_box(pb, &params, &self.source, constants.c1.unwrap_or(0.0), &opts)?
            }
            Scheme::Auto => unreachable!(),
        };
        let mut config = self.config.clone();
        config.params.lambda = lambda;
        Ok(RunReport {
            config,
            scheme: self.scheme,
            routing: self.routing.clone(),
            barrier: barrier_summary,
            constants,
            report,
        })
    }

    /// Columns `x, u, grad` and, on the problem grid, `residual`.
    pub fn solution_csv(&self, run: &RunReport) -> CliResult<String> {
        let r = &run.report;
        match (&self.solver, self.scheme) {
            (Some(solver), Scheme::Monotone | Scheme::Schauder) => {
                let params = self.params.with_lambda(run.config.params.lambda);
                let q = if self.scheme == Scheme::Schauder {
                    schauder_exponent(&params)?.1
                } else {
                    params.q
                };
                let res = solver.residual(&r.solution, q, params.lambda, &self.source.on_grid(&params.domain))?;
                Ok(r.solution_csv(Some(&res)))
            }
            _ => {
                let x = r.solution.domain.nodes();
                let g = finite_gradient(&r.solution).values;
                Ok(csv_table(&["x", "u", "grad"], &[&x, &r.solution.values, &g]))
            }
        }
    }
}

fn build_barrier(
    cfg: &RunConfig,
    params: &ProblemParams,
    op: &FracLapMatrix,
    f: &SourceSpec,
) -> CliResult<Option<(Supersolution, f64)>> {
    let family = barrier_family(cfg.supersolution.family, params);
    let radius = params.domain.radius();
    let unit = match family {
        Family::None => return Ok(None),
        Family::Power => {
            let r = radius.ok_or_else(|| Error::Unsupported("power barriers need a ball".into()))?;
            let shift = cfg.supersolution.shift.unwrap_or(1.5 * r);
            Supersolution::Power(PowerSupersolSpec::optimal(params.dim, params.s, params.q, shift)?)
        }
        Family::Bump => {
            let r = radius.ok_or_else(|| Error::Unsupported("bump barriers need a ball".into()))?;
            let alpha = cfg.supersolution.alpha.unwrap_or(0.5 + params.s);
            Supersolution::Bump(RadialBumpSpec::covering(params.dim, params.s, alpha, 1.0, r)?)
        }
        Family::Torsion | Family::Auto => Supersolution::Torsion { amplitude: 1.0 },
    };
    Ok(Some(optimal_candidate(op, &unit, params, f)?))
}

/// `solve`: report.json and solution.csv. Exit 0 when the iteration converged, 2 otherwise.
pub fn cmd_solve(loaded: &LoadedConfig, out: &Path) -> CliResult<i32> {
    let ctx = SolveContext::new(loaded)?;
    let run = ctx.solve(ctx.params.lambda)?;
    write_file(out, "report.json", &to_json(&run)?)?;
    write_file(out, "solution.csv", &ctx.solution_csv(&run)?)?;
    Ok(if run.report.converged {
        EXIT_OK
    } else {
        EXIT_NONCONVERGENT
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepPoint {
    pub lambda: f64,
    pub converged: bool,
    pub iterations: usize,
    pub final_residual: f64,
    pub sup_norm: f64,
    pub status: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepSummary {
    pub scheme: Scheme,
    pub points: usize,
    /// Largest converged `λ` below the first failure.
    pub lambda_star_empirical: Option<f64>,
    /// `[converged, failed]` bracket after bisection; `None` when no failure was seen.
    pub bracket: Option<[f64; 2]>,
    pub lambda_star_analytic: Option<f64>,
    pub empirical_at_least_analytic: Option<bool>,
}

fn sweep_point(ctx: &SolveContext, lambda: f64) -> SweepPoint {
    match ctx.solve(lambda) {
        Ok(run) => {
            let r = &run.report;
            SweepPoint {
                lambda,
                converged: r.converged,
                iterations: r.iterations,
                final_residual: r.final_residual.linf,
                sup_norm: r.solution.sup_norm(),
                status: format!("{:?}", r.status).to_uppercase(),
            }
        }
        Err(e) => SweepPoint {
            lambda,
            converged: false,
            iterations: 0,
            final_residual: f64::NAN,
            sup_norm: f64::NAN,
            status: format!("ERROR: {e}"),
        },
    }
}

/// Grid over the λ range, then bisection on the first converged/failed bracket.
pub fn run_sweep(loaded: &LoadedConfig) -> CliResult<(SweepSummary, Vec<SweepPoint>)> {
    let ctx = SolveContext::new(loaded)?;
    let sw = loaded.config.sweep.clone().unwrap_or_default();
    let lambdas: Vec<f64> = (0..sw.count)
        .map(|k| sw.lambda_min + (sw.lambda_max - sw.lambda_min) * k as f64 / (sw.count - 1) as f64)
        .collect();
    let mut points: Vec<SweepPoint> = lambdas.par_iter().map(|&l| sweep_point(&ctx, l)).collect();
    let first_fail = points.iter().position(|p| !p.converged);
    let mut bracket = None;
    let mut best = None;
    match first_fail {
        None => best = points.last().map(|p| p.lambda),
        Some(0) => {}
        Some(k) => {
            let (mut lo, mut hi) = (points[k - 1].lambda, points[k].lambda);
            for _ in 0..sw.bisection_steps {
                let mid = 0.5 * (lo + hi);
                let p = sweep_point(&ctx, mid);
                if p.converged {
                    lo = mid;
                } else {
                    hi = mid;
                }
                points.push(p);
            }
            best = Some(lo);
            bracket = Some([lo, hi]);
        }
    }
    points.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
    let analytic = ctx.analytic_lambda_star();
    let summary = SweepSummary {
        scheme: ctx.scheme,
        points: points.len(),
        lambda_star_empirical: best,
        bracket,
        lambda_star_analytic: analytic,
        empirical_at_least_analytic: match (best, analytic) {
            (Some(e), Some(a)) => Some(e >= a),
            _ => None,
        },
    };
    Ok((summary, points))
}

pub fn sweep_csv(points: &[SweepPoint]) -> String {
    let mut out = String::from("lambda,converged,iterations,final_residual,sup_norm\n");
    for p in points {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            format_f64(p.lambda),
            p.converged,
            p.iterations,
            format_f64(p.final_residual),
            format_f64(p.sup_norm)
        ));
    }
    out
}

/// `sweep`: sweep.csv and sweep.json. Per-point failures are recorded, never fatal.
pub fn cmd_sweep(loaded: &LoadedConfig, out: &Path) -> CliResult<i32> {
    let (summary, points) = run_sweep(loaded)?;
    write_file(out, "sweep.csv", &sweep_csv(&points))?;
    write_file(
        out,
        "sweep.json",
        &to_json(&json!({ "config": loaded.config, "summary": summary }))?,
    )?;
    Ok(EXIT_OK)
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyOutcome {
    pub target: VerifyTarget,
    pub pass: bool,
    pub seed: u64,
    pub report: serde_json::Value,
}

fn value<T: Serialize>(v: &T) -> CliResult<serde_json::Value> {
    serde_json::to_value(v).map_err(|e| CliError::Io(e.to_string()))
}

/// Runs one diagnostic; the second element holds extra CSV artifacts `(name, contents)`.
pub fn run_verify(loaded: &LoadedConfig, target: VerifyTarget) -> CliResult<(VerifyOutcome, Vec<(String, String)>)> {
    let params = loaded.problem()?;
    let cfg = &loaded.config;
    let f = &cfg.source;
    let mut extra = Vec::new();
    let (pass, report) = match target {
        VerifyTarget::GreenBounds => {
            let r = green_bounds_refinement(&params.domain, params.s, cfg.verify.samples, cfg.seed)?;
            extra.push(("scatter.csv".to_string(), r.fine.scatter_csv()));
            (r.pass, value(&r)?)
        }
        VerifyTarget::M00 => {
            let r = check_m00(f, &params)?;
            (r.pass, value(&r)?)
        }
        VerifyTarget::Hardy => {
            let coarse = params.with_domain(params.domain.with_grid((params.domain.grid_n - 1) / 2 + 1));
            let (c, cc) = (hardy_constant(&params)?, hardy_constant(&coarse)?);
            let drift = (c / cc - 1.0).abs();
            (
                c > 0.0 && drift < 0.1,
                json!({ "constant": c, "constant_coarse": cc, "relative_drift": drift }),
            )
        }
        VerifyTarget::Supersolution => {
            let op = FracLapMatrix::for_params(&params)?;
            let (cand, lam_adm) = build_barrier(cfg, &params, &op, f)?.ok_or_else(|| ConfigError {
                line: loaded.lines.get("supersolution.family").copied(),
                key: Some("supersolution.family".into()),
                message: "verify supersolution needs a barrier family".into(),
            })?;
            let check = verify_candidate(&op, &cand, &params, f)?;
            extra.push(("residual.csv".to_string(), check.to_csv()));
            let pass = check.verdict == Verdict::Supersolution;
            (
                pass,
                json!({
                    "candidate": cand,
                    "lambda": params.lambda,
                    "lambda_admissible": lam_adm,
                    "verdict": check.verdict,
                    "worst_node": check.worst_node,
                    "worst_residual": check.worst_residual,
                    "tol_super": check.tol_super,
                    "excluded": check.excluded.len(),
                }),
            )
        }
        VerifyTarget::Comparison => {
            let solver = LinearSolver::for_params(&params, cfg.solver.backend)?;
            let (cand, _) = build_barrier(cfg, &params, &solver.op, f)?
                .ok_or_else(|| Error::Unsupported("comparison needs a barrier family".into()))?;
            let check = verify_candidate(&solver.op, &cand, &params, f)?;
            let sampled = cand.sample(&solver.op)?;
            let run = monotone_with_solver(&solver, &params, f, None, &cfg.solver.options())?;
            let u = &run.solution;
            let gu = finite_gradient(u);
            let gw = finite_gradient(&sampled.grid);
            let q = params.q;
            let lip = GridFunction::new(
                params.domain,
                gu.values
                    .iter()
                    .zip(&gw.values)
                    .map(|(a, b)| q * a.max(*b).powf(q - 1.0))
                    .collect(),
            )?;
            let g = f.on_grid(&params.domain).scale(params.lambda);
            let ext = |t: f64| (sampled.exterior)(t);
            let w1 = ComparisonSide::zero_exterior(u);
            let w2 = ComparisonSide {
                w: &sampled.grid,
                exterior: Some(&ext),
                excluded: &check.excluded,
            };
            let tol = cfg.solver.tol_mono_rel * u.sup_norm().max(sampled.grid.sup_norm());
            // u solves the problem up to the scheme tolerance; allow that much in its residual.
            let r = comparison_check(&solver.op, &w1, &w2, &|xi| xi.abs().powf(q), &lip, &g, tol)?;
            (
                r.verdict == ComparisonVerdict::Holds,
                json!({ "candidate": cand, "comparison": r }),
            )
        }
        VerifyTarget::SingularWeight => {
            let alpha = cfg.verify.alpha.unwrap_or(0.5 + params.s);
            let r = singular_weight_study(alpha, &params)?;
            (r.saturated && r.monotone && r.two_sided, value(&r)?)
        }
        VerifyTarget::Bootstrap => {
            let n = params.dim as f64;
            let sigma = cfg.verify.sigma.unwrap_or(2.0 * n / (2.0 * params.s - 1.0));
            let r1 = cfg.verify.r1.unwrap_or(0.5 * (1.0 + params.exponents().p_star));
            let r = exponent_bootstrap(params.dim, sigma, params.s, r1, cfg.verify.steps)?;
            (r.exited && r.increasing, value(&r)?)
        }
    };
    Ok((
        VerifyOutcome {
            target,
            pass,
            seed: cfg.seed,
            report,
        },
        extra,
    ))
}

/// `verify`: report.json (plus target CSVs). Exit 0 on pass, 3 on fail.
pub fn cmd_verify(loaded: &LoadedConfig, target: VerifyTarget, out: &Path) -> CliResult<i32> {
    let (outcome, extra) = run_verify(loaded, target)?;
    if target == VerifyTarget::Bootstrap {
        if let Some(seq) = outcome.report.get("sequence").and_then(|v| v.as_array()) {
            for (k, r) in seq.iter().enumerate() {
                println!("r_{} = {}", k + 1, r);
            }
        }
    }
    write_file(out, "report.json", &to_json(&outcome)?)?;
    for (name, contents) in extra {
        write_file(out, &name, &contents)?;
    }
    Ok(if outcome.pass { EXIT_OK } else { EXIT_VERIFY_FAILED })
}

/// `info`: exponents, regime, routing and normalization constants.
pub fn cmd_info(loaded: &LoadedConfig) -> CliResult<serde_json::Value> {
    let params = loaded.problem()?;
    let (scheme, routing) = route(loaded.config.solver.scheme, &params);
    let dim = params.dim;
    let s = params.s;
    let mut info = json!({
        "params": params,
        "exponents": params.exponents(),
        "scheme": scheme,
        "routing": routing,
        "fraclap_constant": fraclap_constant(dim, s)?,
        "getoor_constant": getoor_constant(dim, s),
        "h": params.domain.h(),
        "default_seed": diagnostics::DEFAULT_SEED,
    });
    if (dim as f64) > 2.0 * s {
        info["riesz_constant_2s"] = json!(riesz_constant(dim, 2.0 * s));
    }
    if scheme == Scheme::Monotone {
        info["barrier_family"] = json!(barrier_family(loaded.config.supersolution.family, &params));
    }
    Ok(info)
}
