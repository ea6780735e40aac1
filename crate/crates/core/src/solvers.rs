//! Constructive schemes: monotone iteration over truncated problems, the Riesz-potential
//! Picard iteration, and the fixed-point iteration on the Schauder set; plus the linear
//! and drift solves they rest on.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::grid::{finite_gradient, DomainKind, DomainSpec, GridFunction};
use crate::norms::lp_norm_values;
use crate::operators::{drift_matrix, BallGreenKernel, FracLapMatrix, RieszKernel};
use crate::params::{ExponentTable, ProblemParams, Regime};
use crate::source::SourceSpec;
use crate::special::riesz_constant;

/// How `(-Δ)^s v = g` is inverted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinearBackend {
    /// Inverse of the assembled quadrature matrix.
    #[default]
    Dense,
    /// Closed-form ball Green kernel (ball grids only).
    Green,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverOptions {
    pub tol_inner: f64,
    pub tol_outer: f64,
    pub omega: f64,
    pub max_inner: usize,
    /// Largest truncation level `n` tried by the monotone scheme.
    pub max_level: f64,
    pub max_iterations: usize,
    /// `tol_mono = tol_mono_rel·‖u‖_∞`.
    pub tol_mono_rel: f64,
    /// Number of snapshots kept in a report (first and last always included).
    pub snapshots: usize,
    pub backend: LinearBackend,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol_inner: 1e-8,
            tol_outer: 1e-6,
            omega: 0.5,
            max_inner: 500,
            max_level: 2f64.powi(40),
            max_iterations: 200,
            tol_mono_rel: 1e-8,
            snapshots: 8,
            backend: LinearBackend::Dense,
        }
    }
}

/// Discrete inverse of `(-Δ)^s` with zero exterior data, reused across solves.
pub struct LinearSolver {
    pub op: FracLapMatrix,
    pub backend: LinearBackend,
    green: Option<BallGreenKernel>,
}

impl LinearSolver {
    pub fn new(domain: &DomainSpec, s: f64, backend: LinearBackend) -> Result<Self> {
        let op = FracLapMatrix::assemble(domain, s)?;
        let green = match backend {
            LinearBackend::Dense => {
                op.inverse()?;
                None
            }
            LinearBackend::Green => Some(BallGreenKernel::build(domain, s)?),
        };
        Ok(LinearSolver { op, backend, green })
    }

    pub fn for_params(params: &ProblemParams, backend: LinearBackend) -> Result<Self> {
        Self::new(&params.domain, params.s, backend)
    }

    pub fn domain(&self) -> &DomainSpec {
        &self.op.domain
    }

    pub fn solve(&self, g: &GridFunction) -> Result<GridFunction> {
        match &self.green {
            Some(k) => k.solve(g),
            None => self.op.solve(g),
        }
    }

    /// `(-Δ)^s u - |∇u|^q - λf` at interior nodes (zero at boundary nodes).
    pub fn residual(&self, u: &GridFunction, q: f64, lambda: f64, f: &GridFunction) -> Result<GridFunction> {
        let lu = self.op.apply(u)?;
        let g = finite_gradient(u);
        let d = self.op.domain;
        Ok(GridFunction {
            domain: d,
            values: (0..d.grid_n)
                .map(|i| {
                    if d.is_boundary(i) {
                        0.0
                    } else {
                        lu.values[i] - g.values[i].powf(q) - lambda * f.values[i]
                    }
                })
                .collect(),
        })
    }
}

/// Solves `(-Δ)^s v = g` in Ω, `v = 0` outside, with the default backend.
pub fn linear_solve(g: &GridFunction, params: &ProblemParams) -> Result<GridFunction> {
    g.check_same_grid(&GridFunction::zeros(params.domain))?;
    LinearSolver::for_params(params, LinearBackend::Dense)?.solve(g)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SolveStatus {
    Converged,
    NonConvergent,
    InvariantBreach,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ResidualNorms {
    pub l1: f64,
    pub linf: f64,
}

impl ResidualNorms {
    fn of(r: &GridFunction) -> Self {
        let d = &r.domain;
        let idx: Vec<usize> = d.interior().collect();
        let m = d.cell_measures();
        let v: Vec<f64> = idx.iter().map(|&i| r.values[i]).collect();
        let w: Vec<f64> = idx.iter().map(|&i| m[i]).collect();
        ResidualNorms {
            l1: lp_norm_values(&v, &w, 1.0),
            linf: lp_norm_values(&v, &w, f64::INFINITY),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub iteration: usize,
    /// Truncation level for the monotone scheme; iteration index otherwise.
    pub level: f64,
    pub values: Vec<f64>,
}

/// Least-squares fit `log d_k ≈ a + k log δ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometricFit {
    pub ratio: f64,
    pub r_squared: f64,
    pub points: usize,
}

impl GeometricFit {
    pub fn fit(values: &[f64]) -> Option<Self> {
        let pts: Vec<(f64, f64)> = values
            .iter()
            .enumerate()
            .filter(|(_, &v)| v > 0.0 && v.is_finite())
            .map(|(k, &v)| (k as f64, v.ln()))
            .collect();
        if pts.len() < 3 {
            return None;
        }
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
        let slope = sxy / sxx;
        let r_squared = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
        Some(GeometricFit {
            ratio: slope.exp(),
            r_squared,
            points: pts.len(),
        })
    }
}

/// Outcome and history of one scheme run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub scheme: String,
    pub status: SolveStatus,
    /// The iteration met its stopping rule (an invariant breach may still be recorded in `status`).
    pub converged: bool,
    pub regime: Regime,
    pub exponents: ExponentTable,
    pub lambda: f64,
    pub iterations: usize,
    pub residual_history: Vec<ResidualNorms>,
    pub final_residual: ResidualNorms,
    /// `‖u‖_∞` per iteration.
    pub sup_history: Vec<f64>,
    /// `‖∇u‖` in the scheme's control norm per iteration.
    pub norms_history: Vec<f64>,
    /// Consecutive differences `‖u_{k+1} - u_k‖`.
    pub cauchy_history: Vec<f64>,
    pub inner_iterations: Vec<usize>,
    /// Monotone scheme: consecutive iterates ordered within `tol_mono`.
    pub monotone_flag: bool,
    /// Monotone scheme with a barrier: every iterate below it within `tol_mono`.
    pub bounded_by_supersolution: Option<bool>,
    /// Picard scheme: gain bound `a_k` from the recursion, and the measured ratio.
    pub gain_history: Vec<f64>,
    pub measured_gain_history: Vec<f64>,
    pub envelope_ok: Option<bool>,
    pub contraction: Option<GeometricFit>,
    /// Schauder scheme: set-E bound held at every iterate.
    pub invariant_ok: Option<bool>,
    pub minimality_flag: Option<bool>,
    pub snapshots: Vec<Snapshot>,
    pub solution: GridFunction,
    pub notes: Vec<String>,
}

impl SolveReport {
    fn new(scheme: &str, params: &ProblemParams, domain: DomainSpec) -> Self {
        SolveReport {
            scheme: scheme.into(),
            status: SolveStatus::NonConvergent,
            converged: false,
            regime: params.exponents().regime,
            exponents: params.exponents(),
            lambda: params.lambda,
            iterations: 0,
            residual_history: Vec::new(),
            final_residual: ResidualNorms::default(),
            sup_history: Vec::new(),
            norms_history: Vec::new(),
            cauchy_history: Vec::new(),
            inner_iterations: Vec::new(),
            monotone_flag: true,
            bounded_by_supersolution: None,
            gain_history: Vec::new(),
            measured_gain_history: Vec::new(),
            envelope_ok: None,
            contraction: None,
            invariant_ok: None,
            minimality_flag: None,
            snapshots: Vec::new(),
            solution: GridFunction::zeros(domain),
            notes: Vec::new(),
        }
    }

    fn finish(&mut self, status: SolveStatus, converged: bool, keep: usize) {
        self.status = status;
        self.converged = converged;
        decimate(&mut self.snapshots, keep);
    }

    /// Columns `x, u, grad, residual` on the solution grid.
    pub fn solution_csv(&self, residual: Option<&GridFunction>) -> String {
        let d = &self.solution.domain;
        let x = d.nodes();
        let g = finite_gradient(&self.solution).values;
        let zeros = vec![0.0; x.len()];
        let r = residual.map_or(&zeros, |r| &r.values);
        crate::io::csv_table(&["x", "u", "grad", "residual"], &[&x, &self.solution.values, &g, r])
    }
}

fn decimate(snaps: &mut Vec<Snapshot>, keep: usize) {
    if snaps.len() <= keep.max(2) {
        return;
    }
    let n = snaps.len();
    let keep = keep.max(2);
    let picked: Vec<usize> = (0..keep).map(|k| k * (n - 1) / (keep - 1)).collect();
    let mut out = Vec::with_capacity(keep);
    for (k, s) in snaps.drain(..).enumerate() {
        if picked.contains(&k) {
            out.push(s);
        }
    }
    *snaps = out;
}

/// `|ξ|^q/(1+|ξ|^q/n)`, bounded by `n`.
pub fn truncated_power(xi: f64, q: f64, n: f64) -> f64 {
    let p = xi.abs().powf(q);
    if n.is_infinite() {
        p
    } else {
        p / (1.0 + p / n)
    }
}

/// Solution of the `n`-th truncated problem by damped fixed-point iteration from `u_prev`.
///
/// Returns the inner fixed point and the number of inner iterations.
pub fn truncated_step(
    solver: &LinearSolver,
    u_prev: &GridFunction,
    n: f64,
    params: &ProblemParams,
    f: &GridFunction,
    opts: &SolverOptions,
) -> Result<(GridFunction, usize)> {
    if !(n >= 1.0) {
        return Err(invalid(format!("truncation level n = {n} must be >= 1")));
    }
    let q = params.q;
    let lam = params.lambda;
    let map = |v: &GridFunction| -> Result<GridFunction> {
        let g = finite_gradient(v);
        let rhs = GridFunction {
            domain: v.domain,
            values: g
                .values
                .iter()
                .zip(&f.values)
                .map(|(&gi, &fi)| truncated_power(gi, q, n) + lam * fi)
                .collect(),
        };
        solver.solve(&rhs)
    };
    let mut v = u_prev.clone();
    let mut omega = opts.omega;
    let mut last = f64::INFINITY;
    for it in 1..=opts.max_inner {
        let tv = map(&v)?;
        let diff = tv
            .values
            .iter()
            .zip(&v.values)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        let scale = tv.sup_norm();
        let res = if diff == 0.0 {
            0.0
        } else {
            diff / scale.max(f64::MIN_POSITIVE)
        };
        if !res.is_finite() {
            return Err(Error::NonFinite("truncated step".into()));
        }
        if res <= opts.tol_inner {
            return Ok((tv, it));
        }
        if res > last {
            omega *= 0.5;
        }
        last = res;
        v = GridFunction {
            domain: v.domain,
            values: v
                .values
                .iter()
                .zip(&tv.values)
                .map(|(a, b)| (1.0 - omega) * a + omega * b)
                .collect(),
        };
    }
    Err(Error::InnerNonConvergence {
        iterations: opts.max_inner,
        residual: last,
    })
}

/// Tracks the blow-up rules shared by the iterative schemes.
struct GrowthMonitor {
    cap: f64,
    doublings: usize,
    last: f64,
}

impl GrowthMonitor {
    fn new(reference: f64) -> Self {
        GrowthMonitor {
            cap: 1e6 * (1.0 + reference),
            doublings: 0,
            last: 0.0,
        }
    }

    /// `Some(reason)` once the iterates are declared divergent.
    fn update(&mut self, sup: f64) -> Option<String> {
        if !sup.is_finite() || sup > self.cap {
            return Some(format!("sup norm {sup:e} exceeded the blow-up cap {:e}", self.cap));
        }
        // "Doubling" with 5% slack: iterates growing linearly in n double only asymptotically.
        if self.last > 0.0 && sup >= 1.9 * self.last {
            self.doublings += 1;
        } else {
            self.doublings = 0;
        }
        self.last = sup;
        if self.doublings >= 5 {
            return Some("sup norm doubled across 5 consecutive steps".into());
        }
        None
    }
}

/// Monotone iteration `u_n`, `n = 1, 2, 4, …`, optionally checked against a barrier `w`.
pub fn monotone_iteration(
    params: &ProblemParams,
    f: &SourceSpec,
    w_super: Option<&GridFunction>,
    opts: &SolverOptions,
) -> Result<SolveReport> {
    let solver = LinearSolver::for_params(params, opts.backend)?;
    monotone_with_solver(&solver, params, f, w_super, opts)
}

pub fn monotone_with_solver(
    solver: &LinearSolver,
    params: &ProblemParams,
    f: &SourceSpec,
    w_super: Option<&GridFunction>,
    opts: &SolverOptions,
) -> Result<SolveReport> {
    params.validate()?;
    f.validate(params.dim)?;
    let d = params.domain;
    let mut report = SolveReport::new("monotone", params, d);
    if !report.regime.below_critical() {
        report
            .notes
            .push("monotone scheme run outside its regime q < 2s".into());
    }
    let fg = f.on_grid(&d);
    let base = solver.solve(&fg.scale(params.lambda))?;
    let mut growth = GrowthMonitor::new(base.sup_norm());
    let mut u = GridFunction::zeros(d);
    let mut bounded = w_super.map(|_| true);
    let mut n = 1.0;
    let mut status = SolveStatus::NonConvergent;
    let mut k = 0usize;
    while n <= opts.max_level && k < opts.max_iterations {
        let (next, inner) = match truncated_step(solver, &u, n, params, &fg, opts) {
            Ok(x) => x,
            Err(e @ (Error::InnerNonConvergence { .. } | Error::NonFinite(_))) => {
                report.notes.push(format!("level n = {n}: {e}"));
                break;
            }
            Err(e) => return Err(e),
        };
        k += 1;
        let tol_mono = opts.tol_mono_rel * u.sup_norm();
        let step_min = next
            .values
            .iter()
            .zip(&u.values)
            .fold(f64::INFINITY, |m, (a, b)| m.min(a - b));
        if k > 1 && step_min < -tol_mono {
            report.monotone_flag = false;
            report
                .notes
                .push(format!("level n = {n}: iterate decreased by {:e}", -step_min));
        }
        if let Some(w) = w_super {
            let tol = opts.tol_mono_rel * next.sup_norm();
            let excess = next
                .values
                .iter()
                .zip(&w.values)
                .fold(f64::NEG_INFINITY, |m, (a, b)| m.max(a - b));
            if excess > tol {
                bounded = Some(false);
                report
                    .notes
                    .push(format!("level n = {n}: iterate exceeds the barrier by {excess:e}"));
            }
        }
        let diff = next
            .values
            .iter()
            .zip(&u.values)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        let res = solver.residual(&next, params.q, params.lambda, &fg)?;
        report.residual_history.push(ResidualNorms::of(&res));
        report.sup_history.push(next.sup_norm());
        report.norms_history.push(finite_gradient(&next).sup_norm());
        report.cauchy_history.push(diff);
        report.inner_iterations.push(inner);
        report.snapshots.push(Snapshot {
            iteration: k,
            level: n,
            values: next.values.clone(),
        });
        u = next;
        if let Some(reason) = growth.update(u.sup_norm()) {
            report.notes.push(reason);
            break;
        }
        if k > 1 && diff <= opts.tol_outer {
            status = SolveStatus::Converged;
            break;
        }
        n *= 2.0;
    }
    report.iterations = k;
    report.bounded_by_supersolution = bounded;
    report.final_residual = ResidualNorms::of(&solver.residual(&u, params.q, params.lambda, &fg)?);
    report.solution = u;
    report.finish(status, status == SolveStatus::Converged, opts.snapshots);
    Ok(report)
}

/// Gain sequence of the Picard scheme.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GainRecursion {
    pub sequence: Vec<f64>,
    /// Smaller root of `x = C(C₁x^q + 1)`; infinite when the recursion diverges.
    #[serde(with = "crate::io::extended_f64")]
    pub limit: f64,
    pub threshold: f64,
    pub threshold_ok: bool,
    pub diverged: bool,
}

/// `a_1 = C`, `a_{k+1} = C(C₁a_k^q + 1)`; threshold `C₁ ≤ q'^{1-q}/(qC^q)`.
pub fn gain_recursion(c: f64, c1: f64, q: f64, k_max: usize) -> Result<GainRecursion> {
    if !(c > 0.0) || !(c1 >= 0.0) || !(q > 1.0) {
        return Err(invalid("gain recursion needs C > 0, C1 >= 0, q > 1"));
    }
    let qp = q / (q - 1.0);
    let threshold = qp.powf(1.0 - q) / (q * c.powf(q));
    let threshold_ok = c1 <= threshold;
    let step = |a: f64| c * (c1 * a.powf(q) + 1.0);
    let mut sequence = vec![c];
    for _ in 1..k_max.max(1) {
        let next = step(*sequence.last().unwrap());
        sequence.push(next);
        if !next.is_finite() {
            break;
        }
    }
    let limit = if threshold_ok {
        if c1 == 0.0 {
            c
        } else {
            // The smaller root lies in [C, Cq']: g(x) = C(C₁x^q+1) - x is positive at C and
            // nonpositive at the minimizer (C₁qC)^{-1/(q-1)} ≥ Cq' of g.
            let g = |x: f64| step(x) - x;
            let x_min = (c1 * q * c).powf(-1.0 / (q - 1.0));
            if g(x_min) >= -4.0 * f64::EPSILON * x_min {
                // Tangency: the two roots merge at the minimizer.
                return Ok(GainRecursion {
                    sequence,
                    limit: x_min,
                    threshold,
                    threshold_ok,
                    diverged: false,
                });
            }
            let (mut lo, mut hi) = (c, x_min);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if g(mid) > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
                if hi - lo <= 1e-15 * hi {
                    break;
                }
            }
            0.5 * (lo + hi)
        }
    } else {
        f64::INFINITY
    };
    let diverged = !threshold_ok && sequence.windows(2).all(|w| w[1] > w[0]);
    Ok(GainRecursion {
        sequence,
        limit,
        threshold,
        threshold_ok,
        diverged,
    })
}

/// The bounding grid used by the potential schemes: 3× the domain diameter, same spacing.
pub fn potential_box(domain: &DomainSpec) -> Result<DomainSpec> {
    let n = domain.grid_n;
    match domain.kind {
        DomainKind::Ball { radius, dim } => DomainSpec::ball(3.0 * radius, dim, 3 * (n - 1) + 1),
        DomainKind::Interval { a, b } => {
            let len = b - a;
            DomainSpec::interval(a - len, b + len, 3 * (n - 1) + 1)
        }
    }
}

/// `f₀`: the forcing on the box, zero outside Ω.
pub fn extend_by_zero(f: &SourceSpec, domain: &DomainSpec, bx: &DomainSpec) -> GridFunction {
    let inner = f.on_grid(domain);
    GridFunction::from_fn_closed(*bx, |x| if domain.contains(x) { inner.evaluate(x) } else { 0.0 })
}

/// Riesz matrices on the potential box, shared by `check_m00` and the Picard scheme.
pub struct PotentialBox {
    pub domain: DomainSpec,
    /// `I_{2s}` (unnormalized).
    pub i2s: RieszKernel,
    /// `I_{2s-1}` (unnormalized).
    pub i2s1: RieszKernel,
    /// `κ` with `(-Δ)^s(κ I_{2s} g) = g`.
    pub kappa: f64,
    /// `C = κ(N-2s)`: `|∇(κI_{2s}g)| ≤ C I_{2s-1}g`.
    pub gradient_constant: f64,
}

impl PotentialBox {
    pub fn new(domain: &DomainSpec, s: f64) -> Result<Self> {
        let dim = domain.dim();
        if dim as f64 <= 2.0 * s {
            return Err(Error::Unsupported(format!(
                "whole-space potentials need N > 2s (N = {dim}, 2s = {})",
                2.0 * s
            )));
        }
        let bx = potential_box(domain)?;
        let kappa = riesz_constant(dim, 2.0 * s);
        Ok(PotentialBox {
            i2s: RieszKernel::build(&bx, 2.0 * s)?,
            i2s1: RieszKernel::build(&bx, 2.0 * s - 1.0)?,
            domain: bx,
            kappa,
            gradient_constant: kappa * (dim as f64 - 2.0 * s),
        })
    }
}

/// Riesz-potential Picard iteration `u_{k+1} = κI_{2s}(|∇u_k|^q + λf₀)` on the box.
///
/// `c1` is the (m00) constant measured for `f` itself; for `λf` it scales as `λ^{q-1}c1`.
pub fn picard_potential(params: &ProblemParams, f: &SourceSpec, c1: f64, opts: &SolverOptions) -> Result<SolveReport> {
    let pb = PotentialBox::new(&params.domain, params.s)?;
    picard_with_box(&pb, params, f, c1, opts)
}

pub fn picard_with_box(
    pb: &PotentialBox,
    params: &ProblemParams,
    f: &SourceSpec,
    c1: f64,
    opts: &SolverOptions,
) -> Result<SolveReport> {
    params.validate()?;
    f.validate(params.dim)?;
    if !f.is_nonnegative() {
        return Err(invalid("the potential scheme needs f >= 0"));
    }
    let bx = pb.domain;
    let q = params.q;
    let lam = params.lambda;
    let mut report = SolveReport::new("picard", params, bx);
    report.notes.push(format!(
        "whole-space scheme on a box of radius/half-length {:.6}; the limit does not vanish outside the domain",
        0.5 * bx.diameter()
    ));
    let f0 = extend_by_zero(f, &params.domain, &bx).scale(lam);
    let envelope = pb.i2s1.apply(&f0)?;
    let source = pb.i2s.apply(&f0)?.scale(pb.kappa);
    let c = pb.gradient_constant;
    let c1_lam = lam.powf(q - 1.0) * c1;
    let gains = gain_recursion(c, c1_lam, q, opts.max_iterations + 1)?;
    if !gains.threshold_ok {
        report.notes.push(format!(
            "gain threshold violated: C1 = {c1_lam:e} > {:e}",
            gains.threshold
        ));
    }
    let ratio = |u: &GridFunction| -> f64 {
        let g = finite_gradient(u);
        let e_max = envelope.sup_norm();
        (0..bx.grid_n)
            .filter(|&i| envelope.values[i] > 1e-12 * e_max)
            .map(|i| g.values[i] / envelope.values[i])
            .fold(0.0f64, f64::max)
    };
    let mut growth = GrowthMonitor::new(source.sup_norm());
    let mut u = source;
    let mut envelope_ok = true;
    let mut status = SolveStatus::NonConvergent;
    let mut k = 1usize;
    loop {
        let measured = ratio(&u);
        let bound = gains.sequence.get(k - 1).copied().unwrap_or(gains.limit);
        report.measured_gain_history.push(measured);
        report.gain_history.push(bound);
        if gains.threshold_ok && measured > bound * (1.0 + 1e-9) {
            envelope_ok = false;
        }
        report.sup_history.push(u.sup_norm());
        report.norms_history.push(finite_gradient(&u).sup_norm());
        report.snapshots.push(Snapshot {
            iteration: k,
            level: k as f64,
            values: u.values.clone(),
        });
        if k >= opts.max_iterations {
            break;
        }
        let g = finite_gradient(&u).map(|x| x.powf(q));
        let next = pb.i2s.apply(&g.add(&f0)?)?.scale(pb.kappa);
        let diff = next
            .values
            .iter()
            .zip(&u.values)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        report.cauchy_history.push(diff);
        u = next;
        k += 1;
        if let Some(reason) = growth.update(u.sup_norm()) {
            report.notes.push(reason);
            break;
        }
        if diff <= 1e-13 * u.sup_norm() || diff == 0.0 {
            status = SolveStatus::Converged;
            let measured = ratio(&u);
            report.measured_gain_history.push(measured);
            report
                .gain_history
                .push(gains.sequence.get(k - 1).copied().unwrap_or(gains.limit));
            if gains.threshold_ok && measured > gains.limit.max(bound) * (1.0 + 1e-9) {
                envelope_ok = false;
            }
            break;
        }
    }
    report.iterations = k;
    report.envelope_ok = gains.threshold_ok.then_some(envelope_ok);
    // Differences at the rounding floor carry no rate information.
    let floor = 1e-12 * u.sup_norm();
    let fit_data: Vec<f64> = report
        .cauchy_history
        .iter()
        .copied()
        .take_while(|&d| d > floor)
        .collect();
    report.contraction = GeometricFit::fit(&fit_data);
    report.residual_history = Vec::new();
    report.solution = u;
    report.finish(status, status == SolveStatus::Converged, opts.snapshots);
    Ok(report)
}

/// Maximizer of `(l^e - C₀l)/(C₀‖f‖)`: returns `(l*, λ*)`.
pub fn lambda_star_closed_form(exponent: f64, c0: f64, norm_f: f64) -> Result<(f64, f64)> {
    if !(c0 > 0.0) {
        return Err(invalid(format!("C0 = {c0} must be > 0")));
    }
    if !(exponent > 0.0 && exponent < 1.0) {
        return Err(invalid(format!("exponent e = {exponent} must lie in (0, 1)")));
    }
    if !(norm_f > 0.0) {
        return Err(invalid("‖f‖ must be > 0"));
    }
    let l = (exponent / c0).powf(1.0 / (1.0 - exponent));
    Ok((l, (l.powf(exponent) - c0 * l) / (c0 * norm_f)))
}

/// Exponent `e` of the Schauder set: `1/(2s)` at `q = 2s`, `1/q` above.
pub fn schauder_exponent(params: &ProblemParams) -> Result<(f64, f64)> {
    let t = params.exponents();
    let n = params.dim as f64;
    match t.regime {
        Regime::Critical => {
            if !(params.m > n / (2.0 * params.s)) {
                return Err(invalid(format!(
                    "critical case needs m > N/(2s) = {}",
                    n / (2.0 * params.s)
                )));
            }
            Ok((1.0 / (2.0 * params.s), 2.0 * params.s))
        }
        Regime::Supercritical => {
            let need = n / (params.q_conjugate() * (2.0 * params.s - 1.0));
            if !(params.m > need) {
                return Err(invalid(format!("supercritical case needs m > N/(q'(2s-1)) = {need}")));
            }
            Ok((1.0 / params.q, params.q))
        }
        _ => Err(invalid("the Schauder parameterization applies for q >= 2s")),
    }
}

/// `(l*, λ*)` for the regime of `params`.
pub fn schauder_lambda_star(params: &ProblemParams, norm_f_m: f64, c0: f64) -> Result<(f64, f64)> {
    let (e, _) = schauder_exponent(params)?;
    lambda_star_closed_form(e, c0, norm_f_m)
}

/// For `λ < λ*`: the root `l ≤ l*` of `C₀(l + λ‖f‖) = l^e`, by bisection.
pub fn schauder_radius(exponent: f64, c0: f64, norm_f: f64, lambda: f64) -> Result<Option<f64>> {
    let (l_star, lambda_star) = lambda_star_closed_form(exponent, c0, norm_f)?;
    if lambda > lambda_star || lambda < 0.0 {
        return Ok(None);
    }
    let g = |l: f64| l.powf(exponent) - c0 * (l + lambda * norm_f);
    if lambda == 0.0 {
        return Ok(Some(0.0));
    }
    let (mut lo, mut hi) = (0.0, l_star);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some(hi))
}

/// `‖u‖_{W^{1,1}} = ‖u‖_{L¹} + ‖∇u‖_{L¹}`.
fn w11_norm(u: &GridFunction) -> f64 {
    let m = u.domain.cell_measures();
    lp_norm_values(&u.values, &m, 1.0) + lp_norm_values(&finite_gradient(u).values, &m, 1.0)
}

/// `u ← L(|∇u|^{q_eff} + λf)` from `u = 0`, checking `‖∇u‖_{L^{q_eff m}} ≤ l^{1/q_eff}`.
pub fn schauder_iterate(
    params: &ProblemParams,
    f: &SourceSpec,
    l: f64,
    lambda: f64,
    opts: &SolverOptions,
) -> Result<SolveReport> {
    let solver = LinearSolver::for_params(params, opts.backend)?;
    schauder_with_solver(&solver, params, f, l, lambda, opts)
}

pub fn schauder_with_solver(
    solver: &LinearSolver,
    params: &ProblemParams,
    f: &SourceSpec,
    l: f64,
    lambda: f64,
    opts: &SolverOptions,
) -> Result<SolveReport> {
    let params = params.with_lambda(lambda);
    params.validate()?;
    f.validate(params.dim)?;
    let (_, q_eff) = schauder_exponent(&params)?;
    let d = params.domain;
    let mut report = SolveReport::new("schauder", &params, d);
    let fg = f.on_grid(&d);
    let measures = d.cell_measures();
    let sigma = q_eff * params.m;
    let bound = l.powf(1.0 / q_eff) * (1.0 + 1e-6);
    let base = solver.solve(&fg.scale(lambda))?;
    let mut growth = GrowthMonitor::new(base.sup_norm());
    let mut u = GridFunction::zeros(d);
    let mut invariant_ok = true;
    let mut increasing = true;
    let mut status = SolveStatus::NonConvergent;
    let mut k = 0usize;
    while k < opts.max_iterations {
        let g = finite_gradient(&u);
        let rhs = GridFunction {
            domain: d,
            values: g
                .values
                .iter()
                .zip(&fg.values)
                .map(|(&gi, &fi)| gi.powf(q_eff) + lambda * fi)
                .collect(),
        };
        let next = solver.solve(&rhs)?;
        k += 1;
        let gn = lp_norm_values(&finite_gradient(&next).values, &measures, sigma);
        if gn > bound {
            invariant_ok = false;
        }
        let tol = opts.tol_mono_rel * u.sup_norm();
        if next.values.iter().zip(&u.values).any(|(a, b)| a - b < -tol) {
            increasing = false;
        }
        let delta = w11_norm(&next.sub(&u)?);
        let res = solver.residual(&next, q_eff, lambda, &fg)?;
        report.residual_history.push(ResidualNorms::of(&res));
        report.sup_history.push(next.sup_norm());
        report.norms_history.push(gn);
        report.cauchy_history.push(delta);
        report.snapshots.push(Snapshot {
            iteration: k,
            level: k as f64,
            values: next.values.clone(),
        });
        u = next;
        if let Some(reason) = growth.update(u.sup_norm()) {
            report.notes.push(reason);
            break;
        }
        if delta <= opts.tol_outer {
            status = SolveStatus::Converged;
            break;
        }
    }
    let converged = status == SolveStatus::Converged;
    if !invariant_ok {
        report
            .notes
            .push(format!("set-E bound ‖∇u‖ ≤ l^(1/q) = {:e} was exceeded", bound));
        status = SolveStatus::InvariantBreach;
    }
    report.iterations = k;
    report.invariant_ok = Some(invariant_ok);
    // Iterates from 0 that increase stay below every solution of the discrete problem.
    report.minimality_flag = Some(increasing);
    report.final_residual = ResidualNorms::of(&solver.residual(&u, q_eff, lambda, &fg)?);
    report.solution = u;
    report.finish(status, converged, opts.snapshots);
    Ok(report)
}

/// Empirical `C₀ = max ‖∇L(g)‖_{L^{σ₀}}/‖g‖_{L^m}` over a probe set, `σ₀ = q_eff·m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct C0Estimate {
    pub c0: f64,
    pub probe: String,
    pub sigma0: f64,
    pub ratios: Vec<(String, f64)>,
}

/// Standard probes: indicators, admissible powers, the constant, and seeded random fields.
pub fn c0_probes(domain: &DomainSpec, m: f64, seed: u64, random: usize) -> Vec<(String, GridFunction)> {
    let mut out = Vec::new();
    let size = match domain.kind {
        DomainKind::Ball { radius, .. } => radius,
        DomainKind::Interval { a, b } => 0.5 * (b - a),
    };
    let center = match domain.kind {
        DomainKind::Ball { .. } => 0.0,
        DomainKind::Interval { a, b } => 0.5 * (a + b),
    };
    out.push((
        "constant".to_string(),
        SourceSpec::Constant { value: 1.0 }.on_grid(domain),
    ));
    for frac in [0.25, 0.5, 0.75] {
        let r = frac * size;
        out.push((
            format!("indicator_{frac}"),
            GridFunction::from_fn(*domain, |x| if (x - center).abs() < r { 1.0 } else { 0.0 }),
        ));
    }
    let n = domain.dim() as f64;
    for frac in [0.25, 0.5, 0.75] {
        // |x|^{-θ} ∈ L^m needs θ < N/m.
        let theta = if m.is_finite() { frac * n / m } else { 0.0 };
        if theta > 0.0 {
            let src = SourceSpec::Power { theta };
            let g = src.on_grid(domain);
            out.push((format!("power_{theta:.4}"), g));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for k in 0..random {
        let vals: Vec<f64> = (0..domain.grid_n).map(|_| rng.random::<f64>()).collect();
        out.push((
            format!("random_{k}"),
            GridFunction {
                domain: *domain,
                values: vals,
            }
            .with_zero_boundary(),
        ));
    }
    out
}

pub fn measure_c0(params: &ProblemParams, q_eff: f64, seed: u64) -> Result<C0Estimate> {
    let solver = LinearSolver::for_params(params, LinearBackend::Dense)?;
    measure_c0_with(&solver, params.m, q_eff, &c0_probes(&params.domain, params.m, seed, 4))
}

pub fn measure_c0_with(
    solver: &LinearSolver,
    m: f64,
    q_eff: f64,
    probes: &[(String, GridFunction)],
) -> Result<C0Estimate> {
    let sigma0 = q_eff * m;
    let measures = solver.domain().cell_measures();
    let mut ratios = Vec::new();
    for (name, g) in probes {
        let norm = lp_norm_values(&g.values, &measures, m);
        if norm == 0.0 {
            continue;
        }
        let v = solver.solve(g)?;
        let grad = lp_norm_values(&finite_gradient(&v).values, &measures, sigma0);
        ratios.push((name.clone(), grad / norm));
    }
    let (probe, c0) = ratios.iter().cloned().fold(
        (String::new(), 0.0f64),
        |best, (n, r)| if r > best.1 { (n, r) } else { best },
    );
    if !(c0 > 0.0) {
        return Err(invalid("no nonzero probe"));
    }
    Ok(C0Estimate {
        c0,
        probe,
        sigma0,
        ratios,
    })
}

/// Dense solve of `(-Δ)^s w - B ∂w = f` and the smallest singular value of its matrix.
pub fn drift_solve(b: &GridFunction, f: &GridFunction, params: &ProblemParams) -> Result<(GridFunction, f64)> {
    let op = FracLapMatrix::for_params(params)?;
    f.check_same_grid(b)?;
    let m = drift_matrix(&op, b)?;
    let gap = m.singular_values().iter().copied().fold(f64::INFINITY, f64::min);
    if !(gap > 1e-10) {
        return Err(Error::Singular {
            condition: f64::INFINITY,
        });
    }
    let rhs = DVector::from_iterator(op.size(), params.domain.interior().map(|i| f.values[i]));
    let sol = m.lu().solve(&rhs).ok_or(Error::Singular {
        condition: f64::INFINITY,
    })?;
    Ok((op.embed(sol.as_slice()), gap))
}
