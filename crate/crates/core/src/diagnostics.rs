//! Numerical checks of the kernel bounds, the potential condition, the Hardy inequality,
//! comparison, regularity exponents, the exponent ladder and the singular-weight problem.
//!
//! Membership claims are tested as refinement stability of discrete norms.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::grid::{finite_gradient, DomainKind, DomainSpec, GridFunction};
use crate::io::csv_table;
use crate::norms::{gagliardo_form, lp_norm_values, weak_lp_values};
use crate::operators::{BallGreenKernel, FracLapMatrix, RieszKernel};
use crate::params::ProblemParams;
use crate::solvers::{extend_by_zero, potential_box};
use crate::source::SourceSpec;

pub const DEFAULT_SEED: u64 = 0x5eed_2024;

/// Which term of `min{|x-y|^{2s-N}, d^s(x)|x-y|^{s-N}, d^s(y)|x-y|^{s-N}}` is active.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Interior,
    BoundaryX,
    BoundaryY,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCheckReport {
    pub samples: usize,
    pub excluded: usize,
    pub violations: usize,
    pub fitted_constant: f64,
    pub worst_ratio: f64,
    pub worst_branch: Branch,
    /// Pairs per active branch, in the order interior, boundary-x, boundary-y.
    pub branch_counts: [usize; 3],
    pub symmetry_error: f64,
    /// `|∇_x G| ≤ C₂ G max{1/|x-y|, 1/d(x)}`.
    pub gradient_constant: f64,
    /// `|∇_x G| |x-y|^{N-2s+1}` over pairs with `d(x) ≥ |x-y|`; near the boundary the
    /// gradient grows like `d^{s-1}` and this form has no uniform constant.
    pub gradient_power_constant: f64,
    pub seed: u64,
    pub pass: bool,
    #[serde(skip)]
    pub scatter: Vec<[f64; 4]>,
}

impl BoundCheckReport {
    /// Columns `dist, dx, dy, ratio`.
    pub fn scatter_csv(&self) -> String {
        let col = |k: usize| self.scatter.iter().map(|r| r[k]).collect::<Vec<_>>();
        let (a, b, c, d) = (col(0), col(1), col(2), col(3));
        csv_table(&["dist", "dx", "dy", "ratio"], &[&a, &b, &c, &d])
    }
}

fn sample_ball(rng: &mut ChaCha8Rng, dim: usize, radius: f64) -> Vec<f64> {
    loop {
        let p: Vec<f64> = (0..dim).map(|_| radius * (2.0 * rng.random::<f64>() - 1.0)).collect();
        if p.iter().map(|v| v * v).sum::<f64>() < radius * radius {
            return p;
        }
    }
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Ratios of `G` against the two-sided bound over seeded random pairs.
pub fn check_green_bounds(kernel: &BallGreenKernel, samples: usize, seed: u64) -> Result<BoundCheckReport> {
    if samples < 1000 {
        return Err(invalid(format!("need at least 1000 samples, got {samples}")));
    }
    let d = &kernel.domain;
    let dim = d.dim();
    let nd = dim as f64;
    let s = kernel.s;
    let radius = kernel.radius;
    let h = d.h();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = BoundCheckReport {
        samples: 0,
        excluded: 0,
        violations: 0,
        fitted_constant: 0.0,
        worst_ratio: 0.0,
        worst_branch: Branch::Interior,
        branch_counts: [0; 3],
        symmetry_error: 0.0,
        gradient_constant: 0.0,
        gradient_power_constant: 0.0,
        seed,
        pass: false,
        scatter: Vec::with_capacity(samples),
    };
    let mut ratios = Vec::with_capacity(samples);
    while report.samples < samples {
        let x = sample_ball(&mut rng, dim, radius);
        let y = sample_ball(&mut rng, dim, radius);
        let dist = x.iter().zip(&y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        let (dx, dy) = (radius - norm(&x), radius - norm(&y));
        if dist < 2.0 * h || dx < 2.0 * h {
            report.excluded += 1;
            continue;
        }
        report.samples += 1;
        let g = kernel.green(&x, &y);
        let gt = kernel.green(&y, &x);
        report.symmetry_error = report
            .symmetry_error
            .max((g - gt).abs() / g.abs().max(f64::MIN_POSITIVE));
        let terms = [
            dist.powf(2.0 * s - nd),
            dx.powf(s) * dist.powf(s - nd),
            dy.powf(s) * dist.powf(s - nd),
        ];
        let (k, bound) = terms
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |acc, (k, &t)| if t < acc.1 { (k, t) } else { acc });
        report.branch_counts[k] += 1;
        let ratio = g / bound;
        if ratio > report.worst_ratio {
            report.worst_ratio = ratio;
            report.worst_branch = [Branch::Interior, Branch::BoundaryX, Branch::BoundaryY][k];
        }
        ratios.push(ratio);
        report.scatter.push([dist, dx, dy, ratio]);

        // Central differences in x with a step well inside both singular scales.
        let delta = 1e-4 * dist.min(dx);
        let mut grad2 = 0.0;
        let mut xp = x.clone();
        for c in 0..dim {
            xp[c] = x[c] + delta;
            let gp = kernel.green(&xp, &y);
            xp[c] = x[c] - delta;
            let gm = kernel.green(&xp, &y);
            xp[c] = x[c];
            grad2 += ((gp - gm) / (2.0 * delta)).powi(2);
        }
        let grad = grad2.sqrt();
        report.gradient_constant = report.gradient_constant.max(grad / (g * (1.0 / dist).max(1.0 / dx)));
        if dx >= dist {
            report.gradient_power_constant = report.gradient_power_constant.max(grad * dist.powf(nd - 2.0 * s + 1.0));
        }
    }
    report.fitted_constant = report.worst_ratio;
    let cap = report.fitted_constant * (1.0 + 1e-9);
    report.violations = ratios.iter().filter(|&&r| r > cap).count();
    report.pass = report.fitted_constant.is_finite()
        && report.gradient_constant.is_finite()
        && report.violations == 0
        && report.symmetry_error <= 1e-10;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GreenRefinement {
    pub coarse: BoundCheckReport,
    pub fine: BoundCheckReport,
    /// `max(c_f/c_c, c_c/c_f)` for the kernel and gradient constants.
    pub drift: f64,
    pub gradient_drift: f64,
    pub pass: bool,
}

fn drift(a: f64, b: f64) -> f64 {
    (a / b).max(b / a)
}

/// Bound check on `grid_n` and `2 grid_n` with the same sample stream.
pub fn green_bounds_refinement(domain: &DomainSpec, s: f64, samples: usize, seed: u64) -> Result<GreenRefinement> {
    let fine_domain = domain.with_grid(2 * domain.grid_n);
    let coarse = check_green_bounds(&BallGreenKernel::build(domain, s)?, samples, seed)?;
    let fine = check_green_bounds(&BallGreenKernel::build(&fine_domain, s)?, samples, seed)?;
    let drift_k = drift(coarse.fitted_constant, fine.fitted_constant);
    let drift_g = drift(coarse.gradient_constant, fine.gradient_constant);
    Ok(GreenRefinement {
        pass: coarse.pass && fine.pass && drift_k < 2.0 && drift_g < 2.0,
        coarse,
        fine,
        drift: drift_k,
        gradient_drift: drift_g,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct M00Report {
    /// `max I_{2s-1}(F₀)/I_{2s-1}(f₀)` on the potential box, `F₀ = (I_{2s-1}f₀)^q`.
    pub c1: f64,
    /// Same on the half-resolution grid.
    pub c1_coarse: f64,
    pub drift: f64,
    pub vacuous: bool,
    pub pass: bool,
}

/// `C₁` on one grid (unnormalized potentials).
pub fn m00_constant(f: &SourceSpec, domain: &DomainSpec, s: f64, q: f64) -> Result<f64> {
    let bx = potential_box(domain)?;
    m00_on_box(&RieszKernel::build(&bx, 2.0 * s - 1.0)?, f, domain, q)
}

/// `C₁` with a prebuilt `I_{2s-1}` on the potential box of `domain`.
pub fn m00_on_box(riesz: &RieszKernel, f: &SourceSpec, domain: &DomainSpec, q: f64) -> Result<f64> {
    let bx = potential_box(domain)?;
    let f0 = extend_by_zero(f, domain, &bx);
    let e = riesz.apply(&f0)?;
    let big = riesz.apply(&e.map(|v| v.powf(q)))?;
    let e_max = e.sup_norm();
    Ok((0..bx.grid_n)
        .filter(|&i| e.values[i] > 1e-300 && e.values[i] > 1e-14 * e_max)
        .map(|i| big.values[i] / e.values[i])
        .fold(0.0f64, f64::max))
}

pub fn check_m00(f: &SourceSpec, params: &ProblemParams) -> Result<M00Report> {
    f.validate(params.dim)?;
    if !f.is_nonnegative() {
        return Err(invalid("condition (m00) is stated for nonnegative data"));
    }
    if f.is_zero() {
        return Ok(M00Report {
            c1: 0.0,
            c1_coarse: 0.0,
            drift: 1.0,
            vacuous: true,
            pass: true,
        });
    }
    let d = params.domain;
    let coarse = d.with_grid((d.grid_n - 1) / 2 + 1);
    let c1 = m00_constant(f, &d, params.s, params.q)?;
    let c1_coarse = m00_constant(f, &coarse, params.s, params.q)?;
    let dr = drift(c1, c1_coarse);
    Ok(M00Report {
        c1,
        c1_coarse,
        drift: dr,
        vacuous: false,
        pass: c1.is_finite() && c1 > 0.0 && dr < 2.0,
    })
}

/// Smallest generalized eigenvalue of the Gagliardo form against `Σ φ² μ/d^{2s}`.
///
/// Nodes with `d < h` are dropped from the weight and eliminated by a Schur complement.
pub fn hardy_constant(params: &ProblemParams) -> Result<f64> {
    let s = params.s;
    if !(s > 0.5) {
        return Err(invalid("the Hardy inequality is used for s > 1/2"));
    }
    let d = &params.domain;
    let a_full = gagliardo_form(d, s);
    let mu = d.cell_measures();
    let h = d.h();
    let idx: Vec<usize> = d.interior().collect();
    let dist: Vec<f64> = idx.iter().map(|&i| d.distance_to_boundary(d.node(i))).collect();
    let keep: Vec<usize> = (0..idx.len()).filter(|&k| dist[k] >= h * (1.0 - 1e-9)).collect();
    let drop: Vec<usize> = (0..idx.len()).filter(|&k| dist[k] < h * (1.0 - 1e-9)).collect();
    let sub = |rows: &[usize], cols: &[usize]| {
        DMatrix::from_fn(rows.len(), cols.len(), |i, j| a_full[(idx[rows[i]], idx[cols[j]])])
    };
    let mut a = sub(&keep, &keep);
    if !drop.is_empty() {
        let a12 = sub(&keep, &drop);
        let a22 = sub(&drop, &drop);
        let inv = a22.try_inverse().ok_or(Error::Singular {
            condition: f64::INFINITY,
        })?;
        a -= &a12 * inv * a12.transpose();
    }
    let w: Vec<f64> = keep
        .iter()
        .map(|&k| (mu[idx[k]] / dist[k].powf(2.0 * s)).sqrt().recip())
        .collect();
    let m = DMatrix::from_fn(keep.len(), keep.len(), |i, j| w[i] * a[(i, j)] * w[j]);
    let m = 0.5 * (&m + m.transpose());
    let ev = m.symmetric_eigenvalues();
    let c = ev.iter().copied().fold(f64::INFINITY, f64::min);
    if !(c > 0.0) {
        return Err(Error::Singular {
            condition: f64::INFINITY,
        });
    }
    Ok(c)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ComparisonVerdict {
    /// Hypotheses verified and `w₂ ≥ w₁` observed.
    Holds,
    /// Hypotheses verified but `w₂ < w₁` somewhere.
    Violated,
    /// A hypothesis failed; the conclusion is not assessed.
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub verdict: ComparisonVerdict,
    pub failed_hypotheses: Vec<String>,
    /// `min (w₂ - w₁)` over all nodes; absent when a hypothesis failed.
    pub min_gap: Option<f64>,
    pub tol: f64,
}

/// One side of a comparison: grid values, optional values outside the domain (ball grids),
/// and nodes left out of the residual sign test (kinks, singular points).
pub struct ComparisonSide<'a> {
    pub w: &'a GridFunction,
    pub exterior: Option<&'a dyn Fn(f64) -> f64>,
    pub excluded: &'a [usize],
}

impl<'a> ComparisonSide<'a> {
    pub fn zero_exterior(w: &'a GridFunction) -> Self {
        ComparisonSide {
            w,
            exterior: None,
            excluded: &[],
        }
    }

    fn outside(&self, t: f64) -> f64 {
        self.exterior.map_or(0.0, |e| e(t))
    }
}

/// Discrete comparison: checks `(-Δ)^s w₁ ≤ H(∇w₁) + g`, `(-Δ)^s w₂ ≥ H(∇w₂) + g` and
/// `w₁ ≤ w₂` outside Ω, then `w₂ ≥ w₁` in Ω.
///
/// `lip` is a per-node bound on the Lipschitz constant of `H`; it must be finite.
pub fn comparison_check(
    op: &FracLapMatrix,
    w1: &ComparisonSide,
    w2: &ComparisonSide,
    hamiltonian: &dyn Fn(f64) -> f64,
    lip: &GridFunction,
    g: &GridFunction,
    tol_mono: f64,
) -> Result<ComparisonReport> {
    w1.w.check_same_grid(w2.w)?;
    w1.w.check_same_grid(g)?;
    w1.w.check_same_grid(lip)?;
    let d = op.domain;
    let mut failed = Vec::new();
    let exterior_radii: Vec<f64> = match d.kind {
        DomainKind::Ball { radius, .. } => (0..=48).map(|k| radius * (1.0 + k as f64 / 16.0)).collect(),
        DomainKind::Interval { .. } => Vec::new(),
    };
    for side in [w1, w2] {
        if side.exterior.is_some() && !d.is_radial() {
            return Err(Error::Unsupported("exterior data are supported on ball grids".into()));
        }
        if side.exterior.is_none() && !side.w.vanishes_on_boundary() {
            failed.push("a function without exterior data must vanish on the boundary".to_string());
        }
    }
    if exterior_radii.iter().any(|&t| w1.outside(t) > w2.outside(t) + tol_mono) {
        failed.push("exterior ordering w1 <= w2 fails outside the domain".to_string());
    }
    if lip.values.iter().any(|b| !b.is_finite() || *b < 0.0) {
        failed.push("Lipschitz bound of H must be finite and nonnegative".to_string());
    }
    let residual = |side: &ComparisonSide| -> Result<(Vec<f64>, f64)> {
        let lw = match side.exterior {
            Some(e) => op.apply_with_exterior(side.w, e)?,
            None => op.apply(&side.w.clone().with_zero_boundary())?,
        };
        let gr = finite_gradient(side.w);
        let counted: Vec<usize> = d.interior().filter(|i| !side.excluded.contains(i)).collect();
        let scale = counted.iter().fold(0.0f64, |m, &i| m.max(lw.values[i].abs()));
        Ok((
            counted
                .iter()
                .map(|&i| lw.values[i] - hamiltonian(gr.values[i]) - g.values[i])
                .collect(),
            1e-6 * scale.max(f64::MIN_POSITIVE),
        ))
    };
    let (r1, t1) = residual(w1)?;
    let (r2, t2) = residual(w2)?;
    let worst1 = r1.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let worst2 = r2.iter().copied().fold(f64::INFINITY, f64::min);
    if worst1 > t1 {
        failed.push(format!("w1 is not a subsolution (residual up to {worst1:e})"));
    }
    if worst2 < -t2 {
        failed.push(format!("w2 is not a supersolution (residual down to {worst2:e})"));
    }
    if !failed.is_empty() {
        return Ok(ComparisonReport {
            verdict: ComparisonVerdict::Inconclusive,
            failed_hypotheses: failed,
            min_gap: None,
            tol: tol_mono,
        });
    }
    let gap = d
        .interior()
        .fold(f64::INFINITY, |m, i| m.min(w2.w.values[i] - w1.w.values[i]));
    Ok(ComparisonReport {
        verdict: if gap >= -tol_mono {
            ComparisonVerdict::Holds
        } else {
            ComparisonVerdict::Violated
        },
        failed_hypotheses: failed,
        min_gap: Some(gap),
        tol: tol_mono,
    })
}

/// `min{N/(θ-2s+1), 2s}` for `f = |x|^{-θ}`.
pub fn predicted_gradient_cap(dim: usize, s: f64, theta: f64) -> f64 {
    let beta = theta - 2.0 * s + 1.0;
    let cap = if beta > 0.0 { dim as f64 / beta } else { f64::INFINITY };
    cap.min(2.0 * s)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegularityReport {
    pub sigmas: Vec<f64>,
    pub grid_n: Vec<usize>,
    /// `‖∇u‖_{L^σ}` per level (outer) and σ (inner).
    pub norms: Vec<Vec<f64>>,
    /// Ratio of `∫|∇u|^σ` between the two finest levels.
    pub growth: Vec<f64>,
    /// Largest σ below the first unstable one; `None` when every σ is stable.
    pub threshold: Option<f64>,
    pub predicted_cap: f64,
    pub ratio: Option<f64>,
}

/// Growth of `∫|∇u|^σ` under refinement, with the 25% stability rule.
///
/// The integral is used instead of the norm: above the cap it grows like `h^{N-σβ}`, which
/// separates from the stable range faster than its `σ`-th root.
pub fn regularity_probe(levels: &[GridFunction], sigmas: &[f64], predicted_cap: f64) -> Result<RegularityReport> {
    if levels.len() < 2 {
        return Err(invalid("regularity probe needs at least two refinement levels"));
    }
    let mut norms = Vec::new();
    let mut integrals = Vec::new();
    for u in levels {
        let g = finite_gradient(u);
        let mu = u.domain.cell_measures();
        let ints: Vec<f64> = sigmas
            .iter()
            .map(|&p| g.values.iter().zip(&mu).map(|(v, m)| v.abs().powf(p) * m).sum::<f64>())
            .collect();
        norms.push(sigmas.iter().map(|&p| lp_norm_values(&g.values, &mu, p)).collect());
        integrals.push(ints);
    }
    let k = integrals.len();
    let growth: Vec<f64> = (0..sigmas.len())
        .map(|j| integrals[k - 1][j] / integrals[k - 2][j])
        .collect();
    let first_bad = growth.iter().position(|&g| !(g < 1.25));
    let threshold = match first_bad {
        None => None,
        Some(0) => Some(sigmas[0]),
        Some(j) => Some(sigmas[j - 1]),
    };
    Ok(RegularityReport {
        sigmas: sigmas.to_vec(),
        grid_n: levels.iter().map(|u| u.domain.grid_n).collect(),
        norms,
        growth,
        threshold,
        predicted_cap,
        ratio: threshold.map(|t| t / predicted_cap),
    })
}

/// Weak and strong `L^p` norms of `∇u` across refinement levels.
pub fn marcinkiewicz_probe(levels: &[GridFunction], p: f64) -> (Vec<f64>, Vec<f64>) {
    levels
        .iter()
        .map(|u| {
            let g = finite_gradient(u);
            let mu = u.domain.cell_measures();
            (weak_lp_values(&g.values, &mu, p), lp_norm_values(&g.values, &mu, p))
        })
        .unzip()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapReport {
    pub sequence: Vec<f64>,
    pub threshold: f64,
    pub exited: bool,
    pub increasing: bool,
    pub steps: usize,
}

/// `r_{n+1} = Nσr_n/(Nσ - r_n(σ(2s-1) - N))` until `r_n ≥ σN/((2s-1)σ - N)`.
pub fn exponent_bootstrap(dim: usize, sigma: f64, s: f64, r1: f64, steps: usize) -> Result<BootstrapReport> {
    let n = dim as f64;
    let a = 2.0 * s - 1.0;
    if !(s > 0.5 && s < 1.0) {
        return Err(invalid(format!("s = {s} must lie in (1/2, 1)")));
    }
    if !(sigma > n / a) {
        return Err(invalid(format!("σ = {sigma} must exceed N/(2s-1) = {}", n / a)));
    }
    let p_star = n / (n - 2.0 * s + 1.0);
    if !(r1 > 1.0 && r1 < p_star) {
        return Err(invalid(format!("r1 = {r1} must lie in (1, p_*) = (1, {p_star})")));
    }
    let threshold = sigma * n / (a * sigma - n);
    let mut sequence = vec![r1];
    let mut exited = r1 >= threshold;
    while !exited && sequence.len() < steps.max(1) {
        let r = *sequence.last().unwrap();
        let den = n * sigma - r * (sigma * a - n);
        if den <= 0.0 {
            exited = true;
            break;
        }
        let next = n * sigma * r / den;
        sequence.push(next);
        exited = next >= threshold;
    }
    let increasing = sequence.windows(2).all(|w| w[1] > w[0]);
    Ok(BootstrapReport {
        steps: sequence.len(),
        sequence,
        threshold,
        exited,
        increasing,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetaProbe {
    pub beta: f64,
    pub grid_n: Vec<usize>,
    /// Squared seminorms `[ρ^β]²_{H^s}` per level.
    pub seminorms_sq: Vec<f64>,
    /// Ratio of the last two increments; below 1 the sequence converges geometrically.
    pub increment_ratio: f64,
    pub stable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingularWeightReport {
    pub alpha: f64,
    pub regularizations: Vec<f64>,
    pub sup_norms: Vec<f64>,
    /// `‖ρ_n‖_∞` over the last decade of `n`.
    pub saturation_ratio: f64,
    pub saturated: bool,
    pub monotone: bool,
    /// Sufficient exponent `max{s/(2s-α), 1}`.
    pub beta_sufficient: f64,
    /// `(s-1/2)/(2s-α)`: `ρ ~ d^{2s-α}` puts `ρ^β` in `H^s` exactly above it.
    pub beta_sharp: f64,
    pub sufficient_probes: Vec<BetaProbe>,
    pub sharp_probes: Vec<BetaProbe>,
    /// Stable above and growing below the sharp threshold.
    pub two_sided: bool,
}

/// Regularizations `n` used by the study.
pub const SINGULAR_LADDER: [f64; 4] = [10.0, 100.0, 1000.0, 10000.0];

fn regularized_weight(domain: &DomainSpec, s: f64, alpha: f64, n: f64) -> Result<GridFunction> {
    let data = GridFunction::from_fn(*domain, |x| {
        1.0 / (domain.distance_to_boundary(x).powf(alpha) + 1.0 / n)
    });
    FracLapMatrix::assemble(domain, s)?.solve(&data)
}

fn beta_probe(levels: &[GridFunction], s: f64, beta: f64) -> BetaProbe {
    let seminorms_sq: Vec<f64> = levels
        .iter()
        .map(|rho| {
            let a = gagliardo_form(&rho.domain, s);
            let v = nalgebra::DVector::from_iterator(rho.len(), rho.values.iter().map(|x| x.max(0.0).powf(beta)));
            v.dot(&(&a * &v))
        })
        .collect();
    let k = seminorms_sq.len();
    let (d1, d2) = (
        seminorms_sq[k - 2] - seminorms_sq[k - 3],
        seminorms_sq[k - 1] - seminorms_sq[k - 2],
    );
    let increment_ratio = if d1 == 0.0 { 0.0 } else { d2 / d1 };
    BetaProbe {
        beta,
        grid_n: levels.iter().map(|r| r.domain.grid_n).collect(),
        seminorms_sq,
        increment_ratio,
        stable: increment_ratio.abs() < 1.0,
    }
}

/// `(-Δ)^s ρ_n = 1/(d^α + 1/n)` over the regularization ladder, on the grid of `params`
/// and two coarser grids for the seminorm probes.
pub fn singular_weight_study(alpha: f64, params: &ProblemParams) -> Result<SingularWeightReport> {
    let s = params.s;
    if !(alpha > 1.0 && alpha < 2.0 * s) {
        return Err(invalid(format!("α = {alpha} must lie in (1, 2s)")));
    }
    let d = params.domain;
    if d.grid_n < 17 {
        return Err(invalid("singular-weight study needs grid_n >= 17"));
    }
    let mut sup_norms = Vec::new();
    let mut prev: Option<GridFunction> = None;
    let mut monotone = true;
    let mut finest = None;
    for &n in &SINGULAR_LADDER {
        let rho = regularized_weight(&d, s, alpha, n)?;
        if let Some(p) = &prev {
            let tol = 1e-10 * rho.sup_norm();
            if rho.values.iter().zip(&p.values).any(|(a, b)| a < &(b - tol)) {
                monotone = false;
            }
        }
        sup_norms.push(rho.sup_norm());
        prev = Some(rho.clone());
        finest = Some(rho);
    }
    let k = sup_norms.len();
    let saturation_ratio = sup_norms[k - 1] / sup_norms[k - 2];
    let n_max = SINGULAR_LADDER[SINGULAR_LADDER.len() - 1];
    let mid = d.with_grid((d.grid_n - 1) / 2 + 1);
    let coarse = d.with_grid((d.grid_n - 1) / 4 + 1);
    let levels = vec![
        regularized_weight(&coarse, s, alpha, n_max)?,
        regularized_weight(&mid, s, alpha, n_max)?,
        finest.expect("ladder is nonempty"),
    ];
    let beta_sufficient = (s / (2.0 * s - alpha)).max(1.0);
    let beta_sharp = (s - 0.5) / (2.0 * s - alpha);
    let sufficient_probes = vec![
        beta_probe(&levels, s, 1.5 * beta_sufficient),
        beta_probe(&levels, s, 0.5 * beta_sufficient),
    ];
    let sharp_probes = vec![
        beta_probe(&levels, s, 1.5 * beta_sharp),
        beta_probe(&levels, s, 0.5 * beta_sharp),
    ];
    let two_sided = sharp_probes[0].stable && !sharp_probes[1].stable;
    Ok(SingularWeightReport {
        alpha,
        regularizations: SINGULAR_LADDER.to_vec(),
        sup_norms,
        saturation_ratio,
        saturated: saturation_ratio <= 2.0,
        monotone,
        beta_sufficient,
        beta_sharp,
        sufficient_probes,
        sharp_probes,
        two_sided,
    })
}

/// Interval or ball of the same size as `domain`, for scaling checks.
pub fn scaled_domain(domain: &DomainSpec, factor: f64) -> Result<DomainSpec> {
    match domain.kind {
        DomainKind::Interval { a, b } => DomainSpec::interval(factor * a, factor * b, domain.grid_n),
        DomainKind::Ball { radius, dim } => DomainSpec::ball(factor * radius, dim, domain.grid_n),
    }
}
