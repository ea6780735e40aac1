//! Explicit radial supersolutions and the pointwise supersolution check.
//!
//! Two families are available: the bump `C(1-(|x|/ρ)^α)₊` with `1 < α < 2s`, and the
//! power `A|x-x₀|^{-α}` with `α = (2s-q)/(q-1)`. On radial grids the translated power
//! is represented by its average over rotations, which is again a supersolution: the
//! operator commutes with rotations and `|∇·|^q` is convex.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::grid::{finite_gradient, DomainSpec, GridFunction};
use crate::io::format_f64;
use crate::operators::{reduced_weight, FracLapMatrix};
use crate::params::{exponents_for, ProblemParams};
use crate::quad::{gauss_legendre, integrate_graded};
use crate::source::SourceSpec;
use crate::special::{power_coefficient, sphere_area};
use crate::sphere::angular_power;

const ORDER: usize = 10;

/// `α = (2s-q)/(q-1)`, the only power with `|∇S|^q` and `(-Δ)^s S` of equal homogeneity.
pub fn power_alpha(s: f64, q: f64) -> Result<f64> {
    if !(q > 1.0) {
        return Err(invalid(format!("q = {q} must exceed 1")));
    }
    if q >= 2.0 * s {
        return Err(invalid(format!(
            "no power supersolution for q = {q} >= 2s = {}",
            2.0 * s
        )));
    }
    Ok((2.0 * s - q) / (q - 1.0))
}

/// `C_{N,s}(α)` with `(-Δ)^s |x|^{-α} = C_{N,s}(α)|x|^{-α-2s}`, for `0 < α < N-2s`.
pub fn power_eigenvalue(dim: usize, s: f64, alpha: f64) -> Result<f64> {
    power_coefficient(dim, s, alpha)
}

/// Quadrature estimate of `C_{N,s}(α)` from the radial matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenCheck {
    /// Mean of `(-Δ)^s(|x|^{-α})·|x|^{α+2s}` over the probe nodes.
    pub coefficient: f64,
    pub min_ratio: f64,
    pub max_ratio: f64,
    /// Closed-form value.
    pub closed_form: f64,
    pub grid_n: usize,
}

impl EigenCheck {
    /// Largest relative deviation of a nodal ratio from the closed form.
    pub fn deviation(&self) -> f64 {
        ((self.min_ratio / self.closed_form - 1.0).abs()).max((self.max_ratio / self.closed_form - 1.0).abs())
    }

    /// Relative spread of the nodal ratios around their mean.
    pub fn spread(&self) -> f64 {
        (self.max_ratio - self.min_ratio) / self.coefficient
    }
}

/// Applies the radial matrix on the unit ball to `|x|^{-α}` continued outside, and reads
/// off the ratio on nodes with `0.25 ≤ r ≤ 0.75`. The origin node holds the cell average.
pub fn power_eigenvalue_numeric(dim: usize, s: f64, alpha: f64, grid_n: usize) -> Result<EigenCheck> {
    let closed_form = power_eigenvalue(dim, s, alpha)?;
    let d = DomainSpec::ball(1.0, dim, grid_n)?;
    let op = FracLapMatrix::assemble(&d, s)?;
    let nd = dim as f64;
    let h = d.h();
    let u = GridFunction::from_fn_closed(d, |r| {
        if r == 0.0 {
            nd / (nd - alpha) * (0.5 * h).powf(-alpha)
        } else {
            r.powf(-alpha)
        }
    });
    let v = op.apply_with_exterior(&u, &|t| t.powf(-alpha))?;
    let ratios: Vec<f64> = d
        .interior()
        .filter(|&i| (0.25..=0.75).contains(&d.node(i)))
        .map(|i| v.values[i] * d.node(i).powf(alpha + 2.0 * s))
        .collect();
    if ratios.is_empty() {
        return Err(invalid("grid too coarse for the eigenvalue probe"));
    }
    Ok(EigenCheck {
        coefficient: ratios.iter().sum::<f64>() / ratios.len() as f64,
        min_ratio: ratios.iter().copied().fold(f64::INFINITY, f64::min),
        max_ratio: ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        closed_form,
        grid_n,
    })
}

/// `A_max = (C_{N,s}(α)/α^q)^{1/(q-1)}`; requires `p_* < q < 2s`.
pub fn power_amplitude_max(dim: usize, s: f64, q: f64) -> Result<f64> {
    let p_star = exponents_for(dim, s, q, f64::INFINITY).p_star;
    if !(q > p_star) {
        return Err(invalid(format!(
            "power supersolution needs q > p_* = {p_star}, got {q}"
        )));
    }
    let alpha = power_alpha(s, q)?;
    let c = power_eigenvalue(dim, s, alpha)?;
    Ok((c / alpha.powf(q)).powf(1.0 / (q - 1.0)))
}

/// `A|x-x₀|^{-α}`, averaged over rotations when `shift = |x₀| > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerSupersolSpec {
    pub dim: usize,
    pub s: f64,
    pub q: f64,
    pub alpha: f64,
    pub amplitude: f64,
    pub eigen: f64,
    pub shift: f64,
    /// `α^q A^{q-1} ≤ C_{N,s}(α)`.
    pub admissible: bool,
}

impl PowerSupersolSpec {
    pub fn new(dim: usize, s: f64, q: f64, amplitude: f64, shift: f64) -> Result<Self> {
        if !(amplitude > 0.0) {
            return Err(invalid("power amplitude must be > 0"));
        }
        if !(shift >= 0.0) || !shift.is_finite() {
            return Err(invalid("shift must be a finite distance >= 0"));
        }
        let a_max = power_amplitude_max(dim, s, q)?;
        let alpha = power_alpha(s, q)?;
        Ok(PowerSupersolSpec {
            dim,
            s,
            q,
            alpha,
            amplitude,
            eigen: power_eigenvalue(dim, s, alpha)?,
            shift,
            admissible: amplitude <= a_max,
        })
    }

    /// Amplitude maximizing the admissible forcing, `A_max q^{-1/(q-1)}`.
    pub fn optimal(dim: usize, s: f64, q: f64, shift: f64) -> Result<Self> {
        let a = power_amplitude_max(dim, s, q)? * q.powf(-1.0 / (q - 1.0));
        Self::new(dim, s, q, a, shift)
    }

    fn mean_power(&self, r: f64, p: f64) -> f64 {
        if self.shift == 0.0 {
            r.powf(-p)
        } else {
            angular_power(self.dim, r, self.shift, p, 0.0) / sphere_area(self.dim)
        }
    }

    /// Profile value at radius `r`.
    pub fn value(&self, r: f64) -> f64 {
        self.amplitude * self.mean_power(r, self.alpha)
    }

    /// Exact `(-Δ)^s` at radius `r`.
    pub fn fraclap_exact(&self, r: f64) -> f64 {
        self.amplitude * self.eigen * self.mean_power(r, self.alpha + 2.0 * self.s)
    }

    /// Largest `λ` for which the continuous inequality holds on `B_R` with `f ≤ f_sup`.
    ///
    /// Pointwise `(-Δ)^s S - |∇S|^q = (AC - (Aα)^q)|x-x₀|^{-α-2s}` since `α+2s = q(α+1)`,
    /// and `|x-x₀| ≤ |x₀| + R`. For the rotational average Jensen gives the same bound.
    pub fn lambda_admissible(&self, radius: f64, f_sup: f64) -> f64 {
        let gap = self.amplitude * self.eigen - (self.amplitude * self.alpha).powf(self.q);
        if gap <= 0.0 {
            return 0.0;
        }
        if f_sup <= 0.0 {
            return f64::INFINITY;
        }
        gap / (f_sup * (self.shift + radius).powf(self.alpha + 2.0 * self.s))
    }
}

/// `(σ₀, r₀)` of the bump construction; requires `1 < α < 2s` and `N > 2s`.
pub fn bump_thresholds(dim: usize, s: f64, alpha: f64) -> Result<(f64, f64)> {
    let nd = dim as f64;
    let two_s = 2.0 * s;
    if nd <= two_s {
        return Err(invalid(format!(
            "the bump construction needs N > 2s, got N = {dim}, 2s = {two_s}"
        )));
    }
    if !(alpha > 1.0 && alpha < two_s) {
        return Err(invalid(format!("bump exponent alpha = {alpha} must lie in (1, 2s)")));
    }
    let sigma0 = ((nd + alpha - two_s) / (nd - two_s)).powf(1.0 / alpha);
    let top = nd + alpha - two_s;
    let r0 = (top / (top + sigma0.powf(two_s - nd))).powf(1.0 / alpha);
    Ok((sigma0, r0))
}

/// `C(1-(|x|/ρ)^α)₊`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialBumpSpec {
    pub dim: usize,
    pub s: f64,
    pub alpha: f64,
    pub amplitude: f64,
    pub support_radius: f64,
    pub sigma0: f64,
    pub r0: f64,
}

impl RadialBumpSpec {
    pub fn new(dim: usize, s: f64, alpha: f64, amplitude: f64, support_radius: f64) -> Result<Self> {
        if !(amplitude > 0.0 && support_radius > 0.0) {
            return Err(invalid("bump amplitude and support radius must be > 0"));
        }
        let (sigma0, r0) = bump_thresholds(dim, s, alpha)?;
        Ok(RadialBumpSpec {
            dim,
            s,
            alpha,
            amplitude,
            support_radius,
            sigma0,
            r0,
        })
    }

    /// Bump whose proven region `|x| < r₀ρ` is exactly `B_R`.
    pub fn covering(dim: usize, s: f64, alpha: f64, amplitude: f64, radius: f64) -> Result<Self> {
        let (_, r0) = bump_thresholds(dim, s, alpha)?;
        Self::new(dim, s, alpha, amplitude, radius / r0)
    }

    pub fn value(&self, r: f64) -> f64 {
        let x = r.abs() / self.support_radius;
        if x >= 1.0 {
            0.0
        } else {
            self.amplitude * (1.0 - x.powf(self.alpha))
        }
    }

    /// `(-Δ)^s` at radius `r < ρ` from the σ-integrals: `Cρ^{-2s} x^{α-2s} F(x)`, `x = r/ρ`.
    pub fn fraclap_exact(&self, r: f64) -> Result<f64> {
        let x = r.abs() / self.support_radius;
        let f = bump_f_value(self.dim, self.s, self.alpha, x)?;
        Ok(self.amplitude * self.support_radius.powf(-2.0 * self.s) * x.powf(self.alpha - 2.0 * self.s) * f)
    }
}

/// `∫_a^b g(σ) σ(σ²-1)^{-1-2s}H(σ) dσ` with `g` given in `ε = σ - 1`; `b = ∞` allowed.
fn sigma_integral(dim: usize, s: f64, a: f64, b: f64, g: &dyn Fn(f64) -> f64) -> Result<f64> {
    let mut err = None;
    let mut w = |e: f64| -> f64 {
        match reduced_weight(dim, s, e) {
            Ok(v) => v,
            Err(x) => {
                err = Some(x);
                0.0
            }
        }
    };
    let mut acc = 0.0;
    let mut lo = a - 1.0;
    let top = b - 1.0;
    if lo == 0.0 {
        // g = O(ε²) and the weight O(ε^{-1-2s}); ε = e_c v^{1/(2-2s)} flattens the product.
        let e_c = top.min(1.0);
        let expo = 1.0 / (2.0 - 2.0 * s);
        acc += integrate_graded(0.0, 1.0, 1e-6, ORDER, |v| {
            if v <= 0.0 {
                return 0.0;
            }
            let e = e_c * v.powf(expo);
            g(e) * w(e) * expo * e / v
        });
        lo = e_c;
    } else {
        // Steep weight at the lower end when it is close to σ = 1.
        let hi = (2.0 * (1.0 + lo) - 1.0).min(top);
        acc += integrate_graded(lo, hi, 1e-6 * lo, ORDER, |e| g(e) * w(e));
        lo = hi;
    }
    if top.is_finite() {
        // ln σ panels of width ≤ 1/2 up to b.
        let (t0, t1) = ((1.0 + lo).ln(), (1.0 + top).ln());
        let panels = ((t1 - t0) / 0.5).ceil().max(0.0) as usize;
        let rule = gauss_legendre(ORDER);
        for k in 0..panels {
            let (pa, pb) = (
                t0 + (t1 - t0) * k as f64 / panels as f64,
                t0 + (t1 - t0) * (k + 1) as f64 / panels as f64,
            );
            acc += rule.integrate(pa, pb, |t| {
                let sigma = t.exp();
                g(sigma - 1.0) * w(sigma - 1.0) * sigma
            });
        }
    } else {
        // σ = σ_lo / v.
        let s_lo = 1.0 + lo;
        acc += integrate_graded(0.0, 1.0, 1e-10, ORDER, |v| {
            if v <= 0.0 {
                return 0.0;
            }
            let sigma = s_lo / v;
            g(sigma - 1.0) * w(sigma - 1.0) * s_lo / (v * v)
        });
    }
    match err {
        Some(e) => Err(e),
        None if acc.is_finite() => Ok(acc),
        None => Err(Error::Quadrature("σ-integral is not finite".into())),
    }
}

/// `F(r)` with `(-Δ)^s(1-|x|^α)₊ = r^{α-2s}F(r)` for `0 ≤ r < 1`.
pub fn bump_f_value(dim: usize, s: f64, alpha: f64, r: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&r) {
        return Err(invalid(format!("F(r) is evaluated for 0 <= r < 1, got {r}")));
    }
    let nd = dim as f64;
    let two_s = 2.0 * s;
    let inner = move |e: f64| {
        let l = e.ln_1p();
        (alpha * l).exp_m1() * -((two_s - nd - alpha) * l).exp_m1()
    };
    if r == 0.0 {
        return sigma_integral(dim, s, 1.0, f64::INFINITY, &inner);
    }
    let cut = 1.0 / r;
    let first = sigma_integral(dim, s, 1.0, cut, &inner)?;
    let lead = r.powf(-alpha) - 1.0;
    let outer = move |e: f64| {
        let sigma = 1.0 + e;
        lead + (-alpha * e.ln_1p()).exp_m1() * sigma.powf(two_s - nd)
    };
    Ok(first + sigma_integral(dim, s, cut, f64::INFINITY, &outer)?)
}

/// `F` sampled on a set of radii, with the properties the construction relies on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BumpProfile {
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
    pub sigma0: f64,
    pub r0: f64,
    pub min_value: f64,
    pub value_at_r0: f64,
    /// `F` strictly decreasing along the sampled radii.
    pub decreasing: bool,
}

/// `F` on `radii` (sorted, within `[0, r₀]`) plus `F(r₀)`.
pub fn bump_f_profile(dim: usize, s: f64, alpha: f64, radii: &[f64]) -> Result<BumpProfile> {
    let (sigma0, r0) = bump_thresholds(dim, s, alpha)?;
    if radii.iter().any(|&r| !(0.0..=r0 * (1.0 + 1e-12)).contains(&r)) {
        return Err(invalid(format!("F profile radii must lie in [0, r0 = {r0}]")));
    }
    if radii.windows(2).any(|w| w[0] >= w[1]) {
        return Err(invalid("F profile radii must increase"));
    }
    use rayon::prelude::*;
    let values = radii
        .par_iter()
        .map(|&r| bump_f_value(dim, s, alpha, r))
        .collect::<Result<Vec<f64>>>()?;
    let value_at_r0 = bump_f_value(dim, s, alpha, r0)?;
    Ok(BumpProfile {
        min_value: values.iter().copied().fold(value_at_r0, f64::min),
        decreasing: values.windows(2).all(|w| w[1] < w[0]),
        radii: radii.to_vec(),
        values,
        sigma0,
        r0,
        value_at_r0,
    })
}

/// Candidate barriers for the monotone scheme.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Supersolution {
    Bump(RadialBumpSpec),
    Power(PowerSupersolSpec),
    /// `c·ρ` with `(-Δ)^s ρ = 1` in Ω: the discrete torsion function.
    Torsion {
        amplitude: f64,
    },
}

/// A candidate sampled on a grid, with its values outside the domain.
pub struct SampledCandidate {
    pub grid: GridFunction,
    pub exterior: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    /// Radii near which the profile is singular or kinked.
    pub excluded_radii: Vec<f64>,
}

impl Supersolution {
    pub fn sample(&self, op: &FracLapMatrix) -> Result<SampledCandidate> {
        let d = op.domain;
        let radial = d.is_radial();
        match *self {
            Supersolution::Bump(b) => {
                if !radial || d.dim() != b.dim {
                    return Err(Error::Unsupported(
                        "bump candidates need a ball grid of matching dimension".into(),
                    ));
                }
                Ok(SampledCandidate {
                    grid: GridFunction::from_fn_closed(d, move |r| b.value(r)),
                    exterior: Box::new(move |t| b.value(t)),
                    excluded_radii: vec![0.0, b.support_radius],
                })
            }
            Supersolution::Power(p) => {
                if !radial || d.dim() != p.dim {
                    return Err(Error::Unsupported(
                        "power candidates need a ball grid of matching dimension".into(),
                    ));
                }
                let h = d.h();
                let nd = p.dim as f64;
                let grid = GridFunction::from_fn_closed(d, move |r| {
                    if r == 0.0 && p.shift == 0.0 {
                        p.amplitude * nd / (nd - p.alpha) * (0.5 * h).powf(-p.alpha)
                    } else {
                        p.value(r)
                    }
                });
                let excluded_radii = if p.shift == 0.0 { vec![0.0] } else { vec![] };
                Ok(SampledCandidate {
                    grid,
                    exterior: Box::new(move |t| p.value(t)),
                    excluded_radii,
                })
            }
            Supersolution::Torsion { amplitude } => {
                let ones = GridFunction::from_fn(d, |_| 1.0);
                Ok(SampledCandidate {
                    grid: op.solve(&ones)?.scale(amplitude),
                    exterior: Box::new(|_| 0.0),
                    excluded_radii: vec![],
                })
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Supersolution,
    Fail,
}

/// Pointwise residual `(-Δ)^s w - |∇w|^q - λf` and the verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupersolutionCheck {
    pub verdict: Verdict,
    pub tol_super: f64,
    pub fraclap: GridFunction,
    pub gradterm: GridFunction,
    pub forcing: GridFunction,
    pub residual: GridFunction,
    pub lambda: f64,
    /// Nodes left out of the verdict (within `2h` of an excluded radius).
    pub excluded: Vec<usize>,
    pub worst_node: usize,
    pub worst_residual: f64,
    /// Smallest residual over the excluded nodes, reported separately.
    #[serde(with = "crate::io::extended_f64")]
    pub excluded_min: f64,
    pub w: GridFunction,
}

impl SupersolutionCheck {
    fn counted(&self) -> impl Iterator<Item = usize> + '_ {
        self.w.domain.interior().filter(move |i| !self.excluded.contains(i))
    }

    /// Largest `λ` keeping the residual nonnegative on the counted nodes.
    ///
    /// The residual is affine in `λ`, so this is what bisection on the verdict converges to.
    pub fn lambda_admissible(&self) -> f64 {
        let mut best = f64::INFINITY;
        for i in self.counted() {
            let f = self.forcing.values[i];
            if f > 0.0 {
                best = best.min((self.fraclap.values[i] - self.gradterm.values[i]) / f);
            }
        }
        best.max(0.0)
    }

    /// Columns `x, w, fraclap, gradterm, residual`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,w,fraclap,gradterm,residual\n");
        let d = &self.w.domain;
        for i in d.interior() {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                format_f64(d.node(i)),
                format_f64(self.w.values[i]),
                format_f64(self.fraclap.values[i]),
                format_f64(self.gradterm.values[i]),
                format_f64(self.residual.values[i])
            );
        }
        out
    }
}

/// Supersolution check for `w` with zero exterior data.
pub fn verify_supersolution(w: &GridFunction, params: &ProblemParams, f: &SourceSpec) -> Result<SupersolutionCheck> {
    let op = FracLapMatrix::assemble(&w.domain, params.s)?;
    verify_with_operator(&op, w, None, params, f, &[])
}

/// Supersolution check for a sampled candidate on the operator's grid.
pub fn verify_candidate(
    op: &FracLapMatrix,
    candidate: &Supersolution,
    params: &ProblemParams,
    f: &SourceSpec,
) -> Result<SupersolutionCheck> {
    let c = candidate.sample(op)?;
    verify_with_operator(op, &c.grid, Some(&*c.exterior), params, f, &c.excluded_radii)
}

/// Residual scan of `w` (values on the closed domain, `exterior` outside).
pub fn verify_with_operator(
    op: &FracLapMatrix,
    w: &GridFunction,
    exterior: Option<&dyn Fn(f64) -> f64>,
    params: &ProblemParams,
    f: &SourceSpec,
    excluded_radii: &[f64],
) -> Result<SupersolutionCheck> {
    w.check_same_grid(&GridFunction::zeros(op.domain))?;
    if w.values.iter().any(|&v| v < 0.0) {
        return Err(invalid("supersolution candidates must be nonnegative"));
    }
    let d = op.domain;
    let fraclap = match exterior {
        Some(ext) if d.is_radial() => op.apply_with_exterior(w, ext)?,
        Some(_) => return Err(Error::Unsupported("nonzero exterior data needs a ball grid".into())),
        None => op.apply(w)?,
    };
    let gradterm = finite_gradient(w).map(|g| g.powf(params.q)).with_zero_boundary();
    let forcing = f.on_grid(&d);
    let residual = GridFunction {
        domain: d,
        values: (0..d.grid_n)
            .map(|i| {
                if d.is_boundary(i) {
                    0.0
                } else {
                    fraclap.values[i] - gradterm.values[i] - params.lambda * forcing.values[i]
                }
            })
            .collect(),
    };
    let h = d.h();
    let excluded: Vec<usize> = d
        .interior()
        .filter(|&i| {
            excluded_radii
                .iter()
                .any(|&r| (d.node(i).abs() - r).abs() <= 2.0 * h * (1.0 + 1e-12))
        })
        .collect();
    let scale = d.interior().fold(0.0f64, |m, i| m.max(fraclap.values[i].abs()));
    let tol_super = 1e-6 * scale;
    let mut worst_node = d.interior().start;
    let mut worst_residual = f64::INFINITY;
    let mut excluded_min = f64::INFINITY;
    for i in d.interior() {
        let r = residual.values[i];
        if excluded.contains(&i) {
            excluded_min = excluded_min.min(r);
        } else if r < worst_residual {
            worst_residual = r;
            worst_node = i;
        }
    }
    let verdict = if worst_residual >= -tol_super {
        Verdict::Supersolution
    } else {
        Verdict::Fail
    };
    Ok(SupersolutionCheck {
        verdict,
        tol_super,
        fraclap,
        gradterm,
        forcing,
        residual,
        lambda: params.lambda,
        excluded,
        worst_node,
        worst_residual,
        excluded_min,
        w: w.clone(),
    })
}

/// `λ(C) = min_i (C·L_i - C^q G_i)/f_i` for the candidate scaled by `C`, maximized by golden
/// section. `λ(C)` is concave, so the search is exact up to its tolerance.
fn golden_amplitude(
    op: &FracLapMatrix,
    unit: &Supersolution,
    params: &ProblemParams,
    f: &SourceSpec,
) -> Result<(f64, f64)> {
    let check = verify_candidate(op, unit, &params.with_lambda(0.0), f)?;
    let nodes: Vec<(f64, f64, f64)> = check
        .counted()
        .filter(|&i| check.forcing.values[i] > 0.0)
        .map(|i| {
            (
                check.fraclap.values[i],
                check.gradterm.values[i],
                check.forcing.values[i],
            )
        })
        .collect();
    if nodes.is_empty() {
        return Err(invalid("forcing vanishes on every counted node"));
    }
    let q = params.q;
    let lam = |c: f64| {
        nodes
            .iter()
            .fold(f64::INFINITY, |m, &(l, g, f)| m.min((c * l - c.powf(q) * g) / f))
    };
    let hi = nodes
        .iter()
        .filter(|n| n.1 > 0.0)
        .map(|&(l, g, _)| (l.max(0.0) / g).powf(1.0 / (q - 1.0)))
        .fold(f64::INFINITY, f64::min);
    if !hi.is_finite() || hi <= 0.0 {
        return Err(invalid("candidate has no admissible amplitude on this grid"));
    }
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (0.0, hi);
    let mut x1 = b - phi * (b - a);
    let mut x2 = a + phi * (b - a);
    let (mut f1, mut f2) = (lam(x1), lam(x2));
    while b - a > 1e-10 * hi {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = lam(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = lam(x1);
        }
    }
    let c = 0.5 * (a + b);
    Ok((c, lam(c).max(0.0)))
}

/// Amplitude of a covering bump maximizing the admissible `λ`. Returns `(C, λ_admissible(C))`.
pub fn optimal_bump_amplitude(
    op: &FracLapMatrix,
    alpha: f64,
    params: &ProblemParams,
    f: &SourceSpec,
) -> Result<(f64, f64)> {
    let radius = op
        .domain
        .radius()
        .ok_or_else(|| Error::Unsupported("bump candidates need a ball grid".into()))?;
    let unit = RadialBumpSpec::covering(params.dim, params.s, alpha, 1.0, radius)?;
    golden_amplitude(op, &Supersolution::Bump(unit), params, f)
}

/// Best member of the candidate's family and its discrete admissible `λ`.
///
/// Bumps and torsion profiles are rescaled by golden section; the power family keeps its
/// analytic amplitude, whose admissibility window is fixed by the eigenvalue.
pub fn optimal_candidate(
    op: &FracLapMatrix,
    candidate: &Supersolution,
    params: &ProblemParams,
    f: &SourceSpec,
) -> Result<(Supersolution, f64)> {
    match candidate {
        Supersolution::Power(_) => {
            let lam = verify_candidate(op, candidate, &params.with_lambda(0.0), f)?.lambda_admissible();
            Ok((candidate.clone(), lam.max(0.0)))
        }
        Supersolution::Bump(b) => {
            let unit = RadialBumpSpec::new(b.dim, b.s, b.alpha, 1.0, b.support_radius)?;
            let (c, lam) = golden_amplitude(op, &Supersolution::Bump(unit), params, f)?;
            Ok((
                Supersolution::Bump(RadialBumpSpec::new(b.dim, b.s, b.alpha, c, b.support_radius)?),
                lam,
            ))
        }
        Supersolution::Torsion { .. } => {
            let (c, lam) = golden_amplitude(op, &Supersolution::Torsion { amplitude: 1.0 }, params, f)?;
            Ok((Supersolution::Torsion { amplitude: c }, lam))
        }
    }
}
