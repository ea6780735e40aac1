use frackpz_core::diagnostics::{comparison_check, ComparisonSide, ComparisonVerdict};
use frackpz_core::operators::FracLapMatrix;
use frackpz_core::solvers::{
    c0_probes, lambda_star_closed_form, measure_c0_with, monotone_iteration, picard_potential, schauder_exponent,
    schauder_radius, schauder_with_solver, LinearBackend, LinearSolver, SolveStatus, SolverOptions,
};
use frackpz_core::supersolutions::{optimal_candidate, verify_candidate, RadialBumpSpec, Supersolution, Verdict};
use frackpz_core::{finite_gradient, DomainSpec, GridFunction, ProblemParams, SourceSpec};

fn ball(n: usize) -> DomainSpec {
    DomainSpec::ball(1.0, 2, n).unwrap()
}

#[test]
fn monotone_solution_lies_below_barrier_and_satisfies_comparison() {
    let d = ball(96);
    let base = ProblemParams::new(0.75, 1.4, 0.0, f64::INFINITY, d).unwrap();
    let f = SourceSpec::Constant { value: 1.0 };
    let op = FracLapMatrix::for_params(&base).unwrap();
    let unit = Supersolution::Bump(RadialBumpSpec::covering(2, 0.75, 1.25, 1.0, 1.0).unwrap());
    let (cand, lam_adm) = optimal_candidate(&op, &unit, &base, &f).unwrap();
    let params = base.with_lambda(0.5 * lam_adm);
    let check = verify_candidate(&op, &cand, &params, &f).unwrap();
    assert_eq!(check.verdict, Verdict::Supersolution);
    let sampled = cand.sample(&op).unwrap();
    let r = monotone_iteration(&params, &f, Some(&sampled.grid), &SolverOptions::default()).unwrap();
    assert_eq!(r.status, SolveStatus::Converged);
    assert!(r.monotone_flag);
    assert_eq!(r.bounded_by_supersolution, Some(true));

    let u = &r.solution;
    let q = params.q;
    let (gu, gw) = (finite_gradient(u), finite_gradient(&sampled.grid));
    let lip = GridFunction::new(
        d,
        gu.values
            .iter()
            .zip(&gw.values)
            .map(|(a, b)| q * a.max(*b).powf(q - 1.0))
            .collect(),
    )
    .unwrap();
    let g = f.on_grid(&d).scale(params.lambda);
    let ext = |t: f64| (sampled.exterior)(t);
    let w2 = ComparisonSide {
        w: &sampled.grid,
        exterior: Some(&ext),
        excluded: &check.excluded,
    };
    let tol = 1e-6 * sampled.grid.sup_norm();
    let c = comparison_check(
        &op,
        &ComparisonSide::zero_exterior(u),
        &w2,
        &|x| x.abs().powf(q),
        &lip,
        &g,
        tol,
    )
    .unwrap();
    assert_eq!(c.verdict, ComparisonVerdict::Holds, "{:?}", c.failed_hypotheses);
}

#[test]
fn monotone_reports_nonconvergence_for_large_lambda() {
    let p = ProblemParams::new(0.75, 1.4, 100.0, f64::INFINITY, ball(48)).unwrap();
    let r = monotone_iteration(
        &p,
        &SourceSpec::Constant { value: 1.0 },
        None,
        &SolverOptions::default(),
    )
    .unwrap();
    assert!(!r.converged);
    assert_eq!(r.status, SolveStatus::NonConvergent);
}

#[test]
fn dense_and_green_backends_agree() {
    let p = ProblemParams::new(0.75, 1.3, 0.02, f64::INFINITY, ball(64)).unwrap();
    let f = SourceSpec::Constant { value: 1.0 };
    let a = monotone_iteration(&p, &f, None, &SolverOptions::default()).unwrap();
    let opts = SolverOptions {
        backend: LinearBackend::Green,
        ..SolverOptions::default()
    };
    let b = monotone_iteration(&p, &f, None, &opts).unwrap();
    assert!(a.converged && b.converged);
    let scale = a.solution.sup_norm();
    for (x, y) in a.solution.values.iter().zip(&b.solution.values) {
        assert!((x - y).abs() < 5e-2 * scale);
    }
}

#[test]
fn picard_limit_dominates_the_dirichlet_solution() {
    // The whole-space limit carries no exterior condition, so it bounds the bounded-domain solution.
    let d = ball(64);
    let p = ProblemParams::new(0.75, 1.4, 2e-3, f64::INFINITY, d).unwrap();
    let f = SourceSpec::Indicator { radius: 0.5 };
    let pic = picard_potential(&p, &f, 36.0, &SolverOptions::default()).unwrap();
    let mono = monotone_iteration(&p, &f, None, &SolverOptions::default()).unwrap();
    assert!(pic.converged && mono.converged);
    for i in d.interior() {
        let x = d.node(i);
        assert!(
            mono.solution.values[i] <= pic.solution.evaluate(x) * (1.0 + 1e-6),
            "r = {x}"
        );
    }
}

#[test]
fn schauder_below_lambda_star_stays_in_the_invariant_set() {
    let p = ProblemParams::new(0.75, 1.5, 0.0, 4.0, ball(64)).unwrap();
    let f = SourceSpec::Constant { value: 1.0 };
    let (e, q_eff) = schauder_exponent(&p).unwrap();
    assert!((q_eff - 1.5).abs() < 1e-12);
    let solver = LinearSolver::for_params(&p, LinearBackend::Dense).unwrap();
    let c0 = measure_c0_with(&solver, p.m, q_eff, &c0_probes(&p.domain, p.m, 7, 4))
        .unwrap()
        .c0;
    let norm_f = f.lm_norm(&p.domain, p.m).unwrap();
    let (_, lambda_star) = lambda_star_closed_form(e, c0, norm_f).unwrap();
    let lambda = 0.5 * lambda_star;
    let l = schauder_radius(e, c0, norm_f, lambda).unwrap().unwrap();
    let r = schauder_with_solver(
        &solver,
        &p.with_lambda(lambda),
        &f,
        l,
        lambda,
        &SolverOptions::default(),
    )
    .unwrap();
    assert!(r.converged);
    assert_eq!(r.invariant_ok, Some(true));
    // u ↦ |∇u|^q is not order preserving, so iterates from 0 may overshoot slightly.
    assert!(r.minimality_flag.is_some());
    assert!(r.final_residual.linf < 1e-6 * r.solution.sup_norm().max(1.0));
}

#[test]
fn reports_serialize() {
    let p = ProblemParams::new(0.75, 1.3, 0.01, f64::INFINITY, ball(32)).unwrap();
    let r = monotone_iteration(
        &p,
        &SourceSpec::Constant { value: 1.0 },
        None,
        &SolverOptions::default(),
    )
    .unwrap();
    let json = serde_json::to_string(&r).unwrap();
    assert!(json.contains("\"status\":\"CONVERGED\""));
}
