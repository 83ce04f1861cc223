use approx::assert_abs_diff_eq;
use qthermo::correlated::{
    build_cc, build_initial_uc, build_qc, chi_interval, joint_verdict_with_tol, lambda_max,
    mutual_information, scenario_report, JointQubitState, ScenarioParams,
};
use qthermo::types::default_grid;
use qthermo::{second_law_scan, GibbsContext};

fn params() -> ScenarioParams {
    ScenarioParams::default()
}

fn admissible_chis() -> Vec<f64> {
    let (lo, hi) = chi_interval(&params());
    (1..40).map(|k| lo + (hi - lo) * k as f64 / 40.0).collect()
}

fn admissible_lambdas() -> Vec<f64> {
    let max = lambda_max(&params());
    (0..=100).map(|k| max * k as f64 / 100.0).collect()
}

fn finals() -> Vec<JointQubitState> {
    let p = params();
    admissible_chis()
        .into_iter()
        .map(|c| build_cc(&p, c).unwrap())
        .chain(
            admissible_lambdas()
                .into_iter()
                .map(|l| build_qc(&p, l).unwrap()),
        )
        .collect()
}

#[test]
fn marginals_are_fixed_across_families() {
    let p = params();
    let sys = p.thermal(p.beta3);
    let cat = p.thermal(p.beta1);
    for s in finals() {
        for (x, y) in s.marginal_system().weights().iter().zip(sys.weights()) {
            assert_abs_diff_eq!(*x, *y, epsilon = 1e-12);
        }
        for (x, y) in s.marginal_catalyst().weights().iter().zip(cat.weights()) {
            assert_abs_diff_eq!(*x, *y, epsilon = 1e-12);
        }
    }
}

#[test]
fn mutual_information_grows_with_coherence() {
    let p = params();
    let mut prev = -1.0;
    for l in admissible_lambdas() {
        let mi = mutual_information(&build_qc(&p, l).unwrap()).mutual_info;
        assert!(mi >= -1e-12);
        assert!(mi >= prev - 1e-12, "MI drops at lambda = {l}");
        prev = mi;
    }
    for s in finals() {
        assert!(mutual_information(&s).mutual_info >= -1e-12);
    }
}

#[test]
fn system_marginal_scan_ignores_correlations() {
    let p = params();
    let ctx = GibbsContext::new(vec![p.e_g, p.e_e], p.beta_b).unwrap();
    let initial = build_initial_uc(&p).unwrap().marginal_system();
    let grid = default_grid();
    let reference = second_law_scan(&initial, &finals()[0].marginal_system(), &ctx, &grid).unwrap();
    for s in finals() {
        let r = second_law_scan(&initial, &s.marginal_system(), &ctx, &grid).unwrap();
        assert_eq!(r.allowed_renyi, reference.allowed_renyi);
        assert_eq!(r.allowed_tsallis, reference.allowed_tsallis);
        for (x, y) in r.deltas_renyi.iter().chain(&r.deltas_tsallis).zip(
            reference
                .deltas_renyi
                .iter()
                .chain(&reference.deltas_tsallis),
        ) {
            assert!((x - y).abs() <= 1e-12 * x.abs().max(1.0), "{x} vs {y}");
        }
    }
}

#[test]
fn verdicts_are_stable_under_tolerance() {
    let p = params();
    let cases = [
        (build_cc(&p, 0.05).unwrap(), true),
        (build_cc(&p, 0.065).unwrap(), false),
        (build_qc(&p, 0.0947).unwrap(), false),
    ];
    for tol in [1e-10, 1e-9, 1e-8] {
        for (state, allowed) in &cases {
            assert_eq!(
                joint_verdict_with_tol(&p, state, tol).unwrap().allowed,
                *allowed
            );
        }
    }
}

#[test]
fn report_states_share_the_cc_touch_point() {
    let p = params();
    let r = scenario_report(&p, &[0.0, 0.02, 0.05], &[]).unwrap();
    let y = 1.0 - p.ground_occupation(p.beta1);
    for s in &r.states {
        assert!(
            s.curve.iter().any(|&(_, yy)| (yy - y).abs() < 1e-12),
            "{}",
            s.name
        );
    }
}
