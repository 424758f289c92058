use std::f64::consts::{FRAC_1_SQRT_2, PI};

use hopflab::report::{FunctionalName, Status};
use hopflab::theorems::{
    boundary_hopf_deviation, check_dichotomy, check_identities, check_theorem_1_3, check_theorem_1_4,
    check_theorem_1_6, pvp_sweep, run_checks, CheckConfig, CheckJob, FieldSurvey,
};
use hopflab::{
    complement_torus, hopf, lambda_field, solid_torus, FieldDefinition, QuadratureSpec, Region, SphereDim, VolumeForm,
};
use proptest::prelude::*;

const PI2: f64 = PI * PI;
const TS: [f64; 3] = [0.1, 0.25, 0.5];

fn k_region() -> Region {
    Region::Chart(solid_torus(FRAC_1_SQRT_2).unwrap())
}

fn kc_region() -> Region {
    Region::Chart(complement_torus(FRAC_1_SQRT_2).unwrap())
}

fn s3_hopf() -> FieldDefinition {
    hopf(SphereDim::three())
}

#[test]
fn theorem_1_4_hopf_reaches_equality() {
    let r = check_theorem_1_4(&s3_hopf(), &k_region(), &QuadratureSpec::default(), &TS, &CheckConfig::default()).unwrap();
    assert_eq!(r.status, Status::Passed, "{r:#?}");
    for id in ["hopf_volume", "hopf_energy", "sigma1", "sigma2", "divergence"] {
        assert_eq!(r.conclusion(id).unwrap().pass, Some(true), "{id}");
    }
    let vol = r.conclusion("hopf_volume").unwrap();
    assert!((vol.lhs - 2.0 * PI2).abs() < 1e-7 * PI2);
    let e = r.conclusion("hopf_energy").unwrap();
    assert!((e.lhs - 2.5 * PI2).abs() < 1e-7 * PI2);
    assert_eq!(r.hypotheses.len(), 1 + 2 * TS.len());
    assert!(r.record(FunctionalName::Flux).is_some());
}

#[test]
fn theorem_1_4_lambda_on_pvp_side() {
    let q = QuadratureSpec::default();
    let cfg = CheckConfig::default();
    for lambda in [2.0, 4.0] {
        let f = lambda_field(lambda).unwrap();
        let on_k = check_theorem_1_4(&f, &k_region(), &q, &TS, &cfg).unwrap();
        let on_kc = check_theorem_1_4(&f, &kc_region(), &q, &TS, &cfg).unwrap();
        // the PVP side is K; the complement fails the gate without being a failure
        assert_eq!(on_k.status, Status::Passed);
        assert_eq!(on_kc.status, Status::HypothesesNotMet);
        assert!(on_kc.conclusions.iter().all(|c| c.pass.is_none()));
        // off the gate the volume bound is genuinely violated
        let v = on_kc.conclusion("volume").unwrap();
        assert!(v.lhs < v.rhs);
        let s2 = on_k.conclusion("sigma2").unwrap();
        assert!(s2.lhs > s2.rhs);
    }
}

#[test]
fn theorem_1_4_nonzero_flux_fails_gate() {
    let c = 1.0;
    let lines = [
        format!("x - {c}*y"),
        format!("y + {c}*x"),
        format!("-z - {c}*w"),
        format!("-w + {c}*z"),
    ];
    let refs: Vec<&str> = lines.iter().map(String::as_str).collect();
    let f = FieldDefinition::from_expressions("radial_twist", &refs).unwrap();
    let q = QuadratureSpec::with_nodes(vec![32, 32, 24]);
    let r = check_theorem_1_4(&f, &k_region(), &q, &[0.1], &CheckConfig::default()).unwrap();
    assert_eq!(r.status, Status::HypothesesNotMet);
    assert!(!r.hypotheses[0].pass);
    assert!((r.hypotheses[0].value - 2.0 / 2f64.sqrt()).abs() < 1e-8);
}

#[test]
fn theorem_1_4_rejects_bad_inputs() {
    let q = QuadratureSpec::default();
    let cfg = CheckConfig::default();
    assert!(check_theorem_1_4(&s3_hopf(), &k_region(), &q, &[], &cfg).is_err());
    assert!(check_theorem_1_4(&s3_hopf(), &k_region(), &q, &[0.0], &cfg).is_err());
    let s5 = SphereDim::new(2).unwrap();
    let mc = QuadratureSpec::monte_carlo(100, 0);
    assert!(check_theorem_1_4(&hopf(s5), &Region::sphere(s5), &mc, &[0.1], &cfg).is_err());
}

#[test]
fn theorem_1_6_examples() {
    let cfg = CheckConfig::default();
    let r = check_theorem_1_6(&s3_hopf(), &Region::sphere(SphereDim::three()), &QuadratureSpec::default(), &cfg).unwrap();
    assert_eq!(r.status, Status::Passed);
    assert!((r.conclusion("hopf_energy").unwrap().lhs - 5.0 * PI2).abs() < 1e-7 * PI2);
    assert!(r.notes.iter().any(|n| n.contains("vacuous")));

    let s5 = SphereDim::new(2).unwrap();
    let r = check_theorem_1_6(&hopf(s5), &Region::sphere(s5), &QuadratureSpec::monte_carlo(100_000, 3), &cfg).unwrap();
    assert_eq!(r.status, Status::Passed);
    let e = r.conclusion("hopf_energy").unwrap();
    assert!((e.lhs - 4.5 * PI.powi(3)).abs() <= e.slack);
    let s2 = r.conclusion("sigma2").unwrap();
    assert!((s2.lhs - 2.0 * PI.powi(3)).abs() <= s2.slack);

    // v_λ is solenoidal but not Hopf on the Clifford torus
    let f = lambda_field(2.0).unwrap();
    let q = QuadratureSpec::default();
    let r = check_theorem_1_6(&f, &k_region(), &q, &cfg).unwrap();
    assert_eq!(r.status, Status::HypothesesNotMet);
    assert!(r.hypotheses[0].pass);
    assert!(!r.hypotheses[1].pass);
    assert!(r.record(FunctionalName::Energy).unwrap().value > 2.5 * PI2);
}

#[test]
fn theorem_1_6_on_hopf_solid_torus() {
    let r = check_theorem_1_6(&s3_hopf(), &k_region(), &QuadratureSpec::default(), &CheckConfig::default()).unwrap();
    assert_eq!(r.status, Status::Passed);
    let s2 = r.conclusion("sigma2").unwrap();
    assert!((s2.lhs - PI2).abs() < 1e-7 * PI2);
}

#[test]
fn boundary_deviation_of_lambda_fields() {
    // on the Clifford torus |v_λ − H|∞ = |λ√(2/(1+λ²)) − 1|/√2 in the (x, y) block
    let q = QuadratureSpec::default();
    for lambda in [2.0f64, 4.0] {
        let dev = boundary_hopf_deviation(&lambda_field(lambda).unwrap(), &k_region(), &q).unwrap();
        let g = (2.0 / (1.0 + lambda * lambda)).sqrt();
        let want = ((lambda * g - 1.0).abs()).max((g - 1.0).abs()) * FRAC_1_SQRT_2;
        assert!((dev - want).abs() < 1e-3 * want, "{dev} vs {want}");
    }
    assert!(boundary_hopf_deviation(&s3_hopf(), &k_region(), &q).unwrap() < 1e-15);
}

#[test]
fn theorem_1_3_examples() {
    let cfg = CheckConfig::default();
    let r = check_theorem_1_3(&s3_hopf(), &k_region(), &QuadratureSpec::default(), &cfg).unwrap();
    assert_eq!(r.status, Status::Passed);
    let v = r.conclusion("volume").unwrap();
    assert!((v.lhs - v.rhs).abs() < 1e-7 * PI2);

    let s5 = SphereDim::new(2).unwrap();
    let r = check_theorem_1_3(&hopf(s5), &Region::sphere(s5), &QuadratureSpec::monte_carlo(50_000, 4), &cfg).unwrap();
    assert_eq!(r.status, Status::Passed);
    let v = r.conclusion("volume").unwrap();
    assert!((v.rhs - 16.0 / 6.0 * PI.powi(3)).abs() < 1e-12);
    assert!((v.lhs - 4.0 * PI.powi(3)).abs() < 1e-9);

    let r = check_theorem_1_3(&s3_hopf(), &Region::sphere(SphereDim::three()), &QuadratureSpec::default(), &cfg).unwrap();
    let e = r.conclusion("energy").unwrap();
    assert!((e.lhs - 5.0 * PI2).abs() < 1e-7 * PI2);
    assert!((e.lhs - e.rhs).abs() < 1e-7 * PI2);
}

#[test]
fn h_block_form_skips_hopf_volume_equality() {
    let cfg = CheckConfig {
        volume_form: VolumeForm::HBlock,
        ..Default::default()
    };
    let r = check_theorem_1_3(&s3_hopf(), &k_region(), &QuadratureSpec::default(), &cfg).unwrap();
    assert!(r.conclusion("hopf_volume").is_none());
    assert_eq!(r.status, Status::Passed);
}

#[test]
fn dichotomy_examples() {
    let q = QuadratureSpec::default();
    let cfg = CheckConfig::default();
    for lambda in [1.0, 2.0, 4.0] {
        let f = lambda_field(lambda).unwrap();
        for t in [0.1, 0.25] {
            let r = check_dichotomy(&f, FRAC_1_SQRT_2, &q, t, &cfg).unwrap();
            assert_eq!(r.status, Status::Passed, "{r:#?}");
            let p = r.conclusion("partition").unwrap();
            assert!((p.lhs - 2.0 * PI2).abs() < 1e-7 * 2.0 * PI2);
        }
    }
    let r = check_dichotomy(&s3_hopf(), FRAC_1_SQRT_2, &q, 0.25, &cfg).unwrap();
    for id in ["hopf_ratio_k", "hopf_ratio_kc"] {
        assert!((r.conclusion(id).unwrap().lhs - 1.0).abs() < 1e-9);
    }
    assert!(r.notes.iter().any(|n| n.contains("both")));
}

#[test]
fn identities_report_passes() {
    let r = check_identities(1000, 5);
    assert_eq!(r.status, Status::Passed);
    assert_eq!(r.conclusions.len(), 18);
}

#[test]
fn run_checks_is_ordered_and_reproducible() {
    let jobs = vec![
        CheckJob::Identities { samples: 200, seed: 1 },
        CheckJob::Dichotomy {
            field: lambda_field(2.0).unwrap(),
            delta_max: FRAC_1_SQRT_2,
            t: 0.25,
        },
        CheckJob::Theorem13 {
            field: s3_hopf(),
            region: k_region(),
        },
    ];
    let q = QuadratureSpec::with_nodes(vec![16, 16, 12]);
    let a: Vec<_> = run_checks(&jobs, &q, &CheckConfig::default()).into_iter().map(Result::unwrap).collect();
    let b: Vec<_> = run_checks(&jobs, &q, &CheckConfig::default()).into_iter().map(Result::unwrap).collect();
    assert_eq!(
        a.iter().map(|r| r.check_id.as_str()).collect::<Vec<_>>(),
        ["identities", "dichotomy", "thm1.3"]
    );
    assert_eq!(a, b);
}

#[test]
fn sweep_rows_follow_closed_form() {
    let fields: Vec<_> = [1.0, 2.0].into_iter().map(|l| lambda_field(l).unwrap()).collect();
    let rows = pvp_sweep(&fields, &k_region(), &QuadratureSpec::default(), &[0.1, 0.2]).unwrap();
    assert_eq!(rows.len(), 4);
    assert_eq!(rows[2].field, "lambda:2");
    // ratio = (1 + t²∫σ₂/vol)/(1 + t²) with σ₁ = 0 and no higher σ on S³
    let s = FieldSurvey::new(&fields[1], &k_region(), &QuadratureSpec::default()).unwrap();
    let avg = s.sigma_integral(2).value / s.domain_volume().value;
    for r in &rows[2..] {
        let want = (1.0 + r.t * r.t * avg) / (1.0 + r.t * r.t);
        assert!((r.pvp_ratio - want).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    /// Whenever the hypothesis gate passes, the conclusions hold.
    #[test]
    fn gate_implies_conclusion(lambda in 1.0f64..6.0, delta in 0.2f64..0.9, t in 0.05f64..0.6, outer in any::<bool>()) {
        let f = lambda_field(lambda).unwrap();
        let region = if outer {
            Region::Chart(complement_torus(delta).unwrap())
        } else {
            Region::Chart(solid_torus(delta).unwrap())
        };
        let q = QuadratureSpec::with_nodes(vec![16, 16, 16]);
        let r = check_theorem_1_4(&f, &region, &q, &[t], &CheckConfig::default()).unwrap();
        prop_assert_ne!(r.status, Status::Failed);
        if r.status == Status::Passed {
            let s2 = r.conclusion("sigma2").unwrap();
            prop_assert!(s2.holds());
        }
    }
}
