//! Moments of the stored models against high-precision values and brute-force references.

use num_complex::Complex64;
use zsinh::cases::{self, moment_cases};
use zsinh::functions::{AnalyticFunction, AnalyticityDescriptor};
use zsinh::invz::{invert, invert_batch, moment, select_auto, select_params, Method, Tuning};
use zsinh::oracle::trapezoid_oracle;

#[test]
fn stored_cases_match_references() {
    for case in moment_cases() {
        let u = case.model.transform().unwrap();
        let rep = moment(&u, case.n, case.method, &case.tuning).unwrap();
        let err = (rep.value.re - case.reference).abs();
        assert!(err <= 1e-15, "{} {}: err {err:e}", case.name, case.method);
        // quoted figures carry their own rounding; allow for it on top of the tolerance
        let slack = (case.quoted - case.reference).abs();
        assert!((rep.value.re - case.quoted).abs() <= 1e-15 + slack, "{} {}", case.name, case.method);
    }
}

#[test]
fn node_counts_of_stored_cases() {
    let expect = [
        ("kobol_subordinator", Method::Sinh1, 40),
        ("kobol_subordinator_n500", Method::Sinh1, 40),
        ("kobol_drift", Method::Sinh1, 330),
        ("kobol_drift", Method::Sinh2, 60),
        ("kobol_nu_above_one", Method::Sinh3, 80),
        ("nts_drift", Method::Log, 110),
    ];
    for case in moment_cases() {
        let u = case.model.transform().unwrap();
        let rep = moment(&u, case.n, case.method, &case.tuning).unwrap();
        if let Some((_, _, bound)) = expect.iter().find(|(n, m, _)| *n == case.name && *m == case.method) {
            assert!(rep.nodes_used <= *bound, "{} {}: {} nodes", case.name, case.method, rep.nodes_used);
        }
    }
}

#[test]
fn oracle_reproduces_references() {
    let u = cases::kobol_subordinator().transform().unwrap();
    let o = trapezoid_oracle(&u, 100, 1.0, 1e-16).unwrap();
    assert!((o.value - 5.324_007_997_716_66e-5).abs() < 1e-16);
    assert!(o.stability_gap < 1e-16);
    let u = cases::kobol_nu_above_one().transform().unwrap();
    let o = trapezoid_oracle(&u, 100, 1.0, 1e-16).unwrap();
    assert!((o.value - 3.008_592_414_949_358e-7).abs() < 1e-16);
}

#[test]
fn oracle_geometric_series() {
    let u =
        AnalyticFunction::new("1/(2-z)", |z| 1.0 / (2.0 - z), AnalyticityDescriptor::annulus(0.0, 2.0).unwrap(), true);
    let o = trapezoid_oracle(&u, 7, 1.0, 1e-17).unwrap();
    assert!((o.value - 0.00390625).abs() < 1e-16);
}

#[test]
fn batch_matches_single_evaluations() {
    let u = cases::kobol_drift().transform().unwrap();
    let t = Tuning::default();
    let plan = select_params(&u, Method::Sinh2, 100, 140, &t).unwrap();
    let ns: Vec<u32> = (100..=140).collect();
    let batch = invert_batch(&u, &ns, &plan).unwrap();
    for (n, b) in ns.iter().zip(&batch) {
        let single = invert(&u, *n, &plan).unwrap();
        assert_eq!(single.value, b.value);
    }
    // one plan built for the range is accurate at both ends
    for &n in &[100u32, 140] {
        let o = trapezoid_oracle(&u, n, 1.0, 1e-16).unwrap();
        assert!((batch[(n - 100) as usize].value.re - o.value).abs() < 1e-15, "n={n}");
    }
}

#[test]
fn auto_follows_priority_order() {
    let t = Tuning::default();
    let pick = |m: zsinh::cli::Model| select_auto(&m.transform().unwrap(), 100, 100, &t).unwrap().method;
    assert_eq!(pick(cases::kobol_subordinator()), Method::Sinh2);
    assert_eq!(pick(cases::kobol_drift()), Method::Sinh2);
    assert_eq!(pick(cases::kobol_nu_above_one()), Method::Sinh3);
    assert_eq!(pick(cases::nts_drift()), Method::Log);
    let annulus_only =
        AnalyticFunction::new("1/(2-z)", |z| 1.0 / (2.0 - z), AnalyticityDescriptor::annulus(0.0, 2.0).unwrap(), true);
    assert_eq!(select_auto(&annulus_only, 10, 10, &t).unwrap().method, Method::Trap);
}

#[test]
fn gating_suggests_applicable_methods() {
    let u = cases::kobol_nu_above_one().transform().unwrap();
    let e = moment(&u, 100, Method::Sinh1, &Tuning::default()).unwrap_err();
    let msg = e.to_string();
    assert!(msg.contains("Z-SINH1") && msg.contains("sinh3"), "{msg}");
    let e = moment(&u, 100, Method::Log, &Tuning::default()).unwrap_err();
    assert!(e.to_string().contains("Z-LOG"), "{e}");
    let u = cases::kobol_atom_mixture().transform().unwrap();
    assert!(moment(&u, 100, Method::Sinh3, &Tuning::default()).is_err());
}

#[test]
fn interval_outside_annulus_is_domain_error() {
    let u = cases::kobol_subordinator().transform().unwrap();
    let t = Tuning { interval: Some((0.98, 1.02)), ..Default::default() };
    let e = moment(&u, 100, Method::Sinh1, &t).unwrap_err();
    assert_eq!(e.exit_code(), 2);
}

#[test]
fn tighter_tolerance_gives_smaller_error() {
    let u = cases::kobol_subordinator().transform().unwrap();
    let reference = 5.324_007_997_716_66e-5;
    let mut last_nodes = 0;
    for eps in [1e-6, 1e-9, 1e-12, 1e-15] {
        let rep = moment(&u, 100, Method::Sinh1, &Tuning::with_eps(eps)).unwrap();
        assert!((rep.value.re - reference).abs() <= eps, "eps {eps}");
        assert!(rep.nodes_used >= last_nodes);
        last_nodes = rep.nodes_used;
    }
}

#[test]
fn rotated_transform_with_prerotation() {
    let base = cases::kobol_nu_above_one().transform().unwrap();
    let theta = 0.7;
    let shift = Complex64::from_polar(1.0, -theta);
    let f = base.evaluator.clone();
    let rotated = AnalyticFunction::new("rotated", move |z| f(z * shift), base.descriptor.clone(), false);
    let n = 60;
    let plain = moment(&base, n, Method::Sinh3, &Tuning::default()).unwrap().value;
    let rep = moment(&rotated, n, Method::Sinh3, &Tuning { phi: theta, ..Default::default() }).unwrap();
    let expected = plain * Complex64::from_polar(1.0, -(n as f64) * theta);
    assert!((rep.value - expected).norm() < 1e-15 * plain.norm().max(1.0));
}
