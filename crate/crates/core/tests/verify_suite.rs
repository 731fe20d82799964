use yamabe_core::ode::{integrate, Direction, Limits, ProfileSample, SolitonParams, SolitonProfile, Start};
use yamabe_core::verify::{catalog_check_names, run_catalog, run_profile, SuiteOptions};

#[test]
fn catalog_passes_and_is_reproducible() {
    let opts = SuiteOptions::default();
    let a = run_catalog(&opts).unwrap();
    let failed: Vec<_> = a.checks.iter().filter(|c| !c.pass).collect();
    assert!(a.overall_pass, "{failed:?}");
    let names: Vec<_> = a.checks.iter().map(|c| c.name.clone()).collect();
    assert_eq!(names, catalog_check_names());
    let b = run_catalog(&opts).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
}

#[test]
fn selection_restricts_checks() {
    let opts = SuiteOptions {
        selection: Some(vec!["s2xs2_fiber".into(), "steady_n3/soliton".into()]),
        ..SuiteOptions::default()
    };
    let r = run_catalog(&opts).unwrap();
    assert!(r.checks.iter().all(|c| c.name.starts_with("s2xs2_fiber/") || c.name == "steady_n3/soliton"));
    assert!(r.check("steady_n3/soliton").is_some());
    assert!(r.overall_pass);
    let bad = SuiteOptions { selection: Some(vec!["no_such_check".into()]), ..SuiteOptions::default() };
    assert!(run_catalog(&bad).is_err());
}

fn steady() -> SolitonProfile {
    let p = SolitonParams::new(3, 0.0, 2.0).unwrap();
    integrate(&p, Start::origin(1.0), Direction::Forward, &Limits { r_max: 8.0, ..Limits::default() }).unwrap()
}

#[test]
fn user_profile_passes() {
    let r = run_profile(&steady(), None, None, &SuiteOptions::default()).unwrap();
    assert!(r.overall_pass, "{:?}", r.checks.iter().filter(|c| !c.pass).collect::<Vec<_>>());
}

#[test]
fn scaled_profile_fails_the_soliton_check() {
    let prof = steady();
    let samples: Vec<ProfileSample> = prof.samples().iter().map(|s| ProfileSample { phi: 1.1 * s.phi, ..*s }).collect();
    let bad = SolitonProfile::from_table(*prof.params(), samples, prof.phi_min()).unwrap();
    let r = run_profile(&bad, None, None, &SuiteOptions::default()).unwrap();
    assert!(!r.overall_pass);
    let c = r.check("profile/soliton").unwrap();
    assert!(!c.pass && c.residual > 100.0 * c.tolerance, "{c:?}");
}
