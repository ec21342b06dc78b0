use std::io::Write;

use gmla_core::report::{ReportEnvelope, Status, SCHEMA_VERSION};
use gmla_core::stft::{make_window, stft};
use gmla_core::wavefront::{estimate_wavefront, GridSource, WfOptions};
use gmla_core::{Error, PhaseField, PhaseGrid, SampledSignal, SignalExpr, SymbolExpr, WavefrontEstimate, WindowKind};

fn temp_csv(name: &str, body: &str) -> std::path::PathBuf {
    let p = std::env::temp_dir().join(format!("gmla-{}-{name}", std::process::id()));
    std::fs::File::create(&p).unwrap().write_all(body.as_bytes()).unwrap();
    p
}

#[test]
fn file_signal_matches_the_samples_it_was_written_from() {
    let g = PhaseGrid::new(1, 8.0, 64, 1).unwrap();
    let u = SampledSignal::sample(&SignalExpr::parse("gauss(1, -2)").unwrap(), &g).unwrap();
    let p = temp_csv("roundtrip.csv", &u.to_csv());
    let f = SignalExpr::parse(&format!("file(\"{}\")", p.display())).unwrap();
    let v = SampledSignal::sample(&f, &g).unwrap();
    assert!(v.rel_diff(&u).unwrap() < 1e-12);

    let short = temp_csv("short.csv", "re,im\n1,0\n2,0\n");
    let bad = SignalExpr::parse(&format!("file(\"{}\")", short.display())).unwrap();
    assert!(matches!(SampledSignal::sample(&bad, &g), Err(Error::GridMismatch(_))));
    let _ = std::fs::remove_file(p);
    let _ = std::fs::remove_file(short);
}

#[test]
fn parse_errors_carry_offsets() {
    match SignalExpr::parse("planewave(") {
        Err(Error::Syntax { offset, .. }) => assert_eq!(offset, 10),
        other => panic!("unexpected {other:?}"),
    }
    assert!(matches!(SignalExpr::parse("wobble(1)"), Err(Error::UnknownPrimitive { offset: 0, .. })));
    assert!(matches!(SymbolExpr::parse("bracket(1, 2)"), Err(Error::Arity { .. })));
    assert!(matches!(PhaseGrid::new(1, 8.0, 100, 1), Err(Error::Grid(_))));
}

#[test]
fn phase_field_json_round_trip() {
    let g = PhaseGrid::new(1, 8.0, 32, 1).unwrap();
    let u = SampledSignal::sample(&SignalExpr::parse("hermite(2)").unwrap(), &g).unwrap();
    let v = stft(&u, &make_window(WindowKind::Gaussian, &g).unwrap()).unwrap();
    let back = PhaseField::from_json(&v.to_json().unwrap()).unwrap();
    assert_eq!(back.cols(), v.cols());
    for j in 0..g.n {
        assert_eq!(back.row(j), v.row(j));
    }
}

#[test]
fn grid_path_estimate_serializes_and_finds_the_spike() {
    let g = PhaseGrid::new(1, 16.0, 256, 1).unwrap();
    let u = SignalExpr::parse("deltaApprox(0.05)").unwrap();
    let src = GridSource::from_expr(&u, &g, WindowKind::Gaussian).unwrap();
    let est = estimate_wavefront(&src, &WfOptions::default()).unwrap();
    // the short reliable band limits angular resolution on this path
    let set = est.gabor_upper();
    assert!(set.contains(&90) && set.contains(&270), "{set:?}");
    assert!(set.iter().all(|&j| (50..=130).contains(&j) || (230..=310).contains(&j)), "{set:?}");

    let back: WavefrontEstimate = serde_json::from_str(&est.to_json().unwrap()).unwrap();
    assert_eq!(back.gabor_upper(), set);
    let csv = est.polar_csv();
    assert!(csv.starts_with("theta,gamma_g,s_star,flag\n"));
    assert_eq!(csv.lines().count(), 361);
}

#[test]
fn envelope_round_trip_and_version_guard() {
    let mut env = ReportEnvelope::new("wf", Default::default());
    env.status = Status::Ok;
    env.set_payload(&serde_json::json!({ "k": [1, 2, 3] })).unwrap();
    let text = env.to_json().unwrap();
    let back = ReportEnvelope::from_json(&text).unwrap();
    assert_eq!(back.deterministic_bytes().unwrap(), env.deterministic_bytes().unwrap());

    let bumped = text.replace(SCHEMA_VERSION, "0.0.1");
    assert!(ReportEnvelope::from_json(&bumped).is_err());

    env.fail_with(&Error::Eval("boom".into()));
    assert_eq!(env.status, Status::Error);
    assert!(env.to_json().unwrap().contains("boom"));
}
