use lie3::geodesic::Outcome;
use lie3::linalg::mat_to_rows;
use lie3::normal_form::tables::Completeness;
use lie3::normal_form::FormId;
use lie3::pipeline::{analyze, build_atlas, probe, AnalysisRequest, Overrides, Settings};
use lie3::{BianchiTag, Error};
use nalgebra::{Matrix3, Vector3};

fn diag(a: f64, b: f64, c: f64) -> Matrix3<f64> {
    Matrix3::from_diagonal(&Vector3::new(a, b, c))
}

fn run(tag: BianchiTag, param: Option<f64>, g: Matrix3<f64>) -> lie3::pipeline::AnalysisReport {
    analyze(&AnalysisRequest::new(tag, param, g), &Overrides::default()).unwrap()
}

#[test]
fn heis_lorentz_diagonal_has_elliptic_isotropy() {
    let r = run(BianchiTag::Heis, None, diag(1.0, 1.0, -1.0));
    assert_eq!(r.killing.killing_dim, 4);
    assert_eq!(r.killing.isotropy_type.as_deref(), Some("elliptic"));
    assert_eq!(r.killing.g_ideal_in_l, Some(true));
    assert_eq!(r.skew_derivations.dim, 1);
    assert_eq!(r.skew_derivations.types, vec!["elliptic"]);
    assert_eq!(r.killing.completeness, Completeness::Complete);
    assert!(r.warnings.is_empty());
}

#[test]
fn flat_r3_is_a_space_form() {
    let r = run(BianchiTag::R3, None, Matrix3::identity());
    assert_eq!(r.killing.killing_dim, 6);
    assert_eq!(r.curvature.constant_k, Some(0.0));
    assert_eq!(r.killing.matched_row.as_deref(), Some("R3/riemannian"));
    assert_eq!(r.skew_derivations.dim, 3);
}

#[test]
fn euc2_lorentz_flat_form() {
    let r = run(BianchiTag::Euc2, None, diag(-1.0, 1.0, 1.0));
    assert_eq!(r.killing.killing_dim, 6);
    assert_eq!(r.killing.constant_k, Some(0.0));
}

#[test]
fn sol_plane_wave_row() {
    let g = Matrix3::new(0.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 0.0);
    let r = run(BianchiTag::Sol, None, g);
    assert_eq!(r.normal_form.form.id, FormId::E2E1E3);
    assert_eq!(r.killing.killing_dim, 4);
    assert_eq!(r.killing.isotropy_type.as_deref(), Some("nilpotent"));
    assert_eq!(r.killing.g_ideal_in_l, Some(false));
    assert_eq!(r.killing.derived_killing.as_deref(), Some("heis"));
    assert_eq!(r.skew_derivations.dim, 0);
    assert_eq!(r.killing.completeness, Completeness::Incomplete);
}

#[test]
fn aff_n_plus_at_excluded_value_is_generic() {
    let g = Matrix3::new(1.0, 0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 1.0, 0.5);
    let r = run(BianchiTag::AffRPlusR, None, g);
    assert_eq!(r.normal_form.form.id, FormId::NPlus);
    assert_eq!(r.killing.killing_dim, 3);
    assert_eq!(r.skew_derivations.dim, 0);
}

#[test]
fn scaled_and_transported_input_gives_same_table_row() {
    // so3 axial metric in a rotated, rescaled basis
    let (c, s) = (0.6f64, 0.8f64);
    let p = Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0) * 1.7;
    let a = lie3::bianchi::family::so3().transport(&p).unwrap();
    let g = p.transpose() * diag(1.0, 1.0, 3.0) * p * 2.5;
    let req = AnalysisRequest {
        algebra: lie3::pipeline::AlgebraSpec { structure: Some(a.c), ..Default::default() },
        metric: mat_to_rows(&g),
        options: Default::default(),
    };
    let r = analyze(&req, &Overrides::default()).unwrap();
    assert_eq!(r.bianchi.tag, BianchiTag::So3);
    assert_eq!(r.killing.matched_row.as_deref(), Some("so3/axial"));
    assert_eq!(r.killing.isotropy_type.as_deref(), Some("elliptic"));
}

#[test]
fn structure_mode_matches_family_mode() {
    let text = r#"{
        "algebra": {"structure": [[[0,0,0],[0,0,1],[0,0,0]],[[0,0,-1],[0,0,0],[0,0,0]],[[0,0,0],[0,0,0],[0,0,0]]]},
        "metric": [[1,0,0],[0,1,0],[0,0,-1]]
    }"#;
    let r = analyze(&AnalysisRequest::from_json(text).unwrap(), &Overrides::default()).unwrap();
    assert_eq!(r.bianchi.tag, BianchiTag::Heis);
    assert_eq!(r.killing.killing_dim, 4);
}

#[test]
fn request_schema_errors() {
    let both = r#"{"algebra": {"family": "heis", "structure": [[[0,0,0],[0,0,0],[0,0,0]],[[0,0,0],[0,0,0],[0,0,0]],[[0,0,0],[0,0,0],[0,0,0]]]}, "metric": [[1,0,0],[0,1,0],[0,0,1]]}"#;
    let neither = r#"{"algebra": {}, "metric": [[1,0,0],[0,1,0],[0,0,1]]}"#;
    let unknown = r#"{"algebra": {"family": "heis"}, "metric": [[1,0,0],[0,1,0],[0,0,1]], "extra": 1}"#;
    let bad_tag = r#"{"algebra": {"family": "so4"}, "metric": [[1,0,0],[0,1,0],[0,0,1]]}"#;
    let no_param = r#"{"algebra": {"family": "e_mu"}, "metric": [[1,0,0],[0,1,0],[0,0,1]]}"#;
    for text in [both, neither, unknown, bad_tag, no_param] {
        let e = AnalysisRequest::from_json(text).and_then(|r| analyze(&r, &Overrides::default())).unwrap_err();
        assert_eq!(e.exit_code(), 2, "{text}: {e}");
    }
}

#[test]
fn asymmetric_metric_is_rejected() {
    let g = Matrix3::new(1.0, 0.5, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0);
    let e = analyze(&AnalysisRequest::new(BianchiTag::R3, None, g), &Overrides::default()).unwrap_err();
    assert!(matches!(e, Error::DegenerateMetric(_)));
    assert_eq!(e.exit_code(), 2);
}

#[test]
fn jacobi_failure_exit_code() {
    // [e1,e2]=e3, [e2,e3]=e1, [e3,e1]=e1: the cyclic sum is -e3
    let mut c = [[[0.0; 3]; 3]; 3];
    for (i, j, k) in [(0, 1, 2), (1, 2, 0), (2, 0, 0)] {
        c[i][j][k] = 1.0;
        c[j][i][k] = -1.0;
    }
    let req = AnalysisRequest {
        algebra: lie3::pipeline::AlgebraSpec { structure: Some(c), ..Default::default() },
        metric: mat_to_rows(&Matrix3::identity()),
        options: Default::default(),
    };
    let e = analyze(&req, &Overrides::default()).unwrap_err();
    assert!(matches!(e, Error::NotJacobi(_)), "{e}");
    assert_eq!(e.exit_code(), 3);
}

#[test]
fn reports_are_deterministic() {
    let g = Matrix3::new(2.0, 0.3, -0.1, 0.3, -1.0, 0.4, -0.1, 0.4, 1.5);
    let req = AnalysisRequest::new(BianchiTag::HLambda, Some(0.3), g);
    let ov = Overrides { seed: Some(5), ..Default::default() };
    let a = serde_json::to_string(&analyze(&req, &ov).unwrap()).unwrap();
    let b = serde_json::to_string(&analyze(&req, &ov).unwrap()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn killing_and_curvature_reports_agree() {
    for (tag, p, g) in [
        (BianchiTag::So3, None, Matrix3::identity()),
        (BianchiTag::H1, None, diag(1.0, 1.0, -1.0)),
        (BianchiTag::Sl2, None, diag(1.0, 2.0, 3.0)),
    ] {
        let r = run(tag, p, g);
        assert_eq!(r.killing.constant_k, r.curvature.constant_k);
    }
}

#[test]
fn overrides_take_precedence() {
    let mut req = AnalysisRequest::new(BianchiTag::R3, None, Matrix3::identity());
    req.options.seed = Some(1);
    let s = Settings::resolve(&req.options, &Overrides { seed: Some(9), eps_rank: Some(1e-10), eps_jac: None }).unwrap();
    assert_eq!(s.seed, 9);
    assert_eq!(s.tolerances.eps_rank, 1e-10);
    assert!(Settings::resolve(&req.options, &Overrides { eps_jac: Some(-1.0), ..Default::default() }).is_err());
}

#[test]
fn probe_requests() {
    let mut req = AnalysisRequest::new(BianchiTag::R3, None, Matrix3::identity());
    req.options.v0 = Some([0.1, 0.2, 0.3]);
    let run = probe(&req, &Overrides::default(), Some(10.0), None).unwrap();
    assert_eq!(run.result.outcome(), Outcome::BoundedToHorizon);
    assert!(!run.samples.is_empty());
    let e = probe(&req, &Overrides::default(), Some(10.0), Some(1e-3)).unwrap_err();
    assert_eq!(e.exit_code(), 7);
}

#[test]
fn analyze_can_attach_a_probe() {
    let mut req = AnalysisRequest::new(BianchiTag::H1, None, Matrix3::new(0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0));
    req.options.probe_horizon = Some(100.0);
    let r = analyze(&req, &Overrides::default()).unwrap();
    assert_eq!(r.probe.unwrap().outcome(), Outcome::BlowupDetected);
}

#[test]
fn atlas_regenerates_cleanly() {
    let out = build_atlas(&Settings::default());
    assert!(out.mismatches.is_empty(), "{:#?}", out.mismatches);
    assert_eq!(out.table2.rows.len(), 11);
    assert_eq!(out.table3.rows.len(), 21);
    assert!(out.table3.rows.iter().all(|r| r.family != BianchiTag::Euc2));
    let psh = out.table3.rows.iter().find(|r| r.family == BianchiTag::Psh).unwrap();
    assert_eq!(psh.metric, "2(e1e2)+(e3)^2");
    assert_eq!(psh.isotropy, "nilpotent");
    assert!(psh.ideal);
    assert_eq!(psh.derived, "R2");
    let keys: Vec<&str> = out.table3.rows.iter().map(|r| r.key.as_str()).collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
}

#[test]
fn atlas_files_are_reproducible() {
    let d1 = tempdir("a");
    let d2 = tempdir("b");
    build_atlas(&Settings::default()).write(&d1).unwrap();
    build_atlas(&Settings::default()).write(&d2).unwrap();
    for f in ["table2.json", "table3.json", "normal_forms.json"] {
        let a = std::fs::read(d1.join(f)).unwrap();
        let b = std::fs::read(d2.join(f)).unwrap();
        assert_eq!(a, b, "{f}");
        let v: serde_json::Value = serde_json::from_slice(&a).unwrap();
        assert_eq!(v["schema_version"], 1);
    }
}

fn tempdir(tag: &str) -> std::path::PathBuf {
    let d = std::env::temp_dir().join(format!("lie3-atlas-{}-{tag}", std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    d
}
