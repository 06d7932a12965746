use lie3::bianchi::family;
use lie3::curvature::{gamma_vv, levi_civita};
use lie3::geodesic::{euler_arnold_rhs, integrate, sweep, Outcome};
use lie3::linalg::mat_from_rows;
use lie3::{Error, LieAlgebra3, MetricForm, Tolerances};
use nalgebra::{Matrix3, Vector3};

fn metric(r: [[f64; 3]; 3]) -> MetricForm {
    MetricForm::new(mat_from_rows(r), &Tolerances::default()).unwrap()
}

#[test]
fn abelian_flow_is_still() {
    let g = metric([[2.0, 1.0, 0.0], [1.0, 3.0, 0.0], [0.0, 0.0, -1.0]]);
    let v = Vector3::new(0.3, -1.0, 2.0);
    assert_eq!(euler_arnold_rhs(&LieAlgebra3::abelian(), &g, &v), Vector3::zeros());
}

#[test]
fn round_so3_one_parameter_subgroups() {
    let a = family::so3();
    let g = MetricForm::identity();
    for v in [Vector3::x(), Vector3::new(1.0, 2.0, -0.5)] {
        assert!(euler_arnold_rhs(&a, &g, &v).norm() < 1e-15);
    }
}

#[test]
fn rhs_matches_connection() {
    let a = family::so3();
    let g = MetricForm::new(Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, 2.0)), &Tolerances::default()).unwrap();
    let v = Vector3::new(1.0, 0.0, 1.0);
    let rhs = euler_arnold_rhs(&a, &g, &v);
    let conn = levi_civita(&a, &g);
    assert!(rhs.norm() > 0.1);
    assert!((rhs + gamma_vv(&conn, &v)).norm() < 1e-12);
}

#[test]
fn round_so3_is_bounded() {
    let (v, traj) = integrate(&family::so3(), &MetricForm::identity(), &Vector3::new(0.2, -0.1, 0.15), 1e3, 1e-10).unwrap();
    assert_eq!(v.outcome, Outcome::BoundedToHorizon);
    assert!(traj.len() > 2);
}

#[test]
fn h1_flat_lorentzian_blows_up() {
    let g = metric([[0.0, 1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]]);
    let a = family::h1();
    // v1' = v1^2 along this metric
    let rhs = euler_arnold_rhs(&a, &g, &Vector3::new(0.5, 0.0, 0.0));
    assert!((rhs - Vector3::new(0.25, 0.0, 0.0)).norm() < 1e-15);
    let (v, _) = integrate(&a, &g, &Vector3::new(0.25, 0.0, 0.0), 1e3, 1e-10).unwrap();
    assert_eq!(v.outcome, Outcome::BlowupDetected);
    let t = v.blowup_t.unwrap();
    assert!((t - 4.0).abs() < 1e-6, "t* = {t}");
}

#[test]
fn sol_plane_wave_sweep_finds_blowup() {
    let g = metric([[0.0, 0.0, 1.0], [0.0, 1.0, 0.0], [1.0, 0.0, 0.0]]);
    let r = sweep(&family::sol(), &g, 1e3, 1e-10).unwrap();
    assert_eq!(r.overall, Outcome::BlowupDetected);
    assert!(r.blowup_directions > 0);
}

#[test]
fn heis_lorentzian_forms_are_bounded() {
    let a = family::heis();
    for r in [
        [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, -1.0]],
        [[1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, 1.0]],
        [[1.0, 0.0, 0.0], [0.0, 0.0, 1.0], [0.0, 1.0, 0.0]],
    ] {
        let s = sweep(&a, &metric(r), 1e3, 1e-10).unwrap();
        assert_eq!(s.overall, Outcome::BoundedToHorizon, "{r:?}");
    }
}

#[test]
fn euc2_flat_lorentzian_is_bounded() {
    let g = metric([[-1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);
    let s = sweep(&family::euc2(), &g, 1e3, 1e-10).unwrap();
    assert_eq!(s.overall, Outcome::BoundedToHorizon);
}

#[test]
fn energy_is_conserved() {
    let g = metric([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 3.0]]);
    let tol = 1e-10;
    let v0 = Vector3::new(0.1, 0.2, -0.2);
    let (v, _) = integrate(&family::so3(), &g, &v0, 1e3, tol).unwrap();
    assert_eq!(v.outcome, Outcome::BoundedToHorizon);
    let e0 = g.inner(&v0, &v0);
    assert!(v.energy_drift <= 100.0 * tol * e0.abs().max(1.0), "drift {}", v.energy_drift);
}

#[test]
fn tolerance_range_is_enforced() {
    let g = MetricForm::identity();
    for tol in [1e-13, 1e-5] {
        let r = integrate(&family::so3(), &g, &Vector3::x(), 1.0, tol);
        assert!(matches!(r, Err(Error::ToleranceUnachievable(_))));
    }
}
