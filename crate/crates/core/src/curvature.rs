//! Levi-Civita connection and curvature of a left-invariant metric, computed on the Lie algebra.
//!
//! Conventions: `R(x,y)z = ∇_x∇_y z - ∇_y∇_x z - ∇_[x,y] z` and `K(x,y) = <R(x,y)y, x> / gram`,
//! so the round sphere has K > 0.

use nalgebra::{Matrix3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lie::LieAlgebra3;
use crate::metric::MetricForm;

pub type Tensor3 = [[[f64; 3]; 3]; 3];
pub type Tensor4 = [[[[f64; 3]; 3]; 3]; 3];

pub const DEFAULT_SAMPLE_SEED: u64 = 0x5eed_1e5;
const RANDOM_PLANES: usize = 64;

/// `gamma[i][j]` is the vector `∇_{e_i} e_j`.
#[derive(Clone, Debug, Serialize)]
pub struct Connection {
    pub gamma: [[[f64; 3]; 3]; 3],
}

impl Connection {
    pub fn nabla(&self, x: &Vector3<f64>, y: &Vector3<f64>) -> Vector3<f64> {
        let mut out = Vector3::zeros();
        for i in 0..3 {
            for j in 0..3 {
                let w = x[i] * y[j];
                if w != 0.0 {
                    for k in 0..3 {
                        out[k] += w * self.gamma[i][j][k];
                    }
                }
            }
        }
        out
    }

    pub fn basis(&self, i: usize, j: usize) -> Vector3<f64> {
        Vector3::new(self.gamma[i][j][0], self.gamma[i][j][1], self.gamma[i][j][2])
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Riemann {
    /// `r[i][j][k][l]` = component l of R(e_i,e_j)e_k
    pub r: Tensor4,
    /// `low[i][j][k][l]` = <R(e_i,e_j)e_k, e_l>
    pub low: Tensor4,
}

impl Riemann {
    pub fn apply(&self, x: &Vector3<f64>, y: &Vector3<f64>, z: &Vector3<f64>) -> Vector3<f64> {
        let mut out = Vector3::zeros();
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    let w = x[i] * y[j] * z[k];
                    if w != 0.0 {
                        for l in 0..3 {
                            out[l] += w * self.r[i][j][k][l];
                        }
                    }
                }
            }
        }
        out
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PlaneSample {
    pub x: [f64; 3],
    pub y: [f64; 3],
    pub gram: f64,
    /// absent for degenerate planes
    pub k: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CurvatureReport {
    pub connection: Connection,
    pub riemann: Riemann,
    pub ricci: Matrix3<f64>,
    pub scalar: f64,
    pub sectional_samples: Vec<PlaneSample>,
    pub skipped_planes: usize,
    pub constant_k: Option<f64>,
    /// max |Ric - 2K g| with K = scalar / 6
    pub ricci_residual: f64,
    /// max deviation of sampled sectional curvatures from scalar / 6
    pub sectional_spread: f64,
    /// true when the Ricci test and the sampling test disagree
    pub tests_disagree: bool,
}

pub fn levi_civita(a: &LieAlgebra3, g: &MetricForm) -> Connection {
    let ginv = g.inverse();
    let e = |i: usize| Vector3::ith(i, 1.0);
    let mut gamma = [[[0.0; 3]; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let mut low = Vector3::zeros();
            for k in 0..3 {
                low[k] = 0.5
                    * (g.inner(&a.bracket(&e(i), &e(j)), &e(k)) - g.inner(&a.bracket(&e(j), &e(k)), &e(i))
                        + g.inner(&a.bracket(&e(k), &e(i)), &e(j)));
            }
            let v = ginv * low;
            for k in 0..3 {
                gamma[i][j][k] = v[k];
            }
        }
    }
    Connection { gamma }
}

pub fn riemann(a: &LieAlgebra3, g: &MetricForm, conn: &Connection) -> Riemann {
    let e = |i: usize| Vector3::<f64>::ith(i, 1.0);
    let mut r = [[[[0.0; 3]; 3]; 3]; 3];
    let mut low = [[[[0.0; 3]; 3]; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let br = a.bracket(&e(i), &e(j));
            for k in 0..3 {
                let v = conn.nabla(&e(i), &conn.basis(j, k)) - conn.nabla(&e(j), &conn.basis(i, k))
                    - conn.nabla(&br, &e(k));
                let lv = g.g * v;
                for l in 0..3 {
                    r[i][j][k][l] = v[l];
                    low[i][j][k][l] = lv[l];
                }
            }
        }
    }
    Riemann { r, low }
}

pub fn ricci(rm: &Riemann) -> Matrix3<f64> {
    Matrix3::from_fn(|j, k| (0..3).map(|i| rm.r[i][j][k][i]).sum())
}

pub fn gram(g: &MetricForm, x: &Vector3<f64>, y: &Vector3<f64>) -> f64 {
    g.inner(x, x) * g.inner(y, y) - g.inner(x, y).powi(2)
}

/// Sectional curvature; `eps_rank` bounds |gram| relative to |x|^2 |y|^2 |g|^2.
pub fn sectional(g: &MetricForm, rm: &Riemann, x: &Vector3<f64>, y: &Vector3<f64>, eps_rank: f64) -> Result<f64> {
    let gr = gram(g, x, y);
    let scale = x.norm_squared() * y.norm_squared() * g.g.amax().powi(2);
    if gr.abs() <= eps_rank * scale {
        return Err(Error::DegeneratePlane(gr));
    }
    Ok(g.inner(&rm.apply(x, y, y), x) / gr)
}

pub fn sample_planes(seed: u64) -> Vec<(Vector3<f64>, Vector3<f64>)> {
    let mut planes = vec![
        (Vector3::x(), Vector3::y()),
        (Vector3::x(), Vector3::z()),
        (Vector3::y(), Vector3::z()),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..RANDOM_PLANES {
        let x = Vector3::from_fn(|_, _| rng.gen_range(-1.0..1.0));
        let y = Vector3::from_fn(|_, _| rng.gen_range(-1.0..1.0));
        planes.push((x, y));
    }
    planes
}

pub fn curvature_report(a: &LieAlgebra3, g: &MetricForm, eps_rank: f64, seed: u64) -> CurvatureReport {
    let conn = levi_civita(a, g);
    let rm = riemann(a, g, &conn);
    let ric = ricci(&rm);
    let ginv = g.inverse();
    let scalar = (ginv * ric).trace();
    let k0 = scalar / 6.0;
    let ricci_residual = (ric - g.g * (2.0 * k0)).amax();
    let ric_scale = ric.amax().max(1.0);
    let ricci_ok = ricci_residual <= 1e-8 * ric_scale;

    let mut samples = Vec::new();
    let mut skipped = 0;
    let mut spread: f64 = 0.0;
    let mut sampling_ok = true;
    for (x, y) in sample_planes(seed) {
        let gr = gram(g, &x, &y);
        match sectional(g, &rm, &x, &y, eps_rank) {
            Ok(k) => {
                // error amplification by small gram determinants
                let scale = x.norm_squared() * y.norm_squared() * g.g.amax().powi(2);
                let amp = (scale / gr.abs()).max(1.0);
                let dev = (k - k0).abs();
                spread = spread.max(dev / amp);
                if dev > 1e-8 * k0.abs().max(1.0) * amp {
                    sampling_ok = false;
                }
                samples.push(PlaneSample { x: x.into(), y: y.into(), gram: gr, k: Some(k) });
            }
            Err(_) => {
                skipped += 1;
                samples.push(PlaneSample { x: x.into(), y: y.into(), gram: gr, k: None });
            }
        }
    }
    let constant_k = if ricci_ok { Some(if k0.abs() < 1e-12 { 0.0 } else { k0 }) } else { None };
    CurvatureReport {
        connection: conn,
        riemann: rm,
        ricci: ric,
        scalar,
        sectional_samples: samples,
        skipped_planes: skipped,
        constant_k,
        ricci_residual,
        sectional_spread: spread,
        tests_disagree: ricci_ok != sampling_ok,
    }
}

/// Returns K when the metric has constant sectional curvature.
pub fn constant_curvature_check(a: &LieAlgebra3, g: &MetricForm) -> Option<f64> {
    curvature_report(a, g, 1e-8, DEFAULT_SAMPLE_SEED).constant_k
}

/// `Γ(v, v) = ∇_v v` for left-invariant extensions.
pub fn gamma_vv(conn: &Connection, v: &Vector3<f64>) -> Vector3<f64> {
    conn.nabla(v, v)
}

pub fn metric_compatibility_residual(g: &MetricForm, conn: &Connection) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                let ej = Vector3::ith(j, 1.0);
                let ek = Vector3::ith(k, 1.0);
                let v = g.inner(&conn.basis(i, j), &ek) + g.inner(&ej, &conn.basis(i, k));
                worst = worst.max(v.abs());
            }
        }
    }
    worst
}

pub fn torsion_residual(a: &LieAlgebra3, conn: &Connection) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            let t = conn.basis(i, j) - conn.basis(j, i) - a.bracket_basis(i, j);
            worst = worst.max(t.amax());
        }
    }
    worst
}

/// Max over the pair symmetries and the first Bianchi identity, in that order.
pub fn riemann_symmetry_residuals(rm: &Riemann) -> (f64, f64) {
    let l = &rm.low;
    let mut sym: f64 = 0.0;
    let mut bianchi: f64 = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                for m in 0..3 {
                    sym = sym
                        .max((l[i][j][k][m] + l[j][i][k][m]).abs())
                        .max((l[i][j][k][m] + l[i][j][m][k]).abs())
                        .max((l[i][j][k][m] - l[k][m][i][j]).abs());
                    bianchi = bianchi.max((rm.r[i][j][k][m] + rm.r[j][k][i][m] + rm.r[k][i][j][m]).abs());
                }
            }
        }
    }
    (sym, bianchi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bianchi::family;
    use crate::Tolerances;

    fn metric(m: Matrix3<f64>) -> MetricForm {
        MetricForm::new(m, &Tolerances::default()).unwrap()
    }

    fn null_pair() -> Matrix3<f64> {
        Matrix3::new(1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 1.0, 0.0)
    }

    #[test]
    fn abelian_is_flat() {
        let g = metric(Matrix3::new(2.0, 0.3, 0.0, 0.3, 1.0, 0.0, 0.0, 0.0, -1.0));
        let c = levi_civita(&LieAlgebra3::abelian(), &g);
        assert!(c.gamma.iter().flatten().flatten().all(|x| *x == 0.0));
        assert_eq!(constant_curvature_check(&LieAlgebra3::abelian(), &g), Some(0.0));
    }

    #[test]
    fn so3_round_connection_and_curvature() {
        let a = family::so3();
        let g = MetricForm::identity();
        let c = levi_civita(&a, &g);
        assert!((c.basis(0, 1) - Vector3::z() * 0.5).amax() < 1e-15);
        assert!((c.basis(1, 2) - Vector3::x() * 0.5).amax() < 1e-15);
        assert!((c.basis(2, 0) - Vector3::y() * 0.5).amax() < 1e-15);
        let rm = riemann(&a, &g, &c);
        let k = sectional(&g, &rm, &Vector3::x(), &Vector3::y(), 1e-8).unwrap();
        assert!((k - 0.25).abs() < 1e-15);
    }

    #[test]
    fn heis_null_form_is_flat() {
        let a = family::heis();
        let g = metric(null_pair());
        let rm = riemann(&a, &g, &levi_civita(&a, &g));
        assert!(rm.r.iter().flatten().flatten().flatten().all(|x| x.abs() < 1e-15));
    }

    #[test]
    fn sol_null_form_is_flat() {
        let a = family::sol();
        let g = metric(null_pair());
        assert_eq!(constant_curvature_check(&a, &g), Some(0.0));
    }

    #[test]
    fn h1_identity_negative_constant() {
        let k = constant_curvature_check(&family::h1(), &MetricForm::identity()).unwrap();
        assert!(k < 0.0);
    }

    #[test]
    fn aff_table_form_negative_constant() {
        let a = family::aff_r_plus_r();
        let g = metric(Matrix3::new(1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 1.0, -1.0));
        let rep = curvature_report(&a, &g, 1e-8, DEFAULT_SAMPLE_SEED);
        let k = rep.constant_k.unwrap();
        assert!(k < 0.0);
        for s in rep.sectional_samples.iter().filter_map(|s| s.k) {
            assert!((s - k).abs() < 1e-6);
        }
    }

    #[test]
    fn e_mu_round_negative_and_heis_not_constant() {
        assert!(constant_curvature_check(&family::e_mu(1.0), &MetricForm::identity()).unwrap() < 0.0);
        assert_eq!(constant_curvature_check(&family::heis(), &MetricForm::identity()), None);
    }
}
