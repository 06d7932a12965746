//! Reduction of a metric to its canonical representative under scaling and automorphisms.

pub mod forms;
pub mod plane_wave;
mod reduce;
pub mod tables;

use argmin::core::{CostFunction, Executor};
use argmin::solver::neldermead::NelderMead;
use nalgebra::Matrix3;
use serde::Serialize;

use crate::automorphism::AutomorphismGroup;
use crate::bianchi::{BianchiClass, BianchiTag};
use crate::lie::LieAlgebra3;
use crate::linalg::mat_to_rows;
use crate::metric::MetricForm;
use crate::{Error, Result, Tolerances};
pub use forms::{CanonicalForm, FormId};

/// Closed forms are accepted up to this relative residual before the optimizer is tried.
const CLOSED_FORM_RESIDUAL: f64 = 1e-7;
/// The optimizer result is accepted up to this relative residual.
const NUMERIC_RESIDUAL: f64 = 1e-5;

#[derive(Clone, Debug, Serialize)]
pub struct NormalFormMatch {
    pub family: BianchiTag,
    pub family_param: Option<f64>,
    pub form: CanonicalForm,
    pub text: &'static str,
    pub rendered: String,
    pub canonical_metric: [[f64; 3]; 3],
    /// `scale * witness^T g_pref witness` equals the canonical metric
    pub scale: f64,
    /// automorphism of the preferred algebra
    pub witness: [[f64; 3]; 3],
    /// basis change from the input basis straight to the canonical basis
    pub witness_input: [[f64; 3]; 3],
    pub residual: f64,
    pub method: &'static str,
    pub boundary_flags: Vec<String>,
}

impl NormalFormMatch {
    pub fn witness_matrix(&self) -> Matrix3<f64> {
        crate::linalg::mat_from_rows(self.witness)
    }
    pub fn witness_input_matrix(&self) -> Matrix3<f64> {
        crate::linalg::mat_from_rows(self.witness_input)
    }
}

fn relative_residual(g: &Matrix3<f64>, k: f64, w: &Matrix3<f64>, target: &Matrix3<f64>) -> f64 {
    (w.transpose() * g * w * k - target).amax() / target.amax().max(1.0)
}

/// Reduces `g` (written in the input basis of `a`) to the canonical form of its orbit.
pub fn reduce(a: &LieAlgebra3, g: &MetricForm, class: &BianchiClass, tol: &Tolerances) -> Result<NormalFormMatch> {
    let p = class.basis_change;
    let pref = class.preferred_algebra();
    let gp = g.transport(&p);
    let gp = (gp + gp.transpose()) * 0.5;
    let closed = reduce::reduce_closed(class.tag, &gp);
    let mut flags = class.boundary_flags.clone();
    flags.extend(closed.flags.iter().cloned());
    let target = closed.form.matrix();
    let res = relative_residual(&gp, closed.k, &closed.w, &target);
    let aut_res = pref.automorphism_residual(&closed.w);
    let admissible = FormId::admissible(class.tag).contains(&closed.form.id);
    let (form, k, w, residual, method) = if res <= CLOSED_FORM_RESIDUAL && aut_res <= 1e-7 * closed.w.amax().powi(2).max(1.0) && admissible {
        (closed.form, closed.k, closed.w, res, "closed_form")
    } else {
        flags.push(format!("closed form rejected (residual {res:e}, automorphism residual {aut_res:e}, admissible {admissible})"));
        let best = numeric_search(class, &gp, &closed)?;
        if best.3 > NUMERIC_RESIDUAL {
            return Err(Error::ReductionFailed {
                residual: best.3,
                best_form: best.0.rendered(),
            });
        }
        (best.0, best.1, best.2, best.3, "numerical")
    };
    let _ = a;
    let _ = tol;
    Ok(NormalFormMatch {
        family: class.tag,
        family_param: class.param,
        text: form.id.template(),
        rendered: form.rendered(),
        canonical_metric: mat_to_rows(&form.matrix()),
        scale: k,
        witness: mat_to_rows(&w),
        witness_input: mat_to_rows(&(p * w)),
        residual,
        method,
        boundary_flags: flags,
        form,
    })
}

#[derive(Clone, Copy)]
struct Objective<'a> {
    group: &'a AutomorphismGroup,
    component: usize,
    id: FormId,
    g: &'a Matrix3<f64>,
}

impl Objective<'_> {
    fn split<'b>(&self, x: &'b [f64]) -> (&'b [f64], f64, &'b [f64]) {
        let d = self.group.dim;
        (&x[..d], x[d], &x[d + 1..])
    }
    fn residual(&self, x: &[f64]) -> f64 {
        let (ax, k, fx) = self.split(x);
        let w = self.group.element(ax, self.component);
        let form = CanonicalForm::new(self.id, &self.snap(fx));
        let t = form.matrix();
        let res = (w.transpose() * self.g * w * k - t).norm();
        // keep the witness away from singular matrices
        let det = w.determinant().abs();
        if det < 1e-6 { res + 1.0 / det.max(1e-300) } else { res }
    }
    /// Discrete sign parameters are rounded.
    fn snap(&self, fx: &[f64]) -> Vec<f64> {
        self.id
            .param_names()
            .iter()
            .zip(fx)
            .map(|(n, v)| if *n == "eps" { if *v < 0.0 { -1.0 } else { 1.0 } } else { *v })
            .collect()
    }
}

impl CostFunction for Objective<'_> {
    type Param = Vec<f64>;
    type Output = f64;
    fn cost(&self, x: &Self::Param) -> std::result::Result<f64, argmin::core::Error> {
        Ok(self.residual(x))
    }
}

fn nelder_mead(obj: &Objective, start: Vec<f64>) -> (Vec<f64>, f64) {
    let mut simplex = vec![start.clone()];
    for i in 0..start.len() {
        let mut v = start.clone();
        v[i] += if v[i].abs() > 0.1 { 0.2 * v[i] } else { 0.1 };
        simplex.push(v);
    }
    let solver = NelderMead::new(simplex).with_sd_tolerance(1e-14).expect("valid tolerance");
    match Executor::new(*obj, solver).configure(|s| s.max_iters(4000)).run() {
        Ok(r) => {
            let st = r.state();
            let best = st.best_param.clone().unwrap_or(start);
            let c = obj.residual(&best);
            (best, c)
        }
        Err(_) => {
            let c = obj.residual(&start);
            (start, c)
        }
    }
}

/// Searches automorphism parameters, scale and form parameters for every admissible form,
/// started from the closed-form guess and from the identity.
fn numeric_search(
    class: &BianchiClass,
    gp: &Matrix3<f64>,
    guess: &reduce::Reduced,
) -> Result<(CanonicalForm, f64, Matrix3<f64>, f64)> {
    let group = AutomorphismGroup::of(class.tag, class.param);
    let mut best: Option<(CanonicalForm, f64, Matrix3<f64>, f64)> = None;
    for &id in FormId::admissible(class.tag) {
        for component in 0..group.components {
            for k0 in [1.0 / gp.amax(), -1.0 / gp.amax()] {
                let obj = Objective { group: &group, component, id, g: gp };
                let mut start = group.identity_params();
                start.push(k0);
                let fp: Vec<f64> = if guess.form.id == id {
                    id.param_names().iter().map(|n| guess.form.get(n)).collect()
                } else {
                    vec![0.5; id.param_names().len()]
                };
                start.extend(fp);
                let mut x = start;
                let mut c = f64::INFINITY;
                // restarts refresh the simplex after collapse
                for _ in 0..4 {
                    let (nx, nc) = nelder_mead(&obj, x.clone());
                    x = nx;
                    let stalled = (c - nc).abs() <= 1e-15;
                    c = nc;
                    if stalled {
                        break;
                    }
                }
                let (ax, k, fx) = obj.split(&x);
                let w = group.element(ax, component);
                let form = CanonicalForm::new(id, &obj.snap(fx));
                let rel = relative_residual(gp, k, &w, &form.matrix());
                if best.as_ref().is_none_or(|b| rel < b.3) {
                    best = Some((form, k, w, rel));
                }
            }
        }
    }
    best.ok_or(Error::ReductionFailed { residual: f64::INFINITY, best_form: String::new() })
}
