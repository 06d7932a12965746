//! Nondegenerate symmetric bilinear forms of Riemannian or Lorentzian signature.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::Tolerances;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Signature {
    Riemannian,
    Lorentzian,
}

impl Signature {
    pub fn pair(&self) -> (usize, usize) {
        match self {
            Signature::Riemannian => (3, 0),
            Signature::Lorentzian => (2, 1),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MetricForm {
    pub g: Matrix3<f64>,
    pub signature: Signature,
}

impl MetricForm {
    /// Accepts signatures (3,0) and (2,1); anything else is refused.
    pub fn new(g: Matrix3<f64>, tol: &Tolerances) -> Result<Self> {
        let scale = g.amax();
        if !g.iter().all(|x| x.is_finite()) {
            return Err(Error::DegenerateMetric("non-finite entry".into()));
        }
        if scale == 0.0 {
            return Err(Error::DegenerateMetric("zero form".into()));
        }
        let asym = linalg::sym_defect(&g);
        if asym > 1e-12 * scale {
            return Err(Error::DegenerateMetric(format!("not symmetric (defect {asym:e})")));
        }
        let g = (g + g.transpose()) / 2.0;
        let ev = g.symmetric_eigenvalues();
        let min = ev.iter().fold(f64::INFINITY, |m, x| m.min(x.abs()));
        if min <= tol.eps_rank * scale {
            return Err(Error::DegenerateMetric(format!("singular (smallest |eigenvalue| {min:e})")));
        }
        let signature = match linalg::signature(&g) {
            (3, 0) => Signature::Riemannian,
            (2, 1) => Signature::Lorentzian,
            (p, n) => {
                return Err(Error::DegenerateMetric(format!(
                    "signature ({p},{n}) unsupported; use (3,0) or (2,1)"
                )))
            }
        };
        Ok(MetricForm { g, signature })
    }

    pub fn identity() -> Self {
        MetricForm { g: Matrix3::identity(), signature: Signature::Riemannian }
    }

    pub fn inner(&self, x: &Vector3<f64>, y: &Vector3<f64>) -> f64 {
        x.dot(&(self.g * y))
    }

    pub fn inverse(&self) -> Matrix3<f64> {
        self.g.try_inverse().expect("validated nondegenerate")
    }

    /// Pullback `P^T g P`, i.e. the same form written in the basis given by the columns of `p`.
    pub fn transport(&self, p: &Matrix3<f64>) -> Matrix3<f64> {
        p.transpose() * self.g * p
    }

    pub fn is_lorentzian(&self) -> bool {
        self.signature == Signature::Lorentzian
    }
}

/// Human-readable quadratic form such as `(e1)^2+2(e2e3)`, with small integers kept exact.
pub fn render_quadratic(g: &Matrix3<f64>) -> String {
    let mut parts: Vec<String> = Vec::new();
    let fmt_coef = |c: f64| -> String {
        let r = (c * 1e9).round() / 1e9;
        if (r - r.round()).abs() < 1e-12 {
            format!("{}", r.round() as i64)
        } else {
            format!("{r}")
        }
    };
    let mut push = |coef: f64, mono: String| {
        if coef.abs() < 1e-12 {
            return;
        }
        let body = if (coef - 1.0).abs() < 1e-12 {
            mono
        } else if (coef + 1.0).abs() < 1e-12 {
            format!("-{mono}")
        } else {
            format!("{}{mono}", fmt_coef(coef))
        };
        parts.push(body);
    };
    for i in 0..3 {
        push(g[(i, i)], format!("(e{})^2", i + 1));
    }
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        push(2.0 * g[(i, j)], format!("(e{}e{})", i + 1, j + 1));
    }
    if parts.is_empty() {
        return "0".into();
    }
    let mut s = parts[0].clone();
    for p in &parts[1..] {
        if p.starts_with('-') {
            s.push_str(p);
        } else {
            s.push('+');
            s.push_str(p);
        }
    }
    s
}
