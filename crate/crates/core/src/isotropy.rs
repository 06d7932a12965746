//! Metric-skew endomorphisms: type classification and skew derivations.

use nalgebra::{DMatrix, Matrix3, Vector3};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lie::{vec9_to_mat, LieAlgebra3};
use crate::linalg;
use crate::metric::MetricForm;
use crate::Tolerances;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IsotropyType {
    Elliptic,
    Hyperbolic,
    Parabolic,
}

impl IsotropyType {
    /// Name used in the tables, where parabolic elements are called nilpotent.
    pub fn table_name(&self) -> &'static str {
        match self {
            IsotropyType::Elliptic => "elliptic",
            IsotropyType::Hyperbolic => "hyperbolic",
            IsotropyType::Parabolic => "nilpotent",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Causal {
    Spacelike,
    Timelike,
    Lightlike,
}

#[derive(Clone, Debug, Serialize)]
pub struct IsotropyElement {
    pub matrix: Matrix3<f64>,
    #[serde(rename = "type")]
    pub kind: IsotropyType,
    pub invariant_line: Vector3<f64>,
    pub causal_character_of_line: Causal,
    pub trace: f64,
    pub rank: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct SkewDerivationSpace {
    pub basis: Vec<Matrix3<f64>>,
    pub dim: usize,
}

pub fn skew_defect(u: &Matrix3<f64>, g: &MetricForm) -> f64 {
    (g.g * u + u.transpose() * g.g).amax()
}

pub fn causal(g: &MetricForm, v: &Vector3<f64>, eps: f64) -> Causal {
    let n = g.inner(v, v) / (v.norm_squared() * g.g.amax());
    if n > eps {
        Causal::Spacelike
    } else if n < -eps {
        Causal::Timelike
    } else {
        Causal::Lightlike
    }
}

pub fn classify_type(u: &Matrix3<f64>, g: &MetricForm, tol: &Tolerances) -> Result<IsotropyElement> {
    let size = u.norm();
    if size <= 1e-12 {
        return Err(Error::ZeroMatrix);
    }
    let defect = skew_defect(u, g);
    if defect > tol.eps_jac * size * g.g.amax().max(1.0) {
        return Err(Error::NotSkew(defect));
    }
    let un = u / size;
    // characteristic polynomial x (x^2 + p) for a traceless skew map
    let p = un[(0, 0)] * un[(1, 1)] - un[(0, 1)] * un[(1, 0)] + un[(0, 0)] * un[(2, 2)]
        - un[(0, 2)] * un[(2, 0)]
        + un[(1, 1)] * un[(2, 2)]
        - un[(1, 2)] * un[(2, 1)];
    let lam = p.abs().sqrt();
    let kind = if !g.is_lorentzian() {
        IsotropyType::Elliptic
    } else if lam <= tol.eps_eig {
        IsotropyType::Parabolic
    } else if p < 0.0 {
        IsotropyType::Hyperbolic
    } else {
        IsotropyType::Elliptic
    };
    let u2 = un * un;
    let line = if kind == IsotropyType::Parabolic && u2.amax() > tol.eps_eig {
        let j = (0..3).max_by(|a, b| u2.column(*a).norm().partial_cmp(&u2.column(*b).norm()).unwrap()).unwrap();
        u2.column(j).normalize()
    } else {
        let svd = un.svd(false, true);
        let vt = svd.v_t.unwrap();
        let i = (0..3)
            .min_by(|a, b| svd.singular_values[*a].partial_cmp(&svd.singular_values[*b]).unwrap())
            .unwrap();
        vt.row(i).transpose()
    };
    let c = causal(g, &line, 1e-7);
    Ok(IsotropyElement {
        matrix: *u,
        kind,
        invariant_line: line,
        causal_character_of_line: c,
        trace: u.trace(),
        rank: linalg::rank3(u, tol.eps_rank),
    })
}

/// Rows `(g U + U^T g)_{ab} = 0`, a <= b, in the row-major unknowns of U.
fn skew_rows(g: &Matrix3<f64>) -> DMatrix<f64> {
    let mut rows = DMatrix::zeros(6, 9);
    let mut r = 0;
    for a in 0..3 {
        for b in a..3 {
            for m in 0..3 {
                rows[(r, 3 * m + b)] += g[(a, m)];
                rows[(r, 3 * m + a)] += g[(m, b)];
            }
            r += 1;
        }
    }
    rows
}

pub fn skew_derivations(a: &LieAlgebra3, g: &MetricForm, tol: &Tolerances) -> SkewDerivationSpace {
    let der = a.derivation_system();
    let sk = skew_rows(&g.g);
    // balance the two blocks so neither dominates the relative rank test
    let ds = der.amax().max(1e-300);
    let gs = sk.amax();
    let mut m = DMatrix::zeros(33, 9);
    m.view_mut((0, 0), (27, 9)).copy_from(&(der / ds));
    m.view_mut((27, 0), (6, 9)).copy_from(&(sk / gs));
    let ns = linalg::null_space(&m, tol.eps_rank);
    let basis: Vec<Matrix3<f64>> = ns.basis.iter().map(vec9_to_mat).collect();
    let dim = basis.len();
    SkewDerivationSpace { basis, dim }
}

const SYM_INDEX: [(usize, usize); 6] = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)];

fn sym_from6(v: &[f64]) -> Matrix3<f64> {
    let mut q = Matrix3::zeros();
    for (k, &(i, j)) in SYM_INDEX.iter().enumerate() {
        q[(i, j)] = v[k];
        q[(j, i)] = v[k];
    }
    q
}

/// Symmetric forms q with `q(Ux, y) + q(x, Uy) = 0`.
pub fn metric_constraints_from_isotropy(u: &Matrix3<f64>, tol: &Tolerances) -> Vec<Matrix3<f64>> {
    let mut m = DMatrix::zeros(9, 6);
    for (k, _) in SYM_INDEX.iter().enumerate() {
        let mut e = [0.0; 6];
        e[k] = 1.0;
        let q = sym_from6(&e);
        let r = q * u + u.transpose() * q;
        for a in 0..3 {
            for b in 0..3 {
                m[(3 * a + b, k)] = r[(a, b)];
            }
        }
    }
    let ns = linalg::null_space(&m, tol.eps_rank);
    ns.basis.iter().map(|v| sym_from6(v.as_slice())).collect()
}

/// Euclidean distance from `q` to the span of `basis` (symmetric matrices as 6-vectors).
pub fn distance_to_span(q: &Matrix3<f64>, basis: &[Matrix3<f64>]) -> f64 {
    if basis.is_empty() {
        return q.norm();
    }
    let mut a = DMatrix::zeros(9, basis.len());
    for (c, b) in basis.iter().enumerate() {
        for (k, x) in b.iter().enumerate() {
            a[(k, c)] = *x;
        }
    }
    let y = nalgebra::DVector::from_iterator(9, q.iter().cloned());
    let svd = a.clone().svd(true, true);
    let coef = svd.solve(&y, 1e-12).expect("svd solve");
    (a * coef - y).norm()
}
