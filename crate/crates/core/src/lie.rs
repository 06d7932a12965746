//! Structure constants and the elementary invariants of a 3-dimensional Lie algebra.

use nalgebra::{DMatrix, Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::Tolerances;

pub type Structure = [[[f64; 3]; 3]; 3];

/// A real Lie algebra of dimension 3, stored as `c[i][j][k]` with `[e_i, e_j] = sum_k c[i][j][k] e_k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LieAlgebra3 {
    pub c: Structure,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Subspace {
    pub basis: Vec<Vector3<f64>>,
    pub dim: usize,
    /// Smallest retained singular-value ratio; values close to the rank tolerance mean the
    /// dimension decision was marginal.
    #[serde(skip)]
    pub margin: f64,
}

impl Subspace {
    fn from_vectors(vs: &[Vector3<f64>], eps_rank: f64) -> Self {
        let (basis, margin) = linalg::span_basis(vs, eps_rank);
        let dim = basis.len();
        Subspace { basis, dim, margin }
    }

    pub fn contains(&self, v: &Vector3<f64>, eps: f64) -> bool {
        let mut r = *v;
        for b in &self.basis {
            r -= b * b.dot(v);
        }
        r.norm() <= eps * v.norm().max(1.0)
    }
}

#[derive(Clone, Debug)]
pub struct DerivationSpace {
    pub basis: Vec<Matrix3<f64>>,
    pub dim: usize,
}

pub fn max_antisymmetry_defect(c: &Structure) -> f64 {
    let mut m: f64 = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                m = m.max((c[i][j][k] + c[j][i][k]).abs());
            }
        }
    }
    m
}

pub fn jacobi_residual(c: &Structure) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            for l in 0..3 {
                for m in 0..3 {
                    let mut s = 0.0;
                    for k in 0..3 {
                        s += c[i][j][k] * c[k][l][m] + c[j][l][k] * c[k][i][m] + c[l][i][k] * c[k][j][m];
                    }
                    worst = worst.max(s.abs());
                }
            }
        }
    }
    worst
}

impl LieAlgebra3 {
    /// Validating constructor: rejects non-antisymmetric tensors and Jacobi violations.
    pub fn new(c: Structure, tol: &Tolerances) -> Result<Self> {
        let d = max_antisymmetry_defect(&c);
        if d > tol.eps_jac {
            return Err(Error::NotAntisymmetric(d));
        }
        let a = LieAlgebra3 { c };
        let (ok, r) = a.check_jacobi(tol.eps_jac);
        if !ok {
            return Err(Error::NotJacobi(r));
        }
        Ok(a)
    }

    /// Builds from a list of brackets `(i, j, v)` meaning `[e_i, e_j] = v` (zero-based indices).
    /// No validation, used for the hard-coded families.
    pub fn from_brackets(br: &[(usize, usize, [f64; 3])]) -> Self {
        let mut c = [[[0.0; 3]; 3]; 3];
        for &(i, j, v) in br {
            for k in 0..3 {
                c[i][j][k] = v[k];
                c[j][i][k] = -v[k];
            }
        }
        LieAlgebra3 { c }
    }

    pub fn abelian() -> Self {
        LieAlgebra3 { c: [[[0.0; 3]; 3]; 3] }
    }

    pub fn bracket(&self, x: &Vector3<f64>, y: &Vector3<f64>) -> Vector3<f64> {
        let mut out = Vector3::zeros();
        for i in 0..3 {
            for j in 0..3 {
                let w = x[i] * y[j];
                if w != 0.0 {
                    for k in 0..3 {
                        out[k] += w * self.c[i][j][k];
                    }
                }
            }
        }
        out
    }

    pub fn bracket_basis(&self, i: usize, j: usize) -> Vector3<f64> {
        Vector3::new(self.c[i][j][0], self.c[i][j][1], self.c[i][j][2])
    }

    /// Matrix of `ad_x`, so that `ad(x) * y = [x, y]`.
    pub fn ad(&self, x: &Vector3<f64>) -> Matrix3<f64> {
        let mut m = Matrix3::zeros();
        for j in 0..3 {
            let col = self.bracket(x, &Vector3::ith(j, 1.0));
            m.set_column(j, &col);
        }
        m
    }

    pub fn check_jacobi(&self, eps_jac: f64) -> (bool, f64) {
        let r = jacobi_residual(&self.c);
        (r <= eps_jac, r)
    }

    /// Structure constants in the basis given by the columns of `p`.
    pub fn transport(&self, p: &Matrix3<f64>) -> Result<LieAlgebra3> {
        let pinv = p
            .try_inverse()
            .ok_or_else(|| Error::DegenerateInput("basis change is singular".into()))?;
        let mut c = [[[0.0; 3]; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                let b = pinv * self.bracket(&p.column(i).into(), &p.column(j).into());
                for k in 0..3 {
                    c[i][j][k] = b[k];
                }
            }
        }
        Ok(LieAlgebra3 { c })
    }

    pub fn derived_algebra(&self, tol: &Tolerances) -> Subspace {
        let mut vs = Vec::new();
        for (i, j) in [(0, 1), (1, 2), (2, 0)] {
            vs.push(self.bracket_basis(i, j));
        }
        Subspace::from_vectors(&vs, tol.eps_rank)
    }

    pub fn center(&self, tol: &Tolerances) -> Subspace {
        // x central iff ad_{e_i} x = 0 for all i
        let mut a = DMatrix::zeros(9, 3);
        for i in 0..3 {
            let adi = self.ad(&Vector3::ith(i, 1.0));
            a.view_mut((3 * i, 0), (3, 3)).copy_from(&adi);
        }
        let ns = linalg::null_space(&a, tol.eps_rank);
        let vs: Vec<Vector3<f64>> = ns.basis.iter().map(|v| Vector3::new(v[0], v[1], v[2])).collect();
        let dim = vs.len();
        Subspace { basis: vs, dim, margin: ns.smallest_kept }
    }

    pub fn unimodular(&self, tol: &Tolerances) -> bool {
        let scale = self.scale().max(1.0);
        (0..3).all(|i| self.ad(&Vector3::ith(i, 1.0)).trace().abs() <= tol.eps_rank * scale)
    }

    /// Largest absolute structure constant.
    pub fn scale(&self) -> f64 {
        self.c.iter().flatten().flatten().fold(0.0f64, |m, x| m.max(x.abs()))
    }

    pub fn killing_form(&self) -> Matrix3<f64> {
        let ads: Vec<Matrix3<f64>> = (0..3).map(|i| self.ad(&Vector3::ith(i, 1.0))).collect();
        let mut k = Matrix3::zeros();
        for i in 0..3 {
            for j in 0..3 {
                k[(i, j)] = (ads[i] * ads[j]).trace();
            }
        }
        k
    }

    /// Rows of the linear system `D[e_i,e_j] - [De_i,e_j] - [e_i,De_j] = 0` in the 9 entries of D
    /// (row-major, `D[(r, s)]` at index `3r + s`).
    pub fn derivation_system(&self) -> DMatrix<f64> {
        let mut rows = DMatrix::zeros(27, 9);
        let mut r = 0;
        for i in 0..3 {
            for j in 0..3 {
                for m in 0..3 {
                    // component m of D[e_i,e_j]: sum_k c_ij^k D[m][k]
                    for k in 0..3 {
                        rows[(r, 3 * m + k)] += self.c[i][j][k];
                    }
                    // [De_i, e_j]_m = sum_a D[a][i] c_aj^m
                    for a in 0..3 {
                        rows[(r, 3 * a + i)] -= self.c[a][j][m];
                        rows[(r, 3 * a + j)] -= self.c[i][a][m];
                    }
                    r += 1;
                }
            }
        }
        rows
    }

    pub fn derivation_space(&self, tol: &Tolerances) -> DerivationSpace {
        let ns = linalg::null_space(&self.derivation_system(), tol.eps_rank);
        let basis: Vec<Matrix3<f64>> = ns.basis.iter().map(vec9_to_mat).collect();
        let dim = basis.len();
        DerivationSpace { basis, dim }
    }

    /// Max residual of the derivation law for `d` over basis pairs.
    pub fn derivation_residual(&self, d: &Matrix3<f64>) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                let ei = Vector3::ith(i, 1.0);
                let ej = Vector3::ith(j, 1.0);
                let lhs = d * self.bracket(&ei, &ej);
                let rhs = self.bracket(&(d * ei), &ej) + self.bracket(&ei, &(d * ej));
                worst = worst.max((lhs - rhs).amax());
            }
        }
        worst
    }

    /// Max deviation of `p` from being an automorphism (transported constants vs original).
    pub fn automorphism_residual(&self, p: &Matrix3<f64>) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                let pi: Vector3<f64> = p.column(i).into();
                let pj: Vector3<f64> = p.column(j).into();
                let lhs = self.bracket(&pi, &pj);
                let rhs = p * self.bracket_basis(i, j);
                worst = worst.max((lhs - rhs).amax());
            }
        }
        worst
    }

    pub fn max_difference(&self, other: &LieAlgebra3) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    m = m.max((self.c[i][j][k] - other.c[i][j][k]).abs());
                }
            }
        }
        m
    }
}

pub fn vec9_to_mat(v: &nalgebra::DVector<f64>) -> Matrix3<f64> {
    Matrix3::from_fn(|r, s| v[3 * r + s])
}
