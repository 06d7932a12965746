//! Parameterizations of Aut(g) for the preferred bases, in the column convention
//! (column j of P is the image of e_j).

use nalgebra::{Matrix3, Rotation3, Vector3};
use rand::Rng;
use serde::Serialize;

use crate::bianchi::{family, BianchiTag};
use crate::lie::LieAlgebra3;

#[derive(Clone, Debug, Serialize)]
pub struct AutomorphismGroup {
    pub tag: BianchiTag,
    pub param: Option<f64>,
    /// number of continuous parameters
    pub dim: usize,
    /// number of connected components reachable through `component`
    pub components: usize,
    pub description: &'static str,
}

fn m(r: [[f64; 3]; 3]) -> Matrix3<f64> {
    crate::linalg::mat_from_rows(r)
}

/// The non-identity component element of Aut(sl2) used here.
pub fn sl2_flip() -> Matrix3<f64> {
    m([[-1.0, 0.0, 0.0], [0.0, 0.0, 1.0], [0.0, 1.0, 0.0]])
}

/// The component of Aut(sol) exchanging the two eigenlines.
pub fn sol_swap() -> Matrix3<f64> {
    m([[-1.0, 0.0, 0.0], [0.0, 0.0, 1.0], [0.0, 1.0, 0.0]])
}

fn expm(a: &Matrix3<f64>) -> Matrix3<f64> {
    // scaling and squaring with a Taylor core; arguments here are small
    let norm = a.amax();
    let s = if norm > 0.5 { (norm / 0.5).log2().ceil() as i32 } else { 0 };
    let b = a / 2f64.powi(s);
    let mut term = Matrix3::identity();
    let mut sum = Matrix3::identity();
    for k in 1..20 {
        term = term * b / k as f64;
        sum += term;
    }
    for _ in 0..s {
        sum = sum * sum;
    }
    sum
}

impl AutomorphismGroup {
    pub fn of(tag: BianchiTag, param: Option<f64>) -> Self {
        let (dim, components, description) = match tag {
            BianchiTag::R3 => (9, 1, "GL(3,R)"),
            BianchiTag::So3 => (3, 1, "SO(3)"),
            BianchiTag::Sl2 => (3, 2, "{P : P^T k P = k, det P = 1}, k = (e1)^2+2(e2e3)"),
            BianchiTag::Heis => (6, 1, "[[a,b,0],[c,d,0],[e,f,ad-bc]]"),
            BianchiTag::Euc2 => (4, 2, "[[1,0,0],[a,b,-c],[d,c,b]] and [[-1,0,0],[a,-b,c],[d,c,b]]"),
            BianchiTag::Sol => (4, 2, "[[1,0,0],[a,b,0],[c,0,d]] and [[-1,0,0],[a,0,b],[c,d,0]]"),
            BianchiTag::AffRPlusR | BianchiTag::HLambda => (4, 1, "[[1,0,0],[a,b,0],[c,0,d]]"),
            BianchiTag::H1 => (6, 1, "[[1,0,0],[a,b,c],[d,e,f]]"),
            BianchiTag::Psh => (4, 1, "[[1,0,0],[a,b,c],[d,0,b]]"),
            BianchiTag::EMu => (4, 1, "[[1,0,0],[a,b,-c],[d,c,b]]"),
        };
        AutomorphismGroup { tag, param, dim, components, description }
    }

    pub fn algebra(&self) -> LieAlgebra3 {
        family::preferred(self.tag, self.param).expect("valid family")
    }

    /// Group element for parameter vector `x` (length `dim`) in component `component`.
    pub fn element(&self, x: &[f64], component: usize) -> Matrix3<f64> {
        assert_eq!(x.len(), self.dim);
        let c = component % self.components;
        match self.tag {
            BianchiTag::R3 => Matrix3::from_row_slice(x),
            BianchiTag::So3 => Rotation3::new(Vector3::new(x[0], x[1], x[2])).into_inner(),
            BianchiTag::Sl2 => {
                let a = family::sl2();
                let p = expm(&a.ad(&Vector3::new(x[0], x[1], x[2])));
                if c == 1 { p * sl2_flip() } else { p }
            }
            BianchiTag::Heis => {
                let (a, b, cc, d, e, f) = (x[0], x[1], x[2], x[3], x[4], x[5]);
                m([[a, b, 0.0], [cc, d, 0.0], [e, f, a * d - b * cc]])
            }
            BianchiTag::Euc2 => {
                let (a, b, cc, d) = (x[0], x[1], x[2], x[3]);
                if c == 0 {
                    m([[1.0, 0.0, 0.0], [a, b, -cc], [d, cc, b]])
                } else {
                    m([[-1.0, 0.0, 0.0], [a, -b, cc], [d, cc, b]])
                }
            }
            BianchiTag::Sol => {
                let (a, b, cc, d) = (x[0], x[1], x[2], x[3]);
                if c == 0 {
                    m([[1.0, 0.0, 0.0], [a, b, 0.0], [cc, 0.0, d]])
                } else {
                    m([[-1.0, 0.0, 0.0], [a, 0.0, b], [cc, d, 0.0]])
                }
            }
            BianchiTag::AffRPlusR | BianchiTag::HLambda => {
                let (a, b, cc, d) = (x[0], x[1], x[2], x[3]);
                m([[1.0, 0.0, 0.0], [a, b, 0.0], [cc, 0.0, d]])
            }
            BianchiTag::H1 => m([[1.0, 0.0, 0.0], [x[0], x[1], x[2]], [x[3], x[4], x[5]]]),
            BianchiTag::Psh => {
                let (a, b, cc, d) = (x[0], x[1], x[2], x[3]);
                m([[1.0, 0.0, 0.0], [a, b, cc], [d, 0.0, b]])
            }
            BianchiTag::EMu => {
                let (a, b, cc, d) = (x[0], x[1], x[2], x[3]);
                m([[1.0, 0.0, 0.0], [a, b, -cc], [d, cc, b]])
            }
        }
    }

    /// Parameters of the identity element in component 0.
    pub fn identity_params(&self) -> Vec<f64> {
        match self.tag {
            BianchiTag::R3 => vec![1., 0., 0., 0., 1., 0., 0., 0., 1.],
            BianchiTag::So3 | BianchiTag::Sl2 => vec![0.0; 3],
            BianchiTag::Heis => vec![1., 0., 0., 1., 0., 0.],
            BianchiTag::H1 => vec![0., 1., 0., 0., 0., 1.],
            BianchiTag::Euc2 | BianchiTag::EMu | BianchiTag::Psh => vec![0., 1., 0., 0.],
            BianchiTag::Sol | BianchiTag::AffRPlusR | BianchiTag::HLambda => vec![0., 1., 0., 1.],
        }
    }

    /// Random element with condition number at most `max_cond`.
    pub fn sample<R: Rng>(&self, rng: &mut R, max_cond: f64) -> Matrix3<f64> {
        loop {
            let base = self.identity_params();
            let x: Vec<f64> = base.iter().map(|b| b + rng.gen_range(-1.5..1.5)).collect();
            let comp = rng.gen_range(0..self.components);
            let p = self.element(&x, comp);
            if let Some(inv) = p.try_inverse() {
                if p.norm() * inv.norm() <= max_cond {
                    return p;
                }
            }
        }
    }
}
