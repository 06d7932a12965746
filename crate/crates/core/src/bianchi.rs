//! Bianchi classification of 3-dimensional real Lie algebras.

use nalgebra::{Matrix2, Matrix3, SymmetricEigen, Vector2, Vector3};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::lie::LieAlgebra3;
use crate::linalg;
use crate::Tolerances;

/// Relative width of the ambiguity band above each hard threshold.
const BAND: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BianchiTag {
    R3,
    #[serde(rename = "so3")]
    So3,
    #[serde(rename = "sl2")]
    Sl2,
    #[serde(rename = "heis")]
    Heis,
    #[serde(rename = "euc2")]
    Euc2,
    #[serde(rename = "sol")]
    Sol,
    #[serde(rename = "affR_plus_R")]
    AffRPlusR,
    #[serde(rename = "h1")]
    H1,
    #[serde(rename = "psh")]
    Psh,
    #[serde(rename = "h_lambda")]
    HLambda,
    #[serde(rename = "e_mu")]
    EMu,
}

impl BianchiTag {
    pub const ALL: [BianchiTag; 11] = [
        BianchiTag::R3,
        BianchiTag::So3,
        BianchiTag::Sl2,
        BianchiTag::Heis,
        BianchiTag::Euc2,
        BianchiTag::Sol,
        BianchiTag::AffRPlusR,
        BianchiTag::H1,
        BianchiTag::Psh,
        BianchiTag::HLambda,
        BianchiTag::EMu,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            BianchiTag::R3 => "R3",
            BianchiTag::So3 => "so3",
            BianchiTag::Sl2 => "sl2",
            BianchiTag::Heis => "heis",
            BianchiTag::Euc2 => "euc2",
            BianchiTag::Sol => "sol",
            BianchiTag::AffRPlusR => "affR_plus_R",
            BianchiTag::H1 => "h1",
            BianchiTag::Psh => "psh",
            BianchiTag::HLambda => "h_lambda",
            BianchiTag::EMu => "e_mu",
        }
    }

    pub fn has_param(&self) -> bool {
        matches!(self, BianchiTag::HLambda | BianchiTag::EMu)
    }
}

impl fmt::Display for BianchiTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BianchiTag {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        BianchiTag::ALL
            .iter()
            .find(|t| t.name() == s)
            .copied()
            .ok_or_else(|| Error::InvalidInput(format!("unknown family tag {s:?}")))
    }
}

/// The preferred bases of the eleven families.
pub mod family {
    use super::*;

    pub fn so3() -> LieAlgebra3 {
        LieAlgebra3::from_brackets(&[(0, 1, [0., 0., 1.]), (1, 2, [1., 0., 0.]), (2, 0, [0., 1., 0.])])
    }
    pub fn sl2() -> LieAlgebra3 {
        LieAlgebra3::from_brackets(&[(0, 1, [0., 1., 0.]), (2, 0, [0., 0., 1.]), (1, 2, [1., 0., 0.])])
    }
    pub fn heis() -> LieAlgebra3 {
        LieAlgebra3::from_brackets(&[(0, 1, [0., 0., 1.])])
    }
    pub fn euc2() -> LieAlgebra3 {
        LieAlgebra3::from_brackets(&[(0, 1, [0., 0., 1.]), (2, 0, [0., 1., 0.])])
    }
    pub fn sol() -> LieAlgebra3 {
        LieAlgebra3::from_brackets(&[(0, 1, [0., 1., 0.]), (2, 0, [0., 0., 1.])])
    }
    pub fn aff_r_plus_r() -> LieAlgebra3 {
        LieAlgebra3::from_brackets(&[(0, 1, [0., 1., 0.])])
    }
    pub fn h1() -> LieAlgebra3 {
        LieAlgebra3::from_brackets(&[(0, 1, [0., 1., 0.]), (0, 2, [0., 0., 1.])])
    }
    pub fn psh() -> LieAlgebra3 {
        LieAlgebra3::from_brackets(&[(0, 1, [0., 1., 0.]), (0, 2, [0., 1., 1.])])
    }
    pub fn h_lambda(l: f64) -> LieAlgebra3 {
        LieAlgebra3::from_brackets(&[(0, 1, [0., 1., 0.]), (0, 2, [0., 0., l])])
    }
    pub fn e_mu(m: f64) -> LieAlgebra3 {
        LieAlgebra3::from_brackets(&[(0, 1, [0., m, 1.]), (0, 2, [0., -1., m])])
    }

    /// Preferred-basis algebra for a tag; `param` is required for h_lambda and e_mu.
    pub fn preferred(tag: BianchiTag, param: Option<f64>) -> Result<LieAlgebra3> {
        let need = || param.ok_or_else(|| Error::InvalidInput(format!("family {tag} needs a param")));
        Ok(match tag {
            BianchiTag::R3 => LieAlgebra3::abelian(),
            BianchiTag::So3 => so3(),
            BianchiTag::Sl2 => sl2(),
            BianchiTag::Heis => heis(),
            BianchiTag::Euc2 => euc2(),
            BianchiTag::Sol => sol(),
            BianchiTag::AffRPlusR => aff_r_plus_r(),
            BianchiTag::H1 => h1(),
            BianchiTag::Psh => psh(),
            BianchiTag::HLambda => {
                let l = need()?;
                if !(l.abs() < 1.0 && l != 0.0) {
                    return Err(Error::InvalidInput(format!("lambda = {l} outside 0 < |lambda| < 1")));
                }
                h_lambda(l)
            }
            BianchiTag::EMu => {
                let m = need()?;
                if m <= 0.0 {
                    return Err(Error::InvalidInput(format!("mu = {m} must be positive")));
                }
                e_mu(m)
            }
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BianchiClass {
    pub tag: BianchiTag,
    pub param: Option<f64>,
    /// Columns are the preferred basis vectors written in the input basis.
    pub basis_change: Matrix3<f64>,
    /// Decisions that landed close to a threshold.
    pub boundary_flags: Vec<String>,
}

impl BianchiClass {
    pub fn preferred_algebra(&self) -> LieAlgebra3 {
        family::preferred(self.tag, self.param).expect("classifier emits valid params")
    }
}

/// Canonical shape of `ad_T` restricted to a 2-dimensional abelian ideal.
#[derive(Clone, Debug, PartialEq)]
pub enum AdShape {
    /// eigenvalues 1 and lambda, `lambda` in [-1, 1]
    Diagonal { lambda: f64 },
    /// single eigenvalue 1 with a nontrivial Jordan block
    Jordan,
    /// eigenvalues mu ± i, mu >= 0
    RotationDilation { mu: f64 },
}

#[derive(Clone, Debug)]
pub struct ScaledAd {
    pub shape: AdShape,
    pub t: Vector3<f64>,
    pub e2: Vector3<f64>,
    pub e3: Vector3<f64>,
    pub flags: Vec<String>,
}

/// Rescales the transverse vector `t` so that `ad_t` on the ideal `n` takes a canonical form,
/// and picks the matching basis of `n`.
pub fn normalize_ad_scaling(a: &LieAlgebra3, t: &Vector3<f64>, n: &[Vector3<f64>; 2]) -> Result<ScaledAd> {
    // coordinates in n via least squares against the (not necessarily orthonormal) basis
    let nb = nalgebra::Matrix3x2::from_columns(&[n[0], n[1]]);
    let pinv = (nb.transpose() * nb).try_inverse().ok_or_else(|| Error::DegenerateInput("ideal basis is singular".into()))?
        * nb.transpose();
    let coords = |v: Vector3<f64>| -> Vector2<f64> { pinv * v };
    let m = Matrix2::from_columns(&[coords(a.bracket(t, &n[0])), coords(a.bracket(t, &n[1]))]);
    let from = |v: Vector2<f64>| -> Vector3<f64> { n[0] * v[0] + n[1] * v[1] };
    let size = m.abs().max();
    if size == 0.0 {
        return Err(Error::DegenerateInput("ad_T vanishes on the derived algebra".into()));
    }
    let mut flags = Vec::new();
    let tr = m.trace();
    let det = m.determinant();
    if det.abs() <= BAND * size * size {
        return Err(Error::DegenerateInput(format!("ad_T is nearly singular on the derived algebra (det {det:e})")));
    }
    let disc = tr * tr - 4.0 * det;
    let rel = disc.abs() / (tr * tr + 4.0 * det.abs());
    let double_eps = 1e-9;
    if disc < 0.0 && rel > double_eps {
        let re = tr / 2.0;
        let im = (-disc).sqrt() / 2.0;
        let s = if re < 0.0 { -1.0 } else { 1.0 };
        let mut mu = re.abs() / im;
        if mu <= double_eps {
            mu = 0.0;
        } else if mu <= BAND {
            flags.push(format!("mu = {mu:e} is close to the euc2 boundary"));
        }
        let ms = m * (s / im);
        let e2v = Vector2::new(1.0, 0.0);
        let e3v = (ms - Matrix2::identity() * mu) * e2v;
        if rel <= BAND {
            flags.push("rotation part nearly vanishes".into());
        }
        return Ok(ScaledAd { shape: AdShape::RotationDilation { mu }, t: t * (s / im), e2: from(e2v), e3: from(e3v), flags });
    }
    if rel <= double_eps {
        let l = tr / 2.0;
        let ms = m / l;
        let nil = ms - Matrix2::identity();
        let t2 = t / l;
        if nil.abs().max() <= 1e-7 {
            if rel > 0.0 && rel > 1e-12 {
                flags.push("eigenvalues nearly coincide".into());
            }
            return Ok(ScaledAd { shape: AdShape::Diagonal { lambda: 1.0 }, t: t2, e2: n[0], e3: n[1], flags });
        }
        if nil.abs().max() <= 1e-5 {
            flags.push("Jordan block is nearly trivial".into());
        }
        let c0 = nil * Vector2::new(1.0, 0.0);
        let c1 = nil * Vector2::new(0.0, 1.0);
        let e3v = if c0.norm() >= c1.norm() { Vector2::new(1.0, 0.0) } else { Vector2::new(0.0, 1.0) };
        let e2v = nil * e3v;
        return Ok(ScaledAd { shape: AdShape::Jordan, t: t2, e2: from(e2v), e3: from(e3v), flags });
    }
    if rel <= BAND {
        flags.push("eigenvalues nearly coincide".into());
    }
    let sd = disc.max(0.0).sqrt();
    let (mut l1, mut l2) = ((tr + sd) / 2.0, (tr - sd) / 2.0);
    if l2.abs() > l1.abs() {
        std::mem::swap(&mut l1, &mut l2);
    }
    let eigvec = |l: f64| -> Vector2<f64> {
        let a = Vector2::new(m[(0, 1)], l - m[(0, 0)]);
        let b = Vector2::new(l - m[(1, 1)], m[(1, 0)]);
        if a.norm() >= b.norm() { a } else { b }
    };
    let mut lambda = l2 / l1;
    if (lambda + 1.0).abs() <= double_eps {
        lambda = -1.0;
    } else if (lambda + 1.0).abs() <= BAND {
        flags.push(format!("lambda = {lambda} is close to the sol boundary"));
    }
    Ok(ScaledAd {
        shape: AdShape::Diagonal { lambda },
        t: t / l1,
        e2: from(eigvec(l1)),
        e3: from(eigvec(l2)),
        flags,
    })
}

fn band_check(margin: f64, what: &str) -> Result<()> {
    if margin < BAND {
        return Err(Error::DegenerateInput(format!("{what}: singular value ratio {margin:e} inside the tolerance band")));
    }
    Ok(())
}

/// Classifies `a` and returns a basis change to the preferred basis of its family.
pub fn classify(a: &LieAlgebra3, tol: &Tolerances) -> Result<BianchiClass> {
    let (ok, r) = a.check_jacobi(tol.eps_jac);
    if !ok {
        return Err(Error::NotJacobi(r));
    }
    let d = a.derived_algebra(tol);
    if d.dim > 0 {
        band_check(d.margin, "derived algebra")?;
    }
    let mut flags = Vec::new();
    let (tag, param, p) = match d.dim {
        0 => (BianchiTag::R3, None, Matrix3::identity()),
        3 => classify_simple(a)?,
        1 => {
            let y = d.basis[0];
            let ady = a.ad(&y);
            if ady.amax() <= 1e-7 * a.scale() {
                // heis: [x1, x2] = k y
                let x1 = linalg::any_orthogonal(&y);
                let x2 = y.cross(&x1).normalize();
                let k = a.bracket(&x1, &x2).dot(&y) / y.norm_squared();
                (BianchiTag::Heis, None, Matrix3::from_columns(&[x1 / k, x2, y]))
            } else {
                let z = a.center(tol);
                if z.dim != 1 {
                    return Err(Error::DegenerateInput(format!("center has dimension {} for a one-dimensional derived algebra", z.dim)));
                }
                band_check(z.margin, "center")?;
                // [x, y] = alpha(x) y
                let alpha: Vec<f64> = (0..3)
                    .map(|i| a.bracket(&Vector3::ith(i, 1.0), &y).dot(&y) / y.norm_squared())
                    .collect();
                let i = (0..3).max_by(|i, j| alpha[*i].abs().partial_cmp(&alpha[*j].abs()).unwrap()).unwrap();
                let e1 = Vector3::ith(i, 1.0) / alpha[i];
                (BianchiTag::AffRPlusR, None, Matrix3::from_columns(&[e1, y, z.basis[0]]))
            }
        }
        _ => {
            let n = [d.basis[0], d.basis[1]];
            let t = n[0].cross(&n[1]).normalize();
            let s = normalize_ad_scaling(a, &t, &n)?;
            flags.extend(s.flags.iter().cloned());
            let p = Matrix3::from_columns(&[s.t, s.e2, s.e3]);
            match s.shape {
                AdShape::RotationDilation { mu } if mu == 0.0 => (BianchiTag::Euc2, None, p),
                AdShape::RotationDilation { mu } => (BianchiTag::EMu, Some(mu), p),
                AdShape::Jordan => (BianchiTag::Psh, None, p),
                AdShape::Diagonal { lambda } if lambda == 1.0 => (BianchiTag::H1, None, p),
                AdShape::Diagonal { lambda } if lambda == -1.0 => (BianchiTag::Sol, None, p),
                AdShape::Diagonal { lambda } => (BianchiTag::HLambda, Some(lambda), p),
            }
        }
    };
    let mut class = BianchiClass { tag, param, basis_change: p, boundary_flags: flags };
    // keep the input basis when it already is the preferred one
    if a.max_difference(&class.preferred_algebra()) <= tol.eps_jac {
        class.basis_change = Matrix3::identity();
    }
    let p = class.basis_change;
    let got = a.transport(&p)?;
    let resid = got.max_difference(&class.preferred_algebra());
    let cond = p.norm() * p.try_inverse().map(|q| q.norm()).unwrap_or(f64::INFINITY);
    if resid > 1e-7 * cond.max(1.0) {
        return Err(Error::DegenerateInput(format!("classification as {tag} does not reproduce the brackets (residual {resid:e})")));
    }
    Ok(class)
}

fn classify_simple(a: &LieAlgebra3) -> Result<(BianchiTag, Option<f64>, Matrix3<f64>)> {
    let k = a.killing_form();
    let e = SymmetricEigen::new(k);
    let kmax = e.eigenvalues.amax();
    if e.eigenvalues.iter().any(|x| x.abs() <= BAND * kmax) {
        return Err(Error::DegenerateInput("Killing form nearly degenerate on a perfect algebra".into()));
    }
    if e.eigenvalues.iter().all(|x| *x < 0.0) {
        // -K/2-orthonormal basis, oriented so that [f1, f2] = +f3
        let mut p = Matrix3::zeros();
        for c in 0..3 {
            p.set_column(c, &(e.eigenvectors.column(c) / (-e.eigenvalues[c] / 2.0).sqrt()));
        }
        let t = a.transport(&p)?;
        if t.c[0][1][2] < 0.0 {
            let c2 = -p.column(2);
            p.set_column(2, &c2);
        }
        return Ok((BianchiTag::So3, None, p));
    }
    let i = (0..3).max_by(|i, j| e.eigenvalues[*i].partial_cmp(&e.eigenvalues[*j]).unwrap()).unwrap();
    let x: Vector3<f64> = e.eigenvectors.column(i) * (2.0 / e.eigenvalues[i]).sqrt();
    let adx = a.ad(&x);
    let eig_vec = |l: f64| -> Result<Vector3<f64>> {
        let m = adx - Matrix3::identity() * l;
        let ns = linalg::null_space(&nalgebra::DMatrix::from_fn(3, 3, |r, c| m[(r, c)]), 1e-6);
        if ns.basis.len() != 1 {
            return Err(Error::DegenerateInput("ad_x is not split on sl2".into()));
        }
        let v = &ns.basis[0];
        Ok(Vector3::new(v[0], v[1], v[2]))
    };
    let y = eig_vec(1.0)?;
    let z = eig_vec(-1.0)?;
    let kk = a.bracket(&y, &z).dot(&x) / x.norm_squared();
    Ok((BianchiTag::Sl2, None, Matrix3::from_columns(&[x, y / kk, z])))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn psh_is_already_preferred() {
        let c = classify(&family::psh(), &tol()).unwrap();
        assert_eq!(c.tag, BianchiTag::Psh);
        assert!((c.basis_change - Matrix3::identity()).amax() < 1e-12);
    }

    #[test]
    fn abelian_is_r3() {
        assert_eq!(classify(&LieAlgebra3::abelian(), &tol()).unwrap().tag, BianchiTag::R3);
    }

    #[test]
    fn transported_h_half() {
        let p0 = Matrix3::new(1.0, 2.0, 0.5, -1.0, 0.3, 1.0, 0.2, 0.0, 2.0);
        let a = family::h_lambda(0.5).transport(&p0).unwrap();
        let c = classify(&a, &tol()).unwrap();
        assert_eq!(c.tag, BianchiTag::HLambda);
        assert!((c.param.unwrap() - 0.5).abs() < 1e-9);
        let back = a.transport(&c.basis_change).unwrap();
        assert!(back.max_difference(&family::h_lambda(0.5)) < 1e-9);
    }

    #[test]
    fn ad_scalings() {
        let sol = family::sol();
        let s = normalize_ad_scaling(&sol, &Vector3::x(), &[Vector3::y(), Vector3::z()]).unwrap();
        assert_eq!(s.shape, AdShape::Diagonal { lambda: -1.0 });
        let s = normalize_ad_scaling(&family::euc2(), &Vector3::x(), &[Vector3::y(), Vector3::z()]).unwrap();
        assert_eq!(s.shape, AdShape::RotationDilation { mu: 0.0 });
        let s = normalize_ad_scaling(&family::e_mu(3.0), &Vector3::x(), &[Vector3::y(), Vector3::z()]).unwrap();
        match s.shape {
            AdShape::RotationDilation { mu } => assert!((mu - 3.0).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn zero_ad_is_degenerate() {
        let r = normalize_ad_scaling(&LieAlgebra3::abelian(), &Vector3::x(), &[Vector3::y(), Vector3::z()]);
        assert!(matches!(r, Err(Error::DegenerateInput(_))));
    }

    #[test]
    fn negated_so3_gets_oriented() {
        let mut a = family::so3();
        for x in a.c.iter_mut().flatten().flatten() {
            *x = -*x;
        }
        let c = classify(&a, &tol()).unwrap();
        assert_eq!(c.tag, BianchiTag::So3);
    }
}
