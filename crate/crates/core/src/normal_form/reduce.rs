//! Closed-form reduction of a metric, written in a preferred basis, to its canonical shape.
//!
//! Every routine returns `(form, k, W)` with `W` an automorphism and `k * W^T g W` equal to the
//! form's matrix. The caller verifies this identity, so the routines only need to be right on
//! their own branch.

use nalgebra::{Matrix2, Matrix3, SymmetricEigen, Vector3};

use super::forms::{CanonicalForm, FormId};
use crate::automorphism::sol_swap;
use crate::bianchi::BianchiTag;

/// Relative threshold below which a quantity counts as zero.
const ZERO: f64 = 1e-9;
/// Decisions closer than this (relative) to the threshold are reported.
const NEAR: f64 = 1e-6;

pub struct Reduced {
    pub form: CanonicalForm,
    pub k: f64,
    pub w: Matrix3<f64>,
    pub flags: Vec<String>,
}

struct Ctx {
    scale: f64,
    flags: Vec<String>,
}

impl Ctx {
    fn new(g: &Matrix3<f64>) -> Self {
        Ctx { scale: g.amax(), flags: Vec::new() }
    }
    /// Zero test relative to `unit`, recording near misses.
    fn is_zero(&mut self, x: f64, unit: f64, what: &str) -> bool {
        let r = x.abs() / unit.max(1e-300);
        if r <= ZERO {
            if r > ZERO * 1e-3 {
                self.flags.push(format!("{what} treated as zero (relative {r:e})"));
            }
            true
        } else {
            if r <= NEAR {
                self.flags.push(format!("{what} is nearly zero (relative {r:e})"));
            }
            false
        }
    }
    fn done(self, form: CanonicalForm, k: f64, w: Matrix3<f64>) -> Reduced {
        Reduced { form, k, w, flags: self.flags }
    }
}

fn sgn(x: f64) -> f64 {
    if x < 0.0 { -1.0 } else { 1.0 }
}

fn block(c: &Matrix2<f64>) -> Matrix3<f64> {
    Matrix3::new(1.0, 0.0, 0.0, 0.0, c[(0, 0)], c[(0, 1)], 0.0, c[(1, 0)], c[(1, 1)])
}

fn pull(g: &Matrix3<f64>, w: &Matrix3<f64>) -> Matrix3<f64> {
    w.transpose() * g * w
}

fn nblock(g: &Matrix3<f64>) -> Matrix2<f64> {
    Matrix2::new(g[(1, 1)], g[(1, 2)], g[(2, 1)], g[(2, 2)])
}

pub fn reduce_closed(tag: BianchiTag, g: &Matrix3<f64>) -> Reduced {
    match tag {
        BianchiTag::R3 => reduce_r3(g),
        BianchiTag::So3 => reduce_so3(g),
        BianchiTag::Sl2 => reduce_sl2(g),
        BianchiTag::Heis => reduce_heis(g),
        BianchiTag::Sol => reduce_sol(g),
        BianchiTag::AffRPlusR | BianchiTag::HLambda => reduce_diag_centralizer(g),
        BianchiTag::H1 => reduce_h1(g),
        BianchiTag::Psh => reduce_psh(g),
        BianchiTag::Euc2 | BianchiTag::EMu => reduce_e(g),
    }
}

fn reduce_r3(g: &Matrix3<f64>) -> Reduced {
    let ctx = Ctx::new(g);
    let e = SymmetricEigen::new(*g);
    let mut idx = [0usize, 1, 2];
    idx.sort_by(|a, b| e.eigenvalues[*b].partial_cmp(&e.eigenvalues[*a]).unwrap());
    let mut w = Matrix3::zeros();
    for (c, &i) in idx.iter().enumerate() {
        w.set_column(c, &(e.eigenvectors.column(i) / e.eigenvalues[i].abs().sqrt()));
    }
    let eps = sgn(e.eigenvalues[idx[2]]);
    ctx.done(CanonicalForm::new(FormId::DiagEps, &[eps]), 1.0, w)
}

fn reduce_so3(g: &Matrix3<f64>) -> Reduced {
    let mut ctx = Ctx::new(g);
    let e = SymmetricEigen::new(*g);
    let mut idx = [0usize, 1, 2];
    idx.sort_by(|a, b| e.eigenvalues[*b].partial_cmp(&e.eigenvalues[*a]).unwrap());
    let l: Vec<f64> = idx.iter().map(|i| e.eigenvalues[*i]).collect();
    let unit = ctx.scale;
    let eq01 = ctx.is_zero(l[0] - l[1], unit, "eigenvalue gap 1-2");
    let eq12 = ctx.is_zero(l[1] - l[2], unit, "eigenvalue gap 2-3");
    // order: equal pair first, otherwise descending
    let order = if eq12 && !eq01 { [idx[1], idx[2], idx[0]] } else { idx };
    let mut q = Matrix3::zeros();
    for (c, &i) in order.iter().enumerate() {
        q.set_column(c, &e.eigenvectors.column(i));
    }
    if q.determinant() < 0.0 {
        let c = -q.column(2);
        q.set_column(2, &c);
    }
    let lam: Vec<f64> = order.iter().map(|i| e.eigenvalues[*i]).collect();
    let k = 1.0 / lam[0];
    let (a1, a2) = if eq01 && eq12 {
        (1.0, 1.0)
    } else if eq01 || eq12 {
        (1.0, lam[2] * k)
    } else {
        (lam[1] * k, lam[2] * k)
    };
    ctx.done(CanonicalForm::new(FormId::So3Diag, &[a1, a2]), k, q)
}

// ---------- sl2 ----------

fn kappa() -> Matrix3<f64> {
    Matrix3::new(1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 1.0, 0.0)
}

fn kin(x: &Vector3<f64>, y: &Vector3<f64>) -> f64 {
    x.dot(&(kappa() * y))
}

/// Basis of the kernel of `m` with relative threshold `eps`.
fn kernel(m: &Matrix3<f64>, eps: f64) -> Vec<Vector3<f64>> {
    let dm = nalgebra::DMatrix::from_fn(3, 3, |r, c| m[(r, c)]);
    crate::linalg::null_space(&dm, eps)
        .basis
        .iter()
        .map(|v| Vector3::new(v[0], v[1], v[2]))
        .collect()
}

/// kappa-orthonormal basis of a 2-dimensional nondegenerate subspace, spacelike first.
fn kappa_orthonormal_pair(a: &Vector3<f64>, b: &Vector3<f64>) -> [(Vector3<f64>, f64); 2] {
    let gm = Matrix2::new(kin(a, a), kin(a, b), kin(b, a), kin(b, b));
    let e = SymmetricEigen::new(gm);
    let mut out: Vec<(Vector3<f64>, f64)> = (0..2)
        .map(|i| {
            let c = e.eigenvectors.column(i);
            let v = a * c[0] + b * c[1];
            let n = kin(&v, &v);
            (v / n.abs().sqrt(), sgn(n))
        })
        .collect();
    out.sort_by(|x, y| y.1.partial_cmp(&x.1).unwrap());
    [out[0], out[1]]
}

fn finish_sl2(ctx: Ctx, form: CanonicalForm, k: f64, mut p: Matrix3<f64>) -> Reduced {
    // -I preserves every metric and fixes the determinant
    if p.determinant() < 0.0 {
        p = -p;
    }
    ctx.done(form, k, p)
}

fn reduce_sl2(g: &Matrix3<f64>) -> Reduced {
    let mut ctx = Ctx::new(g);
    let b = kappa() * g;
    let unit = b.amax();
    let nu = b.trace() / 3.0;
    let n0 = b - Matrix3::identity() * nu;
    let n = n0.amax();
    if ctx.is_zero(n, unit, "traceless part of kappa^-1 g") {
        return finish_sl2(ctx, CanonicalForm::new(FormId::NullPair, &[]), 1.0 / nu, Matrix3::identity());
    }
    // x^3 + px + q for the normalized traceless part; repeated roots are read off the
    // discriminant because root finders lose half the digits there
    let m = n0 / n;
    let p = -(m * m).trace() / 2.0;
    let q = -m.determinant();
    let disc = -4.0 * p * p * p - 27.0 * q * q;
    if p.abs() <= 1e-8 && q.abs() <= 1e-8 {
        if (m * m).amax() <= 1e-7 {
            return sl2_jordan2(ctx, &b, nu, nu);
        }
        return sl2_jordan3(ctx, &b, nu);
    }
    if ctx.is_zero(disc, 1.0, "discriminant of kappa^-1 g") {
        let single = 3.0 * q / p * n + nu;
        let dbl = -1.5 * q / p * n + nu;
        let prod = (b - Matrix3::identity() * dbl) * (b - Matrix3::identity() * single);
        if prod.amax() <= 1e-6 * unit * unit {
            let groups = vec![
                (dbl, kernel(&(b - Matrix3::identity() * dbl), 1e-5)),
                (single, kernel(&(b - Matrix3::identity() * single), 1e-5)),
            ];
            return sl2_diagonal(ctx, &b, &groups);
        }
        return sl2_jordan2(ctx, &b, single, dbl);
    }
    match crate::spectrum::eigen3(&b) {
        crate::spectrum::Spectrum::RealAndComplex { real, re, im } if disc < 0.0 => {
            let mu = real;
            let q1 = kernel(&(b - Matrix3::identity() * mu), 1e-6)[0];
            let q1 = q1 / kin(&q1, &q1).abs().sqrt();
            let j = (b - Matrix3::identity() * re) / (im.abs() * sgn(mu));
            let kq1 = (kappa() * q1).transpose();
            let plane = kernel(&Matrix3::from_rows(&[kq1, kq1 * 0.0, kq1 * 0.0]), 1e-9);
            let pr = kappa_orthonormal_pair(&plane[0], &plane[1]);
            let mut nv = pr[0].0 + pr[1].0;
            if kin(&nv, &(j * nv)) < 0.0 {
                nv = j * nv;
            }
            let s = kin(&nv, &(j * nv));
            let q2 = nv / s.sqrt();
            let q3 = j * q2;
            let form = CanonicalForm::new(FormId::Sl2Complex, &[im.abs() / mu.abs(), re / mu]);
            finish_sl2(ctx, form, 1.0 / mu, Matrix3::from_columns(&[q1, q2, q3]))
        }
        _ => {
            let values = match crate::spectrum::eigen3(&b) {
                crate::spectrum::Spectrum::ThreeReal { values } => values,
                crate::spectrum::Spectrum::RealAndComplex { real, re, .. } => [real, re, re],
            };
            let groups: Vec<(f64, Vec<Vector3<f64>>)> =
                values.iter().map(|&l| (l, kernel(&(b - Matrix3::identity() * l), 1e-6))).collect();
            sl2_diagonal(ctx, &b, &groups)
        }
    }
}

/// B diagonalizable: eigenvalues with their eigenspaces.
fn sl2_diagonal(mut ctx: Ctx, b: &Matrix3<f64>, groups: &[(f64, Vec<Vector3<f64>>)]) -> Reduced {
    // kappa-orthonormal eigenbasis tagged (eigenvalue, vector, sign)
    let mut vecs: Vec<(f64, Vector3<f64>, f64)> = Vec::new();
    for (l, ks) in groups {
        if ks.len() >= 2 {
            for (v, s) in kappa_orthonormal_pair(&ks[0], &ks[1]) {
                vecs.push((*l, v, s));
            }
        } else {
            let v = ks[0];
            let n = kin(&v, &v);
            vecs.push((*l, v / n.abs().sqrt(), sgn(n)));
        }
    }
    let unit = b.amax();
    let t = vecs.iter().position(|x| x.2 < 0.0).expect("one timelike eigenvector");
    let (tau, vh, _) = vecs[t];
    let space: Vec<(f64, Vector3<f64>)> = vecs.iter().enumerate().filter(|(i, _)| *i != t).map(|(_, x)| (x.0, x.1)).collect();
    let (ma, va) = space[0];
    let (mb, vb) = space[1];
    let eq_ab = ctx.is_zero(ma - mb, unit, "spacelike eigenvalue gap");
    let eq_at = ctx.is_zero(ma - tau, unit, "eigenvalue gap a-t");
    let eq_bt = ctx.is_zero(mb - tau, unit, "eigenvalue gap b-t");
    let assemble = |e1: Vector3<f64>, f: Vector3<f64>| -> Matrix3<f64> {
        Matrix3::from_columns(&[e1, (f + vh) / 2f64.sqrt(), (f - vh) / 2f64.sqrt()])
    };
    if eq_ab && (eq_at || eq_bt) {
        let mu = (ma + mb + tau) / 3.0;
        return finish_sl2(ctx, CanonicalForm::new(FormId::NullPair, &[]), 1.0 / mu, assemble(va, vb));
    }
    if eq_ab {
        let mu = (ma + mb) / 2.0;
        let alpha = (1.0 - tau / mu) / 2.0;
        return finish_sl2(ctx, CanonicalForm::new(FormId::Sl2Elliptic, &[alpha]), 1.0 / mu, assemble(va, vb));
    }
    if eq_at || eq_bt {
        // the odd spacelike eigenvector goes to e1
        let (odd, vo, pair_v) = if eq_at { (mb, vb, va) } else { (ma, va, vb) };
        let alpha = tau / odd;
        return finish_sl2(ctx, CanonicalForm::new(FormId::Sl2Hyperbolic, &[alpha]), 1.0 / odd, assemble(vo, pair_v));
    }
    // all distinct
    let (e1, f) = if ma * mb > 0.0 {
        if ma.abs() <= mb.abs() { ((ma, va), (mb, vb)) } else { ((mb, vb), (ma, va)) }
    } else if ma * tau > 0.0 {
        ((ma, va), (mb, vb))
    } else {
        ((mb, vb), (ma, va))
    };
    let k = 1.0 / e1.0;
    let form = CanonicalForm::new(FormId::Sl2Diag, &[f.0 * k, -tau * k]);
    finish_sl2(ctx, form, k, assemble(e1.1, f.1))
}

/// B = mu on a spacelike line, nu with a 2-Jordan block on its orthogonal plane.
fn sl2_jordan2(ctx: Ctx, b: &Matrix3<f64>, mu: f64, nu: f64) -> Reduced {
    let n = b - Matrix3::identity() * nu;
    let distinct = (mu - nu).abs() > 1e-9 * b.amax();
    // the null line is the image of the nilpotent part on the nu-block
    let img = if distinct { (b - Matrix3::identity() * mu) * n } else { n };
    let j = (0..3).max_by(|x, y| img.column(*x).norm().partial_cmp(&img.column(*y).norm()).unwrap()).unwrap();
    let q3: Vector3<f64> = img.column(j).normalize();
    let q1 = if distinct {
        let v = kernel(&(b - Matrix3::identity() * mu), 1e-6)[0];
        v / kin(&v, &v).abs().sqrt()
    } else {
        // ker N is q3-perp; any spacelike vector in it will do
        let ker = kernel(&n, 1e-6);
        let best = ker.iter().copied().max_by(|x, y| kin(x, x).partial_cmp(&kin(y, y)).unwrap()).unwrap();
        best / kin(&best, &best).sqrt()
    };
    // q2 null with kappa(q2, q3) = 1, orthogonal to q1
    let cands = [Vector3::x(), Vector3::y(), Vector3::z()];
    let mut w = cands[0];
    let mut bestv = 0.0;
    for c in cands {
        let c = c - q1 * kin(&c, &q1);
        let v = kin(&c, &q3).abs();
        if v > bestv {
            bestv = v;
            w = c;
        }
    }
    let mut q2 = w / kin(&w, &q3);
    q2 -= q3 * (kin(&q2, &q2) / 2.0);
    let t = kin(&(n * q2), &q2); // N q2 = t q3 with kappa(q2,q3)=1
    let k = 1.0 / mu;
    let lam = 1.0 / (k * t).abs().sqrt();
    let eps = sgn(k * t);
    let p = Matrix3::from_columns(&[q1, q2 * lam, q3 / lam]);
    finish_sl2(ctx, CanonicalForm::new(FormId::Sl2Jordan2, &[nu / mu, eps]), k, p)
}

fn sl2_jordan3(ctx: Ctx, b: &Matrix3<f64>, nu: f64) -> Reduced {
    let np = b / nu - Matrix3::identity();
    let n2 = np * np;
    let cands = [Vector3::x(), Vector3::y(), Vector3::z(), Vector3::new(1.0, 1.0, 1.0)];
    let mut v = cands[0];
    let mut best = 0.0;
    for c in cands {
        let s = kin(&(n2 * c), &c);
        if s > best {
            best = s;
            v = c;
        }
    }
    let sigma = kin(&(n2 * v), &v);
    let v = v * (2.0 / sigma).sqrt();
    let nv = np * v;
    let bq = -kin(&nv, &v) / 4.0;
    let kvv = kin(&v, &v);
    let c = -(kvv + 2.0 * bq * kin(&nv, &v) + bq * bq * kin(&nv, &nv)) / 4.0;
    let q3 = v + nv * bq + n2 * v * c;
    let q1 = np * q3 / 2f64.sqrt();
    let q2 = np * np * q3 / 2.0;
    finish_sl2(ctx, CanonicalForm::new(FormId::Sl2Jordan3, &[]), 1.0 / nu, Matrix3::from_columns(&[q1, q2, q3]))
}

// ---------- heis ----------

fn reduce_heis(g: &Matrix3<f64>) -> Reduced {
    let mut ctx = Ctx::new(g);
    let unit = ctx.scale;
    let g33 = g[(2, 2)];
    if !ctx.is_zero(g33, unit, "g(e3,e3)") {
        let w1 = Matrix3::new(1.0, 0.0, 0.0, 0.0, 1.0, 0.0, -g[(0, 2)] / g33, -g[(1, 2)] / g33, 1.0);
        let h = pull(g, &w1).fixed_view::<2, 2>(0, 0).into_owned();
        let e = SymmetricEigen::new(h);
        let (mut l1, mut l2) = (e.eigenvalues[0], e.eigenvalues[1]);
        let (mut v1, mut v2) = (e.eigenvectors.column(0).into_owned(), e.eigenvectors.column(1).into_owned());
        if l1 < l2 {
            std::mem::swap(&mut l1, &mut l2);
            std::mem::swap(&mut v1, &mut v2);
        }
        let deth = (l1 * l2).abs();
        let t = (deth / g33.abs()).sqrt();
        let a = Matrix2::from_columns(&[v1 * (t / l1.abs().sqrt()), v2 * (t / l2.abs().sqrt())]);
        let w2 = Matrix3::new(a[(0, 0)], a[(0, 1)], 0.0, a[(1, 0)], a[(1, 1)], 0.0, 0.0, 0.0, a.determinant());
        let w = w1 * w2;
        if l1 * l2 > 0.0 {
            let sigma = sgn(l1);
            let k = sigma / (t * t);
            let eps = sigma * sgn(g33);
            return ctx.done(CanonicalForm::new(FormId::DiagEps, &[eps]), k, w);
        }
        // centre timelike for -g: swapping e1, e2 keeps the form (1,-1,1)
        let sw = if g33 < 0.0 { Matrix3::new(0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, -1.0) } else { Matrix3::identity() };
        return ctx.done(CanonicalForm::new(FormId::DiagSplit, &[]), sgn(g33) / (t * t), w * sw);
    }
    let (g13, g23) = (g[(0, 2)], g[(1, 2)]);
    let wn = g13 * g13 + g23 * g23;
    let p1 = Vector3::new(-g23, g13, 0.0);
    let p2 = Vector3::new(g13 / wn, g23 / wn, 0.0);
    let inner = |x: &Vector3<f64>, y: &Vector3<f64>| x.dot(&(g * y));
    let gamma = inner(&p1, &p1);
    let x = -inner(&p1, &p2);
    let y = -inner(&p2, &p2) / 2.0;
    let alpha = -1.0 / gamma;
    let e1 = (p1 + Vector3::z() * x) * alpha;
    let e2 = p2 + Vector3::z() * y;
    let e3 = Vector3::z() * (-alpha);
    ctx.done(CanonicalForm::new(FormId::NullPair, &[]), gamma, Matrix3::from_columns(&[e1, e2, e3]))
}

// ---------- families with a 2-dimensional abelian ideal span(e2, e3) ----------

/// e1 -> e1 + u with u in span(e2,e3) so that e1 becomes orthogonal to the ideal.
fn decouple(g: &Matrix3<f64>) -> (Matrix3<f64>, f64, Matrix2<f64>) {
    let h = nblock(g);
    let bv = nalgebra::Vector2::new(g[(0, 1)], g[(0, 2)]);
    let u = -(h.try_inverse().expect("nondegenerate block") * bv);
    let w = Matrix3::new(1.0, 0.0, 0.0, u[0], 1.0, 0.0, u[1], 0.0, 1.0);
    let s = g[(0, 0)] + bv.dot(&u);
    (w, s, h)
}

/// Finishes a metric whose restriction to the ideal is `g_ww (e_w)^2` with kernel `e_l`,
/// giving `(e_w)^2 + 2(e1 e_l)` via a common rescaling of the ideal.
fn finish_degenerate(ctx: Ctx, g: &Matrix3<f64>, pre: Matrix3<f64>, w_idx: usize, l_idx: usize) -> Reduced {
    let gp = pull(g, &pre);
    let hw = gp[(w_idx, w_idx)];
    let x = -gp[(0, w_idx)] / hw;
    let y = -(gp[(0, 0)] + 2.0 * x * gp[(0, w_idx)] + x * x * hw) / (2.0 * gp[(0, l_idx)]);
    let nu = gp[(0, l_idx)];
    let mut u = Matrix3::identity();
    u[(w_idx, 0)] = x;
    u[(l_idx, 0)] = y;
    let beta = nu / hw;
    let k = hw / (nu * nu);
    let sc = Matrix3::new(1.0, 0.0, 0.0, 0.0, beta, 0.0, 0.0, 0.0, beta);
    let form = if w_idx == 1 { FormId::E2E1E3 } else { FormId::E3E1E2 };
    ctx.done(CanonicalForm::new(form, &[]), k, pre * u * sc)
}

fn reduce_diag_centralizer(g: &Matrix3<f64>) -> Reduced {
    let mut ctx = Ctx::new(g);
    let unit = ctx.scale;
    let h = nblock(g);
    let (p, r, q) = (h[(0, 0)], h[(0, 1)], h[(1, 1)]);
    let det_zero = ctx.is_zero(h.determinant(), unit * unit, "det of the ideal block");
    if det_zero {
        let pz = ctx.is_zero(p, unit, "g(e2,e2)");
        let qz = ctx.is_zero(q, unit, "g(e3,e3)");
        if qz {
            return finish_degenerate(ctx, g, Matrix3::identity(), 1, 2);
        }
        if pz {
            return finish_degenerate(ctx, g, Matrix3::identity(), 2, 1);
        }
        // kernel l = r e2 - p e3, non-null direction e2
        let g01 = g[(0, 1)];
        let g02 = g[(0, 2)];
        let x = -g01 / p;
        let gl = r * g01 - p * g02;
        let y = -(g[(0, 0)] + 2.0 * x * g01 + x * x * p) / (2.0 * gl);
        let u = Matrix3::new(1.0, 0.0, 0.0, x + y * r, 1.0, 0.0, -y * p, 0.0, 1.0);
        let nu = g02 + x * r;
        let k = q / (nu * nu);
        let sc = Matrix3::new(1.0, 0.0, 0.0, 0.0, nu / r, 0.0, 0.0, 0.0, nu / q);
        return ctx.done(CanonicalForm::new(FormId::DegenGeneric, &[]), k, u * sc);
    }
    let (w0, s, _) = decouple(g);
    let rz = ctx.is_zero(r, unit, "g(e2,e3)");
    let pz = ctx.is_zero(p, unit, "g(e2,e2)");
    if !rz && !pz {
        let k = 1.0 / s;
        let b = 1.0 / (k * p).abs().sqrt();
        let d = 1.0 / (k * b * r);
        let alpha = k * d * d * q;
        let id = if k * p > 0.0 { FormId::NPlus } else { FormId::NMinus };
        let w = w0 * Matrix3::from_diagonal(&Vector3::new(1.0, b, d));
        return ctx.done(CanonicalForm::new(id, &[alpha]), k, w);
    }
    if !rz {
        let k = 1.0 / s;
        if ctx.is_zero(q, unit, "g(e3,e3)") {
            let w = w0 * Matrix3::from_diagonal(&Vector3::new(1.0, 1.0 / (k * r), 1.0));
            return ctx.done(CanonicalForm::new(FormId::NullPair, &[]), k, w);
        }
        let d = 1.0 / (k * q).abs().sqrt();
        let b = 1.0 / (k * d * r);
        let w = w0 * Matrix3::from_diagonal(&Vector3::new(1.0, b, d));
        return ctx.done(CanonicalForm::new(FormId::NZeroEps, &[sgn(k * q)]), k, w);
    }
    let mut k = 1.0 / s;
    if k * p < 0.0 && k * q < 0.0 {
        k = -k;
    }
    let w = w0 * Matrix3::from_diagonal(&Vector3::new(1.0, 1.0 / (k * p).abs().sqrt(), 1.0 / (k * q).abs().sqrt()));
    let form = match (sgn(k * s), sgn(k * p), sgn(k * q)) {
        (a, _, _) if a < 0.0 => CanonicalForm::new(FormId::TimeE1, &[]),
        (_, b, c) if b > 0.0 => CanonicalForm::new(FormId::DiagEps, &[c]),
        _ => CanonicalForm::new(FormId::DiagSplit, &[]),
    };
    ctx.done(form, k, w)
}

fn sol_admissible(f: &CanonicalForm) -> bool {
    match f.id {
        FormId::NMinus => f.get("alpha") <= 1e-9,
        FormId::NPlus | FormId::NullPair | FormId::DiagEps | FormId::TimeE1 | FormId::DegenGeneric | FormId::E2E1E3 => true,
        _ => false,
    }
}

fn reduce_sol(g: &Matrix3<f64>) -> Reduced {
    let first = reduce_diag_centralizer(g);
    if sol_admissible(&first.form) {
        return first;
    }
    let s = sol_swap();
    let mut second = reduce_diag_centralizer(&pull(g, &s));
    second.w = s * second.w;
    if sol_admissible(&second.form) {
        second.flags.extend(first.flags);
        return second;
    }
    let mut out = first;
    out.flags.push("no admissible sol representative from either component".into());
    out
}

fn reduce_h1(g: &Matrix3<f64>) -> Reduced {
    let mut ctx = Ctx::new(g);
    let unit = ctx.scale;
    let h = nblock(g);
    if ctx.is_zero(h.determinant(), unit * unit, "det of the ideal block") {
        let e = SymmetricEigen::new(h);
        let i = if e.eigenvalues[0].abs() < e.eigenvalues[1].abs() { 0 } else { 1 };
        let l = e.eigenvectors.column(i).into_owned();
        let wv = e.eigenvectors.column(1 - i).into_owned();
        let c0 = block(&Matrix2::from_columns(&[l, wv]));
        return finish_degenerate(ctx, g, c0, 2, 1);
    }
    let (w0, s, h) = decouple(g);
    let mut k = 1.0 / s;
    let e = SymmetricEigen::new(h * k);
    if e.eigenvalues.iter().all(|x| *x < 0.0) {
        k = -k;
    }
    let e = SymmetricEigen::new(h * k);
    let (i, j) = if e.eigenvalues[0] >= e.eigenvalues[1] { (0, 1) } else { (1, 0) };
    let c = Matrix2::from_columns(&[
        e.eigenvectors.column(i) / e.eigenvalues[i].abs().sqrt(),
        e.eigenvectors.column(j) / e.eigenvalues[j].abs().sqrt(),
    ]);
    let w = w0 * block(&c);
    let form = if k * s < 0.0 {
        CanonicalForm::new(FormId::TimeE1, &[])
    } else {
        CanonicalForm::new(FormId::DiagEps, &[sgn(e.eigenvalues[j])])
    };
    ctx.done(form, k, w)
}

fn reduce_psh(g: &Matrix3<f64>) -> Reduced {
    let mut ctx = Ctx::new(g);
    let unit = ctx.scale;
    let h = nblock(g);
    let (p, r, q) = (h[(0, 0)], h[(0, 1)], h[(1, 1)]);
    let pz = ctx.is_zero(p, unit, "g(e2,e2)");
    if ctx.is_zero(h.determinant(), unit * unit, "det of the ideal block") {
        if pz {
            return finish_degenerate(ctx, g, Matrix3::identity(), 2, 1);
        }
        let c0 = block(&Matrix2::new(1.0, -r / p, 0.0, 1.0));
        return finish_degenerate(ctx, g, c0, 1, 2);
    }
    let (w0, s, _) = decouple(g);
    let k = 1.0 / s;
    if !pz {
        let beta = 1.0 / (k * p).abs().sqrt();
        let c = -beta * r / p;
        let alpha = (q * k - (r * k).powi(2) / (p * k)) / (p * k).abs();
        let id = if k * p > 0.0 { FormId::PshPlus } else { FormId::PshMinus };
        let w = w0 * block(&Matrix2::new(beta, c, 0.0, beta));
        return ctx.done(CanonicalForm::new(id, &[alpha]), k, w);
    }
    let beta = 1.0 / (k * r).abs().sqrt();
    let c = -beta * q / (2.0 * r);
    let w = w0 * block(&Matrix2::new(beta, c, 0.0, beta));
    ctx.done(CanonicalForm::new(FormId::PshNull, &[sgn(k * r)]), k, w)
}

fn rot(c: f64, s: f64) -> Matrix2<f64> {
    Matrix2::new(c, -s, s, c)
}

fn reduce_e(g: &Matrix3<f64>) -> Reduced {
    let mut ctx = Ctx::new(g);
    let unit = ctx.scale;
    let h = nblock(g);
    let e = SymmetricEigen::new(h);
    if ctx.is_zero(h.determinant(), unit * unit, "det of the ideal block") {
        let i = if e.eigenvalues[0].abs() < e.eigenvalues[1].abs() { 0 } else { 1 };
        let l = e.eigenvectors.column(i).normalize();
        return finish_degenerate(ctx, g, block(&rot(l[0], l[1])), 2, 1);
    }
    let (w0, s, _) = decouple(g);
    let (l0, l1) = (e.eigenvalues[0], e.eigenvalues[1]);
    let v0 = e.eigenvectors.column(0).normalize();
    // rotation taking e2 to the eigenvector chosen as first
    let (first, second, v) = if l0 * l1 > 0.0 {
        if l0.abs() >= l1.abs() { (l0, l1, v0) } else { (l1, l0, nalgebra::Vector2::new(-v0[1], v0[0])) }
    } else if l0 / s > 0.0 {
        (l0, l1, v0)
    } else {
        (l1, l0, nalgebra::Vector2::new(-v0[1], v0[0]))
    };
    let k = if l0 * l1 > 0.0 { sgn(first) / s.abs() } else { 1.0 / s };
    let beta = 1.0 / (k * first).sqrt();
    let c = rot(v[0], v[1]) * beta;
    let alpha = second / first;
    let w = w0 * block(&c);
    let form = if k * s > 0.0 {
        CanonicalForm::new(FormId::EDiagPlus, &[alpha])
    } else {
        CanonicalForm::new(FormId::EDiagTime, &[alpha])
    };
    ctx.done(form, k, w)
}

