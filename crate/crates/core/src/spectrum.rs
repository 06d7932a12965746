//! Closed-form spectra of real 3x3 matrices.

use nalgebra::Matrix3;
use serde::Serialize;
use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Spectrum {
    /// sorted descending
    ThreeReal { values: [f64; 3] },
    /// real root plus the pair `re ± i im` with `im > 0`
    RealAndComplex { real: f64, re: f64, im: f64 },
}

/// Coefficients of `x^3 + a x^2 + b x + c = det(x I - M)`.
pub fn char_poly(m: &Matrix3<f64>) -> (f64, f64, f64) {
    let tr = m.trace();
    let minors = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)] + m[(0, 0)] * m[(2, 2)]
        - m[(0, 2)] * m[(2, 0)]
        + m[(1, 1)] * m[(2, 2)]
        - m[(1, 2)] * m[(2, 1)];
    (-tr, minors, -m.determinant())
}

/// Roots of the monic cubic; trigonometric form when all three are real.
pub fn cubic_roots(a: f64, b: f64, c: f64) -> Spectrum {
    let shift = a / 3.0;
    let p = b - a * a / 3.0;
    let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    let scale = 1.0 + a.abs() + b.abs().sqrt() + c.abs().cbrt();
    let tiny = 1e-14 * scale * scale;
    if p.abs() <= tiny * scale && q.abs() <= tiny * scale * scale {
        let r = -shift;
        return Spectrum::ThreeReal { values: [r, r, r] };
    }
    let disc = (q / 2.0).powi(2) + (p / 3.0).powi(3);
    if p < 0.0 && disc <= tiny.powi(3) {
        let m = 2.0 * (-p / 3.0).sqrt();
        let arg = (3.0 * q / (p * m)).clamp(-1.0, 1.0);
        let theta = arg.acos() / 3.0;
        let mut v = [0.0; 3];
        for (k, slot) in v.iter_mut().enumerate() {
            *slot = m * (theta - 2.0 * PI * k as f64 / 3.0).cos() - shift;
        }
        v.sort_by(|x, y| y.partial_cmp(x).unwrap());
        Spectrum::ThreeReal { values: v }
    } else {
        let sd = disc.max(0.0).sqrt();
        let u = (-q / 2.0 + sd).cbrt();
        let w = (-q / 2.0 - sd).cbrt();
        let real = u + w - shift;
        let re = -(u + w) / 2.0 - shift;
        let im = (3.0f64).sqrt() / 2.0 * (u - w).abs();
        if im <= 1e-12 * scale {
            let mut v = [real, re, re];
            v.sort_by(|x, y| y.partial_cmp(x).unwrap());
            Spectrum::ThreeReal { values: v }
        } else {
            Spectrum::RealAndComplex { real, re, im }
        }
    }
}

pub fn eigen3(m: &Matrix3<f64>) -> Spectrum {
    let (a, b, c) = char_poly(m);
    cubic_roots(a, b, c)
}
