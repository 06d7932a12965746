//! Small dense helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector, Matrix3, SymmetricEigen, Vector3};

/// Null space of `a` via SVD, with singular values below `eps_rel * s_max` treated as zero.
///
/// Also returns the smallest singular value ratio that was kept as nonzero and the
/// largest that was discarded, so callers can detect tolerance-band ambiguity.
pub struct NullSpace {
    pub basis: Vec<DVector<f64>>,
    pub smallest_kept: f64,
    pub largest_dropped: f64,
}

pub fn null_space(a: &DMatrix<f64>, eps_rel: f64) -> NullSpace {
    let n = a.ncols();
    let m = a.nrows().max(n);
    let mut padded = DMatrix::zeros(m, n);
    padded.view_mut((0, 0), (a.nrows(), n)).copy_from(a);
    let svd = padded.svd(false, true);
    let vt = svd.v_t.expect("requested V^T");
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let mut basis = Vec::new();
    let mut smallest_kept = f64::INFINITY;
    let mut largest_dropped: f64 = 0.0;
    for (i, &s) in svd.singular_values.iter().enumerate() {
        let r = if smax > 0.0 { s / smax } else { 0.0 };
        if smax == 0.0 || r <= eps_rel {
            basis.push(vt.row(i).transpose());
            largest_dropped = largest_dropped.max(r);
        } else {
            smallest_kept = smallest_kept.min(r);
        }
    }
    NullSpace { basis, smallest_kept, largest_dropped }
}

/// Orthonormal basis of the span of `vs` (relative rank tolerance).
pub fn span_basis(vs: &[Vector3<f64>], eps_rel: f64) -> (Vec<Vector3<f64>>, f64) {
    if vs.is_empty() {
        return (vec![], f64::INFINITY);
    }
    let mut m = DMatrix::zeros(vs.len().max(3), 3);
    for (i, v) in vs.iter().enumerate() {
        for j in 0..3 {
            m[(i, j)] = v[j];
        }
    }
    let svd = m.svd(false, true);
    let vt = svd.v_t.unwrap();
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    if smax == 0.0 {
        return (vec![], f64::INFINITY);
    }
    let mut out = Vec::new();
    // weakest retained singular value ratio, for band checks
    let mut weakest = f64::INFINITY;
    for (i, &s) in svd.singular_values.iter().enumerate() {
        let r = s / smax;
        if r > eps_rel {
            out.push(Vector3::new(vt[(i, 0)], vt[(i, 1)], vt[(i, 2)]));
            weakest = weakest.min(r);
        }
    }
    (out, weakest)
}

pub fn rank3(m: &Matrix3<f64>, eps_rel: f64) -> usize {
    let s = m.singular_values();
    let smax = s.max();
    if smax == 0.0 {
        return 0;
    }
    s.iter().filter(|x| **x > eps_rel * smax).count()
}

/// Counts of (positive, negative) eigenvalues of a symmetric matrix.
pub fn signature(g: &Matrix3<f64>) -> (usize, usize) {
    let e = SymmetricEigen::new(*g);
    let scale = e.eigenvalues.amax().max(1e-300);
    let p = e.eigenvalues.iter().filter(|x| **x > 1e-12 * scale).count();
    let n = e.eigenvalues.iter().filter(|x| **x < -1e-12 * scale).count();
    (p, n)
}

/// Symmetric eigendecomposition with eigenvalues sorted descending.
pub fn sym_eigen_sorted(g: &Matrix3<f64>) -> (Vector3<f64>, Matrix3<f64>) {
    let e = SymmetricEigen::new(*g);
    let mut idx = [0usize, 1, 2];
    idx.sort_by(|a, b| e.eigenvalues[*b].partial_cmp(&e.eigenvalues[*a]).unwrap());
    let vals = Vector3::new(e.eigenvalues[idx[0]], e.eigenvalues[idx[1]], e.eigenvalues[idx[2]]);
    let mut vecs = Matrix3::zeros();
    for (c, &i) in idx.iter().enumerate() {
        vecs.set_column(c, &e.eigenvectors.column(i));
    }
    (vals, vecs)
}

pub fn sym_defect(g: &Matrix3<f64>) -> f64 {
    (g - g.transpose()).amax()
}

pub fn mat_from_rows(r: [[f64; 3]; 3]) -> Matrix3<f64> {
    Matrix3::new(r[0][0], r[0][1], r[0][2], r[1][0], r[1][1], r[1][2], r[2][0], r[2][1], r[2][2])
}

pub fn mat_to_rows(m: &Matrix3<f64>) -> [[f64; 3]; 3] {
    let mut r = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            r[i][j] = m[(i, j)];
        }
    }
    r
}

/// Unit vector orthogonal (Euclidean) to `v`.
pub fn any_orthogonal(v: &Vector3<f64>) -> Vector3<f64> {
    let a = if v.x.abs() < 0.6 { Vector3::x() } else { Vector3::y() };
    v.cross(&a).normalize()
}
