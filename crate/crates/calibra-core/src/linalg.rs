//! Small dense linear-algebra helpers shared across modules.

use nalgebra::{DMatrix, DVector};

/// Matrix exponential by scaling-and-squaring with a Taylor tail; ample for
/// the unit-scale skew matrices used to sample group elements.
pub fn expm(x: &DMatrix<f64>) -> DMatrix<f64> {
    let n = x.nrows();
    assert_eq!(n, x.ncols());
    let norm = x.norm();
    let scalings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as u32
    } else {
        0
    };
    let scaled = x / 2f64.powi(scalings as i32);
    let mut term = DMatrix::identity(n, n);
    let mut acc = DMatrix::identity(n, n);
    for k in 1..=16 {
        term = &term * &scaled / k as f64;
        acc += &term;
    }
    for _ in 0..scalings {
        acc = &acc * &acc;
    }
    acc
}

/// Orthonormal basis of the nullspace of `a`, using the singular-value
/// threshold `sigma < rel_tol * sigma_max` (or an absolute floor when all
/// singular values are tiny). Columns of the result span the kernel.
pub fn nullspace(a: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    let cols = a.ncols();
    // nalgebra's SVD is thin, so pad wide matrices with zero rows to keep
    // every right singular vector
    let work = if a.nrows() < cols {
        let mut padded = DMatrix::zeros(cols, cols);
        padded.view_mut((0, 0), (a.nrows(), cols)).copy_from(a);
        padded
    } else {
        a.clone()
    };
    let svd = work.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let smax = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
    let cutoff = if smax > 1e-300 { rel_tol * smax } else { 1e-12 };
    let mut kernel_rows = Vec::new();
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if s <= cutoff {
            kernel_rows.push(i);
        }
    }
    let mut out = DMatrix::zeros(cols, kernel_rows.len());
    for (j, &r) in kernel_rows.iter().enumerate() {
        for c in 0..cols {
            out[(c, j)] = v_t[(r, c)];
        }
    }
    out
}

/// Orthonormal basis for the column span of `a` (singular vectors above the
/// relative threshold).
pub fn column_span(a: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    let svd = a.clone().svd(true, false);
    let u = svd.u.expect("requested U");
    let smax = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
    let cutoff = if smax > 1e-300 { rel_tol * smax } else { 1e-12 };
    let rank = svd.singular_values.iter().filter(|&&s| s > cutoff).count();
    u.columns(0, rank).into_owned()
}

/// Distance between the subspaces spanned by the (orthonormal) columns of
/// `p` and `q`, as the operator norm of the projector difference: zero iff
/// the spans agree, and equal to the sine of the largest principal angle.
pub fn subspace_distance(p: &DMatrix<f64>, q: &DMatrix<f64>) -> f64 {
    let pp = p * p.transpose();
    let qq = q * q.transpose();
    let diff = &pp - &qq;
    // symmetric, so the operator norm is the largest |eigenvalue|
    let eig = diff.symmetric_eigen();
    eig.eigenvalues.iter().fold(0.0f64, |m, &l| m.max(l.abs()))
}

/// Projection of a vector onto the span of orthonormal columns.
pub fn project_onto(basis: &DMatrix<f64>, v: &DVector<f64>) -> DVector<f64> {
    basis * (basis.transpose() * v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rand_util::{gaussian_matrix, seeded_rng};

    #[test]
    fn exponential_of_rotation_generator() {
        let mut x = DMatrix::zeros(2, 2);
        x[(0, 1)] = -std::f64::consts::FRAC_PI_2;
        x[(1, 0)] = std::f64::consts::FRAC_PI_2;
        let r = expm(&x);
        let expect = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        assert!((r - expect).norm() < 1e-12);
    }

    #[test]
    fn exponential_of_skew_is_orthogonal() {
        let mut rng = seeded_rng(31);
        let a = gaussian_matrix(6, 6, &mut rng);
        let skew = (&a - a.transpose()) * 0.5;
        let g = expm(&skew);
        assert!((g.transpose() * &g - DMatrix::identity(6, 6)).norm() < 1e-12);
    }

    #[test]
    fn nullspace_of_rank_deficient_matrix() {
        // rows (1,1,0) and (0,0,1): kernel spanned by (1,-1,0)/sqrt(2)
        let a = DMatrix::from_row_slice(2, 3, &[1.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
        let k = nullspace(&a, 1e-8);
        assert_eq!(k.ncols(), 1);
        assert!((a * &k).norm() < 1e-12);
    }

    #[test]
    fn subspace_distance_detects_equality() {
        let mut rng = seeded_rng(32);
        let p = crate::rand_util::random_orthonormal_frame(5, 2, &mut rng);
        // same span, rotated basis
        let rot = DMatrix::from_row_slice(2, 2, &[0.6, -0.8, 0.8, 0.6]);
        let q = &p * rot;
        assert!(subspace_distance(&p, &q) < 1e-12);
        let r = crate::rand_util::random_orthonormal_frame(5, 2, &mut rng);
        assert!(subspace_distance(&p, &r) > 1e-3);
    }
}
