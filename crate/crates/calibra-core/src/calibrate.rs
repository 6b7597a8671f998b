//! Calibration verification: comass estimation over oriented Grassmannians,
//! calibrated-plane certification, the Yang–Mills quadratic form q_Φ, and
//! the Chern-number pairing on flat tori.

use crate::error::{CalibraError, Result};
use crate::exterior::{k_subsets, mask_bits, minor_det, Multivector};
use crate::groups::CurvatureTensor;
use crate::par;
use crate::rand_util::{random_orthonormal_frame, stream_rng};
use crate::subspace::Subspace;
use crate::torus::FlatTorus;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

/// Result of a multi-start comass search. The estimate is a lower bound of
/// the true comass by construction and is monotone in the restart count.
#[derive(Clone, Debug, Serialize)]
pub struct ComassReport {
    pub estimate: f64,
    pub argmax_plane: Subspace,
    pub restarts: usize,
    pub converged: bool,
    pub seed: u64,
}

const MAX_ASCENT_ITERS: usize = 500;
const IMPROVEMENT_EPS: f64 = 1e-12;

/// Value of a pure grade-k form on an m×k frame.
fn frame_value(form: &Multivector, frame: &DMatrix<f64>) -> f64 {
    let cols: Vec<usize> = (0..frame.ncols()).collect();
    let mut value = 0.0;
    for (mask, c) in form.terms() {
        let rows = mask_bits(mask);
        value += c * minor_det(frame, &rows, &cols);
    }
    value
}

/// Euclidean gradient of the frame value in the frame entries, via cofactor
/// expansion of each term's minor.
fn frame_gradient(form: &Multivector, frame: &DMatrix<f64>) -> DMatrix<f64> {
    let m = frame.nrows();
    let k = frame.ncols();
    let cols: Vec<usize> = (0..k).collect();
    let mut grad = DMatrix::zeros(m, k);
    for (mask, c) in form.terms() {
        let rows = mask_bits(mask);
        // cofactor matrix of the k×k minor
        for p in 0..k {
            for q in 0..k {
                let sub_rows: Vec<usize> = rows
                    .iter()
                    .enumerate()
                    .filter(|(idx, _)| *idx != p)
                    .map(|(_, &r)| r)
                    .collect();
                let sub_cols: Vec<usize> = cols
                    .iter()
                    .filter(|&&cc| cc != q)
                    .cloned()
                    .collect();
                let minor = minor_det(frame, &sub_rows, &sub_cols);
                let sign = if (p + q) % 2 == 0 { 1.0 } else { -1.0 };
                grad[(rows[p], q)] += c * sign * minor;
            }
        }
    }
    grad
}

/// Re-orthonormalize by QR with positive diagonal, preserving orientation
/// continuity along the ascent.
fn retract(frame: &DMatrix<f64>) -> DMatrix<f64> {
    let qr = frame.clone().qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..q.ncols() {
        if r[(j, j)] < 0.0 {
            for i in 0..q.nrows() {
                q[(i, j)] = -q[(i, j)];
            }
        }
    }
    q
}

fn ascend_once(form: &Multivector, m: usize, k: usize, seed: u64, stream: u64) -> (f64, DMatrix<f64>, bool) {
    let mut rng = stream_rng(seed, stream);
    let mut frame = random_orthonormal_frame(m, k, &mut rng);
    let mut value = frame_value(form, &frame);
    if value < 0.0 {
        // flip one column so the ascent starts on the positive side
        for i in 0..m {
            frame[(i, 0)] = -frame[(i, 0)];
        }
        value = -value;
    }
    let mut converged = false;
    for _ in 0..MAX_ASCENT_ITERS {
        let grad = frame_gradient(form, &frame);
        // project onto the tangent space of the Stiefel manifold
        let ftg = frame.transpose() * &grad;
        let sym = (&ftg + ftg.transpose()) * 0.5;
        let tangent = &grad - &frame * sym;
        if tangent.norm() < 1e-14 {
            converged = true;
            break;
        }
        // backtracking line search: halve until the step earns a fixed
        // fraction of the first-order prediction
        let slope = tangent.norm_squared();
        let mut step = 1.0;
        let mut improvement = 0.0;
        while step > 1e-16 {
            let candidate = retract(&(&frame + &tangent * step));
            let cval = frame_value(form, &candidate);
            if cval >= value + 0.1 * step * slope {
                improvement = cval - value;
                frame = candidate;
                value = cval;
                break;
            }
            step *= 0.5;
        }
        if improvement < IMPROVEMENT_EPS {
            converged = true;
            break;
        }
    }
    (value, frame, converged)
}

/// Multi-start projected-gradient ascent of P ↦ Φ(frame of P) over the
/// oriented Grassmannian of k-planes. Restarts are independent (and run
/// concurrently under the parallel feature); the merge is deterministic
/// under a fixed seed regardless of thread count.
pub fn comass_estimate(form: &Multivector, restarts: usize, seed: u64) -> Result<ComassReport> {
    comass_estimate_opts(form, restarts, seed, cfg!(feature = "parallel"))
}

/// Same search with the execution strategy pinned, for benchmarking the
/// parallel speedup against the sequential path.
pub fn comass_estimate_opts(
    form: &Multivector,
    restarts: usize,
    seed: u64,
    parallel: bool,
) -> Result<ComassReport> {
    let k = form
        .pure_grade()
        .ok_or_else(|| CalibraError::GradeMismatch("comass needs a pure-grade form".into()))?;
    let m = form.dim();
    if k == 0 || k > m {
        return Err(CalibraError::GradeMismatch(format!(
            "grade {k} out of range for dimension {m}"
        )));
    }
    let runs: Vec<(f64, DMatrix<f64>, bool)> = if parallel {
        par::indexed_map(restarts, |i| ascend_once(form, m, k, seed, i as u64))
    } else {
        par::indexed_map_seq(restarts, |i| ascend_once(form, m, k, seed, i as u64))
    };
    let mut best: Option<(f64, DMatrix<f64>, bool)> = None;
    for run in runs {
        let better = match &best {
            None => true,
            Some((bv, _, _)) => run.0 > *bv,
        };
        if better {
            best = Some(run);
        }
    }
    let (estimate, frame, converged) = best.expect("at least one restart");
    Ok(ComassReport {
        estimate,
        argmax_plane: Subspace::new(frame, 1.0)?,
        restarts,
        converged,
        seed,
    })
}

/// True iff the form evaluates to 1 (within tol) on the oriented plane,
/// assuming the form is a verified calibration so that 1 is the extremal
/// value.
pub fn is_calibrated_plane(form: &Multivector, c: &Subspace, tol: f64) -> Result<bool> {
    if form.pure_grade() != Some(c.dim()) {
        return Err(CalibraError::GradeMismatch(
            "form grade does not match plane dimension".into(),
        ));
    }
    Ok((c.calibration_value(form)? - 1.0).abs() <= tol)
}

/// The quadratic form q_Φ(φ) = (φ ∧ φ ∧ Φ)/ν on two-forms, assembled as a
/// symmetric matrix over the monomial basis of Λ².
///
/// Sign conventions: `matrix` is the scalar-level quadratic (for which
/// self-dual forms sit at +1 when Φ = 1 on ℝ⁴). Extending to bundle-valued
/// curvature through the (negative-definite) Killing pairing flips the sign,
/// so the connection-level operator is −matrix; its top eigenvalue is
/// `-min_eigenvalue()` and the energy identity q_Φ(F) = |F|² is attained
/// exactly on `min_eigenvalue`'s eigenspace.
#[derive(Clone, Debug)]
pub struct YangMillsQuadratic {
    pub phi: Multivector,
    pub basis_masks: Vec<u32>,
    pub matrix: DMatrix<f64>,
    eigenvalues: DVector<f64>,
    eigenvectors: DMatrix<f64>,
}

impl YangMillsQuadratic {
    pub fn top_eigenvalue(&self) -> f64 {
        self.eigenvalues
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min)
    }

    /// Whether q_Φ(φ) ≤ |φ|² holds for every scalar two-form.
    pub fn is_calibrating_scalar(&self) -> bool {
        self.top_eigenvalue() <= 1.0 + 1e-9
    }

    /// Whether the connection-level bound (through the Killing extension)
    /// holds: −q_Φ(φ) ≤ |φ|².
    pub fn is_calibrating_for_connections(&self) -> bool {
        self.min_eigenvalue() >= -1.0 - 1e-9
    }

    /// Scale factor making the connection-level top eigenvalue exactly one;
    /// the normalized form is c·Φ with c = −1/λ_min (the sign flips when the
    /// extremal eigenvalue of the raw form is positive).
    pub fn connection_normalization(&self) -> f64 {
        -1.0 / self.min_eigenvalue()
    }

    /// Orthonormal basis of the eigenspace for eigenvalues within tol of λ.
    pub fn eigenspace(&self, lambda: f64, tol: f64) -> DMatrix<f64> {
        let cols: Vec<usize> = (0..self.eigenvalues.len())
            .filter(|&i| (self.eigenvalues[i] - lambda).abs() <= tol * (1.0 + lambda.abs()))
            .collect();
        let mut out = DMatrix::zeros(self.basis_masks.len(), cols.len());
        for (j, &i) in cols.iter().enumerate() {
            out.set_column(j, &self.eigenvectors.column(i));
        }
        out
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.eigenvalues.iter().cloned().collect();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v
    }

    /// Clustered spectrum as (eigenvalue, multiplicity) pairs.
    pub fn spectrum(&self, tol: f64) -> Vec<(f64, usize)> {
        let mut out: Vec<(f64, usize)> = Vec::new();
        for l in self.eigenvalues() {
            match out.last_mut() {
                Some((rep, count)) if (l - *rep).abs() <= tol * (1.0 + rep.abs()) => *count += 1,
                _ => out.push((l, 1)),
            }
        }
        out
    }
}

/// Assembles q_Φ for a pure (m−4)-form against the volume form with the
/// given orientation.
pub fn ym_quadratic(phi: &Multivector, orientation: f64) -> Result<YangMillsQuadratic> {
    let m = phi.dim();
    if m < 4 {
        return Err(CalibraError::DimensionMismatch(
            "the quadratic form needs ambient dimension at least 4".into(),
        ));
    }
    match phi.pure_grade() {
        Some(g) if g == m - 4 => {}
        None if phi.is_zero() && m == 4 => {}
        Some(0) if m == 4 => {}
        _ => {
            return Err(CalibraError::GradeMismatch(format!(
                "expected a form of degree {}, got grades {:?}",
                m - 4,
                phi.grade_components().iter().map(|(g, _)| *g).collect::<Vec<_>>()
            )))
        }
    }
    let basis_masks = k_subsets(m, 2);
    let n = basis_masks.len();
    let full = (1u32 << m) - 1;
    let mut q = DMatrix::zeros(n, n);
    for (a, &ma) in basis_masks.iter().enumerate() {
        for (b, &mb) in basis_masks.iter().enumerate() {
            if b < a {
                continue;
            }
            let ea = Multivector::basis_form(m, &mask_indices(ma), 1.0)?;
            let eb = Multivector::basis_form(m, &mask_indices(mb), 1.0)?;
            let w = ea.wedge(&eb)?.wedge(phi)?;
            let v = w.coeff(full) * orientation;
            q[(a, b)] = v;
            q[(b, a)] = v;
        }
    }
    let sym = (&q + q.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    Ok(YangMillsQuadratic {
        phi: phi.clone(),
        basis_masks,
        matrix: q,
        eigenvalues: eig.eigenvalues,
        eigenvectors: eig.eigenvectors,
    })
}

fn mask_indices(mask: u32) -> Vec<usize> {
    mask_bits(mask).into_iter().map(|b| b + 1).collect()
}

/// Verdict of the connection-level calibration identity for a curvature
/// tensor: q_Φ(F) = |F|² with q extended through the Killing pairing.
#[derive(Clone, Debug, Serialize)]
pub struct YmCalibrationReport {
    pub is_calibrated: bool,
    /// |F|² − q_Φ(F); nonnegative (up to tolerance) whenever Φ is a
    /// calibrating form, zero exactly on calibrated connections.
    pub slack: f64,
    pub q_value: f64,
    pub energy: f64,
}

/// Evaluates q_Φ(F) = Tr(F ∧ F) ∧ Φ / ν on a curvature tensor and reports
/// the calibration slack |F|² − q_Φ(F).
pub fn classify_ym_calibrated(
    f: &CurvatureTensor,
    phi: &Multivector,
    orientation: f64,
    tol: f64,
) -> Result<YmCalibrationReport> {
    if phi.dim() != f.dim {
        return Err(CalibraError::DimensionMismatch(
            "curvature and calibrating form live on different spaces".into(),
        ));
    }
    let full = (1u32 << f.dim) - 1;
    let mut q_value = 0.0;
    for (fa, aa) in &f.terms {
        for (fb, ab) in &f.terms {
            let wedge = fa.wedge(fb)?.wedge(phi)?;
            let scalar = wedge.coeff(full) * orientation;
            if scalar == 0.0 {
                continue;
            }
            // Tr(A_a A_b) is real for skew-Hermitian matrices
            let trace = (aa * ab).trace().re;
            q_value += scalar * trace;
        }
    }
    let energy = f.norm_sq();
    let slack = energy - q_value;
    Ok(YmCalibrationReport {
        is_calibrated: slack.abs() <= tol * (1.0 + energy),
        slack,
        q_value,
        energy,
    })
}

/// ∫ Tr exp((i/2π)F) ∧ Φ over the torus: the Chern-character pairing. For a
/// Φ-calibrated connection the value is ≤ 0, with equality only for flat
/// bundles.
pub fn chern_pairing(f: &CurvatureTensor, phi: &Multivector, torus: &FlatTorus) -> Result<f64> {
    let m = f.dim;
    if phi.dim() != m {
        return Err(CalibraError::DimensionMismatch(
            "pairing form lives on a different space".into(),
        ));
    }
    if torus.n() != m {
        return Err(CalibraError::DimensionMismatch(
            "torus rank does not match the curvature".into(),
        ));
    }
    let r = f.rank;
    // matrix-valued exterior powers of (i/2π) F
    type MForm = std::collections::BTreeMap<u32, DMatrix<Complex64>>;
    let scale = Complex64::new(0.0, 1.0 / std::f64::consts::TAU);
    let mut fmat: MForm = MForm::new();
    for (form, coeff) in &f.terms {
        for (mask, c) in form.terms() {
            let entry = fmat
                .entry(mask)
                .or_insert_with(|| DMatrix::from_element(r, r, Complex64::new(0.0, 0.0)));
            *entry += coeff * (scale * c);
        }
    }
    // ch-form = Σ_k Tr(F^k)/k! as a complex scalar form
    let mut ch: std::collections::BTreeMap<u32, Complex64> = std::collections::BTreeMap::new();
    ch.insert(0, Complex64::new(r as f64, 0.0));
    let mut power: MForm = MForm::new();
    power.insert(0, DMatrix::identity(r, r));
    let mut factorial = 1.0;
    for k in 1..=(m / 2) {
        let mut next: MForm = MForm::new();
        for (ma, a) in &power {
            for (mb, b) in &fmat {
                let s = crate::exterior::wedge_sign(*ma, *mb);
                if s != 0.0 {
                    let entry = next
                        .entry(ma | mb)
                        .or_insert_with(|| DMatrix::from_element(r, r, Complex64::new(0.0, 0.0)));
                    *entry += (a * b) * Complex64::new(s, 0.0);
                }
            }
        }
        power = next;
        factorial *= k as f64;
        for (mask, mat) in &power {
            let tr = mat.trace() / Complex64::new(factorial, 0.0);
            *ch.entry(*mask)
                .or_insert_with(|| Complex64::new(0.0, 0.0)) += tr;
        }
    }
    // pair against Φ: the coefficient of the volume monomial
    let full = (1u32 << m) - 1;
    let mut total = Complex64::new(0.0, 0.0);
    for (mask, z) in &ch {
        for (pmask, pc) in phi.terms() {
            if mask | pmask == full {
                let s = crate::exterior::wedge_sign(*mask, pmask);
                if s != 0.0 {
                    total += z * Complex64::new(pc * s, 0.0);
                }
            }
        }
    }
    let value = total * Complex64::new(torus.covolume() * torus.orientation(), 0.0);
    if value.im.abs() > 1e-9 * (1.0 + value.re.abs()) {
        return Err(CalibraError::Malformed(format!(
            "pairing came out non-real ({} + {}i)",
            value.re, value.im
        )));
    }
    Ok(value.re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exterior::Metric;
    use crate::forms::{
        build_g2_three_form, build_holomorphic_volume, build_kahler, build_spin7_four_form,
    };
    use crate::subspace::{cayley_base_plane, rotated_real_plane};
    use nalgebra::DMatrix;

    #[test]
    fn comass_of_the_volume_form() {
        let nu = Multivector::volume_form(4);
        let report = comass_estimate(&nu, 8, 7).unwrap();
        assert!((report.estimate - 1.0).abs() < 1e-9);
        assert!(report.converged);
    }

    #[test]
    fn comass_of_the_kahler_form() {
        let omega = build_kahler(2).unwrap();
        let report = comass_estimate(&omega, 16, 11).unwrap();
        assert!((report.estimate - 1.0).abs() < 1e-7, "estimate {}", report.estimate);
        // argmax is a complex line
        assert!(crate::subspace::is_a_subspace(
            &report.argmax_plane.with_orientation(1.0),
            crate::algebra::AlgebraLevel::COMPLEX
        )
        .unwrap_or(false) || {
            // tolerance: the optimizer stops at 1e-12 improvement, so allow a
            // slightly loose J-invariance check
            let e1 = crate::algebra::AlgebraElement::basis(crate::algebra::AlgebraLevel::COMPLEX, 1).unwrap();
            let j = crate::forms::module_matrix(crate::algebra::Action::Right, &e1, 2);
            report.argmax_plane.invariance_defect(&j) < 1e-4
        });
    }

    #[test]
    fn comass_determinism() {
        let omega = build_kahler(2).unwrap();
        let a = comass_estimate(&omega, 8, 123).unwrap();
        let b = comass_estimate(&omega, 8, 123).unwrap();
        assert_eq!(a.estimate.to_bits(), b.estimate.to_bits());
        let seq = comass_estimate_opts(&omega, 8, 123, false).unwrap();
        assert_eq!(a.estimate.to_bits(), seq.estimate.to_bits());
    }

    #[test]
    fn calibrated_planes() {
        let (re, im) = build_holomorphic_volume(3).unwrap();
        let c = rotated_real_plane(3, 0.0);
        assert!(is_calibrated_plane(&re, &c, 1e-12).unwrap());
        assert!(!is_calibrated_plane(&im, &c, 1e-12).unwrap());
        let theta = build_spin7_four_form();
        assert!(is_calibrated_plane(&theta, &cayley_base_plane(), 1e-12).unwrap());
        // grade mismatch is an error
        assert!(is_calibrated_plane(&re, &cayley_base_plane(), 1e-12).is_err());
    }

    #[test]
    fn quadratic_form_on_r4() {
        let one = Multivector::scalar(4, 1.0);
        let q = ym_quadratic(&one, 1.0).unwrap();
        let spec = q.spectrum(1e-9);
        assert_eq!(spec.len(), 2);
        assert!((spec[0].0 + 1.0).abs() < 1e-12 && spec[0].1 == 3);
        assert!((spec[1].0 - 1.0).abs() < 1e-12 && spec[1].1 == 3);
        // +1 eigenspace is the self-dual space for the same orientation
        let g = Metric::euclidean(4);
        let plus = q.eigenspace(1.0, 1e-9);
        for j in 0..plus.ncols() {
            let mut form = Multivector::zero(4);
            for (i, &mask) in q.basis_masks.iter().enumerate() {
                if plus[(i, j)].abs() > 0.0 {
                    form = form
                        .add(&Multivector::basis_form(4, &mask_indices(mask), plus[(i, j)]).unwrap())
                        .unwrap();
                }
            }
            let star = form.hodge_star(&g, 1.0).unwrap();
            assert!(star.sub(&form).unwrap().norm_sq() < 1e-20);
        }
    }

    #[test]
    fn quadratic_form_of_spin7() {
        let theta = build_spin7_four_form();
        let q = ym_quadratic(&theta, 1.0).unwrap();
        let spec = q.spectrum(1e-8);
        assert_eq!(spec.len(), 2);
        assert!((spec[0].0 + 1.0).abs() < 1e-9 && spec[0].1 == 21);
        assert!((spec[1].0 - 3.0).abs() < 1e-9 && spec[1].1 == 7);
        // raw Θ fails the scalar bound but is exactly normalized on the
        // connection side
        assert!(!q.is_calibrating_scalar());
        assert!(q.is_calibrating_for_connections());
        assert!((q.connection_normalization() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn kahler_power_quadratic_on_c3() {
        let omega = build_kahler(3).unwrap();
        let q = ym_quadratic(&omega, 1.0).unwrap();
        // the primitive (1,1) block sits at −1
        let dec = crate::groups::decompose_two_forms(crate::algebra::AlgebraLevel::COMPLEX, 3).unwrap();
        let prim = dec
            .components
            .iter()
            .find(|c| c.name == "lambda_11_0")
            .unwrap();
        let minus = q.eigenspace(-1.0, 1e-9);
        assert_eq!(minus.ncols(), prim.basis.ncols());
        assert!(crate::linalg::subspace_distance(&minus, &prim.basis) < 1e-9);
    }

    fn u1_curvature(form: Multivector) -> CurvatureTensor {
        let coeff = DMatrix::from_element(1, 1, Complex64::new(0.0, 1.0));
        CurvatureTensor::new(form.dim(), 1, vec![(form, coeff)]).unwrap()
    }

    #[test]
    fn antiselfdual_curvature_is_calibrated_by_one() {
        let one = Multivector::scalar(4, 1.0);
        // anti-self-dual for the standard orientation: e12 − e34
        let asd = Multivector::basis_form(4, &[1, 2], 1.0)
            .unwrap()
            .sub(&Multivector::basis_form(4, &[3, 4], 1.0).unwrap())
            .unwrap();
        let f = u1_curvature(asd);
        let report = classify_ym_calibrated(&f, &one, 1.0, 1e-9).unwrap();
        assert!(report.is_calibrated, "slack {}", report.slack);
        // the self-dual one is maximally uncalibrated
        let sd = Multivector::basis_form(4, &[1, 2], 1.0)
            .unwrap()
            .add(&Multivector::basis_form(4, &[3, 4], 1.0).unwrap())
            .unwrap();
        let f = u1_curvature(sd);
        let report = classify_ym_calibrated(&f, &one, 1.0, 1e-9).unwrap();
        assert!(!report.is_calibrated);
        assert!(report.slack > 1.0);
        // zero curvature is trivially calibrated
        let z = CurvatureTensor::zero(4, 1);
        let report = classify_ym_calibrated(&z, &one, 1.0, 1e-9).unwrap();
        assert!(report.is_calibrated && report.slack.abs() < 1e-15);
    }

    #[test]
    fn trace_part_is_not_calibrated() {
        let omega = build_kahler(2).unwrap();
        let f = u1_curvature(omega);
        let one = Multivector::scalar(4, 1.0);
        let report = classify_ym_calibrated(&f, &one, 1.0, 1e-9).unwrap();
        assert!(!report.is_calibrated);
    }

    #[test]
    fn g2_quadratic_normalization_is_signed() {
        let omega = build_g2_three_form();
        let q = ym_quadratic(&omega, 1.0).unwrap();
        let spec = q.spectrum(1e-8);
        assert_eq!(spec.len(), 2);
        assert!((spec[0].0 + 2.0).abs() < 1e-9 && spec[0].1 == 7);
        assert!((spec[1].0 - 1.0).abs() < 1e-9 && spec[1].1 == 14);
        // the recorded normalization carries a sign: c = −1/λ_min = +1/2 puts
        // the wrong block at the extreme, so the calibrating form is −Ω/…;
        // with c = −1 the 14-block is extremal
        let flipped = ym_quadratic(&omega.scale(-1.0), 1.0).unwrap();
        assert!((flipped.min_eigenvalue() + 1.0).abs() < 1e-9);
        let extremal = flipped.eigenspace(-1.0, 1e-8);
        assert_eq!(extremal.ncols(), 14);
    }


    #[test]
    fn quaternionic_theta_spectrum() {
        // recorded: the scalar quadratic of Θ = ω_I²+ω_J²+ω_K² on ℝ⁸ has
        // eigenvalue −6 on Sym²V, +10 on Sym²S and +2 on the remainder, so
        // the connection normalization is 1/6 with extremal block Sym²V
        let theta = crate::forms::build_quaternionic_theta(2).unwrap();
        let q = ym_quadratic(&theta, 1.0).unwrap();
        let spec = q.spectrum(1e-8);
        assert_eq!(spec.len(), 3);
        assert!((spec[0].0 + 6.0).abs() < 1e-9 && spec[0].1 == 10);
        assert!((spec[1].0 - 2.0).abs() < 1e-9 && spec[1].1 == 15);
        assert!((spec[2].0 - 10.0).abs() < 1e-9 && spec[2].1 == 3);
        assert!((q.connection_normalization() - 1.0 / 6.0).abs() < 1e-12);
        let dec = crate::groups::decompose_two_forms(crate::algebra::AlgebraLevel::QUATERNION, 2).unwrap();
        let sym2v = dec.components.iter().find(|c| c.name == "sym2_v").unwrap();
        let extremal = q.eigenspace(-6.0, 1e-8);
        assert!(crate::linalg::subspace_distance(&extremal, &sym2v.basis) < 1e-9);
    }

    #[test]
    fn chern_pairing_signs() {
        let torus = FlatTorus::standard(4);
        let one = Multivector::scalar(4, 1.0);
        let asd = Multivector::basis_form(4, &[1, 2], 1.0)
            .unwrap()
            .sub(&Multivector::basis_form(4, &[3, 4], 1.0).unwrap())
            .unwrap();
        let sd = Multivector::basis_form(4, &[1, 2], 1.0)
            .unwrap()
            .add(&Multivector::basis_form(4, &[3, 4], 1.0).unwrap())
            .unwrap();
        let zero = CurvatureTensor::zero(4, 1);
        assert_eq!(chern_pairing(&zero, &one, &torus).unwrap(), 0.0);
        let v_asd = chern_pairing(&u1_curvature(asd.clone()), &one, &torus).unwrap();
        assert!(v_asd < -1e-6, "got {v_asd}");
        let v_sd = chern_pairing(&u1_curvature(sd), &one, &torus).unwrap();
        assert!(v_sd > 1e-6, "got {v_sd}");
        // explicit value: −(1/8π²)·(−|f|² covol) with |f∧f| = 2
        let expect = 2.0 / (8.0 * std::f64::consts::PI * std::f64::consts::PI);
        assert!((v_asd + expect).abs() < 1e-12);
    }
}
