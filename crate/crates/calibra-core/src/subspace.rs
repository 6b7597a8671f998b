//! Oriented linear subspaces and their classification: algebra-stable
//! subspaces, half-dimensional Lagrangian subspaces with their witness plane
//! L ⊂ Im 𝔸, residual complex structures, determinants λ(C), and the special
//! classes (special Lagrangian, complex Lagrangian, associative,
//! coassociative, Cayley).

use crate::algebra::{AlgebraElement, AlgebraLevel, Action};
use crate::error::{CalibraError, Result};
use crate::exterior::{k_subsets, Multivector};
use crate::forms::{module_matrix, omega_u_form, CanonicalFormSet};
use crate::linalg::nullspace;
use crate::rand_util::{random_orthonormal_frame, Prng};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

/// An oriented k-plane in ℝ^m, canonicalized to an orthonormal frame.
#[derive(Clone, Debug)]
pub struct Subspace {
    ambient_dim: usize,
    k: usize,
    frame: DMatrix<f64>,
    orientation: f64,
}

impl Subspace {
    /// Wraps an already-orthonormal frame (checked to 1e-12).
    pub fn new(frame: DMatrix<f64>, orientation: f64) -> Result<Self> {
        let k = frame.ncols();
        let m = frame.nrows();
        if k > m {
            return Err(CalibraError::DimensionMismatch(
                "more frame vectors than ambient dimensions".into(),
            ));
        }
        let defect = (frame.transpose() * &frame - DMatrix::identity(k, k)).norm();
        if defect > 1e-12 * (k as f64).max(1.0) {
            return Err(CalibraError::Malformed(
                "frame columns are not orthonormal".into(),
            ));
        }
        if orientation != 1.0 && orientation != -1.0 {
            return Err(CalibraError::Malformed("orientation must be ±1".into()));
        }
        Ok(Subspace {
            ambient_dim: m,
            k,
            frame,
            orientation,
        })
    }

    /// Re-orthonormalizes a spanning set by QR; rejects rank-deficient input.
    pub fn from_spanning(columns: DMatrix<f64>, orientation: f64) -> Result<Self> {
        let m = columns.nrows();
        let k = columns.ncols();
        if k == 0 || k > m {
            return Err(CalibraError::Malformed("empty or oversized frame".into()));
        }
        let qr = columns.clone().qr();
        let mut q = qr.q();
        let r = qr.r();
        let scale = (0..k).map(|j| r[(j, j)].abs()).fold(0.0f64, f64::max);
        for j in 0..k {
            if r[(j, j)].abs() <= 1e-10 * scale.max(1e-30) {
                return Err(CalibraError::Malformed("frame is rank deficient".into()));
            }
            if r[(j, j)] < 0.0 {
                for i in 0..m {
                    q[(i, j)] = -q[(i, j)];
                }
            }
        }
        Subspace::new(q, orientation)
    }

    /// The span of the given 1-based coordinate axes.
    pub fn coordinate_plane(m: usize, axes: &[usize], orientation: f64) -> Result<Self> {
        let mut frame = DMatrix::zeros(m, axes.len());
        for (j, &a) in axes.iter().enumerate() {
            if a == 0 || a > m {
                return Err(CalibraError::Malformed(format!("axis {a} out of range")));
            }
            frame[(a - 1, j)] = 1.0;
        }
        Subspace::new(frame, orientation)
    }

    pub fn random(m: usize, k: usize, rng: &mut Prng) -> Self {
        Subspace {
            ambient_dim: m,
            k,
            frame: random_orthonormal_frame(m, k, rng),
            orientation: 1.0,
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.k
    }

    pub fn frame(&self) -> &DMatrix<f64> {
        &self.frame
    }

    pub fn orientation(&self) -> f64 {
        self.orientation
    }

    pub fn with_orientation(&self, orientation: f64) -> Self {
        let mut out = self.clone();
        out.orientation = orientation;
        out
    }

    /// Orthogonal projector onto the plane.
    pub fn projector(&self) -> DMatrix<f64> {
        &self.frame * self.frame.transpose()
    }

    /// Image under a linear map (re-orthonormalized); orientation carried
    /// along.
    pub fn transform(&self, g: &DMatrix<f64>) -> Result<Self> {
        Subspace::from_spanning(g * &self.frame, self.orientation)
    }

    /// Pullback of an ambient form to frame coordinates.
    pub fn restrict(&self, form: &Multivector) -> Result<Multivector> {
        form.pullback(&self.frame)
    }

    /// Value of a pure grade-k form on the oriented plane.
    pub fn calibration_value(&self, form: &Multivector) -> Result<f64> {
        Ok(form.eval_on_frame(&self.frame)? * self.orientation)
    }

    /// Residual of invariance of the plane under a linear map:
    /// ‖(I - P Pᵀ) M P‖.
    pub fn invariance_defect(&self, map: &DMatrix<f64>) -> f64 {
        let image = map * &self.frame;
        let tangent = &self.frame * (self.frame.transpose() * &image);
        (image - tangent).norm()
    }
}

#[derive(Serialize, Deserialize)]
struct SubspaceJson {
    dim: usize,
    frame: Vec<Vec<f64>>,
    #[serde(default = "default_orientation")]
    orientation: f64,
}

fn default_orientation() -> f64 {
    1.0
}

impl Serialize for Subspace {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let frame = (0..self.k)
            .map(|j| (0..self.ambient_dim).map(|i| self.frame[(i, j)]).collect())
            .collect();
        SubspaceJson {
            dim: self.ambient_dim,
            frame,
            orientation: self.orientation,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Subspace {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = SubspaceJson::deserialize(deserializer)?;
        if raw.frame.is_empty() {
            return Err(serde::de::Error::custom("empty frame"));
        }
        if raw.frame.iter().any(|c| c.len() != raw.dim) {
            return Err(serde::de::Error::custom("frame vector length mismatch"));
        }
        let k = raw.frame.len();
        let columns = DMatrix::from_fn(raw.dim, k, |i, j| raw.frame[j][i]);
        Subspace::from_spanning(columns, raw.orientation).map_err(serde::de::Error::custom)
    }
}

/// True iff the plane is stable under the module action of every basis unit
/// of the algebra (residual ≤ 1e-10), i.e. invariant under all the complex
/// structures J_u. This right-module stability is the notion preserved by
/// twisted isomorphisms; demanding left-stability as well would make the
/// class fail to be Sp(n)Sp(1)-invariant. For the octonions only the trivial
/// subspaces pass.
pub fn is_a_subspace(c: &Subspace, algebra: AlgebraLevel) -> Result<bool> {
    let d = algebra.dim();
    if c.ambient_dim % d != 0 {
        return Err(CalibraError::DimensionMismatch(format!(
            "ambient dimension {} is not a multiple of {}",
            c.ambient_dim, d
        )));
    }
    let rank = c.ambient_dim / d;
    let mut worst = 0.0f64;
    for unit in 1..d {
        let e = AlgebraElement::basis(algebra, unit)?;
        let m = module_matrix(Action::Right, &e, rank);
        worst = worst.max(c.invariance_defect(&m));
    }
    Ok(worst <= 1e-10 * (c.k as f64).max(1.0))
}

/// A certified witness plane L ⊂ Im 𝔸 for a half-dimensional Lagrangian
/// subspace: dim L = ½ dim 𝔸 and every ω_u with u ∈ L restricts to zero.
#[derive(Clone, Debug)]
pub struct LagrangianWitness {
    pub algebra: AlgebraLevel,
    pub rank: usize,
    pub generators: Vec<AlgebraElement>,
    pub two_forms: Vec<Multivector>,
    /// Dimension of the full kernel of u ↦ ω_u|_C (never exceeds ½ dim 𝔸).
    pub kernel_dim: usize,
    pub residual: f64,
}

/// Dimension of {u ∈ Im 𝔸 : ω_u|_C = 0} for a middle-dimensional plane.
pub fn lagrangian_kernel_dimension(c: &Subspace, algebra: AlgebraLevel) -> Result<usize> {
    Ok(lagrangian_kernel(c, algebra)?.ncols())
}

fn lagrangian_kernel(c: &Subspace, algebra: AlgebraLevel) -> Result<DMatrix<f64>> {
    let d = algebra.dim();
    if d < 2 {
        return Err(CalibraError::RequiresLevel {
            required: 1,
            got: algebra.index(),
        });
    }
    if c.ambient_dim % d != 0 {
        return Err(CalibraError::DimensionMismatch(format!(
            "ambient dimension {} is not a multiple of {}",
            c.ambient_dim, d
        )));
    }
    if 2 * c.k != c.ambient_dim {
        return Err(CalibraError::NotMiddleDimensional);
    }
    let rank = c.ambient_dim / d;
    let pair_masks = k_subsets(c.k, 2);
    let mut w = DMatrix::zeros(pair_masks.len(), d - 1);
    for unit in 1..d {
        let u = AlgebraElement::basis(algebra, unit)?;
        let omega = omega_u_form(&u, rank)?;
        let restricted = c.restrict(&omega)?;
        for (row, &mask) in pair_masks.iter().enumerate() {
            w[(row, unit - 1)] = restricted.coeff(mask);
        }
    }
    Ok(nullspace(&w, 1e-8))
}

/// Finds a witness plane of dimension ½ dim 𝔸 when one exists. The kernel of
/// u ↦ ω_u|_C can never be larger than that, so the witness is the kernel
/// truncated to exactly half the algebra dimension.
pub fn find_lagrangian_witness(
    c: &Subspace,
    algebra: AlgebraLevel,
) -> Result<Option<LagrangianWitness>> {
    let kernel = lagrangian_kernel(c, algebra)?;
    let d = algebra.dim();
    let rank = c.ambient_dim / d;
    let need = d / 2;
    let kernel_dim = kernel.ncols();
    if kernel_dim < need {
        return Ok(None);
    }
    let mut generators = Vec::with_capacity(need);
    let mut two_forms = Vec::with_capacity(need);
    let mut residual = 0.0f64;
    for j in 0..need {
        let mut coeffs = vec![0.0; d];
        for i in 1..d {
            coeffs[i] = kernel[(i - 1, j)];
        }
        let u = AlgebraElement::new(algebra, coeffs)?.normalized();
        let omega = omega_u_form(&u, rank)?;
        let restr = c.restrict(&omega)?;
        residual = residual.max(restr.norm_sq().sqrt());
        generators.push(u);
        two_forms.push(omega);
    }
    Ok(Some(LagrangianWitness {
        algebra,
        rank,
        generators,
        two_forms,
        kernel_dim,
        residual,
    }))
}

/// For every unit direction v ∈ Im 𝔸 orthogonal to the witness plane, the
/// certified subspace is J_v-complex; returns those directions after
/// verifying the invariance (residual ≤ 1e-9 each).
pub fn residual_complex_structures(
    c: &Subspace,
    witness: &LagrangianWitness,
) -> Result<Vec<AlgebraElement>> {
    let d = witness.algebra.dim();
    // re-verify the witness against this subspace
    for omega in &witness.two_forms {
        let r = c.restrict(omega)?.norm_sq().sqrt();
        if r > 1e-9 * (c.k as f64) {
            return Err(CalibraError::StaleWitness(format!(
                "witness two-form restricts with norm {r:.3e}"
            )));
        }
    }
    // orthonormal basis of Im A ⊖ L
    let mut gen_mat = DMatrix::zeros(witness.generators.len(), d - 1);
    for (row, g) in witness.generators.iter().enumerate() {
        for i in 1..d {
            gen_mat[(row, i - 1)] = g.coeffs()[i];
        }
    }
    let complement = nullspace(&gen_mat, 1e-10);
    let mut out = Vec::new();
    for j in 0..complement.ncols() {
        let mut coeffs = vec![0.0; d];
        for i in 1..d {
            coeffs[i] = complement[(i - 1, j)];
        }
        let v = AlgebraElement::new(witness.algebra, coeffs)?.normalized();
        let m = module_matrix(Action::Right, &v, witness.rank);
        let defect = c.invariance_defect(&m);
        if defect > 1e-9 * (c.k as f64).max(1.0) {
            return Err(CalibraError::StaleWitness(format!(
                "J_v invariance fails with residual {defect:.3e}"
            )));
        }
        out.push(v);
    }
    Ok(out)
}

/// Special type of a half-Lagrangian subspace.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SpecialType {
    TypeI,
    TypeII,
    Neither,
}

/// The determinant-like invariant λ(C) of a half-Lagrangian subspace.
#[derive(Clone, Debug)]
pub enum LambdaKind {
    /// Phase θ ∈ [0, 2π) with Ω(frame) = r e^{iθ} on the oriented frame.
    ComplexPhase(f64),
    /// The unit imaginary quaternion (up to sign) whose complex structure
    /// preserves the plane.
    QuaternionicLine(AlgebraElement),
    /// The octonionic case: λ(C) = C itself.
    OctonionicSelf,
}

#[derive(Clone, Debug)]
pub struct LambdaDeterminant {
    pub kind: LambdaKind,
    pub type_flag: SpecialType,
}

/// Computes λ(C) for a certified half-Lagrangian plane and the special type.
pub fn lambda_determinant(
    c: &Subspace,
    algebra: AlgebraLevel,
    forms: &CanonicalFormSet,
) -> Result<LambdaDeterminant> {
    let witness = find_lagrangian_witness(c, algebra)?
        .ok_or_else(|| CalibraError::Malformed("subspace is not half-Lagrangian".into()))?;
    match algebra {
        AlgebraLevel::COMPLEX => {
            let (re, im) = forms
                .hol_volume
                .as_ref()
                .ok_or_else(|| CalibraError::Malformed("form set lacks a holomorphic volume".into()))?;
            let re_val = c.calibration_value(re)?;
            let im_val = c.calibration_value(im)?;
            let modulus = re_val.hypot(im_val);
            let mut phase = im_val.atan2(re_val);
            if phase < 0.0 {
                phase += std::f64::consts::TAU;
            }
            let tol = 1e-9 * (1.0 + modulus);
            let type_flag = if im_val.abs() <= tol {
                SpecialType::TypeI
            } else if re_val.abs() <= tol {
                SpecialType::TypeII
            } else {
                SpecialType::Neither
            };
            Ok(LambdaDeterminant {
                kind: LambdaKind::ComplexPhase(phase),
                type_flag,
            })
        }
        AlgebraLevel::QUATERNION => {
            // the kernel is the two-plane L; its orthogonal complement in
            // Im H is the (±) complex-structure direction
            let mut gen_mat = DMatrix::zeros(witness.generators.len(), 3);
            for (row, g) in witness.generators.iter().enumerate() {
                for i in 1..4 {
                    gen_mat[(row, i - 1)] = g.coeffs()[i];
                }
            }
            let complement = nullspace(&gen_mat, 1e-10);
            if complement.ncols() != 1 {
                return Err(CalibraError::Malformed(
                    "quaternionic witness complement is not a line".into(),
                ));
            }
            let mut coeffs = vec![0.0; 4];
            for i in 1..4 {
                coeffs[i] = complement[(i - 1, 0)];
            }
            let mut u = AlgebraElement::new(algebra, coeffs)?.normalized();
            // fix the sign ambiguity deterministically
            if let Some(first) = u.coeffs().iter().find(|v| v.abs() > 1e-12) {
                if *first < 0.0 {
                    u = u.scale(-1.0);
                }
            }
            // type I and type II coincide quaternionically; report a single
            // complex-Lagrangian class through TypeI
            Ok(LambdaDeterminant {
                kind: LambdaKind::QuaternionicLine(u),
                type_flag: SpecialType::TypeI,
            })
        }
        AlgebraLevel::OCTONION => {
            // λ(C) = C; the type is read off from the position of 1 ∈ O
            let e0 = DVector::from_fn(8, |i, _| if i == 0 { 1.0 } else { 0.0 });
            let inside = (c.projector() * &e0).norm();
            let type_flag = if (inside - 1.0).abs() <= 1e-9 {
                SpecialType::TypeI
            } else if inside <= 1e-9 {
                SpecialType::TypeII
            } else {
                SpecialType::Neither
            };
            Ok(LambdaDeterminant {
                kind: LambdaKind::OctonionicSelf,
                type_flag,
            })
        }
        _ => Err(CalibraError::RequiresLevel {
            required: 1,
            got: 0,
        }),
    }
}

/// Residual of closure of a 3-plane in Im 𝕆 under the cross product.
pub fn associative_defect(c: &Subspace) -> Result<f64> {
    if c.ambient_dim != 7 || c.k != 3 {
        return Err(CalibraError::DimensionMismatch(
            "associativity is a property of 3-planes in Im O".into(),
        ));
    }
    let o = AlgebraLevel::OCTONION;
    let embed = |col: usize| -> AlgebraElement {
        let mut coeffs = vec![0.0; 8];
        for i in 0..7 {
            coeffs[i + 1] = c.frame[(i, col)];
        }
        AlgebraElement::new(o, coeffs).unwrap()
    };
    let p = c.projector();
    let mut worst = 0.0f64;
    for a in 0..3 {
        for b in (a + 1)..3 {
            let cross = crate::algebra::cross_product(&embed(a), &embed(b))?;
            let v = DVector::from_fn(7, |i, _| cross.coeffs()[i + 1]);
            let out_of_plane = &v - &p * &v;
            worst = worst.max(out_of_plane.norm());
        }
    }
    Ok(worst)
}

/// Full classification report for a linear subspace against the canonical
/// forms of its ambient model.
#[derive(Clone, Debug, Serialize)]
pub struct SubspaceClassification {
    pub ambient: String,
    pub verdicts: Vec<(String, bool)>,
    pub residuals: Vec<(String, f64)>,
    pub phase: Option<f64>,
    pub primary: String,
}

/// Evaluates the defining restrictions for the special subspace classes of
/// the ambient geometry and names the class.
pub fn classify_special_lagrangian(
    c: &Subspace,
    forms: &CanonicalFormSet,
    tol: f64,
) -> Result<SubspaceClassification> {
    let mut verdicts = Vec::new();
    let mut residuals = Vec::new();
    let mut phase = None;
    let mut primary = "generic".to_string();
    match (forms.algebra, c.ambient_dim) {
        (AlgebraLevel::COMPLEX, m) if m == forms.ambient_dim => {
            if 2 * c.k != m {
                return Err(CalibraError::NotMiddleDimensional);
            }
            let omega = forms.kahler.as_ref().unwrap();
            let (re, im) = forms.hol_volume.as_ref().unwrap();
            let omega_res = c.restrict(omega)?.norm_sq().sqrt();
            let re_val = c.calibration_value(re)?;
            let im_val = c.calibration_value(im)?;
            residuals.push(("omega_restriction".into(), omega_res));
            residuals.push(("im_volume_value".into(), im_val.abs()));
            residuals.push(("re_volume_value".into(), re_val.abs()));
            let lagrangian = omega_res <= tol;
            verdicts.push(("lagrangian".into(), lagrangian));
            if lagrangian {
                let mut p = im_val.atan2(re_val);
                if p < 0.0 {
                    p += std::f64::consts::TAU;
                }
                phase = Some(p);
                let type_i = im_val.abs() <= tol;
                let type_ii = re_val.abs() <= tol;
                verdicts.push(("special_type_i".into(), type_i));
                verdicts.push(("special_type_ii".into(), type_ii));
                primary = if type_i {
                    "special Lagrangian (phase 0 mod pi)".into()
                } else if type_ii {
                    "special Lagrangian (phase pi/2 mod pi)".into()
                } else {
                    format!("Lagrangian (phase {p:.6})")
                };
            }
        }
        (AlgebraLevel::QUATERNION, m) if m == forms.ambient_dim => {
            if 2 * c.k != m {
                return Err(CalibraError::NotMiddleDimensional);
            }
            let [wi, wj, wk] = forms.hk_triple.as_ref().unwrap();
            for (name, w) in [("omega_i", wi), ("omega_j", wj), ("omega_k", wk)] {
                residuals.push((
                    format!("{name}_restriction"),
                    c.restrict(w)?.norm_sq().sqrt(),
                ));
            }
            let witness = find_lagrangian_witness(c, AlgebraLevel::QUATERNION)?;
            let is_half = witness.is_some();
            verdicts.push(("c_lagrangian".into(), is_half));
            if is_half {
                primary = "complex Lagrangian".into();
            }
        }
        (AlgebraLevel::OCTONION, 8) => {
            if c.k != 4 {
                return Err(CalibraError::DimensionMismatch(
                    "Cayley classification needs a 4-plane in R^8".into(),
                ));
            }
            let theta = forms.spin7_four.as_ref().unwrap();
            let value = c.calibration_value(theta)?;
            residuals.push(("theta_value_minus_one".into(), (value - 1.0).abs()));
            let witness = find_lagrangian_witness(c, AlgebraLevel::OCTONION)?;
            let cayley = witness.is_some();
            verdicts.push(("cayley".into(), cayley));
            verdicts.push(("theta_calibrated_oriented".into(), (value - 1.0).abs() <= tol));
            if cayley {
                primary = "Cayley".into();
                let lambda = lambda_determinant(c, AlgebraLevel::OCTONION, forms)?;
                verdicts.push((
                    "special_type_i".into(),
                    lambda.type_flag == SpecialType::TypeI,
                ));
                verdicts.push((
                    "special_type_ii".into(),
                    lambda.type_flag == SpecialType::TypeII,
                ));
            }
        }
        (AlgebraLevel::OCTONION, 7) => {
            let omega = forms.g2_three.as_ref().unwrap();
            let theta7 = forms.g2_four.as_ref().unwrap();
            match c.k {
                3 => {
                    let defect = associative_defect(c)?;
                    let value = c.calibration_value(omega)?;
                    residuals.push(("cross_closure".into(), defect));
                    residuals.push(("omega_value_minus_one".into(), (value.abs() - 1.0).abs()));
                    let associative = defect <= tol;
                    verdicts.push(("associative".into(), associative));
                    if associative {
                        primary = "associative".into();
                    }
                }
                4 => {
                    let omega_res = c.restrict(omega)?.norm_sq().sqrt();
                    let value = c.calibration_value(theta7)?;
                    residuals.push(("omega_restriction".into(), omega_res));
                    residuals.push(("theta_value_minus_one".into(), (value.abs() - 1.0).abs()));
                    let coassociative = omega_res <= tol;
                    verdicts.push(("coassociative".into(), coassociative));
                    if coassociative {
                        primary = "coassociative".into();
                    }
                }
                _ => {
                    return Err(CalibraError::DimensionMismatch(
                        "Im O classification needs a 3- or 4-plane".into(),
                    ))
                }
            }
        }
        _ => {
            return Err(CalibraError::DimensionMismatch(format!(
                "subspace dimension {} does not match the {} form set",
                c.ambient_dim,
                forms.algebra.name()
            )))
        }
    }
    Ok(SubspaceClassification {
        ambient: format!("{}^{} (R^{})", forms.algebra.name(), forms.rank, c.ambient_dim),
        verdicts,
        residuals,
        phase,
        primary,
    })
}

/// The quaternionic coordinate plane ℍ × {0} ⊂ 𝕆 with its calibrated
/// orientation (the coordinate frame evaluates Θ to −1, so the oriented
/// plane carries orientation −1).
pub fn cayley_base_plane() -> Subspace {
    Subspace::coordinate_plane(8, &[1, 2, 3, 4], -1.0).unwrap()
}

/// The plane e^{iθ}·ℝⁿ ⊂ ℂⁿ.
pub fn rotated_real_plane(n: usize, theta: f64) -> Subspace {
    let mut frame = DMatrix::zeros(2 * n, n);
    for j in 0..n {
        frame[(2 * j, j)] = theta.cos();
        frame[(2 * j + 1, j)] = theta.sin();
    }
    Subspace::new(frame, 1.0).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::build_quaternionic_theta;
    use crate::groups::stabilizer_algebra;
    use crate::rand_util::seeded_rng;

    #[test]
    fn coordinate_complex_line_is_a_subspace() {
        // C x {0} in C^2
        let c = Subspace::coordinate_plane(4, &[1, 2], 1.0).unwrap();
        assert!(is_a_subspace(&c, AlgebraLevel::COMPLEX).unwrap());
        // the real plane span(dx1, dx2) is not J-invariant
        let r = Subspace::coordinate_plane(4, &[1, 3], 1.0).unwrap();
        assert!(!is_a_subspace(&r, AlgebraLevel::COMPLEX).unwrap());
    }

    #[test]
    fn quaternionic_line_is_stable_under_the_group() {
        let h = Subspace::coordinate_plane(8, &[1, 2, 3, 4], 1.0).unwrap();
        assert!(is_a_subspace(&h, AlgebraLevel::QUATERNION).unwrap());
        let theta = build_quaternionic_theta(2).unwrap();
        let stab = stabilizer_algebra(&[&theta]).unwrap();
        let mut rng = seeded_rng(51);
        for _ in 0..20 {
            let g = stab.sample_group_element(0.4, &mut rng);
            let image = h.transform(&g).unwrap();
            assert!(is_a_subspace(&image, AlgebraLevel::QUATERNION).unwrap());
        }
    }

    #[test]
    fn proper_octonion_subspaces_fail() {
        let c = Subspace::coordinate_plane(8, &[1, 2, 3, 4], 1.0).unwrap();
        assert!(!is_a_subspace(&c, AlgebraLevel::OCTONION).unwrap());
    }

    #[test]
    fn real_axis_is_lagrangian_with_imaginary_witness() {
        for n in [1usize, 2, 3] {
            let c = rotated_real_plane(n, 0.0);
            let w = find_lagrangian_witness(&c, AlgebraLevel::COMPLEX)
                .unwrap()
                .expect("real axis is Lagrangian");
            assert_eq!(w.kernel_dim, 1);
            assert_eq!(w.generators.len(), 1);
            assert!((w.generators[0].coeffs()[1].abs() - 1.0).abs() < 1e-12);
            // Im C has no directions left over
            assert!(residual_complex_structures(&c, &w).unwrap().is_empty());
        }
    }

    #[test]
    fn quaternions_in_octonions_are_half_lagrangian() {
        let c = cayley_base_plane();
        let w = find_lagrangian_witness(&c, AlgebraLevel::OCTONION)
            .unwrap()
            .expect("H x 0 is a Cayley plane");
        assert_eq!(w.kernel_dim, 4);
        // generators span e4..e7
        for g in &w.generators {
            for i in 0..4 {
                assert!(g.coeffs()[i].abs() < 1e-10);
            }
        }
        // residual complex structures exist for each direction of Im H
        let vs = residual_complex_structures(&c, &w).unwrap();
        assert_eq!(vs.len(), 3);
    }

    #[test]
    fn complex_lagrangian_in_h2_has_a_k_structure() {
        // span{(1,0),(e2,0),(0,1),(0,e2)} in H^2: omega_I and omega_K vanish
        let mut frame = DMatrix::zeros(8, 4);
        frame[(0, 0)] = 1.0;
        frame[(2, 1)] = 1.0;
        frame[(4, 2)] = 1.0;
        frame[(6, 3)] = 1.0;
        let c = Subspace::new(frame, 1.0).unwrap();
        let w = find_lagrangian_witness(&c, AlgebraLevel::QUATERNION)
            .unwrap()
            .expect("complex Lagrangian");
        assert_eq!(w.kernel_dim, 2);
        let vs = residual_complex_structures(&c, &w).unwrap();
        assert_eq!(vs.len(), 1);
        // the residual structure is ±e2
        assert!((vs[0].coeffs()[2].abs() - 1.0).abs() < 1e-10);
        let forms = CanonicalFormSet::build(AlgebraLevel::QUATERNION, 2).unwrap();
        let lambda = lambda_determinant(&c, AlgebraLevel::QUATERNION, &forms).unwrap();
        match lambda.kind {
            LambdaKind::QuaternionicLine(u) => {
                assert!((u.coeffs()[2].abs() - 1.0).abs() < 1e-10)
            }
            _ => panic!("expected a quaternionic line"),
        }
    }

    #[test]
    fn witness_kernel_never_exceeds_half_the_algebra() {
        let mut rng = seeded_rng(52);
        for (algebra, rank) in [
            (AlgebraLevel::COMPLEX, 3),
            (AlgebraLevel::QUATERNION, 2),
            (AlgebraLevel::OCTONION, 1),
        ] {
            let m = algebra.dim() * rank;
            for _ in 0..50 {
                let c = Subspace::random(m, m / 2, &mut rng);
                let dim = lagrangian_kernel_dimension(&c, algebra).unwrap();
                assert!(dim <= algebra.dim() / 2);
            }
        }
    }

    #[test]
    fn middle_dimension_is_required() {
        let c = Subspace::coordinate_plane(4, &[1], 1.0).unwrap();
        assert!(matches!(
            find_lagrangian_witness(&c, AlgebraLevel::COMPLEX),
            Err(CalibraError::NotMiddleDimensional)
        ));
    }

    #[test]
    fn phase_of_rotated_real_planes() {
        let forms = CanonicalFormSet::build(AlgebraLevel::COMPLEX, 1).unwrap();
        let theta0 = 0.7;
        let c = rotated_real_plane(1, theta0);
        let lambda = lambda_determinant(&c, AlgebraLevel::COMPLEX, &forms).unwrap();
        match lambda.kind {
            LambdaKind::ComplexPhase(p) => assert!((p - theta0).abs() < 1e-10),
            _ => panic!(),
        }
        // on C^n the evaluation of dz^1...dz^n multiplies the phases
        for n in [2usize, 3] {
            let forms = CanonicalFormSet::build(AlgebraLevel::COMPLEX, n).unwrap();
            let c = rotated_real_plane(n, theta0);
            let lambda = lambda_determinant(&c, AlgebraLevel::COMPLEX, &forms).unwrap();
            let expected = (n as f64 * theta0) % std::f64::consts::TAU;
            match lambda.kind {
                LambdaKind::ComplexPhase(p) => assert!((p - expected).abs() < 1e-10),
                _ => panic!(),
            }
        }
        // the standard real axis has phase zero and is special of type I
        let forms = CanonicalFormSet::build(AlgebraLevel::COMPLEX, 3).unwrap();
        let c = rotated_real_plane(3, 0.0);
        let lambda = lambda_determinant(&c, AlgebraLevel::COMPLEX, &forms).unwrap();
        assert_eq!(lambda.type_flag, SpecialType::TypeI);
        match lambda.kind {
            LambdaKind::ComplexPhase(p) => assert!(p.abs() < 1e-12),
            _ => panic!(),
        }
    }

    #[test]
    fn associative_and_coassociative_planes() {
        let forms = CanonicalFormSet::build(AlgebraLevel::OCTONION, 1).unwrap();
        // Im H = span{e1, e2, e3} inside Im O
        let assoc = Subspace::coordinate_plane(7, &[1, 2, 3], 1.0).unwrap();
        let report = classify_special_lagrangian(&assoc, &forms, 1e-9).unwrap();
        assert!(report
            .verdicts
            .iter()
            .any(|(name, v)| name == "associative" && *v));
        assert_eq!(report.primary, "associative");

        let coassoc = Subspace::coordinate_plane(7, &[4, 5, 6, 7], 1.0).unwrap();
        let report = classify_special_lagrangian(&coassoc, &forms, 1e-9).unwrap();
        assert!(report
            .verdicts
            .iter()
            .any(|(name, v)| name == "coassociative" && *v));

        // a generic 3-plane is neither
        let mut rng = seeded_rng(53);
        let generic = Subspace::random(7, 3, &mut rng);
        let report = classify_special_lagrangian(&generic, &forms, 1e-9).unwrap();
        assert!(report
            .verdicts
            .iter()
            .any(|(name, v)| name == "associative" && !*v));
    }

    #[test]
    fn cayley_plane_classification() {
        let forms = CanonicalFormSet::build(AlgebraLevel::OCTONION, 1).unwrap();
        let c = cayley_base_plane();
        let report = classify_special_lagrangian(&c, &forms, 1e-9).unwrap();
        assert_eq!(report.primary, "Cayley");
        assert!(report
            .verdicts
            .iter()
            .any(|(name, v)| name == "theta_calibrated_oriented" && *v));
        // contains the unit, so type I
        assert!(report
            .verdicts
            .iter()
            .any(|(name, v)| name == "special_type_i" && *v));
    }

    #[test]
    fn lagrangian_classification_with_phase() {
        let forms = CanonicalFormSet::build(AlgebraLevel::COMPLEX, 3).unwrap();
        let c = rotated_real_plane(3, 0.0);
        let report = classify_special_lagrangian(&c, &forms, 1e-9).unwrap();
        assert!(report
            .verdicts
            .iter()
            .any(|(name, v)| name == "special_type_i" && *v));
        assert!(report.phase.unwrap().abs() < 1e-12);
    }

    #[test]
    fn json_round_trip_reorthonormalizes() {
        let json = r#"{"dim": 4, "frame": [[2.0, 0.0, 0.0, 0.0], [1.0, 1.0, 0.0, 0.0]], "orientation": 1}"#;
        let c: Subspace = serde_json::from_str(json).unwrap();
        assert_eq!(c.dim(), 2);
        let defect = (c.frame().transpose() * c.frame() - DMatrix::identity(2, 2)).norm();
        assert!(defect < 1e-12);
        // rank-deficient frames are rejected
        let bad = r#"{"dim": 4, "frame": [[1.0, 0.0, 0.0, 0.0], [2.0, 0.0, 0.0, 0.0]]}"#;
        assert!(serde_json::from_str::<Subspace>(bad).is_err());
    }
}
