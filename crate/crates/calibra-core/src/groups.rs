//! Structure-group machinery: twisted-isomorphism membership, stabilizer
//! algebras of constant forms, the irreducible two-form decompositions, and
//! curvature classification against them.

use crate::algebra::{AlgebraElement, AlgebraLevel, Action};
use crate::error::{CalibraError, Result};
use crate::exterior::{k_subsets, mask_bits, Metric, Multivector};
use crate::forms::{
    build_g2_three_form, build_hyperkahler_triple, build_kahler, build_spin7_four_form,
    module_matrix, omega_u_form,
};
use crate::linalg::{column_span, expm, nullspace};
use crate::rand_util::{gaussian, Prng};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Derivation action of a matrix X ∈ gl(m) on a constant form:
/// (X·φ)(v₁, .., v_k) = -Σᵢ φ(v₁, .., Xvᵢ, .., v_k). A form is stabilized by
/// the one-parameter group of X iff this vanishes.
pub fn lie_action_on_form(x: &DMatrix<f64>, phi: &Multivector) -> Multivector {
    let m = phi.dim();
    let mut out = Multivector::zero(m);
    for (mask, c) in phi.terms() {
        let indices = mask_bits(mask);
        for (p, &i) in indices.iter().enumerate() {
            for j in 0..m {
                let xij = x[(i, j)];
                if xij == 0.0 {
                    continue;
                }
                if j == i {
                    out = out
                        .add(&monomial(m, mask, -c * xij))
                        .unwrap();
                    continue;
                }
                if mask & (1 << j) != 0 {
                    continue; // repeated covector
                }
                let others = mask & !(1 << i);
                let new_mask = others | (1 << j);
                let q = (others & ((1u32 << j) - 1)).count_ones() as usize;
                let sign = if (p + q) % 2 == 0 { 1.0 } else { -1.0 };
                out = out
                    .add(&monomial(m, new_mask, -c * xij * sign))
                    .unwrap();
            }
        }
    }
    out
}

fn monomial(dim: usize, mask: u32, coeff: f64) -> Multivector {
    let indices: Vec<usize> = crate::exterior::indices_from_mask(mask);
    Multivector::basis_form(dim, &indices, coeff).unwrap()
}

/// Basis of so(m): for each pair a < b the generator with X[b, a] = 1,
/// X[a, b] = -1.
fn so_basis_pairs(m: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(m * (m - 1) / 2);
    for a in 0..m {
        for b in (a + 1)..m {
            out.push((a, b));
        }
    }
    out
}

fn so_generator(m: usize, a: usize, b: usize) -> DMatrix<f64> {
    let mut x = DMatrix::zeros(m, m);
    x[(b, a)] = 1.0;
    x[(a, b)] = -1.0;
    x
}

/// The joint infinitesimal stabilizer of a family of constant forms inside
/// so(m).
#[derive(Clone, Debug)]
pub struct StabilizerAlgebra {
    pub ambient_dim: usize,
    pub dimension: usize,
    pub basis: Vec<DMatrix<f64>>,
}

impl StabilizerAlgebra {
    /// Random algebra element with Gaussian coefficients over the basis.
    pub fn sample(&self, scale: f64, rng: &mut Prng) -> DMatrix<f64> {
        let mut x = DMatrix::zeros(self.ambient_dim, self.ambient_dim);
        for b in &self.basis {
            x += b * (gaussian(rng) * scale);
        }
        x
    }

    /// Random group element, the exponential of a sampled algebra element.
    pub fn sample_group_element(&self, scale: f64, rng: &mut Prng) -> DMatrix<f64> {
        expm(&self.sample(scale, rng))
    }
}

/// Computes the nullspace of X ↦ (X·φ_1, .., X·φ_r) restricted to
/// skew-symmetric X. The σ-threshold for rank decisions is 1e-8 relative.
pub fn stabilizer_algebra(forms: &[&Multivector]) -> Result<StabilizerAlgebra> {
    let m = forms
        .first()
        .ok_or_else(|| CalibraError::Malformed("no forms given".into()))?
        .dim();
    if forms.iter().any(|f| f.dim() != m) {
        return Err(CalibraError::DimensionMismatch(
            "stabilizer forms live on different spaces".into(),
        ));
    }
    let pairs = so_basis_pairs(m);
    // rows: for every form and every monomial of its grades
    let mut row_masks: Vec<(usize, u32)> = Vec::new();
    for (fi, f) in forms.iter().enumerate() {
        for (grade, _) in f.grade_components() {
            for mask in k_subsets(m, grade) {
                row_masks.push((fi, mask));
            }
        }
    }
    let mut a = DMatrix::zeros(row_masks.len(), pairs.len());
    for (col, &(p, q)) in pairs.iter().enumerate() {
        let gen = so_generator(m, p, q);
        for (fi, f) in forms.iter().enumerate() {
            let action = lie_action_on_form(&gen, f);
            for (row, &(rfi, mask)) in row_masks.iter().enumerate() {
                if rfi == fi {
                    a[(row, col)] += action.coeff(mask);
                }
            }
        }
    }
    let kernel = nullspace(&a, 1e-8);
    let basis = (0..kernel.ncols())
        .map(|j| {
            let mut x = DMatrix::zeros(m, m);
            for (col, &(p, q)) in pairs.iter().enumerate() {
                x += so_generator(m, p, q) * kernel[(col, j)];
            }
            x
        })
        .collect::<Vec<_>>();
    Ok(StabilizerAlgebra {
        ambient_dim: m,
        dimension: basis.len(),
        basis,
    })
}

/// Result of the twisted-isomorphism membership test.
#[derive(Clone, Debug)]
pub struct TwistedIsomorphismReport {
    pub is_twisted: bool,
    /// The rotation θ of the algebra with φ(vx) = φ(v)θ(x), when one exists.
    pub theta: Option<DMatrix<f64>>,
    /// Whether the induced action on the algebra fixes 1; None when the map
    /// is not twisted at all.
    pub is_special: Option<bool>,
    pub residual: f64,
}

/// Searches for θ ∈ SO(𝔸) with φ(vx) = φ(v)θ(x) for all v, x. The relation
/// is linear in θ, so the existential search is a least-squares solve; the
/// map is accepted when the residual is below 1e-8 · m.
pub fn twisted_isomorphism_check(
    phi: &DMatrix<f64>,
    algebra: AlgebraLevel,
    rank: usize,
) -> Result<TwistedIsomorphismReport> {
    let m = algebra.dim() * rank;
    if phi.nrows() != phi.ncols() {
        return Err(CalibraError::Malformed("map must be square".into()));
    }
    if phi.nrows() != m {
        return Err(CalibraError::DimensionMismatch(format!(
            "map has dimension {}, expected {} for rank {} over {}",
            phi.nrows(),
            m,
            rank,
            algebra.name()
        )));
    }
    let ortho_defect = (phi.transpose() * phi - DMatrix::identity(m, m)).norm();
    if ortho_defect > 1e-9 * m as f64 {
        return Ok(TwistedIsomorphismReport {
            is_twisted: false,
            theta: None,
            is_special: None,
            residual: ortho_defect,
        });
    }
    let d = algebra.dim();
    if d == 1 {
        // SO(R) is trivial; every isometry is twisted with θ = 1
        let special = phi.determinant() > 0.0;
        return Ok(TwistedIsomorphismReport {
            is_twisted: true,
            theta: Some(DMatrix::identity(1, 1)),
            is_special: Some(special),
            residual: 0.0,
        });
    }

    // φ R_i = Σ_k θ[k, i] R_k φ, one least-squares solve for all columns
    let right_mults: Vec<DMatrix<f64>> = (0..d)
        .map(|k| module_matrix(Action::Right, &AlgebraElement::basis(algebra, k).unwrap(), rank))
        .collect();
    let mut a = DMatrix::zeros(m * m, d);
    for (k, rk) in right_mults.iter().enumerate() {
        let col = rk * phi;
        for (idx, v) in col.iter().enumerate() {
            a[(idx, k)] = *v;
        }
    }
    let mut b = DMatrix::zeros(m * m, d);
    for (i, ri) in right_mults.iter().enumerate() {
        let col = phi * ri;
        for (idx, v) in col.iter().enumerate() {
            b[(idx, i)] = *v;
        }
    }
    let svd = a.clone().svd(true, true);
    let theta = svd
        .solve(&b, 1e-12)
        .map_err(|e| CalibraError::Malformed(format!("least-squares solve failed: {e}")))?;
    let residual = (&a * &theta - &b).norm();
    let theta_ortho = (theta.transpose() * &theta - DMatrix::identity(d, d)).norm();
    let is_twisted =
        residual <= 1e-8 * m as f64 && theta_ortho < 1e-6 && theta.determinant() > 0.0;
    if !is_twisted {
        return Ok(TwistedIsomorphismReport {
            is_twisted: false,
            theta: None,
            is_special: None,
            residual,
        });
    }
    let is_special = match algebra {
        AlgebraLevel::COMPLEX => {
            let n = rank;
            let mut z = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
            for p in 0..n {
                for q in 0..n {
                    z[(p, q)] = Complex64::new(phi[(2 * p, 2 * q)], phi[(2 * p + 1, 2 * q)]);
                }
            }
            let det = z.determinant();
            (det - Complex64::new(1.0, 0.0)).norm() <= 1e-8
        }
        AlgebraLevel::QUATERNION => {
            // θ is conjugation by the Sp(1) factor; it fixes 1 iff θ = id
            (&theta - DMatrix::identity(d, d)).norm() <= 1e-8
        }
        AlgebraLevel::OCTONION => {
            let mut fixes_unit = true;
            for i in 0..8 {
                let target = if i == 0 { 1.0 } else { 0.0 };
                if (phi[(i, 0)] - target).abs() > 1e-8 {
                    fixes_unit = false;
                }
            }
            if fixes_unit {
                let im_block = phi.view((1, 1), (7, 7)).into_owned();
                let omega = build_g2_three_form();
                let pulled = omega.pullback(&im_block)?;
                pulled.sub(&omega)?.norm_sq().sqrt() <= 1e-8
            } else {
                false
            }
        }
        _ => unreachable!("real case handled above"),
    };
    Ok(TwistedIsomorphismReport {
        is_twisted: true,
        theta: Some(theta),
        is_special: Some(is_special),
        residual,
    })
}

/// One irreducible block of the two-form decomposition: an orthonormal basis
/// expressed in Λ² coordinates, its membership flags, and the eigenvalue of
/// the defining operator when the block arises as an eigenspace.
#[derive(Clone, Debug)]
pub struct DecompositionComponent {
    pub name: String,
    /// N × d matrix, N = dim Λ²(ℝ^m); columns are orthonormal.
    pub basis: DMatrix<f64>,
    pub eigenvalue: Option<f64>,
    pub in_g: bool,
    pub in_h: bool,
    pub in_s: bool,
}

/// Orthogonal decomposition of Λ²(ℝ^m) into the blocks attached to the
/// algebra structure.
#[derive(Clone, Debug)]
pub struct TwoFormDecomposition {
    pub label: String,
    pub ambient_dim: usize,
    pub basis_masks: Vec<u32>,
    pub components: Vec<DecompositionComponent>,
}

impl TwoFormDecomposition {
    pub fn total_two_form_dim(&self) -> usize {
        self.basis_masks.len()
    }

    pub fn form_to_vec(&self, phi: &Multivector) -> Result<DVector<f64>> {
        if phi.dim() != self.ambient_dim {
            return Err(CalibraError::DimensionMismatch(
                "form does not live on the decomposition's space".into(),
            ));
        }
        if !phi.is_zero() && phi.pure_grade() != Some(2) {
            return Err(CalibraError::GradeMismatch("expected a two-form".into()));
        }
        let mut v = DVector::zeros(self.basis_masks.len());
        for (i, &mask) in self.basis_masks.iter().enumerate() {
            v[i] = phi.coeff(mask);
        }
        Ok(v)
    }

    pub fn vec_to_form(&self, v: &DVector<f64>) -> Multivector {
        let mut out = Multivector::zero(self.ambient_dim);
        for (i, &mask) in self.basis_masks.iter().enumerate() {
            if v[i].abs() > 0.0 {
                out = out.add(&monomial(self.ambient_dim, mask, v[i])).unwrap();
            }
        }
        out
    }

    /// Norm of the projection of a two-form onto each component.
    pub fn component_norms(&self, phi: &Multivector) -> Result<Vec<(String, f64)>> {
        let v = self.form_to_vec(phi)?;
        Ok(self
            .components
            .iter()
            .map(|c| (c.name.clone(), (c.basis.transpose() * &v).norm()))
            .collect())
    }
}

/// Matrix of the pullback action φ ↦ φ(g·, g·) on the two-form basis.
pub fn two_form_pullback(map: &DMatrix<f64>, basis_masks: &[u32]) -> DMatrix<f64> {
    let n = basis_masks.len();
    let dim = map.nrows();
    let index: std::collections::HashMap<u32, usize> = basis_masks
        .iter()
        .enumerate()
        .map(|(i, &m)| (m, i))
        .collect();
    let mut out = DMatrix::zeros(n, n);
    for (col, &mask) in basis_masks.iter().enumerate() {
        let pulled = monomial(dim, mask, 1.0).pullback(map).unwrap();
        for (pmask, c) in pulled.terms() {
            if let Some(&row) = index.get(&pmask) {
                out[(row, col)] = c;
            }
        }
    }
    out
}

/// Matrix of φ ↦ ⋆(θ ∧ φ) on the two-form basis, for a constant (m−2−k)-…
/// degree form θ of the right degree (Euclidean metric, standard
/// orientation).
pub fn wedge_star_operator(theta: &Multivector, basis_masks: &[u32]) -> DMatrix<f64> {
    let n = basis_masks.len();
    let dim = theta.dim();
    let g = Metric::euclidean(dim);
    let index: std::collections::HashMap<u32, usize> = basis_masks
        .iter()
        .enumerate()
        .map(|(i, &m)| (m, i))
        .collect();
    let mut out = DMatrix::zeros(n, n);
    for (col, &mask) in basis_masks.iter().enumerate() {
        let image = theta
            .wedge(&monomial(dim, mask, 1.0))
            .unwrap()
            .hodge_star(&g, 1.0)
            .unwrap();
        for (pmask, c) in image.terms() {
            if let Some(&row) = index.get(&pmask) {
                out[(row, col)] = c;
            }
        }
    }
    out
}

/// Eigen-decomposition of a symmetric operator with eigenvalues clustered at
/// the given tolerance; returns (eigenvalue, orthonormal basis) per cluster,
/// eigenvalues increasing.
pub fn clustered_eigenspaces(op: &DMatrix<f64>, tol: f64) -> Vec<(f64, DMatrix<f64>)> {
    let n = op.nrows();
    let sym = (op + op.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
    let mut clusters: Vec<(f64, Vec<usize>)> = Vec::new();
    for &i in &order {
        let l = eig.eigenvalues[i];
        match clusters.last_mut() {
            Some((rep, members)) if (l - *rep).abs() <= tol * (1.0 + rep.abs()) => {
                members.push(i)
            }
            _ => clusters.push((l, vec![i])),
        }
    }
    clusters
        .into_iter()
        .map(|(_, members)| {
            let mut basis = DMatrix::zeros(n, members.len());
            for (j, &i) in members.iter().enumerate() {
                basis.set_column(j, &eig.eigenvectors.column(i));
            }
            let mean = members.iter().map(|&i| eig.eigenvalues[i]).sum::<f64>()
                / members.len() as f64;
            (mean, basis)
        })
        .collect()
}

/// The two-form decomposition attached to (algebra, rank):
/// ℂ through the ±1 eigenspaces of the complex-structure pullback and the
/// Kähler trace split, ℍ through simultaneous (1,1) intersection and the
/// span of the three Kähler forms, 𝕆 (m = 8) through the eigenspaces of
/// φ ↦ ⋆(Θ ∧ φ).
pub fn decompose_two_forms(algebra: AlgebraLevel, rank: usize) -> Result<TwoFormDecomposition> {
    let m = algebra.dim() * rank;
    if m > crate::exterior::MAX_DIM {
        return Err(CalibraError::DimensionMismatch(
            "ambient dimension exceeds the cap".into(),
        ));
    }
    let basis_masks = k_subsets(m, 2);
    let n = basis_masks.len();
    let mut components = Vec::new();
    match algebra {
        AlgebraLevel::REAL => {
            components.push(DecompositionComponent {
                name: "so".into(),
                basis: DMatrix::identity(n, n),
                eigenvalue: None,
                in_g: true,
                in_h: true,
                in_s: false,
            });
        }
        AlgebraLevel::COMPLEX => {
            let j = module_matrix(
                Action::Right,
                &AlgebraElement::basis(algebra, 1)?,
                rank,
            );
            let rho = two_form_pullback(&j, &basis_masks);
            let invariant = nullspace(&(&rho - DMatrix::identity(n, n)), 1e-8);
            let anti = nullspace(&(&rho + DMatrix::identity(n, n)), 1e-8);
            // split the invariant part along the Kähler direction
            let omega = build_kahler(rank)?;
            let mut omega_vec = DVector::zeros(n);
            for (i, &mask) in basis_masks.iter().enumerate() {
                omega_vec[i] = omega.coeff(mask);
            }
            omega_vec /= omega_vec.norm();
            // project omega out of the invariant basis, then re-orthonormalize
            let mut reduced = invariant.clone();
            for c in 0..reduced.ncols() {
                let col = reduced.column(c).into_owned();
                let coeff = omega_vec.dot(&col);
                reduced.set_column(c, &(col - &omega_vec * coeff));
            }
            let primitive = column_span(&reduced, 1e-8);
            components.push(DecompositionComponent {
                name: "lambda_11_0".into(),
                basis: primitive,
                eigenvalue: None,
                in_g: true,
                in_h: true,
                in_s: false,
            });
            components.push(DecompositionComponent {
                name: "r_omega".into(),
                basis: DMatrix::from_column_slice(n, 1, omega_vec.as_slice()),
                eigenvalue: None,
                in_g: true,
                in_h: false,
                in_s: true,
            });
            components.push(DecompositionComponent {
                name: "lambda_20_02".into(),
                basis: anti,
                eigenvalue: None,
                in_g: false,
                in_h: false,
                in_s: false,
            });
        }
        AlgebraLevel::QUATERNION => {
            let units: Vec<AlgebraElement> = (1..=3)
                .map(|k| AlgebraElement::basis(algebra, k).unwrap())
                .collect();
            // Sym²V: forms of type (1,1) for all three complex structures
            let mut stacked = DMatrix::zeros(3 * n, n);
            for (b, u) in units.iter().enumerate() {
                let ju = module_matrix(Action::Right, u, rank);
                let rho = two_form_pullback(&ju, &basis_masks);
                let block = &rho - DMatrix::identity(n, n);
                for r in 0..n {
                    for c in 0..n {
                        stacked[(b * n + r, c)] = block[(r, c)];
                    }
                }
            }
            let sym2v = nullspace(&stacked, 1e-8);
            // Sym²S: the span of the three Kähler forms
            let triple = build_hyperkahler_triple(rank)?;
            let mut span = DMatrix::zeros(n, 3);
            for (c, w) in triple.iter().enumerate() {
                for (i, &mask) in basis_masks.iter().enumerate() {
                    span[(i, c)] = w.coeff(mask);
                }
            }
            let sym2s = column_span(&span, 1e-10);
            // the rest is the orthogonal complement of the first two blocks
            let mut both = DMatrix::zeros(n, sym2v.ncols() + sym2s.ncols());
            both.view_mut((0, 0), (n, sym2v.ncols())).copy_from(&sym2v);
            both.view_mut((0, sym2v.ncols()), (n, sym2s.ncols()))
                .copy_from(&sym2s);
            let rest = nullspace(&both.transpose(), 1e-8);
            components.push(DecompositionComponent {
                name: "sym2_v".into(),
                basis: sym2v,
                eigenvalue: None,
                in_g: true,
                in_h: true,
                in_s: false,
            });
            components.push(DecompositionComponent {
                name: "sym2_s".into(),
                basis: sym2s,
                eigenvalue: None,
                in_g: true,
                in_h: false,
                in_s: true,
            });
            components.push(DecompositionComponent {
                name: "lambda20_v_sym2_s".into(),
                basis: rest,
                eigenvalue: None,
                in_g: false,
                in_h: false,
                in_s: false,
            });
        }
        _ => {
            if rank != 1 {
                return Err(CalibraError::DimensionMismatch(
                    "octonionic decomposition requires rank one".into(),
                ));
            }
            let theta = build_spin7_four_form();
            let op = wedge_star_operator(&theta, &basis_masks);
            let clusters = clustered_eigenspaces(&op, 1e-8);
            if clusters.len() != 2 {
                return Err(CalibraError::Malformed(format!(
                    "expected two eigenvalue clusters, found {}",
                    clusters.len()
                )));
            }
            for (lambda, basis) in clusters {
                let dim = basis.ncols();
                let near_minus_one = (lambda + 1.0).abs() < 1e-6;
                components.push(DecompositionComponent {
                    name: if near_minus_one {
                        format!("lambda2_{dim}")
                    } else {
                        format!("lambda2_{dim}")
                    },
                    basis,
                    eigenvalue: Some(lambda),
                    in_g: near_minus_one,
                    in_h: false,
                    in_s: !near_minus_one,
                });
            }
        }
    }
    Ok(TwoFormDecomposition {
        label: format!("{}({})", algebra.name(), rank),
        ambient_dim: m,
        basis_masks,
        components,
    })
}

/// The seven-dimensional analogue on Im 𝕆: eigenspaces of φ ↦ ⋆(Ω ∧ φ),
/// with the 14-dimensional block equal to {φ : φ ∧ Θ = 0}.
pub fn decompose_two_forms_im_octonion() -> Result<TwoFormDecomposition> {
    let basis_masks = k_subsets(7, 2);
    let omega = build_g2_three_form();
    let op = wedge_star_operator(&omega, &basis_masks);
    let clusters = clustered_eigenspaces(&op, 1e-8);
    if clusters.len() != 2 {
        return Err(CalibraError::Malformed(format!(
            "expected two eigenvalue clusters, found {}",
            clusters.len()
        )));
    }
    let mut components = Vec::new();
    for (lambda, basis) in clusters {
        let dim = basis.ncols();
        components.push(DecompositionComponent {
            name: format!("lambda2_{dim}"),
            basis,
            eigenvalue: Some(lambda),
            in_g: true,
            in_h: dim == 14,
            in_s: dim != 14,
        });
    }
    Ok(TwoFormDecomposition {
        label: "O-special(Im O)".into(),
        ambient_dim: 7,
        basis_masks,
        components,
    })
}

/// Curvature of a connection on a rank-r Hermitian bundle over the flat
/// model: a sum of (two-form) ⊗ (skew-Hermitian matrix) terms.
#[derive(Clone, Debug)]
pub struct CurvatureTensor {
    pub dim: usize,
    pub rank: usize,
    pub terms: Vec<(Multivector, DMatrix<Complex64>)>,
}

impl CurvatureTensor {
    pub fn new(
        dim: usize,
        rank: usize,
        terms: Vec<(Multivector, DMatrix<Complex64>)>,
    ) -> Result<Self> {
        for (form, coeff) in &terms {
            if form.dim() != dim {
                return Err(CalibraError::DimensionMismatch(
                    "curvature form dimension mismatch".into(),
                ));
            }
            if !form.is_zero() && form.pure_grade() != Some(2) {
                return Err(CalibraError::GradeMismatch(
                    "curvature components must be two-forms".into(),
                ));
            }
            if coeff.nrows() != rank || coeff.ncols() != rank {
                return Err(CalibraError::DimensionMismatch(
                    "coefficient matrix does not match bundle rank".into(),
                ));
            }
            let skew_defect = (coeff + coeff.adjoint()).norm();
            if skew_defect > 1e-12 * (1.0 + coeff.norm()) {
                return Err(CalibraError::Malformed(
                    "coefficient matrices must be skew-Hermitian".into(),
                ));
            }
        }
        Ok(CurvatureTensor { dim, rank, terms })
    }

    pub fn zero(dim: usize, rank: usize) -> Self {
        CurvatureTensor {
            dim,
            rank,
            terms: Vec::new(),
        }
    }

    /// Frobenius norm squared: Σ ⟨φ_a, φ_b⟩ ⟨A_a, A_b⟩.
    pub fn norm_sq(&self) -> f64 {
        let mut acc = 0.0;
        for (fa, aa) in &self.terms {
            for (fb, ab) in &self.terms {
                let form_ip: f64 = fa
                    .terms()
                    .map(|(mask, c)| c * fb.coeff(mask))
                    .sum();
                let mat_ip: f64 = (aa.adjoint() * ab).trace().re;
                acc += form_ip * mat_ip;
            }
        }
        acc
    }
}

#[derive(Serialize, Deserialize)]
struct CurvatureTermJson {
    form: Multivector,
    coeff: Vec<Vec<[f64; 2]>>,
}

#[derive(Serialize, Deserialize)]
struct CurvatureJson {
    dim: usize,
    rank: usize,
    terms: Vec<CurvatureTermJson>,
}

impl Serialize for CurvatureTensor {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let terms = self
            .terms
            .iter()
            .map(|(form, coeff)| CurvatureTermJson {
                form: form.clone(),
                coeff: (0..coeff.nrows())
                    .map(|i| {
                        (0..coeff.ncols())
                            .map(|j| [coeff[(i, j)].re, coeff[(i, j)].im])
                            .collect()
                    })
                    .collect(),
            })
            .collect();
        CurvatureJson {
            dim: self.dim,
            rank: self.rank,
            terms,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for CurvatureTensor {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = CurvatureJson::deserialize(deserializer)?;
        let mut terms = Vec::new();
        for t in raw.terms {
            let rows = t.coeff.len();
            if rows != raw.rank || t.coeff.iter().any(|r| r.len() != raw.rank) {
                return Err(serde::de::Error::custom("coefficient matrix shape mismatch"));
            }
            let coeff = DMatrix::from_fn(rows, rows, |i, j| {
                Complex64::new(t.coeff[i][j][0], t.coeff[i][j][1])
            });
            terms.push((t.form, coeff));
        }
        CurvatureTensor::new(raw.dim, raw.rank, terms).map_err(serde::de::Error::custom)
    }
}

/// Verdict of projecting a curvature tensor onto a two-form decomposition.
#[derive(Clone, Debug, Serialize)]
pub struct ConnectionClass {
    pub is_a_connection: bool,
    /// None when the decomposition carries no distinguished special block
    /// (the octonionic case on ℝ⁸).
    pub is_special: Option<bool>,
    pub residuals: Vec<(String, f64)>,
}

/// Projects each two-form component of the curvature onto the decomposition
/// blocks. The connection is of algebra type when nothing lies outside the
/// holonomy blocks, and special when the trace-type block vanishes as well.
pub fn classify_connection(
    f: &CurvatureTensor,
    decomposition: &TwoFormDecomposition,
    tol: f64,
) -> Result<ConnectionClass> {
    if f.dim != decomposition.ambient_dim {
        return Err(CalibraError::DimensionMismatch(
            "curvature and decomposition dimensions differ".into(),
        ));
    }
    // flatten to a (two-form basis) × (bundle matrix entry) block
    let n = decomposition.basis_masks.len();
    let r2 = f.rank * f.rank;
    let mut w_re: DMatrix<f64> = DMatrix::zeros(n, r2);
    let mut w_im: DMatrix<f64> = DMatrix::zeros(n, r2);
    for (form, coeff) in &f.terms {
        let v = decomposition.form_to_vec(form)?;
        for i in 0..n {
            for p in 0..f.rank {
                for q in 0..f.rank {
                    let e = coeff[(p, q)];
                    w_re[(i, p * f.rank + q)] += v[i] * e.re;
                    w_im[(i, p * f.rank + q)] += v[i] * e.im;
                }
            }
        }
    }
    let total: f64 = (w_re.norm_squared() + w_im.norm_squared()).sqrt();
    let mut residuals = Vec::new();
    let mut outside_g = 0.0f64;
    let mut special_defect = 0.0f64;
    for comp in &decomposition.components {
        let pr = comp.basis.transpose() * &w_re;
        let pi = comp.basis.transpose() * &w_im;
        let norm: f64 = (pr.norm_squared() + pi.norm_squared()).sqrt();
        residuals.push((comp.name.clone(), norm));
        if !comp.in_g {
            outside_g = outside_g.hypot(norm);
        }
        if !comp.in_h {
            special_defect = special_defect.hypot(norm);
        }
    }
    let scale = tol * (1.0 + total);
    let is_a = outside_g <= scale;
    let has_h = decomposition.components.iter().any(|c| c.in_h);
    let is_special = if has_h {
        Some(is_a && special_defect <= scale)
    } else {
        None
    };
    Ok(ConnectionClass {
        is_a_connection: is_a,
        is_special,
        residuals,
    })
}

/// The span of the ω_u two-forms over an orthonormal basis of Im 𝔸, in Λ²
/// coordinates; this is the image of the imaginary part of the algebra in
/// the two-forms.
pub fn imaginary_two_form_span(
    algebra: AlgebraLevel,
    rank: usize,
    basis_masks: &[u32],
) -> Result<DMatrix<f64>> {
    let d = algebra.dim();
    let n = basis_masks.len();
    let mut span = DMatrix::zeros(n, d - 1);
    for k in 1..d {
        let u = AlgebraElement::basis(algebra, k)?;
        let w = omega_u_form(&u, rank)?;
        for (i, &mask) in basis_masks.iter().enumerate() {
            span[(i, k - 1)] = w.coeff(mask);
        }
    }
    Ok(column_span(&span, 1e-10))
}
