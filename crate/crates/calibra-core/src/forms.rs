//! Canonical parallel forms on flat model spaces, constructed from the
//! division-algebra structure rather than transcribed coefficient tables.
//!
//! Coordinate layout: ℝ^{2^a n} is n consecutive blocks of 2^a coordinates,
//! block k holding the e-basis coefficients of the k-th algebra coordinate.
//! For the octonions the real axis comes first, so ℝ⁸ = (x⁰; x¹..x⁷) and
//! Im 𝕆 ≅ ℝ⁷ uses coordinates x¹..x⁷ in that order.

use crate::algebra::{
    as_real_matrix, cross_product, Action, AlgebraElement, AlgebraLevel,
};
use crate::error::{CalibraError, Result};
use crate::exterior::{Metric, Multivector, MAX_DIM};
use nalgebra::DMatrix;

/// Block-diagonal matrix of componentwise left/right multiplication by `x`
/// on the rank-n module.
pub fn module_matrix(action: Action, x: &AlgebraElement, rank: usize) -> DMatrix<f64> {
    let d = x.level().dim();
    let block = as_real_matrix(action, x);
    let mut m = DMatrix::zeros(d * rank, d * rank);
    for b in 0..rank {
        for i in 0..d {
            for j in 0..d {
                m[(b * d + i, b * d + j)] = block[(i, j)];
            }
        }
    }
    m
}

/// The two-form ω_u(v, w) = ⟨v u, w⟩ attached to an imaginary element u,
/// acting blockwise on the rank-n module.
///
/// With u = e1 on ℂ this is exactly the standard Kähler form Σ dx^j ∧ dy^j,
/// so ω_u(v, J_u v) = |v|² > 0 for the right-multiplication complex
/// structure J_u.
pub fn omega_u_form(u: &AlgebraElement, rank: usize) -> Result<Multivector> {
    if !u.is_imaginary(1e-10) {
        return Err(CalibraError::InvalidGenerator);
    }
    let d = u.level().dim();
    let m = d * rank;
    if m > MAX_DIM {
        return Err(CalibraError::DimensionMismatch(format!(
            "ambient dimension {m} exceeds cap {MAX_DIM}"
        )));
    }
    let right = as_real_matrix(Action::Right, u);
    let mut out = Multivector::zero(m);
    for b in 0..rank {
        for alpha in 0..d {
            for beta in (alpha + 1)..d {
                // omega(e_alpha, e_beta) = (e_alpha u)_beta
                let c = right[(beta, alpha)];
                if c.abs() > 1e-15 {
                    let indices = [b * d + alpha + 1, b * d + beta + 1];
                    out = out.add(&Multivector::basis_form(m, &indices, c)?)?;
                }
            }
        }
    }
    Ok(out)
}

/// ω = Σ_j dx^j ∧ dy^j on ℝ^{2n} with interleaved coordinates
/// (x¹, y¹, ..., xⁿ, yⁿ).
pub fn build_kahler(n: usize) -> Result<Multivector> {
    if n == 0 || 2 * n > MAX_DIM {
        return Err(CalibraError::DimensionMismatch(format!(
            "rank {n} out of range for the dimension cap"
        )));
    }
    let e1 = AlgebraElement::basis(AlgebraLevel::COMPLEX, 1)?;
    omega_u_form(&e1, n)
}

/// (Re Ω, Im Ω) for Ω = dz¹ ∧ ... ∧ dzⁿ as real n-forms on ℝ^{2n}.
pub fn build_holomorphic_volume(n: usize) -> Result<(Multivector, Multivector)> {
    if n == 0 || 2 * n > MAX_DIM {
        return Err(CalibraError::DimensionMismatch(format!(
            "rank {n} out of range for the dimension cap"
        )));
    }
    let m = 2 * n;
    let mut re = Multivector::zero(m);
    let mut im = Multivector::zero(m);
    // expand the product over subsets S of blocks contributing dy; picking
    // one coordinate per block keeps indices increasing, so no reorder sign
    for s in 0..(1u32 << n) {
        let k = s.count_ones();
        let mut indices = Vec::with_capacity(n);
        for j in 0..n {
            let pick_y = s & (1 << j) != 0;
            indices.push(2 * j + if pick_y { 2 } else { 1 });
        }
        let term = Multivector::basis_form(m, &indices, 1.0)?;
        match k % 4 {
            0 => re = re.add(&term)?,
            1 => im = im.add(&term)?,
            2 => re = re.sub(&term)?,
            _ => im = im.sub(&term)?,
        }
    }
    Ok((re, im))
}

/// The triple (ω_I, ω_J, ω_K) on ℝ^{4n} induced by right multiplication with
/// e1, e2, e3 of ℍ.
pub fn build_hyperkahler_triple(n: usize) -> Result<[Multivector; 3]> {
    if n == 0 || 4 * n > MAX_DIM {
        return Err(CalibraError::DimensionMismatch(format!(
            "rank {n} out of range for the dimension cap"
        )));
    }
    let h = AlgebraLevel::QUATERNION;
    let mut out = Vec::with_capacity(3);
    for k in 1..=3 {
        out.push(omega_u_form(&AlgebraElement::basis(h, k)?, n)?);
    }
    Ok(out.try_into().unwrap())
}

/// Θ = ω_I² + ω_J² + ω_K², the parallel four-form of the quaternionic
/// structure; well defined even though the individual ω's are not canonical.
pub fn build_quaternionic_theta(n: usize) -> Result<Multivector> {
    let [wi, wj, wk] = build_hyperkahler_triple(n)?;
    wi.wedge(&wi)?
        .add(&wj.wedge(&wj)?)?
        .add(&wk.wedge(&wk)?)
}

/// The three-form Ω(x, y, z) = ⟨x, y × z⟩ on Im 𝕆 ≅ ℝ⁷. Exactly seven ±1
/// monomials, one per line of the multiplication table.
pub fn build_g2_three_form() -> Multivector {
    let o = AlgebraLevel::OCTONION;
    let mut out = Multivector::zero(7);
    for i in 1..8 {
        for j in (i + 1)..8 {
            for k in (j + 1)..8 {
                let ei = AlgebraElement::basis(o, i).unwrap();
                let ej = AlgebraElement::basis(o, j).unwrap();
                let ek = AlgebraElement::basis(o, k).unwrap();
                let c = ei.inner(&cross_product(&ej, &ek).unwrap()).unwrap();
                if c.abs() > 0.5 {
                    out = out
                        .add(&Multivector::basis_form(7, &[i, j, k], c).unwrap())
                        .unwrap();
                }
            }
        }
    }
    out
}

/// Θ_{G2} = ⋆₇ Ω on ℝ⁷ with the standard orientation dx¹∧...∧dx⁷.
pub fn build_g2_four_form() -> Multivector {
    build_g2_three_form()
        .hodge_star(&Metric::euclidean(7), 1.0)
        .unwrap()
}

/// Embeds a form on Im 𝕆 ≅ ℝ⁷ into ℝ⁸ = (x⁰; x¹..x⁷), shifting every
/// coordinate index up by one.
fn embed_im_octonion(a: &Multivector) -> Multivector {
    let mut out = Multivector::zero(8);
    for (mask, c) in a.terms() {
        out = out
            .add(&{
                let mut shifted = Multivector::zero(8);
                let indices: Vec<usize> = crate::exterior::indices_from_mask(mask)
                    .into_iter()
                    .map(|i| i + 1)
                    .collect();
                shifted = shifted
                    .add(&Multivector::basis_form(8, &indices, c).unwrap())
                    .unwrap();
                shifted
            })
            .unwrap();
    }
    out
}

/// The self-dual four-form Θ = Ω_{G2} ∧ dx⁰ − Θ_{G2} on ℝ⁸, with dx⁰ the
/// first coordinate. Self-duality holds for the standard orientation
/// dx⁰∧dx¹∧...∧dx⁷; fourteen ±1 monomials.
pub fn build_spin7_four_form() -> Multivector {
    let omega8 = embed_im_octonion(&build_g2_three_form());
    let theta8 = embed_im_octonion(&build_g2_four_form());
    let dx0 = Multivector::one_form(8, 1);
    omega8.wedge(&dx0).unwrap().sub(&theta8).unwrap()
}

/// The canonical parallel forms attached to a flat model space 𝔸^n, with
/// only the entries meaningful for the pair (algebra, rank) populated.
#[derive(Clone, Debug)]
pub struct CanonicalFormSet {
    pub algebra: AlgebraLevel,
    pub rank: usize,
    pub ambient_dim: usize,
    pub volume: Multivector,
    pub kahler: Option<Multivector>,
    pub hol_volume: Option<(Multivector, Multivector)>,
    pub hk_triple: Option<[Multivector; 3]>,
    pub quat_theta: Option<Multivector>,
    pub g2_three: Option<Multivector>,
    pub g2_four: Option<Multivector>,
    pub spin7_four: Option<Multivector>,
}

impl CanonicalFormSet {
    pub fn build(algebra: AlgebraLevel, rank: usize) -> Result<Self> {
        let m = algebra.dim() * rank;
        if rank == 0 || m > MAX_DIM {
            return Err(CalibraError::DimensionMismatch(format!(
                "rank {rank} at level {} exceeds the dimension cap",
                algebra.index()
            )));
        }
        if algebra == AlgebraLevel::OCTONION && rank != 1 {
            return Err(CalibraError::DimensionMismatch(
                "every nontrivial octonionic module has rank one".into(),
            ));
        }
        let mut set = CanonicalFormSet {
            algebra,
            rank,
            ambient_dim: m,
            volume: Multivector::volume_form(m),
            kahler: None,
            hol_volume: None,
            hk_triple: None,
            quat_theta: None,
            g2_three: None,
            g2_four: None,
            spin7_four: None,
        };
        match algebra {
            AlgebraLevel::COMPLEX => {
                set.kahler = Some(build_kahler(rank)?);
                set.hol_volume = Some(build_holomorphic_volume(rank)?);
            }
            AlgebraLevel::QUATERNION => {
                set.hk_triple = Some(build_hyperkahler_triple(rank)?);
                set.quat_theta = Some(build_quaternionic_theta(rank)?);
            }
            AlgebraLevel::OCTONION => {
                set.g2_three = Some(build_g2_three_form());
                set.g2_four = Some(build_g2_four_form());
                set.spin7_four = Some(build_spin7_four_form());
            }
            _ => {}
        }
        Ok(set)
    }

    /// The populated forms under their conventional names.
    pub fn named_forms(&self) -> Vec<(&'static str, &Multivector)> {
        let mut out: Vec<(&'static str, &Multivector)> = vec![("volume", &self.volume)];
        if let Some(f) = &self.kahler {
            out.push(("kahler", f));
        }
        if let Some((re, im)) = &self.hol_volume {
            out.push(("hol_volume_re", re));
            out.push(("hol_volume_im", im));
        }
        if let Some([i, j, k]) = &self.hk_triple {
            out.push(("omega_i", i));
            out.push(("omega_j", j));
            out.push(("omega_k", k));
        }
        if let Some(f) = &self.quat_theta {
            out.push(("quat_theta", f));
        }
        if let Some(f) = &self.g2_three {
            out.push(("g2_three", f));
        }
        if let Some(f) = &self.g2_four {
            out.push(("g2_four", f));
        }
        if let Some(f) = &self.spin7_four {
            out.push(("spin7_four", f));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rand_util::{gaussian_vec, seeded_rng};
    use nalgebra::DVector;

    #[test]
    fn kahler_base_case() {
        let w = build_kahler(1).unwrap();
        assert_eq!(w, Multivector::basis_form(2, &[1, 2], 1.0).unwrap());
    }

    #[test]
    fn kahler_top_power_is_volume() {
        for n in [2usize, 3] {
            let w = build_kahler(n).unwrap();
            let mut fact = 1.0;
            for k in 1..=n {
                fact *= k as f64;
            }
            let top = w.wedge_power(n).unwrap().scale(1.0 / fact);
            let nu = Multivector::volume_form(2 * n);
            assert!(top.sub(&nu).unwrap().norm_sq() < 1e-24);
        }
    }

    #[test]
    fn kahler_tames_its_complex_structure() {
        let n = 3;
        let w = build_kahler(n).unwrap();
        let e1 = AlgebraElement::basis(AlgebraLevel::COMPLEX, 1).unwrap();
        let j = module_matrix(Action::Right, &e1, n);
        let mut rng = seeded_rng(21);
        for _ in 0..50 {
            let v = DVector::from_vec(gaussian_vec(2 * n, &mut rng));
            let jv = &j * &v;
            let mut frame = DMatrix::zeros(2 * n, 2);
            frame.set_column(0, &v);
            frame.set_column(1, &jv);
            let val = w.eval_on_frame(&frame).unwrap();
            assert!(val > 0.0 || v.norm() < 1e-12);
        }
    }

    #[test]
    fn holomorphic_volume_base_case() {
        let (re, im) = build_holomorphic_volume(1).unwrap();
        assert_eq!(re, Multivector::one_form(2, 1));
        assert_eq!(im, Multivector::one_form(2, 2));
    }

    #[test]
    fn real_part_calibrates_the_real_axis() {
        for n in [2usize, 3] {
            let (re, _) = build_holomorphic_volume(n).unwrap();
            let mut frame = DMatrix::zeros(2 * n, n);
            for j in 0..n {
                frame[(2 * j, j)] = 1.0;
            }
            let restricted = re.pullback(&frame).unwrap();
            assert_eq!(restricted, Multivector::volume_form(n));
        }
    }

    #[test]
    fn re_and_im_are_orthogonal() {
        let (re, im) = build_holomorphic_volume(3).unwrap();
        let g = Metric::euclidean(6);
        assert_eq!(re.inner(&im, &g).unwrap(), 0.0);
    }

    #[test]
    fn hyperkahler_triple_shape() {
        let [wi, wj, wk] = build_hyperkahler_triple(1).unwrap();
        // explicit monomials in block coordinates (1, e1, e2, e3)
        let expect_i = Multivector::basis_form(4, &[1, 2], 1.0)
            .unwrap()
            .sub(&Multivector::basis_form(4, &[3, 4], 1.0).unwrap())
            .unwrap();
        let expect_j = Multivector::basis_form(4, &[1, 3], 1.0)
            .unwrap()
            .add(&Multivector::basis_form(4, &[2, 4], 1.0).unwrap())
            .unwrap();
        let expect_k = Multivector::basis_form(4, &[1, 4], 1.0)
            .unwrap()
            .sub(&Multivector::basis_form(4, &[2, 3], 1.0).unwrap())
            .unwrap();
        assert_eq!(wi, expect_i);
        assert_eq!(wj, expect_j);
        assert_eq!(wk, expect_k);
    }

    #[test]
    fn hyperkahler_forms_are_nondegenerate() {
        for n in [1usize, 2] {
            for w in build_hyperkahler_triple(n).unwrap() {
                let top = w.wedge_power(2 * n).unwrap();
                assert!(top.norm_sq() > 0.5);
            }
        }
    }

    #[test]
    fn hyperkahler_gram_is_scalar() {
        for n in [1usize, 2] {
            let triple = build_hyperkahler_triple(n).unwrap();
            let g = Metric::euclidean(4 * n);
            for (a, wa) in triple.iter().enumerate() {
                for (b, wb) in triple.iter().enumerate() {
                    let ip = wa.inner(wb, &g).unwrap();
                    let expected = if a == b { 2.0 * n as f64 } else { 0.0 };
                    assert!((ip - expected).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn g2_three_form_structure() {
        let omega = build_g2_three_form();
        assert_eq!(omega.term_count(), 7);
        for (_, c) in omega.terms() {
            assert!((c.abs() - 1.0).abs() < 1e-15);
        }
        // coefficient of the (e1, e2, e3) slot equals <e1, e2 x e3> = 1
        assert_eq!(omega.coeff(0b111), 1.0);
        // |Omega|^2 = 7
        let g = Metric::euclidean(7);
        let pairing = omega
            .wedge(&omega.hodge_star(&g, 1.0).unwrap())
            .unwrap();
        assert!(pairing
            .sub(&Multivector::volume_form(7).scale(7.0))
            .unwrap()
            .norm_sq()
            < 1e-24);
    }

    #[test]
    fn spin7_form_is_self_dual() {
        let theta = build_spin7_four_form();
        assert_eq!(theta.term_count(), 14);
        for (_, c) in theta.terms() {
            assert!((c.abs() - 1.0).abs() < 1e-15);
        }
        let g = Metric::euclidean(8);
        let star = theta.hodge_star(&g, 1.0).unwrap();
        assert!(star.sub(&theta).unwrap().norm_sq() < 1e-24);
    }

    #[test]
    fn spin7_restricted_to_quaternions() {
        let theta = build_spin7_four_form();
        let mut frame = DMatrix::zeros(8, 4);
        for j in 0..4 {
            frame[(j, j)] = 1.0;
        }
        // the quaternionic 4-plane is calibrated; with the coordinate frame
        // (e0, e1, e2, e3) the value is -1, so the calibrated orientation of
        // that plane is the reversed one
        let restricted = theta.pullback(&frame).unwrap();
        assert_eq!(restricted, Multivector::volume_form(4).scale(-1.0));
    }

    #[test]
    fn form_set_population() {
        let set = CanonicalFormSet::build(AlgebraLevel::COMPLEX, 3).unwrap();
        assert!(set.kahler.is_some() && set.hol_volume.is_some());
        assert_eq!(set.ambient_dim, 6);
        let set = CanonicalFormSet::build(AlgebraLevel::OCTONION, 1).unwrap();
        assert!(set.spin7_four.is_some() && set.g2_three.is_some());
        assert!(CanonicalFormSet::build(AlgebraLevel::OCTONION, 2).is_err());
        assert!(CanonicalFormSet::build(AlgebraLevel::QUATERNION, 5).is_err());
    }
}
