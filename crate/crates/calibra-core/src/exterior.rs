//! Graded exterior algebra on (ℝ^m)* for m ≤ 16.
//!
//! Monomials are coordinate subsets stored as bitmasks (bit i ↔ dx^{i+1});
//! a wedge monomial is always read in increasing index order. Coefficients
//! below [`PRUNE_EPS`] are dropped after every operation, so absent keys mean
//! zero.

use crate::error::{CalibraError, Result};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

pub const MAX_DIM: usize = 16;
pub const PRUNE_EPS: f64 = 1e-14;

/// Sign of `e_a ∧ e_b` relative to `e_{a ∪ b}`, or 0 when the masks overlap.
pub(crate) fn wedge_sign(a: u32, b: u32) -> f64 {
    if a & b != 0 {
        return 0.0;
    }
    let mut parity = 0u32;
    let mut bb = b;
    while bb != 0 {
        let j = bb.trailing_zeros();
        parity ^= (a >> (j + 1)).count_ones() & 1;
        bb &= bb - 1;
    }
    if parity == 0 {
        1.0
    } else {
        -1.0
    }
}

/// All k-element subsets of {0, .., m-1} as bitmasks, in increasing order
/// (Gosper's hack).
pub(crate) fn k_subsets(m: usize, k: usize) -> Vec<u32> {
    if k > m {
        return Vec::new();
    }
    if k == 0 {
        return vec![0];
    }
    let limit = 1u32 << m;
    let mut v = (1u32 << k) - 1;
    let mut out = Vec::new();
    while v < limit {
        out.push(v);
        let c = v & v.wrapping_neg();
        let r = v + c;
        v = (((r ^ v) >> 2) / c) | r;
    }
    out
}

pub(crate) fn mask_from_indices(indices: &[usize]) -> Result<u32> {
    let mut mask = 0u32;
    let mut prev = 0usize;
    for &i in indices {
        if i == 0 || i > MAX_DIM {
            return Err(CalibraError::Malformed(format!(
                "index {i} out of range 1..={MAX_DIM}"
            )));
        }
        if i <= prev {
            return Err(CalibraError::Malformed(
                "indices must be strictly increasing".into(),
            ));
        }
        prev = i;
        mask |= 1 << (i - 1);
    }
    Ok(mask)
}

pub(crate) fn indices_from_mask(mask: u32) -> Vec<usize> {
    (0..32)
        .filter(|b| mask & (1 << b) != 0)
        .map(|b| b + 1)
        .collect()
}

/// A graded element of Λ*(ℝ^m)*.
#[derive(Clone, Debug, PartialEq)]
pub struct Multivector {
    dim: usize,
    terms: BTreeMap<u32, f64>,
}

impl Multivector {
    pub fn zero(dim: usize) -> Self {
        assert!(dim <= MAX_DIM, "dimension cap is {MAX_DIM}");
        Multivector {
            dim,
            terms: BTreeMap::new(),
        }
    }

    pub fn scalar(dim: usize, value: f64) -> Self {
        let mut out = Self::zero(dim);
        out.insert(0, value);
        out
    }

    /// The coordinate one-form dx^i (1-based).
    pub fn one_form(dim: usize, i: usize) -> Self {
        assert!(i >= 1 && i <= dim);
        let mut out = Self::zero(dim);
        out.insert(1 << (i - 1), 1.0);
        out
    }

    /// Basis monomial dx^{i1} ∧ ... ∧ dx^{ik} for strictly increasing indices.
    pub fn basis_form(dim: usize, indices: &[usize], coeff: f64) -> Result<Self> {
        let mask = mask_from_indices(indices)?;
        if indices.iter().any(|&i| i > dim) {
            return Err(CalibraError::DimensionMismatch(format!(
                "index exceeds dimension {dim}"
            )));
        }
        let mut out = Self::zero(dim);
        out.insert(mask, coeff);
        Ok(out)
    }

    pub fn volume_form(dim: usize) -> Self {
        let mut out = Self::zero(dim);
        out.insert((1u32 << dim) - 1, 1.0);
        out
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coeff(&self, mask: u32) -> f64 {
        self.terms.get(&mask).copied().unwrap_or(0.0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.terms.iter().map(|(&m, &c)| (m, c))
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub(crate) fn insert(&mut self, mask: u32, coeff: f64) {
        if coeff.abs() < PRUNE_EPS {
            return;
        }
        let entry = self.terms.entry(mask).or_insert(0.0);
        *entry += coeff;
        if entry.abs() < PRUNE_EPS {
            self.terms.remove(&mask);
        }
    }

    /// Grades that actually occur, with their components.
    pub fn grade_components(&self) -> Vec<(usize, Multivector)> {
        let mut by_grade: BTreeMap<usize, Multivector> = BTreeMap::new();
        for (&mask, &c) in &self.terms {
            by_grade
                .entry(mask.count_ones() as usize)
                .or_insert_with(|| Multivector::zero(self.dim))
                .insert(mask, c);
        }
        by_grade.into_iter().collect()
    }

    /// Some(k) when every stored monomial has grade k.
    pub fn pure_grade(&self) -> Option<usize> {
        let mut grade = None;
        for &mask in self.terms.keys() {
            let k = mask.count_ones() as usize;
            match grade {
                None => grade = Some(k),
                Some(g) if g != k => return None,
                _ => {}
            }
        }
        grade
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let mut out = self.clone();
        for (&mask, &c) in &other.terms {
            out.insert(mask, c);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = Multivector::zero(self.dim);
        for (&mask, &c) in &self.terms {
            out.insert(mask, c * s);
        }
        out
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(CalibraError::DimensionMismatch(format!(
                "forms live on dimensions {} and {}",
                self.dim, other.dim
            )));
        }
        Ok(())
    }

    /// Wedge product with the subset-disjointness sign rule.
    pub fn wedge(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let mut out = Multivector::zero(self.dim);
        for (&ma, &ca) in &self.terms {
            for (&mb, &cb) in &other.terms {
                let s = wedge_sign(ma, mb);
                if s != 0.0 {
                    out.insert(ma | mb, s * ca * cb);
                }
            }
        }
        Ok(out)
    }

    pub fn wedge_power(&self, k: usize) -> Result<Self> {
        let mut out = Multivector::scalar(self.dim, 1.0);
        for _ in 0..k {
            out = out.wedge(self)?;
        }
        Ok(out)
    }

    /// Finite exponential Σ_k self^k / k!; terminates because grades are
    /// bounded by the dimension.
    pub fn exponential(&self) -> Result<Self> {
        let mut out = Multivector::scalar(self.dim, 1.0);
        let mut power = Multivector::scalar(self.dim, 1.0);
        let mut factorial = 1.0;
        for k in 1..=self.dim {
            power = power.wedge(self)?;
            factorial *= k as f64;
            if power.is_zero() {
                break;
            }
            out = out.add(&power.scale(1.0 / factorial))?;
        }
        Ok(out)
    }

    /// Euclidean squared norm (sum of squared coefficients).
    pub fn norm_sq(&self) -> f64 {
        self.terms.values().map(|c| c * c).sum()
    }

    /// Pullback along the linear map whose matrix columns are the images of
    /// the target basis vectors. For an m×k orthonormal frame this is the
    /// restriction of the form to the spanned k-plane, expressed in frame
    /// coordinates.
    pub fn pullback(&self, map: &DMatrix<f64>) -> Result<Self> {
        if map.nrows() != self.dim {
            return Err(CalibraError::DimensionMismatch(format!(
                "map has {} rows, form lives on dimension {}",
                map.nrows(),
                self.dim
            )));
        }
        let k = map.ncols();
        if k > MAX_DIM {
            return Err(CalibraError::DimensionMismatch(format!(
                "target dimension {k} exceeds the cap {MAX_DIM}"
            )));
        }
        let mut out = Multivector::zero(k);
        for (&mask, &c) in &self.terms {
            let rows = mask_bits(mask);
            let g = rows.len();
            if g > k {
                continue;
            }
            if g == 0 {
                out.insert(0, c);
                continue;
            }
            for &tmask in &k_subsets(k, g) {
                let cols = mask_bits(tmask);
                let d = minor_det(map, &rows, &cols);
                out.insert(tmask, c * d);
            }
        }
        Ok(out)
    }

    /// Evaluates a pure-grade-k form on an oriented m×k frame.
    pub fn eval_on_frame(&self, frame: &DMatrix<f64>) -> Result<f64> {
        let k = frame.ncols();
        match self.pure_grade() {
            Some(g) if g == k => {}
            None if self.is_zero() => return Ok(0.0),
            _ => {
                return Err(CalibraError::GradeMismatch(format!(
                    "form is not pure grade {k}"
                )))
            }
        }
        if frame.nrows() != self.dim {
            return Err(CalibraError::DimensionMismatch(
                "frame rows do not match form dimension".into(),
            ));
        }
        let cols: Vec<usize> = (0..k).collect();
        let mut value = 0.0;
        for (&mask, &c) in &self.terms {
            let rows = mask_bits(mask);
            value += c * minor_det(frame, &rows, &cols);
        }
        Ok(value)
    }

    /// Hodge star for the given metric and orientation (±1); satisfies
    /// a ∧ ⋆b = ⟨a, b⟩_g ν_g.
    pub fn hodge_star(&self, metric: &Metric, orientation: f64) -> Result<Self> {
        if metric.dim != self.dim {
            return Err(CalibraError::DimensionMismatch(
                "metric dimension does not match form".into(),
            ));
        }
        let m = self.dim;
        let full = (1u32 << m) - 1;
        let mut out = Multivector::zero(m);
        if metric.euclidean {
            for (&mask, &c) in &self.terms {
                let comp = full & !mask;
                out.insert(comp, wedge_sign(mask, comp) * orientation * c);
            }
            return Ok(out);
        }
        for (grade, component) in self.grade_components() {
            for &umask in &k_subsets(m, grade) {
                let ip = metric.monomial_inner(umask, &component);
                if ip.abs() < PRUNE_EPS {
                    continue;
                }
                let comp = full & !umask;
                out.insert(
                    comp,
                    wedge_sign(umask, comp) * orientation * metric.sqrt_det * ip,
                );
            }
        }
        Ok(out)
    }

    /// Grade-wise metric inner product of forms.
    pub fn inner(&self, other: &Self, metric: &Metric) -> Result<f64> {
        self.check_dim(other)?;
        if metric.dim != self.dim {
            return Err(CalibraError::DimensionMismatch(
                "metric dimension does not match forms".into(),
            ));
        }
        if metric.euclidean {
            let mut acc = 0.0;
            for (&mask, &c) in &self.terms {
                acc += c * other.coeff(mask);
            }
            return Ok(acc);
        }
        let mut acc = 0.0;
        for (&smask, &cs) in &self.terms {
            let gs = smask.count_ones();
            for (&tmask, &ct) in &other.terms {
                if tmask.count_ones() != gs {
                    continue;
                }
                acc += cs * ct * metric.pair(smask, tmask);
            }
        }
        Ok(acc)
    }
}

pub(crate) fn mask_bits(mask: u32) -> Vec<usize> {
    (0..32).filter(|b| mask & (1 << b) != 0).collect()
}

/// Determinant of the submatrix with the given rows and columns.
pub(crate) fn minor_det(m: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> f64 {
    debug_assert_eq!(rows.len(), cols.len());
    let k = rows.len();
    match k {
        0 => 1.0,
        1 => m[(rows[0], cols[0])],
        2 => {
            m[(rows[0], cols[0])] * m[(rows[1], cols[1])]
                - m[(rows[0], cols[1])] * m[(rows[1], cols[0])]
        }
        _ => {
            let sub = DMatrix::from_fn(k, k, |i, j| m[(rows[i], cols[j])]);
            sub.determinant()
        }
    }
}

/// A constant Riemannian metric on ℝ^m given by its Gram matrix.
#[derive(Clone, Debug)]
pub struct Metric {
    dim: usize,
    gram: DMatrix<f64>,
    inverse: DMatrix<f64>,
    sqrt_det: f64,
    euclidean: bool,
}

impl Metric {
    pub fn euclidean(dim: usize) -> Self {
        Metric {
            dim,
            gram: DMatrix::identity(dim, dim),
            inverse: DMatrix::identity(dim, dim),
            sqrt_det: 1.0,
            euclidean: true,
        }
    }

    pub fn new(gram: DMatrix<f64>) -> Result<Self> {
        let dim = gram.nrows();
        if gram.ncols() != dim {
            return Err(CalibraError::Malformed("gram matrix must be square".into()));
        }
        if (&gram - gram.transpose()).norm() > 1e-12 * (1.0 + gram.norm()) {
            return Err(CalibraError::Malformed("gram matrix must be symmetric".into()));
        }
        let chol = gram
            .clone()
            .cholesky()
            .ok_or_else(|| CalibraError::Malformed("gram matrix must be positive definite".into()))?;
        let sqrt_det = (0..dim).map(|i| chol.l()[(i, i)]).product();
        let inverse = chol.inverse();
        let euclidean = (&gram - DMatrix::identity(dim, dim)).norm() < 1e-14;
        Ok(Metric {
            dim,
            gram,
            inverse,
            sqrt_det,
            euclidean,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    pub fn is_euclidean(&self) -> bool {
        self.euclidean
    }

    pub fn volume_form(&self, orientation: f64) -> Multivector {
        Multivector::volume_form(self.dim).scale(self.sqrt_det * orientation)
    }

    /// ⟨e_S, e_T⟩ for basis covector monomials: the minor determinant of the
    /// inverse Gram matrix.
    fn pair(&self, smask: u32, tmask: u32) -> f64 {
        let rows = mask_bits(smask);
        let cols = mask_bits(tmask);
        minor_det(&self.inverse, &rows, &cols)
    }

    fn monomial_inner(&self, umask: u32, component: &Multivector) -> f64 {
        let mut acc = 0.0;
        for (tmask, c) in component.terms() {
            acc += c * self.pair(umask, tmask);
        }
        acc
    }
}

#[derive(Serialize, Deserialize)]
struct TermJson {
    indices: Vec<usize>,
    coeff: f64,
}

#[derive(Serialize, Deserialize)]
struct MultivectorJson {
    dim: usize,
    terms: Vec<TermJson>,
}

impl Serialize for Multivector {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let terms = self
            .terms
            .iter()
            .map(|(&mask, &coeff)| TermJson {
                indices: indices_from_mask(mask),
                coeff,
            })
            .collect();
        MultivectorJson {
            dim: self.dim,
            terms,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Multivector {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = MultivectorJson::deserialize(deserializer)?;
        if raw.dim > MAX_DIM {
            return Err(serde::de::Error::custom(format!(
                "dimension {} exceeds cap {MAX_DIM}",
                raw.dim
            )));
        }
        let mut out = Multivector::zero(raw.dim);
        for term in raw.terms {
            let mask = mask_from_indices(&term.indices).map_err(serde::de::Error::custom)?;
            if term.indices.iter().any(|&i| i > raw.dim) {
                return Err(serde::de::Error::custom("index exceeds dimension"));
            }
            out.insert(mask, term.coeff);
        }
        Ok(out)
    }
}
