//! Arithmetic in the four normed division algebras ℝ, ℂ, ℍ, 𝕆 via the
//! Cayley–Dickson doubling.
//!
//! Elements are coefficient vectors over the basis `e0 = 1, e1, ..., e_{2^a-1}`
//! where a pair `(a, b)` at doubling step `k` stores the coefficients of `a`
//! followed by those of `b`; `e_{2^k}` is the unit adjoined at step `k`.
//! The doubling rule used throughout is
//!
//! ```text
//! (a, b)(c, d) = (ac - d̄b, da + bc̄),      (a, b)* = (a*, -b),
//! ```
//!
//! which produces the Hamilton orientation `e1 e2 = e3` in the quaternions and
//! fixes every downstream sign convention (cross product, G2 three-form,
//! hyperkähler triple) in one place.

use crate::error::{CalibraError, Result};
use nalgebra::DMatrix;
use once_cell::sync::Lazy;

/// One of the four normed division algebras, indexed by doubling level:
/// 0 = ℝ, 1 = ℂ, 2 = ℍ, 3 = 𝕆.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct AlgebraLevel(u8);

impl AlgebraLevel {
    pub const REAL: AlgebraLevel = AlgebraLevel(0);
    pub const COMPLEX: AlgebraLevel = AlgebraLevel(1);
    pub const QUATERNION: AlgebraLevel = AlgebraLevel(2);
    pub const OCTONION: AlgebraLevel = AlgebraLevel(3);

    /// Levels 4 and up are rejected: the doubled algebra 𝕆 ⊕ 𝕆 is no longer
    /// normed.
    pub fn new(level: u8) -> Result<Self> {
        if level > 3 {
            return Err(CalibraError::UnsupportedLevel(level));
        }
        Ok(AlgebraLevel(level))
    }

    pub fn index(self) -> u8 {
        self.0
    }

    /// Real dimension 2^level.
    pub fn dim(self) -> usize {
        1 << self.0
    }

    pub fn name(self) -> &'static str {
        match self.0 {
            0 => "R",
            1 => "C",
            2 => "H",
            _ => "O",
        }
    }
}

/// An element of a Cayley–Dickson algebra: `coeffs[k]` is the coefficient of
/// the basis unit `e_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraElement {
    level: AlgebraLevel,
    coeffs: Vec<f64>,
}

impl AlgebraElement {
    pub fn new(level: AlgebraLevel, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != level.dim() {
            return Err(CalibraError::DimensionMismatch(format!(
                "expected {} coefficients at level {}, got {}",
                level.dim(),
                level.index(),
                coeffs.len()
            )));
        }
        Ok(AlgebraElement { level, coeffs })
    }

    pub fn zero(level: AlgebraLevel) -> Self {
        AlgebraElement {
            level,
            coeffs: vec![0.0; level.dim()],
        }
    }

    pub fn one(level: AlgebraLevel) -> Self {
        Self::basis(level, 0).expect("e0 exists at every level")
    }

    /// The basis unit `e_k`.
    pub fn basis(level: AlgebraLevel, k: usize) -> Result<Self> {
        if k >= level.dim() {
            return Err(CalibraError::DimensionMismatch(format!(
                "basis index {} out of range for dimension {}",
                k,
                level.dim()
            )));
        }
        let mut coeffs = vec![0.0; level.dim()];
        coeffs[k] = 1.0;
        Ok(AlgebraElement { level, coeffs })
    }

    pub fn level(&self) -> AlgebraLevel {
        self.level
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Real part, the coefficient of `e0`.
    pub fn re(&self) -> f64 {
        self.coeffs[0]
    }

    /// Projection onto the span of `e1, ..., e_{2^a-1}`.
    pub fn imaginary_part(&self) -> Self {
        let mut out = self.clone();
        out.coeffs[0] = 0.0;
        out
    }

    pub fn is_imaginary(&self, tol: f64) -> bool {
        self.re().abs() <= tol
    }

    pub fn norm_sq(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Euclidean inner product of the coefficient vectors.
    pub fn inner(&self, other: &Self) -> Result<f64> {
        if self.level != other.level {
            return Err(CalibraError::LevelMismatch);
        }
        Ok(self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a * b)
            .sum())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.level != other.level {
            return Err(CalibraError::LevelMismatch);
        }
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a + b)
            .collect();
        Ok(AlgebraElement {
            level: self.level,
            coeffs,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, s: f64) -> Self {
        AlgebraElement {
            level: self.level,
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    pub fn normalized(&self) -> Self {
        self.scale(1.0 / self.norm())
    }
}

/// Recursive Cayley–Dickson product on coefficient slices of equal
/// power-of-two length.
fn cd_mul_rec(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    if n == 1 {
        return vec![x[0] * y[0]];
    }
    let h = n / 2;
    let (a, b) = x.split_at(h);
    let (c, d) = y.split_at(h);

    let conj = |v: &[f64]| -> Vec<f64> {
        let mut w = v.to_vec();
        for t in w.iter_mut().skip(1) {
            *t = -*t;
        }
        w
    };

    // (a,b)(c,d) = (ac - d̄b, da + bc̄)
    let ac = cd_mul_rec(a, c);
    let db = cd_mul_rec(&conj(d), b);
    let da = cd_mul_rec(d, a);
    let bc = cd_mul_rec(b, &conj(c));

    let mut out = Vec::with_capacity(n);
    for i in 0..h {
        out.push(ac[i] - db[i]);
    }
    for i in 0..h {
        out.push(da[i] + bc[i]);
    }
    out
}

/// Structure-constant table for the octonions: `OCT_TABLE[i][j] = (s, k)`
/// with `e_i e_j = s e_k`. Built once from the recursion; the upper-left
/// 2^a × 2^a block is the table of the level-a subalgebra.
static OCT_TABLE: Lazy<[[(f64, usize); 8]; 8]> = Lazy::new(|| {
    let mut table = [[(0.0, 0usize); 8]; 8];
    for i in 0..8 {
        for j in 0..8 {
            let mut x = vec![0.0; 8];
            let mut y = vec![0.0; 8];
            x[i] = 1.0;
            y[j] = 1.0;
            let p = cd_mul_rec(&x, &y);
            let k = p
                .iter()
                .position(|c| c.abs() > 0.5)
                .expect("basis products are monomial");
            table[i][j] = (p[k], k);
        }
    }
    table
});

/// Product of basis units at any level: `e_i e_j = s e_k`, returned as `(s, k)`.
pub fn basis_product(level: AlgebraLevel, i: usize, j: usize) -> (f64, usize) {
    debug_assert!(i < level.dim() && j < level.dim());
    OCT_TABLE[i][j]
}

/// Cayley–Dickson product. At level 0 this is plain real multiplication.
pub fn cd_multiply(x: &AlgebraElement, y: &AlgebraElement) -> Result<AlgebraElement> {
    if x.level != y.level {
        return Err(CalibraError::LevelMismatch);
    }
    let dim = x.level.dim();
    let mut coeffs = vec![0.0; dim];
    for i in 0..dim {
        let xi = x.coeffs[i];
        if xi == 0.0 {
            continue;
        }
        for j in 0..dim {
            let yj = y.coeffs[j];
            if yj == 0.0 {
                continue;
            }
            let (s, k) = OCT_TABLE[i][j];
            coeffs[k] += s * xi * yj;
        }
    }
    Ok(AlgebraElement {
        level: x.level,
        coeffs,
    })
}

/// Conjugation: fixes the real part and negates the imaginary part.
pub fn cd_conjugate(x: &AlgebraElement) -> AlgebraElement {
    let mut out = x.clone();
    for c in out.coeffs.iter_mut().skip(1) {
        *c = -*c;
    }
    out
}

/// Octonion cross product `x × y = Im(ȳ x)`.
///
/// With this crate's basis orientation `e1 × e2 = +e3`, so the induced
/// three-form `(x, y, z) ↦ ⟨x, y × z⟩` has coefficient +1 on `(e1, e2, e3)`.
pub fn cross_product(x: &AlgebraElement, y: &AlgebraElement) -> Result<AlgebraElement> {
    if x.level != AlgebraLevel::OCTONION || y.level != AlgebraLevel::OCTONION {
        return Err(CalibraError::RequiresLevel {
            required: 3,
            got: x.level.index().max(y.level.index()),
        });
    }
    Ok(cd_multiply(&cd_conjugate(y), x)?.imaginary_part())
}

/// The complex structure `J_u(y) = y u` given by right multiplication with a
/// unit imaginary element; applying it twice gives `-y` by alternativity.
pub fn j_u_action(u: &AlgebraElement, y: &AlgebraElement) -> Result<AlgebraElement> {
    if u.level != y.level {
        return Err(CalibraError::LevelMismatch);
    }
    if !u.is_imaginary(1e-10) || (u.norm() - 1.0).abs() > 1e-10 {
        return Err(CalibraError::InvalidGenerator);
    }
    cd_multiply(y, u)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Action {
    Left,
    Right,
}

/// The real 2^a × 2^a matrix of left (or right) multiplication by `x` in the
/// `e`-basis; column `j` holds the coefficients of `x e_j` (or `e_j x`).
pub fn as_real_matrix(action: Action, x: &AlgebraElement) -> DMatrix<f64> {
    let dim = x.level.dim();
    let mut m = DMatrix::zeros(dim, dim);
    for j in 0..dim {
        let ej = AlgebraElement::basis(x.level, j).unwrap();
        let col = match action {
            Action::Left => cd_multiply(x, &ej).unwrap(),
            Action::Right => cd_multiply(&ej, x).unwrap(),
        };
        for i in 0..dim {
            m[(i, j)] = col.coeffs[i];
        }
    }
    m
}

/// Solves `x w = y` for `w`. Left division is exact in an alternative algebra:
/// `w = x̄ y / |x|²`.
pub fn left_divide(x: &AlgebraElement, y: &AlgebraElement) -> Result<AlgebraElement> {
    if x.level != y.level {
        return Err(CalibraError::LevelMismatch);
    }
    let nsq = x.norm_sq();
    if nsq < 1e-300 {
        return Err(CalibraError::Malformed("division by zero element".into()));
    }
    Ok(cd_multiply(&cd_conjugate(x), y)?.scale(1.0 / nsq))
}
