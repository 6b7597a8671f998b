//! Flat-space geometry over the normed division algebras ℝ, ℂ, ℍ and 𝕆:
//! Cayley–Dickson arithmetic, exterior algebra, the canonical parallel and
//! calibrating forms, structure-group membership tests, classification of
//! calibrated linear subspaces, comass verification, and the fiberwise
//! Fourier transform on flat tori.

pub mod algebra;
pub mod calibrate;
pub mod error;
pub mod exterior;
pub mod forms;
pub mod groups;
pub mod linalg;
pub mod par;
pub mod selftest;
pub mod subspace;
pub mod torus;
pub mod rand_util;

pub use error::{CalibraError, Result};

/// The sign and orientation conventions fixed by this build, embedded in
/// reports so every number is auditable.
pub fn convention_ledger() -> Vec<&'static str> {
    vec![
        "basis: Hamilton orientation e1e2 = e3; cross product x*y = Im(conj(y) x) with <e1, e2*e3> = +1",
        "omega_u(x, y) = <x u, y>, so omega_{e1} is the standard Kahler form",
        "the Cayley four-form is self-dual for the standard orientation of R^8 (real axis first)",
        "the hyperkahler triple spans the anti-self-dual forms in the coordinate orientation of R^4; the quaternionic orientation is (-1)^n times the coordinate one",
        "two-form operator eigenvalues: m=8 {-1 on 21, +3 on 7}; m=7 {+1 on 14, -2 on 7}",
        "connection-level quadratic = minus the scalar q_Phi; recorded normalizations: omega^(n-2)/(n-2)! (c=1), theta_H/6 at rank 2, the Cayley form (c=1), minus the G2 three-form",
        "fiber transform: kernel exp(-i sum dy^j ^ dy_j), fiber block collected at the right end, global (-1)^(n(n-1)/2), parity twist (-i)^((n-d) mod 2)",
        "round trip of the fiber transform: identity for odd rank, (-1)^degree for even rank",
    ]
}
