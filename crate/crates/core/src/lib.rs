//! Exact engine for Cameron-Liebler line classes of PG(3,q) built from a
//! pencil of quadrics invariant under PGL(2,q).
//!
//! The pipeline runs bottom-up: finite field arithmetic ([`gf`]), the
//! projective space PG(3,q) with Pluecker line coordinates ([`geometry`]),
//! the pencil of quadrics and its point/line taxonomy ([`pencil`]), the
//! PGL(2,q) embedding and its orbits ([`group_action`]), tight-set
//! verification through the Klein correspondence ([`klein`]), and the line
//! class constructions with their character-based comparisons
//! ([`lineclass`]). Everything is computed exactly over GF(q); nothing is
//! sampled except the optional seeded spread tests.

pub mod bitset;
pub mod cli;
pub mod geometry;
pub mod gf;
pub mod group_action;
pub mod klein;
pub mod lineclass;
pub mod pencil;
pub mod report;

/// Crate-wide error type. Domain violations (inverting zero, spanning a
/// degenerate pair, polarity of the cone, ...) are reported through this
/// rather than panics so the CLI can surface them cleanly.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("inversion of zero in GF({q})")]
    ZeroInversion { q: u32 },
    #[error("{0} is not an odd prime")]
    NotOddPrime(u32),
    #[error("modulus {0:?} is not a monic degree-{1} polynomial")]
    BadModulus(Vec<u32>, usize),
    #[error("modulus {0:?} is reducible over GF({1})")]
    ReducibleModulus(Vec<u32>, u32),
    #[error("no built-in modulus for q = {0}; supply one explicitly")]
    NoBuiltinModulus(u64),
    #[error("element {0:?} is outside GF({1})")]
    BadElement(Vec<u32>, u32),
    #[error("cannot span a line: the two points coincide")]
    DegenerateSpan,
    #[error("point lies on the line; no unique plane through both")]
    DegeneratePlane,
    #[error("singular matrix does not induce a collineation")]
    SingularMatrix,
    #[error("polarity is undefined for the degenerate member (lambda = 0)")]
    DegeneratePolarity,
    #[error("expected a non-square pencil parameter, got {0}")]
    NotNonSquare(String),
    #[error("expected a non-degenerate 2x2 matrix (ad - bc != 0)")]
    SingularSource,
    #[error("derivation precondition failed: {0}")]
    Derivation(String),
    #[error("line class universe mismatch: {0}")]
    UniverseMismatch(String),
    #[error("{0}")]
    BadInput(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
