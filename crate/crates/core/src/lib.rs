//! Class group computations in monogenic number fields.
//!
//! The crate implements a complete subexponential-style pipeline at desk
//! scale:
//!
//! * [`arith`] — exact polynomial arithmetic over `Z`, resultants by the
//!   subresultant scheme, factorization mod p, Hensel lifting of simple roots;
//! * [`field`] — number fields `Q[X]/(T)` for monic irreducible `T`,
//!   discriminants, signatures, norms and certified log embeddings;
//! * [`ideals`] — prime splitting, ideals as Hermite-form `Z`-lattices,
//!   exact multiplication, division, valuations and factorization;
//! * [`params`] — the subexponential parameter calculus that sizes factor
//!   bases, sieve boxes and the descent schedule;
//! * [`linalg`] — exact integer linear algebra: HNF and SNF with transforms,
//!   lattice membership, left solves, LLL reduction and short-vector
//!   enumeration;
//! * [`relations`] — factor bases and sieved relation collection;
//! * [`descent`] — decomposition of an arbitrary ideal over a factor base by
//!   recursive smoothing;
//! * [`solver`] — class group structure, discrete logarithms in the class
//!   group and principality tests with compact generator representations;
//! * [`oracle`] — independent brute-force class group computations (binary
//!   quadratic forms, Minkowski-bound enumeration) used as ground truth.
//!
//! Everything arithmetic is exact (`BigInt`/`BigRational`); floating point
//! only enters through parameter heuristics and the real log embeddings,
//! which carry explicit precision arguments.

pub mod arith;
pub mod descent;
pub mod field;
pub mod ideals;
pub mod io;
pub mod linalg;
pub mod oracle;
pub mod params;
pub mod relations;
pub mod solver;

use num_bigint::BigInt;

/// Crate-wide error type. Variants name the mathematical failure states of
/// the individual pipeline stages; IO and format errors are wrapped so the
/// command-line driver can map everything onto its exit-code contract.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    // ---- polynomial arithmetic ----
    #[error("zero polynomial has no resultant")]
    ZeroPolynomial,
    #[error("{0} is not prime")]
    NotPrime(BigInt),
    #[error("root is not simple: derivative vanishes mod p")]
    NotSimpleRoot,
    #[error("value is not a root mod p")]
    NotRoot,

    // ---- field construction ----
    #[error("polynomial is reducible over Q")]
    Reducible,
    #[error("polynomial is not monic")]
    NotMonic,
    #[error("cannot certify that Z[x]/(T) is the maximal order; pass a monogenicity waiver")]
    MonogenicityUnknown,
    #[error("zero element has no norm or embedding")]
    ZeroElement,
    #[error("root refinement failed to certify the requested precision")]
    PrecisionLoss,

    // ---- ideal arithmetic ----
    #[error("ideals belong to different fields")]
    FieldMismatch,
    #[error("valuation is ambiguous at the working p-adic precision")]
    PrecisionExceeded,
    #[error("could not factor {0} within the configured effort")]
    Unfactored(BigInt),

    // ---- parameter calculus ----
    #[error("parameter out of domain: {0}")]
    DomainError(String),
    #[error("field is degenerate for the parameter calculus (all coefficient logs vanish)")]
    DegenerateField,

    // ---- relation collection ----
    #[error("sieve space exhausted after {tested} candidates with {found} relations accepted")]
    SearchSpaceExhausted { tested: u64, found: usize },

    // ---- linear algebra ----
    #[error("relation matrix is rank deficient: rank {rank} < {cols} factor base primes")]
    RankDeficient { rank: usize, cols: usize },
    #[error("linear system has no solution")]
    NoSolution,

    // ---- descent ----
    #[error("tuple bounds unsatisfiable: D/k + z is negative")]
    BoundsUnsatisfiable,
    #[error("no smooth element found within the allotted effort")]
    NoSmoothFound,
    #[error("enumerated element does not lie in the ideal")]
    NotContained,
    #[error("descent stuck at prime of norm {norm} (level {level})")]
    DescentStuck { norm: BigInt, level: usize },
    #[error("ideal norm {norm} exceeds the descent cap {cap}")]
    NormTooLarge { norm: BigInt, cap: BigInt },

    // ---- solver ----
    #[error("target class does not lie in the subgroup generated by the base")]
    NotInSubgroup,

    // ---- oracles ----
    #[error("enumeration bound {0} too large for the brute-force oracle")]
    TooLarge(u64),
    #[error("{0} is not a negative quadratic discriminant")]
    BadDiscriminant(BigInt),

    // ---- plumbing ----
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
