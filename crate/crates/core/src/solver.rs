//! Discrete logarithms and principality certificates over a relation
//! matrix.
//!
//! Class-group discrete logs are computed by appending the
//! decompositions of the two input ideals to the integer relation block
//! and solving a single left linear system — the group structure itself
//! is never computed.  Principality testing is row-lattice membership,
//! and a positive answer carries a generator kept as an unexpanded power
//! product (its expanded coefficients would be astronomically large).
//! The Smith form of the block is exposed separately for structure
//! checks and cross-validation against the brute-force oracles.
//!
//! Both operations inherit a caveat from the relation collection: a
//! negative answer (`NonPrincipal`, `NotInSubgroup`) asserts
//! non-membership in the *collected* row lattice, which coincides with
//! the true relation lattice only when collection saturated it.
//! Positive answers are verified exactly before being returned, and the
//! solvers widen the sieve prefix once and retry before giving up.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::descent::{decompose, DecompositionResult, DescentConfig};
use crate::field::FieldElement;
use crate::ideals::{factor_element, factor_ideal, Ideal};
use crate::linalg::IntMatrix;
use crate::params::ParameterSet;
use crate::relations::{
    assemble_and_check, sieve_relations, FactorBase, RelationMatrix,
};
use crate::{Error, Result};

// ===================================================================
// Compact representations
// ===================================================================

/// A principal-ideal generator stored as an unexpanded power product
/// `prod_j gamma_j^(v_j)`; exponents may be negative, repeats multiply.
#[derive(Clone, Debug, Default)]
pub struct CompactRep {
    pub factors: Vec<(FieldElement, BigInt)>,
}

impl CompactRep {
    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }
}

/// Answer of [`is_principal`].
#[derive(Clone, Debug)]
pub enum Principality {
    Principal(CompactRep),
    NonPrincipal,
}

/// Factoring effort ceiling used when re-checking certificates; desk
/// scale norms sit far below it.
const VERIFY_FACTOR_LIMIT: u64 = 1 << 20;

/// Ideal-level verification of a compact representation: over the union
/// of prime supports, the summed valuations of the power product must
/// reproduce the ideal exactly, and the absolute norms must multiply out
/// to the ideal's norm as exact rationals (negative exponents land in
/// the denominator).
pub fn verify_compact(ideal: &Ideal, rep: &CompactRep) -> bool {
    let Ok(ideal_factors) = factor_ideal(ideal, VERIFY_FACTOR_LIMIT) else {
        return false;
    };
    let mut want: BTreeMap<_, BigInt> = BTreeMap::new();
    for (q, v) in ideal_factors {
        want.insert(q.sort_key(), BigInt::from(v));
    }
    let mut have: BTreeMap<_, BigInt> = BTreeMap::new();
    let mut norm_num = BigInt::one();
    let mut norm_den = BigInt::one();
    for (gamma, v) in &rep.factors {
        let Ok(factors) = factor_element(gamma, VERIFY_FACTOR_LIMIT) else {
            return false;
        };
        for (q, w) in factors {
            *have.entry(q.sort_key()).or_default() += BigInt::from(w) * v;
        }
        let Ok(nm) = gamma.norm() else {
            return false;
        };
        let Some(k) = v.abs().to_usize() else {
            return false;
        };
        let powed = num_traits::pow(nm.abs(), k);
        if v.is_negative() {
            norm_den *= powed;
        } else {
            norm_num *= powed;
        }
    }
    have.retain(|_, v| !v.is_zero());
    want.retain(|_, v| !v.is_zero());
    have == want && norm_num == ideal.norm() * norm_den
}

// ===================================================================
// Group structure and class orders
// ===================================================================

/// Nontrivial invariant factors of the class group, read off the Smith
/// form of the integer relation block (each divides the next).  Sound
/// exactly when the rows span the full relation lattice; used for
/// cross-checks rather than by the solvers themselves.
pub fn class_group(mat: &RelationMatrix) -> Result<Vec<BigInt>> {
    assemble_and_check(mat)?;
    Ok(mat
        .mz
        .snf()
        .into_iter()
        .map(|d| d.abs())
        .filter(|d| d > &BigInt::one())
        .collect())
}

/// Smallest positive `m` with `m * e` inside the row lattice of `basis`
/// (full-rank HNF with determinant `h`): the order of the class with
/// factor-base exponents `e` in the group the rows cut out.
fn order_in_lattice(basis: &IntMatrix, e: &[i64], h: &BigInt) -> Result<BigInt> {
    let mut m = BigInt::one();
    while &m <= h {
        let scaled: Vec<BigInt> = e.iter().map(|&c| BigInt::from(c) * &m).collect();
        if basis.hnf_contains(&scaled) {
            return Ok(m);
        }
        m += 1;
    }
    Err(Error::DomainError(
        "class order exceeds the lattice determinant".into(),
    ))
}

/// Order of the ideal class with factor-base exponents `e`.
pub fn order_of_class(mat: &RelationMatrix, e: &[i64]) -> Result<BigInt> {
    let check = assemble_and_check(mat)?;
    order_in_lattice(&mat.mz.hnf_basis(), e, &check.hnf_det)
}

// ===================================================================
// Discrete logarithms
// ===================================================================

/// One discrete-log instance, assembled for solving.
///
/// `extended` is the relation block with two columns (for the classes of
/// `b` and `a`, in that order) and two rows appended: `[v_b | 1 0]` and
/// `[v_a | 0 1]`.  Here `v_a`, `v_b` are the *negated* factor-base
/// exponent vectors of the inputs, so each appended row is itself a
/// genuine relation over the enlarged base: `a * prod P^(v_a) = prod
/// (gamma_j)^(w_j)` is principal by the decomposition identity.
pub struct DlpInstance {
    pub extended: IntMatrix,
    pub v_a: Vec<BigInt>,
    pub v_b: Vec<BigInt>,
    /// Full decomposition bookkeeping for both inputs.
    pub dec_a: DecompositionResult,
    pub dec_b: DecompositionResult,
}

/// Decomposes both inputs over the factor base (concurrently) and
/// assembles the extended matrix.
pub fn build_dlp_instance(
    fb: &FactorBase,
    mat: &RelationMatrix,
    params: &ParameterSet,
    a: &Ideal,
    b: &Ideal,
    seed: u64,
    config: &DescentConfig,
) -> Result<DlpInstance> {
    let (ra, rb) = rayon::join(
        || decompose(a, fb, params, seed, config),
        || decompose(b, fb, params, seed ^ 1, config),
    );
    let (dec_a, dec_b) = (ra?, rb?);
    let v_a: Vec<BigInt> = dec_a.exponents.iter().map(|&e| BigInt::from(-e)).collect();
    let v_b: Vec<BigInt> = dec_b.exponents.iter().map(|&e| BigInt::from(-e)).collect();
    let mut rows: Vec<Vec<BigInt>> = Vec::with_capacity(mat.rows() + 2);
    for r in mat.mz.rows_iter() {
        let mut row = r.to_vec();
        row.extend([BigInt::zero(), BigInt::zero()]);
        rows.push(row);
    }
    let mut row_b = v_b.clone();
    row_b.extend([BigInt::one(), BigInt::zero()]);
    rows.push(row_b);
    let mut row_a = v_a.clone();
    row_a.extend([BigInt::zero(), BigInt::one()]);
    rows.push(row_a);
    Ok(DlpInstance {
        extended: IntMatrix::from_rows(rows),
        v_a,
        v_b,
        dec_a,
        dec_b,
    })
}

/// Discrete logarithm `x` with `[b] = [a]^x`, canonicalized to the least
/// non-negative residue modulo the order of `[a]`.
///
/// Drops the trailing `a` column of the extended matrix and solves
/// `X * A = (0,..,0,1)`: the last coordinate forces the `v_b` row's
/// coefficient to 1, the factor-base columns cancel, and `x` is the
/// negated coefficient of the `v_a` row.  The class identity is then
/// verified by a lattice membership test; on any failure the sieve
/// prefix is widened once by `max(K r, K)` rows and the solve retried
/// before `NotInSubgroup` is raised.
pub fn discrete_log(
    fb: &FactorBase,
    mat: &RelationMatrix,
    params: &ParameterSet,
    a: &Ideal,
    b: &Ideal,
    seed: u64,
    precision_bits: u32,
    config: &DescentConfig,
) -> Result<BigInt> {
    if let Some(x) = discrete_log_once(fb, mat, params, a, b, seed, config)? {
        return Ok(x);
    }
    let r = fb.field.unit_rank;
    let step = (params.k_extra as usize * r).max(params.k_extra as usize);
    let rels = sieve_relations(fb, params, mat.rows() + step, seed, precision_bits)?;
    let wide = RelationMatrix::from_relations(fb.field.clone(), fb.len(), &rels);
    match discrete_log_once(fb, &wide, params, a, b, seed, config)? {
        Some(x) => Ok(x),
        None => Err(Error::NotInSubgroup),
    }
}

fn discrete_log_once(
    fb: &FactorBase,
    mat: &RelationMatrix,
    params: &ParameterSet,
    a: &Ideal,
    b: &Ideal,
    seed: u64,
    config: &DescentConfig,
) -> Result<Option<BigInt>> {
    let check = assemble_and_check(mat)?;
    let inst = build_dlp_instance(fb, mat, params, a, b, seed, config)?;
    let n = mat.fb_size;
    let a_mat = IntMatrix::from_rows(
        inst.extended
            .rows_iter()
            .map(|r| r[..n + 1].to_vec())
            .collect(),
    );
    let mut target = vec![BigInt::zero(); n + 1];
    target[n] = BigInt::one();
    let Some(xs) = a_mat.solve_left_integral(&target)? else {
        return Ok(None);
    };
    let raw = -xs.last().expect("system has rows").clone();
    // ord([a]) from the row lattice is a positive multiple of the true
    // order even on incomplete lattices, so reducing is always sound
    let basis = mat.mz.hnf_basis();
    let ord = order_in_lattice(&basis, &inst.dec_a.exponents, &check.hnf_det)?;
    let x = raw.mod_floor(&ord);
    let diff: Vec<BigInt> = inst
        .dec_b
        .exponents
        .iter()
        .zip(&inst.dec_a.exponents)
        .map(|(&eb, &ea)| BigInt::from(eb) - &x * BigInt::from(ea))
        .collect();
    Ok(if basis.hnf_contains(&diff) {
        Some(x)
    } else {
        None
    })
}

// ===================================================================
// Principality
// ===================================================================

/// Decides principality of `ideal` by decomposing it over the factor
/// base and testing row-lattice membership of the exponent vector; a
/// positive answer carries a compact representation of a generator,
/// verified before being returned.
///
/// The certificate stitches together the descent's generator trace and
/// the relation generators raised to the solution coefficients: if
/// `I = prod P^e * prod gamma_j^(w_j)` and `X * M = e`, then
/// `I = (prod gamma_j^(w_j) * prod phi_i^(X_i))`.
pub fn is_principal(
    fb: &FactorBase,
    mat: &RelationMatrix,
    params: &ParameterSet,
    ideal: &Ideal,
    seed: u64,
    config: &DescentConfig,
) -> Result<Principality> {
    assemble_and_check(mat)?;
    let dec = decompose(ideal, fb, params, seed, config)?;
    let target: Vec<BigInt> = dec.exponents.iter().map(|&e| BigInt::from(e)).collect();
    let Some(coeffs) = mat.mz.solve_left_integral(&target)? else {
        return Ok(Principality::NonPrincipal);
    };
    let mut factors: Vec<(FieldElement, BigInt)> = dec
        .generator_trace
        .iter()
        .map(|(g, w)| (g.clone(), BigInt::from(*w)))
        .collect();
    for (phi, c) in mat.generators.iter().zip(&coeffs) {
        if !c.is_zero() {
            factors.push((phi.clone(), c.clone()));
        }
    }
    let rep = CompactRep { factors };
    if !verify_compact(ideal, &rep) {
        return Err(Error::DomainError(
            "compact representation fails the valuation identity".into(),
        ));
    }
    Ok(Principality::Principal(rep))
}
