//! Factor bases, smoothness testing, and relation collection.
//!
//! The factor base holds every non-inert prime ideal of norm at most `B`
//! (ramified primes included) in a fixed sort order. A relation is an
//! element `phi = A(theta)` whose principal ideal factors entirely over
//! the base; its row records the exponent vector and the first `r`
//! archimedean logarithms.
//!
//! [`sieve_relations`] enumerates the coefficient box `deg A <= k`,
//! `|a_i| <= 2^a` in a seeded pseudorandom order — a shuffled index table
//! for small spaces, a keyed Feistel permutation with cycle walking for
//! large ones — and trial-divides norms over the base primes. Batches are
//! tested in parallel and re-sorted by candidate index before acceptance,
//! so the output is byte-identical for a fixed seed no matter how many
//! worker threads run. Every accepted row is re-verified exactly:
//! the power product of its factorization must re-multiply to the HNF
//! of `(phi)`.

use std::collections::{HashMap, HashSet};
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::arith::{primes_up_to, Poly};
use crate::field::{bigint_log2, bigint_to_f64, FieldElement, NumberField};
use crate::ideals::{
    multiply_out, split_prime, valuations_above, Ideal, PrimeIdeal,
};
use crate::linalg::IntMatrix;
use crate::params::ParameterSet;
use crate::{Error, Result};

// ===================================================================
// Factor base
// ===================================================================

/// All non-inert primes of norm at most `bound`, sorted by
/// (norm, p, factor coefficients), with a reverse index.
pub struct FactorBase {
    pub field: Arc<NumberField>,
    pub bound: u64,
    pub primes: Vec<PrimeIdeal>,
    index: HashMap<(u64, Vec<u64>), usize>,
    /// The rational primes below the base, deduplicated and sorted.
    rational: Vec<u64>,
}

impl FactorBase {
    pub fn len(&self) -> usize {
        self.primes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.primes.is_empty()
    }

    pub fn position(&self, prime: &PrimeIdeal) -> Option<usize> {
        self.index.get(&(prime.p, prime.g.coeffs.clone())).copied()
    }

    pub fn rational_primes(&self) -> &[u64] {
        &self.rational
    }
}

/// Splits every rational prime up to `bound` and keeps the non-inert
/// prime ideals of norm `p^f <= bound`.
pub fn build_factor_base(field: &Arc<NumberField>, bound: u64) -> Result<FactorBase> {
    assert!(bound >= 2, "factor-base bound below 2");
    let mut primes = Vec::new();
    for p in primes_up_to(bound) {
        for q in split_prime(field, p)? {
            if q.inert {
                continue;
            }
            if BigInt::from(bound) >= q.norm() {
                primes.push(q);
            }
        }
    }
    primes.sort_by_key(|q| q.sort_key());
    let index = primes
        .iter()
        .enumerate()
        .map(|(i, q)| ((q.p, q.g.coeffs.clone()), i))
        .collect();
    let mut rational: Vec<u64> = primes.iter().map(|q| q.p).collect();
    rational.dedup();
    Ok(FactorBase {
        field: field.clone(),
        bound,
        primes,
        index,
        rational,
    })
}

// ===================================================================
// Smoothness
// ===================================================================

/// Factor-base exponent vector of `(phi)`, or `NotSmooth`.
///
/// The norm must factor completely over the base's rational primes, and
/// every prime with positive valuation must itself be a base member — a
/// valuation landing on an excluded sibling (e.g. a degree-2 prime above
/// a split `p` whose norm exceeds the bound) rejects the candidate.
pub fn test_smooth(phi: &FieldElement, fb: &FactorBase) -> Result<Vec<i64>> {
    if phi.is_zero() {
        return Err(Error::ZeroElement);
    }
    let mut rest = phi.norm()?.abs();
    let mut divisors = Vec::new();
    for &p in fb.rational_primes() {
        let pb = BigInt::from(p);
        let mut hit = false;
        loop {
            let (q, r) = num_integer::Integer::div_rem(&rest, &pb);
            if !r.is_zero() {
                break;
            }
            rest = q;
            hit = true;
        }
        if hit {
            divisors.push(p);
        }
    }
    if !rest.is_one() {
        return Err(Error::NoSmoothFound);
    }
    let mut exponents = vec![0i64; fb.len()];
    for p in divisors {
        for (q, v) in valuations_above(phi, p)? {
            if v == 0 {
                continue;
            }
            match fb.position(&q) {
                Some(i) => exponents[i] = v,
                None => return Err(Error::NoSmoothFound),
            }
        }
    }
    Ok(exponents)
}

// ===================================================================
// Relations
// ===================================================================

/// One verified relation `(phi) = prod P_i^(e_i)`.
#[derive(Clone, Debug)]
pub struct Relation {
    pub phi: FieldElement,
    pub exponents: Vec<i64>,
    /// First `r` values of `ln |sigma_i(phi)|`.
    pub logs: Vec<f64>,
}

/// The assembled system `[M_Z | M_R]` with its generators.
pub struct RelationMatrix {
    pub field: Arc<NumberField>,
    pub fb_size: usize,
    pub mz: IntMatrix,
    pub mr: Vec<Vec<f64>>,
    pub generators: Vec<FieldElement>,
}

impl RelationMatrix {
    pub fn rows(&self) -> usize {
        self.mz.rows
    }

    pub fn from_relations(
        field: Arc<NumberField>,
        fb_size: usize,
        relations: &[Relation],
    ) -> RelationMatrix {
        let rows = relations
            .iter()
            .map(|r| r.exponents.iter().map(|&e| BigInt::from(e)).collect())
            .collect();
        RelationMatrix {
            field,
            fb_size,
            mz: IntMatrix::from_rows(rows),
            mr: relations.iter().map(|r| r.logs.clone()).collect(),
            generators: relations.iter().map(|r| r.phi.clone()).collect(),
        }
    }
}

/// Seeded enumeration order over `[0, size)`: an explicitly shuffled
/// table when the space is small, otherwise a four-round keyed Feistel
/// network over the next even power of two, cycle-walked back into range.
pub struct IndexOrder {
    size: u64,
    kind: OrderKind,
}

enum OrderKind {
    Table(Vec<u32>),
    Feistel { half_bits: u32, keys: [u64; 4] },
}

const TABLE_LIMIT: u64 = 1 << 21;

impl IndexOrder {
    pub fn new(size: u64, seed: u64) -> IndexOrder {
        assert!(size > 0);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_0f_ca5cade);
        if size <= TABLE_LIMIT {
            let mut table: Vec<u32> = (0..size as u32).collect();
            table.shuffle(&mut rng);
            IndexOrder {
                size,
                kind: OrderKind::Table(table),
            }
        } else {
            let bits = 64 - (size - 1).leading_zeros();
            let half_bits = bits.div_ceil(2);
            IndexOrder {
                size,
                kind: OrderKind::Feistel {
                    half_bits,
                    keys: [rng.gen(), rng.gen(), rng.gen(), rng.gen()],
                },
            }
        }
    }

    pub fn size(&self) -> u64 {
        self.size
    }

    /// The `i`-th candidate index in the seeded order.
    pub fn at(&self, i: u64) -> u64 {
        debug_assert!(i < self.size);
        match &self.kind {
            OrderKind::Table(t) => t[i as usize] as u64,
            OrderKind::Feistel { half_bits, keys } => {
                let mut x = self.feistel(i, *half_bits, keys);
                while x >= self.size {
                    x = self.feistel(x, *half_bits, keys);
                }
                x
            }
        }
    }

    fn feistel(&self, x: u64, half_bits: u32, keys: &[u64; 4]) -> u64 {
        let mask = (1u64 << half_bits) - 1;
        let mut l = x >> half_bits;
        let mut r = x & mask;
        for k in keys {
            let f = (r ^ k)
                .wrapping_mul(0x9e37_79b9_7f4a_7c15)
                .rotate_left(31)
                .wrapping_mul(0xbf58_476d_1ce4_e5b9)
                & mask;
            let next = l ^ f;
            l = r;
            r = next;
        }
        (l << half_bits) | r
    }
}

/// Decodes a candidate index into sieve coefficients
/// `(c_0, ..., c_k)`, each in `[-2^a, 2^a]`, mixed-radix little-endian.
fn decode_candidate(mut idx: u64, k: u32, height: i64) -> Vec<i64> {
    let radix = (2 * height + 1) as u64;
    let mut coeffs = Vec::with_capacity(k as usize + 1);
    for _ in 0..=k {
        coeffs.push((idx % radix) as i64 - height);
        idx /= radix;
    }
    coeffs
}

/// Size of the candidate space `(2^(a+1) + 1)^(k+1)`, saturating.
pub fn search_space_size(a: u32, k: u32) -> u64 {
    let radix = 2u64.saturating_mul(1 << a).saturating_add(1);
    let mut acc = 1u64;
    for _ in 0..=k {
        acc = acc.saturating_mul(radix);
    }
    acc
}

/// Collects `count` distinct verified relations by seeded enumeration of
/// the sieve box. Deterministic for a fixed seed regardless of worker
/// count. `SearchSpaceExhausted` reports how much of the space was tried
/// when the box cannot supply `count` distinct smooth elements.
pub fn sieve_relations(
    fb: &FactorBase,
    params: &ParameterSet,
    count: usize,
    seed: u64,
    precision_bits: u32,
) -> Result<Vec<Relation>> {
    assert!(!fb.is_empty(), "factor base is empty");
    let field = &fb.field;
    let height = 1i64 << params.a;
    let space = search_space_size(params.a, params.k);
    let order = IndexOrder::new(space, seed);
    let r = field.unit_rank;

    let mut accepted: Vec<Relation> = Vec::with_capacity(count);
    let mut seen: HashSet<Vec<BigInt>> = HashSet::new();
    let mut cursor = 0u64;
    const BATCH: u64 = 2048;
    while cursor < space && accepted.len() < count {
        let hi = (cursor + BATCH).min(space);
        let mut batch: Vec<(u64, Relation)> = (cursor..hi)
            .into_par_iter()
            .filter_map(|i| {
                let coeffs = decode_candidate(order.at(i), params.k, height);
                if coeffs.iter().all(|&c| c == 0) {
                    return None;
                }
                let phi = FieldElement::new(field.clone(), Poly::from_i64s(&coeffs))
                    .canonical_sign();
                let exponents = match test_smooth(&phi, fb) {
                    Ok(e) => e,
                    Err(_) => return None,
                };
                let logs = match phi.log_embeddings(precision_bits) {
                    Ok(v) => v[..r].to_vec(),
                    Err(_) => return None,
                };
                Some((i, Relation { phi, exponents, logs }))
            })
            .collect();
        batch.sort_by_key(|(i, _)| *i);
        for (_, rel) in batch {
            if accepted.len() >= count {
                break;
            }
            let key = rel.phi.rep.coeffs.clone();
            if !seen.insert(key) {
                continue;
            }
            verify_relation(fb, &rel)?;
            accepted.push(rel);
        }
        cursor = hi;
    }
    if accepted.len() < count {
        return Err(Error::SearchSpaceExhausted {
            tested: cursor,
            found: accepted.len(),
        });
    }
    Ok(accepted)
}

/// Exact check that a relation row means what it says:
/// `prod P_i^(e_i)` re-multiplied equals the HNF of `(phi)`.
pub fn verify_relation(fb: &FactorBase, rel: &Relation) -> Result<()> {
    let factors: Vec<(PrimeIdeal, i64)> = rel
        .exponents
        .iter()
        .enumerate()
        .filter(|(_, &e)| e != 0)
        .map(|(i, &e)| (fb.primes[i].clone(), e))
        .collect();
    let rebuilt = multiply_out(&fb.field, &factors)?;
    let principal = Ideal::from_element(&rel.phi)?;
    if rebuilt != principal {
        return Err(Error::DomainError(format!(
            "relation fails to re-multiply for {:?}",
            rel.phi.rep
        )));
    }
    Ok(())
}

/// Row-HNF summary of the integer block: the rank, and when the matrix
/// has full column rank, the determinant of the reduced square part —
/// the class number, provided the rows generate the full relation
/// lattice.
pub struct MatrixCheck {
    pub rank: usize,
    pub hnf_det: BigInt,
}

pub fn assemble_and_check(mat: &RelationMatrix) -> Result<MatrixCheck> {
    let n = mat.fb_size;
    let basis = mat.mz.hnf_basis();
    if basis.rows < n {
        return Err(Error::RankDeficient {
            rank: basis.rows,
            cols: n,
        });
    }
    let mut det = BigInt::one();
    for i in 0..n {
        det *= &basis[(i, i)];
    }
    Ok(MatrixCheck {
        rank: basis.rows,
        hnf_det: det.abs(),
    })
}

/// Sieves until the integer block reaches full column rank: starts at
/// the usual `N + K r` target and widens by `max(K r, K)` rows per
/// retry (the enumeration order is a fixed function of the seed, so each
/// retry extends the previous prefix deterministically). Gives up after
/// `retries` widenings with the last `RankDeficient`.
pub fn build_relation_matrix_full_rank(
    fb: &FactorBase,
    params: &ParameterSet,
    seed: u64,
    precision_bits: u32,
    retries: u32,
) -> Result<(RelationMatrix, MatrixCheck)> {
    let r = fb.field.unit_rank;
    let step = (params.k_extra as usize * r).max(params.k_extra as usize);
    let mut count = params.relation_target(fb.len(), r);
    let mut widen = step;
    for _ in 0..=retries {
        let rels = sieve_relations(fb, params, count, seed, precision_bits)?;
        let mat = RelationMatrix::from_relations(fb.field.clone(), fb.len(), &rels);
        match assemble_and_check(&mat) {
            Ok(check) => return Ok((mat, check)),
            Err(Error::RankDeficient { .. }) => {
                count += widen;
                widen *= 2;
            }
            Err(e) => return Err(e),
        }
    }
    let rels = sieve_relations(fb, params, count, seed, precision_bits)?;
    let mat = RelationMatrix::from_relations(fb.field.clone(), fb.len(), &rels);
    let check = assemble_and_check(&mat)?;
    Ok((mat, check))
}

/// Largest admissible value of `|e_i| log2 norm(P_i)` for a sieve
/// relation: `n (a + k log2(|T|_2 + t_n) + log2(k+1))`, the exact chain
/// through `|N(phi)| <= ((k+1) 2^a (|T|_2 + t_n)^k)^n`.
pub fn entry_log_bound(field: &NumberField, params: &ParameterSet) -> f64 {
    let t_norm = bigint_to_f64(&field.poly.norm2_sq()).sqrt()
        + bigint_to_f64(&field.poly.lc().abs());
    field.degree as f64
        * (params.a as f64
            + params.k as f64 * t_norm.log2()
            + ((params.k + 1) as f64).log2())
}

/// `|e_i| log2 norm(P_i)` of one matrix entry, for bound checks.
pub fn entry_log_size(fb: &FactorBase, col: usize, e: i64) -> f64 {
    e.unsigned_abs() as f64 * bigint_log2(&fb.primes[col].norm())
}
