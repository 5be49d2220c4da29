//! Rewriting an ideal over the factor base by recursive norm reduction.
//!
//! [`decompose`] expresses a (fractional power product of a) given integral
//! ideal as `prod_P P^(e_P) * prod_j (phi_j)^(w_j)`: a signed exponent
//! vector over the factor base together with a trace of principal
//! generators discovered along the way.  Ideals too large to factor
//! directly are shrunk level by level: [`smooth_step`] searches a reduced
//! lattice of elements inside the ideal for one whose principal ideal
//! splits off the node and leaves only smaller prime cofactors, and the
//! cofactors are re-queued until everything lands in the base (or is a
//! rational integer times the ring, which contributes a generator
//! directly).
//!
//! Norm bounds shrink per level on a fixed schedule; the per-node search
//! budget follows an effort ladder that doubles on failure.  The whole
//! walk is deterministic in `(seed, node)`.

use std::collections::{BTreeMap, VecDeque};
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::arith::{factor_integer, Poly};
use crate::field::{FieldElement, NumberField};
use crate::ideals::{factor_element, factor_ideal, Ideal, PrimeIdeal};
use crate::linalg::{enumerate_sup_box, lll};
use crate::params::{descent_schedule, DescentSchedule, ParameterSet};
use crate::relations::FactorBase;
use crate::{Error, Result};

// ===================================================================
// Small-tuple enumeration
// ===================================================================

/// A tuple of combination coefficients together with the value of the
/// combination itself.
pub type Tuple = (Vec<BigInt>, BigInt);

#[derive(Clone, Copy, PartialEq, Eq)]
enum TupleMode {
    Auto,
    /// Forced paths exist so tests can pit the two strategies against
    /// each other on the same inputs.
    #[cfg_attr(not(test), allow(dead_code))]
    Exhaustive,
    #[cfg_attr(not(test), allow(dead_code))]
    Lattice,
}

/// All nonzero integer tuples `(a_1, ..., a_(k+1))` with
/// `|a_i| <= 2^(d/k + z)` whose combination `sum a_i v_i` also satisfies
/// `|sum a_i v_i| <= 2^(d/k + z)`, sorted by sup norm then
/// lexicographically.
///
/// Requires `|v_i| <= 2^d` for every entry.  A standard counting argument
/// guarantees at least `2^(k z)` such tuples exist for `z >= 1`; the
/// enumeration is complete within the bound, so callers get all of them.
/// Returns `BoundsUnsatisfiable` when `d/k + z < 0` (the box is empty).
pub fn small_tuples(v: &[BigInt], d: u32, k: usize, z: i32) -> Result<Vec<Tuple>> {
    small_tuples_via(v, d, k, z, TupleMode::Auto)
}

fn small_tuples_via(
    v: &[BigInt],
    d: u32,
    k: usize,
    z: i32,
    mode: TupleMode,
) -> Result<Vec<Tuple>> {
    if k == 0 || v.len() != k + 1 {
        return Err(Error::DomainError(format!(
            "need k >= 1 and k+1 = {} values, got {}",
            k + 1,
            v.len()
        )));
    }
    let height = BigInt::one() << d;
    if v.iter().any(|vi| vi.abs() > height) {
        return Err(Error::DomainError(format!("values exceed 2^{d}")));
    }
    let hexp = d as f64 / k as f64 + z as f64;
    if hexp < 0.0 {
        return Err(Error::BoundsUnsatisfiable);
    }
    if hexp > 62.0 {
        return Err(Error::DomainError(format!(
            "tuple bound 2^{hexp:.1} too large to enumerate"
        )));
    }
    let bound = BigInt::from(2f64.powf(hexp).floor() as i64);
    debug_assert!(bound >= BigInt::one());

    // Exhaustive coordinate walk when the prefix box is small (and fits
    // machine words); otherwise reduce the tuple lattice and enumerate.
    let prefix = (2.0 * 2f64.powf(hexp) + 1.0).powi(k as i32);
    let exhaustive_ok = prefix <= 4e6 && d < 60 && hexp < 60.0;
    let mut out = match mode {
        TupleMode::Exhaustive => exhaustive_tuples(v, &bound, k)?,
        TupleMode::Lattice => lattice_tuples(v, &bound, k),
        TupleMode::Auto => {
            if exhaustive_ok {
                exhaustive_tuples(v, &bound, k)?
            } else {
                lattice_tuples(v, &bound, k)
            }
        }
    };
    out.sort_by(|a, b| tuple_sup(a).cmp(&tuple_sup(b)).then(a.cmp(b)));
    out.dedup();
    Ok(out)
}

fn tuple_sup(t: &Tuple) -> BigInt {
    let mut m = t.1.abs();
    for a in &t.0 {
        m = m.max(a.abs());
    }
    m
}

/// Walks the prefix `(a_1, ..., a_k)` in machine integers and solves the
/// interval of final coordinates allowed by the combination bound.
fn exhaustive_tuples(v: &[BigInt], bound: &BigInt, k: usize) -> Result<Vec<Tuple>> {
    let h = bound
        .to_i128()
        .ok_or_else(|| Error::DomainError("tuple bound exceeds i128".into()))?;
    let vals: Vec<i128> = v
        .iter()
        .map(|vi| {
            vi.to_i128()
                .ok_or_else(|| Error::DomainError("tuple value exceeds i128".into()))
        })
        .collect::<Result<_>>()?;
    let last = vals[k];
    let mut out = Vec::new();
    let mut prefix = vec![-h; k];
    loop {
        let s: i128 = prefix.iter().zip(&vals).map(|(a, b)| a * b).sum();
        if last != 0 {
            // |s + a*last| <= h  <=>  a in [(-h-s)/last, (h-s)/last]
            let (lo, hi) = interval_div(-h - s, h - s, last);
            for a in lo.max(-h)..=hi.min(h) {
                push_tuple(&mut out, &prefix, a, s + a * last);
            }
        } else if s.abs() <= h {
            for a in -h..=h {
                push_tuple(&mut out, &prefix, a, s);
            }
        }
        // odometer step
        let mut i = 0;
        loop {
            if i == k {
                return Ok(out);
            }
            prefix[i] += 1;
            if prefix[i] <= h {
                break;
            }
            prefix[i] = -h;
            i += 1;
        }
    }
}

/// Integer solutions `a` of `lo <= a*den <= hi` (den nonzero), as a
/// closed interval.
fn interval_div(lo: i128, hi: i128, den: i128) -> (i128, i128) {
    let (lo, hi, den) = if den < 0 { (-hi, -lo, -den) } else { (lo, hi, den) };
    (lo.div_euclid(den) + i128::from(lo.rem_euclid(den) != 0), hi.div_euclid(den))
}

fn push_tuple(out: &mut Vec<Tuple>, prefix: &[i128], a: i128, comb: i128) {
    if a == 0 && prefix.iter().all(|c| *c == 0) {
        return;
    }
    let mut alphas: Vec<BigInt> = prefix.iter().map(|c| BigInt::from(*c)).collect();
    alphas.push(BigInt::from(a));
    out.push((alphas, BigInt::from(comb)));
}

/// Reduces the rows of `[I | v]` and enumerates the sup-norm box; the
/// lattice points are exactly the `(a_1, ..., a_(k+1), sum a_i v_i)`
/// vectors, so the tuple can be read off the point.
fn lattice_tuples(v: &[BigInt], bound: &BigInt, k: usize) -> Vec<Tuple> {
    let mut rows = Vec::with_capacity(k + 1);
    for (i, vi) in v.iter().enumerate() {
        let mut row = vec![BigInt::zero(); k + 2];
        row[i] = BigInt::one();
        row[k + 1] = vi.clone();
        rows.push(row);
    }
    let reduced = lll(&rows);
    let mut out = Vec::new();
    for pt in enumerate_sup_box(&reduced, bound) {
        if pt[..=k].iter().all(|c| c.is_zero()) {
            continue;
        }
        out.push((pt[..=k].to_vec(), pt[k + 1].clone()));
    }
    out
}

// ===================================================================
// One reduction step
// ===================================================================

/// Search lattice for elements of a prime ideal: the tuple lattice of
/// `(p, theta - v)` for degree-one primes, the reduced module basis
/// otherwise.
fn step_candidates(
    prime: &PrimeIdeal,
    field: &Arc<NumberField>,
    k: usize,
    effort: u64,
) -> Result<Vec<FieldElement>> {
    let n = field.degree;
    if prime.f == 1 {
        let p = BigInt::from(prime.p);
        let half = &p >> 1;
        let mut vals = Vec::with_capacity(k + 1);
        let mut pw = BigInt::one();
        let root = BigInt::from(prime.root());
        for _ in 0..k {
            pw = &pw * &root % &p;
            // symmetric residue keeps the tuple values at p/2 or below
            let sym = if pw > half { &pw - &p } else { pw.clone() };
            vals.push(-sym);
        }
        vals.push(p.clone());
        let d = p.bits() as u32;
        let z_cap = ((effort as f64).log2() / k as f64).ceil().max(1.0) as i32;
        // grow z until the box should hold ~4x the effort (the tuple
        // bound is still honoured), estimating points as (2H+1)^(k+2) / p
        let mut z = 0i32;
        while z < z_cap {
            let hexp = d as f64 / k as f64 + z as f64;
            let side = 2.0 * 2f64.powf(hexp) + 1.0;
            let est = side.powi(k as i32 + 1) * (side / prime.p as f64).min(1.0);
            if est >= 4.0 * effort as f64 || est > 2e6 {
                break;
            }
            z += 1;
        }
        let mut tuples = small_tuples(&vals, d, k, z)?;
        while (tuples.len() as u64) < effort && z < z_cap {
            z += 1;
            tuples = small_tuples(&vals, d, k, z)?;
        }
        Ok(tuples
            .into_iter()
            .map(|(alphas, comb)| {
                let mut coeffs = vec![comb];
                coeffs.extend(alphas[..k].iter().cloned());
                FieldElement::new(field.clone(), Poly::new(coeffs))
            })
            .filter(|phi| !phi.is_zero())
            .collect())
    } else {
        // general module path: short vectors of the ideal lattice itself
        let ideal = prime.to_ideal(field);
        let rows: Vec<Vec<BigInt>> = ideal.hnf.rows_iter().map(|r| r.to_vec()).collect();
        let reduced = lll(&rows);
        let norm_f = ideal.norm().to_f64().unwrap_or(f64::MAX);
        let mut side = (4.0 * effort as f64 * norm_f).powf(1.0 / n as f64) / 2.0;
        for _ in 0..3 {
            let bound = BigInt::from(side.ceil().max(1.0) as i64);
            let pts = enumerate_sup_box(&reduced, &bound);
            if pts.len() as u64 > effort || side > 1e9 {
                let mut out: Vec<FieldElement> = pts
                    .into_iter()
                    .filter(|pt| pt.iter().any(|c| !c.is_zero()))
                    .map(|pt| FieldElement::new(field.clone(), Poly::new(pt)))
                    .collect();
                out.sort_by_key(|phi| {
                    (phi.rep.coeffs.iter().map(|c| c.abs()).max(), phi.rep.coeffs.clone())
                });
                return Ok(out);
            }
            side *= 2.0;
        }
        Err(Error::NoSmoothFound)
    }
}

fn mix64(mut x: u64) -> u64 {
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

fn element_tiebreak(phi: &FieldElement, seed: u64) -> u64 {
    let mut acc = mix64(seed ^ 0x6465_7363_656e_74);
    for c in &phi.rep.coeffs {
        for b in c.to_signed_bytes_le() {
            acc = mix64(acc ^ b as u64);
        }
    }
    acc
}

/// True when every prime factor of `m` is at most `bound`.
fn smooth_over(m: &BigInt, bound: u64) -> bool {
    if m.is_zero() {
        return false;
    }
    match factor_integer(m, bound.min(4096)) {
        Ok(fs) => fs.iter().all(|(p, _)| *p <= BigInt::from(bound)),
        Err(_) => false,
    }
}

/// Finds `phi` in the prime ideal with `v_P(phi) = 1` whose cofactor
/// `(phi) / P` factors entirely into primes of norm at most `target`.
///
/// Tests at most `effort` candidates, smallest first (ties broken by a
/// seeded hash so retries explore different elements).  Returns the
/// element and the cofactor factorization, or `NoSmoothFound`.
pub fn smooth_step(
    prime: &PrimeIdeal,
    field: &Arc<NumberField>,
    k: usize,
    target: &BigInt,
    effort: u64,
    seed: u64,
    factor_limit: u64,
) -> Result<(FieldElement, Vec<(PrimeIdeal, i64)>)> {
    if prime.inert {
        return Err(Error::DomainError(
            "inert ideals are principal; no reduction step needed".into(),
        ));
    }
    let pn = prime.norm();
    let target_u = target.to_u64().unwrap_or(u64::MAX);
    let mut candidates = step_candidates(prime, field, k, effort)?;
    candidates.truncate(effort as usize);

    // cheap norm screen in parallel (order-preserving), then exact checks
    let screened: Vec<(usize, BigInt)> = candidates
        .par_iter()
        .enumerate()
        .filter_map(|(i, phi)| {
            let nrm = phi.norm().ok()?.abs();
            let (q, r) = num_integer::Integer::div_rem(&nrm, &pn);
            if !r.is_zero() || !smooth_over(&q, target_u) {
                return None;
            }
            Some((i, nrm))
        })
        .collect();
    let mut order = screened;
    order.sort_by(|a, b| {
        a.1.cmp(&b.1).then_with(|| {
            element_tiebreak(&candidates[a.0], seed)
                .cmp(&element_tiebreak(&candidates[b.0], seed))
        })
    });

    let key = prime.sort_key();
    for (i, _) in order {
        let phi = &candidates[i];
        let factors = match factor_element(phi, factor_limit) {
            Ok(f) => f,
            Err(_) => continue,
        };
        let mut cofactor = Vec::with_capacity(factors.len());
        let mut v_here = 0i64;
        let mut ok = true;
        for (q, vq) in factors {
            if q.sort_key() == key {
                v_here = vq;
            } else if q.norm() <= *target {
                cofactor.push((q, vq));
            } else {
                ok = false;
                break;
            }
        }
        if !ok || v_here != 1 {
            continue;
        }
        if !prime.to_ideal(field).contains(phi) {
            return Err(Error::NotContained);
        }
        return Ok((phi.clone(), cofactor));
    }
    Err(Error::NoSmoothFound)
}

// ===================================================================
// Full decomposition
// ===================================================================

/// Knobs for [`decompose`]; the defaults suit fields of desk size.
#[derive(Clone, Debug)]
pub struct DescentConfig {
    /// Input norms above `max(|disc|, floor)` are rejected.
    pub norm_cap_floor: BigInt,
    /// First rung of the per-node effort ladder.
    pub base_effort: u64,
    /// Ladder length: effort doubles this many times before giving up.
    pub retries: u32,
    /// Extra levels past `ceil(log2 log2 |disc|)` before a node is
    /// declared stuck.
    pub depth_slack: usize,
    /// Trial-division bound handed to the integer factorizer.
    pub factor_limit: u64,
}

impl Default for DescentConfig {
    fn default() -> Self {
        DescentConfig {
            norm_cap_floor: BigInt::one() << 30,
            base_effort: 256,
            retries: 6,
            depth_slack: 3,
            factor_limit: 100_000,
        }
    }
}

/// Outcome of [`decompose`]: `I = prod_P P^(exponents_P) * prod_j
/// (phi_j)^(w_j)` with every `P` in the factor base.
#[derive(Clone, Debug)]
pub struct DecompositionResult {
    /// Signed exponents, indexed like the factor base.
    pub exponents: Vec<i64>,
    /// Principal generators `(phi_j, w_j)` split off during the walk.
    pub generator_trace: Vec<(FieldElement, i64)>,
    /// Deepest level reached (0 when the input factored directly).
    pub depth: usize,
    /// Largest cofactor exponent seen at any node.
    pub max_exponent: i64,
    /// Every node visited, as `(norm, level)` in processing order.
    pub visited: Vec<(BigInt, usize)>,
}

/// Norm bound a node at `level >= 1` must satisfy, floored at the
/// factor-base bound.  (Level 0 is the input, capped separately.)
pub fn level_bound(params: &ParameterSet, schedule: &DescentSchedule, level: usize, floor: u64) -> BigInt {
    let tau = schedule.taus[level];
    let c = schedule.cs[level];
    let exp = c * params.log2_disc.powf(1.0 / 3.0 + tau) * params.m.powf(2.0 / 3.0 - tau);
    let formula = if exp >= 62.0 {
        BigInt::one() << 62
    } else {
        BigInt::from(2f64.powf(exp).floor() as i64)
    };
    formula.max(BigInt::from(floor))
}

/// Lattice degree used for the reduction step leaving `level`.
fn step_degree(params: &ParameterSet, schedule: &DescentSchedule, level: usize, n: usize) -> usize {
    let sigma = schedule.sigmas.get(level + 1).copied().unwrap_or(schedule.sigma);
    let tau = schedule.taus[level];
    let base = (params.log2_disc / params.m).powf(1.0 / 3.0 - tau / 2.0);
    let k = (sigma * n as f64 / base).floor() as i64;
    (k.max(1) as usize).min(n.saturating_sub(1)).max(1)
}

/// Rewrites `input` over the factor base, descending through smaller and
/// smaller primes.  See the module docs for the exact output identity.
pub fn decompose(
    input: &Ideal,
    fb: &FactorBase,
    params: &ParameterSet,
    seed: u64,
    config: &DescentConfig,
) -> Result<DecompositionResult> {
    let field = &input.field;
    if fb.field.poly != field.poly {
        return Err(Error::FieldMismatch);
    }
    let cap = field.disc.abs().max(config.norm_cap_floor.clone());
    let norm = input.norm();
    if norm > cap {
        return Err(Error::NormTooLarge { norm, cap });
    }
    let depth_cap = params.log2_disc.log2().ceil() as usize + config.depth_slack;
    let schedule = descent_schedule(params.kappa, depth_cap + 1);

    let mut exponents = vec![0i64; fb.len()];
    let mut trace: Vec<(FieldElement, i64)> = Vec::new();
    let mut visited: Vec<(BigInt, usize)> = Vec::new();
    let mut depth = 0usize;
    let mut max_exponent = 0i64;

    let mut queue: VecDeque<(PrimeIdeal, i64, usize)> = VecDeque::new();
    for (q, e) in factor_ideal(input, config.factor_limit)? {
        max_exponent = max_exponent.max(e.abs());
        queue.push_back((q, e, 0));
    }

    while let Some((p_ideal, w, level)) = queue.pop_front() {
        if w == 0 {
            continue;
        }
        visited.push((p_ideal.norm(), level));
        depth = depth.max(level);
        if let Some(pos) = fb.position(&p_ideal) {
            exponents[pos] += w;
            continue;
        }
        if p_ideal.inert {
            // an inert prime is the ring scaled by p: record the rational
            // generator and stop
            let gen = FieldElement::from_integer(field.clone(), BigInt::from(p_ideal.p));
            trace.push((gen, w));
            continue;
        }
        if level >= depth_cap {
            return Err(Error::DescentStuck { norm: p_ideal.norm(), level });
        }
        let k = step_degree(params, &schedule, level, field.degree);
        let target = level_bound(params, &schedule, level + 1, fb.bound)
            .min(p_ideal.norm() - 1u32);
        let mut step = None;
        for attempt in 0..=config.retries {
            let effort = config.base_effort << attempt;
            let node_seed = mix64(
                seed ^ mix64(p_ideal.p)
                    ^ mix64(p_ideal.g.coeffs.iter().fold(level as u64, |a, c| mix64(a ^ c)))
                    ^ mix64(attempt as u64) << 1,
            );
            match smooth_step(&p_ideal, field, k, &target, effort, node_seed, config.factor_limit) {
                Ok(found) => {
                    step = Some(found);
                    break;
                }
                Err(Error::NoSmoothFound) => continue,
                Err(e) => return Err(e),
            }
        }
        let Some((phi, cofactor)) = step else {
            return Err(Error::DescentStuck { norm: p_ideal.norm(), level });
        };
        trace.push((phi, w));
        for (q, gamma) in cofactor {
            max_exponent = max_exponent.max(gamma.abs());
            queue.push_back((q, -w * gamma, level + 1));
        }
    }

    verify_decomposition(input, fb, &exponents, &trace, config.factor_limit)?;
    Ok(DecompositionResult {
        exponents,
        generator_trace: trace,
        depth,
        max_exponent,
        visited,
    })
}

/// Checks `v_Q(input) = exponents[Q] + sum_j w_j v_Q(phi_j)` for every
/// prime `Q` appearing anywhere (so non-base primes must cancel).
fn verify_decomposition(
    input: &Ideal,
    fb: &FactorBase,
    exponents: &[i64],
    trace: &[(FieldElement, i64)],
    factor_limit: u64,
) -> Result<()> {
    type Key = (BigInt, u64, Vec<u64>);
    let mut acc: BTreeMap<Key, i64> = BTreeMap::new();
    for (i, e) in exponents.iter().enumerate() {
        if *e != 0 {
            *acc.entry(fb.primes[i].sort_key()).or_insert(0) += e;
        }
    }
    for (phi, w) in trace {
        for (q, v) in factor_element(phi, factor_limit)? {
            *acc.entry(q.sort_key()).or_insert(0) += w * v;
        }
    }
    let mut want: BTreeMap<Key, i64> = BTreeMap::new();
    for (q, v) in factor_ideal(input, factor_limit)? {
        want.insert(q.sort_key(), v);
    }
    acc.retain(|_, v| *v != 0);
    if acc != want {
        return Err(Error::DomainError(
            "decomposition fails the valuation identity".into(),
        ));
    }
    Ok(())
}
