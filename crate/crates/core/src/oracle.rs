//! Brute-force class-group ground truth for tests.
//!
//! Two independent oracles cross-check the main pipeline at desk scale:
//! [`bqf_class_group`] computes the form class group of a negative
//! discriminant by exhaustive reduced-form enumeration and Gauss
//! composition, and [`enumerate_class_group`] grinds out the class group
//! of a tiny number field from first principles — every prime ideal
//! below the Minkowski bound, every principal relation from elements of
//! bounded height, Smith normal form of the result.  Neither touches the
//! sieve or the descent machinery.

use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::arith::{factor_integer, Poly};
use crate::field::{FieldElement, NumberField};
use crate::ideals::{split_prime, valuations_above, PrimeIdeal};
use crate::linalg::IntMatrix;
use crate::{Error, Result};

// ===================================================================
// Binary quadratic forms
// ===================================================================

/// A positive-definite integral binary quadratic form `a x^2 + b xy +
/// c y^2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QuadForm {
    pub a: i128,
    pub b: i128,
    pub c: i128,
}

impl QuadForm {
    pub fn disc(&self) -> i128 {
        self.b * self.b - 4 * self.a * self.c
    }

    pub fn is_reduced(&self) -> bool {
        let QuadForm { a, b, c } = *self;
        b.abs() <= a && a <= c && (b >= 0 || (b.abs() < a && a < c))
    }

    /// Value `a x^2 + b xy + c y^2`.
    fn eval(&self, x: i128, y: i128) -> i128 {
        self.a * x * x + self.b * x * y + self.c * y * y
    }
}

fn gcd_i128(mut a: i128, mut b: i128) -> i128 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Extended gcd: returns `(g, s, t)` with `s a + t b = g >= 0`.
fn xgcd_i128(a: i128, b: i128) -> (i128, i128, i128) {
    let (mut r0, mut r1) = (a, b);
    let (mut s0, mut s1) = (1i128, 0i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 < 0 {
        (-r0, -s0, -t0)
    } else {
        (r0, s0, t0)
    }
}

/// Translates to `b` in `(-a, a]` and recomputes `c` from the
/// discriminant.
fn normalize(f: QuadForm) -> QuadForm {
    let d = f.disc();
    let two_a = 2 * f.a;
    let mut b = f.b.rem_euclid(two_a);
    if b > f.a {
        b -= two_a;
    }
    QuadForm { a: f.a, b, c: (b * b - d) / (4 * f.a) }
}

/// Gauss reduction of a positive-definite form.
pub fn reduce(mut f: QuadForm) -> QuadForm {
    debug_assert!(f.a > 0 && f.disc() < 0);
    f = normalize(f);
    while f.a > f.c {
        f = normalize(QuadForm { a: f.c, b: -f.b, c: f.a });
    }
    if f.b < 0 && (f.b.abs() == f.a || f.a == f.c) {
        f.b = -f.b;
    }
    f
}

/// The principal (identity) form of discriminant `d`.
pub fn principal_form(d: i128) -> QuadForm {
    let b = d.rem_euclid(2);
    QuadForm { a: 1, b, c: (b * b - d) / 4 }
}

/// Replaces `f` by an equivalent form whose leading coefficient is
/// coprime to `m` (primitive forms represent infinitely many such
/// values, and small ones suffice at this scale).
fn coprime_representative(f: QuadForm, m: i128) -> QuadForm {
    for (x, y) in coprime_pairs() {
        let a = f.eval(x, y);
        if a != 0 && gcd_i128(a, m) == 1 {
            // complete (x, y) to a unimodular matrix [[x, -t], [y, s]]
            let (g, s, t) = xgcd_i128(x, y);
            debug_assert_eq!(g, 1);
            let (u, v) = (-t, s);
            let b = 2 * (f.a * x * u + f.c * y * v) + f.b * (x * v + y * u);
            let c = f.eval(u, v);
            let out = QuadForm { a, b, c };
            debug_assert_eq!(out.disc(), f.disc());
            return out;
        }
    }
    unreachable!("no small value coprime to {m} for {f:?}");
}

fn coprime_pairs() -> impl Iterator<Item = (i128, i128)> {
    let mut pairs = vec![(1, 0), (0, 1), (1, 1), (1, -1)];
    for x in 1..=16i128 {
        for y in 1..=16i128 {
            if gcd_i128(x, y) == 1 {
                pairs.push((x, y));
                pairs.push((x, -y));
            }
        }
    }
    pairs.into_iter()
}

/// Gauss composition of two forms of the same discriminant, reduced.
pub fn compose(f1: QuadForm, f2: QuadForm) -> QuadForm {
    let d = f1.disc();
    debug_assert_eq!(d, f2.disc());
    // arrange coprime leading coefficients, then glue by CRT
    let g2 = coprime_representative(f2, f1.a);
    let (a1, a2) = (f1.a, g2.a);
    debug_assert_eq!(gcd_i128(a1, a2), 1);
    let (_, inv, _) = xgcd_i128(a1 % a2, a2);
    let k = ((g2.b - f1.b) / 2).rem_euclid(a2) * inv.rem_euclid(a2) % a2;
    let a3 = a1 * a2;
    let b3 = f1.b + 2 * a1 * k.rem_euclid(a2);
    let c3 = (b3 * b3 - d) / (4 * a3);
    reduce(QuadForm { a: a3, b: b3, c: c3 })
}

/// Inverse class of a reduced form.
pub fn inverse(f: QuadForm) -> QuadForm {
    reduce(QuadForm { a: f.a, b: -f.b, c: f.c })
}

/// Order of `f` in the class group (bounded by `h`).
fn form_order(f: QuadForm, identity: QuadForm, h: u64) -> u64 {
    let mut acc = f;
    let mut n = 1;
    while acc != identity {
        acc = compose(acc, f);
        n += 1;
        assert!(n <= 2 * h, "order computation ran away");
    }
    n
}

/// Invariant factors of a finite abelian group given the multiset of
/// element orders, by Sylow-counting: the number of elements killed by
/// `q^k` determines the partition at each prime `q`.
fn invariants_from_orders(orders: &[u64]) -> Vec<u64> {
    let h = orders.len() as u64;
    if h == 1 {
        return vec![];
    }
    let h_factors = factor_integer(&BigInt::from(h), 100_000).expect("h fits");
    let mut partitions: Vec<(u64, Vec<u32>)> = Vec::new();
    for (q, _) in h_factors {
        let q = q.to_u64().unwrap();
        // m_k with q^(m_k) elements of order dividing q^k
        let mut ms = vec![0u32];
        loop {
            let k = ms.len() as u32;
            let qk = q.pow(k);
            let count = orders.iter().filter(|o| qk % **o == 0).count() as u64;
            let mk = count.ilog(q);
            if mk == *ms.last().unwrap() {
                break;
            }
            ms.push(mk);
        }
        // conjugate partition: lambda_j = #{k : m_k - m_(k-1) >= j}
        let cols: Vec<u32> = ms.windows(2).map(|w| w[1] - w[0]).collect();
        let mut lambda = Vec::new();
        for j in 1..=cols.first().copied().unwrap_or(0) {
            lambda.push(cols.iter().filter(|c| **c >= j).count() as u32);
        }
        partitions.push((q, lambda));
    }
    let width = partitions.iter().map(|(_, l)| l.len()).max().unwrap_or(0);
    let mut invariants = vec![1u64; width];
    for (q, lambda) in partitions {
        for (slot, e) in invariants.iter_mut().zip(lambda) {
            *slot *= q.pow(e);
        }
    }
    invariants.sort_unstable(); // ascending divisibility chain
    invariants
}

/// Class group of discriminant `d < 0` by exhaustive reduced-form
/// enumeration: `(h, invariant factors, reduced forms)`.
pub fn bqf_class_group(d: i128) -> Result<(u64, Vec<u64>, Vec<QuadForm>)> {
    if d >= 0 || d.rem_euclid(4) > 1 {
        return Err(Error::BadDiscriminant(BigInt::from(d)));
    }
    let mut forms = Vec::new();
    let amax = ((-d) as f64 / 3.0).sqrt() as i128 + 1;
    for a in 1..=amax {
        for b in -a + 1..=a {
            if (b * b - d).rem_euclid(4 * a) != 0 {
                continue;
            }
            let c = (b * b - d) / (4 * a);
            let f = QuadForm { a, b, c };
            if f.is_reduced() && gcd_i128(gcd_i128(a, b), c) == 1 {
                forms.push(f);
            }
        }
    }
    forms.sort_unstable();
    let h = forms.len() as u64;
    let identity = principal_form(d);
    debug_assert!(forms.contains(&identity));
    let orders: Vec<u64> = forms.iter().map(|f| form_order(*f, identity, h)).collect();
    Ok((h, invariants_from_orders(&orders), forms))
}

// ===================================================================
// Number-field enumeration
// ===================================================================

/// Exponent vector of `(phi)` over `primes`, or `None` when a valuation
/// escapes the set.  Self-contained on purpose: the main pipeline's
/// smoothness test is one of the things this oracle checks.
fn vector_over(
    phi: &FieldElement,
    primes: &[PrimeIdeal],
    rational: &[u64],
) -> Option<Vec<i64>> {
    let mut norm = phi.norm().ok()?.abs();
    if norm.is_zero() {
        return None;
    }
    let mut used = Vec::new();
    for &p in rational {
        let pb = BigInt::from(p);
        let mut saw = false;
        while (&norm % &pb).is_zero() {
            norm /= &pb;
            saw = true;
        }
        if saw {
            used.push(p);
        }
    }
    if !norm.is_one() {
        return None;
    }
    let mut vec = vec![0i64; primes.len()];
    for p in used {
        for (q, v) in valuations_above(phi, p).ok()? {
            if v == 0 {
                continue;
            }
            let pos = primes
                .iter()
                .position(|s| s.sort_key() == q.sort_key())?;
            vec[pos] = v;
        }
    }
    Some(vec)
}

/// Exact principality test for an ideal of an imaginary quadratic field
/// `Z[sqrt(d)]`: the norm form `x^2 + |d| y^2` is positive definite, so
/// `I = (x + y sqrt(d))` for some element iff one of the finitely many
/// `(x, y)` with `x^2 + |d| y^2 = N(I)` lies in `I`.
fn imag_quadratic_principal(ideal: &crate::ideals::Ideal, d_abs: &BigInt) -> bool {
    let target = ideal.norm();
    let mut y = BigInt::zero();
    loop {
        let rest = &target - d_abs * &y * &y;
        if rest.is_negative() {
            return false;
        }
        let x = rest.sqrt();
        if &x * &x == rest {
            for (sx, sy) in [(1, 1), (1, -1)] {
                let phi = FieldElement::new(
                    ideal.field.clone(),
                    Poly::new(vec![&x * sx, &y * sy]),
                );
                if !phi.is_zero() && ideal.contains(&phi) {
                    return true;
                }
            }
        }
        y += 1;
    }
}

/// Public entry to the definite norm-form scan: decides principality of
/// an ideal of `Z[sqrt(d)]`, `d < 0`, exactly and independently of the
/// sieve/descent pipeline.  Rejects fields of any other shape.
pub fn quadratic_principal_oracle(ideal: &crate::ideals::Ideal) -> Result<bool> {
    let field = &ideal.field;
    let quadratic_shape =
        field.degree == 2 && field.poly.coeff(1).is_zero() && field.disc.is_negative();
    if !quadratic_shape {
        return Err(Error::DomainError(
            "the norm-form scan needs a defining polynomial X^2 - d with d < 0".into(),
        ));
    }
    let d_abs = field.poly.coeff(0).clone();
    Ok(imag_quadratic_principal(ideal, &d_abs))
}

/// Exact order of each prime class in an imaginary quadratic field, as
/// relation rows `ord(P) e_P`.  These saturate the relation lattice that
/// small-element search alone can miss (a prime-power generator may have
/// huge coordinates even when `h` is small).
fn imag_quadratic_order_rows(
    field: &Arc<NumberField>,
    primes: &[PrimeIdeal],
) -> Result<Vec<Vec<BigInt>>> {
    let d_abs = field.poly.coeff(0).clone(); // X^2 - d with d < 0
    debug_assert!(d_abs.is_positive());
    let mut rows = Vec::new();
    for (i, q) in primes.iter().enumerate() {
        let base = q.to_ideal(field);
        let mut power = base.clone();
        let mut m = 1u64;
        while !imag_quadratic_principal(&power, &d_abs) {
            power = crate::ideals::ideal_mul(&power, &base)?;
            m += 1;
            if m > 128 {
                return Err(Error::TooLarge(m));
            }
        }
        let mut row = vec![BigInt::zero(); primes.len()];
        row[i] = BigInt::from(m);
        rows.push(row);
    }
    Ok(rows)
}

/// Conjugate of a quadratic prime: the other ideal above `p` (itself
/// when ramified or unique).
fn conjugate_prime<'a>(q: &'a PrimeIdeal, primes: &'a [PrimeIdeal]) -> &'a PrimeIdeal {
    primes
        .iter()
        .find(|s| s.p == q.p && s.g != q.g)
        .unwrap_or(q)
}

/// Exact saturation of the relation lattice for imaginary quadratics.
///
/// Every missing relation shows up as a nonzero coset of the current
/// lattice, and each coset representative can be tested for principality
/// outright (conjugating the negative part keeps the test integral).
/// Absorbing hits until none remain makes the lattice exact, so the
/// quadratic oracle does not lean on the stop heuristic at all.
fn saturate_quadratic(
    field: &Arc<NumberField>,
    primes: &[PrimeIdeal],
    d_abs: &BigInt,
    mut basis: IntMatrix,
) -> Result<IntMatrix> {
    let s = primes.len();
    'outer: loop {
        let diag: Vec<i64> = (0..s)
            .map(|i| basis.row(i)[i].to_i64().expect("diagonal fits"))
            .collect();
        let mut counter = vec![0i64; s];
        loop {
            // next mixed-radix coset representative
            let mut i = 0;
            loop {
                if i == s {
                    return Ok(basis);
                }
                counter[i] += 1;
                if counter[i] < diag[i] {
                    break;
                }
                counter[i] = 0;
                i += 1;
            }
            // balance against the rows so exponents (and norms) stay small
            let mut v: Vec<BigInt> = counter.iter().map(|c| BigInt::from(*c)).collect();
            for i in 0..s {
                let d = &basis.row(i)[i].clone();
                let half = d >> 1;
                while v[i] > half {
                    for j in 0..s {
                        let t = basis.row(i)[j].clone();
                        v[j] -= t;
                    }
                }
                while v[i] < -half.clone() {
                    for j in 0..s {
                        let t = basis.row(i)[j].clone();
                        v[j] += t;
                    }
                }
            }
            if v.iter().all(|c| c.is_zero()) {
                continue;
            }
            let mut ideal = crate::ideals::Ideal::ring(field.clone());
            for (i, c) in v.iter().enumerate() {
                let e = c.to_i64().expect("balanced exponent fits");
                let q = if e >= 0 {
                    primes[i].clone()
                } else {
                    conjugate_prime(&primes[i], primes).clone()
                };
                let qi = q.to_ideal(field);
                for _ in 0..e.unsigned_abs() {
                    ideal = crate::ideals::ideal_mul(&ideal, &qi)?;
                }
            }
            if imag_quadratic_principal(&ideal, d_abs) {
                let mut rows: Vec<Vec<BigInt>> =
                    basis.rows_iter().map(|r| r.to_vec()).collect();
                rows.push(counter.iter().map(|c| BigInt::from(*c)).collect());
                basis = IntMatrix::from_rows(rows).hnf_basis();
                continue 'outer;
            }
        }
    }
}

/// Class group of a tiny field by Minkowski-bound enumeration:
/// `(h, invariant factors)`.
///
/// Collects principal relations from all elements of coordinate height
/// `H`, doubling `H` until the relation lattice is full rank and stable
/// for two consecutive rungs.  Heuristic ground truth: termination says
/// nothing was gained twice, not that nothing remains; the quadratic
/// case is hardened by exact prime-order relations (definite norm form)
/// and cross-checked against [`bqf_class_group`].
pub fn enumerate_class_group(field: &Arc<NumberField>) -> Result<(u64, Vec<u64>)> {
    let bound = field.minkowski_bound;
    if bound > 1e6 {
        return Err(Error::TooLarge(bound as u64));
    }
    let mut primes = Vec::new();
    let mut p = 2u64;
    while (p as f64) <= bound {
        if crate::arith::is_prime_u64(p) {
            for q in split_prime(field, p)? {
                if !q.inert && q.norm().to_f64().is_some_and(|n| n <= bound) {
                    primes.push(q);
                }
            }
        }
        p += 1;
    }
    if primes.is_empty() {
        return Ok((1, vec![]));
    }
    primes.sort_by_key(|q| q.sort_key());
    let rational: Vec<u64> = {
        let mut ps: Vec<u64> = primes.iter().map(|q| q.p).collect();
        ps.dedup();
        ps
    };

    let n = field.degree;
    let imag_quadratic =
        n == 2 && field.poly.coeff(1).is_zero() && field.disc.is_negative();
    let mut rows: Vec<Vec<BigInt>> = Vec::new();
    if imag_quadratic {
        rows.extend(imag_quadratic_order_rows(field, &primes)?);
    }
    for &p in &rational {
        // constants pin the split relations (p) = prod P_i^(e_i) early
        let phi = FieldElement::from_integer(field.clone(), BigInt::from(p));
        if let Some(v) = vector_over(&phi, &primes, &rational) {
            rows.push(v.iter().map(|e| BigInt::from(*e)).collect());
        }
    }
    let finish = |basis: IntMatrix| -> Result<(u64, Vec<u64>)> {
        let h = basis
            .rows_iter()
            .enumerate()
            .map(|(i, r)| r[i].clone())
            .product::<BigInt>()
            .abs();
        let invariants: Vec<u64> = basis
            .snf()
            .iter()
            .filter_map(|d| d.to_u64())
            .filter(|d| *d > 1)
            .collect();
        Ok((h.to_u64().expect("class number fits u64"), invariants))
    };
    let mut prev: Option<IntMatrix> = None;
    let mut stable = 0;
    let mut height = 1i64;
    loop {
        for coeffs in coordinate_box(n, height) {
            let phi = FieldElement::new(field.clone(), Poly::from_i64s(&coeffs));
            if phi.is_zero() {
                continue;
            }
            if let Some(v) = vector_over(&phi, &primes, &rational) {
                rows.push(v.iter().map(|e| BigInt::from(*e)).collect());
            }
        }
        let mat = IntMatrix::from_rows(pad_rows(&rows, primes.len()));
        let basis = mat.hnf_basis();
        let full = basis.rows == primes.len();
        if full && imag_quadratic && height >= 4 {
            // The ladder only primes the lattice here; saturation makes it
            // exact, so no stability heuristic is needed.
            let d_abs = field.poly.coeff(0).clone();
            return finish(saturate_quadratic(field, &primes, &d_abs, basis)?);
        }
        if full && prev.as_ref() == Some(&basis) {
            stable += 1;
            if stable >= 2 {
                return finish(basis);
            }
        } else {
            stable = 0;
        }
        prev = Some(basis);
        height *= 2;
        if height > 64 {
            return Err(Error::TooLarge(height as u64));
        }
    }
}

/// All coordinate vectors in `[-h, h]^n` with positive leading nonzero
/// entry (one per sign class).
fn coordinate_box(n: usize, h: i64) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    let mut cur = vec![-h; n];
    'outer: loop {
        if let Some(lead) = cur.iter().rev().find(|c| **c != 0) {
            if *lead > 0 {
                out.push(cur.clone());
            }
        }
        for i in 0..n {
            cur[i] += 1;
            if cur[i] <= h {
                continue 'outer;
            }
            cur[i] = -h;
        }
        return out;
    }
}

fn pad_rows(rows: &[Vec<BigInt>], cols: usize) -> Vec<Vec<BigInt>> {
    if rows.is_empty() {
        vec![vec![BigInt::zero(); cols]]
    } else {
        rows.to_vec()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{make_field, make_kummer_field};
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    #[test]
    fn bqf_small_discriminants() {
        let (h, inv, forms) = bqf_class_group(-20).unwrap();
        assert_eq!(h, 2);
        assert_eq!(inv, vec![2]);
        assert_eq!(
            forms,
            vec![QuadForm { a: 1, b: 0, c: 5 }, QuadForm { a: 2, b: 2, c: 3 }]
        );

        let (h, inv, forms) = bqf_class_group(-56).unwrap();
        assert_eq!(h, 4);
        assert_eq!(inv, vec![4]); // cyclic
        assert!(forms.contains(&QuadForm { a: 1, b: 0, c: 14 }));
        assert!(forms.contains(&QuadForm { a: 2, b: 0, c: 7 }));
        assert!(forms.contains(&QuadForm { a: 3, b: 2, c: 5 }));
        assert!(forms.contains(&QuadForm { a: 3, b: -2, c: 5 }));

        let (h, inv, _) = bqf_class_group(-4).unwrap();
        assert_eq!((h, inv.len()), (1, 0));

        let (h, inv, _) = bqf_class_group(-84).unwrap();
        assert_eq!(h, 4);
        assert_eq!(inv, vec![2, 2]);

        let (h, inv, _) = bqf_class_group(-104).unwrap();
        assert_eq!(h, 6);
        assert_eq!(inv, vec![6]);
    }

    #[test]
    fn bqf_rejects_bad_discriminants() {
        assert!(matches!(bqf_class_group(5), Err(Error::BadDiscriminant(_))));
        assert!(matches!(bqf_class_group(-5), Err(Error::BadDiscriminant(_))));
        assert!(matches!(bqf_class_group(-14), Err(Error::BadDiscriminant(_))));
    }

    #[test]
    fn composition_satisfies_group_laws() {
        let mut rng = StdRng::seed_from_u64(17);
        for d in [-20i128, -56, -84, -104, -167, -420] {
            let (_, _, forms) = bqf_class_group(d).unwrap();
            let e = principal_form(d);
            for f in &forms {
                assert_eq!(compose(*f, e), *f, "identity fails for {f:?}");
                assert_eq!(compose(*f, inverse(*f)), e, "inverse fails for {f:?}");
            }
            for _ in 0..20 {
                let pick = |r: &mut StdRng| forms[r.gen_range(0..forms.len())];
                let (f, g, k) = (pick(&mut rng), pick(&mut rng), pick(&mut rng));
                assert_eq!(compose(compose(f, g), k), compose(f, compose(g, k)));
                assert_eq!(compose(f, g), compose(g, f));
            }
        }
    }

    #[test]
    fn enumerates_tiny_fields() {
        let gauss = make_field(&Poly::from_i64s(&[1, 0, 1])).unwrap();
        assert_eq!(enumerate_class_group(&gauss).unwrap(), (1, vec![]));

        let f = make_kummer_field(3, 2).unwrap();
        assert_eq!(enumerate_class_group(&f).unwrap(), (1, vec![]));

        let f = make_field(&Poly::from_i64s(&[5, 0, 1])).unwrap();
        assert_eq!(enumerate_class_group(&f).unwrap(), (2, vec![2]));
    }

    #[test]
    fn enumeration_agrees_with_forms() {
        for d in (-200i64..0).filter(|d| d.rem_euclid(4) >= 2) {
            // squarefree d = disc/4; the order Z[sqrt(d)] is maximal
            let fd = factor_integer(&BigInt::from(d), 1000).unwrap();
            if fd.iter().any(|(_, e)| *e > 1) {
                continue;
            }
            let field = make_field(&Poly::new(vec![
                BigInt::from(-d),
                BigInt::zero(),
                BigInt::from(1),
            ]))
            .unwrap();
            let (h_enum, inv_enum) = enumerate_class_group(&field).unwrap();
            let (h_bqf, inv_bqf, _) = bqf_class_group(4 * d as i128).unwrap();
            assert_eq!(h_enum, h_bqf, "h mismatch at d = {d}");
            assert_eq!(
                inv_enum,
                inv_bqf,
                "structure mismatch at d = {d}"
            );
        }
    }
}
