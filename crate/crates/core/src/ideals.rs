//! Ideal arithmetic in the monogenic order `Z[theta]`.
//!
//! Primes are found by factoring the defining polynomial modulo `p`; an
//! [`Ideal`] is a full-rank `Z`-submodule of `Z[theta]` held in row
//! Hermite normal form (upper triangular, positive diagonal, entries
//! above each pivot reduced), so equality, membership, and norms are
//! immediate. Multiplication stacks the pairwise products of basis
//! elements and re-reduces. Exact division by a prime `P` above `p`
//! multiplies by the product of the other primes above `p` and strips the
//! factor `p` entrywise, verifying the result by remultiplication.
//!
//! Valuations of elements at degree-one unramified primes go through a
//! Hensel-lifted root of the defining polynomial — the valuation of
//! `A(theta)` at `(p, theta - v)` is the `p`-adic valuation of `A(v*)`
//! for a lift `v*` of sufficient precision — while ramified or
//! higher-degree primes fall back to repeated exact ideal division. Both
//! paths are cross-checked against `sum_P v_P(phi) f_P = v_p(N(phi))`.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::arith::{self, factor_integer, hensel_lift_root, Poly, PolyModP};
use crate::field::{bigint_log2, FieldElement, NumberField};
use crate::linalg::IntMatrix;
use crate::{Error, Result};

// ===================================================================
// Prime ideals
// ===================================================================

/// A prime of `Z[theta]` above `p`, described by a monic irreducible
/// factor `g` of the defining polynomial mod `p`: the ideal
/// `(p, g(theta))`, of norm `p^f` with `f = deg g`.
#[derive(Clone, PartialEq, Eq)]
pub struct PrimeIdeal {
    pub p: u64,
    /// Monic irreducible factor of `T` mod `p`.
    pub g: PolyModP,
    /// Inertia degree `deg g`.
    pub f: usize,
    /// Ramification index: multiplicity of `g` in `T` mod `p`.
    pub e: usize,
    /// Set when `p` stays prime: a single factor of degree `n` with
    /// `e = 1`. Inert primes never enter factor bases.
    pub inert: bool,
}

impl std::fmt::Debug for PrimeIdeal {
    fn fmt(&self, out: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(out, "({}, {})", self.p, self.g.lift())
    }
}

impl PrimeIdeal {
    pub fn norm(&self) -> BigInt {
        BigInt::from(self.p).pow(self.f as u32)
    }

    /// The root of `g` mod `p` for degree-one primes.
    pub fn root(&self) -> u64 {
        assert_eq!(self.f, 1, "root only defined for degree-one primes");
        let g0 = self.g.coeffs.first().copied().unwrap_or(0);
        (self.p - g0 % self.p) % self.p
    }

    /// The two-element form `(p, g(theta))` as an HNF ideal.
    pub fn to_ideal(&self, field: &Arc<NumberField>) -> Ideal {
        let w = FieldElement::new(field.clone(), self.g.lift());
        Ideal::from_two_element(field.clone(), BigInt::from(self.p), w)
    }

    /// Sort key giving the deterministic factor-base order:
    /// by norm, then `p`, then the coefficients of `g`.
    pub fn sort_key(&self) -> (BigInt, u64, Vec<u64>) {
        (self.norm(), self.p, self.g.coeffs.clone())
    }
}

/// All primes of `Z[theta]` above `p`, in deterministic order, inert ones
/// marked. The fundamental identity `sum e_i f_i = n` holds.
pub fn split_prime(field: &NumberField, p: u64) -> Result<Vec<PrimeIdeal>> {
    if !arith::is_prime_u64(p) {
        return Err(Error::NotPrime(BigInt::from(p)));
    }
    let factors = arith::factor_mod_p(&field.poly, p)?;
    let inert = factors.len() == 1 && factors[0].1 == 1 && {
        factors[0].0.degree() == Some(field.degree)
    };
    let mut primes: Vec<PrimeIdeal> = factors
        .into_iter()
        .map(|(g, e)| PrimeIdeal {
            p,
            f: g.degree().unwrap(),
            e: e as usize,
            g,
            inert,
        })
        .collect();
    primes.sort_by_key(|q| q.sort_key());
    Ok(primes)
}

// ===================================================================
// Ideals as Z-modules
// ===================================================================

/// An integral ideal of `Z[theta]`, stored as the row-HNF basis of its
/// coordinates in the power basis `1, theta, ..., theta^(n-1)`. The
/// optional two-element form is a cached convenience only.
#[derive(Clone)]
pub struct Ideal {
    pub field: Arc<NumberField>,
    pub hnf: IntMatrix,
    pub two: Option<(BigInt, FieldElement)>,
}

impl PartialEq for Ideal {
    fn eq(&self, other: &Self) -> bool {
        self.field == other.field && self.hnf == other.hnf
    }
}
impl Eq for Ideal {}

impl std::fmt::Debug for Ideal {
    fn fmt(&self, out: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(out, "Ideal(norm = {}, hnf = {:?})", self.norm(), self.hnf)
    }
}

/// Coordinates of an element in the power basis, padded to length `n`.
pub fn coords(field: &NumberField, rep: &Poly) -> Vec<BigInt> {
    let mut v = rep.coeffs.clone();
    v.resize(field.degree, BigInt::zero());
    v
}

impl Ideal {
    /// The unit ideal `Z[theta]`.
    pub fn ring(field: Arc<NumberField>) -> Ideal {
        let n = field.degree;
        Ideal {
            field,
            hnf: IntMatrix::identity(n),
            two: None,
        }
    }

    /// The ideal generated by finitely many elements: stack the rows
    /// `theta^j g_i` and reduce. Errors on the zero ideal.
    pub fn from_generators(field: Arc<NumberField>, gens: &[FieldElement]) -> Result<Ideal> {
        let n = field.degree;
        let mut rows = Vec::new();
        for g in gens {
            debug_assert_eq!(g.field.poly, field.poly);
            let mut shifted = g.rep.clone();
            for _ in 0..n {
                rows.push(coords(&field, &shifted));
                shifted = shifted.shift(1).rem_monic(&field.poly);
            }
        }
        let basis = IntMatrix::from_rows(rows).hnf_basis();
        if basis.rows < n {
            return Err(Error::InvalidInput("zero or degenerate ideal".into()));
        }
        Ok(Ideal {
            field,
            hnf: basis,
            two: None,
        })
    }

    /// The principal ideal `(phi)`.
    pub fn from_element(phi: &FieldElement) -> Result<Ideal> {
        if phi.is_zero() {
            return Err(Error::ZeroElement);
        }
        let ideal = Ideal::from_generators(phi.field.clone(), &[phi.clone()])?;
        debug_assert_eq!(ideal.norm(), phi.norm().unwrap().abs());
        Ok(ideal)
    }

    /// The ideal `(u, w)` with the two-element form cached.
    pub fn from_two_element(field: Arc<NumberField>, u: BigInt, w: FieldElement) -> Ideal {
        let ui = FieldElement::from_integer(field.clone(), u.clone());
        let mut ideal = Ideal::from_generators(field, &[ui, w.clone()])
            .expect("two-element ideals are full rank");
        ideal.two = Some((u, w));
        ideal
    }

    /// An ideal from a caller-supplied basis matrix (rows generate).
    pub fn from_matrix(field: Arc<NumberField>, m: IntMatrix) -> Result<Ideal> {
        let n = field.degree;
        if m.cols != n {
            return Err(Error::InvalidInput(format!(
                "basis has {} columns, field degree is {n}",
                m.cols
            )));
        }
        let basis = m.hnf_basis();
        if basis.rows < n {
            return Err(Error::InvalidInput("ideal basis not full rank".into()));
        }
        Ok(Ideal {
            field,
            hnf: basis,
            two: None,
        })
    }

    /// `norm(I) = [Z[theta] : I]`: the product of the HNF diagonal.
    pub fn norm(&self) -> BigInt {
        let mut acc = BigInt::one();
        for i in 0..self.hnf.rows {
            acc *= &self.hnf[(i, i)];
        }
        acc.abs()
    }

    pub fn is_ring(&self) -> bool {
        self.hnf == IntMatrix::identity(self.field.degree)
    }

    /// Membership test for an element.
    pub fn contains(&self, phi: &FieldElement) -> bool {
        self.hnf.hnf_contains(&coords(&self.field, &phi.rep))
    }

    /// Smallest positive rational integer in the ideal (top-left HNF
    /// entry): useful as the `u` of a two-element form.
    pub fn min_integer(&self) -> BigInt {
        self.hnf[(0, 0)].clone()
    }
}

/// Product ideal: HNF of all pairwise products of basis elements.
pub fn ideal_mul(a: &Ideal, b: &Ideal) -> Result<Ideal> {
    if a.field != b.field {
        return Err(Error::FieldMismatch);
    }
    let field = &a.field;
    let n = field.degree;
    let mut rows = Vec::with_capacity(n * n);
    for i in 0..n {
        let pa = Poly::new(a.hnf.row(i).to_vec());
        for j in 0..n {
            let pb = Poly::new(b.hnf.row(j).to_vec());
            rows.push(coords(field, &pa.mul(&pb).rem_monic(&field.poly)));
        }
    }
    let basis = IntMatrix::from_rows(rows).hnf_basis();
    debug_assert_eq!(basis.rows, n);
    Ok(Ideal {
        field: field.clone(),
        hnf: basis,
        two: None,
    })
}

/// `I^k` by repeated multiplication (`k = 0` gives the unit ideal).
pub fn ideal_pow(i: &Ideal, k: u64) -> Result<Ideal> {
    let mut acc = Ideal::ring(i.field.clone());
    for _ in 0..k {
        acc = ideal_mul(&acc, i)?;
    }
    Ok(acc)
}

/// Exact division `I / P` for a prime `P` above `p`: computes
/// `I * prod_(P' != P) P'^(e') * P^(e-1)`, strips the now-common factor
/// `p` from every entry, and verifies by remultiplying. Errors with
/// `NotContained` when `P` does not divide `I`.
pub fn ideal_div_prime(i: &Ideal, prime: &PrimeIdeal) -> Result<Ideal> {
    let field = &i.field;
    let siblings = split_prime(field, prime.p)?;
    let mut cofactor = Ideal::ring(field.clone());
    for q in &siblings {
        let mult = if q == prime { q.e - 1 } else { q.e };
        for _ in 0..mult {
            cofactor = ideal_mul(&cofactor, &q.to_ideal(field))?;
        }
    }
    let product = ideal_mul(i, &cofactor)?;
    // all entries must be divisible by p if P | I
    let p = BigInt::from(prime.p);
    let mut rows = Vec::with_capacity(product.hnf.rows);
    for r in 0..product.hnf.rows {
        let mut row = Vec::with_capacity(product.hnf.cols);
        for c in 0..product.hnf.cols {
            let (q, rem) = product.hnf[(r, c)].div_rem(&p);
            if !rem.is_zero() {
                return Err(Error::NotContained);
            }
            row.push(q);
        }
        rows.push(row);
    }
    let candidate = Ideal {
        field: field.clone(),
        hnf: IntMatrix::from_rows(rows),
        two: None,
    };
    let check = ideal_mul(&candidate, &prime.to_ideal(field))?;
    if &check != i {
        return Err(Error::NotContained);
    }
    Ok(candidate)
}

/// `v_P(I)` by dividing until division fails; uses the norm shortcut when
/// `P` is the only prime above `p`.
pub fn ideal_valuation(i: &Ideal, prime: &PrimeIdeal) -> Result<i64> {
    let norm = i.norm();
    let vp = int_valuation(&norm, prime.p);
    if vp == 0 {
        return Ok(0);
    }
    let siblings = split_prime(&i.field, prime.p)?;
    if siblings.len() == 1 {
        debug_assert_eq!(vp % prime.f as i64, 0);
        return Ok(vp / prime.f as i64);
    }
    let mut current = i.clone();
    let mut count = 0i64;
    loop {
        match ideal_div_prime(&current, prime) {
            Ok(next) => {
                current = next;
                count += 1;
            }
            Err(Error::NotContained) => return Ok(count),
            Err(e) => return Err(e),
        }
    }
}

fn int_valuation(n: &BigInt, p: u64) -> i64 {
    let p = BigInt::from(p);
    let mut n = n.clone();
    let mut v = 0;
    if n.is_zero() {
        return i64::MAX;
    }
    loop {
        let (q, r) = n.div_rem(&p);
        if !r.is_zero() {
            return v;
        }
        n = q;
        v += 1;
    }
}

// ===================================================================
// Element valuations
// ===================================================================

/// `v_P(phi)` for a single prime. Degree-one unramified primes use the
/// Hensel-lift path (precision `m = ceil(2 + log_p N)`, doubled once on
/// ambiguity); anything else uses exact ideal division. `PrecisionExceeded`
/// signals that even the doubled precision saw a zero residue, which for a
/// true valuation `<= v_p(N(phi))` cannot happen.
pub fn element_valuation(phi: &FieldElement, prime: &PrimeIdeal) -> Result<i64> {
    if phi.is_zero() {
        return Err(Error::ZeroElement);
    }
    let norm = phi.norm()?.abs();
    let vp = int_valuation(&norm, prime.p);
    if vp == 0 {
        return Ok(0);
    }
    let siblings = split_prime(&phi.field, prime.p)?;
    if siblings.len() == 1 {
        debug_assert_eq!(vp % prime.f as i64, 0);
        return Ok(vp / prime.f as i64);
    }
    if prime.f == 1 && prime.e == 1 {
        element_valuation_hensel(phi, prime, vp)
    } else {
        ideal_valuation(&Ideal::from_element(phi)?, prime)
    }
}

fn element_valuation_hensel(phi: &FieldElement, prime: &PrimeIdeal, vp_norm: i64) -> Result<i64> {
    let p = prime.p;
    let mut m = (2.0 + bigint_log2(&phi.norm()?.abs()).max(1.0) / (p as f64).log2()).ceil() as u32;
    for _ in 0..2 {
        let root = BigInt::from(prime.root());
        let lifted = hensel_lift_root(&phi.field.poly, p, &root, m)?;
        let modulus = BigInt::from(p).pow(m);
        let value = phi.rep.eval_mod(&lifted, &modulus);
        if !value.is_zero() {
            let v = int_valuation(&value, p);
            if v < m as i64 {
                debug_assert!(v <= vp_norm);
                return Ok(v);
            }
        }
        m *= 2; // residue vanished at this precision: retry once
    }
    Err(Error::PrecisionExceeded)
}

/// Valuations of `phi` at every prime above `p`, checked against
/// `sum v_P f_P = v_p(N(phi))`; the check failing would mean an internal
/// arithmetic bug, reported as `DomainError` rather than silently.
pub fn valuations_above(phi: &FieldElement, p: u64) -> Result<Vec<(PrimeIdeal, i64)>> {
    if phi.is_zero() {
        return Err(Error::ZeroElement);
    }
    let norm = phi.norm()?.abs();
    let vp = int_valuation(&norm, p);
    let primes = split_prime(&phi.field, p)?;
    if vp == 0 {
        return Ok(primes.into_iter().map(|q| (q, 0)).collect());
    }
    let mut out = Vec::with_capacity(primes.len());
    let mut weighted = 0i64;
    for q in primes {
        let v = element_valuation(phi, &q)?;
        weighted += v * q.f as i64;
        out.push((q, v));
    }
    if weighted != vp {
        return Err(Error::DomainError(format!(
            "valuation sum {weighted} != v_{p}(norm) = {vp} for {:?}",
            phi.rep
        )));
    }
    Ok(out)
}

// ===================================================================
// Ideal factorization
// ===================================================================

/// Factors an integral ideal into primes: `I = prod P^(v_P)` with every
/// exponent positive. The norm is factored by trial division up to
/// `limit` and a rho-method fallback; an unfactored cofactor surfaces as
/// `Unfactored` so callers can choose to descend instead.
pub fn factor_ideal(i: &Ideal, limit: u64) -> Result<Vec<(PrimeIdeal, i64)>> {
    let norm = i.norm();
    if norm.is_one() {
        return Ok(Vec::new());
    }
    let factors = factor_integer(&norm, limit)?;
    let mut out = Vec::new();
    for (p, mult) in factors {
        let p = p
            .to_u64()
            .ok_or_else(|| Error::Unfactored(p.clone()))?;
        let primes = split_prime(&i.field, p)?;
        let mut weighted = 0i64;
        for q in primes {
            let v = ideal_valuation(i, &q)?;
            weighted += v * q.f as i64;
            if v != 0 {
                out.push((q, v));
            }
        }
        if weighted != mult as i64 {
            return Err(Error::DomainError(format!(
                "ideal valuation sum {weighted} != v_{p}(norm) = {mult}"
            )));
        }
    }
    out.sort_by_key(|(q, _)| q.sort_key());
    Ok(out)
}

/// Factorization of a principal ideal `(phi)` through element valuations
/// (cheaper than [`factor_ideal`] and exercised against it in tests).
pub fn factor_element(phi: &FieldElement, limit: u64) -> Result<Vec<(PrimeIdeal, i64)>> {
    if phi.is_zero() {
        return Err(Error::ZeroElement);
    }
    let norm = phi.norm()?.abs();
    if norm.is_one() {
        return Ok(Vec::new());
    }
    let factors = factor_integer(&norm, limit)?;
    let mut out = Vec::new();
    for (p, _) in factors {
        let p = p
            .to_u64()
            .ok_or_else(|| Error::Unfactored(p.clone()))?;
        for (q, v) in valuations_above(phi, p)? {
            if v != 0 {
                out.push((q, v));
            }
        }
    }
    out.sort_by_key(|(q, _)| q.sort_key());
    Ok(out)
}

/// Re-multiplies a factorization, for verification: `prod P^(e)`.
pub fn multiply_out(
    field: &Arc<NumberField>,
    factors: &[(PrimeIdeal, i64)],
) -> Result<Ideal> {
    let mut acc = Ideal::ring(field.clone());
    for (q, e) in factors {
        assert!(*e >= 0, "multiply_out expects integral exponents");
        let qi = q.to_ideal(field);
        for _ in 0..*e {
            acc = ideal_mul(&acc, &qi)?;
        }
    }
    Ok(acc)
}

/// Groups a factorization by rational prime, for per-`p` checks.
pub fn group_by_p(factors: &[(PrimeIdeal, i64)]) -> BTreeMap<u64, Vec<(PrimeIdeal, i64)>> {
    let mut map: BTreeMap<u64, Vec<(PrimeIdeal, i64)>> = BTreeMap::new();
    for (q, e) in factors {
        map.entry(q.p).or_default().push((q.clone(), *e));
    }
    map
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{make_field, make_kummer_field};
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn x3m2() -> Arc<NumberField> {
        make_kummer_field(3, 2).unwrap()
    }

    fn elem(f: &Arc<NumberField>, cs: &[i64]) -> FieldElement {
        FieldElement::new(f.clone(), Poly::from_i64s(cs))
    }

    #[test]
    fn split_patterns() {
        let f = x3m2();
        // 5: one linear factor X + 2 (root 3) and one quadratic
        let primes = split_prime(&f, 5).unwrap();
        assert_eq!(primes.len(), 2);
        assert_eq!((primes[0].f, primes[0].e), (1, 1));
        assert_eq!(primes[0].g.coeffs, vec![2, 1]); // X + 2
        assert_eq!(primes[0].root(), 3);
        assert_eq!((primes[1].f, primes[1].e), (2, 1));
        assert_eq!(primes[1].g.coeffs, vec![4, 3, 1]); // X^2 + 3X + 4
        assert!(!primes[0].inert);

        // 2 ramifies completely: (X)^3
        let primes = split_prime(&f, 2).unwrap();
        assert_eq!(primes.len(), 1);
        assert_eq!((primes[0].f, primes[0].e), (1, 3));
        assert!(!primes[0].inert);

        // 7 is inert
        let primes = split_prime(&f, 7).unwrap();
        assert_eq!(primes.len(), 1);
        assert_eq!((primes[0].f, primes[0].e), (3, 1));
        assert!(primes[0].inert);

        // X^2 + 5 mod 2 = (X + 1)^2
        let g = make_field(&Poly::from_i64s(&[5, 0, 1])).unwrap();
        let primes = split_prime(&g, 2).unwrap();
        assert_eq!(primes.len(), 1);
        assert_eq!((primes[0].f, primes[0].e), (1, 2));

        assert!(matches!(split_prime(&f, 6), Err(Error::NotPrime(_))));
    }

    #[test]
    fn ef_sum_is_degree() {
        let fields = [
            x3m2(),
            make_field(&Poly::from_i64s(&[5, 0, 1])).unwrap(),
            make_kummer_field(5, 3).unwrap(),
        ];
        for f in &fields {
            for p in arith::primes_up_to(1000) {
                let total: usize = split_prime(f, p)
                    .unwrap()
                    .iter()
                    .map(|q| q.e * q.f)
                    .sum();
                assert_eq!(total, f.degree, "p = {p}");
            }
        }
    }

    #[test]
    fn hnf_form_of_small_prime() {
        let f = x3m2();
        let p5 = &split_prime(&f, 5).unwrap()[0];
        let ideal = p5.to_ideal(&f);
        assert_eq!(ideal.norm(), BigInt::from(5));
        let expect = IntMatrix::from_i64s(&[&[1, 0, 1], &[0, 1, 3], &[0, 0, 5]]);
        assert_eq!(ideal.hnf, expect);
        // contains theta + 2 and 5, but not theta
        assert!(ideal.contains(&elem(&f, &[2, 1])));
        assert!(ideal.contains(&elem(&f, &[5])));
        assert!(!ideal.contains(&elem(&f, &[0, 1])));
    }

    #[test]
    fn ramified_cube_is_two() {
        let f = x3m2();
        let p2 = &split_prime(&f, 2).unwrap()[0];
        let cube = ideal_pow(&p2.to_ideal(&f), 3).unwrap();
        let two = Ideal::from_element(&elem(&f, &[2])).unwrap();
        assert_eq!(cube, two);
        assert_eq!(cube.norm(), BigInt::from(8));
    }

    #[test]
    fn unit_ideal_is_identity() {
        let f = x3m2();
        let o = Ideal::ring(f.clone());
        assert!(o.is_ring());
        let p5 = split_prime(&f, 5).unwrap()[0].to_ideal(&f);
        assert_eq!(ideal_mul(&o, &p5).unwrap(), p5);
        let unit = Ideal::from_element(&elem(&f, &[-1, 1])).unwrap();
        assert!(unit.is_ring(), "theta - 1 is a unit");
    }

    #[test]
    fn norm_multiplicativity_above_five() {
        let f = x3m2();
        let primes = split_prime(&f, 5).unwrap();
        let prod = ideal_mul(&primes[0].to_ideal(&f), &primes[1].to_ideal(&f)).unwrap();
        assert_eq!(prod.norm(), BigInt::from(125));
    }

    #[test]
    fn norm_multiplicativity_random_coprime() {
        let fields = [x3m2(), make_field(&Poly::from_i64s(&[5, 0, 1])).unwrap()];
        let mut rng = StdRng::seed_from_u64(77);
        let mut done = 0;
        while done < 200 {
            let f = &fields[done % 2];
            let n = f.degree;
            let a = FieldElement::new(
                f.clone(),
                Poly::new((0..n).map(|_| BigInt::from(rng.gen_range(-9i64..=9))).collect()),
            );
            let b = FieldElement::new(
                f.clone(),
                Poly::new((0..n).map(|_| BigInt::from(rng.gen_range(-9i64..=9))).collect()),
            );
            if a.is_zero() || b.is_zero() {
                continue;
            }
            let na = a.norm().unwrap().abs();
            let nb = b.norm().unwrap().abs();
            if !na.gcd(&nb).is_one() {
                continue;
            }
            let ia = Ideal::from_element(&a).unwrap();
            let ib = Ideal::from_element(&b).unwrap();
            assert_eq!(ideal_mul(&ia, &ib).unwrap().norm(), na * nb);
            done += 1;
        }
    }

    #[test]
    fn valuation_fixed_examples() {
        let f = x3m2();
        let p5 = &split_prime(&f, 5).unwrap()[0];
        let p2 = &split_prime(&f, 2).unwrap()[0];
        let theta_plus_2 = elem(&f, &[2, 1]);
        // lift of the root 3 to 5^3 is 53; A(53) = 55 = 5 * 11
        let lifted = hensel_lift_root(&f.poly, 5, &BigInt::from(3), 3).unwrap();
        assert_eq!(lifted, BigInt::from(53));
        assert_eq!(element_valuation(&theta_plus_2, p5).unwrap(), 1);
        // theta has valuation 1 at the ramified prime; 2 has valuation 3
        assert_eq!(element_valuation(&elem(&f, &[0, 1]), p2).unwrap(), 1);
        assert_eq!(element_valuation(&elem(&f, &[2]), p2).unwrap(), 3);
        // units vanish everywhere
        assert_eq!(element_valuation(&elem(&f, &[-1, 1]), p5).unwrap(), 0);
        assert_eq!(element_valuation(&elem(&f, &[-1, 1]), p2).unwrap(), 0);
        assert!(matches!(
            element_valuation(&elem(&f, &[0]), p2),
            Err(Error::ZeroElement)
        ));
    }

    #[test]
    fn hensel_and_division_paths_agree() {
        let f = x3m2();
        let mut rng = StdRng::seed_from_u64(11);
        for p in [5u64, 11, 17, 31] {
            let primes = split_prime(&f, p).unwrap();
            for _ in 0..10 {
                let phi = elem(
                    &f,
                    &[
                        rng.gen_range(-30i64..=30),
                        rng.gen_range(-30i64..=30),
                        rng.gen_range(-30i64..=30),
                    ],
                );
                if phi.is_zero() {
                    continue;
                }
                for q in &primes {
                    if q.f != 1 || q.e != 1 {
                        continue;
                    }
                    let hensel = element_valuation(&phi, q).unwrap();
                    let division =
                        ideal_valuation(&Ideal::from_element(&phi).unwrap(), q).unwrap();
                    assert_eq!(hensel, division, "p = {p}, phi = {:?}", phi.rep);
                }
            }
        }
    }

    #[test]
    fn factor_fixed_examples() {
        let f = x3m2();
        // unit ideal and unit element factor trivially
        assert!(factor_ideal(&Ideal::ring(f.clone()), 1000).unwrap().is_empty());
        assert!(factor_element(&elem(&f, &[-1, 1]), 1000).unwrap().is_empty());
        // (theta + 2): norm 10 = 2 * 5
        let factors = factor_element(&elem(&f, &[2, 1]), 1000).unwrap();
        assert_eq!(factors.len(), 2);
        assert_eq!((factors[0].0.p, factors[0].1), (2, 1));
        assert_eq!((factors[1].0.p, factors[1].1), (5, 1));
        assert_eq!(factors[1].0.f, 1);
        // same through the general ideal route
        let via_ideal = factor_ideal(&Ideal::from_element(&elem(&f, &[2, 1])).unwrap(), 1000).unwrap();
        assert_eq!(factors, via_ideal);
    }

    #[test]
    fn factorizations_remultiply_exactly() {
        let fields = [x3m2(), make_field(&Poly::from_i64s(&[5, 0, 1])).unwrap()];
        let mut rng = StdRng::seed_from_u64(4242);
        let mut done = 0;
        while done < 100 {
            let f = &fields[done % 2];
            let n = f.degree;
            let phi = FieldElement::new(
                f.clone(),
                Poly::new((0..n).map(|_| BigInt::from(rng.gen_range(-20i64..=20))).collect()),
            );
            if phi.is_zero() {
                continue;
            }
            let ideal = Ideal::from_element(&phi).unwrap();
            let factors = match factor_element(&phi, 1_000_000) {
                Ok(v) => v,
                Err(Error::Unfactored(_)) => continue,
                Err(e) => panic!("unexpected: {e}"),
            };
            let rebuilt = multiply_out(f, &factors).unwrap();
            assert_eq!(rebuilt, ideal, "phi = {:?}", phi.rep);
            done += 1;
        }
    }

    #[test]
    fn mismatched_fields_rejected() {
        let f = x3m2();
        let g = make_kummer_field(3, 5).unwrap();
        let a = Ideal::ring(f);
        let b = Ideal::ring(g);
        assert!(matches!(ideal_mul(&a, &b), Err(Error::FieldMismatch)));
    }
}
