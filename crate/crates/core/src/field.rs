//! Number fields `Q[X]/(T)` for monic irreducible `T`, and their elements.
//!
//! A [`NumberField`] carries the defining polynomial, its discriminant,
//! the signature `(s, t)` computed exactly by Sturm sequences, the unit
//! rank `r = s + t - 1` and the Minkowski constant. Construction enforces
//! monicity, screens irreducibility (integer roots, Eisenstein, modular
//! degree analysis) and — unless waived — only accepts polynomials whose
//! equation order is known to be maximal, since the whole pipeline
//! identifies ideals of the field with ideals of `Z[x]/(T)`.
//!
//! [`FieldElement`] values are residue classes represented by reduced
//! polynomials in the generator `theta`. Norms are exact resultants.
//! [`FieldElement::log_embeddings`] returns `ln |sigma_i(phi)|` over the
//! `s + t` infinite places with a caller-chosen precision: double-precision
//! Durand–Kerner approximations of the roots of `T` are polished by Newton
//! iteration in fixed-point big-integer arithmetic, certified by (a) the
//! Newton residual quotient, (b) exact reconstruction of the coefficients
//! of `T` from the root set, and (c) the norm identity
//! `sum d_i ln|sigma_i(phi)| = ln|N(phi)|`; on any failure the working
//! precision doubles, up to four retries, before `PrecisionLoss` is raised.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};

use crate::arith::{self, factor_integer, factor_mod_p, resultant, Poly};
use crate::{Error, Result};

// ===================================================================
// Number fields
// ===================================================================

/// A number field presented as `Q[X]/(T)`, `T` monic irreducible, with the
/// order `Z[theta]` assumed maximal (checked at construction or explicitly
/// waived).
pub struct NumberField {
    /// Defining monic irreducible polynomial.
    pub poly: Poly,
    /// Degree `n = deg T`.
    pub degree: usize,
    /// Discriminant of `T` (equals the field discriminant under the
    /// monogenicity assumption).
    pub disc: BigInt,
    /// Number of real embeddings.
    pub real_places: usize,
    /// Number of conjugate pairs of complex embeddings.
    pub complex_places: usize,
    /// Unit rank `r = s + t - 1`.
    pub unit_rank: usize,
    /// Minkowski constant `(n!/n^n) (4/pi)^t sqrt(|disc|)`: every ideal
    /// class contains an integral ideal of norm at most this.
    pub minkowski_bound: f64,
    /// Cache of polished roots per working precision.
    roots_cache: Mutex<HashMap<u32, Arc<FixedRoots>>>,
}

impl PartialEq for NumberField {
    fn eq(&self, other: &Self) -> bool {
        self.poly == other.poly
    }
}
impl Eq for NumberField {}

impl std::fmt::Debug for NumberField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "NumberField(T = {}, disc = {}, signature = ({}, {}))",
            self.poly, self.disc, self.real_places, self.complex_places
        )
    }
}

/// Builds the field defined by monic irreducible `T`, requiring evidence
/// that `Z[x]/(T)` is the maximal order: squarefree `disc(T)`, or the
/// classical quadratic case `X^2 - d` with squarefree `d = 2, 3 mod 4`.
/// Use [`make_field_assume_monogenic`] to waive that check.
pub fn make_field(t: &Poly) -> Result<Arc<NumberField>> {
    let f = build_field(t)?;
    if !monogenic_evidence(&f) {
        return Err(Error::MonogenicityUnknown);
    }
    Ok(Arc::new(f))
}

/// As [`make_field`], with the maximal-order check waived by the caller.
pub fn make_field_assume_monogenic(t: &Poly) -> Result<Arc<NumberField>> {
    Ok(Arc::new(build_field(t)?))
}

/// Builds the pure field `Q[X]/(X^n - k)` for primes `n` and `k`. Such a
/// field is monogenic exactly when `n^2` does not divide `k^(n-1) - 1`,
/// which is checked; both primality conditions are enforced.
pub fn make_kummer_field(n: u32, k: u64) -> Result<Arc<NumberField>> {
    if !arith::is_prime_u64(n as u64) {
        return Err(Error::NotPrime(BigInt::from(n)));
    }
    if !arith::is_prime_u64(k) {
        return Err(Error::NotPrime(BigInt::from(k)));
    }
    let n_sq = BigInt::from(n) * BigInt::from(n);
    let pow = BigInt::from(k).modpow(&BigInt::from(n - 1), &n_sq);
    if pow.is_one() {
        // k^(n-1) = 1 mod n^2: the order Z[k^(1/n)] need not be maximal
        return Err(Error::MonogenicityUnknown);
    }
    let t = Poly::x_pow_minus(n as usize, BigInt::from(k));
    let f = build_field(&t)?;
    // |disc| = n^n k^(n-1): cross-check against the resultant route
    let expect = BigInt::from(n).pow(n) * BigInt::from(k).pow(n - 1);
    assert_eq!(f.disc.abs(), expect, "pure-field discriminant identity");
    Ok(Arc::new(f))
}

fn build_field(t: &Poly) -> Result<NumberField> {
    if !t.is_monic() {
        return Err(Error::NotMonic);
    }
    let n = t.degree().unwrap_or(0);
    if n < 2 {
        return Err(Error::InvalidInput(
            "defining polynomial must have degree at least 2".into(),
        ));
    }
    if is_provably_reducible(t)? {
        return Err(Error::Reducible);
    }
    let disc = discriminant(t)?;
    if disc.is_zero() {
        return Err(Error::Reducible); // repeated roots
    }
    let s = sturm_real_roots(t);
    debug_assert_eq!((n - s) % 2, 0);
    let tc = (n - s) / 2;
    let minkowski = minkowski_constant(n, tc, &disc);
    Ok(NumberField {
        poly: t.clone(),
        degree: n,
        disc,
        real_places: s,
        complex_places: tc,
        unit_rank: s + tc - 1,
        minkowski_bound: minkowski,
        roots_cache: Mutex::new(HashMap::new()),
    })
}

/// Discriminant of a monic polynomial:
/// `(-1)^(n(n-1)/2) res(T, T') / lc(T)`.
pub fn discriminant(t: &Poly) -> Result<BigInt> {
    let n = t.degree().ok_or(Error::ZeroPolynomial)?;
    let dt = t.derivative();
    if dt.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    let r = resultant(t, &dt)?;
    // n(n-1) is even, so the documented sign convention agrees with the
    // classical resultant here.
    Ok(if (n * (n - 1) / 2) % 2 == 1 { -r } else { r })
}

fn minkowski_constant(n: usize, t: usize, disc: &BigInt) -> f64 {
    let mut fact = 1f64;
    for i in 2..=n {
        fact *= i as f64;
    }
    let ratio = fact / (n as f64).powi(n as i32);
    let four_over_pi = (4.0 / std::f64::consts::PI).powi(t as i32);
    let sqrt_disc = bigint_to_f64(&disc.abs()).sqrt();
    ratio * four_over_pi * sqrt_disc
}

/// `BigInt -> f64` that survives values beyond the f64 integer range.
pub fn bigint_to_f64(x: &BigInt) -> f64 {
    x.to_f64().unwrap_or(f64::INFINITY)
}

/// Base-2 log of a positive big integer, good to f64 accuracy.
pub fn bigint_log2(x: &BigInt) -> f64 {
    assert!(x.is_positive());
    let bits = x.bits();
    if bits <= 53 {
        return bigint_to_f64(x).log2();
    }
    let shift = bits - 53;
    let top = (x >> shift).to_f64().unwrap();
    top.log2() + shift as f64
}

// ---- irreducibility screening ----

/// Returns `true` when `T` is certainly reducible over `Q`. A `false`
/// answer is a proof for degrees up to 3 (integer-root test) and otherwise
/// the result of Eisenstein plus modular degree analysis; callers assert
/// irreducibility as a precondition, and this screen catches violations at
/// desk scale.
fn is_provably_reducible(t: &Poly) -> Result<bool> {
    let n = t.degree().unwrap();
    let t0 = t.coeff(0);
    if t0.is_zero() {
        return Ok(true); // divisible by X
    }
    // monic => rational roots are integers dividing t0
    for (d, _) in factor_integer(&t0, 100_000)? {
        let mut cand = BigInt::one();
        loop {
            cand *= &d;
            if cand.abs() > t0.abs() {
                break;
            }
            if t.eval(&cand).is_zero() || t.eval(&(-&cand)).is_zero() {
                return Ok(true);
            }
        }
    }
    if t.eval(&BigInt::one()).is_zero() || t.eval(&(-BigInt::one())).is_zero() {
        return Ok(true);
    }
    if n <= 3 {
        return Ok(false); // no root and degree <= 3: irreducible
    }
    // Eisenstein at primes dividing t0
    'eis: for (p, _) in factor_integer(&t0, 100_000)? {
        for i in 0..n {
            if !t.coeff(i).mod_floor(&p).is_zero() {
                continue 'eis;
            }
        }
        if !t0.mod_floor(&(&p * &p)).is_zero() {
            return Ok(false); // Eisenstein: irreducible
        }
    }
    // modular degree analysis: intersect achievable factor-degree sums
    let disc = {
        let dt = t.derivative();
        resultant(t, &dt)?
    };
    let mut possible: Option<Vec<bool>> = None;
    let mut used = 0;
    for p in arith::primes_up_to(300) {
        if disc.mod_floor(&BigInt::from(p)).is_zero() {
            continue;
        }
        let factors = factor_mod_p(t, p)?;
        if factors.len() == 1 && factors[0].1 == 1 {
            return Ok(false); // irreducible mod p
        }
        // subset sums of factor degrees
        let mut sums = vec![false; n + 1];
        sums[0] = true;
        for (g, e) in &factors {
            let d = g.degree().unwrap();
            for _ in 0..*e {
                for i in (0..=n.saturating_sub(d)).rev() {
                    if sums[i] {
                        sums[i + d] = true;
                    }
                }
            }
        }
        possible = Some(match possible {
            None => sums,
            Some(prev) => prev.iter().zip(&sums).map(|(a, b)| *a && *b).collect(),
        });
        used += 1;
        if used >= 15 {
            break;
        }
    }
    if let Some(sums) = possible {
        if (1..n).all(|i| !sums[i]) {
            return Ok(false); // only trivial degree splits survive
        }
    }
    // Undecided: trust the caller's precondition.
    Ok(false)
}

fn monogenic_evidence(f: &NumberField) -> bool {
    // X^2 - d with squarefree d = 2, 3 mod 4: Z[sqrt(d)] is maximal
    if f.degree == 2 && f.poly.coeff(1).is_zero() {
        let d = -f.poly.coeff(0);
        let m = d.mod_floor(&BigInt::from(4));
        if (m == BigInt::from(2) || m == BigInt::from(3)) && is_squarefree(&d) {
            return true;
        }
    }
    is_squarefree(&f.disc)
}

fn is_squarefree(x: &BigInt) -> bool {
    match factor_integer(x, 100_000) {
        Ok(fs) => fs.iter().all(|(_, e)| *e == 1),
        Err(_) => false, // cannot certify
    }
}

// ---- Sturm sequences ----

/// Number of distinct real roots of a squarefree polynomial, by a Sturm
/// sequence evaluated at minus/plus infinity. Exact integer arithmetic:
/// pseudo-remainders with the sign corrected for the parity of the scaling
/// factor, contents stripped at every step.
pub fn sturm_real_roots(t: &Poly) -> usize {
    let mut seq: Vec<Poly> = vec![t.clone(), t.derivative()];
    loop {
        let a = &seq[seq.len() - 2];
        let b = &seq[seq.len() - 1];
        if b.is_zero() {
            seq.pop();
            break;
        }
        if b.degree() == Some(0) {
            break;
        }
        let da = a.degree().unwrap();
        let db = b.degree().unwrap();
        if da < db {
            // derivative had higher degree only for degenerate inputs
            break;
        }
        let mut r = a.pseudo_rem(b);
        // pseudo_rem scales by lc(b)^(da-db+1): flip back if that is negative
        if b.lc().is_negative() && (da - db + 1) % 2 == 1 {
            r = r.neg();
        }
        let mut next = r.neg();
        let c = next.content();
        if c > BigInt::one() {
            next = next.div_exact(&c);
        }
        if next.is_zero() {
            break;
        }
        seq.push(next);
    }
    let signs_at = |at_neg_infinity: bool| -> Vec<i8> {
        seq.iter()
            .map(|p| {
                let mut s = if p.lc().is_positive() { 1i8 } else { -1 };
                if at_neg_infinity && p.degree().unwrap_or(0) % 2 == 1 {
                    s = -s;
                }
                s
            })
            .collect()
    };
    let changes = |signs: Vec<i8>| -> usize {
        signs.windows(2).filter(|w| w[0] != w[1]).count()
    };
    changes(signs_at(true)) - changes(signs_at(false))
}

// ===================================================================
// Field elements
// ===================================================================

/// A residue class in `Q[X]/(T)` with an integral representative of degree
/// below `deg T`. Arithmetic reduces modulo `T` eagerly and exactly.
#[derive(Clone, PartialEq, Eq)]
pub struct FieldElement {
    pub field: Arc<NumberField>,
    pub rep: Poly,
}

impl std::fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.rep)
    }
}

impl FieldElement {
    pub fn new(field: Arc<NumberField>, rep: Poly) -> Self {
        let rep = rep.rem_monic(&field.poly);
        FieldElement { field, rep }
    }

    pub fn from_integer(field: Arc<NumberField>, c: BigInt) -> Self {
        FieldElement::new(field, Poly::constant(c))
    }

    /// The generator `theta` (class of `X`).
    pub fn theta(field: Arc<NumberField>) -> Self {
        FieldElement::new(field, Poly::x())
    }

    pub fn is_zero(&self) -> bool {
        self.rep.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.rep == Poly::one()
    }

    pub fn add(&self, other: &FieldElement) -> FieldElement {
        debug_assert_eq!(self.field.poly, other.field.poly);
        FieldElement::new(self.field.clone(), self.rep.add(&other.rep))
    }

    pub fn sub(&self, other: &FieldElement) -> FieldElement {
        debug_assert_eq!(self.field.poly, other.field.poly);
        FieldElement::new(self.field.clone(), self.rep.sub(&other.rep))
    }

    pub fn neg(&self) -> FieldElement {
        FieldElement::new(self.field.clone(), self.rep.neg())
    }

    pub fn mul(&self, other: &FieldElement) -> FieldElement {
        debug_assert_eq!(self.field.poly, other.field.poly);
        FieldElement::new(self.field.clone(), self.rep.mul(&other.rep))
    }

    pub fn pow(&self, e: u64) -> FieldElement {
        let mut acc = FieldElement::from_integer(self.field.clone(), BigInt::one());
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    /// Exact field norm `N(phi) = prod over all embeddings sigma(phi)`,
    /// computed as the resultant `res(rep, T)` (signed).
    pub fn norm(&self) -> Result<BigInt> {
        if self.is_zero() {
            return Err(Error::ZeroElement);
        }
        resultant(&self.rep, &self.field.poly)
    }

    /// Representative with the sign normalised so the leading coefficient
    /// is positive — `phi` and `-phi` generate the same ideal.
    pub fn canonical_sign(&self) -> FieldElement {
        if self.rep.lc().is_negative() {
            self.neg()
        } else {
            self.clone()
        }
    }

    /// `ln |sigma_i(phi)|` over the `s + t` infinite places (real
    /// embeddings first, each complex pair once), certified at
    /// `precision_bits` as described in the module docs. The norm identity
    /// `sum d_i v_i = ln |N(phi)|` (`d_i = 1` real, `2` complex) is
    /// verified to `2^(-precision_bits/4)` before returning.
    pub fn log_embeddings(&self, precision_bits: u32) -> Result<Vec<f64>> {
        if self.is_zero() {
            return Err(Error::ZeroElement);
        }
        let p = precision_bits.max(64);
        let norm_abs = self.norm()?.abs();
        let mut attempt = 0u32;
        loop {
            let w = (p + 64) << attempt;
            match self.log_embeddings_at(w, p, &norm_abs) {
                Ok(v) => return Ok(v),
                Err(Error::PrecisionLoss) if attempt < 4 => attempt += 1,
                Err(e) => return Err(e),
            }
        }
    }

    fn log_embeddings_at(&self, w: u32, p: u32, norm_abs: &BigInt) -> Result<Vec<f64>> {
        let roots = self.field.roots_at(w, p)?;
        let ln2 = ln2_fix(w);
        let mut logs_fix: Vec<BigInt> = Vec::new();
        // real embeddings
        for r in &roots.real {
            let v = eval_fix(&self.rep, r, w);
            let v2 = (&v * &v) >> w;
            if v2.is_zero() {
                return Err(Error::PrecisionLoss);
            }
            logs_fix.push(half(&ln_fix_scaled(&v2, w, &ln2)));
        }
        // complex pairs
        for (re, im) in &roots.complex {
            let (vr, vi) = eval_cfix(&self.rep, re, im, w);
            let m2 = (&vr * &vr + &vi * &vi) >> w;
            if m2.is_zero() {
                return Err(Error::PrecisionLoss);
            }
            logs_fix.push(half(&ln_fix_scaled(&m2, w, &ln2)));
        }
        // norm identity: sum d_i v_i = ln |N(phi)| within 2^(-p/4)
        let mut sum = BigInt::zero();
        for (i, v) in logs_fix.iter().enumerate() {
            let d = if i < roots.real.len() { 1 } else { 2 };
            sum += v * d;
        }
        let ln_norm = ln_int_fix(norm_abs, w, &ln2);
        let err = (&sum - &ln_norm).abs();
        let tol = BigInt::one() << (w.saturating_sub(p / 4));
        if err > tol {
            return Err(Error::PrecisionLoss);
        }
        Ok(logs_fix.iter().map(|v| fix_to_f64(v, w)).collect())
    }
}

// ===================================================================
// Root isolation and refinement
// ===================================================================

/// Polished roots of the defining polynomial at working precision `w`
/// (fixed point, scale `2^-w`): the real roots ascending, then one
/// representative per complex-conjugate pair (positive imaginary part),
/// ordered by real part then imaginary part.
struct FixedRoots {
    real: Vec<BigInt>,
    complex: Vec<(BigInt, BigInt)>,
}

impl NumberField {
    fn roots_at(&self, w: u32, p: u32) -> Result<Arc<FixedRoots>> {
        if let Some(hit) = self.roots_cache.lock().unwrap().get(&w) {
            return Ok(hit.clone());
        }
        let computed = Arc::new(self.compute_roots(w, p)?);
        self.roots_cache
            .lock()
            .unwrap()
            .insert(w, computed.clone());
        Ok(computed)
    }

    fn compute_roots(&self, w: u32, p: u32) -> Result<FixedRoots> {
        let t = &self.poly;
        let seeds = durand_kerner(t);
        // classify: the s approximations of smallest |Im| are the real roots
        let mut order: Vec<usize> = (0..seeds.len()).collect();
        order.sort_by(|&a, &b| seeds[a].1.abs().partial_cmp(&seeds[b].1.abs()).unwrap());
        let real_idx = &order[..self.real_places];
        let complex_idx: Vec<usize> = order[self.real_places..]
            .iter()
            .copied()
            .filter(|&i| seeds[i].1 > 0.0)
            .collect();
        if complex_idx.len() != self.complex_places {
            return Err(Error::PrecisionLoss);
        }
        let dt = t.derivative();
        let mut real: Vec<BigInt> = real_idx
            .iter()
            .map(|&i| newton_real(t, &dt, seeds[i].0, w, p))
            .collect::<Result<_>>()?;
        real.sort();
        let mut complex: Vec<(BigInt, BigInt)> = complex_idx
            .iter()
            .map(|&i| newton_complex(t, &dt, seeds[i], w, p))
            .collect::<Result<_>>()?;
        complex.sort();
        // global certificate: the product of (X - root) over all roots,
        // conjugates included, must reproduce the exact coefficients of T
        certify_factorization(t, &real, &complex, w, p)?;
        Ok(FixedRoots { real, complex })
    }
}

/// Double-precision Durand–Kerner iteration: simultaneous first-order
/// updates from a staggered circle of initial guesses. Good to roughly
/// 1e-12 relative for the separable desk-scale polynomials seen here;
/// the fixed-point Newton stage supplies all further accuracy.
fn durand_kerner(t: &Poly) -> Vec<(f64, f64)> {
    let n = t.degree().unwrap();
    let coeffs: Vec<f64> = t.coeffs.iter().map(bigint_to_f64).collect();
    let radius = 1.0
        + coeffs[..n]
            .iter()
            .map(|c| c.abs())
            .fold(0.0f64, f64::max);
    let mut z: Vec<(f64, f64)> = (0..n)
        .map(|k| {
            let angle = 2.0 * std::f64::consts::PI * (k as f64 + 0.25) / n as f64;
            (radius * angle.cos(), radius * angle.sin())
        })
        .collect();
    let eval = |z: (f64, f64)| -> (f64, f64) {
        let mut acc = (0.0, 0.0);
        for c in coeffs.iter().rev() {
            acc = (acc.0 * z.0 - acc.1 * z.1 + c, acc.0 * z.1 + acc.1 * z.0);
        }
        acc
    };
    for _ in 0..1000 {
        let mut worst: f64 = 0.0;
        for i in 0..n {
            let mut den = (1.0, 0.0);
            for j in 0..n {
                if i != j {
                    let d = (z[i].0 - z[j].0, z[i].1 - z[j].1);
                    den = (den.0 * d.0 - den.1 * d.1, den.0 * d.1 + den.1 * d.0);
                }
            }
            let num = eval(z[i]);
            let m = den.0 * den.0 + den.1 * den.1;
            if m == 0.0 {
                continue;
            }
            let step = (
                (num.0 * den.0 + num.1 * den.1) / m,
                (num.1 * den.0 - num.0 * den.1) / m,
            );
            z[i] = (z[i].0 - step.0, z[i].1 - step.1);
            worst = worst.max(step.0.hypot(step.1) / (1.0 + z[i].0.hypot(z[i].1)));
        }
        if worst < 1e-13 {
            break;
        }
    }
    z
}

// ---- fixed-point arithmetic (scale 2^-w) ----

fn f64_to_fix(x: f64, w: u32) -> BigInt {
    let scaled = BigInt::from_f64((x * (1u64 << 52) as f64).round()).unwrap_or_default();
    if w >= 52 {
        scaled << (w - 52)
    } else {
        scaled >> (52 - w)
    }
}

fn fix_to_f64(x: &BigInt, w: u32) -> f64 {
    let bits = x.bits();
    if bits <= 900 {
        return bigint_to_f64(x) / 2f64.powi(w as i32);
    }
    let shift = bits - 64;
    bigint_to_f64(&(x >> shift)) * 2f64.powi(shift as i32 - w as i32)
}

fn half(x: &BigInt) -> BigInt {
    x >> 1
}

fn fmul(a: &BigInt, b: &BigInt, w: u32) -> BigInt {
    (a * b) >> w
}

fn fdiv(a: &BigInt, b: &BigInt, w: u32) -> BigInt {
    (a << w) / b
}

/// Horner evaluation of an integer polynomial at a real fixed-point.
fn eval_fix(f: &Poly, x: &BigInt, w: u32) -> BigInt {
    let mut acc = BigInt::zero();
    for c in f.coeffs.iter().rev() {
        acc = fmul(&acc, x, w) + (c << w);
    }
    acc
}

/// Horner evaluation at a complex fixed-point `(re, im)`.
fn eval_cfix(f: &Poly, re: &BigInt, im: &BigInt, w: u32) -> (BigInt, BigInt) {
    let mut ar = BigInt::zero();
    let mut ai = BigInt::zero();
    for c in f.coeffs.iter().rev() {
        let nr = fmul(&ar, re, w) - fmul(&ai, im, w) + (c << w);
        let ni = fmul(&ar, im, w) + fmul(&ai, re, w);
        ar = nr;
        ai = ni;
    }
    (ar, ai)
}

/// Newton refinement of a real root seed to `~2^(-(w-16))`; the residual
/// quotient `|T(x)/T'(x)|` must certify `2^(-(p/2)-4)` at the end.
fn newton_real(t: &Poly, dt: &Poly, seed: f64, w: u32, p: u32) -> Result<BigInt> {
    let mut x = f64_to_fix(seed, w);
    let mut last_step = BigInt::one() << w;
    for _ in 0..64 {
        let fx = eval_fix(t, &x, w);
        let dfx = eval_fix(dt, &x, w);
        if dfx.is_zero() {
            return Err(Error::PrecisionLoss);
        }
        let step = fdiv(&fx, &dfx, w);
        x -= &step;
        let sz = step.abs();
        if sz <= BigInt::one() << 16 {
            break;
        }
        last_step = sz;
    }
    let _ = last_step;
    // certificate: Newton correction below the target error
    let fx = eval_fix(t, &x, w);
    let dfx = eval_fix(dt, &x, w);
    if dfx.is_zero() {
        return Err(Error::PrecisionLoss);
    }
    let quot = fdiv(&fx, &dfx, w).abs();
    if quot > (BigInt::one() << (w.saturating_sub(p / 2 + 4))) {
        return Err(Error::PrecisionLoss);
    }
    Ok(x)
}

/// Complex analogue of [`newton_real`].
fn newton_complex(t: &Poly, dt: &Poly, seed: (f64, f64), w: u32, p: u32) -> Result<(BigInt, BigInt)> {
    let mut re = f64_to_fix(seed.0, w);
    let mut im = f64_to_fix(seed.1, w);
    for _ in 0..64 {
        let (fr, fi) = eval_cfix(t, &re, &im, w);
        let (dr, di) = eval_cfix(dt, &re, &im, w);
        let den = fmul(&dr, &dr, w) + fmul(&di, &di, w);
        if den.is_zero() {
            return Err(Error::PrecisionLoss);
        }
        // (fr + i fi) / (dr + i di)
        let sr = fdiv(&(fmul(&fr, &dr, w) + fmul(&fi, &di, w)), &den, w);
        let si = fdiv(&(fmul(&fi, &dr, w) - fmul(&fr, &di, w)), &den, w);
        re -= &sr;
        im -= &si;
        if sr.abs() <= BigInt::one() << 16 && si.abs() <= BigInt::one() << 16 {
            break;
        }
    }
    let (fr, fi) = eval_cfix(t, &re, &im, w);
    let (dr, di) = eval_cfix(dt, &re, &im, w);
    let den = fmul(&dr, &dr, w) + fmul(&di, &di, w);
    if den.is_zero() {
        return Err(Error::PrecisionLoss);
    }
    let qr = fdiv(&(fmul(&fr, &dr, w) + fmul(&fi, &di, w)), &den, w);
    let qi = fdiv(&(fmul(&fi, &dr, w) - fmul(&fr, &di, w)), &den, w);
    let tol = BigInt::one() << (w.saturating_sub(p / 2 + 4));
    if qr.abs() > tol || qi.abs() > tol {
        return Err(Error::PrecisionLoss);
    }
    Ok((re, im))
}

/// Verifies that the polished root set reproduces the coefficients of `T`
/// to `2^(-p/2)`: expand `prod (X - r) * prod (X^2 - 2 Re X + |z|^2)` in
/// fixed point and compare with the exact integer coefficients.
fn certify_factorization(t: &Poly, real: &[BigInt], complex: &[(BigInt, BigInt)], w: u32, p: u32) -> Result<()> {
    // coefficients at scale 2^-w, constant first
    let mut acc: Vec<BigInt> = vec![BigInt::one() << w];
    let mul_linear = |acc: &[BigInt], r: &BigInt| -> Vec<BigInt> {
        // times (X - r)
        let mut out = vec![BigInt::zero(); acc.len() + 1];
        for (i, c) in acc.iter().enumerate() {
            out[i + 1] += c;
            out[i] -= fmul(c, r, w);
        }
        out
    };
    let mul_quadratic = |acc: &[BigInt], b: &BigInt, c0: &BigInt| -> Vec<BigInt> {
        // times (X^2 + b X + c0)
        let mut out = vec![BigInt::zero(); acc.len() + 2];
        for (i, c) in acc.iter().enumerate() {
            out[i + 2] += c;
            out[i + 1] += fmul(c, b, w);
            out[i] += fmul(c, c0, w);
        }
        out
    };
    for r in real {
        acc = mul_linear(&acc, r);
    }
    for (re, im) in complex {
        let b: BigInt = -(re << 1u32);
        let c0 = fmul(re, re, w) + fmul(im, im, w);
        acc = mul_quadratic(&acc, &b, &c0);
    }
    if acc.len() != t.coeffs.len() {
        return Err(Error::PrecisionLoss);
    }
    let tol = BigInt::one() << (w.saturating_sub(p / 2));
    for (approx, exact) in acc.iter().zip(&t.coeffs) {
        if (approx - (exact << w)).abs() > tol {
            return Err(Error::PrecisionLoss);
        }
    }
    Ok(())
}

// ---- fixed-point logarithms ----

/// `ln 2` at scale `2^-w`, by `2 atanh(1/3)`.
fn ln2_fix(w: u32) -> BigInt {
    let third = fdiv(&BigInt::one(), &BigInt::from(3), w);
    atanh_fix(&third, w) << 1
}

/// `atanh(t)` for `0 <= t <= 1/3`, truncated power series.
fn atanh_fix(t: &BigInt, w: u32) -> BigInt {
    let t2 = fmul(t, t, w);
    let mut term = t.clone();
    let mut acc = t.clone();
    let mut k = 3u32;
    loop {
        term = fmul(&term, &t2, w);
        if term.is_zero() {
            break;
        }
        let add = &term / k;
        if add.is_zero() {
            break;
        }
        acc += add;
        k += 2;
    }
    acc
}

/// `ln(x / 2^w)` for positive fixed-point `x`, scale `2^-w`.
fn ln_fix_scaled(x: &BigInt, w: u32, ln2: &BigInt) -> BigInt {
    assert!(x.is_positive());
    // normalise to y/2^w in [1, 2): x = y * 2^j
    let bits = x.bits() as i64;
    let j = bits - 1 - w as i64;
    let y = if j >= 0 { x >> (j as u32) } else { x << ((-j) as u32) };
    // ln(y/2^w) = 2 atanh((y - 2^w)/(y + 2^w))
    let num = &y - (BigInt::one() << w);
    let den = &y + (BigInt::one() << w);
    let t = fdiv(&num, &den, w);
    let frac = atanh_fix(&t, w) << 1;
    frac + ln2 * BigInt::from(j)
}

/// `ln(n)` for a positive integer `n`, at scale `2^-w`.
fn ln_int_fix(n: &BigInt, w: u32, ln2: &BigInt) -> BigInt {
    assert!(n.is_positive());
    ln_fix_scaled(&(n << w), w, ln2)
}

// ===================================================================
// Tests
// ===================================================================

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn poly(cs: &[i64]) -> Poly {
        Poly::from_i64s(cs)
    }

    #[test]
    fn quadratic_fields() {
        let f = make_field(&poly(&[5, 0, 1])).unwrap(); // X^2 + 5
        assert_eq!(f.disc, BigInt::from(-20));
        assert_eq!((f.real_places, f.complex_places, f.unit_rank), (0, 1, 0));

        let f = make_field(&poly(&[-2, 0, 1])).unwrap(); // X^2 - 2
        assert_eq!(f.disc, BigInt::from(8));
        assert_eq!((f.real_places, f.complex_places, f.unit_rank), (2, 0, 1));

        assert!(matches!(
            make_field(&poly(&[-4, 0, 1])),
            Err(Error::Reducible)
        ));
        assert!(matches!(
            make_field(&poly(&[5, 0, 2])),
            Err(Error::NotMonic)
        ));
    }

    #[test]
    fn kummer_fields() {
        let f = make_kummer_field(3, 2).unwrap();
        assert_eq!(f.disc.abs(), BigInt::from(108));
        assert_eq!((f.real_places, f.complex_places), (1, 1));
        let f = make_kummer_field(3, 5).unwrap();
        assert_eq!(f.disc.abs(), BigInt::from(675));
        // 5^5 * 2^4 = 50000
        let f = make_kummer_field(5, 2).unwrap();
        assert_eq!(f.disc.abs(), BigInt::from(50000));
        // (3, 17): 17^2 = 289 = 1 mod 9 fails the monogenicity criterion
        assert!(matches!(
            make_kummer_field(3, 17),
            Err(Error::MonogenicityUnknown)
        ));
        assert!(matches!(make_kummer_field(4, 3), Err(Error::NotPrime(_))));
        assert!(matches!(make_kummer_field(3, 15), Err(Error::NotPrime(_))));
    }

    #[test]
    fn discriminant_cross_check() {
        // |disc(X^n - k)| = n^n k^(n-1) for the acceptance quintet
        for (n, k) in [(3u32, 2u64), (3, 5), (5, 2), (5, 3), (7, 2)] {
            let t = Poly::x_pow_minus(n as usize, BigInt::from(k));
            let d = discriminant(&t).unwrap();
            let expect = BigInt::from(n).pow(n) * BigInt::from(k).pow(n - 1);
            assert_eq!(d.abs(), expect, "n={n} k={k}");
        }
    }

    #[test]
    fn sturm_counts() {
        assert_eq!(sturm_real_roots(&poly(&[-2, 0, 1])), 2); // X^2 - 2
        assert_eq!(sturm_real_roots(&poly(&[5, 0, 1])), 0); // X^2 + 5
        assert_eq!(sturm_real_roots(&poly(&[-2, 0, 0, 1])), 1); // X^3 - 2
        assert_eq!(sturm_real_roots(&poly(&[-1, -3, 0, 1])), 3); // X^3 - 3X - 1
        assert_eq!(sturm_real_roots(&poly(&[1, 0, 0, 0, 1])), 0); // X^4 + 1
        assert_eq!(sturm_real_roots(&poly(&[-2, 0, 0, 0, 0, 1])), 1); // X^5 - 2
    }

    #[test]
    fn norms_fixed_values() {
        let f = make_kummer_field(3, 2).unwrap();
        let theta = FieldElement::theta(f.clone());
        assert_eq!(theta.norm().unwrap(), BigInt::from(2));
        // N(theta - 1) = 1 (a unit); N(1 - theta) = T(1) = -1
        let one = FieldElement::from_integer(f.clone(), BigInt::one());
        let tm1 = theta.sub(&one);
        assert_eq!(tm1.norm().unwrap(), BigInt::one());
        assert_eq!(one.sub(&theta).norm().unwrap(), BigInt::from(-1));
        // rational integers: N(c) = c^n
        let c = FieldElement::from_integer(f.clone(), BigInt::from(-3));
        assert_eq!(c.norm().unwrap(), BigInt::from(-27));
        assert!(matches!(
            FieldElement::from_integer(f, BigInt::zero()).norm(),
            Err(Error::ZeroElement)
        ));
    }

    #[test]
    fn norm_multiplicativity() {
        let fields = [
            make_field(&poly(&[5, 0, 1])).unwrap(),
            make_kummer_field(3, 2).unwrap(),
            make_kummer_field(5, 3).unwrap(),
        ];
        let mut rng = StdRng::seed_from_u64(2024);
        let mut done = 0;
        while done < 500 {
            let f = &fields[done % fields.len()];
            let n = f.degree;
            let a = FieldElement::new(
                f.clone(),
                Poly::new((0..n).map(|_| BigInt::from(rng.gen_range(-20i64..=20))).collect()),
            );
            let b = FieldElement::new(
                f.clone(),
                Poly::new((0..n).map(|_| BigInt::from(rng.gen_range(-20i64..=20))).collect()),
            );
            if a.is_zero() || b.is_zero() {
                continue;
            }
            let lhs = a.mul(&b).norm().unwrap();
            let rhs = a.norm().unwrap() * b.norm().unwrap();
            assert_eq!(lhs, rhs);
            done += 1;
        }
    }

    #[test]
    fn log_embeddings_fixed_values() {
        let f = make_kummer_field(3, 2).unwrap();
        let theta = FieldElement::theta(f.clone());
        let logs = theta.log_embeddings(64).unwrap();
        assert_eq!(logs.len(), 2); // s + t = 1 + 1
        let expect = 2f64.ln() / 3.0;
        for v in &logs {
            assert!((v - expect).abs() < 1e-9, "ln|sigma(theta)| = (ln 2)/3");
        }
        // units have vanishing weighted log sum: theta - 1 has norm 1
        let one = FieldElement::from_integer(f.clone(), BigInt::one());
        let u = theta.sub(&one);
        let logs = u.log_embeddings(64).unwrap();
        let weighted = logs[0] + 2.0 * logs[1];
        assert!(weighted.abs() < 1e-9, "unit log sum, got {weighted}");
        // the rational 1 embeds to zero everywhere
        let logs = one.log_embeddings(64).unwrap();
        assert!(logs.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn log_embeddings_norm_identity_random() {
        let fields = [
            make_field(&poly(&[-2, 0, 1])).unwrap(),
            make_kummer_field(3, 5).unwrap(),
            make_kummer_field(5, 2).unwrap(),
        ];
        let mut rng = StdRng::seed_from_u64(99);
        for trial in 0..30 {
            let f = &fields[trial % fields.len()];
            let n = f.degree;
            let phi = FieldElement::new(
                f.clone(),
                Poly::new((0..n).map(|_| BigInt::from(rng.gen_range(-9i64..=9))).collect()),
            );
            if phi.is_zero() {
                continue;
            }
            let logs = phi.log_embeddings(64).unwrap();
            assert_eq!(logs.len(), f.real_places + f.complex_places);
            let mut sum = 0.0;
            for (i, v) in logs.iter().enumerate() {
                sum += if i < f.real_places { *v } else { 2.0 * v };
            }
            let ln_norm = bigint_log2(&phi.norm().unwrap().abs()) * 2f64.ln();
            assert!(
                (sum - ln_norm).abs() < 1e-6,
                "identity at trial {trial}: {sum} vs {ln_norm}"
            );
        }
    }

    #[test]
    fn log_embeddings_respect_coefficient_bound() {
        // |sigma(phi)| <= (k+1) 2^a (|T|_2 + 1)^k for coefficient height 2^a
        let f = make_kummer_field(3, 2).unwrap();
        let t_norm = bigint_to_f64(&f.poly.norm2_sq()).sqrt() + 1.0;
        let a = 4u32;
        let mut rng = StdRng::seed_from_u64(5);
        for _ in 0..50 {
            let k = rng.gen_range(0..f.degree);
            let phi = FieldElement::new(
                f.clone(),
                Poly::new(
                    (0..=k)
                        .map(|_| BigInt::from(rng.gen_range(-(1i64 << a)..=(1i64 << a))))
                        .collect(),
                ),
            );
            if phi.is_zero() {
                continue;
            }
            let bound = (a as f64) * 2f64.ln()
                + (k as f64) * t_norm.ln()
                + ((k + 1) as f64).ln();
            for v in phi.log_embeddings(64).unwrap() {
                assert!(v <= bound + 1e-9, "v={v} bound={bound}");
            }
        }
    }

    #[test]
    fn minkowski_constants() {
        // X^2 + 1: (2!/4)(4/pi) sqrt(4) = 4/pi < 2
        let f = make_field_assume_monogenic(&poly(&[1, 0, 1])).unwrap();
        assert!((f.minkowski_bound - 4.0 / std::f64::consts::PI).abs() < 1e-12);
        // X^3 - 2: (6/27)(4/pi) sqrt(108) = 2.94...
        let f = make_kummer_field(3, 2).unwrap();
        assert!((f.minkowski_bound - 2.940).abs() < 1e-3);
    }

    #[test]
    fn higher_precision_embeddings() {
        let f = make_kummer_field(3, 2).unwrap();
        let theta = FieldElement::theta(f);
        let logs = theta.log_embeddings(256).unwrap();
        let expect = 2f64.ln() / 3.0;
        assert!((logs[0] - expect).abs() < 1e-12);
    }
}
