//! Exact polynomial arithmetic over `Z` and `F_p`.
//!
//! The module provides the low-level number theory the rest of the crate is
//! built on:
//!
//! * [`Poly`] — dense polynomials with `BigInt` coefficients (constant term
//!   first, trailing zeros trimmed);
//! * [`resultant`] — exact resultants by the subresultant pseudo-remainder
//!   scheme, with the sign normalised so that `res(A, X - c) = A(c)`;
//! * [`factor_mod_p`] — complete factorization of a monic polynomial over
//!   `F_p` by squarefree decomposition, distinct-degree splitting and
//!   randomised equal-degree splitting (Cantor–Zassenhaus);
//! * [`hensel_lift_root`] — Newton lifting of a simple root mod `p` to a
//!   root mod `p^m`;
//! * deterministic Miller–Rabin primality for the 64-bit and big-integer
//!   ranges used by the sieving and descent stages.
//!
//! Everything here is exact; there is no floating point in this module.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

// ===================================================================
// Polynomials over Z
// ===================================================================

/// Dense polynomial over `Z`. `coeffs[i]` is the coefficient of `X^i`;
/// the vector carries no trailing zeros, so `coeffs.is_empty()` iff the
/// polynomial is zero.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Poly {
    pub coeffs: Vec<BigInt>,
}

impl Poly {
    /// Builds a polynomial from coefficients (constant first), trimming
    /// trailing zeros.
    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().map_or(false, |c| c.is_zero()) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn zero() -> Self {
        Poly { coeffs: vec![] }
    }

    pub fn one() -> Self {
        Poly::constant(BigInt::one())
    }

    pub fn x() -> Self {
        Poly::new(vec![BigInt::zero(), BigInt::one()])
    }

    pub fn constant(c: BigInt) -> Self {
        Poly::new(vec![c])
    }

    pub fn from_i64s(cs: &[i64]) -> Self {
        Poly::new(cs.iter().map(|&c| BigInt::from(c)).collect())
    }

    /// `X^n - k`, the defining polynomial of a pure power field.
    pub fn x_pow_minus(n: usize, k: BigInt) -> Self {
        let mut coeffs = vec![BigInt::zero(); n + 1];
        coeffs[0] = -k;
        coeffs[n] = BigInt::one();
        Poly::new(coeffs)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Coefficient of `X^i` (zero beyond the degree).
    pub fn coeff(&self, i: usize) -> BigInt {
        self.coeffs.get(i).cloned().unwrap_or_else(BigInt::zero)
    }

    /// Leading coefficient; zero polynomial yields 0.
    pub fn lc(&self) -> BigInt {
        self.coeffs.last().cloned().unwrap_or_else(BigInt::zero)
    }

    pub fn is_monic(&self) -> bool {
        self.lc().is_one()
    }

    pub fn neg(&self) -> Poly {
        Poly::new(self.coeffs.iter().map(|c| -c).collect())
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            out.push(self.coeff(i) + other.coeff(i));
        }
        Poly::new(out)
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![BigInt::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }

    pub fn mul_scalar(&self, s: &BigInt) -> Poly {
        Poly::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    /// Multiplication by `X^k`.
    pub fn shift(&self, k: usize) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![BigInt::zero(); k];
        out.extend(self.coeffs.iter().cloned());
        Poly::new(out)
    }

    /// Horner evaluation at an integer point.
    pub fn eval(&self, x: &BigInt) -> BigInt {
        let mut acc = BigInt::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    /// Horner evaluation modulo `m` (result in `[0, m)`).
    pub fn eval_mod(&self, x: &BigInt, m: &BigInt) -> BigInt {
        let mut acc = BigInt::zero();
        for c in self.coeffs.iter().rev() {
            acc = (acc * x + c).mod_floor(m);
        }
        acc
    }

    pub fn derivative(&self) -> Poly {
        if self.coeffs.len() <= 1 {
            return Poly::zero();
        }
        Poly::new(
            self.coeffs[1..]
                .iter()
                .enumerate()
                .map(|(i, c)| c * BigInt::from(i + 1))
                .collect(),
        )
    }

    /// Remainder of `self` modulo a *monic* divisor; exact over `Z`.
    pub fn rem_monic(&self, t: &Poly) -> Poly {
        assert!(t.is_monic(), "rem_monic requires a monic divisor");
        let d = t.degree().unwrap();
        let mut r = self.coeffs.clone();
        while r.len() > d {
            let q = r.pop().unwrap();
            if q.is_zero() {
                continue;
            }
            let off = r.len() - d;
            for i in 0..d {
                r[off + i] -= &q * &t.coeffs[i];
            }
        }
        Poly::new(r)
    }

    /// Pseudo-remainder: the unique `R` with
    /// `lc(B)^(deg A - deg B + 1) * A = Q*B + R` and `deg R < deg B`.
    /// The scaling exponent is exactly `deg A - deg B + 1` even when leading
    /// terms cancel early — the subresultant scheme depends on it.
    pub fn pseudo_rem(&self, b: &Poly) -> Poly {
        let db = b.degree().expect("pseudo_rem by zero");
        let da = match self.degree() {
            Some(d) if d >= db => d,
            _ => return self.clone(),
        };
        let lb = b.lc();
        let mut steps = 0u32;
        let mut r = self.clone();
        while let Some(dr) = r.degree() {
            if dr < db {
                break;
            }
            // r <- lb * r - lc(r) * X^(dr-db) * b
            let lr = r.lc();
            let mut next = r.mul_scalar(&lb);
            let sub = b.shift(dr - db).mul_scalar(&lr);
            next = next.sub(&sub);
            debug_assert!(next.degree().map_or(true, |d| d < dr));
            r = next;
            steps += 1;
        }
        let full = (da - db) as u32 + 1;
        if steps < full {
            r = r.mul_scalar(&lb.pow(full - steps));
        }
        r
    }

    /// Content: gcd of the coefficients (non-negative).
    pub fn content(&self) -> BigInt {
        let mut g = BigInt::zero();
        for c in &self.coeffs {
            g = g.gcd(c);
        }
        g
    }

    /// Squared Euclidean norm of the coefficient vector.
    pub fn norm2_sq(&self) -> BigInt {
        self.coeffs.iter().map(|c| c * c).sum()
    }

    /// Divides all coefficients by `d`; panics if the division is not exact.
    pub fn div_exact(&self, d: &BigInt) -> Poly {
        Poly::new(
            self.coeffs
                .iter()
                .map(|c| {
                    let (q, r) = c.div_rem(d);
                    assert!(r.is_zero(), "non-exact polynomial division");
                    q
                })
                .collect(),
        )
    }
}

impl std::fmt::Debug for Poly {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self)
    }
}

impl std::fmt::Display for Poly {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
                first = false;
            } else if c.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let a = c.abs();
            if i == 0 {
                write!(f, "{}", a)?;
            } else {
                if !a.is_one() {
                    write!(f, "{}*", a)?;
                }
                if i == 1 {
                    write!(f, "x")?;
                } else {
                    write!(f, "x^{}", i)?;
                }
            }
        }
        Ok(())
    }
}

// ===================================================================
// Resultants
// ===================================================================

/// Exact resultant of two nonzero integer polynomials.
///
/// Computed by the subresultant pseudo-remainder sequence (Collins; see
/// Cohen, Algorithm 3.3.7), which keeps every intermediate value integral.
/// The sign is normalised so that
///
/// ```text
/// res(A, B) = lc(B)^deg(A) * prod A(beta)   over the roots beta of B,
/// ```
///
/// equivalently `(-1)^(deg A * deg B)` times the classical resultant. In
/// particular `res(A, X - c) = A(c)` for every `A`, and for a monic `T`
/// the norm of the residue class of `A` in `Q[X]/(T)` is `res(A, T)`.
/// Returns zero exactly when the inputs share a nonconstant factor.
pub fn resultant(a: &Poly, b: &Poly) -> Result<BigInt> {
    if a.is_zero() || b.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    let flip = (a.degree().unwrap() * b.degree().unwrap()) % 2 == 1;
    let r = resultant_classical(a, b);
    Ok(if flip { -r } else { r })
}

/// Classical resultant `lc(A)^deg(B) * prod B(alpha)` over roots of `A`.
fn resultant_classical(a: &Poly, b: &Poly) -> BigInt {
    let (mut a, mut b) = (a.clone(), b.clone());
    let mut sign = BigInt::one();
    if a.degree().unwrap() < b.degree().unwrap() {
        if (a.degree().unwrap() * b.degree().unwrap()) % 2 == 1 {
            sign = -sign;
        }
        std::mem::swap(&mut a, &mut b);
    }
    if b.degree().unwrap() == 0 {
        // res(A, const) = const^deg(A)
        return sign * b.lc().pow(a.degree().unwrap() as u32);
    }
    // Pull out contents: res(c*A, B) = c^deg(B) * res(A, B).
    let ca = a.content();
    let cb = b.content();
    let mut t = ca.pow(b.degree().unwrap() as u32) * cb.pow(a.degree().unwrap() as u32);
    a = a.div_exact(&ca);
    b = b.div_exact(&cb);

    let mut g = BigInt::one();
    let mut h = BigInt::one();
    loop {
        let da = a.degree().unwrap();
        let db = b.degree().unwrap();
        let delta = (da - db) as u32;
        if da % 2 == 1 && db % 2 == 1 {
            sign = -sign;
        }
        let r = a.pseudo_rem(&b);
        a = b;
        if r.is_zero() {
            // Common factor of positive degree: resultant vanishes.
            return BigInt::zero();
        }
        let denom = &g * h.pow(delta);
        b = r.div_exact(&denom);
        g = a.lc();
        // h <- g^delta * h^(1 - delta), kept integral by exact division.
        h = if delta == 0 {
            h
        } else {
            let num = g.pow(delta);
            let den = h.pow(delta - 1);
            let (q, rem) = num.div_rem(&den);
            assert!(rem.is_zero());
            q
        };
        if b.degree().unwrap() == 0 {
            let da = a.degree().unwrap() as u32;
            // final h <- lc(b)^deg(a) / h^(deg(a) - 1)
            let num = b.lc().pow(da);
            let den = h.pow(da.saturating_sub(1));
            let (q, rem) = num.div_rem(&den);
            assert!(rem.is_zero());
            t *= q;
            return sign * t;
        }
    }
}

/// Resultant by a Sylvester-matrix determinant (classical sign). Quadratic
/// in the degrees and kept deliberately independent of [`resultant`]; used
/// as a cross-check oracle in tests.
pub fn resultant_sylvester(a: &Poly, b: &Poly) -> Result<BigInt> {
    if a.is_zero() || b.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    let m = a.degree().unwrap();
    let n = b.degree().unwrap();
    if m + n == 0 {
        return Ok(BigInt::one());
    }
    let size = m + n;
    let mut mat = vec![vec![BigInt::zero(); size]; size];
    for row in 0..n {
        for (j, c) in a.coeffs.iter().enumerate() {
            mat[row][row + m - j] = c.clone();
        }
    }
    for row in 0..m {
        for (j, c) in b.coeffs.iter().enumerate() {
            mat[n + row][row + n - j] = c.clone();
        }
    }
    Ok(det_bareiss(&mut mat))
}

/// Fraction-free determinant (Bareiss). Consumes the matrix.
pub fn det_bareiss(mat: &mut [Vec<BigInt>]) -> BigInt {
    let n = mat.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if mat[k][k].is_zero() {
            // pivot search
            match (k + 1..n).find(|&i| !mat[i][k].is_zero()) {
                Some(i) => {
                    mat.swap(k, i);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = &mat[i][j] * &mat[k][k] - &mat[i][k] * &mat[k][j];
                let (q, r) = num.div_rem(&prev);
                debug_assert!(r.is_zero());
                mat[i][j] = q;
            }
            mat[i][k] = BigInt::zero();
        }
        prev = mat[k][k].clone();
    }
    sign * mat[n - 1][n - 1].clone()
}

// ===================================================================
// Polynomials over F_p
// ===================================================================

/// Dense polynomial over `F_p` for a word-sized prime `p`. Coefficients are
/// reduced representatives in `[0, p)`, constant term first, no trailing
/// zeros.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PolyModP {
    pub coeffs: Vec<u64>,
    pub p: u64,
}

fn addm(a: u64, b: u64, p: u64) -> u64 {
    let s = a as u128 + b as u128;
    (s % p as u128) as u64
}

fn subm(a: u64, b: u64, p: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        a + p - b
    }
}

fn mulm(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn powm(mut a: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1 % p;
    a %= p;
    while e > 0 {
        if e & 1 == 1 {
            acc = mulm(acc, a, p);
        }
        a = mulm(a, a, p);
        e >>= 1;
    }
    acc
}

fn invm(a: u64, p: u64) -> u64 {
    // p prime, a != 0 mod p
    powm(a, p - 2, p)
}

impl PolyModP {
    pub fn new(mut coeffs: Vec<u64>, p: u64) -> Self {
        for c in coeffs.iter_mut() {
            *c %= p;
        }
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        PolyModP { coeffs, p }
    }

    /// Reduction of an integer polynomial mod `p`.
    pub fn from_poly(f: &Poly, p: u64) -> Self {
        let pb = BigInt::from(p);
        PolyModP::new(
            f.coeffs
                .iter()
                .map(|c| {
                    let r = c.mod_floor(&pb);
                    r.to_u64_digits().1.first().copied().unwrap_or(0)
                })
                .collect(),
            p,
        )
    }

    /// Lift to an integer polynomial with coefficients in `[0, p)`.
    pub fn lift(&self) -> Poly {
        Poly::new(self.coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn zero(p: u64) -> Self {
        PolyModP { coeffs: vec![], p }
    }

    pub fn one(p: u64) -> Self {
        PolyModP::new(vec![1], p)
    }

    pub fn x(p: u64) -> Self {
        PolyModP::new(vec![0, 1], p)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.coeffs == [1]
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn lc(&self) -> u64 {
        *self.coeffs.last().unwrap_or(&0)
    }

    pub fn coeff(&self, i: usize) -> u64 {
        self.coeffs.get(i).copied().unwrap_or(0)
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        PolyModP::new(
            (0..n)
                .map(|i| addm(self.coeff(i), other.coeff(i), self.p))
                .collect(),
            self.p,
        )
    }

    pub fn sub(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        PolyModP::new(
            (0..n)
                .map(|i| subm(self.coeff(i), other.coeff(i), self.p))
                .collect(),
            self.p,
        )
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return PolyModP::zero(self.p);
        }
        let mut out = vec![0u64; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] = addm(out[i + j], mulm(a, b, self.p), self.p);
            }
        }
        PolyModP::new(out, self.p)
    }

    pub fn mul_scalar(&self, s: u64) -> Self {
        PolyModP::new(
            self.coeffs.iter().map(|&c| mulm(c, s, self.p)).collect(),
            self.p,
        )
    }

    /// Quotient and remainder by a nonzero divisor.
    pub fn div_rem(&self, d: &Self) -> (Self, Self) {
        let dd = d.degree().expect("division by zero poly");
        let inv_lc = invm(d.lc(), self.p);
        let mut r = self.coeffs.clone();
        let mut q = vec![0u64; self.coeffs.len().saturating_sub(dd)];
        while r.len() > dd {
            let c = mulm(*r.last().unwrap(), inv_lc, self.p);
            let off = r.len() - 1 - dd;
            if c != 0 {
                q[off] = c;
                for i in 0..=dd {
                    r[off + i] = subm(r[off + i], mulm(c, d.coeffs[i], self.p), self.p);
                }
            }
            r.pop();
        }
        (PolyModP::new(q, self.p), PolyModP::new(r, self.p))
    }

    pub fn rem(&self, d: &Self) -> Self {
        self.div_rem(d).1
    }

    /// Monic scaling (unit normalization).
    pub fn monic(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        self.mul_scalar(invm(self.lc(), self.p))
    }

    pub fn gcd(&self, other: &Self) -> Self {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() <= 1 {
            return PolyModP::zero(self.p);
        }
        PolyModP::new(
            self.coeffs[1..]
                .iter()
                .enumerate()
                .map(|(i, &c)| mulm(c, (i as u64 + 1) % self.p, self.p))
                .collect(),
            self.p,
        )
    }

    /// `self^e mod m`, square-and-multiply with a big exponent.
    pub fn powmod(&self, e: &BigUint, m: &Self) -> Self {
        let mut acc = PolyModP::one(self.p);
        let mut base = self.rem(m);
        for i in 0..e.bits() {
            if e.bit(i) {
                acc = acc.mul(&base).rem(m);
            }
            base = base.mul(&base).rem(m);
        }
        acc
    }

    /// Replaces `X` by `X^(1/p)`: valid when every exponent with a nonzero
    /// coefficient is a multiple of `p` (Frobenius is the identity on `F_p`).
    fn pth_root(&self) -> Self {
        let p = self.p as usize;
        let mut out = vec![];
        for (i, &c) in self.coeffs.iter().enumerate() {
            if i % p == 0 {
                out.push(c);
            } else {
                debug_assert_eq!(c, 0, "pth_root of a non p-th power");
            }
        }
        PolyModP::new(out, self.p)
    }
}

impl std::fmt::Debug for PolyModP {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} (mod {})", self.lift(), self.p)
    }
}

// ===================================================================
// Factorization over F_p
// ===================================================================

/// Complete factorization of `f` mod `p` into monic irreducibles with
/// multiplicities, sorted by `(degree, coefficient vector)`.
///
/// Squarefree decomposition handles vanishing derivatives by p-th root
/// extraction; squarefree parts are split by distinct-degree powering and
/// Cantor–Zassenhaus equal-degree splitting. The randomised splitting draws
/// from a generator seeded deterministically from `(p, f)`, so the output —
/// which is canonical anyway — is reproduced bit-for-bit on every call.
pub fn factor_mod_p(f: &Poly, p: u64) -> Result<Vec<(PolyModP, u32)>> {
    if !is_prime_u64(p) {
        return Err(Error::NotPrime(BigInt::from(p)));
    }
    let fp = PolyModP::from_poly(f, p);
    let mut seed = [0u8; 32];
    seed[..8].copy_from_slice(&p.to_le_bytes());
    for (i, &c) in fp.coeffs.iter().enumerate() {
        seed[8 + (i % 24)] ^= (c as u8).wrapping_add(i as u8);
    }
    let mut rng = ChaCha8Rng::from_seed(seed);
    factor_mod_p_with_rng(f, p, &mut rng)
}

/// As [`factor_mod_p`] but drawing splitting elements from the caller's
/// generator.
pub fn factor_mod_p_with_rng<R: Rng>(f: &Poly, p: u64, rng: &mut R) -> Result<Vec<(PolyModP, u32)>> {
    if !is_prime_u64(p) {
        return Err(Error::NotPrime(BigInt::from(p)));
    }
    let fp = PolyModP::from_poly(f, p).monic();
    if fp.degree().unwrap_or(0) == 0 {
        return Ok(vec![]);
    }
    let mut out = vec![];
    for (part, mult) in squarefree_decomposition(&fp) {
        for (d, product) in distinct_degree(&part) {
            for g in equal_degree_split(&product, d, rng) {
                out.push((g, mult));
            }
        }
    }
    out.sort_by(|a, b| {
        (a.0.degree(), &a.0.coeffs, a.1).cmp(&(b.0.degree(), &b.0.coeffs, b.1))
    });
    Ok(out)
}

/// Yun-style squarefree decomposition over `F_p`, with the `f' = 0` branch
/// resolved by p-th roots. Returns `(g_i, m_i)` with `f = prod g_i^(m_i)`,
/// each `g_i` squarefree.
fn squarefree_decomposition(f: &PolyModP) -> Vec<(PolyModP, u32)> {
    let p = f.p;
    let mut out: Vec<(PolyModP, u32)> = vec![];
    let deriv = f.derivative();
    if deriv.is_zero() {
        // f = g(X^p) = g~(X)^p
        let root = f.pth_root();
        for (g, m) in squarefree_decomposition(&root) {
            out.push((g, m * p as u32));
        }
        return out;
    }
    let mut g = f.gcd(&deriv);
    let mut w = f.div_rem(&g).0.monic();
    let mut i = 1u32;
    while !w.is_one() {
        let y = w.gcd(&g);
        let z = w.div_rem(&y).0.monic();
        if z.degree().unwrap_or(0) > 0 {
            out.push((z, i));
        }
        i += 1;
        w = y;
        g = g.div_rem(&w).0.monic();
    }
    if g.degree().unwrap_or(0) > 0 {
        // remaining p-th power part
        let root = g.pth_root();
        for (h, m) in squarefree_decomposition(&root) {
            out.push((h, m * p as u32));
        }
    }
    out
}

/// Distinct-degree splitting of a squarefree monic `f`: returns pairs
/// `(d, product of all irreducible factors of degree d)`.
fn distinct_degree(f: &PolyModP) -> Vec<(usize, PolyModP)> {
    let p = f.p;
    let mut out = vec![];
    let mut f = f.clone();
    let mut h = PolyModP::x(p);
    let mut d = 0usize;
    while f.degree().unwrap_or(0) > 0 {
        d += 1;
        if 2 * d > f.degree().unwrap() {
            // what is left is irreducible
            out.push((f.degree().unwrap(), f.clone()));
            break;
        }
        h = h.powmod(&BigUint::from(p), &f);
        let g = h.sub(&PolyModP::x(p)).gcd(&f);
        if g.degree().unwrap_or(0) > 0 {
            out.push((d, g.clone()));
            f = f.div_rem(&g).0.monic();
            h = h.rem(&f);
        }
    }
    out
}

/// Cantor–Zassenhaus equal-degree splitting: `f` is a squarefree monic
/// product of irreducibles all of degree `d`.
fn equal_degree_split<R: Rng>(f: &PolyModP, d: usize, rng: &mut R) -> Vec<PolyModP> {
    let p = f.p;
    let n = f.degree().unwrap();
    if n == d {
        return vec![f.monic()];
    }
    loop {
        // random nonconstant element of F_p[X]/(f)
        let a = PolyModP::new((0..n).map(|_| rng.gen_range(0..p)).collect(), p);
        if a.degree().unwrap_or(0) == 0 {
            continue;
        }
        let g = if p == 2 {
            // trace map: a + a^2 + a^4 + ... + a^(2^(d-1))
            let mut t = a.clone();
            let mut acc = a.clone();
            for _ in 1..d {
                t = t.mul(&t).rem(f);
                acc = acc.add(&t);
            }
            acc.gcd(f)
        } else {
            // a^((p^d - 1)/2) - 1
            let e = (BigUint::from(p).pow(d as u32) - BigUint::one()) / BigUint::from(2u32);
            let b = a.powmod(&e, f);
            b.sub(&PolyModP::one(p)).gcd(f)
        };
        let dg = g.degree().unwrap_or(0);
        if dg > 0 && dg < n {
            let h = f.div_rem(&g).0.monic();
            let mut out = equal_degree_split(&g, d, rng);
            out.extend(equal_degree_split(&h, d, rng));
            return out;
        }
    }
}

// ===================================================================
// Hensel lifting
// ===================================================================

/// Lifts a simple root `v` of `T` mod `p` to the unique root mod `p^m`
/// congruent to `v`, by Newton iteration with doubling precision.
///
/// Errors with [`Error::NotRoot`] when `T(v) != 0 mod p` and
/// [`Error::NotSimpleRoot`] when `T'(v) = 0 mod p`.
pub fn hensel_lift_root(t: &Poly, p: u64, v: &BigInt, m: u32) -> Result<BigInt> {
    assert!(m >= 1);
    let pb = BigInt::from(p);
    let mut x = v.mod_floor(&pb);
    if !t.eval_mod(&x, &pb).is_zero() {
        return Err(Error::NotRoot);
    }
    let dt = t.derivative();
    if dt.eval_mod(&x, &pb).is_zero() {
        return Err(Error::NotSimpleRoot);
    }
    let mut k = 1u32;
    while k < m {
        k = (2 * k).min(m);
        let modulus = pb.pow(k);
        // x <- x - T(x) / T'(x)  (mod p^k); T'(x) is a unit mod p^k
        let fx = t.eval_mod(&x, &modulus);
        let dfx = dt.eval_mod(&x, &modulus);
        let inv = modinv(&dfx, &modulus).expect("derivative is a unit");
        x = (&x - fx * inv).mod_floor(&modulus);
    }
    debug_assert!(t.eval_mod(&x, &pb.pow(m)).is_zero());
    Ok(x)
}

/// Modular inverse of `a` mod `m` (m > 1), if it exists.
pub fn modinv(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let g = a.extended_gcd(m);
    if g.gcd.is_one() {
        Some(g.x.mod_floor(m))
    } else {
        None
    }
}

// ===================================================================
// Primality and small primes
// ===================================================================

/// Deterministic Miller–Rabin for 64-bit integers (fixed witness set,
/// sound for all n < 3.3 * 10^24).
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &q in &[2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == q {
            return true;
        }
        if n % q == 0 {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0u32;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &[2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = powm(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulm(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Miller–Rabin for big integers with the same fixed witness set; a strong
/// probable-prime test beyond the proven 64-bit range (ample for the desk
/// scales this crate targets).
pub fn is_prime(n: &BigInt) -> bool {
    if let Ok(small) = u64::try_from(n) {
        return is_prime_u64(small);
    }
    if n.is_negative() || n.is_even() {
        return false;
    }
    let one = BigInt::one();
    let nm1 = n - &one;
    let mut d = nm1.clone();
    let mut s = 0u64;
    while d.is_even() {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &[2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let ab = BigInt::from(a);
        let mut x = ab.modpow(&d, n);
        if x.is_one() || x == nm1 {
            continue;
        }
        for _ in 1..s {
            x = x.modpow(&BigInt::from(2u32), n);
            if x == nm1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// All primes `<= bound` by a plain sieve of Eratosthenes.
pub fn primes_up_to(bound: u64) -> Vec<u64> {
    if bound < 2 {
        return vec![];
    }
    let n = bound as usize;
    let mut composite = vec![false; n + 1];
    let mut out = vec![];
    for i in 2..=n {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

/// Factors a positive integer into `(prime, exponent)` pairs: trial division
/// by primes `<= trial_bound`, then Pollard rho with Brent cycling on what
/// remains. Errors with [`Error::Unfactored`] if a composite cofactor
/// survives the configured effort (only conceivable far beyond desk scale).
pub fn factor_integer(n: &BigInt, trial_bound: u64) -> Result<Vec<(BigInt, u32)>> {
    let mut n = n.abs();
    if n.is_zero() {
        return Err(Error::InvalidInput("cannot factor zero".into()));
    }
    let mut out: Vec<(BigInt, u32)> = vec![];
    for p in primes_up_to(trial_bound.max(2)) {
        let pb = BigInt::from(p);
        if (&pb * &pb) > n {
            break;
        }
        let mut e = 0u32;
        loop {
            let (q, r) = n.div_rem(&pb);
            if r.is_zero() {
                n = q;
                e += 1;
            } else {
                break;
            }
        }
        if e > 0 {
            out.push((pb, e));
        }
    }
    let mut stack = vec![n];
    while let Some(m) = stack.pop() {
        if m.is_one() {
            continue;
        }
        if is_prime(&m) {
            match out.iter_mut().find(|(p, _)| *p == m) {
                Some(entry) => entry.1 += 1,
                None => out.push((m, 1)),
            }
            continue;
        }
        let d = pollard_rho(&m).ok_or_else(|| Error::Unfactored(m.clone()))?;
        stack.push(&m / &d);
        stack.push(d);
    }
    out.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(out)
}

/// Brent-cycle Pollard rho; returns a nontrivial divisor of composite `m`.
fn pollard_rho(m: &BigInt) -> Option<BigInt> {
    if m.is_even() {
        return Some(BigInt::from(2u32));
    }
    let one = BigInt::one();
    for c in 1u64..64 {
        let cb = BigInt::from(c);
        let f = |x: &BigInt| (x * x + &cb).mod_floor(m);
        let mut x = BigInt::from(2u32);
        let mut y = x.clone();
        let mut d = one.clone();
        let mut iter = 0u64;
        while d.is_one() && iter < 1 << 20 {
            x = f(&x);
            y = f(&f(&y));
            d = (&x - &y).abs().gcd(m);
            iter += 1;
        }
        if !d.is_one() && &d != m {
            return Some(d);
        }
    }
    None
}

// ===================================================================
// Tests
// ===================================================================
