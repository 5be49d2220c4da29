//! Exact integer linear algebra.
//!
//! Everything the pipeline needs from lattices, with no floating point:
//!
//! * [`IntMatrix`] — dense `BigInt` matrices;
//! * [`IntMatrix::hnf`] — row Hermite normal form `H = U * M` with a
//!   unimodular transform, pivots positive, entries above pivots reduced,
//!   zero rows collected at the bottom;
//! * [`IntMatrix::snf`] — Smith invariant factors `d_1 | d_2 | ...`;
//! * [`IntMatrix::solve_left`] — exact rational solutions of `X * M = b`
//!   with integrality reporting and a left-kernel basis, which doubles as
//!   the lattice membership test (`b` lies in the row lattice iff the
//!   canonical solution is integral);
//! * [`lll`] — Lovász-reduced bases computed in exact rational arithmetic;
//! * [`enumerate_sup_box`] — complete enumeration of the lattice points of
//!   sup-norm at most a bound, by Fincke–Pohst pruning with outward-rounded
//!   exact bounds (no point is ever missed to rounding).
//!
//! Sizes here are desk scale (dozens of rows, word-sized to few-limb
//! entries), so the implementations favour clarity and exactness over
//! asymptotic tricks; the HNF reduces above pivots as it goes, which keeps
//! intermediate entries small in practice.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::{Error, Result};

/// Dense row-major matrix over `Z`.
#[derive(Clone, PartialEq, Eq)]
pub struct IntMatrix {
    pub rows: usize,
    pub cols: usize,
    data: Vec<BigInt>,
}

impl IntMatrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        IntMatrix {
            rows,
            cols,
            data: vec![BigInt::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = IntMatrix::zero(n, n);
        for i in 0..n {
            m[(i, i)] = BigInt::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<BigInt>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        IntMatrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn from_i64s(rows: &[&[i64]]) -> Self {
        IntMatrix::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
                .collect(),
        )
    }

    pub fn row(&self, i: usize) -> &[BigInt] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn rows_iter(&self) -> impl Iterator<Item = &[BigInt]> {
        (0..self.rows).map(move |i| self.row(i))
    }

    pub fn is_zero_row(&self, i: usize) -> bool {
        self.row(i).iter().all(|x| x.is_zero())
    }

    fn swap_rows(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        for k in 0..self.cols {
            self.data.swap(i * self.cols + k, j * self.cols + k);
        }
    }

    fn negate_row(&mut self, i: usize) {
        for k in 0..self.cols {
            let idx = i * self.cols + k;
            self.data[idx] = -std::mem::take(&mut self.data[idx]);
        }
    }

    /// row_i -= q * row_j
    fn sub_mul_row(&mut self, i: usize, j: usize, q: &BigInt) {
        if q.is_zero() {
            return;
        }
        for k in 0..self.cols {
            let v = &self.data[j * self.cols + k] * q;
            self.data[i * self.cols + k] -= v;
        }
    }

    /// Applies the 2x2 unimodular transform `[[a, b], [c, d]]` to rows
    /// `(i, j)`: row_i' = a*row_i + b*row_j, row_j' = c*row_i + d*row_j.
    fn transform_rows(&mut self, i: usize, j: usize, a: &BigInt, b: &BigInt, c: &BigInt, d: &BigInt) {
        for k in 0..self.cols {
            let x = self.data[i * self.cols + k].clone();
            let y = self.data[j * self.cols + k].clone();
            self.data[i * self.cols + k] = a * &x + b * &y;
            self.data[j * self.cols + k] = c * &x + d * &y;
        }
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, other.rows);
        let mut out = IntMatrix::zero(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let v = a * &other[(k, j)];
                    out[(i, j)] += v;
                }
            }
        }
        out
    }

    /// Stacks `other` below `self`.
    pub fn vstack(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, other.cols);
        let mut data = self.data.clone();
        data.extend(other.data.iter().cloned());
        IntMatrix {
            rows: self.rows + other.rows,
            cols: self.cols,
            data,
        }
    }

    /// Determinant of a square matrix (fraction-free Bareiss elimination).
    pub fn det(&self) -> BigInt {
        assert_eq!(self.rows, self.cols);
        let mut work: Vec<Vec<BigInt>> = self.rows_iter().map(|r| r.to_vec()).collect();
        crate::arith::det_bareiss(&mut work)
    }

    // ---------------------------------------------------------------
    // Hermite normal form
    // ---------------------------------------------------------------

    /// Row Hermite normal form with transform: returns `(H, U)` with
    /// `H = U * self`, `U` unimodular. `H` is in row echelon shape with
    /// positive pivots, entries above each pivot reduced into `[0, pivot)`,
    /// and zero rows at the bottom. Entries are kept small by reducing
    /// above pivots as soon as each pivot is final.
    pub fn hnf(&self) -> (IntMatrix, IntMatrix) {
        let mut h = self.clone();
        let mut u = IntMatrix::identity(self.rows);
        let mut pr = 0usize; // next pivot row
        for col in 0..self.cols {
            // move a nonzero entry into the pivot position
            let Some(start) = (pr..self.rows).find(|&i| !h[(i, col)].is_zero()) else {
                continue;
            };
            h.swap_rows(pr, start);
            u.swap_rows(pr, start);
            // gcd out the rest of the column below the pivot
            for i in pr + 1..self.rows {
                if h[(i, col)].is_zero() {
                    continue;
                }
                let a = h[(pr, col)].clone();
                let b = h[(i, col)].clone();
                let g = a.extended_gcd(&b);
                // [[x, y], [-b/g, a/g]] is unimodular and sends (a, b) to (g, 0)
                let bg = -(&b / &g.gcd);
                let ag = &a / &g.gcd;
                h.transform_rows(pr, i, &g.x, &g.y, &bg, &ag);
                u.transform_rows(pr, i, &g.x, &g.y, &bg, &ag);
            }
            if h[(pr, col)].is_negative() {
                h.negate_row(pr);
                u.negate_row(pr);
            }
            // reduce the entries above the new pivot
            let pivot = h[(pr, col)].clone();
            for i in 0..pr {
                let q = h[(i, col)].div_floor(&pivot);
                h.sub_mul_row(i, pr, &q);
                u.sub_mul_row(i, pr, &q);
            }
            pr += 1;
            if pr == self.rows {
                break;
            }
        }
        (h, u)
    }

    /// Pivot columns of a matrix already in row echelon (HNF) shape.
    pub fn pivot_cols(&self) -> Vec<usize> {
        let mut out = vec![];
        for i in 0..self.rows {
            if let Some(j) = self.row(i).iter().position(|x| !x.is_zero()) {
                out.push(j);
            }
        }
        out
    }

    /// Rank of the row lattice (via HNF).
    pub fn rank(&self) -> usize {
        self.hnf().0.pivot_cols().len()
    }

    /// Nonzero rows of the HNF — the canonical basis of the row lattice.
    pub fn hnf_basis(&self) -> IntMatrix {
        let (h, _) = self.hnf();
        let rows: Vec<Vec<BigInt>> = (0..h.rows)
            .filter(|&i| !h.is_zero_row(i))
            .map(|i| h.row(i).to_vec())
            .collect();
        if rows.is_empty() {
            IntMatrix::zero(0, self.cols)
        } else {
            IntMatrix::from_rows(rows)
        }
    }

    // ---------------------------------------------------------------
    // Smith normal form
    // ---------------------------------------------------------------

    /// Smith invariant factors `d_1 | d_2 | ... | d_r` followed by zeros up
    /// to `min(rows, cols)` when the rank is deficient.
    pub fn snf(&self) -> Vec<BigInt> {
        let n = self.rows.min(self.cols);
        let mut a: Vec<Vec<BigInt>> = self.rows_iter().map(|r| r.to_vec()).collect();
        let mut t = 0usize;
        'corner: while t < n {
            // find a nonzero entry of smallest magnitude in the submatrix
            let mut best: Option<(usize, usize)> = None;
            for i in t..self.rows {
                for j in t..self.cols {
                    if a[i][j].is_zero() {
                        continue;
                    }
                    if best.map_or(true, |(bi, bj)| a[i][j].abs() < a[bi][bj].abs()) {
                        best = Some((i, j));
                    }
                }
            }
            let Some((bi, bj)) = best else { break };
            a.swap(t, bi);
            for row in a.iter_mut() {
                row.swap(t, bj);
            }
            // eliminate row and column t; restart if a remainder shrinks the corner
            loop {
                let mut clean = true;
                for i in t + 1..self.rows {
                    if a[i][t].is_zero() {
                        continue;
                    }
                    let q = a[i][t].div_floor(&a[t][t]);
                    for j in t..self.cols {
                        let v = &a[t][j] * &q;
                        a[i][j] -= v;
                    }
                    if !a[i][t].is_zero() {
                        a.swap(t, i); // strictly smaller corner
                        clean = false;
                    }
                }
                for j in t + 1..self.cols {
                    if a[t][j].is_zero() {
                        continue;
                    }
                    let q = a[t][j].div_floor(&a[t][t]);
                    for row in a.iter_mut().skip(t) {
                        let v = &row[t] * &q;
                        row[j] -= v;
                    }
                    if !a[t][j].is_zero() {
                        for row in a.iter_mut() {
                            row.swap(t, j);
                        }
                        clean = false;
                    }
                }
                if clean {
                    break;
                }
            }
            // corner must divide every remaining entry
            for i in t + 1..self.rows {
                for j in t + 1..self.cols {
                    if !a[i][j].mod_floor(&a[t][t]).is_zero() {
                        // fold the offending row into row t and redo the corner
                        for k in t..self.cols {
                            let v = a[i][k].clone();
                            a[t][k] += v;
                        }
                        continue 'corner;
                    }
                }
            }
            if a[t][t].is_negative() {
                for j in t..self.cols {
                    a[t][j] = -std::mem::take(&mut a[t][j]);
                }
            }
            t += 1;
        }
        (0..n).map(|i| a[i][i].abs()).collect()
    }

    // ---------------------------------------------------------------
    // Left solves and lattice membership
    // ---------------------------------------------------------------

    /// Solves `X * self = b` exactly over the rationals.
    ///
    /// The canonical solution is computed through the HNF (free coordinates
    /// set to zero), so `b` lies in the *row lattice* of `self` iff the
    /// returned solution is integral — the membership test used throughout
    /// the solver. A basis of the integer left kernel comes along for free
    /// as the transform rows that map to zero HNF rows.
    pub fn solve_left(&self, b: &[BigInt]) -> Result<LeftSolution> {
        assert_eq!(b.len(), self.cols);
        let (h, u) = self.hnf();
        let pivots = h.pivot_cols();
        let rank = pivots.len();
        // forward substitution for Y with Y * H = b
        let mut residual: Vec<BigRational> = b
            .iter()
            .map(|x| BigRational::from_integer(x.clone()))
            .collect();
        let mut y: Vec<BigRational> = vec![BigRational::zero(); self.rows];
        for (r, &j) in pivots.iter().enumerate() {
            let c = &residual[j] / BigRational::from_integer(h[(r, j)].clone());
            if !c.is_zero() {
                for k in 0..self.cols {
                    let v = &c * BigRational::from_integer(h[(r, k)].clone());
                    residual[k] -= v;
                }
            }
            y[r] = c;
        }
        if residual.iter().any(|x| !x.is_zero()) {
            return Err(Error::NoSolution);
        }
        // X = Y * U
        let mut x = vec![BigRational::zero(); self.rows];
        for (r, yr) in y.iter().enumerate() {
            if yr.is_zero() {
                continue;
            }
            for k in 0..self.rows {
                let v = yr * BigRational::from_integer(u[(r, k)].clone());
                x[k] += v;
            }
        }
        let integral = x.iter().all(|v| v.is_integer());
        let kernel: Vec<Vec<BigInt>> = (rank..self.rows).map(|r| u.row(r).to_vec()).collect();
        Ok(LeftSolution { x, integral, kernel })
    }

    /// Integer solution of `X * self = b` when one exists.
    pub fn solve_left_integral(&self, b: &[BigInt]) -> Result<Option<Vec<BigInt>>> {
        match self.solve_left(b) {
            Ok(sol) => Ok(if sol.integral {
                Some(sol.x.iter().map(|v| v.to_integer()).collect())
            } else {
                None
            }),
            Err(Error::NoSolution) => Ok(None),
            Err(e) => Err(e),
        }
    }

    /// Membership of `b` in the row lattice of a matrix **already in HNF**:
    /// greedy exact reduction along the pivots. Cheaper than a full solve
    /// and immune to denominator growth.
    pub fn hnf_contains(&self, b: &[BigInt]) -> bool {
        assert_eq!(b.len(), self.cols);
        let mut v = b.to_vec();
        for i in 0..self.rows {
            let Some(j) = self.row(i).iter().position(|x| !x.is_zero()) else {
                continue;
            };
            if v[j].is_zero() {
                continue;
            }
            let (q, r) = v[j].div_rem(&self[(i, j)]);
            if !r.is_zero() {
                return false;
            }
            for k in j..self.cols {
                let w = &self[(i, k)] * &q;
                v[k] -= w;
            }
        }
        v.iter().all(|x| x.is_zero())
    }
}

impl std::ops::Index<(usize, usize)> for IntMatrix {
    type Output = BigInt;
    fn index(&self, (i, j): (usize, usize)) -> &BigInt {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for IntMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut BigInt {
        &mut self.data[i * self.cols + j]
    }
}

impl std::fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "[{}x{}]", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(
                f,
                "  [{}]",
                self.row(i)
                    .iter()
                    .map(|x| x.to_string())
                    .collect::<Vec<_>>()
                    .join(", ")
            )?;
        }
        Ok(())
    }
}

/// Result of [`IntMatrix::solve_left`].
pub struct LeftSolution {
    /// Canonical rational solution (free coordinates zero).
    pub x: Vec<BigRational>,
    /// Whether `x` is integral — equivalently, whether `b` lies in the row
    /// lattice rather than merely the row span.
    pub integral: bool,
    /// Integer basis of the left kernel `{v : v * M = 0}`.
    pub kernel: Vec<Vec<BigInt>>,
}

// ===================================================================
// LLL reduction
// ===================================================================

fn dot(a: &[BigRational], b: &[BigRational]) -> BigRational {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn to_rational(v: &[BigInt]) -> Vec<BigRational> {
    v.iter()
        .map(|x| BigRational::from_integer(x.clone()))
        .collect()
}

/// Gram–Schmidt data for the current basis: orthogonal vectors, their
/// squared norms, and the mu coefficients.
fn gram_schmidt(basis: &[Vec<BigInt>]) -> (Vec<Vec<BigRational>>, Vec<BigRational>, Vec<Vec<BigRational>>) {
    let n = basis.len();
    let mut star: Vec<Vec<BigRational>> = Vec::with_capacity(n);
    let mut norms: Vec<BigRational> = Vec::with_capacity(n);
    let mut mu = vec![vec![BigRational::zero(); n]; n];
    for i in 0..n {
        let mut v = to_rational(&basis[i]);
        for j in 0..i {
            let m = if norms[j].is_zero() {
                BigRational::zero()
            } else {
                dot(&to_rational(&basis[i]), &star[j]) / norms[j].clone()
            };
            for (vk, sk) in v.iter_mut().zip(&star[j]) {
                *vk -= &m * sk;
            }
            mu[i][j] = m;
        }
        norms.push(dot(&v, &v));
        star.push(v);
    }
    (star, norms, mu)
}

/// LLL reduction (delta = 3/4) of a list of independent integer rows, in
/// exact rational arithmetic. Desk-scale dimensions only; Gram–Schmidt data
/// is recomputed after each swap, trading speed for obviousness.
pub fn lll(basis: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    let mut b: Vec<Vec<BigInt>> = basis.to_vec();
    let n = b.len();
    if n <= 1 {
        return b;
    }
    let delta = BigRational::new(BigInt::from(3), BigInt::from(4));
    let half = BigRational::new(BigInt::from(1), BigInt::from(2));
    let (_, mut norms, mut mu) = gram_schmidt(&b);
    let mut k = 1usize;
    while k < n {
        // size-reduce b_k against b_{k-1}, ..., b_0
        for j in (0..k).rev() {
            if mu[k][j].abs() > half {
                let q = mu[k][j].round().to_integer();
                for idx in 0..b[k].len() {
                    let v = &b[j][idx] * &q;
                    b[k][idx] -= v;
                }
                let (_, n2, m2) = gram_schmidt(&b);
                norms = n2;
                mu = m2;
            }
        }
        // Lovász condition
        let lhs = norms[k].clone();
        let rhs = (&delta - &mu[k][k - 1] * &mu[k][k - 1]) * &norms[k - 1];
        if lhs < rhs {
            b.swap(k, k - 1);
            let (_, n2, m2) = gram_schmidt(&b);
            norms = n2;
            mu = m2;
            k = k.max(2) - 1;
        } else {
            k += 1;
        }
    }
    b
}

// ===================================================================
// Bounded lattice enumeration
// ===================================================================

/// All lattice vectors `x = sum c_i * basis_i` with `max_j |x_j| <= bound`,
/// the zero vector included. The basis rows must be linearly independent.
///
/// The Fincke–Pohst recursion prunes with the Euclidean radius
/// `dim * bound^2` (which contains the sup-norm box) using exact rational
/// Gram–Schmidt data; interval endpoints are rounded outward, so the
/// enumeration provably covers the whole box, and an exact sup-norm filter
/// keeps only genuine members. LLL-reduce the basis first for speed.
pub fn enumerate_sup_box(basis: &[Vec<BigInt>], bound: &BigInt) -> Vec<Vec<BigInt>> {
    assert!(!basis.is_empty());
    let dim = basis[0].len();
    let n = basis.len();
    let (_, norms, mu) = gram_schmidt(basis);
    assert!(
        norms.iter().all(|v| !v.is_zero()),
        "enumeration basis must be independent"
    );
    let radius2 = BigRational::from_integer(BigInt::from(dim as u64) * bound * bound);
    let mut out = vec![];
    let mut coeffs = vec![BigInt::zero(); n];
    enumerate_level(
        basis,
        &norms,
        &mu,
        n,
        n,
        &radius2,
        &mut coeffs,
        bound,
        &mut out,
    );
    out
}

#[allow(clippy::too_many_arguments)]
fn enumerate_level(
    basis: &[Vec<BigInt>],
    norms: &[BigRational],
    mu: &[Vec<BigRational>],
    n: usize,
    level: usize,
    budget: &BigRational,
    coeffs: &mut Vec<BigInt>,
    bound: &BigInt,
    out: &mut Vec<Vec<BigInt>>,
) {
    if budget.is_negative() {
        return;
    }
    if level == 0 {
        // materialise and filter by the exact sup norm
        let dim = basis[0].len();
        let mut x = vec![BigInt::zero(); dim];
        for (c, row) in coeffs.iter().zip(basis) {
            if c.is_zero() {
                continue;
            }
            for (xi, ri) in x.iter_mut().zip(row) {
                *xi += c * ri;
            }
        }
        if x.iter().all(|v| v.abs() <= *bound) {
            out.push(x);
        }
        return;
    }
    let i = level - 1;
    // center of the allowed interval for c_i: -sum_{j>i} c_j mu_{j,i}
    let mut center = BigRational::zero();
    for j in level..n {
        if coeffs[j].is_zero() {
            continue;
        }
        center -= BigRational::from_integer(coeffs[j].clone()) * &mu[j][i];
    }
    // |c_i - center|^2 * norms[i] <= budget; round the half-width outward
    let width2 = budget / &norms[i];
    let wfloor = width2.floor().to_integer();
    let half = wfloor.sqrt() + 1u32;
    let lo = center.floor().to_integer() - &half;
    let hi = center.ceil().to_integer() + &half;
    let mut c = lo;
    while c <= hi {
        let t = BigRational::from_integer(c.clone()) - &center;
        let used = &t * &t * &norms[i];
        if used <= *budget {
            coeffs[i] = c.clone();
            let remaining = budget - used;
            enumerate_level(basis, norms, mu, n, i, &remaining, coeffs, bound, out);
        }
        c += 1u32;
    }
    coeffs[i] = BigInt::zero();
}

// ===================================================================
// Tests
// ===================================================================

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand::rngs::StdRng;

    #[test]
    fn hnf_fixed_examples() {
        let m = IntMatrix::from_i64s(&[&[1, 2], &[3, 4]]);
        let (h, u) = m.hnf();
        assert_eq!(h, IntMatrix::from_i64s(&[&[1, 0], &[0, 2]]));
        assert_eq!(u.mul(&m), h);
        assert_eq!(u.det().abs(), BigInt::one());

        let id = IntMatrix::identity(3);
        let (h, u) = id.hnf();
        assert_eq!(h, id);
        assert_eq!(u, id);

        // zero row sinks to the bottom
        let m = IntMatrix::from_i64s(&[&[2, 0], &[0, 0], &[0, 3]]);
        let (h, u) = m.hnf();
        assert_eq!(h, IntMatrix::from_i64s(&[&[2, 0], &[0, 3], &[0, 0]]));
        assert_eq!(u.mul(&m), h);
        assert_eq!(u.det().abs(), BigInt::one());
    }

    #[test]
    fn hnf_random_properties() {
        let mut rng = StdRng::seed_from_u64(11);
        for _ in 0..60 {
            let rows = rng.gen_range(1..=6);
            let cols = rng.gen_range(1..=6);
            let m = IntMatrix::from_rows(
                (0..rows)
                    .map(|_| (0..cols).map(|_| BigInt::from(rng.gen_range(-20i64..=20))).collect())
                    .collect(),
            );
            let (h, u) = m.hnf();
            assert_eq!(u.mul(&m), h, "H = U*M");
            assert_eq!(u.det().abs(), BigInt::one(), "U unimodular");
            // echelon with positive pivots, reduced above
            let pivots = h.pivot_cols();
            for w in pivots.windows(2) {
                assert!(w[0] < w[1], "strictly increasing pivot columns");
            }
            for (r, &j) in pivots.iter().enumerate() {
                assert!(h[(r, j)].is_positive());
                for above in 0..r {
                    assert!(&h[(above, j)] >= &BigInt::zero() && &h[(above, j)] < &h[(r, j)]);
                }
            }
            // zero rows at the bottom
            for r in pivots.len()..rows {
                assert!(h.is_zero_row(r));
            }
        }
    }

    #[test]
    fn snf_fixed_examples() {
        let m = IntMatrix::from_i64s(&[&[2, 0], &[0, 6]]);
        assert_eq!(m.snf(), vec![BigInt::from(2), BigInt::from(6)]);
        let m = IntMatrix::from_i64s(&[&[2, 0], &[0, 3]]);
        assert_eq!(m.snf(), vec![BigInt::from(1), BigInt::from(6)]);
        let m = IntMatrix::from_i64s(&[&[0, 0], &[0, 0]]);
        assert_eq!(m.snf(), vec![BigInt::zero(), BigInt::zero()]);
    }

    #[test]
    fn snf_divisibility_and_det() {
        let mut rng = StdRng::seed_from_u64(5);
        for _ in 0..60 {
            let n = rng.gen_range(1..=5);
            let m = IntMatrix::from_rows(
                (0..n)
                    .map(|_| (0..n).map(|_| BigInt::from(rng.gen_range(-9i64..=9))).collect())
                    .collect(),
            );
            let d = m.snf();
            for w in d.windows(2) {
                if !w[1].is_zero() {
                    assert!(w[1].mod_floor(&w[0]).is_zero(), "divisibility chain");
                }
            }
            let prod: BigInt = d.iter().product();
            assert_eq!(prod, m.det().abs(), "product of invariant factors");
        }
    }

    #[test]
    fn solve_left_examples() {
        let id = IntMatrix::identity(2);
        let b = [BigInt::from(3), BigInt::from(4)];
        let sol = id.solve_left(&b).unwrap();
        assert!(sol.integral);
        assert_eq!(sol.x[0].to_integer(), BigInt::from(3));

        // [1] * [[2]] = [2]: solving for b = [1] gives X = 1/2, not integral
        let m = IntMatrix::from_i64s(&[&[2]]);
        let sol = m.solve_left(&[BigInt::one()]).unwrap();
        assert!(!sol.integral);
        assert_eq!(sol.x[0], BigRational::new(BigInt::one(), BigInt::from(2)));

        // inconsistent system
        let m = IntMatrix::from_i64s(&[&[1, 0]]);
        assert!(matches!(
            m.solve_left(&[BigInt::zero(), BigInt::one()]),
            Err(Error::NoSolution)
        ));
    }

    #[test]
    fn solve_left_random_roundtrip() {
        let mut rng = StdRng::seed_from_u64(9);
        for _ in 0..60 {
            let rows = rng.gen_range(1..=6);
            let cols = rng.gen_range(1..=6);
            let m = IntMatrix::from_rows(
                (0..rows)
                    .map(|_| (0..cols).map(|_| BigInt::from(rng.gen_range(-30i64..=30))).collect())
                    .collect(),
            );
            let x0: Vec<BigInt> = (0..rows).map(|_| BigInt::from(rng.gen_range(-10i64..=10))).collect();
            // b = x0 * m
            let mut b = vec![BigInt::zero(); cols];
            for (i, xi) in x0.iter().enumerate() {
                for j in 0..cols {
                    b[j] += xi * &m[(i, j)];
                }
            }
            let sol = m.solve_left(&b).unwrap();
            assert!(sol.integral, "constructed rhs is integral");
            // verify X * M = b
            let mut check = vec![BigRational::zero(); cols];
            for (i, xi) in sol.x.iter().enumerate() {
                for j in 0..cols {
                    check[j] += xi * BigRational::from_integer(m[(i, j)].clone());
                }
            }
            for j in 0..cols {
                assert_eq!(check[j].to_integer(), b[j]);
            }
            // kernel rows really annihilate M
            for k in &sol.kernel {
                for j in 0..cols {
                    let s: BigInt = (0..rows).map(|i| &k[i] * &m[(i, j)]).sum();
                    assert!(s.is_zero());
                }
            }
            // membership agrees with the HNF reduction test
            let basis = m.hnf_basis();
            assert!(basis.hnf_contains(&b));
        }
    }

    #[test]
    fn hnf_contains_rejects_non_members() {
        let m = IntMatrix::from_i64s(&[&[2, 0], &[0, 2]]);
        let basis = m.hnf_basis();
        assert!(basis.hnf_contains(&[BigInt::from(4), BigInt::from(-2)]));
        assert!(!basis.hnf_contains(&[BigInt::one(), BigInt::zero()]));
    }

    #[test]
    fn lll_reduces_and_preserves_lattice() {
        let mut rng = StdRng::seed_from_u64(31);
        for _ in 0..40 {
            let n = rng.gen_range(2..=4);
            let dim = n + rng.gen_range(0..=2);
            let basis: Vec<Vec<BigInt>> = (0..n)
                .map(|i| {
                    let mut v: Vec<BigInt> =
                        (0..dim).map(|_| BigInt::from(rng.gen_range(-50i64..=50))).collect();
                    v[i] += BigInt::from(100); // guarantee independence
                    v
                })
                .collect();
            let red = lll(&basis);
            assert_eq!(red.len(), n);
            // same lattice: each basis is contained in the other's row lattice
            let a = IntMatrix::from_rows(basis.clone()).hnf_basis();
            let b = IntMatrix::from_rows(red.clone()).hnf_basis();
            assert_eq!(a, b, "LLL preserves the lattice");
            // first vector is reasonably short: compare against original min
            let norm = |v: &Vec<BigInt>| -> BigInt { v.iter().map(|x| x * x).sum() };
            let orig_min = basis.iter().map(norm).min().unwrap();
            assert!(norm(&red[0]) <= orig_min.clone() * 4u32, "no drastic regression");
        }
    }

    #[test]
    fn enumerate_box_matches_brute_force() {
        let mut rng = StdRng::seed_from_u64(77);
        for _ in 0..25 {
            let basis: Vec<Vec<BigInt>> = vec![
                vec![BigInt::one(), BigInt::zero(), BigInt::from(rng.gen_range(-9i64..=9))],
                vec![BigInt::zero(), BigInt::one(), BigInt::from(rng.gen_range(-9i64..=9))],
            ];
            let bound = BigInt::from(rng.gen_range(1i64..=6));
            let mut got = enumerate_sup_box(&basis, &bound);
            got.sort();
            // brute force over coefficients well beyond the box
            let mut expect = vec![];
            let ib = bound.clone();
            let range = 40i64;
            for c0 in -range..=range {
                for c1 in -range..=range {
                    let x: Vec<BigInt> = (0..3)
                        .map(|k| &basis[0][k] * BigInt::from(c0) + &basis[1][k] * BigInt::from(c1))
                        .collect();
                    if x.iter().all(|v| v.abs() <= ib) {
                        expect.push(x);
                    }
                }
            }
            expect.sort();
            expect.dedup();
            assert_eq!(got, expect);
        }
    }
}
