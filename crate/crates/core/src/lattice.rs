//! Exact integer and rational linear algebra.
//!
//! Everything here works over `BigInt` / `BigRational`; no floating point
//! ever touches a lattice computation. Polyhedra are stored as lists of
//! integer inequalities `<normal, x> <= bound` and are handled with
//! Fourier-Motzkin elimination, which is exact and perfectly adequate for
//! the handful of variables a toric variety of dimension <= 8 produces.

use std::collections::HashMap;
use std::fmt;
use std::ops::Index;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::LatticeError;

/// A vector in `Z^n` (either the lattice `N` or its dual `M`).
pub type IntVector = Vec<BigInt>;

/// Convenience conversion used all over the tests and catalog.
pub fn int_vector(values: &[i64]) -> IntVector {
    values.iter().map(|&v| BigInt::from(v)).collect()
}

pub fn dot(a: &[BigInt], b: &[BigInt]) -> BigInt {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// gcd of all entries; zero for the zero vector.
pub fn content(v: &[BigInt]) -> BigInt {
    v.iter().fold(BigInt::zero(), |g, x| g.gcd(x))
}

/// Dense row-major integer matrix.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix {
            rows,
            cols,
            data: vec![BigInt::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = BigInt::one();
        }
        m
    }

    /// Builds a matrix from explicit rows. `cols` is needed for the 0-row case.
    pub fn from_rows(cols: usize, rows: Vec<IntVector>) -> Result<Self, LatticeError> {
        let mut data = Vec::with_capacity(rows.len() * cols);
        let nrows = rows.len();
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != cols {
                return Err(LatticeError::Ragged {
                    row: i,
                    expected: cols,
                    found: row.len(),
                });
            }
            data.extend(row);
        }
        Ok(IntMatrix {
            rows: nrows,
            cols,
            data,
        })
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(rows: usize, columns: &[IntVector]) -> Result<Self, LatticeError> {
        let rowwise = IntMatrix::from_rows(rows, columns.to_vec())?;
        Ok(rowwise.transpose())
    }

    pub fn from_i64(rows: &[&[i64]]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        IntMatrix::from_rows(cols, rows.iter().map(|r| int_vector(r)).collect())
            .expect("rectangular literal")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[BigInt] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> IntVector {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn row_vectors(&self) -> Vec<IntVector> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn set(&mut self, i: usize, j: usize, value: BigInt) {
        self.data[i * self.cols + j] = value;
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn mul_vec(&self, v: &[BigInt]) -> IntVector {
        assert_eq!(v.len(), self.cols, "dimension mismatch in mul_vec");
        (0..self.rows).map(|i| dot(self.row(i), v)).collect()
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch in mul");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * &other[(k, j)];
                }
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    /// Determinant by Bareiss elimination. Panics on non-square input.
    pub fn determinant(&self) -> BigInt {
        assert_eq!(self.rows, self.cols, "determinant of a non-square matrix");
        let n = self.rows;
        if n == 0 {
            return BigInt::one();
        }
        let mut m: Vec<Vec<BigInt>> = self.row_vectors();
        let mut prev = BigInt::one();
        let mut negate = false;
        for k in 0..n {
            let Some(p) = (k..n).find(|&i| !m[i][k].is_zero()) else {
                return BigInt::zero();
            };
            if p != k {
                m.swap(p, k);
                negate = !negate;
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = (&m[k][k] * &m[i][j] - &m[i][k] * &m[k][j]) / &prev;
                    m[i][j] = v;
                }
                m[i][k] = BigInt::zero();
            }
            prev = m[k][k].clone();
        }
        if negate {
            -prev
        } else {
            prev
        }
    }
}

impl Index<(usize, usize)> for IntMatrix {
    type Output = BigInt;

    fn index(&self, (i, j): (usize, usize)) -> &BigInt {
        &self.data[i * self.cols + j]
    }
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "IntMatrix{}x{}[", self.rows, self.cols)?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, "; ")?;
            }
            let row: Vec<String> = self.row(i).iter().map(|x| x.to_string()).collect();
            write!(f, "{}", row.join(" "))?;
        }
        write!(f, "]")
    }
}

/// Rank over the rationals via fraction-free (Bareiss) elimination.
pub fn rank(m: &IntMatrix) -> usize {
    let mut a = m.row_vectors();
    let rows = m.rows();
    let cols = m.cols();
    let mut prev = BigInt::one();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(p, r);
        for i in r + 1..rows {
            for j in c + 1..cols {
                let v = (&a[r][c] * &a[i][j] - &a[i][c] * &a[r][j]) / &prev;
                a[i][j] = v;
            }
            a[i][c] = BigInt::zero();
        }
        prev = a[r][c].clone();
        r += 1;
    }
    r
}

/// Solves `A x = b` over the rationals.
///
/// `Ok(None)` means the system is inconsistent. A consistent system with a
/// positive-dimensional solution space is reported as `NonUnique`.
pub fn solve_rational(a: &IntMatrix, b: &[BigInt]) -> Result<Option<Vec<BigRational>>, LatticeError> {
    if b.len() != a.rows() {
        return Err(LatticeError::DimensionMismatch {
            expected: a.rows(),
            found: b.len(),
        });
    }
    let rows = a.rows();
    let cols = a.cols();
    let mut m: Vec<Vec<BigRational>> = (0..rows)
        .map(|i| {
            a.row(i)
                .iter()
                .chain(std::iter::once(&b[i]))
                .map(|x| BigRational::from_integer(x.clone()))
                .collect()
        })
        .collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(p, r);
        let inv = m[r][c].recip();
        for x in m[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let factor = m[i][c].clone();
                for j in c..=cols {
                    let sub = &factor * &m[r][j];
                    m[i][j] -= sub;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    if m[r..].iter().any(|row| !row[cols].is_zero()) {
        return Ok(None);
    }
    if pivots.len() < cols {
        return Err(LatticeError::NonUnique {
            rank: pivots.len(),
            unknowns: cols,
        });
    }
    let mut x = vec![BigRational::zero(); cols];
    for (i, &c) in pivots.iter().enumerate() {
        x[c] = m[i][cols].clone();
    }
    Ok(Some(x))
}

/// Unique integer solution of `A x = b`, if any.
pub fn solve_integer(a: &IntMatrix, b: &[BigInt]) -> Result<Option<IntVector>, LatticeError> {
    Ok(solve_rational(a, b)?.and_then(|x| {
        x.into_iter()
            .map(|q| q.is_integer().then(|| q.to_integer()))
            .collect()
    }))
}

/// Relation symbol accepted when building a polyhedron.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Le,
    Lt,
    Ge,
    Gt,
}

/// `<normal, x> <= bound`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Inequality {
    pub normal: IntVector,
    pub bound: BigInt,
}

impl Inequality {
    /// Builds the non-strict integer form of `<normal, x> (sense) bound`.
    /// Over integer points `< b` is the same as `<= b - 1`.
    pub fn new(normal: IntVector, sense: Sense, bound: BigInt) -> Self {
        match sense {
            Sense::Le => Inequality { normal, bound },
            Sense::Lt => Inequality {
                normal,
                bound: bound - 1,
            },
            Sense::Ge => Inequality {
                normal: normal.into_iter().map(|x| -x).collect(),
                bound: -bound,
            },
            Sense::Gt => Inequality {
                normal: normal.into_iter().map(|x| -x).collect(),
                bound: -bound - 1,
            },
        }
    }

    pub fn holds_at(&self, x: &[BigInt]) -> bool {
        dot(&self.normal, x) <= self.bound
    }

    fn normalized(mut self) -> Self {
        let g = content(&self.normal).gcd(&self.bound);
        if !g.is_zero() && !g.is_one() {
            for x in self.normal.iter_mut() {
                *x /= &g;
            }
            self.bound /= &g;
        }
        self
    }
}

/// A region `{x in Q^dim : <n_i, x> <= b_i}`, only ever queried for its
/// integer points or for rational feasibility.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalPolyhedron {
    dim: usize,
    inequalities: Vec<Inequality>,
}

/// Result of asking for the lattice points of a polyhedron.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LatticePoints<T> {
    Finite(T),
    Unbounded,
}

impl<T> LatticePoints<T> {
    pub fn finite(self) -> Option<T> {
        match self {
            LatticePoints::Finite(t) => Some(t),
            LatticePoints::Unbounded => None,
        }
    }
}

impl RationalPolyhedron {
    pub fn new(dim: usize) -> Self {
        RationalPolyhedron {
            dim,
            inequalities: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn inequalities(&self) -> &[Inequality] {
        &self.inequalities
    }

    pub fn add(&mut self, normal: IntVector, sense: Sense, bound: BigInt) -> Result<(), LatticeError> {
        if normal.len() != self.dim {
            return Err(LatticeError::DimensionMismatch {
                expected: self.dim,
                found: normal.len(),
            });
        }
        self.inequalities.push(Inequality::new(normal, sense, bound));
        Ok(())
    }

    pub fn with(mut self, normal: IntVector, sense: Sense, bound: BigInt) -> Result<Self, LatticeError> {
        self.add(normal, sense, bound)?;
        Ok(self)
    }

    pub fn contains(&self, x: &[BigInt]) -> bool {
        self.inequalities.iter().all(|q| q.holds_at(x))
    }

    /// Rational (not integer) feasibility.
    pub fn is_feasible(&self) -> bool {
        let mut rows = match normalize_rows(self.inequalities.clone()) {
            Some(r) => r,
            None => return false,
        };
        for v in (0..self.dim).rev() {
            rows = match eliminate(&rows, v) {
                Some(r) => r,
                None => return false,
            };
        }
        true
    }

    /// The recession cone `{x : <n_i, x> <= 0}` is `{0}`.
    pub fn recession_cone_is_trivial(&self) -> bool {
        let cone: Vec<Inequality> = self
            .inequalities
            .iter()
            .map(|q| Inequality {
                normal: q.normal.clone(),
                bound: BigInt::zero(),
            })
            .collect();
        if self.dim == 0 {
            return true;
        }
        let normals = IntMatrix::from_rows(self.dim, cone.iter().map(|q| q.normal.clone()).collect())
            .expect("normals share the ambient dimension");
        if rank(&normals) < self.dim {
            return false;
        }
        // The cone is {0} iff its projection to every coordinate axis is {0}.
        (0..self.dim).all(|keep| {
            let mut rows = normalize_rows(cone.clone()).expect("homogeneous system is feasible");
            for v in (0..self.dim).filter(|&v| v != keep) {
                rows = eliminate(&rows, v).expect("homogeneous system is feasible");
            }
            let up = rows.iter().any(|q| q.normal[keep].is_positive());
            let down = rows.iter().any(|q| q.normal[keep].is_negative());
            up && down
        })
    }

    /// All integer points, or `Unbounded` when the recession cone is nontrivial.
    pub fn lattice_points(&self) -> LatticePoints<Vec<IntVector>> {
        if !self.recession_cone_is_trivial() {
            return LatticePoints::Unbounded;
        }
        let mut out = Vec::new();
        match self.descend(&mut |p| out.push(p.to_vec()), None) {
            Some(()) => LatticePoints::Finite(out),
            None => LatticePoints::Unbounded,
        }
    }

    /// Number of integer points, or `Unbounded`.
    pub fn count_lattice_points(&self) -> LatticePoints<u64> {
        if !self.recession_cone_is_trivial() {
            return LatticePoints::Unbounded;
        }
        self.count_assuming_bounded()
    }

    /// Counting without the recession-cone test, for callers that have
    /// already established boundedness. An infinite coordinate range met
    /// during the descent still reports `Unbounded`.
    pub(crate) fn count_assuming_bounded(&self) -> LatticePoints<u64> {
        let mut count = 0u64;
        let mut add = |n: u64| count += n;
        match self.descend(&mut |_| {}, Some(&mut add)) {
            Some(()) => LatticePoints::Finite(count),
            None => LatticePoints::Unbounded,
        }
    }

    /// Coordinate-by-coordinate descent through the Fourier-Motzkin
    /// projections. When `tally` is given the last coordinate is counted
    /// rather than enumerated.
    fn descend(
        &self,
        emit: &mut dyn FnMut(&[BigInt]),
        mut tally: Option<&mut dyn FnMut(u64)>,
    ) -> Option<()> {
        let Some(projections) = self.projections() else {
            return Some(());
        };
        if self.dim == 0 {
            if let Some(t) = tally.as_mut() {
                t(1);
            } else {
                emit(&[]);
            }
            return Some(());
        }
        let mut prefix = Vec::with_capacity(self.dim);
        descend_level(&projections, &mut prefix, emit, &mut tally)
    }

    /// `projections[k]` describes the projection onto `x_0..=x_k`.
    /// `None` means the polyhedron is empty.
    fn projections(&self) -> Option<Vec<Vec<Inequality>>> {
        let n = self.dim;
        let mut rows = normalize_rows(self.inequalities.clone())?;
        if n == 0 {
            return Some(Vec::new());
        }
        let mut out = vec![Vec::new(); n];
        for v in (0..n).rev() {
            out[v] = rows.clone();
            if v > 0 {
                rows = eliminate(&rows, v)?;
            }
        }
        Some(out)
    }
}

fn descend_level(
    projections: &[Vec<Inequality>],
    prefix: &mut Vec<BigInt>,
    emit: &mut dyn FnMut(&[BigInt]),
    tally: &mut Option<&mut dyn FnMut(u64)>,
) -> Option<()> {
    let k = prefix.len();
    let (lo, hi) = match coordinate_range(&projections[k], prefix)? {
        Some(r) => r,
        None => return Some(()),
    };
    let last = k + 1 == projections.len();
    if last {
        if let Some(t) = tally.as_mut() {
            let n = &hi - &lo + 1;
            t(u64::try_from(n).expect("lattice point count fits in u64"));
            return Some(());
        }
    }
    let mut x = lo;
    while x <= hi {
        prefix.push(x.clone());
        if last {
            emit(prefix);
        } else {
            descend_level(projections, prefix, emit, tally)?;
        }
        prefix.pop();
        x += 1;
    }
    Some(())
}

/// Integer range for coordinate `prefix.len()` given fixed earlier coordinates.
/// Outer `None`: the range is infinite. Inner `None`: the range is empty.
fn coordinate_range(rows: &[Inequality], prefix: &[BigInt]) -> Option<Option<(BigInt, BigInt)>> {
    let k = prefix.len();
    let mut lo: Option<BigInt> = None;
    let mut hi: Option<BigInt> = None;
    for q in rows {
        let rest = &q.bound - dot(&q.normal[..k], prefix);
        let c = &q.normal[k];
        if c.is_zero() {
            if rest.is_negative() {
                return Some(None);
            }
        } else if c.is_positive() {
            let b = rest.div_floor(c);
            if hi.as_ref().map_or(true, |h| b < *h) {
                hi = Some(b);
            }
        } else {
            // c < 0: x >= ceil(rest / c)
            let b = ceil_div(&rest, c);
            if lo.as_ref().map_or(true, |l| b > *l) {
                lo = Some(b);
            }
        }
    }
    match (lo, hi) {
        (Some(l), Some(h)) => Some(if l <= h { Some((l, h)) } else { None }),
        _ => None,
    }
}

fn ceil_div(a: &BigInt, b: &BigInt) -> BigInt {
    -((-a).div_floor(b))
}

/// Divides every row by its content, drops trivially true rows and keeps
/// the tightest bound per normal. `None` if a row reads `0 <= negative`.
fn normalize_rows(rows: Vec<Inequality>) -> Option<Vec<Inequality>> {
    let mut best: HashMap<IntVector, BigInt> = HashMap::new();
    let mut order = Vec::new();
    for q in rows {
        if q.normal.iter().all(Zero::is_zero) {
            if q.bound.is_negative() {
                return None;
            }
            continue;
        }
        let q = q.normalized();
        match best.get_mut(&q.normal) {
            Some(b) => {
                if q.bound < *b {
                    *b = q.bound;
                }
            }
            None => {
                order.push(q.normal.clone());
                best.insert(q.normal, q.bound);
            }
        }
    }
    Some(
        order
            .into_iter()
            .map(|n| {
                let bound = best.remove(&n).expect("recorded normal");
                Inequality { normal: n, bound }
            })
            .collect(),
    )
}

/// One Fourier-Motzkin step removing variable `v`.
fn eliminate(rows: &[Inequality], v: usize) -> Option<Vec<Inequality>> {
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    let mut out = Vec::new();
    for q in rows {
        match q.normal[v].sign() {
            num_bigint::Sign::Plus => pos.push(q),
            num_bigint::Sign::Minus => neg.push(q),
            num_bigint::Sign::NoSign => out.push(q.clone()),
        }
    }
    for p in &pos {
        for n in &neg {
            let a = &p.normal[v];
            let b = -&n.normal[v];
            let normal: IntVector = p
                .normal
                .iter()
                .zip(&n.normal)
                .map(|(x, y)| &b * x + a * y)
                .collect();
            let bound = &b * &p.bound + a * &n.bound;
            out.push(Inequality { normal, bound });
        }
    }
    normalize_rows(out)
}
