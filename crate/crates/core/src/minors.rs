//! Index sets, minor enumeration and the determinant identities that tie
//! the augmented unknowns `M_{A,I}` to the minors of `F`.
//!
//! Index sets are 1-based throughout so that the sign factors
//! `(-1)^{O_A(alpha) + O_I(i)}` read exactly like their textbook form.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::scalar::Scalar;

/// Largest supported bound of an [`IndexSet`].
pub const MAX_BOUND: usize = 31;

/// Strictly increasing subset of `{1, .., bound}` stored as a bit mask.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct IndexSet {
    bits: u32,
    bound: usize,
}

impl IndexSet {
    pub fn new(elements: &[usize], bound: usize) -> Result<Self> {
        if bound == 0 || bound > MAX_BOUND {
            return domain(format!("index set bound {bound} outside [1, {MAX_BOUND}]"));
        }
        let mut bits = 0u32;
        let mut prev = 0usize;
        for &e in elements {
            if e == 0 || e > bound {
                return domain(format!("element {e} outside [1, {bound}]"));
            }
            if e <= prev {
                return domain(format!("elements {elements:?} are not strictly increasing"));
            }
            prev = e;
            bits |= 1 << (e - 1);
        }
        Ok(Self { bits, bound })
    }

    pub fn empty(bound: usize) -> Self {
        Self { bits: 0, bound }
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn bound(&self) -> usize {
        self.bound
    }

    pub fn len(&self) -> usize {
        self.bits.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.bits == 0
    }

    pub fn contains(&self, e: usize) -> bool {
        e >= 1 && e <= self.bound && self.bits & (1 << (e - 1)) != 0
    }

    pub fn with(&self, e: usize) -> Self {
        debug_assert!(e >= 1 && e <= self.bound);
        Self { bits: self.bits | (1 << (e - 1)), bound: self.bound }
    }

    pub fn without(&self, e: usize) -> Self {
        debug_assert!(e >= 1 && e <= self.bound);
        Self { bits: self.bits & !(1 << (e - 1)), bound: self.bound }
    }

    pub fn elements(&self) -> Vec<usize> {
        self.iter().collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        (1..=self.bound).filter(move |&e| self.bits & (1 << (e - 1)) != 0)
    }

    /// The `q`-th smallest element (1-based `q`).
    pub fn nth(&self, q: usize) -> Option<usize> {
        if q == 0 {
            return None;
        }
        self.iter().nth(q - 1)
    }

    /// Rank of `alpha` within `self ∪ {alpha}`, 1-based. Never fails for
    /// `alpha` within the bound; see [`ordinal`] for the checked version.
    pub(crate) fn rank(&self, alpha: usize) -> usize {
        let below = self.bits & ((1u32 << (alpha - 1)) - 1);
        below.count_ones() as usize + 1
    }

    /// All subsets of `{1..bound}` with exactly `k` elements, lexicographic.
    pub fn subsets(bound: usize, k: usize) -> Vec<IndexSet> {
        let mut out = Vec::new();
        let mut current = Vec::with_capacity(k);
        fn rec(start: usize, bound: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<IndexSet>) {
            if cur.len() == k {
                out.push(IndexSet::new(cur, bound).expect("valid subset"));
                return;
            }
            for e in start..=bound {
                if bound - e + 1 < k - cur.len() {
                    break;
                }
                cur.push(e);
                rec(e + 1, bound, k, cur, out);
                cur.pop();
            }
        }
        if k <= bound {
            rec(1, bound, k, &mut current, &mut out);
        }
        out
    }
}

impl fmt::Debug for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.elements())
    }
}

/// `O_A(alpha)`: the 1-based rank of `alpha` in `A ∪ {alpha}`.
pub fn ordinal(a: &IndexSet, alpha: usize) -> Result<usize> {
    if alpha == 0 || alpha > a.bound {
        return domain(format!("ordinal argument {alpha} outside [1, {}]", a.bound));
    }
    Ok(a.rank(alpha))
}

/// One `(A, I)` label of a minor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct MinorPair {
    pub rows: IndexSet,
    pub cols: IndexSet,
}

impl MinorPair {
    pub fn order(&self) -> usize {
        self.rows.len()
    }
}

/// Where a minor label lives in a state vector.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MinorSlot {
    /// `A = I = ∅`.
    Empty,
    /// Position in the layout.
    At(usize),
    /// Sizes mismatch or exceed the rank bound: structurally zero.
    Absent,
}

/// Canonical enumeration of all `(A, I)` with `1 <= |A| = |I| <= min(m, n)`,
/// sorted by order, then rows lexicographically, then columns.
#[derive(Clone, Debug)]
pub struct MinorLayout {
    m: usize,
    n: usize,
    pairs: Vec<MinorPair>,
    index: HashMap<(u32, u32), usize>,
}

impl MinorLayout {
    pub fn new(m: usize, n: usize) -> Result<Self> {
        enumerate_layout(m, n)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rank(&self) -> usize {
        self.m.min(self.n)
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> &[MinorPair] {
        &self.pairs
    }

    pub fn index_of(&self, rows: &IndexSet, cols: &IndexSet) -> Option<usize> {
        self.index.get(&(rows.bits(), cols.bits())).copied()
    }

    pub fn slot(&self, rows: &IndexSet, cols: &IndexSet) -> MinorSlot {
        if rows.is_empty() && cols.is_empty() {
            return MinorSlot::Empty;
        }
        match self.index_of(rows, cols) {
            Some(p) => MinorSlot::At(p),
            None => MinorSlot::Absent,
        }
    }

    /// Position of the first-order minor `({alpha}, {i})`, i.e. `F_{alpha i}`.
    pub fn entry_index(&self, alpha: usize, i: usize) -> usize {
        self.index[&(1 << (alpha - 1), 1 << (i - 1))]
    }

    /// Look up a minor value with the `[F]_{∅,∅} = empty` convention.
    pub fn value<T: Scalar>(&self, minors: &[T], rows: &IndexSet, cols: &IndexSet, empty: &T) -> T {
        match self.slot(rows, cols) {
            MinorSlot::Empty => empty.clone(),
            MinorSlot::At(p) => minors[p].clone(),
            MinorSlot::Absent => T::zero(),
        }
    }
}

pub fn enumerate_layout(m: usize, n: usize) -> Result<MinorLayout> {
    if m < 1 || n < 1 {
        return domain(format!("layout dimensions must be positive, got ({m}, {n})"));
    }
    if m > MAX_BOUND || n > MAX_BOUND {
        return domain(format!("layout dimensions ({m}, {n}) exceed {MAX_BOUND}"));
    }
    let mut pairs = Vec::new();
    for k in 1..=m.min(n) {
        let row_sets = IndexSet::subsets(m, k);
        let col_sets = IndexSet::subsets(n, k);
        for rows in &row_sets {
            for cols in &col_sets {
                pairs.push(MinorPair { rows: *rows, cols: *cols });
            }
        }
    }
    let index = pairs
        .iter()
        .enumerate()
        .map(|(p, pair)| ((pair.rows.bits(), pair.cols.bits()), p))
        .collect();
    Ok(MinorLayout { m, n, pairs, index })
}

/// Dense row-major matrix over any [`Scalar`].
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

pub type RationalMatrix = Matrix<num_rational::BigRational>;

impl<T: fmt::Debug> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<&[T]> = self.data.chunks(self.cols.max(1)).collect();
        f.debug_struct("Matrix").field("rows", &self.rows).field("cols", &self.cols).field("data", &rows).finish()
    }
}

impl<T: Scalar> Matrix<T> {
    pub fn new(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return domain(format!("{} entries for a {rows}x{cols} matrix", data.len()));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return domain("ragged rows");
        }
        Self::new(r, c, rows.concat())
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |_, _| T::zero())
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { T::one() } else { T::zero() })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    /// 0-based access.
    pub fn at(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.cols + j] = v;
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.at(j, i).clone())
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return domain(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            ));
        }
        Ok(Self::from_fn(self.rows, other.cols, |i, j| {
            (0..self.cols).fold(T::zero(), |acc, k| acc + self.at(i, k).clone() * other.at(k, j).clone())
        }))
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self::from_fn(self.rows, self.cols, |i, j| self.at(i, j).clone() + other.at(i, j).clone())
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> Matrix<U> {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }

    /// Submatrix on 1-based row and column sets.
    pub fn select(&self, rows: &IndexSet, cols: &IndexSet) -> Self {
        let r = rows.elements();
        let c = cols.elements();
        Self::from_fn(r.len(), c.len(), |p, q| self.at(r[p] - 1, c[q] - 1).clone())
    }

    /// Matrix with row `skip_row` and column `skip_col` removed (0-based).
    fn cofactor_block(&self, skip_row: usize, skip_col: usize) -> Self {
        let rows: Vec<usize> = (0..self.rows).filter(|&i| i != skip_row).collect();
        let cols: Vec<usize> = (0..self.cols).filter(|&j| j != skip_col).collect();
        Self::from_fn(rows.len(), cols.len(), |p, q| self.at(rows[p], cols[q]).clone())
    }

    pub fn det(&self) -> T {
        assert_eq!(self.rows, self.cols, "determinant of a non-square matrix");
        match self.rows {
            0 => T::one(),
            1 => self.data[0].clone(),
            2 => self.at(0, 0).clone() * self.at(1, 1).clone() - self.at(0, 1).clone() * self.at(1, 0).clone(),
            3 => (0..3).fold(T::zero(), |acc, q| {
                let term = self.at(0, q).clone() * self.cofactor_block(0, q).det();
                if q % 2 == 0 {
                    acc + term
                } else {
                    acc - term
                }
            }),
            _ => bareiss_det(self.clone()),
        }
    }

    /// Classical adjugate: `adj(M)_{ij} = (-1)^{i+j} det(M without row j, col i)`.
    pub fn adjugate(&self) -> Self {
        assert_eq!(self.rows, self.cols);
        if self.rows == 1 {
            return Self::identity(1);
        }
        Self::from_fn(self.rows, self.cols, |i, j| {
            T::sign(i + j) * self.cofactor_block(j, i).det()
        })
    }
}

/// Fraction-free Gaussian elimination; every division is exact over the
/// integers and rationals.
fn bareiss_det<T: Scalar>(mut a: Matrix<T>) -> T {
    let n = a.rows;
    let mut prev = T::one();
    let mut negate = false;
    for k in 0..n - 1 {
        if a.at(k, k).is_zero() {
            match (k + 1..n).find(|&i| !a.at(i, k).is_zero()) {
                Some(p) => {
                    for j in 0..n {
                        a.data.swap(k * n + j, p * n + j);
                    }
                    negate = !negate;
                }
                None => return T::zero(),
            }
        }
        let pivot = a.at(k, k).clone();
        for i in k + 1..n {
            for j in k + 1..n {
                let v = (a.at(i, j).clone() * pivot.clone() - a.at(i, k).clone() * a.at(k, j).clone()) / prev.clone();
                a.set(i, j, v);
            }
        }
        prev = pivot;
    }
    let d = a.at(n - 1, n - 1).clone();
    if negate {
        -d
    } else {
        d
    }
}

/// `[F]_{A,I}`, with `[F]_{∅,∅} = 1`.
pub fn minor<T: Scalar>(f: &Matrix<T>, rows: &IndexSet, cols: &IndexSet) -> Result<T> {
    if rows.len() != cols.len() {
        return domain(format!("minor needs |A| = |I|, got {} and {}", rows.len(), cols.len()));
    }
    if rows.iter().any(|a| a > f.rows()) {
        return domain("row index beyond matrix");
    }
    if cols.iter().any(|i| i > f.cols()) {
        return domain("column index beyond matrix");
    }
    Ok(f.select(rows, cols).det())
}

pub fn all_minors<T: Scalar>(f: &Matrix<T>, layout: &MinorLayout) -> Result<Vec<T>> {
    if f.rows() != layout.m() || f.cols() != layout.n() {
        return domain(format!(
            "{}x{} matrix against a {}x{} layout",
            f.rows(),
            f.cols(),
            layout.m(),
            layout.n()
        ));
    }
    Ok(layout.pairs().iter().map(|p| f.select(&p.rows, &p.cols).det()).collect())
}

/// Both sides of Cauchy–Binet: `[MN]_{I,J}` and `Σ_K [M]_{I,K} [N]_{K,J}`.
pub fn cauchy_binet_check<T: Scalar>(
    mm: &Matrix<T>,
    nn: &Matrix<T>,
    rows: &IndexSet,
    cols: &IndexSet,
) -> Result<(T, T)> {
    if mm.cols() != nn.rows() {
        return domain(format!("inner dimensions {} and {} differ", mm.cols(), nn.rows()));
    }
    let k = rows.len();
    if cols.len() != k {
        return domain("|I| != |J|");
    }
    if k > mm.cols() {
        return domain(format!("|I| = {k} exceeds inner dimension {}", mm.cols()));
    }
    if rows.iter().any(|i| i > mm.rows()) || cols.iter().any(|j| j > nn.cols()) {
        return domain("index set outside matrix shape");
    }
    let lhs = minor(&mm.matmul(nn)?, rows, cols)?;
    let l = mm.cols();
    let rhs = if k == 0 {
        T::one()
    } else {
        IndexSet::subsets(l, k).iter().fold(T::zero(), |acc, inner| {
            acc + mm.select(rows, inner).det() * nn.select(inner, cols).det()
        })
    };
    Ok((lhs, rhs))
}

fn gram_plus_identity<T: Scalar>(f: &Matrix<T>) -> Matrix<T> {
    Matrix::identity(f.cols()).add(&f.transpose().matmul(f).expect("shapes agree"))
}

/// `ξ(F) = det(I_n + FᵀF)`.
pub fn xi<T: Scalar>(f: &Matrix<T>) -> T {
    gram_plus_identity(f).det()
}

/// `1 + Σ [F]²_{A,I}` over the layout.
pub fn xi_minor_sum<T: Scalar>(minors: &[T]) -> T {
    minors.iter().fold(T::one(), |acc, m| acc + m.clone() * m.clone())
}

/// `Z = ξ(F) (I_n + FᵀF)^{-1}`, computed as the adjugate of `I_n + FᵀF`.
pub fn z_matrix<T: Scalar>(f: &Matrix<T>) -> Matrix<T> {
    gram_plus_identity(f).adjugate()
}

/// `ξ'(F)_{αi} = ξ(F) (I_n + FᵀF)^{-1}_{ij} F_{αj}`.
pub fn xi_prime<T: Scalar>(f: &Matrix<T>) -> Matrix<T> {
    f.matmul(&z_matrix(f)).expect("shapes agree")
}

/// `ξ'` assembled from minors: `Σ (-1)^{O_A(α)+O_I(i)} [F]_{A,I} [F]_{A∖α,I∖i}`.
pub fn xi_prime_minor_sum<T: Scalar>(minors: &[T], layout: &MinorLayout) -> Matrix<T> {
    let mut out: Matrix<T> = Matrix::zeros(layout.m(), layout.n());
    let one = T::one();
    for (p, pair) in layout.pairs().iter().enumerate() {
        for alpha in pair.rows.iter() {
            for i in pair.cols.iter() {
                let sign = T::sign(pair.rows.rank(alpha) + pair.cols.rank(i));
                let lower = layout.value(minors, &pair.rows.without(alpha), &pair.cols.without(i), &one);
                let v = out.at(alpha - 1, i - 1).clone() + sign * minors[p].clone() * lower;
                out.set(alpha - 1, i - 1, v);
            }
        }
    }
    out
}

/// Right-hand side of the minor expansion of `ξ (I + FᵀF)^{-1}`.
pub fn z_minor_sum<T: Scalar>(minors: &[T], layout: &MinorLayout) -> Matrix<T> {
    let n = layout.n();
    let diag = xi_minor_sum(minors);
    let mut out = Matrix::from_fn(n, n, |i, j| if i == j { diag.clone() } else { T::zero() });
    for (p, pair) in layout.pairs().iter().enumerate() {
        for j in pair.cols.iter() {
            let reduced = pair.cols.without(j);
            for i in 1..=n {
                if reduced.contains(i) {
                    continue;
                }
                let swapped = reduced.with(i);
                let sign = T::sign(pair.cols.rank(j) + reduced.rank(i));
                let other = layout.value(minors, &pair.rows, &swapped, &T::one());
                let v = out.at(i - 1, j - 1).clone() - sign * other * minors[p].clone();
                out.set(i - 1, j - 1, v);
            }
        }
    }
    out
}

/// Mixed Laplace sum `Σ_p (-1)^{p+q} [F]_{A∖α_p, I∖i_q} F_{α_p j}`
/// (`q` is 1-based, `j` is a 1-based column).
pub fn laplace_mixed<T: Scalar>(
    f: &Matrix<T>,
    rows: &IndexSet,
    cols: &IndexSet,
    q: usize,
    j: usize,
) -> Result<T> {
    let (iq, _) = check_laplace_args(f, rows, cols, q, j)?;
    let reduced_cols = cols.without(iq);
    let mut acc = T::zero();
    for (p0, alpha) in rows.iter().enumerate() {
        let sub = minor(f, &rows.without(alpha), &reduced_cols)?;
        acc = acc + T::sign(p0 + 1 + q) * sub * f.at(alpha - 1, j - 1).clone();
    }
    Ok(acc)
}

/// Closed form of [`laplace_mixed`]: a signed single minor, or zero when
/// `j` is already among the remaining columns.
pub fn laplace_mixed_contract<T: Scalar>(
    f: &Matrix<T>,
    rows: &IndexSet,
    cols: &IndexSet,
    q: usize,
    j: usize,
) -> Result<T> {
    let (iq, _) = check_laplace_args(f, rows, cols, q, j)?;
    let reduced = cols.without(iq);
    if reduced.contains(j) {
        return Ok(T::zero());
    }
    let target = reduced.with(j);
    Ok(T::sign(target.rank(j) + q) * minor(f, rows, &target)?)
}

fn check_laplace_args<T: Scalar>(
    f: &Matrix<T>,
    rows: &IndexSet,
    cols: &IndexSet,
    q: usize,
    j: usize,
) -> Result<(usize, usize)> {
    let k = rows.len();
    if k == 0 || cols.len() != k {
        return domain("laplace_mixed needs |A| = |I| >= 1");
    }
    if q == 0 || q > k {
        return domain(format!("position q = {q} outside [1, {k}]"));
    }
    if j == 0 || j > f.cols() {
        return domain(format!("column j = {j} outside [1, {}]", f.cols()));
    }
    if rows.iter().any(|a| a > f.rows()) || cols.iter().any(|i| i > f.cols()) {
        return domain("index set outside matrix shape");
    }
    Ok((cols.nth(q).expect("q <= k"), k))
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    (0..k.min(n - k)).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}
