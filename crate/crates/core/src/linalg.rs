//! Dense exact linear algebra over ℚ(i).

use std::fmt;
use std::ops::{Add, Mul, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::scalars::{Gauss, Rational};

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Gauss>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![Gauss::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Matrix::scalar(n, &Gauss::one())
    }

    pub fn scalar(n: usize, c: &Gauss) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = c.clone();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Gauss>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Matrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn from_columns(cols: &[Vec<Gauss>], rows: usize) -> Self {
        let mut m = Matrix::zeros(rows, cols.len());
        for (j, col) in cols.iter().enumerate() {
            assert_eq!(col.len(), rows);
            for (i, v) in col.iter().enumerate() {
                m[(i, j)] = v.clone();
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[Gauss] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<Gauss> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    /// `Some(c)` when the matrix equals `c·I`.
    pub fn as_scalar(&self) -> Option<Gauss> {
        if !self.is_square() {
            return None;
        }
        if self.rows == 0 {
            return Some(Gauss::zero());
        }
        let c = self[(0, 0)].clone();
        (*self == Matrix::scalar(self.rows, &c)).then_some(c)
    }

    pub fn trace(&self) -> Gauss {
        let mut t = Gauss::zero();
        for i in 0..self.rows.min(self.cols) {
            t += &self[(i, i)];
        }
        t
    }

    pub fn scale(&self, c: &Gauss) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * c).collect(),
        }
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn apply(&self, v: &[Gauss]) -> Vec<Gauss> {
        assert_eq!(v.len(), self.cols, "vector length mismatch");
        (0..self.rows)
            .map(|i| {
                let mut acc = Gauss::zero();
                for (a, b) in self.row(i).iter().zip(v) {
                    if !a.is_zero() && !b.is_zero() {
                        acc += a * b;
                    }
                }
                acc
            })
            .collect()
    }

    /// `self·other − other·self`.
    pub fn commutator(&self, other: &Matrix) -> Matrix {
        &(self * other) - &(other * self)
    }

    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        m.row_reduce().len()
    }

    /// In-place reduced row echelon form; returns the pivot columns.
    pub fn row_reduce(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(p) = (r..self.rows).find(|&i| !self[(i, c)].is_zero()) else {
                continue;
            };
            self.swap_rows(r, p);
            let inv = self[(r, c)].inv().expect("nonzero pivot");
            for j in c..self.cols {
                let v = &self[(r, j)] * &inv;
                self[(r, j)] = v;
            }
            for i in 0..self.rows {
                if i == r || self[(i, c)].is_zero() {
                    continue;
                }
                let f = self[(i, c)].clone();
                for j in c..self.cols {
                    if self[(r, j)].is_zero() {
                        continue;
                    }
                    let v = &self[(i, j)] - &(&f * &self[(r, j)]);
                    self[(i, j)] = v;
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    /// Basis of the right kernel `{v : self·v = 0}`.
    pub fn nullspace(&self) -> Vec<Vec<Gauss>> {
        let mut m = self.clone();
        let pivots = m.row_reduce();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut v = vec![Gauss::zero(); self.cols];
                v[f] = Gauss::one();
                for (r, &p) in pivots.iter().enumerate() {
                    v[p] = -&m[(r, f)];
                }
                v
            })
            .collect()
    }

    /// One solution of `self·x = b`, or `None` when the system is inconsistent.
    pub fn solve(&self, b: &[Gauss]) -> Option<Vec<Gauss>> {
        assert_eq!(b.len(), self.rows);
        let mut aug = Matrix::zeros(self.rows, self.cols + 1);
        for i in 0..self.rows {
            for j in 0..self.cols {
                aug[(i, j)] = self[(i, j)].clone();
            }
            aug[(i, self.cols)] = b[i].clone();
        }
        let pivots = aug.row_reduce();
        if pivots.last() == Some(&self.cols) {
            return None;
        }
        let mut x = vec![Gauss::zero(); self.cols];
        for (r, &p) in pivots.iter().enumerate() {
            x[p] = aug[(r, self.cols)].clone();
        }
        Some(x)
    }

    /// Coefficients `c_0..c_n` of `det(t·I − A)` (Faddeev–LeVerrier).
    pub fn charpoly(&self) -> Vec<Gauss> {
        assert!(self.is_square());
        let n = self.rows;
        let mut coeffs = vec![Gauss::zero(); n + 1];
        coeffs[n] = Gauss::one();
        let mut m = Matrix::zeros(n, n);
        for k in 1..=n {
            let mut next = self * &m;
            for i in 0..n {
                next[(i, i)] += &coeffs[n - k + 1];
            }
            m = next;
            let am = self * &m;
            coeffs[n - k] = -(am.trace().scale(&Rational::new(1.into(), (k as i64).into())));
        }
        coeffs
    }

    /// Eigenvalues lying in ℚ together with algebraic multiplicities.
    pub fn spectrum(&self) -> Spectrum {
        let charpoly = self.charpoly();
        let roots = rational_roots(&charpoly);
        let found: usize = roots.iter().map(|(_, m)| m).sum();
        let complete = found == self.rows;
        let diagonalizable = complete
            && roots.iter().all(|(lam, mult)| {
                let shifted = self - &Matrix::scalar(self.rows, lam);
                self.rows - shifted.rank() == *mult
            });
        Spectrum {
            eigenvalues: roots,
            charpoly,
            complete,
            diagonalizable,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Spectrum {
    /// Sorted descending by real part.
    pub eigenvalues: Vec<(Gauss, usize)>,
    pub charpoly: Vec<Gauss>,
    /// All roots of the characteristic polynomial were found in ℚ.
    pub complete: bool,
    pub diagonalizable: bool,
}

impl Spectrum {
    pub fn is_invertible(&self) -> bool {
        // c_0 = ±det
        !self.charpoly[0].is_zero()
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = Gauss;
    fn index(&self, (i, j): (usize, usize)) -> &Gauss {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Gauss {
        &mut self.data[i * self.cols + j]
    }
}

impl<'b> Mul<&'b Matrix> for &Matrix {
    type Output = Matrix;
    fn mul(self, rhs: &'b Matrix) -> Matrix {
        assert_eq!(self.cols, rhs.rows, "matrix product shape mismatch");
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let b = &rhs[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] += a * b;
                    }
                }
            }
        }
        out
    }
}

impl<'b> Add<&'b Matrix> for &Matrix {
    type Output = Matrix;
    fn add(self, rhs: &'b Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl<'b> Sub<&'b Matrix> for &Matrix {
    type Output = Matrix;
    fn sub(self, rhs: &'b Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(ToString::to_string).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

/// Incrementally maintained subspace of `Gauss^dim` kept in reduced echelon form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subspace {
    dim: usize,
    // (pivot column, row with 1 at pivot and 0 at every other pivot)
    rows: Vec<(usize, Vec<Gauss>)>,
}

impl Subspace {
    pub fn new(dim: usize) -> Self {
        Subspace {
            dim,
            rows: Vec::new(),
        }
    }

    pub fn full(dim: usize) -> Self {
        let mut s = Subspace::new(dim);
        for i in 0..dim {
            let mut e = vec![Gauss::zero(); dim];
            e[i] = Gauss::one();
            s.insert(&e);
        }
        s
    }

    pub fn ambient_dim(&self) -> usize {
        self.dim
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    fn reduce(&self, v: &[Gauss]) -> Vec<Gauss> {
        let mut w = v.to_vec();
        for (p, row) in &self.rows {
            if w[*p].is_zero() {
                continue;
            }
            let f = w[*p].clone();
            for (a, b) in w.iter_mut().zip(row) {
                if !b.is_zero() {
                    *a -= &f * b;
                }
            }
        }
        w
    }

    pub fn contains(&self, v: &[Gauss]) -> bool {
        self.reduce(v).iter().all(Zero::is_zero)
    }

    /// Adds `v`; returns whether the dimension grew.
    pub fn insert(&mut self, v: &[Gauss]) -> bool {
        assert_eq!(v.len(), self.dim);
        let w = self.reduce(v);
        let Some(p) = w.iter().position(|c| !c.is_zero()) else {
            return false;
        };
        let inv = w[p].inv().expect("nonzero");
        let w: Vec<Gauss> = w.iter().map(|c| c * &inv).collect();
        for (_, row) in self.rows.iter_mut() {
            if row[p].is_zero() {
                continue;
            }
            let f = row[p].clone();
            for (a, b) in row.iter_mut().zip(&w) {
                if !b.is_zero() {
                    *a -= &f * b;
                }
            }
        }
        self.rows.push((p, w));
        self.rows.sort_by_key(|(p, _)| *p);
        true
    }

    pub fn basis(&self) -> Vec<Vec<Gauss>> {
        self.rows.iter().map(|(_, r)| r.clone()).collect()
    }
}

fn poly_eval(coeffs: &[Rational], x: &Rational) -> Rational {
    coeffs
        .iter()
        .rev()
        .fold(Rational::zero(), |acc, c| acc * x + c)
}

/// Synthetic division by `(t − r)`; assumes `r` is a root.
fn deflate(coeffs: &[Rational], r: &Rational) -> Vec<Rational> {
    let n = coeffs.len() - 1;
    let mut out = vec![Rational::zero(); n];
    let mut carry = Rational::zero();
    for k in (1..=n).rev() {
        carry = &coeffs[k] + carry * r;
        out[k - 1] = carry.clone();
    }
    out
}

fn divisors(n: &BigInt) -> Option<Vec<BigInt>> {
    let n = n.abs().to_u128()?;
    if n == 0 || n > 1u128 << 62 {
        return None;
    }
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = 1u128;
    while d * d <= n {
        if n % d == 0 {
            small.push(d);
            if d * d != n {
                large.push(n / d);
            }
        }
        d += 1;
    }
    small.extend(large.into_iter().rev());
    Some(small.into_iter().map(BigInt::from).collect())
}

/// Rational roots (with multiplicity) of a polynomial with Gaussian-rational
/// coefficients `c_0..c_n`. Non-rational roots are not reported.
pub fn rational_roots(coeffs: &[Gauss]) -> Vec<(Gauss, usize)> {
    let re: Vec<Rational> = coeffs.iter().map(|c| c.re.clone()).collect();
    let im: Vec<Rational> = coeffs.iter().map(|c| c.im.clone()).collect();
    let im_zero = im.iter().all(Zero::is_zero);
    let mut roots: Vec<(Rational, usize)> = Vec::new();

    let mut p = re.clone();
    while p.len() > 1 && p.last().is_some_and(Zero::is_zero) {
        p.pop();
    }
    let mut zero_mult = 0;
    while p.len() > 1 && p[0].is_zero() {
        p.remove(0);
        zero_mult += 1;
    }
    if zero_mult > 0 {
        roots.push((Rational::zero(), zero_mult));
    }
    if p.len() > 1 {
        let denom_lcm = p.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let ints: Vec<BigInt> = p.iter().map(|c| (c * &denom_lcm).to_integer()).collect();
        let (Some(a0), Some(an)) = (
            divisors(&ints[0]),
            divisors(ints.last().expect("nonempty")),
        ) else {
            return finish(roots, &im, im_zero);
        };
        let mut cands: Vec<Rational> = Vec::new();
        for num in &a0 {
            for den in &an {
                for s in [1i64, -1] {
                    let c = Rational::new(num * s, den.clone());
                    if !cands.contains(&c) {
                        cands.push(c);
                    }
                }
            }
        }
        for c in cands {
            let mut mult = 0;
            while p.len() > 1 && poly_eval(&p, &c).is_zero() {
                p = deflate(&p, &c);
                mult += 1;
            }
            if mult > 0 {
                roots.push((c, mult));
            }
        }
    }
    finish(roots, &im, im_zero)
}

fn finish(roots: Vec<(Rational, usize)>, im: &[Rational], im_zero: bool) -> Vec<(Gauss, usize)> {
    let mut out: Vec<(Gauss, usize)> = roots
        .into_iter()
        .filter(|(r, _)| im_zero || poly_eval(im, r).is_zero())
        .map(|(r, m)| (Gauss::from_rational(r), m))
        .collect();
    out.sort_by(|a, b| b.0.cmp(&a.0));
    out
}

/// Reports a matrix dimension mismatch as an error rather than a panic.
pub fn ensure_square(m: &Matrix, n: usize) -> Result<()> {
    if m.rows() == n && m.cols() == n {
        Ok(())
    } else {
        Err(Error::Dimension(format!(
            "expected {n}x{n}, found {}x{}",
            m.rows(),
            m.cols()
        )))
    }
}
