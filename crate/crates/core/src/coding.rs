//! Prime-field arithmetic, dense matrices over F_q, Gaussian elimination,
//! Vandermonde MDS generators, and uniformly random full-rank matrices.

use rand::Rng;

use crate::error::{Error, Result};

/// The prime field F_q. Elements are `u64` values already reduced mod `q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Field {
    q: u64,
}

impl Field {
    pub fn new(q: u64) -> Result<Self> {
        if !is_prime(q) {
            return Err(Error::BadParams(format!("q = {q} is not prime")));
        }
        Ok(Field { q })
    }

    pub fn modulus(&self) -> u64 {
        self.q
    }

    pub fn reduce(&self, v: u64) -> u64 {
        v % self.q
    }

    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.q {
            s - self.q
        } else {
            s
        }
    }

    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.q - b
        }
    }

    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.q - a
        }
    }

    pub fn mul(&self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.q as u128) as u64
    }

    pub fn pow(&self, mut base: u64, mut exp: u64) -> u64 {
        let mut acc = 1u64;
        base %= self.q;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    pub fn inv(&self, a: u64) -> Result<u64> {
        if a % self.q == 0 {
            return Err(Error::DivideByZero { q: self.q });
        }
        // Fermat: a^(q-2) for prime q.
        Ok(self.pow(a, self.q - 2))
    }

    /// Uniform element of F_q.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        rng.random_range(0..self.q)
    }
}

/// Deterministic Miller-Rabin, exact for all u64 inputs.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    let mul = |a: u64, b: u64| ((a as u128 * b as u128) % n as u128) as u64;
    let powmod = |mut base: u64, mut exp: u64| {
        let mut acc = 1u64;
        base %= n;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = mul(acc, base);
            }
            base = mul(base, base);
            exp >>= 1;
        }
        acc
    };
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = powmod(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 0..s - 1 {
            x = mul(x, x);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Dense row-major matrix over F_q. The field is passed to each operation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<u64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1;
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<u64>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        Ok(Matrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn uniform<R: Rng + ?Sized>(rows: usize, cols: usize, field: &Field, rng: &mut R) -> Self {
        Matrix {
            rows,
            cols,
            data: (0..rows * cols).map(|_| field.sample(rng)).collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &[u64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [u64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn submatrix_rows(&self, which: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(which.len() * self.cols);
        for &r in which {
            data.extend_from_slice(self.row(r));
        }
        Matrix {
            rows: which.len(),
            cols: self.cols,
            data,
        }
    }

    pub fn add(&self, other: &Matrix, field: &Field) -> Result<Matrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch(format!(
                "add {}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| field.add(a, b))
            .collect();
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn sub(&self, other: &Matrix, field: &Field) -> Result<Matrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch(format!(
                "sub {}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| field.sub(a, b))
            .collect();
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn mul(&self, other: &Matrix, field: &Field) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "mul {}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for t in 0..self.cols {
                let a = self[(i, t)];
                if a == 0 {
                    continue;
                }
                for j in 0..other.cols {
                    let v = field.mul(a, other[(t, j)]);
                    out[(i, j)] = field.add(out[(i, j)], v);
                }
            }
        }
        Ok(out)
    }

    /// Row-space rank via Gaussian elimination over F_q.
    pub fn rank(&self, field: &Field) -> usize {
        let mut m = self.clone();
        let mut rank = 0;
        for col in 0..m.cols {
            let pivot = (rank..m.rows).find(|&r| m[(r, col)] != 0);
            let Some(p) = pivot else { continue };
            m.swap_rows(rank, p);
            let inv = field
                .inv(m[(rank, col)])
                .expect("pivot is nonzero by choice");
            for j in col..m.cols {
                m[(rank, j)] = field.mul(m[(rank, j)], inv);
            }
            for r in 0..m.rows {
                if r != rank && m[(r, col)] != 0 {
                    let factor = m[(r, col)];
                    for j in col..m.cols {
                        let v = field.mul(factor, m[(rank, j)]);
                        m[(r, j)] = field.sub(m[(r, j)], v);
                    }
                }
            }
            rank += 1;
            if rank == m.rows {
                break;
            }
        }
        rank
    }

    /// Solve `self * x = rhs` for square invertible `self`; `rhs` may have
    /// several columns.
    pub fn solve(&self, rhs: &Matrix, field: &Field) -> Result<Matrix> {
        if self.rows != self.cols || self.rows != rhs.rows {
            return Err(Error::DimensionMismatch(format!(
                "solve {}x{} vs rhs {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut b = rhs.clone();
        for col in 0..n {
            let pivot = (col..n).find(|&r| a[(r, col)] != 0).ok_or_else(|| {
                Error::DimensionMismatch("singular matrix in solve".into())
            })?;
            a.swap_rows(col, pivot);
            b.swap_rows(col, pivot);
            let inv = field.inv(a[(col, col)])?;
            for j in 0..n {
                a[(col, j)] = field.mul(a[(col, j)], inv);
            }
            for j in 0..b.cols {
                b[(col, j)] = field.mul(b[(col, j)], inv);
            }
            for r in 0..n {
                if r != col && a[(r, col)] != 0 {
                    let factor = a[(r, col)];
                    for j in 0..n {
                        let v = field.mul(factor, a[(col, j)]);
                        a[(r, j)] = field.sub(a[(r, j)], v);
                    }
                    for j in 0..b.cols {
                        let v = field.mul(factor, b[(col, j)]);
                        b[(r, j)] = field.sub(b[(r, j)], v);
                    }
                }
            }
        }
        Ok(b)
    }

    pub fn invert(&self, field: &Field) -> Result<Matrix> {
        self.solve(&Matrix::identity(self.rows), field)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = u64;
    fn index(&self, (r, c): (usize, usize)) -> &u64 {
        &self.data[r * self.cols + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut u64 {
        &mut self.data[r * self.cols + c]
    }
}

/// Generator matrix of a (Y, Z) MDS code: every Z x Z row-submatrix is
/// invertible.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MdsGenerator {
    matrix: Matrix,
}

impl MdsGenerator {
    /// Vandermonde rows over distinct nonzero points 1..=Y; entry (i, j) is
    /// (i + 1)^j. The MDS property holds by distinctness of the points.
    pub fn vandermonde(y: usize, z: usize, field: &Field) -> Result<Self> {
        if y < z {
            return Err(Error::DimensionMismatch(format!(
                "MDS generator needs Y >= Z, got {y} < {z}"
            )));
        }
        if field.modulus() <= y as u64 {
            return Err(Error::FieldTooSmall {
                q: field.modulus(),
                needed: y,
            });
        }
        let mut matrix = Matrix::zeros(y, z);
        for i in 0..y {
            let point = (i + 1) as u64;
            let mut p = 1u64;
            for j in 0..z {
                matrix[(i, j)] = p;
                p = field.mul(p, point);
            }
        }
        Ok(MdsGenerator { matrix })
    }

    pub fn rows(&self) -> usize {
        self.matrix.rows()
    }

    pub fn cols(&self) -> usize {
        self.matrix.cols()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn row(&self, r: usize) -> &[u64] {
        self.matrix.row(r)
    }
}

/// Uniformly random invertible n x n matrix, by rejection on rank.
pub fn random_full_rank<R: Rng + ?Sized>(n: usize, field: &Field, rng: &mut R) -> Matrix {
    loop {
        let candidate = Matrix::uniform(n, n, field, rng);
        if candidate.rank(field) == n {
            return candidate;
        }
    }
}
