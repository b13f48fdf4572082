//! Small dense matrices and polynomials over F_p.

use serde::{Deserialize, Serialize};

use crate::ffield::Field;

/// Row-major matrix of residues.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<u32>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> u32) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn diag(field: &Field, entries: &[i64]) -> Self {
        let n = entries.len();
        let mut m = Matrix::zeros(n, n);
        for (i, &e) in entries.iter().enumerate() {
            m.set(i, i, field.reduce(e));
        }
        m
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u32 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: u32) {
        self.data[r * self.cols + c] = v;
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |r, c| self.get(c, r))
    }

    pub fn mul(&self, field: &Field, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows);
        let p = field.p() as u64;
        Matrix::from_fn(self.rows, other.cols, |r, c| {
            let mut acc = 0u64;
            for k in 0..self.cols {
                acc = (acc + self.get(r, k) as u64 * other.get(k, c) as u64) % p;
            }
            acc as u32
        })
    }

    pub fn apply(&self, field: &Field, v: &[u32]) -> Vec<u32> {
        assert_eq!(self.cols, v.len());
        let p = field.p() as u64;
        (0..self.rows)
            .map(|r| {
                let mut acc = 0u64;
                for k in 0..self.cols {
                    acc = (acc + self.get(r, k) as u64 * v[k] as u64) % p;
                }
                acc as u32
            })
            .collect()
    }

    pub fn scale(&self, field: &Field, k: u32) -> Matrix {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&x| field.mul(x, k)).collect() }
    }

    pub fn sub(&self, field: &Field, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| field.sub(a, b)).collect(),
        }
    }

    pub fn is_symmetric(&self) -> bool {
        self.rows == self.cols && (0..self.rows).all(|r| (0..r).all(|c| self.get(r, c) == self.get(c, r)))
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0)
    }

    /// Row echelon form; returns (rank, determinant if square).
    fn eliminate(&self, field: &Field) -> (usize, Matrix, u32) {
        let mut m = self.clone();
        let mut det = 1u32;
        let mut rank = 0;
        for c in 0..m.cols {
            if rank == m.rows {
                break;
            }
            let Some(piv) = (rank..m.rows).find(|&r| m.get(r, c) != 0) else {
                det = 0;
                continue;
            };
            if piv != rank {
                for k in 0..m.cols {
                    let t = m.get(piv, k);
                    m.set(piv, k, m.get(rank, k));
                    m.set(rank, k, t);
                }
                det = field.neg(det);
            }
            let pv = m.get(rank, c);
            det = field.mul(det, pv);
            let inv = field.inv(pv).unwrap();
            for k in 0..m.cols {
                m.set(rank, k, field.mul(m.get(rank, k), inv));
            }
            for r in 0..m.rows {
                if r != rank && m.get(r, c) != 0 {
                    let f = m.get(r, c);
                    for k in 0..m.cols {
                        let v = field.sub(m.get(r, k), field.mul(f, m.get(rank, k)));
                        m.set(r, k, v);
                    }
                }
            }
            rank += 1;
        }
        if rank < m.rows.min(m.cols) || m.rows != m.cols {
            det = 0;
        }
        (rank, m, det)
    }

    pub fn rank(&self, field: &Field) -> usize {
        self.eliminate(field).0
    }

    pub fn det(&self, field: &Field) -> u32 {
        assert_eq!(self.rows, self.cols);
        if self.rows == 0 {
            return 1;
        }
        self.eliminate(field).2
    }

    pub fn inverse(&self, field: &Field) -> Option<Matrix> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let aug = Matrix::from_fn(n, 2 * n, |r, c| if c < n { self.get(r, c) } else if c - n == r { 1 } else { 0 });
        let (rank, red, _) = aug.eliminate(field);
        if rank < n || (0..n).any(|i| red.get(i, i) != 1) {
            return None;
        }
        Some(Matrix::from_fn(n, n, |r, c| red.get(r, n + c)))
    }

    /// Basis of the right kernel {x : M x = 0}.
    pub fn kernel(&self, field: &Field) -> Vec<Vec<u32>> {
        let (rank, red, _) = self.eliminate(field);
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r < rank && red.get(r, c) == 1 && (0..c).all(|k| red.get(r, k) == 0) {
                pivots.push(c);
                r += 1;
            }
        }
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut x = vec![0u32; self.cols];
                x[f] = 1;
                for (row, &pc) in pivots.iter().enumerate() {
                    x[pc] = field.neg(red.get(row, f));
                }
                x
            })
            .collect()
    }
}

/// Diagonalize a symmetric matrix by congruence; returns the diagonal entries
/// (zeros included). Works for p odd.
pub fn diagonalize_symmetric(field: &Field, s: &Matrix) -> Vec<u32> {
    assert!(s.is_symmetric());
    let n = s.rows;
    let mut m = s.clone();
    let mut out = Vec::with_capacity(n);
    let mut active: Vec<usize> = (0..n).collect();
    while !active.is_empty() {
        // find a pivot with nonzero diagonal, creating one if needed
        let mut piv = active.iter().copied().find(|&i| m.get(i, i) != 0);
        if piv.is_none() {
            let pair = active
                .iter()
                .flat_map(|&i| active.iter().map(move |&j| (i, j)))
                .find(|&(i, j)| i != j && m.get(i, j) != 0);
            match pair {
                None => {
                    // remaining block is zero
                    out.extend(std::iter::repeat(0).take(active.len()));
                    break;
                }
                Some((i, j)) => {
                    // e_i <- e_i + e_j makes the (i,i) entry 2 m_ij != 0
                    for k in 0..n {
                        let v = field.add(m.get(i, k), m.get(j, k));
                        m.set(i, k, v);
                    }
                    for k in 0..n {
                        let v = field.add(m.get(k, i), m.get(k, j));
                        m.set(k, i, v);
                    }
                    piv = Some(i);
                }
            }
        }
        let i = piv.unwrap();
        let a = m.get(i, i);
        let inv = field.inv(a).unwrap();
        for &j in active.iter() {
            if j == i {
                continue;
            }
            let f = field.mul(m.get(j, i), inv);
            if f == 0 {
                continue;
            }
            for k in 0..n {
                let v = field.sub(m.get(j, k), field.mul(f, m.get(i, k)));
                m.set(j, k, v);
            }
            for k in 0..n {
                let v = field.sub(m.get(k, j), field.mul(f, m.get(k, i)));
                m.set(k, j, v);
            }
        }
        out.push(a);
        active.retain(|&x| x != i);
    }
    out
}

/// For a diagonalized form, whether (-1)^{r/2} times the product of the r
/// nonzero entries is a square. `None` when r is odd (no condition).
pub fn split_condition(field: &Field, diag: &[u32]) -> Option<bool> {
    let nz: Vec<u32> = diag.iter().copied().filter(|&x| x != 0).collect();
    if nz.len() % 2 == 1 {
        return None;
    }
    let mut d = if (nz.len() / 2) % 2 == 0 { 1 } else { field.p() - 1 };
    for x in nz {
        d = field.mul(d, x);
    }
    Some(field.is_square(d))
}

/// Polynomial over F_p, low degree first, trimmed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolyFp {
    pub coeffs: Vec<u32>,
}

impl PolyFp {
    pub fn new(mut coeffs: Vec<u32>) -> Self {
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        PolyFp { coeffs }
    }

    pub fn degree(&self) -> Option<usize> {
        if self.coeffs.is_empty() {
            None
        } else {
            Some(self.coeffs.len() - 1)
        }
    }

    pub fn eval(&self, field: &Field, x: u32) -> u32 {
        self.coeffs.iter().rev().fold(0, |acc, &c| field.add(field.mul(acc, x), c))
    }

    pub fn derivative(&self, field: &Field) -> PolyFp {
        PolyFp::new(
            self.coeffs.iter().enumerate().skip(1).map(|(i, &c)| field.mul(c, (i as u64 % field.p() as u64) as u32)).collect(),
        )
    }

    fn rem(&self, field: &Field, d: &PolyFp) -> PolyFp {
        let dd = d.degree().expect("division by zero polynomial");
        let mut r = self.coeffs.clone();
        let lead_inv = field.inv(d.coeffs[dd]).unwrap();
        while r.len() > dd && !r.is_empty() {
            let k = r.len() - 1;
            let f = field.mul(r[k], lead_inv);
            for i in 0..=dd {
                r[k - dd + i] = field.sub(r[k - dd + i], field.mul(f, d.coeffs[i]));
            }
            while r.last() == Some(&0) {
                r.pop();
            }
        }
        PolyFp::new(r)
    }

    pub fn gcd(&self, field: &Field, other: &PolyFp) -> PolyFp {
        let (mut a, mut b) = (self.clone(), other.clone());
        while b.degree().is_some() {
            let r = a.rem(field, &b);
            a = b;
            b = r;
        }
        a
    }

    /// Roots in F_p with multiplicities, by trial division.
    pub fn roots_with_multiplicity(&self, field: &Field) -> Vec<(u32, usize)> {
        let mut out = Vec::new();
        for x in 0..field.p() {
            let mut q = self.clone();
            let mut mult = 0;
            while q.degree().map_or(false, |d| d > 0) && q.eval(field, x) == 0 {
                q = q.div_linear(field, x);
                mult += 1;
            }
            if mult > 0 {
                out.push((x, mult));
            }
        }
        out
    }

    fn div_linear(&self, field: &Field, root: u32) -> PolyFp {
        // synthetic division by (X - root)
        let n = self.coeffs.len();
        let mut q = vec![0u32; n - 1];
        let mut carry = 0u32;
        for i in (1..n).rev() {
            carry = field.add(self.coeffs[i], field.mul(carry, root));
            q[i - 1] = carry;
        }
        PolyFp::new(q)
    }
}

/// det(lambda * a - b) as a polynomial in lambda, by evaluation at deg+1
/// points and Lagrange interpolation mod p. Needs p > n.
pub fn pencil_determinant(field: &Field, a: &Matrix, b: &Matrix) -> PolyFp {
    let n = a.rows;
    assert!((field.p() as usize) > n, "p must exceed the pencil size");
    let xs: Vec<u32> = (0..=n as u32).collect();
    let ys: Vec<u32> = xs.iter().map(|&x| a.scale(field, x).sub(field, b).det(field)).collect();
    let mut coeffs = vec![0u32; n + 1];
    for (i, &xi) in xs.iter().enumerate() {
        // basis polynomial prod_{j != i} (X - x_j) / (x_i - x_j)
        let mut basis = vec![1u32];
        let mut denom = 1u32;
        for (j, &xj) in xs.iter().enumerate() {
            if i == j {
                continue;
            }
            let mut nb = vec![0u32; basis.len() + 1];
            for (k, &c) in basis.iter().enumerate() {
                nb[k + 1] = field.add(nb[k + 1], c);
                nb[k] = field.sub(nb[k], field.mul(c, xj));
            }
            basis = nb;
            denom = field.mul(denom, field.sub(xi, xj));
        }
        let f = field.mul(ys[i], field.inv(denom).unwrap());
        for (k, &c) in basis.iter().enumerate() {
            coeffs[k] = field.add(coeffs[k], field.mul(f, c));
        }
    }
    PolyFp::new(coeffs)
}
