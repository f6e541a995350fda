//! Dense exact linear algebra over the rationals.
//!
//! Everything uses first-nonzero pivoting in the given order, so results
//! are deterministic functions of the input, never of a heuristic.

use crate::rat::Rat;

pub type Matrix = Vec<Vec<Rat>>;

pub fn zeros(rows: usize, cols: usize) -> Matrix {
    vec![vec![Rat::zero(); cols]; rows]
}

pub fn identity(n: usize) -> Matrix {
    let mut m = zeros(n, n);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = Rat::one();
    }
    m
}

pub fn mat_mul(a: &Matrix, b: &Matrix) -> Matrix {
    let rows = a.len();
    let inner = if rows > 0 { a[0].len() } else { 0 };
    let cols = if b.is_empty() { 0 } else { b[0].len() };
    assert!(b.len() == inner, "matrix dimension mismatch");
    let mut out = zeros(rows, cols);
    for i in 0..rows {
        for (k, bk) in b.iter().enumerate() {
            if a[i][k].is_zero() {
                continue;
            }
            for j in 0..cols {
                if !bk[j].is_zero() {
                    let t = &a[i][k] * &bk[j];
                    out[i][j] += &t;
                }
            }
        }
    }
    out
}

pub fn mat_vec(a: &Matrix, v: &[Rat]) -> Vec<Rat> {
    a.iter()
        .map(|row| {
            let mut s = Rat::zero();
            for (x, y) in row.iter().zip(v) {
                if !x.is_zero() && !y.is_zero() {
                    s += &(x * y);
                }
            }
            s
        })
        .collect()
}

/// Reduced row echelon form in place; returns the pivot columns.
pub fn rref(m: &mut Matrix) -> Vec<usize> {
    let rows = m.len();
    let cols = if rows > 0 { m[0].len() } else { 0 };
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        // First nonzero entry at or below row r.
        let Some(pr) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, pr);
        let inv = m[r][c].recip().expect("pivot is nonzero");
        for x in m[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                let pivot_row = m[r].clone();
                for (x, p) in m[i].iter_mut().zip(&pivot_row) {
                    let t = &f * p;
                    *x -= &t;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows {
            break;
        }
    }
    pivots
}

pub fn rank(m: &Matrix) -> usize {
    let mut m = m.clone();
    rref(&mut m).len()
}

/// Basis of the null space of a `rows x cols` matrix, one vector per free
/// column, in column order. The column count is explicit so that matrices
/// with no rows keep their full kernel.
pub fn kernel_basis(m: &Matrix, cols: usize) -> Vec<Vec<Rat>> {
    debug_assert!(m.iter().all(|r| r.len() == cols));
    let mut red = m.clone();
    let pivots = rref(&mut red);
    let pivot_set: std::collections::BTreeSet<usize> = pivots.iter().copied().collect();
    let mut basis = Vec::new();
    for free in 0..cols {
        if pivot_set.contains(&free) {
            continue;
        }
        let mut v = vec![Rat::zero(); cols];
        v[free] = Rat::one();
        for (r, &pc) in pivots.iter().enumerate() {
            v[pc] = -&red[r][free];
        }
        basis.push(v);
    }
    basis
}

/// Solves A x = b exactly. Returns None when inconsistent. When the system
/// is underdetermined the free variables are set to zero.
pub fn solve(a: &Matrix, b: &[Rat]) -> Option<Vec<Rat>> {
    let rows = a.len();
    let cols = if rows > 0 { a[0].len() } else { 0 };
    let mut aug: Matrix = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();
    let pivots = rref(&mut aug);
    if pivots.last().is_some_and(|&c| c == cols) {
        return None; // pivot in the rhs column
    }
    let mut x = vec![Rat::zero(); cols];
    for (r, &c) in pivots.iter().enumerate() {
        x[c] = aug[r][cols].clone();
    }
    Some(x)
}

/// Exact inverse; None when singular.
pub fn invert(a: &Matrix) -> Option<Matrix> {
    let n = a.len();
    let mut aug = zeros(n, 2 * n);
    for i in 0..n {
        assert!(a[i].len() == n, "inverse of non-square matrix");
        for j in 0..n {
            aug[i][j] = a[i][j].clone();
        }
        aug[i][n + i] = Rat::one();
    }
    let pivots = rref(&mut aug);
    if pivots.len() < n || pivots.iter().any(|&c| c >= n) {
        return None;
    }
    Some(
        aug.into_iter()
            .map(|row| row[n..].to_vec())
            .collect::<Matrix>(),
    )
}

/// A subspace of Q^n held as a canonical (rref) basis, rows = vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct Subspace {
    pub ambient: usize,
    rows: Matrix,
}

impl Subspace {
    pub fn from_vectors(ambient: usize, vectors: &[Vec<Rat>]) -> Self {
        let mut rows: Matrix = vectors
            .iter()
            .inspect(|v| assert!(v.len() == ambient, "vector length mismatch"))
            .cloned()
            .collect();
        let pivots = rref(&mut rows);
        rows.truncate(pivots.len());
        Subspace { ambient, rows }
    }

    pub fn zero(ambient: usize) -> Self {
        Subspace {
            ambient,
            rows: Vec::new(),
        }
    }

    pub fn full(ambient: usize) -> Self {
        Subspace {
            ambient,
            rows: identity(ambient),
        }
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn basis(&self) -> &[Vec<Rat>] {
        &self.rows
    }

    pub fn contains(&self, v: &[Rat]) -> bool {
        let mut m = self.rows.clone();
        m.push(v.to_vec());
        rank(&m) == self.dim()
    }

    pub fn contains_space(&self, other: &Subspace) -> bool {
        other.basis().iter().all(|v| self.contains(v))
    }

    pub fn sum(&self, other: &Subspace) -> Subspace {
        assert_eq!(self.ambient, other.ambient);
        let mut all = self.rows.clone();
        all.extend(other.rows.iter().cloned());
        Subspace::from_vectors(self.ambient, &all)
    }

    /// Intersection via the kernel of [A^T | B^T].
    pub fn intersect(&self, other: &Subspace) -> Subspace {
        assert_eq!(self.ambient, other.ambient);
        if self.dim() == 0 || other.dim() == 0 {
            return Subspace::zero(self.ambient);
        }
        // Columns: coefficients for self's basis then other's basis;
        // rows: ambient coordinates. Kernel vectors give u with
        // sum a_i u_i = sum b_j w_j.
        let cols = self.dim() + other.dim();
        let mut m = zeros(self.ambient, cols);
        for (j, v) in self.rows.iter().enumerate() {
            for i in 0..self.ambient {
                m[i][j] = v[i].clone();
            }
        }
        for (j, v) in other.rows.iter().enumerate() {
            for i in 0..self.ambient {
                m[i][self.dim() + j] = -&v[i];
            }
        }
        let ker = kernel_basis(&m, cols);
        let vectors: Vec<Vec<Rat>> = ker
            .iter()
            .map(|k| {
                let mut v = vec![Rat::zero(); self.ambient];
                for (j, basis_vec) in self.rows.iter().enumerate() {
                    if !k[j].is_zero() {
                        for i in 0..self.ambient {
                            v[i] += &(&k[j] * &basis_vec[i]);
                        }
                    }
                }
                v
            })
            .collect();
        Subspace::from_vectors(self.ambient, &vectors)
    }

    /// Vectors from `candidates`, taken in order, that extend this space;
    /// returns the chosen candidates. Deterministic greedy sweep.
    pub fn extend_by(&self, candidates: &[Vec<Rat>]) -> Vec<Vec<Rat>> {
        let mut rows = self.rows.clone();
        let mut chosen = Vec::new();
        let mut current = self.dim();
        for c in candidates {
            rows.push(c.clone());
            if rank(&rows) > current {
                current += 1;
                chosen.push(c.clone());
            } else {
                rows.pop();
            }
        }
        chosen
    }

    /// A vector in this space that is not in `other`, if any. Used for
    /// witnesses in reports.
    pub fn witness_not_in(&self, other: &Subspace) -> Option<Vec<Rat>> {
        self.rows.iter().find(|v| !other.contains(v)).cloned()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64) -> Rat {
        Rat::from_int(n)
    }

    #[test]
    fn rref_and_rank() {
        let mut m = vec![
            vec![r(1), r(2), r(3)],
            vec![r(2), r(4), r(6)],
            vec![r(0), r(1), r(1)],
        ];
        let p = rref(&mut m);
        assert_eq!(p, vec![0, 1]);
        assert_eq!(rank(&vec![vec![r(0); 3]; 2]), 0);
    }

    #[test]
    fn kernel_is_exact() {
        let m = vec![vec![r(1), r(2), r(3)], vec![r(0), r(1), r(1)]];
        let k = kernel_basis(&m, 3);
        assert_eq!(k.len(), 1);
        for row in &m {
            let dot: Rat = row
                .iter()
                .zip(&k[0])
                .fold(Rat::zero(), |acc, (a, b)| acc + a * b);
            assert!(dot.is_zero());
        }
    }

    #[test]
    fn solve_and_invert() {
        let a = vec![vec![r(2), r(1)], vec![r(1), r(1)]];
        let x = solve(&a, &[r(3), r(2)]).unwrap();
        assert_eq!(x, vec![r(1), r(1)]);
        let inv = invert(&a).unwrap();
        assert_eq!(mat_mul(&a, &inv), identity(2));
        let sing = vec![vec![r(1), r(2)], vec![r(2), r(4)]];
        assert!(invert(&sing).is_none());
        assert!(solve(&sing, &[r(1), r(3)]).is_none());
    }

    #[test]
    fn subspace_ops() {
        let a = Subspace::from_vectors(3, &[vec![r(1), r(0), r(0)], vec![r(0), r(1), r(0)]]);
        let b = Subspace::from_vectors(3, &[vec![r(0), r(1), r(1)], vec![r(0), r(0), r(1)]]);
        let i = a.intersect(&b);
        assert_eq!(i.dim(), 1);
        assert!(i.contains(&[r(0), r(1), r(0)]));
        assert_eq!(a.sum(&b).dim(), 3);
        assert!(!a.contains_space(&b));
    }
}
