//! Exact GF(2) linear algebra on bit-packed matrices: rank, kernel and
//! row-space bases, and congruence decomposition of symmetric zero-diagonal
//! (alternating) forms into hyperbolic 2×2 blocks.

use crate::error::{Error, Result};

/// A dense binary matrix with 64-bit packed rows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Gf2Matrix {
    rows: usize,
    cols: usize,
    words: usize,
    bits: Vec<u64>,
}

impl Gf2Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let words = cols.div_ceil(64).max(1);
        Self {
            rows,
            cols,
            words,
            bits: vec![0; rows * words],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.bits[i * self.words + j / 64] >> (j % 64) & 1 == 1
    }

    pub fn set(&mut self, i: usize, j: usize, v: bool) {
        let w = &mut self.bits[i * self.words + j / 64];
        if v {
            *w |= 1 << (j % 64);
        } else {
            *w &= !(1 << (j % 64));
        }
    }

    pub fn flip(&mut self, i: usize, j: usize) {
        self.bits[i * self.words + j / 64] ^= 1 << (j % 64);
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for w in 0..self.words {
            self.bits.swap(a * self.words + w, b * self.words + w);
        }
    }

    /// row a ^= row b.
    pub fn xor_row(&mut self, a: usize, b: usize) {
        for w in 0..self.words {
            let v = self.bits[b * self.words + w];
            self.bits[a * self.words + w] ^= v;
        }
    }

    pub fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            let x = self.get(i, a);
            let y = self.get(i, b);
            self.set(i, a, y);
            self.set(i, b, x);
        }
    }

    /// col a ^= col b.
    pub fn xor_col(&mut self, a: usize, b: usize) {
        for i in 0..self.rows {
            if self.get(i, b) {
                self.flip(i, a);
            }
        }
    }

    pub fn row_is_zero(&self, i: usize) -> bool {
        self.bits[i * self.words..(i + 1) * self.words]
            .iter()
            .all(|&w| w == 0)
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                if self.get(i, j) {
                    t.set(j, i, true);
                }
            }
        }
        t
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows);
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                if self.get(i, k) {
                    for w in 0..other.words {
                        let v = other.bits[k * other.words + w];
                        out.bits[i * out.words + w] ^= v;
                    }
                }
            }
        }
        out
    }

    pub fn is_symmetric_zero_diagonal(&self) -> bool {
        if self.rows != self.cols {
            return false;
        }
        for i in 0..self.rows {
            if self.get(i, i) {
                return false;
            }
            for j in (i + 1)..self.cols {
                if self.get(i, j) != self.get(j, i) {
                    return false;
                }
            }
        }
        true
    }

    /// Inverse via augmented elimination; `None` if singular.
    pub fn inverse(&self) -> Option<Self> {
        if self.rows != self.cols {
            return None;
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = Self::identity(n);
        for col in 0..n {
            let pivot = (col..n).find(|&r| a.get(r, col))?;
            a.swap_rows(col, pivot);
            inv.swap_rows(col, pivot);
            for r in 0..n {
                if r != col && a.get(r, col) {
                    a.xor_row(r, col);
                    inv.xor_row(r, col);
                }
            }
        }
        Some(inv)
    }

    /// Row i as a bit vector of length `cols`.
    pub fn row_vec(&self, i: usize) -> Vec<bool> {
        (0..self.cols).map(|j| self.get(i, j)).collect()
    }
}

/// Rank, kernel basis and row-space basis of a binary matrix.
pub struct Gf2RankInfo {
    pub rank: usize,
    /// Rows form a basis of {x : N·x = 0}.
    pub kernel_basis: Gf2Matrix,
    /// Rows span the row space (= Ker(N)^⊥ for symmetric N).
    pub row_space_basis: Gf2Matrix,
}

/// Exact Gaussian elimination over GF(2).
pub fn gf2_rank_kernel(n: &Gf2Matrix) -> Gf2RankInfo {
    let rows = n.rows();
    let cols = n.cols();
    let mut a = n.clone();
    let mut pivot_col_of_row = Vec::new();
    let mut r = 0usize;
    for c in 0..cols {
        let pivot = (r..rows).find(|&i| a.get(i, c));
        if let Some(p) = pivot {
            a.swap_rows(r, p);
            for i in 0..rows {
                if i != r && a.get(i, c) {
                    a.xor_row(i, r);
                }
            }
            pivot_col_of_row.push(c);
            r += 1;
        }
    }
    let rank = r;
    let mut row_space = Gf2Matrix::zeros(rank, cols);
    for i in 0..rank {
        for j in 0..cols {
            if a.get(i, j) {
                row_space.set(i, j, true);
            }
        }
    }
    let pivot_cols: Vec<usize> = pivot_col_of_row.clone();
    let is_pivot = {
        let mut v = vec![false; cols];
        for &c in &pivot_cols {
            v[c] = true;
        }
        v
    };
    let free_cols: Vec<usize> = (0..cols).filter(|&c| !is_pivot[c]).collect();
    let mut kernel = Gf2Matrix::zeros(free_cols.len(), cols);
    for (ki, &fc) in free_cols.iter().enumerate() {
        kernel.set(ki, fc, true);
        for (ri, &pc) in pivot_cols.iter().enumerate() {
            if a.get(ri, fc) {
                kernel.set(ki, pc, true);
            }
        }
    }
    Gf2RankInfo {
        rank,
        kernel_basis: kernel,
        row_space_basis: row_space,
    }
}

/// Decomposes a symmetric zero-diagonal binary matrix as N = Uᵀ·Ñ·U with U
/// invertible and Ñ block-diagonal holding r/2 hyperbolic blocks
/// [[0,1],[1,0]]; returns (U, r). Recomposition is exact.
pub fn gf2_symmetric_decompose(n: &Gf2Matrix) -> Result<(Gf2Matrix, usize)> {
    if !n.is_symmetric_zero_diagonal() {
        return Err(Error::BadGf2("matrix must be symmetric with zero diagonal"));
    }
    let m = n.rows();
    let mut w = n.clone();
    // Accumulated column operations V with VᵀNV = Ñ.
    let mut v = Gf2Matrix::identity(m);
    let mut r = 0usize;
    while r + 1 < m {
        let mut pivot = None;
        'outer: for i in r..m {
            for j in (i + 1)..m {
                if w.get(i, j) {
                    pivot = Some((i, j));
                    break 'outer;
                }
            }
        }
        let Some((p, q)) = pivot else { break };
        // Bring pivot to (r, r+1) by congruence swaps.
        w.swap_rows(r, p);
        w.swap_cols(r, p);
        v.swap_cols(r, p);
        let q = if q == r { p } else { q };
        w.swap_rows(r + 1, q);
        w.swap_cols(r + 1, q);
        v.swap_cols(r + 1, q);
        // Clear the rest of rows/cols r and r+1.
        for t in (r + 2)..m {
            if w.get(r, t) {
                w.xor_col(t, r + 1);
                w.xor_row(t, r + 1);
                v.xor_col(t, r + 1);
            }
            if w.get(r + 1, t) {
                w.xor_col(t, r);
                w.xor_row(t, r);
                v.xor_col(t, r);
            }
        }
        r += 2;
    }
    // N = (V⁻¹)ᵀ Ñ V⁻¹, so U = V⁻¹.
    let u = v.inverse().expect("congruence transform is invertible");
    Ok((u, r))
}

/// The canonical block form with `r/2` hyperbolic blocks on an m×m matrix.
pub fn hyperbolic_blocks(m: usize, r: usize) -> Gf2Matrix {
    let mut t = Gf2Matrix::zeros(m, m);
    for j in 0..r / 2 {
        t.set(2 * j, 2 * j + 1, true);
        t.set(2 * j + 1, 2 * j, true);
    }
    t
}
