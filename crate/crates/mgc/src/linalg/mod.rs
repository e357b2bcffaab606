//! Dense complex linear algebra for Gaussian contraction: antisymmetric
//! matrices, Pfaffians via congruence elimination, rank-revealing skew
//! elimination, and the closed-form Gaussian integral.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub mod gf2;
pub use gf2::{gf2_rank_kernel, gf2_symmetric_decompose, Gf2Matrix, Gf2RankInfo};

pub type CMat = DMatrix<Complex64>;

pub(crate) const ZERO_C: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const ONE_C: Complex64 = Complex64::new(1.0, 0.0);

const SKEW_TOL: f64 = 1e-12;

/// Relative pivot threshold: a pivot column counts as zero when its largest
/// magnitude falls below `1e-10 × max(matrix max magnitude, 1)`.
fn pivot_threshold(scale: f64) -> f64 {
    1e-10 * scale.max(1.0)
}

/// An n×n complex antisymmetric matrix, stored with exact antisymmetry
/// (lower triangle mirrored from the upper one, zero diagonal).
#[derive(Clone, Debug, PartialEq)]
pub struct SkewMatrix {
    n: usize,
    m: CMat,
}

impl SkewMatrix {
    /// Validates `A + Aᵀ = 0` entrywise within absolute tolerance 1e-12 and
    /// canonicalizes to exact antisymmetry.
    pub fn new(m: CMat) -> Result<Self> {
        let n = m.nrows();
        if m.ncols() != n {
            return Err(Error::GeneratorMismatch(m.ncols(), n));
        }
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((m[(i, j)] + m[(j, i)]).norm());
            }
        }
        if worst > SKEW_TOL {
            return Err(Error::NotSkew {
                worst,
                tol: SKEW_TOL,
            });
        }
        Ok(Self::new_canonicalized(m))
    }

    /// Mirrors the upper triangle without tolerance checking.
    pub(crate) fn new_canonicalized(mut m: CMat) -> Self {
        let n = m.nrows();
        for i in 0..n {
            m[(i, i)] = ZERO_C;
            for j in (i + 1)..n {
                let v = (m[(i, j)] - m[(j, i)]) * Complex64::new(0.5, 0.0);
                m[(i, j)] = v;
                m[(j, i)] = -v;
            }
        }
        Self { n, m }
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            m: CMat::zeros(n, n),
        }
    }

    /// Builds from the strict upper triangle in row-major order
    /// (A12, A13, …, A1n, A23, …).
    pub fn from_upper(n: usize, upper: &[Complex64]) -> Result<Self> {
        if upper.len() != n * (n - 1) / 2 {
            return Err(Error::GeneratorMismatch(upper.len(), n * (n - 1) / 2));
        }
        let mut m = CMat::zeros(n, n);
        let mut idx = 0;
        for i in 0..n {
            for j in (i + 1)..n {
                m[(i, j)] = upper[idx];
                m[(j, i)] = -upper[idx];
                idx += 1;
            }
        }
        Ok(Self { n, m })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.m[(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.m[(i, j)] = v;
        self.m[(j, i)] = -v;
        if i == j {
            self.m[(i, i)] = ZERO_C;
        }
    }

    pub fn as_matrix(&self) -> &CMat {
        &self.m
    }

    pub fn into_matrix(self) -> CMat {
        self.m
    }

    pub fn max_abs(&self) -> f64 {
        self.m.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Minor keeping only the rows and columns flagged in `keep`.
    pub fn minor(&self, keep: &[bool]) -> SkewMatrix {
        let idx: Vec<usize> = (0..self.n).filter(|&i| keep[i]).collect();
        let k = idx.len();
        let mut m = CMat::zeros(k, k);
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate() {
                m[(a, b)] = self.m[(i, j)];
            }
        }
        SkewMatrix { n: k, m }
    }
}

/// Pfaffian via antisymmetric tridiagonalization (Parlett–Reid style
/// congruences with partial pivoting), O(n³).
///
/// Conventions: 0 for odd n, 1 for the empty matrix.
pub fn pfaffian(a: &SkewMatrix) -> Complex64 {
    let n = a.dim();
    if n == 0 {
        return ONE_C;
    }
    if n % 2 == 1 {
        return ZERO_C;
    }
    let scale = a.max_abs();
    let thresh = pivot_threshold(scale);
    // Row-major working copy.
    let mut w: Vec<Complex64> = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            w.push(a.get(i, j));
        }
    }
    let mut sign = 1.0f64;
    let mut pf = ONE_C;
    for j in 0..(n - 1) {
        // Pivot: bring the largest |entry| of column j (below row j) to j+1.
        let mut best = j + 1;
        let mut best_mag = w[(j + 1) * n + j].norm();
        for i in (j + 2)..n {
            let mag = w[i * n + j].norm();
            if mag > best_mag {
                best = i;
                best_mag = mag;
            }
        }
        if best_mag < thresh {
            if j % 2 == 0 {
                // An even-step zero column makes the matrix singular.
                return ZERO_C;
            }
            // Odd superdiagonal entries never enter the Pfaffian; a zero
            // column here just means there is nothing to eliminate.
            continue;
        }
        if best != j + 1 {
            swap_row_col(&mut w, n, best, j + 1);
            sign = -sign;
        }
        let piv = w[(j + 1) * n + j];
        if j % 2 == 0 {
            // Superdiagonal entry of the tridiagonal form.
            pf *= w[j * n + (j + 1)];
        }
        if j + 2 >= n {
            break;
        }
        // Congruence clearing column j below row j+1:
        //   A ← (I − e_{j+1}uᵀ)ᵀ A (I − e_{j+1}uᵀ),  u_i = A_{i,j}/A_{j+1,j}.
        let u: Vec<Complex64> = (j + 2..n).map(|i| w[i * n + j] / piv).collect();
        let prow: Vec<Complex64> = ((j + 2)..n).map(|l| w[(j + 1) * n + l]).collect();
        let pcol: Vec<Complex64> = ((j + 2)..n).map(|i| w[i * n + (j + 1)]).collect();
        for (bi, i) in ((j + 2)..n).enumerate() {
            let ui = u[bi];
            let ci = pcol[bi];
            let row = &mut w[i * n..(i + 1) * n];
            for (bl, l) in ((j + 2)..n).enumerate() {
                row[l] -= ui * prow[bl] + ci * u[bl];
            }
            // Column j is cleared below row j+1; row j+1 is untouched.
            row[j] = ZERO_C;
        }
        for i in (j + 2)..n {
            w[j * n + i] = ZERO_C;
        }
    }
    pf * sign
}

fn swap_row_col(w: &mut [Complex64], n: usize, a: usize, b: usize) {
    for j in 0..n {
        w.swap(a * n + j, b * n + j);
    }
    for i in 0..n {
        w.swap(i * n + a, i * n + b);
    }
}

/// Outcome of rank-revealing skew elimination: `u` is invertible with
/// `uᵀ A u` block-diagonal — an invertible `rank × rank` leading block of
/// 2×2 antisymmetric cells, then zeros.
pub struct SkewElimination {
    pub u: CMat,
    pub rank: usize,
    pub det_u: Complex64,
    /// The 2×2 cell values of the reduced leading block: block j is
    /// [[0, cells[j]], [−cells[j], 0]].
    pub cells: Vec<Complex64>,
    /// `uᵀ b` for the coupling matrix handed to [`skew_eliminate_with`].
    pub ub: CMat,
}

/// Finds invertible U with UᵀAU = [[A11, 0], [0, 0]], A11 invertible of even
/// size `rank`, by congruence elimination with largest-magnitude pivoting.
pub fn skew_eliminate(a: &SkewMatrix) -> (CMat, usize) {
    let e = skew_eliminate_with(a, &CMat::zeros(a.dim(), 0));
    (e.u, e.rank)
}

/// Skew elimination that also accumulates Uᵀ·b row operations.
pub fn skew_eliminate_with(a: &SkewMatrix, b: &CMat) -> SkewElimination {
    let n = a.dim();
    let k = b.ncols();
    let scale = a.max_abs();
    let thresh = pivot_threshold(scale);

    let mut w = a.as_matrix().clone();
    let mut u = CMat::identity(n, n);
    let mut ub = b.clone();
    let mut det_u = ONE_C;
    let mut cells = Vec::new();

    // Congruence helpers: every op applied as A ← EᵀAE, U ← U·E, ub ← Eᵀ·ub.
    let swap = |w: &mut CMat, u: &mut CMat, ub: &mut CMat, det: &mut Complex64, p: usize, q: usize| {
        if p == q {
            return;
        }
        w.swap_rows(p, q);
        w.swap_columns(p, q);
        u.swap_columns(p, q);
        ub.swap_rows(p, q);
        *det = -*det;
    };
    // col_t += c·col_s (and matching row op on w / row op on ub).
    let shear = |w: &mut CMat, u: &mut CMat, ub: &mut CMat, t: usize, s: usize, c: Complex64| {
        for i in 0..n {
            let v = w[(i, s)] * c;
            w[(i, t)] += v;
        }
        for jj in 0..n {
            let v = w[(s, jj)] * c;
            w[(t, jj)] += v;
        }
        for i in 0..n {
            let v = u[(i, s)] * c;
            u[(i, t)] += v;
        }
        for jj in 0..k {
            let v = ub[(s, jj)] * c;
            ub[(t, jj)] += v;
        }
    };

    let mut r = 0usize;
    while r + 1 < n {
        // Largest-magnitude pivot in the trailing block.
        let mut best = (r, r + 1);
        let mut best_mag = 0.0f64;
        for i in r..n {
            for jj in (i + 1)..n {
                let mag = w[(i, jj)].norm();
                if mag > best_mag {
                    best = (i, jj);
                    best_mag = mag;
                }
            }
        }
        if best_mag < thresh {
            break;
        }
        let (p, q) = best;
        swap(&mut w, &mut u, &mut ub, &mut det_u, r, p);
        let q = if q == r { p } else { q };
        swap(&mut w, &mut u, &mut ub, &mut det_u, r + 1, q);

        let piv = w[(r, r + 1)];
        cells.push(piv);
        for t in (r + 2)..n {
            // zero w[(r, t)] using column r+1, then w[(r+1, t)] using column r
            let c1 = -w[(r, t)] / piv;
            shear(&mut w, &mut u, &mut ub, t, r + 1, c1);
            let c2 = w[(r + 1, t)] / piv;
            shear(&mut w, &mut u, &mut ub, t, r, c2);
        }
        r += 2;
    }
    SkewElimination {
        u,
        rank: r,
        det_u,
        cells,
        ub,
    }
}

/// Closed form of the Gaussian integral I(A,B) = ∫Dθ exp(½θᵀAθ + θᵀBη):
/// a prefactor Pf(A11)·det(U), the antisymmetric k×k quadratic form
/// B1ᵀA11⁻¹B1, and the residual coupling B2 of the integrated-out zero
/// modes. The integral vanishes identically when rank(A) < n − k.
pub struct GaussianForm {
    pub prefactor: Complex64,
    pub quad: SkewMatrix,
    pub residual: CMat,
    pub is_zero: bool,
}

impl GaussianForm {
    /// Expands the form back into a Grassmann polynomial in the η variables
    /// (for cross-checks at oracle scale):
    /// prefactor · exp(½ηᵀ·quad·η) · ∏(residual rows · η).
    pub fn expand(&self) -> Result<crate::grassmann::GrassmannPoly> {
        use crate::grassmann::GrassmannPoly;
        let k = self.quad.dim();
        if self.is_zero {
            return GrassmannPoly::zero(k);
        }
        let mut q = GrassmannPoly::zero(k)?;
        for p in 0..k {
            for s in (p + 1)..k {
                q.add_term((1 << p) | (1 << s), self.quad.get(p, s));
            }
        }
        let mut out = q.exp_even()?.scale(self.prefactor);
        // ∫Dμ exp(μᵀB2η) = (B2 row k')·…·(B2 row 1) product, highest row first.
        for row in (0..self.residual.nrows()).rev() {
            let mut lin = GrassmannPoly::zero(k)?;
            for s in 0..k {
                lin.add_term(1 << s, self.residual[(row, s)]);
            }
            out = out.multiply(&lin)?;
        }
        Ok(out)
    }
}

/// Evaluates the Gaussian integral I(A,B) in O(n³ + n²k).
pub fn gaussian_integral_closed(a: &SkewMatrix, b: &CMat) -> Result<GaussianForm> {
    let n = a.dim();
    let k = b.ncols();
    if b.nrows() != n {
        return Err(Error::GeneratorMismatch(b.nrows(), n));
    }
    let elim = skew_eliminate_with(a, b);
    let m = elim.rank;
    if m + k < n {
        return Ok(GaussianForm {
            prefactor: ZERO_C,
            quad: SkewMatrix::zeros(k),
            residual: CMat::zeros(0, k),
            is_zero: true,
        });
    }
    // Pf(A11) over the 2×2 cells.
    let mut pf = ONE_C;
    for c in &elim.cells {
        pf *= *c;
    }
    let prefactor = pf * elim.det_u;

    let b1 = elim.ub.rows(0, m).into_owned();
    let b2 = elim.ub.rows(m, n - m).into_owned();

    // A11⁻¹ is block-diagonal with cells [[0, −1/c], [1/c, 0]].
    let mut a11_inv_b1 = CMat::zeros(m, k);
    for (j, c) in elim.cells.iter().enumerate() {
        let inv = ONE_C / *c;
        for col in 0..k {
            a11_inv_b1[(2 * j, col)] = -inv * b1[(2 * j + 1, col)];
            a11_inv_b1[(2 * j + 1, col)] = inv * b1[(2 * j, col)];
        }
    }
    let quad_raw = b1.transpose() * a11_inv_b1;
    let quad = SkewMatrix::new_canonicalized(quad_raw);

    Ok(GaussianForm {
        prefactor,
        quad,
        residual: b2,
        is_zero: false,
    })
}
