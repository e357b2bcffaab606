//! Contraction of a single-vertex network with m self-loops on a genus-g
//! surface. The loop pattern is a chord diagram; its GF(2) intersection
//! matrix N has rank r ≤ 2g, and the pairing tensor decomposes into 2^r
//! Gaussian terms, so the contraction value is a sum of 2^r Pfaffians of
//! matrices assembled from the tensor's canonical data.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{gf2_symmetric_decompose, pfaffian, CMat, Gf2Matrix, SkewMatrix};
use crate::matchgate::{CanonicalMatchgate, DenseTensor, Parity};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Brute-force bound: 2^m chord assignments.
pub const MAX_BRUTEFORCE_CHORDS: usize = 10;

/// A chord diagram: m chords pairing the 2m boundary points of a disk, with
/// its GF(2) intersection matrix.
#[derive(Clone, Debug)]
pub struct PairingGraph {
    m: usize,
    pairs: Vec<(usize, usize)>,
    n: Gf2Matrix,
}

impl PairingGraph {
    /// `pairs` must partition {0, …, 2m−1}; each pair is stored (l, r) with
    /// l < r.
    pub fn new(pairs: Vec<(usize, usize)>) -> Result<Self> {
        let m = pairs.len();
        let mut seen = vec![false; 2 * m];
        let mut norm = Vec::with_capacity(m);
        for &(a, b) in &pairs {
            if a >= 2 * m || b >= 2 * m || a == b {
                return Err(Error::BadPairing(format!("bad chord ({a},{b})")));
            }
            if seen[a] || seen[b] {
                return Err(Error::BadPairing(format!(
                    "endpoint reused in chord ({a},{b})"
                )));
            }
            seen[a] = true;
            seen[b] = true;
            norm.push((a.min(b), a.max(b)));
        }
        let n = intersection_matrix(&norm);
        Ok(Self { m, pairs: norm, n })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn intersection(&self) -> &Gf2Matrix {
        &self.n
    }
}

/// N_{p,q} = 1 iff chords p and q interleave around the disk boundary.
pub fn intersection_matrix(pairs: &[(usize, usize)]) -> Gf2Matrix {
    let m = pairs.len();
    let mut n = Gf2Matrix::zeros(m, m);
    for p in 0..m {
        for q in (p + 1)..m {
            let (a, b) = pairs[p];
            let (c, d) = pairs[q];
            let crossing = (a < c && c < b && b < d) || (c < a && a < d && d < b);
            if crossing {
                n.set(p, q, true);
                n.set(q, p, true);
            }
        }
    }
    n
}

/// The binary Fourier support of the pairing form (−1)^{Σ_{p<q}N_pq y_p y_q}:
/// the 2^r vectors z with nonzero coefficient f(z) = ±2^{−r/2}, r = rank N.
///
/// Congruence N = Uᵀ·Ñ·U transports the *bilinear* form, but over GF(2) the
/// quadratic form is a refinement that picks up a linear correction
/// ℓ_j = Q_N(U⁻¹e_j) under the substitution. The support is therefore the
/// coset z₀ ⊕ rowspace(N) with z₀ = Uᵀℓ, and on the coset
/// f(z₀ ⊕ Σ_i c_i·row_i(U)) = 2^{−r/2}·(−1)^{c₁c₂ + c₃c₄ + …}. (When the
/// form vanishes on Ker(N) — in particular for full-rank N — the coset is
/// the row space itself.)
pub fn fourier_support(n: &Gf2Matrix) -> Result<Vec<(u64, f64)>> {
    let m = n.rows();
    if m > 60 {
        return Err(Error::SizeLimit {
            what: "chord count",
            got: m,
            limit: 60,
        });
    }
    let (u, r) = gf2_symmetric_decompose(n)?;
    let uinv = u.inverse().expect("decomposition U is invertible");
    // Quadratic form Q_N over the strict upper triangle.
    let nrows: Vec<u64> = (0..m)
        .map(|i| {
            let mut w = 0u64;
            for j in 0..m {
                if n.get(i, j) {
                    w |= 1 << j;
                }
            }
            w
        })
        .collect();
    let quad = |v: u64| -> u32 {
        let mut acc = 0u32;
        let mut rest = v;
        while rest != 0 {
            let p = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            acc += (nrows[p] & rest).count_ones();
        }
        acc % 2
    };
    let row_mask = |mat: &Gf2Matrix, i: usize| -> u64 {
        let mut w = 0u64;
        for j in 0..m {
            if mat.get(i, j) {
                w |= 1 << j;
            }
        }
        w
    };
    // Linear defect of the refinement and the coset base point z₀ = Uᵀℓ.
    let uinv_t = uinv.transpose();
    let mut z0 = 0u64;
    for j in 0..m {
        // column j of U⁻¹ = row j of (U⁻¹)ᵀ
        if quad(row_mask(&uinv_t, j)) == 1 {
            z0 ^= row_mask(&u, j);
        }
    }
    let basis: Vec<u64> = (0..r).map(|i| row_mask(&u, i)).collect();
    let magnitude = 0.5f64.powi((r / 2) as i32);
    let pair_sign = |c: u64| -> f64 {
        let mut acc = 0u32;
        for j in 0..(r / 2) {
            acc += ((c >> (2 * j)) & (c >> (2 * j + 1)) & 1) as u32;
        }
        if acc % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    };
    let mut out = Vec::with_capacity(1 << r);
    let mut z = z0;
    out.push((z, magnitude * pair_sign(0)));
    // Gray-code enumeration: one basis vector toggles per step.
    let mut gray = 0u64;
    for a in 1u64..(1u64 << r) {
        let bit = a.trailing_zeros() as usize;
        z ^= basis[bit];
        gray ^= 1 << bit;
        out.push((z, magnitude * pair_sign(gray)));
    }
    Ok(out)
}

/// Outcome of the genus-stage contraction.
pub struct SingleVertexContraction {
    pub value: Complex64,
    /// GF(2) rank of the intersection matrix.
    pub rank: usize,
    /// Number of Pfaffian terms evaluated (2^rank, or 0 when parity
    /// short-circuits the sum).
    pub terms: usize,
}

/// Contracts a rank-2m matchgate against the chord-diagram pairing tensor:
/// a sum of 2^r Pfaffians of (4m+k)-dimensional matrices built from the
/// canonical data, where r = rank of the intersection matrix. The sign
/// conventions below were fixed once against the brute-force oracle and
/// are pinned by regression tests.
pub fn contract_single_vertex(
    t: &CanonicalMatchgate,
    pairing: &PairingGraph,
) -> Result<SingleVertexContraction> {
    let m = pairing.m();
    if t.rank() != 2 * m {
        return Err(Error::RankMismatch {
            got: t.rank(),
            expected: 2 * m,
        });
    }
    let (_, r) = gf2_symmetric_decompose(pairing.intersection())?;
    if t.parity() == Parity::Odd {
        // Pairing components only excite equal index pairs, which have even
        // total weight: an odd tensor sums to exactly zero.
        return Ok(SingleVertexContraction {
            value: ZERO,
            rank: r,
            terms: 0,
        });
    }
    let support = fourier_support(pairing.intersection())?;
    let k = t.k();
    let dim = k + 4 * m;

    // Chord matrix: +1 at (l, r), −1 at (r, l).
    let mut abar = CMat::zeros(2 * m, 2 * m);
    for &(l, rr) in pairing.pairs() {
        abar[(l, rr)] = Complex64::new(1.0, 0.0);
        abar[(rr, l)] = Complex64::new(-1.0, 0.0);
    }
    let f = t.a().as_matrix();
    let g = t.b();
    let i_unit = Complex64::new(0.0, 1.0);

    let pos_mu = |c: usize| c;
    let pos_eta = |a: usize| k + a;
    let pos_theta = |a: usize| k + 2 * m + a;

    let terms: Vec<Complex64> = support
        .par_iter()
        .map(|&(z, fz)| {
            let mut big = CMat::zeros(dim, dim);
            // (μ, θ) block: G
            for c in 0..k {
                for a in 0..2 * m {
                    let v = g[(c, a)];
                    big[(pos_mu(c), pos_theta(a))] = v;
                    big[(pos_theta(a), pos_mu(c))] = -v;
                }
            }
            // (η, θ) block: −i·I
            for a in 0..2 * m {
                big[(pos_eta(a), pos_theta(a))] = -i_unit;
                big[(pos_theta(a), pos_eta(a))] = i_unit;
            }
            // (η, η) block: D·Ā·D with D_jj = (−1)^{z_e} at left endpoints
            let mut d = vec![1.0f64; 2 * m];
            for (e, &(l, _)) in pairing.pairs().iter().enumerate() {
                if z >> e & 1 == 1 {
                    d[l] = -1.0;
                }
            }
            for a in 0..2 * m {
                for b in 0..2 * m {
                    let v = abar[(a, b)] * d[a] * d[b];
                    if v != ZERO {
                        big[(pos_eta(a), pos_eta(b))] = v;
                    }
                }
            }
            // (θ, θ) block: F
            for a in 0..2 * m {
                for b in 0..2 * m {
                    big[(pos_theta(a), pos_theta(b))] = f[(a, b)];
                }
            }
            let skew = SkewMatrix::new_canonicalized(big);
            Complex64::new(fz, 0.0) * pfaffian(&skew)
        })
        .collect();

    let value = t.c() * terms.iter().sum::<Complex64>();
    Ok(SingleVertexContraction {
        value,
        rank: r,
        terms: support.len(),
    })
}

/// Direct summation oracle: c = Σ_x T(x)·R(x) where R(x) = 1 iff every
/// chord sees equal bits. Enumerates the 2^m chord assignments, m ≤ 10.
pub fn contract_single_vertex_bruteforce(
    t: &DenseTensor,
    pairing: &PairingGraph,
) -> Result<Complex64> {
    let m = pairing.m();
    if t.rank() != 2 * m {
        return Err(Error::RankMismatch {
            got: t.rank(),
            expected: 2 * m,
        });
    }
    if m > MAX_BRUTEFORCE_CHORDS {
        return Err(Error::SizeLimit {
            what: "brute-force chord count",
            got: m,
            limit: MAX_BRUTEFORCE_CHORDS,
        });
    }
    let mut total = ZERO;
    for z in 0u32..(1 << m) {
        let mut x = 0u32;
        for (e, &(l, r)) in pairing.pairs().iter().enumerate() {
            if z >> e & 1 == 1 {
                x |= (1 << l) | (1 << r);
            }
        }
        total += t.get(x);
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matchgate::test_support::random_canonical;
    use crate::matchgate::from_dense;
    use num_complex::Complex64 as C;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    #[test]
    fn intersection_examples() {
        // nested/disjoint chords: N = 0
        let n = intersection_matrix(&[(0, 1), (2, 3)]);
        assert_eq!(n, Gf2Matrix::zeros(2, 2));
        // interleaved: N = [[0,1],[1,0]]
        let n = intersection_matrix(&[(0, 2), (1, 3)]);
        assert!(n.get(0, 1) && n.get(1, 0));
        // all three pairwise interleaved
        let n = intersection_matrix(&[(0, 3), (1, 4), (2, 5)]);
        for p in 0..3 {
            for q in 0..3 {
                assert_eq!(n.get(p, q), p != q);
            }
        }
    }

    #[test]
    fn fourier_small_cases() {
        // N = 0 → single term z = 0, f = 1
        let s = fourier_support(&Gf2Matrix::zeros(3, 3)).unwrap();
        assert_eq!(s, vec![(0u64, 1.0)]);
        // N = [[0,1],[1,0]] → support {00,01,10,11}, f = ±1/2 with one minus
        let n = intersection_matrix(&[(0, 2), (1, 3)]);
        let s = fourier_support(&n).unwrap();
        assert_eq!(s.len(), 4);
        let direct = |z: u64| -> f64 {
            // f(z) = 2^{−m} Σ_y (−1)^{½yᵀNy + z·y}, m = 2
            let mut acc = 0.0;
            for y in 0u64..4 {
                let quad = ((y & 1) & (y >> 1)) as u32; // y0·y1·N01
                let lin = (z & y).count_ones();
                acc += if (quad + lin) % 2 == 0 { 1.0 } else { -1.0 };
            }
            acc / 4.0
        };
        for &(z, f) in &s {
            assert!((f - direct(z)).abs() < 1e-15, "z={z:b}");
        }
    }

    #[test]
    fn fourier_reconstruction_exact() {
        // Σ_a f(z^a)(−1)^{y·z^a} = (−1)^{½yᵀNy} for all y, random N
        let mut rng = ChaCha8Rng::seed_from_u64(80);
        for _ in 0..30 {
            let m = rng.gen_range(1..=10);
            let mut n = Gf2Matrix::zeros(m, m);
            for i in 0..m {
                for j in (i + 1)..m {
                    if rng.gen_bool(0.5) {
                        n.set(i, j, true);
                        n.set(j, i, true);
                    }
                }
            }
            let support = fourier_support(&n).unwrap();
            let rows: Vec<u64> = (0..m)
                .map(|i| {
                    let mut w = 0u64;
                    for j in 0..m {
                        if n.get(i, j) {
                            w |= 1 << j;
                        }
                    }
                    w
                })
                .collect();
            for y in 0u64..(1 << m) {
                let mut quad = 0u32;
                let mut rest = y;
                while rest != 0 {
                    let p = rest.trailing_zeros() as usize;
                    rest &= rest - 1;
                    quad += (rows[p] & rest).count_ones();
                }
                let want = if quad % 2 == 0 { 1.0 } else { -1.0 };
                let got: f64 = support
                    .iter()
                    .map(|&(z, f)| {
                        if (z & y).count_ones() % 2 == 0 {
                            f
                        } else {
                            -f
                        }
                    })
                    .sum();
                assert!(
                    (got - want).abs() < 1e-12,
                    "m={m} y={y:b}: {got} vs {want}"
                );
            }
        }
    }

    #[test]
    fn single_chord_trace() {
        // T(00)=1, T(11)=w with pairing (0,1) → 1 + w
        let w = c(0.3, -0.9);
        let mut t = DenseTensor::zeros(2).unwrap();
        t.set(0b00, c(1.0, 0.0));
        t.set(0b11, w);
        let pairing = PairingGraph::new(vec![(0, 1)]).unwrap();
        let direct = contract_single_vertex_bruteforce(&t, &pairing).unwrap();
        assert!((direct - (c(1.0, 0.0) + w)).norm() < 1e-14);
        let g = from_dense(&t, 1e-9).unwrap();
        let r = contract_single_vertex(&g, &pairing).unwrap();
        assert_eq!(r.terms, 1);
        assert!((r.value - direct).norm() < 1e-10, "{} vs {direct}", r.value);
    }

    #[test]
    fn torus_pairing_against_indicator() {
        // m = 2 interleaved: brute force on the indicator pattern counts 4
        let mut t = DenseTensor::zeros(4).unwrap();
        t.set(0b0000, c(1.0, 0.0));
        t.set(0b0101, c(1.0, 0.0));
        t.set(0b1010, c(1.0, 0.0));
        t.set(0b1111, c(1.0, 0.0));
        let pairing = PairingGraph::new(vec![(0, 2), (1, 3)]).unwrap();
        let v = contract_single_vertex_bruteforce(&t, &pairing).unwrap();
        assert!((v - c(4.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn closed_form_matches_bruteforce_all_pairings() {
        // exhaustive pairings for m ≤ 3, random matchgates
        let mut rng = ChaCha8Rng::seed_from_u64(81);
        for m in 1..=3usize {
            let pairings = all_pairings(2 * m);
            for pairing in pairings {
                let pg = PairingGraph::new(pairing.clone()).unwrap();
                for _ in 0..4 {
                    let k = 2 * rng.gen_range(0..=m);
                    let g = random_canonical(&mut rng, 2 * m, k);
                    let dense = g.to_dense().unwrap();
                    let direct = contract_single_vertex_bruteforce(&dense, &pg).unwrap();
                    let got = contract_single_vertex(&g, &pg).unwrap();
                    assert!(
                        (got.value - direct).norm() <= 1e-8 * direct.norm().max(1.0),
                        "m={m} pairing={pairing:?} k={k}: {} vs {direct}",
                        got.value
                    );
                    assert_eq!(got.terms, 1 << got.rank);
                }
            }
        }
    }

    #[test]
    fn odd_tensor_contracts_to_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(82);
        let g = random_canonical(&mut rng, 4, 1);
        let pg = PairingGraph::new(vec![(0, 2), (1, 3)]).unwrap();
        let got = contract_single_vertex(&g, &pg).unwrap();
        assert_eq!(got.value, ZERO);
        let dense = g.to_dense().unwrap();
        let direct = contract_single_vertex_bruteforce(&dense, &pg).unwrap();
        assert_eq!(direct, ZERO);
    }

    pub(crate) fn all_pairings(n: usize) -> Vec<Vec<(usize, usize)>> {
        if n == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        let rest: Vec<usize> = (1..n).collect();
        for (i, &b) in rest.iter().enumerate() {
            let remaining: Vec<usize> = rest
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, &v)| v)
                .collect();
            for sub in all_pairings_of(&remaining) {
                let mut p = vec![(0, b)];
                p.extend(sub);
                out.push(p);
            }
        }
        out
    }

    fn all_pairings_of(items: &[usize]) -> Vec<Vec<(usize, usize)>> {
        if items.is_empty() {
            return vec![vec![]];
        }
        let a = items[0];
        let mut out = Vec::new();
        for i in 1..items.len() {
            let b = items[i];
            let rest: Vec<usize> = items[1..]
                .iter()
                .enumerate()
                .filter(|(j, _)| *j + 1 != i)
                .map(|(_, &v)| v)
                .collect();
            for sub in all_pairings_of(&rest) {
                let mut p = vec![(a.min(b), a.max(b))];
                p.extend(sub);
                out.push(p);
            }
        }
        out
    }
}
