//! Exact dense Grassmann-algebra arithmetic over complex coefficients.
//!
//! A polynomial in anticommuting generators θ_1, …, θ_n is stored as a map
//! from generator subsets (bitmasks, generator `a` at bit `a`) to complex
//! coefficients of the normally ordered monomials θ_{i1}⋯θ_{ik}, i1 < ⋯ < ik.
//! All sign bookkeeping is exact integer permutation parity; only the scalar
//! coefficients carry floating-point rounding.
//!
//! This module is the brute-force oracle for the closed-form Gaussian
//! integral machinery: it never approximates, and sizes are hard-capped so
//! that it cannot be asked to.

use std::collections::HashMap;
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::CMat;

/// Hard cap on the number of generators (2^n dense storage).
pub const MAX_GENERATORS: usize = 24;

/// Caps for the Gaussian-integral oracle.
pub const MAX_ORACLE_THETA: usize = 12;
pub const MAX_ORACLE_ETA: usize = 8;

const SKEW_TOL: f64 = 1e-12;

/// A complex polynomial in a fixed, ordered set of Grassmann generators.
#[derive(Clone, Debug)]
pub struct GrassmannPoly {
    n: usize,
    terms: HashMap<u32, Complex64>,
}

/// Parity of the permutation that merges two normally ordered disjoint
/// monomials into one normally ordered monomial.
fn merge_sign(m1: u32, m2: u32) -> f64 {
    let mut inv = 0u32;
    let mut m = m2;
    while m != 0 {
        let b = m.trailing_zeros();
        inv += (m1 >> (b + 1)).count_ones();
        m &= m - 1;
    }
    if inv & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}

impl GrassmannPoly {
    fn check_gens(n: usize) -> Result<()> {
        if n > MAX_GENERATORS {
            return Err(Error::SizeLimit {
                what: "Grassmann generator count",
                got: n,
                limit: MAX_GENERATORS,
            });
        }
        Ok(())
    }

    /// The zero polynomial over `n` generators.
    pub fn zero(n: usize) -> Result<Self> {
        Self::check_gens(n)?;
        Ok(Self {
            n,
            terms: HashMap::new(),
        })
    }

    /// The constant polynomial `c`.
    pub fn constant(n: usize, c: Complex64) -> Result<Self> {
        let mut p = Self::zero(n)?;
        p.add_term(0, c);
        Ok(p)
    }

    /// The constant polynomial 1.
    pub fn one(n: usize) -> Result<Self> {
        Self::constant(n, Complex64::new(1.0, 0.0))
    }

    /// The single generator θ_a (0-based index).
    pub fn generator(n: usize, a: usize) -> Result<Self> {
        Self::check_gens(n)?;
        if a >= n {
            return Err(Error::IndexOutOfRange { index: a, n });
        }
        let mut p = Self::zero(n)?;
        p.add_term(1 << a, Complex64::new(1.0, 0.0));
        Ok(p)
    }

    pub fn n_generators(&self) -> usize {
        self.n
    }

    /// Coefficient of the normally ordered monomial with generator set `mask`.
    pub fn coeff(&self, mask: u32) -> Complex64 {
        self.terms
            .get(&mask)
            .copied()
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    /// Add `c` to the coefficient at `mask`, dropping exact zeros.
    pub fn add_term(&mut self, mask: u32, c: Complex64) {
        if c == Complex64::new(0.0, 0.0) {
            return;
        }
        let e = self.terms.entry(mask).or_insert(Complex64::new(0.0, 0.0));
        *e += c;
        if *e == Complex64::new(0.0, 0.0) {
            self.terms.remove(&mask);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Iterator over (mask, coefficient) pairs in unspecified order.
    pub fn terms(&self) -> impl Iterator<Item = (u32, Complex64)> + '_ {
        self.terms.iter().map(|(&m, &c)| (m, c))
    }

    /// Largest coefficient magnitude (0 for the zero polynomial).
    pub fn max_abs(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn add(&self, g: &Self) -> Result<Self> {
        if self.n != g.n {
            return Err(Error::GeneratorMismatch(self.n, g.n));
        }
        let mut out = self.clone();
        for (m, c) in g.terms() {
            out.add_term(m, c);
        }
        Ok(out)
    }

    pub fn sub(&self, g: &Self) -> Result<Self> {
        self.add(&g.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut out = Self {
            n: self.n,
            terms: HashMap::new(),
        };
        for (m, c) in self.terms() {
            out.add_term(m, c * s);
        }
        out
    }

    /// Product in the Grassmann algebra. Terms with a repeated generator
    /// vanish; each surviving term carries the parity of the merge
    /// permutation.
    pub fn multiply(&self, g: &Self) -> Result<Self> {
        if self.n != g.n {
            return Err(Error::GeneratorMismatch(self.n, g.n));
        }
        let mut out = Self::zero(self.n)?;
        // Dense accumulation is much faster than hash merging for the
        // sizes the oracle runs at.
        if self.n <= 16 {
            let mut buf = vec![Complex64::new(0.0, 0.0); 1 << self.n];
            for (m1, c1) in self.terms() {
                for (m2, c2) in g.terms() {
                    if m1 & m2 != 0 {
                        continue;
                    }
                    buf[(m1 | m2) as usize] += c1 * c2 * merge_sign(m1, m2);
                }
            }
            for (mask, &c) in buf.iter().enumerate() {
                if c != Complex64::new(0.0, 0.0) {
                    out.terms.insert(mask as u32, c);
                }
            }
        } else {
            for (m1, c1) in self.terms() {
                for (m2, c2) in g.terms() {
                    if m1 & m2 != 0 {
                        continue;
                    }
                    out.add_term(m1 | m2, c1 * c2 * merge_sign(m1, m2));
                }
            }
        }
        Ok(out)
    }

    /// Partial derivative ∂_a: removes θ_a from each monomial containing it,
    /// with the sign (−1)^{#generators before a}; other monomials drop.
    pub fn derivative(&self, a: usize) -> Result<Self> {
        if a >= self.n {
            return Err(Error::IndexOutOfRange { index: a, n: self.n });
        }
        let bit = 1u32 << a;
        let below = bit - 1;
        let mut out = Self::zero(self.n)?;
        for (m, c) in self.terms() {
            if m & bit == 0 {
                continue;
            }
            let sign = if (m & below).count_ones() & 1 == 0 {
                1.0
            } else {
                -1.0
            };
            out.add_term(m & !bit, c * sign);
        }
        Ok(out)
    }

    /// Berezin integral over the listed variables, innermost first: the list
    /// (v_1, …, v_k) applies ∫dθ_{v_1} first, matching the convention
    /// ∫Dθ = ∫dθ_k ⋯ ∫dθ_1 for θ = (θ_{v_1}, …, θ_{v_k}).
    ///
    /// The result lives in the same indexed algebra; the integrated
    /// generators simply no longer occur.
    pub fn integrate(&self, vars: &[usize]) -> Result<Self> {
        let mut seen = 0u32;
        for &v in vars {
            if v >= self.n {
                return Err(Error::IndexOutOfRange { index: v, n: self.n });
            }
            if seen & (1 << v) != 0 {
                return Err(Error::DuplicateVariable(v));
            }
            seen |= 1 << v;
        }
        let mut out = self.clone();
        for &v in vars {
            out = out.derivative(v)?;
        }
        Ok(out)
    }

    /// Substitutes θ_a = Σ_b U_{a,b} θ̃_b and re-expands. `u` must be
    /// invertible; monomial degrees are preserved.
    pub fn change_of_variables(&self, u: &CMat) -> Result<Self> {
        if u.nrows() != self.n || u.ncols() != self.n {
            return Err(Error::GeneratorMismatch(u.nrows(), self.n));
        }
        if self.n > 0 {
            let det = u.clone().lu().determinant();
            if det.norm() < 1e-12 {
                return Err(Error::SingularMatrix);
            }
        }
        let mut out = Self::zero(self.n)?;
        for (mask, c) in self.terms() {
            let mut prod = Self::constant(self.n, c)?;
            let mut m = mask;
            while m != 0 {
                let a = m.trailing_zeros() as usize;
                m &= m - 1;
                let mut row = Self::zero(self.n)?;
                for b in 0..self.n {
                    row.add_term(1 << b, u[(a, b)]);
                }
                prod = prod.multiply(&row)?;
            }
            for (m2, c2) in prod.terms() {
                out.add_term(m2, c2);
            }
        }
        Ok(out)
    }

    /// exp(f) for an even nilpotent `f` (even-degree monomials, no constant
    /// term): the truncated series Σ_{k ≤ n/2} f^k / k!, exact by nilpotency.
    pub fn exp_even(&self) -> Result<Self> {
        for (m, _) in self.terms() {
            if m == 0 {
                return Err(Error::BadExponent("constant term present"));
            }
            if m.count_ones() & 1 == 1 {
                return Err(Error::BadExponent("odd-degree monomial present"));
            }
        }
        let mut out = Self::one(self.n)?;
        let mut term = Self::one(self.n)?;
        for k in 1..=(self.n / 2).max(1) {
            term = term.multiply(self)?;
            term = term.scale(Complex64::new(1.0 / k as f64, 0.0));
            if term.is_zero() {
                break;
            }
            out = out.add(&term)?;
        }
        Ok(out)
    }

    /// Relabels generators downward by `k`: requires that no stored monomial
    /// uses generators below `k`. Used to turn "polynomial in the surviving
    /// high block" into a standalone polynomial.
    pub fn drop_generators_below(&self, k: usize) -> Result<Self> {
        let low = (1u32 << k) - 1;
        let mut out = Self::zero(self.n - k)?;
        for (m, c) in self.terms() {
            if m & low != 0 {
                return Err(Error::BadExponent("low generators still present"));
            }
            out.add_term(m >> k, c);
        }
        Ok(out)
    }
}

impl fmt::Display for GrassmannPoly {
    /// One line per monomial: `±(re,im) θ[i1,i2,...]`, 1-based ascending
    /// indexes, monomials sorted by mask.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return writeln!(f, "0");
        }
        let mut masks: Vec<u32> = self.terms.keys().copied().collect();
        masks.sort_unstable();
        for mask in masks {
            let c = self.terms[&mask];
            let idx: Vec<String> = (0..self.n)
                .filter(|a| mask & (1 << a) != 0)
                .map(|a| (a + 1).to_string())
                .collect();
            writeln!(f, "+({},{}) θ[{}]", c.re, c.im, idx.join(","))?;
        }
        Ok(())
    }
}

/// Brute-force Gaussian integral I(A,B) = ∫Dθ exp(½ θᵀAθ + θᵀBη) evaluated
/// entirely inside the Grassmann algebra: builds the exponent over n + k
/// generators, exponentiates, integrates out the θ block and returns a
/// polynomial in the η generators.
///
/// `a` must be antisymmetric within 1e-12 entrywise; sizes are capped at
/// n ≤ 12, k ≤ 8.
pub fn gaussian_integral_oracle(a: &CMat, b: &CMat) -> Result<GrassmannPoly> {
    let n = a.nrows();
    let k = b.ncols();
    if a.ncols() != n {
        return Err(Error::GeneratorMismatch(a.ncols(), n));
    }
    if b.nrows() != n {
        return Err(Error::GeneratorMismatch(b.nrows(), n));
    }
    if n > MAX_ORACLE_THETA {
        return Err(Error::SizeLimit {
            what: "oracle θ block",
            got: n,
            limit: MAX_ORACLE_THETA,
        });
    }
    if k > MAX_ORACLE_ETA {
        return Err(Error::SizeLimit {
            what: "oracle η block",
            got: k,
            limit: MAX_ORACLE_ETA,
        });
    }
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            worst = worst.max((a[(i, j)] + a[(j, i)]).norm());
        }
    }
    if worst > SKEW_TOL {
        return Err(Error::NotSkew {
            worst,
            tol: SKEW_TOL,
        });
    }

    let total = n + k;
    let mut expo = GrassmannPoly::zero(total)?;
    for p in 0..n {
        for q in (p + 1)..n {
            expo.add_term((1 << p) | (1 << q), a[(p, q)]);
        }
    }
    for p in 0..n {
        for q in 0..k {
            expo.add_term((1 << p) | (1 << (n + q)), b[(p, q)]);
        }
    }
    let full = expo.exp_even()?;
    let theta_vars: Vec<usize> = (0..n).collect();
    let integrated = full.integrate(&theta_vars)?;
    integrated.drop_generators_below(n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use num_complex::Complex64 as C;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    fn random_poly(rng: &mut ChaCha8Rng, n: usize, nterms: usize) -> GrassmannPoly {
        let mut p = GrassmannPoly::zero(n).unwrap();
        for _ in 0..nterms {
            let mask = rng.gen_range(0..(1u32 << n));
            p.add_term(mask, c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        }
        p
    }

    fn random_invertible(rng: &mut ChaCha8Rng, n: usize) -> CMat {
        loop {
            let m = DMatrix::from_fn(n, n, |_, _| {
                c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
            });
            if m.clone().lu().determinant().norm() > 0.3 {
                return m;
            }
        }
    }

    #[test]
    fn multiply_basics() {
        let t1 = GrassmannPoly::generator(2, 0).unwrap();
        let t2 = GrassmannPoly::generator(2, 1).unwrap();
        // θ1·θ2 = θ1θ2
        assert_eq!(t1.multiply(&t2).unwrap().coeff(0b11), c(1.0, 0.0));
        // θ2·θ1 = −θ1θ2
        assert_eq!(t2.multiply(&t1).unwrap().coeff(0b11), c(-1.0, 0.0));
        // θ1·θ1 = 0
        assert!(t1.multiply(&t1).unwrap().is_zero());
    }

    #[test]
    fn derivative_basics() {
        let mut t12 = GrassmannPoly::zero(2).unwrap();
        t12.add_term(0b11, c(1.0, 0.0));
        // ∂_1 θ1θ2 = θ2
        assert_eq!(t12.derivative(0).unwrap().coeff(0b10), c(1.0, 0.0));
        // ∂_2 θ1θ2 = −θ1
        assert_eq!(t12.derivative(1).unwrap().coeff(0b01), c(-1.0, 0.0));
        // ∂_1 1 = 0
        let one = GrassmannPoly::one(2).unwrap();
        assert!(one.derivative(0).unwrap().is_zero());
    }

    #[test]
    fn derivative_anticommutes() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let p = random_poly(&mut rng, 8, 40);
            let ab = p.derivative(2).unwrap().derivative(5).unwrap();
            let ba = p.derivative(5).unwrap().derivative(2).unwrap();
            let sum = ab.add(&ba).unwrap();
            assert!(sum.max_abs() < 1e-14);
            assert!(p.derivative(3).unwrap().derivative(3).unwrap().is_zero());
        }
    }

    #[test]
    fn integrate_top_monomial() {
        let mut t12 = GrassmannPoly::zero(2).unwrap();
        t12.add_term(0b11, c(1.0, 0.0));
        // ∫D(θ1,θ2) θ1θ2 = 1
        let r = t12.integrate(&[0, 1]).unwrap();
        assert_eq!(r.coeff(0), c(1.0, 0.0));
        // ∫D(θ1,θ2) θ1 = 0
        let t1 = GrassmannPoly::generator(2, 0).unwrap();
        assert!(t1.integrate(&[0, 1]).unwrap().is_zero());
        // opposite orders differ by −1
        let a = t12.integrate(&[0]).unwrap().integrate(&[1]).unwrap();
        let b = t12.integrate(&[1]).unwrap().integrate(&[0]).unwrap();
        assert_eq!(a.coeff(0), -b.coeff(0));
    }

    #[test]
    fn change_of_variables_basics() {
        let n = 2;
        let t1 = GrassmannPoly::generator(n, 0).unwrap();
        let id = DMatrix::identity(n, n);
        assert_eq!(t1.change_of_variables(&id).unwrap().coeff(0b01), c(1.0, 0.0));
        let swap = DMatrix::from_row_slice(
            n,
            n,
            &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)],
        );
        assert_eq!(
            t1.change_of_variables(&swap).unwrap().coeff(0b10),
            c(1.0, 0.0)
        );
        // θ1θ2 ↦ det(U)·θ1θ2 for generic U
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = random_invertible(&mut rng, 2);
        let mut t12 = GrassmannPoly::zero(2).unwrap();
        t12.add_term(0b11, c(1.0, 0.0));
        let got = t12.change_of_variables(&u).unwrap().coeff(0b11);
        let det = u.clone().lu().determinant();
        assert!((got - det).norm() < 1e-12);
    }

    #[test]
    fn derivative_transforms_with_inverse_transpose() {
        // (∂_a f)∘U = Σ_b (U⁻¹)_{b,a} ∂̃_b (f∘U)
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let n = 5;
            let f = random_poly(&mut rng, n, 20);
            let u = random_invertible(&mut rng, n);
            let uinv = u.clone().try_inverse().unwrap();
            let fu = f.change_of_variables(&u).unwrap();
            for a in 0..n {
                let lhs = f.derivative(a).unwrap().change_of_variables(&u).unwrap();
                let mut rhs = GrassmannPoly::zero(n).unwrap();
                for b in 0..n {
                    let term = fu.derivative(b).unwrap().scale(uinv[(b, a)]);
                    rhs = rhs.add(&term).unwrap();
                }
                assert!(lhs.sub(&rhs).unwrap().max_abs() < 1e-10);
            }
        }
    }

    #[test]
    fn integral_change_of_variables_is_det() {
        // ∫Dθ over all n variables after substitution = det(U) × original
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..10 {
            let n = 5;
            let f = random_poly(&mut rng, n, 25);
            let u = random_invertible(&mut rng, n);
            let all: Vec<usize> = (0..n).collect();
            let orig = f.integrate(&all).unwrap().coeff(0);
            let sub = f
                .change_of_variables(&u)
                .unwrap()
                .integrate(&all)
                .unwrap()
                .coeff(0);
            let det = u.clone().lu().determinant();
            assert!((sub - det * orig).norm() < 1e-10 * (1.0 + orig.norm()));
        }
    }

    #[test]
    fn exp_even_basics() {
        // f = aθ1θ2 → 1 + aθ1θ2
        let a = c(0.7, -0.3);
        let mut f = GrassmannPoly::zero(2).unwrap();
        f.add_term(0b11, a);
        let e = f.exp_even().unwrap();
        assert_eq!(e.coeff(0), c(1.0, 0.0));
        assert_eq!(e.coeff(0b11), a);
        // f = θ1θ2 + θ3θ4 → 1 + θ1θ2 + θ3θ4 + θ1θ2θ3θ4
        let mut g = GrassmannPoly::zero(4).unwrap();
        g.add_term(0b0011, c(1.0, 0.0));
        g.add_term(0b1100, c(1.0, 0.0));
        let e = g.exp_even().unwrap();
        assert_eq!(e.coeff(0), c(1.0, 0.0));
        assert_eq!(e.coeff(0b0011), c(1.0, 0.0));
        assert_eq!(e.coeff(0b1100), c(1.0, 0.0));
        assert_eq!(e.coeff(0b1111), c(1.0, 0.0));
        // f = 0 → 1
        let z = GrassmannPoly::zero(3).unwrap();
        assert_eq!(z.exp_even().unwrap().coeff(0), c(1.0, 0.0));
        // rejections
        let bad = GrassmannPoly::one(2).unwrap();
        assert!(bad.exp_even().is_err());
        let odd = GrassmannPoly::generator(2, 0).unwrap();
        assert!(odd.exp_even().is_err());
    }

    #[test]
    fn oracle_small_cases() {
        // A = [[0,a],[−a,0]], B empty → constant a
        let a = c(0.4, 1.1);
        let amat = DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), a, -a, c(0.0, 0.0)]);
        let b = DMatrix::zeros(2, 0);
        let r = gaussian_integral_oracle(&amat, &b).unwrap();
        assert!((r.coeff(0) - a).norm() < 1e-14);

        // n=1, A=0, B=[1] → η1
        let amat = DMatrix::zeros(1, 1);
        let b = DMatrix::from_row_slice(1, 1, &[c(1.0, 0.0)]);
        let r = gaussian_integral_oracle(&amat, &b).unwrap();
        assert_eq!(r.coeff(0b1), c(1.0, 0.0));
        assert_eq!(r.num_terms(), 1);

        // A = 0 (n=2), B = 0 → 0
        let amat = DMatrix::zeros(2, 2);
        let b = DMatrix::zeros(2, 0);
        assert!(gaussian_integral_oracle(&amat, &b).unwrap().is_zero());
    }
}
