//! Dense univariate polynomials over a finite field, plus the small amount
//! of linear algebra the function-field layer needs.

use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::field::{Fe, Field};

/// Coefficients from degree 0 upwards, without trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Poly(pub Vec<Fe>);

impl Poly {
    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }
    /// Degree, with −1 for the zero polynomial.
    pub fn deg(&self) -> i64 {
        self.0.len() as i64 - 1
    }
    pub fn coeff(&self, i: usize) -> Fe {
        self.0.get(i).copied().unwrap_or(0)
    }
    pub fn lead(&self) -> Fe {
        self.0.last().copied().unwrap_or(0)
    }
    fn trim(mut self) -> Poly {
        while self.0.last() == Some(&0) {
            self.0.pop();
        }
        self
    }
}

#[derive(Clone, Debug)]
pub struct PolyRing {
    pub field: Arc<Field>,
}

impl PolyRing {
    pub fn new(field: Arc<Field>) -> PolyRing {
        PolyRing { field }
    }

    pub fn q(&self) -> u32 {
        self.field.q()
    }

    pub fn from_coeffs(&self, c: Vec<Fe>) -> Poly {
        Poly(c).trim()
    }

    pub fn constant(&self, c: Fe) -> Poly {
        self.from_coeffs(vec![c])
    }

    pub fn one(&self) -> Poly {
        self.constant(1)
    }

    pub fn x(&self) -> Poly {
        Poly(vec![0, 1])
    }

    pub fn monomial(&self, c: Fe, k: usize) -> Poly {
        let mut v = vec![0; k + 1];
        v[k] = c;
        self.from_coeffs(v)
    }

    /// x − a.
    pub fn linear(&self, a: Fe) -> Poly {
        Poly(vec![self.field.neg(a), 1])
    }

    pub fn add(&self, a: &Poly, b: &Poly) -> Poly {
        let f = &self.field;
        let n = a.0.len().max(b.0.len());
        self.from_coeffs((0..n).map(|i| f.add(a.coeff(i), b.coeff(i))).collect())
    }

    pub fn sub(&self, a: &Poly, b: &Poly) -> Poly {
        let f = &self.field;
        let n = a.0.len().max(b.0.len());
        self.from_coeffs((0..n).map(|i| f.sub(a.coeff(i), b.coeff(i))).collect())
    }

    pub fn neg(&self, a: &Poly) -> Poly {
        self.from_coeffs(a.0.iter().map(|&c| self.field.neg(c)).collect())
    }

    pub fn scale(&self, c: Fe, a: &Poly) -> Poly {
        self.from_coeffs(a.0.iter().map(|&x| self.field.mul(c, x)).collect())
    }

    pub fn mul(&self, a: &Poly, b: &Poly) -> Poly {
        if a.is_zero() || b.is_zero() {
            return Poly::default();
        }
        let f = &self.field;
        let mut out = vec![0; a.0.len() + b.0.len() - 1];
        for (i, &x) in a.0.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.0.iter().enumerate() {
                out[i + j] = f.add(out[i + j], f.mul(x, y));
            }
        }
        self.from_coeffs(out)
    }

    pub fn pow(&self, a: &Poly, e: u32) -> Poly {
        (0..e).fold(self.one(), |acc, _| self.mul(&acc, a))
    }

    pub fn divrem(&self, a: &Poly, b: &Poly) -> Result<(Poly, Poly)> {
        if b.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let f = &self.field;
        let lc_inv = f.inv(b.lead())?;
        let db = b.0.len() - 1;
        let mut r = a.0.clone();
        if r.len() <= db {
            return Ok((Poly::default(), a.clone()));
        }
        let mut quo = vec![0; r.len() - db];
        for k in (0..quo.len()).rev() {
            let c = f.mul(r[k + db], lc_inv);
            quo[k] = c;
            if c != 0 {
                for (j, &bj) in b.0.iter().enumerate() {
                    r[k + j] = f.sub(r[k + j], f.mul(c, bj));
                }
            }
        }
        r.truncate(db);
        Ok((self.from_coeffs(quo), self.from_coeffs(r)))
    }

    pub fn rem(&self, a: &Poly, b: &Poly) -> Result<Poly> {
        Ok(self.divrem(a, b)?.1)
    }

    /// Exact quotient; errors when b does not divide a.
    pub fn div_exact(&self, a: &Poly, b: &Poly) -> Result<Poly> {
        let (qt, r) = self.divrem(a, b)?;
        if !r.is_zero() {
            return Err(Error::InvalidParameter("inexact polynomial division".into()));
        }
        Ok(qt)
    }

    pub fn monic(&self, a: &Poly) -> Result<Poly> {
        Ok(self.scale(self.field.inv(a.lead())?, a))
    }

    pub fn is_monic(&self, a: &Poly) -> bool {
        a.lead() == 1
    }

    /// Monic gcd (zero if both are zero).
    pub fn gcd(&self, a: &Poly, b: &Poly) -> Poly {
        let (mut x, mut y) = (a.clone(), b.clone());
        while !y.is_zero() {
            let r = self.rem(&x, &y).expect("nonzero divisor");
            x = y;
            y = r;
        }
        if x.is_zero() {
            x
        } else {
            self.monic(&x).expect("nonzero")
        }
    }

    /// Inverse of a modulo m.
    pub fn inv_mod(&self, a: &Poly, m: &Poly) -> Result<Poly> {
        let (mut r0, mut r1) = (m.clone(), self.rem(a, m)?);
        let (mut s0, mut s1) = (Poly::default(), self.one());
        while !r1.is_zero() {
            let (qt, r) = self.divrem(&r0, &r1)?;
            let s = self.sub(&s0, &self.mul(&qt, &s1));
            r0 = r1;
            r1 = r;
            s0 = s1;
            s1 = s;
        }
        if r0.deg() != 0 {
            return Err(Error::NotAUnit("polynomial shares a factor with the modulus".into()));
        }
        let c = self.field.inv(r0.lead())?;
        self.rem(&self.scale(c, &s0), m)
    }

    pub fn mul_mod(&self, a: &Poly, b: &Poly, m: &Poly) -> Result<Poly> {
        self.rem(&self.mul(a, b), m)
    }

    pub fn pow_mod(&self, a: &Poly, mut e: u64, m: &Poly) -> Result<Poly> {
        let mut base = self.rem(a, m)?;
        let mut acc = self.rem(&self.one(), m)?;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul_mod(&acc, &base, m)?;
            }
            base = self.mul_mod(&base, &base, m)?;
            e >>= 1;
        }
        Ok(acc)
    }

    pub fn eval(&self, a: &Poly, x: Fe) -> Fe {
        let f = &self.field;
        a.0.iter().rev().fold(0, |acc, &c| f.add(f.mul(acc, x), c))
    }

    pub fn deriv(&self, a: &Poly) -> Poly {
        let f = &self.field;
        self.from_coeffs(a.0.iter().enumerate().skip(1).map(|(i, &c)| f.mul(f.from_int(i as i64), c)).collect())
    }

    /// Applies a map to every coefficient.
    pub fn map_coeffs<F: Fn(Fe) -> Fe>(&self, a: &Poly, g: F) -> Poly {
        self.from_coeffs(a.0.iter().map(|&c| g(c)).collect())
    }

    /// Largest k with b^k | a, for nonzero a and nonconstant b.
    pub fn multiplicity(&self, a: &Poly, b: &Poly) -> Result<(u32, Poly)> {
        if a.is_zero() || b.deg() < 1 {
            return Err(Error::InvalidParameter("multiplicity of zero or of a unit".into()));
        }
        let mut k = 0;
        let mut cur = a.clone();
        loop {
            let (qt, r) = self.divrem(&cur, b)?;
            if !r.is_zero() {
                return Ok((k, cur));
            }
            k += 1;
            cur = qt;
        }
    }

    /// Rabin's test: a of degree d is irreducible iff it divides x^{Q^d} − x
    /// and is coprime to x^{Q^{d/l}} − x for every prime l | d.
    pub fn is_irreducible(&self, a: &Poly) -> bool {
        let d = a.deg();
        if d < 1 {
            return false;
        }
        if d == 1 {
            return true;
        }
        let q = self.q() as u64;
        let d = d as u32;
        let frob_pow = |k: u32| -> Poly {
            let mut y = self.x();
            for _ in 0..k {
                y = self.pow_mod(&y, q, a).expect("nonzero modulus");
            }
            y
        };
        if self.sub(&frob_pow(d), &self.rem(&self.x(), a).unwrap()).is_zero() {
            let primes: Vec<u32> = (2..=d).filter(|&l| d % l == 0 && (2..l).all(|s| l % s != 0)).collect();
            primes.iter().all(|&l| {
                let y = self.sub(&frob_pow(d / l), &self.x());
                self.gcd(&y, a).deg() == 0
            })
        } else {
            false
        }
    }

    /// All monic polynomials of exact degree d, in index order.
    pub fn monics(&self, d: usize) -> Vec<Poly> {
        let q = self.q() as usize;
        let count = q.pow(d as u32);
        (0..count)
            .map(|mut idx| {
                let mut c = Vec::with_capacity(d + 1);
                for _ in 0..d {
                    c.push((idx % q) as Fe);
                    idx /= q;
                }
                c.push(1);
                Poly(c)
            })
            .collect()
    }

    pub fn monic_irreducibles(&self, d: usize) -> Vec<Poly> {
        self.monics(d).into_iter().filter(|p| self.is_irreducible(p)).collect()
    }

    /// Every polynomial of degree ≤ d (including 0), in index order.
    pub fn all_up_to(&self, d: i64) -> Vec<Poly> {
        if d < 0 {
            return vec![Poly::default()];
        }
        let q = self.q() as usize;
        let n = d as usize + 1;
        (0..q.pow(n as u32))
            .map(|mut idx| {
                let mut c = Vec::with_capacity(n);
                for _ in 0..n {
                    c.push((idx % q) as Fe);
                    idx /= q;
                }
                self.from_coeffs(c)
            })
            .collect()
    }

    pub fn random<R: Rng>(&self, rng: &mut R, d: usize) -> Poly {
        self.from_coeffs((0..=d).map(|_| rng.gen_range(0..self.q()) as Fe).collect())
    }

    /// Splits a squarefree product of irreducibles of common degree e into
    /// its factors (Cantor–Zassenhaus, odd characteristic).
    pub fn equal_degree_factors(&self, a: &Poly, e: usize) -> Result<Vec<Poly>> {
        let a = self.monic(a)?;
        let d = a.deg() as usize;
        if e == 0 || d % e != 0 {
            return Err(Error::InvalidParameter("degree is not a multiple of e".into()));
        }
        if d == e {
            return Ok(vec![a]);
        }
        let exp = ((self.q() as u64).pow(e as u32) - 1) / 2;
        // deterministic sweep over small trial polynomials
        let mut idx = 0usize;
        loop {
            idx += 1;
            let trial = self.from_coeffs({
                let q = self.q() as usize;
                let mut i = idx;
                let mut c = Vec::new();
                while i > 0 {
                    c.push((i % q) as Fe);
                    i /= q;
                }
                c
            });
            if trial.deg() < 1 {
                continue;
            }
            if trial.deg() >= 2 * d as i64 {
                return Err(Error::PrecisionExhausted("no splitting polynomial found".into()));
            }
            let h = self.sub(&self.pow_mod(&trial, exp, &a)?, &self.one());
            let g = self.gcd(&h, &a);
            if g.deg() > 0 && g.deg() < d as i64 {
                let rest = self.div_exact(&a, &g)?;
                let mut out = self.equal_degree_factors(&g, e)?;
                out.extend(self.equal_degree_factors(&rest, e)?);
                out.sort();
                return Ok(out);
            }
        }
    }

    /// Some g with g² = a, if a is a square.
    pub fn sqrt(&self, a: &Poly) -> Option<Poly> {
        if a.is_zero() {
            return Some(Poly::default());
        }
        if a.deg() % 2 != 0 {
            return None;
        }
        let f = &self.field;
        let n = (a.deg() / 2) as usize;
        let top = f.sqrt(a.lead())?;
        let two_top_inv = f.inv(f.mul(f.from_int(2), top)).ok()?;
        // solve for coefficients from the top down
        let mut g = vec![0; n + 1];
        g[n] = top;
        for k in (0..n).rev() {
            // coefficient of x^{n+k} in g² involves 2 g_n g_k + Σ_{i+j=n+k, i,j>k} g_i g_j
            let mut s = 0;
            for i in k + 1..=n {
                let j = n + k - i;
                if j > k && j <= n {
                    s = f.add(s, f.mul(g[i], g[j]));
                }
            }
            g[k] = f.mul(f.sub(a.coeff(n + k), s), two_top_inv);
        }
        let g = self.from_coeffs(g);
        if self.mul(&g, &g) == *a {
            Some(g)
        } else {
            None
        }
    }
}

/// Rank of a matrix over a finite field by Gaussian elimination.
pub fn rank(field: &Field, rows: &[Vec<Fe>]) -> usize {
    let mut m: Vec<Vec<Fe>> = rows.to_vec();
    let ncols = m.first().map_or(0, |r| r.len());
    let mut r = 0;
    for c in 0..ncols {
        let Some(piv) = (r..m.len()).find(|&i| m[i][c] != 0) else {
            continue;
        };
        m.swap(r, piv);
        let inv = field.inv(m[r][c]).expect("pivot is nonzero");
        for i in 0..m.len() {
            if i != r && m[i][c] != 0 {
                let factor = field.mul(m[i][c], inv);
                for j in c..ncols {
                    let v = field.mul(factor, m[r][j]);
                    m[i][j] = field.sub(m[i][j], v);
                }
            }
        }
        r += 1;
        if r == m.len() {
            break;
        }
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ring(q: u32) -> PolyRing {
        PolyRing::new(Field::of_order(q).unwrap())
    }

    #[test]
    fn irreducible_counts() {
        // number of monic irreducibles of degree d over F_q
        let r = ring(3);
        assert_eq!(r.monic_irreducibles(1).len(), 3);
        assert_eq!(r.monic_irreducibles(2).len(), 3);
        assert_eq!(r.monic_irreducibles(3).len(), 8);
        assert_eq!(ring(9).monic_irreducibles(2).len(), 36);
    }

    #[test]
    fn divrem_and_inverse() {
        let r = ring(5);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let a = r.random(&mut rng, 6);
            let mut b = r.random(&mut rng, 3);
            if b.is_zero() {
                b = r.one();
            }
            let (qt, rem) = r.divrem(&a, &b).unwrap();
            assert_eq!(r.add(&r.mul(&qt, &b), &rem), a);
            assert!(rem.deg() < b.deg());
        }
        let m = r.pow(&r.linear(2), 3);
        let a = r.linear(1);
        let inv = r.inv_mod(&a, &m).unwrap();
        assert_eq!(r.mul_mod(&a, &inv, &m).unwrap(), r.one());
    }

    #[test]
    fn splitting_over_quadratic_extension() {
        let r9 = ring(9);
        // x² + 1 is irreducible over F₃ and splits over F₉
        let p = Poly(vec![1, 0, 1]);
        let fs = r9.equal_degree_factors(&p, 1).unwrap();
        assert_eq!(fs.len(), 2);
        assert_eq!(r9.mul(&fs[0], &fs[1]), p);
    }

    #[test]
    fn square_roots() {
        let r = ring(3);
        let g = Poly(vec![2, 1, 1]);
        assert_eq!(r.sqrt(&r.mul(&g, &g)).map(|h| r.mul(&h, &h)), Some(r.mul(&g, &g)));
        assert!(r.sqrt(&r.x()).is_none());
        assert!(r.sqrt(&r.constant(2)).is_none());
        assert!(r.sqrt(&Poly(vec![1, 0, 1])).is_none());
    }

    #[test]
    fn ranks() {
        let f = Field::of_order(3).unwrap();
        assert_eq!(rank(&f, &[vec![1, 2], vec![2, 1]]), 1);
        assert_eq!(rank(&f, &[vec![1, 0, 1], vec![0, 1, 1], vec![1, 1, 0]]), 3);
        assert_eq!(rank(&f, &[]), 0);
    }
}
