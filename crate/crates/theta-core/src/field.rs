//! Finite fields F_q of odd characteristic with table-driven arithmetic.
//!
//! Elements are indices `Σ c_i p^i` into the coefficient space of
//! `F_p[u]/(m(u))`, where `m` is the first monic irreducible polynomial of
//! degree `r` in the order of its coefficient index.

use std::sync::Arc;

use crate::error::{Error, Result};

/// A field element, encoded as its coefficient index.
pub type Fe = u16;

const MAX_Q: u32 = 1024;

#[derive(Debug)]
pub struct Field {
    p: u32,
    r: u32,
    q: u32,
    modulus: Vec<u32>,
    add: Vec<Fe>,
    mul: Vec<Fe>,
    neg: Vec<Fe>,
    inv: Vec<Fe>,
    frob: Vec<Fe>,
    tr: Vec<u32>,
}

fn is_prime(n: u32) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0)
}

// Polynomials over F_p as little-endian coefficient vectors.
fn ptrim(mut a: Vec<u32>) -> Vec<u32> {
    while a.last() == Some(&0) {
        a.pop();
    }
    a
}

fn pmulmod(a: &[u32], b: &[u32], m: &[u32], p: u32) -> Vec<u32> {
    let mut prod = vec![0u32; a.len() + b.len()];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + x * y) % p;
        }
    }
    prem(prod, m, p)
}

fn prem(mut a: Vec<u32>, m: &[u32], p: u32) -> Vec<u32> {
    // m is monic
    let dm = m.len() - 1;
    while a.len() > dm {
        let c = *a.last().unwrap();
        let shift = a.len() - 1 - dm;
        if c != 0 {
            for (i, &mi) in m.iter().enumerate() {
                a[shift + i] = (a[shift + i] + (p - c) * mi) % p;
            }
        }
        a.pop();
    }
    ptrim(a)
}

fn pgcd(mut a: Vec<u32>, mut b: Vec<u32>, p: u32) -> Vec<u32> {
    a = ptrim(a);
    b = ptrim(b);
    while !b.is_empty() {
        let lc = *b.last().unwrap();
        let inv = modpow(lc, p - 2, p);
        let monic: Vec<u32> = b.iter().map(|&c| c * inv % p).collect();
        let r = prem(a, &monic, p);
        a = monic;
        b = r;
    }
    a
}

fn modpow(mut b: u32, mut e: u32, p: u32) -> u32 {
    let mut acc = 1u64;
    let mut base = b as u64 % p as u64;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % p as u64;
        }
        base = base * base % p as u64;
        e >>= 1;
    }
    b = acc as u32;
    b
}

/// Rabin-style check: m of degree r is irreducible iff gcd(x^{p^i} − x, m) = 1
/// for every i ≤ r/2.
fn is_irreducible(m: &[u32], p: u32) -> bool {
    let r = m.len() - 1;
    if r == 1 {
        return true;
    }
    let x = vec![0, 1];
    let mut xp = x.clone();
    for _ in 1..=r / 2 {
        // xp <- xp^p mod m
        let mut acc = vec![1u32];
        for _ in 0..p {
            acc = pmulmod(&acc, &xp, m, p);
        }
        xp = acc;
        let mut diff = xp.clone();
        diff.resize(diff.len().max(2), 0);
        diff[1] = (diff[1] + p - 1) % p;
        let g = pgcd(m.to_vec(), diff, p);
        if g.len() > 1 {
            return false;
        }
    }
    true
}

impl Field {
    /// Builds F_{p^r}. Rejects even characteristic and composite p.
    pub fn new(p: u32, r: u32) -> Result<Arc<Field>> {
        if !is_prime(p) || p == 2 {
            return Err(Error::InvalidParameter(format!("characteristic {p} must be an odd prime")));
        }
        if r == 0 {
            return Err(Error::InvalidParameter("extension degree must be positive".into()));
        }
        let q = p.checked_pow(r).filter(|&q| q <= MAX_Q).ok_or_else(|| {
            Error::InvalidParameter(format!("field size {p}^{r} exceeds {MAX_Q}"))
        })?;
        let modulus = (0..q)
            .map(|idx| {
                let mut m: Vec<u32> = (0..r).map(|i| idx / p.pow(i) % p).collect();
                m.push(1);
                m
            })
            .find(|m| is_irreducible(m, p))
            .expect("an irreducible polynomial of every degree exists");
        Ok(Arc::new(Self::with_modulus(p, r, q, modulus)))
    }

    /// F_q for a prime power q.
    pub fn of_order(q: u32) -> Result<Arc<Field>> {
        for p in 3..=q {
            if is_prime(p) && q % p == 0 {
                let mut r = 0;
                let mut m = q;
                while m % p == 0 {
                    m /= p;
                    r += 1;
                }
                if m != 1 {
                    break;
                }
                return Field::new(p, r);
            }
        }
        Err(Error::InvalidParameter(format!("q = {q} is not a power of an odd prime")))
    }

    fn with_modulus(p: u32, r: u32, q: u32, modulus: Vec<u32>) -> Field {
        let qs = q as usize;
        let coeffs = |idx: u32| -> Vec<u32> { (0..r).map(|i| idx / p.pow(i) % p).collect() };
        let index = |c: &[u32]| -> Fe {
            c.iter().enumerate().map(|(i, &x)| x * p.pow(i as u32)).sum::<u32>() as Fe
        };
        let all: Vec<Vec<u32>> = (0..q).map(coeffs).collect();
        let mut add = vec![0; qs * qs];
        let mut mul = vec![0; qs * qs];
        for a in 0..qs {
            for b in a..qs {
                let s: Vec<u32> = (0..r as usize).map(|i| (all[a][i] + all[b][i]) % p).collect();
                let mut m = pmulmod(&all[a], &all[b], &modulus, p);
                m.resize(r as usize, 0);
                let (si, mi) = (index(&s), index(&m));
                add[a * qs + b] = si;
                add[b * qs + a] = si;
                mul[a * qs + b] = mi;
                mul[b * qs + a] = mi;
            }
        }
        let neg: Vec<Fe> = (0..qs)
            .map(|a| index(&all[a].iter().map(|&c| (p - c) % p).collect::<Vec<_>>()))
            .collect();
        let mut inv = vec![0; qs];
        for a in 1..qs {
            for b in 1..qs {
                if mul[a * qs + b] == 1 {
                    inv[a] = b as Fe;
                    break;
                }
            }
        }
        let pow_table = |e: u32, x: usize| -> Fe {
            let mut acc: Fe = 1;
            for _ in 0..e {
                acc = mul[acc as usize * qs + x];
            }
            acc
        };
        let frob: Vec<Fe> = (0..qs).map(|x| pow_table(p, x)).collect();
        let tr: Vec<u32> = (0..qs)
            .map(|x| {
                let mut acc: Fe = 0;
                let mut y = x as Fe;
                for _ in 0..r {
                    acc = add[acc as usize * qs + y as usize];
                    y = frob[y as usize];
                }
                debug_assert!((acc as u32) < p);
                acc as u32
            })
            .collect();
        Field { p, r, q, modulus, add, mul, neg, inv, frob, tr }
    }

    pub fn p(&self) -> u32 {
        self.p
    }
    pub fn r(&self) -> u32 {
        self.r
    }
    pub fn q(&self) -> u32 {
        self.q
    }
    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    #[inline]
    pub fn add(&self, a: Fe, b: Fe) -> Fe {
        self.add[a as usize * self.q as usize + b as usize]
    }
    #[inline]
    pub fn sub(&self, a: Fe, b: Fe) -> Fe {
        self.add(a, self.neg[b as usize])
    }
    #[inline]
    pub fn mul(&self, a: Fe, b: Fe) -> Fe {
        self.mul[a as usize * self.q as usize + b as usize]
    }
    #[inline]
    pub fn neg(&self, a: Fe) -> Fe {
        self.neg[a as usize]
    }
    pub fn inv(&self, a: Fe) -> Result<Fe> {
        if a == 0 {
            Err(Error::DivisionByZero)
        } else {
            Ok(self.inv[a as usize])
        }
    }
    pub fn div(&self, a: Fe, b: Fe) -> Result<Fe> {
        Ok(self.mul(a, self.inv(b)?))
    }
    pub fn pow(&self, a: Fe, mut e: u64) -> Fe {
        let mut acc: Fe = 1;
        let mut base = a;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }
    /// x ↦ x^p.
    #[inline]
    pub fn frobenius(&self, a: Fe) -> Fe {
        self.frob[a as usize]
    }
    /// Tr_{F_q/F_p}, returned as an integer in [0, p).
    #[inline]
    pub fn trace(&self, a: Fe) -> u32 {
        self.tr[a as usize]
    }
    /// Image of an integer under Z → F_p ⊂ F_q.
    pub fn from_int(&self, n: i64) -> Fe {
        n.rem_euclid(self.p as i64) as Fe
    }
    pub fn coeffs(&self, a: Fe) -> Vec<u32> {
        (0..self.r).map(|i| a as u32 / self.p.pow(i) % self.p).collect()
    }
    pub fn from_coeffs(&self, c: &[u32]) -> Fe {
        c.iter()
            .enumerate()
            .map(|(i, &x)| (x % self.p) * self.p.pow(i as u32))
            .sum::<u32>() as Fe
    }
    pub fn elements(&self) -> impl Iterator<Item = Fe> {
        0..self.q as Fe
    }
    pub fn units(&self) -> impl Iterator<Item = Fe> {
        1..self.q as Fe
    }
    pub fn is_square(&self, a: Fe) -> bool {
        a == 0 || self.pow(a, ((self.q - 1) / 2) as u64) == 1
    }
    pub fn sqrt(&self, a: Fe) -> Option<Fe> {
        self.elements().find(|&x| self.mul(x, x) == a)
    }
    /// Smallest nonsquare in index order.
    pub fn nonsquare(&self) -> Fe {
        self.units().find(|&x| !self.is_square(x)).expect("odd q has nonsquares")
    }
    /// All nonsquares in index order.
    pub fn nonsquares(&self) -> Vec<Fe> {
        self.units().filter(|&x| !self.is_square(x)).collect()
    }
    /// Smallest generator of the multiplicative group.
    pub fn primitive_element(&self) -> Fe {
        let n = (self.q - 1) as u64;
        let primes: Vec<u64> = (2..=n).filter(|&d| n % d == 0 && is_prime(d as u32)).collect();
        self.units()
            .find(|&g| primes.iter().all(|&l| self.pow(g, n / l) != 1))
            .expect("cyclic group has a generator")
    }
    /// Multiplicative order of a nonzero element.
    pub fn order(&self, a: Fe) -> u64 {
        let mut x = a;
        let mut k = 1;
        while x != 1 {
            x = self.mul(x, a);
            k += 1;
        }
        k
    }
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.r == other.r
    }
}
impl Eq for Field {}

/// Embedding of a subfield F_{p^s} into F_{p^r} (s | r), fixed by the image of
/// the generator `u` of the smaller field: the first root of its modulus.
#[derive(Debug, Clone)]
pub struct Embedding {
    pub small: Arc<Field>,
    pub big: Arc<Field>,
    image: Vec<Fe>,
}

impl Embedding {
    pub fn new(small: Arc<Field>, big: Arc<Field>) -> Result<Embedding> {
        if small.p() != big.p() || big.r() % small.r() != 0 {
            return Err(Error::InvalidParameter("not a subfield".into()));
        }
        let m = small.modulus().to_vec();
        let eval = |x: Fe| -> Fe {
            m.iter().rev().fold(0, |acc, &c| big.add(big.mul(acc, x), c as Fe))
        };
        let root = if small.r() == 1 {
            big.from_int(0)
        } else {
            big.elements().find(|&x| eval(x) == 0).expect("subfield modulus splits")
        };
        let image = small
            .elements()
            .map(|a| {
                let c = small.coeffs(a);
                c.iter().rev().fold(0, |acc, &ci| big.add(big.mul(acc, root), ci as Fe))
            })
            .collect();
        Ok(Embedding { small, big, image })
    }
    pub fn map(&self, a: Fe) -> Fe {
        self.image[a as usize]
    }
    /// Inverse on the image; `None` outside the subfield.
    pub fn preimage(&self, b: Fe) -> Option<Fe> {
        self.image.iter().position(|&x| x == b).map(|i| i as Fe)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f9_modulus_and_products() {
        let f = Field::new(3, 2).unwrap();
        assert_eq!(f.modulus(), &[1, 0, 1]);
        let u = f.from_coeffs(&[0, 1]);
        assert_eq!(f.mul(u, u), f.from_int(-1));
        assert_eq!(f.trace(u), 0);
        // brute force u + u^3
        assert_eq!(f.add(u, f.pow(u, 3)), 0);
    }

    #[test]
    fn f3_inverse() {
        let f = Field::new(3, 1).unwrap();
        assert_eq!(f.inv(2).unwrap(), 2);
        assert_eq!(f.inv(0), Err(Error::DivisionByZero));
    }

    #[test]
    fn even_and_composite_rejected() {
        assert!(Field::new(2, 3).is_err());
        assert!(Field::new(9, 1).is_err());
        assert!(Field::of_order(8).is_err());
        assert_eq!(Field::of_order(25).unwrap().r(), 2);
    }

    #[test]
    fn field_axioms_exhaustive() {
        for (p, r) in [(3, 1), (3, 2), (5, 1), (5, 2), (7, 1), (3, 3)] {
            let f = Field::new(p, r).unwrap();
            for a in f.elements() {
                assert_eq!(f.add(a, f.neg(a)), 0);
                if a != 0 {
                    assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
                }
                assert!(f.trace(a) < p);
                assert_eq!(f.pow(a, f.q() as u64), a);
                for b in f.elements().step_by(3) {
                    for c in f.elements().step_by(5) {
                        assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
                        assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
                    }
                }
            }
        }
    }

    #[test]
    fn character_orthogonality() {
        for q in [3u32, 5, 7, 9, 11, 13, 25] {
            let f = Field::of_order(q).unwrap();
            let p = f.p();
            for d in f.elements() {
                let mut counts = vec![0u32; p as usize];
                for c in f.elements() {
                    counts[f.trace(f.mul(c, d)) as usize] += 1;
                }
                if d == 0 {
                    assert_eq!(counts[0], q);
                } else {
                    // Σ ζ^{Tr(cd)} = 0 iff all residues are equally frequent
                    assert!(counts.iter().all(|&k| k == q / p));
                }
            }
        }
    }

    #[test]
    fn embedding_respects_arithmetic() {
        let small = Field::new(3, 2).unwrap();
        let big = Field::new(3, 4).unwrap();
        let e = Embedding::new(small.clone(), big.clone()).unwrap();
        for a in small.elements() {
            for b in small.elements() {
                assert_eq!(e.map(small.mul(a, b)), big.mul(e.map(a), e.map(b)));
                assert_eq!(e.map(small.add(a, b)), big.add(e.map(a), e.map(b)));
            }
        }
    }
}
