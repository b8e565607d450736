//! Exact arithmetic in the cyclotomic field Q(ζ_N).
//!
//! Elements are stored in the power basis 1, ζ, …, ζ^{φ(N)−1} with rational
//! coefficients. Operands of different orders are lifted to the lcm.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Arc, LazyLock, Mutex};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

struct CycloCtx {
    phi: usize,
    /// `red[k]` is ζ^k written in the power basis, for 0 ≤ k < n.
    red: Vec<Vec<i64>>,
}

static CTX: LazyLock<Mutex<HashMap<u32, Arc<CycloCtx>>>> =
    LazyLock::new(|| Mutex::new(HashMap::new()));

fn cyclotomic_poly(n: u32) -> Vec<i64> {
    // x^n − 1 divided by Φ_d for every proper divisor d
    let mut num = vec![0i64; n as usize + 1];
    num[0] = -1;
    num[n as usize] = 1;
    for d in (1..n).filter(|d| n % d == 0) {
        let den = cyclotomic_poly(d);
        num = exact_div(&num, &den);
    }
    num
}

fn exact_div(num: &[i64], den: &[i64]) -> Vec<i64> {
    let mut rem = num.to_vec();
    let dd = den.len() - 1;
    let mut quot = vec![0i64; rem.len() - dd];
    for i in (0..quot.len()).rev() {
        let c = rem[i + dd];
        quot[i] = c;
        for (j, &dj) in den.iter().enumerate() {
            rem[i + j] -= c * dj;
        }
    }
    debug_assert!(rem.iter().all(|&c| c == 0));
    quot
}

fn ctx(n: u32) -> Arc<CycloCtx> {
    assert!(n >= 1, "cyclotomic order must be positive");
    let mut map = CTX.lock().unwrap();
    map.entry(n)
        .or_insert_with(|| {
            let poly = cyclotomic_poly(n);
            let phi = poly.len() - 1;
            let mut red = Vec::with_capacity(n as usize);
            let mut cur = vec![0i64; phi];
            cur[0] = 1;
            for _ in 0..n {
                red.push(cur.clone());
                // multiply by ζ and reduce by the monic Φ_n
                let top = cur[phi - 1];
                for i in (1..phi).rev() {
                    cur[i] = cur[i - 1] - top * poly[i];
                }
                cur[0] = -top * poly[0];
            }
            Arc::new(CycloCtx { phi, red })
        })
        .clone()
}

/// Euler's totient of `n`.
pub fn totient(n: u32) -> usize {
    ctx(n).phi
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct CycNumber {
    n: u32,
    coeffs: Vec<BigRational>,
}

impl CycNumber {
    pub fn zero(n: u32) -> Self {
        let c = ctx(n);
        CycNumber { n, coeffs: vec![BigRational::zero(); c.phi] }
    }

    pub fn one(n: u32) -> Self {
        Self::from_rational(n, BigRational::one())
    }

    pub fn from_int(n: u32, v: i64) -> Self {
        Self::from_rational(n, BigRational::from_integer(BigInt::from(v)))
    }

    pub fn from_rational(n: u32, v: BigRational) -> Self {
        let mut z = Self::zero(n);
        z.coeffs[0] = v;
        z
    }

    /// ζ_n^k for any integer k.
    pub fn zeta(n: u32, k: i64) -> Self {
        let c = ctx(n);
        let k = k.rem_euclid(n as i64) as usize;
        CycNumber {
            n,
            coeffs: c.red[k].iter().map(|&x| BigRational::from_integer(BigInt::from(x))).collect(),
        }
    }

    /// `scale · Σ_j counts[j] ζ_p^j`, embedded in Q(ζ_n). Requires p | n.
    pub fn from_zeta_counts(n: u32, p: u32, counts: &[i128], scale: &BigRational) -> Self {
        assert!(n % p == 0, "ζ_{p} does not live in Q(ζ_{n})");
        let c = ctx(n);
        let step = (n / p) as usize;
        let mut acc = vec![BigInt::zero(); c.phi];
        for (j, &m) in counts.iter().enumerate() {
            if m == 0 {
                continue;
            }
            let m = BigInt::from(m);
            for (a, &r) in acc.iter_mut().zip(&c.red[(j * step) % n as usize]) {
                if r != 0 {
                    *a += &m * r;
                }
            }
        }
        CycNumber {
            n,
            coeffs: acc.into_iter().map(|a| BigRational::from_integer(a) * scale).collect(),
        }
    }

    pub fn order(&self) -> u32 {
        self.n
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn is_one(&self) -> bool {
        self.coeffs[0].is_one() && self.coeffs[1..].iter().all(Zero::is_zero)
    }

    /// The rational value, if the element lies in Q.
    pub fn as_rational(&self) -> Option<BigRational> {
        self.coeffs[1..].iter().all(Zero::is_zero).then(|| self.coeffs[0].clone())
    }

    /// Re-expresses the element in Q(ζ_m), n | m.
    pub fn lift(&self, m: u32) -> Self {
        if m == self.n {
            return self.clone();
        }
        assert!(m % self.n == 0, "cannot lift Q(ζ_{}) into Q(ζ_{m})", self.n);
        let c = ctx(m);
        let step = (m / self.n) as usize;
        let mut out = vec![BigRational::zero(); c.phi];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (o, &r) in out.iter_mut().zip(&c.red[i * step]) {
                if r != 0 {
                    *o += a * BigRational::from_integer(BigInt::from(r));
                }
            }
        }
        CycNumber { n: m, coeffs: out }
    }

    fn common(a: &Self, b: &Self) -> (Self, Self) {
        if a.n == b.n {
            return (a.clone(), b.clone());
        }
        let m = a.n.lcm(&b.n);
        (a.lift(m), b.lift(m))
    }

    pub fn scale(&self, s: &BigRational) -> Self {
        CycNumber { n: self.n, coeffs: self.coeffs.iter().map(|c| c * s).collect() }
    }

    pub fn scale_int(&self, s: i64) -> Self {
        self.scale(&BigRational::from_integer(BigInt::from(s)))
    }

    /// Complex conjugation ζ ↦ ζ⁻¹.
    pub fn conj(&self) -> Self {
        let c = ctx(self.n);
        let mut out = vec![BigRational::zero(); c.phi];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            let k = (self.n as usize - i) % self.n as usize;
            for (o, &r) in out.iter_mut().zip(&c.red[k]) {
                if r != 0 {
                    *o += a * BigRational::from_integer(BigInt::from(r));
                }
            }
        }
        CycNumber { n: self.n, coeffs: out }
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::one(self.n);
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// True iff the element is a root of unity of Q(ζ_n).
    pub fn is_root_of_unity(&self) -> bool {
        let m = if self.n % 2 == 0 { self.n } else { 2 * self.n };
        !self.is_zero() && self.pow(m).is_one()
    }
}

impl Add for &CycNumber {
    type Output = CycNumber;
    fn add(self, rhs: &CycNumber) -> CycNumber {
        let (a, b) = CycNumber::common(self, rhs);
        CycNumber { n: a.n, coeffs: a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| x + y).collect() }
    }
}

impl Sub for &CycNumber {
    type Output = CycNumber;
    fn sub(self, rhs: &CycNumber) -> CycNumber {
        let (a, b) = CycNumber::common(self, rhs);
        CycNumber { n: a.n, coeffs: a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| x - y).collect() }
    }
}

impl Neg for &CycNumber {
    type Output = CycNumber;
    fn neg(self) -> CycNumber {
        CycNumber { n: self.n, coeffs: self.coeffs.iter().map(|x| -x).collect() }
    }
}

impl Mul for &CycNumber {
    type Output = CycNumber;
    fn mul(self, rhs: &CycNumber) -> CycNumber {
        let (a, b) = CycNumber::common(self, rhs);
        let c = ctx(a.n);
        let mut raw = vec![BigRational::zero(); 2 * c.phi];
        for (i, x) in a.coeffs.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.coeffs.iter().enumerate() {
                if !y.is_zero() {
                    raw[i + j] += x * y;
                }
            }
        }
        let mut out: Vec<BigRational> = raw[..c.phi].to_vec();
        for (k, v) in raw.iter().enumerate().skip(c.phi) {
            if v.is_zero() {
                continue;
            }
            for (o, &r) in out.iter_mut().zip(&c.red[k % a.n as usize]) {
                if r != 0 {
                    *o += v * BigRational::from_integer(BigInt::from(r));
                }
            }
        }
        CycNumber { n: a.n, coeffs: out }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $f:ident) => {
        impl $tr for CycNumber {
            type Output = CycNumber;
            fn $f(self, rhs: CycNumber) -> CycNumber {
                (&self).$f(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for CycNumber {
    type Output = CycNumber;
    fn neg(self) -> CycNumber {
        -&self
    }
}

impl fmt::Display for CycNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let sign = if c.is_negative() { "-" } else { "+" };
            let mag = c.abs();
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            match (i, mag.is_one()) {
                (0, _) => write!(f, "{mag}")?,
                (_, true) => write!(f, "z{}^{i}", self.n)?,
                (_, false) => write!(f, "{mag}*z{}^{i}", self.n)?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

impl fmt::Debug for CycNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CycNumber({})", self)
    }
}

impl Serialize for CycNumber {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// Small helper for rationals built from machine integers.
pub fn rat(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// `q^e` as an exact rational, e of either sign.
pub fn rat_pow(q: u32, e: i64) -> BigRational {
    let base = BigRational::from_integer(BigInt::from(q));
    if e >= 0 {
        num_traits::pow(base, e as usize)
    } else {
        num_traits::pow(base, (-e) as usize).recip()
    }
}

/// Integer value of a rational known to be integral.
pub fn rat_to_i64(r: &BigRational) -> Option<i64> {
    r.is_integer().then(|| r.to_integer().to_i64()).flatten()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn totients() {
        assert_eq!(totient(3), 2);
        assert_eq!(totient(12), 4);
        assert_eq!(totient(15), 8);
        assert_eq!(totient(1), 1);
    }

    #[test]
    fn zeta_power_is_one() {
        for n in [3u32, 4, 5, 6, 12, 15, 20] {
            assert!(CycNumber::zeta(n, 1).pow(n).is_one());
            assert!(!CycNumber::zeta(n, 1).pow(n - 1).is_one());
        }
    }

    #[test]
    fn sum_of_prime_roots_vanishes() {
        for p in [3u32, 5, 7] {
            let mut s = CycNumber::zero(p);
            for j in 0..p {
                s = &s + &CycNumber::zeta(p, j as i64);
            }
            assert!(s.is_zero());
            let c = CycNumber::from_zeta_counts(p, p, &vec![4; p as usize], &rat(1, 1));
            assert!(c.is_zero());
        }
    }

    #[test]
    fn lifting_is_a_ring_map() {
        let a = &CycNumber::zeta(3, 1) + &CycNumber::from_int(3, 2);
        let b = CycNumber::zeta(4, 1);
        let prod = &a * &b;
        assert_eq!(prod.order(), 12);
        assert_eq!(prod, &a.lift(12) * &b.lift(12));
        assert_eq!(&b * &b, CycNumber::from_int(4, -1));
    }

    #[test]
    fn conj_inverts_roots() {
        let z = CycNumber::zeta(12, 5);
        assert!((&z * &z.conj()).is_one());
        assert!(z.is_root_of_unity());
        assert!(!CycNumber::from_int(12, 2).is_root_of_unity());
        assert!(CycNumber::from_int(3, -1).is_root_of_unity());
    }

    #[test]
    fn display_is_readable() {
        let z = &CycNumber::from_int(3, 2) - &CycNumber::zeta(3, 1);
        assert_eq!(z.to_string(), "2 - z3^1");
        assert_eq!(CycNumber::zero(5).to_string(), "0");
    }
}
