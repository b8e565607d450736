//! Truncated Laurent series over F_q, optionally with a square-zero part.
//!
//! A `LocalRing` fixes a window of exponents `[lo, hi)`. Elements store the
//! reduced part `a` and the ε-part `b` as dense coefficient arrays indexed by
//! `exponent − lo`. Products drop exponents `≥ hi` and fail on exponents
//! below `lo`.

use std::fmt::Write as _;
use std::sync::Arc;

use rand::Rng;

use crate::cyclo::CycNumber;
use crate::error::{Error, Result};
use crate::field::{Fe, Field};

pub const MAXW: usize = 32;

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Default)]
pub struct LocalElem {
    pub a: [Fe; MAXW],
    pub b: [Fe; MAXW],
}

#[derive(Clone, Debug)]
pub struct LocalRing {
    pub field: Arc<Field>,
    pub lo: i32,
    pub hi: i32,
    pub dual: bool,
}

impl LocalRing {
    pub fn new(field: Arc<Field>, lo: i32, hi: i32, dual: bool) -> Result<LocalRing> {
        if lo > 0 || hi <= 0 || hi - lo < 2 || (hi - lo) as usize > MAXW {
            return Err(Error::InvalidParameter(format!(
                "window ({lo}, {hi}) must satisfy lo <= 0 < hi, 2 <= hi - lo <= {MAXW}"
            )));
        }
        Ok(LocalRing { field, lo, hi, dual })
    }

    pub fn width(&self) -> usize {
        (self.hi - self.lo) as usize
    }

    pub fn q(&self) -> u32 {
        self.field.q()
    }

    fn idx(&self, k: i32) -> Option<usize> {
        (k >= self.lo && k < self.hi).then(|| (k - self.lo) as usize)
    }

    pub fn zero(&self) -> LocalElem {
        LocalElem::default()
    }

    pub fn one(&self) -> LocalElem {
        self.constant(1)
    }

    pub fn constant(&self, c: Fe) -> LocalElem {
        self.monomial(c, 0).expect("0 is inside every window")
    }

    /// `c·t^k`.
    pub fn monomial(&self, c: Fe, k: i32) -> Result<LocalElem> {
        let mut x = self.zero();
        if k >= self.hi {
            return Ok(x);
        }
        let i = self.idx(k).ok_or_else(|| prec(format!("t^{k} below window")))?;
        x.a[i] = c;
        Ok(x)
    }

    /// `ε·c·t^k`.
    pub fn eps_monomial(&self, c: Fe, k: i32) -> Result<LocalElem> {
        self.require_dual()?;
        let mut x = self.zero();
        if k >= self.hi {
            return Ok(x);
        }
        let i = self.idx(k).ok_or_else(|| prec(format!("εt^{k} below window")))?;
        x.b[i] = c;
        Ok(x)
    }

    pub fn t_pow(&self, k: i32) -> Result<LocalElem> {
        self.monomial(1, k)
    }

    fn require_dual(&self) -> Result<()> {
        if self.dual {
            Ok(())
        } else {
            Err(Error::InvalidParameter("ε-part requested in a plain ring".into()))
        }
    }

    /// Coefficient of `t^k` in the reduced part (0 outside the window).
    pub fn coeff(&self, x: &LocalElem, k: i32) -> Fe {
        self.idx(k).map_or(0, |i| x.a[i])
    }

    /// Coefficient of `t^k` in the ε-part.
    pub fn eps_coeff(&self, x: &LocalElem, k: i32) -> Fe {
        self.idx(k).map_or(0, |i| x.b[i])
    }

    pub fn set_coeff(&self, x: &mut LocalElem, k: i32, c: Fe) -> Result<()> {
        let i = self.idx(k).ok_or_else(|| prec(format!("t^{k} outside window")))?;
        x.a[i] = c;
        Ok(())
    }

    pub fn set_eps_coeff(&self, x: &mut LocalElem, k: i32, c: Fe) -> Result<()> {
        self.require_dual()?;
        let i = self.idx(k).ok_or_else(|| prec(format!("εt^{k} outside window")))?;
        x.b[i] = c;
        Ok(())
    }

    pub fn add(&self, x: &LocalElem, y: &LocalElem) -> LocalElem {
        let f = &self.field;
        let mut z = *x;
        for i in 0..self.width() {
            z.a[i] = f.add(x.a[i], y.a[i]);
            z.b[i] = f.add(x.b[i], y.b[i]);
        }
        z
    }

    pub fn neg(&self, x: &LocalElem) -> LocalElem {
        let f = &self.field;
        let mut z = *x;
        for i in 0..self.width() {
            z.a[i] = f.neg(x.a[i]);
            z.b[i] = f.neg(x.b[i]);
        }
        z
    }

    pub fn sub(&self, x: &LocalElem, y: &LocalElem) -> LocalElem {
        self.add(x, &self.neg(y))
    }

    /// Multiplication by a residue-field constant.
    pub fn scale(&self, c: Fe, x: &LocalElem) -> LocalElem {
        let f = &self.field;
        let mut z = *x;
        for i in 0..self.width() {
            z.a[i] = f.mul(c, x.a[i]);
            z.b[i] = f.mul(c, x.b[i]);
        }
        z
    }

    fn conv(&self, x: &[Fe; MAXW], y: &[Fe; MAXW], out: &mut [Fe; MAXW]) -> Result<()> {
        let f = &self.field;
        let w = self.width() as i32;
        for i in 0..w {
            let xi = x[i as usize];
            if xi == 0 {
                continue;
            }
            for j in 0..w {
                let yj = y[j as usize];
                if yj == 0 {
                    continue;
                }
                let k = self.lo + i + j;
                if k >= w {
                    break;
                }
                if k < 0 {
                    return Err(prec(format!(
                        "product needs t^{} below window start {}",
                        k + self.lo,
                        self.lo
                    )));
                }
                let o = &mut out[k as usize];
                *o = f.add(*o, f.mul(xi, yj));
            }
        }
        Ok(())
    }

    pub fn mul(&self, x: &LocalElem, y: &LocalElem) -> Result<LocalElem> {
        let mut z = self.zero();
        self.conv(&x.a, &y.a, &mut z.a)?;
        if self.dual {
            self.conv(&x.a, &y.b, &mut z.b)?;
            self.conv(&x.b, &y.a, &mut z.b)?;
        }
        Ok(z)
    }

    pub fn is_zero(&self, x: &LocalElem) -> bool {
        x.a.iter().chain(x.b.iter()).all(|&c| c == 0)
    }

    /// Valuation of the reduction ā; `NotAUnit` when ā = 0.
    pub fn val_red(&self, x: &LocalElem) -> Result<i32> {
        x.a[..self.width()]
            .iter()
            .position(|&c| c != 0)
            .map(|i| i as i32 + self.lo)
            .ok_or_else(|| Error::NotAUnit("reduction is zero".into()))
    }

    /// Valuation of the ε-part, `None` when it vanishes.
    pub fn val_eps(&self, x: &LocalElem) -> Option<i32> {
        x.b[..self.width()].iter().position(|&c| c != 0).map(|i| i as i32 + self.lo)
    }

    /// Smallest exponent carrying a nonzero coefficient in either part.
    pub fn val(&self, x: &LocalElem) -> Option<i32> {
        let a = self.val_red(x).ok();
        match (a, self.val_eps(x)) {
            (Some(u), Some(v)) => Some(u.min(v)),
            (u, v) => u.or(v),
        }
    }

    pub fn reduce_mod_eps(&self, x: &LocalElem) -> LocalElem {
        LocalElem { a: x.a, b: [0; MAXW] }
    }

    /// The ε-part as an element without ε.
    pub fn epsilon_part(&self, x: &LocalElem) -> LocalElem {
        LocalElem { a: x.b, b: [0; MAXW] }
    }

    /// `ε·x` for x without ε-part.
    pub fn times_eps(&self, x: &LocalElem) -> LocalElem {
        LocalElem { a: [0; MAXW], b: x.a }
    }

    /// Nonzero coefficients only at exponents ≥ 0.
    pub fn is_integral(&self, x: &LocalElem) -> bool {
        (self.lo..0).all(|k| self.coeff(x, k) == 0 && self.eps_coeff(x, k) == 0)
    }

    /// Drops all terms of exponent ≥ `level`.
    pub fn truncate(&self, x: &LocalElem, level: i32) -> LocalElem {
        let mut z = *x;
        for k in level.max(self.lo)..self.hi {
            let i = (k - self.lo) as usize;
            z.a[i] = 0;
            z.b[i] = 0;
        }
        z
    }

    /// Inverse of a reduced Laurent series with leading term at `v`, filled
    /// up to the window top.
    fn inv_red(&self, a: &[Fe; MAXW]) -> Result<[Fe; MAXW]> {
        let f = &self.field;
        let w = self.width();
        let i0 = a[..w].iter().position(|&c| c != 0).ok_or_else(|| {
            Error::NotAUnit("reduction is zero".into())
        })?;
        let v = i0 as i32 + self.lo;
        let start = self
            .idx(-v)
            .ok_or_else(|| prec(format!("inverse needs t^{} below window", -v)))?;
        let c0inv = f.inv(a[i0])?;
        let mut out = [0; MAXW];
        // u = Σ a[i0+j] t^j, solve u·s = 1 term by term
        let terms = w - start;
        let mut s = vec![0; terms];
        for n in 0..terms {
            let mut acc = if n == 0 { 1 } else { 0 };
            for j in 1..=n {
                let aj = if i0 + j < w { a[i0 + j] } else { 0 };
                acc = f.sub(acc, f.mul(aj, s[n - j]));
            }
            s[n] = f.mul(acc, c0inv);
        }
        out[start..w].copy_from_slice(&s);
        Ok(out)
    }

    /// Inverse of an element with nonzero reduction: (a+εb)⁻¹ = a⁻¹ − εba⁻².
    pub fn inv(&self, x: &LocalElem) -> Result<LocalElem> {
        let ai = self.inv_red(&x.a)?;
        let ainv = LocalElem { a: ai, b: [0; MAXW] };
        if !self.dual || x.b.iter().all(|&c| c == 0) {
            return Ok(ainv);
        }
        let bpart = LocalElem { a: x.b, b: [0; MAXW] };
        let corr = self.mul(&self.mul(&bpart, &ainv)?, &ainv)?;
        Ok(LocalElem { a: ai, b: self.neg(&corr).a })
    }

    pub fn pow(&self, x: &LocalElem, e: u32) -> Result<LocalElem> {
        let mut acc = self.one();
        for _ in 0..e {
            acc = self.mul(&acc, x)?;
        }
        Ok(acc)
    }

    /// Exponent k ∈ F_p with ψ_E(x) = ζ_p^k: the trace of the t⁻¹
    /// coefficient of the ε-part (dual ring) or of x itself (plain ring).
    pub fn psi_exponent(&self, x: &LocalElem) -> u32 {
        let c = if self.dual { self.eps_coeff(x, -1) } else { self.coeff(x, -1) };
        self.field.trace(c)
    }

    /// ψ_E(x) in Q(ζ_n), p | n.
    pub fn psi(&self, x: &LocalElem, n: u32) -> CycNumber {
        let p = self.field.p();
        CycNumber::zeta(n, (self.psi_exponent(x) * (n / p)) as i64)
    }

    /// Every element `Σ_{lo≤k<hi} c_k t^k` (+ ε-part when `eps`), in index order.
    pub fn enumerate(&self, lo: i32, hi: i32, eps: bool) -> Result<Vec<LocalElem>> {
        if lo < self.lo || hi > self.hi || lo > hi {
            return Err(prec(format!("range [{lo}, {hi}) outside window")));
        }
        let q = self.q() as usize;
        let n = (hi - lo) as usize * if eps { 2 } else { 1 };
        let total = q.checked_pow(n as u32).filter(|&t| t <= 1 << 24).ok_or_else(|| {
            Error::InvalidParameter("enumeration too large".into())
        })?;
        let mut out = Vec::with_capacity(total);
        for mut idx in 0..total {
            let mut x = self.zero();
            for j in 0..n {
                let c = (idx % q) as Fe;
                idx /= q;
                let k = lo + (j % (hi - lo) as usize) as i32;
                let i = (k - self.lo) as usize;
                if j < (hi - lo) as usize {
                    x.a[i] = c;
                } else {
                    x.b[i] = c;
                }
            }
            out.push(x);
        }
        Ok(out)
    }

    /// Uniform random element supported on `[lo, hi)`.
    pub fn random<R: Rng>(&self, rng: &mut R, lo: i32, hi: i32, eps: bool) -> LocalElem {
        let q = self.q() as Fe;
        let mut x = self.zero();
        for k in lo.max(self.lo)..hi.min(self.hi) {
            let i = (k - self.lo) as usize;
            x.a[i] = rng.gen_range(0..q);
            if eps && self.dual {
                x.b[i] = rng.gen_range(0..q);
            }
        }
        x
    }

    /// Random element with nonzero unit reduction, supported on `[0, hi)`.
    pub fn random_unit<R: Rng>(&self, rng: &mut R, hi: i32, eps: bool) -> LocalElem {
        let mut x = self.random(rng, 0, hi, eps);
        let i = (-self.lo) as usize;
        x.a[i] = rng.gen_range(1..self.q() as Fe);
        x
    }

    pub fn format(&self, x: &LocalElem) -> String {
        let mut s = String::new();
        let mut term = |c: Fe, k: i32, eps: bool| {
            if c == 0 {
                return;
            }
            if !s.is_empty() {
                s.push_str(" + ");
            }
            let e = if eps { "e*" } else { "" };
            let _ = write!(s, "{e}[{c}]t^{k}");
        };
        for k in self.lo..self.hi {
            term(self.coeff(x, k), k, false);
        }
        for k in self.lo..self.hi {
            term(self.eps_coeff(x, k), k, true);
        }
        if s.is_empty() {
            s.push('0');
        }
        s
    }
}

fn prec(msg: String) -> Error {
    Error::PrecisionExhausted(msg)
}

/// A 2×2 matrix over a local ring, used for SL₂(E).
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct Mat2 {
    pub a: LocalElem,
    pub b: LocalElem,
    pub c: LocalElem,
    pub d: LocalElem,
}

impl LocalRing {
    pub fn mat_identity(&self) -> Mat2 {
        Mat2 { a: self.one(), b: self.zero(), c: self.zero(), d: self.one() }
    }

    pub fn mat_upper(&self, z: LocalElem) -> Mat2 {
        Mat2 { b: z, ..self.mat_identity() }
    }

    pub fn mat_lower(&self, z: LocalElem) -> Mat2 {
        Mat2 { c: z, ..self.mat_identity() }
    }

    /// diag(α, α⁻¹).
    pub fn mat_diag(&self, alpha: LocalElem) -> Result<Mat2> {
        Ok(Mat2 { a: alpha, b: self.zero(), c: self.zero(), d: self.inv(&alpha)? })
    }

    /// The Weyl element [[0, 1], [−1, 0]].
    pub fn mat_w(&self) -> Mat2 {
        Mat2 { a: self.zero(), b: self.one(), c: self.neg(&self.one()), d: self.zero() }
    }

    pub fn mat_mul(&self, x: &Mat2, y: &Mat2) -> Result<Mat2> {
        let m = |p: &LocalElem, q: &LocalElem| self.mul(p, q);
        Ok(Mat2 {
            a: self.add(&m(&x.a, &y.a)?, &m(&x.b, &y.c)?),
            b: self.add(&m(&x.a, &y.b)?, &m(&x.b, &y.d)?),
            c: self.add(&m(&x.c, &y.a)?, &m(&x.d, &y.c)?),
            d: self.add(&m(&x.c, &y.b)?, &m(&x.d, &y.d)?),
        })
    }

    pub fn mat_det(&self, x: &Mat2) -> Result<LocalElem> {
        Ok(self.sub(&self.mul(&x.a, &x.d)?, &self.mul(&x.b, &x.c)?))
    }

    /// Inverse of a determinant-one matrix.
    pub fn mat_inv_sl2(&self, x: &Mat2) -> Mat2 {
        Mat2 { a: x.d, b: self.neg(&x.b), c: self.neg(&x.c), d: x.a }
    }

    pub fn mat_is_integral(&self, x: &Mat2) -> bool {
        [x.a, x.b, x.c, x.d].iter().all(|e| self.is_integral(e))
    }

    pub fn mat_truncate(&self, x: &Mat2, level: i32) -> Mat2 {
        Mat2 {
            a: self.truncate(&x.a, level),
            b: self.truncate(&x.b, level),
            c: self.truncate(&x.c, level),
            d: self.truncate(&x.d, level),
        }
    }

    /// Random element of SL₂(O) with polynomial entries: a product of
    /// elementary matrices with entries below `t^hi` and a constant diagonal.
    pub fn random_sl2_integral<R: Rng>(&self, rng: &mut R, hi: i32) -> Result<Mat2> {
        let mut g = self.mat_identity();
        for _ in 0..3 {
            let u = self.mat_upper(self.random(rng, 0, hi, true));
            let l = self.mat_lower(self.random(rng, 0, hi, true));
            g = self.mat_mul(&self.mat_mul(&g, &u)?, &l)?;
        }
        let c = rng.gen_range(1..self.q()) as Fe;
        let d = self.mat_diag(self.constant(c))?;
        self.mat_mul(&g, &d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring(lo: i32, hi: i32, dual: bool) -> LocalRing {
        LocalRing::new(Field::new(3, 1).unwrap(), lo, hi, dual).unwrap()
    }

    #[test]
    fn eps_squares_to_zero() {
        let r = ring(-4, 4, true);
        let tinv = r.eps_monomial(1, -1).unwrap();
        let x = r.add(&r.one(), &tinv);
        let y = r.sub(&r.one(), &tinv);
        assert_eq!(r.mul(&x, &y).unwrap(), r.one());
    }

    #[test]
    fn invert_unit_example() {
        let r = ring(-4, 4, false);
        let x = r.add(&r.t_pow(1).unwrap(), &r.t_pow(2).unwrap());
        let z = r.inv(&x).unwrap();
        assert_eq!(r.mul(&x, &z).unwrap(), r.one());
        // t⁻¹(1 − t + t² − t³) on the exponents it determines
        for (k, c) in [(-1, 1), (0, 2), (1, 1), (2, 2)] {
            assert_eq!(r.coeff(&z, k), c);
        }
    }

    #[test]
    fn nilpotent_has_no_valuation() {
        let r = ring(-4, 4, true);
        let x = r.eps_monomial(1, -2).unwrap();
        assert!(matches!(r.val_red(&x), Err(Error::NotAUnit(_))));
        assert!(matches!(r.inv(&x), Err(Error::NotAUnit(_))));
    }

    #[test]
    fn underflow_is_reported() {
        let r = ring(-2, 4, false);
        let x = r.t_pow(-2).unwrap();
        assert!(matches!(r.mul(&x, &x), Err(Error::PrecisionExhausted(_))));
        assert!(r.t_pow(-3).is_err());
    }

    #[test]
    fn psi_reads_eps_residue() {
        let r = ring(-4, 4, true);
        assert_eq!(r.psi(&r.eps_monomial(1, -1).unwrap(), 3), CycNumber::zeta(3, 1));
        assert!(r.psi(&r.t_pow(-1).unwrap(), 3).is_one());
        assert!(r.psi(&r.eps_monomial(2, 0).unwrap(), 3).is_one());
        let plain = ring(-4, 4, false);
        assert_eq!(plain.psi(&plain.t_pow(-1).unwrap(), 3), CycNumber::zeta(3, 1));
    }

    #[test]
    fn dual_inverse() {
        let r = ring(-4, 4, true);
        let x = r.add(&r.t_pow(1).unwrap(), &r.constant(2));
        let y = r.add(&x, &r.eps_monomial(1, 0).unwrap());
        assert_eq!(r.mul(&y, &r.inv(&y).unwrap()).unwrap(), r.one());
        // a t⁻¹ ε-part costs one digit of precision
        let y = r.add(&x, &r.eps_monomial(1, -1).unwrap());
        let back = r.mul(&y, &r.inv(&y).unwrap()).unwrap();
        assert_eq!(r.truncate(&back, 3), r.one());
    }

    #[test]
    fn enumerate_counts() {
        let r = ring(-4, 4, true);
        assert_eq!(r.enumerate(0, 1, true).unwrap().len(), 9);
        assert_eq!(r.enumerate(0, 2, false).unwrap().len(), 9);
    }
}
