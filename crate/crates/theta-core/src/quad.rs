//! Quadratic algebras K/E: unramified (w² = d, d a constant nonsquare),
//! ramified (w² = t) and split (K = E ⊕ E).

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::Fe;
use crate::local::{LocalElem, LocalRing};

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Flavor {
    Unramified,
    Ramified,
    Split,
}

impl std::str::FromStr for Flavor {
    type Err = Error;
    fn from_str(s: &str) -> Result<Flavor> {
        match s {
            "unramified" => Ok(Flavor::Unramified),
            "ramified" => Ok(Flavor::Ramified),
            "split" => Ok(Flavor::Split),
            _ => Err(Error::InvalidParameter(format!("unknown flavor '{s}'"))),
        }
    }
}

impl std::fmt::Display for Flavor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Flavor::Unramified => "unramified",
            Flavor::Ramified => "ramified",
            Flavor::Split => "split",
        };
        f.write_str(s)
    }
}

/// `u + v·w`, or the pair `(u, v)` in the split algebra.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Default)]
pub struct QuadElem {
    pub u: LocalElem,
    pub v: LocalElem,
}

#[derive(Clone, Debug)]
pub struct QuadRing {
    pub base: LocalRing,
    pub flavor: Flavor,
    /// w² (unused for split).
    pub d: LocalElem,
}

impl QuadRing {
    /// Uses the smallest nonsquare of F_q for the unramified flavor.
    pub fn new(base: LocalRing, flavor: Flavor) -> Result<QuadRing> {
        let d = match flavor {
            Flavor::Unramified => base.constant(base.field.nonsquare()),
            Flavor::Ramified => base.t_pow(1)?,
            Flavor::Split => base.zero(),
        };
        Ok(QuadRing { base, flavor, d })
    }

    /// Unramified algebra with a chosen nonsquare constant.
    pub fn unramified_with(base: LocalRing, nonsquare: Fe) -> Result<QuadRing> {
        if base.field.is_square(nonsquare) {
            return Err(Error::InvalidParameter(format!("{nonsquare} is a square")));
        }
        let d = base.constant(nonsquare);
        Ok(QuadRing { base, flavor: Flavor::Unramified, d })
    }

    /// Ramified algebra with w² = u·t for a unit constant u.
    pub fn ramified_with(base: LocalRing, unit: Fe) -> Result<QuadRing> {
        if unit == 0 {
            return Err(Error::InvalidParameter("ramified twist must be a unit".into()));
        }
        let d = base.monomial(unit, 1)?;
        Ok(QuadRing { base, flavor: Flavor::Ramified, d })
    }

    pub fn q(&self) -> u32 {
        self.base.q()
    }

    pub fn zero(&self) -> QuadElem {
        QuadElem::default()
    }

    pub fn one(&self) -> QuadElem {
        self.from_base(&self.base.one())
    }

    /// E → K.
    pub fn from_base(&self, x: &LocalElem) -> QuadElem {
        match self.flavor {
            Flavor::Split => QuadElem { u: *x, v: *x },
            _ => QuadElem { u: *x, v: self.base.zero() },
        }
    }

    /// The generator w (split: (1, −1), which squares to 1 and is anti-invariant).
    pub fn w(&self) -> QuadElem {
        let b = &self.base;
        match self.flavor {
            Flavor::Split => QuadElem { u: b.one(), v: b.neg(&b.one()) },
            _ => QuadElem { u: b.zero(), v: b.one() },
        }
    }

    pub fn add(&self, x: &QuadElem, y: &QuadElem) -> QuadElem {
        QuadElem { u: self.base.add(&x.u, &y.u), v: self.base.add(&x.v, &y.v) }
    }

    pub fn sub(&self, x: &QuadElem, y: &QuadElem) -> QuadElem {
        QuadElem { u: self.base.sub(&x.u, &y.u), v: self.base.sub(&x.v, &y.v) }
    }

    pub fn neg(&self, x: &QuadElem) -> QuadElem {
        QuadElem { u: self.base.neg(&x.u), v: self.base.neg(&x.v) }
    }

    pub fn mul(&self, x: &QuadElem, y: &QuadElem) -> Result<QuadElem> {
        let b = &self.base;
        match self.flavor {
            Flavor::Split => Ok(QuadElem { u: b.mul(&x.u, &y.u)?, v: b.mul(&x.v, &y.v)? }),
            _ => {
                let vv = b.mul(&x.v, &y.v)?;
                Ok(QuadElem {
                    u: b.add(&b.mul(&x.u, &y.u)?, &b.mul(&self.d, &vv)?),
                    v: b.add(&b.mul(&x.u, &y.v)?, &b.mul(&x.v, &y.u)?),
                })
            }
        }
    }

    /// Multiplication by an element of E.
    pub fn scale(&self, s: &LocalElem, x: &QuadElem) -> Result<QuadElem> {
        Ok(QuadElem { u: self.base.mul(s, &x.u)?, v: self.base.mul(s, &x.v)? })
    }

    pub fn scale_fe(&self, c: Fe, x: &QuadElem) -> QuadElem {
        QuadElem { u: self.base.scale(c, &x.u), v: self.base.scale(c, &x.v) }
    }

    pub fn iota(&self, x: &QuadElem) -> QuadElem {
        match self.flavor {
            Flavor::Split => QuadElem { u: x.v, v: x.u },
            _ => QuadElem { u: x.u, v: self.base.neg(&x.v) },
        }
    }

    pub fn trace(&self, x: &QuadElem) -> LocalElem {
        match self.flavor {
            Flavor::Split => self.base.add(&x.u, &x.v),
            _ => self.base.add(&x.u, &x.u),
        }
    }

    pub fn norm(&self, x: &QuadElem) -> Result<LocalElem> {
        let b = &self.base;
        match self.flavor {
            Flavor::Split => b.mul(&x.u, &x.v),
            _ => Ok(b.sub(&b.mul(&x.u, &x.u)?, &b.mul(&self.d, &b.mul(&x.v, &x.v)?)?)),
        }
    }

    /// ⟨x, y⟩ = Tr(x·ι(y)).
    pub fn pairing(&self, x: &QuadElem, y: &QuadElem) -> Result<LocalElem> {
        Ok(self.trace(&self.mul(x, &self.iota(y))?))
    }

    pub fn inv(&self, x: &QuadElem) -> Result<QuadElem> {
        let b = &self.base;
        match self.flavor {
            Flavor::Split => Ok(QuadElem { u: b.inv(&x.u)?, v: b.inv(&x.v)? }),
            _ => {
                let n = b.inv(&self.norm(x)?)?;
                self.scale(&n, &self.iota(x))
            }
        }
    }

    pub fn is_zero(&self, x: &QuadElem) -> bool {
        self.base.is_zero(&x.u) && self.base.is_zero(&x.v)
    }

    pub fn is_integral(&self, x: &QuadElem) -> bool {
        self.base.is_integral(&x.u) && self.base.is_integral(&x.v)
    }

    pub fn reduce_mod_eps(&self, x: &QuadElem) -> QuadElem {
        QuadElem { u: self.base.reduce_mod_eps(&x.u), v: self.base.reduce_mod_eps(&x.v) }
    }

    pub fn epsilon_part(&self, x: &QuadElem) -> QuadElem {
        QuadElem { u: self.base.epsilon_part(&x.u), v: self.base.epsilon_part(&x.v) }
    }

    pub fn times_eps(&self, x: &QuadElem) -> QuadElem {
        QuadElem { u: self.base.times_eps(&x.u), v: self.base.times_eps(&x.v) }
    }

    pub fn truncate(&self, x: &QuadElem, level: i32) -> QuadElem {
        QuadElem { u: self.base.truncate(&x.u, level), v: self.base.truncate(&x.v, level) }
    }

    /// Anti-invariant: ι(x) = −x.
    pub fn is_antiinvariant(&self, x: &QuadElem) -> bool {
        self.iota(x) == self.neg(x)
    }

    /// Valuation of the reduction in the normalisation of K̄ (ramified:
    /// min(2v(u), 2v(v)+1)); split returns the smaller component valuation.
    pub fn val_red(&self, x: &QuadElem) -> Result<i32> {
        let b = &self.base;
        let (vu, vv) = (b.val_red(&x.u).ok(), b.val_red(&x.v).ok());
        let out = match self.flavor {
            Flavor::Ramified => [vu.map(|k| 2 * k), vv.map(|k| 2 * k + 1)]
                .into_iter()
                .flatten()
                .min(),
            _ => [vu, vv].into_iter().flatten().min(),
        };
        out.ok_or_else(|| Error::NotAUnit("reduction is zero".into()))
    }

    /// All of t^lo·O_K / t^hi·O_K as canonical representatives.
    pub fn lattice_enumerate(&self, lo: i32, hi: i32) -> Result<Vec<QuadElem>> {
        let eps = self.base.dual;
        let comp = self.base.enumerate(lo, hi, eps)?;
        let mut out = Vec::with_capacity(comp.len() * comp.len());
        for v in &comp {
            for u in &comp {
                out.push(QuadElem { u: *u, v: *v });
            }
        }
        Ok(out)
    }

    /// Norm-one elements of O_K / t^level.
    pub fn norm_one_elements(&self, level: i32) -> Result<Vec<QuadElem>> {
        let b = &self.base;
        let one = b.one();
        let mut out = Vec::new();
        for x in self.lattice_enumerate(0, level)? {
            if b.truncate(&self.norm(&x)?, level) == one {
                out.push(x);
            }
        }
        Ok(out)
    }

    /// Split shift (tⁿ, t⁻ⁿ).
    pub fn shift_element(&self, n: i32) -> Result<QuadElem> {
        if self.flavor != Flavor::Split {
            return Err(Error::Unsupported("shift elements exist in the split algebra only".into()));
        }
        Ok(QuadElem { u: self.base.t_pow(n)?, v: self.base.t_pow(-n)? })
    }

    /// Residue-level norm-one elements (λ^{q+1} = 1 for unramified), listed
    /// as powers of the first generator found.
    pub fn residue_norm_one_cyclic(&self) -> Result<Vec<QuadElem>> {
        let b = &self.base;
        let f = &b.field;
        let one = self.one();
        let mut elems = Vec::new();
        for v in f.elements() {
            for u in f.elements() {
                let x = QuadElem { u: b.constant(u), v: b.constant(v) };
                if b.truncate(&self.norm(&x)?, 1) == b.one() {
                    elems.push(x);
                }
            }
        }
        let n = elems.len();
        for g in &elems {
            let mut pows = vec![one];
            let mut cur = *g;
            while cur != one {
                pows.push(cur);
                cur = self.truncate(&self.mul(&cur, g)?, 1);
            }
            if pows.len() == n {
                return Ok(pows);
            }
        }
        Err(Error::InvalidParameter("residue norm-one group is not cyclic".into()))
    }

    pub fn random<R: Rng>(&self, rng: &mut R, lo: i32, hi: i32) -> QuadElem {
        let eps = self.base.dual;
        QuadElem { u: self.base.random(rng, lo, hi, eps), v: self.base.random(rng, lo, hi, eps) }
    }

    /// Random element of O_K^* (unit reduction).
    pub fn random_unit<R: Rng>(&self, rng: &mut R, hi: i32) -> QuadElem {
        loop {
            let x = self.random(rng, 0, hi);
            let n = self.norm(&x).expect("integral product stays in window");
            if self.base.val_red(&n) == Ok(0) {
                return x;
            }
        }
    }

    /// Random norm-one element x·ι(x)⁻¹, x a random unit.
    pub fn random_norm_one<R: Rng>(&self, rng: &mut R, hi: i32) -> Result<QuadElem> {
        let x = self.random_unit(rng, hi);
        let y = self.mul(&x, &self.inv(&self.iota(&x))?)?;
        Ok(self.truncate(&y, self.base.hi))
    }

    pub fn format(&self, x: &QuadElem) -> String {
        match self.flavor {
            Flavor::Split => format!("({}, {})", self.base.format(&x.u), self.base.format(&x.v)),
            _ => format!("{} + ({})w", self.base.format(&x.u), self.base.format(&x.v)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Field;

    fn qring(flavor: Flavor, dual: bool) -> QuadRing {
        let base = LocalRing::new(Field::new(3, 1).unwrap(), -4, 4, dual).unwrap();
        QuadRing::new(base, flavor).unwrap()
    }

    #[test]
    fn split_norm_and_iota() {
        let k = qring(Flavor::Split, false);
        let b = &k.base;
        let x = QuadElem { u: b.t_pow(1).unwrap(), v: b.constant(2) };
        assert_eq!(k.iota(&x), QuadElem { u: x.v, v: x.u });
        assert_eq!(k.norm(&x).unwrap(), b.scale(2, &b.t_pow(1).unwrap()));
    }

    #[test]
    fn unramified_norm_is_sum_of_squares() {
        let k = qring(Flavor::Unramified, false);
        assert_eq!(k.d, k.base.constant(2));
        let b = &k.base;
        for u in 0..3 {
            for v in 0..3 {
                let x = QuadElem { u: b.constant(u), v: b.constant(v) };
                let f = &b.field;
                let expect = f.add(f.mul(u, u), f.mul(v, v));
                assert_eq!(k.norm(&x).unwrap(), b.constant(expect));
            }
        }
    }

    #[test]
    fn lattice_counts() {
        assert_eq!(qring(Flavor::Unramified, false).lattice_enumerate(0, 1).unwrap().len(), 9);
        assert_eq!(qring(Flavor::Split, false).lattice_enumerate(0, 2).unwrap().len(), 81);
        assert_eq!(qring(Flavor::Unramified, true).lattice_enumerate(0, 1).unwrap().len(), 81);
    }

    #[test]
    fn residue_norm_one_count() {
        let k = qring(Flavor::Unramified, false);
        let mu = k.residue_norm_one_cyclic().unwrap();
        assert_eq!(mu.len(), 4);
        assert_eq!(k.norm_one_elements(1).unwrap().len(), 4);
    }

    #[test]
    fn eps_trace_zero_has_norm_one() {
        let k = qring(Flavor::Unramified, true);
        let b = &k.base;
        let c = QuadElem { u: b.zero(), v: b.eps_monomial(1, -2).unwrap() };
        assert_eq!(k.trace(&c), b.zero());
        assert_eq!(k.norm(&k.add(&k.one(), &c)).unwrap(), b.one());
    }

    #[test]
    fn shift_has_norm_one() {
        let k = qring(Flavor::Split, true);
        let s = k.shift_element(1).unwrap();
        assert_eq!(k.norm(&s).unwrap(), k.base.one());
        assert!(qring(Flavor::Ramified, true).shift_element(1).is_err());
    }

    #[test]
    fn iota_fixed_points_are_base() {
        for flavor in [Flavor::Unramified, Flavor::Ramified, Flavor::Split] {
            let k = qring(flavor, false);
            let fixed: Vec<_> = k
                .lattice_enumerate(0, 1)
                .unwrap()
                .into_iter()
                .filter(|x| k.iota(x) == *x)
                .collect();
            assert_eq!(fixed.len(), 3);
            for x in fixed {
                assert_eq!(k.from_base(&x.u), x);
            }
        }
    }

    #[test]
    fn ramified_antiinvariants_are_in_maximal_ideal() {
        let k = qring(Flavor::Ramified, false);
        for x in k.lattice_enumerate(0, 2).unwrap() {
            if k.is_antiinvariant(&x) && !k.is_zero(&x) {
                assert!(k.val_red(&x).unwrap() >= 1);
            }
        }
    }

    #[test]
    fn pairing_nondegenerate_at_residue_level() {
        // NK × K̄ → NE: ⟨εn, y⟩ nonzero for some y whenever n ≠ 0
        let k = qring(Flavor::Unramified, true);
        let res = qring(Flavor::Unramified, false).lattice_enumerate(0, 1).unwrap();
        for n in &res {
            if k.is_zero(n) {
                continue;
            }
            let en = k.times_eps(n);
            assert!(res.iter().any(|y| !k.base.is_zero(&k.pairing(&en, y).unwrap())));
        }
    }
}
