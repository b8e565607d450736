//! Regular elliptic adjoint orbits in 𝔤 ⊗ ω over F_q(x) and the spectral
//! data (double cover, line bundle, norm trivialization, antiinvariant
//! differential) they correspond to, plus the Higgs field on π_*𝓛.
//!
//! Differentials are written h·dx and stored by h. The double cover is
//! F_q(x)(w) with w² = disc; an antiinvariant differential is c·w·dx.

use serde::Serialize;

use crate::curve::{Curve, Rat};
use crate::error::{Error, Result};
use crate::poly::Poly;

/// A 2×2 matrix of differentials [[a, b], [c, d]].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LieElem {
    pub a: Rat,
    pub b: Rat,
    pub c: Rat,
    pub d: Rat,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpectralData {
    /// w² = disc defines the cover.
    pub disc: Rat,
    /// The norm trivialization α₀ on 𝓛₀ = 𝒪, as a differential.
    pub alpha0: Rat,
    /// c₀ = c0_coeff·w·dx.
    pub c0_coeff: Rat,
}

/// An element s₀ = a + b·w of F_q(x)(w).
#[derive(Clone, Debug)]
pub struct CoverElem {
    pub a: Rat,
    pub b: Rat,
}

pub struct Dictionary {
    pub curve: Curve,
}

impl Dictionary {
    pub fn new(curve: Curve) -> Dictionary {
        Dictionary { curve }
    }

    pub fn is_square(&self, f: &Rat) -> bool {
        let r = &self.curve.ring;
        f.is_zero() || r.sqrt(&r.mul(&f.num, &f.den)).is_some()
    }

    /// An element of F_q is a square in F_q(x) iff it is one in F_q, so a
    /// nonsquare constant discriminant gives the constant-field cover.
    pub fn is_constant_field_cover(&self, data: &SpectralData) -> bool {
        self.curve.as_constant(&data.disc).is_some_and(|c| !self.curve.field().is_square(c))
    }

    pub fn norm(&self, disc: &Rat, s: &CoverElem) -> Result<Rat> {
        let c = &self.curve;
        c.sub(&c.mul(&s.a, &s.a)?, &c.mul(&c.mul(disc, &s.b)?, &s.b)?)
    }

    pub fn det(&self, m: &LieElem) -> Result<Rat> {
        let c = &self.curve;
        c.sub(&c.mul(&m.a, &m.d)?, &c.mul(&m.b, &m.c)?)
    }

    pub fn trace(&self, m: &LieElem) -> Result<Rat> {
        self.curve.add(&m.a, &m.d)
    }

    /// [[0, −α₀Nm(s₀)], [−c₀²/(4α₀Nm(s₀)), 0]].
    pub fn orbit_from_data(&self, data: &SpectralData, s0: &CoverElem) -> Result<LieElem> {
        let c = &self.curve;
        let f = c.field();
        if data.c0_coeff.is_zero() {
            return Err(Error::InvalidParameter("c0 must be nonzero".into()));
        }
        if self.is_square(&data.disc) {
            return Err(Error::NotElliptic("the cover is split".into()));
        }
        let an = c.mul(&data.alpha0, &self.norm(&data.disc, s0)?)?;
        let c0_sq = c.mul(&c.mul(&data.c0_coeff, &data.c0_coeff)?, &data.disc)?;
        let four = f.from_int(4);
        let lower = c.neg(&c.div(&c0_sq, &c.scale(four, &an))?);
        Ok(LieElem { a: c.zero(), b: c.neg(&an), c: lower, d: c.zero() })
    }

    /// Inverse construction from [[0, ω₁], [ω₂, 0]]: cover w² = ω₂/ω₁,
    /// α₀ = −ω₁, c₀ = 2w·ω₁.
    pub fn data_from_orbit(&self, w1: &Rat, w2: &Rat) -> Result<SpectralData> {
        let c = &self.curve;
        if w1.is_zero() || w2.is_zero() {
            return Err(Error::NotElliptic("off-diagonal entries must be nonzero".into()));
        }
        let disc = c.div(w2, w1)?;
        if self.is_square(&disc) {
            return Err(Error::NotElliptic("ω₂/ω₁ is a square".into()));
        }
        Ok(SpectralData { disc, alpha0: c.neg(w1), c0_coeff: c.scale(c.field().from_int(2), w1) })
    }

    /// φ₀ = multiplication by c₀ on π_*𝒪 in the basis {1, w}, for a cover
    /// w² = D with D a squarefree polynomial and c₀ = c·w·dx with c a
    /// nonzero constant: then c₀ vanishes on the affine part exactly twice
    /// at each ramification point.
    pub fn higgs_from_cover(&self, disc: &Poly, c0_coeff: &Rat) -> Result<(LieElem, Rat)> {
        let c = &self.curve;
        let r = &c.ring;
        if disc.is_zero() || r.gcd(disc, &r.deriv(disc)).deg() > 0 {
            return Err(Error::InvalidParameter("discriminant must be squarefree".into()));
        }
        if r.sqrt(&r.scale(c.field().inv(disc.lead())?, disc)).is_some() && c.field().is_square(disc.lead()) {
            return Err(Error::InvalidParameter("the cover is split".into()));
        }
        let k = c
            .as_constant(c0_coeff)
            .filter(|&k| k != 0)
            .ok_or_else(|| Error::InvalidParameter("c0 has zeros away from the ramification".into()))?;
        let d = c.from_poly(disc.clone());
        let phi = LieElem { a: c.zero(), b: c.scale(k, &d), c: c.constant(k), d: c.zero() };
        let delta = c.mul(&c.mul(&c.constant(k), &c.constant(k))?, &d)?;
        Ok((phi, delta))
    }

    /// Characteristic polynomial data (trace, det).
    pub fn char_poly(&self, m: &LieElem) -> Result<(Rat, Rat)> {
        Ok((self.trace(m)?, self.det(m)?))
    }

    /// Checks a round trip on [[0, ω₁], [ω₂, 0]] with a nontrivial s₀; the
    /// image must have the same determinant and generate the same quadratic
    /// extension, and the s₀ = 1 image must be the matrix itself.
    pub fn round_trip(&self, w1: &Rat, w2: &Rat, s0: &CoverElem) -> Result<RoundTrip> {
        let c = &self.curve;
        let data = self.data_from_orbit(w1, w2)?;
        let one = CoverElem { a: c.constant(1), b: c.zero() };
        let exact = self.orbit_from_data(&data, &one)?;
        let start = LieElem { a: c.zero(), b: w1.clone(), c: w2.clone(), d: c.zero() };
        let moved = self.orbit_from_data(&data, s0)?;
        let back = self.data_from_orbit(&moved.b, &moved.c)?;
        let same_ext = self.is_square(&c.div(&back.disc, &data.disc)?);
        let neg_det = c.neg(&self.det(&moved)?);
        let c0_sq_quarter = c.div(
            &c.mul(&c.mul(&data.c0_coeff, &data.c0_coeff)?, &data.disc)?,
            &c.constant(c.field().from_int(4)),
        )?;
        Ok(RoundTrip {
            exact: exact == start,
            same_det: self.det(&moved)? == self.det(&start)?,
            same_extension: same_ext,
            elliptic: !self.is_square(&neg_det) && neg_det == c0_sq_quarter,
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RoundTrip {
    pub exact: bool,
    pub same_det: bool,
    pub same_extension: bool,
    pub elliptic: bool,
}

impl RoundTrip {
    pub fn ok(&self) -> bool {
        self.exact && self.same_det && self.same_extension && self.elliptic
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Field;

    fn dict() -> Dictionary {
        Dictionary::new(Curve::new(Field::of_order(3).unwrap()))
    }

    fn poly(c: &[u16]) -> Poly {
        Poly(c.to_vec())
    }

    #[test]
    fn constant_field_example() {
        let d = dict();
        let c = &d.curve;
        let ns = c.field().nonsquare();
        let data = d.data_from_orbit(&c.constant(1), &c.constant(ns)).unwrap();
        assert!(d.is_constant_field_cover(&data));
        assert_eq!(data.c0_coeff, c.constant(2));
        let eta = d.orbit_from_data(&data, &CoverElem { a: c.constant(1), b: c.zero() }).unwrap();
        assert_eq!(c.neg(&d.det(&eta).unwrap()), c.constant(ns));
    }

    #[test]
    fn five_round_trips_and_rejection() {
        let d = dict();
        let c = &d.curve;
        let ns = c.field().nonsquare();
        let x = c.from_poly(poly(&[0, 1]));
        let inputs = vec![
            (c.constant(1), c.constant(ns)),
            (x.clone(), c.scale(ns, &x)),
            (x.clone(), c.from_poly(poly(&[0, 1, 0, 1]))),
            (c.from_poly(poly(&[1, 1])), c.scale(ns, &c.from_poly(poly(&[1, 0, 1])))),
            (x.clone(), c.constant(1)),
        ];
        let s0 = CoverElem { a: x.clone(), b: c.constant(1) };
        for (w1, w2) in &inputs {
            let rt = d.round_trip(w1, w2, &s0).unwrap();
            assert!(rt.ok(), "{rt:?}");
        }
        let x2 = c.mul(&x, &x).unwrap();
        assert!(matches!(d.data_from_orbit(&x, &c.mul(&x2, &x).unwrap()), Err(Error::NotElliptic(_))));
        assert!(matches!(d.data_from_orbit(&c.constant(1), &x2), Err(Error::NotElliptic(_))));
    }

    #[test]
    fn higgs_fields() {
        let d = dict();
        let c = &d.curve;
        let ns = c.field().nonsquare();
        for (disc, k) in [(poly(&[ns]), 1u16), (poly(&[ns]), 2), (poly(&[0, 1]), 1), (poly(&[1, 0, 1]), 2)] {
            let (phi, delta) = d.higgs_from_cover(&disc, &c.constant(k)).unwrap();
            assert!(d.trace(&phi).unwrap().is_zero());
            assert_eq!(c.neg(&d.det(&phi).unwrap()), delta);
            let kk = c.field().mul(k, k);
            assert_eq!(delta, c.scale(kk, &c.from_poly(disc.clone())));
        }
        assert!(d.higgs_from_cover(&poly(&[ns]), &c.from_poly(poly(&[0, 1]))).is_err());
        assert!(d.higgs_from_cover(&poly(&[0, 0, 1]), &c.constant(1)).is_err());
    }

    #[test]
    fn higgs_matches_orbit() {
        // φ₀ and 2η share their characteristic polynomial
        let d = dict();
        let c = &d.curve;
        let ns = c.field().nonsquare();
        let data = d.data_from_orbit(&c.constant(1), &c.constant(ns)).unwrap();
        let eta = d.orbit_from_data(&data, &CoverElem { a: c.constant(1), b: c.zero() }).unwrap();
        let (phi, _) = d.higgs_from_cover(&poly(&[ns]), &data.c0_coeff).unwrap();
        let two = c.field().from_int(2);
        let eta2 = LieElem {
            a: c.scale(two, &eta.a),
            b: c.scale(two, &eta.b),
            c: c.scale(two, &eta.c),
            d: c.scale(two, &eta.d),
        };
        assert_eq!(d.char_poly(&phi).unwrap(), d.char_poly(&eta2).unwrap());
    }
}
