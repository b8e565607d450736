//! The projective line over F_q and its constant-field double cover: places,
//! divisors, rational functions, Riemann–Roch spaces, residues of h·dx and
//! the quadratic character of the cover.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{Embedding, Fe, Field};
use crate::poly::{Poly, PolyRing};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Place {
    Inf,
    /// Monic irreducible polynomial.
    Fin(Poly),
}

impl Place {
    pub fn degree(&self) -> u32 {
        match self {
            Place::Inf => 1,
            Place::Fin(p) => p.deg() as u32,
        }
    }
}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Place::Inf => write!(f, "inf"),
            Place::Fin(p) => write!(f, "{}", show_poly(p)),
        }
    }
}

impl Serialize for Place {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// Coefficient indices, highest degree first, e.g. `x^2+1` over F₃ prints
/// as `[1,0,1]`.
pub fn show_poly(p: &Poly) -> String {
    if p.0.is_empty() {
        return "[0]".into();
    }
    let c: Vec<String> = p.0.iter().rev().map(|c| c.to_string()).collect();
    format!("[{}]", c.join(","))
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Divisor(pub BTreeMap<Place, i64>);

impl Divisor {
    pub fn zero() -> Divisor {
        Divisor::default()
    }

    pub fn point(p: Place, n: i64) -> Divisor {
        let mut d = Divisor::zero();
        d.add_at(p, n);
        d
    }

    pub fn add_at(&mut self, p: Place, n: i64) {
        let e = self.0.entry(p.clone()).or_insert(0);
        *e += n;
        if *e == 0 {
            self.0.remove(&p);
        }
    }

    pub fn add(&self, other: &Divisor) -> Divisor {
        let mut d = self.clone();
        for (p, &n) in &other.0 {
            d.add_at(p.clone(), n);
        }
        d
    }

    pub fn scale(&self, k: i64) -> Divisor {
        let mut d = Divisor::zero();
        for (p, &n) in &self.0 {
            d.add_at(p.clone(), k * n);
        }
        d
    }

    pub fn degree(&self) -> i64 {
        self.0.iter().map(|(p, &n)| p.degree() as i64 * n).sum()
    }

    pub fn mult(&self, p: &Place) -> i64 {
        self.0.get(p).copied().unwrap_or(0)
    }
}

impl fmt::Display for Divisor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.0.iter().map(|(p, n)| format!("{n}*{p}")).collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// A rational function num/den with den monic and gcd(num, den) = 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Rat {
    pub num: Poly,
    pub den: Poly,
}

impl fmt::Display for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.deg() == 0 {
            write!(f, "{}", show_poly(&self.num))
        } else {
            write!(f, "{}/{}", show_poly(&self.num), show_poly(&self.den))
        }
    }
}

impl Rat {
    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }
}

/// P¹ over a finite field.
#[derive(Clone, Debug)]
pub struct Curve {
    pub ring: PolyRing,
}

impl Curve {
    pub fn new(field: Arc<Field>) -> Curve {
        Curve { ring: PolyRing::new(field) }
    }

    pub fn field(&self) -> &Arc<Field> {
        &self.ring.field
    }

    pub fn q(&self) -> u32 {
        self.ring.q()
    }

    pub fn place(&self, p: Poly) -> Result<Place> {
        if !self.ring.is_monic(&p) || !self.ring.is_irreducible(&p) {
            return Err(Error::InvalidParameter(format!("{} is not monic irreducible", show_poly(&p))));
        }
        Ok(Place::Fin(p))
    }

    /// The place x = a.
    pub fn point(&self, a: Fe) -> Place {
        Place::Fin(self.ring.linear(a))
    }

    pub fn places_of_degree(&self, d: usize) -> Vec<Place> {
        let mut out: Vec<Place> = self.ring.monic_irreducibles(d).into_iter().map(Place::Fin).collect();
        if d == 1 {
            out.push(Place::Inf);
        }
        out
    }

    pub fn rat(&self, num: Poly, den: Poly) -> Result<Rat> {
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let r = &self.ring;
        let g = r.gcd(&num, &den);
        let (num, den) = if g.deg() > 0 { (r.div_exact(&num, &g)?, r.div_exact(&den, &g)?) } else { (num, den) };
        let c = self.field().inv(den.lead())?;
        if num.is_zero() {
            return Ok(self.zero());
        }
        Ok(Rat { num: r.scale(c, &num), den: r.scale(c, &den) })
    }

    pub fn zero(&self) -> Rat {
        Rat { num: Poly::default(), den: self.ring.one() }
    }

    pub fn from_poly(&self, p: Poly) -> Rat {
        Rat { num: p, den: self.ring.one() }
    }

    pub fn constant(&self, c: Fe) -> Rat {
        self.from_poly(self.ring.constant(c))
    }

    pub fn add(&self, a: &Rat, b: &Rat) -> Result<Rat> {
        let r = &self.ring;
        self.rat(r.add(&r.mul(&a.num, &b.den), &r.mul(&b.num, &a.den)), r.mul(&a.den, &b.den))
    }

    pub fn sub(&self, a: &Rat, b: &Rat) -> Result<Rat> {
        self.add(a, &self.neg(b))
    }

    pub fn neg(&self, a: &Rat) -> Rat {
        Rat { num: self.ring.neg(&a.num), den: a.den.clone() }
    }

    pub fn mul(&self, a: &Rat, b: &Rat) -> Result<Rat> {
        let r = &self.ring;
        self.rat(r.mul(&a.num, &b.num), r.mul(&a.den, &b.den))
    }

    pub fn inv(&self, a: &Rat) -> Result<Rat> {
        if a.is_zero() {
            return Err(Error::DivisionByZero);
        }
        self.rat(a.den.clone(), a.num.clone())
    }

    pub fn div(&self, a: &Rat, b: &Rat) -> Result<Rat> {
        self.mul(a, &self.inv(b)?)
    }

    pub fn scale(&self, c: Fe, a: &Rat) -> Rat {
        if c == 0 {
            return self.zero();
        }
        Rat { num: self.ring.scale(c, &a.num), den: a.den.clone() }
    }

    /// The element as a constant, if it is one.
    pub fn as_constant(&self, a: &Rat) -> Option<Fe> {
        (a.den.deg() == 0 && a.num.deg() <= 0).then(|| a.num.coeff(0))
    }

    /// Order of vanishing at a place; None for the zero function.
    pub fn valuation(&self, a: &Rat, p: &Place) -> Result<Option<i64>> {
        if a.is_zero() {
            return Ok(None);
        }
        Ok(Some(match p {
            Place::Inf => a.den.deg() - a.num.deg(),
            Place::Fin(pp) => {
                let (vn, _) = self.ring.multiplicity(&a.num, pp)?;
                let (vd, _) = self.ring.multiplicity(&a.den, pp)?;
                vn as i64 - vd as i64
            }
        }))
    }

    /// Basis of {f : div f + D ≥ 0}: M·x^i/B with B the positive finite part
    /// of D and M the negative one.
    pub fn riemann_roch_basis(&self, d: &Divisor) -> Result<Vec<Rat>> {
        let r = &self.ring;
        let mut b = r.one();
        let mut m = r.one();
        for (p, &n) in &d.0 {
            if let Place::Fin(pp) = p {
                if !r.is_irreducible(pp) || !r.is_monic(pp) {
                    return Err(Error::InvalidParameter("divisor place is not monic irreducible".into()));
                }
                if n > 0 {
                    b = r.mul(&b, &r.pow(pp, n as u32));
                } else {
                    m = r.mul(&m, &r.pow(pp, (-n) as u32));
                }
            }
        }
        let top = d.mult(&Place::Inf) + b.deg() - m.deg();
        (0..=top).rev().map(|i| self.rat(r.mul(&m, &r.monomial(1, i as usize)), b.clone())).collect()
    }

    /// Sum of the residues of (num/den)·dx at the roots of a monic P, when
    /// den = P^j·Q with Q prime to P: the x^{deg P − 1} coefficient of the
    /// top P-adic digit of num·Q⁻¹ mod P^j.
    pub fn residue_at_poly(&self, h: &Rat, p: &Poly) -> Result<Fe> {
        let r = &self.ring;
        if h.is_zero() {
            return Ok(0);
        }
        let (j, rest) = r.multiplicity(&h.den, p)?;
        if j == 0 {
            return Ok(0);
        }
        if r.gcd(&rest, p).deg() > 0 {
            return Err(Error::InvalidParameter("denominator is not a clean power at this place".into()));
        }
        let pj = r.pow(p, j);
        let c = r.mul_mod(&h.num, &r.inv_mod(&rest, &pj)?, &pj)?;
        let top = r.divrem(&c, &r.pow(p, j - 1))?.0;
        Ok(top.coeff(p.deg() as usize - 1))
    }

    /// Res_p(h·dx), traced down to the constants.
    pub fn residue(&self, h: &Rat, p: &Place) -> Result<Fe> {
        match p {
            Place::Fin(pp) => self.residue_at_poly(h, pp),
            Place::Inf => {
                if h.is_zero() {
                    return Ok(0);
                }
                let (_, rem) = self.ring.divrem(&h.num, &h.den)?;
                let dd = h.den.deg();
                if dd < 1 {
                    return Ok(0);
                }
                Ok(self.field().neg(rem.coeff(dd as usize - 1)))
            }
        }
    }
}

/// An adele class representative: finitely many local tails e_p, each given
/// by a rational function read at its place.
#[derive(Clone, Debug, Default)]
pub struct Adele(pub Vec<(Place, Rat)>);

impl Adele {
    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|(_, r)| r.is_zero())
    }
}

impl Curve {
    /// ⟨s, e⟩ = Σ_p Res_p(e_p·s) for s = h·dx.
    pub fn pairing(&self, e: &Adele, h: &Rat) -> Result<Fe> {
        let f = self.field();
        let mut acc = 0;
        for (p, ep) in &e.0 {
            acc = f.add(acc, self.residue(&self.mul(ep, h)?, p)?);
        }
        Ok(acc)
    }

    /// The tail x^{-j} at the place x = a written in x − a, or x^{j} at ∞.
    pub fn tail(&self, p: &Place, j: u32, numerator: Poly) -> Result<Rat> {
        match p {
            Place::Inf => Ok(self.from_poly(self.ring.mul(&numerator, &self.ring.monomial(1, j as usize)))),
            Place::Fin(pp) => self.rat(numerator, self.ring.pow(pp, j)),
        }
    }
}

/// P¹ over F_{q²} as a double cover of P¹ over F_q.
#[derive(Clone, Debug)]
pub struct Cover {
    pub base: Curve,
    pub top: Curve,
    pub emb: Embedding,
}

impl Cover {
    pub fn new(q: u32) -> Result<Cover> {
        let small = Field::of_order(q)?;
        let big = Field::of_order(q * q)?;
        let emb = Embedding::new(small.clone(), big.clone())?;
        Ok(Cover { base: Curve::new(small), top: Curve::new(big), emb })
    }

    pub fn q(&self) -> u32 {
        self.base.q()
    }

    pub fn lift_poly(&self, p: &Poly) -> Poly {
        self.top.ring.map_coeffs(p, |c| self.emb.map(c))
    }

    pub fn lift(&self, a: &Rat) -> Rat {
        Rat { num: self.lift_poly(&a.num), den: self.lift_poly(&a.den) }
    }

    pub fn descend_poly(&self, p: &Poly) -> Result<Poly> {
        let c = p
            .0
            .iter()
            .map(|&c| self.emb.preimage(c).ok_or_else(|| Error::InvalidParameter("coefficient outside F_q".into())))
            .collect::<Result<Vec<_>>>()?;
        Ok(self.base.ring.from_coeffs(c))
    }

    pub fn descend(&self, a: &Rat) -> Result<Rat> {
        self.base.rat(self.descend_poly(&a.num)?, self.descend_poly(&a.den)?)
    }

    /// c ↦ c^q on constants.
    pub fn sigma_const(&self, c: Fe) -> Fe {
        self.top.field().pow(c, self.q() as u64)
    }

    pub fn sigma_poly(&self, p: &Poly) -> Poly {
        self.top.ring.map_coeffs(p, |c| self.sigma_const(c))
    }

    pub fn sigma(&self, a: &Rat) -> Rat {
        Rat { num: self.sigma_poly(&a.num), den: self.sigma_poly(&a.den) }
    }

    /// Nm(a) = a·σ(a), as a function on the base.
    pub fn norm(&self, a: &Rat) -> Result<Rat> {
        self.descend(&self.top.mul(a, &self.sigma(a))?)
    }

    pub fn norm_const(&self, c: Fe) -> Fe {
        self.emb.preimage(self.top.field().mul(c, self.sigma_const(c))).expect("norms lie in F_q")
    }

    /// The places of the cover over a place of the base.
    pub fn places_above(&self, p: &Place) -> Result<Vec<Place>> {
        match p {
            Place::Inf => Ok(vec![Place::Inf]),
            Place::Fin(pp) => {
                let lifted = self.lift_poly(pp);
                let d = pp.deg() as usize;
                if d % 2 == 1 {
                    Ok(vec![Place::Fin(lifted)])
                } else {
                    Ok(self.top.ring.equal_degree_factors(&lifted, d / 2)?.into_iter().map(Place::Fin).collect())
                }
            }
        }
    }

    pub fn is_split(&self, p: &Place) -> Result<bool> {
        Ok(self.places_above(p)?.len() == 2)
    }

    /// ϑ_p: +1 at split places, −1 at inert ones.
    pub fn theta_p(&self, p: &Place) -> Result<i32> {
        Ok(if self.is_split(p)? { 1 } else { -1 })
    }

    /// Π_p ϑ_p^{mult}.
    pub fn artin_symbol(&self, d: &Divisor) -> Result<i32> {
        let mut s = 1;
        for (p, &n) in &d.0 {
            if n.rem_euclid(2) == 1 {
                s *= self.theta_p(p)?;
            }
        }
        Ok(s)
    }

    /// π*D, written with base places lifted (a split place stays a single
    /// product polynomial, which is how Riemann–Roch over the top reads it).
    pub fn pullback_poly_divisor(&self, d: &Divisor) -> Result<Divisor> {
        let mut out = Divisor::zero();
        for (p, &n) in &d.0 {
            for above in self.places_above(p)? {
                out.add_at(above, n);
            }
        }
        Ok(out)
    }

    /// Structure of the pairs (line bundle on the cover, trivialized norm).
    pub fn pic_group(&self) -> PicGroup {
        let base = self.base.field();
        let top = self.top.field();
        let square_classes: Vec<Fe> = vec![1, base.nonsquare()];
        let norm_lifts = square_classes
            .iter()
            .map(|&c| top.units().find(|&l| self.norm_const(l) == c).expect("norm is onto"))
            .collect();
        let norms: std::collections::BTreeSet<Fe> = top.units().map(|l| self.norm_const(l)).collect();
        let constant_classes = (base.q() as usize - 1) / norms.len();
        // Nm of a degree-one point of the cover has positive degree on the base
        let theta = top.units().find(|&c| self.emb.preimage(c).is_none()).expect("F_{q²} ≠ F_q");
        let pt = self.top.point(theta);
        let pushed: i64 = match &pt {
            Place::Fin(p) => {
                let n = self.top.ring.mul(p, &self.sigma_poly(p));
                self.descend_poly(&n).map(|n| n.deg()).unwrap_or(0)
            }
            Place::Inf => 1,
        };
        PicGroup {
            square_classes,
            norm_lifts,
            constant_classes,
            norm_kernel_trivial: pushed != 0,
            effective_order: constant_classes * if pushed != 0 { 1 } else { 0 },
        }
    }
}

/// k*/(k*)² representatives, with for each a constant λ of the cover with
/// Nm(λ) equal to it. Multiplication by λ identifies the translated pair with
/// the original one, so only `effective_order` classes are distinct.
#[derive(Clone, Debug, Serialize)]
pub struct PicGroup {
    pub square_classes: Vec<Fe>,
    pub norm_lifts: Vec<Fe>,
    /// |k* / Nm(constants of the cover)|.
    pub constant_classes: usize,
    pub norm_kernel_trivial: bool,
    pub effective_order: usize,
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c3() -> Curve {
        Curve::new(Field::of_order(3).unwrap())
    }

    #[test]
    fn rr_examples() {
        let c = c3();
        assert_eq!(c.riemann_roch_basis(&Divisor::zero()).unwrap(), vec![c.constant(1)]);
        let d = Divisor::point(c.point(0), 2);
        let b = c.riemann_roch_basis(&d).unwrap();
        let x = c.ring.x();
        let expect = vec![
            c.constant(1),
            c.rat(c.ring.one(), x.clone()).unwrap(),
            c.rat(c.ring.one(), c.ring.mul(&x, &x)).unwrap(),
        ];
        assert_eq!(b, expect);
        let cov = Cover::new(3).unwrap();
        let b = cov.top.riemann_roch_basis(&Divisor::zero()).unwrap();
        assert_eq!(b.len(), 1);
        assert_eq!(cov.top.q().pow(b.len() as u32), 9);
    }

    #[test]
    fn rr_dimension_and_membership() {
        let c = c3();
        let p2 = c.place(Poly(vec![1, 0, 1])).unwrap();
        for (a, b, n) in [(1, 0, 0), (0, 1, -1), (2, -1, 1), (-1, 1, 0), (-3, 0, 1), (0, 0, -1)] {
            let mut d = Divisor::point(Place::Inf, a);
            d.add_at(p2.clone(), b);
            d.add_at(c.point(1), n);
            let basis = c.riemann_roch_basis(&d).unwrap();
            let expect = if d.degree() >= 0 { d.degree() + 1 } else { 0 };
            assert_eq!(basis.len() as i64, expect, "{d}");
            for f in &basis {
                for (p, &m) in &d.0 {
                    assert!(c.valuation(f, p).unwrap().unwrap() + m >= 0);
                }
            }
        }
    }

    #[test]
    fn residue_examples() {
        let c = c3();
        let x = c.ring.x();
        let dx_over_x = c.rat(c.ring.one(), x.clone()).unwrap();
        assert_eq!(c.residue(&dx_over_x, &c.point(0)).unwrap(), 1);
        let xdx = c.from_poly(x);
        assert_eq!(c.residue(&xdx, &Place::Inf).unwrap(), 0);
        assert_eq!(c.residue(&dx_over_x, &Place::Inf).unwrap(), c.field().neg(1));
    }

    #[test]
    fn residue_theorem_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for q in [3u32, 5] {
            let c = Curve::new(Field::of_order(q).unwrap());
            let pool: Vec<Poly> = (1..=3).flat_map(|d| c.ring.monic_irreducibles(d)).collect();
            for _ in 0..50 {
                let mut den = c.ring.one();
                let mut places = vec![Place::Inf];
                for _ in 0..rng.gen_range(1..4) {
                    let p = pool[rng.gen_range(0..pool.len())].clone();
                    den = c.ring.mul(&den, &c.ring.pow(&p, rng.gen_range(1..4)));
                    if !places.contains(&Place::Fin(p.clone())) {
                        places.push(Place::Fin(p));
                    }
                }
                let num = c.ring.random(&mut rng, den.deg() as usize + 2);
                let h = c.rat(num, den).unwrap();
                let f = c.field();
                let total = places.iter().fold(0, |acc, p| f.add(acc, c.residue(&h, p).unwrap()));
                assert_eq!(total, 0, "{h:?}");
            }
        }
    }

    #[test]
    fn residue_theorem_on_the_cover() {
        let mut rng = ChaCha8Rng::seed_from_u64(78);
        let cov = Cover::new(3).unwrap();
        let t = &cov.top;
        let base_pool: Vec<Poly> = (1..=2).flat_map(|d| cov.base.ring.monic_irreducibles(d)).collect();
        for _ in 0..20 {
            let p = &base_pool[rng.gen_range(0..base_pool.len())];
            let den = t.ring.pow(&cov.lift_poly(p), rng.gen_range(1..3));
            let h = t.rat(t.ring.random(&mut rng, den.deg() as usize + 1), den).unwrap();
            // the lifted place as a whole, or its points one at a time
            let whole = t.residue_at_poly(&h, &cov.lift_poly(p)).unwrap();
            let f = t.field();
            let parts = cov
                .places_above(&Place::Fin(p.clone()))
                .unwrap()
                .iter()
                .fold(0, |acc, pl| f.add(acc, t.residue(&h, pl).unwrap()));
            assert_eq!(whole, parts);
            assert_eq!(f.add(whole, t.residue(&h, &Place::Inf).unwrap()), 0);
        }
    }

    #[test]
    fn artin_symbol_on_places() {
        let cov = Cover::new(3).unwrap();
        for d in 1..=4usize {
            for p in cov.base.places_of_degree(d) {
                let expect = if d % 2 == 0 { 1 } else { -1 };
                assert_eq!(cov.artin_symbol(&Divisor::point(p.clone(), 1)).unwrap(), expect, "{p}");
                assert_eq!(cov.places_above(&p).unwrap().len(), if d % 2 == 0 { 2 } else { 1 });
            }
        }
    }

    #[test]
    fn pic_group_collapses() {
        let cov = Cover::new(3).unwrap();
        let g = cov.pic_group();
        assert_eq!(g.square_classes.len(), 2);
        for (c, l) in g.square_classes.iter().zip(&g.norm_lifts) {
            assert_eq!(cov.norm_const(*l), *c);
        }
        assert_eq!(g.constant_classes, 1);
        assert!(g.norm_kernel_trivial);
        assert_eq!(g.effective_order, 1);
    }
}
