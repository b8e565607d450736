//! Theta functions on SL₂-bundles over P¹/F_q attached to the constant-field
//! cover, their constant terms and global Hecke operators.
//!
//! A bundle is presented as an extension 0 → L⁻¹ → V → L → 0 with L = 𝒪(D)
//! and class e ∈ H¹(L⁻²) given by local tails. Functions in L are rational
//! functions f with div f + D ≥ 0, and ω is trivialized by dx, so that
//! ω ≅ 𝒪(−2∞). The theta characteristic is 𝒪(−∞), squared to ω by f ↦ f²dx.

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::cyclo::{rat, rat_pow, CycNumber};
use crate::curve::{Adele, Cover, Curve, Divisor, Place, Rat};
use crate::error::{Error, Result};
use crate::field::Fe;
use crate::poly::{rank, Poly};

/// Largest character sum enumerated directly.
pub const MAX_TERMS: u64 = 1 << 22;

/// Default splitting-type window for bundle tables.
pub const DEFAULT_NMAX: u32 = 4;

#[derive(Clone, Debug)]
pub struct Presentation {
    /// D with L = 𝒪(D).
    pub sub: Divisor,
    pub ext: Adele,
}

impl Presentation {
    /// V_n = 𝒪(n)⊕𝒪(−n) as the split extension with L = 𝒪(n∞).
    pub fn split(n: i64) -> Presentation {
        Presentation { sub: Divisor::point(Place::Inf, n), ext: Adele::default() }
    }
}

/// Values f(V_n) for n = 0..=nmax.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BunFn {
    pub values: Vec<CycNumber>,
}

impl BunFn {
    pub fn nmax(&self) -> u32 {
        self.values.len() as u32 - 1
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| v.is_zero())
    }

    pub fn get(&self, n: u32) -> Result<&CycNumber> {
        self.values
            .get(n as usize)
            .ok_or_else(|| Error::PrecisionExhausted(format!("splitting type {n} is outside the table")))
    }

    pub fn sub(&self, other: &BunFn) -> BunFn {
        BunFn { values: self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect() }
    }

    pub fn scale(&self, c: &CycNumber) -> BunFn {
        BunFn { values: self.values.iter().map(|v| v * c).collect() }
    }

    /// Restriction to n ≤ k.
    pub fn truncate(&self, k: u32) -> BunFn {
        BunFn { values: self.values[..=(k as usize).min(self.values.len() - 1)].to_vec() }
    }
}

/// The theta lift attached to (𝓛 = π*𝒪(−∞), norm trivialization scaled by
/// `norm_scale`).
#[derive(Clone, Debug)]
pub struct GlobalTheta {
    pub cover: Cover,
    pub char_div: Divisor,
    pub norm_scale: Fe,
}

impl GlobalTheta {
    pub fn new(q: u32) -> Result<GlobalTheta> {
        GlobalTheta::translate(q, 1)
    }

    /// Same bundle, norm trivialization multiplied by a constant c.
    pub fn translate(q: u32, c: Fe) -> Result<GlobalTheta> {
        if q % 2 == 0 {
            return Err(Error::InvalidParameter("q must be odd".into()));
        }
        if c == 0 {
            return Err(Error::InvalidParameter("norm scale must be a unit".into()));
        }
        Ok(GlobalTheta { cover: Cover::new(q)?, char_div: Divisor::point(Place::Inf, -1), norm_scale: c })
    }

    pub fn base(&self) -> &Curve {
        &self.cover.base
    }

    pub fn q(&self) -> u32 {
        self.cover.q()
    }

    /// The place x = a of the base.
    pub fn point_place(&self, a: Fe) -> Place {
        self.base().point(a)
    }

    fn p(&self) -> u32 {
        self.base().field().p()
    }

    fn lift_adele(&self, e: &Adele) -> Adele {
        Adele(
            e.0.iter()
                .map(|(p, r)| {
                    let p = match p {
                        Place::Inf => Place::Inf,
                        Place::Fin(pp) => Place::Fin(self.cover.lift_poly(pp)),
                    };
                    (p, self.cover.lift(r))
                })
                .collect(),
        )
    }

    /// Basis of H⁰(C̃, π*L ⊗ 𝓛) over F_{q²}.
    pub fn section_basis(&self, sub: &Divisor) -> Result<Vec<Rat>> {
        let d = self.cover.pullback_poly_divisor(&sub.add(&self.char_div))?;
        self.cover.top.riemann_roch_basis(&d)
    }

    fn sum_to_cyc(&self, counts: &[i128], scale: &BigRational) -> CycNumber {
        let p = self.p();
        CycNumber::from_zeta_counts(p, p, counts, scale)
    }

    /// ϑ(L)·q^{−deg L}·Σ_x ψ(⟨e, Nm x⟩) through the Gram matrix of the
    /// quadratic form on a Riemann–Roch basis.
    pub fn theta_bundle_value(&self, pres: &Presentation) -> Result<CycNumber> {
        let top = &self.cover.top;
        let tf = top.field();
        let basis = self.section_basis(&pres.sub)?;
        let n = basis.len();
        let terms = (tf.q() as u64).checked_pow(n as u32).unwrap_or(u64::MAX);
        if terms > MAX_TERMS {
            return Err(Error::PrecisionExhausted(format!("{terms} sections to sum over")));
        }
        let e = self.lift_adele(&pres.ext);
        let sig: Vec<Rat> = basis.iter().map(|b| self.cover.sigma(b)).collect();
        let mut gram = vec![vec![0 as Fe; n]; n];
        for i in 0..n {
            for j in 0..n {
                gram[i][j] = top.pairing(&e, &top.mul(&basis[i], &sig[j])?)?;
            }
        }
        let bf = self.base().field();
        let q2 = tf.q() as u64;
        let p = self.p() as usize;
        let counts = (0..terms)
            .into_par_iter()
            .map(|idx| -> Result<Vec<i128>> {
                let mut a = vec![0 as Fe; n];
                let mut k = idx;
                for slot in a.iter_mut() {
                    *slot = (k % q2) as Fe;
                    k /= q2;
                }
                let sa: Vec<Fe> = a.iter().map(|&c| self.cover.sigma_const(c)).collect();
                let mut val = 0;
                for i in 0..n {
                    if a[i] == 0 {
                        continue;
                    }
                    for j in 0..n {
                        val = tf.add(val, tf.mul(tf.mul(a[i], sa[j]), gram[i][j]));
                    }
                }
                let v = self
                    .cover
                    .emb
                    .preimage(val)
                    .ok_or_else(|| Error::InvalidParameter("quadratic form left F_q".into()))?;
                let mut c = vec![0i128; p];
                c[bf.trace(bf.mul(self.norm_scale, v)) as usize] += 1;
                Ok(c)
            })
            .try_reduce(|| vec![0i128; p], |a, b| Ok(a.iter().zip(&b).map(|(x, y)| x + y).collect()))?;
        let sign = self.cover.artin_symbol(&pres.sub)? as i64;
        let scale = rat_pow(self.q(), -pres.sub.degree()) * rat(sign, 1);
        Ok(self.sum_to_cyc(&counts, &scale))
    }

    /// The same value as a sum over all rational functions on the cover
    /// cut out by the local support conditions of the idele of L, with the
    /// phase Σ_p Res_p(e_p·Nm x) evaluated place by place and the factor
    /// Π_p ϑ_p(α_p)q_p^{v_p(α_p)} read off from α_p = P^{−n_P}.
    pub fn theta_adelic(&self, pres: &Presentation) -> Result<CycNumber> {
        let top = &self.cover.top;
        let tr = &top.ring;
        let base = self.base();
        let bf = base.field();
        let full = pres.sub.add(&self.char_div);
        let mut den = tr.one();
        for (pl, &n) in &full.0 {
            if let (Place::Fin(pp), true) = (pl, n > 0) {
                den = tr.mul(&den, &tr.pow(&self.cover.lift_poly(pp), n as u32));
            }
        }
        let bound = den.deg() + full.mult(&Place::Inf) + 1;
        let terms = (top.q() as u64).checked_pow((bound + 1).max(0) as u32).unwrap_or(u64::MAX);
        if terms > MAX_TERMS {
            return Err(Error::PrecisionExhausted(format!("candidate box of {terms} functions")));
        }
        let candidates = tr.all_up_to(bound);
        let p = self.p() as usize;
        let counts = candidates
            .par_iter()
            .map(|a| -> Result<Vec<i128>> {
                let mut c = vec![0i128; p];
                if !self.in_support(a, &den, &full)? {
                    return Ok(c);
                }
                let phase = if a.is_zero() {
                    0
                } else {
                    let x = top.rat(a.clone(), den.clone())?;
                    let nx = self.cover.norm(&x)?;
                    base.pairing(&pres.ext, &nx)?
                };
                c[bf.trace(bf.mul(self.norm_scale, phase)) as usize] += 1;
                Ok(c)
            })
            .try_reduce(|| vec![0i128; p], |a, b| Ok(a.iter().zip(&b).map(|(x, y)| x + y).collect()))?;
        let mut scale = rat(1, 1);
        for (pl, &n) in &pres.sub.0 {
            let theta = self.cover.theta_p(pl)? as i64;
            let sign = if n.rem_euclid(2) == 1 { theta } else { 1 };
            scale = scale * rat(sign, 1) * rat_pow(self.q(), -(pl.degree() as i64) * n);
        }
        Ok(self.sum_to_cyc(&counts, &scale))
    }

    fn in_support(&self, a: &Poly, den: &Poly, full: &Divisor) -> Result<bool> {
        if a.is_zero() {
            return Ok(true);
        }
        let tr = &self.cover.top.ring;
        for (pl, &n) in &full.0 {
            let ok = match pl {
                Place::Inf => a.deg() - den.deg() <= n,
                Place::Fin(pp) => {
                    let lp = self.cover.lift_poly(pp);
                    let (va, _) = tr.multiplicity(a, &lp)?;
                    let (vd, _) = tr.multiplicity(den, &lp)?;
                    va as i64 - vd as i64 >= -n
                }
            };
            if !ok {
                return Ok(false);
            }
        }
        // no poles away from the divisor: den only involves its places
        if !full.0.contains_key(&Place::Inf) && a.deg() > den.deg() {
            return Ok(false);
        }
        Ok(true)
    }

    /// n with V ≅ 𝒪(n)⊕𝒪(−n): the largest n ≥ 0 with h⁰(V(−n∞)) > 0, where
    /// h⁰(V(−n∞)) = h⁰(L⁻¹(−n∞)) + h⁰(L(−n∞)) − rank of (s, u) ↦ ⟨e, su⟩ on
    /// H⁰(L(−n∞)) × H⁰(L(n∞)⊗ω).
    pub fn splitting_type(&self, pres: &Presentation) -> Result<u32> {
        let base = self.base();
        let m = pres.sub.degree().unsigned_abs() as i64;
        for n in (0..=m).rev() {
            let shift = Divisor::point(Place::Inf, -n);
            let low = base.riemann_roch_basis(&pres.sub.scale(-1).add(&shift))?.len();
            let s_basis = base.riemann_roch_basis(&pres.sub.add(&shift))?;
            let u_basis = base.riemann_roch_basis(&pres.sub.add(&Divisor::point(Place::Inf, n - 2)))?;
            let mut mat = Vec::with_capacity(s_basis.len());
            for s in &s_basis {
                let row = u_basis
                    .iter()
                    .map(|u| base.pairing(&pres.ext, &base.mul(s, u)?))
                    .collect::<Result<Vec<Fe>>>()?;
                mat.push(row);
            }
            let rk = if u_basis.is_empty() { 0 } else { rank(base.field(), &mat) };
            if low + s_basis.len() > rk {
                return Ok(n as u32);
            }
        }
        Err(Error::InvalidParameter("no section found at n = 0".into()))
    }

    /// f(V_n) for n ≤ nmax, from the split presentations.
    pub fn table(&self, nmax: u32) -> Result<BunFn> {
        let values = (0..=nmax as i64).map(|n| self.theta_bundle_value(&Presentation::split(n))).collect::<Result<_>>()?;
        Ok(BunFn { values })
    }

    /// Every class e = A/x^{2m−1}, deg A ≤ 2m − 2, in H¹(𝒪(−2m∞)).
    pub fn extension_classes(&self, m: u32) -> Vec<Adele> {
        let base = self.base();
        if m == 0 {
            return vec![Adele::default()];
        }
        let k = 2 * m - 1;
        base.ring
            .all_up_to(k as i64 - 1)
            .into_iter()
            .map(|a| Adele(vec![(base.point(0), base.rat(a, base.ring.monomial(1, k as usize)).expect("nonzero"))]))
            .collect()
    }

    /// Unipotent average along L = 𝒪(m∞): |H¹|⁻¹ Σ_e f(V_e).
    pub fn constant_term(&self, f: &BunFn, m: u32) -> Result<CycNumber> {
        let classes = self.extension_classes(m);
        let total = classes.len() as i64;
        let types = classes
            .par_iter()
            .map(|e| self.splitting_type(&Presentation { sub: Divisor::point(Place::Inf, m as i64), ext: e.clone() }))
            .collect::<Result<Vec<u32>>>()?;
        let mut acc = CycNumber::zero(self.p());
        for t in types {
            acc = &acc + f.get(t)?;
        }
        Ok(acc.scale(&rat(1, total)))
    }
}

/// Lattice condition at a finite place P defining a modification
/// V' = k·diag(P, P⁻¹)·𝒪²: sections (A₁/P, A₂/P) with
/// A₁ − u·A₂ ≡ 0 or y·A₁ − A₂ ≡ 0 mod P².
#[derive(Clone, Debug)]
pub enum Modification {
    Upper(Poly),
    Lower(Poly),
}

impl GlobalTheta {
    /// The q_p² + q_p modifications of relative position (P, P⁻¹).
    pub fn modifications(&self, p: &Poly) -> Vec<Modification> {
        let r = &self.base().ring;
        let d = p.deg();
        let mut out: Vec<Modification> = r.all_up_to(2 * d - 1).into_iter().map(Modification::Upper).collect();
        out.extend(r.all_up_to(d - 1).into_iter().map(|c| Modification::Lower(r.mul(&c, p))));
        out
    }

    /// Splitting type of the modification of V_n, by h⁰(V'(−a∞)) probing.
    pub fn modified_type(&self, p: &Poly, n: u32, md: &Modification) -> Result<u32> {
        let r = &self.base().ring;
        let f = self.base().field();
        let d = p.deg();
        let p2 = r.mul(p, p);
        let n = n as i64;
        for a in (0..=n + d).rev() {
            let top1 = n - a + d;
            let top2 = -n - a + d;
            let mut rows: Vec<Vec<Fe>> = Vec::new();
            let mut push = |img: Poly| -> Result<()> {
                let red = r.rem(&img, &p2)?;
                rows.push((0..2 * d as usize).map(|i| red.coeff(i)).collect());
                Ok(())
            };
            for i in 0..=top1.max(-1) {
                if i < 0 {
                    continue;
                }
                let mono = r.monomial(1, i as usize);
                push(match md {
                    Modification::Upper(_) => mono,
                    Modification::Lower(y) => r.mul(y, &mono),
                })?;
            }
            for i in 0..=top2.max(-1) {
                if i < 0 {
                    continue;
                }
                let mono = r.monomial(1, i as usize);
                push(match md {
                    Modification::Upper(u) => r.neg(&r.mul(u, &mono)),
                    Modification::Lower(_) => r.neg(&mono),
                })?;
            }
            let unknowns = rows.len();
            if unknowns > rank(f, &rows) {
                return Ok(a as u32);
            }
        }
        Err(Error::InvalidParameter("modification has no sections".into()))
    }

    /// Histogram of splitting types of all modifications of V_n at P.
    pub fn modification_types(&self, p: &Poly, n: u32) -> Result<Vec<u32>> {
        self.modifications(p).par_iter().map(|md| self.modified_type(p, n, md)).collect()
    }

    /// (T f)(V_n) = Σ_{V'} f(V') for every n with n + deg P ≤ nmax.
    pub fn hecke_global(&self, place: &Place, f: &BunFn) -> Result<BunFn> {
        let Place::Fin(p) = place else {
            return Err(Error::Unsupported("Hecke operators are taken at finite places".into()));
        };
        let d = p.deg() as u32;
        if f.nmax() < d {
            return Err(Error::PrecisionExhausted(format!("nmax {} cannot hold a degree-{d} modification", f.nmax())));
        }
        let values = (0..=f.nmax() - d)
            .map(|n| {
                let types = self.modification_types(p, n)?;
                let mut acc = CycNumber::zero(self.p());
                for t in types {
                    acc = &acc + f.get(t)?;
                }
                Ok(acc)
            })
            .collect::<Result<_>>()?;
        Ok(BunFn { values })
    }

    /// Class of p₁ − p₂ for a split place: it is div(p₁/p₂), and p₁/p₂ has
    /// norm one, so the idele (ϖ₁, ϖ₂⁻¹) is a global norm-one element times
    /// an integral one. Returns the global element after checking this.
    pub fn split_difference(&self, place: &Place) -> Result<Rat> {
        let above = self.cover.places_above(place)?;
        let [Place::Fin(p1), Place::Fin(p2)] = above.as_slice() else {
            return Err(Error::InvalidParameter(format!("{place} is not split")));
        };
        let top = &self.cover.top;
        let g = top.rat(p1.clone(), p2.clone())?;
        if self.cover.norm(&g)? != self.base().constant(1) {
            return Err(Error::InvalidParameter("p1/p2 does not have norm one".into()));
        }
        if top.valuation(&g, &above[0])? != Some(1) || top.valuation(&g, &above[1])? != Some(-1) {
            return Err(Error::InvalidParameter("unexpected divisor of p1/p2".into()));
        }
        Ok(g)
    }

    /// Eigenvalue predicted for the character with χ(p₁ − p₂) = chi_split.
    pub fn predicted_eigenvalue(&self, place: &Place, chi_split: i64) -> Result<CycNumber> {
        let qp = (self.q() as i64).pow(place.degree());
        let v = if self.cover.is_split(place)? { qp - 1 + 2 * qp * chi_split } else { -(qp + 1) };
        Ok(CycNumber::from_int(self.p(), v))
    }
}

impl GlobalTheta {
    /// A divisor of degree −1..=3 supported on ∞, 0, 1 and a degree-2 place.
    pub fn random_divisor<R: Rng>(&self, rng: &mut R) -> Divisor {
        let base = self.base();
        let pool = [Place::Inf, base.point(0), base.point(1), base.places_of_degree(2)[0].clone()];
        loop {
            let mut d = Divisor::zero();
            for pl in &pool {
                d.add_at(pl.clone(), rng.gen_range(-1..=1));
            }
            if (-1..=3).contains(&d.degree()) {
                return d;
            }
        }
    }

    /// One to three principal parts of order ≤ 3 at ∞, 0, 2 or a degree-2 place.
    pub fn random_adele<R: Rng>(&self, rng: &mut R) -> Adele {
        let base = self.base();
        let pool = [Place::Inf, base.point(0), base.point(2), base.places_of_degree(2)[0].clone()];
        let mut out = Vec::new();
        for _ in 0..rng.gen_range(1..=3) {
            let pl = pool[rng.gen_range(0..pool.len())].clone();
            let j = rng.gen_range(1..=3);
            let num = base.ring.random(rng, pl.degree() as usize - 1);
            out.push((pl.clone(), base.tail(&pl, j, num).expect("valid tail")));
        }
        Adele(out)
    }

    pub fn random_presentation<R: Rng>(&self, rng: &mut R) -> Presentation {
        Presentation { sub: self.random_divisor(rng), ext: self.random_adele(rng) }
    }
}

/// Σ_c χ(c)·f_{𝓛,c} over the square classes c ∈ {1, nonsquare} of the norm
/// trivialization; `chi_nonsquare` is χ on the nonsquare class.
pub fn phi_chi(q: u32, chi_nonsquare: i64, nmax: u32) -> Result<BunFn> {
    let plain = GlobalTheta::new(q)?;
    let c = plain.base().field().nonsquare();
    let twisted = GlobalTheta::translate(q, c)?;
    let a = plain.table(nmax)?;
    let b = twisted.table(nmax)?;
    Ok(BunFn {
        values: a.values.iter().zip(&b.values).map(|(x, y)| x + &y.scale_int(chi_nonsquare)).collect(),
    })
}

/// The value at V₁ = 𝒪(1)⊕𝒪(−1) against c(t)·(|𝒪(C̃)| − 1), where
/// c(t) = ϑ(𝒪(∞))·q⁻¹ is the prefactor of the split presentation.
pub fn nonvanishing_witness(q: u32, f: &BunFn) -> Result<(CycNumber, CycNumber)> {
    let th = GlobalTheta::new(q)?;
    let sign = th.cover.artin_symbol(&Divisor::point(Place::Inf, 1))? as i64;
    let ct = rat(sign, 1) * rat_pow(q, -1);
    let constants = BigInt::from(q).pow(2) - 1;
    let expected = CycNumber::from_rational(th.p(), ct * BigRational::from_integer(constants));
    Ok((f.get(1)?.clone(), expected))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ci(v: i64) -> CycNumber {
        CycNumber::from_int(3, v)
    }

    #[test]
    fn split_values() {
        let th = GlobalTheta::new(3).unwrap();
        let t = th.table(3).unwrap();
        assert_eq!(t.values, vec![ci(1), ci(-3), ci(9), ci(-27)]);
        // e = 0 with L = 𝒪(m∞): ϑ(𝒪(m))·q^{−m}·|H⁰(π*𝒪(m)⊗𝓛)|
        for m in 0..4i64 {
            let h0 = th.section_basis(&Divisor::point(Place::Inf, m)).unwrap().len() as u32;
            let expect = CycNumber::from_rational(3, rat((-1i64).pow(m as u32), 1) * rat_pow(3, -m) * rat(9i64.pow(h0), 1));
            assert_eq!(th.theta_bundle_value(&Presentation::split(m)).unwrap(), expect);
        }
        assert_eq!(th.theta_adelic(&Presentation::split(0)).unwrap(), ci(1));
    }

    #[test]
    fn bundle_matches_adelic() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let th = GlobalTheta::new(3).unwrap();
        for _ in 0..12 {
            let pres = Presentation { sub: th.random_divisor(&mut rng), ext: th.random_adele(&mut rng) };
            let a = th.theta_bundle_value(&pres).unwrap();
            let b = th.theta_adelic(&pres).unwrap();
            assert_eq!(a, b, "{}", pres.sub);
        }
    }

    #[test]
    fn value_depends_only_on_the_bundle() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let th = GlobalTheta::new(3).unwrap();
        let table = th.table(4).unwrap();
        for m in 0..=3u32 {
            for e in th.extension_classes(m) {
                let pres = Presentation { sub: Divisor::point(Place::Inf, m as i64), ext: e };
                let n = th.splitting_type(&pres).unwrap();
                assert_eq!(&th.theta_bundle_value(&pres).unwrap(), table.get(n).unwrap());
            }
        }
        // sub-bundles of other shapes with random classes
        for _ in 0..20 {
            let pres = Presentation { sub: th.random_divisor(&mut rng), ext: th.random_adele(&mut rng) };
            let n = th.splitting_type(&pres).unwrap();
            assert_eq!(&th.theta_bundle_value(&pres).unwrap(), table.get(n).unwrap(), "{}", pres.sub);
        }
    }

    #[test]
    fn splitting_types_from_classes() {
        let th = GlobalTheta::new(3).unwrap();
        // H¹(𝒪(−4)) has 27 classes: one gives V₂, 26 − 8 = 18 give V₀
        let mut hist = [0usize; 3];
        for e in th.extension_classes(2) {
            hist[th.splitting_type(&Presentation { sub: Divisor::point(Place::Inf, 2), ext: e }).unwrap() as usize] += 1;
        }
        assert_eq!(hist, [18, 8, 1]);
    }

    #[test]
    fn translates_agree() {
        let q = 3;
        let th = GlobalTheta::new(q).unwrap();
        let c = th.base().field().nonsquare();
        let tw = GlobalTheta::translate(q, c).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..6 {
            let pres = Presentation { sub: th.random_divisor(&mut rng), ext: th.random_adele(&mut rng) };
            assert_eq!(th.theta_bundle_value(&pres).unwrap(), tw.theta_bundle_value(&pres).unwrap());
        }
    }

    #[test]
    fn constant_terms() {
        let th = GlobalTheta::new(3).unwrap();
        let f = th.table(4).unwrap();
        for m in 0..=3u32 {
            let expect = CycNumber::from_rational(3, rat((-1i64).pow(m), 1) * rat_pow(3, -(m as i64)));
            assert_eq!(th.constant_term(&f, m).unwrap(), expect);
        }
        let phi = phi_chi(3, -1, 4).unwrap();
        for m in 0..=3u32 {
            assert!(th.constant_term(&phi, m).unwrap().is_zero());
        }
    }

    #[test]
    fn modification_counts() {
        let th = GlobalTheta::new(3).unwrap();
        let x = th.base().ring.x();
        let types = th.modification_types(&x, 0).unwrap();
        assert_eq!(types.len(), 12);
        assert_eq!(types.iter().filter(|&&t| t == 0).count(), 8);
        assert_eq!(types.iter().filter(|&&t| t == 1).count(), 4);
        let p2 = Poly(vec![1, 0, 1]);
        assert_eq!(th.modifications(&p2).len(), 90);
    }

    #[test]
    fn hecke_eigenvalues() {
        let th = GlobalTheta::new(3).unwrap();
        let f = th.table(5).unwrap();
        let inert = th.point_place(0);
        let split = th.base().place(Poly(vec![1, 0, 1])).unwrap();
        th.split_difference(&split).unwrap();
        for pl in [inert, split] {
            let tf = th.hecke_global(&pl, &f).unwrap();
            let lambda = th.predicted_eigenvalue(&pl, 1).unwrap();
            let k = tf.nmax();
            assert!(tf.sub(&f.truncate(k).scale(&lambda)).is_zero(), "{pl}: {:?}", tf.values);
        }
        assert_eq!(th.predicted_eigenvalue(&th.point_place(0), 1).unwrap(), ci(-4));
        assert!(matches!(
            th.hecke_global(&th.point_place(0), &th.table(0).unwrap()),
            Err(Error::PrecisionExhausted(_))
        ));
    }

    #[test]
    fn nontrivial_character_vanishes() {
        let phi = phi_chi(3, -1, 3).unwrap();
        assert!(phi.is_zero());
        let (got, expect) = nonvanishing_witness(3, &phi).unwrap();
        assert!(got.is_zero());
        assert_eq!(expect, CycNumber::from_rational(3, rat(-8, 3)));
    }
}
