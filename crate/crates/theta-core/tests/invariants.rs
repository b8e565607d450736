use std::sync::Arc;

use proptest::prelude::*;
use theta_core::curve::{Curve, Divisor, Place};
use theta_core::poly::{Poly, PolyRing};
use theta_core::{CycNumber, Fe, Field};

fn field(q: u32) -> Arc<Field> {
    Field::of_order(q).unwrap()
}

fn poly(ring: &PolyRing, raw: &[u32]) -> Poly {
    let q = ring.q();
    ring.from_coeffs(raw.iter().map(|&c| (c % q) as Fe).collect())
}

fn small_places(c: &Curve) -> Vec<Place> {
    let mut out = c.places_of_degree(1);
    out.extend(c.places_of_degree(2));
    out
}

fn cyc(n: u32, raw: &[i64]) -> CycNumber {
    raw.iter()
        .enumerate()
        .fold(CycNumber::zero(n), |acc, (k, &v)| &acc + &CycNumber::zeta(n, k as i64).scale_int(v))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn field_laws(q in prop::sample::select(vec![3u32, 5, 9, 25, 27]), a in 0u32..1000, b in 0u32..1000, c in 0u32..1000) {
        let f = field(q);
        let (a, b, c) = ((a % q) as Fe, (b % q) as Fe, (c % q) as Fe);
        prop_assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
        prop_assert_eq!(f.frobenius(f.add(a, b)), f.add(f.frobenius(a), f.frobenius(b)));
        prop_assert_eq!(f.pow(a, q as u64), a);
        if a != 0 {
            prop_assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
            prop_assert_eq!(f.is_square(a), f.pow(a, (q as u64 - 1) / 2) == 1);
        }
    }

    #[test]
    fn division_with_remainder(q in prop::sample::select(vec![3u32, 9]), a in prop::collection::vec(0u32..27, 0..9), b in prop::collection::vec(0u32..27, 1..6)) {
        let ring = PolyRing::new(field(q));
        let a = poly(&ring, &a);
        let b = poly(&ring, &b);
        prop_assume!(!b.is_zero());
        let (quo, rem) = ring.divrem(&a, &b).unwrap();
        prop_assert!(rem.deg() < b.deg());
        prop_assert_eq!(ring.add(&ring.mul(&quo, &b), &rem), a.clone());
        let g = ring.gcd(&a, &b);
        prop_assert!(ring.rem(&a, &g).unwrap().is_zero());
        prop_assert!(ring.rem(&b, &g).unwrap().is_zero());
    }

    #[test]
    fn residues_sum_to_zero(q in prop::sample::select(vec![3u32, 5]), num in prop::collection::vec(0u32..25, 0..7), picks in prop::collection::vec((0usize..64, 1u32..3), 1..4)) {
        let c = Curve::new(field(q));
        let r = &c.ring;
        let places: Vec<Poly> = small_places(&c).into_iter().filter_map(|p| match p { Place::Fin(pp) => Some(pp), Place::Inf => None }).collect();
        let mut den = r.one();
        for (i, e) in &picks {
            den = r.mul(&den, &r.pow(&places[i % places.len()], *e));
        }
        let h = c.rat(poly(r, &num), den).unwrap();
        let mut total: Fe = 0;
        for p in small_places(&c) {
            total = c.field().add(total, c.residue(&h, &p).unwrap());
        }
        prop_assert_eq!(total, 0);
    }

    #[test]
    fn principal_divisors_have_degree_zero(q in prop::sample::select(vec![3u32, 5]), num in prop::collection::vec((0usize..64, 0u32..3), 0..4), den in prop::collection::vec((0usize..64, 0u32..3), 0..4), unit in 1u32..5) {
        let c = Curve::new(field(q));
        let r = &c.ring;
        let places = small_places(&c);
        let fin: Vec<Poly> = places.iter().filter_map(|p| match p { Place::Fin(pp) => Some(pp.clone()), Place::Inf => None }).collect();
        let build = |picks: &[(usize, u32)]| picks.iter().fold(r.one(), |acc, (i, e)| r.mul(&acc, &r.pow(&fin[i % fin.len()], *e)));
        let lead = (unit % q).max(1) as Fe;
        let f = c.rat(r.scale(lead, &build(&num)), build(&den)).unwrap();
        let mut total = 0i64;
        for p in &places {
            total += p.degree() as i64 * c.valuation(&f, p).unwrap().unwrap();
        }
        prop_assert_eq!(total, 0);
    }

    #[test]
    fn riemann_roch_dimension(q in prop::sample::select(vec![3u32, 5]), mults in prop::collection::vec((0usize..64, -3i64..4), 0..5)) {
        let c = Curve::new(field(q));
        let places = small_places(&c);
        let mut d = Divisor::zero();
        for (i, n) in mults {
            d.add_at(places[i % places.len()].clone(), n);
        }
        let basis = c.riemann_roch_basis(&d).unwrap();
        prop_assert_eq!(basis.len() as i64, (d.degree() + 1).max(0));
        for f in &basis {
            for p in &places {
                prop_assert!(c.valuation(f, p).unwrap().unwrap() + d.mult(p) >= 0);
            }
        }
    }

    #[test]
    fn cyclotomic_ring_laws(n in prop::sample::select(vec![3u32, 4, 8, 12]), a in prop::collection::vec(-5i64..6, 1..6), b in prop::collection::vec(-5i64..6, 1..6), c in prop::collection::vec(-5i64..6, 1..6)) {
        let (a, b, c) = (cyc(n, &a), cyc(n, &b), cyc(n, &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert_eq!((&a * &b).conj(), &a.conj() * &b.conj());
        prop_assert!((&a - &a).is_zero());
        prop_assert_eq!(CycNumber::zeta(n, 1).pow(n), CycNumber::one(n));
    }
}
