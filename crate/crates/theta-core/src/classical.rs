//! Spherical vectors of the classical (plain) Weil representation: the
//! unipotent projector, the SL₂(O)-average and the Hecke operators T_m.

use num_bigint::BigInt;
use num_rational::BigRational;
use rayon::prelude::*;

use crate::cyclo::{rat, rat_pow};
use crate::error::{Error, Result};
use crate::grid::{read_val, Grid};
use crate::local::{LocalRing, Mat2};
use crate::quad::Flavor;
use crate::weil::{SchwartzTable, WeilCtx};

/// Every element of SL₂(O/t^m), lifted to an exact element of SL₂(O) with
/// polynomial entries in the reduced ring.
pub fn sl2_mod(r: &LocalRing, m: i32) -> Result<Vec<Mat2>> {
    let elems = r.enumerate(0, m, false)?;
    let one = r.one();
    let mut out = Vec::new();
    for a in &elems {
        for b in &elems {
            for c in &elems {
                for d in &elems {
                    let det = r.truncate(&r.mat_det(&Mat2 { a: *a, b: *b, c: *c, d: *d })?, m);
                    if det != one {
                        continue;
                    }
                    // repair one entry so the determinant is exactly 1
                    let g = if r.val_red(a) == Ok(0) {
                        let d2 = r.mul(&r.add(&one, &r.mul(b, c)?), &r.inv(a)?)?;
                        Mat2 { a: *a, b: *b, c: *c, d: d2 }
                    } else {
                        let b2 = r.mul(&r.sub(&r.mul(a, d)?, &one), &r.inv(c)?)?;
                        Mat2 { a: *a, b: b2, c: *c, d: *d }
                    };
                    out.push(g);
                }
            }
        }
    }
    Ok(out)
}

/// |SL₂(O/t^m)| = q^{3(m−1)}·q(q²−1).
pub fn sl2_mod_order(q: u32, m: i32) -> u64 {
    let q = q as u64;
    q.pow(3 * (m as u32 - 1)) * q * (q * q - 1)
}

/// Congruence level at which SL₂(O) acts through a finite quotient on
/// functions with the given windows.
pub fn averaging_level(win: &[(i32, i32)]) -> i32 {
    let a = win.iter().map(|&(lo, hi)| (-lo).max(hi)).max().unwrap_or(0);
    (2 * a).max(1)
}

/// Π as the literal average of r(upper(z)) over z ∈ O/t^n, n large enough
/// that the character only sees z mod t^n.
pub fn pi_literal(w: &WeilCtx, phi: &SchwartzTable) -> Result<SchwartzTable> {
    let r = w.ring();
    let lo = phi.win.iter().map(|&(lo, _)| lo).min().unwrap_or(0);
    let n = (-2 * lo).max(1);
    let zs = r.enumerate(0, n, r.dual)?;
    let count = zs.len() as i64;
    let total = sum_tables(zs.par_iter().map(|z| w.act_unipotent(z, phi)))?;
    Ok(total.scaled(&rat(1, count)).shrink())
}

/// Π(Φ) = δ_{Nm⁻¹(O)}·Φ.
pub fn pi_mask(w: &WeilCtx, phi: &SchwartzTable) -> Result<SchwartzTable> {
    let r = w.ring();
    let mut out = phi.clone();
    let p = phi.p();
    for idx in 0..phi.npoints() {
        let x = w.from_comps(&phi.point(r, idx)?);
        let nm = w.qr.norm(&x)?;
        let integral = if r.dual {
            r.is_integral(&r.epsilon_part(&nm))
        } else {
            r.is_integral(&nm)
        };
        if !integral {
            out.vals[idx * p..(idx + 1) * p].iter_mut().for_each(|v| *v = 0);
        }
    }
    out.normalize();
    Ok(out.shrink())
}

fn sum_tables<I>(it: I) -> Result<Grid>
where
    I: ParallelIterator<Item = Result<Grid>>,
{
    it.map(|g| g.map(Some))
        .try_reduce(
            || None,
            |a, b| match (a, b) {
                (Some(x), Some(y)) => Ok(Some(x.add(&y)?)),
                (x, None) => Ok(x),
                (None, y) => Ok(y),
            },
        )?
        .ok_or_else(|| Error::InvalidParameter("empty sum".into()))
}

/// Literal average over SL₂(O/t^m) of r(k)Φ.
pub fn average_sl2(w: &WeilCtx, phi: &SchwartzTable, m: i32) -> Result<SchwartzTable> {
    let r = w.ring();
    let group = sl2_mod(r, m)?;
    let n = group.len() as i64;
    let total = sum_tables(group.par_iter().map(|k| w.act(k, phi)))?;
    Ok(total.scaled(&rat(1, n)).shrink())
}

/// diag(t^m, t^{-m}).
pub fn hecke_g0(r: &LocalRing, m: i32) -> Result<Mat2> {
    r.mat_diag(r.t_pow(m)?)
}

/// |P¹(O/t^{2m})| = q^{2m} + q^{2m−1}.
pub fn hecke_index(q: u32, m: i32) -> BigRational {
    let q = BigInt::from(q);
    BigRational::from_integer(q.pow(2 * m as u32) + q.pow(2 * m as u32 - 1))
}

/// T_m Φ = index · A(Π(r(g₀)Φ)).
pub fn hecke_t(w: &WeilCtx, m: i32, phi: &SchwartzTable) -> Result<SchwartzTable> {
    let r = w.ring();
    let moved = w.act(&hecke_g0(r, m)?, phi)?;
    let projected = pi_mask(w, &moved)?;
    let level = averaging_level(&projected.win);
    let avg = average_sl2(w, &projected, level)?;
    Ok(avg.scaled(&hecke_index(w.q(), m)))
}

/// Coset representatives k with second column running over P¹(O/t^n).
pub fn p1_cosets(r: &LocalRing, n: i32) -> Result<Vec<Mat2>> {
    let mut out = Vec::new();
    for x in r.enumerate(0, n, false)? {
        out.push(r.mat_upper(x));
    }
    for y in r.enumerate(1, n, false)? {
        out.push(Mat2 { a: r.zero(), b: r.one(), c: r.neg(&r.one()), d: y });
    }
    Ok(out)
}

/// T_m Φ = Σ_k r(k·g₀)Φ over P¹(O/t^{2m}) coset representatives, for
/// SL₂(O)-invariant Φ.
pub fn hecke_t_cosets(w: &WeilCtx, m: i32, phi: &SchwartzTable) -> Result<SchwartzTable> {
    let r = w.ring();
    let g0 = hecke_g0(r, m)?;
    let reps = p1_cosets(r, 2 * m)?;
    let total = sum_tables(reps.par_iter().map(|k| w.act(&r.mat_mul(k, &g0)?, phi)))?;
    Ok(total.shrink())
}

/// Upper triangular representatives of SL₂(O)·diag(t^m, t^{−m})·SL₂(O)/SL₂(O):
/// [[t^{a−m}, b·t^{−m}], [0, t^{m−a}]] for 0 ≤ a ≤ 2m, b ∈ O/t^a, with b a
/// unit when 0 < a < 2m.
pub fn upper_cosets(r: &LocalRing, m: i32) -> Result<Vec<Mat2>> {
    let mut out = Vec::new();
    let tm = r.t_pow(-m)?;
    for a in 0..=2 * m {
        let bs = if a == 0 { vec![r.zero()] } else { r.enumerate(0, a, false)? };
        for b in bs {
            if a > 0 && a < 2 * m && r.val_red(&b).ok() != Some(0) {
                continue;
            }
            out.push(Mat2 { a: r.t_pow(a - m)?, b: r.mul(&b, &tm)?, c: r.zero(), d: r.t_pow(m - a)? });
        }
    }
    Ok(out)
}

/// T_m Φ as a sum over [`upper_cosets`]; no Fourier transform is involved,
/// so this is an independent route to the coset sum.
pub fn hecke_t_upper(w: &WeilCtx, m: i32, phi: &SchwartzTable) -> Result<SchwartzTable> {
    let reps = upper_cosets(w.ring(), m)?;
    Ok(sum_tables(reps.par_iter().map(|g| w.act(g, phi)))?.shrink())
}

/// T_m Φ over [`upper_cosets`], with the sum over b for each a done by
/// orthogonality: Σ_{b ∈ O/t^a} ψ(b·t^{−a}·y) = q^a·1[v(y) ≥ a] for y ∈ O.
/// Needs Nm(x) ∈ O on the support of Φ.
pub fn hecke_t_orthogonal(w: &WeilCtx, m: i32, phi: &SchwartzTable) -> Result<SchwartzTable> {
    let r = w.ring();
    if w.dual() {
        return Err(Error::Unsupported("plain representation only".into()));
    }
    let q = w.q() as i128;
    let p = phi.p();
    let mut total: Option<Grid> = None;
    for a in 0..=2 * m {
        let win: Vec<(i32, i32)> = phi.win.iter().map(|&(lo, hi)| (lo, hi.max(a))).collect();
        let mut g = phi.refine(&win)?;
        for idx in 0..g.npoints() {
            if g.vals[idx * p..(idx + 1) * p].iter().all(|v| *v == 0) {
                continue;
            }
            let x = w.from_comps(&g.point(r, idx)?);
            let v = read_val(r, &w.qr.norm(&x)?);
            if v.is_some_and(|v| v < 0) {
                return Err(Error::InvalidParameter("Φ is not supported on Nm⁻¹(O)".into()));
            }
            let at_least = |k: i32| i128::from(v.map_or(true, |v| v >= k));
            let c = match a {
                0 => 1,
                _ if a == 2 * m => q.pow(a as u32) * at_least(a),
                _ => q.pow(a as u32) * at_least(a) - q.pow(a as u32 - 1) * at_least(a - 1),
            };
            g.vals[idx * p..(idx + 1) * p].iter_mut().for_each(|e| *e *= c);
        }
        g.normalize();
        let moved = w.act_diag(&r.t_pow(a - m)?, &g)?;
        total = Some(match total {
            None => moved,
            Some(t) => t.add(&moved)?,
        });
    }
    Ok(total.expect("a = 0 term").shrink())
}

/// (−1)^m (q^m + q^{m−1}) δ_{O_K} for a field, and for the split algebra
/// with m = 1: (q−1)δ_{O²} + q δ_{tO⊕t⁻¹O} + q δ_{t⁻¹O⊕tO}.
pub fn hecke_expected(w: &WeilCtx, m: i32) -> Result<SchwartzTable> {
    let q = w.q() as i64;
    match w.qr.flavor {
        Flavor::Split => {
            if m != 1 {
                return Err(Error::Unsupported("split T_m is tabulated for m = 1".into()));
            }
            let a = w.box_delta(&[0, 0])?.scaled(&rat(q - 1, 1));
            let b = w.box_delta(&[1, -1])?.scaled(&rat(q, 1));
            let c = w.box_delta(&[-1, 1])?.scaled(&rat(q, 1));
            a.add(&b)?.add(&c)
        }
        _ => {
            let sign = if m % 2 == 0 { 1 } else { -1 };
            let coef = rat_pow(w.q(), m as i64) + rat_pow(w.q(), m as i64 - 1);
            Ok(w.lattice_delta(0)?.scaled(&(coef * rat(sign, 1))))
        }
    }
}

/// Splits T δ into its value on three boxes, for reports.
pub fn describe(w: &WeilCtx, phi: &SchwartzTable) -> Vec<(String, String)> {
    let r = w.ring();
    let p = r.field.p();
    let probes: Vec<(&str, [i32; 2])> = vec![("O+O", [0, 0]), ("tO+t^-1O", [1, -1]), ("t^-1O+tO", [-1, 1])];
    probes
        .into_iter()
        .map(|(name, e)| {
            let x = w.from_comps(&[
                r.t_pow(e[0]).unwrap_or_else(|_| r.zero()),
                r.t_pow(e[1]).unwrap_or_else(|_| r.zero()),
            ]);
            (name.to_string(), phi.eval(r, &w.comps(&x), p).to_string())
        })
        .collect()
}

/// δ_{O_K}, or δ_{O⊕O} when split.
pub fn unit_delta(w: &WeilCtx) -> Result<SchwartzTable> {
    w.lattice_delta(0)
}

/// Exhaustive check of r(k)Φ = Φ over SL₂(O/t^m).
pub fn is_sl2_invariant(w: &WeilCtx, phi: &SchwartzTable, m: i32) -> Result<bool> {
    for k in sl2_mod(w.ring(), m)? {
        if !w.act(&k, phi)?.same_function(phi)? {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn group_orders() {
        let w = WeilCtx::new(3, Flavor::Unramified, false).unwrap();
        assert_eq!(sl2_mod(w.ring(), 1).unwrap().len() as u64, sl2_mod_order(3, 1));
        assert_eq!(sl2_mod(w.ring(), 2).unwrap().len(), 648);
        assert_eq!(p1_cosets(w.ring(), 2).unwrap().len(), 12);
        assert_eq!(upper_cosets(w.ring(), 1).unwrap().len(), 12);
        assert_eq!(upper_cosets(w.ring(), 2).unwrap().len(), 108);
    }

    #[test]
    fn pi_literal_is_mask() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for fl in [Flavor::Unramified, Flavor::Split] {
            let w = WeilCtx::new(3, fl, false).unwrap();
            let phi = Grid::random(w.ring().field.clone(), vec![(-1, 1); 2], &mut rng).unwrap();
            let a = pi_literal(&w, &phi).unwrap();
            let b = pi_mask(&w, &phi).unwrap();
            assert!(a.same_function(&b).unwrap());
            assert!(pi_mask(&w, &b).unwrap().same_function(&b).unwrap());
        }
    }

    #[test]
    fn delta_invariant_at_level_two() {
        let w = WeilCtx::new(3, Flavor::Unramified, false).unwrap();
        assert!(is_sl2_invariant(&w, &unit_delta(&w).unwrap(), 2).unwrap());
    }

    #[test]
    fn t1_unramified_q3() {
        let w = WeilCtx::new(3, Flavor::Unramified, false).unwrap();
        let t = hecke_t(&w, 1, &unit_delta(&w).unwrap()).unwrap();
        assert!(t.same_function(&hecke_expected(&w, 1).unwrap()).unwrap());
        let fast = hecke_t_cosets(&w, 1, &unit_delta(&w).unwrap()).unwrap();
        assert!(fast.same_function(&t).unwrap());
    }

    #[test]
    fn orthogonal_sum_matches_coset_sums() {
        for (fl, m) in [(Flavor::Unramified, 1), (Flavor::Unramified, 2), (Flavor::Split, 1), (Flavor::Split, 2)] {
            let w = WeilCtx::new(3, fl, false).unwrap();
            let d = unit_delta(&w).unwrap();
            let fast = hecke_t_orthogonal(&w, m, &d).unwrap();
            assert!(hecke_t_upper(&w, m, &d).unwrap().same_function(&fast).unwrap(), "{fl} {m}");
            assert!(hecke_t_cosets(&w, m, &d).unwrap().same_function(&fast).unwrap(), "{fl} {m}");
        }
    }

    #[test]
    fn t1_split_q3() {
        let w = WeilCtx::new(3, Flavor::Split, false).unwrap();
        let d = unit_delta(&w).unwrap();
        let t = hecke_t(&w, 1, &d).unwrap();
        assert!(t.same_function(&hecke_expected(&w, 1).unwrap()).unwrap(), "{:?}", describe(&w, &t));
        let fast = hecke_t_cosets(&w, 1, &d).unwrap();
        assert!(fast.same_function(&t).unwrap());
    }
}
