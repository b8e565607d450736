//! Exact functions on products of lattice windows `t^lo·O / t^hi·O`.
//!
//! A `Grid` has one window per component (a copy of F_q((t)) inside the
//! ambient space). A point is a digit vector: component 0 first, lowest
//! exponent least significant. Each value is an element of Z[ζ_p] stored as
//! `p` integer counts, times a shared rational `scale`. Counts are kept in
//! canonical form (minimum 0 per entry, gcd pulled into the scale).

use std::collections::HashMap;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use rayon::prelude::*;

use crate::cyclo::{rat_pow, CycNumber};
use crate::error::{Error, Result};
use crate::field::{Fe, Field};
use crate::local::{LocalElem, LocalRing};

/// Largest |exponent| a window may reach.
pub const WINDOW_CAP: i32 = 6;
/// Largest number of table points.
pub const MAX_POINTS: usize = 1 << 21;

#[derive(Clone, Debug)]
pub struct Grid {
    pub field: Arc<Field>,
    pub win: Vec<(i32, i32)>,
    pub vals: Vec<i128>,
    pub scale: BigRational,
}

/// How one input component is treated by [`Grid::transform_axes`].
#[derive(Clone, Debug)]
pub enum AxisMap {
    Keep { out: usize },
    /// Integrate against ψ(res(κ·t^shift·x·y)); the input cell of level
    /// `hi` carries measure `weight·q^{-hi}`.
    Transform { out: usize, kappa: Fe, shift: i32, weight: BigRational },
}

fn prec(msg: String) -> Error {
    Error::PrecisionExhausted(msg)
}

/// Coefficient read by ψ: ε-part in a dual ring, the element itself otherwise.
pub fn read_coeff(ring: &LocalRing, x: &LocalElem, k: i32) -> Fe {
    if ring.dual {
        ring.eps_coeff(x, k)
    } else {
        ring.coeff(x, k)
    }
}

pub fn read_val(ring: &LocalRing, x: &LocalElem) -> Option<i32> {
    if ring.dual {
        ring.val_eps(x)
    } else {
        ring.val_red(x).ok()
    }
}

pub fn check_window(win: &[(i32, i32)], q: u32) -> Result<usize> {
    let mut digits = 0u32;
    for &(lo, hi) in win {
        if lo > hi {
            return Err(Error::InvalidParameter(format!("window ({lo}, {hi}) is empty")));
        }
        if lo < -WINDOW_CAP || hi > WINDOW_CAP {
            return Err(prec(format!("window ({lo}, {hi}) exceeds the cap ±{WINDOW_CAP}")));
        }
        digits += (hi - lo) as u32;
    }
    (q as usize)
        .checked_pow(digits)
        .filter(|&n| n <= MAX_POINTS)
        .ok_or_else(|| prec(format!("table with {digits} digits over F_{q} is too large")))
}

fn rotate_add(dst: &mut [i128], src: &[i128], e: usize) {
    let p = dst.len();
    for j in 0..p {
        dst[(j + e) % p] += src[j];
    }
}

fn canonicalize(e: &mut [i128]) {
    let m = *e.iter().min().expect("p > 0");
    if m != 0 {
        e.iter_mut().for_each(|v| *v -= m);
    }
}

impl Grid {
    pub fn q(&self) -> u32 {
        self.field.q()
    }

    pub fn p(&self) -> usize {
        self.field.p() as usize
    }

    /// The function `c` on the whole support box.
    pub fn constant(field: Arc<Field>, win: Vec<(i32, i32)>, c: i64) -> Result<Grid> {
        let n = check_window(&win, field.q())?;
        let p = field.p() as usize;
        let mut vals = vec![0i128; n * p];
        for e in vals.chunks_mut(p) {
            e[0] = c as i128;
        }
        let mut g = Grid { field, win, vals, scale: BigRational::one() };
        g.normalize();
        Ok(g)
    }

    pub fn zero(field: Arc<Field>, win: Vec<(i32, i32)>) -> Result<Grid> {
        Grid::constant(field, win, 0)
    }

    /// Random values with small integer counts.
    pub fn random<R: Rng>(field: Arc<Field>, win: Vec<(i32, i32)>, rng: &mut R) -> Result<Grid> {
        let n = check_window(&win, field.q())?;
        let p = field.p() as usize;
        let vals = (0..n * p).map(|_| rng.gen_range(-2i128..=2)).collect();
        let mut g = Grid { field, win, vals, scale: BigRational::one() };
        g.normalize();
        Ok(g)
    }

    pub fn npoints(&self) -> usize {
        self.vals.len() / self.p()
    }

    pub fn ndigits(&self) -> usize {
        self.win.iter().map(|&(lo, hi)| (hi - lo) as usize).sum()
    }

    /// Digit position of the first exponent of each component.
    pub fn offsets(&self) -> Vec<usize> {
        offsets(&self.win)
    }

    /// `(component, exponent)` of each digit position.
    pub fn layout(&self) -> Vec<(usize, i32)> {
        layout(&self.win)
    }

    pub fn decode(&self, mut idx: usize, out: &mut [Fe]) {
        let q = self.q() as usize;
        for d in out.iter_mut() {
            *d = (idx % q) as Fe;
            idx /= q;
        }
    }

    pub fn entry(&self, idx: usize) -> &[i128] {
        let p = self.p();
        &self.vals[idx * p..(idx + 1) * p]
    }

    pub fn value(&self, idx: usize, n: u32) -> CycNumber {
        CycNumber::from_zeta_counts(n, self.field.p(), self.entry(idx), &self.scale)
    }

    /// Components of the canonical representative of a point.
    pub fn point(&self, ring: &LocalRing, idx: usize) -> Result<Vec<LocalElem>> {
        let mut digits = vec![0; self.ndigits()];
        self.decode(idx, &mut digits);
        let mut comps = vec![ring.zero(); self.win.len()];
        for (pos, &(c, k)) in self.layout().iter().enumerate() {
            if digits[pos] != 0 {
                ring.set_coeff(&mut comps[c], k, digits[pos])?;
            }
        }
        Ok(comps)
    }

    /// Table index of the cell containing a point given by reduced
    /// components, `None` outside the support.
    pub fn index_of(&self, ring: &LocalRing, comps: &[LocalElem]) -> Option<usize> {
        let q = self.q() as usize;
        let mut idx = 0usize;
        let mut stride = 1usize;
        for (c, &(lo, hi)) in self.win.iter().enumerate() {
            if (ring.lo..lo).any(|k| ring.coeff(&comps[c], k) != 0) {
                return None;
            }
            for k in lo..hi {
                idx += ring.coeff(&comps[c], k) as usize * stride;
                stride *= q;
            }
        }
        Some(idx)
    }

    /// Value at a point given by reduced components.
    pub fn eval(&self, ring: &LocalRing, comps: &[LocalElem], n: u32) -> CycNumber {
        match self.index_of(ring, comps) {
            Some(i) => self.value(i, n),
            None => CycNumber::zero(n),
        }
    }

    pub fn normalize(&mut self) {
        let p = self.p();
        self.vals.par_chunks_mut(p).for_each(canonicalize);
        let g = self
            .vals
            .par_iter()
            .map(|v| v.unsigned_abs())
            .reduce(|| 0u128, |a, b| a.gcd(&b));
        if g == 0 {
            self.scale = BigRational::one();
        } else if g > 1 {
            let gi = g as i128;
            self.vals.par_iter_mut().for_each(|v| *v /= gi);
            self.scale *= BigRational::from_integer(BigInt::from(g));
        }
    }

    pub fn is_zero(&self) -> bool {
        self.vals.iter().all(|&v| v == 0)
    }

    /// Same function on a larger window.
    pub fn refine(&self, win: &[(i32, i32)]) -> Result<Grid> {
        if win.len() != self.win.len() {
            return Err(Error::InvalidParameter("component count mismatch".into()));
        }
        for (&(lo, hi), &(nlo, nhi)) in self.win.iter().zip(win) {
            if nlo > lo || nhi < hi {
                return Err(Error::InvalidParameter(format!(
                    "({nlo}, {nhi}) does not contain ({lo}, {hi})"
                )));
            }
        }
        if win == self.win.as_slice() {
            return Ok(self.clone());
        }
        let n = check_window(win, self.q())?;
        let q = self.q() as usize;
        let old_off = self.offsets();
        // per new digit: Some(old stride) if kept, None if it must vanish
        let mut role: Vec<Option<Option<usize>>> = Vec::new();
        for (c, &(nlo, nhi)) in win.iter().enumerate() {
            let (lo, hi) = self.win[c];
            for k in nlo..nhi {
                role.push(if k < lo {
                    None
                } else if k < hi {
                    Some(Some(q.pow((old_off[c] + (k - lo) as usize) as u32)))
                } else {
                    Some(None)
                });
            }
        }
        let p = self.p();
        let mut vals = vec![0i128; n * p];
        vals.par_chunks_mut(p).enumerate().for_each(|(idx, out)| {
            let mut rest = idx;
            let mut old = 0usize;
            for r in &role {
                let d = rest % q;
                rest /= q;
                match r {
                    None if d != 0 => return,
                    Some(Some(s)) => old += d * s,
                    _ => {}
                }
            }
            out.copy_from_slice(&self.vals[old * p..(old + 1) * p]);
        });
        Ok(Grid { field: self.field.clone(), win: win.to_vec(), vals, scale: self.scale.clone() })
    }

    /// Restriction to digit value 0 at one position, dropping that digit.
    fn drop_digit(&self, pos: usize, comp: usize, raise_lo: bool) -> Grid {
        let q = self.q() as usize;
        let p = self.p();
        let stride = q.pow(pos as u32);
        let n = self.npoints() / q;
        let mut vals = vec![0i128; n * p];
        vals.par_chunks_mut(p).enumerate().for_each(|(j, out)| {
            let old = (j / stride) * stride * q + j % stride;
            out.copy_from_slice(&self.vals[old * p..(old + 1) * p]);
        });
        let mut win = self.win.clone();
        if raise_lo {
            win[comp].0 += 1;
        } else {
            win[comp].1 -= 1;
        }
        Grid { field: self.field.clone(), win, vals, scale: self.scale.clone() }
    }

    /// Smallest window representing the same function.
    pub fn shrink(&self) -> Grid {
        let mut g = self.clone();
        let q = self.q() as usize;
        let p = self.p();
        loop {
            let mut changed = false;
            for c in 0..g.win.len() {
                let (lo, hi) = g.win[c];
                if lo == hi {
                    continue;
                }
                let off = g.offsets()[c];
                // raise lo: everything with a nonzero lowest digit vanishes
                let s = q.pow(off as u32);
                let vanish = (0..g.npoints())
                    .into_par_iter()
                    .all(|i| (i / s) % q == 0 || g.entry(i).iter().all(|&v| v == 0));
                if vanish {
                    g = g.drop_digit(off, c, true);
                    changed = true;
                    continue;
                }
                // lower hi: values do not depend on the top digit
                let top = off + (hi - lo) as usize - 1;
                let s = q.pow(top as u32);
                let flat = (0..g.npoints()).into_par_iter().all(|i| {
                    let d = (i / s) % q;
                    d == 0 || g.vals[i * p..(i + 1) * p] == g.vals[(i - d * s) * p..(i - d * s + 1) * p]
                });
                if flat {
                    g = g.drop_digit(top, c, false);
                    changed = true;
                }
            }
            if !changed {
                return g;
            }
        }
    }

    /// `ca·a + cb·b`.
    pub fn combine(a: &Grid, ca: &BigRational, b: &Grid, cb: &BigRational) -> Result<Grid> {
        let win: Vec<(i32, i32)> = a
            .win
            .iter()
            .zip(&b.win)
            .map(|(&(l1, h1), &(l2, h2))| (l1.min(l2), h1.max(h2)))
            .collect();
        let ra = a.refine(&win)?;
        let rb = b.refine(&win)?;
        let sa = &a.scale * ca;
        let sb = &b.scale * cb;
        let to_i = |x: BigInt| {
            x.to_i128().ok_or_else(|| Error::InvalidParameter("scale overflow".into()))
        };
        let fa = to_i(sa.numer() * sb.denom())?;
        let fb = to_i(sb.numer() * sa.denom())?;
        let den = sa.denom() * sb.denom();
        let mut vals = ra.vals;
        vals.par_iter_mut().zip(rb.vals.par_iter()).for_each(|(x, &y)| {
            *x = *x * fa + y * fb;
        });
        let mut g = Grid {
            field: a.field.clone(),
            win,
            vals,
            scale: BigRational::new(BigInt::one(), den),
        };
        g.normalize();
        Ok(g)
    }

    pub fn add(&self, other: &Grid) -> Result<Grid> {
        Grid::combine(self, &BigRational::one(), other, &BigRational::one())
    }

    pub fn sub(&self, other: &Grid) -> Result<Grid> {
        Grid::combine(self, &BigRational::one(), other, &-BigRational::one())
    }

    pub fn scaled(&self, c: &BigRational) -> Grid {
        let mut g = self.clone();
        g.scale *= c;
        if c.is_zero() {
            g.vals.iter_mut().for_each(|v| *v = 0);
            g.normalize();
        }
        g
    }

    /// Multiplies every value by a fixed element of Z[ζ_p] (given as counts).
    pub fn times_counts(&self, counts: &[i128]) -> Grid {
        let p = self.p();
        let mut vals = vec![0i128; self.vals.len()];
        vals.par_chunks_mut(p).zip(self.vals.par_chunks(p)).for_each(|(out, e)| {
            for (k, &c) in counts.iter().enumerate() {
                if c != 0 {
                    for j in 0..p {
                        out[(j + k) % p] += c * e[j];
                    }
                }
            }
        });
        let mut g = Grid { field: self.field.clone(), win: self.win.clone(), vals, scale: self.scale.clone() };
        g.normalize();
        g
    }

    pub fn same_function(&self, other: &Grid) -> Result<bool> {
        Ok(self.sub(other)?.is_zero())
    }

    /// `x ↦ self(Lx)` where `cols[c][d]` is the d-th component of `L(e_c)`
    /// and `out_win` is a window containing the pulled-back function.
    pub fn pullback(
        &self,
        ring: &LocalRing,
        cols: &[Vec<LocalElem>],
        out_win: Vec<(i32, i32)>,
    ) -> Result<Grid> {
        let n = check_window(&out_win, self.q())?;
        let f = &self.field;
        let q = self.q() as usize;
        let in_off = self.offsets();
        let in_digits = self.ndigits();
        let mut under: HashMap<(usize, i32), usize> = HashMap::new();
        let mut contrib: Vec<Vec<(usize, Fe)>> = Vec::new();
        for (c, &(lo, hi)) in out_win.iter().enumerate() {
            for k in lo..hi {
                let mut list = Vec::new();
                for (d, &(dlo, dhi)) in self.win.iter().enumerate() {
                    if ring.hi + k < dhi {
                        return Err(prec(format!("column precision t^{} too short", ring.hi)));
                    }
                    let s = &cols[c][d];
                    for j in ring.lo..ring.hi {
                        let coef = ring.coeff(s, j);
                        let e = j + k;
                        if coef == 0 || e >= dhi {
                            continue;
                        }
                        let slot = if e < dlo {
                            let next = in_digits + under.len();
                            *under.entry((d, e)).or_insert(next)
                        } else {
                            in_off[d] + (e - dlo) as usize
                        };
                        list.push((slot, coef));
                    }
                }
                contrib.push(list);
            }
        }
        let nslots = in_digits + under.len();
        let strides: Vec<usize> = (0..in_digits).map(|i| q.pow(i as u32)).collect();
        let p = self.p();
        let mut vals = vec![0i128; n * p];
        vals.par_chunks_mut(p).enumerate().for_each_init(
            || vec![0 as Fe; nslots],
            |acc, (idx, out)| {
                acc.iter_mut().for_each(|a| *a = 0);
                let mut rest = idx;
                for list in &contrib {
                    let x = (rest % q) as Fe;
                    rest /= q;
                    if x == 0 {
                        continue;
                    }
                    for &(slot, coef) in list {
                        acc[slot] = f.add(acc[slot], f.mul(x, coef));
                    }
                }
                if acc[in_digits..].iter().any(|&a| a != 0) {
                    return;
                }
                let src: usize = acc[..in_digits].iter().zip(&strides).map(|(&a, s)| a as usize * s).sum();
                out.copy_from_slice(&self.vals[src * p..(src + 1) * p]);
            },
        );
        let mut g = Grid { field: f.clone(), win: out_win, vals, scale: self.scale.clone() };
        g.normalize();
        Ok(g)
    }

    /// Multiplies by `x ↦ ψ(Q(x))` for the quadratic form with
    /// `Q(Σ x_c e_c) = Σ_{c≤c'} x_c x_{c'} gram[c][c']` (only `c ≤ c'` read).
    /// The level is refined first so that the product stays locally constant.
    pub fn apply_phase(&self, ring: &LocalRing, gram: &[Vec<LocalElem>]) -> Result<Grid> {
        let m = self.win.len();
        let mut win = self.win.clone();
        for c in 0..m {
            for c2 in c..m {
                if let Some(v) = read_val(ring, &gram[c][c2]) {
                    let (lo1, lo2) = (self.win[c].0, self.win[c2].0);
                    win[c2].1 = win[c2].1.max(-lo1 - v);
                    win[c].1 = win[c].1.max(-lo2 - v);
                }
            }
        }
        let g = self.refine(&win)?;
        let f = &self.field;
        let two = f.from_int(2);
        let lay = g.layout();
        let mut terms: Vec<(usize, usize, Fe)> = Vec::new();
        for (a, &(c, i)) in lay.iter().enumerate() {
            for (b, &(c2, j)) in lay.iter().enumerate().skip(a) {
                let e = -1 - i - j;
                if e >= ring.hi {
                    return Err(prec(format!("phase needs t^{e}")));
                }
                let coef = if c == c2 {
                    let r = read_coeff(ring, &gram[c][c], e);
                    if a == b { r } else { f.mul(two, r) }
                } else if c < c2 {
                    read_coeff(ring, &gram[c][c2], e)
                } else {
                    read_coeff(ring, &gram[c2][c], e)
                };
                if coef != 0 {
                    terms.push((a, b, coef));
                }
            }
        }
        let q = self.q() as usize;
        let p = self.p();
        let nd = lay.len();
        let mut vals = g.vals.clone();
        vals.par_chunks_mut(p).enumerate().for_each_init(
            || (vec![0 as Fe; nd], vec![0i128; p]),
            |(digits, tmp), (idx, out)| {
                let mut rest = idx;
                for d in digits.iter_mut() {
                    *d = (rest % q) as Fe;
                    rest /= q;
                }
                let mut s: Fe = 0;
                for &(a, b, coef) in &terms {
                    if digits[a] != 0 && digits[b] != 0 {
                        s = f.add(s, f.mul(coef, f.mul(digits[a], digits[b])));
                    }
                }
                let e = f.trace(s) as usize;
                if e != 0 {
                    tmp.copy_from_slice(out);
                    out.iter_mut().for_each(|v| *v = 0);
                    rotate_add(out, tmp, e);
                }
            },
        );
        let mut out = Grid { field: f.clone(), win, vals, scale: g.scale };
        out.normalize();
        Ok(out)
    }

    /// Separable Fourier-type transform: every `Transform` axis is integrated
    /// against its character and lands on output component `out`; `Keep`
    /// axes are relabelled.
    pub fn transform_axes(&self, maps: &[AxisMap]) -> Result<Grid> {
        let m = self.win.len();
        let f = &self.field;
        let q = self.q() as usize;
        let p = self.p();
        let mut out_win = vec![(0, 0); m];
        let mut scale = self.scale.clone();
        // source position of each output digit, keyed (out comp, exponent)
        let mut src_pos: HashMap<(usize, i32), usize> = HashMap::new();
        let mut work = self.vals.clone();
        let off = self.offsets();
        for (c, map) in maps.iter().enumerate() {
            let (lo, hi) = self.win[c];
            match map {
                AxisMap::Keep { out } => {
                    out_win[*out] = (lo, hi);
                    for k in lo..hi {
                        src_pos.insert((*out, k), off[c] + (k - lo) as usize);
                    }
                }
                AxisMap::Transform { out, kappa, shift, weight } => {
                    out_win[*out] = (-hi - shift, -lo - shift);
                    scale = scale * weight * rat_pow(q as u32, -(hi as i64));
                    let kern: Vec<Vec<usize>> = (0..q)
                        .map(|a| {
                            (0..q)
                                .map(|b| f.trace(f.mul(*kappa, f.mul(a as Fe, b as Fe))) as usize)
                                .collect()
                        })
                        .collect();
                    for j in lo..hi {
                        let pos = off[c] + (j - lo) as usize;
                        src_pos.insert((*out, -1 - shift - j), pos);
                        digit_kernel(&mut work, q, p, pos, &kern);
                    }
                }
            }
        }
        let n = check_window(&out_win, self.q())?;
        let strides: Vec<usize> = layout(&out_win)
            .iter()
            .map(|key| q.pow(src_pos[key] as u32))
            .collect();
        let mut vals = vec![0i128; n * p];
        vals.par_chunks_mut(p).enumerate().for_each(|(idx, out)| {
            let mut rest = idx;
            let mut src = 0usize;
            for s in &strides {
                src += (rest % q) * s;
                rest /= q;
            }
            out.copy_from_slice(&work[src * p..(src + 1) * p]);
        });
        let mut g = Grid { field: f.clone(), win: out_win, vals, scale };
        g.normalize();
        Ok(g)
    }

    /// Σ over cells of |value|² times the cell volume `Π w_c q^{-hi_c}`.
    pub fn l2_norm(&self, weights: &[BigRational]) -> CycNumber {
        let p = self.field.p();
        let mut acc = CycNumber::zero(p);
        for i in 0..self.npoints() {
            let v = self.value(i, p);
            if !v.is_zero() {
                acc = &acc + &(&v * &v.conj());
            }
        }
        let mut vol = BigRational::one();
        for (c, &(_, hi)) in self.win.iter().enumerate() {
            vol = vol * &weights[c] * rat_pow(self.q(), -(hi as i64));
        }
        acc.scale(&vol)
    }

    /// Only rational values.
    pub fn is_rational(&self) -> bool {
        self.vals.chunks(self.p()).all(|e| e[1..].iter().all(|&v| v == 0))
    }

    /// Rational value at a cell, if rational.
    pub fn rational_value(&self, idx: usize) -> Option<BigRational> {
        let e = self.entry(idx);
        e[1..]
            .iter()
            .all(|&v| v == 0)
            .then(|| &self.scale * BigRational::from_integer(BigInt::from(e[0])))
    }
}

fn digit_kernel(work: &mut [i128], q: usize, p: usize, pos: usize, kern: &[Vec<usize>]) {
    let s = q.pow(pos as u32);
    work.par_chunks_mut(s * q * p).for_each(|block| {
        let mut inp = vec![0i128; q * p];
        for r in 0..s {
            for b in 0..q {
                let at = (r + b * s) * p;
                inp[b * p..(b + 1) * p].copy_from_slice(&block[at..at + p]);
            }
            for a in 0..q {
                let at = (r + a * s) * p;
                let out = &mut block[at..at + p];
                out.iter_mut().for_each(|v| *v = 0);
                for b in 0..q {
                    rotate_add(out, &inp[b * p..(b + 1) * p], kern[a][b]);
                }
            }
        }
    });
}

pub fn offsets(win: &[(i32, i32)]) -> Vec<usize> {
    let mut acc = 0;
    win.iter()
        .map(|&(lo, hi)| {
            let o = acc;
            acc += (hi - lo) as usize;
            o
        })
        .collect()
}

pub fn layout(win: &[(i32, i32)]) -> Vec<(usize, i32)> {
    win.iter()
        .enumerate()
        .flat_map(|(c, &(lo, hi))| (lo..hi).map(move |k| (c, k)))
        .collect()
}
