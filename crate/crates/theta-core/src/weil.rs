//! The representation of SL₂(E) on Schwartz functions of K, in the dual-number
//! flavor and the classical (plain) flavor, and the commuting K*₁-action.
//!
//! Functions live on a [`Grid`] whose components are the Ē-coordinates of K:
//! `(u, v)` for plain rings and `(u, εu, v, εv)` for dual rings, where
//! `x = u + v·w` (split: `x = (u, v)`).

use num_rational::BigRational;
use num_traits::One;

use crate::cyclo::{rat_pow, CycNumber};
use crate::error::{Error, Result};
use crate::field::Field;
use crate::grid::{read_val, AxisMap, Grid};
use crate::local::{LocalElem, LocalRing, Mat2};
use crate::quad::{Flavor, QuadElem, QuadRing};

/// A Schwartz function on K, stored on the component grid of its context.
pub type SchwartzTable = Grid;

/// Work window of the coefficient ring used for operator data.
pub const WORK_LO: i32 = -12;
pub const WORK_HI: i32 = 20;

#[derive(Clone, Debug, PartialEq)]
pub enum Letter {
    Diag(LocalElem),
    Upper(LocalElem),
    Lower(LocalElem),
    W,
    WInv,
}

#[derive(Clone, Debug)]
pub struct WeilCtx {
    pub qr: QuadRing,
}

/// Windows of `x ↦ Φ(Lx)` from those of Φ, by lattice bounds.
pub fn pullback_windows(
    ring: &LocalRing,
    win: &[(i32, i32)],
    cols: &[Vec<LocalElem>],
    inv_cols: &[Vec<LocalElem>],
) -> Vec<(i32, i32)> {
    let m = win.len();
    (0..m)
        .map(|c| {
            let lo = (0..m)
                .filter_map(|d| ring.val_red(&inv_cols[d][c]).ok().map(|v| win[d].0 + v))
                .min();
            let hi = (0..m)
                .filter_map(|d| ring.val_red(&cols[c][d]).ok().map(|v| win[d].1 - v))
                .max()
                .expect("invertible map");
            (lo.unwrap_or(hi).min(hi), hi)
        })
        .collect()
}

impl WeilCtx {
    pub fn new(q: u32, flavor: Flavor, dual: bool) -> Result<WeilCtx> {
        let field = Field::of_order(q)?;
        let base = LocalRing::new(field, WORK_LO, WORK_HI, dual)?;
        WeilCtx::with_ring(QuadRing::new(base, flavor)?)
    }

    pub fn with_ring(qr: QuadRing) -> Result<WeilCtx> {
        if !qr.base.dual && qr.flavor == Flavor::Ramified {
            return Err(Error::Unsupported(
                "the classical ramified Weil representation is not modelled".into(),
            ));
        }
        Ok(WeilCtx { qr })
    }

    pub fn ring(&self) -> &LocalRing {
        &self.qr.base
    }

    pub fn dual(&self) -> bool {
        self.qr.base.dual
    }

    pub fn q(&self) -> u32 {
        self.qr.q()
    }

    pub fn ncomps(&self) -> usize {
        if self.dual() { 4 } else { 2 }
    }

    pub fn comps(&self, x: &QuadElem) -> Vec<LocalElem> {
        let r = self.ring();
        if self.dual() {
            vec![
                r.reduce_mod_eps(&x.u),
                r.epsilon_part(&x.u),
                r.reduce_mod_eps(&x.v),
                r.epsilon_part(&x.v),
            ]
        } else {
            vec![x.u, x.v]
        }
    }

    pub fn from_comps(&self, c: &[LocalElem]) -> QuadElem {
        let r = self.ring();
        if self.dual() {
            QuadElem {
                u: r.add(&c[0], &r.times_eps(&c[1])),
                v: r.add(&c[2], &r.times_eps(&c[3])),
            }
        } else {
            QuadElem { u: c[0], v: c[1] }
        }
    }

    pub fn basis(&self, c: usize) -> QuadElem {
        let r = self.ring();
        let mut comps = vec![r.zero(); self.ncomps()];
        comps[c] = r.one();
        self.from_comps(&comps)
    }

    /// For each input component: (output component, κ, shift) with
    /// ψ_E(⟨x, y⟩) = Π ψ(res(κ t^shift x_out y_in)).
    pub(crate) fn fourier_pairs(&self) -> Result<Vec<(usize, i32, LocalElem)>> {
        let r = self.ring();
        let m = self.ncomps();
        let mut out = Vec::with_capacity(m);
        for b in 0..m {
            let mut found = None;
            for a in 0..m {
                let pr = self.qr.pairing(&self.basis(a), &self.basis(b))?;
                if let Some(s) = read_val(r, &pr) {
                    if found.is_some() {
                        return Err(Error::InvalidParameter("pairing is not monomial".into()));
                    }
                    found = Some((a, s, pr));
                }
            }
            out.push(found.ok_or_else(|| Error::InvalidParameter("degenerate pairing".into()))?);
        }
        Ok(out)
    }

    /// Per-component measure weights of the self-dual Haar measure.
    pub fn weights(&self) -> Result<Vec<BigRational>> {
        let q = self.q();
        let pairs = self.fourier_pairs()?;
        let mut w = vec![BigRational::one(); pairs.len()];
        for (b, &(a, s, _)) in pairs.iter().enumerate() {
            if a == b {
                if s % 2 != 0 {
                    return Err(Error::Unsupported("odd self-pairing shift".into()));
                }
                w[b] = rat_pow(q, -(s as i64) / 2);
            } else if b > a {
                w[b] = rat_pow(q, -(s as i64));
            }
        }
        Ok(w)
    }

    /// δ of `t^n·O_K`.
    pub fn lattice_delta(&self, n: i32) -> Result<SchwartzTable> {
        Grid::constant(self.ring().field.clone(), vec![(n, n); self.ncomps()], 1)
    }

    /// δ of a box with separate exponents per Ē-coordinate.
    pub fn box_delta(&self, lows: &[i32]) -> Result<SchwartzTable> {
        Grid::constant(self.ring().field.clone(), lows.iter().map(|&n| (n, n)).collect(), 1)
    }

    pub fn eval(&self, phi: &SchwartzTable, x: &QuadElem) -> CycNumber {
        phi.eval(self.ring(), &self.comps(x), self.ring().field.p())
    }

    /// `x ↦ Φ(αx)` for α ∈ K*.
    pub fn pull_by(&self, alpha: &QuadElem, phi: &SchwartzTable) -> Result<SchwartzTable> {
        let ainv = self.qr.inv(alpha)?;
        let m = self.ncomps();
        let mut cols = Vec::with_capacity(m);
        let mut inv_cols = Vec::with_capacity(m);
        for c in 0..m {
            cols.push(self.comps(&self.qr.mul(alpha, &self.basis(c))?));
            inv_cols.push(self.comps(&self.qr.mul(&ainv, &self.basis(c))?));
        }
        let win = pullback_windows(self.ring(), &phi.win, &cols, &inv_cols);
        Ok(phi.pullback(self.ring(), &cols, win)?.shrink())
    }

    /// |α|_E (times ϑ(α) in the plain unramified flavor).
    pub fn diag_factor(&self, alpha: &LocalElem) -> Result<BigRational> {
        let v = self.ring().val_red(alpha)? as i64;
        let q = self.q();
        Ok(if self.dual() {
            rat_pow(q, -2 * v)
        } else if self.qr.flavor == Flavor::Unramified && v % 2 != 0 {
            -rat_pow(q, -v)
        } else {
            rat_pow(q, -v)
        })
    }

    pub fn act_diag(&self, alpha: &LocalElem, phi: &SchwartzTable) -> Result<SchwartzTable> {
        let factor = self.diag_factor(alpha)?;
        let out = self.pull_by(&self.qr.from_base(alpha), phi)?;
        Ok(out.scaled(&factor))
    }

    pub fn act_unipotent(&self, z: &LocalElem, phi: &SchwartzTable) -> Result<SchwartzTable> {
        let m = self.ncomps();
        let r = self.ring();
        let mut gram = vec![vec![r.zero(); m]; m];
        for c in 0..m {
            for c2 in c..m {
                let (ec, ec2) = (self.basis(c), self.basis(c2));
                let form = if c == c2 {
                    self.qr.norm(&ec)?
                } else {
                    self.qr.pairing(&ec, &ec2)?
                };
                gram[c][c2] = r.mul(z, &form)?;
            }
        }
        Ok(phi.apply_phase(r, &gram)?.shrink())
    }

    /// r(w)Φ(x) = ∫ ψ_E(⟨x, y⟩) Φ(y) dy.
    pub fn fourier(&self, phi: &SchwartzTable) -> Result<SchwartzTable> {
        let pairs = self.fourier_pairs()?;
        let w = self.weights()?;
        let r = self.ring();
        let maps: Vec<AxisMap> = pairs
            .iter()
            .enumerate()
            .map(|(b, &(a, s, ref pr))| {
                let kappa = if r.dual { r.eps_coeff(pr, s) } else { r.coeff(pr, s) };
                AxisMap::Transform { out: a, kappa, shift: s, weight: w[b].clone() }
            })
            .collect();
        Ok(phi.transform_axes(&maps)?.shrink())
    }

    pub fn act_letter(&self, l: &Letter, phi: &SchwartzTable) -> Result<SchwartzTable> {
        let r = self.ring();
        match l {
            Letter::Diag(a) => self.act_diag(a, phi),
            Letter::Upper(z) => self.act_unipotent(z, phi),
            Letter::W => self.fourier(phi),
            Letter::WInv => {
                let minus = r.neg(&r.one());
                self.act_diag(&minus, &self.fourier(phi)?)
            }
            Letter::Lower(z) => {
                let step = self.act_letter(&Letter::WInv, phi)?;
                let step = self.act_unipotent(&r.neg(z), &step)?;
                self.fourier(&step)
            }
        }
    }

    /// Applies a word, rightmost letter first.
    pub fn act_word(&self, word: &[Letter], phi: &SchwartzTable) -> Result<SchwartzTable> {
        let mut cur = phi.clone();
        for l in word.iter().rev() {
            cur = self.act_letter(l, &cur)?;
        }
        Ok(cur)
    }

    pub fn act(&self, g: &Mat2, phi: &SchwartzTable) -> Result<SchwartzTable> {
        self.act_word(&sl2_decompose(self.ring(), g)?, phi)
    }

    /// (α·Φ)(x) = Φ(αx) for α of norm one.
    pub fn k1_act(&self, alpha: &QuadElem, phi: &SchwartzTable) -> Result<SchwartzTable> {
        self.pull_by(alpha, phi)
    }
}

/// Writes `g ∈ SL₂(E)` as a word in diagonal, unipotent and Weyl letters,
/// pivoting on the entry of the first column with smaller valuation.
pub fn sl2_decompose(r: &LocalRing, g: &Mat2) -> Result<Vec<Letter>> {
    let det = r.mat_det(g)?;
    if det != r.one() {
        return Err(Error::InvalidParameter("matrix is not in SL2".into()));
    }
    let va = r.val_red(&g.a).ok();
    let vc = r.val_red(&g.c).ok();
    let use_c = match (va, vc) {
        (_, None) => false,
        (None, Some(_)) => true,
        (Some(a), Some(c)) => c < a,
    };
    let mut word = Vec::new();
    let push = |w: &mut Vec<Letter>, l: Letter| {
        let trivial = match &l {
            Letter::Upper(z) | Letter::Lower(z) => r.is_zero(z),
            Letter::Diag(a) => *a == r.one(),
            _ => false,
        };
        if !trivial {
            w.push(l);
        }
    };
    if use_c {
        // g = u(a/c)·w·diag(−c)·u(d/c)
        let ci = r.inv(&g.c)?;
        push(&mut word, Letter::Upper(r.mul(&g.a, &ci)?));
        push(&mut word, Letter::W);
        push(&mut word, Letter::Diag(r.neg(&g.c)));
        push(&mut word, Letter::Upper(r.mul(&g.d, &ci)?));
    } else {
        // g = lower(c/a)·diag(a)·u(b/a)
        let ai = r.inv(&g.a)?;
        push(&mut word, Letter::Lower(r.mul(&g.c, &ai)?));
        push(&mut word, Letter::Diag(g.a));
        push(&mut word, Letter::Upper(r.mul(&g.b, &ai)?));
    }
    Ok(word)
}

/// Random element of SL₂(E): k₁·diag(t^a)·k₂ with k₁, k₂ ∈ SL₂(O) having
/// entries below `t^hi` and |a| ≤ `spread`.
pub fn random_sl2<R: rand::Rng>(r: &LocalRing, rng: &mut R, hi: i32, spread: i32) -> Result<Mat2> {
    let k1 = r.random_sl2_integral(rng, hi)?;
    let k2 = r.random_sl2_integral(rng, hi)?;
    let a = rng.gen_range(-spread..=spread);
    let d = r.mat_diag(r.t_pow(a)?)?;
    r.mat_mul(&r.mat_mul(&k1, &d)?, &k2)
}

/// Replaces every lower unipotent letter by w·upper(−z)·w⁻¹.
pub fn expand_lower(r: &LocalRing, word: &[Letter]) -> Vec<Letter> {
    word.iter()
        .flat_map(|l| match l {
            Letter::Lower(z) => vec![Letter::W, Letter::Upper(r.neg(z)), Letter::WInv],
            other => vec![other.clone()],
        })
        .collect()
}

pub fn letter_matrix(r: &LocalRing, l: &Letter) -> Result<Mat2> {
    Ok(match l {
        Letter::Diag(a) => r.mat_diag(*a)?,
        Letter::Upper(z) => r.mat_upper(*z),
        Letter::Lower(z) => r.mat_lower(*z),
        Letter::W => r.mat_w(),
        Letter::WInv => r.mat_inv_sl2(&r.mat_w()),
    })
}

pub fn word_product(r: &LocalRing, word: &[Letter]) -> Result<Mat2> {
    let mut acc = r.mat_identity();
    for l in word {
        acc = r.mat_mul(&acc, &letter_matrix(r, l)?)?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cyclo::rat;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn plain_fourier_fixes_integral_delta() {
        for fl in [Flavor::Unramified, Flavor::Split] {
            let w = WeilCtx::new(3, fl, false).unwrap();
            let d = w.lattice_delta(0).unwrap();
            assert!(w.fourier(&d).unwrap().same_function(&d).unwrap());
        }
    }

    #[test]
    fn plain_ramified_rejected() {
        assert!(WeilCtx::new(3, Flavor::Ramified, false).is_err());
    }

    #[test]
    fn dual_diag_by_t() {
        let w = WeilCtx::new(3, Flavor::Unramified, true).unwrap();
        let r = w.ring();
        let d = w.lattice_delta(0).unwrap();
        let out = w.act_diag(&r.t_pow(1).unwrap(), &d).unwrap();
        let expect = w.lattice_delta(-1).unwrap().scaled(&rat(1, 9));
        assert!(out.same_function(&expect).unwrap());
    }

    #[test]
    fn plain_diag_by_t_has_sign() {
        let w = WeilCtx::new(3, Flavor::Unramified, false).unwrap();
        let r = w.ring();
        let out = w.act_diag(&r.t_pow(1).unwrap(), &w.lattice_delta(0).unwrap()).unwrap();
        let expect = w.lattice_delta(-1).unwrap().scaled(&rat(-1, 3));
        assert!(out.same_function(&expect).unwrap());
    }

    #[test]
    fn double_fourier_is_reflection() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for (fl, dual) in [
            (Flavor::Unramified, false),
            (Flavor::Split, false),
            (Flavor::Unramified, true),
            (Flavor::Ramified, true),
            (Flavor::Split, true),
        ] {
            let w = WeilCtx::new(3, fl, dual).unwrap();
            let win = vec![(-1, 1); w.ncomps()];
            let phi = Grid::random(w.ring().field.clone(), win, &mut rng).unwrap();
            let twice = w.fourier(&w.fourier(&phi).unwrap()).unwrap();
            let r = w.ring();
            let refl = w.act_diag(&r.neg(&r.one()), &phi).unwrap();
            assert!(twice.same_function(&refl).unwrap(), "{fl} dual={dual}");
        }
    }

    #[test]
    fn representation_law_small() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for (fl, dual) in [
            (Flavor::Unramified, false),
            (Flavor::Split, false),
            (Flavor::Unramified, true),
            (Flavor::Ramified, true),
            (Flavor::Split, true),
        ] {
            let w = WeilCtx::new(3, fl, dual).unwrap();
            let r = w.ring();
            let spread = if dual { 0 } else { 1 };
            for _ in 0..4 {
                let g = random_sl2(r, &mut rng, 2, spread).unwrap();
                let h = random_sl2(r, &mut rng, 2, spread).unwrap();
                let win = vec![(-1, 1); w.ncomps()];
                let phi = Grid::random(r.field.clone(), win, &mut rng).unwrap();
                let lhs = w.act(&g, &w.act(&h, &phi).unwrap()).unwrap();
                let rhs = w.act(&r.mat_mul(&g, &h).unwrap(), &phi).unwrap();
                assert!(lhs.same_function(&rhs).unwrap(), "{fl} dual={dual}");
            }
        }
    }

    #[test]
    fn k1_commutes_with_act() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for (fl, dual) in [(Flavor::Unramified, false), (Flavor::Split, true), (Flavor::Ramified, true)] {
            let w = WeilCtx::new(3, fl, dual).unwrap();
            let r = w.ring();
            for _ in 0..3 {
                let g = random_sl2(r, &mut rng, 2, 0).unwrap();
                let a = w.qr.random_norm_one(&mut rng, 3).unwrap();
                let win = vec![(-1, 1); w.ncomps()];
                let phi = Grid::random(r.field.clone(), win, &mut rng).unwrap();
                let lhs = w.k1_act(&a, &w.act(&g, &phi).unwrap()).unwrap();
                let rhs = w.act(&g, &w.k1_act(&a, &phi).unwrap()).unwrap();
                assert!(lhs.same_function(&rhs).unwrap(), "{fl} dual={dual}");
            }
        }
    }

    #[test]
    fn decompose_recomposes() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let f = Field::of_order(3).unwrap();
        let r = LocalRing::new(f, WORK_LO, WORK_HI, true).unwrap();
        for _ in 0..50 {
            let g = r.random_sl2_integral(&mut rng, 3).unwrap();
            let word = sl2_decompose(&r, &g).unwrap();
            assert!(word.len() <= 6);
            let back = word_product(&r, &word).unwrap();
            assert_eq!(r.mat_truncate(&back, 10), r.mat_truncate(&g, 10));
        }
        assert!(sl2_decompose(&r, &r.mat_identity()).unwrap().is_empty());
        let low = r.mat_lower(r.t_pow(1).unwrap());
        let word = sl2_decompose(&r, &low).unwrap();
        assert_eq!(expand_lower(&r, &word).len(), 3);
    }
}
