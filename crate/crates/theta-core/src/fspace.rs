//! The partial Fourier transform S₁ from Schwartz functions on K to the
//! twisted space 𝓕 of functions on K², and the action of SL₂(E) × K*₁ there.
//!
//! An element of 𝓕 is stored by its values on ε-free points `(x₁, x₂)`;
//! the component order of the grid is `(x₁u, x₁v, x₂u, x₂v)`. All other
//! values follow from f(x + n) = ψ_E(B(x, n)) f(x), n ∈ NK², where
//! B(v, v') = ½(⟨x₁, x₂'⟩ − ⟨x₁', x₂⟩).

use num_rational::BigRational;

use crate::cyclo::{rat_pow, CycNumber};
use crate::error::{Error, Result};
use crate::grid::{AxisMap, Grid};
use crate::local::{LocalElem, LocalRing, Mat2};
use crate::quad::{Flavor, QuadElem, QuadRing};
use crate::weil::{pullback_windows, SchwartzTable, WeilCtx};

/// A pair of elements of K, read as a row vector.
pub type KPair = [QuadElem; 2];

#[derive(Clone, Debug)]
pub struct FSpaceFn {
    pub grid: Grid,
}

/// Dual-flavor context for 𝓕.
#[derive(Clone, Debug)]
pub struct FSpace {
    pub w: WeilCtx,
}

impl FSpace {
    pub fn new(q: u32, flavor: Flavor) -> Result<FSpace> {
        Ok(FSpace { w: WeilCtx::new(q, flavor, true)? })
    }

    pub fn ring(&self) -> &LocalRing {
        self.w.ring()
    }

    pub fn qr(&self) -> &QuadRing {
        &self.w.qr
    }

    /// ε-free point from its four grid coordinates.
    pub fn point(&self, c: &[LocalElem]) -> KPair {
        [QuadElem { u: c[0], v: c[1] }, QuadElem { u: c[2], v: c[3] }]
    }

    /// Grid coordinates of the reduction of a point.
    pub fn coords(&self, v: &KPair) -> Vec<LocalElem> {
        let r = self.ring();
        [v[0].u, v[0].v, v[1].u, v[1].v].iter().map(|x| r.reduce_mod_eps(x)).collect()
    }

    fn unit_vector(&self, c: usize) -> KPair {
        let r = self.ring();
        let mut comps = vec![r.zero(); 4];
        comps[c] = r.one();
        self.point(&comps)
    }

    /// B(v, v').
    pub fn form_b(&self, v: &KPair, v2: &KPair) -> Result<LocalElem> {
        let r = self.ring();
        let qr = self.qr();
        let half = r.field.inv(r.field.from_int(2))?;
        let d = r.sub(&qr.pairing(&v[0], &v2[1])?, &qr.pairing(&v2[0], &v[1])?);
        Ok(r.scale(half, &d))
    }

    /// For each ε-component of a Schwartz table: (ε comp, paired reduced
    /// comp, shift, κ).
    fn eps_pairs(&self) -> Result<Vec<(usize, usize, i32, crate::field::Fe)>> {
        let r = self.ring();
        let pairs = self.w.fourier_pairs()?;
        Ok([1usize, 3]
            .iter()
            .map(|&b| {
                let (a, s, ref pr) = pairs[b];
                (b, a, s, r.eps_coeff(pr, s))
            })
            .collect())
    }

    /// S₁Φ(y₁, y₂) = ∫_{NK} ψ_E(⟨n, y₂⟩) Φ(y₁ + n) dn on ε-free points (the
    /// extra twist ψ_E(½⟨y₁, y₂⟩) is trivial there).
    pub fn partial_ft(&self, phi: &SchwartzTable) -> Result<FSpaceFn> {
        let weights = self.w.weights()?;
        let mut maps = vec![AxisMap::Keep { out: 0 }; 4];
        maps[2] = AxisMap::Keep { out: 1 };
        for (b, a, s, kappa) in self.eps_pairs()? {
            maps[b] = AxisMap::Transform { out: 2 + a / 2, kappa, shift: s, weight: weights[b].clone() };
        }
        Ok(FSpaceFn { grid: phi.transform_axes(&maps)?.shrink() })
    }

    pub fn inverse_ft(&self, f: &FSpaceFn) -> Result<SchwartzTable> {
        let weights = self.w.weights()?;
        let fe = &self.ring().field;
        let mut maps = vec![AxisMap::Keep { out: 0 }; 4];
        maps[1] = AxisMap::Keep { out: 2 };
        for (b, a, s, kappa) in self.eps_pairs()? {
            let weight: BigRational = rat_pow(self.w.q(), -(s as i64)) / &weights[b];
            maps[2 + a / 2] = AxisMap::Transform { out: b, kappa: fe.neg(kappa), shift: s, weight };
        }
        Ok(f.grid.transform_axes(&maps)?.shrink())
    }

    /// Value at an arbitrary point of K², through the twist rule.
    pub fn eval(&self, f: &FSpaceFn, v: &KPair) -> Result<CycNumber> {
        let qr = self.qr();
        let r = self.ring();
        let red = [qr.reduce_mod_eps(&v[0]), qr.reduce_mod_eps(&v[1])];
        let n = [qr.sub(&v[0], &red[0]), qr.sub(&v[1], &red[1])];
        let p = r.field.p();
        let phase = r.psi(&self.form_b(&red, &n)?, p);
        Ok(&phase * &f.grid.eval(r, &self.coords(&red), p))
    }

    /// `v ↦ f(T v)` for an E-linear automorphism T of K² given on points,
    /// with `inv` its inverse.
    fn pull_linear<F, G>(&self, f: &FSpaceFn, map: F, inv: G) -> Result<FSpaceFn>
    where
        F: Fn(&KPair) -> Result<KPair>,
        G: Fn(&KPair) -> Result<KPair>,
    {
        let r = self.ring();
        let qr = self.qr();
        let mut bar = Vec::with_capacity(4);
        let mut nil = Vec::with_capacity(4);
        let mut cols = Vec::with_capacity(4);
        let mut inv_cols = Vec::with_capacity(4);
        for c in 0..4 {
            let e = self.unit_vector(c);
            let img = map(&e)?;
            let red = [qr.reduce_mod_eps(&img[0]), qr.reduce_mod_eps(&img[1])];
            let n = [qr.sub(&img[0], &red[0]), qr.sub(&img[1], &red[1])];
            cols.push(self.coords(&red));
            inv_cols.push(self.coords(&inv(&e)?));
            bar.push(red);
            nil.push(n);
        }
        let mut gram = vec![vec![r.zero(); 4]; 4];
        for c in 0..4 {
            gram[c][c] = self.form_b(&bar[c], &nil[c])?;
            for c2 in c + 1..4 {
                gram[c][c2] = r.add(&self.form_b(&bar[c], &nil[c2])?, &self.form_b(&bar[c2], &nil[c])?);
            }
        }
        let win = pullback_windows(r, &f.grid.win, &cols, &inv_cols);
        let moved = f.grid.pullback(r, &cols, win)?;
        Ok(FSpaceFn { grid: moved.apply_phase(r, &gram)?.shrink() })
    }

    /// v·g for a row vector v.
    pub fn right_mul(&self, v: &KPair, g: &Mat2) -> Result<KPair> {
        let qr = self.qr();
        Ok([
            qr.add(&qr.scale(&g.a, &v[0])?, &qr.scale(&g.c, &v[1])?),
            qr.add(&qr.scale(&g.b, &v[0])?, &qr.scale(&g.d, &v[1])?),
        ])
    }

    /// r_𝓕(g)f(v) = f(vg).
    pub fn act(&self, g: &Mat2, f: &FSpaceFn) -> Result<FSpaceFn> {
        let r = self.ring();
        let ginv = r.mat_inv_sl2(g);
        let ginv_bar = Mat2 {
            a: r.reduce_mod_eps(&ginv.a),
            b: r.reduce_mod_eps(&ginv.b),
            c: r.reduce_mod_eps(&ginv.c),
            d: r.reduce_mod_eps(&ginv.d),
        };
        self.pull_linear(f, |v| self.right_mul(v, g), |v| self.right_mul(v, &ginv_bar))
    }

    /// (α·f)(x₁, x₂) = f(αx₁, αx₂).
    pub fn k1_act(&self, alpha: &QuadElem, f: &FSpaceFn) -> Result<FSpaceFn> {
        let qr = self.qr();
        let abar_inv = qr.inv(&qr.reduce_mod_eps(alpha))?;
        self.pull_linear(
            f,
            |v| Ok([qr.mul(alpha, &v[0])?, qr.mul(alpha, &v[1])?]),
            |v| Ok([qr.mul(&abar_inv, &v[0])?, qr.mul(&abar_inv, &v[1])?]),
        )
    }

    /// det(ι(v), v') = ι(x₁)x₂' − ι(x₂)x₁'.
    pub fn det_iota(&self, v: &KPair, v2: &KPair) -> Result<QuadElem> {
        let qr = self.qr();
        Ok(qr.sub(&qr.mul(&qr.iota(&v[0]), &v2[1])?, &qr.mul(&qr.iota(&v[1]), &v2[0])?))
    }

    pub fn same_function(&self, a: &FSpaceFn, b: &FSpaceFn) -> Result<bool> {
        a.grid.same_function(&b.grid)
    }

    /// Sanity check of the ε-free storage convention.
    pub fn check_point_is_reduced(&self, v: &KPair) -> Result<()> {
        let qr = self.qr();
        if qr.reduce_mod_eps(&v[0]) != v[0] || qr.reduce_mod_eps(&v[1]) != v[1] {
            return Err(Error::InvalidParameter("point has an ε-part".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weil::random_sl2;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const FLAVORS: [Flavor; 3] = [Flavor::Unramified, Flavor::Ramified, Flavor::Split];

    #[test]
    fn inverse_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for fl in FLAVORS {
            let fs = FSpace::new(3, fl).unwrap();
            let phi = Grid::random(fs.ring().field.clone(), vec![(-1, 1); 4], &mut rng).unwrap();
            let back = fs.inverse_ft(&fs.partial_ft(&phi).unwrap()).unwrap();
            assert!(back.same_function(&phi).unwrap(), "{fl}");
        }
    }

    #[test]
    fn intertwines_generators() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for fl in FLAVORS {
            let fs = FSpace::new(3, fl).unwrap();
            let r = fs.ring();
            let gens = vec![
                r.mat_diag(r.random_unit(&mut rng, 2, true)).unwrap(),
                r.mat_upper(r.random(&mut rng, -1, 2, true)),
                r.mat_lower(r.random(&mut rng, 0, 2, true)),
                r.mat_w(),
                random_sl2(r, &mut rng, 2, 0).unwrap(),
            ];
            for g in gens {
                let phi = Grid::random(r.field.clone(), vec![(-1, 1); 4], &mut rng).unwrap();
                let lhs = fs.partial_ft(&fs.w.act(&g, &phi).unwrap()).unwrap();
                let rhs = fs.act(&g, &fs.partial_ft(&phi).unwrap()).unwrap();
                assert!(fs.same_function(&lhs, &rhs).unwrap(), "{fl}");
            }
        }
    }

    #[test]
    fn k1_intertwines() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for fl in FLAVORS {
            let fs = FSpace::new(3, fl).unwrap();
            let a = fs.qr().random_norm_one(&mut rng, 3).unwrap();
            let phi = Grid::random(fs.ring().field.clone(), vec![(-1, 1); 4], &mut rng).unwrap();
            let lhs = fs.partial_ft(&fs.w.k1_act(&a, &phi).unwrap()).unwrap();
            let rhs = fs.k1_act(&a, &fs.partial_ft(&phi).unwrap()).unwrap();
            assert!(fs.same_function(&lhs, &rhs).unwrap(), "{fl}");
        }
    }
}
