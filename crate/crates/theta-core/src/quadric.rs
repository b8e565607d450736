//! The quadric Q(c₀) = {v : det(ι(v), v) = c₀} in K̄², the moment map η,
//! base points, the embedding of K*₁ in SL₂, and SL₂(O)-orbit labels.
//!
//! A point v = (x, y) is identified with the matrix `[[x.u, y.u], [x.v, y.v]]`
//! of its E-coordinates; the right SL₂-action is matrix multiplication and
//! the quadric becomes a determinant level set.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::Serialize;

use crate::cyclo::CycNumber;
use crate::error::{Error, Result};
use crate::field::{Fe, Field};
use crate::fspace::{FSpace, FSpaceFn, KPair};
use crate::local::{LocalElem, LocalRing, Mat2};
use crate::quad::{Flavor, QuadElem, QuadRing};
use crate::weil::{WORK_HI, WORK_LO};

/// η(x, y) = [[−⟨x,y⟩/2, −Nm(y)], [Nm(x), ⟨x,y⟩/2]].
pub fn eta(qr: &QuadRing, v: &KPair) -> Result<Mat2> {
    let r = &qr.base;
    let half = r.field.inv(r.field.from_int(2))?;
    let h = r.scale(half, &qr.pairing(&v[0], &v[1])?);
    Ok(Mat2 { a: r.neg(&h), b: r.neg(&qr.norm(&v[1])?), c: qr.norm(&v[0])?, d: h })
}

/// det(ι(v), v') = ι(x)y' − ι(y)x'.
pub fn det_iota(qr: &QuadRing, v: &KPair, v2: &KPair) -> Result<QuadElem> {
    Ok(qr.sub(&qr.mul(&qr.iota(&v[0]), &v2[1])?, &qr.mul(&qr.iota(&v[1]), &v2[0])?))
}

/// v·g for a row vector v.
pub fn right_mul(qr: &QuadRing, v: &KPair, g: &Mat2) -> Result<KPair> {
    Ok([
        qr.add(&qr.scale(&g.a, &v[0])?, &qr.scale(&g.c, &v[1])?),
        qr.add(&qr.scale(&g.b, &v[0])?, &qr.scale(&g.d, &v[1])?),
    ])
}

pub fn scale_pair(qr: &QuadRing, a: &QuadElem, v: &KPair) -> Result<KPair> {
    Ok([qr.mul(a, &v[0])?, qr.mul(a, &v[1])?])
}

/// The element of E underlying an ι-invariant element of K.
pub fn to_base(qr: &QuadRing, x: &QuadElem) -> Result<LocalElem> {
    let ok = match qr.flavor {
        Flavor::Split => x.u == x.v,
        _ => qr.base.is_zero(&x.v),
    };
    if !ok {
        return Err(Error::InvalidParameter("element is not ι-invariant".into()));
    }
    Ok(x.u)
}

/// v_c = (−c/2, 1).
pub fn base_point(qr: &QuadRing, c: &QuadElem) -> Result<KPair> {
    let r = &qr.base;
    let half = r.field.inv(r.field.from_int(2))?;
    Ok([qr.neg(&qr.scale_fe(half, c)), qr.one()])
}

/// i_c(a) with a·v_c = v_c·i_c(a).
pub fn k1_embedding(qr: &QuadRing, a: &QuadElem, c: &QuadElem) -> Result<Mat2> {
    let r = &qr.base;
    let f = &r.field;
    let cinv = qr.inv(c).map_err(|_| Error::InvalidParameter("c is not invertible".into()))?;
    let half = f.inv(f.from_int(2))?;
    let quarter = f.mul(half, half);
    let diag = to_base(qr, &qr.scale_fe(half, &qr.add(a, &qr.iota(a))))?;
    let diff = qr.sub(&qr.iota(a), a);
    Ok(Mat2 {
        a: diag,
        b: to_base(qr, &qr.mul(&diff, &cinv)?)?,
        c: to_base(qr, &qr.scale_fe(quarter, &qr.mul(&diff, c)?))?,
        d: diag,
    })
}

pub fn mat_trace(r: &LocalRing, m: &Mat2) -> LocalElem {
    r.add(&m.a, &m.d)
}

/// The five valuation classes of c₀ with integral spherical vectors.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, PartialOrd, Ord)]
#[serde(rename_all = "kebab-case")]
pub enum CaseKind {
    UnramifiedV0,
    UnramifiedV1,
    RamifiedV1,
    SplitV0,
    SplitV1,
}

impl CaseKind {
    pub const ALL: [CaseKind; 5] = [
        CaseKind::UnramifiedV0,
        CaseKind::UnramifiedV1,
        CaseKind::RamifiedV1,
        CaseKind::SplitV0,
        CaseKind::SplitV1,
    ];

    pub fn flavor(self) -> Flavor {
        match self {
            CaseKind::UnramifiedV0 | CaseKind::UnramifiedV1 => Flavor::Unramified,
            CaseKind::RamifiedV1 => Flavor::Ramified,
            CaseKind::SplitV0 | CaseKind::SplitV1 => Flavor::Split,
        }
    }

    /// Valuation of γ where c₀ = γ·w (or (−γ, γ) when split).
    pub fn gamma_val(self) -> i32 {
        match self {
            CaseKind::UnramifiedV1 | CaseKind::SplitV1 => 1,
            _ => 0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CaseKind::UnramifiedV0 => "unramified-v0",
            CaseKind::UnramifiedV1 => "unramified-v1",
            CaseKind::RamifiedV1 => "ramified-v1",
            CaseKind::SplitV0 => "split-v0",
            CaseKind::SplitV1 => "split-v1",
        }
    }
}

impl std::str::FromStr for CaseKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<CaseKind> {
        CaseKind::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown case '{s}'")))
    }
}

/// Label of an SL₂(O)-orbit in the η-integral part of the quadric.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Orbit {
    /// The integral points, a single orbit.
    Integral,
    /// Index into the residue norm-one list μ_{q+1}.
    Lambda(usize),
    /// (tⁿ, t⁻ⁿ)·M(b₀)(O).
    Shift(i32),
    /// (tⁿ, t⁻ⁿ)·O(b₀, λ), λ ∈ P¹(k) with `None` = ∞.
    Line { shift: i32, lambda: Option<Fe> },
}

impl fmt::Display for Orbit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Orbit::Integral => write!(f, "O"),
            Orbit::Lambda(i) => write!(f, "O(mu^{i})"),
            Orbit::Shift(n) => write!(f, "s^{n}O"),
            Orbit::Line { shift, lambda: Some(l) } => write!(f, "s^{shift}O({l})"),
            Orbit::Line { shift, lambda: None } => write!(f, "s^{shift}O(inf)"),
        }
    }
}

/// (tⁿ, t⁻ⁿ)O(∞) = (t^{n−1}, t^{1−n})O(0); keeps the shift nearest 0.
pub fn canon_line(lambda: Option<Fe>, shift: i32) -> Orbit {
    match lambda {
        None if (shift - 1).abs() < shift.abs() => Orbit::Line { shift: shift - 1, lambda: Some(0) },
        Some(0) if (shift + 1).abs() < shift.abs() => Orbit::Line { shift: shift + 1, lambda: None },
        _ => Orbit::Line { shift, lambda },
    }
}

/// Default range of split shifts carried by orbit functions.
pub const SHIFT_WINDOW: i32 = 2;

/// Copies an element between rings over the same field (ε-part dropped).
pub fn lift_elem(from: &LocalRing, to: &LocalRing, x: &LocalElem) -> Result<LocalElem> {
    let mut out = to.zero();
    for k in from.lo..from.hi {
        let c = from.coeff(x, k);
        if c != 0 {
            to.set_coeff(&mut out, k, c)?;
        }
    }
    Ok(out)
}

pub fn lift_pair(from: &LocalRing, to: &LocalRing, v: &KPair) -> Result<KPair> {
    let one = |x: &QuadElem| -> Result<QuadElem> {
        Ok(QuadElem { u: lift_elem(from, to, &x.u)?, v: lift_elem(from, to, &x.v)? })
    };
    Ok([one(&v[0])?, one(&v[1])?])
}

/// An SL₂(O_E)-invariant function on Q(c₀), stored by orbit.
#[derive(Clone, Debug)]
pub struct FC0Fn {
    pub kind: CaseKind,
    pub coeffs: BTreeMap<Orbit, CycNumber>,
}

impl FC0Fn {
    pub fn zero(kind: CaseKind) -> FC0Fn {
        FC0Fn { kind, coeffs: BTreeMap::new() }
    }

    pub fn indicator(kind: CaseKind, o: Orbit) -> FC0Fn {
        let mut f = FC0Fn::zero(kind);
        f.coeffs.insert(o, CycNumber::one(1));
        f
    }

    pub fn get(&self, o: &Orbit) -> CycNumber {
        self.coeffs.get(o).cloned().unwrap_or_else(|| CycNumber::zero(1))
    }

    pub fn add_at(&mut self, o: Orbit, c: &CycNumber) {
        let cur = self.get(&o);
        let next = &cur + c;
        if next.is_zero() {
            self.coeffs.remove(&o);
        } else {
            self.coeffs.insert(o, next);
        }
    }

    pub fn add(&self, other: &FC0Fn) -> FC0Fn {
        let mut out = self.clone();
        for (o, c) in &other.coeffs {
            out.add_at(*o, c);
        }
        out
    }

    pub fn scale(&self, c: &CycNumber) -> FC0Fn {
        let mut out = FC0Fn::zero(self.kind);
        for (o, v) in &self.coeffs {
            out.add_at(*o, &(v * c));
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.values().all(|c| c.is_zero())
    }

    pub fn same(&self, other: &FC0Fn) -> bool {
        self.add(&other.scale(&CycNumber::from_int(1, -1))).is_zero()
    }

    /// Fails when the support leaves shifts |n| ≤ `w`.
    pub fn check_window(&self, w: i32) -> Result<()> {
        for o in self.coeffs.keys() {
            let n = match o {
                Orbit::Shift(n) | Orbit::Line { shift: n, .. } => *n,
                _ => 0,
            };
            if n.abs() > w {
                return Err(Error::WindowExceeded(format!("orbit {o} outside shift window {w}")));
            }
        }
        Ok(())
    }

    pub fn describe(&self) -> Vec<(String, String)> {
        self.coeffs.iter().map(|(o, c)| (o.to_string(), c.to_string())).collect()
    }
}

/// P¹(k) in the order 0, 1, …, ∞ (field index order).
pub fn p1_points(field: &Field) -> Vec<Option<Fe>> {
    field.elements().map(Some).chain(std::iter::once(None)).collect()
}

#[derive(Clone, Debug)]
pub struct Quadric {
    pub qr: QuadRing,
    pub kind: CaseKind,
    pub c0: QuadElem,
    /// Determinant of the coordinate matrix on the quadric.
    pub det: LocalElem,
    /// μ_{q+1} in generator order (unramified only).
    pub lambdas: Vec<QuadElem>,
}

impl Quadric {
    /// c₀ = γ·w (non-split) or (−γ, γ) (split), γ ∈ E.
    pub fn new(qr: QuadRing, gamma: LocalElem) -> Result<Quadric> {
        let r = &qr.base;
        if r.dual {
            return Err(Error::InvalidParameter("the quadric lives over the reduced ring".into()));
        }
        let vg = r
            .val_red(&gamma)
            .map_err(|_| Error::Unsupported("c0 = 0 (nilpotent orbit)".into()))?;
        let kind = match (qr.flavor, vg) {
            (Flavor::Unramified, 0) => CaseKind::UnramifiedV0,
            (Flavor::Unramified, 1) => CaseKind::UnramifiedV1,
            (Flavor::Ramified, 0) => CaseKind::RamifiedV1,
            (Flavor::Split, 0) => CaseKind::SplitV0,
            (Flavor::Split, 1) => CaseKind::SplitV1,
            _ => {
                return Err(Error::Unsupported(format!(
                    "{} c0 with v(gamma) = {vg} is outside the tabulated cases",
                    qr.flavor
                )))
            }
        };
        let (c0, det) = match qr.flavor {
            Flavor::Split => (QuadElem { u: r.neg(&gamma), v: gamma }, gamma),
            _ => {
                let half = r.field.inv(r.field.from_int(2))?;
                (QuadElem { u: r.zero(), v: gamma }, r.scale(half, &gamma))
            }
        };
        let lambdas = if kind == CaseKind::UnramifiedV1 { qr.residue_norm_one_cyclic()? } else { Vec::new() };
        Ok(Quadric { qr, kind, c0, det, lambdas })
    }

    /// Like [`Quadric::standard`] with a chosen nonsquare (unramified) or
    /// unit twist u in w² = u·t (ramified).
    pub fn variant(q: u32, kind: CaseKind, gamma0: Fe, twist: Option<Fe>) -> Result<Quadric> {
        let field = Field::of_order(q)?;
        let r = LocalRing::new(field, WORK_LO, WORK_HI, false)?;
        let gamma = r.monomial(gamma0, kind.gamma_val())?;
        let qr = match (kind.flavor(), twist) {
            (_, None) => QuadRing::new(r, kind.flavor())?,
            (Flavor::Unramified, Some(d)) => QuadRing::unramified_with(r, d)?,
            (Flavor::Ramified, Some(u)) => QuadRing::ramified_with(r, u)?,
            (Flavor::Split, Some(_)) => {
                return Err(Error::InvalidParameter("the split algebra has no twist".into()))
            }
        };
        Quadric::new(qr, gamma)
    }

    /// Checks antiinvariance before building.
    pub fn from_c0(qr: QuadRing, c0: &QuadElem) -> Result<Quadric> {
        if !qr.is_antiinvariant(c0) {
            return Err(Error::InvalidParameter("c0 must satisfy Tr(c0) = 0".into()));
        }
        let gamma = c0.v;
        Quadric::new(qr, gamma)
    }

    /// Standard setup: smallest nonsquare, γ = γ₀·t^{v} for a constant γ₀.
    pub fn standard(q: u32, kind: CaseKind, gamma0: Fe) -> Result<Quadric> {
        let field = Field::of_order(q)?;
        let r = LocalRing::new(field, WORK_LO, WORK_HI, false)?;
        let gamma = r.monomial(gamma0, kind.gamma_val())?;
        let qr = QuadRing::new(r, kind.flavor())?;
        Quadric::new(qr, gamma)
    }

    pub fn ring(&self) -> &LocalRing {
        &self.qr.base
    }

    pub fn q(&self) -> u32 {
        self.qr.q()
    }

    pub fn to_matrix(&self, v: &KPair) -> Mat2 {
        Mat2 { a: v[0].u, b: v[1].u, c: v[0].v, d: v[1].v }
    }

    pub fn from_matrix(&self, m: &Mat2) -> KPair {
        [QuadElem { u: m.a, v: m.c }, QuadElem { u: m.b, v: m.d }]
    }

    pub fn on_quadric(&self, v: &KPair) -> Result<bool> {
        Ok(det_iota(&self.qr, v, v)? == self.c0)
    }

    pub fn is_integral(&self, v: &KPair) -> bool {
        self.qr.is_integral(&v[0]) && self.qr.is_integral(&v[1])
    }

    pub fn eta_integral(&self, v: &KPair) -> Result<bool> {
        Ok(self.ring().mat_is_integral(&eta(&self.qr, v)?))
    }

    /// All points of Q(c₀)(O_K̄) mod t^m: coordinate matrices over O/t^m
    /// with determinant ≡ det mod t^m.
    pub fn quadric_points(&self, m: i32) -> Result<Vec<KPair>> {
        let r = self.ring();
        let elems = r.enumerate(0, m, false)?;
        let target = r.truncate(&self.det, m);
        let mut out = Vec::new();
        for a in &elems {
            for b in &elems {
                for c in &elems {
                    for d in &elems {
                        let mat = Mat2 { a: *a, b: *b, c: *c, d: *d };
                        if r.truncate(&r.mat_det(&mat)?, m) == target {
                            out.push(self.from_matrix(&mat));
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    /// Orbit of an η-integral point, `None` off the η-integral locus.
    pub fn classify(&self, v: &KPair) -> Result<Option<Orbit>> {
        if !self.eta_integral(v)? {
            return Ok(None);
        }
        let r = self.ring();
        Ok(Some(match self.kind {
            CaseKind::UnramifiedV0 | CaseKind::RamifiedV1 => Orbit::Integral,
            CaseKind::UnramifiedV1 => Orbit::Lambda(self.lambda_index(v)?),
            CaseKind::SplitV0 | CaseKind::SplitV1 => {
                let val = |x: &LocalElem| r.val_red(x).unwrap_or(i32::MAX);
                let top = val(&v[0].u).min(val(&v[1].u));
                let bottom = val(&v[0].v).min(val(&v[1].v));
                let (lo, hi) = (-bottom, top);
                if lo > hi {
                    return Err(Error::InvalidParameter("η-integral point with no integral shift".into()));
                }
                let n = if lo <= 0 && 0 <= hi { 0 } else if lo > 0 { lo } else { hi };
                if self.kind == CaseKind::SplitV0 {
                    Orbit::Shift(n)
                } else {
                    let w = self.shift_point(-n, v)?;
                    canon_line(self.line_of(&w)?, n)
                }
            }
        }))
    }

    /// (tⁿ, t⁻ⁿ)·v in the split algebra.
    pub fn shift_point(&self, n: i32, v: &KPair) -> Result<KPair> {
        scale_pair(&self.qr, &self.qr.shift_element(n)?, v)
    }

    /// λ ∈ P¹(k) with rows x.u ≡ λ·x.v, y.u ≡ λ·y.v mod t (integral point).
    fn line_of(&self, v: &KPair) -> Result<Option<Fe>> {
        let r = self.ring();
        let f = &r.field;
        let res = |x: &LocalElem| r.coeff(x, 0);
        let (x1, x2, y1, y2) = (res(&v[0].u), res(&v[0].v), res(&v[1].u), res(&v[1].v));
        if x2 == 0 && y2 == 0 {
            return Ok(None);
        }
        let lambda = if x2 != 0 { f.div(x1, x2)? } else { f.div(y1, y2)? };
        if f.sub(x1, f.mul(lambda, x2)) != 0 || f.sub(y1, f.mul(lambda, y2)) != 0 {
            return Err(Error::InvalidParameter("columns are not proportional mod t".into()));
        }
        Ok(Some(lambda))
    }

    /// Index of λ ∈ μ_{q+1} with ι(x) ≡ λx and ι(y) ≡ λy mod t.
    fn lambda_index(&self, v: &KPair) -> Result<usize> {
        let qr = &self.qr;
        for (i, l) in self.lambdas.iter().enumerate() {
            let ok = v.iter().all(|x| {
                let diff = qr.sub(&qr.iota(x), &qr.mul(l, x).expect("integral"));
                qr.is_zero(&qr.truncate(&diff, 1))
            });
            if ok {
                return Ok(i);
            }
        }
        Err(Error::InvalidParameter("no residue eigenvalue matches the point".into()))
    }

    /// A point of the orbit.
    pub fn representative(&self, o: &Orbit) -> Result<KPair> {
        let r = self.ring();
        let qr = &self.qr;
        match (*o, self.kind) {
            (Orbit::Integral, CaseKind::UnramifiedV0 | CaseKind::RamifiedV1) => base_point(qr, &self.c0),
            (Orbit::Lambda(i), CaseKind::UnramifiedV1) => {
                let lambda = self.lambdas.get(i).ok_or_else(|| Error::InvalidParameter("λ index".into()))?;
                let f = &r.field;
                for a in f.elements() {
                    for b in f.elements() {
                        let x = QuadElem { u: r.constant(a), v: r.constant(b) };
                        if qr.val_red(&x) != Ok(0) {
                            continue;
                        }
                        let diff = qr.sub(&qr.iota(&x), &qr.mul(lambda, &x)?);
                        if qr.is_zero(&qr.truncate(&diff, 1)) {
                            return Ok(self.complete_point(&x)?);
                        }
                    }
                }
                Err(Error::InvalidParameter("no residue point for λ".into()))
            }
            (Orbit::Shift(n), CaseKind::SplitV0) => self.shift_point(n, &base_point(qr, &self.c0)?),
            (Orbit::Line { shift, lambda }, CaseKind::SplitV1) => {
                let m = match lambda {
                    Some(l) => Mat2 { a: r.constant(l), b: r.neg(&self.det), c: r.one(), d: r.zero() },
                    None => Mat2 { a: r.one(), b: r.zero(), c: r.zero(), d: self.det },
                };
                self.shift_point(shift, &self.from_matrix(&m))
            }
            _ => Err(Error::InvalidParameter(format!("orbit {o} does not occur in case {}", self.kind.name()))),
        }
    }

    /// A point (x, y) with y ≡ 0 mod t, for a unit x.
    fn complete_point(&self, x: &QuadElem) -> Result<KPair> {
        let r = self.ring();
        let y = if r.val_red(&x.u) == Ok(0) {
            QuadElem { u: r.zero(), v: r.mul(&self.det, &r.inv(&x.u)?)? }
        } else {
            QuadElem { u: r.neg(&r.mul(&self.det, &r.inv(&x.v)?)?), v: r.zero() }
        };
        Ok([*x, y])
    }

    /// δ_O: the indicator of the integral points.
    pub fn delta_o(&self) -> FC0Fn {
        let mut f = FC0Fn::zero(self.kind);
        for o in self.integral_orbits() {
            f.add_at(o, &CycNumber::one(1));
        }
        f
    }

    pub fn eval(&self, f: &FC0Fn, v: &KPair) -> Result<CycNumber> {
        Ok(match self.classify(v)? {
            Some(o) => f.get(&o),
            None => CycNumber::zero(1),
        })
    }

    /// (α·f)(v) = f(αv) for α ∈ K*₁.
    pub fn k1_act(&self, alpha: &QuadElem, f: &FC0Fn) -> Result<FC0Fn> {
        let inv = self.qr.inv(alpha)?;
        let mut out = FC0Fn::zero(self.kind);
        for (o, c) in &f.coeffs {
            let moved = scale_pair(&self.qr, &inv, &self.representative(o)?)?;
            let label = self
                .classify(&moved)?
                .ok_or_else(|| Error::InvalidParameter("K*₁ left the η-integral locus".into()))?;
            out.add_at(label, c);
        }
        Ok(out)
    }

    /// Restriction of an element of 𝓕 to Q(c₀), read off on orbit
    /// representatives; fails if the values are not constant on orbits.
    pub fn coinvariant_project(&self, fs: &FSpace, f: &FSpaceFn) -> Result<FC0Fn> {
        let from = self.ring();
        let to = fs.ring();
        if fs.qr().flavor != self.qr.flavor || lift_elem(from, to, &self.qr.d)? != fs.qr().d {
            return Err(Error::InvalidParameter("𝓕 and the quadric use different algebras".into()));
        }
        let probes = crate::classical::sl2_mod(from, 1)?;
        let mut out = FC0Fn::zero(self.kind);
        for o in self.orbit_basis(SHIFT_WINDOW + 1) {
            let rep = self.representative(&o)?;
            let value = fs.eval(f, &lift_pair(from, to, &rep)?)?;
            for k in probes.iter().step_by(5) {
                let w = lift_pair(from, to, &right_mul(&self.qr, &rep, k)?)?;
                if !(&fs.eval(f, &w)? - &value).is_zero() {
                    return Err(Error::InvalidParameter(format!("not constant on the orbit {o}")));
                }
            }
            out.add_at(o, &value);
        }
        out.check_window(SHIFT_WINDOW)?;
        Ok(out)
    }

    /// Orbits meeting the integral points, plus shifts |n| ≤ `shifts` in the
    /// split cases, in a fixed order.
    pub fn orbit_basis(&self, shifts: i32) -> Vec<Orbit> {
        let f = &self.ring().field;
        match self.kind {
            CaseKind::UnramifiedV0 | CaseKind::RamifiedV1 => vec![Orbit::Integral],
            CaseKind::UnramifiedV1 => (0..self.lambdas.len()).map(Orbit::Lambda).collect(),
            CaseKind::SplitV0 => (-shifts..=shifts).map(Orbit::Shift).collect(),
            CaseKind::SplitV1 => {
                let mut out = Vec::new();
                for n in -shifts..=shifts {
                    for l in p1_points(f) {
                        let o = canon_line(l, n);
                        if !out.contains(&o) {
                            out.push(o);
                        }
                    }
                }
                out.sort();
                out
            }
        }
    }

    /// Orbits of the integral points (shift 0 block).
    pub fn integral_orbits(&self) -> Vec<Orbit> {
        match self.kind {
            CaseKind::SplitV0 => vec![Orbit::Shift(0)],
            CaseKind::SplitV1 => p1_points(&self.ring().field).into_iter().map(|l| canon_line(l, 0)).collect(),
            _ => self.orbit_basis(0),
        }
    }

    /// Labels the points of Q(c₀)(O_K̄) mod t^m.
    pub fn orbit_decompose(&self, m: i32) -> Result<BTreeMap<Orbit, Vec<KPair>>> {
        let mut out: BTreeMap<Orbit, Vec<KPair>> = BTreeMap::new();
        for v in self.quadric_points(m)? {
            let o = self
                .classify(&v)?
                .ok_or_else(|| Error::InvalidParameter("integral point off the η-integral locus".into()))?;
            out.entry(o).or_default().push(v);
        }
        Ok(out)
    }

    /// Orbit partition of Q(c₀)(O_K̄) mod t^m by closure under u(ζt^j) and
    /// lower(ζt^j), ζ running over an F_p-basis of k.
    pub fn orbit_closure(&self, m: i32) -> Result<Vec<Vec<KPair>>> {
        let r = self.ring();
        let pts = self.quadric_points(m)?;
        let index: HashMap<KPair, usize> = pts.iter().enumerate().map(|(i, v)| (*v, i)).collect();
        let f = &r.field;
        let mut gens = Vec::new();
        for i in 0..f.r() {
            let mut c = vec![0u32; f.r() as usize];
            c[i as usize] = 1;
            let zeta = f.from_coeffs(&c);
            for j in 0..m {
                let z = r.monomial(zeta, j)?;
                gens.push(r.mat_upper(z));
                gens.push(r.mat_lower(z));
            }
        }
        let mut parent: Vec<usize> = (0..pts.len()).collect();
        fn find(p: &mut [usize], mut i: usize) -> usize {
            while p[i] != i {
                p[i] = p[p[i]];
                i = p[i];
            }
            i
        }
        for (i, v) in pts.iter().enumerate() {
            for g in &gens {
                let w = right_mul(&self.qr, v, g)?;
                let w = [self.qr.truncate(&w[0], m), self.qr.truncate(&w[1], m)];
                let j = *index.get(&w).ok_or_else(|| Error::InvalidParameter("action left the quadric".into()))?;
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
        let mut classes: BTreeMap<usize, Vec<KPair>> = BTreeMap::new();
        for i in 0..pts.len() {
            let root = find(&mut parent, i);
            classes.entry(root).or_default().push(pts[i]);
        }
        Ok(classes.into_values().collect())
    }

    /// Labels are constant on closure classes and separate them.
    pub fn labels_match_closure(&self, m: i32) -> Result<bool> {
        let classes = self.orbit_closure(m)?;
        let mut seen = Vec::new();
        for cls in &classes {
            let labels: Vec<Option<Orbit>> = cls.iter().map(|v| self.classify(v)).collect::<Result<_>>()?;
            let first = labels[0];
            if first.is_none() || labels.iter().any(|l| *l != first) || seen.contains(&first) {
                return Ok(false);
            }
            seen.push(first);
        }
        Ok(true)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn residue_count_unramified_unit() {
        let qd = Quadric::standard(3, CaseKind::UnramifiedV0, 1).unwrap();
        // oracle: exhaust pairs of F_9 directly
        let mut count = 0;
        let elems = qd.qr.lattice_enumerate(0, 1).unwrap();
        for x in &elems {
            for y in &elems {
                let d = det_iota(&qd.qr, &[*x, *y], &[*x, *y]).unwrap();
                if qd.qr.truncate(&qd.qr.sub(&d, &qd.c0), 1) == qd.qr.zero() {
                    count += 1;
                }
            }
        }
        assert_eq!(count, 24);
        assert_eq!(qd.quadric_points(1).unwrap().len(), 24);
    }

    #[test]
    fn orbit_counts_match_labels() {
        for (kind, n) in [
            (CaseKind::UnramifiedV0, 1),
            (CaseKind::UnramifiedV1, 4),
            (CaseKind::RamifiedV1, 1),
            (CaseKind::SplitV0, 1),
            (CaseKind::SplitV1, 4),
        ] {
            let qd = Quadric::standard(3, kind, 1).unwrap();
            let classes = qd.orbit_closure(2).unwrap();
            assert_eq!(classes.len(), n, "{kind:?}");
            assert!(qd.labels_match_closure(2).unwrap(), "{kind:?}");
            let labels: Vec<Orbit> = qd.orbit_decompose(2).unwrap().into_keys().collect();
            let mut expect = qd.integral_orbits();
            expect.sort();
            assert_eq!(labels, expect, "{kind:?}");
        }
    }

    #[test]
    fn representatives_classify_back() {
        for kind in CaseKind::ALL {
            let qd = Quadric::standard(3, kind, 1).unwrap();
            for o in qd.orbit_basis(2) {
                let v = qd.representative(&o).unwrap();
                assert!(qd.on_quadric(&v).unwrap(), "{kind:?} {o}");
                assert_eq!(qd.classify(&v).unwrap(), Some(o), "{kind:?}");
            }
        }
    }

    #[test]
    fn infinity_is_a_shifted_zero() {
        let qd = Quadric::standard(3, CaseKind::SplitV1, 1).unwrap();
        let v = qd.representative(&Orbit::Line { shift: 0, lambda: None }).unwrap();
        let moved = qd.shift_point(1, &v).unwrap();
        assert!(qd.is_integral(&moved));
        assert_eq!(qd.classify(&moved).unwrap(), Some(canon_line(Some(0), 0)));
        assert_eq!(canon_line(None, 1), Orbit::Line { shift: 0, lambda: Some(0) });
    }

    #[test]
    fn c0_must_be_antiinvariant() {
        let qd = Quadric::standard(3, CaseKind::UnramifiedV0, 1).unwrap();
        assert!(Quadric::from_c0(qd.qr.clone(), &qd.qr.one()).is_err());
        assert!(matches!(
            Quadric::from_c0(qd.qr.clone(), &qd.qr.zero()),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn base_point_and_embedding() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for kind in [CaseKind::UnramifiedV0, CaseKind::SplitV0] {
            let qd = Quadric::standard(3, kind, 1).unwrap();
            let qr = &qd.qr;
            let r = qd.ring();
            let vc = base_point(qr, &qd.c0).unwrap();
            assert!(qd.on_quadric(&vc).unwrap());
            let e = eta(qr, &vc).unwrap();
            let c2 = to_base(qr, &qr.mul(&qd.c0, &qd.c0).unwrap()).unwrap();
            let quarter = r.field.inv(r.field.from_int(4)).unwrap();
            assert_eq!(e.b, r.neg(&r.one()));
            assert_eq!(e.c, r.neg(&r.scale(quarter, &c2)));
            assert!(r.is_zero(&e.a) && r.is_zero(&e.d));
            for _ in 0..4 {
                let a = &qr.random_norm_one(&mut rng, 3).unwrap();
                let i = k1_embedding(qr, a, &qd.c0).unwrap();
                let lhs = scale_pair(qr, a, &vc).unwrap();
                let rhs = right_mul(qr, &vc, &i).unwrap();
                let trunc = |v: &KPair| [qr.truncate(&v[0], 6), qr.truncate(&v[1], 6)];
                assert_eq!(trunc(&lhs), trunc(&rhs));
                assert_eq!(r.truncate(&r.mat_det(&i).unwrap(), 6), r.one());
            }
        }
    }

    fn random_pair<R: rand::Rng>(qr: &QuadRing, rng: &mut R) -> KPair {
        [qr.random(rng, -1, 3), qr.random(rng, -1, 3)]
    }

    #[test]
    fn eta_identity_and_equivariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        for fl in [Flavor::Unramified, Flavor::Ramified, Flavor::Split] {
            let r = LocalRing::new(Field::of_order(3).unwrap(), WORK_LO, WORK_HI, false).unwrap();
            let qr = QuadRing::new(r.clone(), fl).unwrap();
            for _ in 0..50 {
                let v = random_pair(&qr, &mut rng);
                let (a, b, c) = (r.random(&mut rng, -1, 3, false), r.random(&mut rng, -1, 3, false), r.random(&mut rng, -1, 3, false));
                let lie = Mat2 { a, b, c, d: r.neg(&a) };
                let lhs = mat_trace(&r, &r.mat_mul(&eta(&qr, &v).unwrap(), &lie).unwrap());
                let rhs = det_iota(&qr, &v, &right_mul(&qr, &v, &lie).unwrap()).unwrap();
                assert_eq!(qr.from_base(&lhs), rhs, "{fl}");
                let g = r.random_sl2_integral(&mut rng, 4).unwrap();
                let moved = eta(&qr, &right_mul(&qr, &v, &g).unwrap()).unwrap();
                let conj = r.mat_mul(&r.mat_mul(&r.mat_inv_sl2(&g), &eta(&qr, &v).unwrap()).unwrap(), &g).unwrap();
                assert_eq!(r.mat_truncate(&moved, 4), r.mat_truncate(&conj, 4), "{fl}");
            }
        }
    }

    #[test]
    fn split_points_are_matrices_of_fixed_determinant() {
        let qd = Quadric::standard(3, CaseKind::SplitV0, 2).unwrap();
        let r = qd.ring();
        let pts = qd.quadric_points(1).unwrap();
        assert_eq!(pts.len(), 24);
        for v in &pts {
            let d = r.mat_det(&qd.to_matrix(v)).unwrap();
            assert_eq!(r.truncate(&d, 1), r.truncate(&qd.det, 1));
        }
    }

    #[test]
    fn residue_quadric_is_a_torsor() {
        for kind in [CaseKind::UnramifiedV0, CaseKind::SplitV0] {
            let qd = Quadric::standard(3, kind, 1).unwrap();
            let qr = &qd.qr;
            let vc = base_point(qr, &qd.c0).unwrap();
            let trunc = |v: &KPair| [qr.truncate(&v[0], 1), qr.truncate(&v[1], 1)];
            let mut image: Vec<KPair> = crate::classical::sl2_mod(qd.ring(), 1)
                .unwrap()
                .iter()
                .map(|g| trunc(&right_mul(qr, &vc, g).unwrap()))
                .collect();
            image.sort_by_key(|v| format!("{v:?}"));
            image.dedup();
            assert_eq!(image.len(), 24);
            let pts = qd.quadric_points(1).unwrap();
            assert!(pts.iter().all(|p| image.contains(p)));
            // η-fibres are residue K*₁-orbits
            let units: Vec<QuadElem> = qr.norm_one_elements(1).unwrap();
            let mut fibres: HashMap<Mat2, Vec<KPair>> = HashMap::new();
            for p in &pts {
                fibres.entry(qd.ring().mat_truncate(&eta(qr, p).unwrap(), 1)).or_default().push(*p);
            }
            for (_, fib) in fibres {
                let mut orbit: Vec<KPair> =
                    units.iter().map(|a| trunc(&scale_pair(qr, a, &fib[0]).unwrap())).collect();
                orbit.sort_by_key(|v| format!("{v:?}"));
                orbit.dedup();
                assert_eq!(orbit.len(), fib.len(), "{kind:?}");
                assert!(fib.iter().all(|p| orbit.contains(p)));
            }
        }
    }

    #[test]
    fn embedding_is_a_homomorphism() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let qd = Quadric::standard(3, CaseKind::UnramifiedV0, 1).unwrap();
        let (qr, r) = (&qd.qr, qd.ring());
        for _ in 0..10 {
            let a = qr.random_norm_one(&mut rng, 4).unwrap();
            let b = qr.random_norm_one(&mut rng, 4).unwrap();
            let ab = k1_embedding(qr, &qr.mul(&a, &b).unwrap(), &qd.c0).unwrap();
            let prod = r
                .mat_mul(&k1_embedding(qr, &a, &qd.c0).unwrap(), &k1_embedding(qr, &b, &qd.c0).unwrap())
                .unwrap();
            assert_eq!(r.mat_truncate(&ab, 4), r.mat_truncate(&prod, 4));
        }
        let zero = qr.zero();
        assert!(k1_embedding(qr, &qr.one(), &zero).is_err());
    }

    #[test]
    fn labels_under_units_and_shifts() {
        let mut rng = ChaCha8Rng::seed_from_u64(34);
        for kind in CaseKind::ALL {
            let qd = Quadric::standard(3, kind, 1).unwrap();
            for o in qd.orbit_basis(1) {
                let v = qd.representative(&o).unwrap();
                let a = qd.qr.random_norm_one(&mut rng, 4).unwrap();
                let moved = qd.classify(&scale_pair(&qd.qr, &a, &v).unwrap()).unwrap();
                assert!(moved.is_some());
                if matches!(kind, CaseKind::UnramifiedV0 | CaseKind::RamifiedV1 | CaseKind::SplitV0) {
                    assert_eq!(moved, Some(o));
                }
                if kind == CaseKind::SplitV0 {
                    let Orbit::Shift(n) = o else { unreachable!() };
                    let up = qd.shift_point(1, &v).unwrap();
                    assert_eq!(qd.classify(&up).unwrap(), Some(Orbit::Shift(n + 1)));
                }
            }
        }
        // unramified v(c₀)=1: a unit acts on λ by ι(α)/α
        let qd = Quadric::standard(3, CaseKind::UnramifiedV1, 1).unwrap();
        let g = &qd.lambdas[1];
        let f = FC0Fn::indicator(qd.kind, Orbit::Lambda(0));
        let moved = qd.k1_act(g, &f).unwrap();
        assert_eq!(moved.coeffs.len(), 1);
        assert_ne!(moved.coeffs.keys().next(), Some(&Orbit::Lambda(0)));
    }

    #[test]
    fn window_is_enforced() {
        let f = FC0Fn::indicator(CaseKind::SplitV0, Orbit::Shift(SHIFT_WINDOW + 1));
        assert!(matches!(f.check_window(SHIFT_WINDOW), Err(Error::WindowExceeded(_))));
        assert!(FC0Fn::indicator(CaseKind::SplitV0, Orbit::Shift(1)).check_window(SHIFT_WINDOW).is_ok());
    }

    #[test]
    fn spherical_delta_projects_to_delta_o() {
        for kind in CaseKind::ALL {
            let qd = Quadric::standard(3, kind, 1).unwrap();
            let fs = FSpace::new(3, kind.flavor()).unwrap();
            let phi = fs.w.lattice_delta(0).unwrap();
            let f = fs.partial_ft(&phi).unwrap();
            let w = fs.w.weights().unwrap();
            let vol = CycNumber::from_rational(1, &w[1] * &w[3]);
            let got = qd.coinvariant_project(&fs, &f).unwrap();
            assert!(got.same(&qd.delta_o().scale(&vol)), "{kind:?} {:?}", got.describe());
        }
    }

    #[test]
    fn central_units_act_by_the_character() {
        let mut rng = ChaCha8Rng::seed_from_u64(35);
        for fl in [Flavor::Unramified, Flavor::Ramified, Flavor::Split] {
            let fs = FSpace::new(3, fl).unwrap();
            let (r, qr) = (fs.ring(), fs.qr());
            let phi = crate::grid::Grid::random(r.field.clone(), vec![(-1, 1); 4], &mut rng).unwrap();
            let f = fs.partial_ft(&phi).unwrap();
            // c antiinvariant: c = s·w
            let s = r.random(&mut rng, -1, 1, false);
            let c = qr.scale(&s, &qr.w()).unwrap();
            let alpha = qr.add(&qr.one(), &qr.times_eps(&c));
            let moved = fs.k1_act(&alpha, &f).unwrap();
            let lie = Mat2 { a: r.random(&mut rng, -1, 1, false), b: r.random(&mut rng, -1, 1, false), c: r.random(&mut rng, -1, 1, false), d: r.zero() };
            let lie = Mat2 { d: r.neg(&lie.a), ..lie };
            let g = Mat2 {
                a: r.add(&r.one(), &r.times_eps(&lie.a)),
                b: r.times_eps(&lie.b),
                c: r.times_eps(&lie.c),
                d: r.add(&r.one(), &r.times_eps(&lie.d)),
            };
            let acted = fs.act(&g, &f).unwrap();
            for _ in 0..40 {
                let v = [qr.random(&mut rng, -1, 1), qr.random(&mut rng, -1, 1)];
                let v = [qr.reduce_mod_eps(&v[0]), qr.reduce_mod_eps(&v[1])];
                let base = fs.eval(&f, &v).unwrap();
                let det = det_iota(qr, &v, &v).unwrap();
                let chi = r.psi(&r.times_eps(&to_base(qr, &qr.mul(&c, &det).unwrap()).unwrap()), r.field.p());
                assert!((&fs.eval(&moved, &v).unwrap() - &(&chi * &base)).is_zero(), "{fl}");
                let pair = det_iota(qr, &v, &right_mul(qr, &v, &lie).unwrap()).unwrap();
                let chi = r.psi(&r.times_eps(&to_base(qr, &pair).unwrap()), r.field.p());
                assert!((&fs.eval(&acted, &v).unwrap() - &(&chi * &base)).is_zero(), "{fl}");
            }
        }
    }
}
