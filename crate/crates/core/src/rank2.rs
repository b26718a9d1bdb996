//! The rank-2 lattice `H` of a wall: its stable spherical pair `(s0, t1)`,
//! the fundamental sequence and the chains `T_i`, `S_{-j}` of effective
//! spherical classes.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::mukai::{is_spherical, pairing, MukaiVector, Surface};
use crate::walls::{compare_phase, formal_key, Position, WallKey};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Classification {
    /// `g = 1`
    NegativeDefinite,
    /// `g = 2`
    Degenerate,
    /// `g >= 3`
    Hyperbolic,
}

impl Classification {
    pub fn of(g: &BigInt) -> Self {
        if g.is_one() {
            Classification::NegativeDefinite
        } else if *g == BigInt::from(2) {
            Classification::Degenerate
        } else {
            Classification::Hyperbolic
        }
    }
}

/// A chain class: `T(i)` is `T_i` with `i >= 1`, `S(j)` is `S_{-j}` with `j >= 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ChainLabel {
    S(u64),
    T(u64),
}

impl ChainLabel {
    pub fn is_base(&self) -> bool {
        matches!(self, ChainLabel::S(0) | ChainLabel::T(1))
    }

    fn is_valid(&self) -> bool {
        !matches!(self, ChainLabel::T(0))
    }
}

impl fmt::Display for ChainLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChainLabel::S(0) => write!(f, "S0"),
            ChainLabel::S(j) => write!(f, "S-{j}"),
            ChainLabel::T(i) => write!(f, "T{i}"),
        }
    }
}

/// `a_0 = 1`, `a_1 = g`, `a_k = g a_{k-1} - a_{k-2}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FundSeq {
    pub g: BigInt,
    pub terms: Vec<BigInt>,
}

pub fn fundamental_sequence(g: &BigInt, k: usize) -> FundSeq {
    let mut terms = Vec::with_capacity(k + 1);
    terms.push(BigInt::one());
    if k >= 1 {
        terms.push(g.clone());
    }
    for i in 2..=k {
        let next = g * &terms[i - 1] - &terms[i - 2];
        terms.push(next);
    }
    FundSeq { g: g.clone(), terms }
}

/// `a_k`, with `a_k = 0` for `k < 0`.
pub fn seq_term(g: &BigInt, k: i64) -> BigInt {
    if k < 0 {
        return BigInt::zero();
    }
    if *g == BigInt::from(2) {
        return BigInt::from(k) + 1;
    }
    let (mut prev, mut cur) = (BigInt::one(), g.clone());
    if k == 0 {
        return prev;
    }
    for _ in 1..k {
        let next = g * &cur - &prev;
        prev = std::mem::replace(&mut cur, next);
    }
    cur
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rank2Wall {
    pub s0: MukaiVector,
    pub t1: MukaiVector,
    pub g: BigInt,
    pub classification: Classification,
    pub key: WallKey,
}

impl Rank2Wall {
    /// Builds the wall of two effective spherical classes with positive
    /// pairing, ordering them so that `phi_+(t1) > phi_+(s0)`.
    pub fn from_pair(x: &Surface, a: &MukaiVector, b: &MukaiVector) -> Result<Self> {
        for c in [a, b] {
            if !is_spherical(x, c) {
                return Err(Error::NotSpherical(c.clone()));
            }
            if !c.is_effective() {
                return Err(Error::NotActualWall(format!("{c} is not effective")));
            }
        }
        let g = pairing(x, a, b);
        if !g.is_positive() {
            return Err(Error::NotActualWall(format!("{a}.{b} = {g} is not positive")));
        }
        let key =
            formal_key(x, a, b).ok_or_else(|| Error::NotActualWall(format!("{a} and {b} have a vertical wall")))?;
        let (s0, t1) = match compare_phase(x, &Position::Above(key.clone()), a, b) {
            Ordering::Greater => (b.clone(), a.clone()),
            _ => (a.clone(), b.clone()),
        };
        let classification = Classification::of(&g);
        Ok(Rank2Wall { s0, t1, g, classification, key })
    }

    pub fn a(&self, k: i64) -> BigInt {
        seq_term(&self.g, k)
    }

    /// Coordinates `(p, q)` of a chain class in the basis `(s0, t1)`.
    pub fn chain_coords(&self, label: ChainLabel) -> (BigInt, BigInt) {
        match label {
            ChainLabel::S(j) => {
                let j = j as i64;
                (self.a(j), self.a(j - 1))
            }
            ChainLabel::T(i) => {
                let i = i as i64;
                (self.a(i - 2), self.a(i - 1))
            }
        }
    }

    pub fn combine(&self, p: &BigInt, q: &BigInt) -> MukaiVector {
        &(p * &self.s0) + &(q * &self.t1)
    }

    /// Integral `(p, q)` with `v = p s0 + q t1`.
    pub fn coords(&self, v: &MukaiVector) -> Result<(BigInt, BigInt)> {
        solve_in_basis(&self.s0, &self.t1, v).ok_or_else(|| Error::NotInLattice(v.clone()))
    }

    /// The label of chain coordinates `(p, q)`, if any.
    pub fn label_of_coords(&self, p: &BigInt, q: &BigInt) -> Option<ChainLabel> {
        if p.is_negative() || q.is_negative() {
            return None;
        }
        if p.is_one() && q.is_zero() {
            return Some(ChainLabel::S(0));
        }
        if p.is_zero() && q.is_one() {
            return Some(ChainLabel::T(1));
        }
        match self.classification {
            Classification::NegativeDefinite => (p.is_one() && q.is_one()).then_some(ChainLabel::S(1)),
            Classification::Degenerate => {
                if *p == q + 1 {
                    q.to_u64().map(ChainLabel::S)
                } else if *q == p + 1 {
                    q.to_u64().map(ChainLabel::T)
                } else {
                    None
                }
            }
            Classification::Hyperbolic => {
                // S_{-k} = (a_k, a_{k-1}), T_{k+1} = (a_{k-1}, a_k)
                let (mut prev, mut cur) = (BigInt::zero(), BigInt::one());
                let mut k: u64 = 0;
                let top = std::cmp::max(p, q);
                while &prev <= top {
                    if *p == cur && *q == prev {
                        return Some(ChainLabel::S(k));
                    }
                    if *p == prev && *q == cur {
                        return Some(ChainLabel::T(k + 1));
                    }
                    let next = &self.g * &cur - &prev;
                    prev = std::mem::replace(&mut cur, next);
                    k += 1;
                }
                None
            }
        }
    }
}

/// The class with chain label `label`.
pub fn chain_class(w: &Rank2Wall, label: ChainLabel) -> MukaiVector {
    assert!(label.is_valid(), "T indices start at 1");
    let (p, q) = w.chain_coords(label);
    w.combine(&p, &q)
}

/// The chain label of `v`, or `None` when `v` is not a chain class.
pub fn label_of(w: &Rank2Wall, v: &MukaiVector) -> Result<Option<ChainLabel>> {
    let (p, q) = w.coords(v)?;
    Ok(w.label_of_coords(&p, &q))
}

/// `(hom, ext^1)` from `from` to `to`, only against a base class.
pub fn hom_ext_table(w: &Rank2Wall, from: ChainLabel, to: ChainLabel) -> Result<(BigInt, BigInt)> {
    if !from.is_base() && !to.is_base() {
        return Err(Error::UnsupportedPair);
    }
    Ok(hom_ext(w, from, to))
}

/// `(hom, ext^1)` between any two chain classes. Along `phi_+`
/// the chain reads `T_1 > T_2 > ... > S_{-1} > S_0`, and
/// `hom(T_j, T_i) = a_{j-i}`, `hom(S_{-k}, S_{-j}) = a_{j-k}`,
/// `hom(S_{-j}, T_i) = a_{i+j-2}`, `ext^1(T_i, S_{-j}) = a_{i+j}`.
pub fn hom_ext(w: &Rank2Wall, from: ChainLabel, to: ChainLabel) -> (BigInt, BigInt) {
    assert!(from.is_valid() && to.is_valid());
    let a = |k: i64| w.a(k);
    match (from, to) {
        (ChainLabel::T(j), ChainLabel::T(i)) => {
            let (i, j) = (i as i64, j as i64);
            if j >= i {
                (a(j - i), a(j - i - 2))
            } else {
                (BigInt::zero(), a(i - j - 2))
            }
        }
        (ChainLabel::S(k), ChainLabel::S(j)) => {
            let (j, k) = (j as i64, k as i64);
            if j >= k {
                (a(j - k), a(j - k - 2))
            } else {
                (BigInt::zero(), a(k - j - 2))
            }
        }
        (ChainLabel::S(j), ChainLabel::T(i)) => {
            let (i, j) = (i as i64, j as i64);
            (a(i + j - 2), a(i + j))
        }
        (ChainLabel::T(i), ChainLabel::S(j)) => {
            let (i, j) = (i as i64, j as i64);
            (BigInt::zero(), a(i + j))
        }
    }
}

/// A `Z`-basis of the saturation of `<u, v>` in `Z^3`.
pub fn saturate(u: &MukaiVector, v: &MukaiVector) -> Result<(MukaiVector, MukaiVector)> {
    let m = [&u.d * &v.a - &u.a * &v.d, &u.a * &v.r - &u.r * &v.a, &u.r * &v.d - &u.d * &v.r];
    let c = m[0].gcd(&m[1]).gcd(&m[2]);
    if c.is_zero() {
        return Err(Error::ProportionalClasses(Box::new(u.clone()), Box::new(v.clone())));
    }
    let m: Vec<BigInt> = m.iter().map(|x| x / &c).collect();
    let e = m[0].extended_gcd(&m[1]);
    let g1 = e.gcd;
    if g1.is_zero() {
        return Ok((MukaiVector::new(1, 0, 0), MukaiVector::new(0, 1, 0)));
    }
    let b1 = MukaiVector { r: &m[1] / &g1, d: -(&m[0] / &g1), a: BigInt::zero() };
    let b2 = MukaiVector { r: -(&m[2] * &e.x), d: -(&m[2] * &e.y), a: g1 };
    Ok((b1, b2))
}

/// Integral `(p, q)` with `w = p b1 + q b2`, if one exists.
pub fn solve_in_basis(b1: &MukaiVector, b2: &MukaiVector, w: &MukaiVector) -> Option<(BigInt, BigInt)> {
    let c1 = [&b1.r, &b1.d, &b1.a];
    let c2 = [&b2.r, &b2.d, &b2.a];
    let cw = [&w.r, &w.d, &w.a];
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        let det = c1[i] * c2[j] - c1[j] * c2[i];
        if det.is_zero() {
            continue;
        }
        let pn = cw[i] * c2[j] - cw[j] * c2[i];
        let qn = c1[i] * cw[j] - c1[j] * cw[i];
        if !(&pn % &det).is_zero() || !(&qn % &det).is_zero() {
            return None;
        }
        let (p, q) = (pn / &det, qn / &det);
        return (&(&p * b1) + &(&q * b2) == *w).then_some((p, q));
    }
    None
}

/// `V_0 = 2`, `V_1 = g`, `V_m = g V_{m-1} - V_{m-2}`: classes `m` steps
/// apart along a chain pair to `-V_m`.
fn lucas(g: &BigInt, m: u32) -> BigInt {
    let (mut prev, mut cur) = (BigInt::from(2), g.clone());
    if m == 0 {
        return prev;
    }
    for _ in 1..m {
        let next = g * &cur - &prev;
        prev = std::mem::replace(&mut cur, next);
    }
    cur
}

/// The `g >= 3` with `V_m(g) = chi`, if any.
fn solve_lucas(m: u32, chi: &BigInt) -> Option<BigInt> {
    let (mut lo, mut hi) = (BigInt::from(3), chi.clone());
    while lo <= hi {
        let mid: BigInt = (&lo + &hi) >> 1;
        match lucas(&mid, m).cmp(chi) {
            Ordering::Equal => return Some(mid),
            Ordering::Less => lo = mid + 1,
            Ordering::Greater => hi = mid - 1,
        }
    }
    None
}

fn divide_exact(v: &MukaiVector, k: &BigInt) -> Option<MukaiVector> {
    let ok = [&v.r, &v.d, &v.a].iter().all(|c| (*c % k).is_zero());
    ok.then(|| MukaiVector { r: &v.r / k, d: &v.d / k, a: &v.a / k })
}

/// The pairing number `g` of the chain through `v` and `v1`, and a
/// neighbor of `v` along it. If `v1` sits `m` steps from `v` then
/// `v.v1 = -V_m(g)` and `(v1 + a_{m-2} v) / a_{m-1}` is a neighbor of `v`;
/// the smallest `g` with an integral neighbor is the chain of the lattice.
fn adjacent_class(v: &MukaiVector, v1: &MukaiVector, chi: &BigInt) -> Option<(BigInt, MukaiVector)> {
    if chi.is_one() {
        return Some((BigInt::one(), v1.clone()));
    }
    if *chi == BigInt::from(2) {
        let eta = v1 - v;
        let c = eta.r.gcd(&eta.d).gcd(&eta.a);
        return Some((BigInt::from(2), v + &divide_exact(&eta, &c)?));
    }
    let mut best = (chi.clone(), v1.clone());
    let mut m = 2u32;
    while lucas(&BigInt::from(3), m) <= *chi {
        if let Some(g) = solve_lucas(m, chi) {
            let num = v1 + &(&seq_term(&g, m as i64 - 2) * v);
            if let Some(y) = divide_exact(&num, &seq_term(&g, m as i64 - 1)) {
                if g < best.0 {
                    best = (g, y);
                }
            }
        }
        m += 1;
    }
    Some(best)
}

/// The stable pair of the wall `W(v, v1)`, found by walking the chain
/// through `v` towards smaller degree until effectivity changes sign.
pub fn stable_pair(x: &Surface, v: &MukaiVector, v1: &MukaiVector) -> Result<Rank2Wall> {
    for c in [v, v1] {
        if !is_spherical(x, c) {
            return Err(Error::NotSpherical(c.clone()));
        }
        if !c.is_effective() {
            return Err(Error::NotActualWall(format!("{c} is not effective")));
        }
    }
    let chi = -pairing(x, v, v1);
    if !chi.is_positive() {
        return Err(Error::NotActualWall(format!("{v}.{v1} is not negative")));
    }
    let (g, y) =
        adjacent_class(v, v1, &chi).ok_or_else(|| Error::NotActualWall(format!("no chain through {v} and {v1}")))?;
    if pairing(x, v, &y) != -&g || !is_spherical(x, &y) {
        return Err(Error::Inconsistent(format!("{y} is not adjacent to {v}")));
    }
    let two = BigInt::from(2);
    let lighter = |p: &MukaiVector, q: &MukaiVector| (&p.d, -&p.r) < (&q.d, -&q.r);
    let (mut u, mut w) = (v.clone(), y);
    let mut steps = 0usize;
    let (eff, non_eff) = loop {
        steps += 1;
        if steps > 100_000 {
            return Err(Error::Inconsistent(format!("no stable pair found from {v}")));
        }
        match (u.is_effective(), w.is_effective()) {
            (true, false) => break (u, w),
            (false, true) => break (w, u),
            (false, false) => {
                u = -&u;
                w = -&w;
            }
            (true, true) => {}
        }
        if lighter(&w, &u) {
            std::mem::swap(&mut u, &mut w);
        }
        // u, w adjacent and effective with u lighter: step to the class past u
        if g == two {
            let eta = &w - &u;
            if !eta.d.is_positive() {
                return Err(Error::Inconsistent(format!("step {eta} does not lower the degree")));
            }
            let (q, rem) = u.d.div_rem(&eta.d);
            let mut k = q.clone();
            if rem.is_zero() && !(&u - &(&q * &eta)).is_effective() {
                k -= 1;
            }
            if k.is_positive() {
                let shift = &k * &eta;
                u = &u - &shift;
                w = &w - &shift;
                continue;
            }
        }
        let next = &(&g * &u) - &w;
        w = std::mem::replace(&mut u, next);
    };
    let wall = Rank2Wall::from_pair(x, &eff, &-&non_eff)?;
    if wall.g != g {
        return Err(Error::Inconsistent(format!("pair pairing {} differs from chain g = {g}", wall.g)));
    }
    let (p, q) = wall.coords(v)?;
    if p.is_negative() || q.is_negative() {
        return Err(Error::NotActualWall(format!("{v} = {p} s0 + {q} t1")));
    }
    Ok(wall)
}
