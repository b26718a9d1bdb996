//! The wall-by-wall driver: starting from a single stable factor at large
//! volume, cross every wall down to the Brill-Noether point and read `h^1`
//! off the multiplicity of the trailing `O_X[1]`.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::filtration::{
    jh_below_wall, resolve_two_step, resolve_type1, resolve_type2, two_step_conditions, Factor, Orientation, Shape,
    Side, TwoStepBranch,
};
use crate::mukai::{euler_char, normalize_input, pairing, MukaiVector, NormalizedInput, Surface};
use crate::rank2::{label_of, stable_pair, ChainLabel, Rank2Wall};
use crate::walls::{compare_phase, formal_key, largest_actual_wall, numerical_wall, Position, WallCircle, WallKey};

pub const DEFAULT_MAX_WALLS: usize = 256;

/// Driver settings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Options {
    pub max_walls: usize,
    /// Treat a two-factor segment with `ext^1(G, F) = 0` as a direct sum.
    /// When unset such a segment goes through the two-step rule like any
    /// other two-factor segment.
    pub strict_split: bool,
}

impl Default for Options {
    fn default() -> Self {
        Options { max_walls: DEFAULT_MAX_WALLS, strict_split: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rule {
    Jh,
    Type1,
    Type2,
    TwoStep,
    Reorder,
    Split,
}

impl Rule {
    pub fn name(self) -> &'static str {
        match self {
            Rule::Jh => "jh",
            Rule::Type1 => "type1",
            Rule::Type2 => "type2",
            Rule::TwoStep => "two_step",
            Rule::Reorder => "reorder",
            Rule::Split => "split",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceStep {
    pub wall: WallCircle,
    pub wall_key: WallKey,
    /// `None` for a reordering of factors with vanishing pairing.
    pub lattice: Option<Rank2Wall>,
    /// Inclusive factor indices of the segment in the shape before crossing.
    pub segment_range: (usize, usize),
    pub rule: Rule,
    pub branch: Option<TwoStepBranch>,
    /// Both injectivity conditions of the two-step reduction held.
    pub both_sides_injective: bool,
    /// The two-step rule was applied although `ext^1(G, F) = 0`.
    pub vanishing_ext: bool,
    pub shape_after: Shape,
}

pub type Trace = Vec<TraceStep>;

/// A segment the simplified local reduction cannot resolve.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StuckSegment {
    pub lattice: Rank2Wall,
    pub segment: Shape,
    pub segment_range: (usize, usize),
    pub trace: Trace,
}

impl fmt::Display for StuckSegment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "segment {} at a wall with g={} after {} crossings", self.segment, self.lattice.g, self.trace.len())
    }
}

/// The next wall met walking down: its circle, lattice and segment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WallEvent {
    pub wall: WallCircle,
    pub key: WallKey,
    pub lattice: Option<Rank2Wall>,
    pub segment_range: (usize, usize),
}

/// The result of crossing one wall with one segment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Crossing {
    pub shape: Shape,
    pub rule: Rule,
    pub branch: Option<TwoStepBranch>,
    pub both_sides_injective: bool,
    pub vanishing_ext: bool,
}

impl Crossing {
    fn plain(shape: Shape, rule: Rule) -> Self {
        Crossing { shape, rule, branch: None, both_sides_injective: false, vanishing_ext: false }
    }
}

fn normal(w: &Rank2Wall) -> (BigInt, BigInt, BigInt) {
    let (u, v) = (&w.s0, &w.t1);
    (&u.d * &v.a - &u.a * &v.d, &u.a * &v.r - &u.r * &v.a, &u.r * &v.d - &u.d * &v.r)
}

fn in_plane(m: &(BigInt, BigInt, BigInt), c: &MukaiVector) -> bool {
    (&m.0 * &c.r + &m.1 * &c.d + &m.2 * &c.a).is_zero()
}

struct Candidate {
    wall: WallCircle,
    key: WallKey,
    /// The stable pair of an actual wall of a factor; `None` for the
    /// numerical wall of an adjacent pair.
    lattice: Option<Rank2Wall>,
    /// Factor indices that define the wall.
    members: Vec<usize>,
}

/// The highest wall strictly below `below` (or below large volume) and at
/// or above the Brill-Noether wall where `shape` changes.
pub fn next_wall(x: &Surface, shape: &Shape, below: Option<&WallKey>) -> Result<Option<WallEvent>> {
    let shifted = MukaiVector::shifted_trivial();
    let mut cands: Vec<Candidate> = Vec::new();
    for (i, f) in shape.factors.iter().enumerate() {
        if f.class == shifted {
            continue;
        }
        if let Some(aw) = largest_actual_wall(x, &f.class, below) {
            let lattice = stable_pair(x, &f.class, &aw.destabilizer)?;
            cands.push(Candidate { wall: aw.circle, key: aw.key, lattice: Some(lattice), members: vec![i] });
        }
    }
    for (i, pair) in shape.factors.windows(2).enumerate() {
        let (u, w) = (&pair[0].class, &pair[1].class);
        let Some(key) = formal_key(x, u, w) else { continue };
        if !key.is_at_or_above_bn(x) || below.is_some_and(|b| &key >= b) {
            continue;
        }
        if compare_phase(x, &Position::Below(key.clone()), u, w) != Ordering::Less {
            continue;
        }
        cands.push(Candidate { wall: numerical_wall(x, u, w)?, key, lattice: None, members: vec![i, i + 1] });
    }
    let Some(top) = cands.iter().map(|c| c.key.clone()).max() else { return Ok(None) };
    let tied: Vec<Candidate> = cands.into_iter().filter(|c| c.key == top).collect();
    let actual: Vec<&Candidate> = tied.iter().filter(|c| c.lattice.is_some()).collect();
    let lattice = if let Some(first) = actual.first() {
        let lat = first.lattice.clone().unwrap();
        for c in &actual[1..] {
            let other = c.lattice.as_ref().unwrap();
            if other.s0 != lat.s0 || other.t1 != lat.t1 {
                return Err(Error::Inconsistent(format!(
                    "stable pairs {},{} and {},{} share a key",
                    lat.s0, lat.t1, other.s0, other.t1
                )));
            }
        }
        Some(lat)
    } else {
        // only numerical walls of adjacent pairs: both classes stay stable
        let mut found: Option<Rank2Wall> = None;
        for c in &tied {
            let (u, w) = (&shape.factors[c.members[0]].class, &shape.factors[c.members[1]].class);
            let g = pairing(x, u, w);
            if g.is_zero() {
                continue;
            }
            if g.is_negative() {
                return Err(Error::Inconsistent(format!("adjacent stable factors {u}, {w} with negative pairing")));
            }
            let lat = Rank2Wall::from_pair(x, u, w)?;
            match &found {
                Some(f) if f.s0 != lat.s0 || f.t1 != lat.t1 => {
                    return Err(Error::Inconsistent("distinct lattices share a key".into()));
                }
                _ => found = Some(lat),
            }
        }
        found
    };
    let wall = tied.iter().find(|c| c.lattice.is_some()).unwrap_or(&tied[0]).wall.clone();
    match lattice {
        Some(lat) => {
            let m = normal(&lat);
            let inside: Vec<usize> =
                shape.factors.iter().enumerate().filter(|(_, f)| in_plane(&m, &f.class)).map(|(i, _)| i).collect();
            for c in &tied {
                if c.members.iter().any(|i| !inside.contains(i)) {
                    return Err(Error::Inconsistent("distinct walls share a key".into()));
                }
            }
            let (lo, hi) = (inside[0], *inside.last().unwrap());
            if hi - lo + 1 != inside.len() {
                return Err(Error::Inconsistent(format!("segment in lattice of {} is not contiguous", lat.s0)));
            }
            Ok(Some(WallEvent { wall, key: top, lattice: Some(lat), segment_range: (lo, hi) }))
        }
        None => {
            let lo = tied.iter().map(|c| c.members[0]).min().unwrap();
            let hi = tied.iter().map(|c| *c.members.last().unwrap()).max().unwrap();
            Ok(Some(WallEvent { wall, key: top, lattice: None, segment_range: (lo, hi) }))
        }
    }
}

fn stuck(lattice: &Rank2Wall, segment: &Shape) -> Error {
    Error::NeedsFullLocalReduction(Box::new(StuckSegment {
        lattice: lattice.clone(),
        segment: segment.clone(),
        segment_range: (0, segment.len().saturating_sub(1)),
        trace: Vec::new(),
    }))
}

/// The Harder-Narasimhan shape below the wall of a segment given in its
/// order above the wall, all of whose classes lie in `lattice`.
pub fn cross_wall(lattice: &Rank2Wall, segment: &Shape) -> Result<Crossing> {
    cross_wall_with(lattice, segment, &Options::default())
}

pub fn cross_wall_with(lattice: &Rank2Wall, segment: &Shape, opts: &Options) -> Result<Crossing> {
    let w = lattice;
    let mut labeled: Vec<(ChainLabel, BigInt)> = Vec::with_capacity(segment.len());
    for f in &segment.factors {
        let label = label_of(w, &f.class)?.ok_or_else(|| Error::OffChain(f.class.clone()))?;
        labeled.push((label, f.mult.clone()));
    }
    let s0 = ChainLabel::S(0);
    let t1 = ChainLabel::T(1);
    match labeled.as_slice() {
        [] => Ok(Crossing::plain(Shape::default(), Rule::Reorder)),
        [(l, m)] if l.is_base() => Ok(Crossing::plain(
            Shape::from_factors([Factor::new(chain_class_of(w, *l), Some(*l), m.clone())]),
            Rule::Reorder,
        )),
        [(l, m)] => {
            let jh = jh_below_wall(w, *l);
            let scaled = jh.factors.into_iter().map(|f| Factor { mult: f.mult * m, ..f });
            Ok(Crossing::plain(Shape::from_factors(scaled), Rule::Jh))
        }
        [(a, q), (b, p)] if *a == t1 && *b == s0 => {
            Ok(Crossing::plain(resolve_type1(w, p, q, Orientation::TSub)?, Rule::Type1))
        }
        [(a, q), (b, p)] if *a == t1 => Ok(Crossing::plain(resolve_type2(w, q, *b, p, Side::TBase)?, Rule::Type2)),
        [(a, q), (b, p)] if *b == s0 => Ok(Crossing::plain(resolve_type2(w, p, *a, q, Side::SBase)?, Rule::Type2)),
        [(f, q), (g, p)] => {
            let vanishing_ext = crate::rank2::hom_ext(w, *g, *f).1.is_zero();
            if vanishing_ext && opts.strict_split {
                return Ok(Crossing::plain(split(w, &labeled), Rule::Split));
            }
            let (lead, trail) = two_step_conditions(w, *f, q, *g, p);
            let (shape, branch) = match resolve_two_step(w, *f, q, *g, p) {
                Err(Error::NeitherSideInjective) if vanishing_ext => {
                    return Ok(Crossing::plain(split(w, &labeled), Rule::Split));
                }
                Err(Error::NeitherSideInjective) => return Err(stuck(w, segment)),
                other => other?,
            };
            Ok(Crossing { shape, rule: Rule::TwoStep, branch, both_sides_injective: lead && trail, vanishing_ext })
        }
        _ => {
            let all_split = labeled.iter().enumerate().all(|(i, (li, _))| {
                labeled[i + 1..].iter().all(|(lj, _)| crate::rank2::hom_ext(w, *lj, *li).1.is_zero())
            });
            if all_split {
                Ok(Crossing::plain(split(w, &labeled), Rule::Split))
            } else {
                Err(stuck(w, segment))
            }
        }
    }
}

fn chain_class_of(w: &Rank2Wall, l: ChainLabel) -> MukaiVector {
    crate::rank2::chain_class(w, l)
}

/// A direct sum of chain classes: every summand splits into `S0` and `T1`.
fn split(w: &Rank2Wall, labeled: &[(ChainLabel, BigInt)]) -> Shape {
    let (mut p, mut q) = (BigInt::zero(), BigInt::zero());
    for (l, m) in labeled {
        let (a, b) = w.chain_coords(*l);
        p += m * a;
        q += m * b;
    }
    Shape::from_factors([
        Factor::new(w.s0.clone(), Some(ChainLabel::S(0)), p),
        Factor::new(w.t1.clone(), Some(ChainLabel::T(1)), q),
    ])
}

fn reorder(x: &Surface, segment: &Shape, key: &WallKey) -> Shape {
    let pos = Position::Below(key.clone());
    let mut factors = segment.factors.clone();
    factors.sort_by(|a, b| compare_phase(x, &pos, &b.class, &a.class));
    Shape::from_factors(factors)
}

/// Runs the driver on a class with `r, d > 0`, returning the trace and the
/// terminal shape.
pub fn run_driver(x: &Surface, v: &MukaiVector, opts: &Options) -> Result<(Trace, Shape)> {
    run_driver_below(x, v, None, opts)
}

/// Runs the driver on the stable object of an effective spherical class
/// just below the wall `start` (or at large volume).
pub fn run_driver_below(
    x: &Surface,
    v: &MukaiVector,
    start: Option<&WallKey>,
    opts: &Options,
) -> Result<(Trace, Shape)> {
    let max_walls = opts.max_walls;
    let mut shape = Shape::single(v.clone());
    let mut below: Option<WallKey> = start.cloned();
    let mut trace: Trace = Vec::new();
    let total = v.clone();
    while let Some(ev) = next_wall(x, &shape, below.as_ref())? {
        if trace.len() >= max_walls {
            return Err(Error::WallLimitExceeded(max_walls));
        }
        let (lo, hi) = ev.segment_range;
        let segment = Shape { factors: shape.factors[lo..=hi].to_vec() };
        let crossing = match &ev.lattice {
            Some(lat) => match cross_wall_with(lat, &segment, opts) {
                Err(Error::NeedsFullLocalReduction(mut s)) => {
                    s.segment_range = ev.segment_range;
                    s.trace = trace;
                    return Err(Error::NeedsFullLocalReduction(s));
                }
                other => other?,
            },
            None => Crossing::plain(reorder(x, &segment, &ev.key), Rule::Reorder),
        };
        let mut next = Shape::default();
        for f in shape.factors[..lo].iter().cloned() {
            next.push(f);
        }
        next.extend(crossing.shape);
        for f in shape.factors[hi + 1..].iter().cloned() {
            next.push(f);
        }
        if next.total() != total {
            return Err(Error::Inconsistent(format!("class not conserved at wall {:?}", ev.key)));
        }
        let pos = Position::Below(ev.key.clone());
        for pair in next.factors.windows(2) {
            if compare_phase(x, &pos, &pair[0].class, &pair[1].class) != Ordering::Greater {
                return Err(Error::Inconsistent(format!(
                    "{} and {} out of order below the wall",
                    pair[0].class, pair[1].class
                )));
            }
        }
        if log_enabled() {
            eprintln!("wall t0^2={} c2={} rule={} shape={}", ev.key.t0_sq, ev.key.c2, crossing.rule.name(), next);
        }
        trace.push(TraceStep {
            wall: ev.wall,
            wall_key: ev.key.clone(),
            lattice: ev.lattice,
            segment_range: ev.segment_range,
            rule: crossing.rule,
            branch: crossing.branch,
            both_sides_injective: crossing.both_sides_injective,
            vanishing_ext: crossing.vanishing_ext,
            shape_after: next.clone(),
        });
        shape = next;
        below = Some(ev.key);
    }
    let shifted = MukaiVector::shifted_trivial();
    for f in &shape.factors {
        if f.class != shifted && !f.class.d.is_positive() {
            return Err(Error::Inconsistent(format!("terminal factor {} has nonpositive degree", f.class)));
        }
    }
    Ok((trace, shape))
}

fn log_enabled() -> bool {
    std::env::var("SPHCOH_LOG").is_ok_and(|s| s == "trace")
}

/// `(h0, h1)` of the stable object of an effective spherical class just
/// below the wall `start`; `h2` vanishes for objects of the heart.
pub fn cohomology_below(
    x: &Surface,
    v: &MukaiVector,
    start: Option<&WallKey>,
    opts: &Options,
) -> Result<(BigInt, BigInt)> {
    if *v == MukaiVector::shifted_trivial() {
        return Ok((BigInt::zero(), BigInt::from(1)));
    }
    if !v.d.is_positive() {
        return Err(Error::NonPositive(v.clone()));
    }
    let (_, terminal) = run_driver_below(x, v, start, opts)?;
    let h1 = terminal.trailing_shifted_trivial();
    Ok((euler_char(v) + &h1, h1))
}

/// Cohomology of the stable spherical bundle with a given Mukai vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cohomology {
    pub input: MukaiVector,
    pub normalized: NormalizedInput,
    pub h0: BigInt,
    pub h1: BigInt,
    pub h2: BigInt,
    pub trace: Trace,
    pub terminal: Shape,
}

impl Cohomology {
    pub fn pair(&self) -> (BigInt, BigInt) {
        (self.h0.clone(), self.h1.clone())
    }

    pub fn chi(&self) -> BigInt {
        &self.h0 - &self.h1 + &self.h2
    }
}

/// `h^0, h^1, h^2` of the stable bundle of class `v`. A class with `d < 0`
/// is handled through its dual and Serre duality.
pub fn cohomology(x: &Surface, v: &MukaiVector, max_walls: usize) -> Result<Cohomology> {
    cohomology_with(x, v, &Options { max_walls, ..Options::default() })
}

pub fn cohomology_with(x: &Surface, v: &MukaiVector, opts: &Options) -> Result<Cohomology> {
    let normalized = normalize_input(x, v)?;
    let class = normalized.class.clone();
    let (h0, h1, h2, trace, terminal) = if normalized.is_trivial_bundle() {
        (BigInt::from(1), BigInt::zero(), BigInt::from(1), Vec::new(), Shape::single(class.clone()))
    } else {
        let (trace, terminal) = run_driver(x, &class, opts)?;
        let h1 = terminal.trailing_shifted_trivial();
        let h0 = euler_char(&class) + &h1;
        if h0.is_negative() {
            return Err(Error::Inconsistent(format!("negative h0 for {class}")));
        }
        (h0, h1, BigInt::zero(), trace, terminal)
    };
    let (h0, h2) = if normalized.dualized { (h2, h0) } else { (h0, h2) };
    Ok(Cohomology { input: v.clone(), normalized, h0, h1, h2, trace, terminal })
}
