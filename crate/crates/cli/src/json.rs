//! JSON rendering of query results. Big integers and rationals are decimal
//! strings.

use num_bigint::BigInt;
use serde_json::{json, Value};
use sphcoh::brillnoether::WeakBNReport;
use sphcoh::filtration::{Shape, TwoStepBranch};
use sphcoh::rank2::{label_of, Rank2Wall};
use sphcoh::reduction::{Cohomology, StuckSegment, TraceStep};
use sphcoh::walls::WallCircle;
use sphcoh::{Error, MukaiVector, Surface};

pub const SCHEMA: u32 = 1;

pub fn class(v: &MukaiVector) -> Value {
    json!([v.r.to_string(), v.d.to_string(), v.a.to_string()])
}

pub fn input(x: &Surface, v: &MukaiVector) -> Value {
    json!({"n": x.n().to_string(), "r": v.r.to_string(), "d": v.d.to_string(), "a": v.a.to_string()})
}

pub fn normalized(v: &MukaiVector, dualized: bool) -> Value {
    json!({"r": v.r.to_string(), "d": v.d.to_string(), "a": v.a.to_string(), "dualized": dualized})
}

pub fn shape(s: &Shape) -> Value {
    s.factors.iter().map(|f| json!({"class": class(&f.class), "mult": f.mult.to_string()})).collect()
}

/// A shape with chain labels relative to the wall lattice `w`.
pub fn labeled_shape(s: &Shape, w: &Rank2Wall) -> Value {
    s.factors
        .iter()
        .map(|f| {
            let label = label_of(w, &f.class).ok().flatten();
            json!({"class": class(&f.class), "label": label.map(|l| l.to_string()), "mult": f.mult.to_string()})
        })
        .collect()
}

fn branch_name(b: TwoStepBranch) -> &'static str {
    match b {
        TwoStepBranch::LeadingS => "leading_s",
        TwoStepBranch::TrailingT => "trailing_t",
    }
}

pub fn wall(w: &WallCircle) -> Value {
    let key = w.key();
    json!({
        "pair": [class(&w.pair.0), class(&w.pair.1)],
        "t0_sq": key.as_ref().map(|k| k.t0_sq.to_string()),
        "c2": key.as_ref().map(|k| k.c2.to_string()),
    })
}

pub fn step(s: &TraceStep) -> Value {
    json!({
        "wall": wall(&s.wall),
        "g": s.lattice.as_ref().map(|w| w.g.to_string()),
        "s0": s.lattice.as_ref().map(|w| class(&w.s0)),
        "t1": s.lattice.as_ref().map(|w| class(&w.t1)),
        "segment": [s.segment_range.0, s.segment_range.1],
        "rule": s.rule.name(),
        "branch": s.branch.map(branch_name),
        "both_sides_injective": s.both_sides_injective,
        "vanishing_ext": s.vanishing_ext,
        "shape": shape(&s.shape_after),
    })
}

pub fn trace(t: &[TraceStep]) -> Value {
    t.iter().map(step).collect()
}

pub fn weak_bn(r: &WeakBNReport) -> Value {
    json!({
        "holds": r.holds,
        "y": r.y.as_ref().map(|y| y.to_string()),
        "witnesses": r.witnesses.iter().map(|(c, y)| json!({"class": class(c), "ratio": y.to_string()})).collect::<Vec<_>>(),
    })
}

pub fn cohomology(x: &Surface, c: &Cohomology, height: u32, wbn: Option<&WeakBNReport>) -> Value {
    let chi: BigInt = &c.h0 - &c.h1 + &c.h2;
    json!({
        "schema": SCHEMA,
        "input": input(x, &c.input),
        "normalized": normalized(&c.normalized.class, c.normalized.dualized),
        "h0": c.h0.to_string(),
        "h1": c.h1.to_string(),
        "h2": c.h2.to_string(),
        "chi": chi.to_string(),
        "height": height,
        "weak_bn": wbn.map(|r| json!({"holds": r.holds, "y": r.y.as_ref().map(|y| y.to_string())})),
        "trace": trace(&c.trace),
    })
}

pub fn stuck(x: &Surface, v: &MukaiVector, s: &StuckSegment) -> Value {
    json!({
        "schema": SCHEMA,
        "input": input(x, v),
        "error": "needs-full-local-reduction",
        "stuck": {
            "g": s.lattice.g.to_string(),
            "s0": class(&s.lattice.s0),
            "t1": class(&s.lattice.t1),
            "segment": labeled_shape(&s.segment, &s.lattice),
            "segment_range": [s.segment_range.0, s.segment_range.1],
        },
        "trace": trace(&s.trace),
    })
}

pub fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::InvalidSurface(_) => "invalid-surface",
        Error::NotSpherical(_) => "not-spherical",
        Error::ZeroRank => "zero-rank",
        Error::NegativeRank(_) => "negative-rank",
        Error::NonPositive(_) => "non-positive",
        Error::ProportionalClasses(..) => "proportional-classes",
        Error::NotActualWall(_) => "not-actual-wall",
        Error::NotInLattice(_) => "not-in-lattice",
        Error::OffChain(_) => "off-chain",
        Error::UnsupportedPair => "unsupported-pair",
        Error::RigidityViolated { .. } => "rigidity-violated",
        Error::NoNonnegativeSolution(_) => "no-nonnegative-solution",
        Error::NeitherSideInjective => "neither-side-injective",
        Error::NeedsFullLocalReduction(_) => "needs-full-local-reduction",
        Error::HeightTooLarge(_) => "height-too-large",
        Error::DegreeTwoUnsupported => "degree-two-unsupported",
        Error::SearchTooLarge(_) => "search-too-large",
        Error::WallLimitExceeded(_) => "wall-limit-exceeded",
        Error::Inconsistent(_) => "inconsistent",
    }
}

pub fn error(kind: &str, message: &str) -> Value {
    json!({"schema": SCHEMA, "error": kind, "message": message})
}
