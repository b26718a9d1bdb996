//! Command-line front end: single queries, batch runs, JSON traces and SVG
//! wall figures.

pub mod json;
pub mod svg;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use num_bigint::BigInt;
use rayon::prelude::*;
use serde_json::{json, Value};
use sphcoh::brillnoether::{weak_bn, WeakBNReport};
use sphcoh::filtration::height;
use sphcoh::mukai::normalize_input;
use sphcoh::reduction::{cohomology_with, Cohomology, Options, StuckSegment, DEFAULT_MAX_WALLS};
use sphcoh::walls::{numerical_wall, WallCircle};
use sphcoh::{Error, MukaiVector, Surface};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_STUCK: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "sphcoh", version, about = "Cohomology of stable spherical bundles on K3 surfaces of Picard rank one")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// h0, h1 and the wall-crossing trace.
    Cohomology(Figure),
    /// The closed-form weak Brill-Noether test.
    Weakbn(Query),
    /// The walls crossed down to the Brill-Noether wall.
    Walls(Figure),
    /// Length of the longest splitting chain.
    Height(Query),
    /// One JSON line per input line "n r d a".
    Batch(Batch),
}

#[derive(Debug, Args)]
struct Query {
    /// Half the degree of the polarization, H^2 = 2n.
    #[arg(long, value_parser = parse_int)]
    n: BigInt,
    /// Mukai vector r,d,a.
    #[arg(long, value_parser = parse_vector, allow_hyphen_values = true)]
    v: MukaiVector,
    #[arg(long)]
    json: bool,
    #[command(flatten)]
    driver: DriverArgs,
}

#[derive(Debug, Args)]
struct Figure {
    #[command(flatten)]
    query: Query,
    /// Write an SVG figure of the walls.
    #[arg(long, value_name = "PATH")]
    svg: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct Batch {
    #[arg(long, value_name = "FILE")]
    batch: PathBuf,
    #[command(flatten)]
    driver: DriverArgs,
}

#[derive(Debug, Args)]
struct DriverArgs {
    /// Stop after this many walls.
    #[arg(long, default_value_t = DEFAULT_MAX_WALLS)]
    max_walls: usize,
    /// Split consecutive chain classes with vanishing Ext^1 instead of
    /// applying the two-step reduction.
    #[arg(long)]
    strict_split: bool,
}

impl DriverArgs {
    fn options(&self) -> Options {
        Options { max_walls: self.max_walls, strict_split: self.strict_split }
    }
}

fn parse_int(s: &str) -> Result<BigInt, String> {
    s.trim().parse().map_err(|_| format!("not an integer: {s:?}"))
}

fn parse_vector(s: &str) -> Result<MukaiVector, String> {
    let parts: Vec<BigInt> = s.split(',').map(parse_int).collect::<Result<_, _>>()?;
    match <[BigInt; 3]>::try_from(parts) {
        Ok([r, d, a]) => Ok(MukaiVector::new(r, d, a)),
        Err(_) => Err(format!("expected r,d,a: {s:?}")),
    }
}

/// A finished query: the exit code and the JSON value describing it.
struct Outcome {
    code: i32,
    value: Value,
    human: String,
}

impl Outcome {
    fn input_error(e: &Error) -> Self {
        Outcome {
            code: EXIT_INPUT,
            value: json::error(json::error_kind(e), &e.to_string()),
            human: format!("error: {e}"),
        }
    }

    fn stuck(x: &Surface, v: &MukaiVector, s: &StuckSegment) -> Self {
        Outcome { code: EXIT_STUCK, value: json::stuck(x, v, s), human: format!("needs-full-local-reduction: {s}") }
    }
}

/// Runs the CLI on `args` (program name first) and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { write!(err, "{text}") } else { write!(out, "{text}") };
            return code;
        }
    };
    match cli.command {
        Command::Batch(b) => run_batch(&b, out, err),
        Command::Cohomology(f) => finish(&f.query, cohomology_query(&f), out, err),
        Command::Walls(f) => finish(&f.query, walls_query(&f), out, err),
        Command::Weakbn(q) => finish(&q, weakbn_query(&q), out, err),
        Command::Height(q) => finish(&q, height_query(&q), out, err),
    }
}

fn finish(q: &Query, o: Outcome, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    if q.json || o.code == EXIT_STUCK {
        let _ = writeln!(out, "{}", o.value);
    }
    if !q.json {
        if o.code == EXIT_OK {
            let _ = writeln!(out, "{}", o.human);
        } else {
            let _ = writeln!(err, "{}", o.human);
        }
    }
    o.code
}

fn surface(n: &BigInt) -> Result<Surface, Error> {
    Surface::new(n.clone())
}

fn height_of(x: &Surface, c: &Cohomology) -> Result<u32, Error> {
    if c.normalized.is_trivial_bundle() {
        return Ok(0);
    }
    height(x, &c.normalized.class)
}

/// Weak Brill-Noether on the normalized class; `None` for `O_X` or when the
/// candidate search is out of range.
fn weak_bn_of(x: &Surface, c: &Cohomology) -> Option<WeakBNReport> {
    if c.normalized.is_trivial_bundle() {
        return None;
    }
    weak_bn(x, &c.normalized.class).ok()
}

fn cohomology_value(x: &Surface, v: &MukaiVector, opts: &Options) -> Result<(Cohomology, Value), Error> {
    let c = cohomology_with(x, v, opts)?;
    let h = height_of(x, &c)?;
    let wbn = weak_bn_of(x, &c);
    let value = json::cohomology(x, &c, h, wbn.as_ref());
    Ok((c, value))
}

fn cohomology_query(f: &Figure) -> Outcome {
    let q = &f.query;
    let x = match surface(&q.n) {
        Ok(x) => x,
        Err(e) => return Outcome::input_error(&e),
    };
    let outcome = match cohomology_value(&x, &q.v, &q.driver.options()) {
        Ok((c, value)) => {
            let mut human = format!(
                "h0={} h1={} h2={}\nchi={} height={}",
                c.h0,
                c.h1,
                c.h2,
                value["chi"].as_str().unwrap_or(""),
                value["height"]
            );
            if let Some(w) = value["weak_bn"].as_object() {
                human.push_str(&format!("\nweak_bn holds={} y={}", w["holds"], w["y"].as_str().unwrap_or("none")));
            }
            for (i, s) in c.trace.iter().enumerate() {
                let g = s.lattice.as_ref().map_or("-".to_string(), |w| w.g.to_string());
                human.push_str(&format!("\nwall {} g={} {} -> {}", i + 1, g, s.rule.name(), s.shape_after));
            }
            Outcome { code: EXIT_OK, value, human }
        }
        Err(Error::NeedsFullLocalReduction(s)) => Outcome::stuck(&x, &q.v, &s),
        Err(e) => Outcome::input_error(&e),
    };
    write_svg(&x, &q.v, f, outcome)
}

/// The walls of a run, including the wall where it stopped.
fn walls_of(
    x: &Surface,
    v: &MukaiVector,
    opts: &Options,
) -> Result<(Vec<WallCircle>, Option<Box<StuckSegment>>), Error> {
    match cohomology_with(x, v, opts) {
        Ok(c) => Ok((c.trace.iter().map(|s| s.wall.clone()).collect(), None)),
        Err(Error::NeedsFullLocalReduction(s)) => {
            let mut walls: Vec<WallCircle> = s.trace.iter().map(|t| t.wall.clone()).collect();
            walls.push(numerical_wall(x, &s.lattice.s0, &s.lattice.t1)?);
            Ok((walls, Some(s)))
        }
        Err(e) => Err(e),
    }
}

fn write_svg(x: &Surface, v: &MukaiVector, f: &Figure, outcome: Outcome) -> Outcome {
    let Some(path) = &f.svg else { return outcome };
    if outcome.code == EXIT_INPUT {
        return outcome;
    }
    let walls = match walls_of(x, v, &f.query.driver.options()) {
        Ok((w, _)) => w,
        Err(e) => return Outcome::input_error(&e),
    };
    match svg::emit_walls_svg(x, &walls, path) {
        Ok(()) => outcome,
        Err(e) => Outcome {
            code: EXIT_INPUT,
            value: json::error("io", &e.to_string()),
            human: format!("error: cannot write {}: {e}", path.display()),
        },
    }
}

fn walls_query(f: &Figure) -> Outcome {
    let q = &f.query;
    let x = match surface(&q.n) {
        Ok(x) => x,
        Err(e) => return Outcome::input_error(&e),
    };
    let (walls, stuck) = match normalize_input(&x, &q.v).and_then(|nv| walls_of(&x, &nv.class, &q.driver.options())) {
        Ok(w) => w,
        Err(e) => return Outcome::input_error(&e),
    };
    let mut value = json!({
        "schema": json::SCHEMA,
        "input": json::input(&x, &q.v),
        "bn_t0_sq": format!("1/{}", x.n()),
        "walls": walls.iter().map(json::wall).collect::<Vec<_>>(),
        "complete": stuck.is_none(),
    });
    let mut human: Vec<String> = walls
        .iter()
        .enumerate()
        .map(|(i, w)| {
            let key = w.key().map_or("-".to_string(), |k| format!("t0^2={} c2={}", k.t0_sq, k.c2));
            format!("wall {}: {} {} {key}", i + 1, w.pair.0, w.pair.1)
        })
        .collect();
    let code = match &stuck {
        Some(s) => {
            value["error"] = json!("needs-full-local-reduction");
            value["stuck"] = json::stuck(&x, &q.v, s)["stuck"].clone();
            human.push(format!("needs-full-local-reduction: {s}"));
            EXIT_STUCK
        }
        None => EXIT_OK,
    };
    write_svg(&x, &q.v, f, Outcome { code, value, human: human.join("\n") })
}

fn weakbn_query(q: &Query) -> Outcome {
    let result = surface(&q.n).and_then(|x| {
        let nv = normalize_input(&x, &q.v)?;
        Ok((weak_bn(&x, &nv.class)?, x))
    });
    match result {
        Ok((r, x)) => {
            let mut value = json::weak_bn(&r);
            value["schema"] = json!(json::SCHEMA);
            value["input"] = json::input(&x, &q.v);
            let mut human =
                format!("holds={} y={}", r.holds, r.y.as_ref().map_or("none".to_string(), |y| y.to_string()));
            for (c, y) in &r.witnesses {
                human.push_str(&format!("\nwitness {c} ratio={y}"));
            }
            Outcome { code: EXIT_OK, value, human }
        }
        Err(e) => Outcome::input_error(&e),
    }
}

fn height_query(q: &Query) -> Outcome {
    let result = surface(&q.n).and_then(|x| {
        let nv = normalize_input(&x, &q.v)?;
        let h = if nv.is_trivial_bundle() { 0 } else { height(&x, &nv.class)? };
        Ok((h, x))
    });
    match result {
        Ok((h, x)) => Outcome {
            code: EXIT_OK,
            value: json!({"schema": json::SCHEMA, "input": json::input(&x, &q.v), "height": h}),
            human: format!("height={h}"),
        },
        Err(e) => Outcome::input_error(&e),
    }
}

/// One batch line: `n r d a`.
fn parse_line(line: &str) -> Option<(BigInt, MukaiVector)> {
    let nums: Vec<BigInt> = line.split_whitespace().map(|t| t.parse().ok()).collect::<Option<_>>()?;
    match <[BigInt; 4]>::try_from(nums) {
        Ok([n, r, d, a]) => Some((n, MukaiVector::new(r, d, a))),
        Err(_) => None,
    }
}

/// The JSON line for one batch entry.
pub fn batch_line(line: &str, opts: &Options) -> Value {
    let Some((n, v)) = parse_line(line) else {
        return json::error("parse", &format!("expected \"n r d a\": {line:?}"));
    };
    let x = match surface(&n) {
        Ok(x) => x,
        Err(e) => return json::error(json::error_kind(&e), &e.to_string()),
    };
    match cohomology_value(&x, &v, opts) {
        Ok((_, value)) => value,
        Err(Error::NeedsFullLocalReduction(s)) => json::stuck(&x, &v, &s),
        Err(e) => {
            let mut value = json::error(json::error_kind(&e), &e.to_string());
            value["input"] = json::input(&x, &v);
            value
        }
    }
}

fn run_batch(b: &Batch, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let text = match std::fs::read_to_string(&b.batch) {
        Ok(t) => t,
        Err(e) => {
            let _ = writeln!(err, "error: cannot read {}: {e}", b.batch.display());
            return EXIT_INPUT;
        }
    };
    let opts = b.driver.options();
    let lines: Vec<(usize, &str)> =
        text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#')).collect();
    let values: Vec<Value> = lines
        .par_iter()
        .map(|&(i, l)| {
            let mut v = batch_line(l, &opts);
            v["line"] = json!(i + 1);
            v
        })
        .collect();
    for v in values {
        let _ = writeln!(out, "{v}");
    }
    EXIT_OK
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_vectors() {
        assert_eq!(parse_vector("305,477,746").unwrap(), MukaiVector::new(305, 477, 746));
        assert_eq!(parse_vector("-1, 0, -1").unwrap(), MukaiVector::new(-1, 0, -1));
        assert!(parse_vector("1,2").is_err());
        assert!(parse_vector("1,2,3,4").is_err());
        assert!(parse_vector("1,b,3").is_err());
    }

    #[test]
    fn parses_batch_lines() {
        assert_eq!(parse_line(" 1  2 3 5 "), Some((BigInt::from(1), MukaiVector::new(2, 3, 5))));
        assert_eq!(parse_line("1 2 3"), None);
        assert_eq!(parse_line("1 2 3 5 8"), None);
        assert_eq!(parse_line("1 2 3 x"), None);
    }
}
