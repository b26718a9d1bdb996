//! The closed-form weak Brill-Noether test and the bounds on `h^0` that
//! hold independently of the driver.

use num_bigint::BigInt;
use num_integer::Roots;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::mukai::{euler_char, is_spherical, pairing, MukaiVector, Surface};
use crate::rank2::Rank2Wall;
use crate::reduction::{cohomology_below, Options};

/// Largest sieve bound accepted by [`weak_bn`].
pub const MAX_SIEVE_BOUND: u64 = 50_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeakBNReport {
    /// `H^1(E) = 0`.
    pub holds: bool,
    /// The largest ratio, if any class qualifies.
    pub y: Option<BigRational>,
    /// Every qualifying class with its ratio, ordered by `(d1, r1)`.
    pub witnesses: Vec<(MukaiVector, BigRational)>,
}

fn check_input(x: &Surface, v: &MukaiVector) -> Result<()> {
    if !is_spherical(x, v) {
        return Err(Error::NotSpherical(v.clone()));
    }
    if !v.r.is_positive() || !v.d.is_positive() {
        return Err(Error::NonPositive(v.clone()));
    }
    Ok(())
}

/// `(a1 d - a d1) / (r1 d - r d1)` when `v1` qualifies as a witness for `v`.
fn witness_ratio(x: &Surface, v: &MukaiVector, v1: &MukaiVector) -> Option<BigRational> {
    if v1 == v || !pairing(x, v, v1).is_negative() {
        return None;
    }
    let den = &v1.r * &v.d - &v.r * &v1.d;
    if den.is_zero() {
        return None;
    }
    let ratio = BigRational::new(&v1.a * &v.d - &v.a * &v1.d, den);
    ratio.is_positive().then_some(ratio)
}

fn report(mut witnesses: Vec<(MukaiVector, BigRational)>) -> WeakBNReport {
    witnesses.sort_by(|a, b| (&a.0.d, &a.0.r).cmp(&(&b.0.d, &b.0.r)));
    let y = witnesses.iter().map(|(_, y)| y.clone()).max();
    let holds = y.as_ref().is_none_or(|y| y < &BigRational::one());
    WeakBNReport { holds, y, witnesses }
}

/// Weak Brill-Noether for the stable bundle of class `v` with `r, d > 0`:
/// the largest ratio over spherical `v1 != v` with `v.v1 < 0`, positive
/// ratio and `0 < d1 <= d` is below one.
pub fn weak_bn(x: &Surface, v: &MukaiVector) -> Result<WeakBNReport> {
    check_input(x, v)?;
    let too_large = || Error::SearchTooLarge(format!("degree {} on H^2 = {}", v.d, 2 * x.n()));
    let dmax = v.d.to_u64().ok_or_else(too_large)?;
    let n = x.n().to_u128().ok_or_else(too_large)?;
    // With n d^2 + 1 < 2^62 every pairing and numerator fits in i128.
    let small = (n * dmax as u128 * dmax as u128) < (1u128 << 62);
    let vs = small.then(|| (v.r.to_i128().unwrap(), v.d.to_i128().unwrap(), v.a.to_i128().unwrap()));
    let nn = n as i128;
    let mut witnesses = Vec::new();
    let mut divs = Vec::new();
    for_each_factored(n, dmax, |d1, factors| {
        let m = n * d1 as u128 * d1 as u128 + 1;
        divisors_into(factors, &mut divs);
        for &r in &divs {
            let a = if m >> 64 == 0 { (m as u64 / r as u64) as u128 } else { m / r };
            for sign in [1i128, -1] {
                let (r1, a1) = (sign * r as i128, sign * a as i128);
                if let Some((r, d, a)) = vs {
                    let d1 = d1 as i128;
                    let pair = 2 * nn * d * d1 - r * a1 - r1 * a;
                    let den = r1 * d - r * d1;
                    let num = a1 * d - a * d1;
                    if pair >= 0 || den == 0 || (num > 0) != (den > 0) || num == 0 {
                        continue;
                    }
                }
                let v1 = MukaiVector::new(r1, d1, a1);
                if let Some(y) = witness_ratio(x, v, &v1) {
                    witnesses.push((v1, y));
                }
            }
        }
    })
    .ok_or_else(too_large)?;
    Ok(report(witnesses))
}

/// [`weak_bn`] by direct enumeration of spherical classes.
pub fn weak_bn_brute(x: &Surface, v: &MukaiVector) -> Result<WeakBNReport> {
    check_input(x, v)?;
    let dmax = v.d.to_u64().ok_or_else(|| Error::SearchTooLarge(v.to_string()))?;
    let mut witnesses = Vec::new();
    for v1 in crate::mukai::enumerate_spherical(x, 1, dmax, |_| true) {
        if let Some(y) = witness_ratio(x, v, &v1) {
            witnesses.push((v1, y));
        }
    }
    Ok(report(witnesses))
}

/// All positive divisors from a factorization, in no particular order.
fn divisors_into(factors: &[(u128, u32)], out: &mut Vec<u128>) {
    out.clear();
    out.push(1);
    for &(p, e) in factors {
        let len = out.len();
        let mut pk = 1u128;
        for _ in 0..e {
            pk *= p;
            for i in 0..len {
                out.push(out[i] * pk);
            }
        }
    }
}

fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    if p >> 32 == 0 {
        (a % p) * (b % p) % p
    } else {
        ((a as u128 * b as u128) % p as u128) as u64
    }
}

fn pow_mod(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1 % p;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, b, p);
        }
        b = mul_mod(b, b, p);
        e >>= 1;
    }
    r
}

/// A square root of a quadratic residue `c` modulo an odd prime.
fn sqrt_mod(c: u64, p: u64) -> Option<u64> {
    let c = c % p;
    if c == 0 {
        return Some(0);
    }
    if pow_mod(c, (p - 1) / 2, p) != 1 {
        return None;
    }
    // Tonelli-Shanks
    let (mut q, mut s) = (p - 1, 0u32);
    while q % 2 == 0 {
        q /= 2;
        s += 1;
    }
    let mut z = 2;
    while pow_mod(z, (p - 1) / 2, p) != p - 1 {
        z += 1;
    }
    let mut m = s;
    let mut c2 = pow_mod(z, q, p);
    let mut t = pow_mod(c, q, p);
    let mut r = pow_mod(c, q.div_ceil(2), p);
    while t != 1 {
        let mut i = 0;
        let mut t2 = t;
        while t2 != 1 {
            t2 = mul_mod(t2, t2, p);
            i += 1;
        }
        let b = pow_mod(c2, 1 << (m - i - 1), p);
        m = i;
        c2 = mul_mod(b, b, p);
        t = mul_mod(t, c2, p);
        r = mul_mod(r, b, p);
    }
    Some(r)
}

fn primes_upto(limit: u64) -> Vec<u64> {
    let limit = limit as usize;
    let mut composite = vec![false; limit + 1];
    let mut out = Vec::new();
    for i in 2..=limit {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= limit {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

/// Calls `f(x, factorization of n x^2 + 1)` for `x = 1..=xmax` in order,
/// sieving each prime over the residues where it divides. `None` when the
/// range exceeds the supported bounds.
fn for_each_factored(n: u128, xmax: u64, mut f: impl FnMut(u64, &[(u128, u32)])) -> Option<()> {
    if xmax == 0 {
        return Some(());
    }
    let top = n.checked_mul((xmax as u128).checked_mul(xmax as u128)?)?.checked_add(1)?;
    if top >= 1u128 << 120 {
        return None;
    }
    let bound = (Roots::sqrt(&top) + 1) as u64;
    if bound > MAX_SIEVE_BOUND {
        return None;
    }
    let mut roots: Vec<(u64, u64)> = Vec::new();
    for p in primes_upto(bound) {
        if p == 2 {
            if n % 2 == 1 {
                roots.push((2, 1));
            }
            continue;
        }
        let nm = (n % p as u128) as u64;
        if nm == 0 {
            continue;
        }
        // n x^2 = -1, so x^2 = -(1/n)
        let inv = pow_mod(nm, p - 2, p);
        if let Some(r) = sqrt_mod(p - inv, p) {
            roots.push((p, r));
            if r != 0 && p - r != r {
                roots.push((p, p - r));
            }
        }
    }
    let block = 1u64 << 15;
    let mut rem: Vec<u128> = Vec::new();
    let mut hits: Vec<(u32, u64, u32)> = Vec::new();
    let mut sorted: Vec<(u64, u32)> = Vec::new();
    let mut start_of: Vec<usize> = Vec::new();
    let mut scratch: Vec<(u128, u32)> = Vec::new();
    let mut lo = 1u64;
    while lo <= xmax {
        let hi = (lo + block - 1).min(xmax);
        let len = (hi - lo + 1) as usize;
        rem.clear();
        rem.extend((lo..=hi).map(|x| n * x as u128 * x as u128 + 1));
        hits.clear();
        for &(p, r) in &roots {
            let mut x = lo + (r + p - lo % p) % p;
            while x <= hi {
                let i = (x - lo) as usize;
                let mut e = 0;
                if rem[i] >> 64 == 0 {
                    let mut q = rem[i] as u64;
                    while q.is_multiple_of(p) {
                        q /= p;
                        e += 1;
                    }
                    rem[i] = q as u128;
                } else {
                    while rem[i].is_multiple_of(p as u128) {
                        rem[i] /= p as u128;
                        e += 1;
                    }
                }
                hits.push((i as u32, p, e));
                x += p;
            }
        }
        // bucket the hits by position, keeping prime order
        start_of.clear();
        start_of.resize(len + 1, 0);
        for &(i, _, _) in &hits {
            start_of[i as usize + 1] += 1;
        }
        for i in 0..len {
            start_of[i + 1] += start_of[i];
        }
        sorted.clear();
        sorted.resize(hits.len(), (0, 0));
        let mut fill = start_of.clone();
        for &(i, p, e) in &hits {
            sorted[fill[i as usize]] = (p, e);
            fill[i as usize] += 1;
        }
        for i in 0..len {
            scratch.clear();
            scratch.extend(sorted[start_of[i]..start_of[i + 1]].iter().map(|&(p, e)| (p as u128, e)));
            if rem[i] > 1 {
                scratch.push((rem[i], 1));
            }
            f(lo + i as u64, &scratch);
        }
        lo = hi + 1;
    }
    Some(())
}

/// `h0 < 2 chi` for a stable spherical bundle with `r, d > 0` on a surface
/// of degree at least four.
pub fn h0_bound_check(x: &Surface, v: &MukaiVector, h0: &BigInt) -> Result<bool> {
    if x.n() == &BigInt::one() {
        return Err(Error::DegreeTwoUnsupported);
    }
    check_input(x, v)?;
    Ok(h0 < &(BigInt::from(2) * euler_char(v)))
}

/// `g > h^1(S0) + 2` and `g > h^0(T1) + 2` for the stable pair of a wall at
/// or above the Brill-Noether wall, with cohomology of the objects stable at
/// the wall.
pub fn coarse_inequalities(x: &Surface, w: &Rank2Wall, opts: &Options) -> Result<bool> {
    if x.n() == &BigInt::one() {
        return Err(Error::DegreeTwoUnsupported);
    }
    let (_, h1s) = cohomology_below(x, &w.s0, Some(&w.key), opts)?;
    let (h0t, _) = cohomology_below(x, &w.t1, Some(&w.key), opts)?;
    Ok(w.g > h1s + 2 && w.g > h0t + 2)
}

/// Either `O_X[1]` lies in the lattice of the wall or the two stable
/// classes have ranks of opposite sign.
pub fn negative_rank_wall_check(s0: &MukaiVector, t1: &MukaiVector) -> bool {
    let m = (&s0.d * &t1.a - &s0.a * &t1.d, &s0.a * &t1.r - &s0.r * &t1.a, &s0.r * &t1.d - &s0.d * &t1.r);
    let shifted_in_plane = (-&m.0 - &m.2).is_zero();
    shifted_in_plane || (&s0.r * &t1.r).is_negative()
}
