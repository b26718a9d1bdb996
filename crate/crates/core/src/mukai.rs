//! The algebraic Mukai lattice `Z + ZH + Z` of a K3 surface with `H^2 = 2n`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Roots;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// A polarized K3 surface of Picard rank one, recorded by `n = H^2 / 2`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Surface {
    n: BigInt,
}

impl Surface {
    pub fn new(n: impl Into<BigInt>) -> Result<Self> {
        let n = n.into();
        if n.is_positive() {
            Ok(Surface { n })
        } else {
            Err(Error::InvalidSurface(n))
        }
    }

    pub fn n(&self) -> &BigInt {
        &self.n
    }
}

/// The Mukai vector `(r, dH, a)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MukaiVector {
    pub r: BigInt,
    pub d: BigInt,
    pub a: BigInt,
}

impl MukaiVector {
    pub fn new(r: impl Into<BigInt>, d: impl Into<BigInt>, a: impl Into<BigInt>) -> Self {
        MukaiVector { r: r.into(), d: d.into(), a: a.into() }
    }

    /// `v(O_X) = (1, 0, 1)`.
    pub fn trivial() -> Self {
        MukaiVector::new(1, 0, 1)
    }

    /// `v(O_X[1]) = (-1, 0, -1)`.
    pub fn shifted_trivial() -> Self {
        MukaiVector::new(-1, 0, -1)
    }

    pub fn is_zero(&self) -> bool {
        self.r.is_zero() && self.d.is_zero() && self.a.is_zero()
    }

    pub fn scale(&self, k: &BigInt) -> Self {
        MukaiVector { r: &self.r * k, d: &self.d * k, a: &self.a * k }
    }

    /// Effective at the line `s = 0+`: the central charge lies in the
    /// upper half plane or on the negative real axis.
    pub fn is_effective(&self) -> bool {
        self.d.is_positive() || (self.d.is_zero() && self.r.is_negative())
    }

    pub fn as_tuple(&self) -> (&BigInt, &BigInt, &BigInt) {
        (&self.r, &self.d, &self.a)
    }
}

impl fmt::Display for MukaiVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.r, self.d, self.a)
    }
}

impl Add for &MukaiVector {
    type Output = MukaiVector;
    fn add(self, o: &MukaiVector) -> MukaiVector {
        MukaiVector { r: &self.r + &o.r, d: &self.d + &o.d, a: &self.a + &o.a }
    }
}

impl Sub for &MukaiVector {
    type Output = MukaiVector;
    fn sub(self, o: &MukaiVector) -> MukaiVector {
        MukaiVector { r: &self.r - &o.r, d: &self.d - &o.d, a: &self.a - &o.a }
    }
}

impl Neg for &MukaiVector {
    type Output = MukaiVector;
    fn neg(self) -> MukaiVector {
        MukaiVector { r: -&self.r, d: -&self.d, a: -&self.a }
    }
}

impl Mul<&MukaiVector> for &BigInt {
    type Output = MukaiVector;
    fn mul(self, v: &MukaiVector) -> MukaiVector {
        v.scale(self)
    }
}

/// Mukai pairing `2n d d' - r a' - r' a`.
pub fn pairing(x: &Surface, u: &MukaiVector, v: &MukaiVector) -> BigInt {
    BigInt::from(2) * x.n() * &u.d * &v.d - &u.r * &v.a - &v.r * &u.a
}

/// `chi(u, v) = -u.v`.
pub fn euler_pairing(x: &Surface, u: &MukaiVector, v: &MukaiVector) -> BigInt {
    -pairing(x, u, v)
}

/// `chi(v) = chi(O_X, v) = r + a`.
pub fn euler_char(v: &MukaiVector) -> BigInt {
    &v.r + &v.a
}

/// `r a = n d^2 + 1`, i.e. `v^2 = -2`.
pub fn is_spherical(x: &Surface, v: &MukaiVector) -> bool {
    &v.r * &v.a == x.n() * &v.d * &v.d + BigInt::one()
}

pub fn is_positive(x: &Surface, v: &MukaiVector) -> bool {
    if pairing(x, v, v) < BigInt::from(-2) {
        return false;
    }
    v.r.is_positive()
        || (v.r.is_zero() && v.d.is_positive() && !v.a.is_zero())
        || (v.r.is_zero() && v.d.is_zero() && v.a.is_positive())
}

/// `(r, d, a) -> (r, -d, a)`, the class of the derived dual.
pub fn dualize(v: &MukaiVector) -> MukaiVector {
    MukaiVector { r: v.r.clone(), d: -&v.d, a: v.a.clone() }
}

/// A spherical input reduced to `r, d > 0` (or `O_X`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalizedInput {
    pub class: MukaiVector,
    /// The class is the dual of the input; `h^0` and `h^2` trade places.
    pub dualized: bool,
}

impl NormalizedInput {
    pub fn is_trivial_bundle(&self) -> bool {
        self.class == MukaiVector::trivial()
    }
}

pub fn normalize_input(x: &Surface, v: &MukaiVector) -> Result<NormalizedInput> {
    if !is_spherical(x, v) {
        return Err(Error::NotSpherical(v.clone()));
    }
    if v.r.is_zero() {
        return Err(Error::ZeroRank);
    }
    if v.r.is_negative() {
        return Err(Error::NegativeRank(v.clone()));
    }
    let dualized = v.d.is_negative();
    let class = if dualized { dualize(v) } else { v.clone() };
    // r a = 1 with r > 0 leaves only O_X in degree zero.
    assert!(!class.d.is_zero() || class == MukaiVector::trivial(), "degree zero spherical class other than O_X");
    Ok(NormalizedInput { class, dualized })
}

/// All spherical classes with `d_min <= d <= d_max` accepted by `keep`,
/// both sign branches, ordered by `(d, r)`.
pub fn enumerate_spherical<F>(x: &Surface, d_min: u64, d_max: u64, mut keep: F) -> Vec<MukaiVector>
where
    F: FnMut(&MukaiVector) -> bool,
{
    let mut out = Vec::new();
    for d in d_min..=d_max {
        let d = BigInt::from(d);
        let m = x.n() * &d * &d + BigInt::one();
        let divs = positive_divisors(&m);
        let mut level: Vec<MukaiVector> = Vec::with_capacity(2 * divs.len());
        for r in &divs {
            let a = &m / r;
            level.push(MukaiVector::new(r.clone(), d.clone(), a.clone()));
            level.push(MukaiVector::new(-r, d.clone(), -a));
        }
        level.sort_by(|u, v| u.r.cmp(&v.r));
        out.extend(level.into_iter().filter(|v| keep(v)));
    }
    out
}

/// Positive divisors of `m > 0` in increasing order, by trial division.
pub fn positive_divisors(m: &BigInt) -> Vec<BigInt> {
    assert!(m.is_positive());
    let root = Roots::sqrt(m);
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut k = BigInt::one();
    while k <= root {
        if (m % &k).is_zero() {
            let co = m / &k;
            if co != k {
                large.push(co);
            }
            small.push(k.clone());
        }
        k += 1;
    }
    large.reverse();
    small.extend(large);
    small
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(n: i64) -> Surface {
        Surface::new(n).unwrap()
    }

    fn v(r: i64, d: i64, a: i64) -> MukaiVector {
        MukaiVector::new(r, d, a)
    }

    #[test]
    fn pairing_examples() {
        assert_eq!(pairing(&s(1), &v(1, 1, 2), &v(1, 1, 2)), BigInt::from(-2));
        assert_eq!(pairing(&s(1), &v(2, 3, 5), &v(-5, 12, -29)), BigInt::from(155));
        assert_eq!(pairing(&s(1), &v(1, 0, 1), &v(1, 0, 1)), BigInt::from(-2));
    }

    #[test]
    fn euler_examples() {
        assert_eq!(euler_char(&v(305, 477, 746)), BigInt::from(1051));
        assert_eq!(euler_char(&v(1, 0, 1)), BigInt::from(2));
        assert_eq!(euler_char(&v(10, 13, 17)), BigInt::from(27));
        assert_eq!(euler_pairing(&s(1), &v(2, 3, 5), &v(-5, 12, -29)), BigInt::from(-155));
    }

    #[test]
    fn spherical_examples() {
        assert!(is_spherical(&s(1), &v(1, 1, 2)));
        assert!(!is_spherical(&s(1), &v(1, 1, 3)));
        assert!(is_spherical(&s(1), &v(1340641, 1733695, 2241986)));
    }

    #[test]
    fn positive_examples() {
        assert!(is_positive(&s(1), &v(1, 1, 2)));
        assert!(!is_positive(&s(1), &v(-1, 0, -1)));
        assert!(is_positive(&s(1), &v(0, 0, 3)));
    }

    #[test]
    fn dualize_examples() {
        assert_eq!(dualize(&v(10, 13, 17)), v(10, -13, 17));
        assert_eq!(dualize(&dualize(&v(2, 3, 5))), v(2, 3, 5));
        assert_eq!(dualize(&v(1, 0, 1)), v(1, 0, 1));
    }

    #[test]
    fn normalize_examples() {
        let x = s(1);
        let a = normalize_input(&x, &v(10, -13, 17)).unwrap();
        assert_eq!(a, NormalizedInput { class: v(10, 13, 17), dualized: true });
        let b = normalize_input(&x, &v(10, 13, 17)).unwrap();
        assert_eq!(b, NormalizedInput { class: v(10, 13, 17), dualized: false });
        let c = normalize_input(&x, &v(1, 0, 1)).unwrap();
        assert!(c.is_trivial_bundle());
        assert_eq!(normalize_input(&x, &v(1, 1, 3)), Err(Error::NotSpherical(v(1, 1, 3))));
        assert_eq!(normalize_input(&s(2), &v(0, 1, 1)), Err(Error::NotSpherical(v(0, 1, 1))));
        assert!(matches!(normalize_input(&x, &v(-1, 0, -1)), Err(Error::NegativeRank(_))));
    }

    #[test]
    fn normalize_is_idempotent() {
        let x = s(1);
        for w in [v(10, -13, 17), v(2, 3, 5), v(1, 0, 1), v(5, -2, 1)] {
            let once = normalize_input(&x, &w).unwrap();
            let twice = normalize_input(&x, &once.class).unwrap();
            assert_eq!(twice.class, once.class);
            assert!(!twice.dualized);
        }
    }

    #[test]
    fn enumerate_examples() {
        let x = s(1);
        let one = enumerate_spherical(&x, 1, 1, |_| true);
        assert_eq!(one, vec![v(-2, 1, -1), v(-1, 1, -2), v(1, 1, 2), v(2, 1, 1)]);
        let zero = enumerate_spherical(&x, 0, 0, |_| true);
        assert_eq!(zero, vec![v(-1, 0, -1), v(1, 0, 1)]);
        assert_eq!(enumerate_spherical(&x, 13, 13, |_| true).len(), 16);
    }

    // Exhaustive scan over |r| <= n d^2 + 1 as an independent oracle.
    #[test]
    fn enumerate_matches_exhaustive_scan() {
        for n in 1..=3i64 {
            let x = s(n);
            let got = enumerate_spherical(&x, 0, 8, |_| true);
            let mut want = Vec::new();
            for d in 0..=8i64 {
                let bound = n * d * d + 1;
                for r in -bound..=bound {
                    if r == 0 {
                        continue;
                    }
                    let m = n * d * d + 1;
                    if m % r == 0 {
                        let c = v(r, d, m / r);
                        assert_eq!(pairing(&x, &c, &c), BigInt::from(-2));
                        want.push(c);
                    }
                }
            }
            assert_eq!(got, want);
        }
    }
}
