//! Prime fields and binary extension fields with a fixed element enumeration.
//!
//! Elements are plain `u64` representatives wrapped in [`Fe`]; the arithmetic
//! lives on [`Field`], which is `Copy` and cheap to pass around.  Enumeration
//! is numeric order for prime fields and bit-pattern order of the coefficient
//! vector for GF(2^k), so index 0 is zero and index 1 is one in both cases.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A field element, stored as its canonical representative.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Fe(pub u64);

impl Fe {
    pub const ZERO: Fe = Fe(0);
    pub const ONE: Fe = Fe(1);

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for Fe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:x}", self.0)
    }
}

impl Serialize for Fe {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format!("{:x}", self.0))
    }
}

impl<'de> Deserialize<'de> for Fe {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        u64::from_str_radix(s.trim_start_matches("0x"), 16)
            .map(Fe)
            .map_err(serde::de::Error::custom)
    }
}

/// A finite field: either `Z/pZ` with `p < 2^61` or `GF(2)[x]/(f)` with `deg f <= 32`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Field {
    Prime { p: u64 },
    Binary { degree: u32, poly: u64 },
}

/// Which family a field belongs to, as accepted by [`make_field`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldKind {
    Prime,
    Binary,
}

/// Validates parameters and builds a field.
///
/// For `Prime` the parameter is the modulus; for `Binary` it is the degree and
/// the full polynomial (including the leading bit).
pub fn make_field(kind: FieldKind, modulus_or_degree: u64, poly: Option<u64>) -> Result<Field> {
    match kind {
        FieldKind::Prime => Field::prime(modulus_or_degree),
        FieldKind::Binary => {
            let degree = u32::try_from(modulus_or_degree)
                .map_err(|_| Error::BadField(format!("degree {modulus_or_degree}")))?;
            match poly {
                Some(p) => Field::binary(degree, p),
                None => Field::binary_default(degree),
            }
        }
    }
}

impl Field {
    pub fn prime(p: u64) -> Result<Field> {
        if p >= 1 << 61 {
            return Err(Error::BadField(format!("modulus {p} exceeds 2^61")));
        }
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        Ok(Field::Prime { p })
    }

    pub fn binary(degree: u32, poly: u64) -> Result<Field> {
        if degree == 0 || degree > 32 {
            return Err(Error::BadField(format!("binary degree {degree} outside 1..=32")));
        }
        if poly >> degree != 1 {
            return Err(Error::BadField(format!("polynomial {poly:#x} does not have degree {degree}")));
        }
        if !gf2_irreducible(poly) {
            return Err(Error::NotIrreducible(poly));
        }
        Ok(Field::Binary { degree, poly })
    }

    /// GF(2^degree) modulo the numerically smallest irreducible polynomial.
    pub fn binary_default(degree: u32) -> Result<Field> {
        if degree == 0 || degree > 32 {
            return Err(Error::BadField(format!("binary degree {degree} outside 1..=32")));
        }
        let top = 1u64 << degree;
        (top..top << 1)
            .find(|&f| gf2_irreducible(f))
            .map(|poly| Field::Binary { degree, poly })
            .ok_or(Error::NotIrreducible(top))
    }

    /// Parses `101`, `p101`, `prime:101`, `gf2^6` or `binary:6:0x43`.
    pub fn parse(s: &str) -> Result<Field> {
        let s = s.trim();
        let bad = || Error::BadField(s.to_string());
        if let Some(rest) = s.strip_prefix("gf2^") {
            return Field::binary_default(rest.parse().map_err(|_| bad())?);
        }
        if let Some(rest) = s.strip_prefix("binary:") {
            let mut parts = rest.split(':');
            let degree: u32 = parts.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
            return match parts.next() {
                Some(p) => Field::binary(
                    degree,
                    u64::from_str_radix(p.trim_start_matches("0x"), 16).map_err(|_| bad())?,
                ),
                None => Field::binary_default(degree),
            };
        }
        let digits = s.strip_prefix("prime:").or_else(|| s.strip_prefix('p')).unwrap_or(s);
        Field::prime(digits.parse().map_err(|_| bad())?)
    }

    pub fn size(&self) -> u64 {
        match *self {
            Field::Prime { p } => p,
            Field::Binary { degree, .. } => 1u64 << degree,
        }
    }

    pub fn characteristic(&self) -> u64 {
        match *self {
            Field::Prime { p } => p,
            Field::Binary { .. } => 2,
        }
    }

    pub fn zero(&self) -> Fe {
        Fe::ZERO
    }

    pub fn one(&self) -> Fe {
        Fe::ONE
    }

    /// The element at position `i` of the canonical enumeration.
    pub fn element(&self, i: u64) -> Fe {
        debug_assert!(i < self.size());
        Fe(i)
    }

    pub fn index(&self, x: Fe) -> u64 {
        x.0
    }

    pub fn elements(&self) -> impl Iterator<Item = Fe> {
        (0..self.size()).map(Fe)
    }

    pub fn is_valid(&self, x: Fe) -> bool {
        x.0 < self.size()
    }

    /// The image of an integer under the ring map `Z -> F`.
    pub fn from_int(&self, n: u64) -> Fe {
        match *self {
            Field::Prime { p } => Fe(n % p),
            Field::Binary { .. } => Fe(n & 1),
        }
    }

    pub fn from_i64(&self, n: i64) -> Fe {
        let x = self.from_int(n.unsigned_abs());
        if n < 0 {
            self.neg(x)
        } else {
            x
        }
    }

    #[inline]
    pub fn add(&self, a: Fe, b: Fe) -> Fe {
        match *self {
            Field::Prime { p } => {
                let s = a.0 + b.0;
                Fe(if s >= p { s - p } else { s })
            }
            Field::Binary { .. } => Fe(a.0 ^ b.0),
        }
    }

    #[inline]
    pub fn sub(&self, a: Fe, b: Fe) -> Fe {
        match *self {
            Field::Prime { p } => Fe(if a.0 >= b.0 { a.0 - b.0 } else { a.0 + p - b.0 }),
            Field::Binary { .. } => Fe(a.0 ^ b.0),
        }
    }

    #[inline]
    pub fn neg(&self, a: Fe) -> Fe {
        match *self {
            Field::Prime { p } => Fe(if a.0 == 0 { 0 } else { p - a.0 }),
            Field::Binary { .. } => a,
        }
    }

    #[inline]
    pub fn mul(&self, a: Fe, b: Fe) -> Fe {
        match *self {
            Field::Prime { p } => Fe(((a.0 as u128 * b.0 as u128) % p as u128) as u64),
            Field::Binary { degree, poly } => {
                let (mut x, mut y, mut r) = (a.0, b.0, 0u64);
                let top = 1u64 << degree;
                while y != 0 {
                    if y & 1 == 1 {
                        r ^= x;
                    }
                    y >>= 1;
                    x <<= 1;
                    if x & top != 0 {
                        x ^= poly;
                    }
                }
                Fe(r)
            }
        }
    }

    pub fn pow(&self, a: Fe, mut e: u64) -> Fe {
        let (mut base, mut acc) = (a, Fe::ONE);
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    pub fn inv(&self, a: Fe) -> Result<Fe> {
        if a.is_zero() {
            return Err(Error::DivideByZero);
        }
        Ok(self.pow(a, self.size() - 2))
    }

    pub fn div(&self, a: Fe, b: Fe) -> Result<Fe> {
        Ok(self.mul(a, self.inv(b)?))
    }

    pub fn sum<I: IntoIterator<Item = Fe>>(&self, it: I) -> Fe {
        it.into_iter().fold(Fe::ZERO, |acc, x| self.add(acc, x))
    }

    pub fn product<I: IntoIterator<Item = Fe>>(&self, it: I) -> Fe {
        it.into_iter().fold(Fe::ONE, |acc, x| self.mul(acc, x))
    }

    /// Inner product of two equal-length slices.
    pub fn dot(&self, a: &[Fe], b: &[Fe]) -> Fe {
        debug_assert_eq!(a.len(), b.len());
        match *self {
            Field::Prime { p } => {
                // Accumulate in u128 and reduce rarely; each term is below 2^122.
                let mut acc: u128 = 0;
                for (x, y) in a.iter().zip(b) {
                    acc += x.0 as u128 * y.0 as u128;
                    if acc >= 1 << 126 {
                        acc %= p as u128;
                    }
                }
                Fe((acc % p as u128) as u64)
            }
            Field::Binary { .. } => self.sum(a.iter().zip(b).map(|(&x, &y)| self.mul(x, y))),
        }
    }

    pub fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> Fe {
        Fe(rng.gen_range(0..self.size()))
    }

    pub fn random_nonzero<R: Rng + ?Sized>(&self, rng: &mut R) -> Fe {
        Fe(rng.gen_range(1..self.size()))
    }

    /// The first `size` elements of the enumeration (so `0` is always included).
    pub fn enumerate_subset(&self, name: &str, size: u64, require_zero: bool) -> Result<Subset> {
        if size > self.size() || (require_zero && size == 0) {
            return Err(Error::SubsetTooLarge { size, field: self.size() });
        }
        Ok(Subset::new(name, (0..size).map(Fe).collect()))
    }

    /// All elements fixed by `x -> x^(2^sub_degree)`, i.e. the subfield GF(2^sub_degree).
    pub fn subfield(&self, name: &str, sub_degree: u32) -> Result<Subset> {
        match *self {
            Field::Binary { degree, .. } if sub_degree >= 1 && degree % sub_degree == 0 => {
                let q = 1u64 << sub_degree;
                Ok(Subset::new(name, self.elements().filter(|&x| self.pow(x, q) == x).collect()))
            }
            _ => Err(Error::BadField(format!("no subfield GF(2^{sub_degree}) in {self}"))),
        }
    }

    pub fn to_doc(&self) -> FieldDoc {
        match *self {
            Field::Prime { p } => FieldDoc::Prime { modulus: p },
            Field::Binary { degree, poly } => FieldDoc::Binary { degree, poly: format!("{poly:x}") },
        }
    }

    pub fn from_doc(doc: &FieldDoc) -> Result<Field> {
        match doc {
            FieldDoc::Prime { modulus } => Field::prime(*modulus),
            FieldDoc::Binary { degree, poly } => Field::binary(
                *degree,
                u64::from_str_radix(poly.trim_start_matches("0x"), 16)
                    .map_err(|e| Error::Format(e.to_string()))?,
            ),
        }
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Field::Prime { p } => write!(f, "F_{p}"),
            Field::Binary { degree, poly } => write!(f, "GF(2^{degree}) mod {poly:#x}"),
        }
    }
}

/// Serialized form of a field.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum FieldDoc {
    Prime { modulus: u64 },
    Binary { degree: u32, poly: String },
}

impl Serialize for Field {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_doc().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Field {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let doc = FieldDoc::deserialize(d)?;
        Field::from_doc(&doc).map_err(serde::de::Error::custom)
    }
}

/// A named, ordered set of distinct field elements (H, G, K, ...).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Subset {
    pub name: String,
    elems: Arc<Vec<Fe>>,
}

impl Subset {
    pub fn new(name: &str, elems: Vec<Fe>) -> Subset {
        debug_assert!({
            let mut s = elems.clone();
            s.sort();
            s.windows(2).all(|w| w[0] != w[1])
        });
        Subset { name: name.to_string(), elems: Arc::new(elems) }
    }

    /// Builds a subset after checking that the elements are distinct and in range.
    pub fn checked(field: &Field, name: &str, elems: Vec<Fe>) -> Result<Subset> {
        let mut s = elems.clone();
        s.sort();
        if s.windows(2).any(|w| w[0] == w[1]) || elems.iter().any(|&x| !field.is_valid(x)) {
            return Err(Error::Format(format!("subset {name} has repeated or invalid elements")));
        }
        Ok(Subset::new(name, elems))
    }

    pub fn elems(&self) -> &[Fe] {
        &self.elems
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn contains(&self, x: Fe) -> bool {
        self.elems.contains(&x)
    }

    pub fn position(&self, x: Fe) -> Option<usize> {
        self.elems.iter().position(|&y| y == x)
    }

    /// Sum of all elements.
    pub fn total(&self, f: &Field) -> Fe {
        f.sum(self.elems.iter().copied())
    }
}

impl Serialize for Subset {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.elems.serialize(s)
    }
}

/// Where verifier challenges are drawn from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ChallengeSet {
    All,
    NonZero,
    /// `F \ S`, e.g. `I = F \ H`.
    Outside(Subset),
    Within(Subset),
}

impl ChallengeSet {
    pub fn contains(&self, x: Fe) -> bool {
        match self {
            ChallengeSet::All => true,
            ChallengeSet::NonZero => !x.is_zero(),
            ChallengeSet::Outside(s) => !s.contains(x),
            ChallengeSet::Within(s) => s.contains(x),
        }
    }

    pub fn size(&self, f: &Field) -> u64 {
        match self {
            ChallengeSet::All => f.size(),
            ChallengeSet::NonZero => f.size() - 1,
            ChallengeSet::Outside(s) => f.size() - s.len() as u64,
            ChallengeSet::Within(s) => s.len() as u64,
        }
    }

    /// Uniform draw; rejection from the enumeration except for explicit sets.
    pub fn draw<R: Rng + ?Sized>(&self, f: &Field, rng: &mut R) -> Fe {
        match self {
            ChallengeSet::Within(s) => s.elems()[rng.gen_range(0..s.len())],
            _ => loop {
                let x = f.random(rng);
                if self.contains(x) {
                    return x;
                }
            },
        }
    }
}

/// Deterministic Miller-Rabin, exact for all `u64`.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let mulmod = |a: u64, b: u64| ((a as u128 * b as u128) % n as u128) as u64;
    let powmod = |mut b: u64, mut e: u64| {
        let mut r = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                r = mulmod(r, b);
            }
            b = mulmod(b, b);
            e >>= 1;
        }
        r
    };
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = powmod(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod(x, x);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn gf2_degree(a: u64) -> i32 {
    63 - a.leading_zeros() as i32
}

fn gf2_mod(mut a: u64, m: u64) -> u64 {
    let dm = gf2_degree(m);
    while a != 0 && gf2_degree(a) >= dm {
        a ^= m << (gf2_degree(a) - dm);
    }
    a
}

fn gf2_mulmod(a: u64, b: u64, m: u64) -> u64 {
    let mut r: u128 = 0;
    for i in 0..64 {
        if b >> i & 1 == 1 {
            r ^= (a as u128) << i;
        }
    }
    // Reduce the (up to 127-bit) product.
    let dm = gf2_degree(m);
    let mut hi = 127;
    while hi >= dm {
        if r >> hi & 1 == 1 {
            r ^= (m as u128) << (hi - dm);
        }
        hi -= 1;
    }
    r as u64
}

fn gf2_gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let r = gf2_mod(a, b);
        a = b;
        b = r;
    }
    a
}

/// Ben-Or irreducibility test over GF(2).
pub fn gf2_irreducible(f: u64) -> bool {
    let n = gf2_degree(f);
    if n < 1 {
        return false;
    }
    if n == 1 {
        return true;
    }
    if f & 1 == 0 {
        return false;
    }
    let mut xp = 2u64; // x^(2^i) mod f
    for _ in 1..=n / 2 {
        xp = gf2_mulmod(xp, xp, f);
        if gf2_gcd(f, xp ^ 2) != 1 {
            return false;
        }
    }
    true
}
