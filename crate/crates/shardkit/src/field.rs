//! Exact arithmetic in GF(p) for a 64-bit prime p.
//!
//! Every element carries its modulus; mixing moduli is an error rather than a
//! silent reduction. Multiplications and inversions are tallied in a
//! caller-owned [`OpCounter`] so complexity bounds can be asserted in tests.

use rand::Rng;

use crate::error::{Error, Result};

/// Default production prime: 2^61 - 1 (Mersenne, fits a double-word multiply).
pub const DEFAULT_PRIME: u64 = (1 << 61) - 1;

/// A prime p >= 5 defining GF(p). Primality is verified at construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PrimeModulus {
    p: u64,
    bit_length: u32,
}

impl PrimeModulus {
    pub fn new(p: u64) -> Result<Self> {
        if p < 5 || !is_prime_u64(p) {
            return Err(Error::NotPrime(p));
        }
        Ok(Self {
            p,
            bit_length: 64 - p.leading_zeros(),
        })
    }

    pub fn value(self) -> u64 {
        self.p
    }

    pub fn bit_length(self) -> u32 {
        self.bit_length
    }

    /// Builds an element, reducing the input mod p.
    pub fn element(self, value: u64) -> FieldElement {
        FieldElement {
            value: value % self.p,
            modulus: self,
        }
    }
}

/// A residue in [0, p).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldElement {
    value: u64,
    modulus: PrimeModulus,
}

/// Tally of field multiplications and inversions.
///
/// Divisions count as a single inversion: the quotient is one extended-Euclid
/// inverse with the final product folded in, matching how reconstruction cost
/// is accounted (shares times fractions).
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct OpCounter {
    multiplications: u64,
    inversions: u64,
}

impl OpCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn multiplications(&self) -> u64 {
        self.multiplications
    }

    pub fn inversions(&self) -> u64 {
        self.inversions
    }
}

impl FieldElement {
    pub fn value(self) -> u64 {
        self.value
    }

    pub fn modulus(self) -> PrimeModulus {
        self.modulus
    }

    pub fn is_zero(self) -> bool {
        self.value == 0
    }

    fn same_field(self, other: Self) -> Result<()> {
        if self.modulus != other.modulus {
            return Err(Error::ModulusMismatch);
        }
        Ok(())
    }

    // These are fallible (mixed moduli) or counter-taking, so the std ops
    // traits do not fit.
    #[allow(clippy::should_implement_trait)]
    pub fn add(self, other: Self) -> Result<Self> {
        self.same_field(other)?;
        let p = self.modulus.p as u128;
        let v = (self.value as u128 + other.value as u128) % p;
        Ok(Self {
            value: v as u64,
            modulus: self.modulus,
        })
    }

    #[allow(clippy::should_implement_trait)]
    pub fn sub(self, other: Self) -> Result<Self> {
        self.same_field(other)?;
        self.add(other.neg())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn neg(self) -> Self {
        let v = if self.value == 0 {
            0
        } else {
            self.modulus.p - self.value
        };
        Self {
            value: v,
            modulus: self.modulus,
        }
    }

    pub fn mul(self, other: Self, counter: &mut OpCounter) -> Result<Self> {
        self.same_field(other)?;
        counter.multiplications += 1;
        Ok(self.raw_mul(other))
    }

    fn raw_mul(self, other: Self) -> Self {
        let p = self.modulus.p as u128;
        let v = (self.value as u128 * other.value as u128) % p;
        Self {
            value: v as u64,
            modulus: self.modulus,
        }
    }

    /// Multiplicative inverse via extended Euclid.
    pub fn inv(self, counter: &mut OpCounter) -> Result<Self> {
        if self.value == 0 {
            return Err(Error::NoInverseOfZero);
        }
        counter.inversions += 1;
        Ok(Self {
            value: mod_inverse(self.value, self.modulus.p),
            modulus: self.modulus,
        })
    }

    /// self / other, counted as one inversion.
    pub fn div(self, other: Self, counter: &mut OpCounter) -> Result<Self> {
        self.same_field(other)?;
        if other.value == 0 {
            return Err(Error::NoInverseOfZero);
        }
        counter.inversions += 1;
        let inv = Self {
            value: mod_inverse(other.value, self.modulus.p),
            modulus: self.modulus,
        };
        Ok(self.raw_mul(inv))
    }
}

/// Inverse of a mod p for prime p, 0 < a < p.
fn mod_inverse(a: u64, p: u64) -> u64 {
    // Extended Euclid on (a, p); the Bezout coefficient of a is the inverse.
    let (mut old_r, mut r) = (a as i128, p as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    debug_assert_eq!(old_r, 1);
    let mut v = old_s % p as i128;
    if v < 0 {
        v += p as i128;
    }
    v as u64
}

/// Source of uniform field elements. Implemented by seeded RNGs for
/// production dealing and by [`TapeSource`] for exhaustive enumeration.
pub trait FieldSource {
    fn draw(&mut self, modulus: PrimeModulus) -> FieldElement;
}

/// Adapter turning any [`rand::Rng`] into a [`FieldSource`].
pub struct RngSource<R: Rng>(pub R);

impl<R: Rng> FieldSource for RngSource<R> {
    fn draw(&mut self, modulus: PrimeModulus) -> FieldElement {
        modulus.element(self.0.gen_range(0..modulus.value()))
    }
}

/// Replays a fixed sequence of values; panics when exhausted or when a value
/// does not fit the requested field. Used to pin dealer randomness in tests
/// and in the perfectness enumerator.
pub struct TapeSource {
    values: Vec<u64>,
    pos: usize,
}

impl TapeSource {
    pub fn new(values: Vec<u64>) -> Self {
        Self { values, pos: 0 }
    }

    pub fn remaining(&self) -> usize {
        self.values.len() - self.pos
    }
}

impl FieldSource for TapeSource {
    fn draw(&mut self, modulus: PrimeModulus) -> FieldElement {
        let v = *self
            .values
            .get(self.pos)
            .expect("randomness tape exhausted");
        self.pos += 1;
        assert!(v < modulus.value(), "tape value out of field");
        modulus.element(v)
    }
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin, valid for all n < 2^64.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n.is_multiple_of(p) {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0u32;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}
