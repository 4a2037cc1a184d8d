//! Scalar fields for the linear-algebra routines.
//!
//! A [`Field`] is a context value that owns whatever parameters its elements
//! need (the modulus for `F_q`), so element types stay plain `Copy` data.

use std::fmt;
use std::marker::PhantomData;

use num_traits::Num;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("{0} is not a prime")]
    NotPrime(u32),
}

pub trait Field: Clone + fmt::Debug {
    type Elem: Copy + PartialEq + fmt::Debug;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn add(&self, a: Self::Elem, b: Self::Elem) -> Self::Elem;
    fn sub(&self, a: Self::Elem, b: Self::Elem) -> Self::Elem;
    fn mul(&self, a: Self::Elem, b: Self::Elem) -> Self::Elem;
    /// `None` for zero.
    fn inv(&self, a: Self::Elem) -> Option<Self::Elem>;

    fn is_zero(&self, a: Self::Elem) -> bool {
        a == self.zero()
    }
}

pub fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u32;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Primes `p` with `lo <= p <= hi`, ascending.
pub fn primes_between(lo: u32, hi: u32) -> impl Iterator<Item = u32> {
    (lo..=hi).filter(|&p| is_prime(p))
}

fn prime_factors(mut n: u32) -> Vec<u32> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// The prime field `F_q` together with its least primitive element.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct PrimeField {
    q: u32,
    gamma: u32,
}

impl fmt::Debug for PrimeField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}", self.q)
    }
}

impl PrimeField {
    pub fn new(q: u32) -> Result<Self, FieldError> {
        if !is_prime(q) || q > 65_521 {
            return Err(FieldError::NotPrime(q));
        }
        let mut field = PrimeField { q, gamma: 1 };
        field.gamma = field.least_primitive_element();
        Ok(field)
    }

    pub fn binary() -> Self {
        PrimeField { q: 2, gamma: 1 }
    }

    #[inline]
    pub fn modulus(&self) -> u32 {
        self.q
    }

    /// Least generator of the multiplicative group.
    #[inline]
    pub fn gamma(&self) -> u32 {
        self.gamma
    }

    #[inline]
    pub fn reduce(&self, x: u64) -> u32 {
        (x % self.q as u64) as u32
    }

    pub fn pow(&self, base: u32, mut exp: u64) -> u32 {
        let mut acc = 1 % self.q;
        let mut b = base % self.q;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, b);
            }
            b = self.mul(b, b);
            exp >>= 1;
        }
        acc
    }

    /// Multiplicative order of a nonzero element.
    pub fn order(&self, a: u32) -> Option<u32> {
        if a.is_multiple_of(self.q) {
            return None;
        }
        let mut x = a % self.q;
        let mut k = 1;
        while x != 1 {
            x = self.mul(x, a);
            k += 1;
        }
        Some(k)
    }

    fn least_primitive_element(&self) -> u32 {
        if self.q == 2 {
            return 1;
        }
        let n = self.q - 1;
        let factors = prime_factors(n);
        (2..self.q)
            .find(|&g| factors.iter().all(|&p| self.pow(g, (n / p) as u64) != 1))
            .expect("every prime field has a primitive element")
    }
}

impl Field for PrimeField {
    type Elem = u32;

    #[inline]
    fn zero(&self) -> u32 {
        0
    }

    #[inline]
    fn one(&self) -> u32 {
        1
    }

    #[inline]
    fn add(&self, a: u32, b: u32) -> u32 {
        let s = a + b;
        if s >= self.q {
            s - self.q
        } else {
            s
        }
    }

    #[inline]
    fn sub(&self, a: u32, b: u32) -> u32 {
        if a >= b {
            a - b
        } else {
            a + self.q - b
        }
    }

    #[inline]
    fn mul(&self, a: u32, b: u32) -> u32 {
        ((a as u64 * b as u64) % self.q as u64) as u32
    }

    fn inv(&self, a: u32) -> Option<u32> {
        (a != 0).then(|| self.pow(a, (self.q - 2) as u64))
    }
}

/// Any exact `num-traits` number type used as a field, e.g. `Ratio<i64>`.
pub struct Exact<T>(PhantomData<T>);

impl<T> Exact<T> {
    pub fn new() -> Self {
        Exact(PhantomData)
    }
}

impl<T> Default for Exact<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T> Clone for Exact<T> {
    fn clone(&self) -> Self {
        Self::new()
    }
}

impl<T> fmt::Debug for Exact<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Exact<{}>", std::any::type_name::<T>())
    }
}

impl<T> Field for Exact<T>
where
    T: Num + Copy + fmt::Debug,
{
    type Elem = T;

    fn zero(&self) -> T {
        T::zero()
    }

    fn one(&self) -> T {
        T::one()
    }

    fn add(&self, a: T, b: T) -> T {
        a + b
    }

    fn sub(&self, a: T, b: T) -> T {
        a - b
    }

    fn mul(&self, a: T, b: T) -> T {
        a * b
    }

    fn inv(&self, a: T) -> Option<T> {
        (!a.is_zero()).then(|| T::one() / a)
    }
}
