//! Factorial number system and Lehmer-code permutations.
//!
//! Digit `d_j` (first digit `j = 0`) carries weight `(g-1-j)!` and satisfies
//! `d_j <= g-1-j`. Decoding a permutation consumes the digits in that same
//! order, each picking by index among the positions not yet taken.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// `g!` as a big integer.
pub fn factorial(g: usize) -> BigUint {
    (1..=g).fold(BigUint::one(), |acc, k| acc * BigUint::from(k))
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FactorialDigits {
    digits: Vec<usize>,
}

impl FactorialDigits {
    pub fn new(digits: Vec<usize>) -> Result<Self> {
        if digits.is_empty() {
            return Err(Error::InvalidInput("need at least one digit".into()));
        }
        let g = digits.len();
        if let Some((j, &d)) = digits.iter().enumerate().find(|(j, &d)| d > g - 1 - j) {
            return Err(Error::InvalidInput(format!(
                "digit {} is {d}, exceeds its radix bound {}",
                j + 1,
                g - 1 - j
            )));
        }
        Ok(FactorialDigits { digits })
    }

    pub fn digits(&self) -> &[usize] {
        &self.digits
    }

    pub fn g(&self) -> usize {
        self.digits.len()
    }
}

/// Mixed-radix digits of `m`, which must be below `g!`.
pub fn to_factorial_digits(m: &BigUint, g: usize) -> Result<FactorialDigits> {
    if g == 0 {
        return Err(Error::InvalidParameter("g must be at least 1".into()));
    }
    if m >= &factorial(g) {
        return Err(Error::OutOfRange(format!("value is not below {g}!")));
    }
    // peel off the least significant digit first: radix k for position g-k
    let mut digits = vec![0usize; g];
    let mut rest = m.clone();
    for k in 1..=g {
        let (q, r) = rest.div_rem(&BigUint::from(k));
        digits[g - k] = r.to_usize().expect("remainder below radix");
        rest = q;
    }
    debug_assert!(rest.is_zero());
    Ok(FactorialDigits { digits })
}

pub fn from_factorial_digits(d: &FactorialDigits) -> BigUint {
    // Horner over radices g, g-1, ..., 1
    let g = d.g();
    d.digits
        .iter()
        .enumerate()
        .fold(BigUint::zero(), |acc, (j, &dj)| {
            acc * BigUint::from(g - j) + BigUint::from(dj)
        })
}

/// Lehmer decode to a permutation of `0..g`: entry `j` of the result is the
/// source position placed at slot `j`.
pub fn decode_permutation(d: &FactorialDigits) -> Vec<usize> {
    let mut remaining: Vec<usize> = (0..d.g()).collect();
    d.digits.iter().map(|&dj| remaining.remove(dj)).collect()
}

/// First `take` entries of `vector` after permuting it by `d`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SelectionMap<T> {
    /// `(value, source position)` in permuted order.
    pub selected: Vec<(T, usize)>,
    pub source_len: usize,
}

impl<T> SelectionMap<T> {
    pub fn values(&self) -> impl Iterator<Item = &T> {
        self.selected.iter().map(|(v, _)| v)
    }

    pub fn positions(&self) -> impl Iterator<Item = usize> + '_ {
        self.selected.iter().map(|&(_, p)| p)
    }
}

pub fn apply_selection<T: Clone>(
    vector: &[T],
    d: &FactorialDigits,
    take: usize,
) -> Result<SelectionMap<T>> {
    if vector.len() != d.g() {
        return Err(Error::InvalidParameter(format!(
            "vector has {} entries, digits describe {}",
            vector.len(),
            d.g()
        )));
    }
    if take > d.g() {
        return Err(Error::InvalidParameter(format!(
            "cannot take {take} of {} entries",
            d.g()
        )));
    }
    let selected = decode_permutation(d)
        .into_iter()
        .take(take)
        .map(|pos| (vector[pos].clone(), pos))
        .collect();
    Ok(SelectionMap {
        selected,
        source_len: vector.len(),
    })
}
