//! Superincreasing sequences, subset-sum solvers and the basic
//! Merkle-Hellman cryptosystem (identity permutation).

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::rng::DetRng;

/// Largest input accepted by [`brute_force_subset_sum`].
pub const BRUTE_FORCE_MAX_LEN: usize = 24;

/// A 0/1 vector summed against a knapsack.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct BitVector(Vec<bool>);

impl BitVector {
    pub fn new(bits: Vec<bool>) -> Self {
        BitVector(bits)
    }

    pub fn zeros(len: usize) -> Self {
        BitVector(vec![false; len])
    }

    pub fn ones(len: usize) -> Self {
        BitVector(vec![true; len])
    }

    /// Builds from 0/1 integers; anything else is rejected.
    pub fn from_u8s(bits: &[u8]) -> Result<Self> {
        bits.iter()
            .map(|&b| match b {
                0 => Ok(false),
                1 => Ok(true),
                other => Err(Error::InvalidInput(format!("bit value {other}"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(BitVector)
    }

    pub fn random(len: usize, rng: &mut DetRng) -> Self {
        BitVector((0..len).map(|_| rng.next_bit()).collect())
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn count_ones(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    /// `Σ values[i]·bits[i]`. Lengths must match.
    pub fn weighted_sum(&self, values: &[BigUint]) -> Result<BigUint> {
        if values.len() != self.len() {
            return Err(Error::InvalidParameter(format!(
                "bit vector has length {} but knapsack has {}",
                self.len(),
                values.len()
            )));
        }
        Ok(values
            .iter()
            .zip(&self.0)
            .filter(|(_, &bit)| bit)
            .fold(BigUint::zero(), |acc, (v, _)| acc + v))
    }

    pub fn into_inner(self) -> Vec<bool> {
        self.0
    }
}

impl From<Vec<bool>> for BitVector {
    fn from(bits: Vec<bool>) -> Self {
        BitVector(bits)
    }
}

/// True if every element exceeds the sum of all elements before it.
/// The empty sequence counts as superincreasing.
pub fn is_superincreasing(values: &[BigUint]) -> bool {
    superincreasing_prefix_len(values) == values.len()
}

/// Number of leading elements that satisfy the superincreasing condition.
pub fn superincreasing_prefix_len(values: &[BigUint]) -> usize {
    let mut sum = BigUint::zero();
    for (i, v) in values.iter().enumerate() {
        if v <= &sum {
            return i;
        }
        sum += v;
    }
    values.len()
}

/// The private easy knapsack: each element exceeds the sum of its
/// predecessors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuperincreasingSequence {
    elements: Vec<BigUint>,
    total: BigUint,
}

impl SuperincreasingSequence {
    pub fn new(elements: Vec<BigUint>) -> Result<Self> {
        if elements.is_empty() {
            return Err(Error::InvalidInput(
                "superincreasing sequence must be nonempty".into(),
            ));
        }
        let ok = superincreasing_prefix_len(&elements);
        if ok != elements.len() {
            return Err(Error::InvalidInput(format!(
                "element {} does not exceed the sum of its predecessors",
                ok + 1
            )));
        }
        let total = elements.iter().sum();
        Ok(SuperincreasingSequence { elements, total })
    }

    pub fn elements(&self) -> &[BigUint] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn total(&self) -> &BigUint {
        &self.total
    }
}

/// Samples a superincreasing sequence whose `i`-th element is the sum of its
/// predecessors plus a fresh uniform gap in `[1, 2^gap_bits]`.
pub fn gen_superincreasing(
    n: usize,
    gap_bits: u32,
    rng: &mut DetRng,
) -> Result<SuperincreasingSequence> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    if gap_bits == 0 {
        return Err(Error::InvalidParameter(
            "gap_bits must be at least 1".into(),
        ));
    }
    let one = BigUint::one();
    let max_gap = &one << gap_bits;
    let mut elements = Vec::with_capacity(n);
    let mut sum = BigUint::zero();
    for _ in 0..n {
        let b = &sum + rng.range_inclusive(&one, &max_gap);
        sum += &b;
        elements.push(b);
    }
    Ok(SuperincreasingSequence {
        elements,
        total: sum,
    })
}

/// Merkle-Hellman private key: easy knapsack, modulus and multiplier pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MhPrivateKey {
    b: SuperincreasingSequence,
    p: BigUint,
    w: BigUint,
    w_inv: BigUint,
}

impl MhPrivateKey {
    /// Assembles a key from chosen parts, computing `w⁻¹ mod p`.
    pub fn from_parts(b: SuperincreasingSequence, p: BigUint, w: BigUint) -> Result<Self> {
        if &p <= b.total() {
            return Err(Error::InvalidInput(
                "modulus must exceed the sum of the easy knapsack".into(),
            ));
        }
        if w.is_zero() || w >= p {
            return Err(Error::InvalidInput("multiplier must lie in [1, p)".into()));
        }
        let w_inv = w
            .modinv(&p)
            .ok_or_else(|| Error::InvalidInput("multiplier is not a unit mod p".into()))?;
        Ok(MhPrivateKey { b, p, w, w_inv })
    }

    /// Like [`from_parts`](Self::from_parts) but also checks a supplied inverse.
    pub fn with_inverse(
        b: SuperincreasingSequence,
        p: BigUint,
        w: BigUint,
        w_inv: BigUint,
    ) -> Result<Self> {
        let key = Self::from_parts(b, p, w)?;
        if key.w_inv != w_inv {
            return Err(Error::InvalidInput("w·w_inv is not 1 mod p".into()));
        }
        Ok(key)
    }

    pub fn b(&self) -> &SuperincreasingSequence {
        &self.b
    }

    pub fn p(&self) -> &BigUint {
        &self.p
    }

    pub fn w(&self) -> &BigUint {
        &self.w
    }

    pub fn w_inv(&self) -> &BigUint {
        &self.w_inv
    }

    /// `a[i] = b[i]·w mod p`.
    pub fn public_knapsack(&self) -> PublicKnapsack {
        PublicKnapsack {
            a: self
                .b
                .elements()
                .iter()
                .map(|bi| (bi * &self.w) % &self.p)
                .collect(),
        }
    }

    /// Undoes the modular mask: `c·w⁻¹ mod p`.
    pub fn unmask(&self, c: &BigUint) -> BigUint {
        (c * &self.w_inv) % &self.p
    }
}

/// The public trapdoor knapsack.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PublicKnapsack {
    pub a: Vec<BigUint>,
}

impl PublicKnapsack {
    pub fn new(a: Vec<BigUint>) -> Self {
        PublicKnapsack { a }
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }
}

/// Generates a Merkle-Hellman key pair. `p` is uniform in `(Σb, 2Σb]` and
/// `w` is a uniform unit modulo `p`.
pub fn mh_keygen(
    n: usize,
    gap_bits: u32,
    rng: &mut DetRng,
) -> Result<(MhPrivateKey, PublicKnapsack)> {
    let b = gen_superincreasing(n, gap_bits, rng)?;
    let one = BigUint::one();
    let low = b.total() + &one;
    let high = b.total() << 1;
    let p = rng.range_inclusive(&low, &high);
    let w = loop {
        let w = rng.below(&p);
        if !w.is_zero() && w.gcd(&p).is_one() {
            break w;
        }
    };
    let key = MhPrivateKey::from_parts(b, p, w)?;
    let public = key.public_knapsack();
    Ok((key, public))
}

pub fn encrypt_mh(public: &PublicKnapsack, m: &BitVector) -> Result<BigUint> {
    m.weighted_sum(&public.a)
}

pub fn decrypt_mh(key: &MhPrivateKey, c: &BigUint) -> Result<BitVector> {
    solve_superincreasing(&key.b, &key.unmask(c))
}

/// Greedy solver, largest element first. The solution is unique when it
/// exists.
pub fn solve_superincreasing(b: &SuperincreasingSequence, target: &BigUint) -> Result<BitVector> {
    if target > b.total() {
        return Err(Error::NotDecryptable);
    }
    let mut remaining = target.clone();
    let mut bits = vec![false; b.len()];
    for (i, bi) in b.elements().iter().enumerate().rev() {
        if bi <= &remaining {
            remaining -= bi;
            bits[i] = true;
        }
    }
    if remaining.is_zero() {
        Ok(BitVector(bits))
    } else {
        Err(Error::NotDecryptable)
    }
}

/// Solves a subset sum over a permuted selection of superincreasing values.
///
/// Each entry is `(value, slot)`; the slots must be a permutation of
/// `0..len` and say where that entry's bit goes in the output. The values,
/// sorted ascending, must be superincreasing.
pub fn solve_selected_multiset(
    values_with_positions: &[(BigUint, usize)],
    target: &BigUint,
) -> Result<BitVector> {
    let len = values_with_positions.len();
    let mut seen = vec![false; len];
    for &(_, pos) in values_with_positions {
        if pos >= len || std::mem::replace(&mut seen[pos], true) {
            return Err(Error::InvalidInput(format!(
                "positions must be a permutation of 0..{len}"
            )));
        }
    }
    let mut order: Vec<&(BigUint, usize)> = values_with_positions.iter().collect();
    order.sort_by(|x, y| x.0.cmp(&y.0));
    let mut sum = BigUint::zero();
    for (v, _) in &order {
        if v <= &sum {
            return Err(Error::InvalidInput(
                "selected values are not superincreasing when sorted".into(),
            ));
        }
        sum += v;
    }
    if target > &sum {
        return Err(Error::NotDecryptable);
    }
    let mut remaining = target.clone();
    let mut bits = vec![false; len];
    for (v, pos) in order.into_iter().rev() {
        if v <= &remaining {
            remaining -= v;
            bits[*pos] = true;
        }
    }
    if remaining.is_zero() {
        Ok(BitVector(bits))
    } else {
        Err(Error::NotDecryptable)
    }
}

/// Every 0/1 vector whose weighted sum equals `target`, in lexicographic
/// order. Exhaustive over `2^len` subsets; refuses more than
/// [`BRUTE_FORCE_MAX_LEN`] values.
pub fn brute_force_subset_sum(values: &[BigUint], target: &BigUint) -> Result<Vec<BitVector>> {
    let n = values.len();
    if n > BRUTE_FORCE_MAX_LEN {
        return Err(Error::Refused(format!(
            "brute force is capped at {BRUTE_FORCE_MAX_LEN} values, got {n}"
        )));
    }
    let mut out = Vec::new();
    for mask in 0u32..(1u32 << n) {
        // bit for index 0 is the most significant, giving lexicographic order
        let bits: Vec<bool> = (0..n).map(|i| (mask >> (n - 1 - i)) & 1 == 1).collect();
        let sum = values
            .iter()
            .zip(&bits)
            .filter(|(_, &b)| b)
            .fold(BigUint::zero(), |acc, (v, _)| acc + v);
        if &sum == target {
            out.push(BitVector(bits));
        }
    }
    Ok(out)
}
