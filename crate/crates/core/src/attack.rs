//! Shamir's attack on Merkle-Hellman style trapdoor knapsacks.
//!
//! With `U = w⁻¹ mod p` every public element satisfies
//! `a_i·U - k_i·p = b_i` for small `b_i`, so `k_1/a_1` approximates every
//! `k_i/a_i` at once. LLL on the simultaneous diophantine approximation
//! lattice guesses `k_1`; the ratio `k_1/a_1` is then nudged to a nearby
//! rational `U'/P'` under which `a_i·U' mod P'` is superincreasing and sums
//! below `P'`, which is all decryption needs.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use num_bigint::{BigInt, BigUint, Sign, ToBigInt};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::factoradic::to_factorial_digits;
use crate::hwang::{check_envelope, derive_working_knapsack, CiphertextEnvelope, HwangPublicKey};
use crate::knapsack::{
    solve_selected_multiset, superincreasing_prefix_len, BitVector, MhPrivateKey, PublicKnapsack,
};
use crate::lattice::{default_delta, lll_reduce, IntegerBasis, ReductionResult};
use crate::message::{bits_to_bytes, join_blocks};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttackConfig {
    /// Number of public elements in the lattice (its dimension).
    pub t: usize,
    /// Scale of the first (denominator) coordinate.
    pub lambda_scale: BigUint,
    /// Scale of the approximation coordinates. `None` picks `2^(n-t)`,
    /// which balances the two kinds of coordinate of the target vector for
    /// keys whose easy knapsack roughly doubles per element.
    pub column_weight: Option<BigUint>,
    /// Number of lattice weights tried: the base weight times `4^j` for
    /// `j < weight_steps`. Larger weights help when `k_1` is close to `a_1`.
    pub weight_steps: usize,
    /// Cap on candidate `k_1` values tried.
    pub max_candidates: usize,
    pub delta: BigRational,
    /// Cap on linear pieces of `y ↦ a_i·(k_1 + y)/a_1 mod 1` searched per
    /// candidate.
    pub max_intervals: usize,
}

impl Default for AttackConfig {
    fn default() -> Self {
        AttackConfig {
            t: 5,
            lambda_scale: BigUint::one(),
            column_weight: None,
            weight_steps: 3,
            max_candidates: 64,
            delta: default_delta(),
            max_intervals: 64,
        }
    }
}

impl AttackConfig {
    pub fn with_t(t: usize) -> Self {
        AttackConfig {
            t,
            ..Default::default()
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.t < 3 || self.t > n {
            return Err(Error::InvalidParameter(format!(
                "lattice dimension {} must lie in [3, {n}]",
                self.t
            )));
        }
        if self.lambda_scale.is_zero() {
            return Err(Error::InvalidParameter(
                "lambda_scale must be at least 1".into(),
            ));
        }
        if self.column_weight.as_ref().is_some_and(Zero::is_zero) {
            return Err(Error::InvalidParameter(
                "column weight must be at least 1".into(),
            ));
        }
        if self.weight_steps == 0 {
            return Err(Error::InvalidParameter(
                "weight_steps must be at least 1".into(),
            ));
        }
        if self.max_candidates == 0 {
            return Err(Error::InvalidParameter(
                "max_candidates must be at least 1".into(),
            ));
        }
        crate::lattice::check_delta(&self.delta)
    }

    pub fn weight_for(&self, n: usize) -> BigUint {
        self.column_weight
            .clone()
            .unwrap_or_else(|| BigUint::one() << n.saturating_sub(self.t))
    }
}

/// An equivalent trapdoor recovered from public data.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecoveredKey {
    pub u_prime: BigUint,
    pub p_prime: BigUint,
    /// `a_i·U' mod P'` for every public element.
    pub b_prime: Vec<BigUint>,
    pub superincreasing_when_sorted: bool,
    /// `Σ b'_i < P'`, so masked sums never wrap.
    pub sum_below_modulus: bool,
    /// The lattice guess this key was derived from.
    pub k1: BigUint,
    pub candidates_tried: usize,
}

impl RecoveredKey {
    pub fn is_usable(&self) -> bool {
        self.superincreasing_when_sorted && self.sum_below_modulus
    }

    fn evaluate(a: &[BigUint], u_prime: BigUint, p_prime: BigUint, k1: &BigUint) -> Self {
        let b_prime: Vec<BigUint> = a.iter().map(|ai| (ai * &u_prime) % &p_prime).collect();
        let mut sorted = b_prime.clone();
        sorted.sort();
        let superincreasing_when_sorted = superincreasing_prefix_len(&sorted) == sorted.len();
        let total: BigUint = b_prime.iter().sum();
        RecoveredKey {
            sum_below_modulus: total < p_prime,
            u_prime,
            p_prime,
            b_prime,
            superincreasing_when_sorted,
            k1: k1.clone(),
            candidates_tried: 0,
        }
    }

    fn score(&self) -> usize {
        let mut sorted = self.b_prime.clone();
        sorted.sort();
        superincreasing_prefix_len(&sorted)
    }

    /// `c·U' mod P'`.
    pub fn unmask(&self, c: &BigUint) -> BigUint {
        (c * &self.u_prime) % &self.p_prime
    }
}

/// Unweighted lattice: row 1 is `(λ, a_2, …, a_t)`, row `i` has `-a_1` in
/// column `i`.
pub fn build_sda_lattice(a: &[BigUint], lambda_scale: &BigUint) -> Result<IntegerBasis> {
    build_weighted_sda_lattice(a, lambda_scale, &BigUint::one())
}

/// As [`build_sda_lattice`] with columns `2..t` multiplied by `weight`. The
/// combination `k_1·row_1 + Σ k_i·row_i` is
/// `(λ·k_1, w·(a_2·k_1 - a_1·k_2), …, w·(a_t·k_1 - a_1·k_t))`.
pub fn build_weighted_sda_lattice(
    a: &[BigUint],
    lambda_scale: &BigUint,
    weight: &BigUint,
) -> Result<IntegerBasis> {
    let t = a.len();
    if t < 3 {
        return Err(Error::InvalidParameter(format!(
            "lattice needs at least 3 elements, got {t}"
        )));
    }
    if a.iter().any(Zero::is_zero) {
        return Err(Error::InvalidInput(
            "public elements must be positive".into(),
        ));
    }
    let w = BigInt::from(weight.clone());
    let a1 = BigInt::from(a[0].clone());
    let mut rows = Vec::with_capacity(t);
    let mut first = vec![BigInt::from(lambda_scale.clone())];
    first.extend(a[1..].iter().map(|ai| BigInt::from(ai.clone()) * &w));
    rows.push(first);
    for i in 1..t {
        let mut row = vec![BigInt::zero(); t];
        row[i] = -(&a1 * &w);
        rows.push(row);
    }
    IntegerBasis::new(rows)
}

/// Largest coefficient used when combining pairs of short reduced rows.
const PAIR_COEFF_BOUND: i64 = 3;
/// Rows of the reduced basis that take part in pair combinations.
const PAIR_ROWS: usize = 3;

/// Candidate `k_1` values read off the first coordinate of reduced rows, in
/// row order, then from short combinations `α·r_i + β·r_j` of the leading
/// rows (coprime `|α|, |β| <= 3`), shortest combination first. Values are
/// taken modulo `a_1`; zeros and repeats are dropped.
///
/// The true denominator is not always a basis row: the reduced basis often
/// starts with two short vectors spanning a plane that contains it.
pub fn extract_candidates(
    result: &ReductionResult,
    a: &[BigUint],
    config: &AttackConfig,
) -> Vec<BigUint> {
    let lambda = BigInt::from(config.lambda_scale.clone());
    let a1 = a[0].clone();
    let rows = result.reduced.rows();
    let mut out: Vec<BigUint> = Vec::new();
    let push = |x: &BigInt, out: &mut Vec<BigUint>| {
        if out.len() >= config.max_candidates || x.is_zero() {
            return;
        }
        let (q, r) = x.abs().div_rem(&lambda);
        if !r.is_zero() {
            return;
        }
        let k = q.magnitude() % &a1;
        if !k.is_zero() && !out.contains(&k) {
            out.push(k);
        }
    };
    for row in rows {
        push(&row[0], &mut out);
    }

    let lead = rows.len().min(PAIR_ROWS);
    let mut combos: Vec<(BigInt, BigInt)> = Vec::new();
    for i in 0..lead {
        for j in i + 1..lead {
            for alpha in 1..=PAIR_COEFF_BOUND {
                for beta in -PAIR_COEFF_BOUND..=PAIR_COEFF_BOUND {
                    if beta == 0 || alpha.gcd(&beta) != 1 {
                        continue;
                    }
                    let v: Vec<BigInt> = rows[i]
                        .iter()
                        .zip(&rows[j])
                        .map(|(x, y)| x * alpha + y * beta)
                        .collect();
                    combos.push((crate::lattice::norm_sq(&v), v[0].clone()));
                }
            }
        }
    }
    combos.sort();
    for (_, first) in &combos {
        push(first, &mut out);
    }
    out
}

/// Recovers an equivalent trapdoor from the public knapsack.
///
/// Candidates are tried in order, first from the base lattice weight and
/// then from each larger one. For each, `(k_1, a_1)` itself is tested
/// first, then the refined `(U', P')` near `k_1/a_1`; the first key that is
/// superincreasing when sorted and sums below its modulus wins. If none
/// qualifies, the candidate with the longest superincreasing sorted prefix
/// is returned flagged unusable.
pub fn recover_key(a: &[BigUint], config: &AttackConfig) -> Result<RecoveredKey> {
    let n = a.len();
    config.validate(n)?;
    let head = &a[..config.t];
    let mut best: Option<(usize, RecoveredKey)> = None;
    let mut tried = 0;
    let mut seen: Vec<BigUint> = Vec::new();
    for step in 0..config.weight_steps {
        let weight = config.weight_for(n) << (2 * step);
        let basis = build_weighted_sda_lattice(head, &config.lambda_scale, &weight)?;
        let reduction = lll_reduce(&basis, &config.delta)?;
        for k1 in extract_candidates(&reduction, a, config) {
            if seen.contains(&k1) {
                continue;
            }
            tried += 1;
            let mut keys = vec![RecoveredKey::evaluate(a, k1.clone(), a[0].clone(), &k1)];
            if let Some((u, p)) = refine_trapdoor(a, &k1, config.max_intervals) {
                keys.push(RecoveredKey::evaluate(a, u, p, &k1));
            }
            for mut key in keys {
                key.candidates_tried = tried;
                if key.is_usable() {
                    return Ok(key);
                }
                let score = key.score();
                if best.as_ref().is_none_or(|(s, _)| score > *s) {
                    best = Some((score, key));
                }
            }
            seen.push(k1);
        }
    }
    let (_, mut key) =
        best.ok_or_else(|| Error::AttackFailed("no candidate k1 in the reduced basis".into()))?;
    key.candidates_tried = tried;
    Ok(key)
}

/// Searches `x = (k_1 + y)/a_1`, `y > 0`, for a point where the scaled
/// fractional parts `a_1·{a_i·x}` are superincreasing in index order and sum
/// below `a_1`. On each piece where no `a_i·x` crosses an integer those
/// values are linear in `y`, so feasibility is an open interval; the
/// simplest rational in it gives `(U', P') = (k_1·den + num, a_1·den)`,
/// reduced to lowest terms.
pub fn refine_trapdoor(
    a: &[BigUint],
    k1: &BigUint,
    max_intervals: usize,
) -> Option<(BigUint, BigUint)> {
    let a1 = BigInt::from(a[0].clone());
    let k1i = BigInt::from(k1.clone());
    let ai: Vec<BigInt> = a.iter().map(|x| BigInt::from(x.clone())).collect();
    // e_i = a_i·k_1 - a_1·k_i, starting with k_i = floor(a_i·k_1 / a_1)
    let mut e: Vec<BigInt> = ai.iter().map(|x| (x * &k1i).mod_floor(&a1)).collect();
    let a_total: BigInt = ai.iter().sum();

    // next breakpoint of index i lies at (a_1 - e_i)/a_i
    let mut heap: BinaryHeap<Reverse<(BigRational, usize)>> = ai
        .iter()
        .zip(&e)
        .enumerate()
        .map(|(i, (x, ei))| Reverse((BigRational::new(&a1 - ei, x.clone()), i)))
        .collect();

    let mut lo = BigRational::zero();
    for _ in 0..max_intervals.max(1) {
        let Reverse((hi, i)) = heap.pop()?;
        if hi > lo {
            if let Some(y) = feasible_point(&ai, &e, &a_total, &a1, &lo, &hi) {
                let num = y.numer().clone();
                let den = y.denom().clone();
                let u = &k1i * &den + num;
                let p = &a1 * &den;
                let g = u.gcd(&p);
                return Some(((u / &g).to_biguint()?, (p / &g).to_biguint()?));
            }
        }
        // crossing: k_i grows by one
        e[i] -= &a1;
        heap.push(Reverse((BigRational::new(&a1 - &e[i], ai[i].clone()), i)));
        lo = hi;
    }
    None
}

fn feasible_point(
    a: &[BigInt],
    e: &[BigInt],
    a_total: &BigInt,
    a1: &BigInt,
    lo: &BigRational,
    hi: &BigRational,
) -> Option<BigRational> {
    let mut lower = lo.clone();
    let mut upper = hi.clone();
    let mut e_prefix = BigInt::zero();
    let mut a_prefix = BigInt::zero();
    // v_i(y) = e_i + a_i·y must exceed Σ_{j<i} v_j(y)
    for (ai, ei) in a.iter().zip(e) {
        let constant = ei - &e_prefix;
        let slope = ai - &a_prefix;
        match slope.sign() {
            Sign::Plus => {
                let bound = BigRational::new(-constant, slope);
                if bound > lower {
                    lower = bound;
                }
            }
            Sign::Minus => {
                let bound = BigRational::new(constant, -slope);
                if bound < upper {
                    upper = bound;
                }
            }
            Sign::NoSign => {
                if !constant.is_positive() {
                    return None;
                }
            }
        }
        if lower >= upper {
            return None;
        }
        e_prefix += ei;
        a_prefix += ai;
    }
    // Σ v_i(y) < a_1
    let bound = BigRational::new(a1 - &e_prefix, a_total.clone());
    if bound < upper {
        upper = bound;
    }
    (lower < upper).then(|| simplest_between(&lower, &upper))
}

/// Rational with the smallest denominator in the open interval
/// `(low, high)`, for `0 <= low < high`.
pub fn simplest_between(low: &BigRational, high: &BigRational) -> BigRational {
    let mut terms: Vec<BigInt> = Vec::new();
    let mut l = low.clone();
    let mut u = Some(high.clone());
    loop {
        let fl = l.floor().to_integer();
        let next: BigInt = &fl + 1;
        let next_q = BigRational::from_integer(next.clone());
        if u.as_ref().is_none_or(|u| next_q < *u) {
            terms.push(next);
            break;
        }
        let flq = BigRational::from_integer(fl.clone());
        terms.push(fl);
        let l_frac = &l - &flq;
        let u_frac = u.expect("bounded here") - &flq;
        // x = fl + 1/z with z in (1/u_frac, 1/l_frac)
        l = u_frac.recip();
        u = (!l_frac.is_zero()).then(|| l_frac.recip());
    }
    let mut value = BigRational::from_integer(terms.pop().expect("nonempty"));
    while let Some(t) = terms.pop() {
        value = BigRational::from_integer(t) + value.recip();
    }
    value
}

/// Decrypts one Merkle-Hellman ciphertext with a recovered key and accepts
/// the result only if it re-encrypts to `c`.
pub fn decrypt_with_recovered(key: &RecoveredKey, a: &[BigUint], c: &BigUint) -> Result<BitVector> {
    let slots: Vec<(BigUint, usize)> = key.b_prime.iter().cloned().zip(0..).collect();
    let bits = solve_selected_multiset(&slots, &key.unmask(c)).map_err(attack_failure)?;
    if &bits.weighted_sum(a)? != c {
        return Err(Error::AttackFailed(
            "candidate plaintext does not re-encrypt".into(),
        ));
    }
    Ok(bits)
}

fn attack_failure(e: Error) -> Error {
    match e {
        Error::NotDecryptable => {
            Error::AttackFailed("unmasked ciphertext is not a subset sum".into())
        }
        Error::InvalidInput(msg) => Error::AttackFailed(msg),
        other => other,
    }
}

#[derive(Debug, Clone)]
pub struct MhAttack {
    pub key: RecoveredKey,
    /// One entry per ciphertext; errors mark ciphertexts that failed
    /// verification.
    pub plaintexts: Vec<Result<BitVector>>,
}

pub fn attack_mh(
    public: &PublicKnapsack,
    ciphertexts: &[BigUint],
    config: &AttackConfig,
) -> Result<MhAttack> {
    let key = recover_key(&public.a, config)?;
    let plaintexts = ciphertexts
        .iter()
        .map(|c| decrypt_with_recovered(&key, &public.a, c))
        .collect();
    Ok(MhAttack { key, plaintexts })
}

#[derive(Debug, Clone)]
pub struct HwangAttack {
    pub key: RecoveredKey,
    pub bits: Vec<bool>,
}

impl HwangAttack {
    pub fn plaintext(&self) -> Vec<u8> {
        bits_to_bytes(&self.bits)
    }
}

pub fn attack_hwang(
    public: &HwangPublicKey,
    env: &CiphertextEnvelope,
    config: &AttackConfig,
) -> Result<HwangAttack> {
    let key = recover_key(&public.a, config)?;
    let bits = decrypt_hwang_with_recovered(&key, public, env)?;
    Ok(HwangAttack { key, bits })
}

/// Replays the receiver's steps with `B'` in place of the secret knapsack.
/// Each block is checked by re-encryption under the public working
/// knapsack.
pub fn decrypt_hwang_with_recovered(
    key: &RecoveredKey,
    public: &HwangPublicKey,
    env: &CiphertextEnvelope,
) -> Result<Vec<bool>> {
    let params = &public.params;
    check_envelope(env, params)?;
    if key.b_prime.len() != public.a.len() {
        return Err(Error::InvalidInput(
            "recovered key does not match the public key".into(),
        ));
    }
    to_factorial_digits(&env.d_prime, params.g)?;
    let recovered = derive_working_knapsack(&key.b_prime, &env.d_prime, params)?;
    let working_public = derive_working_knapsack(&public.a, &env.d_prime, params)?;
    let slots: Vec<(BigUint, usize)> = recovered.working.iter().cloned().zip(0..).collect();
    let mut blocks = Vec::with_capacity(env.blocks.len());
    for (k, c) in env.blocks.iter().enumerate() {
        let bits = solve_selected_multiset(&slots, &key.unmask(c)).map_err(attack_failure)?;
        if &bits.weighted_sum(&working_public.working)? != c {
            return Err(Error::AttackFailed(format!(
                "block {} does not re-encrypt",
                k + 1
            )));
        }
        blocks.push(bits);
    }
    Ok(join_blocks(&blocks, env.msg_bit_len))
}

/// The integers `k_i = (a_i·U - b_i)/p` of the true trapdoor, with
/// `U = w⁻¹ mod p`. Needs the private key, so it is only useful for
/// validating instances and attack output.
pub fn trapdoor_multiples(key: &MhPrivateKey, public: &PublicKnapsack) -> Vec<BigUint> {
    public
        .a
        .iter()
        .zip(key.b().elements())
        .map(|(ai, bi)| (ai * key.w_inv() - bi) / key.p())
        .collect()
}

/// `a_i·k_1 - a_1·k_i` as signed integers, for `i >= 2`.
pub fn approximation_errors(a: &[BigUint], k: &[BigUint]) -> Vec<BigInt> {
    let a1 = a[0].to_bigint().expect("unsigned");
    let k1 = k[0].to_bigint().expect("unsigned");
    a.iter()
        .zip(k)
        .skip(1)
        .map(|(ai, ki)| BigInt::from(ai.clone()) * &k1 - &a1 * BigInt::from(ki.clone()))
        .collect()
}
