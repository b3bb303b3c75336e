//! The permutation-combination knapsack cryptosystem.
//!
//! Keys are Merkle-Hellman keys of length `n = s·g`. Each message's digest,
//! reduced modulo `g!`, selects a permutation; the first `c` entries of every
//! permuted `g`-element subset form the working knapsack for that message.

use num_bigint::BigUint;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::factoradic::{apply_selection, factorial, to_factorial_digits, FactorialDigits};
use crate::knapsack::{mh_keygen, solve_selected_multiset, MhPrivateKey};
use crate::message::{bits_to_bytes, bytes_to_bits, join_blocks, split_blocks};
use crate::rng::DetRng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HwangParams {
    /// Number of subsets.
    pub s: usize,
    /// Subset size.
    pub g: usize,
    /// Entries kept from each permuted subset.
    pub c: usize,
    pub gap_bits: u32,
}

impl HwangParams {
    /// Eight subsets of 170 elements, 128 kept from each.
    pub const FULL: HwangParams = HwangParams {
        s: 8,
        g: 170,
        c: 128,
        gap_bits: 8,
    };

    pub fn new(s: usize, g: usize, c: usize, gap_bits: u32) -> Result<Self> {
        let params = HwangParams { s, g, c, gap_bits };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if self.s == 0 {
            return Err(Error::InvalidParameter("need at least one subset".into()));
        }
        if self.c == 0 || self.c > self.g {
            return Err(Error::InvalidParameter(format!(
                "selection size {} must lie in [1, {}]",
                self.c, self.g
            )));
        }
        if self.gap_bits == 0 {
            return Err(Error::InvalidParameter(
                "gap_bits must be at least 1".into(),
            ));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.s * self.g
    }

    pub fn block_len(&self) -> usize {
        self.s * self.c
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HwangPrivateKey {
    pub key: MhPrivateKey,
    pub params: HwangParams,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HwangPublicKey {
    pub a: Vec<BigUint>,
    pub params: HwangParams,
}

impl HwangPrivateKey {
    pub fn new(key: MhPrivateKey, params: HwangParams) -> Result<Self> {
        params.validate()?;
        if key.b().len() != params.n() {
            return Err(Error::InvalidInput(format!(
                "key has {} elements, parameters need {}",
                key.b().len(),
                params.n()
            )));
        }
        Ok(HwangPrivateKey { key, params })
    }

    pub fn public_key(&self) -> HwangPublicKey {
        HwangPublicKey {
            a: self.key.public_knapsack().a,
            params: self.params,
        }
    }
}

/// What travels over the channel: the reduced digest and one ciphertext per
/// block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CiphertextEnvelope {
    pub d_prime: BigUint,
    pub blocks: Vec<BigUint>,
    pub msg_bit_len: usize,
}

pub fn hwang_keygen(
    params: HwangParams,
    rng: &mut DetRng,
) -> Result<(HwangPrivateKey, HwangPublicKey)> {
    params.validate()?;
    let (key, public) = mh_keygen(params.n(), params.gap_bits, rng)?;
    let private = HwangPrivateKey { key, params };
    Ok((
        private,
        HwangPublicKey {
            a: public.a,
            params,
        },
    ))
}

/// 1024-bit digest: `SHA-256(M ‖ be32(i))` for `i = 0..4`, concatenated and
/// read as a big-endian integer.
pub fn digest_1024(message: &[u8]) -> BigUint {
    let mut out = Vec::with_capacity(128);
    for i in 0u32..4 {
        let mut h = Sha256::new();
        h.update(message);
        h.update(i.to_be_bytes());
        out.extend_from_slice(&h.finalize());
    }
    BigUint::from_bytes_be(&out)
}

pub fn digest_to_dprime(message: &[u8], g: usize) -> BigUint {
    digest_1024(message) % factorial(g)
}

/// Working knapsack for one message: each subset permuted by the same
/// digits, first `c` entries kept, subsets concatenated in order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WorkingKnapsack {
    pub working: Vec<BigUint>,
    /// Index into the full key vector for each working entry.
    pub position_map: Vec<usize>,
}

pub fn derive_working_knapsack(
    key_vector: &[BigUint],
    d_prime: &BigUint,
    params: &HwangParams,
) -> Result<WorkingKnapsack> {
    if key_vector.len() != params.n() {
        return Err(Error::InvalidParameter(format!(
            "key vector has {} entries, parameters need {}",
            key_vector.len(),
            params.n()
        )));
    }
    let digits = to_factorial_digits(d_prime, params.g)?;
    derive_with_digits(key_vector, &digits, params)
}

fn derive_with_digits(
    key_vector: &[BigUint],
    digits: &FactorialDigits,
    params: &HwangParams,
) -> Result<WorkingKnapsack> {
    let mut working = Vec::with_capacity(params.block_len());
    let mut position_map = Vec::with_capacity(params.block_len());
    for (k, subset) in key_vector.chunks(params.g).enumerate() {
        let sel = apply_selection(subset, digits, params.c)?;
        for (v, pos) in sel.selected {
            working.push(v);
            position_map.push(k * params.g + pos);
        }
    }
    Ok(WorkingKnapsack {
        working,
        position_map,
    })
}

pub fn hwang_encrypt(public: &HwangPublicKey, message: &[u8]) -> Result<CiphertextEnvelope> {
    if message.is_empty() {
        return Err(Error::InvalidParameter("message is empty".into()));
    }
    let bits = bytes_to_bits(message);
    encrypt_framed(public, message, bits.bits())
}

/// Encrypts a message of arbitrary bit length. The digest is taken over the
/// MSB-first packing of the bits.
pub fn hwang_encrypt_bits(public: &HwangPublicKey, bits: &[bool]) -> Result<CiphertextEnvelope> {
    if bits.is_empty() {
        return Err(Error::InvalidParameter("message is empty".into()));
    }
    encrypt_framed(public, &bits_to_bytes(bits), bits)
}

fn encrypt_framed(
    public: &HwangPublicKey,
    digest_input: &[u8],
    bits: &[bool],
) -> Result<CiphertextEnvelope> {
    let params = &public.params;
    let d_prime = digest_to_dprime(digest_input, params.g);
    let wk = derive_working_knapsack(&public.a, &d_prime, params)?;
    let blocks = split_blocks(bits, params.block_len())
        .iter()
        .map(|block| block.weighted_sum(&wk.working))
        .collect::<Result<Vec<_>>>()?;
    Ok(CiphertextEnvelope {
        d_prime,
        blocks,
        msg_bit_len: bits.len(),
    })
}

/// Per-block quantities from decryption, exposed so callers can check the
/// mask-cancellation identity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockTrace {
    /// `C_k·w⁻¹ mod p`.
    pub unmasked: BigUint,
    /// Sum of the selected secret elements picked by the solution.
    pub selected_sum: BigUint,
    /// Sum of all selected secret elements of the working knapsack.
    pub selection_total: BigUint,
}

pub fn hwang_decrypt(key: &HwangPrivateKey, env: &CiphertextEnvelope) -> Result<Vec<u8>> {
    hwang_decrypt_bits(key, env).map(|bits| bits_to_bytes(&bits))
}

pub fn hwang_decrypt_bits(key: &HwangPrivateKey, env: &CiphertextEnvelope) -> Result<Vec<bool>> {
    hwang_decrypt_traced(key, env).map(|(bits, _)| bits)
}

pub fn hwang_decrypt_traced(
    key: &HwangPrivateKey,
    env: &CiphertextEnvelope,
) -> Result<(Vec<bool>, Vec<BlockTrace>)> {
    let params = &key.params;
    check_envelope(env, params)?;
    let wk = derive_working_knapsack(key.key.b().elements(), &env.d_prime, params)?;
    let selection_total: BigUint = wk.working.iter().sum();
    // the selection is part of b, whose total is below p: sums never wrap
    assert!(
        &selection_total < key.key.p(),
        "selected secret sum wraps mod p"
    );
    let slots: Vec<(BigUint, usize)> = wk.working.iter().cloned().zip(0..).collect();

    let mut blocks = Vec::with_capacity(env.blocks.len());
    let mut traces = Vec::with_capacity(env.blocks.len());
    for (k, c) in env.blocks.iter().enumerate() {
        let unmasked = key.key.unmask(c);
        let bits = solve_selected_multiset(&slots, &unmasked).map_err(|e| match e {
            Error::NotDecryptable => {
                Error::DecryptionFailure(format!("block {} is not a subset sum", k + 1))
            }
            other => other,
        })?;
        let selected_sum = bits.weighted_sum(&wk.working)?;
        assert_eq!(selected_sum, unmasked, "mask cancellation failed");
        traces.push(BlockTrace {
            unmasked,
            selected_sum,
            selection_total: selection_total.clone(),
        });
        blocks.push(bits);
    }
    Ok((join_blocks(&blocks, env.msg_bit_len), traces))
}

pub(crate) fn check_envelope(env: &CiphertextEnvelope, params: &HwangParams) -> Result<()> {
    if env.d_prime >= factorial(params.g) {
        return Err(Error::InvalidInput(format!(
            "d_prime is not below {}!",
            params.g
        )));
    }
    let expected = env.msg_bit_len.div_ceil(params.block_len());
    if env.msg_bit_len == 0 || env.blocks.len() != expected {
        return Err(Error::InvalidInput(format!(
            "{} bits need {expected} blocks, envelope has {}",
            env.msg_bit_len,
            env.blocks.len()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Zero;

    fn big(v: &[u64]) -> Vec<BigUint> {
        v.iter().map(|&x| BigUint::from(x)).collect()
    }

    fn desk() -> (HwangPrivateKey, HwangPublicKey) {
        hwang_keygen(
            HwangParams::new(8, 5, 3, 8).unwrap(),
            &mut DetRng::from_seed(11),
        )
        .unwrap()
    }

    #[test]
    fn params_validation() {
        assert!(HwangParams::new(0, 5, 3, 8).is_err());
        assert!(HwangParams::new(8, 5, 6, 8).is_err());
        assert!(HwangParams::new(8, 5, 0, 8).is_err());
        let p = HwangParams::FULL;
        assert_eq!((p.n(), p.block_len()), (1360, 1024));
    }

    #[test]
    fn desk_keygen() {
        let (private, public) = desk();
        assert_eq!(public.a.len(), 40);
        let key = &private.key;
        for (ai, bi) in public.a.iter().zip(key.b().elements()) {
            assert_eq!(&((ai * key.w_inv()) % key.p()), bi);
        }
        assert_eq!(private.public_key(), public);
    }

    #[test]
    fn digest_golden() {
        // independent reference: Python hashlib over the same construction
        assert_eq!(digest_to_dprime(b"abc", 5), BigUint::from(14u8));
        assert_eq!(digest_to_dprime(b"abc", 8), BigUint::from(20174u32));
        assert!(digest_to_dprime(b"anything", 1).is_zero());
        assert_eq!(
            digest_1024(b"abc").to_str_radix(10),
            "145485684912656830366314991044409048478840385086546602338746602672434241262926423397874699470243181910772435580534741622998377411564569418301898743166358773130575180450105568591668513846698093995259375733265461873690993414112643505297099705900695306370850738208498766924936248096577659208573984087510030353614"
        );
    }

    #[test]
    fn working_knapsack_examples() {
        let params = HwangParams::new(1, 5, 3, 8).unwrap();
        let wk =
            derive_working_knapsack(&big(&[10, 20, 30, 40, 50]), &6u32.into(), &params).unwrap();
        assert_eq!(wk.working, big(&[10, 30, 20]));
        assert_eq!(wk.position_map, vec![0, 2, 1]);

        let params = HwangParams::new(2, 3, 2, 8).unwrap();
        let v = big(&[1, 2, 3, 4, 5, 6]);
        let wk = derive_working_knapsack(&v, &5u32.into(), &params).unwrap();
        assert_eq!(wk.working, big(&[3, 2, 6, 5]));
        assert_eq!(wk.position_map, vec![2, 1, 5, 4]);

        let wk = derive_working_knapsack(&v, &BigUint::zero(), &params).unwrap();
        assert_eq!(wk.working, big(&[1, 2, 4, 5]));

        assert!(derive_working_knapsack(&v[..5], &BigUint::zero(), &params).is_err());
        assert!(derive_working_knapsack(&v, &6u32.into(), &params).is_err());
    }

    #[test]
    fn round_trip_desk() {
        let (private, public) = desk();
        let env = hwang_encrypt(&public, b"attack at dawn").unwrap();
        assert_eq!(env.msg_bit_len, 112);
        assert_eq!(env.blocks.len(), 112usize.div_ceil(24));
        assert_eq!(hwang_decrypt(&private, &env).unwrap(), b"attack at dawn");
    }

    #[test]
    fn zero_and_full_blocks() {
        let (private, public) = desk();
        let env = hwang_encrypt(&public, &[0, 0, 0]).unwrap();
        assert!(env.blocks[0].is_zero());
        assert_eq!(hwang_decrypt(&private, &env).unwrap(), vec![0, 0, 0]);

        let env = hwang_encrypt(&public, &[0xff, 0xff, 0xff]).unwrap();
        let wk = derive_working_knapsack(&public.a, &env.d_prime, &public.params).unwrap();
        let total: BigUint = wk.working.iter().sum();
        assert_eq!(env.blocks, vec![total]);
    }

    #[test]
    fn empty_message_rejected() {
        let (_, public) = desk();
        assert!(matches!(
            hwang_encrypt(&public, b""),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn tampered_block_fails() {
        let (private, public) = desk();
        let mut env = hwang_encrypt(&public, b"attack at dawn").unwrap();
        env.blocks[1] += 1u32;
        assert!(matches!(
            hwang_decrypt(&private, &env),
            Err(Error::DecryptionFailure(_))
        ));
    }

    #[test]
    fn malformed_envelope_rejected() {
        let (private, public) = desk();
        let mut env = hwang_encrypt(&public, b"xyz").unwrap();
        env.blocks.push(BigUint::zero());
        assert!(matches!(
            hwang_decrypt(&private, &env),
            Err(Error::InvalidInput(_))
        ));
        let mut env = hwang_encrypt(&public, b"xyz").unwrap();
        env.d_prime = factorial(5);
        assert!(hwang_decrypt(&private, &env).is_err());
    }

    #[test]
    fn odd_bit_lengths() {
        let (private, public) = desk();
        let bits = vec![true, false, true, true, false, true, true];
        let env = hwang_encrypt_bits(&public, &bits).unwrap();
        assert_eq!(hwang_decrypt_bits(&private, &env).unwrap(), bits);
    }
}
