//! Bit framing for byte messages: most significant bit of the first byte
//! first, last block zero padded.

use num_bigint::BigUint;

use crate::error::{Error, Result};
use crate::knapsack::{decrypt_mh, encrypt_mh, BitVector, MhPrivateKey, PublicKnapsack};

pub fn bytes_to_bits(bytes: &[u8]) -> BitVector {
    let bits = bytes
        .iter()
        .flat_map(|&byte| (0..8).rev().map(move |k| (byte >> k) & 1 == 1))
        .collect();
    BitVector::new(bits)
}

/// Packs bits MSB-first; a trailing partial byte is zero filled.
pub fn bits_to_bytes(bits: &[bool]) -> Vec<u8> {
    bits.chunks(8)
        .map(|chunk| {
            chunk
                .iter()
                .enumerate()
                .fold(0u8, |acc, (k, &b)| acc | ((b as u8) << (7 - k)))
        })
        .collect()
}

/// Splits into `block_len`-bit blocks, zero padding the last one.
pub fn split_blocks(bits: &[bool], block_len: usize) -> Vec<BitVector> {
    bits.chunks(block_len)
        .map(|chunk| {
            let mut block = chunk.to_vec();
            block.resize(block_len, false);
            BitVector::new(block)
        })
        .collect()
}

/// Concatenates blocks and truncates to `bit_len`.
pub fn join_blocks(blocks: &[BitVector], bit_len: usize) -> Vec<bool> {
    let mut bits: Vec<bool> = blocks
        .iter()
        .flat_map(|b| b.bits().iter().copied())
        .collect();
    bits.truncate(bit_len);
    bits
}

/// Encrypts a byte message under plain Merkle-Hellman, one ciphertext per
/// `n`-bit block. The bit length to pass to [`decrypt_mh_message`] is
/// `8 * message.len()`.
pub fn encrypt_mh_message(public: &PublicKnapsack, message: &[u8]) -> Result<Vec<BigUint>> {
    if message.is_empty() {
        return Err(Error::InvalidInput("message is empty".into()));
    }
    if public.is_empty() {
        return Err(Error::InvalidParameter("public knapsack is empty".into()));
    }
    split_blocks(bytes_to_bits(message).bits(), public.len())
        .iter()
        .map(|block| encrypt_mh(public, block))
        .collect()
}

pub fn decrypt_mh_message(
    key: &MhPrivateKey,
    blocks: &[BigUint],
    bit_len: usize,
) -> Result<Vec<u8>> {
    if bit_len > blocks.len() * key.b().len() {
        return Err(Error::InvalidInput(
            "bit length exceeds the ciphertext".into(),
        ));
    }
    let bits = blocks
        .iter()
        .map(|c| decrypt_mh(key, c))
        .collect::<Result<Vec<_>>>()?;
    Ok(bits_to_bytes(&join_blocks(&bits, bit_len)))
}
