//! On-disk formats: key files, ciphertext envelopes and reports.
//!
//! Everything is TOML. Big integers (and 64-bit seeds) are decimal strings so
//! files stay exact and diff-able; every file carries a `format` tag and a
//! `version`. The schemas are documented in `docs/formats.md`.

use std::fmt;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::hwang::{CiphertextEnvelope, HwangParams, HwangPrivateKey, HwangPublicKey};
use crate::knapsack::{MhPrivateKey, PublicKnapsack, SuperincreasingSequence};

pub const FORMAT_VERSION: u32 = 1;
pub const KEY_FORMAT: &str = "knapcrack-key";
pub const CIPHERTEXT_FORMAT: &str = "knapcrack-ciphertext";
pub const ATTACK_REPORT_FORMAT: &str = "knapcrack-attack-report";
pub const EXPERIMENT_REPORT_FORMAT: &str = "knapcrack-experiment-report";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Mh,
    Hwang,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Mh => "mh",
            Scheme::Hwang => "hwang",
        })
    }
}

/// Serde helpers for decimal-string integers.
pub mod decimal {
    use num_bigint::BigUint;
    use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

    pub fn parse(s: &str) -> Option<BigUint> {
        if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        BigUint::parse_bytes(s.as_bytes(), 10)
    }

    pub fn serialize<S: Serializer>(v: &BigUint, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_str_radix(10))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigUint, D::Error> {
        let s = String::deserialize(d)?;
        parse(&s).ok_or_else(|| D::Error::custom(format!("not a decimal integer: {s:?}")))
    }

    pub mod vec {
        use super::*;
        use serde::ser::SerializeSeq;

        pub fn serialize<S: Serializer>(v: &[BigUint], s: S) -> Result<S::Ok, S::Error> {
            let mut seq = s.serialize_seq(Some(v.len()))?;
            for x in v {
                seq.serialize_element(&x.to_str_radix(10))?;
            }
            seq.end()
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigUint>, D::Error> {
            Vec::<String>::deserialize(d)?
                .iter()
                .map(|s| {
                    parse(s)
                        .ok_or_else(|| D::Error::custom(format!("not a decimal integer: {s:?}")))
                })
                .collect()
        }
    }

    pub mod option {
        use super::*;

        pub fn serialize<S: Serializer>(v: &Option<BigUint>, s: S) -> Result<S::Ok, S::Error> {
            match v {
                Some(x) => s.serialize_some(&x.to_str_radix(10)),
                None => s.serialize_none(),
            }
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<BigUint>, D::Error> {
            Option::<String>::deserialize(d)?
                .map(|s| {
                    parse(&s)
                        .ok_or_else(|| D::Error::custom(format!("not a decimal integer: {s:?}")))
                })
                .transpose()
        }
    }

    pub mod u64_str {
        use super::*;

        pub fn serialize<S: Serializer>(v: &u64, s: S) -> Result<S::Ok, S::Error> {
            s.serialize_str(&v.to_string())
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<u64, D::Error> {
            let s = String::deserialize(d)?;
            s.parse()
                .map_err(|_| D::Error::custom(format!("not a 64-bit integer: {s:?}")))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KeyParams {
    pub n: usize,
    pub gap_bits: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subsets: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subset_size: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub select: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PublicPart {
    #[serde(with = "decimal::vec")]
    pub a: Vec<BigUint>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrivatePart {
    #[serde(with = "decimal")]
    pub p: BigUint,
    #[serde(with = "decimal")]
    pub w: BigUint,
    #[serde(with = "decimal")]
    pub w_inv: BigUint,
    #[serde(with = "decimal::vec")]
    pub b: Vec<BigUint>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KeyFile {
    pub format: String,
    pub version: u32,
    pub scheme: Scheme,
    pub params: KeyParams,
    pub public: PublicPart,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub private: Option<PrivatePart>,
}

fn private_part(key: &MhPrivateKey) -> PrivatePart {
    PrivatePart {
        p: key.p().clone(),
        w: key.w().clone(),
        w_inv: key.w_inv().clone(),
        b: key.b().elements().to_vec(),
    }
}

impl KeyFile {
    pub fn from_mh(key: &MhPrivateKey, gap_bits: u32) -> Self {
        KeyFile {
            format: KEY_FORMAT.into(),
            version: FORMAT_VERSION,
            scheme: Scheme::Mh,
            params: KeyParams {
                n: key.b().len(),
                gap_bits,
                subsets: None,
                subset_size: None,
                select: None,
            },
            public: PublicPart {
                a: key.public_knapsack().a,
            },
            private: Some(private_part(key)),
        }
    }

    pub fn from_hwang(key: &HwangPrivateKey) -> Self {
        let p = key.params;
        KeyFile {
            format: KEY_FORMAT.into(),
            version: FORMAT_VERSION,
            scheme: Scheme::Hwang,
            params: KeyParams {
                n: p.n(),
                gap_bits: p.gap_bits,
                subsets: Some(p.s),
                subset_size: Some(p.g),
                select: Some(p.c),
            },
            public: PublicPart {
                a: key.key.public_knapsack().a,
            },
            private: Some(private_part(&key.key)),
        }
    }

    /// The same key with the private part removed.
    pub fn public_only(&self) -> Self {
        KeyFile {
            private: None,
            ..self.clone()
        }
    }

    pub fn is_private(&self) -> bool {
        self.private.is_some()
    }

    pub fn to_text(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let file: KeyFile = toml::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        check_header(&file.format, file.version, KEY_FORMAT)?;
        file.validate()?;
        Ok(file)
    }

    /// Parses a file that must not carry private material.
    pub fn parse_public(text: &str) -> Result<Self> {
        let file = Self::parse(text)?;
        if file.is_private() {
            return Err(Error::Format(
                "expected a public key file, found private key material".into(),
            ));
        }
        Ok(file)
    }

    fn validate(&self) -> Result<()> {
        if self.public.a.len() != self.params.n {
            return Err(Error::Format(format!(
                "params.n is {} but the public key has {} elements",
                self.params.n,
                self.public.a.len()
            )));
        }
        if let Some(private) = &self.private {
            if private.b.len() != self.params.n {
                return Err(Error::Format("private b has the wrong length".into()));
            }
        }
        if self.scheme == Scheme::Hwang {
            let params = self.hwang_params()?;
            if params.n() != self.params.n {
                return Err(Error::Format("subsets × subset_size must equal n".into()));
            }
        }
        Ok(())
    }

    pub fn hwang_params(&self) -> Result<HwangParams> {
        match (
            self.params.subsets,
            self.params.subset_size,
            self.params.select,
        ) {
            (Some(s), Some(g), Some(c)) => HwangParams::new(s, g, c, self.params.gap_bits),
            _ => Err(Error::Format(
                "hwang keys need subsets, subset_size and select".into(),
            )),
        }
    }

    pub fn mh_public(&self) -> Result<PublicKnapsack> {
        self.expect_scheme(Scheme::Mh)?;
        Ok(PublicKnapsack::new(self.public.a.clone()))
    }

    pub fn hwang_public(&self) -> Result<HwangPublicKey> {
        self.expect_scheme(Scheme::Hwang)?;
        Ok(HwangPublicKey {
            a: self.public.a.clone(),
            params: self.hwang_params()?,
        })
    }

    /// Rebuilds the private key, checking every key invariant and that the
    /// public part matches.
    pub fn mh_private(&self) -> Result<MhPrivateKey> {
        let private = self
            .private
            .as_ref()
            .ok_or_else(|| Error::Format("file has no private key".into()))?;
        let b = SuperincreasingSequence::new(private.b.clone())?;
        let key = MhPrivateKey::with_inverse(
            b,
            private.p.clone(),
            private.w.clone(),
            private.w_inv.clone(),
        )?;
        if key.public_knapsack().a != self.public.a {
            return Err(Error::Format(
                "public part does not match the private key".into(),
            ));
        }
        Ok(key)
    }

    pub fn hwang_private(&self) -> Result<HwangPrivateKey> {
        self.expect_scheme(Scheme::Hwang)?;
        HwangPrivateKey::new(self.mh_private()?, self.hwang_params()?)
    }

    fn expect_scheme(&self, scheme: Scheme) -> Result<()> {
        if self.scheme != scheme {
            return Err(Error::Format(format!(
                "key is for scheme {}, expected {scheme}",
                self.scheme
            )));
        }
        Ok(())
    }

    /// First 16 bytes (hex) of SHA-256 over the public-only file text.
    pub fn fingerprint(&self) -> Result<String> {
        let text = self.public_only().to_text()?;
        let digest = Sha256::digest(text.as_bytes());
        Ok(digest[..16].iter().map(|b| format!("{b:02x}")).collect())
    }
}

fn check_header(format: &str, version: u32, expected: &str) -> Result<()> {
    if format != expected {
        return Err(Error::Format(format!(
            "expected format {expected:?}, found {format:?}"
        )));
    }
    if version != FORMAT_VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    Ok(())
}

/// Ciphertext for either scheme. `d_prime` is present exactly for
/// `hwang`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CiphertextFile {
    pub format: String,
    pub version: u32,
    pub scheme: Scheme,
    pub msg_bit_len: usize,
    #[serde(
        default,
        skip_serializing_if = "Option::is_none",
        with = "decimal::option"
    )]
    pub d_prime: Option<BigUint>,
    #[serde(with = "decimal::vec")]
    pub blocks: Vec<BigUint>,
}

impl CiphertextFile {
    pub fn mh(blocks: Vec<BigUint>, msg_bit_len: usize) -> Self {
        CiphertextFile {
            format: CIPHERTEXT_FORMAT.into(),
            version: FORMAT_VERSION,
            scheme: Scheme::Mh,
            msg_bit_len,
            d_prime: None,
            blocks,
        }
    }

    pub fn hwang(env: &CiphertextEnvelope) -> Self {
        CiphertextFile {
            format: CIPHERTEXT_FORMAT.into(),
            version: FORMAT_VERSION,
            scheme: Scheme::Hwang,
            msg_bit_len: env.msg_bit_len,
            d_prime: Some(env.d_prime.clone()),
            blocks: env.blocks.clone(),
        }
    }

    pub fn envelope(&self) -> Result<CiphertextEnvelope> {
        match (&self.scheme, &self.d_prime) {
            (Scheme::Hwang, Some(d)) => Ok(CiphertextEnvelope {
                d_prime: d.clone(),
                blocks: self.blocks.clone(),
                msg_bit_len: self.msg_bit_len,
            }),
            _ => Err(Error::Format("not a hwang ciphertext".into())),
        }
    }

    pub fn to_text(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let file: CiphertextFile =
            toml::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        check_header(&file.format, file.version, CIPHERTEXT_FORMAT)?;
        if (file.scheme == Scheme::Hwang) != file.d_prime.is_some() {
            return Err(Error::Format(
                "d_prime must be present exactly for hwang".into(),
            ));
        }
        Ok(file)
    }
}

/// Outcome of one attack command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttackReport {
    pub format: String,
    pub version: u32,
    pub scheme: Scheme,
    pub success: bool,
    pub lattice_dim: usize,
    pub delta: String,
    pub candidates_tried: usize,
    pub key_usable: bool,
    pub blocks: usize,
    pub blocks_verified: usize,
    #[serde(
        default,
        skip_serializing_if = "Option::is_none",
        with = "decimal::option"
    )]
    pub k1: Option<BigUint>,
    #[serde(
        default,
        skip_serializing_if = "Option::is_none",
        with = "decimal::option"
    )]
    pub u_prime: Option<BigUint>,
    #[serde(
        default,
        skip_serializing_if = "Option::is_none",
        with = "decimal::option"
    )]
    pub p_prime: Option<BigUint>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
    pub recover_ms: f64,
    pub decrypt_ms: f64,
}

impl AttackReport {
    pub fn new(scheme: Scheme, lattice_dim: usize, delta: String) -> Self {
        AttackReport {
            format: ATTACK_REPORT_FORMAT.into(),
            version: FORMAT_VERSION,
            scheme,
            success: false,
            lattice_dim,
            delta,
            candidates_tried: 0,
            key_usable: false,
            blocks: 0,
            blocks_verified: 0,
            k1: None,
            u_prime: None,
            p_prime: None,
            failure: None,
            recover_ms: 0.0,
            decrypt_ms: 0.0,
        }
    }

    pub fn to_text(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let r: AttackReport = toml::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        check_header(&r.format, r.version, ATTACK_REPORT_FORMAT)?;
        Ok(r)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentRow {
    pub scheme: Scheme,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subsets: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subset_size: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub select: Option<usize>,
    pub gap_bits: u32,
    pub t: usize,
    pub delta: String,
    pub trials: usize,
    /// Trials whose recovered plaintext equals the true plaintext exactly.
    pub successes: usize,
    /// Trials where the recovered key was superincreasing and fit its modulus.
    pub usable_keys: usize,
    /// Verified outputs that differ from the true plaintext; must be 0.
    pub verified_mismatches: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean_ms: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentReport {
    pub format: String,
    pub version: u32,
    pub artifact_version: String,
    #[serde(with = "decimal::u64_str")]
    pub seed: u64,
    pub rows: Vec<ExperimentRow>,
}

impl ExperimentReport {
    pub fn to_text(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let r: ExperimentReport = toml::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        check_header(&r.format, r.version, EXPERIMENT_REPORT_FORMAT)?;
        Ok(r)
    }

    /// The report with timing removed; this part is reproducible.
    pub fn without_timing(&self) -> Self {
        let mut r = self.clone();
        for row in &mut r.rows {
            row.mean_ms = None;
        }
        r
    }
}
