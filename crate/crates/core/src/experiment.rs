//! Seeded experiment runner: keygen, encrypt a random plaintext, attack
//! from public data, compare.
//!
//! Trial seeds are drawn in order from a [`DetRng`] seeded with the master
//! seed: grid points in order, trials in order within each point. Trials run
//! in parallel; results do not depend on scheduling.

use std::time::Instant;

use num_rational::BigRational;
use rayon::prelude::*;

use crate::attack::{attack_hwang, attack_mh, AttackConfig};
use crate::error::{Error, Result};
use crate::format::{
    ExperimentReport, ExperimentRow, Scheme, EXPERIMENT_REPORT_FORMAT, FORMAT_VERSION,
};
use crate::hwang::{hwang_encrypt_bits, hwang_keygen, HwangParams};
use crate::knapsack::{encrypt_mh, mh_keygen, BitVector};
use crate::rng::DetRng;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Instance {
    Mh { n: usize },
    Hwang { s: usize, g: usize, c: usize },
}

impl Instance {
    pub fn n(&self) -> usize {
        match *self {
            Instance::Mh { n } => n,
            Instance::Hwang { s, g, .. } => s * g,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridPoint {
    pub instance: Instance,
    pub gap_bits: u32,
    pub t: usize,
    pub delta: BigRational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExperimentSpec {
    pub points: Vec<GridPoint>,
    pub trials: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialOutcome {
    pub success: bool,
    pub usable_key: bool,
    pub verified_mismatch: bool,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.points.is_empty() {
            return Err(Error::InvalidParameter("empty experiment grid".into()));
        }
        if self.trials == 0 {
            return Err(Error::InvalidParameter("trials must be at least 1".into()));
        }
        for p in &self.points {
            if let Instance::Hwang { s, g, c } = p.instance {
                HwangParams::new(s, g, c, p.gap_bits)?;
            }
            if p.gap_bits == 0 {
                return Err(Error::InvalidParameter(
                    "gap_bits must be at least 1".into(),
                ));
            }
            config_for(p).validate(p.instance.n())?;
        }
        Ok(())
    }

    pub fn trial_seeds(&self) -> Vec<Vec<u64>> {
        let mut master = DetRng::from_seed(self.seed);
        self.points
            .iter()
            .map(|_| (0..self.trials).map(|_| master.next_u64()).collect())
            .collect()
    }
}

fn config_for(point: &GridPoint) -> AttackConfig {
    AttackConfig {
        t: point.t,
        delta: point.delta.clone(),
        ..Default::default()
    }
}

/// One trial. The plaintext is `n` random bits for MH and one full block of
/// random bits for the permutation scheme.
pub fn run_trial(point: &GridPoint, seed: u64) -> Result<TrialOutcome> {
    let mut rng = DetRng::from_seed(seed);
    let config = config_for(point);
    match point.instance {
        Instance::Mh { n } => {
            let (_, public) = mh_keygen(n, point.gap_bits, &mut rng)?;
            let m = BitVector::random(n, &mut rng);
            let c = encrypt_mh(&public, &m)?;
            Ok(match attack_mh(&public, &[c], &config) {
                Ok(out) => {
                    let got = out.plaintexts.into_iter().next().expect("one ciphertext");
                    let verified = got.ok();
                    TrialOutcome {
                        success: verified.as_ref() == Some(&m),
                        usable_key: out.key.is_usable(),
                        verified_mismatch: verified.is_some_and(|x| x != m),
                    }
                }
                Err(_) => TrialOutcome {
                    success: false,
                    usable_key: false,
                    verified_mismatch: false,
                },
            })
        }
        Instance::Hwang { s, g, c } => {
            let params = HwangParams::new(s, g, c, point.gap_bits)?;
            let (_, public) = hwang_keygen(params, &mut rng)?;
            let bits: Vec<bool> = (0..params.block_len()).map(|_| rng.next_bit()).collect();
            let env = hwang_encrypt_bits(&public, &bits)?;
            Ok(match attack_hwang(&public, &env, &config) {
                Ok(out) => TrialOutcome {
                    success: out.bits == bits,
                    usable_key: out.key.is_usable(),
                    verified_mismatch: out.bits != bits,
                },
                Err(_) => TrialOutcome {
                    success: false,
                    usable_key: false,
                    verified_mismatch: false,
                },
            })
        }
    }
}

pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentReport> {
    spec.validate()?;
    let seeds = spec.trial_seeds();
    let jobs: Vec<(usize, u64)> = seeds
        .iter()
        .enumerate()
        .flat_map(|(i, s)| s.iter().map(move |&seed| (i, seed)))
        .collect();
    let results: Vec<(usize, TrialOutcome, f64)> = jobs
        .par_iter()
        .map(|&(i, seed)| {
            let start = Instant::now();
            let outcome = run_trial(&spec.points[i], seed)?;
            Ok((i, outcome, start.elapsed().as_secs_f64() * 1e3))
        })
        .collect::<Result<_>>()?;

    let rows = spec
        .points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let mine: Vec<_> = results.iter().filter(|r| r.0 == i).collect();
            let count = |f: fn(&TrialOutcome) -> bool| mine.iter().filter(|r| f(&r.1)).count();
            let (subsets, subset_size, select) = match p.instance {
                Instance::Mh { .. } => (None, None, None),
                Instance::Hwang { s, g, c } => (Some(s), Some(g), Some(c)),
            };
            ExperimentRow {
                scheme: match p.instance {
                    Instance::Mh { .. } => Scheme::Mh,
                    Instance::Hwang { .. } => Scheme::Hwang,
                },
                n: p.instance.n(),
                subsets,
                subset_size,
                select,
                gap_bits: p.gap_bits,
                t: p.t,
                delta: p.delta.to_string(),
                trials: mine.len(),
                successes: count(|o| o.success),
                usable_keys: count(|o| o.usable_key),
                verified_mismatches: count(|o| o.verified_mismatch),
                mean_ms: Some(mine.iter().map(|r| r.2).sum::<f64>() / mine.len() as f64),
            }
        })
        .collect();
    Ok(ExperimentReport {
        format: EXPERIMENT_REPORT_FORMAT.into(),
        version: FORMAT_VERSION,
        artifact_version: env!("CARGO_PKG_VERSION").into(),
        seed: spec.seed,
        rows,
    })
}
