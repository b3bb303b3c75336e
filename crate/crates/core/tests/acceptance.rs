//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::collections::HashSet;
use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use knapcrack::attack::{
    approximation_errors, attack_hwang, attack_mh, trapdoor_multiples, AttackConfig,
};
use knapcrack::experiment::{run_experiment, ExperimentSpec, GridPoint, Instance};
use knapcrack::factoradic::{
    decode_permutation, factorial, from_factorial_digits, to_factorial_digits,
};
use knapcrack::format::ExperimentReport;
use knapcrack::hwang::{
    hwang_decrypt_bits, hwang_decrypt_traced, hwang_encrypt, hwang_encrypt_bits, hwang_keygen,
    HwangParams,
};
use knapcrack::knapsack::{
    brute_force_subset_sum, encrypt_mh, gen_superincreasing, mh_keygen, solve_superincreasing,
    BitVector,
};
use knapcrack::lattice::{
    default_delta, is_lll_reduced, lll_reduce, norm_sq, shortest_vector_exhaustive, IntegerBasis,
};
use knapcrack::rng::DetRng;

const BASELINE: &str = include_str!("data/experiment_baseline.toml");

fn full_key(
    seed: u64,
) -> (
    knapcrack::hwang::HwangPrivateKey,
    knapcrack::hwang::HwangPublicKey,
) {
    hwang_keygen(HwangParams::FULL, &mut DetRng::from_seed(seed)).unwrap()
}

fn round_trip_full_size() {
    let start = Instant::now();
    let (key, public) = full_key(1);
    let mut rng = DetRng::from_seed(2024);
    for _ in 0..100 {
        let len = 1 + rng.below_u64(8192) as usize;
        let bits: Vec<bool> = (0..len).map(|_| rng.next_bit()).collect();
        let env = hwang_encrypt_bits(&public, &bits).unwrap();
        assert_eq!(env.blocks.len(), len.div_ceil(1024));
        assert_eq!(hwang_decrypt_bits(&key, &env).unwrap(), bits);
    }
    let msg = rng.bytes(1024);
    let env = hwang_encrypt(&public, &msg).unwrap();
    assert_eq!(knapcrack::hwang::hwang_decrypt(&key, &env).unwrap(), msg);
    assert!(
        start.elapsed() < Duration::from_secs(300),
        "took {:?}",
        start.elapsed()
    );
}

fn greedy_matches_brute_force() {
    let mut rng = DetRng::from_seed(11);
    for n in 1..=12 {
        for gap_bits in [1, 2, 3] {
            let b = gen_superincreasing(n, gap_bits, &mut rng).unwrap();
            let total: u64 = b.total().try_into().unwrap();
            // every target up to the total, achievable or not
            let targets: Vec<u64> = if n <= 9 {
                (0..=total + 1).collect()
            } else {
                (0..1u32 << n)
                    .map(|mask| {
                        (0..n)
                            .filter(|i| mask >> (n - 1 - i) & 1 == 1)
                            .map(|i| u64::try_from(&b.elements()[i]).unwrap())
                            .sum()
                    })
                    .chain([total + 1])
                    .collect()
            };
            for t in targets {
                let target = BigUint::from(t);
                let brute = brute_force_subset_sum(b.elements(), &target).unwrap();
                assert!(brute.len() <= 1, "two solutions for {t}");
                match solve_superincreasing(&b, &target) {
                    Ok(x) => assert_eq!(brute, vec![x]),
                    Err(_) => assert!(brute.is_empty()),
                }
            }
        }
    }
}

fn factoradic_fidelity() {
    for g in 1..=8 {
        let total: u64 = (&factorial(g)).try_into().unwrap();
        let mut seen = HashSet::new();
        for m in 0..total {
            let m = BigUint::from(m);
            let d = to_factorial_digits(&m, g).unwrap();
            assert_eq!(from_factorial_digits(&d), m);
            assert!(seen.insert(decode_permutation(&d)));
        }
        assert_eq!(seen.len() as u64, total);
        assert!(to_factorial_digits(&BigUint::from(total), g).is_err());
    }

    // labels E_g … E_1 stored in position order
    let labels = |g: usize, m: u64| -> Vec<usize> {
        let d = to_factorial_digits(&BigUint::from(m), g).unwrap();
        decode_permutation(&d)
            .into_iter()
            .map(|pos| g - pos)
            .collect()
    };
    let tails = [
        [3, 2, 1],
        [3, 1, 2],
        [2, 3, 1],
        [2, 1, 3],
        [1, 3, 2],
        [1, 2, 3],
    ];
    for g in [3, 5, 8] {
        for (m, tail) in tails.iter().enumerate() {
            let seq = labels(g, m as u64);
            let head: Vec<usize> = (4..=g).rev().collect();
            assert_eq!(&seq[..g - 3], &head[..]);
            assert_eq!(&seq[g - 3..], tail);
        }
    }
    assert_eq!(
        to_factorial_digits(&BigUint::from(6u8), 8)
            .unwrap()
            .digits(),
        &[0, 0, 0, 0, 1, 0, 0, 0]
    );
    assert_eq!(labels(8, 6), vec![8, 7, 6, 5, 3, 4, 2, 1]);
    assert_eq!(labels(5, 6), vec![5, 3, 4, 2, 1]);
}

fn random_basis(d: usize, rng: &mut DetRng) -> IntegerBasis {
    let bound = 1u64 << 32;
    loop {
        let rows = (0..d)
            .map(|_| {
                (0..d)
                    .map(|_| BigInt::from(rng.below_u64(2 * bound + 1)) - BigInt::from(bound))
                    .collect()
            })
            .collect();
        let basis = IntegerBasis::new(rows).unwrap();
        if !basis.determinant().is_zero() {
            return basis;
        }
    }
}

fn lll_soundness() {
    let mut rng = DetRng::from_seed(4);
    let deltas = [BigRational::new(3.into(), 4.into()), default_delta()];
    for trial in 0..100 {
        let d = 1 + trial % 4;
        let basis = random_basis(d, &mut rng);
        for delta in &deltas {
            let out = lll_reduce(&basis, delta).unwrap();
            assert!(out.transform.determinant().abs().is_one());
            assert_eq!(out.transform.mul(&basis).unwrap(), out.reduced);
            assert!(is_lll_reduced(&out.reduced, delta).unwrap());
            let shortest = shortest_vector_exhaustive(&out.reduced, 16).unwrap();
            let first = norm_sq(&out.reduced.rows()[0]);
            assert!(first <= norm_sq(&shortest) << (d - 1));
        }
    }
}

fn trapdoor_bounds() {
    for (n, seeds) in [(8, 0..20u64), (16, 0..20), (24, 0..20), (1360, 0..2)] {
        for seed in seeds {
            let (key, public) = mh_keygen(n, 8, &mut DetRng::from_seed(seed)).unwrap();
            let k = trapdoor_multiples(&key, &public);
            for ((ki, ai), bi) in k.iter().zip(&public.a).zip(key.b().elements()) {
                assert_eq!(ki * key.p() + bi, ai * key.w_inv());
                assert!(ki < ai);
            }
            for (err, bi) in approximation_errors(&public.a, &k)
                .iter()
                .zip(&key.b().elements()[1..])
            {
                assert!(err.abs() < BigInt::from(bi.clone()) * 2);
            }
        }
    }
}

/// (n, seed) pairs; the instance is keygen then one random n-bit plaintext
/// from the same stream.
const MH_REGRESSION: &[(usize, u64)] = &[
    (8, 1),
    (8, 2),
    (8, 3),
    (8, 4),
    (8, 5),
    (16, 1),
    (16, 2),
    (16, 3),
    (16, 4),
    (24, 1),
    (24, 2),
    (24, 3),
    (24, 4),
];

/// (s, g, c, seed, message).
const HWANG_REGRESSION: &[(usize, usize, usize, u64, &str)] = &[
    (4, 10, 6, 1, "attack at dawn"),
    (4, 10, 6, 2, "the quick brown fox jumps over the lazy dog"),
    (2, 32, 24, 3, "knapsack"),
    (8, 20, 16, 4, "retreat at noon, regroup at dusk"),
    (8, 170, 128, 1, "attack at dawn"),
];

fn attack_regression() {
    let config = AttackConfig::default();
    for &(n, seed) in MH_REGRESSION {
        let mut rng = DetRng::from_seed(seed);
        let (_, public) = mh_keygen(n, 8, &mut rng).unwrap();
        let m = BitVector::random(n, &mut rng);
        let c = encrypt_mh(&public, &m).unwrap();
        let out = attack_mh(&public, &[c], &config).unwrap();
        assert!(out.key.is_usable(), "mh n={n} seed={seed}");
        assert_eq!(
            out.plaintexts[0].as_ref().unwrap(),
            &m,
            "mh n={n} seed={seed}"
        );
    }
    for &(s, g, c, seed, msg) in HWANG_REGRESSION {
        let params = HwangParams::new(s, g, c, 8).unwrap();
        let (_, public) = hwang_keygen(params, &mut DetRng::from_seed(seed)).unwrap();
        let env = hwang_encrypt(&public, msg.as_bytes()).unwrap();
        let out = attack_hwang(&public, &env, &config).unwrap();
        assert_eq!(
            out.plaintext(),
            msg.as_bytes(),
            "hwang ({s},{g},{c}) seed={seed}"
        );
    }
}

fn experiment_reproducible() {
    let points = [8, 16, 24]
        .map(|n| GridPoint {
            instance: Instance::Mh { n },
            gap_bits: 8,
            t: 5,
            delta: default_delta(),
        })
        .to_vec();
    let spec = ExperimentSpec {
        points,
        trials: 100,
        seed: 7,
    };
    let first = run_experiment(&spec).unwrap().without_timing();
    let second = run_experiment(&spec).unwrap().without_timing();
    assert_eq!(first, second);
    assert_eq!(first.to_text().unwrap(), BASELINE);
    assert_eq!(ExperimentReport::parse(BASELINE).unwrap(), first);
    for row in &first.rows {
        assert!(row.successes <= row.trials);
        assert_eq!(row.verified_mismatches, 0);
    }
}

fn mask_cancellation() {
    let mut rng = DetRng::from_seed(8);
    let scales = [
        (1, 5, 3),
        (4, 10, 6),
        (2, 32, 24),
        (8, 20, 16),
        (8, 170, 128),
    ];
    for (i, &(s, g, c)) in scales.iter().enumerate() {
        let params = HwangParams::new(s, g, c, 8).unwrap();
        let (key, public) = hwang_keygen(params, &mut DetRng::from_seed(i as u64)).unwrap();
        for _ in 0..5 {
            let len = 1 + rng.below_u64(3 * params.block_len() as u64) as usize;
            let bits: Vec<bool> = (0..len).map(|_| rng.next_bit()).collect();
            let env = hwang_encrypt_bits(&public, &bits).unwrap();
            let (out, traces) = hwang_decrypt_traced(&key, &env).unwrap();
            assert_eq!(out, bits);
            for (trace, ck) in traces.iter().zip(&env.blocks) {
                assert_eq!(trace.unmasked, (ck * key.key.w_inv()) % key.key.p());
                assert_eq!(trace.unmasked, trace.selected_sum);
                assert!(&trace.selection_total < key.key.p());
            }
        }
    }
}

fn main() -> ExitCode {
    let criteria: [(&str, fn()); 8] = [
        (
            "full-size round trip, 100 messages of 1-8192 bits",
            round_trip_full_size,
        ),
        (
            "greedy solver matches brute force for n <= 12",
            greedy_matches_brute_force,
        ),
        (
            "factorial digits: bijection for g <= 8, reference permutations for m = 0..6",
            factoradic_fidelity,
        ),
        (
            "LLL output reduced, unimodular, first vector within 2^(d-1)",
            lll_soundness,
        ),
        (
            "trapdoor multiples integral and approximation errors below 2b_i",
            trapdoor_bounds,
        ),
        (
            "pinned attack instances recover every plaintext",
            attack_regression,
        ),
        (
            "experiment table reproduces the stored baseline",
            experiment_reproducible,
        ),
        (
            "mask cancellation on every decryption block",
            mask_cancellation,
        ),
    ];
    panic::set_hook(Box::new(|info| eprintln!("  {info}")));
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let ok = panic::catch_unwind(AssertUnwindSafe(check)).is_ok();
        if !ok {
            failed += 1;
        }
        println!(
            "criterion {}: {} {name} ({:.1}s)",
            i + 1,
            if ok { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
