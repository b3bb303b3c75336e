//! Golden files in `tests/data/golden` were written by the CLI; the library
//! must reproduce them byte for byte.

use knapcrack::attack::{attack_hwang, AttackConfig};
use knapcrack::experiment::{run_experiment, ExperimentSpec, GridPoint, Instance};
use knapcrack::format::{AttackReport, CiphertextFile, ExperimentReport, KeyFile, Scheme};
use knapcrack::hwang::{hwang_decrypt, hwang_encrypt, hwang_keygen, HwangParams};
use knapcrack::knapsack::mh_keygen;
use knapcrack::lattice::default_delta;
use knapcrack::message::{decrypt_mh_message, encrypt_mh_message};
use knapcrack::rng::DetRng;

macro_rules! golden {
    ($name:literal) => {
        include_str!(concat!("data/golden/", $name))
    };
}

#[test]
fn mh_files() {
    let (key, public) = mh_keygen(8, 8, &mut DetRng::from_seed(42)).unwrap();
    let file = KeyFile::from_mh(&key, 8);
    assert_eq!(file.to_text().unwrap(), golden!("mh.key"));
    assert_eq!(file.public_only().to_text().unwrap(), golden!("mh.pub"));
    assert_eq!(
        file.fingerprint().unwrap(),
        "0d1c75d86f03eceb5217279f029f33ce"
    );

    let msg = golden!("mh.msg").as_bytes();
    let ct = CiphertextFile::mh(encrypt_mh_message(&public, msg).unwrap(), msg.len() * 8);
    assert_eq!(ct.to_text().unwrap(), golden!("mh.ct"));
    let parsed = CiphertextFile::parse(golden!("mh.ct")).unwrap();
    assert_eq!(
        decrypt_mh_message(&key, &parsed.blocks, parsed.msg_bit_len).unwrap(),
        msg
    );
}

#[test]
fn hwang_files() {
    let params = HwangParams::new(4, 10, 6, 8).unwrap();
    let (key, public) = hwang_keygen(params, &mut DetRng::from_seed(3)).unwrap();
    let file = KeyFile::from_hwang(&key);
    assert_eq!(file.to_text().unwrap(), golden!("hwang.key"));
    assert_eq!(file.public_only().to_text().unwrap(), golden!("hwang.pub"));

    let msg = golden!("hwang.msg").as_bytes();
    let env = hwang_encrypt(&public, msg).unwrap();
    assert_eq!(
        CiphertextFile::hwang(&env).to_text().unwrap(),
        golden!("hwang.ct")
    );
    let parsed = CiphertextFile::parse(golden!("hwang.ct"))
        .unwrap()
        .envelope()
        .unwrap();
    assert_eq!(hwang_decrypt(&key, &parsed).unwrap(), msg);
}

#[test]
fn attack_report() {
    let report = AttackReport::parse(golden!("hwang.report")).unwrap();
    assert_eq!(report.scheme, Scheme::Hwang);
    assert!(report.success && report.key_usable);
    assert_eq!(report.blocks, report.blocks_verified);

    let public = KeyFile::parse_public(golden!("hwang.pub"))
        .unwrap()
        .hwang_public()
        .unwrap();
    let env = CiphertextFile::parse(golden!("hwang.ct"))
        .unwrap()
        .envelope()
        .unwrap();
    let out = attack_hwang(&public, &env, &AttackConfig::default()).unwrap();
    assert_eq!(out.plaintext(), golden!("hwang.msg").as_bytes());
    assert_eq!(report.k1.as_ref(), Some(&out.key.k1));
    assert_eq!(report.u_prime.as_ref(), Some(&out.key.u_prime));
    assert_eq!(report.p_prime.as_ref(), Some(&out.key.p_prime));
    assert_eq!(report.candidates_tried, out.key.candidates_tried);
    let mut round = report.clone();
    round.recover_ms = 0.0;
    assert_eq!(
        AttackReport::parse(&round.to_text().unwrap()).unwrap(),
        round
    );
}

#[test]
fn experiment_report() {
    let spec = ExperimentSpec {
        points: vec![GridPoint {
            instance: Instance::Mh { n: 8 },
            gap_bits: 8,
            t: 5,
            delta: default_delta(),
        }],
        trials: 10,
        seed: 1,
    };
    let report = run_experiment(&spec).unwrap().without_timing();
    assert_eq!(report.to_text().unwrap(), golden!("experiment.report"));
    assert_eq!(
        ExperimentReport::parse(golden!("experiment.report")).unwrap(),
        report
    );
}

#[test]
fn public_parser_rejects_private_files() {
    assert!(KeyFile::parse_public(golden!("mh.key")).is_err());
    assert!(KeyFile::parse_public(golden!("hwang.key")).is_err());
}
