//! `knapcrack` command-line front end.
//!
//! Exit status: 0 success, 1 I/O error, 2 bad parameters or input files,
//! 3 decryption failure, 4 attack failure.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use num_rational::BigRational;

use knapcrack::attack::{
    decrypt_hwang_with_recovered, decrypt_with_recovered, recover_key, AttackConfig,
};
use knapcrack::experiment::{run_experiment, ExperimentSpec, GridPoint, Instance};
use knapcrack::format::{AttackReport, CiphertextFile, KeyFile, Scheme};
use knapcrack::hwang::{
    derive_working_knapsack, hwang_decrypt, hwang_encrypt, hwang_keygen, HwangParams,
};
use knapcrack::knapsack::{mh_keygen, BitVector, MhPrivateKey};
use knapcrack::lattice::check_delta;
use knapcrack::message::{bits_to_bytes, decrypt_mh_message, encrypt_mh_message, join_blocks};
use knapcrack::rng::DetRng;
use knapcrack::Error;

#[derive(Parser)]
#[command(
    name = "knapcrack",
    version,
    about = "Knapsack cryptosystems and the lattice attack that breaks them"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a key pair; writes <out>.key and <out>.pub.
    Keygen(KeygenArgs),
    /// Encrypt a message file under a public key.
    Encrypt(EncryptArgs),
    /// Decrypt a ciphertext with a private key.
    Decrypt(DecryptArgs),
    /// Recover a plain Merkle-Hellman plaintext from public data.
    AttackMh(AttackArgs),
    /// Recover a permutation-scheme plaintext from public data.
    AttackHwang(AttackArgs),
    /// Run seeded attack trials over a parameter grid.
    Experiment(ExperimentArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SchemeArg {
    Mh,
    Hwang,
}

#[derive(Args)]
struct KeygenArgs {
    #[arg(long, value_enum)]
    scheme: SchemeArg,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    subsets: Option<usize>,
    #[arg(long)]
    subset_size: Option<usize>,
    #[arg(long)]
    select: Option<usize>,
    #[arg(long, default_value_t = 8)]
    gap_bits: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output path prefix.
    #[arg(long, default_value = "key")]
    out: PathBuf,
}

#[derive(Args)]
struct EncryptArgs {
    #[arg(long = "pub")]
    public: PathBuf,
    #[arg(long)]
    msg: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct DecryptArgs {
    #[arg(long)]
    key: PathBuf,
    #[arg(long)]
    ct: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct AttackArgs {
    #[arg(long = "pub")]
    public: PathBuf,
    #[arg(long)]
    ct: PathBuf,
    /// Where the recovered plaintext goes; written only on success.
    #[arg(long)]
    out: PathBuf,
    /// Attack report path; written on success and failure.
    #[arg(long)]
    report: PathBuf,
    #[arg(long, default_value_t = 5)]
    lattice_dim: usize,
    #[arg(long, default_value = "99/100")]
    delta: String,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long, value_enum, default_value = "mh")]
    scheme: SchemeArg,
    #[arg(long, value_delimiter = ',')]
    n: Vec<usize>,
    #[arg(long, value_delimiter = ',')]
    subsets: Vec<usize>,
    #[arg(long, value_delimiter = ',')]
    subset_size: Vec<usize>,
    #[arg(long, value_delimiter = ',')]
    select: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "8")]
    gap_bits: Vec<u32>,
    #[arg(long, value_delimiter = ',', default_value = "5")]
    lattice_dim: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "99/100")]
    delta: Vec<String>,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Leave wall-clock timings out so the report is reproducible.
    #[arg(long)]
    no_timing: bool,
}

struct Failure {
    code: u8,
    message: String,
}

type CliResult<T = ()> = Result<T, Failure>;

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NotDecryptable | Error::DecryptionFailure(_) => 3,
            Error::AttackFailed(_) | Error::RankDeficient => 4,
            _ => 2,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        message: message.into(),
    }
}

fn read(path: &Path) -> CliResult<Vec<u8>> {
    fs::read(path).map_err(|e| Failure {
        code: 1,
        message: format!("{}: {e}", path.display()),
    })
}

fn read_text(path: &Path) -> CliResult<String> {
    String::from_utf8(read(path)?).map_err(|_| usage(format!("{}: not UTF-8 text", path.display())))
}

fn write(path: &Path, data: impl AsRef<[u8]>) -> CliResult {
    fs::write(path, data).map_err(|e| Failure {
        code: 1,
        message: format!("{}: {e}", path.display()),
    })
}

fn parse_delta(s: &str) -> CliResult<BigRational> {
    let delta: BigRational = s
        .parse()
        .map_err(|_| usage(format!("delta must be a rational like 99/100, got {s:?}")))?;
    check_delta(&delta)?;
    Ok(delta)
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn cmd_keygen(args: KeygenArgs) -> CliResult {
    let mut rng = DetRng::from_seed(args.seed);
    let file = match args.scheme {
        SchemeArg::Mh => {
            let n = args.n.ok_or_else(|| usage("--n is required for mh"))?;
            let (key, _) = mh_keygen(n, args.gap_bits, &mut rng)?;
            KeyFile::from_mh(&key, args.gap_bits)
        }
        SchemeArg::Hwang => {
            let (Some(s), Some(g), Some(c)) = (args.subsets, args.subset_size, args.select) else {
                return Err(usage(
                    "--subsets, --subset-size and --select are required for hwang",
                ));
            };
            let params = HwangParams::new(s, g, c, args.gap_bits)?;
            if args.n.is_some_and(|n| n != params.n()) {
                return Err(usage("--n must equal subsets × subset-size"));
            }
            let (key, _) = hwang_keygen(params, &mut rng)?;
            KeyFile::from_hwang(&key)
        }
    };
    write(&with_suffix(&args.out, ".key"), file.to_text()?)?;
    write(
        &with_suffix(&args.out, ".pub"),
        file.public_only().to_text()?,
    )?;
    println!("{}", file.fingerprint()?);
    Ok(())
}

fn cmd_encrypt(args: EncryptArgs) -> CliResult {
    let key = KeyFile::parse_public(&read_text(&args.public)?)?;
    let msg = read(&args.msg)?;
    let ct = match key.scheme {
        Scheme::Mh => {
            CiphertextFile::mh(encrypt_mh_message(&key.mh_public()?, &msg)?, msg.len() * 8)
        }
        Scheme::Hwang => CiphertextFile::hwang(&hwang_encrypt(&key.hwang_public()?, &msg)?),
    };
    write(&args.out, ct.to_text()?)
}

/// Decryption under a mismatched key can land on some subset by accident;
/// re-encrypting catches that.
fn check_reencrypts(public: &[BigUint], blocks: &[BigUint], bits: &[bool]) -> CliResult {
    let n = public.len();
    for (k, c) in blocks.iter().enumerate() {
        let mut block: Vec<bool> = bits.iter().skip(k * n).take(n).copied().collect();
        block.resize(n, false);
        if &BitVector::new(block).weighted_sum(public)? != c {
            return Err(
                Error::DecryptionFailure(format!("block {} does not re-encrypt", k + 1)).into(),
            );
        }
    }
    Ok(())
}

fn bits_of(bytes: &[u8], len: usize) -> Vec<bool> {
    let mut bits = knapcrack::message::bytes_to_bits(bytes).into_inner();
    bits.truncate(len);
    bits
}

fn cmd_decrypt(args: DecryptArgs) -> CliResult {
    let key = KeyFile::parse(&read_text(&args.key)?)?;
    let ct = CiphertextFile::parse(&read_text(&args.ct)?)?;
    if key.scheme != ct.scheme {
        return Err(usage(format!(
            "key is {} but ciphertext is {}",
            key.scheme, ct.scheme
        )));
    }
    let plain = match ct.scheme {
        Scheme::Mh => {
            let private: MhPrivateKey = key.mh_private()?;
            let plain = decrypt_mh_message(&private, &ct.blocks, ct.msg_bit_len)?;
            check_reencrypts(&key.public.a, &ct.blocks, &bits_of(&plain, ct.msg_bit_len))?;
            plain
        }
        Scheme::Hwang => {
            let private = key.hwang_private()?;
            let env = ct.envelope()?;
            let plain = hwang_decrypt(&private, &env)?;
            let working = derive_working_knapsack(&key.public.a, &env.d_prime, &private.params)?;
            check_reencrypts(
                &working.working,
                &ct.blocks,
                &bits_of(&plain, ct.msg_bit_len),
            )?;
            plain
        }
    };
    write(&args.out, plain)
}

fn cmd_attack(args: AttackArgs, scheme: Scheme) -> CliResult {
    let delta = parse_delta(&args.delta)?;
    let key = KeyFile::parse_public(&read_text(&args.public)?)?;
    let ct = CiphertextFile::parse(&read_text(&args.ct)?)?;
    if key.scheme != scheme || ct.scheme != scheme {
        return Err(usage(format!(
            "attack-{scheme} needs a {scheme} key and ciphertext"
        )));
    }
    let config = AttackConfig {
        t: args.lattice_dim,
        delta,
        ..Default::default()
    };
    config.validate(key.public.a.len())?;

    let mut report = AttackReport::new(scheme, args.lattice_dim, args.delta.clone());
    report.blocks = ct.blocks.len();
    let start = Instant::now();
    let recovered = recover_key(&key.public.a, &config);
    report.recover_ms = start.elapsed().as_secs_f64() * 1e3;

    let outcome = recovered.and_then(|rk| {
        report.candidates_tried = rk.candidates_tried;
        report.key_usable = rk.is_usable();
        report.k1 = Some(rk.k1.clone());
        report.u_prime = Some(rk.u_prime.clone());
        report.p_prime = Some(rk.p_prime.clone());
        let start = Instant::now();
        let bits = match scheme {
            Scheme::Mh => {
                let mut blocks = Vec::with_capacity(ct.blocks.len());
                for c in &ct.blocks {
                    blocks.push(decrypt_with_recovered(&rk, &key.public.a, c)?);
                    report.blocks_verified += 1;
                }
                Ok(join_blocks(&blocks, ct.msg_bit_len))
            }
            Scheme::Hwang => {
                let bits = decrypt_hwang_with_recovered(&rk, &key.hwang_public()?, &ct.envelope()?);
                if bits.is_ok() {
                    report.blocks_verified = ct.blocks.len();
                }
                bits
            }
        };
        report.decrypt_ms = start.elapsed().as_secs_f64() * 1e3;
        bits
    });
    report.success = outcome.is_ok();
    if let Err(e) = &outcome {
        report.failure = Some(e.to_string());
    }
    write(&args.report, report.to_text()?)?;
    let bits = outcome.map_err(|e| match e {
        Error::AttackFailed(_) | Error::RankDeficient | Error::NotDecryptable => Failure::from(e),
        other => Failure {
            code: 4,
            message: other.to_string(),
        },
    })?;
    write(&args.out, bits_to_bytes(&bits))
}

fn cmd_experiment(args: ExperimentArgs) -> CliResult {
    let instances: Vec<Instance> = match args.scheme {
        SchemeArg::Mh => {
            if args.n.is_empty() {
                return Err(usage("--n is required for mh"));
            }
            args.n.iter().map(|&n| Instance::Mh { n }).collect()
        }
        SchemeArg::Hwang => {
            if args.subsets.is_empty() || args.subset_size.is_empty() || args.select.is_empty() {
                return Err(usage(
                    "--subsets, --subset-size and --select are required for hwang",
                ));
            }
            let mut v = Vec::new();
            for &s in &args.subsets {
                for &g in &args.subset_size {
                    for &c in &args.select {
                        v.push(Instance::Hwang { s, g, c });
                    }
                }
            }
            v
        }
    };
    let deltas = args
        .delta
        .iter()
        .map(|d| parse_delta(d))
        .collect::<CliResult<Vec<_>>>()?;
    let mut points = Vec::new();
    for instance in &instances {
        for &gap_bits in &args.gap_bits {
            for &t in &args.lattice_dim {
                for delta in &deltas {
                    points.push(GridPoint {
                        instance: instance.clone(),
                        gap_bits,
                        t,
                        delta: delta.clone(),
                    });
                }
            }
        }
    }
    let spec = ExperimentSpec {
        points,
        trials: args.trials,
        seed: args.seed,
    };
    let mut report = run_experiment(&spec)?;
    if args.no_timing {
        report = report.without_timing();
    }
    for row in &report.rows {
        println!(
            "{} n={} t={} delta={} successes={}/{}",
            row.scheme, row.n, row.t, row.delta, row.successes, row.trials
        );
    }
    write(&args.out, report.to_text()?)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Keygen(a) => cmd_keygen(a),
        Command::Encrypt(a) => cmd_encrypt(a),
        Command::Decrypt(a) => cmd_decrypt(a),
        Command::AttackMh(a) => cmd_attack(a, Scheme::Mh),
        Command::AttackHwang(a) => cmd_attack(a, Scheme::Hwang),
        Command::Experiment(a) => cmd_experiment(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
