//! The `bea1` command: file encryption in CTR mode, key expansion, known-
//! answer-test management, component analysis with claim-by-claim PASS/FAIL
//! reporting, and the keystream statistical battery.
//!
//! Exit codes: 0 success and all claims hold, 1 usage or I/O trouble, 2
//! malformed input (file header, KAT text), 3 a claim or verification
//! failed.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rand::RngCore;

use bea1::analysis::{
    bound_claims, compute_ddt, compute_lat, diffusion_claims, min_active_sboxes,
    sbox_uniformity_claims, trail_bounds, ClaimCheck, CLAIMED_BRANCH_NUMBER,
    CLAIMED_DIFF_UNIFORMITY, CLAIMED_LINEAR_UNIFORMITY,
};
use bea1::bundles::{Block, MasterKey};
use bea1::cipher::{ctr_transform, FileHeader, KeySchedule};
use bea1::kat;
use bea1::randtest::{
    alternating_stream, constant_stream, default_battery, run_battery, run_battery_with,
    test_by_name, BatteryConfig, StatTest,
};
use bea1::tables::Tables;

#[derive(Parser)]
#[command(name = "bea1", version, about = "BEA-1 research cipher workbench")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Encrypt a file in CTR mode, writing a headered ciphertext file.
    Encrypt {
        /// Master key, 30 hex chars.
        #[arg(long)]
        key: String,
        input: PathBuf,
        output: PathBuf,
        /// Counter start, 20 hex chars; random when omitted.
        #[arg(long)]
        iv: Option<String>,
    },
    /// Decrypt a headered ciphertext file.
    Decrypt {
        /// Master key, 30 hex chars.
        #[arg(long)]
        key: String,
        input: PathBuf,
        output: PathBuf,
    },
    /// Print the twelve round keys, one per line.
    ExpandKey {
        /// Master key, 30 hex chars.
        #[arg(long)]
        key: String,
    },
    /// Generate or verify known-answer-test files.
    Kat {
        #[command(subcommand)]
        action: KatAction,
    },
    /// Check the published security figures against the actual tables.
    Analyze {
        #[command(subcommand)]
        target: AnalyzeTarget,
    },
    /// Run the statistical battery on CTR keystream (or a stub source).
    Randtest {
        /// Master key, 30 hex chars; required unless --stub is given.
        #[arg(long)]
        key: Option<String>,
        #[arg(long, default_value_t = 50)]
        sequences: usize,
        #[arg(long, default_value_t = 100_000)]
        bits: usize,
        /// Degenerate bit source replacing the cipher (negative control).
        #[arg(long, value_enum)]
        stub: Option<Stub>,
        /// Run a single test instead of the whole battery.
        #[arg(long)]
        test: Option<String>,
    },
}

#[derive(Subcommand)]
enum KatAction {
    /// Write a deterministic KAT file.
    Generate {
        path: PathBuf,
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long, default_value_t = kat::DEFAULT_SEED)]
        seed: u64,
    },
    /// Recompute every record of a KAT file.
    Verify { path: PathBuf },
}

#[derive(Subcommand)]
enum AnalyzeTarget {
    /// Differential and linear uniformity of the S-boxes.
    Sbox {
        /// Analyze a single S-box 0..3 instead of all four.
        #[arg(long)]
        index: Option<usize>,
        /// Also write the full tables as sboxN_ddt.csv / sboxN_lat.csv here.
        #[arg(long)]
        csv_dir: Option<PathBuf>,
    },
    /// Branch numbers of the mixing layer.
    Matrix {
        /// Cross-check the rank method by scanning inputs of bundle weight
        /// up to this (1..=4; 3 and above take minutes to hours).
        #[arg(long, default_value_t = 2)]
        scan_weight: u32,
    },
    /// Trail probability and bias bounds.
    Bounds {
        #[arg(long, default_value_t = 10)]
        rounds: u32,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Stub {
    /// All zero bits.
    #[value(alias = "constant")]
    Constant0,
    /// All one bits.
    Constant1,
    /// 0101... with period two.
    Alternating,
}

enum Failure {
    Usage(String),
    Format(String),
    Claim(String),
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Format(_) => 2,
            Failure::Claim(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(msg) | Failure::Format(msg) | Failure::Claim(msg) => msg,
        }
    }
}

fn usage(err: impl std::fmt::Display) -> Failure {
    Failure::Usage(err.to_string())
}

fn read_file(path: &Path) -> Result<Vec<u8>, Failure> {
    fs::read(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, data: &[u8]) -> Result<(), Failure> {
    fs::write(path, data).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn parse_key(hex: &str) -> Result<MasterKey, Failure> {
    MasterKey::from_hex(hex).map_err(|e| Failure::Usage(format!("key: {e}")))
}

fn main() -> ExitCode {
    eprintln!(
        "warning: BEA-1 contains a deliberately inserted backdoor; never use it to protect real data"
    );
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = u8::from(err.use_stderr());
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message());
            ExitCode::from(failure.exit_code())
        }
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Encrypt {
            key,
            input,
            output,
            iv,
        } => cmd_encrypt(&key, &input, &output, iv.as_deref()),
        Command::Decrypt { key, input, output } => cmd_decrypt(&key, &input, &output),
        Command::ExpandKey { key } => cmd_expand_key(&key),
        Command::Kat { action } => match action {
            KatAction::Generate { path, count, seed } => cmd_kat_generate(&path, count, seed),
            KatAction::Verify { path } => cmd_kat_verify(&path),
        },
        Command::Analyze { target } => match target {
            AnalyzeTarget::Sbox { index, csv_dir } => cmd_analyze_sbox(index, csv_dir.as_deref()),
            AnalyzeTarget::Matrix { scan_weight } => cmd_analyze_matrix(scan_weight),
            AnalyzeTarget::Bounds { rounds } => cmd_analyze_bounds(rounds),
        },
        Command::Randtest {
            key,
            sequences,
            bits,
            stub,
            test,
        } => cmd_randtest(key.as_deref(), sequences, bits, stub, test.as_deref()),
    }
}

fn cmd_encrypt(
    key_hex: &str,
    input: &Path,
    output: &Path,
    iv_hex: Option<&str>,
) -> Result<(), Failure> {
    let key = parse_key(key_hex)?;
    let iv = match iv_hex {
        Some(hex) => Block::from_hex(hex).map_err(|e| Failure::Usage(format!("iv: {e}")))?,
        None => {
            let mut bytes = [0u8; 10];
            rand::rngs::OsRng.fill_bytes(&mut bytes);
            Block::from_bytes(&bytes)
        }
    };
    let data = read_file(input)?;
    let ks = KeySchedule::new(&key);
    let mut out = FileHeader { iv }.to_bytes().to_vec();
    out.extend_from_slice(&ctr_transform(&ks, iv, &data));
    write_file(output, &out)?;
    println!("encrypted {} bytes, iv {}", data.len(), iv.to_hex());
    Ok(())
}

fn cmd_decrypt(key_hex: &str, input: &Path, output: &Path) -> Result<(), Failure> {
    let key = parse_key(key_hex)?;
    let data = read_file(input)?;
    let (header, payload) = FileHeader::parse(&data)
        .map_err(|e| Failure::Format(format!("{}: {e}", input.display())))?;
    let ks = KeySchedule::new(&key);
    write_file(output, &ctr_transform(&ks, header.iv, payload))?;
    println!(
        "decrypted {} bytes, iv {}",
        payload.len(),
        header.iv.to_hex()
    );
    Ok(())
}

fn cmd_expand_key(key_hex: &str) -> Result<(), Failure> {
    let key = parse_key(key_hex)?;
    for round_key in KeySchedule::new(&key).round_keys() {
        println!("{}", round_key.to_hex());
    }
    Ok(())
}

fn cmd_kat_generate(path: &Path, count: usize, seed: u64) -> Result<(), Failure> {
    let records = kat::generate(count, seed);
    write_file(path, kat::to_text(&records).as_bytes())?;
    println!("wrote {count} records to {}", path.display());
    Ok(())
}

fn cmd_kat_verify(path: &Path) -> Result<(), Failure> {
    let text = String::from_utf8(read_file(path)?)
        .map_err(|e| Failure::Format(format!("{}: {e}", path.display())))?;
    let records =
        kat::parse(&text).map_err(|e| Failure::Format(format!("{}: {e}", path.display())))?;
    kat::verify(&records).map_err(|e| Failure::Claim(e.to_string()))?;
    println!("verified {} records", records.len());
    Ok(())
}

/// Prints the claims and turns any failure into exit code 3.
fn report_claims(claims: &[ClaimCheck]) -> Result<(), Failure> {
    for claim in claims {
        println!("{claim}");
    }
    if claims.iter().all(|c| c.pass) {
        Ok(())
    } else {
        Err(Failure::Claim(
            "a published figure did not check out".into(),
        ))
    }
}

fn cmd_analyze_sbox(index: Option<usize>, csv_dir: Option<&Path>) -> Result<(), Failure> {
    let indices = match index {
        Some(i) if i < 4 => vec![i],
        Some(i) => return Err(Failure::Usage(format!("S-box index {i} outside 0..=3"))),
        None => vec![0, 1, 2, 3],
    };
    let mut claims = Vec::new();
    for &i in &indices {
        claims.extend(sbox_uniformity_claims(i));
        if let Some(dir) = csv_dir {
            let sbox = &Tables::get().sboxes[i];
            let mut ddt_csv = Vec::new();
            compute_ddt(sbox)
                .write_csv(&mut ddt_csv)
                .expect("vec writes cannot fail");
            write_file(&dir.join(format!("sbox{i}_ddt.csv")), &ddt_csv)?;
            let mut lat_csv = Vec::new();
            compute_lat(sbox)
                .write_csv(&mut lat_csv)
                .expect("vec writes cannot fail");
            write_file(&dir.join(format!("sbox{i}_lat.csv")), &lat_csv)?;
        }
    }
    report_claims(&claims)
}

fn cmd_analyze_matrix(scan_weight: u32) -> Result<(), Failure> {
    if !(1..=4).contains(&scan_weight) {
        return Err(Failure::Usage(format!(
            "scan weight {scan_weight} outside 1..=4"
        )));
    }
    report_claims(&diffusion_claims(scan_weight))
}

fn cmd_analyze_bounds(rounds: u32) -> Result<(), Failure> {
    if rounds == 0 {
        return Err(Failure::Usage("need at least one round".into()));
    }
    let active = min_active_sboxes(rounds, CLAIMED_BRANCH_NUMBER);
    let bound = trail_bounds(
        active,
        CLAIMED_DIFF_UNIFORMITY as u32,
        CLAIMED_LINEAR_UNIFORMITY as u32,
    )
    .expect("advertised uniformities are in range");
    println!(
        "{rounds} rounds, branch number {CLAIMED_BRANCH_NUMBER}: at least {active} active S-boxes"
    );
    println!(
        "log2 differential trail probability bound {:.4} (needs >= 2^{:.2} chosen pairs)",
        bound.log2_prob_bound,
        bound.chosen_pairs_log2()
    );
    println!(
        "log2 linear trail bias bound {:.4} (needs >= 2^{:.2} known pairs)",
        bound.log2_bias_bound,
        bound.known_pairs_log2()
    );
    if rounds == 10 {
        report_claims(&bound_claims())?;
    }
    Ok(())
}

fn cmd_randtest(
    key_hex: Option<&str>,
    sequences: usize,
    bits: usize,
    stub: Option<Stub>,
    test: Option<&str>,
) -> Result<(), Failure> {
    if sequences == 0 {
        return Err(Failure::Usage("need at least one sequence".into()));
    }
    if bits == 0 {
        return Err(Failure::Usage("need at least one bit per sequence".into()));
    }
    let tests: Vec<Box<dyn StatTest>> =
        match test {
            Some(name) => vec![test_by_name(name)
                .ok_or_else(|| Failure::Usage(format!("no test named {name:?}")))?],
            None => default_battery(),
        };
    let config = BatteryConfig {
        n_sequences: sequences,
        bits_per_sequence: bits,
        ..BatteryConfig::default()
    };
    let report = match stub {
        Some(stub) => run_battery_with(&config, &tests, |_| match stub {
            Stub::Constant0 => constant_stream(0, bits),
            Stub::Constant1 => constant_stream(1, bits),
            Stub::Alternating => alternating_stream(bits),
        }),
        None => {
            let key_hex = key_hex
                .ok_or_else(|| Failure::Usage("--key is required unless --stub is given".into()))?;
            run_battery(&parse_key(key_hex)?, &config, &tests)
        }
    }
    .map_err(usage)?;
    print!("{report}");
    if report.all_pass {
        Ok(())
    } else {
        Err(Failure::Claim(
            "a pass proportion fell outside the acceptance interval".into(),
        ))
    }
}
