//! Keystream bit sources and a four-test statistical battery: monobit, block
//! frequency, runs, and cumulative sums, with the standard acceptance
//! interval over many sequences. Each test is a [`StatTest`] trait object, so
//! further tests slot into the same battery.

use std::f64::consts::SQRT_2;
use std::fmt;

use statrs::function::erf::erfc;
use statrs::function::gamma::gamma_ur;
use thiserror::Error;

use crate::bundles::{Block, MasterKey};
use crate::cipher::{counter_block, KeySchedule};

/// Significance level: a test passes when its p-value reaches this.
pub const ALPHA: f64 = 0.01;

/// A 0/1 sequence together with a note on where it came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitStream {
    bits: Vec<u8>,
    origin: String,
}

impl BitStream {
    /// Panics if any element is not 0 or 1.
    pub fn from_bits(origin: impl Into<String>, bits: Vec<u8>) -> Self {
        assert!(bits.iter().all(|&b| b <= 1), "bits must be 0 or 1");
        BitStream {
            bits,
            origin: origin.into(),
        }
    }

    /// All bits of `bytes`, most significant first within each byte.
    pub fn from_bytes(origin: impl Into<String>, bytes: &[u8]) -> Self {
        let bits = bytes
            .iter()
            .flat_map(|&byte| (0..8).rev().map(move |t| byte >> t & 1))
            .collect();
        BitStream {
            bits,
            origin: origin.into(),
        }
    }

    /// Parses a string of '0' and '1' characters. Panics on anything else.
    pub fn from_bit_string(origin: impl Into<String>, s: &str) -> Self {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => 0,
                '1' => 1,
                other => panic!("bit strings hold only 0 and 1, got {other:?}"),
            })
            .collect();
        BitStream {
            bits,
            origin: origin.into(),
        }
    }

    pub fn bit(&self, i: usize) -> u8 {
        self.bits[i]
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b == 1).count()
    }

    pub fn origin(&self) -> &str {
        &self.origin
    }
}

/// The first `n_bits` of the CTR keystream for (key, iv): packed ciphertexts
/// of the counter blocks iv, iv+1, iv+2, ...
pub fn generate_stream(key: &MasterKey, iv: Block, n_bits: usize) -> BitStream {
    assert!(n_bits >= 1, "an empty stream has no tests to run");
    let ks = KeySchedule::new(key);
    let blocks = n_bits.div_ceil(80);
    let mut bytes = Vec::with_capacity(blocks * 10);
    for i in 0..blocks {
        bytes.extend_from_slice(&ks.encrypt(counter_block(iv, i as u64)).to_bytes());
    }
    let origin = format!(
        "ctr keystream key={} iv={} bits={n_bits}",
        key.to_hex(),
        iv.to_hex()
    );
    let mut stream = BitStream::from_bytes(origin, &bytes);
    stream.bits.truncate(n_bits);
    stream
}

/// The constant stream b, b, b, ... (a degenerate cipher stand-in).
pub fn constant_stream(bit: u8, n_bits: usize) -> BitStream {
    assert!(bit <= 1, "bits must be 0 or 1");
    BitStream::from_bits(format!("constant {bit} bits={n_bits}"), vec![bit; n_bits])
}

/// The stream 0, 1, 0, 1, ... (balanced but maximally structured).
pub fn alternating_stream(n_bits: usize) -> BitStream {
    BitStream::from_bits(
        format!("alternating bits={n_bits}"),
        (0..n_bits).map(|i| (i & 1) as u8).collect(),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    /// A prerequisite failed, so the test says nothing about the stream.
    NotApplicable,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::NotApplicable => "NOT APPLICABLE",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestResult {
    pub test_name: &'static str,
    /// None when the verdict is NotApplicable.
    pub p_value: Option<f64>,
    pub verdict: Verdict,
}

impl TestResult {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("{test} needs at least {min} bits, stream has {got}")]
pub struct TooShort {
    pub test: &'static str,
    pub min: usize,
    pub got: usize,
}

/// One statistical test. Implementations provide the p-value computation;
/// the length gate and the pass verdict come from the default methods.
pub trait StatTest {
    fn name(&self) -> &'static str;

    /// Shortest stream `run` accepts.
    fn min_bits(&self) -> usize;

    /// The p-value with no length gate, or None when a prerequisite makes
    /// the test inapplicable. Callers wanting the gate use `run`.
    fn p_value(&self, s: &BitStream) -> Option<f64>;

    fn run(&self, s: &BitStream) -> Result<TestResult, TooShort> {
        self.run_at(s, ALPHA)
    }

    fn run_at(&self, s: &BitStream, alpha: f64) -> Result<TestResult, TooShort> {
        if s.len() < self.min_bits() {
            return Err(TooShort {
                test: self.name(),
                min: self.min_bits(),
                got: s.len(),
            });
        }
        Ok(match self.p_value(s) {
            Some(p) => TestResult {
                test_name: self.name(),
                p_value: Some(p),
                verdict: if p >= alpha {
                    Verdict::Pass
                } else {
                    Verdict::Fail
                },
            },
            None => TestResult {
                test_name: self.name(),
                p_value: None,
                verdict: Verdict::NotApplicable,
            },
        })
    }
}

/// Frequency test: p = erfc(|S_n| / sqrt(2n)) for the +/-1 sum S_n.
pub struct MonobitTest;

impl StatTest for MonobitTest {
    fn name(&self) -> &'static str {
        "monobit"
    }

    fn min_bits(&self) -> usize {
        100
    }

    fn p_value(&self, s: &BitStream) -> Option<f64> {
        if s.is_empty() {
            return None;
        }
        let n = s.len() as f64;
        let sum = 2.0 * s.ones() as f64 - n;
        Some(erfc(sum.abs() / (2.0 * n).sqrt()))
    }
}

/// Within-block frequency test: chi-square 4M * sum of (pi_i - 1/2)^2 over
/// the N = floor(n/M) blocks, p = igamc(N/2, chi^2/2). Trailing bits short
/// of a block are discarded.
pub struct BlockFrequencyTest {
    pub block_len: usize,
}

impl Default for BlockFrequencyTest {
    fn default() -> Self {
        BlockFrequencyTest { block_len: 128 }
    }
}

impl StatTest for BlockFrequencyTest {
    fn name(&self) -> &'static str {
        "block-frequency"
    }

    fn min_bits(&self) -> usize {
        self.block_len
    }

    fn p_value(&self, s: &BitStream) -> Option<f64> {
        let m = self.block_len;
        let n_blocks = s.len() / m;
        if n_blocks == 0 {
            return None;
        }
        let mut chi2 = 0.0;
        for block in s.bits().chunks_exact(m) {
            let ones = block.iter().filter(|&&b| b == 1).count();
            let pi = ones as f64 / m as f64;
            chi2 += (pi - 0.5) * (pi - 0.5);
        }
        chi2 *= 4.0 * m as f64;
        if chi2 == 0.0 {
            return Some(1.0);
        }
        Some(gamma_ur(n_blocks as f64 / 2.0, chi2 / 2.0))
    }
}

/// Runs test: compares the count of maximal runs against its expectation.
/// Inapplicable when the bit frequency is too far from 1/2 for the normal
/// approximation (|pi - 1/2| >= 2/sqrt(n)).
pub struct RunsTest;

impl StatTest for RunsTest {
    fn name(&self) -> &'static str {
        "runs"
    }

    fn min_bits(&self) -> usize {
        100
    }

    fn p_value(&self, s: &BitStream) -> Option<f64> {
        if s.is_empty() {
            return None;
        }
        let n = s.len() as f64;
        let pi = s.ones() as f64 / n;
        if (pi - 0.5).abs() >= 2.0 / n.sqrt() {
            return None;
        }
        let v = 1 + (1..s.len()).filter(|&k| s.bit(k) != s.bit(k - 1)).count();
        let expected = 2.0 * n * pi * (1.0 - pi);
        let denom = 2.0 * (2.0 * n).sqrt() * pi * (1.0 - pi);
        Some(erfc((v as f64 - expected).abs() / denom))
    }
}

/// Cumulative-sums test, forward mode: the maximum excursion z of the
/// partial +/-1 sums, with the two-sided random-walk tail probability. The
/// summation bounds use integer division truncated toward zero.
pub struct CusumTest;

impl StatTest for CusumTest {
    fn name(&self) -> &'static str {
        "cusum"
    }

    fn min_bits(&self) -> usize {
        100
    }

    fn p_value(&self, s: &BitStream) -> Option<f64> {
        if s.is_empty() {
            return None;
        }
        let n = s.len() as i64;
        let mut sum = 0i64;
        let mut z = 0i64;
        for i in 0..s.len() {
            sum += if s.bit(i) == 1 { 1 } else { -1 };
            z = z.max(sum.abs());
        }
        let phi = |x: f64| 0.5 * erfc(-x / SQRT_2);
        let root_n = (n as f64).sqrt();
        let zf = z as f64;
        let nz = n / z;
        let mut p = 1.0;
        for k in (-nz + 1) / 4..=(nz - 1) / 4 {
            let kf = k as f64;
            p -= phi((4.0 * kf + 1.0) * zf / root_n) - phi((4.0 * kf - 1.0) * zf / root_n);
        }
        for k in (-nz - 3) / 4..=(nz - 1) / 4 {
            let kf = k as f64;
            p += phi((4.0 * kf + 3.0) * zf / root_n) - phi((4.0 * kf + 1.0) * zf / root_n);
        }
        Some(p.clamp(0.0, 1.0))
    }
}

pub fn monobit_test(s: &BitStream) -> Result<TestResult, TooShort> {
    MonobitTest.run(s)
}

pub fn block_frequency_test(s: &BitStream, block_len: usize) -> Result<TestResult, TooShort> {
    BlockFrequencyTest { block_len }.run(s)
}

pub fn runs_test(s: &BitStream) -> Result<TestResult, TooShort> {
    RunsTest.run(s)
}

pub fn cusum_test(s: &BitStream) -> Result<TestResult, TooShort> {
    CusumTest.run(s)
}

/// The four tests in reporting order.
pub fn default_battery() -> Vec<Box<dyn StatTest>> {
    vec![
        Box::new(MonobitTest),
        Box::new(BlockFrequencyTest::default()),
        Box::new(RunsTest),
        Box::new(CusumTest),
    ]
}

/// Looks a test up by its reporting name.
pub fn test_by_name(name: &str) -> Option<Box<dyn StatTest>> {
    match name {
        "monobit" => Some(Box::new(MonobitTest)),
        "block-frequency" => Some(Box::new(BlockFrequencyTest::default())),
        "runs" => Some(Box::new(RunsTest)),
        "cusum" => Some(Box::new(CusumTest)),
        _ => None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatteryConfig {
    pub n_sequences: usize,
    pub bits_per_sequence: usize,
    pub alpha: f64,
    /// Center of the acceptance interval for per-test pass proportions.
    pub nominal_pass_rate: f64,
}

impl Default for BatteryConfig {
    fn default() -> Self {
        BatteryConfig {
            n_sequences: 50,
            bits_per_sequence: 100_000,
            alpha: ALPHA,
            nominal_pass_rate: 0.99,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SequenceResults {
    pub sequence: usize,
    pub results: Vec<TestResult>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestSummary {
    pub test_name: &'static str,
    /// Sequences with a Pass verdict; NotApplicable counts against.
    pub passed: usize,
    pub total: usize,
    pub proportion: f64,
    /// nominal +/- 3 sqrt(nominal (1 - nominal) / n).
    pub interval: (f64, f64),
    pub in_interval: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatteryReport {
    pub per_sequence: Vec<SequenceResults>,
    pub summaries: Vec<TestSummary>,
    /// True when every test's pass proportion lies in its interval.
    pub all_pass: bool,
}

impl fmt::Display for BatteryReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for seq in &self.per_sequence {
            for r in &seq.results {
                match r.p_value {
                    Some(p) => writeln!(
                        f,
                        "seq {:>4} {:<16} p={:.6} {}",
                        seq.sequence, r.test_name, p, r.verdict
                    )?,
                    None => writeln!(
                        f,
                        "seq {:>4} {:<16} p=n/a      {}",
                        seq.sequence, r.test_name, r.verdict
                    )?,
                }
            }
        }
        writeln!(f)?;
        writeln!(
            f,
            "{:<16} {:>7} {:>11} {:>20} verdict",
            "test", "passed", "proportion", "interval"
        )?;
        for s in &self.summaries {
            writeln!(
                f,
                "{:<16} {:>7} {:>11.4} {:>20} {}",
                s.test_name,
                format!("{}/{}", s.passed, s.total),
                s.proportion,
                format!("[{:.4}, {:.4}]", s.interval.0, s.interval.1),
                if s.in_interval { "PASS" } else { "FAIL" }
            )?;
        }
        Ok(())
    }
}

/// Runs `tests` against one stream per sequence index, then checks each
/// test's pass proportion against the acceptance interval.
pub fn run_battery_with<F>(
    config: &BatteryConfig,
    tests: &[Box<dyn StatTest>],
    mut stream_for: F,
) -> Result<BatteryReport, TooShort>
where
    F: FnMut(usize) -> BitStream,
{
    assert!(config.n_sequences >= 1, "a battery needs sequences");
    let mut per_sequence = Vec::with_capacity(config.n_sequences);
    let mut pass_counts = vec![0usize; tests.len()];
    for sequence in 0..config.n_sequences {
        let stream = stream_for(sequence);
        let mut results = Vec::with_capacity(tests.len());
        for (t, test) in tests.iter().enumerate() {
            let result = test.run_at(&stream, config.alpha)?;
            if result.passed() {
                pass_counts[t] += 1;
            }
            results.push(result);
        }
        per_sequence.push(SequenceResults { sequence, results });
    }
    let n = config.n_sequences as f64;
    let margin = 3.0 * (config.nominal_pass_rate * (1.0 - config.nominal_pass_rate) / n).sqrt();
    let interval = (
        config.nominal_pass_rate - margin,
        config.nominal_pass_rate + margin,
    );
    let summaries: Vec<TestSummary> = tests
        .iter()
        .zip(&pass_counts)
        .map(|(test, &passed)| {
            let proportion = passed as f64 / n;
            TestSummary {
                test_name: test.name(),
                passed,
                total: config.n_sequences,
                proportion,
                interval,
                in_interval: (interval.0..=interval.1).contains(&proportion),
            }
        })
        .collect();
    let all_pass = summaries.iter().all(|s| s.in_interval);
    Ok(BatteryReport {
        per_sequence,
        summaries,
        all_pass,
    })
}

/// The standard battery: sequence i is the CTR keystream with IV = i.
pub fn run_battery(
    key: &MasterKey,
    config: &BatteryConfig,
    tests: &[Box<dyn StatTest>],
) -> Result<BatteryReport, TooShort> {
    run_battery_with(config, tests, |sequence| {
        let iv = counter_block(Block::from_bytes(&[0; 10]), sequence as u64);
        generate_stream(key, iv, config.bits_per_sequence)
    })
}
