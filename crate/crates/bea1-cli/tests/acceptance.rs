//! One test per acceptance criterion. Each prints a PASS line with its
//! runtime and enforces the criterion's time budget.

use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use bea1::analysis::{
    branch_number_exhaustive, branch_number_submatrix, compute_ddt, compute_lat, min_active_sboxes,
    trail_bounds,
};
use bea1::bundles::{Block, Bundle, MasterKey};
use bea1::cipher::KeySchedule;
use bea1::kat;
use bea1::randtest::{
    alternating_stream, constant_stream, default_battery, run_battery, run_battery_with,
    BatteryConfig, BitStream, BlockFrequencyTest, CusumTest, MonobitTest, RunsTest, StatTest,
};
use bea1::tables::Tables;

const KAT_TEXT: &str = include_str!("../../bea1/tests/data/bea1_kat_100.txt");

const PI100: &str = "1100100100001111110110101010001000100001011010001100\
                     001000110100110001001100011001100010100010111000";

fn finish(criterion: u32, label: &str, started: Instant, budget: Duration) {
    let elapsed = started.elapsed();
    assert!(
        elapsed < budget,
        "criterion {criterion} took {elapsed:?}, budget {budget:?}"
    );
    println!("ACCEPTANCE {criterion} {label} ... PASS ({elapsed:?})");
}

#[test]
fn criterion_1_table_integrity() {
    let started = Instant::now();
    let tables = Tables::get();
    for (i, sbox) in tables.sboxes.iter().enumerate() {
        let mut seen = [false; 1024];
        for x in 0..1024u16 {
            seen[sbox.apply(Bundle::new(x)).value() as usize] = true;
        }
        assert!(seen.iter().all(|&s| s), "S{i} is not a permutation");
    }
    for pos in 0..4 {
        for t in 0..10 {
            let mut basis = [Bundle::new(0); 4];
            basis[pos] = Bundle::new(1 << t);
            assert_eq!(tables.mix_inv.apply(tables.mix.apply(basis)), basis);
            assert_eq!(tables.mix.apply(tables.mix_inv.apply(basis)), basis);
        }
    }
    finish(1, "table integrity", started, Duration::from_secs(1));
}

#[test]
fn criterion_2_cipher_correctness() {
    let started = Instant::now();
    let mut rng = StdRng::seed_from_u64(0x0AC2);
    for _ in 0..10_000 {
        let mut key_bytes = [0u8; 15];
        let mut pt_bytes = [0u8; 10];
        rng.fill(&mut key_bytes);
        rng.fill(&mut pt_bytes);
        let ks = KeySchedule::new(&MasterKey::from_bytes(&key_bytes));
        let pt = Block::from_bytes(&pt_bytes);
        assert_eq!(ks.decrypt(ks.encrypt(pt)), pt);
    }
    let records = kat::parse(KAT_TEXT).unwrap();
    assert_eq!(records.len(), 100);
    kat::verify(&records).unwrap();
    assert_eq!(
        kat::to_text(&kat::generate(100, kat::DEFAULT_SEED)),
        KAT_TEXT
    );
    finish(2, "cipher correctness", started, Duration::from_secs(5));
}

#[test]
fn criterion_3_sbox_uniformities() {
    let started = Instant::now();
    for (i, sbox) in Tables::get().sboxes.iter().enumerate() {
        let ddt = compute_ddt(sbox);
        assert!(
            ddt.max_nontrivial <= 40,
            "S{i} DDT max {}",
            ddt.max_nontrivial
        );
        let lat = compute_lat(sbox);
        assert!(
            lat.max_nontrivial <= 128,
            "S{i} LAT max {}",
            lat.max_nontrivial
        );
    }
    finish(3, "S-box uniformities", started, Duration::from_secs(10));
}

#[test]
fn criterion_4_branch_numbers() {
    let started = Instant::now();
    let tables = Tables::get();
    let report = branch_number_submatrix(&tables.mix.as_binary_matrix());
    assert_eq!(report.differential, 5);
    assert_eq!(report.linear, 5);
    let scan = branch_number_exhaustive(&tables.mix, 2);
    assert_eq!(scan.cases, 4092 + 6 * 1023 * 1023);
    assert_eq!(
        scan.min_output_weight_by_input[0], 4,
        "every weight-1 input must reach output weight 4"
    );
    assert!(scan.min_output_weight_by_input[1] >= 3);
    assert!(scan.min_total_weight >= 5);
    finish(4, "branch numbers", started, Duration::from_secs(30));
}

#[test]
fn criterion_5_trail_bounds() {
    let started = Instant::now();
    assert_eq!(min_active_sboxes(10, 5), 25);
    let bound = trail_bounds(25, 40, 128).unwrap();
    assert!((-117.0..=-116.9).contains(&bound.log2_prob_bound));
    assert_eq!(bound.log2_bias_bound, -50.0);
    finish(5, "trail bounds", started, Duration::from_secs(1));
}

#[test]
fn criterion_6_statistical_battery() {
    let started = Instant::now();

    let near = |p: Option<f64>, want: f64| {
        let p = p.expect("worked example is applicable");
        assert!((p - want).abs() < 5e-5, "got {p}, want {want}");
    };
    near(
        MonobitTest.p_value(&BitStream::from_bit_string("", "1011010101")),
        0.527089,
    );
    near(
        MonobitTest.p_value(&BitStream::from_bit_string("", PI100)),
        0.109599,
    );
    near(
        BlockFrequencyTest { block_len: 3 }.p_value(&BitStream::from_bit_string("", "0110011010")),
        0.801252,
    );
    near(
        BlockFrequencyTest { block_len: 10 }.p_value(&BitStream::from_bit_string("", PI100)),
        0.706438,
    );
    near(
        RunsTest.p_value(&BitStream::from_bit_string("", "1001101011")),
        0.147232,
    );
    near(
        RunsTest.p_value(&BitStream::from_bit_string("", PI100)),
        0.500798,
    );
    near(
        CusumTest.p_value(&BitStream::from_bit_string("", "1011010111")),
        0.4116588,
    );
    near(
        CusumTest.p_value(&BitStream::from_bit_string("", PI100)),
        0.219194,
    );

    let config = BatteryConfig::default();
    let tests = default_battery();
    let keys = [
        MasterKey::from_bytes(&[0x00; 15]),
        MasterKey::from_bytes(&[
            0x00, 0x01, 0x02, 0x03, 0x04, 0x05, 0x06, 0x07, 0x08, 0x09, 0x0A, 0x0B, 0x0C, 0x0D,
            0x0E,
        ]),
        MasterKey::from_bytes(&[0xFF; 15]),
    ];
    for key in keys {
        let report = run_battery(&key, &config, &tests).unwrap();
        assert!(report.all_pass, "key {}:\n{report}", key.to_hex());
    }

    let negative_controls: [Box<dyn Fn(usize) -> BitStream>; 3] = [
        Box::new(|_| constant_stream(0, 100_000)),
        Box::new(|_| constant_stream(1, 100_000)),
        Box::new(|_| alternating_stream(100_000)),
    ];
    for control in negative_controls {
        let report = run_battery_with(&config, &tests, control).unwrap();
        assert!(!report.all_pass, "negative control must fail");
    }

    finish(6, "statistical battery", started, Duration::from_secs(60));
}

#[test]
fn criterion_7_avalanche() {
    let started = Instant::now();
    let mut rng = StdRng::seed_from_u64(0x0AC7);
    let mut total_flips = 0u64;
    const TRIALS: u64 = 1000;
    for _ in 0..TRIALS {
        let mut key_bytes = [0u8; 15];
        let mut pt_bytes = [0u8; 10];
        rng.fill(&mut key_bytes);
        rng.fill(&mut pt_bytes);
        let ks = KeySchedule::new(&MasterKey::from_bytes(&key_bytes));
        let ct = ks.encrypt(Block::from_bytes(&pt_bytes));
        let bit = rng.gen_range(0..80);
        let mut flipped = pt_bytes;
        flipped[bit / 8] ^= 0x80 >> (bit % 8);
        let ct_flipped = ks.encrypt(Block::from_bytes(&flipped));
        total_flips += ct
            .to_bytes()
            .iter()
            .zip(ct_flipped.to_bytes())
            .map(|(a, b)| (a ^ b).count_ones() as u64)
            .sum::<u64>();
    }
    let mean = total_flips as f64 / TRIALS as f64;
    assert!(
        (36.0..=44.0).contains(&mean),
        "mean ciphertext flips {mean} of 80"
    );
    finish(7, "avalanche sanity", started, Duration::from_secs(5));
}

#[test]
fn criterion_8_ctr_file_round_trip() {
    let started = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let plain = dir.path().join("plain.bin");
    let sealed = dir.path().join("sealed.bea1");
    let opened = dir.path().join("opened.bin");

    let mut rng = StdRng::seed_from_u64(0x0AC8);
    let mut data = vec![0u8; 1 << 20];
    rng.fill(&mut data[..]);
    std::fs::write(&plain, &data).unwrap();

    let key = "0123456789ABCDEF0123456789ABCD";
    let iv = "00112233445566778899";
    let run = |args: &[&str]| {
        let output = std::process::Command::new(env!("CARGO_BIN_EXE_bea1"))
            .args(args)
            .output()
            .unwrap();
        assert!(output.status.success(), "{args:?}: {output:?}");
    };
    run(&[
        "encrypt",
        "--key",
        key,
        "--iv",
        iv,
        plain.to_str().unwrap(),
        sealed.to_str().unwrap(),
    ]);
    run(&[
        "decrypt",
        "--key",
        key,
        sealed.to_str().unwrap(),
        opened.to_str().unwrap(),
    ]);

    assert_eq!(std::fs::read(&opened).unwrap(), data);
    let sealed_bytes = std::fs::read(&sealed).unwrap();
    assert_eq!(sealed_bytes.len(), 16 + data.len());
    let mut header = Vec::from(*b"BEA1");
    header.extend([0x01, 0x01]);
    header.extend([0x00, 0x11, 0x22, 0x33, 0x44, 0x55, 0x66, 0x77, 0x88, 0x99]);
    assert_eq!(&sealed_bytes[..16], &header[..], "header must be bit-exact");
    finish(8, "CTR file round trip", started, Duration::from_secs(5));
}
