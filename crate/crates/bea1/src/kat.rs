//! Known-answer-test records: a text format of (key, plaintext, ciphertext)
//! triples, a seeded deterministic generator, and verification.
//!
//! File format: one record per paragraph, paragraphs separated by blank
//! lines. Each record is three lines, in order:
//!
//! ```text
//! KEY=<30 uppercase hex digits>
//! PT=<20 uppercase hex digits>
//! CT=<20 uppercase hex digits>
//! ```

use rand::RngCore;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use thiserror::Error;

use crate::bundles::{Block, HexError, MasterKey};
use crate::cipher::KeySchedule;

/// Seed used for the repository's pinned KAT file.
pub const DEFAULT_SEED: u64 = 0xBEA1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KatRecord {
    pub key: MasterKey,
    pub pt: Block,
    pub ct: Block,
}

/// Malformed KAT text.
#[derive(Debug, Error)]
pub enum KatParseError {
    #[error("record {index}: expected 3 lines (KEY=, PT=, CT=), got {got}")]
    BadShape { index: usize, got: usize },
    #[error("record {index}: expected line starting with {want:?}")]
    BadField { index: usize, want: &'static str },
    #[error("record {index}, {field}: {source}")]
    BadHex {
        index: usize,
        field: &'static str,
        source: HexError,
    },
}

/// A record whose ciphertext does not match a fresh encryption.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("record {index}: expected ciphertext {expected}, computed {computed}")]
pub struct KatMismatch {
    pub index: usize,
    pub expected: Block,
    pub computed: Block,
}

/// Generates `count` records from a seeded deterministic stream: each record
/// draws 15 key bytes then 10 plaintext bytes from ChaCha20 seeded with
/// `seed`, and encrypts. Fixed for all time so pinned files can be
/// regenerated bit-identically.
pub fn generate(count: usize, seed: u64) -> Vec<KatRecord> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let mut key_bytes = [0u8; 15];
        rng.fill_bytes(&mut key_bytes);
        let mut pt_bytes = [0u8; 10];
        rng.fill_bytes(&mut pt_bytes);
        let key = MasterKey::from_bytes(&key_bytes);
        let pt = Block::from_bytes(&pt_bytes);
        let ct = KeySchedule::new(&key).encrypt(pt);
        out.push(KatRecord { key, pt, ct });
    }
    out
}

pub fn to_text(records: &[KatRecord]) -> String {
    let mut out = String::new();
    for (i, r) in records.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        out.push_str(&format!(
            "KEY={}\nPT={}\nCT={}\n",
            r.key.to_hex(),
            r.pt.to_hex(),
            r.ct.to_hex()
        ));
    }
    out
}

fn field<'a>(line: &'a str, want: &'static str, index: usize) -> Result<&'a str, KatParseError> {
    line.strip_prefix(want)
        .ok_or(KatParseError::BadField { index, want })
}

pub fn parse(text: &str) -> Result<Vec<KatRecord>, KatParseError> {
    let mut out = Vec::new();
    for chunk in text.split("\n\n") {
        let lines: Vec<&str> = chunk.lines().filter(|l| !l.trim().is_empty()).collect();
        if lines.is_empty() {
            continue;
        }
        let index = out.len();
        if lines.len() != 3 {
            return Err(KatParseError::BadShape {
                index,
                got: lines.len(),
            });
        }
        let key_hex = field(lines[0], "KEY=", index)?;
        let pt_hex = field(lines[1], "PT=", index)?;
        let ct_hex = field(lines[2], "CT=", index)?;
        let bad_hex = |field: &'static str| {
            move |source| KatParseError::BadHex {
                index,
                field,
                source,
            }
        };
        out.push(KatRecord {
            key: MasterKey::from_hex(key_hex).map_err(bad_hex("KEY"))?,
            pt: Block::from_hex(pt_hex).map_err(bad_hex("PT"))?,
            ct: Block::from_hex(ct_hex).map_err(bad_hex("CT"))?,
        });
    }
    Ok(out)
}

/// Re-encrypts every record and reports the first mismatch.
pub fn verify(records: &[KatRecord]) -> Result<(), KatMismatch> {
    for (index, r) in records.iter().enumerate() {
        let computed = KeySchedule::new(&r.key).encrypt(r.pt);
        if computed != r.ct {
            return Err(KatMismatch {
                index,
                expected: r.ct,
                computed,
            });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generate_is_deterministic_and_verifies() {
        let a = generate(20, DEFAULT_SEED);
        let b = generate(20, DEFAULT_SEED);
        assert_eq!(a, b);
        verify(&a).unwrap();
        // a different seed gives different records
        let c = generate(20, DEFAULT_SEED + 1);
        assert_ne!(a, c);
    }

    #[test]
    fn text_round_trip() {
        let records = generate(5, 7);
        let text = to_text(&records);
        assert_eq!(parse(&text).unwrap(), records);
        // shape spot checks: 3 lines per record plus separators
        assert_eq!(text.lines().count(), 5 * 3 + 4);
        assert!(text.starts_with("KEY="));
        assert!(text.ends_with("\n"));
    }

    #[test]
    fn parse_tolerates_extra_blank_lines() {
        let records = generate(3, 9);
        let text = to_text(&records).replace("\n\n", "\n\n\n");
        assert_eq!(parse(&(text + "\n\n")).unwrap(), records);
    }

    #[test]
    fn corrupted_ciphertext_is_caught() {
        let mut records = generate(10, 11);
        records[4].ct[0] ^= crate::bundles::Bundle::new(1);
        let err = verify(&records).unwrap_err();
        assert_eq!(err.index, 4);
    }

    #[test]
    fn parse_rejects_malformed_records() {
        assert!(matches!(
            parse("KEY=00\nPT=00\n"),
            Err(KatParseError::BadShape { .. })
        ));
        let good = to_text(&generate(1, 1));
        let swapped = good.replace("PT=", "XX=");
        assert!(matches!(
            parse(&swapped),
            Err(KatParseError::BadField { want: "PT=", .. })
        ));
        let bad_hex =
            "KEY=ZZ0102030405060708090A0B0C0D\nPT=00112233445566778899\nCT=00112233445566778899\n";
        assert!(matches!(
            parse(bad_hex),
            Err(KatParseError::BadHex { field: "KEY", .. })
        ));
    }
}
