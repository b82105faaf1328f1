//! The BEA-1 primitive: key expansion, block encryption and decryption, a
//! CTR mode for arbitrary-length data, and the encrypted-file header.
//!
//! The cipher is an SPN on 8 bundles. Encryption runs ten full rounds of
//! AddRoundKey, SubBundles, ShiftRows, MixColumns, then a short final round
//! (AddRoundKey, SubBundles, ShiftRows, AddRoundKey) using round keys k10
//! and k11. Decryption undoes each stage in reverse order.

use thiserror::Error;

use crate::bundles::{Block, Bundle, MasterKey, RoundKey, BLOCK_BYTES};
use crate::tables::Tables;

/// Number of full rounds before the short final round.
pub const FULL_ROUNDS: usize = 10;
/// Round keys consumed by one encryption (ten full rounds plus two).
pub const ROUND_KEYS: usize = 12;

/// The ShiftRows reorder: output bundle i is input bundle SHIFT_ROWS[i].
/// Applying it twice gives the identity, so it serves both directions.
pub const SHIFT_ROWS: [usize; 8] = [0, 5, 2, 7, 4, 1, 6, 3];

/// The constant mixed into key expansion iteration i: 3^i mod 2^10 as a
/// plain integer power.
pub fn round_constant(i: u32) -> Bundle {
    let mut v: u32 = 1;
    for _ in 0..i {
        v = v * 3 % 1024;
    }
    Bundle::new(v as u16)
}

/// The twelve round keys expanded from a master key, computed once per key
/// and reused across blocks.
pub struct KeySchedule {
    round_keys: [RoundKey; ROUND_KEYS],
}

impl KeySchedule {
    /// Expands the master key. The 120 key bits seed a flat sequence of 96
    /// bundles k0..k95: k0..k11 are the master key itself, and each of seven
    /// iterations mixes the previous twelve bundles into twelve new ones
    /// (MixColumns and the S-boxes over the last four, a round constant,
    /// then three chained XOR rows). Round key r is k(8r)..k(8r+7).
    pub fn new(key: &MasterKey) -> Self {
        let tables = Tables::get();
        let mut k = [Bundle::default(); 96];
        k[..12].copy_from_slice(key.bundles());
        for i in 0..7 {
            let base = 12 * i;
            let mut x = tables
                .mix
                .apply([k[base + 8], k[base + 9], k[base + 10], k[base + 11]]);
            for (j, xj) in x.iter_mut().enumerate() {
                *xj = tables.sboxes[j].apply(*xj);
            }
            x[0] ^= round_constant(i as u32);
            for j in 0..4 {
                k[base + 12 + j] = k[base + j] ^ x[j];
            }
            for j in 0..4 {
                k[base + 16 + j] = k[base + 4 + j] ^ k[base + 12 + j];
            }
            for j in 0..4 {
                k[base + 20 + j] = k[base + 8 + j] ^ k[base + 16 + j];
            }
        }
        let mut round_keys = [RoundKey::default(); ROUND_KEYS];
        for (r, rk) in round_keys.iter_mut().enumerate() {
            let mut bundles = [Bundle::default(); 8];
            bundles.copy_from_slice(&k[8 * r..8 * r + 8]);
            *rk = RoundKey::from_bundles(bundles);
        }
        KeySchedule { round_keys }
    }

    pub fn round_key(&self, r: usize) -> &RoundKey {
        &self.round_keys[r]
    }

    pub fn round_keys(&self) -> &[RoundKey; ROUND_KEYS] {
        &self.round_keys
    }

    pub fn encrypt(&self, p: Block) -> Block {
        let tables = Tables::get();
        let mut x = p;
        for r in 0..FULL_ROUNDS {
            x = add_round_key(x, &self.round_keys[r]);
            x = sub_bundles(x, tables);
            x = shift_rows(x);
            x = mix_columns(x, tables);
        }
        x = add_round_key(x, &self.round_keys[10]);
        x = sub_bundles(x, tables);
        x = shift_rows(x);
        add_round_key(x, &self.round_keys[11])
    }

    pub fn decrypt(&self, c: Block) -> Block {
        let tables = Tables::get();
        let mut x = add_round_key(c, &self.round_keys[11]);
        x = shift_rows(x);
        x = sub_bundles_inv(x, tables);
        x = add_round_key(x, &self.round_keys[10]);
        for r in (0..FULL_ROUNDS).rev() {
            x = mix_columns_inv(x, tables);
            x = shift_rows(x);
            x = sub_bundles_inv(x, tables);
            x = add_round_key(x, &self.round_keys[r]);
        }
        x
    }
}

fn add_round_key(mut x: Block, k: &RoundKey) -> Block {
    for i in 0..8 {
        x[i] ^= k[i];
    }
    x
}

fn sub_bundles(mut x: Block, tables: &Tables) -> Block {
    for i in 0..8 {
        x[i] = tables.sbox_for_position(i).apply(x[i]);
    }
    x
}

fn sub_bundles_inv(mut x: Block, tables: &Tables) -> Block {
    for i in 0..8 {
        x[i] = tables.sbox_for_position(i).apply_inv(x[i]);
    }
    x
}

fn shift_rows(x: Block) -> Block {
    let mut out = Block::default();
    for i in 0..8 {
        out[i] = x[SHIFT_ROWS[i]];
    }
    out
}

fn mix_columns(x: Block, tables: &Tables) -> Block {
    let lo = tables.mix.apply([x[0], x[1], x[2], x[3]]);
    let hi = tables.mix.apply([x[4], x[5], x[6], x[7]]);
    Block::from_bundles([lo[0], lo[1], lo[2], lo[3], hi[0], hi[1], hi[2], hi[3]])
}

fn mix_columns_inv(x: Block, tables: &Tables) -> Block {
    let lo = tables.mix_inv.apply([x[0], x[1], x[2], x[3]]);
    let hi = tables.mix_inv.apply([x[4], x[5], x[6], x[7]]);
    Block::from_bundles([lo[0], lo[1], lo[2], lo[3], hi[0], hi[1], hi[2], hi[3]])
}

/// The counter block `offset` positions after `iv`: addition modulo 2^80 on
/// the packed big-endian value, wrapping around.
pub fn counter_block(iv: Block, offset: u64) -> Block {
    let mut buf = [0u8; 16];
    buf[16 - BLOCK_BYTES..].copy_from_slice(&iv.to_bytes());
    let v = (u128::from_be_bytes(buf) + offset as u128) & ((1u128 << 80) - 1);
    let bytes = v.to_be_bytes();
    Block::from_bytes(bytes[16 - BLOCK_BYTES..].try_into().expect("10 bytes"))
}

/// CTR keystream XOR: block i of the keystream is encrypt(iv + i), and the
/// output is `data` XORed with as much keystream as it needs. Running the
/// same call on its own output restores the original bytes.
pub fn ctr_transform(ks: &KeySchedule, iv: Block, data: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(data.len());
    for (i, chunk) in data.chunks(BLOCK_BYTES).enumerate() {
        let keystream = ks.encrypt(counter_block(iv, i as u64)).to_bytes();
        out.extend(chunk.iter().zip(keystream.iter()).map(|(d, k)| d ^ k));
    }
    out
}

pub const FILE_MAGIC: [u8; 4] = *b"BEA1";
pub const FILE_VERSION: u8 = 0x01;
pub const FILE_MODE_CTR: u8 = 0x01;
/// Header length: magic + version + mode + IV.
pub const FILE_HEADER_LEN: usize = 4 + 1 + 1 + BLOCK_BYTES;

/// Malformed encrypted-file input.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormatError {
    #[error("input too short for a file header ({0} of {FILE_HEADER_LEN} bytes)")]
    Truncated(usize),
    #[error("bad magic bytes (not a BEA1 file)")]
    BadMagic,
    #[error("unsupported format version {0:#04x}")]
    BadVersion(u8),
    #[error("unsupported mode byte {0:#04x}")]
    BadMode(u8),
}

/// Header of an encrypted file: magic "BEA1", version and mode bytes, then
/// the 10-byte IV. Ciphertext follows immediately.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FileHeader {
    pub iv: Block,
}

impl FileHeader {
    pub fn to_bytes(&self) -> [u8; FILE_HEADER_LEN] {
        let mut out = [0u8; FILE_HEADER_LEN];
        out[..4].copy_from_slice(&FILE_MAGIC);
        out[4] = FILE_VERSION;
        out[5] = FILE_MODE_CTR;
        out[6..].copy_from_slice(&self.iv.to_bytes());
        out
    }

    /// Splits `data` into its parsed header and the ciphertext payload.
    pub fn parse(data: &[u8]) -> Result<(FileHeader, &[u8]), FormatError> {
        if data.len() < FILE_HEADER_LEN {
            return Err(FormatError::Truncated(data.len()));
        }
        if data[..4] != FILE_MAGIC {
            return Err(FormatError::BadMagic);
        }
        if data[4] != FILE_VERSION {
            return Err(FormatError::BadVersion(data[4]));
        }
        if data[5] != FILE_MODE_CTR {
            return Err(FormatError::BadMode(data[5]));
        }
        let iv = Block::from_bytes(data[6..FILE_HEADER_LEN].try_into().expect("10 bytes"));
        Ok((FileHeader { iv }, &data[FILE_HEADER_LEN..]))
    }
}
