//! The cipher's constant tables: four S-boxes and the mixing layer M with
//! its inverse, embedded from text assets and integrity-checked at load.
//!
//! Asset format: whitespace-separated 3-hex-digit bundles. S-box files list
//! S(0x000)..S(0x3FF) row-major, 16 per line. The mixing-layer files list 40
//! rows of 4 bundles; row 10*j + t is the image of the input that has bit
//! value 2^t in bundle position j and zeros elsewhere (a linear map is fixed
//! by its images of the standard basis).

use once_cell::sync::Lazy;
use thiserror::Error;

use crate::bundles::Bundle;
use crate::gf2::BitMatrix;

const SBOX_TEXT: [&str; 4] = [
    include_str!("../assets/sbox0.txt"),
    include_str!("../assets/sbox1.txt"),
    include_str!("../assets/sbox2.txt"),
    include_str!("../assets/sbox3.txt"),
];
const MIX_TEXT: &str = include_str!("../assets/m.txt");
const MIX_INV_TEXT: &str = include_str!("../assets/minv.txt");

/// Violations detected while loading the embedded tables. Any of these means
/// the transcribed constants are corrupt.
#[derive(Debug, Error)]
pub enum TableError {
    #[error("{table}: bad entry {token:?}: {source}")]
    BadToken {
        table: &'static str,
        token: String,
        source: crate::bundles::HexError,
    },
    #[error("{table}: expected {expected} entries, got {got}")]
    BadCount {
        table: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("{table}: not a permutation (value {value:#05X} appears twice)")]
    NotPermutation { table: &'static str, value: u16 },
    #[error("mixing tables are not mutually inverse at basis vector {index}")]
    NotInverse { index: usize },
}

fn parse_bundles(
    table: &'static str,
    text: &str,
    expected: usize,
) -> Result<Vec<Bundle>, TableError> {
    let mut out = Vec::with_capacity(expected);
    for token in text.split_whitespace() {
        out.push(
            Bundle::from_hex(token).map_err(|source| TableError::BadToken {
                table,
                token: token.to_string(),
                source,
            })?,
        );
    }
    if out.len() != expected {
        return Err(TableError::BadCount {
            table,
            expected,
            got: out.len(),
        });
    }
    Ok(out)
}

/// One S-box: a permutation of the bundle space and its inverse.
///
/// The inverse is computed from the forward table while checking that every
/// value appears exactly once, so a bijective `SBoxTable` is the only kind
/// that can exist.
pub struct SBoxTable {
    forward: Box<[Bundle; 1024]>,
    inverse: Box<[Bundle; 1024]>,
}

impl SBoxTable {
    pub(crate) fn from_values(
        table: &'static str,
        values: Vec<Bundle>,
    ) -> Result<Self, TableError> {
        let forward: Box<[Bundle; 1024]> = values
            .into_boxed_slice()
            .try_into()
            .expect("length checked by parse_bundles");
        let mut inverse = vec![Bundle::default(); 1024].into_boxed_slice();
        let mut seen = [false; 1024];
        for x in 0..1024u16 {
            let y = forward[x as usize].value() as usize;
            if seen[y] {
                return Err(TableError::NotPermutation {
                    table,
                    value: y as u16,
                });
            }
            seen[y] = true;
            inverse[y] = Bundle::new(x);
        }
        Ok(SBoxTable {
            forward,
            inverse: inverse.try_into().expect("fixed length"),
        })
    }

    pub fn apply(&self, x: Bundle) -> Bundle {
        self.forward[x.value() as usize]
    }

    pub fn apply_inv(&self, y: Bundle) -> Bundle {
        self.inverse[y.value() as usize]
    }

    /// The inverse permutation as a table of its own.
    pub fn inverted(&self) -> SBoxTable {
        SBoxTable {
            forward: self.inverse.clone(),
            inverse: self.forward.clone(),
        }
    }
}

/// XOR of two 4-bundle vectors.
pub fn xor4(a: [Bundle; 4], b: [Bundle; 4]) -> [Bundle; 4] {
    [a[0] ^ b[0], a[1] ^ b[1], a[2] ^ b[2], a[3] ^ b[3]]
}

/// The mixing layer (or its inverse) on half a block: a linear bijection of
/// four bundles, stored as its 40 basis images plus a per-position lookup
/// table so applying it costs four loads and three XORs.
pub struct LinearMapTable {
    basis_images: [[Bundle; 4]; 40],
    per_bundle_lut: Box<[[[Bundle; 4]; 1024]; 4]>,
}

impl LinearMapTable {
    pub(crate) fn from_values(values: Vec<Bundle>) -> Self {
        let mut basis_images = [[Bundle::default(); 4]; 40];
        for (i, row) in values.chunks_exact(4).enumerate() {
            basis_images[i] = [row[0], row[1], row[2], row[3]];
        }
        // lut[j][v] = XOR of the basis images picked by v's set bits; built
        // by peeling v's lowest bit off an already-filled smaller index.
        let mut lut = vec![[[Bundle::default(); 4]; 1024]; 4].into_boxed_slice();
        for j in 0..4 {
            for v in 1..1024usize {
                let low = v.trailing_zeros() as usize;
                lut[j][v] = xor4(lut[j][v & (v - 1)], basis_images[10 * j + low]);
            }
        }
        LinearMapTable {
            basis_images,
            per_bundle_lut: lut.try_into().expect("fixed length"),
        }
    }

    /// Image of the input whose only nonzero bundle is `v` at position `pos`.
    pub fn image_of_lone_bundle(&self, pos: usize, v: Bundle) -> [Bundle; 4] {
        self.per_bundle_lut[pos][v.value() as usize]
    }

    /// Image of the basis vector with bit value 2^t at position j, where
    /// `index` = 10j + t.
    pub fn basis_image(&self, index: usize) -> [Bundle; 4] {
        self.basis_images[index]
    }

    pub fn apply(&self, v: [Bundle; 4]) -> [Bundle; 4] {
        let lut = &self.per_bundle_lut;
        xor4(
            xor4(lut[0][v[0].value() as usize], lut[1][v[1].value() as usize]),
            xor4(lut[2][v[2].value() as usize], lut[3][v[3].value() as usize]),
        )
    }

    /// The map as a 40x40 matrix over F2 in packed bit coordinates:
    /// coordinate 10j + t is bit t (0 = MSB) of bundle j, exactly the bit
    /// order of `Block::to_bytes`. Column c is the image of basis
    /// coordinate c.
    pub fn as_binary_matrix(&self) -> BitMatrix {
        let mut m = BitMatrix::zero(40, 40);
        for j in 0..4 {
            for t in 0..10 {
                // coordinate 10j+t has bit value 2^(9-t), i.e. basis row 9-t
                let img = self.basis_images[10 * j + (9 - t)];
                let col = half_to_bits(img);
                for row in 0..40 {
                    if col >> row & 1 == 1 {
                        m.set(row, 10 * j + t, true);
                    }
                }
            }
        }
        m
    }
}

/// Packs four bundles into the 40-bit vector coordinates used by
/// [`LinearMapTable::as_binary_matrix`]: u64 bit 10j + t = bit t (0 = MSB)
/// of bundle j.
pub fn half_to_bits(v: [Bundle; 4]) -> u64 {
    let mut out = 0u64;
    for (j, b) in v.iter().enumerate() {
        for t in 0..10 {
            out |= (b.value() as u64 >> (9 - t) & 1) << (10 * j + t);
        }
    }
    out
}

/// Exact inverse of [`half_to_bits`].
pub fn half_from_bits(bits: u64) -> [Bundle; 4] {
    let mut out = [Bundle::default(); 4];
    for (j, b) in out.iter_mut().enumerate() {
        let mut v = 0u16;
        for t in 0..10 {
            v |= ((bits >> (10 * j + t) & 1) as u16) << (9 - t);
        }
        *b = Bundle::new(v);
    }
    out
}

/// All constant tables of the cipher, verified.
pub struct Tables {
    pub sboxes: [SBoxTable; 4],
    pub mix: LinearMapTable,
    pub mix_inv: LinearMapTable,
}

impl Tables {
    /// Parses the embedded assets and runs every integrity check: S-box
    /// bijectivity and the mutual-inverse property of the mixing tables on
    /// all 40 basis vectors, in both compositions.
    pub fn load() -> Result<Tables, TableError> {
        const SBOX_NAMES: [&str; 4] = ["sbox0", "sbox1", "sbox2", "sbox3"];
        let mut sboxes = Vec::with_capacity(4);
        for i in 0..4 {
            let values = parse_bundles(SBOX_NAMES[i], SBOX_TEXT[i], 1024)?;
            sboxes.push(SBoxTable::from_values(SBOX_NAMES[i], values)?);
        }
        let mix = LinearMapTable::from_values(parse_bundles("m", MIX_TEXT, 160)?);
        let mix_inv = LinearMapTable::from_values(parse_bundles("minv", MIX_INV_TEXT, 160)?);

        for index in 0..40 {
            let mut e = [Bundle::default(); 4];
            e[index / 10] = Bundle::new(1 << (index % 10));
            if mix_inv.apply(mix.apply(e)) != e || mix.apply(mix_inv.apply(e)) != e {
                return Err(TableError::NotInverse { index });
            }
        }

        Ok(Tables {
            sboxes: sboxes.try_into().map_err(|_| ()).expect("four S-boxes"),
            mix,
            mix_inv,
        })
    }

    /// The verified tables as a shared static, loaded once.
    pub fn get() -> &'static Tables {
        static TABLES: Lazy<Tables> = Lazy::new(|| {
            Tables::load()
                .unwrap_or_else(|e| panic!("embedded cipher tables failed integrity check: {e}"))
        });
        &TABLES
    }

    /// The S-box the round function applies at bundle position `i`.
    pub fn sbox_for_position(&self, i: usize) -> &SBoxTable {
        &self.sboxes[i % 4]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};
    use sha2::{Digest, Sha256};

    fn b(v: u16) -> Bundle {
        Bundle::new(v)
    }

    fn random_half(rng: &mut StdRng) -> [Bundle; 4] {
        [
            b(rng.gen_range(0..1024)),
            b(rng.gen_range(0..1024)),
            b(rng.gen_range(0..1024)),
            b(rng.gen_range(0..1024)),
        ]
    }

    #[test]
    fn asset_transcription_is_frozen() {
        // Content digests of the embedded table assets. A mismatch means the
        // constants changed and every pinned vector below is suspect.
        let pinned = [
            (
                "sbox0.txt",
                SBOX_TEXT[0],
                "5b54270d35f4a3458a3c1894b0ac6ff0f5f2e4c6085a9db55eddc303f311744d",
            ),
            (
                "sbox1.txt",
                SBOX_TEXT[1],
                "5bcb75328ac4897f2082fa73ff2dd235711069681b8914767eb15a368b97dc50",
            ),
            (
                "sbox2.txt",
                SBOX_TEXT[2],
                "7d870f93b42f5ea3293f9b177213244ef89fa51f399d9e400728646ef89a8848",
            ),
            (
                "sbox3.txt",
                SBOX_TEXT[3],
                "ab3b7dd80fcec42330cb5d1b02b8c0409c581b95913c71290ef52b6b11d473b8",
            ),
            (
                "m.txt",
                MIX_TEXT,
                "e97d5e7005977e1357e6fa41bedff3c945b4f073d091147e1232f557148128c0",
            ),
            (
                "minv.txt",
                MIX_INV_TEXT,
                "7e27610d0aa52b6ba5c015b07e61d35c6cdd26fc7cceab3dab73477cd15a12ac",
            ),
        ];
        for (name, text, want) in pinned {
            let digest = Sha256::digest(text.as_bytes());
            let got: String = digest.iter().map(|x| format!("{:02x}", x)).collect();
            assert_eq!(got, want, "{name} content changed");
        }
    }

    #[test]
    fn load_succeeds_and_is_cached() {
        let t = Tables::get();
        assert!(std::ptr::eq(t, Tables::get()));
    }

    #[test]
    fn sbox_corner_entries() {
        let t = Tables::get();
        assert_eq!(t.sboxes[0].apply(b(0x000)), b(0x0BA));
        assert_eq!(t.sboxes[0].apply(b(0x00F)), b(0x2E6));
        assert_eq!(t.sboxes[1].apply(b(0x3FF)), b(0x0CE));
        assert_eq!(t.sboxes[2].apply(b(0x000)), b(0x12E));
        assert_eq!(t.sboxes[3].apply(b(0x3FF)), b(0x24F));
    }

    #[test]
    fn sbox_inverse_round_trip_exhaustive() {
        let t = Tables::get();
        for s in &t.sboxes {
            for x in 0..1024 {
                let x = b(x);
                assert_eq!(s.apply_inv(s.apply(x)), x);
                assert_eq!(s.apply(s.apply_inv(x)), x);
            }
        }
    }

    #[test]
    fn mix_first_basis_images() {
        let t = Tables::get();
        let e0 = [b(0x001), b(0), b(0), b(0)];
        assert_eq!(t.mix.apply(e0), [b(0x112), b(0x1BC), b(0x36C), b(0x0C5)]);
        assert_eq!(
            t.mix_inv.apply(e0),
            [b(0x10B), b(0x221), b(0x09D), b(0x398)]
        );
    }

    #[test]
    fn mix_zero_maps_to_zero() {
        let t = Tables::get();
        let zero = [b(0); 4];
        assert_eq!(t.mix.apply(zero), zero);
        assert_eq!(t.mix_inv.apply(zero), zero);
    }

    #[test]
    fn mix_linearity_random_pairs() {
        let t = Tables::get();
        let mut rng = StdRng::seed_from_u64(0x6D69);
        for _ in 0..10_000 {
            let x = random_half(&mut rng);
            let y = random_half(&mut rng);
            let xy = xor4(x, y);
            assert_eq!(t.mix.apply(xy), xor4(t.mix.apply(x), t.mix.apply(y)));
        }
    }

    #[test]
    fn mix_inverse_composition_random() {
        let t = Tables::get();
        let mut rng = StdRng::seed_from_u64(0x6D6A);
        for _ in 0..10_000 {
            let x = random_half(&mut rng);
            assert_eq!(t.mix_inv.apply(t.mix.apply(x)), x);
        }
    }

    #[test]
    fn lut_agrees_with_basis_expansion() {
        let t = Tables::get();
        let mut rng = StdRng::seed_from_u64(0x6D6B);
        for _ in 0..1000 {
            let pos = rng.gen_range(0..4);
            let v: u16 = rng.gen_range(0..1024);
            let mut want = [b(0); 4];
            for bit in 0..10 {
                if v >> bit & 1 == 1 {
                    want = xor4(want, t.mix.basis_image(10 * pos + bit));
                }
            }
            assert_eq!(t.mix.image_of_lone_bundle(pos, b(v)), want);
        }
    }

    #[test]
    fn half_bit_packing_round_trip() {
        let mut rng = StdRng::seed_from_u64(0x6D6C);
        for _ in 0..1000 {
            let v = random_half(&mut rng);
            assert_eq!(half_from_bits(half_to_bits(v)), v);
        }
        // spot-check the coordinate convention: bundle 0's MSB is bit 0
        assert_eq!(half_to_bits([b(0x200), b(0), b(0), b(0)]), 1);
        assert_eq!(half_to_bits([b(0x001), b(0), b(0), b(0)]), 1 << 9);
        assert_eq!(half_to_bits([b(0), b(0), b(0), b(0x001)]), 1 << 39);
    }

    #[test]
    fn binary_matrix_matches_apply() {
        let t = Tables::get();
        let m = t.mix.as_binary_matrix();
        let mut rng = StdRng::seed_from_u64(0x6D6D);
        for _ in 0..1000 {
            let v = random_half(&mut rng);
            assert_eq!(half_from_bits(m.mul_vec(half_to_bits(v))), t.mix.apply(v));
        }
        // the published first basis image, through the matrix view
        let e0 = half_to_bits([b(0x001), b(0), b(0), b(0)]);
        assert_eq!(
            half_from_bits(m.mul_vec(e0)),
            [b(0x112), b(0x1BC), b(0x36C), b(0x0C5)]
        );
    }

    #[test]
    fn binary_matrices_are_mutually_inverse() {
        let t = Tables::get();
        let m = t.mix.as_binary_matrix();
        let minv = t.mix_inv.as_binary_matrix();
        assert_eq!(m.mul(&minv), BitMatrix::identity(40));
        assert_eq!(minv.mul(&m), BitMatrix::identity(40));
        assert!(m.is_invertible());
    }

    #[test]
    fn corrupt_sbox_is_rejected() {
        // duplicate one value: no longer a permutation
        let mut values: Vec<Bundle> = (0..1024).map(b).collect();
        values[5] = values[7];
        let Err(err) = SBoxTable::from_values("test", values) else {
            panic!("corrupt S-box accepted");
        };
        assert!(matches!(err, TableError::NotPermutation { .. }));
    }

    #[test]
    fn bad_tokens_are_rejected() {
        assert!(matches!(
            parse_bundles("test", "012 XYZ", 2),
            Err(TableError::BadToken { .. })
        ));
        assert!(matches!(
            parse_bundles("test", "012 345", 3),
            Err(TableError::BadCount { .. })
        ));
        // 3-digit but out of 10-bit range
        assert!(matches!(
            parse_bundles("test", "4FF", 1),
            Err(TableError::BadToken { .. })
        ));
    }
}
