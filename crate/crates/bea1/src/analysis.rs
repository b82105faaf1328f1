//! Security metrics of the cipher's components: difference distribution and
//! linear approximation tables of the S-boxes, branch numbers of the mixing
//! layer, active-S-box counting, and the trail probability/bias bounds they
//! imply. Each published figure has a checkable claim here.

use std::fmt;
use std::io::{self, Write};

use thiserror::Error;

use crate::bundles::Bundle;
use crate::gf2::BitMatrix;
use crate::tables::{xor4, LinearMapTable, SBoxTable, Tables};

/// Advertised differential uniformity: no nontrivial DDT entry exceeds this.
pub const CLAIMED_DIFF_UNIFORMITY: u16 = 40;
/// Advertised linear uniformity as a bias count out of 512 (|Walsh|/2).
pub const CLAIMED_LINEAR_UNIFORMITY: u16 = 128;
/// Advertised branch number of the mixing layer, the maximum possible for
/// four bundles.
pub const CLAIMED_BRANCH_NUMBER: u32 = 5;

/// counts[a][d] = number of inputs x with S(x XOR a) XOR S(x) = d.
pub struct DifferenceDistributionTable {
    counts: Box<[[u16; 1024]; 1024]>,
    /// Largest entry over rows a != 0.
    pub max_nontrivial: u16,
}

impl DifferenceDistributionTable {
    pub fn count(&self, a: u16, d: u16) -> u16 {
        self.counts[a as usize][d as usize]
    }

    /// Writes "a,b,count" lines for every nonzero cell (a = input
    /// difference, b = output difference).
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "a,b,count")?;
        for a in 0..1024 {
            for b in 0..1024 {
                let c = self.counts[a][b];
                if c != 0 {
                    writeln!(w, "{a},{b},{c}")?;
                }
            }
        }
        Ok(())
    }
}

pub fn compute_ddt(s: &SBoxTable) -> DifferenceDistributionTable {
    let mut sv = [0u16; 1024];
    for (x, v) in sv.iter_mut().enumerate() {
        *v = s.apply(Bundle::new(x as u16)).value();
    }
    let mut counts: Box<[[u16; 1024]; 1024]> = vec![[0u16; 1024]; 1024]
        .into_boxed_slice()
        .try_into()
        .expect("fixed length");
    for a in 0..1024usize {
        let row = &mut counts[a];
        for x in 0..1024usize {
            row[(sv[x ^ a] ^ sv[x]) as usize] += 1;
        }
    }
    let max_nontrivial = counts[1..]
        .iter()
        .flat_map(|row| row.iter().copied())
        .max()
        .unwrap_or(0);
    DifferenceDistributionTable {
        counts,
        max_nontrivial,
    }
}

/// bias_counts[a][b] = |#{x : a.x = b.S(x)} - 512| = |W(a,b)| / 2 with
/// W(a,b) = sum over x of (-1)^(a.x XOR b.S(x)).
pub struct LinearApproximationTable {
    bias_counts: Box<[[u16; 1024]; 1024]>,
    /// Largest entry over columns b != 0 (any a).
    pub max_nontrivial: u16,
}

impl LinearApproximationTable {
    pub fn bias_count(&self, a: u16, b: u16) -> u16 {
        self.bias_counts[a as usize][b as usize]
    }

    /// Writes "a,b,count" lines for every nonzero cell (a = input mask,
    /// b = output mask, count = bias count).
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "a,b,count")?;
        for a in 0..1024 {
            for b in 0..1024 {
                let c = self.bias_counts[a][b];
                if c != 0 {
                    writeln!(w, "{a},{b},{c}")?;
                }
            }
        }
        Ok(())
    }
}

/// In-place Walsh-Hadamard transform: f[a] becomes
/// sum over x of (-1)^parity(a AND x) * f[x].
fn walsh_hadamard(f: &mut [i32; 1024]) {
    let mut h = 1;
    while h < 1024 {
        let mut start = 0;
        while start < 1024 {
            for i in start..start + h {
                let (a, b) = (f[i], f[i + h]);
                f[i] = a + b;
                f[i + h] = a - b;
            }
            start += 2 * h;
        }
        h *= 2;
    }
}

pub fn compute_lat(s: &SBoxTable) -> LinearApproximationTable {
    let mut sv = [0u16; 1024];
    for (x, v) in sv.iter_mut().enumerate() {
        *v = s.apply(Bundle::new(x as u16)).value();
    }
    let mut bias_counts: Box<[[u16; 1024]; 1024]> = vec![[0u16; 1024]; 1024]
        .into_boxed_slice()
        .try_into()
        .expect("fixed length");
    let mut max_nontrivial = 0u16;
    for b in 0..1024u16 {
        // one transform turns the column of signs into all W(., b) at once
        let mut f = [0i32; 1024];
        for x in 0..1024usize {
            f[x] = if (b & sv[x]).count_ones() & 1 == 1 {
                -1
            } else {
                1
            };
        }
        walsh_hadamard(&mut f);
        for a in 0..1024usize {
            let bias = (f[a].unsigned_abs() / 2) as u16;
            bias_counts[a][b as usize] = bias;
            if b != 0 && bias > max_nontrivial {
                max_nontrivial = bias;
            }
        }
    }
    LinearApproximationTable {
        bias_counts,
        max_nontrivial,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BranchMethod {
    /// Rank tests on block submatrices of the 40x40 bit matrix.
    SubmatrixRank,
    /// Enumeration of low-bundle-weight inputs.
    LowWeightScan,
}

/// Branch numbers of a linear layer. Weight means the number of nonzero
/// bundles, so for four bundles the branch number lies in 2..=5.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BranchNumberReport {
    pub differential: u32,
    pub linear: u32,
    pub method: BranchMethod,
}

/// Indices 10b..10b+9 for each block b set in `mask`.
fn block_indices(mask: u32) -> Vec<usize> {
    let mut out = Vec::new();
    for b in 0..4 {
        if mask >> b & 1 == 1 {
            out.extend(10 * b..10 * b + 10);
        }
    }
    out
}

/// True when every square block submatrix (t block rows by t block columns,
/// t = 1..4, 69 matrices in all) is nonsingular. For a 4-block linear map
/// this holds exactly when the branch number is the maximal 5: a singular
/// t x t selection yields a nonzero input of weight <= t whose image
/// vanishes on t blocks, giving total weight <= 4, and conversely.
fn square_blocks_all_nonsingular(m: &BitMatrix) -> bool {
    for row_mask in 1u32..16 {
        for col_mask in 1u32..16 {
            if row_mask.count_ones() != col_mask.count_ones() {
                continue;
            }
            let sub = m.submatrix(&block_indices(row_mask), &block_indices(col_mask));
            if sub.rank() < sub.n_cols() {
                return false;
            }
        }
    }
    true
}

/// Exact branch number of a 40x40 bit matrix: the minimum of
/// |T| + 4 - |Z| over input block supports T and output block sets Z forced
/// to zero, admissible when the (Z, T) submatrix has a nontrivial kernel.
/// Every input/output pair induces such a (T, Z) and vice versa, so this
/// sweep of at most 225 rank computations is an exhaustive search over all
/// support patterns. The baseline 5 is any weight-1 input (Z empty).
fn exact_branch_by_block_kernels(m: &BitMatrix) -> u32 {
    let mut best = 5;
    for t_mask in 1u32..16 {
        let t = t_mask.count_ones();
        for z_mask in 1u32..16 {
            let bound = t + 4 - z_mask.count_ones();
            if bound >= best {
                continue;
            }
            let sub = m.submatrix(&block_indices(z_mask), &block_indices(t_mask));
            if sub.rank() < sub.n_cols() {
                best = bound;
            }
        }
    }
    best
}

/// Differential and linear branch numbers by rank tests: the fast all-69
/// square-block check decides whether the branch number is the maximal 5,
/// and otherwise the block-kernel sweep pins the exact value. The linear
/// branch number is the same computation on the transpose.
pub fn branch_number_submatrix(m: &BitMatrix) -> BranchNumberReport {
    assert_eq!(
        (m.n_rows(), m.n_cols()),
        (40, 40),
        "expected a 40x40 matrix"
    );
    let one_direction = |mat: &BitMatrix| {
        if square_blocks_all_nonsingular(mat) {
            5
        } else {
            exact_branch_by_block_kernels(mat)
        }
    };
    BranchNumberReport {
        differential: one_direction(m),
        linear: one_direction(&m.transpose()),
        method: BranchMethod::SubmatrixRank,
    }
}

/// What a low-weight enumeration observed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExhaustiveScan {
    pub max_weight: u32,
    /// Nonzero inputs evaluated.
    pub cases: u64,
    /// Minimum of input weight + output weight over all cases; an upper
    /// bound on the branch number, and equal to it when the scan covers one
    /// side of an optimal pair.
    pub min_total_weight: u32,
    /// Minimum output weight seen for each input weight (index w-1).
    pub min_output_weight_by_input: Vec<u32>,
}

fn bundle_weight(v: [Bundle; 4]) -> u32 {
    v.iter().filter(|b| b.value() != 0).count() as u32
}

/// Evaluates the map on every nonzero input of bundle weight <= max_weight
/// (1..=4) and records the weight statistics. Weights 1 and 2 are 4092 and
/// about 6.3 million cases; weight 3 is about 4.3 billion and takes
/// minutes; weight 4 adds nothing because a bijective map gives those
/// inputs total weight at least 5 anyway.
pub fn branch_number_exhaustive(map: &LinearMapTable, max_weight: u32) -> ExhaustiveScan {
    assert!((1..=4).contains(&max_weight), "max_weight must be 1..=4");
    let mut cases = 0u64;
    let mut min_total = u32::MAX;
    let mut min_out = vec![u32::MAX; max_weight as usize];

    let nonzero = || (1..1024u16).map(Bundle::new);

    for pos in 0..4 {
        for v in nonzero() {
            let w = bundle_weight(map.image_of_lone_bundle(pos, v));
            cases += 1;
            min_out[0] = min_out[0].min(w);
            min_total = min_total.min(1 + w);
        }
    }

    if max_weight >= 2 {
        for p0 in 0..4 {
            for p1 in p0 + 1..4 {
                for v0 in nonzero() {
                    let partial = map.image_of_lone_bundle(p0, v0);
                    for v1 in nonzero() {
                        let w = bundle_weight(xor4(partial, map.image_of_lone_bundle(p1, v1)));
                        cases += 1;
                        min_out[1] = min_out[1].min(w);
                        min_total = min_total.min(2 + w);
                    }
                }
            }
        }
    }

    if max_weight >= 3 {
        for p0 in 0..4 {
            for p1 in p0 + 1..4 {
                for p2 in p1 + 1..4 {
                    for v0 in nonzero() {
                        let part0 = map.image_of_lone_bundle(p0, v0);
                        for v1 in nonzero() {
                            let part1 = xor4(part0, map.image_of_lone_bundle(p1, v1));
                            for v2 in nonzero() {
                                let w =
                                    bundle_weight(xor4(part1, map.image_of_lone_bundle(p2, v2)));
                                cases += 1;
                                min_out[2] = min_out[2].min(w);
                                min_total = min_total.min(3 + w);
                            }
                        }
                    }
                }
            }
        }
    }

    if max_weight >= 4 {
        for v0 in nonzero() {
            let part0 = map.image_of_lone_bundle(0, v0);
            for v1 in nonzero() {
                let part1 = xor4(part0, map.image_of_lone_bundle(1, v1));
                for v2 in nonzero() {
                    let part2 = xor4(part1, map.image_of_lone_bundle(2, v2));
                    for v3 in nonzero() {
                        let w = bundle_weight(xor4(part2, map.image_of_lone_bundle(3, v3)));
                        cases += 1;
                        min_out[3] = min_out[3].min(w);
                        min_total = min_total.min(4 + w);
                    }
                }
            }
        }
    }

    ExhaustiveScan {
        max_weight,
        cases,
        min_total_weight: min_total,
        min_output_weight_by_input: min_out,
    }
}

/// Exact branch number from weight-<=2 scans of a map and of its inverse.
///
/// The branch number is at most 5, so any pair (x, Mx) realizing it has
/// weight at most 2 on one side; the forward scan visits pairs by input
/// weight and the inverse scan visits the same pairs by output weight, so
/// between them the optimum is always observed.
pub fn branch_number_from_dual_scans(forward: &ExhaustiveScan, inverse: &ExhaustiveScan) -> u32 {
    assert!(
        forward.max_weight >= 2 && inverse.max_weight >= 2,
        "dual-scan certification needs weight-2 coverage on both sides"
    );
    forward.min_total_weight.min(inverse.min_total_weight)
}

/// The per-column two-round bound on active S-boxes: floor(rounds/2) times
/// the branch number, ignoring inter-column diffusion from ShiftRows.
pub fn min_active_sboxes(rounds: u32, branch: u32) -> u32 {
    assert!(rounds >= 1, "need at least one round");
    assert!(
        branch >= 2,
        "branch number of a bijective map is at least 2"
    );
    rounds / 2 * branch
}

/// Trail bounds implied by `active` S-boxes of uniformity du (differential,
/// out of 1024) and lu (linear bias count, out of 512).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrailBound {
    pub active_sboxes: u32,
    /// log2 of the best differential trail probability: active * log2(du/1024).
    pub log2_prob_bound: f64,
    /// log2 of the best linear trail bias: active * log2(lu/512).
    pub log2_bias_bound: f64,
}

impl TrailBound {
    /// log2 of the chosen-plaintext pairs a differential attack along such a
    /// trail needs (the reciprocal of the probability bound).
    pub fn chosen_pairs_log2(&self) -> f64 {
        -self.log2_prob_bound
    }

    /// log2 of the known-plaintext pairs a linear attack needs (reciprocal
    /// of the squared bias bound).
    pub fn known_pairs_log2(&self) -> f64 {
        -2.0 * self.log2_bias_bound
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum BoundArgError {
    #[error("differential uniformity {0} outside 1..=1024")]
    DiffUniformity(u32),
    #[error("linear bias count {0} outside 1..=512")]
    LinearUniformity(u32),
}

pub fn trail_bounds(active: u32, du: u32, lu: u32) -> Result<TrailBound, BoundArgError> {
    if du == 0 || du > 1024 {
        return Err(BoundArgError::DiffUniformity(du));
    }
    if lu == 0 || lu > 512 {
        return Err(BoundArgError::LinearUniformity(lu));
    }
    Ok(TrailBound {
        active_sboxes: active,
        log2_prob_bound: active as f64 * (du as f64 / 1024.0).log2(),
        log2_bias_bound: active as f64 * (lu as f64 / 512.0).log2(),
    })
}

/// One checked claim about the cipher, printable as a PASS/FAIL line.
#[derive(Debug, Clone)]
pub struct ClaimCheck {
    pub label: String,
    pub pass: bool,
}

impl fmt::Display for ClaimCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "CLAIM {} ... {}",
            self.label,
            if self.pass { "PASS" } else { "FAIL" }
        )
    }
}

/// Uniformity claims for S-box `index`, computed from its full DDT and LAT.
pub fn sbox_uniformity_claims(index: usize) -> Vec<ClaimCheck> {
    let s = &Tables::get().sboxes[index];
    let ddt = compute_ddt(s);
    let lat = compute_lat(s);
    vec![
        ClaimCheck {
            label: format!(
                "S{index} differential uniformity {} <= {}",
                ddt.max_nontrivial, CLAIMED_DIFF_UNIFORMITY
            ),
            pass: ddt.max_nontrivial <= CLAIMED_DIFF_UNIFORMITY,
        },
        ClaimCheck {
            label: format!(
                "S{index} max linear bias count {} of 512 <= {} (max |Walsh| {} <= {})",
                lat.max_nontrivial,
                CLAIMED_LINEAR_UNIFORMITY,
                2 * lat.max_nontrivial,
                2 * CLAIMED_LINEAR_UNIFORMITY
            ),
            pass: lat.max_nontrivial <= CLAIMED_LINEAR_UNIFORMITY,
        },
    ]
}

/// Branch-number claims for the mixing layer: the rank method on the layer
/// and its inverse, cross-checked by low-weight scans up to `scan_weight`
/// (scans confirm that every covered input keeps total weight >= 5).
pub fn diffusion_claims(scan_weight: u32) -> Vec<ClaimCheck> {
    let tables = Tables::get();
    let report = branch_number_submatrix(&tables.mix.as_binary_matrix());
    let report_inv = branch_number_submatrix(&tables.mix_inv.as_binary_matrix());
    let mut claims = vec![
        ClaimCheck {
            label: format!(
                "mixing layer differential branch number {} = {}",
                report.differential, CLAIMED_BRANCH_NUMBER
            ),
            pass: report.differential == CLAIMED_BRANCH_NUMBER,
        },
        ClaimCheck {
            label: format!(
                "mixing layer linear branch number {} = {}",
                report.linear, CLAIMED_BRANCH_NUMBER
            ),
            pass: report.linear == CLAIMED_BRANCH_NUMBER,
        },
        ClaimCheck {
            label: format!(
                "inverse mixing layer branch numbers {}/{} = {}",
                report_inv.differential, report_inv.linear, CLAIMED_BRANCH_NUMBER
            ),
            pass: report_inv.differential == CLAIMED_BRANCH_NUMBER
                && report_inv.linear == CLAIMED_BRANCH_NUMBER,
        },
    ];
    let scan = branch_number_exhaustive(&tables.mix, scan_weight);
    for w in 1..=scan_weight {
        let min_out = scan.min_output_weight_by_input[(w - 1) as usize];
        let need = CLAIMED_BRANCH_NUMBER.saturating_sub(w);
        claims.push(ClaimCheck {
            label: format!(
                "weight-{w} inputs keep output weight >= {need} (observed min {min_out})"
            ),
            pass: min_out >= need,
        });
    }
    claims.push(ClaimCheck {
        label: format!(
            "scan of {} inputs observed min total weight {} (branch number bound)",
            scan.cases, scan.min_total_weight
        ),
        pass: scan.min_total_weight >= CLAIMED_BRANCH_NUMBER,
    });
    claims
}

/// Trail-bound claims for the full ten-round cipher with the advertised
/// uniformities.
pub fn bound_claims() -> Vec<ClaimCheck> {
    let active = min_active_sboxes(10, CLAIMED_BRANCH_NUMBER);
    let bound = trail_bounds(
        active,
        CLAIMED_DIFF_UNIFORMITY as u32,
        CLAIMED_LINEAR_UNIFORMITY as u32,
    )
    .expect("advertised uniformities are in range");
    vec![
        ClaimCheck {
            label: format!("10-round trails have at least {active} active S-boxes (want 25)"),
            pass: active == 25,
        },
        ClaimCheck {
            label: format!(
                "log2 differential trail probability bound {:.4} within [-117.0, -116.9]",
                bound.log2_prob_bound
            ),
            pass: (-117.0..=-116.9).contains(&bound.log2_prob_bound),
        },
        ClaimCheck {
            label: format!(
                "log2 linear trail bias bound {} = -50",
                bound.log2_bias_bound
            ),
            pass: bound.log2_bias_bound == -50.0,
        },
    ]
}
