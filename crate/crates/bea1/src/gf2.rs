//! Dense bit matrices over F2, sized for the cipher's 40-bit linear layer.
//!
//! Rows are stored as `u64` bit masks (bit `j` of a row word is column `j`),
//! which caps the width at 64 columns. That is plenty here: the largest
//! matrix in play is 40x40.

/// A rows x cols binary matrix. Arithmetic is mod 2.
#[derive(Clone, PartialEq, Eq)]
pub struct BitMatrix {
    rows: Vec<u64>,
    cols: usize,
}

impl BitMatrix {
    pub fn zero(n_rows: usize, n_cols: usize) -> Self {
        assert!(n_cols <= 64, "BitMatrix is limited to 64 columns");
        BitMatrix {
            rows: vec![0; n_rows],
            cols: n_cols,
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zero(n, n);
        for i in 0..n {
            m.rows[i] = 1 << i;
        }
        m
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        debug_assert!(c < self.cols);
        self.rows[r] >> c & 1 == 1
    }

    pub fn set(&mut self, r: usize, c: usize, bit: bool) {
        debug_assert!(c < self.cols);
        if bit {
            self.rows[r] |= 1 << c;
        } else {
            self.rows[r] &= !(1 << c);
        }
    }

    /// Row `r` as a bit mask (bit `j` = column `j`).
    pub fn row(&self, r: usize) -> u64 {
        self.rows[r]
    }

    /// Matrix-vector product; bit `j` of `v` is coordinate `j`.
    pub fn mul_vec(&self, v: u64) -> u64 {
        let mut out = 0u64;
        for (r, row) in self.rows.iter().enumerate() {
            out |= (((row & v).count_ones() & 1) as u64) << r;
        }
        out
    }

    pub fn mul(&self, rhs: &BitMatrix) -> BitMatrix {
        assert_eq!(self.cols, rhs.n_rows());
        let rhs_t = rhs.transpose();
        let mut out = BitMatrix::zero(self.n_rows(), rhs.n_cols());
        for r in 0..self.n_rows() {
            let mut word = 0u64;
            for c in 0..rhs.n_cols() {
                word |= (((self.rows[r] & rhs_t.rows[c]).count_ones() & 1) as u64) << c;
            }
            out.rows[r] = word;
        }
        out
    }

    pub fn transpose(&self) -> BitMatrix {
        let mut out = BitMatrix::zero(self.cols, self.n_rows());
        for r in 0..self.n_rows() {
            let mut word = self.rows[r];
            while word != 0 {
                let c = word.trailing_zeros() as usize;
                out.rows[c] |= 1 << r;
                word &= word - 1;
            }
        }
        out
    }

    /// Rank over F2 by Gaussian elimination on a copy.
    pub fn rank(&self) -> usize {
        let mut rows = self.rows.clone();
        let mut rank = 0;
        for col in 0..self.cols {
            let Some(pivot) = (rank..rows.len()).find(|&r| rows[r] >> col & 1 == 1) else {
                continue;
            };
            rows.swap(rank, pivot);
            let pivot_row = rows[rank];
            for (r, row) in rows.iter_mut().enumerate() {
                if r != rank && *row >> col & 1 == 1 {
                    *row ^= pivot_row;
                }
            }
            rank += 1;
        }
        rank
    }

    /// True when the matrix is square with full rank.
    pub fn is_invertible(&self) -> bool {
        self.n_rows() == self.cols && self.rank() == self.cols
    }

    /// Inverse by Gauss-Jordan elimination; None when singular.
    pub fn inverse(&self) -> Option<BitMatrix> {
        if self.n_rows() != self.cols {
            return None;
        }
        let n = self.cols;
        let mut a = self.rows.clone();
        let mut inv = BitMatrix::identity(n).rows;
        for col in 0..n {
            let pivot = (col..n).find(|&r| a[r] >> col & 1 == 1)?;
            a.swap(col, pivot);
            inv.swap(col, pivot);
            for r in 0..n {
                if r != col && a[r] >> col & 1 == 1 {
                    a[r] ^= a[col];
                    inv[r] ^= inv[col];
                }
            }
        }
        Some(BitMatrix { rows: inv, cols: n })
    }

    /// The submatrix picking `row_idx` x `col_idx`, in the order given.
    pub fn submatrix(&self, row_idx: &[usize], col_idx: &[usize]) -> BitMatrix {
        let mut out = BitMatrix::zero(row_idx.len(), col_idx.len());
        for (ri, &r) in row_idx.iter().enumerate() {
            for (ci, &c) in col_idx.iter().enumerate() {
                if self.get(r, c) {
                    out.rows[ri] |= 1 << ci;
                }
            }
        }
        out
    }
}

impl std::fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "BitMatrix {}x{}", self.n_rows(), self.cols)?;
        for r in 0..self.n_rows() {
            for c in 0..self.cols {
                f.write_str(if self.get(r, c) { "1" } else { "0" })?;
            }
            f.write_str("\n")?;
        }
        Ok(())
    }
}
