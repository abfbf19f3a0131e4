//! Master-matrix embedding and shifting-submatrix planning.
//!
//! Cell coordinates on [`MatrixFp`] are 0-based. Block top-left labels in an
//! [`SsmIndexPlan`] are 1-based, matching how block labels such as `(4,4)`
//! are written, and they are what the delta rule compares.

use crate::error::{Error, Result};
use crate::field::{FieldCtx, FieldElem};
use crate::kdfstream::{padding_bytes, DerivedKeys};
use crate::matrixcore::Block;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatrixFp {
    rows: usize,
    cols: usize,
    data: Vec<FieldElem>,
}

impl MatrixFp {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        MatrixFp {
            rows,
            cols,
            data: vec![FieldElem::ZERO; rows * cols],
        }
    }

    pub fn from_elems(rows: usize, cols: usize, data: Vec<FieldElem>) -> Self {
        assert_eq!(data.len(), rows * cols);
        MatrixFp { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn elems(&self) -> &[FieldElem] {
        &self.data
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> FieldElem {
        self.data[row * self.cols + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, v: FieldElem) {
        self.data[row * self.cols + col] = v;
    }

    pub fn add(&self, other: &MatrixFp, ctx: &FieldCtx) -> MatrixFp {
        self.zip_with(other, |a, b| ctx.add(a, b))
    }

    pub fn sub(&self, other: &MatrixFp, ctx: &FieldCtx) -> MatrixFp {
        self.zip_with(other, |a, b| ctx.sub(a, b))
    }

    fn zip_with(&self, other: &MatrixFp, f: impl Fn(FieldElem, FieldElem) -> FieldElem) -> MatrixFp {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        MatrixFp {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        }
    }
}

/// Which 3x3 windows are taken from the masked matrix, and in what order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SsmIndexPlan {
    rows: usize,
    cols: usize,
    row_starts: Vec<usize>,
    col_starts: Vec<usize>,
}

impl SsmIndexPlan {
    /// Validates explicit top-left lists (1-based, strictly increasing) and
    /// checks that their footprints cover the whole matrix.
    pub fn new(rows: usize, cols: usize, row_starts: Vec<usize>, col_starts: Vec<usize>) -> Result<Self> {
        check_shape(rows, cols)?;
        for (list, dim, what) in [(&row_starts, rows, "row"), (&col_starts, cols, "column")] {
            if list.is_empty() {
                return Err(Error::BadPlan(format!("empty {what} list")));
            }
            if list.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::BadPlan(format!("{what} starts not strictly increasing")));
            }
            if list.iter().any(|&s| s < 1 || s > dim - 2) {
                return Err(Error::BadPlan(format!("{what} start outside 1..={}", dim - 2)));
            }
            if let Some(gap) = first_uncovered(list, dim) {
                return Err(Error::BadPlan(format!("{what} {gap} not covered")));
            }
        }
        Ok(SsmIndexPlan {
            rows,
            cols,
            row_starts,
            col_starts,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row_starts(&self) -> &[usize] {
        &self.row_starts
    }

    pub fn col_starts(&self) -> &[usize] {
        &self.col_starts
    }

    /// B = |I| * |J|.
    pub fn block_count(&self) -> usize {
        self.row_starts.len() * self.col_starts.len()
    }

    /// 3B transmitted columns.
    pub fn column_count(&self) -> usize {
        3 * self.block_count()
    }

    /// Lexicographic enumeration over I x J; entry k-1 is block k.
    pub fn blocks(&self) -> Vec<(usize, usize)> {
        self.row_starts
            .iter()
            .flat_map(|&i| self.col_starts.iter().map(move |&j| (i, j)))
            .collect()
    }

    /// Global column index l = 3(k-1) + r for block k, local column r (1-based).
    pub fn global_column(block: usize, local: usize) -> usize {
        3 * (block - 1) + local
    }

    /// Inverse of [`global_column`](Self::global_column).
    pub fn split_column(ell: usize) -> (usize, usize) {
        ((ell - 1) / 3 + 1, (ell - 1) % 3 + 1)
    }

    /// 1-based indices (k) of the blocks whose footprint holds the 0-based cell.
    pub fn blocks_containing(&self, row: usize, col: usize) -> Vec<usize> {
        self.blocks()
            .iter()
            .enumerate()
            .filter(|(_, &(i, j))| (i - 1..i + 2).contains(&row) && (j - 1..j + 2).contains(&col))
            .map(|(k, _)| k + 1)
            .collect()
    }

    /// Number of blocks covering each cell, row-major.
    pub fn coverage(&self) -> Vec<usize> {
        let mut cov = vec![0usize; self.rows * self.cols];
        for (i, j) in self.blocks() {
            for r in i - 1..i + 2 {
                for c in j - 1..j + 2 {
                    cov[r * self.cols + c] += 1;
                }
            }
        }
        cov
    }
}

fn first_uncovered(starts: &[usize], dim: usize) -> Option<usize> {
    (1..=dim).find(|&x| !starts.iter().any(|&s| s <= x && x < s + 3))
}

fn check_shape(rows: usize, cols: usize) -> Result<()> {
    if rows < 3 || cols < 3 || rows > u16::MAX as usize || cols > u16::MAX as usize {
        return Err(Error::BadShape { rows, cols });
    }
    Ok(())
}

/// Stride-3 starts `1, 4, 7, ...` up to `dim-2`, with `dim-2` appended when
/// the stride misses it.
fn stride3_with_boundary(dim: usize) -> Vec<usize> {
    let last = dim - 2;
    let mut v: Vec<usize> = (1..=last).step_by(3).collect();
    if v.last() != Some(&last) {
        v.push(last);
    }
    v
}

/// The default plan for an `m x n` matrix.
pub fn plan_indices(rows: usize, cols: usize) -> Result<SsmIndexPlan> {
    check_shape(rows, cols)?;
    Ok(SsmIndexPlan {
        rows,
        cols,
        row_starts: stride3_with_boundary(rows),
        col_starts: stride3_with_boundary(cols),
    })
}

/// Top-left window with 1-based label `(i, j)`.
pub fn extract_block(m: &MatrixFp, i: usize, j: usize) -> Result<Block> {
    if i < 1 || j < 1 || i + 2 > m.rows || j + 2 > m.cols {
        return Err(Error::OutOfBounds { row: i, col: j });
    }
    let mut b = Block::ZERO;
    for r in 0..3 {
        for c in 0..3 {
            b.0[r][c] = m.get(i - 1 + r, j - 1 + c);
        }
    }
    Ok(b)
}

/// Writes every block back; overlapping cells must agree exactly.
pub fn reassemble(blocks: &[(usize, usize, Block)], rows: usize, cols: usize) -> Result<MatrixFp> {
    let mut out = MatrixFp::zeros(rows, cols);
    let mut written = vec![false; rows * cols];
    for &(i, j, ref b) in blocks {
        if i < 1 || j < 1 || i + 2 > rows || j + 2 > cols {
            return Err(Error::OutOfBounds { row: i, col: j });
        }
        for r in 0..3 {
            for c in 0..3 {
                let (row, col) = (i - 1 + r, j - 1 + c);
                let idx = row * cols + col;
                if written[idx] {
                    if out.data[idx] != b.0[r][c] {
                        return Err(Error::OverlapMismatch {
                            row: row + 1,
                            col: col + 1,
                        });
                    }
                } else {
                    out.data[idx] = b.0[r][c];
                    written[idx] = true;
                }
            }
        }
    }
    if let Some(idx) = written.iter().position(|w| !w) {
        return Err(Error::Uncovered {
            row: idx / cols + 1,
            col: idx % cols + 1,
        });
    }
    Ok(out)
}

/// Cells available from the 1-based start position, row-major to the end.
fn span_offset(rows: usize, cols: usize, start_row: usize, start_col: usize) -> Result<usize> {
    if start_row < 1 || start_col < 1 || start_row > rows || start_col > cols {
        return Err(Error::BadStart {
            row: start_row,
            col: start_col,
        });
    }
    Ok((start_row - 1) * cols + (start_col - 1))
}

/// Places `msg` row-major from the 1-based start cell; every other cell gets
/// the next padding byte in row-major order.
pub fn embed(
    msg: &[u8],
    rows: usize,
    cols: usize,
    start_row: usize,
    start_col: usize,
    keys: &DerivedKeys,
    ctx: &FieldCtx,
) -> Result<(MatrixFp, usize)> {
    check_shape(rows, cols)?;
    let offset = span_offset(rows, cols, start_row, start_col)?;
    let capacity = rows * cols - offset;
    if msg.len() > capacity {
        return Err(Error::MessageTooLong {
            len: msg.len(),
            capacity,
        });
    }
    let pad = padding_bytes(keys, rows * cols - msg.len());
    let mut pad_iter = pad.into_iter();
    let data = (0..rows * cols)
        .map(|idx| {
            let byte = if (offset..offset + msg.len()).contains(&idx) {
                msg[idx - offset]
            } else {
                pad_iter.next().expect("padding sized to complement")
            };
            ctx.elem(byte as u64)
        })
        .collect();
    Ok((MatrixFp { rows, cols, data }, msg.len()))
}

/// Reads `len` cells row-major from the start cell. Cells must hold byte values.
pub fn extract_message(m: &MatrixFp, len: usize, start_row: usize, start_col: usize) -> Result<Vec<u8>> {
    let offset = span_offset(m.rows, m.cols, start_row, start_col)?;
    if offset + len > m.rows * m.cols {
        return Err(Error::BadLength(len));
    }
    m.data[offset..offset + len]
        .iter()
        .map(|x| u8::try_from(x.value()).map_err(|_| Error::BadLength(len)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::keyexchange::SharedVector;
    use proptest::prelude::*;

    fn ctx() -> FieldCtx {
        FieldCtx::new(12347).unwrap()
    }

    fn keys(f: &FieldCtx) -> DerivedKeys {
        let g = SharedVector::new(f, [10509, 11849, 10836]).unwrap();
        DerivedKeys::derive(&g, &[0x11; 32], f).unwrap()
    }

    fn sizes(p: &SsmIndexPlan) -> (usize, usize, usize) {
        (p.row_starts().len(), p.col_starts().len(), 9 * p.block_count())
    }

    #[test]
    fn reference_plans() {
        let p = plan_indices(8, 10).unwrap();
        assert_eq!(p.row_starts(), &[1, 4, 6]);
        assert_eq!(p.col_starts(), &[1, 4, 7, 8]);
        assert_eq!(p.block_count(), 12);
        assert_eq!(sizes(&plan_indices(5, 7).unwrap()), (2, 3, 54));
        assert_eq!(sizes(&plan_indices(12, 23).unwrap()), (4, 8, 288));
        let single = plan_indices(3, 3).unwrap();
        assert_eq!((single.row_starts(), single.col_starts()), (&[1][..], &[1][..]));
        assert_eq!(&p.blocks()[..5], &[(1, 1), (1, 4), (1, 7), (1, 8), (4, 1)]);
        assert!(plan_indices(2, 5).is_err());
    }

    #[test]
    fn coverage_exhaustive() {
        for m in 3..=40 {
            for n in 3..=40 {
                let p = plan_indices(m, n).unwrap();
                assert!(p.coverage().iter().all(|&c| c >= 1), "{m}x{n}");
                assert!(p.row_starts().iter().all(|&i| (1..=m - 2).contains(&i)));
                assert!(p.col_starts().iter().all(|&j| (1..=n - 2).contains(&j)));
            }
        }
    }

    #[test]
    fn explicit_plan_validation() {
        assert!(SsmIndexPlan::new(8, 10, vec![1, 4, 6], vec![1, 4, 7, 8]).is_ok());
        assert!(SsmIndexPlan::new(8, 10, vec![1, 6], vec![1, 4, 7, 8]).is_err());
        assert!(SsmIndexPlan::new(8, 10, vec![1, 4, 7], vec![1, 4, 8]).is_err());
        assert!(SsmIndexPlan::new(8, 10, vec![4, 1, 6], vec![1, 4, 8]).is_err());
    }

    #[test]
    fn column_enumeration_bijective() {
        let p = plan_indices(12, 23).unwrap();
        let mut seen = std::collections::HashSet::new();
        for k in 1..=p.block_count() {
            for r in 1..=3 {
                let ell = SsmIndexPlan::global_column(k, r);
                assert_eq!(SsmIndexPlan::split_column(ell), (k, r));
                assert!(seen.insert(ell));
            }
        }
        assert_eq!(seen.len(), p.column_count());
        assert_eq!(*seen.iter().max().unwrap(), p.column_count());
    }

    #[test]
    fn reference_message_placement() {
        let f = ctx();
        let msg = b"Peace at home, peace in the world.";
        let (m, len) = embed(msg, 8, 10, 2, 3, &keys(&f), &f).unwrap();
        assert_eq!(len, 34);
        assert_eq!(m.get(1, 2).value(), 80);
        assert_eq!(extract_message(&m, len, 2, 3).unwrap(), msg);
        assert!(m.elems().iter().all(|x| x.value() < 256));
    }

    #[test]
    fn embed_edges() {
        let f = ctx();
        let k = keys(&f);
        let (m, len) = embed(b"", 3, 3, 1, 1, &k, &f).unwrap();
        assert_eq!(len, 0);
        let pad = padding_bytes(&k, 9);
        assert_eq!(m.elems().iter().map(|x| x.value() as u8).collect::<Vec<_>>(), pad);
        assert_eq!(extract_message(&m, 0, 1, 1).unwrap(), Vec::<u8>::new());
        assert_eq!(
            embed(&[0u8; 10], 3, 3, 1, 1, &k, &f).err(),
            Some(Error::MessageTooLong { len: 10, capacity: 9 })
        );
        assert_eq!(
            embed(&[0u8; 9], 3, 3, 1, 2, &k, &f).err(),
            Some(Error::MessageTooLong { len: 9, capacity: 8 })
        );
        assert!(embed(b"x", 3, 3, 4, 1, &k, &f).is_err());
        assert_eq!(extract_message(&m, 10, 1, 1).err(), Some(Error::BadLength(10)));
    }

    #[test]
    fn overlapping_windows_share_columns() {
        let f = ctx();
        let data = (0..80).map(|v| f.elem(v)).collect();
        let m = MatrixFp::from_elems(8, 10, data);
        let a = extract_block(&m, 1, 7).unwrap();
        let b = extract_block(&m, 1, 8).unwrap();
        assert_eq!(a.column(1), b.column(0));
        assert_eq!(a.column(2), b.column(1));
        assert_eq!(
            extract_block(&m, 1, 1).unwrap().to_u64(),
            [[0, 1, 2], [10, 11, 12], [20, 21, 22]]
        );
        assert!(extract_block(&m, 7, 1).is_err());
        assert!(extract_block(&m, 0, 1).is_err());
    }

    #[test]
    fn reassemble_checks_overlaps() {
        let f = ctx();
        let data = (0..80).map(|v| f.elem(v * 7)).collect();
        let m = MatrixFp::from_elems(8, 10, data);
        let plan = plan_indices(8, 10).unwrap();
        let mut blocks: Vec<_> = plan
            .blocks()
            .into_iter()
            .map(|(i, j)| (i, j, extract_block(&m, i, j).unwrap()))
            .collect();
        assert_eq!(reassemble(&blocks, 8, 10).unwrap(), m);
        // block (1,8) shares columns 8-9 with (1,7)
        blocks[3].2 .0[0][0] = f.elem(1);
        assert_eq!(
            reassemble(&blocks, 8, 10).err(),
            Some(Error::OverlapMismatch { row: 1, col: 8 })
        );
        let single = MatrixFp::from_elems(3, 3, (0..9).map(|v| f.elem(v)).collect());
        let b = extract_block(&single, 1, 1).unwrap();
        assert_eq!(reassemble(&[(1, 1, b)], 3, 3).unwrap(), single);
        assert!(matches!(reassemble(&[(1, 1, b)], 3, 4), Err(Error::Uncovered { .. })));
    }

    proptest! {
        #[test]
        fn embed_extract_round_trip(
            rows in 3usize..14, cols in 3usize..24,
            sr in 1usize..14, sc in 1usize..24,
            msg in proptest::collection::vec(any::<u8>(), 0..300),
        ) {
            let f = ctx();
            let k = keys(&f);
            prop_assume!(sr <= rows && sc <= cols);
            let cap = rows * cols - ((sr - 1) * cols + sc - 1);
            let msg = &msg[..msg.len().min(cap)];
            let (m, len) = embed(msg, rows, cols, sr, sc, &k, &f).unwrap();
            prop_assert_eq!(extract_message(&m, len, sr, sc).unwrap(), msg.to_vec());
        }

        #[test]
        fn extract_reassemble_identity(rows in 3usize..30, cols in 3usize..30, seed in any::<u64>()) {
            let f = ctx();
            let data = (0..rows * cols).map(|i| f.elem(seed.wrapping_mul(i as u64 + 1) >> 7)).collect();
            let m = MatrixFp::from_elems(rows, cols, data);
            let plan = plan_indices(rows, cols).unwrap();
            let blocks: Vec<_> = plan.blocks().into_iter()
                .map(|(i, j)| (i, j, extract_block(&m, i, j).unwrap())).collect();
            prop_assert_eq!(reassemble(&blocks, rows, cols).unwrap(), m);
        }
    }
}
