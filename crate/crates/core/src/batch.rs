//! Embedding batches: an `m × d` matrix of embedding vectors together with
//! the label the monitored classifier predicted for each row.

use std::collections::BTreeSet;

use nalgebra::DMatrix;

use crate::error::{DriftError, Result};

/// Identifier of a predicted class label.
pub type LabelId = u32;

/// A set of embedding rows with their predicted labels.
///
/// Rows are stored in single precision, the precision embedding extractors
/// produce and the on-disk format carries. Numerical work widens to `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingBatch {
    vectors: DMatrix<f32>,
    labels: Vec<LabelId>,
}

impl EmbeddingBatch {
    /// Validates that the batch is non-empty, finite, and that there is one
    /// label per row.
    pub fn new(vectors: DMatrix<f32>, labels: Vec<LabelId>) -> Result<Self> {
        if vectors.nrows() == 0 {
            return Err(DriftError::InsufficientSamples {
                required: 1,
                got: 0,
            });
        }
        if vectors.ncols() == 0 {
            return Err(DriftError::InvalidInput("embedding width is zero".into()));
        }
        if labels.len() != vectors.nrows() {
            return Err(DriftError::Dimension {
                expected: vectors.nrows(),
                got: labels.len(),
            });
        }
        if let Some(pos) = vectors.iter().position(|v| !v.is_finite()) {
            let (r, c) = (pos % vectors.nrows(), pos / vectors.nrows());
            return Err(DriftError::InvalidInput(format!(
                "non-finite embedding value at row {r}, column {c}"
            )));
        }
        Ok(Self { vectors, labels })
    }

    /// Builds a batch from row slices. All rows must share one width.
    pub fn from_rows(rows: &[Vec<f32>], labels: Vec<LabelId>) -> Result<Self> {
        let Some(first) = rows.first() else {
            return Err(DriftError::InsufficientSamples {
                required: 1,
                got: 0,
            });
        };
        let d = first.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != d) {
            return Err(DriftError::Dimension {
                expected: d,
                got: bad.len(),
            });
        }
        let vectors = DMatrix::from_fn(rows.len(), d, |i, j| rows[i][j]);
        Self::new(vectors, labels)
    }

    pub fn len(&self) -> usize {
        self.vectors.nrows()
    }

    /// Always false; batches hold at least one row.
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dim(&self) -> usize {
        self.vectors.ncols()
    }

    pub fn vectors(&self) -> &DMatrix<f32> {
        &self.vectors
    }

    pub fn labels(&self) -> &[LabelId] {
        &self.labels
    }

    pub fn into_parts(self) -> (DMatrix<f32>, Vec<LabelId>) {
        (self.vectors, self.labels)
    }

    /// Distinct labels, ascending.
    pub fn label_set(&self) -> Vec<LabelId> {
        self.labels
            .iter()
            .copied()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    }

    /// Row indices predicted as `label`, in row order.
    pub fn rows_with_label(&self, label: LabelId) -> Vec<usize> {
        self.labels
            .iter()
            .enumerate()
            .filter_map(|(i, &l)| (l == label).then_some(i))
            .collect()
    }

    /// New batch made of the given rows (repeats allowed).
    ///
    /// Panics if `indices` is empty or holds an out-of-range row.
    pub fn select(&self, indices: &[usize]) -> EmbeddingBatch {
        assert!(!indices.is_empty(), "selection must not be empty");
        let vectors = self.vectors.select_rows(indices);
        let labels = indices.iter().map(|&i| self.labels[i]).collect();
        EmbeddingBatch { vectors, labels }
    }

    /// Stacks batches vertically, keeping row order.
    pub fn concat(batches: &[EmbeddingBatch]) -> Result<EmbeddingBatch> {
        let Some(first) = batches.first() else {
            return Err(DriftError::InsufficientSamples {
                required: 1,
                got: 0,
            });
        };
        let d = first.dim();
        if let Some(bad) = batches.iter().find(|b| b.dim() != d) {
            return Err(DriftError::Dimension {
                expected: d,
                got: bad.dim(),
            });
        }
        let m: usize = batches.iter().map(|b| b.len()).sum();
        let mut vectors = DMatrix::<f32>::zeros(m, d);
        let mut labels = Vec::with_capacity(m);
        let mut offset = 0;
        for b in batches {
            vectors.rows_mut(offset, b.len()).copy_from(&b.vectors);
            labels.extend_from_slice(&b.labels);
            offset += b.len();
        }
        Ok(EmbeddingBatch { vectors, labels })
    }

    /// The rows widened to double precision.
    pub fn to_f64(&self) -> DMatrix<f64> {
        self.vectors.map(f64::from)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_label_length_mismatch() {
        let v = DMatrix::<f32>::zeros(3, 2);
        assert!(matches!(
            EmbeddingBatch::new(v, vec![0, 1]),
            Err(DriftError::Dimension {
                expected: 3,
                got: 2
            })
        ));
    }

    #[test]
    fn rejects_non_finite() {
        let mut v = DMatrix::<f32>::zeros(2, 2);
        v[(1, 0)] = f32::NAN;
        let err = EmbeddingBatch::new(v, vec![0, 0]).unwrap_err();
        assert!(matches!(err, DriftError::InvalidInput(_)));
        assert!(err.to_string().contains("row 1"));
    }

    #[test]
    fn rejects_empty() {
        let v = DMatrix::<f32>::zeros(0, 4);
        assert!(EmbeddingBatch::new(v, vec![]).is_err());
    }

    #[test]
    fn select_and_concat() {
        let b = EmbeddingBatch::from_rows(
            &[vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 6.0]],
            vec![2, 0, 2],
        )
        .unwrap();
        assert_eq!(b.label_set(), vec![0, 2]);
        assert_eq!(b.rows_with_label(2), vec![0, 2]);
        let s = b.select(&[2, 2, 1]);
        assert_eq!(s.labels(), &[2, 2, 0]);
        assert_eq!(s.vectors()[(1, 1)], 6.0);
        let c = EmbeddingBatch::concat(&[b.clone(), s]).unwrap();
        assert_eq!(c.len(), 6);
        assert_eq!(c.vectors()[(3, 0)], 5.0);
        assert_eq!(c.labels()[5], 0);
    }
}
