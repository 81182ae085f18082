use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Outer block layout of an expanded profile: `n` blocks of side `inner`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockMeta {
    pub n: usize,
    #[serde(rename = "N")]
    pub inner: usize,
}

/// On-disk form of a profile: `{"matrix": [[...]], "n": int?, "N": int?}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileDocument {
    pub matrix: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, rename = "N", skip_serializing_if = "Option::is_none")]
    pub inner: Option<usize>,
}

/// Symmetric non-negative variance matrix `S`, optionally carrying an outer
/// block layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProfileDocument", into = "ProfileDocument")]
pub struct VarianceProfile {
    entries: DMatrix<f64>,
    block_meta: Option<BlockMeta>,
}

impl VarianceProfile {
    /// Build from row vectors, validating shape, sign and exact symmetry.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::from_rows_with_meta(rows, None)
    }

    pub fn from_rows_with_meta(rows: &[Vec<f64>], block_meta: Option<BlockMeta>) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 {
            return Err(Error::InvalidProfile("matrix is empty".into()));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::InvalidProfile(format!(
                    "matrix is not square: row {} has {} entries, expected {}",
                    i + 1,
                    row.len(),
                    dim
                )));
            }
        }
        let entries = DMatrix::from_fn(dim, dim, |i, j| rows[i][j]);
        Self::from_matrix(entries, block_meta)
    }

    pub fn from_matrix(entries: DMatrix<f64>, block_meta: Option<BlockMeta>) -> Result<Self> {
        let dim = entries.nrows();
        if dim == 0 || entries.ncols() != dim {
            return Err(Error::InvalidProfile(
                "matrix must be square and non-empty".into(),
            ));
        }
        for i in 0..dim {
            for j in 0..dim {
                let v = entries[(i, j)];
                if !v.is_finite() {
                    return Err(Error::InvalidProfile(format!(
                        "entry ({}, {}) is not finite",
                        i + 1,
                        j + 1
                    )));
                }
                if v < 0.0 {
                    return Err(Error::InvalidProfile(format!(
                        "negative entry {} at ({}, {})",
                        v,
                        i + 1,
                        j + 1
                    )));
                }
                if v != entries[(j, i)] {
                    return Err(Error::InvalidProfile(format!(
                        "asymmetric entries at ({}, {}) and ({}, {}): {} vs {}",
                        i + 1,
                        j + 1,
                        j + 1,
                        i + 1,
                        v,
                        entries[(j, i)]
                    )));
                }
            }
        }
        if let Some(meta) = block_meta {
            validate_blocks(&entries, meta)?;
        }
        Ok(Self {
            entries,
            block_meta,
        })
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[(i, j)]
    }

    pub fn block_meta(&self) -> Option<BlockMeta> {
        self.block_meta
    }

    /// Number of outer blocks: `n` from the block layout, else `dim`.
    pub fn outer_blocks(&self) -> usize {
        self.block_meta.map_or(self.dim(), |m| m.n)
    }

    /// Outer block (0-based) that component `k` (0-based) belongs to.
    pub fn block_of(&self, k: usize) -> usize {
        self.block_meta.map_or(k, |m| k / m.inner)
    }

    pub fn is_zero(&self, i: usize, j: usize) -> bool {
        self.entries[(i, j)] == 0.0
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim())
            .map(|i| (0..self.dim()).map(|j| self.entries[(i, j)]).collect())
            .collect()
    }

    /// Simultaneous row/column permutation: result has entries `s[perm[i]][perm[j]]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let dim = self.dim();
        if perm.len() != dim {
            return Err(Error::Precondition(format!(
                "permutation has length {}, expected {}",
                perm.len(),
                dim
            )));
        }
        let mut seen = vec![false; dim];
        for &p in perm {
            if p >= dim || seen[p] {
                return Err(Error::Precondition("not a permutation".into()));
            }
            seen[p] = true;
        }
        let entries = DMatrix::from_fn(dim, dim, |i, j| self.entries[(perm[i], perm[j])]);
        Ok(Self {
            entries,
            block_meta: None,
        })
    }

    /// Scaled copy `factor * S` (keeps the block layout).
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::from_matrix(&self.entries * factor, self.block_meta)
    }

    /// Largest row sum of `S`.
    pub fn max_row_sum(&self) -> f64 {
        self.entries
            .row_iter()
            .map(|r| r.iter().sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Spectral norm of `S`.
    pub fn spectral_norm(&self) -> f64 {
        crate::linalg::symmetric_spectral_norm(&self.entries)
    }

    pub fn to_document(&self) -> ProfileDocument {
        ProfileDocument {
            matrix: self.rows(),
            n: self.block_meta.map(|m| m.n),
            inner: self.block_meta.map(|m| m.inner),
        }
    }
}

fn validate_blocks(entries: &DMatrix<f64>, meta: BlockMeta) -> Result<()> {
    let dim = entries.nrows();
    if meta.n == 0 || meta.inner == 0 || meta.n * meta.inner != dim {
        return Err(Error::InvalidProfile(format!(
            "block metadata n={} N={} inconsistent with dimension {}",
            meta.n, meta.inner, dim
        )));
    }
    for bj in 0..meta.n {
        for bk in 0..meta.n {
            let mut zeros = 0usize;
            for a in 0..meta.inner {
                for b in 0..meta.inner {
                    if entries[(bj * meta.inner + a, bk * meta.inner + b)] == 0.0 {
                        zeros += 1;
                    }
                }
            }
            if zeros != 0 && zeros != meta.inner * meta.inner {
                return Err(Error::InvalidProfile(format!(
                    "block ({}, {}) mixes zero and positive entries",
                    bj + 1,
                    bk + 1
                )));
            }
        }
    }
    Ok(())
}

impl From<VarianceProfile> for ProfileDocument {
    fn from(p: VarianceProfile) -> Self {
        p.to_document()
    }
}

impl TryFrom<ProfileDocument> for VarianceProfile {
    type Error = Error;

    fn try_from(doc: ProfileDocument) -> Result<Self> {
        let dim = doc.matrix.len();
        let meta = match (doc.n, doc.inner) {
            (None, None) => None,
            (Some(n), Some(inner)) => Some(BlockMeta { n, inner }),
            (Some(n), None) if n > 0 && dim.is_multiple_of(n) => {
                Some(BlockMeta { n, inner: dim / n })
            }
            (None, Some(inner)) if inner > 0 && dim.is_multiple_of(inner) => Some(BlockMeta {
                n: dim / inner,
                inner,
            }),
            (n, inner) => {
                return Err(Error::InvalidProfile(format!(
                    "block metadata n={:?} N={:?} inconsistent with dimension {}",
                    n, inner, dim
                )))
            }
        };
        VarianceProfile::from_rows_with_meta(&doc.matrix, meta)
    }
}

/// Parse and validate a profile document.
pub fn load_profile(source: &str) -> Result<VarianceProfile> {
    let doc: ProfileDocument = serde_json::from_str(source)?;
    VarianceProfile::try_from(doc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loads_smallest_staircase() {
        let p = load_profile(r#"{"matrix": [[1,1],[1,0]]}"#).unwrap();
        assert_eq!(p.dim(), 2);
        assert!(p.block_meta().is_none());
    }

    #[test]
    fn loads_three_by_three_staircase() {
        let p = load_profile(r#"{"matrix": [[1,1,1],[1,1,0],[1,0,0]]}"#).unwrap();
        assert_eq!(p.dim(), 3);
        assert!(p.is_zero(2, 2) && !p.is_zero(0, 2));
    }

    #[test]
    fn rejects_asymmetric() {
        let err = load_profile(r#"{"matrix": [[1,2],[1,0]]}"#).unwrap_err();
        assert!(err.to_string().contains("asymmetric"), "{err}");
    }

    #[test]
    fn rejects_non_square() {
        assert!(matches!(
            load_profile(r#"{"matrix": [[1,2,3],[2,0,0]]}"#),
            Err(Error::InvalidProfile(_))
        ));
    }

    #[test]
    fn rejects_negative() {
        let err = load_profile(r#"{"matrix": [[1,-1],[-1,0]]}"#).unwrap_err();
        assert!(err.to_string().contains("negative"));
    }

    #[test]
    fn rejects_inconsistent_block_meta() {
        let err = load_profile(r#"{"matrix": [[1,1],[1,0]], "n": 3, "N": 1}"#).unwrap_err();
        assert!(err.to_string().contains("inconsistent"));
    }

    #[test]
    fn rejects_mixed_block() {
        let doc = r#"{"matrix": [[1,1,1,1],[1,1,1,0],[1,1,0,0],[1,0,0,0]], "n": 2, "N": 2}"#;
        let err = load_profile(doc).unwrap_err();
        assert!(err.to_string().contains("mixes"), "{err}");
    }

    #[test]
    fn accepts_uniform_blocks() {
        let doc = r#"{"matrix": [[1,1,2,2],[1,1,2,2],[2,2,0,0],[2,2,0,0]], "n": 2, "N": 2}"#;
        let p = load_profile(doc).unwrap();
        assert_eq!(p.block_meta(), Some(BlockMeta { n: 2, inner: 2 }));
        assert_eq!(p.block_of(3), 1);
    }

    #[test]
    fn rejects_garbage() {
        assert!(matches!(load_profile("not json"), Err(Error::Parse(_))));
    }
}
