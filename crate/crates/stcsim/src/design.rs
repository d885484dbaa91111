//! Linear designs over real variables: construction, evaluation, and the
//! structural checks (full diversity, conjugate-column structure, group
//! encodability) that decide whether a design is usable as a colocated or
//! relay space-time code.

use crate::mat::{c, CMat};
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DesignError {
    #[error("weight matrix {index} is {rows}x{cols}, expected {n}x{n}")]
    WeightDimension {
        index: usize,
        rows: usize,
        cols: usize,
        n: usize,
    },
    #[error("design has no weight matrices")]
    NoWeights,
    #[error("information vector has length {got}, design expects {expected}")]
    InfoLength { got: usize, expected: usize },
    #[error("design has {k} real variables, which is not even")]
    OddVariableCount { k: usize },
    #[error("column {column} mixes complex symbols and their conjugates: not a conjugate linear design")]
    MixedColumn { column: usize },
    #[error("block count must be even and positive, got {r}")]
    BadBlockDimension { r: usize },
    #[error("variable partition is invalid: {reason}")]
    BadPartition { reason: String },
    #[error("need at least two codewords, got {got}")]
    TooFewCodewords { got: usize },
    #[error("codeword {index} is {rows}x{cols}, expected {n}x{n}")]
    CodewordDimension {
        index: usize,
        rows: usize,
        cols: usize,
        n: usize,
    },
    #[error("design is {n}x{n} in {k} variables; one relay per column needs K = 2n")]
    RelayShape { n: usize, k: usize },
}

/// Real information vector feeding a design's variables.
#[derive(Debug, Clone, PartialEq)]
pub struct InfoVector(pub Vec<f64>);

impl InfoVector {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// Pairs consecutive coordinates into complex symbols:
    /// `s_j = x_{2j} + i x_{2j+1}` (zero-based).
    pub fn complex_symbols(&self) -> Vec<Complex64> {
        assert!(self.0.len() % 2 == 0, "odd-length info vector");
        self.0
            .chunks_exact(2)
            .map(|p| Complex64::new(p[0], p[1]))
            .collect()
    }
}

/// One column of a conjugate linear design: the column of the evaluated
/// design equals `b * s` when `conjugated` is false and `b * conj(s)` when
/// true, with `s` the complex-symbol vector of the information vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ConjugateColumn {
    pub b: CMat,
    pub conjugated: bool,
}

/// Square linear design in `K` real variables, stored as its weight matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearDesign {
    n: usize,
    weights: Vec<CMat>,
    conj_columns: Option<Vec<bool>>,
}

impl LinearDesign {
    /// Builds a design from its weight matrices. All weights must be `n` x `n`.
    pub fn new(n: usize, weights: Vec<CMat>) -> Result<Self, DesignError> {
        if weights.is_empty() {
            return Err(DesignError::NoWeights);
        }
        for (index, w) in weights.iter().enumerate() {
            if w.rows() != n || w.cols() != n {
                return Err(DesignError::WeightDimension {
                    index,
                    rows: w.rows(),
                    cols: w.cols(),
                    n,
                });
            }
        }
        Ok(LinearDesign {
            n,
            weights,
            conj_columns: None,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of real variables.
    pub fn k(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[CMat] {
        &self.weights
    }

    pub fn weight(&self, i: usize) -> &CMat {
        &self.weights[i]
    }

    /// Per-column conjugation flags, when the design was built with them.
    pub fn conj_columns(&self) -> Option<&[bool]> {
        self.conj_columns.as_deref()
    }

    /// Evaluates the design at an information vector: the weighted sum of
    /// the weight matrices.
    pub fn evaluate(&self, x: &InfoVector) -> Result<CMat, DesignError> {
        if x.len() != self.k() {
            return Err(DesignError::InfoLength {
                got: x.len(),
                expected: self.k(),
            });
        }
        let mut out = CMat::zeros(self.n, self.n);
        for (xi, w) in x.0.iter().zip(&self.weights) {
            if *xi == 0.0 {
                continue;
            }
            for r in 0..self.n {
                for col in 0..self.n {
                    out[(r, col)] += w[(r, col)] * *xi;
                }
            }
        }
        Ok(out)
    }

    /// Splits the design into per-column generators over the complex symbols
    /// `s_j = x_{2j} + i x_{2j+1}`. Each column must be linear in either the
    /// symbols or their conjugates; a column mixing the two is rejected.
    ///
    /// The split is detected by evaluating the design at the real coordinate
    /// basis vectors and testing each column against the linear and
    /// antilinear hypotheses.
    pub fn extract_relay_columns(&self) -> Result<Vec<ConjugateColumn>, DesignError> {
        let k = self.k();
        if k % 2 != 0 {
            return Err(DesignError::OddVariableCount { k });
        }
        let half = k / 2;
        let mut out = Vec::with_capacity(self.n);
        for col in 0..self.n {
            // Column col of D(x) is sum_j (x_{2j} u_j + x_{2j+1} w_j) with
            // u_j, w_j the column slices of the paired weights. In terms of
            // s_j it is sum_j ((u_j - i w_j)/2) s_j + ((u_j + i w_j)/2) s_j*.
            let mut linear = CMat::zeros(self.n, half);
            let mut anti = CMat::zeros(self.n, half);
            let mut linear_norm = 0.0;
            let mut anti_norm = 0.0;
            for j in 0..half {
                let wu = &self.weights[2 * j];
                let ww = &self.weights[2 * j + 1];
                for r in 0..self.n {
                    let u = wu[(r, col)];
                    let w = ww[(r, col)];
                    let lin = (u - Complex64::i() * w) * 0.5;
                    let ant = (u + Complex64::i() * w) * 0.5;
                    linear[(r, j)] = lin;
                    anti[(r, j)] = ant;
                    linear_norm += lin.norm_sqr();
                    anti_norm += ant.norm_sqr();
                }
            }
            // Structural zeros only: weights are exact constructions, so a
            // clean column has one side identically zero.
            const TOL: f64 = 1e-12;
            let scale = (linear_norm + anti_norm).sqrt().max(1.0);
            let lin_zero = linear_norm.sqrt() <= TOL * scale;
            let anti_zero = anti_norm.sqrt() <= TOL * scale;
            let column = if anti_zero {
                // Covers the all-zero column as well: treated as linear.
                ConjugateColumn {
                    b: linear,
                    conjugated: false,
                }
            } else if lin_zero {
                ConjugateColumn {
                    b: anti,
                    conjugated: true,
                }
            } else {
                return Err(DesignError::MixedColumn { column: col });
            };
            out.push(column);
        }
        Ok(out)
    }
}

/// The 2x2 rate-one complex orthogonal design in four real variables,
/// `[[x1+ix2, -x3+ix4], [x3+ix4, x1-ix2]]`. Column one is linear in the
/// complex symbols, column two in their conjugates.
pub fn alamouti() -> LinearDesign {
    let weights = vec![
        CMat::identity(2),
        CMat::from_rows(&[vec![c(0.0, 1.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(0.0, -1.0)]]),
        CMat::from_rows(&[vec![c(0.0, 0.0), c(-1.0, 0.0)], vec![c(1.0, 0.0), c(0.0, 0.0)]]),
        CMat::from_rows(&[vec![c(0.0, 0.0), c(0.0, 1.0)], vec![c(0.0, 1.0), c(0.0, 0.0)]]),
    ];
    LinearDesign {
        n: 2,
        weights,
        conj_columns: Some(vec![false, true]),
    }
}

/// Rate-one coordinate-interleaved orthogonal design of even dimension `r`:
/// a block-diagonal chain of r/2 Alamouti-form 2x2 blocks over 2r real
/// variables, block k using variables x_{4k-3}..x_{4k} (one-based).
/// `pciod(2)` coincides with `alamouti()`.
pub fn pciod(r: usize) -> Result<LinearDesign, DesignError> {
    if r == 0 || r % 2 != 0 {
        return Err(DesignError::BadBlockDimension { r });
    }
    let blocks = r / 2;
    let base = alamouti();
    let mut weights = Vec::with_capacity(2 * r);
    let mut conj_columns = Vec::with_capacity(r);
    for b in 0..blocks {
        for local in 0..4 {
            let mut w = CMat::zeros(r, r);
            for br in 0..2 {
                for bc in 0..2 {
                    w[(2 * b + br, 2 * b + bc)] = base.weight(local)[(br, bc)];
                }
            }
            weights.push(w);
        }
        conj_columns.push(false);
        conj_columns.push(true);
    }
    Ok(LinearDesign {
        n: r,
        weights,
        conj_columns: Some(conj_columns),
    })
}

/// Outcome of the pairwise difference-rank check.
#[derive(Debug, Clone)]
pub struct DiversityReport {
    pub n: usize,
    pub pairs_checked: usize,
    /// Unordered index pairs whose difference is rank deficient.
    pub violations: Vec<(usize, usize)>,
}

impl DiversityReport {
    pub fn pass(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks that every pairwise codeword difference has full rank `n`,
/// the criterion for full diversity of both the colocated training code
/// and the relay code built on these codewords.
pub fn full_diversity_check(codewords: &[CMat], tol: f64) -> Result<DiversityReport, DesignError> {
    if codewords.len() < 2 {
        return Err(DesignError::TooFewCodewords {
            got: codewords.len(),
        });
    }
    let n = codewords[0].rows();
    for (index, cw) in codewords.iter().enumerate() {
        if cw.rows() != n || cw.cols() != n {
            return Err(DesignError::CodewordDimension {
                index,
                rows: cw.rows(),
                cols: cw.cols(),
                n,
            });
        }
    }
    let mut violations = Vec::new();
    let mut pairs_checked = 0;
    for i in 0..codewords.len() {
        for j in (i + 1)..codewords.len() {
            pairs_checked += 1;
            let diff = &codewords[i] - &codewords[j];
            if diff.rank_tol(tol) != n {
                violations.push((i, j));
            }
        }
    }
    Ok(DiversityReport {
        n,
        pairs_checked,
        violations,
    })
}

/// Structural check for g-group encodability: the partition must cover the
/// variable indices `0..k` exactly, and all groups must have size `k / g`.
/// Signal-set independence across groups is the codebook layer's job.
pub fn group_encodable_check(
    design: &LinearDesign,
    partition: &[Vec<usize>],
) -> Result<bool, DesignError> {
    let k = design.k();
    if partition.is_empty() {
        return Err(DesignError::BadPartition {
            reason: "empty partition".into(),
        });
    }
    let mut seen = vec![false; k];
    for group in partition {
        for &idx in group {
            if idx >= k {
                return Err(DesignError::BadPartition {
                    reason: format!("index {idx} out of range for {k} variables"),
                });
            }
            if seen[idx] {
                return Err(DesignError::BadPartition {
                    reason: format!("index {idx} appears twice"),
                });
            }
            seen[idx] = true;
        }
    }
    if let Some(missing) = seen.iter().position(|&s| !s) {
        return Err(DesignError::BadPartition {
            reason: format!("index {missing} is not covered"),
        });
    }
    let g = partition.len();
    if k % g != 0 {
        return Ok(false);
    }
    let want = k / g;
    Ok(partition.iter().all(|group| group.len() == want))
}
