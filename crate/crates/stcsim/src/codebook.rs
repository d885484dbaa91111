//! Finite unitary codebooks: multidimensional signal sets, codebook
//! construction from a design, the two-group rotated-PSK set for
//! coordinate-interleaved designs, figures of merit, and a plain-text
//! interchange format.

use crate::design::{DesignError, InfoVector, LinearDesign};
use crate::mat::CMat;
use num_complex::Complex64;
use std::collections::HashSet;
use std::f64::consts::TAU;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use thiserror::Error;

/// Maximum entrywise distance below which two codewords count as colliding.
/// Constellation coordinates are exact trig values, so a collision indicates
/// a construction bug rather than numerical noise.
pub const DISTINCTNESS_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum CodebookError {
    #[error("PSK order must be at least 2, got {m}")]
    PskOrder { m: usize },
    #[error("signal set covers {signal_k} variables, design has {design_k}")]
    SignalDimension { signal_k: usize, design_k: usize },
    #[error("codewords {first} and {second} coincide (info vectors {iv_first} and {iv_second})")]
    DuplicateCodeword {
        first: usize,
        second: usize,
        iv_first: String,
        iv_second: String,
    },
    #[error("leading rotation of group {group} must be zero, got {angle}")]
    LeadingRotation { group: usize, angle: f64 },
    #[error("expected {expected} rotation angles per group, got {got}")]
    RotationCount { expected: usize, got: usize },
    #[error("invalid signal set: {reason}")]
    BadSignalSet { reason: String },
    #[error("design error: {0}")]
    Design(#[from] DesignError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("info vectors do not span the design's variable space; cannot recover weight matrices")]
    DegenerateInfoVectors,
    #[error("codewords are not a linear function of the info vectors (residual {residual:.3e})")]
    NotLinear { residual: f64 },
}

/// One independently-encoded group of real variables.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalGroup {
    /// Zero-based variable indices owned by this group, in coordinate order.
    pub var_indices: Vec<usize>,
    /// Candidate values for those coordinates; each point has the group's length.
    pub points: Vec<Vec<f64>>,
}

/// Multidimensional signal set as a Cartesian product of groups.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalSet {
    k: usize,
    groups: Vec<SignalGroup>,
}

impl SignalSet {
    pub fn new(k: usize, groups: Vec<SignalGroup>) -> Result<Self, CodebookError> {
        if groups.is_empty() {
            return Err(CodebookError::BadSignalSet {
                reason: "no groups".into(),
            });
        }
        let mut seen = vec![false; k];
        for (gi, group) in groups.iter().enumerate() {
            if group.points.is_empty() {
                return Err(CodebookError::BadSignalSet {
                    reason: format!("group {gi} has no points"),
                });
            }
            for &idx in &group.var_indices {
                if idx >= k {
                    return Err(CodebookError::BadSignalSet {
                        reason: format!("group {gi} references variable {idx} out of 0..{k}"),
                    });
                }
                if seen[idx] {
                    return Err(CodebookError::BadSignalSet {
                        reason: format!("variable {idx} owned by two groups"),
                    });
                }
                seen[idx] = true;
            }
            for point in &group.points {
                if point.len() != group.var_indices.len() {
                    return Err(CodebookError::BadSignalSet {
                        reason: format!(
                            "group {gi} point has length {}, expected {}",
                            point.len(),
                            group.var_indices.len()
                        ),
                    });
                }
            }
        }
        if let Some(missing) = seen.iter().position(|&s| !s) {
            return Err(CodebookError::BadSignalSet {
                reason: format!("variable {missing} not covered by any group"),
            });
        }
        Ok(SignalSet { k, groups })
    }

    /// Single-group set whose points are full-length vectors.
    pub fn single_group(points: Vec<Vec<f64>>) -> Result<Self, CodebookError> {
        let k = points.first().map(|p| p.len()).unwrap_or(0);
        SignalSet::new(
            k,
            vec![SignalGroup {
                var_indices: (0..k).collect(),
                points,
            }],
        )
    }

    /// One group per complex symbol, each drawing independently from an
    /// M-ary PSK constellation. Symbol j owns variables (2j, 2j+1).
    pub fn complex_psk(num_symbols: usize, m: usize) -> Result<Self, CodebookError> {
        let constellation: Vec<Vec<f64>> = psk(m)?.into_iter().map(|p| p.to_vec()).collect();
        let groups = (0..num_symbols)
            .map(|j| SignalGroup {
                var_indices: vec![2 * j, 2 * j + 1],
                points: constellation.clone(),
            })
            .collect();
        SignalSet::new(2 * num_symbols, groups)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn groups(&self) -> &[SignalGroup] {
        &self.groups
    }

    pub fn group_count(&self) -> usize {
        self.groups.len()
    }

    /// Total number of information vectors in the Cartesian product.
    pub fn cardinality(&self) -> usize {
        self.groups.iter().map(|g| g.points.len()).product()
    }

    /// The variable-index partition induced by the groups.
    pub fn partition(&self) -> Vec<Vec<usize>> {
        self.groups.iter().map(|g| g.var_indices.clone()).collect()
    }

    /// Scatters one point choice per group into a full info vector.
    pub fn assemble(&self, choice: &[usize]) -> InfoVector {
        assert_eq!(choice.len(), self.groups.len());
        let mut x = vec![0.0; self.k];
        for (group, &pick) in self.groups.iter().zip(choice) {
            for (coord, &idx) in group.var_indices.iter().enumerate() {
                x[idx] = group.points[pick][coord];
            }
        }
        InfoVector(x)
    }

    /// Mixed-radix strides for lexicographic enumeration, group 0 slowest.
    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1usize; self.groups.len()];
        for g in (0..self.groups.len().saturating_sub(1)).rev() {
            strides[g] = strides[g + 1] * self.groups[g + 1].points.len();
        }
        strides
    }
}

/// M-ary PSK constellation as (cos, sin) pairs on the unit circle.
pub fn psk(m: usize) -> Result<Vec<[f64; 2]>, CodebookError> {
    if m < 2 {
        return Err(CodebookError::PskOrder { m });
    }
    Ok((0..m)
        .map(|k| {
            let angle = TAU * k as f64 / m as f64;
            [angle.cos(), angle.sin()]
        })
        .collect())
}

/// Default rotation schedule for [`pciod_signal_set`]: block k (zero-based)
/// rotated by `k * pi / (m * r / 2)`, spreading difference phases.
pub fn default_pciod_rotations(r: usize, m: usize) -> Vec<f64> {
    let blocks = r / 2;
    (0..blocks)
        .map(|k| k as f64 * std::f64::consts::PI / (m as f64 * blocks as f64))
        .collect()
}

/// Two-group signal set for the coordinate-interleaved design of dimension
/// `r`: odd complex symbols follow the choice of the first symbol rotated by
/// `rotations_odd`, even symbols follow the second symbol rotated by
/// `rotations_even`. Both free symbols draw from M-ary PSK, so every
/// coordinate pair has unit modulus. The leading angle of each list must be
/// zero (the free symbols themselves are unrotated).
pub fn pciod_signal_set(
    r: usize,
    m: usize,
    rotations_odd: &[f64],
    rotations_even: &[f64],
) -> Result<SignalSet, CodebookError> {
    if r == 0 || r % 2 != 0 {
        return Err(DesignError::BadBlockDimension { r }.into());
    }
    let blocks = r / 2;
    for rotations in [rotations_odd, rotations_even] {
        if rotations.len() != blocks {
            return Err(CodebookError::RotationCount {
                expected: blocks,
                got: rotations.len(),
            });
        }
    }
    for (gi, rotations) in [rotations_odd, rotations_even].into_iter().enumerate() {
        if rotations[0] != 0.0 {
            return Err(CodebookError::LeadingRotation {
                group: gi,
                angle: rotations[0],
            });
        }
    }
    let constellation = psk(m)?;
    // Block b of the design uses variables (4b, 4b+1) for its odd symbol and
    // (4b+2, 4b+3) for its even symbol.
    let build_group = |offset: usize, rotations: &[f64]| -> SignalGroup {
        let var_indices = (0..blocks)
            .flat_map(|b| [4 * b + offset, 4 * b + offset + 1])
            .collect();
        let points = constellation
            .iter()
            .map(|&[re, im]| {
                let u = Complex64::new(re, im);
                rotations
                    .iter()
                    .flat_map(|&theta| {
                        let z = Complex64::from_polar(1.0, theta) * u;
                        [z.re, z.im]
                    })
                    .collect()
            })
            .collect();
        SignalGroup {
            var_indices,
            points,
        }
    };
    SignalSet::new(
        2 * r,
        vec![
            build_group(0, rotations_odd),
            build_group(2, rotations_even),
        ],
    )
}

/// Finite space-time codebook: the design, the signal set that enumerates
/// it, and the evaluated (globally scaled) codeword matrices.
#[derive(Debug, Clone)]
pub struct Codebook {
    n: usize,
    scale: f64,
    design: LinearDesign,
    signal: SignalSet,
    codewords: Vec<CMat>,
    info_vectors: Vec<InfoVector>,
    /// True when enumeration order is the canonical lexicographic order over
    /// group indices (always the case for built codebooks; imported files
    /// may use any order).
    lex_order: bool,
}

impl Codebook {
    /// Enumerates the signal set lexicographically (group 0 slowest),
    /// evaluates the design at each point and applies the global scale.
    /// Rejects colliding codewords.
    pub fn build(
        design: LinearDesign,
        signal: SignalSet,
        scale: f64,
    ) -> Result<Self, CodebookError> {
        if signal.k() != design.k() {
            return Err(CodebookError::SignalDimension {
                signal_k: signal.k(),
                design_k: design.k(),
            });
        }
        let sizes: Vec<usize> = signal.groups().iter().map(|g| g.points.len()).collect();
        let strides = signal.strides();
        let total = signal.cardinality();
        let mut info_vectors = Vec::with_capacity(total);
        let mut codewords = Vec::with_capacity(total);
        for lin in 0..total {
            let choice: Vec<usize> = (0..sizes.len())
                .map(|g| (lin / strides[g]) % sizes[g])
                .collect();
            let iv = signal.assemble(&choice);
            let cw = design.evaluate(&iv)?.scale(scale);
            info_vectors.push(iv);
            codewords.push(cw);
        }
        check_distinct(&codewords, &info_vectors)?;
        Ok(Codebook {
            n: design.n(),
            scale,
            design,
            signal,
            codewords,
            info_vectors,
            lex_order: true,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.codewords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codewords.is_empty()
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn design(&self) -> &LinearDesign {
        &self.design
    }

    pub fn signal(&self) -> &SignalSet {
        &self.signal
    }

    pub fn codewords(&self) -> &[CMat] {
        &self.codewords
    }

    pub fn codeword(&self, i: usize) -> &CMat {
        &self.codewords[i]
    }

    pub fn info_vectors(&self) -> &[InfoVector] {
        &self.info_vectors
    }

    pub fn info_vector(&self, i: usize) -> &InfoVector {
        &self.info_vectors[i]
    }

    pub fn group_count(&self) -> usize {
        self.signal.group_count()
    }

    pub fn lex_order(&self) -> bool {
        self.lex_order
    }

    /// Codebook index of the info vector assembled from per-group picks.
    /// Falls back to scanning when the enumeration order is not canonical.
    pub fn index_of_choice(&self, choice: &[usize]) -> usize {
        if self.lex_order {
            let strides = self.signal.strides();
            choice.iter().zip(&strides).map(|(c, s)| c * s).sum()
        } else {
            let iv = self.signal.assemble(choice);
            self.info_vectors
                .iter()
                .position(|v| v == &iv)
                .expect("assembled info vector not present in codebook")
        }
    }

    /// Minimum normalized determinant distance over codeword pairs:
    /// `min |det((Ci - Cj)^H (Ci - Cj))|^(1/n)`. A rank-deficient pair
    /// yields zero rather than an error.
    pub fn coding_gain(&self) -> f64 {
        let mut gain = f64::INFINITY;
        for i in 0..self.codewords.len() {
            for j in (i + 1)..self.codewords.len() {
                let diff = &self.codewords[i] - &self.codewords[j];
                if diff.rank_tol(1e-9) < self.n {
                    return 0.0;
                }
                let d = diff.det().norm();
                gain = gain.min((d * d).powf(1.0 / self.n as f64));
            }
        }
        if gain.is_finite() {
            gain
        } else {
            0.0
        }
    }
}

fn format_info(iv: &InfoVector) -> String {
    let mut s = String::from("[");
    for (i, v) in iv.0.iter().enumerate() {
        if i > 0 {
            s.push_str(", ");
        }
        let _ = write!(s, "{v}");
    }
    s.push(']');
    s
}

fn check_distinct(codewords: &[CMat], info_vectors: &[InfoVector]) -> Result<(), CodebookError> {
    for i in 0..codewords.len() {
        for j in (i + 1)..codewords.len() {
            if codewords[i].max_abs_diff(&codewords[j]) < DISTINCTNESS_TOL {
                return Err(CodebookError::DuplicateCodeword {
                    first: i,
                    second: j,
                    iv_first: format_info(&info_vectors[i]),
                    iv_second: format_info(&info_vectors[j]),
                });
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Plain-text interchange format
// ---------------------------------------------------------------------------

/// Serializes a codebook: header `n K L g`, then one block per codeword
/// (info vector line followed by the n codeword rows as "re im" pairs),
/// blocks separated by blank lines.
pub fn write_codebook(cb: &Codebook) -> String {
    let mut out = String::new();
    let k = cb.design.k();
    let _ = writeln!(out, "{} {} {} {}", cb.n, k, cb.len(), cb.group_count());
    for (iv, cw) in cb.info_vectors.iter().zip(&cb.codewords) {
        let _ = writeln!(out);
        let line: Vec<String> = iv.0.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(out, "{}", line.join(" "));
        for r in 0..cb.n {
            let row: Vec<String> = (0..cb.n)
                .map(|c| {
                    let z = cw[(r, c)];
                    format!("{} {}", z.re, z.im)
                })
                .collect();
            let _ = writeln!(out, "{}", row.join(" "));
        }
    }
    out
}

pub fn save_codebook(cb: &Codebook, path: &Path) -> Result<(), CodebookError> {
    fs::write(path, write_codebook(cb))?;
    Ok(())
}

/// Parses the text format produced by [`write_codebook`]. Returns the
/// codebook and the group count declared in the header. The weight matrices
/// are recovered from the (info vector, codeword) pairs by least squares;
/// the group structure is re-inferred from the info vectors.
pub fn parse_codebook(text: &str) -> Result<(Codebook, usize), CodebookError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    let (line_no, header) = lines.next().ok_or(CodebookError::Parse {
        line: 0,
        reason: "empty file".into(),
    })?;
    let header_fields: Vec<usize> = header
        .split_whitespace()
        .map(|t| {
            t.parse().map_err(|_| CodebookError::Parse {
                line: line_no,
                reason: format!("bad header field {t:?}"),
            })
        })
        .collect::<Result<_, _>>()?;
    let &[n, k, l, g] = header_fields.as_slice() else {
        return Err(CodebookError::Parse {
            line: line_no,
            reason: "header must be \"n K L g\"".into(),
        });
    };
    if n == 0 || k == 0 || l == 0 || g == 0 {
        return Err(CodebookError::Parse {
            line: line_no,
            reason: "header fields must be positive".into(),
        });
    }

    let parse_floats = |line_no: usize, line: &str, expected: usize| -> Result<Vec<f64>, CodebookError> {
        let vals: Vec<f64> = line
            .split_whitespace()
            .map(|t| {
                t.parse().map_err(|_| CodebookError::Parse {
                    line: line_no,
                    reason: format!("bad number {t:?}"),
                })
            })
            .collect::<Result<_, _>>()?;
        if vals.len() != expected {
            return Err(CodebookError::Parse {
                line: line_no,
                reason: format!("expected {expected} values, got {}", vals.len()),
            });
        }
        Ok(vals)
    };

    let mut info_vectors = Vec::with_capacity(l);
    let mut codewords = Vec::with_capacity(l);
    for _ in 0..l {
        let (ln, line) = lines.next().ok_or(CodebookError::Parse {
            line: 0,
            reason: "unexpected end of file in info vector".into(),
        })?;
        info_vectors.push(InfoVector(parse_floats(ln, line, k)?));
        let mut cw = CMat::zeros(n, n);
        for r in 0..n {
            let (ln, line) = lines.next().ok_or(CodebookError::Parse {
                line: 0,
                reason: "unexpected end of file in codeword rows".into(),
            })?;
            let vals = parse_floats(ln, line, 2 * n)?;
            for c in 0..n {
                cw[(r, c)] = Complex64::new(vals[2 * c], vals[2 * c + 1]);
            }
        }
        codewords.push(cw);
    }
    if let Some((ln, _)) = lines.next() {
        return Err(CodebookError::Parse {
            line: ln,
            reason: "trailing content after last codeword".into(),
        });
    }

    check_distinct(&codewords, &info_vectors)?;
    let design = fit_design(n, &info_vectors, &codewords)?;
    let signal = infer_signal_set(&info_vectors, k)?;
    Ok((
        Codebook {
            n,
            scale: 1.0,
            design,
            signal,
            codewords,
            info_vectors,
            lex_order: false,
        },
        g,
    ))
}

pub fn load_codebook(path: &Path) -> Result<(Codebook, usize), CodebookError> {
    let text = fs::read_to_string(path)?;
    parse_codebook(&text)
}

/// Recovers the weight matrices of the design generating `codewords` from
/// `info_vectors` by least squares, entry by entry. Requires the info
/// vectors to span the K-dimensional variable space.
pub fn fit_design(
    n: usize,
    info_vectors: &[InfoVector],
    codewords: &[CMat],
) -> Result<LinearDesign, CodebookError> {
    let k = info_vectors[0].len();
    let l = info_vectors.len();
    // Normal equations: (X^T X) A = X^T C for each codeword entry, with X
    // the L x K real matrix of info vectors.
    let gram = CMat::from_fn(k, k, |a, b| {
        let dot: f64 = info_vectors.iter().map(|iv| iv.0[a] * iv.0[b]).sum();
        Complex64::new(dot, 0.0)
    });
    let mut rhs = CMat::zeros(k, n * n);
    for j in 0..k {
        for r in 0..n {
            for c in 0..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for li in 0..l {
                    acc += codewords[li][(r, c)] * info_vectors[li].0[j];
                }
                rhs[(j, r * n + c)] = acc;
            }
        }
    }
    let solution = gram
        .solve(&rhs)
        .map_err(|_| CodebookError::DegenerateInfoVectors)?;
    let weights: Vec<CMat> = (0..k)
        .map(|j| CMat::from_fn(n, n, |r, c| solution[(j, r * n + c)]))
        .collect();
    let design = LinearDesign::new(n, weights)?;
    let mut residual = 0.0f64;
    for (iv, cw) in info_vectors.iter().zip(codewords) {
        let rebuilt = design.evaluate(iv)?;
        residual = residual.max(rebuilt.max_abs_diff(cw));
    }
    let scale = codewords
        .iter()
        .map(|cw| cw.max_abs())
        .fold(1.0f64, f64::max);
    if residual > 1e-9 * scale {
        return Err(CodebookError::NotLinear { residual });
    }
    Ok(design)
}

/// Finest valid grouping of the variable indices such that the info vectors
/// factor as a Cartesian product across groups. Coordinates are compared by
/// exact bit pattern (they are shared trig constants, not noisy data).
/// Falls back to a single group when no finer factorization holds.
pub fn infer_signal_set(info_vectors: &[InfoVector], k: usize) -> Result<SignalSet, CodebookError> {
    let l = info_vectors.len();
    let bits = |li: usize, col: usize| info_vectors[li].0[col].to_bits();
    let distinct_single: Vec<usize> = (0..k)
        .map(|col| {
            let set: HashSet<u64> = (0..l).map(|li| bits(li, col)).collect();
            set.len()
        })
        .collect();
    // Union coordinates that fail the pairwise product test.
    let mut parent: Vec<usize> = (0..k).collect();
    fn find(parent: &mut Vec<usize>, i: usize) -> usize {
        if parent[i] != i {
            let root = find(parent, parent[i]);
            parent[i] = root;
        }
        parent[i]
    }
    for a in 0..k {
        for b in (a + 1)..k {
            let pairs: HashSet<(u64, u64)> = (0..l).map(|li| (bits(li, a), bits(li, b))).collect();
            if pairs.len() != distinct_single[a] * distinct_single[b] {
                let ra = find(&mut parent, a);
                let rb = find(&mut parent, b);
                parent[ra] = rb;
            }
        }
    }
    let mut components: Vec<Vec<usize>> = Vec::new();
    let mut root_of: Vec<Option<usize>> = vec![None; k];
    for idx in 0..k {
        let root = find(&mut parent, idx);
        match root_of[root] {
            Some(pos) => components[pos].push(idx),
            None => {
                root_of[root] = Some(components.len());
                components.push(vec![idx]);
            }
        }
    }

    let single_fallback = || {
        SignalSet::single_group(info_vectors.iter().map(|iv| iv.0.clone()).collect())
    };
    if components.len() == 1 {
        return single_fallback();
    }
    // Group point lists: distinct projections in first-occurrence order.
    let mut groups = Vec::with_capacity(components.len());
    let mut product = 1usize;
    for comp in &components {
        let mut seen: HashSet<Vec<u64>> = HashSet::new();
        let mut points = Vec::new();
        for li in 0..l {
            let key: Vec<u64> = comp.iter().map(|&c| bits(li, c)).collect();
            if seen.insert(key) {
                points.push(comp.iter().map(|&c| info_vectors[li].0[c]).collect());
            }
        }
        product = product.saturating_mul(points.len());
        groups.push(SignalGroup {
            var_indices: comp.clone(),
            points,
        });
    }
    // The factorization is genuine only if the product of the per-group
    // cardinalities matches the codebook size.
    if product != l {
        return single_fallback();
    }
    SignalSet::new(k, groups)
}

/// Whether a partition with the given group sizes can be coarsened into `g`
/// groups of `k / g` variables each (first-fit decreasing packing). Used to
/// validate the group count declared in an imported codebook header against
/// the finest factorization found in its info vectors.
pub fn supports_group_count(finest_sizes: &[usize], g: usize, k: usize) -> bool {
    if g == 0 || k % g != 0 {
        return false;
    }
    if g == 1 {
        return true;
    }
    let capacity = k / g;
    let mut sizes: Vec<usize> = finest_sizes.to_vec();
    sizes.sort_unstable_by(|a, b| b.cmp(a));
    let mut bins = vec![0usize; g];
    'outer: for size in sizes {
        for bin in bins.iter_mut() {
            if *bin + size <= capacity {
                *bin += size;
                continue 'outer;
            }
        }
        return false;
    }
    bins.iter().all(|&b| b == capacity)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::{alamouti, full_diversity_check, group_encodable_check, pciod};
    use std::f64::consts::{FRAC_PI_8, PI};

    #[test]
    fn psk_examples() {
        let bpsk = psk(2).unwrap();
        assert_eq!(bpsk[0], [1.0, 0.0]);
        assert!((bpsk[1][0] + 1.0).abs() < 1e-15 && bpsk[1][1].abs() < 1e-15);

        let qpsk = psk(4).unwrap();
        let expected = [[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]];
        for (p, e) in qpsk.iter().zip(&expected) {
            assert!((p[0] - e[0]).abs() < 1e-15 && (p[1] - e[1]).abs() < 1e-15);
        }
        for p in psk(7).unwrap() {
            assert!((p[0] * p[0] + p[1] * p[1] - 1.0).abs() < 1e-15);
        }
        assert!(matches!(psk(1), Err(CodebookError::PskOrder { m: 1 })));
    }

    #[test]
    fn alamouti_qpsk_is_unitary() {
        let cb = Codebook::build(
            alamouti(),
            SignalSet::complex_psk(2, 4).unwrap(),
            std::f64::consts::FRAC_1_SQRT_2,
        )
        .unwrap();
        assert_eq!(cb.len(), 16);
        for cw in cb.codewords() {
            assert!(cw.is_unitary(1e-12).unwrap());
        }
        let report = full_diversity_check(cb.codewords(), 1e-9).unwrap();
        assert!(report.pass());
        assert_eq!(report.pairs_checked, 120);
    }

    #[test]
    fn duplicate_signal_point_is_rejected() {
        let signal = SignalSet::single_group(vec![
            vec![1.0, 0.0, 0.0, 0.0],
            vec![1.0, 0.0, 0.0, 0.0],
        ])
        .unwrap();
        let err = Codebook::build(alamouti(), signal, 1.0).unwrap_err();
        assert!(matches!(
            err,
            CodebookError::DuplicateCodeword { first: 0, second: 1, .. }
        ));
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let err = Codebook::build(alamouti(), SignalSet::complex_psk(3, 2).unwrap(), 1.0).unwrap_err();
        assert!(matches!(err, CodebookError::SignalDimension { signal_k: 6, design_k: 4 }));
    }

    #[test]
    fn pciod_signal_set_smallest_instance() {
        let set = pciod_signal_set(2, 4, &[0.0], &[0.0]).unwrap();
        assert_eq!(set.group_count(), 2);
        assert_eq!(set.groups()[0].points.len(), 4);
        assert_eq!(set.groups()[1].points.len(), 4);
        assert_eq!(set.cardinality(), 16);
        assert_eq!(set.groups()[0].var_indices, vec![0, 1]);
        assert_eq!(set.groups()[1].var_indices, vec![2, 3]);
    }

    #[test]
    fn pciod_signal_set_rejects_nonzero_leading_rotation() {
        let err = pciod_signal_set(4, 4, &[FRAC_PI_8, 0.0], &[0.0, 0.0]).unwrap_err();
        assert!(matches!(err, CodebookError::LeadingRotation { group: 0, .. }));
        let err = pciod_signal_set(4, 4, &[0.0], &[0.0, 0.0]).unwrap_err();
        assert!(matches!(err, CodebookError::RotationCount { expected: 2, got: 1 }));
    }

    #[test]
    fn pciod_codebook_unitary_and_fully_diverse() {
        let rot = [0.0, FRAC_PI_8];
        let set = pciod_signal_set(4, 4, &rot, &rot).unwrap();
        let cb = Codebook::build(pciod(4).unwrap(), set, std::f64::consts::FRAC_1_SQRT_2).unwrap();
        assert_eq!(cb.len(), 16);
        for cw in cb.codewords() {
            assert!(cw.is_unitary(1e-12).unwrap());
        }
        let report = full_diversity_check(cb.codewords(), 1e-9).unwrap();
        assert!(report.pass(), "violations: {:?}", report.violations);
        assert!(group_encodable_check(cb.design(), &cb.signal().partition()).unwrap());
    }

    #[test]
    fn pciod_full_diversity_for_arbitrary_rotations() {
        // Full diversity holds for every rotation schedule: rotation is a
        // bijection on the circle, so any differing free symbol keeps each
        // block difference nonsingular. Spot-checked over R and M.
        let angles = [0.9, -2.3, 0.4];
        for r in [2usize, 4] {
            for m in [2usize, 4] {
                let blocks = r / 2;
                let rot_odd: Vec<f64> = (0..blocks)
                    .map(|b| if b == 0 { 0.0 } else { angles[b % angles.len()] })
                    .collect();
                let rot_even: Vec<f64> = (0..blocks)
                    .map(|b| if b == 0 { 0.0 } else { angles[(b + 1) % angles.len()] })
                    .collect();
                let set = pciod_signal_set(r, m, &rot_odd, &rot_even).unwrap();
                let cb =
                    Codebook::build(pciod(r).unwrap(), set, std::f64::consts::FRAC_1_SQRT_2).unwrap();
                let report = full_diversity_check(cb.codewords(), 1e-9).unwrap();
                assert!(report.pass(), "r={r} m={m}");
            }
        }
    }

    #[test]
    fn default_rotation_schedule() {
        assert_eq!(default_pciod_rotations(4, 4), vec![0.0, PI / 8.0]);
        assert_eq!(default_pciod_rotations(2, 4), vec![0.0]);
    }

    #[test]
    fn coding_gain_alamouti_bpsk() {
        let cb = Codebook::build(
            alamouti(),
            SignalSet::complex_psk(2, 2).unwrap(),
            std::f64::consts::FRAC_1_SQRT_2,
        )
        .unwrap();
        assert_eq!(cb.len(), 4);
        assert!((cb.coding_gain() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn coding_gain_scales_quadratically() {
        let base = Codebook::build(
            alamouti(),
            SignalSet::complex_psk(2, 2).unwrap(),
            std::f64::consts::FRAC_1_SQRT_2,
        )
        .unwrap();
        let alpha = 1.7;
        let scaled = Codebook::build(
            alamouti(),
            SignalSet::complex_psk(2, 2).unwrap(),
            std::f64::consts::FRAC_1_SQRT_2 * alpha,
        )
        .unwrap();
        assert!((scaled.coding_gain() - alpha * alpha * base.coding_gain()).abs() < 1e-9);
    }

    #[test]
    fn coding_gain_zero_for_rank_deficient_pair() {
        // Single weight diag(1, 0): differences are always rank one.
        let mut w = CMat::zeros(2, 2);
        w[(0, 0)] = crate::mat::c(1.0, 0.0);
        let d = LinearDesign::new(2, vec![w]).unwrap();
        let signal = SignalSet::single_group(vec![vec![1.0], vec![-1.0]]).unwrap();
        let cb = Codebook::build(d, signal, 1.0).unwrap();
        assert_eq!(cb.coding_gain(), 0.0);
    }

    #[test]
    fn text_round_trip_preserves_everything() {
        let cb = Codebook::build(
            alamouti(),
            SignalSet::complex_psk(2, 4).unwrap(),
            std::f64::consts::FRAC_1_SQRT_2,
        )
        .unwrap();
        let text = write_codebook(&cb);
        let (parsed, declared_g) = parse_codebook(&text).unwrap();
        assert_eq!(declared_g, 2);
        assert_eq!(parsed.len(), cb.len());
        assert_eq!(parsed.n(), 2);
        for (a, b) in parsed.codewords().iter().zip(cb.codewords()) {
            assert!(a.max_abs_diff(b) == 0.0, "codewords must round-trip bit-exactly");
        }
        for (a, b) in parsed.info_vectors().iter().zip(cb.info_vectors()) {
            assert_eq!(a, b);
        }
        // The fitted design folds the 1/sqrt(2) scale into its weights.
        for (iv, cw) in parsed.info_vectors().iter().zip(parsed.codewords()) {
            let rebuilt = parsed.design().evaluate(iv).unwrap();
            assert!(rebuilt.max_abs_diff(cw) < 1e-12);
        }
        // Group structure is re-inferred: two independent complex symbols.
        assert_eq!(parsed.group_count(), 2);
        let mut partition = parsed.signal().partition();
        partition.sort();
        assert_eq!(partition, vec![vec![0, 1], vec![2, 3]]);
    }

    #[test]
    fn parse_rejects_malformed_input() {
        assert!(matches!(
            parse_codebook(""),
            Err(CodebookError::Parse { .. })
        ));
        assert!(matches!(
            parse_codebook("2 4 16"),
            Err(CodebookError::Parse { .. })
        ));
        assert!(matches!(
            parse_codebook("1 1 1 1\n\nnot-a-number\n0 0"),
            Err(CodebookError::Parse { .. })
        ));
    }

    #[test]
    fn inferred_partition_collapses_when_not_a_product() {
        // Three vectors cannot factor as a 2x2 product.
        let ivs = vec![
            InfoVector(vec![1.0, 0.0]),
            InfoVector(vec![0.0, 1.0]),
            InfoVector(vec![1.0, 1.0]),
        ];
        let set = infer_signal_set(&ivs, 2).unwrap();
        assert_eq!(set.group_count(), 1);
    }
}
