//! Training-based non-coherent transmission over a colocated MIMO channel:
//! pilot augmentation, block-fading channel simulation, and GLRT decoding in
//! its full, simplified and multi-group forms.
//!
//! Codewords are the stacked matrices S_i = [I_n ; C_i] with unitary C_i;
//! the identity block plays the role of per-antenna pilots but the receiver
//! never estimates the channel.

use crate::codebook::Codebook;
use crate::design::InfoVector;
use crate::mat::CMat;
use crate::rng::complex_gaussian;
use rand::Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ColocatedError {
    #[error("base codeword {index} is not unitary within {tol:e} (deviation {deviation:e})")]
    NonUnitaryBase {
        index: usize,
        tol: f64,
        deviation: f64,
    },
    #[error("received block is {got}, codebook expects pilot/data parts of {expected} rows")]
    BlockDimension { got: String, expected: usize },
}

/// Unitarity slack accepted when augmenting a base codebook.
pub const AUGMENT_UNITARY_TOL: f64 = 1e-9;

/// Codebook of stacked pilot-plus-data codewords.
#[derive(Debug, Clone)]
pub struct TrainingCodebook {
    base: Codebook,
    stacked: Vec<CMat>,
}

impl TrainingCodebook {
    pub fn base(&self) -> &Codebook {
        &self.base
    }

    pub fn stacked(&self) -> &[CMat] {
        &self.stacked
    }

    pub fn stacked_codeword(&self, i: usize) -> &CMat {
        &self.stacked[i]
    }

    pub fn len(&self) -> usize {
        self.stacked.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stacked.is_empty()
    }

    pub fn n(&self) -> usize {
        self.base.n()
    }
}

/// Stacks the identity block on top of every base codeword. The base must be
/// unitary: that is what collapses the GLRT metric to the simplified form.
pub fn augment(base: Codebook) -> Result<TrainingCodebook, ColocatedError> {
    let n = base.n();
    let identity = CMat::identity(n);
    let mut stacked = Vec::with_capacity(base.len());
    for (index, cw) in base.codewords().iter().enumerate() {
        let gram = &cw.hermitian() * cw;
        let deviation = gram.max_abs_diff(&identity);
        if deviation > AUGMENT_UNITARY_TOL {
            return Err(ColocatedError::NonUnitaryBase {
                index,
                tol: AUGMENT_UNITARY_TOL,
                deviation,
            });
        }
        stacked.push(identity.vstack(cw));
    }
    Ok(TrainingCodebook { base, stacked })
}

/// Received matrix split into its pilot-part and data-part rows.
#[derive(Debug, Clone)]
pub struct ReceivedBlock {
    pub y1: CMat,
    pub y2: CMat,
}

impl ReceivedBlock {
    pub fn new(y1: CMat, y2: CMat) -> Self {
        assert_eq!(y1.cols(), y2.cols(), "pilot and data parts need equal column counts");
        ReceivedBlock { y1, y2 }
    }
}

/// Deterministic core of the channel: `Y = amplitude * S * H + W`, split
/// into the pilot rows and the data rows.
pub fn apply_channel(s: &CMat, amplitude: f64, h: &CMat, w: &CMat) -> ReceivedBlock {
    let n = s.cols();
    assert_eq!(s.rows(), 2 * n, "expected a stacked 2n x n codeword");
    assert_eq!(h.rows(), n, "channel rows");
    assert_eq!(w.rows(), 2 * n, "noise rows");
    assert_eq!(h.cols(), w.cols(), "channel/noise columns");
    let y = &(&s.scale(amplitude) * h) + w;
    let m = y.cols();
    let y1 = CMat::from_fn(n, m, |r, c| y[(r, c)]);
    let y2 = CMat::from_fn(n, m, |r, c| y[(n + r, c)]);
    ReceivedBlock { y1, y2 }
}

/// Draws H (n x m) and W (2n x m) with i.i.d. unit-variance circularly
/// symmetric complex Gaussian entries and applies the channel. `noise_scale`
/// multiplies the noise draw; zero gives the noiseless validation hook.
pub fn simulate_channel<R: Rng + ?Sized>(
    s: &CMat,
    m: usize,
    amplitude: f64,
    noise_scale: f64,
    rng: &mut R,
) -> ReceivedBlock {
    let n = s.cols();
    let h = CMat::from_fn(n, m, |_, _| complex_gaussian(rng));
    let w = CMat::from_fn(2 * n, m, |_, _| complex_gaussian(rng) * noise_scale);
    apply_channel(s, amplitude, &h, &w)
}

/// GLRT metric of one stacked codeword [I ; C]:
/// `tr(Y^H S S^H Y) = ||S^H Y||_F^2 = ||Y1 + C^H Y2||_F^2`.
fn glrt_metric(rx: &ReceivedBlock, c: &CMat) -> f64 {
    debug_assert_eq!(rx.y1.rows(), c.cols());
    debug_assert_eq!(rx.y2.rows(), c.rows());
    let m = rx.y1.cols();
    let mut acc = 0.0;
    for col in 0..m {
        for r in 0..c.cols() {
            let mut v = rx.y1[(r, col)];
            for i in 0..c.rows() {
                v += c[(i, r)].conj() * rx.y2[(i, col)];
            }
            acc += v.norm_sqr();
        }
    }
    acc
}

/// Full GLRT over the stacked codebook: the index maximizing
/// `tr(Y^H S_i S_i^H Y)`, ties broken toward the smallest index.
pub fn glrt_full(rx: &ReceivedBlock, tcb: &TrainingCodebook) -> usize {
    let mut best = 0;
    let mut best_metric = f64::NEG_INFINITY;
    for (i, cw) in tcb.base.codewords().iter().enumerate() {
        let metric = glrt_metric(rx, cw);
        if metric > best_metric {
            best_metric = metric;
            best = i;
        }
    }
    best
}

/// Decoded codeword: its enumeration index and its information vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Decoded {
    pub index: usize,
    pub info: InfoVector,
}

/// Per-variable metric contributions: `t_j = 2 Re tr(Y1 Y2^H A_j)`.
/// The simplified GLRT metric of codeword i is `sum_j x_j^i t_j`.
fn weight_terms(rx: &ReceivedBlock, cb: &Codebook) -> Vec<f64> {
    let g1 = &rx.y1 * &rx.y2.hermitian();
    cb.design()
        .weights()
        .iter()
        .map(|a| 2.0 * g1.trace_product(a).re * cb.scale())
        .collect()
}

/// Simplified GLRT: maximizes the linear form of the information vector
/// over the codebook. Selects the same codeword as [`glrt_full`]; the two
/// metrics differ by a codeword-independent constant.
pub fn glrt_simplified(rx: &ReceivedBlock, cb: &Codebook) -> Decoded {
    let terms = weight_terms(rx, cb);
    let mut best = 0;
    let mut best_metric = f64::NEG_INFINITY;
    for (i, iv) in cb.info_vectors().iter().enumerate() {
        let metric: f64 = iv.0.iter().zip(&terms).map(|(x, t)| x * t).sum();
        if metric > best_metric {
            best_metric = metric;
            best = i;
        }
    }
    Decoded {
        index: best,
        info: cb.info_vector(best).clone(),
    }
}

/// Multi-group GLRT: maximizes each group's share of the simplified metric
/// independently over that group's signal points, then assembles the winner.
/// Identical to the joint maximization because the metric is a sum of
/// per-group terms; the work drops from the product to the sum of the group
/// sizes.
pub fn glrt_multigroup(rx: &ReceivedBlock, cb: &Codebook) -> Decoded {
    let terms = weight_terms(rx, cb);
    let groups = cb.signal().groups();
    let mut choice = Vec::with_capacity(groups.len());
    for group in groups {
        let mut best = 0;
        let mut best_metric = f64::NEG_INFINITY;
        for (pi, point) in group.points.iter().enumerate() {
            let metric: f64 = point
                .iter()
                .zip(&group.var_indices)
                .map(|(x, &vi)| x * terms[vi])
                .sum();
            if metric > best_metric {
                best_metric = metric;
                best = pi;
            }
        }
        choice.push(best);
    }
    let index = cb.index_of_choice(&choice);
    Decoded {
        index,
        info: cb.info_vector(index).clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codebook::{pciod_signal_set, Codebook, SignalSet};
    use crate::design::{alamouti, pciod};
    use crate::mat::c;
    use crate::rng::trial_rng;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn alamouti_qpsk() -> Codebook {
        Codebook::build(
            alamouti(),
            SignalSet::complex_psk(2, 4).unwrap(),
            FRAC_1_SQRT_2,
        )
        .unwrap()
    }

    fn pciod4_codebook() -> Codebook {
        let rot = crate::codebook::default_pciod_rotations(4, 4);
        Codebook::build(
            pciod(4).unwrap(),
            pciod_signal_set(4, 4, &rot, &rot).unwrap(),
            FRAC_1_SQRT_2,
        )
        .unwrap()
    }

    #[test]
    fn augment_stacks_identity_over_base() {
        let single = Codebook::build(
            crate::design::LinearDesign::new(2, vec![CMat::identity(2)]).unwrap(),
            SignalSet::single_group(vec![vec![1.0]]).unwrap(),
            1.0,
        )
        .unwrap();
        let tcb = augment(single).unwrap();
        assert_eq!(tcb.len(), 1);
        let expected = CMat::from_rows(&[
            vec![c(1.0, 0.0), c(0.0, 0.0)],
            vec![c(0.0, 0.0), c(1.0, 0.0)],
            vec![c(1.0, 0.0), c(0.0, 0.0)],
            vec![c(0.0, 0.0), c(1.0, 0.0)],
        ]);
        assert!(tcb.stacked_codeword(0).max_abs_diff(&expected) == 0.0);
    }

    #[test]
    fn augment_alamouti_qpsk_dimensions_and_gram() {
        let tcb = augment(alamouti_qpsk()).unwrap();
        assert_eq!(tcb.len(), 16);
        for s in tcb.stacked() {
            assert_eq!((s.rows(), s.cols()), (4, 2));
            let gram = &s.hermitian() * s;
            assert!(gram.max_abs_diff(&CMat::identity(2).scale(2.0)) < 1e-12);
        }
    }

    #[test]
    fn augment_rejects_non_unitary_base() {
        let mut w = CMat::zeros(2, 2);
        w[(0, 0)] = c(2.0, 0.0);
        w[(1, 1)] = c(1.0, 0.0);
        let base = Codebook::build(
            crate::design::LinearDesign::new(2, vec![w]).unwrap(),
            SignalSet::single_group(vec![vec![1.0]]).unwrap(),
            1.0,
        )
        .unwrap();
        assert!(matches!(
            augment(base),
            Err(ColocatedError::NonUnitaryBase { index: 0, .. })
        ));
    }

    #[test]
    fn zero_noise_channel_is_exact() {
        let tcb = augment(alamouti_qpsk()).unwrap();
        let s = tcb.stacked_codeword(5);
        let mut rng = trial_rng(3, 0, 0);
        let h = CMat::from_fn(2, 1, |_, _| crate::rng::complex_gaussian(&mut rng));
        let w = CMat::zeros(4, 1);
        let amplitude = 7.5;
        let rx = apply_channel(s, amplitude, &h, &w);
        assert!(rx.y1.max_abs_diff(&h.scale(amplitude)) < 1e-12);
        let expected_y2 = &tcb.base().codeword(5).scale(amplitude) * &h;
        assert!(rx.y2.max_abs_diff(&expected_y2) < 1e-12);
    }

    #[test]
    fn channel_draws_are_deterministic_per_seed() {
        let tcb = augment(alamouti_qpsk()).unwrap();
        let s = tcb.stacked_codeword(0);
        let a = simulate_channel(s, 2, 3.0, 1.0, &mut trial_rng(9, 1, 2));
        let b = simulate_channel(s, 2, 3.0, 1.0, &mut trial_rng(9, 1, 2));
        assert!(a.y1.max_abs_diff(&b.y1) == 0.0 && a.y2.max_abs_diff(&b.y2) == 0.0);
    }

    #[test]
    fn received_entry_power_matches_closed_form() {
        // n = m = 1, S = [1 ; 1], amplitude 1: every received entry has
        // variance amplitude^2 + 1 = 2.
        let s = CMat::from_rows(&[vec![c(1.0, 0.0)], vec![c(1.0, 0.0)]]);
        let mut rng = trial_rng(17, 0, 0);
        let trials = 100_000;
        let mut acc = 0.0;
        for _ in 0..trials {
            let rx = simulate_channel(&s, 1, 1.0, 1.0, &mut rng);
            acc += rx.y1[(0, 0)].norm_sqr() + rx.y2[(0, 0)].norm_sqr();
        }
        let mean = acc / (2.0 * trials as f64);
        assert!((mean - 2.0).abs() < 0.06, "mean power {mean}");
    }

    #[test]
    fn glrt_full_decodes_noiseless_blocks() {
        let tcb = augment(alamouti_qpsk()).unwrap();
        let mut rng = trial_rng(23, 0, 0);
        for t in 0..10_000 {
            let k = t % tcb.len();
            let h = CMat::from_fn(2, 1, |_, _| crate::rng::complex_gaussian(&mut rng));
            let rx = apply_channel(tcb.stacked_codeword(k), 1.0, &h, &CMat::zeros(4, 1));
            assert_eq!(glrt_full(&rx, &tcb), k);
        }
    }

    #[test]
    fn zero_reception_breaks_ties_to_index_zero() {
        let tcb = augment(alamouti_qpsk()).unwrap();
        let rx = ReceivedBlock::new(CMat::zeros(2, 1), CMat::zeros(2, 1));
        assert_eq!(glrt_full(&rx, &tcb), 0);
        assert_eq!(glrt_simplified(&rx, tcb.base()).index, 0);
        assert_eq!(glrt_multigroup(&rx, tcb.base()).index, 0);
    }

    #[test]
    fn zero_pilot_part_ties_to_index_zero_in_simplified() {
        let cb = alamouti_qpsk();
        let mut rng = trial_rng(29, 0, 0);
        let y2 = CMat::from_fn(2, 1, |_, _| crate::rng::complex_gaussian(&mut rng));
        let rx = ReceivedBlock::new(CMat::zeros(2, 1), y2);
        let decoded = glrt_simplified(&rx, &cb);
        assert_eq!(decoded.index, 0);
        assert_eq!(decoded.info, cb.info_vectors()[0]);
    }

    #[test]
    fn full_metric_decomposes_into_constant_plus_cross_terms() {
        let tcb = augment(alamouti_qpsk()).unwrap();
        let mut rng = trial_rng(31, 0, 0);
        for _ in 0..50 {
            let y1 = CMat::from_fn(2, 3, |_, _| crate::rng::complex_gaussian(&mut rng));
            let y2 = CMat::from_fn(2, 3, |_, _| crate::rng::complex_gaussian(&mut rng));
            let rx = ReceivedBlock::new(y1.clone(), y2.clone());
            let constant = (&y1 * &y1.hermitian()).trace().re + (&y2 * &y2.hermitian()).trace().re;
            for cw in tcb.base().codewords() {
                let direct = glrt_metric(&rx, cw);
                let cross = (&(&y1 * &y2.hermitian()) * cw).trace()
                    + (&(&y2 * &y1.hermitian()) * &cw.hermitian()).trace();
                assert!((direct - (constant + cross.re)).abs() < 1e-10);
                assert!(cross.im.abs() < 1e-10);
            }
        }
    }

    #[test]
    fn simplified_matches_full_on_noisy_receptions() {
        let cb = alamouti_qpsk();
        let tcb = augment(cb.clone()).unwrap();
        for t in 0..1000 {
            let mut rng = trial_rng(37, 0, t);
            let k = (t as usize) % tcb.len();
            let rx = simulate_channel(tcb.stacked_codeword(k), 1, 2.0, 1.0, &mut rng);
            let full = glrt_full(&rx, &tcb);
            let simplified = glrt_simplified(&rx, &cb);
            assert_eq!(full, simplified.index);
            assert_eq!(simplified.info, cb.info_vectors()[full]);
        }
    }

    #[test]
    fn simplified_decodes_noiseless_to_transmitted_info() {
        let cb = alamouti_qpsk();
        let tcb = augment(cb.clone()).unwrap();
        let mut rng = trial_rng(41, 0, 0);
        for k in 0..tcb.len() {
            let h = CMat::from_fn(2, 1, |_, _| crate::rng::complex_gaussian(&mut rng));
            let rx = apply_channel(tcb.stacked_codeword(k), 1.0, &h, &CMat::zeros(4, 1));
            let decoded = glrt_simplified(&rx, &cb);
            assert_eq!(decoded.index, k);
            assert_eq!(decoded.info, cb.info_vectors()[k]);
        }
    }

    #[test]
    fn multigroup_matches_simplified_for_two_group_codes() {
        for (cb, seed) in [(alamouti_qpsk(), 43u64), (pciod4_codebook(), 47u64)] {
            let tcb = augment(cb.clone()).unwrap();
            for t in 0..1000 {
                let mut rng = trial_rng(seed, 0, t);
                let k = (t as usize) % tcb.len();
                let rx = simulate_channel(tcb.stacked_codeword(k), 1, 1.5, 1.0, &mut rng);
                let joint = glrt_simplified(&rx, &cb);
                let grouped = glrt_multigroup(&rx, &cb);
                assert_eq!(joint.index, grouped.index);
                assert_eq!(joint.info, grouped.info);
            }
        }
    }

    #[test]
    fn single_group_multigroup_is_plain_simplified() {
        // Same Alamouti+QPSK codebook, but enumerated as one flat group.
        let joint_cb = alamouti_qpsk();
        let points: Vec<Vec<f64>> = joint_cb.info_vectors().iter().map(|iv| iv.0.clone()).collect();
        let flat = Codebook::build(
            alamouti(),
            SignalSet::single_group(points).unwrap(),
            FRAC_1_SQRT_2,
        )
        .unwrap();
        let tcb = augment(flat.clone()).unwrap();
        for t in 0..200 {
            let mut rng = trial_rng(53, 0, t);
            let k = (t as usize) % tcb.len();
            let rx = simulate_channel(tcb.stacked_codeword(k), 1, 1.0, 1.0, &mut rng);
            assert_eq!(glrt_multigroup(&rx, &flat).index, glrt_simplified(&rx, &flat).index);
        }
    }

    #[test]
    fn multigroup_work_is_sum_not_product_of_group_sizes() {
        let cb = alamouti_qpsk();
        let evals: usize = cb.signal().groups().iter().map(|g| g.points.len()).sum();
        assert_eq!(evals, 8);
        assert!(evals < cb.len());
    }
}
