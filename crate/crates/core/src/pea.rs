//! Phase estimation stage: writes every subset's eigenphase into the phase
//! register, entangled with the subset index.
//!
//! Two backends produce the post-estimation state. `Circuit` walks the
//! faithful gate sequence (Hadamards, one controlled diagonal per phase
//! qubit with doubled angles, inverse QFT). `Direct` exploits the closed
//! form: when every eigenphase is an exact fraction of the register width,
//! the output simply places each index amplitude at its phase bin. The two
//! must agree to within 1e-9 per amplitude on exact instances.

use num_complex::Complex64;
use std::f64::consts::TAU;

use crate::encoding::{PhaseOracle, SubsetMask};
use crate::error::{Error, Result};
use crate::sim::{RegisterLayout, State};

/// Default cap on the total register width m + n.
pub const DEFAULT_QUBIT_LIMIT: usize = 24;

pub const PHASE_SEGMENT: &str = "phase";
pub const INDEX_SEGMENT: &str = "index";

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PeaBackend {
    Circuit,
    Direct,
}

impl Default for PeaBackend {
    fn default() -> Self {
        PeaBackend::Circuit
    }
}

/// |0…0⟩ on an m-qubit phase register tensored with the uniform
/// superposition over the n-qubit index register.
pub fn prepare_initial(phase_bits: usize, index_bits: usize) -> Result<State> {
    if phase_bits == 0 || index_bits == 0 {
        return Err(Error::Usage(
            "phase and index registers both need at least one qubit".into(),
        ));
    }
    if phase_bits + index_bits > DEFAULT_QUBIT_LIMIT {
        return Err(Error::Capacity(format!(
            "{} qubits exceed the {DEFAULT_QUBIT_LIMIT}-qubit limit",
            phase_bits + index_bits
        )));
    }
    let layout = RegisterLayout::new(&[(PHASE_SEGMENT, phase_bits), (INDEX_SEGMENT, index_bits)])?;
    let mut state = State::basis(layout, 0)?;
    state.hadamard_segment(INDEX_SEGMENT)?;
    Ok(state)
}

/// True when every eigenphase of the oracle lands exactly on a bin of a
/// `width`-bit phase register.
pub fn phases_exact_at(oracle: &PhaseOracle, width: usize) -> bool {
    let m = oracle.precision_bits() as usize;
    if width >= m {
        return true;
    }
    let step = 1u64 << (m - width);
    oracle.values().iter().all(|v| v % step == 0)
}

fn phase_bin_at(oracle: &PhaseOracle, mask: SubsetMask, width: usize) -> Result<u64> {
    let m = oracle.precision_bits() as usize;
    let sum = oracle.eigenphase_int(mask);
    let wrap = (1u64 << width) - 1;
    if width >= m {
        Ok((sum << (width - m)) & wrap)
    } else {
        let step = 1u64 << (m - width);
        if sum % step != 0 {
            return Err(Error::Precision(format!(
                "eigenphase {sum}/2^{m} is not representable in {width} bits"
            )));
        }
        Ok((sum / step) & wrap)
    }
}

/// Runs phase estimation in place. The phase register must be cleared.
pub fn run_pea(state: &mut State, oracle: &PhaseOracle, backend: PeaBackend) -> Result<()> {
    let phase_range = state.layout().range(PHASE_SEGMENT)?;
    let width = phase_range.len();
    let index_shift = state.layout().shift(INDEX_SEGMENT)?;
    let index_width = state.layout().width(INDEX_SEGMENT)?;
    if oracle.num_elements() != index_width {
        return Err(Error::Layout(format!(
            "oracle has {} elements but the index register has {index_width} qubits",
            oracle.num_elements()
        )));
    }
    let phase_shift = state.layout().shift(PHASE_SEGMENT)?;
    let phase_mask = ((1usize << width) - 1) << phase_shift;

    let cleared: f64 = state
        .amplitudes()
        .iter()
        .enumerate()
        .filter(|(idx, _)| idx & phase_mask != 0)
        .map(|(_, a)| a.norm_sqr())
        .sum();
    if cleared > 1e-12 {
        return Err(Error::Usage(format!(
            "phase register is not cleared (residual probability {cleared:.3e})"
        )));
    }

    if !phases_exact_at(oracle, width) {
        log::warn!(
            "eigenphases with denominator 2^{} are not exact on a {width}-bit phase register; \
             estimation will spread probability across neighboring bins",
            oracle.precision_bits()
        );
    }

    match backend {
        PeaBackend::Circuit => run_circuit(state, oracle, width, index_shift, index_width),
        PeaBackend::Direct => run_direct(state, oracle, width, phase_shift, index_shift, index_width),
    }
}

fn run_circuit(
    state: &mut State,
    oracle: &PhaseOracle,
    width: usize,
    index_shift: usize,
    index_width: usize,
) -> Result<()> {
    state.hadamard_segment(PHASE_SEGMENT)?;

    let m = oracle.precision_bits();
    let denom = 1u128 << m;
    let phase_range = state.layout().range(PHASE_SEGMENT)?;
    let n = state.num_qubits();
    let index_mask = (1usize << index_width) - 1;

    // Sums per index value; the controlled power of the diagonal only
    // changes the angle, never the circuit shape.
    let sums: Vec<u64> = (0..1u64 << index_width)
        .map(|j| oracle.eigenphase_int(SubsetMask(j)))
        .collect();

    for t in 0..width {
        let weight = 1u128 << (width - 1 - t);
        let control = 1usize << (n - 1 - (phase_range.start + t));
        let kicks: Vec<Complex64> = sums
            .iter()
            .map(|&s| {
                let turns = ((weight * u128::from(s)) % denom) as f64 / denom as f64;
                Complex64::from_polar(1.0, TAU * turns)
            })
            .collect();
        for (idx, amp) in state.amplitudes_mut().iter_mut().enumerate() {
            if idx & control != 0 {
                *amp *= kicks[(idx >> index_shift) & index_mask];
            }
        }
    }

    state.qft_segment(PHASE_SEGMENT, true)
}

fn run_direct(
    state: &mut State,
    oracle: &PhaseOracle,
    width: usize,
    phase_shift: usize,
    index_shift: usize,
    index_width: usize,
) -> Result<()> {
    let dim = state.dim();
    let mut out = vec![Complex64::new(0.0, 0.0); dim];
    for j in 0..1u64 << index_width {
        let src = (j as usize) << index_shift;
        let amp = state.amplitudes()[src];
        if amp.norm_sqr() == 0.0 {
            continue;
        }
        let bin = phase_bin_at(oracle, SubsetMask(j), width)? as usize;
        out[(bin << phase_shift) | src] = amp;
    }
    state.amplitudes_mut().copy_from_slice(&out);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoding::ProblemInstance;
    use approx::assert_abs_diff_eq;

    fn demo_oracle() -> PhaseOracle {
        ProblemInstance::normalize(vec![56, 54, 52, 48, 28, 12, 2], 102, Some(9))
            .unwrap()
            .oracle()
    }

    #[test]
    fn initial_state_at_one_plus_one_qubits() {
        let s = prepare_initial(1, 1).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert_abs_diff_eq!(s.amplitudes()[0].re, r, epsilon = 1e-12);
        assert_abs_diff_eq!(s.amplitudes()[1].re, r, epsilon = 1e-12);
        assert_abs_diff_eq!(s.amplitudes()[2].norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.amplitudes()[3].norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn initial_state_is_uniform_over_the_index_register() {
        let s = prepare_initial(9, 7).unwrap();
        let mut nonzero = 0;
        for (idx, amp) in s.amplitudes().iter().enumerate() {
            let p = amp.norm_sqr();
            if p > 1e-15 {
                nonzero += 1;
                assert!(idx >> 7 == 0, "phase register must stay cleared");
                assert_abs_diff_eq!(p, 1.0 / 128.0, epsilon = 1e-12);
            }
        }
        assert_eq!(nonzero, 128);

        let wide = prepare_initial(1, 10).unwrap();
        let count = wide
            .amplitudes()
            .iter()
            .filter(|a| a.norm_sqr() > 1e-15)
            .count();
        assert_eq!(count, 1024);
    }

    #[test]
    fn qubit_limit_is_enforced() {
        assert!(matches!(
            prepare_initial(14, 11),
            Err(Error::Capacity(_))
        ));
    }

    #[test]
    fn single_exact_phase_entangles_the_registers() {
        // One element of value 1 at one-bit precision: phase 0.5 turns.
        let oracle = PhaseOracle::unnormalized(vec![1], 1).unwrap();
        for backend in [PeaBackend::Circuit, PeaBackend::Direct] {
            let mut s = prepare_initial(1, 1).unwrap();
            run_pea(&mut s, &oracle, backend).unwrap();
            let r = std::f64::consts::FRAC_1_SQRT_2;
            assert!((s.amplitudes()[0].re - r).abs() < 1e-12, "{backend:?}");
            assert!(s.amplitudes()[1].norm() < 1e-12);
            assert!(s.amplitudes()[2].norm() < 1e-12);
            assert!((s.amplitudes()[3].re - r).abs() < 1e-12);
        }
    }

    #[test]
    fn estimation_places_every_index_at_its_eigenphase() {
        let oracle = demo_oracle();
        for backend in [PeaBackend::Circuit, PeaBackend::Direct] {
            let mut s = prepare_initial(9, 7).unwrap();
            run_pea(&mut s, &oracle, backend).unwrap();
            let mut nonzero = 0;
            for (idx, amp) in s.amplitudes().iter().enumerate() {
                let p = amp.norm_sqr();
                if p > 1e-6 {
                    nonzero += 1;
                    let phase = (idx >> 7) as u64;
                    let j = (idx & 0x7f) as u64;
                    assert_eq!(phase, oracle.eigenphase_int(SubsetMask(j)), "{backend:?}");
                    assert_abs_diff_eq!(p, 1.0 / 128.0, epsilon = 1e-9);
                }
            }
            assert_eq!(nonzero, 128);
        }
    }

    #[test]
    fn backends_agree_to_nine_decimals() {
        let oracle = demo_oracle();
        let mut circuit = prepare_initial(9, 7).unwrap();
        run_pea(&mut circuit, &oracle, PeaBackend::Circuit).unwrap();
        let mut direct = prepare_initial(9, 7).unwrap();
        run_pea(&mut direct, &oracle, PeaBackend::Direct).unwrap();
        let dev = circuit
            .amplitudes()
            .iter()
            .zip(direct.amplitudes())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(dev < 1e-9, "max deviation {dev}");
    }

    #[test]
    fn index_marginal_is_untouched() {
        let oracle = demo_oracle();
        let mut s = prepare_initial(9, 7).unwrap();
        run_pea(&mut s, &oracle, PeaBackend::Circuit).unwrap();
        for j in 0..128usize {
            let p: f64 = s
                .amplitudes()
                .iter()
                .enumerate()
                .filter(|(idx, _)| idx & 0x7f == j)
                .map(|(_, a)| a.norm_sqr())
                .sum();
            assert_abs_diff_eq!(p, 1.0 / 128.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn inexact_phase_spreads_but_keeps_the_top_bin_heavy() {
        // Phase 1/16 of a turn on a 3-bit register sits exactly between two
        // bins; the heavier neighbor still holds at least 4/π² ≈ 0.405.
        let oracle = PhaseOracle::unnormalized(vec![1], 4).unwrap();
        assert!(!phases_exact_at(&oracle, 3));
        let mut s = prepare_initial(3, 1).unwrap();
        run_pea(&mut s, &oracle, PeaBackend::Circuit).unwrap();
        let mut bins = [0.0f64; 8];
        let mut total = 0.0;
        for (idx, amp) in s.amplitudes().iter().enumerate() {
            if idx & 1 == 1 {
                bins[idx >> 1] += amp.norm_sqr();
                total += amp.norm_sqr();
            }
        }
        let top = bins.iter().cloned().fold(0.0, f64::max) / total;
        assert!(top >= 0.405, "top bin holds {top}");
    }

    #[test]
    fn direct_backend_rejects_unrepresentable_phases() {
        let oracle = PhaseOracle::unnormalized(vec![1], 4).unwrap();
        let mut s = prepare_initial(3, 1).unwrap();
        assert!(matches!(
            run_pea(&mut s, &oracle, PeaBackend::Direct),
            Err(Error::Precision(_))
        ));
    }

    #[test]
    fn populated_phase_register_is_rejected() {
        let oracle = PhaseOracle::unnormalized(vec![1], 1).unwrap();
        let layout = RegisterLayout::new(&[(PHASE_SEGMENT, 1), (INDEX_SEGMENT, 1)]).unwrap();
        let mut s = State::basis(layout, 0b10).unwrap();
        assert!(matches!(
            run_pea(&mut s, &oracle, PeaBackend::Circuit),
            Err(Error::Usage(_))
        ));
    }
}
