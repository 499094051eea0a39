//! Dense statevector simulation of the handful of primitives the solver
//! needs: basis preparation, Hadamard layers, diagonal phase application,
//! (inverse) QFT over a register segment, reflection about a stored state,
//! and single-qubit probability queries / collapses.
//!
//! Bit convention: qubit 0 is the **most significant** bit of the basis
//! index, so a layout `[("phase", m), ("index", n)]` stores basis states as
//! `phase_value * 2^n + index_value` and phase comparisons become contiguous
//! range tests over the basis index. Phases are expressed in *turns*
//! (fractions of a full revolution): a phase of 0.5 turns is a sign flip.

use num_complex::Complex64;
use std::f64::consts::TAU;

use crate::error::{Error, Result};

/// Amplitude mass below this is treated as an impossible measurement outcome.
pub const OUTCOME_EPSILON: f64 = 1e-12;

/// Hard guard for statevector allocation (2^28 amplitudes = 4 GiB).
const MAX_QUBITS: usize = 28;

#[derive(Debug, Clone, PartialEq, Eq)]
struct Segment {
    name: String,
    width: usize,
}

/// Ordered register segments; the first segment occupies the most
/// significant bits of the basis index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegisterLayout {
    segments: Vec<Segment>,
}

impl RegisterLayout {
    pub fn new(segments: &[(&str, usize)]) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::Layout("layout needs at least one segment".into()));
        }
        let mut seen = Vec::new();
        let mut total = 0usize;
        for &(name, width) in segments {
            if width == 0 {
                return Err(Error::Layout(format!("segment '{name}' has zero width")));
            }
            if seen.contains(&name) {
                return Err(Error::Layout(format!("duplicate segment name '{name}'")));
            }
            seen.push(name);
            total += width;
        }
        if total > MAX_QUBITS {
            return Err(Error::Capacity(format!(
                "{total} qubits exceed the {MAX_QUBITS}-qubit simulator guard"
            )));
        }
        Ok(Self {
            segments: segments
                .iter()
                .map(|&(name, width)| Segment {
                    name: name.to_string(),
                    width,
                })
                .collect(),
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.segments.iter().map(|s| s.width).sum()
    }

    /// Global qubit positions covered by a segment (MSB-first).
    pub fn range(&self, name: &str) -> Result<std::ops::Range<usize>> {
        let mut offset = 0;
        for seg in &self.segments {
            if seg.name == name {
                return Ok(offset..offset + seg.width);
            }
            offset += seg.width;
        }
        Err(Error::Layout(format!("unknown segment '{name}'")))
    }

    pub fn width(&self, name: &str) -> Result<usize> {
        Ok(self.range(name)?.len())
    }

    /// Right-shift that brings a segment's bits to the low end of an index.
    pub fn shift(&self, name: &str) -> Result<usize> {
        let range = self.range(name)?;
        Ok(self.num_qubits() - range.end)
    }
}

/// Outcome of peeking at a single qubit with a uniform draw.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementOutcome {
    pub bit: u8,
    pub probability: f64,
}

/// A normalized pure state over a register layout.
#[derive(Debug, Clone)]
pub struct State {
    layout: RegisterLayout,
    amps: Vec<Complex64>,
}

impl State {
    /// Computational basis state |basis_index⟩.
    pub fn basis(layout: RegisterLayout, basis_index: u64) -> Result<Self> {
        let n = layout.num_qubits();
        let dim = 1usize << n;
        if basis_index >= dim as u64 {
            return Err(Error::Range(format!(
                "basis index {basis_index} out of range for {n} qubits"
            )));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[basis_index as usize] = Complex64::new(1.0, 0.0);
        Ok(Self { layout, amps })
    }

    /// Basis state over a single anonymous register, for small experiments.
    pub fn single_register(num_qubits: usize, basis_index: u64) -> Result<Self> {
        if num_qubits == 0 {
            return Err(Error::Layout("need at least one qubit".into()));
        }
        Self::basis(RegisterLayout::new(&[("q", num_qubits)])?, basis_index)
    }

    pub fn from_amplitudes(layout: RegisterLayout, amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() != 1usize << layout.num_qubits() {
            return Err(Error::Layout(format!(
                "amplitude count {} does not match {} qubits",
                amps.len(),
                layout.num_qubits()
            )));
        }
        Ok(Self { layout, amps })
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn num_qubits(&self) -> usize {
        self.layout.num_qubits()
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Value of a segment's bits within a basis index.
    pub fn sub_index(&self, basis_index: usize, segment: &str) -> Result<u64> {
        let shift = self.layout.shift(segment)?;
        let width = self.layout.width(segment)?;
        Ok(((basis_index >> shift) as u64) & ((1u64 << width) - 1))
    }

    fn bit_mask(&self, qubit: usize) -> Result<usize> {
        let n = self.num_qubits();
        if qubit >= n {
            return Err(Error::Range(format!(
                "qubit {qubit} out of range for {n} qubits"
            )));
        }
        Ok(1usize << (n - 1 - qubit))
    }

    fn hadamard_qubit(&mut self, qubit: usize) -> Result<()> {
        let mask = self.bit_mask(qubit)?;
        let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
        for idx in 0..self.amps.len() {
            if idx & mask == 0 {
                let a = self.amps[idx];
                let b = self.amps[idx | mask];
                self.amps[idx] = (a + b) * inv_sqrt2;
                self.amps[idx | mask] = (a - b) * inv_sqrt2;
            }
        }
        Ok(())
    }

    fn controlled_phase(&mut self, qubit_a: usize, qubit_b: usize, angle: f64) -> Result<()> {
        let mask = self.bit_mask(qubit_a)? | self.bit_mask(qubit_b)?;
        let factor = Complex64::from_polar(1.0, angle);
        for (idx, amp) in self.amps.iter_mut().enumerate() {
            if idx & mask == mask {
                *amp *= factor;
            }
        }
        Ok(())
    }

    fn swap_qubits(&mut self, qubit_a: usize, qubit_b: usize) -> Result<()> {
        let mask_a = self.bit_mask(qubit_a)?;
        let mask_b = self.bit_mask(qubit_b)?;
        for idx in 0..self.amps.len() {
            if idx & mask_a != 0 && idx & mask_b == 0 {
                self.amps.swap(idx, idx ^ mask_a ^ mask_b);
            }
        }
        Ok(())
    }

    /// Hadamard on every qubit of a segment.
    pub fn hadamard_segment(&mut self, segment: &str) -> Result<()> {
        for q in self.layout.range(segment)? {
            self.hadamard_qubit(q)?;
        }
        Ok(())
    }

    /// Multiplies each amplitude by `exp(i·2π·phase_turns(v))` where `v` is
    /// the segment's sub-index in that basis state. Probabilities unchanged.
    pub fn phase_diagonal<F>(&mut self, segment: &str, phase_turns: F) -> Result<()>
    where
        F: Fn(u64) -> f64,
    {
        let shift = self.layout.shift(segment)?;
        let width = self.layout.width(segment)?;
        let mask = (1u64 << width) - 1;
        // One table entry per sub-index keeps the trig work at 2^width.
        let table: Vec<Complex64> = (0..=mask)
            .map(|v| Complex64::from_polar(1.0, TAU * phase_turns(v)))
            .collect();
        for (idx, amp) in self.amps.iter_mut().enumerate() {
            let v = ((idx >> shift) as u64) & mask;
            *amp *= table[v as usize];
        }
        Ok(())
    }

    /// (Inverse) quantum Fourier transform over a segment:
    /// |k⟩ → 2^(-w/2) Σ_x exp(+i·2π·k·x / 2^w) |x⟩ on its sub-index.
    pub fn qft_segment(&mut self, segment: &str, inverse: bool) -> Result<()> {
        let range = self.layout.range(segment)?;
        let start = range.start;
        let w = range.len();
        if !inverse {
            for i in 0..w {
                self.hadamard_qubit(start + i)?;
                for j in i + 1..w {
                    let angle = TAU / (1u64 << (j - i + 1)) as f64;
                    self.controlled_phase(start + j, start + i, angle)?;
                }
            }
            for i in 0..w / 2 {
                self.swap_qubits(start + i, start + w - 1 - i)?;
            }
        } else {
            for i in 0..w / 2 {
                self.swap_qubits(start + i, start + w - 1 - i)?;
            }
            for i in (0..w).rev() {
                for j in (i + 1..w).rev() {
                    let angle = -TAU / (1u64 << (j - i + 1)) as f64;
                    self.controlled_phase(start + j, start + i, angle)?;
                }
                self.hadamard_qubit(start + i)?;
            }
        }
        Ok(())
    }

    /// Householder-style reflection 2|pivot⟩⟨pivot| − I applied to `self`.
    pub fn reflect_about(&mut self, pivot: &State) -> Result<()> {
        if pivot.dim() != self.dim() {
            return Err(Error::Layout(format!(
                "pivot dimension {} does not match state dimension {}",
                pivot.dim(),
                self.dim()
            )));
        }
        let overlap: Complex64 = pivot
            .amps
            .iter()
            .zip(&self.amps)
            .map(|(p, s)| p.conj() * s)
            .sum();
        let twice = overlap * 2.0;
        for (s, p) in self.amps.iter_mut().zip(&pivot.amps) {
            *s = twice * p - *s;
        }
        Ok(())
    }

    /// Probability of reading |1⟩ on a qubit. Pure query.
    pub fn prob_one(&self, qubit: usize) -> Result<f64> {
        let mask = self.bit_mask(qubit)?;
        Ok(self
            .amps
            .iter()
            .enumerate()
            .filter(|(idx, _)| idx & mask != 0)
            .map(|(_, a)| a.norm_sqr())
            .sum())
    }

    pub fn prob_zero(&self, qubit: usize) -> Result<f64> {
        let mask = self.bit_mask(qubit)?;
        Ok(self
            .amps
            .iter()
            .enumerate()
            .filter(|(idx, _)| idx & mask == 0)
            .map(|(_, a)| a.norm_sqr())
            .sum())
    }

    /// Bernoulli outcome for a qubit given a uniform draw in [0, 1).
    pub fn peek_outcome(&self, qubit: usize, draw: f64) -> Result<MeasurementOutcome> {
        let p1 = self.prob_one(qubit)?;
        let bit = u8::from(draw < p1);
        Ok(MeasurementOutcome {
            bit,
            probability: if bit == 1 { p1 } else { 1.0 - p1 },
        })
    }

    /// Projects a qubit onto `outcome`, renormalizes, and returns the
    /// pre-collapse probability of that outcome.
    pub fn collapse(&mut self, qubit: usize, outcome: u8) -> Result<f64> {
        let mask = self.bit_mask(qubit)?;
        let want = if outcome == 1 { mask } else { 0 };
        let p: f64 = self
            .amps
            .iter()
            .enumerate()
            .filter(|(idx, _)| idx & mask == want)
            .map(|(_, a)| a.norm_sqr())
            .sum();
        if p <= OUTCOME_EPSILON {
            return Err(Error::ImpossibleOutcome {
                qubit,
                outcome,
                probability: p,
            });
        }
        let scale = 1.0 / p.sqrt();
        for (idx, amp) in self.amps.iter_mut().enumerate() {
            if idx & mask == want {
                *amp *= scale;
            } else {
                *amp = Complex64::new(0.0, 0.0);
            }
        }
        Ok(p)
    }

    /// Inner product ⟨self|other⟩.
    pub fn overlap(&self, other: &State) -> Complex64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }
}
