//! Fixed-point encoding of a subset-sum instance.
//!
//! Raw integer values are interpreted as exact m-bit fractions `v / 2^m`
//! of a turn, chosen so the sum of all values stays below half a turn.
//! Keeping everything as integers over a power-of-two denominator makes the
//! strict comparison against the target exact and lets the phase estimation
//! stage resolve every subset sum without leakage.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A subset of elements identified by its bit mask: bit `k` set means
/// element `k` is included.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SubsetMask(pub u64);

impl SubsetMask {
    /// Renders the mask as an n-character string with element 0 leftmost.
    pub fn render(self, n: usize) -> String {
        (0..n)
            .map(|k| if self.0 >> k & 1 == 1 { '1' } else { '0' })
            .collect()
    }

    /// Inverse of [`render`](Self::render).
    pub fn parse(text: &str) -> Result<Self> {
        let mut mask = 0u64;
        for (k, ch) in text.chars().enumerate() {
            match ch {
                '1' => mask |= 1 << k,
                '0' => {}
                other => {
                    return Err(Error::Parse(format!(
                        "invalid mask character '{other}' at position {k}"
                    )))
                }
            }
        }
        Ok(SubsetMask(mask))
    }
}

/// A validated subset-sum instance in raw problem units.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProblemInstance {
    /// Non-negative element values.
    pub values: Vec<u64>,
    /// Strict upper bound for the subset sum, in the same units.
    pub target: u64,
    /// Width m of the fixed-point phase encoding, in bits.
    pub precision_bits: u32,
}

impl ProblemInstance {
    /// Builds an instance, choosing the smallest precision that keeps the
    /// total sum below half a turn unless `precision_override` is given.
    pub fn normalize(
        values: Vec<u64>,
        target: u64,
        precision_override: Option<u32>,
    ) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Instance("value list is empty".into()));
        }
        let sum: u64 = values
            .iter()
            .try_fold(0u64, |acc, &v| acc.checked_add(v))
            .ok_or_else(|| Error::Instance("value sum overflows u64".into()))?;
        // Smallest m with sum < 2^(m-1).
        let minimal = 64 - sum.leading_zeros() + 1;
        let precision_bits = match precision_override {
            Some(m) => {
                if m > 30 {
                    return Err(Error::Precision(format!(
                        "precision of {m} bits exceeds the 30-bit guard"
                    )));
                }
                if m == 0 || sum >= 1u64 << (m - 1) {
                    return Err(Error::Precision(format!(
                        "value sum {sum} does not fit below half a turn at {m} bits"
                    )));
                }
                m
            }
            None => {
                if minimal > 30 {
                    return Err(Error::Precision(
                        "values too large for the 30-bit precision guard".into(),
                    ));
                }
                minimal
            }
        };
        if target > 1u64 << precision_bits {
            return Err(Error::Instance(format!(
                "target {target} exceeds 2^{precision_bits}"
            )));
        }
        Ok(Self {
            values,
            target,
            precision_bits,
        })
    }

    pub fn num_elements(&self) -> usize {
        self.values.len()
    }

    pub fn oracle(&self) -> PhaseOracle {
        PhaseOracle {
            values: self.values.clone(),
            precision_bits: self.precision_bits,
        }
    }
}

/// The diagonal of the encoding unitary: maps a subset mask to its
/// eigenphase, an exact integer multiple of `2^-precision_bits` turns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhaseOracle {
    values: Vec<u64>,
    precision_bits: u32,
}

impl PhaseOracle {
    /// Builds an oracle without the half-turn normalization requirement.
    /// Phases then live modulo one turn; meant for experiments on the
    /// estimation stage itself, not for solving instances.
    pub fn unnormalized(values: Vec<u64>, precision_bits: u32) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Instance("value list is empty".into()));
        }
        if precision_bits == 0 || precision_bits > 30 {
            return Err(Error::Precision(format!(
                "precision of {precision_bits} bits is outside 1..=30"
            )));
        }
        values
            .iter()
            .try_fold(0u64, |acc, &v| acc.checked_add(v))
            .ok_or_else(|| Error::Instance("value sum overflows u64".into()))?;
        Ok(Self {
            values,
            precision_bits,
        })
    }

    pub fn num_elements(&self) -> usize {
        self.values.len()
    }

    pub fn precision_bits(&self) -> u32 {
        self.precision_bits
    }

    pub fn values(&self) -> &[u64] {
        &self.values
    }

    /// Exact subset sum of a mask, in units of `2^-precision_bits` turns.
    pub fn eigenphase_int(&self, mask: SubsetMask) -> u64 {
        self.values
            .iter()
            .enumerate()
            .filter(|(k, _)| mask.0 >> k & 1 == 1)
            .map(|(_, &v)| v)
            .sum()
    }

    /// Eigenphase reduced to the phase register: `eigenphase_int mod 2^m`.
    pub fn phase_bin(&self, mask: SubsetMask) -> u64 {
        self.eigenphase_int(mask) & ((1u64 << self.precision_bits) - 1)
    }

    /// Eigenphase in turns.
    pub fn phase_turns(&self, mask: SubsetMask) -> f64 {
        self.phase_bin(mask) as f64 / (1u64 << self.precision_bits) as f64
    }

    /// Per-element scaled values in turns.
    pub fn scaled_values(&self) -> Vec<f64> {
        let denom = (1u64 << self.precision_bits) as f64;
        self.values.iter().map(|&v| v as f64 / denom).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    pub(crate) const DEMO_VALUES: [u64; 7] = [56, 54, 52, 48, 28, 12, 2];
    pub(crate) const DEMO_TARGET: u64 = 102;

    fn demo_instance() -> ProblemInstance {
        ProblemInstance::normalize(DEMO_VALUES.to_vec(), DEMO_TARGET, Some(9)).unwrap()
    }

    #[test]
    fn demo_instance_scales_to_nine_bit_fractions() {
        let inst = demo_instance();
        assert_eq!(inst.precision_bits, 9);
        let expected = [
            0.109_375,
            0.105_468_75,
            0.101_562_5,
            0.093_75,
            0.054_687_5,
            0.023_437_5,
            0.003_906_25,
        ];
        let scaled = inst.oracle().scaled_values();
        for (got, want) in scaled.iter().zip(expected) {
            assert!((got - want).abs() < 1e-15, "{got} vs {want}");
        }
        // Auto-selection picks the same precision: 252 < 2^8.
        let auto = ProblemInstance::normalize(DEMO_VALUES.to_vec(), DEMO_TARGET, None).unwrap();
        assert_eq!(auto.precision_bits, 9);
    }

    #[test]
    fn smallest_precision_rule() {
        let inst = ProblemInstance::normalize(vec![1], 2, None).unwrap();
        assert_eq!(inst.precision_bits, 2);
        assert!((inst.oracle().scaled_values()[0] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn precision_override_too_small_is_rejected() {
        let err = ProblemInstance::normalize(vec![3, 3], 4, Some(3)).unwrap_err();
        assert!(matches!(err, Error::Precision(_)));
    }

    #[test]
    fn empty_value_list_is_rejected() {
        assert!(matches!(
            ProblemInstance::normalize(vec![], 1, None),
            Err(Error::Instance(_))
        ));
    }

    #[test]
    fn eigenphase_of_known_masks() {
        let oracle = demo_instance().oracle();
        assert_eq!(oracle.eigenphase_int(SubsetMask(0)), 0);
        // Elements 2 and 3 (52 + 48).
        let mask = SubsetMask(0b0001100);
        assert_eq!(oracle.eigenphase_int(mask), 100);
        assert!((oracle.phase_turns(mask) - 0.195_312_5).abs() < 1e-15);
        assert_eq!(oracle.eigenphase_int(SubsetMask((1 << 7) - 1)), 252);
    }

    #[test]
    fn mask_rendering() {
        assert_eq!(SubsetMask(0).render(7), "0000000");
        assert_eq!(SubsetMask(0b0001100).render(7), "0011000");
        assert_eq!(SubsetMask((1 << 7) - 1).render(7), "1111111");
    }

    #[test]
    fn zero_target_is_legal() {
        let inst = ProblemInstance::normalize(vec![5, 6], 0, None).unwrap();
        assert_eq!(inst.target, 0);
    }

    #[test]
    fn eigenphases_stay_below_half_a_turn() {
        let oracle = demo_instance().oracle();
        let half = 1u64 << (oracle.precision_bits() - 1);
        let max = (0..1u64 << 7)
            .map(|m| oracle.eigenphase_int(SubsetMask(m)))
            .max()
            .unwrap();
        assert!(max < half);
    }

    proptest! {
        #[test]
        fn eigenphase_is_additive_over_disjoint_masks(
            values in proptest::collection::vec(0u64..50, 1..=10),
            a in 0u64..1024,
            b in 0u64..1024,
        ) {
            let n = values.len();
            let full = (1u64 << n) - 1;
            let a = a & full;
            let b = b & full & !a;
            let inst = ProblemInstance::normalize(values, 1, None).unwrap();
            let oracle = inst.oracle();
            prop_assert_eq!(
                oracle.eigenphase_int(SubsetMask(a | b)),
                oracle.eigenphase_int(SubsetMask(a)) + oracle.eigenphase_int(SubsetMask(b))
            );
        }

        #[test]
        fn render_then_parse_round_trips(mask in 0u64..1024, n in 10usize..=10) {
            let rendered = SubsetMask(mask).render(n);
            prop_assert_eq!(SubsetMask::parse(&rendered).unwrap(), SubsetMask(mask));
        }
    }
}
