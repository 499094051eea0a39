//! Filter stage: marks basis states whose phase-register value is strictly
//! below the target and iterates mark-and-reflect rounds to concentrate
//! probability on the feasible set L.
//!
//! Feasibility counts come from exact amplitude support (a simulator
//! privilege; the sampling-based counting subroutine is out of scope). An
//! exact projection mode removes every infeasible component outright, which
//! isolates the maximum-finding stage from amplification residuals.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pea::{INDEX_SEGMENT, PHASE_SEGMENT};
use crate::sim::State;

/// Support below this probability is treated as numerically zero.
const SUPPORT_EPSILON: f64 = 1e-16;

/// Outcome of the filter stage over the feasible set L (phase < target)
/// and its complement L'.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterReport {
    /// |L|: index values whose phase is strictly below the target.
    pub count_feasible: u64,
    /// |L'|: the complement; `count_feasible + count_infeasible = 2^n`.
    pub count_infeasible: u64,
    /// Mark-and-reflect rounds applied.
    pub iterations: u32,
    pub good_probability_before: f64,
    /// Probability mass on L after the iterations (before any exact
    /// projection).
    pub good_probability_after: f64,
    pub residual_bad_probability: f64,
}

fn phase_geometry(state: &State) -> Result<(usize, u64)> {
    let shift = state.layout().shift(PHASE_SEGMENT)?;
    let width = state.layout().width(PHASE_SEGMENT)?;
    Ok((shift, (1u64 << width) - 1))
}

/// Negates every amplitude whose phase value satisfies the predicate.
pub fn mark_phase_where<F>(state: &mut State, predicate: F) -> Result<()>
where
    F: Fn(u64) -> bool,
{
    let (shift, mask) = phase_geometry(state)?;
    for (idx, amp) in state.amplitudes_mut().iter_mut().enumerate() {
        if predicate((idx >> shift) as u64 & mask) {
            *amp = -*amp;
        }
    }
    Ok(())
}

/// Sign-flips the components with phase strictly below the target.
pub fn mark_below_target(state: &mut State, target: u64) -> Result<()> {
    mark_phase_where(state, |phase| phase < target)
}

/// Probability mass on components whose phase satisfies the predicate.
pub fn probability_where<F>(state: &State, predicate: F) -> Result<f64>
where
    F: Fn(u64) -> bool,
{
    let (shift, mask) = phase_geometry(state)?;
    Ok(state
        .amplitudes()
        .iter()
        .enumerate()
        .filter(|(idx, _)| predicate((idx >> shift) as u64 & mask))
        .map(|(_, a)| a.norm_sqr())
        .sum())
}

/// Number of distinct index values whose support lies at a phase satisfying
/// the predicate.
pub fn count_feasible_where<F>(state: &State, predicate: F) -> Result<u64>
where
    F: Fn(u64) -> bool,
{
    let (shift, mask) = phase_geometry(state)?;
    let index_shift = state.layout().shift(INDEX_SEGMENT)?;
    let index_width = state.layout().width(INDEX_SEGMENT)?;
    let mut seen = vec![false; 1usize << index_width];
    for (idx, amp) in state.amplitudes().iter().enumerate() {
        if amp.norm_sqr() > SUPPORT_EPSILON && predicate((idx >> shift) as u64 & mask) {
            seen[(idx >> index_shift) & ((1 << index_width) - 1)] = true;
        }
    }
    Ok(seen.iter().filter(|&&s| s).count() as u64)
}

/// Number of distinct index values with support strictly below the target.
pub fn count_feasible(state: &State, target: u64) -> Result<u64> {
    count_feasible_where(state, |phase| phase < target)
}

/// Iteration count for the amplification schedule:
/// `k = round(π / (4·asin(√(|L|/N))) − 1/2)`, floored at zero.
pub fn plan_iterations(count_feasible: u64, total: u64, override_k: Option<u32>) -> Result<u32> {
    if count_feasible == 0 {
        return Err(Error::Infeasible);
    }
    if count_feasible > total {
        return Err(Error::Usage(format!(
            "feasible count {count_feasible} exceeds total {total}"
        )));
    }
    if let Some(k) = override_k {
        return Ok(k);
    }
    let theta = ((count_feasible as f64 / total as f64).sqrt()).asin();
    let k = std::f64::consts::PI / (4.0 * theta) - 0.5;
    Ok(k.round().max(0.0) as u32)
}

/// Applies `k` rounds of mark-and-reflect about `pivot` (the post-estimation
/// state) using an arbitrary feasibility predicate on the phase value.
pub fn run_filter_where<F>(
    state: &State,
    pivot: &State,
    predicate: F,
    iterations: u32,
) -> Result<(State, FilterReport)>
where
    F: Fn(u64) -> bool,
{
    let count_feasible = count_feasible_where(state, &predicate)?;
    let index_width = state.layout().width(INDEX_SEGMENT)?;
    let total = 1u64 << index_width;
    if count_feasible == 0 {
        return Err(Error::Infeasible);
    }

    let good_before = probability_where(state, &predicate)?;
    let mut filtered = state.clone();
    for _ in 0..iterations {
        mark_phase_where(&mut filtered, &predicate)?;
        filtered.reflect_about(pivot)?;
    }
    let good_after = probability_where(&filtered, &predicate)?;

    let report = FilterReport {
        count_feasible,
        count_infeasible: total - count_feasible,
        iterations,
        good_probability_before: good_before,
        good_probability_after: good_after,
        residual_bad_probability: 1.0 - good_after,
    };
    Ok((filtered, report))
}

/// Subset-sum specialization: feasible means phase strictly below `target`.
pub fn run_filter(
    state: &State,
    pivot: &State,
    target: u64,
    iterations: u32,
) -> Result<(State, FilterReport)> {
    run_filter_where(state, pivot, |phase| phase < target, iterations)
}

/// Exact-filter debug mode: removes every component whose phase fails the
/// predicate and renormalizes. Returns the retained probability mass.
pub fn project_feasible_where<F>(state: &mut State, predicate: F) -> Result<f64>
where
    F: Fn(u64) -> bool,
{
    let (shift, mask) = phase_geometry(state)?;
    let retained: f64 = state
        .amplitudes()
        .iter()
        .enumerate()
        .filter(|(idx, _)| predicate((idx >> shift) as u64 & mask))
        .map(|(_, a)| a.norm_sqr())
        .sum();
    if retained <= SUPPORT_EPSILON {
        return Err(Error::Infeasible);
    }
    let scale = 1.0 / retained.sqrt();
    for (idx, amp) in state.amplitudes_mut().iter_mut().enumerate() {
        if predicate((idx >> shift) as u64 & mask) {
            *amp *= scale;
        } else {
            *amp = num_complex::Complex64::new(0.0, 0.0);
        }
    }
    Ok(retained)
}

pub fn project_feasible(state: &mut State, target: u64) -> Result<f64> {
    project_feasible_where(state, |phase| phase < target)
}

/// Closed-form success probability of the amplification schedule:
/// `sin²((2k+1)·asin(√(count/total)))`.
pub fn closed_form_good_probability(count_feasible: u64, total: u64, iterations: u32) -> f64 {
    let theta = ((count_feasible as f64 / total as f64).sqrt()).asin();
    let s = ((2.0 * f64::from(iterations) + 1.0) * theta).sin();
    s * s
}
