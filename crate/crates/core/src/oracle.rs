//! Independent ground-truth estimators used to check that computed
//! bounds bracket the true output probability: exhaustive enumeration
//! for finite discrete instances and seeded Monte-Carlo sampling with
//! exact (Clopper-Pearson) binomial confidence intervals for
//! continuous ones.

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use statrs::distribution::{Beta, ContinuousCDF};
use thiserror::Error;

use crate::forward::OutputEvent;
use crate::lang::{eval, ConcreteResult, EvalError, Program};
use crate::num::Rational;
use crate::partition::{InputPartition, PartitionMode};

/// Fixed worker count so results never depend on the machine's
/// parallelism; each worker draws from its own seeded stream.
const WORKERS: u64 = 16;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum OracleError {
    #[error("Monte-Carlo sampling requires a continuous-real partition")]
    NotContinuous,
    #[error("Monte-Carlo sampling requires bounded cells (dimension `{0}`)")]
    UnboundedCell(String),
    #[error("confidence level {0} is outside (0, 1)")]
    BadConfidence(f64),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// One event's Monte-Carlo estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleEstimate {
    pub event: String,
    pub samples: u64,
    pub hits: u64,
    /// Exact hit fraction.
    pub estimate: Rational,
    pub ci_low: f64,
    pub ci_high: f64,
    pub confidence: f64,
    /// Fraction of runs that exceeded the step budget. Those runs count
    /// as the divergence atom for event membership.
    pub diverged_fraction: f64,
}

/// Exact output probabilities of a finite weighted input set: run every
/// point and sum weights per event. Budget-exceeded points count as the
/// divergence atom, so the result is exact only when the budget covers
/// every terminating point.
pub fn exhaustive(
    program: &Program,
    weighted_points: &[(Vec<Rational>, Rational)],
    events: &[OutputEvent],
    budget: u64,
) -> Result<Vec<(String, Rational)>, OracleError> {
    let mut totals: Vec<Rational> = vec![Rational::zero(); events.len()];
    for (args, weight) in weighted_points {
        let result = eval(program, args, budget)?;
        for (event, total) in events.iter().zip(&mut totals) {
            let hit = match &result {
                ConcreteResult::Value(v) => event.shape.contains_value(v),
                ConcreteResult::BudgetExceeded { .. } => event.shape.may_diverge(),
            };
            if hit {
                *total += weight;
            }
        }
    }
    Ok(events
        .iter()
        .zip(totals)
        .map(|(e, t)| (e.name.clone(), t))
        .collect())
}

/// A uniform random rational in [0, 1) with 64-bit resolution.
fn unit_sample(rng: &mut ChaCha8Rng) -> Rational {
    let numer: u64 = rng.random();
    Rational::new(BigInt::from(numer), BigInt::one() << 64)
}

struct SamplePlan {
    /// Cumulative cell weights for inverse-transform cell selection.
    cumulative: Vec<Rational>,
    /// Per-dimension (lo, width) for every cell, in `dims` order.
    cells: Vec<Vec<(Rational, Rational)>>,
}

impl SamplePlan {
    fn new(partition: &InputPartition) -> Result<SamplePlan, OracleError> {
        if partition.mode() != PartitionMode::ContinuousReal {
            return Err(OracleError::NotContinuous);
        }
        let mut cumulative = Vec::with_capacity(partition.len());
        let mut acc = Rational::zero();
        for cell in partition.cells() {
            acc += &cell.weight;
            cumulative.push(acc.clone());
        }
        let mut cells = Vec::with_capacity(partition.len());
        for cell in partition.cells() {
            let mut dims = Vec::with_capacity(partition.dims().len());
            for name in partition.dims() {
                let itv = &cell.region[name];
                if !itv.is_finite() {
                    return Err(OracleError::UnboundedCell(name.clone()));
                }
                let lo = itv.lo().finite().unwrap().clone();
                let hi = itv.hi().finite().unwrap().clone();
                let width = &hi - &lo;
                dims.push((lo, width));
            }
            cells.push(dims);
        }
        Ok(SamplePlan { cumulative, cells })
    }

    /// Pick a cell by weight, then a point uniformly inside it.
    fn draw(&self, rng: &mut ChaCha8Rng) -> Vec<Rational> {
        let u = unit_sample(rng);
        let cell = self.cumulative.partition_point(|c| *c <= u).min(self.cells.len() - 1);
        self.cells[cell]
            .iter()
            .map(|(lo, width)| lo + width * unit_sample(rng))
            .collect()
    }
}

/// Exact two-sided binomial confidence interval at the given level.
pub fn clopper_pearson(hits: u64, samples: u64, confidence: f64) -> (f64, f64) {
    assert!(samples > 0);
    let alpha = 1.0 - confidence;
    let k = hits as f64;
    let n = samples as f64;
    let low = if hits == 0 {
        0.0
    } else {
        Beta::new(k, n - k + 1.0).unwrap().inverse_cdf(alpha / 2.0)
    };
    let high = if hits == samples {
        1.0
    } else {
        Beta::new(k + 1.0, n - k).unwrap().inverse_cdf(1.0 - alpha / 2.0)
    };
    (low, high)
}

/// Seeded Monte-Carlo estimates for every event.
///
/// Sampling picks a cell by weight and a point uniformly within it —
/// exact for the piecewise-constant densities partitions carry. The
/// sample budget is split over a fixed number of worker streams derived
/// from the seed, so results are identical regardless of scheduling.
pub fn mc_estimate(
    program: &Program,
    partition: &InputPartition,
    events: &[OutputEvent],
    samples: u64,
    seed: u64,
    budget: u64,
    confidence: f64,
) -> Result<Vec<OracleEstimate>, OracleError> {
    assert!(samples >= 1);
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(OracleError::BadConfidence(confidence));
    }
    let plan = SamplePlan::new(partition)?;

    let per_worker: Vec<u64> = (0..WORKERS)
        .map(|w| samples / WORKERS + u64::from(w < samples % WORKERS))
        .collect();
    let counts: Result<Vec<(Vec<u64>, u64)>, OracleError> = per_worker
        .par_iter()
        .enumerate()
        .map(|(worker, &quota)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(worker as u64 + 1);
            let mut hits = vec![0u64; events.len()];
            let mut diverged = 0u64;
            for _ in 0..quota {
                let args = plan.draw(&mut rng);
                let result = eval(program, &args, budget)?;
                if matches!(result, ConcreteResult::BudgetExceeded { .. }) {
                    diverged += 1;
                }
                for (event, hit) in events.iter().zip(&mut hits) {
                    let is_hit = match &result {
                        ConcreteResult::Value(v) => event.shape.contains_value(v),
                        ConcreteResult::BudgetExceeded { .. } => event.shape.may_diverge(),
                    };
                    if is_hit {
                        *hit += 1;
                    }
                }
            }
            Ok((hits, diverged))
        })
        .collect();
    let counts = counts?;

    let mut hits = vec![0u64; events.len()];
    let mut diverged = 0u64;
    for (worker_hits, worker_diverged) in counts {
        for (total, h) in hits.iter_mut().zip(worker_hits) {
            *total += h;
        }
        diverged += worker_diverged;
    }

    let diverged_fraction = diverged as f64 / samples as f64;
    Ok(events
        .iter()
        .zip(hits)
        .map(|(event, k)| {
            let (ci_low, ci_high) = clopper_pearson(k, samples, confidence);
            OracleEstimate {
                event: event.name.clone(),
                samples,
                hits: k,
                estimate: Rational::new(BigInt::from(k), BigInt::from(samples)),
                ci_low,
                ci_high,
                confidence,
                diverged_fraction,
            }
        })
        .collect())
}

/// `estimate` as an f64 for reporting.
pub fn estimate_f64(e: &OracleEstimate) -> f64 {
    e.estimate.to_f64().unwrap_or(f64::NAN)
}
