use super::allocation::{GradientAllocation, ValueAllocation};
use super::Estimate;
use crate::error::{Error, Result};
use crate::scalar::Real;

fn check_counts<T>(samples: &[Vec<T>], shots: &[u64]) -> Result<()> {
    if samples.len() != shots.len() {
        return Err(Error::TermCount {
            expected: shots.len(),
            actual: samples.len(),
        });
    }
    for (j, (s, &r)) in samples.iter().zip(shots).enumerate() {
        if s.len() as u64 != r {
            return Err(Error::SampleCount {
                term: j,
                expected: r,
                actual: s.len(),
            });
        }
        if r == 0 {
            return Err(Error::NoShots(j));
        }
    }
    Ok(())
}

fn mean<T: Real>(xs: &[T]) -> T {
    xs.iter().copied().sum::<T>() / T::from_count(xs.len() as u64)
}

/// `f̂ = Σ_j mean(χ_j)`, unbiased with variance bound `ε_f`.
pub fn estimate_sm_f<T: Real>(samples: &[Vec<T>], alloc: &ValueAllocation<T>) -> Result<Estimate<T>> {
    check_counts(samples, &alloc.shots)?;
    let value = samples.iter().map(|s| mean(s)).sum();
    Ok(Estimate::unbiased(value, alloc.epsilon, alloc.total()))
}

/// `∂̂_k f = Σ_j [mean(χ_{j+}) − mean(χ_{j−})]/2`, unbiased with variance
/// bound `ε_∂k`.
pub fn estimate_sm_df<T: Real>(
    samples_plus: &[Vec<T>],
    samples_minus: &[Vec<T>],
    alloc: &GradientAllocation<T>,
) -> Result<Estimate<T>> {
    check_counts(samples_plus, &alloc.plus)?;
    check_counts(samples_minus, &alloc.minus)?;
    let two = T::lit(2.0);
    let value = samples_plus
        .iter()
        .zip(samples_minus)
        .map(|(p, m)| (mean(p) - mean(m)) / two)
        .sum();
    Ok(Estimate::unbiased(value, alloc.epsilon, alloc.total()))
}
