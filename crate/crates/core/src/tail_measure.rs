//! Order statistics of absolute values, empirical tail measures, and the
//! closed-form scale functions of the exact-Pareto model.
//!
//! Order statistics are indexed from the top: `abs_order_statistic(j)` is the
//! `(j+1)`th largest absolute value. The threshold of an excess sample with
//! `k` excesses is the `(k+1)`th largest absolute value, and the excesses are
//! the gaps between the top `k` values and that threshold.

use crate::error::{Error, Result};
use crate::heavy_tail::InnovationSpec;
use crate::linear_process::MaCoefficients;
use crate::scalar::Real;

/// Sorted absolute order statistics with the top-`k` excesses over the
/// `(k+1)`th largest value.
#[derive(Debug, Clone, PartialEq)]
pub struct ExcessSample<F> {
    sorted_abs: Vec<F>,
    n: usize,
    k: usize,
    threshold: F,
    excesses: Vec<F>,
}

impl<F: Real> ExcessSample<F> {
    /// Sorts `|series|` in descending order and extracts the `k` excesses.
    /// Requires `1 <= k < n`; NaN inputs are rejected up front because order
    /// statistics are undefined for them.
    pub fn new(series: &[F], k: usize) -> Result<Self> {
        let n = series.len();
        if series.iter().any(|x| x.is_nan()) {
            return Err(Error::invalid("series", "contains NaN"));
        }
        if k == 0 || k >= n {
            return Err(Error::invalid(
                "k",
                format!("requires 1 <= k < n, got k={k}, n={n}"),
            ));
        }
        let mut sorted_abs: Vec<F> = series.iter().map(|x| x.abs()).collect();
        sorted_abs.sort_unstable_by(|a, b| b.partial_cmp(a).expect("NaN rejected above"));

        let threshold = sorted_abs[k];
        let excesses = sorted_abs[..k].iter().map(|&v| v - threshold).collect();
        Ok(Self {
            sorted_abs,
            n,
            k,
            threshold,
            excesses,
        })
    }

    /// All absolute values, descending.
    pub fn sorted_abs(&self) -> &[F] {
        &self.sorted_abs
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// The `(k+1)`th largest absolute value.
    pub fn threshold(&self) -> F {
        self.threshold
    }

    /// The nonincreasing excesses `Y_i`, `i = 0..k`.
    pub fn excesses(&self) -> &[F] {
        &self.excesses
    }

    /// The `(j+1)`th largest absolute value.
    pub fn abs_order_statistic(&self, j: usize) -> F {
        self.sorted_abs[j]
    }

    /// Excess tail measure: `(1/k) * #{i : |X_i| - threshold > sigma_scale * z}`
    /// for `z >= 0`. Never exceeds 1, since at most `k` values lie strictly
    /// above the threshold.
    pub fn excess_measure(&self, sigma_scale: F, z: F) -> F {
        debug_assert!(sigma_scale > F::zero());
        debug_assert!(z >= F::zero());
        let level = sigma_scale * z;
        let mut count = 0usize;
        for &v in &self.sorted_abs {
            // The values are descending, so the first failure ends the scan.
            if v - self.threshold > level {
                count += 1;
            } else {
                break;
            }
        }
        F::from_usize_lossy(count) / F::from_usize_lossy(self.k)
    }

    /// Normalized intermediate order statistic `|X|_(ceil(k*s)) / b_scale`.
    pub fn intermediate_order_ratio(&self, s: F, b_scale: F) -> Result<F> {
        intermediate_ratio_from_sorted(&self.sorted_abs, self.k, s, b_scale)
    }

    /// Hill estimator built from the stored order statistics:
    /// `(1/k) * sum_{i<k} log(|X|_(i) / threshold)`. The threshold must be
    /// positive.
    pub fn hill(&self) -> Result<F> {
        if self.threshold <= F::zero() {
            return Err(Error::invalid(
                "series",
                format!("Hill estimator needs a positive threshold, got {}", self.threshold),
            ));
        }
        let sum: F = self.sorted_abs[..self.k]
            .iter()
            .map(|&v| (v / self.threshold).ln())
            .sum();
        Ok(sum / F::from_usize_lossy(self.k))
    }
}

/// Tail empirical measure `(1/k) * #{i : |X_i| > b_scale * z}` computed over
/// the whole series.
pub fn tail_empirical_measure<F: Real>(series: &[F], b_scale: F, k: usize, z: F) -> F {
    debug_assert!(b_scale > F::zero());
    debug_assert!(z > F::zero());
    debug_assert!(k >= 1);
    let level = b_scale * z;
    let count = series.iter().filter(|x| x.abs() > level).count();
    F::from_usize_lossy(count) / F::from_usize_lossy(k)
}

/// Normalized intermediate order statistic of a raw series; sorts internally.
pub fn intermediate_order_ratio<F: Real>(series: &[F], k: usize, s: F, b_scale: F) -> Result<F> {
    if series.iter().any(|x| x.is_nan()) {
        return Err(Error::invalid("series", "contains NaN"));
    }
    let mut sorted_abs: Vec<F> = series.iter().map(|x| x.abs()).collect();
    sorted_abs.sort_unstable_by(|a, b| b.partial_cmp(a).expect("NaN rejected above"));
    intermediate_ratio_from_sorted(&sorted_abs, k, s, b_scale)
}

fn intermediate_ratio_from_sorted<F: Real>(
    sorted_abs: &[F],
    k: usize,
    s: F,
    b_scale: F,
) -> Result<F> {
    if k == 0 {
        return Err(Error::invalid("k", "must be at least 1"));
    }
    if !s.is_finite() || s <= F::zero() {
        return Err(Error::invalid("s", format!("must be > 0, got {s}")));
    }
    if !b_scale.is_finite() || b_scale <= F::zero() {
        return Err(Error::invalid("b_scale", format!("must be > 0, got {b_scale}")));
    }
    let index = (F::from_usize_lossy(k) * s).ceil().to_usize().ok_or_else(|| {
        Error::invalid("s", format!("ceil(k*s) overflows usize (k={k}, s={s})"))
    })?;
    if index >= sorted_abs.len() {
        return Err(Error::invalid(
            "s",
            format!(
                "ceil(k*s) = {index} exceeds the largest order statistic index {}",
                sorted_abs.len() - 1
            ),
        ));
    }
    Ok(sorted_abs[index] / b_scale)
}

/// Closed-form quantile and scale functions of the exact-Pareto model:
/// `b(t) = x_min * (||c|| t)^gamma` and `sigma(t) = gamma * b(t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaleFunctions<F> {
    x_min: F,
    gamma: F,
    tail_constant: F,
}

impl<F: Real> ScaleFunctions<F> {
    /// Builds the scale functions for a process with the given innovation law
    /// and moving-average coefficients. The tail constant is recomputed at
    /// the innovation tail index.
    pub fn new(innovations: &InnovationSpec<F>, coefficients: &MaCoefficients<F>) -> Result<Self> {
        let tail_constant = coefficients.tail_constant_for(innovations.gamma())?;
        if !(tail_constant > F::zero() && tail_constant.is_finite()) {
            return Err(Error::invalid(
                "coefficients",
                format!("tail constant must be positive and finite, got {tail_constant}"),
            ));
        }
        Ok(Self {
            x_min: innovations.x_min(),
            gamma: innovations.gamma(),
            tail_constant,
        })
    }

    pub fn gamma(&self) -> F {
        self.gamma
    }

    /// `||c|| = sum_j |c_j|^(1/gamma)`.
    pub fn tail_constant(&self) -> F {
        self.tail_constant
    }

    /// The `1 - 1/t` quantile of `|X|`: `x_min * (||c|| t)^gamma`, `t > 1`.
    pub fn b(&self, t: F) -> Result<F> {
        if !(t > F::one() && t.is_finite()) {
            return Err(Error::invalid("t", format!("must be > 1, got {t}")));
        }
        Ok(self.x_min * (self.tail_constant * t).powf(self.gamma))
    }

    /// The excess scale at threshold `b(t)`: exactly `gamma * b(t)` for
    /// power-law tails.
    pub fn sigma(&self, t: F) -> Result<F> {
        Ok(self.gamma * self.b(t)?)
    }
}

/// Evaluates `(b(t), sigma(t))` for the exact-Pareto linear process.
pub fn theoretical_scales<F: Real>(
    innovations: &InnovationSpec<F>,
    coefficients: &MaCoefficients<F>,
    t: F,
) -> Result<(F, F)> {
    let scales = ScaleFunctions::new(innovations, coefficients)?;
    Ok((scales.b(t)?, scales.sigma(t)?))
}

/// Pointwise limit of the tail empirical measure: `z^(-1/gamma)`.
pub fn tail_measure_limit<F: Real>(z: F, gamma: F) -> F {
    z.powf(-gamma.recip())
}

/// Pointwise limit of the excess tail measure: `(z*gamma + 1)^(-1/gamma)`.
pub fn excess_measure_limit<F: Real>(z: F, gamma: F) -> F {
    (z * gamma + F::one()).powf(-gamma.recip())
}
