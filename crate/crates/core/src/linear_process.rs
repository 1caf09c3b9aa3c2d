//! Causal ARMA models: coefficient expansion into a truncated moving average
//! and simulation driven by heavy-tailed innovations.
//!
//! An ARMA(p, q) process `X_t - phi_1 X_{t-1} - ... = Z_t + theta_1 Z_{t-1} + ...`
//! with all AR roots outside the closed unit disk admits the moving-average
//! form `X_t = sum_j c_j Z_{t-j}`, where the `c_j` satisfy
//! `c_j = theta_j + sum_{i=1..min(j,p)} phi_i c_{j-i}` (with `theta_0 = 1`).

use std::io::Write;

use crate::error::{Error, Result};
use crate::heavy_tail::{sample_innovations, InnovationSpec};
use crate::scalar::Real;

/// Causality margin: the companion spectral radius must stay below
/// `1 - CAUSALITY_MARGIN`.
const CAUSALITY_MARGIN: f64 = 1e-9;

/// Hard cap on the automatic truncation order.
const MAX_AUTO_ORDER: usize = 10_000;

/// Relative target for the automatic truncation residual.
const AUTO_RESIDUAL_REL: f64 = 1e-10;

/// An ARMA(p, q) parameterization: `phi` are the autoregressive coefficients,
/// `theta` the moving-average coefficients (the leading 1 is implicit).
#[derive(Debug, Clone, PartialEq)]
pub struct ArmaSpec<F> {
    phi: Vec<F>,
    theta: Vec<F>,
}

impl<F: Real> ArmaSpec<F> {
    /// Builds a spec from finite coefficients. Causality is checked where the
    /// moving-average expansion is actually formed, so that explosive specs
    /// can still be constructed and diagnosed via [`check_causality`].
    pub fn new(phi: Vec<F>, theta: Vec<F>) -> Result<Self> {
        if phi.iter().chain(theta.iter()).any(|c| !c.is_finite()) {
            return Err(Error::invalid("phi/theta", "coefficients must be finite"));
        }
        Ok(Self { phi, theta })
    }

    /// Pure noise: p = q = 0, so `X_t = Z_t`.
    pub fn white_noise() -> Self {
        Self {
            phi: Vec::new(),
            theta: Vec::new(),
        }
    }

    pub fn phi(&self) -> &[F] {
        &self.phi
    }

    pub fn theta(&self) -> &[F] {
        &self.theta
    }

    /// See [`check_causality`].
    pub fn check_causality(&self) -> (bool, F) {
        check_causality(self)
    }
}

/// Spectral radius of the companion matrix of the AR part.
///
/// Uses norm growth under repeated squaring: with `M ~ A^(2^j)` kept at unit
/// Frobenius norm and the log-scale accumulated separately, the estimate
/// `exp(log||A^(2^j)|| / 2^j)` converges to the radius for every real matrix,
/// including companion matrices whose dominant eigenvalues form a complex
/// pair. Iteration stops at relative tolerance 1e-10 or 64 squarings.
pub fn spectral_radius<F: Real>(phi: &[F]) -> F {
    let p = phi.len();
    if p == 0 {
        return F::zero();
    }
    if p == 1 {
        return phi[0].abs();
    }

    // Companion matrix: first row phi_1..phi_p, identity on the subdiagonal.
    let mut m = vec![0.0f64; p * p];
    for (j, c) in phi.iter().enumerate() {
        m[j] = c.to_f64_lossy();
    }
    for i in 1..p {
        m[i * p + (i - 1)] = 1.0;
    }

    let frobenius = |a: &[f64]| a.iter().map(|v| v * v).sum::<f64>().sqrt();

    let mut norm = frobenius(&m);
    if norm == 0.0 {
        return F::zero();
    }
    for v in m.iter_mut() {
        *v /= norm;
    }
    let mut log_scale = norm.ln();
    let mut estimate = norm;

    let mut scratch = vec![0.0f64; p * p];
    for j in 1..=64 {
        // scratch = m * m
        for r in 0..p {
            for c in 0..p {
                let mut acc = 0.0;
                for t in 0..p {
                    acc += m[r * p + t] * m[t * p + c];
                }
                scratch[r * p + c] = acc;
            }
        }
        std::mem::swap(&mut m, &mut scratch);

        norm = frobenius(&m);
        if norm == 0.0 {
            // Nilpotent companion: every eigenvalue is zero.
            return F::zero();
        }
        for v in m.iter_mut() {
            *v /= norm;
        }
        log_scale = 2.0 * log_scale + norm.ln();

        let next = (log_scale / (1u64 << j) as f64).exp();
        if (next - estimate).abs() <= 1e-10 * next.max(1.0) {
            return F::from_f64_lossy(next);
        }
        estimate = next;
    }
    F::from_f64_lossy(estimate)
}

/// Returns whether the AR polynomial has all roots strictly outside the
/// closed unit disk, together with the companion spectral radius. Vacuously
/// true when p = 0.
pub fn check_causality<F: Real>(spec: &ArmaSpec<F>) -> (bool, F) {
    let radius = spectral_radius(spec.phi());
    let bound = F::one() - F::from_f64_lossy(CAUSALITY_MARGIN);
    (radius < bound, radius)
}

/// Default summability exponent `min(1/gamma, 1) / 2`.
pub fn default_delta<F: Real>(gamma: F) -> F {
    gamma.recip().min(F::one()) * F::from_f64_lossy(0.5)
}

/// A truncated moving-average coefficient sequence `c_0..c_m` together with
/// its summability summaries.
#[derive(Debug, Clone, PartialEq)]
pub struct MaCoefficients<F> {
    c: Vec<F>,
    truncation_order: usize,
    delta: F,
    summability_value: F,
    tail_constant: F,
    truncation_residual: F,
}

impl<F: Real> MaCoefficients<F> {
    /// Expands a causal ARMA spec to order `m` via the power-series
    /// recurrence. `delta` must satisfy `0 < delta < min(1/gamma, 1)`.
    pub fn from_arma(spec: &ArmaSpec<F>, m: usize, gamma: F, delta: F) -> Result<Self> {
        let (causal, radius) = check_causality(spec);
        if !causal {
            return Err(Error::NonCausal {
                spectral_radius: radius.to_f64_lossy(),
            });
        }
        validate_gamma(gamma)?;
        validate_delta(delta, gamma)?;

        let c = expand_recurrence(spec, m);
        let residual = if spec.phi().is_empty() {
            // Pure moving average: the dropped remainder is the tail of the
            // theta vector itself, exactly.
            spec.theta()
                .iter()
                .skip(m)
                .map(|t| t.abs().powf(delta))
                .sum()
        } else {
            estimate_tail_residual(&c, delta)
        };
        Self::from_parts(c, gamma, delta, residual)
    }

    /// Expands with the default `delta` and a truncation order chosen so that
    /// the estimated residual of `sum |c_j|^delta` drops below 1e-10 of the
    /// computed sum, capped at 10_000 terms.
    pub fn from_arma_auto(spec: &ArmaSpec<F>, gamma: F) -> Result<Self> {
        validate_gamma(gamma)?;
        let delta = default_delta(gamma);
        let mut m = (spec.phi().len() + spec.theta().len() + 16).max(64);
        loop {
            let coeffs = Self::from_arma(spec, m, gamma, delta)?;
            let target = coeffs.summability_value * F::from_f64_lossy(AUTO_RESIDUAL_REL);
            if coeffs.truncation_residual <= target {
                return Ok(coeffs);
            }
            if m >= MAX_AUTO_ORDER {
                log::warn!(
                    "moving-average truncation capped at {MAX_AUTO_ORDER} terms \
                     (residual {} > target {})",
                    coeffs.truncation_residual,
                    target
                );
                return Ok(coeffs);
            }
            m = (m * 2).min(MAX_AUTO_ORDER);
        }
    }

    /// Wraps an explicit coefficient vector (used for hand-built filters).
    pub fn from_coefficients(c: Vec<F>, gamma: F, delta: F) -> Result<Self> {
        validate_gamma(gamma)?;
        validate_delta(delta, gamma)?;
        if c.is_empty() {
            return Err(Error::invalid("c", "coefficient vector is empty"));
        }
        if c.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("c", "coefficients must be finite"));
        }
        if c.iter().all(|v| v.is_zero()) {
            return Err(Error::invalid("c", "at least one coefficient must be nonzero"));
        }
        // An explicit vector is the exact filter: nothing has been dropped.
        Self::from_parts(c, gamma, delta, F::zero())
    }

    fn from_parts(c: Vec<F>, gamma: F, delta: F, truncation_residual: F) -> Result<Self> {
        let summability_value = c.iter().map(|v| v.abs().powf(delta)).sum();
        let tail_constant = tail_constant_of(&c, gamma);
        Ok(Self {
            truncation_order: c.len() - 1,
            c,
            delta,
            summability_value,
            tail_constant,
            truncation_residual,
        })
    }

    /// The coefficients `c_0..c_m`.
    pub fn coefficients(&self) -> &[F] {
        &self.c
    }

    /// Truncation order `m`.
    pub fn truncation_order(&self) -> usize {
        self.truncation_order
    }

    pub fn delta(&self) -> F {
        self.delta
    }

    /// `sum_j |c_j|^delta` over the retained terms.
    pub fn summability_value(&self) -> F {
        self.summability_value
    }

    /// `||c|| = sum_j |c_j|^(1/gamma)` at the construction `gamma`.
    pub fn tail_constant(&self) -> F {
        self.tail_constant
    }

    /// Estimated value of the dropped tail `sum_{j>m} |c_j|^delta`.
    pub fn truncation_residual(&self) -> F {
        self.truncation_residual
    }

    /// `sum_j |c_j|^(1/gamma)` for an arbitrary positive `gamma`.
    pub fn tail_constant_for(&self, gamma: F) -> Result<F> {
        validate_gamma(gamma)?;
        Ok(tail_constant_of(&self.c, gamma))
    }

    /// Writes `index,coefficient` rows for inspection.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["index", "coefficient"])?;
        for (j, c) in self.c.iter().enumerate() {
            w.write_record([j.to_string(), format!("{:.16e}", c.to_f64_lossy())])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn validate_gamma<F: Real>(gamma: F) -> Result<()> {
    if !(gamma.is_finite() && gamma > F::zero()) {
        return Err(Error::invalid("gamma", format!("must be > 0, got {gamma}")));
    }
    Ok(())
}

fn validate_delta<F: Real>(delta: F, gamma: F) -> Result<()> {
    let upper = gamma.recip().min(F::one());
    if !(delta.is_finite() && delta > F::zero() && delta < upper) {
        return Err(Error::invalid(
            "delta",
            format!("must lie in (0, min(1/gamma, 1)) = (0, {upper}), got {delta}"),
        ));
    }
    Ok(())
}

/// Power-series recurrence `c_j = theta_j + sum_{i=1..min(j,p)} phi_i c_{j-i}`
/// with `theta_0 = 1`.
fn expand_recurrence<F: Real>(spec: &ArmaSpec<F>, m: usize) -> Vec<F> {
    let p = spec.phi().len();
    let q = spec.theta().len();
    let mut c = Vec::with_capacity(m + 1);
    for j in 0..=m {
        let mut value = if j == 0 {
            F::one()
        } else if j <= q {
            spec.theta()[j - 1]
        } else {
            F::zero()
        };
        for i in 1..=p.min(j) {
            value += spec.phi()[i - 1] * c[j - i];
        }
        c.push(value);
    }
    c
}

fn tail_constant_of<F: Real>(c: &[F], gamma: F) -> F {
    let exponent = gamma.recip();
    c.iter()
        .map(|v| {
            if v.is_zero() {
                F::zero()
            } else {
                v.abs().powf(exponent)
            }
        })
        .sum()
}

/// Geometric extrapolation of the dropped tail of `sum |c_j|^delta`.
///
/// The per-step decay ratio is read off the last two nonzero coefficients,
/// searched from a trailing window of at least 10 terms. Interior zeros
/// (e.g. seasonal-style gaps) are tolerated: extrapolation only happens when
/// the trailing zero run is shorter than the gap between those nonzeros;
/// a longer run means the sequence has terminated and nothing was dropped.
fn estimate_tail_residual<F: Real>(c: &[F], delta: F) -> F {
    let m = c.len() - 1;
    let window = 10.max(c.len() / 4).min(c.len());
    let start = c.len() - window;

    let Some(b) = (start..=m).rev().find(|&j| !c[j].is_zero()) else {
        return F::zero(); // a whole window of zeros: terminated
    };
    let Some(a) = (0..b).rev().find(|&j| !c[j].is_zero()) else {
        // Only c_b is nonzero; with zeros after it the sequence is dead,
        // otherwise the last magnitude is all the scale information there is.
        return if b < m {
            F::zero()
        } else {
            c[b].abs().powf(delta)
        };
    };

    let gap = b - a;
    if m - b >= gap {
        // The next expected nonzero never arrived: terminated sequence.
        return F::zero();
    }

    let ratio = (c[b].abs() / c[a].abs()).powf(F::from_usize_lossy(gap).recip());
    if !ratio.is_finite() || ratio >= F::one() {
        return F::infinity();
    }
    // sum_{j>m} |c_j|^delta <= |c_b|^delta * rho^delta / (1 - rho^delta)
    let rho_delta = ratio.powf(delta);
    c[b].abs().powf(delta) * rho_delta / (F::one() - rho_delta)
}

/// Simulates `X_1..X_n` for the truncated moving average driven by the given
/// innovation law: `n + m` innovations are drawn so every output has a full
/// coefficient window (the first `m` serve as burn-in).
pub fn simulate_process<F: Real>(
    coeffs: &MaCoefficients<F>,
    innovations: &InnovationSpec<F>,
    n: usize,
    seed: u64,
) -> Vec<F> {
    let c = coeffs.coefficients();
    let m = coeffs.truncation_order();
    let z = sample_innovations(innovations, n + m, seed);
    (0..n)
        .map(|t| {
            let mut acc = F::zero();
            for (j, &cj) in c.iter().enumerate() {
                acc += cj * z[m + t - j];
            }
            acc
        })
        .collect()
}
