//! Likelihood moment estimation for the Generalized Pareto distribution.
//!
//! Fitting the GPD shape `gamma` and scale `sigma` to threshold excesses
//! `Y_0 >= ... >= Y_{k-1}` reduces to a one-dimensional root problem in
//! `theta = gamma / sigma`:
//!
//! ```text
//! (1/k) sum_i (1 + theta Y_i)^(r / gbar(theta)) - 1/(1 - r) = 0,
//! gbar(theta) = (1/k) sum_i log(1 + theta Y_i),
//! ```
//!
//! which has exactly one positive root for `r < 1/2`, `r != 0`, the target
//! being strictly decreasing in `theta`. The solver runs Newton–Raphson
//! inside a sign-changing bracket found by geometric expansion from
//! `theta_0 = 1/mean(Y)`; any step leaving the bracket falls back to
//! bisection. Back-substitution gives `gamma = gbar(theta)` and
//! `sigma = gamma / theta`.
//!
//! The module also provides the population-limit functions `psi1`, `psi2`
//! and `psi` as quadratures, and the Hill estimator as a baseline for the
//! tail index.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::adaptive_quadrature;
use crate::scalar::Real;
use crate::tail_measure::ExcessSample;

/// Absolute tolerance of the psi quadratures.
const QUAD_ABS_TOL: f64 = 1e-10;

/// Maximum bisection depth of the psi quadratures.
const QUAD_MAX_LEVELS: usize = 60;

/// Cap on bracket expansions before giving up.
const MAX_BRACKET_EXPANSIONS: usize = 200;

/// Solver configuration.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LmeConfig<F> {
    /// Moment order `r < 1/2`, `r != 0`. Estimates are consistent for
    /// `r < 0`; positive values are accepted with a warning.
    pub r: F,
    /// Convergence threshold on `|target|`.
    pub newton_tol: F,
    /// Maximum number of refinement iterations after bracketing.
    pub max_iter: usize,
    /// Geometric factor used to expand the initial bracket.
    pub bracket_growth: F,
}

impl<F: Real> Default for LmeConfig<F> {
    fn default() -> Self {
        Self {
            r: -F::one(),
            newton_tol: F::from_f64_lossy(1e-10),
            max_iter: 100,
            bracket_growth: F::from_f64_lossy(4.0),
        }
    }
}

impl<F: Real> LmeConfig<F> {
    /// A default configuration with the given moment order.
    pub fn with_r(r: F) -> Self {
        Self {
            r,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let half = F::from_f64_lossy(0.5);
        if !(self.r.is_finite() && self.r < half && self.r != F::zero()) {
            return Err(Error::invalid(
                "r",
                format!("must satisfy r < 1/2 and r != 0, got {}", self.r),
            ));
        }
        if self.r > F::zero() {
            log::warn!(
                "r = {} lies in (0, 1/2): the equation is solvable but consistency is only \
                 guaranteed for r < 0",
                self.r
            );
        }
        if !(self.newton_tol.is_finite() && self.newton_tol > F::zero()) {
            return Err(Error::invalid("newton_tol", "must be positive"));
        }
        if self.max_iter < 1 {
            return Err(Error::invalid("max_iter", "must be at least 1"));
        }
        if !(self.bracket_growth.is_finite() && self.bracket_growth > F::one()) {
            return Err(Error::invalid("bracket_growth", "must exceed 1"));
        }
        Ok(())
    }
}

/// A converged (or best-effort) likelihood moment fit.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LmeFit<F> {
    /// Root of the reduced equation, `theta = gamma / sigma`.
    pub theta_hat: F,
    /// Shape estimate `gbar(theta_hat)`.
    pub gamma_hat: F,
    /// Scale estimate `gamma_hat / theta_hat`.
    pub sigma_hat: F,
    /// Number of excesses used.
    pub k: usize,
    /// Moment order of the fit.
    pub r: F,
    /// Target evaluations spent bracketing and refining.
    pub iterations: usize,
    /// Whether `|target(theta_hat)| <= newton_tol` was reached.
    pub converged: bool,
    /// `|target(theta_hat)|` at the reported root.
    pub final_residual: F,
}

fn validate_excesses<F: Real>(excesses: &[F]) -> Result<()> {
    if excesses.iter().any(|y| !y.is_finite() || *y < F::zero()) {
        return Err(Error::invalid(
            "excesses",
            "must be finite and nonnegative",
        ));
    }
    if excesses.iter().all(|y| y.is_zero()) {
        return Err(Error::DegenerateSample(
            "all excesses are zero, the mean log term vanishes".into(),
        ));
    }
    Ok(())
}

fn validate_theta<F: Real>(theta: F) -> Result<()> {
    if !(theta.is_finite() && theta > F::zero()) {
        return Err(Error::invalid("theta", format!("must be > 0, got {theta}")));
    }
    Ok(())
}

/// Mean of `log(1 + theta * Y_i)`.
fn mean_log1p<F: Real>(theta: F, excesses: &[F]) -> F {
    let sum: F = excesses.iter().map(|&y| (theta * y).ln_1p()).sum();
    sum / F::from_usize_lossy(excesses.len())
}

fn target_unchecked<F: Real>(theta: F, excesses: &[F], r: F) -> F {
    let gbar = mean_log1p(theta, excesses);
    let exponent_scale = r / gbar;
    let sum: F = excesses
        .iter()
        .map(|&y| (exponent_scale * (theta * y).ln_1p()).exp())
        .sum();
    sum / F::from_usize_lossy(excesses.len()) - (F::one() - r).recip()
}

/// The reduced likelihood moment target
/// `(1/k) sum_i (1 + theta Y_i)^(r/gbar) - 1/(1-r)`.
///
/// Requires `theta > 0`, nonnegative excesses, and at least one positive
/// excess so that `gbar > 0`.
pub fn lme_target<F: Real>(theta: F, excesses: &[F], r: F) -> Result<F> {
    validate_theta(theta)?;
    if excesses.is_empty() {
        return Err(Error::DegenerateSample("empty excess vector".into()));
    }
    validate_excesses(excesses)?;
    Ok(target_unchecked(theta, excesses, r))
}

fn target_derivative_unchecked<F: Real>(theta: F, excesses: &[F], r: F) -> F {
    let k = F::from_usize_lossy(excesses.len());
    let mut gbar = F::zero();
    let mut gbar_prime = F::zero();
    for &y in excesses {
        gbar += (theta * y).ln_1p();
        gbar_prime += y / (F::one() + theta * y);
    }
    gbar /= k;
    gbar_prime /= k;

    let exponent_scale = r / gbar;
    let inv_gbar_sq = (gbar * gbar).recip();
    let mut sum = F::zero();
    for &y in excesses {
        let log_term = (theta * y).ln_1p();
        let log_term_prime = y / (F::one() + theta * y);
        let weight = (exponent_scale * log_term).exp();
        sum += weight * r * (log_term_prime * gbar - log_term * gbar_prime) * inv_gbar_sq;
    }
    sum / k
}

/// Analytic derivative of [`lme_target`] in `theta`. Strictly negative
/// whenever the excesses contain at least two distinct positive values.
pub fn lme_target_derivative<F: Real>(theta: F, excesses: &[F], r: F) -> Result<F> {
    validate_theta(theta)?;
    if excesses.is_empty() {
        return Err(Error::DegenerateSample("empty excess vector".into()));
    }
    validate_excesses(excesses)?;
    Ok(target_derivative_unchecked(theta, excesses, r))
}

/// Solves the likelihood moment equations on a vector of excesses.
///
/// Needs `k >= 2` with at least two distinct positive excesses. Returns a
/// [`ConvergenceFailure`](Error::ConvergenceFailure) error when no
/// sign-changing bracket exists; a fit with `converged = false` is returned
/// when the iteration budget runs out inside a valid bracket.
pub fn solve_lme<F: Real>(excesses: &[F], config: &LmeConfig<F>) -> Result<LmeFit<F>> {
    config.validate()?;
    if excesses.len() < 2 {
        return Err(Error::DegenerateSample(format!(
            "need at least 2 excesses, got {}",
            excesses.len()
        )));
    }
    validate_excesses(excesses)?;
    let positive: Vec<F> = excesses
        .iter()
        .copied()
        .filter(|y| *y > F::zero())
        .collect();
    let distinct = positive
        .iter()
        .any(|&y| y != positive[0]);
    if positive.len() < 2 || !distinct {
        return Err(Error::DegenerateSample(
            "need at least two distinct positive excesses".into(),
        ));
    }

    let r = config.r;
    let k = excesses.len();
    let mean: F = excesses.iter().copied().sum::<F>() / F::from_usize_lossy(k);
    let theta0 = mean.recip();

    let mut evaluations = 0usize;
    let mut eval = |theta: F| -> F {
        evaluations += 1;
        target_unchecked(theta, excesses, r)
    };

    // The target is strictly decreasing, so a positive value means the root
    // lies to the right and a negative value to the left. Expand the bracket
    // geometrically until the sign flips.
    let growth = config.bracket_growth;
    let f0 = eval(theta0);
    let (mut lo, mut f_lo, mut hi, mut f_hi) = if f0 == F::zero() {
        (theta0, f0, theta0, f0)
    } else if f0 > F::zero() {
        let mut lo = theta0;
        let mut f_lo = f0;
        let mut hi;
        let mut f_hi;
        let mut expansions = 0;
        loop {
            hi = lo * growth;
            f_hi = eval(hi);
            if !f_hi.is_finite() || hi == F::infinity() {
                return Err(convergence_failure(evaluations, hi, f_hi, lo, hi));
            }
            if f_hi <= F::zero() {
                break;
            }
            expansions += 1;
            if expansions >= MAX_BRACKET_EXPANSIONS {
                return Err(convergence_failure(evaluations, hi, f_hi, theta0, hi));
            }
            lo = hi;
            f_lo = f_hi;
        }
        (lo, f_lo, hi, f_hi)
    } else {
        let mut hi = theta0;
        let mut f_hi = f0;
        let mut lo;
        let mut f_lo;
        let mut expansions = 0;
        loop {
            lo = hi / growth;
            f_lo = eval(lo);
            if !f_lo.is_finite() || lo <= F::zero() {
                return Err(convergence_failure(evaluations, lo, f_lo, lo, theta0));
            }
            if f_lo >= F::zero() {
                break;
            }
            expansions += 1;
            if expansions >= MAX_BRACKET_EXPANSIONS {
                return Err(convergence_failure(evaluations, lo, f_lo, lo, theta0));
            }
            hi = lo;
            f_hi = f_lo;
        }
        (lo, f_lo, hi, f_hi)
    };

    // Newton iteration safeguarded by the bracket. Convergence additionally
    // requires the proposed step to be tiny, which polishes the root to well
    // below the residual tolerance and keeps fits scale-stable.
    let half = F::from_f64_lossy(0.5);
    let step_tol = F::from_f64_lossy(1e-11);
    let mut theta = if f_lo == F::zero() {
        lo
    } else if f_hi == F::zero() {
        hi
    } else {
        half * (lo + hi)
    };
    let mut best_theta = theta;
    let mut best_abs = F::infinity();
    let mut converged = false;

    for _ in 0..config.max_iter {
        let f = if theta == lo {
            f_lo
        } else if theta == hi {
            f_hi
        } else {
            eval(theta)
        };
        if f.abs() < best_abs {
            best_abs = f.abs();
            best_theta = theta;
        }
        if f == F::zero() {
            converged = true;
            break;
        }
        if f > F::zero() {
            lo = theta;
            f_lo = f;
        } else {
            hi = theta;
            f_hi = f;
        }

        let derivative = target_derivative_unchecked(theta, excesses, r);
        let newton = theta - f / derivative;
        let step_ok = derivative < F::zero() && newton.is_finite() && newton > lo && newton < hi;
        let next = if step_ok { newton } else { half * (lo + hi) };

        if f.abs() <= config.newton_tol && (next - theta).abs() <= step_tol * theta.abs() {
            converged = true;
            break;
        }
        if (hi - lo).abs() <= F::epsilon() * hi.abs() * F::from_f64_lossy(4.0) {
            converged = best_abs <= config.newton_tol;
            break;
        }
        theta = next;
    }

    let theta_hat = best_theta;
    let final_residual = best_abs;
    let converged = converged || final_residual <= config.newton_tol;
    let gamma_hat = mean_log1p(theta_hat, excesses);
    Ok(LmeFit {
        theta_hat,
        gamma_hat,
        sigma_hat: gamma_hat / theta_hat,
        k,
        r,
        iterations: evaluations,
        converged,
        final_residual,
    })
}

fn convergence_failure<F: Real>(iterations: usize, theta: F, residual: F, lo: F, hi: F) -> Error {
    Error::ConvergenceFailure {
        iterations,
        theta: theta.to_f64_lossy(),
        residual: residual.abs().to_f64_lossy(),
        bracket_lo: lo.to_f64_lossy(),
        bracket_hi: hi.to_f64_lossy(),
    }
}

/// Integrates `u^(alpha-1) h(u)` over `(0, 1]` to the psi tolerance.
///
/// The integrable endpoint power for `alpha < 1` is removed exactly by the
/// change of variables `u = v^(1/alpha)`, leaving a bounded integrand.
fn unit_power_law_integral<F: Real>(alpha: F, h: impl Fn(F) -> F) -> F {
    let tol = F::from_f64_lossy(QUAD_ABS_TOL);
    if alpha >= F::one() {
        let exponent = alpha - F::one();
        let f = |u: F| u.powf(exponent) * h(u);
        adaptive_quadrature(&f, F::zero(), F::one(), tol, QUAD_MAX_LEVELS).value
    } else {
        let inv_alpha = alpha.recip();
        let f = |v: F| h(v.powf(inv_alpha));
        let inner_tol = tol * alpha;
        adaptive_quadrature(&f, F::zero(), F::one(), inner_tol, QUAD_MAX_LEVELS).value * inv_alpha
    }
}

/// First tail-array limit `psi1(x) = ∫_0^∞ dz / ((z/x + 1)^(1/gamma) (z+1))`,
/// evaluated after the substitution `u = 1/(1+z)`. Satisfies `psi1(1) = gamma`.
pub fn psi1<F: Real>(x: F, gamma: F) -> Result<F> {
    if !(x.is_finite() && x > F::zero()) {
        return Err(Error::invalid("x", format!("must be > 0, got {x}")));
    }
    if !(gamma.is_finite() && gamma > F::zero()) {
        return Err(Error::invalid("gamma", format!("must be > 0, got {gamma}")));
    }
    let inv_gamma = gamma.recip();
    let one_minus_x = F::one() - x;
    let h = move |u: F| (F::one() - one_minus_x * u).powf(-inv_gamma);
    Ok(x.powf(inv_gamma) * unit_power_law_integral(inv_gamma, h))
}

/// Second tail-array limit
/// `psi2(x, y) = (r/y) ∫_0^∞ dz / ((z/x + 1)^(1/gamma) (z+1)^(1-r/y)) + 1`
/// for `r < 0`. Satisfies `psi2(1, gamma) = 1/(1-r)`.
pub fn psi2<F: Real>(x: F, y: F, gamma: F, r: F) -> Result<F> {
    if !(x.is_finite() && x > F::zero()) {
        return Err(Error::invalid("x", format!("must be > 0, got {x}")));
    }
    if !(y.is_finite() && y > F::zero()) {
        return Err(Error::invalid("y", format!("must be > 0, got {y}")));
    }
    if !(gamma.is_finite() && gamma > F::zero()) {
        return Err(Error::invalid("gamma", format!("must be > 0, got {gamma}")));
    }
    if !(r.is_finite() && r < F::zero()) {
        return Err(Error::invalid("r", format!("must be < 0, got {r}")));
    }
    let inv_gamma = gamma.recip();
    let alpha = inv_gamma - r / y;
    let one_minus_x = F::one() - x;
    let h = move |u: F| (F::one() - one_minus_x * u).powf(-inv_gamma);
    let integral = x.powf(inv_gamma) * unit_power_law_integral(alpha, h);
    Ok(r / y * integral + F::one())
}

/// Population root function `psi(x) = psi2(x, psi1(x)) - 1/(1-r)`: strictly
/// decreasing in `x` with its unique zero at `x = 1`.
pub fn psi<F: Real>(x: F, gamma: F, r: F) -> Result<F> {
    let y = psi1(x, gamma)?;
    Ok(psi2(x, y, gamma, r)? - (F::one() - r).recip())
}

/// Hill estimator of the tail index from the top `k + 1` absolute order
/// statistics: `(1/k) sum_{i<k} log(|X|_(i) / |X|_(k))`.
pub fn hill_estimator<F: Real>(series: &[F], k: usize) -> Result<F> {
    ExcessSample::new(series, k)?.hill()
}
