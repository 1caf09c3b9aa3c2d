//! Monte Carlo checks of the distributional invariants: sampler calibration,
//! marginal tail behavior of the simulated processes, tail-measure limits,
//! and desk-scale estimator behavior.

use heavytail::experiment::{derive_seed, splitmix64, SEED_STREAM_CONSISTENCY};
use heavytail::gpd_lme::{hill_estimator, psi1, psi2, solve_lme, LmeConfig};
use heavytail::heavy_tail::{sample_innovations, InnovationSpec};
use heavytail::linear_process::{simulate_process, ArmaSpec, MaCoefficients};
use heavytail::tail_measure::{tail_empirical_measure, ExcessSample, ScaleFunctions};

use rayon::prelude::*;

fn symmetric(gamma: f64) -> InnovationSpec<f64> {
    InnovationSpec::symmetric(gamma).unwrap()
}

fn identity_filter(gamma: f64) -> MaCoefficients<f64> {
    MaCoefficients::from_arma_auto(&ArmaSpec::white_noise(), gamma).unwrap()
}

fn ar_filter(phi: f64, gamma: f64) -> MaCoefficients<f64> {
    MaCoefficients::from_arma_auto(&ArmaSpec::new(vec![phi], vec![]).unwrap(), gamma).unwrap()
}

#[test]
fn two_sided_tail_balance() {
    // With pi1 = 0.7, the share of positive exceedances above the 0.999
    // quantile of |Z| converges to 0.7.
    let spec = InnovationSpec::<f64>::new(1.0, 0.7, 0.3, 1.0).unwrap();
    let n = 1_000_000;
    let sample = sample_innovations(&spec, n, 0xBA1A);
    let level = spec.abs_quantile(1000.0).unwrap();
    let exceedances: Vec<f64> = sample.into_iter().filter(|z| z.abs() > level).collect();
    let count = exceedances.len() as f64;
    let positive = exceedances.iter().filter(|z| **z > 0.0).count() as f64;
    let fraction = positive / count;
    let se = (0.7 * 0.3 / count).sqrt();
    assert!(
        (fraction - 0.7).abs() < 3.0 * se,
        "positive fraction {fraction} vs 0.7 (3se = {})",
        3.0 * se
    );
}

#[test]
fn sampler_matches_exact_quantiles() {
    // Empirical 1 - 1/t quantiles of |Z| against x_min * t^gamma, within 2%.
    let specs = [
        InnovationSpec::symmetric(1.0).unwrap(),
        InnovationSpec::positive(0.5).unwrap(),
        InnovationSpec::new(2.0, 0.3, 0.7, 1.5).unwrap(),
    ];
    let n = 10_000_000;
    for (index, spec) in specs.iter().enumerate() {
        let mut magnitudes: Vec<f64> = sample_innovations(spec, n, 0xABC0 + index as u64)
            .into_iter()
            .map(f64::abs)
            .collect();
        for t in [10.0f64, 100.0] {
            let rank = ((1.0 - 1.0 / t) * n as f64) as usize;
            let (_, q, _) =
                magnitudes.select_nth_unstable_by(rank, |a, b| a.partial_cmp(b).unwrap());
            let expected = spec.abs_quantile(t).unwrap();
            let relative = (*q - expected).abs() / expected;
            assert!(
                relative < 0.02,
                "spec {index}, t={t}: quantile {q} vs {expected} ({relative:.4} rel)"
            );
        }
    }
}

#[test]
fn replication_streams_are_decorrelated() {
    // Rank correlation between consecutive replication streams; ranks have
    // finite variance, so pair averages concentrate hard near zero.
    let spec = symmetric(1.0);
    let n = 10_000;
    let pairs = 16;
    let rank = |series: &[f64]| -> Vec<f64> {
        let mut order: Vec<usize> = (0..series.len()).collect();
        order.sort_by(|&a, &b| series[a].partial_cmp(&series[b]).unwrap());
        let mut ranks = vec![0.0; series.len()];
        for (position, &original) in order.iter().enumerate() {
            ranks[original] = position as f64;
        }
        ranks
    };
    let mut total = 0.0;
    for pair in 0..pairs {
        let a = sample_innovations(
            &spec,
            n,
            derive_seed(0xC0FFEE, SEED_STREAM_CONSISTENCY, 2 * pair),
        );
        let b = sample_innovations(
            &spec,
            n,
            derive_seed(0xC0FFEE, SEED_STREAM_CONSISTENCY, 2 * pair + 1),
        );
        let (ra, rb) = (rank(&a), rank(&b));
        let mean = (n as f64 - 1.0) / 2.0;
        let mut cov = 0.0;
        let mut var = 0.0;
        for i in 0..n {
            cov += (ra[i] - mean) * (rb[i] - mean);
            var += (ra[i] - mean) * (ra[i] - mean);
        }
        total += cov / var;
    }
    let mean_corr = total / pairs as f64;
    assert!(
        mean_corr.abs() < 0.01,
        "mean rank correlation {mean_corr} across {pairs} pairs"
    );
}

#[test]
fn splitmix_distinguishes_streams() {
    // Sanity on the seed-derivation chain: no collisions over a small grid.
    let mut seen = std::collections::HashSet::new();
    for root in [0u64, 1, 0xDEAD] {
        for stream in 0..2 {
            for index in 0..100 {
                assert!(seen.insert(derive_seed(root, stream, index)));
            }
        }
    }
    assert_ne!(splitmix64(0), splitmix64(1));
}

#[test]
fn marginal_tail_index_matches_hill() {
    // The absolute marginal of any causal filter keeps the innovation tail
    // index: Hill at n = 1e6, k = 2000 lands within 15% of gamma.
    let cases: Vec<(f64, MaCoefficients<f64>)> = vec![
        (1.0, ar_filter(0.5, 1.0)),
        (
            0.5,
            MaCoefficients::from_arma_auto(
                &ArmaSpec::new(vec![0.5], vec![0.3]).unwrap(),
                0.5,
            )
            .unwrap(),
        ),
    ];
    for (case, (gamma, coeffs)) in cases.into_iter().enumerate() {
        let spec = symmetric(gamma);
        let series = simulate_process(&coeffs, &spec, 1_000_000, 0x711 + case as u64);
        let hill = hill_estimator(&series, 2000).unwrap();
        assert!(
            (hill - gamma).abs() / gamma < 0.15,
            "case {case}: hill {hill} vs gamma {gamma}"
        );
    }
}

#[test]
fn exceedance_ratio_approaches_tail_constant() {
    // AR(1) phi = 0.5, gamma = 1: survival ratio of |X| to |Z| at the 0.999
    // innovation quantile approaches ||c|| = 2.
    let spec = symmetric(1.0);
    let coeffs = ar_filter(0.5, 1.0);
    let n = 1_000_000;
    let series = simulate_process(&coeffs, &spec, n, 0xEC0);
    let innovations = sample_innovations(&spec, n, 0xEC1);
    let mut magnitudes: Vec<f64> = innovations.iter().map(|z| z.abs()).collect();
    let rank = (0.999 * n as f64) as usize;
    let (_, level, _) = magnitudes.select_nth_unstable_by(rank, |a, b| a.partial_cmp(b).unwrap());
    let level = *level;
    let x_count = series.iter().filter(|x| x.abs() > level).count() as f64;
    let z_count = innovations.iter().filter(|z| z.abs() > level).count() as f64;
    let ratio = x_count / z_count;
    assert!(
        (ratio - 2.0).abs() / 2.0 < 0.15,
        "survival ratio {ratio} vs ||c|| = 2"
    );
}

#[test]
fn tail_measure_sup_error_iid() {
    // i.i.d. exact Pareto, gamma in {0.5, 1, 2}: sup over the z grid of the
    // 100-seed mean tail measure error stays below 0.05.
    let z_grid = [0.5, 1.0, 2.0, 4.0];
    for gamma in [0.5f64, 1.0, 2.0] {
        let spec = symmetric(gamma);
        let coeffs = identity_filter(gamma);
        let scales = ScaleFunctions::new(&spec, &coeffs).unwrap();
        let (n, k) = (1_000_000usize, 1000usize);
        let b = scales.b(n as f64 / k as f64).unwrap();
        let sums: Vec<Vec<f64>> = (0..100u64)
            .into_par_iter()
            .map(|seed_index| {
                let seed = derive_seed(0x1E1A, 7, seed_index);
                let series = simulate_process(&coeffs, &spec, n, seed);
                z_grid
                    .iter()
                    .map(|&z| tail_empirical_measure(&series, b, k, z))
                    .collect()
            })
            .collect();
        for (j, &z) in z_grid.iter().enumerate() {
            let mean = sums.iter().map(|row| row[j]).sum::<f64>() / sums.len() as f64;
            let limit = z.powf(-1.0 / gamma);
            assert!(
                (mean - limit).abs() < 0.05,
                "gamma {gamma}, z {z}: mean {mean} vs {limit}"
            );
        }
    }
}

#[test]
fn intermediate_order_statistics_track_limits() {
    // |X|_(ceil(ks)) / b(n/k) -> s^(-gamma) over 100 seeds.
    let spec = symmetric(1.0);
    let coeffs = identity_filter(1.0);
    let scales = ScaleFunctions::new(&spec, &coeffs).unwrap();
    let (n, k) = (1_000_000usize, 1000usize);
    let b = scales.b(n as f64 / k as f64).unwrap();
    let ratios: Vec<(f64, f64)> = (0..100u64)
        .into_par_iter()
        .map(|seed_index| {
            let seed = derive_seed(0x0DD, 9, seed_index);
            let series = simulate_process(&coeffs, &spec, n, seed);
            let sample = ExcessSample::new(&series, k).unwrap();
            (
                sample.intermediate_order_ratio(1.0, b).unwrap(),
                sample.intermediate_order_ratio(2.0, b).unwrap(),
            )
        })
        .collect();
    let mean_s1 = ratios.iter().map(|r| r.0).sum::<f64>() / ratios.len() as f64;
    let mean_s2 = ratios.iter().map(|r| r.1).sum::<f64>() / ratios.len() as f64;
    assert!((mean_s1 - 1.0).abs() < 0.1, "s=1 ratio mean {mean_s1}");
    assert!((mean_s2 - 0.5).abs() < 0.05, "s=2 ratio mean {mean_s2}");
}

#[test]
fn tail_array_sums_match_psi_limits() {
    // (1/k) sum log(1 + gamma x Y_i / sigma(n/k)) averaged over 50 seeds is
    // within 0.1 of psi1(x); the matching power sum tracks psi2(x, gamma).
    let spec = symmetric(1.0);
    let coeffs = identity_filter(1.0);
    let scales = ScaleFunctions::new(&spec, &coeffs).unwrap();
    let (n, k) = (1_000_000usize, 1000usize);
    let sigma = scales.sigma(n as f64 / k as f64).unwrap();
    let gamma = 1.0;
    let r = -1.0;
    let x_grid = [0.5, 1.0, 2.0];

    let sums: Vec<Vec<(f64, f64)>> = (0..50u64)
        .into_par_iter()
        .map(|seed_index| {
            let seed = derive_seed(0x3A11, 11, seed_index);
            let series = simulate_process(&coeffs, &spec, n, seed);
            let sample = ExcessSample::new(&series, k).unwrap();
            x_grid
                .iter()
                .map(|&x| {
                    let theta_x = gamma * x / sigma;
                    let log_sum = sample
                        .excesses()
                        .iter()
                        .map(|&y| (theta_x * y).ln_1p())
                        .sum::<f64>()
                        / k as f64;
                    let power_sum = sample
                        .excesses()
                        .iter()
                        .map(|&y| (r / gamma * (theta_x * y).ln_1p()).exp())
                        .sum::<f64>()
                        / k as f64;
                    (log_sum, power_sum)
                })
                .collect()
        })
        .collect();

    for (j, &x) in x_grid.iter().enumerate() {
        let mean_log = sums.iter().map(|row| row[j].0).sum::<f64>() / sums.len() as f64;
        let mean_power = sums.iter().map(|row| row[j].1).sum::<f64>() / sums.len() as f64;
        let psi1_limit = psi1(x, gamma).unwrap();
        let psi2_limit = psi2(x, gamma, gamma, r).unwrap();
        assert!(
            (mean_log - psi1_limit).abs() < 0.1,
            "x={x}: log sum {mean_log} vs psi1 {psi1_limit}"
        );
        assert!(
            (mean_power - psi2_limit).abs() < 0.1,
            "x={x}: power sum {mean_power} vs psi2 {psi2_limit}"
        );
    }
}

#[test]
fn theoretical_quantile_matches_empirical() {
    // b(1000) = x_min (||c|| * 1000)^gamma = 2000 for AR(1) phi = 0.5 at
    // gamma = 1; the empirical 0.999 quantile of 1e7 simulated |X| agrees
    // within 10%.
    let spec = symmetric(1.0);
    let coeffs = ar_filter(0.5, 1.0);
    let scales = ScaleFunctions::new(&spec, &coeffs).unwrap();
    let b = scales.b(1000.0).unwrap();
    assert!((b - 2000.0).abs() < 1e-6);

    let n = 10_000_000;
    let mut magnitudes: Vec<f64> = simulate_process(&coeffs, &spec, n, 0xB_1000)
        .into_iter()
        .map(f64::abs)
        .collect();
    let rank = (0.999 * n as f64) as usize;
    let (_, q, _) = magnitudes.select_nth_unstable_by(rank, |a, b| a.partial_cmp(b).unwrap());
    let relative = (*q - b).abs() / b;
    assert!(relative < 0.10, "empirical quantile {q} vs b {b}");
}

#[test]
fn hill_median_is_consistent() {
    // i.i.d. exact Pareto gamma = 1, n = 1e6, k = 1e3: Hill medians over
    // 100 seeds land in [0.9, 1.1].
    let spec = symmetric(1.0);
    let coeffs = identity_filter(1.0);
    let mut estimates: Vec<f64> = (0..100u64)
        .into_par_iter()
        .map(|seed_index| {
            let seed = derive_seed(0x411, 15, seed_index);
            let series = simulate_process(&coeffs, &spec, 1_000_000, seed);
            hill_estimator(&series, 1000).unwrap()
        })
        .collect();
    estimates.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = 0.5 * (estimates[49] + estimates[50]);
    assert!((0.9..=1.1).contains(&median), "hill median {median}");
}

#[test]
fn lme_and_hill_agree_on_the_same_sample() {
    let spec = symmetric(1.0);
    let coeffs = identity_filter(1.0);
    for seed in [0x155u64, 0x156, 0x157] {
        let series = simulate_process(&coeffs, &spec, 1_000_000, seed);
        let sample = ExcessSample::new(&series, 1000).unwrap();
        let hill = sample.hill().unwrap();
        let fit = solve_lme(sample.excesses(), &LmeConfig::default()).unwrap();
        assert!(
            (fit.gamma_hat - hill).abs() < 0.2,
            "seed {seed}: lme {} vs hill {hill}",
            fit.gamma_hat
        );
    }
}

#[test]
fn desk_scale_median_is_consistent() {
    // i.i.d. exact Pareto gamma = 1, n = 1e5, k = 1e3, r = -1: the median
    // estimate over 200 seeds lands in [0.9, 1.1].
    let spec = symmetric(1.0);
    let coeffs = identity_filter(1.0);
    let mut estimates: Vec<f64> = (0..200u64)
        .into_par_iter()
        .map(|seed_index| {
            let seed = derive_seed(0xDE5C, 13, seed_index);
            let series = simulate_process(&coeffs, &spec, 100_000, seed);
            let sample = ExcessSample::new(&series, 1000).unwrap();
            solve_lme(sample.excesses(), &LmeConfig::default())
                .unwrap()
                .gamma_hat
        })
        .collect();
    estimates.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = 0.5 * (estimates[99] + estimates[100]);
    assert!(
        (0.9..=1.1).contains(&median),
        "median gamma estimate {median}"
    );
}
