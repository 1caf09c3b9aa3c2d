//! Simulate an AR(1) process with heavy-tailed innovations and fit the
//! excesses over the 1001st largest absolute value.

use heavytail::gpd_lme::{solve_lme, LmeConfig};
use heavytail::heavy_tail::InnovationSpec;
use heavytail::linear_process::{simulate_process, ArmaSpec, MaCoefficients};
use heavytail::tail_measure::{ExcessSample, ScaleFunctions};

fn main() -> heavytail::Result<()> {
    let innovations = InnovationSpec::symmetric(1.0)?;
    let arma = ArmaSpec::new(vec![0.7], vec![])?;
    let coefficients = MaCoefficients::from_arma_auto(&arma, innovations.gamma())?;

    let n = 100_000;
    let k = 1_000;
    let series = simulate_process(&coefficients, &innovations, n, 42);
    let sample = ExcessSample::new(&series, k)?;
    let fit = solve_lme(sample.excesses(), &LmeConfig::default())?;

    let scales = ScaleFunctions::new(&innovations, &coefficients)?;
    let sigma_nk = scales.sigma(n as f64 / k as f64)?;
    println!(
        "gamma = {:.4}, sigma = {:.4}, sigma/sigma(n/k) = {:.4}, hill = {:.4}",
        fit.gamma_hat,
        fit.sigma_hat,
        fit.sigma_hat / sigma_nk,
        sample.hill()?
    );
    Ok(())
}
