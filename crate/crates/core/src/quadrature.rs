//! Adaptive Gauss–Kronrod quadrature on finite intervals.
//!
//! A 7-point Gauss rule nested in a 15-point Kronrod rule provides the local
//! error estimate; intervals failing their tolerance share are bisected until
//! the absolute tolerance, the maximum refinement depth, or the width of
//! representable subintervals is reached.

use crate::scalar::Real;

/// Abscissae of the 15-point Kronrod rule on [-1, 1] (nonnegative half).
/// Odd indices are the embedded 7-point Gauss nodes.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_838_258_730,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];

/// Weights of the 7-point Gauss rule.
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Weights of the 15-point Kronrod rule.
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

/// Outcome of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct QuadResult<F> {
    /// Integral estimate.
    pub value: F,
    /// Sum of the per-interval Kronrod/Gauss discrepancies.
    pub error_estimate: F,
    /// Number of accepted subintervals.
    pub intervals: usize,
}

/// One Gauss–Kronrod evaluation on [a, b]; returns (K15 value, |K15 - G7|).
fn gauss_kronrod_15<F: Real>(f: &impl Fn(F) -> F, a: F, b: F) -> (F, F) {
    let half = F::from_f64_lossy(0.5);
    let center = half * (a + b);
    let half_len = half * (b - a);

    let f_center = f(center);
    let mut kronrod = F::from_f64_lossy(WGK[7]) * f_center;
    let mut gauss = F::from_f64_lossy(WG[3]) * f_center;

    for j in 0..7 {
        let abscissa = half_len * F::from_f64_lossy(XGK[j]);
        let fsum = f(center - abscissa) + f(center + abscissa);
        kronrod += F::from_f64_lossy(WGK[j]) * fsum;
        if j % 2 == 1 {
            gauss += F::from_f64_lossy(WG[j / 2]) * fsum;
        }
    }

    kronrod *= half_len;
    gauss *= half_len;
    (kronrod, (kronrod - gauss).abs())
}

/// Integrates `f` over `[a, b]` to absolute tolerance `abs_tol` with at most
/// `max_levels` bisection levels.
///
/// The integrand must be finite on the open interval; integrable endpoint
/// behavior is acceptable because no node touches the endpoints.
pub fn adaptive_quadrature<F: Real>(
    f: &impl Fn(F) -> F,
    a: F,
    b: F,
    abs_tol: F,
    max_levels: usize,
) -> QuadResult<F> {
    let mut result = QuadResult {
        value: F::zero(),
        error_estimate: F::zero(),
        intervals: 0,
    };
    // Subdivision bottoms out once an interval is a few ulps wide.
    let width_floor = (b - a).abs() * F::epsilon() * F::from_f64_lossy(4.0);
    refine(f, a, b, abs_tol, max_levels, width_floor, &mut result);
    result
}

fn refine<F: Real>(
    f: &impl Fn(F) -> F,
    a: F,
    b: F,
    tol: F,
    levels_left: usize,
    width_floor: F,
    out: &mut QuadResult<F>,
) {
    let (value, err) = gauss_kronrod_15(f, a, b);
    if err <= tol || levels_left == 0 || (b - a).abs() <= width_floor || !value.is_finite() {
        out.value += value;
        out.error_estimate += err;
        out.intervals += 1;
        return;
    }
    let mid = F::from_f64_lossy(0.5) * (a + b);
    let half_tol = tol * F::from_f64_lossy(0.5);
    refine(f, a, mid, half_tol, levels_left - 1, width_floor, out);
    refine(f, mid, b, half_tol, levels_left - 1, width_floor, out);
}
