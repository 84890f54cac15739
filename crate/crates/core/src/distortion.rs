//! Expected quantization MSE, its derivatives in the step size, optimal
//! steps, sensitivity to step-size perturbations and Monte-Carlo checks.
//!
//! Closed forms:
//!
//! * uniform source on `[-a, a]`, valid for `τ = 2^(M-1)Δ ≤ a`:
//!   `MSE = (a - τ)³/(3a) + 2^M Δ³/(24a)`
//! * normal source (approximation: clipping error plus `Δ²/12` rounding noise):
//!   `MSE ≈ (τ² + σ²)(1 - erf(τ/(√2σ))) + τ²/(3·2^(2M)) - √2 τ σ e^(-τ²/(2σ²))/√π`
//!
//! Laplace sources have no closed form here; their MSE is estimated by Monte
//! Carlo and their curvature by central differences of that estimate.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::erf::{erf, erfc};

use crate::distributions::{self, SourceDistribution};
use crate::error::{Error, Result};
use crate::minimize::{bisect_root, golden_section};
use crate::quantizer::{half_levels, QuantizerConfig};

/// Relative bracket tolerance of numeric step-size minimization.
pub const OPTIMAL_STEP_REL_TOL: f64 = 1e-6;

/// Upper end of the normal-source search bracket, in units of `σ / 2^(M-1)`.
pub const NORMAL_BRACKET_SIGMAS: f64 = 8.0;

/// Upper end of the Laplace-source search bracket, in units of `b / 2^(M-1)`.
pub const LAPLACE_BRACKET_SCALES: f64 = 16.0;

/// Sample size and seed of the fixed Monte-Carlo sample behind Laplace
/// distortion estimates (optimal step and curvature).
pub const LAPLACE_MC_SAMPLES: usize = 1_000_000;
pub const LAPLACE_MC_SEED: u64 = 0x5eed_1a91;

/// Central-difference half-width for Laplace curvature, relative to the step.
pub const LAPLACE_FD_REL_STEP: f64 = 0.02;

// Slack on the uniform-domain upper bound so grid endpoints computed as
// `a / 2^(M-1)` through other arithmetic are not rejected.
const DOMAIN_SLACK: f64 = 1e-12;

/// How a curvature value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Closed-form expression.
    Analytic,
    /// Finite differences of a Monte-Carlo estimate.
    Empirical,
}

/// Sensitivity of the optimal quantizer to step-size perturbations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityReport {
    pub dist: SourceDistribution,
    pub bits: u32,
    /// MSE-optimal step size.
    pub delta_opt: f64,
    pub mse_opt: f64,
    /// Step at which the curvature below was evaluated. Equal to `delta_opt`
    /// except for uniform sources, where the curvature is taken at
    /// `a/2^(M-1)` (the `Δ̃ ≈ 2a/2^M` approximation, clamp threshold at `a`).
    pub curvature_step: f64,
    /// `∂²MSE/∂Δ²` used for `gamma`.
    pub second_derivative_at_opt: f64,
    /// Second derivative of the distortion model at `delta_opt` itself.
    pub exact_second_derivative_at_opt: f64,
    pub method: Method,
    /// `(ε, |∂²MSE/∂Δ²|·ε²/2)` pairs.
    pub gamma: Vec<(f64, f64)>,
}

/// One row of an MSE-versus-step curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MseRow {
    pub delta: f64,
    /// `None` for sources without a closed form (Laplace).
    pub mse_closed: Option<f64>,
    pub mse_mc: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MseCurve {
    pub bits: u32,
    pub dist: SourceDistribution,
    pub rows: Vec<MseRow>,
}

fn check_bits(bits: u32) -> Result<()> {
    QuantizerConfig::new(bits, 1.0).map(|_| ())
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidDistribution(format!(
            "{name} must be positive and finite, got {v}"
        )))
    }
}

/// Largest step for which the uniform closed form holds: `a / 2^(M-1)`.
pub fn uniform_max_step(a: f64, bits: u32) -> f64 {
    a / half_levels(bits)
}

fn check_uniform_domain(a: f64, bits: u32, delta: f64) -> Result<()> {
    check_positive("a", a)?;
    check_bits(bits)?;
    let max = uniform_max_step(a, bits);
    if delta.is_finite() && delta > 0.0 && delta <= max * (1.0 + DOMAIN_SLACK) {
        Ok(())
    } else {
        Err(Error::Domain { delta, max })
    }
}

// Polynomial forms, evaluated without the domain check.
fn uniform_mse_poly(a: f64, bits: u32, delta: f64) -> f64 {
    let gap = a - half_levels(bits) * delta;
    gap.powi(3) / (3.0 * a) + 2f64.powi(bits as i32) * delta.powi(3) / (24.0 * a)
}

fn uniform_d1_poly(a: f64, bits: u32, delta: f64) -> f64 {
    let m = bits as i32;
    let gap = a - half_levels(bits) * delta;
    (2f64.powi(m - 3) * delta * delta - 2f64.powi(m - 1) * gap * gap) / a
}

fn uniform_d2_poly(a: f64, bits: u32, delta: f64) -> f64 {
    let m = bits as i32;
    let gap = a - half_levels(bits) * delta;
    (2f64.powi(2 * m - 1) * gap + 2f64.powi(m - 2) * delta) / a
}

/// Expected MSE of quantizing `Uniform[-a, a]`; requires `0 < Δ ≤ a/2^(M-1)`.
pub fn mse_uniform_closed(a: f64, bits: u32, delta: f64) -> Result<f64> {
    check_uniform_domain(a, bits, delta)?;
    Ok(uniform_mse_poly(a, bits, delta).max(0.0))
}

/// `∂MSE/∂Δ` for the uniform source.
pub fn mse_uniform_d1(a: f64, bits: u32, delta: f64) -> Result<f64> {
    check_uniform_domain(a, bits, delta)?;
    Ok(uniform_d1_poly(a, bits, delta))
}

/// `∂²MSE/∂Δ²` for the uniform source.
pub fn mse_uniform_d2(a: f64, bits: u32, delta: f64) -> Result<f64> {
    check_uniform_domain(a, bits, delta)?;
    Ok(uniform_d2_poly(a, bits, delta))
}

/// Step at which the (linear) uniform second derivative vanishes, located
/// by bisection on its polynomial extension past the domain edge.
/// Analytically `2a / (2^M - 2^(-M))`.
pub fn uniform_curvature_zero(a: f64, bits: u32) -> Result<f64> {
    check_positive("a", a)?;
    check_bits(bits)?;
    let edge = uniform_max_step(a, bits);
    Ok(bisect_root(|d| uniform_d2_poly(a, bits, d), edge, 2.0 * edge))
}

fn check_normal(sigma: f64, bits: u32, delta: f64) -> Result<()> {
    check_positive("sigma", sigma)?;
    check_bits(bits)?;
    if delta.is_finite() && delta > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain {
            delta,
            max: f64::INFINITY,
        })
    }
}

/// Approximate expected MSE of quantizing `N(0, σ²)`.
pub fn mse_normal_closed(sigma: f64, bits: u32, delta: f64) -> Result<f64> {
    check_normal(sigma, bits, delta)?;
    let tau = half_levels(bits) * delta;
    let z = tau / (std::f64::consts::SQRT_2 * sigma);
    let clip = (tau * tau + sigma * sigma) * erfc(z)
        - std::f64::consts::SQRT_2 * tau * sigma * (-z * z).exp() / std::f64::consts::PI.sqrt();
    let rounding = tau * tau / (3.0 * 4f64.powi(bits as i32));
    Ok(clip + rounding)
}

/// Curvature expression for the normal source as used in the robustness
/// comparison: `2/(3·2^(2M)) - 2·erf(2^(M-1)Δ/(√2σ)) - 2`.
///
/// It lies in `[-4, -11/6]`, so `|·|·ε²/2 ≥ 11ε²/12`. It is *not* the
/// derivative of [`mse_normal_closed`]; see [`mse_normal_d2_exact`].
pub fn mse_normal_d2(sigma: f64, bits: u32, delta: f64) -> Result<f64> {
    check_normal(sigma, bits, delta)?;
    let tau = half_levels(bits) * delta;
    Ok(2.0 / (3.0 * 4f64.powi(bits as i32))
        - 2.0 * erf(tau / (std::f64::consts::SQRT_2 * sigma))
        - 2.0)
}

/// Second derivative of [`mse_normal_closed`] in `Δ`:
/// `2^(2M-1)·erfc(τ/(√2σ)) + 1/6`.
pub fn mse_normal_d2_exact(sigma: f64, bits: u32, delta: f64) -> Result<f64> {
    check_normal(sigma, bits, delta)?;
    let tau = half_levels(bits) * delta;
    Ok(2f64.powi(2 * bits as i32 - 1) * erfc(tau / (std::f64::consts::SQRT_2 * sigma)) + 1.0 / 6.0)
}

/// Closed-form MSE for sources that have one.
pub fn mse_closed(dist: &SourceDistribution, bits: u32, delta: f64) -> Result<Option<f64>> {
    match *dist {
        SourceDistribution::Uniform { a } => mse_uniform_closed(a, bits, delta).map(Some),
        SourceDistribution::Normal { sigma } => mse_normal_closed(sigma, bits, delta).map(Some),
        SourceDistribution::Laplace { .. } => {
            dist.validate()?;
            check_bits(bits)?;
            Ok(None)
        }
    }
}

/// Mean squared quantization error over `samples`, summed per chunk and
/// reduced in chunk order.
pub fn mse_of_samples(samples: &[f64], cfg: &QuantizerConfig) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    let partial: Vec<f64> = samples
        .par_chunks(distributions::CHUNK_LEN)
        .map(|c| c.iter().map(|&x| (x - cfg.apply(x)).powi(2)).sum::<f64>())
        .collect();
    partial.iter().sum::<f64>() / samples.len() as f64
}

/// Monte-Carlo MSE: `(1/n) Σ (x_i - Q(x_i))²` over `sample(dist, n, seed)`.
///
/// Chunks are drawn and reduced independently, so the value does not depend
/// on the thread count.
pub fn mc_mse(dist: &SourceDistribution, cfg: &QuantizerConfig, n: usize, seed: u64) -> Result<f64> {
    if n == 0 {
        return Err(Error::EmptyRequest("sample count must be at least 1"));
    }
    dist.validate()?;
    let partial: Vec<f64> = distributions::chunks(n)
        .map_init(Vec::new, |buf, (k, len)| {
            buf.resize(len, 0.0);
            dist.fill_chunk(seed, k, buf);
            buf.iter().map(|&x| (x - cfg.apply(x)).powi(2)).sum::<f64>()
        })
        .collect();
    Ok(partial.iter().sum::<f64>() / n as f64)
}

fn laplace_sample(dist: &SourceDistribution) -> Result<Vec<f64>> {
    Ok(distributions::sample(dist, LAPLACE_MC_SAMPLES, LAPLACE_MC_SEED)?.into_data())
}

fn laplace_optimum(dist: &SourceDistribution, bits: u32, samples: &[f64]) -> (f64, f64) {
    let hi = LAPLACE_BRACKET_SCALES * dist.scale() / half_levels(bits);
    golden_section(
        |d| mse_of_samples(samples, &QuantizerConfig::new(bits, d).expect("positive step")),
        hi * 1e-9,
        hi,
        OPTIMAL_STEP_REL_TOL,
    )
}

fn normal_optimum(sigma: f64, bits: u32) -> (f64, f64) {
    let hi = NORMAL_BRACKET_SIGMAS * sigma / half_levels(bits);
    golden_section(
        |d| mse_normal_closed(sigma, bits, d).expect("validated"),
        hi * 1e-9,
        hi,
        OPTIMAL_STEP_REL_TOL,
    )
}

/// MSE-minimizing step size.
///
/// Uniform: `2a/(2^M + 1)`, the stationary point inside the closed-form
/// domain. Normal: golden-section search of the closed form on
/// `(0, 8σ/2^(M-1)]`. Laplace: golden-section search of the Monte-Carlo MSE
/// over a fixed sample on `(0, 16b/2^(M-1)]`.
pub fn optimal_step(dist: &SourceDistribution, bits: u32) -> Result<f64> {
    dist.validate()?;
    check_bits(bits)?;
    Ok(match *dist {
        SourceDistribution::Uniform { a } => 2.0 * a / (2f64.powi(bits as i32) + 1.0),
        SourceDistribution::Normal { sigma } => normal_optimum(sigma, bits).0,
        SourceDistribution::Laplace { .. } => laplace_optimum(dist, bits, &laplace_sample(dist)?).0,
    })
}

/// Second-order sensitivity `Γ(ε) = |∂²MSE/∂Δ²|·ε²/2` around the optimal step.
pub fn sensitivity(dist: &SourceDistribution, bits: u32, epsilons: &[f64]) -> Result<SensitivityReport> {
    if epsilons.is_empty() {
        return Err(Error::EmptyRequest("epsilon list is empty"));
    }
    if let Some(&e) = epsilons.iter().find(|e| !(e.is_finite() && **e > 0.0)) {
        return Err(Error::Config(format!("epsilon must be positive and finite, got {e}")));
    }
    dist.validate()?;
    check_bits(bits)?;

    let (delta_opt, mse_opt, curvature_step, d2, d2_exact, method) = match *dist {
        SourceDistribution::Uniform { a } => {
            let opt = optimal_step(dist, bits)?;
            let edge = uniform_max_step(a, bits);
            (
                opt,
                mse_uniform_closed(a, bits, opt)?,
                edge,
                mse_uniform_d2(a, bits, edge)?,
                mse_uniform_d2(a, bits, opt)?,
                Method::Analytic,
            )
        }
        SourceDistribution::Normal { sigma } => {
            let (opt, mse) = normal_optimum(sigma, bits);
            (
                opt,
                mse,
                opt,
                mse_normal_d2(sigma, bits, opt)?,
                mse_normal_d2_exact(sigma, bits, opt)?,
                Method::Analytic,
            )
        }
        SourceDistribution::Laplace { .. } => {
            let samples = laplace_sample(dist)?;
            let (opt, mse) = laplace_optimum(dist, bits, &samples);
            let h = LAPLACE_FD_REL_STEP * opt;
            let at = |d: f64| mse_of_samples(&samples, &QuantizerConfig::new(bits, d).expect("positive step"));
            let d2 = (at(opt + h) - 2.0 * at(opt) + at(opt - h)) / (h * h);
            (opt, mse, opt, d2, d2, Method::Empirical)
        }
    };

    let gamma = epsilons.iter().map(|&e| (e, d2.abs() * e * e / 2.0)).collect();
    Ok(SensitivityReport {
        dist: *dist,
        bits,
        delta_opt,
        mse_opt,
        curvature_step,
        second_derivative_at_opt: d2,
        exact_second_derivative_at_opt: d2_exact,
        method,
        gamma,
    })
}

/// Minimum achievable MSE per bit-width.
pub fn min_mse_vs_bits(dist: &SourceDistribution, bits_list: &[u32]) -> Result<Vec<(u32, f64)>> {
    if bits_list.is_empty() {
        return Err(Error::EmptyRequest("bit-width list is empty"));
    }
    dist.validate()?;
    let laplace = match dist {
        SourceDistribution::Laplace { .. } => Some(laplace_sample(dist)?),
        _ => None,
    };
    bits_list
        .iter()
        .map(|&bits| {
            check_bits(bits)?;
            let mse = match (*dist, &laplace) {
                (SourceDistribution::Uniform { a }, _) => {
                    mse_uniform_closed(a, bits, optimal_step(dist, bits)?)?
                }
                (SourceDistribution::Normal { sigma }, _) => normal_optimum(sigma, bits).1,
                (_, Some(samples)) => laplace_optimum(dist, bits, samples).1,
                (_, None) => unreachable!("laplace sample drawn above"),
            };
            Ok((bits, mse))
        })
        .collect()
}

/// Closed-form (and optionally Monte-Carlo) MSE over a set of step sizes.
/// Rows come back sorted by step.
pub fn mse_curve(
    dist: &SourceDistribution,
    bits: u32,
    deltas: &[f64],
    monte_carlo: Option<(usize, u64)>,
) -> Result<MseCurve> {
    if deltas.is_empty() {
        return Err(Error::EmptyRequest("step grid is empty"));
    }
    let mut sorted = deltas.to_vec();
    sorted.sort_by(f64::total_cmp);
    // One sample serves every grid point.
    let samples = match monte_carlo {
        Some((n, seed)) => Some(distributions::sample(dist, n, seed)?.into_data()),
        None => None,
    };
    let rows = sorted
        .into_iter()
        .map(|delta| {
            let mse_closed = mse_closed(dist, bits, delta)?;
            let mse_mc = match &samples {
                Some(s) => Some(mse_of_samples(s, &QuantizerConfig::new(bits, delta)?)),
                None => None,
            };
            Ok(MseRow {
                delta,
                mse_closed,
                mse_mc,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MseCurve {
        bits,
        dist: *dist,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn uniform_closed_examples() {
        let v = mse_uniform_closed(1.0, 4, 0.125).unwrap();
        assert!((v - 16.0 * 0.125f64.powi(3) / 24.0).abs() < 1e-15);
        assert!((v - 0.001_302_083_333).abs() < 1e-12);

        let v = mse_uniform_closed(1.0, 4, 1e-6).unwrap();
        assert!((v - 1.0 / 3.0).abs() < 1e-5);

        let opt = mse_uniform_closed(1.0, 4, 2.0 / 17.0).unwrap();
        assert!((opt - 0.001_153_4).abs() < 1e-7, "{opt}");
        for k in 1..=1000 {
            let d = 0.125 * k as f64 / 1000.0;
            assert!(opt <= mse_uniform_closed(1.0, 4, d).unwrap() + 1e-18);
        }
    }

    #[test]
    fn uniform_domain_rejected() {
        for d in [0.0, -0.1, 0.13, f64::NAN] {
            let err = mse_uniform_closed(1.0, 4, d).unwrap_err();
            assert!(matches!(err, Error::Domain { max, .. } if max == 0.125), "{d}");
        }
        assert!(mse_uniform_d1(1.0, 4, 0.2).is_err());
        assert!(mse_uniform_d2(1.0, 4, 0.2).is_err());
    }

    #[test]
    fn uniform_derivative_values() {
        for bits in 1..=10 {
            let opt = 2.0 / (2f64.powi(bits as i32) + 1.0);
            assert!(mse_uniform_d1(1.0, bits, opt).unwrap().abs() < 1e-12);
            let edge = uniform_max_step(3.0, bits);
            assert!((mse_uniform_d2(3.0, bits, edge).unwrap() - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn normal_closed_limits_and_scaling() {
        assert!((mse_normal_closed(1.0, 4, 1e-9).unwrap() - 1.0).abs() < 1e-6);
        for &d in &[0.05, 0.2, 0.4, 1.0] {
            let lhs = mse_normal_closed(2.0, 4, d).unwrap();
            let rhs = 4.0 * mse_normal_closed(1.0, 4, d / 2.0).unwrap();
            assert!(rel(lhs, rhs) < 1e-12);
        }
        assert!(mse_normal_closed(1.0, 4, 0.0).is_err());
    }

    #[test]
    fn normal_curvature_expression_range() {
        for bits in 1..=12 {
            for k in 0..=200 {
                let d = 1e-9 + k as f64 * 0.05;
                let v = mse_normal_d2(1.0, bits, d).unwrap();
                assert!((-4.0..=-11.0 / 6.0).contains(&v), "M={bits} Δ={d}: {v}");
            }
        }
        let v = mse_normal_d2(1.0, 4, 1e-9).unwrap();
        assert!((v - (2.0 / (3.0 * 256.0) - 2.0)).abs() < 1e-7);
    }

    #[test]
    fn optimal_uniform_step() {
        let d = optimal_step(&SourceDistribution::uniform(1.0).unwrap(), 4).unwrap();
        assert!((d - 2.0 / 17.0).abs() < 1e-15);
        assert!(rel(d, 0.125) < 0.07);
        // The other root 2a/(2^M - 1) lies outside the closed-form domain.
        assert!(mse_uniform_closed(1.0, 4, 2.0 / 15.0).is_err());
    }

    #[test]
    fn curvature_zero_matches_formula() {
        for bits in 1..=12 {
            let z = uniform_curvature_zero(1.5, bits).unwrap();
            let m = 2f64.powi(bits as i32);
            let expected = 3.0 / (m - 1.0 / m);
            assert!(rel(z, expected) < 1e-10, "M={bits}");
        }
    }

    #[test]
    fn sensitivity_uniform_and_normal() {
        let u = sensitivity(&SourceDistribution::uniform(2.5).unwrap(), 6, &[0.1]).unwrap();
        assert!((u.gamma[0].1 - 0.0025).abs() < 1e-15);
        assert_eq!(u.method, Method::Analytic);

        let n = sensitivity(&SourceDistribution::normal(1.0).unwrap(), 4, &[0.1, 1e-12]).unwrap();
        assert!(n.gamma[0].1 >= 11.0 * 0.01 / 12.0);
        assert!(n.gamma[1].1 < 1e-23);
        for &(e, g) in &n.gamma {
            assert_eq!(g, n.second_derivative_at_opt.abs() * e * e / 2.0);
        }
    }

    #[test]
    fn sensitivity_rejects_bad_epsilons() {
        let d = SourceDistribution::normal(1.0).unwrap();
        assert!(matches!(sensitivity(&d, 4, &[]), Err(Error::EmptyRequest(_))));
        assert!(sensitivity(&d, 4, &[0.1, -0.1]).is_err());
    }

    #[test]
    fn mc_uniform_matches_closed_form() {
        let d = SourceDistribution::uniform(1.0).unwrap();
        let cfg = QuantizerConfig::new(4, 0.125).unwrap();
        let mc = mc_mse(&d, &cfg, 1_000_000, 21).unwrap();
        assert!(rel(mc, 0.001_302_083_333) < 0.03);
    }

    #[test]
    fn mc_normal_matches_closed_form_near_optimum() {
        let d = SourceDistribution::normal(1.0).unwrap();
        let opt = optimal_step(&d, 4).unwrap();
        let cfg = QuantizerConfig::new(4, opt).unwrap();
        let mc = mc_mse(&d, &cfg, 1_000_000, 22).unwrap();
        assert!(rel(mc, mse_normal_closed(1.0, 4, opt).unwrap()) < 0.05);
    }

    #[test]
    fn mc_wide_step_is_pure_rounding() {
        // Δ = 2 on [-1, 1]: nothing clips and every draw rounds to 0.
        let d = SourceDistribution::uniform(1.0).unwrap();
        let cfg = QuantizerConfig::new(4, 2.0).unwrap();
        let mc = mc_mse(&d, &cfg, 1_000_000, 23).unwrap();
        let s = distributions::sample(&d, 1_000_000, 23).unwrap();
        let direct = s.data().iter().map(|x| x * x).sum::<f64>() / 1e6;
        assert!((mc - direct).abs() < 1e-12);
        assert!((mc - 4.0 / 12.0).abs() < 3.0 * (4.0f64 / 45.0 / 1e6).sqrt());
    }

    #[test]
    fn mc_matches_materialized_sample() {
        let d = SourceDistribution::laplace(0.5).unwrap();
        let cfg = QuantizerConfig::new(3, 0.3).unwrap();
        let s = distributions::sample(&d, 300_000, 3).unwrap();
        assert_eq!(mc_mse(&d, &cfg, 300_000, 3).unwrap(), mse_of_samples(s.data(), &cfg));
    }

    #[test]
    fn min_mse_rows() {
        let rows = min_mse_vs_bits(&SourceDistribution::uniform(1.0).unwrap(), &[4]).unwrap();
        assert!((rows[0].1 - 0.001_153_4).abs() < 1e-7);
        assert!(min_mse_vs_bits(&SourceDistribution::uniform(1.0).unwrap(), &[]).is_err());
    }

    #[test]
    fn laplace_curve_has_no_closed_column() {
        let d = SourceDistribution::laplace(1.0).unwrap();
        let c = mse_curve(&d, 4, &[0.3, 0.1, 0.2], Some((10_000, 1))).unwrap();
        assert!(c.rows.iter().all(|r| r.mse_closed.is_none() && r.mse_mc.is_some()));
        assert!(c.rows.windows(2).all(|w| w[0].delta < w[1].delta));
    }
}
