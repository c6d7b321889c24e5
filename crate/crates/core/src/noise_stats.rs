//! Monte Carlo verification of the noise statistics.
//!
//! With additive zero-mean Gaussian measurement noise, the squared-l2
//! identification loss splits into a fit term, the constant `tr(Sigma_p)`,
//! and a random variable `xi` whose mean vanishes and whose variance decays
//! like `1/K`.  The experiments here evaluate the loss at the true model,
//! where the fit term is identically zero, so each trial realizes
//! `loss = tr(Sigma_p) + xi` directly.  The analytic variance envelopes
//!
//! ```text
//! sigma_a^2 <= (4/K) M_a^2 1' Sigma_p 1      (cross term; M_a bounds the fit residual)
//! sigma_b^2 <= M_b / K,  M_b = T sum_i [3 s_i^4 + 6 s_i^2 mu_i^2 + mu_i^4]
//! ```
//!
//! (`s_i` the per-coordinate standard deviation) are reported next to the
//! empirical moments.  A nonzero noise mean shifts the expected loss by
//! `|mu|^2` and drags measurements outside the true region; `bias_probe`
//! quantifies both effects.

use crate::dataset::{cholesky_psd, sample_prices, PriceDist};
use crate::error::{Error, Result};
use crate::flex_model::FlexModel;
use crate::identifiability::build_geometry;
use crate::polyhedra::{polygon_area, support_value, vpolytope_membership, PolySet, Support};
use crate::rng::Stream;
use serde::{Deserialize, Serialize};

/// Moments and envelopes of the loss statistic at one sample size.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct XiStats {
    pub k: usize,
    pub trials: usize,
    pub mean_xi: f64,
    pub var_xi: f64,
    pub mean_loss_l2: f64,
    pub trace_sigma_p: f64,
    /// `mean_loss_l2 - trace_sigma_p`.
    pub gap: f64,
    pub sigma_a_sq_bound: f64,
    pub sigma_b_sq_bound: f64,
}

/// Loss trials at the true model for each sample size in `k_list`.
///
/// Responses are noise-free (the fit term vanishes); each trial draws fresh
/// additive noise `e ~ N(0, cov)` from a counter-based substream keyed by
/// `(trial, sample)`, so results do not depend on evaluation order.
pub fn run_trace_experiment(
    model: &FlexModel,
    cov: &[Vec<f64>],
    k_list: &[usize],
    trials: usize,
    seed: u64,
) -> Result<Vec<XiStats>> {
    model.validate()?;
    if trials == 0 {
        return Err(Error::Input("at least one trial is required".into()));
    }
    if k_list.is_empty() || k_list.iter().any(|&k| k == 0) {
        return Err(Error::Input("sample sizes must be positive".into()));
    }
    let t = model.t;
    if cov.len() != t || cov.iter().any(|r| r.len() != t) {
        return Err(Error::Input(format!("covariance must be {t}x{t}")));
    }
    let chol = cholesky_psd(cov)?;
    let trace: f64 = (0..t).map(|i| cov[i][i]).sum();

    // Shared responses: the price substreams give k-prefix stability, so
    // one pass at the largest K covers every entry of k_list.
    let k_max = *k_list.iter().max().expect("nonempty");
    let prices = sample_prices(k_max, t, seed, PriceDist::UnitSphere)?;
    let mut responses = Vec::with_capacity(k_max);
    for lam in &prices {
        responses.push(model.respond_point(lam)?);
    }
    let _ = &responses;

    // M_b = T sum_i [3 s_i^4] for the zero-mean experiment.
    let m_b: f64 = t as f64 * (0..t).map(|i| 3.0 * cov[i][i] * cov[i][i]).sum::<f64>();

    let mut out = Vec::with_capacity(k_list.len());
    for &k in k_list {
        let mut losses = Vec::with_capacity(trials);
        for trial in 0..trials {
            let mut acc = 0.0;
            for s in 0..k {
                // Fit term is zero at the true model: the per-sample loss
                // reduces to the squared noise norm.
                let mut stream = Stream::new(seed, "trace-noise", (trial as u64) << 32 | s as u64);
                let z: Vec<f64> = (0..t).map(|_| stream.next_normal()).collect();
                for i in 0..t {
                    let e: f64 = (0..=i).map(|j| chol[i][j] * z[j]).sum();
                    acc += e * e;
                }
            }
            losses.push(acc / k as f64);
        }
        let mean_loss = losses.iter().sum::<f64>() / trials as f64;
        let mean_xi = mean_loss - trace;
        let var_xi = losses
            .iter()
            .map(|l| {
                let d = l - mean_loss;
                d * d
            })
            .sum::<f64>()
            / trials as f64;
        // At the true model the fit residual bound M_a is exactly zero.
        let sigma_a_sq_bound = 0.0;
        let sigma_b_sq_bound = m_b / k as f64;
        out.push(XiStats {
            k,
            trials,
            mean_xi,
            var_xi,
            mean_loss_l2: mean_loss,
            trace_sigma_p: trace,
            gap: mean_loss - trace,
            sigma_a_sq_bound,
            sigma_b_sq_bound,
        });
    }
    Ok(out)
}

/// CSV table of trace-experiment results:
/// `K,mean_loss,trace,gap,var_xi,sigma_a_sq_bound,sigma_b_sq_bound`.
pub fn stats_to_csv(stats: &[XiStats]) -> String {
    let mut out =
        String::from("K,mean_loss,trace,gap,var_xi,sigma_a_sq_bound,sigma_b_sq_bound\n");
    for s in stats {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            s.k, s.mean_loss_l2, s.trace_sigma_p, s.gap, s.var_xi, s.sigma_a_sq_bound,
            s.sigma_b_sq_bound
        ));
    }
    out
}

/// Drift report under noise with a nonzero mean.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BiasReport {
    pub k: usize,
    pub mu: Vec<f64>,
    pub mean_loss_l2: f64,
    /// `tr(Sigma_p) + |mu|^2`: the expected loss under biased noise.
    pub expected_loss: f64,
    /// `mean_loss_l2 - expected_loss`.
    pub drift: f64,
    pub biased: bool,
    /// Fraction of noisy measurements outside the true aggregate region
    /// (T = 2 only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub outside_fraction: Option<f64>,
}

/// Evaluate the loss at the true model under noise `e ~ N(mu, cov)` and
/// report the drift against the biased expectation.
pub fn bias_probe(
    model: &FlexModel,
    mu: &[f64],
    cov: &[Vec<f64>],
    k: usize,
    seed: u64,
) -> Result<BiasReport> {
    model.validate()?;
    let t = model.t;
    if mu.len() != t {
        return Err(Error::Input("mean vector length mismatch".into()));
    }
    if k == 0 {
        return Err(Error::Input("sample count must be positive".into()));
    }
    let chol = cholesky_psd(cov)?;
    let trace: f64 = (0..t).map(|i| cov[i][i]).sum();
    let mu_sq: f64 = mu.iter().map(|x| x * x).sum();

    let prices = sample_prices(k, t, seed, PriceDist::UnitSphere)?;
    let mut acc = 0.0;
    let mut noisy_points = Vec::with_capacity(k);
    for (s, lam) in prices.iter().enumerate() {
        let p = model.respond_point(lam)?;
        let mut stream = Stream::new(seed, "bias-noise", s as u64);
        let z: Vec<f64> = (0..t).map(|_| stream.next_normal()).collect();
        let mut noisy = vec![0.0; t];
        for i in 0..t {
            let e: f64 = mu[i] + (0..=i).map(|j| chol[i][j] * z[j]).sum::<f64>();
            acc += e * e;
            noisy[i] = p[i] + e;
        }
        noisy_points.push(noisy);
    }
    let mean_loss = acc / k as f64;

    let outside_fraction = if t == 2 {
        let poly = model.aggregate_polytope_2d()?;
        let mut outside = 0usize;
        for p in &noisy_points {
            let (inside, _) = vpolytope_membership(p, &poly)?;
            if !inside {
                outside += 1;
            }
        }
        Some(outside as f64 / k as f64)
    } else {
        None
    };

    Ok(BiasReport {
        k,
        mu: mu.to_vec(),
        mean_loss_l2: mean_loss,
        expected_loss: trace + mu_sq,
        drift: mean_loss - (trace + mu_sq),
        biased: mu.iter().any(|&x| x != 0.0),
        outside_fraction,
    })
}

/// Deterministic comparison of the noise-free and noisy sample hulls under
/// the multiplicative measurement chain.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NoisyHullReport {
    pub schema_version: u32,
    pub k: usize,
    pub sigma_p_rel: f64,
    pub sigma_lambda_rel: f64,
    pub directions: usize,
    /// Directions where the noisy hull's support reaches at least as low as
    /// the noise-free hull's (the noisy hull covers the clean one there).
    pub covered_directions: usize,
    pub coverage_fraction: f64,
    pub conv_area_clean: f64,
    pub conv_area_noisy: f64,
    pub support_pairs: Vec<SupportPair>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SupportPair {
    pub angle: f64,
    pub clean: f64,
    pub noisy: f64,
}

/// Generate paired clean/noisy datasets from one price draw and compare the
/// hull support values over `directions` rays.  Coverage is reported, not
/// asserted: whether the noisy hull fully covers the clean one is an
/// instance property.
pub fn noisy_hull_report(
    model: &FlexModel,
    k: usize,
    directions: usize,
    seed: u64,
) -> Result<NoisyHullReport> {
    use crate::dataset::{generate, NoiseSpec};
    let prices = sample_prices(k, model.t, seed, PriceDist::UnitSphere)?;
    let clean = generate(model, &prices, &NoiseSpec::None, seed)?;
    let spec = NoiseSpec::paper_multiplicative();
    let noisy = generate(model, &prices, &spec, seed)?;
    let (sigma_p_rel, sigma_lambda_rel) = match spec {
        NoiseSpec::Multiplicative {
            sigma_p_rel,
            sigma_lambda_rel,
        } => (sigma_p_rel, sigma_lambda_rel),
        _ => unreachable!(),
    };
    let g_clean = build_geometry(&clean)?;
    let g_noisy = build_geometry(&noisy)?;

    let mut pairs = Vec::with_capacity(directions);
    let mut covered = 0usize;
    for i in 0..directions {
        let angle = std::f64::consts::TAU * i as f64 / directions as f64;
        let lam = vec![angle.cos(), angle.sin()];
        let sc = match support_value(PolySet::V(&g_clean.conv), &lam)? {
            Support::Value(v) => v,
            Support::Unbounded => unreachable!("hulls are bounded"),
        };
        let sn = match support_value(PolySet::V(&g_noisy.conv), &lam)? {
            Support::Value(v) => v,
            Support::Unbounded => unreachable!("hulls are bounded"),
        };
        if sn <= sc + 1e-12 {
            covered += 1;
        }
        pairs.push(SupportPair {
            angle,
            clean: sc,
            noisy: sn,
        });
    }

    Ok(NoisyHullReport {
        schema_version: 1,
        k,
        sigma_p_rel,
        sigma_lambda_rel,
        directions,
        covered_directions: covered,
        coverage_fraction: covered as f64 / directions as f64,
        conv_area_clean: polygon_area(&g_clean.conv.vertices),
        conv_area_noisy: polygon_area(&g_noisy.conv.vertices),
        support_pairs: pairs,
    })
}
