//! Price sampling, forward data generation with noise, and dataset files.
//!
//! Prices default to the uniform-sphere distribution: i.i.d. standard
//! normals normalized to unit length, one counter-based substream per
//! sample index, so the first `k` prices of a run of `n > k` equal the
//! prices of a run of `k` (prefix property).
//!
//! Multiplicative noise follows the measurement chain: the price is
//! perturbed elementwise first, the load responds to the perturbed price,
//! and the measured power is the response perturbed elementwise.  The
//! stored pair is the perturbed price and the perturbed response.  Additive
//! noise perturbs only the measured power.

use crate::error::{Error, Result};
use crate::flex_model::FlexModel;
use crate::rng::Stream;
use serde::{Deserialize, Serialize};

/// Noise attached to generated samples.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseSpec {
    None,
    /// Zero-mean Gaussian power noise with the given covariance.
    Additive { cov: Vec<Vec<f64>> },
    /// Relative (elementwise) Gaussian noise on price and power.
    Multiplicative {
        sigma_p_rel: f64,
        sigma_lambda_rel: f64,
    },
}

impl NoiseSpec {
    /// Meter and price tolerances from the 3-sigma criterion:
    /// power within +-0.5% and price within +-10% of the true value.
    pub fn paper_multiplicative() -> Self {
        NoiseSpec::Multiplicative {
            sigma_p_rel: 0.005 / 3.0,
            sigma_lambda_rel: 0.10 / 3.0,
        }
    }

    pub fn additive_diag(sigma: f64, t: usize) -> Self {
        let mut cov = vec![vec![0.0; t]; t];
        for (i, row) in cov.iter_mut().enumerate() {
            row[i] = sigma * sigma;
        }
        NoiseSpec::Additive { cov }
    }

    pub fn validate(&self, t: usize) -> Result<()> {
        match self {
            NoiseSpec::None => Ok(()),
            NoiseSpec::Additive { cov } => {
                if cov.len() != t || cov.iter().any(|r| r.len() != t) {
                    return Err(Error::Input(format!("covariance must be {t}x{t}")));
                }
                for i in 0..t {
                    for j in 0..t {
                        if (cov[i][j] - cov[j][i]).abs() > 1e-12 {
                            return Err(Error::Input("covariance must be symmetric".into()));
                        }
                    }
                }
                cholesky_psd(cov).map(|_| ())
            }
            NoiseSpec::Multiplicative {
                sigma_p_rel,
                sigma_lambda_rel,
            } => {
                if *sigma_p_rel < 0.0 || *sigma_lambda_rel < 0.0 {
                    return Err(Error::Input("relative sigmas must be nonnegative".into()));
                }
                Ok(())
            }
        }
    }
}

/// Lower Cholesky factor of a positive semidefinite matrix.
pub fn cholesky_psd(cov: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let n = cov.len();
    let scale = cov
        .iter()
        .flat_map(|r| r.iter())
        .fold(1.0f64, |m, &x| m.max(x.abs()));
    let mut l = vec![vec![0.0; n]; n];
    for j in 0..n {
        let mut d = cov[j][j];
        for k in 0..j {
            d -= l[j][k] * l[j][k];
        }
        if d < -1e-10 * scale {
            return Err(Error::Input(format!(
                "covariance is not positive semidefinite (pivot {d} at {j})"
            )));
        }
        l[j][j] = d.max(0.0).sqrt();
        for i in j + 1..n {
            if l[j][j] <= 1e-12 * scale.sqrt() {
                l[i][j] = 0.0;
                continue;
            }
            let mut s = cov[i][j];
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            l[i][j] = s / l[j][j];
        }
    }
    Ok(l)
}

/// One observed price/power pair.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Sample {
    pub lambda: Vec<f64>,
    pub power: Vec<f64>,
}

/// Ordered samples plus generation metadata.  Sample order is generation
/// order; prefix experiments rely on it.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Dataset {
    pub schema_version: u32,
    #[serde(rename = "T")]
    pub t: usize,
    pub seed: u64,
    pub noise: NoiseSpec,
    pub samples: Vec<Sample>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub truth_ref: Option<String>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// The first `k` samples as a dataset (nesting experiments).
    pub fn prefix(&self, k: usize) -> Dataset {
        Dataset {
            schema_version: self.schema_version,
            t: self.t,
            seed: self.seed,
            noise: self.noise.clone(),
            samples: self.samples.iter().take(k).cloned().collect(),
            truth_ref: self.truth_ref.clone(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (k, s) in self.samples.iter().enumerate() {
            if s.lambda.len() != self.t {
                return Err(Error::Parse(format!("samples[{k}].lambda: expected length {}", self.t)));
            }
            if s.power.len() != self.t {
                return Err(Error::Parse(format!("samples[{k}].power: expected length {}", self.t)));
            }
        }
        self.noise.validate(self.t)
    }

    pub fn to_json_string(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let ds: Dataset =
            serde_json::from_str(s).map_err(|e| Error::Parse(format!("dataset file: {e}")))?;
        ds.validate()?;
        Ok(ds)
    }

    pub fn save_file(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, self.to_json_string()? + "\n")?;
        Ok(())
    }

    pub fn load_file(path: &std::path::Path) -> Result<Self> {
        let s = std::fs::read_to_string(path)?;
        Self::from_json_str(&s)
    }

    /// CSV export: `k, lambda_1..T, power_1..T`.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("k");
        for i in 1..=self.t {
            out.push_str(&format!(",lambda_{i}"));
        }
        for i in 1..=self.t {
            out.push_str(&format!(",power_{i}"));
        }
        out.push('\n');
        for (k, s) in self.samples.iter().enumerate() {
            out.push_str(&format!("{k}"));
            for v in &s.lambda {
                out.push_str(&format!(",{v}"));
            }
            for v in &s.power {
                out.push_str(&format!(",{v}"));
            }
            out.push('\n');
        }
        out
    }
}

/// Price distributions for sampling.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PriceDist {
    /// i.i.d. standard normal vectors normalized to unit length.
    UnitSphere,
}

/// Deterministic price sample: substream `("price", k)` of the seed.
pub fn sample_prices(n: usize, t: usize, seed: u64, dist: PriceDist) -> Result<Vec<Vec<f64>>> {
    if n == 0 {
        return Err(Error::Input("price sample count must be at least 1".into()));
    }
    if t == 0 {
        return Err(Error::Input("T must be positive".into()));
    }
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let mut stream = Stream::new(seed, "price", k as u64);
        let lam = loop {
            let v: Vec<f64> = (0..t).map(|_| stream.next_normal()).collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 1e-12 {
                break v.into_iter().map(|x| x / norm).collect::<Vec<f64>>();
            }
        };
        match dist {
            PriceDist::UnitSphere => out.push(lam),
        }
    }
    Ok(out)
}

/// Forward data generation: respond to each price, apply the noise model.
///
/// Noise substreams are keyed separately from price substreams, so the same
/// seed yields the same noise regardless of how prices were produced.
pub fn generate(
    model: &FlexModel,
    prices: &[Vec<f64>],
    noise: &NoiseSpec,
    seed: u64,
) -> Result<Dataset> {
    model.validate()?;
    noise.validate(model.t)?;
    let t = model.t;
    let mut samples = Vec::with_capacity(prices.len());
    let chol = match noise {
        NoiseSpec::Additive { cov } => Some(cholesky_psd(cov)?),
        _ => None,
    };
    for (k, lam) in prices.iter().enumerate() {
        if lam.len() != t {
            return Err(Error::Input(format!(
                "price {k} has length {}, expected {t}",
                lam.len()
            )));
        }
        match noise {
            NoiseSpec::None => {
                let p = model.respond_point(lam)?;
                samples.push(Sample {
                    lambda: lam.clone(),
                    power: p,
                });
            }
            NoiseSpec::Additive { .. } => {
                let p = model.respond_point(lam)?;
                let l = chol.as_ref().expect("factor computed above");
                let mut stream = Stream::new(seed, "noise-power", k as u64);
                let z: Vec<f64> = (0..t).map(|_| stream.next_normal()).collect();
                let power: Vec<f64> = (0..t)
                    .map(|i| {
                        let e: f64 = (0..=i).map(|j| l[i][j] * z[j]).sum();
                        p[i] + e
                    })
                    .collect();
                samples.push(Sample {
                    lambda: lam.clone(),
                    power,
                });
            }
            NoiseSpec::Multiplicative {
                sigma_p_rel,
                sigma_lambda_rel,
            } => {
                let mut lstream = Stream::new(seed, "noise-lambda", k as u64);
                let lam_noisy: Vec<f64> = lam
                    .iter()
                    .map(|&x| (1.0 + sigma_lambda_rel * lstream.next_normal()) * x)
                    .collect();
                let p = model.respond_point(&lam_noisy)?;
                let mut pstream = Stream::new(seed, "noise-power", k as u64);
                let power: Vec<f64> = p
                    .iter()
                    .map(|&x| (1.0 + sigma_p_rel * pstream.next_normal()) * x)
                    .collect();
                samples.push(Sample {
                    lambda: lam_noisy,
                    power,
                });
            }
        }
    }
    Ok(Dataset {
        schema_version: 1,
        t,
        seed,
        noise: noise.clone(),
        samples,
        truth_ref: Some(digest_model(model)?),
    })
}

/// Short content digest of a model, recorded in datasets it generated.
pub fn digest_model(model: &FlexModel) -> Result<String> {
    let json = model.to_json_string()?;
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in json.as_bytes() {
        h ^= *b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    Ok(format!("fnv1a:{h:016x}"))
}
