//! Command-line surface of the identification pipeline.
//!
//! Exit codes: 0 success / gap-empty verdict, 1 domain error, 2 usage,
//! 3 gap-nonempty verdict, 4 budget exhausted.  Every command is
//! deterministic under fixed flags and seed; `PFLID_SEED` overrides the
//! built-in default seed when `--seed` is absent.

use clap::{Args, Parser, Subcommand, ValueEnum};
use pflid::dataset::{generate, sample_prices, Dataset, NoiseSpec, PriceDist};
use pflid::demo::{make_demo, DEFAULT_SEED};
use pflid::error::Error;
use pflid::flex_model::FlexModel;
use pflid::identifiability::{default_clip, region_report, CheckMethod};
use pflid::identification::{
    identify, model_from_theta, IdentBudget, IdentReportFile, Norm, StructureSpec,
};
use pflid::noise_stats::{noisy_hull_report, run_trace_experiment, stats_to_csv};
use pflid::plot::{render_svg, PlotInput};
use pflid::polyhedra::{polygon_area, vertex_enumerate_2d};
use pflid::probing::{probe_until_identified, ProbeStatus};
use std::path::PathBuf;
use std::process::ExitCode;

const EXIT_OK: u8 = 0;
const EXIT_DOMAIN: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_GAP_NONEMPTY: u8 = 3;
const EXIT_BUDGET: u8 = 4;

#[derive(Parser)]
#[command(
    name = "pflid",
    version,
    about = "Identification of price-responsive flexible-load models: forward simulation, \
             identifiability geometry, inverse-optimization identification, probing, noise stats."
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Vertex,
    Milp,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum NormArg {
    L1,
}

#[derive(Args, Debug)]
struct CommonOut {
    /// Output format for the command summary on stdout.
    #[arg(long, value_enum, default_value = "text")]
    format: OutputFormat,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a dataset by simulating responses to random prices.
    Gen {
        /// Model file (JSON).
        #[arg(long)]
        model: PathBuf,
        /// Number of price samples.
        #[arg(long)]
        samples: usize,
        /// Noise: `none`, `paper-mult`, or `additive:SIGMA`.
        #[arg(long, default_value = "none")]
        noise: String,
        /// RNG seed (default: PFLID_SEED or 7).
        #[arg(long)]
        seed: Option<u64>,
        /// Dataset output path (JSON).
        #[arg(long)]
        out: PathBuf,
        /// Optional CSV export path.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[command(flatten)]
        common: CommonOut,
    },
    /// Check whether the dataset pins the region down uniquely.
    Check {
        dataset: PathBuf,
        #[arg(long, value_enum, default_value = "both")]
        method: MethodArg,
        /// Plot/area clip box "x0 y0 x1 y1" (visualization only).
        #[arg(long)]
        clip: Option<String>,
        /// Write the full region report (JSON) here.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: CommonOut,
    },
    /// Identify a storage-like model from the dataset.
    Identify {
        dataset: PathBuf,
        /// Structure file (JSON): counts, sigma, e0, dt, fixed profiles.
        #[arg(long)]
        structure: PathBuf,
        #[arg(long, value_enum, default_value = "l1")]
        norm: NormArg,
        /// Write the identification report (JSON) here.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Branch-and-bound node budget.
        #[arg(long, default_value_t = 200_000)]
        budget: usize,
        #[command(flatten)]
        common: CommonOut,
    },
    /// Probe an oracle model until the gap closes or the budget runs out.
    Probe {
        dataset: PathBuf,
        /// Oracle model file (JSON): the ground truth to query.
        #[arg(long)]
        oracle: PathBuf,
        #[arg(long, default_value_t = 50)]
        budget: usize,
        /// Probe trace output (JSON).
        #[arg(long)]
        out: PathBuf,
        /// Also write the augmented dataset here.
        #[arg(long)]
        final_dataset: Option<PathBuf>,
        #[command(flatten)]
        common: CommonOut,
    },
    /// Monte Carlo noise statistics at the true model.
    Noise {
        #[arg(long)]
        model: PathBuf,
        /// Additive noise standard deviation (per coordinate).
        #[arg(long, default_value_t = 0.02)]
        sigma: f64,
        /// Comma-separated sample sizes.
        #[arg(long = "Ks", default_value = "100,1000,5000")]
        ks: String,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long)]
        seed: Option<u64>,
        /// Write the stats (JSON) here.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Instead run the multiplicative-noise hull comparison.
        #[arg(long, default_value_t = false)]
        replicate_e: bool,
        /// Sample count for --replicate-e.
        #[arg(long, default_value_t = 50)]
        samples: usize,
        #[command(flatten)]
        common: CommonOut,
    },
    /// Deterministic SVG figure of the dataset geometry (T = 2).
    Plot {
        dataset: PathBuf,
        /// Identification report to overlay.
        #[arg(long)]
        ident: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Clip box "x0 y0 x1 y1".
        #[arg(long)]
        clip: Option<String>,
        #[command(flatten)]
        common: CommonOut,
    },
    /// Write the built-in demo model file.
    Demo {
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        common: CommonOut,
    },
}

fn resolve_seed(flag: Option<u64>) -> u64 {
    if let Some(s) = flag {
        return s;
    }
    if let Ok(v) = std::env::var("PFLID_SEED") {
        if let Ok(s) = v.parse() {
            return s;
        }
    }
    DEFAULT_SEED
}

fn parse_noise(s: &str, t: usize) -> Result<NoiseSpec, String> {
    match s {
        "none" => Ok(NoiseSpec::None),
        "paper-mult" => Ok(NoiseSpec::paper_multiplicative()),
        other => {
            if let Some(rest) = other.strip_prefix("additive:") {
                let sigma: f64 = rest
                    .parse()
                    .map_err(|_| format!("bad additive sigma: {rest}"))?;
                if sigma < 0.0 {
                    return Err("additive sigma must be nonnegative".into());
                }
                Ok(NoiseSpec::additive_diag(sigma, t))
            } else {
                Err(format!(
                    "unknown noise `{other}` (expected none, paper-mult, additive:SIGMA)"
                ))
            }
        }
    }
}

fn parse_clip(s: &str) -> Result<([f64; 2], [f64; 2]), String> {
    let parts: Vec<f64> = s
        .split_whitespace()
        .map(|x| x.parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| format!("bad clip `{s}` (expected \"x0 y0 x1 y1\")"))?;
    if parts.len() != 4 || parts[0] >= parts[2] || parts[1] >= parts[3] {
        return Err(format!("bad clip `{s}` (expected \"x0 y0 x1 y1\")"));
    }
    Ok(([parts[0], parts[1]], [parts[2], parts[3]]))
}

fn usage_error(msg: &str) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(EXIT_USAGE)
}

fn domain_error(e: &Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(EXIT_DOMAIN)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => domain_error(&e),
    }
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.cmd {
        Cmd::Gen {
            model,
            samples,
            noise,
            seed,
            out,
            csv,
            common,
        } => {
            if samples == 0 {
                return Ok(usage_error("--samples must be at least 1"));
            }
            let m = FlexModel::load_file(&model)?;
            let spec = match parse_noise(&noise, m.t) {
                Ok(s) => s,
                Err(msg) => return Ok(usage_error(&msg)),
            };
            let seed = resolve_seed(seed);
            let prices = sample_prices(samples, m.t, seed, PriceDist::UnitSphere)?;
            let ds = generate(&m, &prices, &spec, seed)?;
            ds.save_file(&out)?;
            if let Some(csv_path) = csv {
                std::fs::write(&csv_path, ds.to_csv_string())?;
            }
            match common.format {
                OutputFormat::Json => println!(
                    "{}",
                    serde_json::json!({
                        "samples": samples, "seed": seed, "T": m.t,
                        "out": out.display().to_string(),
                    })
                ),
                OutputFormat::Text => {
                    println!("wrote {} samples (seed {seed}) to {}", samples, out.display())
                }
            }
            Ok(ExitCode::from(EXIT_OK))
        }

        Cmd::Check {
            dataset,
            method,
            clip,
            out,
            common,
        } => {
            let ds = Dataset::load_file(&dataset)?;
            let clip = match clip.as_deref().map(parse_clip).transpose() {
                Ok(c) => c,
                Err(msg) => return Ok(usage_error(&msg)),
            };
            let method = match method {
                MethodArg::Vertex => CheckMethod::VertexEnum,
                MethodArg::Milp => CheckMethod::RobustMilp,
                MethodArg::Both => CheckMethod::Both,
            };
            let (report, _g) = region_report(&ds, method, clip)?;
            if let Some(path) = out {
                std::fs::write(&path, serde_json::to_string_pretty(&report).unwrap() + "\n")?;
            }
            match common.format {
                OutputFormat::Json => {
                    println!("{}", serde_json::to_string(&report).unwrap())
                }
                OutputFormat::Text => {
                    println!(
                        "gap empty: {} (method {}, Pi bounded: {})",
                        report.delta_omega_empty, report.method, report.pi_bounded
                    );
                    if let Some(w) = &report.witness {
                        println!("witness: {w:?}");
                    }
                    if let Some(a) = &report.areas {
                        println!(
                            "areas: conv {:.6}, Pi clipped {:.6} (clip {:?})",
                            a.conv_area, a.pi_clipped_area, a.clip
                        );
                    }
                }
            }
            Ok(ExitCode::from(if report.delta_omega_empty {
                EXIT_OK
            } else {
                EXIT_GAP_NONEMPTY
            }))
        }

        Cmd::Identify {
            dataset,
            structure,
            norm: _,
            out,
            budget,
            common,
        } => {
            let ds = Dataset::load_file(&dataset)?;
            let spec: StructureSpec = serde_json::from_str(&std::fs::read_to_string(&structure)?)
                .map_err(|e| Error::Parse(format!("structure file: {e}")))?;
            let result = identify(&ds, &spec, Norm::L1, &IdentBudget { node_budget: budget })?;
            let report = IdentReportFile {
                schema_version: 1,
                t: ds.t,
                structure: spec,
                result,
            };
            if let Some(path) = out {
                std::fs::write(&path, serde_json::to_string_pretty(&report).unwrap() + "\n")?;
            }
            let r = &report.result;
            match common.format {
                OutputFormat::Json => println!("{}", serde_json::to_string(&report).unwrap()),
                OutputFormat::Text => {
                    println!("f (l1) = {:.6e}, eval l2 = {:.6e}", r.f_value, r.eval_l2);
                    match &r.certificate {
                        Some(c) => println!(
                            "certificate: optimum = {}, failure = {:?}",
                            c.is_optimum, c.failure
                        ),
                        None => println!("certificate: not computed (T != 2)"),
                    }
                    println!(
                        "solver: {} nodes, gap {:.2e}, big-M {} (audit ok: {}, escalations {})",
                        r.stats.nodes,
                        r.stats.gap,
                        r.stats.big_m,
                        r.stats.big_m_audit_ok,
                        r.stats.escalations
                    );
                }
            }
            Ok(ExitCode::from(if r.stats.budget_exhausted {
                EXIT_BUDGET
            } else {
                EXIT_OK
            }))
        }

        Cmd::Probe {
            dataset,
            oracle,
            budget,
            out,
            final_dataset,
            common,
        } => {
            let ds = Dataset::load_file(&dataset)?;
            let model = FlexModel::load_file(&oracle)?;
            let (final_ds, status, trace) = probe_until_identified(&ds, &model, budget)?;
            std::fs::write(&out, serde_json::to_string_pretty(&trace).unwrap() + "\n")?;
            if let Some(path) = final_dataset {
                final_ds.save_file(&path)?;
            }
            match common.format {
                OutputFormat::Json => println!("{}", serde_json::to_string(&trace).unwrap()),
                OutputFormat::Text => println!(
                    "status: {:?} after {} probes ({} trace entries)",
                    status,
                    trace.probes_used,
                    trace.entries.len()
                ),
            }
            Ok(ExitCode::from(match status {
                ProbeStatus::Identified => EXIT_OK,
                ProbeStatus::BudgetExhausted => EXIT_BUDGET,
            }))
        }

        Cmd::Noise {
            model,
            sigma,
            ks,
            trials,
            seed,
            out,
            replicate_e,
            samples,
            common,
        } => {
            let m = FlexModel::load_file(&model)?;
            let seed = resolve_seed(seed);
            if replicate_e {
                if samples == 0 {
                    return Ok(usage_error("--samples must be at least 1"));
                }
                let report = noisy_hull_report(&m, samples, 100, seed)?;
                let json = serde_json::to_string_pretty(&report).unwrap() + "\n";
                if let Some(path) = out {
                    std::fs::write(&path, &json)?;
                }
                match common.format {
                    OutputFormat::Json => println!("{}", serde_json::to_string(&report).unwrap()),
                    OutputFormat::Text => println!(
                        "noisy hull covers clean hull in {}/{} directions \
                         (areas: clean {:.6}, noisy {:.6})",
                        report.covered_directions,
                        report.directions,
                        report.conv_area_clean,
                        report.conv_area_noisy
                    ),
                }
                return Ok(ExitCode::from(EXIT_OK));
            }
            if sigma < 0.0 {
                return Ok(usage_error("--sigma must be nonnegative"));
            }
            if trials == 0 {
                return Ok(usage_error("--trials must be at least 1"));
            }
            let k_list: Vec<usize> = match ks
                .split(',')
                .map(|x| x.trim().parse::<usize>())
                .collect::<Result<Vec<_>, _>>()
            {
                Ok(v) if !v.is_empty() && v.iter().all(|&k| k > 0) => v,
                _ => return Ok(usage_error(&format!("bad --Ks `{ks}`"))),
            };
            let mut cov = vec![vec![0.0; m.t]; m.t];
            for (i, row) in cov.iter_mut().enumerate() {
                row[i] = sigma * sigma;
            }
            let stats = run_trace_experiment(&m, &cov, &k_list, trials, seed)?;
            if let Some(path) = out {
                std::fs::write(&path, serde_json::to_string_pretty(&stats).unwrap() + "\n")?;
            }
            match common.format {
                OutputFormat::Json => println!("{}", serde_json::to_string(&stats).unwrap()),
                OutputFormat::Text => print!("{}", stats_to_csv(&stats)),
            }
            Ok(ExitCode::from(EXIT_OK))
        }

        Cmd::Plot {
            dataset,
            ident,
            out,
            clip,
            common,
        } => {
            let ds = Dataset::load_file(&dataset)?;
            if ds.t != 2 {
                eprintln!("error: plotting requires T=2");
                return Ok(ExitCode::from(EXIT_DOMAIN));
            }
            let g = pflid::identifiability::build_geometry(&ds)?;
            let (lo, hi) = match clip.as_deref().map(parse_clip).transpose() {
                Ok(Some((lo, hi))) => (lo.to_vec(), hi.to_vec()),
                Ok(None) => default_clip(&g),
                Err(msg) => return Ok(usage_error(&msg)),
            };
            let clipped = g.pi.clipped_to_box(&lo, &hi);
            let pi_verts = vertex_enumerate_2d(&clipped)?;
            let (ident_poly, ident_area) = match ident {
                Some(path) => {
                    let report: IdentReportFile =
                        serde_json::from_str(&std::fs::read_to_string(&path)?)
                            .map_err(|e| Error::Parse(format!("identification report: {e}")))?;
                    let model =
                        model_from_theta(&report.result.theta_hat, &report.structure, report.t)?;
                    let poly = model.aggregate_polytope_2d()?;
                    let area = polygon_area(&poly.vertices);
                    (Some(poly), Some(area))
                }
                None => (None, None),
            };
            let samples: Vec<Vec<f64>> = ds.samples.iter().map(|s| s.power.clone()).collect();
            let input = PlotInput {
                clip: [lo[0], lo[1], hi[0], hi[1]],
                conv: &g.conv,
                pi_clipped: &pi_verts,
                samples: &samples,
                ident: ident_poly.as_ref(),
                conv_area: polygon_area(&g.conv.vertices),
                pi_clipped_area: polygon_area(&pi_verts),
                ident_area,
            };
            std::fs::write(&out, render_svg(&input))?;
            match common.format {
                OutputFormat::Json => println!(
                    "{}",
                    serde_json::json!({
                        "out": out.display().to_string(),
                        "conv_area": input.conv_area,
                        "pi_clipped_area": input.pi_clipped_area,
                        "ident_area": ident_area,
                    })
                ),
                OutputFormat::Text => println!(
                    "wrote {} (conv area {:.6}, Pi clipped area {:.6})",
                    out.display(),
                    input.conv_area,
                    input.pi_clipped_area
                ),
            }
            Ok(ExitCode::from(EXIT_OK))
        }

        Cmd::Demo { out, seed, common } => {
            let demo = make_demo(resolve_seed(seed));
            demo.model.save_file(&out)?;
            match common.format {
                OutputFormat::Json => println!(
                    "{}",
                    serde_json::json!({
                        "out": out.display().to_string(),
                        "seed": demo.seed,
                    })
                ),
                OutputFormat::Text => {
                    println!("wrote demo model (seed {}) to {}", demo.seed, out.display())
                }
            }
            Ok(ExitCode::from(EXIT_OK))
        }
    }
}
