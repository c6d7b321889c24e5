//! Inverse-optimization identification of the storage-like model.
//!
//! Given a dataset and a prescribed structure (component counts, retention
//! ratios, initial energies, fixed profiles), the response constraint of
//! every sample is replaced by its KKT system, complementarity is
//! linearized with binaries and a big-M, and the resulting single-level
//! MILP minimizes the mean l1 deviation between measured and modelled
//! responses.  The identified unknowns are the power bounds of every
//! adjustable component and the energy bounds of every battery.
//!
//! The solve is warm-started by a support-matching heuristic (see
//! [`fit_support_matching`]): on noise-free data it usually lands an exact
//! zero-loss incumbent, which lets branch and bound close at the root since
//! the objective is bounded below by zero.

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::flex_model::{
    energy_row_coeffs, BatteryParams, FixedLoadParams, FlexModel, TdLoadParams,
};
use crate::identifiability::{build_geometry, certify_candidate, CandidateRegion, Certificate};
use crate::polyhedra::{is_bounded, HPolyhedron, VPolytope};
use crate::solver::{
    solve_lp, solve_milp_with, LpProblem, LpStatus, MilpOptions, MilpProblem, MilpStatus,
    Relation, Sense,
};
use crate::tol;
use serde::{Deserialize, Serialize};

/// Loss norms: l1 is the optimization norm (exact MILP); l2 is used for
/// evaluation and the noise experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Norm {
    L1,
    L2,
}

/// Prescribed identification structure.  `sigma`, `e0`, `dt`, and the
/// fixed profiles are given; component power/energy bounds are identified.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StructureSpec {
    pub n_vb: usize,
    pub n_td: usize,
    pub n_fix: usize,
    pub sigma: Vec<f64>,
    pub e0: Vec<f64>,
    pub dt: f64,
    pub fixed_profiles: Vec<Vec<f64>>,
}

impl StructureSpec {
    pub fn validate(&self, t: usize) -> Result<()> {
        if self.n_vb == 0 && self.n_td == 0 && self.n_fix == 0 {
            return Err(Error::Input("structure must have at least one component".into()));
        }
        if self.sigma.len() != self.n_vb || self.e0.len() != self.n_vb {
            return Err(Error::Input(
                "sigma and e0 must have one entry per battery".into(),
            ));
        }
        if self.sigma.iter().any(|&s| !(s > 0.0 && s <= 1.0)) {
            return Err(Error::Input("each sigma must lie in (0, 1]".into()));
        }
        if !(self.dt > 0.0) {
            return Err(Error::Input("dt must be positive".into()));
        }
        if self.fixed_profiles.len() != self.n_fix
            || self.fixed_profiles.iter().any(|p| p.len() != t)
        {
            return Err(Error::Input(format!(
                "expected {} fixed profiles of length {t}",
                self.n_fix
            )));
        }
        Ok(())
    }

    pub fn fixed_total(&self, t: usize) -> Vec<f64> {
        let mut p = vec![0.0; t];
        for f in &self.fixed_profiles {
            for i in 0..t {
                p[i] += f[i];
            }
        }
        p
    }
}

/// Identified bounds for one battery.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BatteryTheta {
    pub e_min: Vec<f64>,
    pub e_max: Vec<f64>,
    pub p_min: Vec<f64>,
    pub p_max: Vec<f64>,
}

/// Identified bounds for one time-decoupled load.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TdTheta {
    pub p_min: Vec<f64>,
    pub p_max: Vec<f64>,
}

/// The identified parameter set.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ThetaHat {
    pub batteries: Vec<BatteryTheta>,
    pub td_loads: Vec<TdTheta>,
}

/// Solver bookkeeping attached to every identification result.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolverStats {
    pub nodes: usize,
    pub bound: f64,
    pub gap: f64,
    pub big_m: f64,
    pub escalations: u32,
    pub big_m_audit_ok: bool,
    /// Objective of the warm-start incumbent, when one was found.
    pub heuristic_value: Option<f64>,
    pub budget_exhausted: bool,
}

/// Identification outcome.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IdentResult {
    pub theta_hat: ThetaHat,
    /// Optimal objective of the single-level MILP (mean l1 loss).
    pub f_value: f64,
    pub norm: Norm,
    /// Mean squared-l2 loss of the identified model under the
    /// lexicographic response rule (evaluation norm).
    pub eval_l2: f64,
    /// Theorem-2 certificate of the identified aggregate region (T = 2).
    pub certificate: Option<Certificate>,
    pub stats: SolverStats,
}

/// On-disk identification report: everything needed to reconstruct and
/// overlay the identified region.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IdentReportFile {
    pub schema_version: u32,
    #[serde(rename = "T")]
    pub t: usize,
    pub structure: StructureSpec,
    pub result: IdentResult,
}

/// Search budget for the branch-and-bound solve.
#[derive(Debug, Clone)]
pub struct IdentBudget {
    pub node_budget: usize,
}

impl Default for IdentBudget {
    fn default() -> Self {
        IdentBudget {
            node_budget: 200_000,
        }
    }
}

// ---------------------------------------------------------------------------
// MILP layout
// ---------------------------------------------------------------------------

/// Column indices of the single-level MILP.
///
/// Global theta columns first, then per-sample blocks of primal variables,
/// duals, l1 auxiliaries, and complementarity binaries.
struct Layout {
    t: usize,
    nvb: usize,
    ntd: usize,
    theta_len: usize,
    sample_len: usize,
    cont_per_sample: usize,
}

impl Layout {
    fn new(t: usize, nvb: usize, ntd: usize) -> Layout {
        let theta_len = nvb * 4 * t + ntd * 2 * t;
        // p_agg, p_vb*, p_td*, omega, v1..v4 per vb, v5..v6 per td, u
        let cont_per_sample = t * (1 + nvb + ntd + 1 + 4 * nvb + 2 * ntd + 1);
        let bins = t * (4 * nvb + 2 * ntd);
        Layout {
            t,
            nvb,
            ntd,
            theta_len,
            sample_len: cont_per_sample + bins,
            cont_per_sample,
        }
    }

    // Theta columns.
    fn th_e_min(&self, n: usize, i: usize) -> usize {
        n * 4 * self.t + i
    }
    fn th_e_max(&self, n: usize, i: usize) -> usize {
        n * 4 * self.t + self.t + i
    }
    fn th_p_min(&self, n: usize, i: usize) -> usize {
        n * 4 * self.t + 2 * self.t + i
    }
    fn th_p_max(&self, n: usize, i: usize) -> usize {
        n * 4 * self.t + 3 * self.t + i
    }
    fn th_td_min(&self, n: usize, i: usize) -> usize {
        self.nvb * 4 * self.t + n * 2 * self.t + i
    }
    fn th_td_max(&self, n: usize, i: usize) -> usize {
        self.nvb * 4 * self.t + n * 2 * self.t + self.t + i
    }

    // Per-sample columns.
    fn base(&self, k: usize) -> usize {
        self.theta_len + k * self.sample_len
    }
    fn p_agg(&self, k: usize, i: usize) -> usize {
        self.base(k) + i
    }
    fn p_vb(&self, k: usize, n: usize, i: usize) -> usize {
        self.base(k) + self.t * (1 + n) + i
    }
    fn p_td(&self, k: usize, n: usize, i: usize) -> usize {
        self.base(k) + self.t * (1 + self.nvb + n) + i
    }
    fn omega(&self, k: usize, i: usize) -> usize {
        self.base(k) + self.t * (1 + self.nvb + self.ntd) + i
    }
    fn dual_v(&self, k: usize, n: usize, which: usize, i: usize) -> usize {
        // which: 1..=4 for batteries.
        self.base(k) + self.t * (2 + self.nvb + self.ntd) + self.t * (n * 4 + (which - 1)) + i
    }
    fn dual_td(&self, k: usize, n: usize, which: usize, i: usize) -> usize {
        // which: 5..=6 for td loads.
        self.base(k)
            + self.t * (2 + self.nvb + self.ntd + 4 * self.nvb)
            + self.t * (n * 2 + (which - 5))
            + i
    }
    fn u(&self, k: usize, i: usize) -> usize {
        self.base(k) + self.t * (2 + self.nvb + self.ntd + 4 * self.nvb + 2 * self.ntd) + i
    }
    fn bin(&self, k: usize, pair: usize, i: usize) -> usize {
        // pair indexes the complementarity family in build order:
        // per battery n: 4 pairs (energy lo/hi, power lo/hi), then per td: 2.
        self.base(k) + self.cont_per_sample + self.t * pair + i
    }
    fn bin_vb(&self, k: usize, n: usize, which: usize, i: usize) -> usize {
        self.bin(k, n * 4 + (which - 1), i)
    }
    fn bin_td(&self, k: usize, n: usize, which: usize, i: usize) -> usize {
        self.bin(k, 4 * self.nvb + n * 2 + (which - 5), i)
    }
    fn total(&self, k_samples: usize) -> usize {
        self.theta_len + k_samples * self.sample_len
    }
}

/// Big-M per the initialization rule: 10 x max(|lambda| entries, data
/// power range, 1).
fn initial_big_m(ds: &Dataset) -> f64 {
    let mut m = 1.0f64;
    for s in &ds.samples {
        for &x in &s.lambda {
            m = m.max(x.abs());
        }
        for &x in &s.power {
            m = m.max(x.abs());
        }
    }
    10.0 * m
}

/// Build the single-level MILP for the dataset and structure.
fn build_milp(ds: &Dataset, spec: &StructureSpec, big_m: f64) -> (MilpProblem, Layout) {
    let t = ds.t;
    let kk = ds.len();
    let lay = Layout::new(t, spec.n_vb, spec.n_td);
    let ncols = lay.total(kk);
    let fixed_total = spec.fixed_total(t);

    let mut bounds = vec![(f64::NEG_INFINITY, f64::INFINITY); ncols];
    let mut cost = vec![0.0; ncols];
    let mut binaries = Vec::new();
    for k in 0..kk {
        for i in 0..t {
            // l1 auxiliaries are nonnegative, making zero a valid global
            // lower bound on the objective.
            bounds[lay.u(k, i)] = (0.0, f64::INFINITY);
            cost[lay.u(k, i)] = 1.0 / kk as f64;
        }
        for n in 0..spec.n_vb {
            for which in 1..=4 {
                for i in 0..t {
                    bounds[lay.dual_v(k, n, which, i)] = (0.0, big_m);
                    let b = lay.bin_vb(k, n, which, i);
                    bounds[b] = (0.0, 1.0);
                    binaries.push(b);
                }
            }
        }
        for n in 0..spec.n_td {
            for which in 5..=6 {
                for i in 0..t {
                    bounds[lay.dual_td(k, n, which, i)] = (0.0, big_m);
                    let b = lay.bin_td(k, n, which, i);
                    bounds[b] = (0.0, 1.0);
                    binaries.push(b);
                }
            }
        }
    }

    let mut lp = LpProblem {
        sense: Sense::Min,
        cost,
        constraints: Vec::new(),
        bounds,
    };

    let mut row = |coeffs: Vec<(usize, f64)>, rel: Relation, rhs: f64, lp: &mut LpProblem| {
        let mut c = vec![0.0; ncols];
        for (j, v) in coeffs {
            c[j] += v;
        }
        lp.add_constraint(c, rel, rhs);
    };

    for (k, s) in ds.samples.iter().enumerate() {
        let lam = &s.lambda;
        let pm = &s.power;

        // Aggregation: p_agg - sum_n p_vb - sum_n p_td = fixed_total.
        for i in 0..t {
            let mut cs = vec![(lay.p_agg(k, i), 1.0)];
            for n in 0..spec.n_vb {
                cs.push((lay.p_vb(k, n, i), -1.0));
            }
            for n in 0..spec.n_td {
                cs.push((lay.p_td(k, n, i), -1.0));
            }
            row(cs, Relation::Eq, fixed_total[i], &mut lp);
        }

        // Stationarity of the aggregate: lambda + omega = 0.
        for i in 0..t {
            row(vec![(lay.omega(k, i), 1.0)], Relation::Eq, -lam[i], &mut lp);
        }

        for n in 0..spec.n_vb {
            let sg = spec.sigma[n];
            let e0 = spec.e0[n];
            for i in 0..t {
                let coeffs = energy_row_coeffs(sg, spec.dt, i, t);
                let decay = sg.powi((i + 1) as i32) * e0;

                // Energy window: coeffs.p_vb + decay within [e_min, e_max].
                let mut lo: Vec<(usize, f64)> = coeffs
                    .iter()
                    .enumerate()
                    .take(i + 1)
                    .map(|(j, &c)| (lay.p_vb(k, n, j), c))
                    .collect();
                lo.push((lay.th_e_min(n, i), -1.0));
                row(lo, Relation::Ge, -decay, &mut lp);

                let mut hi: Vec<(usize, f64)> = coeffs
                    .iter()
                    .enumerate()
                    .take(i + 1)
                    .map(|(j, &c)| (lay.p_vb(k, n, j), c))
                    .collect();
                hi.push((lay.th_e_max(n, i), -1.0));
                row(hi, Relation::Le, -decay, &mut lp);

                // Power window.
                row(
                    vec![(lay.p_vb(k, n, i), 1.0), (lay.th_p_min(n, i), -1.0)],
                    Relation::Ge,
                    0.0,
                    &mut lp,
                );
                row(
                    vec![(lay.p_vb(k, n, i), 1.0), (lay.th_p_max(n, i), -1.0)],
                    Relation::Le,
                    0.0,
                    &mut lp,
                );

                // Complementarity, big-M linearized: v <= M d, slack <= M (1 - d).
                for (which, slack_coeffs, slack_rhs) in [
                    // v1: energy-lower slack = coeffs.p + decay - e_min.
                    (
                        1usize,
                        {
                            let mut cs: Vec<(usize, f64)> = coeffs
                                .iter()
                                .enumerate()
                                .take(i + 1)
                                .map(|(j, &c)| (lay.p_vb(k, n, j), c))
                                .collect();
                            cs.push((lay.th_e_min(n, i), -1.0));
                            cs
                        },
                        -decay,
                    ),
                    // v2: energy-upper slack = e_max - coeffs.p - decay.
                    (
                        2usize,
                        {
                            let mut cs: Vec<(usize, f64)> = coeffs
                                .iter()
                                .enumerate()
                                .take(i + 1)
                                .map(|(j, &c)| (lay.p_vb(k, n, j), -c))
                                .collect();
                            cs.push((lay.th_e_max(n, i), 1.0));
                            cs
                        },
                        decay,
                    ),
                    // v3: power-lower slack = p - p_min.
                    (
                        3usize,
                        vec![(lay.p_vb(k, n, i), 1.0), (lay.th_p_min(n, i), -1.0)],
                        0.0,
                    ),
                    // v4: power-upper slack = p_max - p.
                    (
                        4usize,
                        vec![(lay.p_vb(k, n, i), -1.0), (lay.th_p_max(n, i), 1.0)],
                        0.0,
                    ),
                ] {
                    let d = lay.bin_vb(k, n, which, i);
                    let v = lay.dual_v(k, n, which, i);
                    // v - M d <= 0.
                    row(vec![(v, 1.0), (d, -big_m)], Relation::Le, 0.0, &mut lp);
                    // slack + M d <= M + slack_rhs.
                    let mut cs = slack_coeffs;
                    cs.push((d, big_m));
                    row(cs, Relation::Le, big_m + slack_rhs, &mut lp);
                }
            }

            // Battery stationarity:
            //   -omega + dt Upsilon1'(v2 - v1) - v3 + v4 = 0.
            for i in 0..t {
                let mut cs = vec![(lay.omega(k, i), -1.0)];
                for j in i..t {
                    let c = spec.dt * sg.powi((j - i) as i32);
                    cs.push((lay.dual_v(k, n, 2, j), c));
                    cs.push((lay.dual_v(k, n, 1, j), -c));
                }
                cs.push((lay.dual_v(k, n, 3, i), -1.0));
                cs.push((lay.dual_v(k, n, 4, i), 1.0));
                row(cs, Relation::Eq, 0.0, &mut lp);
            }
        }

        for n in 0..spec.n_td {
            for i in 0..t {
                // Power window.
                row(
                    vec![(lay.p_td(k, n, i), 1.0), (lay.th_td_min(n, i), -1.0)],
                    Relation::Ge,
                    0.0,
                    &mut lp,
                );
                row(
                    vec![(lay.p_td(k, n, i), 1.0), (lay.th_td_max(n, i), -1.0)],
                    Relation::Le,
                    0.0,
                    &mut lp,
                );
                // Complementarity pairs (v5 lower, v6 upper).
                for (which, slack_coeffs) in [
                    (
                        5usize,
                        vec![(lay.p_td(k, n, i), 1.0), (lay.th_td_min(n, i), -1.0)],
                    ),
                    (
                        6usize,
                        vec![(lay.p_td(k, n, i), -1.0), (lay.th_td_max(n, i), 1.0)],
                    ),
                ] {
                    let d = lay.bin_td(k, n, which, i);
                    let v = lay.dual_td(k, n, which, i);
                    row(vec![(v, 1.0), (d, -big_m)], Relation::Le, 0.0, &mut lp);
                    let mut cs = slack_coeffs;
                    cs.push((d, big_m));
                    row(cs, Relation::Le, big_m, &mut lp);
                }
                // Stationarity: -omega - v5 + v6 = 0.
                row(
                    vec![
                        (lay.omega(k, i), -1.0),
                        (lay.dual_td(k, n, 5, i), -1.0),
                        (lay.dual_td(k, n, 6, i), 1.0),
                    ],
                    Relation::Eq,
                    0.0,
                    &mut lp,
                );
            }
        }

        // l1 linearization: u >= +-(measured - p_agg).
        for i in 0..t {
            row(
                vec![(lay.u(k, i), 1.0), (lay.p_agg(k, i), 1.0)],
                Relation::Ge,
                pm[i],
                &mut lp,
            );
            row(
                vec![(lay.u(k, i), 1.0), (lay.p_agg(k, i), -1.0)],
                Relation::Ge,
                -pm[i],
                &mut lp,
            );
        }
    }

    (MilpProblem { lp, binaries }, lay)
}

/// Reconstruct a model from identified bounds plus the prescribed inputs.
///
/// Bounds are clamped to be ordered: MILP extraction can leave collapsed
/// windows inverted by a rounding ulp.
pub fn model_from_theta(theta: &ThetaHat, spec: &StructureSpec, t: usize) -> Result<FlexModel> {
    let mut batteries = Vec::new();
    for (n, b) in theta.batteries.iter().enumerate() {
        let mut bp = BatteryParams {
            p_min: b.p_min.clone(),
            p_max: b.p_max.clone(),
            e_min: b.e_min.clone(),
            e_max: b.e_max.clone(),
            e0: spec.e0[n],
            sigma: spec.sigma[n],
        };
        for i in 0..t {
            if bp.p_max[i] < bp.p_min[i] {
                bp.p_max[i] = bp.p_min[i];
            }
            if bp.e_max[i] < bp.e_min[i] {
                bp.e_max[i] = bp.e_min[i];
            }
        }
        batteries.push(bp);
    }
    let mut td_loads = Vec::new();
    for l in &theta.td_loads {
        let mut tl = TdLoadParams {
            p_min: l.p_min.clone(),
            p_max: l.p_max.clone(),
        };
        for i in 0..t {
            if tl.p_max[i] < tl.p_min[i] {
                tl.p_max[i] = tl.p_min[i];
            }
        }
        td_loads.push(tl);
    }
    let fixed_loads = spec
        .fixed_profiles
        .iter()
        .map(|p| FixedLoadParams { profile: p.clone() })
        .collect();
    let m = FlexModel::new(t, spec.dt, batteries, td_loads, fixed_loads);
    m.validate()?;
    Ok(m)
}

fn extract_theta(x: &[f64], lay: &Layout, spec: &StructureSpec) -> ThetaHat {
    let t = lay.t;
    let batteries = (0..spec.n_vb)
        .map(|n| BatteryTheta {
            e_min: (0..t).map(|i| x[lay.th_e_min(n, i)]).collect(),
            e_max: (0..t).map(|i| x[lay.th_e_max(n, i)]).collect(),
            p_min: (0..t).map(|i| x[lay.th_p_min(n, i)]).collect(),
            p_max: (0..t).map(|i| x[lay.th_p_max(n, i)]).collect(),
        })
        .collect();
    let td_loads = (0..spec.n_td)
        .map(|n| TdTheta {
            p_min: (0..t).map(|i| x[lay.th_td_min(n, i)]).collect(),
            p_max: (0..t).map(|i| x[lay.th_td_max(n, i)]).collect(),
        })
        .collect();
    ThetaHat {
        batteries,
        td_loads,
    }
}

/// Audit that no dual or slack variable is clamped by the big-M.
fn audit_big_m(x: &[f64], lay: &Layout, spec: &StructureSpec, kk: usize, big_m: f64) -> bool {
    let margin = big_m * (1.0 - 1e-6);
    for k in 0..kk {
        for n in 0..spec.n_vb {
            for which in 1..=4 {
                for i in 0..lay.t {
                    if x[lay.dual_v(k, n, which, i)] >= margin {
                        return false;
                    }
                }
            }
        }
        for n in 0..spec.n_td {
            for which in 5..=6 {
                for i in 0..lay.t {
                    if x[lay.dual_td(k, n, which, i)] >= margin {
                        return false;
                    }
                }
            }
        }
    }
    true
}

// ---------------------------------------------------------------------------
// Identify
// ---------------------------------------------------------------------------

/// Solve the identification model.
///
/// The optimization norm is l1 (the MILP stays linear); requesting l2 is an
/// input error — use [`evaluate_loss`] to score a region in l2.
pub fn identify(
    ds: &Dataset,
    spec: &StructureSpec,
    norm: Norm,
    budget: &IdentBudget,
) -> Result<IdentResult> {
    if norm == Norm::L2 {
        return Err(Error::Input(
            "the optimization norm is l1; l2 is evaluation-only (evaluate_loss)".into(),
        ));
    }
    if ds.is_empty() {
        return Err(Error::Input("identification needs at least one sample".into()));
    }
    ds.validate()?;
    spec.validate(ds.t)?;

    // Warm start: candidate thetas from the support-matching fit.
    let candidates = if ds.t == 2 && (spec.n_vb + spec.n_td) > 0 {
        fit_support_matching(ds, spec)
    } else {
        Vec::new()
    };

    let mut big_m = initial_big_m(ds);
    let mut escalations = 0u32;
    loop {
        let (milp, lay) = build_milp(ds, spec, big_m);

        let mut hint: Option<(Vec<f64>, f64, ThetaHat)> = None;
        for theta in &candidates {
            if let Some((x, val)) = assemble_incumbent(ds, spec, &lay, theta, &milp) {
                if hint.as_ref().map(|(_, h, _)| val < *h).unwrap_or(true) {
                    hint = Some((x, val, theta.clone()));
                }
            }
        }
        let heuristic_value = hint.as_ref().map(|(_, v, _)| *v);
        let hint_theta = hint.as_ref().map(|(_, _, th)| th.clone());

        let opts = MilpOptions {
            node_budget: budget.node_budget,
            abs_gap: tol::MILP_GAP_TOL,
            incumbent_hint: hint.map(|(x, _, _)| x),
        };
        let (sol, budget_exhausted) = match solve_milp_with(&milp, &opts) {
            Ok(s) => (s, false),
            Err(Error::Budget { bound, .. }) => {
                // Partial result: fall back to the warm-start incumbent and
                // report the remaining bound gap.
                let (theta, value) = match (hint_theta, heuristic_value) {
                    (Some(th), Some(v)) => (th, v),
                    _ => {
                        return Err(Error::Budget {
                            message: "identification node budget exhausted with no incumbent"
                                .into(),
                            incumbent: None,
                            bound,
                        })
                    }
                };
                let model = model_from_theta(&theta, spec, ds.t)?;
                let certificate = if ds.t == 2 {
                    let g = build_geometry(ds)?;
                    let poly = model.aggregate_polytope_2d()?;
                    Some(certify_candidate(CandidateRegion::V(&poly), &g)?)
                } else {
                    None
                };
                let eval_l2 = evaluate_loss(&model, ds, Norm::L2)?;
                return Ok(IdentResult {
                    theta_hat: theta,
                    f_value: value,
                    norm: Norm::L1,
                    eval_l2,
                    certificate,
                    stats: SolverStats {
                        nodes: budget.node_budget,
                        bound,
                        gap: (value - bound).max(0.0),
                        big_m,
                        escalations,
                        big_m_audit_ok: true,
                        heuristic_value,
                        budget_exhausted: true,
                    },
                });
            }
            Err(e) => return Err(e),
        };
        if sol.status == MilpStatus::Infeasible {
            return Err(Error::Internal(
                "identification MILP infeasible; any nonempty structure admits a fit".into(),
            ));
        }

        let audit_ok = audit_big_m(&sol.x, &lay, spec, ds.len(), big_m);
        if !audit_ok && escalations < 3 {
            escalations += 1;
            big_m *= 2.0;
            continue;
        }

        let theta_hat = extract_theta(&sol.x, &lay, spec);
        let model = model_from_theta(&theta_hat, spec, ds.t)?;
        let certificate = if ds.t == 2 {
            let g = build_geometry(ds)?;
            let poly = model.aggregate_polytope_2d()?;
            Some(certify_candidate(CandidateRegion::V(&poly), &g)?)
        } else {
            None
        };
        let eval_l2 = evaluate_loss(&model, ds, Norm::L2)?;

        return Ok(IdentResult {
            theta_hat,
            f_value: sol.value,
            norm: Norm::L1,
            eval_l2,
            certificate,
            stats: SolverStats {
                nodes: sol.nodes,
                bound: sol.bound,
                gap: (sol.value - sol.bound).max(0.0),
                big_m,
                escalations,
                big_m_audit_ok: audit_ok,
                heuristic_value,
                budget_exhausted,
            },
        });
    }
}

/// The two canonical Theorem-2 optima of a (noise-free) dataset: the sample
/// hull as the minimal solution, and `Pi` as the maximal one when bounded.
#[derive(Debug, Clone)]
pub struct CanonicalSolutions {
    pub omega_min: VPolytope,
    pub omega_min_certificate: Certificate,
    pub omega_max: Option<HPolyhedron>,
    pub omega_max_certificate: Option<Certificate>,
}

pub fn canonical_solutions(ds: &Dataset) -> Result<CanonicalSolutions> {
    let g = build_geometry(ds)?;
    let omega_min_certificate = certify_candidate(CandidateRegion::V(&g.conv), &g)?;
    let (omega_max, omega_max_certificate) = if is_bounded(&g.pi)? {
        let cert = certify_candidate(CandidateRegion::H(&g.pi), &g)?;
        (Some(g.pi.clone()), Some(cert))
    } else {
        (None, None)
    };
    Ok(CanonicalSolutions {
        omega_min: g.conv,
        omega_min_certificate,
        omega_max,
        omega_max_certificate,
    })
}

/// Mean per-sample loss of a model on a dataset under the lexicographic
/// response rule: l1 distance or squared l2 distance.
pub fn evaluate_loss(model: &FlexModel, ds: &Dataset, norm: Norm) -> Result<f64> {
    if ds.is_empty() {
        return Err(Error::Input("loss of an empty dataset".into()));
    }
    if ds.t != model.t {
        return Err(Error::Input("model and dataset periods differ".into()));
    }
    let mut total = 0.0;
    for s in &ds.samples {
        let p_hat = model.respond_point(&s.lambda)?;
        let mut acc = 0.0;
        for i in 0..ds.t {
            let d = s.power[i] - p_hat[i];
            acc += match norm {
                Norm::L1 => d.abs(),
                Norm::L2 => d * d,
            };
        }
        total += acc;
    }
    Ok(total / ds.len() as f64)
}

// ---------------------------------------------------------------------------
// Support-matching warm start
// ---------------------------------------------------------------------------

/// One linear support underestimator for a component: by weak duality, any
/// dual-feasible multiplier vector gives `dual_objective(theta) <= support`,
/// and the dual feasible set does not depend on theta, so cuts collected at
/// one iterate stay valid at every other.
#[derive(Debug, Clone)]
struct SupportCut {
    /// Coefficients over theta columns.
    coeffs: Vec<(usize, f64)>,
    /// Constant part of the dual objective.
    constant: f64,
}

/// Support-matching fit: find theta with zero identification loss on
/// noise-free data by requiring every stored response to lie inside the
/// structured region while, for every sample, the summed component support
/// values reach the observed optimal cost.
///
/// The support side is handled Kelley-style: each round solves the
/// penalized fit LP, computes exact component supports at the iterate, and
/// adds dual cuts for samples whose support still falls short.  Returns the
/// iterate trail, most promising first; callers turn each theta into a full
/// MILP incumbent and keep the cheapest.
#[doc(hidden)]
pub fn fit_support_matching(ds: &Dataset, spec: &StructureSpec) -> Vec<ThetaHat> {
    match fit_support_matching_inner(ds, spec) {
        Ok(v) => v,
        Err(e) => {
            if std::env::var("PFLID_DEBUG_FIT").is_ok() {
                eprintln!("fit_support_matching: {e}");
            }
            Vec::new()
        }
    }
}

fn fit_support_matching_inner(ds: &Dataset, spec: &StructureSpec) -> Result<Vec<ThetaHat>> {
    let t = ds.t;
    let lay = Layout::new(t, spec.n_vb, spec.n_td);
    let nadj = spec.n_vb + spec.n_td;
    let fixed_total = spec.fixed_total(t);

    // Unique measured responses (noise-free duplicates are bit-equal).
    let mut uniq: Vec<Vec<f64>> = Vec::new();
    for s in &ds.samples {
        if !uniq.iter().any(|p| p == &s.power) {
            uniq.push(s.power.clone());
        }
    }

    let mut cuts: Vec<Vec<Vec<SupportCut>>> = vec![vec![Vec::new(); nadj]; ds.len()];
    let mut trail: Vec<ThetaHat> = Vec::new();
    let mut best: Option<(f64, usize)> = None; // (violation, trail index)

    for _round in 0..20 {
        let theta = solve_fit_lp(ds, spec, &lay, &cuts, &uniq, &fixed_total)?;
        let theta_hat = extract_theta_slice(&theta, &lay, spec);
        // Exact support verification at the iterate.
        let model = match model_from_theta(&theta_hat, spec, t) {
            Ok(m) => m,
            Err(_) => break,
        };
        let mut worst = 0.0f64;
        let mut new_cuts = 0usize;
        for (k, s) in ds.samples.iter().enumerate() {
            let parts = model.support_decomposition(&s.lambda)?;
            let support: f64 = parts.iter().sum();
            let xi = dot(&s.lambda, &s.power);
            let shortfall = xi - support;
            worst = worst.max(shortfall.abs());
            if shortfall > 1e-10 {
                // Add one dual cut per adjustable component of this sample.
                for n in 0..spec.n_vb {
                    let cut = battery_support_cut(&model.batteries[n], &s.lambda, &lay, spec, n)?;
                    cuts[k][n].push(cut);
                    new_cuts += 1;
                }
                for n in 0..spec.n_td {
                    let cut = td_support_cut(&s.lambda, &lay, n, t);
                    cuts[k][spec.n_vb + n].push(cut);
                    new_cuts += 1;
                }
            }
        }
        trail.push(theta_hat);
        if best.map(|(w, _)| worst < w).unwrap_or(true) {
            best = Some((worst, trail.len() - 1));
        }
        if worst <= 1e-9 {
            break;
        }
        if new_cuts == 0 {
            break;
        }
    }

    // Most promising candidate first.
    if let Some((_, idx)) = best {
        let front = trail.remove(idx);
        trail.insert(0, front);
    }
    Ok(trail)
}

fn extract_theta_slice(theta: &[f64], lay: &Layout, spec: &StructureSpec) -> ThetaHat {
    let t = lay.t;
    ThetaHat {
        batteries: (0..spec.n_vb)
            .map(|n| BatteryTheta {
                e_min: (0..t).map(|i| theta[lay.th_e_min(n, i)]).collect(),
                e_max: (0..t).map(|i| theta[lay.th_e_max(n, i)]).collect(),
                p_min: (0..t).map(|i| theta[lay.th_p_min(n, i)]).collect(),
                p_max: (0..t).map(|i| theta[lay.th_p_max(n, i)]).collect(),
            })
            .collect(),
        td_loads: (0..spec.n_td)
            .map(|n| TdTheta {
                p_min: (0..t).map(|i| theta[lay.th_td_min(n, i)]).collect(),
                p_max: (0..t).map(|i| theta[lay.th_td_max(n, i)]).collect(),
            })
            .collect(),
    }
}

/// Dual cut for one battery under one price: optimal multipliers of the
/// component LP at the current theta, re-expressed over the theta columns.
fn battery_support_cut(
    b: &BatteryParams,
    lambda: &[f64],
    lay: &Layout,
    spec: &StructureSpec,
    n: usize,
) -> Result<SupportCut> {
    let t = lambda.len();
    let duals = battery_duals(b, lambda, t, spec.dt)?;
    let (y1, y2, y3, y4) = (&duals[0], &duals[1], &duals[2], &duals[3]);
    // Dual objective: y1'(e_min - decay) - y2'(e_max - decay)
    //                 + y3' p_min - y4' p_max.
    let mut coeffs = Vec::new();
    let mut constant = 0.0;
    for i in 0..t {
        let decay = b.sigma.powi((i + 1) as i32) * b.e0;
        coeffs.push((lay.th_e_min(n, i), y1[i]));
        coeffs.push((lay.th_e_max(n, i), -y2[i]));
        coeffs.push((lay.th_p_min(n, i), y3[i]));
        coeffs.push((lay.th_p_max(n, i), -y4[i]));
        constant += -(y1[i] - y2[i]) * decay;
    }
    Ok(SupportCut { coeffs, constant })
}

/// Dual cut for a td load: minimal multipliers are the split of the price.
fn td_support_cut(lambda: &[f64], lay: &Layout, n: usize, t: usize) -> SupportCut {
    let mut coeffs = Vec::new();
    for i in 0..t {
        if lambda[i] >= 0.0 {
            coeffs.push((lay.th_td_min(n, i), lambda[i]));
        } else {
            coeffs.push((lay.th_td_max(n, i), lambda[i]));
        }
    }
    SupportCut {
        coeffs,
        constant: 0.0,
    }
}

/// The penalized fit LP: minimize total region width plus a large penalty
/// on support violations, subject to
///   (a) every unique response admits a feasible component split, and
///   (b) for each sample, the summed per-component support bounds (from
///       the accumulated dual cuts) reach the observed optimal cost, up to
///       the penalized violation slack.
fn solve_fit_lp(
    ds: &Dataset,
    spec: &StructureSpec,
    lay: &Layout,
    cuts: &[Vec<Vec<SupportCut>>],
    uniq: &[Vec<f64>],
    fixed_total: &[f64],
) -> Result<Vec<f64>> {
    let t = ds.t;
    let nadj = spec.n_vb + spec.n_td;
    let n_splits = uniq.len() * nadj * t;
    let n_s = ds.len() * nadj;
    let n_viol = ds.len();
    let ncols = lay.theta_len + n_splits + n_s + n_viol;
    let split_col = |r: usize, c: usize, i: usize| lay.theta_len + (r * nadj + c) * t + i;
    let s_col = |k: usize, c: usize| lay.theta_len + n_splits + k * nadj + c;
    let viol_col = |k: usize| lay.theta_len + n_splits + n_s + k;

    // Penalty dominating any width gain.
    let scale = ds
        .samples
        .iter()
        .flat_map(|s| s.power.iter().chain(s.lambda.iter()))
        .fold(1.0f64, |m, &x| m.max(x.abs()));
    let penalty = 1e4 * scale;

    let mut cost = vec![0.0; ncols];
    for n in 0..spec.n_vb {
        for i in 0..t {
            cost[lay.th_e_max(n, i)] += 1.0;
            cost[lay.th_e_min(n, i)] -= 1.0;
            cost[lay.th_p_max(n, i)] += 1.0;
            cost[lay.th_p_min(n, i)] -= 1.0;
        }
    }
    for n in 0..spec.n_td {
        for i in 0..t {
            cost[lay.th_td_max(n, i)] += 1.0;
            cost[lay.th_td_min(n, i)] -= 1.0;
        }
    }
    for k in 0..ds.len() {
        cost[viol_col(k)] = penalty;
    }

    let mut bounds = vec![(f64::NEG_INFINITY, f64::INFINITY); ncols];
    for k in 0..ds.len() {
        bounds[viol_col(k)] = (0.0, f64::INFINITY);
    }

    let mut lp = LpProblem {
        sense: Sense::Min,
        cost,
        constraints: Vec::new(),
        bounds,
    };
    let mut row = |coeffs: Vec<(usize, f64)>, rel: Relation, rhs: f64, lp: &mut LpProblem| {
        let mut c = vec![0.0; ncols];
        for (j, v) in coeffs {
            c[j] += v;
        }
        lp.add_constraint(c, rel, rhs);
    };

    // Covering rows per unique response.
    for (r, p) in uniq.iter().enumerate() {
        for i in 0..t {
            let cs: Vec<(usize, f64)> = (0..nadj).map(|c| (split_col(r, c, i), 1.0)).collect();
            row(cs, Relation::Eq, p[i] - fixed_total[i], &mut lp);
        }
        for n in 0..spec.n_vb {
            let sg = spec.sigma[n];
            let e0 = spec.e0[n];
            for i in 0..t {
                let coeffs = energy_row_coeffs(sg, spec.dt, i, t);
                let decay = sg.powi((i + 1) as i32) * e0;
                let mut lo: Vec<(usize, f64)> = coeffs
                    .iter()
                    .enumerate()
                    .take(i + 1)
                    .map(|(j, &c)| (split_col(r, n, j), c))
                    .collect();
                lo.push((lay.th_e_min(n, i), -1.0));
                row(lo, Relation::Ge, -decay, &mut lp);
                let mut hi: Vec<(usize, f64)> = coeffs
                    .iter()
                    .enumerate()
                    .take(i + 1)
                    .map(|(j, &c)| (split_col(r, n, j), c))
                    .collect();
                hi.push((lay.th_e_max(n, i), -1.0));
                row(hi, Relation::Le, -decay, &mut lp);
                row(
                    vec![(split_col(r, n, i), 1.0), (lay.th_p_min(n, i), -1.0)],
                    Relation::Ge,
                    0.0,
                    &mut lp,
                );
                row(
                    vec![(split_col(r, n, i), 1.0), (lay.th_p_max(n, i), -1.0)],
                    Relation::Le,
                    0.0,
                    &mut lp,
                );
            }
        }
        for n in 0..spec.n_td {
            let c = spec.n_vb + n;
            for i in 0..t {
                row(
                    vec![(split_col(r, c, i), 1.0), (lay.th_td_min(n, i), -1.0)],
                    Relation::Ge,
                    0.0,
                    &mut lp,
                );
                row(
                    vec![(split_col(r, c, i), 1.0), (lay.th_td_max(n, i), -1.0)],
                    Relation::Le,
                    0.0,
                    &mut lp,
                );
            }
        }
    }

    // Support rows: dual cuts cap each s from above; the per-sample sum
    // (plus violation slack) must reach the observed cost.
    for (k, s) in ds.samples.iter().enumerate() {
        for c in 0..nadj {
            for cut in &cuts[k][c] {
                let mut cs = cut.coeffs.clone();
                cs.push((s_col(k, c), -1.0));
                row(cs, Relation::Ge, -cut.constant, &mut lp);
            }
            if cuts[k][c].is_empty() {
                // No certificate yet: pin s to zero so the violation slack
                // carries the requirement into the penalty.
                row(vec![(s_col(k, c), 1.0)], Relation::Eq, 0.0, &mut lp);
            }
        }
        let xi = dot(&s.lambda, &s.power);
        let mut cs: Vec<(usize, f64)> = (0..nadj).map(|c| (s_col(k, c), 1.0)).collect();
        cs.push((viol_col(k), 1.0));
        row(cs, Relation::Ge, xi - dot(&s.lambda, fixed_total), &mut lp);
    }

    let sol = solve_lp(&lp)?;
    if sol.status != LpStatus::Optimal {
        return Err(Error::Infeasible("support-matching fit LP".into()));
    }
    Ok(sol.x[..lay.theta_len].to_vec())
}

/// Turn a theta candidate into a fully feasible MILP point: responses via
/// per-sample closest-optimal LPs, duals from component solves, binaries
/// from complementarity, and the l1 auxiliaries from the residuals.
fn assemble_incumbent(
    ds: &Dataset,
    spec: &StructureSpec,
    lay: &Layout,
    theta: &ThetaHat,
    milp: &MilpProblem,
) -> Option<(Vec<f64>, f64)> {
    let t = ds.t;
    let model = model_from_theta(theta, spec, t).ok()?;
    let mut x = vec![0.0; lay.total(ds.len())];

    // Theta columns (use the clamped values actually inside the model).
    for (n, b) in model.batteries.iter().enumerate() {
        for i in 0..t {
            x[lay.th_e_min(n, i)] = b.e_min[i];
            x[lay.th_e_max(n, i)] = b.e_max[i];
            x[lay.th_p_min(n, i)] = b.p_min[i];
            x[lay.th_p_max(n, i)] = b.p_max[i];
        }
    }
    for (n, l) in model.td_loads.iter().enumerate() {
        for i in 0..t {
            x[lay.th_td_min(n, i)] = l.p_min[i];
            x[lay.th_td_max(n, i)] = l.p_max[i];
        }
    }

    let mut objective = 0.0;
    for (k, s) in ds.samples.iter().enumerate() {
        let (split, p_hat) = closest_optimal_response(&model, &s.lambda, &s.power).ok()?;
        for i in 0..t {
            x[lay.p_agg(k, i)] = p_hat[i];
            x[lay.omega(k, i)] = -s.lambda[i];
            let u = (s.power[i] - p_hat[i]).abs();
            x[lay.u(k, i)] = u;
            objective += u / ds.len() as f64;
        }
        for (n, b) in model.batteries.iter().enumerate() {
            let part = &split[n * t..(n + 1) * t];
            for i in 0..t {
                x[lay.p_vb(k, n, i)] = part[i];
            }
            let duals = battery_duals(b, &s.lambda, t, spec.dt).ok()?;
            for which in 1..=4 {
                for i in 0..t {
                    let v = duals[which - 1][i].max(0.0);
                    let v = if v > 1e-9 { v } else { 0.0 };
                    x[lay.dual_v(k, n, which, i)] = v;
                    x[lay.bin_vb(k, n, which, i)] = if v > 0.0 { 1.0 } else { 0.0 };
                }
            }
        }
        for (n, _l) in model.td_loads.iter().enumerate() {
            let comp = spec.n_vb + n;
            let part = &split[comp * t..(comp + 1) * t];
            for i in 0..t {
                x[lay.p_td(k, n, i)] = part[i];
                // Minimal multipliers: v5 - v6 = lambda with v >= 0.
                let (v5, v6) = if s.lambda[i] >= 0.0 {
                    (s.lambda[i], 0.0)
                } else {
                    (0.0, -s.lambda[i])
                };
                x[lay.dual_td(k, n, 5, i)] = v5;
                x[lay.dual_td(k, n, 6, i)] = v6;
                x[lay.bin_td(k, n, 5, i)] = if v5 > 1e-9 { 1.0 } else { 0.0 };
                x[lay.bin_td(k, n, 6, i)] = if v6 > 1e-9 { 1.0 } else { 0.0 };
            }
        }
    }

    if crate::solver::is_milp_feasible(milp, &x) {
        Some((x, objective))
    } else {
        None
    }
}

/// Among the price-optimal responses of the model, the stacked split whose
/// aggregate is l1-closest to the measured power.
fn closest_optimal_response(
    model: &FlexModel,
    lambda: &[f64],
    measured: &[f64],
) -> Result<(Vec<f64>, Vec<f64>)> {
    let region = model.assemble_region()?;
    let t = model.t;
    let nc = region.num_components;
    if nc == 0 {
        return Ok((Vec::new(), region.fixed_total.clone()));
    }
    let n = nc * t;

    // Stage 1: optimal value in the normalized direction.
    let scale = lambda.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
    let lam: Vec<f64> = if scale > 0.0 {
        lambda.iter().map(|v| v / scale).collect()
    } else {
        lambda.to_vec()
    };
    let mut lp1 = LpProblem {
        sense: Sense::Min,
        cost: vec![0.0; n],
        constraints: Vec::new(),
        bounds: vec![(f64::NEG_INFINITY, f64::INFINITY); n],
    };
    for (row, &bi) in region.h.a.iter().zip(&region.h.b) {
        lp1.add_constraint(row.clone(), Relation::Ge, bi);
    }
    for c in 0..nc {
        for i in 0..t {
            lp1.cost[c * t + i] = lam[i];
        }
    }
    let s1 = solve_lp(&lp1)?;
    if s1.status != LpStatus::Optimal {
        return Err(Error::Internal("response stage-1 LP unsolvable".into()));
    }

    // Stage 2: among optima, minimize l1 distance of the aggregate to the
    // measurement.
    let n2 = n + t;
    let mut lp2 = LpProblem {
        sense: Sense::Min,
        cost: {
            let mut c = vec![0.0; n2];
            for i in 0..t {
                c[n + i] = 1.0;
            }
            c
        },
        constraints: Vec::new(),
        bounds: {
            let mut b = vec![(f64::NEG_INFINITY, f64::INFINITY); n];
            b.extend(vec![(0.0, f64::INFINITY); t]);
            b
        },
    };
    for (row, &bi) in region.h.a.iter().zip(&region.h.b) {
        let mut c = row.clone();
        c.resize(n2, 0.0);
        lp2.add_constraint(c, Relation::Ge, bi);
    }
    {
        let mut c = vec![0.0; n2];
        for ci in 0..nc {
            for i in 0..t {
                c[ci * t + i] = lam[i];
            }
        }
        lp2.add_constraint(c, Relation::Le, s1.value + 1e-12 * (1.0 + s1.value.abs()));
    }
    for i in 0..t {
        // u_i >= measured_i - fixed_i - sum_c x_{c,i} and the negation.
        let target = measured[i] - region.fixed_total[i];
        let mut plus = vec![0.0; n2];
        let mut minus = vec![0.0; n2];
        for c in 0..nc {
            plus[c * t + i] = 1.0;
            minus[c * t + i] = -1.0;
        }
        plus[n + i] = 1.0;
        minus[n + i] = 1.0;
        lp2.add_constraint(plus, Relation::Ge, target);
        lp2.add_constraint(minus, Relation::Ge, -target);
    }
    let s2 = solve_lp(&lp2)?;
    if s2.status != LpStatus::Optimal {
        return Err(Error::Internal("response stage-2 LP unsolvable".into()));
    }
    let split = s2.x[..n].to_vec();
    let p_hat = region.aggregate(&split);
    Ok((split, p_hat))
}

/// Optimal duals of one battery's response LP, as the four nonnegative
/// multiplier families (energy lo, energy hi, power lo, power hi).
fn battery_duals(
    b: &BatteryParams,
    lambda: &[f64],
    t: usize,
    dt: f64,
) -> Result<[Vec<f64>; 4]> {
    let mut lp = LpProblem {
        sense: Sense::Min,
        cost: lambda.to_vec(),
        constraints: Vec::new(),
        bounds: vec![(f64::NEG_INFINITY, f64::INFINITY); t],
    };
    for i in 0..t {
        let coeffs = energy_row_coeffs(b.sigma, dt, i, t);
        let decay = b.sigma.powi((i + 1) as i32) * b.e0;
        lp.add_constraint(coeffs.clone(), Relation::Ge, b.e_min[i] - decay);
        lp.add_constraint(coeffs, Relation::Le, b.e_max[i] - decay);
    }
    for i in 0..t {
        let mut r = vec![0.0; t];
        r[i] = 1.0;
        lp.add_constraint(r.clone(), Relation::Ge, b.p_min[i]);
        lp.add_constraint(r, Relation::Le, b.p_max[i]);
    }
    let sol = solve_lp(&lp)?;
    if sol.status != LpStatus::Optimal {
        return Err(Error::Internal("battery dual LP unsolvable".into()));
    }
    let mut v = [
        vec![0.0; t],
        vec![0.0; t],
        vec![0.0; t],
        vec![0.0; t],
    ];
    for i in 0..t {
        v[0][i] = sol.duals[2 * i];       // energy lower (Ge, >= 0)
        v[1][i] = -sol.duals[2 * i + 1];  // energy upper (Le, <= 0)
        v[2][i] = sol.duals[2 * t + 2 * i];
        v[3][i] = -sol.duals[2 * t + 2 * i + 1];
    }
    Ok(v)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{generate, sample_prices, NoiseSpec, PriceDist};
    use crate::flex_model::{BatteryParams, FixedLoadParams, TdLoadParams};

    fn true_model() -> FlexModel {
        FlexModel::new(
            2,
            1.0,
            vec![BatteryParams {
                p_min: vec![-0.8, -0.8],
                p_max: vec![0.8, 0.8],
                e_min: vec![-0.5, -0.5],
                e_max: vec![0.5, 0.5],
                e0: 0.0,
                sigma: 0.95,
            }],
            vec![TdLoadParams {
                p_min: vec![-0.4, -0.6],
                p_max: vec![0.6, 0.4],
            }],
            vec![FixedLoadParams {
                profile: vec![1.0, 1.2],
            }],
        )
    }

    fn true_spec() -> StructureSpec {
        StructureSpec {
            n_vb: 1,
            n_td: 1,
            n_fix: 1,
            sigma: vec![0.95],
            e0: vec![0.0],
            dt: 1.0,
            fixed_profiles: vec![vec![1.0, 1.2]],
        }
    }

    #[test]
    fn noise_free_identification_reaches_zero() {
        let m = true_model();
        let prices = sample_prices(12, 2, 77, PriceDist::UnitSphere).unwrap();
        let ds = generate(&m, &prices, &NoiseSpec::None, 77).unwrap();
        let res = identify(&ds, &true_spec(), Norm::L1, &IdentBudget::default()).unwrap();
        assert!(res.f_value <= 1e-6, "f = {}", res.f_value);
        let cert = res.certificate.unwrap();
        assert!(cert.is_optimum, "{cert:?}");
        assert!(res.eval_l2 <= 1e-9, "l2 = {}", res.eval_l2);
    }

    #[test]
    fn fixed_load_dataset_identifies_singleton() {
        let m = FlexModel::new(
            2,
            1.0,
            vec![],
            vec![],
            vec![FixedLoadParams {
                profile: vec![2.0, 3.0],
            }],
        );
        let prices = sample_prices(5, 2, 3, PriceDist::UnitSphere).unwrap();
        let ds = generate(&m, &prices, &NoiseSpec::None, 3).unwrap();
        let spec = StructureSpec {
            n_vb: 0,
            n_td: 0,
            n_fix: 1,
            sigma: vec![],
            e0: vec![],
            dt: 1.0,
            fixed_profiles: vec![vec![2.0, 3.0]],
        };
        let res = identify(&ds, &spec, Norm::L1, &IdentBudget::default()).unwrap();
        assert!(res.f_value <= 1e-9);
        assert!(res.certificate.unwrap().is_optimum);
    }

    #[test]
    fn tiny_noisy_identification_beats_grid_search() {
        // K = 3 noisy samples, one-battery structure.  The MILP optimum must
        // be at least as good as a coarse symmetric grid over theta.
        let truth = FlexModel::new(
            2,
            1.0,
            vec![BatteryParams {
                p_min: vec![-0.6, -0.6],
                p_max: vec![0.6, 0.6],
                e_min: vec![-0.4, -0.4],
                e_max: vec![0.4, 0.4],
                e0: 0.0,
                sigma: 1.0,
            }],
            vec![],
            vec![],
        );
        let prices = sample_prices(3, 2, 5, PriceDist::UnitSphere).unwrap();
        let ds = generate(&truth, &prices, &NoiseSpec::additive_diag(0.05, 2), 5).unwrap();
        let spec = StructureSpec {
            n_vb: 1,
            n_td: 0,
            n_fix: 0,
            sigma: vec![1.0],
            e0: vec![0.0],
            dt: 1.0,
            fixed_profiles: vec![],
        };
        let res = identify(&ds, &spec, Norm::L1, &IdentBudget::default()).unwrap();

        // Grid oracle: symmetric boxes, loss through the forward response.
        let mut grid_best = f64::INFINITY;
        for ai in 1..=6 {
            for bi in 1..=6 {
                let a = 0.15 * ai as f64;
                let b = 0.15 * bi as f64;
                let cand = FlexModel::new(
                    2,
                    1.0,
                    vec![BatteryParams {
                        p_min: vec![-a, -a],
                        p_max: vec![a, a],
                        e_min: vec![-b, -b],
                        e_max: vec![b, b],
                        e0: 0.0,
                        sigma: 1.0,
                    }],
                    vec![],
                    vec![],
                );
                if let Ok(loss) = evaluate_loss(&cand, &ds, Norm::L1) {
                    grid_best = grid_best.min(loss);
                }
            }
        }
        assert!(
            res.f_value <= grid_best + 1e-9,
            "milp {} vs grid {}",
            res.f_value,
            grid_best
        );
        assert!(
            grid_best - res.f_value <= 0.3,
            "grid resolution envelope: milp {} vs grid {}",
            res.f_value,
            grid_best
        );
        assert!(res.f_value > 0.0);
    }

    #[test]
    fn canonical_solutions_certified() {
        let m = true_model();
        // Axis prices bound Pi.
        let mut prices = vec![
            vec![1.0, 0.0],
            vec![0.0, 1.0],
            vec![-1.0, 0.0],
            vec![0.0, -1.0],
        ];
        prices.extend(sample_prices(8, 2, 1, PriceDist::UnitSphere).unwrap());
        let ds = generate(&m, &prices, &NoiseSpec::None, 1).unwrap();
        let cs = canonical_solutions(&ds).unwrap();
        assert!(cs.omega_min_certificate.is_optimum);
        assert!(cs.omega_max.is_some());
        assert!(cs.omega_max_certificate.unwrap().is_optimum);
    }

    #[test]
    fn canonical_single_sample_is_a_point() {
        let m = true_model();
        let prices = sample_prices(1, 2, 9, PriceDist::UnitSphere).unwrap();
        let ds = generate(&m, &prices, &NoiseSpec::None, 9).unwrap();
        let cs = canonical_solutions(&ds).unwrap();
        assert_eq!(cs.omega_min.num_vertices(), 1);
        assert!(cs.omega_min_certificate.is_optimum);
        assert!(cs.omega_max.is_none()); // one halfspace is unbounded
    }

    #[test]
    fn loss_zero_at_truth_noise_free() {
        let m = true_model();
        let prices = sample_prices(15, 2, 2, PriceDist::UnitSphere).unwrap();
        let ds = generate(&m, &prices, &NoiseSpec::None, 2).unwrap();
        assert!(evaluate_loss(&m, &ds, Norm::L1).unwrap() <= 1e-9);
        assert!(evaluate_loss(&m, &ds, Norm::L2).unwrap() <= 1e-9);
    }

    #[test]
    fn loss_approaches_t_sigma_squared() {
        let m = true_model();
        let sigma = 0.05;
        let prices = sample_prices(400, 2, 6, PriceDist::UnitSphere).unwrap();
        let ds = generate(&m, &prices, &NoiseSpec::additive_diag(sigma, 2), 6).unwrap();
        let loss = evaluate_loss(&m, &ds, Norm::L2).unwrap();
        let expect = 2.0 * sigma * sigma;
        assert!(
            (loss - expect).abs() <= 0.35 * expect,
            "loss {loss} vs T sigma^2 = {expect}"
        );
    }

    #[test]
    fn wrong_model_has_positive_loss() {
        let m = true_model();
        let prices = sample_prices(10, 2, 4, PriceDist::UnitSphere).unwrap();
        let ds = generate(&m, &prices, &NoiseSpec::None, 4).unwrap();
        // A model whose region misses sample points entirely.
        let wrong = FlexModel::new(
            2,
            1.0,
            vec![],
            vec![],
            vec![FixedLoadParams {
                profile: vec![0.0, 0.0],
            }],
        );
        assert!(evaluate_loss(&wrong, &ds, Norm::L1).unwrap() > 0.1);
    }

    #[test]
    fn adding_a_battery_never_hurts() {
        let m = true_model();
        let prices = sample_prices(8, 2, 12, PriceDist::UnitSphere).unwrap();
        let ds = generate(&m, &prices, &NoiseSpec::None, 12).unwrap();
        let spec1 = true_spec();
        let mut spec2 = true_spec();
        spec2.n_vb = 2;
        spec2.sigma.push(0.9);
        spec2.e0.push(0.0);
        let r1 = identify(&ds, &spec1, Norm::L1, &IdentBudget::default()).unwrap();
        let r2 = identify(&ds, &spec2, Norm::L1, &IdentBudget::default()).unwrap();
        assert!(r2.f_value <= r1.f_value + 1e-7);
    }

    #[test]
    fn l2_optimization_rejected() {
        let m = true_model();
        let prices = sample_prices(3, 2, 1, PriceDist::UnitSphere).unwrap();
        let ds = generate(&m, &prices, &NoiseSpec::None, 1).unwrap();
        assert!(matches!(
            identify(&ds, &true_spec(), Norm::L2, &IdentBudget::default()),
            Err(Error::Input(_))
        ));
    }
}
