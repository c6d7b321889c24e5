//! Probing-price design: close the gap between the sample hull and `Pi`.
//!
//! Each round targets a vertex of `Pi` that is not yet a hull member and
//! designs a price making that vertex the unique minimizer over `Pi`: the
//! price must have strictly positive inner product with every edge
//! direction leaving the vertex.  Querying the load then either confirms
//! the vertex (the response equals it, so the hull grows) or refutes it
//! (the new optimality row cuts the vertex out of `Pi`).  Either way the
//! undetermined region shrinks, and the loop stops when every `Pi` vertex
//! is a hull member.

use crate::dataset::{Dataset, NoiseSpec, Sample};
use crate::error::{Error, Result};
use crate::flex_model::FlexModel;
use crate::identifiability::{build_geometry, IdentGeometry};
use crate::polyhedra::{
    is_bounded, l1_distance_to_vpolytope, polygon_area, recession_direction, solve_chebyshev_cone,
    vertex_enumerate_2d, vpolytope_membership, VPolytope,
};
use crate::tol;
use serde::{Deserialize, Serialize};

/// Anything that answers price queries like the real load.
pub trait ProbeOracle {
    fn respond_to(&self, lambda: &[f64]) -> Result<Vec<f64>>;
    fn periods(&self) -> usize;
}

impl ProbeOracle for FlexModel {
    fn respond_to(&self, lambda: &[f64]) -> Result<Vec<f64>> {
        Ok(self.respond(lambda)?.p_star)
    }
    fn periods(&self) -> usize {
        self.t
    }
}

/// A polytope acting as the ground-truth load: the response is the
/// lexicographically smallest vertex among the price minimizers.
impl ProbeOracle for VPolytope {
    fn respond_to(&self, lambda: &[f64]) -> Result<Vec<f64>> {
        if lambda.len() != self.dim() {
            return Err(Error::Input("price dimension mismatch".into()));
        }
        let vals: Vec<f64> = self
            .vertices
            .iter()
            .map(|v| v.iter().zip(lambda).map(|(a, b)| a * b).sum())
            .collect();
        let best = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        let scale = 1.0 + best.abs();
        let mut pick: Option<&Vec<f64>> = None;
        for (v, &val) in self.vertices.iter().zip(&vals) {
            if val <= best + 1e-12 * scale {
                let replace = match pick {
                    None => true,
                    Some(cur) => lex_less(v, cur),
                };
                if replace {
                    pick = Some(v);
                }
            }
        }
        Ok(pick.expect("nonempty polytope").clone())
    }
    fn periods(&self) -> usize {
        self.dim()
    }
}

fn lex_less(a: &[f64], b: &[f64]) -> bool {
    for (x, y) in a.iter().zip(b) {
        if x < y {
            return true;
        }
        if x > y {
            return false;
        }
    }
    false
}

/// A `Pi` vertex outside the hull, with its polygon neighbors.
#[derive(Debug, Clone)]
pub struct ProbeTarget {
    pub vertex: Vec<f64>,
    pub neighbors: Vec<Vec<f64>>,
    /// `neighbor - vertex` for each neighbor.
    pub deltas: Vec<Vec<f64>>,
    /// Probe directions to try first: inward normals of the hull edges
    /// nearest the vertex.  A probe along an edge normal reproduces that
    /// edge's supporting line exactly, so the whole sliver of `Pi` beyond
    /// it falls in one cut; generic directions only shave the sliver.
    pub preferred: Vec<Vec<f64>>,
}

/// What one probe established.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeOutcome {
    /// The response reproduced the vertex: it joins the hull.
    VertexConfirmed,
    /// The response differed: the new optimality row excludes the vertex.
    VertexCut,
}

/// Final status of the probing loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeStatus {
    Identified,
    BudgetExhausted,
}

/// One row of the probe trace file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceEntry {
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target: Option<Vec<f64>>,
    pub lambda: Vec<f64>,
    pub response: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub outcome: Option<ProbeOutcome>,
    /// Hull area after this step.
    pub conv_area: f64,
    /// Number of `Pi` vertices after this step (when bounded).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pi_vertices: Option<usize>,
}

/// Full result of the probing loop.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProbeTrace {
    pub schema_version: u32,
    pub status: ProbeStatus,
    pub probes_used: usize,
    pub entries: Vec<TraceEntry>,
}

/// Vertices of `Pi` that fail hull membership, each with its adjacency.
///
/// Requires `T = 2` and a bounded `Pi`; an unbounded `Pi` yields an error
/// naming a recession direction (callers bootstrap with axis probes).
pub fn undetermined_vertices(g: &IdentGeometry) -> Result<Vec<ProbeTarget>> {
    if g.t != 2 {
        return Err(Error::Input("probing requires T = 2".into()));
    }
    if !is_bounded(&g.pi)? {
        let dir = recession_direction(&g.pi)?
            .map(|d| format!("{d:?}"))
            .unwrap_or_else(|| "unknown".into());
        return Err(Error::Unbounded(format!(
            "Pi is unbounded (recession direction {dir}); add bounding probes first"
        )));
    }
    let verts = vertex_enumerate_2d(&g.pi)?;
    let n = verts.len();
    let mut out = Vec::new();
    for (i, v) in verts.iter().enumerate() {
        let (inside, _) = vpolytope_membership(v, &g.conv)?;
        if inside {
            continue;
        }
        let mut neighbors = Vec::new();
        if n > 1 {
            neighbors.push(verts[(i + n - 1) % n].clone());
            if n > 2 {
                neighbors.push(verts[(i + 1) % n].clone());
            }
        }
        let deltas = neighbors
            .iter()
            .map(|q| vec![q[0] - v[0], q[1] - v[1]])
            .collect();
        out.push(ProbeTarget {
            vertex: v.clone(),
            neighbors,
            deltas,
            preferred: hull_edge_normals_near(v, &g.conv),
        });
    }
    Ok(out)
}

/// Inward normals of the hull edges, ordered by the edge line's distance
/// to the point (nearest first, three at most).
fn hull_edge_normals_near(p: &[f64], conv: &VPolytope) -> Vec<Vec<f64>> {
    let verts = &conv.vertices;
    let n = verts.len();
    if n < 2 {
        return Vec::new();
    }
    let mut edges: Vec<(f64, Vec<f64>)> = Vec::new();
    let count = if n == 2 { 1 } else { n };
    for i in 0..count {
        let a = &verts[i];
        let b = &verts[(i + 1) % n];
        let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
        let len = (dx * dx + dy * dy).sqrt();
        if len < 1e-12 {
            continue;
        }
        // CCW interior lies left of the edge: (-dy, dx) points inward.
        let nrm = [-dy / len, dx / len];
        let dist = (nrm[0] * (p[0] - a[0]) + nrm[1] * (p[1] - a[1])).abs();
        edges.push((dist, vec![nrm[0], nrm[1]]));
    }
    edges.sort_by(|x, y| x.0.total_cmp(&y.0));
    edges.into_iter().take(3).map(|(_, nrm)| nrm).collect()
}

/// Multiplier applied to emitted probing prices.  Probing drives `Pi`
/// vertices onto the hull; a cut's row violation at the target scales
/// linearly with the price, so emitting large prices keeps late, shallow
/// cuts decisive against the `feas_tol` row check.  The response itself is
/// scale-invariant.
const PROBE_PRICE_SCALE: f64 = 1e4;

/// Design a probing price for a target vertex: strictly positive inner
/// product with every unit edge delta, so the vertex is the unique
/// minimizer over `Pi`.
///
/// The (scaled) sum of unit deltas works whenever the vertex cone is
/// pointed; if that fails numerically, fall back to the Chebyshev center of
/// the dual cone.  Degenerate targets (opposite collinear neighbors) are
/// refused.
pub fn design_probe(target: &ProbeTarget) -> Result<Vec<f64>> {
    if target.deltas.len() < 2 {
        return Err(Error::Input(
            "target needs two neighbors to pin a pointed cone".into(),
        ));
    }
    let unit: Vec<Vec<f64>> = target
        .deltas
        .iter()
        .map(|d| {
            let n = (d[0] * d[0] + d[1] * d[1]).sqrt();
            vec![d[0] / n, d[1] / n]
        })
        .collect();
    let mut lam = vec![0.0; 2];
    for u in &unit {
        lam[0] += u[0];
        lam[1] += u[1];
    }
    let margin_of = |l: &[f64]| {
        unit.iter()
            .enumerate()
            .map(|(s, u)| (s, l[0] * u[0] + l[1] * u[1]))
            .fold((usize::MAX, f64::INFINITY), |acc, (s, m)| {
                if m < acc.1 {
                    (s, m)
                } else {
                    acc
                }
            })
    };
    // Preferred directions (hull edge normals) close whole slivers at once;
    // take the first one that clears the strict margin.
    for pref in &target.preferred {
        let (_, m) = margin_of(pref);
        if m > tol::STRICT_TOL {
            return Ok(vec![
                pref[0] * PROBE_PRICE_SCALE,
                pref[1] * PROBE_PRICE_SCALE,
            ]);
        }
    }
    let (_, margin) = margin_of(&lam);
    if margin > tol::STRICT_TOL {
        return Ok(vec![lam[0] * PROBE_PRICE_SCALE, lam[1] * PROBE_PRICE_SCALE]);
    }
    // Chebyshev-center fallback on the dual cone.
    if let Some(l) = solve_chebyshev_cone(&unit)? {
        let (worst, m) = margin_of(&l);
        if m > tol::STRICT_TOL {
            return Ok(vec![l[0] * PROBE_PRICE_SCALE, l[1] * PROBE_PRICE_SCALE]);
        }
        return Err(Error::Input(format!(
            "no strictly valid probing price: neighbor {worst} blocks the cone (margin {m:.2e})"
        )));
    }
    let (worst, m) = margin_of(&lam);
    Err(Error::Input(format!(
        "no strictly valid probing price: neighbor {worst} blocks the cone (margin {m:.2e})"
    )))
}

/// Execute one probe: query the oracle, append the pair, and classify the
/// outcome.  On a cut the new optimality row provably excludes the target.
pub fn probe_step(
    ds: &Dataset,
    oracle: &dyn ProbeOracle,
    target: &ProbeTarget,
) -> Result<(Dataset, ProbeOutcome, Vec<f64>, Vec<f64>)> {
    let lam = design_probe(target)?;
    let resp = oracle.respond_to(&lam)?;
    let mut out = ds.clone();
    out.samples.push(Sample {
        lambda: lam.clone(),
        power: resp.clone(),
    });
    let dist = target
        .vertex
        .iter()
        .zip(&resp)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    if dist <= 1e-6 {
        return Ok((out, ProbeOutcome::VertexConfirmed, lam, resp));
    }
    // The refutation inequality (the new row excludes the target).
    let lv: f64 = lam.iter().zip(&target.vertex).map(|(a, b)| a * b).sum();
    let lr: f64 = lam.iter().zip(&resp).map(|(a, b)| a * b).sum();
    if lv >= lr - 1e-9 {
        return Err(Error::Internal(format!(
            "probe response does not cut the target: lambda.vertex {lv} vs lambda.response {lr}"
        )));
    }
    Ok((out, ProbeOutcome::VertexCut, lam, resp))
}

/// Iterate probing until the undetermined region is empty or the budget
/// runs out.  An unbounded initial `Pi` is first bounded with the 2T axis
/// probes (valid queries in their own right).
pub fn probe_until_identified(
    ds: &Dataset,
    oracle: &dyn ProbeOracle,
    budget: usize,
) -> Result<(Dataset, ProbeStatus, ProbeTrace)> {
    if ds.t != 2 {
        return Err(Error::Input("probing requires T = 2".into()));
    }
    let mut cur = ds.clone();
    let mut entries: Vec<TraceEntry> = Vec::new();
    let mut probes_used = 0usize;

    // Bootstrap: bound Pi with axis probes when needed.
    let g0 = build_geometry(&cur)?;
    if !is_bounded(&g0.pi)? {
        for dir in [[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]] {
            let resp = oracle.respond_to(&dir)?;
            cur.samples.push(Sample {
                lambda: dir.to_vec(),
                power: resp.clone(),
            });
            let g = build_geometry(&cur)?;
            entries.push(TraceEntry {
                kind: "bootstrap".into(),
                target: None,
                lambda: dir.to_vec(),
                response: resp,
                outcome: None,
                conv_area: polygon_area(&g.conv.vertices),
                pi_vertices: None,
            });
        }
    }

    loop {
        let g = build_geometry(&cur)?;
        let targets = undetermined_vertices(&g)?;
        if targets.is_empty() {
            return Ok((
                cur,
                ProbeStatus::Identified,
                ProbeTrace {
                    schema_version: 1,
                    status: ProbeStatus::Identified,
                    probes_used,
                    entries,
                },
            ));
        }
        if probes_used >= budget {
            return Ok((
                cur,
                ProbeStatus::BudgetExhausted,
                ProbeTrace {
                    schema_version: 1,
                    status: ProbeStatus::BudgetExhausted,
                    probes_used,
                    entries,
                },
            ));
        }
        // Worst vertex first: largest hull distance, lexicographic ties.
        let mut pick = 0usize;
        let mut pick_dist = f64::NEG_INFINITY;
        for (i, t) in targets.iter().enumerate() {
            let d = l1_distance_to_vpolytope(&t.vertex, &g.conv)?;
            let better = d > pick_dist + 1e-12
                || ((d - pick_dist).abs() <= 1e-12 && lex_less(&t.vertex, &targets[pick].vertex));
            if better {
                pick = i;
                pick_dist = d;
            }
        }
        let target = &targets[pick];
        let (next, outcome, lam, resp) = probe_step(&cur, oracle, target)?;
        cur = next;
        probes_used += 1;
        let g_after = build_geometry(&cur)?;
        let pi_vertices = vertex_enumerate_2d(&g_after.pi).map(|v| v.len()).ok();
        entries.push(TraceEntry {
            kind: "probe".into(),
            target: Some(target.vertex.clone()),
            lambda: lam,
            response: resp,
            outcome: Some(outcome),
            conv_area: polygon_area(&g_after.conv.vertices),
            pi_vertices,
        });
    }
}

/// Dataset produced by querying an oracle on given prices (noise-free).
pub fn oracle_dataset(oracle: &dyn ProbeOracle, prices: &[Vec<f64>], seed: u64) -> Result<Dataset> {
    let t = oracle.periods();
    let mut samples = Vec::with_capacity(prices.len());
    for lam in prices {
        let resp = oracle.respond_to(lam)?;
        samples.push(Sample {
            lambda: lam.clone(),
            power: resp,
        });
    }
    Ok(Dataset {
        schema_version: 1,
        t,
        seed,
        noise: NoiseSpec::None,
        samples,
        truth_ref: None,
    })
}
