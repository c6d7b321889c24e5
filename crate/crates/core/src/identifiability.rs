//! Identifiability geometry of a dataset.
//!
//! From samples `(lambda^k, P^k)` build the price matrix `Lambda`, the cost
//! vector `Xi` with `Xi_k = lambda^k . P^k`, the optimality polyhedron
//! `Pi = {P | Lambda P >= Xi}`, and the sample hull `Conv`.  Every region
//! `Omega` consistent with the data satisfies `Conv ⊆ Omega ⊆ Pi`; the gap
//! between the two is the undetermined region, and its emptiness certifies
//! that the dataset pins the load's feasible region down uniquely.

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::polyhedra::{
    contains_h_in_v, convex_hull_2d, is_bounded, polygon_area, support_value, vertex_enumerate_2d,
    vpolytope_membership, ContainmentVerdict, HPolyhedron, Method, PolySet, Support, VPolytope,
};
use crate::tol;
use serde::{Deserialize, Serialize};

/// Dataset geometry: `Lambda`, `Xi`, `Pi`, and the sample hull.
#[derive(Debug, Clone)]
pub struct IdentGeometry {
    pub lambda: Vec<Vec<f64>>,
    pub xi: Vec<f64>,
    pub pi: HPolyhedron,
    pub conv: VPolytope,
    pub t: usize,
}

/// Theorem-2 trichotomy for a point in power space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionClass {
    ConfirmedFeasible,
    Undetermined,
    Infeasible,
}

/// Containment route selection for the gap check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckMethod {
    VertexEnum,
    RobustMilp,
    /// Run both routes and fail loudly if they ever disagree.
    Both,
}

/// A candidate feasible region in either representation.
#[derive(Debug, Clone, Copy)]
pub enum CandidateRegion<'a> {
    V(&'a VPolytope),
    H(&'a HPolyhedron),
}

/// Which inclusion a candidate failed, if any.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertFailure {
    NotSupersetConv,
    NotSubsetPi,
    None,
}

/// Outcome of the Theorem-2 optimality certificate.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Certificate {
    pub is_optimum: bool,
    pub failure: CertFailure,
}

pub fn build_geometry(ds: &Dataset) -> Result<IdentGeometry> {
    if ds.is_empty() {
        return Err(Error::Input("geometry needs at least one sample".into()));
    }
    ds.validate()?;
    let t = ds.t;
    let lambda: Vec<Vec<f64>> = ds.samples.iter().map(|s| s.lambda.clone()).collect();
    let xi: Vec<f64> = ds
        .samples
        .iter()
        .map(|s| dot(&s.lambda, &s.power))
        .collect();
    let pi = HPolyhedron::new(lambda.clone(), xi.clone())?;
    let powers: Vec<Vec<f64>> = ds.samples.iter().map(|s| s.power.clone()).collect();
    let conv = if t == 2 {
        convex_hull_2d(&powers)?
    } else {
        prune_to_extreme(&powers)?
    };
    Ok(IdentGeometry {
        lambda,
        xi,
        pi,
        conv,
        t,
    })
}

/// Keep only points that are not convex combinations of the others
/// (membership-LP pruning for dimensions other than 2).
fn prune_to_extreme(points: &[Vec<f64>]) -> Result<VPolytope> {
    let mut uniq: Vec<Vec<f64>> = Vec::new();
    for p in points {
        if !uniq.iter().any(|q| q == p) {
            uniq.push(p.clone());
        }
    }
    if uniq.len() == 1 {
        return VPolytope::new(uniq);
    }
    let mut keep: Vec<Vec<f64>> = Vec::new();
    for (i, p) in uniq.iter().enumerate() {
        let others: Vec<Vec<f64>> = uniq
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, q)| q.clone())
            .collect();
        let v = VPolytope::new(others)?;
        let (inside, _) = vpolytope_membership(p, &v)?;
        if !inside {
            keep.push(p.clone());
        }
    }
    if keep.is_empty() {
        // All points coincide.
        keep.push(uniq[0].clone());
    }
    VPolytope::new(keep)
}

/// Is the undetermined region empty?  `contained == true` means
/// `Pi ⊆ Conv`, i.e. the dataset identifies the region uniquely.
///
/// An unbounded `Pi` is definitive evidence of a nonempty gap: a bounded
/// hull cannot contain it, and the witness walks a recession direction.
pub fn delta_omega_empty(g: &IdentGeometry, method: CheckMethod) -> Result<ContainmentVerdict> {
    match method {
        CheckMethod::VertexEnum => contains_h_in_v(&g.pi, &g.conv, Method::VertexEnum),
        CheckMethod::RobustMilp => contains_h_in_v(&g.pi, &g.conv, Method::RobustMilp),
        CheckMethod::Both => {
            let a = contains_h_in_v(&g.pi, &g.conv, Method::VertexEnum)?;
            let b = contains_h_in_v(&g.pi, &g.conv, Method::RobustMilp)?;
            if a.contained != b.contained {
                return Err(Error::Internal(format!(
                    "containment methods disagree: vertex_enum {} vs robust_milp {}",
                    a.contained, b.contained
                )));
            }
            Ok(a)
        }
    }
}

/// Classify a point against the dataset geometry.
pub fn classify_point(p: &[f64], g: &IdentGeometry) -> Result<RegionClass> {
    if p.len() != g.t {
        return Err(Error::Input("point dimension mismatch".into()));
    }
    let (in_conv, _) = vpolytope_membership(p, &g.conv)?;
    if in_conv {
        return Ok(RegionClass::ConfirmedFeasible);
    }
    if g.pi.contains(p) {
        return Ok(RegionClass::Undetermined);
    }
    Ok(RegionClass::Infeasible)
}

/// Theorem-2 certificate: a candidate region is an optimum of the
/// identification model exactly when `Conv ⊆ candidate ⊆ Pi`.
pub fn certify_candidate(candidate: CandidateRegion<'_>, g: &IdentGeometry) -> Result<Certificate> {
    // Pre: nonempty and bounded.
    match candidate {
        CandidateRegion::V(_) => {}
        CandidateRegion::H(h) => {
            if !is_bounded(h).map_err(|e| match e {
                Error::Infeasible(_) => Error::Input("candidate region is empty".into()),
                other => other,
            })? {
                return Err(Error::Input("candidate region must be bounded".into()));
            }
        }
    }

    // Conv(sample hull) inside the candidate.
    for vert in &g.conv.vertices {
        let inside = match candidate {
            CandidateRegion::V(v) => vpolytope_membership(vert, v)?.0,
            CandidateRegion::H(h) => h.contains(vert),
        };
        if !inside {
            return Ok(Certificate {
                is_optimum: false,
                failure: CertFailure::NotSupersetConv,
            });
        }
    }

    // Candidate inside Pi: per-row support comparison,
    // min over candidate of Lambda_k . P >= Xi_k - feas_tol.
    for (row, &xi_k) in g.lambda.iter().zip(&g.xi) {
        let sv = match candidate {
            CandidateRegion::V(v) => support_value(PolySet::V(v), row)?,
            CandidateRegion::H(h) => support_value(PolySet::H(h), row)?,
        };
        match sv {
            Support::Value(m) => {
                if m < xi_k - tol::FEAS_TOL {
                    return Ok(Certificate {
                        is_optimum: false,
                        failure: CertFailure::NotSubsetPi,
                    });
                }
            }
            Support::Unbounded => {
                return Err(Error::Input("candidate region must be bounded".into()))
            }
        }
    }

    Ok(Certificate {
        is_optimum: true,
        failure: CertFailure::None,
    })
}

// ---------------------------------------------------------------------------
// Region report (the cmd-check JSON payload)
// ---------------------------------------------------------------------------

/// Areas are visualization aids computed after clipping `Pi` to a box; the
/// gap verdict itself never uses the clip.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AreaReport {
    pub clip: [f64; 4],
    pub conv_area: f64,
    pub pi_clipped_area: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegionReport {
    pub schema_version: u32,
    pub num_samples: usize,
    #[serde(rename = "T")]
    pub t: usize,
    pub pi_bounded: bool,
    pub delta_omega_empty: bool,
    pub method: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub areas: Option<AreaReport>,
}

/// Default plot clip: the sample bounding box inflated 1.5x around its
/// center, falling back to `[-10, 10]^T` when degenerate.
pub fn default_clip(g: &IdentGeometry) -> (Vec<f64>, Vec<f64>) {
    let d = g.t;
    let mut lo = vec![f64::INFINITY; d];
    let mut hi = vec![f64::NEG_INFINITY; d];
    for v in &g.conv.vertices {
        for i in 0..d {
            lo[i] = lo[i].min(v[i]);
            hi[i] = hi[i].max(v[i]);
        }
    }
    let mut clo = vec![0.0; d];
    let mut chi = vec![0.0; d];
    for i in 0..d {
        if !lo[i].is_finite() || !hi[i].is_finite() {
            clo[i] = -10.0;
            chi[i] = 10.0;
            continue;
        }
        let c = 0.5 * (lo[i] + hi[i]);
        let half = (0.5 * (hi[i] - lo[i])).max(1.0) * 1.5;
        clo[i] = c - half;
        chi[i] = c + half;
    }
    (clo, chi)
}

/// Build the full region report for a dataset.
pub fn region_report(
    ds: &Dataset,
    method: CheckMethod,
    clip: Option<([f64; 2], [f64; 2])>,
) -> Result<(RegionReport, IdentGeometry)> {
    let g = build_geometry(ds)?;
    let pi_bounded = is_bounded(&g.pi)?;
    let verdict = delta_omega_empty(&g, method)?;
    let areas = if g.t == 2 {
        let (lo, hi) = match clip {
            Some((lo, hi)) => (lo.to_vec(), hi.to_vec()),
            None => default_clip(&g),
        };
        let clipped = g.pi.clipped_to_box(&lo, &hi);
        let verts = vertex_enumerate_2d(&clipped)?;
        Some(AreaReport {
            clip: [lo[0], lo[1], hi[0], hi[1]],
            conv_area: polygon_area(&g.conv.vertices),
            pi_clipped_area: polygon_area(&verts),
        })
    } else {
        None
    };
    let report = RegionReport {
        schema_version: 1,
        num_samples: ds.len(),
        t: g.t,
        pi_bounded,
        delta_omega_empty: verdict.contained,
        method: match method {
            CheckMethod::VertexEnum => "vertex_enum".into(),
            CheckMethod::RobustMilp => "robust_milp".into(),
            CheckMethod::Both => "both".into(),
        },
        witness: verdict.witness.clone(),
        areas,
    };
    Ok((report, g))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{generate, sample_prices, Dataset, NoiseSpec, PriceDist, Sample};
    use crate::flex_model::{FlexModel, TdLoadParams};
    use crate::rng::Stream;

    fn box_model() -> FlexModel {
        FlexModel::new(
            2,
            1.0,
            vec![],
            vec![TdLoadParams {
                p_min: vec![0.0, 0.0],
                p_max: vec![1.0, 1.0],
            }],
            vec![],
        )
    }

    fn dataset_from_pairs(pairs: &[([f64; 2], [f64; 2])]) -> Dataset {
        Dataset {
            schema_version: 1,
            t: 2,
            seed: 0,
            noise: NoiseSpec::None,
            samples: pairs
                .iter()
                .map(|(l, p)| Sample {
                    lambda: l.to_vec(),
                    power: p.to_vec(),
                })
                .collect(),
            truth_ref: None,
        }
    }

    #[test]
    fn single_sample_geometry() {
        let ds = dataset_from_pairs(&[([1.0, 0.5], [2.0, 3.0])]);
        let g = build_geometry(&ds).unwrap();
        assert_eq!(g.pi.num_rows(), 1);
        assert_eq!(g.conv.num_vertices(), 1);
        assert!((g.xi[0] - (2.0 + 1.5)).abs() < 1e-12);
        // The sample sits on the halfspace boundary.
        assert!(g.pi.contains(&[2.0, 3.0]));
        assert_eq!(
            classify_point(&[2.0, 3.0], &g).unwrap(),
            RegionClass::ConfirmedFeasible
        );
    }

    #[test]
    fn theorem_2a_noise_free_samples_inside_pi() {
        let m = box_model();
        let prices = sample_prices(40, 2, 17, PriceDist::UnitSphere).unwrap();
        let ds = generate(&m, &prices, &NoiseSpec::None, 17).unwrap();
        let g = build_geometry(&ds).unwrap();
        for s in &ds.samples {
            for (row, &xi) in g.lambda.iter().zip(&g.xi) {
                assert!(dot(row, &s.power) >= xi - 1e-9);
            }
        }
        // Every hull vertex is Pi-feasible.
        for v in &g.conv.vertices {
            assert!(g.pi.contains(v));
        }
    }

    #[test]
    fn duplicated_sample_changes_nothing() {
        let m = box_model();
        let prices = sample_prices(10, 2, 3, PriceDist::UnitSphere).unwrap();
        let ds = generate(&m, &prices, &NoiseSpec::None, 3).unwrap();
        let mut dup = ds.clone();
        dup.samples.push(dup.samples[0].clone());
        let g1 = build_geometry(&ds).unwrap();
        let g2 = build_geometry(&dup).unwrap();
        let mut stream = Stream::new(1, "dupdir", 0);
        for _ in 0..100 {
            let th = stream.next_range(0.0, std::f64::consts::TAU);
            let lam = [th.cos(), th.sin()];
            let s1 = support_value(PolySet::V(&g1.conv), &lam).unwrap().value().unwrap();
            let s2 = support_value(PolySet::V(&g2.conv), &lam).unwrap().value().unwrap();
            assert!((s1 - s2).abs() < 1e-9);
            let p1 = support_value(PolySet::H(&g1.pi), &lam).unwrap();
            let p2 = support_value(PolySet::H(&g2.pi), &lam).unwrap();
            match (p1, p2) {
                (Support::Value(a), Support::Value(b)) => assert!((a - b).abs() < 1e-8),
                (Support::Unbounded, Support::Unbounded) => {}
                other => panic!("support mismatch {other:?}"),
            }
        }
    }

    #[test]
    fn full_probe_of_box_closes_the_gap() {
        // Axis prices recover every edge of the box, the diagonal price
        // recovers the far corner: Pi equals the hull and the gap is empty.
        let m = box_model();
        let prices = vec![
            vec![1.0, 0.0],
            vec![0.0, 1.0],
            vec![-1.0, 0.0],
            vec![0.0, -1.0],
            vec![-1.0, -1.0],
        ];
        let ds = generate(&m, &prices, &NoiseSpec::None, 0).unwrap();
        let g = build_geometry(&ds).unwrap();
        for method in [CheckMethod::VertexEnum, CheckMethod::RobustMilp, CheckMethod::Both] {
            let v = delta_omega_empty(&g, method).unwrap();
            assert!(v.contained, "method {method:?}");
        }
    }

    #[test]
    fn two_samples_leave_pi_unbounded_and_gap_nonempty() {
        let m = box_model();
        let prices = sample_prices(2, 2, 5, PriceDist::UnitSphere).unwrap();
        let ds = generate(&m, &prices, &NoiseSpec::None, 5).unwrap();
        let g = build_geometry(&ds).unwrap();
        assert!(!is_bounded(&g.pi).unwrap());
        let v = delta_omega_empty(&g, CheckMethod::Both).unwrap();
        assert!(!v.contained);
        let w = v.witness.unwrap();
        assert!(g.pi.contains(&w));
        let (inside, _) = vpolytope_membership(&w, &g.conv).unwrap();
        assert!(!inside);
    }

    #[test]
    fn classification_covers_grid_consistently() {
        let m = box_model();
        // A handful of random directions: the hull covers part of the grid,
        // Pi (still loose) covers more, and the rest violates some row.
        let prices = sample_prices(8, 2, 8, PriceDist::UnitSphere).unwrap();
        let ds = generate(&m, &prices, &NoiseSpec::None, 8).unwrap();
        let g = build_geometry(&ds).unwrap();
        let mut counts = [0usize; 3];
        for i in 0..25 {
            for j in 0..25 {
                let p = [
                    -0.5 + 2.0 * (i as f64) / 24.0,
                    -0.5 + 2.0 * (j as f64) / 24.0,
                ];
                match classify_point(&p, &g).unwrap() {
                    RegionClass::ConfirmedFeasible => {
                        counts[0] += 1;
                        // Consistency: confirmed-feasible is never Pi-infeasible.
                        assert!(g.pi.contains(&p));
                    }
                    RegionClass::Undetermined => counts[1] += 1,
                    RegionClass::Infeasible => counts[2] += 1,
                }
            }
        }
        assert_eq!(counts.iter().sum::<usize>(), 625);
        assert!(counts.iter().all(|&c| c > 0), "classes {counts:?}");
    }

    #[test]
    fn certify_conv_and_pi_as_canonical_optima() {
        let m = box_model();
        let prices = vec![
            vec![1.0, 0.0],
            vec![0.0, 1.0],
            vec![-1.0, 0.0],
            vec![0.0, -1.0],
            vec![0.6, 0.8],
            vec![-0.6, 0.8],
        ];
        let ds = generate(&m, &prices, &NoiseSpec::None, 2).unwrap();
        let g = build_geometry(&ds).unwrap();
        // Minimal solution: the hull itself.
        let c1 = certify_candidate(CandidateRegion::V(&g.conv), &g).unwrap();
        assert!(c1.is_optimum, "{c1:?}");
        // Maximal solution: Pi itself (bounded here thanks to axis prices).
        assert!(is_bounded(&g.pi).unwrap());
        let c2 = certify_candidate(CandidateRegion::H(&g.pi), &g).unwrap();
        assert!(c2.is_optimum, "{c2:?}");
    }

    #[test]
    fn certify_shrunk_candidate_fails_superset() {
        let m = box_model();
        let prices = vec![
            vec![1.0, 0.0],
            vec![0.0, 1.0],
            vec![-1.0, 0.0],
            vec![0.0, -1.0],
            vec![-1.0, -1.0],
        ];
        let ds = generate(&m, &prices, &NoiseSpec::None, 2).unwrap();
        let g = build_geometry(&ds).unwrap();
        assert!(g.conv.num_vertices() >= 3);
        // Drop one extreme sample.
        let shrunk = VPolytope::new(g.conv.vertices[1..].to_vec()).unwrap();
        let c = certify_candidate(CandidateRegion::V(&shrunk), &g).unwrap();
        assert!(!c.is_optimum);
        assert_eq!(c.failure, CertFailure::NotSupersetConv);
    }

    #[test]
    fn certify_inflated_candidate_fails_subset() {
        let m = box_model();
        let prices = vec![
            vec![1.0, 0.0],
            vec![0.0, 1.0],
            vec![-1.0, 0.0],
            vec![0.0, -1.0],
            vec![-1.0, -1.0],
        ];
        let ds = generate(&m, &prices, &NoiseSpec::None, 2).unwrap();
        let g = build_geometry(&ds).unwrap();
        // Inflate the hull beyond Pi.
        let inflated = VPolytope::new(
            g.conv
                .vertices
                .iter()
                .map(|v| vec![0.5 + 2.0 * (v[0] - 0.5), 0.5 + 2.0 * (v[1] - 0.5)])
                .collect(),
        )
        .unwrap();
        let c = certify_candidate(CandidateRegion::V(&inflated), &g).unwrap();
        assert!(!c.is_optimum);
        assert_eq!(c.failure, CertFailure::NotSubsetPi);
    }

    #[test]
    fn certify_rejects_unbounded_candidate() {
        let ds = dataset_from_pairs(&[([1.0, 0.0], [0.0, 0.0])]);
        let g = build_geometry(&ds).unwrap();
        let halfplane = HPolyhedron::new(vec![vec![1.0, 0.0]], vec![0.0]).unwrap();
        assert!(matches!(
            certify_candidate(CandidateRegion::H(&halfplane), &g),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn nesting_under_prefixes() {
        let m = box_model();
        let prices = sample_prices(60, 2, 23, PriceDist::UnitSphere).unwrap();
        let ds = generate(&m, &prices, &NoiseSpec::None, 23).unwrap();
        let g_small = build_geometry(&ds.prefix(20)).unwrap();
        let g_big = build_geometry(&ds).unwrap();
        // conv(K1) inside conv(K2).
        for v in &g_small.conv.vertices {
            let (inside, _) = vpolytope_membership(v, &g_big.conv).unwrap();
            assert!(inside);
        }
        // pi(K2) inside pi(K1): support dominance on random directions.
        let mut stream = Stream::new(9, "nest", 0);
        for _ in 0..100 {
            let th = stream.next_range(0.0, std::f64::consts::TAU);
            let lam = [th.cos(), th.sin()];
            let s_small = support_value(PolySet::H(&g_small.pi), &lam).unwrap();
            let s_big = support_value(PolySet::H(&g_big.pi), &lam).unwrap();
            match (s_small, s_big) {
                (Support::Value(a), Support::Value(b)) => {
                    assert!(b >= a - 1e-8, "direction {lam:?}: {b} < {a}")
                }
                // Row subset: whenever the small Pi is bounded in a
                // direction, the larger one must be too.
                (Support::Value(_), Support::Unbounded) => {
                    panic!("support of the refined Pi lost boundedness")
                }
                (Support::Unbounded, _) => {}
            }
        }
    }

    #[test]
    fn region_report_shape() {
        let m = box_model();
        let prices = vec![
            vec![1.0, 0.0],
            vec![0.0, 1.0],
            vec![-1.0, 0.0],
            vec![0.0, -1.0],
            vec![-1.0, -1.0],
        ];
        let ds = generate(&m, &prices, &NoiseSpec::None, 2).unwrap();
        let (report, _) = region_report(&ds, CheckMethod::Both, None).unwrap();
        assert!(report.pi_bounded);
        assert!(report.delta_omega_empty);
        let areas = report.areas.unwrap();
        assert!((areas.conv_area - 1.0).abs() < 1e-9);
        assert!((areas.pi_clipped_area - 1.0).abs() < 1e-6);
    }
}
