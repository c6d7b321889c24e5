//! Geometry kernel for V- and H-representations.
//!
//! `HPolyhedron` is `{P | A P >= b}`; `VPolytope` is a vertex list.  The two
//! containment checks mirror the vertex-enumeration and robust-MILP routes:
//! the first enumerates the vertices of the H-set and runs a membership LP
//! per vertex, the second solves a KKT/big-M MILP whose optimum is the
//! largest coordinate deviation between a point of the H-set and its
//! projection onto the V-set.

use crate::error::{Error, Result};
use crate::solver::{
    solve_lp, solve_milp_with, LpProblem, LpStatus, MilpOptions, MilpProblem, MilpStatus,
    Relation, Sense,
};
use crate::tol;

/// Halfspace intersection `{P | A P >= b}`.
#[derive(Debug, Clone, PartialEq)]
pub struct HPolyhedron {
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
}

impl HPolyhedron {
    pub fn new(a: Vec<Vec<f64>>, b: Vec<f64>) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::Input(format!(
                "row count {} does not match rhs length {}",
                a.len(),
                b.len()
            )));
        }
        let d = a.first().map(|r| r.len()).unwrap_or(0);
        if a.iter().any(|r| r.len() != d) {
            return Err(Error::Input("ragged constraint matrix".into()));
        }
        Ok(HPolyhedron { a, b })
    }

    pub fn dim(&self) -> usize {
        self.a.first().map(|r| r.len()).unwrap_or(0)
    }

    pub fn num_rows(&self) -> usize {
        self.a.len()
    }

    /// `A p >= b` within `feas_tol`?
    pub fn contains(&self, p: &[f64]) -> bool {
        self.a
            .iter()
            .zip(&self.b)
            .all(|(row, &bi)| dot(row, p) >= bi - tol::FEAS_TOL)
    }

    /// Index and size of the worst row violation, if any.
    pub fn worst_violation(&self, p: &[f64]) -> Option<(usize, f64)> {
        let mut worst: Option<(usize, f64)> = None;
        for (i, (row, &bi)) in self.a.iter().zip(&self.b).enumerate() {
            let v = bi - dot(row, p);
            if v > tol::FEAS_TOL && worst.map(|(_, w)| v > w).unwrap_or(true) {
                worst = Some((i, v));
            }
        }
        worst
    }

    /// Intersect with an axis-aligned box (used for plotting clips).
    pub fn clipped_to_box(&self, lo: &[f64], hi: &[f64]) -> HPolyhedron {
        let d = self.dim();
        let mut a = self.a.clone();
        let mut b = self.b.clone();
        for i in 0..d {
            let mut row = vec![0.0; d];
            row[i] = 1.0;
            a.push(row.clone());
            b.push(lo[i]);
            row[i] = -1.0;
            a.push(row);
            b.push(-hi[i]);
        }
        HPolyhedron { a, b }
    }
}

/// Vertex-list polytope.
#[derive(Debug, Clone, PartialEq)]
pub struct VPolytope {
    pub vertices: Vec<Vec<f64>>,
}

impl VPolytope {
    pub fn new(vertices: Vec<Vec<f64>>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::Input("a VPolytope needs at least one vertex".into()));
        }
        let d = vertices[0].len();
        if vertices.iter().any(|v| v.len() != d) {
            return Err(Error::Input("vertices of mixed dimension".into()));
        }
        Ok(VPolytope { vertices })
    }

    pub fn dim(&self) -> usize {
        self.vertices[0].len()
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    /// Largest absolute coordinate over all vertices.
    pub fn max_abs_coord(&self) -> f64 {
        self.vertices
            .iter()
            .flat_map(|v| v.iter())
            .fold(0.0f64, |m, &x| m.max(x.abs()))
    }
}

/// Which containment route produced a verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    VertexEnum,
    RobustMilp,
}

/// Outcome of `contains_h_in_v`: when `contained` is false, `witness` is a
/// point of the H-set (within `feas_tol`) that lies outside the V-set.
#[derive(Debug, Clone)]
pub struct ContainmentVerdict {
    pub contained: bool,
    pub witness: Option<Vec<f64>>,
    pub method: Method,
}

/// Support outcome: the minimum of `lambda . P` over a set, or unbounded.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Support {
    Value(f64),
    Unbounded,
}

impl Support {
    pub fn value(self) -> Option<f64> {
        match self {
            Support::Value(v) => Some(v),
            Support::Unbounded => None,
        }
    }
}

/// Either representation, for operations defined on both.
#[derive(Debug, Clone, Copy)]
pub enum PolySet<'a> {
    H(&'a HPolyhedron),
    V(&'a VPolytope),
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn cross(o: &[f64], a: &[f64], b: &[f64]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

// ---------------------------------------------------------------------------
// Hulls
// ---------------------------------------------------------------------------

/// Monotone-chain convex hull.
///
/// Vertices come back in counterclockwise order starting from the
/// lexicographically smallest point; duplicates, interior points, and
/// collinear midpoints are removed (cross-product tolerance 1e-9).
pub fn convex_hull_2d(points: &[Vec<f64>]) -> Result<VPolytope> {
    if points.is_empty() {
        return Err(Error::Input("convex hull of an empty point set".into()));
    }
    if points.iter().any(|p| p.len() != 2) {
        return Err(Error::Input("convex_hull_2d requires 2-dimensional points".into()));
    }
    // Adding 0.0 canonicalizes -0.0, which total_cmp would order before +0.0.
    let mut pts: Vec<Vec<f64>> = points
        .iter()
        .map(|p| vec![p[0] + 0.0, p[1] + 0.0])
        .collect();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup_by(|a, b| a[0] == b[0] && a[1] == b[1]);

    if pts.len() == 1 {
        return VPolytope::new(pts);
    }

    let mut lower: Vec<Vec<f64>> = Vec::new();
    for p in &pts {
        while lower.len() >= 2
            && cross(&lower[lower.len() - 2], &lower[lower.len() - 1], p) <= tol::CROSS_TOL
        {
            lower.pop();
        }
        lower.push(p.clone());
    }
    let mut upper: Vec<Vec<f64>> = Vec::new();
    for p in pts.iter().rev() {
        while upper.len() >= 2
            && cross(&upper[upper.len() - 2], &upper[upper.len() - 1], p) <= tol::CROSS_TOL
        {
            upper.pop();
        }
        upper.push(p.clone());
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    if lower.is_empty() {
        // Everything collapsed within the collinearity tolerance.
        lower.push(pts[0].clone());
    }
    VPolytope::new(lower)
}

/// Signed area of a counterclockwise vertex cycle (shoelace formula).
pub fn polygon_area(vertices: &[Vec<f64>]) -> f64 {
    let n = vertices.len();
    if n < 3 {
        return 0.0;
    }
    let mut s = 0.0;
    for i in 0..n {
        let p = &vertices[i];
        let q = &vertices[(i + 1) % n];
        s += p[0] * q[1] - q[0] * p[1];
    }
    0.5 * s
}

// ---------------------------------------------------------------------------
// Membership
// ---------------------------------------------------------------------------

/// Feasibility LP: is `p` a convex combination of the polytope's vertices?
///
/// On success the weights `alpha` satisfy `0 <= alpha <= 1`,
/// `sum alpha = 1`, and `Gamma alpha = p` within `feas_tol`.
pub fn vpolytope_membership(p: &[f64], v: &VPolytope) -> Result<(bool, Option<Vec<f64>>)> {
    let d = v.dim();
    if p.len() != d {
        return Err(Error::Input(format!(
            "point dimension {} does not match polytope dimension {}",
            p.len(),
            d
        )));
    }
    let nv = v.num_vertices();
    let mut lp = LpProblem {
        sense: Sense::Min,
        cost: vec![0.0; nv],
        constraints: Vec::new(),
        bounds: vec![(0.0, 1.0); nv],
    };
    for i in 0..d {
        let coeffs: Vec<f64> = v.vertices.iter().map(|vert| vert[i]).collect();
        lp.add_constraint(coeffs, Relation::Eq, p[i]);
    }
    lp.add_constraint(vec![1.0; nv], Relation::Eq, 1.0);
    let sol = solve_lp(&lp)?;
    match sol.status {
        LpStatus::Optimal => Ok((true, Some(sol.x))),
        LpStatus::Infeasible => Ok((false, None)),
        LpStatus::Unbounded => Err(Error::Internal(
            "membership feasibility LP reported unbounded".into(),
        )),
    }
}

/// Minimum l1 distance from `p` to the polytope.
pub fn l1_distance_to_vpolytope(p: &[f64], v: &VPolytope) -> Result<f64> {
    let d = v.dim();
    if p.len() != d {
        return Err(Error::Input("dimension mismatch in distance query".into()));
    }
    let nv = v.num_vertices();
    // Variables: alpha (nv), t (d).
    let n = nv + d;
    let mut lp = LpProblem {
        sense: Sense::Min,
        cost: {
            let mut c = vec![0.0; n];
            for i in 0..d {
                c[nv + i] = 1.0;
            }
            c
        },
        constraints: Vec::new(),
        bounds: {
            let mut b = vec![(0.0, 1.0); nv];
            b.extend(vec![(0.0, f64::INFINITY); d]);
            b
        },
    };
    lp.add_constraint(
        {
            let mut c = vec![0.0; n];
            for w in 0..nv {
                c[w] = 1.0;
            }
            c
        },
        Relation::Eq,
        1.0,
    );
    for i in 0..d {
        // t_i >= p_i - (Gamma alpha)_i  and  t_i >= (Gamma alpha)_i - p_i
        let mut plus = vec![0.0; n];
        let mut minus = vec![0.0; n];
        for (w, vert) in v.vertices.iter().enumerate() {
            plus[w] = vert[i];
            minus[w] = -vert[i];
        }
        plus[nv + i] = 1.0;
        minus[nv + i] = 1.0;
        lp.add_constraint(plus, Relation::Ge, p[i]);
        lp.add_constraint(minus, Relation::Ge, -p[i]);
    }
    let sol = solve_lp(&lp)?;
    match sol.status {
        LpStatus::Optimal => Ok(sol.value),
        _ => Err(Error::Internal("l1 projection LP must be solvable".into())),
    }
}

// ---------------------------------------------------------------------------
// Boundedness and vertex enumeration
// ---------------------------------------------------------------------------

/// Feasibility probe: any point of the polyhedron.
pub fn any_point(h: &HPolyhedron) -> Result<Vec<f64>> {
    let d = h.dim();
    let mut lp = LpProblem {
        sense: Sense::Min,
        cost: vec![0.0; d],
        constraints: Vec::new(),
        bounds: vec![(f64::NEG_INFINITY, f64::INFINITY); d],
    };
    for (row, &bi) in h.a.iter().zip(&h.b) {
        lp.add_constraint(row.clone(), Relation::Ge, bi);
    }
    let sol = solve_lp(&lp)?;
    match sol.status {
        LpStatus::Optimal => Ok(sol.x),
        LpStatus::Infeasible => Err(Error::Infeasible("polyhedron is empty".into())),
        LpStatus::Unbounded => Err(Error::Internal("zero-objective LP cannot be unbounded".into())),
    }
}

/// Coordinate extremum over the polyhedron.
fn coord_extremum(h: &HPolyhedron, coord: usize, sense: Sense) -> Result<Support> {
    let d = h.dim();
    let mut cost = vec![0.0; d];
    cost[coord] = 1.0;
    let mut lp = LpProblem {
        sense,
        cost,
        constraints: Vec::new(),
        bounds: vec![(f64::NEG_INFINITY, f64::INFINITY); d],
    };
    for (row, &bi) in h.a.iter().zip(&h.b) {
        lp.add_constraint(row.clone(), Relation::Ge, bi);
    }
    let sol = solve_lp(&lp)?;
    match sol.status {
        LpStatus::Optimal => Ok(Support::Value(sol.value)),
        LpStatus::Unbounded => Ok(Support::Unbounded),
        LpStatus::Infeasible => Err(Error::Infeasible("polyhedron is empty".into())),
    }
}

/// Is the (nonempty) polyhedron bounded?  Errors with `Infeasible` when the
/// set is empty, which is a distinct condition from unboundedness.
pub fn is_bounded(h: &HPolyhedron) -> Result<bool> {
    any_point(h)?;
    for i in 0..h.dim() {
        if coord_extremum(h, i, Sense::Min)? == Support::Unbounded {
            return Ok(false);
        }
        if coord_extremum(h, i, Sense::Max)? == Support::Unbounded {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Per-coordinate bounding box of a bounded polyhedron.
pub fn bounding_box(h: &HPolyhedron) -> Result<(Vec<f64>, Vec<f64>)> {
    let d = h.dim();
    let mut lo = vec![0.0; d];
    let mut hi = vec![0.0; d];
    for i in 0..d {
        lo[i] = match coord_extremum(h, i, Sense::Min)? {
            Support::Value(v) => v,
            Support::Unbounded => {
                return Err(Error::Unbounded(format!("coordinate {i} unbounded below")))
            }
        };
        hi[i] = match coord_extremum(h, i, Sense::Max)? {
            Support::Value(v) => v,
            Support::Unbounded => {
                return Err(Error::Unbounded(format!("coordinate {i} unbounded above")))
            }
        };
    }
    Ok((lo, hi))
}

/// A nonzero recession direction `y` with `A y >= 0`, if one exists.
pub fn recession_direction(h: &HPolyhedron) -> Result<Option<Vec<f64>>> {
    let d = h.dim();
    for coord in 0..d {
        for sign in [1.0, -1.0] {
            let mut cost = vec![0.0; d];
            cost[coord] = sign;
            let mut lp = LpProblem {
                sense: Sense::Max,
                cost,
                constraints: Vec::new(),
                bounds: vec![(-1.0, 1.0); d],
            };
            for row in &h.a {
                lp.add_constraint(row.clone(), Relation::Ge, 0.0);
            }
            let sol = solve_lp(&lp)?;
            if sol.status == LpStatus::Optimal && sol.value > 1e-6 {
                return Ok(Some(sol.x));
            }
        }
    }
    Ok(None)
}

/// Direction with the largest worst-case inner product against the given
/// unit vectors, within the unit box: the Chebyshev center of the dual
/// cone.  `None` when even the best direction has nonpositive margin.
pub fn solve_chebyshev_cone(units: &[Vec<f64>]) -> Result<Option<Vec<f64>>> {
    if units.is_empty() {
        return Ok(None);
    }
    let d = units[0].len();
    // Variables: lambda (d), r.
    let mut cost = vec![0.0; d + 1];
    cost[d] = 1.0;
    let mut lp = LpProblem {
        sense: Sense::Max,
        cost,
        constraints: Vec::new(),
        bounds: {
            let mut b = vec![(-1.0, 1.0); d];
            b.push((f64::NEG_INFINITY, f64::INFINITY));
            b
        },
    };
    for u in units {
        let mut row = u.clone();
        row.push(-1.0);
        lp.add_constraint(row, Relation::Ge, 0.0);
    }
    let sol = solve_lp(&lp)?;
    if sol.status != LpStatus::Optimal || sol.value <= 0.0 {
        return Ok(None);
    }
    Ok(Some(sol.x[..d].to_vec()))
}

/// All vertices of a bounded 2-D polyhedron: intersect each constraint
/// pair, keep points feasible within `feas_tol`, deduplicate within
/// `feas_tol`, and order counterclockwise from the lexicographically
/// smallest vertex.
pub fn vertex_enumerate_2d(h: &HPolyhedron) -> Result<Vec<Vec<f64>>> {
    if h.dim() != 2 {
        return Err(Error::Input(format!(
            "vertex enumeration supports d = 2 only, got d = {} (use the robust containment path)",
            h.dim()
        )));
    }
    if !is_bounded(h)? {
        return Err(Error::Unbounded(
            "polyhedron is unbounded; clip it before enumerating vertices".into(),
        ));
    }
    let m = h.num_rows();
    let mut points: Vec<Vec<f64>> = Vec::new();
    for i in 0..m {
        for j in i + 1..m {
            let det = h.a[i][0] * h.a[j][1] - h.a[i][1] * h.a[j][0];
            if det.abs() < 1e-12 {
                continue;
            }
            let x = (h.b[i] * h.a[j][1] - h.a[i][1] * h.b[j]) / det;
            let y = (h.a[i][0] * h.b[j] - h.b[i] * h.a[j][0]) / det;
            let p = vec![x, y];
            if h.contains(&p) {
                points.push(p);
            }
        }
    }
    let mut dedup: Vec<Vec<f64>> = Vec::new();
    for p in points {
        if !dedup
            .iter()
            .any(|q| (q[0] - p[0]).abs() <= tol::FEAS_TOL && (q[1] - p[1]).abs() <= tol::FEAS_TOL)
        {
            dedup.push(p);
        }
    }
    if dedup.is_empty() {
        return Ok(Vec::new());
    }
    Ok(convex_hull_2d(&dedup)?.vertices)
}

/// H-representation of a 2-D polytope given in CCW vertex order.
///
/// Full-dimensional polygons get one inward-pointing row per edge; segments
/// and points fall back to equality pairs.
pub fn v_to_h_2d(v: &VPolytope) -> Result<HPolyhedron> {
    if v.dim() != 2 {
        return Err(Error::Input("v_to_h_2d requires 2-dimensional vertices".into()));
    }
    let verts = &v.vertices;
    match verts.len() {
        1 => {
            let p = &verts[0];
            HPolyhedron::new(
                vec![vec![1.0, 0.0], vec![-1.0, 0.0], vec![0.0, 1.0], vec![0.0, -1.0]],
                vec![p[0], -p[0], p[1], -p[1]],
            )
        }
        2 => {
            let (a, b) = (&verts[0], &verts[1]);
            let d = [b[0] - a[0], b[1] - a[1]];
            let n = [-d[1], d[0]];
            HPolyhedron::new(
                vec![
                    vec![n[0], n[1]],
                    vec![-n[0], -n[1]],
                    vec![d[0], d[1]],
                    vec![-d[0], -d[1]],
                ],
                vec![
                    n[0] * a[0] + n[1] * a[1],
                    -(n[0] * a[0] + n[1] * a[1]),
                    d[0] * a[0] + d[1] * a[1],
                    -(d[0] * b[0] + d[1] * b[1]),
                ],
            )
        }
        _ => {
            let mut a_rows = Vec::with_capacity(verts.len());
            let mut b_rhs = Vec::with_capacity(verts.len());
            for i in 0..verts.len() {
                let p = &verts[i];
                let q = &verts[(i + 1) % verts.len()];
                // Interior lies left of each CCW edge; (-dy, dx) points inward.
                let n = [-(q[1] - p[1]), q[0] - p[0]];
                a_rows.push(vec![n[0], n[1]]);
                b_rhs.push(n[0] * p[0] + n[1] * p[1]);
            }
            HPolyhedron::new(a_rows, b_rhs)
        }
    }
}

/// Minkowski sum of two 2-D polytopes (hull of pairwise vertex sums).
pub fn minkowski_sum_2d(a: &VPolytope, b: &VPolytope) -> Result<VPolytope> {
    if a.dim() != 2 || b.dim() != 2 {
        return Err(Error::Input("minkowski_sum_2d requires 2-dimensional inputs".into()));
    }
    let mut sums = Vec::with_capacity(a.num_vertices() * b.num_vertices());
    for va in &a.vertices {
        for vb in &b.vertices {
            sums.push(vec![va[0] + vb[0], va[1] + vb[1]]);
        }
    }
    convex_hull_2d(&sums)
}

// ---------------------------------------------------------------------------
// Support values
// ---------------------------------------------------------------------------

/// Minimum of `lambda . P` over the set.
pub fn support_value(set: PolySet<'_>, lambda: &[f64]) -> Result<Support> {
    match set {
        PolySet::V(v) => {
            if v.dim() != lambda.len() {
                return Err(Error::Input("direction dimension mismatch".into()));
            }
            let m = v
                .vertices
                .iter()
                .map(|vert| dot(lambda, vert))
                .fold(f64::INFINITY, f64::min);
            Ok(Support::Value(m))
        }
        PolySet::H(h) => {
            if h.dim() != lambda.len() {
                return Err(Error::Input("direction dimension mismatch".into()));
            }
            let mut lp = LpProblem {
                sense: Sense::Min,
                cost: lambda.to_vec(),
                constraints: Vec::new(),
                bounds: vec![(f64::NEG_INFINITY, f64::INFINITY); h.dim()],
            };
            for (row, &bi) in h.a.iter().zip(&h.b) {
                lp.add_constraint(row.clone(), Relation::Ge, bi);
            }
            let sol = solve_lp(&lp)?;
            match sol.status {
                LpStatus::Optimal => Ok(Support::Value(sol.value)),
                LpStatus::Unbounded => Ok(Support::Unbounded),
                LpStatus::Infeasible => Err(Error::Infeasible("support over an empty set".into())),
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Containment
// ---------------------------------------------------------------------------

/// Decide `H subset of V`.
///
/// `VertexEnum` requires `d = 2`.  An unbounded H-set can never fit inside a
/// polytope; the verdict is then false with a witness taken far along a
/// recession direction.
pub fn contains_h_in_v(h: &HPolyhedron, v: &VPolytope, method: Method) -> Result<ContainmentVerdict> {
    if h.dim() != v.dim() {
        return Err(Error::Input(format!(
            "dimension mismatch: H has d = {}, V has d = {}",
            h.dim(),
            v.dim()
        )));
    }
    if !is_bounded(h)? {
        let witness = recession_witness(h, v)?;
        return Ok(ContainmentVerdict {
            contained: false,
            witness: Some(witness),
            method,
        });
    }
    match method {
        Method::VertexEnum => {
            if h.dim() != 2 {
                return Err(Error::Input(
                    "vertex-enumeration containment requires d = 2".into(),
                ));
            }
            for vert in vertex_enumerate_2d(h)? {
                let (inside, _) = vpolytope_membership(&vert, v)?;
                if !inside {
                    return Ok(ContainmentVerdict {
                        contained: false,
                        witness: Some(vert),
                        method,
                    });
                }
            }
            Ok(ContainmentVerdict {
                contained: true,
                witness: None,
                method,
            })
        }
        Method::RobustMilp => robust_containment(h, v),
    }
}

/// Point of H far along a recession direction, scaled to leave V.
fn recession_witness(h: &HPolyhedron, v: &VPolytope) -> Result<Vec<f64>> {
    let start = any_point(h)?;
    let dir = recession_direction(h)?.ok_or_else(|| {
        Error::Internal("unbounded polyhedron must admit a recession direction".into())
    })?;
    let norm = dir.iter().fold(0.0f64, |m, &x| m.max(x.abs()));
    let reach = v.max_abs_coord() + start.iter().fold(0.0f64, |m, &x| m.max(x.abs())) + 1.0;
    let mut scale = 4.0 * reach / norm;
    for _ in 0..8 {
        let w: Vec<f64> = start.iter().zip(&dir).map(|(s, d)| s + scale * d).collect();
        let (inside, _) = vpolytope_membership(&w, v)?;
        if !inside {
            return Ok(w);
        }
        scale *= 4.0;
    }
    Err(Error::Internal(
        "failed to escape the polytope along a recession direction".into(),
    ))
}

/// KKT/big-M containment: over all `P` in the H-set, maximize the deviation
/// between `P` and its projection `Gamma alpha` onto the V-set, with the
/// inner projection replaced by its stationarity and complementarity system.
///
/// Complementarity is linearized with binaries `eps1, eps2` and a big-M that
/// is recomputed per instance and audited after the solve.  The outer
/// objective maximizes `sign * (P - Gamma alpha)_i` per coordinate and sign;
/// the largest optimum is zero exactly when every point of H coincides with
/// its projection, so the verdict matches the squared-distance formulation.
fn robust_containment(h: &HPolyhedron, v: &VPolytope) -> Result<ContainmentVerdict> {
    let nv = v.num_vertices();
    let (lo, hi) = bounding_box(h)?;
    let coord_max = v
        .max_abs_coord()
        .max(lo.iter().chain(hi.iter()).fold(0.0f64, |m, &x| m.max(x.abs())));
    let mut gram = vec![vec![0.0; nv]; nv];
    let mut gram_scale = 1.0f64;
    for i in 0..nv {
        for j in 0..nv {
            let g = dot(&v.vertices[i], &v.vertices[j]);
            gram[i][j] = g;
            gram_scale = gram_scale.max(g.abs());
        }
    }
    let mut big_m = 2.0 * (1.0 + coord_max) * gram_scale;

    for _escalation in 0..4 {
        match robust_milp_pass(h, v, &gram, big_m)? {
            Some((dist, witness, audit_ok)) => {
                if !audit_ok {
                    big_m *= 2.0;
                    continue;
                }
                if dist <= tol::DIST_TOL {
                    return Ok(ContainmentVerdict {
                        contained: true,
                        witness: None,
                        method: Method::RobustMilp,
                    });
                }
                return Ok(ContainmentVerdict {
                    contained: false,
                    witness: Some(witness),
                    method: Method::RobustMilp,
                });
            }
            // Infeasible KKT system: the multipliers did not fit within M.
            None => {
                big_m *= 2.0;
            }
        }
    }
    Err(Error::Numeric(
        "robust containment: big-M escalation did not stabilize".into(),
    ))
}

/// One sweep of the 2d MILPs at a fixed big-M.  Returns the surrogate
/// distance, the maximizing point, and whether the big-M audit passed;
/// `None` when the KKT system is infeasible at this M.
fn robust_milp_pass(
    h: &HPolyhedron,
    v: &VPolytope,
    gram: &[Vec<f64>],
    big_m: f64,
) -> Result<Option<(f64, Vec<f64>, bool)>> {
    let d = h.dim();
    let nv = v.num_vertices();
    // Columns: alpha (nv) | P (d) | mu | nu1 (nv) | nu2 (nv) | eps1 (nv) | eps2 (nv)
    let col_alpha = 0;
    let col_p = col_alpha + nv;
    let col_mu = col_p + d;
    let col_nu1 = col_mu + 1;
    let col_nu2 = col_nu1 + nv;
    let col_eps1 = col_nu2 + nv;
    let col_eps2 = col_eps1 + nv;
    let ncols = col_eps2 + nv;

    let mut bounds = vec![(0.0, 1.0); nv];
    bounds.extend(vec![(f64::NEG_INFINITY, f64::INFINITY); d]); // P
    bounds.push((f64::NEG_INFINITY, f64::INFINITY)); // mu
    bounds.extend(vec![(-big_m, 0.0); 2 * nv]); // nu1, nu2
    bounds.extend(vec![(0.0, 1.0); 2 * nv]); // eps1, eps2

    let mut base = LpProblem {
        sense: Sense::Max,
        cost: vec![0.0; ncols],
        constraints: Vec::new(),
        bounds,
    };

    // P in the H-set.
    for (row, &bi) in h.a.iter().zip(&h.b) {
        let mut coeffs = vec![0.0; ncols];
        for i in 0..d {
            coeffs[col_p + i] = row[i];
        }
        base.add_constraint(coeffs, Relation::Ge, bi);
    }
    // 1' alpha = 1.
    {
        let mut coeffs = vec![0.0; ncols];
        for w in 0..nv {
            coeffs[col_alpha + w] = 1.0;
        }
        base.add_constraint(coeffs, Relation::Eq, 1.0);
    }
    // Stationarity: 2 Gamma'(Gamma alpha - P) + mu 1 + nu1 - nu2 = 0.
    for w in 0..nv {
        let mut coeffs = vec![0.0; ncols];
        for u in 0..nv {
            coeffs[col_alpha + u] = 2.0 * gram[w][u];
        }
        for i in 0..d {
            coeffs[col_p + i] = -2.0 * v.vertices[w][i];
        }
        coeffs[col_mu] = 1.0;
        coeffs[col_nu1 + w] = 1.0;
        coeffs[col_nu2 + w] = -1.0;
        base.add_constraint(coeffs, Relation::Eq, 0.0);
    }
    // Complementarity, big-M linearized:
    //   alpha <= eps1 M,    -(1 - eps1) M <= nu1,
    //   1 - alpha <= eps2 M,  -(1 - eps2) M <= nu2.
    for w in 0..nv {
        let mut c1 = vec![0.0; ncols];
        c1[col_alpha + w] = -1.0;
        c1[col_eps1 + w] = big_m;
        base.add_constraint(c1, Relation::Ge, 0.0);

        let mut c2 = vec![0.0; ncols];
        c2[col_nu1 + w] = 1.0;
        c2[col_eps1 + w] = -big_m;
        base.add_constraint(c2, Relation::Ge, -big_m);

        let mut c3 = vec![0.0; ncols];
        c3[col_alpha + w] = 1.0;
        c3[col_eps2 + w] = big_m;
        base.add_constraint(c3, Relation::Ge, 1.0);

        let mut c4 = vec![0.0; ncols];
        c4[col_nu2 + w] = 1.0;
        c4[col_eps2 + w] = -big_m;
        base.add_constraint(c4, Relation::Ge, -big_m);
    }

    let binaries: Vec<usize> = (col_eps1..col_eps1 + 2 * nv).collect();
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut audit_ok = true;

    for coord in 0..d {
        for sign in [1.0, -1.0] {
            let mut prob = base.clone();
            prob.cost[col_p + coord] = sign;
            for w in 0..nv {
                prob.cost[col_alpha + w] = -sign * v.vertices[w][coord];
            }
            let milp = MilpProblem {
                lp: prob,
                binaries: binaries.clone(),
            };
            let sol = solve_milp_with(
                &milp,
                &MilpOptions {
                    node_budget: 2_000_000,
                    ..Default::default()
                },
            )?;
            if sol.status == MilpStatus::Infeasible {
                return Ok(None);
            }
            for w in 0..nv {
                let n1 = sol.x[col_nu1 + w];
                let n2 = sol.x[col_nu2 + w];
                if n1 <= -big_m * (1.0 - 1e-6) || n2 <= -big_m * (1.0 - 1e-6) {
                    audit_ok = false;
                }
            }
            let p_val: Vec<f64> = (0..d).map(|i| sol.x[col_p + i]).collect();
            if best.as_ref().map(|(b, _)| sol.value > *b).unwrap_or(true) {
                best = Some((sol.value, p_val));
            }
        }
    }

    let (dist, witness) = best.expect("at least one coordinate objective");
    Ok(Some((dist, witness, audit_ok)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Stream;

    fn unit_square_h() -> HPolyhedron {
        HPolyhedron::new(
            vec![
                vec![1.0, 0.0],
                vec![0.0, 1.0],
                vec![-1.0, 0.0],
                vec![0.0, -1.0],
            ],
            vec![0.0, 0.0, -1.0, -1.0],
        )
        .unwrap()
    }

    fn square_corners() -> Vec<Vec<f64>> {
        vec![
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![1.0, 1.0],
            vec![0.0, 1.0],
        ]
    }

    #[test]
    fn hull_of_square_with_interior_point() {
        let mut pts = square_corners();
        pts.push(vec![0.5, 0.5]);
        let hull = convex_hull_2d(&pts).unwrap();
        assert_eq!(hull.num_vertices(), 4);
        assert_eq!(hull.vertices[0], vec![0.0, 0.0]); // lexicographically smallest first
        assert!(polygon_area(&hull.vertices) > 0.0); // counterclockwise
    }

    #[test]
    fn hull_of_collinear_points_is_segment() {
        let pts = vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![2.0, 2.0]];
        let hull = convex_hull_2d(&pts).unwrap();
        assert_eq!(hull.num_vertices(), 2);
        assert_eq!(hull.vertices[0], vec![0.0, 0.0]);
        assert_eq!(hull.vertices[1], vec![2.0, 2.0]);
    }

    #[test]
    fn hull_rejects_wrong_dimension() {
        assert!(convex_hull_2d(&[vec![0.0, 1.0, 2.0]]).is_err());
    }

    /// Brute-force oracle: a point is a hull vertex iff it is not a convex
    /// combination of the other points (membership LP per point).
    fn brute_hull(points: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let mut keep = Vec::new();
        for (i, p) in points.iter().enumerate() {
            let others: Vec<Vec<f64>> = points
                .iter()
                .enumerate()
                .filter(|(j, q)| *j != i && *q != p)
                .map(|(_, q)| q.clone())
                .collect();
            if others.is_empty() {
                keep.push(p.clone());
                continue;
            }
            let v = VPolytope::new(others).unwrap();
            let (inside, _) = vpolytope_membership(p, &v).unwrap();
            if !inside {
                keep.push(p.clone());
            }
        }
        keep
    }

    #[test]
    fn hull_matches_membership_oracle() {
        let mut stream = Stream::new(2024, "hull", 0);
        let pts: Vec<Vec<f64>> = (0..20)
            .map(|_| vec![stream.next_range(-2.0, 2.0), stream.next_range(-2.0, 2.0)])
            .collect();
        let hull = convex_hull_2d(&pts).unwrap();
        let oracle = brute_hull(&pts);
        assert_eq!(hull.num_vertices(), oracle.len());
        for v in &hull.vertices {
            assert!(
                oracle
                    .iter()
                    .any(|o| (o[0] - v[0]).abs() < 1e-9 && (o[1] - v[1]).abs() < 1e-9),
                "hull vertex {v:?} not in oracle set"
            );
        }
    }

    #[test]
    fn membership_centroid_of_triangle() {
        let v = VPolytope::new(vec![vec![0.0, 0.0], vec![3.0, 0.0], vec![0.0, 3.0]]).unwrap();
        let (inside, alpha) = vpolytope_membership(&[1.0, 1.0], &v).unwrap();
        assert!(inside);
        let alpha = alpha.unwrap();
        for a in &alpha {
            assert!((a - 1.0 / 3.0).abs() < 1e-7, "alpha {alpha:?}");
        }
    }

    #[test]
    fn membership_rejects_outside_point() {
        let v = VPolytope::new(square_corners()).unwrap();
        let (inside, w) = vpolytope_membership(&[5.0, 5.0], &v).unwrap();
        assert!(!inside);
        assert!(w.is_none());
    }

    /// Ray-casting point-in-polygon oracle for CCW polygons.
    fn ray_cast(p: &[f64], poly: &[Vec<f64>]) -> bool {
        let n = poly.len();
        for i in 0..n {
            let a = &poly[i];
            let b = &poly[(i + 1) % n];
            let cr = cross(a, b, &p.to_vec());
            let within = p[0] >= a[0].min(b[0]) - 1e-9
                && p[0] <= a[0].max(b[0]) + 1e-9
                && p[1] >= a[1].min(b[1]) - 1e-9
                && p[1] <= a[1].max(b[1]) + 1e-9;
            if cr.abs() < 1e-9 && within {
                return true;
            }
        }
        let mut inside = false;
        let mut j = n - 1;
        for i in 0..n {
            let (xi, yi) = (poly[i][0], poly[i][1]);
            let (xj, yj) = (poly[j][0], poly[j][1]);
            if (yi > p[1]) != (yj > p[1]) {
                let x_int = xj + (p[1] - yj) / (yi - yj) * (xi - xj);
                if p[0] < x_int {
                    inside = !inside;
                }
            }
            j = i;
        }
        inside
    }

    #[test]
    fn membership_matches_ray_casting() {
        let mut stream = Stream::new(99, "raycast", 0);
        let pts: Vec<Vec<f64>> = (0..8)
            .map(|_| vec![stream.next_range(-1.0, 1.0), stream.next_range(-1.0, 1.0)])
            .collect();
        let hull = convex_hull_2d(&pts).unwrap();
        assert!(hull.num_vertices() >= 3, "degenerate test geometry");
        let mut disagreements = 0;
        for _ in 0..50 {
            let q = vec![stream.next_range(-1.3, 1.3), stream.next_range(-1.3, 1.3)];
            let (lp_inside, _) = vpolytope_membership(&q, &hull).unwrap();
            let rc_inside = ray_cast(&q, &hull.vertices);
            // Points within tolerance of the boundary may legitimately differ.
            let d = l1_distance_to_vpolytope(&q, &hull).unwrap();
            if (d > 1e-6 || lp_inside) && lp_inside != rc_inside {
                disagreements += 1;
            }
        }
        assert_eq!(disagreements, 0);
    }

    #[test]
    fn enumerate_unit_square() {
        let verts = vertex_enumerate_2d(&unit_square_h()).unwrap();
        assert_eq!(verts.len(), 4);
        let expect = square_corners();
        for e in &expect {
            assert!(verts
                .iter()
                .any(|v| (v[0] - e[0]).abs() < 1e-7 && (v[1] - e[1]).abs() < 1e-7));
        }
        assert_eq!(verts[0], vec![0.0, 0.0]);
    }

    #[test]
    fn enumerate_unbounded_errors() {
        let h = HPolyhedron::new(vec![vec![1.0, 0.0]], vec![0.0]).unwrap();
        assert!(matches!(vertex_enumerate_2d(&h), Err(Error::Unbounded(_))));
    }

    #[test]
    fn enumerated_vertices_are_feasible_and_extreme() {
        for i in 0..15 {
            let mut stream = Stream::new(300, "venum", i);
            let mut a = vec![
                vec![1.0, 0.0],
                vec![0.0, 1.0],
                vec![-1.0, 0.0],
                vec![0.0, -1.0],
            ];
            let mut b = vec![-3.0, -3.0, -3.0, -3.0];
            for _ in 0..stream.next_index(7) {
                let th = stream.next_range(0.0, std::f64::consts::TAU);
                a.push(vec![th.cos(), th.sin()]);
                b.push(stream.next_range(-2.5, 0.5));
            }
            let h = HPolyhedron::new(a, b).unwrap();
            let verts = match vertex_enumerate_2d(&h) {
                Ok(v) => v,
                Err(_) => continue, // cut down to the empty set
            };
            for (k, v) in verts.iter().enumerate() {
                assert!(h.contains(v));
                if verts.len() > 1 {
                    let others: Vec<Vec<f64>> = verts
                        .iter()
                        .enumerate()
                        .filter(|(j, _)| *j != k)
                        .map(|(_, q)| q.clone())
                        .collect();
                    let vp = VPolytope::new(others).unwrap();
                    let (inside, _) = vpolytope_membership(v, &vp).unwrap();
                    assert!(!inside, "vertex {v:?} is a convex combination of the rest");
                }
            }
        }
    }

    #[test]
    fn containment_identical_sets() {
        let h = unit_square_h();
        let v = VPolytope::new(square_corners()).unwrap();
        for method in [Method::VertexEnum, Method::RobustMilp] {
            let verdict = contains_h_in_v(&h, &v, method).unwrap();
            assert!(verdict.contained, "method {method:?}");
            assert!(verdict.witness.is_none());
        }
    }

    #[test]
    fn containment_square_in_triangle_fails_near_corner() {
        let h = unit_square_h();
        let v = VPolytope::new(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        for method in [Method::VertexEnum, Method::RobustMilp] {
            let verdict = contains_h_in_v(&h, &v, method).unwrap();
            assert!(!verdict.contained);
            let w = verdict.witness.unwrap();
            assert!(h.contains(&w));
            assert!(
                (w[0] - 1.0).abs() < 1e-5 && (w[1] - 1.0).abs() < 1e-5,
                "witness {w:?} should be near (1,1)"
            );
        }
    }

    #[test]
    fn containment_unbounded_h_is_false_with_witness() {
        let h = HPolyhedron::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]], vec![0.0, 0.0]).unwrap();
        let v = VPolytope::new(square_corners()).unwrap();
        let verdict = contains_h_in_v(&h, &v, Method::RobustMilp).unwrap();
        assert!(!verdict.contained);
        let w = verdict.witness.unwrap();
        assert!(h.contains(&w));
        let (inside, _) = vpolytope_membership(&w, &v).unwrap();
        assert!(!inside);
    }

    #[test]
    fn containment_methods_agree_on_seeded_instances() {
        // A slice of the 100-instance acceptance battery.
        let mut checked = 0;
        for i in 0..20 {
            let mut stream = Stream::new(555, "contain", i);
            let pts: Vec<Vec<f64>> = (0..4 + stream.next_index(6))
                .map(|_| vec![stream.next_range(-2.0, 2.0), stream.next_range(-2.0, 2.0)])
                .collect();
            let v = convex_hull_2d(&pts).unwrap();
            if v.num_vertices() < 3 {
                continue;
            }
            let h = if i % 2 == 0 {
                v_to_h_2d(&v).unwrap()
            } else {
                let f = stream.next_range(0.3, 1.4);
                let hx = VPolytope::new(
                    v.vertices
                        .iter()
                        .map(|p| vec![p[0] * f, p[1] * f])
                        .collect(),
                )
                .unwrap();
                v_to_h_2d(&hx).unwrap()
            };
            let a = contains_h_in_v(&h, &v, Method::VertexEnum).unwrap();
            let b = contains_h_in_v(&h, &v, Method::RobustMilp).unwrap();
            assert_eq!(a.contained, b.contained, "instance {i}");
            checked += 1;
        }
        assert!(checked >= 10);
    }

    #[test]
    fn support_values() {
        let h = unit_square_h();
        let v = VPolytope::new(square_corners()).unwrap();
        assert_eq!(
            support_value(PolySet::H(&h), &[1.0, 1.0]).unwrap(),
            Support::Value(0.0)
        );
        match support_value(PolySet::H(&h), &[-1.0, -1.0]).unwrap() {
            Support::Value(x) => assert!((x + 2.0).abs() < 1e-9),
            _ => panic!(),
        }
        match support_value(PolySet::V(&v), &[-1.0, -1.0]).unwrap() {
            Support::Value(x) => assert!((x + 2.0).abs() < 1e-9),
            _ => panic!(),
        }
    }

    #[test]
    fn support_agrees_across_representations() {
        let mut stream = Stream::new(808, "support", 0);
        let pts: Vec<Vec<f64>> = (0..12)
            .map(|_| vec![stream.next_range(-3.0, 3.0), stream.next_range(-3.0, 3.0)])
            .collect();
        let v = convex_hull_2d(&pts).unwrap();
        assert!(v.num_vertices() >= 3, "degenerate test geometry");
        let h = v_to_h_2d(&v).unwrap();
        for _ in 0..100 {
            let th = stream.next_range(0.0, std::f64::consts::TAU);
            let lam = [th.cos(), th.sin()];
            let sv = support_value(PolySet::V(&v), &lam).unwrap().value().unwrap();
            let sh = support_value(PolySet::H(&h), &lam).unwrap().value().unwrap();
            assert!((sv - sh).abs() < 1e-8, "direction {lam:?}: {sv} vs {sh}");
        }
    }

    #[test]
    fn boundedness_basic() {
        assert!(is_bounded(&unit_square_h()).unwrap());
        let halfplane = HPolyhedron::new(vec![vec![1.0, 0.0]], vec![0.0]).unwrap();
        assert!(!is_bounded(&halfplane).unwrap());
        let empty = HPolyhedron::new(vec![vec![1.0, 0.0], vec![-1.0, 0.0]], vec![1.0, 0.0]).unwrap();
        assert!(matches!(is_bounded(&empty), Err(Error::Infeasible(_))));
    }

    #[test]
    fn boundedness_matches_recession_cone() {
        for i in 0..20 {
            let mut stream = Stream::new(71, "recession", i);
            let m = 2 + stream.next_index(6);
            let a: Vec<Vec<f64>> = (0..m)
                .map(|_| {
                    let th = stream.next_range(0.0, std::f64::consts::TAU);
                    vec![th.cos(), th.sin()]
                })
                .collect();
            let b: Vec<f64> = (0..m).map(|_| stream.next_range(-1.0, 0.0)).collect();
            let h = HPolyhedron::new(a, b).unwrap();
            let bounded = match is_bounded(&h) {
                Ok(x) => x,
                Err(_) => continue,
            };
            let ray = recession_direction(&h).unwrap();
            assert_eq!(bounded, ray.is_none(), "instance {i}");
        }
    }

    #[test]
    fn hull_idempotence_and_monotonicity() {
        let mut stream = Stream::new(1717, "idem", 0);
        for _ in 0..10 {
            let pts: Vec<Vec<f64>> = (0..10)
                .map(|_| vec![stream.next_range(-1.0, 1.0), stream.next_range(-1.0, 1.0)])
                .collect();
            let h1 = convex_hull_2d(&pts).unwrap();
            let h2 = convex_hull_2d(&h1.vertices).unwrap();
            assert_eq!(h1.vertices, h2.vertices);

            // Monotonicity: vertices of hull(subset) are members of hull(set).
            let sub: Vec<Vec<f64>> = pts.iter().take(5).cloned().collect();
            let hs = convex_hull_2d(&sub).unwrap();
            for v in &hs.vertices {
                let (inside, _) = vpolytope_membership(v, &h1).unwrap();
                assert!(inside);
            }
        }
    }

    #[test]
    fn minkowski_sum_of_boxes() {
        let a = VPolytope::new(square_corners()).unwrap();
        let b = VPolytope::new(vec![
            vec![0.0, 0.0],
            vec![2.0, 0.0],
            vec![2.0, 2.0],
            vec![0.0, 2.0],
        ])
        .unwrap();
        let s = minkowski_sum_2d(&a, &b).unwrap();
        assert_eq!(s.num_vertices(), 4);
        assert!((polygon_area(&s.vertices) - 9.0).abs() < 1e-9);
    }
}
