//! Storage-like flexible-load model and its LP response oracle.
//!
//! A model aggregates virtual batteries (temporally coupled through the
//! retention ratio `sigma`), time-decoupled adjustable loads, and fixed
//! loads.  For a battery the stored energy after period `t` (1-based) is
//!
//! ```text
//! E_t = sigma^t * e0 + dt * sum_{j<=t} sigma^(t-j) * P_j
//! ```
//!
//! which is the lower-triangular coupling `Upsilon1 P dt + e0 Upsilon2`
//! with `(Upsilon1)_{ij} = sigma^(i-j)` for `i >= j` and
//! `(Upsilon2)_i = sigma^i`.  Energy bounds bind for `t = 1..T`; the
//! initial state `e0` and `sigma` are prescribed inputs, never identified.
//!
//! The response to a price vector is the lexicographically smallest
//! minimizer of `lambda . P` over the aggregate region, so datasets and
//! figures are reproducible even under degenerate prices.

use crate::error::{Error, Result};
use crate::polyhedra::{minkowski_sum_2d, vertex_enumerate_2d, HPolyhedron, VPolytope};
use crate::solver::{solve_lp, LpProblem, LpStatus, Relation, Sense};
use crate::tol;
use serde::{Deserialize, Serialize};

/// Virtual-battery component parameters (power in kW, energy in kWh).
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct BatteryParams {
    pub p_min: Vec<f64>,
    pub p_max: Vec<f64>,
    pub e_min: Vec<f64>,
    pub e_max: Vec<f64>,
    pub e0: f64,
    pub sigma: f64,
}

/// Time-decoupled adjustable load: an independent power box per period.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct TdLoadParams {
    pub p_min: Vec<f64>,
    pub p_max: Vec<f64>,
}

/// Fixed load profile.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct FixedLoadParams {
    pub profile: Vec<f64>,
}

/// The assembled flexible-load model over `T` periods.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct FlexModel {
    pub schema_version: u32,
    #[serde(rename = "T")]
    pub t: usize,
    pub dt: f64,
    pub batteries: Vec<BatteryParams>,
    pub td_loads: Vec<TdLoadParams>,
    pub fixed_loads: Vec<FixedLoadParams>,
}

/// Response of the model to one price vector.
#[derive(Debug, Clone)]
pub struct Response {
    /// Aggregate power profile; the lexicographically smallest optimum.
    pub p_star: Vec<f64>,
    /// `lambda . p_star`.
    pub objective: f64,
    /// False when the optimal face has dimension >= 1.
    pub unique: bool,
}

/// What a constraint row of the assembled region encodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowKind {
    EnergyLo,
    EnergyHi,
    PowerLo,
    PowerHi,
}

/// Row annotation: adjustable component index (batteries first, then
/// time-decoupled loads) and 0-based period.
#[derive(Debug, Clone, Copy)]
pub struct RowLabel {
    pub kind: RowKind,
    pub component: usize,
    pub period: usize,
}

/// H-representation of the stacked component powers plus the map back to
/// the aggregate: `P_t = sum_c stacked[c*T + t] + fixed_total[t]`.
#[derive(Debug, Clone)]
pub struct AssembledRegion {
    pub h: HPolyhedron,
    pub labels: Vec<RowLabel>,
    /// Number of adjustable components (each owns `T` contiguous variables).
    pub num_components: usize,
    pub fixed_total: Vec<f64>,
    pub t: usize,
}

impl AssembledRegion {
    /// Aggregate profile for a stacked point.
    pub fn aggregate(&self, stacked: &[f64]) -> Vec<f64> {
        let mut p = self.fixed_total.clone();
        for c in 0..self.num_components {
            for t in 0..self.t {
                p[t] += stacked[c * self.t + t];
            }
        }
        p
    }
}

/// Coefficients of the energy row at 0-based period `i`: entry `k` is
/// `dt * sigma^(i-k)` for `k <= i`, zero otherwise.
pub fn energy_row_coeffs(sigma: f64, dt: f64, i: usize, t: usize) -> Vec<f64> {
    let mut row = vec![0.0; t];
    for (k, r) in row.iter_mut().enumerate().take(i + 1) {
        *r = dt * sigma.powi((i - k) as i32);
    }
    row
}

/// The lower-triangular coupling matrix and initial-energy decay vector.
pub fn upsilon(sigma: f64, t: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut u1 = vec![vec![0.0; t]; t];
    for (i, row) in u1.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate().take(i + 1) {
            *v = sigma.powi((i - j) as i32);
        }
    }
    let u2 = (1..=t).map(|i| sigma.powi(i as i32)).collect();
    (u1, u2)
}

impl FlexModel {
    pub fn new(
        t: usize,
        dt: f64,
        batteries: Vec<BatteryParams>,
        td_loads: Vec<TdLoadParams>,
        fixed_loads: Vec<FixedLoadParams>,
    ) -> Self {
        FlexModel {
            schema_version: 1,
            t,
            dt,
            batteries,
            td_loads,
            fixed_loads,
        }
    }

    pub fn num_adjustable(&self) -> usize {
        self.batteries.len() + self.td_loads.len()
    }

    pub fn fixed_total(&self) -> Vec<f64> {
        let mut p = vec![0.0; self.t];
        for f in &self.fixed_loads {
            for (t, v) in f.profile.iter().enumerate() {
                p[t] += v;
            }
        }
        p
    }

    /// Structural checks plus per-component nonemptiness; the first
    /// violated invariant names the component.
    pub fn validate(&self) -> Result<()> {
        if self.t == 0 {
            return Err(Error::ModelInvalid("T must be positive".into()));
        }
        if !(self.dt > 0.0) {
            return Err(Error::ModelInvalid(format!("dt must be positive, got {}", self.dt)));
        }
        if self.batteries.is_empty() && self.td_loads.is_empty() && self.fixed_loads.is_empty() {
            return Err(Error::ModelInvalid("model has no components".into()));
        }
        for (n, b) in self.batteries.iter().enumerate() {
            let name = format!("battery {n}");
            check_len(&b.p_min, self.t, &name, "p_min")?;
            check_len(&b.p_max, self.t, &name, "p_max")?;
            check_len(&b.e_min, self.t, &name, "e_min")?;
            check_len(&b.e_max, self.t, &name, "e_max")?;
            if !(b.sigma > 0.0 && b.sigma <= 1.0) {
                return Err(Error::ModelInvalid(format!(
                    "{name}: sigma must lie in (0, 1], got {}",
                    b.sigma
                )));
            }
            if !b.e0.is_finite() {
                return Err(Error::ModelInvalid(format!("{name}: e0 must be finite")));
            }
            for t in 0..self.t {
                if b.p_min[t] > b.p_max[t] {
                    return Err(Error::ModelInvalid(format!(
                        "{name}: p_min[{t}] > p_max[{t}]"
                    )));
                }
                if b.e_min[t] > b.e_max[t] {
                    return Err(Error::ModelInvalid(format!(
                        "{name}: e_min[{t}] > e_max[{t}]"
                    )));
                }
            }
            if !battery_nonempty(b, self.t, self.dt)? {
                return Err(Error::ModelInvalid(format!(
                    "{name}: power and energy windows admit no feasible profile"
                )));
            }
        }
        for (n, l) in self.td_loads.iter().enumerate() {
            let name = format!("td_load {n}");
            check_len(&l.p_min, self.t, &name, "p_min")?;
            check_len(&l.p_max, self.t, &name, "p_max")?;
            for t in 0..self.t {
                if l.p_min[t] > l.p_max[t] {
                    return Err(Error::ModelInvalid(format!(
                        "{name}: p_min[{t}] > p_max[{t}]"
                    )));
                }
            }
        }
        for (n, f) in self.fixed_loads.iter().enumerate() {
            let name = format!("fixed_load {n}");
            check_len(&f.profile, self.t, &name, "profile")?;
        }
        Ok(())
    }

    /// Constraint rows over the stacked component powers.
    ///
    /// Every power and energy bound becomes an explicit row so callers can
    /// attach one dual multiplier per physical constraint.
    pub fn assemble_region(&self) -> Result<AssembledRegion> {
        self.validate()?;
        let t = self.t;
        let nc = self.num_adjustable();
        let n = nc * t;
        let mut a: Vec<Vec<f64>> = Vec::new();
        let mut b: Vec<f64> = Vec::new();
        let mut labels: Vec<RowLabel> = Vec::new();

        for (nb, bat) in self.batteries.iter().enumerate() {
            let off = nb * t;
            for i in 0..t {
                let coeffs = energy_row_coeffs(bat.sigma, self.dt, i, t);
                let decay = bat.sigma.powi((i + 1) as i32) * bat.e0;
                // Lower: coeffs . P >= e_min - decay.
                let mut row = vec![0.0; n];
                row[off..off + t].copy_from_slice(&coeffs);
                a.push(row);
                b.push(bat.e_min[i] - decay);
                labels.push(RowLabel {
                    kind: RowKind::EnergyLo,
                    component: nb,
                    period: i,
                });
                // Upper: -coeffs . P >= -(e_max - decay).
                let mut row = vec![0.0; n];
                for (k, c) in coeffs.iter().enumerate() {
                    row[off + k] = -c;
                }
                a.push(row);
                b.push(-(bat.e_max[i] - decay));
                labels.push(RowLabel {
                    kind: RowKind::EnergyHi,
                    component: nb,
                    period: i,
                });
            }
            for i in 0..t {
                let mut row = vec![0.0; n];
                row[off + i] = 1.0;
                a.push(row);
                b.push(bat.p_min[i]);
                labels.push(RowLabel {
                    kind: RowKind::PowerLo,
                    component: nb,
                    period: i,
                });
                let mut row = vec![0.0; n];
                row[off + i] = -1.0;
                a.push(row);
                b.push(-bat.p_max[i]);
                labels.push(RowLabel {
                    kind: RowKind::PowerHi,
                    component: nb,
                    period: i,
                });
            }
        }
        for (nl, load) in self.td_loads.iter().enumerate() {
            let comp = self.batteries.len() + nl;
            let off = comp * t;
            for i in 0..t {
                let mut row = vec![0.0; n];
                row[off + i] = 1.0;
                a.push(row);
                b.push(load.p_min[i]);
                labels.push(RowLabel {
                    kind: RowKind::PowerLo,
                    component: comp,
                    period: i,
                });
                let mut row = vec![0.0; n];
                row[off + i] = -1.0;
                a.push(row);
                b.push(-load.p_max[i]);
                labels.push(RowLabel {
                    kind: RowKind::PowerHi,
                    component: comp,
                    period: i,
                });
            }
        }

        Ok(AssembledRegion {
            h: HPolyhedron::new(a, b)?,
            labels,
            num_components: nc,
            fixed_total: self.fixed_total(),
            t,
        })
    }

    /// Optimal aggregate response to a price vector.
    ///
    /// Solves `min lambda . P` over the aggregate region; on a degenerate
    /// optimal face the lexicographically smallest aggregate is returned and
    /// `unique` is false.
    pub fn respond(&self, lambda: &[f64]) -> Result<Response> {
        Ok(self.respond_stacked(lambda, true)?.0)
    }

    /// Like `respond`, but skips the uniqueness probe (bulk generation).
    pub(crate) fn respond_point(&self, lambda: &[f64]) -> Result<Vec<f64>> {
        Ok(self.respond_stacked(lambda, false)?.0.p_star)
    }

    /// Full response including the optimal stacked component split.
    pub fn respond_stacked(
        &self,
        lambda: &[f64],
        probe_unique: bool,
    ) -> Result<(Response, Vec<f64>)> {
        if lambda.len() != self.t {
            return Err(Error::Input(format!(
                "price vector length {} does not match T = {}",
                lambda.len(),
                self.t
            )));
        }
        let region = self.assemble_region()?;
        let t = self.t;
        let nc = region.num_components;

        if nc == 0 {
            // Fixed loads only: the region is a singleton.
            let p = region.fixed_total.clone();
            let objective = dot(lambda, &p);
            return Ok((
                Response {
                    p_star: p,
                    objective,
                    unique: true,
                },
                Vec::new(),
            ));
        }

        // Normalize the direction so the tie-break is scale-free: the
        // argmin set of c*lambda is that of lambda for any c > 0.
        let orig_lambda = lambda;
        let scale = lambda.iter().fold(0.0f64, |m, &x| m.max(x.abs()));
        let lam_hat: Vec<f64> = if scale > 0.0 {
            lambda.iter().map(|&x| x / scale).collect()
        } else {
            lambda.to_vec()
        };
        let lambda = &lam_hat[..];

        let n = nc * t;
        let base = {
            let mut lp = LpProblem {
                sense: Sense::Min,
                cost: vec![0.0; n],
                constraints: Vec::new(),
                bounds: vec![(f64::NEG_INFINITY, f64::INFINITY); n],
            };
            for (row, &bi) in region.h.a.iter().zip(&region.h.b) {
                lp.add_constraint(row.clone(), Relation::Ge, bi);
            }
            lp
        };

        // Stage 0: minimize the price objective.
        let mut lp = base.clone();
        for c in 0..nc {
            for i in 0..t {
                lp.cost[c * t + i] = lambda[i];
            }
        }
        let sol = solve_lp(&lp)?;
        if sol.status != LpStatus::Optimal {
            return Err(Error::Internal(
                "response LP must be solvable for a validated model".into(),
            ));
        }
        let stacked_obj = sol.value;

        // Lexicographic refinement over aggregate coordinates.  The pin
        // slack must stay well below the 1e-9 optimality budget that
        // downstream geometry (Lambda P >= Xi - 1e-9) relies on.
        let mut lex = base.clone();
        let pin_tol = 1e-12 * (1.0 + stacked_obj.abs());
        lex.add_constraint(lp.cost.clone(), Relation::Le, stacked_obj + pin_tol);
        let mut stacked = sol.x;
        for i in 0..t {
            let mut coord_cost = vec![0.0; n];
            for c in 0..nc {
                coord_cost[c * t + i] = 1.0;
            }
            lex.cost = coord_cost.clone();
            let s = solve_lp(&lex)?;
            if s.status != LpStatus::Optimal {
                return Err(Error::Internal("lexicographic stage must be solvable".into()));
            }
            let coord_tol = 1e-12 * (1.0 + s.value.abs());
            lex.add_constraint(coord_cost, Relation::Le, s.value + coord_tol);
            stacked = s.x;
        }

        let p_star = region.aggregate(&stacked);
        let objective = dot(orig_lambda, &p_star);

        // Uniqueness: the optimal face is a point iff every aggregate
        // coordinate has zero range over it.
        let mut unique = true;
        if probe_unique {
            let mut face = base.clone();
            let mut face_cost = vec![0.0; n];
            for c in 0..nc {
                for i in 0..t {
                    face_cost[c * t + i] = lambda[i];
                }
            }
            face.add_constraint(face_cost, Relation::Le, stacked_obj + pin_tol);
            'coords: for i in 0..t {
                let mut coord_cost = vec![0.0; n];
                for c in 0..nc {
                    coord_cost[c * t + i] = 1.0;
                }
                let mut lo_lp = face.clone();
                lo_lp.cost = coord_cost.clone();
                let lo = solve_lp(&lo_lp)?;
                let mut hi_lp = face.clone();
                hi_lp.sense = Sense::Max;
                hi_lp.cost = coord_cost;
                let hi = solve_lp(&hi_lp)?;
                if let (LpStatus::Optimal, LpStatus::Optimal) = (lo.status, hi.status) {
                    if hi.value - lo.value > tol::FEAS_TOL {
                        unique = false;
                        break 'coords;
                    }
                }
            }
        }

        Ok((
            Response {
                p_star,
                objective,
                unique,
            },
            stacked,
        ))
    }

    /// Per-component contribution to the optimal objective; the pieces sum
    /// to `respond(lambda).objective` because the LP separates.
    pub fn support_decomposition(&self, lambda: &[f64]) -> Result<Vec<f64>> {
        if lambda.len() != self.t {
            return Err(Error::Input("price vector length mismatch".into()));
        }
        self.validate()?;
        let mut parts = Vec::new();
        for bat in &self.batteries {
            parts.push(battery_support(bat, lambda, self.t, self.dt)?);
        }
        for load in &self.td_loads {
            let mut v = 0.0;
            for i in 0..self.t {
                v += if lambda[i] >= 0.0 {
                    lambda[i] * load.p_min[i]
                } else {
                    lambda[i] * load.p_max[i]
                };
            }
            parts.push(v);
        }
        for f in &self.fixed_loads {
            parts.push(dot(lambda, &f.profile));
        }
        Ok(parts)
    }

    /// The aggregate feasible region as a 2-D polytope (T = 2 only):
    /// Minkowski sum of the component polygons.
    pub fn aggregate_polytope_2d(&self) -> Result<VPolytope> {
        if self.t != 2 {
            return Err(Error::Input(format!(
                "aggregate polytope projection requires T = 2, got {}",
                self.t
            )));
        }
        self.validate()?;
        let mut acc: Option<VPolytope> = None;
        let mut push = |poly: VPolytope, acc: &mut Option<VPolytope>| -> Result<()> {
            *acc = Some(match acc.take() {
                None => poly,
                Some(cur) => minkowski_sum_2d(&cur, &poly)?,
            });
            Ok(())
        };
        for bat in &self.batteries {
            let h = battery_h_2d(bat, self.dt);
            let verts = vertex_enumerate_2d(&h)?;
            push(VPolytope::new(verts)?, &mut acc)?;
        }
        for load in &self.td_loads {
            let corners = vec![
                vec![load.p_min[0], load.p_min[1]],
                vec![load.p_max[0], load.p_min[1]],
                vec![load.p_max[0], load.p_max[1]],
                vec![load.p_min[0], load.p_max[1]],
            ];
            push(crate::polyhedra::convex_hull_2d(&corners)?, &mut acc)?;
        }
        for f in &self.fixed_loads {
            push(VPolytope::new(vec![f.profile.clone()])?, &mut acc)?;
        }
        acc.ok_or_else(|| Error::ModelInvalid("model has no components".into()))
    }

    pub fn to_json_string(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let m: FlexModel =
            serde_json::from_str(s).map_err(|e| Error::Parse(format!("model file: {e}")))?;
        m.validate()?;
        Ok(m)
    }

    pub fn save_file(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, self.to_json_string()? + "\n")?;
        Ok(())
    }

    pub fn load_file(path: &std::path::Path) -> Result<Self> {
        let s = std::fs::read_to_string(path)?;
        Self::from_json_str(&s)
    }
}

fn check_len(v: &[f64], t: usize, comp: &str, field: &str) -> Result<()> {
    if v.len() != t {
        return Err(Error::ModelInvalid(format!(
            "{comp}: {field} has length {}, expected T = {t}",
            v.len()
        )));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::ModelInvalid(format!("{comp}: {field} must be finite")));
    }
    Ok(())
}

/// 2-D H-representation of a single battery's feasible power set.
fn battery_h_2d(b: &BatteryParams, dt: f64) -> HPolyhedron {
    let t = 2;
    let mut a = Vec::new();
    let mut rhs = Vec::new();
    for i in 0..t {
        let coeffs = energy_row_coeffs(b.sigma, dt, i, t);
        let decay = b.sigma.powi((i + 1) as i32) * b.e0;
        a.push(coeffs.clone());
        rhs.push(b.e_min[i] - decay);
        a.push(coeffs.iter().map(|c| -c).collect());
        rhs.push(-(b.e_max[i] - decay));
    }
    for i in 0..t {
        let mut row = vec![0.0; t];
        row[i] = 1.0;
        a.push(row.clone());
        rhs.push(b.p_min[i]);
        let mut row = vec![0.0; t];
        row[i] = -1.0;
        a.push(row);
        rhs.push(-b.p_max[i]);
    }
    HPolyhedron { a, b: rhs }
}

fn battery_lp(b: &BatteryParams, t: usize, dt: f64, cost: Vec<f64>) -> LpProblem {
    let mut lp = LpProblem {
        sense: Sense::Min,
        cost,
        constraints: Vec::new(),
        bounds: (0..t).map(|i| (b.p_min[i], b.p_max[i])).collect(),
    };
    for i in 0..t {
        let coeffs = energy_row_coeffs(b.sigma, dt, i, t);
        let decay = b.sigma.powi((i + 1) as i32) * b.e0;
        lp.add_constraint(coeffs.clone(), Relation::Ge, b.e_min[i] - decay);
        lp.add_constraint(coeffs, Relation::Le, b.e_max[i] - decay);
    }
    lp
}

fn battery_nonempty(b: &BatteryParams, t: usize, dt: f64) -> Result<bool> {
    let sol = solve_lp(&battery_lp(b, t, dt, vec![0.0; t]))?;
    Ok(sol.status == LpStatus::Optimal)
}

fn battery_support(b: &BatteryParams, lambda: &[f64], t: usize, dt: f64) -> Result<f64> {
    let sol = solve_lp(&battery_lp(b, t, dt, lambda.to_vec()))?;
    match sol.status {
        LpStatus::Optimal => Ok(sol.value),
        _ => Err(Error::ModelInvalid("battery region empty or unbounded".into())),
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyhedra::{polygon_area, vpolytope_membership, PolySet};
    use crate::rng::Stream;

    fn simple_battery(sigma: f64) -> BatteryParams {
        BatteryParams {
            p_min: vec![-1.0, -1.0],
            p_max: vec![1.0, 1.0],
            e_min: vec![-1.0, -1.0],
            e_max: vec![1.0, 1.0],
            e0: 0.0,
            sigma,
        }
    }

    fn battery_model(sigma: f64) -> FlexModel {
        FlexModel::new(2, 1.0, vec![simple_battery(sigma)], vec![], vec![])
    }

    #[test]
    fn upsilon_matrices_match_definition() {
        let (u1, u2) = upsilon(0.5, 2);
        assert_eq!(u1, vec![vec![1.0, 0.0], vec![0.5, 1.0]]);
        assert_eq!(u2, vec![0.5, 0.25]);
    }

    #[test]
    fn sigma_one_energy_rows_are_prefix_sums() {
        let region = battery_model(1.0).assemble_region().unwrap();
        // Rows: energy lo/hi for periods 0 and 1, then power rows.
        assert_eq!(region.h.a[0], vec![1.0, 0.0]);
        assert_eq!(region.h.b[0], -1.0);
        assert_eq!(region.h.a[2], vec![1.0, 1.0]); // cumulative sum row
        assert_eq!(region.h.b[2], -1.0);
        assert_eq!(region.h.a[3], vec![-1.0, -1.0]);
        assert_eq!(region.h.b[3], -1.0);
    }

    #[test]
    fn sigma_half_energy_rows() {
        let region = battery_model(0.5).assemble_region().unwrap();
        // Second-period energy row: dt * [sigma, 1].
        assert_eq!(region.h.a[2], vec![0.5, 1.0]);
    }

    #[test]
    fn fixed_load_only_is_singleton() {
        let m = FlexModel::new(
            2,
            1.0,
            vec![],
            vec![],
            vec![FixedLoadParams {
                profile: vec![1.5, 2.5],
            }],
        );
        for lam in [[1.0, 0.0], [0.0, -1.0], [3.0, 4.0]] {
            let r = m.respond(&lam).unwrap();
            assert_eq!(r.p_star, vec![1.5, 2.5]);
            assert!(r.unique);
        }
        let poly = m.aggregate_polytope_2d().unwrap();
        assert_eq!(poly.num_vertices(), 1);
    }

    #[test]
    fn respond_matches_vertex_oracle() {
        let m = FlexModel::new(
            2,
            1.0,
            vec![BatteryParams {
                p_min: vec![-1.0, -1.0],
                p_max: vec![1.0, 1.0],
                e_min: vec![0.0, 0.0],
                e_max: vec![2.0, 2.0],
                e0: 0.0,
                sigma: 1.0,
            }],
            vec![],
            vec![],
        );
        let poly = m.aggregate_polytope_2d().unwrap();
        let lam = [1.0, -1.0];
        let r = m.respond(&lam).unwrap();
        // Oracle: minimum over enumerated vertices.
        let best = poly
            .vertices
            .iter()
            .map(|v| lam[0] * v[0] + lam[1] * v[1])
            .fold(f64::INFINITY, f64::min);
        assert!((r.objective - best).abs() < 1e-8);
        let sv = crate::polyhedra::support_value(PolySet::V(&poly), &lam)
            .unwrap()
            .value()
            .unwrap();
        assert!((r.objective - sv).abs() < 1e-8);
        let (inside, _) = vpolytope_membership(&r.p_star, &poly).unwrap();
        assert!(inside);
    }

    #[test]
    fn zero_price_gives_lex_smallest_and_degenerate() {
        let m = battery_model(1.0);
        let r = m.respond(&[0.0, 0.0]).unwrap();
        assert!(r.objective.abs() < 1e-12);
        assert!(!r.unique);
        // Lexicographically smallest aggregate: p1 minimal, then p2 minimal
        // given p1 = -1, where the energy floor forces p1 + p2 >= -1.
        assert!((r.p_star[0] + 1.0).abs() < 1e-7, "{:?}", r.p_star);
        assert!(r.p_star[1].abs() < 1e-7, "{:?}", r.p_star);
    }

    #[test]
    fn respond_scale_invariant() {
        let m = battery_model(0.9);
        let lam = [0.7, -0.3];
        let r1 = m.respond(&lam).unwrap();
        let r2 = m.respond(&[lam[0] * 13.0, lam[1] * 13.0]).unwrap();
        for (a, b) in r1.p_star.iter().zip(&r2.p_star) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn support_decomposition_sums_to_objective() {
        let mut stream = Stream::new(42, "sdecomp", 0);
        let m = FlexModel::new(
            2,
            1.0,
            vec![
                simple_battery(1.0),
                simple_battery(0.95),
                simple_battery(0.9),
                simple_battery(0.85),
            ],
            vec![TdLoadParams {
                p_min: vec![-0.5, -0.25],
                p_max: vec![0.5, 0.75],
            }],
            vec![FixedLoadParams {
                profile: vec![1.0, 1.0],
            }],
        );
        for _ in 0..100 {
            let th = stream.next_range(0.0, std::f64::consts::TAU);
            let lam = [th.cos(), th.sin()];
            let parts = m.support_decomposition(&lam).unwrap();
            let total: f64 = parts.iter().sum();
            let r = m.respond(&lam).unwrap();
            assert!(
                (total - r.objective).abs() < 1e-8,
                "direction {lam:?}: parts {total} vs respond {}",
                r.objective
            );
        }
    }

    #[test]
    fn two_identical_batteries_sum_check() {
        let m1 = battery_model(1.0);
        let m2 = FlexModel::new(
            2,
            1.0,
            vec![simple_battery(1.0), simple_battery(1.0)],
            vec![],
            vec![],
        );
        let lam = [0.3, -0.8];
        let r1 = m1.respond(&lam).unwrap();
        let r2 = m2.respond(&lam).unwrap();
        assert!((r2.objective - 2.0 * r1.objective).abs() < 1e-8);
    }

    #[test]
    fn contradictory_energy_window_is_invalid() {
        let m = FlexModel::new(
            2,
            1.0,
            vec![BatteryParams {
                p_min: vec![-0.1, -0.1],
                p_max: vec![-0.05, -0.05], // forced discharge
                e_min: vec![5.0, 5.0],     // unreachable energy floor
                e_max: vec![6.0, 6.0],
                e0: 1.0,
                sigma: 1.0,
            }],
            vec![],
            vec![],
        );
        match m.validate() {
            Err(Error::ModelInvalid(msg)) => assert!(msg.contains("battery 0"), "{msg}"),
            other => panic!("expected ModelInvalid, got {other:?}"),
        }
    }

    #[test]
    fn random_perturbed_models_match_phase1_feasibility() {
        let mut nontrivial = 0;
        for i in 0..50 {
            let mut stream = Stream::new(33, "validate", i);
            let e_lo = [stream.next_range(-1.5, 0.5), stream.next_range(-1.5, 0.5)];
            let width = [stream.next_range(0.0, 0.6), stream.next_range(0.0, 0.6)];
            let b = BatteryParams {
                p_min: vec![stream.next_range(-0.6, 0.0), stream.next_range(-0.6, 0.0)],
                p_max: vec![stream.next_range(0.0, 0.6), stream.next_range(0.0, 0.6)],
                e_min: vec![e_lo[0], e_lo[1]],
                e_max: vec![e_lo[0] + width[0], e_lo[1] + width[1]],
                e0: stream.next_range(-0.5, 0.5),
                sigma: stream.next_range(0.5, 1.0),
            };
            let feasible = battery_nonempty(&b, 2, 1.0).unwrap();
            let m = FlexModel::new(2, 1.0, vec![b], vec![], vec![]);
            assert_eq!(m.validate().is_ok(), feasible, "instance {i}");
            if !feasible {
                nontrivial += 1;
            }
        }
        assert!(nontrivial > 5, "want a mix of verdicts, got {nontrivial} infeasible");
    }

    #[test]
    fn optimality_certificate_against_random_mixtures() {
        let m = FlexModel::new(
            2,
            1.0,
            vec![simple_battery(0.95), simple_battery(0.9)],
            vec![TdLoadParams {
                p_min: vec![-0.3, -0.3],
                p_max: vec![0.3, 0.3],
            }],
            vec![],
        );
        let poly = m.aggregate_polytope_2d().unwrap();
        let mut stream = Stream::new(7, "cert", 0);
        let lam = [0.6, 0.8];
        let r = m.respond(&lam).unwrap();
        for _ in 0..1000 {
            // Random convex mixture of the region's vertices.
            let mut w: Vec<f64> = (0..poly.num_vertices()).map(|_| stream.next_f64()).collect();
            let s: f64 = w.iter().sum();
            for x in w.iter_mut() {
                *x /= s;
            }
            let mut p = vec![0.0, 0.0];
            for (wi, v) in w.iter().zip(&poly.vertices) {
                p[0] += wi * v[0];
                p[1] += wi * v[1];
            }
            let val = lam[0] * p[0] + lam[1] * p[1];
            assert!(r.objective <= val + 1e-7);
        }
    }

    #[test]
    fn model_json_round_trip() {
        let m = FlexModel::new(
            2,
            0.5,
            vec![simple_battery(0.98)],
            vec![TdLoadParams {
                p_min: vec![0.0, 0.0],
                p_max: vec![1.0, 2.0],
            }],
            vec![FixedLoadParams {
                profile: vec![0.25, 0.75],
            }],
        );
        let s = m.to_json_string().unwrap();
        assert!(s.contains("\"T\": 2"), "field name for periods must be T");
        let back = FlexModel::from_json_str(&s).unwrap();
        assert_eq!(m, back);
    }

    #[test]
    fn aggregate_region_has_positive_area() {
        let m = battery_model(0.9);
        let poly = m.aggregate_polytope_2d().unwrap();
        assert!(polygon_area(&poly.vertices) > 0.1);
    }
}
