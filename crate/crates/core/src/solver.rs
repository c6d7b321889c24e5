//! Self-contained LP/MILP solver.
//!
//! Two-phase dense-tableau simplex with Bland's-rule anti-cycling, plus a
//! deterministic best-first branch-and-bound solver for problems with
//! binary variables.  Every optimization problem in this crate is expressed
//! against this module's IR, so results never depend on an external solver.
//!
//! Problem sizes here are tiny (at most a few thousand rows), so the
//! tableau is dense and solves are exactly reproducible: fixed entering
//! rule (most negative reduced cost, lowest index on ties), fixed leaving
//! rule, and Bland's rule engaged after `3*(m+n)` iterations without
//! objective progress.

use crate::error::{Error, Result};
use crate::tol;

/// Objective direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Min,
    Max,
}

/// Constraint relation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

/// One linear constraint `coeffs . x REL rhs`.
#[derive(Debug, Clone)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub rel: Relation,
    pub rhs: f64,
}

impl Constraint {
    pub fn new(coeffs: Vec<f64>, rel: Relation, rhs: f64) -> Self {
        Constraint { coeffs, rel, rhs }
    }
}

/// A linear program `sense cost.x  s.t.  constraints, bounds`.
///
/// Bounds may be infinite on either side; `NEG_INFINITY..INFINITY` is a
/// free variable.
#[derive(Debug, Clone)]
pub struct LpProblem {
    pub sense: Sense,
    pub cost: Vec<f64>,
    pub constraints: Vec<Constraint>,
    pub bounds: Vec<(f64, f64)>,
}

impl LpProblem {
    /// Minimization problem with all variables free.
    pub fn minimize(cost: Vec<f64>) -> Self {
        let n = cost.len();
        LpProblem {
            sense: Sense::Min,
            cost,
            constraints: Vec::new(),
            bounds: vec![(f64::NEG_INFINITY, f64::INFINITY); n],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.cost.len()
    }

    pub fn add_constraint(&mut self, coeffs: Vec<f64>, rel: Relation, rhs: f64) {
        self.constraints.push(Constraint::new(coeffs, rel, rhs));
    }

    fn validate(&self) -> Result<()> {
        let n = self.num_vars();
        if self.bounds.len() != n {
            return Err(Error::Input(format!(
                "bounds length {} does not match variable count {}",
                self.bounds.len(),
                n
            )));
        }
        for (i, c) in self.constraints.iter().enumerate() {
            if c.coeffs.len() != n {
                return Err(Error::Input(format!(
                    "constraint {} has {} coefficients, expected {}",
                    i,
                    c.coeffs.len(),
                    n
                )));
            }
            if !c.rhs.is_finite() || c.coeffs.iter().any(|v| !v.is_finite()) {
                return Err(Error::Input(format!("constraint {i} has non-finite data")));
            }
        }
        for (j, &(l, u)) in self.bounds.iter().enumerate() {
            if l.is_nan() || u.is_nan() || l > u {
                return Err(Error::Input(format!("variable {j} has invalid bounds [{l}, {u}]")));
            }
        }
        if self.cost.iter().any(|v| !v.is_finite()) {
            return Err(Error::Input("objective has non-finite coefficients".into()));
        }
        Ok(())
    }
}

/// Solve status of an LP.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Result of an LP solve.
///
/// When `status == Optimal`: `x` satisfies every constraint within
/// [`tol::FEAS_TOL`], `duals` holds one multiplier per constraint
/// (`Ge` rows nonnegative, `Le` rows nonpositive, `Eq` free, for `Min`;
/// signs flip for `Max`), and `reduced_costs = cost - A^T duals` so that
/// complementary slackness holds within [`tol::COMP_TOL`].
#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub value: f64,
    pub duals: Vec<f64>,
    pub reduced_costs: Vec<f64>,
    /// Deterministic identifier of the optimal basis.
    pub basis_id: u64,
    /// True when the optimum is primal-degenerate or admits alternative optima.
    pub degenerate: bool,
}

impl LpSolution {
    fn non_optimal(status: LpStatus, value: f64) -> Self {
        LpSolution {
            status,
            x: Vec::new(),
            value,
            duals: Vec::new(),
            reduced_costs: Vec::new(),
            basis_id: 0,
            degenerate: false,
        }
    }
}

/// An LP plus a set of variables restricted to `{0, 1}`.
#[derive(Debug, Clone)]
pub struct MilpProblem {
    pub lp: LpProblem,
    pub binaries: Vec<usize>,
}

impl MilpProblem {
    fn validate(&self) -> Result<()> {
        self.lp.validate()?;
        for &j in &self.binaries {
            if j >= self.lp.num_vars() {
                return Err(Error::Input(format!("binary index {j} out of range")));
            }
            let (l, u) = self.lp.bounds[j];
            if l < -tol::INT_TOL || u > 1.0 + tol::INT_TOL {
                return Err(Error::Input(format!(
                    "binary variable {j} must carry bounds within [0, 1], got [{l}, {u}]"
                )));
            }
        }
        Ok(())
    }
}

/// Solve status of a MILP.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MilpStatus {
    Optimal,
    Infeasible,
}

/// Result of a branch-and-bound solve.
#[derive(Debug, Clone)]
pub struct MilpSolution {
    pub status: MilpStatus,
    pub x: Vec<f64>,
    pub value: f64,
    /// Number of relaxations solved.
    pub nodes: usize,
    /// Best proven lower bound (minimization sense of the original problem).
    pub bound: f64,
}

/// Knobs for [`solve_milp_with`].
#[derive(Debug, Clone)]
pub struct MilpOptions {
    /// Maximum number of LP relaxations before giving up.
    pub node_budget: usize,
    /// Absolute incumbent-vs-bound gap at which the search stops.
    pub abs_gap: f64,
    /// Optional feasible starting point; validated, then used as the initial
    /// incumbent so the search can prune against it from the first node.
    pub incumbent_hint: Option<Vec<f64>>,
}

impl Default for MilpOptions {
    fn default() -> Self {
        MilpOptions {
            node_budget: 1_000_000,
            abs_gap: tol::MILP_GAP_TOL,
            incumbent_hint: None,
        }
    }
}

// ---------------------------------------------------------------------------
// Simplex internals
// ---------------------------------------------------------------------------

/// How an original variable maps into the standardized nonnegative space.
#[derive(Debug, Clone, Copy)]
enum VarMap {
    /// `x = lower + z[col]`
    Shift { col: usize, lower: f64 },
    /// `x = upper - z[col]`
    Mirror { col: usize, upper: f64 },
    /// `x = z[pos] - z[neg]`
    Split { pos: usize, neg: usize },
    /// Fixed by equal bounds.
    Fixed { value: f64 },
}

struct Standardized {
    /// Row-major `m x n` matrix of the equality system (structural columns only).
    rows: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    /// Relation of each row after sign normalization (`Le` or `Ge` or `Eq`).
    rels: Vec<Relation>,
    /// +1.0 or -1.0: factor applied to user row `i` during normalization;
    /// only the first `num_user_rows` entries correspond to user constraints.
    row_sign: Vec<f64>,
    num_user_rows: usize,
    cost: Vec<f64>,
    var_map: Vec<VarMap>,
    n_struct: usize,
}

fn standardize(p: &LpProblem) -> Standardized {
    let n = p.num_vars();
    let mut var_map = Vec::with_capacity(n);
    let mut n_struct = 0usize;
    // Extra rows for finite upper bounds of shifted variables.
    let mut bound_rows: Vec<(usize, f64)> = Vec::new();

    for j in 0..n {
        let (l, u) = p.bounds[j];
        if l == u {
            var_map.push(VarMap::Fixed { value: l });
        } else if l.is_finite() {
            let col = n_struct;
            n_struct += 1;
            var_map.push(VarMap::Shift { col, lower: l });
            if u.is_finite() {
                bound_rows.push((col, u - l));
            }
        } else if u.is_finite() {
            let col = n_struct;
            n_struct += 1;
            var_map.push(VarMap::Mirror { col, upper: u });
        } else {
            let pos = n_struct;
            let neg = n_struct + 1;
            n_struct += 2;
            var_map.push(VarMap::Split { pos, neg });
        }
    }

    let sense_mul = match p.sense {
        Sense::Min => 1.0,
        Sense::Max => -1.0,
    };

    // Internal cost over structural columns.
    let mut cost = vec![0.0; n_struct];
    for j in 0..n {
        let c = sense_mul * p.cost[j];
        match var_map[j] {
            VarMap::Shift { col, .. } => cost[col] += c,
            VarMap::Mirror { col, .. } => cost[col] -= c,
            VarMap::Split { pos, neg } => {
                cost[pos] += c;
                cost[neg] -= c;
            }
            VarMap::Fixed { .. } => {}
        }
    }

    let mut rows = Vec::with_capacity(p.constraints.len() + bound_rows.len());
    let mut rhs = Vec::with_capacity(rows.capacity());
    let mut rels = Vec::with_capacity(rows.capacity());
    let mut row_sign = Vec::with_capacity(rows.capacity());

    for c in &p.constraints {
        let mut row = vec![0.0; n_struct];
        let mut b = c.rhs;
        for j in 0..n {
            let a = c.coeffs[j];
            if a == 0.0 {
                continue;
            }
            match var_map[j] {
                VarMap::Shift { col, lower } => {
                    row[col] += a;
                    b -= a * lower;
                }
                VarMap::Mirror { col, upper } => {
                    row[col] -= a;
                    b -= a * upper;
                }
                VarMap::Split { pos, neg } => {
                    row[pos] += a;
                    row[neg] -= a;
                }
                VarMap::Fixed { value } => b -= a * value,
            }
        }
        let mut rel = c.rel;
        let mut sign = 1.0;
        if b < 0.0 {
            for v in row.iter_mut() {
                *v = -*v;
            }
            b = -b;
            sign = -1.0;
            rel = match rel {
                Relation::Le => Relation::Ge,
                Relation::Ge => Relation::Le,
                Relation::Eq => Relation::Eq,
            };
        }
        rows.push(row);
        rhs.push(b);
        rels.push(rel);
        row_sign.push(sign);
    }
    let num_user_rows = rows.len();

    for &(col, ub) in &bound_rows {
        let mut row = vec![0.0; n_struct];
        row[col] = 1.0;
        rows.push(row);
        rhs.push(ub);
        rels.push(Relation::Le);
        row_sign.push(1.0);
    }

    Standardized {
        rows,
        rhs,
        rels,
        row_sign,
        num_user_rows,
        cost,
        var_map,
        n_struct,
    }
}

/// Dense simplex tableau: `m` constraint rows plus one cost row; columns are
/// structural, then slack/surplus, then artificial, then the rhs.
struct Tableau {
    m: usize,
    ncols: usize,
    /// (m+1) x (ncols+1), row-major.
    t: Vec<f64>,
    basis: Vec<usize>,
    n_struct: usize,
    art_start: usize,
    /// Unit column identifying each row (slack or artificial), for dual recovery.
    row_unit_col: Vec<usize>,
    dead_rows: Vec<bool>,
}

impl Tableau {
    #[inline]
    fn at(&self, r: usize, c: usize) -> f64 {
        self.t[r * (self.ncols + 1) + c]
    }
    #[inline]
    fn set(&mut self, r: usize, c: usize, v: f64) {
        self.t[r * (self.ncols + 1) + c] = v;
    }
    #[inline]
    fn rhs_col(&self) -> usize {
        self.ncols
    }

    fn build(s: &Standardized) -> Tableau {
        let m = s.rows.len();
        // slack/surplus count + artificial count
        let mut n_slack = 0usize;
        let mut n_art = 0usize;
        for rel in &s.rels {
            match rel {
                Relation::Le => n_slack += 1,
                Relation::Ge => {
                    n_slack += 1;
                    n_art += 1;
                }
                Relation::Eq => n_art += 1,
            }
        }
        let ncols = s.n_struct + n_slack + n_art;
        let art_start = s.n_struct + n_slack;
        let mut t = vec![0.0; (m + 1) * (ncols + 1)];
        let mut basis = vec![0usize; m];
        let mut row_unit_col = vec![0usize; m];

        let stride = ncols + 1;
        let mut slack_idx = s.n_struct;
        let mut art_idx = art_start;
        for i in 0..m {
            for j in 0..s.n_struct {
                t[i * stride + j] = s.rows[i][j];
            }
            t[i * stride + ncols] = s.rhs[i];
            match s.rels[i] {
                Relation::Le => {
                    t[i * stride + slack_idx] = 1.0;
                    basis[i] = slack_idx;
                    row_unit_col[i] = slack_idx;
                    slack_idx += 1;
                }
                Relation::Ge => {
                    t[i * stride + slack_idx] = -1.0;
                    slack_idx += 1;
                    t[i * stride + art_idx] = 1.0;
                    basis[i] = art_idx;
                    row_unit_col[i] = art_idx;
                    art_idx += 1;
                }
                Relation::Eq => {
                    t[i * stride + art_idx] = 1.0;
                    basis[i] = art_idx;
                    row_unit_col[i] = art_idx;
                    art_idx += 1;
                }
            }
        }

        Tableau {
            m,
            ncols,
            t,
            basis,
            n_struct: s.n_struct,
            art_start,
            row_unit_col,
            dead_rows: vec![false; m],
        }
    }

    fn pivot(&mut self, prow: usize, pcol: usize) {
        let stride = self.ncols + 1;
        let pval = self.at(prow, pcol);
        let inv = 1.0 / pval;
        for c in 0..stride {
            self.t[prow * stride + c] *= inv;
        }
        // Exact unit in the pivot position.
        self.set(prow, pcol, 1.0);
        for r in 0..=self.m {
            if r == prow {
                continue;
            }
            let factor = self.at(r, pcol);
            if factor == 0.0 {
                continue;
            }
            for c in 0..stride {
                let delta = factor * self.t[prow * stride + c];
                self.t[r * stride + c] -= delta;
            }
            self.set(r, pcol, 0.0);
        }
        self.basis[prow] = pcol;
    }

    /// Run simplex iterations on the current cost row.
    ///
    /// `enterable_end` bounds the columns allowed to enter (used to shut
    /// artificials out in phase 2).  Returns `Ok(true)` at optimality,
    /// `Ok(false)` when unbounded.
    fn iterate(&mut self, enterable_end: usize, max_iter: usize) -> Result<bool> {
        let stall_limit = 3 * (self.m + self.ncols);
        let mut stall = 0usize;
        let mut bland = false;
        let mut last_obj = f64::INFINITY;

        for iter in 0..max_iter {
            // Entering column.
            let mut pcol = None;
            if bland {
                for c in 0..enterable_end {
                    if self.at(self.m, c) < -tol::PIVOT_TOL {
                        pcol = Some(c);
                        break;
                    }
                }
            } else {
                let mut best = -tol::PIVOT_TOL;
                for c in 0..enterable_end {
                    let rc = self.at(self.m, c);
                    if rc < best {
                        best = rc;
                        pcol = Some(c);
                    }
                }
            }
            let pcol = match pcol {
                Some(c) => c,
                None => return Ok(true),
            };

            // Ratio test.
            let mut prow = None;
            let mut best_ratio = f64::INFINITY;
            for r in 0..self.m {
                if self.dead_rows[r] {
                    continue;
                }
                let a = self.at(r, pcol);
                if a > tol::PIVOT_TOL {
                    let ratio = self.at(r, self.rhs_col()) / a;
                    let better = ratio < best_ratio - 1e-12
                        || (ratio < best_ratio + 1e-12
                            && match prow {
                                // Bland: leave lowest basic index; otherwise lowest row.
                                Some(pr) => {
                                    if bland {
                                        self.basis[r] < self.basis[pr]
                                    } else {
                                        false
                                    }
                                }
                                None => true,
                            });
                    if better {
                        best_ratio = ratio.max(0.0);
                        prow = Some(r);
                    }
                }
            }
            let prow = match prow {
                Some(r) => r,
                None => return Ok(false), // unbounded direction
            };

            self.pivot(prow, pcol);

            let obj = -self.at(self.m, self.rhs_col());
            if obj < last_obj - 1e-13 * (1.0 + obj.abs()) {
                stall = 0;
            } else {
                stall += 1;
                if stall > stall_limit {
                    bland = true;
                }
            }
            last_obj = obj;
            let _ = iter;
        }
        Err(Error::Numeric(format!(
            "simplex iteration limit {max_iter} reached (m={}, n={})",
            self.m, self.ncols
        )))
    }

    /// Load a cost vector (over all columns) into the cost row and price out
    /// the current basis.
    fn load_cost(&mut self, col_cost: &[f64]) {
        let stride = self.ncols + 1;
        for c in 0..stride {
            self.t[self.m * stride + c] = 0.0;
        }
        for (c, &v) in col_cost.iter().enumerate() {
            self.t[self.m * stride + c] = v;
        }
        for r in 0..self.m {
            let cb = col_cost[self.basis[r]];
            if cb == 0.0 {
                continue;
            }
            for c in 0..stride {
                let delta = cb * self.t[r * stride + c];
                self.t[self.m * stride + c] -= delta;
            }
        }
    }
}

fn max_iterations(m: usize, n: usize) -> usize {
    100 * (m + n) + 10_000
}

/// Solve a linear program.
///
/// Status is returned in-band; `Err` is reserved for malformed input and
/// numerical breakdown.  Two calls with identical input produce bit-identical
/// solutions.
pub fn solve_lp(p: &LpProblem) -> Result<LpSolution> {
    p.validate()?;
    let s = standardize(p);
    let m = s.rows.len();

    // Degenerate case: no constraints at all.
    if m == 0 {
        return solve_unconstrained(p, &s);
    }

    let mut tab = Tableau::build(&s);
    let max_iter = max_iterations(m, tab.ncols);

    // Phase 1: minimize the sum of artificials.
    let has_art = tab.art_start < tab.ncols;
    if has_art {
        let mut phase1 = vec![0.0; tab.ncols];
        for c in tab.art_start..tab.ncols {
            phase1[c] = 1.0;
        }
        tab.load_cost(&phase1);
        let optimal = tab.iterate(tab.art_start, max_iter)?;
        if !optimal {
            return Err(Error::Numeric("phase-1 objective unbounded below".into()));
        }
        let infeas = -tab.at(tab.m, tab.rhs_col());
        let bscale = s.rhs.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
        if infeas > 1e-8 * (1.0 + bscale) {
            return Ok(LpSolution::non_optimal(LpStatus::Infeasible, f64::NAN));
        }
        // Drive remaining artificials out of the basis.
        for r in 0..tab.m {
            if tab.basis[r] >= tab.art_start {
                let mut pivoted = false;
                for c in 0..tab.art_start {
                    if tab.at(r, c).abs() > tol::PIVOT_TOL {
                        tab.pivot(r, c);
                        pivoted = true;
                        break;
                    }
                }
                if !pivoted {
                    // Redundant row: every structural entry vanished.
                    tab.dead_rows[r] = true;
                }
            }
        }
    }

    // Phase 2.
    let mut phase2 = vec![0.0; tab.ncols];
    phase2[..s.n_struct].copy_from_slice(&s.cost);
    tab.load_cost(&phase2);
    let optimal = tab.iterate(tab.art_start, max_iter)?;
    if !optimal {
        let value = match p.sense {
            Sense::Min => f64::NEG_INFINITY,
            Sense::Max => f64::INFINITY,
        };
        return Ok(LpSolution::non_optimal(LpStatus::Unbounded, value));
    }

    extract_solution(p, &s, &tab)
}

fn solve_unconstrained(p: &LpProblem, s: &Standardized) -> Result<LpSolution> {
    // Just push every variable to the bound favored by its cost.
    let n = p.num_vars();
    let sense_mul = match p.sense {
        Sense::Min => 1.0,
        Sense::Max => -1.0,
    };
    let mut x = vec![0.0; n];
    for j in 0..n {
        let c = sense_mul * p.cost[j];
        let (l, u) = p.bounds[j];
        let v = if c > 0.0 {
            l
        } else if c < 0.0 {
            u
        } else if l.is_finite() {
            l
        } else if u.is_finite() {
            u
        } else {
            0.0
        };
        if !v.is_finite() && c != 0.0 {
            let value = match p.sense {
                Sense::Min => f64::NEG_INFINITY,
                Sense::Max => f64::INFINITY,
            };
            return Ok(LpSolution::non_optimal(LpStatus::Unbounded, value));
        }
        x[j] = if v.is_finite() { v } else { 0.0 };
    }
    let value = dot(&p.cost, &x);
    let _ = s;
    Ok(LpSolution {
        status: LpStatus::Optimal,
        reduced_costs: p.cost.clone(),
        x,
        value,
        duals: Vec::new(),
        basis_id: 0,
        degenerate: false,
    })
}

fn extract_solution(p: &LpProblem, s: &Standardized, tab: &Tableau) -> Result<LpSolution> {
    let n = p.num_vars();
    // Structural values.
    let mut z = vec![0.0; tab.ncols];
    for r in 0..tab.m {
        if !tab.dead_rows[r] {
            z[tab.basis[r]] = tab.at(r, tab.rhs_col());
        }
    }
    let mut x = vec![0.0; n];
    for j in 0..n {
        x[j] = match s.var_map[j] {
            VarMap::Shift { col, lower } => lower + z[col],
            VarMap::Mirror { col, upper } => upper - z[col],
            VarMap::Split { pos, neg } => z[pos] - z[neg],
            VarMap::Fixed { value } => value,
        };
    }
    let value = dot(&p.cost, &x);

    // Internal duals from the unit column of each user row: rc(unit) = -y.
    let sense_mul = match p.sense {
        Sense::Min => 1.0,
        Sense::Max => -1.0,
    };
    let mut duals = vec![0.0; p.constraints.len()];
    for i in 0..s.num_user_rows {
        let y_int = -tab.at(tab.m, tab.row_unit_col[i]);
        duals[i] = sense_mul * s.row_sign[i] * y_int;
    }

    // Reduced costs against the user-facing rows.
    let mut reduced = p.cost.clone();
    for (i, c) in p.constraints.iter().enumerate() {
        let y = duals[i];
        if y == 0.0 {
            continue;
        }
        for j in 0..n {
            reduced[j] -= y * c.coeffs[j];
        }
    }

    // Basis identifier and degeneracy flags.
    let mut basic: Vec<usize> = tab.basis.clone();
    basic.sort_unstable();
    let mut id = 0x9E37_79B9_7F4A_7C15u64;
    for b in &basic {
        id = (id ^ (*b as u64)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        id ^= id >> 29;
    }
    let mut degenerate = false;
    for r in 0..tab.m {
        if !tab.dead_rows[r] && tab.at(r, tab.rhs_col()).abs() <= tol::FEAS_TOL {
            degenerate = true;
        }
    }
    if !degenerate {
        let is_basic = |c: usize| tab.basis.iter().any(|&b| b == c);
        for c in 0..tab.art_start {
            if !is_basic(c) && tab.at(tab.m, c).abs() <= tol::COMP_TOL {
                degenerate = true;
                break;
            }
        }
    }

    Ok(LpSolution {
        status: LpStatus::Optimal,
        x,
        value,
        duals,
        reduced_costs: reduced,
        basis_id: id,
        degenerate,
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

// ---------------------------------------------------------------------------
// Branch and bound
// ---------------------------------------------------------------------------

/// Objective bound implied by variable bounds alone (minimization sense).
fn bound_from_var_bounds(cost: &[f64], bounds: &[(f64, f64)]) -> f64 {
    let mut b = 0.0;
    for (j, &c) in cost.iter().enumerate() {
        if c > 0.0 {
            let l = bounds[j].0;
            if !l.is_finite() {
                return f64::NEG_INFINITY;
            }
            b += c * l;
        } else if c < 0.0 {
            let u = bounds[j].1;
            if !u.is_finite() {
                return f64::NEG_INFINITY;
            }
            b += c * u;
        }
    }
    b
}

struct BnbNode {
    bound: f64,
    seq: u64,
    /// (variable index, fixed value) pairs.
    fixes: Vec<(usize, f64)>,
}

impl PartialEq for BnbNode {
    fn eq(&self, other: &Self) -> bool {
        self.seq == other.seq
    }
}
impl Eq for BnbNode {}
impl PartialOrd for BnbNode {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for BnbNode {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        // BinaryHeap is a max-heap; invert so the smallest (bound, seq) pops first.
        other
            .bound
            .total_cmp(&self.bound)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

/// Solve a mixed-binary linear program with default options.
pub fn solve_milp(p: &MilpProblem) -> Result<MilpSolution> {
    solve_milp_with(p, &MilpOptions::default())
}

/// Best-first branch and bound: branch on the lowest-index fractional
/// binary, explore the 0-branch first, prune against the incumbent with an
/// absolute gap of `opts.abs_gap`.
pub fn solve_milp_with(p: &MilpProblem, opts: &MilpOptions) -> Result<MilpSolution> {
    p.validate()?;

    // Canonicalize to minimization.
    if p.lp.sense == Sense::Max {
        let mut flipped = p.clone();
        flipped.lp.sense = Sense::Min;
        for c in flipped.lp.cost.iter_mut() {
            *c = -*c;
        }
        let mut sol = solve_milp_with(&flipped, opts)?;
        sol.value = -sol.value;
        sol.bound = -sol.bound;
        return Ok(sol);
    }

    let mut incumbent: Option<(f64, Vec<f64>)> = None;
    if let Some(hint) = &opts.incumbent_hint {
        if is_milp_feasible(p, hint) {
            incumbent = Some((dot(&p.lp.cost, hint), hint.clone()));
        }
    }

    let trivial = bound_from_var_bounds(&p.lp.cost, &p.lp.bounds);
    if let Some((inc_val, inc_x)) = &incumbent {
        if *inc_val <= trivial + opts.abs_gap {
            return Ok(MilpSolution {
                status: MilpStatus::Optimal,
                x: inc_x.clone(),
                value: *inc_val,
                nodes: 0,
                bound: trivial,
            });
        }
    }

    let mut heap = std::collections::BinaryHeap::new();
    let mut seq = 0u64;
    heap.push(BnbNode {
        bound: trivial,
        seq,
        fixes: Vec::new(),
    });
    let mut nodes = 0usize;
    let mut best_bound = trivial;

    while let Some(node) = heap.pop() {
        best_bound = node.bound;
        if let Some((inc_val, _)) = &incumbent {
            if node.bound >= inc_val - opts.abs_gap {
                // Best-first: every remaining node is at least as bad.
                break;
            }
        }
        if nodes >= opts.node_budget {
            return Err(Error::Budget {
                message: format!("branch-and-bound node budget {} exhausted", opts.node_budget),
                incumbent: incumbent.as_ref().map(|(v, _)| *v),
                bound: node.bound,
            });
        }
        nodes += 1;

        let mut lp = p.lp.clone();
        for &(j, v) in &node.fixes {
            lp.bounds[j] = (v, v);
        }
        let sol = solve_lp(&lp)?;
        match sol.status {
            LpStatus::Infeasible => continue,
            LpStatus::Unbounded => {
                return Err(Error::Unbounded(
                    "LP relaxation unbounded; cannot bound the integer search".into(),
                ));
            }
            LpStatus::Optimal => {}
        }
        let node_value = sol.value;
        if let Some((inc_val, _)) = &incumbent {
            if node_value >= inc_val - opts.abs_gap {
                continue;
            }
        }

        // Lowest-index fractional binary.
        let mut branch_var = None;
        for &j in &p.binaries {
            let frac = (sol.x[j] - sol.x[j].round()).abs();
            if frac > tol::INT_TOL {
                branch_var = Some(j);
                break;
            }
        }
        match branch_var {
            None => {
                let better = match &incumbent {
                    Some((inc_val, _)) => node_value < *inc_val,
                    None => true,
                };
                if better {
                    incumbent = Some((node_value, sol.x));
                }
            }
            Some(j) => {
                for v in [0.0, 1.0] {
                    let mut fixes = node.fixes.clone();
                    fixes.push((j, v));
                    seq += 1;
                    heap.push(BnbNode {
                        bound: node_value,
                        seq,
                        fixes,
                    });
                }
            }
        }
    }

    match incumbent {
        Some((value, x)) => Ok(MilpSolution {
            status: MilpStatus::Optimal,
            x,
            value,
            nodes,
            bound: best_bound.min(value),
        }),
        None => Ok(MilpSolution {
            status: MilpStatus::Infeasible,
            x: Vec::new(),
            value: f64::NAN,
            nodes,
            bound: best_bound,
        }),
    }
}

/// Feasibility check used to validate incumbent hints.
pub(crate) fn is_milp_feasible(p: &MilpProblem, x: &[f64]) -> bool {
    if x.len() != p.lp.num_vars() {
        return false;
    }
    for (j, &(l, u)) in p.lp.bounds.iter().enumerate() {
        if x[j] < l - tol::FEAS_TOL || x[j] > u + tol::FEAS_TOL {
            return false;
        }
    }
    for c in &p.lp.constraints {
        let lhs = dot(&c.coeffs, x);
        let ok = match c.rel {
            Relation::Le => lhs <= c.rhs + tol::FEAS_TOL,
            Relation::Ge => lhs >= c.rhs - tol::FEAS_TOL,
            Relation::Eq => (lhs - c.rhs).abs() <= tol::FEAS_TOL,
        };
        if !ok {
            return false;
        }
    }
    p.binaries
        .iter()
        .all(|&j| (x[j] - x[j].round()).abs() <= tol::INT_TOL)
}

// ---------------------------------------------------------------------------
// Brute-force oracle
// ---------------------------------------------------------------------------

/// Enumerate every active-set vertex of a small, box-bounded LP and return
/// the best feasible one.  Test oracle; independent of the simplex path.
///
/// Requires `n <= 8` and finite bounds on every variable (which makes the
/// region bounded); anything else is refused.
pub fn brute_force_lp(p: &LpProblem) -> Result<LpSolution> {
    p.validate()?;
    let n = p.num_vars();
    if n > 8 {
        return Err(Error::Input(format!("brute_force_lp limited to n <= 8, got {n}")));
    }
    for (j, &(l, u)) in p.bounds.iter().enumerate() {
        if !l.is_finite() || !u.is_finite() {
            return Err(Error::Unbounded(format!(
                "brute_force_lp requires finite bounds; variable {j} has [{l}, {u}]"
            )));
        }
    }

    // Hyperplane pool: constraint rows as equalities, then bound planes.
    let mut planes: Vec<(Vec<f64>, f64)> = Vec::new();
    for c in &p.constraints {
        planes.push((c.coeffs.clone(), c.rhs));
    }
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        planes.push((e.clone(), p.bounds[j].0));
        planes.push((e, p.bounds[j].1));
    }

    let sense_mul = match p.sense {
        Sense::Min => 1.0,
        Sense::Max => -1.0,
    };
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut combo: Vec<usize> = (0..n).collect();

    loop {
        if let Some(x) = solve_square(&planes, &combo, n) {
            if is_feasible_point(p, &x) {
                let v = sense_mul * dot(&p.cost, &x);
                let replace = match &best {
                    None => true,
                    Some((bv, bx)) => v < bv - 1e-12 || (v < bv + 1e-12 && lex_less(&x, bx)),
                };
                if replace {
                    best = Some((v, x));
                }
            }
        }
        if !next_combination(&mut combo, planes.len(), n) {
            break;
        }
    }

    match best {
        Some((v, x)) => Ok(LpSolution {
            status: LpStatus::Optimal,
            value: sense_mul * v,
            x,
            duals: Vec::new(),
            reduced_costs: Vec::new(),
            basis_id: 0,
            degenerate: false,
        }),
        None => Ok(LpSolution::non_optimal(LpStatus::Infeasible, f64::NAN)),
    }
}

fn lex_less(a: &[f64], b: &[f64]) -> bool {
    for (x, y) in a.iter().zip(b) {
        if x < &(y - 1e-12) {
            return true;
        }
        if x > &(y + 1e-12) {
            return false;
        }
    }
    false
}

/// Is `x` feasible for `p` within [`tol::FEAS_TOL`]?
pub fn is_feasible_point(p: &LpProblem, x: &[f64]) -> bool {
    for (j, &(l, u)) in p.bounds.iter().enumerate() {
        if x[j] < l - tol::FEAS_TOL || x[j] > u + tol::FEAS_TOL {
            return false;
        }
    }
    for c in &p.constraints {
        let lhs = dot(&c.coeffs, x);
        let ok = match c.rel {
            Relation::Le => lhs <= c.rhs + tol::FEAS_TOL,
            Relation::Ge => lhs >= c.rhs - tol::FEAS_TOL,
            Relation::Eq => (lhs - c.rhs).abs() <= tol::FEAS_TOL,
        };
        if !ok {
            return false;
        }
    }
    true
}

fn next_combination(combo: &mut [usize], pool: usize, k: usize) -> bool {
    if k == 0 {
        return false;
    }
    let mut i = k;
    while i > 0 {
        i -= 1;
        if combo[i] < pool - (k - i) {
            combo[i] += 1;
            for j in i + 1..k {
                combo[j] = combo[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Solve the n x n system formed by the chosen planes; `None` when singular.
fn solve_square(planes: &[(Vec<f64>, f64)], combo: &[usize], n: usize) -> Option<Vec<f64>> {
    let mut a = vec![0.0; n * n];
    let mut b = vec![0.0; n];
    for (r, &pi) in combo.iter().enumerate() {
        for c in 0..n {
            a[r * n + c] = planes[pi].0[c];
        }
        b[r] = planes[pi].1;
    }
    gauss_solve(&mut a, &mut b, n)
}

/// Gaussian elimination with partial pivoting; `None` when near-singular.
pub(crate) fn gauss_solve(a: &mut [f64], b: &mut [f64], n: usize) -> Option<Vec<f64>> {
    for col in 0..n {
        let mut piv = col;
        let mut pmax = a[col * n + col].abs();
        for r in col + 1..n {
            let v = a[r * n + col].abs();
            if v > pmax {
                pmax = v;
                piv = r;
            }
        }
        if pmax < 1e-11 {
            return None;
        }
        if piv != col {
            for c in 0..n {
                a.swap(piv * n + c, col * n + c);
            }
            b.swap(piv, col);
        }
        let d = a[col * n + col];
        for r in 0..n {
            if r == col {
                continue;
            }
            let f = a[r * n + col] / d;
            if f == 0.0 {
                continue;
            }
            for c in col..n {
                a[r * n + c] -= f * a[col * n + c];
            }
            b[r] -= f * b[col];
        }
    }
    Some((0..n).map(|i| b[i] / a[i * n + i]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Stream;

    fn lp(cost: Vec<f64>, bounds: Vec<(f64, f64)>) -> LpProblem {
        LpProblem {
            sense: Sense::Min,
            cost,
            constraints: Vec::new(),
            bounds,
        }
    }

    #[test]
    fn nonneg_cone_min() {
        // min x1 + x2 s.t. x >= 0
        let p = lp(vec![1.0, 1.0], vec![(0.0, f64::INFINITY); 2]);
        let s = solve_lp(&p).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!(s.value.abs() < 1e-12);
        assert!(s.x[0].abs() < 1e-12 && s.x[1].abs() < 1e-12);
    }

    #[test]
    fn unbounded_ray() {
        let p = lp(vec![-1.0], vec![(0.0, f64::INFINITY)]);
        let s = solve_lp(&p).unwrap();
        assert_eq!(s.status, LpStatus::Unbounded);
    }

    #[test]
    fn dimension_mismatch_is_input_error() {
        let mut p = lp(vec![1.0, 1.0], vec![(0.0, 1.0); 2]);
        p.add_constraint(vec![1.0], Relation::Ge, 0.0);
        assert!(matches!(solve_lp(&p), Err(Error::Input(_))));
    }

    #[test]
    fn simple_constrained() {
        // min -x - 2y s.t. x + y <= 4, x <= 2, y <= 3, x,y >= 0 -> (1,3), -7
        let mut p = lp(vec![-1.0, -2.0], vec![(0.0, f64::INFINITY); 2]);
        p.add_constraint(vec![1.0, 1.0], Relation::Le, 4.0);
        p.add_constraint(vec![1.0, 0.0], Relation::Le, 2.0);
        p.add_constraint(vec![0.0, 1.0], Relation::Le, 3.0);
        let s = solve_lp(&p).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.value + 7.0).abs() < 1e-9);
        assert!((s.x[0] - 1.0).abs() < 1e-9);
        assert!((s.x[1] - 3.0).abs() < 1e-9);
    }

    #[test]
    fn duals_sign_convention() {
        // min x s.t. x >= 1  -> dual of the Ge row is +1.
        let mut p = lp(vec![1.0], vec![(f64::NEG_INFINITY, f64::INFINITY)]);
        p.add_constraint(vec![1.0], Relation::Ge, 1.0);
        let s = solve_lp(&p).unwrap();
        assert!((s.duals[0] - 1.0).abs() < 1e-9);

        // min -x s.t. x <= 1 -> dual of the Le row is -1.
        let mut p = lp(vec![-1.0], vec![(f64::NEG_INFINITY, f64::INFINITY)]);
        p.add_constraint(vec![1.0], Relation::Le, 1.0);
        let s = solve_lp(&p).unwrap();
        assert!((s.duals[0] + 1.0).abs() < 1e-9);
    }

    #[test]
    fn max_sense() {
        // max x + 2y s.t. x + y <= 4, 0 <= y <= 3 -> (1, 3), value 7
        let mut p = lp(vec![1.0, 2.0], vec![(0.0, f64::INFINITY), (0.0, 3.0)]);
        p.sense = Sense::Max;
        p.add_constraint(vec![1.0, 1.0], Relation::Le, 4.0);
        let s = solve_lp(&p).unwrap();
        assert!((s.value - 7.0).abs() < 1e-9, "value {}", s.value);
        assert!((s.x[0] - 1.0).abs() < 1e-9 && (s.x[1] - 3.0).abs() < 1e-9);
    }

    fn random_box_lp(stream: &mut Stream) -> LpProblem {
        let n = 2 + stream.next_index(5); // 2..=6
        let m = 1 + stream.next_index(12); // 1..=12
        let mut p = LpProblem {
            sense: if stream.next_f64() < 0.5 { Sense::Min } else { Sense::Max },
            cost: (0..n).map(|_| stream.next_range(-2.0, 2.0)).collect(),
            constraints: Vec::new(),
            bounds: (0..n)
                .map(|_| {
                    let l = stream.next_range(-3.0, 0.0);
                    let u = l + stream.next_range(0.5, 4.0);
                    (l, u)
                })
                .collect(),
        };
        for _ in 0..m {
            let coeffs: Vec<f64> = (0..n).map(|_| stream.next_range(-1.5, 1.5)).collect();
            let rel = match stream.next_index(3) {
                0 => Relation::Le,
                1 => Relation::Ge,
                _ => Relation::Le, // bias toward inequalities; Eq rows come below
            };
            let rhs = stream.next_range(-2.0, 2.0);
            p.add_constraint(coeffs, rel, rhs);
        }
        p
    }

    #[test]
    fn seeded_lps_match_brute_force() {
        // Also exercised (with 200 instances) in the acceptance suite.
        let mut agree = 0;
        for i in 0..60 {
            let mut stream = Stream::new(1234, "lp-oracle", i);
            let p = random_box_lp(&mut stream);
            let fast = solve_lp(&p).unwrap();
            let slow = brute_force_lp(&p).unwrap();
            assert_eq!(fast.status, slow.status, "instance {i}");
            if fast.status == LpStatus::Optimal {
                assert!(
                    (fast.value - slow.value).abs() <= 1e-7 * (1.0 + slow.value.abs()),
                    "instance {i}: simplex {} vs brute force {}",
                    fast.value,
                    slow.value
                );
                agree += 1;
            }
        }
        assert!(agree > 10, "too few feasible instances: {agree}");
    }

    #[test]
    fn weak_duality_and_complementary_slackness() {
        for i in 0..40 {
            let mut stream = Stream::new(77, "duality", i);
            let p = random_box_lp(&mut stream);
            let s = solve_lp(&p).unwrap();
            if s.status != LpStatus::Optimal {
                continue;
            }
            // Dual objective = b'y + sum of bound terms via reduced costs.
            let mut dual_obj = 0.0;
            for (c, y) in p.constraints.iter().zip(&s.duals) {
                dual_obj += c.rhs * y;
            }
            for (j, rc) in s.reduced_costs.iter().enumerate() {
                let sense_mul = if p.sense == Sense::Min { 1.0 } else { -1.0 };
                let r = sense_mul * rc;
                if r > 0.0 {
                    dual_obj += rc * p.bounds[j].0;
                } else if r < 0.0 {
                    dual_obj += rc * p.bounds[j].1;
                }
            }
            assert!(
                (dual_obj - s.value).abs() <= 1e-7 * (1.0 + s.value.abs()),
                "instance {i}: dual {} vs primal {}",
                dual_obj,
                s.value
            );
            // Complementary slackness per constraint.
            for (c, y) in p.constraints.iter().zip(&s.duals) {
                let slack = dot(&c.coeffs, &s.x) - c.rhs;
                assert!(
                    (y * slack).abs() <= tol::COMP_TOL * (1.0 + y.abs()),
                    "instance {i}: y {y} slack {slack}"
                );
            }
        }
    }

    #[test]
    fn determinism_bit_identical() {
        let mut stream = Stream::new(5, "det", 0);
        let p = random_box_lp(&mut stream);
        let a = solve_lp(&p).unwrap();
        let b = solve_lp(&p).unwrap();
        assert_eq!(a.status, b.status);
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        assert_eq!(a.basis_id, b.basis_id);
        for (x, y) in a.x.iter().zip(&b.x) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }

    #[test]
    fn milp_without_binaries_matches_lp() {
        let mut optimal_seen = 0;
        for i in 0..12 {
            let mut stream = Stream::new(9, "milp-degenerate", i);
            let p = random_box_lp(&mut stream);
            let lp_sol = solve_lp(&p).unwrap();
            if lp_sol.status == LpStatus::Unbounded {
                continue;
            }
            let milp = MilpProblem {
                lp: p,
                binaries: vec![],
            };
            let m = solve_milp(&milp).unwrap();
            match lp_sol.status {
                LpStatus::Optimal => {
                    assert_eq!(m.status, MilpStatus::Optimal);
                    assert!((m.value - lp_sol.value).abs() < 1e-9);
                    optimal_seen += 1;
                }
                LpStatus::Infeasible => assert_eq!(m.status, MilpStatus::Infeasible),
                LpStatus::Unbounded => unreachable!(),
            }
        }
        assert!(optimal_seen > 0);
    }

    #[test]
    fn milp_single_binary() {
        // min x s.t. x in {0,1}, x >= 0.3 -> x = 1
        let mut lp = lp(vec![1.0], vec![(0.0, 1.0)]);
        lp.add_constraint(vec![1.0], Relation::Ge, 0.3);
        let p = MilpProblem {
            lp,
            binaries: vec![0],
        };
        let s = solve_milp(&p).unwrap();
        assert_eq!(s.status, MilpStatus::Optimal);
        assert!((s.value - 1.0).abs() < 1e-9);
        assert!((s.x[0] - 1.0).abs() <= tol::INT_TOL);
    }

    /// Exhaustive oracle: try all binary assignments, solve the residual LP.
    fn milp_by_enumeration(p: &MilpProblem) -> Option<f64> {
        let k = p.binaries.len();
        let sense_mul = if p.lp.sense == Sense::Min { 1.0 } else { -1.0 };
        let mut best: Option<f64> = None;
        for mask in 0u32..(1 << k) {
            let mut lp = p.lp.clone();
            for (bit, &j) in p.binaries.iter().enumerate() {
                let v = if mask & (1 << bit) != 0 { 1.0 } else { 0.0 };
                // Respect original bounds: an assignment outside them is infeasible.
                let (l, u) = lp.bounds[j];
                if v < l - 1e-12 || v > u + 1e-12 {
                    lp.add_constraint(
                        {
                            let mut c = vec![0.0; lp.num_vars()];
                            c[j] = 1.0;
                            c
                        },
                        Relation::Eq,
                        f64::NAN, // unsatisfiable marker
                    );
                    continue;
                }
                lp.bounds[j] = (v, v);
            }
            if lp.constraints.iter().any(|c| c.rhs.is_nan()) {
                continue;
            }
            if let Ok(s) = solve_lp(&lp) {
                if s.status == LpStatus::Optimal {
                    let v = sense_mul * s.value;
                    best = Some(match best {
                        None => v,
                        Some(b) => b.min(v),
                    });
                }
            }
        }
        best.map(|v| sense_mul * v)
    }

    fn random_milp(stream: &mut Stream) -> MilpProblem {
        let mut lp = random_box_lp(stream);
        let n = lp.num_vars();
        let nb = 1 + stream.next_index(n.min(4));
        let mut binaries = Vec::new();
        for j in 0..nb {
            lp.bounds[j] = (0.0, 1.0);
            binaries.push(j);
        }
        MilpProblem { lp, binaries }
    }

    #[test]
    fn seeded_milps_match_enumeration() {
        let mut checked = 0;
        for i in 0..40 {
            let mut stream = Stream::new(4242, "milp-oracle", i);
            let p = random_milp(&mut stream);
            let fast = solve_milp(&p).unwrap();
            let oracle = milp_by_enumeration(&p);
            match (fast.status, oracle) {
                (MilpStatus::Optimal, Some(v)) => {
                    assert!(
                        (fast.value - v).abs() <= 1e-7 * (1.0 + v.abs()),
                        "instance {i}: bnb {} vs enumeration {}",
                        fast.value,
                        v
                    );
                    checked += 1;
                }
                (MilpStatus::Infeasible, None) => {}
                (a, b) => panic!("instance {i}: status mismatch {a:?} vs {b:?}"),
            }
        }
        assert!(checked > 5);
    }

    #[test]
    fn milp_value_dominates_relaxation() {
        for i in 0..25 {
            let mut stream = Stream::new(31, "milp-relax", i);
            let p = random_milp(&mut stream);
            let m = match solve_milp(&p) {
                Ok(m) => m,
                Err(_) => continue,
            };
            if m.status != MilpStatus::Optimal {
                continue;
            }
            let r = solve_lp(&p.lp).unwrap();
            if r.status == LpStatus::Optimal {
                let sense_mul = if p.lp.sense == Sense::Min { 1.0 } else { -1.0 };
                assert!(sense_mul * m.value >= sense_mul * r.value - 1e-9);
            }
        }
    }

    #[test]
    fn node_budget_reports_incumbent_and_bound() {
        // A problem that needs more than one node.
        let mut lp = LpProblem {
            sense: Sense::Min,
            cost: vec![-1.0, -1.0, -1.0],
            constraints: Vec::new(),
            bounds: vec![(0.0, 1.0); 3],
        };
        lp.add_constraint(vec![2.0, 2.0, 2.0], Relation::Le, 3.0);
        let p = MilpProblem {
            lp,
            binaries: vec![0, 1, 2],
        };
        let err = solve_milp_with(
            &p,
            &MilpOptions {
                node_budget: 1,
                ..Default::default()
            },
        )
        .unwrap_err();
        match err {
            Error::Budget { bound, .. } => assert!(bound.is_finite() || bound == f64::NEG_INFINITY),
            other => panic!("expected budget error, got {other:?}"),
        }
    }

    #[test]
    fn brute_force_unit_square() {
        let p = lp(vec![1.0, 1.0], vec![(0.0, 1.0); 2]);
        let s = brute_force_lp(&p).unwrap();
        assert!(s.value.abs() < 1e-12);
        let mut p2 = p;
        p2.cost = vec![-1.0, -1.0];
        let s2 = brute_force_lp(&p2).unwrap();
        assert!((s2.value + 2.0).abs() < 1e-12);
        assert!((s2.x[0] - 1.0).abs() < 1e-9 && (s2.x[1] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn brute_force_refuses_unbounded_input() {
        let p = lp(vec![1.0], vec![(0.0, f64::INFINITY)]);
        assert!(matches!(brute_force_lp(&p), Err(Error::Unbounded(_))));
    }

    #[test]
    fn incumbent_hint_short_circuits() {
        // Objective is a sum of nonnegative variables: trivial bound 0.
        let mut lp = lp(vec![1.0, 1.0], vec![(0.0, f64::INFINITY), (0.0, 1.0)]);
        lp.add_constraint(vec![1.0, -1.0], Relation::Ge, 0.0);
        let p = MilpProblem {
            lp,
            binaries: vec![1],
        };
        let s = solve_milp_with(
            &p,
            &MilpOptions {
                incumbent_hint: Some(vec![0.0, 0.0]),
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(s.nodes, 0);
        assert!(s.value.abs() < 1e-12);
    }
}
