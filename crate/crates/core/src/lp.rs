//! Dense two-phase tableau simplex with Bland's anti-cycling rule.
//!
//! Problems are in the form `min cᵀx  s.t.  Ax >= b,  x >= 0`. The solver is
//! generic over [`Scalar`], so the same code runs in floating point and in
//! exact rational arithmetic.
//!
//! When every cost is non-negative and there are more rows than columns the
//! dual `max bᵀy  s.t.  Aᵀy <= c,  y >= 0` is solved instead: its origin is
//! feasible, so no phase I is needed and the tableau has one row per primal
//! variable. Either route fills in the same certificate.


use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// What a variable stands for in a decomposition LP.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum VarMeta {
    /// `g(A)` for a subset bitmask.
    Subset(u128),
    /// `c_g[k]` of a symmetric profile.
    Cardinality(usize),
    /// `g(a, b)` on a false-negative / false-positive grid.
    Counts(usize, usize),
    Plain,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RowKind {
    /// Supermodularity of the supermodular part.
    Supermodular,
    /// Submodularity of the remainder.
    Submodular,
    Nonnegative,
    Other,
}

/// `Σ coeffs · x >= rhs`, stored sparsely.
#[derive(Clone, Debug)]
pub struct Constraint<T> {
    pub coeffs: Vec<(usize, T)>,
    pub rhs: T,
    pub kind: RowKind,
}

impl<T: Scalar> Constraint<T> {
    pub fn lhs(&self, x: &[T]) -> T {
        self.coeffs.iter().fold(T::zero(), |acc, (j, a)| acc + a.clone() * x[*j].clone())
    }
}

/// `min cᵀx` subject to `≥` rows and implicit `x >= 0`.
#[derive(Clone, Debug)]
pub struct LpProblem<T> {
    pub objective: Vec<T>,
    pub constraints: Vec<Constraint<T>>,
    pub variables: Vec<VarMeta>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum LpRoute {
    /// Dual route whenever costs are non-negative and rows outnumber columns.
    #[default]
    Auto,
    Primal,
    Dual,
}

#[derive(Clone, Debug, Default)]
pub struct SolveOptions {
    pub route: LpRoute,
    /// Column order in which Bland's rule scans the primal variables; a
    /// permutation of `0..n`. `None` means natural order.
    pub variable_order: Option<Vec<usize>>,
    pub max_pivots: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct LpSolution<T> {
    pub status: LpStatus,
    pub x: Vec<T>,
    /// One non-negative multiplier per constraint.
    pub duals: Vec<T>,
    pub objective: T,
    pub dual_objective: T,
    /// Rows satisfied with equality (within tolerance).
    pub active: Vec<usize>,
    pub primal_residual: T,
    pub dual_residual: T,
    pub complementarity: T,
    pub pivots: usize,
}

impl<T: Scalar> LpSolution<T> {
    pub fn duality_gap(&self) -> T {
        (self.objective.clone() - self.dual_objective.clone()).abs()
    }

    /// True when every certificate residual is within `tol`.
    pub fn certified(&self, tol: &T) -> bool {
        self.status == LpStatus::Optimal
            && self.primal_residual <= *tol
            && self.dual_residual <= *tol
            && self.complementarity <= *tol
    }
}

impl<T: Scalar> LpProblem<T> {
    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_rows(&self) -> usize {
        self.constraints.len()
    }

    pub fn count_rows(&self, kind: RowKind) -> usize {
        self.constraints.iter().filter(|c| c.kind == kind).count()
    }

    fn validate(&self) -> Result<()> {
        let n = self.num_vars();
        if self.variables.len() != n {
            return Err(Error::Lp {
                status: "malformed".into(),
                detail: format!("{} variable labels for {n} variables", self.variables.len()),
            });
        }
        for (r, c) in self.constraints.iter().enumerate() {
            if let Some((j, _)) = c.coeffs.iter().find(|(j, _)| *j >= n) {
                return Err(Error::Lp {
                    status: "malformed".into(),
                    detail: format!("row {r} references variable {j} of {n}"),
                });
            }
        }
        Ok(())
    }

    fn dense_rows(&self) -> Vec<Vec<T>> {
        let n = self.num_vars();
        self.constraints
            .iter()
            .map(|c| {
                let mut row = vec![T::zero(); n];
                for (j, a) in &c.coeffs {
                    row[*j] = row[*j].clone() + a.clone();
                }
                row
            })
            .collect()
    }

    /// Fills residuals, objective values and the active set for a candidate
    /// primal/dual pair.
    pub fn certificate(&self, x: Vec<T>, duals: Vec<T>, pivots: usize) -> LpSolution<T> {
        let n = self.num_vars();
        let tol = T::feasibility_tolerance();
        let mut primal_residual = x.iter().map(|v| (-v.clone()).positive_part()).fold(T::zero(), T::max_of);
        let mut complementarity = T::zero();
        let mut active = Vec::new();
        let mut reduced = self.objective.clone();
        for (r, c) in self.constraints.iter().enumerate() {
            let slack = c.lhs(&x) - c.rhs.clone();
            primal_residual = T::max_of(primal_residual, (-slack.clone()).positive_part());
            complementarity = T::max_of(complementarity, (slack.clone() * duals[r].clone()).abs());
            if slack.abs() <= tol {
                active.push(r);
            }
            for (j, a) in &c.coeffs {
                reduced[*j] = reduced[*j].clone() - a.clone() * duals[r].clone();
            }
        }
        let mut dual_residual = duals.iter().map(|v| (-v.clone()).positive_part()).fold(T::zero(), T::max_of);
        for j in 0..n {
            dual_residual = T::max_of(dual_residual, (-reduced[j].clone()).positive_part());
            complementarity = T::max_of(complementarity, (reduced[j].clone() * x[j].clone()).abs());
        }
        let objective = self
            .objective
            .iter()
            .zip(&x)
            .fold(T::zero(), |acc, (c, v)| acc + c.clone() * v.clone());
        let dual_objective = self
            .constraints
            .iter()
            .zip(&duals)
            .fold(T::zero(), |acc, (c, y)| acc + c.rhs.clone() * y.clone());
        LpSolution {
            status: LpStatus::Optimal,
            x,
            duals,
            objective,
            dual_objective,
            active,
            primal_residual,
            dual_residual,
            complementarity,
            pivots,
        }
    }
}

/// Solves with default options.
pub fn solve_lp<T: Scalar>(prob: &LpProblem<T>) -> Result<LpSolution<T>> {
    solve_lp_with(prob, &SolveOptions::default())
}

pub fn solve_lp_with<T: Scalar>(prob: &LpProblem<T>, opts: &SolveOptions) -> Result<LpSolution<T>> {
    prob.validate()?;
    let n = prob.num_vars();
    let m = prob.num_rows();
    let order: Vec<usize> = match &opts.variable_order {
        Some(o) => {
            let mut seen = vec![false; n];
            if o.len() != n || o.iter().any(|&j| j >= n || std::mem::replace(&mut seen[j], true)) {
                return Err(Error::Config("variable_order must be a permutation".into()));
            }
            o.clone()
        }
        None => (0..n).collect(),
    };
    let costs_nonneg = prob.objective.iter().all(|c| *c >= T::zero());
    let dual = match opts.route {
        LpRoute::Auto => costs_nonneg && m > n,
        LpRoute::Primal => false,
        LpRoute::Dual => {
            if !costs_nonneg {
                return Err(Error::Config("dual route needs non-negative costs".into()));
            }
            true
        }
    };
    let max_pivots = opts.max_pivots.unwrap_or(50_000 + 50 * (n + m));

    // `pos` maps a permuted column back to the original variable index.
    let a = prob.dense_rows();
    let (x, y, pivots) = if !dual {
        let permuted: Vec<Vec<T>> = a
            .iter()
            .map(|row| order.iter().map(|&j| row[j].clone()).collect())
            .collect();
        let c: Vec<T> = order.iter().map(|&j| prob.objective[j].clone()).collect();
        let b: Vec<T> = prob.constraints.iter().map(|r| r.rhs.clone()).collect();
        let out = Tableau::solve(&c, &permuted, &b, max_pivots)?;
        let (xp, y, pivots) = match out {
            Outcome::Optimal { x, y, pivots } => (x, y, pivots),
            Outcome::Infeasible => return Ok(failed(prob, LpStatus::Infeasible)),
            Outcome::Unbounded => return Ok(failed(prob, LpStatus::Unbounded)),
        };
        let mut x = vec![T::zero(); n];
        for (k, &j) in order.iter().enumerate() {
            x[j] = xp[k].clone();
        }
        (x, y, pivots)
    } else {
        // Dual in primal form: min -bᵀy  s.t. -Aᵀy >= -c, y >= 0. Its rows are
        // primal variables, taken in `order`.
        let at: Vec<Vec<T>> = order
            .iter()
            .map(|&j| a.iter().map(|row| -row[j].clone()).collect())
            .collect();
        let c: Vec<T> = prob.constraints.iter().map(|r| -r.rhs.clone()).collect();
        let b: Vec<T> = order.iter().map(|&j| -prob.objective[j].clone()).collect();
        let out = Tableau::solve(&c, &at, &b, max_pivots)?;
        let (y, xp, pivots) = match out {
            Outcome::Optimal { x, y, pivots } => (x, y, pivots),
            Outcome::Unbounded => return Ok(failed(prob, LpStatus::Infeasible)),
            Outcome::Infeasible => return Ok(failed(prob, LpStatus::Unbounded)),
        };
        let mut x = vec![T::zero(); n];
        for (k, &j) in order.iter().enumerate() {
            x[j] = xp[k].clone();
        }
        (x, y, pivots)
    };
    Ok(prob.certificate(x, y, pivots))
}

fn failed<T: Scalar>(prob: &LpProblem<T>, status: LpStatus) -> LpSolution<T> {
    LpSolution {
        status,
        x: vec![T::zero(); prob.num_vars()],
        duals: vec![T::zero(); prob.num_rows()],
        objective: T::zero(),
        dual_objective: T::zero(),
        active: Vec::new(),
        primal_residual: T::zero(),
        dual_residual: T::zero(),
        complementarity: T::zero(),
        pivots: 0,
    }
}

enum Outcome<T> {
    Optimal { x: Vec<T>, y: Vec<T>, pivots: usize },
    Infeasible,
    Unbounded,
}

/// Tableau over columns `[structural n | surplus m | artificial k | rhs]`.
struct Tableau<T> {
    rows: Vec<Vec<T>>,
    /// Reduced-cost row; last entry is minus the objective value.
    cost: Vec<T>,
    basis: Vec<usize>,
    n: usize,
    m: usize,
    width: usize,
    pivots: usize,
    max_pivots: usize,
}

impl<T: Scalar> Tableau<T> {
    fn solve(c: &[T], a: &[Vec<T>], b: &[T], max_pivots: usize) -> Result<Outcome<T>> {
        let n = c.len();
        let m = a.len();
        let needs_art: Vec<bool> = b.iter().map(|v| *v > T::zero()).collect();
        let k = needs_art.iter().filter(|v| **v).count();
        let width = n + m + k;
        let mut rows = Vec::with_capacity(m);
        let mut basis = Vec::with_capacity(m);
        let mut next_art = n + m;
        for i in 0..m {
            let mut row = vec![T::zero(); width + 1];
            if needs_art[i] {
                row[..n].clone_from_slice(&a[i][..n]);
                row[n + i] = -T::one();
                row[next_art] = T::one();
                row[width] = b[i].clone();
                basis.push(next_art);
                next_art += 1;
            } else {
                for j in 0..n {
                    row[j] = -a[i][j].clone();
                }
                row[n + i] = T::one();
                row[width] = -b[i].clone();
                basis.push(n + i);
            }
            rows.push(row);
        }
        let mut t = Tableau { rows, cost: vec![T::zero(); width + 1], basis, n, m, width, pivots: 0, max_pivots };

        if k > 0 {
            // Phase I: minimise the sum of artificials.
            let mut cost = vec![T::zero(); width + 1];
            for c in &mut cost[n + m..width] {
                *c = T::one();
            }
            t.cost = cost;
            t.price_out();
            if !t.iterate(width)? {
                unreachable!("phase I objective is bounded below by zero");
            }
            if -t.cost[width].clone() > T::feasibility_tolerance() {
                return Ok(Outcome::Infeasible);
            }
            t.drive_out_artificials();
        }

        let mut cost = vec![T::zero(); width + 1];
        cost[..n].clone_from_slice(c);
        t.cost = cost;
        t.price_out();
        if !t.iterate(n + m)? {
            return Ok(Outcome::Unbounded);
        }

        let mut x = vec![T::zero(); n];
        for (i, &bv) in t.basis.iter().enumerate() {
            if bv < n {
                x[bv] = t.rows[i][width].clone().positive_part();
            }
        }
        let y = (0..m).map(|i| t.cost[n + i].clone().positive_part()).collect();
        Ok(Outcome::Optimal { x, y, pivots: t.pivots })
    }

    /// Makes the cost row zero on basic columns.
    fn price_out(&mut self) {
        for i in 0..self.m {
            let bv = self.basis[i];
            let factor = self.cost[bv].clone();
            if !factor.is_zero() {
                for j in 0..=self.width {
                    if !self.rows[i][j].is_zero() {
                        self.cost[j] = self.cost[j].clone() - factor.clone() * self.rows[i][j].clone();
                    }
                }
            }
        }
    }

    /// Bland's rule over the first `limit` columns. Returns false when unbounded.
    fn iterate(&mut self, limit: usize) -> Result<bool> {
        let tol = T::feasibility_tolerance();
        let piv_tol = T::pivot_tolerance();
        loop {
            let Some(enter) = (0..limit).find(|&j| self.cost[j] < -tol.clone()) else {
                return Ok(true);
            };
            let mut leave: Option<(usize, T)> = None;
            for i in 0..self.m {
                let a = &self.rows[i][enter];
                if *a > piv_tol {
                    let ratio = self.rows[i][self.width].clone() / a.clone();
                    let better = match &leave {
                        None => true,
                        Some((li, best)) => {
                            ratio < best.clone() - tol.clone()
                                || (ratio <= best.clone() + tol.clone() && self.basis[i] < self.basis[*li])
                        }
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            let Some((row, _)) = leave else {
                return Ok(false);
            };
            self.pivot(row, enter);
            if self.pivots > self.max_pivots {
                return Err(Error::Lp {
                    status: "iteration limit".into(),
                    detail: format!("{} pivots without reaching optimality", self.pivots),
                });
            }
        }
    }

    fn pivot(&mut self, r: usize, c: usize) {
        self.pivots += 1;
        let inv = T::one() / self.rows[r][c].clone();
        let nz: Vec<usize> = (0..=self.width).filter(|&j| !self.rows[r][j].is_zero()).collect();
        for &j in &nz {
            self.rows[r][j] = self.rows[r][j].clone() * inv.clone();
        }
        self.rows[r][c] = T::one();
        let snap = T::pivot_tolerance();
        let pivot_row = self.rows[r].clone();
        let eliminate = |target: &mut Vec<T>| {
            let factor = target[c].clone();
            if factor.is_zero() {
                return;
            }
            for &j in &nz {
                let v = target[j].clone() - factor.clone() * pivot_row[j].clone();
                target[j] = if v.abs() <= snap.clone() * T::ratio(1, 100) { T::zero() } else { v };
            }
            target[c] = T::zero();
        };
        for i in 0..self.m {
            if i != r {
                eliminate(&mut self.rows[i]);
            }
        }
        eliminate(&mut self.cost);
        self.basis[r] = c;
    }

    /// After phase I, pivots zero-valued artificials out of the basis where a
    /// non-artificial column allows it. Rows where none does are redundant and
    /// keep their artificial at zero; phase II never re-enters artificials.
    fn drive_out_artificials(&mut self) {
        let first_art = self.n + self.m;
        for i in 0..self.m {
            if self.basis[i] >= first_art {
                if let Some(j) = (0..first_art).find(|&j| self.rows[i][j].abs() > T::pivot_tolerance()) {
                    self.pivot(i, j);
                }
            }
        }
    }
}
