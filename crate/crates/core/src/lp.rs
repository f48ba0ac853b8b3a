//! Exact two-phase simplex over rationals with Bland's rule, plus a lazy
//! constraint loop for cutting-plane solves.
//!
//! Variables are nonnegative unless marked free. Every row receives an
//! artificial column; those columns stay in the tableau during phase two (they
//! are never allowed to enter) so row duals can be read from their reduced
//! costs.

use num_traits::{One, Signed, Zero};

use crate::error::LpError;
use crate::rational::Rational;

/// Environment variable overriding the lazy-cut round limit.
pub const ITERATION_CAP_VAR: &str = "BORDER_ITERATION_CAP";
pub const DEFAULT_ITERATION_CAP: usize = 1000;

pub fn iteration_cap() -> usize {
    std::env::var(ITERATION_CAP_VAR)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_ITERATION_CAP)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    pub coeffs: Vec<(usize, Rational)>,
    pub sense: Sense,
    pub rhs: Rational,
}

impl Constraint {
    pub fn le(coeffs: Vec<(usize, Rational)>, rhs: Rational) -> Self {
        Constraint {
            coeffs,
            sense: Sense::Le,
            rhs,
        }
    }

    pub fn ge(coeffs: Vec<(usize, Rational)>, rhs: Rational) -> Self {
        Constraint {
            coeffs,
            sense: Sense::Ge,
            rhs,
        }
    }

    pub fn eq(coeffs: Vec<(usize, Rational)>, rhs: Rational) -> Self {
        Constraint {
            coeffs,
            sense: Sense::Eq,
            rhs,
        }
    }

    pub fn is_satisfied(&self, x: &[Rational]) -> bool {
        let lhs = crate::rational::sparse_dot(&self.coeffs, x);
        match self.sense {
            Sense::Le => lhs <= self.rhs,
            Sense::Ge => lhs >= self.rhs,
            Sense::Eq => lhs == self.rhs,
        }
    }
}

/// Maximize `objective · x` subject to `constraints`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LinearProgram {
    pub num_vars: usize,
    pub objective: Vec<(usize, Rational)>,
    pub constraints: Vec<Constraint>,
    pub free: Vec<usize>,
}

impl LinearProgram {
    pub fn new(num_vars: usize) -> Self {
        LinearProgram {
            num_vars,
            ..Default::default()
        }
    }

    pub fn maximize(mut self, objective: Vec<(usize, Rational)>) -> Self {
        self.objective = objective;
        self
    }

    pub fn add(&mut self, c: Constraint) {
        self.constraints.push(c);
    }

    pub fn set_free(&mut self, var: usize) {
        self.free.push(var);
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LpSolution {
    pub x: Vec<Rational>,
    pub objective: Rational,
    /// One dual value per constraint, in the sign convention of the
    /// maximization: `≤` rows have `y ≥ 0`, `≥` rows `y ≤ 0`.
    pub duals: Vec<Rational>,
}

struct Tableau {
    rows: Vec<Vec<Rational>>,
    obj: Vec<Rational>,
    basis: Vec<usize>,
    width: usize,
}

impl Tableau {
    fn rhs(&self) -> usize {
        self.width
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let mut prow = std::mem::take(&mut self.rows[r]);
        let piv = prow[c].clone();
        if !piv.is_one() {
            for v in prow.iter_mut().filter(|v| !v.is_zero()) {
                *v /= &piv;
            }
        }
        let nz: Vec<usize> = (0..prow.len()).filter(|&k| !prow[k].is_zero()).collect();
        let eliminate = |row: &mut Vec<Rational>| {
            let f = row[c].clone();
            if f.is_zero() {
                return;
            }
            for &k in &nz {
                let delta = &f * &prow[k];
                row[k] -= delta;
            }
        };
        for row in self.rows.iter_mut() {
            if !row.is_empty() {
                eliminate(row);
            }
        }
        eliminate(&mut self.obj);
        self.rows[r] = prow;
        self.basis[r] = c;
    }

    /// Minimizes the objective row with Bland's rule over allowed columns.
    fn run(&mut self, allowed: impl Fn(usize) -> bool) -> Result<(), LpError> {
        loop {
            let Some(enter) = (0..self.width).find(|&j| allowed(j) && self.obj[j].is_negative())
            else {
                return Ok(());
            };
            let rhs = self.rhs();
            let mut best: Option<(usize, Rational)> = None;
            for (r, row) in self.rows.iter().enumerate() {
                if !row[enter].is_positive() {
                    continue;
                }
                let ratio = &row[rhs] / &row[enter];
                let better = match &best {
                    None => true,
                    Some((br, bv)) => {
                        ratio < *bv || (ratio == *bv && self.basis[r] < self.basis[*br])
                    }
                };
                if better {
                    best = Some((r, ratio));
                }
            }
            let Some((leave, _)) = best else {
                return Err(LpError::Unbounded);
            };
            self.pivot(leave, enter);
        }
    }

    fn load_objective(&mut self, costs: &[Rational]) {
        let rhs = self.rhs();
        self.obj = costs.to_vec();
        self.obj.push(Rational::zero());
        for r in 0..self.rows.len() {
            let cb = self.obj[self.basis[r]].clone();
            if cb.is_zero() {
                continue;
            }
            for k in 0..=rhs {
                if !self.rows[r][k].is_zero() {
                    let delta = &cb * &self.rows[r][k];
                    self.obj[k] -= delta;
                }
            }
        }
    }
}

/// Solves `lp` exactly.
pub fn solve(lp: &LinearProgram) -> Result<LpSolution, LpError> {
    let n = lp.num_vars;
    let rows = lp.constraints.len();
    // Columns: structural, mirrored free parts, one slack per inequality,
    // one artificial per row.
    let mut free_col = vec![None; n];
    let mut next = n;
    let mut free_sorted = lp.free.clone();
    free_sorted.sort_unstable();
    free_sorted.dedup();
    for &v in &free_sorted {
        free_col[v] = Some(next);
        next += 1;
    }
    let mut slack_col = vec![None; rows];
    for (r, c) in lp.constraints.iter().enumerate() {
        if c.sense != Sense::Eq {
            slack_col[r] = Some(next);
            next += 1;
        }
    }
    let art_start = next;
    let width = art_start + rows;

    let mut sigma = Vec::with_capacity(rows);
    let mut table = Vec::with_capacity(rows);
    for (r, c) in lp.constraints.iter().enumerate() {
        let mut row = vec![Rational::zero(); width + 1];
        for (k, a) in &c.coeffs {
            row[*k] += a;
            if let Some(m) = free_col[*k] {
                row[m] -= a;
            }
        }
        match c.sense {
            Sense::Le => row[slack_col[r].unwrap()] = Rational::one(),
            Sense::Ge => row[slack_col[r].unwrap()] = -Rational::one(),
            Sense::Eq => {}
        }
        row[width] = c.rhs.clone();
        let s = if c.rhs.is_negative() {
            for v in row.iter_mut() {
                *v = -&*v;
            }
            -Rational::one()
        } else {
            Rational::one()
        };
        row[art_start + r] = Rational::one();
        sigma.push(s);
        table.push(row);
    }

    let mut t = Tableau {
        rows: table,
        obj: Vec::new(),
        basis: (art_start..width).collect(),
        width,
    };

    let mut phase1 = vec![Rational::zero(); width];
    for c in phase1.iter_mut().skip(art_start) {
        *c = Rational::one();
    }
    t.load_objective(&phase1);
    t.run(|_| true)?;
    if !t.obj[width].is_zero() {
        return Err(LpError::Infeasible);
    }
    for r in 0..rows {
        if t.basis[r] >= art_start {
            if let Some(c) = (0..art_start).find(|&c| !t.rows[r][c].is_zero()) {
                t.pivot(r, c);
            }
        }
    }

    let mut costs = vec![Rational::zero(); width];
    for (k, c) in &lp.objective {
        costs[*k] -= c;
        if let Some(m) = free_col[*k] {
            costs[m] += c;
        }
    }
    t.load_objective(&costs);
    t.run(|j| j < art_start)?;

    let mut values = vec![Rational::zero(); width];
    for (r, &b) in t.basis.iter().enumerate() {
        values[b] = t.rows[r][width].clone();
    }
    let x: Vec<Rational> = (0..n)
        .map(|k| match free_col[k] {
            Some(m) => &values[k] - &values[m],
            None => values[k].clone(),
        })
        .collect();
    let objective = crate::rational::sparse_dot(&lp.objective, &x);
    let duals = (0..rows)
        .map(|r| &sigma[r] * &t.obj[art_start + r])
        .collect();
    Ok(LpSolution {
        x,
        objective,
        duals,
    })
}

/// Outcome of a cutting-plane solve.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LazySolution {
    pub solution: LpSolution,
    pub rounds: usize,
    pub cuts: Vec<Constraint>,
}

/// Re-solves `lp` after adding whatever constraints `oracle` reports as
/// violated at the current optimum, until it reports none.
pub fn solve_lazy<F>(lp: &LinearProgram, cap: usize, mut oracle: F) -> Result<LazySolution, LpError>
where
    F: FnMut(&[Rational]) -> Vec<Constraint>,
{
    let mut working = lp.clone();
    let mut cuts = Vec::new();
    for round in 0..=cap {
        let solution = solve(&working)?;
        let new = oracle(&solution.x);
        if new.is_empty() {
            return Ok(LazySolution {
                solution,
                rounds: round,
                cuts,
            });
        }
        for c in new {
            if working.constraints.contains(&c) {
                // A repeated cut that is still violated means the oracle and
                // the solver disagree; stop instead of looping forever.
                return Err(LpError::IterationCap(round));
            }
            cuts.push(c.clone());
            working.add(c);
        }
    }
    Err(LpError::IterationCap(cap))
}
