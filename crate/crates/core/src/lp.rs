//! Exact rational linear programming over box-bounded variables.
//!
//! Variables live in [0, 1] (the polytope of randomized tests); constraints
//! are linear with <=, >= or =; the objective is maximized. The solver is a
//! two-phase tableau simplex with Bland's index-least pivot rule, which is
//! anti-cycling and makes the returned vertex deterministic. Every optimum is
//! certified internally by an exact dual solution.

use num::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::ratio::Ratio;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone)]
pub struct Constraint {
    pub coeffs: Vec<Ratio>,
    pub rel: Relation,
    pub rhs: Ratio,
}

/// max objective . x  subject to the constraints and x in [0, 1]^n.
#[derive(Debug, Clone)]
pub struct LinearProgram {
    pub num_vars: usize,
    pub objective: Vec<Ratio>,
    pub constraints: Vec<Constraint>,
}

impl LinearProgram {
    pub fn new(num_vars: usize, objective: Vec<Ratio>) -> Result<Self> {
        if objective.len() != num_vars {
            return Err(Error::Validation(format!(
                "objective has {} coefficients for {} variables",
                objective.len(),
                num_vars
            )));
        }
        Ok(LinearProgram { num_vars, objective, constraints: Vec::new() })
    }

    pub fn add_constraint(&mut self, coeffs: Vec<Ratio>, rel: Relation, rhs: Ratio) -> Result<()> {
        if coeffs.len() != self.num_vars {
            return Err(Error::Validation(format!(
                "constraint has {} coefficients for {} variables",
                coeffs.len(),
                self.num_vars
            )));
        }
        self.constraints.push(Constraint { coeffs, rel, rhs });
        Ok(())
    }
}

/// An optimal vertex with its exact dual certificate over the canonical rows.
#[derive(Debug, Clone)]
pub struct LpSolution {
    pub assignment: Vec<Ratio>,
    pub value: Ratio,
    /// Dual multipliers, one per canonical row (see [`canonical_rows`]).
    pub dual: Vec<Ratio>,
}

#[derive(Debug, Clone)]
pub enum LpOutcome {
    Optimal(LpSolution),
    Infeasible,
    /// Impossible with box bounds, but the contract covers it.
    Unbounded,
}

/// A canonicalized row: rhs oriented nonnegative, Ge/Le preserved.
#[derive(Debug, Clone)]
pub struct CanonicalRow {
    pub coeffs: Vec<Ratio>,
    pub rel: Relation,
    pub rhs: Ratio,
}

/// The canonical row system solved internally: the user's constraints with
/// nonnegative right-hand sides, followed by the upper-bound rows x_j <= 1.
pub fn canonical_rows(lp: &LinearProgram) -> Vec<CanonicalRow> {
    let mut rows = Vec::with_capacity(lp.constraints.len() + lp.num_vars);
    for c in &lp.constraints {
        if c.rhs.is_negative() {
            let coeffs = c.coeffs.iter().map(|a| -a).collect();
            let rel = match c.rel {
                Relation::Le => Relation::Ge,
                Relation::Ge => Relation::Le,
                Relation::Eq => Relation::Eq,
            };
            rows.push(CanonicalRow { coeffs, rel, rhs: -&c.rhs });
        } else {
            rows.push(CanonicalRow { coeffs: c.coeffs.clone(), rel: c.rel, rhs: c.rhs.clone() });
        }
    }
    for j in 0..lp.num_vars {
        let mut coeffs = vec![Ratio::zero(); lp.num_vars];
        coeffs[j] = Ratio::one();
        rows.push(CanonicalRow { coeffs, rel: Relation::Le, rhs: Ratio::one() });
    }
    rows
}

struct Tableau {
    /// rows x cols matrix; the last column is the RHS.
    t: Vec<Vec<Ratio>>,
    /// Objective row, same width; stores reduced costs z_j - c_j.
    obj: Vec<Ratio>,
    basis: Vec<usize>,
    n_cols: usize,
    /// Initial unit column of each row (slack for Le, artificial for Ge/Eq).
    unit_col: Vec<usize>,
    artificial_cols: Vec<bool>,
}

impl Tableau {
    fn rhs_col(&self) -> usize {
        self.n_cols
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let rhs = self.rhs_col();
        let pivot_val = self.t[row][col].clone();
        debug_assert!(!pivot_val.is_zero());
        for j in 0..=rhs {
            if !self.t[row][j].is_zero() {
                self.t[row][j] = &self.t[row][j] / &pivot_val;
            }
        }
        for i in 0..self.t.len() {
            if i == row || self.t[i][col].is_zero() {
                continue;
            }
            let factor = std::mem::replace(&mut self.t[i][col], Ratio::zero());
            for j in 0..=rhs {
                if !self.t[row][j].is_zero() {
                    let delta = &factor * &self.t[row][j];
                    self.t[i][j] -= delta;
                }
            }
            self.t[i][col] = Ratio::zero();
        }
        if !self.obj[col].is_zero() {
            let factor = std::mem::replace(&mut self.obj[col], Ratio::zero());
            for j in 0..=rhs {
                if !self.t[row][j].is_zero() {
                    let delta = &factor * &self.t[row][j];
                    self.obj[j] -= delta;
                }
            }
            self.obj[col] = Ratio::zero();
        }
        self.basis[row] = col;
    }

    /// Bland's rule: entering = least-index eligible column; leaving = the
    /// minimum-ratio row, ties broken by least basis variable index.
    /// Returns false when no entering column exists (optimal).
    fn simplex(&mut self, allowed: impl Fn(usize) -> bool) -> Result<bool> {
        loop {
            let entering = (0..self.n_cols)
                .find(|&j| allowed(j) && self.obj[j].is_negative());
            let Some(col) = entering else {
                return Ok(true);
            };
            let rhs = self.rhs_col();
            let mut leave: Option<(usize, Ratio)> = None;
            for i in 0..self.t.len() {
                if self.t[i][col].is_positive() {
                    let ratio = &self.t[i][rhs] / &self.t[i][col];
                    let better = match &leave {
                        None => true,
                        Some((li, lr)) => {
                            ratio < *lr || (ratio == *lr && self.basis[i] < self.basis[*li])
                        }
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            let Some((row, _)) = leave else {
                return Ok(false); // unbounded in the entering direction
            };
            self.pivot(row, col);
        }
    }
}

/// Solves the program exactly. Infeasibility and unboundedness are reported
/// as outcomes, not errors; malformed programs are validation errors.
pub fn solve_lp(lp: &LinearProgram) -> Result<LpOutcome> {
    if lp.objective.len() != lp.num_vars {
        return Err(Error::Validation("objective length mismatch".into()));
    }
    for c in &lp.constraints {
        if c.coeffs.len() != lp.num_vars {
            return Err(Error::Validation("constraint length mismatch".into()));
        }
    }
    if lp.num_vars == 0 {
        return Err(Error::Validation("program has no variables".into()));
    }

    let rows = canonical_rows(lp);
    let m = rows.len();
    let n = lp.num_vars;

    // Column layout: structural | slack/surplus | artificial | rhs.
    let n_slack = rows.iter().filter(|r| r.rel != Relation::Eq).count();
    let n_art = rows.iter().filter(|r| r.rel != Relation::Le).count();
    let n_cols = n + n_slack + n_art;

    let mut t = vec![vec![Ratio::zero(); n_cols + 1]; m];
    let mut basis = vec![0usize; m];
    let mut unit_col = vec![0usize; m];
    let mut artificial_cols = vec![false; n_cols];

    let mut next_slack = n;
    let mut next_art = n + n_slack;
    for (i, row) in rows.iter().enumerate() {
        for (j, a) in row.coeffs.iter().enumerate() {
            t[i][j] = a.clone();
        }
        t[i][n_cols] = row.rhs.clone();
        match row.rel {
            Relation::Le => {
                t[i][next_slack] = Ratio::one();
                basis[i] = next_slack;
                unit_col[i] = next_slack;
                next_slack += 1;
            }
            Relation::Ge => {
                t[i][next_slack] = -Ratio::one();
                next_slack += 1;
                t[i][next_art] = Ratio::one();
                basis[i] = next_art;
                unit_col[i] = next_art;
                artificial_cols[next_art] = true;
                next_art += 1;
            }
            Relation::Eq => {
                t[i][next_art] = Ratio::one();
                basis[i] = next_art;
                unit_col[i] = next_art;
                artificial_cols[next_art] = true;
                next_art += 1;
            }
        }
    }

    let mut tab = Tableau {
        t,
        obj: vec![Ratio::zero(); n_cols + 1],
        basis,
        n_cols,
        unit_col,
        artificial_cols,
    };

    // Phase 1: maximize -(sum of artificials). Reduced costs: for cost
    // c = -1 on artificial columns, obj[j] = sum over artificial-basic rows
    // of -t[i][j], plus 1 on nonbasic artificial columns (all start basic).
    if n_art > 0 {
        for i in 0..m {
            if tab.artificial_cols[tab.basis[i]] {
                for j in 0..=n_cols {
                    let delta = tab.t[i][j].clone();
                    tab.obj[j] -= delta;
                }
                // Basic artificial's own reduced cost must stay 0.
                let b = tab.basis[i];
                tab.obj[b] = Ratio::zero();
            }
        }
        if !tab.simplex(|_| true)? {
            return Err(Error::Internal("phase 1 cannot be unbounded".into()));
        }
        // Phase-1 objective value is -(sum of artificials); stored negated in
        // the RHS cell of the objective row.
        let infeasibility = -tab.obj[n_cols].clone();
        if infeasibility.is_positive() {
            return Ok(LpOutcome::Infeasible);
        }
        // Pivot basic artificials out where possible; all-zero rows are
        // redundant and keep their artificial basic at zero.
        for i in 0..m {
            if tab.artificial_cols[tab.basis[i]] {
                let col = (0..n_cols)
                    .find(|&j| !tab.artificial_cols[j] && !tab.t[i][j].is_zero());
                if let Some(col) = col {
                    tab.pivot(i, col);
                }
            }
        }
    }

    // Phase 2: the real objective. Rebuild reduced costs from scratch.
    let cost = |j: usize| -> Ratio {
        if j < n {
            lp.objective[j].clone()
        } else {
            Ratio::zero()
        }
    };
    for j in 0..=n_cols {
        tab.obj[j] = if j < n_cols { -cost(j) } else { Ratio::zero() };
    }
    for i in 0..m {
        let cb = cost(tab.basis[i]);
        if !cb.is_zero() {
            for j in 0..=n_cols {
                if !tab.t[i][j].is_zero() {
                    let delta = &cb * &tab.t[i][j];
                    tab.obj[j] += delta;
                }
            }
        }
    }
    for i in 0..m {
        let b = tab.basis[i];
        tab.obj[b] = Ratio::zero();
    }

    let arts = tab.artificial_cols.clone();
    if !tab.simplex(|j| !arts[j])? {
        return Ok(LpOutcome::Unbounded);
    }

    // Extract the primal assignment.
    let mut assignment = vec![Ratio::zero(); n];
    for i in 0..m {
        if tab.basis[i] < n {
            assignment[tab.basis[i]] = tab.t[i][tab.rhs_col()].clone();
        }
    }
    let value: Ratio = lp
        .objective
        .iter()
        .zip(&assignment)
        .map(|(c, x)| c * x)
        .sum();

    // Duals: y_i is the reduced cost of row i's initial unit column
    // (those columns have zero cost, so obj[col] = z_col = y_i).
    let dual: Vec<Ratio> = (0..m).map(|i| tab.obj[tab.unit_col[i]].clone()).collect();

    let solution = LpSolution { assignment, value, dual };
    certify(lp, &solution)?;
    Ok(LpOutcome::Optimal(solution))
}

/// Verifies an optimum by exact weak duality: the assignment is primal
/// feasible, the duals are dual feasible, and both objectives agree.
pub fn certify(lp: &LinearProgram, sol: &LpSolution) -> Result<()> {
    let rows = canonical_rows(lp);
    if sol.assignment.len() != lp.num_vars || sol.dual.len() != rows.len() {
        return Err(Error::Shape("certificate dimensions mismatch".into()));
    }
    for x in &sol.assignment {
        if x.is_negative() {
            return Err(Error::Internal(format!("primal variable {} below 0", x)));
        }
    }
    for (i, row) in rows.iter().enumerate() {
        let lhs: Ratio = row
            .coeffs
            .iter()
            .zip(&sol.assignment)
            .map(|(a, x)| a * x)
            .sum();
        let ok = match row.rel {
            Relation::Le => lhs <= row.rhs,
            Relation::Ge => lhs >= row.rhs,
            Relation::Eq => lhs == row.rhs,
        };
        if !ok {
            return Err(Error::Internal(format!(
                "primal infeasible at canonical row {i}: {} vs {}",
                lhs, row.rhs
            )));
        }
        let y = &sol.dual[i];
        let sign_ok = match row.rel {
            Relation::Le => !y.is_negative(),
            Relation::Ge => !y.is_positive(),
            Relation::Eq => true,
        };
        if !sign_ok {
            return Err(Error::Internal(format!("dual sign violated at row {i}: y = {}", y)));
        }
    }
    // Dual feasibility: A^T y >= c componentwise (variables are nonnegative).
    for j in 0..lp.num_vars {
        let aty: Ratio = rows
            .iter()
            .zip(&sol.dual)
            .map(|(row, y)| &row.coeffs[j] * y)
            .sum();
        if aty < lp.objective[j] {
            return Err(Error::Internal(format!(
                "dual infeasible at variable {j}: {} < {}",
                aty, lp.objective[j]
            )));
        }
    }
    let primal_value: Ratio = lp
        .objective
        .iter()
        .zip(&sol.assignment)
        .map(|(c, x)| c * x)
        .sum();
    let dual_value: Ratio = rows
        .iter()
        .zip(&sol.dual)
        .map(|(row, y)| &row.rhs * y)
        .sum();
    if primal_value != sol.value || dual_value != sol.value {
        return Err(Error::Internal(format!(
            "objective mismatch: primal {}, dual {}, reported {}",
            primal_value, dual_value, sol.value
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratio::{int, ratio};

    fn opt(lp: &LinearProgram) -> LpSolution {
        match solve_lp(lp).unwrap() {
            LpOutcome::Optimal(s) => s,
            other => panic!("expected optimum, got {other:?}"),
        }
    }

    #[test]
    fn maximize_single_var_with_cap() {
        let mut lp = LinearProgram::new(1, vec![int(1)]).unwrap();
        lp.add_constraint(vec![int(1)], Relation::Le, ratio(1, 2)).unwrap();
        let s = opt(&lp);
        assert_eq!(s.value, ratio(1, 2));
        assert_eq!(s.assignment, vec![ratio(1, 2)]);
    }

    #[test]
    fn maximize_sum_with_budget() {
        let mut lp = LinearProgram::new(2, vec![int(1), int(1)]).unwrap();
        lp.add_constraint(vec![int(1), int(1)], Relation::Le, int(1)).unwrap();
        let s = opt(&lp);
        assert_eq!(s.value, int(1));
    }

    #[test]
    fn box_bounds_only() {
        let lp = LinearProgram::new(3, vec![int(2), int(-1), int(3)]).unwrap();
        let s = opt(&lp);
        assert_eq!(s.value, int(5));
        assert_eq!(s.assignment, vec![int(1), int(0), int(1)]);
    }

    #[test]
    fn equality_constraint() {
        let mut lp = LinearProgram::new(2, vec![int(1), int(0)]).unwrap();
        lp.add_constraint(vec![int(1), int(1)], Relation::Eq, ratio(3, 2)).unwrap();
        let s = opt(&lp);
        assert_eq!(s.value, int(1));
        assert_eq!(s.assignment, vec![int(1), ratio(1, 2)]);
    }

    #[test]
    fn ge_constraint_negative_rhs_orientation() {
        // x - y >= -1/2 is always satisfiable; maximize y - x gives 1/2 at y = x + 1/2.
        let mut lp = LinearProgram::new(2, vec![int(-1), int(1)]).unwrap();
        lp.add_constraint(vec![int(1), int(-1)], Relation::Ge, ratio(-1, 2)).unwrap();
        let s = opt(&lp);
        assert_eq!(s.value, ratio(1, 2));
    }

    #[test]
    fn infeasible_program() {
        let mut lp = LinearProgram::new(1, vec![int(1)]).unwrap();
        lp.add_constraint(vec![int(1)], Relation::Ge, int(2)).unwrap();
        assert!(matches!(solve_lp(&lp).unwrap(), LpOutcome::Infeasible));
    }

    #[test]
    fn infeasible_equalities() {
        let mut lp = LinearProgram::new(2, vec![int(0), int(0)]).unwrap();
        lp.add_constraint(vec![int(1), int(1)], Relation::Eq, int(1)).unwrap();
        lp.add_constraint(vec![int(1), int(1)], Relation::Eq, ratio(1, 2)).unwrap();
        assert!(matches!(solve_lp(&lp).unwrap(), LpOutcome::Infeasible));
    }

    #[test]
    fn redundant_equality_rows() {
        let mut lp = LinearProgram::new(2, vec![int(1), int(1)]).unwrap();
        lp.add_constraint(vec![int(1), int(1)], Relation::Eq, int(1)).unwrap();
        lp.add_constraint(vec![int(2), int(2)], Relation::Eq, int(2)).unwrap();
        let s = opt(&lp);
        assert_eq!(s.value, int(1));
    }

    #[test]
    fn certificate_rejects_tampering() {
        let mut lp = LinearProgram::new(1, vec![int(1)]).unwrap();
        lp.add_constraint(vec![int(1)], Relation::Le, ratio(1, 2)).unwrap();
        let mut s = opt(&lp);
        s.value = int(1);
        assert!(certify(&lp, &s).is_err());
    }

    #[test]
    fn malformed_program() {
        let lp = LinearProgram {
            num_vars: 2,
            objective: vec![int(1)],
            constraints: vec![],
        };
        assert!(solve_lp(&lp).is_err());
        assert!(LinearProgram::new(2, vec![int(1)]).is_err());
    }
}
