//! Dense two-phase simplex method with Bland's anti-cycling rule.
//!
//! Solves `min c^T x` subject to linear constraints and `x >= 0`. Sized for
//! the few-hundred-variable programs that arise in symmetrizability tests;
//! the tableau is stored densely.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug)]
struct Constraint {
    coeffs: Vec<(usize, f64)>,
    relation: Relation,
    rhs: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct LpOptions {
    /// Pivot, feasibility and optimality tolerance.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for LpOptions {
    fn default() -> Self {
        LpOptions {
            tol: 1e-9,
            max_iter: 100_000,
        }
    }
}

#[derive(Clone, Debug)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
}

/// Linear program over nonnegative variables.
#[derive(Clone, Debug)]
pub struct LinearProgram {
    vars: usize,
    objective: Vec<f64>,
    constraints: Vec<Constraint>,
}

impl LinearProgram {
    pub fn new(vars: usize) -> Self {
        LinearProgram {
            vars,
            objective: vec![0.0; vars],
            constraints: Vec::new(),
        }
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn set_cost(&mut self, var: usize, cost: f64) {
        self.objective[var] = cost;
    }

    /// Adds `sum coeffs[i].1 * x[coeffs[i].0]  (relation)  rhs`. Repeated
    /// indices are summed.
    pub fn add_constraint(&mut self, coeffs: Vec<(usize, f64)>, relation: Relation, rhs: f64) {
        debug_assert!(coeffs.iter().all(|(i, _)| *i < self.vars));
        self.constraints.push(Constraint {
            coeffs,
            relation,
            rhs,
        });
    }

    pub fn solve(&self, opts: LpOptions) -> Result<LpSolution> {
        Tableau::build(self).run(self, opts)
    }
}

struct Tableau {
    rows: usize,
    cols: usize,
    /// `rows x (cols + 1)`; the last column is the right-hand side.
    a: Vec<f64>,
    basis: Vec<usize>,
    artificial_start: usize,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Self {
        let rows = lp.constraints.len();
        let slacks = lp
            .constraints
            .iter()
            .filter(|c| c.relation != Relation::Eq)
            .count();
        let mut normalized: Vec<(Vec<f64>, Relation, f64)> = lp
            .constraints
            .iter()
            .map(|c| {
                let mut dense = vec![0.0; lp.vars];
                for &(i, v) in &c.coeffs {
                    dense[i] += v;
                }
                (dense, c.relation, c.rhs)
            })
            .collect();
        for (dense, rel, rhs) in normalized.iter_mut() {
            if *rhs < 0.0 {
                dense.iter_mut().for_each(|v| *v = -*v);
                *rhs = -*rhs;
                *rel = match *rel {
                    Relation::Le => Relation::Ge,
                    Relation::Ge => Relation::Le,
                    Relation::Eq => Relation::Eq,
                };
            }
        }
        let artificials = normalized
            .iter()
            .filter(|(_, r, _)| *r != Relation::Le)
            .count();
        let artificial_start = lp.vars + slacks;
        let cols = artificial_start + artificials;
        let width = cols + 1;
        let mut a = vec![0.0; rows * width];
        let mut basis = vec![0; rows];
        let mut next_slack = lp.vars;
        let mut next_art = artificial_start;
        for (i, (dense, rel, rhs)) in normalized.into_iter().enumerate() {
            let row = &mut a[i * width..(i + 1) * width];
            row[..lp.vars].copy_from_slice(&dense);
            row[cols] = rhs;
            match rel {
                Relation::Le => {
                    row[next_slack] = 1.0;
                    basis[i] = next_slack;
                    next_slack += 1;
                }
                Relation::Ge => {
                    row[next_slack] = -1.0;
                    next_slack += 1;
                    row[next_art] = 1.0;
                    basis[i] = next_art;
                    next_art += 1;
                }
                Relation::Eq => {
                    row[next_art] = 1.0;
                    basis[i] = next_art;
                    next_art += 1;
                }
            }
        }
        Tableau {
            rows,
            cols,
            a,
            basis,
            artificial_start,
        }
    }

    #[inline]
    fn at(&self, r: usize, c: usize) -> f64 {
        self.a[r * (self.cols + 1) + c]
    }

    fn rhs(&self, r: usize) -> f64 {
        self.at(r, self.cols)
    }

    fn pivot(&mut self, pr: usize, pc: usize) {
        let width = self.cols + 1;
        let p = self.at(pr, pc);
        for v in &mut self.a[pr * width..(pr + 1) * width] {
            *v /= p;
        }
        let pivot_row: Vec<f64> = self.a[pr * width..(pr + 1) * width].to_vec();
        for r in 0..self.rows {
            if r == pr {
                continue;
            }
            let f = self.at(r, pc);
            if f == 0.0 {
                continue;
            }
            let row = &mut self.a[r * width..(r + 1) * width];
            for (v, pv) in row.iter_mut().zip(&pivot_row) {
                *v -= f * pv;
            }
            row[pc] = 0.0;
        }
        self.basis[pr] = pc;
        for r in 0..self.rows {
            let v = &mut self.a[r * width + self.cols];
            if *v < 0.0 && *v > -1e-12 {
                *v = 0.0;
            }
        }
    }

    /// Reduced costs `c_j - c_B B^-1 A_j` for the current basis.
    fn reduced_costs(&self, cost: &[f64]) -> Vec<f64> {
        let mut r = cost.to_vec();
        for i in 0..self.rows {
            let cb = cost[self.basis[i]];
            if cb == 0.0 {
                continue;
            }
            for (j, rj) in r.iter_mut().enumerate() {
                *rj -= cb * self.at(i, j);
            }
        }
        r
    }

    /// Rebuilds the tableau as `B^-1 [A | b]` from the original rows, with
    /// partial pivoting, to shed accumulated rounding. Leaves the tableau
    /// untouched if the basis is numerically singular.
    fn reinvert(&mut self, orig: &Tableau) {
        let width = self.cols + 1;
        let mut m = orig.a.clone();
        let mut order: Vec<usize> = (0..self.rows).collect();
        for (pos, &col) in self.basis.iter().enumerate() {
            let Some(best) = (pos..self.rows).max_by(|&x, &y| {
                m[order[x] * width + col].abs().total_cmp(&m[order[y] * width + col].abs())
            }) else {
                return;
            };
            if m[order[best] * width + col].abs() < 1e-12 {
                return;
            }
            order.swap(pos, best);
            let pr = order[pos];
            let p = m[pr * width + col];
            for v in &mut m[pr * width..(pr + 1) * width] {
                *v /= p;
            }
            let pivot_row: Vec<f64> = m[pr * width..(pr + 1) * width].to_vec();
            for r in 0..self.rows {
                if r == pr {
                    continue;
                }
                let f = m[r * width + col];
                if f != 0.0 {
                    for (v, pv) in m[r * width..(r + 1) * width].iter_mut().zip(&pivot_row) {
                        *v -= f * pv;
                    }
                    m[r * width + col] = 0.0;
                }
            }
        }
        let mut a = Vec::with_capacity(m.len());
        for &r in &order {
            a.extend_from_slice(&m[r * width..(r + 1) * width]);
        }
        for r in 0..self.rows {
            let v = &mut a[r * width + self.cols];
            if *v < 0.0 && *v > -1e-12 {
                *v = 0.0;
            }
        }
        self.a = a;
    }

    /// Primal simplex over columns `< allowed`. The entering column follows
    /// Bland's rule; among rows tied in the ratio test the largest pivot is
    /// preferred, falling back to the smallest basic index after a long run
    /// of degenerate pivots so cycling stays impossible.
    fn optimize(
        &mut self,
        orig: &Tableau,
        cost: &[f64],
        allowed: usize,
        opts: LpOptions,
        iters: &mut usize,
    ) -> Result<()> {
        const REINVERT_EVERY: usize = 50;
        const DEGENERATE_STREAK: usize = 200;
        let mut degenerate = 0;
        loop {
            if *iters >= opts.max_iter {
                return Err(Error::SolverFailure(format!(
                    "iteration cap {} reached",
                    opts.max_iter
                )));
            }
            let reduced = self.reduced_costs(cost);
            let entering = (0..allowed).find(|&j| reduced[j] < -opts.tol);
            let Some(pc) = entering else {
                return Ok(());
            };
            let col_scale = (0..self.rows).map(|r| self.at(r, pc).abs()).fold(0.0, f64::max);
            let pivot_tol = opts.tol.max(1e-9 * col_scale);
            let mut min_ratio = f64::INFINITY;
            for r in 0..self.rows {
                let coef = self.at(r, pc);
                if coef > pivot_tol {
                    min_ratio = min_ratio.min(self.rhs(r).max(0.0) / coef);
                }
            }
            if min_ratio == f64::INFINITY {
                return Err(Error::SolverFailure("objective is unbounded below".into()));
            }
            let bland = degenerate >= DEGENERATE_STREAK;
            let mut leave: Option<usize> = None;
            for r in 0..self.rows {
                let coef = self.at(r, pc);
                if coef <= pivot_tol || self.rhs(r).max(0.0) / coef > min_ratio + opts.tol {
                    continue;
                }
                leave = match leave {
                    None => Some(r),
                    Some(l) => {
                        let better = if bland {
                            self.basis[r] < self.basis[l]
                        } else {
                            coef > self.at(l, pc) || (coef == self.at(l, pc) && self.basis[r] < self.basis[l])
                        };
                        Some(if better { r } else { l })
                    }
                };
            }
            let pr = leave.expect("a row attains the minimum ratio");
            if min_ratio <= opts.tol {
                degenerate += 1;
            } else {
                degenerate = 0;
            }
            self.pivot(pr, pc);
            *iters += 1;
            if *iters % REINVERT_EVERY == 0 {
                self.reinvert(orig);
            }
        }
    }

    fn run(mut self, lp: &LinearProgram, opts: LpOptions) -> Result<LpSolution> {
        let orig = Tableau::build(lp);
        let mut iters = 0;
        if self.artificial_start < self.cols {
            let mut phase1 = vec![0.0; self.cols];
            phase1[self.artificial_start..].iter_mut().for_each(|v| *v = 1.0);
            self.optimize(&orig, &phase1, self.cols, opts, &mut iters)?;
            self.reinvert(&orig);
            let infeasibility: f64 = (0..self.rows)
                .filter(|&r| self.basis[r] >= self.artificial_start)
                .map(|r| self.rhs(r))
                .sum();
            if infeasibility > opts.tol.sqrt() {
                return Err(Error::SolverFailure(format!(
                    "infeasible (phase-one residual {infeasibility:e})"
                )));
            }
            // Drive zero-level artificials out of the basis where possible; rows
            // where that fails are redundant and keep a zero artificial.
            for r in 0..self.rows {
                if self.basis[r] >= self.artificial_start {
                    let candidate = (0..self.artificial_start)
                        .filter(|&c| self.at(r, c).abs() > opts.tol)
                        .max_by(|&x, &y| self.at(r, x).abs().total_cmp(&self.at(r, y).abs()));
                    if let Some(c) = candidate {
                        self.pivot(r, c);
                        iters += 1;
                    }
                }
            }
        }
        let mut cost = vec![0.0; self.cols];
        cost[..lp.vars].copy_from_slice(&lp.objective);
        self.optimize(&orig, &cost, self.artificial_start, opts, &mut iters)?;
        self.reinvert(&orig);

        let mut x = vec![0.0; lp.vars];
        for r in 0..self.rows {
            let b = self.basis[r];
            if b < lp.vars {
                x[b] = self.rhs(r).max(0.0);
            }
        }
        let objective = x.iter().zip(&lp.objective).map(|(a, b)| a * b).sum();
        Ok(LpSolution {
            x,
            objective,
            iterations: iters,
        })
    }
}
