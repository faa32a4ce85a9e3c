//! Dense two-phase primal simplex with Bland's anti-cycling rule.
//!
//! Sized for the small programs that show up here (a few thousand rows at
//! most). Artificial columns are never stored: an artificial variable that
//! leaves the basis can never re-enter, so its column is not needed.

use crate::error::{Error, Result};

const PIVOT_EPS: f64 = 1e-11;
const MAX_PIVOTS: usize = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

/// `{ x >= 0 : rows }` over `n` variables.
#[derive(Clone, Debug, Default)]
pub struct LinearProgram {
    n: usize,
    rows: Vec<Constraint>,
}

#[derive(Clone, Debug)]
pub struct PhaseOne {
    /// Optimal total artificial slack.
    pub infeasibility: f64,
    /// Basic solution reached at the end of phase one.
    pub x: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
}

impl LinearProgram {
    pub fn new(n: usize) -> Self {
        LinearProgram {
            n,
            rows: Vec::new(),
        }
    }

    pub fn add(&mut self, coeffs: Vec<f64>, relation: Relation, rhs: f64) {
        assert_eq!(coeffs.len(), self.n, "constraint width");
        self.rows.push(Constraint {
            coeffs,
            relation,
            rhs,
        });
    }

    pub fn num_vars(&self) -> usize {
        self.n
    }

    pub fn rows(&self) -> &[Constraint] {
        &self.rows
    }

    /// Minimizes the sum of artificial slacks.
    pub fn phase_one(&self) -> Result<PhaseOne> {
        let mut t = Tableau::build(self);
        t.run_phase_one()?;
        Ok(PhaseOne {
            infeasibility: t.artificial_level(),
            x: t.primal(),
        })
    }

    /// Maximizes `c . x`. Fails with `InvalidArgument` when the program is
    /// infeasible (phase-one slack above `feas_tol`) or unbounded.
    pub fn maximize(&self, c: &[f64], feas_tol: f64) -> Result<LpSolution> {
        assert_eq!(c.len(), self.n);
        let mut t = Tableau::build(self);
        t.run_phase_one()?;
        let slack = t.artificial_level();
        if slack > feas_tol {
            return Err(Error::InvalidArgument(format!(
                "linear program infeasible (phase-one slack {slack:.3e})"
            )));
        }
        t.drive_out_artificials();
        t.run_phase_two(c)?;
        let x = t.primal();
        let objective = c.iter().zip(&x).map(|(a, b)| a * b).sum();
        Ok(LpSolution { x, objective })
    }
}

struct Tableau {
    m: usize,
    n_struct: usize,
    // structural + slack/surplus columns
    ncols: usize,
    // rows x (ncols + 1), rhs in the last column
    data: Vec<f64>,
    // column index; artificials are encoded as ncols + row
    basis: Vec<usize>,
    active: Vec<bool>,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Self {
        let m = lp.rows.len();
        let n = lp.n;
        let n_slack = lp
            .rows
            .iter()
            .filter(|r| r.relation != Relation::Eq)
            .count();
        let ncols = n + n_slack;
        let width = ncols + 1;
        let mut data = vec![0.0; m * width];
        let mut basis = vec![0; m];
        let mut slack_col = n;
        for (i, row) in lp.rows.iter().enumerate() {
            let flip = row.rhs < 0.0;
            let sign = if flip { -1.0 } else { 1.0 };
            let rel = match (row.relation, flip) {
                (Relation::Le, true) => Relation::Ge,
                (Relation::Ge, true) => Relation::Le,
                (r, _) => r,
            };
            let line = &mut data[i * width..(i + 1) * width];
            for (j, &a) in row.coeffs.iter().enumerate() {
                line[j] = sign * a;
            }
            line[ncols] = sign * row.rhs;
            match row.relation {
                Relation::Eq => basis[i] = ncols + i,
                _ => {
                    // original row: +s for Le, -s for Ge; flipping the row flips s too
                    let coef = if row.relation == Relation::Le { 1.0 } else { -1.0 };
                    line[slack_col] = sign * coef;
                    basis[i] = if rel == Relation::Le {
                        slack_col
                    } else {
                        ncols + i
                    };
                    slack_col += 1;
                }
            }
        }
        Tableau {
            m,
            n_struct: n,
            ncols,
            data,
            basis,
            active: vec![true; m],
        }
    }

    fn width(&self) -> usize {
        self.ncols + 1
    }

    fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.width() + j]
    }

    fn rhs(&self, i: usize) -> f64 {
        self.at(i, self.ncols)
    }

    fn is_artificial(&self, col: usize) -> bool {
        col >= self.ncols
    }

    fn artificial_level(&self) -> f64 {
        (0..self.m)
            .filter(|&i| self.active[i] && self.is_artificial(self.basis[i]))
            .map(|i| self.rhs(i).max(0.0))
            .sum()
    }

    fn pivot(&mut self, r: usize, c: usize, cost: &mut [f64]) {
        let w = self.width();
        let p = self.at(r, c);
        for j in 0..w {
            self.data[r * w + j] /= p;
        }
        let (before, rest) = self.data.split_at_mut(r * w);
        let (prow, after) = rest.split_at_mut(w);
        let eliminate = |line: &mut [f64]| {
            let f = line[c];
            if f != 0.0 {
                for j in 0..w {
                    line[j] -= f * prow[j];
                }
                line[c] = 0.0;
            }
        };
        before.chunks_mut(w).for_each(&eliminate);
        after.chunks_mut(w).for_each(&eliminate);
        let f = cost[c];
        if f != 0.0 {
            for j in 0..w {
                cost[j] -= f * prow[j];
            }
            cost[c] = 0.0;
        }
        self.basis[r] = c;
    }

    /// Bland: smallest entering index with negative reduced cost, ratio ties
    /// broken by smallest basic index.
    fn iterate(&mut self, cost: &mut [f64]) -> Result<()> {
        for _ in 0..MAX_PIVOTS {
            let Some(c) = (0..self.ncols).find(|&j| cost[j] < -PIVOT_EPS) else {
                return Ok(());
            };
            let mut best: Option<(f64, usize, usize)> = None;
            for i in 0..self.m {
                if !self.active[i] {
                    continue;
                }
                let a = self.at(i, c);
                if a > PIVOT_EPS {
                    let ratio = self.rhs(i) / a;
                    let better = match best {
                        None => true,
                        Some((r, _, b)) => {
                            ratio < r - 1e-13 || (ratio <= r + 1e-13 && self.basis[i] < b)
                        }
                    };
                    if better {
                        best = Some((ratio, i, self.basis[i]));
                    }
                }
            }
            let Some((_, r, _)) = best else {
                return Err(Error::InvalidArgument("linear program is unbounded".into()));
            };
            self.pivot(r, c, cost);
        }
        Err(Error::InvalidArgument("simplex pivot limit reached".into()))
    }

    fn run_phase_one(&mut self) -> Result<()> {
        let w = self.width();
        let mut cost = vec![0.0; w];
        for i in 0..self.m {
            if self.is_artificial(self.basis[i]) {
                for j in 0..w {
                    cost[j] -= self.at(i, j);
                }
            }
        }
        self.iterate(&mut cost)
    }

    fn drive_out_artificials(&mut self) {
        let mut dummy = vec![0.0; self.width()];
        for i in 0..self.m {
            if !self.is_artificial(self.basis[i]) {
                continue;
            }
            match (0..self.ncols).find(|&j| self.at(i, j).abs() > 1e-9) {
                Some(c) => self.pivot(i, c, &mut dummy),
                // redundant row
                None => self.active[i] = false,
            }
        }
    }

    fn run_phase_two(&mut self, c: &[f64]) -> Result<()> {
        // minimize -c.x
        let w = self.width();
        let col_cost = |j: usize| if j < self.n_struct { -c[j] } else { 0.0 };
        let mut cost: Vec<f64> = (0..w)
            .map(|j| if j < self.ncols { col_cost(j) } else { 0.0 })
            .collect();
        for i in 0..self.m {
            if !self.active[i] {
                continue;
            }
            let cb = col_cost(self.basis[i]);
            if cb != 0.0 {
                for j in 0..w {
                    cost[j] -= cb * self.at(i, j);
                }
            }
        }
        self.iterate(&mut cost)
    }

    fn primal(&self) -> Vec<f64> {
        let mut x = vec![0.0; self.n_struct];
        for i in 0..self.m {
            if self.active[i] && self.basis[i] < self.n_struct {
                x[self.basis[i]] = self.rhs(i).max(0.0);
            }
        }
        x
    }
}
