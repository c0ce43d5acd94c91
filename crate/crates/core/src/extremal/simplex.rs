//! Dense bounded-variable revised simplex for
//!
//! ```text
//! minimize cᵀx  subject to  A x = b,  l ≤ x ≤ u
//! ```
//!
//! with possibly infinite bounds. Sized for few rows and many columns: the
//! basis is refactorized every iteration and pricing scans all columns.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-11;
const COST_TOL: f64 = 1e-12;
const FEAS_TOL: f64 = 1e-9;
/// Degenerate pivots in a row before switching to Bland's rule.
const BLAND_AFTER: usize = 64;

#[derive(Clone, Debug)]
pub struct BoundedLp {
    rows: usize,
    /// Column-major constraint matrix.
    columns: Vec<Vec<f64>>,
    cost: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    rhs: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct LpSolution {
    pub x: Vec<f64>,
    /// Simplex multipliers `y` with `Bᵀy = c_B`.
    pub multipliers: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Status {
    Basic,
    AtLower,
    AtUpper,
    /// Nonbasic strictly between its bounds (free variables start here).
    Between,
}

impl BoundedLp {
    pub fn new(rhs: Vec<f64>) -> Self {
        Self {
            rows: rhs.len(),
            columns: Vec::new(),
            cost: Vec::new(),
            lower: Vec::new(),
            upper: Vec::new(),
            rhs,
        }
    }

    pub fn add_column(&mut self, column: Vec<f64>, cost: f64, lower: f64, upper: f64) -> usize {
        assert_eq!(column.len(), self.rows);
        assert!(lower <= upper);
        self.columns.push(column);
        self.cost.push(cost);
        self.lower.push(lower);
        self.upper.push(upper);
        self.columns.len() - 1
    }

    pub fn solve(&self, max_iter: usize) -> Result<LpSolution> {
        let m = self.rows;
        let n = self.columns.len();
        let mut cols = self.columns.clone();
        let mut lower = self.lower.clone();
        let mut upper = self.upper.clone();
        let mut x = vec![0.0; n + m];
        let mut status = vec![Status::Between; n + m];
        for j in 0..n {
            let (l, u) = (lower[j], upper[j]);
            if l <= 0.0 && 0.0 <= u {
                x[j] = 0.0;
                status[j] = if l == 0.0 {
                    Status::AtLower
                } else if u == 0.0 {
                    Status::AtUpper
                } else {
                    Status::Between
                };
            } else if l.is_finite() {
                x[j] = l;
                status[j] = Status::AtLower;
            } else {
                x[j] = u;
                status[j] = Status::AtUpper;
            }
        }
        // Artificial basis covering the initial residual.
        let mut resid = self.rhs.clone();
        for j in 0..n {
            if x[j] != 0.0 {
                for (r, a) in resid.iter_mut().zip(&cols[j]) {
                    *r -= a * x[j];
                }
            }
        }
        let mut basis = Vec::with_capacity(m);
        for (i, &r) in resid.iter().enumerate() {
            let mut col = vec![0.0; m];
            col[i] = if r < 0.0 { -1.0 } else { 1.0 };
            cols.push(col);
            lower.push(0.0);
            upper.push(f64::INFINITY);
            x[n + i] = r.abs();
            status[n + i] = Status::Basic;
            basis.push(n + i);
        }

        let mut state = State {
            cols: &cols,
            lower: &mut lower,
            upper: &mut upper,
            rhs: &self.rhs,
            x: &mut x,
            status: &mut status,
            basis: &mut basis,
            iterations: 0,
        };

        // Phase 1: drive the artificials to zero.
        let mut phase1_cost = vec![0.0; n + m];
        for c in phase1_cost.iter_mut().skip(n) {
            *c = 1.0;
        }
        let infeas = state.run(&phase1_cost, max_iter)?;
        let scale = 1.0 + self.rhs.iter().map(|v| v.abs()).fold(0.0, f64::max);
        if infeas > FEAS_TOL * scale {
            return Err(Error::InvalidProblem(format!(
                "linear program is infeasible (phase-1 residual {infeas:e})"
            )));
        }
        // Phase 2: artificials pinned to zero.
        for i in 0..m {
            state.lower[n + i] = 0.0;
            state.upper[n + i] = 0.0;
            if state.status[n + i] != Status::Basic {
                state.status[n + i] = Status::AtLower;
                state.x[n + i] = 0.0;
            }
        }
        let mut cost = self.cost.clone();
        cost.extend(std::iter::repeat_n(0.0, m));
        let objective = state.run(&cost, max_iter)?;
        let multipliers = state.multipliers(&cost)?;
        let iterations = state.iterations;
        Ok(LpSolution {
            x: x[..n].to_vec(),
            multipliers,
            objective,
            iterations,
        })
    }
}

struct State<'a> {
    cols: &'a [Vec<f64>],
    lower: &'a mut [f64],
    upper: &'a mut [f64],
    rhs: &'a [f64],
    x: &'a mut [f64],
    status: &'a mut [Status],
    basis: &'a mut [usize],
    iterations: usize,
}

impl State<'_> {
    fn basis_matrix(&self) -> DMatrix<f64> {
        let m = self.basis.len();
        DMatrix::from_fn(m, m, |i, k| self.cols[self.basis[k]][i])
    }

    fn multipliers(&self, cost: &[f64]) -> Result<Vec<f64>> {
        let bt = self.basis_matrix().transpose();
        let cb = DVector::from_iterator(self.basis.len(), self.basis.iter().map(|&j| cost[j]));
        bt.lu()
            .solve(&cb)
            .map(|y| y.iter().copied().collect())
            .ok_or_else(|| Error::InvalidProblem("singular simplex basis".into()))
    }

    fn recompute_basic(&mut self, lu: &nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>) -> Result<()> {
        let m = self.basis.len();
        let mut r = DVector::from_column_slice(self.rhs);
        for (j, col) in self.cols.iter().enumerate() {
            if self.status[j] != Status::Basic && self.x[j] != 0.0 {
                for i in 0..m {
                    r[i] -= col[i] * self.x[j];
                }
            }
        }
        let xb = lu
            .solve(&r)
            .ok_or_else(|| Error::InvalidProblem("singular simplex basis".into()))?;
        for (k, &j) in self.basis.iter().enumerate() {
            self.x[j] = xb[k];
        }
        Ok(())
    }

    /// Runs the simplex on the given costs from the current basis; returns
    /// the final objective.
    fn run(&mut self, cost: &[f64], max_iter: usize) -> Result<f64> {
        let m = self.basis.len();
        let total = self.cols.len();
        let mut degenerate_streak = 0usize;
        loop {
            if self.iterations >= max_iter {
                return Err(Error::DegenerateLp {
                    iterations: self.iterations,
                });
            }
            let bmat = self.basis_matrix();
            let lu = bmat.clone().lu();
            self.recompute_basic(&lu)?;
            let y = DVector::from_vec(self.multipliers(cost)?);

            // Pricing.
            let bland = degenerate_streak > BLAND_AFTER;
            let mut entering: Option<(usize, f64, f64)> = None; // (j, dir, |d|)
            for (j, &cost_j) in cost.iter().enumerate().take(total) {
                if self.status[j] == Status::Basic || self.lower[j] == self.upper[j] {
                    continue;
                }
                let col = &self.cols[j];
                let d = cost_j - (0..m).map(|i| y[i] * col[i]).sum::<f64>();
                let col_scale = 1.0 + col.iter().map(|v| v.abs()).fold(0.0, f64::max);
                let tol = COST_TOL * col_scale * (1.0 + y.amax());
                let dir = match self.status[j] {
                    Status::AtLower if d < -tol => 1.0,
                    Status::AtUpper if d > tol => -1.0,
                    Status::Between if d.abs() > tol => -d.signum(),
                    _ => continue,
                };
                let better = match entering {
                    None => true,
                    Some((_, _, best)) => !bland && d.abs() > best,
                };
                if better {
                    entering = Some((j, dir, d.abs()));
                }
                if bland && entering.is_some() {
                    break;
                }
            }
            let Some((q, dir, _)) = entering else {
                let obj = (0..total).map(|j| cost[j] * self.x[j]).sum();
                return Ok(obj);
            };
            self.iterations += 1;

            let alpha = lu
                .solve(&DVector::from_column_slice(&self.cols[q]))
                .ok_or_else(|| Error::InvalidProblem("singular simplex basis".into()))?;

            // Ratio test; the entering variable may also just hit its other bound.
            let mut theta = self.upper[q] - self.lower[q];
            if self.status[q] == Status::Between {
                theta = if dir > 0.0 {
                    self.upper[q] - self.x[q]
                } else {
                    self.x[q] - self.lower[q]
                };
            }
            let mut leaving: Option<(usize, bool)> = None; // (row, goes to upper)
            let mut best_pivot = 0.0;
            for k in 0..m {
                let a = alpha[k];
                if a.abs() <= PIVOT_TOL {
                    continue;
                }
                let j = self.basis[k];
                let rate = -dir * a;
                let (limit, to_upper) = if rate < 0.0 {
                    ((self.x[j] - self.lower[j]) / -rate, false)
                } else {
                    ((self.upper[j] - self.x[j]) / rate, true)
                };
                if !limit.is_finite() {
                    continue;
                }
                let limit = limit.max(0.0);
                if limit < theta - 1e-14 || (limit <= theta + 1e-14 && a.abs() > best_pivot && leaving.is_some()) {
                    theta = limit;
                    best_pivot = a.abs();
                    leaving = Some((k, to_upper));
                }
            }
            if !theta.is_finite() {
                return Err(Error::InvalidProblem("linear program is unbounded".into()));
            }
            degenerate_streak = if theta <= 1e-13 { degenerate_streak + 1 } else { 0 };

            match leaving {
                None => {
                    // bound flip
                    self.x[q] += dir * theta;
                    self.status[q] = if dir > 0.0 { Status::AtUpper } else { Status::AtLower };
                    if self.x[q].is_infinite() {
                        return Err(Error::InvalidProblem("linear program is unbounded".into()));
                    }
                }
                Some((k, to_upper)) => {
                    let out = self.basis[k];
                    self.x[q] += dir * theta;
                    self.x[out] = if to_upper { self.upper[out] } else { self.lower[out] };
                    self.status[out] = if to_upper { Status::AtUpper } else { Status::AtLower };
                    self.status[q] = Status::Basic;
                    self.basis[k] = q;
                }
            }
        }
    }
}
