//! Dense dual simplex for finite zero-sum games.
//!
//! The column player minimises `max_i (P w)_i` over the probability simplex.
//! After shifting the payoff so every entry is at least one, the row
//! player's problem is `min 1'y  s.t.  G'y >= 1, y >= 0`, whose basis has one
//! row per column strategy. The all-surplus basis is dual feasible, so the dual
//! simplex starts without a phase one.

use std::fmt;

const PRIMAL_TOL: f64 = 1e-10;
const DUAL_TOL: f64 = 1e-11;
const PIVOT_TOL: f64 = 1e-10;
const REFACTOR_EVERY: usize = 64;
const MAX_ITERATIONS: usize = 50_000;

/// Optimal mixed strategies of a matrix game together with the certified
/// value bracket `value_lower <= value <= value_upper`.
#[derive(Clone, Debug)]
pub struct GameSolution {
    /// `max_i (P w)_i` for the returned column strategy `w`.
    pub value_upper: f64,
    /// `min_q (P' y)_q` for the returned row strategy `y`.
    pub value_lower: f64,
    pub column_strategy: Vec<f64>,
    pub row_strategy: Vec<f64>,
    pub iterations: usize,
}

#[derive(Clone, Debug)]
pub struct SolverFailure {
    pub iterations: usize,
    pub reason: &'static str,
    pub recent_objectives: Vec<f64>,
}

impl fmt::Display for SolverFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} after {} iterations (recent objectives {:?})",
            self.reason, self.iterations, self.recent_objectives
        )
    }
}

/// Payoff matrix of a game in which the column player minimises.
pub trait Payoff: Sync {
    fn rows(&self) -> usize;
    fn cols(&self) -> usize;
    /// Lower bound on every entry.
    fn min_entry(&self) -> f64;
    /// Writes row `i` into `out`.
    fn row(&self, i: usize, out: &mut [f64]);
    /// Writes `(P v)_i` for every row into `out`.
    fn row_dots(&self, v: &[f64], out: &mut [f64]);
}

/// Row-major dense payoff matrix.
pub struct DensePayoff<'a> {
    pub entries: &'a [f64],
    pub rows: usize,
    pub cols: usize,
}

impl Payoff for DensePayoff<'_> {
    fn rows(&self) -> usize {
        self.rows
    }
    fn cols(&self) -> usize {
        self.cols
    }
    fn min_entry(&self) -> f64 {
        self.entries.iter().copied().fold(f64::INFINITY, f64::min)
    }
    fn row(&self, i: usize, out: &mut [f64]) {
        out.copy_from_slice(&self.entries[i * self.cols..(i + 1) * self.cols]);
    }
    fn row_dots(&self, v: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = dot(&self.entries[i * self.cols..(i + 1) * self.cols], v);
        }
    }
}

/// Solves `min_w max_i (P w)_i` over probability vectors `w`.
pub fn solve_game<P: Payoff>(payoff: &P) -> Result<GameSolution, SolverFailure> {
    let (rows, cols) = (payoff.rows(), payoff.cols());
    assert!(rows > 0 && cols > 0, "empty game");
    let shift = 1.0 - payoff.min_entry();
    let mut lp = DualSimplex::new(payoff, shift);
    lp.run()?;
    let (y, u) = lp.primal_dual();

    let y_sum: f64 = y.iter().sum();
    let u_sum: f64 = u.iter().sum();
    let row_strategy: Vec<f64> = y.iter().map(|v| v / y_sum).collect();
    let column_strategy: Vec<f64> = u.iter().map(|v| v / u_sum).collect();

    let mut dots = vec![0.0; rows];
    payoff.row_dots(&column_strategy, &mut dots);
    let value_upper = dots.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut col_values = vec![0.0; cols];
    let mut row = vec![0.0; cols];
    for (i, &yi) in row_strategy.iter().enumerate() {
        if yi == 0.0 {
            continue;
        }
        payoff.row(i, &mut row);
        for (c, a) in col_values.iter_mut().zip(&row) {
            *c += yi * a;
        }
    }
    let value_lower = col_values.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(GameSolution {
        value_upper,
        value_lower,
        column_strategy,
        row_strategy,
        iterations: lp.iterations,
    })
}

/// Dot product with independent partial sums so the loop vectorises.
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0; 8];
    let chunks = a.len() / 8;
    for c in 0..chunks {
        let (x, y) = (&a[c * 8..c * 8 + 8], &b[c * 8..c * 8 + 8]);
        for k in 0..8 {
            acc[k] += x[k] * y[k];
        }
    }
    let mut tail = 0.0;
    for k in chunks * 8..a.len() {
        tail += a[k] * b[k];
    }
    acc.iter().sum::<f64>() + tail
}

struct DualSimplex<'a, P: Payoff> {
    /// Row `i` of the payoff plus `shift` is the constraint column of `y_i`.
    payoff: &'a P,
    shift: f64,
    rows: usize,
    cols: usize,
    /// Inverse basis, `cols x cols`, row-major.
    binv: Vec<f64>,
    basis: Vec<usize>,
    position: Vec<Option<usize>>,
    x_b: Vec<f64>,
    reduced: Vec<f64>,
    iterations: usize,
    recent: Vec<f64>,
}

impl<'a, P: Payoff> DualSimplex<'a, P> {
    fn new(payoff: &'a P, shift: f64) -> Self {
        let (rows, cols) = (payoff.rows(), payoff.cols());
        let n = rows + cols;
        let mut binv = vec![0.0; cols * cols];
        for q in 0..cols {
            binv[q * cols + q] = -1.0;
        }
        let basis: Vec<usize> = (rows..n).collect();
        let mut position = vec![None; n];
        for (r, &v) in basis.iter().enumerate() {
            position[v] = Some(r);
        }
        let mut reduced = vec![0.0; n];
        reduced[..rows].fill(1.0);
        DualSimplex {
            payoff,
            shift,
            rows,
            cols,
            binv,
            basis,
            position,
            x_b: vec![-1.0; cols],
            reduced,
            iterations: 0,
            recent: Vec::new(),
        }
    }

    fn cost(&self, var: usize) -> f64 {
        if var < self.rows {
            1.0
        } else {
            0.0
        }
    }

    /// Writes column `var` of `[G', -I]` into `out`.
    fn column(&self, var: usize, out: &mut [f64]) {
        if var < self.rows {
            self.payoff.row(var, out);
            for v in out.iter_mut() {
                *v += self.shift;
            }
        } else {
            out.fill(0.0);
            out[var - self.rows] = -1.0;
        }
    }

    /// Writes `v' A_j` for every column `j` of `[G', -I]` into `out`.
    fn price_all(&self, v: &[f64], out: &mut [f64]) {
        let (head, tail) = out.split_at_mut(self.rows);
        self.payoff.row_dots(v, head);
        let s = self.shift * v.iter().sum::<f64>();
        for h in head.iter_mut() {
            *h += s;
        }
        for (t, x) in tail.iter_mut().zip(v) {
            *t = -x;
        }
    }

    fn objective(&self) -> f64 {
        self.basis
            .iter()
            .zip(&self.x_b)
            .map(|(&v, &x)| self.cost(v) * x)
            .sum()
    }

    fn run(&mut self) -> Result<(), SolverFailure> {
        let m = self.cols;
        let n = self.rows + self.cols;
        let mut alpha = vec![0.0; n];
        let mut col = vec![0.0; m];
        let mut a_col = vec![0.0; m];
        loop {
            if self.iterations > 0 && self.iterations % REFACTOR_EVERY == 0 {
                self.refactor()?;
            }
            // Dual steepest edge: infeasibility scaled by the row norm of B^{-1}.
            let mut r = usize::MAX;
            let mut score = 0.0;
            for i in 0..m {
                let x = self.x_b[i];
                if x >= -PRIMAL_TOL {
                    continue;
                }
                let norm: f64 = self.binv[i * m..(i + 1) * m].iter().map(|v| v * v).sum();
                let sc = x * x / norm;
                if sc > score {
                    score = sc;
                    r = i;
                }
            }
            if r == usize::MAX {
                return Ok(());
            }
            if self.iterations >= MAX_ITERATIONS {
                return Err(self.failure("iteration limit reached"));
            }
            let rho = self.binv[r * m..(r + 1) * m].to_vec();

            self.price_all(&rho, &mut alpha);
            let mut theta_max = f64::INFINITY;
            for j in 0..n {
                let a = alpha[j];
                if self.position[j].is_none() && a < -PIVOT_TOL {
                    let t = (self.reduced[j].max(0.0) + DUAL_TOL) / -a;
                    theta_max = theta_max.min(t);
                }
            }
            if !theta_max.is_finite() {
                return Err(self.failure("row player problem infeasible"));
            }
            let mut enter = usize::MAX;
            let mut best = 0.0;
            for j in 0..n {
                let a = alpha[j];
                if self.position[j].is_some() || a >= -PIVOT_TOL {
                    continue;
                }
                if self.reduced[j].max(0.0) / -a <= theta_max && -a > best {
                    best = -a;
                    enter = j;
                }
            }
            if enter == usize::MAX {
                return Err(self.failure("ratio test found no entering column"));
            }

            self.column(enter, &mut col);
            for i in 0..m {
                let row = &self.binv[i * m..(i + 1) * m];
                a_col[i] = dot(row, &col);
            }
            let pivot = a_col[r];
            if pivot.abs() < PIVOT_TOL {
                self.refactor()?;
                self.iterations += 1;
                continue;
            }

            let theta_p = self.x_b[r] / pivot;
            for i in 0..m {
                self.x_b[i] -= theta_p * a_col[i];
            }
            self.x_b[r] = theta_p;

            let theta_d = self.reduced[enter] / alpha[enter];
            let leaving = self.basis[r];
            for j in 0..n {
                if self.position[j].is_none() {
                    self.reduced[j] -= theta_d * alpha[j];
                }
            }
            self.reduced[enter] = 0.0;
            self.reduced[leaving] = -theta_d;

            let (before, rest) = self.binv.split_at_mut(r * m);
            let (pivot_row, after) = rest.split_at_mut(m);
            for v in pivot_row.iter_mut() {
                *v /= pivot;
            }
            for (i, row) in before.chunks_mut(m).enumerate() {
                let f = a_col[i];
                if f != 0.0 {
                    for (x, p) in row.iter_mut().zip(pivot_row.iter()) {
                        *x -= f * p;
                    }
                }
            }
            for (i, row) in after.chunks_mut(m).enumerate() {
                let f = a_col[r + 1 + i];
                if f != 0.0 {
                    for (x, p) in row.iter_mut().zip(pivot_row.iter()) {
                        *x -= f * p;
                    }
                }
            }

            self.position[leaving] = None;
            self.position[enter] = Some(r);
            self.basis[r] = enter;
            self.iterations += 1;
            let obj = self.objective();
            if self.recent.len() == 8 {
                self.recent.remove(0);
            }
            self.recent.push(obj);
        }
    }

    /// Rebuilds the inverse basis by Gauss-Jordan elimination and recomputes
    /// the primal values and reduced costs from scratch.
    fn refactor(&mut self) -> Result<(), SolverFailure> {
        let m = self.cols;
        let mut a = vec![0.0; m * m];
        let mut col = vec![0.0; m];
        for (c, &v) in self.basis.iter().enumerate() {
            self.column(v, &mut col);
            for i in 0..m {
                a[i * m + c] = col[i];
            }
        }
        let mut inv = vec![0.0; m * m];
        for i in 0..m {
            inv[i * m + i] = 1.0;
        }
        for c in 0..m {
            let p = (c..m)
                .max_by(|&x, &y| a[x * m + c].abs().total_cmp(&a[y * m + c].abs()))
                .unwrap();
            let pv = a[p * m + c];
            if pv.abs() < 1e-13 {
                return Err(self.failure("singular basis during refactorisation"));
            }
            if p != c {
                for k in 0..m {
                    a.swap(p * m + k, c * m + k);
                    inv.swap(p * m + k, c * m + k);
                }
            }
            for k in 0..m {
                a[c * m + k] /= pv;
                inv[c * m + k] /= pv;
            }
            for i in 0..m {
                if i == c {
                    continue;
                }
                let f = a[i * m + c];
                if f == 0.0 {
                    continue;
                }
                for k in 0..m {
                    a[i * m + k] -= f * a[c * m + k];
                    inv[i * m + k] -= f * inv[c * m + k];
                }
            }
        }
        self.binv = inv;
        for i in 0..m {
            self.x_b[i] = self.binv[i * m..(i + 1) * m].iter().sum();
        }
        let prices = self.prices();
        let mut priced = vec![0.0; self.rows + self.cols];
        self.price_all(&prices, &mut priced);
        for (j, p) in priced.iter().enumerate() {
            self.reduced[j] = if self.position[j].is_some() { 0.0 } else { self.cost(j) - p };
        }
        Ok(())
    }

    /// Simplex multipliers `c_B' B^{-1}`.
    fn prices(&self) -> Vec<f64> {
        let m = self.cols;
        let mut pi = vec![0.0; m];
        for (r, &v) in self.basis.iter().enumerate() {
            let c = self.cost(v);
            if c != 0.0 {
                for (p, b) in pi.iter_mut().zip(&self.binv[r * m..(r + 1) * m]) {
                    *p += c * b;
                }
            }
        }
        pi
    }

    fn primal_dual(&self) -> (Vec<f64>, Vec<f64>) {
        let mut y = vec![0.0; self.rows];
        for (r, &v) in self.basis.iter().enumerate() {
            if v < self.rows {
                y[v] = self.x_b[r].max(0.0);
            }
        }
        let u = self.prices().into_iter().map(|p| p.max(0.0)).collect();
        (y, u)
    }

    fn failure(&self, reason: &'static str) -> SolverFailure {
        SolverFailure {
            iterations: self.iterations,
            reason,
            recent_objectives: self.recent.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matching_pennies_has_value_zero() {
        let p = [1.0, -1.0, -1.0, 1.0];
        let sol = solve_game(&DensePayoff { entries: &p, rows: 2, cols: 2 }).unwrap();
        assert!(sol.value_upper.abs() < 1e-12);
        assert!(sol.value_lower.abs() < 1e-12);
        assert!((sol.column_strategy[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn dominated_column_is_avoided() {
        // Column 1 is worse than column 0 for the minimiser in every row.
        let p = [0.2, 0.9, 0.4, 0.5, 0.3, 0.8];
        let sol = solve_game(&DensePayoff { entries: &p, rows: 3, cols: 2 }).unwrap();
        assert!((sol.value_upper - 0.4).abs() < 1e-12);
        assert!((sol.column_strategy[0] - 1.0).abs() < 1e-12);
    }
}
