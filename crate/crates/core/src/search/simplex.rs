//! Dense-tableau primal simplex over exact rationals.
//!
//! Problems have the form `max c·v  s.t.  A v ≤ b, v ≥ 0` with `b` of any sign.
//!
//! A double-precision simplex first guesses the optimal basis. That basis is
//! then certified exactly: the tight rows are solved over the rationals for
//! the primal values and the duals, and both must be feasible. Only when the
//! certificate fails does the exact tableau run from scratch. Its phase 1 uses
//! a single artificial column and pivoting follows Bland's rule, so it
//! terminates without cycling. Zero entries are skipped in row updates, which
//! matters because the relaxations built here are very sparse.

use num::{Signed, Zero};

use crate::kernel::to_f64;
use thiserror::Error;

use crate::kernel::Rational;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Row {
    pub coeffs: Vec<(usize, Rational)>,
    pub rhs: Rational,
}

#[derive(Debug, Clone, Default)]
pub struct LinearProgram {
    pub num_vars: usize,
    pub objective: Vec<(usize, Rational)>,
    pub rows: Vec<Row>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LpOutcome {
    Optimal { value: Rational, solution: Vec<Rational> },
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LpError {
    #[error("pivot limit {limit} exceeded ({rows} rows, {cols} columns, phase {phase})")]
    PivotLimit { limit: usize, rows: usize, cols: usize, phase: u8 },
}

impl LinearProgram {
    pub fn new(num_vars: usize) -> Self {
        LinearProgram { num_vars, ..Default::default() }
    }

    pub fn add_var(&mut self) -> usize {
        self.num_vars += 1;
        self.num_vars - 1
    }

    /// Σ coeffs·v ≤ rhs. Zero coefficients are dropped.
    pub fn add_le(&mut self, coeffs: Vec<(usize, Rational)>, rhs: Rational) {
        let coeffs = coeffs.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        self.rows.push(Row { coeffs, rhs });
    }
}

struct Tableau {
    rows: Vec<Vec<Rational>>,
    rhs: Vec<Rational>,
    basis: Vec<usize>,
    /// Phase-2 and phase-1 reduced-cost rows with their (negated) values.
    obj: [Vec<Rational>; 2],
    obj_rhs: [Rational; 2],
    width: usize,
    pivots: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, j: usize) {
        self.pivots += 1;
        let p = self.rows[r][j].clone();
        let row_r: Vec<Rational> = self.rows[r].iter().map(|v| if v.is_zero() { v.clone() } else { v / &p }).collect();
        let rhs_r = &self.rhs[r] / &p;
        let nz: Vec<usize> = (0..self.width).filter(|&k| !row_r[k].is_zero()).collect();
        for i in 0..self.rows.len() {
            if i == r || self.rows[i][j].is_zero() {
                continue;
            }
            let f = self.rows[i][j].clone();
            for &k in &nz {
                let delta = &f * &row_r[k];
                self.rows[i][k] -= delta;
            }
            if !rhs_r.is_zero() {
                self.rhs[i] -= &f * &rhs_r;
            }
        }
        for o in 0..2 {
            if self.obj[o][j].is_zero() {
                continue;
            }
            let f = self.obj[o][j].clone();
            for &k in &nz {
                let delta = &f * &row_r[k];
                self.obj[o][k] -= delta;
            }
            self.obj_rhs[o] -= &f * &rhs_r;
        }
        self.rows[r] = row_r;
        self.rhs[r] = rhs_r;
        self.basis[r] = j;
    }

    /// Bland's rule on objective row `o`. Returns false when unbounded.
    fn run(&mut self, o: usize, allowed: impl Fn(usize) -> bool, limit: usize, phase: u8) -> Result<bool, LpError> {
        loop {
            let Some(j) = (0..self.width).find(|&j| allowed(j) && self.obj[o][j].is_positive()) else {
                return Ok(true);
            };
            let mut best: Option<(usize, Rational)> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][j];
                if !a.is_positive() {
                    continue;
                }
                let ratio = &self.rhs[i] / a;
                let better = match &best {
                    None => true,
                    Some((bi, br)) => ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi]),
                };
                if better {
                    best = Some((i, ratio));
                }
            }
            let Some((r, _)) = best else {
                return Ok(false);
            };
            if self.pivots >= limit {
                return Err(LpError::PivotLimit { limit, rows: self.rows.len(), cols: self.width, phase });
            }
            self.pivot(r, j);
        }
    }
}

/// Default cap, far above anything the relaxations here need.
pub const DEFAULT_PIVOT_LIMIT: usize = 20_000;

pub fn maximize(lp: &LinearProgram, pivot_limit: usize) -> Result<LpOutcome, LpError> {
    if let Some(out) = float_basis(lp, pivot_limit).and_then(|(b, _)| certify(lp, &b)) {
        return Ok(out);
    }
    maximize_exact(lp, pivot_limit)
}

const EPS: f64 = 1e-9;

/// Final basis of a floating-point run of the same two-phase method, or
/// `None` when it does not end at an optimum.
fn float_basis(lp: &LinearProgram, pivot_limit: usize) -> Option<(Vec<usize>, f64)> {
    let n = lp.num_vars;
    let m = lp.rows.len();
    let art = n + m;
    let width = n + m + 1;
    let mut rows = vec![vec![0.0; width]; m];
    let mut rhs = vec![0.0; m];
    for (i, row) in lp.rows.iter().enumerate() {
        for (j, c) in &row.coeffs {
            rows[i][*j] += to_f64(c);
        }
        rows[i][n + i] = 1.0;
        rhs[i] = to_f64(&row.rhs);
        if row.rhs.is_negative() {
            rows[i][art] = -1.0;
        }
    }
    let mut obj = [vec![0.0; width], vec![0.0; width]];
    for (j, c) in &lp.objective {
        obj[0][*j] += to_f64(c);
    }
    obj[1][art] = -1.0;
    let mut obj_rhs = [0.0; 2];
    let mut basis: Vec<usize> = (n..n + m).collect();
    let mut pivots = 0;

    let mut pivot = |rows: &mut Vec<Vec<f64>>, rhs: &mut Vec<f64>, obj: &mut [Vec<f64>; 2], obj_rhs: &mut [f64; 2], basis: &mut Vec<usize>, r: usize, j: usize| {
        let p = rows[r][j];
        rows[r].iter_mut().for_each(|v| *v /= p);
        rhs[r] /= p;
        let (pr, prhs) = (rows[r].clone(), rhs[r]);
        for i in 0..rows.len() {
            let f = rows[i][j];
            if i != r && f != 0.0 {
                rows[i].iter_mut().zip(&pr).for_each(|(v, q)| *v -= f * q);
                rows[i][j] = 0.0;
                rhs[i] -= f * prhs;
            }
        }
        for o in 0..2 {
            let f = obj[o][j];
            if f != 0.0 {
                obj[o].iter_mut().zip(&pr).for_each(|(v, q)| *v -= f * q);
                obj[o][j] = 0.0;
                obj_rhs[o] -= f * prhs;
            }
        }
        basis[r] = j;
    };
    let run = |o: usize,
               rows: &mut Vec<Vec<f64>>,
               rhs: &mut Vec<f64>,
               obj: &mut [Vec<f64>; 2],
               obj_rhs: &mut [f64; 2],
               basis: &mut Vec<usize>,
               pivots: &mut usize,
               pivot: &mut dyn FnMut(&mut Vec<Vec<f64>>, &mut Vec<f64>, &mut [Vec<f64>; 2], &mut [f64; 2], &mut Vec<usize>, usize, usize)|
     -> bool {
        loop {
            let Some(j) = (0..width).filter(|&j| (o == 1 || j != art) && obj[o][j] > EPS).max_by(|&a, &b| obj[o][a].total_cmp(&obj[o][b]).then(b.cmp(&a))) else {
                return true;
            };
            let mut best: Option<(usize, f64)> = None;
            for i in 0..rows.len() {
                let a = rows[i][j];
                if a <= EPS {
                    continue;
                }
                let ratio = rhs[i].max(0.0) / a;
                let better = match best {
                    None => true,
                    Some((bi, br)) => ratio < br - EPS || (ratio <= br + EPS && basis[i] < basis[bi]),
                };
                if better {
                    best = Some((i, ratio));
                }
            }
            let Some((r, _)) = best else { return false };
            *pivots += 1;
            if *pivots > pivot_limit {
                return false;
            }
            pivot(rows, rhs, obj, obj_rhs, basis, r, j);
        }
    };

    let most_negative = (0..m).filter(|&i| rhs[i] < 0.0).min_by(|&a, &b| rhs[a].total_cmp(&rhs[b]));
    if let Some(r) = most_negative {
        pivot(&mut rows, &mut rhs, &mut obj, &mut obj_rhs, &mut basis, r, art);
        if !run(1, &mut rows, &mut rhs, &mut obj, &mut obj_rhs, &mut basis, &mut pivots, &mut pivot) || obj_rhs[1] > EPS {
            return None;
        }
        if let Some(r) = basis.iter().position(|&b| b == art) {
            let j = (0..art).max_by(|&a, &b| rows[r][a].abs().total_cmp(&rows[r][b].abs()))?;
            if rows[r][j].abs() <= EPS {
                return None;
            }
            pivot(&mut rows, &mut rhs, &mut obj, &mut obj_rhs, &mut basis, r, j);
        }
    }
    if !run(0, &mut rows, &mut rhs, &mut obj, &mut obj_rhs, &mut basis, &mut pivots, &mut pivot) {
        return None;
    }
    Some((basis, -obj_rhs[0]))
}

/// Optimal value in floating point only; `None` when the float solve does
/// not reach an optimal basis. Used to steer searches, never to decide them.
pub fn approximate_max(lp: &LinearProgram, pivot_limit: usize) -> Option<f64> {
    float_basis(lp, pivot_limit).map(|(_, v)| v)
}

/// Solves the square system `m·v = rhs` exactly, or `None` if it is singular.
fn solve(mut m: Vec<Vec<Rational>>, mut rhs: Vec<Rational>) -> Option<Vec<Rational>> {
    let p = rhs.len();
    let mut order = Vec::with_capacity(p);
    let mut used = vec![false; p];
    for col in 0..p {
        // Sparsest usable row keeps fill-in down.
        let r = (0..p)
            .filter(|&r| !used[r] && !m[r][col].is_zero())
            .min_by_key(|&r| m[r].iter().filter(|v| !v.is_zero()).count())?;
        used[r] = true;
        order.push(r);
        let piv = m[r][col].clone();
        let prow: Vec<(usize, Rational)> =
            (0..p).filter(|&k| !m[r][k].is_zero()).map(|k| (k, &m[r][k] / &piv)).collect();
        let prhs = &rhs[r] / &piv;
        for i in 0..p {
            if i == r || m[i][col].is_zero() {
                continue;
            }
            let f = m[i][col].clone();
            for (k, v) in &prow {
                let delta = &f * v;
                m[i][*k] -= delta;
            }
            if !prhs.is_zero() {
                rhs[i] -= &f * &prhs;
            }
        }
        for (k, v) in prow {
            m[r][k] = v;
        }
        rhs[r] = prhs;
    }
    let mut out = vec![Rational::zero(); p];
    for (col, r) in order.into_iter().enumerate() {
        out[col] = rhs[r].clone();
    }
    Some(out)
}

/// Exact optimality check of a basis via primal values and duals.
fn certify(lp: &LinearProgram, basis: &[usize]) -> Option<LpOutcome> {
    let n = lp.num_vars;
    let m = lp.rows.len();
    if basis.iter().any(|&b| b >= n + m) {
        return None;
    }
    let structural: Vec<usize> = basis.iter().copied().filter(|&b| b < n).collect();
    let mut slack_basic = vec![false; m];
    basis.iter().filter(|&&b| b >= n).for_each(|&b| slack_basic[b - n] = true);
    let tight: Vec<usize> = (0..m).filter(|&i| !slack_basic[i]).collect();
    if tight.len() != structural.len() {
        return None;
    }
    let mut pos = vec![usize::MAX; n];
    structural.iter().enumerate().for_each(|(k, &j)| pos[j] = k);
    let p = structural.len();
    let mut mat = vec![vec![Rational::zero(); p]; p];
    for (r, &i) in tight.iter().enumerate() {
        for (j, c) in &lp.rows[i].coeffs {
            if pos[*j] != usize::MAX {
                mat[r][pos[*j]] += c;
            }
        }
    }
    let b: Vec<Rational> = tight.iter().map(|&i| lp.rows[i].rhs.clone()).collect();
    let xs = solve(mat.clone(), b)?;
    if xs.iter().any(|v| v.is_negative()) {
        return None;
    }
    let mut solution = vec![Rational::zero(); n];
    structural.iter().zip(&xs).for_each(|(&j, v)| solution[j] = v.clone());
    for row in &lp.rows {
        let lhs: Rational = row.coeffs.iter().map(|(j, c)| c * &solution[*j]).sum();
        if lhs > row.rhs {
            return None;
        }
    }
    let mut cost = vec![Rational::zero(); n];
    for (j, c) in &lp.objective {
        cost[*j] += c;
    }
    let transposed: Vec<Vec<Rational>> = (0..p).map(|s| (0..p).map(|r| mat[r][s].clone()).collect()).collect();
    let y = solve(transposed, structural.iter().map(|&j| cost[j].clone()).collect())?;
    if y.iter().any(|v| v.is_negative()) {
        return None;
    }
    // Reduced costs of the nonbasic structurals must be ≤ 0.
    let mut priced = vec![Rational::zero(); n];
    for (r, &i) in tight.iter().enumerate() {
        if y[r].is_zero() {
            continue;
        }
        for (j, c) in &lp.rows[i].coeffs {
            priced[*j] += &y[r] * c;
        }
    }
    if (0..n).any(|j| pos[j] == usize::MAX && cost[j] > priced[j]) {
        return None;
    }
    let value: Rational = lp.objective.iter().map(|(j, c)| c * &solution[*j]).sum();
    Some(LpOutcome::Optimal { value, solution })
}

/// The exact tableau method on its own.
pub fn maximize_exact(lp: &LinearProgram, pivot_limit: usize) -> Result<LpOutcome, LpError> {
    let n = lp.num_vars;
    let m = lp.rows.len();
    let art = n + m;
    let width = n + m + 1;
    let zero = Rational::zero();
    let mut rows = vec![vec![zero.clone(); width]; m];
    let mut rhs = Vec::with_capacity(m);
    for (i, row) in lp.rows.iter().enumerate() {
        for (j, c) in &row.coeffs {
            rows[i][*j] += c;
        }
        rows[i][n + i] = Rational::from_integer(1.into());
        if row.rhs.is_negative() {
            rows[i][art] = Rational::from_integer((-1).into());
        }
        rhs.push(row.rhs.clone());
    }
    let mut obj2 = vec![zero.clone(); width];
    for (j, c) in &lp.objective {
        obj2[*j] += c;
    }
    let mut obj1 = vec![zero.clone(); width];
    obj1[art] = Rational::from_integer((-1).into());
    let mut t = Tableau {
        rows,
        rhs,
        basis: (n..n + m).collect(),
        obj: [obj2, obj1],
        obj_rhs: [zero.clone(), zero.clone()],
        width,
        pivots: 0,
    };

    let most_negative = (0..m).filter(|&i| t.rhs[i].is_negative()).min_by(|&a, &b| t.rhs[a].cmp(&t.rhs[b]));
    if let Some(r) = most_negative {
        t.pivot(r, art);
        t.run(1, |_| true, pivot_limit, 1)?;
        // Phase-1 value is -t at the optimum.
        if t.obj_rhs[1].is_positive() {
            return Ok(LpOutcome::Infeasible);
        }
        // A basic artificial sits at zero; pivot it out unless its row is redundant.
        if let Some(r) = t.basis.iter().position(|&b| b == art) {
            if let Some(j) = (0..art).find(|&j| !t.rows[r][j].is_zero()) {
                t.pivot(r, j);
            }
        }
    }
    if !t.run(0, |j| j != art, pivot_limit, 2)? {
        return Ok(LpOutcome::Unbounded);
    }
    let mut solution = vec![zero; n];
    for (i, &b) in t.basis.iter().enumerate() {
        if b < n {
            solution[b] = t.rhs[i].clone();
        }
    }
    Ok(LpOutcome::Optimal { value: -t.obj_rhs[0].clone(), solution })
}
