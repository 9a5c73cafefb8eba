//! Dense bounded-variable primal simplex on a condensed tableau.
//!
//! Only nonbasic columns are stored: row `i` of the tableau reads
//! `x[basis[i]] + sum_j t[i][j] * x[nonbasic[j]] = const`. Every row owns a
//! logical slack; rows whose slack starts out of bounds get an artificial
//! that phase 1 drives to zero.

use super::presolve::{Block, Presolved, Row};
use super::{LpError, Relation, MIN_PIVOT};

const PRIMAL_TOL: f64 = 1e-9;
const DUAL_TOL: f64 = 1e-9;
const ZERO_TOL: f64 = 1e-12;
const PHASE1_TOL: f64 = 1e-7;
/// Violation above which a withheld row is added back.
const LAZY_TOL: f64 = 1e-9;
/// Withheld rows added per separation round.
const LAZY_BATCH: usize = 64;

pub(crate) enum BlockResult {
    Optimal(Vec<f64>),
    Infeasible,
    Unbounded,
}

enum RunResult {
    Optimal(Vec<f64>),
    Infeasible,
    Unbounded { point: Vec<f64>, ray: Vec<f64> },
}

/// Solves one presolved block, separating lazy rows until none is violated.
pub(crate) fn solve_block_lazily(
    p: &Presolved,
    block: &Block,
    lower: &[f64],
    upper: &[f64],
) -> Result<BlockResult, LpError> {
    let mut local = vec![usize::MAX; p.num_cols()];
    for (k, &c) in block.cols.iter().enumerate() {
        local[c] = k;
    }
    let (mut active, mut pending): (Vec<usize>, Vec<usize>) =
        block.rows.iter().partition(|&&i| !p.rows[i].lazy);
    let rows: Vec<Row> = p
        .rows
        .iter()
        .map(|r| Row {
            coefs: r
                .coefs
                .iter()
                .filter(|&&(j, _)| local[j] != usize::MAX)
                .map(|&(j, a)| (local[j], a))
                .collect(),
            ..r.clone()
        })
        .collect();
    let lb: Vec<f64> = block.cols.iter().map(|&c| lower[c]).collect();
    let ub: Vec<f64> = block.cols.iter().map(|&c| upper[c]).collect();
    let cost: Vec<f64> = block.cols.iter().map(|&c| p.cost[c]).collect();

    loop {
        let active_rows: Vec<&Row> = active.iter().map(|&i| &rows[i]).collect();
        let mut tab = Tableau::new(&lb, &ub, &cost, &active_rows);
        let run = tab.solve().map_err(|f| match f {
            Failure::SmallPivot { row, pivot } => LpError::NumericalBreakdown {
                constraint: p.constraint_name(rows[active[row]].origin).to_string(),
                pivot,
            },
            Failure::IterationLimit(n) => LpError::IterationLimit(n),
        })?;
        match run {
            RunResult::Infeasible => return Ok(BlockResult::Infeasible),
            RunResult::Optimal(x) => {
                let mut violated: Vec<(f64, usize)> = pending
                    .iter()
                    .enumerate()
                    .map(|(k, &i)| (rows[i].violation(&x), k))
                    .filter(|&(v, _)| v > LAZY_TOL)
                    .collect();
                if violated.is_empty() {
                    return Ok(BlockResult::Optimal(x));
                }
                violated.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
                promote(&mut active, &mut pending, &violated);
            }
            RunResult::Unbounded { point, ray } => {
                // Rows met first along the ray are the ones that cut it.
                let mut cutting: Vec<(f64, usize)> = pending
                    .iter()
                    .enumerate()
                    .filter_map(|(k, &i)| {
                        let row = &rows[i];
                        let slope = row.activity(&ray);
                        let gap = row.rhs - row.activity(&point);
                        let step = match row.relation {
                            Relation::Le if slope > ZERO_TOL => gap / slope,
                            Relation::Ge if slope < -ZERO_TOL => gap / slope,
                            Relation::Eq if slope.abs() > ZERO_TOL => gap / slope,
                            _ => return None,
                        };
                        Some((step, k))
                    })
                    .collect();
                if cutting.is_empty() {
                    return Ok(BlockResult::Unbounded);
                }
                cutting.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                promote(&mut active, &mut pending, &cutting);
            }
        }
    }
}

fn promote(active: &mut Vec<usize>, pending: &mut Vec<usize>, ranked: &[(f64, usize)]) {
    let mut take: Vec<usize> = ranked.iter().take(LAZY_BATCH).map(|&(_, k)| k).collect();
    take.sort_unstable();
    for &k in take.iter().rev() {
        active.push(pending.swap_remove(k));
    }
    // keep row order deterministic and independent of swap_remove
    pending.sort_unstable();
    active.sort_unstable();
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Position {
    Basic(usize),
    Lower,
    Upper,
    /// Nonbasic free variable resting at zero.
    Zero,
}

struct Tableau {
    m: usize,
    /// Structural column count.
    n: usize,
    /// Tableau column count (nonbasic slots).
    width: usize,
    t: Vec<f64>,
    d: Vec<f64>,
    basis: Vec<usize>,
    nonbasic: Vec<usize>,
    pos: Vec<Position>,
    x: Vec<f64>,
    lb: Vec<f64>,
    ub: Vec<f64>,
    cost: Vec<f64>,
    has_artificials: bool,
}

#[derive(Debug)]
enum Failure {
    SmallPivot { row: usize, pivot: f64 },
    IterationLimit(usize),
}

enum Ratio {
    Pivot { row: usize, step: f64 },
    Flip { step: f64 },
    Unbounded,
}

impl Tableau {
    fn new(lb: &[f64], ub: &[f64], cost: &[f64], rows: &[&Row]) -> Self {
        let n = lb.len();
        let m = rows.len();
        let total = n + 2 * m;
        let mut lbs = Vec::with_capacity(total);
        let mut ubs = Vec::with_capacity(total);
        let mut x = vec![0.0; total];
        let mut pos = vec![Position::Lower; total];
        lbs.extend_from_slice(lb);
        ubs.extend_from_slice(ub);
        for j in 0..n {
            if lb[j].is_finite() {
                x[j] = lb[j];
                pos[j] = Position::Lower;
            } else if ub[j].is_finite() {
                x[j] = ub[j];
                pos[j] = Position::Upper;
            } else {
                pos[j] = Position::Zero;
            }
        }
        for row in rows {
            let (l, u) = match row.relation {
                Relation::Le => (0.0, f64::INFINITY),
                Relation::Ge => (f64::NEG_INFINITY, 0.0),
                Relation::Eq => (0.0, 0.0),
            };
            lbs.push(l);
            ubs.push(u);
        }
        for _ in 0..m {
            lbs.push(0.0);
            ubs.push(f64::INFINITY);
        }

        // Decide which rows start on their slack and which need an artificial.
        let mut slack_value = vec![0.0; m];
        let mut needs_art = vec![false; m];
        for (i, row) in rows.iter().enumerate() {
            let s = row.rhs - row.activity(&x[..n]);
            slack_value[i] = s;
            needs_art[i] = s < lbs[n + i] - PRIMAL_TOL || s > ubs[n + i] + PRIMAL_TOL;
        }

        let mut nonbasic: Vec<usize> = (0..n).collect();
        let mut slack_col = vec![usize::MAX; m];
        for i in 0..m {
            if needs_art[i] && rows[i].relation != Relation::Eq {
                slack_col[i] = nonbasic.len();
                nonbasic.push(n + i);
            }
        }
        let width = nonbasic.len();
        let mut t = vec![0.0; m * width];
        let mut basis = vec![0; m];
        for (i, row) in rows.iter().enumerate() {
            let tr = &mut t[i * width..(i + 1) * width];
            if needs_art[i] {
                let s = n + i;
                let target = if slack_value[i] < lbs[s] {
                    lbs[s]
                } else {
                    ubs[s]
                };
                x[s] = target;
                pos[s] = if target == lbs[s] {
                    Position::Lower
                } else {
                    Position::Upper
                };
                let residual = slack_value[i] - target;
                let sigma = if residual >= 0.0 { 1.0 } else { -1.0 };
                for &(j, a) in &row.coefs {
                    tr[j] = a / sigma;
                }
                if slack_col[i] != usize::MAX {
                    tr[slack_col[i]] = 1.0 / sigma;
                }
                let art = n + m + i;
                x[art] = residual.abs();
                basis[i] = art;
                pos[art] = Position::Basic(i);
            } else {
                for &(j, a) in &row.coefs {
                    tr[j] = a;
                }
                x[n + i] = slack_value[i];
                basis[i] = n + i;
                pos[n + i] = Position::Basic(i);
            }
        }
        let mut full_cost = vec![0.0; total];
        full_cost[..n].copy_from_slice(cost);
        Tableau {
            m,
            n,
            width,
            t,
            d: vec![0.0; width],
            basis,
            nonbasic,
            pos,
            x,
            lb: lbs,
            ub: ubs,
            cost: full_cost,
            has_artificials: needs_art.iter().any(|&b| b),
        }
    }

    fn is_artificial(&self, var: usize) -> bool {
        var >= self.n + self.m
    }

    fn price(&mut self, costs: &[f64]) {
        for s in 0..self.width {
            let mut dj = costs[self.nonbasic[s]];
            for i in 0..self.m {
                let cb = costs[self.basis[i]];
                if cb != 0.0 {
                    dj -= cb * self.t[i * self.width + s];
                }
            }
            self.d[s] = dj;
        }
    }

    /// Runs phase 1 (if needed) and phase 2.
    fn solve(&mut self) -> Result<RunResult, Failure> {
        if self.has_artificials {
            let phase1: Vec<f64> = (0..self.x.len())
                .map(|v| if self.is_artificial(v) { 1.0 } else { 0.0 })
                .collect();
            self.price(&phase1);
            self.iterate(&phase1)?;
            let infeasibility: f64 = (self.n + self.m..self.x.len()).map(|v| self.x[v]).sum();
            if infeasibility > PHASE1_TOL {
                return Ok(RunResult::Infeasible);
            }
            for v in self.n + self.m..self.x.len() {
                self.ub[v] = 0.0;
                if !matches!(self.pos[v], Position::Basic(_)) {
                    self.x[v] = 0.0;
                }
            }
        }
        let costs = self.cost.clone();
        self.price(&costs);
        match self.iterate(&costs)? {
            Some((s, dir)) => {
                let mut ray = vec![0.0; self.n];
                let entering = self.nonbasic[s];
                if entering < self.n {
                    ray[entering] = dir;
                }
                for i in 0..self.m {
                    let b = self.basis[i];
                    if b < self.n {
                        ray[b] = -dir * self.t[i * self.width + s];
                    }
                }
                Ok(RunResult::Unbounded {
                    point: self.x[..self.n].to_vec(),
                    ray,
                })
            }
            None => Ok(RunResult::Optimal(self.x[..self.n].to_vec())),
        }
    }

    /// Pivots until optimal. Returns the unbounded column and direction, if any.
    fn iterate(&mut self, costs: &[f64]) -> Result<Option<(usize, f64)>, Failure> {
        let limit = 50 * (self.m + self.width) + 1000;
        let bland_after = 3 * (self.m + self.width);
        let mut degenerate = 0usize;
        let mut bland = false;
        let mut refreshed = 0;
        for _ in 0..limit {
            let Some((s, dir)) = self.choose_entering(bland) else {
                // Confirm optimality against freshly computed reduced costs.
                if refreshed < 2 {
                    refreshed += 1;
                    self.price(costs);
                    if self.choose_entering(bland).is_some() {
                        continue;
                    }
                }
                return Ok(None);
            };
            match self.ratio_test(s, dir, bland) {
                Ratio::Unbounded => return Ok(Some((s, dir))),
                Ratio::Flip { step } => {
                    self.advance(s, dir, step);
                    let v = self.nonbasic[s];
                    self.pos[v] = if dir > 0.0 {
                        Position::Upper
                    } else {
                        Position::Lower
                    };
                    self.x[v] = if dir > 0.0 { self.ub[v] } else { self.lb[v] };
                    degenerate = 0;
                }
                Ratio::Pivot { row, step } => {
                    let pivot = self.t[row * self.width + s];
                    if pivot.abs() < MIN_PIVOT {
                        return Err(Failure::SmallPivot {
                            row,
                            pivot: pivot.abs(),
                        });
                    }
                    self.advance(s, dir, step);
                    let leaving = self.basis[row];
                    let alpha = pivot * dir;
                    let at_lower = alpha > 0.0;
                    self.x[leaving] = if at_lower {
                        self.lb[leaving]
                    } else {
                        self.ub[leaving]
                    };
                    self.pos[leaving] = if at_lower {
                        Position::Lower
                    } else {
                        Position::Upper
                    };
                    let entering = self.nonbasic[s];
                    self.pos[entering] = Position::Basic(row);
                    self.basis[row] = entering;
                    self.nonbasic[s] = leaving;
                    self.pivot(row, s);
                    if step <= ZERO_TOL {
                        degenerate += 1;
                        if degenerate >= bland_after {
                            bland = true;
                        }
                    } else {
                        degenerate = 0;
                    }
                }
            }
        }
        Err(Failure::IterationLimit(limit))
    }

    fn choose_entering(&self, bland: bool) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64, f64)> = None; // (col, dir, score)
        for s in 0..self.width {
            let v = self.nonbasic[s];
            if self.lb[v] == self.ub[v] {
                continue;
            }
            let dj = self.d[s];
            let dir = match self.pos[v] {
                Position::Lower if dj < -DUAL_TOL => 1.0,
                Position::Upper if dj > DUAL_TOL => -1.0,
                Position::Zero if dj < -DUAL_TOL => 1.0,
                Position::Zero if dj > DUAL_TOL => -1.0,
                _ => continue,
            };
            if bland {
                let better = best.is_none_or(|(bs, _, _)| v < self.nonbasic[bs]);
                if better {
                    best = Some((s, dir, 0.0));
                }
            } else if best.is_none_or(|(_, _, score)| dj.abs() > score) {
                best = Some((s, dir, dj.abs()));
            }
        }
        best.map(|(s, dir, _)| (s, dir))
    }

    fn ratio_test(&self, s: usize, dir: f64, bland: bool) -> Ratio {
        let entering = self.nonbasic[s];
        let range = self.ub[entering] - self.lb[entering];
        let w = self.width;
        // Pass 1: tolerance-relaxed bound on the step.
        let mut relaxed = f64::INFINITY;
        for i in 0..self.m {
            let alpha = self.t[i * w + s] * dir;
            if alpha.abs() <= ZERO_TOL {
                continue;
            }
            let b = self.basis[i];
            let r = if alpha > 0.0 {
                (self.x[b] - self.lb[b] + PRIMAL_TOL) / alpha
            } else {
                (self.ub[b] - self.x[b] + PRIMAL_TOL) / -alpha
            };
            if r < relaxed {
                relaxed = r;
            }
        }
        if relaxed.is_infinite() {
            return if range.is_finite() {
                Ratio::Flip { step: range }
            } else {
                Ratio::Unbounded
            };
        }
        // Pass 2: among rows within the relaxed step, take the largest pivot
        // (or, under Bland, the smallest exact ratio then smallest index).
        let mut chosen: Option<(usize, f64, f64)> = None; // (row, exact ratio, |alpha|)
        for i in 0..self.m {
            let alpha = self.t[i * w + s] * dir;
            if alpha.abs() <= ZERO_TOL {
                continue;
            }
            let b = self.basis[i];
            let exact = if alpha > 0.0 {
                (self.x[b] - self.lb[b]) / alpha
            } else {
                (self.ub[b] - self.x[b]) / -alpha
            };
            if exact > relaxed {
                continue;
            }
            let better = match chosen {
                None => true,
                Some((ci, cr, ca)) => {
                    if bland {
                        exact < cr - ZERO_TOL || (exact <= cr + ZERO_TOL && b < self.basis[ci])
                    } else {
                        alpha.abs() > ca
                    }
                }
            };
            if better {
                chosen = Some((i, exact, alpha.abs()));
            }
        }
        let (row, exact, _) = chosen.expect("a row attains the relaxed ratio");
        let step = exact.max(0.0);
        if range.is_finite() && range <= step {
            Ratio::Flip { step: range }
        } else {
            Ratio::Pivot { row, step }
        }
    }

    fn advance(&mut self, s: usize, dir: f64, step: f64) {
        if step == 0.0 {
            return;
        }
        let v = self.nonbasic[s];
        self.x[v] += dir * step;
        for i in 0..self.m {
            let a = self.t[i * self.width + s];
            if a != 0.0 {
                let b = self.basis[i];
                self.x[b] -= a * dir * step;
            }
        }
    }

    fn pivot(&mut self, r: usize, s: usize) {
        let w = self.width;
        let p = self.t[r * w + s];
        let inv = 1.0 / p;
        {
            let row = &mut self.t[r * w..(r + 1) * w];
            for v in row.iter_mut() {
                *v *= inv;
            }
            row[s] = inv;
        }
        let pivot_row: Vec<f64> = self.t[r * w..(r + 1) * w].to_vec();
        for i in 0..self.m {
            if i == r {
                continue;
            }
            let f = self.t[i * w + s];
            if f == 0.0 {
                continue;
            }
            let row = &mut self.t[i * w..(i + 1) * w];
            for (v, &pr) in row.iter_mut().zip(&pivot_row) {
                *v -= f * pr;
            }
            row[s] = -f * inv;
        }
        let f = self.d[s];
        if f != 0.0 {
            for (v, &pr) in self.d.iter_mut().zip(&pivot_row) {
                *v -= f * pr;
            }
            self.d[s] = -f * inv;
        }
    }
}
