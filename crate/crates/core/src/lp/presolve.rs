use std::collections::BTreeSet;

use super::{LinearProgram, Relation};

/// Coefficients below this magnitude are dropped after a substitution.
const DROP_TOL: f64 = 1e-14;
/// Relative pivot threshold for free-column elimination.
const ELIM_PIVOT_REL: f64 = 0.01;
/// Tolerance when an emptied row is checked against its right-hand side.
const EMPTY_ROW_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub(crate) struct Row {
    pub coefs: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
    pub lazy: bool,
    /// Index of the originating constraint.
    pub origin: usize,
}

impl Row {
    pub fn activity(&self, x: &[f64]) -> f64 {
        self.coefs.iter().map(|&(j, a)| a * x[j]).sum()
    }

    pub fn violation(&self, x: &[f64]) -> f64 {
        let act = self.activity(x);
        match self.relation {
            Relation::Le => act - self.rhs,
            Relation::Ge => self.rhs - act,
            Relation::Eq => (act - self.rhs).abs(),
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum ColState {
    Fixed(f64),
    Eliminated,
    Kept(usize),
}

/// `x[var] = (rhs - sum(a * x[k])) / pivot`
#[derive(Debug, Clone)]
struct Elimination {
    var: usize,
    terms: Vec<(usize, f64)>,
    rhs: f64,
    pivot: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct Block {
    pub cols: Vec<usize>,
    pub rows: Vec<usize>,
}

pub(crate) enum Outcome {
    Reduced(Presolved),
    Infeasible,
}

/// A reduced minimization model plus the information to map solutions back.
#[derive(Debug, Clone)]
pub(crate) struct Presolved {
    state: Vec<ColState>,
    /// Original variable index per reduced column.
    kept: Vec<usize>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub cost: Vec<f64>,
    pub rows: Vec<Row>,
    elims: Vec<Elimination>,
    names: Vec<String>,
}

impl Presolved {
    /// `sign` is +1 for minimization and -1 for maximization.
    pub fn build(lp: &LinearProgram, sign: f64) -> Outcome {
        let n = lp.variables.len();
        let mut state = vec![ColState::Eliminated; n];
        let mut cost: Vec<f64> = lp.objective.iter().map(|c| sign * c).collect();
        let mut fixed = vec![None; n];
        for (j, v) in lp.variables.iter().enumerate() {
            if v.lower == v.upper {
                fixed[j] = Some(v.lower);
                state[j] = ColState::Fixed(v.lower);
            }
        }

        // Rows in original variable space with fixed columns substituted.
        let mut rows: Vec<Option<Row>> = Vec::with_capacity(lp.constraints.len());
        for (i, c) in lp.constraints.iter().enumerate() {
            let mut rhs = c.rhs;
            let mut coefs: Vec<(usize, f64)> = Vec::with_capacity(c.terms.len());
            for &(v, a) in &c.terms {
                match fixed[v.0] {
                    Some(val) => rhs -= a * val,
                    None => coefs.push((v.0, a)),
                }
            }
            coefs.sort_by_key(|&(j, _)| j);
            coefs = merge_duplicates(coefs);
            rows.push(Some(Row {
                coefs,
                relation: c.relation,
                rhs,
                lazy: c.lazy,
                origin: i,
            }));
        }

        let mut col_rows: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
        for (i, r) in rows.iter().enumerate() {
            if let Some(r) = r {
                for &(j, _) in &r.coefs {
                    col_rows[j].insert(i);
                }
            }
        }

        let is_free = |j: usize| {
            let v = &lp.variables[j];
            !v.is_binary && v.lower == f64::NEG_INFINITY && v.upper == f64::INFINITY
        };
        let mut candidates: BTreeSet<usize> = (0..n)
            .filter(|&j| fixed[j].is_none() && is_free(j))
            .collect();
        let mut elims = Vec::new();
        let mut eliminated = vec![false; n];

        loop {
            let mut best: Option<(usize, usize, usize)> = None; // (cost, col, row)
            let mut exhausted = Vec::new();
            for &j in &candidates {
                let mut any_eq = false;
                let col_count = col_rows[j].len();
                for &i in &col_rows[j] {
                    let row = rows[i].as_ref().expect("live row");
                    if row.relation != Relation::Eq || row.lazy {
                        continue;
                    }
                    any_eq = true;
                    let a = coef_of(&row.coefs, j);
                    let row_max = row.coefs.iter().fold(0.0f64, |m, &(_, x)| m.max(x.abs()));
                    if a.abs() < ELIM_PIVOT_REL * row_max {
                        continue;
                    }
                    let markowitz = (row.coefs.len() - 1) * (col_count - 1);
                    if best.is_none_or(|(c, _, _)| markowitz < c) {
                        best = Some((markowitz, j, i));
                    }
                }
                if !any_eq {
                    exhausted.push(j);
                }
            }
            for j in exhausted {
                candidates.remove(&j);
            }
            let Some((_, j, r)) = best else { break };
            candidates.remove(&j);

            let pivot_row = rows[r].take().expect("live pivot row");
            for &(k, _) in &pivot_row.coefs {
                col_rows[k].remove(&r);
            }
            let pivot = coef_of(&pivot_row.coefs, j);

            let others: Vec<usize> = col_rows[j].iter().copied().collect();
            for i in others {
                let row = rows[i].as_mut().expect("live row");
                let factor = coef_of(&row.coefs, j) / pivot;
                let old: BTreeSet<usize> = row.coefs.iter().map(|&(k, _)| k).collect();
                row.coefs = axpy_sparse(&row.coefs, -factor, &pivot_row.coefs, j);
                row.rhs -= factor * pivot_row.rhs;
                let new: BTreeSet<usize> = row.coefs.iter().map(|&(k, _)| k).collect();
                for k in old.difference(&new) {
                    col_rows[*k].remove(&i);
                }
                for k in new.difference(&old) {
                    col_rows[*k].insert(i);
                }
            }
            col_rows[j].clear();

            let cj = cost[j];
            if cj != 0.0 {
                let factor = cj / pivot;
                for &(k, a) in &pivot_row.coefs {
                    if k != j {
                        cost[k] -= factor * a;
                    }
                }
                cost[j] = 0.0;
            }

            eliminated[j] = true;
            elims.push(Elimination {
                var: j,
                terms: pivot_row
                    .coefs
                    .iter()
                    .copied()
                    .filter(|&(k, _)| k != j)
                    .collect(),
                rhs: pivot_row.rhs,
                pivot,
            });
        }

        // Renumber surviving columns.
        let mut kept = Vec::new();
        for j in 0..n {
            if fixed[j].is_some() {
                continue;
            }
            if eliminated[j] {
                state[j] = ColState::Eliminated;
            } else {
                state[j] = ColState::Kept(kept.len());
                kept.push(j);
            }
        }
        let mut final_rows = Vec::new();
        for row in rows.into_iter().flatten() {
            if row.coefs.is_empty() {
                let ok = match row.relation {
                    Relation::Le => row.rhs >= -EMPTY_ROW_TOL,
                    Relation::Ge => row.rhs <= EMPTY_ROW_TOL,
                    Relation::Eq => row.rhs.abs() <= EMPTY_ROW_TOL,
                };
                if !ok {
                    return Outcome::Infeasible;
                }
                continue;
            }
            let coefs = row
                .coefs
                .iter()
                .map(|&(j, a)| match state[j] {
                    ColState::Kept(c) => (c, a),
                    _ => unreachable!("row references removed column"),
                })
                .collect();
            final_rows.push(Row { coefs, ..row });
        }

        Outcome::Reduced(Presolved {
            lower: kept.iter().map(|&j| lp.variables[j].lower).collect(),
            upper: kept.iter().map(|&j| lp.variables[j].upper).collect(),
            cost: kept.iter().map(|&j| cost[j]).collect(),
            state,
            kept,
            rows: final_rows,
            elims,
            names: lp.constraints.iter().map(|c| c.name.clone()).collect(),
        })
    }

    pub fn num_cols(&self) -> usize {
        self.kept.len()
    }

    /// Reduced column carrying original variable `var`, if it survived.
    pub fn column_of(&self, var: usize) -> Option<usize> {
        match self.state[var] {
            ColState::Kept(c) => Some(c),
            _ => None,
        }
    }

    pub fn constraint_name(&self, origin: usize) -> &str {
        &self.names[origin]
    }

    /// Connected components of the column/row incidence graph.
    pub fn blocks(&self) -> Vec<Block> {
        let n = self.num_cols();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for row in &self.rows {
            let first = row.coefs[0].0;
            for &(j, _) in &row.coefs[1..] {
                let (a, b) = (find(&mut parent, first), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
        let mut block_of_root = vec![usize::MAX; n];
        let mut blocks: Vec<Block> = Vec::new();
        for j in 0..n {
            let root = find(&mut parent, j);
            if block_of_root[root] == usize::MAX {
                block_of_root[root] = blocks.len();
                blocks.push(Block {
                    cols: Vec::new(),
                    rows: Vec::new(),
                });
            }
            blocks[block_of_root[root]].cols.push(j);
        }
        for (i, row) in self.rows.iter().enumerate() {
            let root = find(&mut parent, row.coefs[0].0);
            blocks[block_of_root[root]].rows.push(i);
        }
        blocks
    }

    /// Maps reduced column values back onto every original variable.
    pub fn postsolve(&self, reduced: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; self.state.len()];
        for (j, s) in self.state.iter().enumerate() {
            match *s {
                ColState::Fixed(v) => x[j] = v,
                ColState::Kept(c) => x[j] = reduced[c],
                ColState::Eliminated => {}
            }
        }
        for e in self.elims.iter().rev() {
            let rest: f64 = e.terms.iter().map(|&(k, a)| a * x[k]).sum();
            x[e.var] = (e.rhs - rest) / e.pivot;
        }
        x
    }
}

fn coef_of(coefs: &[(usize, f64)], j: usize) -> f64 {
    coefs
        .binary_search_by_key(&j, |&(k, _)| k)
        .map(|p| coefs[p].1)
        .unwrap_or(0.0)
}

fn merge_duplicates(sorted: Vec<(usize, f64)>) -> Vec<(usize, f64)> {
    let mut out: Vec<(usize, f64)> = Vec::with_capacity(sorted.len());
    for (j, a) in sorted {
        match out.last_mut() {
            Some(last) if last.0 == j => last.1 += a,
            _ => out.push((j, a)),
        }
    }
    out.retain(|&(_, a)| a != 0.0);
    out
}

/// `row + factor * other`, with column `skip` removed from the result.
fn axpy_sparse(
    row: &[(usize, f64)],
    factor: f64,
    other: &[(usize, f64)],
    skip: usize,
) -> Vec<(usize, f64)> {
    let mut out = Vec::with_capacity(row.len() + other.len());
    let (mut a, mut b) = (0, 0);
    while a < row.len() || b < other.len() {
        let (j, v) = if b >= other.len() || (a < row.len() && row[a].0 < other[b].0) {
            a += 1;
            row[a - 1]
        } else if a >= row.len() || other[b].0 < row[a].0 {
            b += 1;
            (other[b - 1].0, factor * other[b - 1].1)
        } else {
            a += 1;
            b += 1;
            (row[a - 1].0, row[a - 1].1 + factor * other[b - 1].1)
        };
        if j != skip && v.abs() > DROP_TOL {
            out.push((j, v));
        }
    }
    out
}
