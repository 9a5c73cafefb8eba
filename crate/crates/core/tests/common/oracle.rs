//! Brute-force reference solvers, independent of the simplex code path.

use rand::Rng;
use triopf::lp::{LinearProgram, Relation, Sense, VarId};

const TOL: f64 = 1e-9;

/// Gaussian elimination with partial pivoting; `None` when singular.
#[allow(clippy::needless_range_loop)]
fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-11 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in 0..n {
            if r != col {
                let f = a[r][col] / a[col][col];
                if f != 0.0 {
                    for c in col..n {
                        a[r][c] -= f * a[col][c];
                    }
                    b[r] -= f * b[col];
                }
            }
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

fn feasible(lp: &LinearProgram, x: &[f64]) -> bool {
    lp.variables
        .iter()
        .zip(x)
        .all(|(v, &xi)| xi >= v.lower - TOL && xi <= v.upper + TOL)
        && lp.constraints.iter().all(|c| {
            let act: f64 = c.terms.iter().map(|&(v, a)| a * x[v.0]).sum();
            match c.relation {
                Relation::Le => act <= c.rhs + TOL,
                Relation::Ge => act >= c.rhs - TOL,
                Relation::Eq => (act - c.rhs).abs() <= TOL,
            }
        })
}

/// Optimal objective by enumerating every basic solution of a box-bounded
/// LP. Fixed variables are substituted rather than enumerated. `None`
/// means infeasible.
pub fn vertex_enumeration(lp: &LinearProgram) -> Option<f64> {
    let free: Vec<usize> = (0..lp.variables.len())
        .filter(|&j| lp.variables[j].lower < lp.variables[j].upper)
        .collect();
    let n = free.len();
    let mut base: Vec<f64> = lp.variables.iter().map(|v| v.lower).collect();
    let point = |base: &mut Vec<f64>, xs: &[f64]| {
        for (k, &j) in free.iter().enumerate() {
            base[j] = xs[k];
        }
        base.clone()
    };
    if n == 0 {
        return feasible(lp, &base).then(|| lp.evaluate(&base));
    }
    // Hyperplanes over the free columns: each constraint, then each bound.
    let mut planes: Vec<(Vec<f64>, f64)> = Vec::new();
    for c in &lp.constraints {
        let mut row = vec![0.0; n];
        let mut rhs = c.rhs;
        for &(v, a) in &c.terms {
            match free.iter().position(|&j| j == v.0) {
                Some(k) => row[k] += a,
                None => rhs -= a * lp.variables[v.0].lower,
            }
        }
        planes.push((row, rhs));
    }
    for (k, &j) in free.iter().enumerate() {
        let v = &lp.variables[j];
        for bound in [v.lower, v.upper] {
            assert!(bound.is_finite(), "oracle needs a bounded box");
            let mut row = vec![0.0; n];
            row[k] = 1.0;
            planes.push((row, bound));
        }
    }
    let mut best: Option<f64> = None;
    for subset in combinations(planes.len(), n) {
        let a = subset.iter().map(|&i| planes[i].0.clone()).collect();
        let b = subset.iter().map(|&i| planes[i].1).collect();
        let Some(xs) = solve_dense(a, b) else {
            continue;
        };
        let x = point(&mut base, &xs);
        if !feasible(lp, &x) {
            continue;
        }
        let obj = lp.evaluate(&x);
        best = Some(match (best, lp.sense) {
            (None, _) => obj,
            (Some(b), Sense::Minimize) => b.min(obj),
            (Some(b), Sense::Maximize) => b.max(obj),
        });
    }
    best
}

/// Optimal objective of a mixed-binary program: every binary pattern is
/// fixed in turn and the continuous remainder solved by vertex enumeration.
pub fn binary_enumeration(lp: &LinearProgram) -> Option<f64> {
    let binaries: Vec<usize> = (0..lp.variables.len())
        .filter(|&j| lp.variables[j].is_binary)
        .collect();
    let mut best: Option<f64> = None;
    for mask in 0u32..(1 << binaries.len()) {
        let mut fixed = lp.clone();
        for (k, &j) in binaries.iter().enumerate() {
            let v = f64::from(mask >> k & 1);
            fixed.variables[j].lower = v;
            fixed.variables[j].upper = v;
            fixed.variables[j].is_binary = false;
        }
        if let Some(obj) = vertex_enumeration(&fixed) {
            best = Some(match (best, lp.sense) {
                (None, _) => obj,
                (Some(b), Sense::Minimize) => b.min(obj),
                (Some(b), Sense::Maximize) => b.max(obj),
            });
        }
    }
    best
}

fn random_row(rng: &mut impl Rng, vars: &[VarId]) -> Vec<(VarId, f64)> {
    let mut terms = Vec::new();
    for &v in vars {
        if rng.gen_bool(0.8) {
            terms.push((v, f64::from(rng.gen_range(-6i32..=6)) * 0.5));
        }
    }
    terms
}

/// Box-bounded LP with `n` variables and `m` rows; integer-ish data so
/// degenerate vertices are common.
pub fn random_lp(rng: &mut impl Rng, n: usize, m: usize) -> LinearProgram {
    let sense = if rng.gen_bool(0.5) {
        Sense::Minimize
    } else {
        Sense::Maximize
    };
    let mut lp = LinearProgram::new(sense);
    let mut vars = Vec::with_capacity(n);
    for j in 0..n {
        let lo = f64::from(rng.gen_range(-3i32..=1));
        let hi = lo + f64::from(rng.gen_range(1i32..=5));
        vars.push(lp.add_var(format!("x{j}"), lo, hi));
    }
    for &v in &vars {
        lp.set_cost(v, f64::from(rng.gen_range(-5i32..=5)));
    }
    // Anchor most rows on a point of the box so a good share is feasible.
    let anchor: Vec<f64> = lp
        .variables
        .iter()
        .map(|v| rng.gen_range(v.lower..=v.upper))
        .collect();
    for i in 0..m {
        let terms = random_row(rng, &vars);
        let act: f64 = terms.iter().map(|&(v, a)| a * anchor[v.0]).sum();
        let slack = if rng.gen_bool(0.15) {
            -f64::from(rng.gen_range(1i32..=4))
        } else {
            f64::from(rng.gen_range(0i32..=3))
        };
        let (rel, rhs) = match rng.gen_range(0..10) {
            0 => (Relation::Eq, (act * 2.0).round() / 2.0),
            1..=5 => (Relation::Le, (act + slack).round()),
            _ => (Relation::Ge, (act - slack).round()),
        };
        lp.add_constraint(format!("r{i}"), terms, rel, rhs);
    }
    lp
}

/// Mixed-binary program with `b` binaries and `c` bounded continuous columns.
pub fn random_milp(rng: &mut impl Rng, b: usize, c: usize, m: usize) -> LinearProgram {
    let mut lp = random_lp(rng, c, 0);
    let bins: Vec<VarId> = (0..b).map(|k| lp.add_binary(format!("b{k}"))).collect();
    for &v in &bins {
        lp.set_cost(v, f64::from(rng.gen_range(-6i32..=6)));
    }
    let all: Vec<VarId> = (0..lp.variables.len()).map(VarId).collect();
    for i in 0..m {
        let terms = random_row(rng, &all);
        let rel = if rng.gen_bool(0.5) {
            Relation::Le
        } else {
            Relation::Ge
        };
        let rhs = f64::from(rng.gen_range(-4i32..=6));
        lp.add_constraint(format!("r{i}"), terms, rel, rhs);
    }
    lp
}
