//! Depth-first branch-and-bound over binary variables.

use super::presolve::{Outcome, Presolved};
use super::simplex::{solve_block_lazily, BlockResult};
use super::{LinearProgram, LpError, LpSolution, LpStatus, Sense, INTEGRALITY_TOL, MIP_GAP};

#[derive(Debug, Clone)]
pub struct MilpOptions {
    pub max_nodes: usize,
    pub gap: f64,
}

impl Default for MilpOptions {
    fn default() -> Self {
        MilpOptions {
            max_nodes: 20_000,
            gap: MIP_GAP,
        }
    }
}

/// Solves `lp` to optimality over its binary variables.
///
/// Branches on the most fractional binary, explores depth-first and prunes
/// nodes whose relaxation bound cannot beat the incumbent by more than the
/// gap. A model without binaries is solved as a plain LP.
pub fn solve_milp(lp: &LinearProgram) -> Result<LpSolution, LpError> {
    solve_milp_with(lp, &MilpOptions::default())
}

pub fn solve_milp_with(lp: &LinearProgram, opts: &MilpOptions) -> Result<LpSolution, LpError> {
    lp.check()?;
    if !lp.has_binaries() {
        return super::solve_relaxation(lp);
    }
    // Internally everything is a minimization of `sign * objective`.
    let sign = match lp.sense {
        Sense::Minimize => 1.0,
        Sense::Maximize => -1.0,
    };
    let presolved = match Presolved::build(lp, sign) {
        Outcome::Reduced(p) => p,
        Outcome::Infeasible => {
            return Ok(LpSolution {
                status: LpStatus::Infeasible,
                values: Vec::new(),
                objective_value: f64::NAN,
            })
        }
    };
    let binaries: Vec<(usize, usize)> = lp
        .variables
        .iter()
        .enumerate()
        .filter(|(_, v)| v.is_binary)
        .filter_map(|(j, _)| presolved.column_of(j).map(|c| (j, c)))
        .collect();
    let blocks = presolved.blocks();

    let mut incumbent: Option<(f64, Vec<f64>)> = None;
    let mut stack = vec![Node {
        lower: presolved.lower.clone(),
        upper: presolved.upper.clone(),
        bound: f64::NEG_INFINITY,
    }];
    let mut nodes = 0usize;
    let mut root_unbounded = false;

    while let Some(node) = stack.pop() {
        if let Some((best, _)) = &incumbent {
            if node.bound >= best - opts.gap {
                continue;
            }
        }
        nodes += 1;
        if nodes > opts.max_nodes {
            return Err(LpError::NodeLimit {
                limit: opts.max_nodes,
                incumbent: incumbent.map(|(_, values)| {
                    Box::new(LpSolution {
                        status: LpStatus::Optimal,
                        objective_value: lp.evaluate(&values),
                        values,
                    })
                }),
            });
        }

        let relaxed = match solve_node(&presolved, &blocks, &node)? {
            NodeResult::Infeasible => continue,
            NodeResult::Unbounded => {
                if nodes == 1 {
                    root_unbounded = true;
                    break;
                }
                continue;
            }
            NodeResult::Optimal(x) => x,
        };
        let values = presolved.postsolve(&relaxed);
        let value = sign * lp.evaluate(&values);
        if let Some((best, _)) = &incumbent {
            if value >= best - opts.gap {
                continue;
            }
        }

        let fractional = binaries
            .iter()
            .map(|&(j, c)| (c, values[j], (values[j] - values[j].round()).abs()))
            .filter(|&(_, _, f)| f > INTEGRALITY_TOL)
            .fold(None::<(usize, f64, f64)>, |best, cand| match best {
                Some(b) if b.2 >= cand.2 => Some(b),
                _ => Some(cand),
            });

        let Some((col, frac_value, _)) = fractional else {
            incumbent = Some((value, snap_binaries(lp, values)));
            continue;
        };

        if let Some(rounded) = repair_rounding(lp, &values) {
            let v = sign * lp.evaluate(&rounded);
            if incumbent.as_ref().is_none_or(|(best, _)| v < *best) {
                incumbent = Some((v, rounded));
            }
            if v <= value + opts.gap {
                continue;
            }
        }

        let mut down = node.clone();
        down.upper[col] = 0.0;
        down.bound = value;
        let mut up = node;
        up.lower[col] = 1.0;
        up.bound = value;
        // The child on the rounding side is explored first.
        if frac_value >= 0.5 {
            stack.push(down);
            stack.push(up);
        } else {
            stack.push(up);
            stack.push(down);
        }
    }

    if root_unbounded {
        return Ok(LpSolution {
            status: LpStatus::Unbounded,
            values: Vec::new(),
            objective_value: f64::NAN,
        });
    }
    Ok(match incumbent {
        Some((_, values)) => LpSolution {
            status: LpStatus::Optimal,
            objective_value: lp.evaluate(&values),
            values,
        },
        None => LpSolution {
            status: LpStatus::Infeasible,
            values: Vec::new(),
            objective_value: f64::NAN,
        },
    })
}

#[derive(Debug, Clone)]
struct Node {
    lower: Vec<f64>,
    upper: Vec<f64>,
    /// Relaxation value of the parent (a valid bound for this node).
    bound: f64,
}

enum NodeResult {
    Optimal(Vec<f64>),
    Infeasible,
    Unbounded,
}

fn solve_node(
    p: &Presolved,
    blocks: &[super::presolve::Block],
    node: &Node,
) -> Result<NodeResult, LpError> {
    let mut x = vec![0.0; p.num_cols()];
    for block in blocks {
        match solve_block_lazily(p, block, &node.lower, &node.upper)? {
            BlockResult::Optimal(vals) => {
                for (&c, v) in block.cols.iter().zip(vals) {
                    x[c] = v;
                }
            }
            BlockResult::Infeasible => return Ok(NodeResult::Infeasible),
            BlockResult::Unbounded => return Ok(NodeResult::Unbounded),
        }
    }
    Ok(NodeResult::Optimal(x))
}

fn snap_binaries(lp: &LinearProgram, mut values: Vec<f64>) -> Vec<f64> {
    for (j, v) in lp.variables.iter().enumerate() {
        if v.is_binary {
            values[j] = values[j].round();
        }
    }
    values
}

/// Rounds fractional binaries with the continuous values held fixed.
///
/// A binary is rounded once every row it shares with other still-fractional
/// binaries has been settled; forced directions go first, then the remaining
/// ones round to nearest. Returns `None` if no consistent rounding is found.
fn repair_rounding(lp: &LinearProgram, values: &[f64]) -> Option<Vec<f64>> {
    let mut x = snap_binaries_partial(lp, values);
    let mut rows_of: Vec<Vec<usize>> = vec![Vec::new(); lp.num_vars()];
    for (i, c) in lp.constraints.iter().enumerate() {
        for &(v, _) in &c.terms {
            rows_of[v.0].push(i);
        }
    }
    let mut pending: Vec<usize> = lp
        .variables
        .iter()
        .enumerate()
        .filter(|&(j, v)| v.is_binary && x[j] != 0.0 && x[j] != 1.0)
        .map(|(j, _)| j)
        .collect();
    let mut unsettled = vec![false; lp.num_vars()];
    for &j in &pending {
        unsettled[j] = true;
    }
    let fits = |x: &mut Vec<f64>, unsettled: &[bool], j: usize, cand: f64| {
        let v = &lp.variables[j];
        if cand < v.lower || cand > v.upper {
            return false;
        }
        let keep = x[j];
        x[j] = cand;
        let ok = rows_of[j].iter().all(|&i| {
            let c = &lp.constraints[i];
            c.terms.iter().any(|&(k, _)| k.0 != j && unsettled[k.0])
                || c.violation(x) <= super::FEASIBILITY_TOL
        });
        x[j] = keep;
        ok
    };
    while !pending.is_empty() {
        let mut progress = false;
        let mut k = 0;
        while k < pending.len() {
            let j = pending[k];
            let down = fits(&mut x, &unsettled, j, 0.0);
            let up = fits(&mut x, &unsettled, j, 1.0);
            match (down, up) {
                (false, false) => return None,
                (true, false) | (false, true) => {
                    x[j] = if up { 1.0 } else { 0.0 };
                    unsettled[j] = false;
                    pending.remove(k);
                    progress = true;
                }
                (true, true) => k += 1,
            }
        }
        if !progress {
            let j = pending.remove(0);
            let near = x[j].round();
            x[j] = if fits(&mut x, &unsettled, j, near) {
                near
            } else {
                1.0 - near
            };
            unsettled[j] = false;
        }
    }
    (lp.max_violation(&x) <= super::FEASIBILITY_TOL).then_some(x)
}

fn snap_binaries_partial(lp: &LinearProgram, values: &[f64]) -> Vec<f64> {
    let mut x = values.to_vec();
    for (j, v) in lp.variables.iter().enumerate() {
        if v.is_binary && (x[j] - x[j].round()).abs() <= INTEGRALITY_TOL {
            x[j] = x[j].round();
        }
    }
    x
}
