use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::plot::{render, Panel, Series};
use crate::error::Stage;
use crate::netmodel::{Network, PhiFamily, SystemState, ViolationReport};
use crate::orchestrator::{HourSummary, ScenarioResult};

#[derive(Debug, thiserror::Error)]
pub enum ResultsError {
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
}

struct Table {
    path: PathBuf,
    writer: csv::Writer<fs::File>,
}

impl Table {
    fn create(dir: &Path, name: &str, header: &[&str]) -> Result<Table, ResultsError> {
        let path = dir.join(name);
        let writer = csv::Writer::from_path(&path).map_err(|source| ResultsError::Csv {
            path: path.clone(),
            source,
        })?;
        let mut table = Table { path, writer };
        table.row(header)?;
        Ok(table)
    }

    fn row<S: AsRef<[u8]>>(&mut self, fields: &[S]) -> Result<(), ResultsError> {
        self.writer
            .write_record(fields)
            .map_err(|source| ResultsError::Csv {
                path: self.path.clone(),
                source,
            })
    }

    fn finish(mut self) -> Result<PathBuf, ResultsError> {
        self.writer.flush().map_err(|source| ResultsError::Io {
            path: self.path.clone(),
            source,
        })?;
        Ok(self.path)
    }
}

fn write_file(path: PathBuf, contents: &str) -> Result<PathBuf, ResultsError> {
    fs::write(&path, contents).map_err(|source| ResultsError::Io {
        path: path.clone(),
        source,
    })?;
    Ok(path)
}

/// Writes the five tables, `summary.json`, `timings.json` and the four plots
/// into `out_dir`, creating it if needed. Everything except `timings.json`
/// is a deterministic function of the result.
pub fn write_results(
    net: &Network,
    result: &ScenarioResult,
    out_dir: impl AsRef<Path>,
) -> Result<Vec<PathBuf>, ResultsError> {
    let dir = out_dir.as_ref();
    fs::create_dir_all(dir).map_err(|source| ResultsError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let case = &net.case;
    let hours = net.horizon();
    let mut written = Vec::new();

    let mut t = Table::create(dir, "dispatch.csv", &["gen_node", "hour", "p_pu", "q_pu"])?;
    for (g, gen) in case.generators.iter().enumerate() {
        if !gen.in_service {
            continue;
        }
        for h in 0..hours {
            t.row(&[
                gen.node.to_string(),
                h.to_string(),
                result.dispatch.p_g[g][h].to_string(),
                result.dispatch.q_g[g][h].to_string(),
            ])?;
        }
    }
    written.push(t.finish()?);

    let mut t = Table::create(dir, "attack.csv", &["gen_node", "hour", "y"])?;
    let attack = &result.attack.attack;
    for (a, &g) in attack.generators.iter().enumerate() {
        for h in 0..hours {
            t.row(&[
                case.generators[g].node.to_string(),
                h.to_string(),
                attack.y[a][h].to_string(),
            ])?;
        }
    }
    written.push(t.finish()?);

    let mut t = Table::create(
        dir,
        "storage.csv",
        &["ess_node", "hour", "p_ch_pu", "p_dis_pu", "soc"],
    )?;
    let plan = &result.mitigation;
    for (s, unit) in case.storage.iter().enumerate() {
        for h in 0..hours {
            t.row(&[
                unit.node.to_string(),
                h.to_string(),
                plan.p_ch[s][h].to_string(),
                plan.p_dis[s][h].to_string(),
                plan.soc[s][h].to_string(),
            ])?;
        }
    }
    written.push(t.finish()?);

    let states: [(Stage, &SystemState); 3] = [
        (Stage::Dispatch, &result.dispatch.state),
        (Stage::Attack, &result.attack.state),
        (Stage::Mitigation, &plan.state),
    ];
    let mut t = Table::create(
        dir,
        "state.csv",
        &[
            "stage",
            "element_kind",
            "element_id",
            "hour",
            "value_kind",
            "value",
        ],
    )?;
    for (stage, state) in states {
        let stage = stage.number().to_string();
        for (l, line) in case.lines.iter().enumerate() {
            for (kind, values) in [("pf", &state.pf[l]), ("qf", &state.qf[l])] {
                for (h, x) in values.iter().enumerate() {
                    t.row(&[
                        &stage,
                        "line",
                        &line.id.to_string(),
                        &h.to_string(),
                        kind,
                        &x.to_string(),
                    ])?;
                }
            }
        }
        for (i, node) in case.nodes.iter().enumerate() {
            for (h, x) in state.v[i].iter().enumerate() {
                t.row(&[
                    &stage,
                    "node",
                    &node.id.to_string(),
                    &h.to_string(),
                    "v",
                    &x.to_string(),
                ])?;
            }
        }
    }
    written.push(t.finish()?);

    let mut t = Table::create(
        dir,
        "violations.csv",
        &["stage", "phi_family", "element_id", "hour", "phi_pu"],
    )?;
    for stage in Stage::ALL {
        let report = result.violations(stage);
        for fam in PhiFamily::ALL {
            for (e, row) in report.family(fam).iter().enumerate() {
                let id = if fam.is_line_family() {
                    case.lines[e].id
                } else {
                    case.nodes[e].id
                };
                for (h, x) in row.iter().enumerate() {
                    t.row(&[
                        stage.number().to_string(),
                        format!("phi{}", fam.index()),
                        id.to_string(),
                        h.to_string(),
                        x.to_string(),
                    ])?;
                }
            }
        }
    }
    written.push(t.finish()?);

    let summary = serde_json::to_string_pretty(&summary(net, result)).expect("summary serializes");
    written.push(write_file(dir.join("summary.json"), &(summary + "\n"))?);
    let timings = serde_json::json!({
        "stage1_ms": result.timings.dispatch.as_secs_f64() * 1e3,
        "stage2_ms": result.timings.attack.as_secs_f64() * 1e3,
        "stage3_ms": result.timings.mitigation.as_secs_f64() * 1e3,
        "total_ms": result.timings.total().as_secs_f64() * 1e3,
    });
    written.push(write_file(
        dir.join("timings.json"),
        &format!("{timings:#}\n"),
    )?);

    for (name, svg) in plots(net, result) {
        written.push(write_file(dir.join(name), &svg)?);
    }
    Ok(written)
}

#[derive(Serialize)]
struct Summary {
    case: String,
    mode: &'static str,
    k: f64,
    binary_attack: bool,
    hard_limits: bool,
    weight_line: f64,
    weight_node: f64,
    stages: Vec<StageSummary>,
}

#[derive(Serialize)]
struct StageSummary {
    stage: u8,
    objective: f64,
    /// The two epigraph values (Stage 1 has none).
    line_term: Option<f64>,
    node_term: Option<f64>,
    worst_line_margin: f64,
    worst_node_margin: f64,
    min_voltage_magnitude_pu: f64,
    max_voltage_magnitude_pu: f64,
    hours: Vec<HourRow>,
}

#[derive(Serialize)]
struct HourRow {
    hour: usize,
    worst_line_margin: f64,
    worst_node_margin: f64,
}

fn summary(net: &Network, r: &ScenarioResult) -> Summary {
    let stage = |stage: Stage,
                 objective: f64,
                 terms: Option<(f64, f64)>,
                 report: &ViolationReport,
                 state: &SystemState,
                 hours: &[HourSummary]| {
        let mags = (0..net.num_nodes())
            .flat_map(|i| (0..state.hours()).map(move |h| (i, h)))
            .map(|(i, h)| state.voltage_magnitude(i, h));
        let (lo, hi) = mags.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), m| {
            (lo.min(m), hi.max(m))
        });
        StageSummary {
            stage: stage.number(),
            objective,
            line_term: terms.map(|t| t.0),
            node_term: terms.map(|t| t.1),
            worst_line_margin: report.worst_line_margin,
            worst_node_margin: report.worst_node_margin,
            min_voltage_magnitude_pu: lo,
            max_voltage_magnitude_pu: hi,
            hours: hours
                .iter()
                .map(|s| HourRow {
                    hour: s.hour,
                    worst_line_margin: s.worst_line_margin,
                    worst_node_margin: s.worst_node_margin,
                })
                .collect(),
        }
    };
    Summary {
        case: net.case.name.clone(),
        mode: r.config.mode.label(),
        k: r.config.k,
        binary_attack: r.config.binary_attack,
        hard_limits: r.config.hard_limits,
        weight_line: r.config.weights.line,
        weight_node: r.config.weights.node,
        stages: vec![
            stage(
                Stage::Dispatch,
                r.dispatch.total_cost,
                None,
                &r.dispatch_violations,
                &r.dispatch.state,
                &r.summaries[0],
            ),
            stage(
                Stage::Attack,
                r.attack.objective_value,
                Some((r.attack.inf_line_term, r.attack.inf_node_term)),
                &r.attack.violations,
                &r.attack.state,
                &r.summaries[1],
            ),
            stage(
                Stage::Mitigation,
                r.mitigation.objective_value,
                Some((r.mitigation.sup_line_term, r.mitigation.sup_node_term)),
                &r.mitigation.violations,
                &r.mitigation.state,
                &r.summaries[2],
            ),
        ],
    }
}

/// Nodes and lines traced in the voltage and flow figures.
const VOLTAGE_NODES: [u32; 3] = [6, 10, 24];
const FLOW_LINES: [u32; 2] = [2, 4];

fn pick<T: Copy>(
    preferred: &[u32],
    ids: &[u32],
    fallback: usize,
    map: impl Fn(usize) -> T,
) -> Vec<(u32, T)> {
    let found: Vec<(u32, T)> = preferred
        .iter()
        .filter_map(|id| ids.iter().position(|x| x == id).map(|i| (*id, map(i))))
        .collect();
    if !found.is_empty() {
        return found;
    }
    ids.iter()
        .take(fallback)
        .enumerate()
        .map(|(i, &id)| (id, map(i)))
        .collect()
}

fn plots(net: &Network, r: &ScenarioResult) -> Vec<(&'static str, String)> {
    let case = &net.case;
    let stage_titles = [
        "Stage 1: base dispatch",
        "Stage 2: under attack",
        "Stage 3: after mitigation",
    ];
    let states = [&r.dispatch.state, &r.attack.state, &r.mitigation.state];

    let attack = Panel {
        title: format!("attack fractions, k = {}", r.config.k),
        y_label: "y".into(),
        series: r
            .attack
            .attack
            .generators
            .iter()
            .zip(&r.attack.attack.y)
            .map(|(&g, y)| Series {
                label: format!("DG {}", case.generators[g].node),
                values: y.clone(),
            })
            .collect(),
        bounds: vec![],
        steps: true,
    };

    let storage = |title: &str, label: &str, f: &dyn Fn(usize) -> Vec<f64>| Panel {
        title: title.into(),
        y_label: label.into(),
        series: case
            .storage
            .iter()
            .enumerate()
            .map(|(s, u)| Series {
                label: format!("ESS {}", u.node),
                values: f(s),
            })
            .collect(),
        bounds: vec![],
        steps: true,
    };
    let plan = &r.mitigation;
    let storage_panels = [
        storage(
            "storage net output (discharge positive)",
            "p_ess (pu)",
            &|s| plan.p_ess[s].clone(),
        ),
        storage("state of charge (end of hour)", "soc", &|s| {
            plan.soc[s].clone()
        }),
    ];

    let node_ids: Vec<u32> = case.nodes.iter().map(|n| n.id).collect();
    let nodes = pick(&VOLTAGE_NODES, &node_ids, 3, |i| i);
    let (v_lo, v_hi) = nodes.first().map_or((0.9, 1.1), |&(_, i)| {
        (case.nodes[i].v_min, case.nodes[i].v_max)
    });
    let voltage_panels: Vec<Panel> = states
        .iter()
        .zip(stage_titles)
        .map(|(state, title)| Panel {
            title: title.into(),
            y_label: "voltage (pu)".into(),
            series: nodes
                .iter()
                .map(|&(id, i)| Series {
                    label: format!("node {id}"),
                    values: (0..state.hours())
                        .map(|h| state.voltage_magnitude(i, h))
                        .collect(),
                })
                .collect(),
            bounds: vec![
                (v_lo, format!("min {v_lo} pu")),
                (v_hi, format!("max {v_hi} pu")),
            ],
            steps: false,
        })
        .collect();

    let line_ids: Vec<u32> = case.lines.iter().map(|l| l.id).collect();
    let lines = pick(&FLOW_LINES, &line_ids, 2, |l| l);
    let (f_lo, f_hi) = lines.first().map_or((-1.5, 1.5), |&(_, l)| {
        (case.lines[l].pf_min, case.lines[l].pf_max)
    });
    let flow_panels: Vec<Panel> = states
        .iter()
        .zip(stage_titles)
        .map(|(state, title)| Panel {
            title: title.into(),
            y_label: "active flow (pu)".into(),
            series: lines
                .iter()
                .map(|&(id, l)| Series {
                    label: format!("line {id}"),
                    values: state.pf[l].clone(),
                })
                .collect(),
            bounds: vec![
                (f_lo, format!("min {f_lo} pu")),
                (f_hi, format!("max {f_hi} pu")),
            ],
            steps: false,
        })
        .collect();

    vec![
        ("attack.svg", render("Attack status", &[attack])),
        (
            "storage.svg",
            render("Storage output and state of charge", &storage_panels),
        ),
        (
            "voltage.svg",
            render("Node voltage magnitudes", &voltage_panels),
        ),
        ("flow.svg", render("Line active flows", &flow_panels)),
    ]
}
