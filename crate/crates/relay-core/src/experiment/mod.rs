//! Configuration-driven experiments: parameter sweeps over the closed forms and
//! the simulator, rendered as tables. Figure presets ship as embedded documents.

mod api;
mod spec;
mod studies;
mod table;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use api::{run, ErrorBody, RunRequest};
pub use spec::{
    Axis, Command, ExperimentSpec, Family, LinkPair, LinkStats, RangeSpec, SchemeSpec, SeriesSpec, SimSpec, Study,
    SweepSpec, SystemSpec,
};
pub use table::{Cell, OutputFormat, Record, Table};

/// Command-line style overrides applied on top of a document.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Overrides {
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub slots: Option<u64>,
}

impl Overrides {
    pub fn apply(&self, spec: &mut ExperimentSpec) {
        if let Some(s) = self.seed {
            spec.sim.seed = s;
        }
        if let Some(n) = self.slots {
            spec.sim.slots = n;
        }
    }
}

const PRESETS: [(&str, &str); 9] = [
    ("fig3", include_str!("../../presets/fig3.toml")),
    ("fig4", include_str!("../../presets/fig4.toml")),
    ("fig5", include_str!("../../presets/fig5.toml")),
    ("fig6", include_str!("../../presets/fig6.toml")),
    ("fig7", include_str!("../../presets/fig7.toml")),
    ("fig8", include_str!("../../presets/fig8.toml")),
    ("fig9", include_str!("../../presets/fig9.toml")),
    ("fig10", include_str!("../../presets/fig10.toml")),
    ("fig11", include_str!("../../presets/fig11.toml")),
];

pub fn preset_names() -> Vec<&'static str> {
    PRESETS.iter().map(|(n, _)| *n).collect()
}

pub fn preset_source(name: &str) -> Result<&'static str> {
    PRESETS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, s)| *s)
        .ok_or_else(|| Error::config(format!("unknown preset '{name}' (have {})", preset_names().join(", "))))
}

pub fn preset(name: &str) -> Result<ExperimentSpec> {
    ExperimentSpec::from_toml(preset_source(name)?)
}

fn merge(base: &mut toml::Value, over: toml::Value) {
    match (base, over) {
        (toml::Value::Table(b), toml::Value::Table(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

/// Resolves a document from an optional preset and an optional TOML text;
/// keys in the text override the preset's.
pub fn load(preset_name: Option<&str>, text: Option<&str>) -> Result<ExperimentSpec> {
    let parse = |s: &str| s.parse::<toml::Value>().map_err(|e| Error::config(e.to_string()));
    let doc = match (preset_name, text) {
        (None, None) => return Err(Error::config("need a config document or a preset")),
        (None, Some(t)) => return ExperimentSpec::from_toml(t),
        (Some(p), None) => return preset(p),
        (Some(p), Some(t)) => {
            let mut base = parse(preset_source(p)?)?;
            let over = parse(t)?;
            // A grid given as values replaces one given as a range, and vice versa.
            if let (Some(b), Some(o)) = (base.get_mut("sweep").and_then(|v| v.as_table_mut()), over.get("sweep")) {
                for (key, other) in [("values", "range"), ("range", "values")] {
                    if o.get(key).is_some() {
                        b.remove(other);
                    }
                }
            }
            merge(&mut base, over);
            base
        }
    };
    let spec: ExperimentSpec = doc.try_into().map_err(|e: toml::de::Error| Error::config(e.to_string()))?;
    spec.validate()?;
    Ok(spec)
}

struct Point {
    labels: Vec<(String, f64)>,
    spec: ExperimentSpec,
    xi: Option<f64>,
}

fn expand(spec: &ExperimentSpec, with_grid: bool) -> Result<Vec<Point>> {
    let mut points = vec![Point { labels: Vec::new(), spec: spec.clone(), xi: None }];
    let Some(sweep) = &spec.sweep else { return Ok(points) };
    let mut axes: Vec<(spec::Axis, Vec<f64>)> = sweep.series.iter().map(|s| (s.axis, s.values.clone())).collect();
    if with_grid {
        axes.push((sweep.axis, sweep.grid()?));
    }
    for (axis, values) in axes {
        let mut next = Vec::with_capacity(points.len() * values.len());
        for p in &points {
            for &v in &values {
                let mut labels = p.labels.clone();
                labels.push((axis.name().to_owned(), v));
                let xi = if axis == spec::Axis::Xi { Some(v) } else { p.xi };
                next.push(Point { labels, spec: p.spec.with_axis(axis, v)?, xi });
            }
        }
        points = next;
    }
    Ok(points)
}

/// Runs one command. Grid points execute on the current rayon pool; rows keep grid order.
pub fn execute(command: Command, spec: &ExperimentSpec, overrides: &Overrides) -> Result<Table> {
    let mut spec = spec.clone();
    overrides.apply(&mut spec);
    spec.validate()?;
    let simulate = command == Command::Simulate;
    match (&spec.study, command) {
        (Study::Overflow {}, Command::Simulate) => {}
        (Study::Overflow {}, _) => return Err(Error::config("the overflow study is simulation-only; use simulate")),
        (Study::Rate {}, _) => {}
        (_, Command::Compare) => return Err(Error::config("compare needs a rate study")),
        _ => {}
    }
    if command == Command::Sweep && spec.sweep.is_none() {
        return Err(Error::config("sweep needs a [sweep] section"));
    }
    let overflow_grid = match (&spec.study, &spec.sweep) {
        (Study::Overflow {}, Some(s)) if s.axis == spec::Axis::Buffer => Some(s.grid()?),
        (Study::Overflow {}, _) => return Err(Error::config("the overflow study sweeps axis = \"buffer\"")),
        _ => None,
    };
    if matches!(spec.study, Study::Threshold { .. }) && spec.sweep.as_ref().map(|s| s.axis) != Some(spec::Axis::Xi) {
        return Err(Error::config("the threshold study sweeps axis = \"xi\""));
    }
    let points = expand(&spec, overflow_grid.is_none())?;
    let base_seed = spec.sim.seed;
    let per_point: Vec<Result<Vec<Record>>> = points
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            let seed = base_seed.wrapping_add(i as u64);
            let pair = p.spec.system.pair()?;
            let rows = match (&p.spec.study, command) {
                (_, Command::Compare) => studies::compare_rows(&p.spec, &pair)?,
                (Study::Rate {}, _) => studies::rate_rows(&p.spec, &pair, simulate, seed)?,
                (Study::Ser { buffer_sizes }, _) => studies::ser_rows(&p.spec, &pair, buffer_sizes, simulate, seed)?,
                (Study::Threshold { families, constraint }, _) => {
                    let xi = p.xi.expect("threshold points carry ξ");
                    studies::threshold_rows(&p.spec, &pair, families, *constraint, xi, simulate, seed)?
                }
                (Study::Overflow {}, _) => {
                    studies::overflow_rows(&p.spec, &pair, overflow_grid.as_deref().unwrap_or_default(), seed)?
                }
            };
            Ok(rows
                .into_iter()
                .map(|r| {
                    let mut full: Record = p.labels.iter().map(|(k, v)| (k.clone(), Cell::Num(*v))).collect();
                    // A study column that repeats a swept axis is already present as a label.
                    full.extend(r.into_iter().filter(|(k, _)| !p.labels.iter().any(|(l, _)| l == k)));
                    full
                })
                .collect())
        })
        .collect();
    let mut records = Vec::new();
    for r in per_point {
        records.extend(r?);
    }
    Table::from_records(records)
}
