use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optim::{improvement_ratio, mean, percentile, std_dev};

/// Percentiles reported per cohort and improvement ratio.
pub const REPORT_PERCENTILES: [f64; 3] = [1.0, 5.0, 50.0];

pub const BASELINE: &str = "baseline";
pub const REGULARIZED: &str = "regularized";

/// One line of `runs.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRow {
    pub instance: usize,
    pub group: String,
    pub cohort: String,
    pub run_id: usize,
    pub seed: u64,
    pub schedule: String,
    pub final_loss_mu0: f64,
    pub best_loss_mu0: f64,
    pub iterations: usize,
}

pub fn write_runs_csv<W: Write>(rows: &[RunRow], out: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    for r in rows {
        wtr.serialize(r)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_runs_csv(path: &Path) -> Result<Vec<RunRow>> {
    let mut rdr = csv::Reader::from_path(path)?;
    rdr.deserialize().map(|r| r.map_err(Error::from)).collect()
}

/// Final-loss statistics of one cohort.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohortStats {
    pub runs: usize,
    /// Values at [`REPORT_PERCENTILES`].
    pub percentiles: [f64; 3],
    pub best: f64,
    pub mean: f64,
}

impl CohortStats {
    pub fn new(finals: &[f64]) -> Result<Self> {
        let mut percentiles = [0.0; 3];
        for (slot, p) in percentiles.iter_mut().zip(REPORT_PERCENTILES) {
            *slot = percentile(finals, p)?;
        }
        Ok(Self {
            runs: finals.len(),
            percentiles,
            best: finals.iter().copied().fold(f64::INFINITY, f64::min),
            mean: mean(finals)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceSummary {
    pub instance: usize,
    pub group: String,
    pub baseline: CohortStats,
    pub regularized: Option<CohortStats>,
    /// Improvement ratios at [`REPORT_PERCENTILES`]; absent without a
    /// regularized cohort.
    pub ratios: Option<[f64; 3]>,
}

/// Mean and sample standard deviation of the per-instance ratios of a group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub group: String,
    pub instances: usize,
    pub mean_ratios: [f64; 3],
    pub std_ratios: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub instances: Vec<InstanceSummary>,
    pub groups: Vec<GroupSummary>,
}

impl SummaryStats {
    /// Groups by `(group, instance)`; every instance needs a baseline cohort
    /// and, when `require_regularized`, a regularized one.
    pub fn from_rows(rows: &[RunRow], require_regularized: bool) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Empty("runs table"));
        }
        let mut cohorts: BTreeMap<(usize, &str), [Vec<f64>; 2]> = BTreeMap::new();
        let mut order: Vec<(usize, &str)> = Vec::new();
        for r in rows {
            let key = (r.instance, r.group.as_str());
            let slot = match r.cohort.as_str() {
                BASELINE => 0,
                REGULARIZED => 1,
                other => {
                    return Err(Error::InvalidArgument(format!("unknown cohort {other:?}")));
                }
            };
            let entry = cohorts.entry(key).or_insert_with(|| {
                order.push(key);
                Default::default()
            });
            entry[slot].push(r.final_loss_mu0);
        }

        let mut instances = Vec::with_capacity(order.len());
        for key in order {
            let [base, reg] = &cohorts[&key];
            if base.is_empty() {
                return Err(Error::InvalidArgument(format!(
                    "instance {} ({}) has no baseline cohort",
                    key.0, key.1
                )));
            }
            if reg.is_empty() && require_regularized {
                return Err(Error::InvalidArgument(format!(
                    "instance {} ({}) has no regularized cohort",
                    key.0, key.1
                )));
            }
            let (regularized, ratios) = if reg.is_empty() {
                (None, None)
            } else {
                let mut ratios = [0.0; 3];
                for (slot, p) in ratios.iter_mut().zip(REPORT_PERCENTILES) {
                    *slot = improvement_ratio(base, reg, p)?;
                }
                (Some(CohortStats::new(reg)?), Some(ratios))
            };
            instances.push(InstanceSummary {
                instance: key.0,
                group: key.1.to_string(),
                baseline: CohortStats::new(base)?,
                regularized,
                ratios,
            });
        }

        let mut groups: Vec<GroupSummary> = Vec::new();
        let mut names: Vec<&str> = Vec::new();
        for inst in &instances {
            if !names.contains(&inst.group.as_str()) {
                names.push(&inst.group);
            }
        }
        for name in names {
            let ratios: Vec<[f64; 3]> = instances
                .iter()
                .filter(|i| i.group == name)
                .filter_map(|i| i.ratios)
                .collect();
            if ratios.is_empty() {
                continue;
            }
            let mut mean_ratios = [0.0; 3];
            let mut std_ratios = [0.0; 3];
            for k in 0..3 {
                let col: Vec<f64> = ratios.iter().map(|r| r[k]).collect();
                mean_ratios[k] = mean(&col)?;
                std_ratios[k] = if col.len() > 1 { std_dev(&col)? } else { 0.0 };
            }
            groups.push(GroupSummary {
                group: name.to_string(),
                instances: ratios.len(),
                mean_ratios,
                std_ratios,
            });
        }
        Ok(Self { instances, groups })
    }

    /// Per-instance rows (`scope = instance`) followed by per-group `mean`
    /// and `std` rows over the instance ratios.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        let mut header: Vec<String> = vec!["scope".into(), "group".into(), "instance".into()];
        for cohort in ["base", "reg"] {
            header.push(format!("{cohort}_runs"));
            for p in REPORT_PERCENTILES {
                header.push(format!("{cohort}_p{p}"));
            }
            header.push(format!("{cohort}_best"));
            header.push(format!("{cohort}_mean"));
        }
        for p in REPORT_PERCENTILES {
            header.push(format!("ratio_p{p}"));
        }
        wtr.write_record(&header)?;

        let cohort_cells = |c: Option<&CohortStats>| -> Vec<String> {
            match c {
                Some(c) => {
                    let mut v = vec![c.runs.to_string()];
                    v.extend(c.percentiles.iter().map(f64::to_string));
                    v.push(c.best.to_string());
                    v.push(c.mean.to_string());
                    v
                }
                None => vec![String::new(); 6],
            }
        };
        let ratio_cells = |r: Option<[f64; 3]>| -> Vec<String> {
            match r {
                Some(r) => r.iter().map(f64::to_string).collect(),
                None => vec![String::new(); 3],
            }
        };

        for inst in &self.instances {
            let mut row = vec![
                "instance".to_string(),
                inst.group.clone(),
                inst.instance.to_string(),
            ];
            row.extend(cohort_cells(Some(&inst.baseline)));
            row.extend(cohort_cells(inst.regularized.as_ref()));
            row.extend(ratio_cells(inst.ratios));
            wtr.write_record(&row)?;
        }
        for g in &self.groups {
            for (scope, values) in [("mean", g.mean_ratios), ("std", g.std_ratios)] {
                let mut row = vec![scope.to_string(), g.group.clone(), String::new()];
                row.extend(cohort_cells(None));
                row.extend(cohort_cells(None));
                row.extend(ratio_cells(Some(values)));
                wtr.write_record(&row)?;
            }
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn report(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "instances: {}", self.instances.len());
        for inst in &self.instances {
            let b = &inst.baseline;
            let _ = write!(
                s,
                "[{}] instance {}: baseline p1={:.6} p5={:.6} p50={:.6} best={:.6}",
                inst.group,
                inst.instance,
                b.percentiles[0],
                b.percentiles[1],
                b.percentiles[2],
                b.best
            );
            if let (Some(r), Some(q)) = (&inst.regularized, inst.ratios) {
                let _ = write!(
                    s,
                    "; regularized p1={:.6} p5={:.6} p50={:.6} best={:.6}; ratios {:.3} {:.3} {:.3}",
                    r.percentiles[0], r.percentiles[1], r.percentiles[2], r.best, q[0], q[1], q[2]
                );
            }
            s.push('\n');
        }
        for g in &self.groups {
            let _ = writeln!(
                s,
                "[{}] mean improvement ratio over {} instances: p1 {:.3} ± {:.3}, p5 {:.3} ± {:.3}, p50 {:.3} ± {:.3}",
                g.group,
                g.instances,
                g.mean_ratios[0],
                g.std_ratios[0],
                g.mean_ratios[1],
                g.std_ratios[1],
                g.mean_ratios[2],
                g.std_ratios[2]
            );
        }
        s
    }
}

fn summarize_rows(dir: &Path, require_regularized: bool) -> Result<SummaryStats> {
    let rows = read_runs_csv(&dir.join("runs.csv"))?;
    let stats = SummaryStats::from_rows(&rows, require_regularized)?;
    stats.write_csv(std::fs::File::create(dir.join("summary.csv"))?)?;
    std::fs::write(dir.join("report.txt"), stats.report())?;
    Ok(stats)
}

/// Reads `<dir>/runs.csv` and writes `summary.csv` and `report.txt` next to
/// it. Errors unless every instance has both cohorts.
pub fn summarize(dir: &Path) -> Result<SummaryStats> {
    summarize_rows(dir, true)
}

pub(crate) fn summarize_baseline(dir: &Path) -> Result<SummaryStats> {
    summarize_rows(dir, false)
}
