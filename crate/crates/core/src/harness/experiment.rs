use std::fs::{self, File};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::audit::{audit_circuit, write_audit_csv, AuditOptions, CircuitAudit};
use super::config::{ExperimentConfig, GridConfig, ModelConfig};
use super::grid::landscape_grid;
use super::qaoa::build_qaoa_toy;
use super::summary::{
    summarize, summarize_baseline, write_runs_csv, RunRow, SummaryStats, BASELINE, REGULARIZED,
};
use crate::error::{Error, Result};
use crate::optim::{
    initial_point, multistart, percentile, CircuitLoss, ParametricLoss, RunOptions, RunRecord,
    Schedule,
};
use crate::paulisim::random::{random_circuit, random_hamiltonian};
use crate::paulisim::{Circuit, CircuitFile, Hamiltonian, Pauli, PauliString};
use crate::qcnn::{
    build_qcnn, capped_sizes, gen_dataset, train_student_from, QcnnLoss, StudentResult,
};
use crate::seed::{derive_seed, rng_from_seed, uniform_angles};
use crate::whrf::{
    degrees_for_gamma, instance_seed, save_instance, write_sweep_runs, LossHistogram, SweepRun,
    WhrfLoss, WishartField, HISTOGRAM_BINS,
};

/// Output directory used when neither the config nor the caller names one.
pub const DEFAULT_OUT: &str = "results";

/// Everything written to `manifest.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: String,
    pub kind: String,
    pub config: ExperimentConfig,
    /// Schedules actually run, by cohort name.
    pub cohorts: Vec<(String, Schedule)>,
}

/// Mean low-bin fraction of one WHRF cohort at one γ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaFraction {
    pub gamma: f64,
    pub d: usize,
    pub cohort: String,
    pub instances: usize,
    pub mean_low_bin_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QcnnRow {
    pub teacher: usize,
    pub n: usize,
    pub student_seed: u64,
    pub regularized_flag: u8,
    pub final_mse: f64,
    pub train_acc: f64,
    pub test_acc: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutcome {
    pub dir: PathBuf,
    pub runs: Vec<RunRow>,
    pub summary: Option<SummaryStats>,
    pub gamma_fractions: Vec<GammaFraction>,
    pub qcnn: Vec<QcnnRow>,
    pub audits: Vec<CircuitAudit>,
}

fn cohorts(cfg: &ExperimentConfig) -> Vec<(&'static str, Schedule)> {
    let mut out = vec![(BASELINE, Schedule::baseline(cfg.schedule.i_max))];
    if !cfg.baseline_only {
        out.push((REGULARIZED, cfg.schedule));
    }
    out
}

/// `L = Σ_k ⟨Z_k⟩` after `R_X(φ_k)` on qubit `k`; noiseless minimum `−m`.
pub fn cosine_model(m: usize) -> Result<(Circuit, Hamiltonian)> {
    let mut bld = Circuit::builder(m);
    let mut terms = Vec::with_capacity(m);
    for k in 0..m {
        bld = bld.rotation(PauliString::single(m, k, Pauli::X)?, k);
        terms.push((1.0, PauliString::single(m, k, Pauli::Z)?));
    }
    Ok((bld.build()?, Hamiltonian::new(m, terms)?))
}

struct Ctx<'a> {
    cfg: &'a ExperimentConfig,
    dir: &'a Path,
    cohorts: Vec<(&'static str, Schedule)>,
    options: RunOptions,
}

impl Ctx<'_> {
    fn persist(&self, cohort: &str, instance: usize, group: &str, rec: &RunRecord) -> Result<()> {
        if !self.cfg.persist_runs {
            return Ok(());
        }
        let name = format!(
            "{}_{cohort}_i{instance:03}_r{:04}.json",
            slug(group),
            rec.run_id
        );
        fs::write(
            self.dir.join("runs").join(name),
            serde_json::to_string(rec)?,
        )?;
        Ok(())
    }

    fn row(&self, cohort: &str, instance: usize, group: &str, rec: &RunRecord) -> RunRow {
        RunRow {
            instance,
            group: group.to_string(),
            cohort: cohort.to_string(),
            run_id: rec.run_id,
            seed: rec.seed,
            schedule: rec.schedule.to_string(),
            final_loss_mu0: rec.final_loss_mu0,
            best_loss_mu0: rec.best_loss_mu0,
            iterations: rec.iterations(),
        }
    }

    /// Paired multistart: every cohort uses the same restart master, so run
    /// `k` starts from the same point in each.
    fn run_cohorts<F: ParametricLoss + ?Sized>(
        &self,
        loss: &F,
        instance: usize,
        group: &str,
        restart_master: u64,
        rows: &mut Vec<RunRow>,
    ) -> Result<Vec<(&'static str, Vec<RunRecord>)>> {
        let mut out = Vec::with_capacity(self.cohorts.len());
        for (cohort, schedule) in &self.cohorts {
            let records = multistart(
                loss,
                self.cfg.n_starts,
                schedule,
                &self.cfg.adam,
                restart_master,
                self.options,
            )?;
            records
                .par_iter()
                .try_for_each(|rec| self.persist(cohort, instance, group, rec))?;
            rows.extend(
                records
                    .iter()
                    .map(|rec| self.row(cohort, instance, group, rec)),
            );
            out.push((*cohort, records));
        }
        Ok(out)
    }

    fn grids<F: ParametricLoss + ?Sized>(&self, loss: &F, base: &[f64], group: &str) -> Result<()> {
        let Some(GridConfig { axes, mus }) = &self.cfg.grid else {
            return Ok(());
        };
        for (k, &mu) in mus.iter().enumerate() {
            let grid = landscape_grid(loss, base, axes, mu)?;
            grid.save_csv(
                &self
                    .dir
                    .join("grids")
                    .join(format!("{}_mu{k}.csv", slug(group))),
            )?;
        }
        Ok(())
    }
}

fn slug(s: &str) -> String {
    s.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '.' || c == '-' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

/// Runs the configured experiment into `dir` (created if needed).
///
/// Layout: `manifest.json`, `runs/*.json`, `runs.csv`, `summary.csv`,
/// `report.txt`, `grids/*.csv`, plus model-specific tables.
pub fn run_experiment(cfg: &ExperimentConfig, dir: &Path) -> Result<ExperimentOutcome> {
    cfg.validate()?;
    for sub in ["runs", "grids"] {
        fs::create_dir_all(dir.join(sub))?;
    }
    let ctx = Ctx {
        cfg,
        dir,
        cohorts: cohorts(cfg),
        options: RunOptions {
            record_trajectory: cfg.record_trajectories,
        },
    };
    let manifest = Manifest {
        version: env!("CARGO_PKG_VERSION").to_string(),
        kind: cfg.model.kind().to_string(),
        config: cfg.clone(),
        cohorts: ctx
            .cohorts
            .iter()
            .map(|(c, s)| (c.to_string(), *s))
            .collect(),
    };
    fs::write(
        dir.join("manifest.json"),
        serde_json::to_string_pretty(&manifest)?,
    )?;

    let mut outcome = ExperimentOutcome {
        dir: dir.to_path_buf(),
        runs: Vec::new(),
        summary: None,
        gamma_fractions: Vec::new(),
        qcnn: Vec::new(),
        audits: Vec::new(),
    };
    let master = cfg.master_seed;
    match &cfg.model {
        ModelConfig::QaoaToy {
            n,
            hamiltonian_seed,
        } => {
            let seed = hamiltonian_seed.unwrap_or_else(|| derive_seed(master, "hamiltonian", 0));
            let (c, h) = build_qaoa_toy(*n, seed)?;
            CircuitFile {
                circuit: c.clone(),
                observable: h.clone(),
            }
            .save(&dir.join("circuit.json"))?;
            circuit_experiment(&ctx, c, h, "qaoa-toy", &mut outcome.runs)?;
        }
        ModelConfig::Cosine { m } => {
            let (c, h) = cosine_model(*m)?;
            circuit_experiment(&ctx, c, h, "cosine", &mut outcome.runs)?;
        }
        ModelConfig::Whrf {
            m,
            gammas,
            instances,
            bin_floor,
        } => {
            outcome.gamma_fractions =
                whrf_experiment(&ctx, *m, gammas, *instances, *bin_floor, &mut outcome.runs)?;
        }
        ModelConfig::Qcnn {
            n,
            teachers,
            train,
            test,
            margin,
        } => {
            outcome.qcnn = qcnn_experiment(
                &ctx,
                *n,
                *teachers,
                *train,
                *test,
                *margin,
                &mut outcome.runs,
            )?;
        }
        ModelConfig::FourierAudit {
            n,
            m,
            circuits,
            terms,
            mus,
            points,
        } => {
            outcome.audits = audit_experiment(&ctx, *n, *m, *circuits, *terms, mus, *points)?;
            return Ok(outcome);
        }
    }

    write_runs_csv(&outcome.runs, File::create(dir.join("runs.csv"))?)?;
    outcome.summary = Some(if cfg.baseline_only {
        summarize_baseline(dir)?
    } else {
        summarize(dir)?
    });
    Ok(outcome)
}

/// Writes only the landscape grids of the first instance of the configured
/// model (default axes and μ values when the config has no `[grid]`).
pub fn run_grids(cfg: &ExperimentConfig, dir: &Path) -> Result<Vec<PathBuf>> {
    cfg.validate()?;
    let mut cfg = cfg.clone();
    cfg.grid.get_or_insert_with(GridConfig::default);
    fs::create_dir_all(dir.join("grids"))?;
    let ctx = Ctx {
        cfg: &cfg,
        dir,
        cohorts: Vec::new(),
        options: RunOptions::default(),
    };
    let master = cfg.master_seed;
    let restart_master = derive_seed(master, "restarts", 0);
    let group = match &cfg.model {
        ModelConfig::QaoaToy {
            n,
            hamiltonian_seed,
        } => {
            let seed = hamiltonian_seed.unwrap_or_else(|| derive_seed(master, "hamiltonian", 0));
            let (c, h) = build_qaoa_toy(*n, seed)?;
            let loss = CircuitLoss::new(c, h)?;
            ctx.grids(
                &loss,
                &initial_point(restart_master, 0, loss.num_params()).1,
                "qaoa-toy",
            )?;
            "qaoa-toy".to_string()
        }
        ModelConfig::Cosine { m } => {
            let (c, h) = cosine_model(*m)?;
            let loss = CircuitLoss::new(c, h)?;
            ctx.grids(
                &loss,
                &initial_point(restart_master, 0, loss.num_params()).1,
                "cosine",
            )?;
            "cosine".to_string()
        }
        ModelConfig::Whrf { m, gammas, .. } => {
            let group = format!("gamma={}", gammas[0]);
            let seed = instance_seed(master, 0, 0);
            let field = WishartField::sample(*m, degrees_for_gamma(*m, gammas[0])?, seed)?;
            let base = initial_point(derive_seed(seed, "restarts", 0), 0, *m).1;
            ctx.grids(&WhrfLoss::new(&field), &base, &group)?;
            group
        }
        ModelConfig::Qcnn {
            n,
            train,
            test,
            margin,
            ..
        } => {
            let spec = build_qcnn(*n)?;
            let (train, test) = capped_sizes(*n, *train, *test);
            let ts = derive_seed(master, "teacher", 0);
            let phi_star = uniform_angles(
                &mut rng_from_seed(derive_seed(ts, "teacher", 0)),
                spec.num_params(),
            );
            let (train_set, _) = gen_dataset(
                &spec,
                &phi_star,
                train,
                test,
                derive_seed(ts, "data", 0),
                *margin,
            )?;
            let loss = QcnnLoss::new(&spec, &train_set)?;
            let base = uniform_angles(
                &mut rng_from_seed(derive_seed(ts, "student", 0)),
                spec.num_params(),
            );
            let group = format!("qcnn-n{n}");
            ctx.grids(&loss, &base, &group)?;
            group
        }
        ModelConfig::FourierAudit { .. } => {
            return Err(Error::Config(
                "fourier-audit configs have no landscape to grid".into(),
            ));
        }
    };
    let mus = cfg.grid.as_ref().map_or(0, |g| g.mus.len());
    Ok((0..mus)
        .map(|k| {
            dir.join("grids")
                .join(format!("{}_mu{k}.csv", slug(&group)))
        })
        .collect())
}

fn circuit_experiment(
    ctx: &Ctx<'_>,
    c: Circuit,
    h: Hamiltonian,
    group: &str,
    rows: &mut Vec<RunRow>,
) -> Result<()> {
    let loss = CircuitLoss::new(c, h)?;
    let restart_master = derive_seed(ctx.cfg.master_seed, "restarts", 0);
    ctx.grids(
        &loss,
        &initial_point(restart_master, 0, loss.num_params()).1,
        group,
    )?;
    ctx.run_cohorts(&loss, 0, group, restart_master, rows)?;
    Ok(())
}

fn whrf_experiment(
    ctx: &Ctx<'_>,
    m: usize,
    gammas: &[f64],
    instances: usize,
    bin_floor: f64,
    rows: &mut Vec<RunRow>,
) -> Result<Vec<GammaFraction>> {
    fs::create_dir_all(ctx.dir.join("instances"))?;
    let mut hist = csv::Writer::from_path(ctx.dir.join("histograms.csv"))?;
    let mut header: Vec<String> = [
        "group",
        "gamma",
        "d",
        "instance",
        "instance_seed",
        "cohort",
        "bin_lo",
        "bin_width",
        "low_bin_fraction",
    ]
    .map(String::from)
    .to_vec();
    header.extend((0..HISTOGRAM_BINS).map(|b| format!("bin{b}")));
    hist.write_record(&header)?;

    let mut sweep_runs = Vec::new();
    let mut fractions = Vec::new();
    for (g, &gamma) in gammas.iter().enumerate() {
        let d = degrees_for_gamma(m, gamma)?;
        let group = format!("gamma={gamma}");
        let mut sums = vec![0.0; ctx.cohorts.len()];
        for i in 0..instances {
            let seed = instance_seed(ctx.cfg.master_seed, g, i);
            let field = WishartField::sample(m, d, seed)?;
            save_instance(
                &field,
                &ctx.dir
                    .join("instances")
                    .join(format!("g{g:02}_i{i:03}.csv")),
            )?;
            let loss = WhrfLoss::new(&field);
            let restart_master = derive_seed(seed, "restarts", 0);
            if i == 0 {
                ctx.grids(&loss, &initial_point(restart_master, 0, m).1, &group)?;
            }
            let results = ctx.run_cohorts(&loss, i, &group, restart_master, rows)?;
            for (slot, (cohort, records)) in results.iter().enumerate() {
                let finals: Vec<f64> = records.iter().map(|r| r.final_loss_mu0).collect();
                let h = LossHistogram::new(&finals, bin_floor * field.mean_loss())?;
                let frac = h.low_bin_fraction();
                sums[slot] += frac;
                let mut row = vec![
                    group.clone(),
                    gamma.to_string(),
                    d.to_string(),
                    i.to_string(),
                    seed.to_string(),
                    cohort.to_string(),
                    h.lo.to_string(),
                    h.width.to_string(),
                    frac.to_string(),
                ];
                row.extend(h.counts.iter().map(|c| c.to_string()));
                hist.write_record(&row)?;
                sweep_runs.extend(records.iter().map(|r| SweepRun {
                    gamma,
                    instance_seed: seed,
                    run_seed: r.seed,
                    final_loss: r.final_loss_mu0,
                    regularized: *cohort == REGULARIZED,
                }));
            }
        }
        for ((cohort, _), sum) in ctx.cohorts.iter().zip(sums) {
            fractions.push(GammaFraction {
                gamma,
                d,
                cohort: cohort.to_string(),
                instances,
                mean_low_bin_fraction: sum / instances as f64,
            });
        }
    }
    hist.flush()?;
    write_sweep_runs(&sweep_runs, File::create(ctx.dir.join("sweep.csv"))?)?;
    let mut wtr = csv::Writer::from_path(ctx.dir.join("whrf_gamma.csv"))?;
    for f in &fractions {
        wtr.serialize(f)?;
    }
    wtr.flush()?;
    Ok(fractions)
}

fn qcnn_experiment(
    ctx: &Ctx<'_>,
    n: usize,
    teachers: usize,
    train: usize,
    test: usize,
    margin: f64,
    rows: &mut Vec<RunRow>,
) -> Result<Vec<QcnnRow>> {
    let spec = build_qcnn(n)?;
    let (train, test) = capped_sizes(n, train, test);
    let group = format!("qcnn-n{n}");
    let mut table = Vec::new();
    for t in 0..teachers {
        let ts = derive_seed(ctx.cfg.master_seed, "teacher", t as u64);
        let phi_star = uniform_angles(
            &mut rng_from_seed(derive_seed(ts, "teacher", 0)),
            spec.num_params(),
        );
        let (train_set, test_set) = gen_dataset(
            &spec,
            &phi_star,
            train,
            test,
            derive_seed(ts, "data", 0),
            margin,
        )?;
        if t == 0 {
            let loss = QcnnLoss::new(&spec, &train_set)?;
            let base = uniform_angles(
                &mut rng_from_seed(derive_seed(ts, "student", 0)),
                spec.num_params(),
            );
            ctx.grids(&loss, &base, &group)?;
        }
        let students: Vec<Vec<(&'static str, StudentResult)>> = (0..ctx.cfg.n_starts)
            .into_par_iter()
            .map(|s| {
                let seed = derive_seed(ts, "student", s as u64);
                let phi0 = uniform_angles(&mut rng_from_seed(seed), spec.num_params());
                ctx.cohorts
                    .iter()
                    .map(|(cohort, schedule)| {
                        let mut res = train_student_from(
                            &spec,
                            &train_set,
                            &test_set,
                            &phi0,
                            schedule,
                            &ctx.cfg.adam,
                            seed,
                        )?;
                        res.record.run_id = s;
                        Ok((*cohort, res))
                    })
                    .collect()
            })
            .collect::<Result<_>>()?;
        for (cohort, _) in &ctx.cohorts {
            for res in students
                .iter()
                .flatten()
                .filter(|(c, _)| c == cohort)
                .map(|(_, r)| r)
            {
                ctx.persist(cohort, t, &group, &res.record)?;
                rows.push(ctx.row(cohort, t, &group, &res.record));
                table.push(QcnnRow {
                    teacher: t,
                    n,
                    student_seed: res.seed,
                    regularized_flag: u8::from(*cohort == REGULARIZED),
                    final_mse: res.final_mse,
                    train_acc: res.train_acc,
                    test_acc: res.test_acc,
                });
            }
        }
    }
    let mut wtr = csv::Writer::from_path(ctx.dir.join("qcnn_results.csv"))?;
    for r in &table {
        wtr.serialize(r)?;
    }
    wtr.flush()?;

    let mut acc = csv::Writer::from_path(ctx.dir.join("qcnn_accuracy.csv"))?;
    acc.write_record([
        "cohort",
        "students",
        "median_test_acc",
        "iqr_test_acc",
        "median_train_acc",
    ])?;
    for (flag, (cohort, _)) in ctx.cohorts.iter().enumerate() {
        let pick = |f: fn(&QcnnRow) -> f64| -> Vec<f64> {
            table
                .iter()
                .filter(|r| usize::from(r.regularized_flag) == flag)
                .map(f)
                .collect()
        };
        let test_acc = pick(|r| r.test_acc);
        let train_acc = pick(|r| r.train_acc);
        acc.write_record([
            cohort.to_string(),
            test_acc.len().to_string(),
            percentile(&test_acc, 50.0)?.to_string(),
            (percentile(&test_acc, 75.0)? - percentile(&test_acc, 25.0)?).to_string(),
            percentile(&train_acc, 50.0)?.to_string(),
        ])?;
    }
    acc.flush()?;
    Ok(table)
}

fn audit_experiment(
    ctx: &Ctx<'_>,
    n: usize,
    m: usize,
    circuits: usize,
    terms: usize,
    mus: &[f64],
    points: usize,
) -> Result<Vec<CircuitAudit>> {
    fs::create_dir_all(ctx.dir.join("modes"))?;
    fs::create_dir_all(ctx.dir.join("circuits"))?;
    let audits = (0..circuits)
        .into_par_iter()
        .map(|k| {
            let seed = derive_seed(ctx.cfg.master_seed, "audit", k as u64);
            let mut rng = rng_from_seed(seed);
            let circuit = random_circuit(n, m, &mut rng)?;
            let observable = random_hamiltonian(n, terms, &mut rng)?;
            let opts = AuditOptions {
                mus: mus.to_vec(),
                points,
                seed: derive_seed(seed, "points", 0),
            };
            let (table, audit) = audit_circuit(&circuit, &observable, &opts)?;
            table.save_csv(&ctx.dir.join("modes").join(format!("circuit_{k:03}.csv")))?;
            CircuitFile {
                circuit,
                observable,
            }
            .save(
                &ctx.dir
                    .join("circuits")
                    .join(format!("circuit_{k:03}.json")),
            )?;
            Ok(audit)
        })
        .collect::<Result<Vec<_>>>()?;
    write_audit_csv(&audits, File::create(ctx.dir.join("audit.csv"))?)?;
    write_audit_summary(&audits, ctx.dir)?;
    Ok(audits)
}

/// `summary.csv` and `report.txt` for an audit: worst deviation per check.
pub fn write_audit_summary(audits: &[CircuitAudit], dir: &Path) -> Result<()> {
    if audits.is_empty() {
        return Err(Error::Empty("audit results"));
    }
    let supp = audits
        .iter()
        .map(CircuitAudit::max_suppression)
        .fold(0.0, f64::max);
    let heat = audits.iter().map(|a| a.heat_residual).fold(0.0, f64::max);
    let modes = audits.iter().map(|a| a.modes).sum::<usize>();
    let mut wtr = csv::Writer::from_path(dir.join("summary.csv"))?;
    wtr.write_record(["check", "circuits", "max_abs_dev"])?;
    wtr.write_record([
        "suppression".to_string(),
        audits.len().to_string(),
        supp.to_string(),
    ])?;
    wtr.write_record([
        "heat".to_string(),
        audits.len().to_string(),
        heat.to_string(),
    ])?;
    wtr.flush()?;
    fs::write(
        dir.join("report.txt"),
        format!(
            "circuits: {}\nnonzero modes: {modes}\nmax |noisy - damped reconstruction|: {supp:e}\nmax heat residual: {heat:e}\n",
            audits.len()
        ),
    )?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(model: &str, extra: &str) -> ExperimentConfig {
        ExperimentConfig::from_toml(&format!(
            "n_starts = 3\nmaster_seed = 11\n{extra}\n[model]\n{model}\n[schedule]\ni_max = 30\n"
        ))
        .unwrap()
    }

    #[test]
    fn cosine_cohorts_converge_to_minus_one() {
        let mut cfg = small("kind = \"cosine\"", "");
        cfg.schedule.i_max = 3000;
        cfg.adam.lr = 0.05;
        let dir = tempfile::tempdir().unwrap();
        let out = run_experiment(&cfg, dir.path()).unwrap();
        assert_eq!(out.runs.len(), 6);
        for r in &out.runs {
            assert!((r.final_loss_mu0 + 1.0).abs() < 1e-6, "{r:?}");
        }
        // paired starts
        let base: Vec<u64> = out
            .runs
            .iter()
            .filter(|r| r.cohort == BASELINE)
            .map(|r| r.seed)
            .collect();
        let reg: Vec<u64> = out
            .runs
            .iter()
            .filter(|r| r.cohort == REGULARIZED)
            .map(|r| r.seed)
            .collect();
        assert_eq!(base, reg);
        for name in ["manifest.json", "runs.csv", "summary.csv", "report.txt"] {
            assert!(dir.path().join(name).is_file(), "{name}");
        }
        assert_eq!(fs::read_dir(dir.path().join("runs")).unwrap().count(), 6);
    }

    #[test]
    fn qaoa_rerun_is_byte_identical_and_writes_grids() {
        let cfg = small("kind = \"qaoa-toy\"\nn = 3", "[grid]\naxes = [{param = 0, lo = 0.0, hi = 3.0, points = 4}, {param = 1, lo = 0.0, hi = 3.0, points = 3}]");
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        run_experiment(&cfg, a.path()).unwrap();
        run_experiment(&cfg, b.path()).unwrap();
        for name in [
            "summary.csv",
            "runs.csv",
            "manifest.json",
            "grids/qaoa-toy_mu0.csv",
            "grids/qaoa-toy_mu1.csv",
        ] {
            assert_eq!(
                fs::read(a.path().join(name)).unwrap(),
                fs::read(b.path().join(name)).unwrap(),
                "{name}"
            );
        }
    }

    #[test]
    fn whrf_writes_sweep_tables() {
        let cfg = small(
            "kind = \"whrf\"\nm = 3\ngammas = [0.5, 2.0]\ninstances = 2",
            "",
        );
        let dir = tempfile::tempdir().unwrap();
        let out = run_experiment(&cfg, dir.path()).unwrap();
        assert_eq!(out.gamma_fractions.len(), 4);
        assert_eq!(out.summary.unwrap().groups.len(), 2);
        for name in [
            "histograms.csv",
            "sweep.csv",
            "whrf_gamma.csv",
            "instances/g01_i001.csv",
            "instances/g01_i001.json",
        ] {
            assert!(dir.path().join(name).is_file(), "{name}");
        }
        let hist = fs::read_to_string(dir.path().join("histograms.csv")).unwrap();
        assert_eq!(hist.lines().count(), 1 + 2 * 2 * 2);
    }

    #[test]
    fn baseline_only_whrf_skips_regularized_cohort() {
        let cfg = small(
            "kind = \"whrf\"\nm = 3\ngammas = [1.0]\ninstances = 1",
            "baseline_only = true",
        );
        let dir = tempfile::tempdir().unwrap();
        let out = run_experiment(&cfg, dir.path()).unwrap();
        assert!(out.runs.iter().all(|r| r.cohort == BASELINE));
        assert_eq!(out.gamma_fractions.len(), 1);
        assert!(summarize(dir.path()).is_err());
    }

    #[test]
    fn qcnn_writes_results_table() {
        let cfg = small("kind = \"qcnn\"\nn = 4\ntrain = 4\ntest = 4", "");
        let dir = tempfile::tempdir().unwrap();
        let out = run_experiment(&cfg, dir.path()).unwrap();
        assert_eq!(out.qcnn.len(), 6);
        let text = fs::read_to_string(dir.path().join("qcnn_results.csv")).unwrap();
        assert!(text
            .starts_with("teacher,n,student_seed,regularized_flag,final_mse,train_acc,test_acc"));
        assert!(dir.path().join("qcnn_accuracy.csv").is_file());
    }

    #[test]
    fn grid_only_uses_default_axes() {
        let cfg = small("kind = \"qaoa-toy\"\nn = 2", "");
        let dir = tempfile::tempdir().unwrap();
        let files = run_grids(&cfg, dir.path()).unwrap();
        assert_eq!(files.len(), 2);
        let text = fs::read_to_string(&files[1]).unwrap();
        assert_eq!(text.lines().count(), 1 + 61 * 61);
        let audit = small("kind = \"fourier-audit\"", "");
        assert!(run_grids(&audit, dir.path()).is_err());
    }

    #[test]
    fn fourier_audit_passes_and_is_deterministic() {
        let cfg = small(
            "kind = \"fourier-audit\"\nn = 2\nm = 3\ncircuits = 3\npoints = 4",
            "",
        );
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let out = run_experiment(&cfg, a.path()).unwrap();
        run_experiment(&cfg, b.path()).unwrap();
        assert!(out
            .audits
            .iter()
            .all(|x| x.max_suppression() < 1e-9 && x.heat_residual < 1e-4));
        assert_eq!(
            fs::read(a.path().join("summary.csv")).unwrap(),
            fs::read(b.path().join("summary.csv")).unwrap()
        );
        assert!(a.path().join("modes/circuit_002.csv").is_file());
    }
}
