//! Reproduction of the data behind the six reference figures.
//!
//! Each figure becomes a bundle of plot-ready CSVs plus a manifest JSON that
//! records every parameter and seed; re-running from the manifest reproduces
//! the bundle byte for byte. Monte-Carlo marker files skip grid points where
//! the starvation rule triggers (too few tail samples for the configured n);
//! every skip is recorded in the manifest.

use std::path::Path;
use std::process::ExitCode;

use rayon::prelude::*;

use odo_core::channels::FadingModel;
use odo_core::engine::{odo_for_model, op_linear_approx, OperatingPoint};
use odo_core::montecarlo::{estimate_odo, EmpiricalEstimate, EstimatorMethod};
use odo_core::OdoError;

use crate::model_args::{derive_seed, parse_anchors, parse_grid, FigureArgs};
use crate::output::{
    read_manifest, write_csv, write_manifest, Cell, Manifest, ManifestFlags, SkippedMarker,
    Versions,
};
use crate::{CliError, CliResult};

pub fn run(args: &FigureArgs) -> CliResult {
    let job = Job::from_args(args)?;
    std::fs::create_dir_all(&args.outdir)?;
    let manifest = emit(&job, &args.outdir)?;
    write_manifest(&args.outdir.join("manifest.json"), &manifest)?;
    println!(
        "{}: wrote {} files into {}",
        job.id,
        manifest.emitted_files.len() + 1,
        args.outdir.display()
    );
    Ok(ExitCode::SUCCESS)
}

struct Job {
    id: String,
    grid_spec: String,
    grid: Vec<f64>,
    rate: f64,
    seed: u64,
    mc_samples: usize,
    anchors: Option<Vec<f64>>,
}

impl Job {
    fn from_args(args: &FigureArgs) -> Result<Self, CliError> {
        if let Some(manifest_path) = &args.from_manifest {
            let m = read_manifest(manifest_path)?;
            return Ok(Self {
                id: m.figure,
                grid: parse_grid(&m.flags.grid)?,
                grid_spec: m.flags.grid,
                rate: m.flags.rate,
                seed: m.seed,
                mc_samples: m.flags.mc_samples,
                anchors: m.flags.anchors,
            });
        }
        let id = args.id.clone().expect("clap enforces id without manifest");
        let anchors = match &args.anchors {
            Some(spec) => Some(parse_anchors(spec)?),
            None => None,
        };
        Ok(Self {
            id,
            grid: parse_grid(&args.grid)?,
            grid_spec: args.grid.clone(),
            rate: args.rate,
            seed: args.seed,
            mc_samples: args.mc_samples,
            anchors,
        })
    }

    fn op(&self, db: f64) -> Result<OperatingPoint, OdoError> {
        OperatingPoint::new(self.rate, db)
    }
}

struct Emitter<'a> {
    job: &'a Job,
    outdir: &'a Path,
    files: Vec<String>,
    skipped: Vec<SkippedMarker>,
}

impl<'a> Emitter<'a> {
    fn csv(&mut self, name: &str, header: &[String], rows: &[Vec<Cell>]) -> Result<(), CliError> {
        write_csv(&self.outdir.join(name), header, rows)?;
        self.files.push(name.to_string());
        Ok(())
    }

    /// Analytic curve of one column over the grid.
    fn curve(
        &mut self,
        name: &str,
        column: &str,
        model: &FadingModel,
        value: impl Fn(&odo_core::engine::OdoResult) -> f64 + Sync,
    ) -> Result<(), CliError> {
        let rows: Vec<Vec<Cell>> = self
            .job
            .grid
            .par_iter()
            .map(|&db| -> Result<Vec<Cell>, CliError> {
                let r = odo_for_model(model, &self.job.op(db)?)?;
                Ok(vec![Cell::Num(db), Cell::Num(value(&r))])
            })
            .collect::<Result<_, _>>()?;
        self.csv(name, &["omega0_db".to_string(), column.to_string()], &rows)
    }

    /// Constant reference line (the conventional-DO asymptote).
    fn reference(&mut self, name: &str, column: &str, value: f64) -> Result<(), CliError> {
        let rows: Vec<Vec<Cell>> = self
            .job
            .grid
            .iter()
            .map(|&db| vec![Cell::Num(db), Cell::Num(value)])
            .collect();
        self.csv(name, &["omega0_db".to_string(), column.to_string()], &rows)
    }

    /// Monte-Carlo markers every ~5 dB along the grid, transformed by `map`
    /// (identity for δ markers, 10/δ for c_dB markers). Starved points are
    /// skipped and recorded.
    fn mc_markers(
        &mut self,
        name: &str,
        column: &str,
        model: &FadingModel,
        curve_tag: u64,
        map: impl Fn(f64) -> f64 + Sync,
    ) -> Result<(), CliError> {
        let step = if self.job.grid.len() > 1 {
            self.job.grid[1] - self.job.grid[0]
        } else {
            1.0
        };
        let stride = ((5.0 / step).round() as usize).max(1);
        let points: Vec<(usize, f64)> = self
            .job
            .grid
            .iter()
            .copied()
            .enumerate()
            .step_by(stride)
            .collect();
        let estimates: Vec<(f64, Result<EmpiricalEstimate, OdoError>)> = points
            .par_iter()
            .map(|&(idx, db)| {
                let op = match self.job.op(db) {
                    Ok(op) => op,
                    Err(e) => return (db, Err(e)),
                };
                let seed = derive_seed(self.job.seed, curve_tag * 1_000 + idx as u64);
                (
                    db,
                    estimate_odo(
                        model,
                        &op,
                        self.job.mc_samples,
                        EstimatorMethod::LogCdfDiff,
                        seed,
                    ),
                )
            })
            .collect();
        let mut rows = Vec::new();
        for (db, est) in estimates {
            match est {
                Ok(e) => {
                    let (lo, hi) = (map(e.ci_high), map(e.ci_low));
                    let (lo, hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
                    rows.push(vec![
                        Cell::Num(db),
                        Cell::Num(map(e.delta_hat)),
                        Cell::Num(lo),
                        Cell::Num(hi),
                        Cell::Int(e.n_samples as u64),
                        Cell::Text("diff"),
                        Cell::Int(e.seed),
                    ]);
                }
                Err(OdoError::Starved(reason)) | Err(OdoError::InsufficientSamples(reason)) => {
                    self.skipped.push(SkippedMarker {
                        file: name.to_string(),
                        omega0_db: db,
                        reason,
                    });
                }
                Err(other) => return Err(other.into()),
            }
        }
        let header: Vec<String> = [
            "omega0_db",
            column,
            "ci_low",
            "ci_high",
            "n",
            "method",
            "seed",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        self.csv(name, &header, &rows)
    }

    /// Exact OP curve plus tangent lines anchored at the given dB points.
    fn op_with_tangents(
        &mut self,
        name: &str,
        model: &FadingModel,
        anchors: &[f64],
    ) -> Result<(), CliError> {
        let mut header = vec!["omega_db".to_string(), "op_exact".to_string()];
        let lines: Vec<_> = anchors
            .iter()
            .map(|&db| -> Result<_, CliError> {
                let op = self.job.op(db)?;
                let r = odo_for_model(model, &op)?;
                header.push(format!("op_tangent_at_{db}db"));
                Ok(op_linear_approx(&r, &op))
            })
            .collect::<Result<_, _>>()?;
        let rows: Vec<Vec<Cell>> = self
            .job
            .grid
            .par_iter()
            .map(|&db| -> Result<Vec<Cell>, CliError> {
                let r = odo_for_model(model, &self.job.op(db)?)?;
                let mut row = vec![Cell::Num(db), Cell::Num(r.alpha0)];
                for line in &lines {
                    row.push(Cell::Num(line.op(db)));
                }
                Ok(row)
            })
            .collect::<Result<_, _>>()?;
        self.csv(name, &header, &rows)
    }
}

fn emit(job: &Job, outdir: &Path) -> Result<Manifest, CliError> {
    let mut em = Emitter {
        job,
        outdir,
        files: Vec::new(),
        skipped: Vec::new(),
    };
    let mut anchors_used: Option<Vec<f64>> = None;

    match job.id.as_str() {
        "fig1" => {
            // Rician ODO vs power for a spread of K factors, with MC markers
            // and the conventional-DO reference
            for (i, k) in [0.1, 1.0, 5.0, 10.0, 15.0].into_iter().enumerate() {
                let model = FadingModel::rician(k)?;
                em.curve(&format!("fig1_odo_rician_K{k}.csv"), "delta", &model, |r| {
                    r.delta
                })?;
                em.mc_markers(
                    &format!("fig1_mc_rician_K{k}.csv"),
                    "delta_mc",
                    &model,
                    i as u64 + 1,
                    |d| d,
                )?;
            }
            em.reference("fig1_do_reference.csv", "delta", 1.0)?;
        }
        "fig2" => {
            // Rician K=15 outage with tangent lines at the operating points
            let anchors = job
                .anchors
                .clone()
                .unwrap_or_else(|| vec![10.0, 15.0, 20.0]);
            em.op_with_tangents(
                "fig2_op_rician_K15.csv",
                &FadingModel::rician(15.0)?,
                &anchors,
            )?;
            anchors_used = Some(anchors);
        }
        "fig3" => {
            // four-branch SC and MRC over Rician branches
            for (i, k) in [1.0, 10.0].into_iter().enumerate() {
                let sc = FadingModel::rician(k)?.with_sc(4)?;
                let mrc = FadingModel::rician(k)?.with_mrc(4)?;
                em.curve(
                    &format!("fig3_odo_sc_rician_K{k}_N4.csv"),
                    "delta",
                    &sc,
                    |r| r.delta,
                )?;
                em.curve(
                    &format!("fig3_odo_mrc_rician_K{k}_N4.csv"),
                    "delta",
                    &mrc,
                    |r| r.delta,
                )?;
                em.mc_markers(
                    &format!("fig3_mc_sc_rician_K{k}_N4.csv"),
                    "delta_mc",
                    &sc,
                    10 + i as u64,
                    |d| d,
                )?;
                em.mc_markers(
                    &format!("fig3_mc_mrc_rician_K{k}_N4.csv"),
                    "delta_mc",
                    &mrc,
                    20 + i as u64,
                    |d| d,
                )?;
            }
            em.reference("fig3_do_reference.csv", "delta", 4.0)?;
        }
        "fig4" => {
            // TWDP K=12: power cost of one decade of outage, by imbalance
            for (i, d) in [0.0, 0.3, 0.7, 1.0].into_iter().enumerate() {
                let model = FadingModel::twdp(12.0, d)?;
                em.curve(
                    &format!("fig4_cdb_twdp_delta{d}.csv"),
                    "c_db",
                    &model,
                    |r| r.c_db_per_decade,
                )?;
                em.mc_markers(
                    &format!("fig4_mc_twdp_delta{d}.csv"),
                    "c_db_mc",
                    &model,
                    30 + i as u64,
                    |delta| 10.0 / delta,
                )?;
            }
            em.reference("fig4_do_reference.csv", "c_db", 10.0)?;
        }
        "fig5" => {
            // cascaded vs single Rayleigh slope
            em.curve(
                "fig5_odo_cascaded.csv",
                "delta",
                &FadingModel::cascaded(),
                |r| r.delta,
            )?;
            em.curve(
                "fig5_odo_rayleigh.csv",
                "delta",
                &FadingModel::rayleigh(),
                |r| r.delta,
            )?;
            em.mc_markers(
                "fig5_mc_cascaded.csv",
                "delta_mc",
                &FadingModel::cascaded(),
                40,
                |d| d,
            )?;
            em.mc_markers(
                "fig5_mc_rayleigh.csv",
                "delta_mc",
                &FadingModel::rayleigh(),
                41,
                |d| d,
            )?;
            em.reference("fig5_do_reference.csv", "delta", 1.0)?;
        }
        "fig6" => {
            // single and cascaded Rayleigh outage with tangent families
            let anchors = job
                .anchors
                .clone()
                .unwrap_or_else(|| vec![10.0, 20.0, 30.0]);
            em.op_with_tangents("fig6_op_rayleigh.csv", &FadingModel::rayleigh(), &anchors)?;
            em.op_with_tangents("fig6_op_cascaded.csv", &FadingModel::cascaded(), &anchors)?;
            anchors_used = Some(anchors);
        }
        other => {
            return Err(CliError::Usage(format!(
                "unknown figure '{other}' (expected fig1..fig6)"
            )))
        }
    }

    let mut files = em.files;
    files.sort();
    let mut skipped = em.skipped;
    skipped.sort_by(|a, b| {
        (a.file.clone(), a.omega0_db)
            .partial_cmp(&(b.file.clone(), b.omega0_db))
            .expect("orderable")
    });
    Ok(Manifest {
        command: "figure".to_string(),
        figure: job.id.clone(),
        flags: ManifestFlags {
            grid: job.grid_spec.clone(),
            rate: job.rate,
            mc_samples: job.mc_samples,
            anchors: anchors_used,
        },
        seed: job.seed,
        versions: Versions::current(),
        emitted_files: files,
        skipped_markers: skipped,
    })
}
