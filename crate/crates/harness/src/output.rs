use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use ccmckp::metrics::{build_reference, hypervolume, igd, igd_plus, ObjectivePoint};
use ccmckp::nhils::FrontPoint;

use crate::runner::{ResultsBundle, RunFront};

/// Version of the on-disk results layout.
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    format_version: u32,
    reference_samples: u64,
    margin: f64,
    plan: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct PlotRow {
    repetition: usize,
    cost: f64,
    cl: f64,
}

fn write_csv<T: Serialize>(path: &Path, rows: &[T], header: &[&str]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)
        .with_context(|| format!("creating {}", path.display()))?;
    w.write_record(header)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

fn front_path(dir: &Path, f: &RunFront) -> PathBuf {
    dir.join("fronts").join(&f.instance).join(&f.algorithm).join(format!("rep{}.csv", f.repetition))
}

pub fn write_front(path: &Path, points: &[FrontPoint]) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    write_csv(path, points, &["cost", "cl"])
}

pub fn read_front(path: &Path) -> Result<Vec<FrontPoint>> {
    let mut r = csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    r.deserialize().map(|row| Ok(row?)).collect()
}

/// Writes one `(repetition, cost, cl)` file per (instance, algorithm) under
/// `dir/plots`. Returns the written paths.
pub fn emit_front_plots_data(bundle: &ResultsBundle, dir: &Path) -> Result<Vec<PathBuf>> {
    let plots = dir.join("plots");
    fs::create_dir_all(&plots)?;
    let mut groups: BTreeMap<(String, String), Vec<PlotRow>> = BTreeMap::new();
    for row in &bundle.summary {
        groups.entry((row.instance.clone(), row.algorithm.clone())).or_default();
    }
    for f in &bundle.fronts {
        let rows = groups.entry((f.instance.clone(), f.algorithm.clone())).or_default();
        rows.extend(f.points.iter().map(|p| PlotRow { repetition: f.repetition, cost: p.cost, cl: p.cl }));
    }
    let mut written = Vec::new();
    for ((inst, alg), rows) in groups {
        let path = plots.join(format!("{inst}__{alg}.csv"));
        write_csv(&path, &rows, &["repetition", "cost", "cl"])?;
        written.push(path);
    }
    Ok(written)
}

/// Reads a plot data file back as `(repetition, point)` pairs.
pub fn read_plot_data(path: &Path) -> Result<Vec<(usize, FrontPoint)>> {
    let mut r = csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    r.deserialize::<PlotRow>()
        .map(|row| {
            let row = row?;
            Ok((row.repetition, FrontPoint { cost: row.cost, cl: row.cl }))
        })
        .collect()
}

/// Writes the bundle under `dir`: `manifest.json`, `results.csv`,
/// `summary.csv`, `references.json`, `timing.csv`, and optionally the
/// per-run fronts and plot data.
pub fn write_bundle(bundle: &ResultsBundle, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let manifest = Manifest {
        format_version: FORMAT_VERSION,
        reference_samples: bundle.plan.reference_samples,
        margin: bundle.plan.margin,
        plan: bundle.plan.to_toml()?,
    };
    fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)? + "\n")?;
    write_csv(
        &dir.join("results.csv"),
        &bundle.rows,
        &[
            "instance",
            "algorithm",
            "repetition",
            "seed",
            "status",
            "hv",
            "igd",
            "igd_plus",
            "fsr",
            "generations",
            "evaluations",
            "samples",
            "front_size",
            "error",
        ],
    )?;
    write_csv(
        &dir.join("summary.csv"),
        &bundle.summary,
        &["instance", "algorithm", "runs", "failed", "hv", "igd", "igd_plus", "fsr", "generations"],
    )?;
    fs::write(dir.join("references.json"), serde_json::to_string_pretty(&bundle.references)? + "\n")?;
    write_csv(
        &dir.join("timing.csv"),
        &bundle.timings,
        &["instance", "algorithm", "repetition", "wall_time_s", "last_generation_s"],
    )?;
    if bundle.plan.outputs.fronts {
        for f in &bundle.fronts {
            write_front(&front_path(dir, f), &f.points)?;
        }
    }
    if bundle.plan.outputs.plots {
        emit_front_plots_data(bundle, dir)?;
    }
    Ok(())
}

/// Loads `dir/fronts/<instance>/<algorithm>/rep<k>.csv` in sorted order.
pub fn load_fronts(dir: &Path) -> Result<Vec<RunFront>> {
    let sorted = |p: &Path| -> Result<Vec<PathBuf>> {
        let mut v: Vec<PathBuf> = fs::read_dir(p)
            .with_context(|| format!("listing {}", p.display()))?
            .map(|e| e.map(|e| e.path()))
            .collect::<std::io::Result<_>>()?;
        v.sort();
        Ok(v)
    };
    let name = |p: &Path| p.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let mut out = Vec::new();
    for inst in sorted(&dir.join("fronts"))?.into_iter().filter(|p| p.is_dir()) {
        for alg in sorted(&inst)?.into_iter().filter(|p| p.is_dir()) {
            let mut reps: Vec<(usize, PathBuf)> = sorted(&alg)?
                .into_iter()
                .filter_map(|p| {
                    let stem = p.file_stem()?.to_str()?.strip_prefix("rep")?.parse().ok()?;
                    Some((stem, p))
                })
                .collect();
            reps.sort();
            for (rep, path) in reps {
                out.push(RunFront {
                    instance: name(&inst),
                    algorithm: name(&alg),
                    repetition: rep,
                    points: read_front(&path)?,
                });
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub instance: String,
    pub algorithm: String,
    pub repetition: usize,
    pub hv: f64,
    pub igd: f64,
    pub igd_plus: f64,
}

/// HV, IGD and IGD+ of stored fronts against per-instance references rebuilt
/// from the same fronts. Instances whose fronts are all empty are skipped.
pub fn recompute_metrics(fronts: &[RunFront], margin: f64) -> Result<Vec<MetricRow>> {
    let mut by_instance: BTreeMap<&str, Vec<&RunFront>> = BTreeMap::new();
    for f in fronts {
        by_instance.entry(&f.instance).or_default().push(f);
    }
    let mut rows = Vec::new();
    for (inst, runs) in by_instance {
        let pts: Vec<Vec<ObjectivePoint>> =
            runs.iter().map(|f| f.points.iter().copied().map(ObjectivePoint::from).collect()).collect();
        if pts.iter().all(Vec::is_empty) {
            continue;
        }
        let reference = build_reference(&pts, margin)?;
        for (f, p) in runs.iter().zip(&pts) {
            rows.push(MetricRow {
                instance: inst.to_string(),
                algorithm: f.algorithm.clone(),
                repetition: f.repetition,
                hv: hypervolume(p, reference.ref_point),
                igd: igd(p, &reference.ref_set)?,
                igd_plus: igd_plus(p, &reference.ref_set)?,
            });
        }
    }
    Ok(rows)
}

pub fn write_metric_rows(path: &Path, rows: &[MetricRow]) -> Result<()> {
    write_csv(path, rows, &["instance", "algorithm", "repetition", "hv", "igd", "igd_plus"])
}
