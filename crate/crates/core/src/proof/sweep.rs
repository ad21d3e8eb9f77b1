use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::mpsc;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::checkpoint::{CheckpointError, CheckpointHeader, CheckpointWriter, Record};
use super::{discretize_omega, dispose, Disposition, ParamsError, SweepParams};
use crate::geometry::Point2;

#[derive(Debug, Error)]
pub enum SweepError {
    #[error(transparent)]
    Params(#[from] ParamsError),
    #[error(transparent)]
    Checkpoint(#[from] CheckpointError),
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub workers: usize,
    pub checkpoint: Option<PathBuf>,
    /// Discard an existing checkpoint instead of resuming from it.
    pub restart: bool,
    /// Process at most this many new cubes, then stop (verdict Incomplete).
    pub stop_after: Option<usize>,
    /// Print progress lines to stderr.
    pub progress: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Proved,
    Failed,
    Incomplete,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CubeRecord {
    /// Position in the shuffled order.
    pub position: usize,
    /// Index in the unshuffled lattice enumeration.
    pub cube: usize,
    pub p1: Point2,
    pub p2: Point2,
    pub disposed_by: Disposition,
    pub elapsed_ms: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Counts {
    pub s1: usize,
    /// S2 successes keyed by the `δ₁` that worked.
    pub s2: BTreeMap<String, usize>,
    pub s3: usize,
    pub failed: usize,
}

impl Counts {
    pub fn s2_total(&self) -> usize {
        self.s2.values().sum()
    }

    pub fn total(&self) -> usize {
        self.s1 + self.s2_total() + self.s3 + self.failed
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProofReport {
    pub params: SweepParams,
    pub total_cubes: usize,
    pub selected: usize,
    pub processed: usize,
    pub counts: Counts,
    pub verdict: Verdict,
    /// Cubes replayed from the checkpoint rather than computed in this run.
    pub resumed: usize,
    pub checkpoint: Option<PathBuf>,
    pub wall_time_secs: f64,
    pub cube_time_secs: f64,
    /// First ten cubes (by shuffled position) disposed by each strategy.
    pub samples: BTreeMap<String, Vec<CubeRecord>>,
    pub failed_cubes: Vec<CubeRecord>,
}

impl ProofReport {
    /// The report with run-dependent fields (timings, resume count,
    /// checkpoint path) cleared, for determinism comparisons.
    pub fn normalized(&self) -> ProofReport {
        let mut r = self.clone();
        r.wall_time_secs = 0.0;
        r.cube_time_secs = 0.0;
        r.resumed = 0;
        r.checkpoint = None;
        for list in r.samples.values_mut().chain(std::iter::once(&mut r.failed_cubes)) {
            for c in list {
                c.elapsed_ms = 0.0;
            }
        }
        r
    }
}

pub fn run_sweep(params: &SweepParams, workers: usize, checkpoint: Option<&Path>) -> Result<ProofReport, SweepError> {
    run_sweep_with(
        params,
        &RunOptions { workers, checkpoint: checkpoint.map(Path::to_path_buf), ..RunOptions::default() },
    )
}

pub fn run_sweep_with(params: &SweepParams, opts: &RunOptions) -> Result<ProofReport, SweepError> {
    params.validate()?;
    let started = Instant::now();
    let cubes = discretize_omega(params);
    let mut order: Vec<usize> = (0..cubes.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(params.seed));
    let selected = params.sample.map_or(order.len(), |k| k.min(order.len()));
    order.truncate(selected);

    let header = CheckpointHeader::new(params, cubes.len(), selected);
    let (mut writer, replayed) = match &opts.checkpoint {
        Some(path) if path.exists() && !opts.restart => {
            let (w, recs) = CheckpointWriter::resume(path, &header)?;
            (Some(w), recs)
        }
        Some(path) => (Some(CheckpointWriter::create(path, &header)?), Vec::new()),
        None => (None, Vec::new()),
    };

    let mut results: Vec<Option<(Disposition, u64)>> = vec![None; selected];
    for rec in &replayed {
        results[rec.i] = Some((rec.d, rec.ns));
    }
    let mut pending: Vec<usize> = (0..selected).filter(|&i| results[i].is_none()).collect();
    if let Some(limit) = opts.stop_after {
        pending.truncate(limit);
    }

    let workers = opts.workers.max(1).min(pending.len().max(1));
    let (tx, rx) = mpsc::channel::<Record>();
    let mut write_error = None;
    std::thread::scope(|scope| {
        for w in 0..workers {
            let tx = tx.clone();
            let shard: Vec<usize> = pending.iter().copied().skip(w).step_by(workers).collect();
            let (cubes, order) = (&cubes, &order);
            scope.spawn(move || {
                for pos in shard {
                    let (p1, p2) = cubes[order[pos]];
                    let t = Instant::now();
                    let d = dispose(params, p1, p2);
                    let ns = t.elapsed().as_nanos() as u64;
                    if tx.send(Record { i: pos, d, ns }).is_err() {
                        return;
                    }
                }
            });
        }
        drop(tx);
        let mut done = 0usize;
        let mut last_print = Instant::now();
        for rec in rx {
            results[rec.i] = Some((rec.d, rec.ns));
            done += 1;
            if let Some(w) = writer.as_mut() {
                if write_error.is_none() {
                    if let Err(e) = w.append(&rec) {
                        write_error = Some(e);
                    }
                }
            }
            if opts.progress && last_print.elapsed() > Duration::from_secs(10) {
                eprintln!("processed {done} / {} pending cubes ({:.0?})", pending.len(), started.elapsed());
                last_print = Instant::now();
            }
        }
    });
    if let Some(e) = write_error {
        return Err(e.into());
    }
    if let Some(w) = writer.as_mut() {
        w.sync()?;
    }

    let mut counts = Counts::default();
    let mut samples: BTreeMap<String, Vec<CubeRecord>> = BTreeMap::new();
    let mut failed_cubes = Vec::new();
    let mut processed = 0;
    let mut cube_ns: u128 = 0;
    for (pos, res) in results.iter().enumerate() {
        let Some((d, ns)) = *res else { continue };
        processed += 1;
        cube_ns += ns as u128;
        let (p1, p2) = cubes[order[pos]];
        let record = CubeRecord {
            position: pos,
            cube: order[pos],
            p1,
            p2,
            disposed_by: d,
            elapsed_ms: ns as f64 / 1e6,
        };
        let key = match d {
            Disposition::S1 => {
                counts.s1 += 1;
                "S1"
            }
            Disposition::S2(delta1) => {
                *counts.s2.entry(delta1.to_string()).or_default() += 1;
                "S2"
            }
            Disposition::S3 => {
                counts.s3 += 1;
                "S3"
            }
            Disposition::Failed => {
                counts.failed += 1;
                failed_cubes.push(record);
                continue;
            }
        };
        let list = samples.entry(key.to_string()).or_default();
        if list.len() < 10 {
            list.push(record);
        }
    }
    let verdict = if counts.failed > 0 {
        Verdict::Failed
    } else if processed < selected {
        Verdict::Incomplete
    } else {
        Verdict::Proved
    };
    Ok(ProofReport {
        params: params.clone(),
        total_cubes: cubes.len(),
        selected,
        processed,
        counts,
        verdict,
        resumed: replayed.len(),
        checkpoint: opts.checkpoint.clone(),
        wall_time_secs: started.elapsed().as_secs_f64(),
        cube_time_secs: cube_ns as f64 / 1e9,
        samples,
        failed_cubes,
    })
}
