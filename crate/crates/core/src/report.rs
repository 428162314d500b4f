//! Structured run reports and the dimension/timing tables.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::diagonal::{
    containment_precheck, match_distance, run, Containment, DiagonalError, DiagonalProblem,
    LevelResult, Mode, RunOptions, StageReport, WitnessSuperset,
};
use crate::fixtures::Example;

/// Serde adapter writing complex vectors as lists of `[re, im]` pairs.
pub mod points {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::linalg::{CVec, C64};

    pub fn serialize<S: Serializer>(pts: &[CVec], s: S) -> Result<S::Ok, S::Error> {
        let raw: Vec<Vec<[f64; 2]>> =
            pts.iter().map(|p| p.iter().map(|z| [z.re, z.im]).collect()).collect();
        raw.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<CVec>, D::Error> {
        let raw = Vec::<Vec<[f64; 2]>>::deserialize(d)?;
        Ok(raw
            .into_iter()
            .map(|p| CVec::from_iterator(p.len(), p.into_iter().map(|[re, im]| C64::new(re, im))))
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeReport {
    pub mode: Mode,
    pub tracked_vars: usize,
    pub stages: Vec<StageReport>,
    pub levels: Vec<LevelResult>,
    pub restarts: usize,
    pub failed_paths: usize,
    pub setup_seconds: f64,
    pub total_seconds: f64,
}

impl From<&WitnessSuperset> for ModeReport {
    fn from(s: &WitnessSuperset) -> Self {
        ModeReport {
            mode: s.mode,
            tracked_vars: s.tracked_vars,
            stages: s.stages.clone(),
            levels: s.levels.clone(),
            restarts: s.restarts,
            failed_paths: s.failed_paths,
            setup_seconds: s.setup_seconds,
            total_seconds: s.total_seconds,
        }
    }
}

impl ModeReport {
    pub fn witness_count(&self, dim: usize) -> usize {
        self.levels.iter().find(|l| l.dim == dim).map_or(0, |l| l.candidates.len())
    }

    /// Copy with every wall-clock field zeroed, for reproducibility checks.
    pub fn without_times(&self) -> ModeReport {
        let mut r = self.clone();
        r.setup_seconds = 0.0;
        r.total_seconds = 0.0;
        for s in &mut r.stages {
            s.seconds = 0.0;
        }
        r
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub seed: u64,
    pub k: usize,
    pub a: usize,
    pub b: usize,
    pub deg_a: usize,
    pub deg_b: usize,
    pub hmax: usize,
    pub h0: usize,
    /// `m = 2k − a − b`, the intrinsic path dimension.
    pub intrinsic_vars: usize,
    /// `3k`, the unknowns `(w, z)` of the extrinsic formulation as tracked.
    pub extrinsic_vars: usize,
    /// `3k − a`, the extrinsic count quoted in the literature.
    pub extrinsic_vars_reduced: usize,
    pub start_paths: usize,
    pub swapped: bool,
    pub options: RunOptions,
    pub containment: Containment,
    pub runs: Vec<ModeReport>,
    /// Endpoint matching distance between the two modes; `None` unless both
    /// ran, or when the endpoint sets have different sizes.
    pub match_distance: Option<f64>,
}

impl RunReport {
    pub fn new(problem: &DiagonalProblem, options: &RunOptions, containment: Containment) -> Self {
        let (k, a) = (problem.k(), problem.a());
        RunReport {
            seed: problem.seed(),
            k,
            a,
            b: problem.b(),
            deg_a: problem.witness_a().degree(),
            deg_b: problem.witness_b().degree(),
            hmax: problem.hmax(),
            h0: problem.h0(),
            intrinsic_vars: problem.m(),
            extrinsic_vars: 3 * k,
            extrinsic_vars_reduced: 3 * k - a,
            start_paths: problem.witness_a().degree() * problem.witness_b().degree(),
            swapped: problem.swapped(),
            options: *options,
            containment,
            runs: Vec::new(),
            match_distance: None,
        }
    }

    pub fn run(&self, mode: Mode) -> Option<&ModeReport> {
        self.runs.iter().find(|r| r.mode == mode)
    }

    pub fn without_times(&self) -> RunReport {
        RunReport { runs: self.runs.iter().map(ModeReport::without_times).collect(), ..self.clone() }
    }

    /// Aligned plain-text summary.
    pub fn table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "k={} a={} b={} deg(A)={} deg(B)={} levels {}..{}  m={} extrinsic={} (3k-a={})  start paths={}",
            self.k,
            self.a,
            self.b,
            self.deg_a,
            self.deg_b,
            self.hmax,
            self.h0,
            self.intrinsic_vars,
            self.extrinsic_vars,
            self.extrinsic_vars_reduced,
            self.start_paths
        );
        if self.containment == Containment::BContainedInA {
            out.push_str("B is contained in A: A∩B = B\n");
            return out;
        }
        for r in &self.runs {
            let _ = writeln!(
                out,
                "{:<9} stage  from  to  paths  conv  div  fail  seconds",
                format!("{:?}", r.mode).to_lowercase()
            );
            for (n, s) in r.stages.iter().enumerate() {
                let from = s.from_level.map_or("start".to_string(), |l| l.to_string());
                let _ = writeln!(
                    out,
                    "          {n:>5}  {from:>5} {:>3}  {:>5}  {:>4}  {:>3}  {:>4}  {:>9.6}",
                    s.to_level, s.paths, s.converged, s.diverged, s.failed, s.seconds
                );
            }
            for l in &r.levels {
                let _ = writeln!(
                    out,
                    "          dim {}: {} witness point(s), {} nonsolution(s), {} junk",
                    l.dim,
                    l.candidates.len(),
                    l.nonsolutions,
                    l.junk.len()
                );
            }
            let _ = writeln!(out, "          total {:.6} s, restarts {}", r.total_seconds, r.restarts);
        }
        if let Some(d) = self.match_distance {
            let _ = writeln!(out, "intrinsic/extrinsic match distance {d:.3e}");
        }
        out
    }
}

/// Runs the precheck and the requested modes and assembles the report. The
/// supersets are returned alongside, in the order of `modes`.
pub fn intersect(
    problem: &DiagonalProblem,
    modes: &[Mode],
    options: &RunOptions,
) -> Result<(RunReport, Vec<WitnessSuperset>), DiagonalError> {
    let containment = containment_precheck(problem, options)?;
    let mut report = RunReport::new(problem, options, containment);
    if containment == Containment::BContainedInA {
        return Ok((report, Vec::new()));
    }
    let supersets = modes
        .iter()
        .map(|&m| run(problem, m, options))
        .collect::<Result<Vec<_>, _>>()?;
    report.runs = supersets.iter().map(ModeReport::from).collect();
    if supersets.len() == 2 {
        let d = match_distance(&supersets[0], &supersets[1]);
        report.match_distance = d.is_finite().then_some(d);
    }
    Ok((report, supersets))
}

fn median(xs: &mut [f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

/// One example's sizes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionRow {
    pub example: String,
    pub k: usize,
    pub dim_a: usize,
    pub deg_a: usize,
    pub dim_b: usize,
    pub deg_b: usize,
    pub m: usize,
    pub extrinsic_vars: usize,
    pub extrinsic_vars_reduced: usize,
    pub paths: usize,
}

/// Median timings of one example over repeated runs in both modes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingRow {
    pub example: String,
    pub intrinsic_stages: Vec<f64>,
    pub extrinsic_stages: Vec<f64>,
    pub intrinsic_total: f64,
    pub extrinsic_total: f64,
    /// Witness counts per dimension (identical across repeats and modes
    /// when `consistent`).
    pub counts: Vec<(usize, usize)>,
    pub paths: usize,
    pub consistent: bool,
    pub error: Option<String>,
}

impl TimingRow {
    pub fn ratio(&self) -> f64 {
        self.extrinsic_total / self.intrinsic_total
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub seed: u64,
    pub repeats: usize,
    pub dimensions: Vec<DimensionRow>,
    pub timings: Vec<TimingRow>,
}

fn counts_of(s: &WitnessSuperset) -> Vec<(usize, usize)> {
    s.levels.iter().map(|l| (l.dim, l.count())).collect()
}

fn time_example(ex: Example, seed: u64, repeats: usize, options: &RunOptions) -> Result<TimingRow, DiagonalError> {
    let problem = ex.problem(seed)?;
    let mut stage_i: Vec<Vec<f64>> = Vec::new();
    let mut stage_e: Vec<Vec<f64>> = Vec::new();
    let (mut tot_i, mut tot_e) = (Vec::new(), Vec::new());
    let mut counts = None;
    let mut consistent = true;
    let mut paths = 0;
    for _ in 0..repeats.max(1) {
        // alternate which mode runs first so warm caches favour neither
        let i = run(&problem, Mode::Intrinsic, options)?;
        let e = run(&problem, Mode::Extrinsic, options)?;
        for (dst, s) in [(&mut stage_i, &i), (&mut stage_e, &e)] {
            for (n, st) in s.stages.iter().enumerate() {
                if dst.len() <= n {
                    dst.push(Vec::new());
                }
                dst[n].push(st.seconds);
            }
        }
        tot_i.push(i.total_seconds);
        tot_e.push(e.total_seconds);
        let c = counts_of(&i);
        consistent &= counts_of(&e) == c && i.total_paths() == e.total_paths();
        consistent &= counts.as_ref().is_none_or(|prev| *prev == c);
        paths = i.total_paths();
        counts = Some(c);
    }
    Ok(TimingRow {
        example: ex.name().to_string(),
        intrinsic_stages: stage_i.iter_mut().map(|v| median(v)).collect(),
        extrinsic_stages: stage_e.iter_mut().map(|v| median(v)).collect(),
        intrinsic_total: median(&mut tot_i),
        extrinsic_total: median(&mut tot_e),
        counts: counts.unwrap_or_default(),
        paths,
        consistent,
        error: None,
    })
}

/// Runs the cylinder/sphere, coordinate-plane and synthetic examples in both
/// modes `repeats` times and reports sizes and median wall times. A failing
/// example is recorded in its row and does not stop the others.
pub fn bench(seed: u64, repeats: usize, options: &RunOptions) -> BenchReport {
    let examples = [Example::CylinderSphere, Example::CoordinatePlanes, Example::Synthetic3];
    let mut dimensions = Vec::new();
    let mut timings = Vec::new();
    for ex in examples {
        match ex.problem(seed) {
            Ok(p) => dimensions.push(DimensionRow {
                example: ex.name().to_string(),
                k: p.k(),
                dim_a: p.a(),
                deg_a: p.witness_a().degree(),
                dim_b: p.b(),
                deg_b: p.witness_b().degree(),
                m: p.m(),
                extrinsic_vars: 3 * p.k(),
                extrinsic_vars_reduced: 3 * p.k() - p.a(),
                paths: p.witness_a().degree() * p.witness_b().degree(),
            }),
            Err(e) => log::error!("example {ex}: {e}"),
        }
        let row = time_example(ex, seed, repeats, options).unwrap_or_else(|e| TimingRow {
            example: ex.name().to_string(),
            intrinsic_stages: Vec::new(),
            extrinsic_stages: Vec::new(),
            intrinsic_total: f64::NAN,
            extrinsic_total: f64::NAN,
            counts: Vec::new(),
            paths: 0,
            consistent: false,
            error: Some(e.to_string()),
        });
        timings.push(row);
    }
    BenchReport { seed, repeats: repeats.max(1), dimensions, timings }
}

impl BenchReport {
    pub fn tables(&self) -> String {
        let mut out = String::new();
        out.push_str("example   k  dim(A) deg(A) dim(B) deg(B)   m  3k  3k-a  paths\n");
        for d in &self.dimensions {
            let _ = writeln!(
                out,
                "{:<9} {:>2} {:>7} {:>6} {:>6} {:>6} {:>3} {:>3} {:>5} {:>6}",
                d.example, d.k, d.dim_a, d.deg_a, d.dim_b, d.deg_b, d.m, d.extrinsic_vars,
                d.extrinsic_vars_reduced, d.paths
            );
        }
        let _ = writeln!(out, "\nmedian wall seconds over {} repeat(s)", self.repeats);
        out.push_str("example   mode       homotopy 0  homotopy 1  homotopy 2       total\n");
        for t in &self.timings {
            if let Some(e) = &t.error {
                let _ = writeln!(out, "{:<9} failed: {e}", t.example);
                continue;
            }
            for (mode, stages, total) in [
                ("intrinsic", &t.intrinsic_stages, t.intrinsic_total),
                ("extrinsic", &t.extrinsic_stages, t.extrinsic_total),
            ] {
                let _ = write!(out, "{:<9} {mode:<9}", t.example);
                for n in 0..3 {
                    match stages.get(n) {
                        Some(s) => {
                            let _ = write!(out, "  {s:>10.6}");
                        }
                        None => out.push_str("          --"),
                    }
                }
                let _ = writeln!(out, "  {total:>10.6}");
            }
            let _ = writeln!(
                out,
                "{:<9} extrinsic/intrinsic = {:.2}{}",
                t.example,
                t.ratio(),
                if t.consistent { "" } else { "  (counts differ between runs!)" }
            );
        }
        out
    }
}
