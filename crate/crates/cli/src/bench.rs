//! Wall-clock comparison of the two subproblem backends on a composite file.
//!
//! Both arms run the box-constrained reduction of every segment one after
//! the other on the calling thread; the error metrics are left out of the
//! timed region. The arms alternate order between repetitions, after one
//! untimed warm-up pass each.

use std::fmt;
use std::time::{Duration, Instant};

use boxdeg::{solve_boxed, Backend, BezierCurve, ReductionRequest, SolverOptions};

use crate::format::CompositeCurveFile;

#[derive(Debug, Clone)]
pub struct BenchReport {
    pub segments: usize,
    pub normal_equations: Vec<Duration>,
    pub dual_incremental: Vec<Duration>,
    /// Largest coordinate difference between the two arms' curves.
    pub max_disagreement: f64,
}

fn median(times: &[Duration]) -> Duration {
    let mut t = times.to_vec();
    t.sort();
    let k = t.len();
    if k == 0 {
        Duration::ZERO
    } else if k % 2 == 1 {
        t[k / 2]
    } else {
        (t[k / 2 - 1] + t[k / 2]) / 2
    }
}

impl BenchReport {
    pub fn median_normal(&self) -> Duration {
        median(&self.normal_equations)
    }

    pub fn median_dual(&self) -> Duration {
        median(&self.dual_incremental)
    }

    /// Normal-equations time over dual-incremental time.
    pub fn speedup(&self) -> f64 {
        self.median_normal().as_secs_f64() / self.median_dual().as_secs_f64().max(f64::MIN_POSITIVE)
    }
}

impl fmt::Display for BenchReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "segments: {}, repetitions: {}", self.segments, self.normal_equations.len())?;
        writeln!(f, "{:<18} {:>14} {:>14} {:>14}", "backend", "median [s]", "min [s]", "max [s]")?;
        for (name, times) in
            [("normal-equations", &self.normal_equations), ("dual-incremental", &self.dual_incremental)]
        {
            let min = times.iter().min().copied().unwrap_or_default();
            let max = times.iter().max().copied().unwrap_or_default();
            writeln!(
                f,
                "{:<18} {:>14.6} {:>14.6} {:>14.6}",
                name,
                median(times).as_secs_f64(),
                min.as_secs_f64(),
                max.as_secs_f64()
            )?;
        }
        writeln!(f, "speedup: {:.3}", self.speedup())?;
        write!(f, "max coordinate difference: {:.3e}", self.max_disagreement)
    }
}

fn run_arm(requests: &[ReductionRequest], backend: Backend) -> boxdeg::Result<(Duration, Vec<BezierCurve>)> {
    let options = SolverOptions::with_backend(backend);
    let start = Instant::now();
    let curves = requests.iter().map(|r| solve_boxed(r, options)).collect::<boxdeg::Result<Vec<_>>>()?;
    Ok((start.elapsed(), curves))
}

/// Times `reps` (at least one) repetitions of each backend.
pub fn run_bench(file: &CompositeCurveFile, reps: usize) -> boxdeg::Result<BenchReport> {
    let requests = file.segments.iter().map(|s| s.request()).collect::<boxdeg::Result<Vec<_>>>()?;
    let mut report = BenchReport {
        segments: requests.len(),
        normal_equations: Vec::new(),
        dual_incremental: Vec::new(),
        max_disagreement: 0.0,
    };
    // one untimed pass per arm so neither pays for cold caches and allocator growth
    run_arm(&requests, Backend::NormalEquations)?;
    run_arm(&requests, Backend::DualIncremental)?;
    for rep in 0..reps.max(1) {
        let (normal, dual) = if rep % 2 == 0 {
            let n = run_arm(&requests, Backend::NormalEquations)?;
            (n, run_arm(&requests, Backend::DualIncremental)?)
        } else {
            let d = run_arm(&requests, Backend::DualIncremental)?;
            (run_arm(&requests, Backend::NormalEquations)?, d)
        };
        report.normal_equations.push(normal.0);
        report.dual_incremental.push(dual.0);
        for (a, b) in normal.1.iter().zip(&dual.1) {
            for (p, q) in a.points().iter().zip(b.points()) {
                report.max_disagreement = report.max_disagreement.max((p.x - q.x).abs()).max((p.y - q.y).abs());
            }
        }
    }
    Ok(report)
}
