//! Aggregation of trials into representative-step curves and tables.
//!
//! Problems are grouped by the number of errors made before the first
//! reward (0 to 4). Within a group every problem is aligned on the same
//! positions: its search trials, CO1 included, followed by the first three
//! repetition trials.

mod replay;
mod report;

pub use replay::{replay_simulate, ContributionTrace, Replay, TracePoint};
pub use report::{rt_center, write_reports, ReportFiles};

use serde::{Deserialize, Serialize};

use crate::task::{Phase, TrialRecord};

/// Largest error count that gets a group.
pub const MAX_ERRORS: u32 = 4;

/// Repetition trials kept per problem.
pub const REPETITIONS_ANALYZED: usize = 3;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MeanSem {
    pub mean: f64,
    /// Standard error from the sample standard deviation; 0 for fewer than
    /// two values.
    pub sem: f64,
    pub n: usize,
}

pub fn mean_sem(xs: &[f64]) -> MeanSem {
    let n = xs.len();
    if n == 0 {
        return MeanSem { mean: f64::NAN, sem: f64::NAN, n };
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    let sem = if n < 2 {
        0.0
    } else {
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        (var / n as f64).sqrt()
    };
    MeanSem { mean, sem, n }
}

/// Average per-replicate statistics: means and sems are averaged, counts
/// summed.
fn pool(stats: &[MeanSem]) -> MeanSem {
    let k = stats.len() as f64;
    MeanSem {
        mean: stats.iter().map(|s| s.mean).sum::<f64>() / k,
        sem: stats.iter().map(|s| s.sem).sum::<f64>() / k,
        n: stats.iter().map(|s| s.n).sum(),
    }
}

/// A representative position within a group.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Position {
    pub phase: Phase,
    /// Index within the phase; CO1 is the last search position.
    pub index: u32,
}

/// Positions of a group with `errors` errors.
pub fn positions(errors: u32) -> Vec<Position> {
    let search = (0..=errors).map(|index| Position { phase: Phase::Search, index });
    let rep = (0..REPETITIONS_ANALYZED as u32).map(|index| Position { phase: Phase::Repetition, index });
    search.chain(rep).collect()
}

/// Problems of each group, cut to their representative trials. A problem
/// qualifies when it has a CO1 after at most [`MAX_ERRORS`] errors and at
/// least three trials after it.
pub fn group_problems<'a, T>(problems: &[&'a [T]], record: impl Fn(&T) -> &TrialRecord) -> Vec<Vec<&'a [T]>> {
    let mut groups = vec![Vec::new(); MAX_ERRORS as usize + 1];
    for p in problems {
        let Some(first) = p.first() else { continue };
        let Some(k) = record(first).errors_in_search else { continue };
        let len = k as usize + 1 + REPETITIONS_ANALYZED;
        if k <= MAX_ERRORS && p.len() >= len {
            groups[k as usize].push(&p[..len]);
        }
    }
    groups
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub position: Position,
    pub performance: MeanSem,
    /// Present when every trial at this position has a reaction time.
    pub rt: Option<MeanSem>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupCurve {
    pub errors: u32,
    pub n_problems: usize,
    pub points: Vec<CurvePoint>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RepresentativeCurve {
    /// Groups in increasing error count; empty groups are left out.
    pub groups: Vec<GroupCurve>,
    pub notes: Vec<String>,
}

impl RepresentativeCurve {
    pub fn group(&self, errors: u32) -> Option<&GroupCurve> {
        self.groups.iter().find(|g| g.errors == errors)
    }

    /// Fraction of included problems in each group.
    pub fn densities(&self) -> Vec<(u32, f64)> {
        let total: usize = self.groups.iter().map(|g| g.n_problems).sum();
        self.groups.iter().map(|g| (g.errors, g.n_problems as f64 / total as f64)).collect()
    }

    /// `((errors, position), mean rt)` for every point with a reaction time.
    pub fn rt_points(&self) -> Vec<((u32, Position), f64)> {
        self.groups
            .iter()
            .flat_map(|g| g.points.iter().filter_map(move |p| p.rt.map(|rt| ((g.errors, p.position), rt.mean))))
            .collect()
    }

    /// Average curves computed on independent replicates.
    pub fn pool(reps: &[RepresentativeCurve]) -> RepresentativeCurve {
        let mut groups = Vec::new();
        let mut notes = Vec::new();
        for k in 0..=MAX_ERRORS {
            let present: Vec<&GroupCurve> = reps.iter().filter_map(|r| r.group(k)).collect();
            if present.is_empty() {
                notes.push(empty_note(k));
                continue;
            }
            let points = positions(k)
                .into_iter()
                .enumerate()
                .map(|(i, position)| {
                    let perf: Vec<MeanSem> = present.iter().map(|g| g.points[i].performance).collect();
                    let rts: Option<Vec<MeanSem>> = present.iter().map(|g| g.points[i].rt).collect();
                    CurvePoint { position, performance: pool(&perf), rt: rts.map(|r| pool(&r)) }
                })
                .collect();
            groups.push(GroupCurve { errors: k, n_problems: present.iter().map(|g| g.n_problems).sum(), points });
        }
        RepresentativeCurve { groups, notes }
    }
}

fn empty_note(k: u32) -> String {
    format!("no problems with {k} errors")
}

/// Representative-step curve of one set of problems.
pub fn representative_steps(problems: &[&[TrialRecord]]) -> RepresentativeCurve {
    curve_of(problems, |t| t)
}

pub(crate) fn curve_of<T>(problems: &[&[T]], record: impl Fn(&T) -> &TrialRecord + Copy) -> RepresentativeCurve {
    let mut curve = RepresentativeCurve::default();
    for (k, group) in group_problems(problems, record).into_iter().enumerate() {
        let k = k as u32;
        if group.is_empty() {
            curve.notes.push(empty_note(k));
            continue;
        }
        let points = positions(k)
            .into_iter()
            .enumerate()
            .map(|(i, position)| {
                let perf: Vec<f64> = group.iter().map(|p| record(&p[i]).reward()).collect();
                let rts: Option<Vec<f64>> = group.iter().map(|p| record(&p[i]).rt).collect();
                CurvePoint { position, performance: mean_sem(&perf), rt: rts.map(|r| mean_sem(&r)) }
            })
            .collect();
        curve.groups.push(GroupCurve { errors: k, n_problems: group.len(), points });
    }
    curve
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerformanceRow {
    pub errors: u32,
    pub n_problems: usize,
    pub density: f64,
    /// Mean reward on repetition trials 1 to 3.
    pub repetitions: Vec<MeanSem>,
}

/// Mean reward on the first three repetition trials per error group, with
/// the share of problems in each group.
pub fn performance_by_error_count(problems: &[&[TrialRecord]]) -> Vec<PerformanceRow> {
    let groups = group_problems(problems, |t| t);
    let total: usize = groups.iter().map(Vec::len).sum();
    groups
        .iter()
        .enumerate()
        .filter(|(_, g)| !g.is_empty())
        .map(|(k, g)| {
            let repetitions = (0..REPETITIONS_ANALYZED)
                .map(|j| {
                    let xs: Vec<f64> = g.iter().map(|p| p[k + 1 + j].reward()).collect();
                    mean_sem(&xs)
                })
                .collect();
            PerformanceRow { errors: k as u32, n_problems: g.len(), density: g.len() as f64 / total as f64, repetitions }
        })
        .collect()
}
