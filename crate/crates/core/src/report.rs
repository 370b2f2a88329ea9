//! Corpus-level aggregation: per-variable statistics, conflict share, mTTC
//! histogram, risk and geometry distributions, and the conflict-vs-baseline
//! comparison. Aggregation is merge-associative so partial summaries built
//! in any grouping combine into the same corpus totals.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::conflict::RiskLevel;
use crate::geometry::GeometryClass;
use crate::kinematics::mps_to_mph;
use crate::trajectory::Dataset;

/// Scalar results of one analyzed case.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseMetrics {
    pub id: String,
    pub dataset: Dataset,
    pub min_distance: f64,
    pub vehicle_median_speed: f64,
    pub escooter_median_speed: f64,
    pub min_gap_time: Option<f64>,
    pub mttc: Option<f64>,
    pub is_potential_conflict: bool,
    pub risk: Option<RiskLevel>,
    pub geometry: Option<GeometryClass>,
}

/// Streaming (count, sum, min, max) accumulator for one variable. Values
/// enter one at a time or by merging another accumulator; the mean is
/// derived on read so merges stay associative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarStats {
    pub count: u64,
    pub sum: f64,
    pub min: f64,
    pub max: f64,
}

impl Default for VarStats {
    fn default() -> Self {
        Self {
            count: 0,
            sum: 0.0,
            min: f64::INFINITY,
            max: f64::NEG_INFINITY,
        }
    }
}

impl VarStats {
    pub fn add(&mut self, v: f64) {
        self.count += 1;
        self.sum += v;
        if v < self.min {
            self.min = v;
        }
        if v > self.max {
            self.max = v;
        }
    }

    pub fn add_opt(&mut self, v: Option<f64>) {
        if let Some(v) = v {
            self.add(v);
        }
    }

    pub fn merge(&self, other: &Self) -> Self {
        Self {
            count: self.count + other.count,
            sum: self.sum + other.sum,
            min: if self.min < other.min { self.min } else { other.min },
            max: if self.max > other.max { self.max } else { other.max },
        }
    }

    pub fn mean(&self) -> Option<f64> {
        (self.count > 0).then(|| self.sum / self.count as f64)
    }

    /// Min/mean/max with a unit conversion applied, e.g. m/s to mph.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            count: self.count,
            sum: self.sum * factor,
            min: self.min * factor,
            max: self.max * factor,
        }
    }

    pub fn summary(&self) -> VarSummary {
        VarSummary {
            count: self.count,
            mean: self.mean(),
            min: (self.count > 0).then_some(self.min),
            max: (self.count > 0).then_some(self.max),
        }
    }
}

/// Read-only view of a [`VarStats`] for serialized reports.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarSummary {
    pub count: u64,
    pub mean: Option<f64>,
    pub min: Option<f64>,
    pub max: Option<f64>,
}

/// Per-group accumulators behind the conflict-vs-baseline comparison.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct GroupStats {
    pub cases: u64,
    pub min_distance: VarStats,
    pub vehicle_median_speed: VarStats,
    pub escooter_median_speed: VarStats,
    pub min_gap_time: VarStats,
}

impl GroupStats {
    fn add(&mut self, case: &CaseMetrics) {
        self.cases += 1;
        self.min_distance.add(case.min_distance);
        self.vehicle_median_speed.add(case.vehicle_median_speed);
        self.escooter_median_speed.add(case.escooter_median_speed);
        self.min_gap_time.add_opt(case.min_gap_time);
    }

    fn merge(&self, other: &Self) -> Self {
        Self {
            cases: self.cases + other.cases,
            min_distance: self.min_distance.merge(&other.min_distance),
            vehicle_median_speed: self.vehicle_median_speed.merge(&other.vehicle_median_speed),
            escooter_median_speed: self
                .escooter_median_speed
                .merge(&other.escooter_median_speed),
            min_gap_time: self.min_gap_time.merge(&other.min_gap_time),
        }
    }
}

/// Counts per geometry class, in [`GeometryClass::ALL`] order.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct GeometryCounts {
    pub counts: [u64; 4],
    pub unclassified: u64,
}

impl GeometryCounts {
    fn add(&mut self, geometry: Option<GeometryClass>) {
        match geometry {
            Some(g) => {
                let i = GeometryClass::ALL.iter().position(|c| *c == g).unwrap();
                self.counts[i] += 1;
            }
            None => self.unclassified += 1,
        }
    }

    fn merge(&self, other: &Self) -> Self {
        let mut counts = self.counts;
        for (c, o) in counts.iter_mut().zip(other.counts) {
            *c += o;
        }
        Self {
            counts,
            unclassified: self.unclassified + other.unclassified,
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum::<u64>() + self.unclassified
    }

    /// Percentage of all cases in this scope (classified or not) falling in
    /// `class`. The denominator includes unclassified cases so that shares
    /// plus the unclassified share total 100.
    pub fn percentage(&self, class: GeometryClass) -> f64 {
        let i = GeometryClass::ALL.iter().position(|c| *c == class).unwrap();
        percentage(self.counts[i], self.total())
    }

    pub fn unclassified_percentage(&self) -> f64 {
        percentage(self.unclassified, self.total())
    }
}

fn percentage(count: u64, total: u64) -> f64 {
    if total == 0 {
        0.0
    } else {
        count as f64 * 100.0 / total as f64
    }
}

/// mTTC histogram bin edges in seconds; the last bin is open-ended.
pub const MTTC_BIN_EDGES: [f64; 3] = [0.0, 2.0, 4.0];

/// Bin `values` at `bin_width` seconds into `n_bins` counts, the last bin
/// collecting everything beyond the final edge.
pub fn histogram(values: &[f64], bin_width: f64, n_bins: usize) -> Vec<u64> {
    let mut bins = alloc::vec![0u64; n_bins];
    for &v in values {
        let idx = if v < 0.0 {
            0
        } else {
            ((v / bin_width) as usize).min(n_bins - 1)
        };
        bins[idx] += 1;
    }
    bins
}

/// Mergeable corpus aggregate over [`CaseMetrics`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateReport {
    pub total_cases: u64,
    pub conflict_cases: u64,
    pub min_distance: VarStats,
    pub vehicle_median_speed: VarStats,
    pub escooter_median_speed: VarStats,
    /// Over cases with a defined minimum gap time only.
    pub min_gap_time: VarStats,
    /// Over conflict cases with a defined mTTC only.
    pub mttc: VarStats,
    /// Conflict-case mTTC counts for bins [0,2), [2,4), [4,∞) seconds.
    pub mttc_histogram: [u64; 3],
    /// Conflict-case counts at High, Medium, Low risk.
    pub risk_distribution: [u64; 3],
    pub geometry_all: GeometryCounts,
    pub geometry_conflict: GeometryCounts,
    pub conflict_group: GroupStats,
    pub baseline_group: GroupStats,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportError {
    EmptyCorpus,
}

impl fmt::Display for ReportError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReportError::EmptyCorpus => write!(f, "no cases to aggregate"),
        }
    }
}

impl core::error::Error for ReportError {}

impl AggregateReport {
    fn empty() -> Self {
        Self {
            total_cases: 0,
            conflict_cases: 0,
            min_distance: VarStats::default(),
            vehicle_median_speed: VarStats::default(),
            escooter_median_speed: VarStats::default(),
            min_gap_time: VarStats::default(),
            mttc: VarStats::default(),
            mttc_histogram: [0; 3],
            risk_distribution: [0; 3],
            geometry_all: GeometryCounts::default(),
            geometry_conflict: GeometryCounts::default(),
            conflict_group: GroupStats::default(),
            baseline_group: GroupStats::default(),
        }
    }

    fn add(&mut self, case: &CaseMetrics) {
        self.total_cases += 1;
        self.min_distance.add(case.min_distance);
        self.vehicle_median_speed.add(case.vehicle_median_speed);
        self.escooter_median_speed.add(case.escooter_median_speed);
        self.min_gap_time.add_opt(case.min_gap_time);
        self.geometry_all.add(case.geometry);

        if case.is_potential_conflict {
            self.conflict_cases += 1;
            self.conflict_group.add(case);
            self.geometry_conflict.add(case.geometry);
            if let Some(mttc) = case.mttc {
                self.mttc.add(mttc);
                let idx = if mttc < MTTC_BIN_EDGES[1] {
                    0
                } else if mttc < MTTC_BIN_EDGES[2] {
                    1
                } else {
                    2
                };
                self.mttc_histogram[idx] += 1;
            }
            if let Some(risk) = case.risk {
                let idx = match risk {
                    RiskLevel::High => 0,
                    RiskLevel::Medium => 1,
                    RiskLevel::Low => 2,
                };
                self.risk_distribution[idx] += 1;
            }
        } else {
            self.baseline_group.add(case);
        }
    }

    pub fn merge(&self, other: &Self) -> Self {
        let mut hist = self.mttc_histogram;
        for (h, o) in hist.iter_mut().zip(other.mttc_histogram) {
            *h += o;
        }
        let mut risk = self.risk_distribution;
        for (r, o) in risk.iter_mut().zip(other.risk_distribution) {
            *r += o;
        }
        Self {
            total_cases: self.total_cases + other.total_cases,
            conflict_cases: self.conflict_cases + other.conflict_cases,
            min_distance: self.min_distance.merge(&other.min_distance),
            vehicle_median_speed: self.vehicle_median_speed.merge(&other.vehicle_median_speed),
            escooter_median_speed: self
                .escooter_median_speed
                .merge(&other.escooter_median_speed),
            min_gap_time: self.min_gap_time.merge(&other.min_gap_time),
            mttc: self.mttc.merge(&other.mttc),
            mttc_histogram: hist,
            risk_distribution: risk,
            geometry_all: self.geometry_all.merge(&other.geometry_all),
            geometry_conflict: self.geometry_conflict.merge(&other.geometry_conflict),
            conflict_group: self.conflict_group.merge(&other.conflict_group),
            baseline_group: self.baseline_group.merge(&other.baseline_group),
        }
    }

    pub fn conflict_share(&self) -> f64 {
        if self.total_cases == 0 {
            0.0
        } else {
            self.conflict_cases as f64 / self.total_cases as f64
        }
    }

    /// Cases whose minimum gap time was undefined (no usable crossing) and
    /// conflict cases whose mTTC was undefined, skipped from the averages.
    pub fn skipped_min_gap(&self) -> u64 {
        self.total_cases - self.min_gap_time.count
    }

    pub fn skipped_mttc(&self) -> u64 {
        self.conflict_cases - self.mttc.count
    }

    pub fn summary(&self) -> CorpusSummary {
        CorpusSummary {
            total_cases: self.total_cases,
            conflict_cases: self.conflict_cases,
            baseline_cases: self.total_cases - self.conflict_cases,
            conflict_share_percent: percentage(self.conflict_cases, self.total_cases),
            min_distance_m: self.min_distance.summary(),
            vehicle_median_speed_mps: self.vehicle_median_speed.summary(),
            vehicle_median_speed_mph: self.vehicle_median_speed.scaled(mps_to_mph(1.0)).summary(),
            escooter_median_speed_mps: self.escooter_median_speed.summary(),
            escooter_median_speed_mph: self
                .escooter_median_speed
                .scaled(mps_to_mph(1.0))
                .summary(),
            min_gap_time_s: self.min_gap_time.summary(),
            skipped_min_gap_cases: self.skipped_min_gap(),
            mttc_s: self.mttc.summary(),
            skipped_mttc_cases: self.skipped_mttc(),
            mttc_histogram: MttcHistogram {
                bin_edges_s: MTTC_BIN_EDGES,
                counts: self.mttc_histogram,
            },
            risk_distribution: RiskDistribution {
                high: self.risk_distribution[0],
                medium: self.risk_distribution[1],
                low: self.risk_distribution[2],
            },
            geometry_all: GeometryShares::from_counts(&self.geometry_all),
            geometry_conflict: GeometryShares::from_counts(&self.geometry_conflict),
            comparison: ComparisonTable::from_groups(&self.conflict_group, &self.baseline_group),
        }
    }
}

/// Per-variable averages for one comparison group, speeds in mph to match
/// the usual reporting convention.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupAverages {
    pub cases: u64,
    pub avg_min_distance_m: Option<f64>,
    pub avg_vehicle_median_speed_mph: Option<f64>,
    pub avg_escooter_median_speed_mph: Option<f64>,
    pub avg_min_gap_time_s: Option<f64>,
    pub min_gap_time_cases: u64,
}

impl GroupAverages {
    fn from_stats(g: &GroupStats) -> Option<Self> {
        (g.cases > 0).then(|| Self {
            cases: g.cases,
            avg_min_distance_m: g.min_distance.mean(),
            avg_vehicle_median_speed_mph: g.vehicle_median_speed.mean().map(mps_to_mph),
            avg_escooter_median_speed_mph: g.escooter_median_speed.mean().map(mps_to_mph),
            avg_min_gap_time_s: g.min_gap_time.mean(),
            min_gap_time_cases: g.min_gap_time.count,
        })
    }
}

/// Conflict-vs-baseline averages; an empty group is `None` rather than a
/// row of zeros.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparisonTable {
    pub conflict: Option<GroupAverages>,
    pub baseline: Option<GroupAverages>,
}

impl ComparisonTable {
    fn from_groups(conflict: &GroupStats, baseline: &GroupStats) -> Self {
        Self {
            conflict: GroupAverages::from_stats(conflict),
            baseline: GroupAverages::from_stats(baseline),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MttcHistogram {
    pub bin_edges_s: [f64; 3],
    pub counts: [u64; 3],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskDistribution {
    pub high: u64,
    pub medium: u64,
    pub low: u64,
}

/// Geometry counts plus percentage shares; the denominator is every case in
/// scope, so class shares and the unclassified share sum to 100.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometryShares {
    pub parallel_same_direction: ClassShare,
    pub parallel_opposite_direction: ClassShare,
    pub crossing_from_left: ClassShare,
    pub crossing_from_right: ClassShare,
    pub unclassified: ClassShare,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassShare {
    pub count: u64,
    pub percent: f64,
}

impl GeometryShares {
    fn from_counts(g: &GeometryCounts) -> Self {
        let share = |class| ClassShare {
            count: g.counts[GeometryClass::ALL.iter().position(|c| *c == class).unwrap()],
            percent: g.percentage(class),
        };
        Self {
            parallel_same_direction: share(GeometryClass::ParallelSameDirection),
            parallel_opposite_direction: share(GeometryClass::ParallelOppositeDirection),
            crossing_from_left: share(GeometryClass::CrossingFromLeft),
            crossing_from_right: share(GeometryClass::CrossingFromRight),
            unclassified: ClassShare {
                count: g.unclassified,
                percent: g.unclassified_percentage(),
            },
        }
    }
}

/// Serializable corpus-level view with derived means, shares, and unit
/// conversions; this is what lands in report.json.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusSummary {
    pub total_cases: u64,
    pub conflict_cases: u64,
    pub baseline_cases: u64,
    pub conflict_share_percent: f64,
    pub min_distance_m: VarSummary,
    pub vehicle_median_speed_mps: VarSummary,
    pub vehicle_median_speed_mph: VarSummary,
    pub escooter_median_speed_mps: VarSummary,
    pub escooter_median_speed_mph: VarSummary,
    pub min_gap_time_s: VarSummary,
    pub skipped_min_gap_cases: u64,
    pub mttc_s: VarSummary,
    pub skipped_mttc_cases: u64,
    pub mttc_histogram: MttcHistogram,
    pub risk_distribution: RiskDistribution,
    pub geometry_all: GeometryShares,
    pub geometry_conflict: GeometryShares,
    pub comparison: ComparisonTable,
}

/// Aggregate a nonempty corpus.
pub fn summarize(cases: &[CaseMetrics]) -> Result<AggregateReport, ReportError> {
    if cases.is_empty() {
        return Err(ReportError::EmptyCorpus);
    }
    let mut report = AggregateReport::empty();
    for case in cases {
        report.add(case);
    }
    Ok(report)
}

/// Conflict-vs-baseline group averages; an empty group is marked `None`.
pub fn compare_conflict_baseline(cases: &[CaseMetrics]) -> Result<ComparisonTable, ReportError> {
    Ok(summarize(cases)?.summary().comparison)
}

/// Geometry distributions over all cases and over conflict cases only.
pub fn geometry_histogram(
    cases: &[CaseMetrics],
) -> Result<(GeometryShares, GeometryShares), ReportError> {
    let report = summarize(cases)?;
    Ok((
        GeometryShares::from_counts(&report.geometry_all),
        GeometryShares::from_counts(&report.geometry_conflict),
    ))
}
