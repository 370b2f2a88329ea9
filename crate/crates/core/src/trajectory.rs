//! Raw GPS tracks and their conditioning into clean, uniformly sampled,
//! time-synchronized planar trajectories.
//!
//! The conditioning chain is outlier removal, gap interpolation, smoothing,
//! then pairwise synchronization onto a shared grid. Each step maps a
//! [`RawTrajectory`] to a [`RawTrajectory`]; [`synchronize`] produces the
//! planar [`EncounterCase`] the analysis modules consume.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::geodesy::{GeoPoint, PlanePoint, ProjectionContext};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentKind {
    Vehicle,
    EScooter,
}

impl fmt::Display for AgentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AgentKind::Vehicle => write!(f, "vehicle"),
            AgentKind::EScooter => write!(f, "escooter"),
        }
    }
}

/// Which platform carried the data acquisition system for this case.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dataset {
    VehicleCentered,
    EScooterCentered,
}

impl fmt::Display for Dataset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Dataset::VehicleCentered => write!(f, "vehicle_centered"),
            Dataset::EScooterCentered => write!(f, "escooter_centered"),
        }
    }
}

/// One timestamped geodetic sample. `t` is seconds from an arbitrary epoch;
/// altitude is carried through but ignored by every metric.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GpsFix {
    pub t: f64,
    pub pos: GeoPoint,
    pub alt: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TrajectoryError {
    /// A trajectory needs at least two fixes.
    TooFewFixes { len: usize },
    /// Timestamp at `index` does not strictly increase over its predecessor.
    NonMonotonicTimestamps { index: usize },
    /// Fewer than two fixes survived a conditioning step.
    Degenerate,
    /// Smoothing window must be odd and at least 1.
    InvalidWindow { window: usize },
    /// Interpolation or resampling step must be positive.
    InvalidStep { step: f64 },
    /// The two tracks share less than one second of time.
    NoOverlap { overlap_s: f64 },
    /// synchronize was handed tracks whose agent kinds do not match its roles.
    AgentMismatch { expected: AgentKind, got: AgentKind },
    /// Paired trajectories disagree on grid origin, step, length, or context.
    DesynchronizedPair,
    /// A fix failed geodetic validation or projection.
    Geodesy(crate::geodesy::GeodesyError),
}

impl fmt::Display for TrajectoryError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TrajectoryError::TooFewFixes { len } => {
                write!(f, "trajectory needs at least 2 fixes, got {len}")
            }
            TrajectoryError::NonMonotonicTimestamps { index } => {
                write!(f, "timestamp at index {index} does not strictly increase")
            }
            TrajectoryError::Degenerate => {
                write!(f, "fewer than 2 fixes survived conditioning")
            }
            TrajectoryError::InvalidWindow { window } => {
                write!(f, "smoothing window must be odd and >= 1, got {window}")
            }
            TrajectoryError::InvalidStep { step } => {
                write!(f, "time step must be positive and finite, got {step}")
            }
            TrajectoryError::NoOverlap { overlap_s } => {
                write!(f, "tracks overlap for {overlap_s:.3} s, need at least 1 s")
            }
            TrajectoryError::AgentMismatch { expected, got } => {
                write!(f, "expected a {expected} track, got {got}")
            }
            TrajectoryError::DesynchronizedPair => {
                write!(f, "paired trajectories are not on a shared grid")
            }
            TrajectoryError::Geodesy(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for TrajectoryError {}

impl From<crate::geodesy::GeodesyError> for TrajectoryError {
    fn from(e: crate::geodesy::GeodesyError) -> Self {
        TrajectoryError::Geodesy(e)
    }
}

/// An ordered geodetic track for one agent: at least two fixes, strictly
/// increasing timestamps.
#[derive(Debug, Clone, PartialEq)]
pub struct RawTrajectory {
    agent: AgentKind,
    fixes: Vec<GpsFix>,
}

impl RawTrajectory {
    // Negated comparison so NaN timestamps are rejected too.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn new(agent: AgentKind, fixes: Vec<GpsFix>) -> Result<Self, TrajectoryError> {
        if fixes.len() < 2 {
            return Err(TrajectoryError::TooFewFixes { len: fixes.len() });
        }
        for (i, pair) in fixes.windows(2).enumerate() {
            if !(pair[1].t > pair[0].t) {
                return Err(TrajectoryError::NonMonotonicTimestamps { index: i + 1 });
            }
        }
        Ok(Self { agent, fixes })
    }

    pub fn agent(&self) -> AgentKind {
        self.agent
    }

    pub fn fixes(&self) -> &[GpsFix] {
        &self.fixes
    }

    pub fn start_time(&self) -> f64 {
        self.fixes[0].t
    }

    pub fn end_time(&self) -> f64 {
        self.fixes[self.fixes.len() - 1].t
    }

    /// Position at time `t` by linear interpolation between bracketing fixes.
    /// `t` must lie within the track's time span.
    fn position_at(&self, t: f64) -> GeoPoint {
        debug_assert!(t >= self.start_time() - 1e-9 && t <= self.end_time() + 1e-9);
        let idx = match self
            .fixes
            .binary_search_by(|fx| fx.t.total_cmp(&t))
        {
            Ok(i) => return self.fixes[i].pos,
            Err(i) => i,
        };
        if idx == 0 {
            return self.fixes[0].pos;
        }
        if idx >= self.fixes.len() {
            return self.fixes[self.fixes.len() - 1].pos;
        }
        let a = &self.fixes[idx - 1];
        let b = &self.fixes[idx];
        let frac = (t - a.t) / (b.t - a.t);
        GeoPoint {
            lat: a.pos.lat + frac * (b.pos.lat - a.pos.lat),
            lon: a.pos.lon + frac * (b.pos.lon - a.pos.lon),
        }
    }
}

/// Drop fixes whose implied speed from the previous retained fix exceeds
/// `max_speed_mps`. The first fix is always retained.
pub fn remove_outliers(
    raw: &RawTrajectory,
    max_speed_mps: f64,
) -> Result<RawTrajectory, TrajectoryError> {
    let mut kept: Vec<GpsFix> = Vec::with_capacity(raw.fixes.len());
    kept.push(raw.fixes[0]);
    for fix in &raw.fixes[1..] {
        let prev = kept.last().unwrap();
        let speed = crate::geodesy::haversine_distance(prev.pos, fix.pos) / (fix.t - prev.t);
        if speed <= max_speed_mps {
            kept.push(*fix);
        }
    }
    if kept.len() < 2 {
        return Err(TrajectoryError::Degenerate);
    }
    RawTrajectory::new(raw.agent, kept)
}

/// Fill inter-fix intervals up to `max_gap_s` with linearly interpolated
/// fixes at spacing at most `target_dt`. Intervals longer than `max_gap_s`
/// split the track; the longest contiguous segment (earliest on ties) is kept.
pub fn interpolate_gaps(
    raw: &RawTrajectory,
    target_dt: f64,
    max_gap_s: f64,
) -> Result<RawTrajectory, TrajectoryError> {
    if !(target_dt > 0.0 && target_dt.is_finite()) {
        return Err(TrajectoryError::InvalidStep { step: target_dt });
    }

    // Segment boundaries at gaps > max_gap_s.
    let fixes = &raw.fixes;
    let mut segments: Vec<(usize, usize)> = Vec::new(); // inclusive ranges
    let mut start = 0;
    for i in 1..fixes.len() {
        if fixes[i].t - fixes[i - 1].t > max_gap_s {
            segments.push((start, i - 1));
            start = i;
        }
    }
    segments.push((start, fixes.len() - 1));

    let (seg_start, seg_end) = segments
        .iter()
        .copied()
        .max_by(|a, b| {
            let dur_a = fixes[a.1].t - fixes[a.0].t;
            let dur_b = fixes[b.1].t - fixes[b.0].t;
            // Strictly-greater comparison keeps the earlier segment on ties.
            dur_a.partial_cmp(&dur_b).unwrap()
        })
        .unwrap();
    let segment = &fixes[seg_start..=seg_end];
    if segment.len() < 2 {
        return Err(TrajectoryError::Degenerate);
    }

    let mut out: Vec<GpsFix> = Vec::with_capacity(segment.len());
    for pair in segment.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        out.push(*a);
        let span = b.t - a.t;
        // Small slack so an interval already at target_dt stays untouched.
        let pieces = libm::ceil(span / target_dt - 1e-9) as usize;
        for k in 1..pieces {
            let frac = k as f64 / pieces as f64;
            out.push(GpsFix {
                t: a.t + frac * span,
                pos: GeoPoint {
                    lat: a.pos.lat + frac * (b.pos.lat - a.pos.lat),
                    lon: a.pos.lon + frac * (b.pos.lon - a.pos.lon),
                },
                alt: match (a.alt, b.alt) {
                    (Some(ha), Some(hb)) => Some(ha + frac * (hb - ha)),
                    _ => None,
                },
            });
        }
    }
    out.push(segment[segment.len() - 1]);
    RawTrajectory::new(raw.agent, out)
}

/// Centered moving average of coordinates with an odd `window`, shrinking
/// symmetrically near the endpoints so linear tracks are fixed points.
/// Timestamps and altitudes are unchanged.
pub fn smooth(raw: &RawTrajectory, window: usize) -> Result<RawTrajectory, TrajectoryError> {
    if window == 0 || window.is_multiple_of(2) {
        return Err(TrajectoryError::InvalidWindow { window });
    }
    if window == 1 {
        return Ok(raw.clone());
    }
    let n = raw.fixes.len();
    let half = window / 2;
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let h = half.min(i).min(n - 1 - i);
        // Average deviations from the center fix, not absolute coordinates:
        // the large common offset would otherwise swamp the sum's precision.
        let c = raw.fixes[i].pos;
        let mut dlat = 0.0;
        let mut dlon = 0.0;
        for fix in &raw.fixes[i - h..=i + h] {
            dlat += fix.pos.lat - c.lat;
            dlon += fix.pos.lon - c.lon;
        }
        let m = (2 * h + 1) as f64;
        out.push(GpsFix {
            t: raw.fixes[i].t,
            pos: GeoPoint {
                lat: c.lat + dlat / m,
                lon: c.lon + dlon / m,
            },
            alt: raw.fixes[i].alt,
        });
    }
    RawTrajectory::new(raw.agent, out)
}

/// Conditioned planar track on a uniform grid: sample `i` is at
/// `t0 + i * dt` in the shared [`ProjectionContext`].
#[derive(Debug, Clone, PartialEq)]
pub struct CleanTrajectory {
    agent: AgentKind,
    t0: f64,
    dt: f64,
    points: Vec<PlanePoint>,
    ctx: ProjectionContext,
}

impl CleanTrajectory {
    pub fn new(
        agent: AgentKind,
        t0: f64,
        dt: f64,
        points: Vec<PlanePoint>,
        ctx: ProjectionContext,
    ) -> Result<Self, TrajectoryError> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(TrajectoryError::InvalidStep { step: dt });
        }
        if points.len() < 2 {
            return Err(TrajectoryError::TooFewFixes { len: points.len() });
        }
        if points.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
            return Err(TrajectoryError::Degenerate);
        }
        Ok(Self {
            agent,
            t0,
            dt,
            points,
            ctx,
        })
    }

    pub fn agent(&self) -> AgentKind {
        self.agent
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn points(&self) -> &[PlanePoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn ctx(&self) -> &ProjectionContext {
        &self.ctx
    }

    pub fn sample_time(&self, i: usize) -> f64 {
        self.t0 + i as f64 * self.dt
    }
}

/// A synchronized vehicle / e-scooter pair plus identity metadata. Both
/// trajectories share `t0`, `dt`, length, and projection context.
#[derive(Debug, Clone, PartialEq)]
pub struct EncounterCase {
    pub id: String,
    pub dataset: Dataset,
    vehicle: CleanTrajectory,
    escooter: CleanTrajectory,
}

impl EncounterCase {
    pub fn new(
        id: String,
        dataset: Dataset,
        vehicle: CleanTrajectory,
        escooter: CleanTrajectory,
    ) -> Result<Self, TrajectoryError> {
        if vehicle.t0 != escooter.t0
            || vehicle.dt != escooter.dt
            || vehicle.len() != escooter.len()
            || vehicle.ctx != escooter.ctx
        {
            return Err(TrajectoryError::DesynchronizedPair);
        }
        Ok(Self {
            id,
            dataset,
            vehicle,
            escooter,
        })
    }

    pub fn vehicle(&self) -> &CleanTrajectory {
        &self.vehicle
    }

    pub fn escooter(&self) -> &CleanTrajectory {
        &self.escooter
    }

    pub fn t0(&self) -> f64 {
        self.vehicle.t0
    }

    pub fn dt(&self) -> f64 {
        self.vehicle.dt
    }

    /// Number of shared frames.
    pub fn len(&self) -> usize {
        self.vehicle.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vehicle.is_empty()
    }

    pub fn frame_time(&self, i: usize) -> f64 {
        self.vehicle.sample_time(i)
    }
}

/// Resample both tracks by linear interpolation onto the uniform grid
/// covering their temporal overlap at `hz`, and project them into a shared
/// plane anchored at the joint centroid of the resampled fixes.
pub fn synchronize(
    id: &str,
    dataset: Dataset,
    vehicle: &RawTrajectory,
    escooter: &RawTrajectory,
    hz: f64,
) -> Result<EncounterCase, TrajectoryError> {
    if vehicle.agent() != AgentKind::Vehicle {
        return Err(TrajectoryError::AgentMismatch {
            expected: AgentKind::Vehicle,
            got: vehicle.agent(),
        });
    }
    if escooter.agent() != AgentKind::EScooter {
        return Err(TrajectoryError::AgentMismatch {
            expected: AgentKind::EScooter,
            got: escooter.agent(),
        });
    }
    if !(hz > 0.0 && hz.is_finite()) {
        return Err(TrajectoryError::InvalidStep { step: hz });
    }

    let t_lo = vehicle.start_time().max(escooter.start_time());
    let t_hi = vehicle.end_time().min(escooter.end_time());
    let overlap = t_hi - t_lo;
    if overlap < 1.0 {
        return Err(TrajectoryError::NoOverlap { overlap_s: overlap });
    }

    let dt = 1.0 / hz;
    let frames = libm::floor(overlap * hz + 1e-9) as usize + 1;
    let grid = |k: usize| t_lo + k as f64 * dt;

    let resample = |traj: &RawTrajectory| -> Vec<GeoPoint> {
        (0..frames).map(|k| traj.position_at(grid(k))).collect()
    };
    let geo_v = resample(vehicle);
    let geo_e = resample(escooter);

    let ctx = ProjectionContext::from_centroid(geo_v.iter().chain(geo_e.iter()).copied())
        .expect("non-empty grid");

    let project = |geo: &[GeoPoint]| -> Result<Vec<PlanePoint>, TrajectoryError> {
        geo.iter().map(|g| Ok(ctx.to_plane(*g)?)).collect()
    };

    let clean_v = CleanTrajectory::new(AgentKind::Vehicle, t_lo, dt, project(&geo_v)?, ctx)?;
    let clean_e = CleanTrajectory::new(AgentKind::EScooter, t_lo, dt, project(&geo_e)?, ctx)?;
    EncounterCase::new(String::from(id), dataset, clean_v, clean_e)
}
