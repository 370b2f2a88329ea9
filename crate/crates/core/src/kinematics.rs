//! Per-frame speed/heading estimation and the per-case scalar variables:
//! median speeds and closest distance.

use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::geodesy::{normalize_deg, PlanePoint};
use crate::trajectory::{CleanTrajectory, EncounterCase};

/// Below this speed an agent is treated as stationary: its heading is held
/// from the last moving frame and it contributes no coast trajectory.
pub const STATIONARY_EPS_MPS: f64 = 0.1;

/// Exact miles-per-hour per meter-per-second.
pub const MPS_TO_MPH: f64 = 2.2369362921;

pub fn mps_to_mph(v: f64) -> f64 {
    v * MPS_TO_MPH
}

/// Dynamic state of one agent at one frame. `heading` is a compass angle in
/// degrees, `[0, 360)`, 0 = north, 90 = east; it is `None` until the agent
/// has moved at least once (stationary frames carry the last moving value).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KinematicState {
    pub t: f64,
    pub pos: PlanePoint,
    pub speed: f64,
    pub heading: Option<f64>,
}

/// Unit vector (east, north) for a compass heading in degrees.
pub fn heading_unit(heading_deg: f64) -> (f64, f64) {
    let r = heading_deg.to_radians();
    (libm::sin(r), libm::cos(r))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KinematicsError {
    EmptyInput,
}

impl fmt::Display for KinematicsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KinematicsError::EmptyInput => write!(f, "empty state list"),
        }
    }
}

impl core::error::Error for KinematicsError {}

/// Backward-difference state estimates: `speed_i = |p_i - p_{i-1}| / dt`,
/// heading from the same displacement. State 0 copies state 1's speed and
/// heading. Frames slower than `stationary_eps_mps` hold the last defined
/// heading, or none if the agent has not moved yet.
pub fn estimate_states(traj: &CleanTrajectory, stationary_eps_mps: f64) -> Vec<KinematicState> {
    let pts = traj.points();
    let dt = traj.dt();
    let n = pts.len();
    let mut states = Vec::with_capacity(n);
    let mut last_heading: Option<f64> = None;

    // Placeholder for state 0, overwritten below from state 1.
    states.push(KinematicState {
        t: traj.sample_time(0),
        pos: pts[0],
        speed: 0.0,
        heading: None,
    });

    for i in 1..n {
        let dx = pts[i].x - pts[i - 1].x;
        let dy = pts[i].y - pts[i - 1].y;
        let speed = libm::sqrt(dx * dx + dy * dy) / dt;
        let heading = if speed >= stationary_eps_mps {
            let h = normalize_deg(libm::atan2(dx, dy).to_degrees());
            last_heading = Some(h);
            Some(h)
        } else {
            last_heading
        };
        states.push(KinematicState {
            t: traj.sample_time(i),
            pos: pts[i],
            speed,
            heading,
        });
    }

    states[0].speed = states[1].speed;
    states[0].heading = states[1].heading;
    states
}

/// Median of frame speeds; even counts average the two middle values.
pub fn median_speed(states: &[KinematicState]) -> Result<f64, KinematicsError> {
    if states.is_empty() {
        return Err(KinematicsError::EmptyInput);
    }
    let mut speeds: Vec<f64> = states.iter().map(|s| s.speed).collect();
    speeds.sort_unstable_by(f64::total_cmp);
    let n = speeds.len();
    Ok(if n % 2 == 1 {
        speeds[n / 2]
    } else {
        (speeds[n / 2 - 1] + speeds[n / 2]) / 2.0
    })
}

/// Inter-agent planar distance at every shared frame, as `(t, meters)`.
pub fn distance_series(case: &EncounterCase) -> Vec<(f64, f64)> {
    let v = case.vehicle().points();
    let e = case.escooter().points();
    (0..case.len())
        .map(|i| (case.frame_time(i), v[i].distance(&e[i])))
        .collect()
}

/// Frame index and value of the minimum inter-agent distance; the earliest
/// frame wins ties.
pub fn closest_approach(case: &EncounterCase) -> (usize, f64) {
    let v = case.vehicle().points();
    let e = case.escooter().points();
    let mut best = (0usize, v[0].distance(&e[0]));
    for i in 1..case.len() {
        let d = v[i].distance(&e[i]);
        if d < best.1 {
            best = (i, d);
        }
    }
    best
}

pub fn min_distance(case: &EncounterCase) -> f64 {
    closest_approach(case).1
}
