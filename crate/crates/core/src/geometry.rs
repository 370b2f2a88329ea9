//! Encounter geometry: classify each case into one of four relative-motion
//! classes using headings observed during the main interaction phase, the
//! window around the agents' closest approach.

use core::fmt;

use serde::{Deserialize, Serialize};

use crate::kinematics::{closest_approach, heading_unit, KinematicState};
use crate::trajectory::EncounterCase;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeometryClass {
    ParallelSameDirection,
    ParallelOppositeDirection,
    CrossingFromLeft,
    CrossingFromRight,
}

impl GeometryClass {
    pub const ALL: [GeometryClass; 4] = [
        GeometryClass::ParallelSameDirection,
        GeometryClass::ParallelOppositeDirection,
        GeometryClass::CrossingFromLeft,
        GeometryClass::CrossingFromRight,
    ];
}

impl fmt::Display for GeometryClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            GeometryClass::ParallelSameDirection => "parallel_same_direction",
            GeometryClass::ParallelOppositeDirection => "parallel_opposite_direction",
            GeometryClass::CrossingFromLeft => "crossing_from_left",
            GeometryClass::CrossingFromRight => "crossing_from_right",
        };
        write!(f, "{s}")
    }
}

/// Time window around closest approach used to assign a single geometry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InteractionPhase {
    pub t_start: f64,
    pub t_end: f64,
}

impl InteractionPhase {
    pub fn contains(&self, t: f64) -> bool {
        t >= self.t_start - 1e-9 && t <= self.t_end + 1e-9
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeometryError {
    /// No phase frame has a defined heading for both agents.
    Unclassifiable,
}

impl fmt::Display for GeometryError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeometryError::Unclassifiable => {
                write!(f, "no frame in the interaction phase has both headings defined")
            }
        }
    }
}

impl core::error::Error for GeometryError {}

/// The ± `half_window_s` interval around the frame of minimum inter-agent
/// distance (earliest such frame on ties), clipped to the case timeline.
pub fn interaction_phase(case: &EncounterCase, half_window_s: f64) -> InteractionPhase {
    let (idx, _) = closest_approach(case);
    let t_min = case.frame_time(idx);
    let t_first = case.frame_time(0);
    let t_last = case.frame_time(case.len() - 1);
    InteractionPhase {
        t_start: (t_min - half_window_s).max(t_first),
        t_end: (t_min + half_window_s).min(t_last),
    }
}

/// Heading difference folded to [0, 180]: 0 = same direction, 180 = opposite.
fn folded_diff_deg(a: f64, b: f64) -> f64 {
    let mut d = (a - b) % 360.0;
    if d > 180.0 {
        d -= 360.0;
    }
    if d < -180.0 {
        d += 360.0;
    }
    libm::fabs(d)
}

/// Circular mean of angles in degrees via the mean unit vector; `None` for
/// an empty set or a resultant too short to define a direction.
fn circular_mean_deg<I: IntoIterator<Item = f64>>(angles: I) -> Option<f64> {
    let mut sx = 0.0;
    let mut sy = 0.0;
    let mut n = 0usize;
    for a in angles {
        let r = a.to_radians();
        sx += libm::cos(r);
        sy += libm::sin(r);
        n += 1;
    }
    if n == 0 {
        return None;
    }
    let len = libm::sqrt(sx * sx + sy * sy) / n as f64;
    if len < 1e-12 {
        return None;
    }
    Some(crate::geodesy::normalize_deg(libm::atan2(sy, sx).to_degrees()))
}

/// Assign one of the four geometry classes from headings inside `phase`.
///
/// Δ is the circular mean of per-frame folded heading differences; below
/// `parallel_angle_deg` is same-direction, above its supplement is
/// opposite-direction, anything between is a crossing. The crossing side is
/// the sign of the cross product of the vehicle's mean heading unit vector
/// with the e-scooter's mean position offset: positive means the scooter
/// approaches from the vehicle's left half-plane.
pub fn classify_geometry(
    vehicle: &[KinematicState],
    escooter: &[KinematicState],
    phase: &InteractionPhase,
    parallel_angle_deg: f64,
) -> Result<GeometryClass, GeometryError> {
    debug_assert_eq!(vehicle.len(), escooter.len());

    // Frames inside the phase where both headings are defined.
    let joint: alloc::vec::Vec<(f64, f64, &KinematicState, &KinematicState)> = vehicle
        .iter()
        .zip(escooter)
        .filter(|(sv, _)| phase.contains(sv.t))
        .filter_map(|(sv, se)| match (sv.heading, se.heading) {
            (Some(hv), Some(he)) => Some((hv, he, sv, se)),
            _ => None,
        })
        .collect();
    if joint.is_empty() {
        return Err(GeometryError::Unclassifiable);
    }

    let delta = circular_mean_deg(joint.iter().map(|(hv, he, _, _)| folded_diff_deg(*hv, *he)))
        // Folded differences this dispersed (resultant ~0) carry no
        // parallel/antiparallel signal; fall through to the crossing branch.
        .unwrap_or(90.0);

    if delta < parallel_angle_deg {
        return Ok(GeometryClass::ParallelSameDirection);
    }
    if delta > 180.0 - parallel_angle_deg {
        return Ok(GeometryClass::ParallelOppositeDirection);
    }

    let mean_vehicle_heading = circular_mean_deg(joint.iter().map(|(hv, _, _, _)| *hv))
        .ok_or(GeometryError::Unclassifiable)?;
    let (ux, uy) = heading_unit(mean_vehicle_heading);
    let n = joint.len() as f64;
    let ox = joint.iter().map(|(_, _, sv, se)| se.pos.x - sv.pos.x).sum::<f64>() / n;
    let oy = joint.iter().map(|(_, _, sv, se)| se.pos.y - sv.pos.y).sum::<f64>() / n;

    if ux * oy - uy * ox > 0.0 {
        Ok(GeometryClass::CrossingFromLeft)
    } else {
        Ok(GeometryClass::CrossingFromRight)
    }
}
