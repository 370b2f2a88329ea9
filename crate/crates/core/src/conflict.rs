//! Coast-trajectory intersection, gap time, instantaneous TTC, and the
//! case-level conflict profile: minimum gap time, mTTC, potential-conflict
//! classification, and risk level.

use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::kinematics::{estimate_states, heading_unit, KinematicState};
use crate::geodesy::PlanePoint;
use crate::trajectory::EncounterCase;

/// Two coast rays with |sin Δheading| below this are treated as parallel.
const PARALLEL_SIN_EPS: f64 = 1e-9;

/// Straight-line forward projection of an agent from its current position
/// along its current heading at its current speed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoastRay {
    pub origin: PlanePoint,
    pub heading: f64,
    pub speed: f64,
}

/// Intersection of two coast rays with each agent's travel time to it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    pub point: PlanePoint,
    pub arrival_a: f64,
    pub arrival_b: f64,
}

/// Per-frame conflict quantities. All fields absent when either agent is
/// stationary at the frame; `gap_time` present exactly when `crossing` is.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameConflict {
    pub t: f64,
    pub crossing: Option<Crossing>,
    pub gap_time: Option<f64>,
    pub ttc: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConflictConfig {
    /// A case is a potential conflict iff some frame's gap time is below this.
    pub conflict_gap_threshold: f64,
    /// Frames with gap time above this are excluded from min-gap aggregation.
    pub gap_cap: f64,
    /// mTTC below this is High risk.
    pub risk_high: f64,
    /// mTTC below this (and not High) is Medium risk; at or above is Low.
    pub risk_medium: f64,
    /// Agents "collide" when their separation falls within this radius.
    pub collision_radius: f64,
}

impl Default for ConflictConfig {
    fn default() -> Self {
        Self {
            conflict_gap_threshold: 3.0,
            gap_cap: 20.0,
            risk_high: 1.0,
            risk_medium: 2.5,
            collision_radius: 2.0,
        }
    }
}

impl ConflictConfig {
    // Negated comparisons so NaN fields fail validation.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<(), ConflictError> {
        if !(self.risk_high > 0.0 && self.risk_high < self.risk_medium) {
            return Err(ConflictError::InvalidConfig {
                reason: "risk bands must satisfy 0 < risk_high < risk_medium",
            });
        }
        if !(self.conflict_gap_threshold > 0.0 && self.conflict_gap_threshold < self.gap_cap) {
            return Err(ConflictError::InvalidConfig {
                reason: "conflict_gap_threshold must be positive and below gap_cap",
            });
        }
        if !(self.collision_radius > 0.0) {
            return Err(ConflictError::InvalidConfig {
                reason: "collision_radius must be positive",
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RiskLevel {
    High,
    Medium,
    Low,
}

impl fmt::Display for RiskLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RiskLevel::High => write!(f, "high"),
            RiskLevel::Medium => write!(f, "medium"),
            RiskLevel::Low => write!(f, "low"),
        }
    }
}

/// Case-level conflict result over all shared frames.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConflictProfile {
    pub frames: Vec<FrameConflict>,
    pub min_gap_time: Option<f64>,
    pub mttc: Option<f64>,
    pub is_potential_conflict: bool,
    pub risk: Option<RiskLevel>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ConflictError {
    InvalidConfig { reason: &'static str },
    /// risk_level needs a positive mTTC.
    NonPositiveMttc { mttc: f64 },
}

impl fmt::Display for ConflictError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConflictError::InvalidConfig { reason } => write!(f, "invalid config: {reason}"),
            ConflictError::NonPositiveMttc { mttc } => {
                write!(f, "risk level needs a positive mTTC, got {mttc}")
            }
        }
    }
}

impl core::error::Error for ConflictError {}

fn cross(ax: f64, ay: f64, bx: f64, by: f64) -> f64 {
    ax * by - ay * bx
}

/// Intersection of the two forward rays, if any. Returns the point and each
/// agent's arrival time; `None` for parallel rays or a crossing behind
/// either agent.
pub fn coast_intersection(a: &CoastRay, b: &CoastRay) -> Option<Crossing> {
    let (uax, uay) = heading_unit(a.heading);
    let (ubx, uby) = heading_unit(b.heading);
    let denom = cross(uax, uay, ubx, uby);
    if libm::fabs(denom) < PARALLEL_SIN_EPS {
        return None;
    }
    let wx = b.origin.x - a.origin.x;
    let wy = b.origin.y - a.origin.y;
    let dist_a = cross(wx, wy, ubx, uby) / denom;
    let dist_b = cross(wx, wy, uax, uay) / denom;
    if dist_a < 0.0 || dist_b < 0.0 {
        return None;
    }
    Some(Crossing {
        point: PlanePoint {
            x: a.origin.x + dist_a * uax,
            y: a.origin.y + dist_a * uay,
        },
        arrival_a: dist_a / a.speed,
        arrival_b: dist_b / b.speed,
    })
}

/// Absolute difference between the two arrival times.
pub fn gap_time(arrival_a: f64, arrival_b: f64) -> f64 {
    libm::fabs(arrival_a - arrival_b)
}

/// Smallest τ ≥ 0 at which the agents, holding their current velocities,
/// come within `radius` of each other; `None` when they never do. Already
/// within `radius` yields 0.
pub fn instantaneous_ttc(a: &KinematicState, b: &KinematicState, radius: f64) -> Option<f64> {
    let (hax, hay) = heading_unit(a.heading?);
    let (hbx, hby) = heading_unit(b.heading?);
    let rx = b.pos.x - a.pos.x;
    let ry = b.pos.y - a.pos.y;
    let vx = b.speed * hbx - a.speed * hax;
    let vy = b.speed * hby - a.speed * hay;

    let c = rx * rx + ry * ry - radius * radius;
    if c <= 0.0 {
        return Some(0.0);
    }
    let qa = vx * vx + vy * vy;
    if qa < 1e-18 {
        return None; // equal velocities: separation never changes
    }
    let qb = 2.0 * (rx * vx + ry * vy);
    let disc = qb * qb - 4.0 * qa * c;
    if disc < 0.0 {
        return None;
    }
    // c > 0 means the roots share a sign; the smaller root decides.
    let tau = (-qb - libm::sqrt(disc)) / (2.0 * qa);
    if tau < 0.0 {
        None
    } else {
        Some(tau)
    }
}

/// First-match risk banding of a case's minimum TTC.
#[allow(clippy::neg_cmp_op_on_partial_ord)] // negated so NaN is rejected too
pub fn risk_level(mttc: f64, cfg: &ConflictConfig) -> Result<RiskLevel, ConflictError> {
    if !(mttc > 0.0) {
        return Err(ConflictError::NonPositiveMttc { mttc });
    }
    Ok(if mttc < cfg.risk_high {
        RiskLevel::High
    } else if mttc < cfg.risk_medium {
        RiskLevel::Medium
    } else {
        RiskLevel::Low
    })
}

/// Conflict analysis over pre-estimated per-frame states. Frames where
/// either agent is slower than `stationary_eps_mps` carry no crossing or
/// TTC (a stopped agent never "arrives").
pub fn analyze_states(
    vehicle: &[KinematicState],
    escooter: &[KinematicState],
    cfg: &ConflictConfig,
    stationary_eps_mps: f64,
) -> Result<ConflictProfile, ConflictError> {
    cfg.validate()?;
    debug_assert_eq!(vehicle.len(), escooter.len());

    let mut frames = Vec::with_capacity(vehicle.len());
    let mut min_gap: Option<f64> = None;
    let mut mttc: Option<f64> = None;
    let mut is_conflict = false;

    for (sv, se) in vehicle.iter().zip(escooter) {
        let both_moving = sv.speed >= stationary_eps_mps && se.speed >= stationary_eps_mps;
        let mut frame = FrameConflict {
            t: sv.t,
            crossing: None,
            gap_time: None,
            ttc: None,
        };
        if both_moving {
            if let (Some(hv), Some(he)) = (sv.heading, se.heading) {
                let ray_v = CoastRay {
                    origin: sv.pos,
                    heading: hv,
                    speed: sv.speed,
                };
                let ray_e = CoastRay {
                    origin: se.pos,
                    heading: he,
                    speed: se.speed,
                };
                if let Some(crossing) = coast_intersection(&ray_v, &ray_e) {
                    let gap = gap_time(crossing.arrival_a, crossing.arrival_b);
                    frame.crossing = Some(crossing);
                    frame.gap_time = Some(gap);
                    if gap < cfg.conflict_gap_threshold {
                        is_conflict = true;
                    }
                    if gap <= cfg.gap_cap {
                        min_gap = Some(match min_gap {
                            Some(m) if m <= gap => m,
                            _ => gap,
                        });
                    }
                }
                frame.ttc = instantaneous_ttc(sv, se, cfg.collision_radius);
            }
        }
        frames.push(frame);
    }

    if is_conflict {
        for frame in &frames {
            if let Some(t) = frame.ttc {
                mttc = Some(match mttc {
                    Some(m) if m <= t => m,
                    _ => t,
                });
            }
        }
    }

    let risk = match mttc {
        // A zero mTTC means the agents actually came within the collision
        // radius; that is the most severe outcome, not an invalid one.
        Some(m) if m <= 0.0 => Some(RiskLevel::High),
        Some(m) => Some(risk_level(m, cfg)?),
        None => None,
    };

    Ok(ConflictProfile {
        frames,
        min_gap_time: min_gap,
        mttc,
        is_potential_conflict: is_conflict,
        risk,
    })
}

/// Full conflict analysis of a synchronized case.
pub fn analyze_case(
    case: &EncounterCase,
    cfg: &ConflictConfig,
    stationary_eps_mps: f64,
) -> Result<ConflictProfile, ConflictError> {
    let sv = estimate_states(case.vehicle(), stationary_eps_mps);
    let se = estimate_states(case.escooter(), stationary_eps_mps);
    analyze_states(&sv, &se, cfg, stationary_eps_mps)
}
