//! End-to-end per-case orchestration: condition raw tracks, synchronize the
//! pair, estimate states, and derive every per-case metric in one pass.

use serde::{Deserialize, Serialize};

use crate::conflict::{analyze_states, ConflictConfig, ConflictError, ConflictProfile};
use crate::geometry::{classify_geometry, interaction_phase, InteractionPhase};
use crate::kinematics::{estimate_states, median_speed, min_distance};
use crate::report::CaseMetrics;
use crate::trajectory::{
    interpolate_gaps, remove_outliers, smooth, synchronize, Dataset, EncounterCase,
    RawTrajectory, TrajectoryError,
};

/// Knobs for the raw-track conditioning chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditioningParams {
    pub max_plausible_speed_mps: f64,
    pub resample_hz: f64,
    pub max_gap_s: f64,
    pub smooth_window: usize,
}

impl Default for ConditioningParams {
    fn default() -> Self {
        Self {
            max_plausible_speed_mps: 30.0,
            resample_hz: 10.0,
            max_gap_s: 1.0,
            smooth_window: 5,
        }
    }
}

/// Knobs for per-case analysis on a synchronized pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalysisParams {
    pub conflict: ConflictConfig,
    pub parallel_angle_deg: f64,
    pub phase_half_window_s: f64,
    pub stationary_eps_mps: f64,
}

impl Default for AnalysisParams {
    fn default() -> Self {
        Self {
            conflict: ConflictConfig::default(),
            parallel_angle_deg: 45.0,
            phase_half_window_s: 2.0,
            stationary_eps_mps: 0.1,
        }
    }
}

impl AnalysisParams {
    // Negated comparisons so NaN fields fail validation.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<(), ConflictError> {
        self.conflict.validate()?;
        if !(self.parallel_angle_deg > 0.0 && self.parallel_angle_deg < 90.0) {
            return Err(ConflictError::InvalidConfig {
                reason: "parallel_angle_deg must lie in (0, 90)",
            });
        }
        if !(self.phase_half_window_s >= 0.0) {
            return Err(ConflictError::InvalidConfig {
                reason: "phase_half_window_s must be nonnegative",
            });
        }
        if !(self.stationary_eps_mps >= 0.0) {
            return Err(ConflictError::InvalidConfig {
                reason: "stationary_eps_mps must be nonnegative",
            });
        }
        Ok(())
    }
}

/// Outlier removal, gap interpolation, then smoothing.
pub fn condition(
    raw: &RawTrajectory,
    params: &ConditioningParams,
) -> Result<RawTrajectory, TrajectoryError> {
    let cleaned = remove_outliers(raw, params.max_plausible_speed_mps)?;
    let filled = interpolate_gaps(&cleaned, 1.0 / params.resample_hz, params.max_gap_s)?;
    smooth(&filled, params.smooth_window)
}

/// Condition both tracks and synchronize them into an analyzable case.
pub fn build_case(
    id: &str,
    dataset: Dataset,
    vehicle: &RawTrajectory,
    escooter: &RawTrajectory,
    params: &ConditioningParams,
) -> Result<EncounterCase, TrajectoryError> {
    let v = condition(vehicle, params)?;
    let e = condition(escooter, params)?;
    synchronize(id, dataset, &v, &e, params.resample_hz)
}

/// Everything the analysis derives from one case.
#[derive(Debug, Clone, PartialEq)]
pub struct CaseAnalysis {
    pub metrics: CaseMetrics,
    pub profile: ConflictProfile,
    pub phase: InteractionPhase,
}

/// Run the full per-case analysis. A case whose interaction phase has no
/// usable headings still yields metrics, with `geometry` left unassigned.
pub fn analyze_encounter(
    case: &EncounterCase,
    params: &AnalysisParams,
) -> Result<CaseAnalysis, ConflictError> {
    params.validate()?;
    let sv = estimate_states(case.vehicle(), params.stationary_eps_mps);
    let se = estimate_states(case.escooter(), params.stationary_eps_mps);

    let profile = analyze_states(&sv, &se, &params.conflict, params.stationary_eps_mps)?;
    let phase = interaction_phase(case, params.phase_half_window_s);
    let geometry = classify_geometry(&sv, &se, &phase, params.parallel_angle_deg).ok();

    let metrics = CaseMetrics {
        id: case.id.clone(),
        dataset: case.dataset,
        min_distance: min_distance(case),
        vehicle_median_speed: median_speed(&sv).expect("cases have at least two frames"),
        escooter_median_speed: median_speed(&se).expect("cases have at least two frames"),
        min_gap_time: profile.min_gap_time,
        mttc: profile.mttc,
        is_potential_conflict: profile.is_potential_conflict,
        risk: profile.risk,
        geometry,
    };
    Ok(CaseAnalysis {
        metrics,
        profile,
        phase,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::GeometryClass;
    use crate::scenario::{generate_case, generate_raw, ScenarioSpec};

    fn spec(geometry: GeometryClass, noise: f64, seed: u64) -> ScenarioSpec {
        ScenarioSpec {
            geometry,
            vehicle_speed: 10.0,
            escooter_speed: 5.0,
            designed_gap: 1.0,
            duration: 10.0,
            noise_sigma: noise,
            seed,
        }
    }

    #[test]
    fn clean_case_analyzes_to_designed_values() {
        let case = generate_case(&spec(GeometryClass::CrossingFromLeft, 0.0, 1)).unwrap();
        let analysis = analyze_encounter(&case, &AnalysisParams::default()).unwrap();
        let m = &analysis.metrics;
        assert!(m.is_potential_conflict);
        assert!((m.min_gap_time.unwrap() - 1.0).abs() < 0.02);
        assert_eq!(m.geometry, Some(GeometryClass::CrossingFromLeft));
        assert!((m.vehicle_median_speed - 10.0).abs() < 0.01);
        assert!((m.escooter_median_speed - 5.0).abs() < 0.01);
    }

    #[test]
    fn conditioning_then_analysis_recovers_noisy_geometry() {
        let mut hits = 0;
        let total = 20;
        for seed in 0..total {
            let s = spec(GeometryClass::CrossingFromRight, 0.5, seed);
            let (v, e) = generate_raw(&s).unwrap();
            let case = build_case(
                "noisy",
                Dataset::VehicleCentered,
                &v,
                &e,
                &ConditioningParams::default(),
            )
            .unwrap();
            let analysis = analyze_encounter(&case, &AnalysisParams::default()).unwrap();
            if analysis.metrics.geometry == Some(GeometryClass::CrossingFromRight) {
                hits += 1;
            }
        }
        assert!(hits >= total - 1, "recovered {hits}/{total}");
    }

    #[test]
    fn conditioning_is_idempotent_on_generated_tracks() {
        let (v, _) = generate_raw(&spec(GeometryClass::ParallelSameDirection, 0.0, 9)).unwrap();
        let p = ConditioningParams::default();
        let once = condition(&v, &p).unwrap();
        let twice = condition(&once, &p).unwrap();
        assert_eq!(once.fixes().len(), twice.fixes().len());
        for (a, b) in once.fixes().iter().zip(twice.fixes()) {
            assert!(crate::geodesy::haversine_distance(a.pos, b.pos) < 1e-6);
        }
    }

    #[test]
    fn invalid_params_are_rejected() {
        let params = AnalysisParams {
            parallel_angle_deg: 95.0,
            ..Default::default()
        };
        let case = generate_case(&spec(GeometryClass::CrossingFromLeft, 0.0, 1)).unwrap();
        assert!(analyze_encounter(&case, &params).is_err());
    }

    #[test]
    fn profile_and_metrics_agree() {
        let case = generate_case(&spec(GeometryClass::CrossingFromLeft, 0.0, 3)).unwrap();
        let analysis = analyze_encounter(&case, &AnalysisParams::default()).unwrap();
        assert_eq!(
            analysis.metrics.is_potential_conflict,
            analysis.profile.is_potential_conflict
        );
        assert_eq!(analysis.metrics.min_gap_time, analysis.profile.min_gap_time);
        assert_eq!(analysis.metrics.mttc, analysis.profile.mttc);
        assert_eq!(analysis.metrics.risk, analysis.profile.risk);
    }
}
