//! Geodetic primitives: great-circle distance, initial bearing, and a
//! latitude-corrected equirectangular projection onto a local tangent plane.
//!
//! Inputs are decimal degrees; planar coordinates and distances are meters.
//! Everything downstream of [`ProjectionContext::to_plane`] works in plain
//! Euclidean geometry.

use core::fmt;

use libm::{atan2, cos, sin, sqrt};
use serde::{Deserialize, Serialize};

/// Mean Earth radius in meters (spherical model).
pub const EARTH_RADIUS_M: f64 = 6_371_000.0;

/// Meters per degree of latitude on the spherical Earth.
pub const METERS_PER_DEG_LAT: f64 = EARTH_RADIUS_M * core::f64::consts::PI / 180.0;

/// Encounters are local; the projection refuses points this far from its origin.
pub const MAX_PROJECTION_RANGE_M: f64 = 10_000.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GeodesyError {
    /// Latitude or longitude is non-finite or outside [-90,90] x [-180,180].
    InvalidCoordinate { lat: f64, lon: f64 },
    /// Bearing between coincident points is undefined.
    UndefinedBearing,
    /// Point lies beyond [`MAX_PROJECTION_RANGE_M`] from the projection origin.
    OutOfProjectionRange { distance_m: f64 },
}

impl fmt::Display for GeodesyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeodesyError::InvalidCoordinate { lat, lon } => {
                write!(f, "invalid coordinate ({lat}, {lon})")
            }
            GeodesyError::UndefinedBearing => write!(f, "bearing undefined for coincident points"),
            GeodesyError::OutOfProjectionRange { distance_m } => {
                write!(f, "point {distance_m:.1} m from projection origin exceeds {MAX_PROJECTION_RANGE_M} m")
            }
        }
    }
}

impl core::error::Error for GeodesyError {}

/// Geodetic position in decimal degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoPoint {
    pub lat: f64,
    pub lon: f64,
}

impl GeoPoint {
    pub fn new(lat: f64, lon: f64) -> Result<Self, GeodesyError> {
        if lat.is_finite() && lon.is_finite() && (-90.0..=90.0).contains(&lat) && (-180.0..=180.0).contains(&lon) {
            Ok(Self { lat, lon })
        } else {
            Err(GeodesyError::InvalidCoordinate { lat, lon })
        }
    }
}

/// Planar position in meters east (`x`) and north (`y`) of a projection origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanePoint {
    pub x: f64,
    pub y: f64,
}

impl PlanePoint {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    /// Euclidean distance to `other` in meters.
    pub fn distance(&self, other: &PlanePoint) -> f64 {
        let dx = other.x - self.x;
        let dy = other.y - self.y;
        sqrt(dx * dx + dy * dy)
    }
}

/// Great-circle distance between two points in meters (haversine formula).
pub fn haversine_distance(a: GeoPoint, b: GeoPoint) -> f64 {
    let lat_a = a.lat.to_radians();
    let lat_b = b.lat.to_radians();
    let dlat = (b.lat - a.lat).to_radians();
    let dlon = (b.lon - a.lon).to_radians();

    let sin_dlat = sin(dlat / 2.0);
    let sin_dlon = sin(dlon / 2.0);
    let h = sin_dlat * sin_dlat + cos(lat_a) * cos(lat_b) * sin_dlon * sin_dlon;
    // Clamp guards float error from pushing h outside [0, 1].
    let h = h.clamp(0.0, 1.0);
    2.0 * EARTH_RADIUS_M * atan2(sqrt(h), sqrt(1.0 - h))
}

/// Initial great-circle bearing from `a` to `b`, degrees in [0, 360),
/// 0 = north, 90 = east. Errors on coincident points.
pub fn bearing(a: GeoPoint, b: GeoPoint) -> Result<f64, GeodesyError> {
    if a.lat == b.lat && a.lon == b.lon {
        return Err(GeodesyError::UndefinedBearing);
    }
    let lat_a = a.lat.to_radians();
    let lat_b = b.lat.to_radians();
    let dlon = (b.lon - a.lon).to_radians();

    let y = sin(dlon) * cos(lat_b);
    let x = cos(lat_a) * sin(lat_b) - sin(lat_a) * cos(lat_b) * cos(dlon);
    Ok(normalize_deg(atan2(y, x).to_degrees()))
}

/// Fold an angle in degrees into [0, 360).
pub fn normalize_deg(deg: f64) -> f64 {
    let mut r = deg % 360.0;
    if r < 0.0 {
        r += 360.0;
    }
    // r == 360.0 can survive the fold when deg is a tiny negative number.
    if r >= 360.0 {
        r = 0.0;
    }
    r
}

/// Equirectangular projection anchored at a case's centroid.
///
/// `x = (lon - lon0) * meters_per_deg_lon`, `y = (lat - lat0) * meters_per_deg_lat`,
/// with the longitude scale corrected by `cos(lat0)`. Accurate to well under
/// 0.01% at encounter scale (points within ~1 km of the centroid).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProjectionContext {
    origin: GeoPoint,
    meters_per_deg_lat: f64,
    meters_per_deg_lon: f64,
}

impl ProjectionContext {
    pub fn new(origin: GeoPoint) -> Self {
        Self {
            origin,
            meters_per_deg_lat: METERS_PER_DEG_LAT,
            meters_per_deg_lon: METERS_PER_DEG_LAT * cos(origin.lat.to_radians()),
        }
    }

    /// Context anchored at the centroid of `points`. Returns `None` on an
    /// empty iterator.
    pub fn from_centroid<I: IntoIterator<Item = GeoPoint>>(points: I) -> Option<Self> {
        let mut n = 0u64;
        let mut lat_sum = 0.0;
        let mut lon_sum = 0.0;
        for p in points {
            n += 1;
            lat_sum += p.lat;
            lon_sum += p.lon;
        }
        if n == 0 {
            return None;
        }
        Some(Self::new(GeoPoint {
            lat: lat_sum / n as f64,
            lon: lon_sum / n as f64,
        }))
    }

    pub fn origin(&self) -> GeoPoint {
        self.origin
    }

    /// Project a geodetic point onto the local plane. Errors when the point
    /// lies beyond [`MAX_PROJECTION_RANGE_M`] from the origin.
    pub fn to_plane(&self, p: GeoPoint) -> Result<PlanePoint, GeodesyError> {
        let d = haversine_distance(self.origin, p);
        if d >= MAX_PROJECTION_RANGE_M {
            return Err(GeodesyError::OutOfProjectionRange { distance_m: d });
        }
        Ok(PlanePoint {
            x: (p.lon - self.origin.lon) * self.meters_per_deg_lon,
            y: (p.lat - self.origin.lat) * self.meters_per_deg_lat,
        })
    }

    /// Exact inverse of [`Self::to_plane`].
    pub fn from_plane(&self, q: PlanePoint) -> GeoPoint {
        GeoPoint {
            lat: self.origin.lat + q.y / self.meters_per_deg_lat,
            lon: self.origin.lon + q.x / self.meters_per_deg_lon,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(lat: f64, lon: f64) -> GeoPoint {
        GeoPoint::new(lat, lon).unwrap()
    }

    #[test]
    fn haversine_zero_for_identical_points() {
        let a = p(39.77, -86.16);
        assert_eq!(haversine_distance(a, a), 0.0);
    }

    #[test]
    fn haversine_one_degree_of_latitude() {
        let d = haversine_distance(p(0.0, 0.0), p(1.0, 0.0));
        assert!((d - 111_194.93).abs() < 0.5, "got {d}");
    }

    #[test]
    fn bearing_cardinal_directions() {
        assert!((bearing(p(0.0, 0.0), p(1.0, 0.0)).unwrap() - 0.0).abs() < 1e-9);
        assert!((bearing(p(0.0, 0.0), p(0.0, 1.0)).unwrap() - 90.0).abs() < 1e-9);
    }

    #[test]
    fn bearing_coincident_points_is_an_error() {
        let a = p(10.0, 20.0);
        assert_eq!(bearing(a, a), Err(GeodesyError::UndefinedBearing));
    }

    #[test]
    fn bearing_matches_planar_atan2_for_small_displacement() {
        let a = p(10.0, 20.0);
        let b = p(10.01, 20.01);
        let got = bearing(a, b).unwrap();
        let dx = (b.lon - a.lon) * cos(a.lat.to_radians());
        let dy = b.lat - a.lat;
        let planar = normalize_deg(atan2(dx, dy).to_degrees());
        assert!(got > 0.0 && got < 90.0);
        assert!((got - planar).abs() < 0.1, "got {got}, planar {planar}");
    }

    #[test]
    fn projection_origin_maps_to_plane_origin_and_back() {
        let ctx = ProjectionContext::new(p(39.77, -86.16));
        let q = ctx.to_plane(ctx.origin()).unwrap();
        assert_eq!(q, PlanePoint::new(0.0, 0.0));
        assert_eq!(ctx.from_plane(PlanePoint::new(0.0, 0.0)), ctx.origin());
    }

    #[test]
    fn from_plane_meters_per_degree_anchor() {
        let ctx = ProjectionContext::new(p(0.0, 0.0));
        let g = ctx.from_plane(PlanePoint::new(0.0, 111.19493));
        assert!((g.lat - 0.001).abs() < 1e-8, "got {}", g.lat);
        assert!(g.lon.abs() < 1e-12);
    }

    #[test]
    fn projection_rejects_distant_points() {
        let ctx = ProjectionContext::new(p(39.77, -86.16));
        let far = p(40.77, -86.16); // ~111 km north
        assert!(matches!(
            ctx.to_plane(far),
            Err(GeodesyError::OutOfProjectionRange { .. })
        ));
    }

    #[test]
    fn geopoint_rejects_out_of_range() {
        assert!(GeoPoint::new(95.0, 0.0).is_err());
        assert!(GeoPoint::new(0.0, 181.0).is_err());
        assert!(GeoPoint::new(f64::NAN, 0.0).is_err());
    }

    #[test]
    fn planar_distance_tracks_haversine_within_a_kilometer() {
        // ~700 m offsets around an Indianapolis-like latitude.
        let a = p(39.772, -86.158);
        let b = p(39.768, -86.163);
        let ctx = ProjectionContext::from_centroid([a, b]).unwrap();
        let planar = ctx.to_plane(a).unwrap().distance(&ctx.to_plane(b).unwrap());
        let geodesic = haversine_distance(a, b);
        assert!((planar - geodesic).abs() / geodesic < 1e-4);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn haversine_symmetric_nonnegative(
                lat1 in -89.0..89.0f64, lon1 in -179.0..179.0f64,
                lat2 in -89.0..89.0f64, lon2 in -179.0..179.0f64,
            ) {
                let a = p(lat1, lon1);
                let b = p(lat2, lon2);
                let ab = haversine_distance(a, b);
                let ba = haversine_distance(b, a);
                prop_assert!(ab >= 0.0);
                prop_assert!((ab - ba).abs() <= 1e-9 * ab.max(1.0));
            }

            #[test]
            fn plane_round_trip_is_identity(
                dlat in -0.008..0.008f64, dlon in -0.008..0.008f64,
            ) {
                let ctx = ProjectionContext::new(p(39.77, -86.16));
                let g = p(39.77 + dlat, -86.16 + dlon);
                let back = ctx.from_plane(ctx.to_plane(g).unwrap());
                prop_assert!((back.lat - g.lat).abs() < 1e-9);
                prop_assert!((back.lon - g.lon).abs() < 1e-9);
            }

            /// Centroid-anchored planar distances agree with haversine to 0.01%
            /// for pairs within 1 km of their shared origin.
            #[test]
            fn planar_distance_matches_haversine_at_encounter_scale(
                dlat1 in -0.0085..0.0085f64, dlon1 in -0.011..0.011f64,
                dlat2 in -0.0085..0.0085f64, dlon2 in -0.011..0.011f64,
            ) {
                let a = p(39.77 + dlat1, -86.16 + dlon1);
                let b = p(39.77 + dlat2, -86.16 + dlon2);
                let ctx = ProjectionContext::from_centroid([a, b]).unwrap();
                let geodesic = haversine_distance(a, b);
                prop_assume!(geodesic > 1.0);
                let planar = ctx.to_plane(a).unwrap().distance(&ctx.to_plane(b).unwrap());
                prop_assert!(
                    (planar - geodesic).abs() / geodesic < 1e-4,
                    "planar {} vs geodesic {}", planar, geodesic
                );
            }

            #[test]
            fn reverse_bearing_differs_by_half_turn(
                lat in -60.0..60.0f64, lon in -170.0..170.0f64,
                dlat in 1e-4..5e-3f64, dlon in 1e-4..5e-3f64,
            ) {
                let a = p(lat, lon);
                let b = p(lat + dlat, lon + dlon);
                let fwd = bearing(a, b).unwrap();
                let rev = bearing(b, a).unwrap();
                let diff = normalize_deg(rev - fwd);
                prop_assert!((diff - 180.0).abs() < 0.01, "fwd {} rev {}", fwd, rev);
            }
        }
    }
}
