//! Face landmark preprocessing and geometric feature extraction.
//!
//! Landmarks follow the standard 68-point layout (0-indexed here):
//!
//! ```text
//!  0..=16  jaw contour (8 = chin tip)
//! 17..=21  right brow (17 outer, 21 inner)
//! 22..=26  left brow (22 inner, 26 outer)
//! 27..=30  nose bridge (30 = tip)      31..=35  nostril base
//! 36..=41  right eye                   42..=47  left eye
//! 48..=59  outer lip (48/54 corners, 51 top mid, 57 bottom mid)
//! 60..=67  inner lip
//! ```
//!
//! Coordinates are image-style: y grows downward, so "raised" means a
//! smaller y. Preprocessing removes translation and uniform scale but keeps
//! rotation, because head tilt itself carries affect.

use crate::event::{Point, LANDMARK_COUNT};

/// Right-eye landmark indices (0-indexed 36..=41; 1-indexed 37–42).
pub const RIGHT_EYE: std::ops::Range<usize> = 36..42;
/// Left-eye landmark indices (0-indexed 42..=47; 1-indexed 43–48).
pub const LEFT_EYE: std::ops::Range<usize> = 42..48;

#[derive(Debug, Clone, thiserror::Error, PartialEq, Eq)]
pub enum FaceError {
    #[error("expected {LANDMARK_COUNT} landmarks, got {0}")]
    WrongLandmarkCount(usize),
    #[error("degenerate input: eye centers are coincident")]
    DegenerateInput,
}

fn centroid(points: &[Point]) -> Point {
    let n = points.len() as f64;
    let (sx, sy) = points
        .iter()
        .fold((0.0, 0.0), |(sx, sy), p| (sx + p.x, sy + p.y));
    Point::new(sx / n, sy / n)
}

/// Distance between the mean of the right-eye points and the mean of the
/// left-eye points.
pub fn inter_ocular_distance(landmarks: &[Point]) -> f64 {
    let right = centroid(&landmarks[RIGHT_EYE]);
    let left = centroid(&landmarks[LEFT_EYE]);
    right.dist(left)
}

/// Translates the landmarks so their centroid is the origin and scales them
/// so the inter-ocular distance is 1. Invariant under any translation and
/// uniform scaling of the input; the identity on already-canonical input.
pub fn preprocess_face(landmarks: &[Point]) -> Result<Vec<Point>, FaceError> {
    if landmarks.len() != LANDMARK_COUNT {
        return Err(FaceError::WrongLandmarkCount(landmarks.len()));
    }
    let iod = inter_ocular_distance(landmarks);
    if iod < 1e-9 {
        return Err(FaceError::DegenerateInput);
    }
    let c = centroid(landmarks);
    Ok(landmarks
        .iter()
        .map(|p| Point::new((p.x - c.x) / iod, (p.y - c.y) / iod))
        .collect())
}

/// Names of the 17 face features, in output order. The formulas live in
/// [`extract_face_features`]; all lengths are in inter-ocular units and all
/// ratios are guarded against near-zero denominators.
pub const FACE_FEATURE_NAMES: [&str; 17] = [
    "mouth_width",            // |p48 - p54|
    "mouth_height",           // |p51 - p57|
    "mouth_corner_elevation", // mouth-mid y minus mean corner y
    "left_eye_openness",      // (|p43-p47| + |p44-p46|) / 2
    "right_eye_openness",     // (|p37-p41| + |p38-p40|) / 2
    "left_brow_eye_dist",     // |centroid(p22..=26) - centroid(left eye)|
    "right_brow_eye_dist",    // |centroid(p17..=21) - centroid(right eye)|
    "left_brow_slope",        // (y26 - y22) / |x26 - x22|, inner to outer
    "right_brow_slope",       // (y17 - y21) / |x17 - x21|, inner to outer
    "nose_chin_dist",         // |p30 - p8|
    "jaw_width",              // |p2 - p14|
    "mouth_jaw_ratio",        // mouth_width / jaw_width
    "mouth_aspect",           // mouth_height / mouth_width
    "eye_aspect",             // mean eye openness / mean eye width
    "brow_face_ratio",        // mean brow-eye dist / nose_chin_dist
    "smile_curvature",        // mouth_corner_elevation / mouth_width
    "face_elongation",        // nose_chin_dist / jaw_width
];

/// Number of face features.
pub const FACE_FEATURE_COUNT: usize = FACE_FEATURE_NAMES.len();

fn ratio(num: f64, denom: f64) -> f64 {
    if denom.abs() < 1e-9 {
        0.0
    } else {
        num / denom
    }
}

/// Computes the 17 geometric features of [`FACE_FEATURE_NAMES`] from
/// preprocessed landmarks.
pub fn extract_face_features(landmarks: &[Point]) -> Result<Vec<f64>, FaceError> {
    if landmarks.len() != LANDMARK_COUNT {
        return Err(FaceError::WrongLandmarkCount(landmarks.len()));
    }
    let p = landmarks;

    let mouth_width = p[48].dist(p[54]);
    let mouth_height = p[51].dist(p[57]);
    // y grows downward: corners above the mouth mid-line give positive values.
    let mouth_mid_y = (p[51].y + p[57].y) / 2.0;
    let corner_y = (p[48].y + p[54].y) / 2.0;
    let mouth_corner_elevation = mouth_mid_y - corner_y;

    let left_eye_openness = (p[43].dist(p[47]) + p[44].dist(p[46])) / 2.0;
    let right_eye_openness = (p[37].dist(p[41]) + p[38].dist(p[40])) / 2.0;

    let left_eye_center = centroid(&p[LEFT_EYE]);
    let right_eye_center = centroid(&p[RIGHT_EYE]);
    let left_brow_eye_dist = centroid(&p[22..27]).dist(left_eye_center);
    let right_brow_eye_dist = centroid(&p[17..22]).dist(right_eye_center);

    // Signed rise from inner to outer brow end, per unit of horizontal
    // extent. Mirror-symmetric faces give equal left/right values.
    let left_brow_slope = ratio(p[26].y - p[22].y, (p[26].x - p[22].x).abs());
    let right_brow_slope = ratio(p[17].y - p[21].y, (p[17].x - p[21].x).abs());

    let nose_chin_dist = p[30].dist(p[8]);
    let jaw_width = p[2].dist(p[14]);

    let eye_openness_mean = (left_eye_openness + right_eye_openness) / 2.0;
    let eye_width_mean = (p[36].dist(p[39]) + p[42].dist(p[45])) / 2.0;

    Ok(vec![
        mouth_width,
        mouth_height,
        mouth_corner_elevation,
        left_eye_openness,
        right_eye_openness,
        left_brow_eye_dist,
        right_brow_eye_dist,
        left_brow_slope,
        right_brow_slope,
        nose_chin_dist,
        jaw_width,
        ratio(mouth_width, jaw_width),
        ratio(mouth_height, mouth_width),
        ratio(eye_openness_mean, eye_width_mean),
        ratio(
            (left_brow_eye_dist + right_brow_eye_dist) / 2.0,
            nose_chin_dist,
        ),
        ratio(mouth_corner_elevation, mouth_width),
        ratio(nose_chin_dist, jaw_width),
    ])
}
