//! Voice frame preprocessing: log compression, per-frame z-scoring of the
//! band energies, and a normalized pitch term.

use crate::event::VOICE_BAND_COUNT;

/// Length of a preprocessed voice feature vector: 26 z-scored log band
/// energies plus the normalized pitch.
pub const VOICE_FEATURE_COUNT: usize = VOICE_BAND_COUNT + 1;

/// Pitch is mapped linearly by `pitch_hz / 500` and clamped to `[0, 1]`.
pub const PITCH_NORM_HZ: f64 = 500.0;

#[derive(Debug, Clone, thiserror::Error, PartialEq, Eq)]
pub enum VoiceError {
    #[error("expected {VOICE_BAND_COUNT} band energies, got {0}")]
    WrongBandCount(usize),
}

/// Produces the 27 voice features: `ln(1 + e)` per band, z-scored across the
/// 26 bands of this frame (population standard deviation; a zero-variance
/// frame maps to all zeros), then the clamped normalized pitch.
pub fn preprocess_voice(band_energies: &[f64], pitch_hz: f64) -> Result<Vec<f64>, VoiceError> {
    if band_energies.len() != VOICE_BAND_COUNT {
        return Err(VoiceError::WrongBandCount(band_energies.len()));
    }
    let logs: Vec<f64> = band_energies.iter().map(|&e| (1.0 + e).ln()).collect();
    let n = logs.len() as f64;
    let mean = logs.iter().sum::<f64>() / n;
    let var = logs.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let std = var.sqrt();

    let mut out: Vec<f64> = if std < 1e-12 {
        vec![0.0; VOICE_BAND_COUNT]
    } else {
        logs.iter().map(|v| (v - mean) / std).collect()
    };
    out.push((pitch_hz / PITCH_NORM_HZ).clamp(0.0, 1.0));
    Ok(out)
}
