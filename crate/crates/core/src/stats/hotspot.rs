use serde::{Deserialize, Serialize};

use super::series::Series;
use super::StatsError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hotspot {
    pub index: i64,
    pub label: String,
    pub modified_ratio: f64,
    pub z_score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HotspotReport {
    pub threshold_z: f64,
    pub mean: f64,
    /// Population standard deviation.
    pub stddev: f64,
    pub zero_variance: bool,
    pub windows: Vec<Hotspot>,
}

/// Flags points whose z-score (population stddev) is at least `threshold_z`.
/// A constant series yields an empty report with `zero_variance` set.
pub fn detect_hotspots(ratios: &Series, threshold_z: f64) -> Result<HotspotReport, StatsError> {
    if !threshold_z.is_finite() {
        return Err(StatsError::InvalidArgument(format!(
            "threshold_z must be finite, got {threshold_z}"
        )));
    }
    let pts: Vec<_> = ratios.defined().collect();
    if pts.len() < 3 {
        return Err(StatsError::InsufficientSamples {
            needed: 3,
            got: pts.len(),
        });
    }
    let n = pts.len() as f64;
    let mean = pts.iter().map(|(_, v)| v).sum::<f64>() / n;
    let var = pts.iter().map(|(_, v)| (v - mean).powi(2)).sum::<f64>() / n;
    let stddev = var.sqrt();
    let zero_variance = pts.iter().all(|(_, v)| *v == pts[0].1);
    let windows = if zero_variance {
        Vec::new()
    } else {
        pts.iter()
            .filter_map(|(p, v)| {
                let mut z = (v - mean) / stddev;
                // values equal to the mean up to rounding sit exactly on it
                if z.abs() < 1e-12 {
                    z = 0.0;
                }
                (z >= threshold_z).then(|| Hotspot {
                    index: p.index,
                    label: p.label.clone(),
                    modified_ratio: *v,
                    z_score: z,
                })
            })
            .collect()
    };
    Ok(HotspotReport {
        threshold_z,
        mean,
        stddev: if zero_variance { 0.0 } else { stddev },
        zero_variance,
        windows,
    })
}
