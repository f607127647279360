use super::{
    OcclusionSubkind, Operator, OperatorContext, OperatorKind, OperatorParams, OperatorResult,
    OperatorSettings,
};
use crate::error::Result;
use crate::metrics::oed;
use crate::series::{mean, mean_std};

/// Ignore one contiguous region of the anomaly, at a price.
pub struct OcclusionOperator;

/// Spike if the occluded mean is at least one standard deviation above the
/// rest of the series, dropout if at least one below, noise otherwise.
pub fn classify_occlusion(series: &[f64], location: usize, length: usize) -> OcclusionSubkind {
    let end = location + length;
    if length == 0 || end > series.len() || length == series.len() {
        return OcclusionSubkind::Noise;
    }
    let occluded = mean(&series[location..end]);
    let rest: Vec<f64> = series[..location]
        .iter()
        .chain(&series[end..])
        .copied()
        .collect();
    let (mu, sd) = mean_std(&rest);
    if occluded >= mu + sd {
        OcclusionSubkind::Spike
    } else if occluded <= mu - sd {
        OcclusionSubkind::Dropout
    } else {
        OcclusionSubkind::Noise
    }
}

impl Operator for OcclusionOperator {
    fn kind(&self) -> OperatorKind {
        OperatorKind::Occlusion
    }

    fn apply(&self, ctx: &OperatorContext, _settings: &OperatorSettings) -> Result<OperatorResult> {
        let found = oed(&ctx.z_neighbor, &ctx.z_anomaly)?;
        let subkind = classify_occlusion(&ctx.z_anomaly, found.location, found.length);
        Ok(OperatorResult {
            operator_kind: OperatorKind::Occlusion,
            improvement: ctx.improvement(found.distance),
            distance: found.distance,
            params: OperatorParams::Occlusion {
                location: found.location,
                length: found.length,
                subkind,
            },
            transformed: None,
        })
    }
}
