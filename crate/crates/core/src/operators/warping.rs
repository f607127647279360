use super::{Operator, OperatorContext, OperatorKind, OperatorParams, OperatorResult, OperatorSettings};
use crate::error::Result;
use crate::metrics::{default_band, dtw};

/// Local time-axis misalignment, scored by DTW inflated by how little of the
/// band the warping path actually used.
pub struct WarpingOperator;

impl Operator for WarpingOperator {
    fn kind(&self) -> OperatorKind {
        OperatorKind::Warping
    }

    fn apply(&self, ctx: &OperatorContext, settings: &OperatorSettings) -> Result<OperatorResult> {
        let len = ctx.len();
        let band = default_band(len, settings.dtw_band_fraction).min(len);
        let warp = dtw(&ctx.anomaly, &ctx.neighbor, band)?;
        let params = OperatorParams::Warping {
            band,
            max_deviation: warp.max_deviation,
            path_length: warp.path_length,
        };
        // a diagonal path is plain Euclidean distance: no gain
        let (distance, improvement) = if warp.path_length == len {
            (ctx.base_distance, 1.0)
        } else {
            let stretch = len as f64 / (warp.path_length - len) as f64;
            let d = warp.distance * stretch;
            (d, ctx.improvement(d))
        };
        Ok(OperatorResult {
            operator_kind: OperatorKind::Warping,
            improvement,
            distance,
            params,
            transformed: None,
        })
    }
}
