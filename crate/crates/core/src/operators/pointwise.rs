//! Parameter-free or single-parameter operators that rewrite the anomaly
//! directly: smoothing, reversal, negation and piecewise normalization.

use super::{Operator, OperatorContext, OperatorKind, OperatorParams, OperatorResult, OperatorSettings};
use crate::error::Result;
use crate::metrics::{pnd, znorm_euclidean};
use crate::series::{moving_mean_values, znormalize_values};

pub struct SmoothingOperator;

impl Operator for SmoothingOperator {
    fn kind(&self) -> OperatorKind {
        OperatorKind::Smoothing
    }

    fn apply(&self, ctx: &OperatorContext, settings: &OperatorSettings) -> Result<OperatorResult> {
        let window = settings.smoothing_window.min(ctx.len());
        let z = znormalize_values(&moving_mean_values(&ctx.anomaly, window));
        let d = ctx.distance_to_neighbor(&z);
        Ok(OperatorResult {
            operator_kind: OperatorKind::Smoothing,
            improvement: ctx.improvement(d),
            distance: d,
            params: OperatorParams::Smoothing { window },
            transformed: Some(z),
        })
    }
}

pub struct LrFlipOperator;

impl Operator for LrFlipOperator {
    fn kind(&self) -> OperatorKind {
        OperatorKind::LRFlip
    }

    fn apply(&self, ctx: &OperatorContext, _settings: &OperatorSettings) -> Result<OperatorResult> {
        let flipped: Vec<f64> = ctx.anomaly.iter().rev().copied().collect();
        let d = znorm_euclidean(&flipped, &ctx.neighbor)?;
        Ok(OperatorResult {
            operator_kind: OperatorKind::LRFlip,
            improvement: ctx.improvement(d),
            distance: d,
            params: OperatorParams::LRFlip,
            transformed: Some(znormalize_values(&flipped)),
        })
    }
}

pub struct UdFlipOperator;

impl Operator for UdFlipOperator {
    fn kind(&self) -> OperatorKind {
        OperatorKind::UDFlip
    }

    fn apply(&self, ctx: &OperatorContext, _settings: &OperatorSettings) -> Result<OperatorResult> {
        // negation is enough: z-normalization absorbs the reflection axis
        let flipped: Vec<f64> = ctx.anomaly.iter().map(|x| -x).collect();
        let d = znorm_euclidean(&flipped, &ctx.neighbor)?;
        Ok(OperatorResult {
            operator_kind: OperatorKind::UDFlip,
            improvement: ctx.improvement(d),
            distance: d,
            params: OperatorParams::UDFlip,
            transformed: Some(znormalize_values(&flipped)),
        })
    }
}

pub struct PiecewiseNormOperator;

impl Operator for PiecewiseNormOperator {
    fn kind(&self) -> OperatorKind {
        OperatorKind::PiecewiseNorm
    }

    fn apply(&self, ctx: &OperatorContext, settings: &OperatorSettings) -> Result<OperatorResult> {
        let split = pnd(&ctx.anomaly, &ctx.neighbor, settings.pnd_min_seg)?;
        let cut = split.split_index + 1;
        let mut transformed = znormalize_values(&ctx.anomaly[..cut]);
        transformed.extend(znormalize_values(&ctx.anomaly[cut..]));
        Ok(OperatorResult {
            operator_kind: OperatorKind::PiecewiseNorm,
            improvement: ctx.improvement(split.distance),
            distance: split.distance,
            params: OperatorParams::PiecewiseNorm {
                split_index: split.split_index,
            },
            transformed: Some(transformed),
        })
    }
}
