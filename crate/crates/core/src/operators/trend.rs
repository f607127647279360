use super::{Operator, OperatorContext, OperatorKind, OperatorParams, OperatorResult, OperatorSettings};
use crate::error::Result;
use crate::series::{fit_line_values, is_flat, mean_std, znormalize_values};

/// Add the linear trend that best cancels the anomaly's drift.
///
/// Slopes are searched on an evenly spaced grid over
/// `[-k sigma / L, +k sigma / L]` (sigma of the anomaly, k =
/// `trend_max_sigmas`), which contains zero, plus the slope that removes the
/// anomaly's own least-squares line when it lies inside the bounds.
pub struct LinearTrendOperator;

fn with_trend(xs: &[f64], slope: f64) -> Vec<f64> {
    let shifted: Vec<f64> = xs
        .iter()
        .enumerate()
        .map(|(i, x)| x + slope * i as f64)
        .collect();
    znormalize_values(&shifted)
}

impl Operator for LinearTrendOperator {
    fn kind(&self) -> OperatorKind {
        OperatorKind::LinearTrend
    }

    fn apply(&self, ctx: &OperatorContext, settings: &OperatorSettings) -> Result<OperatorResult> {
        let len = ctx.len();
        let (_, sigma) = mean_std(&ctx.anomaly);
        let sigma = if is_flat(&ctx.anomaly, sigma) { 0.0 } else { sigma };
        let s_max = settings.trend_max_sigmas * sigma / len as f64;
        let half = (settings.trend_grid_points / 2) as i64;

        let mut candidates: Vec<f64> = (-half..=half)
            .map(|k| s_max * k as f64 / half as f64)
            .collect();
        let detrend = -fit_line_values(&ctx.anomaly).slope;
        if detrend.abs() <= s_max {
            candidates.push(detrend);
        }

        // zero first so a trendless anomaly keeps slope 0 on ties
        let mut best_slope = 0.0;
        let mut best = ctx.distance_to_neighbor(&ctx.z_anomaly);
        let mut best_z = ctx.z_anomaly.clone();
        for s in candidates {
            if s == 0.0 {
                continue;
            }
            let z = with_trend(&ctx.anomaly, s);
            let d = ctx.distance_to_neighbor(&z);
            if d < best {
                best = d;
                best_slope = s;
                best_z = z;
            }
        }

        let slope_sigmas = if sigma > 0.0 { best_slope / sigma } else { 0.0 };
        Ok(OperatorResult {
            operator_kind: OperatorKind::LinearTrend,
            improvement: ctx.improvement(best),
            distance: best,
            params: OperatorParams::LinearTrend {
                slope_sigmas,
                rise_sigmas: -slope_sigmas * (len - 1) as f64,
            },
            transformed: Some(best_z),
        })
    }
}
