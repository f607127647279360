use super::{Operator, OperatorContext, OperatorKind, OperatorParams, OperatorResult, OperatorSettings};
use crate::error::Result;
use crate::series::{resample_values, znormalize_values};

/// Global stretch or shrink of the time axis.
///
/// Stretching resamples the anomaly to `round(f * L)` points and keeps the
/// first `L`. Shrinking is done by stretching the neighbor instead and
/// comparing it to the anomaly; it is reported as a negative percent.
pub struct UniformScalingOperator;

fn stretched_prefix(xs: &[f64], percent: u32) -> Vec<f64> {
    let len = xs.len();
    // round(len * (100 + percent) / 100) in integer arithmetic
    let target = (2 * len * (100 + percent as usize) + 100) / 200;
    let mut out = resample_values(xs, target);
    out.truncate(len);
    out
}

fn stretched_distance(stretch: &[f64], fixed_z: &[f64], percent: u32) -> (f64, Vec<f64>) {
    let z = znormalize_values(&stretched_prefix(stretch, percent));
    (crate::metrics::sq_dist(&z, fixed_z).sqrt(), z)
}

fn percent_bound(fraction: f64) -> u32 {
    (fraction * 100.0).round().max(0.0) as u32
}

impl Operator for UniformScalingOperator {
    fn kind(&self) -> OperatorKind {
        OperatorKind::UniformScaling
    }

    fn apply(&self, ctx: &OperatorContext, settings: &OperatorSettings) -> Result<OperatorResult> {
        let grow = percent_bound(settings.scaling_max - 1.0);
        let shrink = percent_bound(1.0 - settings.scaling_min);
        let len = ctx.len();

        // identity first, then +1, -1, +2, -2, ... so ties favor small changes
        let mut best_percent = 0i32;
        let mut best = ctx.distance_to_neighbor(&ctx.z_anomaly);
        for p in 1..=grow.max(shrink) {
            if p <= grow {
                let (d, _) = stretched_distance(&ctx.anomaly, &ctx.z_neighbor, p);
                if d < best {
                    best = d;
                    best_percent = p as i32;
                }
            }
            if p <= shrink {
                let (d, _) = stretched_distance(&ctx.neighbor, &ctx.z_anomaly, p);
                if d < best {
                    best = d;
                    best_percent = -(p as i32);
                }
            }
        }

        let transformed = match best_percent {
            0 => ctx.z_anomaly.clone(),
            p if p > 0 => stretched_distance(&ctx.anomaly, &ctx.z_neighbor, p as u32).1,
            p => {
                // the anomaly squeezed by the inverse factor, shorter than L
                let factor = 1.0 + (-p) as f64 / 100.0;
                let target = ((len as f64 / factor).round() as usize).max(2);
                znormalize_values(&resample_values(&ctx.anomaly, target))
            }
        };

        Ok(OperatorResult {
            operator_kind: OperatorKind::UniformScaling,
            improvement: ctx.improvement(best),
            distance: best,
            params: OperatorParams::UniformScaling {
                percent: best_percent,
            },
            transformed: Some(transformed),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::test_support::exemplar;
    use crate::operators::apply_operator;

    fn run(a: &[f64], t: &[f64]) -> OperatorResult {
        apply_operator(OperatorKind::UniformScaling, a, t, &OperatorSettings::default()).unwrap()
    }

    fn percent(r: &OperatorResult) -> i32 {
        match r.params {
            OperatorParams::UniformScaling { percent } => percent,
            _ => unreachable!(),
        }
    }

    #[test]
    fn identity_cell() {
        let t = exemplar(100, 30.0);
        let r = run(&t, &t);
        assert_eq!(percent(&r), 0);
        assert_eq!(r.improvement, 0.0);
    }

    #[test]
    fn recovers_nine_percent_stretch() {
        // the anomaly runs faster than the neighbor: stretching it 9% and
        // truncating the surplus restores the match
        let t: Vec<f64> = exemplar(220, 40.0);
        let neighbor = t[..100].to_vec();
        let fast: Vec<f64> = (0..100)
            .map(|i| {
                let pos = i as f64 * 1.09;
                let i0 = pos.floor() as usize;
                t[i0] + (pos - i0 as f64) * (t[i0 + 1] - t[i0])
            })
            .collect();
        let r = run(&fast, &neighbor);
        assert!((percent(&r) - 9).abs() <= 1, "{:?}", r.params);
        assert!(r.improvement < 0.1);
    }

    #[test]
    fn shrink_is_reported_negative() {
        // anomaly slower than the neighbor: stretching the neighbor wins
        let t: Vec<f64> = exemplar(220, 40.0);
        let neighbor = t[..100].to_vec();
        let slow: Vec<f64> = (0..100)
            .map(|i| {
                let pos = i as f64 / 1.09;
                let i0 = pos.floor() as usize;
                t[i0] + (pos - i0 as f64) * (t[i0 + 1] - t[i0])
            })
            .collect();
        let r = run(&slow, &neighbor);
        assert!((percent(&r) + 9).abs() <= 1, "{:?}", r.params);
        assert!(r.improvement < 0.1);
    }

    #[test]
    fn never_worse_than_identity() {
        let t = exemplar(64, 16.0);
        let a: Vec<f64> = t.iter().enumerate().map(|(i, x)| x + (i as f64 * 1.3).sin()).collect();
        let r = run(&a, &t);
        assert!(r.improvement <= 1.0);
    }
}
