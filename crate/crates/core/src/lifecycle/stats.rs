use crate::scalar::Scalar;

use super::Thresholds;

/// Two-sided score interval for a binomial proportion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WilsonInterval<T> {
    pub lower: T,
    pub upper: T,
}

/// Wilson score interval for `successes` out of `trials` at normal quantile
/// `z`. `None` when there are no trials.
pub fn wilson_interval<T: Scalar>(successes: u32, trials: u32, z: T) -> Option<WilsonInterval<T>> {
    if trials == 0 {
        return None;
    }
    let successes = successes.min(trials);
    let n = T::from_count(trials as usize);
    let p = T::from_count(successes as usize) / n;
    let z2 = z * z;
    let two = T::two();
    let four = two * two;
    let denom = T::one() + z2 / n;
    let center = (p + z2 / (two * n)) / denom;
    let spread = z * (p * (T::one() - p) / n + z2 / (four * n * n)).sqrt() / denom;
    Some(WilsonInterval {
        lower: (center - spread).max(T::zero()),
        upper: (center + spread).min(T::one()),
    })
}

fn mean<T: Scalar>(values: &[T]) -> T {
    values.iter().fold(T::zero(), |acc, v| acc + *v) / T::from_count(values.len())
}

fn population_std<T: Scalar>(values: &[T], mean: T) -> T {
    let var = values
        .iter()
        .fold(T::zero(), |acc, v| acc + (*v - mean) * (*v - mean))
        / T::from_count(values.len());
    var.sqrt()
}

/// Whether a value stream has settled: at least two full windows, a last
/// window with coefficient of variation at most `cv_max`, and the last two
/// window means within `cv_max` times the overall mean of each other.
pub fn distribution_converged<T: Scalar>(values: &[T], thresholds: &Thresholds<T>) -> bool {
    let w = thresholds.window;
    if w == 0 || values.len() < 2 * w || values.iter().any(|v| !v.is_finite()) {
        return false;
    }
    let last = &values[values.len() - w..];
    let previous = &values[values.len() - 2 * w..values.len() - w];
    let last_mean = mean(last);
    let std = population_std(last, last_mean);
    let cv = if std == T::zero() {
        T::zero()
    } else if last_mean == T::zero() {
        return false;
    } else {
        std / last_mean.abs()
    };
    if cv > thresholds.cv_max {
        return false;
    }
    let overall = mean(values);
    (last_mean - mean(previous)).abs() <= thresholds.cv_max * overall.abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_examples() {
        let w = wilson_interval(29, 30, 1.96f64).unwrap();
        assert!((w.lower - 0.8333).abs() < 1e-3, "{w:?}");
        assert!(w.lower >= 0.8);
        let w = wilson_interval(15, 30, 1.96f64).unwrap();
        assert!(w.upper < 0.8);
        assert!((w.upper - 0.6685).abs() < 1e-3, "{w:?}");
        assert!(wilson_interval(0, 0, 1.96f64).is_none());
    }

    #[test]
    fn wilson_matches_high_precision_reference() {
        // Reference values evaluated with 50-digit arithmetic.
        let cases: [(u32, u32, f64, f64); 4] = [
            (29, 30, 0.833_292_486_030_411_25, 0.994_091_562_005_142_62),
            (15, 30, 0.331_538_512_271_737_62, 0.668_461_487_728_262_38),
            (30, 30, 0.886_482_908_609_522_01, 1.0),
            (0, 10, 0.0, 0.277_540_168_766_616_58),
        ];
        for (k, n, lo, hi) in cases {
            let w = wilson_interval(k, n, 1.96f64).unwrap();
            assert!((w.lower - lo).abs() < 1e-12, "{k}/{n}: {w:?}");
            assert!((w.upper - hi).abs() < 1e-12, "{k}/{n}: {w:?}");
            let w32 = wilson_interval(k, n, 1.96f32).unwrap();
            assert!((w32.lower as f64 - lo).abs() < 1e-5);
        }
    }

    #[test]
    fn constant_stream_converges() {
        let values = vec![7.0f64; 40];
        assert!(distribution_converged(&values, &Thresholds::default()));
    }

    #[test]
    fn alternating_stream_does_not_converge() {
        let values: Vec<f64> = (0..40).map(|i| if i % 2 == 0 { 0.0 } else { 100.0 }).collect();
        // Last window: mean 50, population std 50, CV 1.0 > 0.25.
        assert!(!distribution_converged(&values, &Thresholds::default()));
        let values: Vec<f64> = (0..80).map(|i| if i % 2 == 0 { 0.0 } else { 100.0 }).collect();
        assert!(!distribution_converged(&values, &Thresholds::default()));
    }

    #[test]
    fn short_stream_does_not_converge() {
        assert!(!distribution_converged(&[1.0f64; 10], &Thresholds::default()));
        assert!(!distribution_converged(&[1.0f64; 39], &Thresholds::default()));
    }

    #[test]
    fn shifting_mean_does_not_converge() {
        let mut values = vec![10.0f64; 20];
        values.extend(vec![20.0; 20]);
        // Both windows have CV 0 but the means differ by 10 > 0.25 * 15.
        assert!(!distribution_converged(&values, &Thresholds::default()));
        let mut values = vec![10.0f64; 20];
        values.extend(vec![11.0; 20]);
        assert!(distribution_converged(&values, &Thresholds::default()));
    }

    #[test]
    fn zero_mean_with_spread_is_not_converged() {
        let values: Vec<f64> = (0..40).map(|i| if i % 2 == 0 { -1.0 } else { 1.0 }).collect();
        assert!(!distribution_converged(&values, &Thresholds::default()));
        assert!(distribution_converged(&[0.0f32; 40], &Thresholds::default()));
    }
}
