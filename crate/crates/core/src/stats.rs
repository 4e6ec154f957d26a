//! Student-t confidence intervals for small samples.

use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

/// Two-sided 95% quantiles `t(0.975, df)` for `df = 1..=30`.
const T_975: [f64; 30] = [
    12.706205, 4.302653, 3.182446, 2.776445, 2.570582, 2.446912, 2.364624, 2.306004, 2.262157,
    2.228139, 2.200985, 2.178813, 2.160369, 2.144787, 2.131450, 2.119905, 2.109816, 2.100922,
    2.093024, 2.085963, 2.079614, 2.073873, 2.068658, 2.063899, 2.059539, 2.055529, 2.051831,
    2.048407, 2.045230, 2.042272,
];

/// Upper quantile for a two-sided interval at `confidence` with `df` degrees of freedom.
pub fn t_quantile(confidence: f64, df: usize) -> f64 {
    if (confidence - 0.95).abs() < 1e-12 && (1..=30).contains(&df) {
        return T_975[df - 1];
    }
    let dist = StudentsT::new(0.0, 1.0, df as f64).expect("df >= 1");
    dist.inverse_cdf(0.5 + confidence / 2.0)
}

/// Mean and half-width `t * s / sqrt(n)` of a two-sided Student-t interval.
pub fn student_t_ci(samples: &[f64], confidence: f64) -> Result<(f64, f64)> {
    let n = samples.len();
    if n < 2 {
        return Err(Error::InsufficientSamples { needed: 2, got: n });
    }
    let mean = samples.iter().sum::<f64>() / n as f64;
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let half = t_quantile(confidence, n - 1) * var.sqrt() / (n as f64).sqrt();
    Ok((mean, half))
}

/// Mean and standard error of the mean.
pub fn mean_and_stderr(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    if samples.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_samples_have_zero_width() {
        let (mean, half) = student_t_ci(&[4.0; 15], 0.95).unwrap();
        assert_eq!(mean, 4.0);
        assert_eq!(half, 0.0);
    }

    #[test]
    fn three_samples_by_hand() {
        // s = 1, t(0.975, 2) = 4.302653 -> 4.302653 / sqrt(3)
        let (mean, half) = student_t_ci(&[1.0, 2.0, 3.0], 0.95).unwrap();
        assert_eq!(mean, 2.0);
        assert!((half - 2.484138).abs() < 1e-5, "{half}");
    }

    #[test]
    fn fifteen_samples_use_df_14() {
        assert!((t_quantile(0.95, 14) - 2.145).abs() < 1e-3);
        let samples: Vec<f64> = (0..15).map(f64::from).collect();
        let (_, half) = student_t_ci(&samples, 0.95).unwrap();
        let sd = (samples.iter().map(|x| (x - 7.0).powi(2)).sum::<f64>() / 14.0).sqrt();
        assert!((half - 2.144787 * sd / 15f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn table_agrees_with_distribution() {
        for df in 1..=30 {
            let exact = StudentsT::new(0.0, 1.0, df as f64).unwrap().inverse_cdf(0.975);
            assert!((exact - T_975[df - 1]).abs() < 1e-5, "df={df}");
        }
        assert!((t_quantile(0.95, 60) - 2.000298).abs() < 1e-4);
    }

    #[test]
    fn too_few_samples() {
        assert_eq!(
            student_t_ci(&[1.0], 0.95),
            Err(Error::InsufficientSamples { needed: 2, got: 1 })
        );
    }
}
