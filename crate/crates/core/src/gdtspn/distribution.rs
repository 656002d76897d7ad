use rand::Rng;
use serde::{Deserialize, Serialize};

use super::normal;
use crate::error::{Error, Result};

/// Survival probability below which the remaining support counts as exhausted.
pub const EXHAUSTED_SURVIVAL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DistributionKind {
    Normal { mean: f64, std_dev: f64 },
    Dirac { value: f64 },
}

/// Activity duration distribution. Units are whatever the caller uses
/// consistently; the prediction pipeline works in milliseconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DurationDistribution {
    pub kind: DistributionKind,
    /// Number of observations the distribution was fitted from.
    pub sample_count: usize,
}

impl DurationDistribution {
    /// Normal distribution; a zero standard deviation collapses to a Dirac.
    pub fn normal(mean: f64, std_dev: f64) -> Result<Self> {
        if !(mean.is_finite() && std_dev.is_finite()) || std_dev < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "normal({mean}, {std_dev}) needs finite parameters and std_dev >= 0"
            )));
        }
        let kind = if std_dev == 0.0 {
            DistributionKind::Dirac { value: mean }
        } else {
            DistributionKind::Normal { mean, std_dev }
        };
        Ok(Self {
            kind,
            sample_count: 0,
        })
    }

    pub fn dirac(value: f64) -> Result<Self> {
        if !value.is_finite() || value < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "dirac({value}) needs a finite non-negative value"
            )));
        }
        Ok(Self {
            kind: DistributionKind::Dirac { value },
            sample_count: 0,
        })
    }

    /// Maximum-likelihood normal fit (population standard deviation).
    /// No samples gives `dirac(0)`; one sample or zero spread gives a Dirac at
    /// the mean. Samples are summed in sorted order, so the result does not
    /// depend on their order.
    pub fn fit(samples: &[f64]) -> Self {
        let mut sorted = samples.to_vec();
        sorted.sort_by(f64::total_cmp);
        let samples = sorted.as_slice();
        let n = samples.len();
        let kind = if n == 0 {
            DistributionKind::Dirac { value: 0.0 }
        } else {
            let mean = samples.iter().sum::<f64>() / n as f64;
            let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
            let std_dev = var.sqrt();
            if n == 1 || std_dev == 0.0 {
                DistributionKind::Dirac {
                    value: mean.max(0.0),
                }
            } else {
                DistributionKind::Normal { mean, std_dev }
            }
        };
        Self {
            kind,
            sample_count: n,
        }
    }

    pub fn with_sample_count(mut self, n: usize) -> Self {
        self.sample_count = n;
        self
    }

    pub fn mean(&self) -> f64 {
        match self.kind {
            DistributionKind::Normal { mean, .. } => mean,
            DistributionKind::Dirac { value } => value,
        }
    }

    /// Draws a duration conditioned on being at least `elapsed` (and at least
    /// zero), by inverse-CDF sampling of the truncated density. Once the
    /// remaining survival probability drops to [`EXHAUSTED_SURVIVAL`] the
    /// result is `elapsed` itself.
    pub fn truncated_sample<R: Rng + ?Sized>(&self, elapsed: f64, rng: &mut R) -> f64 {
        let lower = elapsed.max(0.0);
        match self.kind {
            DistributionKind::Dirac { value } => value.max(lower),
            DistributionKind::Normal { mean, std_dev } => {
                let z = (lower - mean) / std_dev;
                let r: f64 = rng.random();
                let x = if z <= 0.0 {
                    let below = normal::cdf(z);
                    let u = (below + (1.0 - below) * r).min(1.0 - f64::EPSILON / 2.0);
                    normal::probit(u.max(f64::MIN_POSITIVE))
                } else {
                    let survival = normal::sf(z);
                    if survival <= EXHAUSTED_SURVIVAL {
                        return lower;
                    }
                    // q in (0, survival]; x is the upper quantile of q
                    -normal::probit(survival * (1.0 - r))
                };
                (mean + std_dev * x).max(lower)
            }
        }
    }

    /// Mean of the distribution truncated below at `max(elapsed, 0)`.
    pub fn truncated_mean(&self, elapsed: f64) -> f64 {
        let lower = elapsed.max(0.0);
        match self.kind {
            DistributionKind::Dirac { value } => value.max(lower),
            DistributionKind::Normal { mean, std_dev } => {
                let z = (lower - mean) / std_dev;
                let survival = normal::sf(z);
                if survival <= EXHAUSTED_SURVIVAL {
                    lower
                } else {
                    mean + std_dev * normal::pdf(z) / survival
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn fit_rules() {
        let d = DurationDistribution::fit(&[10.0, 20.0]);
        assert_eq!(
            d.kind,
            DistributionKind::Normal {
                mean: 15.0,
                std_dev: 5.0
            }
        );
        assert_eq!(d.sample_count, 2);
        assert_eq!(
            DurationDistribution::fit(&[7.0]).kind,
            DistributionKind::Dirac { value: 7.0 }
        );
        assert_eq!(
            DurationDistribution::fit(&[3.0, 3.0, 3.0]).kind,
            DistributionKind::Dirac { value: 3.0 }
        );
        let empty = DurationDistribution::fit(&[]);
        assert_eq!(empty.kind, DistributionKind::Dirac { value: 0.0 });
        assert_eq!(empty.sample_count, 0);
    }

    #[test]
    fn fit_ignores_order() {
        let a = [0.1, 1e9, 3.3, 7.0, 0.2];
        let mut b = a;
        b.reverse();
        assert_eq!(DurationDistribution::fit(&a), DurationDistribution::fit(&b));
    }

    #[test]
    fn zero_sigma_is_dirac() {
        assert_eq!(
            DurationDistribution::normal(4.0, 0.0).unwrap().kind,
            DistributionKind::Dirac { value: 4.0 }
        );
        assert!(DurationDistribution::normal(4.0, -1.0).is_err());
        assert!(DurationDistribution::dirac(-1.0).is_err());
    }

    #[test]
    fn dirac_is_clamped_by_elapsed() {
        let d = DurationDistribution::dirac(50.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(d.truncated_sample(80.0, &mut rng), 80.0);
        assert_eq!(d.truncated_sample(20.0, &mut rng), 50.0);
    }

    #[test]
    fn exhausted_support_returns_elapsed() {
        let d = DurationDistribution::normal(100.0, 10.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        // 1 - Φ(7.1) ≈ 6e-13
        for _ in 0..1000 {
            assert_eq!(d.truncated_sample(171.0, &mut rng), 171.0);
        }
    }

    #[test]
    fn truncated_mean_formula() {
        let d = DurationDistribution::normal(100.0, 10.0).unwrap();
        assert!((d.truncated_mean(100.0) - 107.978_845_608_028_65).abs() < 1e-9);
        assert!((d.truncated_mean(0.0) - 100.0).abs() < 1e-9);
    }

    proptest! {
        #[test]
        fn samples_respect_lower_bound(
            mean in -50.0f64..200.0,
            sd in 0.01f64..80.0,
            elapsed in -10.0f64..400.0,
            seed in any::<u64>(),
        ) {
            let d = DurationDistribution::normal(mean, sd).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..50 {
                let x = d.truncated_sample(elapsed, &mut rng);
                prop_assert!(x.is_finite());
                prop_assert!(x >= elapsed.max(0.0));
            }
        }
    }
}
