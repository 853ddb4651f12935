use crate::numerics::{norm, smooth_step};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Ratio radius/σ of the detector's truncated Gaussian. At this ratio the
/// truncation jump is e^{-37} ≈ 1e-16, below double precision.
pub const GAUSSIAN_TRUNCATION: f64 = 8.6;

/// Radial localization windows, all equal to 1 at the centre.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WindowSpec {
    /// e^{-|x|²/2σ²}, set to exactly 0 beyond `radius` when one is given.
    Gaussian {
        sigma: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        radius: Option<f64>,
    },
    /// 1 on |x| ≤ r/2, 0 on |x| ≥ r, with a C^∞ cosine transition.
    RaisedCosine { radius: f64 },
}

impl WindowSpec {
    /// Truncated Gaussian with support radius `r`.
    pub fn truncated_gaussian(r: f64) -> WindowSpec {
        WindowSpec::Gaussian {
            sigma: r / GAUSSIAN_TRUNCATION,
            radius: Some(r),
        }
    }

    pub fn support_radius(&self) -> f64 {
        match self {
            WindowSpec::Gaussian { sigma, radius } => radius.unwrap_or(GAUSSIAN_TRUNCATION * sigma),
            WindowSpec::RaisedCosine { radius } => *radius,
        }
    }

    /// Same shape with the support scaled by `k`.
    pub fn scaled(&self, k: f64) -> WindowSpec {
        match self {
            WindowSpec::Gaussian { sigma, radius } => WindowSpec::Gaussian {
                sigma: sigma * k,
                radius: radius.map(|r| r * k),
            },
            WindowSpec::RaisedCosine { radius } => WindowSpec::RaisedCosine { radius: radius * k },
        }
    }

    /// Window value at offset `dx` from its centre.
    pub fn eval(&self, dx: &[f64]) -> f64 {
        let r = norm(dx);
        match self {
            WindowSpec::Gaussian { sigma, radius } => {
                if radius.is_some_and(|rad| r > rad) {
                    0.0
                } else {
                    (-r * r / (2.0 * sigma * sigma)).exp()
                }
            }
            WindowSpec::RaisedCosine { radius } => {
                let half = radius / 2.0;
                if r <= half {
                    1.0
                } else if r >= *radius {
                    0.0
                } else {
                    0.5 * (1.0 + (PI * smooth_step((r - half) / half)).cos())
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn raised_cosine_profile() {
        let w = WindowSpec::RaisedCosine { radius: 2.0 };
        assert_eq!(w.eval(&[0.0]), 1.0);
        assert_eq!(w.eval(&[1.0]), 1.0);
        assert_eq!(w.eval(&[2.0]), 0.0);
        assert_eq!(w.eval(&[0.0, 2.5]), 0.0);
        assert!((w.eval(&[1.5]) - 0.5).abs() < 1e-14);
    }

    #[test]
    fn truncated_gaussian_edge_is_negligible() {
        let w = WindowSpec::truncated_gaussian(3.0);
        assert_eq!(w.eval(&[0.0]), 1.0);
        assert!(w.eval(&[3.0]) < 1e-16);
        assert_eq!(w.eval(&[3.0001]), 0.0);
    }

    proptest! {
        #[test]
        fn values_in_unit_interval(x in -5.0f64..5.0, y in -5.0f64..5.0, r in 0.1f64..4.0) {
            for w in [WindowSpec::RaisedCosine { radius: r }, WindowSpec::truncated_gaussian(r),
                      WindowSpec::Gaussian { sigma: r, radius: None }] {
                let v = w.eval(&[x, y]);
                prop_assert!((0.0..=1.0).contains(&v));
            }
        }
    }
}
