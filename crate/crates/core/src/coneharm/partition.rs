use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Angular sectors of frequency space.
///
/// In d = 1 the sectors are the half-lines: 0 is ξ > 0 and 1 is ξ < 0.
/// In d = 2 sector j is centred at θ_j = 2πj/n with base interval
/// [θ_j − π/n, θ_j + π/n); the widened sector has half-width λπ/n.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConePartition {
    pub d: usize,
    pub n_sectors: usize,
    pub lambda: f64,
}

/// Sector distance used for sectors that are never neighbours.
pub const FAR: usize = usize::MAX / 4;

impl ConePartition {
    pub fn new(d: usize, n_sectors: usize, lambda: f64) -> Result<ConePartition> {
        match d {
            1 if n_sectors == 2 => Ok(ConePartition { d, n_sectors, lambda: 1.0 }),
            1 => Err(Error::InvalidConfig("d = 1 partitions have exactly 2 sectors".into())),
            2 if n_sectors >= 4 && (1.0..=2.0).contains(&lambda) => Ok(ConePartition { d, n_sectors, lambda }),
            2 => Err(Error::InvalidConfig(format!(
                "d = 2 partitions need n >= 4 and λ in [1, 2], got n = {n_sectors}, λ = {lambda}"
            ))),
            _ => Err(Error::InvalidConfig(format!("unsupported dimension {d}"))),
        }
    }

    pub fn half_lines() -> ConePartition {
        ConePartition { d: 1, n_sectors: 2, lambda: 1.0 }
    }

    pub fn center_angle(&self, j: usize) -> f64 {
        2.0 * PI * j as f64 / self.n_sectors as f64
    }

    /// Base angular half-width π/n (d = 2).
    pub fn half_width(&self) -> f64 {
        PI / self.n_sectors as f64
    }

    /// `(start, end)` angles of the base sector, start inclusive.
    pub fn base_interval(&self, j: usize) -> (f64, f64) {
        let c = self.center_angle(j);
        (c - self.half_width(), c + self.half_width())
    }

    pub fn widened_interval(&self, j: usize) -> (f64, f64) {
        let c = self.center_angle(j);
        let w = self.lambda * self.half_width();
        (c - w, c + w)
    }

    /// The base sector containing ξ ≠ 0, or `None` for ξ = 0.
    pub fn sector_of(&self, xi: &[f64]) -> Option<usize> {
        if self.d == 1 {
            return if xi[0] > 0.0 {
                Some(0)
            } else if xi[0] < 0.0 {
                Some(1)
            } else {
                None
            };
        }
        if xi[0] == 0.0 && xi[1] == 0.0 {
            return None;
        }
        let theta = xi[1].atan2(xi[0]);
        let shifted = (theta + self.half_width()).rem_euclid(2.0 * PI);
        let j = (shifted / (2.0 * self.half_width())).floor() as usize;
        Some(j % self.n_sectors)
    }

    /// Angular distance from the direction of ξ to the centre of sector j.
    pub fn angle_to_center(&self, j: usize, xi: &[f64]) -> f64 {
        let theta = xi[1].atan2(xi[0]);
        let diff = (theta - self.center_angle(j)).rem_euclid(2.0 * PI);
        diff.min(2.0 * PI - diff)
    }

    pub fn in_widened(&self, j: usize, xi: &[f64]) -> bool {
        // without widening the sectors stay half-open so they tile R^d \ 0
        if self.d == 1 || self.lambda == 1.0 {
            return self.sector_of(xi) == Some(j);
        }
        if xi[0] == 0.0 && xi[1] == 0.0 {
            return false;
        }
        self.angle_to_center(j, xi) <= self.lambda * self.half_width() + 1e-12
    }

    /// Index distance between sectors; d = 1 half-lines are never neighbours.
    pub fn sector_distance(&self, i: usize, j: usize) -> usize {
        if i == j {
            return 0;
        }
        if self.d == 1 {
            return FAR;
        }
        let n = self.n_sectors;
        let diff = (i + n - j) % n;
        diff.min(n - diff)
    }

    /// Sector obtained by rotating sector j by `steps` sector widths.
    pub fn rotate(&self, j: usize, steps: i64) -> usize {
        (j as i64 + steps).rem_euclid(self.n_sectors as i64) as usize
    }

    /// Unit direction of the sector centre.
    pub fn direction(&self, j: usize) -> Vec<f64> {
        if self.d == 1 {
            return vec![if j == 0 { 1.0 } else { -1.0 }];
        }
        let t = self.center_angle(j);
        vec![t.cos(), t.sin()]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn half_lines() {
        let p = ConePartition::new(1, 2, 1.0).unwrap();
        assert_eq!(p.sector_of(&[2.0]), Some(0));
        assert_eq!(p.sector_of(&[-0.1]), Some(1));
        assert_eq!(p.sector_of(&[0.0]), None);
        assert!(ConePartition::new(1, 3, 1.0).is_err());
        assert_eq!(p.sector_distance(0, 1), FAR);
    }

    #[test]
    fn quadrants_are_centred_on_the_axes() {
        let p = ConePartition::new(2, 4, 1.0).unwrap();
        assert_eq!(p.sector_of(&[1.0, 0.5]), Some(0));
        assert_eq!(p.sector_of(&[0.0, 1.0]), Some(1));
        // the diagonal is a boundary; the start of each interval is inclusive
        assert_eq!(p.sector_of(&[1.0, 1.0]), Some(1));
        assert_eq!(p.sector_of(&[1.0, -1.0]), Some(0));
        assert!(ConePartition::new(2, 3, 1.0).is_err());
        assert!(ConePartition::new(2, 8, 2.5).is_err());
    }

    #[test]
    fn widened_width_arithmetic() {
        let p = ConePartition::new(2, 16, 1.5).unwrap();
        let (a, b) = p.base_interval(3);
        let (c, d) = p.widened_interval(3);
        assert!(((b - a).to_degrees() - 22.5).abs() < 1e-12);
        assert!(((d - c).to_degrees() - 33.75).abs() < 1e-12);
        assert!(((a + b) / 2.0 - (c + d) / 2.0).abs() < 1e-15);
        assert_eq!(p.sector_distance(0, 15), 1);
        assert_eq!(p.sector_distance(2, 10), 8);
    }

    proptest! {
        #[test]
        fn every_direction_has_a_base_sector_inside_its_widening(
            n in 4usize..24, lambda in 1.0f64..2.0, a in -100.0f64..100.0, b in -100.0f64..100.0
        ) {
            prop_assume!(a != 0.0 || b != 0.0);
            let p = ConePartition::new(2, n, lambda).unwrap();
            let j = p.sector_of(&[a, b]).unwrap();
            prop_assert!(j < n);
            prop_assert!(p.in_widened(j, &[a, b]));
            prop_assert!(p.angle_to_center(j, &[a, b]) <= p.half_width() + 1e-12);
        }
    }
}
