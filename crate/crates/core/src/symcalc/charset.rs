//! Cone-localized surrogate for the characteristic set.
//!
//! A pair (x₀, Γ_j) is reported characteristic when |a|/ω₀ drops below
//! `c_min` somewhere on B(x₀, r) × (widened Γ_j ∩ {R ≤ |ξ| ≤ ξ_max}).
//! This is a lattice probe of the definition, which asks for a parametrix
//! on an open cone; it can miss a degeneration that happens between probe
//! points or above ξ_max.

use super::class::{probe_min, probe_radii};
use super::symbol::SymbolSpec;
use crate::coneharm::ConePartition;
use crate::error::{Error, Result};
use crate::fields::Grid;
use crate::weights::WeightSpec;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CharSetConfig {
    /// Radius of the x-ball probed around each centre.
    pub x_radius: f64,
    pub r_low: f64,
    pub xi_max: f64,
    /// Threshold; defaults to 1e-3 times the median probed ratio.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_min: Option<f64>,
    pub n_radii: usize,
    pub n_angles: usize,
}

impl CharSetConfig {
    /// R = 4Δξ and ξ_max = 0.9 ξ_Nyquist on `grid`.
    pub fn for_grid(grid: &Grid, x_radius: f64) -> CharSetConfig {
        let d = grid.dim();
        let dxi = (0..d).map(|a| grid.dxi(a)).fold(0.0, f64::max);
        let nyq = (0..d).map(|a| grid.nyquist(a)).fold(f64::INFINITY, f64::min);
        CharSetConfig {
            x_radius,
            r_low: 4.0 * dxi,
            xi_max: 0.9 * nyq,
            c_min: None,
            n_radii: 24,
            n_angles: 16,
        }
    }

    pub fn with_c_min(mut self, c: f64) -> Self {
        self.c_min = Some(c);
        self
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CharRecord {
    pub center: usize,
    pub x: Vec<f64>,
    pub sector: usize,
    pub margin: f64,
    pub characteristic: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CharSetEstimate {
    pub partition: ConePartition,
    pub centers: Vec<Vec<f64>>,
    pub config: CharSetConfig,
    pub c_min: f64,
    pub records: Vec<CharRecord>,
}

impl CharSetEstimate {
    /// (centre index, sector) pairs in the same indexing as wave-front estimates.
    pub fn characteristic(&self) -> BTreeSet<(usize, usize)> {
        self.records
            .iter()
            .filter(|r| r.characteristic)
            .map(|r| (r.center, r.sector))
            .collect()
    }

    pub fn sectors_at(&self, center: usize) -> BTreeSet<usize> {
        self.records
            .iter()
            .filter(|r| r.center == center && r.characteristic)
            .map(|r| r.sector)
            .collect()
    }
}

/// Unit directions covering the widened sector j, endpoints included.
fn sector_directions(p: &ConePartition, j: usize, n: usize) -> Vec<Vec<f64>> {
    if p.d == 1 {
        return vec![p.direction(j)];
    }
    let (a, b) = p.widened_interval(j);
    // with λ = 1 the end angle belongs to the next sector
    let end = if p.lambda == 1.0 { b - 1e-9 } else { b };
    (0..n)
        .map(|i| {
            let t = a + (end - a) * i as f64 / (n - 1).max(1) as f64;
            vec![t.cos(), t.sin()]
        })
        .collect()
}

fn ball_points(x0: &[f64], r: f64) -> Vec<Vec<f64>> {
    let mut out = vec![x0.to_vec()];
    for a in 0..x0.len() {
        for s in [-1.0, -0.5, 0.5, 1.0] {
            let mut p = x0.to_vec();
            p[a] += s * r;
            out.push(p);
        }
    }
    out
}

pub fn char_set(
    a: &SymbolSpec,
    w: &WeightSpec,
    partition: &ConePartition,
    centers: &[Vec<f64>],
    cfg: &CharSetConfig,
) -> Result<CharSetEstimate> {
    let d = a.dim();
    if partition.d != d || w.dim() != d {
        return Err(Error::IncompatibleGrid("symbol, weight and partition dimensions differ".into()));
    }
    if !(cfg.r_low > 0.0 && cfg.xi_max > cfg.r_low) {
        return Err(Error::InvalidConfig("char_set needs 0 < R < ξ_max".into()));
    }
    let radii = probe_radii(cfg.r_low, cfg.xi_max, cfg.n_radii);
    let x_free = a.is_x_independent() && w.is_x_independent();
    // margins[(c, j)] and every probed ratio for the median
    let mut margins = Vec::with_capacity(centers.len() * partition.n_sectors);
    let mut all = Vec::new();
    let mut cache: Vec<Option<f64>> = vec![None; partition.n_sectors];
    for x0 in centers {
        if x0.len() != d {
            return Err(Error::InvalidConfig("centre dimension mismatch".into()));
        }
        for j in 0..partition.n_sectors {
            if x_free {
                if let Some(m) = cache[j] {
                    margins.push(m);
                    continue;
                }
            }
            let dirs = sector_directions(partition, j, cfg.n_angles);
            let xs = if x_free { vec![x0.clone()] } else { ball_points(x0, cfg.x_radius) };
            let (m, vals) = probe_min(a, w, &xs, &dirs, &radii)?;
            all.extend(vals);
            cache[j] = Some(m);
            margins.push(m);
        }
    }
    let c_min = match cfg.c_min {
        Some(c) => c,
        None => {
            all.sort_by(f64::total_cmp);
            1e-3 * all.get(all.len() / 2).copied().unwrap_or(0.0)
        }
    };
    let mut records = Vec::with_capacity(margins.len());
    for (c, x0) in centers.iter().enumerate() {
        for j in 0..partition.n_sectors {
            let m = margins[c * partition.n_sectors + j];
            records.push(CharRecord {
                center: c,
                x: x0.clone(),
                sector: j,
                margin: m,
                characteristic: m < c_min,
            });
        }
    }
    Ok(CharSetEstimate {
        partition: partition.clone(),
        centers: centers.to_vec(),
        config: cfg.clone(),
        c_min,
        records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn heat_grid() -> Grid {
        Grid::centered(2, 64, PI / 64.0)
    }

    #[test]
    fn heat_operator_is_characteristic_only_along_the_time_axis_classically() {
        let g = heat_grid();
        let p = ConePartition::new(2, 8, 1.2).unwrap();
        let cfg = CharSetConfig::for_grid(&g, 0.5).with_c_min(0.05);
        let a = SymbolSpec::heat();
        let cl = char_set(&a, &WeightSpec::japanese_bracket(2, 2.0), &p, &[vec![0.0, 0.0]], &cfg).unwrap();
        let flagged: Vec<usize> = cl.sectors_at(0).into_iter().collect();
        assert_eq!(flagged, vec![2, 6]);
        let hw = char_set(&a, &WeightSpec::heat(), &p, &[vec![0.0, 0.0]], &cfg).unwrap();
        assert!(hw.characteristic().is_empty());
    }

    #[test]
    fn directional_symbol_flags_the_sectors_meeting_its_cone() {
        let g = Grid::centered(2, 64, 0.25);
        let p = ConePartition::new(2, 8, 1.2).unwrap();
        let a = SymbolSpec::directional(0.0, p.center_angle(2), p.half_width(), Some(p.half_width())).unwrap();
        let centers = vec![vec![0.0, 0.0], vec![1.0, -1.0]];
        let est = char_set(&a, &WeightSpec::one(2), &p, &centers, &CharSetConfig::for_grid(&g, 1.0)).unwrap();
        for c in 0..2 {
            assert_eq!(est.sectors_at(c).into_iter().collect::<Vec<_>>(), vec![1, 2, 3]);
        }
    }

    #[test]
    fn one_dimensional_half_lines() {
        let g = Grid::centered(1, 256, 0.1);
        let p = ConePartition::half_lines();
        let a = SymbolSpec::expr(1, "xi1 + sqrt(1 + xi1^2)").unwrap();
        let est = char_set(&a, &WeightSpec::japanese_bracket(1, 1.0), &p, &[vec![0.0]], &CharSetConfig::for_grid(&g, 1.0))
            .unwrap();
        assert_eq!(est.sectors_at(0).into_iter().collect::<Vec<_>>(), vec![1]);
    }
}
