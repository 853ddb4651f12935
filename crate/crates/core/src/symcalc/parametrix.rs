//! Microlocal parametrix by the recursion
//! b₁ = χ/a, c₁ = χ, h_j = (b_j # a)_N − c_j,
//! b_{j+1} = ((c_j − h_j) # b_j)_N, c_{j+1} = (c_j # c_j)_N.

use super::class::{ellipticity_margin, probe_directions};
use super::compose::compose_symbols;
use super::sampled::{SampledSymbol, SymbolGrid};
use super::symbol::{ConeRegion, SymbolSpec};
use crate::error::{Error, Result};
use crate::numerics::{bracket, log2_floor, ls_slope, norm};
use serde::{Deserialize, Serialize};

/// Residuals below this are treated as exact zeros.
pub const RESIDUAL_FLOOR: f64 = 1e-12;
/// Number of annuli in the residual slope fit.
const RESIDUAL_FIT: usize = 3;
/// Largest residual slope still counted as bounded.
pub const RESIDUAL_SLOPE: f64 = 0.1;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ParametrixConfig {
    pub region: ConeRegion,
    pub j_max: usize,
    /// Truncation order of each composition.
    pub order: usize,
    /// Required ellipticity margin on the region.
    pub c_min: f64,
    /// Upper radius for the ellipticity probe; 0.9 ξ_Nyquist when unset.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xi_max: Option<f64>,
}

impl ParametrixConfig {
    pub fn global(r_low: f64, j_max: usize) -> ParametrixConfig {
        ParametrixConfig {
            region: ConeRegion::global(r_low),
            j_max,
            order: 2,
            c_min: 0.05,
            xi_max: None,
        }
    }
}

/// Per-annulus sup of |h_j| ⟨ξ⟩^{jμ} over the region.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ResidualReport {
    pub j: usize,
    pub ks: Vec<i32>,
    pub sups: Vec<f64>,
    /// Raw per-annulus sup of |h_j|.
    pub raw_sups: Vec<f64>,
    pub slope: Option<f64>,
    pub bounded: bool,
}

#[derive(Clone, Debug)]
pub struct ParametrixResult {
    pub margin: f64,
    pub mu: f64,
    pub residuals: Vec<ResidualReport>,
    pub b: Vec<SampledSymbol>,
    pub c: Vec<SampledSymbol>,
    pub h: Vec<SampledSymbol>,
}

impl ParametrixResult {
    pub fn passes(&self) -> bool {
        self.residuals.iter().all(|r| r.bounded)
    }
}

fn in_region(region: &ConeRegion, x: &[f64], xi: &[f64]) -> bool {
    let relaxed = ConeRegion {
        r_low: 0.0,
        ..region.clone()
    };
    norm(xi) > 0.0 && relaxed.contains(x, xi)
}

fn residual_report(h: &SampledSymbol, region: &ConeRegion, j: usize, mu: f64) -> ResidualReport {
    let g = &h.grid;
    let n_xi = g.n_xi();
    let mut by_k: std::collections::BTreeMap<i32, (f64, f64)> = Default::default();
    for ix in 0..g.n_x() {
        let x = g.x_point(ix);
        for k in 0..n_xi {
            let xi = g.xi.freq_point(k);
            let r = norm(&xi);
            if r < 1.0 || !in_region(region, &x, &xi) {
                continue;
            }
            let mut v = h.values[ix * n_xi + k].norm();
            if v < RESIDUAL_FLOOR {
                v = 0.0;
            }
            let e = by_k.entry(r.log2().floor() as i32).or_insert((0.0, 0.0));
            e.0 = e.0.max(v * bracket(&xi).powf(j as f64 * mu));
            e.1 = e.1.max(v);
        }
    }
    let ks: Vec<i32> = by_k.keys().copied().collect();
    let sups: Vec<f64> = by_k.values().map(|v| v.0).collect();
    let raw_sups: Vec<f64> = by_k.values().map(|v| v.1).collect();
    // skip the outermost annulus, which only the lattice corners reach
    let usable = ks.len().saturating_sub(1);
    let from = usable.saturating_sub(RESIDUAL_FIT);
    let tail = &sups[from..usable];
    let slope = if tail.len() < 2 || tail.iter().all(|&v| v == 0.0) {
        None
    } else {
        let xs: Vec<f64> = ks[from..usable].iter().map(|&k| k as f64).collect();
        let ys: Vec<f64> = tail.iter().map(|&v| log2_floor(v)).collect();
        ls_slope(&xs, &ys)
    };
    ResidualReport {
        j,
        ks,
        sups,
        raw_sups,
        slope,
        bounded: slope.is_none_or(|s| s <= RESIDUAL_SLOPE),
    }
}

/// Probe x points for the ellipticity check.
fn region_x_points(region: &ConeRegion, grid: &SymbolGrid) -> Vec<Vec<f64>> {
    if let Some((c, r)) = &region.x_ball {
        let mut pts = vec![c.clone()];
        for a in 0..c.len() {
            for s in [-1.0, 1.0] {
                let mut p = c.clone();
                p[a] += s * r;
                pts.push(p);
            }
        }
        return pts;
    }
    match &grid.x {
        Some(g) => {
            let step = (g.len() / 16).max(1);
            (0..g.len()).step_by(step).map(|i| g.point(i)).collect()
        }
        None => vec![vec![0.0; grid.dim()]],
    }
}

/// Parametrix symbols b₁..b_J for `a` on `grid` with residual reports.
pub fn parametrix(a: &SymbolSpec, grid: &SymbolGrid, cfg: &ParametrixConfig) -> Result<ParametrixResult> {
    let d = a.dim();
    let w = a
        .weight
        .as_ref()
        .ok_or_else(|| Error::MalformedSymbol(format!("symbol {} declares no weight", a.label())))?;
    if cfg.j_max == 0 {
        return Err(Error::InvalidConfig("j_max must be at least 1".into()));
    }
    let nyq = (0..d).map(|ax| grid.xi.nyquist(ax)).fold(f64::INFINITY, f64::min);
    let xi_max = cfg.xi_max.unwrap_or(0.9 * nyq);
    let xs = region_x_points(&cfg.region, grid);
    let margin = match &cfg.region.cone {
        None => ellipticity_margin(a, w, &xs, cfg.region.r_low, xi_max)?,
        Some(_) => {
            // only the directions inside Γ count
            let cone_only = ConeRegion {
                x_ball: None,
                ..cfg.region.clone()
            };
            let dirs: Vec<Vec<f64>> = probe_directions(d, 64)
                .into_iter()
                .filter(|e| in_region(&cone_only, e, e))
                .collect();
            let radii = super::class::probe_radii(cfg.region.r_low, xi_max, 32);
            super::class::probe_min(a, w, &xs, &dirs, &radii)?.0
        }
    };
    if margin < cfg.c_min {
        return Err(Error::NonElliptic {
            margin,
            c_min: cfg.c_min,
        });
    }
    let mu = a.rho - a.delta;
    if mu <= 0.0 {
        return Err(Error::InvalidConfig(format!("need δ < ρ, got ρ = {}, δ = {}", a.rho, a.delta)));
    }
    let chi = SymbolSpec::cutoff(cfg.region.clone(), d);
    let mut b_spec = match a.as_array() {
        None => SymbolSpec::quotient(cfg.region.clone(), a),
        Some(arr) => {
            let target = if arr.grid.x.is_some() || !chi.is_x_independent() {
                grid.clone()
            } else {
                SymbolGrid::frequencies_only(&grid.xi)
            };
            let c = SampledSymbol::sample(&chi, &target)?;
            let av = arr.broadcast_to(&target)?;
            SymbolSpec::array(c.zip_with(&av, |u, v| if u.norm() == 0.0 { u } else { u / v })?)
        }
    };
    let mut c_spec = chi.clone();
    let (mut bs, mut cs, mut hs, mut reports) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for j in 1..=cfg.j_max {
        let ba = compose_symbols(&b_spec, a, cfg.order, grid)?;
        let c_s = SampledSymbol::sample(&c_spec, &SymbolGrid {
            xi: grid.xi.clone(),
            x: if c_spec.is_x_independent() { None } else { grid.x.clone() },
        })?;
        let h = ba.zip_with(&c_s, |u, v| u - v)?;
        reports.push(residual_report(&h, &cfg.region, j, mu));
        let b_s = SampledSymbol::sample(&b_spec, &SymbolGrid {
            xi: grid.xi.clone(),
            x: if b_spec.is_x_independent() { None } else { grid.x.clone() },
        })?;
        if j < cfg.j_max {
            let ch = SymbolSpec::array(c_s.zip_with(&h, |u, v| u - v)?);
            let next_b = compose_symbols(&ch, &b_spec, cfg.order, grid)?;
            let next_c = compose_symbols(&c_spec, &c_spec, cfg.order, grid)?;
            b_spec = SymbolSpec::array(next_b);
            c_spec = SymbolSpec::array(next_c);
        }
        bs.push(b_s);
        cs.push(c_s);
        hs.push(h);
    }
    Ok(ParametrixResult {
        margin,
        mu,
        residuals: reports,
        b: bs,
        c: cs,
        h: hs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::Grid;
    use crate::weights::WeightSpec;
    use std::f64::consts::PI;

    #[test]
    fn bracket_multiplier_has_exact_first_step() {
        let g = Grid::centered(1, 256, 0.1);
        let a = SymbolSpec::multiplier(1, 2.0).with_weight(WeightSpec::japanese_bracket(1, 2.0));
        let cfg = ParametrixConfig::global(2.0, 2);
        let r = parametrix(&a, &SymbolGrid::frequencies_only(&g), &cfg).unwrap();
        assert!(r.passes());
        // on {χ = 1} b₁ a − 1 vanishes; elsewhere h₁ is roundoff
        for k in 0..256 {
            let xi = g.freq(0, k);
            let b1 = r.b[0].at(0, k);
            let prod = b1 * (1.0 + xi * xi);
            if xi.abs() >= 4.0 {
                assert!((prod - 1.0).norm() < 1e-14);
            }
            assert!(r.h[0].at(0, k).norm() < 1e-13);
        }
    }

    #[test]
    fn heat_parametrix_residuals() {
        let g = Grid::centered(2, 64, PI / 64.0);
        let a = SymbolSpec::heat().with_weight(WeightSpec::heat()).with_orders(0.5, 0.0);
        let cfg = ParametrixConfig::global(8.0, 3);
        let r = parametrix(&a, &SymbolGrid::frequencies_only(&g), &cfg).unwrap();
        assert!(r.margin >= 0.05);
        assert!(r.passes());
        let outer = |rep: &ResidualReport| rep.raw_sups[rep.raw_sups.len() / 2..].iter().cloned().fold(0.0, f64::max);
        assert!(outer(&r.residuals[1]) <= outer(&r.residuals[0]));
        // classical weight: not elliptic along the time axis
        let cl = SymbolSpec::heat().with_weight(WeightSpec::japanese_bracket(2, 2.0));
        assert!(matches!(
            parametrix(&cl, &SymbolGrid::frequencies_only(&g), &cfg),
            Err(Error::NonElliptic { .. })
        ));
    }

    #[test]
    fn modulated_multiplier_residuals_gain_one_order_per_step() {
        let g = Grid::centered(1, 256, 0.1);
        let k = 2.0 * g.dxi(0);
        let a = SymbolSpec::modulated(1, 2.0, 0.3, vec![k])
            .unwrap()
            .with_weight(WeightSpec::japanese_bracket(1, 2.0));
        let mut cfg = ParametrixConfig::global(2.0, 3);
        cfg.order = 3;
        let r = parametrix(&a, &SymbolGrid::for_field(&g, true), &cfg).unwrap();
        for rep in &r.residuals {
            assert!(rep.bounded, "j = {}: {:?} slope {:?}", rep.j, rep.sups, rep.slope);
            assert!(rep.raw_sups.iter().any(|&v| v > 0.0));
        }
    }
}
