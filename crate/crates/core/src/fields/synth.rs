//! Generator zoo of singular and smooth test fields.

use super::{idft, Grid, SampledField, Spectrum};
use crate::error::{Error, Result};
use crate::numerics::{norm, smooth_step};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "gen", rename_all = "snake_case")]
pub enum GeneratorSpec {
    /// Unit mass at the grid point nearest `x0`: value 1/h^d.
    Delta { x0: Vec<f64> },
    /// 1 for x ≥ x0, 0 otherwise (d = 1).
    Heaviside { x0: f64 },
    /// |x − x0|^α times a smooth cutoff equal to 1 on |x − x0| ≤ `cutoff`/2
    /// and 0 beyond `cutoff`. The singular sample uses |x − x0| = h/2.
    PowerSingularity { alpha: f64, x0: Vec<f64>, cutoff: f64 },
    Gaussian { center: Vec<f64>, sigma: f64 },
    /// δ(⟨x, n⟩ − offset) with n = (cos θ, sin θ) (d = 2). Axis-aligned
    /// lines are sampled exactly; others use a Gaussian ridge of width h/2.
    LineDelta { theta: f64, offset: f64 },
    /// e^{iβ|x − c|²} e^{−|x − c|²/2σ²}.
    Chirp { center: Vec<f64>, beta: f64, sigma: f64 },
    /// Ê(ξ, τ) = (2π)^{-1} χ(ξ, τ)/(ξ² + iτ), χ = 0 on |(ξ,τ)| ≤ R and 1
    /// on |(ξ,τ)| ≥ 2R (d = 2).
    HeatParametrix { cutoff: f64 },
}

pub const GENERATOR_NAMES: [&str; 7] = [
    "delta",
    "heaviside",
    "power_singularity",
    "gaussian",
    "line_delta",
    "chirp",
    "heat_parametrix",
];

impl GeneratorSpec {
    pub fn from_json(src: &str) -> Result<GeneratorSpec> {
        let v: serde_json::Value = serde_json::from_str(src)?;
        let name = v.get("gen").and_then(|g| g.as_str()).unwrap_or("");
        if !GENERATOR_NAMES.contains(&name) {
            return Err(Error::UnknownGenerator(name.to_string()));
        }
        Ok(serde_json::from_value(v)?)
    }

    pub fn name(&self) -> &'static str {
        match self {
            GeneratorSpec::Delta { .. } => "delta",
            GeneratorSpec::Heaviside { .. } => "heaviside",
            GeneratorSpec::PowerSingularity { .. } => "power_singularity",
            GeneratorSpec::Gaussian { .. } => "gaussian",
            GeneratorSpec::LineDelta { .. } => "line_delta",
            GeneratorSpec::Chirp { .. } => "chirp",
            GeneratorSpec::HeatParametrix { .. } => "heat_parametrix",
        }
    }
}

fn need_dim(g: &Grid, d: usize, what: &str) -> Result<()> {
    if g.dim() != d {
        return Err(Error::InvalidConfig(format!("{what} needs d = {d}, grid has d = {}", g.dim())));
    }
    Ok(())
}

fn need_len(v: &[f64], g: &Grid, what: &str) -> Result<()> {
    if v.len() != g.dim() {
        return Err(Error::InvalidConfig(format!("{what}: point has wrong dimension")));
    }
    Ok(())
}

fn real(v: f64) -> Complex64 {
    Complex64::new(v, 0.0)
}

/// Radial cutoff: 1 on r ≤ R/2, 0 on r ≥ R.
pub fn bump(r: f64, radius: f64) -> f64 {
    1.0 - smooth_step((r - radius / 2.0) / (radius / 2.0))
}

pub fn synth(gen: &GeneratorSpec, grid: &Grid) -> Result<SampledField> {
    let g = grid.clone();
    match gen {
        GeneratorSpec::Delta { x0 } => {
            need_len(x0, &g, "delta")?;
            let idx = g
                .nearest_index(x0)
                .ok_or_else(|| Error::Domain(format!("delta location {x0:?} outside the grid")))?;
            let mut f = SampledField::zeros(g.clone());
            let flat = g.ravel(&idx);
            f.values[flat] = real(1.0 / g.cell_volume());
            Ok(f)
        }
        GeneratorSpec::Heaviside { x0 } => {
            need_dim(&g, 1, "heaviside")?;
            // decide on the index to avoid rounding at x = x0
            let cut = ((x0 - g.origin[0]) / g.spacing[0] - 1e-9).ceil();
            Ok(SampledField {
                values: (0..g.len()).map(|m| real(if m as f64 >= cut { 1.0 } else { 0.0 })).collect(),
                grid: g,
            })
        }
        GeneratorSpec::PowerSingularity { alpha, x0, cutoff } => {
            need_len(x0, &g, "power_singularity")?;
            let hmin = g.spacing.iter().cloned().fold(f64::INFINITY, f64::min);
            Ok(SampledField::from_fn(g, |x| {
                let r = norm(&x.iter().zip(x0).map(|(a, b)| a - b).collect::<Vec<_>>());
                real(r.max(hmin / 2.0).powf(*alpha) * bump(r, *cutoff))
            }))
        }
        GeneratorSpec::Gaussian { center, sigma } => {
            need_len(center, &g, "gaussian")?;
            Ok(SampledField::from_fn(g, |x| {
                let r2: f64 = x.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum();
                real((-r2 / (2.0 * sigma * sigma)).exp())
            }))
        }
        GeneratorSpec::LineDelta { theta, offset } => {
            need_dim(&g, 2, "line_delta")?;
            let (c, s) = (theta.cos(), theta.sin());
            let axis_aligned = c.abs() < 1e-12 || s.abs() < 1e-12;
            if axis_aligned {
                // normal along axis a: mass 1/h_a on the nearest grid line
                let a = if s.abs() < 1e-12 { 0 } else { 1 };
                let sign = if a == 0 { c.signum() } else { s.signum() };
                let pos = sign * offset;
                let m = ((pos - g.origin[a]) / g.spacing[a]).round();
                let ha = g.spacing[a];
                Ok(SampledField {
                    values: (0..g.len())
                        .map(|i| {
                            let idx = g.unravel(i);
                            real(if idx[a] as f64 == m { 1.0 / ha } else { 0.0 })
                        })
                        .collect(),
                    grid: g,
                })
            } else {
                let w = g.spacing.iter().cloned().fold(f64::INFINITY, f64::min) / 2.0;
                Ok(SampledField::from_fn(g, |x| {
                    let t = x[0] * c + x[1] * s - offset;
                    real((-t * t / (2.0 * w * w)).exp() / (w * (2.0 * PI).sqrt()))
                }))
            }
        }
        GeneratorSpec::Chirp { center, beta, sigma } => {
            need_len(center, &g, "chirp")?;
            Ok(SampledField::from_fn(g, |x| {
                let r2: f64 = x.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum();
                Complex64::from_polar((-r2 / (2.0 * sigma * sigma)).exp(), beta * r2)
            }))
        }
        GeneratorSpec::HeatParametrix { cutoff } => {
            need_dim(&g, 2, "heat_parametrix")?;
            let spec = Spectrum::from_fn(g, |z| heat_parametrix_hat(z, *cutoff));
            Ok(idft(&spec))
        }
    }
}

/// Low-frequency cutoff χ: 0 for |ζ| ≤ R, 1 for |ζ| ≥ 2R.
pub fn low_cutoff(r: f64, radius: f64) -> f64 {
    smooth_step((r - radius) / radius)
}

pub fn heat_parametrix_hat(z: &[f64], cutoff: f64) -> Complex64 {
    let chi = low_cutoff(norm(z), cutoff);
    if chi == 0.0 {
        return real(0.0);
    }
    real(chi / (2.0 * PI)) / Complex64::new(z[0] * z[0], z[1])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::dft;

    #[test]
    fn delta_has_unit_mass() {
        let g = Grid::centered(1, 1024, 0.04);
        let f = synth(&GeneratorSpec::Delta { x0: vec![0.0] }, &g).unwrap();
        assert_eq!(f.values[512], real(25.0));
        let mass: f64 = f.values.iter().map(|v| v.re).sum::<f64>() * 0.04;
        assert!((mass - 1.0).abs() < 1e-14);
    }

    #[test]
    fn heaviside_values() {
        let g = Grid::centered(1, 64, 0.1);
        let f = synth(&GeneratorSpec::Heaviside { x0: 0.0 }, &g).unwrap();
        for (m, v) in f.values.iter().enumerate() {
            let x = g.coord(0, m);
            assert_eq!(v.re, if x >= -1e-12 { 1.0 } else { 0.0 });
        }
    }

    #[test]
    fn unknown_generator_is_reported() {
        match GeneratorSpec::from_json(r#"{"gen":"sawtooth"}"#) {
            Err(Error::UnknownGenerator(n)) => assert_eq!(n, "sawtooth"),
            other => panic!("unexpected {other:?}"),
        }
        let g = GeneratorSpec::from_json(r#"{"gen":"delta","x0":[0.5]}"#).unwrap();
        assert_eq!(g.name(), "delta");
    }

    #[test]
    fn axis_aligned_line_delta_has_unit_line_density() {
        let g = Grid::centered(2, 32, 0.25);
        let f = synth(&GeneratorSpec::LineDelta { theta: 0.0, offset: 0.5 }, &g).unwrap();
        // integrate across the line at a fixed x2
        let col: f64 = (0..32).map(|i| f.values[i * 32 + 3].re).sum::<f64>() * 0.25;
        assert!((col - 1.0).abs() < 1e-14);
        assert_eq!(f.values[g.ravel(&[18, 0])].re, 4.0);
    }

    #[test]
    fn heat_parametrix_inverts_the_heat_symbol_outside_low_frequencies() {
        let g = Grid::centered(2, 64, PI / 64.0);
        let e = synth(&GeneratorSpec::HeatParametrix { cutoff: 4.0 }, &g).unwrap();
        let ehat = dft(&e);
        let delta = dft(&synth(&GeneratorSpec::Delta { x0: vec![0.0, 0.0] }, &g).unwrap());
        let mut worst = 0.0f64;
        for i in 0..g.len() {
            let z = g.freq_point(i);
            if norm(&z) < 8.0 {
                continue;
            }
            let applied = ehat.values[i] * Complex64::new(z[0] * z[0], z[1]);
            worst = worst.max((applied - delta.values[i]).norm());
        }
        assert!(worst < 1e-12, "{worst}");
    }
}
