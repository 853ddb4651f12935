//! Wave-front set estimation by localized dyadic slope tests.
//!
//! A pair (x₀, Γ_j) is in the estimated wave-front set when the cone
//! seminorm profile of φ(· − x₀) f over the widened sector j fails the slope
//! test at any of the configured window scales.

use crate::coneharm::{
    mod_sector_profiles, sector_profiles, stft_near, ConePartition, DyadicProfile, Exponent, Flavor, ProfileConfig,
};
use crate::error::{Error, Result};
use crate::fields::{dft, localize, Grid, SampledField, WindowSpec};
use crate::weights::WeightSpec;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::f64::consts::PI;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectorConfig {
    /// Localization window at scale 1.
    pub window: WindowSpec,
    /// Window scales tried at every centre; a pair is singular if flagged at any.
    pub radius_scales: Vec<f64>,
    pub partition: ConePartition,
    pub profile: ProfileConfig,
    /// Explicit centres; defaults to a lattice of step `center_step`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub centers: Option<Vec<Vec<f64>>>,
    /// Default-lattice step, the window radius when unset.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center_step: Option<f64>,
    /// Exponent p of the modulation flavors.
    pub p: Exponent,
    /// Gabor window for the modulation flavors.
    pub stft_window: WindowSpec,
    /// Gabor lattice steps in grid cells (x) and frequency cells (ξ).
    pub stft_a: usize,
    pub stft_b: usize,
}

impl DetectorConfig {
    /// Defaults for a grid: truncated Gaussian window of radius `r`.
    pub fn new(d: usize, r: f64) -> DetectorConfig {
        let partition = if d == 1 {
            ConePartition::half_lines()
        } else {
            ConePartition::new(2, 8, 1.2).expect("default partition is valid")
        };
        DetectorConfig {
            window: WindowSpec::truncated_gaussian(r),
            radius_scales: vec![1.0, 0.5],
            partition,
            profile: ProfileConfig::default(),
            centers: None,
            center_step: None,
            p: Exponent::INF,
            stft_window: WindowSpec::truncated_gaussian(r),
            stft_a: 4,
            stft_b: 1,
        }
    }

    pub fn with_partition(mut self, p: ConePartition) -> Self {
        self.partition = p;
        self
    }

    pub fn with_centers(mut self, c: Vec<Vec<f64>>) -> Self {
        self.centers = Some(c);
        self
    }

    pub fn with_scales(mut self, s: Vec<f64>) -> Self {
        self.radius_scales = s;
        self
    }

    pub fn radius(&self) -> f64 {
        self.window.support_radius()
    }

    fn max_radius(&self) -> f64 {
        let s = self.radius_scales.iter().cloned().fold(0.0, f64::max);
        self.radius() * s
    }

    fn validate(&self, g: &Grid) -> Result<()> {
        if self.partition.d != g.dim() {
            return Err(Error::InvalidConfig("partition dimension differs from the field".into()));
        }
        if self.radius_scales.is_empty() || self.radius_scales.iter().any(|&s| !(s > 0.0)) {
            return Err(Error::InvalidConfig("radius scales must be positive and nonempty".into()));
        }
        if !(self.profile.tau > 0.0 && self.profile.tau_inf > 0.0) {
            return Err(Error::InvalidConfig("slope thresholds must be positive".into()));
        }
        Ok(())
    }

    /// Centres used on `g`: the explicit list, or lattice points k·step on
    /// every axis whose largest window fits inside the grid.
    pub fn centers_for(&self, g: &Grid) -> Result<Vec<Vec<f64>>> {
        if let Some(c) = &self.centers {
            return Ok(c.clone());
        }
        let r = self.max_radius();
        let step = self.center_step.unwrap_or(self.radius());
        let mut axes: Vec<Vec<f64>> = Vec::new();
        for a in 0..g.dim() {
            let lo = ((g.origin[a] + r) / step).ceil() as i64;
            let hi = ((g.upper(a) - r) / step).floor() as i64;
            let vals: Vec<f64> = (lo..=hi)
                .map(|k| {
                    let x = k as f64 * step;
                    let m = ((x - g.origin[a]) / g.spacing[a]).round();
                    g.origin[a] + m * g.spacing[a]
                })
                .filter(|x| x - r >= g.origin[a] - 1e-9 && x + r <= g.upper(a) + 1e-9)
                .collect();
            axes.push(vals);
        }
        let mut out = vec![Vec::new()];
        for axis in &axes {
            out = out
                .into_iter()
                .flat_map(|p: Vec<f64>| {
                    axis.iter().map(move |&v| {
                        let mut q = p.clone();
                        q.push(v);
                        q
                    })
                })
                .collect();
        }
        if out.is_empty() || out[0].is_empty() {
            return Err(Error::InvalidConfig("no detector centre fits inside the grid".into()));
        }
        Ok(out)
    }
}

/// Serializable description of how an estimate was produced.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectorSummary {
    pub window: WindowSpec,
    pub radius_scales: Vec<f64>,
    pub partition: ConePartition,
    pub flavor: Flavor,
    /// Members as (weight id, q); one entry for a single detector.
    pub members: Vec<(String, Exponent)>,
    pub p: Exponent,
    /// "single", "sup" or "inf".
    pub combine: String,
    pub fit_width: usize,
    pub tau: f64,
    pub tau_inf: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WfEntry {
    pub center: usize,
    pub x: Vec<f64>,
    pub sector: usize,
    /// Slope at the first window scale.
    pub slope: Option<f64>,
    /// Slope at every scale.
    pub slopes: Vec<Option<f64>>,
    pub in_wf: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WavefrontEstimate {
    pub detector: DetectorSummary,
    pub centers: Vec<Vec<f64>>,
    /// All (centre, sector) records, ordered by centre then sector; the
    /// complement of the wave-front set is the records with `in_wf = false`.
    pub entries: Vec<WfEntry>,
}

impl WavefrontEstimate {
    /// (centre index, sector) pairs in the set.
    pub fn singular(&self) -> BTreeSet<(usize, usize)> {
        self.entries
            .iter()
            .filter(|e| e.in_wf)
            .map(|e| (e.center, e.sector))
            .collect()
    }

    pub fn regular(&self) -> BTreeSet<(usize, usize)> {
        self.entries
            .iter()
            .filter(|e| !e.in_wf)
            .map(|e| (e.center, e.sector))
            .collect()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.iter().all(|e| !e.in_wf)
    }

    pub fn entry(&self, center: usize, sector: usize) -> Option<&WfEntry> {
        self.entries.iter().find(|e| e.center == center && e.sector == sector)
    }

    /// Index of the centre nearest to `x`.
    pub fn nearest_center(&self, x: &[f64]) -> Option<usize> {
        (0..self.centers.len()).min_by(|&a, &b| {
            let da = dist(&self.centers[a], x);
            let db = dist(&self.centers[b], x);
            da.total_cmp(&db)
        })
    }

    /// Sectors flagged at centre `c`.
    pub fn sectors_at(&self, c: usize) -> BTreeSet<usize> {
        self.entries
            .iter()
            .filter(|e| e.in_wf && e.center == c)
            .map(|e| e.sector)
            .collect()
    }

    /// Centres with at least one flagged sector.
    pub fn flagged_centers(&self) -> BTreeSet<usize> {
        self.singular().into_iter().map(|(c, _)| c).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("estimates always serialize")
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt()
}

/// Upper bound (2π)^{-d/2} h^d Σ|f| for the modulus of every windowed
/// transform of `f`. The detector measures its noise floor against this
/// unless `profile.noise_reference` is set.
pub fn amplitude_bound(f: &SampledField) -> f64 {
    let d = f.dim() as f64;
    (2.0 * PI).powf(-d / 2.0) * f.grid.cell_volume() * f.values.iter().map(|v| v.norm()).sum::<f64>()
}

/// Per-scale profiles at one centre.
fn profiles_at(
    f: &SampledField,
    x0: &[f64],
    w: &WeightSpec,
    q: Exponent,
    flavor: Flavor,
    cfg: &DetectorConfig,
    pcfg: &ProfileConfig,
) -> Result<Vec<Vec<DyadicProfile>>> {
    cfg.radius_scales
        .iter()
        .map(|&s| {
            let win = cfg.window.scaled(s);
            let loc = localize(f, x0, &win)?;
            match flavor {
                Flavor::Fl => sector_profiles(&dft(&loc), &cfg.partition, w, q, x0, pcfg),
                Flavor::M | Flavor::W => {
                    let reach = win.support_radius() + cfg.stft_window.support_radius();
                    let gc = stft_near(&loc, &cfg.stft_window, cfg.stft_a, cfg.stft_b, Some((x0, reach)))?;
                    mod_sector_profiles(&gc, &cfg.partition, w, cfg.p, q, flavor, pcfg)
                }
            }
        })
        .collect()
}

fn summary(cfg: &DetectorConfig, flavor: Flavor, members: Vec<(String, Exponent)>, combine: &str) -> DetectorSummary {
    DetectorSummary {
        window: cfg.window.clone(),
        radius_scales: cfg.radius_scales.clone(),
        partition: cfg.partition.clone(),
        flavor,
        members,
        p: cfg.p,
        combine: combine.into(),
        fit_width: cfg.profile.fit_width,
        tau: cfg.profile.tau,
        tau_inf: cfg.profile.tau_inf,
    }
}

/// Estimate WF with respect to FL^q_(ω) (or M^{p,q}_(ω), W^{p,q}_(ω)).
pub fn wavefront_set(
    f: &SampledField,
    w: &WeightSpec,
    q: Exponent,
    cfg: &DetectorConfig,
    flavor: Flavor,
) -> Result<WavefrontEstimate> {
    cfg.validate(&f.grid)?;
    if w.dim() != f.dim() {
        return Err(Error::IncompatibleGrid("weight and field differ in dimension".into()));
    }
    let centers = cfg.centers_for(&f.grid)?;
    let mut pcfg = cfg.profile.clone();
    pcfg.noise_reference = Some(cfg.profile.noise_reference.unwrap_or_else(|| amplitude_bound(f)));
    let per_center: Vec<Vec<WfEntry>> = centers
        .par_iter()
        .enumerate()
        .map(|(ci, x0)| {
            let scales = profiles_at(f, x0, w, q, flavor, cfg, &pcfg)?;
            Ok((0..cfg.partition.n_sectors)
                .map(|j| {
                    let slopes: Vec<Option<f64>> = scales.iter().map(|ps| ps[j].slope).collect();
                    WfEntry {
                        center: ci,
                        x: x0.clone(),
                        sector: j,
                        slope: slopes[0],
                        slopes,
                        in_wf: scales.iter().any(|ps| ps[j].is_singular()),
                    }
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    Ok(WavefrontEstimate {
        detector: summary(cfg, flavor, vec![(w.id(), q)], "single"),
        centers,
        entries: per_center.into_iter().flatten().collect(),
    })
}

fn combine(
    f: &SampledField,
    weights: &[WeightSpec],
    qs: &[Exponent],
    cfg: &DetectorConfig,
    flavor: Flavor,
    any: bool,
) -> Result<WavefrontEstimate> {
    if weights.is_empty() || weights.len() != qs.len() {
        return Err(Error::InvalidConfig("weight and exponent arrays must be nonempty and equally long".into()));
    }
    let members: Vec<WavefrontEstimate> = weights
        .iter()
        .zip(qs)
        .map(|(w, &q)| wavefront_set(f, w, q, cfg, flavor))
        .collect::<Result<_>>()?;
    let mut out = members[0].clone();
    for (i, e) in out.entries.iter_mut().enumerate() {
        let flags = members.iter().map(|m| m.entries[i].in_wf);
        e.in_wf = if any { flags.clone().any(|b| b) } else { flags.clone().all(|b| b) };
        // report the most singular member's slope
        let best = members
            .iter()
            .map(|m| &m.entries[i])
            .max_by(|a, b| a.slope.unwrap_or(f64::NEG_INFINITY).total_cmp(&b.slope.unwrap_or(f64::NEG_INFINITY)))
            .expect("members nonempty");
        e.slope = best.slope;
        e.slopes = best.slopes.clone();
    }
    let ids = weights.iter().zip(qs).map(|(w, &q)| (w.id(), q)).collect();
    out.detector = summary(cfg, flavor, ids, if any { "sup" } else { "inf" });
    Ok(out)
}

/// Sup-type set: singular unless every member is regular.
pub fn wavefront_sup(
    f: &SampledField,
    weights: &[WeightSpec],
    qs: &[Exponent],
    cfg: &DetectorConfig,
    flavor: Flavor,
) -> Result<WavefrontEstimate> {
    combine(f, weights, qs, cfg, flavor, true)
}

/// Inf-type set: singular only if every member is singular.
pub fn wavefront_inf(
    f: &SampledField,
    weights: &[WeightSpec],
    qs: &[Exponent],
    cfg: &DetectorConfig,
    flavor: Flavor,
) -> Result<WavefrontEstimate> {
    combine(f, weights, qs, cfg, flavor, false)
}

/// Classical wave-front set as the sup-type set over ω_j = ⟨ξ⟩^{sign·j},
/// q = ∞, j = 0..=j_max. `sign` is +1 by default; −1 reproduces the
/// decreasing family literally.
pub fn classical_wf(f: &SampledField, j_max: usize, sign: f64, cfg: &DetectorConfig) -> Result<WavefrontEstimate> {
    let d = f.dim();
    let weights: Vec<WeightSpec> = (0..=j_max)
        .map(|j| WeightSpec::japanese_bracket(d, sign * j as f64))
        .collect();
    let qs = vec![Exponent::INF; weights.len()];
    let mut est = wavefront_sup(f, &weights, &qs, cfg, Flavor::Fl)?;
    est.detector.combine = "classical".into();
    Ok(est)
}
