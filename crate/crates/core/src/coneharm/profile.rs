//! Dyadic decay profiles of cone-restricted Fourier-Lebesgue seminorms.

use super::partition::ConePartition;
use crate::error::{Error, Result};
use crate::fields::{top_annulus, Spectrum};
use crate::numerics::{log2_floor, ls_slope, norm};
use crate::weights::WeightSpec;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A Lebesgue exponent in [1, ∞]; serialized as a number or `"inf"`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct Exponent(pub f64);

impl Exponent {
    pub const INF: Exponent = Exponent(f64::INFINITY);
    pub const ONE: Exponent = Exponent(1.0);

    pub fn new(q: f64) -> Result<Exponent> {
        if q >= 1.0 {
            Ok(Exponent(q))
        } else {
            Err(Error::InvalidConfig(format!("exponent {q} outside [1, ∞]")))
        }
    }

    pub fn is_inf(self) -> bool {
        self.0.is_infinite()
    }

    pub fn parse(s: &str) -> Result<Exponent> {
        match s.trim() {
            "inf" | "infinity" | "∞" => Ok(Exponent::INF),
            t => Exponent::new(
                t.parse()
                    .map_err(|_| Error::InvalidConfig(format!("bad exponent '{t}'")))?,
            ),
        }
    }

    /// Aggregate nonnegative terms: (c Σ t^q)^{1/q}, or max for q = ∞.
    pub fn aggregate(self, terms: impl Iterator<Item = f64>, measure: f64) -> f64 {
        if self.is_inf() {
            terms.fold(0.0, f64::max)
        } else if self.0 == 1.0 {
            measure * terms.sum::<f64>()
        } else {
            (measure * terms.map(|t| t.powf(self.0)).sum::<f64>()).powf(1.0 / self.0)
        }
    }
}

impl std::fmt::Display for Exponent {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_inf() {
            write!(f, "inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.is_inf() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Exponent, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(q) => Exponent::new(q).map_err(serde::de::Error::custom),
            Raw::Text(t) => Exponent::parse(&t).map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Regular,
    Singular,
}

/// Fit and verdict parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileConfig {
    /// Number of annuli in the slope fit.
    pub fit_width: usize,
    /// Finite q: regular iff slope ≤ −tau.
    pub tau: f64,
    /// q = ∞: regular iff slope ≤ tau_inf.
    pub tau_inf: f64,
    /// Spectrum values below `noise_floor` times the reference amplitude
    /// count as zero.
    pub noise_floor: f64,
    /// Reference amplitude; the spectrum maximum when unset.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_reference: Option<f64>,
}

impl Default for ProfileConfig {
    fn default() -> Self {
        ProfileConfig {
            fit_width: 4,
            tau: 0.1,
            tau_inf: 0.05,
            noise_floor: 1e-13,
            noise_reference: None,
        }
    }
}

pub const MIN_USABLE_ANNULI: usize = 3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DyadicProfile {
    pub sector: usize,
    pub q: Exponent,
    pub weight_id: String,
    /// Annulus indices k of `s`, ascending.
    pub ks: Vec<i32>,
    #[serde(rename = "S")]
    pub s: Vec<f64>,
    /// Indices (into `ks`) used by the fit.
    pub fit: Vec<usize>,
    pub slope: Option<f64>,
    #[serde(rename = "K")]
    pub k: usize,
    pub verdict: Verdict,
}

impl DyadicProfile {
    pub fn k_min(&self) -> Option<i32> {
        self.ks.first().copied()
    }

    pub fn k_max(&self) -> Option<i32> {
        self.ks.last().copied()
    }

    pub fn is_singular(&self) -> bool {
        self.verdict == Verdict::Singular
    }
}

/// Band-limited seminorm (Σ S_k^q)^{1/q}, or max_k S_k for q = ∞.
pub fn full_seminorm(p: &DyadicProfile) -> f64 {
    p.q.aggregate(p.s.iter().copied(), 1.0)
}

/// Dyadic index of |ξ| (2^k ≤ |ξ| < 2^{k+1}).
pub fn annulus_index(r: f64) -> i32 {
    r.log2().floor() as i32
}

/// Fit a slope to per-annulus values and decide the verdict.
///
/// `nonempty` lists, in ascending order, the positions in `s` that had at
/// least one sample. Annuli above `k_top` reach past the Nyquist disc and
/// are ignored; the last `fit_width` of the rest are fitted.
pub fn fit_profile(
    ks: &[i32],
    s: &[f64],
    nonempty: &[usize],
    k_top: i32,
    q: Exponent,
    cfg: &ProfileConfig,
) -> Result<(Vec<usize>, Option<f64>, Verdict)> {
    let usable: Vec<usize> = nonempty.iter().copied().filter(|&i| ks[i] <= k_top).collect();
    let take = usable.len().min(cfg.fit_width);
    let fit: Vec<usize> = usable[usable.len() - take..].to_vec();
    if fit.len() < MIN_USABLE_ANNULI {
        return Err(Error::InsufficientResolution {
            usable: fit.len(),
            required: MIN_USABLE_ANNULI,
        });
    }
    let vals: Vec<f64> = fit.iter().map(|&i| s[i]).collect();
    let xs: Vec<f64> = fit.iter().map(|&i| ks[i] as f64).collect();
    let last = *vals.last().expect("fit is nonempty");
    let slope = if last <= 0.0 {
        None
    } else {
        let nz: Vec<usize> = (0..vals.len()).filter(|&i| vals[i] > 0.0).collect();
        if nz.len() >= 2 {
            let xz: Vec<f64> = nz.iter().map(|&i| xs[i]).collect();
            let yz: Vec<f64> = nz.iter().map(|&i| vals[i].log2()).collect();
            ls_slope(&xz, &yz)
        } else {
            let ys: Vec<f64> = vals.iter().map(|&v| log2_floor(v)).collect();
            ls_slope(&xs, &ys)
        }
    };
    let verdict = match slope {
        None => Verdict::Regular,
        Some(m) if q.is_inf() => {
            if m > cfg.tau_inf {
                Verdict::Singular
            } else {
                Verdict::Regular
            }
        }
        Some(m) => {
            if m > -cfg.tau {
                Verdict::Singular
            } else {
                Verdict::Regular
            }
        }
    };
    Ok((fit, slope, verdict))
}

/// Per-sample data reused across sectors.
struct Prepared {
    /// (flat index, annulus k, |F ω|) for every nonzero frequency.
    samples: Vec<(usize, i32, f64)>,
    k_lo: i32,
    k_hi: i32,
}

fn prepare(f: &Spectrum, w: &WeightSpec, x0: &[f64], cfg: &ProfileConfig) -> Result<Prepared> {
    let g = &f.grid;
    if w.dim() != g.dim() || x0.len() != g.dim() {
        return Err(Error::IncompatibleGrid("weight, spectrum and centre differ in dimension".into()));
    }
    let fmax = f.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let floor = cfg.noise_floor * cfg.noise_reference.unwrap_or(fmax);
    let mut samples = Vec::with_capacity(f.values.len());
    let (mut k_lo, mut k_hi) = (i32::MAX, i32::MIN);
    for (i, v) in f.values.iter().enumerate() {
        let xi = g.freq_point(i);
        let r = norm(&xi);
        if r == 0.0 {
            continue;
        }
        let k = annulus_index(r);
        k_lo = k_lo.min(k);
        k_hi = k_hi.max(k);
        let a = v.norm();
        let val = if a <= floor { 0.0 } else { a * w.eval(x0, &xi)? };
        samples.push((i, k, val));
    }
    Ok(Prepared { samples, k_lo, k_hi })
}

fn profile_from(
    prep: &Prepared,
    f: &Spectrum,
    part: &ConePartition,
    j: usize,
    w: &WeightSpec,
    q: Exponent,
    cfg: &ProfileConfig,
) -> Result<DyadicProfile> {
    let g = &f.grid;
    let n = (prep.k_hi - prep.k_lo + 1).max(0) as usize;
    let mut acc = vec![0.0f64; n];
    let mut count = vec![0usize; n];
    for &(i, k, val) in &prep.samples {
        if !part.in_widened(j, &g.freq_point(i)) {
            continue;
        }
        let slot = (k - prep.k_lo) as usize;
        count[slot] += 1;
        if q.is_inf() {
            acc[slot] = acc[slot].max(val);
        } else if q.0 == 1.0 {
            acc[slot] += val;
        } else {
            acc[slot] += val.powf(q.0);
        }
    }
    let dv = g.dxi_volume();
    let s: Vec<f64> = acc
        .iter()
        .map(|&a| {
            if q.is_inf() {
                a
            } else if q.0 == 1.0 {
                dv * a
            } else {
                (dv * a).powf(1.0 / q.0)
            }
        })
        .collect();
    let ks: Vec<i32> = (prep.k_lo..=prep.k_hi).collect();
    let nonempty: Vec<usize> = (0..n).filter(|&i| count[i] > 0).collect();
    let (fit, slope, verdict) = fit_profile(&ks, &s, &nonempty, top_annulus(g), q, cfg)?;
    Ok(DyadicProfile {
        sector: j,
        q,
        weight_id: w.id(),
        ks,
        s,
        fit,
        slope,
        k: cfg.fit_width,
        verdict,
    })
}

/// S_k = (Δξ^d Σ_{ξ ∈ Γ_j ∩ A_k} |F(ξ) ω(x₀, ξ)|^q)^{1/q} over the widened
/// sector j, with the slope fit and verdict.
pub fn cone_seminorm_profile(
    f: &Spectrum,
    part: &ConePartition,
    j: usize,
    w: &WeightSpec,
    q: Exponent,
    x0: &[f64],
    cfg: &ProfileConfig,
) -> Result<DyadicProfile> {
    let prep = prepare(f, w, x0, cfg)?;
    profile_from(&prep, f, part, j, w, q, cfg)
}

/// Profiles for every sector of the partition, sharing the weighted samples.
pub fn sector_profiles(
    f: &Spectrum,
    part: &ConePartition,
    w: &WeightSpec,
    q: Exponent,
    x0: &[f64],
    cfg: &ProfileConfig,
) -> Result<Vec<DyadicProfile>> {
    if part.d != f.dim() {
        return Err(Error::IncompatibleGrid("partition and spectrum differ in dimension".into()));
    }
    let prep = prepare(f, w, x0, cfg)?;
    (0..part.n_sectors)
        .map(|j| profile_from(&prep, f, part, j, w, q, cfg))
        .collect()
}

/// Unrestricted seminorm over all ξ ≠ 0 of the grid.
pub fn band_seminorm(f: &Spectrum, w: &WeightSpec, q: Exponent, x0: &[f64]) -> Result<f64> {
    let g = &f.grid;
    let mut terms = Vec::with_capacity(f.values.len());
    for (i, v) in f.values.iter().enumerate() {
        let xi = g.freq_point(i);
        if norm(&xi) == 0.0 {
            continue;
        }
        terms.push(v.norm() * w.eval(x0, &xi)?);
    }
    Ok(q.aggregate(terms.into_iter(), g.dxi_volume()))
}
