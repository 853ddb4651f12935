//! Sampled fields on uniform periodic grids and the Fourier transform
//! f̂(ξ) = (2π)^{-d/2} ∫ f(x) e^{-i⟨x,ξ⟩} dx.

pub(crate) mod fft;
pub mod io;
pub mod synth;
pub mod window;

pub use synth::{synth, GeneratorSpec};
pub use window::WindowSpec;

use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Grid metadata shared by fields and spectra.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub shape: Vec<usize>,
    pub spacing: Vec<f64>,
    pub origin: Vec<f64>,
}

impl Grid {
    pub fn new(shape: Vec<usize>, spacing: Vec<f64>, origin: Vec<f64>) -> Result<Grid> {
        let d = shape.len();
        if !(1..=2).contains(&d) || spacing.len() != d || origin.len() != d {
            return Err(Error::InvalidConfig(format!(
                "grid needs matching shape/spacing/origin of length 1 or 2, got {shape:?}/{spacing:?}/{origin:?}"
            )));
        }
        if shape.iter().any(|&n| n < 2) || spacing.iter().any(|&h| !(h > 0.0 && h.is_finite())) {
            return Err(Error::InvalidConfig("grid needs N >= 2 and positive spacing".into()));
        }
        Ok(Grid { shape, spacing, origin })
    }

    /// `n` points per axis with spacing `h`, index `n/2` at x = 0.
    pub fn centered(d: usize, n: usize, h: f64) -> Grid {
        Grid::new(vec![n; d], vec![h; d], vec![-((n / 2) as f64) * h; d]).expect("centered grid is valid")
    }

    pub fn dim(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing.iter().product()
    }

    pub fn dxi(&self, axis: usize) -> f64 {
        2.0 * PI / (self.shape[axis] as f64 * self.spacing[axis])
    }

    pub fn dxi_volume(&self) -> f64 {
        (0..self.dim()).map(|a| self.dxi(a)).product()
    }

    pub fn coord(&self, axis: usize, m: usize) -> f64 {
        self.origin[axis] + m as f64 * self.spacing[axis]
    }

    /// Frequency of centred index `k`: 2π(k − N/2)/(N h).
    pub fn freq(&self, axis: usize, k: usize) -> f64 {
        (k as f64 - (self.shape[axis] / 2) as f64) * self.dxi(axis)
    }

    /// Multi-index of a flat row-major position.
    pub fn unravel(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim()];
        for a in (0..self.dim()).rev() {
            idx[a] = flat % self.shape[a];
            flat /= self.shape[a];
        }
        idx
    }

    pub fn ravel(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.shape).fold(0, |acc, (&i, &n)| acc * n + i)
    }

    pub fn point(&self, flat: usize) -> Vec<f64> {
        self.unravel(flat)
            .iter()
            .enumerate()
            .map(|(a, &m)| self.coord(a, m))
            .collect()
    }

    pub fn freq_point(&self, flat: usize) -> Vec<f64> {
        self.unravel(flat)
            .iter()
            .enumerate()
            .map(|(a, &k)| self.freq(a, k))
            .collect()
    }

    /// Nearest grid index to `x` per axis, or `None` outside the grid.
    pub fn nearest_index(&self, x: &[f64]) -> Option<Vec<usize>> {
        if x.len() != self.dim() {
            return None;
        }
        let mut idx = Vec::with_capacity(x.len());
        for a in 0..self.dim() {
            let m = ((x[a] - self.origin[a]) / self.spacing[a]).round();
            if m < 0.0 || m >= self.shape[a] as f64 {
                return None;
            }
            idx.push(m as usize);
        }
        Some(idx)
    }

    /// Largest x on each axis.
    pub fn upper(&self, axis: usize) -> f64 {
        self.coord(axis, self.shape[axis] - 1)
    }

    /// Nyquist frequency π/h along `axis`.
    pub fn nyquist(&self, axis: usize) -> f64 {
        PI / self.spacing[axis]
    }

    pub fn same_as(&self, other: &Grid) -> bool {
        self.shape == other.shape
            && self
                .spacing
                .iter()
                .zip(&other.spacing)
                .all(|(a, b)| (a - b).abs() <= 1e-12 * a.abs())
            && self
                .origin
                .iter()
                .zip(&other.origin)
                .zip(&self.spacing)
                .all(|((a, b), h)| (a - b).abs() <= 1e-9 * h)
    }
}

/// Complex samples on a grid, row-major (last axis fastest).
#[derive(Clone, Debug, PartialEq)]
pub struct SampledField {
    pub grid: Grid,
    pub values: Vec<Complex64>,
}

/// Fourier samples at ξ_n = 2πn/(Nh), n ∈ [−N/2, N/2), centred layout.
/// `grid` is the spatial grid of the field it came from.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    pub grid: Grid,
    pub values: Vec<Complex64>,
}

impl SampledField {
    pub fn new(grid: Grid, values: Vec<Complex64>) -> Result<SampledField> {
        if values.len() != grid.len() {
            return Err(Error::InvalidConfig(format!(
                "{} values for a grid of {} points",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::Domain("field contains non-finite values".into()));
        }
        Ok(SampledField { grid, values })
    }

    pub fn zeros(grid: Grid) -> SampledField {
        let n = grid.len();
        SampledField {
            grid,
            values: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    pub fn from_fn(grid: Grid, f: impl Fn(&[f64]) -> Complex64) -> SampledField {
        let values = (0..grid.len()).map(|i| f(&grid.point(i))).collect();
        SampledField { grid, values }
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    /// h^d Σ |f|².
    pub fn energy(&self) -> f64 {
        self.grid.cell_volume() * self.values.iter().map(|v| v.norm_sqr()).sum::<f64>()
    }

    pub fn scale(&self, c: Complex64) -> SampledField {
        SampledField {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }

    pub fn add(&self, other: &SampledField) -> Result<SampledField> {
        if !self.grid.same_as(&other.grid) {
            return Err(Error::IncompatibleGrid("cannot add fields on different grids".into()));
        }
        Ok(SampledField {
            grid: self.grid.clone(),
            values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect(),
        })
    }

    /// Pointwise product with a function of x.
    pub fn multiply_by(&self, f: impl Fn(&[f64]) -> f64) -> SampledField {
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(i, v)| v * f(&self.grid.point(i)))
            .collect();
        SampledField {
            grid: self.grid.clone(),
            values,
        }
    }

    /// Periodic shift by whole cells: (τ_v f)(x) = f(x − v h).
    pub fn translate(&self, cells: &[i64]) -> SampledField {
        let g = &self.grid;
        let mut out = vec![Complex64::new(0.0, 0.0); self.values.len()];
        for (flat, v) in self.values.iter().enumerate() {
            let idx = g.unravel(flat);
            let moved: Vec<usize> = idx
                .iter()
                .zip(cells)
                .zip(&g.shape)
                .map(|((&i, &c), &n)| (i as i64 + c).rem_euclid(n as i64) as usize)
                .collect();
            out[g.ravel(&moved)] = *v;
        }
        SampledField {
            grid: g.clone(),
            values: out,
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

impl Spectrum {
    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    /// Δξ^d Σ |f̂|².
    pub fn energy(&self) -> f64 {
        self.grid.dxi_volume() * self.values.iter().map(|v| v.norm_sqr()).sum::<f64>()
    }

    pub fn freq_point(&self, flat: usize) -> Vec<f64> {
        self.grid.freq_point(flat)
    }

    pub fn from_fn(grid: Grid, f: impl Fn(&[f64]) -> Complex64) -> Spectrum {
        let values = (0..grid.len()).map(|i| f(&grid.freq_point(i))).collect();
        Spectrum { grid, values }
    }
}

/// Phase e^{∓i⟨o,ξ⟩} for the grid origin at every centred frequency.
fn origin_phase(g: &Grid, sign: f64) -> Vec<Complex64> {
    (0..g.len())
        .map(|i| {
            let xi = g.freq_point(i);
            let dot: f64 = xi.iter().zip(&g.origin).map(|(a, b)| a * b).sum();
            Complex64::from_polar(1.0, sign * dot)
        })
        .collect()
}

/// Forward transform in the (2π)^{-d/2} normalization.
pub fn dft(f: &SampledField) -> Spectrum {
    let g = &f.grid;
    let mut buf = f.values.clone();
    fft::fft_nd(&mut buf, &g.shape, false);
    let mut out = fft::shift_to_centered(&buf, &g.shape);
    let c = (2.0 * PI).powf(-(g.dim() as f64) / 2.0) * g.cell_volume();
    for (v, p) in out.iter_mut().zip(origin_phase(g, -1.0)) {
        *v *= p * c;
    }
    Spectrum {
        grid: g.clone(),
        values: out,
    }
}

/// Inverse of [`dft`].
pub fn idft(s: &Spectrum) -> SampledField {
    let g = &s.grid;
    let phased: Vec<Complex64> = s
        .values
        .iter()
        .zip(origin_phase(g, 1.0))
        .map(|(v, p)| v * p)
        .collect();
    let mut buf = fft::shift_from_centered(&phased, &g.shape);
    fft::fft_nd(&mut buf, &g.shape, true);
    let c = (2.0 * PI).powf(-(g.dim() as f64) / 2.0) * g.dxi_volume();
    for v in buf.iter_mut() {
        *v *= c;
    }
    SampledField {
        grid: g.clone(),
        values: buf,
    }
}

/// Largest dyadic index k with 2^{k+1} ≤ ξ_N on every axis: the top
/// annulus lying inside the Nyquist disc.
pub fn top_annulus(g: &Grid) -> i32 {
    let nyq = (0..g.dim()).map(|a| g.nyquist(a)).fold(f64::INFINITY, f64::min);
    (nyq * (1.0 + 1e-12)).log2().floor() as i32 - 1
}

/// φ(· − x₀) f. Fails if the window support leaves the grid.
pub fn localize(f: &SampledField, x0: &[f64], w: &WindowSpec) -> Result<SampledField> {
    let g = &f.grid;
    if x0.len() != g.dim() {
        return Err(Error::Domain("center dimension mismatch".into()));
    }
    let r = w.support_radius();
    for a in 0..g.dim() {
        let tol = 1e-9 * g.spacing[a];
        if x0[a] - r < g.origin[a] - tol || x0[a] + r > g.upper(a) + tol {
            return Err(Error::Domain(format!(
                "window of radius {r} at {x0:?} leaves the grid on axis {a}"
            )));
        }
    }
    Ok(f.multiply_by(|x| {
        let dx: Vec<f64> = x.iter().zip(x0).map(|(a, b)| a - b).collect();
        w.eval(&dx)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn gaussian_field(n: usize, h: f64) -> SampledField {
        SampledField::from_fn(Grid::centered(1, n, h), |x| Complex64::new((-x[0] * x[0] / 2.0).exp(), 0.0))
    }

    #[test]
    fn gaussian_self_transform() {
        let f = gaussian_field(1024, 40.0 / 1024.0);
        let s = dft(&f);
        let mut err = 0.0f64;
        for (i, v) in s.values.iter().enumerate() {
            let xi = s.freq_point(i)[0];
            err = err.max((v - Complex64::new((-xi * xi / 2.0).exp(), 0.0)).norm());
        }
        assert!(err <= 1e-8, "max error {err}");
    }

    #[test]
    fn delta_spectrum_is_flat_and_shift_is_a_phase() {
        let g = Grid::centered(1, 1024, 0.04);
        let mut f = SampledField::zeros(g.clone());
        f.values[512] = Complex64::new(25.0, 0.0);
        let s = dft(&f);
        for v in &s.values {
            assert!((v.norm() - (2.0 * PI).powf(-0.5)).abs() < 1e-12);
        }
        let shifted = f.translate(&[50]);
        let x0 = 50.0 * 0.04;
        let s2 = dft(&shifted);
        for (i, (a, b)) in s.values.iter().zip(&s2.values).enumerate() {
            let xi = s.freq_point(i)[0];
            assert!((a * Complex64::from_polar(1.0, -x0 * xi) - b).norm() < 1e-10);
        }
    }

    #[test]
    fn round_trip_two_dimensional() {
        let g = Grid::new(vec![16, 12], vec![0.3, 0.5], vec![-2.0, 1.0]).unwrap();
        let f = SampledField::from_fn(g, |x| Complex64::new((x[0] * 1.3).sin(), x[1] * x[0]));
        let back = idft(&dft(&f));
        for (a, b) in f.values.iter().zip(&back.values) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn dft_matches_direct_sum_on_odd_grid() {
        let g = Grid::new(vec![7], vec![0.4], vec![-1.1]).unwrap();
        let f = SampledField::from_fn(g.clone(), |x| Complex64::new(x[0].cos(), x[0]));
        let s = dft(&f);
        for k in 0..7 {
            let xi = g.freq(0, k);
            let mut acc = Complex64::new(0.0, 0.0);
            for m in 0..7 {
                acc += f.values[m] * Complex64::from_polar(1.0, -g.coord(0, m) * xi);
            }
            acc *= 0.4 / (2.0 * PI).sqrt();
            assert!((acc - s.values[k]).norm() < 1e-12);
        }
    }

    #[test]
    fn localize_examples() {
        let g = Grid::centered(1, 256, 0.05);
        let one = SampledField::from_fn(g.clone(), |_| Complex64::new(1.0, 0.0));
        let w = WindowSpec::RaisedCosine { radius: 2.0 };
        let l = localize(&one, &[1.0], &w).unwrap();
        for (i, v) in l.values.iter().enumerate() {
            assert_eq!(v.re, w.eval(&[g.point(i)[0] - 1.0]));
        }
        let step = SampledField::from_fn(g.clone(), |x| Complex64::new(if x[0] >= 0.0 { 1.0 } else { 0.0 }, 0.0));
        assert_eq!(localize(&step, &[3.5], &w).unwrap(), localize(&one, &[3.5], &w).unwrap());
        assert!(localize(&one, &[5.5], &w).is_err());
        let twice = localize(&localize(&step, &[0.3], &w).unwrap(), &[0.3], &w).unwrap();
        let sq = step.multiply_by(|x| w.eval(&[x[0] - 0.3]).powi(2));
        for (a, b) in twice.values.iter().zip(&sq.values) {
            assert!((a - b).norm() < 1e-15);
        }
    }

    proptest! {
        #[test]
        fn plancherel_and_linearity(seed in any::<u64>(), n in 4usize..40, h in 0.01f64..1.0) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let g = Grid::new(vec![n], vec![h], vec![rng.gen_range(-3.0..3.0)]).unwrap();
            let mut mk = || {
                let vals = (0..n).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
                SampledField::new(g.clone(), vals).unwrap()
            };
            let (a, b) = (mk(), mk());
            let (fa, fb) = (dft(&a), dft(&b));
            prop_assert!((a.energy() - fa.energy()).abs() <= 1e-10 * a.energy());
            let c = Complex64::new(0.3, -1.7);
            let lin = dft(&a.add(&b.scale(c)).unwrap());
            for i in 0..n {
                prop_assert!((lin.values[i] - fa.values[i] - c * fb.values[i]).norm() < 1e-12 * (1.0 + lin.values[i].norm()));
            }
        }

        #[test]
        fn localize_commutes_with_translation(shift in -20i64..20, c in -40i64..40) {
            let g = Grid::centered(1, 256, 0.05);
            let f = SampledField::from_fn(g.clone(), |x| Complex64::new((3.0 * x[0]).sin() + x[0].abs(), 0.0));
            let w = WindowSpec::RaisedCosine { radius: 1.5 };
            let x0 = c as f64 * 0.05;
            let lhs = localize(&f.translate(&[shift]), &[x0 + shift as f64 * 0.05], &w).unwrap();
            let rhs = localize(&f, &[x0], &w).unwrap().translate(&[shift]);
            for (a, b) in lhs.values.iter().zip(&rhs.values) {
                prop_assert!((a - b).norm() < 1e-12);
            }
        }
    }
}
