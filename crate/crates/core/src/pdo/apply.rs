//! Op_t(a) f on sampled fields.
//!
//! The general path works in frequency:
//! F(Op(a)f)(ξ_k) = (2π)^{−d/2} Δξ^d Σ_m (F₁a)(ξ_k − η_m, η_m) f̂(η_m),
//! with F₁a the transform of a(·, η) in x. Writing F₁a through the raw FFT
//! A of a(x_j, η) gives (F₁a)(ξ_k − η_m, η_m) =
//! (2π)^{−d/2} h^d e^{−i⟨o, ξ_k − η_m⟩} A[(k − m) mod N], which needs no
//! assumption on the grid origin o.

use super::quant::convert_quantization;
use crate::error::{Error, Result};
use crate::fields::fft::fft_nd;
use crate::fields::{dft, idft, Grid, SampledField, Spectrum};
use crate::symcalc::{SampledSymbol, SymbolGrid, SymbolSpec};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ApplyMode {
    MultiplierFast,
    XmultiplierFast,
    FullQuadrature,
}

/// Full-quadrature size limits: N ≤ 512 in d = 1, N ≤ 64 in d = 2.
pub fn full_quadrature_limit(d: usize) -> usize {
    match d {
        1 => 512,
        _ => 64,
    }
}

/// Kernel tables larger than this are streamed instead of cached.
const CACHE_LIMIT: usize = 1 << 20;

/// A symbol prepared for repeated application on one grid.
#[derive(Clone, Debug)]
pub struct OperatorPlan {
    pub grid: Grid,
    pub t: f64,
    pub mode: ApplyMode,
    /// Kohn-Nirenberg symbol on the field grid.
    pub symbol: SampledSymbol,
    /// Raw x-FFT of the symbol per frequency column, `kernel[m * N + p]`,
    /// kept when small enough.
    kernel: Option<Vec<Complex64>>,
}

impl OperatorPlan {
    pub fn new(a: &SymbolSpec, grid: &Grid, t: f64) -> Result<OperatorPlan> {
        Self::with_mode(a, grid, t, None)
    }

    pub fn with_mode(a: &SymbolSpec, grid: &Grid, t: f64, mode: Option<ApplyMode>) -> Result<OperatorPlan> {
        if a.dim() != grid.dim() {
            return Err(Error::IncompatibleGrid("symbol and field dimensions differ".into()));
        }
        let auto = if a.is_x_independent() {
            ApplyMode::MultiplierFast
        } else if a.is_xi_independent() {
            ApplyMode::XmultiplierFast
        } else {
            ApplyMode::FullQuadrature
        };
        let mode = mode.unwrap_or(auto);
        match mode {
            ApplyMode::MultiplierFast if !a.is_x_independent() => {
                return Err(Error::InvalidConfig("multiplier_fast needs an x-independent symbol".into()))
            }
            ApplyMode::XmultiplierFast if !a.is_xi_independent() => {
                return Err(Error::InvalidConfig("xmultiplier_fast needs a ξ-independent symbol".into()))
            }
            _ => {}
        }
        let x_dep = !a.is_x_independent();
        let sg = SymbolGrid::for_field(grid, x_dep || mode == ApplyMode::FullQuadrature);
        let mut symbol = SampledSymbol::sample(a, &sg)?;
        let mut kernel = None;
        if mode == ApplyMode::FullQuadrature {
            let lim = full_quadrature_limit(grid.dim());
            if grid.shape.iter().any(|&n| n > lim) {
                return Err(Error::GridTooLarge(format!(
                    "full quadrature is limited to N ≤ {lim} in d = {}",
                    grid.dim()
                )));
            }
            // both fast-path symbol types are t-independent
            if t != 0.0 && x_dep {
                symbol = convert_quantization(&symbol, t, 0.0)?;
            }
            if grid.len() * grid.len() <= CACHE_LIMIT {
                kernel = Some(x_transform(&symbol, grid));
            }
        }
        Ok(OperatorPlan {
            grid: grid.clone(),
            t,
            mode,
            symbol,
            kernel,
        })
    }

    pub fn is_cached(&self) -> bool {
        self.kernel.is_some()
    }

    /// (F₁a)(ξ_k − η_m, η_m) from the plan, for spot checks.
    pub fn kernel_entry(&self, k: usize, m: usize) -> Complex64 {
        let g = &self.grid;
        let col = match &self.kernel {
            Some(kern) => kern[m * g.len()..(m + 1) * g.len()].to_vec(),
            None => x_transform_column(&self.symbol, g, m),
        };
        let p = diff_index(g, k, m);
        let zeta: Vec<f64> = g.freq_point(k).iter().zip(g.freq_point(m)).map(|(a, b)| a - b).collect();
        let phase: f64 = -zeta.iter().zip(&g.origin).map(|(z, o)| z * o).sum::<f64>();
        col[p] * Complex64::from_polar(1.0, phase) * (2.0 * PI).powf(-(g.dim() as f64) / 2.0) * g.cell_volume()
    }

    pub fn apply(&self, f: &SampledField) -> Result<SampledField> {
        if !f.grid.same_as(&self.grid) {
            return Err(Error::IncompatibleGrid("field grid differs from the operator grid".into()));
        }
        match self.mode {
            ApplyMode::MultiplierFast => {
                let mut s = dft(f);
                for (v, a) in s.values.iter_mut().zip(&self.symbol.values) {
                    *v *= a;
                }
                Ok(idft(&s))
            }
            ApplyMode::XmultiplierFast => {
                let n_xi = self.symbol.grid.n_xi();
                let values = f
                    .values
                    .iter()
                    .enumerate()
                    .map(|(j, v)| v * self.symbol.values[j * n_xi])
                    .collect();
                SampledField::new(f.grid.clone(), values)
            }
            ApplyMode::FullQuadrature => Ok(full_apply(&self.symbol, self.kernel.as_deref(), f)),
        }
    }
}

/// Raw FFT over x of column m of the symbol.
fn x_transform_column(a: &SampledSymbol, g: &Grid, m: usize) -> Vec<Complex64> {
    let n = g.len();
    let mut col: Vec<Complex64> = (0..n).map(|j| a.at(j, m)).collect();
    fft_nd(&mut col, &g.shape, false);
    col
}

fn x_transform(a: &SampledSymbol, g: &Grid) -> Vec<Complex64> {
    (0..g.len())
        .into_par_iter()
        .flat_map_iter(|m| x_transform_column(a, g, m))
        .collect()
}

/// Raw FFT slot of the centred index difference k − m, per axis mod N.
fn diff_index(g: &Grid, k: usize, m: usize) -> usize {
    let (ik, im) = (g.unravel(k), g.unravel(m));
    let mut flat = 0;
    for ax in 0..g.dim() {
        let n = g.shape[ax] as i64;
        let p = (ik[ax] as i64 - im[ax] as i64).rem_euclid(n);
        flat = flat * g.shape[ax] + p as usize;
    }
    flat
}

fn full_apply(a: &SampledSymbol, kernel: Option<&[Complex64]>, f: &SampledField) -> SampledField {
    let g = &f.grid;
    let n = g.len();
    let d = g.dim();
    let fh = dft(f);
    let phase_o = |k: usize, sign: f64| -> Complex64 {
        let xi = g.freq_point(k);
        Complex64::from_polar(1.0, sign * xi.iter().zip(&g.origin).map(|(a, b)| a * b).sum::<f64>())
    };
    // g_m = e^{i⟨o, η_m⟩} f̂(η_m)
    let gm: Vec<Complex64> = (0..n).map(|m| fh.values[m] * phase_o(m, 1.0)).collect();
    let active: Vec<usize> = (0..n).filter(|&m| gm[m].norm() > 0.0).collect();
    let acc = active
        .par_chunks(16.max(active.len() / (4 * rayon::current_num_threads()).max(1)))
        .map(|chunk| {
            let mut out = vec![Complex64::new(0.0, 0.0); n];
            for &m in chunk {
                let owned;
                let col: &[Complex64] = match kernel {
                    Some(kern) => &kern[m * n..(m + 1) * n],
                    None => {
                        owned = x_transform_column(a, g, m);
                        &owned
                    }
                };
                let w = gm[m];
                for (k, o) in out.iter_mut().enumerate() {
                    *o += col[diff_index_fast(g, k, m)] * w;
                }
            }
            out
        })
        .reduce(
            || vec![Complex64::new(0.0, 0.0); n],
            |mut x, y| {
                for (u, v) in x.iter_mut().zip(y) {
                    *u += v;
                }
                x
            },
        );
    let c = (2.0 * PI).powi(-(d as i32)) * g.cell_volume() * g.dxi_volume();
    let values = acc.iter().enumerate().map(|(k, v)| v * phase_o(k, -1.0) * c).collect();
    idft(&Spectrum {
        grid: g.clone(),
        values,
    })
}

/// `diff_index` specialised to d ≤ 2 without allocation.
#[inline]
fn diff_index_fast(g: &Grid, k: usize, m: usize) -> usize {
    if g.dim() == 1 {
        let n = g.shape[0];
        return (k + n - m) % n;
    }
    let (n0, n1) = (g.shape[0], g.shape[1]);
    let (k0, k1) = (k / n1, k % n1);
    let (m0, m1) = (m / n1, m % n1);
    ((k0 + n0 - m0) % n0) * n1 + (k1 + n1 - m1) % n1
}

/// Op₀(b) f for a symbol already sampled on the field grid.
pub(crate) fn apply_op_kn(b: &SampledSymbol, f: &SampledField) -> Result<SampledField> {
    let sg = SymbolGrid::for_field(&f.grid, true);
    let b = b.broadcast_to(&sg)?;
    Ok(full_apply(&b, None, f))
}

/// Op_t(a) f with the mode chosen from the symbol's dependence on x and ξ.
pub fn apply_op(a: &SymbolSpec, f: &SampledField, t: f64) -> Result<SampledField> {
    OperatorPlan::new(a, &f.grid, t)?.apply(f)
}

pub fn apply_op_mode(a: &SymbolSpec, f: &SampledField, t: f64, mode: ApplyMode) -> Result<SampledField> {
    OperatorPlan::with_mode(a, &f.grid, t, Some(mode))?.apply(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::synth::{synth, GeneratorSpec};

    fn rel(a: &SampledField, b: &SampledField) -> f64 {
        let d = a.add(&b.scale(Complex64::new(-1.0, 0.0))).unwrap();
        (d.energy() / b.energy().max(1e-300)).sqrt()
    }

    fn gaussian(n: usize, h: f64) -> SampledField {
        let g = Grid::centered(1, n, h);
        synth(
            &GeneratorSpec::Gaussian {
                center: vec![0.3],
                sigma: 1.0,
            },
            &g,
        )
        .unwrap()
    }

    #[test]
    fn multiplier_fast_matches_full_quadrature() {
        let f = gaussian(64, 0.25);
        let a = SymbolSpec::multiplier(1, 2.0);
        let fast = apply_op(&a, &f, 0.0).unwrap();
        let full = apply_op_mode(&a, &f, 0.0, ApplyMode::FullQuadrature).unwrap();
        assert!(rel(&fast, &full) < 1e-12);
        // and with the Fourier multiplier directly
        let mut s = dft(&f);
        for (i, v) in s.values.iter_mut().enumerate() {
            let xi = s.grid.freq(0, i);
            *v *= 1.0 + xi * xi;
        }
        assert!(rel(&fast, &idft(&s)) < 1e-12);
    }

    #[test]
    fn position_multiplier_is_pointwise() {
        let f = gaussian(64, 0.25);
        let a = SymbolSpec::xmultiplier(1, "2 + cos(x1)").unwrap();
        let out = apply_op(&a, &f, 0.0).unwrap();
        let want = SampledField::new(
            f.grid.clone(),
            f.values
                .iter()
                .enumerate()
                .map(|(j, v)| v * (2.0 + f.grid.coord(0, j).cos()))
                .collect(),
        )
        .unwrap();
        assert!(rel(&out, &want) < 1e-10);
        let full = apply_op_mode(&a, &f, 0.0, ApplyMode::FullQuadrature).unwrap();
        assert!(rel(&full, &want) < 1e-10);
    }

    #[test]
    fn phase_symbol_translates() {
        let f = gaussian(128, 0.25);
        let a = SymbolSpec::phase(vec![1.0]);
        let out = apply_op(&a, &f, 0.0).unwrap();
        let want = f.translate(&[4]);
        assert!(rel(&out, &want) < 1e-12);
    }

    #[test]
    fn two_dimensional_streamed_full_quadrature() {
        let g = Grid::centered(2, 64, 0.125);
        let f = synth(
            &GeneratorSpec::Gaussian {
                center: vec![0.0, 0.5],
                sigma: 0.8,
            },
            &g,
        )
        .unwrap();
        let a = SymbolSpec::multiplier(2, 1.0);
        let fast = apply_op(&a, &f, 0.0).unwrap();
        let plan = OperatorPlan::with_mode(&a, &g, 0.0, Some(ApplyMode::FullQuadrature)).unwrap();
        assert!(!plan.is_cached());
        assert!(rel(&plan.apply(&f).unwrap(), &fast) < 1e-12);
        assert!(OperatorPlan::with_mode(&a, &Grid::centered(2, 128, 0.1), 0.0, Some(ApplyMode::FullQuadrature)).is_err());
    }

    #[test]
    fn cached_kernel_matches_the_symbol_transform() {
        let g = Grid::new(vec![16], vec![0.5], vec![-3.3]).unwrap();
        let a = SymbolSpec::expr(1, "cos(x1) * xi1 + 1").unwrap();
        let plan = OperatorPlan::new(&a, &g, 0.0).unwrap();
        assert!(plan.is_cached());
        for (k, m) in [(0, 0), (3, 9), (15, 1), (7, 8)] {
            let zeta = g.freq(0, k) - g.freq(0, m);
            let eta = g.freq(0, m);
            let direct: Complex64 = (0..16)
                .map(|j| {
                    let x = g.coord(0, j);
                    a.eval(&[x], &[eta]).unwrap() * Complex64::from_polar(1.0, -x * zeta)
                })
                .sum::<Complex64>()
                * 0.5
                / (2.0 * PI).sqrt();
            assert!((plan.kernel_entry(k, m) - direct).norm() < 1e-12);
        }
    }
}
