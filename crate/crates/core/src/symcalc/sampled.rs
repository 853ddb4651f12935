//! Symbols sampled on (x-grid) × (frequency lattice) and their derivatives.

use super::symbol::SymbolSpec;
use crate::error::{Error, Result};
use crate::fields::fft::fft_nd;
use crate::fields::io::{read_field, write_field};
use crate::fields::{Grid, SampledField};
use num_complex::Complex64;
use rayon::prelude::*;
use std::path::Path;

/// Where a sampled symbol lives. The ξ points are the frequency lattice of
/// `xi`; `x` is `None` for symbols that do not depend on x.
#[derive(Clone, Debug, PartialEq)]
pub struct SymbolGrid {
    pub xi: Grid,
    pub x: Option<Grid>,
}

impl SymbolGrid {
    /// x on the field grid and ξ on its frequency lattice.
    pub fn for_field(grid: &Grid, x_dependent: bool) -> SymbolGrid {
        SymbolGrid {
            xi: grid.clone(),
            x: x_dependent.then(|| grid.clone()),
        }
    }

    pub fn frequencies_only(grid: &Grid) -> SymbolGrid {
        Self::for_field(grid, false)
    }

    pub fn dim(&self) -> usize {
        self.xi.dim()
    }

    pub fn n_x(&self) -> usize {
        self.x.as_ref().map_or(1, |g| g.len())
    }

    pub fn n_xi(&self) -> usize {
        self.xi.len()
    }

    pub fn x_point(&self, ix: usize) -> Vec<f64> {
        match &self.x {
            Some(g) => g.point(ix),
            None => vec![0.0; self.dim()],
        }
    }

    fn same_lattice(&self, other: &SymbolGrid) -> bool {
        self.xi.shape == other.xi.shape
            && self
                .xi
                .spacing
                .iter()
                .zip(&other.xi.spacing)
                .all(|(a, b)| (a - b).abs() <= 1e-12 * a.abs())
    }

    /// Whether data on `other` can be read on this grid (possibly broadcast in x).
    pub fn accepts(&self, other: &SymbolGrid) -> bool {
        self.same_lattice(other)
            && match (&self.x, &other.x) {
                (_, None) => true,
                (Some(a), Some(b)) => a.same_as(b),
                (None, Some(_)) => false,
            }
    }
}

/// Values a(x_m, ξ_k) stored as `values[m * n_xi + k]` with k in centred layout.
#[derive(Clone, Debug)]
pub struct SampledSymbol {
    pub grid: SymbolGrid,
    pub values: Vec<Complex64>,
}

impl SampledSymbol {
    pub fn new(grid: SymbolGrid, values: Vec<Complex64>) -> Result<SampledSymbol> {
        if values.len() != grid.n_x() * grid.n_xi() {
            return Err(Error::IncompatibleGrid(format!(
                "sampled symbol needs {} values, got {}",
                grid.n_x() * grid.n_xi(),
                values.len()
            )));
        }
        Ok(SampledSymbol { grid, values })
    }

    pub fn from_fn(grid: SymbolGrid, f: impl Fn(&[f64], &[f64]) -> Complex64 + Sync) -> SampledSymbol {
        let n_xi = grid.n_xi();
        let values = (0..grid.n_x() * n_xi)
            .into_par_iter()
            .map(|i| f(&grid.x_point(i / n_xi), &grid.xi.freq_point(i % n_xi)))
            .collect();
        SampledSymbol { grid, values }
    }

    /// Sample `a` on `grid`. Array symbols must already live there.
    pub fn sample(a: &SymbolSpec, grid: &SymbolGrid) -> Result<SampledSymbol> {
        if a.dim() != grid.dim() {
            return Err(Error::IncompatibleGrid("symbol and grid dimensions differ".into()));
        }
        if let Some(arr) = a.as_array() {
            return arr.broadcast_to(grid);
        }
        if grid.x.is_some() && a.is_x_independent() {
            let base = Self::sample(a, &SymbolGrid::frequencies_only(&grid.xi))?;
            return base.broadcast_to(grid);
        }
        let n_xi = grid.n_xi();
        let values: Result<Vec<Complex64>> = (0..grid.n_x() * n_xi)
            .into_par_iter()
            .map(|i| a.eval(&grid.x_point(i / n_xi), &grid.xi.freq_point(i % n_xi)))
            .collect();
        Ok(SampledSymbol {
            grid: grid.clone(),
            values: values?,
        })
    }

    /// Copy onto `grid`, repeating x-independent data along x.
    pub fn broadcast_to(&self, grid: &SymbolGrid) -> Result<SampledSymbol> {
        if !grid.accepts(&self.grid) {
            return Err(Error::IncompatibleGrid(
                "sampled symbol lives on a different grid".into(),
            ));
        }
        if self.grid.x.is_some() || grid.x.is_none() {
            return Ok(SampledSymbol {
                grid: grid.clone(),
                values: self.values.clone(),
            });
        }
        let mut values = Vec::with_capacity(grid.n_x() * grid.n_xi());
        for _ in 0..grid.n_x() {
            values.extend_from_slice(&self.values);
        }
        Ok(SampledSymbol {
            grid: grid.clone(),
            values,
        })
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn at(&self, ix: usize, k: usize) -> Complex64 {
        let ix = if self.grid.x.is_some() { ix } else { 0 };
        self.values[ix * self.grid.n_xi() + k]
    }

    pub fn is_xi_independent(&self) -> bool {
        self.values
            .chunks(self.grid.n_xi())
            .all(|row| row.iter().all(|v| *v == row[0]))
    }

    /// Value at a grid point; off-grid points are a domain error.
    pub fn lookup(&self, x: &[f64], xi: &[f64]) -> Result<Complex64> {
        let off = || Error::Domain(format!("array symbol is only defined on its grid, not at ({x:?}, {xi:?})"));
        let ix = match &self.grid.x {
            None => 0,
            Some(g) => {
                let idx = g.nearest_index(x).ok_or_else(off)?;
                for (a, &m) in idx.iter().enumerate() {
                    if (g.coord(a, m) - x[a]).abs() > 1e-9 * g.spacing[a] {
                        return Err(off());
                    }
                }
                g.ravel(&idx)
            }
        };
        let g = &self.grid.xi;
        let mut idx = Vec::with_capacity(xi.len());
        for (a, &v) in xi.iter().enumerate() {
            let k = (v / g.dxi(a)).round() + (g.shape[a] / 2) as f64;
            if k < 0.0 || k >= g.shape[a] as f64 || (g.freq(a, k as usize) - v).abs() > 1e-9 * g.dxi(a) {
                return Err(off());
            }
            idx.push(k as usize);
        }
        Ok(self.values[ix * g.len() + g.ravel(&idx)])
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> SampledSymbol {
        SampledSymbol {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_with(&self, other: &SampledSymbol, f: impl Fn(Complex64, Complex64) -> Complex64) -> Result<SampledSymbol> {
        let target = if self.grid.x.is_some() { &self.grid } else { &other.grid };
        let a = self.broadcast_to(target)?;
        let b = other.broadcast_to(target)?;
        Ok(SampledSymbol {
            grid: target.clone(),
            values: a.values.iter().zip(&b.values).map(|(&u, &v)| f(u, v)).collect(),
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// ∂_x^α by spectral differentiation along the periodic x-grid.
    pub fn deriv_x(&self, alpha: &[usize]) -> SampledSymbol {
        if alpha.iter().all(|&a| a == 0) {
            return self.clone();
        }
        let Some(xg) = &self.grid.x else {
            return self.map(|_| Complex64::new(0.0, 0.0));
        };
        let n_xi = self.grid.n_xi();
        let n_x = xg.len();
        let shape = xg.shape.clone();
        // multiplier (i y)^α on the raw FFT layout
        let mult: Vec<Complex64> = (0..n_x)
            .map(|flat| {
                let mut idx = vec![0; shape.len()];
                let mut r = flat;
                for a in (0..shape.len()).rev() {
                    idx[a] = r % shape[a];
                    r /= shape[a];
                }
                let mut m = Complex64::new(1.0, 0.0);
                for a in 0..shape.len() {
                    let n = shape[a] as i64;
                    let mut p = idx[a] as i64;
                    if p >= n - n / 2 {
                        p -= n;
                    }
                    if n % 2 == 0 && p == -n / 2 && alpha[a] % 2 == 1 {
                        return Complex64::new(0.0, 0.0);
                    }
                    let y = p as f64 * xg.dxi(a);
                    m *= Complex64::new(0.0, y).powu(alpha[a] as u32);
                }
                m
            })
            .collect();
        let cols: Vec<Vec<Complex64>> = (0..n_xi)
            .into_par_iter()
            .map(|k| {
                let mut col: Vec<Complex64> = (0..n_x).map(|m| self.values[m * n_xi + k]).collect();
                fft_nd(&mut col, &shape, false);
                for (v, w) in col.iter_mut().zip(&mult) {
                    *v *= w;
                }
                fft_nd(&mut col, &shape, true);
                let s = 1.0 / n_x as f64;
                col.iter_mut().for_each(|v| *v *= s);
                col
            })
            .collect();
        let mut values = vec![Complex64::new(0.0, 0.0); n_x * n_xi];
        for (k, col) in cols.into_iter().enumerate() {
            for (m, v) in col.into_iter().enumerate() {
                values[m * n_xi + k] = v;
            }
        }
        SampledSymbol {
            grid: self.grid.clone(),
            values,
        }
    }

    /// ∂_ξ^β by repeated sixth-order central differences on the frequency
    /// lattice, dropping to lower orders near the lattice edge.
    pub fn deriv_xi(&self, beta: &[usize]) -> SampledSymbol {
        let g = &self.grid.xi;
        let shape = g.shape.clone();
        let n_xi = g.len();
        let mut values = self.values.clone();
        for (axis, &b) in beta.iter().enumerate() {
            let stride: usize = shape[axis + 1..].iter().product();
            let n = shape[axis];
            let step = g.dxi(axis);
            for _ in 0..b {
                values.par_chunks_mut(n_xi).for_each(|row| {
                    let outer = n_xi / (n * stride);
                    let mut line = vec![Complex64::new(0.0, 0.0); n];
                    let mut out = vec![Complex64::new(0.0, 0.0); n];
                    for o in 0..outer {
                        for s in 0..stride {
                            let base = o * n * stride + s;
                            for (i, v) in line.iter_mut().enumerate() {
                                *v = row[base + i * stride];
                            }
                            fd_first(&line, step, &mut out);
                            for (i, v) in out.iter().enumerate() {
                                row[base + i * stride] = *v;
                            }
                        }
                    }
                });
            }
        }
        SampledSymbol {
            grid: self.grid.clone(),
            values,
        }
    }

    /// One-dimensional symbols as a 2-D field file: axis 0 is x, axis 1 is ξ.
    pub fn write(&self, path: &Path) -> Result<()> {
        if self.dim() != 1 {
            return Err(Error::InvalidConfig("only d = 1 symbols can be written".into()));
        }
        let xi = &self.grid.xi;
        let (nx, h, o) = match &self.grid.x {
            Some(g) => (g.shape[0], g.spacing[0], g.origin[0]),
            None => (1, xi.spacing[0], xi.origin[0]),
        };
        let grid = Grid::new(
            vec![nx, xi.shape[0]],
            vec![h, xi.dxi(0)],
            vec![o, xi.freq(0, 0)],
        )?;
        write_field(path, &SampledField::new(grid, self.values.clone())?)
    }

    pub fn read(path: &Path) -> Result<SampledSymbol> {
        let f = read_field(path)?;
        let g = &f.grid;
        if g.dim() != 2 {
            return Err(Error::MalformedSymbol("array symbol files have shape [N_x, N_ξ]".into()));
        }
        let n = g.shape[1];
        let dxi = g.spacing[1];
        let expected = -((n / 2) as f64) * dxi;
        if (g.origin[1] - expected).abs() > 1e-9 * dxi {
            return Err(Error::MalformedSymbol(format!(
                "ξ axis must start at −(N/2)Δξ = {expected}, got {}",
                g.origin[1]
            )));
        }
        let h = 2.0 * std::f64::consts::PI / (n as f64 * dxi);
        let x = (g.shape[0] > 1).then(|| Grid::new(vec![g.shape[0]], vec![g.spacing[0]], vec![g.origin[0]]));
        let x = x.transpose()?;
        let origin = x.as_ref().map_or(-((n / 2) as f64) * h, |xg| xg.origin[0]);
        let xi = Grid::new(vec![n], vec![h], vec![origin])?;
        SampledSymbol::new(SymbolGrid { xi, x }, f.values)
    }
}

/// First derivative with the widest centred stencil that fits.
fn fd_first(f: &[Complex64], h: f64, out: &mut [Complex64]) {
    let n = f.len();
    for i in 0..n {
        let room = i.min(n - 1 - i);
        out[i] = match room {
            r if r >= 3 => {
                (-f[i - 3] + f[i - 2] * 9.0 - f[i - 1] * 45.0 + f[i + 1] * 45.0 - f[i + 2] * 9.0 + f[i + 3])
                    / (60.0 * h)
            }
            2 => (f[i - 2] - f[i - 1] * 8.0 + f[i + 1] * 8.0 - f[i + 2]) / (12.0 * h),
            1 => (f[i + 1] - f[i - 1]) / (2.0 * h),
            _ if n < 2 => Complex64::new(0.0, 0.0),
            _ if i == 0 => (f[1] - f[0]) / h,
            _ => (f[n - 1] - f[n - 2]) / h,
        };
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spectral_x_derivative_of_a_trig_symbol() {
        let g = Grid::centered(1, 32, 0.25);
        let k = 3.0 * g.dxi(0);
        let sg = SymbolGrid::for_field(&g, true);
        let a = SampledSymbol::from_fn(sg.clone(), |x, xi| Complex64::new((k * x[0]).sin() * xi[0], 0.0));
        let da = a.deriv_x(&[2]);
        let exact = SampledSymbol::from_fn(sg, |x, xi| Complex64::new(-k * k * (k * x[0]).sin() * xi[0], 0.0));
        for (u, v) in da.values.iter().zip(&exact.values) {
            assert!((u - v).norm() < 1e-9 * (1.0 + v.norm()));
        }
    }

    #[test]
    fn finite_differences_are_exact_on_low_degree_polynomials() {
        let g = Grid::centered(2, 16, 0.5);
        let sg = SymbolGrid::frequencies_only(&g);
        let a = SampledSymbol::from_fn(sg.clone(), |_, xi| Complex64::new(xi[0].powi(3) + xi[0] * xi[1] * xi[1], 0.0));
        let d = a.deriv_xi(&[1, 1]);
        // interior points only: the edges fall back to low order
        for (i, v) in d.values.iter().enumerate() {
            let idx = g.unravel(i);
            if idx.iter().all(|&m| (3..13).contains(&m)) {
                let xi = g.freq_point(i);
                assert!((v.re - 2.0 * xi[1]).abs() < 1e-9, "{i}");
            }
        }
    }

    #[test]
    fn file_round_trip_and_lookup() {
        let g = Grid::centered(1, 8, 0.5);
        let sg = SymbolGrid::for_field(&g, true);
        let a = SampledSymbol::from_fn(sg, |x, xi| Complex64::new(x[0], xi[0]));
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.json");
        a.write(&p).unwrap();
        let b = SampledSymbol::read(&p).unwrap();
        assert!(b.grid.accepts(&a.grid) && a.grid.accepts(&b.grid));
        assert_eq!(a.values, b.values);
        let x = g.coord(0, 3);
        let xi = g.freq(0, 5);
        assert_eq!(b.lookup(&[x], &[xi]).unwrap(), Complex64::new(x, xi));
        assert!(b.lookup(&[x + 0.1], &[xi]).is_err());
    }

    #[test]
    fn broadcasting_x_independent_samples() {
        let g = Grid::centered(1, 8, 0.5);
        let a = SymbolSpec::multiplier(1, 2.0);
        let s = SampledSymbol::sample(&a, &SymbolGrid::for_field(&g, true)).unwrap();
        assert_eq!(s.values.len(), 64);
        assert_eq!(s.at(5, 2), s.at(0, 2));
        assert!(s.deriv_x(&[1]).max_abs() < 1e-12 * s.max_abs());
    }
}
