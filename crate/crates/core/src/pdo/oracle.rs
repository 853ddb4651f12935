//! Dense kernel of Op_t(a) by direct quadrature, for tiny grids.

use crate::error::{Error, Result};
use crate::fields::{Grid, SampledField};
use crate::symcalc::SymbolSpec;
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;

/// Largest grid extent per axis accepted by the oracle.
pub const ORACLE_MAX_N: usize = 16;

/// K(x_j, y_l) on a grid; the operator is (Kf)(x_j) = h^d Σ_l K(x_j, y_l) f(y_l).
#[derive(Clone, Debug)]
pub struct KernelMatrix {
    pub grid: Grid,
    pub t: f64,
    /// Row-major, `entries[j * n + l]`.
    pub entries: Vec<Complex64>,
}

impl KernelMatrix {
    pub fn size(&self) -> usize {
        self.grid.len()
    }

    pub fn entry(&self, j: usize, l: usize) -> Complex64 {
        self.entries[j * self.size() + l]
    }

    pub fn apply(&self, f: &SampledField) -> Result<SampledField> {
        if !f.grid.same_as(&self.grid) {
            return Err(Error::IncompatibleGrid("field and kernel grids differ".into()));
        }
        let n = self.size();
        let hd = self.grid.cell_volume();
        let values = (0..n)
            .map(|j| {
                let row = &self.entries[j * n..(j + 1) * n];
                row.iter().zip(&f.values).map(|(k, v)| k * v).sum::<Complex64>() * hd
            })
            .collect();
        SampledField::new(self.grid.clone(), values)
    }
}

/// K_{t,a}(x, y) = (2π)^{−d} Δξ^d Σ_n a((1−t)x + ty, ξ_n) e^{i⟨x−y, ξ_n⟩}.
pub fn kernel_oracle(a: &SymbolSpec, t: f64, grid: &Grid) -> Result<KernelMatrix> {
    if grid.shape.iter().any(|&n| n > ORACLE_MAX_N) {
        return Err(Error::GridTooLarge(format!(
            "kernel oracle is limited to N ≤ {ORACLE_MAX_N} per axis"
        )));
    }
    if a.dim() != grid.dim() {
        return Err(Error::IncompatibleGrid("symbol and grid dimensions differ".into()));
    }
    let d = grid.dim();
    let n = grid.len();
    let c = (2.0 * PI).powi(-(d as i32)) * grid.dxi_volume();
    let freqs: Vec<Vec<f64>> = (0..n).map(|k| grid.freq_point(k)).collect();
    let entries: Result<Vec<Vec<Complex64>>> = (0..n)
        .into_par_iter()
        .map(|j| {
            let x = grid.point(j);
            (0..n)
                .map(|l| {
                    let y = grid.point(l);
                    let z: Vec<f64> = x.iter().zip(&y).map(|(p, q)| (1.0 - t) * p + t * q).collect();
                    let mut acc = Complex64::new(0.0, 0.0);
                    for xi in &freqs {
                        let phase: f64 = x.iter().zip(&y).zip(xi).map(|((p, q), k)| (p - q) * k).sum();
                        acc += a.eval(&z, xi)? * Complex64::from_polar(1.0, phase);
                    }
                    Ok(acc * c)
                })
                .collect()
        })
        .collect();
    Ok(KernelMatrix {
        grid: grid.clone(),
        t,
        entries: entries?.concat(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_symbol_gives_the_identity() {
        let g = Grid::centered(1, 16, 0.5);
        let k = kernel_oracle(&SymbolSpec::multiplier(1, 0.0), 0.0, &g).unwrap();
        for j in 0..16 {
            for l in 0..16 {
                let want = if j == l { 1.0 / 0.5 } else { 0.0 };
                assert!((k.entry(j, l) - Complex64::new(want, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn position_multiplier_is_diagonal_for_every_t() {
        let g = Grid::centered(1, 12, 0.5);
        let a = SymbolSpec::xmultiplier(1, "2 + cos(x1)").unwrap();
        for t in [0.0, 0.5, 1.0] {
            let k = kernel_oracle(&a, t, &g).unwrap();
            for j in 0..12 {
                let x = g.coord(0, j);
                assert!((k.entry(j, j) * 0.5 - Complex64::new(2.0 + x.cos(), 0.0)).norm() < 1e-12);
            }
            assert!(k.entry(3, 5).norm() < 1e-12);
        }
    }

    #[test]
    fn oversized_grids_are_refused() {
        let g = Grid::centered(1, 32, 0.5);
        assert!(matches!(
            kernel_oracle(&SymbolSpec::multiplier(1, 0.0), 0.0, &g),
            Err(Error::GridTooLarge(_))
        ));
    }
}
