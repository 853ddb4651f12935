//! Truncated composition (a # b)_N = Σ_{|α|≤N} (−i)^{|α|}/α! ∂_ξ^α a ∂_x^α b.

use super::sampled::{SampledSymbol, SymbolGrid};
use super::symbol::SymbolSpec;
use crate::error::{Error, Result};
use crate::jet::factorial;
use crate::numerics::multi_indices;
use num_complex::Complex64;
use rayon::prelude::*;

/// Largest truncation order supported.
pub const MAX_ORDER: usize = 4;

/// Sample budget for one composition.
const MAX_SAMPLES: usize = 1 << 22;

#[derive(Clone, Copy)]
enum Var {
    X,
    Xi,
}

/// All ∂^α a with |α| ≤ order, sampled on `grid`, in `multi_indices` order.
fn derivatives(a: &SymbolSpec, grid: &SymbolGrid, order: usize, var: Var) -> Result<Vec<SampledSymbol>> {
    let alphas = multi_indices(a.dim(), order);
    if let Some(arr) = a.as_array() {
        let base = arr.broadcast_to(grid)?;
        return Ok(alphas
            .iter()
            .map(|al| match var {
                Var::X => base.deriv_x(al),
                Var::Xi => base.deriv_xi(al),
            })
            .collect());
    }
    if a.is_x_independent() && grid.x.is_some() {
        let own = SymbolGrid::frequencies_only(&grid.xi);
        return derivatives(a, &own, order, var)?
            .into_iter()
            .enumerate()
            .map(|(i, s)| match var {
                Var::X if i > 0 => s.map(|_| Complex64::new(0.0, 0.0)).broadcast_to(grid),
                _ => s.broadcast_to(grid),
            })
            .collect();
    }
    let n_xi = grid.n_xi();
    let exps: Vec<Vec<u8>> = alphas.iter().map(|al| al.iter().map(|&v| v as u8).collect()).collect();
    let rows: Result<Vec<Vec<Complex64>>> = (0..grid.n_x() * n_xi)
        .into_par_iter()
        .map(|i| {
            let x = grid.x_point(i / n_xi);
            let xi = grid.xi.freq_point(i % n_xi);
            let jet = match var {
                Var::X => a.x_jet(&x, &xi, order),
                Var::Xi => a.xi_jet(&x, &xi, order),
            }
            .expect("closed-form symbol");
            let out: Vec<Complex64> = exps.iter().map(|e| jet.derivative(e)).collect();
            if out.iter().all(|v| v.re.is_finite() && v.im.is_finite()) {
                Ok(out)
            } else {
                Err(Error::Domain(format!("symbol {} is not smooth at x = {x:?}, ξ = {xi:?}", a.label())))
            }
        })
        .collect();
    let rows = rows?;
    Ok((0..alphas.len())
        .map(|j| SampledSymbol {
            grid: grid.clone(),
            values: rows.iter().map(|r| r[j]).collect(),
        })
        .collect())
}

/// Grid for the product: keeps x only if some factor depends on x.
fn product_grid(a: &SymbolSpec, b: &SymbolSpec, grid: &SymbolGrid) -> Result<SymbolGrid> {
    let x_dep = !a.is_x_independent() || !b.is_x_independent();
    match (&grid.x, x_dep) {
        (None, true) => Err(Error::IncompatibleGrid(
            "x-dependent symbols need a grid with an x axis".into(),
        )),
        (_, false) => Ok(SymbolGrid::frequencies_only(&grid.xi)),
        (Some(_), true) => Ok(grid.clone()),
    }
}

/// (a # b)_N sampled on `grid`.
pub fn compose_symbols(a: &SymbolSpec, b: &SymbolSpec, n: usize, grid: &SymbolGrid) -> Result<SampledSymbol> {
    if n > MAX_ORDER {
        return Err(Error::InvalidConfig(format!(
            "truncation order {n} exceeds {MAX_ORDER}"
        )));
    }
    if a.dim() != b.dim() || a.dim() != grid.dim() {
        return Err(Error::IncompatibleGrid("symbol dimensions differ".into()));
    }
    if grid.xi.shape.iter().any(|&m| m < 8) {
        return Err(Error::InsufficientResolution {
            usable: grid.xi.shape.iter().copied().min().unwrap_or(0),
            required: 8,
        });
    }
    let g = product_grid(a, b, grid)?;
    if g.n_x() * g.n_xi() > MAX_SAMPLES {
        return Err(Error::GridTooLarge(format!(
            "composition needs {} samples, limit {MAX_SAMPLES}",
            g.n_x() * g.n_xi()
        )));
    }
    // derivatives in x of an x-independent factor vanish
    let order = if b.is_x_independent() { 0 } else { n };
    let da = derivatives(a, &g, order, Var::Xi)?;
    let db = derivatives(b, &g, order, Var::X)?;
    let alphas = multi_indices(a.dim(), order);
    let mut values = vec![Complex64::new(0.0, 0.0); g.n_x() * g.n_xi()];
    for ((al, u), v) in alphas.iter().zip(&da).zip(&db) {
        let k: usize = al.iter().sum();
        let fact: f64 = al.iter().map(|&m| factorial(m)).product();
        let c = Complex64::new(0.0, -1.0).powu(k as u32) / fact;
        values
            .par_iter_mut()
            .zip(u.values.par_iter().zip(&v.values))
            .for_each(|(out, (p, q))| *out += c * p * q);
    }
    SampledSymbol::new(g, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::Grid;

    #[test]
    fn x_independent_factors_multiply() {
        let g = Grid::centered(2, 16, 0.5);
        let sg = SymbolGrid::frequencies_only(&g);
        let a = SymbolSpec::multiplier(2, 2.0);
        let b = SymbolSpec::multiplier(2, -2.0);
        let c = compose_symbols(&a, &b, 3, &sg).unwrap();
        assert!(c.grid.x.is_none());
        for v in &c.values {
            assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-13);
        }
    }

    #[test]
    fn xi_times_x_picks_up_the_first_order_term() {
        // ξ # x = ξx − i exactly
        let g = Grid::centered(1, 16, 0.5);
        let sg = SymbolGrid::for_field(&g, true);
        let a = SymbolSpec::expr(1, "xi1").unwrap();
        let b = SymbolSpec::expr(1, "x1").unwrap();
        let c = compose_symbols(&a, &b, 2, &sg).unwrap();
        for ix in 0..16 {
            for k in 0..16 {
                let x = g.coord(0, ix);
                let xi = g.freq(0, k);
                assert!((c.at(ix, k) - Complex64::new(x * xi, -1.0)).norm() < 1e-12);
            }
        }
        let d = compose_symbols(&b, &a, 2, &sg).unwrap();
        assert!((d.at(3, 4) - Complex64::new(g.coord(0, 3) * g.freq(0, 4), 0.0)).norm() < 1e-12);
    }

    #[test]
    fn array_operands_match_closed_forms() {
        let g = Grid::centered(1, 64, 0.25);
        let sg = SymbolGrid::for_field(&g, true);
        let a = SymbolSpec::multiplier(1, 2.0);
        let k = 2.0 * g.dxi(0);
        let b = SymbolSpec::modulated(1, -2.0, 0.5, vec![k]).unwrap();
        let exact = compose_symbols(&a, &b, 2, &sg).unwrap();
        let a_arr = SymbolSpec::array(SampledSymbol::sample(&a, &SymbolGrid::frequencies_only(&g)).unwrap());
        let b_arr = SymbolSpec::array(SampledSymbol::sample(&b, &sg).unwrap());
        let approx = compose_symbols(&a_arr, &b_arr, 2, &sg).unwrap();
        let n = 64;
        for ix in 0..n {
            for kk in 4..n - 4 {
                let (u, v) = (approx.at(ix, kk), exact.at(ix, kk));
                assert!((u - v).norm() < 1e-4 * v.norm().max(1.0), "{ix} {kk}: {u} vs {v}");
            }
        }
    }

    #[test]
    fn order_and_grid_checks() {
        let g = Grid::centered(1, 16, 0.5);
        let a = SymbolSpec::expr(1, "x1*xi1").unwrap();
        assert!(compose_symbols(&a, &a, 5, &SymbolGrid::for_field(&g, true)).is_err());
        assert!(compose_symbols(&a, &a, 2, &SymbolGrid::frequencies_only(&g)).is_err());
    }
}
