//! Symbol class membership and ellipticity.

use super::symbol::SymbolSpec;
use crate::error::{Error, Result};
use crate::weights::{class_sweep, ClassGrid, ClassReport, WeightSpec};
use std::f64::consts::PI;

/// Evidence that a ∈ S^{(ω₀)}_{ρ,δ} for the declared weight and orders.
pub fn check_symbol_class(a: &SymbolSpec, max_order: usize, grid: &ClassGrid) -> Result<ClassReport> {
    let w = a
        .weight
        .as_ref()
        .ok_or_else(|| Error::MalformedSymbol(format!("symbol {} declares no weight", a.label())))?;
    check_symbol_class_with(a, w, a.rho, a.delta, max_order, grid)
}

pub fn check_symbol_class_with(
    a: &SymbolSpec,
    w: &WeightSpec,
    rho: f64,
    delta: f64,
    max_order: usize,
    grid: &ClassGrid,
) -> Result<ClassReport> {
    let d = a.dim();
    if w.dim() != d {
        return Err(Error::IncompatibleGrid("weight and symbol dimensions differ".into()));
    }
    class_sweep(
        d,
        |p| a.eval(&p[..d], &p[d..]),
        |p| w.eval(&p[..d], &p[d..]),
        rho,
        delta,
        max_order,
        grid,
    )
}

/// Geometric radii from `r_low` to `r_high`, both included.
pub(crate) fn probe_radii(r_low: f64, r_high: f64, n: usize) -> Vec<f64> {
    if n < 2 || r_high <= r_low {
        return vec![r_low];
    }
    let q = (r_high / r_low).ln() / (n - 1) as f64;
    (0..n).map(|i| r_low * (q * i as f64).exp()).collect()
}

/// Unit directions: ±1 in d = 1, `n` equally spaced angles from 0 in d = 2.
pub(crate) fn probe_directions(d: usize, n: usize) -> Vec<Vec<f64>> {
    if d == 1 {
        return vec![vec![1.0], vec![-1.0]];
    }
    (0..n)
        .map(|i| {
            let t = 2.0 * PI * i as f64 / n as f64;
            vec![t.cos(), t.sin()]
        })
        .collect()
}

/// min |a| / ω over the probe points.
pub(crate) fn probe_min(
    a: &SymbolSpec,
    w: &WeightSpec,
    xs: &[Vec<f64>],
    dirs: &[Vec<f64>],
    radii: &[f64],
) -> Result<(f64, Vec<f64>)> {
    let mut min = f64::INFINITY;
    let mut all = Vec::with_capacity(xs.len() * dirs.len() * radii.len());
    for x in xs {
        for e in dirs {
            for &r in radii {
                let xi: Vec<f64> = e.iter().map(|c| c * r).collect();
                let v = a.eval(x, &xi)?.norm() / w.eval(x, &xi)?;
                min = min.min(v);
                all.push(v);
            }
        }
    }
    Ok((min, all))
}

/// inf |a(x, ξ)| / ω₀(x, ξ) over x in `x_points` and R ≤ |ξ| ≤ `xi_max`,
/// probed on 32 geometric radii and 64 directions (both signs in d = 1).
pub fn ellipticity_margin(
    a: &SymbolSpec,
    w: &WeightSpec,
    x_points: &[Vec<f64>],
    r_low: f64,
    xi_max: f64,
) -> Result<f64> {
    if !(r_low > 0.0 && xi_max >= r_low) {
        return Err(Error::InvalidConfig(format!(
            "need 0 < R ≤ ξ_max, got R = {r_low}, ξ_max = {xi_max}"
        )));
    }
    let xs: Vec<Vec<f64>> = if a.is_x_independent() && w.is_x_independent() {
        vec![vec![0.0; a.dim()]]
    } else {
        x_points.to_vec()
    };
    let (m, _) = probe_min(
        a,
        w,
        &xs,
        &probe_directions(a.dim(), 64),
        &probe_radii(r_low, xi_max, 32),
    )?;
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn heat_weight() -> WeightSpec {
        WeightSpec::heat()
    }

    #[test]
    fn multiplier_is_in_its_class() {
        let a = SymbolSpec::multiplier(1, 2.0).with_weight(WeightSpec::japanese_bracket(1, 2.0));
        let r = check_symbol_class(&a, 2, &ClassGrid::default_for(1)).unwrap();
        assert!(r.passes());
        // but not in S^0
        let r0 = check_symbol_class_with(&a, &WeightSpec::one(1), 1.0, 0.0, 0, &ClassGrid::default_for(1)).unwrap();
        assert!(!r0.passes());
    }

    #[test]
    fn heat_symbol_is_half_class_for_the_heat_weight() {
        let a = SymbolSpec::heat().with_weight(heat_weight()).with_orders(0.5, 0.0);
        let r = check_symbol_class(&a, 2, &ClassGrid::default_for(2)).unwrap();
        assert!(r.passes(), "{:?}", r.entries.iter().filter(|e| !e.bounded).collect::<Vec<_>>());
        // not in the classical ρ = 1 class
        let r1 = check_symbol_class_with(&a, &heat_weight(), 1.0, 0.0, 2, &ClassGrid::default_for(2)).unwrap();
        assert!(!r1.passes());
    }

    #[test]
    fn directional_symbol_is_classical() {
        let a = SymbolSpec::directional(1.0, 0.0, PI / 8.0, Some(PI / 2.0))
            .unwrap()
            .with_weight(WeightSpec::japanese_bracket(2, 1.0));
        let r = check_symbol_class(&a, 2, &ClassGrid::default_for(2)).unwrap();
        assert!(r.passes(), "{:?}", r.entries.iter().filter(|e| !e.bounded).collect::<Vec<_>>());
    }

    #[test]
    fn heat_margins() {
        let a = SymbolSpec::heat();
        let m = ellipticity_margin(&a, &heat_weight(), &[vec![0.0, 0.0]], 200.0, 2000.0).unwrap();
        assert!(m >= 0.70, "{m}");
        let classical = ellipticity_margin(&a, &WeightSpec::japanese_bracket(2, 2.0), &[vec![0.0, 0.0]], 4.0, 57.6).unwrap();
        assert!(classical <= 0.05, "{classical}");
        assert!(ellipticity_margin(&a, &heat_weight(), &[], 0.0, 1.0).is_err());
    }
}
