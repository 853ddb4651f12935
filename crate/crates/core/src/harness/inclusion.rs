//! Set inclusion between wave-front estimates with a dilation tolerance.

use crate::coneharm::ConePartition;
use crate::error::{Error, Result};
use crate::symcalc::CharSetEstimate;
use crate::wavefront::WavefrontEstimate;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

/// Dilation applied to B ∪ C: `sectors` angular steps and `cells` steps
/// of the centre lattice. Opposite half-lines in d = 1 are never merged.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tolerance {
    pub sectors: usize,
    pub cells: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { sectors: 1, cells: 1 }
    }
}

impl Tolerance {
    pub const EXACT: Tolerance = Tolerance { sectors: 0, cells: 0 };
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub center: usize,
    pub x: Vec<f64>,
    pub sector: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InclusionReport {
    pub case: String,
    pub centers: Vec<Vec<f64>>,
    pub a: Vec<(usize, usize)>,
    pub b: Vec<(usize, usize)>,
    pub c: Vec<(usize, usize)>,
    pub violations: Vec<Violation>,
    pub tolerance: Tolerance,
    pub pass: bool,
}

fn same_centers(p: &[Vec<f64>], q: &[Vec<f64>]) -> bool {
    p.len() == q.len()
        && p.iter()
            .zip(q)
            .all(|(u, v)| u.len() == v.len() && u.iter().zip(v).all(|(a, b)| (a - b).abs() <= 1e-9))
}

/// Smallest positive coordinate difference per axis; infinite when an axis
/// holds a single value.
fn lattice_steps(centers: &[Vec<f64>]) -> Vec<f64> {
    let d = centers.first().map_or(0, |c| c.len());
    (0..d)
        .map(|a| {
            let mut vals: Vec<f64> = centers.iter().map(|c| c[a]).collect();
            vals.sort_by(f64::total_cmp);
            vals.windows(2)
                .map(|w| w[1] - w[0])
                .filter(|&s| s > 1e-9)
                .fold(f64::INFINITY, f64::min)
        })
        .collect()
}

fn cell_distance(p: &[f64], q: &[f64], steps: &[f64]) -> usize {
    p.iter()
        .zip(q)
        .zip(steps)
        .map(|((a, b), s)| {
            let d = (a - b).abs();
            if d <= 1e-9 {
                0
            } else if s.is_infinite() {
                usize::MAX
            } else {
                (d / s).round() as usize
            }
        })
        .max()
        .unwrap_or(0)
}

fn check_geometry(
    centers: &[Vec<f64>],
    part: &ConePartition,
    other_centers: &[Vec<f64>],
    other_part: &ConePartition,
    what: &str,
) -> Result<()> {
    if !same_centers(centers, other_centers) {
        return Err(Error::IncompatibleGrid(format!("{what} uses different detector centres")));
    }
    if part != other_part {
        return Err(Error::IncompatibleGrid(format!("{what} uses a different cone partition")));
    }
    Ok(())
}

/// Checks A ⊆ B ∪ C after dilating B ∪ C by `tol`.
pub fn check_inclusion(
    case: &str,
    a: &WavefrontEstimate,
    b: &WavefrontEstimate,
    c: Option<&CharSetEstimate>,
    tol: Tolerance,
) -> Result<InclusionReport> {
    let part = &a.detector.partition;
    check_geometry(&a.centers, part, &b.centers, &b.detector.partition, "B")?;
    let c_set = match c {
        Some(ch) => {
            check_geometry(&a.centers, part, &ch.centers, &ch.partition, "C")?;
            ch.characteristic()
        }
        None => BTreeSet::new(),
    };
    let (a_set, b_set) = (a.singular(), b.singular());
    let cover: BTreeSet<(usize, usize)> = b_set.union(&c_set).copied().collect();
    let steps = lattice_steps(&a.centers);
    let violations = a_set
        .iter()
        .filter(|&&(ci, j)| {
            !cover.iter().any(|&(cj, k)| {
                part.sector_distance(j, k) <= tol.sectors
                    && cell_distance(&a.centers[ci], &a.centers[cj], &steps) <= tol.cells
            })
        })
        .map(|&(ci, j)| Violation {
            center: ci,
            x: a.centers[ci].clone(),
            sector: j,
        })
        .collect::<Vec<_>>();
    Ok(InclusionReport {
        case: case.to_string(),
        centers: a.centers.clone(),
        a: a_set.into_iter().collect(),
        b: b_set.into_iter().collect(),
        c: c_set.into_iter().collect(),
        pass: violations.is_empty(),
        violations,
        tolerance: tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wavefront::{DetectorSummary, WfEntry};
    use proptest::prelude::*;

    fn estimate(d: usize, flags: &[(usize, usize)]) -> WavefrontEstimate {
        let part = if d == 1 {
            ConePartition::half_lines()
        } else {
            ConePartition::new(2, 8, 1.2).unwrap()
        };
        let centers: Vec<Vec<f64>> = (0..5).map(|i| vec![4.0 * i as f64 - 8.0; d]).collect();
        let entries = (0..centers.len())
            .flat_map(|c| (0..part.n_sectors).map(move |j| (c, j)))
            .map(|(c, j)| WfEntry {
                center: c,
                x: centers[c].clone(),
                sector: j,
                slope: None,
                slopes: vec![None],
                in_wf: flags.contains(&(c, j)),
            })
            .collect();
        let cfg = crate::wavefront::DetectorConfig::new(d, 4.0);
        WavefrontEstimate {
            detector: DetectorSummary {
                window: cfg.window.clone(),
                radius_scales: cfg.radius_scales.clone(),
                partition: part,
                flavor: crate::coneharm::Flavor::Fl,
                members: vec![],
                p: cfg.p,
                combine: "single".into(),
                fit_width: 4,
                tau: 0.1,
                tau_inf: 0.05,
            },
            centers,
            entries,
        }
    }

    #[test]
    fn trivial_cases() {
        let empty = estimate(2, &[]);
        let b = estimate(2, &[(1, 2)]);
        assert!(check_inclusion("t", &empty, &b, None, Tolerance::default()).unwrap().pass);
        assert!(check_inclusion("t", &b, &b, None, Tolerance::EXACT).unwrap().pass);
        let a = estimate(2, &[(0, 3)]);
        let r = check_inclusion("t", &a, &empty, None, Tolerance::default()).unwrap();
        assert!(!r.pass);
        assert_eq!(r.violations.len(), 1);
        assert_eq!((r.violations[0].center, r.violations[0].sector), (0, 3));
    }

    #[test]
    fn dilation_by_sectors_and_cells() {
        let b = estimate(2, &[(2, 2)]);
        let near = estimate(2, &[(1, 3), (3, 1), (2, 2)]);
        assert!(check_inclusion("t", &near, &b, None, Tolerance::default()).unwrap().pass);
        assert!(!check_inclusion("t", &near, &b, None, Tolerance::EXACT).unwrap().pass);
        let far = estimate(2, &[(0, 2)]);
        assert!(!check_inclusion("t", &far, &b, None, Tolerance::default()).unwrap().pass);
        let wrap = estimate(2, &[(2, 7)]);
        let b0 = estimate(2, &[(2, 0)]);
        assert!(check_inclusion("t", &wrap, &b0, None, Tolerance::default()).unwrap().pass);
    }

    #[test]
    fn half_lines_are_not_neighbours() {
        let a = estimate(1, &[(2, 1)]);
        let b = estimate(1, &[(2, 0)]);
        assert!(!check_inclusion("t", &a, &b, None, Tolerance { sectors: 5, cells: 5 }).unwrap().pass);
    }

    #[test]
    fn geometry_mismatch_is_an_error() {
        let a = estimate(2, &[]);
        let mut b = estimate(2, &[]);
        b.centers[0][0] += 1.0;
        assert!(check_inclusion("t", &a, &b, None, Tolerance::default()).is_err());
        let mut c = estimate(2, &[]);
        c.detector.partition = ConePartition::new(2, 16, 1.2).unwrap();
        assert!(check_inclusion("t", &a, &c, None, Tolerance::default()).is_err());
    }

    proptest! {
        #[test]
        fn monotone_in_tolerance(
            fa in proptest::collection::vec((0usize..5, 0usize..8), 0..6),
            fb in proptest::collection::vec((0usize..5, 0usize..8), 0..6),
            s in 0usize..4, c in 0usize..4,
        ) {
            let (a, b) = (estimate(2, &fa), estimate(2, &fb));
            let t = Tolerance { sectors: s, cells: c };
            let r = check_inclusion("p", &a, &b, None, t).unwrap();
            prop_assert_eq!(r.pass, r.violations.is_empty());
            if r.pass {
                for t2 in [Tolerance { sectors: s + 1, cells: c }, Tolerance { sectors: s, cells: c + 1 }] {
                    prop_assert!(check_inclusion("p", &a, &b, None, t2).unwrap().pass);
                }
            }
        }
    }
}
