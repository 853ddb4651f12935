//! Weight functions ω(x, ξ) and lattice evidence for moderateness and
//! symbol-type regularity.

use crate::error::{Error, Result};
use crate::expr::{Dialect, Expr};
use crate::numerics::{binom, bracket, log2_floor, ls_slope, multi_indices};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PresetName {
    JapaneseBracket,
    Hypoelliptic,
    Heat,
    Constant,
}

/// Serialized form of a weight.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightDef {
    Preset {
        name: PresetName,
        d: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        s: Option<f64>,
        /// Polynomial `a(ξ)` for the hypoelliptic preset, symbol dialect.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        poly: Option<String>,
    },
    Product {
        d: usize,
        factors: Vec<WeightDef>,
    },
    Expr {
        d: usize,
        expr: String,
    },
}

#[derive(Clone, Debug)]
enum Compiled {
    Bracket(f64),
    Hypo(Expr),
    Heat,
    Constant(f64),
    Product(Vec<WeightSpec>),
    Expr(Expr),
}

/// A parsed, immutable weight.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "WeightDef", into = "WeightDef")]
pub struct WeightSpec {
    def: WeightDef,
    d: usize,
    compiled: Compiled,
}

impl PartialEq for WeightSpec {
    fn eq(&self, other: &Self) -> bool {
        self.def == other.def
    }
}

impl From<WeightSpec> for WeightDef {
    fn from(w: WeightSpec) -> WeightDef {
        w.def
    }
}

impl TryFrom<WeightDef> for WeightSpec {
    type Error = Error;

    fn try_from(def: WeightDef) -> Result<WeightSpec> {
        let (d, compiled) = match &def {
            WeightDef::Preset { name, d, s, poly } => {
                let c = match name {
                    PresetName::JapaneseBracket => Compiled::Bracket(s.unwrap_or(1.0)),
                    PresetName::Constant => {
                        let c = s.unwrap_or(1.0);
                        if !(c > 0.0 && c.is_finite()) {
                            return Err(Error::MalformedWeight(format!("constant weight must be positive, got {c}")));
                        }
                        Compiled::Constant(c)
                    }
                    PresetName::Heat => {
                        if *d != 2 {
                            return Err(Error::MalformedWeight("heat weight needs d = 2 (variables ξ, τ)".into()));
                        }
                        Compiled::Heat
                    }
                    PresetName::Hypoelliptic => {
                        let src = poly
                            .as_deref()
                            .ok_or_else(|| Error::MalformedWeight("hypoelliptic weight needs 'poly'".into()))?;
                        let e = Expr::parse(src, *d, Dialect::Symbol)?;
                        if (0..*d).any(|v| e.uses_var(v)) {
                            return Err(Error::MalformedWeight("hypoelliptic polynomial must depend on ξ only".into()));
                        }
                        Compiled::Hypo(e)
                    }
                };
                (*d, c)
            }
            WeightDef::Product { d, factors } => {
                let fs = factors
                    .iter()
                    .cloned()
                    .map(WeightSpec::try_from)
                    .collect::<Result<Vec<_>>>()?;
                if fs.iter().any(|f| f.d != *d) {
                    return Err(Error::MalformedWeight("product factors must share dimension".into()));
                }
                (*d, Compiled::Product(fs))
            }
            WeightDef::Expr { d, expr } => (*d, Compiled::Expr(Expr::parse(expr, *d, Dialect::Weight)?)),
        };
        if !(1..=2).contains(&d) {
            return Err(Error::MalformedWeight(format!("dimension {d} not supported")));
        }
        Ok(WeightSpec { def, d, compiled })
    }
}

impl WeightSpec {
    pub fn japanese_bracket(d: usize, s: f64) -> WeightSpec {
        WeightDef::Preset {
            name: PresetName::JapaneseBracket,
            d,
            s: Some(s),
            poly: None,
        }
        .try_into()
        .expect("bracket preset is always valid")
    }

    pub fn constant(d: usize, c: f64) -> Result<WeightSpec> {
        WeightDef::Preset {
            name: PresetName::Constant,
            d,
            s: Some(c),
            poly: None,
        }
        .try_into()
    }

    pub fn one(d: usize) -> WeightSpec {
        Self::constant(d, 1.0).expect("unit weight is valid")
    }

    /// `1 + |ξ|² + |τ|` in the variables `(ξ, τ)`.
    pub fn heat() -> WeightSpec {
        WeightDef::Preset {
            name: PresetName::Heat,
            d: 2,
            s: None,
            poly: None,
        }
        .try_into()
        .expect("heat preset is always valid")
    }

    pub fn hypoelliptic(d: usize, poly: &str) -> Result<WeightSpec> {
        WeightDef::Preset {
            name: PresetName::Hypoelliptic,
            d,
            s: None,
            poly: Some(poly.to_string()),
        }
        .try_into()
    }

    pub fn expr(d: usize, src: &str) -> Result<WeightSpec> {
        WeightDef::Expr {
            d,
            expr: src.to_string(),
        }
        .try_into()
    }

    pub fn product(factors: &[WeightSpec]) -> Result<WeightSpec> {
        let d = factors
            .first()
            .map(|f| f.d)
            .ok_or_else(|| Error::MalformedWeight("empty product".into()))?;
        WeightDef::Product {
            d,
            factors: factors.iter().map(|f| f.def.clone()).collect(),
        }
        .try_into()
    }

    pub fn from_json(src: &str) -> Result<WeightSpec> {
        let def: WeightDef = serde_json::from_str(src)?;
        def.try_into()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.def).expect("weight definitions always serialize")
    }

    pub fn def(&self) -> &WeightDef {
        &self.def
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// Short label for reports.
    pub fn id(&self) -> String {
        match &self.compiled {
            Compiled::Bracket(s) => format!("bracket({s})"),
            Compiled::Constant(c) => format!("constant({c})"),
            Compiled::Heat => "heat".into(),
            Compiled::Hypo(_) => match &self.def {
                WeightDef::Preset { poly: Some(p), .. } => format!("hypoelliptic({p})"),
                _ => "hypoelliptic".into(),
            },
            Compiled::Product(fs) => fs.iter().map(|f| f.id()).collect::<Vec<_>>().join("*"),
            Compiled::Expr(_) => match &self.def {
                WeightDef::Expr { expr, .. } => format!("expr({expr})"),
                _ => "expr".into(),
            },
        }
    }

    pub fn is_x_independent(&self) -> bool {
        match &self.compiled {
            Compiled::Product(fs) => fs.iter().all(|f| f.is_x_independent()),
            Compiled::Expr(e) => !(0..self.d).any(|v| e.uses_var(v)),
            _ => true,
        }
    }

    fn raw(&self, x: &[f64], xi: &[f64]) -> f64 {
        match &self.compiled {
            Compiled::Bracket(s) => {
                let b2 = 1.0 + xi.iter().map(|t| t * t).sum::<f64>();
                b2.powf(s / 2.0)
            }
            Compiled::Constant(c) => *c,
            Compiled::Heat => 1.0 + xi[0] * xi[0] + xi[1].abs(),
            Compiled::Hypo(e) => 1.0 + e.eval(&vars(x, xi)).norm(),
            Compiled::Product(fs) => fs.iter().map(|f| f.raw(x, xi)).product(),
            Compiled::Expr(e) => {
                let v = e.eval(&vars(x, xi));
                if v.im != 0.0 {
                    f64::NAN
                } else {
                    v.re
                }
            }
        }
    }

    /// ω(x, ξ); fails on nonpositive or non-finite values.
    pub fn eval(&self, x: &[f64], xi: &[f64]) -> Result<f64> {
        if x.len() != self.d || xi.len() != self.d {
            return Err(Error::MalformedWeight(format!(
                "weight has d = {}, got x of length {} and ξ of length {}",
                self.d,
                x.len(),
                xi.len()
            )));
        }
        let v = self.raw(x, xi);
        if v > 0.0 && v.is_finite() {
            Ok(v)
        } else {
            Err(Error::MalformedWeight(format!(
                "{} evaluates to {v} at x = {x:?}, ξ = {xi:?}",
                self.id()
            )))
        }
    }
}

fn vars(x: &[f64], xi: &[f64]) -> Vec<Complex64> {
    x.iter().chain(xi).map(|&t| Complex64::new(t, 0.0)).collect()
}

/// Coordinate values used on every axis of a moderateness lattice.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SampleLattice {
    pub x: Vec<f64>,
    pub xi: Vec<f64>,
}

impl SampleLattice {
    /// Integer lattice `{-n..n}` in ξ, with x fixed at 0.
    pub fn integer_xi(n: i64) -> SampleLattice {
        SampleLattice {
            x: vec![0.0],
            xi: (-n..=n).map(|k| k as f64).collect(),
        }
    }

    fn points(&self, d: usize) -> Vec<Vec<f64>> {
        let mut axes: Vec<&[f64]> = Vec::new();
        for _ in 0..d {
            axes.push(&self.x);
        }
        for _ in 0..d {
            axes.push(&self.xi);
        }
        let mut out = vec![Vec::new()];
        for axis in axes {
            out = out
                .into_iter()
                .flat_map(|p| {
                    axis.iter().map(move |&v| {
                        let mut q = p.clone();
                        q.push(v);
                        q
                    })
                })
                .collect();
        }
        out
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ModerateReport {
    pub estimated_c: f64,
    pub max_violation_ratio: f64,
    pub samples_tested: usize,
}

impl ModerateReport {
    pub fn passes(&self) -> bool {
        self.max_violation_ratio.is_finite() && self.max_violation_ratio <= self.estimated_c
    }
}

/// Observed constant in ω(z + y) ≤ C ω(z) v(y) over all lattice pairs.
pub fn check_moderate(w: &WeightSpec, v: &WeightSpec, lattice: &SampleLattice) -> Result<ModerateReport> {
    if w.d != v.d {
        return Err(Error::MalformedWeight("weights differ in dimension".into()));
    }
    let d = w.d;
    let pts = lattice.points(d);
    let wz: Vec<f64> = pts
        .iter()
        .map(|p| w.eval(&p[..d], &p[d..]))
        .collect::<Result<_>>()?;
    let vy: Vec<f64> = pts
        .iter()
        .map(|p| v.eval(&p[..d], &p[d..]))
        .collect::<Result<_>>()?;
    let ratios: Vec<f64> = pts
        .par_iter()
        .enumerate()
        .map(|(i, z)| {
            let mut best = 0.0f64;
            for (j, y) in pts.iter().enumerate() {
                let s: Vec<f64> = z.iter().zip(y).map(|(a, b)| a + b).collect();
                let r = w.eval(&s[..d], &s[d..])? / (wz[i] * vy[j]);
                if !r.is_finite() {
                    return Err(Error::MalformedWeight("non-finite moderateness ratio".into()));
                }
                best = best.max(r);
            }
            Ok(best)
        })
        .collect::<Result<_>>()?;
    let c = ratios.iter().cloned().fold(0.0, f64::max);
    Ok(ModerateReport {
        estimated_c: c,
        max_violation_ratio: c,
        samples_tested: pts.len() * pts.len(),
    })
}

/// Sample lattice for derivative sweeps: cell-centred points of spacing
/// `xi_spacing` in the ball |ξ| ≤ `xi_extent`, at each listed x point.
///
/// Cell-centred points with stencil steps `spacing / order` keep every
/// stencil inside one cell, so kinks along coordinate planes (such as |τ|
/// in the heat weight) are never straddled.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClassGrid {
    pub x_points: Vec<Vec<f64>>,
    pub x_spacing: f64,
    pub xi_spacing: f64,
    pub xi_extent: f64,
}

impl ClassGrid {
    pub fn default_for(d: usize) -> ClassGrid {
        ClassGrid {
            x_points: vec![vec![0.0; d]],
            x_spacing: 0.5,
            xi_spacing: 1.0,
            xi_extent: 64.0,
        }
    }

    fn xi_points(&self, d: usize) -> Vec<Vec<f64>> {
        let m = (self.xi_extent / self.xi_spacing).ceil() as i64;
        let coords: Vec<f64> = (-m..m)
            .map(|k| (k as f64 + 0.5) * self.xi_spacing)
            .filter(|v| v.abs() <= self.xi_extent)
            .collect();
        let mut out: Vec<Vec<f64>> = vec![Vec::new()];
        for _ in 0..d {
            out = out
                .into_iter()
                .flat_map(|p| {
                    coords.iter().map(move |&v| {
                        let mut q = p.clone();
                        q.push(v);
                        q
                    })
                })
                .collect();
        }
        out.retain(|p| crate::numerics::norm(p) <= self.xi_extent);
        out
    }

    /// Dyadic shells fully inside the ball: k with 2^{k+1} ≤ extent.
    fn n_shells(&self) -> usize {
        let mut k = 0;
        while 2f64.powi(k as i32 + 1) <= self.xi_extent {
            k += 1;
        }
        k
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClassEntry {
    pub alpha: Vec<usize>,
    pub beta: Vec<usize>,
    /// Sup of ⟨ξ⟩^{ρ|β|−δ|α|} |∂^α_x ∂^β_ξ f| / ω over the lattice.
    pub sup: f64,
    /// The same sup restricted to each dyadic shell 2^k ≤ |ξ| < 2^{k+1}.
    pub shell_sups: Vec<f64>,
    pub slope: Option<f64>,
    pub bounded: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClassReport {
    pub rho: f64,
    pub delta: f64,
    pub entries: Vec<ClassEntry>,
}

impl ClassReport {
    pub fn passes(&self) -> bool {
        self.entries.iter().all(|e| e.bounded)
    }

    pub fn entry(&self, alpha: &[usize], beta: &[usize]) -> Option<&ClassEntry> {
        self.entries.iter().find(|e| e.alpha == alpha && e.beta == beta)
    }
}

/// Slope threshold of the dyadic boundedness test.
pub const BOUNDED_SLOPE: f64 = 0.1;
const SHELL_FIT: usize = 4;

/// 1-D central difference stencil of order `n` with step `s`:
/// offsets and weights.
fn stencil(n: usize, s: f64) -> Vec<(f64, f64)> {
    (0..=n)
        .map(|j| {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            let off = (n as f64 / 2.0 - j as f64) * s;
            (off, sign * binom(n, j) / s.powi(n as i32))
        })
        .collect()
}

/// Finite-difference sweep shared by weight and symbol class checks.
///
/// `f` and `norm` take the concatenated point `(x, ξ)`.
pub fn class_sweep<F, W>(
    d: usize,
    f: F,
    norm: W,
    rho: f64,
    delta: f64,
    max_order: usize,
    grid: &ClassGrid,
) -> Result<ClassReport>
where
    F: Fn(&[f64]) -> Result<Complex64> + Sync,
    W: Fn(&[f64]) -> Result<f64> + Sync,
{
    if max_order > 4 {
        return Err(Error::InvalidConfig("derivative order above 4 not supported".into()));
    }
    let xi_pts = grid.xi_points(d);
    let n_shells = grid.n_shells();
    let mut pts: Vec<Vec<f64>> = Vec::new();
    for x in &grid.x_points {
        if x.len() != d {
            return Err(Error::InvalidConfig("x point dimension mismatch".into()));
        }
        for xi in &xi_pts {
            let mut p = x.clone();
            p.extend_from_slice(xi);
            pts.push(p);
        }
    }
    let mut entries = Vec::new();
    for mi in multi_indices(2 * d, max_order) {
        let (alpha, beta) = (mi[..d].to_vec(), mi[d..].to_vec());
        let na: usize = alpha.iter().sum();
        let nb: usize = beta.iter().sum();
        // tensor stencil
        let mut st: Vec<(Vec<f64>, f64)> = vec![(vec![0.0; 2 * d], 1.0)];
        for (v, &m) in mi.iter().enumerate() {
            if m == 0 {
                continue;
            }
            let h = if v < d { grid.x_spacing } else { grid.xi_spacing };
            let one = stencil(m, h / m as f64);
            st = st
                .into_iter()
                .flat_map(|(off, wt)| {
                    one.iter().map(move |&(o, w1)| {
                        let mut q = off.clone();
                        q[v] += o;
                        (q, wt * w1)
                    })
                })
                .collect();
        }
        let vals: Vec<(f64, f64)> = pts
            .par_iter()
            .map(|p| {
                let mut acc = Complex64::new(0.0, 0.0);
                for (off, wt) in &st {
                    let q: Vec<f64> = p.iter().zip(off).map(|(a, b)| a + b).collect();
                    acc += f(&q)? * *wt;
                }
                let om = norm(p)?;
                let br = bracket(&p[d..]);
                let r = br.powf(rho * nb as f64 - delta * na as f64) * acc.norm() / om;
                if !r.is_finite() {
                    return Err(Error::Domain(format!("non-finite derivative ratio at {p:?}")));
                }
                Ok((crate::numerics::norm(&p[d..]), r))
            })
            .collect::<Result<_>>()?;
        let mut shell_sups = vec![0.0f64; n_shells];
        let mut sup = 0.0f64;
        for &(r, v) in &vals {
            sup = sup.max(v);
            if r >= 1.0 {
                let k = r.log2().floor() as usize;
                if k < n_shells {
                    shell_sups[k] = shell_sups[k].max(v);
                }
            }
        }
        let from = n_shells.saturating_sub(SHELL_FIT);
        let tail = &shell_sups[from..];
        let scale = sup.max(1e-300);
        let (slope, bounded) = if tail.iter().all(|&v| v <= 1e-12 * scale.max(1.0)) {
            (None, true)
        } else {
            let ks: Vec<f64> = (from..n_shells).map(|k| k as f64).collect();
            let ys: Vec<f64> = tail.iter().map(|&v| log2_floor(v)).collect();
            let s = ls_slope(&ks, &ys);
            (s, s.is_none_or(|s| s <= BOUNDED_SLOPE))
        };
        entries.push(ClassEntry {
            alpha,
            beta,
            sup,
            shell_sups,
            slope,
            bounded,
        });
    }
    Ok(ClassReport { rho, delta, entries })
}

/// Lattice evidence that ω ∈ 𝒫_{ρ,δ}: ⟨ξ⟩^{ρ|β|−δ|α|} ∂^α_x ∂^β_ξ ω / ω bounded.
pub fn check_class_rho_delta(
    w: &WeightSpec,
    rho: f64,
    delta: f64,
    max_order: usize,
    grid: &ClassGrid,
) -> Result<ClassReport> {
    let d = w.d;
    class_sweep(
        d,
        |p| w.eval(&p[..d], &p[d..]).map(|v| Complex64::new(v, 0.0)),
        |p| w.eval(&p[..d], &p[d..]),
        rho,
        delta,
        max_order,
        grid,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn eval_examples() {
        let b2 = WeightSpec::japanese_bracket(1, 2.0);
        assert_eq!(b2.eval(&[0.0], &[0.0]).unwrap(), 1.0);
        assert_eq!(WeightSpec::heat().eval(&[0.0, 0.0], &[1.0, 1.0]).unwrap(), 3.0);
        let b1 = WeightSpec::japanese_bracket(1, 1.0);
        assert!((b1.eval(&[0.0], &[3.0]).unwrap() - 10f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn json_round_trip_and_errors() {
        let w = WeightSpec::from_json(r#"{"kind":"preset","name":"japanese_bracket","s":2,"d":1}"#).unwrap();
        assert_eq!(w, WeightSpec::japanese_bracket(1, 2.0));
        let back = WeightSpec::from_json(&w.to_json()).unwrap();
        assert_eq!(back, w);
        let e = WeightSpec::from_json(r#"{"kind":"expr","d":2,"expr":"1 + xi1^2 + abs(xi2)"}"#).unwrap();
        assert_eq!(e.eval(&[0.0, 0.0], &[1.0, -1.0]).unwrap(), 3.0);
        assert!(WeightSpec::expr(1, "xi1^2").unwrap().eval(&[0.0], &[0.0]).is_err());
        assert!(WeightSpec::constant(1, -1.0).is_err());
        assert!(b2_dim_mismatch());
    }

    fn b2_dim_mismatch() -> bool {
        WeightSpec::japanese_bracket(2, 2.0).eval(&[0.0], &[1.0]).is_err()
    }

    #[test]
    fn hypoelliptic_heat_polynomial_matches_heat_weight_up_to_constant() {
        let h = WeightSpec::hypoelliptic(2, "xi1^2 + i*xi2").unwrap();
        let heat = WeightSpec::heat();
        for &(a, b) in &[(0.0, 5.0), (3.0, 0.0), (2.0, -7.0)] {
            let r = h.eval(&[0.0, 0.0], &[a, b]).unwrap() / heat.eval(&[0.0, 0.0], &[a, b]).unwrap();
            assert!((1.0 / 2f64.sqrt() - 1e-12..=1.0 + 1e-12).contains(&r));
        }
    }

    /// Brute-force oracle for the lattice constant, independent of the
    /// implementation's point enumeration.
    fn brute_c(s: f64, n: i64) -> f64 {
        let br = |t: f64| (1.0 + t * t).powf(s / 2.0);
        let mut c = 0.0f64;
        for a in -n..=n {
            for b in -n..=n {
                let (a, b) = (a as f64, b as f64);
                c = c.max(br(a + b) / (br(a) * br(b)));
            }
        }
        c
    }

    #[test]
    fn moderate_examples() {
        let w = WeightSpec::japanese_bracket(1, 2.0);
        let rep = check_moderate(&w, &w, &SampleLattice::integer_xi(8)).unwrap();
        assert!(rep.estimated_c <= 2.0 + 1e-12);
        assert!((rep.estimated_c - brute_c(2.0, 8)).abs() < 1e-12);
        assert!(rep.passes());
        let one = WeightSpec::one(1);
        assert_eq!(check_moderate(&one, &one, &SampleLattice::integer_xi(8)).unwrap().estimated_c, 1.0);
        let rep = check_moderate(
            &WeightSpec::heat(),
            &WeightSpec::japanese_bracket(2, 2.0),
            &SampleLattice::integer_xi(8),
        )
        .unwrap();
        assert!(rep.estimated_c.is_finite() && rep.estimated_c <= 4.0);
    }

    #[test]
    fn bracket_class_membership() {
        let g = ClassGrid::default_for(1);
        for s in [-2.0, 0.0, 2.0] {
            let w = WeightSpec::japanese_bracket(1, s);
            assert!(check_class_rho_delta(&w, 1.0, 0.0, 2, &g).unwrap().passes(), "s = {s}");
        }
        for s in [-2.0, 2.0] {
            let w = WeightSpec::japanese_bracket(1, s);
            let rep = check_class_rho_delta(&w, 2.0, 0.0, 1, &g).unwrap();
            assert!(!rep.passes(), "s = {s} should fail at rho = 2");
            assert!(!rep.entry(&[0], &[1]).unwrap().bounded);
        }
    }

    #[test]
    fn constant_and_heat_class() {
        let g = ClassGrid::default_for(2);
        let c = WeightSpec::constant(2, 3.0).unwrap();
        let rep = check_class_rho_delta(&c, 1.0, 0.0, 2, &g).unwrap();
        assert!(rep.passes());
        for e in &rep.entries {
            if e.alpha.iter().sum::<usize>() + e.beta.iter().sum::<usize>() > 0 {
                assert_eq!(e.sup, 0.0);
            }
        }
        let rep = check_class_rho_delta(&WeightSpec::heat(), 0.5, 0.0, 2, &g).unwrap();
        assert!(rep.passes(), "{:?}", rep.entries.iter().filter(|e| !e.bounded).collect::<Vec<_>>());
    }

    proptest! {
        #[test]
        fn presets_positive_and_finite(s in -6.0f64..6.0, x in -50.0f64..50.0, a in -1e3f64..1e3, b in -1e3f64..1e3) {
            let ws = [
                WeightSpec::japanese_bracket(2, s),
                WeightSpec::heat(),
                WeightSpec::one(2),
                WeightSpec::hypoelliptic(2, "xi1^2 + i*xi2").unwrap(),
            ];
            for w in &ws {
                let v = w.eval(&[x, 0.0], &[a, b]).unwrap();
                prop_assert!(v > 0.0 && v.is_finite());
            }
        }

        #[test]
        fn bracket_is_x_independent(s in -4.0f64..4.0, x1 in -10.0f64..10.0, x2 in -10.0f64..10.0, xi in -100.0f64..100.0) {
            let w = WeightSpec::japanese_bracket(1, s);
            prop_assert_eq!(w.eval(&[x1], &[xi]).unwrap(), w.eval(&[x2], &[xi]).unwrap());
        }

        #[test]
        fn moderate_constant_monotone_in_lattice(n in 1i64..6, extra in 1i64..4, s in -3.0f64..3.0) {
            let w = WeightSpec::japanese_bracket(1, s);
            let v = WeightSpec::japanese_bracket(1, s.abs());
            let small = check_moderate(&w, &v, &SampleLattice::integer_xi(n)).unwrap();
            let big = check_moderate(&w, &v, &SampleLattice::integer_xi(n + extra)).unwrap();
            prop_assert!(big.estimated_c >= small.estimated_c);
        }
    }
}
