//! Evaluable symbols a(x, ξ).

use super::sampled::SampledSymbol;
use crate::error::{Error, Result};
use crate::expr::{Dialect, Expr};
use crate::jet::{Jet, JetLayout, Scalar};
use crate::weights::{WeightDef, WeightSpec};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::path::Path;
use std::sync::Arc;

/// Serialized symbol kinds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SymbolDef {
    /// ⟨ξ⟩^s.
    Multiplier { d: usize, s: f64 },
    /// m(x), an expression in x only.
    Xmultiplier { d: usize, expr: String },
    /// ξ² + iτ in the variables (ξ, τ).
    Heat,
    /// ⟨ξ⟩^s (1 − χ(|ξ|) β(ξ/|ξ|)), vanishing on the cone of half-width
    /// `half_width` around angle `center` for |ξ| ≥ 2 (d = 2).
    Directional {
        s: f64,
        center: f64,
        half_width: f64,
        /// Angular width of the transition from 0 to full strength.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        transition: Option<f64>,
    },
    /// e^{−i⟨x₀, ξ⟩}.
    Phase { x0: Vec<f64> },
    /// (1 + A cos⟨k, x⟩) ⟨ξ⟩^s.
    Modulated { d: usize, s: f64, amplitude: f64, wavenumber: Vec<f64> },
    /// Any expression in the symbol dialect.
    Expr { d: usize, expr: String },
    /// Sampled symbol stored in a field file (d = 1, shape [N_x, N_ξ]).
    Array { path: String },
}

/// Symbol JSON: a kind plus the declared weight and orders.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SymbolFile {
    #[serde(flatten)]
    pub def: SymbolDef,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<WeightDef>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
}

/// Smooth cutoff χ(x, ξ) = χ_X(x) χ_Γ(ξ) χ_R(|ξ|).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConeRegion {
    /// Ball X = {|x − centre| ≤ radius}; the x cutoff is 1 on X and 0
    /// beyond twice the radius. `None` means all of R^d.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_ball: Option<(Vec<f64>, f64)>,
    /// Cone Γ: (centre angle, half-width) in d = 2, or the sign of ξ as
    /// angle 0 / π in d = 1. `None` means all directions.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cone: Option<(f64, f64)>,
    /// χ_R = 0 for |ξ| ≤ R and 1 for |ξ| ≥ 2R.
    pub r_low: f64,
}

impl ConeRegion {
    pub fn global(r_low: f64) -> ConeRegion {
        ConeRegion {
            x_ball: None,
            cone: None,
            r_low,
        }
    }

    pub fn is_x_independent(&self) -> bool {
        self.x_ball.is_none()
    }

    /// True on {x ∈ X, ξ ∈ Γ, |ξ| ≥ 2R}.
    pub fn contains(&self, x: &[f64], xi: &[f64]) -> bool {
        let r = crate::numerics::norm(xi);
        if r < 2.0 * self.r_low {
            return false;
        }
        if let Some((c, rad)) = &self.x_ball {
            let dx: Vec<f64> = x.iter().zip(c).map(|(a, b)| a - b).collect();
            if crate::numerics::norm(&dx) > *rad {
                return false;
            }
        }
        match &self.cone {
            None => true,
            Some((theta, hw)) => {
                if xi.len() == 1 {
                    (xi[0] > 0.0) == (theta.cos() > 0.0)
                } else {
                    let c = (xi[0] * theta.cos() + xi[1] * theta.sin()) / r;
                    c >= hw.cos() - 1e-12
                }
            }
        }
    }

    pub fn eval_s<S: Scalar>(&self, x: &[S], xi: &[S]) -> S {
        let like = &xi[0];
        let one = like.cst(Complex64::new(1.0, 0.0));
        let r2 = xi.iter().skip(1).fold(xi[0].clone() * xi[0].clone(), |acc, v| acc + v.clone() * v.clone());
        let rv = r2.value().re.sqrt();
        if rv <= self.r_low {
            return like.cst(Complex64::new(0.0, 0.0));
        }
        let r = r2.sqrt();
        let mut chi = smooth_step_s((r.clone() - S::re(self.r_low, like)) * S::re(1.0 / self.r_low, like));
        if let Some((theta, hw)) = &self.cone {
            if xi.len() == 1 {
                if (xi[0].value().re > 0.0) != (theta.cos() > 0.0) {
                    return like.cst(Complex64::new(0.0, 0.0));
                }
            } else {
                let c = (xi[0].clone() * S::re(theta.cos(), like) + xi[1].clone() * S::re(theta.sin(), like)) / r.clone();
                // 1 for angle ≤ hw, 0 for angle ≥ 2 hw
                let (c1, c2) = (hw.cos(), (2.0 * hw).min(std::f64::consts::PI).cos());
                let t = (c - S::re(c2, like)) * S::re(1.0 / (c1 - c2), like);
                chi = chi * smooth_step_s(t);
            }
        }
        if let Some((c, rad)) = &self.x_ball {
            let mut d2 = like.cst(Complex64::new(0.0, 0.0));
            for (xv, cv) in x.iter().zip(c) {
                let dv = xv.clone() - S::re(*cv, like);
                d2 = d2 + dv.clone() * dv;
            }
            let dist = d2.value().re.sqrt();
            let factor = if dist <= *rad {
                one.clone()
            } else if dist >= 2.0 * rad {
                like.cst(Complex64::new(0.0, 0.0))
            } else {
                one.clone() - smooth_step_s((d2.sqrt() - S::re(*rad, like)) * S::re(1.0 / rad, like))
            };
            chi = chi * factor;
        }
        chi
    }
}

/// C^∞ step 0 → 1 on [0, 1], generic over scalars.
pub fn smooth_step_s<S: Scalar>(t: S) -> S {
    let v = t.value().re;
    if v <= 0.0 {
        return t.cst(Complex64::new(0.0, 0.0));
    }
    if v >= 1.0 {
        return t.cst(Complex64::new(1.0, 0.0));
    }
    let one = t.cst(Complex64::new(1.0, 0.0));
    let a = (-(one.clone() / t.clone())).exp();
    let b = (-(one.clone() / (one - t))).exp();
    a.clone() / (a + b)
}

#[derive(Clone, Debug)]
enum Compiled {
    Multiplier(f64),
    Xmultiplier(Expr),
    Heat,
    Directional { s: f64, center: f64, hw: f64, tw: f64 },
    Phase(Vec<f64>),
    Modulated { s: f64, amp: f64, k: Vec<f64> },
    Expr(Expr),
    Array(Arc<SampledSymbol>),
    Cutoff(ConeRegion),
    /// χ / a, set to 0 where χ vanishes.
    Quotient(ConeRegion, Box<SymbolSpec>),
}

/// A parsed symbol with its declared weight ω₀ and orders (ρ, δ).
#[derive(Clone, Debug)]
pub struct SymbolSpec {
    def: Option<SymbolDef>,
    d: usize,
    compiled: Compiled,
    pub weight: Option<WeightSpec>,
    pub rho: f64,
    pub delta: f64,
    label: String,
}

impl SymbolSpec {
    pub fn from_def(def: SymbolDef) -> Result<SymbolSpec> {
        Self::from_def_at(def, None)
    }

    fn from_def_at(def: SymbolDef, base: Option<&Path>) -> Result<SymbolSpec> {
        let bad = |m: String| Error::MalformedSymbol(m);
        let (d, compiled, label) = match &def {
            SymbolDef::Multiplier { d, s } => (*d, Compiled::Multiplier(*s), format!("bracket^{s}")),
            SymbolDef::Xmultiplier { d, expr } => {
                let e = Expr::parse(expr, *d, Dialect::Symbol)?;
                if (*d..2 * d).any(|v| e.uses_var(v)) {
                    return Err(bad("xmultiplier must not depend on ξ".into()));
                }
                (*d, Compiled::Xmultiplier(e), format!("x:{expr}"))
            }
            SymbolDef::Heat => (2, Compiled::Heat, "heat".into()),
            SymbolDef::Directional {
                s,
                center,
                half_width,
                transition,
            } => {
                let tw = transition.unwrap_or(*half_width);
                if !(*half_width > 0.0 && tw > 0.0 && half_width + tw < std::f64::consts::PI) {
                    return Err(bad("directional symbol needs 0 < half_width and half_width + transition < π".into()));
                }
                (
                    2,
                    Compiled::Directional {
                        s: *s,
                        center: *center,
                        hw: *half_width,
                        tw,
                    },
                    format!("directional({center:.3},{half_width:.3})"),
                )
            }
            SymbolDef::Phase { x0 } => (x0.len(), Compiled::Phase(x0.clone()), format!("phase{x0:?}")),
            SymbolDef::Modulated {
                d,
                s,
                amplitude,
                wavenumber,
            } => {
                if wavenumber.len() != *d {
                    return Err(bad("wavenumber length must equal d".into()));
                }
                if amplitude.abs() >= 1.0 {
                    return Err(bad("modulation amplitude must be below 1 to stay elliptic".into()));
                }
                (
                    *d,
                    Compiled::Modulated {
                        s: *s,
                        amp: *amplitude,
                        k: wavenumber.clone(),
                    },
                    format!("modulated({s},{amplitude})"),
                )
            }
            SymbolDef::Expr { d, expr } => (*d, Compiled::Expr(Expr::parse(expr, *d, Dialect::Symbol)?), expr.clone()),
            SymbolDef::Array { path } => {
                let p = match base {
                    Some(b) => b.join(path),
                    None => Path::new(path).to_path_buf(),
                };
                let s = SampledSymbol::read(&p)?;
                (s.dim(), Compiled::Array(Arc::new(s)), format!("array({path})"))
            }
        };
        if !(1..=2).contains(&d) {
            return Err(bad(format!("dimension {d} not supported")));
        }
        Ok(SymbolSpec {
            def: Some(def),
            d,
            compiled,
            weight: None,
            rho: 1.0,
            delta: 0.0,
            label,
        })
    }

    /// Parse symbol JSON; array paths are relative to `base` when given.
    pub fn from_json_at(src: &str, base: Option<&Path>) -> Result<SymbolSpec> {
        let file: SymbolFile = serde_json::from_str(src)?;
        let mut s = Self::from_def_at(file.def, base)?;
        if let Some(w) = file.weight {
            let w = WeightSpec::try_from(w)?;
            if w.dim() != s.d {
                return Err(Error::MalformedSymbol("declared weight has the wrong dimension".into()));
            }
            s.weight = Some(w);
        }
        s.rho = file.rho.unwrap_or(1.0);
        s.delta = file.delta.unwrap_or(0.0);
        Ok(s)
    }

    pub fn from_json(src: &str) -> Result<SymbolSpec> {
        Self::from_json_at(src, None)
    }

    pub fn to_json(&self) -> Result<String> {
        let def = self
            .def
            .clone()
            .ok_or_else(|| Error::MalformedSymbol(format!("internal symbol '{}' has no JSON form", self.label)))?;
        Ok(serde_json::to_string(&SymbolFile {
            def,
            weight: self.weight.as_ref().map(|w| w.def().clone()),
            rho: Some(self.rho),
            delta: Some(self.delta),
        })?)
    }

    pub fn with_weight(mut self, w: WeightSpec) -> Self {
        self.weight = Some(w);
        self
    }

    pub fn with_orders(mut self, rho: f64, delta: f64) -> Self {
        self.rho = rho;
        self.delta = delta;
        self
    }

    pub fn multiplier(d: usize, s: f64) -> SymbolSpec {
        Self::from_def(SymbolDef::Multiplier { d, s }).expect("multiplier is valid")
    }

    pub fn heat() -> SymbolSpec {
        Self::from_def(SymbolDef::Heat).expect("heat symbol is valid")
    }

    pub fn phase(x0: Vec<f64>) -> SymbolSpec {
        Self::from_def(SymbolDef::Phase { x0 }).expect("phase symbol is valid")
    }

    pub fn expr(d: usize, src: &str) -> Result<SymbolSpec> {
        Self::from_def(SymbolDef::Expr {
            d,
            expr: src.to_string(),
        })
    }

    pub fn xmultiplier(d: usize, src: &str) -> Result<SymbolSpec> {
        Self::from_def(SymbolDef::Xmultiplier {
            d,
            expr: src.to_string(),
        })
    }

    pub fn directional(s: f64, center: f64, half_width: f64, transition: Option<f64>) -> Result<SymbolSpec> {
        Self::from_def(SymbolDef::Directional {
            s,
            center,
            half_width,
            transition,
        })
    }

    pub fn modulated(d: usize, s: f64, amplitude: f64, wavenumber: Vec<f64>) -> Result<SymbolSpec> {
        Self::from_def(SymbolDef::Modulated {
            d,
            s,
            amplitude,
            wavenumber,
        })
    }

    pub fn array(s: SampledSymbol) -> SymbolSpec {
        SymbolSpec {
            def: None,
            d: s.dim(),
            compiled: Compiled::Array(Arc::new(s)),
            weight: None,
            rho: 1.0,
            delta: 0.0,
            label: "array".into(),
        }
    }

    pub fn cutoff(region: ConeRegion, d: usize) -> SymbolSpec {
        SymbolSpec {
            def: None,
            d,
            compiled: Compiled::Cutoff(region),
            weight: None,
            rho: 1.0,
            delta: 0.0,
            label: "cutoff".into(),
        }
    }

    /// χ/a for the first parametrix step.
    pub fn quotient(region: ConeRegion, a: &SymbolSpec) -> SymbolSpec {
        SymbolSpec {
            def: None,
            d: a.d,
            compiled: Compiled::Quotient(region, Box::new(a.clone())),
            weight: None,
            rho: a.rho,
            delta: a.delta,
            label: format!("cutoff/{}", a.label),
        }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn as_array(&self) -> Option<&SampledSymbol> {
        match &self.compiled {
            Compiled::Array(a) => Some(a),
            _ => None,
        }
    }

    pub fn is_x_independent(&self) -> bool {
        match &self.compiled {
            Compiled::Multiplier(_) | Compiled::Heat | Compiled::Directional { .. } | Compiled::Phase(_) => true,
            Compiled::Xmultiplier(_) => false,
            Compiled::Modulated { amp, k, .. } => *amp == 0.0 || k.iter().all(|&v| v == 0.0),
            Compiled::Expr(e) => !(0..self.d).any(|v| e.uses_var(v)),
            Compiled::Array(a) => a.grid.x.is_none(),
            Compiled::Cutoff(r) => r.is_x_independent(),
            Compiled::Quotient(r, a) => r.is_x_independent() && a.is_x_independent(),
        }
    }

    pub fn is_xi_independent(&self) -> bool {
        match &self.compiled {
            Compiled::Xmultiplier(_) => true,
            Compiled::Multiplier(s) => *s == 0.0,
            Compiled::Modulated { s, .. } => *s == 0.0,
            Compiled::Expr(e) => !(self.d..2 * self.d).any(|v| e.uses_var(v)),
            Compiled::Array(a) => a.is_xi_independent(),
            _ => false,
        }
    }

    /// Closed-form evaluation over any scalar type. `None` for arrays.
    pub fn eval_s<S: Scalar>(&self, x: &[S], xi: &[S]) -> Option<S> {
        let like = &xi[0];
        let c = |v: f64| like.cst(Complex64::new(v, 0.0));
        let bracket_pow = |s: f64| -> S {
            let r2 = xi.iter().fold(c(1.0), |acc, v| acc + v.clone() * v.clone());
            r2.powf(s / 2.0)
        };
        Some(match &self.compiled {
            Compiled::Multiplier(s) => bracket_pow(*s),
            Compiled::Xmultiplier(e) | Compiled::Expr(e) => {
                let vars: Vec<S> = x.iter().chain(xi).cloned().collect();
                e.eval(&vars)
            }
            Compiled::Heat => xi[0].clone() * xi[0].clone() + like.cst(Complex64::new(0.0, 1.0)) * xi[1].clone(),
            Compiled::Directional { s, center, hw, tw } => {
                let base = bracket_pow(*s);
                let r2 = xi[0].clone() * xi[0].clone() + xi[1].clone() * xi[1].clone();
                let rv = r2.value().re.sqrt();
                if rv <= 1.0 {
                    return Some(base);
                }
                let r = r2.sqrt();
                let chi = smooth_step_s(r.clone() - c(1.0));
                let cosang = (xi[0].clone() * c(center.cos()) + xi[1].clone() * c(center.sin())) / r;
                let (c1, c2) = (hw.cos(), (hw + tw).cos());
                let beta = smooth_step_s((cosang - c(c2)) * c(1.0 / (c1 - c2)));
                base * (c(1.0) - chi * beta)
            }
            Compiled::Phase(x0) => {
                let mut dot = c(0.0);
                for (a, v) in x0.iter().zip(xi) {
                    dot = dot + c(*a) * v.clone();
                }
                (like.cst(Complex64::new(0.0, -1.0)) * dot).exp()
            }
            Compiled::Modulated { s, amp, k } => {
                let mut kx = c(0.0);
                for (a, v) in k.iter().zip(x) {
                    kx = kx + c(*a) * v.clone();
                }
                (c(1.0) + c(*amp) * kx.cos()) * bracket_pow(*s)
            }
            Compiled::Array(_) => return None,
            Compiled::Cutoff(r) => r.eval_s(x, xi),
            Compiled::Quotient(r, a) => {
                let chi = r.eval_s(x, xi);
                if chi.value().norm() == 0.0 {
                    return Some(chi);
                }
                chi / a.eval_s(x, xi)?
            }
        })
    }

    /// a(x, ξ). Array symbols are defined only at their grid points.
    pub fn eval(&self, x: &[f64], xi: &[f64]) -> Result<Complex64> {
        if x.len() != self.d || xi.len() != self.d {
            return Err(Error::MalformedSymbol(format!(
                "symbol has d = {}, got points of length {} and {}",
                self.d,
                x.len(),
                xi.len()
            )));
        }
        let v = match &self.compiled {
            Compiled::Array(a) => a.lookup(x, xi)?,
            _ => {
                let xs: Vec<Complex64> = x.iter().map(|&t| Complex64::new(t, 0.0)).collect();
                let ks: Vec<Complex64> = xi.iter().map(|&t| Complex64::new(t, 0.0)).collect();
                self.eval_s(&xs, &ks).expect("closed form")
            }
        };
        if v.re.is_finite() && v.im.is_finite() {
            Ok(v)
        } else {
            Err(Error::Domain(format!("symbol {} is not finite at x = {x:?}, ξ = {xi:?}", self.label)))
        }
    }

    /// Taylor jet of a in the ξ variables (x frozen) up to `order`.
    pub fn xi_jet(&self, x: &[f64], xi: &[f64], order: usize) -> Option<Jet> {
        let l = JetLayout::get(self.d, order);
        let xs: Vec<Jet> = x.iter().map(|&t| Jet::constant(&l, Complex64::new(t, 0.0))).collect();
        let ks: Vec<Jet> = xi.iter().enumerate().map(|(i, &t)| Jet::variable(&l, i, t)).collect();
        self.eval_s(&xs, &ks)
    }

    /// Taylor jet of a in the x variables (ξ frozen) up to `order`.
    pub fn x_jet(&self, x: &[f64], xi: &[f64], order: usize) -> Option<Jet> {
        let l = JetLayout::get(self.d, order);
        let xs: Vec<Jet> = x.iter().enumerate().map(|(i, &t)| Jet::variable(&l, i, t)).collect();
        let ks: Vec<Jet> = xi.iter().map(|&t| Jet::constant(&l, Complex64::new(t, 0.0))).collect();
        self.eval_s(&xs, &ks)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn eval_examples() {
        let h = SymbolSpec::heat();
        assert_eq!(h.eval(&[0.0, 0.0], &[1.0, 1.0]).unwrap(), Complex64::new(1.0, 1.0));
        let p = SymbolSpec::phase(vec![2.0]);
        assert!((p.eval(&[0.0], &[PI]).unwrap() - Complex64::new(1.0, 0.0)).norm() < 1e-14);
        let m = SymbolSpec::multiplier(2, 2.0);
        assert!((m.eval(&[0.0, 0.0], &[1.0, 1.0]).unwrap() - Complex64::new(3.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn json_with_weight_and_orders() {
        let s = SymbolSpec::from_json(
            r#"{"kind":"multiplier","d":1,"s":2,"weight":{"kind":"preset","name":"japanese_bracket","d":1,"s":2},"rho":1,"delta":0}"#,
        )
        .unwrap();
        assert_eq!(s.weight.as_ref().unwrap().id(), "bracket(2)");
        let back = SymbolSpec::from_json(&s.to_json().unwrap()).unwrap();
        assert_eq!(back.eval(&[0.0], &[3.0]).unwrap(), s.eval(&[0.0], &[3.0]).unwrap());
        assert!(SymbolSpec::from_json(r#"{"kind":"xmultiplier","d":1,"expr":"xi1"}"#).is_err());
        assert!(SymbolSpec::from_json(r#"{"kind":"bogus"}"#).is_err());
    }

    #[test]
    fn directional_vanishes_on_its_cone_only() {
        let a = SymbolSpec::directional(1.0, PI / 2.0, PI / 8.0, None).unwrap();
        for r in [2.0, 10.0, 100.0] {
            for ang in [PI / 2.0, PI / 2.0 + PI / 8.0 - 1e-9, PI / 2.0 - PI / 9.0] {
                let v = a.eval(&[0.0, 0.0], &[r * ang.cos(), r * ang.sin()]).unwrap();
                assert!(v.norm() < 1e-12, "r = {r}, angle = {ang}");
            }
            let b = (1.0 + r * r).sqrt();
            for ang in [0.0, PI, PI / 2.0 + PI / 4.0 + 1e-9, -PI / 2.0] {
                let v = a.eval(&[0.0, 0.0], &[r * ang.cos(), r * ang.sin()]).unwrap();
                assert!((v.re - b).abs() < 1e-9 * b, "r = {r}, angle = {ang}");
            }
        }
    }

    #[test]
    fn jets_give_exact_derivatives() {
        let a = SymbolSpec::expr(1, "x1*xi1").unwrap();
        let j = a.xi_jet(&[2.0], &[3.0], 2).unwrap();
        assert_eq!(j.derivative(&[1]), Complex64::new(2.0, 0.0));
        assert_eq!(j.derivative(&[2]), Complex64::new(0.0, 0.0));
        let m = SymbolSpec::modulated(1, 2.0, 0.5, vec![1.5]).unwrap();
        let jx = m.x_jet(&[0.3], &[4.0], 1).unwrap();
        let exact = -0.5 * 1.5 * (1.5f64 * 0.3).sin() * 17.0;
        assert!((jx.derivative(&[1]).re - exact).abs() < 1e-12);
    }

    #[test]
    fn cone_region_cutoff() {
        let r = ConeRegion::global(2.0);
        let c = SymbolSpec::cutoff(r.clone(), 1);
        assert_eq!(c.eval(&[0.0], &[1.0]).unwrap().re, 0.0);
        assert_eq!(c.eval(&[0.0], &[-4.5]).unwrap().re, 1.0);
        let v = c.eval(&[0.0], &[3.0]).unwrap().re;
        assert!(v > 0.0 && v < 1.0);
        assert!(r.contains(&[0.0], &[4.0]) && !r.contains(&[0.0], &[3.9]));
        let q = SymbolSpec::quotient(r, &SymbolSpec::multiplier(1, 2.0));
        assert!((q.eval(&[0.0], &[10.0]).unwrap().re - 1.0 / 101.0).abs() < 1e-15);
        assert!(q.is_x_independent());
    }
}
