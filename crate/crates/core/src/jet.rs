//! Truncated multivariate Taylor jets.
//!
//! A [`Jet`] stores the Taylor coefficients of a function of `nv` variables up
//! to a fixed total order. Arithmetic on jets is exact up to truncation, so
//! evaluating a closed-form symbol on jets yields all of its partial
//! derivatives at a point without finite differences.
//!
//! Formulas that must run both on plain complex numbers and on jets are
//! written against the [`Scalar`] trait.

use num_complex::Complex64;
use std::collections::HashMap;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::{Arc, Mutex, OnceLock};

/// Arithmetic shared by `Complex64` and [`Jet`].
pub trait Scalar:
    Clone
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// A constant with the same shape as `self`.
    fn cst(&self, c: Complex64) -> Self;
    fn value(&self) -> Complex64;
    fn exp(&self) -> Self;
    fn ln(&self) -> Self;
    fn powf(&self, s: f64) -> Self;
    fn sin(&self) -> Self;
    fn cos(&self) -> Self;
    /// `|u|` for real-valued `u`, continued by the sign of the real part.
    fn abs_real(&self) -> Self;

    fn re(c: f64, like: &Self) -> Self {
        like.cst(Complex64::new(c, 0.0))
    }
    fn sqrt(&self) -> Self {
        self.powf(0.5)
    }
    fn scale(&self, s: f64) -> Self {
        self.clone() * self.cst(Complex64::new(s, 0.0))
    }
}

impl Scalar for Complex64 {
    fn cst(&self, c: Complex64) -> Self {
        c
    }
    fn value(&self) -> Complex64 {
        *self
    }
    fn exp(&self) -> Self {
        Complex64::exp(*self)
    }
    fn ln(&self) -> Self {
        Complex64::ln(*self)
    }
    fn powf(&self, s: f64) -> Self {
        if self.im == 0.0 && self.re > 0.0 {
            Complex64::new(self.re.powf(s), 0.0)
        } else {
            Complex64::powf(*self, s)
        }
    }
    fn sin(&self) -> Self {
        Complex64::sin(*self)
    }
    fn cos(&self) -> Self {
        Complex64::cos(*self)
    }
    fn abs_real(&self) -> Self {
        if self.re < 0.0 {
            -*self
        } else {
            *self
        }
    }
}

/// Monomial bookkeeping for a given number of variables and order.
#[derive(Debug)]
pub struct JetLayout {
    pub nv: usize,
    pub order: usize,
    exps: Vec<Vec<u8>>,
    lookup: Vec<u32>,
    products: Vec<(u32, u32, u32)>,
}

const NO_INDEX: u32 = u32::MAX;

impl JetLayout {
    fn build(nv: usize, order: usize) -> Self {
        let mut exps: Vec<Vec<u8>> = Vec::new();
        for deg in 0..=order {
            let mut cur = vec![0u8; nv];
            enumerate_degree(nv, deg, 0, &mut cur, &mut exps);
        }
        let base = order + 1;
        let mut lookup = vec![NO_INDEX; base.pow(nv as u32)];
        for (i, e) in exps.iter().enumerate() {
            lookup[dense_key(e, base)] = i as u32;
        }
        let mut products = Vec::new();
        for (i, a) in exps.iter().enumerate() {
            let da: usize = a.iter().map(|&v| v as usize).sum();
            for (j, b) in exps.iter().enumerate() {
                let db: usize = b.iter().map(|&v| v as usize).sum();
                if da + db > order {
                    continue;
                }
                let sum: Vec<u8> = a.iter().zip(b).map(|(x, y)| x + y).collect();
                let k = lookup[dense_key(&sum, base)];
                products.push((i as u32, j as u32, k));
            }
        }
        JetLayout {
            nv,
            order,
            exps,
            lookup,
            products,
        }
    }

    /// Shared layout for `(nv, order)`.
    pub fn get(nv: usize, order: usize) -> Arc<JetLayout> {
        static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<JetLayout>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().expect("jet layout cache poisoned");
        guard
            .entry((nv, order))
            .or_insert_with(|| Arc::new(JetLayout::build(nv, order)))
            .clone()
    }

    pub fn len(&self) -> usize {
        self.exps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exps.is_empty()
    }

    pub fn index_of(&self, exps: &[u8]) -> Option<usize> {
        if exps.len() != self.nv {
            return None;
        }
        let deg: usize = exps.iter().map(|&v| v as usize).sum();
        if deg > self.order {
            return None;
        }
        let idx = self.lookup[dense_key(exps, self.order + 1)];
        (idx != NO_INDEX).then_some(idx as usize)
    }

    pub fn exponents(&self) -> &[Vec<u8>] {
        &self.exps
    }
}

fn enumerate_degree(nv: usize, remaining: usize, pos: usize, cur: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
    if pos + 1 == nv {
        cur[pos] = remaining as u8;
        out.push(cur.clone());
        return;
    }
    for v in (0..=remaining).rev() {
        cur[pos] = v as u8;
        enumerate_degree(nv, remaining - v, pos + 1, cur, out);
    }
    cur[pos] = 0;
}

fn dense_key(e: &[u8], base: usize) -> usize {
    e.iter().fold(0usize, |acc, &v| acc * base + v as usize)
}

/// Truncated Taylor expansion around a point.
#[derive(Clone, Debug)]
pub struct Jet {
    layout: Arc<JetLayout>,
    c: Vec<Complex64>,
}

impl Jet {
    pub fn constant(layout: &Arc<JetLayout>, v: Complex64) -> Self {
        let mut c = vec![Complex64::new(0.0, 0.0); layout.len()];
        c[0] = v;
        Jet {
            layout: layout.clone(),
            c,
        }
    }

    /// The coordinate function `u_var` expanded at `value`.
    pub fn variable(layout: &Arc<JetLayout>, var: usize, value: f64) -> Self {
        let mut j = Jet::constant(layout, Complex64::new(value, 0.0));
        if layout.order > 0 {
            let mut e = vec![0u8; layout.nv];
            e[var] = 1;
            let idx = layout.index_of(&e).expect("first-order monomial present");
            j.c[idx] = Complex64::new(1.0, 0.0);
        }
        j
    }

    pub fn layout(&self) -> &Arc<JetLayout> {
        &self.layout
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.c
    }

    /// Partial derivative `∂^exps` at the expansion point.
    pub fn derivative(&self, exps: &[u8]) -> Complex64 {
        match self.layout.index_of(exps) {
            Some(i) => {
                let fact: f64 = exps.iter().map(|&v| factorial(v as usize)).product();
                self.c[i] * fact
            }
            None => Complex64::new(0.0, 0.0),
        }
    }

    /// Compose with a univariate function given its Taylor coefficients at
    /// the current value (`coeffs[k] = f^(k)(u0) / k!`).
    fn compose(&self, coeffs: &[Complex64]) -> Jet {
        let mut delta = self.clone();
        delta.c[0] = Complex64::new(0.0, 0.0);
        let p = self.layout.order;
        let mut r = Jet::constant(&self.layout, coeffs[p]);
        for k in (0..p).rev() {
            r = &r * &delta;
            r.c[0] += coeffs[k];
        }
        r
    }
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

fn binom_real(s: f64, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (s - i as f64) / (i as f64 + 1.0))
}

impl<'a> Add<&'a Jet> for &'a Jet {
    type Output = Jet;
    fn add(self, o: &Jet) -> Jet {
        let c = self.c.iter().zip(&o.c).map(|(a, b)| a + b).collect();
        Jet {
            layout: self.layout.clone(),
            c,
        }
    }
}

impl<'a> Sub<&'a Jet> for &'a Jet {
    type Output = Jet;
    fn sub(self, o: &Jet) -> Jet {
        let c = self.c.iter().zip(&o.c).map(|(a, b)| a - b).collect();
        Jet {
            layout: self.layout.clone(),
            c,
        }
    }
}

impl<'a> Mul<&'a Jet> for &'a Jet {
    type Output = Jet;
    fn mul(self, o: &Jet) -> Jet {
        let mut c = vec![Complex64::new(0.0, 0.0); self.c.len()];
        for &(i, j, k) in &self.layout.products {
            let (a, b) = (self.c[i as usize], o.c[j as usize]);
            if a.re == 0.0 && a.im == 0.0 {
                continue;
            }
            c[k as usize] += a * b;
        }
        Jet {
            layout: self.layout.clone(),
            c,
        }
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        &self + &o
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        &self - &o
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        &self * &o
    }
}

impl Div for Jet {
    type Output = Jet;
    fn div(self, o: Jet) -> Jet {
        let u0 = o.c[0];
        let p = o.layout.order;
        let coeffs: Vec<Complex64> = (0..=p)
            .map(|k| {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                sign / u0.powi(k as i32 + 1)
            })
            .collect();
        &self * &o.compose(&coeffs)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        Jet {
            c: self.c.iter().map(|v| -v).collect(),
            layout: self.layout,
        }
    }
}

impl Scalar for Jet {
    fn cst(&self, c: Complex64) -> Self {
        Jet::constant(&self.layout, c)
    }

    fn value(&self) -> Complex64 {
        self.c[0]
    }

    fn exp(&self) -> Self {
        let e = self.c[0].exp();
        let coeffs: Vec<Complex64> = (0..=self.layout.order).map(|k| e / factorial(k)).collect();
        self.compose(&coeffs)
    }

    fn ln(&self) -> Self {
        let u0 = self.c[0];
        let coeffs: Vec<Complex64> = (0..=self.layout.order)
            .map(|k| {
                if k == 0 {
                    u0.ln()
                } else {
                    let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                    sign / (k as f64 * u0.powi(k as i32))
                }
            })
            .collect();
        self.compose(&coeffs)
    }

    fn powf(&self, s: f64) -> Self {
        let u0 = self.c[0];
        let coeffs: Vec<Complex64> = (0..=self.layout.order)
            .map(|k| binom_real(s, k) * Scalar::powf(&u0, s - k as f64))
            .collect();
        self.compose(&coeffs)
    }

    fn sin(&self) -> Self {
        let (s, c) = (self.c[0].sin(), self.c[0].cos());
        let cycle = [s, c, -s, -c];
        let coeffs: Vec<Complex64> = (0..=self.layout.order)
            .map(|k| cycle[k % 4] / factorial(k))
            .collect();
        self.compose(&coeffs)
    }

    fn cos(&self) -> Self {
        let (s, c) = (self.c[0].sin(), self.c[0].cos());
        let cycle = [c, -s, -c, s];
        let coeffs: Vec<Complex64> = (0..=self.layout.order)
            .map(|k| cycle[k % 4] / factorial(k))
            .collect();
        self.compose(&coeffs)
    }

    fn abs_real(&self) -> Self {
        if self.c[0].re < 0.0 {
            -self.clone()
        } else {
            self.clone()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(v: f64) -> Complex64 {
        Complex64::new(v, 0.0)
    }

    #[test]
    fn layout_counts_monomials() {
        assert_eq!(JetLayout::get(2, 3).len(), 10);
        assert_eq!(JetLayout::get(4, 2).len(), 15);
        assert_eq!(JetLayout::get(1, 0).len(), 1);
    }

    #[test]
    fn product_rule_matches_hand_expansion() {
        let l = JetLayout::get(2, 3);
        let x = Jet::variable(&l, 0, 2.0);
        let y = Jet::variable(&l, 1, 3.0);
        // f = x^2 y at (2,3)
        let f = &(&x * &x) * &y;
        assert!((f.value() - c(12.0)).norm() < 1e-14);
        assert!((f.derivative(&[1, 0]) - c(12.0)).norm() < 1e-14);
        assert!((f.derivative(&[0, 1]) - c(4.0)).norm() < 1e-14);
        assert!((f.derivative(&[2, 1]) - c(2.0)).norm() < 1e-14);
        assert!((f.derivative(&[1, 1]) - c(4.0)).norm() < 1e-14);
    }

    #[test]
    fn bracket_power_derivatives() {
        // <t>^s = (1 + t^2)^(s/2); second derivative at t = 1, s = 2 is 2.
        let l = JetLayout::get(1, 4);
        let t = Jet::variable(&l, 0, 1.0);
        let one = t.cst(c(1.0));
        let b = (one + &t * &t).powf(1.0);
        assert!((b.derivative(&[2]) - c(2.0)).norm() < 1e-12);
        assert!(b.derivative(&[3]).norm() < 1e-12);
        // s = 1: d/dt sqrt(1+t^2) = t / sqrt(1+t^2)
        let b1 = (t.cst(c(1.0)) + &t * &t).sqrt();
        assert!((b1.derivative(&[1]) - c(1.0 / 2f64.sqrt())).norm() < 1e-12);
    }

    #[test]
    fn exp_sin_cos_ln_division() {
        let l = JetLayout::get(1, 5);
        let t = Jet::variable(&l, 0, 0.3);
        let e = t.exp();
        for k in 0..=5u8 {
            assert!((e.derivative(&[k]) - c(0.3f64.exp())).norm() < 1e-12);
        }
        let s = t.sin();
        assert!((s.derivative(&[3]) - c(-(0.3f64.cos()))).norm() < 1e-12);
        let co = t.cos();
        assert!((co.derivative(&[2]) - c(-(0.3f64.cos()))).norm() < 1e-12);
        let lg = t.ln();
        assert!((lg.derivative(&[2]) - c(-1.0 / 0.09)).norm() < 1e-10);
        let q = t.cst(c(1.0)) / t.clone();
        assert!((q.derivative(&[1]) - c(-1.0 / 0.09)).norm() < 1e-10);
        assert!((q.derivative(&[2]) - c(2.0 / 0.027)).norm() < 1e-8);
    }
}
