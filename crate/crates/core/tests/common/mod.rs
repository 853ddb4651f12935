#![allow(dead_code)]

use conefront::fields::{dft, top_annulus, Grid, SampledField};
use conefront::numerics::ls_slope;
use conefront::pdo::{apply_op, kernel_oracle};
use conefront::symcalc::{compose_symbols, SampledSymbol, SymbolGrid, SymbolSpec};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rel_err(a: &SampledField, b: &SampledField) -> f64 {
    let num: f64 = a.values.iter().zip(&b.values).map(|(p, q)| (p - q).norm_sqr()).sum();
    let den: f64 = b.values.iter().map(|q| q.norm_sqr()).sum();
    (num / den).sqrt()
}

fn cplx(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

/// A random (symbol, field, t) triple on an N = 16 line.
///
/// Pairs 4 and 9 are Weyl (t = 1/2) pairs: the symbol is modulated at ±2Δξ,
/// so converting to t = 0 shifts ξ by whole cells, and the field is
/// band-limited to |n| ≤ N/4 so nothing reaches the Nyquist wrap. The other
/// pairs take t ∈ {0, 1}, where the discrete identity holds for any
/// sampled symbol and any field; their symbols cycle through raw random
/// arrays, modulated multipliers and x-dependent closed forms.
pub fn oracle_pair(seed: u64, i: usize) -> (SymbolSpec, SampledField, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i as u64));
    let g = Grid::centered(1, 16, 0.4);
    let dxi = g.dxi(0);
    if i % 5 == 4 {
        let modes: Vec<(f64, Complex64)> = (-4..=4).map(|m| (m as f64 * dxi, cplx(&mut rng))).collect();
        let f = SampledField::from_fn(g.clone(), |x| {
            modes.iter().map(|(k, c)| c * Complex64::from_polar(1.0, k * x[0])).sum()
        });
        let k = 2.0 * dxi * [1.0, -1.0][rng.gen_range(0..2)];
        let (c1, c2) = (rng.gen_range(0.1..1.0), rng.gen_range(0.1..1.0));
        let a = SymbolSpec::expr(1, &format!("exp(i*{k}*x1)*({c1}*xi1 + {c2}*xi1^2) + 1 + xi1")).unwrap();
        return (a, f, 0.5);
    }
    let f = SampledField::new(g.clone(), (0..16).map(|_| cplx(&mut rng)).collect()).unwrap();
    let t = [0.0, 1.0][i % 2];
    let a = match i % 3 {
        0 => {
            let vals: Vec<Complex64> = (0..16 * 16).map(|_| cplx(&mut rng)).collect();
            SymbolSpec::array(SampledSymbol::new(SymbolGrid::for_field(&g, true), vals).unwrap())
        }
        1 => SymbolSpec::modulated(1, rng.gen_range(-2.0..2.0), rng.gen_range(0.1..0.6), vec![dxi * rng.gen_range(1..4) as f64])
            .unwrap(),
        _ => {
            let c = rng.gen_range(0.1..1.0);
            SymbolSpec::expr(1, &format!("exp(i*{}*x1)*xi1 + {c}*x1*xi1^2 + 2", 3.0 * dxi)).unwrap()
        }
    };
    (a, f, t)
}

/// Relative error between the fast operator and the dense oracle.
pub fn oracle_error(a: &SymbolSpec, f: &SampledField, t: f64) -> f64 {
    let fast = apply_op(a, f, t).unwrap();
    let slow = kernel_oracle(a, t, &f.grid).unwrap().apply(f).unwrap();
    rel_err(&fast, &slow)
}

fn bump(x: f64, c: f64, r: f64) -> f64 {
    let t = (x - c) / r;
    if t.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - t * t)).exp()
    }
}

/// Largest |K(x_j, y_l)| of φ₁ Op(a) φ₂ over |j − l| ≥ gap, relative to the
/// largest kernel entry of Op(a). φ₁ and φ₂ are C_c^∞ bumps on the left and
/// right halves of the grid. Columns come from applying Op(a) to deltas.
pub fn cut_kernel_tail(a: &SymbolSpec, g: &Grid, gap: usize) -> f64 {
    let n = g.shape[0];
    let h = g.spacing[0];
    let half = g.upper(0).min(-g.origin[0]);
    let phi1 = |x: f64| bump(x, -0.5 * half, 0.4 * half);
    let phi2 = |x: f64| bump(x, 0.5 * half, 0.4 * half);
    let column = |l: usize, w: f64| {
        let mut e = SampledField::zeros(g.clone());
        e.values[l] = Complex64::new(w / h, 0.0);
        apply_op(a, &e, 0.0).unwrap()
    };
    let kmax = column(n / 2, 1.0).max_abs();
    let mut worst: f64 = 0.0;
    for l in 0..n {
        let w = phi2(g.coord(0, l));
        if w == 0.0 {
            continue;
        }
        let c = column(l, w);
        for (j, v) in c.values.iter().enumerate() {
            if j.abs_diff(l) >= gap {
                worst = worst.max((v * phi1(g.coord(0, j))).norm() / kmax);
            }
        }
    }
    worst
}

/// Per-annulus sup of |F r| / |F u| for k = 1..=top, with its least-squares
/// slope against k.
pub fn relative_profile(r: &SampledField, u: &SampledField) -> (Vec<f64>, Option<f64>) {
    let (rs, us) = (dft(r), dft(u));
    let top = top_annulus(&r.grid);
    let mut ks = Vec::new();
    let mut ratios = Vec::new();
    for k in 1..=top {
        let (lo, hi) = (2f64.powi(k), 2f64.powi(k + 1));
        let (mut nr, mut nu) = (0.0f64, 0.0f64);
        for (i, v) in rs.values.iter().enumerate() {
            let xi = rs.freq_point(i)[0].abs();
            if xi >= lo && xi < hi {
                nr = nr.max(v.norm());
                nu = nu.max(us.values[i].norm());
            }
        }
        ks.push(k as f64);
        ratios.push(nr / nu);
    }
    let logs: Vec<f64> = ratios.iter().map(|v| v.max(1e-300).log2()).collect();
    (ratios, ls_slope(&ks, &logs))
}

/// Residuals below this (relative to the composed output) are roundoff.
pub const COMPOSITION_FLOOR: f64 = 1e-12;

/// Op(a) Op(b) f − Op((a#b)_n) f measured against Op(a) Op(b) f.
pub fn composition_profile(a: &SymbolSpec, b: &SymbolSpec, f: &SampledField, n: usize) -> (Vec<f64>, Option<f64>) {
    let full = apply_op(a, &apply_op(b, f, 0.0).unwrap(), 0.0).unwrap();
    let sg = SymbolGrid::for_field(&f.grid, true);
    let c = SymbolSpec::array(compose_symbols(a, b, n, &sg).unwrap());
    let approx = apply_op(&c, f, 0.0).unwrap();
    let r = full.add(&approx.scale(Complex64::new(-1.0, 0.0))).unwrap();
    relative_profile(&r, &full)
}

/// Elliptic x-modulated multipliers (1 + A cos κx)⟨ξ⟩^s with A < 1.
pub fn elliptic_pairs(g: &Grid) -> Vec<(SymbolSpec, SymbolSpec)> {
    let k = g.dxi(0);
    let m = |s: f64, a: f64, j: f64| SymbolSpec::modulated(1, s, a, vec![j * k]).unwrap();
    vec![
        (m(1.0, 0.3, 2.0), m(1.0, 0.4, 3.0)),
        (m(2.0, 0.5, 1.0), m(-1.0, 0.2, 4.0)),
        (SymbolSpec::multiplier(1, 1.5), m(0.5, 0.6, 2.0)),
    ]
}

/// A one-sided Gaussian: broadband, with a jump at 0.
pub fn broadband(g: &Grid) -> SampledField {
    SampledField::from_fn(g.clone(), |x| {
        Complex64::new(if x[0] > 0.0 { (-4.0 * x[0] * x[0]).exp() } else { 0.0 }, 0.0)
    })
}
