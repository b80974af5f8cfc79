//! The radial bump `exp(−1/(1−|x|²))`, its cached Fourier transforms and
//! the one-dimensional distribution function.

use super::bessel::{gamma_half, g_unchecked};
use crate::exec;
use crate::quad;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

/// Decay order checked on the cached grid.
pub const DECAY_ORDER: i32 = 12;
/// Upper end of the cached transform grid.
pub const GRID_END: f64 = 200.0;
const SAFETY: f64 = 10.0;

pub(crate) fn bump(x: f64) -> f64 {
    if x.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - x * x)).exp()
    }
}

fn bump_prime(x: f64) -> f64 {
    if x.abs() >= 1.0 {
        0.0
    } else {
        let d = 1.0 - x * x;
        bump(x) * (-2.0 * x / (d * d))
    }
}

/// Surface area of the unit sphere in `R^m`.
pub(crate) fn sphere_area(m: usize) -> f64 {
    2.0 * PI.powf(m as f64 / 2.0) / gamma_half(m as u32)
}

fn radial_nodes() -> &'static (Vec<f64>, Vec<f64>) {
    static NODES: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    NODES.get_or_init(|| quad::composite_rule(0.0, 1.0, 128, 16))
}

/// Mass normaliser `|S^{m−1}| ∫₀¹ b(r) r^{m−1} dr`.
fn mass(m: usize) -> f64 {
    let (x, w) = radial_nodes();
    let i: f64 = x.iter().zip(w).map(|(r, w)| w * bump(*r) * r.powi(m as i32 - 1)).sum();
    sphere_area(m) * i
}

/// Radial density of `|X|` for `X ∼ ρ_m`; integrates to one over `[0, 1]`.
pub(crate) fn radius_density(m: usize, s: f64) -> f64 {
    static MASS: OnceLock<Mutex<HashMap<usize, f64>>> = OnceLock::new();
    let z = *MASS.get_or_init(Default::default).lock().unwrap().entry(m).or_insert_with(|| mass(m));
    sphere_area(m) * s.powi(m as i32 - 1) * bump(s) / z
}

/// Quintic Hermite interpolation on a uniform grid.
#[derive(Debug)]
pub(crate) struct Quintic {
    start: f64,
    h: f64,
    f: Vec<f64>,
    d1: Vec<f64>,
    d2: Vec<f64>,
}

impl Quintic {
    fn eval(&self, x: f64) -> f64 {
        let n = self.f.len() - 1;
        let pos = ((x - self.start) / self.h).max(0.0);
        let i = (pos.floor() as usize).min(n - 1);
        let t = pos - i as f64;
        let h = self.h;
        let (t2, t3) = (t * t, t * t * t);
        let (t4, t5) = (t3 * t, t3 * t2);
        let h0 = 1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5;
        let h1 = t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5;
        let h2 = 0.5 * (t2 - 3.0 * t3 + 3.0 * t4 - t5);
        let h3 = 0.5 * (t3 - 2.0 * t4 + t5);
        let h4 = -4.0 * t3 + 7.0 * t4 - 3.0 * t5;
        let h5 = 10.0 * t3 - 15.0 * t4 + 6.0 * t5;
        self.f[i] * h0
            + h * self.d1[i] * h1
            + h * h * self.d2[i] * h2
            + h * h * self.d2[i + 1] * h3
            + h * self.d1[i + 1] * h4
            + self.f[i + 1] * h5
    }
}

/// Cached `𝓕ρ_m` as a function of `|ξ|`.
#[derive(Debug)]
pub struct RadialTransform {
    pub dim: usize,
    interp: Quintic,
    envelope: Vec<f64>,
    /// `max |𝓕ρ(u)|(1+u)^12` over the grid.
    pub decay_constant: f64,
}

impl RadialTransform {
    fn build(m: usize) -> Self {
        let h = if m == 1 { 0.02 } else { 0.05 };
        let n = (GRID_END / h).round() as usize;
        let (xs, ws) = radial_nodes();
        let z = mass(m);
        let rows: Vec<[f64; 3]> = if m == 1 {
            exec::map_range(n + 1, |i| {
                let u = i as f64 * h;
                let mut acc = [0.0; 3];
                for (r, w) in xs.iter().zip(ws) {
                    let wb = w * bump(*r);
                    let tr = 2.0 * PI * r;
                    let (s, c) = (tr * u).sin_cos();
                    acc[0] += wb * c;
                    acc[1] -= wb * tr * s;
                    acc[2] -= wb * tr * tr * c;
                }
                acc.map(|v| 2.0 * v / z)
            })
        } else {
            let two = (m - 2) as u32;
            let nu = two as f64 / 2.0;
            let c = 2.0 * PI.powf(nu + 1.0) / z;
            exec::map_range(n + 1, |i| {
                let u = i as f64 * h;
                let (mut i0, mut i1, mut i2) = (0.0, 0.0, 0.0);
                for (r, w) in xs.iter().zip(ws) {
                    let wb = w * bump(*r) * r.powi(m as i32 - 1);
                    let zz = 2.0 * PI * u * r;
                    i0 += wb * g_unchecked(two, zz);
                    i1 += wb * r * r * g_unchecked(two + 2, zz);
                    i2 += wb * r.powi(4) * g_unchecked(two + 4, zz);
                }
                let p2 = 2.0 * PI * PI;
                [c * i0, -c * p2 * u * i1, -c * p2 * (i1 - p2 * u * u * i2)]
            })
        };
        let interp = Quintic {
            start: 0.0,
            h,
            f: rows.iter().map(|r| r[0]).collect(),
            d1: rows.iter().map(|r| r[1]).collect(),
            d2: rows.iter().map(|r| r[2]).collect(),
        };
        let mut cell_max: Vec<f64> = (0..n)
            .map(|i| {
                (0..=8)
                    .map(|k| interp.eval((i as f64 + k as f64 / 8.0) * h).abs())
                    .fold(0.0, f64::max)
                    + 1e-13
            })
            .collect();
        for i in (0..n.saturating_sub(1)).rev() {
            cell_max[i] = cell_max[i].max(cell_max[i + 1]);
        }
        let decay_constant = interp
            .f
            .iter()
            .enumerate()
            .map(|(i, f)| f.abs() * (1.0 + i as f64 * h).powi(DECAY_ORDER))
            .fold(0.0, f64::max);
        RadialTransform {
            dim: m,
            interp,
            envelope: cell_max.into_iter().map(|v| SAFETY * v).collect(),
            decay_constant,
        }
    }

    /// `𝓕ρ_m(ξ)` at `|ξ| = u`.
    pub fn value(&self, u: f64) -> f64 {
        let u = u.abs();
        if u >= GRID_END {
            0.0
        } else {
            self.interp.eval(u)
        }
    }

    /// Nonincreasing upper bound for `|𝓕ρ_m|` on `[u, ∞)`.
    pub fn envelope(&self, u: f64) -> f64 {
        let u = u.abs();
        if u >= GRID_END {
            // Continue the last cell bound with the verified polynomial decay.
            let last = *self.envelope.last().expect("grid is nonempty");
            return last * ((1.0 + GRID_END) / (1.0 + u)).powi(DECAY_ORDER);
        }
        let i = ((u / self.interp.h) as usize).min(self.envelope.len() - 1);
        self.envelope[i]
    }

    /// Bound on `|𝓕ρ_m(u)|` beyond the grid, used as the value there.
    pub fn tail_error(&self) -> f64 {
        self.envelope(GRID_END)
    }
}

/// Cached transform table for dimension `m`.
pub fn transform(m: usize) -> Arc<RadialTransform> {
    static TABLES: OnceLock<Mutex<HashMap<usize, Arc<RadialTransform>>>> = OnceLock::new();
    let map = TABLES.get_or_init(Default::default);
    if let Some(t) = map.lock().unwrap().get(&m) {
        return t.clone();
    }
    let built = Arc::new(RadialTransform::build(m));
    map.lock().unwrap().entry(m).or_insert(built).clone()
}

/// Distribution function of the one-dimensional bump, `Φ(x) = ∫_{−1}^x ρ₁`.
pub(crate) fn cdf(x: f64) -> f64 {
    static TABLE: OnceLock<Quintic> = OnceLock::new();
    if x <= -1.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let q = TABLE.get_or_init(|| {
        let n = 2000;
        let h = 2.0 / n as f64;
        let z = mass(1);
        let (gx, gw) = quad::gauss_legendre(10);
        let mut f = vec![0.0; n + 1];
        for i in 0..n {
            let lo = -1.0 + i as f64 * h;
            let cell: f64 =
                gx.iter().zip(&gw).map(|(x, w)| 0.5 * h * w * bump(lo + 0.5 * h * (x + 1.0))).sum();
            f[i + 1] = f[i] + cell / z;
        }
        let total = f[n];
        let f: Vec<f64> = f.into_iter().map(|v| v / total).collect();
        let d1 = (0..=n).map(|i| bump(-1.0 + i as f64 * h) / z).collect();
        let d2 = (0..=n).map(|i| bump_prime(-1.0 + i as f64 * h) / z).collect();
        Quintic { start: -1.0, h, f, d1, d2 }
    });
    q.eval(x).clamp(0.0, 1.0)
}
