//! Bessel functions of the first kind for integer and half-integer order.

use crate::error::{Error, Result};
use std::f64::consts::PI;

pub const MAX_ORDER: f64 = 30.0;
pub const MAX_ARG: f64 = 1e6;
const SERIES_LIMIT: f64 = 5.0;

/// `Γ(n/2)` for a positive integer `n`.
pub(crate) fn gamma_half(n: u32) -> f64 {
    if n.is_multiple_of(2) {
        (1..n / 2).map(f64::from).product()
    } else {
        // Γ(1/2) = √π, Γ(k + 1/2) = (k − 1/2) Γ(k − 1/2)
        let mut g = PI.sqrt();
        let mut k = 1;
        while k < n {
            g *= k as f64 / 2.0;
            k += 2;
        }
        g
    }
}

fn check(nu: f64, x: f64) -> Result<u32> {
    let two = 2.0 * nu;
    if !(0.0..=MAX_ORDER).contains(&nu) || two.fract() != 0.0 {
        return Err(Error::InvalidParameter(format!(
            "Bessel order {nu} must be an integer or half-integer in [0, {MAX_ORDER}]"
        )));
    }
    if !(0.0..=MAX_ARG).contains(&x) {
        return Err(Error::InvalidParameter(format!("Bessel argument {x} outside [0, {MAX_ARG}]")));
    }
    Ok(two as u32)
}

/// `J_ν(x)` for `ν ∈ {0, 1/2, 1, …, 30}` and `0 ≤ x ≤ 10⁶`.
pub fn bessel_j(nu: f64, x: f64) -> Result<f64> {
    let two = check(nu, x)?;
    Ok(j_unchecked(two, x).0)
}

/// `J_ν(x)` together with an estimate of its absolute error.
pub fn bessel_j_with_bound(nu: f64, x: f64) -> Result<(f64, f64)> {
    let two = check(nu, x)?;
    Ok(j_unchecked(two, x))
}

/// `J_{two/2}(x)` and an error estimate.
pub(crate) fn j_unchecked(two: u32, x: f64) -> (f64, f64) {
    let nu = two as f64 / 2.0;
    if x == 0.0 {
        return (if two == 0 { 1.0 } else { 0.0 }, 0.0);
    }
    if x <= SERIES_LIMIT {
        let v = (0.5 * x).powf(nu) * series_g(two, x);
        return (v, 1e-15 * (1.0 + v.abs()));
    }
    if x >= (nu * nu).max(50.0) {
        return hankel(nu, x);
    }
    let v = if two.is_multiple_of(2) { miller_int(two / 2, x) } else { spherical(two / 2, x) };
    (v, 1e-14)
}

/// Ascending series of `G_ν(z) = J_ν(z)/(z/2)^ν`.
fn series_g(two: u32, z: f64) -> f64 {
    let nu = two as f64 / 2.0;
    let q = -0.25 * z * z;
    let mut term = 1.0 / gamma_half(two + 2);
    let mut sum = term;
    for k in 1..200 {
        term *= q / (k as f64 * (k as f64 + nu));
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

/// `G_ν(z) = J_ν(z)/(z/2)^ν`, with `G_ν(0) = 1/Γ(ν+1)`.
pub(crate) fn g_unchecked(two: u32, z: f64) -> f64 {
    if z <= SERIES_LIMIT {
        series_g(two, z)
    } else {
        j_unchecked(two, z).0 / (0.5 * z).powf(two as f64 / 2.0)
    }
}

fn hankel(nu: f64, x: f64) -> (f64, f64) {
    let mu = 4.0 * nu * nu;
    let mut p = 0.0;
    let mut q = 0.0;
    let mut a = 1.0f64;
    let mut last = f64::INFINITY;
    let mut omitted = 0.0;
    for k in 0..200u32 {
        let term = a.abs();
        if term > last {
            omitted = last;
            break;
        }
        if k % 2 == 0 {
            p += if (k / 2) % 2 == 0 { a } else { -a };
        } else {
            q += if (k / 2) % 2 == 0 { a } else { -a };
        }
        if term < 1e-17 {
            omitted = term;
            break;
        }
        last = term;
        let j = (2 * k + 1) as f64;
        a *= (mu - j * j) / ((k + 1) as f64 * 8.0 * x);
        if a == 0.0 {
            break;
        }
    }
    let chi = x - (0.5 * nu + 0.25) * PI;
    let amp = (2.0 / (PI * x)).sqrt();
    (amp * (p * chi.cos() - q * chi.sin()), amp * omitted + 1e-16 * x * amp)
}

const BIG: f64 = 1e200;

/// Miller backward recurrence, normalised by `J₀ + 2ΣJ_{2k} = 1`.
fn miller_int(n: u32, x: f64) -> f64 {
    let top = (n as f64).max(x);
    let mut m = (top + 30.0 + 2.0 * (40.0 * top).sqrt()) as u32;
    m += m % 2;
    let (mut b1, mut b) = (0.0f64, 1e-30f64);
    let mut sum = 0.0;
    let mut result = 0.0;
    for k in (1..=m).rev() {
        // b = b_k, b1 = b_{k+1}
        if k == n {
            result = b;
        }
        if k % 2 == 0 {
            sum += 2.0 * b;
        }
        let prev = 2.0 * k as f64 / x * b - b1;
        b1 = b;
        b = prev;
        if b.abs() > BIG {
            b /= BIG;
            b1 /= BIG;
            sum /= BIG;
            result /= BIG;
        }
    }
    if n == 0 {
        result = b;
    }
    sum += b;
    result / sum
}

/// `J_{n+1/2}(x)` via the spherical Bessel function `j_n`.
fn spherical(n: u32, x: f64) -> f64 {
    let j0 = x.sin() / x;
    let j1 = x.sin() / (x * x) - x.cos() / x;
    let jn = if n == 0 {
        j0
    } else if (n as f64) <= x {
        let (mut a, mut b) = (j0, j1);
        for k in 1..n {
            let c = (2 * k + 1) as f64 / x * b - a;
            a = b;
            b = c;
        }
        b
    } else {
        let top = n as f64;
        let m = (top + 30.0 + 2.0 * (40.0 * top).sqrt()) as u32;
        let (mut b1, mut b) = (0.0f64, 1e-30f64);
        let mut at_n = 0.0;
        let mut at_1 = 0.0;
        for k in (1..=m).rev() {
            if k == n {
                at_n = b;
            }
            if k == 1 {
                at_1 = b;
            }
            let prev = (2 * k + 1) as f64 / x * b - b1;
            b1 = b;
            b = prev;
            if b.abs() > BIG {
                b /= BIG;
                b1 /= BIG;
                at_n /= BIG;
                at_1 /= BIG;
            }
        }
        if j0.abs() >= j1.abs() { at_n * j0 / b } else { at_n * j1 / at_1 }
    };
    (2.0 * x / PI).sqrt() * jn
}
