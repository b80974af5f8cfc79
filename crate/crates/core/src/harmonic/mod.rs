//! Fourier transforms of indicators, mollified counts and the
//! Poisson-summation split of the smoothed count into a volume term and a
//! remainder over the dual lattice.
//!
//! Transforms use `𝓕f(ξ) = ∫ f(x) e^{−2πi x·ξ} dx`.

pub mod bessel;
pub mod mollifier;

pub use bessel::{bessel_j, bessel_j_with_bound};
pub use mollifier::{transform as mollifier_table, RadialTransform, DECAY_ORDER};

use crate::diophantine::{GrowthClass, PsiFunction};
use crate::error::{check_dim, Error, Result};
use crate::geometry::{norm, unit_ball_volume, Region, SplitSpace};
use crate::lattice::{sum_over, ProductRegion};
use crate::modelset::ModelSetSpec;
use crate::quad;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Dual points allowed in one truncated sum.
pub const MAX_DUAL_POINTS: f64 = 1e7;

fn sinc_scaled(h: f64, xi: f64) -> f64 {
    // sin(2πhξ)/(πξ)
    let u = 2.0 * PI * h * xi;
    if u.abs() < 1e-4 {
        let u2 = u * u;
        2.0 * h * (1.0 - u2 / 6.0 + u2 * u2 / 120.0)
    } else {
        u.sin() / (PI * xi)
    }
}

fn phase(center: &[f64], xi: &[f64]) -> Complex64 {
    let d: f64 = center.iter().zip(xi).map(|(c, x)| c * x).sum();
    Complex64::from_polar(1.0, -2.0 * PI * d)
}

/// Centred transform of a ball of radius `r` in dimension `m` at `|ξ| = u`.
fn ball_transform(m: usize, r: f64, u: f64) -> f64 {
    let z = 2.0 * PI * r * u;
    // r^m π^{m/2} G_{m/2}(2πr|ξ|)
    r.powi(m as i32) * PI.powf(m as f64 / 2.0) * bessel::g_unchecked(m as u32, z)
}

/// `𝓕χ_Ω(ξ)`.
pub fn fourier_indicator(region: &Region, xi: &[f64]) -> Result<Complex64> {
    check_dim(region.dim(), xi.len())?;
    Ok(fourier_unchecked(region, xi))
}

pub(crate) fn fourier_unchecked(region: &Region, xi: &[f64]) -> Complex64 {
    match region {
        Region::Ball { center, .. } if xi.iter().all(|x| *x == 0.0) => {
            Complex64::new(region.volume(), 0.0)
        }
        Region::Ball { center, radius } => {
            phase(center, xi) * ball_transform(center.len(), *radius, norm(xi))
        }
        Region::Box { center, halfwidths } => {
            let p: f64 = halfwidths.iter().zip(xi).map(|(h, x)| sinc_scaled(*h, *x)).product();
            phase(center, xi) * p
        }
        Region::IntervalUnion { intervals } => intervals
            .iter()
            .map(|(a, b)| {
                let c = 0.5 * (a + b);
                phase(&[c], xi) * sinc_scaled(0.5 * (b - a), xi[0])
            })
            .sum(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegionTag {
    Ball,
    Box,
    Intervals,
}

/// Radial decay `|𝓕χ_Ω(ξ)| ≤ min(vol Ω, C|ξ|^{−L})`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DecayClass {
    pub order: f64,
    pub constant: f64,
    pub tag: RegionTag,
}

pub fn decay_class(region: &Region) -> DecayClass {
    match region {
        Region::Ball { center, .. } if center.len() == 1 => {
            DecayClass { order: 1.0, constant: 1.0 / PI, tag: RegionTag::Ball }
        }
        Region::Ball { center, radius } => {
            let m = center.len() as f64;
            let constant = 10.0
                * radius.powf(m / 2.0)
                * (2.0 / PI).sqrt()
                * (2.0 * PI * radius).powf(-0.5);
            DecayClass { order: (m + 1.0) / 2.0, constant, tag: RegionTag::Ball }
        }
        Region::Box { halfwidths, .. } => {
            let m = halfwidths.len();
            let best = (0..m)
                .map(|i| (0..m).filter(|j| *j != i).map(|j| 2.0 * halfwidths[j]).product::<f64>())
                .fold(0.0, f64::max);
            DecayClass { order: 1.0, constant: (m as f64).sqrt() * best / PI, tag: RegionTag::Box }
        }
        Region::IntervalUnion { intervals } => DecayClass {
            order: 1.0,
            constant: intervals.len() as f64 / PI,
            tag: RegionTag::Intervals,
        },
    }
}

impl DecayClass {
    pub fn bound(&self, volume: f64, u: f64) -> f64 {
        if u <= 0.0 {
            volume
        } else {
            volume.min(self.constant * u.powf(-self.order))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MollifierParams {
    pub a_down: f64,
    pub a_left: f64,
    #[serde(default = "one")]
    pub sigma: f64,
    #[serde(default = "half")]
    pub delta: f64,
}

fn one() -> f64 {
    1.0
}
fn half() -> f64 {
    0.5
}

impl MollifierParams {
    pub fn new(a_down: f64, a_left: f64) -> Result<Self> {
        let p = MollifierParams { a_down, a_left, sigma: 1.0, delta: 0.5 };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.a_down.is_finite()
            && self.a_down > 0.0
            && self.a_left.is_finite()
            && self.a_left > 0.0
            && self.a_left <= 1.0
            && self.sigma > 0.0
            && self.sigma <= 1.0
            && self.delta > 0.0
            && self.delta < 1.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("invalid mollifier parameters {self:?}")))
        }
    }
}

/// `[𝓕ρ▽](a▽ξ▽)·[𝓕ρ◁](a◁ξ◁)`.
pub fn mollifier_fourier(params: &MollifierParams, split: SplitSpace, xi: &[f64]) -> Result<f64> {
    check_dim(split.dim(), xi.len())?;
    let down = mollifier::transform(split.d_down).value(params.a_down * norm(split.down(xi)));
    let left = mollifier::transform(split.d_left).value(params.a_left * norm(split.left(xi)));
    Ok(down * left)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SmoothedCount {
    pub value: f64,
    /// Set when an inner approximation is empty; `value` is then 0.
    pub empty: bool,
}

/// `(χ_A * ρ_a)(x)` for one factor of the product region.
fn smooth_factor(region: &Region, a: f64, x: &[f64]) -> f64 {
    match region {
        Region::IntervalUnion { intervals } => intervals
            .iter()
            .map(|(lo, hi)| mollifier::cdf((x[0] - lo) / a) - mollifier::cdf((x[0] - hi) / a))
            .sum(),
        Region::Ball { center, radius } if center.len() == 1 => {
            let (lo, hi) = (center[0] - radius, center[0] + radius);
            mollifier::cdf((x[0] - lo) / a) - mollifier::cdf((x[0] - hi) / a)
        }
        Region::Box { center, halfwidths } if center.len() == 1 => {
            let (lo, hi) = (center[0] - halfwidths[0], center[0] + halfwidths[0]);
            mollifier::cdf((x[0] - lo) / a) - mollifier::cdf((x[0] - hi) / a)
        }
        Region::Ball { center, radius } => {
            let m = center.len();
            let d = norm(&center.iter().zip(x).map(|(c, x)| x - c).collect::<Vec<_>>());
            let r = *radius;
            let breaks = [(r - d).abs() / a, (r + d) / a];
            quad::integrate_pieces(
                |s| mollifier::radius_density(m, s) * sphere_fraction_ball(m, d, r, a * s),
                0.0,
                1.0,
                &breaks,
                1e-13,
            )
        }
        Region::Box { center, halfwidths } => {
            let p = [x[0] - center[0], x[1] - center[1]];
            let h = [halfwidths[0], halfwidths[1]];
            let mut breaks = Vec::new();
            for i in 0..2 {
                breaks.push((p[i] - h[i]).abs() / a);
                breaks.push((p[i] + h[i]).abs() / a);
            }
            for sx in [-1.0, 1.0] {
                for sy in [-1.0, 1.0] {
                    breaks.push(((p[0] - sx * h[0]).powi(2) + (p[1] - sy * h[1]).powi(2)).sqrt() / a);
                }
            }
            quad::integrate_pieces(
                |s| mollifier::radius_density(2, s) * circle_fraction_box(p, h, a * s),
                0.0,
                1.0,
                &breaks,
                1e-13,
            )
        }
    }
}

/// Fraction of the sphere of radius `r` about a point at distance `d` from
/// the centre of a ball of radius `big` that lies inside that ball.
fn sphere_fraction_ball(m: usize, d: f64, big: f64, r: f64) -> f64 {
    if r == 0.0 || d == 0.0 {
        return if d + r < big { 1.0 } else { 0.0 };
    }
    let kappa = (d * d + r * r - big * big) / (2.0 * r * d);
    if kappa <= -1.0 {
        return 1.0;
    }
    if kappa >= 1.0 {
        return 0.0;
    }
    match m {
        2 => kappa.acos() / PI,
        3 => 0.5 * (1.0 - kappa),
        _ => {
            let cap = 0.5
                * statrs::function::beta::beta_reg((m as f64 - 1.0) / 2.0, 0.5, 1.0 - kappa * kappa);
            if kappa >= 0.0 { cap } else { 1.0 - cap }
        }
    }
}

/// Fraction of the circle of radius `r` about `p` inside `[−h, h]²`.
fn circle_fraction_box(p: [f64; 2], h: [f64; 2], r: f64) -> f64 {
    let inside = |q: [f64; 2]| q[0].abs() <= h[0] && q[1].abs() <= h[1];
    if r == 0.0 {
        return if inside(p) { 1.0 } else { 0.0 };
    }
    let tau = 2.0 * PI;
    let mut angles = vec![0.0, tau];
    for s in [-1.0, 1.0] {
        let c = (s * h[0] - p[0]) / r;
        if c.abs() <= 1.0 {
            let a = c.acos();
            angles.push(a);
            angles.push(tau - a);
        }
        let v = (s * h[1] - p[1]) / r;
        if v.abs() <= 1.0 {
            let a = v.asin();
            angles.push(a.rem_euclid(tau));
            angles.push((PI - a).rem_euclid(tau));
        }
    }
    angles.sort_by(f64::total_cmp);
    let mut total = 0.0;
    for w in angles.windows(2) {
        let len = w[1] - w[0];
        if len <= 0.0 {
            continue;
        }
        let mid = 0.5 * (w[0] + w[1]);
        if inside([p[0] + r * mid.cos(), p[1] + r * mid.sin()]) {
            total += len;
        }
    }
    total / tau
}

fn factor_supported(region: &Region) -> Result<()> {
    if let Region::Box { halfwidths, .. } = region {
        if halfwidths.len() >= 3 {
            return Err(Error::Unsupported(
                "mollified box indicators are available in dimensions 1 and 2".into(),
            ));
        }
    }
    Ok(())
}

/// The sets `A = (tΩ▽)^±_{a▽}` and `B = (Ω◁)^±_{a◁}`, or `None` when an
/// inner approximation is empty.
fn approximations(
    spec: &ModelSetSpec,
    t: f64,
    params: &MollifierParams,
    sign: Sign,
) -> Result<Option<(Region, Region)>> {
    params.validate()?;
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::InvalidParameter(format!("scale t = {t} must be positive")));
    }
    if params.a_down >= t / 4.0 {
        return Err(Error::InvalidParameter(format!(
            "smoothing radius a_down = {} must be below t/4 = {}",
            params.a_down,
            t / 4.0
        )));
    }
    factor_supported(&spec.search)?;
    factor_supported(&spec.window)?;
    let f = sign.factor();
    let a = spec.search.dilate(t)?.inflate(f * params.a_down);
    let b = spec.window.inflate(f * params.a_left);
    Ok(a.zip(b))
}

/// `Σ_γ (χ_{(tΩ▽×Ω◁)^±} * ρ^{(a▽,a◁)})(γ − s)`.
pub fn smoothed_count(
    spec: &ModelSetSpec,
    t: f64,
    params: &MollifierParams,
    sign: Sign,
) -> Result<SmoothedCount> {
    let Some((a, b)) = approximations(spec, t, params, sign)? else {
        return Ok(SmoothedCount { value: 0.0, empty: true });
    };
    let support_a = a.inflate(params.a_down).expect("outer set is nonempty");
    let support_b = b.inflate(params.a_left).expect("outer set is nonempty");
    let split = spec.split;
    let region = ProductRegion { split, down: &support_a, left: &support_b };
    let value = sum_over(&spec.lattice, region, &spec.neg_shift(), |_, x| {
        let down = smooth_factor(&a, params.a_down, split.down(x));
        if down == 0.0 {
            return 0.0;
        }
        down * smooth_factor(&b, params.a_left, split.left(x))
    })?;
    Ok(SmoothedCount { value, empty: false })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PoissonBreakdown {
    pub volume_term: f64,
    pub remainder_term: f64,
    /// Largest of the two truncation radii.
    pub truncation_radius: f64,
    pub radius_down: f64,
    pub radius_left: f64,
    pub tail_bound: f64,
    pub dual_points: u64,
    pub empty: bool,
}

impl PoissonBreakdown {
    pub fn total(&self) -> f64 {
        self.volume_term + self.remainder_term
    }
}

/// Radial majorant `g(u) = min(vol, C u^{−L}) · E(a u)` of one factor.
struct Majorant<'a> {
    dim: usize,
    volume: f64,
    decay: DecayClass,
    a: f64,
    table: &'a RadialTransform,
}

impl Majorant<'_> {
    fn at(&self, u: f64) -> f64 {
        self.decay.bound(self.volume, u) * self.table.envelope(self.a * u)
    }

    /// Upper bound for `∫_{|y| > lo} g((|y| − D)⁺) dy` over `R^dim`.
    fn outer_integral(&self, lo: f64, d: f64) -> f64 {
        let m = self.dim as i32;
        let area = mollifier::sphere_area(self.dim);
        let step = 0.01 / self.a;
        let stop = d + 1e4 / self.a;
        let mut r = lo.max(0.0);
        let mut acc = 0.0;
        while r < stop {
            let next = r + step.max(r / 64.0);
            let shell = area * (next.powi(m) - r.powi(m)) / m as f64;
            acc += shell * self.at((r - d).max(0.0));
            r = next;
        }
        // Beyond `stop`: g(u) ≤ vol · E(a u) with the polynomial tail of E,
        // and r ≤ 2u once u ≥ D.
        let u0 = (r - d).max(d).max(1e-300);
        let k = self.table.envelope(self.a * u0) * (1.0 + self.a * u0).powi(DECAY_ORDER);
        let tail = area
            * self.volume
            * k
            * 2f64.powi(m - 1)
            * self.a.powi(-DECAY_ORDER)
            * u0.powi(m - DECAY_ORDER)
            / (DECAY_ORDER - m) as f64;
        acc + tail
    }
}

/// `V + R` for the smoothed count, with `R` truncated to
/// `|ξ▽| ≤ ρ▽, |ξ◁| ≤ ρ◁` and an integral-comparison bound on the rest.
pub fn poisson_dual_sum(
    spec: &ModelSetSpec,
    t: f64,
    params: &MollifierParams,
    sign: Sign,
    tolerance: f64,
) -> Result<PoissonBreakdown> {
    if !(tolerance > 0.0) {
        return Err(Error::InvalidParameter("tolerance must be positive".into()));
    }
    let Some((a, b)) = approximations(spec, t, params, sign)? else {
        return Ok(PoissonBreakdown {
            volume_term: 0.0,
            remainder_term: 0.0,
            truncation_radius: 0.0,
            radius_down: 0.0,
            radius_left: 0.0,
            tail_bound: 0.0,
            dual_points: 0,
            empty: true,
        });
    };
    let split = spec.split;
    if split.d_down >= DECAY_ORDER as usize || split.d_left >= DECAY_ORDER as usize {
        return Err(Error::Unsupported("dimension too large for the tail bound".into()));
    }
    let covol = spec.lattice.covolume();
    let (vol_a, vol_b) = (a.volume(), b.volume());
    let volume_term = vol_a * vol_b / covol;

    let table_down = mollifier::transform(split.d_down);
    let table_left = mollifier::transform(split.d_left);
    let g_down = Majorant {
        dim: split.d_down,
        volume: vol_a,
        decay: decay_class(&a),
        a: params.a_down,
        table: &table_down,
    };
    let g_left = Majorant {
        dim: split.d_left,
        volume: vol_b,
        decay: decay_class(&b),
        a: params.a_left,
        table: &table_left,
    };
    let dual = spec.lattice.dual();
    let basis = dual.basis();
    let d_half: f64 = 0.5 * basis.column_iter().map(|c| c.norm()).sum::<f64>();

    let all_down = g_down.outer_integral(0.0, d_half);
    let all_left = g_left.outer_integral(0.0, d_half);
    let mut rho_down = 2.0 / params.a_down;
    let mut rho_left = 2.0 / params.a_left;
    let tail_bound = loop {
        let out_down = g_down.outer_integral(rho_down - d_half, d_half) * all_left;
        let out_left = all_down * g_left.outer_integral(rho_left - d_half, d_half);
        let expected = covol
            * unit_ball_volume(split.d_down)
            * (rho_down + d_half).powi(split.d_down as i32)
            * unit_ball_volume(split.d_left)
            * (rho_left + d_half).powi(split.d_left as i32);
        if expected > MAX_DUAL_POINTS {
            return Err(Error::ToleranceUnreachable(format!(
                "tolerance {tolerance} needs about {expected:.3e} dual points"
            )));
        }
        if out_down + out_left < tolerance {
            break out_down + out_left;
        }
        if out_down >= out_left {
            rho_down *= 1.5;
        } else {
            rho_left *= 1.5;
        }
    };

    let ball_down = Region::ball(vec![0.0; split.d_down], rho_down)?;
    let ball_left = Region::ball(vec![0.0; split.d_left], rho_left)?;
    let region = ProductRegion { split, down: &ball_down, left: &ball_left };
    let zero = vec![0.0; split.dim()];
    let s = &spec.shift;
    let count = std::sync::atomic::AtomicU64::new(0);
    let sum = sum_over(&dual, region, &zero, |k, xi| {
        if k.iter().all(|c| *c == 0) {
            return 0.0;
        }
        count.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
        let (xd, xl) = (split.down(xi), split.left(xi));
        let m = table_down.value(params.a_down * norm(xd)) * table_left.value(params.a_left * norm(xl));
        if m == 0.0 {
            return 0.0;
        }
        let f = fourier_unchecked(&a, xd) * fourier_unchecked(&b, xl) * phase(s, xi);
        f.re * m
    })?;
    Ok(PoissonBreakdown {
        volume_term,
        remainder_term: sum / covol,
        truncation_radius: rho_down.max(rho_left),
        radius_down: rho_down,
        radius_left: rho_left,
        tail_bound,
        dual_points: count.into_inner(),
        empty: false,
    })
}

/// Smoothing radii balancing the volume error against the dual remainder.
pub fn choose_params(
    t: f64,
    s: f64,
    psi: &PsiFunction,
    delta: f64,
    split: SplitSpace,
    l_down: f64,
) -> Result<MollifierParams> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!("delta = {delta} must lie in (0, 1)")));
    }
    if !(s > 0.0) {
        return Err(Error::InvalidParameter(format!("regularity s = {s} must be positive")));
    }
    let pt = psi.eval(t);
    if !(pt > 1.0) {
        return Err(Error::InvalidParameter(format!("psi(t) = {pt} must exceed 1")));
    }
    let (sigma, a_down) = match psi.growth() {
        GrowthClass::Slow => (1.0, t.sqrt()),
        GrowthClass::Speed(mu) => {
            let (dd, dl) = (split.d_down as f64, split.d_left as f64);
            let sigma = dd / (s * mu * (1.0 - delta) * (dd - l_down + 1.0) + l_down + (1.0 - delta) * dl * mu);
            (sigma, t.powf(1.0 + sigma * mu * (-s + delta * s)))
        }
    };
    let ps = psi.eval(t.powf(sigma));
    if !(ps > 1.0) {
        return Err(Error::InvalidParameter(format!("psi(t^sigma) = {ps} must exceed 1")));
    }
    Ok(MollifierParams { a_down, a_left: ps.powf(-1.0 + delta), sigma: sigma.min(1.0), delta })
}
