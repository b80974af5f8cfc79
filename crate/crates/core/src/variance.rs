//! Number variance: the diffraction sum over the dual lattice, Monte Carlo
//! averages over lattice translates, Fourier coefficients of the
//! discrepancy and lower-bound witnesses.

use crate::diophantine::{liouvillean_lattice, LiouvilleData, PsiFunction};
use crate::error::{check_dim, Error, Result};
use crate::exec;
use crate::geometry::{norm, unit_ball_volume, Region, SplitSpace};
use crate::harmonic::{decay_class, fourier_indicator, DecayClass, MAX_DUAL_POINTS};
use crate::lattice::{enumerate_in, sum_over, Lattice, LatticePoint, ProductRegion};
use crate::modelset::{self, ModelSetSpec};
use num_bigint::{BigInt, BigUint};
use num_complex::Complex64;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Majorant of `|𝓕χ_Ω|²` for one factor.
enum SquareEnvelope {
    Radial { dim: usize, volume: f64, decay: DecayClass },
    /// Boxes in dimension ≥ 2, bounded coordinate by coordinate.
    Product { halfwidths: Vec<f64> },
}

impl SquareEnvelope {
    fn of(region: &Region) -> Self {
        match region {
            Region::Box { halfwidths, .. } if halfwidths.len() >= 2 => {
                SquareEnvelope::Product { halfwidths: halfwidths.clone() }
            }
            r => SquareEnvelope::Radial { dim: r.dim(), volume: r.volume(), decay: decay_class(r) },
        }
    }

    /// Upper bound for `∫_{|y| > lo} h((|y| − D)⁺) dy`, `h` the majorant.
    fn outer(&self, lo: f64, d: f64) -> f64 {
        match self {
            SquareEnvelope::Radial { dim, volume, decay } => radial_outer(*dim, *volume, decay, lo, d),
            SquareEnvelope::Product { halfwidths } => {
                let m = halfwidths.len();
                let all: Vec<f64> = halfwidths.iter().map(|h| coord_outer(2.0 * h, 0.0, d)).collect();
                let lo_i = lo / (m as f64).sqrt();
                (0..m)
                    .map(|i| {
                        coord_outer(2.0 * halfwidths[i], lo_i, d)
                            * (0..m).filter(|j| *j != i).map(|j| all[j]).product::<f64>()
                    })
                    .sum()
            }
        }
    }
}

/// `∫_{|x| > lo} min(c, 1/(π(|x| − D)))² dx` on the line.
fn coord_outer(c: f64, lo: f64, d: f64) -> f64 {
    let lo = lo.max(0.0);
    let knee = d + 1.0 / (PI * c);
    let flat = (knee - lo).max(0.0) * c * c;
    let start = lo.max(knee);
    2.0 * (flat + 1.0 / (PI * PI * (start - d)))
}

fn radial_outer(m: usize, volume: f64, decay: &DecayClass, lo: f64, d: f64) -> f64 {
    let h = |u: f64| decay.bound(volume, u).powi(2);
    let two_l = 2.0 * decay.order;
    let area = if m == 1 { 2.0 } else { m as f64 * unit_ball_volume(m) };
    let knee = (decay.constant / volume).powf(1.0 / decay.order);
    let step = 0.01 * knee.min(1.0);
    let stop = 1e6 * (knee + d + 1.0);
    let mi = m as i32;
    let mut r = lo.max(0.0);
    let mut acc = 0.0;
    while r < stop {
        let next = r + step.max(r / 64.0);
        acc += area * (next.powi(mi) - r.powi(mi)) / m as f64 * h((r - d).max(0.0));
        r = next;
    }
    // r^{m−1} ≤ (2u)^{m−1} for u = r − D ≥ D.
    let u0 = (r - d).max(d);
    acc + area * decay.constant.powi(2) * 2f64.powi(mi - 1) * u0.powf(m as f64 - two_l)
        / (two_l - m as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Diffraction {
    pub value: f64,
    pub truncation_radius: f64,
    pub radius_down: f64,
    pub radius_left: f64,
    pub tail_bound: f64,
    pub dual_points: u64,
}

/// `NV_t = (t^{2d▽}/covol²) Σ_{ξ∈Γ†∖0} |𝓕χ_{Ω▽}(tξ▽)|² |𝓕χ_{Ω◁}(ξ◁)|²`,
/// truncated with an integral-comparison tail bound below `tolerance`.
pub fn nv_diffraction(
    lattice: &Lattice,
    split: SplitSpace,
    search: &Region,
    window: &Region,
    t: f64,
    tolerance: f64,
) -> Result<Diffraction> {
    check_dim(split.dim(), lattice.dim())?;
    check_dim(split.d_down, search.dim())?;
    check_dim(split.d_left, window.dim())?;
    if !(t > 0.0 && t.is_finite()) || !(tolerance > 0.0) {
        return Err(Error::InvalidParameter("t and tolerance must be positive".into()));
    }
    let a = search.dilate(t)?;
    let covol = lattice.covolume();
    let dual = lattice.dual();
    let d_half = 0.5 * dual.basis().column_iter().map(|c| c.norm()).sum::<f64>();
    let env_down = SquareEnvelope::of(&a);
    let env_left = SquareEnvelope::of(window);
    let all_down = env_down.outer(0.0, d_half);
    let all_left = env_left.outer(0.0, d_half);
    let mut rho_down = 4.0 * d_half;
    let mut rho_left = 4.0 * d_half;
    let tail_bound = loop {
        let out_down = env_down.outer(rho_down - d_half, d_half) * all_left / covol;
        let out_left = all_down * env_left.outer(rho_left - d_half, d_half) / covol;
        if out_down + out_left < tolerance {
            break out_down + out_left;
        }
        if out_down >= out_left {
            rho_down *= 1.5;
        } else {
            rho_left *= 1.5;
        }
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
    };
    let (value, n) = dual_square_sum(&dual, split, &a, window, rho_down, rho_left)?;
    Ok(Diffraction {
        value: value / (covol * covol),
        truncation_radius: rho_down.max(rho_left),
        radius_down: rho_down,
        radius_left: rho_left,
        tail_bound,
        dual_points: n,
    })
}

/// `Σ |𝓕χ_A(ξ▽)|²|𝓕χ_B(ξ◁)|²` over nonzero dual points in the product of balls.
fn dual_square_sum(
    dual: &Lattice,
    split: SplitSpace,
    a: &Region,
    b: &Region,
    rho_down: f64,
    rho_left: f64,
) -> Result<(f64, u64)> {
    let ball_down = Region::ball(vec![0.0; split.d_down], rho_down)?;
    let ball_left = Region::ball(vec![0.0; split.d_left], rho_left)?;
    let region = ProductRegion { split, down: &ball_down, left: &ball_left };
    let zero = vec![0.0; split.dim()];
    let count = std::sync::atomic::AtomicU64::new(0);
    let v = sum_over(dual, region, &zero, |k, xi| {
        if k.iter().all(|c| *c == 0) {
            return 0.0;
        }
        count.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
        let fa = crate::harmonic::fourier_unchecked(a, split.down(xi)).norm_sqr();
        if fa == 0.0 {
            return 0.0;
        }
        fa * crate::harmonic::fourier_unchecked(b, split.left(xi)).norm_sqr()
    })?;
    Ok((v, count.into_inner()))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MonteCarlo {
    pub nv: f64,
    pub nv_stderr: f64,
    pub l1: f64,
    pub l1_stderr: f64,
    pub mean: f64,
    pub mean_stderr: f64,
    pub n_samples: usize,
    pub seed: u64,
}

fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = exec::sum_slice(xs, |x| *x) / n;
    let var = exec::sum_slice(xs, |x| (x - mean).powi(2)) / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Discrepancies `Δ(s)` for `n` translates `s` uniform on the torus `E/Γ`.
pub fn sampled_discrepancies(spec: &ModelSetSpec, t: f64, n: usize, seed: u64) -> Result<Vec<(Vec<f64>, f64)>> {
    let shifts = spec.lattice.sample_fundamental(n, seed);
    exec::map_slice(&shifts, |s| {
        let shifted = spec.with_shift(s.clone());
        modelset::count(&shifted, t).map(|c| (s.clone(), c.discrepancy))
    })
    .into_iter()
    .collect()
}

/// Moments of `Δ` over random lattice translates.
pub fn nv_montecarlo(spec: &ModelSetSpec, t: f64, n_samples: usize, seed: u64) -> Result<MonteCarlo> {
    if n_samples < 100 {
        return Err(Error::InvalidParameter(format!("need at least 100 samples, got {n_samples}")));
    }
    let deltas: Vec<f64> = sampled_discrepancies(spec, t, n_samples, seed)?.into_iter().map(|x| x.1).collect();
    let sq: Vec<f64> = deltas.iter().map(|d| d * d).collect();
    let abs: Vec<f64> = deltas.iter().map(|d| d.abs()).collect();
    let (nv, nv_stderr) = mean_and_stderr(&sq);
    let (l1, l1_stderr) = mean_and_stderr(&abs);
    let (mean, mean_stderr) = mean_and_stderr(&deltas);
    Ok(MonteCarlo { nv, nv_stderr, l1, l1_stderr, mean, mean_stderr, n_samples, seed })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VarianceReport {
    pub t: f64,
    pub nv_diffraction: Option<f64>,
    pub truncation_radius: Option<f64>,
    pub tail_bound: Option<f64>,
    pub nv_mc: Option<f64>,
    pub mc_stderr: Option<f64>,
    pub l1_mc: Option<f64>,
    pub mean_mc: Option<f64>,
    pub mean_stderr: Option<f64>,
    pub n_samples: usize,
    pub seed: u64,
    /// Set when `|mean| > 5·stderr`.
    pub mean_flagged: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VarianceMode {
    Diffraction,
    Mc,
    Both,
}

pub fn variance_report(
    spec: &ModelSetSpec,
    t: f64,
    mode: VarianceMode,
    n_samples: usize,
    seed: u64,
    tolerance: f64,
) -> Result<VarianceReport> {
    let mut r = VarianceReport {
        t,
        nv_diffraction: None,
        truncation_radius: None,
        tail_bound: None,
        nv_mc: None,
        mc_stderr: None,
        l1_mc: None,
        mean_mc: None,
        mean_stderr: None,
        n_samples,
        seed,
        mean_flagged: false,
    };
    if mode != VarianceMode::Mc {
        let d = nv_diffraction(&spec.lattice, spec.split, &spec.search, &spec.window, t, tolerance)?;
        r.nv_diffraction = Some(d.value);
        r.truncation_radius = Some(d.truncation_radius);
        r.tail_bound = Some(d.tail_bound);
    }
    if mode != VarianceMode::Diffraction {
        let m = nv_montecarlo(spec, t, n_samples, seed)?;
        r.nv_mc = Some(m.nv);
        r.mc_stderr = Some(m.nv_stderr);
        r.l1_mc = Some(m.l1);
        r.mean_mc = Some(m.mean);
        r.mean_stderr = Some(m.mean_stderr);
        r.mean_flagged = m.mean.abs() > 5.0 * m.mean_stderr;
    }
    Ok(r)
}

/// `Δ̃_{γ†} = t^{d▽} 𝓕χ_{Ω▽}(−tγ†▽) 𝓕χ_{Ω◁}(−γ†◁) / covol`, the Fourier
/// coefficient `(1/covol)∫_{E/Γ} Δ(s) e^{−2πiγ†·s} ds`.
pub fn fourier_coefficient(
    lattice: &Lattice,
    split: SplitSpace,
    search: &Region,
    window: &Region,
    t: f64,
    dual_point: &[f64],
) -> Result<Complex64> {
    check_dim(split.dim(), dual_point.len())?;
    if dual_point.iter().all(|x| *x == 0.0) {
        return Err(Error::InvalidParameter(
            "the zero coefficient is the mean of the discrepancy, which vanishes".into(),
        ));
    }
    let down: Vec<f64> = split.down(dual_point).iter().map(|x| -t * x).collect();
    let left: Vec<f64> = split.left(dual_point).iter().map(|x| -x).collect();
    let v = fourier_indicator(search, &down)? * fourier_indicator(window, &left)?;
    Ok(v * t.powi(split.d_down as i32) / lattice.covolume())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct L1Witness {
    pub magnitude: f64,
    pub coords: Vec<i64>,
    pub point: Vec<f64>,
    pub candidates: usize,
}

/// Largest `|Δ̃_{γ†}|` over `0 < |γ†| ≤ radius` with `|γ†◁| ≤ 1/(2R)`, `R` the
/// circumradius of the window. Every such value bounds `‖Δ‖_{L¹}` from below.
pub fn l1_lower_witness(
    lattice: &Lattice,
    split: SplitSpace,
    search: &Region,
    window: &Region,
    t: f64,
    dual_search_radius: f64,
) -> Result<L1Witness> {
    let dual = lattice.dual();
    let left_cap = 0.5 / window.circumradius();
    let ball_down = Region::ball(vec![0.0; split.d_down], dual_search_radius)?;
    let ball_left = Region::ball(vec![0.0; split.d_left], left_cap.min(dual_search_radius))?;
    let region = ProductRegion { split, down: &ball_down, left: &ball_left };
    let pts = enumerate_in(&dual, region, &vec![0.0; split.dim()])?.points;
    let candidates: Vec<&LatticePoint> = pts
        .iter()
        .filter(|p| {
            let r = norm(&p.point);
            r > 0.0 && r <= dual_search_radius && norm(split.left(&p.point)) <= left_cap
        })
        .collect();
    if candidates.is_empty() {
        return Err(Error::InsufficientData(format!(
            "no dual point with 0 < |ξ| ≤ {dual_search_radius} and |ξ◁| ≤ {left_cap}"
        )));
    }
    let mags = exec::map_slice(&candidates, |p| {
        fourier_coefficient(lattice, split, search, window, t, &p.point).map(|c| c.norm())
    });
    let mut best: Option<(f64, usize)> = None;
    for (i, m) in mags.into_iter().enumerate() {
        let m = m?;
        if best.is_none_or(|(b, _)| m > b) {
            best = Some((m, i));
        }
    }
    let (magnitude, i) = best.expect("nonempty");
    Ok(L1Witness {
        magnitude,
        coords: candidates[i].coords.clone(),
        point: candidates[i].point.clone(),
        candidates: candidates.len(),
    })
}

/// Divergence gauge `f(t) = log(1+t)^β`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Gauge {
    pub beta: f64,
}

impl Gauge {
    /// `f(t)` given `log₂ t`, usable far beyond the range of doubles.
    pub fn eval_log2(&self, log2_t: f64) -> f64 {
        let ln = if log2_t > 60.0 {
            log2_t * std::f64::consts::LN_2
        } else {
            log2_t.exp2().ln_1p()
        };
        ln.powf(self.beta)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpikeRow {
    pub n: usize,
    /// `log₂ t_n`, `t_n = ‖q_n a‖⁻¹`.
    pub log2_t: f64,
    pub t: Option<f64>,
    pub q_minus_m: String,
    pub sin2: f64,
    pub gauge: f64,
    /// `NV_{t_n}·ψ(t_n)²f(t_n)/t_n^{2d▽}` from a partial dual sum (a lower bound).
    pub ratio: Option<f64>,
    pub rhs: f64,
    pub holds: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpikeScan {
    pub r: f64,
    pub covolume: f64,
    pub rows: Vec<SpikeRow>,
}

/// `sin²(2π r k)` with `r·k` reduced modulo one in exact arithmetic.
pub fn sin2_exact(r: f64, k: &BigUint) -> f64 {
    let (mant, exp, sign) = num_traits::float::FloatCore::integer_decode(r);
    if exp >= 0 {
        return 0.0;
    }
    // sin²(2πrk) = sin²(πg) with g = 2rk mod 1 = p/2^sh.
    let p = BigInt::from(mant) * BigInt::from(k.clone()) * BigInt::from(sign);
    let sh = (-exp - 1) as usize;
    let one = BigInt::from(1u8) << sh;
    let mut g = p % &one;
    if g.is_negative() {
        g += &one;
    }
    if g.is_zero() {
        return 0.0;
    }
    // Fold to min(g, 1 − g) so that sin(πg) keeps full relative accuracy.
    let other = &one - &g;
    let g = if other < g { other } else { g };
    let bits = g.bits() as i64;
    let drop = (bits - 64).max(0) as usize;
    let frac = (&g >> drop).to_f64().unwrap_or(0.0) * (drop as f64 - sh as f64).exp2();
    (PI * frac).sin().powi(2)
}

/// The lower bound for the number variance at `t_n = ‖q_n a‖⁻¹` of the
/// lattice whose dual is the ψ-Liouvillean lattice built from `data`, with
/// `Ω◁ = [−r, r] × Υ◁` and `Ω▽ = search`.
///
/// For each stored `n` the right-hand side
/// `f(t_n) vol(Ω▽)² vol(Υ◁)² sin²(2πr(q_n − m_n)) / (4π² covol²)` is evaluated
/// exactly. Where `t_n` is a double and the witness is resolved by the float
/// basis, the left-hand side is computed from a partial dual sum.
pub fn liouville_spike_scan(
    data: &LiouvilleData,
    search: &Region,
    r: f64,
    upsilon_volume: f64,
    gauge: Gauge,
) -> Result<SpikeScan> {
    if !(r > 0.0) || !(upsilon_volume > 0.0) {
        return Err(Error::InvalidParameter("r and vol(Υ◁) must be positive".into()));
    }
    check_dim(1, search.dim())?;
    let split = SplitSpace::new(1, 1)?;
    let (dual, witnesses) = liouvillean_lattice(data.clone(), split, None)?;
    let lattice = dual.dual();
    let covol = lattice.covolume();
    let psi: &PsiFunction = &data.psi;
    let window = Region::interval(-r, r)?;
    let vol_down = search.volume();
    let rows = witnesses
        .iter()
        .map(|w| {
            let e = w.down_exponent.to_f64().unwrap_or(f64::NEG_INFINITY);
            let dist = data.distance_f64(w.n);
            let log2_t = if dist > 0.0 { -dist.log2() } else { -e };
            let gauge_v = gauge.eval_log2(log2_t);
            let sin2 = sin2_exact(r, &w.left);
            let rhs = gauge_v * vol_down.powi(2) * upsilon_volume.powi(2) * sin2
                / (4.0 * PI * PI * covol * covol);
            let mut ratio = None;
            if let (Some(coords), true) = (&w.coords, log2_t < 900.0) {
                let xi = dual.point(coords);
                let t = 1.0 / dist;
                if (xi[0].abs() * t - 1.0).abs() < 1e-6 {
                    let gap = w.left.to_f64().unwrap_or(f64::INFINITY);
                    let rho_left = gap + 2.0;
                    let a = search.dilate(t).ok();
                    if let Some(a) = a {
                        let part = dual_square_sum(&dual, split, &a, &window, 2.0, rho_left)
                            .map(|(v, _)| v * upsilon_volume.powi(2) / (covol * covol))
                            .ok();
                        ratio = part.map(|nv| nv * psi.eval(t).powi(2) * gauge_v / (t * t));
                    }
                }
            }
            SpikeRow {
                n: w.n,
                log2_t,
                t: (log2_t < 1000.0).then(|| log2_t.exp2()),
                q_minus_m: w.left.to_string(),
                sin2,
                gauge: gauge_v,
                ratio,
                rhs,
                holds: ratio.map(|x| x >= rhs),
            }
        })
        .collect();
    Ok(SpikeScan { r, covolume: covol, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diophantine::liouville_number;

    fn golden_spec(window: Region, search: Region) -> ModelSetSpec {
        ModelSetSpec::new(SplitSpace::new(1, 1).unwrap(), Lattice::golden(), vec![0.0, 0.0], window, search)
            .unwrap()
    }

    #[test]
    fn diffraction_matches_monte_carlo() {
        let spec = golden_spec(Region::interval(-0.5, 0.5).unwrap(), Region::interval(0.0, 1.0).unwrap());
        let d = nv_diffraction(&spec.lattice, spec.split, &spec.search, &spec.window, 5.0, 1e-2).unwrap();
        let m = nv_montecarlo(&spec, 5.0, 4000, 3).unwrap();
        let diff = (d.value - m.nv).abs();
        assert!(diff <= 3.0 * m.nv_stderr + d.tail_bound, "{d:?} {m:?}");
        assert!(m.mean.abs() <= 3.0 * m.mean_stderr);
    }

    #[test]
    fn integer_lattice_diffraction() {
        // Z² split along the axes: Δ(s) = N₁(s₁)N₂(s₂) − t·w with each factor
        // taking two values, so NV has a closed form.
        let t = 2.5;
        let w = 0.4;
        let spec = ModelSetSpec::new(
            SplitSpace::new(1, 1).unwrap(),
            Lattice::identity(2),
            vec![0.0, 0.0],
            Region::interval(0.0, w).unwrap(),
            Region::interval(0.0, 1.0).unwrap(),
        )
        .unwrap();
        // N₁ ∈ {2, 3} with P(3) = 0.5; N₂ ∈ {0, 1} with P(1) = w.
        let e1sq = 0.5 * 4.0 + 0.5 * 9.0;
        let exact = e1sq * w - (t * w).powi(2);
        let d = nv_diffraction(&spec.lattice, spec.split, &spec.search, &spec.window, t, 1e-2).unwrap();
        assert!((d.value - exact).abs() <= d.tail_bound + 1e-9, "{} vs {exact}", d.value);
    }

    #[test]
    fn zero_window_gives_zero() {
        let split = SplitSpace::new(1, 1).unwrap();
        let w = Region::interval(-1e-300, 1e-300).unwrap();
        let d = nv_diffraction(&Lattice::golden(), split, &Region::interval(0.0, 1.0).unwrap(), &w, 3.0, 1e-3)
            .unwrap();
        assert!(d.value < 1e-200);
    }

    #[test]
    fn terms_scale_with_t() {
        let s = Region::ball(vec![0.0, 0.0], 1.0).unwrap();
        for k in 0..100 {
            let xi = [0.013 * k as f64, 0.7 - 0.011 * k as f64];
            let t = 3.0f64;
            let direct = t.powi(4) * fourier_indicator(&s, &[t * xi[0], t * xi[1]]).unwrap().norm_sqr();
            let dilated = fourier_indicator(&s.dilate(t).unwrap(), &xi).unwrap().norm_sqr();
            assert!((direct - dilated).abs() <= 1e-12 * direct.max(1.0), "{k} {direct} {dilated}");
        }
    }

    #[test]
    fn tiny_t_is_bernoulli() {
        let spec = golden_spec(Region::interval(-0.5, 0.5).unwrap(), Region::interval(0.0, 1.0).unwrap());
        let t = 0.01;
        let main = spec.main_term(t);
        let m = nv_montecarlo(&spec, t, 20000, 1).unwrap();
        let exact = main * (1.0 - main) + main * main;
        // E[Δ²] with Δ ∈ {−main, 1 − main} and P(hit) = main.
        assert!((m.nv - exact).abs() <= 4.0 * m.nv_stderr, "{} vs {exact}", m.nv);
        for (_, d) in sampled_discrepancies(&spec, t, 500, 2).unwrap() {
            assert!((d + main).abs() < 1e-12 || (d - 1.0 + main).abs() < 1e-12);
        }
    }

    #[test]
    fn exact_zero_mean_on_integer_lattice() {
        // ∫ N(s) ds over the unit torus, with N piecewise constant in each
        // coordinate, equals the volume of the counting region.
        let t = 3.7;
        let spec = ModelSetSpec::new(
            SplitSpace::new(1, 1).unwrap(),
            Lattice::identity(2),
            vec![0.0, 0.0],
            Region::interval(-0.2, 0.35).unwrap(),
            Region::interval(0.0, 1.0).unwrap(),
        )
        .unwrap();
        let breaks = |lo: f64, hi: f64| {
            let mut b = vec![0.0, 1.0, (-lo).rem_euclid(1.0), (-hi).rem_euclid(1.0)];
            b.sort_by(f64::total_cmp);
            b
        };
        let b1 = breaks(0.0, t);
        let b2 = breaks(-0.2, 0.35);
        let mut integral = 0.0;
        for w1 in b1.windows(2) {
            for w2 in b2.windows(2) {
                let area = (w1[1] - w1[0]) * (w2[1] - w2[0]);
                if area == 0.0 {
                    continue;
                }
                let s = vec![0.5 * (w1[0] + w1[1]), 0.5 * (w2[0] + w2[1])];
                let n = modelset::count(&spec.with_shift(s), t).unwrap().count as f64;
                integral += area * n;
            }
        }
        assert!((integral - spec.main_term(t)).abs() < 1e-12);
    }

    #[test]
    fn coefficients_match_torus_average() {
        let spec = golden_spec(Region::interval(-0.4, 0.4).unwrap(), Region::interval(0.0, 1.0).unwrap());
        let t = 4.0;
        let dual = spec.lattice.dual();
        let xi = dual.point(&[1, 0]);
        let c = fourier_coefficient(&spec.lattice, spec.split, &spec.search, &spec.window, t, &xi).unwrap();
        let samples = sampled_discrepancies(&spec, t, 20000, 9).unwrap();
        let vals: Vec<Complex64> = samples
            .iter()
            .map(|(s, d)| {
                let ph: f64 = s.iter().zip(&xi).map(|(a, b)| a * b).sum();
                Complex64::from_polar(*d, -2.0 * PI * ph)
            })
            .collect();
        let re: Vec<f64> = vals.iter().map(|v| v.re).collect();
        let im: Vec<f64> = vals.iter().map(|v| v.im).collect();
        let (mr, sr) = mean_and_stderr(&re);
        let (mi, si) = mean_and_stderr(&im);
        assert!((mr - c.re).abs() <= 3.5 * sr, "{mr} vs {}", c.re);
        assert!((mi - c.im).abs() <= 3.5 * si, "{mi} vs {}", c.im);
        assert!(fourier_coefficient(&spec.lattice, spec.split, &spec.search, &spec.window, t, &[0.0, 0.0]).is_err());
    }

    #[test]
    fn coefficient_vanishes_at_window_zero() {
        let spec = golden_spec(Region::interval(-0.25, 0.25).unwrap(), Region::interval(0.0, 1.0).unwrap());
        // 𝓕χ_{[−1/4,1/4]} vanishes at ξ◁ = ±2.
        let c = fourier_coefficient(&spec.lattice, spec.split, &spec.search, &spec.window, 3.0, &[0.3, 2.0])
            .unwrap();
        assert!(c.norm() < 1e-15);
    }

    #[test]
    fn parseval_partial_sum_bounded() {
        let spec = golden_spec(Region::interval(-0.5, 0.5).unwrap(), Region::interval(0.0, 1.0).unwrap());
        let t = 6.0;
        let d = nv_diffraction(&spec.lattice, spec.split, &spec.search, &spec.window, t, 1e-2).unwrap();
        let dual = spec.lattice.dual();
        let mut s = 0.0;
        for n in -15..=15i64 {
            for m in -15..=15i64 {
                if n == 0 && m == 0 {
                    continue;
                }
                let xi = dual.point(&[n, m]);
                let c = fourier_coefficient(&spec.lattice, spec.split, &spec.search, &spec.window, t, &xi)
                    .unwrap();
                s += c.norm_sqr();
            }
        }
        assert!(s <= d.value + d.tail_bound + 1e-12);
    }

    #[test]
    fn l1_witness_below_mc() {
        let spec = golden_spec(Region::interval(-0.3, 0.3).unwrap(), Region::interval(0.0, 1.0).unwrap());
        let t = 8.0;
        let w = l1_lower_witness(&spec.lattice, spec.split, &spec.search, &spec.window, t, 5.0).unwrap();
        let m = nv_montecarlo(&spec, t, 4000, 4).unwrap();
        assert!(m.l1 >= w.magnitude - 3.0 * m.l1_stderr);
        let big = Region::interval(-50.0, 50.0).unwrap();
        assert!(l1_lower_witness(&spec.lattice, spec.split, &spec.search, &big, t, 0.5).is_err());
    }

    #[test]
    fn exact_sine_factor() {
        assert_eq!(sin2_exact(0.5, &BigUint::from(3u8)), 0.0);
        let v = sin2_exact(0.125, &BigUint::from(3u8));
        assert!((v - (2.0 * PI * 0.375).sin().powi(2)).abs() < 1e-15);
        // r·k mod 1 for a huge k.
        let k = BigUint::from(1u8) << 200usize;
        assert_eq!(sin2_exact(0.3, &(k.clone() * 1024u32)), sin2_exact(0.3, &(k * 1024u32)));
        let k = (BigUint::from(1u8) << 100usize) + 5u32;
        let r = 0.25 + 2f64.powi(-40);
        // 2^100 r ≡ 0 mod 1 and 5r = 1.25 + 5·2^{−40}.
        let want = (2.0 * PI * (0.25 + 5.0 * 2f64.powi(-40))).sin().powi(2);
        assert!((sin2_exact(r, &k) - want).abs() < 1e-15);
    }

    #[test]
    fn spike_inequality_on_liouville_rows() {
        let data = liouville_number(PsiFunction::log(1.0, 1.0).unwrap(), 3).unwrap();
        let search = Region::interval(-0.3, 0.3).unwrap();
        let scan = liouville_spike_scan(&data, &search, 0.37, 1.0, Gauge { beta: 0.5 }).unwrap();
        assert_eq!(scan.rows.len(), 3);
        let evaluable: Vec<&SpikeRow> = scan.rows.iter().filter(|r| r.ratio.is_some()).collect();
        assert_eq!(evaluable.len(), 2);
        for row in &scan.rows {
            assert!((0.0..=1.0).contains(&row.sin2));
            if let Some(h) = row.holds {
                assert!(h, "{row:?}");
            }
        }
        assert!(scan.rows[2].t.is_none() && scan.rows[2].rhs.is_finite());
    }
}
