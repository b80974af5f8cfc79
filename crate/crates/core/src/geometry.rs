//! Split Euclidean space, windows and search regions.
//!
//! Coordinates are axis aligned: the first `d_down` coordinates span the
//! physical space E▽ and the remaining `d_left` span the internal space E◁.

use crate::error::{check_dim, Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSpace {
    pub d_down: usize,
    pub d_left: usize,
}

impl SplitSpace {
    pub fn new(d_down: usize, d_left: usize) -> Result<Self> {
        if d_down == 0 || d_left == 0 {
            return Err(Error::InvalidParameter(
                "both factors of the splitting need positive dimension".into(),
            ));
        }
        Ok(SplitSpace { d_down, d_left })
    }

    pub fn dim(&self) -> usize {
        self.d_down + self.d_left
    }

    pub fn down<'a>(&self, v: &'a [f64]) -> &'a [f64] {
        &v[..self.d_down]
    }

    pub fn left<'a>(&self, v: &'a [f64]) -> &'a [f64] {
        &v[self.d_down..]
    }

    pub fn join(&self, down: &[f64], left: &[f64]) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.dim());
        v.extend_from_slice(down);
        v.extend_from_slice(left);
        v
    }
}

/// A bounded region. Balls are open, boxes are half-open `[c-h, c+h)` per
/// coordinate and interval unions are lists of half-open intervals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum Region {
    Ball { center: Vec<f64>, radius: f64 },
    Box { center: Vec<f64>, halfwidths: Vec<f64> },
    #[serde(rename = "intervals")]
    IntervalUnion { intervals: Vec<(f64, f64)> },
}

/// Volume of the unit ball in dimension m.
pub fn unit_ball_volume(m: usize) -> f64 {
    match m {
        0 => 1.0,
        1 => 2.0,
        _ => unit_ball_volume(m - 2) * 2.0 * std::f64::consts::PI / m as f64,
    }
}

fn finite_all(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite())
}

impl Region {
    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        let r = Region::Ball { center, radius };
        r.validate()?;
        Ok(r)
    }

    pub fn cube(center: Vec<f64>, halfwidth: f64) -> Result<Self> {
        let h = vec![halfwidth; center.len()];
        Region::boxed(center, h)
    }

    pub fn boxed(center: Vec<f64>, halfwidths: Vec<f64>) -> Result<Self> {
        let r = Region::Box { center, halfwidths };
        r.validate()?;
        Ok(r)
    }

    /// Interval union; touching or overlapping input intervals are merged.
    pub fn intervals(list: Vec<(f64, f64)>) -> Result<Self> {
        let r = Region::IntervalUnion { intervals: list };
        r.validate()?;
        Ok(r.normalized())
    }

    pub fn interval(lo: f64, hi: f64) -> Result<Self> {
        Region::intervals(vec![(lo, hi)])
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Region::Ball { center, radius } => {
                if center.is_empty() || !finite_all(center) {
                    return Err(Error::InvalidRegion("ball center must be a finite vector".into()));
                }
                if !(radius.is_finite() && *radius > 0.0) {
                    return Err(Error::InvalidRegion("ball radius must be positive".into()));
                }
            }
            Region::Box { center, halfwidths } => {
                if center.is_empty() || !finite_all(center) {
                    return Err(Error::InvalidRegion("box center must be a finite vector".into()));
                }
                check_dim(center.len(), halfwidths.len())?;
                if !halfwidths.iter().all(|h| h.is_finite() && *h > 0.0) {
                    return Err(Error::InvalidRegion("box halfwidths must be positive".into()));
                }
            }
            Region::IntervalUnion { intervals } => {
                if intervals.is_empty() {
                    return Err(Error::InvalidRegion("interval union is empty".into()));
                }
                let mut sorted = intervals.clone();
                sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
                for w in sorted.windows(2) {
                    if w[1].0 < w[0].1 {
                        return Err(Error::InvalidRegion("intervals overlap".into()));
                    }
                }
                for &(a, b) in intervals {
                    if !(a.is_finite() && b.is_finite() && a < b) {
                        return Err(Error::InvalidRegion(format!("bad interval [{a}, {b})")));
                    }
                }
            }
        }
        Ok(())
    }

    fn normalized(self) -> Self {
        match self {
            Region::IntervalUnion { mut intervals } => {
                intervals.sort_by(|a, b| a.0.total_cmp(&b.0));
                Region::IntervalUnion { intervals: merge(intervals) }
            }
            r => r,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Region::Ball { center, .. } | Region::Box { center, .. } => center.len(),
            Region::IntervalUnion { .. } => 1,
        }
    }

    pub fn volume(&self) -> f64 {
        match self {
            Region::Ball { center, radius } => {
                unit_ball_volume(center.len()) * radius.powi(center.len() as i32)
            }
            Region::Box { halfwidths, .. } => halfwidths.iter().map(|h| 2.0 * h).product(),
            Region::IntervalUnion { intervals } => intervals.iter().map(|(a, b)| b - a).sum(),
        }
    }

    pub fn contains(&self, x: &[f64]) -> Result<bool> {
        check_dim(self.dim(), x.len())?;
        Ok(self.contains_unchecked(x))
    }

    pub(crate) fn contains_unchecked(&self, x: &[f64]) -> bool {
        match self {
            Region::Ball { center, radius } => {
                let d2: f64 = center.iter().zip(x).map(|(c, y)| (y - c) * (y - c)).sum();
                d2 < radius * radius
            }
            Region::Box { center, halfwidths } => center
                .iter()
                .zip(halfwidths)
                .zip(x)
                .all(|((c, h), y)| *y >= c - h && *y < c + h),
            Region::IntervalUnion { intervals } => {
                intervals.iter().any(|&(a, b)| x[0] >= a && x[0] < b)
            }
        }
    }

    /// Signed gap to the boundary: negative inside, positive outside. For
    /// boxes this is the sup-norm gap, matching the box inflation used by
    /// [`Region::inflate`].
    pub fn signed_gap(&self, x: &[f64]) -> f64 {
        match self {
            Region::Ball { center, radius } => {
                let d2: f64 = center.iter().zip(x).map(|(c, y)| (y - c) * (y - c)).sum();
                d2.sqrt() - radius
            }
            Region::Box { center, halfwidths } => center
                .iter()
                .zip(halfwidths)
                .zip(x)
                .map(|((c, h), y)| (y - c).abs() - h)
                .fold(f64::NEG_INFINITY, f64::max),
            Region::IntervalUnion { intervals } => {
                let y = x[0];
                intervals
                    .iter()
                    .map(|&(a, b)| (a - y).max(y - b))
                    .fold(f64::INFINITY, f64::min)
            }
        }
    }

    /// Euclidean distance to the boundary.
    pub fn boundary_distance(&self, x: &[f64]) -> f64 {
        match self {
            Region::Ball { center, radius } => {
                let d2: f64 = center.iter().zip(x).map(|(c, y)| (y - c) * (y - c)).sum();
                (d2.sqrt() - radius).abs()
            }
            Region::Box { center, halfwidths } => {
                let g: Vec<f64> = center
                    .iter()
                    .zip(halfwidths)
                    .zip(x)
                    .map(|((c, h), y)| (y - c).abs() - h)
                    .collect();
                if g.iter().all(|v| *v < 0.0) {
                    g.iter().map(|v| -v).fold(f64::INFINITY, f64::min)
                } else {
                    g.iter().map(|v| v.max(0.0).powi(2)).sum::<f64>().sqrt()
                }
            }
            Region::IntervalUnion { intervals } => intervals
                .iter()
                .flat_map(|&(a, b)| [(x[0] - a).abs(), (x[0] - b).abs()])
                .fold(f64::INFINITY, f64::min),
        }
    }

    /// Scale about the origin.
    pub fn dilate(&self, t: f64) -> Result<Region> {
        if !(t.is_finite() && t > 0.0) {
            return Err(Error::InvalidParameter(format!("dilation factor {t} must be positive")));
        }
        Ok(match self {
            Region::Ball { center, radius } => Region::Ball {
                center: center.iter().map(|c| c * t).collect(),
                radius: radius * t,
            },
            Region::Box { center, halfwidths } => Region::Box {
                center: center.iter().map(|c| c * t).collect(),
                halfwidths: halfwidths.iter().map(|h| h * t).collect(),
            },
            Region::IntervalUnion { intervals } => Region::IntervalUnion {
                intervals: intervals.iter().map(|(a, b)| (a * t, b * t)).collect(),
            },
        })
    }

    pub fn translate(&self, v: &[f64]) -> Result<Region> {
        check_dim(self.dim(), v.len())?;
        Ok(match self {
            Region::Ball { center, radius } => Region::Ball {
                center: center.iter().zip(v).map(|(c, x)| c + x).collect(),
                radius: *radius,
            },
            Region::Box { center, halfwidths } => Region::Box {
                center: center.iter().zip(v).map(|(c, x)| c + x).collect(),
                halfwidths: halfwidths.clone(),
            },
            Region::IntervalUnion { intervals } => Region::IntervalUnion {
                intervals: intervals.iter().map(|(a, b)| (a + v[0], b + v[0])).collect(),
            },
        })
    }

    /// Outer (`a > 0`) or inner (`a < 0`) parallel set. Balls change radius,
    /// boxes change halfwidths, intervals move their endpoints. Returns `None`
    /// when an inner parallel set is empty.
    pub fn inflate(&self, a: f64) -> Option<Region> {
        match self {
            Region::Ball { center, radius } => {
                let r = radius + a;
                (r > 0.0).then(|| Region::Ball { center: center.clone(), radius: r })
            }
            Region::Box { center, halfwidths } => {
                let h: Vec<f64> = halfwidths.iter().map(|h| h + a).collect();
                h.iter()
                    .all(|x| *x > 0.0)
                    .then(|| Region::Box { center: center.clone(), halfwidths: h })
            }
            Region::IntervalUnion { intervals } => {
                let grown: Vec<(f64, f64)> = intervals
                    .iter()
                    .map(|(lo, hi)| (lo - a, hi + a))
                    .filter(|(lo, hi)| lo < hi)
                    .collect();
                if grown.is_empty() {
                    None
                } else {
                    Some(Region::IntervalUnion { intervals: merge(grown) })
                }
            }
        }
    }

    /// Axis-aligned bounding box as (center, halfwidths).
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        match self {
            Region::Ball { center, radius } => (center.clone(), vec![*radius; center.len()]),
            Region::Box { center, halfwidths } => (center.clone(), halfwidths.clone()),
            Region::IntervalUnion { intervals } => {
                let lo = intervals.first().map(|x| x.0).unwrap_or(0.0);
                let hi = intervals.last().map(|x| x.1).unwrap_or(0.0);
                (vec![0.5 * (lo + hi)], vec![0.5 * (hi - lo)])
            }
        }
    }

    /// Largest distance from the origin to a point of the closure.
    pub fn circumradius(&self) -> f64 {
        match self {
            Region::Ball { center, radius } => norm(center) + radius,
            Region::Box { center, halfwidths } => center
                .iter()
                .zip(halfwidths)
                .map(|(c, h)| (c.abs() + h).powi(2))
                .sum::<f64>()
                .sqrt(),
            Region::IntervalUnion { intervals } => intervals
                .iter()
                .map(|(a, b)| a.abs().max(b.abs()))
                .fold(0.0, f64::max),
        }
    }

    /// Parameter intervals `k` with `p + k·dir` inside the closure of the
    /// region. Unbounded ends are reported as infinities.
    pub fn line_intervals(&self, p: &[f64], dir: &[f64]) -> Vec<(f64, f64)> {
        match self {
            Region::Ball { center, radius } => {
                let mut a = 0.0;
                let mut b = 0.0;
                let mut c = -radius * radius;
                for i in 0..p.len() {
                    let q = p[i] - center[i];
                    a += dir[i] * dir[i];
                    b += 2.0 * q * dir[i];
                    c += q * q;
                }
                if a == 0.0 {
                    return if c <= 0.0 { vec![(f64::NEG_INFINITY, f64::INFINITY)] } else { vec![] };
                }
                let disc = b * b - 4.0 * a * c;
                if disc < 0.0 {
                    return vec![];
                }
                let s = disc.sqrt();
                vec![((-b - s) / (2.0 * a), (-b + s) / (2.0 * a))]
            }
            Region::Box { center, halfwidths } => {
                let mut lo = f64::NEG_INFINITY;
                let mut hi = f64::INFINITY;
                for i in 0..p.len() {
                    let (l, h) = (center[i] - halfwidths[i], center[i] + halfwidths[i]);
                    if dir[i] == 0.0 {
                        if p[i] < l || p[i] > h {
                            return vec![];
                        }
                    } else {
                        let (u, v) = ((l - p[i]) / dir[i], (h - p[i]) / dir[i]);
                        lo = lo.max(u.min(v));
                        hi = hi.min(u.max(v));
                    }
                }
                if lo <= hi { vec![(lo, hi)] } else { vec![] }
            }
            Region::IntervalUnion { intervals } => {
                if dir[0] == 0.0 {
                    let inside = intervals.iter().any(|&(a, b)| p[0] >= a && p[0] <= b);
                    return if inside { vec![(f64::NEG_INFINITY, f64::INFINITY)] } else { vec![] };
                }
                let mut out: Vec<(f64, f64)> = intervals
                    .iter()
                    .map(|&(a, b)| {
                        let (u, v) = ((a - p[0]) / dir[0], (b - p[0]) / dir[0]);
                        (u.min(v), u.max(v))
                    })
                    .collect();
                out.sort_by(|a, b| a.0.total_cmp(&b.0));
                out
            }
        }
    }

    /// Uniform sample from the region.
    pub fn sample(&self, rng: &mut impl Rng) -> Vec<f64> {
        let (c, h) = self.bounding_box();
        loop {
            let x: Vec<f64> = c
                .iter()
                .zip(&h)
                .map(|(c, h)| c - h + 2.0 * h * rng.random::<f64>())
                .collect();
            if self.contains_unchecked(&x) {
                return x;
            }
        }
    }
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn merge(sorted: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    let mut sorted = sorted;
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(sorted.len());
    for (a, b) in sorted {
        match out.last_mut() {
            Some(last) if a <= last.1 => last.1 = last.1.max(b),
            _ => out.push((a, b)),
        }
    }
    out
}

/// Tube volumes `vol((∂Ω)_r) / r^s` over a list of radii.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinkowskiProfile {
    pub exponent: f64,
    pub samples: Vec<(f64, f64)>,
    /// Standard errors when the ratios come from Monte Carlo.
    pub stderr: Option<Vec<f64>>,
}

impl MinkowskiProfile {
    pub fn last_ratio(&self) -> Option<f64> {
        self.samples.last().map(|s| s.1)
    }
}

/// Volume of the two-sided tube `{x : dist(x, ∂Ω) < r}`.
pub fn tube_volume(region: &Region, r: f64) -> f64 {
    match region {
        Region::Ball { center, radius } => {
            let m = center.len() as i32;
            let k = unit_ball_volume(center.len());
            k * ((radius + r).powi(m) - (radius - r).max(0.0).powi(m))
        }
        Region::Box { halfwidths, .. } => {
            let sides: Vec<f64> = halfwidths.iter().map(|h| 2.0 * h).collect();
            let m = sides.len();
            // Steiner polynomial of the box: coefficient of r^k is the
            // k-ball volume times the sum of (m-k)-fold side products.
            let mut elem = vec![0.0; m + 1];
            elem[0] = 1.0;
            for &l in &sides {
                for j in (1..=m).rev() {
                    elem[j] += elem[j - 1] * l;
                }
            }
            let outer: f64 = (0..=m)
                .map(|k| unit_ball_volume(k) * r.powi(k as i32) * elem[m - k])
                .sum();
            let core: f64 = sides.iter().map(|l| (l - 2.0 * r).max(0.0)).product();
            outer - core
        }
        Region::IntervalUnion { intervals } => {
            let mut ends: Vec<f64> = intervals.iter().flat_map(|&(a, b)| [a, b]).collect();
            ends.sort_by(f64::total_cmp);
            let pieces: Vec<(f64, f64)> = ends.iter().map(|e| (e - r, e + r)).collect();
            merge(pieces).iter().map(|(a, b)| b - a).sum()
        }
    }
}

/// Monte Carlo estimate of the tube volume with its standard error.
pub fn tube_volume_mc(region: &Region, r: f64, samples: usize, seed: u64) -> (f64, f64) {
    let (c, h) = region.bounding_box();
    let h: Vec<f64> = h.iter().map(|h| h + r).collect();
    let box_vol: f64 = h.iter().map(|h| 2.0 * h).product();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hits = 0usize;
    for _ in 0..samples {
        let x: Vec<f64> = c
            .iter()
            .zip(&h)
            .map(|(c, h)| c - h + 2.0 * h * rng.random::<f64>())
            .collect();
        if region.boundary_distance(&x) < r {
            hits += 1;
        }
    }
    let p = hits as f64 / samples as f64;
    (box_vol * p, box_vol * (p * (1.0 - p) / samples as f64).sqrt())
}

/// Ratios `vol((∂Ω)_r) / r^s`. Every region variant has a closed form, so
/// `mc_samples` is only used when `force_mc` is set.
pub fn minkowski_profile(
    region: &Region,
    s: f64,
    radii: &[f64],
    mc_samples: usize,
    seed: u64,
    force_mc: bool,
) -> Result<MinkowskiProfile> {
    if !(s > 0.0 && s <= region.dim() as f64) {
        return Err(Error::InvalidParameter(format!("exponent {s} outside (0, dim]")));
    }
    if radii.iter().any(|r| !(*r > 0.0)) || radii.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidParameter("radii must be positive and strictly decreasing".into()));
    }
    if force_mc {
        if mc_samples == 0 {
            return Err(Error::InvalidParameter("Monte Carlo requested with zero samples".into()));
        }
        let mut samples = Vec::new();
        let mut errs = Vec::new();
        for (i, &r) in radii.iter().enumerate() {
            let (v, e) = tube_volume_mc(region, r, mc_samples, seed.wrapping_add(i as u64));
            samples.push((r, v / r.powf(s)));
            errs.push(e / r.powf(s));
        }
        return Ok(MinkowskiProfile { exponent: s, samples, stderr: Some(errs) });
    }
    let samples = radii.iter().map(|&r| (r, tube_volume(region, r) / r.powf(s))).collect();
    Ok(MinkowskiProfile { exponent: s, samples, stderr: None })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn volumes() {
        assert!((Region::ball(vec![0.0, 0.0], 1.0).unwrap().volume() - PI).abs() < 1e-15);
        assert_eq!(Region::boxed(vec![0.0, 0.0], vec![1.0, 2.0]).unwrap().volume(), 8.0);
        let u = Region::intervals(vec![(0.0, 0.3), (0.5, 1.0)]).unwrap();
        assert!((u.volume() - 0.8).abs() < 1e-15);
        let b3 = Region::ball(vec![0.0; 3], 2.0).unwrap();
        assert!((b3.volume() - 4.0 / 3.0 * PI * 8.0).abs() < 1e-12);
    }

    #[test]
    fn membership_conventions() {
        let b = Region::ball(vec![0.0, 0.0], 1.0).unwrap();
        assert!(!b.contains(&[1.0, 0.0]).unwrap());
        let q = Region::cube(vec![0.0, 0.0], 1.0).unwrap();
        assert!(q.contains(&[-1.0, 0.0]).unwrap());
        assert!(!q.contains(&[1.0, 0.0]).unwrap());
        let i = Region::interval(0.0, 1.0).unwrap();
        assert!(i.contains(&[0.0]).unwrap());
        assert!(i.contains(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn invalid_regions() {
        assert!(Region::ball(vec![0.0], 0.0).is_err());
        assert!(Region::boxed(vec![0.0], vec![-1.0]).is_err());
        assert!(Region::intervals(vec![(0.0, 1.0), (0.5, 2.0)]).is_err());
        assert!(Region::intervals(vec![(1.0, 1.0)]).is_err());
    }

    #[test]
    fn touching_intervals_merge() {
        let u = Region::intervals(vec![(0.3, 0.5), (0.0, 0.3)]).unwrap();
        assert_eq!(u, Region::IntervalUnion { intervals: vec![(0.0, 0.5)] });
    }

    #[test]
    fn inflate_and_deflate() {
        let u = Region::intervals(vec![(0.0, 0.3), (0.5, 1.0)]).unwrap();
        assert_eq!(u.inflate(0.1).unwrap(), Region::IntervalUnion { intervals: vec![(-0.1, 1.1)] });
        assert_eq!(u.inflate(-0.2).unwrap(), Region::IntervalUnion { intervals: vec![(0.7, 0.8)] });
        assert!(u.inflate(-0.3).is_none());
        assert!(Region::ball(vec![0.0], 1.0).unwrap().inflate(-1.0).is_none());
    }

    #[test]
    fn tube_ratios() {
        let i = Region::interval(-1.0, 1.0).unwrap();
        for r in [0.5, 0.1, 0.001] {
            let p = minkowski_profile(&i, 1.0, &[r], 0, 0, false).unwrap();
            assert!((p.last_ratio().unwrap() - 4.0).abs() < 1e-12);
        }
        let q = Region::cube(vec![0.0, 0.0], 1.0).unwrap();
        let p = minkowski_profile(&q, 1.0, &[0.01], 0, 0, false).unwrap();
        assert!((p.last_ratio().unwrap() / 16.0 - 1.0).abs() < 0.01);
        let b = Region::ball(vec![0.0, 0.0], 1.0).unwrap();
        let p = minkowski_profile(&b, 1.0, &[0.001], 0, 0, false).unwrap();
        assert!((p.last_ratio().unwrap() / (4.0 * PI) - 1.0).abs() < 0.01);
    }

    #[test]
    fn closed_form_tube_matches_monte_carlo() {
        for region in [
            Region::cube(vec![0.2, -0.1, 0.0], 0.7).unwrap(),
            Region::ball(vec![0.0, 0.5], 1.2).unwrap(),
            Region::intervals(vec![(0.0, 0.3), (0.4, 1.0)]).unwrap(),
        ] {
            let exact = tube_volume(&region, 0.08);
            let (mc, se) = tube_volume_mc(&region, 0.08, 200_000, 9);
            assert!((exact - mc).abs() < 4.0 * se + 1e-12, "{region:?}: {exact} vs {mc} ± {se}");
        }
    }

    #[test]
    fn profile_rejects_bad_radii() {
        let i = Region::interval(0.0, 1.0).unwrap();
        assert!(minkowski_profile(&i, 1.0, &[0.1, 0.2], 0, 0, false).is_err());
        assert!(minkowski_profile(&i, 2.0, &[0.1], 0, 0, false).is_err());
        assert!(minkowski_profile(&i, 1.0, &[0.1], 0, 0, true).is_err());
    }

    #[test]
    fn line_through_ball() {
        let b = Region::ball(vec![0.0, 0.0], 1.0).unwrap();
        let iv = b.line_intervals(&[0.0, 0.5], &[1.0, 0.0]);
        let x = (0.75f64).sqrt();
        assert!((iv[0].0 + x).abs() < 1e-15 && (iv[0].1 - x).abs() < 1e-15);
    }
}
