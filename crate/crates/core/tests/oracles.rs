use cutproject::blcheck::z_alpha_estimate;
use cutproject::geometry::{Region, SplitSpace};
use cutproject::lattice::Lattice;
use cutproject::modelset::{count, lifted_points, ModelSetSpec};
use cutproject::patterns::{acceptance_domains, complexity, observed_patterns, PatternKey};
use cutproject::variance::{fourier_coefficient, nv_diffraction, nv_montecarlo};
use std::collections::{BTreeMap, BTreeSet};

const PHI: f64 = 1.618_033_988_749_895;
const PHIBAR: f64 = -0.618_033_988_749_895;

fn spec1(lattice: Lattice, shift: [f64; 2], window: (f64, f64), search: (f64, f64)) -> ModelSetSpec {
    ModelSetSpec::new(
        SplitSpace::new(1, 1).unwrap(),
        lattice,
        shift.to_vec(),
        Region::interval(window.0, window.1).unwrap(),
        Region::interval(search.0, search.1).unwrap(),
    )
    .unwrap()
}

/// `#{(n, m) : n + mφ − s₀ ∈ t[lo, hi), n + mφ̄ − s₁ ∈ [a, b)}` by direct scan.
/// `x − y = m√5`, which bounds `m`; `n` is then bounded by the first factor.
fn golden_brute(s: [f64; 2], window: (f64, f64), search: (f64, f64), t: f64) -> u64 {
    let (xl, xh) = (s[0] + t * search.0, s[0] + t * search.1);
    let (yl, yh) = (s[1] + window.0, s[1] + window.1);
    let r5 = 5f64.sqrt();
    let m_lo = ((xl - yh) / r5).floor() as i64 - 1;
    let m_hi = ((xh - yl) / r5).ceil() as i64 + 1;
    let mut n = 0;
    for m in m_lo..=m_hi {
        let mf = m as f64;
        for k in (xl - mf * PHI).floor() as i64 - 1..=(xh - mf * PHI).ceil() as i64 + 1 {
            let x = k as f64 + mf * PHI;
            let y = k as f64 + mf * PHIBAR;
            if x >= xl && x < xh && y >= yl && y < yh {
                n += 1;
            }
        }
    }
    n
}

fn integer_brute(s: [f64; 2], window: (f64, f64), search: (f64, f64), t: f64) -> u64 {
    let c = |lo: f64, hi: f64| ((hi.ceil() - lo.ceil()) as i64).max(0) as u64;
    c(s[0] + t * search.0, s[0] + t * search.1) * c(s[1] + window.0, s[1] + window.1)
}

#[test]
fn counts_match_brute_force() {
    let windows = [(0.0, 1.0), (-0.37, 0.41), (-1.2, 0.3)];
    let searches = [(0.0, 1.0), (-0.5, 0.5), (-1.0, 2.0)];
    let shifts = [[0.0, 0.0], [0.123, -0.31], [-2.7, 0.77]];
    for (i, &w) in windows.iter().enumerate() {
        for (j, &a) in searches.iter().enumerate() {
            let s = shifts[(i + j) % 3];
            for t in [1.0, 3.3, 17.0, 250.0, 999.5] {
                let g = count(&spec1(Lattice::golden(), s, w, a), t).unwrap().count;
                assert_eq!(g, golden_brute(s, w, a, t), "golden {w:?} {a:?} {s:?} {t}");
                let z = count(&spec1(Lattice::identity(2), s, w, a), t).unwrap().count;
                assert_eq!(z, integer_brute(s, w, a, t), "integer {w:?} {a:?} {s:?} {t}");
            }
        }
    }
}

/// The number of distinct r-neighbourhoods in a long chain, keyed by rounded
/// displacements rather than lattice coordinates.
fn census(points: &[f64], r: f64) -> usize {
    let mut seen = BTreeSet::new();
    let (lo, hi) = (points[0] + r, points[points.len() - 1] - r);
    for (i, &x) in points.iter().enumerate() {
        if x <= lo || x >= hi {
            continue;
        }
        let mut key = Vec::new();
        for &y in &points[i.saturating_sub(40)..(i + 40).min(points.len())] {
            if (y - x).abs() < r {
                key.push(((y - x) * 1e6).round() as i64);
            }
        }
        seen.insert(key);
    }
    seen.len()
}

#[test]
fn fibonacci_census_matches_complexity() {
    let spec = spec1(Lattice::golden(), [0.0, 0.0], (0.0, 1.0), (0.0, 1.0));
    let mut xs: Vec<f64> = lifted_points(&spec, 1e4).unwrap().iter().map(|p| p.down[0]).collect();
    xs.sort_by(f64::total_cmp);
    // Consecutive gaps take the two values φ and φ².
    for w in xs.windows(2) {
        let g = w[1] - w[0];
        assert!((g - PHI).abs() < 1e-9 || (g - PHI - 1.0).abs() < 1e-9, "{g}");
    }
    let grid = [0.5, 1.2, 2.0, 3.0, 4.5, 6.0, 9.0];
    for (r, n) in complexity(&spec, &grid).unwrap() {
        assert_eq!(n, census(&xs, r), "r = {r}");
    }
}

/// Pattern of a window point by direct scan of `|n|, |m| ≤ 12`.
fn golden_pattern(y: f64, window: (f64, f64), r: f64) -> Vec<(i64, i64)> {
    let mut out = Vec::new();
    for n in -12..=12i64 {
        for m in -12..=12i64 {
            let down = n as f64 + m as f64 * PHI;
            let z = y + n as f64 + m as f64 * PHIBAR;
            if down.abs() < r && z >= window.0 && z < window.1 {
                out.push((n, m));
            }
        }
    }
    out
}

#[test]
fn grid_classifier_matches_domain_volumes() {
    let window = (-0.3, 0.55);
    let spec = spec1(Lattice::golden(), [0.0, 0.0], window, (0.0, 1.0));
    let r = 3.0;
    let domains = acceptance_domains(&spec, r, false).unwrap();
    let n = 1_000_000;
    let len = window.1 - window.0;
    let mut hits: BTreeMap<Vec<(i64, i64)>, usize> = BTreeMap::new();
    for i in 0..n {
        let y = window.0 + len * (i as f64 + 0.5) / n as f64;
        *hits.entry(golden_pattern(y, window, r)).or_default() += 1;
    }
    assert_eq!(hits.len(), domains.len());
    for d in &domains {
        let key: Vec<(i64, i64)> = d.pattern.0.iter().map(|c| (c[0], c[1])).collect();
        let share = *hits.get(&key).expect("pattern seen on the grid") as f64 / n as f64;
        // Each domain is a union of a few intervals; every boundary costs at
        // most one grid step.
        assert!((share * len - d.volume).abs() < 20.0 * len / n as f64, "{key:?} {share} {}", d.volume);
    }
}

#[test]
fn observed_patterns_agree_with_window_position() {
    let window = (0.0, 1.0);
    let spec = spec1(Lattice::golden(), [0.0, 0.0], window, (0.0, 1.0));
    let r = 4.0;
    let domains = acceptance_domains(&spec, r, false).unwrap();
    let obs = observed_patterns(&spec, 2000.0, r).unwrap();
    assert!(obs.len() > 800);
    for (p, key) in &obs {
        let d = domains.iter().find(|d| d.pattern == *key).expect("observed pattern has a domain");
        assert_eq!(d.contains(&p.star), Some(true));
        let direct = PatternKey::new(golden_pattern(p.star[0], window, r).iter().map(|&(a, b)| vec![a, b]).collect());
        assert_eq!(&direct, key);
    }
}

#[test]
fn golden_z_estimate_near_one() {
    let spec = spec1(Lattice::golden(), [0.0, 0.0], (0.0, 1.0), (0.0, 1.0));
    let alpha = 1.0 / 5f64.sqrt();
    let z = z_alpha_estimate(&spec, alpha, 32.0, 100).unwrap();
    assert!((1.0..=1.05).contains(&z.value), "{z:?}");
    let mut best = 0.0f64;
    for k in -100..=100 {
        let c = golden_brute([k as f64, 0.0], (0.0, 1.0), (0.0, 1.0), 32.0) as f64;
        let q = alpha * 32.0 / c;
        best = best.max(q.max(1.0 / q));
    }
    assert_eq!(z.value, best);
}

/// `∫_{[0,1)²} Δ(s) e^{−2πi ξ·s} ds` for Z² by the midpoint rule.
fn integer_coefficient(window: (f64, f64), t: f64, xi: [f64; 2], n: usize) -> (f64, f64) {
    let h = 1.0 / n as f64;
    let mut sum = (0.0, 0.0);
    let main = t * (window.1 - window.0);
    for i in 0..n {
        let s0 = (i as f64 + 0.5) * h;
        let c0 = (s0 + t).ceil() - s0.ceil();
        for j in 0..n {
            let s1 = (j as f64 + 0.5) * h;
            let c1 = ((s1 + window.1).ceil() - (s1 + window.0).ceil()).max(0.0);
            let delta = c0 * c1 - main;
            let ph = -2.0 * std::f64::consts::PI * (xi[0] * s0 + xi[1] * s1);
            sum.0 += delta * ph.cos();
            sum.1 += delta * ph.sin();
        }
    }
    (sum.0 * h * h, sum.1 * h * h)
}

#[test]
fn fourier_coefficient_matches_torus_integral() {
    let window = (-0.3, 0.45);
    let t = 2.3;
    let split = SplitSpace::new(1, 1).unwrap();
    let search = Region::interval(0.0, 1.0).unwrap();
    let w = Region::interval(window.0, window.1).unwrap();
    let l = Lattice::identity(2);
    for xi in [[1.0, 0.0], [0.0, 1.0], [1.0, 1.0], [2.0, -1.0], [-1.0, 3.0]] {
        let c = fourier_coefficient(&l, split, &search, &w, t, &xi).unwrap();
        let (re, im) = integer_coefficient(window, t, xi, 1500);
        assert!((c.re - re).abs() < 5e-3 && (c.im - im).abs() < 5e-3, "{xi:?}: {c} vs {re} {im}");
    }
}

#[test]
fn integer_number_variance_closed_form() {
    // Count = X₁X₂ with X₁ = 7 + Bernoulli(½) and X₂ = Bernoulli(0.6), so
    // NV = E[X₁²]·0.6 − (7.5·0.6)² = 56.5·0.6 − 20.25.
    let exact = 56.5 * 0.6 - 20.25;
    let spec = spec1(Lattice::identity(2), [0.0, 0.0], (-0.3, 0.3), (0.0, 1.0));
    let m = nv_montecarlo(&spec, 7.5, 10_000, 11).unwrap();
    assert!((m.nv - exact).abs() <= 3.0 * m.nv_stderr, "{m:?}");
    assert!(m.mean.abs() <= 3.0 * m.mean_stderr);
    let d = nv_diffraction(&spec.lattice, spec.split, &spec.search, &spec.window, 7.5, 1e-2).unwrap();
    assert!((d.value - exact).abs() <= d.tail_bound + 1e-9, "{d:?}");
}
