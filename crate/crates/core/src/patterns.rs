//! Local patterns of model sets: the ambient set Γ(r), acceptance domains,
//! pattern frequencies and complexity counts.

use crate::error::{check_dim, Error, Result};
use crate::exec;
use crate::geometry::{norm, Region, SplitSpace};
use crate::lattice::{enumerate_in, Lattice, LatticePoint, ProductRegion};
use crate::modelset::ModelSetSpec;
use rand::Rng;
use serde::Serialize;
use std::collections::BTreeMap;

/// Sorted integer coordinates of the lattice vectors in a pattern. Always
/// contains the origin.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct PatternKey(pub Vec<Vec<i64>>);

impl PatternKey {
    pub fn new(mut coords: Vec<Vec<i64>>) -> Self {
        let d = coords.first().map_or(0, |c| c.len());
        if !coords.iter().any(|c| c.iter().all(|k| *k == 0)) {
            coords.push(vec![0; d]);
        }
        coords.sort();
        coords.dedup();
        PatternKey(coords)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, coords: &[i64]) -> bool {
        self.0.binary_search_by(|c| c.as_slice().cmp(coords)).is_ok()
    }

    /// Whether every vector of `self` lies in `other`.
    pub fn is_subset(&self, other: &PatternKey) -> bool {
        self.0.iter().all(|c| other.contains(c))
    }
}

/// A half-open axis-parallel cell `[lo, hi)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Cell {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl Cell {
    pub fn volume(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(a, b)| b - a).product()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter().zip(&self.lo).zip(&self.hi).all(|((x, a), b)| x >= a && x < b)
    }

    fn boundary_distance(&self, x: &[f64]) -> f64 {
        x.iter()
            .zip(&self.lo)
            .zip(&self.hi)
            .map(|((x, a), b)| (x - a).abs().min((b - x).abs()))
            .fold(f64::INFINITY, f64::min)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DomainRegion {
    /// Union of disjoint half-open cells.
    Cells(Vec<Cell>),
    /// Volume estimated by sampling; no explicit region.
    Sampled { samples: usize, hits: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AcceptanceDomain {
    pub pattern: PatternKey,
    pub region: DomainRegion,
    pub volume: f64,
    /// Standard error of `volume` for sampled domains.
    pub volume_stderr: Option<f64>,
}

impl AcceptanceDomain {
    pub fn contains(&self, x: &[f64]) -> Option<bool> {
        match &self.region {
            DomainRegion::Cells(cells) => Some(cells.iter().any(|c| c.contains(x))),
            DomainRegion::Sampled { .. } => None,
        }
    }
}

fn window_difference_box(window: &Region) -> Region {
    let (_, h) = window.bounding_box();
    let h: Vec<f64> = h.iter().map(|h| 2.0 * h * (1.0 + 1e-12) + 1e-12).collect();
    Region::boxed(vec![0.0; h.len()], h).expect("positive halfwidths")
}

/// `Γ(r) = {γ : |γ▽| < r}` restricted to `γ◁ ∈ Ω◁ − Ω◁`; only these vectors
/// can appear in an r-pattern. Sorted by integer coordinates.
pub fn gamma_r(lattice: &Lattice, split: SplitSpace, window: &Region, r: f64) -> Result<Vec<LatticePoint>> {
    check_dim(split.dim(), lattice.dim())?;
    check_dim(split.d_left, window.dim())?;
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidParameter(format!("pattern radius {r} must be positive")));
    }
    let down = Region::ball(vec![0.0; split.d_down], r)?;
    let left = window_difference_box(window);
    let zero = vec![0.0; split.dim()];
    let e = enumerate_in(lattice, ProductRegion { split, down: &down, left: &left }, &zero)?;
    Ok(e.points
        .into_iter()
        .filter(|p| norm(split.down(&p.point)) < r && may_overlap(window, split.left(&p.point)))
        .collect())
}

/// Whether `Ω◁ ∩ (Ω◁ − v)` can be nonempty.
fn may_overlap(window: &Region, v: &[f64]) -> bool {
    match window {
        Region::Ball { radius, .. } => norm(v) < 2.0 * radius,
        Region::Box { halfwidths, .. } => v.iter().zip(halfwidths).all(|(x, h)| x.abs() < 2.0 * h),
        Region::IntervalUnion { intervals } => {
            let lo = intervals[0].0;
            let hi = intervals[intervals.len() - 1].1;
            v[0].abs() < hi - lo
        }
    }
}

/// Per-axis half-open pieces `[a, b)` whose products tile the window.
fn window_pieces(window: &Region) -> Result<Vec<Vec<(f64, f64)>>> {
    match window {
        Region::IntervalUnion { intervals } => Ok(vec![intervals.clone()]),
        Region::Box { center, halfwidths } => {
            Ok(center.iter().zip(halfwidths).map(|(c, h)| vec![(c - h, c + h)]).collect())
        }
        Region::Ball { center, radius } if center.len() == 1 => {
            Ok(vec![vec![(center[0] - radius, center[0] + radius)]])
        }
        Region::Ball { .. } => Err(Error::Unsupported(
            "exact acceptance domains need an interval or box window; use acceptance_domains_sampled".into(),
        )),
    }
}

fn pattern_of(gamma: &[LatticePoint], split: SplitSpace, window: &Region, x: &[f64]) -> PatternKey {
    let mut y = x.to_vec();
    let keys = gamma
        .iter()
        .filter(|g| {
            for ((yi, xi), gi) in y.iter_mut().zip(x).zip(split.left(&g.point)) {
                *yi = xi + gi;
            }
            window.contains_unchecked(&y)
        })
        .map(|g| g.coords.clone())
        .collect();
    PatternKey::new(keys)
}

/// Acceptance domains of all r-patterns, by exact cell decomposition of the
/// window along the translated window boundaries. With `cluster` set, the
/// domain of `P` is `{x : P ⊂ P(x)}` instead of `{x : P = P(x)}`; those
/// domains overlap.
pub fn acceptance_domains(spec: &ModelSetSpec, r: f64, cluster: bool) -> Result<Vec<AcceptanceDomain>> {
    let pieces = window_pieces(&spec.window)?;
    let gamma = gamma_r(&spec.lattice, spec.split, &spec.window, r)?;
    let m = spec.split.d_left;
    let mut grid: Vec<Vec<f64>> = Vec::with_capacity(m);
    for (i, axis) in pieces.iter().enumerate() {
        let lo = axis[0].0;
        let hi = axis[axis.len() - 1].1;
        let mut b: Vec<f64> = axis.iter().flat_map(|&(a, b)| [a, b]).collect();
        for g in &gamma {
            let shift = spec.split.left(&g.point)[i];
            b.extend(axis.iter().flat_map(|&(a, c)| [a - shift, c - shift]));
        }
        b.retain(|x| *x >= lo && *x <= hi);
        b.sort_by(f64::total_cmp);
        b.dedup();
        grid.push(b);
    }
    let dims: Vec<usize> = grid.iter().map(|g| g.len() - 1).collect();
    let total: usize = dims.iter().product();
    let classified = exec::map_range(total, |mut idx| {
        let mut lo = vec![0.0; m];
        let mut hi = vec![0.0; m];
        for i in (0..m).rev() {
            let k = idx % dims[i];
            idx /= dims[i];
            lo[i] = grid[i][k];
            hi[i] = grid[i][k + 1];
        }
        let mid: Vec<f64> = lo.iter().zip(&hi).map(|(a, b)| 0.5 * (a + b)).collect();
        if !spec.window.contains_unchecked(&mid) {
            return None;
        }
        Some((pattern_of(&gamma, spec.split, &spec.window, &mid), Cell { lo, hi }))
    });
    let mut by_key: BTreeMap<PatternKey, Vec<Cell>> = BTreeMap::new();
    for (key, cell) in classified.into_iter().flatten() {
        by_key.entry(key).or_default().push(cell);
    }
    if cluster {
        let keys: Vec<PatternKey> = by_key.keys().cloned().collect();
        return Ok(keys
            .iter()
            .map(|p| {
                let cells: Vec<Cell> = by_key
                    .iter()
                    .filter(|(q, _)| p.is_subset(q))
                    .flat_map(|(_, c)| c.iter().cloned())
                    .collect();
                domain_from_cells(p.clone(), cells)
            })
            .collect());
    }
    Ok(by_key.into_iter().map(|(p, cells)| domain_from_cells(p, merge_cells(cells))).collect())
}

fn domain_from_cells(pattern: PatternKey, cells: Vec<Cell>) -> AcceptanceDomain {
    let volume = cells.iter().map(Cell::volume).sum();
    AcceptanceDomain { pattern, region: DomainRegion::Cells(cells), volume, volume_stderr: None }
}

/// Merge touching cells in one dimension; higher-dimensional cells are kept.
fn merge_cells(mut cells: Vec<Cell>) -> Vec<Cell> {
    if cells.first().is_none_or(|c| c.lo.len() != 1) {
        return cells;
    }
    cells.sort_by(|a, b| a.lo[0].total_cmp(&b.lo[0]));
    let mut out: Vec<Cell> = Vec::new();
    for c in cells {
        match out.last_mut() {
            Some(last) if last.hi[0] == c.lo[0] => last.hi[0] = c.hi[0],
            _ => out.push(c),
        }
    }
    out
}

/// Acceptance domain volumes estimated from `n_samples` uniform points of the
/// window. Works for every window shape.
pub fn acceptance_domains_sampled(
    spec: &ModelSetSpec,
    r: f64,
    n_samples: usize,
    seed: u64,
) -> Result<Vec<AcceptanceDomain>> {
    if n_samples == 0 {
        return Err(Error::InvalidParameter("need at least one sample".into()));
    }
    let gamma = gamma_r(&spec.lattice, spec.split, &spec.window, r)?;
    let (c, h) = spec.window.bounding_box();
    let keys = exec::map_range(n_samples, |i| {
        let mut rng = crate::lattice::sample_rng(seed, i as u64);
        loop {
            let x: Vec<f64> = c.iter().zip(&h).map(|(c, h)| c + h * (2.0 * rng.random::<f64>() - 1.0)).collect();
            if spec.window.contains_unchecked(&x) {
                return pattern_of(&gamma, spec.split, &spec.window, &x);
            }
        }
    });
    let mut hits: BTreeMap<PatternKey, usize> = BTreeMap::new();
    for k in keys {
        *hits.entry(k).or_default() += 1;
    }
    let vol = spec.window.volume();
    let n = n_samples as f64;
    Ok(hits
        .into_iter()
        .map(|(pattern, k)| {
            let p = k as f64 / n;
            AcceptanceDomain {
                pattern,
                region: DomainRegion::Sampled { samples: n_samples, hits: k },
                volume: vol * p,
                volume_stderr: Some(vol * (p * (1.0 - p) / n).sqrt()),
            }
        })
        .collect())
}

/// Frequency of the pattern per unit volume of E▽: `vol(A_P)/covol(Γ)`.
pub fn pattern_frequency(domain: &AcceptanceDomain, lattice: &Lattice) -> f64 {
    domain.volume / lattice.covolume()
}

/// Number of r-patterns for each `r` in an increasing grid.
pub fn complexity(spec: &ModelSetSpec, r_grid: &[f64]) -> Result<Vec<(f64, usize)>> {
    if r_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("radius grid must be increasing".into()));
    }
    r_grid.iter().map(|&r| Ok((r, acceptance_domains(spec, r, false)?.len()))).collect()
}

/// Pattern of each generated point, read off its neighbours within `r`.
/// Points closer than `r` to the boundary of `tΩ▽` are skipped.
pub fn observed_patterns(spec: &ModelSetSpec, t: f64, r: f64) -> Result<Vec<(crate::modelset::ModelPoint, PatternKey)>> {
    let pts = crate::modelset::lifted_points(spec, t)?;
    let search = spec.search.dilate(t)?;
    let interior: Vec<usize> =
        (0..pts.len()).filter(|&i| search.signed_gap(&pts[i].down) < -r).collect();
    Ok(exec::map_slice(&interior, |&i| {
        let p = &pts[i];
        let keys = pts
            .iter()
            .filter(|q| {
                let d: Vec<f64> = q.down.iter().zip(&p.down).map(|(a, b)| a - b).collect();
                norm(&d) < r
            })
            .map(|q| q.coords.iter().zip(&p.coords).map(|(a, b)| a - b).collect())
            .collect();
        (p.clone(), PatternKey::new(keys))
    }))
}

/// Distance from `x` to the nearest cell boundary of the domain containing it.
pub fn domain_boundary_distance(domains: &[AcceptanceDomain], x: &[f64]) -> Option<f64> {
    domains.iter().find_map(|d| match &d.region {
        DomainRegion::Cells(cells) => cells.iter().find(|c| c.contains(x)).map(|c| c.boundary_distance(x)),
        DomainRegion::Sampled { .. } => None,
    })
}
