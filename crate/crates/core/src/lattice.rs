//! Full-rank lattices and enumeration of lattice points in product regions.

use crate::error::{check_dim, Error, Result};
use crate::exec;
use crate::geometry::{Region, SplitSpace};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

/// Distance from a region boundary below which a point is reported as grazing.
pub const GRAZE: f64 = 1e-9;

/// Refuse enumerations whose integer bounding box has more rows than this.
pub const MAX_ROWS: u64 = 1 << 32;

/// Exact side data attached to preset lattices.
#[derive(Clone, Debug, PartialEq)]
pub enum ExactTag {
    Golden,
    /// Liouvillean lattice built from verified data; `dual` marks the dual of it.
    Liouville { data: Arc<crate::diophantine::LiouvilleData>, dual: bool },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Lattice {
    basis: DMatrix<f64>,
    inverse: DMatrix<f64>,
    covolume: f64,
    pub exact_tag: Option<ExactTag>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LatticePoint {
    pub coords: Vec<i64>,
    pub point: Vec<f64>,
}

/// Result of an enumeration: lattice points in lexicographic coordinate order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Enumeration {
    pub points: Vec<LatticePoint>,
    pub boundary_warnings: u64,
}

impl Lattice {
    /// Lattice generated by the columns of `basis` (given as rows of the matrix).
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.len();
        if d == 0 {
            return Err(Error::InvalidParameter("empty basis".into()));
        }
        for r in rows {
            check_dim(d, r.len())?;
            if r.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidParameter("basis entries must be finite".into()));
            }
        }
        let m = DMatrix::from_fn(d, d, |i, j| rows[i][j]);
        Lattice::from_matrix(m)
    }

    pub fn from_matrix(basis: DMatrix<f64>) -> Result<Self> {
        if !basis.is_square() {
            return Err(Error::InvalidParameter("basis must be square".into()));
        }
        let det = basis.clone().lu().determinant();
        let scale: f64 = basis.column_iter().map(|c| c.norm()).product();
        if !(det.abs() > 1e-14 * scale) {
            return Err(Error::SingularBasis);
        }
        let inverse = basis.clone().try_inverse().ok_or(Error::SingularBasis)?;
        Ok(Lattice { basis, inverse, covolume: det.abs(), exact_tag: None })
    }

    pub fn identity(d: usize) -> Self {
        Lattice::from_matrix(DMatrix::identity(d, d)).expect("identity is regular")
    }

    /// Γ = {(n + mφ, n + mφ̄)}: basis columns (1, 1) and (φ, φ̄).
    pub fn golden() -> Self {
        let s5 = 5f64.sqrt();
        let phi = 0.5 * (1.0 + s5);
        let phibar = 0.5 * (1.0 - s5);
        let mut l = Lattice::from_rows(&[vec![1.0, phi], vec![1.0, phibar]]).expect("regular");
        l.exact_tag = Some(ExactTag::Golden);
        l
    }

    pub fn dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn inverse(&self) -> &DMatrix<f64> {
        &self.inverse
    }

    pub fn covolume(&self) -> f64 {
        self.covolume
    }

    /// Basis of the dual is the inverse transpose. The stored inverse makes
    /// `dual(dual(L))` reproduce `L` bit for bit.
    pub fn dual(&self) -> Lattice {
        let exact_tag = match &self.exact_tag {
            Some(ExactTag::Liouville { data, dual }) => {
                Some(ExactTag::Liouville { data: data.clone(), dual: !dual })
            }
            _ => None,
        };
        Lattice {
            basis: self.inverse.transpose(),
            inverse: self.basis.transpose(),
            covolume: 1.0 / self.covolume,
            exact_tag,
        }
    }

    /// `basis · coords`, summed column by column.
    pub fn point(&self, coords: &[i64]) -> Vec<f64> {
        let d = self.dim();
        let mut x = vec![0.0; d];
        for (j, &k) in coords.iter().enumerate() {
            if k != 0 {
                let kf = k as f64;
                for (i, xi) in x.iter_mut().enumerate() {
                    *xi += self.basis[(i, j)] * kf;
                }
            }
        }
        x
    }

    pub fn lattice_point(&self, coords: Vec<i64>) -> LatticePoint {
        let point = self.point(&coords);
        LatticePoint { coords, point }
    }

    /// Real coordinates `basis⁻¹ · x`.
    pub fn coordinates(&self, x: &[f64]) -> Vec<f64> {
        let d = self.dim();
        (0..d).map(|i| (0..d).map(|j| self.inverse[(i, j)] * x[j]).sum()).collect()
    }

    /// Split `x = basis·coords + remainder` with `basis⁻¹·remainder ∈ [0,1)^d`.
    pub fn reduce_to_fundamental(&self, x: &[f64]) -> Result<(Vec<i64>, Vec<f64>)> {
        check_dim(self.dim(), x.len())?;
        let u = self.coordinates(x);
        let mut k: Vec<i64> = u.iter().map(|v| v.floor() as i64).collect();
        let mut rem = sub(x, &self.point(&k));
        // Guard the floor against rounding on either side of an integer.
        for _ in 0..3 {
            let v = self.coordinates(&rem);
            let mut fixed = true;
            for (i, vi) in v.iter().enumerate() {
                if *vi >= 1.0 {
                    k[i] += 1;
                    fixed = false;
                } else if *vi < 0.0 {
                    k[i] -= 1;
                    fixed = false;
                }
            }
            if fixed {
                break;
            }
            rem = sub(x, &self.point(&k));
        }
        Ok((k, rem))
    }

    /// Samples `basis · u` with `u` uniform in `[0,1)^d`. Sample `i` uses its
    /// own ChaCha stream, so results do not depend on scheduling.
    pub fn sample_fundamental(&self, n: usize, seed: u64) -> Vec<Vec<f64>> {
        exec::map_range(n, |i| {
            let mut rng = sample_rng(seed, i as u64);
            let u: Vec<f64> = (0..self.dim()).map(|_| rng.random::<f64>()).collect();
            self.apply_real(&u)
        })
    }

    pub(crate) fn apply_real(&self, u: &[f64]) -> Vec<f64> {
        let d = self.dim();
        (0..d).map(|i| (0..d).map(|j| self.basis[(i, j)] * u[j]).sum()).collect()
    }

    /// Integer coordinate box covering every lattice point `γ` with `γ + shift`
    /// in the axis box `center ± halfwidths`.
    pub fn coordinate_bounds(&self, center: &[f64], halfwidths: &[f64], shift: &[f64]) -> Vec<(i64, i64)> {
        let d = self.dim();
        let c = sub(center, shift);
        let mc = self.coordinates(&c);
        (0..d)
            .map(|i| {
                let rad: f64 = (0..d).map(|j| self.inverse[(i, j)].abs() * halfwidths[j]).sum();
                let pad = 1e-9 * (1.0 + mc[i].abs() + rad);
                ((mc[i] - rad - pad).ceil() as i64, (mc[i] + rad + pad).floor() as i64)
            })
            .collect()
    }
}

pub(crate) fn sample_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// A product region `down × left` in the split space.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductRegion<'a> {
    pub split: SplitSpace,
    pub down: &'a Region,
    pub left: &'a Region,
}

impl ProductRegion<'_> {
    fn check(&self) -> Result<()> {
        check_dim(self.split.d_down, self.down.dim())?;
        check_dim(self.split.d_left, self.left.dim())
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.down.contains_unchecked(self.split.down(x)) && self.left.contains_unchecked(self.split.left(x))
    }

    pub fn grazing(&self, x: &[f64]) -> bool {
        let gd = self.down.signed_gap(self.split.down(x));
        let gl = self.left.signed_gap(self.split.left(x));
        (gd.abs() <= GRAZE && gl <= GRAZE) || (gl.abs() <= GRAZE && gd <= GRAZE)
    }

    fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        let (cd, hd) = self.down.bounding_box();
        let (cl, hl) = self.left.bounding_box();
        ([cd, cl].concat(), [hd, hl].concat())
    }
}

fn intersect(a: &[(f64, f64)], b: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for &(x0, x1) in a {
        for &(y0, y1) in b {
            let lo = x0.max(y0);
            let hi = x1.min(y1);
            if lo <= hi {
                out.push((lo, hi));
            }
        }
    }
    out.sort_by(|p, q| p.0.total_cmp(&q.0));
    out
}

/// Row structure of an enumeration: the inner coordinate runs along lines,
/// the other coordinates index rows.
struct Plan<'a> {
    lattice: &'a Lattice,
    region: ProductRegion<'a>,
    shift: &'a [f64],
    bounds: Vec<(i64, i64)>,
    inner: usize,
    outer: Vec<usize>,
    rows: u64,
    down_wide: Region,
    left_wide: Region,
}

impl<'a> Plan<'a> {
    fn new(lattice: &'a Lattice, region: ProductRegion<'a>, shift: &'a [f64]) -> Result<Self> {
        region.check()?;
        check_dim(lattice.dim(), region.split.dim())?;
        check_dim(lattice.dim(), shift.len())?;
        let (c, h) = region.bounding_box();
        if c.iter().chain(&h).any(|x| !x.is_finite()) {
            return Err(Error::InvalidRegion("region is unbounded".into()));
        }
        let bounds = lattice.coordinate_bounds(&c, &h, shift);
        let inner = (0..bounds.len())
            .max_by_key(|&i| (bounds[i].1 - bounds[i].0, std::cmp::Reverse(i)))
            .unwrap_or(0);
        let outer: Vec<usize> = (0..bounds.len()).filter(|&i| i != inner).collect();
        let mut rows: u64 = 1;
        for &i in &outer {
            let w = (bounds[i].1 - bounds[i].0 + 1).max(0) as u64;
            rows = rows.saturating_mul(w);
        }
        if bounds.iter().any(|b| b.1 < b.0) {
            rows = 0;
        }
        if rows > MAX_ROWS {
            return Err(Error::BudgetExceeded(format!("{rows} enumeration rows")));
        }
        let scale = c.iter().zip(&h).map(|(c, h)| c.abs() + h).fold(1.0, f64::max);
        let margin = 4.0 * GRAZE + 1e-13 * scale;
        let down_wide = region.down.inflate(margin).expect("inflation is nonempty");
        let left_wide = region.left.inflate(margin).expect("inflation is nonempty");
        Ok(Plan { lattice, region, shift, bounds, inner, outer, rows, down_wide, left_wide })
    }

    /// Visit the candidates of row `r` in increasing inner coordinate.
    fn row(&self, r: u64, mut visit: impl FnMut(&[i64], &[f64])) {
        let d = self.lattice.dim();
        let mut coords = vec![0i64; d];
        let mut rem = r;
        for &i in self.outer.iter().rev() {
            let w = (self.bounds[i].1 - self.bounds[i].0 + 1) as u64;
            coords[i] = self.bounds[i].0 + (rem % w) as i64;
            rem /= w;
        }
        coords[self.inner] = 0;
        let mut p = self.lattice.point(&coords);
        for (pi, si) in p.iter_mut().zip(self.shift) {
            *pi += si;
        }
        let dir: Vec<f64> = (0..d).map(|i| self.lattice.basis[(i, self.inner)]).collect();
        let split = self.region.split;
        let a = self.down_wide.line_intervals(split.down(&p), split.down(&dir));
        if a.is_empty() {
            return;
        }
        let b = self.left_wide.line_intervals(split.left(&p), split.left(&dir));
        let (lo_b, hi_b) = self.bounds[self.inner];
        let mut last = i64::MIN;
        for (lo, hi) in intersect(&a, &b) {
            let lo = if lo.is_finite() { (lo.ceil() as i64).max(lo_b) } else { lo_b };
            let hi = if hi.is_finite() { (hi.floor() as i64).min(hi_b) } else { hi_b };
            let lo = lo.max(last.saturating_add(1));
            for k in lo..=hi {
                coords[self.inner] = k;
                let mut x = self.lattice.point(&coords);
                for (xi, si) in x.iter_mut().zip(self.shift) {
                    *xi += si;
                }
                visit(&coords, &x);
            }
            last = last.max(hi);
        }
    }
}

/// All `γ ∈ Γ` with `γ + shift` in `down × left`, sorted lexicographically by
/// integer coordinates.
pub fn enumerate_in(
    lattice: &Lattice,
    region: ProductRegion<'_>,
    shift: &[f64],
) -> Result<Enumeration> {
    let plan = Plan::new(lattice, region, shift)?;
    let rows = exec::map_range(plan.rows.div_ceil(ROW_CHUNK) as usize, |c| {
        let mut pts = Vec::new();
        let mut warn = 0u64;
        let lo = c as u64 * ROW_CHUNK;
        for r in lo..(lo + ROW_CHUNK).min(plan.rows) {
            plan.row(r, |k, x| {
                if plan.region.grazing(x) {
                    warn += 1;
                }
                if plan.region.contains(x) {
                    let point: Vec<f64> = x.iter().zip(shift).map(|(a, b)| a - b).collect();
                    pts.push(LatticePoint { coords: k.to_vec(), point });
                }
            });
        }
        (pts, warn)
    });
    let mut out = Enumeration::default();
    for (p, w) in rows {
        out.points.extend(p);
        out.boundary_warnings += w;
    }
    out.points.sort_by(|a, b| a.coords.cmp(&b.coords));
    Ok(out)
}

const ROW_CHUNK: u64 = 64;

/// Number of points `enumerate_in` would return, plus grazing warnings,
/// without materializing them.
pub fn count_in(lattice: &Lattice, region: ProductRegion<'_>, shift: &[f64]) -> Result<(u64, u64)> {
    let plan = Plan::new(lattice, region, shift)?;
    let chunks = plan.rows.div_ceil(ROW_CHUNK) as usize;
    Ok(exec::reduce(
        chunks,
        (0u64, 0u64),
        |c| {
            let mut n = 0u64;
            let mut warn = 0u64;
            let lo = c as u64 * ROW_CHUNK;
            for r in lo..(lo + ROW_CHUNK).min(plan.rows) {
                plan.row(r, |_, x| {
                    if plan.region.grazing(x) {
                        warn += 1;
                    }
                    if plan.region.contains(x) {
                        n += 1;
                    }
                });
            }
            (n, warn)
        },
        |a, b| (a.0 + b.0, a.1 + b.1),
    ))
}

/// Deterministic sum of `f(coords, γ + shift)` over lattice points whose
/// shifted position lies in the closure of the (slightly widened) region.
/// `f` is responsible for vanishing outside its support.
pub fn sum_over(
    lattice: &Lattice,
    region: ProductRegion<'_>,
    shift: &[f64],
    f: impl Fn(&[i64], &[f64]) -> f64 + Sync + Send,
) -> Result<f64> {
    let plan = Plan::new(lattice, region, shift)?;
    let chunks = plan.rows.div_ceil(ROW_CHUNK) as usize;
    Ok(exec::sum(chunks, |c| {
        let mut acc = 0.0;
        let lo = c as u64 * ROW_CHUNK;
        for r in lo..(lo + ROW_CHUNK).min(plan.rows) {
            plan.row(r, |k, x| acc += f(k, x));
        }
        acc
    }))
}
