//! Cut-and-project sets: point generation, counts and discrepancy.
//!
//! A lattice point `γ` contributes to the count at scale `t` when
//! `γ − s ∈ tΩ▽ × Ω◁`. The corresponding point of the model set is
//! `π▽(γ − s)`, and its internal coordinate (star map) is `π◁(γ − s)`.

use crate::diophantine::PsiFunction;
use crate::error::{check_dim, Error, Result};
use crate::exec;
use crate::geometry::{Region, SplitSpace};
use crate::lattice::{count_in, enumerate_in, Lattice, ProductRegion};
use serde::Serialize;

#[derive(Clone, Debug, PartialEq)]
pub struct ModelSetSpec {
    pub split: SplitSpace,
    pub lattice: Lattice,
    pub shift: Vec<f64>,
    pub window: Region,
    pub search: Region,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CountReport {
    pub t: f64,
    pub count: u64,
    pub main_term: f64,
    pub discrepancy: f64,
    pub boundary_warnings: u64,
}

/// A generated point together with its lift.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelPoint {
    pub coords: Vec<i64>,
    pub down: Vec<f64>,
    pub star: Vec<f64>,
}

impl ModelSetSpec {
    pub fn new(
        split: SplitSpace,
        lattice: Lattice,
        shift: Vec<f64>,
        window: Region,
        search: Region,
    ) -> Result<Self> {
        check_dim(split.dim(), lattice.dim())?;
        check_dim(split.dim(), shift.len())?;
        check_dim(split.d_left, window.dim())?;
        check_dim(split.d_down, search.dim())?;
        window.validate()?;
        search.validate()?;
        if shift.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter("shift must be finite".into()));
        }
        Ok(ModelSetSpec { split, lattice, shift, window, search })
    }

    /// `vol(Ω◁)/covol(Γ)`, the density of the model set.
    pub fn density(&self) -> f64 {
        self.window.volume() / self.lattice.covolume()
    }

    pub fn main_term(&self, t: f64) -> f64 {
        self.search.volume() * self.density() * t.powi(self.split.d_down as i32)
    }

    pub fn with_shift(&self, shift: Vec<f64>) -> Self {
        ModelSetSpec { shift, ..self.clone() }
    }

    pub(crate) fn neg_shift(&self) -> Vec<f64> {
        self.shift.iter().map(|x| -x).collect()
    }
}

fn check_t(t: f64) -> Result<()> {
    if t.is_finite() && t > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("scale t = {t} must be positive")))
    }
}

/// Lifted points of the model set inside `tΩ▽`, in lexicographic order of
/// their lattice coordinates.
pub fn lifted_points(spec: &ModelSetSpec, t: f64) -> Result<Vec<ModelPoint>> {
    check_t(t)?;
    let search = spec.search.dilate(t)?;
    let shift = spec.neg_shift();
    let region = ProductRegion { split: spec.split, down: &search, left: &spec.window };
    let e = enumerate_in(&spec.lattice, region, &shift)?;
    Ok(e.points
        .into_iter()
        .map(|p| {
            let x: Vec<f64> = p.point.iter().zip(&spec.shift).map(|(a, b)| a - b).collect();
            ModelPoint {
                coords: p.coords,
                down: spec.split.down(&x).to_vec(),
                star: spec.split.left(&x).to_vec(),
            }
        })
        .collect())
}

/// Points `π▽(γ − s)` of the model set inside `tΩ▽`.
pub fn points(spec: &ModelSetSpec, t: f64) -> Result<Vec<Vec<f64>>> {
    Ok(lifted_points(spec, t)?.into_iter().map(|p| p.down).collect())
}

/// Count of model-set points in an arbitrary search region (no dilation).
pub fn count_region(spec: &ModelSetSpec, search: &Region) -> Result<(u64, u64)> {
    let shift = spec.neg_shift();
    let region = ProductRegion { split: spec.split, down: search, left: &spec.window };
    count_in(&spec.lattice, region, &shift)
}

pub fn count(spec: &ModelSetSpec, t: f64) -> Result<CountReport> {
    check_t(t)?;
    let search = spec.search.dilate(t)?;
    let (n, warnings) = count_region(spec, &search)?;
    let main_term = spec.main_term(t);
    Ok(CountReport {
        t,
        count: n,
        main_term,
        discrepancy: n as f64 - main_term,
        boundary_warnings: warnings,
    })
}

pub fn discrepancy_sweep(spec: &ModelSetSpec, t_grid: &[f64]) -> Result<Vec<CountReport>> {
    if t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("t grid must be increasing".into()));
    }
    exec::map_slice(t_grid, |&t| count(spec, t)).into_iter().collect()
}

/// The bound being fitted by [`fit_exponent`].
#[derive(Clone, Debug, PartialEq)]
pub enum FitModel {
    /// `|Δ| ≤ C t^e`, fitting `e`.
    Power,
    /// `|Δ| ≤ C ψ(t)^{-s} t^{d▽}`, fitting `s`.
    Psi { psi: PsiFunction, d_down: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FitResult {
    /// `e` for the power model, `s` for the ψ model.
    pub exponent: f64,
    pub constant: f64,
    /// Root mean square residual in log coordinates.
    pub residual: f64,
    pub used_rows: usize,
    pub excluded_rows: usize,
}

/// Least-squares fit of the running maximum of `|Δ|` in log-log coordinates.
/// Rows with `Δ = 0` are excluded and counted.
pub fn fit_exponent(table: &[CountReport], model: &FitModel) -> Result<FitResult> {
    let mut env = 0.0f64;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut excluded = 0;
    for row in table {
        let a = row.discrepancy.abs();
        if a == 0.0 {
            excluded += 1;
            continue;
        }
        env = env.max(a);
        match model {
            FitModel::Power => {
                xs.push(row.t.ln());
                ys.push(env.ln());
            }
            FitModel::Psi { psi, d_down } => {
                let p = psi.eval(row.t);
                if p <= 1.0 {
                    excluded += 1;
                    continue;
                }
                xs.push(p.ln());
                ys.push(env.ln() - *d_down as f64 * row.t.ln());
            }
        }
    }
    if xs.len() < 5 {
        return Err(Error::InsufficientData(format!(
            "{} usable rows, need at least 5 ({excluded} excluded)",
            xs.len()
        )));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientData("all rows share one abscissa".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    let exponent = match model {
        FitModel::Power => slope,
        FitModel::Psi { .. } => -slope,
    };
    Ok(FitResult {
        exponent,
        constant: intercept.exp(),
        residual,
        used_rows: xs.len(),
        excluded_rows: excluded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z2_axis() -> ModelSetSpec {
        ModelSetSpec::new(
            SplitSpace::new(1, 1).unwrap(),
            Lattice::identity(2),
            vec![0.0, 0.0],
            Region::interval(-0.25, 0.25).unwrap(),
            Region::interval(0.0, 1.0).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn integer_row() {
        let spec = z2_axis();
        let pts = points(&spec, 10.0).unwrap();
        assert_eq!(pts, (0..10).map(|k| vec![k as f64]).collect::<Vec<_>>());
        let c = count(&spec, 10.0).unwrap();
        assert_eq!(c.count, 10);
        assert_eq!(c.main_term, 5.0);
        assert_eq!(c.discrepancy, 5.0);
        assert_eq!(c.count as f64, c.main_term + c.discrepancy);
    }

    #[test]
    fn golden_hundred() {
        let spec = ModelSetSpec::new(
            SplitSpace::new(1, 1).unwrap(),
            Lattice::golden(),
            vec![0.0, 0.0],
            Region::interval(0.0, 1.0).unwrap(),
            Region::interval(0.0, 1.0).unwrap(),
        )
        .unwrap();
        let c = count(&spec, 100.0).unwrap();
        assert!((c.main_term - 100.0 / 5f64.sqrt()).abs() < 1e-12);
        assert!(c.discrepancy.abs() <= 2.0);
    }

    #[test]
    fn sweep_echoes_count() {
        let spec = z2_axis();
        let s = discrepancy_sweep(&spec, &[7.5]).unwrap();
        assert_eq!(s[0], count(&spec, 7.5).unwrap());
        assert!(discrepancy_sweep(&spec, &[2.0, 1.0]).is_err());
    }

    #[test]
    fn exact_power_law_fit() {
        let table: Vec<CountReport> = (1..=10)
            .map(|i| {
                let t = 10f64 * 1.7f64.powi(i);
                CountReport { t, count: 0, main_term: 0.0, discrepancy: t.sqrt(), boundary_warnings: 0 }
            })
            .collect();
        let f = fit_exponent(&table, &FitModel::Power).unwrap();
        assert!((f.exponent - 0.5).abs() < 1e-12);
        assert!(f.residual < 1e-12);
        assert!((f.constant - 1.0).abs() < 1e-10);
    }

    #[test]
    fn fit_needs_rows() {
        let table: Vec<CountReport> = (1..=6)
            .map(|i| CountReport {
                t: i as f64,
                count: 0,
                main_term: 0.0,
                discrepancy: if i % 2 == 0 { 0.0 } else { 1.0 },
                boundary_warnings: 0,
            })
            .collect();
        assert!(matches!(fit_exponent(&table, &FitModel::Power), Err(Error::InsufficientData(_))));
    }
}
