//! Repellence profiles, irrationality scans and exact ψ-Liouville data.
//!
//! The Liouville constructions never round: exponents, denominators and
//! numerators are big integers and every inequality is checked against
//! certified lower bounds for `log₂ ψ(2^K)` held as exact dyadic rationals.

use crate::error::{Error, Result};
use crate::geometry::{norm, Region, SplitSpace};
use crate::lattice::{enumerate_in, Lattice, LatticePoint, ProductRegion};
use nalgebra::DMatrix;
use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::sync::Arc;

/// Default cap on `c_depth`, the bit length of the largest denominator.
pub const DEFAULT_BIT_BUDGET: u64 = 1 << 32;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum PsiFunction {
    /// `ψ(r) = c·r^μ`
    Power { c: f64, mu: f64 },
    /// `ψ(r) = c·log(1+r)^β`
    Log { c: f64, beta: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GrowthClass {
    Speed(f64),
    Slow,
}

impl PsiFunction {
    pub fn power(c: f64, mu: f64) -> Result<Self> {
        let p = PsiFunction::Power { c, mu };
        p.validate()?;
        Ok(p)
    }

    pub fn log(c: f64, beta: f64) -> Result<Self> {
        let p = PsiFunction::Log { c, beta };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let (a, b) = match *self {
            PsiFunction::Power { c, mu } => (c, mu),
            PsiFunction::Log { c, beta } => (c, beta),
        };
        if a.is_finite() && b.is_finite() && a > 0.0 && b > 0.0 {
            Ok(())
        } else {
            Err(Error::InvalidParameter("ψ parameters must be positive".into()))
        }
    }

    pub fn eval(&self, r: f64) -> f64 {
        match *self {
            PsiFunction::Power { c, mu } => c * r.powf(mu),
            PsiFunction::Log { c, beta } => c * r.ln_1p().powf(beta),
        }
    }

    pub fn inverse(&self, y: f64) -> f64 {
        match *self {
            PsiFunction::Power { c, mu } => (y / c).powf(1.0 / mu),
            PsiFunction::Log { c, beta } => (y / c).powf(1.0 / beta).exp_m1(),
        }
    }

    pub fn growth(&self) -> GrowthClass {
        match *self {
            PsiFunction::Power { mu, .. } => GrowthClass::Speed(mu),
            PsiFunction::Log { .. } => GrowthClass::Slow,
        }
    }

    /// Float estimate of `log₂ ψ⁻¹(2^e)`; `None` if it overflows a double.
    fn log2_inverse_pow2(&self, e: f64) -> Option<f64> {
        let ln2 = std::f64::consts::LN_2;
        let v = match *self {
            PsiFunction::Power { c, mu } => (e - c.log2()) / mu,
            PsiFunction::Log { c, beta } => {
                let ln_u = (e * ln2 - c.ln()) / beta;
                if ln_u > 700.0 {
                    return None;
                }
                let u = ln_u.exp();
                // log₂(e^u − 1)
                u / ln2 + (-(-u).exp()).ln_1p() / ln2
            }
        };
        v.is_finite().then_some(v)
    }

    /// Certifies `ψ(2^k) ≥ 2^e` exactly. A `false` answer means "not
    /// certified", which only happens within rounding of the boundary.
    pub fn certify_pow2(&self, k: &BigUint, e: &BigUint) -> bool {
        let target = Dyadic::from_int(BigInt::from(e.clone()));
        match *self {
            PsiFunction::Power { c, mu } => {
                // log₂ c + μk ≥ e
                let lc = exact_log2(c).unwrap_or_else(|| Dyadic::from_f64(log2_lower(c)));
                let lhs = lc.add(&Dyadic::from_f64(mu).mul(&Dyadic::from_uint(k)));
                lhs.cmp_value(&target) != Ordering::Less
            }
            PsiFunction::Log { c, beta } => {
                // ln(1+2^k) ≥ k·ln 2 + 2^{-k} − 2^{-2k-1}
                let (ln2_lo, _) = ln2_bounds();
                let mut l = Dyadic::from_uint(k).mul(ln2_lo);
                if let Some(kk) = k.to_i64().filter(|&kk| kk <= 512) {
                    let x = Dyadic { m: BigInt::one(), e: -kk };
                    let half_x2 = Dyadic { m: BigInt::one(), e: -2 * kk - 1 };
                    l = l.add(&x).add(&half_x2.neg());
                }
                if beta.fract() == 0.0 && beta <= 64.0 {
                    // c·l^β ≥ 2^e, exactly
                    let mut pw = Dyadic::from_int(BigInt::one());
                    for _ in 0..beta as u32 {
                        pw = pw.mul(&l);
                    }
                    let lhs = Dyadic::from_f64(c).mul(&pw);
                    let rhs = Dyadic { m: BigInt::one(), e: 0 }.shl_big(e);
                    match rhs {
                        Some(rhs) => lhs.cmp_value(&rhs) != Ordering::Less,
                        None => false,
                    }
                } else {
                    // log₂ c + β·log₂ l ≥ e, with padded logarithms
                    let lf = l.to_f64();
                    if !(lf > 0.0) {
                        return false;
                    }
                    let ll = if lf.is_finite() { log2_lower(lf) } else { return false };
                    let lc = exact_log2(c).unwrap_or_else(|| Dyadic::from_f64(log2_lower(c)));
                    let lhs = lc.add(&Dyadic::from_f64(beta).mul(&Dyadic::from_f64(ll)));
                    lhs.cmp_value(&target) != Ordering::Less
                }
            }
        }
    }
}

fn log2_lower(x: f64) -> f64 {
    let v = x.log2();
    v - 1e-14 * (1.0 + v.abs())
}

/// `log₂ x` when `x` is an exact power of two.
fn exact_log2(x: f64) -> Option<Dyadic> {
    let d = Dyadic::from_f64(x);
    let m = d.m.to_i64()?;
    if m > 0 && (m & (m - 1)) == 0 {
        Some(Dyadic::from_int(BigInt::from(d.e + m.trailing_zeros() as i64)))
    } else {
        None
    }
}

/// Working precision (bits) of the ln 2 enclosure.
const LN2_BITS: i64 = 256;

/// Dyadic bounds `lo < ln 2 < hi` from `ln 2 = Σ_{k≥1} 1/(k·2^k)`.
pub fn ln2_bounds() -> &'static (Dyadic, Dyadic) {
    static CELL: std::sync::OnceLock<(Dyadic, Dyadic)> = std::sync::OnceLock::new();
    CELL.get_or_init(|| {
        let p = LN2_BITS as usize;
        let terms = p + 8;
        let mut acc = BigInt::zero();
        for k in 1..=terms {
            // floor(2^p / (k·2^k)) underestimates each term by < 1
            acc += (BigInt::one() << p) / (BigInt::from(k) << k);
        }
        // truncation error < number of terms; tail < 2^{p-terms}
        let hi = &acc + BigInt::from(terms + 2);
        (Dyadic { m: acc, e: -LN2_BITS }, Dyadic { m: hi, e: -LN2_BITS })
    })
}

/// An exact dyadic rational `m·2^e`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dyadic {
    m: BigInt,
    e: i64,
}

impl Dyadic {
    pub fn from_int(m: BigInt) -> Self {
        Dyadic { m, e: 0 }
    }

    pub fn from_uint(m: &BigUint) -> Self {
        Dyadic { m: BigInt::from(m.clone()), e: 0 }
    }

    /// Exact value of a finite double.
    pub fn from_f64(x: f64) -> Self {
        assert!(x.is_finite(), "dyadic from non-finite double");
        if x == 0.0 {
            return Dyadic { m: BigInt::zero(), e: 0 };
        }
        let bits = x.to_bits();
        let sign = if bits >> 63 == 0 { 1i64 } else { -1 };
        let exp = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (mant, e) = if exp == 0 { (frac, -1074) } else { (frac | (1u64 << 52), exp - 1075) };
        Dyadic { m: BigInt::from(mant) * sign, e }
    }

    fn aligned(&self, other: &Dyadic) -> (BigInt, BigInt, i64) {
        let e = self.e.min(other.e);
        let a = &self.m << (self.e - e) as usize;
        let b = &other.m << (other.e - e) as usize;
        (a, b, e)
    }

    pub fn add(&self, other: &Dyadic) -> Dyadic {
        let (a, b, e) = self.aligned(other);
        Dyadic { m: a + b, e }
    }

    pub fn mul(&self, other: &Dyadic) -> Dyadic {
        Dyadic { m: &self.m * &other.m, e: self.e + other.e }
    }

    pub fn neg(&self) -> Dyadic {
        Dyadic { m: -&self.m, e: self.e }
    }

    /// Multiply by `2^k`; `None` if `k` does not fit an exponent.
    pub fn shl_big(&self, k: &BigUint) -> Option<Dyadic> {
        let k = k.to_i64()?;
        Some(Dyadic { m: self.m.clone(), e: self.e.checked_add(k)? })
    }

    pub fn cmp_value(&self, other: &Dyadic) -> Ordering {
        let (a, b, _) = self.aligned(other);
        a.cmp(&b)
    }

    pub fn to_f64(&self) -> f64 {
        let b = self.m.bits() as i64;
        if b <= 60 {
            return self.m.to_f64().unwrap_or(0.0) * (self.e as f64).exp2();
        }
        let shifted: BigInt = &self.m >> (b - 60) as usize;
        shifted.to_f64().unwrap_or(0.0) * ((self.e + b - 60) as f64).exp2()
    }
}

/// Verified ψ-Liouville data: exponents `c_1 < … < c_{depth+1}`, convergents
/// `q_n = 2^{c_n}` and `m_n = Σ_{j≤n} 2^{c_n − c_j}` for `n ≤ depth`.
/// The last exponent only enters the tail bound and is never materialized.
#[derive(Clone, Debug, PartialEq)]
pub struct LiouvilleData {
    pub psi: PsiFunction,
    pub exponents: Vec<BigUint>,
    pub q: Vec<BigUint>,
    pub m: Vec<BigUint>,
    pub a_approx: f64,
    pub bit_budget: u64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LiouvilleJson {
    psi: PsiFunction,
    depth: usize,
    bit_budget: u64,
    a_approx: f64,
    c_n: Vec<String>,
    q_n: Vec<String>,
    m_n: Vec<String>,
}

fn parse_uint(s: &str) -> Result<BigUint> {
    s.parse::<BigUint>()
        .map_err(|_| Error::Config(format!("not a decimal integer: {s}")))
}

impl LiouvilleData {
    pub fn depth(&self) -> usize {
        self.q.len()
    }

    /// `2^{lo} ≤ ‖q_n a‖ < 2^{lo+1}` with `lo = c_n − c_{n+1}` (n is 1-based).
    pub fn distance_exponent(&self, n: usize) -> BigInt {
        BigInt::from(self.exponents[n - 1].clone()) - BigInt::from(self.exponents[n].clone())
    }

    /// `‖q_n a‖` as a double (the exact value lies in the dyadic bracket).
    pub fn distance_f64(&self, n: usize) -> f64 {
        let c = &self.exponents;
        let mut s = 0.0;
        for j in n..c.len() {
            let d = BigInt::from(c[n - 1].clone()) - BigInt::from(c[j].clone());
            match d.to_i64() {
                Some(d) if d > -1100 => s += (d as f64).exp2(),
                _ => {}
            }
        }
        s
    }

    /// Exact `|q_n − m_n|`.
    pub fn left_gap(&self, n: usize) -> BigUint {
        let (q, m) = (&self.q[n - 1], &self.m[n - 1]);
        if q >= m { q - m } else { m - q }
    }

    /// Re-run every exact check. Called on construction and on load.
    pub fn verify(&self) -> Result<()> {
        self.psi.validate()?;
        let d = self.depth();
        if d == 0 || self.exponents.len() != d + 1 || self.m.len() != d {
            return Err(Error::Verification("inconsistent Liouville data lengths".into()));
        }
        if self.exponents[d - 1] > BigUint::from(self.bit_budget) {
            return Err(Error::BudgetExceeded(format!(
                "c_{d} = {} exceeds bit budget {}",
                self.exponents[d - 1], self.bit_budget
            )));
        }
        for n in 1..=d {
            let c_n = &self.exponents[n - 1];
            let c_next = &self.exponents[n];
            if c_next < &(c_n + 2u32) {
                return Err(Error::Verification(format!("gap after c_{n} is below 2")));
            }
            let c_n_usize = c_n
                .to_usize()
                .ok_or_else(|| Error::BudgetExceeded(format!("c_{n} does not fit in memory")))?;
            if self.q[n - 1] != BigUint::one() << c_n_usize {
                return Err(Error::Verification(format!("q_{n} is not 2^c_{n}")));
            }
            let mut m = BigUint::zero();
            for c_j in &self.exponents[..n] {
                let sh = (c_n - c_j).to_usize().expect("below c_n");
                m += BigUint::one() << sh;
            }
            if self.m[n - 1] != m {
                return Err(Error::Verification(format!("m_{n} is not the nearest integer to q_{n}·a")));
            }
            // ‖q_n a‖ < 2^{c_n − c_{n+1} + 1}, so ‖q_n a‖⁻¹ > 2^K with
            // K = c_{n+1} − c_n − 1, and ψ increasing gives ψ(‖q_n a‖⁻¹) ≥ ψ(2^K).
            let k = c_next - c_n - 1u32;
            if !self.psi.certify_pow2(&k, c_n) {
                return Err(Error::Verification(format!("ψ(‖q_{n} a‖⁻¹) ≥ q_{n} not certified")));
            }
        }
        if self.a_approx != float_sum(&self.exponents) {
            return Err(Error::Verification("float shadow of a disagrees with exponents".into()));
        }
        Ok(())
    }

    /// The three conditions making the associated lattice ψ-Liouvillean:
    /// `|ξ▽|` strictly decreasing, `|ξ◁|` strictly increasing and
    /// `|ξ◁| ≤ ψ(|ξ▽|⁻¹)`, all certified exactly.
    pub fn verify_lattice_conditions(&self) -> Result<()> {
        let d = self.depth();
        for n in 1..=d {
            if n < d {
                // upper(n+1) = 2^{c_{n+1} − c_{n+2} + 1} ≤ lower(n) = 2^{c_n − c_{n+1}}
                let up_next = self.distance_exponent(n + 1) + 1;
                if up_next > self.distance_exponent(n) {
                    return Err(Error::Verification(format!("|ξ▽| not decreasing at n = {n}")));
                }
                if self.left_gap(n + 1) <= self.left_gap(n) {
                    return Err(Error::Verification(format!("|ξ◁| not increasing at n = {n}")));
                }
            }
            let gap = self.left_gap(n);
            let k = &self.exponents[n] - &self.exponents[n - 1] - 1u32;
            // |ξ◁| < 2^{bits}
            if gap > BigUint::zero() && !self.psi.certify_pow2(&k, &BigUint::from(gap.bits())) {
                return Err(Error::Verification(format!("|ξ◁| ≤ ψ(|ξ▽|⁻¹) not certified at n = {n}")));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let j = LiouvilleJson {
            psi: self.psi,
            depth: self.depth(),
            bit_budget: self.bit_budget,
            a_approx: self.a_approx,
            c_n: self.exponents.iter().map(|c| c.to_string()).collect(),
            q_n: self.q.iter().map(|c| c.to_string()).collect(),
            m_n: self.m.iter().map(|c| c.to_string()).collect(),
        };
        serde_json::to_string_pretty(&j).expect("serializable")
    }

    /// Parse and re-verify.
    pub fn from_json(s: &str) -> Result<Self> {
        let j: LiouvilleJson = serde_json::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        let data = LiouvilleData {
            psi: j.psi,
            exponents: j.c_n.iter().map(|s| parse_uint(s)).collect::<Result<_>>()?,
            q: j.q_n.iter().map(|s| parse_uint(s)).collect::<Result<_>>()?,
            m: j.m_n.iter().map(|s| parse_uint(s)).collect::<Result<_>>()?,
            a_approx: j.a_approx,
            bit_budget: j.bit_budget,
        };
        if data.depth() != j.depth {
            return Err(Error::Verification("depth field disagrees with data".into()));
        }
        data.verify()?;
        Ok(data)
    }
}

fn float_sum(exponents: &[BigUint]) -> f64 {
    let mut terms: Vec<f64> = exponents
        .iter()
        .filter_map(|c| c.to_u64().filter(|&c| c < 1100).map(|c| (-(c as f64)).exp2()))
        .collect();
    terms.reverse();
    terms.iter().sum()
}

fn next_exponent(psi: &PsiFunction, c: &BigUint) -> Result<BigUint> {
    let cf = c.to_f64().unwrap_or(f64::INFINITY);
    let est = psi
        .log2_inverse_pow2(cf)
        .filter(|v| *v < 1.8e19)
        .ok_or_else(|| Error::BudgetExceeded("next Liouville exponent overflows".into()))?;
    let ok = |k: &BigUint| psi.certify_pow2(k, c);
    let mut k = BigUint::from(est.ceil().max(0.0) as u64);
    let mut bumps = 0;
    while !ok(&k) {
        k += 1u32;
        bumps += 1;
        if bumps > 4096 {
            return Err(Error::Verification("could not certify the greedy step".into()));
        }
    }
    while !k.is_zero() && ok(&(&k - 1u32)) {
        k -= 1u32;
    }
    Ok(c + k + 1u32)
}

/// Greedy ψ-Liouville number `a = Σ 2^{-c_j}` with `c_1 = 1`.
pub fn liouville_number(psi: PsiFunction, depth: usize) -> Result<LiouvilleData> {
    liouville_number_with(psi, depth, 1, DEFAULT_BIT_BUDGET)
}

pub fn liouville_number_with(
    psi: PsiFunction,
    depth: usize,
    c1: u64,
    bit_budget: u64,
) -> Result<LiouvilleData> {
    psi.validate()?;
    if depth == 0 || c1 == 0 {
        return Err(Error::InvalidParameter("depth and c_1 must be at least 1".into()));
    }
    let mut exponents = vec![BigUint::from(c1)];
    for k in 1..=depth {
        let last = exponents.last().expect("nonempty");
        if k <= depth && last > &BigUint::from(bit_budget) {
            return Err(Error::BudgetExceeded(format!("c_{k} = {last} exceeds bit budget {bit_budget}")));
        }
        let next = next_exponent(&psi, last)?;
        exponents.push(next);
    }
    let mut q = Vec::with_capacity(depth);
    let mut m = Vec::with_capacity(depth);
    for n in 0..depth {
        let c_n = exponents[n].to_usize().expect("within budget");
        q.push(BigUint::one() << c_n);
        let mut mn = BigUint::zero();
        for c_j in &exponents[..=n] {
            mn += BigUint::one() << (c_n - c_j.to_usize().expect("within budget"));
        }
        m.push(mn);
    }
    let data = LiouvilleData { psi, a_approx: float_sum(&exponents), exponents, q, m, bit_budget };
    data.verify()?;
    Ok(data)
}

/// A witness `ξ^(n) = q_n(a e▽ + e◁) − m_n(e▽ + e◁)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LiouvilleWitness {
    pub n: usize,
    pub q: BigUint,
    pub m: BigUint,
    /// `|ξ▽| = ‖q_n a‖ ∈ [2^e, 2^{e+1})` with this `e`.
    pub down_exponent: BigInt,
    /// Exact `|ξ◁| = |q_n − m_n|`.
    pub left: BigUint,
    /// Integer coordinates in the constructed basis, when they fit.
    pub coords: Option<Vec<i64>>,
}

/// ψ-Liouvillean lattice spanned by `a e▽ + e◁`, `e▽ + e◁` and a tail
/// lattice on the remaining coordinates. `e▽` is the first coordinate of
/// E▽ and `e◁` the first coordinate of E◁.
pub fn liouvillean_lattice(
    data: LiouvilleData,
    split: SplitSpace,
    tail: Option<&Lattice>,
) -> Result<(Lattice, Vec<LiouvilleWitness>)> {
    data.verify()?;
    data.verify_lattice_conditions()?;
    let d = split.dim();
    let rest: Vec<usize> = (0..d).filter(|&i| i != 0 && i != split.d_down).collect();
    match tail {
        Some(t) if t.dim() != rest.len() => {
            return Err(Error::DimensionMismatch { expected: rest.len(), got: t.dim() })
        }
        None if !rest.is_empty() => {
            return Err(Error::InvalidParameter("a tail lattice is needed in dimension > 2".into()))
        }
        _ => {}
    }
    let mut b = DMatrix::zeros(d, d);
    b[(0, 0)] = data.a_approx;
    b[(split.d_down, 0)] = 1.0;
    b[(0, 1)] = 1.0;
    b[(split.d_down, 1)] = 1.0;
    if let Some(t) = tail {
        for (jj, _) in rest.iter().enumerate() {
            for (ii, &row) in rest.iter().enumerate() {
                b[(row, jj + 2)] = t.basis()[(ii, jj)];
            }
        }
    }
    let mut lattice = Lattice::from_matrix(b)?;
    let witnesses = (1..=data.depth())
        .map(|n| {
            let q = data.q[n - 1].clone();
            let m = data.m[n - 1].clone();
            let coords = match (q.to_i64(), m.to_i64()) {
                (Some(qi), Some(mi)) => {
                    let mut c = vec![0i64; d];
                    c[0] = qi;
                    c[1] = -mi;
                    Some(c)
                }
                _ => None,
            };
            LiouvilleWitness {
                n,
                down_exponent: data.distance_exponent(n),
                left: data.left_gap(n),
                q,
                m,
                coords,
            }
        })
        .collect();
    lattice.exact_tag = Some(crate::lattice::ExactTag::Liouville { data: Arc::new(data), dual: false });
    Ok((lattice, witnesses))
}

#[derive(Clone, Debug, PartialEq)]
pub struct RepellenceEntry {
    pub epsilon: f64,
    /// `+∞` when no lattice vector in the scanned ball qualifies.
    pub min_left: f64,
    pub witness: Option<LatticePoint>,
}

/// Scan result. Certified only within `search_radius`.
#[derive(Clone, Debug, PartialEq)]
pub struct RepellenceProfile {
    pub entries: Vec<RepellenceEntry>,
    pub search_radius: f64,
    /// Nonzero vectors with `π▽γ = 0` (within 1e−12). Such vectors violate
    /// repellence for every ψ because `ψ(|π▽γ|⁻¹) = ∞`.
    pub axis_hits: Vec<LatticePoint>,
}

fn ball_points(lattice: &Lattice, split: SplitSpace, radius: f64) -> Result<Vec<LatticePoint>> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::InvalidParameter("search radius must be positive".into()));
    }
    let down = Region::ball(vec![0.0; split.d_down], radius * (1.0 + 1e-12))?;
    let left = Region::ball(vec![0.0; split.d_left], radius * (1.0 + 1e-12))?;
    let e = enumerate_in(lattice, ProductRegion { split, down: &down, left: &left }, &vec![0.0; split.dim()])?;
    Ok(e.points
        .into_iter()
        .filter(|p| p.coords.iter().any(|&k| k != 0) && norm(&p.point) <= radius)
        .collect())
}

const AXIS_TOL: f64 = 1e-12;

pub fn repellence_profile(
    lattice: &Lattice,
    split: SplitSpace,
    epsilons: &[f64],
    search_radius: f64,
) -> Result<RepellenceProfile> {
    if epsilons.is_empty() || epsilons.iter().any(|e| !(*e > 0.0)) || epsilons.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidParameter("epsilons must be positive and decreasing".into()));
    }
    let pts = ball_points(lattice, split, search_radius)?;
    let mut axis_hits = Vec::new();
    // (|γ▽|, |γ◁|, index) sorted by |γ▽| so each ε bucket is a prefix.
    let mut keyed: Vec<(f64, f64, usize)> = Vec::new();
    for (i, p) in pts.iter().enumerate() {
        let dn = norm(split.down(&p.point));
        let lf = norm(split.left(&p.point));
        if dn <= AXIS_TOL * (1.0 + lf) {
            axis_hits.push(p.clone());
        } else {
            keyed.push((dn, lf, i));
        }
    }
    keyed.sort_by(|a, b| a.0.total_cmp(&b.0).then(pts[a.2].coords.cmp(&pts[b.2].coords)));
    // Prefix minima of |γ◁| with lexicographically smallest witness on ties.
    let mut best: Vec<Option<usize>> = Vec::with_capacity(keyed.len());
    let mut cur: Option<usize> = None;
    for (j, k) in keyed.iter().enumerate() {
        cur = match cur {
            None => Some(j),
            Some(b) => {
                let kb = &keyed[b];
                let better = k.1 < kb.1 || (k.1 == kb.1 && pts[k.2].coords < pts[kb.2].coords);
                Some(if better { j } else { b })
            }
        };
        best.push(cur);
    }
    let entries = epsilons
        .iter()
        .map(|&eps| {
            let cnt = keyed.partition_point(|k| k.0 <= eps);
            match cnt.checked_sub(1).and_then(|i| best[i]) {
                Some(b) => RepellenceEntry {
                    epsilon: eps,
                    min_left: keyed[b].1,
                    witness: Some(pts[keyed[b].2].clone()),
                },
                None => RepellenceEntry { epsilon: eps, min_left: f64::INFINITY, witness: None },
            }
        })
        .collect();
    Ok(RepellenceProfile { entries, search_radius, axis_hits })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RepellenceCheck {
    pub holds: bool,
    pub worst_margin: f64,
}

/// `holds` iff `min_left(ε) > ψ(1/ε)` at every scanned ε and no nonzero
/// vector lies in E◁. The margin is `min_ε min_left(ε)/ψ(1/ε)`.
pub fn check_repellent(profile: &RepellenceProfile, psi: &PsiFunction) -> Result<RepellenceCheck> {
    if profile.entries.is_empty() {
        return Err(Error::InvalidParameter("empty repellence profile".into()));
    }
    let mut holds = profile.axis_hits.is_empty();
    let mut margin = if holds { f64::INFINITY } else { 0.0 };
    for e in &profile.entries {
        let p = psi.eval(1.0 / e.epsilon);
        if e.min_left.is_finite() {
            margin = margin.min(e.min_left / p);
        }
        if e.min_left <= p {
            holds = false;
        }
    }
    Ok(RepellenceCheck { holds, worst_margin: margin })
}

#[derive(Clone, Debug, PartialEq)]
pub struct IrrationalityScan {
    /// `γ ∈ Γ \ 0` with `|π▽γ| < tol`: the projection to E▽ is not injective.
    pub gamma_hits: Vec<LatticePoint>,
    /// `γ† ∈ Γ† \ 0` with `|π▽γ†| < tol`: `π◁Γ` is not dense in E◁.
    pub dual_hits: Vec<LatticePoint>,
    pub search_radius: f64,
    pub tol: f64,
}

/// Semi-decision for complete irrationality within a finite ball. A clean
/// scan is evidence, not proof.
pub fn irrationality_scan(
    lattice: &Lattice,
    split: SplitSpace,
    search_radius: f64,
    tol: f64,
) -> Result<IrrationalityScan> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter("tolerance must be positive".into()));
    }
    let hits = |l: &Lattice| -> Result<Vec<LatticePoint>> {
        let down = Region::ball(vec![0.0; split.d_down], tol)?;
        let left = Region::ball(vec![0.0; split.d_left], search_radius)?;
        let e = enumerate_in(l, ProductRegion { split, down: &down, left: &left }, &vec![0.0; split.dim()])?;
        Ok(e.points.into_iter().filter(|p| p.coords.iter().any(|&k| k != 0)).collect())
    };
    Ok(IrrationalityScan {
        gamma_hits: hits(lattice)?,
        dual_hits: hits(&lattice.dual())?,
        search_radius,
        tol,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegionClass {
    Ball,
    FinitePerimeter,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum PredictedExponent {
    /// `|Δ| ≲ t^e` up to `t^δ`.
    Power(f64),
    /// `|Δ| ≲ t^{t_power} ψ(t)^{psi_power}` up to `ψ(t)^{sδ}`.
    Slow { t_power: f64, psi_power: f64 },
}

/// Discrepancy exponent with δ = 0.
pub fn predicted_exponent(
    d_down: usize,
    d_left: usize,
    s: f64,
    psi: &PsiFunction,
    region: RegionClass,
) -> Result<PredictedExponent> {
    if d_down == 0 || d_left == 0 || !(s > 0.0 && s <= d_left as f64) {
        return Err(Error::InvalidParameter("need d▽, d◁ ≥ 1 and s ∈ (0, d◁]".into()));
    }
    let (dn, dl) = (d_down as f64, d_left as f64);
    Ok(match psi.growth() {
        GrowthClass::Slow => PredictedExponent::Slow { t_power: dn, psi_power: -s },
        GrowthClass::Speed(mu) => PredictedExponent::Power(match region {
            RegionClass::Ball => dn - 2.0 * s * dn / ((dn + 1.0) * (s + 1.0 / mu) + 2.0 * dl),
            RegionClass::FinitePerimeter => dn - dn * s / (dn * s + dl + 1.0 / mu),
        }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dyadic_exact() {
        let a = Dyadic::from_f64(0.75);
        let b = Dyadic::from_f64(-0.25);
        assert_eq!(a.add(&b).to_f64(), 0.5);
        assert_eq!(a.mul(&b).to_f64(), -0.1875);
        assert_eq!(Dyadic::from_f64(1e-300).to_f64(), 1e-300);
        assert_eq!(Dyadic::from_f64(3.0).cmp_value(&Dyadic::from_int(BigInt::from(3))), Ordering::Equal);
    }

    #[test]
    fn ln2_enclosure() {
        let (lo, hi) = ln2_bounds();
        assert!(lo.cmp_value(hi) == Ordering::Less);
        assert!((lo.to_f64() - std::f64::consts::LN_2).abs() < 1e-16);
        assert!(hi.add(&lo.neg()).to_f64() < 1e-70);
    }

    #[test]
    fn psi_inverse_round_trip() {
        for psi in [PsiFunction::power(2.0, 1.5).unwrap(), PsiFunction::log(1.0, 2.0).unwrap()] {
            for r in [0.5, 3.0, 100.0] {
                assert!((psi.inverse(psi.eval(r)) / r - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn log_greedy_exponents() {
        let d = liouville_number(PsiFunction::log(1.0, 1.0).unwrap(), 3).unwrap();
        let c: Vec<String> = d.exponents.iter().map(|c| c.to_string()).collect();
        assert_eq!(&c[..3], &["1", "5", "53"]);
        // c_4 = 53 + ceil(log₂(e^{2^53} − 1)) + 1
        let expect = 53.0 + (9007199254740992f64 / std::f64::consts::LN_2).ceil() + 1.0;
        assert!((d.exponents[3].to_f64().unwrap() / expect - 1.0).abs() < 1e-15);
    }

    #[test]
    fn power_greedy_doubles() {
        let d = liouville_number(PsiFunction::power(1.0, 1.0).unwrap(), 10).unwrap();
        for w in d.exponents.windows(2) {
            assert_eq!(w[1], &w[0] * 2u32 + 1u32);
        }
        assert_eq!(d.exponents[9], BigUint::from(1023u32));
        d.verify_lattice_conditions().unwrap();
    }

    #[test]
    fn depth_one() {
        let d = liouville_number(PsiFunction::log(1.0, 1.0).unwrap(), 1).unwrap();
        assert_eq!(d.q, vec![BigUint::from(2u32)]);
        assert_eq!(d.m, vec![BigUint::from(1u32)]);
    }

    #[test]
    fn budget_is_enforced() {
        let r = liouville_number(PsiFunction::log(1.0, 1.0).unwrap(), 4);
        assert!(matches!(r, Err(Error::BudgetExceeded(_))));
    }

    #[test]
    fn tampered_data_fails() {
        let mut d = liouville_number(PsiFunction::power(1.0, 1.0).unwrap(), 4).unwrap();
        d.m[2] += 1u32;
        assert!(d.verify().is_err());
        let mut d = liouville_number(PsiFunction::power(1.0, 1.0).unwrap(), 4).unwrap();
        d.exponents[4] -= 2u32;
        assert!(d.verify().is_err());
    }

    #[test]
    fn predicted() {
        let psi = PsiFunction::power(1.0, 1.0).unwrap();
        let b = predicted_exponent(2, 1, 1.0, &psi, RegionClass::Ball).unwrap();
        assert_eq!(b, PredictedExponent::Power(1.5));
        let f = predicted_exponent(2, 1, 1.0, &psi, RegionClass::FinitePerimeter).unwrap();
        assert_eq!(f, PredictedExponent::Power(1.5));
        let slow = predicted_exponent(2, 1, 1.0, &PsiFunction::log(1.0, 1.0).unwrap(), RegionClass::Ball).unwrap();
        assert_eq!(slow, PredictedExponent::Slow { t_power: 2.0, psi_power: -1.0 });
    }
}
