//! Exact LLL reduction over the integers.
//!
//! The reduction is the integral variant (de Weger; Cohen, Algorithm 2.6.7):
//! Gram-Schmidt data is carried as the integers `d_i = Π_{j<=i} ‖b*_j‖²` and
//! `λ_{i,j} = d_j·μ_{i,j}`, so every step is exact and no rational
//! normalization is needed.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Largest dimension and coefficient bound accepted by
/// [`shortest_vector_exhaustive`].
pub const EXHAUSTIVE_MAX_DIM: usize = 4;
pub const EXHAUSTIVE_MAX_BOUND: u32 = 16;

/// Square integer matrix whose rows generate a lattice.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IntegerBasis {
    rows: Vec<Vec<BigInt>>,
}

impl IntegerBasis {
    /// Checks shape only; independence is checked by the algorithms that
    /// need it.
    pub fn new(rows: Vec<Vec<BigInt>>) -> Result<Self> {
        let d = rows.len();
        if d == 0 {
            return Err(Error::InvalidInput("basis has no rows".into()));
        }
        if let Some(i) = rows.iter().position(|r| r.len() != d) {
            return Err(Error::InvalidInput(format!(
                "row {} has {} entries, basis needs {d}",
                i + 1,
                rows[i].len()
            )));
        }
        Ok(IntegerBasis { rows })
    }

    pub fn from_i64(rows: &[&[i64]]) -> Result<Self> {
        Self::new(
            rows.iter()
                .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
                .collect(),
        )
    }

    pub fn identity(d: usize) -> Self {
        let rows = (0..d)
            .map(|i| {
                (0..d)
                    .map(|j| {
                        if i == j {
                            BigInt::one()
                        } else {
                            BigInt::zero()
                        }
                    })
                    .collect()
            })
            .collect();
        IntegerBasis { rows }
    }

    pub fn rows(&self) -> &[Vec<BigInt>] {
        &self.rows
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn into_rows(self) -> Vec<Vec<BigInt>> {
        self.rows
    }

    /// `self · other` (row convention: row `i` of the product combines the
    /// rows of `other` with coefficients from row `i` of `self`).
    pub fn mul(&self, other: &IntegerBasis) -> Result<IntegerBasis> {
        if self.dim() != other.dim() {
            return Err(Error::InvalidInput("dimension mismatch".into()));
        }
        let d = self.dim();
        let rows = self
            .rows
            .iter()
            .map(|r| {
                (0..d)
                    .map(|j| r.iter().zip(&other.rows).map(|(c, row)| c * &row[j]).sum())
                    .collect()
            })
            .collect();
        Ok(IntegerBasis { rows })
    }

    /// Determinant by fraction-free (Bareiss) elimination.
    pub fn determinant(&self) -> BigInt {
        let d = self.dim();
        let mut m = self.rows.clone();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..d {
            if m[k][k].is_zero() {
                match (k + 1..d).find(|&i| !m[i][k].is_zero()) {
                    Some(i) => {
                        m.swap(k, i);
                        sign = -sign;
                    }
                    None => return BigInt::zero(),
                }
            }
            for i in k + 1..d {
                for j in k + 1..d {
                    let v = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                    m[i][j] = v / &prev;
                }
            }
            prev = m[k][k].clone();
        }
        sign * &m[d - 1][d - 1]
    }
}

pub fn dot(x: &[BigInt], y: &[BigInt]) -> BigInt {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

pub fn norm_sq(x: &[BigInt]) -> BigInt {
    dot(x, x)
}

/// Exact Gram-Schmidt data: squared norms `‖b*_i‖²` and coefficients
/// `μ_{i,j}` for `j < i` (`mu[i][j]`, lower triangle only).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GramSchmidt {
    pub norms: Vec<BigRational>,
    pub mu: Vec<Vec<BigRational>>,
}

pub fn gram_schmidt(basis: &IntegerBasis) -> Result<GramSchmidt> {
    let d = basis.dim();
    let to_q = |x: &BigInt| BigRational::from_integer(x.clone());
    let mut ortho: Vec<Vec<BigRational>> = Vec::with_capacity(d);
    let mut norms: Vec<BigRational> = Vec::with_capacity(d);
    let mut mu = Vec::with_capacity(d);
    for row in basis.rows() {
        let b: Vec<BigRational> = row.iter().map(to_q).collect();
        let mut star = b.clone();
        let mut mu_row = Vec::with_capacity(ortho.len());
        for (bj, nj) in ortho.iter().zip(&norms) {
            let m = qdot(&b, bj) / nj;
            for (s, x) in star.iter_mut().zip(bj) {
                *s -= &m * x;
            }
            mu_row.push(m);
        }
        let n = qdot(&star, &star);
        if n.is_zero() {
            return Err(Error::RankDeficient);
        }
        ortho.push(star);
        norms.push(n);
        mu.push(mu_row);
    }
    Ok(GramSchmidt { norms, mu })
}

fn qdot(x: &[BigRational], y: &[BigRational]) -> BigRational {
    x.iter()
        .zip(y)
        .fold(BigRational::zero(), |acc, (a, b)| acc + a * b)
}

/// LLL parameter, checked to lie strictly between 1/4 and 1.
pub fn check_delta(delta: &BigRational) -> Result<()> {
    let quarter = BigRational::new(1.into(), 4.into());
    if delta <= &quarter || delta >= &BigRational::one() {
        return Err(Error::InvalidParameter(format!(
            "delta {delta} must lie in (1/4, 1)"
        )));
    }
    Ok(())
}

/// Default reduction parameter, 99/100.
pub fn default_delta() -> BigRational {
    BigRational::new(99.into(), 100.into())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReductionResult {
    pub reduced: IntegerBasis,
    /// Unimodular, with `transform · input = reduced`.
    pub transform: IntegerBasis,
    pub gso_norms: Vec<BigRational>,
    pub swaps: usize,
}

pub fn lll_reduce(basis: &IntegerBasis, delta: &BigRational) -> Result<ReductionResult> {
    check_delta(delta)?;
    let mut state = Lll::new(basis);
    state.run(delta)?;
    Ok(state.finish())
}

struct Lll {
    n: usize,
    b: Vec<Vec<BigInt>>,
    h: Vec<Vec<BigInt>>,
    // d[0] = 1, d[i] for rows 1..=n (1-based throughout)
    d: Vec<BigInt>,
    // lam[k][j], 1 <= j < k <= n
    lam: Vec<Vec<BigInt>>,
    swaps: usize,
}

impl Lll {
    fn new(basis: &IntegerBasis) -> Self {
        let n = basis.dim();
        let mut b = vec![Vec::new()];
        b.extend(basis.rows().iter().cloned());
        let mut h = vec![Vec::new()];
        h.extend(IntegerBasis::identity(n).into_rows());
        Lll {
            n,
            b,
            h,
            d: vec![BigInt::zero(); n + 1],
            lam: vec![vec![BigInt::zero(); n + 1]; n + 1],
            swaps: 0,
        }
    }

    fn run(&mut self, delta: &BigRational) -> Result<()> {
        let (num, den) = (delta.numer().clone(), delta.denom().clone());
        let n = self.n;
        self.d[0] = BigInt::one();
        self.d[1] = norm_sq(&self.b[1]);
        if self.d[1].is_zero() {
            return Err(Error::RankDeficient);
        }
        if n == 1 {
            return Ok(());
        }
        let mut k = 2;
        let mut k_max = 1;
        while k <= n {
            if k > k_max {
                k_max = k;
                self.incremental_gso(k)?;
            }
            loop {
                self.reduce(k, k - 1);
                // Lovász: d_k·d_{k-2} + λ² >= δ·d_{k-1}²
                let lhs = (&self.d[k] * &self.d[k - 2] + &self.lam[k][k - 1] * &self.lam[k][k - 1])
                    * &den;
                let rhs = &self.d[k - 1] * &self.d[k - 1] * &num;
                if lhs < rhs {
                    self.swap(k, k_max);
                    k = (k - 1).max(2);
                } else {
                    break;
                }
            }
            for l in (1..k - 1).rev() {
                self.reduce(k, l);
            }
            k += 1;
        }
        Ok(())
    }

    fn incremental_gso(&mut self, k: usize) -> Result<()> {
        for j in 1..=k {
            let mut u = dot(&self.b[k], &self.b[j]);
            for i in 1..j {
                u = (&self.d[i] * &u - &self.lam[k][i] * &self.lam[j][i]) / &self.d[i - 1];
            }
            if j < k {
                self.lam[k][j] = u;
            } else {
                if u.is_zero() {
                    return Err(Error::RankDeficient);
                }
                self.d[k] = u;
            }
        }
        Ok(())
    }

    fn reduce(&mut self, k: usize, l: usize) {
        let two_lam: BigInt = &self.lam[k][l] * 2;
        if two_lam.abs() <= self.d[l] {
            return;
        }
        let q = round_div(&self.lam[k][l], &self.d[l]);
        let (bk, bl) = pair_mut(&mut self.b, k, l);
        axpy(bk, &q, bl);
        let (hk, hl) = pair_mut(&mut self.h, k, l);
        axpy(hk, &q, hl);
        self.lam[k][l] -= &q * &self.d[l];
        for i in 1..l {
            let t = &q * &self.lam[l][i];
            self.lam[k][i] -= t;
        }
    }

    fn swap(&mut self, k: usize, k_max: usize) {
        self.swaps += 1;
        self.b.swap(k, k - 1);
        self.h.swap(k, k - 1);
        for j in 1..k - 1 {
            let t = std::mem::take(&mut self.lam[k][j]);
            self.lam[k][j] = std::mem::replace(&mut self.lam[k - 1][j], t);
        }
        let lam = self.lam[k][k - 1].clone();
        let big_b = (&self.d[k - 2] * &self.d[k] + &lam * &lam) / &self.d[k - 1];
        for i in k + 1..=k_max {
            let t = self.lam[i][k].clone();
            self.lam[i][k] = (&self.d[k] * &self.lam[i][k - 1] - &lam * &t) / &self.d[k - 1];
            self.lam[i][k - 1] = (&big_b * &t + &lam * &self.lam[i][k]) / &self.d[k];
        }
        self.d[k - 1] = big_b;
    }

    fn finish(mut self) -> ReductionResult {
        let gso_norms = (1..=self.n)
            .map(|i| BigRational::new(self.d[i].clone(), self.d[i - 1].clone()))
            .collect();
        self.b.remove(0);
        self.h.remove(0);
        ReductionResult {
            reduced: IntegerBasis { rows: self.b },
            transform: IntegerBasis { rows: self.h },
            gso_norms,
            swaps: self.swaps,
        }
    }
}

/// Nearest integer to `a / b` for `b > 0`, halves rounded up.
fn round_div(a: &BigInt, b: &BigInt) -> BigInt {
    let two = BigInt::from(2);
    (a * &two + b).div_floor(&(b * &two))
}

fn axpy(target: &mut [BigInt], q: &BigInt, source: &[BigInt]) {
    for (t, s) in target.iter_mut().zip(source) {
        *t -= q * s;
    }
}

fn pair_mut<T>(v: &mut [T], k: usize, l: usize) -> (&mut T, &T) {
    debug_assert!(l < k);
    let (lo, hi) = v.split_at_mut(k);
    (&mut hi[0], &lo[l])
}

/// Checks size reduction (`|μ_{i,j}| <= 1/2`) and the Lovász condition at
/// `delta` from a fresh Gram-Schmidt computation.
pub fn is_lll_reduced(basis: &IntegerBasis, delta: &BigRational) -> Result<bool> {
    let gs = gram_schmidt(basis)?;
    let half = BigRational::new(1.into(), 2.into());
    let size_reduced = gs.mu.iter().flatten().all(|m| m.abs() <= half);
    let lovasz = (1..basis.dim()).all(|i| {
        let m = &gs.mu[i][i - 1];
        gs.norms[i] >= (delta - m * m) * &gs.norms[i - 1]
    });
    Ok(size_reduced && lovasz)
}

/// Shortest nonzero vector among all combinations with coefficients in
/// `[-coeff_bound, coeff_bound]`. Test oracle; dimension at most 4.
pub fn shortest_vector_exhaustive(basis: &IntegerBasis, coeff_bound: u32) -> Result<Vec<BigInt>> {
    let d = basis.dim();
    if d > EXHAUSTIVE_MAX_DIM || coeff_bound == 0 || coeff_bound > EXHAUSTIVE_MAX_BOUND {
        return Err(Error::Refused(format!(
            "exhaustive search needs dimension <= {EXHAUSTIVE_MAX_DIM} and bound in 1..={EXHAUSTIVE_MAX_BOUND}"
        )));
    }
    let bound = coeff_bound as i64;
    let fits = basis.rows().iter().flatten().all(|x| x.bits() <= 48);
    let best = if fits {
        let rows: Vec<Vec<i128>> = basis
            .rows()
            .iter()
            .map(|r| r.iter().map(|x| x.to_i128().unwrap()).collect())
            .collect();
        enumerate_box(d, bound, |coeffs| {
            let v: Vec<i128> = (0..d)
                .map(|j| (0..d).map(|i| coeffs[i] as i128 * rows[i][j]).sum())
                .collect();
            let n: i128 = v.iter().map(|x| x * x).sum();
            (BigInt::from(n), v.into_iter().map(BigInt::from).collect())
        })
    } else {
        enumerate_box(d, bound, |coeffs| {
            let v: Vec<BigInt> = (0..d)
                .map(|j| {
                    (0..d)
                        .map(|i| BigInt::from(coeffs[i]) * &basis.rows()[i][j])
                        .sum()
                })
                .collect();
            (norm_sq(&v), v)
        })
    };
    best.ok_or(Error::RankDeficient)
}

fn enumerate_box<F>(d: usize, bound: i64, mut eval: F) -> Option<Vec<BigInt>>
where
    F: FnMut(&[i64]) -> (BigInt, Vec<BigInt>),
{
    let mut coeffs = vec![-bound; d];
    let mut best: Option<(BigInt, Vec<BigInt>)> = None;
    loop {
        if coeffs.iter().any(|&c| c != 0) {
            let (n, v) = eval(&coeffs);
            if !n.is_zero() && best.as_ref().is_none_or(|(b, _)| &n < b) {
                best = Some((n, v));
            }
        }
        // odometer
        let mut i = 0;
        loop {
            if i == d {
                return best.map(|(_, v)| v);
            }
            if coeffs[i] < bound {
                coeffs[i] += 1;
                break;
            }
            coeffs[i] = -bound;
            i += 1;
        }
    }
}
