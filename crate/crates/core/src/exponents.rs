//! Exponent vectors, fractional orders and the scalar combinatorics built on
//! them: harmonic means, coordinatewise products, critical exponents and the
//! validity conditions checked before any solve.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Integrability exponents `p = (p_1, ..., p_n)` with `1 < p_i < inf`,
/// sorted non-decreasingly.
///
/// Unsorted input is rejected: the mixed norm integrates axis 1 first and
/// axis n last, so the axis order carries meaning.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentVector<T> {
    p: Vec<T>,
}

impl<T: Real> ExponentVector<T> {
    pub fn new(p: Vec<T>) -> Result<Self> {
        if p.is_empty() {
            return Err(Error::Domain("exponent vector must be non-empty".into()));
        }
        for (i, &pi) in p.iter().enumerate() {
            if !(pi.is_finite() && pi > T::one()) {
                return Err(Error::Domain(format!("p[{i}] = {pi} is not in (1, inf)")));
            }
        }
        if p.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::Domain(format!(
                "exponents must be non-decreasing, got {:?}",
                p
            )));
        }
        Ok(Self { p })
    }

    /// All axes share one exponent.
    pub fn uniform(value: T, n: usize) -> Result<Self> {
        Self::new(vec![value; n])
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.p
    }

    pub fn get(&self, i: usize) -> T {
        self.p[i]
    }

    /// Largest exponent `p_n`.
    pub fn max(&self) -> T {
        self.p[self.p.len() - 1]
    }

    /// Hölder conjugates `p' = (p_1', ..., p_n')`.
    ///
    /// The conjugate vector is sorted non-increasingly, so it is returned as
    /// a plain vector rather than an `ExponentVector`.
    pub fn conjugates(&self) -> Vec<T> {
        self.p.iter().map(|&pi| conjugate(pi)).collect()
    }
}

/// `q / (q - 1)`.
pub fn conjugate<T: Real>(q: T) -> T {
    q / (q - T::one())
}

/// Fractional orders `s = (s_1, ..., s_n)` with every `0 < s_i < 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct FractionalVector<T> {
    s: Vec<T>,
}

impl<T: Real> FractionalVector<T> {
    pub fn new(s: Vec<T>) -> Result<Self> {
        if s.is_empty() {
            return Err(Error::Domain("fractional vector must be non-empty".into()));
        }
        for (i, &si) in s.iter().enumerate() {
            if !(si > T::zero() && si < T::one()) {
                return Err(Error::Domain(format!("s[{i}] = {si} is not in (0, 1)")));
            }
        }
        Ok(Self { s })
    }

    pub fn uniform(value: T, n: usize) -> Result<Self> {
        Self::new(vec![value; n])
    }

    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.s
    }

    pub fn get(&self, i: usize) -> T {
        self.s[i]
    }
}

/// `(n^{-1} sum 1/q_i)^{-1}`.
pub fn harmonic_mean<T: Real>(q: &[T]) -> Result<T> {
    if q.is_empty() {
        return Err(Error::Domain("harmonic mean of an empty vector".into()));
    }
    if let Some(bad) = q.iter().find(|&&qi| !(qi > T::zero())) {
        return Err(Error::Domain(format!("harmonic mean needs positive entries, got {bad}")));
    }
    let inv: T = q.iter().map(|&qi| T::one() / qi).sum();
    Ok(T::from_usize_lossy(q.len()) / inv)
}

/// Coordinatewise product `(q_1 r_1, ..., q_n r_n)`.
pub fn vec_product<T: Real>(q: &[T], r: &[T]) -> Result<Vec<T>> {
    if q.len() != r.len() {
        return Err(Error::LengthMismatch {
            expected: q.len(),
            got: r.len(),
        });
    }
    Ok(q.iter().zip(r).map(|(&a, &b)| a * b).collect())
}

/// Critical exponent `n p̄ / (n - p̄)`; requires `p̄ < n`.
pub fn critical_exponent<T: Real>(p: &ExponentVector<T>, n: usize) -> Result<T> {
    let pbar = harmonic_mean(p.as_slice())?;
    let nn = T::from_usize_lossy(n);
    if pbar >= nn {
        return Err(Error::ConditionViolated(format!(
            "harmonic mean of p is {pbar}, must be < n = {n}"
        )));
    }
    Ok(nn * pbar / (nn - pbar))
}

/// Fractional critical exponent `n (sp̄ / s̄) / (n - sp̄)`; requires `sp̄ < n`.
pub fn fractional_critical_exponent<T: Real>(
    s: &FractionalVector<T>,
    p: &ExponentVector<T>,
    n: usize,
) -> Result<T> {
    let sp = vec_product(s.as_slice(), p.as_slice())?;
    let spbar = harmonic_mean(&sp)?;
    let sbar = harmonic_mean(s.as_slice())?;
    let nn = T::from_usize_lossy(n);
    if spbar >= nn {
        return Err(Error::ConditionViolated(format!(
            "harmonic mean of sp is {spbar}, must be < n = {n}"
        )));
    }
    Ok(nn * (spbar / sbar) / (nn - spbar))
}

/// Outcome of [`validate`]: one flag per standing assumption.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidityReport<T> {
    /// `1 < p_1 <= ... <= p_n < inf` and `len(p) = n`.
    pub ordering_ok: bool,
    /// `p̄ < n`.
    pub subcritical_ok: bool,
    /// `sp̄ < n` (false when no `s` was supplied).
    pub fractional_subcritical_ok: bool,
    /// `p_n < p*_s`.
    pub fractional_embedding_ok: bool,
    pub pstar: Option<T>,
    pub pstar_s: Option<T>,
}

impl<T: Real> ValidityReport<T> {
    /// Conditions needed by the local (gradient) problem.
    pub fn local_ok(&self) -> bool {
        self.ordering_ok && self.subcritical_ok
    }

    /// Conditions needed by the fractional problem.
    pub fn fractional_ok(&self) -> bool {
        self.ordering_ok
            && self.subcritical_ok
            && self.fractional_subcritical_ok
            && self.fractional_embedding_ok
    }
}

/// Evaluates all four standing conditions on raw (possibly invalid) input.
///
/// Never fails: every problem shows up as a `false` flag.
pub fn validate<T: Real>(p: &[T], s: Option<&[T]>, n: usize) -> ValidityReport<T> {
    let exps = if p.len() == n {
        ExponentVector::new(p.to_vec()).ok()
    } else {
        None
    };
    let ordering_ok = exps.is_some();

    let pstar = if p.len() == n && p.iter().all(|&x| x > T::zero()) {
        let pbar = harmonic_mean(p).ok();
        let nn = T::from_usize_lossy(n);
        pbar.filter(|&b| b < nn).map(|b| nn * b / (nn - b))
    } else {
        None
    };

    let fracs = s.and_then(|s| FractionalVector::new(s.to_vec()).ok());
    let pstar_s = match (&fracs, s) {
        (Some(fr), Some(sv)) if sv.len() == n && p.len() == n && p.iter().all(|&x| x > T::zero()) => {
            let sp = vec_product(fr.as_slice(), p).ok();
            let nn = T::from_usize_lossy(n);
            match (sp.and_then(|v| harmonic_mean(&v).ok()), harmonic_mean(fr.as_slice()).ok()) {
                (Some(spbar), Some(sbar)) if spbar < nn => Some(nn * (spbar / sbar) / (nn - spbar)),
                _ => None,
            }
        }
        _ => None,
    };
    let pmax = p.iter().copied().fold(T::neg_infinity(), T::max);
    let fractional_embedding_ok = pstar_s.is_some_and(|ps| pmax < ps);

    ValidityReport {
        ordering_ok,
        subcritical_ok: pstar.is_some(),
        fractional_subcritical_ok: pstar_s.is_some(),
        fractional_embedding_ok,
        pstar,
        pstar_s,
    }
}
