//! Models for the mixing sequence `alpha(k)`, its summed tail, and the
//! self-intersection functional `delta_A(k)`.
//!
//! `alpha(k)` bounds `|mu(A cap T^{-n-k}B)/mu(B) - mu(A)|` uniformly over
//! n-cylinders `A` and events `B`, with a gap of `k` symbols between the
//! two windows. Nothing here estimates `alpha` from a single orbit (that
//! supremum is statistically out of reach); the choices are parametric
//! profiles, tabulated values, and exact enumeration for product/Markov
//! measures.

use crate::cylinders::{outer_cylinder, MeasureModel, Word};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// A model for the sequence `alpha(1), alpha(2), ...`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MixingProfile {
    /// Independence: `alpha(k) = 0` for every gap, including gap zero.
    ExactZero,
    /// `alpha(k) = c * theta^k` with `theta` in (0, 1).
    Exponential { c: f64, theta: f64 },
    /// `alpha(k) = c * k^{-beta}`; summability needs `beta > 1`.
    Polynomial { c: f64, beta: f64 },
    /// Tabulated `alpha(1..=len)`; beyond the table the last two values
    /// are extended by a geometric (monotone decay) fit.
    Table { values: Vec<f64> },
}

impl MixingProfile {
    pub fn exponential(c: f64, theta: f64) -> Result<Self> {
        if !(c >= 0.0 && theta > 0.0 && theta < 1.0) {
            return Err(Error::BadMixingTable);
        }
        Ok(MixingProfile::Exponential { c, theta })
    }

    pub fn polynomial(c: f64, beta: f64) -> Result<Self> {
        if beta <= 1.0 {
            return Err(Error::NotSummable(beta));
        }
        if c < 0.0 {
            return Err(Error::BadMixingTable);
        }
        Ok(MixingProfile::Polynomial { c, beta })
    }

    pub fn table(values: Vec<f64>) -> Result<Self> {
        let monotone = values.windows(2).all(|w| w[1] <= w[0]);
        if values.is_empty() || values.iter().any(|&v| v < 0.0) || !monotone {
            return Err(Error::BadMixingTable);
        }
        Ok(MixingProfile::Table { values })
    }

    /// Geometric ratio used to extend a table past its last entry.
    fn table_ratio(values: &[f64]) -> f64 {
        if values.len() < 2 {
            return 1.0;
        }
        let last = values[values.len() - 1];
        let prev = values[values.len() - 2];
        if prev <= 0.0 || last <= 0.0 {
            0.0
        } else {
            (last / prev).min(1.0)
        }
    }

    /// Evaluate the model at gap `k >= 1`.
    pub fn alpha(&self, k: usize) -> Result<f64> {
        if k == 0 {
            return Err(Error::AlphaAtZero);
        }
        Ok(match self {
            MixingProfile::ExactZero => 0.0,
            MixingProfile::Exponential { c, theta } => c * theta.powi(k as i32),
            MixingProfile::Polynomial { c, beta } => c * (k as f64).powf(-beta),
            MixingProfile::Table { values } => {
                if k <= values.len() {
                    values[k - 1]
                } else {
                    let last = *values.last().expect("non-empty");
                    last * Self::table_ratio(values).powi((k - values.len()) as i32)
                }
            }
        })
    }

    /// Whether evaluation at `k` left the tabulated range.
    pub fn is_extrapolated(&self, k: usize) -> bool {
        matches!(self, MixingProfile::Table { values } if k > values.len())
    }

    /// Value charged for a zero gap in the `delta_A` minimization.
    ///
    /// The minimization range `1 <= w <= k` touches `alpha(0)`, which the
    /// mixing sequence does not define. For a dependent profile the only
    /// safe charge is the trivial bound 1. Under exact independence
    /// adjacent blocks are already independent at gap zero, and the
    /// product-measure identity `mu(A cap T^{-k}A) = mu(A) mu(A^{(k)})`
    /// (on the consistent overlap) shows the sharp charge 0 is correct.
    pub fn zero_gap_value(&self) -> f64 {
        match self {
            MixingProfile::ExactZero => 0.0,
            _ => 1.0,
        }
    }

    pub fn is_summable(&self) -> bool {
        match self {
            MixingProfile::Polynomial { beta, .. } => *beta > 1.0,
            MixingProfile::Table { values } => Self::table_ratio(values) < 1.0 || values.last() == Some(&0.0),
            _ => true,
        }
    }

    /// Summed tail `sum_{j >= n} alpha(j)`.
    ///
    /// Closed form for the exponential family. The polynomial tail is
    /// summed exactly: 64 leading terms directly, the remainder by
    /// Euler-Maclaurin, which lands within ~1e-12 of the true sum and
    /// stays below the integral-comparison bracket
    /// `c (n-1)^{1-beta}/(beta-1)`. Tables sum their entries exactly and
    /// close with the fitted geometric tail.
    pub fn alpha_bar(&self, n: usize) -> Result<f64> {
        assert!(n >= 1);
        match self {
            MixingProfile::ExactZero => Ok(0.0),
            MixingProfile::Exponential { c, theta } => Ok(c * theta.powi(n as i32) / (1.0 - theta)),
            MixingProfile::Polynomial { c, beta } => {
                if *beta <= 1.0 {
                    return Err(Error::NotSummable(*beta));
                }
                let b = *beta;
                let m = n + 64;
                let head: f64 = (n..m).map(|j| (j as f64).powf(-b)).sum();
                // sum_{j >= m} j^-b by Euler-Maclaurin at x = m
                let x = m as f64;
                let remainder = x.powf(1.0 - b) / (b - 1.0) + 0.5 * x.powf(-b)
                    + b * x.powf(-b - 1.0) / 12.0
                    - b * (b + 1.0) * (b + 2.0) * x.powf(-b - 3.0) / 720.0;
                Ok(c * (head + remainder))
            }
            MixingProfile::Table { values } => {
                let ratio = Self::table_ratio(values);
                let last = *values.last().expect("non-empty");
                if ratio >= 1.0 && last > 0.0 {
                    return Err(Error::NotSummable(1.0));
                }
                let head: f64 = values.iter().skip(n - 1).sum();
                let tail_first = if n > values.len() {
                    // start inside the extrapolated region
                    return Ok(self.alpha(n)? / (1.0 - ratio));
                } else {
                    last * ratio
                };
                Ok(head + tail_first / (1.0 - ratio))
            }
        }
    }
}

/// Value of the `delta_A` minimization together with the split it chose.
#[derive(Debug, Clone, Copy)]
pub struct DeltaA {
    pub value: f64,
    /// Minimizing outer-cylinder length.
    pub w: usize,
}

/// `delta_A(k) = min_w [ mu(A^{(w)}) + alpha(k - w) ]` over
/// `1 <= w <= min(k, n)`, where `A^{(w)}` is the length-w suffix cylinder.
///
/// The `w = k` endpoint charges `zero_gap_value()` instead of `alpha(0)`.
/// Ties resolve to the smallest `w`.
pub fn delta_a(
    word: &Word,
    k: usize,
    profile: &MixingProfile,
    model: &MeasureModel,
) -> Result<DeltaA> {
    assert!(k >= 1);
    let w_max = k.min(word.n());
    let mut best = DeltaA { value: f64::INFINITY, w: 0 };
    for w in 1..=w_max {
        let mu_outer = model.measure(&outer_cylinder(word, w))?;
        let gap_term =
            if w == k { profile.zero_gap_value() } else { profile.alpha(k - w)? };
        let value = mu_outer + gap_term;
        if value < best.value {
            best = DeltaA { value, w };
        }
    }
    Ok(best)
}

/// Exact mixing coefficient of an enumerable model, restricted to cylinder
/// events.
///
/// Maximizes `|mu(A cap T^{-n-k}B)/mu(B) - mu(A)|` over all admissible
/// n-words `A` and all b-words `B` with `b <= max_b`, computing the joint
/// measure by transfer-matrix products. Restricting `B` to cylinders (the
/// full sigma-algebra is not enumerable) makes this a certified lower
/// bound on the true coefficient; for Markov measures the two coincide.
pub fn alpha_empirical(model: &MeasureModel, n: usize, k: usize, max_b: usize) -> Result<f64> {
    assert!(n >= 1 && k >= 1 && max_b >= 1);
    let (chain, stationary): (Vec<Vec<f64>>, Vec<f64>) = match model {
        MeasureModel::BernoulliProduct { weights } => {
            (vec![weights.clone(); weights.len()], weights.clone())
        }
        MeasureModel::MarkovChain { chain, stationary } => (chain.clone(), stationary.clone()),
        MeasureModel::Empirical { .. } => return Err(Error::EmpiricalAlphaUnsupported),
    };
    let m = chain.len();
    let size = (m as u128).pow(n as u32) * (m as u128).pow(max_b as u32) * max_b as u128;
    const CAP: u128 = 50_000_000;
    if size > CAP {
        return Err(Error::EnumerationTooLarge { size, cap: CAP });
    }

    // gap operator: (k+1)-step transition matrix between the windows
    let mut gap = vec![vec![0.0f64; m]; m];
    for (i, row) in gap.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for _ in 0..=k {
        let mut next = vec![vec![0.0f64; m]; m];
        for i in 0..m {
            for j in 0..m {
                let mut acc = 0.0;
                for l in 0..m {
                    acc += gap[i][l] * chain[l][j];
                }
                next[i][j] = acc;
            }
        }
        gap = next;
    }

    let path_measure = |syms: &[u32]| -> f64 {
        let mut p = stationary[syms[0] as usize];
        for w in syms.windows(2) {
            p *= chain[w[0] as usize][w[1] as usize];
        }
        p
    };

    let mut worst: f64 = 0.0;
    for a in Word::enumerate(m as u32, n) {
        let mu_a = path_measure(a.symbols());
        if mu_a <= 0.0 {
            continue;
        }
        let a_last = *a.symbols().last().expect("non-empty") as usize;
        for b_len in 1..=max_b {
            for b in Word::enumerate(m as u32, b_len) {
                let mu_b = path_measure(b.symbols());
                if mu_b <= 0.0 {
                    continue;
                }
                let b_first = b.symbols()[0] as usize;
                // joint = mu(A) * [P^{k+1}]_{a_last, b_first} * P-path(B) / pi(b_first)
                let continuation = mu_b / stationary[b_first];
                let joint = mu_a * gap[a_last][b_first] * continuation;
                worst = worst.max((joint / mu_b - mu_a).abs());
            }
        }
    }
    Ok(worst)
}
