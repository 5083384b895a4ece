//! Poisson mass/tail functions and the Chen-Stein solution machinery.
//!
//! For the Poisson law with parameter `t` the Stein operator acts on
//! `f: N_0 -> R` by `Sf(k) = t f(k+1) - k f(k)`. Solving `Sf = h - E[h]`
//! for the indicator `h = 1_E` of an event set `E` turns the distance
//! `|P(W in E) - Poisson_t(E)|` into an expectation of `Sf`, and explicit
//! bounds on `f` then control the approximation error.
//!
//! Two closed forms for the solution exist: a partial sum over `i < k` and
//! a tail sum over `i >= k`. They are equal in exact arithmetic but have
//! very different conditioning: the partial sum carries a factor
//! `(k-1)!/t^k` which explodes for `k >> t`, while the tail sum is
//! dominated by its first term `~1/k` there. The solver therefore uses the
//! partial sum for `k <= t` and the tail sum for `k > t`, which is exactly
//! the split under which the classical bounds are proved.

use crate::error::{Error, Result};
use statrs::function::gamma::ln_gamma;

/// Poisson point mass `e^{-t} t^i / i!`, in log space for large `i`.
pub fn poisson_pmf(t: f64, i: u64) -> f64 {
    assert!(t > 0.0, "poisson parameter must be positive");
    if i <= 20 {
        let mut p = (-t).exp();
        for j in 1..=i {
            p *= t / j as f64;
        }
        p
    } else {
        let x = i as f64;
        (x * t.ln() - t - ln_gamma(x + 1.0)).exp()
    }
}

/// Lower Poisson tail `sum_{i=0}^{k-1} e^{-t} t^i / i!` for `k >= 1`.
///
/// This is the limiting law of the rescaled k-th return time: the k-th
/// return happens after `t/mu(A)` exactly when fewer than `k` visits
/// occurred, so the survival function converges to this partial sum.
/// For `k = 1` it reduces to `e^{-t}`.
pub fn erlang_tail(t: f64, k: u64) -> f64 {
    assert!(k >= 1, "erlang tail needs k >= 1");
    (0..k).map(|i| poisson_pmf(t, i)).sum()
}

/// A finite event set `E` of non-negative counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Event {
    members: Vec<u64>,
}

impl Event {
    pub fn new(mut members: Vec<u64>) -> Self {
        members.sort_unstable();
        members.dedup();
        Event { members }
    }

    pub fn empty() -> Self {
        Event { members: Vec::new() }
    }

    /// Contiguous range `[lo, hi]`.
    pub fn range(lo: u64, hi: u64) -> Self {
        Event { members: (lo..=hi).collect() }
    }

    pub fn contains(&self, k: u64) -> bool {
        self.members.binary_search(&k).is_ok()
    }

    pub fn members(&self) -> &[u64] {
        &self.members
    }

    /// Poisson mass of the event.
    pub fn poisson_mass(&self, t: f64) -> f64 {
        self.members.iter().map(|&i| poisson_pmf(t, i)).sum()
    }
}

/// `f(k) = (k-1)!/t^k * sum_{i=0}^{k-1} (1_E(i) - mu0(E)) t^i/i!`.
///
/// Well conditioned only for `k` up to about `t`; exposed so tests can
/// compare it against the tail representation on its stable range.
pub fn solution_via_partial_sum(t: f64, event: &Event, k: usize) -> f64 {
    assert!(k >= 1);
    let mu0 = event.poisson_mass(t);
    let kf = k as f64;
    // log of (k-1)!/t^k * t^i/i!
    let log_pref = ln_gamma(kf) - kf * t.ln();
    let mut acc = 0.0;
    for i in 0..k as u64 {
        let x = i as f64;
        let w = (log_pref + x * t.ln() - ln_gamma(x + 1.0)).exp();
        let h = if event.contains(i) { 1.0 } else { 0.0 };
        acc += (h - mu0) * w;
    }
    acc
}

/// `f(k) = -(k-1)!/t^k * sum_{i=k}^{inf} (1_E(i) - mu0(E)) t^i/i!`,
/// truncated at `i = k + max(50, ceil(10 t))`.
///
/// Term ratios are `t/(k+1), t/(k+2), ...`; once `i >= 2t` they fall below
/// 1/2, so the discarded tail is smaller than the last kept term by at
/// least `2^-something-huge` for this truncation depth.
pub fn solution_via_tail_sum(t: f64, event: &Event, k: usize) -> f64 {
    assert!(k >= 1);
    let mu0 = event.poisson_mass(t);
    let extent = 50usize.max((10.0 * t).ceil() as usize);
    let last = k as u64 + extent as u64;
    // First term of (k-1)!/t^k * t^i/i! at i = k is exactly 1/k; build the
    // rest by multiplying the ratio t/(i+1).
    let mut weight = 1.0 / k as f64;
    let mut acc = 0.0;
    for i in k as u64..=last {
        let h = if event.contains(i) { 1.0 } else { 0.0 };
        acc += (h - mu0) * weight;
        weight *= t / (i + 1) as f64;
    }
    -acc
}

/// Tabulated Stein solution `f(1..=k_max)` for an indicator event.
///
/// `f(0)` is not determined by the equation and is fixed to 0.
#[derive(Debug, Clone)]
pub struct SteinSolution {
    t: f64,
    event: Event,
    event_mass: f64,
    values: Vec<f64>,
}

/// Solve the Stein equation for `h = 1_E` at parameter `t`, tabulating
/// `f(1), ..., f(k_max)`.
pub fn stein_solve(t: f64, event: &Event, k_max: usize) -> Result<SteinSolution> {
    assert!(t > 0.0, "poisson parameter must be positive");
    assert!(k_max >= 1);
    if k_max > 1_000_000 {
        return Err(Error::KMaxTooLarge(k_max));
    }
    let switch = t.floor() as usize; // partial sum for k <= t, tail sum beyond
    let values = (1..=k_max)
        .map(|k| {
            if k <= switch {
                solution_via_partial_sum(t, event, k)
            } else {
                solution_via_tail_sum(t, event, k)
            }
        })
        .collect();
    Ok(SteinSolution { t, event: event.clone(), event_mass: event.poisson_mass(t), values })
}

impl SteinSolution {
    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn k_max(&self) -> usize {
        self.values.len()
    }

    pub fn event(&self) -> &Event {
        &self.event
    }

    /// Poisson mass of the event this solution was built for.
    pub fn event_mass(&self) -> f64 {
        self.event_mass
    }

    /// `f(k)` for `0 <= k <= k_max`, with the `f(0) = 0` convention.
    pub fn value(&self, k: usize) -> f64 {
        if k == 0 {
            0.0
        } else {
            self.values[k - 1]
        }
    }

    /// Apply the Stein operator: `t f(k+1) - k f(k)` for `1 <= k < k_max`.
    pub fn apply(&self, k: usize) -> Result<f64> {
        if k < 1 || k >= self.k_max() {
            return Err(Error::IndexOutOfRange { k, k_max: self.k_max() });
        }
        Ok(self.t * self.value(k + 1) - k as f64 * self.value(k))
    }

    /// Largest residual of `t f(k+1) - k f(k) = 1_E(k) - mu0(E)` over the
    /// tabulated range.
    pub fn max_equation_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for k in 1..self.k_max() {
            let h = if self.event.contains(k as u64) { 1.0 } else { 0.0 };
            let r = (self.apply(k).expect("in range") - (h - self.event_mass)).abs();
            worst = worst.max(r);
        }
        worst
    }
}

/// Pointwise bound on the Stein solution: `1` for `k <= t`, else `(2+t)/k`.
pub fn stein_bound_pointwise(t: f64, k: u64) -> f64 {
    assert!(t > 0.0 && k >= 1);
    if k as f64 <= t {
        1.0
    } else {
        (2.0 + t) / k as f64
    }
}

/// Bound on `sum_{i=1}^m |f(i)|`: `m` for `m <= t`, else `t + (2+t) log(m/t)`.
pub fn stein_bound_sum(t: f64, m: u64) -> f64 {
    assert!(t > 0.0 && m >= 1);
    let mf = m as f64;
    if mf <= t {
        mf
    } else {
        t + (2.0 + t) * (mf / t).ln()
    }
}
