//! The three concrete systems: the doubling map (simulated symbolically as
//! fair bits), subshifts of finite type sampled from a stationary Markov
//! chain, and the Gaspard-Wang intermittent interval map iterated in
//! floating point.
//!
//! The doubling map is deliberately not iterated in floating point: the
//! orbit of `2x mod 1` in binary floating point collapses to 0 after ~53
//! steps. Under Lebesgue measure its binary itinerary is an i.i.d. fair-bit
//! sequence, and the shift on those bits *is* the map, so the bit stream is
//! the exact simulation.

use crate::error::{Error, Result};
use crate::rng::rng_from_seed;
use nalgebra::{DMatrix, DVector};
use rand::Rng;

const STOCHASTIC_TOL: f64 = 1e-12;

/// A finite itinerary: one partition-element index per time step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolStream {
    pub symbols: Vec<u32>,
    /// Seed used to generate the stream; `None` for deterministic sources
    /// such as interval-map itineraries.
    pub seed: Option<u64>,
}

impl SymbolStream {
    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }
}

/// Incremental symbol generator; lets scanners consume orbits without
/// materializing them.
pub trait SymbolSource {
    fn next_symbol(&mut self) -> u32;
}

/// I.i.d. fair bits, drawn 64 at a time.
pub struct DoublingSource {
    rng: rand_chacha::ChaCha12Rng,
    buffer: u64,
    remaining: u32,
}

impl DoublingSource {
    pub fn new(seed: u64) -> Self {
        DoublingSource { rng: rng_from_seed(seed), buffer: 0, remaining: 0 }
    }
}

impl SymbolSource for DoublingSource {
    #[inline]
    fn next_symbol(&mut self) -> u32 {
        if self.remaining == 0 {
            self.buffer = self.rng.gen();
            self.remaining = 64;
        }
        let bit = (self.buffer & 1) as u32;
        self.buffer >>= 1;
        self.remaining -= 1;
        bit
    }
}

/// Exact i.i.d. fair-bit stream of the doubling map's binary itinerary.
pub fn doubling_stream(length: usize, seed: u64) -> SymbolStream {
    assert!(length >= 1);
    let mut src = DoublingSource::new(seed);
    let symbols = (0..length).map(|_| src.next_symbol()).collect();
    SymbolStream { symbols, seed: Some(seed) }
}

/// A subshift of finite type together with the stationary Markov chain it
/// is sampled from.
///
/// The paper-level object fixes only the 0/1 transition matrix; the
/// sampling measure is explicit configuration here so that exact cylinder
/// measures stay available.
#[derive(Debug, Clone)]
pub struct SftSystem {
    transition: Vec<Vec<u8>>,
    chain: Vec<Vec<f64>>,
    stationary: Vec<f64>,
}

/// Solve `pi P = pi`, `sum pi = 1` by replacing one balance equation with
/// the normalization; fails when the chain has no unique stationary vector.
fn stationary_vector(chain: &[Vec<f64>]) -> Result<Vec<f64>> {
    let m = chain.len();
    // rows of (P^T - I), last row all ones
    let mut a = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            a[(i, j)] = chain[j][i] - if i == j { 1.0 } else { 0.0 };
        }
    }
    for j in 0..m {
        a[(m - 1, j)] = 1.0;
    }
    let mut b = DVector::<f64>::zeros(m);
    b[m - 1] = 1.0;
    let pi = a
        .lu()
        .solve(&b)
        .ok_or(Error::NoStationaryVector { residual: f64::INFINITY })?;
    let pi: Vec<f64> = pi.iter().copied().collect();
    // residual of pi P = pi plus positivity; reducible chains land here
    let mut residual: f64 = (pi.iter().sum::<f64>() - 1.0).abs();
    for j in 0..m {
        let bal: f64 = (0..m).map(|i| pi[i] * chain[i][j]).sum();
        residual = residual.max((bal - pi[j]).abs());
    }
    if residual > STOCHASTIC_TOL || pi.iter().any(|&p| p < -1e-14) {
        return Err(Error::NoStationaryVector { residual });
    }
    Ok(pi.into_iter().map(|p| p.max(0.0)).collect())
}

impl SftSystem {
    /// Build from a 0/1 transition matrix and a compatible row-stochastic
    /// sampling chain. The stationary vector is computed here.
    pub fn new(transition: Vec<Vec<u8>>, chain: Vec<Vec<f64>>) -> Result<Self> {
        let m = transition.len();
        if m == 0
            || transition.iter().any(|r| r.len() != m)
            || chain.len() != m
            || chain.iter().any(|r| r.len() != m)
        {
            return Err(Error::BadMatrixShape);
        }
        for (i, row) in chain.iter().enumerate() {
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > STOCHASTIC_TOL || row.iter().any(|&p| p < 0.0) {
                return Err(Error::RowNotStochastic { row: i, sum });
            }
            for (j, &p) in row.iter().enumerate() {
                if p > 0.0 && transition[i][j] == 0 {
                    return Err(Error::ChainNotCompatible { from: i, to: j });
                }
            }
        }
        let stationary = stationary_vector(&chain)?;
        Ok(SftSystem { transition, chain, stationary })
    }

    /// Full shift on `m` symbols sampled i.i.d. from `weights`.
    pub fn full_shift(weights: Vec<f64>) -> Result<Self> {
        let m = weights.len();
        let sum: f64 = weights.iter().sum();
        if m == 0 || (sum - 1.0).abs() > STOCHASTIC_TOL || weights.iter().any(|&w| w < 0.0) {
            return Err(Error::BadWeights(sum));
        }
        let transition = vec![vec![1u8; m]; m];
        let chain = vec![weights; m];
        SftSystem::new(transition, chain)
    }

    pub fn alphabet_size(&self) -> usize {
        self.transition.len()
    }

    pub fn transition(&self) -> &[Vec<u8>] {
        &self.transition
    }

    pub fn chain(&self) -> &[Vec<f64>] {
        &self.chain
    }

    pub fn stationary(&self) -> &[f64] {
        &self.stationary
    }

    pub fn is_admissible_pair(&self, from: u32, to: u32) -> bool {
        self.transition[from as usize][to as usize] == 1
    }

    pub fn is_admissible_word(&self, symbols: &[u32]) -> bool {
        symbols.iter().all(|&s| (s as usize) < self.alphabet_size())
            && symbols.windows(2).all(|w| self.is_admissible_pair(w[0], w[1]))
    }
}

/// Draw one categorical sample from `weights` (not necessarily a chain row).
pub(crate) fn sample_categorical<R: Rng>(weights: &[f64], rng: &mut R) -> u32 {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (i, &w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            return i as u32;
        }
    }
    (weights.len() - 1) as u32
}

/// Markov-chain symbol source; starts from the stationary law or a forced
/// state.
pub struct MarkovSource<'a> {
    system: &'a SftSystem,
    state: Option<u32>,
    rng: rand_chacha::ChaCha12Rng,
}

impl<'a> MarkovSource<'a> {
    /// Stationary start: the first emitted symbol is drawn from `pi`.
    pub fn stationary(system: &'a SftSystem, seed: u64) -> Self {
        MarkovSource { system, state: None, rng: rng_from_seed(seed) }
    }

    /// Continue the chain from a known current state; the first emitted
    /// symbol is the successor of `state`.
    pub fn from_state(system: &'a SftSystem, state: u32, seed: u64) -> Self {
        MarkovSource { system, state: Some(state), rng: rng_from_seed(seed) }
    }
}

impl SymbolSource for MarkovSource<'_> {
    fn next_symbol(&mut self) -> u32 {
        let next = match self.state {
            None => sample_categorical(self.system.stationary(), &mut self.rng),
            Some(s) => sample_categorical(&self.system.chain()[s as usize], &mut self.rng),
        };
        self.state = Some(next);
        next
    }
}

/// Stationary sample path of the sampling chain; every adjacent pair is
/// admissible by chain/transition compatibility.
pub fn sft_stream(system: &SftSystem, length: usize, seed: u64) -> SymbolStream {
    assert!(length >= 1);
    let mut src = MarkovSource::stationary(system, seed);
    let symbols = (0..length).map(|_| src.next_symbol()).collect();
    SymbolStream { symbols, seed: Some(seed) }
}

/// One step of the Gaspard-Wang map.
///
/// The parabolic branch is evaluated as `x + (2x)^alpha * x`, which equals
/// `x + 2^alpha x^{1+alpha}` but sends the branch ends 0 and 1/2 to exactly
/// 0 and 1 in floating point.
pub fn gw_step(x: f64, alpha: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::PointOutOfRange(x));
    }
    Ok(if x <= 0.5 { x + (2.0 * x).powf(alpha) * x } else { 2.0 * x - 1.0 })
}

/// The Gaspard-Wang partition ladder: `a_0 = 1/2` and `T(a_i) = a_{i-1}`.
///
/// `A_0 = (1/2, 1]` and `A_i = (a_i, a_{i-1}]`; the map sends `A_i`
/// bijectively onto `A_{i-1}`.
#[derive(Debug, Clone)]
pub struct GwSystem {
    alpha: f64,
    /// `boundaries[i] = a_i`, strictly decreasing from `a_0 = 1/2`.
    boundaries: Vec<f64>,
}

impl GwSystem {
    /// Precompute the ladder to depth `i_max` by bisecting the increasing
    /// branch map on `(0, a_{i-1})`.
    ///
    /// Bisection runs to relative precision a few ulps: deep in the ladder
    /// the gaps `a_{i-1} - a_i` shrink like `i^{-1/alpha - 1}` and an
    /// absolute tolerance would destroy strict monotonicity.
    pub fn new(alpha: f64, i_max: usize) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::BadIntermittencyExponent(alpha));
        }
        assert!(i_max >= 1);
        let mut boundaries = Vec::with_capacity(i_max + 1);
        boundaries.push(0.5);
        for _ in 1..=i_max {
            let target = *boundaries.last().expect("non-empty");
            let mut lo = 0.0f64;
            let mut hi = target;
            // branch map g(a) = a + (2a)^alpha * a is strictly increasing,
            // g(0) = 0 < target, g(target) > target
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                let val = mid + (2.0 * mid).powf(alpha) * mid;
                if val < target {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            boundaries.push(hi);
        }
        Ok(GwSystem { alpha, boundaries })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Deepest precomputed index `i_max`.
    pub fn depth(&self) -> usize {
        self.boundaries.len() - 1
    }

    /// `a_i` for `0 <= i <= depth`.
    pub fn boundary(&self, i: usize) -> f64 {
        self.boundaries[i]
    }

    pub fn boundaries(&self) -> &[f64] {
        &self.boundaries
    }

    /// Partition index of a point: 0 on `(1/2, 1]`, else the unique `i`
    /// with `a_i < x <= a_{i-1}`.
    pub fn classify(&self, x: f64) -> Result<u32> {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::PointOutOfRange(x));
        }
        if x > 0.5 {
            return Ok(0);
        }
        if x <= *self.boundaries.last().expect("non-empty") {
            return Err(Error::LadderTooShallow { point: x, depth: self.depth() });
        }
        // binary search over the decreasing ladder for a_i < x <= a_{i-1}
        let mut lo = 0usize; // a_lo >= x
        let mut hi = self.depth(); // a_hi < x
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if self.boundaries[mid] >= x {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(hi as u32)
    }
}

/// Itinerary of the Gaspard-Wang orbit of `x0` against the ladder
/// partition: symbol at step `k` classifies `T^k(x0)`.
pub fn gw_itinerary(x0: f64, length: usize, system: &GwSystem) -> Result<SymbolStream> {
    if !(x0 > 0.0 && x0 <= 1.0) {
        return Err(Error::PointOutOfRange(x0));
    }
    let mut symbols = Vec::with_capacity(length);
    let mut x = x0;
    for _ in 0..length {
        symbols.push(system.classify(x)?);
        x = gw_step(x, system.alpha)?;
    }
    Ok(SymbolStream { symbols, seed: None })
}
