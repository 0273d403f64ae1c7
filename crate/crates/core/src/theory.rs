//! Deterministic bound formulas and the diagnostics built on them, so the
//! probabilistic structure statements can be exercised by Monte Carlo.
//!
//! The central objects: the annulus `Phi = { 1 - 1/(L ln^gamma k) <= |mu| <=
//! 1, mu != 1 }` where eigenvalues are excluded asymptotically, its split
//! into small and large arguments at `pi / (M_phi L ln k)`, the no-long-arc
//! event `S(M)`, the error terms `epsilon_k` and `delta_k`, and the length
//! polynomial `P(mu) = (1/k) sum mu^(L_i)`.
//!
//! Bounds degenerate at small `k` (the denominator of `delta_k` can turn
//! negative); checks then report not-applicable instead of failing, since
//! the statements are asymptotic. A checked quantity that is exactly zero
//! passes regardless, as it satisfies any conceivable bound.

use alloc::string::String;
use alloc::vec::Vec;

// f64 math resolves through libm on no_std targets; host builds shadow
// this with the inherent std methods
#[allow(unused_imports)]
use num_traits::Float;

use num_complex::Complex64;
use rand::Rng;
use thiserror::Error;

use crate::chain::{sample_lengths, ArcLengths, ChainError, CondensedChain};
use crate::interconnect::ClassParams;
use crate::ln_plus;
use crate::spectral::{complex_pow, restrict_eigvec, EigenPair, SpectralError, Spectrum};

/// Eigenvalues this close to 1 are treated as the unit eigenvalue.
const UNIT_EXCLUSION: f64 = 1e-9;
/// Slack on `|mu| <= 1` for eigenvalues computed in floating point.
const MODULUS_SLACK: f64 = 1e-9;
/// A checked quantity below this passes vacuous bounds outright.
const ZERO_PASS: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TheoryError {
    #[error("bound formulas need k >= 3 (got k = {k})")]
    DomainTooSmall { k: usize },
    #[error("invalid bound parameters: {0}")]
    BadParams(String),
    #[error("scan grid must have at least 100 points (got {grid_size})")]
    GridTooCoarse { grid_size: usize },
    #[error("need at least 100 trials (got {trials})")]
    TooFewTrials { trials: usize },
    #[error("parallel component vanished at mu = {mu} under S(M); this would falsify the perpendicular bound")]
    Contradiction { mu: Complex64 },
    #[error(transparent)]
    Chain(#[from] ChainError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

/// Constants entering the bound formulas.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundParams {
    pub m: f64,
    pub m_phi: f64,
    pub gamma: f64,
    pub eta: f64,
    pub theta: f64,
    pub beta: f64,
    pub class: ClassParams,
    pub k: usize,
    pub l: f64,
}

impl BoundParams {
    /// Basic sanity only; [`Self::validate_for_theorems`] adds the exponent
    /// constraints the asymptotic statements need.
    pub fn new(
        m: f64,
        m_phi: f64,
        gamma: f64,
        eta: f64,
        theta: f64,
        beta: f64,
        class: ClassParams,
        k: usize,
        l: f64,
    ) -> Result<Self, TheoryError> {
        if !(m > 1.0) {
            return Err(TheoryError::BadParams(alloc::format!("M = {m} must exceed 1")));
        }
        if !(m_phi > 0.0) {
            return Err(TheoryError::BadParams(alloc::format!("M_phi = {m_phi} must be positive")));
        }
        if k == 0 || !(l >= 1.0) {
            return Err(TheoryError::BadParams(alloc::format!("need k >= 1 and L >= 1 (k={k}, L={l})")));
        }
        Ok(Self { m, m_phi, gamma, eta, theta, beta, class, k, l })
    }

    /// The default parameter set used by every check: `M = 3`,
    /// `M_phi = 3 pi M`, `gamma = 8`, `eta = 3.5`, `theta = beta = 1.5`.
    pub fn standard(k: usize, l: f64, class: ClassParams) -> Result<Self, TheoryError> {
        let m = 3.0;
        let p = Self::new(m, 3.0 * core::f64::consts::PI * m, 8.0, 3.5, 1.5, 1.5, class, k, l)?;
        p.validate_for_theorems()?;
        Ok(p)
    }

    /// Exponent constraints of the main statements: `gamma > 7 + alpha`,
    /// `eta > 3`, `theta, beta > 1`, `M_phi >= 3 pi M`.
    pub fn validate_for_theorems(&self) -> Result<(), TheoryError> {
        if !(self.gamma > 7.0 + self.class.alpha()) {
            return Err(TheoryError::BadParams(alloc::format!(
                "gamma = {} must exceed 7 + alpha = {}",
                self.gamma,
                7.0 + self.class.alpha()
            )));
        }
        if !(self.eta > 3.0) {
            return Err(TheoryError::BadParams(alloc::format!("eta = {} must exceed 3", self.eta)));
        }
        if !(self.theta > 1.0 && self.beta > 1.0) {
            return Err(TheoryError::BadParams(alloc::format!(
                "theta = {}, beta = {} must exceed 1",
                self.theta, self.beta
            )));
        }
        if self.m_phi < 3.0 * core::f64::consts::PI * self.m {
            return Err(TheoryError::BadParams(alloc::format!(
                "M_phi = {} must be at least 3 pi M = {}",
                self.m_phi,
                3.0 * core::f64::consts::PI * self.m
            )));
        }
        Ok(())
    }

    /// Clamped logarithm of `k`.
    pub fn ln_k(&self) -> f64 {
        ln_plus(self.k)
    }

    /// Width `1 / (L ln^gamma k)` of the annulus `Phi`.
    pub fn forbid_width(&self) -> f64 {
        1.0 / (self.l * self.ln_k().powf(self.gamma))
    }

    /// Argument threshold `pi / (M_phi L ln k)` separating small from large
    /// angles.
    pub fn small_angle_threshold(&self) -> f64 {
        core::f64::consts::PI / (self.m_phi * self.l * self.ln_k())
    }

    /// Arc-length ceiling `M L ln k` of the event `S(M)`.
    pub fn length_ceiling(&self) -> f64 {
        self.m * self.l * self.ln_k()
    }

    /// The class gap floor `Delta_k`.
    pub fn delta_floor(&self) -> f64 {
        self.class.gap_floor(self.k)
    }
}

/// Where a point of the closed unit disk sits relative to `Phi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AngleRegion {
    SmallAngles,
    LargeAngles,
    Outside,
}

/// A bound value that may be meaningless at small `k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bound {
    Value(f64),
    Vacuous,
}

impl Bound {
    pub fn value(self) -> Option<f64> {
        match self {
            Bound::Value(v) => Some(v),
            Bound::Vacuous => None,
        }
    }
}

/// Outcome of one bound comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckStatus {
    Pass,
    Fail,
    NotApplicable,
}

/// A check whose premise (event, parameter regime) may not hold.
#[derive(Debug, Clone, PartialEq)]
pub enum Applicability<T> {
    Applicable(T),
    NotApplicable { reason: &'static str },
}

impl<T> Applicability<T> {
    pub fn applicable(&self) -> Option<&T> {
        match self {
            Applicability::Applicable(t) => Some(t),
            Applicability::NotApplicable { .. } => None,
        }
    }
}

fn status_against(value: f64, bound: Bound) -> CheckStatus {
    match bound {
        Bound::Value(b) => {
            if value <= b + ZERO_PASS {
                CheckStatus::Pass
            } else {
                CheckStatus::Fail
            }
        }
        // zero satisfies any bound; otherwise the comparison means nothing
        Bound::Vacuous => {
            if value <= ZERO_PASS {
                CheckStatus::Pass
            } else {
                CheckStatus::NotApplicable
            }
        }
    }
}

/// `epsilon_k = 4 M (ln k)^-(gamma - 1)`, the modulus-loss term of arcs
/// under `S(M)`.
pub fn epsilon_k(p: &BoundParams) -> Result<f64, TheoryError> {
    if p.k < 3 {
        return Err(TheoryError::DomainTooSmall { k: p.k });
    }
    Ok(4.0 * p.m * p.ln_k().powf(-(p.gamma - 1.0)))
}

fn delta_formula(eps: f64, delta_floor: f64) -> Bound {
    let denom = 2.0 * delta_floor - delta_floor * delta_floor - eps;
    if denom > 0.0 {
        Bound::Value(eps / denom)
    } else {
        Bound::Vacuous
    }
}

/// `delta_k = epsilon_k / (2 Delta_k - Delta_k^2 - epsilon_k)`, the
/// perpendicular-component bound; vacuous when the denominator is not
/// positive.
pub fn delta_k(p: &BoundParams) -> Result<Bound, TheoryError> {
    let eps = epsilon_k(p)?;
    Ok(delta_formula(eps, p.delta_floor()))
}

/// Like [`delta_k`] but treating the small-`k` domain error as a vacuous
/// bound, for use inside checks.
fn delta_k_or_vacuous(p: &BoundParams) -> Bound {
    match delta_k(p) {
        Ok(b) => b,
        Err(_) => Bound::Vacuous,
    }
}

/// Places `mu` relative to the annulus `Phi` and its angle split.
pub fn classify_angle(mu: Complex64, p: &BoundParams) -> AngleRegion {
    if (mu - 1.0).norm() <= UNIT_EXCLUSION {
        return AngleRegion::Outside;
    }
    let r = mu.norm();
    if r < 1.0 - p.forbid_width() || r > 1.0 + MODULUS_SLACK {
        return AngleRegion::Outside;
    }
    if mu.arg().abs() <= p.small_angle_threshold() {
        AngleRegion::SmallAngles
    } else {
        AngleRegion::LargeAngles
    }
}

/// The event `S(M)`: no arc longer than `M L ln k`.
pub fn event_s(lengths: &ArcLengths, p: &BoundParams) -> bool {
    (lengths.max() as f64) <= p.length_ceiling()
}

/// Necessary condition for a small-angle eigenvalue:
/// `(mean L)^2 <= 12 delta (mean L^2)`.
pub fn small_angle_criterion(lengths: &ArcLengths, delta: f64) -> bool {
    let k = lengths.k() as f64;
    let mean: f64 = lengths.as_slice().iter().map(|&l| l as f64).sum::<f64>() / k;
    let mean_sq: f64 =
        lengths.as_slice().iter().map(|&l| (l as f64) * (l as f64)).sum::<f64>() / k;
    mean * mean <= 12.0 * delta * mean_sq
}

/// Empirical frequencies of the two moment-concentration events.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentFrequencies {
    /// Frequency of `(1/k) sum L_i <= L/2`; bounded by `4/k`.
    pub low_mean: f64,
    /// Frequency of `(1/k) sum L_i^2 >= 4 L^2`; bounded by `5/k`.
    pub high_square: f64,
}

/// Monte-Carlo frequencies of the Chebyshev concentration events over
/// independent arc-length samples.
pub fn moment_concentration_check<R: Rng + ?Sized>(
    k: usize,
    l: f64,
    trials: usize,
    rng: &mut R,
) -> Result<MomentFrequencies, TheoryError> {
    if trials < 100 {
        return Err(TheoryError::TooFewTrials { trials });
    }
    let mut low = 0usize;
    let mut high = 0usize;
    for _ in 0..trials {
        let lengths = sample_lengths(l, k, rng)?;
        let kf = k as f64;
        let mean: f64 = lengths.as_slice().iter().map(|&x| x as f64).sum::<f64>() / kf;
        let mean_sq: f64 =
            lengths.as_slice().iter().map(|&x| (x as f64) * (x as f64)).sum::<f64>() / kf;
        if mean <= l / 2.0 {
            low += 1;
        }
        if mean_sq >= 4.0 * l * l {
            high += 1;
        }
    }
    Ok(MomentFrequencies {
        low_mean: low as f64 / trials as f64,
        high_square: high as f64 / trials as f64,
    })
}

/// The length polynomial `P(mu) = (1/k) sum mu^(L_i)`.
pub fn p_poly(lengths: &ArcLengths, mu: Complex64) -> Complex64 {
    let k = lengths.k() as f64;
    lengths
        .as_slice()
        .iter()
        .map(|&l| complex_pow(mu, l))
        .sum::<Complex64>()
        / k
}

/// `max(cos y, 0)`.
pub fn cos_plus(y: f64) -> f64 {
    y.cos().max(0.0)
}

/// Number of modulus rings sampled by [`large_angle_scan`].
pub const SCAN_RINGS: usize = 3;

/// Grid maximum of `Re P(mu)` over the large-angle part of `Phi`.
///
/// Arguments are log-spaced from the small-angle threshold up to `pi`
/// (denser near the boundary, where `P` peaks), moduli linearly on
/// `[1 - 1/(L ln^gamma k), 1]` with [`SCAN_RINGS`] rings; conjugates are
/// implied. A grid pass is one-sided evidence only, it does not bound the
/// supremum.
pub fn large_angle_scan(
    lengths: &ArcLengths,
    p: &BoundParams,
    grid_size: usize,
) -> Result<f64, TheoryError> {
    if grid_size < 100 {
        return Err(TheoryError::GridTooCoarse { grid_size });
    }
    let phi_min = p.small_angle_threshold();
    let width = p.forbid_width();
    let ratio = core::f64::consts::PI / phi_min;
    let mut best = f64::NEG_INFINITY;
    for ring in 0..SCAN_RINGS {
        let r = 1.0 - width + width * ring as f64 / (SCAN_RINGS - 1) as f64;
        for g in 0..grid_size {
            let arg = phi_min * ratio.powf(g as f64 / (grid_size - 1) as f64);
            let mu = Complex64::from_polar(r, arg);
            best = best.max(p_poly(lengths, mu).re);
        }
    }
    Ok(best)
}

/// One eigenvalue's deviation `|1 - P(mu)|` against the `sqrt(delta_k)`
/// bound.
#[derive(Debug, Clone, PartialEq)]
pub struct PNearOneEntry {
    pub mu: Complex64,
    pub deviation: f64,
    pub bound: Bound,
    pub status: CheckStatus,
}

/// For every actual eigenvalue inside `Phi`, compares `|1 - P(mu)|` with
/// `sqrt(delta_k)`. Not applicable when `S(M)` fails.
pub fn p_near_1_check(
    chain: &CondensedChain,
    spectrum: &Spectrum,
    p: &BoundParams,
) -> Applicability<Vec<PNearOneEntry>> {
    if !event_s(chain.lengths(), p) {
        return Applicability::NotApplicable { reason: "event S(M) fails for these lengths" };
    }
    let bound = match delta_k_or_vacuous(p) {
        Bound::Value(d) => Bound::Value(d.sqrt()),
        Bound::Vacuous => Bound::Vacuous,
    };
    let entries = spectrum
        .eigenvalues()
        .iter()
        .filter(|&&mu| classify_angle(mu, p) != AngleRegion::Outside)
        .map(|&mu| {
            let deviation = (Complex64::new(1.0, 0.0) - p_poly(chain.lengths(), mu)).norm();
            PNearOneEntry { mu, deviation, bound, status: status_against(deviation, bound) }
        })
        .collect();
    Applicability::Applicable(entries)
}

/// Result of the perpendicular-component bound
/// `||x_perp||^2 <= delta_k ||x_par||^2` for one eigenpair.
#[derive(Debug, Clone, PartialEq)]
pub struct PerpBoundEntry {
    pub mu: Complex64,
    pub ratio: f64,
    pub bound: Bound,
    pub status: CheckStatus,
}

/// Restricts a full eigenpair, splits it against the all-ones direction and
/// compares `||x_perp||^2 / ||x_par||^2` with `delta_k`.
///
/// Not applicable when `mu` lies outside `Phi` or `S(M)` fails. A vanishing
/// parallel component while the bound is in force is a hard error: it would
/// falsify the underlying statement.
pub fn perp_bound_check(
    chain: &CondensedChain,
    pair: &EigenPair,
    p: &BoundParams,
) -> Result<Applicability<PerpBoundEntry>, TheoryError> {
    if classify_angle(pair.mu, p) == AngleRegion::Outside {
        return Ok(Applicability::NotApplicable { reason: "mu outside the forbid region" });
    }
    if !event_s(chain.lengths(), p) {
        return Ok(Applicability::NotApplicable { reason: "event S(M) fails for these lengths" });
    }
    let x = restrict_eigvec(chain, pair)?;
    let (par, perp) = crate::spectral::decompose_parallel(&x);
    let par_sq = chain.k() as f64 * par.norm_sqr();
    let perp_sq: f64 = perp.iter().map(|c| c.norm_sqr()).sum();
    let bound = delta_k_or_vacuous(p);
    if par_sq == 0.0 {
        if matches!(bound, Bound::Value(_)) {
            return Err(TheoryError::Contradiction { mu: pair.mu });
        }
        return Ok(Applicability::NotApplicable { reason: "parallel component vanished outside the bound regime" });
    }
    let ratio = perp_sq / par_sq;
    Ok(Applicability::Applicable(PerpBoundEntry {
        mu: pair.mu,
        ratio,
        bound,
        status: status_against(ratio, bound),
    }))
}

/// Which model a theorem rate refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChainModel {
    Arcmod,
    Cyclemod,
}

/// The proven gap rate: `1 / (L ln^gamma k)` for independent arcs with
/// `n_or_l = L`, and `k / (n ln^gamma k)` for the fixed-size model with
/// `n_or_l = n`.
pub fn theorem_bound(p: &BoundParams, model: ChainModel, n_or_l: f64) -> f64 {
    let lg = p.ln_k().powf(p.gamma);
    match model {
        ChainModel::Arcmod => 1.0 / (n_or_l * lg),
        ChainModel::Cyclemod => p.k as f64 / (n_or_l * lg),
    }
}
