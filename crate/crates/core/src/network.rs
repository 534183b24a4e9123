//! Reaction networks: states, stoichiometry, propensities and split partitions.
//!
//! # Sign convention
//!
//! Column `r` of the stoichiometric matrix is the vector `N_r` and firing
//! channel `r` maps the state `x` to `x - N_r`. A birth channel `∅ → X`
//! therefore carries `-1` in the row of `X`, and a degradation `X → ∅`
//! carries `+1`. Matrices are stored exactly as they are usually printed
//! under this convention.
//!
//! Propensities are always evaluated through [`ReactionNetwork::propensity`],
//! which returns `0` whenever `x - N_r` would leave the non-negative lattice.
//! User-supplied evaluators are therefore never able to drive a count
//! negative.

use std::fmt;
use std::ops::Deref;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Copy numbers of every species.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct State(Vec<u64>);

impl State {
    pub fn new(counts: Vec<u64>) -> Self {
        State(counts)
    }

    pub fn zeros(species: usize) -> Self {
        State(vec![0; species])
    }

    pub fn counts(&self) -> &[u64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<u64> {
        self.0
    }

    /// `self - other` as signed integers.
    pub fn difference(&self, other: &State) -> Vec<i64> {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(&a, &b)| a as i64 - b as i64)
            .collect()
    }

    pub fn l1_norm(&self) -> u64 {
        self.0.iter().sum()
    }
}

impl Deref for State {
    type Target = [u64];

    fn deref(&self) -> &[u64] {
        &self.0
    }
}

impl From<Vec<u64>> for State {
    fn from(counts: Vec<u64>) -> Self {
        State(counts)
    }
}

type Evaluator = Arc<dyn Fn(&[u64]) -> f64 + Send + Sync>;

/// Opaque propensity evaluator for channels that are not mass action.
#[derive(Clone)]
pub struct CustomPropensity {
    label: String,
    evaluator: Evaluator,
}

impl CustomPropensity {
    pub fn new(
        label: impl Into<String>,
        f: impl Fn(&[u64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        CustomPropensity {
            label: label.into(),
            evaluator: Arc::new(f),
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

impl fmt::Debug for CustomPropensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomPropensity")
            .field("label", &self.label)
            .finish_non_exhaustive()
    }
}

/// Intensity law of one reaction channel.
#[derive(Debug, Clone)]
pub enum Propensity {
    /// `rate * prod_i x_i (x_i - 1) ... (x_i - m_i + 1)`.
    MassAction { rate: f64, multiplicity: Vec<u32> },
    /// Arbitrary non-negative function of the state. Negative or NaN
    /// outputs are read as zero.
    Custom(CustomPropensity),
}

impl Propensity {
    pub fn mass_action(rate: f64, multiplicity: Vec<u32>) -> Self {
        Propensity::MassAction { rate, multiplicity }
    }

    pub fn custom(
        label: impl Into<String>,
        f: impl Fn(&[u64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Propensity::Custom(CustomPropensity::new(label, f))
    }

    /// Raw evaluation, without the conservativeness clamp.
    pub fn evaluate(&self, x: &[u64]) -> f64 {
        match self {
            Propensity::MassAction { rate, multiplicity } => {
                let mut value = *rate;
                for (&xi, &mi) in x.iter().zip(multiplicity) {
                    if u64::from(mi) > xi {
                        return 0.0;
                    }
                    for j in 0..u64::from(mi) {
                        value *= (xi - j) as f64;
                    }
                }
                value
            }
            Propensity::Custom(c) => {
                let v = (c.evaluator)(x);
                if v > 0.0 {
                    v
                } else {
                    0.0
                }
            }
        }
    }
}

/// One reaction channel: its stoichiometric column and propensity.
#[derive(Debug, Clone)]
pub struct Channel {
    pub name: Option<String>,
    pub stoich: Vec<i64>,
    pub propensity: Propensity,
}

impl Channel {
    pub fn new(stoich: Vec<i64>, propensity: Propensity) -> Self {
        Channel {
            name: None,
            stoich,
            propensity,
        }
    }

    pub fn mass_action(stoich: Vec<i64>, rate: f64, multiplicity: Vec<u32>) -> Self {
        Channel::new(stoich, Propensity::mass_action(rate, multiplicity))
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }
}

/// Stoichiometric matrix plus propensities. Immutable once built.
#[derive(Debug, Clone)]
pub struct ReactionNetwork {
    species_names: Vec<Option<String>>,
    channels: Vec<Channel>,
    // Non-zero entries of each column, for the feasibility clamp and updates.
    sparse: Vec<Vec<(usize, i64)>>,
}

impl ReactionNetwork {
    pub fn new(species_count: usize, channels: Vec<Channel>) -> Result<Self> {
        if species_count == 0 {
            return Err(Error::InvalidNetwork(
                "species count must be positive".into(),
            ));
        }
        if channels.is_empty() {
            return Err(Error::InvalidNetwork(
                "channel count must be positive".into(),
            ));
        }
        for (r, ch) in channels.iter().enumerate() {
            if ch.stoich.len() != species_count {
                return Err(Error::InvalidNetwork(format!(
                    "channel {r}: stoichiometric column has length {}, expected {species_count}",
                    ch.stoich.len()
                )));
            }
            if let Propensity::MassAction { rate, multiplicity } = &ch.propensity {
                if !(rate.is_finite() && *rate >= 0.0) {
                    return Err(Error::InvalidNetwork(format!(
                        "channel {r}: rate constant must be finite and non-negative, got {rate}"
                    )));
                }
                if multiplicity.len() != species_count {
                    return Err(Error::InvalidNetwork(format!(
                        "channel {r}: multiplicity vector has length {}, expected {species_count}",
                        multiplicity.len()
                    )));
                }
            }
        }
        let sparse = channels
            .iter()
            .map(|ch| {
                ch.stoich
                    .iter()
                    .enumerate()
                    .filter(|(_, &n)| n != 0)
                    .map(|(i, &n)| (i, n))
                    .collect()
            })
            .collect();
        Ok(ReactionNetwork {
            species_names: vec![None; species_count],
            channels,
            sparse,
        })
    }

    pub fn with_species_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.species_count() {
            return Err(Error::DimensionMismatch {
                expected: self.species_count(),
                got: names.len(),
            });
        }
        self.species_names = names.into_iter().map(Some).collect();
        Ok(self)
    }

    pub fn species_count(&self) -> usize {
        self.species_names.len()
    }

    pub fn channel_count(&self) -> usize {
        self.channels.len()
    }

    pub fn channels(&self) -> &[Channel] {
        &self.channels
    }

    pub fn channel(&self, r: usize) -> Result<&Channel> {
        self.channels.get(r).ok_or(Error::ChannelOutOfRange {
            index: r,
            count: self.channels.len(),
        })
    }

    pub fn species_name(&self, i: usize) -> Option<&str> {
        self.species_names.get(i).and_then(|n| n.as_deref())
    }

    pub fn channel_name(&self, r: usize) -> Option<&str> {
        self.channels.get(r).and_then(|c| c.name.as_deref())
    }

    /// Column `N_r`.
    pub fn stoich_column(&self, r: usize) -> &[i64] {
        &self.channels[r].stoich
    }

    /// Whether `x - N_r` stays in the non-negative lattice.
    #[inline]
    pub fn is_feasible(&self, r: usize, x: &[u64]) -> bool {
        self.sparse[r]
            .iter()
            .all(|&(i, n)| n <= 0 || x[i] >= n as u64)
    }

    /// `w_r(x)`, clamped to zero when firing would be infeasible.
    pub fn evaluate_propensity(&self, r: usize, x: &State) -> Result<f64> {
        if r >= self.channel_count() {
            return Err(Error::ChannelOutOfRange {
                index: r,
                count: self.channel_count(),
            });
        }
        self.check_dim(x.len())?;
        Ok(self.propensity(r, x))
    }

    /// Unchecked hot-path variant of [`evaluate_propensity`](Self::evaluate_propensity).
    #[inline]
    pub fn propensity(&self, r: usize, x: &[u64]) -> f64 {
        if !self.is_feasible(r, x) {
            return 0.0;
        }
        self.channels[r].propensity.evaluate(x)
    }

    /// All propensities at `x`.
    pub fn propensities(&self, x: &[u64]) -> Vec<f64> {
        (0..self.channel_count())
            .map(|r| self.propensity(r, x))
            .collect()
    }

    /// Returns `x - N_r`.
    pub fn apply_channel(&self, x: &State, r: usize) -> Result<State> {
        let mut out = x.clone();
        self.fire_in_place(&mut out.0, r)?;
        Ok(out)
    }

    pub(crate) fn fire_in_place(&self, x: &mut [u64], r: usize) -> Result<()> {
        let column = self.sparse.get(r).ok_or(Error::ChannelOutOfRange {
            index: r,
            count: self.channel_count(),
        })?;
        if let Some(&(species, _)) = column.iter().find(|&&(i, n)| n > 0 && x[i] < n as u64) {
            return Err(Error::InfeasibleFiring {
                channel: r,
                species,
            });
        }
        for &(i, n) in column {
            if n > 0 {
                x[i] -= n as u64;
            } else {
                x[i] += n.unsigned_abs();
            }
        }
        Ok(())
    }

    /// Euclidean norm of `N_r`.
    pub fn jump_norm(&self, r: usize) -> f64 {
        self.sparse[r]
            .iter()
            .map(|&(_, n)| (n * n) as f64)
            .sum::<f64>()
            .sqrt()
    }

    fn check_dim(&self, len: usize) -> Result<()> {
        if len != self.species_count() {
            return Err(Error::DimensionMismatch {
                expected: self.species_count(),
                got: len,
            });
        }
        Ok(())
    }
}

/// Two disjoint channel groups covering every channel exactly once.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitPartition {
    first: Vec<usize>,
    second: Vec<usize>,
    in_first: Vec<bool>,
}

impl SplitPartition {
    pub fn new(channel_count: usize, first: Vec<usize>, second: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; channel_count];
        let mut in_first = vec![false; channel_count];
        for (group, is_first) in [(&first, true), (&second, false)] {
            for &r in group {
                if r >= channel_count {
                    return Err(Error::InvalidPartition(format!(
                        "channel {r} out of range (network has {channel_count} channels)"
                    )));
                }
                if seen[r] {
                    return Err(Error::InvalidPartition(format!(
                        "channel {r} assigned more than once"
                    )));
                }
                seen[r] = true;
                in_first[r] = is_first;
            }
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidPartition(format!(
                "channel {missing} belongs to neither group"
            )));
        }
        Ok(SplitPartition {
            first,
            second,
            in_first,
        })
    }

    /// First group given explicitly; every other channel goes to the second.
    pub fn from_first(channel_count: usize, first: Vec<usize>) -> Result<Self> {
        let second = (0..channel_count).filter(|r| !first.contains(r)).collect();
        SplitPartition::new(channel_count, first, second)
    }

    pub fn first(&self) -> &[usize] {
        &self.first
    }

    pub fn second(&self) -> &[usize] {
        &self.second
    }

    pub fn channel_count(&self) -> usize {
        self.in_first.len()
    }

    #[inline]
    pub fn is_first(&self, r: usize) -> bool {
        self.in_first[r]
    }
}

/// Weights `l` of the norm `‖x‖_l = lᵀx`, normalized so that `min l_i = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidWeights("empty weight vector".into()));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 1.0) {
            return Err(Error::InvalidWeights(format!(
                "every weight must be finite and >= 1, got {weights:?}"
            )));
        }
        let min = weights.iter().cloned().fold(f64::INFINITY, f64::min);
        if min != 1.0 {
            return Err(Error::InvalidWeights(format!(
                "smallest weight must equal 1, got {min}"
            )));
        }
        Ok(WeightVector(weights))
    }

    /// Rescales arbitrary positive weights so the smallest becomes 1.
    pub fn normalized(weights: Vec<f64>) -> Result<Self> {
        let min = weights.iter().cloned().fold(f64::INFINITY, f64::min);
        if !(min > 0.0 && min.is_finite()) {
            return Err(Error::InvalidWeights(format!(
                "weights must be positive, got {weights:?}"
            )));
        }
        WeightVector::new(weights.into_iter().map(|w| w / min).collect())
    }

    pub fn ones(dim: usize) -> Self {
        WeightVector(vec![1.0; dim])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    #[inline]
    pub(crate) fn dot(&self, x: &[u64]) -> f64 {
        self.0.iter().zip(x).map(|(l, &xi)| l * xi as f64).sum()
    }

    pub(crate) fn dot_signed(&self, v: &[i64]) -> f64 {
        self.0.iter().zip(v).map(|(l, &vi)| l * vi as f64).sum()
    }
}

/// `‖x‖_l = Σ l_i x_i`.
pub fn weighted_norm(x: &State, l: &WeightVector) -> Result<f64> {
    if x.len() != l.len() {
        return Err(Error::DimensionMismatch {
            expected: l.len(),
            got: x.len(),
        });
    }
    Ok(l.dot(x))
}

/// Constants of the growth and Lipschitz bounds, fitted on a lattice scan.
///
/// The fitted bounds are
///
/// * drift: `-lᵀN w(x) <= a + alpha ‖x‖_l`
/// * quadratic variation: `(-lᵀN)² w(x) / 2 <= b + beta1 ‖x‖_l + beta2 ‖x‖_l²`
/// * Lipschitz: `|w_r(x) - w_r(y)| <= lipschitz[r] ‖x - y‖` for lattice
///   neighbours inside the scanned ball.
#[derive(Debug, Clone, PartialEq)]
pub struct AssumptionReport {
    pub a: f64,
    pub alpha: f64,
    pub b: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub lipschitz: Vec<f64>,
    pub radius: f64,
    pub points_scanned: u64,
}

/// Largest number of lattice states a fit may visit.
pub const SCAN_BUDGET: u64 = 5_000_000;

/// Enumerates every `x` in the non-negative lattice with `lᵀx <= radius`.
fn for_each_lattice_point(
    l: &WeightVector,
    radius: f64,
    budget: u64,
    mut f: impl FnMut(&[u64]),
) -> Result<u64> {
    // Upper bound on the number of points, to fail before doing the work.
    let estimate = l
        .as_slice()
        .iter()
        .map(|w| (radius / w).floor() + 1.0)
        .product::<f64>();
    if estimate > (budget as f64) * 50.0 {
        return Err(Error::ScanBudgetExceeded { budget });
    }
    let l = l.as_slice();
    let mut x = vec![0u64; l.len()];
    let mut used = 0.0;
    let mut count = 0u64;
    loop {
        count += 1;
        if count > budget {
            return Err(Error::ScanBudgetExceeded { budget });
        }
        f(&x);
        // Odometer step: bump the last coordinate that still fits.
        let mut i = x.len();
        loop {
            if i == 0 {
                return Ok(count);
            }
            i -= 1;
            if used + l[i] <= radius + 1e-9 * l[i] {
                x[i] += 1;
                break;
            }
            x[i] = 0;
            used = x.iter().zip(l).map(|(&v, w)| v as f64 * w).sum();
        }
        used = x.iter().zip(l).map(|(&v, w)| v as f64 * w).sum();
    }
}

struct ScanPoint {
    norm: f64,
    drift: f64,
    quad: f64,
}

/// Fits the growth and Lipschitz constants on `{x : ‖x‖_l <= radius}`.
///
/// The drift bound is anchored at the origin: `a = max(g(0), 0)` and
/// `alpha` is the smallest slope making the bound hold on every scanned
/// state. The quadratic-variation bound is a non-negative least-squares fit
/// of `(beta1, beta2)` followed by raising `b` until the bound holds
/// everywhere. Custom propensities are handled purely by the scan.
pub fn fit_assumption_constants(
    network: &ReactionNetwork,
    l: &WeightVector,
    radius: f64,
) -> Result<AssumptionReport> {
    fit_assumption_constants_with_budget(network, l, radius, SCAN_BUDGET)
}

pub fn fit_assumption_constants_with_budget(
    network: &ReactionNetwork,
    l: &WeightVector,
    radius: f64,
    budget: u64,
) -> Result<AssumptionReport> {
    if l.len() != network.species_count() {
        return Err(Error::DimensionMismatch {
            expected: network.species_count(),
            got: l.len(),
        });
    }
    if !(radius.is_finite() && radius > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "scan radius must be positive, got {radius}"
        )));
    }
    let r_count = network.channel_count();
    let jumps: Vec<f64> = (0..r_count)
        .map(|r| -l.dot_signed(network.stoich_column(r)))
        .collect();

    let mut points = Vec::new();
    let mut lipschitz = vec![0.0f64; r_count];
    let mut neighbour = Vec::with_capacity(network.species_count());
    let scanned = for_each_lattice_point(l, radius, budget, |x| {
        let w = network.propensities(x);
        let drift: f64 = w.iter().zip(&jumps).map(|(wr, j)| wr * j).sum();
        let quad: f64 = w.iter().zip(&jumps).map(|(wr, j)| wr * j * j).sum::<f64>() / 2.0;
        let norm = l.dot(x);
        points.push(ScanPoint { norm, drift, quad });
        // Unit steps to lattice neighbours still inside the ball.
        for i in 0..x.len() {
            if norm + l.as_slice()[i] > radius + 1e-9 {
                continue;
            }
            neighbour.clear();
            neighbour.extend_from_slice(x);
            neighbour[i] += 1;
            for (r, lr) in lipschitz.iter_mut().enumerate() {
                let dw = (network.propensity(r, &neighbour) - w[r]).abs();
                if dw > *lr {
                    *lr = dw;
                }
            }
        }
    })?;

    let origin = points
        .iter()
        .find(|p| p.norm == 0.0)
        .expect("origin is always scanned");
    let a = origin.drift.max(0.0);
    let alpha = points
        .iter()
        .filter(|p| p.norm > 0.0)
        .map(|p| (p.drift - a) / p.norm)
        .fold(f64::NEG_INFINITY, f64::max);
    let alpha = if alpha.is_finite() { alpha } else { 0.0 };

    let (beta1, beta2) = nonneg_least_squares_2(&points);
    let b = points
        .iter()
        .map(|p| p.quad - beta1 * p.norm - beta2 * p.norm * p.norm)
        .fold(0.0f64, f64::max);

    Ok(AssumptionReport {
        a,
        alpha,
        b,
        beta1,
        beta2,
        lipschitz,
        radius,
        points_scanned: scanned,
    })
}

/// Least squares of `quad - quad(0)` on `[norm, norm²]` with both
/// coefficients constrained non-negative.
fn nonneg_least_squares_2(points: &[ScanPoint]) -> (f64, f64) {
    let base = points
        .iter()
        .find(|p| p.norm == 0.0)
        .map(|p| p.quad)
        .unwrap_or(0.0);
    let (mut s11, mut s12, mut s22, mut t1, mut t2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for p in points {
        let (u, v, y) = (p.norm, p.norm * p.norm, p.quad - base);
        s11 += u * u;
        s12 += u * v;
        s22 += v * v;
        t1 += u * y;
        t2 += v * y;
    }
    let residual = |b1: f64, b2: f64| -> f64 {
        points
            .iter()
            .map(|p| {
                let e = p.quad - base - b1 * p.norm - b2 * p.norm * p.norm;
                e * e
            })
            .sum()
    };
    let mut candidates = vec![(0.0, 0.0)];
    if s11 > 0.0 {
        candidates.push(((t1 / s11).max(0.0), 0.0));
    }
    if s22 > 0.0 {
        candidates.push((0.0, (t2 / s22).max(0.0)));
    }
    let det = s11 * s22 - s12 * s12;
    if det.abs() > 1e-12 * s11 * s22 {
        let b1 = (t1 * s22 - t2 * s12) / det;
        let b2 = (s11 * t2 - s12 * t1) / det;
        if b1 >= 0.0 && b2 >= 0.0 {
            candidates.push((b1, b2));
        }
    }
    candidates
        .into_iter()
        .min_by(|a, b| residual(a.0, a.1).total_cmp(&residual(b.0, b.1)))
        .unwrap()
}

impl AssumptionReport {
    /// Re-checks the three fitted inequalities on every scanned state.
    /// Returns the first violated state, if any.
    pub fn verify(&self, network: &ReactionNetwork, l: &WeightVector) -> Result<Option<Vec<u64>>> {
        let tol = |v: f64| 1e-9 * (1.0 + v.abs());
        let jumps: Vec<f64> = (0..network.channel_count())
            .map(|r| -l.dot_signed(network.stoich_column(r)))
            .collect();
        let mut violation = None;
        let mut neighbour = Vec::new();
        for_each_lattice_point(l, self.radius, SCAN_BUDGET, |x| {
            if violation.is_some() {
                return;
            }
            let w = network.propensities(x);
            let n = l.dot(x);
            let drift: f64 = w.iter().zip(&jumps).map(|(wr, j)| wr * j).sum();
            let quad: f64 = w.iter().zip(&jumps).map(|(wr, j)| wr * j * j).sum::<f64>() / 2.0;
            let drift_bound = self.a + self.alpha * n;
            let quad_bound = self.b + self.beta1 * n + self.beta2 * n * n;
            let mut ok =
                drift <= drift_bound + tol(drift_bound) && quad <= quad_bound + tol(quad_bound);
            for i in 0..x.len() {
                if n + l.as_slice()[i] > self.radius + 1e-9 {
                    continue;
                }
                neighbour.clear();
                neighbour.extend_from_slice(x);
                neighbour[i] += 1;
                for (r, (&wr, &lr)) in w.iter().zip(&self.lipschitz).enumerate() {
                    let dw = (network.propensity(r, &neighbour) - wr).abs();
                    ok &= dw <= lr + tol(dw);
                }
            }
            if !ok {
                violation = Some(x.to_vec());
            }
        })?;
        Ok(violation)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn birth_death(k: f64, mu: f64) -> ReactionNetwork {
        ReactionNetwork::new(
            1,
            vec![
                Channel::mass_action(vec![-1], k, vec![0]),
                Channel::mass_action(vec![1], mu, vec![1]),
            ],
        )
        .unwrap()
    }

    fn dimerization(k: f64, nu: f64) -> ReactionNetwork {
        ReactionNetwork::new(
            1,
            vec![
                Channel::mass_action(vec![-1], k, vec![0]),
                Channel::mass_action(vec![2], nu, vec![2]),
            ],
        )
        .unwrap()
    }

    #[test]
    fn birth_death_propensities() {
        let net = birth_death(5.0, 0.05);
        assert_eq!(
            net.evaluate_propensity(0, &State::new(vec![50])).unwrap(),
            5.0
        );
        assert_eq!(
            net.evaluate_propensity(1, &State::new(vec![0])).unwrap(),
            0.0
        );
        assert!((net.evaluate_propensity(1, &State::new(vec![50])).unwrap() - 2.5).abs() < 1e-12);
    }

    #[test]
    fn dimerization_rate_at_two() {
        let net = dimerization(5.0, 2.5e-4);
        let w = net.evaluate_propensity(1, &State::new(vec![2])).unwrap();
        assert!((w - 5e-4).abs() < 1e-18);
        assert_eq!(
            net.evaluate_propensity(1, &State::new(vec![1])).unwrap(),
            0.0
        );
    }

    #[test]
    fn channel_out_of_range() {
        let net = birth_death(5.0, 0.05);
        assert!(matches!(
            net.evaluate_propensity(2, &State::new(vec![1])),
            Err(Error::ChannelOutOfRange { index: 2, count: 2 })
        ));
        assert!(matches!(
            net.evaluate_propensity(0, &State::new(vec![1, 2])),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn apply_channel_examples() {
        let bimol = ReactionNetwork::new(
            2,
            vec![
                Channel::mass_action(vec![-1, 0], 1.0, vec![0, 0]),
                Channel::mass_action(vec![0, -1], 1.0, vec![0, 0]),
                Channel::mass_action(vec![1, 1], 1.0, vec![1, 1]),
            ],
        )
        .unwrap();
        assert_eq!(
            bimol.apply_channel(&State::new(vec![2, 3]), 2).unwrap(),
            State::new(vec![1, 2])
        );
        let bd = birth_death(1.0, 1.0);
        assert_eq!(
            bd.apply_channel(&State::new(vec![0]), 0).unwrap(),
            State::new(vec![1])
        );
        assert_eq!(
            bd.apply_channel(&State::new(vec![1]), 1).unwrap(),
            State::new(vec![0])
        );
        assert_eq!(
            bd.apply_channel(&State::new(vec![0]), 1),
            Err(Error::InfeasibleFiring {
                channel: 1,
                species: 0
            })
        );
    }

    #[test]
    fn weighted_norm_examples() {
        let ones = WeightVector::ones(2);
        assert_eq!(weighted_norm(&State::new(vec![0, 0]), &ones).unwrap(), 0.0);
        assert_eq!(weighted_norm(&State::new(vec![3, 4]), &ones).unwrap(), 7.0);
        let l = WeightVector::new(vec![1.0, 2.0]).unwrap();
        assert_eq!(weighted_norm(&State::new(vec![3, 4]), &l).unwrap(), 11.0);
        assert!(weighted_norm(&State::new(vec![3]), &l).is_err());
    }

    #[test]
    fn weight_vector_validation() {
        assert!(WeightVector::new(vec![2.0, 3.0]).is_err());
        assert!(WeightVector::new(vec![0.5, 1.0]).is_err());
        assert_eq!(
            WeightVector::normalized(vec![2.0, 3.0]).unwrap().as_slice(),
            &[1.0, 1.5]
        );
    }

    #[test]
    fn partition_validation() {
        assert!(SplitPartition::new(3, vec![0, 1], vec![2]).is_ok());
        assert!(SplitPartition::new(3, vec![0, 1], vec![1, 2]).is_err());
        assert!(SplitPartition::new(3, vec![0], vec![2]).is_err());
        assert!(SplitPartition::new(3, vec![0, 3], vec![1, 2]).is_err());
        let p = SplitPartition::from_first(4, vec![2]).unwrap();
        assert_eq!(p.second(), &[0, 1, 3]);
        assert!(p.is_first(2) && !p.is_first(0));
    }

    #[test]
    fn custom_propensity_is_clamped() {
        let net = ReactionNetwork::new(
            1,
            vec![
                Channel::new(vec![1], Propensity::custom("const", |_| 7.0)),
                Channel::new(vec![-1], Propensity::custom("negative", |_| -3.0)),
            ],
        )
        .unwrap();
        assert_eq!(net.propensity(0, &[0]), 0.0);
        assert_eq!(net.propensity(0, &[1]), 7.0);
        assert_eq!(net.propensity(1, &[5]), 0.0);
    }

    #[test]
    fn fit_birth_death() {
        let (k, mu) = (5.0, 0.05);
        let net = birth_death(k, mu);
        let l = WeightVector::ones(1);
        let rep = fit_assumption_constants(&net, &l, 1000.0).unwrap();
        // Scan oracle: -lᵀN w(x) = k - mu x, exactly linear.
        let oracle_alpha = (1..=1000)
            .map(|x| ((k - mu * x as f64) - k) / x as f64)
            .fold(f64::NEG_INFINITY, f64::max);
        assert!((rep.a - k).abs() < 1e-12);
        assert!(rep.alpha <= -mu + 1e-9);
        assert!((rep.alpha - oracle_alpha).abs() < 1e-12);
        assert!((rep.beta1 - mu / 2.0).abs() < 1e-9);
        assert!(rep.beta2.abs() < 1e-12);
        assert!((rep.b - k / 2.0).abs() < 1e-6);
        assert!((rep.lipschitz[1] - mu).abs() < 1e-12);
        assert_eq!(rep.lipschitz[0], 0.0);
        assert_eq!(rep.verify(&net, &l).unwrap(), None);
    }

    #[test]
    fn fit_pure_birth() {
        let net =
            ReactionNetwork::new(1, vec![Channel::mass_action(vec![-1], 3.0, vec![0])]).unwrap();
        let rep = fit_assumption_constants(&net, &WeightVector::ones(1), 500.0).unwrap();
        assert_eq!(rep.a, 3.0);
        assert_eq!(rep.alpha, 0.0);
        assert_eq!(rep.lipschitz, vec![0.0]);
    }

    #[test]
    fn fit_dimerization_alpha_zero() {
        let net = dimerization(5.0, 2.5e-4);
        let l = WeightVector::ones(1);
        let rep = fit_assumption_constants(&net, &l, 1000.0).unwrap();
        assert_eq!(rep.alpha, 0.0);
        assert!(rep.beta2 > 0.0);
        assert_eq!(rep.verify(&net, &l).unwrap(), None);
    }

    #[test]
    fn fit_two_species_verifies() {
        let net = ReactionNetwork::new(
            2,
            vec![
                Channel::mass_action(vec![-1, 0], 5.0, vec![0, 0]),
                Channel::mass_action(vec![0, -1], 5.0, vec![0, 0]),
                Channel::mass_action(vec![1, 1], 0.005, vec![1, 1]),
            ],
        )
        .unwrap();
        let l = WeightVector::new(vec![1.0, 2.0]).unwrap();
        let rep = fit_assumption_constants(&net, &l, 200.0).unwrap();
        assert_eq!(rep.verify(&net, &l).unwrap(), None);
    }

    #[test]
    fn fit_budget_exceeded() {
        let net = ReactionNetwork::new(
            3,
            vec![Channel::mass_action(vec![-1, 0, 0], 1.0, vec![0, 0, 0])],
        )
        .unwrap();
        assert!(matches!(
            fit_assumption_constants_with_budget(&net, &WeightVector::ones(3), 1000.0, 1000),
            Err(Error::ScanBudgetExceeded { .. })
        ));
    }

    fn falling(x: u64, m: u32) -> f64 {
        (0..u64::from(m)).map(|j| x as f64 - j as f64).product()
    }

    proptest! {
        #[test]
        fn mass_action_matches_falling_factorials(
            x in prop::collection::vec(0u64..12, 1..=4),
            m_seed in prop::collection::vec(0u32..=3, 4),
            c in 0.0f64..10.0,
        ) {
            let m: Vec<u32> = m_seed[..x.len()].to_vec();
            let p = Propensity::mass_action(c, m.clone());
            let brute: f64 = c * x.iter().zip(&m).map(|(&xi, &mi)| falling(xi, mi).max(0.0)).product::<f64>();
            let got = p.evaluate(&x);
            prop_assert!((got - brute).abs() <= 1e-9 * (1.0 + brute.abs()));
        }

        #[test]
        fn conservativeness_clamp(
            x in prop::collection::vec(0u64..4, 3),
            cols in prop::collection::vec(prop::collection::vec(-2i64..=3, 3), 1..5),
        ) {
            let channels = cols.iter().map(|c| Channel::new(c.clone(), Propensity::custom("one", |_| 1.0))).collect();
            let net = ReactionNetwork::new(3, channels).unwrap();
            let state = State::new(x.clone());
            for (r, col) in cols.iter().enumerate() {
                let infeasible = x.iter().zip(col).any(|(&xi, &n)| (xi as i64) - n < 0);
                let w = net.evaluate_propensity(r, &state).unwrap();
                if infeasible {
                    prop_assert_eq!(w, 0.0);
                } else {
                    prop_assert_eq!(w, 1.0);
                    let next = net.apply_channel(&state, r).unwrap();
                    for i in 0..3 {
                        prop_assert_eq!(next[i] as i64, x[i] as i64 - col[i]);
                    }
                }
            }
        }

        #[test]
        fn weighted_norm_dominates_l1(
            x in prop::collection::vec(0u64..1000, 1..5),
            extra in prop::collection::vec(0.0f64..5.0, 5),
        ) {
            let mut w: Vec<f64> = extra[..x.len()].iter().map(|e| 1.0 + e).collect();
            w[0] = 1.0;
            let l = WeightVector::new(w).unwrap();
            let s = State::new(x);
            prop_assert!(s.l1_norm() as f64 <= weighted_norm(&s, &l).unwrap() + 1e-9);
        }
    }
}
