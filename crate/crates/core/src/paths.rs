//! Unit-rate Poisson processes as lazily generated, reproducible arrival
//! sequences.
//!
//! Every channel of every trajectory gets its own ChaCha8 stream. The
//! stream id is a pure function of `(trajectory, channel)`, so ensembles can
//! be generated in any order, on any number of threads, and still see the
//! same arrivals. Sharing one set of paths between two simulators is what
//! couples them.
//!
//! Arrival times are running sums of `Exp(1)` gaps in `f64`. With at most
//! ~10⁷ arrivals per channel the accumulated rounding stays far below any
//! Monte Carlo error in this crate.

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};

use crate::error::{Error, Result};

const BLOCK: usize = 64;

/// Maps `(trajectory, channel)` to an independent random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StreamSeedPlan {
    ensemble_seed: u64,
    max_trajectories: u64,
    max_channels: u64,
}

impl StreamSeedPlan {
    /// Default id ranges: up to 2⁴⁰ trajectories of up to 2²⁴ channels.
    pub fn new(ensemble_seed: u64) -> Self {
        StreamSeedPlan {
            ensemble_seed,
            max_trajectories: 1 << 40,
            max_channels: 1 << 24,
        }
    }

    pub fn with_ranges(
        ensemble_seed: u64,
        max_trajectories: u64,
        max_channels: u64,
    ) -> Result<Self> {
        if max_trajectories == 0 || max_channels == 0 {
            return Err(Error::InvalidArgument("id ranges must be non-empty".into()));
        }
        if max_trajectories.checked_mul(max_channels).is_none() {
            return Err(Error::InvalidArgument(format!(
                "{max_trajectories} trajectories x {max_channels} channels overflows the 64-bit stream space"
            )));
        }
        Ok(StreamSeedPlan {
            ensemble_seed,
            max_trajectories,
            max_channels,
        })
    }

    pub fn ensemble_seed(&self) -> u64 {
        self.ensemble_seed
    }

    pub fn max_trajectories(&self) -> u64 {
        self.max_trajectories
    }

    pub fn max_channels(&self) -> u64 {
        self.max_channels
    }

    /// Injective over the declared ranges.
    pub fn stream_id(&self, trajectory: u64, channel: u64) -> Result<u64> {
        if trajectory >= self.max_trajectories || channel >= self.max_channels {
            return Err(Error::StreamOutOfRange {
                trajectory,
                channel,
                max_trajectories: self.max_trajectories,
                max_channels: self.max_channels,
            });
        }
        Ok(trajectory * self.max_channels + channel)
    }

    pub fn derive_path(&self, trajectory: u64, channel: u64) -> Result<PoissonPath> {
        let stream = self.stream_id(trajectory, channel)?;
        Ok(PoissonPath::from_stream(self.ensemble_seed, stream))
    }

    /// One path per channel for trajectory `trajectory`.
    pub fn derive_paths(&self, trajectory: u64, channels: usize) -> Result<Vec<PoissonPath>> {
        (0..channels as u64)
            .map(|c| self.derive_path(trajectory, c))
            .collect()
    }
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn key_from_seed(seed: u64) -> [u8; 32] {
    let mut state = seed;
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    key
}

/// Arrival times of one standard unit-rate Poisson process.
#[derive(Debug, Clone)]
pub struct PoissonPath {
    seed: u64,
    stream: u64,
    rng: ChaCha8Rng,
    arrivals: Vec<f64>,
    cursor: usize,
}

impl PoissonPath {
    pub fn from_stream(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::from_seed(key_from_seed(seed));
        rng.set_stream(stream);
        PoissonPath {
            seed,
            stream,
            rng,
            arrivals: Vec::new(),
            cursor: 0,
        }
    }

    /// A path with a fixed, finite prefix of arrivals, continued with fresh
    /// random gaps beyond it. Mostly useful in tests.
    pub fn with_prefix(arrivals: Vec<f64>, seed: u64) -> Result<Self> {
        let increasing = arrivals.windows(2).all(|w| w[0] < w[1]);
        if !increasing || arrivals.first().is_some_and(|&a| a <= 0.0) {
            return Err(Error::InvalidArgument(
                "arrivals must be positive and strictly increasing".into(),
            ));
        }
        let mut path = PoissonPath::from_stream(seed, 0);
        path.arrivals = arrivals;
        Ok(path)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Number of arrivals generated so far.
    pub fn materialized(&self) -> usize {
        self.arrivals.len()
    }

    fn extend(&mut self) {
        let mut last = self.arrivals.last().copied().unwrap_or(0.0);
        self.arrivals.reserve(BLOCK);
        for _ in 0..BLOCK {
            let gap: f64 = Exp1.sample(&mut self.rng);
            let next = last + gap;
            // A zero gap (or one lost to rounding) would break strict order.
            last = if next > last { next } else { next_up(last) };
            self.arrivals.push(last);
        }
    }

    /// The `k`-th arrival, `k >= 1`.
    #[inline]
    pub fn arrival(&mut self, k: usize) -> f64 {
        assert!(k >= 1, "arrivals are numbered from 1");
        while self.arrivals.len() < k {
            self.extend();
        }
        self.arrivals[k - 1]
    }

    /// Number of arrivals in `[0, t]`.
    pub fn count(&mut self, t: f64) -> usize {
        if t <= 0.0 {
            return 0;
        }
        while self.arrivals.last().is_none_or(|&a| a <= t) {
            self.extend();
        }
        // Monotone queries walk forward from the cursor.
        if self.cursor > 0 && self.arrivals[self.cursor - 1] > t {
            self.cursor = 0;
        }
        let start = self.cursor;
        let n = start + self.arrivals[start..].partition_point(|&a| a <= t);
        self.cursor = n;
        n
    }

    /// Smallest arrival strictly greater than `t`.
    pub fn next_arrival_after(&mut self, t: f64) -> f64 {
        let n = self.count(t);
        self.arrival(n + 1)
    }

    /// The first `n` arrivals.
    pub fn prefix(&mut self, n: usize) -> &[f64] {
        if n > 0 {
            self.arrival(n);
        }
        &self.arrivals[..n]
    }
}

fn next_up(x: f64) -> f64 {
    f64::from_bits(x.to_bits() + 1)
}

/// Writes the first `n` arrivals of each channel of one trajectory as CSV
/// with columns `channel,index,arrival`.
pub fn dump_arrivals(
    plan: &StreamSeedPlan,
    trajectory: u64,
    channels: usize,
    n: usize,
    out: &mut impl Write,
) -> Result<()> {
    writeln!(
        out,
        "# ensemble_seed={} trajectory={trajectory}",
        plan.ensemble_seed()
    )?;
    writeln!(out, "channel,index,arrival")?;
    for c in 0..channels {
        let mut path = plan.derive_path(trajectory, c as u64)?;
        for (i, a) in path.prefix(n).iter().enumerate() {
            writeln!(out, "{c},{},{a:.17e}", i + 1)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn counting_examples() {
        let mut p = PoissonPath::with_prefix(vec![0.3, 1.1, 2.7], 1).unwrap();
        assert_eq!(p.count(1.1), 2);
        assert_eq!(p.count(0.0), 0);
        assert_eq!(p.count(0.29), 0);
        assert_eq!(p.count(2.7), 3);
        assert_eq!(p.next_arrival_after(0.3), 1.1);
        assert_eq!(p.next_arrival_after(0.0), 0.3);
        assert!(p.next_arrival_after(2.7) > 2.7);
    }

    #[test]
    fn derivation_is_deterministic() {
        let plan = StreamSeedPlan::new(42);
        let mut a = plan.derive_path(7, 1).unwrap();
        let mut b = plan.derive_path(7, 1).unwrap();
        assert_eq!(a.prefix(1000), b.prefix(1000));
    }

    #[test]
    fn channels_get_distinct_streams() {
        let plan = StreamSeedPlan::new(42);
        let mut a = plan.derive_path(7, 0).unwrap();
        let mut b = plan.derive_path(7, 1).unwrap();
        let mut c = plan.derive_path(8, 0).unwrap();
        assert_ne!(a.prefix(10), b.prefix(10));
        assert_ne!(a.prefix(10), c.prefix(10));
        let other = StreamSeedPlan::new(43);
        assert_ne!(a.prefix(10), other.derive_path(7, 0).unwrap().prefix(10));
    }

    #[test]
    fn out_of_range_ids() {
        let plan = StreamSeedPlan::with_ranges(1, 10, 4).unwrap();
        assert!(plan.derive_path(9, 3).is_ok());
        assert!(matches!(
            plan.derive_path(10, 0),
            Err(Error::StreamOutOfRange { .. })
        ));
        assert!(matches!(
            plan.derive_path(0, 4),
            Err(Error::StreamOutOfRange { .. })
        ));
        assert!(StreamSeedPlan::with_ranges(1, u64::MAX, 2).is_err());
    }

    #[test]
    fn stream_ids_injective_on_small_ranges() {
        let plan = StreamSeedPlan::with_ranges(0, 50, 7).unwrap();
        let mut ids: Vec<u64> = (0..50)
            .flat_map(|t| (0..7).map(move |c| (t, c)))
            .map(|(t, c)| plan.stream_id(t, c).unwrap())
            .collect();
        ids.sort_unstable();
        ids.dedup();
        assert_eq!(ids.len(), 350);
    }

    #[test]
    fn law_of_large_numbers() {
        let mut p = StreamSeedPlan::new(2024).derive_path(0, 0).unwrap();
        let t = 1e6;
        let n = p.count(t) as f64;
        let std = t.sqrt();
        assert!((n - t).abs() < 5.0 * std, "count {n} vs {t}");
        // Gap statistics straight from the generated sequence.
        let arrivals = p.prefix(n as usize).to_vec();
        let mean_gap = arrivals.last().unwrap() / arrivals.len() as f64;
        assert!((mean_gap - 1.0).abs() < 5.0 / (arrivals.len() as f64).sqrt());
    }

    #[test]
    fn gaps_pass_kolmogorov_smirnov() {
        let mut p = StreamSeedPlan::new(99).derive_path(3, 2).unwrap();
        let arrivals = p.prefix(10_001).to_vec();
        let mut gaps: Vec<f64> = std::iter::once(arrivals[0])
            .chain(arrivals.windows(2).map(|w| w[1] - w[0]))
            .take(10_000)
            .collect();
        gaps.sort_by(f64::total_cmp);
        let n = gaps.len() as f64;
        let d = gaps
            .iter()
            .enumerate()
            .map(|(i, &g)| {
                let cdf = 1.0 - (-g).exp();
                (cdf - i as f64 / n)
                    .abs()
                    .max(((i + 1) as f64 / n - cdf).abs())
            })
            .fold(0.0, f64::max);
        // Asymptotic critical value at alpha = 1e-3: sqrt(-ln(alpha/2)/2)/sqrt(n).
        let critical = ((2.0f64 / 1e-3).ln() / 2.0).sqrt() / n.sqrt();
        assert!(d < critical, "KS statistic {d} >= {critical}");
    }

    #[test]
    fn reproducible_across_threads() {
        let plan = StreamSeedPlan::new(5);
        let serial: Vec<Vec<f64>> = (0..8)
            .map(|t| plan.derive_path(t, 0).unwrap().prefix(200).to_vec())
            .collect();
        let handles: Vec<_> = (0..8)
            .rev()
            .map(|t| {
                std::thread::spawn(move || {
                    (t, plan.derive_path(t, 0).unwrap().prefix(200).to_vec())
                })
            })
            .collect();
        for h in handles {
            let (t, arr) = h.join().unwrap();
            assert_eq!(arr, serial[t as usize]);
        }
    }

    #[test]
    fn dump_format() {
        let mut out = Vec::new();
        dump_arrivals(&StreamSeedPlan::new(1), 0, 2, 3, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2 + 6);
        assert_eq!(lines[1], "channel,index,arrival");
        assert!(lines[2].starts_with("0,1,"));
        assert!(lines[7].starts_with("1,3,"));
    }

    proptest! {
        #[test]
        fn count_is_monotone_and_consistent(seed in any::<u64>(), a in 0.0f64..50.0, b in 0.0f64..50.0) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let mut p = PoissonPath::from_stream(seed, 0);
            let c_hi = p.count(hi);
            let c_lo = p.count(lo);
            prop_assert!(c_lo <= c_hi);
            let next = p.next_arrival_after(lo);
            prop_assert!(next > lo);
            prop_assert_eq!(next, p.arrival(c_lo + 1));
            if c_lo > 0 {
                prop_assert!(p.arrival(c_lo) <= lo);
            }
        }
    }
}
