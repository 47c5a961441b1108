//! Deterministic synthetic flow generator: benign background traffic plus
//! injected floods, with a ground-truth interval file.
//!
//! Generation is chunked into one-second slices. Each (seed, stream, chunk)
//! triple derives its own ChaCha key, so chunks can be generated in any
//! order — or in parallel — and still produce byte-identical output.
//! Benign destinations follow a Zipf law (real traffic is heavy-tailed; a
//! uniform pool would make detection artificially easy), sources are
//! uniform. A flood superimposes records toward one target at
//! `attack_rate`, optionally with a freshly spoofed source per record.

use std::io::{self, Write};
use std::net::Ipv4Addr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, Zipf};
use serde::{Deserialize, Serialize};

use crate::evaluation::AttackInterval;
use crate::ingestion::FlowRecord;

const CHUNK_MS: u64 = 1_000;

#[derive(Debug, thiserror::Error)]
pub enum TrafficGenError {
    #[error("invalid scenario: {0}")]
    InvalidSpec(String),
    #[error("io: {0}")]
    Io(#[from] io::Error),
}

/// One injected flood.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackSpec {
    pub start_ms: u64,
    pub duration_ms: u64,
    /// Destination address the flood concentrates on.
    pub target_dst: String,
    /// Records per second during the flood.
    pub attack_rate: f64,
    /// Spoof a fresh random source per record instead of one fixed source.
    #[serde(default)]
    pub spoof_src: bool,
}

impl AttackSpec {
    pub fn end_ms(&self) -> u64 {
        self.start_ms + self.duration_ms
    }
}

/// A full scenario: benign background plus a list of floods.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub duration_ms: u64,
    /// Benign records per second.
    pub benign_rate: f64,
    /// Distinct benign destination addresses.
    pub dst_pool: u32,
    /// Distinct benign source addresses.
    pub src_pool: u32,
    /// Zipf exponent for destination popularity; 0 = uniform.
    #[serde(default = "default_skew")]
    pub skew: f64,
    #[serde(default)]
    pub attacks: Vec<AttackSpec>,
    pub seed: u64,
}

fn default_skew() -> f64 {
    1.0
}

impl ScenarioSpec {
    pub fn validate(&self) -> Result<(), TrafficGenError> {
        let err = |msg: String| Err(TrafficGenError::InvalidSpec(msg));
        if self.duration_ms == 0 {
            return err("duration_ms must be > 0".into());
        }
        if !(self.benign_rate > 0.0) || !self.benign_rate.is_finite() {
            return err(format!("benign_rate must be > 0, got {}", self.benign_rate));
        }
        if self.dst_pool == 0 || self.src_pool == 0 {
            return err("dst_pool and src_pool must be >= 1".into());
        }
        if !(self.skew >= 0.0) || !self.skew.is_finite() {
            return err(format!("skew must be >= 0, got {}", self.skew));
        }
        for (i, a) in self.attacks.iter().enumerate() {
            if a.duration_ms == 0 || a.end_ms() > self.duration_ms {
                return err(format!(
                    "attack {i} interval [{}, {}) outside scenario [0, {})",
                    a.start_ms,
                    a.end_ms(),
                    self.duration_ms
                ));
            }
            if !(a.attack_rate > 0.0) || !a.attack_rate.is_finite() {
                return err(format!("attack {i} rate must be > 0"));
            }
            if a.target_dst.is_empty() {
                return err(format!("attack {i} target_dst is empty"));
            }
        }
        Ok(())
    }

    /// Ground-truth intervals for the configured attacks.
    pub fn truth(&self) -> Vec<AttackInterval> {
        self.attacks
            .iter()
            .enumerate()
            .map(|(i, a)| AttackInterval {
                start_ms: a.start_ms,
                end_ms: a.end_ms(),
                label: format!("flood-{i}"),
            })
            .collect()
    }
}

/// Generation counters.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct GenStats {
    pub benign_records: u64,
    pub attack_records: u64,
}

impl GenStats {
    pub fn total(&self) -> u64 {
        self.benign_records + self.attack_records
    }
}

fn chunk_rng(seed: u64, stream: u64, chunk: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[0..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&stream.to_le_bytes());
    key[16..24].copy_from_slice(&chunk.to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

fn pool_addr(base: u32, i: u32) -> String {
    Ipv4Addr::from(base.wrapping_add(i)).to_string()
}

struct Pools {
    srcs: Vec<String>,
    dsts: Vec<String>,
}

impl Pools {
    fn build(spec: &ScenarioSpec) -> Self {
        // 172.16.0.0/12-ish sources, 10.0.0.0/8-ish destinations.
        Pools {
            srcs: (0..spec.src_pool).map(|i| pool_addr(0xAC10_0000, i)).collect(),
            dsts: (0..spec.dst_pool).map(|i| pool_addr(0x0A00_0000, i)).collect(),
        }
    }
}

fn poisson_count(rng: &mut ChaCha8Rng, lambda: f64) -> u64 {
    if lambda <= 0.0 {
        return 0;
    }
    Poisson::new(lambda).expect("validated lambda").sample(rng) as u64
}

fn gen_chunk(spec: &ScenarioSpec, pools: &Pools, chunk: u64) -> Vec<FlowRecord> {
    let chunk_start = chunk * CHUNK_MS;
    let chunk_end = (chunk_start + CHUNK_MS).min(spec.duration_ms);
    let chunk_len = chunk_end - chunk_start;
    let mut records = Vec::new();

    // Benign background.
    let mut rng = chunk_rng(spec.seed, 0, chunk);
    let zipf = (spec.skew > 0.0)
        .then(|| Zipf::new(spec.dst_pool as f64, spec.skew).expect("validated zipf"));
    let n = poisson_count(&mut rng, spec.benign_rate * chunk_len as f64 / 1_000.0);
    records.reserve(n as usize);
    for _ in 0..n {
        let timestamp_ms = chunk_start + rng.random_range(0..chunk_len);
        let dst_idx = match &zipf {
            Some(z) => (z.sample(&mut rng) as u64 - 1).min(spec.dst_pool as u64 - 1) as usize,
            None => rng.random_range(0..spec.dst_pool) as usize,
        };
        let src_idx = rng.random_range(0..spec.src_pool) as usize;
        records.push(FlowRecord {
            timestamp_ms,
            src: pools.srcs[src_idx].clone(),
            dst: pools.dsts[dst_idx].clone(),
        });
    }

    // Floods overlapping this chunk.
    for (i, attack) in spec.attacks.iter().enumerate() {
        let lo = attack.start_ms.max(chunk_start);
        let hi = attack.end_ms().min(chunk_end);
        if lo >= hi {
            continue;
        }
        let mut rng = chunk_rng(spec.seed, 1_000 + i as u64, chunk);
        let n = poisson_count(&mut rng, attack.attack_rate * (hi - lo) as f64 / 1_000.0);
        let fixed_src = pool_addr(0xC633_6400, i as u32); // 198.51.100.x
        for _ in 0..n {
            let timestamp_ms = lo + rng.random_range(0..hi - lo);
            let src = if attack.spoof_src {
                Ipv4Addr::from(rng.random::<u32>()).to_string()
            } else {
                fixed_src.clone()
            };
            records.push(FlowRecord {
                timestamp_ms,
                src,
                dst: attack.target_dst.clone(),
            });
        }
    }

    // Stable sort: ties keep the benign-then-attack emission order, so the
    // output is a pure function of the spec.
    records.sort_by_key(|r| r.timestamp_ms);
    records
}

/// Generate the scenario's flow records (sorted by timestamp) and its
/// ground-truth attack intervals.
pub fn generate_records(
    spec: &ScenarioSpec,
    parallel: bool,
) -> Result<(Vec<FlowRecord>, Vec<AttackInterval>), TrafficGenError> {
    spec.validate()?;
    let pools = Pools::build(spec);
    let chunks = spec.duration_ms.div_ceil(CHUNK_MS);

    #[cfg(feature = "parallel")]
    let per_chunk: Vec<Vec<FlowRecord>> = if parallel {
        use rayon::prelude::*;
        (0..chunks)
            .into_par_iter()
            .map(|c| gen_chunk(spec, &pools, c))
            .collect()
    } else {
        (0..chunks).map(|c| gen_chunk(spec, &pools, c)).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let per_chunk: Vec<Vec<FlowRecord>> = {
        let _ = parallel;
        (0..chunks).map(|c| gen_chunk(spec, &pools, c)).collect()
    };

    let total = per_chunk.iter().map(Vec::len).sum();
    let mut records = Vec::with_capacity(total);
    for chunk in per_chunk {
        records.extend(chunk);
    }
    Ok((records, spec.truth()))
}

/// Generate straight to writers: flow CSV and truth CSV.
pub fn generate_to(
    spec: &ScenarioSpec,
    flows: &mut impl Write,
    truth: &mut impl Write,
    parallel: bool,
) -> Result<GenStats, TrafficGenError> {
    let (records, intervals) = generate_records(spec, parallel)?;
    let mut stats = GenStats::default();
    let attack_dsts: std::collections::HashSet<&str> =
        spec.attacks.iter().map(|a| a.target_dst.as_str()).collect();
    let mut buf = String::with_capacity(64);
    for r in &records {
        use std::fmt::Write as _;
        buf.clear();
        let _ = writeln!(buf, "{},{},{}", r.timestamp_ms, r.src, r.dst);
        flows.write_all(buf.as_bytes())?;
        // Counting by destination is exact here: floods target dedicated
        // addresses outside the benign pools.
        if attack_dsts.contains(r.dst.as_str()) {
            stats.attack_records += 1;
        } else {
            stats.benign_records += 1;
        }
    }
    write_truth_csv(&intervals, truth)?;
    Ok(stats)
}

/// Truth file: `start_ms,end_ms,label`, one attack per line.
pub fn write_truth_csv(
    intervals: &[AttackInterval],
    out: &mut impl Write,
) -> Result<(), TrafficGenError> {
    for a in intervals {
        writeln!(out, "{},{},{}", a.start_ms, a.end_ms, a.label)?;
    }
    Ok(())
}
