//! Seeded torus experiments: time to consensus under R+, and consensus
//! under sparse injected faults.
//!
//! Step caps are engineering bounds, configurable through [`RunConfig`].

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::app::instances::{random_torus_set, rng};
use crate::app::suites::RunConfig;
use crate::error::{Error, Result};
use crate::lattice::{Site, Space};
use crate::rules::{apply_rplus, is_homogeneous, Homogeneity};

pub const DEFAULT_SIZES: &[i64] = &[8, 12, 16, 20];

/// Builds the global rayon pool from `TOOMLAB_THREADS` (unset or 0 = one
/// worker per core). Later calls, or a pool that already exists, are ignored.
pub fn init_thread_pool() -> Result<()> {
    let threads = match std::env::var("TOOMLAB_THREADS") {
        Ok(v) => {
            v.trim().parse::<usize>().map_err(|_| Error::Config(format!("TOOMLAB_THREADS=`{v}` is not a count")))?
        }
        Err(_) => 0,
    };
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    Ok(())
}

/// Per-trial seeds for torus size `n`, drawn from a stream keyed by the
/// base seed and `n`.
fn run_seeds(cfg: &RunConfig, n: i64, trials: usize) -> Vec<u64> {
    let mut r = rng(cfg.seed ^ (n as u64).rotate_left(40));
    (0..trials).map(|_| r.gen()).collect()
}

fn trial_density(cfg: &RunConfig, seed: u64) -> f64 {
    cfg.density.unwrap_or_else(|| rng(seed ^ 0xde75).gen_range(0.0..1.0))
}

fn check_density(cfg: &RunConfig) -> Result<()> {
    match cfg.density {
        Some(d) if !(0.0..=1.0).contains(&d) => Err(Error::Config(format!("density {d} outside [0, 1]"))),
        _ => Ok(()),
    }
}

fn check_sizes(sizes: &[i64]) -> Result<Vec<Space>> {
    if sizes.is_empty() {
        return Err(Error::Config("no torus sizes".into()));
    }
    sizes.iter().map(|&n| Space::torus(n)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsensusRow {
    pub n: i64,
    pub trial: usize,
    pub seed: u64,
    pub density: f64,
    pub steps: usize,
    /// `h0`, `h1`, or `capped` if the step cap was hit first.
    pub outcome: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsensusSummary {
    pub n: i64,
    pub trials: usize,
    pub capped: usize,
    pub max_steps: usize,
    /// `max_steps / n`.
    pub max_ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConsensusReport {
    pub rows: Vec<ConsensusRow>,
    pub per_size: Vec<ConsensusSummary>,
    /// Largest `steps / n` over all trials: the empirical constant.
    pub constant: f64,
    /// Every per-size ratio lies within 20% of their mean.
    pub stable: bool,
}

impl ConsensusReport {
    pub fn all_reached(&self) -> bool {
        self.per_size.iter().all(|s| s.capped == 0)
    }
}

/// Steps of R+ until `s` is homogeneous, or `None` past `cap`.
pub fn steps_to_consensus(s: &crate::lattice::SiteSet, cap: usize) -> Result<Option<(usize, Homogeneity)>> {
    let mut cur = s.clone();
    for t in 0..=cap {
        match is_homogeneous(&cur)? {
            Homogeneity::Neither => cur = apply_rplus(&cur),
            h => return Ok(Some((t, h))),
        }
    }
    Ok(None)
}

/// Random sets (density `cfg.density`, or drawn per trial) on each torus
/// size, evolved under
/// R+ for at most `consensus_cap * n` steps.
pub fn consensus_experiment(cfg: &RunConfig) -> Result<ConsensusReport> {
    let spaces = check_sizes(&cfg.sizes(DEFAULT_SIZES))?;
    let trials = cfg.trials(200);
    if trials == 0 {
        return Err(Error::Config("trials must be at least 1".into()));
    }
    check_density(cfg)?;
    let mut rows = Vec::new();
    let mut per_size = Vec::new();
    for space in spaces {
        let Space::Torus(n) = space else { unreachable!() };
        let cap = cfg.consensus_cap * n as usize;
        let seeds = run_seeds(cfg, n, trials);
        let batch: Vec<ConsensusRow> = (0..trials)
            .into_par_iter()
            .map(|trial| {
                let seed = seeds[trial];
                let density = trial_density(cfg, seed);
                let s = random_torus_set(space, density, seed)?;
                let (steps, outcome) = match steps_to_consensus(&s, cap)? {
                    Some((t, h)) => (t, h.to_string()),
                    None => (cap, "capped".to_string()),
                };
                Ok(ConsensusRow { n, trial, seed, density, steps, outcome })
            })
            .collect::<Result<_>>()?;
        let max_steps = batch.iter().map(|r| r.steps).max().unwrap_or(0);
        per_size.push(ConsensusSummary {
            n,
            trials,
            capped: batch.iter().filter(|r| r.outcome == "capped").count(),
            max_steps,
            max_ratio: max_steps as f64 / n as f64,
        });
        rows.extend(batch);
    }
    let ratios: Vec<f64> = per_size.iter().map(|s| s.max_ratio).collect();
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    let stable = ratios.iter().all(|r| (r - mean).abs() <= 0.2 * mean);
    let constant = ratios.iter().copied().fold(0.0, f64::max);
    Ok(ConsensusReport { rows, per_size, constant, stable })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailureRow {
    pub n: i64,
    pub trial: usize,
    pub seed: u64,
    pub density: f64,
    pub steps: usize,
    pub failures: usize,
    /// First step at which the state was homogeneous, if ever.
    pub first_consensus: Option<usize>,
    /// Longest run of consecutive steps with no fault injected.
    pub longest_clean_window: usize,
    /// Sites by which the final state differs from the nearer of h0, h1.
    pub final_distance: usize,
    pub pass: bool,
}

/// Evolves R+ for `failure_steps * n²` steps on random sets, flipping one
/// random site after each of `f` random steps (`f = floor(sqrt(n))` unless
/// configured). A trial passes if it ends within `f` sites of homogeneous.
pub fn failure_experiment(cfg: &RunConfig) -> Result<Vec<FailureRow>> {
    let spaces = check_sizes(&cfg.sizes(&[8, 16]))?;
    let trials = cfg.trials(10);
    check_density(cfg)?;
    let mut out = Vec::new();
    for space in spaces {
        let Space::Torus(n) = space else { unreachable!() };
        let steps = cfg.failure_steps * (n * n) as usize;
        let f = cfg.failure_budget.unwrap_or((n as f64).sqrt().floor() as usize);
        if f > steps {
            return Err(Error::Config(format!("{f} failures do not fit in {steps} steps")));
        }
        let seeds = run_seeds(cfg, n, trials);
        let batch: Vec<FailureRow> = (0..trials)
            .into_par_iter()
            .map(|trial| {
                let seed = seeds[trial];
                let mut r = rng(seed ^ 0x5eed_fa11);
                let mut fault_steps = rand::seq::index::sample(&mut r, steps, f).into_vec();
                fault_steps.iter_mut().for_each(|t| *t += 1);
                fault_steps.sort_unstable();
                let faults: Vec<(usize, Site)> =
                    fault_steps.into_iter().map(|t| (t, Site::new(r.gen_range(0..n), r.gen_range(0..n)))).collect();

                let mut cur = random_torus_set(space, trial_density(cfg, seed), seed)?;
                let mut first_consensus = (is_homogeneous(&cur)? != Homogeneity::Neither).then_some(0);
                let mut next_fault = faults.iter().peekable();
                for t in 1..=steps {
                    cur = apply_rplus(&cur);
                    while let Some(&(_, site)) = next_fault.next_if(|(ft, _)| *ft == t) {
                        if !cur.remove(site) {
                            cur.insert(site);
                        }
                    }
                    if first_consensus.is_none() && is_homogeneous(&cur)? != Homogeneity::Neither {
                        first_consensus = Some(t);
                    }
                }
                let mut marks: Vec<usize> = vec![0];
                marks.extend(faults.iter().map(|&(t, _)| t));
                marks.push(steps + 1);
                let longest_clean_window = marks.windows(2).map(|w| w[1] - w[0] - 1).max().unwrap_or(steps);
                let capacity = (n * n) as usize;
                let final_distance = cur.len().min(capacity - cur.len());
                Ok(FailureRow {
                    n,
                    trial,
                    seed,
                    density: trial_density(cfg, seed),
                    steps,
                    failures: f,
                    first_consensus,
                    longest_clean_window,
                    final_distance,
                    pass: final_distance <= f,
                })
            })
            .collect::<Result<_>>()?;
        out.extend(batch);
    }
    Ok(out)
}

/// Serializes rows with a header line.
pub fn rows_to_csv<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::SiteSet;

    fn cfg(sizes: &[i64], trials: usize) -> RunConfig {
        RunConfig { sizes: sizes.to_vec(), trials: Some(trials), ..RunConfig::default() }
    }

    #[test]
    fn empty_is_already_consensus() {
        let s = SiteSet::new(Space::torus(8).unwrap());
        assert_eq!(steps_to_consensus(&s, 80).unwrap(), Some((0, Homogeneity::H0)));
    }

    #[test]
    fn ring_blows_up() {
        let space = Space::torus(8).unwrap();
        let ring = SiteSet::from_sites(space, (0..8).map(|x| (x, 3)));
        let (t, h) = steps_to_consensus(&ring, 80).unwrap().unwrap();
        assert_eq!(h, Homogeneity::H1);
        assert!(t > 0);
    }

    #[test]
    fn single_flip_heals() {
        let space = Space::torus(8).unwrap();
        let mut s = SiteSet::new(space);
        s.insert(Site::new(3, 3));
        assert_eq!(steps_to_consensus(&s, 80).unwrap().unwrap().1, Homogeneity::H0);
        let mut full = SiteSet::full(space).unwrap();
        full.remove(Site::new(3, 3));
        assert_eq!(steps_to_consensus(&full, 80).unwrap().unwrap().1, Homogeneity::H1);
    }

    #[test]
    fn consensus_is_deterministic() {
        let a = consensus_experiment(&cfg(&[8, 12], 6)).unwrap();
        let b = consensus_experiment(&cfg(&[8, 12], 6)).unwrap();
        assert_eq!(a.rows, b.rows);
        assert_eq!(a.rows.len(), 12);
        assert!(a.all_reached());
        let csv = rows_to_csv(&a.rows).unwrap();
        assert!(csv.starts_with("n,trial,seed,density,steps,outcome\n"));
    }

    #[test]
    fn zero_budget_matches_consensus() {
        let mut c = cfg(&[8], 4);
        c.failure_budget = Some(0);
        let rows = failure_experiment(&c).unwrap();
        let plain = consensus_experiment(&c).unwrap();
        for (f, p) in rows.iter().zip(&plain.rows) {
            assert_eq!(f.seed, p.seed);
            assert_eq!(f.first_consensus, Some(p.steps));
            assert_eq!(f.final_distance, 0);
            assert!(f.pass);
        }
    }

    #[test]
    fn sparse_faults_leave_near_consensus() {
        let rows = failure_experiment(&cfg(&[16], 4)).unwrap();
        assert!(rows.iter().all(|r| r.failures == 4 && r.pass), "{rows:?}");
    }

    #[test]
    fn rejects_bad_config() {
        assert!(consensus_experiment(&cfg(&[2], 1)).is_err());
        assert!(consensus_experiment(&cfg(&[8], 0)).is_err());
        assert!(consensus_experiment(&RunConfig { density: Some(1.5), ..cfg(&[8], 1) }).is_err());
    }
}
