//! Splitting a dataset across simulated clients, either uniformly (IID) or
//! with Dirichlet label skew to model non-IID local data.

use super::LabeledDataset;
use crate::error::{Error, Result};
use crate::shuffle::{mix_seed, permutation};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};

const MAX_RESAMPLES: usize = 20;

/// Disjoint index assignment of a dataset to clients.
#[derive(Debug, Clone)]
pub struct ClientPartition {
    assignments: Vec<Vec<usize>>,
    /// Dirichlet concentration used, `None` for an IID split.
    alpha: Option<f64>,
}

impl ClientPartition {
    pub fn assignments(&self) -> &[Vec<usize>] {
        &self.assignments
    }

    pub fn client(&self, k: usize) -> &[usize] {
        &self.assignments[k]
    }

    pub fn num_clients(&self) -> usize {
        self.assignments.len()
    }

    pub fn alpha(&self) -> Option<f64> {
        self.alpha
    }

    pub fn sample_counts(&self) -> Vec<usize> {
        self.assignments.iter().map(Vec::len).collect()
    }
}

/// Dirichlet(alpha, k) draw via normalized Gamma(alpha, 1) samples.
fn dirichlet(alpha: f64, k: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let gamma = Gamma::new(alpha, 1.0).expect("alpha > 0");
    loop {
        let draws: Vec<f64> = (0..k).map(|_| gamma.sample(rng)).collect();
        let total: f64 = draws.iter().sum();
        if total > 0.0 && total.is_finite() {
            return draws.iter().map(|d| d / total).collect();
        }
        // all draws underflowed to zero (possible for tiny alpha); redraw
    }
}

/// Assign every dataset index to exactly one of `num_clients` clients.
///
/// With `alpha = None` the split is a uniform random one: indices are
/// shuffled and dealt into near-equal chunks. With `alpha = Some(a)`, each
/// class's indices are divided according to per-class client proportions
/// drawn from Dirichlet(a), producing label-skewed shards for small `a`.
/// Splits leaving some client empty are resampled a bounded number of
/// times before erroring.
pub fn partition_clients(
    dataset: &LabeledDataset,
    num_clients: usize,
    alpha: Option<f64>,
    seed: u64,
) -> Result<ClientPartition> {
    if num_clients == 0 {
        return Err(Error::InvalidConfig("need at least one client".into()));
    }
    if let Some(a) = alpha {
        if a.is_nan() || a <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "dirichlet alpha must be positive, got {a}"
            )));
        }
    }
    let n = dataset.len();

    for attempt in 0..MAX_RESAMPLES {
        let attempt_seed = mix_seed(seed, &[attempt as u64]);
        let assignments = match alpha {
            None => split_iid(n, num_clients, attempt_seed),
            Some(a) => split_dirichlet(dataset, num_clients, a, attempt_seed),
        };
        if assignments.iter().all(|c| !c.is_empty()) || num_clients > n {
            // with more clients than samples emptiness is unavoidable;
            // report it rather than spinning
            if let Some(empty) = assignments.iter().position(Vec::is_empty) {
                return Err(Error::EmptyClient(empty));
            }
            return Ok(ClientPartition {
                assignments,
                alpha,
            });
        }
    }
    Err(Error::EmptyClient(0))
}

fn split_iid(n: usize, k: usize, seed: u64) -> Vec<Vec<usize>> {
    let perm = permutation(n, seed);
    let base = n / k;
    let extra = n % k;
    let mut assignments = Vec::with_capacity(k);
    let mut offset = 0usize;
    for client in 0..k {
        let size = base + usize::from(client < extra);
        let mut chunk: Vec<usize> =
            perm[offset..offset + size].iter().map(|&i| i as usize).collect();
        chunk.sort_unstable();
        assignments.push(chunk);
        offset += size;
    }
    assignments
}

fn split_dirichlet(
    dataset: &LabeledDataset,
    k: usize,
    alpha: f64,
    seed: u64,
) -> Vec<Vec<usize>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignments: Vec<Vec<usize>> = vec![Vec::new(); k];
    for class in 0..dataset.num_classes() {
        let mut class_indices: Vec<usize> = dataset
            .labels()
            .iter()
            .enumerate()
            .filter(|(_, &l)| l == class)
            .map(|(i, _)| i)
            .collect();
        if class_indices.is_empty() {
            continue;
        }
        // shuffle within the class, then cut by cumulative proportions
        let order = permutation(class_indices.len(), mix_seed(seed, &[class as u64]));
        class_indices = order.iter().map(|&i| class_indices[i as usize]).collect();

        let proportions = dirichlet(alpha, k, &mut rng);
        let m = class_indices.len();
        let mut cut_points = Vec::with_capacity(k + 1);
        cut_points.push(0usize);
        let mut cumulative = 0.0;
        for p in proportions.iter().take(k - 1) {
            cumulative += p;
            cut_points.push(((cumulative * m as f64).round() as usize).min(m));
        }
        cut_points.push(m);
        for client in 0..k {
            let (start, end) = (cut_points[client], cut_points[client + 1].max(cut_points[client]));
            assignments[client].extend_from_slice(&class_indices[start..end]);
        }
    }
    for client in &mut assignments {
        client.sort_unstable();
    }
    assignments
}
