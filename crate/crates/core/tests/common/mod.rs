//! Test-only oracles, independent of the library's closed forms.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Exact discrete optimal transport cost between `a` and `b` with cost
/// matrix `cost`, by successive shortest augmenting paths on the residual
/// network (Bellman-Ford, so negative residual costs are fine).
pub fn min_cost_transport(a: &[f64], b: &[f64], cost: &[Vec<f64>]) -> f64 {
    let k = a.len();
    let m = b.len();
    // plan[i][j] is the flow on edge i -> j.
    let mut plan = vec![vec![0.0f64; m]; k];
    let mut supply = a.to_vec();
    let mut demand = b.to_vec();
    const EPS: f64 = 1e-15;
    loop {
        let remaining: f64 = supply.iter().sum();
        if remaining <= 1e-13 {
            break;
        }
        // Nodes: sources 0..k, sinks k..k+m. Shortest path from any source
        // with remaining supply to any sink with remaining demand.
        let nodes = k + m;
        let mut dist = vec![f64::INFINITY; nodes];
        let mut prev: Vec<Option<usize>> = vec![None; nodes];
        for i in 0..k {
            if supply[i] > EPS {
                dist[i] = 0.0;
            }
        }
        for _ in 0..nodes {
            let mut changed = false;
            for i in 0..k {
                for j in 0..m {
                    // forward i -> sink j, unlimited capacity
                    if dist[i] + cost[i][j] < dist[k + j] - 1e-15 {
                        dist[k + j] = dist[i] + cost[i][j];
                        prev[k + j] = Some(i);
                        changed = true;
                    }
                    // backward sink j -> i when flow can be cancelled
                    if plan[i][j] > EPS && dist[k + j] - cost[i][j] < dist[i] - 1e-15 {
                        dist[i] = dist[k + j] - cost[i][j];
                        prev[i] = Some(k + j);
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        let sink = (0..m)
            .filter(|&j| demand[j] > EPS && dist[k + j].is_finite())
            .min_by(|&x, &y| dist[k + x].total_cmp(&dist[k + y]))
            .expect("feasible transport");
        // Walk back to find the path and its bottleneck.
        let mut path = vec![k + sink];
        let mut node = k + sink;
        while let Some(p) = prev[node] {
            path.push(p);
            node = p;
        }
        path.reverse();
        let source = path[0];
        let mut amount = supply[source].min(demand[sink]);
        for w in path.windows(2) {
            if w[0] >= k {
                amount = amount.min(plan[w[1]][w[0] - k]);
            }
        }
        for w in path.windows(2) {
            if w[0] < k {
                plan[w[0]][w[1] - k] += amount;
            } else {
                plan[w[1]][w[0] - k] -= amount;
            }
        }
        supply[source] -= amount;
        demand[sink] -= amount;
    }
    (0..k)
        .map(|i| (0..m).map(|j| plan[i][j] * cost[i][j]).sum::<f64>())
        .sum()
}

fn basis(k: usize, j: usize) -> Vec<f64> {
    let mut v = vec![0.0; k];
    v[j] = 1.0;
    v
}

/// `W_q` between laws on the canonical basis, via the generic transport
/// solver with cost `||e_i - e_j||_2^q` computed from the vectors.
pub fn wasserstein_oracle(a: &[f64], b: &[f64], q: f64) -> f64 {
    let k = a.len();
    let cost: Vec<Vec<f64>> = (0..k)
        .map(|i| {
            (0..k)
                .map(|j| {
                    let (ei, ej) = (basis(k, i), basis(k, j));
                    let d2: f64 = ei.iter().zip(&ej).map(|(x, y)| (x - y) * (x - y)).sum();
                    d2.sqrt().powf(q)
                })
                .collect()
        })
        .collect();
    min_cost_transport(a, b, &cost).max(0.0).powf(1.0 / q)
}

/// Random simplex point, with a share of exact zeros.
pub fn random_simplex(rng: &mut ChaCha8Rng, k: usize) -> Vec<f64> {
    loop {
        let raw: Vec<f64> = (0..k)
            .map(|_| {
                if rng.random::<f64>() < 0.2 {
                    0.0
                } else {
                    rng.random::<f64>()
                }
            })
            .collect();
        let s: f64 = raw.iter().sum();
        if s > 1e-6 {
            return raw.into_iter().map(|x| x / s).collect();
        }
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Pass/fail line printed by the acceptance suite.
pub fn report(id: u32, name: &str, pass: bool, detail: &str) {
    println!(
        "[{}] criterion {id}: {name} :: {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
}
