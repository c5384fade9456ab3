#![allow(dead_code)]

use diamond_embed::{build_diamond, shortest_path_metric, MetricMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn diamond_metric(k: usize) -> MetricMatrix {
    shortest_path_metric(&build_diamond(k).unwrap()).unwrap()
}

/// Shortest-path closure of uniform random weights in `[0.1, 1)` on `K_n`.
pub fn random_metric(n: usize, seed: u64) -> MetricMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut d = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let w = rng.random_range(0.1..1.0);
            d[i][j] = w;
            d[j][i] = w;
        }
    }
    for m in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i][m] + d[m][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    MetricMatrix::from_rows(&d).unwrap()
}
