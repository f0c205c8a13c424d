use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::series::{align, Series};
use super::StatsError;

/// Largest sample size for which the permutation p-value is computed exactly.
pub const EXACT_MAX_N: usize = 8;

/// Absolute slack when comparing a permuted |r| against the observed one,
/// so that pairings tied with the observation are counted.
const TIE_EPS: f64 = 1e-12;

const ALPHA: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorrelationMethod {
    Pearson,
    Spearman,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationResult {
    pub method: CorrelationMethod,
    pub r: f64,
    pub p_value: f64,
    pub n: usize,
    /// `p_value < 0.05`.
    pub significant: bool,
    /// Exact enumeration rather than Monte Carlo.
    pub exact: bool,
    /// Pairings evaluated: `n!` when exact, else the permutation count.
    pub trials: u64,
}

fn centered(v: &[f64]) -> (Vec<f64>, f64) {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    let d: Vec<f64> = v.iter().map(|x| x - mean).collect();
    let ss = d.iter().map(|x| x * x).sum();
    (d, ss)
}

/// Pearson's r about the means.
pub fn pearson_r(xs: &[f64], ys: &[f64]) -> Result<f64, StatsError> {
    check_inputs("x", xs, "y", ys)?;
    let (dx, sx) = centered(xs);
    let (dy, sy) = centered(ys);
    Ok(r_from(&dx, &dy, (sx * sy).sqrt()))
}

fn r_from(dx: &[f64], dy: &[f64], norm: f64) -> f64 {
    let cov: f64 = dx.iter().zip(dy).map(|(a, b)| a * b).sum();
    (cov / norm).clamp(-1.0, 1.0)
}

fn check_inputs(xn: &str, xs: &[f64], yn: &str, ys: &[f64]) -> Result<(), StatsError> {
    if xs.len() != ys.len() {
        return Err(StatsError::InvalidArgument(format!(
            "length mismatch {} vs {}",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() < 3 {
        return Err(StatsError::InsufficientSamples {
            needed: 3,
            got: xs.len(),
        });
    }
    for (name, v) in [(xn, xs), (yn, ys)] {
        if v.iter().all(|x| *x == v[0]) {
            return Err(StatsError::ZeroVariance(name.to_string()));
        }
    }
    Ok(())
}

/// 1-based ranks with ties averaged.
pub fn ranks(v: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..v.len()).collect();
    order.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut out = vec![0.0; v.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && v[order[j + 1]] == v[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            out[k] = avg;
        }
        i = j + 1;
    }
    out
}

fn permutation_test(
    method: CorrelationMethod,
    xs: &[f64],
    ys: &[f64],
    permutations: usize,
    seed: u64,
) -> Result<CorrelationResult, StatsError> {
    let (dx, sx) = centered(xs);
    let (dy, sy) = centered(ys);
    let norm = (sx * sy).sqrt();
    let r = r_from(&dx, &dy, norm);
    let threshold = r.abs() - TIE_EPS;
    let n = xs.len();

    let (hits, trials, exact) = if n <= EXACT_MAX_N {
        let (hits, total) = enumerate_permutations(&dx, &dy, norm, threshold);
        (hits, total, true)
    } else {
        if permutations == 0 {
            return Err(StatsError::InvalidArgument("permutations must be positive".into()));
        }
        let hits = (0..permutations as u64)
            .into_par_iter()
            .map(|t| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(t);
                let mut perm = dy.clone();
                perm.shuffle(&mut rng);
                u64::from(r_from(&dx, &perm, norm).abs() >= threshold)
            })
            .sum::<u64>();
        (hits, permutations as u64, false)
    };
    let p_value = if exact {
        hits as f64 / trials as f64
    } else {
        (1 + hits) as f64 / (1 + trials) as f64
    };
    Ok(CorrelationResult {
        method,
        r,
        p_value,
        n,
        significant: p_value < ALPHA,
        exact,
        trials,
    })
}

/// Counts pairings (Heap's algorithm over `dy`) whose |r| reaches `threshold`.
fn enumerate_permutations(dx: &[f64], dy: &[f64], norm: f64, threshold: f64) -> (u64, u64) {
    let mut a = dy.to_vec();
    let n = a.len();
    let mut c = vec![0usize; n];
    let mut hits = u64::from(r_from(dx, &a, norm).abs() >= threshold);
    let mut total = 1u64;
    let mut i = 1;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                a.swap(0, i);
            } else {
                a.swap(c[i], i);
            }
            hits += u64::from(r_from(dx, &a, norm).abs() >= threshold);
            total += 1;
            c[i] += 1;
            i = 1;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    (hits, total)
}

/// Pearson correlation with a two-sided permutation p-value. Exact over all
/// `n!` pairings for `n <= 8`, otherwise Monte Carlo where trial `t` shuffles
/// with a ChaCha8 stream `t` under `seed`.
pub fn pearson_test(x: &Series, y: &Series, permutations: usize, seed: u64) -> Result<CorrelationResult, StatsError> {
    let (_, xs, ys) = align(x, y);
    check_inputs(&x.name, &xs, &y.name, &ys)?;
    permutation_test(CorrelationMethod::Pearson, &xs, &ys, permutations, seed)
}

/// Pearson correlation of tie-averaged ranks, tested the same way.
pub fn spearman_test(x: &Series, y: &Series, permutations: usize, seed: u64) -> Result<CorrelationResult, StatsError> {
    let (_, xs, ys) = align(x, y);
    check_inputs(&x.name, &xs, &y.name, &ys)?;
    permutation_test(
        CorrelationMethod::Spearman,
        &ranks(&xs),
        &ranks(&ys),
        permutations,
        seed,
    )
}
