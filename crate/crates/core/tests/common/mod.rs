#![allow(dead_code)]

use fpseg::LossKind;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Optimal cost of one segment computed directly, without prefix sums.
pub fn direct_segment_cost(segment: &[f64], loss: LossKind) -> f64 {
    let m = segment.len() as f64;
    let mean = segment.iter().sum::<f64>() / m;
    match loss {
        LossKind::Quadratic => segment.iter().map(|y| (y - mean) * (y - mean)).sum(),
        LossKind::Poisson => {
            if mean == 0.0 {
                0.0
            } else {
                segment.iter().map(|y| mean - y * mean.ln()).sum()
            }
        }
    }
}

/// Every way to place `k - 1` change-points in `1..t`, calling `visit` with each.
pub fn for_each_segmentation(t: usize, k: usize, visit: &mut impl FnMut(&[usize])) {
    fn rec(
        start: usize,
        t: usize,
        left: usize,
        acc: &mut Vec<usize>,
        visit: &mut impl FnMut(&[usize]),
    ) {
        if left == 0 {
            visit(acc);
            return;
        }
        for c in start..=(t - left) {
            acc.push(c);
            rec(c + 1, t, left - 1, acc, visit);
            acc.pop();
        }
    }
    rec(1, t, k - 1, &mut Vec::new(), visit);
}

pub fn segmentation_cost(signal: &[f64], changes: &[usize], loss: LossKind) -> f64 {
    let mut start = 0;
    let mut total = 0.0;
    for &c in changes.iter().chain(std::iter::once(&signal.len())) {
        total += direct_segment_cost(&signal[start..c], loss);
        start = c;
    }
    total
}

/// Exhaustive optimum over all `k`-segmentations of `signal`; ties keep the
/// lexicographically first change-point list.
pub fn brute_force(signal: &[f64], k: usize, loss: LossKind) -> (f64, Vec<usize>) {
    let mut best = (f64::INFINITY, Vec::new());
    for_each_segmentation(signal.len(), k, &mut |changes| {
        let cost = segmentation_cost(signal, changes, loss);
        if cost < best.0 {
            best = (cost, changes.to_vec());
        }
    });
    best
}

pub fn gaussian_signal(n: usize, seed: u64) -> Vec<f64> {
    fpseg::simulate(&fpseg::SignalSpec::constant(
        n,
        fpseg::NoiseKind::Gaussian,
        seed,
    ))
    .unwrap()
}

/// Piecewise-constant Gaussian signal with a few random jumps.
pub fn stepped_signal(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let noise = gaussian_signal(n, seed);
    let mut level = 0.0;
    noise
        .into_iter()
        .map(|e| {
            if rng.random_bool(0.05) {
                level = rng.random_range(-3.0..3.0);
            }
            level + e
        })
        .collect()
}

/// Poisson counts with piecewise-constant rates.
pub fn count_signal(n: usize, seed: u64) -> Vec<f64> {
    use rand_distr::{Distribution, Poisson};
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rates = [0.3, 1.0, 2.5, 6.0, 15.0];
    let mut rate = rates[rng.random_range(0..rates.len())];
    (0..n)
        .map(|_| {
            if rng.random_bool(0.03) {
                rate = rates[rng.random_range(0..rates.len())];
            }
            Poisson::new(rate).unwrap().sample(&mut rng)
        })
        .collect()
}

pub fn relative_difference(a: f64, b: f64) -> f64 {
    fpseg::bench::relative_difference(a, b)
}
