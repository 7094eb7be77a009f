#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use relstring::state_geometry::{lagrangian, lagrangian_radicand};
use relstring::StateU;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform direction scaled to length `r`.
pub fn on_sphere(rng: &mut ChaCha8Rng, d: usize, r: f64) -> Vec<f64> {
    loop {
        let x: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
        let n = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if n > 1e-3 && n <= 1.0 {
            return x.into_iter().map(|v| r * v / n).collect();
        }
    }
}

/// Block coordinates within `G_{alpha, delta}` and the unit slab.
fn slab_a(rng: &mut ChaCha8Rng, alpha: f64, delta: f64) -> (f64, f64) {
    let ap = rng.random_range((alpha + delta)..(alpha + 1.0 / delta).min(1.0));
    let am = rng.random_range((alpha - 1.0 / delta).max(-1.0)..(alpha - delta));
    (ap, am)
}

/// State of `CM ∩ G_{alpha, delta}`: block radii are a random fraction of
/// the sphere radius.
pub fn cm_g_state(rng: &mut ChaCha8Rng, d: usize, alpha: f64, delta: f64) -> StateU {
    let (ap, am) = slab_a(rng, alpha, delta);
    let rp = (1.0 - ap * ap).sqrt() * rng.random_range(0.0..1.0f64);
    let rm = (1.0 - am * am).sqrt() * rng.random_range(0.0..1.0f64);
    StateU::from_blocks(ap, &on_sphere(rng, d, rp), am, &on_sphere(rng, d, rm))
}

/// State of `M ∩ G_{alpha, delta}`.
pub fn m_g_state(rng: &mut ChaCha8Rng, d: usize, alpha: f64, delta: f64) -> StateU {
    let (ap, am) = slab_a(rng, alpha, delta);
    let cp = on_sphere(rng, d, (1.0 - ap * ap).sqrt());
    let cm = on_sphere(rng, d, (1.0 - am * am).sqrt());
    StateU::from_blocks(ap, &cp, am, &cm)
}

/// `sup_W Z.W - L(Y, W)` by grid search over the cube `|W_i| <= sqrt(1 + Y^2)`
/// (which contains the whole domain of `L(Y, .)`) followed by shrinking local
/// grids around the best point.
pub fn brute_force_h(y: &[f64], z: &[f64]) -> f64 {
    let d = y.len();
    let objective = |w: &[f64]| -> f64 {
        if lagrangian_radicand(y, w) < 0.0 {
            return f64::NEG_INFINITY;
        }
        z.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() - lagrangian(y, w).unwrap()
    };
    let mut center = vec![0.0; d];
    let mut half = (1.0 + y.iter().map(|a| a * a).sum::<f64>()).sqrt();
    let mut best = objective(&center);
    for k in [24usize, 8, 8, 8, 8, 8, 8, 8, 8, 8, 8, 8, 8] {
        let mut best_w = center.clone();
        let total = (k + 1).pow(d as u32);
        let mut w = vec![0.0; d];
        for idx in 0..total {
            let mut r = idx;
            for c in 0..d {
                let j = r % (k + 1);
                r /= k + 1;
                w[c] = center[c] - half + 2.0 * half * j as f64 / k as f64;
            }
            let f = objective(&w);
            if f > best {
                best = f;
                best_w.copy_from_slice(&w);
            }
        }
        center = best_w;
        half *= 2.5 / k as f64;
    }
    best
}
