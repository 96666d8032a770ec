//! Independent oracles and small helpers shared by the integration tests.
#![allow(dead_code)]

use lpp_shape::engine::{EnvironmentSpec, Site};
use lpp_shape::field::CornerCurve;
use rand_chacha::ChaCha8Rng;
use rand_core::{Rng, SeedableRng};

/// Uniform draws for test sampling.
pub struct Sampler(ChaCha8Rng);

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Sampler(ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn unit(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.unit()
    }

    pub fn below(&mut self, n: u64) -> u64 {
        self.0.next_u64() % n
    }
}

/// Homogeneous shape constant written directly from its definition.
pub fn gamma_def(x: f64, y: f64) -> f64 {
    (x.sqrt() + y.sqrt()).powi(2)
}

/// Maximum over every up-right path from `start` to `target`, by explicit
/// enumeration of the step sequences. Sums run from the start point.
pub fn enumerate_paths(env: &EnvironmentSpec, start: Site, target: Site) -> f64 {
    let w = (target.0 - start.0) as usize;
    let h = (target.1 - start.1) as usize;
    let steps = w + h;
    let mut best = f64::NEG_INFINITY;
    for mask in 0u32..(1u32 << steps) {
        if mask.count_ones() as usize != w {
            continue;
        }
        let (mut i, mut j) = start;
        let mut acc = env.weight(i, j).unwrap();
        for s in 0..steps {
            if mask >> s & 1 == 1 {
                i += 1;
            } else {
                j += 1;
            }
            acc += env.weight(i, j).unwrap();
        }
        best = best.max(acc);
    }
    best
}

/// Sum of the weights along a lattice path.
pub fn path_weight(env: &EnvironmentSpec, path: &[Site]) -> f64 {
    let mut acc = 0.0;
    for (k, &(i, j)) in path.iter().enumerate() {
        let w = env.weight(i, j).unwrap();
        acc = if k == 0 { w } else { acc + w };
    }
    acc
}

/// Corner shape by brute force: the straight line when the target is in the
/// rate-one region, otherwise the best two-segment path through `(a, f(a))`
/// over a uniform grid plus log grids packed at both ends, and both axis
/// routes.
pub fn corner_brute(curve: CornerCurve, r: f64, x: f64, y: f64, grid: usize) -> f64 {
    let (a0, f0) = (curve.a0(), curve.f0());
    let inside = |px: f64, py: f64| px <= a0 && py <= curve.eval(px.min(a0)).unwrap_or(0.0);
    if inside(x, y) {
        return gamma_def(x, y);
    }
    let mut best = f64::NEG_INFINITY;
    let mut try_a = |a: f64| {
        let fa = curve.eval(a).unwrap();
        if a <= x && fa <= y {
            best = best.max(gamma_def(a, fa) + gamma_def(x - a, y - fa) / r);
        }
    };
    let top = a0.min(x);
    for k in 0..=grid {
        try_a((top * k as f64 / grid as f64).min(top));
    }
    // steep ends need log-spaced samples
    for k in 0..=grid {
        let t = k as f64 / grid as f64;
        try_a((top * 10f64.powf(-300.0 * t)).min(top));
        try_a((top * (1.0 - 10f64.powf(-16.0 * t))).max(0.0));
    }
    // vertical route: up the axis to (0, f0) then on at rate r
    if y >= f0 {
        best = best.max(f0 + gamma_def(x, y - f0) / r);
    }
    if x >= a0 {
        best = best.max(a0 + gamma_def(x - a0, y) / r);
    }
    best
}

/// Two-phase shape by brute force: the straight line when the target is
/// above the line, and every path that reaches the line at `u1`, runs along
/// it to `u2 >= u1` and leaves straight for the target, on a grid of `u`.
pub fn two_phase_brute(r: f64, lambda: f64, x: f64, y: f64, grid: usize) -> f64 {
    let above = |px: f64, py: f64| py > px - lambda;
    let mut best = f64::NEG_INFINITY;
    if above(x, y) {
        best = gamma_def(x, y);
    }
    let lo = lambda;
    let hi = x.min(y + lambda);
    if hi < lo {
        return best;
    }
    let leg = |px: f64, py: f64, qx: f64, qy: f64| {
        let rate = if above(0.5 * (px + qx), 0.5 * (py + qy)) { 1.0 } else { r };
        gamma_def(qx - px, qy - py) / rate
    };
    for a in 0..=grid {
        let u1 = lo + (hi - lo) * a as f64 / grid as f64;
        for b in a..=grid {
            let u2 = lo + (hi - lo) * b as f64 / grid as f64;
            let v = leg(0.0, 0.0, u1, u1 - lambda)
                + gamma_def(u2 - u1, u2 - u1) / r
                + leg(u2, u2 - lambda, x, y);
            best = best.max(v);
        }
    }
    best
}
