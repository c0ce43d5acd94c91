//! Starting knot sets for the Gauss–Newton polish when the optimal `g`
//! vanishes on whole arcs.
//!
//! The discretized L1 problem is not strictly convex. For small smoothing
//! its optimizer often sits at a vertex where `g` is numerically zero
//! between some nodes (for `r ≤ 2` the integrand is piecewise polynomial of
//! degree `r − 1` away from the supports). The sign of `g` is then only
//! known on the remaining arcs, and the knots inside a zero arc are free.

use std::f64::consts::TAU;

use itertools::Itertools;

use crate::error::{Error, Result};
use crate::spectral::{PeriodicFunction, SpectralGrid};

use super::find_root;

/// Relative level below which samples may belong to a zero arc.
pub const ARC_TOL: f64 = 1e-6;
/// Shortest run of small samples treated as a zero arc rather than a
/// crossing.
pub const ARC_MIN_RUN: usize = 8;

/// Marks the samples lying in zero arcs.
pub fn arc_mask(samples: &[f64]) -> Vec<bool> {
    let n = samples.len();
    let gmax = samples.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let small: Vec<bool> = samples.iter().map(|v| v.abs() <= ARC_TOL * gmax).collect();
    let mut mask = vec![false; n];
    if small.iter().all(|&s| s) {
        return vec![true; n];
    }
    let start = small.iter().position(|&s| !s).unwrap_or(0);
    let mut run = Vec::new();
    for off in 1..=n {
        let i = (start + off) % n;
        if small[i] {
            run.push(i);
            continue;
        }
        if run.len() >= ARC_MIN_RUN {
            for &j in &run {
                mask[j] = true;
            }
        }
        run.clear();
    }
    mask
}

/// One feature of the sign pattern of `g`, in cyclic order.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SignFeature {
    /// Transversal zero at `x`; `after` is the sign to its right.
    Crossing { x: f64, after: f64 },
    /// `g` vanishes on `(start, end)`; `left` and `right` are the signs of
    /// the adjacent nonzero arcs.
    ZeroArc { start: f64, end: f64, left: f64, right: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct SignStructure {
    pub features: Vec<SignFeature>,
}

impl SignStructure {
    pub fn has_arcs(&self) -> bool {
        self.features.iter().any(|f| matches!(f, SignFeature::ZeroArc { .. }))
    }

    /// Sign changes forced by the nonzero arcs alone.
    pub fn forced_changes(&self) -> usize {
        self.features
            .iter()
            .filter(|f| match f {
                SignFeature::Crossing { .. } => true,
                SignFeature::ZeroArc { left, right, .. } => left != right,
            })
            .count()
    }
}

/// Crossings and zero arcs of `g` from its grid samples.
pub fn sign_structure(g: &PeriodicFunction, samples: &[f64], grid: &SpectralGrid) -> Result<SignStructure> {
    let n = samples.len();
    let gmax = samples.iter().map(|v| v.abs()).fold(0.0, f64::max);
    if gmax == 0.0 {
        return Err(Error::AllZero);
    }
    let small: Vec<bool> = samples.iter().map(|v| v.abs() <= ARC_TOL * gmax).collect();
    let Some(start) = small.iter().position(|&s| !s) else {
        return Err(Error::AllZero);
    };
    let h = grid.weight();
    let x_of = |off: usize| grid.point(start) + off as f64 * h;
    let tol = 1e-13 * gmax;

    let mut features = Vec::new();
    let mut prev = 0usize;
    for off in 1..=n {
        let i = (start + off) % n;
        if small[i] {
            continue;
        }
        let j = (start + prev) % n;
        let (sl, sr) = (samples[j].signum(), samples[i].signum());
        if off - prev > ARC_MIN_RUN {
            features.push(SignFeature::ZeroArc {
                start: x_of(prev),
                end: x_of(off),
                left: sl,
                right: sr,
            });
        } else if sl != sr {
            let x = find_root(|x| g.evaluate(x), x_of(prev), x_of(off), samples[j], samples[i], tol);
            features.push(SignFeature::Crossing { x, after: sr });
        }
        prev = off;
    }
    Ok(SignStructure { features })
}

/// Knot list in increasing (unwrapped) order plus the sign after the first
/// knot.
pub type Seed = (Vec<f64>, f64);

/// Seeds completing the sign pattern inside the zero arcs.
///
/// An arc between opposite signs receives one knot; an arc between equal
/// signs receives either nothing or a block of the opposite sign. Knots and
/// blocks are then moved so that the signed length sum vanishes where that
/// is possible. Seeds with more than `max_knots` knots are dropped; seeds
/// with fewer blocks come first.
pub fn arc_seeds(structure: &SignStructure, max_knots: usize) -> Vec<Seed> {
    let same: Vec<usize> = structure
        .features
        .iter()
        .enumerate()
        .filter(|(_, f)| matches!(f, SignFeature::ZeroArc { left, right, .. } if left == right))
        .map(|(i, _)| i)
        .collect();
    let forced = structure.forced_changes();
    let choices = same.len().min(8);
    let mut masks: Vec<u32> = (0..1u32 << choices).collect();
    masks.sort_by_key(|m| (m.count_ones(), *m));

    let mut out = Vec::new();
    for mask in masks {
        let blocks: Vec<usize> = (0..choices).filter(|b| mask & (1 << b) != 0).map(|b| same[b]).collect();
        if forced + 2 * blocks.len() > max_knots || forced + 2 * blocks.len() == 0 {
            continue;
        }
        if let Some(seed) = complete(structure, &blocks) {
            out.push(seed);
        }
    }
    out
}

/// Builds one completion, balancing the signed length sum.
fn complete(structure: &SignStructure, blocks: &[usize]) -> Option<Seed> {
    let feats = &structure.features;
    // Signed measure ∫σ with opposite-arc knots at midpoints and empty blocks.
    let layout = |shift: f64, block_len: f64| -> Vec<(f64, f64)> {
        let mut knots = Vec::new();
        for (idx, f) in feats.iter().enumerate() {
            match *f {
                SignFeature::Crossing { x, after } => knots.push((x, after)),
                SignFeature::ZeroArc { start, end, left, right } => {
                    let mid = 0.5 * (start + end);
                    let half = 0.5 * (end - start);
                    if left != right {
                        knots.push((mid + shift * left * half, right));
                    } else if blocks.contains(&idx) {
                        let b = 0.5 * block_len.min(0.9 * (end - start));
                        knots.push((mid - b, -left));
                        knots.push((mid + b, left));
                    }
                }
            }
        }
        knots
    };
    let integral = |knots: &[(f64, f64)]| -> f64 {
        let n = knots.len();
        (0..n)
            .map(|i| {
                let next = if i + 1 == n { knots[0].0 + TAU } else { knots[i + 1].0 };
                knots[i].1 * (next - knots[i].0)
            })
            .sum()
    };
    if feats.is_empty() {
        return None;
    }

    // Opposite-arc knots move by a common fraction of their half-arc,
    // blocks share a common length; both act linearly on ∫σ.
    let min_block_arc = blocks
        .iter()
        .filter_map(|&i| match feats[i] {
            SignFeature::ZeroArc { start, end, .. } => Some(end - start),
            _ => None,
        })
        .fold(f64::INFINITY, f64::min);
    let mut shift = 0.0;
    let mut block_len = if blocks.is_empty() { 0.0 } else { 0.5 * min_block_arc };
    let base = integral(&layout(0.0, block_len));
    let ds = 1e-3;
    let slope_shift = (integral(&layout(ds, block_len)) - base) / ds;
    if slope_shift.abs() > 1e-12 {
        shift = (-base / slope_shift).clamp(-0.9, 0.9);
    }
    let after_shift = integral(&layout(shift, block_len));
    if !blocks.is_empty() && after_shift.abs() > 1e-12 {
        let db = 1e-3;
        let slope_block = (integral(&layout(shift, block_len + db)) - after_shift) / db;
        if slope_block.abs() > 1e-12 {
            block_len = (block_len - after_shift / slope_block).clamp(0.05 * min_block_arc, 0.9 * min_block_arc);
        }
    }
    let knots = layout(shift, block_len);
    if knots.len() < 2 || knots.windows(2).any(|w| w[1].0 <= w[0].0) {
        return None;
    }
    let lead = knots[0].1;
    Some((knots.into_iter().map(|k| k.0).collect(), lead))
}

/// Knot sets drawn from `cells` equally spaced points, for every even count
/// up to `2m` and both leading signs. The number of points shrinks for
/// larger counts so that each count contributes at most `limit` sets.
pub fn cell_seeds(m: usize, cells: usize, limit: usize) -> Vec<Seed> {
    let mut out = Vec::new();
    for count in (2..=2 * m).step_by(2) {
        let mut n = cells.max(count);
        while n > count && binomial(n, count) > limit {
            n -= 1;
        }
        let h = TAU / n as f64;
        for combo in (0..n).combinations(count) {
            let knots: Vec<f64> = combo.iter().map(|&i| (i as f64 + 0.5) * h).collect();
            out.push((knots.clone(), 1.0));
            out.push((knots, -1.0));
        }
    }
    out
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1usize, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}
