//! Grids over strategy angles and a coordinate-wise golden-section polish.

use std::f64::consts::PI;

use crate::scheme::normalize_angle;

/// Golden-section line searches stop once the bracket is this narrow.
const BRACKET_TOL: f64 = 1e-10;
/// Sweeps stop once a full pass improves the objective by less than this.
const SWEEP_TOL: f64 = 1e-12;
const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Domain of one angle coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AxisKind {
    /// `(-pi, pi]` with wrap-around.
    Periodic,
    /// `[0, pi]`, used for classical theta where `theta` and `-theta` play identically.
    HalfTurn,
}

impl AxisKind {
    /// `points` samples of `[-pi, pi]` (periodic, with the duplicate `-pi`
    /// endpoint dropped) or of `[0, pi]`.
    pub fn grid(self, points: usize) -> Vec<f64> {
        let n = points.max(2);
        match self {
            AxisKind::Periodic => {
                let step = 2.0 * PI / (n - 1) as f64;
                (1..n).map(|k| normalize_angle(-PI + k as f64 * step)).collect()
            }
            AxisKind::HalfTurn => {
                let step = PI / (n - 1) as f64;
                (0..n).map(|k| (k as f64 * step).min(PI)).collect()
            }
        }
    }

    pub fn step(self, points: usize) -> f64 {
        let n = points.max(2);
        match self {
            AxisKind::Periodic => 2.0 * PI / (n - 1) as f64,
            AxisKind::HalfTurn => PI / (n - 1) as f64,
        }
    }

    pub fn clamp(self, x: f64) -> f64 {
        match self {
            AxisKind::Periodic => normalize_angle(x),
            AxisKind::HalfTurn => x.clamp(0.0, PI),
        }
    }

    /// Coordinate distance, wrap-aware on periodic axes.
    pub fn distance(self, a: f64, b: f64) -> f64 {
        match self {
            AxisKind::Periodic => normalize_angle(a - b).abs(),
            AxisKind::HalfTurn => (a - b).abs(),
        }
    }
}

/// Maximizes `f` on `[lo, hi]` by golden-section search.
fn golden_max<F: FnMut(f64) -> f64>(mut f: F, mut lo: f64, mut hi: f64) -> (f64, f64) {
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > BRACKET_TOL {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Coordinate-wise golden-section ascent from `start` (whose value is
/// `start_value`). Each line search covers `±radius` around the current
/// point. A move is taken only when it strictly improves the objective, so
/// the returned value is never below `start_value`.
pub fn coordinate_ascent<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    start: &[f64],
    start_value: f64,
    axes: &[AxisKind],
    radius: f64,
    max_sweeps: usize,
) -> (Vec<f64>, f64) {
    debug_assert_eq!(start.len(), axes.len());
    let mut x = start.to_vec();
    let mut best = start_value;
    for _ in 0..max_sweeps {
        let sweep_start = best;
        for i in 0..x.len() {
            let axis = axes[i];
            let (lo, hi) = match axis {
                AxisKind::Periodic => (x[i] - radius, x[i] + radius),
                AxisKind::HalfTurn => ((x[i] - radius).max(0.0), (x[i] + radius).min(PI)),
            };
            let mut probe = x.clone();
            let (t, v) = golden_max(
                |t| {
                    probe[i] = axis.clamp(t);
                    f(&probe)
                },
                lo,
                hi,
            );
            if v > best {
                x[i] = axis.clamp(t);
                best = v;
            }
        }
        if best - sweep_start < SWEEP_TOL {
            break;
        }
    }
    (x, best)
}
