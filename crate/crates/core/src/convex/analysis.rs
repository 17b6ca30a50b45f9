use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::boxset::{linspace, norm, BoxSet};
use super::expr::{Expr, Side, SubgradientSelection};

/// Sampled bound on subgradient norms: the largest `‖∂_x e‖` or `‖∂_y e‖`
/// over a grid of `grid` points per dimension on `bx × by`.
pub fn lipschitz_bound(e: &Expr, bx: &BoxSet, by: &BoxSet, grid: usize, sel: &SubgradientSelection) -> f64 {
    let grid = grid.max(2);
    let xs = bx.grid(grid);
    let ys = by.grid(grid);
    let mut best = 0.0f64;
    for x in &xs {
        for y in &ys {
            best = best
                .max(norm(&e.gradient(Side::X, x, y, sel)))
                .max(norm(&e.gradient(Side::Y, x, y, sel)));
        }
    }
    best
}

fn random_point(rng: &mut ChaCha8Rng, b: &BoxSet) -> Vec<f64> {
    b.lower()
        .iter()
        .zip(b.upper())
        .map(|(l, u)| if l < u { rng.random_range(*l..=*u) } else { *l })
        .collect()
}

fn midpoint(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(p, q)| 0.5 * (p + q)).collect()
}

/// Midpoint-inequality sampling of the convex-concave assertion.
///
/// Each trial draws a segment in one block and a fixed point in the other.
/// Returns one message per block that failed at least once; an empty result
/// is evidence, not proof.
pub fn convexity_warnings(e: &Expr, bx: &BoxSet, by: &BoxSet, trials: usize, seed: u64) -> Vec<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for side in [Side::X, Side::Y] {
        let mut failures = 0usize;
        let mut witness = None;
        for _ in 0..trials {
            let (a, b, fixed) = match side {
                Side::X => (random_point(&mut rng, bx), random_point(&mut rng, bx), random_point(&mut rng, by)),
                Side::Y => (random_point(&mut rng, by), random_point(&mut rng, by), random_point(&mut rng, bx)),
            };
            let m = midpoint(&a, &b);
            let val = |p: &[f64]| match side {
                Side::X => e.eval(p, &fixed),
                Side::Y => e.eval(&fixed, p),
            };
            let (fa, fb, fm) = (val(&a), val(&b), val(&m));
            let chord = 0.5 * (fa + fb);
            let tol = 1e-9 * (1.0 + fa.abs() + fb.abs());
            let bad = match side {
                Side::X => fm > chord + tol,
                Side::Y => fm < chord - tol,
            };
            if bad {
                failures += 1;
                witness.get_or_insert((a, b, fixed));
            }
        }
        if let Some((a, b, fixed)) = witness {
            let (kind, other) = match side {
                Side::X => ("convex in x", "y"),
                Side::Y => ("concave in y", "x"),
            };
            out.push(format!(
                "expression does not look {kind}: midpoint test failed in {failures}/{trials} trials \
                 (e.g. segment {a:?} to {b:?} with {other} = {fixed:?})"
            ));
        }
    }
    out
}

/// Central finite-difference gradient, for checking formal derivatives.
pub fn finite_difference(e: &Expr, side: Side, x: &[f64], y: &[f64], h: f64) -> Vec<f64> {
    let dim = match side {
        Side::X => x.len(),
        Side::Y => y.len(),
    };
    (0..dim)
        .map(|d| {
            let (mut xp, mut yp) = (x.to_vec(), y.to_vec());
            let (mut xm, mut ym) = (x.to_vec(), y.to_vec());
            match side {
                Side::X => {
                    xp[d] += h;
                    xm[d] -= h;
                }
                Side::Y => {
                    yp[d] += h;
                    ym[d] -= h;
                }
            }
            (e.eval(&xp, &yp) - e.eval(&xm, &ym)) / (2.0 * h)
        })
        .collect()
}

/// `n` evenly spaced values on `[lo, hi]`.
pub fn sample_axis(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    linspace(lo, hi, n)
}
