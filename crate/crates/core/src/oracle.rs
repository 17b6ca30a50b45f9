//! Ground-truth saddle points of weighted objective sums: exhaustive grid
//! min-max with local refinement, a centralized projected subgradient
//! method, and a sampled saddle certificate.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::convex::{linspace, project, BoxSet, Expr, Side, SubgradientSelection};
use crate::error::{Error, Result};
use crate::stepsize::GammaSchedule;

/// `Σ_i μ_i e_i` with positive weights.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedObjective {
    terms: Vec<(f64, Expr, SubgradientSelection)>,
}

impl WeightedObjective {
    pub fn new(terms: Vec<(f64, Expr, SubgradientSelection)>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::contract("weighted objective without terms"));
        }
        if let Some((w, _, _)) = terms.iter().find(|(w, _, _)| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::domain(format!("objective weight {w} is not positive")));
        }
        for (_, e, _) in &terms {
            e.check_well_formed()?;
        }
        Ok(WeightedObjective { terms })
    }

    /// Unit weights, kinks at slope zero.
    pub fn unit(exprs: Vec<Expr>) -> Result<Self> {
        Self::new(
            exprs
                .into_iter()
                .map(|e| {
                    let sel = SubgradientSelection::zeros_for(&e);
                    (1.0, e, sel)
                })
                .collect(),
        )
    }

    pub fn terms(&self) -> &[(f64, Expr, SubgradientSelection)] {
        &self.terms
    }

    pub fn total_weight(&self) -> f64 {
        self.terms.iter().map(|t| t.0).sum()
    }

    /// Smallest `(m1, m2)` covering every variable index.
    pub fn required_dims(&self) -> (usize, usize) {
        self.terms.iter().fold((0, 0), |(a, b), (_, e, _)| {
            let (p, q) = e.required_dims();
            (a.max(p), b.max(q))
        })
    }

    pub fn value(&self, x: &[f64], y: &[f64]) -> f64 {
        self.terms.iter().map(|(w, e, _)| w * e.eval(x, y)).sum()
    }

    pub fn gradient(&self, side: Side, x: &[f64], y: &[f64]) -> Vec<f64> {
        let dim = match side {
            Side::X => x.len(),
            Side::Y => y.len(),
        };
        let mut out = vec![0.0; dim];
        for (w, e, sel) in &self.terms {
            for (o, g) in out.iter_mut().zip(e.gradient(side, x, y, sel)) {
                *o += w * g;
            }
        }
        out
    }

    fn check_dims(&self, bx: &BoxSet, by: &BoxSet) -> Result<()> {
        let (m1, m2) = self.required_dims();
        if m1 > bx.dim() || m2 > by.dim() {
            return Err(Error::contract(format!(
                "objective uses {m1}/{m2} variables, boxes have {}/{}",
                bx.dim(),
                by.dim()
            )));
        }
        Ok(())
    }
}

/// Saddle point estimate. Grid-derived reports carry the min-max gap of the
/// final grid and the coarse resolution.
#[derive(Clone, Debug, PartialEq)]
pub struct SaddleReport {
    pub x_star: Vec<f64>,
    pub y_star: Vec<f64>,
    pub value: f64,
    /// `min_x max_y − max_y min_x` on the last grid searched.
    pub minimax_gap: Option<f64>,
    pub grid_resolution: Option<usize>,
    /// Spacing of the last grid searched (largest over dimensions).
    pub cell_width: Option<f64>,
    /// Spread of objective values over tied coarse-grid winners.
    pub tie_value_spread: f64,
}

/// Default grid budget in cells, `(resolution − 1)^{m1+m2}`.
pub const DEFAULT_GRID_BUDGET: f64 = 4e6;

/// Budget from `NASHNET_BUDGET` when set and valid.
pub fn grid_budget() -> f64 {
    std::env::var("NASHNET_BUDGET")
        .ok()
        .and_then(|v| v.trim().parse::<f64>().ok())
        .filter(|v| *v > 0.0)
        .unwrap_or(DEFAULT_GRID_BUDGET)
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridOptions {
    pub resolution: usize,
    pub budget: f64,
    /// Each level searches a ±2-cell window with 21 points per dimension,
    /// shrinking the spacing fivefold.
    pub refine_levels: usize,
}

impl GridOptions {
    pub fn new(resolution: usize) -> Self {
        GridOptions {
            resolution,
            budget: grid_budget(),
            refine_levels: 3,
        }
    }

    /// Refines until the spacing is far below double-precision noise in the
    /// objective values of the bundled problems.
    pub fn certified(resolution: usize) -> Self {
        GridOptions {
            refine_levels: 10,
            ..Self::new(resolution)
        }
    }
}

const REFINE_POINTS: usize = 21;
const REFINE_RADIUS_CELLS: f64 = 2.0;

struct GridOutcome {
    x_idx: usize,
    y_idx: usize,
    gap: f64,
    x_ties: Vec<usize>,
    y_ties: Vec<usize>,
}

/// Exact discrete min-max over the product grid. Rows are evaluated in
/// parallel; every reduction runs in index order afterwards.
fn discrete_minimax(w: &WeightedObjective, xs: &[Vec<f64>], ys: &[Vec<f64>]) -> (GridOutcome, Vec<f64>) {
    let ny = ys.len();
    let values: Vec<f64> = xs
        .par_iter()
        .flat_map_iter(|x| ys.iter().map(move |y| w.value(x, y)))
        .collect();
    let row_max: Vec<f64> = values
        .par_chunks(ny)
        .map(|r| r.iter().copied().fold(f64::NEG_INFINITY, f64::max))
        .collect();
    let col_min: Vec<f64> = (0..ny)
        .into_par_iter()
        .map(|j| (0..xs.len()).map(|i| values[i * ny + j]).fold(f64::INFINITY, f64::min))
        .collect();
    let upper = row_max.iter().copied().fold(f64::INFINITY, f64::min);
    let lower = col_min.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let x_ties: Vec<usize> = (0..xs.len()).filter(|&i| row_max[i] == upper).collect();
    let y_ties: Vec<usize> = (0..ny).filter(|&j| col_min[j] == lower).collect();
    (
        GridOutcome {
            x_idx: x_ties[0],
            y_idx: y_ties[0],
            gap: upper - lower,
            x_ties,
            y_ties,
        },
        values,
    )
}

fn axis_grid(lower: &[f64], upper: &[f64], per_dim: usize) -> Vec<Vec<f64>> {
    BoxSet::new(lower.to_vec(), upper.to_vec()).map_or_else(|_| vec![lower.to_vec()], |b| b.grid(per_dim))
}

fn spacing(b: &BoxSet, per_dim: usize) -> Vec<f64> {
    b.lower()
        .iter()
        .zip(b.upper())
        .map(|(l, u)| (u - l) / (per_dim.max(2) - 1) as f64)
        .collect()
}

fn local_window(b: &BoxSet, center: &[f64], h: &[f64]) -> BoxSet {
    let lower = center
        .iter()
        .zip(h)
        .zip(b.lower())
        .map(|((c, h), l)| (c - REFINE_RADIUS_CELLS * h).max(*l))
        .collect();
    let upper = center
        .iter()
        .zip(h)
        .zip(b.upper())
        .map(|((c, h), u)| (c + REFINE_RADIUS_CELLS * h).min(*u))
        .collect();
    BoxSet::new(lower, upper).expect("window inside its box")
}

/// Grid min-max with the default options at `resolution` points per dimension.
pub fn grid_minimax(w: &WeightedObjective, bx: &BoxSet, by: &BoxSet, resolution: usize) -> Result<SaddleReport> {
    grid_minimax_with(w, bx, by, &GridOptions::new(resolution))
}

/// `x*` minimizes the grid row maxima, `y*` maximizes the grid column minima;
/// ties go to the lexicographically smallest grid index. The winner is then
/// refined on successively finer local grids.
pub fn grid_minimax_with(w: &WeightedObjective, bx: &BoxSet, by: &BoxSet, opts: &GridOptions) -> Result<SaddleReport> {
    w.check_dims(bx, by)?;
    let res = opts.resolution;
    if res < 3 {
        return Err(Error::contract(format!("grid resolution {res} below 3")));
    }
    let (m1, m2) = (bx.dim(), by.dim());
    if m1 > 2 || m2 > 2 {
        return Err(Error::Resource(format!(
            "grid oracle handles at most two dimensions per player, got m1={m1}, m2={m2}; \
             use the centralized method instead"
        )));
    }
    let cells = ((res - 1) as f64).powi((m1 + m2) as i32);
    if cells > opts.budget {
        let max_res = opts.budget.powf(1.0 / (m1 + m2) as f64).floor() as usize + 1;
        return Err(Error::Resource(format!(
            "grid of {cells:.3e} cells exceeds the budget of {:.3e}; reduce the resolution to at most {max_res}",
            opts.budget
        )));
    }

    let xs = bx.grid(res);
    let ys = by.grid(res);
    let (coarse, values) = discrete_minimax(w, &xs, &ys);
    let ny = ys.len();
    let tie_vals: Vec<f64> = coarse
        .x_ties
        .iter()
        .flat_map(|&i| coarse.y_ties.iter().map(move |&j| (i, j)))
        .map(|(i, j)| values[i * ny + j])
        .collect();
    let tie_value_spread = tie_vals.iter().copied().fold(f64::NEG_INFINITY, f64::max)
        - tie_vals.iter().copied().fold(f64::INFINITY, f64::min);
    drop(values);

    let mut x = xs[coarse.x_idx].clone();
    let mut y = ys[coarse.y_idx].clone();
    let mut gap = coarse.gap;
    let mut hx = spacing(bx, res);
    let mut hy = spacing(by, res);
    for _ in 0..opts.refine_levels {
        let wx = local_window(bx, &x, &hx);
        let wy = local_window(by, &y, &hy);
        let lxs = axis_grid(wx.lower(), wx.upper(), REFINE_POINTS);
        let lys = axis_grid(wy.lower(), wy.upper(), REFINE_POINTS);
        let (fine, _) = discrete_minimax(w, &lxs, &lys);
        x = lxs[fine.x_idx].clone();
        y = lys[fine.y_idx].clone();
        gap = fine.gap;
        hx = spacing(&wx, REFINE_POINTS);
        hy = spacing(&wy, REFINE_POINTS);
    }
    let cell_width = hx.iter().chain(&hy).copied().fold(0.0, f64::max);
    Ok(SaddleReport {
        value: w.value(&x, &y),
        x_star: x,
        y_star: y,
        minimax_gap: Some(gap),
        grid_resolution: Some(res),
        cell_width: Some(cell_width),
        tie_value_spread,
    })
}

/// Simultaneous projected descent in `x` and ascent in `y` from the box
/// centers; returns the final iterate.
pub fn centralized_saddle(
    w: &WeightedObjective,
    bx: &BoxSet,
    by: &BoxSet,
    schedule: &GammaSchedule,
    iters: usize,
) -> Result<SaddleReport> {
    centralized_saddle_from(w, bx, by, schedule, iters, bx.center(), by.center())
}

/// As [`centralized_saddle`], from a given start.
pub fn centralized_saddle_from(
    w: &WeightedObjective,
    bx: &BoxSet,
    by: &BoxSet,
    schedule: &GammaSchedule,
    iters: usize,
    x0: Vec<f64>,
    y0: Vec<f64>,
) -> Result<SaddleReport> {
    w.check_dims(bx, by)?;
    if iters == 0 {
        return Err(Error::contract("centralized method needs at least one iteration"));
    }
    let (mut x, mut y) = (x0, y0);
    for k in 0..iters {
        let g = schedule.at(k);
        let qx = w.gradient(Side::X, &x, &y);
        let qy = w.gradient(Side::Y, &x, &y);
        let nx: Vec<f64> = x.iter().zip(&qx).map(|(a, q)| a - g * q).collect();
        let ny: Vec<f64> = y.iter().zip(&qy).map(|(a, q)| a + g * q).collect();
        x = project(&nx, bx);
        y = project(&ny, by);
        if x.iter().chain(&y).any(|v| !v.is_finite()) {
            return Err(Error::Numeric {
                iteration: k,
                detail: "centralized iterate is not finite".into(),
            });
        }
    }
    Ok(SaddleReport {
        value: w.value(&x, &y),
        x_star: x,
        y_star: y,
        minimax_gap: None,
        grid_resolution: None,
        cell_width: None,
        tie_value_spread: 0.0,
    })
}

/// Seed of the sampler in [`verify_saddle`].
pub const VERIFY_SEED: u64 = 0x5add1e;

/// Largest sampled saddle-inequality violation at `(x*, y*)`, or 0 if none.
/// Half the samples perturb `x`, half perturb `y`; the box corners and
/// centers are always included.
pub fn verify_saddle(
    w: &WeightedObjective,
    candidate: (&[f64], &[f64]),
    bx: &BoxSet,
    by: &BoxSet,
    samples: usize,
) -> Result<f64> {
    let (xs, ys) = candidate;
    if !bx.contains(xs) || !by.contains(ys) {
        return Err(Error::contract("saddle candidate outside the boxes"));
    }
    w.check_dims(bx, by)?;
    let v = w.value(xs, ys);
    let mut rng = ChaCha8Rng::seed_from_u64(VERIFY_SEED);
    let draw = |rng: &mut ChaCha8Rng, b: &BoxSet| -> Vec<f64> {
        b.lower()
            .iter()
            .zip(b.upper())
            .map(|(l, u)| if l < u { rng.random_range(*l..=*u) } else { *l })
            .collect()
    };
    let mut worst = 0.0f64;
    let fixed_x: Vec<Vec<f64>> = bx.grid(2).into_iter().chain([bx.center()]).collect();
    let fixed_y: Vec<Vec<f64>> = by.grid(2).into_iter().chain([by.center()]).collect();
    for x in &fixed_x {
        worst = worst.max(v - w.value(x, ys));
    }
    for y in &fixed_y {
        worst = worst.max(w.value(xs, y) - v);
    }
    for _ in 0..samples.div_ceil(2) {
        let x = draw(&mut rng, bx);
        worst = worst.max(v - w.value(&x, ys));
        let y = draw(&mut rng, by);
        worst = worst.max(w.value(xs, &y) - v);
    }
    Ok(worst)
}

/// Evenly spaced axis values, exposed for tests and reports.
pub fn grid_axis(lo: f64, hi: f64, resolution: usize) -> Vec<f64> {
    linspace(lo, hi, resolution)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convex::{parse_expr, ObjectiveCatalog};

    fn boxes() -> (BoxSet, BoxSet) {
        (BoxSet::cube(1, -5.0, 5.0).unwrap(), BoxSet::cube(1, -5.0, 5.0).unwrap())
    }

    fn toy() -> WeightedObjective {
        WeightedObjective::unit(vec![parse_expr("(sub (pow x0 2) (pow y0 2))").unwrap()]).unwrap()
    }

    fn catalog_total() -> WeightedObjective {
        let c = ObjectiveCatalog::new();
        WeightedObjective::new(c.first().into_iter().map(|e| (1.0, e.expr, e.selection)).collect()).unwrap()
    }

    #[test]
    fn toy_saddle_on_grid() {
        let (bx, by) = boxes();
        let r = grid_minimax(&toy(), &bx, &by, 101).unwrap();
        assert_eq!(r.x_star, vec![0.0]);
        assert_eq!(r.y_star, vec![0.0]);
        assert_eq!(r.minimax_gap, Some(0.0));
        assert_eq!(r.tie_value_spread, 0.0);
    }

    #[test]
    fn catalog_saddle_on_grid() {
        let (bx, by) = boxes();
        let r = grid_minimax_with(&catalog_total(), &bx, &by, &GridOptions::certified(2001)).unwrap();
        assert!((r.x_star[0] - 0.6102).abs() < 0.005, "{r:?}");
        assert!((r.y_star[0] - 0.8844).abs() < 0.005, "{r:?}");
        assert!(r.minimax_gap.unwrap() >= -1e-9);
        let viol = verify_saddle(&catalog_total(), (&r.x_star, &r.y_star), &bx, &by, 10_000).unwrap();
        assert!(viol <= 1e-9, "{viol}");
    }

    #[test]
    fn budget_and_dimension_limits() {
        let (bx, by) = boxes();
        let opts = GridOptions {
            resolution: 2002,
            budget: DEFAULT_GRID_BUDGET,
            refine_levels: 0,
        };
        assert!(matches!(grid_minimax_with(&toy(), &bx, &by, &opts), Err(Error::Resource(_))));
        let b3 = BoxSet::cube(3, -1.0, 1.0).unwrap();
        assert!(matches!(grid_minimax(&toy(), &b3, &by, 5), Err(Error::Resource(_))));
        assert!(matches!(grid_minimax(&toy(), &bx, &by, 2), Err(Error::Contract(_))));
    }

    #[test]
    fn centralized_examples() {
        let (bx, by) = boxes();
        let s = GammaSchedule::harmonic(50.0);
        let r = centralized_saddle(&toy(), &bx, &by, &s, 10_000).unwrap();
        assert!(r.x_star[0].abs() < 1e-2 && r.y_star[0].abs() < 1e-2);

        let smooth = WeightedObjective::unit(vec![parse_expr("(sub (pow (sub x0 1) 2) (pow (add y0 2) 2))").unwrap()])
            .unwrap();
        let r = centralized_saddle_from(&smooth, &bx, &by, &s, 50, vec![1.0], vec![-2.0]).unwrap();
        assert_eq!((r.x_star[0], r.y_star[0]), (1.0, -2.0));
    }

    #[test]
    fn verification_examples() {
        let (bx, by) = boxes();
        assert_eq!(verify_saddle(&toy(), (&[0.0], &[0.0]), &bx, &by, 1000).unwrap(), 0.0);
        assert!(verify_saddle(&toy(), (&[1.0], &[0.0]), &bx, &by, 1000).unwrap() > 0.5);
        assert!(verify_saddle(&toy(), (&[6.0], &[0.0]), &bx, &by, 10).is_err());
    }

    #[test]
    fn weights_must_be_positive() {
        let e = parse_expr("x0").unwrap();
        let sel = SubgradientSelection::default();
        assert!(WeightedObjective::new(vec![(0.0, e.clone(), sel.clone())]).is_err());
        assert!(WeightedObjective::new(vec![(-1.0, e, sel)]).is_err());
        assert!(WeightedObjective::new(vec![]).is_err());
    }
}
