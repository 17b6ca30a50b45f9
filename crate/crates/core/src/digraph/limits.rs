use super::matrix::{strongly_connected, Matrix, StochasticMatrix};
use super::sequence::{GraphSequenceSpec, Subnet};
use crate::error::{Error, Result};

/// Default column-spread tolerance for limit vectors.
pub const LIMIT_TOL: f64 = 1e-9;

/// Limit `φ(s)` of the transition products `Φ(k, s) → 1 φ(s)ᵀ`.
#[derive(Clone, Debug, PartialEq)]
pub struct LimitVector {
    pub phi: Vec<f64>,
    pub start_index: usize,
    pub achieved_spread: f64,
}

/// Envelope `|Φ(k,s)_ij − φ_j(s)| ≤ C ρ^{k−s}` for sequences obeying the
/// weight floor η and a UJSC window T on `n` nodes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GeometricRateBound {
    pub c: f64,
    pub rho: f64,
    pub m: usize,
}

impl GeometricRateBound {
    pub fn new(eta: f64, n: usize, window: usize) -> Self {
        let m = ((n.saturating_sub(1)) * window).max(1);
        let em = eta.powi(m as i32);
        GeometricRateBound {
            c: 2.0 * (1.0 + 1.0 / em) / (1.0 - em),
            rho: (1.0 - em).powf(1.0 / m as f64),
            m,
        }
    }

    pub fn at(&self, steps: usize) -> f64 {
        self.c * self.rho.powf(steps as f64)
    }

    /// Steps needed for the envelope to fall below `tol`, scaled by ten.
    fn iteration_cap(&self, tol: f64) -> f64 {
        // ln(1/ρ) = −ln(1 − η^M)/M
        let eta_m = 1.0 - self.rho.powi(self.m as i32);
        let decay = (-(-eta_m).ln_1p() / self.m as f64).max(f64::MIN_POSITIVE);
        10.0 * self.m as f64 * (1.0 / tol).ln().max(1.0) / decay
    }
}

/// `Φ(k, s) = A(k) A(k−1) ··· A(s)`.
pub fn transition_product(spec: &GraphSequenceSpec, subnet: Subnet, k: usize, s: usize) -> Result<Matrix> {
    if k < s {
        return Err(Error::contract(format!("transition product needs k >= s, got k={k}, s={s}")));
    }
    let mut prod = spec.matrix(subnet, s).clone();
    for t in s + 1..=k {
        prod = spec.matrix(subnet, t).mul(&prod);
    }
    Ok(prod)
}

/// Squares `p` until its column spread drops below `tol`. Each squaring
/// doubles the number of sequence steps covered; `steps_per_factor` is the
/// count covered by `p` itself.
fn power_limit(mut p: Matrix, steps_per_factor: usize, tol: f64, cap_steps: f64) -> std::result::Result<(Matrix, f64), f64> {
    let mut covered = steps_per_factor as f64;
    loop {
        let spread = p.column_spread();
        if spread <= tol {
            return Ok((p, spread));
        }
        covered *= 2.0;
        if covered > cap_steps || covered > 2f64.powi(200) {
            return Err(spread);
        }
        p = p.mul(&p);
    }
}

fn normalized(mut v: Vec<f64>) -> Vec<f64> {
    let s: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= s);
    v
}

/// Extends `Φ(k, s)` until its column spread is at most `spread_tol` and
/// returns the row average.
///
/// Periodicity lets the extension advance a whole period at a time and then
/// double: `Φ(s + 2rp − 1, s) = (Φ(s + rp − 1, s))²`. The iteration cap is
/// `10·M·ln(1/tol)/ln(1/ρ)` sequence steps with `M`, `ρ` from the declared
/// window and η.
pub fn limiting_stochastic_vector(
    spec: &GraphSequenceSpec,
    subnet: Subnet,
    s: usize,
    spread_tol: f64,
) -> Result<LimitVector> {
    let p = spec.period();
    let period_product = transition_product(spec, subnet, s + p - 1, s)?;
    let bound = GeometricRateBound::new(spec.eta(), spec.n(subnet), spec.windows().of(subnet));
    let cap = bound.iteration_cap(spread_tol);
    match power_limit(period_product, p, spread_tol, cap) {
        Ok((prod, spread)) => Ok(LimitVector {
            phi: normalized(prod.row_average()),
            start_index: s,
            achieved_spread: spread,
        }),
        Err(spread) => Err(Error::NonConvergence(format!(
            "transition products of subnet {subnet} from s={s} stalled at column spread {spread:e} \
             (tolerance {spread_tol:e}) after {cap:.3e} steps"
        ))),
    }
}

/// Positive stochastic left eigenvector of `a` for eigenvalue one, as the
/// limit of the constant sequence `a, a, …`.
pub fn perron_vector(a: &StochasticMatrix, tol: f64) -> Result<LimitVector> {
    if !strongly_connected(&a.support()) {
        return Err(Error::domain("graph of the matrix is not strongly connected"));
    }
    let eta = a.min_positive().unwrap_or(1.0).min(0.5);
    let bound = GeometricRateBound::new(eta, a.n(), 1);
    let mut spread_tol = tol / 4.0;
    loop {
        let cap = bound.iteration_cap(spread_tol);
        let (prod, spread) = power_limit((**a).clone(), 1, spread_tol, cap).map_err(|spread| {
            Error::NonConvergence(format!("powers stalled at column spread {spread:e}"))
        })?;
        let phi = normalized(prod.row_average());
        let residual = a
            .left_apply(&phi)
            .iter()
            .zip(&phi)
            .map(|(l, p)| (l - p).abs())
            .fold(0.0, f64::max);
        if residual <= tol {
            return Ok(LimitVector {
                phi,
                start_index: 0,
                achieved_spread: spread,
            });
        }
        if spread_tol < 1e-17 {
            return Err(Error::NonConvergence(format!(
                "left-eigenvector residual {residual:e} above tolerance {tol:e}"
            )));
        }
        spread_tol /= 16.0;
    }
}
