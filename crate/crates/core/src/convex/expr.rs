use crate::error::{Error, Result};

/// Which block of decision variables a variable belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    X,
    Y,
}

/// Objective function as an expression tree over `x ∈ R^{m1}` and `y ∈ R^{m2}`.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(Side, usize),
    Neg(Box<Expr>),
    Sum(Vec<Expr>),
    Scale(f64, Box<Expr>),
    Product(Vec<Expr>),
    /// Integer power with exponent at least one.
    Pow(Box<Expr>, u32),
    Abs(Box<Expr>),
    Affine { x: Vec<f64>, y: Vec<f64>, offset: f64 },
}

impl Expr {
    pub fn c(v: f64) -> Expr {
        Expr::Const(v)
    }

    pub fn x(i: usize) -> Expr {
        Expr::Var(Side::X, i)
    }

    pub fn y(i: usize) -> Expr {
        Expr::Var(Side::Y, i)
    }

    pub fn add(terms: Vec<Expr>) -> Expr {
        Expr::Sum(terms)
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        Expr::Sum(vec![a, Expr::neg(b)])
    }

    #[allow(clippy::should_implement_trait)]
    pub fn neg(e: Expr) -> Expr {
        Expr::Neg(Box::new(e))
    }

    pub fn mul(factors: Vec<Expr>) -> Expr {
        Expr::Product(factors)
    }

    pub fn scale(c: f64, e: Expr) -> Expr {
        Expr::Scale(c, Box::new(e))
    }

    pub fn pow(e: Expr, k: u32) -> Expr {
        Expr::Pow(Box::new(e), k)
    }

    pub fn abs(e: Expr) -> Expr {
        Expr::Abs(Box::new(e))
    }

    /// Number of absolute-value nodes; they are numbered in pre-order.
    pub fn abs_count(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |e| {
            if matches!(e, Expr::Abs(_)) {
                n += 1;
            }
        });
        n
    }

    /// Minimum dimension of each side needed to evaluate the expression.
    pub fn required_dims(&self) -> (usize, usize) {
        let (mut mx, mut my) = (0, 0);
        self.visit(&mut |e| match e {
            Expr::Var(Side::X, i) => mx = mx.max(i + 1),
            Expr::Var(Side::Y, i) => my = my.max(i + 1),
            Expr::Affine { x, y, .. } => {
                mx = mx.max(x.len());
                my = my.max(y.len());
            }
            _ => {}
        });
        (mx, my)
    }

    /// Checks arities and exponents.
    pub fn check_well_formed(&self) -> Result<()> {
        let mut problem = None;
        self.visit(&mut |e| {
            let bad = match e {
                Expr::Sum(v) | Expr::Product(v) => v.is_empty().then_some("empty sum or product"),
                Expr::Pow(_, 0) => Some("exponent must be at least 1"),
                Expr::Const(c) | Expr::Scale(c, _) if !c.is_finite() => Some("non-finite constant"),
                _ => None,
            };
            if let (Some(msg), None) = (bad, &problem) {
                problem = Some(msg.to_string());
            }
        });
        problem.map_or(Ok(()), |m| Err(Error::contract(m)))
    }

    fn visit(&self, f: &mut impl FnMut(&Expr)) {
        f(self);
        match self {
            Expr::Neg(c) | Expr::Scale(_, c) | Expr::Pow(c, _) | Expr::Abs(c) => c.visit(f),
            Expr::Sum(cs) | Expr::Product(cs) => cs.iter().for_each(|c| c.visit(f)),
            Expr::Const(_) | Expr::Var(..) | Expr::Affine { .. } => {}
        }
    }

    /// Value at `(x, y)`; dimensions must cover the expression.
    pub fn evaluate(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        let (mx, my) = self.required_dims();
        if x.len() < mx || y.len() < my {
            return Err(Error::contract(format!(
                "expression needs x in R^{mx}, y in R^{my}; got {} and {}",
                x.len(),
                y.len()
            )));
        }
        Ok(self.eval(x, y))
    }

    pub(crate) fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        match self {
            Expr::Const(c) => *c,
            Expr::Var(Side::X, i) => x[*i],
            Expr::Var(Side::Y, i) => y[*i],
            Expr::Neg(c) => -c.eval(x, y),
            Expr::Sum(cs) => cs.iter().map(|c| c.eval(x, y)).sum(),
            Expr::Scale(a, c) => a * c.eval(x, y),
            Expr::Product(cs) => cs.iter().map(|c| c.eval(x, y)).product(),
            Expr::Pow(c, k) => c.eval(x, y).powi(*k as i32),
            Expr::Abs(c) => c.eval(x, y).abs(),
            Expr::Affine { x: cx, y: cy, offset } => {
                offset + dot(cx, &x[..cx.len()]) + dot(cy, &y[..cy.len()])
            }
        }
    }

    /// Accumulates `seed · ∂self/∂side` into `out`. `abs_id` tracks the
    /// pre-order number of the next absolute-value node.
    fn accumulate(&self, side: Side, x: &[f64], y: &[f64], sel: &[f64], seed: f64, abs_id: &mut usize, out: &mut [f64]) {
        match self {
            Expr::Const(_) => {}
            Expr::Var(s, i) => {
                if *s == side {
                    out[*i] += seed;
                }
            }
            Expr::Neg(c) => c.accumulate(side, x, y, sel, -seed, abs_id, out),
            Expr::Sum(cs) => {
                for c in cs {
                    c.accumulate(side, x, y, sel, seed, abs_id, out);
                }
            }
            Expr::Scale(a, c) => c.accumulate(side, x, y, sel, a * seed, abs_id, out),
            Expr::Product(cs) => {
                let vals: Vec<f64> = cs.iter().map(|c| c.eval(x, y)).collect();
                for (i, c) in cs.iter().enumerate() {
                    let others: f64 = vals
                        .iter()
                        .enumerate()
                        .filter(|&(j, _)| j != i)
                        .map(|(_, v)| v)
                        .product();
                    c.accumulate(side, x, y, sel, seed * others, abs_id, out);
                }
            }
            Expr::Pow(c, k) => {
                let d = if *k == 1 {
                    1.0
                } else {
                    *k as f64 * c.eval(x, y).powi(*k as i32 - 1)
                };
                c.accumulate(side, x, y, sel, seed * d, abs_id, out);
            }
            Expr::Abs(c) => {
                let id = *abs_id;
                *abs_id += 1;
                let v = c.eval(x, y);
                let slope = if v > 0.0 {
                    1.0
                } else if v < 0.0 {
                    -1.0
                } else {
                    sel.get(id).copied().unwrap_or(0.0)
                };
                c.accumulate(side, x, y, sel, seed * slope, abs_id, out);
            }
            Expr::Affine { x: cx, y: cy, .. } => {
                let coeffs = match side {
                    Side::X => cx,
                    Side::Y => cy,
                };
                for (o, a) in out.iter_mut().zip(coeffs) {
                    *o += seed * a;
                }
            }
        }
    }

    /// Formal derivative with respect to one block, kinks resolved by `sel`.
    pub fn gradient(&self, side: Side, x: &[f64], y: &[f64], sel: &SubgradientSelection) -> Vec<f64> {
        let dim = match side {
            Side::X => x.len(),
            Side::Y => y.len(),
        };
        let mut out = vec![0.0; dim];
        let mut abs_id = 0;
        self.accumulate(side, x, y, &sel.0, 1.0, &mut abs_id, &mut out);
        out
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| p * q).sum()
}

/// Slope used by each absolute-value node (pre-order numbering) when its
/// argument is exactly zero. Missing entries default to 0.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SubgradientSelection(Vec<f64>);

impl SubgradientSelection {
    pub fn new(slopes: Vec<f64>) -> Result<Self> {
        if let Some(s) = slopes.iter().find(|s| !(-1.0..=1.0).contains(*s)) {
            return Err(Error::domain(format!("kink selection {s} outside [-1, 1]")));
        }
        Ok(SubgradientSelection(slopes))
    }

    /// All-zero selection sized for `e`.
    pub fn zeros_for(e: &Expr) -> Self {
        SubgradientSelection(vec![0.0; e.abs_count()])
    }

    /// Pads with zeros to one entry per absolute-value node of `e`.
    pub fn fitted_to(mut self, e: &Expr) -> Result<Self> {
        let n = e.abs_count();
        if self.0.len() > n {
            return Err(Error::contract(format!(
                "{} kink selections given for an expression with {n} absolute-value nodes",
                self.0.len()
            )));
        }
        self.0.resize(n, 0.0);
        Ok(self)
    }

    pub fn slopes(&self) -> &[f64] {
        &self.0
    }
}

/// Element of `∂_x e(x, y)` for `e` convex in `x`.
pub fn subgradient_x(e: &Expr, x: &[f64], y: &[f64], sel: &SubgradientSelection) -> Vec<f64> {
    e.gradient(Side::X, x, y, sel)
}

/// Element of the concave subdifferential `∂_y e(x, y)` for `e` concave in `y`.
pub fn subgradient_y(e: &Expr, x: &[f64], y: &[f64], sel: &SubgradientSelection) -> Vec<f64> {
    e.gradient(Side::Y, x, y, sel)
}
