use crate::error::{Error, Result};

/// Axis-aligned box `{z : lower ≤ z ≤ upper}`.
#[derive(Clone, Debug, PartialEq)]
pub struct BoxSet {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl BoxSet {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() || lower.is_empty() {
            return Err(Error::contract(format!(
                "box bounds have dimensions {} and {}",
                lower.len(),
                upper.len()
            )));
        }
        for (d, (lo, hi)) in lower.iter().zip(&upper).enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(Error::domain(format!("dimension {d}: [{lo}, {hi}] is not an interval")));
            }
        }
        Ok(BoxSet { lower, upper })
    }

    /// `[lo, hi]^dim`.
    pub fn cube(dim: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![lo; dim], vec![hi; dim])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn center(&self) -> Vec<f64> {
        self.lower.iter().zip(&self.upper).map(|(l, u)| 0.5 * (l + u)).collect()
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        p.len() == self.dim() && p.iter().zip(self.lower.iter().zip(&self.upper)).all(|(v, (l, u))| l <= v && v <= u)
    }

    /// Evenly spaced points per dimension (endpoints included), in
    /// lexicographic order of the grid index.
    pub fn grid(&self, per_dim: usize) -> Vec<Vec<f64>> {
        let axes: Vec<Vec<f64>> = (0..self.dim())
            .map(|d| linspace(self.lower[d], self.upper[d], per_dim))
            .collect();
        let mut points = vec![Vec::with_capacity(self.dim())];
        for axis in &axes {
            points = points
                .into_iter()
                .flat_map(|p| {
                    axis.iter().map(move |&v| {
                        let mut q = p.clone();
                        q.push(v);
                        q
                    })
                })
                .collect();
        }
        points
    }

    /// Intersection with the cube of half-width `radius` around `center`.
    pub fn window(&self, center: &[f64], radius: f64) -> BoxSet {
        let lower = self.lower.iter().zip(center).map(|(l, c)| (c - radius).max(*l)).collect();
        let upper = self.upper.iter().zip(center).map(|(u, c)| (c + radius).min(*u)).collect();
        BoxSet { lower, upper }
    }
}

pub(crate) fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![0.5 * (lo + hi)],
        _ => (0..n)
            .map(|i| {
                if i == n - 1 {
                    hi
                } else {
                    lo + (hi - lo) * i as f64 / (n - 1) as f64
                }
            })
            .collect(),
    }
}

/// Euclidean projection onto the box: a componentwise clamp.
pub fn project(p: &[f64], bx: &BoxSet) -> Vec<f64> {
    assert_eq!(p.len(), bx.dim(), "point and box dimensions differ");
    p.iter()
        .zip(bx.lower.iter().zip(&bx.upper))
        .map(|(v, (l, u))| v.clamp(*l, *u))
        .collect()
}

pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt()
}

pub fn norm(a: &[f64]) -> f64 {
    a.iter().map(|v| v * v).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clamp_examples() {
        let b1 = BoxSet::cube(1, -5.0, 5.0).unwrap();
        assert_eq!(project(&[7.0], &b1), vec![5.0]);
        assert_eq!(project(&[0.3], &b1), vec![0.3]);
        let b2 = BoxSet::cube(2, -5.0, 5.0).unwrap();
        assert_eq!(project(&[6.0, -7.0], &b2), vec![5.0, -5.0]);
    }

    #[test]
    fn invalid_boxes() {
        assert!(BoxSet::new(vec![1.0], vec![0.0]).is_err());
        assert!(BoxSet::new(vec![0.0], vec![1.0, 2.0]).is_err());
    }

    #[test]
    fn grid_is_lexicographic() {
        let b = BoxSet::new(vec![0.0, 10.0], vec![1.0, 11.0]).unwrap();
        let g = b.grid(2);
        assert_eq!(g, vec![vec![0.0, 10.0], vec![0.0, 11.0], vec![1.0, 10.0], vec![1.0, 11.0]]);
    }
}
