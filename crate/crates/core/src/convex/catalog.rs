use super::expr::{Expr, SubgradientSelection};
use super::prefix::parse_expr;

/// A named objective with its kink selections.
#[derive(Clone, Debug, PartialEq)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub expr: Expr,
    pub selection: SubgradientSelection,
}

// (20 − x²)(y − 1)²
const COUPLING: &str = "(mul (sub 20 (pow x0 2)) (pow (sub y0 1) 2))";

/// The two-subnetwork benchmark on `[−5, 5]²`: three first-subnet objectives
/// and two second-subnet objectives with equal sums.
#[derive(Clone, Debug)]
pub struct ObjectiveCatalog {
    entries: Vec<CatalogEntry>,
}

impl Default for ObjectiveCatalog {
    fn default() -> Self {
        Self::new()
    }
}

impl ObjectiveCatalog {
    pub fn new() -> Self {
        let defs: [(&'static str, String, Vec<f64>); 5] = [
            ("f1", format!("(sub (pow x0 2) {COUPLING})"), vec![]),
            // |x−1| takes slope +1 at x = 1
            ("f2", "(sub (abs (sub x0 1)) (abs y0))".into(), vec![1.0]),
            ("f3", "(sub (pow (sub x0 1) 4) (scale 2 (pow y0 2)))".into(), vec![]),
            // |y| takes slope +1 at y = 0, so the y-subgradient there is −1 + (20 − x²)
            (
                "g1",
                format!("(add (pow (sub x0 1) 4) (neg (abs y0)) (scale -1.25 (pow y0 2)) (scale -0.5 {COUPLING}))"),
                vec![1.0],
            ),
            (
                "g2",
                format!("(add (pow x0 2) (abs (sub x0 1)) (scale -0.75 (pow y0 2)) (scale -0.5 {COUPLING}))"),
                vec![],
            ),
        ];
        let entries = defs
            .into_iter()
            .map(|(name, src, sel)| {
                let expr = parse_expr(&src).expect("catalog expression parses");
                let selection = SubgradientSelection::new(sel)
                    .and_then(|s| s.fitted_to(&expr))
                    .expect("catalog selection fits");
                CatalogEntry { name, expr, selection }
            })
            .collect();
        ObjectiveCatalog { entries }
    }

    pub fn get(&self, name: &str) -> Option<&CatalogEntry> {
        self.entries.iter().find(|e| e.name == name)
    }

    pub fn entries(&self) -> &[CatalogEntry] {
        &self.entries
    }

    /// f1, f2, f3.
    pub fn first(&self) -> Vec<CatalogEntry> {
        self.entries.iter().filter(|e| e.name.starts_with('f')).cloned().collect()
    }

    /// g1, g2.
    pub fn second(&self) -> Vec<CatalogEntry> {
        self.entries.iter().filter(|e| e.name.starts_with('g')).cloned().collect()
    }

    /// The common objective `U = f1 + f2 + f3`.
    pub fn total(&self) -> Expr {
        Expr::add(self.first().into_iter().map(|e| e.expr).collect())
    }
}
