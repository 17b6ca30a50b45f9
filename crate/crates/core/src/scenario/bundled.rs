use crate::error::{Error, Result};

use super::file::{parse_scenario, LoadedScenario};

/// Scenario files shipped with the crate, by name.
pub const BUNDLED: &[(&str, &str)] = &[
    ("example1", include_str!("../../scenarios/example1.toml")),
    ("example2", include_str!("../../scenarios/example2.toml")),
    ("example3", include_str!("../../scenarios/example3.toml")),
    ("unbalanced_homogeneous", include_str!("../../scenarios/unbalanced_homogeneous.toml")),
    ("common_saddle", include_str!("../../scenarios/common_saddle.toml")),
];

pub fn bundled_source(name: &str) -> Option<&'static str> {
    BUNDLED.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}

pub fn bundled(name: &str) -> Result<LoadedScenario> {
    let src = bundled_source(name).ok_or_else(|| Error::Domain(format!("no bundled scenario named '{name}'")))?;
    parse_scenario(src)
}

/// The scenario reproduced by `reproduce <id>`.
pub fn example(id: u8) -> Result<LoadedScenario> {
    match id {
        1..=3 => bundled(&format!("example{id}")),
        _ => Err(Error::Domain(format!("example id {id} not in 1..=3"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::digraph::{is_weight_balanced, StochasticMatrix, Subnet};
    use crate::stepsize::StepsizeRule;

    #[test]
    fn all_bundled_load() {
        for (name, _) in BUNDLED {
            let l = bundled(name).unwrap();
            assert_eq!(&l.scenario.name, name);
        }
        assert!(example(4).is_err());
    }

    #[test]
    fn example1_matches_listing() {
        let sc = example(1).unwrap().scenario;
        assert_eq!(sc.x0, vec![vec![2.0], vec![-0.5], vec![-1.5]]);
        assert_eq!(sc.y0, vec![vec![1.0], vec![0.5]]);
        assert_eq!(sc.rule.schedule().at(0), 1.0 / 50.0);
        assert_eq!(sc.rule.schedule().at(10), 1.0 / 60.0);
        assert_eq!(sc.graph.matrix(Subnet::First, 0).row(0), &[0.6, 0.4, 0.0]);
        assert_eq!(sc.graph.matrix(Subnet::First, 1).row(1), &[0.0, 0.7, 0.3]);
        for k in 0..2 {
            assert!(is_weight_balanced(&StochasticMatrix::new(sc.graph.matrix(Subnet::First, k).clone()).unwrap(), 1e-12));
            assert!(is_weight_balanced(&StochasticMatrix::new(sc.graph.matrix(Subnet::Second, k).clone()).unwrap(), 1e-12));
        }
    }

    #[test]
    fn example2_vectors_from_graph() {
        let sc = example(2).unwrap().scenario;
        let StepsizeRule::OracleHeterogeneous { first, second, .. } = &sc.rule else {
            panic!("example2 rule")
        };
        for (phase, want) in [(0, [0.5336, 0.3408, 0.1256]), (1, [0.5336, 0.1525, 0.3139])] {
            for (g, w) in first[phase].iter().zip(want) {
                assert!((g - w).abs() < 5e-5, "{phase}: {:?}", first[phase]);
            }
        }
        assert!((second[0][0] - 8.0 / 9.0).abs() < 1e-12);
    }
}
