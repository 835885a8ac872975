pub mod generate;
pub mod parse;

pub use generate::{
    AlphaStrategy, Candidate, FeatParams, FeatureGenerator, GenWeights, Operation,
    PopulationContext,
};

use crate::error::Result;
use crate::transforms::TransformRegistry;

/// A nonlinear feature over the original covariates. Features form a closed
/// algebra: products, unary transforms and affine projections of existing
/// features are features again.
#[derive(Debug, Clone, PartialEq)]
pub enum Feature {
    /// Original covariate, by column index.
    Leaf { index: usize },
    /// Elementwise product of two features.
    Interaction { left: Box<Feature>, right: Box<Feature> },
    /// Transform of one feature: t(child).
    Modification { name: String, child: Box<Feature> },
    /// Transform of an affine combination: t(a0 + Σ wᵢ·childᵢ). The weights
    /// are frozen when the feature is created.
    Projection {
        name: String,
        alpha0: f64,
        weights: Vec<f64>,
        children: Vec<Feature>,
    },
}

/// The three structural size measures used to cap feature growth and to
/// penalize model complexity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Complexity {
    /// Operation count: how many algebra operations built the feature.
    pub oc: usize,
    /// Number of leaf occurrences.
    pub width: usize,
    /// Nesting depth; a projection counts as a single layer.
    pub depth: usize,
}

impl Feature {
    pub fn leaf(index: usize) -> Self {
        Feature::Leaf { index }
    }

    pub fn complexity(&self) -> Complexity {
        match self {
            Feature::Leaf { .. } => Complexity { oc: 0, width: 1, depth: 0 },
            Feature::Interaction { left, right } => {
                let l = left.complexity();
                let r = right.complexity();
                Complexity {
                    oc: l.oc + r.oc + 1,
                    width: l.width + r.width,
                    depth: l.depth.max(r.depth) + 1,
                }
            }
            Feature::Modification { child, .. } => {
                let c = child.complexity();
                Complexity { oc: c.oc + 1, width: c.width, depth: c.depth + 1 }
            }
            Feature::Projection { children, .. } => {
                let mut oc = children.len() + 1;
                let mut width = 0;
                let mut depth = 0;
                for c in children {
                    let cc = c.complexity();
                    oc += cc.oc;
                    width += cc.width;
                    depth = depth.max(cc.depth);
                }
                Complexity { oc, width, depth: depth + 1 }
            }
        }
    }

    /// Canonical string form. Interaction operands are ordered
    /// lexicographically and projection terms are sorted by child string, so
    /// structurally equal features always render identically; numbers use
    /// shortest round-trip decimals.
    pub fn render(&self, labels: &[String]) -> String {
        match self {
            Feature::Leaf { index } => labels[*index].clone(),
            Feature::Interaction { left, right } => {
                let a = left.render(labels);
                let b = right.render(labels);
                if a <= b {
                    format!("({a}*{b})")
                } else {
                    format!("({b}*{a})")
                }
            }
            Feature::Modification { name, child } => {
                format!("{name}({})", child.render(labels))
            }
            Feature::Projection { name, alpha0, weights, children } => {
                let mut terms: Vec<(String, f64)> = children
                    .iter()
                    .zip(weights)
                    .map(|(c, w)| (c.render(labels), *w))
                    .collect();
                terms.sort_by(|a, b| a.0.cmp(&b.0));
                let mut s = format!("{name}({alpha0}");
                for (c, w) in &terms {
                    s.push('+');
                    s.push_str(&format!("{w}*{c}"));
                }
                s.push(')');
                s
            }
        }
    }

    /// Evaluate over column-major data (one Vec per original covariate).
    pub fn evaluate(&self, cols: &[Vec<f64>], reg: &TransformRegistry) -> Result<Vec<f64>> {
        match self {
            Feature::Leaf { index } => Ok(cols[*index].clone()),
            Feature::Interaction { left, right } => {
                let mut l = left.evaluate(cols, reg)?;
                let r = right.evaluate(cols, reg)?;
                for (a, b) in l.iter_mut().zip(&r) {
                    *a *= b;
                }
                Ok(l)
            }
            Feature::Modification { name, child } => {
                let f = reg.get(name)?;
                let mut v = child.evaluate(cols, reg)?;
                for a in v.iter_mut() {
                    *a = f(*a);
                }
                Ok(v)
            }
            Feature::Projection { name, alpha0, weights, children } => {
                let f = reg.get(name)?;
                let n = cols.first().map_or(0, Vec::len);
                let mut acc = vec![*alpha0; n];
                for (c, w) in children.iter().zip(weights) {
                    let v = c.evaluate(cols, reg)?;
                    for (a, b) in acc.iter_mut().zip(&v) {
                        *a += w * b;
                    }
                }
                for a in acc.iter_mut() {
                    *a = f(*a);
                }
                Ok(acc)
            }
        }
    }

    /// Leaf indices referenced by this feature (with repetition).
    pub fn leaves(&self) -> Vec<usize> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves(&self, out: &mut Vec<usize>) {
        match self {
            Feature::Leaf { index } => out.push(*index),
            Feature::Interaction { left, right } => {
                left.collect_leaves(out);
                right.collect_leaves(out);
            }
            Feature::Modification { child, .. } => child.collect_leaves(out),
            Feature::Projection { children, .. } => {
                for c in children {
                    c.collect_leaves(out);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(n: usize) -> Vec<String> {
        (1..=n).map(|i| format!("x{i}")).collect()
    }

    #[test]
    fn complexity_of_nested_features() {
        // x1
        let leaf = Feature::leaf(0);
        assert_eq!(leaf.complexity(), Complexity { oc: 0, width: 1, depth: 0 });

        // (x1*x2)
        let inter = Feature::Interaction {
            left: Box::new(Feature::leaf(0)),
            right: Box::new(Feature::leaf(1)),
        };
        assert_eq!(inter.complexity(), Complexity { oc: 1, width: 2, depth: 1 });

        // sigmoid((x1*x2))
        let m = Feature::Modification { name: "sigmoid".into(), child: Box::new(inter.clone()) };
        assert_eq!(m.complexity(), Complexity { oc: 2, width: 2, depth: 2 });

        // relu(1+2*(x1*x2)+3*x3): oc = children oc (1+0) + 2 children + 1 = 4
        let p = Feature::Projection {
            name: "relu".into(),
            alpha0: 1.0,
            weights: vec![2.0, 3.0],
            children: vec![inter, Feature::leaf(2)],
        };
        assert_eq!(p.complexity(), Complexity { oc: 4, width: 3, depth: 2 });
    }

    #[test]
    fn render_orders_interaction_operands() {
        let ab = Feature::Interaction {
            left: Box::new(Feature::leaf(1)),
            right: Box::new(Feature::leaf(0)),
        };
        assert_eq!(ab.render(&labels(2)), "(x1*x2)");
        let ba = Feature::Interaction {
            left: Box::new(Feature::leaf(0)),
            right: Box::new(Feature::leaf(1)),
        };
        assert_eq!(ab.render(&labels(2)), ba.render(&labels(2)));
    }

    #[test]
    fn render_projection_sorts_terms_and_uses_shortest_decimals() {
        let p = Feature::Projection {
            name: "sigmoid".into(),
            alpha0: 1.0,
            weights: vec![0.5, -1.25],
            children: vec![Feature::leaf(2), Feature::leaf(0)],
        };
        assert_eq!(p.render(&labels(3)), "sigmoid(1+-1.25*x1+0.5*x3)");
    }

    #[test]
    fn evaluate_matches_hand_computation() {
        let reg = TransformRegistry::builtin();
        let cols = vec![vec![1.0, -2.0, 0.5], vec![3.0, 4.0, -1.0]];
        let inter = Feature::Interaction {
            left: Box::new(Feature::leaf(0)),
            right: Box::new(Feature::leaf(1)),
        };
        assert_eq!(inter.evaluate(&cols, &reg).unwrap(), vec![3.0, -8.0, -0.5]);

        let m = Feature::Modification { name: "relu".into(), child: Box::new(inter) };
        assert_eq!(m.evaluate(&cols, &reg).unwrap(), vec![3.0, 0.0, 0.0]);

        let p = Feature::Projection {
            name: "p2".into(),
            alpha0: 1.0,
            weights: vec![2.0],
            children: vec![Feature::leaf(1)],
        };
        // (1 + 2*x2)² elementwise
        assert_eq!(p.evaluate(&cols, &reg).unwrap(), vec![49.0, 81.0, 1.0]);
    }

    #[test]
    fn unknown_transform_surfaces_from_evaluate() {
        let reg = TransformRegistry::builtin().subset(&["relu".into()]).unwrap();
        let m = Feature::Modification { name: "gauss".into(), child: Box::new(Feature::leaf(0)) };
        assert!(m.evaluate(&[vec![1.0]], &reg).is_err());
    }

    #[test]
    fn leaves_lists_occurrences() {
        let f = Feature::Interaction {
            left: Box::new(Feature::leaf(0)),
            right: Box::new(Feature::Modification {
                name: "p2".into(),
                child: Box::new(Feature::leaf(0)),
            }),
        };
        assert_eq!(f.leaves(), vec![0, 0]);
    }
}
