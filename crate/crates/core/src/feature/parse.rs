use std::collections::HashMap;

use super::Feature;
use crate::error::{Error, Result};
use crate::transforms::TransformRegistry;

/// Parse the canonical string form back into a [`Feature`].
///
/// Grammar:
/// ```text
/// feature := label
///          | "(" feature "*" feature ")"
///          | name "(" feature ")"
///          | name "(" num ("+" num "*" feature)+ ")"
/// ```
/// `label` must be one of `labels`; `name` must be a registered transform.
pub fn parse_feature(
    input: &str,
    labels: &[String],
    registry: &TransformRegistry,
) -> Result<Feature> {
    let label_map: HashMap<&str, usize> = labels
        .iter()
        .enumerate()
        .map(|(i, s)| (s.as_str(), i))
        .collect();
    let mut p = Parser { input: input.as_bytes(), pos: 0, labels: &label_map, registry };
    let feature = p.feature()?;
    p.skip_ws();
    if p.pos != p.input.len() {
        return Err(p.err("trailing input after feature"));
    }
    Ok(feature)
}

struct Parser<'a> {
    input: &'a [u8],
    pos: usize,
    labels: &'a HashMap<&'a str, usize>,
    registry: &'a TransformRegistry,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> Error {
        Error::Parse { pos: self.pos, msg: msg.to_string() }
    }

    fn peek(&self) -> Option<u8> {
        self.input.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(b' ' | b'\t')) {
            self.pos += 1;
        }
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(&format!("expected `{}`", c as char)))
        }
    }

    fn feature(&mut self) -> Result<Feature> {
        self.skip_ws();
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let left = self.feature()?;
                self.expect(b'*')?;
                let right = self.feature()?;
                self.expect(b')')?;
                Ok(Feature::Interaction { left: Box::new(left), right: Box::new(right) })
            }
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => self.ident_feature(),
            _ => Err(self.err("expected feature")),
        }
    }

    fn ident_feature(&mut self) -> Result<Feature> {
        let ident = self.ident()?;
        self.skip_ws();
        if self.peek() != Some(b'(') {
            return match self.labels.get(ident.as_str()) {
                Some(&index) => Ok(Feature::Leaf { index }),
                None => Err(Error::MissingCovariate(ident)),
            };
        }
        // transform application: check the name, then decide projection vs
        // modification by whether a number follows the parenthesis
        self.registry.get(&ident)?;
        self.pos += 1;
        self.skip_ws();
        let feature = match self.peek() {
            Some(c) if c.is_ascii_digit() || c == b'-' || c == b'.' => {
                let alpha0 = self.number()?;
                let mut weights = Vec::new();
                let mut children = Vec::new();
                loop {
                    self.expect(b'+')?;
                    weights.push(self.number()?);
                    self.expect(b'*')?;
                    children.push(self.feature()?);
                    self.skip_ws();
                    if self.peek() == Some(b')') {
                        break;
                    }
                }
                Feature::Projection { name: ident, alpha0, weights, children }
            }
            _ => {
                let child = self.feature()?;
                Feature::Modification { name: ident, child: Box::new(child) }
            }
        };
        self.expect(b')')?;
        Ok(feature)
    }

    fn ident(&mut self) -> Result<String> {
        self.skip_ws();
        let start = self.pos;
        match self.peek() {
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => self.pos += 1,
            _ => return Err(self.err("expected identifier")),
        }
        while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == b'_') {
            self.pos += 1;
        }
        Ok(std::str::from_utf8(&self.input[start..self.pos])
            .expect("ascii range")
            .to_string())
    }

    /// Plain decimal literal: `-?digits(.digits)?`. Canonical rendering never
    /// emits scientific notation, so the grammar does not accept it (an `e`
    /// would be ambiguous with the `+` separating projection terms).
    fn number(&mut self) -> Result<f64> {
        self.skip_ws();
        let start = self.pos;
        if self.peek() == Some(b'-') {
            self.pos += 1;
        }
        let int_start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.peek() == Some(b'.') {
            self.pos += 1;
            while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                self.pos += 1;
            }
        }
        if self.pos == int_start {
            return Err(self.err("expected number"));
        }
        std::str::from_utf8(&self.input[start..self.pos])
            .expect("ascii range")
            .parse()
            .map_err(|_| self.err("malformed number"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn labels() -> Vec<String> {
        (1..=5).map(|i| format!("x{i}")).collect()
    }

    fn parse(s: &str) -> Result<Feature> {
        parse_feature(s, &labels(), &TransformRegistry::builtin())
    }

    #[test]
    fn parses_each_production() {
        assert_eq!(parse("x3").unwrap(), Feature::Leaf { index: 2 });
        assert_eq!(
            parse("(x1*x2)").unwrap(),
            Feature::Interaction {
                left: Box::new(Feature::leaf(0)),
                right: Box::new(Feature::leaf(1)),
            }
        );
        assert_eq!(
            parse("sigmoid(x4)").unwrap(),
            Feature::Modification { name: "sigmoid".into(), child: Box::new(Feature::leaf(3)) }
        );
        assert_eq!(
            parse("relu(1+-1.25*x1+0.5*x3)").unwrap(),
            Feature::Projection {
                name: "relu".into(),
                alpha0: 1.0,
                weights: vec![-1.25, 0.5],
                children: vec![Feature::leaf(0), Feature::leaf(2)],
            }
        );
    }

    #[test]
    fn parses_nested_forms() {
        let s = "gauss((p2(x1)*sigmoid(0.5+-1*(x3*x4)+2*x2)))";
        let f = parse(s).unwrap();
        assert_eq!(f.render(&labels()), s);
    }

    #[test]
    fn rejects_malformed_input() {
        for bad in [
            "", "()", "(x1)", "(x1*x2", "x1*x2", "sigmoid()", "sigmoid(1)",
            "sigmoid(1+x1)", "sigmoid(1+2*)", "x1 x2", "p2(x1))",
        ] {
            assert!(parse(bad).is_err(), "should reject {bad:?}");
        }
    }

    #[test]
    fn unknown_label_and_transform_errors() {
        assert!(matches!(
            parse("zz").unwrap_err(),
            Error::MissingCovariate(name) if name == "zz"
        ));
        assert!(matches!(
            parse("frob(x1)").unwrap_err(),
            Error::UnknownTransform(name) if name == "frob"
        ));
    }

    fn feature_strategy() -> impl Strategy<Value = Feature> {
        let leaf = (0usize..5).prop_map(|index| Feature::Leaf { index });
        leaf.prop_recursive(4, 32, 4, |inner| {
            let names = prop::sample::select(vec!["sigmoid", "relu", "gauss", "p2", "erf"]);
            // weights from a small grid so Display strings stay short
            let w = prop::sample::select(vec![1.0, -1.0, 0.5, -2.25, 3.0]);
            prop_oneof![
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Feature::Interaction {
                    left: Box::new(a),
                    right: Box::new(b),
                }),
                (names.clone(), inner.clone()).prop_map(|(n, c)| Feature::Modification {
                    name: n.to_string(),
                    child: Box::new(c),
                }),
                (names, w.clone(), prop::collection::vec((w, inner), 1..4)).prop_map(
                    |(n, a0, terms)| {
                        let (weights, children) = terms.into_iter().unzip();
                        Feature::Projection {
                            name: n.to_string(),
                            alpha0: a0,
                            weights,
                            children,
                        }
                    }
                ),
            ]
        })
    }

    proptest! {
        /// Canonical strings are a fixed point: parse ∘ render ∘ parse ∘ render
        /// is the identity on strings.
        #[test]
        fn render_parse_round_trip(f in feature_strategy()) {
            let reg = TransformRegistry::builtin();
            let s = f.render(&labels());
            let parsed = parse_feature(&s, &labels(), &reg).unwrap();
            prop_assert_eq!(parsed.render(&labels()), s.clone());
            // complexity is preserved through the round trip
            prop_assert_eq!(parsed.complexity().width, f.complexity().width);
            prop_assert_eq!(parsed.complexity().depth, f.complexity().depth);
            prop_assert_eq!(parsed.complexity().oc, f.complexity().oc);
        }
    }
}
