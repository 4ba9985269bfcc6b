use std::fmt;

use crate::discrete::tree::DiscreteTree;
use crate::error::{Error, Result};

/// Isomorphism-invariant encoding of a rooted unordered tree.
///
/// A vertex is written as `(` followed by the codes of its children in
/// increasing byte order, then `)`. The byte string doubles as the text
/// serialization, and byte order is the total order used for histograms.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CanonicalCode(Vec<u8>);

impl CanonicalCode {
    pub fn of(tree: &DiscreteTree) -> Self {
        let mut codes: Vec<Vec<u8>> = vec![Vec::new(); tree.len()];
        for &v in tree.top_down().iter().rev() {
            let mut kids: Vec<Vec<u8>> = tree
                .children(v)
                .iter()
                .map(|&c| std::mem::take(&mut codes[c]))
                .collect();
            kids.sort_unstable();
            let mut code = Vec::with_capacity(2 + kids.iter().map(Vec::len).sum::<usize>());
            code.push(b'(');
            for k in kids {
                code.extend_from_slice(&k);
            }
            code.push(b')');
            codes[v] = code;
        }
        CanonicalCode(std::mem::take(&mut codes[tree.root()]))
    }

    /// Parses a parenthesis string; child order in the input is irrelevant.
    pub fn parse(text: &str) -> Result<DiscreteTree> {
        let bytes = text.trim().as_bytes();
        if bytes.first() != Some(&b'(') {
            return Err(Error::Parse("tree code must start with '('".into()));
        }
        let mut parent: Vec<Option<usize>> = Vec::new();
        let mut stack: Vec<usize> = Vec::new();
        for (i, &b) in bytes.iter().enumerate() {
            match b {
                b'(' => {
                    if stack.is_empty() && !parent.is_empty() {
                        return Err(Error::Parse(format!("trailing input at byte {i}")));
                    }
                    parent.push(stack.last().copied());
                    stack.push(parent.len() - 1);
                }
                b')' => {
                    if stack.pop().is_none() {
                        return Err(Error::Parse(format!("unbalanced ')' at byte {i}")));
                    }
                }
                other => {
                    return Err(Error::Parse(format!(
                        "unexpected byte {:?} at {i}",
                        other as char
                    )))
                }
            }
        }
        if !stack.is_empty() {
            return Err(Error::Parse("unbalanced '('".into()));
        }
        DiscreteTree::from_parents(parent)
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn as_str(&self) -> &str {
        std::str::from_utf8(&self.0).expect("codes are ASCII")
    }

    /// Number of vertices of the encoded tree.
    pub fn vertex_count(&self) -> usize {
        self.0.len() / 2
    }
}

impl fmt::Display for CanonicalCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Debug for CanonicalCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CanonicalCode({})", self.as_str())
    }
}

impl std::str::FromStr for CanonicalCode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(CanonicalCode::parse(s)?.code())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::seq::SliceRandom;
    use rand::SeedableRng;

    #[test]
    fn small_codes() {
        assert_eq!(DiscreteTree::single().code().as_str(), "()");
        assert_eq!(DiscreteTree::path(2).code().as_str(), "((()))");
        assert_eq!(DiscreteTree::star(2).code().as_str(), "(()())");
    }

    #[test]
    fn insertion_order_is_irrelevant() {
        // root -> {leaf, v -> leaf} in both child orders
        let a = DiscreteTree::from_parents(vec![None, Some(0), Some(0), Some(2)]).unwrap();
        let b = DiscreteTree::from_parents(vec![None, Some(0), Some(1), Some(0)]).unwrap();
        assert_eq!(a.code(), b.code());
        assert_eq!(a.code().as_str(), "((())())");
    }

    #[test]
    fn parser_normalizes() {
        assert_eq!(CanonicalCode::parse("(()(()))").unwrap().code().as_str(), "((())())");
        assert!(CanonicalCode::parse("(()").is_err());
        assert!(CanonicalCode::parse("())").is_err());
        assert!(CanonicalCode::parse("()()").is_err());
        assert!(CanonicalCode::parse("(x)").is_err());
        assert!(CanonicalCode::parse("").is_err());
    }

    #[test]
    fn distinguishes_non_isomorphic() {
        let path = DiscreteTree::path(3).code();
        let star = DiscreteTree::star(3).code();
        let mut broom = DiscreteTree::path(1);
        broom.push_child(1);
        broom.push_child(1);
        assert_ne!(path, star);
        assert_ne!(path, broom.code());
        assert_ne!(star, broom.code());
    }

    fn random_parents() -> impl Strategy<Value = Vec<Option<usize>>> {
        (1usize..40).prop_flat_map(|n| {
            proptest::collection::vec(any::<proptest::sample::Index>(), n - 1).prop_map(|picks| {
                let mut parent = vec![None];
                for (i, pick) in picks.iter().enumerate() {
                    parent.push(Some(pick.index(i + 1)));
                }
                parent
            })
        })
    }

    proptest! {
        #[test]
        fn code_survives_relabeling(parent in random_parents(), seed in any::<u64>()) {
            let tree = DiscreteTree::from_parents(parent.clone()).unwrap();
            let n = parent.len();
            let mut perm: Vec<usize> = (0..n).collect();
            perm.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let mut relabeled = vec![None; n];
            for (v, p) in parent.iter().enumerate() {
                relabeled[perm[v]] = p.map(|u| perm[u]);
            }
            let other = DiscreteTree::from_parents(relabeled).unwrap();
            prop_assert_eq!(tree.code(), other.code());
        }

        #[test]
        fn parse_round_trip(parent in random_parents()) {
            let tree = DiscreteTree::from_parents(parent).unwrap();
            let code = tree.code();
            let back = CanonicalCode::parse(code.as_str()).unwrap();
            prop_assert_eq!(back.len(), tree.len());
            prop_assert_eq!(back.code(), code.clone());
            prop_assert_eq!(code.vertex_count(), tree.len());
        }
    }
}
