//! Joint state and action spaces over an ordered list of layers.
//!
//! Everything is indexed by flat mixed-radix integers with layer 1 as the
//! most significant digit, so a table over the state prefix `s_{1..l}` is a
//! contiguous leading slice of the full-state layout. The canonical joint
//! action order is `(a_1, b_1, a_2, b_2, ..., a_L, b_L)` with `b_L` varying
//! fastest; "lowest action index" tie-breaking means lexicographic order on
//! that digit tuple.

use crate::error::{MdpError, Result};

/// Per-layer finite state sets of a joint state space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateSpace {
    sizes: Vec<usize>,
}

impl StateSpace {
    pub fn new(sizes: Vec<usize>) -> Result<Self> {
        if sizes.is_empty() || sizes.iter().any(|&n| n == 0) {
            return Err(MdpError::InvalidIndex(
                "state space needs at least one layer and non-empty layer state sets".into(),
            ));
        }
        Ok(Self { sizes })
    }

    pub fn layers(&self) -> usize {
        self.sizes.len()
    }

    pub fn layer_size(&self, layer: usize) -> usize {
        self.sizes[layer]
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    /// Number of joint states.
    pub fn total(&self) -> usize {
        self.sizes.iter().product()
    }

    /// Number of states of the prefix `s_{1..len}`; `prefix_total(0) == 1`.
    pub fn prefix_total(&self, len: usize) -> usize {
        self.sizes[..len].iter().product()
    }

    pub fn index(&self, coords: &[usize]) -> usize {
        debug_assert_eq!(coords.len(), self.sizes.len());
        coords
            .iter()
            .zip(&self.sizes)
            .fold(0, |acc, (&c, &n)| acc * n + c)
    }

    pub fn coords(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.sizes.len()];
        for (c, &n) in out.iter_mut().zip(&self.sizes).rev() {
            *c = index % n;
            index /= n;
        }
        out
    }

    /// Flat index of the leading prefix of a full-state index.
    pub fn prefix_of(&self, state: usize, len: usize) -> usize {
        state / self.suffix_total(len)
    }

    /// Product of layer sizes above `len` (the stride of a length-`len` prefix).
    pub fn suffix_total(&self, len: usize) -> usize {
        self.sizes[len..].iter().product()
    }

    pub fn contains(&self, coords: &[usize]) -> bool {
        coords.len() == self.sizes.len() && coords.iter().zip(&self.sizes).all(|(&c, &n)| c < n)
    }
}

/// A joint state as one identifier per layer.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct JointState(pub Vec<usize>);

impl JointState {
    pub fn validated(coords: Vec<usize>, space: &StateSpace) -> Result<Self> {
        if !space.contains(&coords) {
            return Err(MdpError::InvalidIndex(format!(
                "state {coords:?} does not fit space {:?}",
                space.sizes()
            )));
        }
        Ok(Self(coords))
    }
}

/// Per-layer external/internal action set sizes.
///
/// Layers without external or internal actions are represented with a single
/// no-op element, so every joint action always carries exactly `L` pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionSpace {
    external: Vec<usize>,
    internal: Vec<usize>,
}

impl ActionSpace {
    pub fn new(external: Vec<usize>, internal: Vec<usize>) -> Result<Self> {
        if external.len() != internal.len() || external.is_empty() {
            return Err(MdpError::InvalidIndex(
                "action space needs matching per-layer external/internal set lists".into(),
            ));
        }
        // empty sets are normalized to a single no-op element
        let external = external.into_iter().map(|n| n.max(1)).collect();
        let internal = internal.into_iter().map(|n| n.max(1)).collect();
        Ok(Self { external, internal })
    }

    pub fn layers(&self) -> usize {
        self.external.len()
    }

    pub fn external_size(&self, layer: usize) -> usize {
        self.external[layer]
    }

    pub fn internal_size(&self, layer: usize) -> usize {
        self.internal[layer]
    }

    pub fn total(&self) -> usize {
        self.external
            .iter()
            .zip(&self.internal)
            .map(|(a, b)| a * b)
            .product()
    }

    /// Canonical flat index of a per-layer `(a_l, b_l)` assignment.
    pub fn index(&self, pairs: &[(usize, usize)]) -> usize {
        debug_assert_eq!(pairs.len(), self.external.len());
        let mut idx = 0;
        for (l, &(a, b)) in pairs.iter().enumerate() {
            idx = idx * self.external[l] + a;
            idx = idx * self.internal[l] + b;
        }
        idx
    }

    pub fn pairs(&self, mut index: usize) -> Vec<(usize, usize)> {
        let mut out = vec![(0, 0); self.external.len()];
        for l in (0..self.external.len()).rev() {
            let b = index % self.internal[l];
            index /= self.internal[l];
            let a = index % self.external[l];
            index /= self.external[l];
            out[l] = (a, b);
        }
        out
    }

    /// All joint actions in canonical order, decoded once.
    pub fn enumerate(&self) -> Vec<JointAction> {
        (0..self.total())
            .map(|i| JointAction {
                pairs: self.pairs(i),
            })
            .collect()
    }
}

/// A joint action: one `(external, internal)` pair per layer.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct JointAction {
    pub pairs: Vec<(usize, usize)>,
}

impl JointAction {
    pub fn external(&self, layer: usize) -> usize {
        self.pairs[layer].0
    }

    pub fn internal(&self, layer: usize) -> usize {
        self.pairs[layer].1
    }

    /// The internal-action profile `b_{1..L}`.
    pub fn internal_profile(&self) -> Vec<usize> {
        self.pairs.iter().map(|&(_, b)| b).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn state_indexing_round_trips() {
        let sp = StateSpace::new(vec![9, 3, 25]).unwrap();
        assert_eq!(sp.total(), 675);
        for idx in [0, 1, 24, 25, 674, 337] {
            assert_eq!(sp.index(&sp.coords(idx)), idx);
        }
        assert_eq!(sp.prefix_total(0), 1);
        assert_eq!(sp.prefix_total(2), 27);
        assert_eq!(sp.prefix_of(sp.index(&[4, 1, 7]), 2), 4 * 3 + 1);
    }

    #[test]
    fn action_indexing_is_lexicographic() {
        let asp = ActionSpace::new(vec![1, 2, 3], vec![44, 6, 0]).unwrap();
        assert_eq!(asp.internal_size(2), 1, "empty set becomes a no-op");
        assert_eq!(asp.total(), 44 * 12 * 3);
        let mut prev = None;
        for i in 0..asp.total() {
            let pairs = asp.pairs(i);
            assert_eq!(asp.index(&pairs), i);
            if let Some(p) = prev {
                // flat order == lexicographic order on the digit tuple
                assert!(p < pairs);
            }
            prev = Some(pairs);
        }
    }
}
