use crate::models::EdgeSet;

/// Set of ordered index pairs that may be non-zero: every diagonal pair plus
/// a symmetric set of off-diagonal pairs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Support {
    dim: usize,
    mask: Vec<bool>,
}

impl Support {
    pub fn full(dim: usize) -> Self {
        Self { dim, mask: vec![true; dim * dim] }
    }

    pub fn diagonal(dim: usize) -> Self {
        Self::from_edges(dim, &EdgeSet::new())
    }

    /// Diagonal plus both orientations of every edge.
    pub fn from_edges(dim: usize, edges: &EdgeSet) -> Self {
        let mut mask = vec![false; dim * dim];
        for i in 0..dim {
            mask[i * dim + i] = true;
        }
        for (i, j) in edges.iter() {
            assert!(i < dim && j < dim, "edge ({i},{j}) out of range for dimension {dim}");
            mask[i * dim + j] = true;
            mask[j * dim + i] = true;
        }
        Self { dim, mask }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.mask[i * self.dim + j]
    }

    pub fn is_full(&self) -> bool {
        self.mask.iter().all(|&b| b)
    }

    /// `|S|`, counting ordered pairs (so each edge twice) plus the diagonal.
    pub fn len(&self) -> usize {
        self.mask.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        self.dim == 0
    }

    /// Ordered pairs in `S`, row-major in `(j, k)`.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        self.ordered(true)
    }

    /// Ordered pairs in the complement of `S`, row-major in `(j, k)`.
    pub fn complement_pairs(&self) -> Vec<(usize, usize)> {
        self.ordered(false)
    }

    fn ordered(&self, inside: bool) -> Vec<(usize, usize)> {
        let d = self.dim;
        (0..d).flat_map(|j| (0..d).map(move |k| (j, k))).filter(|&(j, k)| self.mask[j * d + k] == inside).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chain_support_size() {
        let edges: EdgeSet = (0..4).map(|i| (i, i + 1)).collect();
        let s = Support::from_edges(5, &edges);
        assert_eq!(s.len(), 5 + 2 * 4);
        assert_eq!(s.complement_pairs().len(), 25 - 13);
        assert!(s.contains(2, 1) && s.contains(1, 2) && !s.contains(0, 2));
        assert_eq!(s.pairs()[0..3], [(0, 0), (0, 1), (1, 0)]);
    }

    #[test]
    fn full_and_diagonal() {
        assert!(Support::full(3).is_full());
        assert_eq!(Support::diagonal(3).len(), 3);
        assert!(!Support::diagonal(3).is_full());
    }
}
