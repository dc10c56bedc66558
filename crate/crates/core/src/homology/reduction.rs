//! Z/2 boundary-matrix reduction with clearing.
//!
//! Columns are processed from the highest dimension down. When a column of
//! dimension k reduces to pivot row i, simplex i is a creator and its own
//! column (dimension k − 1) is known to reduce to zero, so it is skipped.

use std::collections::HashMap;

use super::diagram::{Pair, PersistenceDiagram};
use super::filtration::{filtration_order, Filtration};
use super::{HomologyError, Result};

/// Combinatorial-number-system index of a sorted vertex tuple; unique within
/// one dimension.
struct SimplexIndexer {
    binom: Vec<[u64; 5]>,
}

impl SimplexIndexer {
    fn new(n: usize) -> Self {
        let binom = (0..=n as u64)
            .map(|v| {
                let mut row = [0u64; 5];
                row[0] = 1;
                for k in 1..5 {
                    row[k] = if v < k as u64 { 0 } else { row[k - 1] * (v - k as u64 + 1) / k as u64 };
                }
                row
            })
            .collect();
        SimplexIndexer { binom }
    }

    fn key(&self, vertices: &[u32]) -> u64 {
        vertices.iter().enumerate().map(|(i, &v)| self.binom[v as usize][i + 1]).sum()
    }
}

/// Symmetric difference of two ascending index lists, written into `out`.
fn add_columns(a: &[u32], b: &[u32], out: &mut Vec<u32>) {
    out.clear();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
}

/// Boundary columns (ascending face indices) after checking that every face
/// is present, earlier in the order, and no later in value.
fn boundary_columns(f: &Filtration) -> Result<Vec<Vec<u32>>> {
    let indexer = SimplexIndexer::new(f.n_vertices);
    let mut lookup: Vec<HashMap<u64, u32>> = vec![HashMap::new(); f.max_dim + 2];
    for (idx, s) in f.simplices.iter().enumerate() {
        lookup[s.dim()].insert(indexer.key(&s.vertices), idx as u32);
    }
    let mut columns = Vec::with_capacity(f.len());
    let mut face = Vec::with_capacity(4);
    for (idx, s) in f.simplices.iter().enumerate() {
        let mut col = Vec::with_capacity(s.vertices.len());
        if s.dim() > 0 {
            for skip in 0..s.vertices.len() {
                face.clear();
                face.extend(s.vertices.iter().enumerate().filter(|&(k, _)| k != skip).map(|(_, &v)| v));
                let Some(&fi) = lookup[s.dim() - 1].get(&indexer.key(&face)) else {
                    return Err(HomologyError::MissingFace { simplex: s.vertices.clone(), face: face.clone() });
                };
                let fs = &f.simplices[fi as usize];
                if fi as usize >= idx || fs.value > s.value {
                    return Err(HomologyError::FaceOrder { simplex: s.vertices.clone(), face: face.clone() });
                }
                col.push(fi);
            }
            col.sort_unstable();
        }
        columns.push(col);
    }
    Ok(columns)
}

/// Persistence pairs of `f` in dimensions `0..=f.max_dim`.
///
/// Pairs with equal birth and death are kept (see [`Pair::is_zero_lifetime`]);
/// creators that are never killed give pairs with infinite death.
pub fn compute_persistence(f: &Filtration) -> Result<PersistenceDiagram> {
    if f.simplices.windows(2).any(|w| filtration_order(&w[0], &w[1]).is_gt()) {
        let w = f.simplices.windows(2).find(|w| filtration_order(&w[0], &w[1]).is_gt()).unwrap();
        return Err(HomologyError::FaceOrder { simplex: w[0].vertices.clone(), face: w[1].vertices.clone() });
    }
    let mut columns = boundary_columns(f)?;
    let n = f.len();
    const NONE: u32 = u32::MAX;
    let mut pivot_owner = vec![NONE; n];
    let mut cleared = vec![false; n];
    let mut scratch = Vec::new();

    let mut by_dim: Vec<Vec<usize>> = vec![Vec::new(); f.max_dim + 2];
    for (idx, s) in f.simplices.iter().enumerate() {
        by_dim[s.dim()].push(idx);
    }

    for dim in (1..=f.max_dim + 1).rev() {
        for &j in &by_dim[dim] {
            if cleared[j] {
                columns[j].clear();
                continue;
            }
            let mut col = std::mem::take(&mut columns[j]);
            while let Some(&low) = col.last() {
                let owner = pivot_owner[low as usize];
                if owner == NONE {
                    break;
                }
                add_columns(&col, &columns[owner as usize], &mut scratch);
                std::mem::swap(&mut col, &mut scratch);
            }
            if let Some(&low) = col.last() {
                pivot_owner[low as usize] = j as u32;
                cleared[low as usize] = true;
            }
            columns[j] = col;
        }
    }

    let mut diagram = PersistenceDiagram::empty(f.threshold, f.n_vertices, f.max_dim);
    for (j, col) in columns.iter().enumerate() {
        if let Some(&low) = col.last() {
            let birth_simplex = &f.simplices[low as usize];
            let dim = birth_simplex.dim();
            if dim <= f.max_dim {
                diagram.pairs[dim].push(Pair { birth: birth_simplex.value, death: f.simplices[j].value });
            }
        }
    }
    for (i, s) in f.simplices.iter().enumerate() {
        let dim = s.dim();
        if dim <= f.max_dim && pivot_owner[i] == NONE && columns[i].is_empty() {
            diagram.pairs[dim].push(Pair { birth: s.value, death: f64::INFINITY });
        }
    }
    diagram.sort_pairs();
    Ok(diagram)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::homology::{rips_filtration, Simplex, Threshold};
    use crate::pointcloud::{euclidean_distances, DistanceMatrix};

    #[test]
    fn column_addition_is_symmetric_difference() {
        let mut out = Vec::new();
        add_columns(&[1, 3, 5, 9], &[3, 4, 9], &mut out);
        assert_eq!(out, vec![1, 4, 5]);
        add_columns(&[2], &[2], &mut out);
        assert!(out.is_empty());
    }

    #[test]
    fn indexer_is_injective_per_dimension() {
        let idx = SimplexIndexer::new(10);
        let mut seen = std::collections::HashSet::new();
        for a in 0..10u32 {
            for b in (a + 1)..10 {
                for c in (b + 1)..10 {
                    assert!(seen.insert(idx.key(&[a, b, c])));
                }
            }
        }
        assert_eq!(seen.len(), 120);
    }

    #[test]
    fn equilateral_triangle_diagram() {
        let s = 1.5;
        let dm = DistanceMatrix::from_rows(&[vec![0.0, s, s], vec![s, 0.0, s], vec![s, s, 0.0]]).unwrap();
        let pd = compute_persistence(&rips_filtration(&dm, 2, Threshold::Auto).unwrap()).unwrap();
        assert_eq!(
            pd.pairs[0],
            vec![
                Pair { birth: 0.0, death: s },
                Pair { birth: 0.0, death: s },
                Pair { birth: 0.0, death: f64::INFINITY }
            ]
        );
        // The loop is born and filled at the same value.
        assert!(pd.pairs[1].iter().all(Pair::is_zero_lifetime));
        assert!(pd.pairs[2].is_empty());
    }

    #[test]
    fn unit_square_has_one_loop() {
        let pts = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0]];
        let pd =
            compute_persistence(&rips_filtration(&euclidean_distances(&pts), 2, Threshold::Auto).unwrap()).unwrap();
        let loops: Vec<&Pair> = pd.pairs[1].iter().filter(|p| !p.is_zero_lifetime()).collect();
        assert_eq!(loops, vec![&Pair { birth: 1.0, death: 2f64.sqrt() }]);
        assert_eq!(pd.pairs[0].len(), 4);
    }

    #[test]
    fn missing_face_is_structural_error() {
        let f = Filtration {
            simplices: vec![
                Simplex { vertices: vec![0], value: 0.0 },
                Simplex { vertices: vec![1], value: 0.0 },
                Simplex { vertices: vec![0, 2], value: 1.0 },
            ],
            threshold: 1.0,
            max_dim: 1,
            n_vertices: 3,
        };
        assert!(matches!(compute_persistence(&f), Err(HomologyError::MissingFace { .. })));
        let mut unordered = rips_filtration(&euclidean_distances(&[vec![0.0], vec![1.0]]), 1, Threshold::Auto).unwrap();
        unordered.simplices.swap(0, 2);
        assert!(matches!(compute_persistence(&unordered), Err(HomologyError::FaceOrder { .. })));
    }

    #[test]
    fn truncated_filtration_keeps_essential_loop() {
        // Square with threshold below the diagonal: the loop never dies.
        let pts = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0]];
        let pd = compute_persistence(&rips_filtration(&euclidean_distances(&pts), 2, Threshold::Value(1.2)).unwrap())
            .unwrap();
        assert_eq!(pd.pairs[1], vec![Pair { birth: 1.0, death: f64::INFINITY }]);
        assert_eq!(pd.pairs[0].iter().filter(|p| p.death.is_infinite()).count(), 1);
    }
}
