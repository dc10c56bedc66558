//! Brute-force persistence for small point sets.
//!
//! Builds its own complex by scanning every vertex subset (as a bitmask),
//! orders it independently of [`super::rips_filtration`], and reduces a dense
//! boundary matrix by plain left-to-right Gaussian elimination over Z/2. It
//! shares no code with the optimised path beyond the diagram type.

use super::diagram::{Pair, PersistenceDiagram};
use crate::pointcloud::DistanceMatrix;

/// Largest point count the oracle accepts.
pub const MAX_POINTS: usize = 16;

/// Persistence diagram of the Rips filtration of `dm` up to `max_dim`,
/// admitting simplices with value ≤ `threshold`.
///
/// # Panics
/// If `dm` has more than [`MAX_POINTS`] points or `max_dim > 2`.
pub fn naive_persistence(dm: &DistanceMatrix, max_dim: usize, threshold: f64) -> PersistenceDiagram {
    let n = dm.len();
    assert!(n <= MAX_POINTS, "oracle limited to {MAX_POINTS} points");
    assert!(max_dim <= 2);
    let max_size = max_dim + 2;

    // (value, size, mask)
    let mut cells: Vec<(f64, u32, u32)> = Vec::new();
    for mask in 1u32..(1 << n) {
        let size = mask.count_ones();
        if size as usize > max_size {
            continue;
        }
        let verts: Vec<usize> = (0..n).filter(|&v| mask & (1 << v) != 0).collect();
        let mut value = 0.0f64;
        for a in 0..verts.len() {
            for b in (a + 1)..verts.len() {
                value = value.max(dm.get(verts[a], verts[b]));
            }
        }
        if value <= threshold {
            cells.push((value, size, mask));
        }
    }
    // Ties broken by bitmask rather than lexicographic order: any order that
    // lists faces first gives the same diagram.
    cells.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

    let m = cells.len();
    let position = |mask: u32| cells.iter().position(|c| c.2 == mask).expect("face in complex");
    // Dense column-major boundary matrix.
    let mut matrix = vec![vec![false; m]; m];
    for (j, &(_, size, mask)) in cells.iter().enumerate() {
        if size < 2 {
            continue;
        }
        for v in 0..n {
            if mask & (1 << v) != 0 {
                matrix[j][position(mask & !(1 << v))] = true;
            }
        }
    }

    let low = |col: &[bool]| col.iter().rposition(|&x| x);
    for j in 0..m {
        loop {
            let Some(l) = low(&matrix[j]) else { break };
            let Some(k) = (0..j).find(|&k| low(&matrix[k]) == Some(l)) else {
                break;
            };
            let other = matrix[k].clone();
            for (x, y) in matrix[j].iter_mut().zip(other) {
                *x ^= y;
            }
        }
    }

    let mut pd = PersistenceDiagram::empty(threshold, n, max_dim);
    let mut paired = vec![false; m];
    for j in 0..m {
        if let Some(i) = low(&matrix[j]) {
            paired[i] = true;
            paired[j] = true;
            let dim = cells[i].1 as usize - 1;
            if dim <= max_dim {
                pd.pairs[dim].push(Pair { birth: cells[i].0, death: cells[j].0 });
            }
        }
    }
    for i in 0..m {
        let dim = cells[i].1 as usize - 1;
        if !paired[i] && dim <= max_dim {
            pd.pairs[dim].push(Pair { birth: cells[i].0, death: f64::INFINITY });
        }
    }
    pd.sort_pairs();
    pd
}
