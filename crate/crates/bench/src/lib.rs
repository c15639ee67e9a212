//! Fixtures shared by the benchmarks.

use std::sync::Arc;

use goafem::mesh::{initial_mesh, Mesh};

/// Mesh refined `levels` times towards the lower-left corner.
pub fn graded_mesh(n: usize, levels: usize) -> Arc<Mesh> {
    let mut mesh = initial_mesh(n).expect("valid grid size");
    for _ in 0..levels {
        let marked: Vec<usize> = (0..mesh.n_elements())
            .filter(|&t| {
                let c = mesh.centroid(t);
                c[0] + c[1] < 0.5
            })
            .collect();
        mesh = mesh.refine_nvb(&marked).expect("refinement");
    }
    Arc::new(mesh)
}
