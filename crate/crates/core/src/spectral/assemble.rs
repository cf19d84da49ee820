//! Piecewise-linear finite element assembly on triangle meshes.
//!
//! Produces the full stiffness and mass matrices (all nodes, CSR) plus
//! the interior blocks needed by the eigensolvers. Assembly order is
//! fixed, so matrices are reproducible bit-for-bit.

use crate::spectral::mesh::Mesh;

/// Symmetric sparse matrix in CSR form.
#[derive(Debug, Clone)]
pub struct Csr {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub col: Vec<usize>,
    pub val: Vec<f64>,
}

impl Csr {
    fn from_triplets(n: usize, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        triplets.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut row_ptr = vec![0usize; n + 1];
        let mut col: Vec<usize> = Vec::with_capacity(triplets.len());
        let mut val: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut cur_row = 0usize;
        for (r, c, v) in triplets {
            while cur_row < r {
                cur_row += 1;
                row_ptr[cur_row] = col.len();
            }
            if col.len() > row_ptr[cur_row] && *col.last().unwrap() == c {
                *val.last_mut().unwrap() += v;
            } else {
                col.push(c);
                val.push(v);
            }
        }
        while cur_row < n {
            cur_row += 1;
            row_ptr[cur_row] = col.len();
        }
        Self { n, row_ptr, col, val }
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (self.col[k], self.val[k]))
    }

    /// y = A·x restricted to the leading `dim` indices, treating entries
    /// outside as zero. With dim = n this is a plain matvec.
    pub fn mul_vec_leading(&self, x: &[f64], dim: usize, y: &mut [f64]) {
        for r in 0..dim {
            let mut acc = 0.0;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                let c = self.col[k];
                if c < dim {
                    acc += self.val[k] * x[c];
                }
            }
            y[r] = acc;
        }
    }
}

/// Full stiffness and mass matrices of a mesh.
#[derive(Debug, Clone)]
pub struct Forms {
    pub stiffness: Csr,
    pub mass: Csr,
}

/// Assembles P1 stiffness ∫∇φi·∇φj and mass ∫φiφj over all nodes.
pub fn assemble_forms(mesh: &Mesh) -> Forms {
    let n = mesh.node_count();
    let mut k_trip = Vec::with_capacity(9 * mesh.triangles.len());
    let mut m_trip = Vec::with_capacity(9 * mesh.triangles.len());
    for &tri in &mesh.triangles {
        let p: [[f64; 2]; 3] = [mesh.nodes[tri[0]], mesh.nodes[tri[1]], mesh.nodes[tri[2]]];
        let area = 0.5
            * ((p[1][0] - p[0][0]) * (p[2][1] - p[0][1])
                - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]));
        // gradient of hat i is the rotated opposite edge over 2·area
        let grads: [[f64; 2]; 3] = [
            [(p[1][1] - p[2][1]) / (2.0 * area), (p[2][0] - p[1][0]) / (2.0 * area)],
            [(p[2][1] - p[0][1]) / (2.0 * area), (p[0][0] - p[2][0]) / (2.0 * area)],
            [(p[0][1] - p[1][1]) / (2.0 * area), (p[1][0] - p[0][0]) / (2.0 * area)],
        ];
        for i in 0..3 {
            for j in 0..3 {
                let kij = area * (grads[i][0] * grads[j][0] + grads[i][1] * grads[j][1]);
                let mij = area / 12.0 * if i == j { 2.0 } else { 1.0 };
                k_trip.push((tri[i], tri[j], kij));
                m_trip.push((tri[i], tri[j], mij));
            }
        }
    }
    Forms {
        stiffness: Csr::from_triplets(n, k_trip),
        mass: Csr::from_triplets(n, m_trip),
    }
}

/// Lower-band storage of the leading interior block of a CSR matrix.
/// Entry (i, j) with i−bw ≤ j ≤ i lives at data[i·(bw+1) + (j−i+bw)].
#[derive(Debug, Clone)]
pub struct BandMatrix {
    pub n: usize,
    pub bw: usize,
    pub data: Vec<f64>,
}

impl BandMatrix {
    pub fn from_csr_leading(csr: &Csr, dim: usize) -> Self {
        let mut bw = 0usize;
        for r in 0..dim {
            for (c, _) in csr.row(r) {
                if c < dim && c <= r {
                    bw = bw.max(r - c);
                }
            }
        }
        let mut data = vec![0.0; dim * (bw + 1)];
        for r in 0..dim {
            for (c, v) in csr.row(r) {
                if c < dim && c <= r {
                    data[r * (bw + 1) + (c + bw - r)] = v;
                }
            }
        }
        Self { n: dim, bw, data }
    }
}

/// Mass matrix of the boundary polygon (cyclic tridiagonal, chord
/// lengths), used as the Gram matrix of the variational flux recovery.
#[derive(Debug, Clone)]
pub struct BoundaryMass {
    /// Dense copy with Cholesky factor; boundary node counts are small.
    chol: nalgebra::Cholesky<f64, nalgebra::Dyn>,
    pub edge_lengths: Vec<f64>,
}

impl BoundaryMass {
    pub fn new(mesh: &Mesh) -> Option<Self> {
        let ids: Vec<usize> = mesh.boundary_node_ids().collect();
        let nb = ids.len();
        let mut mat = nalgebra::DMatrix::<f64>::zeros(nb, nb);
        let mut edge_lengths = Vec::with_capacity(nb);
        for j in 0..nb {
            let a = mesh.nodes[ids[j]];
            let b = mesh.nodes[ids[(j + 1) % nb]];
            let len = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
            edge_lengths.push(len);
            let (i0, i1) = (j, (j + 1) % nb);
            mat[(i0, i0)] += len / 3.0;
            mat[(i1, i1)] += len / 3.0;
            mat[(i0, i1)] += len / 6.0;
            mat[(i1, i0)] += len / 6.0;
        }
        nalgebra::Cholesky::new(mat).map(|chol| Self { chol, edge_lengths })
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let v = nalgebra::DVector::from_column_slice(rhs);
        self.chol.solve(&v).as_slice().to_vec()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ConvexDomain2D;
    use crate::spectral::{mesh::mesh_domain, SolverConfig};

    fn disk_mesh(nr: usize, na: usize) -> Mesh {
        let d = ConvexDomain2D::disk(1.0, 256).unwrap();
        let cfg = SolverConfig { n_radial: nr, n_angular: na, ..SolverConfig::default() };
        mesh_domain(&d, &cfg).unwrap()
    }

    #[test]
    fn mass_total_equals_area() {
        let mesh = disk_mesh(8, 32);
        let forms = assemble_forms(&mesh);
        let total: f64 = forms.mass.val.iter().sum();
        let polygon_area: f64 = mesh.triangles.iter().map(|&t| mesh.triangle_area(t)).sum();
        assert!((total - polygon_area).abs() < 1e-12);
    }

    #[test]
    fn stiffness_rows_sum_to_zero() {
        // constants are in the kernel of the stiffness form
        let mesh = disk_mesh(8, 32);
        let forms = assemble_forms(&mesh);
        for r in 0..mesh.node_count() {
            let s: f64 = forms.stiffness.row(r).map(|(_, v)| v).sum();
            assert!(s.abs() < 1e-12, "row {r} sums to {s}");
        }
    }

    #[test]
    fn csr_symmetry() {
        let mesh = disk_mesh(8, 32);
        let forms = assemble_forms(&mesh);
        for r in 0..mesh.node_count() {
            for (c, v) in forms.stiffness.row(r) {
                let vt = forms
                    .stiffness
                    .row(c)
                    .find(|&(cc, _)| cc == r)
                    .map(|(_, v)| v)
                    .unwrap();
                assert!((v - vt).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn band_matches_csr() {
        let mesh = disk_mesh(8, 32);
        let forms = assemble_forms(&mesh);
        let dim = mesh.n_interior;
        let band = BandMatrix::from_csr_leading(&forms.stiffness, dim);
        assert!(band.bw <= 32 + 1);
        for r in 0..dim {
            for (c, v) in forms.stiffness.row(r) {
                if c < dim && c <= r {
                    assert_eq!(band.data[r * (band.bw + 1) + (c + band.bw - r)], v);
                }
            }
        }
    }

    #[test]
    fn boundary_mass_total_is_polygon_perimeter() {
        let mesh = disk_mesh(8, 32);
        let bm = BoundaryMass::new(&mesh).unwrap();
        let perim: f64 = bm.edge_lengths.iter().sum();
        // integral of the constant 1 against all hats equals the perimeter:
        // solve B g = B·1 and check g = 1
        let nb = mesh.boundary_samples.len();
        let mut rhs = vec![0.0; nb];
        for j in 0..nb {
            rhs[j] = (bm.edge_lengths[j] + bm.edge_lengths[(j + nb - 1) % nb]) / 2.0;
        }
        let g = bm.solve(&rhs);
        for v in g {
            assert!((v - 1.0).abs() < 1e-10);
        }
        let chord_perimeter = 2.0 * 32.0 * (std::f64::consts::PI / 32.0).sin();
        assert!((perim - chord_perimeter).abs() < 1e-12);
    }
}
