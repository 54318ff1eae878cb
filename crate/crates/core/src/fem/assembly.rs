use crate::error::Result;
use crate::fem::{cell_points, symmetric_part, CsrMatrix, DofMap, JacobiPcg, Lame, Material, QuadPoint, RuleOrder};
use crate::mesh::Mesh;

/// Relative residual for the Ritz projection solve.
pub const RITZ_TOL: f64 = 1e-12;

/// Assembles `Σ_cells Σ_qp block(q, a, b)` where `block[i][j]` couples
/// component `i` of vertex `a` with component `j` of vertex `b`.
/// Only `a ≤ b` blocks are evaluated; the rest are mirrored, so the result is
/// bitwise symmetric whenever `block(q, b, a) = block(q, a, b)ᵀ`.
fn assemble_bilinear<F>(mesh: &Mesh, dofs: &DofMap, order: RuleOrder, block: F) -> CsrMatrix
where
    F: Fn(&QuadPoint, usize, usize) -> [[f64; 2]; 2],
{
    let mut mat = CsrMatrix::pattern(mesh, dofs);
    let mut pts = Vec::with_capacity(9);
    let mut local = [[0.0f64; 8]; 8];
    for c in 0..mesh.n_cells() {
        let ids = mesh.cell(c);
        let nv = ids.len();
        cell_points(mesh, c, order, &mut pts);
        for row in local.iter_mut() {
            row.fill(0.0);
        }
        for q in &pts {
            for a in 0..nv {
                for b in a..nv {
                    let blk = block(q, a, b);
                    for i in 0..2 {
                        for j in 0..2 {
                            local[2 * a + i][2 * b + j] += blk[i][j];
                        }
                    }
                }
            }
        }
        for a in 0..nv {
            for b in 0..a {
                for i in 0..2 {
                    for j in 0..2 {
                        local[2 * a + i][2 * b + j] = local[2 * b + j][2 * a + i];
                    }
                }
            }
        }
        for (a, &va) in ids.iter().enumerate() {
            for i in 0..2 {
                let Some(row) = dofs.dof(va, i) else { continue };
                for (b, &vb) in ids.iter().enumerate() {
                    for j in 0..2 {
                        if let Some(col) = dofs.dof(vb, j) {
                            mat.add(row, col, local[2 * a + i][2 * b + j]);
                        }
                    }
                }
            }
        }
    }
    mat
}

/// `M_ij = ∫ φ_i · φ_j`.
pub fn assemble_mass(mesh: &Mesh, dofs: &DofMap) -> CsrMatrix {
    assemble_bilinear(mesh, dofs, RuleOrder::Two, |q, a, b| {
        let m = q.weight * q.phi[a] * q.phi[b];
        [[m, 0.0], [0.0, m]]
    })
}

/// `K_ij = scale ∫ 2μ ε(φ_i):ε(φ_j) + λ div φ_i div φ_j`.
pub fn assemble_elastic(mesh: &Mesh, dofs: &DofMap, mu: f64, lambda: f64, scale: f64) -> CsrMatrix {
    assemble_bilinear(mesh, dofs, RuleOrder::Two, |q, a, b| {
        let ga = q.grad[a];
        let gb = q.grad[b];
        let w = scale * q.weight;
        let dot = ga[0] * gb[0] + ga[1] * gb[1];
        let mut blk = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                let diag = if i == j { dot } else { 0.0 };
                blk[i][j] = w * (mu * (diag + ga[j] * gb[i]) + lambda * (ga[i] * gb[j]));
            }
        }
        blk
    })
}

fn assemble_form(mesh: &Mesh, dofs: &DofMap, form: Lame) -> CsrMatrix {
    assemble_elastic(mesh, dofs, form.mu, form.lambda, form.scale)
}

/// Matrix of `a(v, w) = ∫ 𝔸ε(v):ε(w)`.
pub fn a_form_matrix(mesh: &Mesh, dofs: &DofMap, mat: &Material) -> CsrMatrix {
    assemble_form(mesh, dofs, mat.a_form())
}

/// Matrix of `b(v, w) = ∫ 𝔹ε(v):ε(w)` with `𝔹 = ρ⁻¹(ℂ − (τ_ε/τ_σ)^α 𝔻)`.
/// Assembled in one pass from the combined Lamé coefficients.
pub fn b_form_matrix(mesh: &Mesh, dofs: &DofMap, mat: &Material) -> CsrMatrix {
    assemble_form(mesh, dofs, mat.b_form())
}

/// Load-type vector `F_{a,i} = ∫ value_i φ_a + Σ_l flux_{il} ∂_l φ_a`, evaluated
/// with the degree-4 rule. `f(x, y)` returns `(value, flux)`.
pub fn assemble_vector<F>(mesh: &Mesh, dofs: &DofMap, f: F) -> Vec<f64>
where
    F: Fn(f64, f64) -> ([f64; 2], [[f64; 2]; 2]),
{
    let mut out = vec![0.0; dofs.n_dofs()];
    let mut pts = Vec::with_capacity(9);
    for c in 0..mesh.n_cells() {
        let ids = mesh.cell(c);
        cell_points(mesh, c, RuleOrder::Four, &mut pts);
        for q in &pts {
            let (value, flux) = f(q.x, q.y);
            for (a, &v) in ids.iter().enumerate() {
                for i in 0..2 {
                    if let Some(d) = dofs.dof(v, i) {
                        let g = q.grad[a];
                        out[d] += q.weight * (value[i] * q.phi[a] + flux[i][0] * g[0] + flux[i][1] * g[1]);
                    }
                }
            }
        }
    }
    out
}

/// Ritz projection onto the discrete space: solves `a(R_h v, χ) = a(v, χ)`
/// with the right-hand side built from the analytic gradient of `v`.
pub fn ritz_project<G>(mesh: &Mesh, dofs: &DofMap, a_matrix: &CsrMatrix, form: Lame, exact_grad: G) -> Result<Vec<f64>>
where
    G: Fn(f64, f64) -> [[f64; 2]; 2],
{
    let rhs = assemble_vector(mesh, dofs, |x, y| ([0.0, 0.0], form.apply(symmetric_part(exact_grad(x, y)))));
    let mut x = vec![0.0; dofs.n_dofs()];
    JacobiPcg::new(a_matrix).solve(a_matrix, &rhs, &mut x, RITZ_TOL)?;
    Ok(x)
}

/// `‖v_h − v‖_{L²(Ω)}` with the degree-4 rule; boundary dofs of `v_h` are zero.
pub fn l2_error<F>(mesh: &Mesh, dofs: &DofMap, coeffs: &[f64], exact: F) -> f64
where
    F: Fn(f64, f64) -> [f64; 2],
{
    let mut sum = 0.0;
    let mut pts = Vec::with_capacity(9);
    for c in 0..mesh.n_cells() {
        let ids = mesh.cell(c);
        cell_points(mesh, c, RuleOrder::Four, &mut pts);
        for q in &pts {
            let mut vh = [0.0; 2];
            for (a, &v) in ids.iter().enumerate() {
                for (i, comp) in vh.iter_mut().enumerate() {
                    if let Some(d) = dofs.dof(v, i) {
                        *comp += coeffs[d] * q.phi[a];
                    }
                }
            }
            let e = exact(q.x, q.y);
            sum += q.weight * ((vh[0] - e[0]).powi(2) + (vh[1] - e[1]).powi(2));
        }
    }
    sum.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::MeshKind;

    const KINDS: [MeshKind; 2] = [MeshKind::Triangular, MeshKind::Quadrilateral];

    #[test]
    fn full_mass_sums_to_two() {
        for kind in KINDS {
            let m = Mesh::new(kind, 6).unwrap();
            let mass = assemble_mass(&m, &DofMap::unconstrained(&m));
            let total: f64 = mass.values().iter().sum();
            assert!((total - 2.0).abs() < 1e-12, "{kind}: {total}");
        }
    }

    #[test]
    fn triangle_element_mass() {
        // corner vertex 0 lies in two triangles of area 1/8; vertex 1 shares one of them
        let m = Mesh::new(MeshKind::Triangular, 2).unwrap();
        let d = DofMap::unconstrained(&m);
        let mass = assemble_mass(&m, &d);
        let area = 0.125;
        assert!((mass.get(0, 0) - 4.0 * area / 12.0).abs() < 1e-15);
        assert!((mass.get(0, 2) - area / 12.0).abs() < 1e-15);
        assert_eq!(mass.get(0, 1), 0.0);
    }

    #[test]
    fn rigid_motions_in_kernel() {
        for kind in KINDS {
            let m = Mesh::new(kind, 5).unwrap();
            let d = DofMap::unconstrained(&m);
            let k = assemble_elastic(&m, &d, 1.3, 0.7, 1.0);
            for field in [
                d.interpolate(&m, |_, _| [1.0, 0.0]),
                d.interpolate(&m, |_, _| [0.0, 1.0]),
                d.interpolate(&m, |x, y| [-y, x]),
            ] {
                let r = k.mul_vec(&field);
                assert!(r.iter().all(|v| v.abs() < 1e-12));
            }
        }
    }

    #[test]
    fn assembled_matrices_are_symmetric() {
        for kind in KINDS {
            let m = Mesh::new(kind, 4).unwrap();
            let d = DofMap::dirichlet(&m);
            assert!(assemble_mass(&m, &d).is_symmetric());
            assert!(a_form_matrix(&m, &d, &Material::reference(0.5)).is_symmetric());
            assert!(b_form_matrix(&m, &d, &Material::reference(0.3)).is_symmetric());
        }
    }

    #[test]
    fn b_form_vanishes_for_matched_tensors() {
        let mut mat = Material::reference(0.5);
        mat.tau_eps = mat.tau_sigma;
        mat.mu_d = mat.mu_c;
        mat.lambda_d = mat.lambda_c;
        let m = Mesh::new(MeshKind::Quadrilateral, 4).unwrap();
        let b = b_form_matrix(&m, &DofMap::dirichlet(&m), &mat);
        assert!(b.max_abs() < 1e-14);
    }

    #[test]
    fn b_form_is_c_minus_scaled_d() {
        let mat = Material::reference(0.5);
        let m = Mesh::new(MeshKind::Triangular, 4).unwrap();
        let d = DofMap::dirichlet(&m);
        let b = b_form_matrix(&m, &d, &mat);
        let kc = assemble_elastic(&m, &d, mat.mu_c, mat.lambda_c, 1.0);
        let kd = assemble_elastic(&m, &d, mat.mu_d, mat.lambda_d, 1.0);
        for (r, c) in [(0, 0), (0, 1), (3, 5), (7, 2)] {
            let expect = kc.get(r, c) - 2f64.sqrt() * kd.get(r, c);
            assert!((b.get(r, c) - expect).abs() < 1e-13);
        }
        let mut heavy = mat;
        heavy.rho = 2.0;
        let b2 = b_form_matrix(&m, &d, &heavy);
        for (x, y) in b.values().iter().zip(b2.values()) {
            assert!((0.5 * x - y).abs() <= 1e-15 * x.abs());
        }
    }

    #[test]
    fn l2_error_zero_for_representable_field() {
        // bilinear per cell and zero on the boundary: x(1−x)y(1−y) is not, but
        // on the unconstrained map any bilinear field is exact on quads.
        let m = Mesh::new(MeshKind::Quadrilateral, 4).unwrap();
        let d = DofMap::unconstrained(&m);
        let f = |x: f64, y: f64| [1.0 + 2.0 * x - y + 3.0 * x * y, x * y];
        let coeffs = d.interpolate(&m, f);
        assert!(l2_error(&m, &d, &coeffs, f) < 1e-13);
    }

    #[test]
    fn ritz_of_zero_is_zero() {
        let m = Mesh::new(MeshKind::Triangular, 4).unwrap();
        let d = DofMap::dirichlet(&m);
        let mat = Material::reference(0.5);
        let a = a_form_matrix(&m, &d, &mat);
        let v = ritz_project(&m, &d, &a, mat.a_form(), |_, _| [[0.0; 2]; 2]).unwrap();
        assert!(v.iter().all(|x| *x == 0.0));
    }
}
