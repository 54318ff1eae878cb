//! Reference quadrature rules and shape-function evaluation per cell.

use crate::mesh::{Mesh, MeshKind};

/// Polynomial degree a rule must integrate exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RuleOrder {
    /// Degree 2: 3-point triangle rule, 2×2 Gauss on quads. Exact for mass and stiffness.
    Two,
    /// Degree 4: 6-point triangle rule, 3×3 Gauss on quads. Used for loads and errors.
    Four,
}

/// (λ1, λ2, weight as a fraction of the cell area).
const TRI_DEG2: [(f64, f64, f64); 3] = [
    (1.0 / 6.0, 1.0 / 6.0, 1.0 / 3.0),
    (2.0 / 3.0, 1.0 / 6.0, 1.0 / 3.0),
    (1.0 / 6.0, 2.0 / 3.0, 1.0 / 3.0),
];

const TRI_A: f64 = 0.445_948_490_915_964_886_318_329_253_883_3;
const TRI_WA: f64 = 0.223_381_589_678_011_465_944_640_024_797_0;
const TRI_B: f64 = 0.091_576_213_509_770_743_459_571_463_402_2;
const TRI_WB: f64 = 0.109_951_743_655_321_867_388_693_308_536_3;

const TRI_DEG4: [(f64, f64, f64); 6] = [
    (TRI_A, TRI_A, TRI_WA),
    (1.0 - 2.0 * TRI_A, TRI_A, TRI_WA),
    (TRI_A, 1.0 - 2.0 * TRI_A, TRI_WA),
    (TRI_B, TRI_B, TRI_WB),
    (1.0 - 2.0 * TRI_B, TRI_B, TRI_WB),
    (TRI_B, 1.0 - 2.0 * TRI_B, TRI_WB),
];

const GAUSS2: [(f64, f64); 2] = [(-0.577_350_269_189_625_8, 1.0), (0.577_350_269_189_625_8, 1.0)];
const GAUSS3: [(f64, f64); 3] = [
    (-0.774_596_669_241_483_4, 5.0 / 9.0),
    (0.0, 8.0 / 9.0),
    (0.774_596_669_241_483_4, 5.0 / 9.0),
];

/// Reference coordinates of the quad vertices, counterclockwise from (−1, −1).
const QUAD_REF: [(f64, f64); 4] = [(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)];

/// A physical quadrature point with the cell's shape functions evaluated there.
/// Entries beyond the cell's vertex count are zero.
#[derive(Debug, Clone, Copy)]
pub struct QuadPoint {
    pub x: f64,
    pub y: f64,
    /// Quadrature weight times the Jacobian determinant.
    pub weight: f64,
    pub phi: [f64; 4],
    pub grad: [[f64; 2]; 4],
}

/// Fills `out` with the quadrature points of cell `c`.
pub fn cell_points(mesh: &Mesh, c: usize, order: RuleOrder, out: &mut Vec<QuadPoint>) {
    out.clear();
    let ids = mesh.cell(c);
    let v = mesh.vertices();
    match mesh.kind() {
        MeshKind::Triangular => {
            let p = [v[ids[0]], v[ids[1]], v[ids[2]]];
            let twice_area = (p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]);
            let mut grad = [[0.0; 2]; 4];
            for i in 0..3 {
                let (j, k) = ((i + 1) % 3, (i + 2) % 3);
                grad[i] = [(p[j][1] - p[k][1]) / twice_area, (p[k][0] - p[j][0]) / twice_area];
            }
            let rule: &[(f64, f64, f64)] = match order {
                RuleOrder::Two => &TRI_DEG2,
                RuleOrder::Four => &TRI_DEG4,
            };
            for &(l1, l2, w) in rule {
                let l0 = 1.0 - l1 - l2;
                out.push(QuadPoint {
                    x: l0 * p[0][0] + l1 * p[1][0] + l2 * p[2][0],
                    y: l0 * p[0][1] + l1 * p[1][1] + l2 * p[2][1],
                    weight: w * 0.5 * twice_area,
                    phi: [l0, l1, l2, 0.0],
                    grad,
                });
            }
        }
        MeshKind::Quadrilateral => {
            let p = [v[ids[0]], v[ids[1]], v[ids[2]], v[ids[3]]];
            let rule: &[(f64, f64)] = match order {
                RuleOrder::Two => &GAUSS2,
                RuleOrder::Four => &GAUSS3,
            };
            for &(xi, wx) in rule {
                for &(eta, wy) in rule {
                    out.push(bilinear_point(&p, xi, eta, wx * wy));
                }
            }
        }
    }
}

fn bilinear_point(p: &[[f64; 2]; 4], xi: f64, eta: f64, w: f64) -> QuadPoint {
    let mut phi = [0.0; 4];
    let mut dref = [[0.0; 2]; 4];
    for (a, &(xa, ya)) in QUAD_REF.iter().enumerate() {
        phi[a] = 0.25 * (1.0 + xi * xa) * (1.0 + eta * ya);
        dref[a] = [0.25 * xa * (1.0 + eta * ya), 0.25 * ya * (1.0 + xi * xa)];
    }
    // J[r][s] = ∂x_r/∂ξ_s
    let mut jac = [[0.0; 2]; 2];
    let (mut x, mut y) = (0.0, 0.0);
    for a in 0..4 {
        x += phi[a] * p[a][0];
        y += phi[a] * p[a][1];
        for r in 0..2 {
            for s in 0..2 {
                jac[r][s] += p[a][r] * dref[a][s];
            }
        }
    }
    let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
    let inv = [[jac[1][1] / det, -jac[0][1] / det], [-jac[1][0] / det, jac[0][0] / det]];
    let mut grad = [[0.0; 2]; 4];
    for a in 0..4 {
        // ∇_x N = J^{-T} ∇_ξ N
        grad[a] = [
            inv[0][0] * dref[a][0] + inv[1][0] * dref[a][1],
            inv[0][1] * dref[a][0] + inv[1][1] * dref[a][1],
        ];
    }
    QuadPoint { x, y, weight: w * det, phi, grad }
}
