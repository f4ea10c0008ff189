//! Piecewise-linear finite elements for the radial sectors of
//! `L = -Δ - (7/3)W^{4/3}` in `R^5`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::banded::SymBanded;
use crate::numerics::gauss::gauss_legendre;
use crate::profiles::{potential, SPHERE_AREA};

/// Fewest elements accepted by [`build_sector`].
pub const MIN_ELEMENTS: usize = 100;
const ELEMENT_ORDER: usize = 5;

/// Mesh `r_i = L sinh(i·Δs)`, `i = 0..=N`, with `r_N = r_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeMesh {
    pub nodes: Vec<f64>,
    pub scale: f64,
    pub r_max: f64,
}

impl FeMesh {
    pub fn sinh(scale: f64, r_max: f64, elements: usize) -> Result<Self> {
        if !(scale > 0.0 && r_max > 0.0 && scale.is_finite() && r_max.is_finite()) {
            return Err(Error::input("mesh scale and r_max must be positive"));
        }
        if elements < 2 {
            return Err(Error::input("mesh needs at least two elements"));
        }
        let s_max = (r_max / scale).asinh();
        let mut nodes: Vec<f64> = (0..=elements)
            .map(|i| scale * (s_max * i as f64 / elements as f64).sinh())
            .collect();
        nodes[elements] = r_max;
        Ok(Self {
            nodes,
            scale,
            r_max,
        })
    }

    pub fn elements(&self) -> usize {
        self.nodes.len() - 1
    }
}

impl Default for FeMesh {
    fn default() -> Self {
        Self::sinh(1.0, 1e4, 8000).expect("default mesh parameters are valid")
    }
}

/// Assembled forms of one angular sector. All matrices act on the free
/// nodes: Dirichlet at `r_max` always, and at `0` when `ℓ ≥ 1`.
#[derive(Debug, Clone)]
pub struct SectorOperator {
    pub ell: usize,
    pub mesh: FeMesh,
    /// `∫ |g'|² + ℓ(ℓ+3) g²/r² - (7/3)W^{4/3} g²` over `R^5`
    pub stiffness: SymBanded,
    /// `∫ |g'|² + ℓ(ℓ+3) g²/r²`
    pub h1_metric: SymBanded,
    /// `∫ g²`
    pub l2_metric: SymBanded,
    /// Stiffness on all nodes, for residuals of sampled functions.
    full_stiffness: SymBanded,
    first_free: usize,
    last_free: usize,
}

struct Forms {
    grad: SymBanded,
    mass: SymBanded,
    pot: SymBanded,
    cent: SymBanded,
}

fn assemble(nodes: &[f64], grad_cutoff: Option<f64>) -> Forms {
    let n = nodes.len();
    let (gx, gw) = gauss_legendre(ELEMENT_ORDER);
    let mut f = Forms {
        grad: SymBanded::zeros(n, 1),
        mass: SymBanded::zeros(n, 1),
        pot: SymBanded::zeros(n, 1),
        cent: SymBanded::zeros(n, 1),
    };
    for e in 0..n - 1 {
        let (a, b) = (nodes[e], nodes[e + 1]);
        let h = b - a;
        let mut m = [[0.0; 2]; 2];
        let mut p = [[0.0; 2]; 2];
        let mut c = [[0.0; 2]; 2];
        for (x, wq) in gx.iter().zip(&gw) {
            let r = a + 0.5 * h * (x + 1.0);
            let wr = 0.5 * h * wq;
            let phi = [(b - r) / h, (r - a) / h];
            let r2 = r * r;
            let r4 = r2 * r2;
            let v = potential(r);
            for i in 0..2 {
                for j in 0..2 {
                    m[i][j] += wr * r4 * phi[i] * phi[j];
                    p[i][j] += wr * v * r4 * phi[i] * phi[j];
                    c[i][j] += wr * r2 * phi[i] * phi[j];
                }
            }
        }
        // ∫ r⁴ over the (possibly truncated) element, exact
        let upper = grad_cutoff.map_or(b, |cut| cut.clamp(a, b));
        let g = (upper.powi(5) - a.powi(5)) / 5.0 / (h * h);
        for i in 0..2 {
            for j in i..2 {
                let (gi, gj) = (e + i, e + j);
                let sign = if i == j { 1.0 } else { -1.0 };
                f.grad.add(gi, gj, SPHERE_AREA * sign * g);
                f.mass.add(gi, gj, SPHERE_AREA * m[i][j]);
                f.pot.add(gi, gj, SPHERE_AREA * p[i][j]);
                f.cent.add(gi, gj, SPHERE_AREA * c[i][j]);
            }
        }
    }
    f
}

fn restrict(m: &SymBanded, first: usize, last: usize) -> SymBanded {
    let n = last - first + 1;
    let mut out = SymBanded::zeros(n, m.bandwidth());
    for i in 0..n {
        for k in 0..=m.bandwidth() {
            if i + k < n {
                out.add(i, i + k, m.get(first + i, first + i + k));
            }
        }
    }
    out
}

/// Assembles the sector forms for angular index `ell` on `mesh`.
pub fn build_sector(ell: usize, mesh: &FeMesh) -> Result<SectorOperator> {
    build_sector_with_cutoff(ell, mesh, None)
}

pub(crate) fn build_sector_with_cutoff(
    ell: usize,
    mesh: &FeMesh,
    grad_cutoff: Option<f64>,
) -> Result<SectorOperator> {
    if mesh.elements() < MIN_ELEMENTS {
        return Err(Error::Resolution {
            nodes: mesh.nodes.len(),
            required: MIN_ELEMENTS + 1,
        });
    }
    let f = assemble(&mesh.nodes, grad_cutoff);
    let cf = (ell * (ell + 3)) as f64;
    let h1_full = f.grad.combine(1.0, &f.cent, cf);
    let full_stiffness = h1_full.combine(1.0, &f.pot, -1.0);
    let first = if ell == 0 { 0 } else { 1 };
    let last = mesh.nodes.len() - 2;
    Ok(SectorOperator {
        ell,
        mesh: mesh.clone(),
        stiffness: restrict(&full_stiffness, first, last),
        h1_metric: restrict(&h1_full, first, last),
        l2_metric: restrict(&f.mass, first, last),
        full_stiffness,
        first_free: first,
        last_free: last,
    })
}

impl SectorOperator {
    pub fn free_nodes(&self) -> &[f64] {
        &self.mesh.nodes[self.first_free..=self.last_free]
    }

    pub fn dim(&self) -> usize {
        self.last_free - self.first_free + 1
    }

    /// Nodal interpolant on the free nodes.
    pub fn interpolate<F: Fn(f64) -> f64>(&self, f: F) -> Vec<f64> {
        self.free_nodes().iter().map(|&r| f(r)).collect()
    }

    /// `⟨x, y⟩_{L²}` of two free-node vectors.
    pub fn l2_inner(&self, x: &[f64], y: &[f64]) -> f64 {
        self.l2_metric.dot(x, y)
    }

    /// The form of `L` applied to the nodal samples of `f` on all nodes,
    /// tested against the free hat functions: `r_i = a(I_h f, φ_i)`.
    pub fn residual_of<F: Fn(f64) -> f64>(&self, f: F) -> Vec<f64> {
        let all: Vec<f64> = self.mesh.nodes.iter().map(|&r| f(r)).collect();
        let full = self.full_stiffness.matvec(&all);
        full[self.first_free..=self.last_free].to_vec()
    }

    /// `(rᵀ M⁻¹ r)^{1/2}`, the discrete dual `L²` norm.
    pub fn dual_norm(&self, r: &[f64]) -> Result<f64> {
        let lu = self.l2_metric.to_general().lu()?;
        let x = lu.solve(r);
        Ok(x.iter()
            .zip(r)
            .map(|(a, b)| a * b)
            .sum::<f64>()
            .max(0.0)
            .sqrt())
    }

    /// Discrete dual norm of the residual of a kernel candidate.
    pub fn kernel_residual<F: Fn(f64) -> f64>(&self, f: F) -> Result<f64> {
        self.dual_norm(&self.residual_of(f))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::eigen::smallest_eigenpairs;
    use crate::profiles::{dw, lambda_w, w};

    #[test]
    fn coarse_mesh_rejected() {
        let m = FeMesh::sinh(1.0, 100.0, 50).unwrap();
        assert!(matches!(build_sector(0, &m), Err(Error::Resolution { .. })));
    }

    #[test]
    fn mass_reproduces_ball_volume() {
        let m = FeMesh::sinh(1.0, 1.0, 200).unwrap();
        let f = assemble(&m.nodes, None);
        let ones = vec![1.0; m.nodes.len()];
        let vol = f.mass.dot(&ones, &ones);
        let exact = 8.0 * std::f64::consts::PI.powi(2) / 15.0;
        assert!(((vol - exact) / exact).abs() < 1e-12);
    }

    #[test]
    fn ground_state_quadratic_form() {
        // ⟨W, LW⟩ = -(4/3)⟨W, f(W)⟩
        let mesh = FeMesh::sinh(1.0, 1e3, 4000).unwrap();
        let op = build_sector(0, &mesh).unwrap();
        let x = op.interpolate(w);
        let q = op.stiffness.dot(&x, &x);
        let exact = -4.0 / 3.0
            * crate::numerics::quadrature::quad_radial(
                |r| w(r).powf(10.0 / 3.0),
                &Default::default(),
            )
            .unwrap();
        // W ~ r^{-3} is cut at r_max, which costs O(r_max^{-1}) in ∫|∇W|²-type terms
        assert!(((q - exact) / exact).abs() < 1e-3, "{q} vs {exact}");
    }

    #[test]
    fn kernel_residuals_shrink() {
        let mut prev = (f64::INFINITY, f64::INFINITY);
        for n in [500, 1000, 2000] {
            let mesh = FeMesh::sinh(1.0, 1e3, n).unwrap();
            let r0 = build_sector(0, &mesh)
                .unwrap()
                .kernel_residual(lambda_w)
                .unwrap();
            let r1 = build_sector(1, &mesh).unwrap().kernel_residual(dw).unwrap();
            assert!(r0 < prev.0 / 3.0 && r1 < prev.1 / 3.0, "{r0} {r1}");
            prev = (r0, r1);
        }
    }

    #[test]
    fn l2_sector_positive() {
        let mesh = FeMesh::sinh(1.0, 1e3, 1000).unwrap();
        let op = build_sector(2, &mesh).unwrap();
        let e = smallest_eigenpairs(&op.stiffness, &op.h1_metric, 1).unwrap();
        assert!(e.values[0] > 0.0);
    }
}
