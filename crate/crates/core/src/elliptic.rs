//! Mixed boundary-value problem for the anti-plane displacement:
//!
//! ```text
//! Δu = 0        in (-L, L) x (0, H)
//! u_x = 0       on x = ±L
//! mu u_y = g    on y = H
//! u = u_S       on y = 0
//! ```
//!
//! Discretized with the 5-point stencil on nodes; Neumann sides use ghost-node
//! reflection. Scaling each nodal equation by the trapezoid weights of its
//! dual cell (`1/2` on Neumann sides) gives a symmetric positive definite
//! system, factored once with a sparse Cholesky.

use faer::sparse::linalg::solvers::Llt;
use faer::sparse::{SparseColMat, Triplet};
use faer::prelude::*;
use faer::{MatMut, Side};

use crate::config::GridSpec;
use crate::error::{Error, Result};
use crate::field::{trapezoid, Field2D, Profile1D};

/// Relative residual accepted from the direct solver.
pub const SOLVER_RESIDUAL_TOL: f64 = 1e-10;

/// Columns solved per batch when assembling the Dirichlet-to-Neumann map.
const DTN_BATCH: usize = 32;

/// Trapezoid weight of node `i` out of `0..=n`.
#[inline]
fn end_weight(i: usize, n: usize) -> f64 {
    if i == 0 || i == n {
        0.5
    } else {
        1.0
    }
}

/// Factored 5-point operator for the nodes above the slip boundary.
///
/// Unknowns are the nodes `(i, j)` with `j >= 1`, ordered `(j - 1) * (nx + 1) + i`.
/// The slip boundary `j = 0` (corners included) is Dirichlet data.
pub struct DiscreteLaplacian {
    grid: GridSpec,
    matrix: SparseColMat<usize, f64>,
    factor: Llt<usize, f64>,
}

impl std::fmt::Debug for DiscreteLaplacian {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DiscreteLaplacian")
            .field("grid", &self.grid)
            .field("unknowns", &self.unknown_count())
            .finish()
    }
}

impl DiscreteLaplacian {
    pub fn new(grid: GridSpec) -> Result<Self> {
        let (nx, ny) = (grid.nx(), grid.ny());
        let cx = grid.dy() / grid.dx();
        let cy = grid.dx() / grid.dy();
        let idx = |i: usize, j: usize| (j - 1) * (nx + 1) + i;
        let n = (nx + 1) * ny;

        let mut diag = vec![0.0; n];
        let mut triplets = Vec::with_capacity(5 * n);
        let mut edge = |a: usize, b: usize, c: f64, diag: &mut Vec<f64>| {
            diag[a] += c;
            diag[b] += c;
            triplets.push(Triplet::new(a, b, -c));
            triplets.push(Triplet::new(b, a, -c));
        };
        for j in 1..=ny {
            let wy = end_weight(j, ny);
            for i in 0..nx {
                edge(idx(i, j), idx(i + 1, j), cx * wy, &mut diag);
            }
        }
        for i in 0..=nx {
            let wx = end_weight(i, nx);
            // edge to the Dirichlet row
            diag[idx(i, 1)] += cy * wx;
            for j in 1..ny {
                edge(idx(i, j), idx(i, j + 1), cy * wx, &mut diag);
            }
        }
        triplets.extend(diag.iter().enumerate().map(|(k, &d)| Triplet::new(k, k, d)));

        let matrix = SparseColMat::try_new_from_triplets(n, n, &triplets)
            .map_err(|e| Error::Solver(format!("assembly failed: {e:?}")))?;
        let factor = matrix
            .sp_cholesky(Side::Lower)
            .map_err(|e| Error::Solver(format!("Cholesky factorization failed: {e:?}")))?;
        Ok(Self {
            grid,
            matrix,
            factor,
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn unknown_count(&self) -> usize {
        (self.grid.nx() + 1) * self.grid.ny()
    }

    /// Right-hand side for slip data `dirichlet` and nodal normal traction
    /// `traction[i] = g(x_i) / mu` on the top boundary.
    pub fn assemble_rhs(&self, dirichlet: &[f64], traction: &[f64]) -> Vec<f64> {
        let (nx, ny) = (self.grid.nx(), self.grid.ny());
        let cy = self.grid.dx() / self.grid.dy();
        let dx = self.grid.dx();
        let mut rhs = vec![0.0; self.unknown_count()];
        for i in 0..=nx {
            let wx = end_weight(i, nx);
            rhs[i] += cy * wx * dirichlet[i];
            rhs[(ny - 1) * (nx + 1) + i] += dx * wx * traction[i];
        }
        rhs
    }

    /// Operator applied to a vector of unknowns.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; v.len()];
        let m = self.matrix.as_ref();
        for (col, &vc) in v.iter().enumerate().take(m.ncols()) {
            let rows = m.row_idx_of_col(col);
            let vals = m.val_of_col(col);
            for (r, a) in rows.zip(vals) {
                out[r] += a * vc;
            }
        }
        out
    }

    /// Discrete energy `v·Kv / 2 - rhs·v`; the solution of `Kv = rhs` is its unique minimizer.
    pub fn quadratic_functional(&self, v: &[f64], rhs: &[f64]) -> f64 {
        let kv = self.apply(v);
        let quad: f64 = v.iter().zip(&kv).map(|(a, b)| a * b).sum();
        let lin: f64 = v.iter().zip(rhs).map(|(a, b)| a * b).sum();
        0.5 * quad - lin
    }

    fn residual_check(&self, x: &[f64], rhs: &[f64]) -> Result<()> {
        let kx = self.apply(x);
        let res = kx
            .iter()
            .zip(rhs)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        let scale = rhs.iter().map(|b| b * b).sum::<f64>().sqrt();
        if res > SOLVER_RESIDUAL_TOL * scale.max(f64::MIN_POSITIVE) && res > 0.0 {
            return Err(Error::Solver(format!(
                "relative residual {:.3e} exceeds {SOLVER_RESIDUAL_TOL:e}",
                res / scale
            )));
        }
        Ok(())
    }

    /// Solves for slip data and a nodal normal traction profile (`g / mu`).
    pub fn solve_with_traction(&self, dirichlet: &Profile1D, traction: &Profile1D) -> Result<Field2D> {
        self.check_grid(dirichlet.grid())?;
        self.check_grid(traction.grid())?;
        let rhs = self.assemble_rhs(dirichlet.values(), traction.values());
        let mut x = rhs.clone();
        let n = x.len();
        self.factor
            .solve_in_place(MatMut::from_column_major_slice_mut(&mut x, n, 1));
        self.residual_check(&x, &rhs)?;
        let mut values = Vec::with_capacity(self.grid.node_count());
        values.extend_from_slice(dirichlet.values());
        values.extend_from_slice(&x);
        Field2D::new(self.grid, values)
    }

    /// Solves with a spatially uniform traction `g` and shear modulus `mu`.
    pub fn solve(&self, dirichlet: &Profile1D, g: f64, mu: f64) -> Result<Field2D> {
        if mu.is_nan() || mu <= 0.0 {
            return Err(Error::Argument(format!("shear modulus must be positive, got {mu}")));
        }
        self.solve_with_traction(dirichlet, &Profile1D::constant(self.grid, g / mu))
    }

    fn check_grid(&self, other: &GridSpec) -> Result<()> {
        if *other != self.grid {
            return Err(Error::Grid(format!(
                "profile grid {other:?} does not match operator grid {:?}",
                self.grid
            )));
        }
        Ok(())
    }

    /// Dirichlet-to-Neumann map, assembled column by column from `nx + 2`
    /// solves with the shared factorization.
    pub fn build_dtn(&self) -> Result<DtnMap> {
        let nx = self.grid.nx();
        let m = nx + 1;
        let n = self.unknown_count();
        let dy = self.grid.dy();
        let mut matrix = vec![0.0; m * m];
        let mut response = vec![0.0; m];
        let zeros = vec![0.0; m];

        // columns 0..m are unit slip data, column m is a unit traction
        let mut start = 0;
        while start <= m {
            let end = (start + DTN_BATCH).min(m + 1);
            let width = end - start;
            let mut block = vec![0.0; n * width];
            for (c, col) in (start..end).enumerate() {
                let rhs = if col < m {
                    let mut unit = zeros.clone();
                    unit[col] = 1.0;
                    self.assemble_rhs(&unit, &zeros)
                } else {
                    self.assemble_rhs(&zeros, &vec![1.0; m])
                };
                block[c * n..(c + 1) * n].copy_from_slice(&rhs);
            }
            self.factor
                .solve_in_place(MatMut::from_column_major_slice_mut(&mut block, n, width));
            for (c, col) in (start..end).enumerate() {
                let sol = &block[c * n..(c + 1) * n];
                for i in 0..m {
                    let u0 = if col == i { 1.0 } else { 0.0 };
                    let (u1, u2) = (sol[i], sol[m + i]);
                    let uy = (-3.0 * u0 + 4.0 * u1 - u2) / (2.0 * dy);
                    if col < m {
                        matrix[i * m + col] = uy;
                    } else {
                        response[i] = uy;
                    }
                }
            }
            start = end;
        }
        Ok(DtnMap {
            grid: self.grid,
            matrix,
            response: Profile1D::new(self.grid, response)?,
        })
    }
}

/// Convenience wrapper: factor and solve once.
pub fn solve_laplace(grid: GridSpec, dirichlet: &Profile1D, g: f64, mu: f64) -> Result<Field2D> {
    DiscreteLaplacian::new(grid)?.solve(dirichlet, g, mu)
}

/// One-sided second-order `u_y` on the slip boundary:
/// `(-3 u_{i,0} + 4 u_{i,1} - u_{i,2}) / (2 dy)`.
pub fn normal_derivative_s(field: &Field2D) -> Profile1D {
    let grid = *field.grid();
    let dy = grid.dy();
    let (r0, r1, r2) = (field.row(0), field.row(1), field.row(2));
    let values = (0..=grid.nx())
        .map(|i| (-3.0 * r0[i] + 4.0 * r1[i] - r2[i]) / (2.0 * dy))
        .collect();
    Profile1D::new(grid, values).expect("finite field gives finite derivative")
}

/// Discrete Dirichlet-to-Neumann operator on the slip boundary:
/// `u_y(x, 0) = A u_S + (g / mu) r`.
#[derive(Debug, Clone, PartialEq)]
pub struct DtnMap {
    grid: GridSpec,
    /// Row-major `(nx + 1) x (nx + 1)`.
    matrix: Vec<f64>,
    response: Profile1D,
}

impl DtnMap {
    pub fn build(grid: GridSpec) -> Result<Self> {
        DiscreteLaplacian::new(grid)?.build_dtn()
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn size(&self) -> usize {
        self.grid.nx() + 1
    }

    /// Row-major matrix entries.
    pub fn matrix(&self) -> &[f64] {
        &self.matrix
    }

    #[inline]
    pub fn entry(&self, row: usize, col: usize) -> f64 {
        self.matrix[row * self.size() + col]
    }

    /// `u_y` on the slip boundary per unit `g / mu` with zero slip.
    pub fn traction_response(&self) -> &Profile1D {
        &self.response
    }

    /// `out = A v`.
    pub fn apply_into(&self, v: &[f64], out: &mut [f64]) {
        let m = self.size();
        for (row, o) in self.matrix.chunks_exact(m).zip(out.iter_mut()) {
            *o = row.iter().zip(v).map(|(a, b)| a * b).sum();
        }
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; v.len()];
        self.apply_into(v, &mut out);
        out
    }

    /// `u_y` on the slip boundary for slip `u_s` under uniform traction `g_over_mu`.
    pub fn normal_derivative(&self, u_s: &[f64], g_over_mu: f64) -> Vec<f64> {
        let mut out = self.apply(u_s);
        for (o, r) in out.iter_mut().zip(self.response.values()) {
            *o += g_over_mu * r;
        }
        out
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.matrix.iter().fold(0.0, |m, a| m.max(a.abs()))
    }

    /// Trapezoid weights `w` of the slip nodes; `diag(w) A` is symmetric.
    pub fn weights(&self) -> Vec<f64> {
        let m = self.size();
        (0..m).map(|i| end_weight(i, m - 1) * self.grid.dx()).collect()
    }

    /// `max |w_i A_ij - w_j A_ji| / max |w_i A_ij|`.
    pub fn weighted_asymmetry(&self) -> f64 {
        let m = self.size();
        let w = self.weights();
        let mut diff = 0.0f64;
        let mut scale = 0.0f64;
        for i in 0..m {
            for j in 0..m {
                let a = w[i] * self.entry(i, j);
                diff = diff.max((a - w[j] * self.entry(j, i)).abs());
                scale = scale.max(a.abs());
            }
        }
        diff / scale
    }

    /// Trapezoid inner product `(v, A v)`, the rate of change of the elastic
    /// energy per unit slip velocity.
    pub fn weighted_form(&self, v: &[f64]) -> f64 {
        let av = self.apply(v);
        let w = self.weights();
        v.iter().zip(&av).zip(&w).map(|((a, b), w)| w * a * b).sum()
    }
}

/// Elastic energy `mu ∬|∇u|² - 2 ∫_{y=H} g u`.
///
/// The gradient is evaluated once per cell from the averages of its two
/// `x`-edge and two `y`-edge differences; the boundary integral uses the
/// trapezoid rule.
pub fn elastic_energy(field: &Field2D, g_values: &Profile1D, mu: f64) -> f64 {
    let grid = field.grid();
    let (dx, dy) = (grid.dx(), grid.dy());
    let mut grad_sq = 0.0;
    for j in 0..grid.ny() {
        let (lo, hi) = (field.row(j), field.row(j + 1));
        for i in 0..grid.nx() {
            let gx = ((lo[i + 1] - lo[i]) + (hi[i + 1] - hi[i])) / (2.0 * dx);
            let gy = ((hi[i] - lo[i]) + (hi[i + 1] - lo[i + 1])) / (2.0 * dy);
            grad_sq += gx * gx + gy * gy;
        }
    }
    grad_sq *= dx * dy;
    let work: Vec<f64> = field
        .row(grid.ny())
        .iter()
        .zip(g_values.values())
        .map(|(u, g)| g * u)
        .collect();
    mu * grad_sq - 2.0 * trapezoid(&work, dx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn small() -> GridSpec {
        GridSpec::new(2.0, 2.0, 16, 8).unwrap()
    }

    #[test]
    fn zero_data_gives_zero_field() {
        let lap = DiscreteLaplacian::new(small()).unwrap();
        let u = lap.solve(&Profile1D::constant(small(), 0.0), 0.0, 10.0).unwrap();
        assert!(u.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn uniform_traction_gives_linear_field() {
        let grid = small();
        let lap = DiscreteLaplacian::new(grid).unwrap();
        let u = lap.solve(&Profile1D::constant(grid, 0.0), 0.5, 10.0).unwrap();
        let exact = Field2D::from_fn(grid, |_, y| 0.05 * y).unwrap();
        assert!(u.max_abs_diff(&exact) < 1e-12);
    }

    #[test]
    fn operator_is_symmetric() {
        let lap = DiscreteLaplacian::new(small()).unwrap();
        let n = lap.unknown_count();
        let mut rng = StdRng::seed_from_u64(7);
        let a: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let b: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let ab: f64 = a.iter().zip(lap.apply(&b)).map(|(x, y)| x * y).sum();
        let ba: f64 = b.iter().zip(lap.apply(&a)).map(|(x, y)| x * y).sum();
        assert_relative_eq!(ab, ba, max_relative = 1e-13);
    }

    #[test]
    fn constants_are_harmonic() {
        let grid = small();
        let lap = DiscreteLaplacian::new(grid).unwrap();
        let u = lap.solve(&Profile1D::constant(grid, 0.7), 0.0, 1.0).unwrap();
        assert!(u.values().iter().all(|v| (v - 0.7).abs() < 1e-12));
    }

    #[test]
    fn rejects_mismatched_grid_and_bad_mu() {
        let lap = DiscreteLaplacian::new(small()).unwrap();
        let other = GridSpec::new(2.0, 2.0, 8, 8).unwrap();
        assert!(matches!(
            lap.solve(&Profile1D::constant(other, 0.0), 0.0, 1.0),
            Err(Error::Grid(_))
        ));
        assert!(matches!(
            lap.solve(&Profile1D::constant(small(), 0.0), 0.0, 0.0),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn normal_derivative_stencil() {
        let grid = GridSpec::new(1.0, 0.37, 4, 5).unwrap();
        let lin = Field2D::from_fn(grid, |_, y| 0.05 * y).unwrap();
        assert!(normal_derivative_s(&lin).values().iter().all(|v| (v - 0.05).abs() < 1e-15));
        let c = Field2D::from_fn(grid, |_, _| 3.0).unwrap();
        assert!(normal_derivative_s(&c).values().iter().all(|&v| v == 0.0));
        let quad = Field2D::from_fn(grid, |_, y| y * y).unwrap();
        assert!(normal_derivative_s(&quad).values().iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn elastic_energy_examples() {
        let grid = GridSpec::new(2.0, 2.0, 16, 8).unwrap();
        let zero = Field2D::zeros(grid);
        assert_eq!(elastic_energy(&zero, &Profile1D::constant(grid, 0.0), 10.0), 0.0);
        let lin = Field2D::from_fn(grid, |_, y| 0.05 * y).unwrap();
        let e = elastic_energy(&lin, &Profile1D::constant(grid, 0.5), 10.0);
        assert_relative_eq!(e, -0.2, max_relative = 1e-13);
        let c = Field2D::from_fn(grid, |_, _| 1.3).unwrap();
        assert_eq!(elastic_energy(&c, &Profile1D::constant(grid, 0.0), 10.0), 0.0);
    }

    #[test]
    fn dtn_reproduces_direct_solves() {
        let grid = small();
        let lap = DiscreteLaplacian::new(grid).unwrap();
        let dtn = lap.build_dtn().unwrap();
        let mut rng = StdRng::seed_from_u64(11);
        for _ in 0..5 {
            let d = Profile1D::from_fn(grid, |_| rng.random_range(-1.0..1.0)).unwrap();
            let g = rng.random_range(-1.0..1.0);
            let mu = rng.random_range(0.5..20.0);
            let direct = normal_derivative_s(&lap.solve(&d, g, mu).unwrap());
            let mapped = dtn.normal_derivative(d.values(), g / mu);
            let scale = direct.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
            for (a, b) in direct.values().iter().zip(&mapped) {
                assert!((a - b).abs() <= 1e-9 * scale, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn dtn_kernel_and_response() {
        let grid = small();
        let dtn = DtnMap::build(grid).unwrap();
        let ones = vec![1.0; dtn.size()];
        let a1 = dtn.apply(&ones);
        assert!(a1.iter().all(|v| v.abs() <= 1e-9 * dtn.max_abs_entry()));
        let r = dtn.traction_response();
        assert!(r.values().iter().all(|v| (0.05 * v - 0.05).abs() < 1e-12));
    }
}
