use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::thread;

use disloc_core::elliptic::DiscreteLaplacian;
use disloc_core::{Error, Field2D, GridSpec, Profile1D, Result};

/// Minimum observed error ratio between successive grids.
pub const MIN_RATIO: f64 = 3.5;
/// Maximum relative error of a Dirichlet-to-Neumann eigenpair.
pub const MAX_MODE_ERROR: f64 = 0.01;
/// Cosine modes checked against the continuous Dirichlet-to-Neumann symbol.
pub const MODES: [usize; 2] = [1, 2];

/// Cell counts `Nx x Ny`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridSize {
    pub nx: usize,
    pub ny: usize,
}

impl FromStr for GridSize {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (a, b) = s
            .split_once('x')
            .ok_or_else(|| format!("grid `{s}` is not of the form NXxNY"))?;
        let parse = |v: &str| {
            v.trim()
                .parse::<usize>()
                .map_err(|_| format!("grid `{s}`: `{v}` is not a cell count"))
        };
        Ok(GridSize {
            nx: parse(a)?,
            ny: parse(b)?,
        })
    }
}

impl fmt::Display for GridSize {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.nx, self.ny)
    }
}

/// Parses `64x32,128x64,...`.
pub fn parse_grids(list: &str) -> Result<Vec<GridSize>, String> {
    list.split(',').map(str::parse).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridResult {
    pub size: GridSize,
    /// Max-norm error against `cos(k(x+L)) cosh(k y)`.
    pub error: f64,
    /// Relative eigenpair error for each entry of [`MODES`].
    pub mode_errors: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub grids: Vec<GridResult>,
    /// `error[i] / error[i + 1]` for successive grids.
    pub ratios: Vec<f64>,
}

impl ValidationReport {
    /// Ratios must hold between every pair of grids; the eigenpair bound is
    /// judged on the finest grid only (coarse grids are reported, not graded).
    pub fn passed(&self) -> bool {
        self.ratios.iter().all(|&r| r >= MIN_RATIO)
            && self
                .grids
                .last()
                .is_some_and(|g| g.mode_errors.iter().all(|&e| e <= MAX_MODE_ERROR))
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, g) in self.grids.iter().enumerate() {
            write!(f, "{:>9}  max error {:.3e}", g.size.to_string(), g.error)?;
            if k > 0 {
                write!(f, "  ratio {:.3}", self.ratios[k - 1])?;
            }
            for (m, e) in MODES.iter().zip(&g.mode_errors) {
                write!(f, "  mode {m} error {:.3}%", 100.0 * e)?;
            }
            writeln!(f)?;
        }
        write!(
            f,
            "{} (ratios >= {MIN_RATIO}, finest-grid mode errors <= {}%)",
            if self.passed() { "PASS" } else { "FAIL" },
            100.0 * MAX_MODE_ERROR
        )
    }
}

/// Wavenumber `m π / L` of the `m`-th checked cosine mode.
pub fn mode_wavenumber(grid: &GridSpec, m: usize) -> f64 {
    m as f64 * PI / grid.half_width()
}

/// Max-norm error of the discrete solve for the separable harmonic function
/// `cos(k(x+L)) cosh(k y)`, loaded by its own (spatially varying) traction.
pub fn separable_error(grid: GridSpec) -> Result<f64> {
    let (l, h) = (grid.half_width(), grid.height());
    let k = PI / (2.0 * l);
    let lap = DiscreteLaplacian::new(grid)?;
    let dirichlet = Profile1D::from_fn(grid, |x| (k * (x + l)).cos())?;
    let traction = Profile1D::from_fn(grid, |x| k * (k * h).sinh() * (k * (x + l)).cos())?;
    let u = lap.solve_with_traction(&dirichlet, &traction)?;
    let exact = Field2D::from_fn(grid, |x, y| (k * (x + l)).cos() * (k * y).cosh())?;
    Ok(u.max_abs_diff(&exact))
}

/// Relative error `|A v - lambda v|_inf / |lambda v|_inf` for the cosine
/// mode `v = cos(k (x + L))` and `lambda = -k tanh(k H)`.
pub fn mode_errors(grid: GridSpec, modes: &[usize]) -> Result<Vec<f64>> {
    let dtn = DiscreteLaplacian::new(grid)?.build_dtn()?;
    let l = grid.half_width();
    modes
        .iter()
        .map(|&m| {
            let k = mode_wavenumber(&grid, m);
            let lambda = -k * (k * grid.height()).tanh();
            let v = Profile1D::from_fn(grid, |x| (k * (x + l)).cos())?;
            let av = dtn.apply(v.values());
            let (num, den) = av.iter().zip(v.values()).fold((0.0f64, 0.0f64), |(n, d), (a, v)| {
                (n.max((a - lambda * v).abs()), d.max((lambda * v).abs()))
            });
            Ok(num / den)
        })
        .collect()
}

/// Runs the convergence and eigenpair checks on `sizes` (at least two,
/// each refining the previous one) on the domain `(-L, L) x (0, H)`.
pub fn validate(half_width: f64, height: f64, sizes: &[GridSize]) -> Result<ValidationReport> {
    if sizes.len() < 2 {
        return Err(Error::Argument("validation needs at least two grid sizes".into()));
    }
    let grids = sizes
        .iter()
        .map(|s| GridSpec::new(half_width, height, s.nx, s.ny).map_err(Error::from))
        .collect::<Result<Vec<_>>>()?;
    // independent grids, so solve them concurrently
    let results: Vec<Result<GridResult>> = thread::scope(|scope| {
        let handles: Vec<_> = grids
            .iter()
            .zip(sizes)
            .map(|(&grid, &size)| {
                scope.spawn(move || {
                    Ok(GridResult {
                        size,
                        error: separable_error(grid)?,
                        mode_errors: mode_errors(grid, &MODES)?,
                    })
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("validation worker panicked"))
            .collect()
    });
    let grids = results.into_iter().collect::<Result<Vec<_>>>()?;
    let ratios = grids.windows(2).map(|w| w[0].error / w[1].error).collect();
    Ok(ValidationReport { grids, ratios })
}
