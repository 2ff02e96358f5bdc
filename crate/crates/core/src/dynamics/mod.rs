//! Evolution of the slip profile `u_S(x, t)` on the bottom boundary:
//!
//! ```text
//! alpha u_t = eps u_xx - W'(u) + gamma (A u_S + (g(t) / mu) r)
//! ```
//!
//! where `A` and `r` come from the precomputed [`DtnMap`]. The ends of the
//! slip boundary carry homogeneous Neumann conditions.

pub mod integrator;
pub mod potential;

use std::sync::Arc;

use crate::config::{Config, GridSpec, InitialCondition, LoadSpec, ModelParams};
use crate::elliptic::{elastic_energy, DiscreteLaplacian, DtnMap};
use crate::error::{Error, Result};
use crate::field::{trapezoid, Field2D, Profile1D};

use integrator::{Bdf, BdfOptions, OdeSystem, StepStats};
pub use potential::{phase_well, potential_dw, potential_w, Potential};

/// Second difference with ghost-node reflection at both ends.
fn second_difference(u: &[f64], dx: f64, out: &mut [f64]) {
    let n = u.len();
    let inv = 1.0 / (dx * dx);
    out[0] = 2.0 * (u[1] - u[0]) * inv;
    out[n - 1] = 2.0 * (u[n - 2] - u[n - 1]) * inv;
    for i in 1..n - 1 {
        out[i] = (u[i + 1] - 2.0 * u[i] + u[i - 1]) * inv;
    }
}

/// Everything needed to evaluate the slip dynamics and its energies.
///
/// The operators are shared read-only, so several models (for example a run
/// and its mirror image) can reuse one factorization.
#[derive(Debug, Clone)]
pub struct Model {
    params: ModelParams,
    load: LoadSpec,
    potential: Potential,
    laplacian: Arc<DiscreteLaplacian>,
    dtn: Arc<DtnMap>,
}

impl Model {
    /// Factors the Laplacian and builds the Dirichlet-to-Neumann map for `grid`.
    pub fn new(grid: GridSpec, params: ModelParams, load: LoadSpec) -> Result<Self> {
        let laplacian = Arc::new(DiscreteLaplacian::new(grid)?);
        let dtn = Arc::new(laplacian.build_dtn()?);
        Self::with_operators(params, load, laplacian, dtn)
    }

    pub fn from_config(cfg: &Config) -> Result<Self> {
        Self::new(cfg.grid, cfg.params, cfg.load.clone())
    }

    pub fn with_operators(
        params: ModelParams,
        load: LoadSpec,
        laplacian: Arc<DiscreteLaplacian>,
        dtn: Arc<DtnMap>,
    ) -> Result<Self> {
        params.validate()?;
        if laplacian.grid() != dtn.grid() {
            return Err(Error::Grid("Laplacian and DtN map were built on different grids".into()));
        }
        Ok(Self {
            potential: Potential::new(params.beta, params.b),
            params,
            load,
            laplacian,
            dtn,
        })
    }

    /// Same operators with a different load or parameters.
    pub fn with_load(&self, load: LoadSpec) -> Self {
        Self {
            load,
            ..self.clone()
        }
    }

    pub fn grid(&self) -> &GridSpec {
        self.dtn.grid()
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn load(&self) -> &LoadSpec {
        &self.load
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    pub fn dtn(&self) -> &DtnMap {
        &self.dtn
    }

    pub fn laplacian(&self) -> &DiscreteLaplacian {
        &self.laplacian
    }

    pub fn initial_profile(&self, ic: &InitialCondition) -> Profile1D {
        let b = self.params.b;
        Profile1D::from_fn(*self.grid(), |x| ic.value_at(x, b)).expect("initial condition is finite")
    }

    pub fn rhs_into(&self, u: &[f64], t: f64, out: &mut [f64]) -> Result<()> {
        let p = &self.params;
        let g_over_mu = self.load.eval(t)? / p.mu;
        let gamma = p.gamma();
        second_difference(u, self.grid().dx(), out);
        let mut uy = vec![0.0; u.len()];
        self.dtn.apply_into(u, &mut uy);
        let r = self.dtn.traction_response().values();
        for i in 0..u.len() {
            let force = p.eps * out[i] - self.potential.derivative(u[i]) + gamma * (uy[i] + g_over_mu * r[i]);
            out[i] = force / p.alpha;
        }
        Ok(())
    }

    /// Slip velocity `u_t` for the profile `u` at time `t`.
    pub fn rhs(&self, u: &Profile1D, t: f64) -> Result<Profile1D> {
        let mut out = vec![0.0; u.len()];
        self.rhs_into(u.values(), t, &mut out)?;
        Profile1D::new(*self.grid(), out)
    }

    /// Row-major Jacobian of [`Model::rhs`] with respect to the profile.
    pub fn jacobian_into(&self, u: &[f64], out: &mut [f64]) {
        let p = &self.params;
        let m = u.len();
        let dx = self.grid().dx();
        let c = p.eps / (dx * dx);
        let gamma = p.gamma();
        for (o, a) in out.iter_mut().zip(self.dtn.matrix()) {
            *o = gamma * a;
        }
        for i in 0..m {
            let row = &mut out[i * m..(i + 1) * m];
            row[i] += -2.0 * c - self.potential.second_derivative(u[i]);
            if i == 0 {
                row[1] += 2.0 * c;
            } else if i == m - 1 {
                row[m - 2] += 2.0 * c;
            } else {
                row[i - 1] += c;
                row[i + 1] += c;
            }
            row.iter_mut().for_each(|v| *v /= p.alpha);
        }
    }

    /// Interface energy `∫ eps/2 |φ_x|^2 + beta F(φ) dx` with `φ = 2u/b`.
    ///
    /// `|φ_x|^2` is integrated cell by cell from the difference across each
    /// cell, the potential by the trapezoid rule. Its gradient is exactly the
    /// discrete `-eps u_xx + W'(u)` used by [`Model::rhs`], scaled by `4/b^2`.
    pub fn interface_energy(&self, u: &Profile1D) -> f64 {
        interface_energy(u, &self.params)
    }

    /// Harmonic extension of `u` under the load at time `t`.
    pub fn displacement_field(&self, u: &Profile1D, t: f64) -> Result<Field2D> {
        self.laplacian.solve(u, self.load.eval(t)?, self.params.mu)
    }

    /// Instantaneous `-alpha (4/b^2) ∫ u_t^2 dx`.
    pub fn dissipation_rate(&self, u_t: &[f64]) -> f64 {
        let p = &self.params;
        let sq: Vec<f64> = u_t.iter().map(|v| v * v).collect();
        -p.alpha * 4.0 / (p.b * p.b) * trapezoid(&sq, self.grid().dx())
    }

    /// Energies of the profile `u` at time `t`, together with the displacement field.
    pub fn energy_with_field(&self, u: &Profile1D, t: f64) -> Result<(EnergyReport, Field2D)> {
        let g = self.load.eval(t)?;
        let field = self.laplacian.solve(u, g, self.params.mu)?;
        let e0 = self.interface_energy(u);
        let e1 = elastic_energy(&field, &Profile1D::constant(*self.grid(), g), self.params.mu);
        let u_t = self.rhs(u, t)?;
        Ok((
            EnergyReport {
                t,
                e0,
                e1,
                e_total: e0 + e1,
                dissipation_rate: self.dissipation_rate(u_t.values()),
                dissipation_lhs: None,
                dissipation_rhs: None,
            },
            field,
        ))
    }

    pub fn total_energy(&self, u: &Profile1D, t: f64) -> Result<EnergyReport> {
        Ok(self.energy_with_field(u, t)?.0)
    }
}

impl OdeSystem for Model {
    fn dim(&self) -> usize {
        self.grid().nx() + 1
    }

    fn rhs(&self, t: f64, y: &[f64], out: &mut [f64]) -> Result<()> {
        self.rhs_into(y, t, out)
    }

    fn jacobian(&self, _t: f64, y: &[f64], out: &mut [f64]) -> Result<()> {
        self.jacobian_into(y, out);
        Ok(())
    }

    fn running_integrand(&self, _t: f64, _y: &[f64], ydot: &[f64]) -> f64 {
        self.dissipation_rate(ydot)
    }
}

/// Free-function form of [`Model::rhs`].
pub fn rhs(u: &Profile1D, t: f64, model: &Model) -> Result<Profile1D> {
    model.rhs(u, t)
}

/// Interface energy of the slip profile `u` (see [`Model::interface_energy`]).
pub fn interface_energy(u: &Profile1D, params: &ModelParams) -> f64 {
    let dx = u.grid().dx();
    let scale = 2.0 / params.b;
    let v = u.values();
    let grad: f64 = v
        .windows(2)
        .map(|w| {
            let d = scale * (w[1] - w[0]) / dx;
            d * d
        })
        .sum::<f64>()
        * dx;
    let wells: Vec<f64> = v.iter().map(|&s| params.beta * phase_well(scale * s)).collect();
    0.5 * params.eps * grad + trapezoid(&wells, dx)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyReport {
    pub t: f64,
    pub e0: f64,
    pub e1: f64,
    pub e_total: f64,
    /// `-alpha (4/b^2) ∫ u_t^2 dx` at `t`.
    pub dissipation_rate: f64,
    /// `(E(t_k) - E(t_{k-1})) / (t_k - t_{k-1})` over the interval ending at this sample.
    pub dissipation_lhs: Option<f64>,
    /// Time average of the dissipation rate over the same interval.
    pub dissipation_rhs: Option<f64>,
}

/// Leftmost crossing of the level `b/4`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crossing {
    pub x: f64,
    /// Number of crossings found; more than one flags a split interface.
    pub count: usize,
}

/// Position of the dislocation: where the linearly interpolated profile
/// crosses `b/4`, scanning from the left.
pub fn track_position(u: &Profile1D, params: &ModelParams) -> Option<Crossing> {
    let level = params.b / 4.0;
    let grid = u.grid();
    let dx = grid.dx();
    let s: Vec<f64> = u.values().iter().map(|v| v - level).collect();
    let mut crossings = Vec::new();
    for i in 0..s.len() - 1 {
        let (a, c) = (s[i], s[i + 1]);
        if a == 0.0 {
            // a node exactly on the level counts once, and only between opposite signs
            let before = (0..i).rev().map(|k| s[k]).find(|v| *v != 0.0);
            let after = s[i + 1..].iter().copied().find(|v| *v != 0.0);
            if let (Some(p), Some(q)) = (before, after) {
                if p * q < 0.0 && s[i - 1] != 0.0 {
                    crossings.push(grid.x(i));
                }
            }
        } else if a * c < 0.0 {
            crossings.push(grid.x(i) + dx * a / (a - c));
        }
    }
    crossings.first().map(|&x| Crossing {
        x,
        count: crossings.len(),
    })
}

/// Evolving slip state.
#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub t: f64,
    pub u: Profile1D,
    pub stats: StepStats,
}

impl SimState {
    pub fn new(u: Profile1D) -> Self {
        Self {
            t: 0.0,
            u,
            stats: StepStats::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub t: f64,
    pub position: Option<Crossing>,
    pub energy: EnergyReport,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TimeSeries {
    pub records: Vec<Record>,
}

impl TimeSeries {
    pub fn times(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.t).collect()
    }

    pub fn positions(&self) -> Vec<Option<f64>> {
        self.records.iter().map(|r| r.position.map(|c| c.x)).collect()
    }

    pub fn energies(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.energy.e_total).collect()
    }
}

/// What an observer sees at each output time.
#[derive(Debug, Clone, Copy)]
pub struct Snapshot<'a> {
    pub index: usize,
    pub t: f64,
    pub profile: &'a Profile1D,
    pub field: &'a Field2D,
    pub record: &'a Record,
}

pub trait Observer {
    fn observe(&mut self, snapshot: &Snapshot<'_>) -> Result<()>;
}

impl<F: FnMut(&Snapshot<'_>) -> Result<()>> Observer for F {
    fn observe(&mut self, snapshot: &Snapshot<'_>) -> Result<()> {
        self(snapshot)
    }
}

/// Observer that ignores everything.
pub struct NoObserver;

impl Observer for NoObserver {
    fn observe(&mut self, _snapshot: &Snapshot<'_>) -> Result<()> {
        Ok(())
    }
}

/// Integrates from `state0` through `times` with the adaptive BDF scheme,
/// recording position and energies at each output time.
pub fn integrate(
    model: &Model,
    state0: &SimState,
    times: &[f64],
    opts: &BdfOptions,
    observer: &mut dyn Observer,
) -> Result<(TimeSeries, SimState)> {
    if let Some(w) = times.windows(2).find(|w| w[1] <= w[0]) {
        return Err(Error::Argument(format!("output times must increase, got {} then {}", w[0], w[1])));
    }
    if times.first().is_some_and(|&t| t < state0.t) {
        return Err(Error::Argument("output times precede the initial state".into()));
    }
    let grid = *model.grid();
    let mut series = TimeSeries::default();
    let mut last_integral = 0.0;
    let bdf = Bdf::new(*opts);
    let (y, stats) = bdf.integrate(model, state0.t, state0.u.values(), times, |p| {
        let profile = Profile1D::new(grid, p.y.to_vec())?;
        let (mut energy, field) = model.energy_with_field(&profile, p.t)?;
        if let Some(prev) = series.records.last() {
            let dt = p.t - prev.t;
            energy.dissipation_lhs = Some((energy.e_total - prev.energy.e_total) / dt);
            energy.dissipation_rhs = Some((p.integral - last_integral) / dt);
        }
        last_integral = p.integral;
        let record = Record {
            t: p.t,
            position: track_position(&profile, model.params()),
            energy,
        };
        observer.observe(&Snapshot {
            index: p.index,
            t: p.t,
            profile: &profile,
            field: &field,
            record: &record,
        })?;
        series.records.push(record);
        Ok(())
    })?;
    let final_t = times.last().copied().unwrap_or(state0.t);
    let mut total = stats;
    total.accepted += state0.stats.accepted;
    total.rejected += state0.stats.rejected;
    total.newton_iterations += state0.stats.newton_iterations;
    total.newton_failures += state0.stats.newton_failures;
    total.jacobian_evaluations += state0.stats.jacobian_evaluations;
    total.factorizations += state0.stats.factorizations;
    Ok((
        series,
        SimState {
            t: final_t,
            u: Profile1D::new(grid, y)?,
            stats: total,
        },
    ))
}
