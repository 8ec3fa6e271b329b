//! Torus-invariant J-flow `u̇ = γ − ½tr((D²u)⁻¹D²v)` on a surface.
//!
//! The unknown is `ψ = u − u_ref`, sampled on a grid uniform in the logistic
//! variable `t = 1/(1+e^{−x})` per axis.  `ψ` extends smoothly to the toric
//! boundary, so central differences in `t` stay second order up to the edge of
//! the box, while `D²u_ref` is exact.

use super::{FlowDiagnostics, FlowPayload, FlowState};
use crate::error::{Error, Result};
use crate::geometry::{reference_potential, GridPotential, Hess, PotentialField, Sample};
use crate::quantisation::Problem;

/// The box edge sits where `t = δ` or `1 − δ`.
pub const BOX_DELTA: f64 = 1e-6;

const CFL: f64 = 0.4;
const MAX_HALVINGS: u32 = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    /// boundary values held fixed
    Dirichlet,
    /// boundary velocity extrapolated linearly from the interior
    Outflow,
}

#[derive(Debug, Clone)]
pub struct GridFlow {
    /// logistic node coordinates, shared by both axes
    pub t: Vec<f64>,
    /// `u − u_ref` at the nodes, index `i·n + j`
    pub psi: Vec<f64>,
    pub gamma: f64,
    pub boundary: Boundary,
    reference: PotentialField,
    x: Vec<[f64; 2]>,
    ref_hess: Vec<Hess>,
    chi_hess: Vec<Hess>,
}

fn logit(t: f64) -> f64 {
    (t / (1.0 - t)).ln()
}

/// Real 2×2 inverse of a positive definite invariant Hessian.
fn inverse(u: &Hess) -> Hess {
    let d = u.det(2);
    Hess::real(u.b / d, u.a / d, -u.cr / d)
}

fn product(p: &Hess, q: &Hess) -> [[f64; 2]; 2] {
    [[p.a * q.a + p.cr * q.cr, p.a * q.cr + p.cr * q.b], [p.cr * q.a + p.b * q.cr, p.cr * q.cr + p.b * q.b]]
}

impl GridFlow {
    /// Samples `u0` on an `nodes × nodes` grid.
    pub fn new(problem: &Problem, u0: &PotentialField, nodes: usize, boundary: Boundary) -> Result<Self> {
        if problem.dim() != 2 {
            return Err(Error::Input("the continuum flow is implemented on surfaces only".into()));
        }
        if nodes < 5 {
            return Err(Error::Input(format!("grid needs at least 5 nodes per axis, got {nodes}")));
        }
        if !u0.is_invariant() {
            return Err(Error::Input("continuum start must be torus-invariant".into()));
        }
        let t: Vec<f64> =
            (0..nodes).map(|i| BOX_DELTA + i as f64 * (1.0 - 2.0 * BOX_DELTA) / (nodes - 1) as f64).collect();
        let reference = reference_potential(&problem.polytope);
        let mut x = Vec::with_capacity(nodes * nodes);
        for &ti in &t {
            for &tj in &t {
                x.push([logit(ti), logit(tj)]);
            }
        }
        let ref_hess = x.iter().map(|&p| reference.eval(p).hess).collect();
        let chi_hess = x.iter().map(|&p| problem.chi.eval(p).hess).collect();
        let psi = x.iter().map(|&p| u0.value(p) - reference.value(p)).collect();
        Ok(GridFlow { t, psi, gamma: problem.gamma, boundary, reference, x, ref_hess, chi_hess })
    }

    pub fn nodes(&self) -> usize {
        self.t.len()
    }

    pub fn spacing(&self) -> f64 {
        self.t[1] - self.t[0]
    }

    /// Node positions in `ℝ²`, index `i·n + j`.
    pub fn positions(&self) -> &[[f64; 2]] {
        &self.x
    }

    pub fn is_interior(&self, idx: usize) -> bool {
        let n = self.nodes();
        let (i, j) = (idx / n, idx % n);
        i > 0 && j > 0 && i + 1 < n && j + 1 < n
    }

    /// `u` at node `idx`.
    pub fn value(&self, idx: usize) -> f64 {
        self.reference.value(self.x[idx]) + self.psi[idx]
    }

    /// First and second `t`-derivatives of `f` along `axis`, one-sided at the ends.
    fn axis_derivatives(&self, f: &[f64], axis: usize) -> (Vec<f64>, Vec<f64>) {
        let n = self.nodes();
        let h = self.spacing();
        let at = |i: usize, j: usize, s: usize| if axis == 0 { f[s * n + j] } else { f[i * n + s] };
        let (mut d1, mut d2) = (vec![0.0; f.len()], vec![0.0; f.len()]);
        for i in 0..n {
            for j in 0..n {
                let s = if axis == 0 { i } else { j };
                let g = |o: usize| at(i, j, o);
                let (a, b) = if s == 0 {
                    ((-3.0 * g(0) + 4.0 * g(1) - g(2)) / (2.0 * h), (2.0 * g(0) - 5.0 * g(1) + 4.0 * g(2) - g(3)) / (h * h))
                } else if s == n - 1 {
                    (
                        (3.0 * g(s) - 4.0 * g(s - 1) + g(s - 2)) / (2.0 * h),
                        (2.0 * g(s) - 5.0 * g(s - 1) + 4.0 * g(s - 2) - g(s - 3)) / (h * h),
                    )
                } else {
                    ((g(s + 1) - g(s - 1)) / (2.0 * h), (g(s + 1) - 2.0 * g(s) + g(s - 1)) / (h * h))
                };
                d1[i * n + j] = a;
                d2[i * n + j] = b;
            }
        }
        (d1, d2)
    }

    /// `ψ` with its `x`-gradient and `x`-Hessian at every node.
    fn psi_samples(&self) -> Vec<Sample> {
        let n = self.nodes();
        let (p0, p00) = self.axis_derivatives(&self.psi, 0);
        let (p1, p11) = self.axis_derivatives(&self.psi, 1);
        let (p01, _) = self.axis_derivatives(&p0, 1);
        (0..self.psi.len())
            .map(|idx| {
                let (t0, t1) = (self.t[idx / n], self.t[idx % n]);
                let (s0, s1) = (t0 * (1.0 - t0), t1 * (1.0 - t1));
                Sample {
                    value: self.psi[idx],
                    grad: [s0 * p0[idx], s1 * p1[idx]],
                    hess: Hess::real(
                        s0 * s0 * p00[idx] + s0 * (1.0 - 2.0 * t0) * p0[idx],
                        s1 * s1 * p11[idx] + s1 * (1.0 - 2.0 * t1) * p1[idx],
                        s0 * s1 * p01[idx],
                    ),
                }
            })
            .collect()
    }

    /// `D²u` at every node.
    pub fn hessians(&self) -> Vec<Hess> {
        self.psi_samples().iter().zip(&self.ref_hess).map(|(s, r)| r.add(s.hess)).collect()
    }

    /// `γ − ½tr((D²u)⁻¹D²v)` at every node, with the boundary rule applied.
    ///
    /// Also returns the largest `Σ Aᵢᵢτᵢ² + |A₁₂|τ₁τ₂` with `A = ½U⁻¹VU⁻¹`,
    /// which bounds the explicit step.
    fn velocity(&self) -> Result<(Vec<f64>, f64)> {
        let n = self.nodes();
        let hs = self.hessians();
        let mut v = vec![0.0; hs.len()];
        let mut stiff: f64 = 0.0;
        for idx in 0..hs.len() {
            if !self.is_interior(idx) {
                continue;
            }
            let (u, c) = (&hs[idx], &self.chi_hess[idx]);
            if !u.is_positive_definite(2) || !(u.det(2) > 0.0) {
                return Err(Error::Convexity(format!("grid potential not convex at x = {:?}", self.x[idx])));
            }
            v[idx] = self.gamma - u.mixed(c, 2) / u.det(2);
            let ui = inverse(u);
            let m = product(&ui, c);
            let mu = |r: usize, s: usize| m[r][0] * [ui.a, ui.cr][s] + m[r][1] * [ui.cr, ui.b][s];
            let (t0, t1) = (self.t[idx / n], self.t[idx % n]);
            let (s0, s1) = (t0 * (1.0 - t0), t1 * (1.0 - t1));
            let a = 0.5 * (mu(0, 0) * s0 * s0 + mu(1, 1) * s1 * s1 + mu(0, 1).abs() * s0 * s1);
            stiff = stiff.max(a);
        }
        if self.boundary == Boundary::Outflow {
            for j in 1..n - 1 {
                v[j] = 2.0 * v[n + j] - v[2 * n + j];
                v[(n - 1) * n + j] = 2.0 * v[(n - 2) * n + j] - v[(n - 3) * n + j];
            }
            for i in 0..n {
                v[i * n] = 2.0 * v[i * n + 1] - v[i * n + 2];
                v[i * n + n - 1] = 2.0 * v[i * n + n - 2] - v[i * n + n - 3];
            }
        }
        if v.iter().any(|z| !z.is_finite()) {
            return Err(Error::NonFinite("J-flow velocity".into()));
        }
        Ok((v, stiff))
    }

    /// Largest explicit step allowed by the parabolic CFL bound at the current state.
    pub fn stable_dt(&self) -> Result<f64> {
        let (_, stiff) = self.velocity()?;
        Ok(CFL * self.spacing().powi(2) / stiff.max(1e-300))
    }

    /// `sup` over interior nodes of `|γ − ½tr((D²u)⁻¹D²v)|`.
    pub fn residual(&self) -> Result<f64> {
        let (v, _) = self.velocity()?;
        Ok((0..v.len()).filter(|&i| self.is_interior(i)).map(|i| v[i].abs()).fold(0.0, f64::max))
    }

    /// `u = u_ref + ψ` with `ψ` interpolated bilinearly in `t`.
    pub fn potential(&self) -> PotentialField {
        let grid = GridPotential { dim: 2, t: [self.t.clone(), self.t.clone()], samples: self.psi_samples() };
        PotentialField::Combination(vec![(1.0, self.reference.clone()), (1.0, PotentialField::Grid(grid))])
    }

    /// CSV snapshot: a `# nx,ny,delta` header line, then one row per node.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# nx={},ny={},delta={:e}", self.nodes(), self.nodes(), BOX_DELTA)?;
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["i", "j", "t1", "t2", "x1", "x2", "u"])?;
        let n = self.nodes();
        for idx in 0..self.psi.len() {
            let (i, j) = (idx / n, idx % n);
            out.serialize((i, j, self.t[i], self.t[j], self.x[idx][0], self.x[idx][1], self.value(idx)))?;
        }
        out.flush()?;
        Ok(())
    }
}

/// One explicit Euler step of at most `dt`.
///
/// The step is capped by the CFL bound and halved while the result loses
/// convexity at an interior node; returns the new state and the step taken.
pub fn jflow_step(flow: &GridFlow, dt: f64) -> Result<(GridFlow, f64)> {
    if !(dt > 0.0) {
        return Err(Error::Input("J-flow step must be positive".into()));
    }
    let (v, stiff) = flow.velocity()?;
    let mut dt = dt.min(CFL * flow.spacing().powi(2) / stiff.max(1e-300));
    for _ in 0..MAX_HALVINGS {
        let mut next = flow.clone();
        for (p, d) in next.psi.iter_mut().zip(&v) {
            *p += dt * d;
        }
        match next.velocity() {
            Ok(_) => return Ok((next, dt)),
            Err(Error::Convexity(_)) => dt /= 2.0,
            Err(e) => return Err(e),
        }
    }
    Err(Error::Convexity(format!("J-flow step rejected after {MAX_HALVINGS} halvings")))
}

fn grid_state(flow: &GridFlow, t: f64) -> Result<FlowState> {
    Ok(FlowState {
        t,
        payload: FlowPayload::Potential(flow.potential()),
        diagnostics: FlowDiagnostics { mu0_sq: None, i_value: None, residual: Some(flow.residual()?) },
    })
}

/// Runs the flow to `t_end`, returning the states at `t_end·i/records` for
/// `i = 0..=records` and the final grid.
pub fn jflow_run(flow: &GridFlow, t_end: f64, records: usize) -> Result<(Vec<FlowState>, GridFlow)> {
    if !(t_end >= 0.0) || records == 0 {
        return Err(Error::Input("J-flow run needs t_end ≥ 0 and at least one record".into()));
    }
    let mut cur = flow.clone();
    let mut t = 0.0;
    let mut states = vec![grid_state(&cur, 0.0)?];
    for r in 1..=records {
        let target = t_end * r as f64 / records as f64;
        while target - t > 1e-14 * t_end.max(1.0) {
            let (next, used) = jflow_step(&cur, target - t)?;
            cur = next;
            t += used;
        }
        t = target;
        states.push(grid_state(&cur, t)?);
    }
    Ok((states, cur))
}
