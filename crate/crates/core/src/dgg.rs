//! The rate function `ζ_s(t, r)` and numerical checkers for the
//! Davies-Gaffney-Grigor'yan bounds and the integral maximum principle.
//!
//! ```text
//! ζ_s(t, r) = (1/s²) (rs·asinh(rs/t) − √(t² + r²s²) + t)
//!           = −inf_{κ>0} ( (1/s²)(cosh(κs/2) − 1) t − κr/2 )
//! ```
//!
//! Checkers evaluate both sides of an inequality, record the slack
//! `rhs − lhs` and pass when `slack ≥ −tol·rhs`. The left-hand sides are
//! computed with the uniformized series (see [`crate::heat`]) so that tiny
//! heat contents are resolved relative to themselves rather than to the
//! size of the data.

use crate::error::{Error, Result};
use crate::ext::{Ext, ExtReal};
use crate::graph::{VertexFunction, VertexSet, WeightedGraph};
use crate::heat::{series_apply, weighted_energy};
use crate::metric::{
    certify_intrinsic, distance_to_set, lipschitz_constant, IntrinsicCertificate, PseudoMetric,
    DEFAULT_CERT_TOL,
};
use crate::operators::{dirichlet_laplacian, laplacian, spectral_bottom, Operator};
use rayon::prelude::*;
use serde::Serialize;

/// Default relative tolerance of the inequality checks.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Default tolerance for the relative increase of the maximum-principle
/// functional between grid points.
pub const DEFAULT_IMP_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZetaParams {
    pub s: f64,
    pub t: f64,
    pub r: ExtReal,
}

impl ZetaParams {
    pub fn new(s: f64, t: f64, r: ExtReal) -> Result<Self> {
        if !(s > 0.0) || !s.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "jump size must be positive, got {s}"
            )));
        }
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "time must be positive, got {t}"
            )));
        }
        if let Ext::Finite(rv) = r {
            if !(rv >= 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "distance must be nonnegative, got {rv}"
                )));
            }
        }
        Ok(ZetaParams { s, t, r })
    }
}

/// Closed form of `ζ_s(t, r)`.
pub fn zeta(p: ZetaParams) -> ExtReal {
    let ZetaParams { s, t, r } = p;
    let r = match r {
        Ext::Finite(r) => r,
        Ext::Infinite => return Ext::Infinite,
    };
    let rs = r * s;
    let x = rs / t;
    let v = if x <= 1.0 {
        // √(1+x²) − 1 = x² / (1 + √(1+x²)) avoids cancellation for small x
        t / (s * s) * (x * x.asinh() - x * x / (1.0 + (1.0 + x * x).sqrt()))
    } else {
        (rs * x.asinh() - t.hypot(rs) + t) / (s * s)
    };
    Ext::Finite(v.max(0.0))
}

/// `(1/s²)(cosh(κs/2) − 1)`, the growth rate paid for the weight `e^{κρ}`.
pub fn cosh_rate(kappa: f64, s: f64) -> f64 {
    let h = (kappa * s / 4.0).sinh();
    2.0 * h * h / (s * s)
}

/// Objective of the variational form: `(1/s²)(cosh(κs/2) − 1) t − κr/2`.
pub fn kappa_objective(kappa: f64, s: f64, t: f64, r: f64) -> f64 {
    cosh_rate(kappa, s) * t - 0.5 * kappa * r
}

/// Stationary point `κ* = (2/s) asinh(rs/t)` of [`kappa_objective`].
pub fn optimal_kappa(s: f64, t: f64, r: f64) -> f64 {
    2.0 / s * (r * s / t).asinh()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VariationalZeta {
    pub value: ExtReal,
    /// Minimizing `κ` (0 for `r = 0`, infinite for `r = ∞`).
    pub kappa: ExtReal,
}

/// `ζ_s(t, r)` by golden-section minimization of [`kappa_objective`] over
/// `κ ∈ (0, 4κ*]`. The objective is strictly convex so the bracket holds
/// the unique minimizer.
pub fn zeta_variational(p: ZetaParams) -> VariationalZeta {
    let ZetaParams { s, t, r } = p;
    let r = match r {
        Ext::Finite(r) => r,
        Ext::Infinite => {
            return VariationalZeta {
                value: Ext::Infinite,
                kappa: Ext::Infinite,
            }
        }
    };
    if r == 0.0 {
        return VariationalZeta {
            value: ExtReal::ZERO,
            kappa: ExtReal::ZERO,
        };
    }
    let f = |k: f64| kappa_objective(k, s, t, r);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (0.0, 4.0 * optimal_kappa(s, t, r));
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if b - a <= 1e-15 * b {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let (kappa, value) = if fc < fd { (c, fc) } else { (d, fd) };
    VariationalZeta {
        value: Ext::Finite((-value).max(0.0)),
        kappa: Ext::Finite(kappa),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DggParams {
    pub a: Vec<String>,
    pub b: Vec<String>,
    pub t: f64,
    pub lambda: f64,
    pub s: f64,
    pub r: ExtReal,
    pub zeta: ExtReal,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DggReport {
    pub params: DggParams,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub holds: bool,
    pub tol: f64,
}

impl DggReport {
    fn new(params: DggParams, lhs: f64, rhs: f64, tol: f64) -> Self {
        let slack = rhs - lhs;
        DggReport {
            params,
            lhs,
            rhs,
            slack,
            holds: slack >= -tol * rhs.abs(),
            tol,
        }
    }
}

/// Reusable checker for one graph, metric and domain. Certification and
/// operator assembly happen once.
#[derive(Debug, Clone)]
pub struct DggChecker<'g> {
    g: &'g WeightedGraph,
    rho: &'g PseudoMetric,
    op: Operator,
    cert: IntrinsicCertificate,
    s: f64,
    pub tol: f64,
}

impl<'g> DggChecker<'g> {
    /// Checker for the full Laplacian. Fails with [`Error::Hypothesis`]
    /// unless `ρ` is intrinsic with finite positive jump size.
    pub fn new(g: &'g WeightedGraph, rho: &'g PseudoMetric) -> Result<Self> {
        Self::with_operator(g, rho, laplacian(g))
    }

    /// Checker for the Dirichlet Laplacian on `Ω`; `λ` is then compared with
    /// `λ₁(Ω)` and both sets must lie inside `Ω`.
    pub fn dirichlet(
        g: &'g WeightedGraph,
        rho: &'g PseudoMetric,
        omega: &VertexSet,
    ) -> Result<Self> {
        Self::with_operator(g, rho, dirichlet_laplacian(g, omega)?)
    }

    fn with_operator(g: &'g WeightedGraph, rho: &'g PseudoMetric, op: Operator) -> Result<Self> {
        let cert = certify_intrinsic(g, rho, DEFAULT_CERT_TOL)?;
        let s = require_hypotheses(&cert)?;
        Ok(DggChecker {
            g,
            rho,
            op,
            cert,
            s,
            tol: DEFAULT_TOL,
        })
    }

    pub fn certificate(&self) -> &IntrinsicCertificate {
        &self.cert
    }

    pub fn jump_size(&self) -> f64 {
        self.s
    }

    pub fn operator(&self) -> &Operator {
        &self.op
    }

    fn check_inside(&self, set: &VertexSet) -> Result<()> {
        if set.is_empty() {
            return Err(Error::EmptySet);
        }
        let domain = self.op.domain();
        if let Some(x) = set.iter().find(|x| domain.binary_search(x).is_err()) {
            return Err(Error::SupportViolation(self.g.id(x).to_string()));
        }
        Ok(())
    }

    fn ids(&self, set: &VertexSet) -> Vec<String> {
        set.iter().map(|x| self.g.id(x).to_string()).collect()
    }

    fn envelope(&self, t: f64, lambda: f64, r: ExtReal) -> Result<(ExtReal, f64)> {
        let z = zeta(ZetaParams::new(self.s, t, r)?);
        let factor = match z {
            Ext::Finite(z) => (-lambda * t - z).exp(),
            Ext::Infinite => 0.0,
        };
        Ok((z, factor))
    }

    /// `Σ_{x∈A} Σ_{y∈B} m_x m_y p_t(x, y) ≤ √(m(A) m(B)) e^{−λt − ζ_s(t, ρ(A,B))}`.
    pub fn check_sets(
        &self,
        a: &VertexSet,
        b: &VertexSet,
        t: f64,
        lambda: f64,
    ) -> Result<DggReport> {
        Ok(self
            .check_sets_many(a, std::slice::from_ref(b), t, lambda)?
            .remove(0))
    }

    /// One heat evaluation from `A`, checked against every `B`.
    pub fn check_sets_many(
        &self,
        a: &VertexSet,
        bs: &[VertexSet],
        t: f64,
        lambda: f64,
    ) -> Result<Vec<DggReport>> {
        self.check_inside(a)?;
        for b in bs {
            self.check_inside(b)?;
        }
        if !(t > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "time must be positive, got {t}"
            )));
        }
        // Σ_x m_x p_t(y, x) 𝟙_A(x) = (e^{tΔ} 𝟙_A)(y), so the double sum is
        // Σ_{y∈B} m_y (e^{tΔ} 𝟙_A)(y).
        let u = series_apply(&self.op, &self.op.restrict(&self.g.indicator(a))?, t);
        let heat = self.op.extend(&u);
        let dist_a = distance_to_set(self.rho, a)?;
        let mass_a = self.g.mass(a);
        bs.iter()
            .map(|b| {
                let r = b
                    .iter()
                    .map(|y| dist_a[y])
                    .fold(ExtReal::Infinite, ExtReal::min);
                let (z, factor) = self.envelope(t, lambda, r)?;
                let lhs: f64 = b.iter().map(|y| self.g.m(y) * heat.0[y]).sum();
                let rhs = (mass_a * self.g.mass(b)).sqrt() * factor;
                let params = DggParams {
                    a: self.ids(a),
                    b: self.ids(b),
                    t,
                    lambda,
                    s: self.s,
                    r,
                    zeta: z,
                };
                Ok(DggReport::new(params, lhs, rhs, self.tol))
            })
            .collect()
    }

    /// `|⟨e^{tΔ} f, g⟩| ≤ e^{−λt − ζ_s(t, ρ(A,B))} ‖f‖ ‖g‖` for
    /// `supp f ⊆ A`, `supp g ⊆ B`.
    pub fn check_functional(
        &self,
        f: &VertexFunction,
        g_fn: &VertexFunction,
        a: &VertexSet,
        b: &VertexSet,
        t: f64,
        lambda: f64,
    ) -> Result<DggReport> {
        self.check_inside(a)?;
        self.check_inside(b)?;
        for (func, set) in [(f, a), (g_fn, b)] {
            if func.len() != self.g.len() {
                return Err(Error::DimensionMismatch {
                    expected: self.g.len(),
                    got: func.len(),
                });
            }
            if let Some(x) = func.support().iter().find(|&x| !set.contains(x)) {
                return Err(Error::SupportViolation(self.g.id(x).to_string()));
            }
        }
        if !(t > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "time must be positive, got {t}"
            )));
        }
        let r = crate::metric::set_distance(self.rho, a, b)?;
        let (z, factor) = self.envelope(t, lambda, r)?;
        let u = self
            .op
            .extend(&series_apply(&self.op, &self.op.restrict(f)?, t));
        let m = self.g.measure();
        let lhs = u.inner(g_fn, m).abs();
        let rhs = factor * f.norm(m) * g_fn.norm(m);
        let params = DggParams {
            a: self.ids(a),
            b: self.ids(b),
            t,
            lambda,
            s: self.s,
            r,
            zeta: z,
        };
        Ok(DggReport::new(params, lhs, rhs, self.tol))
    }
}

fn require_hypotheses(cert: &IntrinsicCertificate) -> Result<f64> {
    if !cert.is_intrinsic {
        return Err(Error::Hypothesis(format!(
            "metric is not intrinsic (max ratio {})",
            cert.max_ratio
        )));
    }
    match cert.jump_size {
        Ext::Finite(s) if s > 0.0 => Ok(s),
        other => Err(Error::Hypothesis(format!(
            "jump size must be finite and positive, got {other}"
        ))),
    }
}

/// Set form of the bound for the full Laplacian. See [`DggChecker`] for
/// repeated checks on the same graph.
pub fn check_dgg_sets(
    g: &WeightedGraph,
    rho: &PseudoMetric,
    a: &VertexSet,
    b: &VertexSet,
    t: f64,
    lambda: f64,
) -> Result<DggReport> {
    DggChecker::new(g, rho)?.check_sets(a, b, t, lambda)
}

/// Functional form of the bound for the full Laplacian.
#[allow(clippy::too_many_arguments)]
pub fn check_dgg_functional(
    g: &WeightedGraph,
    rho: &PseudoMetric,
    f: &VertexFunction,
    g_fn: &VertexFunction,
    a: &VertexSet,
    b: &VertexSet,
    t: f64,
    lambda: f64,
) -> Result<DggReport> {
    DggChecker::new(g, rho)?.check_functional(f, g_fn, a, b, t, lambda)
}

/// Pointwise bound `p_t(x, y) ≤ e^{−λt − ζ_1(t, d(x, y))} / √(m_x m_y)` for
/// the normalized measure and the combinatorial distance.
pub fn davies_bound(g: &WeightedGraph, x: usize, y: usize, t: f64, lambda: f64) -> Result<f64> {
    if !g.is_normalized(1e-12) {
        return Err(Error::Hypothesis(
            "the pointwise bound needs the normalized measure".into(),
        ));
    }
    let d = g.bfs_distances(x)[y].to_real();
    let factor = match zeta(ZetaParams::new(1.0, t, d)?) {
        Ext::Finite(z) => (-lambda * t - z).exp(),
        Ext::Infinite => 0.0,
    };
    Ok(factor / (g.m(x) * g.m(y)).sqrt())
}

/// Compares `p_t(x, y)` with [`davies_bound`].
pub fn check_davies(
    g: &WeightedGraph,
    x: usize,
    y: usize,
    t: f64,
    lambda: f64,
    tol: f64,
) -> Result<DggReport> {
    let rhs = davies_bound(g, x, y, t, lambda)?;
    let op = laplacian(g);
    let mut e = vec![0.0; g.len()];
    e[y] = 1.0 / g.m(y);
    let lhs = series_apply(&op, &e, t)[x];
    let r = g.bfs_distances(x)[y].to_real();
    let params = DggParams {
        a: vec![g.id(x).to_string()],
        b: vec![g.id(y).to_string()],
        t,
        lambda,
        s: 1.0,
        r,
        zeta: zeta(ZetaParams::new(1.0, t, r)?),
    };
    Ok(DggReport::new(params, lhs, rhs, tol))
}

#[derive(Debug, Clone, Serialize)]
pub struct ImpReport {
    pub kappa: f64,
    pub omega: String,
    pub s: f64,
    /// `λ₁(Ω)`, or the bottom of the spectrum when `Ω = V`.
    pub lambda1: f64,
    pub times: Vec<f64>,
    /// `ln G(t)`; `-∞` where the solution vanishes identically.
    pub ln_g: Vec<f64>,
    pub max_relative_increase: f64,
    pub tol: f64,
    pub passes: bool,
}

impl ImpReport {
    /// `G(t)` itself (may overflow to `+∞` for large weights).
    pub fn g_values(&self) -> Vec<f64> {
        self.ln_g.iter().map(|l| l.exp()).collect()
    }
}

/// `ω = κ ρ(·, A)`; fails if some vertex is at infinite distance from `A`.
pub fn distance_weight(rho: &PseudoMetric, a: &VertexSet, kappa: f64) -> Result<VertexFunction> {
    let d = distance_to_set(rho, a)?;
    crate::metric::finite_function(&d).map(|f| f.scaled(kappa))
}

/// Evaluates
/// `G(t) = exp(2λ₁(Ω)t − (2/s²)(cosh(κs/2) − 1)t) · Σ_{x∈Ω} m_x f(t,x)² e^{ω(x)}`
/// along `grid` for the Dirichlet heat solution on `Ω` started at `f0`, and
/// reports the largest relative increase between consecutive grid points.
#[allow(clippy::too_many_arguments)]
pub fn check_imp_monotonicity(
    g: &WeightedGraph,
    rho: &PseudoMetric,
    omega_set: &VertexSet,
    f0: &VertexFunction,
    weight: &VertexFunction,
    kappa: f64,
    grid: &[f64],
    tol: f64,
) -> Result<ImpReport> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter("time grid is empty".into()));
    }
    if grid[0] < 0.0 || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter(
            "time grid must be nonnegative and strictly increasing".into(),
        ));
    }
    if !(kappa >= 0.0) || !kappa.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "κ must be finite and nonnegative, got {kappa}"
        )));
    }
    let cert = certify_intrinsic(g, rho, DEFAULT_CERT_TOL)?;
    let s = require_hypotheses(&cert)?;
    match lipschitz_constant(rho, weight)? {
        Ext::Finite(l) if l <= kappa * (1.0 + 1e-12) + 1e-15 => {}
        other => {
            return Err(Error::Hypothesis(format!(
                "weight has Lipschitz constant {other}, above κ = {kappa}"
            )))
        }
    }
    let op = dirichlet_laplacian(g, omega_set)?;
    let lambda1 = spectral_bottom(&op)?.lambda();
    let rate = 2.0 * lambda1 - 2.0 * cosh_rate(kappa, s);

    let mut u = op.restrict(f0)?;
    let mut prev_t = 0.0;
    let mut ln_g = Vec::with_capacity(grid.len());
    for &t in grid {
        u = series_apply(&op, &u, t - prev_t);
        prev_t = t;
        let e = weighted_energy(g, &op.extend(&u), weight)?;
        ln_g.push(rate * t + e.ln_value);
    }
    let max_relative_increase = ln_g
        .windows(2)
        .map(|w| {
            if w[1] == f64::NEG_INFINITY {
                0.0
            } else {
                (w[1] - w[0]).exp_m1()
            }
        })
        .fold(f64::NEG_INFINITY, f64::max)
        .max(0.0);
    Ok(ImpReport {
        kappa,
        omega: format!("weight with Lipschitz constant ≤ {kappa}"),
        s,
        lambda1,
        times: grid.to_vec(),
        ln_g,
        max_relative_increase,
        tol,
        passes: max_relative_increase <= tol,
    })
}

/// Evaluates many `(A, B)` pairs at many times in parallel; output is in
/// `(time, A, B)` grid order.
pub fn sweep_sets(
    checker: &DggChecker<'_>,
    sets_a: &[VertexSet],
    sets_b: &[VertexSet],
    times: &[f64],
    lambda: f64,
) -> Result<Vec<DggReport>> {
    let jobs: Vec<(f64, &VertexSet)> = times
        .iter()
        .flat_map(|&t| sets_a.iter().map(move |a| (t, a)))
        .collect();
    let chunks = jobs
        .par_iter()
        .map(|&(t, a)| checker.check_sets_many(a, sets_b, t, lambda))
        .collect::<Result<Vec<_>>>()?;
    Ok(chunks.into_iter().flatten().collect())
}
