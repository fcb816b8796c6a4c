//! Dynamics: maps `T₀`, their Jacobians, and parameter derivatives.
//!
//! Two perturbation families are supported. Closed-form maps with a scalar
//! parameter (the standard map, `a → a + ε`) and flow maps of
//! non-autonomous vector fields where the final time is the parameter
//! (`T_ε = φ^{t0, t1+ε}`).

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::mesh::Domain;
use crate::{Error, Mat2, Result, Vec2};

/// First-order data of `T_ε` at a point, evaluated at `ε = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Linearization {
    /// `T₀(x)`.
    pub image: Vec2,
    /// `DT₀(x)`.
    pub jacobian: Mat2,
    /// `Ṫ₀(x)`.
    pub map_dot: Vec2,
    /// `DṪ₀(x)`.
    pub jacobian_dot: Mat2,
}

/// Evaluators for `T₀`, `DT₀`, `Ṫ₀` and `DṪ₀`.
///
/// Implementations must be pure so that quadrature loops can call them
/// concurrently.
pub trait DynamicsModel: Send + Sync {
    fn map(&self, x: Vec2) -> Result<Vec2>;
    fn jacobian(&self, x: Vec2) -> Result<Mat2>;
    fn map_dot(&self, x: Vec2) -> Result<Vec2>;
    fn jacobian_dot(&self, x: Vec2) -> Result<Mat2>;

    /// All four quantities at once; flow models override this to integrate once.
    fn linearize(&self, x: Vec2) -> Result<Linearization> {
        Ok(Linearization {
            image: self.map(x)?,
            jacobian: self.jacobian(x)?,
            map_dot: self.map_dot(x)?,
            jacobian_dot: self.jacobian_dot(x)?,
        })
    }

    /// `(T₀(x), Ṫ₀(x))`, the only data the transfer-operator route needs.
    fn map_with_dot(&self, x: Vec2) -> Result<(Vec2, Vec2)> {
        Ok((self.map(x)?, self.map_dot(x)?))
    }

    /// Torus the map acts on, or a rectangle it leaves invariant, if any.
    fn domain(&self) -> Option<Domain> {
        None
    }
}

/// The identity map with zero perturbation.
#[derive(Clone, Copy, Debug, Default)]
pub struct Identity;

impl DynamicsModel for Identity {
    fn map(&self, x: Vec2) -> Result<Vec2> {
        Ok(x)
    }
    fn jacobian(&self, _: Vec2) -> Result<Mat2> {
        Ok(Mat2::identity())
    }
    fn map_dot(&self, _: Vec2) -> Result<Vec2> {
        Ok(Vec2::zeros())
    }
    fn jacobian_dot(&self, _: Vec2) -> Result<Mat2> {
        Ok(Mat2::zeros())
    }
}

/// Chirikov standard map on `[0, 2π)²`, perturbed through its parameter.
#[derive(Clone, Copy, Debug)]
pub struct StandardMap {
    pub a: f64,
}

/// `T(x, y) = (x + y + a sin x, y + a sin x) mod 2π`.
pub fn standard_map(a: f64) -> StandardMap {
    StandardMap { a }
}

impl DynamicsModel for StandardMap {
    fn map(&self, p: Vec2) -> Result<Vec2> {
        let s = self.a * p.x.sin();
        let two_pi = 2.0 * PI;
        Ok(Vec2::new(
            (p.x + p.y + s).rem_euclid(two_pi),
            (p.y + s).rem_euclid(two_pi),
        ))
    }

    fn jacobian(&self, p: Vec2) -> Result<Mat2> {
        let c = self.a * p.x.cos();
        Ok(Mat2::new(1.0 + c, 1.0, c, 1.0))
    }

    fn map_dot(&self, p: Vec2) -> Result<Vec2> {
        let s = p.x.sin();
        Ok(Vec2::new(s, s))
    }

    fn jacobian_dot(&self, p: Vec2) -> Result<Mat2> {
        let c = p.x.cos();
        Ok(Mat2::new(c, 0.0, c, 0.0))
    }

    fn domain(&self) -> Option<Domain> {
        Some(Domain::torus(2.0 * PI, 2.0 * PI))
    }
}

/// A time-dependent planar vector field with its spatial Jacobian.
pub trait VelocityField: Send + Sync {
    fn velocity(&self, x: Vec2, t: f64) -> Vec2;
    /// `∂ₓv(x, t)`.
    fn jacobian(&self, x: Vec2, t: f64) -> Mat2;
}

/// Integrator tolerances (mixed absolute/relative error per component).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub abs: f64,
    pub rel: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { abs: 1e-9, rel: 1e-9 }
    }
}

/// A flow problem `ẋ = v(x, t)` on `[t0, t1]`.
#[derive(Clone)]
pub struct FlowSpec {
    pub field: Arc<dyn VelocityField>,
    pub t0: f64,
    pub t1: f64,
    pub tol: Tolerances,
    /// A rectangle the flow leaves invariant, if known.
    pub invariant_domain: Option<Domain>,
}

impl std::fmt::Debug for FlowSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FlowSpec")
            .field("t0", &self.t0)
            .field("t1", &self.t1)
            .field("tol", &self.tol)
            .finish_non_exhaustive()
    }
}

impl FlowSpec {
    pub fn with_final_time(&self, t1: f64) -> Self {
        FlowSpec { t1, ..self.clone() }
    }

    pub fn with_tolerances(&self, tol: Tolerances) -> Self {
        FlowSpec { tol, ..self.clone() }
    }
}

// Dormand-Prince 5(4) tableau
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];
const MAX_STEPS: usize = 1_000_000;

/// Integrates `ẏ = f(t, y)` from `t0` to `t1` with adaptive Dormand-Prince 5(4).
pub fn integrate<const N: usize>(
    f: impl Fn(f64, &[f64; N]) -> [f64; N],
    t0: f64,
    t1: f64,
    y0: [f64; N],
    tol: Tolerances,
) -> std::result::Result<[f64; N], String> {
    let span = t1 - t0;
    if span == 0.0 {
        return Ok(y0);
    }
    let dir = span.signum();
    let scale = |y: &[f64; N], z: &[f64; N], i: usize| tol.abs + tol.rel * y[i].abs().max(z[i].abs());
    let rms = |v: &[f64; N], y: &[f64; N], z: &[f64; N]| {
        (v.iter()
            .enumerate()
            .map(|(i, e)| (e / scale(y, z, i)).powi(2))
            .sum::<f64>()
            / N as f64)
            .sqrt()
    };

    let mut t = t0;
    let mut y = y0;
    let mut k = [[0.0; N]; 7];
    k[0] = f(t, &y);

    // starting step (Hairer, Nørsett & Wanner, II.4)
    let d0 = rms(&y, &y, &y);
    let d1 = rms(&k[0], &y, &y);
    let mut h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h = h.min(span.abs());
    let mut y1 = [0.0; N];
    for i in 0..N {
        y1[i] = y[i] + dir * h * k[0][i];
    }
    let f1 = f(t + dir * h, &y1);
    let mut diff = [0.0; N];
    for i in 0..N {
        diff[i] = f1[i] - k[0][i];
    }
    let d2 = rms(&diff, &y, &y) / h;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    h = (100.0 * h).min(h1).min(span.abs());

    let mut steps = 0;
    while dir * (t1 - t) > 0.0 {
        steps += 1;
        if steps > MAX_STEPS {
            return Err(format!("exceeded {MAX_STEPS} steps"));
        }
        if h < 16.0 * f64::EPSILON * t.abs().max(span.abs()) {
            return Err(format!("step size underflow at t = {t}"));
        }
        let last = h >= dir * (t1 - t);
        let hs = if last { t1 - t } else { dir * h };

        for s in 1..7 {
            let mut ys = y;
            for (j, kj) in k.iter().enumerate().take(s) {
                let a = A[s][j];
                if a != 0.0 {
                    for i in 0..N {
                        ys[i] += hs * a * kj[i];
                    }
                }
            }
            k[s] = f(t + C[s] * hs, &ys);
        }
        // the 7th stage is evaluated at the 5th order solution
        let mut ynew = y;
        for (j, kj) in k.iter().enumerate().take(6) {
            for i in 0..N {
                ynew[i] += hs * A[6][j] * kj[i];
            }
        }
        let mut err = [0.0; N];
        for (j, kj) in k.iter().enumerate() {
            for i in 0..N {
                err[i] += hs * E[j] * kj[i];
            }
        }
        let en = rms(&err, &y, &ynew);
        if !en.is_finite() {
            return Err("non-finite state".into());
        }
        if en <= 1.0 {
            t = if last { t1 } else { t + hs };
            y = ynew;
            k[0] = k[6];
            let fac = if en == 0.0 { 5.0 } else { (0.9 * en.powf(-0.2)).clamp(0.2, 5.0) };
            h *= fac;
        } else {
            h *= (0.9 * en.powf(-0.2)).clamp(0.2, 1.0);
        }
    }
    Ok(y)
}

/// Integrates the trajectory through `x` and the variational equation
/// `Ẏ = ∂ₓv · Y`, `Y(t0) = I`, returning `(x(t1), Y(t1))`.
pub fn flow_map(spec: &FlowSpec, x: Vec2) -> Result<(Vec2, Mat2)> {
    let field = &spec.field;
    let rhs = |t: f64, s: &[f64; 6]| {
        let p = Vec2::new(s[0], s[1]);
        let v = field.velocity(p, t);
        let j = field.jacobian(p, t);
        let y = Mat2::new(s[2], s[3], s[4], s[5]);
        let dy = j * y;
        [v.x, v.y, dy[(0, 0)], dy[(0, 1)], dy[(1, 0)], dy[(1, 1)]]
    };
    let y0 = [x.x, x.y, 1.0, 0.0, 0.0, 1.0];
    let s = integrate(rhs, spec.t0, spec.t1, y0, spec.tol).map_err(|reason| Error::Integration {
        point: [x.x, x.y],
        reason,
    })?;
    Ok((Vec2::new(s[0], s[1]), Mat2::new(s[2], s[3], s[4], s[5])))
}

/// Integrates only the trajectory through `x`.
pub fn flow_point(spec: &FlowSpec, x: Vec2) -> Result<Vec2> {
    let field = &spec.field;
    let rhs = |t: f64, s: &[f64; 2]| {
        let v = field.velocity(Vec2::new(s[0], s[1]), t);
        [v.x, v.y]
    };
    let s = integrate(rhs, spec.t0, spec.t1, [x.x, x.y], spec.tol).map_err(|reason| {
        Error::Integration {
            point: [x.x, x.y],
            reason,
        }
    })?;
    Ok(Vec2::new(s[0], s[1]))
}

/// Frame in which `Ṫ₀ = v(·, t1)` is evaluated for flow-time perturbations.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TdotFrame {
    /// `Ṫ₀(x) = v(T₀(x), t1)`, the derivative of `φ^{t0,t1+ε}(x)`.
    #[default]
    Lagrangian,
    /// `Ṫ₀(x) = v(x, t1)`, the vector field read at the initial position.
    Eulerian,
}

/// Flow map `φ^{t0,t1}` perturbed through its final time.
#[derive(Clone, Debug)]
pub struct FlowTimeModel {
    pub spec: FlowSpec,
    pub frame: TdotFrame,
}

/// Wraps a flow spec as a dynamics model with `Ṫ₀ = v(·, t1)`.
pub fn flow_time_model(spec: FlowSpec) -> FlowTimeModel {
    FlowTimeModel {
        spec,
        frame: TdotFrame::Lagrangian,
    }
}

impl FlowTimeModel {
    pub fn with_frame(mut self, frame: TdotFrame) -> Self {
        self.frame = frame;
        self
    }

    fn dot_at(&self, x: Vec2, image: Vec2) -> Vec2 {
        let at = match self.frame {
            TdotFrame::Lagrangian => image,
            TdotFrame::Eulerian => x,
        };
        self.spec.field.velocity(at, self.spec.t1)
    }
}

impl DynamicsModel for FlowTimeModel {
    fn map(&self, x: Vec2) -> Result<Vec2> {
        flow_point(&self.spec, x)
    }

    fn jacobian(&self, x: Vec2) -> Result<Mat2> {
        Ok(flow_map(&self.spec, x)?.1)
    }

    fn map_dot(&self, x: Vec2) -> Result<Vec2> {
        let image = match self.frame {
            TdotFrame::Lagrangian => flow_point(&self.spec, x)?,
            TdotFrame::Eulerian => x,
        };
        Ok(self.dot_at(x, image))
    }

    fn jacobian_dot(&self, x: Vec2) -> Result<Mat2> {
        Ok(self.linearize(x)?.jacobian_dot)
    }

    fn linearize(&self, x: Vec2) -> Result<Linearization> {
        let (image, jacobian) = flow_map(&self.spec, x)?;
        let t1 = self.spec.t1;
        let jacobian_dot = match self.frame {
            // chain rule on v(·, t1) ∘ T₀
            TdotFrame::Lagrangian => self.spec.field.jacobian(image, t1) * jacobian,
            TdotFrame::Eulerian => self.spec.field.jacobian(x, t1),
        };
        Ok(Linearization {
            image,
            jacobian,
            map_dot: self.dot_at(x, image),
            jacobian_dot,
        })
    }

    fn map_with_dot(&self, x: Vec2) -> Result<(Vec2, Vec2)> {
        let image = flow_point(&self.spec, x)?;
        Ok((image, self.dot_at(x, image)))
    }

    fn domain(&self) -> Option<Domain> {
        self.spec.invariant_domain
    }
}

/// Smooth switch from 0 to 1 on `[0, 1]`: `t²(3 − 2t)`, clamped outside.
pub fn transition(t: f64) -> f64 {
    if t < 0.0 {
        0.0
    } else if t > 1.0 {
        1.0
    } else {
        t * t * (3.0 - 2.0 * t)
    }
}

/// Transitory double gyre on `[0, 1]²`: the stream function blends from
/// `sin(2πx) sin(πy)` to `sin(πx) sin(2πy)` as `t` runs over `[0, 1]`.
///
/// The velocity is `(−∂ψ/∂y, ∂ψ/∂x)`.
#[derive(Clone, Copy, Debug, Default)]
pub struct DoubleGyre;

struct StreamDerivs {
    x: f64,
    y: f64,
    xx: f64,
    xy: f64,
    yy: f64,
}

impl DoubleGyre {
    fn derivs(&self, p: Vec2, t: f64) -> StreamDerivs {
        let s = transition(t);
        let (x, y) = (p.x, p.y);
        let (s1x, c1x) = (PI * x).sin_cos();
        let (s2x, c2x) = (2.0 * PI * x).sin_cos();
        let (s1y, c1y) = (PI * y).sin_cos();
        let (s2y, c2y) = (2.0 * PI * y).sin_cos();
        let pi2 = PI * PI;
        // ψ_P = sin(2πx) sin(πy), ψ_F = sin(πx) sin(2πy)
        let p_x = 2.0 * PI * c2x * s1y;
        let p_y = PI * s2x * c1y;
        let p_xx = -4.0 * pi2 * s2x * s1y;
        let p_yy = -pi2 * s2x * s1y;
        let p_xy = 2.0 * pi2 * c2x * c1y;
        let f_x = PI * c1x * s2y;
        let f_y = 2.0 * PI * s1x * c2y;
        let f_xx = -pi2 * s1x * s2y;
        let f_yy = -4.0 * pi2 * s1x * s2y;
        let f_xy = 2.0 * pi2 * c1x * c2y;
        let mix = |a: f64, b: f64| (1.0 - s) * a + s * b;
        StreamDerivs {
            x: mix(p_x, f_x),
            y: mix(p_y, f_y),
            xx: mix(p_xx, f_xx),
            xy: mix(p_xy, f_xy),
            yy: mix(p_yy, f_yy),
        }
    }

    /// `ψ(x, y, t)`.
    pub fn stream(&self, p: Vec2, t: f64) -> f64 {
        let s = transition(t);
        let psi_p = (2.0 * PI * p.x).sin() * (PI * p.y).sin();
        let psi_f = (PI * p.x).sin() * (2.0 * PI * p.y).sin();
        (1.0 - s) * psi_p + s * psi_f
    }
}

impl VelocityField for DoubleGyre {
    fn velocity(&self, p: Vec2, t: f64) -> Vec2 {
        let d = self.derivs(p, t);
        Vec2::new(-d.y, d.x)
    }

    fn jacobian(&self, p: Vec2, t: f64) -> Mat2 {
        let d = self.derivs(p, t);
        Mat2::new(-d.xy, -d.yy, d.xx, d.xy)
    }
}

/// Flow spec of the transitory double gyre on `[t0, t1]` with default tolerances.
pub fn double_gyre_spec(t0: f64, t1: f64) -> FlowSpec {
    FlowSpec {
        field: Arc::new(DoubleGyre),
        t0,
        t1,
        tol: Tolerances::default(),
        invariant_domain: Some(Domain::rectangle([0.0, 0.0], [1.0, 1.0])),
    }
}

/// Built-in models, keyed by name, with the perturbation parameter applied by
/// [`ModelSpec::build`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum ModelSpec {
    StandardMap {
        #[serde(default = "default_a")]
        a: f64,
    },
    DoubleGyre {
        #[serde(default)]
        t0: f64,
        #[serde(default = "default_t1")]
        t1: f64,
        #[serde(default)]
        tol: Tolerances,
        #[serde(default)]
        tdot_frame: TdotFrame,
    },
    Identity,
}

fn default_a() -> f64 {
    0.98
}

fn default_t1() -> f64 {
    0.6
}

impl ModelSpec {
    pub fn standard_map(a: f64) -> Self {
        ModelSpec::StandardMap { a }
    }

    pub fn double_gyre(t0: f64, t1: f64) -> Self {
        ModelSpec::DoubleGyre {
            t0,
            t1,
            tol: Tolerances::default(),
            tdot_frame: TdotFrame::Lagrangian,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ModelSpec::StandardMap { .. } => "standard_map",
            ModelSpec::DoubleGyre { .. } => "double_gyre",
            ModelSpec::Identity => "identity",
        }
    }

    /// The model `T_ε` at parameter offset `eps`.
    pub fn build(&self, eps: f64) -> Box<dyn DynamicsModel> {
        match *self {
            ModelSpec::StandardMap { a } => Box::new(standard_map(a + eps)),
            ModelSpec::DoubleGyre {
                t0,
                t1,
                tol,
                tdot_frame,
            } => Box::new(
                flow_time_model(double_gyre_spec(t0, t1 + eps).with_tolerances(tol))
                    .with_frame(tdot_frame),
            ),
            ModelSpec::Identity => Box::new(Identity),
        }
    }
}
