//! Complex mixing-angle formulation of the eigenframe.
//!
//! The eigenvectors are parametrized by `alpha = alpha_r + i alpha_i` with
//! `cos(alpha) = eps/delta` and `sin(alpha) = 2J/delta`. Together with the
//! drive phase this spans the extended space `(phi, alpha_r, alpha_i)`, a
//! double cover of the physical parameters, in which the Berry connection and
//! curvature take closed forms. Phases computed here are in the extended-space
//! gauge; only closed-loop values are comparable with [`crate::model`].

use std::f64::consts::PI;

use crate::dynamics::LoopSchedule;
use crate::error::{Error, Result};
use crate::model::{frame, Branch, ComplexPhase, DriveParams};
use crate::numerics::Complex;

const TWO_PI: f64 = 2.0 * PI;
const I: Complex = Complex::new(0.0, 1.0);

/// Complex mixing angle; `alpha_r` is reported in `[0, 2 pi)` unless it was
/// produced by path tracking, which keeps it continuous instead.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixingAngle {
    pub alpha_r: f64,
    pub alpha_i: f64,
}

impl MixingAngle {
    pub fn new(alpha_r: f64, alpha_i: f64) -> Self {
        MixingAngle { alpha_r, alpha_i }
    }

    pub fn to_complex(self) -> Complex {
        Complex::new(self.alpha_r, self.alpha_i)
    }

    pub fn cos(self) -> Complex {
        self.to_complex().cos()
    }

    pub fn sin(self) -> Complex {
        self.to_complex().sin()
    }

    /// The other sheet of the double cover.
    pub fn flipped(self) -> Self {
        MixingAngle::new((self.alpha_r + PI).rem_euclid(TWO_PI), self.alpha_i)
    }
}

/// A point of the extended parameter space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtendedPoint {
    pub phi: f64,
    pub alpha: MixingAngle,
}

impl ExtendedPoint {
    pub fn new(phi: f64, alpha: MixingAngle) -> Self {
        ExtendedPoint { phi, alpha }
    }

    pub fn is_finite(&self) -> bool {
        self.phi.is_finite() && self.alpha.alpha_r.is_finite() && self.alpha.alpha_i.is_finite()
    }
}

/// Candidate `alpha` from the principal logarithm, before the sheet choice.
fn principal_alpha(params: &DriveParams) -> Result<Complex> {
    let eps = params.epsilon();
    let two_j = Complex::new(0.0, 2.0 * params.j);
    let num = eps + two_j;
    let den = eps - two_j;
    let scale = eps.norm() + 2.0 * params.j;
    if num.norm() <= 1e-14 * scale.max(1.0) || den.norm() <= 1e-14 * scale.max(1.0) {
        return Err(Error::LogSingularity);
    }
    // alpha = (1/2i) log(num/den)
    Ok((num / den).ln() / (2.0 * I))
}

/// Mixing angle of the drive parameters, with `cos(alpha) = eps/delta`.
///
/// For `Gamma = 0` the real polar angle `atan2(2J, Delta)` is returned.
pub fn alpha_from_params(params: &DriveParams) -> Result<MixingAngle> {
    if params.gamma == 0.0 {
        return hermitian_alpha(params);
    }
    let a0 = principal_alpha(params)?;
    let target = params.eps_over_delta()?;
    let a1 = a0 + PI;
    let a = if (a0.cos() - target).norm() <= (a1.cos() - target).norm() {
        a0
    } else {
        a1
    };
    Ok(MixingAngle::new(a.re.rem_euclid(TWO_PI), a.im))
}

/// Polar angle of the Hermitian Bloch vector `(2J, 0, Delta)`.
pub fn hermitian_alpha(params: &DriveParams) -> Result<MixingAngle> {
    if params.j == 0.0 && params.delta == 0.0 {
        return Err(Error::LogSingularity);
    }
    Ok(MixingAngle::new(
        (2.0 * params.j).atan2(params.delta).rem_euclid(TWO_PI),
        0.0,
    ))
}

/// Inverse map `J = (Gamma/2)(cosh 2a_i - cos 2a_r)/sinh 2a_i`,
/// `Delta = Gamma sin 2a_r / sinh 2a_i`.
pub fn params_from_alpha(alpha: MixingAngle, gamma: f64) -> Result<DriveParams> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "Gamma must be > 0, got {gamma}"
        )));
    }
    if !(alpha.alpha_i > 0.0) {
        return Err(Error::MixingAngleBoundary);
    }
    let (ar2, ai2) = (2.0 * alpha.alpha_r, 2.0 * alpha.alpha_i);
    let sh = ai2.sinh();
    let j = 0.5 * gamma * (ai2.cosh() - ar2.cos()) / sh;
    let delta = gamma * ar2.sin() / sh;
    if !(j.is_finite() && delta.is_finite()) {
        return Err(Error::NonFinite(0.0));
    }
    DriveParams::new(j, delta, gamma)
}

/// Hermitian boundary `alpha_i = 0`: parameters with splitting `|delta|`.
pub fn params_from_hermitian_angle(alpha_r: f64, splitting: f64) -> Result<DriveParams> {
    let j = 0.5 * splitting * alpha_r.sin();
    if j < -1e-15 * splitting {
        return Err(Error::InvalidParameter(format!(
            "alpha_r = {alpha_r} lies on the negative-J sheet"
        )));
    }
    DriveParams::new(j.max(0.0), splitting * alpha_r.cos(), 0.0)
}

/// Mixing angles along a parameter path, with `alpha_r` unwrapped against the
/// previous point instead of re-evaluated on the principal branch.
pub fn track_alpha(path: &[DriveParams]) -> Result<Vec<MixingAngle>> {
    let mut out: Vec<MixingAngle> = Vec::with_capacity(path.len());
    for p in path {
        let a = alpha_from_params(p)?;
        let a = match out.last() {
            Some(prev) => {
                let k = ((prev.alpha_r - a.alpha_r) / PI).round();
                MixingAngle::new(a.alpha_r + k * PI, a.alpha_i)
            }
            None => a,
        };
        out.push(a);
    }
    Ok(out)
}

/// Connection components `(A_phi, A_alpha_r, A_alpha_i)`.
pub fn global_connection(point: &ExtendedPoint, branch: Branch) -> (Complex, Complex, Complex) {
    let a_phi = (Complex::new(1.0, 0.0) - point.alpha.cos() * branch.sign()) * 0.5;
    (a_phi, Complex::new(-0.5, 0.0), Complex::new(0.0, 0.0))
}

/// Curvature components `(F_{alpha_r phi}, F_{alpha_i phi})`.
pub fn curvature(point: &ExtendedPoint, branch: Branch) -> (Complex, Complex) {
    let s = point.alpha.sin() * (0.5 * branch.sign());
    (s, s * I)
}

/// Discretized path in the extended space.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedPath {
    pub points: Vec<ExtendedPoint>,
    /// Endpoints represent the same physical point.
    pub closed: bool,
}

impl ExtendedPath {
    pub fn new(points: Vec<ExtendedPoint>, closed: bool) -> Result<Self> {
        if points.len() < 3 {
            return Err(Error::InvalidArgument(format!(
                "a path needs at least 3 points, got {}",
                points.len()
            )));
        }
        if points.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidArgument(
                "path contains non-finite points".into(),
            ));
        }
        if closed {
            let (a, b) = (points[0], points[points.len() - 1]);
            let wrap = |x: f64, m: f64| {
                let r = x.rem_euclid(m);
                r.min(m - r)
            };
            if wrap(b.phi - a.phi, TWO_PI) > 1e-9
                || wrap(b.alpha.alpha_r - a.alpha.alpha_r, PI) > 1e-9
                || (b.alpha.alpha_i - a.alpha.alpha_i).abs() > 1e-9
            {
                return Err(Error::InvalidArgument(
                    "closed path endpoints do not coincide".into(),
                ));
            }
        }
        Ok(ExtendedPath { points, closed })
    }

    /// `phi: 0 -> 2 pi f eta` at fixed `alpha`, sampled at `n` points.
    pub fn phi_loop(alpha: MixingAngle, total_angle: f64, n: usize) -> Result<Self> {
        let n = n.max(3);
        let points = (0..n)
            .map(|k| ExtendedPoint::new(total_angle * k as f64 / (n - 1) as f64, alpha))
            .collect();
        let closed = ((total_angle / TWO_PI).round() * TWO_PI - total_angle).abs() < 1e-12
            && total_angle != 0.0;
        Self::new(points, closed)
    }
}

/// Line integral split into its two contributing terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineIntegral {
    pub phase: ComplexPhase,
    pub phi_term: Complex,
    /// Contribution of `A_alpha_r d alpha_r`; an integer multiple of `pi` on
    /// closed loops.
    pub alpha_r_term: Complex,
}

/// Trapezoidal `int A_phi dphi + A_alpha_r d alpha_r` along the path.
pub fn line_integral_phase(path: &ExtendedPath, branch: Branch) -> LineIntegral {
    let mut phi_term = Complex::new(0.0, 0.0);
    let mut alpha_r_term = Complex::new(0.0, 0.0);
    for w in path.points.windows(2) {
        let (a0, ar0, _) = global_connection(&w[0], branch);
        let (a1, ar1, _) = global_connection(&w[1], branch);
        phi_term += (a0 + a1) * (0.5 * (w[1].phi - w[0].phi));
        alpha_r_term += (ar0 + ar1) * (0.5 * (w[1].alpha.alpha_r - w[0].alpha.alpha_r));
    }
    LineIntegral {
        phase: ComplexPhase::from_complex(phi_term + alpha_r_term),
        phi_term,
        alpha_r_term,
    }
}

/// Which component of `alpha` varies across a surface patch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PatchAxis {
    AlphaR,
    AlphaI,
}

/// Coordinate-aligned rectangle `[a0, a1] x [phi0, phi1]` in the
/// `(alpha_axis, phi)` plane, the other alpha component held at `fixed`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Patch {
    pub axis: PatchAxis,
    pub fixed: f64,
    pub a0: f64,
    pub a1: f64,
    pub phi0: f64,
    pub phi1: f64,
    pub resolution: usize,
}

impl Patch {
    fn point(&self, a: f64, phi: f64) -> ExtendedPoint {
        let alpha = match self.axis {
            PatchAxis::AlphaR => MixingAngle::new(a, self.fixed),
            PatchAxis::AlphaI => MixingAngle::new(self.fixed, a),
        };
        ExtendedPoint::new(phi, alpha)
    }

    /// Counter-clockwise boundary in the `(alpha_axis, phi)` plane with
    /// `per_side` segments per edge.
    pub fn boundary(&self, per_side: usize) -> Result<ExtendedPath> {
        let n = per_side.max(1);
        let corners = [
            (self.a0, self.phi0),
            (self.a1, self.phi0),
            (self.a1, self.phi1),
            (self.a0, self.phi1),
            (self.a0, self.phi0),
        ];
        let mut pts = Vec::with_capacity(4 * n + 1);
        for c in corners.windows(2) {
            for k in 0..n {
                let s = k as f64 / n as f64;
                pts.push(self.point(
                    c[0].0 + s * (c[1].0 - c[0].0),
                    c[0].1 + s * (c[1].1 - c[0].1),
                ));
            }
        }
        pts.push(self.point(self.a0, self.phi0));
        ExtendedPath::new(pts, true)
    }
}

fn simpson_weights(n: usize) -> Vec<f64> {
    (0..=n)
        .map(|k| {
            if k == 0 || k == n {
                1.0
            } else if k % 2 == 1 {
                4.0
            } else {
                2.0
            }
        })
        .collect()
}

/// Two-dimensional composite Simpson integral of the curvature over a patch.
pub fn surface_integral_phase(patch: &Patch, branch: Branch) -> Result<ComplexPhase> {
    let n = patch.resolution;
    if n < 8 || !n.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!(
            "patch resolution must be even and >= 8, got {n}"
        )));
    }
    let vals = [patch.a0, patch.a1, patch.phi0, patch.phi1, patch.fixed];
    if vals.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("patch bounds must be finite".into()));
    }
    let ha = (patch.a1 - patch.a0) / n as f64;
    let hp = (patch.phi1 - patch.phi0) / n as f64;
    let w = simpson_weights(n);
    let mut acc = Complex::new(0.0, 0.0);
    for (i, wi) in w.iter().enumerate() {
        let a = patch.a0 + i as f64 * ha;
        for (k, wk) in w.iter().enumerate() {
            let phi = patch.phi0 + k as f64 * hp;
            let (f_r, f_i) = curvature(&patch.point(a, phi), branch);
            let f = match patch.axis {
                PatchAxis::AlphaR => f_r,
                PatchAxis::AlphaI => f_i,
            };
            acc += f * (wi * wk);
        }
    }
    Ok(ComplexPhase::from_complex(acc * (ha * hp / 9.0)))
}

/// Bloch `z` of the right eigenvector, `z = +1` for `|e>`.
pub fn eigenstate_z(params: &DriveParams, branch: Branch) -> Result<f64> {
    let r = frame(params, 0.0)?.right(branch);
    Ok(r[0].norm_sqr() - r[1].norm_sqr())
}

/// Imaginary connection rate `Im(A_phi) phi_dot` at time `t`.
pub fn imag_connection_rate(
    params: &DriveParams,
    schedule: &LoopSchedule,
    branch: Branch,
    t: f64,
) -> Result<f64> {
    let alpha = alpha_from_params(params)?;
    let (a_phi, _, _) = global_connection(&ExtendedPoint::new(0.0, alpha), branch);
    let (_, phi_dot) = schedule.phi_of_t(t)?;
    Ok(a_phi.im * phi_dot)
}

/// Predicted Bloch `z` of the normalized state, `z_ad(0) ± sin a_r sinh a_i phi_dot / Gamma`.
pub fn delta_z_prediction(
    params: &DriveParams,
    schedule: &LoopSchedule,
    branch: Branch,
    t: f64,
) -> Result<f64> {
    if !(params.gamma > 0.0) {
        return Err(Error::InvalidParameter(
            "the z(t) relation needs Gamma > 0".into(),
        ));
    }
    let z0 = eigenstate_z(params, branch)?;
    Ok(z0 + 2.0 * imag_connection_rate(params, schedule, branch, t)? / params.gamma)
}

/// Time-averaged deviation `<Delta z> = 2 theta_im / (T Gamma)`.
pub fn mean_delta_z(theta_im: f64, duration: f64, gamma: f64) -> Result<f64> {
    if !(duration > 0.0 && gamma > 0.0) {
        return Err(Error::InvalidArgument(
            "duration and Gamma must be > 0".into(),
        ));
    }
    Ok(2.0 * theta_im / (duration * gamma))
}
