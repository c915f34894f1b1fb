//! Adaptive Dormand-Prince 5(4) integration for small complex systems.
//!
//! The state is a fixed-size complex vector; the error estimate is taken
//! component-wise over real and imaginary parts. Accepted steps carry the
//! standard 4th-order continuous extension so callers can sample at arbitrary
//! times without constraining the step controller.

use super::linalg::{CMat, CVec};
use crate::error::{Error, Result};

/// Default relative tolerance.
pub const DEFAULT_RTOL: f64 = 1e-10;
/// Default absolute tolerance.
pub const DEFAULT_ATOL: f64 = 1e-12;

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];

const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];

// 5th-order solution minus embedded 4th-order solution.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

/// Step-size controller settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            rtol: DEFAULT_RTOL,
            atol: DEFAULT_ATOL,
        }
    }
}

impl Tolerances {
    /// Single-knob form: `tol` relative and `tol / 100` absolute.
    pub fn from_tol(tol: f64) -> Self {
        Tolerances {
            rtol: tol,
            atol: tol * 1e-2,
        }
    }
}

/// Integrator configuration.
#[derive(Debug, Clone, Copy)]
pub struct Dopri5 {
    pub tol: Tolerances,
    pub max_steps: usize,
    /// Optional upper bound on |h|.
    pub h_max: Option<f64>,
}

impl Default for Dopri5 {
    fn default() -> Self {
        Dopri5 {
            tol: Tolerances::default(),
            max_steps: 5_000_000,
            h_max: None,
        }
    }
}

/// Result of an integration run.
#[derive(Debug, Clone)]
pub struct Solution<const N: usize> {
    /// Accepted step end points, starting with `(t0, y0)` and ending exactly at `t1`.
    pub steps: Vec<(f64, CVec<N>)>,
    /// States at the requested sample times, in request order.
    pub samples: Vec<CVec<N>>,
    pub rejected: usize,
}

impl<const N: usize> Solution<N> {
    pub fn final_state(&self) -> CVec<N> {
        self.steps
            .last()
            .map(|s| s.1)
            .expect("solution has at least one point")
    }
}

/// Dense-output polynomial of one accepted step.
struct StepInterpolant<const N: usize> {
    t0: f64,
    h: f64,
    cont: [CVec<N>; 5],
}

impl<const N: usize> StepInterpolant<N> {
    fn eval(&self, t: f64) -> CVec<N> {
        let s = (t - self.t0) / self.h;
        let s1 = 1.0 - s;
        let [c0, c1, c2, c3, c4] = self.cont;
        let inner = c3 + c4.scale_real(s1);
        let inner = c2 + inner.scale_real(s);
        let inner = c1 + inner.scale_real(s1);
        c0 + inner.scale_real(s)
    }
}

fn axpy<const N: usize>(y: &CVec<N>, h: f64, coeffs: &[f64], ks: &[CVec<N>]) -> CVec<N> {
    let mut out = *y;
    for (a, k) in coeffs.iter().zip(ks.iter()) {
        if *a != 0.0 {
            out += k.scale_real(h * a);
        }
    }
    out
}

fn error_norm<const N: usize>(err: &CVec<N>, y0: &CVec<N>, y1: &CVec<N>, tol: Tolerances) -> f64 {
    let mut acc = 0.0;
    for i in 0..N {
        let parts = [
            (err[i].re, y0[i].re, y1[i].re),
            (err[i].im, y0[i].im, y1[i].im),
        ];
        for (e, a, b) in parts {
            let sc = tol.atol + tol.rtol * a.abs().max(b.abs());
            acc += (e / sc).powi(2);
        }
    }
    (acc / (2 * N) as f64).sqrt()
}

impl Dopri5 {
    pub fn new(tol: Tolerances) -> Self {
        Dopri5 {
            tol,
            ..Default::default()
        }
    }

    /// Integrates `dy/dt = rhs(t, y)` from `t0` to `t1`, sampling the dense
    /// output at `sample_times` (each must lie in `[t0, t1]`).
    pub fn solve<const N: usize, F>(
        &self,
        mut rhs: F,
        y0: CVec<N>,
        t0: f64,
        t1: f64,
        sample_times: &[f64],
    ) -> Result<Solution<N>>
    where
        F: FnMut(f64, &CVec<N>) -> CVec<N>,
    {
        if !(self.tol.rtol > 0.0 && self.tol.atol >= 0.0) {
            return Err(Error::InvalidArgument("tolerances must be positive".into()));
        }
        if !(t1 > t0) || !t0.is_finite() || !t1.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "integration span [{t0}, {t1}] must be finite and increasing"
            )));
        }
        if let Some(bad) = sample_times.iter().find(|&&t| !(t >= t0 && t <= t1)) {
            return Err(Error::InvalidArgument(format!(
                "sample time {bad} outside [{t0}, {t1}]"
            )));
        }
        if !y0.is_finite() {
            return Err(Error::NonFinite(t0));
        }

        let span = t1 - t0;
        let h_min = 1e-12 * span;
        let h_max = self.h_max.unwrap_or(span).min(span);

        // Samples are emitted in time order, then scattered back to request order.
        let mut order: Vec<usize> = (0..sample_times.len()).collect();
        order.sort_by(|&a, &b| sample_times[a].total_cmp(&sample_times[b]));
        let mut samples = vec![CVec::zeros(); sample_times.len()];
        let mut next_sample = 0;
        while next_sample < order.len() && sample_times[order[next_sample]] <= t0 {
            samples[order[next_sample]] = y0;
            next_sample += 1;
        }

        let mut t = t0;
        let mut y = y0;
        let mut k0 = rhs(t, &y);
        let mut h = self.initial_step(&mut rhs, t, &y, &k0, h_max);
        let mut steps = vec![(t0, y0)];
        let mut rejected = 0;
        let mut fac_old = 1e-4_f64;

        while t < t1 {
            if steps.len() + rejected > self.max_steps {
                return Err(Error::MaxStepsExceeded(self.max_steps));
            }
            let last = t + h >= t1 - 1e-14 * span;
            if last {
                h = t1 - t;
            }

            let mut ks = [CVec::<N>::zeros(); 7];
            ks[0] = k0;
            for s in 1..6 {
                let ys = axpy(&y, h, &A[s][..s], &ks[..s]);
                ks[s] = rhs(t + C[s] * h, &ys);
            }
            let y_new = axpy(&y, h, &A[6], &ks[..6]);
            ks[6] = rhs(t + h, &y_new);

            let err_vec = {
                let mut e = CVec::<N>::zeros();
                for (coef, k) in E.iter().zip(ks.iter()) {
                    if *coef != 0.0 {
                        e += k.scale_real(h * coef);
                    }
                }
                e
            };
            let err = error_norm(&err_vec, &y, &y_new, self.tol);
            if !err.is_finite() || !y_new.is_finite() {
                h *= 0.2;
                rejected += 1;
                if h.abs() < h_min {
                    return Err(Error::NonFinite(t));
                }
                continue;
            }

            if err <= 1.0 {
                // Lund stabilisation (PI control) as in Hairer's DOPRI5.
                let fac = (0.9 * err.max(1e-16).powf(-0.17) * fac_old.powf(0.04)).clamp(0.2, 10.0);
                fac_old = err.max(1e-4);

                let t_new = if last { t1 } else { t + h };
                let ydiff = y_new - y;
                let bspl = ks[0].scale_real(h) - ydiff;
                let mut dsum = CVec::<N>::zeros();
                for (coef, k) in D.iter().zip(ks.iter()) {
                    if *coef != 0.0 {
                        dsum += k.scale_real(*coef);
                    }
                }
                let interp = StepInterpolant {
                    t0: t,
                    h,
                    cont: [
                        y,
                        ydiff,
                        bspl,
                        ydiff - ks[6].scale_real(h) - bspl,
                        dsum.scale_real(h),
                    ],
                };
                while next_sample < order.len() {
                    let ts = sample_times[order[next_sample]];
                    if ts > t_new {
                        break;
                    }
                    samples[order[next_sample]] = if ts >= t1 { y_new } else { interp.eval(ts) };
                    next_sample += 1;
                }

                t = t_new;
                y = y_new;
                k0 = ks[6];
                steps.push((t, y));
                h = (h * fac).min(h_max);
            } else {
                rejected += 1;
                let fac = (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
                h *= fac;
            }
            if t < t1 && h.abs() < h_min {
                return Err(Error::StepSizeUnderflow { t, h });
            }
        }

        Ok(Solution {
            steps,
            samples,
            rejected,
        })
    }

    fn initial_step<const N: usize, F>(
        &self,
        rhs: &mut F,
        t: f64,
        y: &CVec<N>,
        f0: &CVec<N>,
        h_max: f64,
    ) -> f64
    where
        F: FnMut(f64, &CVec<N>) -> CVec<N>,
    {
        let scale = |i: usize, v: &CVec<N>| -> (f64, f64) {
            (
                self.tol.atol + self.tol.rtol * v[i].re.abs(),
                self.tol.atol + self.tol.rtol * v[i].im.abs(),
            )
        };
        let wnorm = |v: &CVec<N>| -> f64 {
            let mut acc = 0.0;
            for i in 0..N {
                let (sr, si) = scale(i, y);
                acc += (v[i].re / sr).powi(2) + (v[i].im / si).powi(2);
            }
            (acc / (2 * N) as f64).sqrt()
        };
        let d0 = wnorm(y);
        let d1 = wnorm(f0);
        let h0 = if d0 < 1e-5 || d1 < 1e-5 {
            1e-6
        } else {
            0.01 * d0 / d1
        };
        let h0 = h0.min(h_max);
        let y1 = *y + f0.scale_real(h0);
        let f1 = rhs(t + h0, &y1);
        let d2 = wnorm(&(f1 - *f0)) / h0;
        let h1 = if d1.max(d2) <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(0.2)
        };
        (100.0 * h0).min(h1).min(h_max)
    }
}

/// Propagates `dy/dt = G(t) y` for a time-dependent matrix generator and
/// returns the accepted-step trajectory `(t, y)`, ending exactly at `t1`.
///
/// `tol` is used as the relative tolerance, with absolute tolerance `tol/100`.
pub fn integrate_linear<const N: usize, G>(
    generator: G,
    y0: CVec<N>,
    t_span: [f64; 2],
    tol: f64,
) -> Result<Vec<(f64, CVec<N>)>>
where
    G: Fn(f64) -> CMat<N>,
{
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "tolerance must be > 0, got {tol}"
        )));
    }
    let solver = Dopri5::new(Tolerances::from_tol(tol));
    let sol = solver.solve(
        |t, y| generator(t).mul_vec(y),
        y0,
        t_span[0],
        t_span[1],
        &[],
    )?;
    Ok(sol.steps)
}
