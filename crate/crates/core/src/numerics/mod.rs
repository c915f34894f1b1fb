//! Complex arithmetic, fixed-size linear algebra, ODE integration and
//! scalar calculus helpers.

pub mod linalg;
pub mod ode;

pub use linalg::{CMat, CMat2, CMat3, CVec, CVec2, CVec3};
pub use ode::{integrate_linear, Dopri5, Solution, Tolerances};

use crate::error::{Error, Result};

/// Complex scalar used throughout the crate.
pub type Complex = num_complex::Complex64;

/// Default step for central differences in the drive phase [rad].
pub const FD_STEP: f64 = 1e-6;

/// Principal square root with the cut on the negative real axis.
///
/// Returns `w` with `w*w = z` and `Re(w) >= 0`; on the cut (`Re(w) = 0`) the
/// root with `Im(w) >= 0` is chosen regardless of the sign of `Im(z)`'s zero.
pub fn principal_sqrt(z: Complex) -> Complex {
    if z.re == 0.0 && z.im == 0.0 {
        return Complex::new(0.0, 0.0);
    }
    let r = z.norm();
    // Stable half-angle formulas: avoid cancellation in r ± re.
    let t = ((r + z.re.abs()) * 0.5).sqrt();
    if z.re >= 0.0 {
        Complex::new(t, z.im / (2.0 * t))
    } else if z.im == 0.0 {
        Complex::new(0.0, t)
    } else {
        Complex::new(z.im.abs() / (2.0 * t), t.copysign(z.im))
    }
}

/// Symmetric difference quotient `(f(x+h) - f(x-h)) / 2h`.
pub fn central_diff<F>(f: F, x: f64, h: f64) -> Complex
where
    F: Fn(f64) -> Complex,
{
    (f(x + h) - f(x - h)) / (2.0 * h)
}

/// Composite Simpson rule over `n` (even) subintervals.
pub fn quadrature<F>(f: F, a: f64, b: f64, n: usize) -> Result<Complex>
where
    F: Fn(f64) -> Complex,
{
    if n < 2 || !n.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!(
            "Simpson rule needs an even number of subintervals >= 2, got {n}"
        )));
    }
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += f(a + i as f64 * h) * w;
    }
    Ok(acc * (h / 3.0))
}
