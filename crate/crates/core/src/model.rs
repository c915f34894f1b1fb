//! Effective non-Hermitian qubit Hamiltonian and its bi-orthogonal eigensystem.
//!
//! Basis ordering is `{|0>, |1>} = {|e>, |f>}`. The Hamiltonian is
//!
//! ```text
//! H(phi) = [[Delta - i Gamma,  J e^{+i phi}],
//!           [J e^{-i phi},     0           ]]
//! ```
//!
//! with eigenvalues `E± = (eps ± delta)/2`, `eps = Delta - i Gamma` and
//! `delta = 2 sqrt(J² + eps²/4)` on the principal branch. Right kets and left
//! bras share the coefficient `c± = (-eps ± delta)/(2J)` and are normalized so
//! that `<R±|R±> = 1`; consequently `<L±|R±>` is a nontrivial scalar.

use std::f64::consts::PI;
use std::fmt;

use crate::error::{Error, Result};
use crate::numerics::{principal_sqrt, CMat2, CVec2, Complex};

/// Distance from the exceptional point (in |delta|, rad/us) below which the
/// eigensystem is refused.
pub const EP_TOL: f64 = 1e-9;

/// Differential decay rate of the reference device [1/us].
pub const GAMMA_DEFAULT: f64 = 0.426;

const I: Complex = Complex::new(0.0, 1.0);

/// Static drive parameters in angular-frequency units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveParams {
    /// Coupling amplitude J [rad/us].
    pub j: f64,
    /// Detuning Delta [rad/us].
    pub delta: f64,
    /// Differential decay Gamma [1/us].
    pub gamma: f64,
}

impl DriveParams {
    /// Validated parameters: finite, `J >= 0`, `Gamma >= 0` and away from the
    /// exceptional point.
    pub fn new(j: f64, delta: f64, gamma: f64) -> Result<Self> {
        let p = Self::unchecked(j, delta, gamma)?;
        p.ep_distance()?;
        Ok(p)
    }

    /// Like [`DriveParams::new`] but accepts parameters at the exceptional
    /// point (needed for bare Hamiltonians such as an undriven qubit).
    pub fn unchecked(j: f64, delta: f64, gamma: f64) -> Result<Self> {
        if !(j.is_finite() && delta.is_finite() && gamma.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "non-finite drive parameters (J={j}, Delta={delta}, Gamma={gamma})"
            )));
        }
        if j < 0.0 {
            return Err(Error::InvalidParameter(format!("J must be >= 0, got {j}")));
        }
        if gamma < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "Gamma must be >= 0, got {gamma}"
            )));
        }
        Ok(DriveParams { j, delta, gamma })
    }

    /// Detuning given as `Delta/2pi` in MHz.
    pub fn from_mhz(j: f64, delta_mhz: f64, gamma: f64) -> Result<Self> {
        Self::new(j, 2.0 * PI * delta_mhz, gamma)
    }

    pub fn with_j(self, j: f64) -> Result<Self> {
        Self::new(j, self.delta, self.gamma)
    }

    pub fn epsilon(&self) -> Complex {
        Complex::new(self.delta, -self.gamma)
    }

    /// `delta = 2 sqrt(J² + eps²/4)`, principal branch.
    pub fn delta_split(&self) -> Complex {
        let eps = self.epsilon();
        2.0 * principal_sqrt(Complex::new(self.j * self.j, 0.0) + eps * eps / 4.0)
    }

    /// Returns |delta| or an error when it is within [`EP_TOL`] of zero.
    pub fn ep_distance(&self) -> Result<f64> {
        let d = self.delta_split().norm();
        if d <= EP_TOL {
            Err(Error::ExceptionalPoint {
                distance: d,
                tolerance: EP_TOL,
            })
        } else {
            Ok(d)
        }
    }

    /// `eps/delta`, the complex mixing ratio; `cos(alpha)` in the global gauge.
    pub fn eps_over_delta(&self) -> Result<Complex> {
        self.ep_distance()?;
        Ok(self.epsilon() / self.delta_split())
    }
}

/// Eigenstate label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }

    pub fn other(self) -> Branch {
        match self {
            Branch::Plus => Branch::Minus,
            Branch::Minus => Branch::Plus,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Branch::Plus => "+",
            Branch::Minus => "-",
        }
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Loop orientation `eta`; `Minus` is clockwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Plus,
    Minus,
}

impl Direction {
    pub fn eta(self) -> f64 {
        match self {
            Direction::Plus => 1.0,
            Direction::Minus => -1.0,
        }
    }

    pub fn reversed(self) -> Direction {
        match self {
            Direction::Plus => Direction::Minus,
            Direction::Minus => Direction::Plus,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Direction::Plus => "+",
            Direction::Minus => "-",
        }
    }

    pub fn from_sign(eta: i32) -> Option<Direction> {
        match eta {
            1 => Some(Direction::Plus),
            -1 => Some(Direction::Minus),
            _ => None,
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// A complex phase split into its real (rotation, rad) and imaginary
/// (log-amplitude) parts.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ComplexPhase {
    pub real_part: f64,
    pub imag_part: f64,
}

impl ComplexPhase {
    pub fn new(real_part: f64, imag_part: f64) -> Self {
        ComplexPhase {
            real_part,
            imag_part,
        }
    }

    pub fn from_complex(z: Complex) -> Self {
        ComplexPhase::new(z.re, z.im)
    }

    pub fn to_complex(self) -> Complex {
        Complex::new(self.real_part, self.imag_part)
    }

    pub fn is_finite(&self) -> bool {
        self.real_part.is_finite() && self.imag_part.is_finite()
    }

    /// Phase factor `e^{i theta}`.
    pub fn factor(self) -> Complex {
        (I * self.to_complex()).exp()
    }
}

impl From<Complex> for ComplexPhase {
    fn from(z: Complex) -> Self {
        ComplexPhase::from_complex(z)
    }
}

/// Right/left eigenvectors and eigenvalues at one drive phase.
#[derive(Debug, Clone, Copy)]
pub struct BiorthogonalFrame {
    pub params: DriveParams,
    pub phi: f64,
    pub epsilon: Complex,
    /// `delta = delta_r - i delta_i`.
    pub delta: Complex,
    pub delta_r: f64,
    pub delta_i: f64,
    pub e_plus: Complex,
    pub e_minus: Complex,
    pub r_plus: CVec2,
    pub r_minus: CVec2,
    /// Bra components of `<L+|` (multiply kets without conjugation).
    pub l_plus: CVec2,
    pub l_minus: CVec2,
}

/// Normalized right ket and left bra of one branch.
fn eigen_pair(small: Complex, large_phase: Option<Complex>, phi: f64) -> (CVec2, CVec2) {
    let ph = Complex::new(0.0, phi).exp();
    match large_phase {
        // Coefficient `small` (|c| <= 1): (1, c e^{-i phi}) / sqrt(1 + |c|²).
        None => {
            let n = (1.0 + small.norm_sqr()).sqrt();
            let r = CVec2::new([Complex::new(1.0 / n, 0.0), small * ph.conj() / n]);
            let l = CVec2::new([Complex::new(1.0 / n, 0.0), small * ph / n]);
            (r, l)
        }
        // Coefficient 1/|c| <= 1 with phase p: (|1/c|, p e^{-i phi}) / sqrt(1 + |1/c|²),
        // which equals the form above whenever c is finite and stays regular at J = 0.
        Some(p) => {
            let u = small.norm();
            let n = (1.0 + u * u).sqrt();
            let r = CVec2::new([Complex::new(u / n, 0.0), p * ph.conj() / n]);
            let l = CVec2::new([Complex::new(u / n, 0.0), p * ph / n]);
            (r, l)
        }
    }
}

fn unit_phase(z: Complex) -> Complex {
    let n = z.norm();
    if n > 0.0 {
        z / n
    } else {
        Complex::new(1.0, 0.0)
    }
}

impl BiorthogonalFrame {
    pub fn right(&self, branch: Branch) -> CVec2 {
        match branch {
            Branch::Plus => self.r_plus,
            Branch::Minus => self.r_minus,
        }
    }

    pub fn left(&self, branch: Branch) -> CVec2 {
        match branch {
            Branch::Plus => self.l_plus,
            Branch::Minus => self.l_minus,
        }
    }

    pub fn energy(&self, branch: Branch) -> Complex {
        match branch {
            Branch::Plus => self.e_plus,
            Branch::Minus => self.e_minus,
        }
    }

    /// Bi-orthogonal product `<L±|R±>`.
    pub fn overlap(&self, branch: Branch) -> Complex {
        self.left(branch).contract(&self.right(branch))
    }

    pub fn eps_over_delta(&self) -> Complex {
        self.epsilon / self.delta
    }

    /// Eigenbasis amplitudes `a± = <L±|psi> / <L±|R±>`, so that
    /// `psi = a+ |R+> + a- |R->`.
    pub fn amplitudes(&self, psi: &CVec2) -> (Complex, Complex) {
        (
            self.l_plus.contract(psi) / self.overlap(Branch::Plus),
            self.l_minus.contract(psi) / self.overlap(Branch::Minus),
        )
    }

    /// Inverse of [`BiorthogonalFrame::amplitudes`].
    pub fn compose(&self, a_plus: Complex, a_minus: Complex) -> CVec2 {
        self.r_plus.scale(a_plus) + self.r_minus.scale(a_minus)
    }
}

/// Effective Hamiltonian at drive phase `phi`.
pub fn hamiltonian(params: &DriveParams, phi: f64) -> CMat2 {
    let coupling = Complex::from_polar(params.j, phi);
    CMat2::new([
        [params.epsilon(), coupling],
        [coupling.conj(), Complex::new(0.0, 0.0)],
    ])
}

/// Bi-orthogonal eigensystem at `phi`.
pub fn frame(params: &DriveParams, phi: f64) -> Result<BiorthogonalFrame> {
    params.ep_distance()?;
    let eps = params.epsilon();
    let delta = params.delta_split();
    let two_j = Complex::new(2.0 * params.j, 0.0);
    // c± = 2J / (eps ± delta) = (-eps ± delta) / 2J, with c+ c- = -1.
    let sum = eps + delta;
    let diff = eps - delta;
    let ((r_plus, l_plus), (r_minus, l_minus)) = if sum.norm() >= diff.norm() {
        let c_plus = two_j / sum;
        (
            eigen_pair(c_plus, None, phi),
            eigen_pair(c_plus, Some(unit_phase(-sum)), phi),
        )
    } else {
        let c_minus = two_j / diff;
        (
            eigen_pair(c_minus, Some(unit_phase(-diff)), phi),
            eigen_pair(c_minus, None, phi),
        )
    };
    Ok(BiorthogonalFrame {
        params: *params,
        phi,
        epsilon: eps,
        delta,
        delta_r: delta.re,
        delta_i: -delta.im,
        e_plus: (eps + delta) / 2.0,
        e_minus: (eps - delta) / 2.0,
        r_plus,
        r_minus,
        l_plus,
        l_minus,
    })
}

/// Berry connection `A± = 1/2 ∓ eps/(2 delta)`; independent of `phi`.
pub fn berry_connection(params: &DriveParams, branch: Branch) -> Result<Complex> {
    let ratio = params.eps_over_delta()?;
    Ok(Complex::new(0.5, 0.0) - ratio * (branch.sign() * 0.5))
}

/// Geometric phase `f pi eta (1 ∓ eps/delta)` for a loop (f = 1) or an open
/// path covering the fraction `f` of a full turn.
pub fn berry_phase(
    params: &DriveParams,
    branch: Branch,
    direction: Direction,
    winding_fraction: f64,
) -> Result<ComplexPhase> {
    if !(winding_fraction > 0.0 && winding_fraction <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "winding fraction must lie in (0, 1], got {winding_fraction}"
        )));
    }
    let ratio = params.eps_over_delta()?;
    let theta = (Complex::new(1.0, 0.0) - ratio * branch.sign())
        * (winding_fraction * PI * direction.eta());
    Ok(ComplexPhase::from_complex(theta))
}

/// Dynamical phase `lambda± = -E± T`; `E±` is constant along a pure-phi loop.
pub fn dynamical_phase(
    params: &DriveParams,
    branch: Branch,
    duration: f64,
) -> Result<ComplexPhase> {
    if !(duration >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "duration must be >= 0, got {duration}"
        )));
    }
    let energy = (params.epsilon() + params.delta_split() * branch.sign()) / 2.0;
    Ok(ComplexPhase::from_complex(-energy * duration))
}

/// Exact eigenstate swap `M|R+> = |R->`, `M|R-> = -|R+>`.
pub fn swap_operator(params: &DriveParams, phi: f64) -> Result<CMat2> {
    let fr = frame(params, phi)?;
    Ok(swap_from_frame(&fr))
}

pub(crate) fn swap_from_frame(fr: &BiorthogonalFrame) -> CMat2 {
    CMat2::dyad(&fr.r_minus, &fr.l_plus).scale(fr.overlap(Branch::Plus).inv())
        - CMat2::dyad(&fr.r_plus, &fr.l_minus).scale(fr.overlap(Branch::Minus).inv())
}

/// Eigenbasis tomography observables
/// `Sx = |L-><L+| + |L+><L-|`, `Sy = i|L-><L+| - i|L+><L-|`, returned as
/// `(x, y) = (<psi|Sx|psi>, <psi|Sy|psi>)` for an unnormalized state.
pub fn tomography_xy(state: &CVec2, params: &DriveParams, phi: f64) -> Result<(Complex, Complex)> {
    let fr = frame(params, phi)?;
    Ok(tomography_from_frame(state, &fr))
}

pub(crate) fn tomography_from_frame(state: &CVec2, fr: &BiorthogonalFrame) -> (Complex, Complex) {
    // Kets |L±> are the conjugates of the stored bra components.
    let ket_lp = fr.l_plus.conj();
    let ket_lm = fr.l_minus.conj();
    let sx = CMat2::dyad(&ket_lm, &fr.l_plus) + CMat2::dyad(&ket_lp, &fr.l_minus);
    let sy = CMat2::dyad(&ket_lm, &fr.l_plus).scale(I) - CMat2::dyad(&ket_lp, &fr.l_minus).scale(I);
    (sx.expectation(state), sy.expectation(state))
}
