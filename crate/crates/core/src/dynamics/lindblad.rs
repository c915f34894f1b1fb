//! Three-level `{g, e, f}` master equation with `e -> g` and `f -> e` decay.

use crate::error::{Error, Result};
use crate::model::DriveParams;
use crate::numerics::{CMat3, CVec, Complex, Dopri5, Tolerances};

use super::{
    bloch_of_block, manifold_block, sample_grid, LoopSchedule, RecordStates, TrajectoryRecord,
};

/// Default `f -> e` decay rate [1/us].
pub const GAMMA_F_DEFAULT: f64 = 0.1;

const I: Complex = Complex::new(0.0, 1.0);

/// Individual decay rates of the transmon ladder together with the drive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThreeLevelParams {
    pub gamma_e: f64,
    pub gamma_f: f64,
    pub drive: DriveParams,
}

impl ThreeLevelParams {
    /// Checks `gamma_e >= gamma_f >= 0` and `(gamma_e - gamma_f) / 2 = Gamma`.
    pub fn new(gamma_e: f64, gamma_f: f64, drive: DriveParams) -> Result<Self> {
        if !(gamma_f >= 0.0 && gamma_e >= gamma_f && gamma_e.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "decay rates must satisfy gamma_e >= gamma_f >= 0, got ({gamma_e}, {gamma_f})"
            )));
        }
        let implied = 0.5 * (gamma_e - gamma_f);
        if (implied - drive.gamma).abs() > 1e-12 * (1.0 + drive.gamma) {
            return Err(Error::InvalidParameter(format!(
                "(gamma_e - gamma_f)/2 = {implied} does not match Gamma = {}",
                drive.gamma
            )));
        }
        Ok(ThreeLevelParams {
            gamma_e,
            gamma_f,
            drive,
        })
    }

    /// Sets `gamma_e = gamma_f + 2 Gamma`.
    pub fn from_drive(drive: DriveParams, gamma_f: f64) -> Result<Self> {
        Self::new(gamma_f + 2.0 * drive.gamma, gamma_f, drive)
    }

    /// Hermitian drive Hamiltonian on `{g, e, f}`.
    pub fn hamiltonian(&self, phi: f64) -> CMat3 {
        let d = &self.drive;
        let mut h = CMat3::zeros();
        h[(1, 1)] = Complex::new(d.delta, 0.0);
        h[(1, 2)] = Complex::from_polar(d.j, phi);
        h[(2, 1)] = Complex::from_polar(d.j, -phi);
        h
    }

    /// Lindblad generator applied to `rho`.
    pub fn generator(&self, phi: f64, rho: &CMat3) -> CMat3 {
        let h = self.hamiltonian(phi);
        let mut out = h.commutator(rho).scale(-I);
        let (ge, gf) = (self.gamma_e, self.gamma_f);
        // L1 = sqrt(ge)|g><e|, L2 = sqrt(gf)|e><f|, written out element-wise.
        out[(0, 0)] += rho[(1, 1)] * ge;
        out[(1, 1)] += rho[(2, 2)] * gf;
        for i in 0..3 {
            for j in 0..3 {
                let wi = decay_weight(i, ge, gf);
                let wj = decay_weight(j, ge, gf);
                out[(i, j)] -= rho[(i, j)] * (0.5 * (wi + wj));
            }
        }
        out
    }
}

fn decay_weight(level: usize, ge: f64, gf: f64) -> f64 {
    match level {
        1 => ge,
        2 => gf,
        _ => 0.0,
    }
}

fn to_vec(m: &CMat3) -> CVec<9> {
    let mut v = CVec::<9>::zeros();
    for i in 0..3 {
        for j in 0..3 {
            v[3 * i + j] = m[(i, j)];
        }
    }
    v
}

fn to_mat(v: &CVec<9>) -> CMat3 {
    let mut m = CMat3::zeros();
    for i in 0..3 {
        for j in 0..3 {
            m[(i, j)] = v[3 * i + j];
        }
    }
    m
}

/// Rejects matrices that are not Hermitian, positive and of unit trace.
pub fn validate_density(rho: &CMat3) -> Result<()> {
    if !rho.is_finite() {
        return Err(Error::InvalidArgument(
            "density matrix is not finite".into(),
        ));
    }
    if (*rho - rho.dagger()).norm() > 1e-10 {
        return Err(Error::InvalidArgument(
            "density matrix is not Hermitian".into(),
        ));
    }
    let tr = rho.trace();
    if (tr.re - 1.0).abs() > 1e-10 || tr.im.abs() > 1e-10 {
        return Err(Error::InvalidArgument(format!(
            "density matrix trace is {tr}, expected 1"
        )));
    }
    let min_eig = rho.hermitian_eigenvalues()[0];
    if min_eig < -1e-10 {
        return Err(Error::InvalidArgument(format!(
            "density matrix has negative eigenvalue {min_eig}"
        )));
    }
    Ok(())
}

/// Final value of the master-equation flow applied to an arbitrary operator.
///
/// The flow is linear, so this also propagates coherences `|a><b|` that are not
/// density matrices; no validation of `x0` beyond finiteness is done.
pub fn propagate_operator(
    params3: &ThreeLevelParams,
    schedule: &LoopSchedule,
    x0: &CMat3,
    tol: f64,
) -> Result<CMat3> {
    if !x0.is_finite() {
        return Err(Error::InvalidArgument(
            "initial operator is not finite".into(),
        ));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "tolerance must be > 0, got {tol}"
        )));
    }
    let rhs = |t: f64, y: &CVec<9>| {
        let (phi, _) = schedule
            .phi_of_t(t)
            .unwrap_or((schedule.total_angle(), 0.0));
        to_vec(&params3.generator(phi, &to_mat(y)))
    };
    let sol = Dopri5::new(Tolerances::from_tol(tol)).solve(
        rhs,
        to_vec(x0),
        0.0,
        schedule.duration,
        &[],
    )?;
    Ok(to_mat(&sol.final_state()))
}

/// Integrates the master equation for the vectorized density matrix.
pub fn propagate_lindblad(
    params3: &ThreeLevelParams,
    schedule: &LoopSchedule,
    rho0: &CMat3,
    tol: f64,
    n_samples: usize,
) -> Result<TrajectoryRecord> {
    validate_density(rho0)?;
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "tolerance must be > 0, got {tol}"
        )));
    }
    let times = sample_grid(schedule.duration, n_samples);
    let rhs = |t: f64, y: &CVec<9>| {
        let (phi, _) = schedule
            .phi_of_t(t)
            .unwrap_or((schedule.total_angle(), 0.0));
        to_vec(&params3.generator(phi, &to_mat(y)))
    };
    let sol = Dopri5::new(Tolerances::from_tol(tol)).solve(
        rhs,
        to_vec(rho0),
        0.0,
        schedule.duration,
        &times,
    )?;
    let mut states: Vec<CMat3> = sol.samples.iter().map(to_mat).collect();
    if let Some(last) = states.last_mut() {
        *last = to_mat(&sol.final_state());
    }
    let mut norms_sq = Vec::with_capacity(states.len());
    let mut bloch = Vec::with_capacity(states.len());
    for rho in &states {
        let block = manifold_block(rho);
        norms_sq.push(block.trace().re);
        bloch.push(bloch_of_block(&block)?);
    }
    let schedule_phi = times
        .iter()
        .map(|&t| schedule.phi_of_t(t).map(|p| p.0))
        .collect::<Result<Vec<_>>>()?;
    Ok(TrajectoryRecord {
        drive: params3.drive,
        times,
        states: RecordStates::Mixed(states),
        norms_sq,
        bloch,
        schedule_phi,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{propagate_nh, survival_probability, Ramp, RampShape};
    use crate::model::{frame, Direction, GAMMA_DEFAULT};
    use crate::numerics::CVec2;

    fn embed(psi: &CVec2) -> CMat3 {
        let v = CVec::<3>::new([Complex::new(0.0, 0.0), psi[0], psi[1]]);
        v.outer(&v).scale_real(1.0 / v.norm_sq())
    }

    #[test]
    fn default_split_matches_gamma() {
        let d = DriveParams::new(1.0, 1.0, GAMMA_DEFAULT).unwrap();
        let p = ThreeLevelParams::from_drive(d, GAMMA_F_DEFAULT).unwrap();
        assert!((p.gamma_e - 0.952).abs() < 1e-12);
        assert!(ThreeLevelParams::new(0.5, 0.1, d).is_err());
        assert!(ThreeLevelParams::new(0.1, 0.2, DriveParams::new(1.0, 1.0, 0.0).unwrap()).is_err());
    }

    #[test]
    fn undriven_excited_state_decays_by_rate_equation() {
        let d = DriveParams::new(0.0, 1.0, GAMMA_DEFAULT).unwrap();
        let p = ThreeLevelParams::from_drive(d, GAMMA_F_DEFAULT).unwrap();
        let s = LoopSchedule::new(Direction::Plus, 3.0, 1.0, Ramp::ConstantRate).unwrap();
        let rho0 = embed(&CVec2::basis(0));
        let rec = propagate_lindblad(&p, &s, &rho0, 1e-10, 31).unwrap();
        let RecordStates::Mixed(states) = &rec.states else {
            panic!()
        };
        for (t, rho) in rec.times.iter().zip(states) {
            let pe = (-p.gamma_e * t).exp();
            assert!((rho[(1, 1)].re - pe).abs() < 1e-9);
            assert!((rho[(0, 0)].re - (1.0 - pe)).abs() < 1e-9);
            assert!((rho.trace().re - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn stays_a_valid_density_matrix() {
        let d = DriveParams::from_mhz(2.17, 0.51, GAMMA_DEFAULT).unwrap();
        let p = ThreeLevelParams::from_drive(d, 0.3).unwrap();
        let s = LoopSchedule::with_shape(Direction::Minus, 3.0, 1.0, RampShape::default()).unwrap();
        let rho0 = embed(&frame(&d, 0.0).unwrap().r_minus);
        let rec = propagate_lindblad(&p, &s, &rho0, 1e-10, 61).unwrap();
        let RecordStates::Mixed(states) = &rec.states else {
            panic!()
        };
        for rho in states {
            assert!((rho.trace().re - 1.0).abs() < 1e-9);
            assert!((*rho - rho.dagger()).norm() < 1e-10);
            assert!(rho.hermitian_eigenvalues()[0] > -1e-9);
        }
        for b in &rec.bloch {
            assert!((b[0] * b[0] + b[1] * b[1] + b[2] * b[2]).sqrt() <= 1.0 + 1e-9);
        }
    }

    #[test]
    fn no_jump_limit_reproduces_effective_hamiltonian() {
        let d = DriveParams::from_mhz(4.78, 1.05, GAMMA_DEFAULT).unwrap();
        let p = ThreeLevelParams::from_drive(d, 0.0).unwrap();
        let s = LoopSchedule::with_shape(Direction::Plus, 3.0, 1.0, RampShape::default()).unwrap();
        let psi0 = frame(&d, 0.0).unwrap().r_minus;
        let nh = propagate_nh(&d, &s, &psi0, 1e-11, 41).unwrap();
        let lb = propagate_lindblad(&p, &s, &embed(&psi0), 1e-11, 41).unwrap();
        let (RecordStates::Pure(kets), RecordStates::Mixed(rhos)) = (&nh.states, &lb.states) else {
            panic!()
        };
        for (psi, rho) in kets.iter().zip(rhos) {
            let block = manifold_block(rho);
            let pure = psi.outer(psi);
            assert!((block - pure).norm() < 1e-8);
        }
        let s_nh = survival_probability(&nh).unwrap();
        let s_lb = survival_probability(&lb).unwrap();
        for (a, b) in s_nh.iter().zip(&s_lb) {
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn operator_flow_is_linear_and_matches_density_flow() {
        let d = DriveParams::from_mhz(2.17, 0.51, GAMMA_DEFAULT).unwrap();
        let p = ThreeLevelParams::from_drive(d, 0.2).unwrap();
        let s = LoopSchedule::with_shape(Direction::Plus, 2.0, 1.0, RampShape::default()).unwrap();
        let fr = frame(&d, 0.0).unwrap();
        let (rp, rm) = (embed(&fr.r_plus), embed(&fr.r_minus));
        let lift = |v: &CVec2| CVec::<3>::new([Complex::new(0.0, 0.0), v[0], v[1]]);
        let cross = lift(&fr.r_plus).outer(&lift(&fr.r_minus));
        let sum = lift(&(fr.r_plus + fr.r_minus));
        let full = sum.outer(&sum);
        let f = |x: &CMat3| propagate_operator(&p, &s, x, 1e-11).unwrap();
        let lhs = f(&full);
        let fc = f(&cross);
        let rhs = f(&rp) + f(&rm) + fc + fc.dagger();
        assert!((lhs - rhs).norm() < 1e-9);
        let rec = propagate_lindblad(&p, &s, &rp, 1e-11, 3).unwrap();
        assert!((rec.final_mixed().unwrap() - f(&rp)).norm() < 1e-9);
    }

    #[test]
    fn rejects_invalid_initial_state() {
        let d = DriveParams::new(1.0, 1.0, GAMMA_DEFAULT).unwrap();
        let p = ThreeLevelParams::from_drive(d, 0.1).unwrap();
        let s = LoopSchedule::new(Direction::Plus, 1.0, 1.0, Ramp::ConstantRate).unwrap();
        let mut bad = CMat3::identity();
        assert!(propagate_lindblad(&p, &s, &bad, 1e-8, 5).is_err());
        bad = CMat3::zeros();
        bad[(1, 1)] = Complex::new(2.0, 0.0);
        bad[(2, 2)] = Complex::new(-1.0, 0.0);
        assert!(propagate_lindblad(&p, &s, &bad, 1e-8, 5).is_err());
    }
}
