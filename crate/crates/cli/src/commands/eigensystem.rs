use nhberry_core::model::{frame, hamiltonian};
use nhberry_core::numerics::Complex;
use nhberry_core::Branch;

use super::{table, to_mhz};
use crate::config::RunConfig;
use crate::error::Result;
use crate::Artifact;

pub(super) fn run(config: &RunConfig) -> Result<Vec<Artifact>> {
    let p = config.drive;
    let fr = frame(&p, config.phi)?;
    let h = hamiltonian(&p, config.phi);
    let mut t = table(
        "eigensystem",
        config,
        &[("quantity", ""), ("re", ""), ("im", ""), ("unit", "")],
    );
    let mut row = |name: &str, z: Complex, unit: &str| {
        t.push(vec![name.into(), z.re.into(), z.im.into(), unit.into()]);
    };
    let real = |x: f64| Complex::new(x, 0.0);
    row("J", real(p.j), "rad/us");
    row("Delta/2pi", real(to_mhz(p.delta)), "MHz");
    row("Gamma", real(p.gamma), "1/us");
    row("phi", real(config.phi), "rad");
    row("epsilon", fr.epsilon, "rad/us");
    row("delta", fr.delta, "rad/us");
    row("E+", fr.e_plus, "rad/us");
    row("E-", fr.e_minus, "rad/us");
    for (b, tag) in [(Branch::Plus, "+"), (Branch::Minus, "-")] {
        let (r, l) = (fr.right(b), fr.left(b));
        row(&format!("R{tag}[e]"), r[0], "");
        row(&format!("R{tag}[f]"), r[1], "");
        row(&format!("L{tag}[e]"), l[0], "");
        row(&format!("L{tag}[f]"), l[1], "");
        row(&format!("<L{tag}|R{tag}>"), fr.overlap(b), "");
        row(
            &format!("<L{tag}|R{}>", b.other().label()),
            l.contract(&fr.right(b.other())),
            "",
        );
        let residual = (h.mul_vec(&r) - r.scale(fr.energy(b))).norm();
        row(
            &format!("|H R{tag} - E{tag} R{tag}|"),
            real(residual),
            "rad/us",
        );
    }
    row("eps/delta", fr.eps_over_delta(), "");
    Ok(vec![Artifact::new("eigensystem", t)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Cell;

    fn value(a: &Artifact, q: &str) -> (f64, f64) {
        let row = a.table.rows.iter().find(|r| r[0] == Cell::from(q)).unwrap();
        (row[1].as_f64().unwrap(), row[2].as_f64().unwrap())
    }

    #[test]
    fn hermitian_resonance_gives_unit_energies() {
        let c = RunConfig::load(
            None,
            &[
                "drive.j=1".into(),
                "drive.delta_mhz=0".into(),
                "drive.gamma=0".into(),
            ],
        )
        .unwrap();
        let a = &run(&c).unwrap()[0];
        let (ep, _) = value(a, "E+");
        let (em, _) = value(a, "E-");
        assert!((ep - 1.0).abs() < 1e-14 && (em + 1.0).abs() < 1e-14);
    }

    #[test]
    fn default_row_matches_model() {
        let c = RunConfig::default();
        let a = &run(&c).unwrap()[0];
        let d = c.drive.delta_split();
        assert_eq!(value(a, "delta"), (d.re, d.im));
        assert!(value(a, "<L+|R->").0.abs() < 1e-12);
    }
}
