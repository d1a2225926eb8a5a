//! Lie-algebra density certificates for both models at a few energies.

use coupled_strings::zariski::certify;
use coupled_strings::{ModelKind, ModelSpec, ParamDistribution};

fn main() -> coupled_strings::Result<()> {
    let dist = ParamDistribution::bernoulli_square();
    let pi2 = std::f64::consts::PI.powi(2);
    for (kind, energies) in [
        (ModelKind::PointInteraction, vec![-2.0, 0.5, 5.0, 1.0 + pi2]),
        (ModelKind::Anderson, vec![2.1, 3.0, 1.0 + pi2 / 4.0, 7.5]),
    ] {
        let model = ModelSpec::new(kind, dist.clone());
        for e in energies {
            let c = certify(&model, e, 1e-8)?;
            let dets: Vec<String> = c
                .det_values
                .iter()
                .map(|d| format!("{} = {:.3e} (rel {:.1e})", d.name, d.value, d.relative()))
                .collect();
            println!(
                "{:>8} E = {e:8.4}: lie_dim {:2}, {}{}{}",
                kind.name(),
                c.lie_dim,
                dets.join(", "),
                if c.degenerate.is_empty() { String::new() } else { format!(", degenerate {:?}", c.degenerate) },
                if c.is_candidate_exceptional { "  <- candidate exceptional" } else { "" }
            );
        }
    }
    Ok(())
}
