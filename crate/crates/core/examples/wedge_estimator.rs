//! Cross-check of the QR estimator against norm growth of e₁ and e₁∧e₂,
//! each on its own random stream.

use coupled_strings::lyapunov::{lyapunov_qr, lyapunov_wedge_sum};
use coupled_strings::{CocycleRun, ModelKind, ModelSpec, ParamDistribution};

fn main() -> coupled_strings::Result<()> {
    let model = ModelSpec::new(ModelKind::Anderson, ParamDistribution::bernoulli_square());
    let run = CocycleRun::new(model, 4.0, 300_000);
    let qr = lyapunov_qr(&run, 7)?;
    let w1 = lyapunov_wedge_sum(1, &run, 8)?;
    let w2 = lyapunov_wedge_sum(2, &run, 8)?;
    println!("QR:    gamma1 = {:.5} +- {:.1e}", qr.gamma[0], qr.se[0]);
    println!("wedge: gamma1 = {:.5} +- {:.1e}", w1.value, w1.se);
    println!("QR:    gamma1 + gamma2 = {:.5} +- {:.1e}", qr.gamma[0] + qr.gamma[1], qr.se[0] + qr.se[1]);
    println!("wedge: gamma1 + gamma2 = {:.5} +- {:.1e}", w2.value, w2.se);
    Ok(())
}
