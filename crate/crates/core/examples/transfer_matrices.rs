//! Closed-form transfer matrices of both models, checked against the matrix
//! exponential of the first-order generator.

use coupled_strings::models::{anderson_generator, point_generator, transfer_anderson, transfer_point};
use coupled_strings::symplectic::{expm, symplectic_defect, Mat4};

fn main() -> coupled_strings::Result<()> {
    let omega = [0.7, -0.3];
    for e in [5.0, 0.2, -3.0] {
        let a = transfer_point(e, omega)?;
        let mut jump = Mat4::identity();
        jump[(2, 0)] = omega[0];
        jump[(3, 1)] = omega[1];
        let oracle = jump * expm(&point_generator(e))?;
        println!(
            "point    E = {e:5.1}: |closed - expm| = {:.1e}, symplectic defect = {:.1e}",
            (a.as_mat() - oracle).amax(),
            symplectic_defect(a.as_mat())
        );
    }
    for e in [3.0, 0.5, -2.0] {
        let a = transfer_anderson(e, omega)?;
        let oracle = expm(&anderson_generator(e, omega))?;
        println!(
            "anderson E = {e:5.1}: |closed - expm| = {:.1e}, symplectic defect = {:.1e}",
            (a.as_mat() - oracle).amax(),
            symplectic_defect(a.as_mat())
        );
    }
    println!("\nA(E = 5, omega = {omega:?}) =\n{:.6}", transfer_point(5.0, omega)?.as_mat());
    Ok(())
}
