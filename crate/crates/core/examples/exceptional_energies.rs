//! Zeros of the point-model determinant certificates, and the candidate
//! energies of the Anderson model where a seed normalization degenerates.

use coupled_strings::zariski::{divisor_zeros, exceptional_roots, CertificateId};

fn main() -> coupled_strings::Result<()> {
    for (id, interval) in [
        (CertificateId::Det11, (1.5, 20.0)),
        (CertificateId::Det12, (1.5, 20.0)),
        (CertificateId::Det21, (-0.99, 0.99)),
        (CertificateId::Det31, (-30.0, -1.01)),
    ] {
        let r = exceptional_roots(id, interval, 1e-12)?;
        println!("{id} on {interval:?}");
        println!("  simple/odd roots: {:?}", r.roots);
        println!("  double roots:     {:?}", r.suspected_double);
    }
    match exceptional_roots(CertificateId::AndersonTracked, (2.5, 3.5), 1e-12) {
        Ok(r) => println!("m2step6 roots: {:?}", r.all()),
        Err(e) => println!("m2step6: {e}"),
    }
    println!("Anderson divisor zeros in (2, 10): {:?}", divisor_zeros(2.0, 10.0));
    Ok(())
}
