//! Bessel zeros and the closed-form disk spectra built from them.

use dn_spectra::analytic::{bessel_zero, disk_spectrum, BesselZeroTable, ZeroKind};
use dn_spectra::fem_scalar::ScalarBc;

fn main() -> dn_spectra::Result<()> {
    println!("j_0,1  = {:.12}", bessel_zero(ZeroKind::J, 0, 1)?);
    println!("j'_1,1 = {:.12}", bessel_zero(ZeroKind::JPrime, 1, 1)?);
    let table = BesselZeroTable::build(ZeroKind::J, 10, 10)?;
    println!(
        "J zero table n, k <= 10: increasing {} interlaced {}",
        table.is_increasing(),
        table.is_interlaced()
    );
    let d = disk_spectrum(ScalarBc::Dirichlet, 6, 1.0)?;
    let n = disk_spectrum(ScalarBc::Neumann, 8, 1.0)?;
    println!("dirichlet {:.6?}", d.values);
    println!("neumann   {:.6?}", n.values);
    Ok(())
}
