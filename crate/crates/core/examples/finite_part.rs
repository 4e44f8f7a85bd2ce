//! Finite part of a logarithmically divergent integral, three ways.

use divlim_core::expr::{parse, Bindings};
use divlim_core::regfin::{
    finite_part_cutoff_limit, finite_part_direct, Regulator, SubtractionSpec,
};

fn main() -> divlim_core::Result<()> {
    let integrand = parse::<f64>("1/(p+q+m^2)")?;
    let bindings = Bindings::from_pairs([("m", 1.0)])?;
    let spec = SubtractionSpec::new(0, 0.0);
    let tol = 1e-10;

    let direct = finite_part_direct(&integrand, &spec, 1.0, &bindings, tol)?;
    println!("direct subtraction: {:.12}", direct.value);

    let cutoff = Regulator::hard_cutoff(1e4)?;
    let limit = finite_part_cutoff_limit(&integrand, &cutoff, &spec, 1.0, &bindings, tol)?;
    println!("cutoff limit:       {:.12}", limit.value);

    let partner = Regulator::default_partner(&integrand, 1e4, &bindings)?;
    let limit = finite_part_cutoff_limit(&integrand, &partner, &spec, 1.0, &bindings, tol)?;
    println!("partner limit:      {:.12}", limit.value);

    println!("closed form ln 1/2: {:.12}", 0.5f64.ln());
    Ok(())
}
