//! Intensity matrix built two ways, its closed-form spectrum against a
//! numeric eigensolve, and the dominant eigenvector.

use blocknet::urn::{intensity_closed_form, intensity_from_replacements, numeric_spectrum};
use blocknet::{fixtures, DegreeProfile, UrnModel};
use num_rational::BigRational;

fn main() -> blocknet::Result<()> {
    for bs in [fixtures::fig1(), fixtures::fig3()] {
        let profile = DegreeProfile::<BigRational>::compute(&bs)?;
        let mixture = intensity_from_replacements(&bs, &profile);
        assert_eq!(mixture, intensity_closed_form(&profile));
        let urn = UrnModel::build(&bs, &profile)?;

        println!("{} urn, types {:?} + star", bs.kind, profile.essential);
        for row in &urn.intensity {
            let cells: Vec<String> = row.iter().map(|x| format!("{x:>8}")).collect();
            println!("  [{}]", cells.join(" "));
        }
        let closed: Vec<String> = urn.eigenvalues.iter().map(|x| x.to_string()).collect();
        println!("  closed-form spectrum: {}", closed.join(", "));
        let numeric: Vec<String> = numeric_spectrum(&urn.intensity)
            .iter()
            .map(|z| format!("{:.6}{:+.1e}i", z.re, z.im))
            .collect();
        println!("  numeric spectrum:     {}", numeric.join(", "));
        println!("  max deviation {:.1e}, characteristic polynomial exact: {:?}", urn.spectrum_error, urn.char_poly_verified);
        let v1: Vec<String> = urn.v1.iter().map(|x| x.to_string()).collect();
        println!("  v1 = ({})", v1.join(", "));
        println!("  irreducible: {}\n", urn.irreducible);
    }
    Ok(())
}
