//! Block statistics f and g, essential degrees and the limit vector, in
//! exact rational arithmetic.

use blocknet::{fixtures, DegreeProfile};
use num_rational::BigRational;

fn main() -> blocknet::Result<()> {
    for (name, bs) in [
        ("hooking example", fixtures::fig1()),
        ("bipolar example", fixtures::fig3()),
        ("random recursive tree", fixtures::k2()),
        ("plane-oriented tree", fixtures::plane_tree()),
    ] {
        let p = DegreeProfile::<BigRational>::compute(&bs)?;
        println!("{name}");
        println!("  f: {}", show(&p.f));
        println!("  g: {}", show(&p.g));
        println!("  essential degrees: {:?}", p.essential);
        println!("  lambda1 = {}", p.lambda1);
        let limit: Vec<String> = p.limit.iter().map(|x| x.to_string()).collect();
        println!("  limit shares: {}", limit.join(", "));
        println!("  balanced: {}", p.balance.balanced);
    }
    Ok(())
}

fn show(m: &std::collections::BTreeMap<u32, BigRational>) -> String {
    m.iter().map(|(k, v)| format!("{k}:{v}")).collect::<Vec<_>>().join(" ")
}
