//! Reversing every arc of a bipolar model swaps in- and outdegrees; the
//! reversed model has its own essential degrees and limit shares.

use blocknet::{fixtures, DegreeProfile};

fn main() -> blocknet::Result<()> {
    let bs = fixtures::fig3();
    let rev = bs.reverse_bipolar()?;
    assert_eq!(rev.reverse_bipolar()?, bs);
    for (name, model) in [("original", &bs), ("reversed", &rev)] {
        let p = DegreeProfile::<num_rational::BigRational>::compute(model)?;
        let limit: Vec<String> = p.limit.iter().map(|x| x.to_string()).collect();
        println!(
            "{name}: outdegrees {:?}, lambda1 = {}, limit shares ({})",
            p.essential,
            p.lambda1,
            limit.join(", ")
        );
    }
    println!("{}", rev.to_json());
    Ok(())
}
