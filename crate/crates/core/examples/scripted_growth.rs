//! Replays a fixed three-step history on the hooking example and prints the
//! resulting census and graph.

use blocknet::export::to_dot;
use blocknet::growth::parse_script;
use blocknet::{fixtures, Mode, Simulator};

fn main() -> blocknet::Result<()> {
    let bs = fixtures::fig1();
    let script = parse_script(fixtures::FIG2_SCRIPT_JSON)?;
    let mut sim = Simulator::new(&bs, Mode::Graph, 0, 0)?;
    for (i, step) in script.iter().enumerate() {
        sim.scripted_step(step)?;
        let st = sim.state();
        println!(
            "step {}: block {} on vertex {} -> census {:?}, master degree {}",
            i + 1,
            bs.blocks[step.block].name,
            step.latch,
            st.census(),
            st.master_degree
        );
    }
    let st = sim.into_state();
    println!("tracked counts at degrees 1, 3, 5: {:?}", st.census_vector(&[1, 3, 5]).counts);
    print!("{}", to_dot(st.graph.as_ref().expect("graph mode")));
    Ok(())
}
