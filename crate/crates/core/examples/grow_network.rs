//! Grow a network, print the start of its census trajectory and write the
//! final graph as DOT.
//!
//!     cargo run --release --example grow_network -- 2000 7 > net.dot

use blocknet::export::{to_dot, trajectory_csv};
use blocknet::growth::trajectory;
use blocknet::{fixtures, Mode};

fn main() -> blocknet::Result<()> {
    let mut args = std::env::args().skip(1);
    let steps: u64 = args.next().map_or(200, |s| s.parse().expect("steps"));
    let seed: u64 = args.next().map_or(7, |s| s.parse().expect("seed"));

    let bs = fixtures::fig1();
    let essential = blocknet::profile::essential_degrees(&bs, bs.r)?;
    let (rows, state) = trajectory(&bs, steps, Mode::Graph, seed, &essential)?;
    state.check()?;

    for line in trajectory_csv(&essential, &rows).lines().take(6) {
        eprintln!("{line}");
    }
    eprintln!(
        "... {} vertices, {} edges, master degree {}",
        state.vertex_count, state.edge_count, state.master_degree
    );
    print!("{}", to_dot(state.graph.as_ref().expect("graph mode")));
    Ok(())
}
