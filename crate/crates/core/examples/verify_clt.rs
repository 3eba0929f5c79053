//! Monte-Carlo check of the linear mean and Gaussian fluctuations, plus the
//! two negative controls evaluated on the same replicates.
//!
//!     cargo run --release --example verify_clt -- 100000 400

use blocknet::verify::{evaluate, run_replicates};
use blocknet::{fixtures, Analysis, VerifyConfig};

fn main() -> blocknet::Result<()> {
    let mut args = std::env::args().skip(1);
    let steps: u64 = args.next().map_or(20_000, |s| s.parse().expect("steps"));
    let replicates: usize = args.next().map_or(200, |s| s.parse().expect("replicates"));
    let jobs = std::thread::available_parallelism().map_or(1, |n| n.get());

    for bs in [fixtures::fig1(), fixtures::fig3()] {
        let analysis = Analysis::run(&bs)?;
        let config = VerifyConfig { steps, replicates, jobs, ..VerifyConfig::default() };
        let samples = run_replicates(&bs, analysis.essential(), steps, replicates, config.seed, jobs)?;

        let report = evaluate(&bs, &analysis, &config, &samples);
        print!("{}", report.table());
        for (label, cfg) in [
            ("mean +5%", VerifyConfig { perturb_mean: 0.05, ..config.clone() }),
            ("Sigma x2", VerifyConfig { sigma_scale: 2.0, ..config.clone() }),
        ] {
            let control = evaluate(&bs, &analysis, &cfg, &samples);
            println!("control {label}: {}", if control.passed { "not detected" } else { "rejected" });
        }
        println!();
    }
    Ok(())
}
