//! Limiting covariance of the tracked counts along both evaluation routes,
//! next to the projected second-moment form.

use blocknet::covariance::min_eigenvalue;
use blocknet::{fixtures, Analysis};

fn main() -> blocknet::Result<()> {
    for bs in [fixtures::fig1(), fixtures::fig3()] {
        let a = Analysis::run(&bs)?;
        let cov = &a.covariances.sigma;
        println!("{} example, essential degrees {:?}", bs.kind, a.essential());
        println!("Sigma (tracked block){:.5}", a.tracked_sigma());
        match cov.report.path_difference {
            Some(d) => println!("eigenbasis and quadrature agree to {d:.1e}"),
            None => println!("eigenbasis route skipped: {}", cov.report.eigenbasis_skipped.as_deref().unwrap_or("")),
        }
        println!(
            "quadrature: {} Romberg levels on [0, {:.1}]; min eigenvalue {:.3e}",
            cov.report.quadrature_levels,
            cov.report.quadrature_horizon,
            min_eigenvalue(&cov.sigma)
        );
        println!("projected form{:.5}", a.tracked_projected_sigma());
    }
    Ok(())
}
