// Relative information gain, lifts and AUC on small hand-made inputs.

use ctxctr::eval::{auc, rig, rig_lift, MetricsAccumulator};

pub fn run_example() -> ctxctr::Result<f64> {
    let mut acc = MetricsAccumulator::with_scores();
    for (label, p) in [(1, 0.8), (0, 0.4)] {
        acc.push(label, p);
    }
    let r = rig(&acc)?;
    println!("log-loss {:.6}, RIG {r:.6}, AUC {}", acc.mean_log_loss().unwrap_or(f64::NAN), auc(&acc)?);

    let lift = rig_lift(0.2530, 0.2500);
    println!("RIG 0.2500 -> 0.2530 is {:+.2}% relative, {:+.2} pp", lift.pct, lift.pp);
    let zero = rig_lift(0.01, 0.0);
    println!("from a zero baseline: {:+.2} pp (flagged {})", zero.pct, zero.flagged);
    Ok(r)
}

fn main() -> ctxctr::Result<()> {
    run_example()?;
    Ok(())
}
