//! Macro F1 across the default threshold grid for a handful of scores.
//!
//!     cargo run --example threshold_sweep

use hybrid_subjectivity::evaluation::{confusion_at, default_grid, sweep_threshold, Metrics};
use hybrid_subjectivity::Label::{Obj, Subj};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let y = [Subj, Subj, Subj, Obj, Obj, Obj, Subj, Obj];
    let scores = [0.92, 0.71, 0.43, 0.38, 0.22, 0.55, 0.61, 0.05];
    let grid = default_grid();
    for &t in &grid {
        let m = Metrics::from_confusion(confusion_at(&y, &scores, t));
        println!("{t:>5.2}  macro F1 {:.4}  SUBJ F1 {:.4}", m.macro_f1, m.subj_f1());
    }
    let best = sweep_threshold(&y, &scores, &grid)?;
    println!("best threshold {:.2} (macro F1 {:.4})", best.threshold, best.macro_f1);
    Ok(())
}
