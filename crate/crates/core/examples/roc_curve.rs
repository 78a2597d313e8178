//! ROC points, AUC and the full evaluation report for a small score set.
//!
//!     cargo run --example roc_curve

use hybrid_subjectivity::evaluation::{auc, roc_curve, EvalReport};
use hybrid_subjectivity::Label::{Obj, Subj};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let y = [Subj, Obj, Subj, Obj, Subj, Obj];
    let scores = [0.9, 0.8, 0.6, 0.6, 0.3, 0.1];
    let points = roc_curve(&y, &scores)?;
    for p in &points {
        println!("fpr {:.3}  tpr {:.3}", p.fpr, p.tpr);
    }
    println!("auc {:.4}", auc(&points));
    let report = EvalReport::build(&y, &scores, 0.5)?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}
