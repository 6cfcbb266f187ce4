//! Trains the refined encoder with the supervised, noise-contrastive and
//! adversarial contrastive objectives.

use robust_gnn::encoder::{accuracy, EncoderConfig};
use robust_gnn::graph::split_nodes;
use robust_gnn::sbm::SbmSpec;
use robust_gnn::train::{train, TrainConfig, TrainMode};

fn main() -> robust_gnn::Result<()> {
    let g = SbmSpec::default().generate(0)?;
    let masks = split_nodes(&g, 0)?;
    let cfg = EncoderConfig::refined();
    for mode in TrainMode::ALL {
        let out = train(&g, &masks, &cfg, &TrainConfig::default(), mode)?;
        let logits = out.model.forward(&g)?.logits;
        let last = out.log.records.last().expect("at least one epoch");
        println!(
            "{:5}: {} epochs, best val {:.3} at epoch {}, test {:.3}, final discriminator accuracy {}",
            mode.as_str(),
            out.log.records.len(),
            out.best_val_acc,
            out.best_epoch,
            accuracy(&logits, g.labels(), masks.test()),
            last.disc_acc.map_or("-".into(), |a| format!("{a:.3}"))
        );
    }
    Ok(())
}
