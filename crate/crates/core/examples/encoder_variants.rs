//! Layer widths and a forward pass for every intra/inter aggregator pair.

use robust_gnn::encoder::{EncoderConfig, InterAgg, IntraAgg, Model};
use robust_gnn::sbm::SbmSpec;

fn main() -> robust_gnn::Result<()> {
    let g = SbmSpec::default().generate(0)?;
    for intra in [IntraAgg::Mean, IntraAgg::Sum, IntraAgg::Max] {
        for inter in [InterAgg::None, InterAgg::Skip, InterAgg::Dense] {
            let cfg = EncoderConfig {
                intra,
                inter,
                ..EncoderConfig::refined()
            };
            let widths: Vec<String> = cfg
                .layer_shapes(g.feature_dim())?
                .iter()
                .map(|s| format!("{}->{}", s.input, s.output))
                .collect();
            let out = Model::init(cfg.clone(), &g, 0)?.forward(&g)?;
            println!(
                "{:18} layers [{}]  embedding {:?}  h_G[0] {:.3}",
                cfg.tag(),
                widths.join(", "),
                out.h.shape(),
                out.h_graph.data()[0]
            );
        }
    }
    Ok(())
}
