use std::collections::BTreeMap;
use std::time::Instant;

use mutascan::catalog::{build_training_set, load_catalog, Encoder, GeneSet};
use mutascan::neuralnet::{default_layer_sizes, init_network, train, TrainConfig};
use mutascan::seqio::parse_fasta;

#[test]
#[ignore]
fn tune_learning_rate() {
    let refs_text = include_str!("../data/sample_references.fa");
    let catalog_text = include_str!("../data/sample_catalog.tsv");
    let genes = GeneSet::default();
    let entries = load_catalog(catalog_text, &genes).unwrap();
    let refs: BTreeMap<_, _> = parse_fasta(refs_text)
        .unwrap()
        .into_iter()
        .map(|s| (s.id.clone(), s))
        .collect();
    let encoder = Encoder::new(genes.clone());

    for alpha in [0.5, 1.0, 2.0, 3.0, 5.0] {
        for seed in [1u64, 2, 3, 4, 5] {
            let examples = build_training_set(&entries, &refs, 3, seed, &encoder).unwrap();
            let arch = default_layer_sizes(encoder.vector_len(), genes.len());
            let net = init_network(&arch, seed, 0.5).unwrap();
            let cfg = TrainConfig {
                learning_rate: alpha,
                mse_goal: 1e-7,
                max_epochs: 500_000,
                seed,
                init_range: 0.5,
            };
            let t0 = Instant::now();
            let result = train(net, &examples, &cfg);
            let dt = t0.elapsed().as_secs_f64();
            match result {
                Ok((_, report)) => println!(
                    "alpha={alpha} seed={seed}: goal_met={} epochs={} final_mse={:.3e} wall={:.1}s",
                    report.goal_met, report.epochs_run, report.final_mse, dt
                ),
                Err(e) => println!("alpha={alpha} seed={seed}: ERROR {e} wall={dt:.1}s"),
            }
        }
    }
}
