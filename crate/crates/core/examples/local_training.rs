//! Synthetic data, partitioning, training, merging, digests and model files.

use idml::learning::{
    digest, evaluate, flip_labels, generate_synthetic, init_model, merge, partition, train, Arch,
    PartitionMode, PartitionSpec, TrainConfig,
};
use idml::ModelParams;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let pool = generate_synthetic(10, 16, 300, 1.5, 7)?;
    let (test, rest) = pool.split(1_000, 1)?;
    let spec = PartitionSpec {
        mode: PartitionMode::NonIid,
        classes_per_node: 2,
        n_nodes: 10,
    };
    let shares = partition(&rest, &spec, 2)?;
    println!(
        "node 0 holds classes {:?} ({} rows)",
        shares[0].distinct_labels(),
        shares[0].len()
    );

    let arch = Arch::with_hidden(16, 32, 10)?;
    let cfg = TrainConfig {
        steps: 200,
        ..TrainConfig::default()
    };
    let a = train(&init_model(&arch, 1), &shares[0], &cfg)?;
    let b = train(&init_model(&arch, 1), &shares[1], &cfg)?;
    let merged = merge(&a, &b)?;
    for (name, m) in [("a", &a), ("b", &b), ("merged", &merged)] {
        println!(
            "{name:>6} {arch}: test accuracy {:.3}, digest {}",
            evaluate(m, &test)?.accuracy,
            digest(m)
        );
    }

    let flipped = flip_labels(&shares[0], 3);
    let poisoned = train(&init_model(&arch, 1), &flipped, &cfg)?;
    println!(
        "trained on flipped labels: {:.3}",
        evaluate(&poisoned, &test)?.accuracy
    );

    let path = std::env::temp_dir().join("idml-example.model");
    merged.write_to(std::fs::File::create(&path)?)?;
    let back = ModelParams::read_from(std::fs::File::open(&path)?)?;
    assert!(back.bit_eq(&merged) && digest(&back) == digest(&merged));
    println!(
        "round-tripped {} parameters through {}",
        back.params().len(),
        path.display()
    );
    Ok(())
}
