//! The default synthetic fleet must exhibit a genuine transfer gap: a
//! source-only model fitted to one plant generalizes measurably worse to the
//! other plants' data. Without this property the adaptation benchmarks
//! built on the fleet would be vacuous.

use dannr_core::data::{apply_normalizer, fit_normalizer, Dataset};
use dannr_core::eval::mse;
use dannr_core::fleet::{generate_fleet, FleetSpec};
use dannr_core::model::ModelShape;
use dannr_core::trainer::{train_baseline, TrainConfig};

#[test]
fn source_only_model_degrades_off_plant() {
    let fleet = generate_fleet(&FleetSpec::default()).unwrap();
    let shape = ModelShape::new(4, vec![60]);

    let stats = fit_normalizer(&fleet[0]).unwrap();
    let source = apply_normalizer(&stats, &fleet[0]).unwrap();
    let others: Vec<&Dataset> = fleet[1..].iter().collect();
    let target = apply_normalizer(&stats, &Dataset::pool(&others).unwrap()).unwrap();

    let mut gap_count = 0;
    for seed in 0..10 {
        let cfg = TrainConfig { seed, ..TrainConfig::default() };
        let (model, _) = train_baseline(&shape, &source, &cfg).unwrap();
        let on_plant = mse(&model, &source).unwrap();
        let off_plant = mse(&model, &target).unwrap();
        if off_plant > on_plant {
            gap_count += 1;
        }
    }
    assert!(gap_count >= 9, "transfer gap in only {gap_count}/10 seeds");
}
