use scalesift::distill::{kd_predict_world, train_kd, TrainConfig, TrainSet};
use scalesift::metrics::map_at_k;
use scalesift::scoring::{HrProvider, LrProvider, DEFAULT_BETA};
use scalesift::table::ScoreTable;
use scalesift::world::*;

fn group_map(world: &World, table: &ScoreTable, concepts: &[String], locations: &[String]) -> f64 {
    let sub = table.select(concepts, locations).unwrap();
    let labels = world.labels_for(concepts, locations).unwrap();
    map_at_k(&sub, &labels, 40, &[]).unwrap().map_at_k
}

fn main() {
    let fractions = (0.4, 0.1, 0.5);
    let fine_seen: Vec<String> = (0..5).map(|i| format!("fine{i}")).collect();
    for sigma in [2.0f64, 3.0] {
        for (h, epochs, lr, init) in [
            (16usize, 100usize, 0.01, 0.01),
            (16, 400, 0.01, 0.01),
            (16, 1600, 0.01, 0.01),
            (32, 400, 0.01, 0.01),
            (16, 400, 0.002, 0.01),
            (16, 4000, 0.002, 0.01),
        ] {
            let mut kd_t = vec![]; let mut lr_t = vec![];
            for seed in 0..6u64 {
                let mut spec = default_world_spec(seed);
                spec.lr_noise_fine = sigma;
                let world = generate_world(&spec).unwrap();
                let split = split_locations(&world, fractions, seed).unwrap();
                let hr = HrProvider::Synthetic { world: &world, beta: DEFAULT_BETA };
                let train = TrainSet::from_world_split(&world, &split, &hr).unwrap();
                let mut config = TrainConfig::new(seed, world.spec.concepts.iter().map(|c| c.seen).collect());
                config.hidden_dim = h; config.epochs = epochs; config.learning_rate = lr; config.init_scale = init;
                let (kd, _) = train_kd(&train, &config).unwrap();
                let kd_all = kd_predict_world(&kd, &world, &world.location_ids).unwrap();
                let lr_all = LrProvider::synthetic(&world, DEFAULT_BETA).unwrap()
                    .score(&world.location_ids, &world.concept_ids()).unwrap();
                kd_t.push(group_map(&world, &kd_all, &fine_seen, &split.test));
                lr_t.push(group_map(&world, &lr_all, &fine_seen, &split.test));
            }
            let mean = |v: &Vec<f64>| v.iter().sum::<f64>() / v.len() as f64;
            println!("sigma={sigma} h={h:<3} ep={epochs:<5} lr={lr:<6} init={init}: kd {:.3} lr {:.3} gap {:+.3}",
                mean(&kd_t), mean(&lr_t), mean(&kd_t) - mean(&lr_t));
        }
    }
}
