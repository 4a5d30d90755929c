use scalesift::distill::{kd_predict_world, train_kd, TrainConfig, TrainSet};
use scalesift::metrics::map_at_k;
use scalesift::scoring::{HrProvider, LrProvider, DEFAULT_BETA};
use scalesift::table::ScoreTable;
use scalesift::world::*;

fn gm(world: &World, table: &ScoreTable, concepts: &[String], locations: &[String]) -> f64 {
    let sub = table.select(concepts, locations).unwrap();
    let labels = world.labels_for(concepts, locations).unwrap();
    map_at_k(&sub, &labels, 40, &[]).unwrap().map_at_k
}

fn main() {
    let fine_seen: Vec<String> = (0..5).map(|i| format!("fine{i}")).collect();
    let coarse: Vec<String> = (0..6).map(|i| format!("coarse{i}")).collect();
    println!("sigma gamma h ep |  c4: kd lr gap | all: kd lr | coarseLR");
    for (sigma, gamma) in [
        (1.0f64, 0.7f64), (1.0, 1.0), (1.5, 0.7), (1.5, 1.0), (1.5, 1.3), (2.0, 1.0), (2.0, 1.3),
    ] {
        for (h, ep) in [(16usize, 200usize), (32, 200)] {
            let mut vals = vec![vec![]; 5];
            for seed in 0..6u64 {
                let mut spec = default_world_spec(seed);
                spec.lr_noise_fine = sigma;
                spec.context_gain = gamma;
                let world = generate_world(&spec).unwrap();
                let split = split_locations(&world, DEFAULT_SPLIT_FRACTIONS, seed).unwrap();
                let hr = HrProvider::Synthetic { world: &world, beta: DEFAULT_BETA };
                let train = TrainSet::from_world_split(&world, &split, &hr).unwrap();
                let mut config = TrainConfig::new(seed, world.spec.concepts.iter().map(|c| c.seen).collect());
                config.hidden_dim = h; config.epochs = ep; config.learning_rate = 0.01; config.init_scale = 0.01;
                let (kd, _) = train_kd(&train, &config).unwrap();
                let kd_all = kd_predict_world(&kd, &world, &world.location_ids).unwrap();
                let lr_all = LrProvider::synthetic(&world, DEFAULT_BETA).unwrap()
                    .score(&world.location_ids, &world.concept_ids()).unwrap();
                let all = world.location_ids.clone();
                vals[0].push(gm(&world, &kd_all, &fine_seen, &split.test));
                vals[1].push(gm(&world, &lr_all, &fine_seen, &split.test));
                vals[2].push(gm(&world, &kd_all, &fine_seen, &all));
                vals[3].push(gm(&world, &lr_all, &fine_seen, &all));
                vals[4].push(gm(&world, &lr_all, &coarse, &all));
            }
            let m = |v: &Vec<f64>| v.iter().sum::<f64>() / v.len() as f64;
            println!(
                "{sigma} {gamma} {h:<3} {ep:<4}| {:.3} {:.3} {:+.3} | {:.3} {:.3} | {:.3}",
                m(&vals[0]), m(&vals[1]), m(&vals[0]) - m(&vals[1]), m(&vals[2]), m(&vals[3]), m(&vals[4])
            );
        }
    }
}
