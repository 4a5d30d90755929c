use scalesift::acquisition::{disagreement_proxy, select_locations, Budget, SelectionStrategy};
use scalesift::distill::{kd_predict_world, train_kd, TrainConfig, TrainSet};
use scalesift::metrics::{map_at_k, precision_at_k};
use scalesift::scoring::{HrProvider, LrProvider, DEFAULT_BETA};
use scalesift::table::ScoreTable;
use scalesift::world::*;

fn gm(world: &World, table: &ScoreTable, concepts: &[String], locations: &[String]) -> f64 {
    let sub = table.select(concepts, locations).unwrap();
    let labels = world.labels_for(concepts, locations).unwrap();
    map_at_k(&sub, &labels, 40, &[]).unwrap().map_at_k
}

fn mixed_precision(world: &World, kd_all: &ScoreTable, hr: &HrProvider, fine: &[String], selected: &[String]) -> f64 {
    let all = &world.location_ids;
    let hr_sel = if selected.is_empty() { None } else { Some(hr.location_scores(selected, fine).unwrap()) };
    let sel: std::collections::HashSet<&str> = selected.iter().map(|s| s.as_str()).collect();
    let labels = world.labels_for(fine, all).unwrap();
    let mut total = 0.0;
    for (ci, concept) in fine.iter().enumerate() {
        let kd_row = kd_all.concept_row(concept).unwrap();
        let scores: Vec<f64> = all.iter().enumerate().map(|(l, id)| {
            if sel.contains(id.as_str()) { hr_sel.as_ref().unwrap().get(concept, id).unwrap() } else { kd_row[l] }
        }).collect();
        total += precision_at_k(all, &scores, &labels[ci], 40).unwrap();
    }
    total / fine.len() as f64
}

fn main() {
    let fine: Vec<String> = (0..6).map(|i| format!("fine{i}")).collect();
    let fine_seen: Vec<String> = (0..5).map(|i| format!("fine{i}")).collect();
    println!("sig gam | c4: kd lr gap | c6 gaps b20 b40 b100 (dis-rand)");
    for (sigma, gamma) in [(1.5f64, 0.6f64), (1.5, 0.8), (1.75, 0.6), (1.75, 0.8), (2.0, 0.8), (1.5, 1.0)] {
        let mut c4kd = vec![]; let mut c4lr = vec![];
        let mut gaps = vec![vec![]; 3];
        for seed in 0..8u64 {
            let mut spec = default_world_spec(seed);
            spec.lr_noise_fine = sigma;
            spec.context_gain = gamma;
            let world = generate_world(&spec).unwrap();
            let split = split_locations(&world, DEFAULT_SPLIT_FRACTIONS, seed).unwrap();
            let hr = HrProvider::Synthetic { world: &world, beta: DEFAULT_BETA };
            let train = TrainSet::from_world_split(&world, &split, &hr).unwrap();
            let mut config = TrainConfig::new(seed, world.spec.concepts.iter().map(|c| c.seen).collect());
            config.epochs = 300;
            let (kd, _) = train_kd(&train, &config).unwrap();
            let all = world.location_ids.clone();
            let kd_all = kd_predict_world(&kd, &world, &all).unwrap();
            let lr_prov = LrProvider::synthetic(&world, DEFAULT_BETA).unwrap();
            let lr_all = lr_prov.score(&all, &world.concept_ids()).unwrap();
            c4kd.push(gm(&world, &kd_all, &fine_seen, &split.test));
            c4lr.push(gm(&world, &lr_all, &fine_seen, &split.test));

            let seen = world.seen_concepts();
            let lr_seen = lr_all.select(&seen, &all).unwrap();
            let kd_seen = kd_all.select(&seen, &all).unwrap();
            let crit = disagreement_proxy(&kd_seen, &lr_seen, &seen).unwrap();
            for (bi, b) in [20usize, 40, 100].iter().enumerate() {
                let budget = Budget::new(*b);
                let r = select_locations(SelectionStrategy::Random, &all, &budget, seed).unwrap();
                let d = select_locations(SelectionStrategy::Disagreement { criterion: &crit }, &all, &budget, seed).unwrap();
                let pr = mixed_precision(&world, &kd_all, &hr, &fine, &r.selected);
                let pd = mixed_precision(&world, &kd_all, &hr, &fine, &d.selected);
                gaps[bi].push(pd - pr);
            }
        }
        let m = |v: &Vec<f64>| v.iter().sum::<f64>() / v.len() as f64;
        println!("{sigma} {gamma} | {:.3} {:.3} {:+.3} | {:+.3} {:+.3} {:+.3}",
            m(&c4kd), m(&c4lr), m(&c4kd) - m(&c4lr), m(&gaps[0]), m(&gaps[1]), m(&gaps[2]));
    }
}
