use scalesift::acquisition::{disagreement_proxy, select_locations, Budget, SelectionStrategy};
use scalesift::distill::{kd_predict_world, train_kd, TrainConfig, TrainSet};
use scalesift::metrics::precision_at_k;
use scalesift::scoring::{HrProvider, LrProvider, DEFAULT_BETA};
use scalesift::table::ScoreTable;
use scalesift::world::*;

fn mixed_precision(
    world: &World, kd_all: &ScoreTable, hr: &HrProvider, fine: &[String],
    selected: &[String],
) -> f64 {
    let all = &world.location_ids;
    let hr_sel = if selected.is_empty() { None } else {
        Some(hr.location_scores(selected, fine).unwrap())
    };
    let sel: std::collections::HashSet<&str> = selected.iter().map(|s| s.as_str()).collect();
    let labels = world.labels_for(fine, all).unwrap();
    let mut total = 0.0;
    for (ci, concept) in fine.iter().enumerate() {
        let kd_row = kd_all.concept_row(concept).unwrap();
        let scores: Vec<f64> = all.iter().enumerate().map(|(l, id)| {
            if sel.contains(id.as_str()) {
                hr_sel.as_ref().unwrap().get(concept, id).unwrap()
            } else { kd_row[l] }
        }).collect();
        total += precision_at_k(all, &scores, &labels[ci], 40).unwrap();
    }
    total / fine.len() as f64
}

fn main() {
    let fine: Vec<String> = (0..6).map(|i| format!("fine{i}")).collect();
    let sigma: f64 = std::env::var("SIGMA").ok().and_then(|s| s.parse().ok()).unwrap_or(2.0);
    let gamma: f64 = std::env::var("GAMMA").ok().and_then(|s| s.parse().ok()).unwrap_or(1.0);
    eprintln!("sigma={sigma} gamma={gamma}");
    for b in [20usize, 40, 100] {
        let mut kd0 = vec![]; let mut rnd = vec![]; let mut dis = vec![];
        let mut dis_fine = vec![]; let mut orac = vec![];
        for seed in 0..8u64 {
            let mut spec = default_world_spec(seed);
            spec.lr_noise_fine = sigma;
            spec.context_gain = gamma;
            let world = generate_world(&spec).unwrap();
            let split = split_locations(&world, DEFAULT_SPLIT_FRACTIONS, seed).unwrap();
            let hr = HrProvider::Synthetic { world: &world, beta: DEFAULT_BETA };
            let train = TrainSet::from_world_split(&world, &split, &hr).unwrap();
            let config = TrainConfig::new(seed, world.spec.concepts.iter().map(|c| c.seen).collect());
            let (kd, _) = train_kd(&train, &config).unwrap();
            let all = world.location_ids.clone();
            let kd_all = kd_predict_world(&kd, &world, &all).unwrap();
            let lr_prov = LrProvider::synthetic(&world, DEFAULT_BETA).unwrap();
            let budget = Budget::new(b);

            kd0.push(mixed_precision(&world, &kd_all, &hr, &fine, &[]));

            let r = select_locations(SelectionStrategy::Random, &all, &budget, seed).unwrap();
            rnd.push(mixed_precision(&world, &kd_all, &hr, &fine, &r.selected));

            let seen = world.seen_concepts();
            let lr_seen = lr_prov.score(&all, &seen).unwrap();
            let kd_seen = kd_all.select(&seen, &all).unwrap();
            let crit = disagreement_proxy(&kd_seen, &lr_seen, &seen).unwrap();
            let d = select_locations(SelectionStrategy::Disagreement { criterion: &crit }, &all, &budget, seed).unwrap();
            dis.push(mixed_precision(&world, &kd_all, &hr, &fine, &d.selected));

            let fine_seen: Vec<String> = (0..5).map(|i| format!("fine{i}")).collect();
            let lr_fs = lr_prov.score(&all, &fine_seen).unwrap();
            let kd_fs = kd_all.select(&fine_seen, &all).unwrap();
            let crit_f = disagreement_proxy(&kd_fs, &lr_fs, &fine_seen).unwrap();
            let df = select_locations(SelectionStrategy::Disagreement { criterion: &crit_f }, &all, &budget, seed).unwrap();
            dis_fine.push(mixed_precision(&world, &kd_all, &hr, &fine, &df.selected));

            // oracle sampler: |kd - truth| summed over fine seen
            let labels = world.labels_for(&fine_seen, &all).unwrap();
            let crit_o: Vec<f64> = (0..all.len()).map(|l| {
                fine_seen.iter().enumerate().map(|(ci, c)| {
                    let t = if labels[ci][l] { 1.0 } else { 0.0 };
                    (kd_all.get(c, &all[l]).unwrap() - t).abs()
                }).sum()
            }).collect();
            let o = select_locations(SelectionStrategy::Disagreement { criterion: &crit_o }, &all, &budget, seed).unwrap();
            orac.push(mixed_precision(&world, &kd_all, &hr, &fine, &o.selected));
        }
        let m = |v: &Vec<f64>| v.iter().sum::<f64>() / v.len() as f64;
        println!("B={b:<4} kd-only {:.3} | rand {:.3} | dis {:.3} (gap {:+.3}) | dis-fineonly {:.3} (gap {:+.3}) | oracle-sel {:.3}",
            m(&kd0), m(&rnd), m(&dis), m(&dis) - m(&rnd), m(&dis_fine), m(&dis_fine) - m(&rnd), m(&orac));
    }
}
// appended: sigma sweep entry point via env var
