use scalesift::metrics::map_at_k;
use scalesift::scoring::{LrProvider, DEFAULT_BETA};
use scalesift::table::ScoreTable;
use scalesift::world::*;

fn group_map(world: &World, table: &ScoreTable, concepts: &[String], locations: &[String]) -> f64 {
    let sub = table.select(concepts, locations).unwrap();
    let labels = world.labels_for(concepts, locations).unwrap();
    map_at_k(&sub, &labels, 40, &[]).unwrap().map_at_k
}

fn main() {
    for sigma in [1.0f64, 1.5, 2.0, 3.0] {
        let mut bayes_m = vec![];
        let mut lr_m = vec![];
        for seed in 0..4u64 {
            let mut spec = default_world_spec(seed);
            spec.lr_noise_fine = sigma;
            let world = generate_world(&spec).unwrap();
            let split = split_locations(&world, (0.4, 0.1, 0.5), seed).unwrap();
            let m = world.num_concepts();
            let a = mixing_matrix(&spec); // d x m
            let d = spec.feature_dim;
            // Gram and helper products
            let mut gram = vec![vec![0.0f64; m]; m];
            for c1 in 0..m { for c2 in 0..m {
                gram[c1][c2] = (0..d).map(|r| a[r][c1] * a[r][c2]).sum();
            }}
            // prior of evidence bit per concept
            let prior: Vec<f64> = world.spec.concepts.iter()
                .map(|c| if c.scale < spec.scale_threshold { c.prevalence * 0.5 } else { c.prevalence })
                .collect();
            let s2 = sigma * sigma;
            let n = world.num_locations();
            let mut values = vec![0.0f64; m * n];
            for i in 0..n {
                let x = &world.lr_features[i];
                let xa: Vec<f64> = (0..m).map(|c| (0..d).map(|r| x[r] * a[r][c]).sum()).collect();
                let mut marg1 = vec![0.0f64; m];
                let mut total = 0.0f64;
                // log-likelihood per config, max-shifted
                let mut logw = Vec::with_capacity(1 << m);
                let mut maxlw = f64::NEG_INFINITY;
                for cfg in 0..(1usize << m) {
                    let mut quad = 0.0;
                    let mut lin = 0.0;
                    let mut logp = 0.0;
                    for c1 in 0..m {
                        if cfg >> c1 & 1 == 1 {
                            lin += xa[c1];
                            for c2 in 0..m {
                                if cfg >> c2 & 1 == 1 { quad += gram[c1][c2]; }
                            }
                            logp += prior[c1].ln();
                        } else {
                            logp += (1.0 - prior[c1]).ln();
                        }
                    }
                    let lw = (2.0 * lin - quad) / (2.0 * s2) + logp;
                    maxlw = maxlw.max(lw);
                    logw.push(lw);
                }
                for (cfg, lw) in logw.iter().enumerate() {
                    let w = (lw - maxlw).exp();
                    total += w;
                    for c in 0..m {
                        if cfg >> c & 1 == 1 { marg1[c] += w; }
                    }
                }
                for c in 0..m {
                    // posterior of y=1 from evidence-bit posterior
                    let pe = marg1[c] / total;
                    let leak = if world.spec.concepts[c].scale < spec.scale_threshold {
                        let p = world.spec.concepts[c].prevalence;
                        (p * 0.5) / (1.0 - p * 0.5)
                    } else { 0.0 };
                    values[c * n + i] = (pe + (1.0 - pe) * leak).clamp(0.0, 1.0);
                }
            }
            let bayes = ScoreTable::new(world.concept_ids(), world.location_ids.clone(), values).unwrap();
            let lr_all = LrProvider::synthetic(&world, DEFAULT_BETA).unwrap()
                .score(&world.location_ids, &world.concept_ids()).unwrap();
            let fine_seen: Vec<String> = (0..5).map(|i| format!("fine{i}")).collect();
            bayes_m.push(group_map(&world, &bayes, &fine_seen, &split.test));
            lr_m.push(group_map(&world, &lr_all, &fine_seen, &split.test));
        }
        let mean = |v: &Vec<f64>| v.iter().sum::<f64>() / v.len() as f64;
        println!("sigma={sigma}: bayes {:.3} rawlr {:.3} gap {:+.3}", mean(&bayes_m), mean(&lr_m), mean(&bayes_m) - mean(&lr_m));
    }
}
