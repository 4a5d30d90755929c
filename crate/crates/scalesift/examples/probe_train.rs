use scalesift::distill::{train_kd, TrainConfig, TrainSet};
use scalesift::scoring::{HrProvider, DEFAULT_BETA};
use scalesift::world::{default_world_spec, generate_world, split_locations, DEFAULT_SPLIT_FRACTIONS};

fn main() {
    let spec = default_world_spec(0);
    let world = generate_world(&spec).unwrap();
    let split = split_locations(&world, DEFAULT_SPLIT_FRACTIONS, 0).unwrap();
    let hr = HrProvider::Synthetic { world: &world, beta: DEFAULT_BETA };
    let train = TrainSet::from_world_split(&world, &split, &hr).unwrap();
    for (lr, epochs) in [(0.05, 500usize), (0.01, 500), (0.002, 2000), (0.0005, 4000), (0.001, 8000)] {
        let mut config = TrainConfig::new(0, world.spec.concepts.iter().map(|c| c.seen).collect());
        config.learning_rate = lr;
        config.epochs = epochs;
        match train_kd(&train, &config) {
            Ok((_, hist)) => {
                let h = |i: usize| hist.get(i).copied().unwrap_or(f64::NAN);
                println!(
                    "lr={lr:<7} epochs={epochs:<5} loss: e0 {:.2} e10 {:.2} e100 {:.2} mid {:.2} final {:.2}",
                    h(0), h(10), h(100), h(epochs / 2), hist.last().unwrap()
                );
            }
            Err(e) => println!("lr={lr} epochs={epochs}: {e}"),
        }
    }
}
