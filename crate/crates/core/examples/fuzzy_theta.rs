//! Priority factor produced by the fuzzy controller over a grid of queue
//! fill levels and waiting times.

use fuzzyq_offload::fuzzy::FuzzyController;

fn main() {
    let fc = FuzzyController::default();
    let capacity = 25.0;
    let delta = 10.0;

    let [low, mid, high] = fc.crisp_outputs();
    println!("crisp outputs: low {low:.6}  medium {mid:.6}  high {high:.6}\n");

    print!("{:>10}", "free \\ wait");
    let waits = [0.0, 3.0, 5.0, 7.0, 9.0, 10.0];
    for w in waits {
        print!("{w:>8}");
    }
    println!();
    for free in [0.0, 2.5, 6.25, 12.5, 18.75, 25.0] {
        print!("{free:>10}");
        for w in waits {
            print!("{:>8.3}", fc.compute_theta(free, capacity, w, delta));
        }
        println!();
    }
}
