//! Children per arm for a two-sample t-test, exact and by the normal
//! approximation, plus the power curve around the answer.

use anthroquest::analytics::{normal_approx_sample_size, sample_size, t_test_power, PowerParams, Tails};

fn main() {
    let params = PowerParams::new(0.5, 0.05, 0.95, Tails::One);
    let n = sample_size(&params).unwrap();
    println!("d = 0.5, alpha = 0.05, power = 0.95, one-tailed");
    println!("  noncentral t: {} per group (power {:.4})", n.n1, n.achieved_power);
    println!("  normal approximation: {}", normal_approx_sample_size(&params).unwrap());
    for k in n.n1 - 3..=n.n1 + 2 {
        println!("  n = {k}: power {:.5}", t_test_power(0.5, 0.05, Tails::One, k, k));
    }

    let two = PowerParams { tails: Tails::Two, allocation_ratio: 2.0, ..params };
    let m = sample_size(&two).unwrap();
    println!("two-tailed with twice as many controls: {} and {}", m.n1, m.n2);
}
