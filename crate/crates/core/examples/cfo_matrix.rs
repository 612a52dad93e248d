//! Frequency-domain CFO matrix: magnitude of the main diagonal and the first
//! few off-diagonals for a few normalized offsets.

use uwofdm_lab::airlink::lambda_stat_entry;

fn main() {
    let n = 64;
    let k = 20;
    println!("{:>5} {:>8} {:>8} {:>8} {:>8}", "eps", "|d0|", "|d1|", "|d2|", "|d3|");
    for eps in [0.01, 0.05, 0.1, 0.2, 0.37] {
        let mags: Vec<String> = (0..4)
            .map(|o| format!("{:>8.4}", lambda_stat_entry(eps, k, k + o, n).norm()))
            .collect();
        println!("{eps:>5} {}", mags.join(" "));
    }
}
