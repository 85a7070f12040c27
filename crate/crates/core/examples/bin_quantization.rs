//! Bin schedules: encode continuous values to classification targets and
//! decode score vectors back via the weighted sum.
//!
//! Run with: `cargo run --example bin_quantization`

use slk::bin_codec::{BinValue, Dof, DofSchedules, ScoreVector};

fn main() {
    let schedules = DofSchedules::default();

    println!("depth schedule grows linearly: first bins");
    let depth = &schedules.depth;
    for i in 0..5 {
        println!(
            "  bin {i}: [{:.2}, {:.2}) m, center {:.2}, width {:.2}",
            depth.edge(i),
            depth.edge(i + 1),
            depth.center(i),
            depth.width(i)
        );
    }
    println!(
        "  ... bin 99: [{:.2}, {:.2}) m",
        depth.edge(99),
        depth.edge(100)
    );

    // Encode-decode round trip: error is bounded by half the bin width.
    let z = 37.4;
    let one_hot = depth.encode_one_hot(z);
    let decoded = depth.decode(&one_hot).unwrap();
    println!(
        "\nencode({z}) -> bin {} -> decode = {decoded:.3} (bin half-width {:.3})",
        one_hot.argmax(),
        depth.width(depth.bin_index(z)) / 2.0
    );

    // A soft score vector decodes to the weighted mean of bin centers.
    let mut soft = ScoreVector::new(vec![0.0; depth.count]);
    let i = depth.bin_index(z);
    soft.scores[i - 1] = 0.2;
    soft.scores[i] = 0.6;
    soft.scores[i + 1] = 0.2;
    println!("soft scores decode to {:.3}", depth.decode(&soft).unwrap());
    println!(
        "lower-edge decode (ablation arm) gives {:.3}",
        depth.decode_with(&soft, BinValue::LowerEdge).unwrap()
    );

    // The angle schedule has a circular decoder for mass near the wrap seam.
    let angle = &schedules.angle;
    let mut wrapped = ScoreVector::new(vec![0.0; angle.count]);
    wrapped.scores[0] = 0.5; // near -pi
    wrapped.scores[angle.count - 1] = 0.5; // near +pi
    println!(
        "\nwrap-seam scores: plain decode {:+.3} rad, circular decode {:+.3} rad",
        angle.decode(&wrapped).unwrap(),
        angle.decode_angle_circular(&wrapped).unwrap()
    );

    println!("\nquantization error bounds (half the widest bin):");
    for dof in Dof::ALL {
        println!(
            "  {:<7} {:+.3}",
            dof.name(),
            schedules.get(dof).quantization_error_bound()
        );
    }

    println!("\nschedules serialize to a plain-text config:");
    print!("{}", schedules.to_config_string());
}
