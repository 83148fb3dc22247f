//! The modified softplus, its inverse, and where the round trip loses precision.

use karspace::Activation;

fn main() {
    let f = Activation::default();
    println!("f(x) = ln(0.8 + e^x), floor {:.6}", f.floor());
    println!("{:>8} {:>14} {:>12}", "x", "f(x)", "round trip");
    for x in [-30.0, -20.0, -15.0, -10.0, -1.0, 0.0, 1.0, 10.0, 30.0] {
        let y = f.act(x);
        let back = f.act_inv(y).unwrap();
        println!("{x:>8.1} {y:>14.10} {:>12.2e}", (back - x).abs());
    }

    // targets at or below the floor have no preimage
    let below = f.floor() - 0.01;
    println!("act_inv({below:.4}) -> {:?}", f.act_inv(below).err());
    let (x, clipped) = f.act_inv_clipped(below);
    println!("clipped: x = {x:.4}, clipped = {clipped}");
}
