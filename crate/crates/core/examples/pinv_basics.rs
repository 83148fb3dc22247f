//! Pseudo-inverse of a rank-deficient matrix, minimum-norm solves, and the ridge limit.

use karspace::linalg::{pinv, solve_min_norm, sse};
use karspace::{Matrix, PinvConfig};

fn main() {
    // rank 2: the third column is the sum of the first two
    let a = Matrix::from_row_slice(4, 3, &[
        1.0, 0.0, 1.0,
        0.0, 1.0, 1.0,
        1.0, 1.0, 2.0,
        2.0, -1.0, 1.0,
    ]);
    let svd = PinvConfig::default();
    let p = pinv(&a, &svd).unwrap();
    println!("pinv(A) =\n{p:.6}");
    println!("||A A+ A - A||_F = {:.3e}", (&a * &p * &a - &a).norm());

    let y = Matrix::from_column_slice(4, 1, &[1.0, 2.0, 3.0, 0.5]);
    let w = solve_min_norm(&a, &y, &svd).unwrap();
    println!("least-squares weights {:?}", w.as_slice());
    println!("sse {:.6}, ||w|| {:.6}", sse(&a, &w, &y).unwrap(), w.norm());

    // adding a null-space vector keeps the fit but grows the norm
    let z = Matrix::from_column_slice(3, 1, &[1.0, 1.0, -1.0]);
    let shifted = &w + z * 0.3;
    println!("shifted: sse {:.6}, ||w|| {:.6}", sse(&a, &shifted, &y).unwrap(), shifted.norm());

    for lambda in [1e-2, 1e-6, 1e-10] {
        let r = pinv(&a, &PinvConfig::ridge(lambda));
        match r {
            Ok(r) => println!("ridge lambda={lambda:e}: ||P_ridge - P_svd||_F = {:.3e}", (&r - &p).norm()),
            Err(e) => println!("ridge lambda={lambda:e}: {e}"),
        }
    }
}
