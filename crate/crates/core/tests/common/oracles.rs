//! Slow reference computations for cross-checking the library.
//!
//! Everything here works on `Vec<Vec<f64>>` with explicit loops and its own
//! RNG so that no library code is on the checking path.

pub type Rows = Vec<Vec<f64>>;

pub struct OracleResult<T> {
    pub value: T,
    pub method: &'static str,
    pub tolerance: f64,
}

/// xorshift64*, seeded away from zero.
pub struct Lcg(u64);

impl Lcg {
    pub fn new(seed: u64) -> Self {
        Lcg(seed ^ 0x2545_F491_4F6C_DD1D | 1)
    }

    pub fn next_u64(&mut self) -> u64 {
        let mut x = self.0;
        x ^= x >> 12;
        x ^= x << 25;
        x ^= x >> 27;
        self.0 = x;
        x.wrapping_mul(0x2545_F491_4F6C_DD1D)
    }

    /// Uniform on [-1, 1).
    pub fn sym(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
    }
}

pub fn matmul(a: &Rows, b: &Rows) -> Rows {
    let n = b.first().map_or(0, Vec::len);
    let mut out = vec![vec![0.0; n]; a.len()];
    for i in 0..a.len() {
        for k in 0..b.len() {
            for j in 0..n {
                out[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    out
}

pub fn naive_sse(x: &Rows, w: &Rows, y: &Rows) -> OracleResult<f64> {
    let p = matmul(x, w);
    let mut s = 0.0;
    for i in 0..y.len() {
        for j in 0..y[i].len() {
            let r = p[i][j] - y[i][j];
            s += r * r;
        }
    }
    OracleResult {
        value: s,
        method: "elementwise residual loop",
        tolerance: 1e-12,
    }
}

pub fn frobenius(a: &Rows) -> f64 {
    a.iter().flatten().map(|v| v * v).sum::<f64>().sqrt()
}

/// Best of `samples` random points in a box of half-width `radius` around
/// `center` (typically the analytic solution).
pub fn naive_lstsq(x: &Rows, y: &Rows, center: &Rows, samples: usize, radius: f64, seed: u64) -> OracleResult<(Rows, f64)> {
    let mut rng = Lcg::new(seed);
    let mut best = (center.clone(), naive_sse(x, center, y).value);
    for _ in 0..samples {
        let cand: Rows = center
            .iter()
            .map(|r| r.iter().map(|v| v + radius * rng.sym()).collect())
            .collect();
        let e = naive_sse(x, &cand, y).value;
        if e < best.1 {
            best = (cand, e);
        }
    }
    OracleResult {
        value: best,
        method: "random search in a box",
        tolerance: 1e-9,
    }
}

fn softplus_mod(z: f64) -> f64 {
    (0.8 + z.exp()).ln()
}

/// Single-sample forward pass with scalar loops. `layers[k]` is the full
/// `(fan_in + 1) x width` weight block, bias row first.
///
/// The tolerance is 1e-12 relative to the largest sum of absolute terms seen
/// in any pre-activation, since trained weights can cancel heavily.
pub fn naive_forward(layers: &[Rows], x_row: &[f64]) -> OracleResult<Vec<f64>> {
    let mut a: Vec<f64> = x_row.to_vec();
    let mut magnitude: f64 = 1.0;
    for w in layers {
        let width = w[0].len();
        let mut next = vec![0.0; width];
        for (j, out) in next.iter_mut().enumerate() {
            let mut z = w[0][j];
            let mut abs = w[0][j].abs();
            for (i, v) in a.iter().enumerate() {
                z += v * w[i + 1][j];
                abs += (v * w[i + 1][j]).abs();
            }
            magnitude = magnitude.max(abs);
            *out = softplus_mod(z);
        }
        a = next;
    }
    OracleResult {
        value: a,
        method: "scalar loops over the layer recursion",
        tolerance: 1e-12 * magnitude,
    }
}

/// Percent of rows whose largest output (first on ties) is the label; a
/// single output column is thresholded at 0.5.
pub fn naive_accuracy(outputs: &Rows, labels: &[usize]) -> OracleResult<f64> {
    let mut hits = 0;
    for (row, &l) in outputs.iter().zip(labels) {
        let pred = if row.len() == 1 {
            usize::from(row[0] >= 0.5)
        } else {
            let mut best = 0;
            for j in 1..row.len() {
                if row[j] > row[best] {
                    best = j;
                }
            }
            best
        };
        if pred == l {
            hits += 1;
        }
    }
    OracleResult {
        value: 100.0 * hits as f64 / labels.len() as f64,
        method: "counting loop",
        tolerance: 0.0,
    }
}

/// Component of `v` orthogonal to every row of `x` (classical Gram-Schmidt
/// done twice), i.e. a vector in the null space of `x`.
pub fn null_component(x: &Rows, v: &[f64]) -> Vec<f64> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for row in x {
        let mut u = row.clone();
        for _ in 0..2 {
            for b in &basis {
                let d: f64 = u.iter().zip(b).map(|(p, q)| p * q).sum();
                for (ui, bi) in u.iter_mut().zip(b) {
                    *ui -= d * bi;
                }
            }
        }
        let n = u.iter().map(|t| t * t).sum::<f64>().sqrt();
        if n > 1e-10 {
            basis.push(u.iter().map(|t| t / n).collect());
        }
    }
    let mut out = v.to_vec();
    for _ in 0..2 {
        for b in &basis {
            let d: f64 = out.iter().zip(b).map(|(p, q)| p * q).sum();
            for (oi, bi) in out.iter_mut().zip(b) {
                *oi -= d * bi;
            }
        }
    }
    out
}

/// `m x n` matrix of rank at most `rank`, entries drawn from `rng`.
pub fn random_rows(rng: &mut Lcg, m: usize, n: usize, rank: Option<usize>) -> Rows {
    match rank {
        None => (0..m).map(|_| (0..n).map(|_| rng.sym()).collect()).collect(),
        Some(r) => {
            let l = random_rows(rng, m, r, None);
            let rt = random_rows(rng, r, n, None);
            matmul(&l, &rt)
        }
    }
}
