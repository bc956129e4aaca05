#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::Rng;
use signet_core::Graph;

/// Random connected graph: a random spanning tree plus `extra` chords,
/// every edge with a random orientation and no parallel edges.
pub fn random_connected_edges<R: Rng>(rng: &mut R, n: usize, extra: usize) -> Vec<(usize, usize)> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut pairs = Vec::new();
    for i in 1..n {
        let a = order[i];
        let b = order[rng.gen_range(0..i)];
        pairs.push((a, b));
    }
    let mut tries = 0;
    while pairs.len() < n - 1 + extra && tries < 100 {
        tries += 1;
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(0..n);
        if a == b
            || pairs
                .iter()
                .any(|&(x, y)| (x, y) == (a, b) || (x, y) == (b, a))
        {
            continue;
        }
        pairs.push((a, b));
    }
    pairs
        .into_iter()
        .map(|(a, b)| if rng.gen_bool(0.5) { (a, b) } else { (b, a) })
        .collect()
}

pub fn random_connected_graph<R: Rng>(rng: &mut R, n: usize, extra: usize) -> Graph {
    Graph::new(n, &random_connected_edges(rng, n, extra)).unwrap()
}

/// Composite Simpson rule with `2k` panels.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, k: usize) -> f64 {
    let n = 2 * k;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

/// Solves a dense linear system by Gaussian elimination with partial
/// pivoting.
pub fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for c in 0..n {
        let piv = (c..n)
            .max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))
            .unwrap();
        a.swap(c, piv);
        b.swap(c, piv);
        let pivot = a[c].clone();
        for r in c + 1..n {
            let f = a[r][c] / pivot[c];
            for (x, p) in a[r][c..].iter_mut().zip(&pivot[c..]) {
                *x -= f * p;
            }
            b[r] -= f * b[c];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|k| a[r][k] * x[k]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    x
}

/// Effective resistance by grounding `q`, injecting unit current at `p`
/// and solving the reduced Laplacian.
pub fn grounded_resistance(
    n: usize,
    pairs: &[(usize, usize)],
    w: &[f64],
    p: usize,
    q: usize,
) -> f64 {
    let idx: Vec<usize> = (0..n).filter(|&i| i != q).collect();
    let pos = |i: usize| idx.iter().position(|&j| j == i);
    let m = idx.len();
    let mut a = vec![vec![0.0; m]; m];
    for (&(t, h), &wk) in pairs.iter().zip(w) {
        for (x, y) in [(t, h), (h, t)] {
            if let Some(i) = pos(x) {
                a[i][i] += wk;
                if let Some(j) = pos(y) {
                    a[i][j] -= wk;
                }
            }
        }
    }
    let mut b = vec![0.0; m];
    b[pos(p).unwrap()] = 1.0;
    let v = gauss_solve(a, b);
    v[pos(p).unwrap()]
}
