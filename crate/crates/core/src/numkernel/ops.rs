use super::Tensor;
use crate::error::{Error, Result};

/// `a (M×K) · b (K×N)`.
pub fn matmul(a: &Tensor, b: &Tensor) -> Result<Tensor> {
    let (m, k) = a.dims2()?;
    let (k2, n) = b.dims2()?;
    if k != k2 {
        return Err(Error::Shape(format!(
            "matmul: inner dimensions differ, {:?} x {:?}",
            a.shape(),
            b.shape()
        )));
    }
    let (ad, bd) = (a.data(), b.data());
    let mut out = vec![0.0; m * n];
    // i-k-j order keeps the inner loop contiguous in both b and out.
    for i in 0..m {
        let out_row = &mut out[i * n..(i + 1) * n];
        for p in 0..k {
            let aip = ad[i * k + p];
            if aip == 0.0 {
                continue;
            }
            let b_row = &bd[p * n..(p + 1) * n];
            for (o, &bv) in out_row.iter_mut().zip(b_row) {
                *o += aip * bv;
            }
        }
    }
    Tensor::new(vec![m, n], out)
}

fn conv_dims(input: &Tensor, kernels: &Tensor) -> Result<(usize, usize, usize, usize)> {
    let (len, cin) = input.dims2()?;
    let (filters, width, kcin) = match kernels.shape() {
        &[f, k, c] => (f, k, c),
        s => {
            return Err(Error::Shape(format!(
                "conv1d: kernels must be F×K×Cin, got {s:?}"
            )))
        }
    };
    if kcin != cin {
        return Err(Error::Shape(format!(
            "conv1d: input {:?} has {} channels but kernels {:?} expect {}",
            input.shape(),
            cin,
            kernels.shape(),
            kcin
        )));
    }
    if width == 0 || width > len {
        return Err(Error::Shape(format!(
            "conv1d: kernel width {} does not fit input length {}",
            width, len
        )));
    }
    Ok((len, cin, filters, width))
}

/// Stride-1, unpadded 1-D cross-correlation.
///
/// `out[t][f] = bias[f] + Σ_{k,c} input[t+k][c] · kernels[f][k][c]`, with
/// `input` laid out as `L × Cin`, `kernels` as `F × K × Cin` and the output
/// as `(L−K+1) × F`. Kernels are not flipped.
pub fn conv1d_forward(input: &Tensor, kernels: &Tensor, bias: &Tensor) -> Result<Tensor> {
    let (len, cin, filters, width) = conv_dims(input, kernels)?;
    if bias.shape() != [filters] {
        return Err(Error::Shape(format!(
            "conv1d: bias {:?} does not match {} filters",
            bias.shape(),
            filters
        )));
    }
    let out_len = len - width + 1;
    let (x, w, b) = (input.data(), kernels.data(), bias.data());
    let window = width * cin;
    let mut out = vec![0.0; out_len * filters];
    for t in 0..out_len {
        // Rows t..t+K of a row-major L×Cin input are one contiguous slice.
        let patch = &x[t * cin..t * cin + window];
        for f in 0..filters {
            let kern = &w[f * window..(f + 1) * window];
            let dot: f64 = patch.iter().zip(kern).map(|(a, b)| a * b).sum();
            out[t * filters + f] = b[f] + dot;
        }
    }
    Tensor::new(vec![out_len, filters], out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Conv1dGrads {
    pub input: Tensor,
    pub kernels: Tensor,
    pub bias: Tensor,
}

/// Gradients of `Σ upstream ⊙ conv1d_forward(input, kernels, bias)`.
pub fn conv1d_backward(input: &Tensor, kernels: &Tensor, upstream: &Tensor) -> Result<Conv1dGrads> {
    let (len, cin, filters, width) = conv_dims(input, kernels)?;
    let out_len = len - width + 1;
    if upstream.shape() != [out_len, filters] {
        return Err(Error::Shape(format!(
            "conv1d_backward: upstream {:?} should be [{}, {}]",
            upstream.shape(),
            out_len,
            filters
        )));
    }
    let (x, w, g) = (input.data(), kernels.data(), upstream.data());
    let window = width * cin;
    let mut gx = vec![0.0; len * cin];
    let mut gw = vec![0.0; filters * window];
    let mut gb = vec![0.0; filters];
    for t in 0..out_len {
        let patch = &x[t * cin..t * cin + window];
        for f in 0..filters {
            let up = g[t * filters + f];
            if up == 0.0 {
                continue;
            }
            gb[f] += up;
            let kern = &w[f * window..(f + 1) * window];
            let gk = &mut gw[f * window..(f + 1) * window];
            for (acc, &xv) in gk.iter_mut().zip(patch) {
                *acc += up * xv;
            }
            let gpatch = &mut gx[t * cin..t * cin + window];
            for (acc, &kv) in gpatch.iter_mut().zip(kern) {
                *acc += up * kv;
            }
        }
    }
    Ok(Conv1dGrads {
        input: Tensor::new(vec![len, cin], gx)?,
        kernels: Tensor::new(vec![filters, width, cin], gw)?,
        bias: Tensor::new(vec![filters], gb)?,
    })
}

pub fn relu(x: &Tensor) -> Tensor {
    x.map(|v| v.max(0.0))
}

/// Derivative of [`relu`]; taken as 0 at exactly 0.
pub fn relu_grad(x: &Tensor) -> Tensor {
    x.map(|v| if v > 0.0 { 1.0 } else { 0.0 })
}

/// Row-wise softmax of an `N × C` tensor, stabilized by subtracting each row's max.
pub fn softmax(logits: &Tensor) -> Result<Tensor> {
    let (n, c) = logits.dims2()?;
    if c < 2 {
        return Err(Error::Shape(format!(
            "softmax needs at least 2 classes, got shape {:?}",
            logits.shape()
        )));
    }
    let mut out = Vec::with_capacity(n * c);
    for row in logits.data().chunks(c) {
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let start = out.len();
        out.extend(row.iter().map(|v| (v - max).exp()));
        let sum: f64 = out[start..].iter().sum();
        for v in &mut out[start..] {
            *v /= sum;
        }
    }
    Tensor::new(vec![n, c], out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkernel::SeededRng;
    use proptest::prelude::*;

    fn random(shape: &[usize], rng: &mut SeededRng) -> Tensor {
        let n = shape.iter().product();
        Tensor::new(shape.to_vec(), (0..n).map(|_| rng.uniform(-1.0, 1.0)).collect()).unwrap()
    }

    fn naive_matmul(a: &Tensor, b: &Tensor) -> Tensor {
        let (m, k) = a.dims2().unwrap();
        let (_, n) = b.dims2().unwrap();
        let mut out = Tensor::zeros(&[m, n]);
        for i in 0..m {
            for j in 0..n {
                let mut s = 0.0;
                for p in 0..k {
                    s += a.data()[i * k + p] * b.data()[p * n + j];
                }
                out.data_mut()[i * n + j] = s;
            }
        }
        out
    }

    fn sliding_window(input: &Tensor, kernels: &Tensor, bias: &Tensor) -> Tensor {
        let (len, cin) = input.dims2().unwrap();
        let (f, k) = (kernels.shape()[0], kernels.shape()[1]);
        let out_len = len - k + 1;
        let mut out = Tensor::zeros(&[out_len, f]);
        for t in 0..out_len {
            for ff in 0..f {
                let mut s = bias.data()[ff];
                for kk in 0..k {
                    for c in 0..cin {
                        s += input.data()[(t + kk) * cin + c] * kernels.data()[(ff * k + kk) * cin + c];
                    }
                }
                out.data_mut()[t * f + ff] = s;
            }
        }
        out
    }

    #[test]
    fn matmul_identity_and_zero() {
        let mut rng = SeededRng::new(1);
        let a = random(&[3, 3], &mut rng);
        let mut eye = Tensor::zeros(&[3, 3]);
        for i in 0..3 {
            eye.data_mut()[i * 4] = 1.0;
        }
        assert_eq!(matmul(&a, &eye).unwrap(), a);

        let a = random(&[2, 4], &mut rng);
        assert_eq!(matmul(&a, &Tensor::zeros(&[4, 3])).unwrap(), Tensor::zeros(&[2, 3]));
    }

    #[test]
    fn matmul_matches_triple_loop() {
        let mut rng = SeededRng::new(11);
        let a = random(&[3, 4], &mut rng);
        let b = random(&[4, 2], &mut rng);
        assert!(matmul(&a, &b).unwrap().max_abs_diff(&naive_matmul(&a, &b)) < 1e-12);
    }

    #[test]
    fn matmul_shape_error_names_both() {
        let err = matmul(&Tensor::zeros(&[2, 3]), &Tensor::zeros(&[4, 2])).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("[2, 3]") && msg.contains("[4, 2]"), "{msg}");
    }

    #[test]
    fn matmul_associative() {
        let mut rng = SeededRng::new(77);
        for _ in 0..20 {
            let a = random(&[4, 5], &mut rng);
            let b = random(&[5, 3], &mut rng);
            let c = random(&[3, 6], &mut rng);
            let left = matmul(&matmul(&a, &b).unwrap(), &c).unwrap();
            let right = matmul(&a, &matmul(&b, &c).unwrap()).unwrap();
            for (l, r) in left.data().iter().zip(right.data()) {
                assert!((l - r).abs() <= 1e-9 * l.abs().max(r.abs()).max(1.0));
            }
        }
    }

    #[test]
    fn conv_identity_kernel() {
        let input = Tensor::new(vec![4, 1], vec![1.0, -2.0, 3.5, 0.25]).unwrap();
        let k = Tensor::new(vec![1, 1, 1], vec![1.0]).unwrap();
        let out = conv1d_forward(&input, &k, &Tensor::zeros(&[1])).unwrap();
        assert_eq!(out.data(), input.data());
    }

    #[test]
    fn conv_multichannel_identity() {
        let mut rng = SeededRng::new(4);
        let input = random(&[6, 3], &mut rng);
        let mut k = Tensor::zeros(&[3, 1, 3]);
        for c in 0..3 {
            k.data_mut()[c * 3 + c] = 1.0;
        }
        let out = conv1d_forward(&input, &k, &Tensor::zeros(&[3])).unwrap();
        assert_eq!(out, input);
    }

    #[test]
    fn conv_zero_kernel_gives_bias() {
        let input = Tensor::new(vec![5, 1], vec![1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        let k = Tensor::zeros(&[1, 2, 1]);
        let out = conv1d_forward(&input, &k, &Tensor::new(vec![1], vec![0.7]).unwrap()).unwrap();
        assert_eq!(out.shape(), &[4, 1]);
        assert!(out.data().iter().all(|&v| v == 0.7));
    }

    #[test]
    fn conv_hand_example() {
        let input = Tensor::new(vec![3, 1], vec![1.0, 2.0, 3.0]).unwrap();
        let k = Tensor::new(vec![1, 3, 1], vec![1.0, 0.0, -1.0]).unwrap();
        let out = conv1d_forward(&input, &k, &Tensor::zeros(&[1])).unwrap();
        assert_eq!(out.data(), &[-2.0]);
    }

    #[test]
    fn conv_kernel_longer_than_input() {
        let input = Tensor::zeros(&[2, 1]);
        let k = Tensor::zeros(&[1, 3, 1]);
        assert!(matches!(
            conv1d_forward(&input, &k, &Tensor::zeros(&[1])),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn conv_matches_sliding_window_oracle() {
        let mut rng = SeededRng::new(21);
        for _ in 0..25 {
            let len = 1 + rng.below(12) as usize;
            let width = 1 + rng.below(len as u64) as usize;
            let cin = 1 + rng.below(3) as usize;
            let f = 1 + rng.below(4) as usize;
            let input = random(&[len, cin], &mut rng);
            let k = random(&[f, width, cin], &mut rng);
            let b = random(&[f], &mut rng);
            let fast = conv1d_forward(&input, &k, &b).unwrap();
            assert!(fast.max_abs_diff(&sliding_window(&input, &k, &b)) < 1e-12);
        }
    }

    #[test]
    fn conv_backward_zero_upstream() {
        let mut rng = SeededRng::new(8);
        let input = random(&[5, 2], &mut rng);
        let k = random(&[2, 3, 2], &mut rng);
        let g = conv1d_backward(&input, &k, &Tensor::zeros(&[3, 2])).unwrap();
        assert!(g.input.data().iter().all(|&v| v == 0.0));
        assert!(g.kernels.data().iter().all(|&v| v == 0.0));
        assert!(g.bias.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn conv_backward_single_window() {
        // L == K: one output position, so d/dW[f] = upstream[0][f] * input.
        let mut rng = SeededRng::new(12);
        let input = random(&[3, 2], &mut rng);
        let k = random(&[2, 3, 2], &mut rng);
        let up = Tensor::new(vec![1, 2], vec![0.5, -2.0]).unwrap();
        let g = conv1d_backward(&input, &k, &up).unwrap();
        for f in 0..2 {
            let expected: Vec<f64> = input.data().iter().map(|x| up.data()[f] * x).collect();
            assert_eq!(&g.kernels.data()[f * 6..(f + 1) * 6], &expected[..]);
        }
        assert_eq!(g.bias.data(), up.data());
    }

    #[test]
    fn conv_backward_shape_error() {
        let input = Tensor::zeros(&[5, 1]);
        let k = Tensor::zeros(&[2, 3, 1]);
        assert!(conv1d_backward(&input, &k, &Tensor::zeros(&[2, 2])).is_err());
    }

    fn rel_err(a: f64, b: f64) -> f64 {
        (a - b).abs() / a.abs().max(b.abs()).max(1.0)
    }

    #[test]
    fn conv_backward_matches_finite_differences() {
        let eps = 1e-5;
        for seed in 0..20 {
            let mut rng = SeededRng::new(100 + seed);
            let input = random(&[5, 2], &mut rng);
            let k = random(&[2, 3, 2], &mut rng);
            let b = random(&[2], &mut rng);
            let up = random(&[3, 2], &mut rng);
            let objective = |x: &Tensor, k: &Tensor, b: &Tensor| -> f64 {
                let out = conv1d_forward(x, k, b).unwrap();
                out.data().iter().zip(up.data()).map(|(o, u)| o * u).sum()
            };
            let g = conv1d_backward(&input, &k, &up).unwrap();
            let mut worst: f64 = 0.0;
            for i in 0..input.len() {
                let (mut p, mut m) = (input.clone(), input.clone());
                p.data_mut()[i] += eps;
                m.data_mut()[i] -= eps;
                let fd = (objective(&p, &k, &b) - objective(&m, &k, &b)) / (2.0 * eps);
                worst = worst.max(rel_err(g.input.data()[i], fd));
            }
            for i in 0..k.len() {
                let (mut p, mut m) = (k.clone(), k.clone());
                p.data_mut()[i] += eps;
                m.data_mut()[i] -= eps;
                let fd = (objective(&input, &p, &b) - objective(&input, &m, &b)) / (2.0 * eps);
                worst = worst.max(rel_err(g.kernels.data()[i], fd));
            }
            for i in 0..b.len() {
                let (mut p, mut m) = (b.clone(), b.clone());
                p.data_mut()[i] += eps;
                m.data_mut()[i] -= eps;
                let fd = (objective(&input, &k, &p) - objective(&input, &k, &m)) / (2.0 * eps);
                worst = worst.max(rel_err(g.bias.data()[i], fd));
            }
            assert!(worst < 1e-6, "seed {seed}: {worst}");
        }
    }

    #[test]
    fn relu_cases() {
        let x = Tensor::new(vec![3], vec![-1.0, 0.0, 2.0]).unwrap();
        assert_eq!(relu(&x).data(), &[0.0, 0.0, 2.0]);
        assert_eq!(relu_grad(&x).data(), &[0.0, 0.0, 1.0]);
    }

    #[test]
    fn softmax_closed_forms() {
        let l = Tensor::from_rows(&[vec![0.0, 0.0], vec![0.0, 3f64.ln()]]).unwrap();
        let p = softmax(&l).unwrap();
        assert_eq!(p.row(0), &[0.5, 0.5]);
        assert!((p.row(1)[0] - 0.25).abs() < 1e-15);
        assert!((p.row(1)[1] - 0.75).abs() < 1e-15);
    }

    #[test]
    fn softmax_rejects_single_class() {
        assert!(softmax(&Tensor::zeros(&[2, 1])).is_err());
    }

    proptest! {
        #[test]
        fn relu_symmetry(xs in proptest::collection::vec(-1e6f64..1e6, 1..50)) {
            let x = Tensor::new(vec![xs.len()], xs.clone()).unwrap();
            let neg = x.map(|v| -v);
            let sum: Vec<f64> = relu(&x).data().iter().zip(relu(&neg).data()).map(|(a, b)| a + b).collect();
            let abs: Vec<f64> = xs.iter().map(|v| v.abs()).collect();
            prop_assert_eq!(sum, abs);
        }

        #[test]
        fn softmax_rows_normalized(rows in proptest::collection::vec(proptest::collection::vec(-1e3f64..1e3, 2..6), 1..10)) {
            let width = rows[0].len();
            let rows: Vec<Vec<f64>> = rows.into_iter().map(|mut r| { r.resize(width, 0.0); r }).collect();
            let p = softmax(&Tensor::from_rows(&rows).unwrap()).unwrap();
            for row in p.rows() {
                let s: f64 = row.iter().sum();
                prop_assert!((s - 1.0).abs() <= 1e-12);
                prop_assert!(row.iter().all(|&v| (0.0..=1.0).contains(&v)));
            }
        }

        #[test]
        fn softmax_shift_invariant(row in proptest::collection::vec(-10f64..10.0, 2..6)) {
            let base = softmax(&Tensor::from_rows(std::slice::from_ref(&row)).unwrap()).unwrap();
            let shifted: Vec<f64> = row.iter().map(|v| v + 1000.0).collect();
            let moved = softmax(&Tensor::from_rows(&[shifted]).unwrap()).unwrap();
            prop_assert!(base.max_abs_diff(&moved) <= 1e-12);
        }
    }
}
