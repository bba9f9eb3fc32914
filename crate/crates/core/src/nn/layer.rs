use crate::{Error, Result};

/// Hyperparameters of a 1-D convolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConvSpec {
    pub in_channels: usize,
    pub out_channels: usize,
    pub kernel: usize,
    pub stride: usize,
    pub padding: usize,
}

impl ConvSpec {
    /// Output length `(J + 2p - k) / s + 1`, or an error unless the division
    /// is exact and the result positive.
    pub fn output_len(&self, input_len: usize) -> Result<usize> {
        if self.kernel == 0 || self.stride == 0 || self.in_channels == 0 || self.out_channels == 0 {
            return Err(Error::Config(format!(
                "convolution needs nonzero kernel, stride and channels: {self:?}"
            )));
        }
        let padded = input_len + 2 * self.padding;
        if padded < self.kernel {
            return Err(Error::Config(format!(
                "kernel {} longer than padded input {padded}",
                self.kernel
            )));
        }
        let span = padded - self.kernel;
        if span % self.stride != 0 {
            return Err(Error::Config(format!(
                "({input_len} + 2*{} - {}) is not divisible by stride {}",
                self.padding, self.kernel, self.stride
            )));
        }
        Ok(span / self.stride + 1)
    }

    pub fn param_count(&self) -> usize {
        self.out_channels * self.in_channels * self.kernel + self.out_channels
    }
}

/// One layer of a [`Network`](super::Network). Parameterized layers own the
/// range `offset..offset + param_count()` of the network's flat parameter
/// vector.
#[derive(Debug, Clone, PartialEq)]
pub enum Layer {
    /// `y = W x + b`, `W` stored row-major `[outputs][inputs]`, then `b`.
    Dense {
        inputs: usize,
        outputs: usize,
        offset: usize,
    },
    /// Channel-major input `[in_channels][in_len]`; weights stored
    /// `[out][in][kernel]`, then one bias per output channel.
    Conv1d {
        spec: ConvSpec,
        in_len: usize,
        out_len: usize,
        offset: usize,
    },
    Tanh {
        len: usize,
    },
    Relu {
        len: usize,
    },
    /// Appends the network's side input (for a critic, the action).
    Concat {
        len: usize,
        extra: usize,
    },
}

impl Layer {
    pub fn input_len(&self) -> usize {
        match *self {
            Layer::Dense { inputs, .. } => inputs,
            Layer::Conv1d { spec, in_len, .. } => spec.in_channels * in_len,
            Layer::Tanh { len } | Layer::Relu { len } | Layer::Concat { len, .. } => len,
        }
    }

    pub fn output_len(&self) -> usize {
        match *self {
            Layer::Dense { outputs, .. } => outputs,
            Layer::Conv1d { spec, out_len, .. } => spec.out_channels * out_len,
            Layer::Tanh { len } | Layer::Relu { len } => len,
            Layer::Concat { len, extra } => len + extra,
        }
    }

    pub fn param_count(&self) -> usize {
        match *self {
            Layer::Dense { inputs, outputs, .. } => inputs * outputs + outputs,
            Layer::Conv1d { spec, .. } => spec.param_count(),
            _ => 0,
        }
    }

    pub fn param_offset(&self) -> Option<usize> {
        match *self {
            Layer::Dense { offset, .. } | Layer::Conv1d { offset, .. } => Some(offset),
            _ => None,
        }
    }

    pub(crate) fn forward(&self, params: &[f64], x: &[f64], side: &[f64], out: &mut Vec<f64>) {
        out.clear();
        match *self {
            Layer::Dense {
                inputs,
                outputs,
                offset,
            } => {
                let w = &params[offset..offset + inputs * outputs];
                let b = &params[offset + inputs * outputs..offset + inputs * outputs + outputs];
                out.extend((0..outputs).map(|o| {
                    let row = &w[o * inputs..(o + 1) * inputs];
                    b[o] + dot(row, x)
                }));
            }
            Layer::Conv1d {
                spec,
                in_len,
                out_len,
                offset,
            } => {
                let ConvSpec {
                    in_channels,
                    out_channels,
                    kernel,
                    stride,
                    padding,
                } = spec;
                let nw = out_channels * in_channels * kernel;
                let w = &params[offset..offset + nw];
                let b = &params[offset + nw..offset + nw + out_channels];
                out.resize(out_channels * out_len, 0.0);
                for oc in 0..out_channels {
                    let y = &mut out[oc * out_len..(oc + 1) * out_len];
                    y.fill(b[oc]);
                    for ic in 0..in_channels {
                        let xin = &x[ic * in_len..(ic + 1) * in_len];
                        let taps = &w[(oc * in_channels + ic) * kernel..(oc * in_channels + ic + 1) * kernel];
                        for (t, yt) in y.iter_mut().enumerate() {
                            let start = (t * stride) as isize - padding as isize;
                            for (kk, &wk) in taps.iter().enumerate() {
                                let j = start + kk as isize;
                                if j >= 0 && (j as usize) < in_len {
                                    *yt += wk * xin[j as usize];
                                }
                            }
                        }
                    }
                }
            }
            Layer::Tanh { .. } => out.extend(x.iter().map(|v| v.tanh())),
            Layer::Relu { .. } => out.extend(x.iter().map(|&v| v.max(0.0))),
            Layer::Concat { extra, .. } => {
                debug_assert_eq!(side.len(), extra);
                out.extend_from_slice(x);
                out.extend_from_slice(side);
            }
        }
    }

    /// Propagates `grad_y` back through the layer. Parameter gradients are
    /// accumulated into `param_grads` when given; the gradient with respect
    /// to the side input is accumulated into `side_grad`. Returns the
    /// gradient with respect to `x`.
    pub(crate) fn backward(
        &self,
        params: &[f64],
        x: &[f64],
        y: &[f64],
        grad_y: &[f64],
        param_grads: Option<&mut [f64]>,
        side_grad: &mut [f64],
    ) -> Vec<f64> {
        match *self {
            Layer::Dense {
                inputs,
                outputs,
                offset,
            } => {
                let w = &params[offset..offset + inputs * outputs];
                let mut gx = vec![0.0; inputs];
                for o in 0..outputs {
                    let g = grad_y[o];
                    if g == 0.0 {
                        continue;
                    }
                    axpy(g, &w[o * inputs..(o + 1) * inputs], &mut gx);
                }
                if let Some(pg) = param_grads {
                    let (gw, gb) = pg[offset..offset + inputs * outputs + outputs].split_at_mut(inputs * outputs);
                    for o in 0..outputs {
                        let g = grad_y[o];
                        gb[o] += g;
                        if g != 0.0 {
                            axpy(g, x, &mut gw[o * inputs..(o + 1) * inputs]);
                        }
                    }
                }
                gx
            }
            Layer::Conv1d {
                spec,
                in_len,
                out_len,
                offset,
            } => {
                let ConvSpec {
                    in_channels,
                    out_channels,
                    kernel,
                    stride,
                    padding,
                } = spec;
                let nw = out_channels * in_channels * kernel;
                let w = &params[offset..offset + nw];
                let mut gx = vec![0.0; in_channels * in_len];
                let mut pg = param_grads.map(|pg| &mut pg[offset..offset + nw + out_channels]);
                for oc in 0..out_channels {
                    let gy = &grad_y[oc * out_len..(oc + 1) * out_len];
                    if let Some(pg) = pg.as_deref_mut() {
                        pg[nw + oc] += gy.iter().sum::<f64>();
                    }
                    for ic in 0..in_channels {
                        let base = (oc * in_channels + ic) * kernel;
                        let xin = &x[ic * in_len..(ic + 1) * in_len];
                        let gxin = &mut gx[ic * in_len..(ic + 1) * in_len];
                        for (t, &g) in gy.iter().enumerate() {
                            if g == 0.0 {
                                continue;
                            }
                            let start = (t * stride) as isize - padding as isize;
                            for kk in 0..kernel {
                                let j = start + kk as isize;
                                if j >= 0 && (j as usize) < in_len {
                                    let j = j as usize;
                                    gxin[j] += w[base + kk] * g;
                                    if let Some(pg) = pg.as_deref_mut() {
                                        pg[base + kk] += xin[j] * g;
                                    }
                                }
                            }
                        }
                    }
                }
                gx
            }
            Layer::Tanh { .. } => grad_y
                .iter()
                .zip(y)
                .map(|(g, t)| g * (1.0 - t * t))
                .collect(),
            Layer::Relu { .. } => grad_y
                .iter()
                .zip(x)
                .map(|(&g, &v)| if v > 0.0 { g } else { 0.0 })
                .collect(),
            Layer::Concat { len, extra } => {
                for (s, g) in side_grad.iter_mut().zip(&grad_y[len..len + extra]) {
                    *s += g;
                }
                grad_y[..len].to_vec()
            }
        }
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    // independent partial sums
    let mut acc = [0.0; 4];
    let chunks = a.len() / 4;
    for c in 0..chunks {
        for l in 0..4 {
            acc[l] += a[4 * c + l] * b[4 * c + l];
        }
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for i in 4 * chunks..a.len() {
        s += a[i] * b[i];
    }
    s
}

#[inline]
fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn spec(kernel: usize, stride: usize, padding: usize) -> ConvSpec {
        ConvSpec {
            in_channels: 1,
            out_channels: 1,
            kernel,
            stride,
            padding,
        }
    }

    #[test]
    fn output_len_examples() {
        assert_eq!(spec(1, 1, 0).output_len(16).unwrap(), 16);
        assert_eq!(spec(3, 2, 1).output_len(5).unwrap(), 3);
        assert!(spec(2, 2, 0).output_len(5).is_err());
        assert!(spec(7, 1, 0).output_len(5).is_err());
        assert!(spec(0, 1, 0).output_len(5).is_err());
        assert!(spec(1, 0, 0).output_len(5).is_err());
    }

    #[test]
    fn identity_kernel_copies_input() {
        let layer = Layer::Conv1d {
            spec: spec(1, 1, 0),
            in_len: 4,
            out_len: 4,
            offset: 0,
        };
        let params = [1.0, 0.0];
        let x = [0.5, -2.0, 3.0, 0.25];
        let mut out = Vec::new();
        layer.forward(&params, &x, &[], &mut out);
        assert_eq!(out, x);
    }

    #[test]
    fn conv_matches_direct_sum() {
        // 2 in channels, 3 out channels, kernel 3, stride 2, padding 1
        let s = ConvSpec {
            in_channels: 2,
            out_channels: 3,
            kernel: 3,
            stride: 2,
            padding: 1,
        };
        let in_len = 7;
        let out_len = s.output_len(in_len).unwrap();
        let layer = Layer::Conv1d {
            spec: s,
            in_len,
            out_len,
            offset: 0,
        };
        let params: Vec<f64> = (0..s.param_count()).map(|i| (i as f64 * 0.37).sin()).collect();
        let x: Vec<f64> = (0..2 * in_len).map(|i| (i as f64 * 0.91).cos()).collect();
        let mut out = Vec::new();
        layer.forward(&params, &x, &[], &mut out);
        for oc in 0..3 {
            for t in 0..out_len {
                let mut want = params[18 + oc];
                for ic in 0..2 {
                    for kk in 0..3 {
                        let j = (t * 2 + kk) as isize - 1;
                        if (0..in_len as isize).contains(&j) {
                            want += params[(oc * 2 + ic) * 3 + kk] * x[ic * in_len + j as usize];
                        }
                    }
                }
                assert!((out[oc * out_len + t] - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn dense_matches_double_loop() {
        let layer = Layer::Dense {
            inputs: 5,
            outputs: 3,
            offset: 2,
        };
        let params: Vec<f64> = (0..20).map(|i| (i as f64 * 1.3).sin()).collect();
        let x = [0.1, -0.4, 2.0, 0.0, 1.5];
        let mut out = Vec::new();
        layer.forward(&params, &x, &[], &mut out);
        for o in 0..3 {
            let mut want = params[2 + 15 + o];
            for i in 0..5 {
                want += params[2 + o * 5 + i] * x[i];
            }
            assert!((out[o] - want).abs() < 1e-12);
        }
    }

    #[test]
    fn activations_bounded() {
        // beyond |x| ~ 19 tanh rounds to exactly +-1 in f64
        let x: Vec<f64> = (-50..50).map(|i| i as f64 * 0.36).collect();
        let mut out = Vec::new();
        Layer::Tanh { len: x.len() }.forward(&[], &x, &[], &mut out);
        assert!(out.iter().all(|&v| v > -1.0 && v < 1.0));
        let far = [-1e3, 1e3];
        Layer::Tanh { len: 2 }.forward(&[], &far, &[], &mut out);
        assert!(out.iter().all(|&v| v.abs() <= 1.0));
        Layer::Relu { len: x.len() }.forward(&[], &x, &[], &mut out);
        assert!(out.iter().all(|&v| v >= 0.0));
    }

    proptest! {
        #[test]
        fn conv_shape_law(j in 1usize..200, k in 1usize..8, s in 1usize..5, p in 0usize..4) {
            let sp = spec(k, s, p);
            let padded = j + 2 * p;
            match sp.output_len(j) {
                Ok(len) => {
                    prop_assert!(padded >= k && (padded - k) % s == 0);
                    prop_assert_eq!(len, (padded - k) / s + 1);
                    let layer = Layer::Conv1d { spec: sp, in_len: j, out_len: len, offset: 0 };
                    let mut out = Vec::new();
                    layer.forward(&vec![0.5; sp.param_count()], &vec![1.0; j], &[], &mut out);
                    prop_assert_eq!(out.len(), len);
                }
                Err(_) => prop_assert!(padded < k || (padded - k) % s != 0),
            }
        }
    }
}
