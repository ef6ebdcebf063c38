//! LSTM layer with per-gate weight matrices of shape `(N + d) x N`.
//!
//! The gate input is the concatenation `[h_{t-1}, x_t]`: rows `0..N` of each
//! weight matrix multiply the previous hidden state, rows `N..N+d` the input.

use super::tensor::{glorot_init, sigmoid, Matrix, Vector};
use crate::error::{Error, Result};
use crate::rng;

#[derive(Clone, Debug, PartialEq)]
pub struct LstmParams {
    pub w_f: Matrix,
    pub w_i: Matrix,
    pub w_o: Matrix,
    pub w_c: Matrix,
    pub b_f: Vector,
    pub b_i: Vector,
    pub b_o: Vector,
    pub b_c: Vector,
    hidden_size: usize,
    input_size: usize,
}

impl LstmParams {
    pub fn zeros(hidden_size: usize, input_size: usize) -> Self {
        let rows = hidden_size + input_size;
        Self {
            w_f: Matrix::zeros(rows, hidden_size),
            w_i: Matrix::zeros(rows, hidden_size),
            w_o: Matrix::zeros(rows, hidden_size),
            w_c: Matrix::zeros(rows, hidden_size),
            b_f: Vector::zeros(hidden_size),
            b_i: Vector::zeros(hidden_size),
            b_o: Vector::zeros(hidden_size),
            b_c: Vector::zeros(hidden_size),
            hidden_size,
            input_size,
        }
    }

    /// Glorot-uniform weights, zero biases.
    pub fn glorot(hidden_size: usize, input_size: usize, seed: u64) -> Result<Self> {
        let rows = hidden_size + input_size;
        let mut p = Self::zeros(hidden_size, input_size);
        p.w_f = glorot_init(rows, hidden_size, rng::derive(seed, 0))?;
        p.w_i = glorot_init(rows, hidden_size, rng::derive(seed, 1))?;
        p.w_o = glorot_init(rows, hidden_size, rng::derive(seed, 2))?;
        p.w_c = glorot_init(rows, hidden_size, rng::derive(seed, 3))?;
        Ok(p)
    }

    /// Builds parameters from explicit tensors, checking that all four gates
    /// agree on shape.
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        w_f: Matrix,
        w_i: Matrix,
        w_o: Matrix,
        w_c: Matrix,
        b_f: Vector,
        b_i: Vector,
        b_o: Vector,
        b_c: Vector,
    ) -> Result<Self> {
        let (rows, hidden_size) = w_f.shape();
        if rows < hidden_size {
            return Err(Error::InvalidShape(format!(
                "lstm weights must have at least N rows, got {rows}x{hidden_size}"
            )));
        }
        for w in [&w_i, &w_o, &w_c] {
            if w.shape() != (rows, hidden_size) {
                return Err(Error::InvalidShape(format!(
                    "lstm gate weights disagree: {:?} vs {:?}",
                    w.shape(),
                    (rows, hidden_size)
                )));
            }
        }
        for b in [&b_f, &b_i, &b_o, &b_c] {
            if b.len() != hidden_size {
                return Err(Error::InvalidShape(format!(
                    "lstm bias of length {} for hidden size {hidden_size}",
                    b.len()
                )));
            }
        }
        Ok(Self {
            w_f,
            w_i,
            w_o,
            w_c,
            b_f,
            b_i,
            b_o,
            b_c,
            hidden_size,
            input_size: rows - hidden_size,
        })
    }

    pub fn hidden_size(&self) -> usize {
        self.hidden_size
    }

    pub fn input_size(&self) -> usize {
        self.input_size
    }
}

/// Activations of one cell step, kept for the backward pass.
#[derive(Clone, Debug, PartialEq)]
pub struct GateRecord {
    /// Hidden state fed to the gates (after recurrent dropout).
    pub h_prev: Vec<f64>,
    /// Cell input (after input dropout).
    pub x: Vec<f64>,
    pub c_prev: Vec<f64>,
    pub i: Vec<f64>,
    pub f: Vec<f64>,
    pub o: Vec<f64>,
    pub c_hat: Vec<f64>,
    pub c: Vec<f64>,
    pub tanh_c: Vec<f64>,
}

/// Inverted-dropout masks fixed for a whole sequence. Entries are either 0
/// or `1 / (1 - rate)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DropoutMasks {
    pub input: Vec<f64>,
    pub recurrent: Vec<f64>,
}

impl DropoutMasks {
    pub fn sample(
        rng: &mut rng::Rng,
        input_size: usize,
        hidden_size: usize,
        input_rate: f64,
        recurrent_rate: f64,
    ) -> Self {
        use rand::Rng as _;
        let mut draw = |len: usize, rate: f64| -> Vec<f64> {
            if rate <= 0.0 {
                return vec![1.0; len];
            }
            let keep = 1.0 / (1.0 - rate);
            (0..len)
                .map(|_| if rng.gen::<f64>() < rate { 0.0 } else { keep })
                .collect()
        };
        let input = draw(input_size, input_rate);
        let recurrent = draw(hidden_size, recurrent_rate);
        Self { input, recurrent }
    }
}

fn check_step_shapes(x: &[f64], h_prev: &[f64], c_prev: &[f64], p: &LstmParams) -> Result<()> {
    if x.len() != p.input_size || h_prev.len() != p.hidden_size || c_prev.len() != p.hidden_size {
        return Err(Error::InvalidShape(format!(
            "lstm step expects x:{} h:{} c:{}, got x:{} h:{} c:{}",
            p.input_size,
            p.hidden_size,
            p.hidden_size,
            x.len(),
            h_prev.len(),
            c_prev.len()
        )));
    }
    Ok(())
}

fn gate_preactivation(w: &Matrix, b: &Vector, h_prev: &[f64], x: &[f64]) -> Vec<f64> {
    let mut out = b.data().to_vec();
    w.accumulate_vec_mul(h_prev, 0, &mut out);
    w.accumulate_vec_mul(x, h_prev.len(), &mut out);
    out
}

fn step(x: Vec<f64>, h_prev: Vec<f64>, c_prev: Vec<f64>, p: &LstmParams) -> (Vec<f64>, GateRecord) {
    let mut c_hat = gate_preactivation(&p.w_c, &p.b_c, &h_prev, &x);
    c_hat.iter_mut().for_each(|v| *v = v.tanh());
    let mut i = gate_preactivation(&p.w_i, &p.b_i, &h_prev, &x);
    i.iter_mut().for_each(|v| *v = sigmoid(*v));
    let mut f = gate_preactivation(&p.w_f, &p.b_f, &h_prev, &x);
    f.iter_mut().for_each(|v| *v = sigmoid(*v));
    let mut o = gate_preactivation(&p.w_o, &p.b_o, &h_prev, &x);
    o.iter_mut().for_each(|v| *v = sigmoid(*v));

    let c: Vec<f64> = (0..p.hidden_size)
        .map(|k| i[k] * c_hat[k] + f[k] * c_prev[k])
        .collect();
    let tanh_c: Vec<f64> = c.iter().map(|v| v.tanh()).collect();
    let h: Vec<f64> = tanh_c.iter().zip(&o).map(|(t, o)| t * o).collect();
    let record = GateRecord {
        h_prev,
        x,
        c_prev,
        i,
        f,
        o,
        c_hat,
        c,
        tanh_c,
    };
    (h, record)
}

/// One LSTM cell step without dropout.
pub fn lstm_cell_forward(
    x: &Vector,
    h_prev: &Vector,
    c_prev: &Vector,
    p: &LstmParams,
) -> Result<(Vector, Vector, GateRecord)> {
    check_step_shapes(x.data(), h_prev.data(), c_prev.data(), p)?;
    let (h, record) = step(
        x.data().to_vec(),
        h_prev.data().to_vec(),
        c_prev.data().to_vec(),
        p,
    );
    Ok((h.into(), record.c.clone().into(), record))
}

/// Everything the backward pass needs from a sequence run.
#[derive(Clone, Debug, PartialEq)]
pub struct LstmCache {
    pub steps: Vec<GateRecord>,
    pub masks: Option<DropoutMasks>,
}

/// Runs the layer over `xs` from zero initial state.
pub fn lstm_sequence_forward(xs: &[Vector], p: &LstmParams) -> Result<(Vec<Vector>, LstmCache)> {
    lstm_sequence_forward_masked(xs, p, None)
}

pub fn lstm_sequence_forward_masked(
    xs: &[Vector],
    p: &LstmParams,
    masks: Option<&DropoutMasks>,
) -> Result<(Vec<Vector>, LstmCache)> {
    if xs.is_empty() {
        return Err(Error::EmptyInput("lstm input sequence"));
    }
    if let Some(m) = masks {
        if m.input.len() != p.input_size || m.recurrent.len() != p.hidden_size {
            return Err(Error::InvalidShape("dropout mask size mismatch".into()));
        }
    }
    let n = p.hidden_size;
    let mut h = vec![0.0; n];
    let mut c = vec![0.0; n];
    let mut hs = Vec::with_capacity(xs.len());
    let mut steps = Vec::with_capacity(xs.len());
    for x in xs {
        check_step_shapes(x.data(), &h, &c, p)?;
        let mut x = x.data().to_vec();
        let mut h_in = h;
        if let Some(m) = masks {
            x.iter_mut().zip(&m.input).for_each(|(v, k)| *v *= k);
            h_in.iter_mut().zip(&m.recurrent).for_each(|(v, k)| *v *= k);
        }
        let (h_next, record) = step(x, h_in, c, p);
        c = record.c.clone();
        h = h_next;
        hs.push(Vector::from(h.clone()));
        steps.push(record);
    }
    Ok((
        hs,
        LstmCache {
            steps,
            masks: masks.cloned(),
        },
    ))
}

/// Backpropagation through time. `dhs[t]` is the loss gradient reaching
/// `h_t` from layers above. Parameter gradients are accumulated into
/// `grads`; the returned vectors are the gradients w.r.t. each (undropped)
/// input `x_t`.
pub fn lstm_sequence_backward(
    cache: &LstmCache,
    dhs: &[Vec<f64>],
    p: &LstmParams,
    grads: &mut LstmParams,
) -> Result<Vec<Vec<f64>>> {
    if dhs.len() != cache.steps.len() {
        return Err(Error::InvalidState(format!(
            "{} upstream gradients for {} cached steps",
            dhs.len(),
            cache.steps.len()
        )));
    }
    let n = p.hidden_size;
    let d = p.input_size;
    let mut dh_next = vec![0.0; n];
    let mut dc_next = vec![0.0; n];
    let mut dxs = vec![Vec::new(); cache.steps.len()];

    let mut da_i = vec![0.0; n];
    let mut da_f = vec![0.0; n];
    let mut da_o = vec![0.0; n];
    let mut da_c = vec![0.0; n];

    for t in (0..cache.steps.len()).rev() {
        let s = &cache.steps[t];
        for k in 0..n {
            let dh = dhs[t][k] + dh_next[k];
            let dc = dc_next[k] + dh * s.o[k] * (1.0 - s.tanh_c[k] * s.tanh_c[k]);
            let d_o = dh * s.tanh_c[k];
            let d_i = dc * s.c_hat[k];
            let d_c_hat = dc * s.i[k];
            let d_f = dc * s.c_prev[k];
            dc_next[k] = dc * s.f[k];

            da_i[k] = d_i * s.i[k] * (1.0 - s.i[k]);
            da_f[k] = d_f * s.f[k] * (1.0 - s.f[k]);
            da_o[k] = d_o * s.o[k] * (1.0 - s.o[k]);
            da_c[k] = d_c_hat * (1.0 - s.c_hat[k] * s.c_hat[k]);
        }

        let mut dz = vec![0.0; n + d];
        for (w, gw, gb, da) in [
            (&p.w_i, &mut grads.w_i, &mut grads.b_i, &da_i),
            (&p.w_f, &mut grads.w_f, &mut grads.b_f, &da_f),
            (&p.w_o, &mut grads.w_o, &mut grads.b_o, &da_o),
            (&p.w_c, &mut grads.w_c, &mut grads.b_c, &da_c),
        ] {
            gw.accumulate_outer(&s.h_prev, 0, da);
            gw.accumulate_outer(&s.x, n, da);
            gb.data_mut().iter_mut().zip(da).for_each(|(g, v)| *g += v);
            w.accumulate_transposed_mul(da, 0, &mut dz[..n]);
            w.accumulate_transposed_mul(da, n, &mut dz[n..]);
        }

        let (dh_prev, dx) = dz.split_at(n);
        let mut dh_prev = dh_prev.to_vec();
        let mut dx = dx.to_vec();
        if let Some(m) = &cache.masks {
            dh_prev.iter_mut().zip(&m.recurrent).for_each(|(v, k)| *v *= k);
            dx.iter_mut().zip(&m.input).for_each(|(v, k)| *v *= k);
        }
        dh_next = dh_prev;
        dxs[t] = dx;
    }
    Ok(dxs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ones(n: usize, d: usize) -> LstmParams {
        let rows = n + d;
        let mut p = LstmParams::zeros(n, d);
        for w in [&mut p.w_f, &mut p.w_i, &mut p.w_o, &mut p.w_c] {
            *w = Matrix::filled(rows, n, 1.0);
        }
        p
    }

    #[test]
    fn zero_cell_gives_half_gates_and_zero_state() {
        let p = LstmParams::zeros(3, 2);
        let (h, c, g) = lstm_cell_forward(
            &Vector::from(vec![0.3, -1.2]),
            &Vector::from(vec![0.5, 0.1, -0.4]),
            &Vector::zeros(3),
            &p,
        )
        .unwrap();
        assert!(g.i.iter().chain(&g.f).chain(&g.o).all(|&v| v == 0.5));
        assert!(g.c_hat.iter().all(|&v| v == 0.0));
        assert!(c.data().iter().all(|&v| v == 0.0));
        assert!(h.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn scalar_cell_matches_hand_calculation() {
        let p = ones(1, 1);
        let (h, c, g) = lstm_cell_forward(
            &Vector::from(vec![1.0]),
            &Vector::zeros(1),
            &Vector::zeros(1),
            &p,
        )
        .unwrap();
        // independent scalar oracle
        let s1 = 1.0 / (1.0 + (-1.0f64).exp());
        let c_hat = 1.0f64.tanh();
        let c_expected = s1 * c_hat;
        let h_expected = c_expected.tanh() * s1;
        for gate in [&g.i, &g.f, &g.o] {
            assert!((gate[0] - s1).abs() < 1e-15);
        }
        assert!((g.c_hat[0] - c_hat).abs() < 1e-15);
        assert!((c[0] - c_expected).abs() < 1e-15);
        assert!((h[0] - h_expected).abs() < 1e-15);
    }

    #[test]
    fn cell_rejects_mismatched_input() {
        let p = LstmParams::zeros(3, 2);
        let err = lstm_cell_forward(
            &Vector::zeros(4),
            &Vector::zeros(3),
            &Vector::zeros(3),
            &p,
        );
        assert!(matches!(err, Err(Error::InvalidShape(_))));
    }

    #[test]
    fn empty_sequence_is_rejected() {
        let p = LstmParams::zeros(2, 2);
        assert!(matches!(
            lstm_sequence_forward(&[], &p),
            Err(Error::EmptyInput(_))
        ));
    }

    #[test]
    fn length_one_sequence_equals_single_cell() {
        let p = LstmParams::glorot(4, 3, 11).unwrap();
        let x = Vector::from(vec![0.2, -0.7, 1.1]);
        let (hs, _) = lstm_sequence_forward(std::slice::from_ref(&x), &p).unwrap();
        let (h, _, _) = lstm_cell_forward(&x, &Vector::zeros(4), &Vector::zeros(4), &p).unwrap();
        assert_eq!(hs, vec![h]);
    }

    #[test]
    fn zero_params_give_zero_outputs() {
        let p = LstmParams::zeros(3, 2);
        let xs: Vec<Vector> = (0..5).map(|t| Vector::from(vec![t as f64, 1.0])).collect();
        let (hs, _) = lstm_sequence_forward(&xs, &p).unwrap();
        assert!(hs.iter().all(|h| h.data().iter().all(|&v| v == 0.0)));
    }

    #[test]
    fn from_parts_checks_shapes() {
        let m = Matrix::zeros(5, 3);
        let bad = Matrix::zeros(5, 2);
        let b = Vector::zeros(3);
        assert!(LstmParams::from_parts(
            m.clone(),
            bad,
            m.clone(),
            m.clone(),
            b.clone(),
            b.clone(),
            b.clone(),
            b.clone()
        )
        .is_err());
        let ok = LstmParams::from_parts(
            m.clone(),
            m.clone(),
            m.clone(),
            m,
            b.clone(),
            b.clone(),
            b.clone(),
            b,
        )
        .unwrap();
        assert_eq!((ok.hidden_size(), ok.input_size()), (3, 2));
    }
}
