use rand::Rng;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::rng::stream_rng;
use crate::scalar::{fmt17, Scalar};

/// Parameters stored flat: `w_in (H) | W_rec (H x H, row-major) | b_h (H) | w_out (H) | b_out`.
#[derive(Debug, Clone, PartialEq)]
pub struct RnnModel<T> {
    hidden: usize,
    theta: Vec<T>,
}

/// Gradient with the same layout as [`RnnModel`]'s parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients<T> {
    pub hidden: usize,
    pub theta: Vec<T>,
}

/// Result of a forward pass, with the activations BPTT needs.
#[derive(Debug, Clone)]
pub struct Forward<T> {
    pub probability: T,
    pub logit: T,
    /// Pre-activations, `L x H` row-major.
    pub pre: Vec<T>,
    /// Hidden states `h_1 .. h_L`, `L x H` row-major.
    pub hidden: Vec<T>,
}

#[inline]
fn sigmoid<T: Scalar>(z: T) -> T {
    if z >= T::zero() {
        T::one() / (T::one() + (-z).exp())
    } else {
        let e = z.exp();
        e / (T::one() + e)
    }
}

/// Binary cross-entropy with `p` clamped away from 0 and 1.
pub fn bce_loss<T: Scalar>(p: T, y: T) -> T {
    let eps = T::of(1e-12).max(T::epsilon());
    let p = p.max(eps).min(T::one() - eps);
    -(y * p.ln() + (T::one() - y) * (T::one() - p).ln())
}

impl<T: Scalar> RnnModel<T> {
    pub fn param_count(hidden: usize) -> usize {
        hidden * hidden + 3 * hidden + 1
    }

    pub fn zeros(hidden: usize) -> Result<Self> {
        if hidden == 0 {
            return Err(Error::Parameter("hidden size must be at least 1".into()));
        }
        Ok(Self { hidden, theta: vec![T::zero(); Self::param_count(hidden)] })
    }

    /// Weights uniform in `[-1/sqrt(H), 1/sqrt(H)]`, biases zero.
    pub fn init_uniform(hidden: usize, seed: u64) -> Result<Self> {
        let mut m = Self::zeros(hidden)?;
        let bound = 1.0 / (hidden as f64).sqrt();
        let mut rng = stream_rng(seed, 0);
        let mut draw = || T::of(bound * (2.0 * rng.random::<f64>() - 1.0));
        for w in m.w_in_mut() {
            *w = draw();
        }
        for w in m.w_rec_mut() {
            *w = draw();
        }
        for w in m.w_out_mut() {
            *w = draw();
        }
        Ok(m)
    }

    pub fn from_flat(hidden: usize, theta: Vec<T>) -> Result<Self> {
        if hidden == 0 || theta.len() != Self::param_count(hidden) {
            return Err(Error::Parameter(format!(
                "expected {} parameters for hidden size {hidden}, got {}",
                Self::param_count(hidden),
                theta.len()
            )));
        }
        if theta.iter().any(|v| !v.is_finite()) {
            return Err(Error::Parameter("model parameters must be finite".into()));
        }
        Ok(Self { hidden, theta })
    }

    pub fn hidden(&self) -> usize {
        self.hidden
    }

    pub fn params(&self) -> &[T] {
        &self.theta
    }

    pub fn params_mut(&mut self) -> &mut [T] {
        &mut self.theta
    }

    fn ranges(&self) -> [std::ops::Range<usize>; 5] {
        let h = self.hidden;
        [0..h, h..h + h * h, h + h * h..2 * h + h * h, 2 * h + h * h..3 * h + h * h, 3 * h + h * h..3 * h + h * h + 1]
    }

    pub fn w_in(&self) -> &[T] {
        &self.theta[self.ranges()[0].clone()]
    }
    pub fn w_rec(&self) -> &[T] {
        &self.theta[self.ranges()[1].clone()]
    }
    pub fn b_h(&self) -> &[T] {
        &self.theta[self.ranges()[2].clone()]
    }
    pub fn w_out(&self) -> &[T] {
        &self.theta[self.ranges()[3].clone()]
    }
    pub fn b_out(&self) -> T {
        self.theta[self.theta.len() - 1]
    }

    pub fn w_in_mut(&mut self) -> &mut [T] {
        let r = self.ranges()[0].clone();
        &mut self.theta[r]
    }
    pub fn w_rec_mut(&mut self) -> &mut [T] {
        let r = self.ranges()[1].clone();
        &mut self.theta[r]
    }
    pub fn b_h_mut(&mut self) -> &mut [T] {
        let r = self.ranges()[2].clone();
        &mut self.theta[r]
    }
    pub fn w_out_mut(&mut self) -> &mut [T] {
        let r = self.ranges()[3].clone();
        &mut self.theta[r]
    }
    pub fn b_out_mut(&mut self) -> &mut T {
        let last = self.theta.len() - 1;
        &mut self.theta[last]
    }

    pub fn forward(&self, x: &[T]) -> Result<Forward<T>> {
        let h = self.hidden;
        let (w_in, w_rec, b_h, w_out) = (self.w_in(), self.w_rec(), self.b_h(), self.w_out());
        let mut pre = vec![T::zero(); x.len() * h];
        let mut hid = vec![T::zero(); x.len() * h];
        let zero_state = vec![T::zero(); h];
        for (t, &xt) in x.iter().enumerate() {
            if !xt.is_finite() {
                return Err(Error::Numeric { step: t, what: "input" });
            }
            let prev: &[T] = if t == 0 { &zero_state } else { &hid[(t - 1) * h..t * h] };
            let mut row = vec![T::zero(); h];
            for i in 0..h {
                let rec = &w_rec[i * h..(i + 1) * h];
                let mut a = w_in[i] * xt + b_h[i];
                for (w, p) in rec.iter().zip(prev) {
                    a = a + *w * *p;
                }
                if !a.is_finite() {
                    return Err(Error::Numeric { step: t, what: "hidden activation" });
                }
                row[i] = a;
            }
            for i in 0..h {
                pre[t * h + i] = row[i];
                hid[t * h + i] = row[i].max(T::zero());
            }
        }
        let last: &[T] = if x.is_empty() { &zero_state } else { &hid[(x.len() - 1) * h..] };
        let logit = w_out.iter().zip(last).fold(self.b_out(), |acc, (w, v)| acc + *w * *v);
        if !logit.is_finite() {
            return Err(Error::Numeric { step: x.len(), what: "output logit" });
        }
        Ok(Forward { probability: sigmoid(logit), logit, pre, hidden: hid })
    }

    pub fn predict(&self, x: &[T]) -> Result<T> {
        Ok(self.forward(x)?.probability)
    }

    /// JSON with a shape header and row-major weight arrays at 17 significant digits.
    pub fn to_json(&self) -> String {
        let list = |v: &[T]| v.iter().map(|x| fmt17(*x)).collect::<Vec<_>>().join(", ");
        let h = self.hidden;
        format!(
            "{{\n  \"format\": \"nlsurr-rnn\",\n  \"hidden\": {h},\n  \"input\": 1,\n  \"shapes\": {{\"w_in\": [{h}, 1], \"w_rec\": [{h}, {h}], \"b_h\": [{h}], \"w_out\": [{h}], \"b_out\": []}},\n  \"w_in\": [{}],\n  \"w_rec\": [{}],\n  \"b_h\": [{}],\n  \"w_out\": [{}],\n  \"b_out\": {}\n}}\n",
            list(self.w_in()),
            list(self.w_rec()),
            list(self.b_h()),
            list(self.w_out()),
            fmt17(self.b_out())
        )
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(text)?;
        let bad = |what: &str| Error::Parse { line: 0, msg: format!("model JSON: {what}") };
        let hidden = v.get("hidden").and_then(Value::as_u64).ok_or_else(|| bad("missing `hidden`"))? as usize;
        let array = |key: &str, len: usize| -> Result<Vec<T>> {
            let a = v.get(key).and_then(Value::as_array).ok_or_else(|| bad(&format!("missing `{key}`")))?;
            if a.len() != len {
                return Err(bad(&format!("`{key}` has {} entries, expected {len}", a.len())));
            }
            a.iter().map(|x| x.as_f64().map(T::of).ok_or_else(|| bad(&format!("non-numeric entry in `{key}`")))).collect()
        };
        let mut theta = array("w_in", hidden)?;
        theta.extend(array("w_rec", hidden * hidden)?);
        theta.extend(array("b_h", hidden)?);
        theta.extend(array("w_out", hidden)?);
        theta.push(v.get("b_out").and_then(Value::as_f64).map(T::of).ok_or_else(|| bad("missing `b_out`"))?);
        Self::from_flat(hidden, theta)
    }
}

impl<T: Scalar> Gradients<T> {
    pub fn zeros(hidden: usize) -> Self {
        Self { hidden, theta: vec![T::zero(); RnnModel::<T>::param_count(hidden)] }
    }

    pub fn norm(&self) -> T {
        self.theta.iter().map(|g| *g * *g).sum::<T>().sqrt()
    }
}

/// Mean-over-batch BCE gradient by backpropagation through time, plus the mean loss.
///
/// The ReLU derivative at exactly zero is taken as zero.
pub fn bptt_gradients<T: Scalar>(model: &RnnModel<T>, batch: &[(&[T], T)]) -> Result<(Gradients<T>, T)> {
    if batch.is_empty() {
        return Err(Error::Length("gradient needs a nonempty batch".into()));
    }
    let h = model.hidden();
    let [r_in, r_rec, r_bh, r_out, _] = model.ranges();
    let w_rec = model.w_rec();
    let w_out = model.w_out();
    let mut grad = Gradients::<T>::zeros(h);
    let mut loss = T::zero();
    let mut dh = vec![T::zero(); h];
    let mut da = vec![T::zero(); h];
    for &(x, y) in batch {
        let fw = model.forward(x)?;
        loss = loss + bce_loss(fw.probability, y);
        let dz = fw.probability - y;
        let g = &mut grad.theta;
        let n = x.len();
        if n == 0 {
            *g.last_mut().unwrap() = *g.last().unwrap() + dz;
            continue;
        }
        let last = &fw.hidden[(n - 1) * h..];
        for i in 0..h {
            g[r_out.start + i] = g[r_out.start + i] + dz * last[i];
            dh[i] = dz * w_out[i];
        }
        *g.last_mut().unwrap() = *g.last().unwrap() + dz;
        for t in (0..n).rev() {
            for i in 0..h {
                da[i] = if fw.pre[t * h + i] > T::zero() { dh[i] } else { T::zero() };
            }
            for i in 0..h {
                g[r_in.start + i] = g[r_in.start + i] + da[i] * x[t];
                g[r_bh.start + i] = g[r_bh.start + i] + da[i];
            }
            if t > 0 {
                let prev = &fw.hidden[(t - 1) * h..t * h];
                for (i, &d) in da.iter().enumerate() {
                    if d == T::zero() {
                        continue;
                    }
                    let row = r_rec.start + i * h;
                    for j in 0..h {
                        g[row + j] = g[row + j] + d * prev[j];
                    }
                }
                for j in 0..h {
                    let mut s = T::zero();
                    for i in 0..h {
                        s = s + w_rec[i * h + j] * da[i];
                    }
                    dh[j] = s;
                }
            }
        }
    }
    let scale = T::one() / T::of_usize(batch.len());
    for v in grad.theta.iter_mut() {
        *v = *v * scale;
        if !v.is_finite() {
            return Err(Error::Numeric { step: 0, what: "gradient" });
        }
    }
    Ok((grad, loss * scale))
}
