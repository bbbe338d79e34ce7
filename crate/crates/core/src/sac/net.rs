//! Dense ReLU networks with explicit reverse-mode gradients.
//!
//! All parameters of a network live in one flat buffer. Layer `l` stores its
//! weight matrix (`in x out`, row-major) followed by its bias. Batches are
//! row-major `batch x dim` slices.

use std::fmt::Debug;

use num_traits::Float;
use rand::Rng;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::parallel::Execution;

/// Rows per parallel GEMM chunk.
const ROW_CHUNK: usize = 32;

/// Floating-point type usable for network parameters.
pub trait Real:
    Float + Default + Debug + Send + Sync + Serialize + DeserializeOwned + std::iter::Sum + 'static
{
    /// `C = alpha * A * B + beta * C` with explicit strides.
    #[allow(clippy::too_many_arguments)]
    fn gemm(
        m: usize,
        k: usize,
        n: usize,
        a: &[Self],
        rsa: usize,
        csa: usize,
        b: &[Self],
        rsb: usize,
        csb: usize,
        beta: Self,
        c: &mut [Self],
        rsc: usize,
    );

    fn lit(x: f64) -> Self;
}

#[inline]
fn span(rows: usize, cols: usize, rs: usize, cs: usize) -> usize {
    if rows == 0 || cols == 0 {
        0
    } else {
        (rows - 1) * rs + (cols - 1) * cs + 1
    }
}

macro_rules! impl_real {
    ($t:ty, $f:path) => {
        impl Real for $t {
            fn gemm(
                m: usize,
                k: usize,
                n: usize,
                a: &[Self],
                rsa: usize,
                csa: usize,
                b: &[Self],
                rsb: usize,
                csb: usize,
                beta: Self,
                c: &mut [Self],
                rsc: usize,
            ) {
                assert!(a.len() >= span(m, k, rsa, csa), "gemm: A too short");
                assert!(b.len() >= span(k, n, rsb, csb), "gemm: B too short");
                assert!(c.len() >= span(m, n, rsc, 1), "gemm: C too short");
                if m == 0 || n == 0 {
                    return;
                }
                // SAFETY: the asserts above bound every index the kernel
                // touches: A[(m-1)*rsa + (k-1)*csa], B[(k-1)*rsb + (n-1)*csb]
                // and C[(m-1)*rsc + n-1].
                unsafe {
                    $f(
                        m,
                        k,
                        n,
                        1.0,
                        a.as_ptr(),
                        rsa as isize,
                        csa as isize,
                        b.as_ptr(),
                        rsb as isize,
                        csb as isize,
                        beta,
                        c.as_mut_ptr(),
                        rsc as isize,
                        1,
                    )
                }
            }

            #[inline]
            fn lit(x: f64) -> Self {
                x as $t
            }
        }
    };
}

impl_real!(f32, matrixmultiply::sgemm);
impl_real!(f64, matrixmultiply::dgemm);

/// `Y[batch x n] = X[batch x k] * W[k x n] + beta * Y`, split by rows when
/// the batch is large enough to be worth it.
fn gemm_rows<T: Real>(exec: Execution, batch: usize, k: usize, n: usize, x: &[T], w: &[T], beta: T, y: &mut [T]) {
    if exec.is_parallel() && batch >= 2 * ROW_CHUNK {
        exec.for_each_chunk_mut(&mut y[..batch * n], ROW_CHUNK * n, |ci, yc| {
            let r0 = ci * ROW_CHUNK;
            let rows = yc.len() / n;
            T::gemm(rows, k, n, &x[r0 * k..(r0 + rows) * k], k, 1, w, n, 1, beta, yc, n);
        });
    } else {
        T::gemm(batch, k, n, x, k, 1, w, n, 1, beta, y, n);
    }
}

/// Activations recorded by [`DenseNet::forward_tape`].
#[derive(Clone, Debug, Default)]
pub struct Tape<T> {
    batch: usize,
    /// `inputs[l]` is the input of layer `l`.
    inputs: Vec<Vec<T>>,
}

impl<T> Tape<T> {
    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn batch(&self) -> usize {
        self.batch
    }
}

/// Multilayer perceptron: affine + ReLU hidden layers, linear output.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DenseNet<T> {
    dims: Vec<usize>,
    params: Vec<T>,
    #[serde(skip)]
    exec: Execution,
}

impl<T: Real> DenseNet<T> {
    /// All-zero network.
    pub fn zeros(dims: &[usize]) -> Result<Self> {
        if dims.len() < 2 || dims.contains(&0) {
            return Err(Error::Usage(format!("bad layer dims {dims:?}")));
        }
        let n = dims.windows(2).map(|d| d[0] * d[1] + d[1]).sum();
        Ok(Self {
            dims: dims.to_vec(),
            params: vec![T::zero(); n],
            exec: Execution::default(),
        })
    }

    /// Uniform fan-in initialisation `U(-1/sqrt(in), 1/sqrt(in))` for weights
    /// and biases.
    pub fn new<R: Rng + ?Sized>(dims: &[usize], rng: &mut R) -> Result<Self> {
        let mut net = Self::zeros(dims)?;
        for l in 0..net.n_layers() {
            let bound = 1.0 / (net.dims[l] as f64).sqrt();
            let (w, b) = net.layer_range(l);
            for p in &mut net.params[w.start..b.end] {
                *p = T::lit(rng.random_range(-bound..bound));
            }
        }
        Ok(net)
    }

    pub fn with_execution(mut self, exec: Execution) -> Self {
        self.exec = exec;
        self
    }

    pub fn set_execution(&mut self, exec: Execution) {
        self.exec = exec;
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn input_dim(&self) -> usize {
        self.dims[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.dims.last().unwrap()
    }

    pub fn n_layers(&self) -> usize {
        self.dims.len() - 1
    }

    pub fn n_params(&self) -> usize {
        self.params.len()
    }

    pub fn params(&self) -> &[T] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [T] {
        &mut self.params
    }

    /// Index ranges of layer `l`'s weights and bias in the flat buffer.
    pub fn layer_range(&self, l: usize) -> (std::ops::Range<usize>, std::ops::Range<usize>) {
        let start: usize = self.dims[..l + 1]
            .windows(2)
            .map(|d| d[0] * d[1] + d[1])
            .sum();
        let (i, o) = (self.dims[l], self.dims[l + 1]);
        (start..start + i * o, start + i * o..start + i * o + o)
    }

    fn check_input(&self, x: &[T], batch: usize) -> Result<()> {
        if batch == 0 || x.len() != batch * self.input_dim() {
            return Err(Error::Usage(format!(
                "input of length {} does not match batch {batch} x dim {}",
                x.len(),
                self.input_dim()
            )));
        }
        Ok(())
    }

    fn run(&self, x: &[T], batch: usize, mut tape: Option<&mut Vec<Vec<T>>>) -> Vec<T> {
        let mut cur = x.to_vec();
        let last = self.n_layers() - 1;
        for l in 0..self.n_layers() {
            let (i, o) = (self.dims[l], self.dims[l + 1]);
            let (wr, br) = self.layer_range(l);
            let bias = &self.params[br];
            let mut out: Vec<T> = Vec::with_capacity(batch * o);
            for _ in 0..batch {
                out.extend_from_slice(bias);
            }
            gemm_rows(self.exec, batch, i, o, &cur, &self.params[wr], T::one(), &mut out);
            if l < last {
                for v in &mut out {
                    if *v < T::zero() {
                        *v = T::zero();
                    }
                }
            }
            let input = std::mem::replace(&mut cur, out);
            if let Some(t) = tape.as_deref_mut() {
                t.push(input);
            }
        }
        cur
    }

    /// Inference on a `batch x input_dim` slice.
    pub fn forward(&self, x: &[T], batch: usize) -> Result<Vec<T>> {
        self.check_input(x, batch)?;
        Ok(self.run(x, batch, None))
    }

    /// Forward pass that keeps the activations needed by [`DenseNet::backward`].
    pub fn forward_tape(&self, x: &[T], batch: usize) -> Result<(Vec<T>, Tape<T>)> {
        self.check_input(x, batch)?;
        let mut inputs = Vec::with_capacity(self.n_layers());
        let y = self.run(x, batch, Some(&mut inputs));
        Ok((y, Tape { batch, inputs }))
    }

    /// Back-propagates `dy` (gradient of the loss w.r.t. the output).
    ///
    /// Parameter gradients are accumulated into `param_grads` when given.
    /// Returns the gradient w.r.t. the input when `want_input` is set.
    pub fn backward(
        &self,
        tape: &Tape<T>,
        dy: &[T],
        mut param_grads: Option<&mut [T]>,
        want_input: bool,
    ) -> Result<Option<Vec<T>>> {
        if tape.inputs.len() != self.n_layers() {
            return Err(Error::Usage("backward called without a matching forward pass".into()));
        }
        let batch = tape.batch;
        if dy.len() != batch * self.output_dim() {
            return Err(Error::Usage(format!(
                "upstream gradient of length {} does not match batch {batch} x dim {}",
                dy.len(),
                self.output_dim()
            )));
        }
        if let Some(g) = param_grads.as_deref() {
            if g.len() != self.params.len() {
                return Err(Error::Usage("gradient buffer has the wrong size".into()));
            }
        }
        let mut delta = dy.to_vec();
        for l in (0..self.n_layers()).rev() {
            let (i, o) = (self.dims[l], self.dims[l + 1]);
            let (wr, br) = self.layer_range(l);
            let x = &tape.inputs[l];
            if let Some(g) = param_grads.as_deref_mut() {
                // dW += X^T dY
                T::gemm(i, batch, o, x, 1, i, &delta, o, 1, T::one(), &mut g[wr.clone()], o);
                let gb = &mut g[br];
                for row in delta.chunks_exact(o) {
                    for (b, d) in gb.iter_mut().zip(row) {
                        *b = *b + *d;
                    }
                }
            }
            if l == 0 && !want_input {
                return Ok(None);
            }
            // dX = dY W^T
            let mut dx = vec![T::zero(); batch * i];
            T::gemm(batch, o, i, &delta, o, 1, &self.params[wr], 1, o, T::zero(), &mut dx, i);
            if l > 0 {
                // x is the ReLU output of the previous layer.
                for (d, a) in dx.iter_mut().zip(x) {
                    if *a <= T::zero() {
                        *d = T::zero();
                    }
                }
            }
            delta = dx;
        }
        Ok(Some(delta))
    }

    /// `self <- tau * source + (1 - tau) * self`.
    pub fn soft_update_from(&mut self, source: &DenseNet<T>, tau: T) -> Result<()> {
        if self.dims != source.dims {
            return Err(Error::Usage("soft update between differently shaped nets".into()));
        }
        if tau == T::one() {
            self.params.copy_from_slice(&source.params);
            return Ok(());
        }
        let keep = T::one() - tau;
        for (t, s) in self.params.iter_mut().zip(&source.params) {
            *t = tau * *s + keep * *t;
        }
        Ok(())
    }
}

/// Adaptive-moment optimizer over a flat parameter buffer.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Adam<T> {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    m: Vec<T>,
    v: Vec<T>,
    t: u64,
}

impl<T: Real> Adam<T> {
    pub fn new(n: usize, lr: f64) -> Self {
        Self {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            m: vec![T::zero(); n],
            v: vec![T::zero(); n],
            t: 0,
        }
    }

    pub fn steps(&self) -> u64 {
        self.t
    }

    pub fn step(&mut self, params: &mut [T], grads: &[T]) {
        assert_eq!(params.len(), self.m.len());
        assert_eq!(grads.len(), self.m.len());
        self.t += 1;
        let b1 = T::lit(self.beta1);
        let b2 = T::lit(self.beta2);
        let one = T::one();
        let c1 = 1.0 - self.beta1.powi(self.t as i32);
        let c2 = 1.0 - self.beta2.powi(self.t as i32);
        let step = T::lit(self.lr * c2.sqrt() / c1);
        let eps = T::lit(self.eps * c2.sqrt());
        for ((p, g), (m, v)) in params
            .iter_mut()
            .zip(grads)
            .zip(self.m.iter_mut().zip(self.v.iter_mut()))
        {
            *m = b1 * *m + (one - b1) * *g;
            *v = b2 * *v + (one - b2) * *g * *g;
            *p = *p - step * *m / (v.sqrt() + eps);
        }
    }
}
