/// Product space of per-link queue lengths `{0..=capacity}^n`, indexed with
/// link 0 as the most significant digit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueueSpace {
    pub n_links: usize,
    pub capacity: u32,
    strides: Vec<usize>,
    size: usize,
}

pub const MAX_LINKS: usize = 8;

impl QueueSpace {
    pub fn new(n_links: usize, capacity: u32) -> Self {
        assert!(n_links <= MAX_LINKS, "at most {MAX_LINKS} links per queue space");
        let base = capacity as usize + 1;
        let mut strides = vec![0; n_links];
        let mut s = 1usize;
        for l in (0..n_links).rev() {
            strides[l] = s;
            s = s.checked_mul(base).expect("queue space size overflows usize");
        }
        Self { n_links, capacity, strides, size: s }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn stride(&self, l: usize) -> usize {
        self.strides[l]
    }

    pub fn encode(&self, q: &[u32]) -> usize {
        debug_assert_eq!(q.len(), self.n_links);
        q.iter().zip(&self.strides).map(|(&x, &s)| x as usize * s).sum()
    }

    pub fn decode_into(&self, mut idx: usize, out: &mut [u32]) {
        for (o, &s) in out.iter_mut().zip(&self.strides) {
            *o = (idx / s) as u32;
            idx %= s;
        }
    }

    pub fn decode(&self, idx: usize) -> Vec<u32> {
        let mut v = vec![0; self.n_links];
        self.decode_into(idx, &mut v);
        v
    }

    /// Index of `(q - d)^+`.
    #[inline]
    pub fn drained(&self, q: &[u32], d: &[u32]) -> usize {
        let mut idx = 0;
        for l in 0..self.n_links {
            idx += q[l].saturating_sub(d[l]) as usize * self.strides[l];
        }
        idx
    }

    /// `out[x] = E_A[v(min(cap, x + A))]` for independent per-link arrival
    /// laws `pmfs[l]` over `0..=capacity` packets.
    pub fn expect_arrivals(&self, v: &[f64], pmfs: &[Vec<f64>], out: &mut Vec<f64>, scratch: &mut Vec<f64>) {
        out.clear();
        out.extend_from_slice(v);
        scratch.resize(self.size, 0.0);
        let cap = self.capacity as usize;
        for l in 0..self.n_links {
            let stride = self.strides[l];
            let pmf = &pmfs[l];
            for idx in 0..self.size {
                let x = (idx / stride) % (cap + 1);
                let base = idx - x * stride;
                let mut acc = 0.0;
                for (k, &p) in pmf.iter().enumerate() {
                    if p == 0.0 {
                        continue;
                    }
                    let y = (x + k).min(cap);
                    acc += p * out[base + y * stride];
                }
                scratch[idx] = acc;
            }
            std::mem::swap(out, scratch);
        }
    }
}
