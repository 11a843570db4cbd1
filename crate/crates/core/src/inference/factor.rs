//! Dense discrete factors with a shared log scale.

/// A non-negative table over discrete variables (network indices). Values
/// use mixed radix with the last variable fastest; the represented function
/// is `values * exp(log_scale)`.
#[derive(Debug, Clone)]
pub(crate) struct Factor {
    pub vars: Vec<usize>,
    pub cards: Vec<usize>,
    pub values: Vec<f64>,
    pub log_scale: f64,
}

impl Factor {
    pub fn new(vars: Vec<usize>, cards: Vec<usize>, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), cards.iter().product::<usize>());
        Factor { vars, cards, values, log_scale: 0.0 }
    }

    pub fn unit() -> Self {
        Factor::new(Vec::new(), Vec::new(), vec![1.0])
    }

    fn strides(&self) -> Vec<usize> {
        let mut strides = vec![0; self.vars.len()];
        let mut s = 1;
        for k in (0..self.vars.len()).rev() {
            strides[k] = s;
            s *= self.cards[k];
        }
        strides
    }

    pub fn contains(&self, v: usize) -> bool {
        self.vars.contains(&v)
    }

    /// Pointwise product over the union of scopes (sorted by variable).
    pub fn product(&self, other: &Factor) -> Factor {
        let mut vars: Vec<usize> = self.vars.iter().chain(&other.vars).copied().collect();
        vars.sort_unstable();
        vars.dedup();
        let cards: Vec<usize> = vars
            .iter()
            .map(|v| {
                self.vars
                    .iter()
                    .position(|x| x == v)
                    .map(|k| self.cards[k])
                    .unwrap_or_else(|| other.cards[other.vars.iter().position(|x| x == v).unwrap()])
            })
            .collect();
        let stride_in = |f: &Factor| -> Vec<usize> {
            let s = f.strides();
            vars.iter().map(|v| f.vars.iter().position(|x| x == v).map_or(0, |k| s[k])).collect()
        };
        let sa = stride_in(self);
        let sb = stride_in(other);
        let total: usize = cards.iter().product();
        let mut values = Vec::with_capacity(total);
        let mut digits = vec![0usize; vars.len()];
        let (mut ia, mut ib) = (0usize, 0usize);
        for _ in 0..total {
            values.push(self.values[ia] * other.values[ib]);
            for k in (0..vars.len()).rev() {
                digits[k] += 1;
                ia += sa[k];
                ib += sb[k];
                if digits[k] < cards[k] {
                    break;
                }
                ia -= sa[k] * cards[k];
                ib -= sb[k] * cards[k];
                digits[k] = 0;
            }
        }
        let mut f = Factor { vars, cards, values, log_scale: self.log_scale + other.log_scale };
        f.rescale();
        f
    }

    /// Sums `v` out of the scope.
    pub fn sum_out(&self, v: usize) -> Factor {
        let Some(k) = self.vars.iter().position(|&x| x == v) else { return self.clone() };
        let strides = self.strides();
        let card = self.cards[k];
        let stride = strides[k];
        let mut vars = self.vars.clone();
        let mut cards = self.cards.clone();
        vars.remove(k);
        cards.remove(k);
        let total: usize = cards.iter().product();
        let mut values = vec![0.0; total];
        // Index in the source = outer * (card * stride) + s * stride + inner.
        for (out, slot) in values.iter_mut().enumerate() {
            let outer = out / stride;
            let inner = out % stride;
            let base = outer * card * stride + inner;
            *slot = (0..card).map(|s| self.values[base + s * stride]).sum();
        }
        Factor { vars, cards, values, log_scale: self.log_scale }
    }

    /// Fixes `v` to `state`, dropping it from the scope.
    pub fn reduce(&self, v: usize, state: usize) -> Factor {
        let Some(k) = self.vars.iter().position(|&x| x == v) else { return self.clone() };
        let strides = self.strides();
        let card = self.cards[k];
        let stride = strides[k];
        let mut vars = self.vars.clone();
        let mut cards = self.cards.clone();
        vars.remove(k);
        cards.remove(k);
        let total: usize = cards.iter().product();
        let values = (0..total)
            .map(|out| {
                let outer = out / stride;
                let inner = out % stride;
                self.values[outer * card * stride + state * stride + inner]
            })
            .collect();
        Factor { vars, cards, values, log_scale: self.log_scale }
    }

    /// Moves the largest value to 1, folding the scale into `log_scale`.
    pub fn rescale(&mut self) {
        let max = self.values.iter().cloned().fold(0.0, f64::max);
        if max > 0.0 && !(1e-100..=1e100).contains(&max) {
            for x in &mut self.values {
                *x /= max;
            }
            self.log_scale += max.ln();
        }
    }

    /// Reorders the scope to `order` (a permutation of `vars`).
    pub fn permuted(&self, order: &[usize]) -> Factor {
        let strides = self.strides();
        let cards: Vec<usize> = order.iter().map(|v| self.cards[self.vars.iter().position(|x| x == v).unwrap()]).collect();
        let src_strides: Vec<usize> =
            order.iter().map(|v| strides[self.vars.iter().position(|x| x == v).unwrap()]).collect();
        let total: usize = cards.iter().product();
        let mut values = Vec::with_capacity(total);
        let mut digits = vec![0usize; order.len()];
        let mut idx = 0usize;
        for _ in 0..total {
            values.push(self.values[idx]);
            for k in (0..order.len()).rev() {
                digits[k] += 1;
                idx += src_strides[k];
                if digits[k] < cards[k] {
                    break;
                }
                idx -= src_strides[k] * cards[k];
                digits[k] = 0;
            }
        }
        Factor { vars: order.to_vec(), cards, values, log_scale: self.log_scale }
    }
}
