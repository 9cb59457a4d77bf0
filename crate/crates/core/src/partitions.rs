//! Set partitions of `{0, …, n-1}` as restricted growth strings.
//!
//! A restricted growth string `a` has `a[0] = 0` and
//! `a[i] ≤ 1 + max(a[0..i])`; element `i` belongs to block `a[i]`. Strings
//! are produced in lexicographic order, starting from the one-block
//! partition `00…0` and ending with the all-singletons `012…(n-1)`.

/// Lexicographic enumerator of restricted growth strings of length `n`.
#[derive(Debug, Clone)]
pub struct RestrictedGrowth {
    rgs: Vec<usize>,
    // prefix_max[i] = max(rgs[0..=i])
    prefix_max: Vec<usize>,
    started: bool,
    finished: bool,
}

impl RestrictedGrowth {
    pub fn new(n: usize) -> Self {
        Self {
            rgs: vec![0; n],
            prefix_max: vec![0; n],
            started: false,
            finished: false,
        }
    }

    /// Advances to the next string, returning it, or `None` once exhausted.
    pub fn advance(&mut self) -> Option<&[usize]> {
        if self.finished {
            return None;
        }
        if !self.started {
            self.started = true;
            return Some(&self.rgs);
        }
        let n = self.rgs.len();
        let mut i = n;
        while i > 1 {
            i -= 1;
            if self.rgs[i] <= self.prefix_max[i - 1] {
                self.rgs[i] += 1;
                self.prefix_max[i] = self.prefix_max[i - 1].max(self.rgs[i]);
                for k in i + 1..n {
                    self.rgs[k] = 0;
                    self.prefix_max[k] = self.prefix_max[i];
                }
                return Some(&self.rgs);
            }
        }
        self.finished = true;
        None
    }
}

impl Iterator for RestrictedGrowth {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        self.advance().map(<[usize]>::to_vec)
    }
}

/// Number of blocks in a restricted growth string.
pub fn block_count(rgs: &[usize]) -> usize {
    rgs.iter().max().map_or(0, |m| m + 1)
}

/// Groups element indices by block, blocks ordered by smallest member.
pub fn blocks_of(rgs: &[usize]) -> Vec<Vec<usize>> {
    let mut blocks = vec![Vec::new(); block_count(rgs)];
    for (i, &b) in rgs.iter().enumerate() {
        blocks[b].push(i);
    }
    blocks
}

/// Bell numbers B(0..=n) via the Bell triangle. Exact up to n = 34 in u128.
pub fn bell_numbers(n: usize) -> Vec<u128> {
    let mut bells = vec![1u128];
    let mut row = vec![1u128];
    for _ in 0..n {
        let mut next = Vec::with_capacity(row.len() + 1);
        next.push(*row.last().expect("non-empty row"));
        for value in &row {
            let prev = *next.last().expect("non-empty row");
            next.push(prev + value);
        }
        bells.push(next[0]);
        row = next;
    }
    bells
}

pub fn bell(n: usize) -> u128 {
    bell_numbers(n)[n]
}
