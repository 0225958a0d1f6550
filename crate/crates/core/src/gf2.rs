//! Small GF(2) linear algebra on rows packed into `u64`.

/// Row-echelon basis keyed by pivot bit. Supports rank and span membership.
#[derive(Clone, Debug, Default)]
pub struct Basis {
    rows: Vec<u64>,
}

impl Basis {
    pub fn new() -> Self {
        Basis { rows: Vec::new() }
    }

    pub fn from_rows(rows: impl IntoIterator<Item = u64>) -> Self {
        let mut b = Basis::new();
        for r in rows {
            b.insert(r);
        }
        b
    }

    /// Reduces `v` against the basis; the result is zero iff `v` is in the span.
    pub fn reduce(&self, mut v: u64) -> u64 {
        for &r in &self.rows {
            let pivot = 63 - r.leading_zeros();
            if v >> pivot & 1 == 1 {
                v ^= r;
            }
        }
        v
    }

    /// Inserts `v`; returns false if it was already in the span.
    pub fn insert(&mut self, v: u64) -> bool {
        let v = self.reduce(v);
        if v == 0 {
            return false;
        }
        let pivot = 63 - v.leading_zeros();
        for r in &mut self.rows {
            if *r >> pivot & 1 == 1 {
                *r ^= v;
            }
        }
        let pos = self.rows.partition_point(|r| r.leading_zeros() < v.leading_zeros());
        self.rows.insert(pos, v);
        true
    }

    pub fn contains(&self, v: u64) -> bool {
        self.reduce(v) == 0
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[u64] {
        &self.rows
    }
}

pub fn rank(rows: &[u64]) -> usize {
    Basis::from_rows(rows.iter().copied()).rank()
}

/// Basis of `{v : popcount(v & r) even for every r in rows}` over `n` bits.
pub fn nullspace(rows: &[u64], n: usize) -> Vec<u64> {
    // Gauss-Jordan on the row matrix, then read off free columns.
    let mut m: Vec<u64> = rows.to_vec();
    let mut pivots: Vec<usize> = Vec::new();
    let mut r = 0;
    for c in 0..n {
        let Some(p) = (r..m.len()).find(|&i| m[i] >> c & 1 == 1) else {
            continue;
        };
        m.swap(r, p);
        for i in 0..m.len() {
            if i != r && m[i] >> c & 1 == 1 {
                m[i] ^= m[r];
            }
        }
        pivots.push(c);
        r += 1;
        if r == m.len() {
            break;
        }
    }
    let mut out = Vec::new();
    for f in (0..n).filter(|c| !pivots.contains(c)) {
        let mut v = 1u64 << f;
        for (i, &pc) in pivots.iter().enumerate() {
            if m[i] >> f & 1 == 1 {
                v |= 1 << pc;
            }
        }
        out.push(v);
    }
    out
}

/// Iterates over all subsets of `{0..n}` of size `k` as bit masks, in
/// colexicographic order.
pub fn subsets(n: usize, k: usize) -> impl Iterator<Item = u64> {
    let limit = if n == 64 { u64::MAX } else { 1u64 << n };
    let first = if k == 0 { 0 } else if k >= 64 { u64::MAX } else { (1u64 << k) - 1 };
    let mut cur = Some(first);
    if k > n {
        cur = None;
    }
    std::iter::from_fn(move || {
        let v = cur?;
        cur = if v == 0 {
            None
        } else {
            // Gosper's hack.
            let c = v & v.wrapping_neg();
            let r = v.wrapping_add(c);
            if r == 0 || (n < 64 && r >= limit) {
                None
            } else {
                let next = (((r ^ v) >> 2) / c) | r;
                if n < 64 && next >= limit {
                    None
                } else {
                    Some(next)
                }
            }
        };
        Some(v)
    })
}

pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as u64
}
