//! Indexed views of the remaining counts used by the simulation loops.
//!
//! For a given uniform variate every query here returns exactly the index the
//! linear scans in `game` and `strategy` return, so both paths consume the
//! random stream identically and produce identical games.
//!
//! * [`CountTree`]: Fenwick tree for draws plus a cursor for the lowest
//!   maximal index. Enough for fixed and lowest-index greedy play.
//! * [`TrackedDeck`]: segment tree that also answers k-th maximal type and
//!   k-th live type queries, for the strategies that randomize.

use crate::game::DeckSpec;

#[derive(Clone, Debug)]
pub(crate) struct CountTree {
    counts: Vec<u64>,
    /// 1-based Fenwick sums.
    tree: Vec<u64>,
    top: usize,
    remaining: u64,
    max: u64,
    /// Every index below the cursor has fewer than `max` copies left.
    cursor: usize,
}

impl CountTree {
    pub fn new(spec: DeckSpec) -> Self {
        let n = spec.n() as usize;
        let m = spec.m();
        let mut tree = vec![0u64; n + 1];
        for i in 1..=n {
            tree[i] += m;
            let parent = i + (i & i.wrapping_neg());
            if parent <= n {
                let v = tree[i];
                tree[parent] += v;
            }
        }
        let top = if n == 0 {
            0
        } else {
            1 << (usize::BITS - 1 - n.leading_zeros())
        };
        Self {
            counts: vec![m; n],
            tree,
            top,
            remaining: spec.total(),
            max: m,
            cursor: 0,
        }
    }

    #[inline]
    pub fn remaining(&self) -> u64 {
        self.remaining
    }

    #[inline]
    pub fn locate(&self, mut r: u64) -> usize {
        let n = self.counts.len();
        let mut pos = 0;
        let mut step = self.top;
        while step > 0 {
            let next = pos + step;
            if next <= n && self.tree[next] <= r {
                pos = next;
                r -= self.tree[next];
            }
            step >>= 1;
        }
        pos
    }

    /// Amortized `O(1)`: each count level is scanned at most once.
    #[inline]
    pub fn lowest_argmax(&mut self) -> usize {
        debug_assert!(self.remaining > 0);
        while self.counts[self.cursor] != self.max {
            self.cursor += 1;
            if self.cursor == self.counts.len() {
                self.max -= 1;
                self.cursor = 0;
            }
        }
        self.cursor
    }

    #[inline]
    pub fn remove(&mut self, ty: usize) {
        debug_assert!(self.counts[ty] > 0);
        self.counts[ty] -= 1;
        self.remaining -= 1;
        let mut j = ty + 1;
        while j < self.tree.len() {
            self.tree[j] -= 1;
            j += j & j.wrapping_neg();
        }
    }
}

#[derive(Clone, Copy, Debug, Default)]
struct Node {
    sum: u64,
    max: u64,
    ties: u64,
    live: u64,
}

impl Node {
    fn leaf(count: u64) -> Self {
        Node {
            sum: count,
            max: count,
            ties: 1,
            live: u64::from(count > 0),
        }
    }

    fn join(l: &Node, r: &Node) -> Self {
        let max = l.max.max(r.max);
        let ties = if l.max == max { l.ties } else { 0 } + if r.max == max { r.ties } else { 0 };
        Node {
            sum: l.sum + r.sum,
            max,
            ties,
            live: l.live + r.live,
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) struct TrackedDeck {
    width: usize,
    nodes: Vec<Node>,
}

impl TrackedDeck {
    pub fn new(spec: DeckSpec) -> Self {
        let n = spec.n() as usize;
        let width = n.next_power_of_two();
        let mut nodes = vec![Node::default(); 2 * width];
        for leaf in &mut nodes[width..width + n] {
            *leaf = Node::leaf(spec.m());
        }
        for i in (1..width).rev() {
            nodes[i] = Node::join(&nodes[2 * i], &nodes[2 * i + 1]);
        }
        Self { width, nodes }
    }

    #[inline]
    pub fn remaining(&self) -> u64 {
        self.nodes[1].sum
    }

    #[inline]
    pub fn ties(&self) -> u64 {
        self.nodes[1].ties
    }

    #[inline]
    pub fn live(&self) -> u64 {
        self.nodes[1].live
    }

    /// Type holding card number `r` (0-based) in cumulative count order.
    #[inline]
    pub fn locate(&self, mut r: u64) -> usize {
        let mut i = 1;
        while i < self.width {
            let left = &self.nodes[2 * i];
            if r < left.sum {
                i *= 2;
            } else {
                r -= left.sum;
                i = 2 * i + 1;
            }
        }
        i - self.width
    }

    #[inline]
    pub fn lowest_argmax(&self) -> usize {
        let target = self.nodes[1].max;
        let mut i = 1;
        while i < self.width {
            i = if self.nodes[2 * i].max == target {
                2 * i
            } else {
                2 * i + 1
            };
        }
        i - self.width
    }

    /// The k-th (0-based, by index) type attaining the maximum.
    #[inline]
    pub fn nth_argmax(&self, mut k: u64) -> usize {
        let target = self.nodes[1].max;
        let mut i = 1;
        while i < self.width {
            let left = &self.nodes[2 * i];
            let in_left = if left.max == target { left.ties } else { 0 };
            if k < in_left {
                i *= 2;
            } else {
                k -= in_left;
                i = 2 * i + 1;
            }
        }
        i - self.width
    }

    /// The k-th (0-based, by index) type with a card left.
    #[inline]
    pub fn nth_live(&self, mut k: u64) -> usize {
        let mut i = 1;
        while i < self.width {
            let left = &self.nodes[2 * i];
            if k < left.live {
                i *= 2;
            } else {
                k -= left.live;
                i = 2 * i + 1;
            }
        }
        i - self.width
    }

    #[inline]
    pub fn remove(&mut self, ty: usize) {
        let mut i = self.width + ty;
        debug_assert!(self.nodes[i].sum > 0);
        self.nodes[i] = Node::leaf(self.nodes[i].sum - 1);
        i /= 2;
        while i >= 1 {
            self.nodes[i] = Node::join(&self.nodes[2 * i], &self.nodes[2 * i + 1]);
            i /= 2;
        }
    }
}
