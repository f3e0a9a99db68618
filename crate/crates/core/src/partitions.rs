//! Set partitions of qubit labels with a fixed canonical order.
//!
//! Labels are 1-based (rendered `A`, `B`, ... in text output). Within a
//! partition, parts are sorted by size first, then by smallest label;
//! catalogs are sorted lexicographically over the normalized part lists.
//! Partition indices reported to users are 1-based.

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PartitionError {
    #[error("need 1 <= k <= n, got n={n}, k={k}")]
    BadRange { n: usize, k: usize },
    #[error("n must be even, got {n}")]
    OddN { n: usize },
    #[error("labels must exactly cover 1..={n}")]
    BadCover { n: usize },
}

/// Ordered division of labels `{1..n}` into disjoint nonempty parts.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Partition {
    n: usize,
    parts: Vec<Vec<usize>>,
}

fn part_order(a: &[usize], b: &[usize]) -> std::cmp::Ordering {
    a.len().cmp(&b.len()).then_with(|| a.cmp(b))
}

impl Ord for Partition {
    /// Lexicographic over the normalized part lists, parts compared by
    /// size first; this reproduces the written catalog listings.
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        for (a, b) in self.parts.iter().zip(other.parts.iter()) {
            let ord = part_order(a, b);
            if ord != std::cmp::Ordering::Equal {
                return ord;
            }
        }
        self.parts.len().cmp(&other.parts.len())
    }
}

impl PartialOrd for Partition {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Partition {
    /// Normalizes part contents and part order on construction.
    pub fn new(n: usize, mut parts: Vec<Vec<usize>>) -> Result<Self, PartitionError> {
        let mut seen = vec![false; n + 1];
        let mut count = 0usize;
        for part in &parts {
            for &l in part {
                if l == 0 || l > n || seen[l] {
                    return Err(PartitionError::BadCover { n });
                }
                seen[l] = true;
                count += 1;
            }
        }
        if count != n {
            return Err(PartitionError::BadCover { n });
        }
        for part in &mut parts {
            part.sort_unstable();
        }
        parts.sort_by(|a, b| part_order(a, b));
        Ok(Self { n, parts })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.parts.len()
    }

    pub fn parts(&self) -> &[Vec<usize>] {
        &self.parts
    }

    pub fn part(&self, m: usize) -> &[usize] {
        &self.parts[m]
    }

    /// Text form like `B|D|AC` (labels `A..` for qubits `1..`).
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (i, part) in self.parts.iter().enumerate() {
            if i > 0 {
                out.push('|');
            }
            for &l in part {
                out.push(label_char(l));
            }
        }
        out
    }
}

pub fn label_char(label: usize) -> char {
    (b'A' + (label - 1) as u8) as char
}

/// Ordered list of all partitions of `{1..n}` with a fixed part count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionCatalog {
    n: usize,
    k: usize,
    entries: Vec<Partition>,
}

impl PartitionCatalog {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[Partition] {
        &self.entries
    }

    /// 1-based indexing matching the written convention `P_j^k`.
    pub fn get(&self, j: usize) -> &Partition {
        &self.entries[j - 1]
    }

    pub fn iter(&self) -> impl Iterator<Item = &Partition> {
        self.entries.iter()
    }
}

/// Stirling number of the second kind, via the standard recurrence.
pub fn stirling2(n: usize, k: usize) -> Result<u64, PartitionError> {
    if k == 0 || k > n {
        return Err(PartitionError::BadRange { n, k });
    }
    let mut row = vec![0u64; k + 1];
    row[0] = 1; // S(0, 0)
    for _ in 1..=n {
        for j in (1..=k).rev() {
            row[j] = j as u64 * row[j] + row[j - 1];
        }
        row[0] = 0;
    }
    Ok(row[k])
}

/// All partitions of `{1..n}` into exactly `k` parts, canonically ordered.
pub fn enumerate_partitions(n: usize, k: usize) -> Result<PartitionCatalog, PartitionError> {
    if k == 0 || k > n {
        return Err(PartitionError::BadRange { n, k });
    }
    // restricted growth strings: assignment[i] in 0..=max_used+1
    let mut entries = Vec::new();
    let mut assignment = vec![0usize; n];
    fn recurse(
        n: usize,
        k: usize,
        pos: usize,
        used: usize,
        assignment: &mut Vec<usize>,
        out: &mut Vec<Partition>,
    ) {
        if pos == n {
            if used == k {
                let mut parts = vec![Vec::new(); k];
                for (i, &a) in assignment.iter().enumerate() {
                    parts[a].push(i + 1);
                }
                out.push(Partition::new(n, parts).expect("valid by construction"));
            }
            return;
        }
        // prune: remaining slots must be able to reach k blocks
        if used + (n - pos) < k {
            return;
        }
        for a in 0..=used.min(k - 1) {
            assignment[pos] = a;
            let next_used = used.max(a + 1);
            recurse(n, k, pos + 1, next_used, assignment, out);
        }
    }
    recurse(n, k, 0, 0, &mut assignment, &mut entries);
    entries.sort();
    entries.dedup();
    debug_assert_eq!(entries.len() as u64, stirling2(n, k)?);
    Ok(PartitionCatalog { n, k, entries })
}

/// Bipartitions into two parts of size `n/2` (each unordered pair once).
pub fn symmetric_bipartitions(n: usize) -> Result<PartitionCatalog, PartitionError> {
    if n == 0 || n % 2 != 0 {
        return Err(PartitionError::OddN { n });
    }
    let half = n / 2;
    let mut entries = Vec::new();
    // fix label 1 in the first chosen part to avoid double counting
    for combo in combinations(2..=n, half - 1) {
        let mut first = vec![1usize];
        first.extend(combo);
        let second: Vec<usize> = (1..=n).filter(|l| !first.contains(l)).collect();
        entries.push(Partition::new(n, vec![first, second]).expect("valid"));
    }
    entries.sort();
    Ok(PartitionCatalog { n, k: 2, entries })
}

/// Partitions with every part of size exactly 2.
pub fn pair_partitions(n: usize) -> Result<PartitionCatalog, PartitionError> {
    if n == 0 || n % 2 != 0 {
        return Err(PartitionError::OddN { n });
    }
    let mut entries = Vec::new();
    let mut pool: Vec<usize> = (1..=n).collect();
    let mut current: Vec<Vec<usize>> = Vec::new();
    fn recurse(pool: &mut Vec<usize>, current: &mut Vec<Vec<usize>>, n: usize, out: &mut Vec<Partition>) {
        if pool.is_empty() {
            out.push(Partition::new(n, current.clone()).expect("valid"));
            return;
        }
        let a = pool[0];
        for i in 1..pool.len() {
            let b = pool[i];
            let mut rest: Vec<usize> = pool.clone();
            rest.retain(|&x| x != a && x != b);
            current.push(vec![a, b]);
            recurse(&mut rest, current, n, out);
            current.pop();
        }
    }
    recurse(&mut pool, &mut current, n, &mut entries);
    entries.sort();
    Ok(PartitionCatalog { n, k: n / 2, entries })
}

fn combinations(range: std::ops::RangeInclusive<usize>, k: usize) -> Vec<Vec<usize>> {
    let items: Vec<usize> = range.collect();
    let mut out = Vec::new();
    let mut stack = Vec::new();
    fn recurse(items: &[usize], start: usize, k: usize, stack: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if stack.len() == k {
            out.push(stack.clone());
            return;
        }
        for i in start..items.len() {
            stack.push(items[i]);
            recurse(items, i + 1, k, stack, out);
            stack.pop();
        }
    }
    recurse(&items, 0, k, &mut stack, &mut out);
    out
}

pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut num = 1u64;
    for i in 0..k {
        num = num * (n - i) as u64 / (i + 1) as u64;
    }
    num
}
