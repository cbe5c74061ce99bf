//! Set partitions, perfect matchings and permutations of small index sets.

/// All set partitions of {0..n} as lists of blocks, generated from
/// restricted-growth strings. Blocks list their elements in increasing order
/// and appear in order of their smallest element.
pub fn set_partitions(n: usize) -> Vec<Vec<Vec<usize>>> {
    let mut out = Vec::new();
    let mut rgs = vec![0usize; n];
    fn rec(i: usize, max: usize, rgs: &mut [usize], out: &mut Vec<Vec<Vec<usize>>>) {
        if i == rgs.len() {
            let blocks = if rgs.is_empty() { 0 } else { max + 1 };
            let mut parts = vec![Vec::new(); blocks];
            for (pos, &b) in rgs.iter().enumerate() {
                parts[b].push(pos);
            }
            out.push(parts);
            return;
        }
        let limit = if i == 0 { 0 } else { max + 1 };
        for b in 0..=limit {
            rgs[i] = b;
            rec(i + 1, max.max(b), rgs, out);
        }
    }
    rec(0, 0, &mut rgs, &mut out);
    out
}

/// All perfect matchings of {0..n} (empty for odd n).
pub fn perfect_matchings(n: usize) -> Vec<Vec<(usize, usize)>> {
    let mut out = Vec::new();
    if n % 2 == 1 {
        return out;
    }
    let mut free: Vec<usize> = (0..n).collect();
    fn rec(free: &mut Vec<usize>, cur: &mut Vec<(usize, usize)>, out: &mut Vec<Vec<(usize, usize)>>) {
        if free.is_empty() {
            out.push(cur.clone());
            return;
        }
        let a = free.remove(0);
        for i in 0..free.len() {
            let b = free.remove(i);
            cur.push((a, b));
            rec(free, cur, out);
            cur.pop();
            free.insert(i, b);
        }
        free.insert(0, a);
    }
    rec(&mut free, &mut Vec::new(), &mut out);
    out
}

/// Visit every permutation of `items` (Heap's algorithm).
pub fn for_each_permutation<T: Clone>(items: &[T], mut visit: impl FnMut(&[T])) {
    let mut a = items.to_vec();
    let n = a.len();
    let mut c = vec![0usize; n];
    visit(&a);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                a.swap(0, i);
            } else {
                a.swap(c[i], i);
            }
            visit(&a);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bell_numbers() {
        let bell = [1, 1, 2, 5, 15, 52, 203];
        for (n, &b) in bell.iter().enumerate() {
            assert_eq!(set_partitions(n).len(), b);
        }
    }

    #[test]
    fn double_factorials() {
        assert_eq!(perfect_matchings(0).len(), 1);
        assert_eq!(perfect_matchings(3).len(), 0);
        assert_eq!(perfect_matchings(4).len(), 3);
        assert_eq!(perfect_matchings(8).len(), 105);
    }

    #[test]
    fn permutation_count() {
        let mut n = 0;
        let mut seen = std::collections::BTreeSet::new();
        for_each_permutation(&[1, 2, 3, 4], |p| {
            n += 1;
            seen.insert(p.to_vec());
        });
        assert_eq!(n, 24);
        assert_eq!(seen.len(), 24);
    }
}
