//! Permutations in one-line notation, 0-based: `w[a]` is the image of `a`.

pub type Perm = Vec<u8>;

pub fn identity(n: usize) -> Perm {
    (0..n as u8).collect()
}

pub fn is_identity(w: &[u8]) -> bool {
    w.iter().enumerate().all(|(a, &b)| a as u8 == b)
}

/// (u v)(a) = u(v(a))
pub fn compose(u: &[u8], v: &[u8]) -> Perm {
    v.iter().map(|&b| u[b as usize]).collect()
}

pub fn inverse(w: &[u8]) -> Perm {
    let mut out = vec![0u8; w.len()];
    for (a, &b) in w.iter().enumerate() {
        out[b as usize] = a as u8;
    }
    out
}

pub fn length(w: &[u8]) -> usize {
    let mut l = 0;
    for a in 0..w.len() {
        for b in a + 1..w.len() {
            if w[a] > w[b] {
                l += 1;
            }
        }
    }
    l
}

/// s_k w: swap the values k and k+1
pub fn left_mul(k: usize, w: &[u8]) -> Perm {
    let (k0, k1) = (k as u8, k as u8 + 1);
    w.iter()
        .map(|&b| if b == k0 { k1 } else if b == k1 { k0 } else { b })
        .collect()
}

/// w s_k: swap positions k and k+1
pub fn right_mul(w: &[u8], k: usize) -> Perm {
    let mut out = w.to_vec();
    out.swap(k, k + 1);
    out
}

pub fn is_left_descent(w: &[u8], k: usize) -> bool {
    let mut pk = 0;
    let mut pk1 = 0;
    for (a, &b) in w.iter().enumerate() {
        if b as usize == k {
            pk = a;
        } else if b as usize == k + 1 {
            pk1 = a;
        }
    }
    pk > pk1
}

/// lexicographically smallest reduced word
pub fn canon(w: &[u8]) -> Vec<u8> {
    let mut w = w.to_vec();
    let mut word = Vec::new();
    'outer: loop {
        for k in 0..w.len().saturating_sub(1) {
            if is_left_descent(&w, k) {
                word.push(k as u8);
                w = left_mul(k, &w);
                continue 'outer;
            }
        }
        return word;
    }
}

/// s_{l_1} ... s_{l_r}
pub fn from_word(word: &[u8], n: usize) -> Perm {
    let mut w = identity(n);
    for &l in word.iter().rev() {
        w = left_mul(l as usize, &w);
    }
    w
}

pub fn is_reduced(word: &[u8], n: usize) -> bool {
    length(&from_word(word, n)) == word.len()
}

/// place permutation: (w nu)_{w(a)} = nu_a
pub fn act<T: Copy + Default>(w: &[u8], nu: &[T]) -> Vec<T> {
    let mut out = vec![T::default(); nu.len()];
    for (a, &b) in w.iter().enumerate() {
        out[b as usize] = nu[a];
    }
    out
}

pub fn swap_word<T: Clone>(nu: &[T], k: usize) -> Vec<T> {
    let mut out = nu.to_vec();
    out.swap(k, k + 1);
    out
}

pub fn all_perms(n: usize) -> Vec<Perm> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    let mut used = vec![false; n];
    fn rec(n: usize, cur: &mut Vec<u8>, used: &mut [bool], out: &mut Vec<Perm>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for b in 0..n {
            if !used[b] {
                used[b] = true;
                cur.push(b as u8);
                rec(n, cur, used, out);
                cur.pop();
                used[b] = false;
            }
        }
    }
    rec(n, &mut cur, &mut used, &mut out);
    out
}

pub fn block_of(blocks: &[usize], a: usize) -> usize {
    let mut s = 0;
    for (t, &b) in blocks.iter().enumerate() {
        s += b;
        if a < s {
            return t;
        }
    }
    blocks.len()
}

pub fn block_starts(blocks: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(blocks.len());
    let mut s = 0;
    for &b in blocks {
        out.push(s);
        s += b;
    }
    out
}

/// w increasing on every block: minimal length left coset representatives of the Young subgroup
pub fn is_shuffle(w: &[u8], blocks: &[usize]) -> bool {
    let mut s = 0;
    for &b in blocks {
        for a in s..s + b {
            if a + 1 < s + b && w[a] > w[a + 1] {
                return false;
            }
        }
        s += b;
    }
    true
}

pub fn in_young(w: &[u8], blocks: &[usize]) -> bool {
    w.iter().enumerate().all(|(a, &b)| block_of(blocks, a) == block_of(blocks, b as usize))
}

pub fn shuffles(blocks: &[usize]) -> Vec<Perm> {
    let n: usize = blocks.iter().sum();
    // assign each target position a block, then positions inside a block increase
    let mut out = Vec::new();
    let mut assign = vec![0usize; n];
    let mut left = blocks.to_vec();
    fn rec(pos: usize, n: usize, assign: &mut Vec<usize>, left: &mut Vec<usize>, blocks: &[usize], out: &mut Vec<Perm>) {
        if pos == n {
            let starts = block_starts(blocks);
            let mut next = starts.clone();
            let mut w = vec![0u8; n];
            for (p, &t) in assign.iter().enumerate() {
                w[next[t]] = p as u8;
                next[t] += 1;
            }
            out.push(w);
            return;
        }
        for t in 0..blocks.len() {
            if left[t] > 0 {
                left[t] -= 1;
                assign[pos] = t;
                rec(pos + 1, n, assign, left, blocks, out);
                left[t] += 1;
            }
        }
    }
    rec(0, n, &mut assign, &mut left, blocks, &mut out);
    out
}

/// u = w' v with w' a shuffle for `blocks` and v in the Young subgroup
pub fn coset_split(u: &[u8], blocks: &[usize]) -> (Perm, Perm) {
    let n = u.len();
    let starts = block_starts(blocks);
    let mut wp = vec![0u8; n];
    for (t, &s) in starts.iter().enumerate() {
        let mut imgs: Vec<u8> = u[s..s + blocks[t]].to_vec();
        imgs.sort();
        for (o, &b) in imgs.iter().enumerate() {
            wp[s + o] = b;
        }
    }
    let v = compose(&inverse(&wp), u);
    (wp, v)
}

/// w[m,n]: first m positions go to the last m
pub fn w_mn(m: usize, n: usize) -> Perm {
    (0..m + n).map(|k| if k < m { (k + n) as u8 } else { (k - m) as u8 }).collect()
}

/// block permutation sending block t to slot pi[t], keeping order inside blocks
pub fn block_perm(blocks: &[usize], pi: &[usize]) -> Perm {
    let n: usize = blocks.iter().sum();
    let mut new_sizes = vec![0usize; blocks.len()];
    for (t, &p) in pi.iter().enumerate() {
        new_sizes[p] = blocks[t];
    }
    let new_starts = block_starts(&new_sizes);
    let starts = block_starts(blocks);
    let mut w = vec![0u8; n];
    for t in 0..blocks.len() {
        for o in 0..blocks[t] {
            w[starts[t] + o] = (new_starts[pi[t]] + o) as u8;
        }
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canon_is_reduced_and_minimal() {
        for w in all_perms(4) {
            let c = canon(&w);
            assert_eq!(c.len(), length(&w));
            assert_eq!(from_word(&c, 4), w);
        }
        assert_eq!(canon(&[2, 1, 0]), vec![0, 1, 0]);
    }

    #[test]
    fn shuffle_count() {
        assert_eq!(shuffles(&[2, 2]).len(), 6);
        assert_eq!(shuffles(&[1, 1, 1]).len(), 6);
        for w in shuffles(&[2, 1]) {
            assert!(is_shuffle(&w, &[2, 1]));
        }
    }

    #[test]
    fn coset_split_recombines() {
        for u in all_perms(4) {
            let (a, b) = coset_split(&u, &[2, 2]);
            assert!(is_shuffle(&a, &[2, 2]));
            assert!(in_young(&b, &[2, 2]));
            assert_eq!(compose(&a, &b), u);
            assert_eq!(length(&a) + length(&b), length(&u));
        }
    }

    #[test]
    fn act_matches_generators() {
        let nu = [1u8, 2, 3];
        assert_eq!(act(&from_word(&[0], 3), &nu), vec![2, 1, 3]);
        assert_eq!(act(&w_mn(1, 2), &nu), vec![2, 3, 1]);
    }
}
