use fusion_core::Tally;

/// Top-down merge sort reporting every key comparison.
pub fn merge_sort<T: Tally>(input: &[u64], tally: &mut T) -> Vec<u64> {
    let mut data = input.to_vec();
    let mut buf = vec![0u64; data.len()];
    sort_range(&mut data, &mut buf, tally);
    data
}

fn sort_range<T: Tally>(data: &mut [u64], buf: &mut [u64], tally: &mut T) {
    let n = data.len();
    if n <= 1 {
        return;
    }
    let mid = n / 2;
    {
        let (lo, hi) = data.split_at_mut(mid);
        let (blo, bhi) = buf.split_at_mut(mid);
        sort_range(lo, blo, tally);
        sort_range(hi, bhi, tally);
    }
    let (mut i, mut j, mut k) = (0, mid, 0);
    while i < mid && j < n {
        tally.key_compares(1);
        if data[j] < data[i] {
            buf[k] = data[j];
            j += 1;
        } else {
            buf[k] = data[i];
            i += 1;
        }
        k += 1;
    }
    buf[k..k + mid - i].copy_from_slice(&data[i..mid]);
    k += mid - i;
    buf[k..k + n - j].copy_from_slice(&data[j..n]);
    data.copy_from_slice(&buf[..n]);
}

#[cfg(test)]
mod tests {
    use super::*;
    use fusion_core::OpCounters;

    #[test]
    fn sorts_and_counts() {
        let mut ops = OpCounters::new();
        let out = merge_sort(&[5, 3, 9, 1, 3, 0], &mut ops);
        assert_eq!(out, vec![0, 1, 3, 3, 5, 9]);
        assert!(ops.key_compares > 0 && ops.key_compares <= 6 * 3);
        assert!(merge_sort(&[], &mut ()).is_empty());
        let sorted: Vec<u64> = (0..1024).collect();
        let mut ops = OpCounters::new();
        assert_eq!(merge_sort(&sorted, &mut ops), sorted);
        // each merge of sorted halves stops after the left run
        assert_eq!(ops.key_compares, 512 * 10);
    }
}
