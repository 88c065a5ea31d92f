//! Reductions with a fixed combination order.
//!
//! Rows are summed sequentially, possibly on different threads, then row
//! results are merged pairwise in index order. The result does not depend on
//! how many threads rayon uses.

use rayon::prelude::*;

pub(crate) fn tree_combine<T, C>(mut items: Vec<T>, combine: C) -> Option<T>
where
    C: Fn(T, T) -> T,
{
    while items.len() > 1 {
        let mut next = Vec::with_capacity(items.len().div_ceil(2));
        let mut it = items.into_iter();
        while let Some(a) = it.next() {
            match it.next() {
                Some(b) => next.push(combine(a, b)),
                None => next.push(a),
            }
        }
        items = next;
    }
    items.pop()
}

pub(crate) fn reduce_rows<T, F, C>(rows: usize, row_fn: F, combine: C) -> Option<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
    C: Fn(T, T) -> T,
{
    let partials: Vec<T> = (0..rows).into_par_iter().map(&row_fn).collect();
    tree_combine(partials, combine)
}

pub(crate) fn sum_rows<F>(rows: usize, row_fn: F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    reduce_rows(rows, row_fn, |a, b| a + b).unwrap_or(0.0)
}

pub(crate) fn add_vecs<T: Copy + std::ops::AddAssign>(mut a: Vec<T>, b: Vec<T>) -> Vec<T> {
    for (x, y) in a.iter_mut().zip(b) {
        *x += y;
    }
    a
}
