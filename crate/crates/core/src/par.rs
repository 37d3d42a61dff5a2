//! Data-parallel helpers with a sequential fallback.
//!
//! Every helper writes results by index, so output never depends on how the
//! work was scheduled.

use serde::{Deserialize, Serialize};

/// How per-cell work is executed. `Parallel` degrades to `Sequential` when
/// the crate is built without the `parallel` feature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

pub(crate) fn for_each_mut<T, F>(exec: Execution, items: &mut [T], f: F)
where
    T: Send,
    F: Fn(usize, &mut T) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        items.par_iter_mut().enumerate().for_each(|(i, x)| f(i, x));
        return;
    }
    let _ = exec;
    items.iter_mut().enumerate().for_each(|(i, x)| f(i, x));
}

pub(crate) fn map_indices<T, F>(exec: Execution, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = exec;
    (0..n).map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_modes_agree() {
        let seq = map_indices(Execution::Sequential, 1000, |i| (i as f64).sqrt());
        let par = map_indices(Execution::Parallel, 1000, |i| (i as f64).sqrt());
        assert_eq!(seq, par);

        let mut a = vec![1.0f64; 257];
        let mut b = a.clone();
        for_each_mut(Execution::Sequential, &mut a, |i, x| *x += i as f64 * 0.5);
        for_each_mut(Execution::Parallel, &mut b, |i, x| *x += i as f64 * 0.5);
        assert_eq!(a, b);
    }
}
