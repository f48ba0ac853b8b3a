//! Switch between rayon and plain iteration for the data-parallel loops.
//!
//! Without the `parallel` feature `Execution::Parallel` runs sequentially.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

impl Execution {
    /// Maps `f` over `0..len`, preserving order.
    pub fn map_range<R, F>(self, len: usize, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(usize) -> R + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Execution::Parallel => {
                use rayon::prelude::*;
                (0..len).into_par_iter().map(f).collect()
            }
            _ => (0..len).map(f).collect(),
        }
    }

    pub fn map<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        self.map_range(items.len(), |k| f(&items[k]))
    }

    /// First index (lowest) whose value is `Some`, searching all of them.
    pub fn find_first<R, F>(self, len: usize, f: F) -> Option<R>
    where
        R: Send,
        F: Fn(usize) -> Option<R> + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Execution::Parallel => {
                use rayon::prelude::*;
                (0..len).into_par_iter().find_map_first(f)
            }
            _ => (0..len).find_map(f),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_modes_agree() {
        let seq = Execution::Sequential.map_range(1000, |k| k * k);
        let par = Execution::Parallel.map_range(1000, |k| k * k);
        assert_eq!(seq, par);
        let f = |k: usize| (k % 97 == 96).then_some(k);
        assert_eq!(
            Execution::Sequential.find_first(1000, f),
            Execution::Parallel.find_first(1000, f)
        );
    }
}
