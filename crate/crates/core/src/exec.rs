//! Serial/parallel switch for the CPU-bound batch stages.

/// How batch stages spread work. `Parallel` uses the rayon pool when the
/// `parallel` feature is compiled in and degrades to `Serial` otherwise.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum ExecMode {
    Serial,
    #[default]
    Parallel,
}

impl ExecMode {
    pub fn from_serial_flag(serial: bool) -> Self {
        if serial {
            ExecMode::Serial
        } else {
            ExecMode::Parallel
        }
    }
}

/// Order-preserving map over a slice.
pub fn map_slice<T, U, F>(items: &[T], mode: ExecMode, f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    match mode {
        #[cfg(feature = "parallel")]
        ExecMode::Parallel => {
            use rayon::prelude::*;
            items.par_iter().map(f).collect()
        }
        _ => items.iter().map(f).collect(),
    }
}
