//! Shared setup for the benchmarks: nothing lives here, the interesting
//! code is under benches/.
