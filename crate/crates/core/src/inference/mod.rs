//! Graph-inference applications of the deviation bounds: the balanced
//! three-block hypothesis test with its confidence-interval separation
//! analysis, and change-point detection on graph sequences.

pub mod changepoint;
pub mod hypothesis;

pub use changepoint::{
    changepoint_power, detectability_index, edge_count, expected_shift, local_eigenvalue_statistic,
    max_degree, modified_scan, normalized_statistic, sample_sequence, scan_statistic,
    triangle_count, ChangePointSpec, CountStatistic, GraphSequence, PowerReport, PowerStatistic,
    ShiftStatistic, StatisticReport, ThresholdRule,
};
pub use hypothesis::{
    epsilon_n, epsilon_n_with_target, lambda1_confidence_interval, solve_t, table1,
    three_block_signal_eigenvalues, IntervalMethod, Table1Row, ThreeBlockSpec,
};
