#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "kuraduel/dynamics.hpp"
#include "kuraduel/graph.hpp"
#include "kuraduel/types.hpp"

namespace kuraduel {

/// |mean of exp(i theta)| over the given phases; 1 for a single phase, 0 for none.
double order_parameter(const Eigen::Ref<const Eigen::RowVectorXd>& phases);
double order_parameter(const Eigen::Ref<const Eigen::RowVectorXd>& phases, const std::vector<int>& subset);

struct OrderSeries {
  std::vector<double> times;
  std::vector<double> o_b, o_r;
  std::vector<double> o_r1, o_r2;  // empty without a partition
  bool has_partition() const noexcept { return !o_r1.empty(); }
};

OrderSeries order_params(const Trajectory& traj, const RedPartition* partition = nullptr);

struct CentroidSeries {
  std::vector<double> times;
  std::vector<double> b, p;              // arithmetic means of unwrapped phases
  std::vector<double> alpha;             // b - p
  std::vector<double> alpha_wrapped;     // alpha in (-pi, pi]
  std::vector<double> circular_alpha;    // arg of mean phasors, a diagnostic
  std::vector<double> p1, p2;            // partition only
  std::vector<double> alpha_br1, alpha_r1r2, alpha_br2;
  bool has_partition() const noexcept { return !p1.empty(); }
};

CentroidSeries centroids(const Trajectory& traj, const RedPartition* partition = nullptr);

struct LockOptions {
  double window_fraction = 0.1;       // trailing share of the samples
  std::optional<std::size_t> window;  // explicit sample count, overrides the fraction
  double slope_tol = 1e-3;            // rad per time unit
  int wind_tol = 0;                   // slips tolerated inside the window
};

struct LockReport {
  bool locked = false;
  double plateau = 0.0;        // trailing-window mean (wrapped into (-pi, pi])
  double window_start = 0.0;   // time of the first window sample
  double window_end = 0.0;
  std::size_t window_samples = 0;
  double max_slope = 0.0;      // max |finite-difference derivative| inside the window
  int winding = 0;             // 2 pi slips inside the window
  std::vector<double> slip_times;  // over the whole series
  std::optional<double> period;    // mean spacing of successive slips
};

/// A slip is a jump of the wrapped series by more than pi between consecutive
/// samples. Throws WindowError when the window does not fit the series.
LockReport detect_lock(const std::vector<double>& times, const std::vector<double>& values,
                       const LockOptions& options = {});


/// Local locking: every node's phase relative to its population centroid is
/// locked. Fields aggregate over nodes (max slope, total winding); plateau is 0.
LockReport detect_local_lock(const Trajectory& traj, Population which, const LockOptions& options = {});

/// Trailing-window mean of a series, same window rule as detect_lock.
double trailing_mean(const std::vector<double>& values, const LockOptions& options = {});

enum class FragState { locked_2cluster, locked_3cluster, splay_r2, evaporated };
std::string_view to_string(FragState s);

struct FragThresholds {
  double locked = 0.99;
  double splay = 0.3;
  LockOptions lock;
};

struct FragClassification {
  FragState state = FragState::evaporated;
  double o_b = 0.0, o_r = 0.0, o_r1 = 0.0, o_r2 = 0.0;  // trailing means
  LockReport alpha;
  LockReport alpha_br1;
  LockReport alpha_r1r2;
};

/// Requires partition data in both series (DimensionError otherwise).
FragClassification classify_fragmentation(const OrderSeries& order, const CentroidSeries& centroids,
                                          const FragThresholds& thresholds = {});

/// `t,O_B,O_R,O_R1,O_R2,alpha,alpha_br1,alpha_r1r2` with wrapped angles;
/// absent columns are left empty.
std::string measures_csv(const OrderSeries& order, const CentroidSeries& centroids,
                         const std::vector<std::string>& comments = {});

} // namespace kuraduel
