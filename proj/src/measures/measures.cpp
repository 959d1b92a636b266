#include "kuraduel/measures.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "kuraduel/errors.hpp"
#include "kuraduel/format.hpp"

namespace kuraduel {

namespace {

double phasor_modulus(double c, double s, std::size_t n) {
  if (n == 0) return 0.0;
  if (n == 1) return 1.0;
  return std::min(1.0, std::hypot(c, s) / static_cast<double>(n));
}

Eigen::Index col(std::size_t offset, int i) { return static_cast<Eigen::Index>(offset) + i; }

double subset_mean(const Eigen::Ref<const Eigen::RowVectorXd>& row, std::size_t offset, const std::vector<int>& idx) {
  double s = 0.0;
  for (int i : idx) s += row(col(offset, i));
  return s / static_cast<double>(idx.size());
}

double subset_order(const Eigen::Ref<const Eigen::RowVectorXd>& row, std::size_t offset, const std::vector<int>& idx) {
  double c = 0.0, s = 0.0;
  for (int i : idx) {
    c += std::cos(row(col(offset, i)));
    s += std::sin(row(col(offset, i)));
  }
  return phasor_modulus(c, s, idx.size());
}

void check_partition(const Trajectory& traj, const RedPartition& p) {
  for (const auto* side : {&p.r1, &p.r2})
    for (int i : *side)
      if (i < 0 || static_cast<std::size_t>(i) >= traj.n_red) throw DimensionError("partition index outside the Red network");
  if (p.r1.size() + p.r2.size() != traj.n_red) throw DimensionError("partition does not cover the Red network");
}

std::size_t window_size(std::size_t n, const LockOptions& o) {
  if (n < 3) throw WindowError("series has " + std::to_string(n) + " samples; at least 3 are needed");
  std::size_t w = o.window ? *o.window
                           : std::max<std::size_t>(2, static_cast<std::size_t>(std::ceil(o.window_fraction * static_cast<double>(n))));
  if (w < 2) throw WindowError("detection window needs at least 2 samples");
  if (w >= n) throw WindowError("detection window (" + std::to_string(w) + ") must be shorter than the series (" +
                                std::to_string(n) + ")");
  return w;
}

} // namespace

double order_parameter(const Eigen::Ref<const Eigen::RowVectorXd>& phases) {
  return phasor_modulus(phases.array().cos().sum(), phases.array().sin().sum(), static_cast<std::size_t>(phases.size()));
}

double order_parameter(const Eigen::Ref<const Eigen::RowVectorXd>& phases, const std::vector<int>& subset) {
  return subset_order(phases, 0, subset);
}

OrderSeries order_params(const Trajectory& traj, const RedPartition* partition) {
  if (partition) check_partition(traj, *partition);
  OrderSeries out;
  out.times = traj.times;
  const std::size_t n = traj.samples();
  out.o_b.reserve(n);
  out.o_r.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    out.o_b.push_back(order_parameter(traj.beta(k)));
    out.o_r.push_back(order_parameter(traj.rho(k)));
    if (partition) {
      const auto row = traj.phases.row(static_cast<Eigen::Index>(k));
      out.o_r1.push_back(subset_order(row, traj.n_blue, partition->r1));
      out.o_r2.push_back(subset_order(row, traj.n_blue, partition->r2));
    }
  }
  return out;
}

CentroidSeries centroids(const Trajectory& traj, const RedPartition* partition) {
  if (partition) check_partition(traj, *partition);
  if (traj.n_blue == 0 || traj.n_red == 0) throw DimensionError("centroids need both populations");
  CentroidSeries out;
  out.times = traj.times;
  const std::size_t n = traj.samples();
  for (std::size_t k = 0; k < n; ++k) {
    const auto beta = traj.beta(k);
    const auto rho = traj.rho(k);
    const double b = beta.mean();
    const double p = rho.mean();
    out.b.push_back(b);
    out.p.push_back(p);
    out.alpha.push_back(b - p);
    out.alpha_wrapped.push_back(wrap_angle(b - p));
    const double cb = std::atan2(beta.array().sin().sum(), beta.array().cos().sum());
    const double cp = std::atan2(rho.array().sin().sum(), rho.array().cos().sum());
    out.circular_alpha.push_back(wrap_angle(cb - cp));
    if (partition) {
      const auto row = traj.phases.row(static_cast<Eigen::Index>(k));
      const double p1 = subset_mean(row, traj.n_blue, partition->r1);
      const double p2 = subset_mean(row, traj.n_blue, partition->r2);
      out.p1.push_back(p1);
      out.p2.push_back(p2);
      out.alpha_br1.push_back(b - p1);
      out.alpha_r1r2.push_back(p1 - p2);
      out.alpha_br2.push_back(b - p2);
    }
  }
  return out;
}

LockReport detect_lock(const std::vector<double>& times, const std::vector<double>& values, const LockOptions& options) {
  if (times.size() != values.size()) throw DimensionError("detect_lock: times and values differ in length");
  const std::size_t n = values.size();
  const std::size_t w = window_size(n, options);
  const std::size_t start = n - w;

  LockReport r;
  r.window_samples = w;
  r.window_start = times[start];
  r.window_end = times[n - 1];

  // Unwrap internally so wrapped and unwrapped inputs give the same slopes.
  std::vector<double> u(n);
  u[0] = values[0];
  for (std::size_t k = 1; k < n; ++k) u[k] = u[k - 1] + wrap_angle(values[k] - values[k - 1]);

  double sum = 0.0;
  for (std::size_t k = start; k < n; ++k) sum += u[k];
  r.plateau = wrap_angle(sum / static_cast<double>(w));

  for (std::size_t k = start + 1; k < n; ++k) {
    const double dt = times[k] - times[k - 1];
    if (!(dt > 0.0)) throw DimensionError("detect_lock: times must increase");
    r.max_slope = std::max(r.max_slope, std::abs(u[k] - u[k - 1]) / dt);
  }

  for (std::size_t k = 1; k < n; ++k) {
    if (std::abs(wrap_angle(values[k]) - wrap_angle(values[k - 1])) > pi) {
      r.slip_times.push_back(times[k]);
      if (k > start) ++r.winding;
    }
  }
  if (r.slip_times.size() >= 2) {
    std::vector<double> gaps;
    for (std::size_t i = 1; i < r.slip_times.size(); ++i) gaps.push_back(r.slip_times[i] - r.slip_times[i - 1]);
    std::nth_element(gaps.begin(), gaps.begin() + static_cast<std::ptrdiff_t>(gaps.size() / 2), gaps.end());
    double median = gaps[gaps.size() / 2];
    if (gaps.size() % 2 == 0) {
      const double lower = *std::max_element(gaps.begin(), gaps.begin() + static_cast<std::ptrdiff_t>(gaps.size() / 2));
      median = 0.5 * (median + lower);
    }
    r.period = median;
  }
  r.locked = r.max_slope < options.slope_tol && r.winding <= options.wind_tol;
  return r;
}

LockReport detect_local_lock(const Trajectory& traj, Population which, const LockOptions& options) {
  const bool blue = which == Population::blue;
  const std::size_t count = blue ? traj.n_blue : traj.n_red;
  const std::size_t offset = blue ? 0 : traj.n_blue;
  if (count == 0) throw DimensionError("detect_local_lock: empty population");
  const std::size_t n = traj.samples();
  std::vector<double> centroid(n);
  for (std::size_t k = 0; k < n; ++k)
    centroid[k] = blue ? traj.beta(k).mean() : traj.rho(k).mean();

  LockReport agg;
  agg.locked = true;
  std::vector<double> rel(n);
  for (std::size_t i = 0; i < count; ++i) {
    for (std::size_t k = 0; k < n; ++k)
      rel[k] = traj.phases(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(offset + i)) - centroid[k];
    const LockReport r = detect_lock(traj.times, rel, options);
    agg.window_samples = r.window_samples;
    agg.window_start = r.window_start;
    agg.window_end = r.window_end;
    agg.max_slope = std::max(agg.max_slope, r.max_slope);
    agg.winding += r.winding;
    agg.slip_times.insert(agg.slip_times.end(), r.slip_times.begin(), r.slip_times.end());
  }
  std::sort(agg.slip_times.begin(), agg.slip_times.end());
  agg.locked = agg.max_slope < options.slope_tol && agg.winding <= options.wind_tol;
  return agg;
}

double trailing_mean(const std::vector<double>& values, const LockOptions& options) {
  const std::size_t w = window_size(values.size(), options);
  double s = 0.0;
  for (std::size_t k = values.size() - w; k < values.size(); ++k) s += values[k];
  return s / static_cast<double>(w);
}

std::string_view to_string(FragState s) {
  switch (s) {
    case FragState::locked_2cluster: return "locked-2cluster";
    case FragState::locked_3cluster: return "locked-3cluster";
    case FragState::splay_r2: return "splay-R2";
    case FragState::evaporated: return "evaporated";
  }
  return "evaporated";
}

FragClassification classify_fragmentation(const OrderSeries& order, const CentroidSeries& c, const FragThresholds& th) {
  if (!order.has_partition() || !c.has_partition())
    throw DimensionError("classify_fragmentation needs partition series");
  FragClassification out;
  out.o_b = trailing_mean(order.o_b, th.lock);
  out.o_r = trailing_mean(order.o_r, th.lock);
  out.o_r1 = trailing_mean(order.o_r1, th.lock);
  out.o_r2 = trailing_mean(order.o_r2, th.lock);
  out.alpha = detect_lock(c.times, c.alpha, th.lock);
  out.alpha_br1 = detect_lock(c.times, c.alpha_br1, th.lock);
  out.alpha_r1r2 = detect_lock(c.times, c.alpha_r1r2, th.lock);

  if (out.o_b >= th.locked && out.o_r >= th.locked && out.alpha.locked)
    out.state = FragState::locked_2cluster;
  else if (out.o_b >= th.locked && out.o_r1 >= th.locked && out.alpha_br1.locked && out.alpha_r1r2.locked)
    out.state = FragState::locked_3cluster;
  else if (out.o_r2 <= th.splay)
    out.state = FragState::splay_r2;
  else
    out.state = FragState::evaporated;
  return out;
}

std::string measures_csv(const OrderSeries& order, const CentroidSeries& c, const std::vector<std::string>& comments) {
  const std::size_t n = order.times.size();
  if (c.times.size() != n) throw DimensionError("measures_csv: series lengths differ");
  std::ostringstream out;
  for (const auto& line : comments) out << "# " << line << '\n';
  out << "t,O_B,O_R,O_R1,O_R2,alpha,alpha_br1,alpha_r1r2\n";
  auto opt = [](const std::vector<double>& v, std::size_t k, bool wrap) -> std::string {
    if (v.empty()) return {};
    return format_double(wrap ? wrap_angle(v[k]) : v[k]);
  };
  for (std::size_t k = 0; k < n; ++k) {
    out << format_double(order.times[k]) << ',' << format_double(order.o_b[k]) << ',' << format_double(order.o_r[k])
        << ',' << opt(order.o_r1, k, false) << ',' << opt(order.o_r2, k, false) << ',' << opt(c.alpha, k, true) << ','
        << opt(c.alpha_br1, k, true) << ',' << opt(c.alpha_r1r2, k, true) << '\n';
  }
  return out.str();
}

} // namespace kuraduel
