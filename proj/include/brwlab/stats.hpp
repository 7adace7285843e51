#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace brwlab {

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double rms_residual = 0.0;
  double slope_stderr = 0.0;  // classical OLS standard error (0 for n <= 2)
  std::size_t n = 0;
};

LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y);
/// Weighted least squares with weights 1/sigma^2.
LinearFit fit_line_weighted(const std::vector<double>& x, const std::vector<double>& y,
                            const std::vector<double>& sigma);

struct MeanStat {
  double mean = 0.0;
  double stderr_ = 0.0;
  double sd = 0.0;
  std::size_t n = 0;
};
MeanStat mean_stat(const std::vector<double>& v);

/// Quantile function of the standard normal distribution.
double normal_quantile(double p);

/// Neumaier-compensated accumulator.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) c_ += (sum_ - t) + x;
    else c_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + c_; }

 private:
  double sum_ = 0.0;
  double c_ = 0.0;
};

}  // namespace brwlab
