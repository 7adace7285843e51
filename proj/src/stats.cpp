#include "brwlab/stats.hpp"

#include <cmath>
#include <stdexcept>

#include "brwlab/errors.hpp"

namespace brwlab {

LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  return fit_line_weighted(x, y, std::vector<double>(x.size(), 1.0));
}

LinearFit fit_line_weighted(const std::vector<double>& x, const std::vector<double>& y,
                            const std::vector<double>& sigma) {
  if (x.size() != y.size() || x.size() != sigma.size()) throw ValidationError("fit_line: size mismatch");
  if (x.size() < 2) throw ValidationError("fit_line: need at least two points");
  double sw = 0, sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double w = 1.0 / (sigma[i] * sigma[i]);
    sw += w;
    sx += w * x[i];
    sy += w * y[i];
  }
  const double mx = sx / sw, my = sy / sw;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double w = 1.0 / (sigma[i] * sigma[i]);
    sxx += w * (x[i] - mx) * (x[i] - mx);
    sxy += w * (x[i] - mx) * (y[i] - my);
  }
  if (sxx <= 0) throw ValidationError("fit_line: abscissae are all equal");
  LinearFit f;
  f.n = x.size();
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss = 0, wss = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (f.intercept + f.slope * x[i]);
    ss += r * r;
    wss += r * r / (sigma[i] * sigma[i]);
  }
  f.rms_residual = std::sqrt(ss / static_cast<double>(x.size()));
  if (x.size() > 2) f.slope_stderr = std::sqrt(wss / static_cast<double>(x.size() - 2) / sxx);
  return f;
}

MeanStat mean_stat(const std::vector<double>& v) {
  MeanStat m;
  m.n = v.size();
  if (v.empty()) return m;
  CompensatedSum s;
  for (double x : v) s.add(x);
  m.mean = s.value() / static_cast<double>(v.size());
  if (v.size() > 1) {
    CompensatedSum q;
    for (double x : v) q.add((x - m.mean) * (x - m.mean));
    m.sd = std::sqrt(q.value() / static_cast<double>(v.size() - 1));
    m.stderr_ = m.sd / std::sqrt(static_cast<double>(v.size()));
  }
  return m;
}

double normal_quantile(double p) {
  if (!(p > 0 && p < 1)) throw ValidationError("normal_quantile: p must lie in (0,1)");
  // Acklam's rational approximation refined by one Halley step
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                             1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                             6.680131188771972e+01, -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                             -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                             3.754408661907416e+00};
  double x;
  if (p < 0.02425) {
    const double q = std::sqrt(-2 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  } else if (p <= 1 - 0.02425) {
    const double q = p - 0.5, r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
  } else {
    const double q = std::sqrt(-2 * std::log(1 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  }
  const double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
  const double u = e * std::sqrt(2 * M_PI) * std::exp(x * x / 2);
  return x - u / (1 + x * u / 2);
}

}  // namespace brwlab
