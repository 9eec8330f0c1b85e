#pragma once

// Reference computations written straight from the textbook definitions, in long
// double and without sharing code with the library.

#include <cmath>
#include <cstddef>
#include <vector>

namespace oracle {

/// Wilder RSI at bar t (t >= n): closed-form sum of the smoothing recursion.
inline double rsi_at(const std::vector<double>& p, std::size_t n, std::size_t t) {
  long double g0 = 0, l0 = 0;
  for (std::size_t k = 1; k <= n; ++k) {
    const long double d = static_cast<long double>(p[k]) - p[k - 1];
    if (d > 0) g0 += d;
    if (d < 0) l0 -= d;
  }
  g0 /= n;
  l0 /= n;
  const long double keep = 1.0L - 1.0L / n;
  long double gain = std::pow(keep, static_cast<long double>(t - n)) * g0;
  long double loss = std::pow(keep, static_cast<long double>(t - n)) * l0;
  for (std::size_t k = n + 1; k <= t; ++k) {
    const long double d = static_cast<long double>(p[k]) - p[k - 1];
    const long double w = std::pow(keep, static_cast<long double>(t - k)) / n;
    if (d > 0) gain += w * d;
    if (d < 0) loss -= w * d;
  }
  if (loss == 0) return gain == 0 ? 50.0 : 100.0;
  return static_cast<double>(100.0L * gain / (gain + loss));
}

/// CCI at bar t from typical prices: (tp - sma) / (c * mean |tp - sma|).
inline double cci_at(const std::vector<double>& tp, std::size_t n, double c, std::size_t t) {
  long double sma = 0;
  for (std::size_t j = t + 1 - n; j <= t; ++j) sma += tp[j];
  sma /= n;
  long double mad = 0;
  for (std::size_t j = t + 1 - n; j <= t; ++j) mad += std::fabs(tp[j] - sma);
  mad /= n;
  if (mad == 0) return 0.0;
  return static_cast<double>((tp[t] - sma) / (c * mad));
}

/// SMA-seeded EMA at index t, expanded into explicit weights:
/// (1-a)^(t-n+1) * SMA(x[0..n)) + sum_{k=n..t} a (1-a)^(t-k) x[k].
inline double ema_at(const std::vector<double>& x, std::size_t n, std::size_t t) {
  const long double a = 2.0L / (n + 1.0L);
  long double sma = 0;
  for (std::size_t k = 0; k < n; ++k) sma += x[k];
  sma /= n;
  long double v = std::pow(1.0L - a, static_cast<long double>(t + 1 - n)) * sma;
  for (std::size_t k = n; k <= t; ++k) v += a * std::pow(1.0L - a, static_cast<long double>(t - k)) * x[k];
  return static_cast<double>(v);
}

inline double macd_at(const std::vector<double>& p, std::size_t fast, std::size_t slow, std::size_t t) {
  return ema_at(p, fast, t) - ema_at(p, slow, t);
}

inline double normalize(double p, double lo, double hi) {
  return static_cast<double>((2.0L * p - (static_cast<long double>(hi) + lo)) / (static_cast<long double>(hi) - lo));
}

inline double sigmoid(long double z) { return static_cast<double>(1.0L / (1.0L + std::exp(-z))); }

/// One-unit LSTM cell with scalar weights.
struct ScalarLstm {
  double wf, wi, wo, wc;
  double uf, ui, uo, uc;
  double bf, bi, bo, bc;

  void step(double x, double& h, double& c) const {
    const double f = sigmoid(wf * x + uf * h + bf);
    const double i = sigmoid(wi * x + ui * h + bi);
    const double o = sigmoid(wo * x + uo * h + bo);
    const double g = std::tanh(wc * x + uc * h + bc);
    c = f * c + i * g;
    h = o * std::tanh(c);
  }
};

/// Bias-corrected Adam on a scalar, written out step by step.
inline std::vector<double> adam_path(double theta, const std::vector<double>& grads, double lr, double b1,
                                     double b2, double eps) {
  std::vector<double> out;
  long double m = 0, v = 0, th = theta;
  for (std::size_t t = 1; t <= grads.size(); ++t) {
    const long double g = grads[t - 1];
    m = b1 * m + (1 - b1) * g;
    v = b2 * v + (1 - b2) * g * g;
    const long double mh = m / (1 - std::pow(static_cast<long double>(b1), static_cast<long double>(t)));
    const long double vh = v / (1 - std::pow(static_cast<long double>(b2), static_cast<long double>(t)));
    th -= lr * mh / (std::sqrt(vh) + eps);
    out.push_back(static_cast<double>(th));
  }
  return out;
}

}  // namespace oracle
