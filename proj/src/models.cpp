#include "oed/models.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace oed {
namespace {

constexpr double kLn10 = 2.302585092994045684;

// log(exp(a) + exp(b)) without overflow; tolerates -inf arguments.
double log_add_exp(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(std::min(a, b) - m));
}

}  // namespace

const char* to_string(LogConvention c) {
  return c == LogConvention::natural ? "natural" : "decimal";
}

void BaranyiParams::require_valid() const {
  if (!(y_max > y0)) throw std::invalid_argument("baranyi: y_max must exceed y0");
  if (!(mu_max > 0.0)) throw std::invalid_argument("baranyi: mu_max must be positive");
  if (!(lambda >= 0.0)) throw std::invalid_argument("baranyi: lambda must be nonnegative");
}

void RatkowskyParams::require_valid() const {
  if (!(b > 0.0)) throw std::invalid_argument("ratkowsky: b must be positive");
}

double baranyi_response(double t, const BaranyiParams& p, LogConvention conv) {
  p.require_valid();
  if (!(t >= 0.0)) throw std::domain_error("baranyi: t must be nonnegative");
  if (t == 0.0) return p.y0;  // F(0) = 0 identically

  const double scale = conv == LogConvention::decimal ? kLn10 : 1.0;
  const double span = (p.y_max - p.y0) * scale;
  const double mu = p.mu_max;

  // F(t) = t + ln(e^{-mu t} + e^{-mu lambda} - e^{-mu(t+lambda)}) / mu.
  // The argument equals e^{-mu lambda} + e^{-mu t}(1 - e^{-mu lambda}),
  // a sum of nonnegative terms, evaluated in log form when exponents are
  // large and directly otherwise.
  const double a = -mu * t;
  const double b = -mu * p.lambda;
  double log_s;
  if (a > -700.0 && b > -700.0) {
    log_s = std::log(std::exp(b) + std::exp(a) * (-std::expm1(b)));
  } else {
    const double log_u =
        b > -1e-300 ? -std::numeric_limits<double>::infinity()
                    : a + std::log(-std::expm1(b));
    log_s = log_add_exp(log_u, b);
  }
  const double growth = mu * t + log_s;  // mu * F(t), nonnegative

  // y = y0 + [G - ln(1 - e^{-span} + e^{G-span})] / scale
  const double adjust =
      log_add_exp(std::log1p(-std::exp(-span)), growth - span);
  return p.y0 + (growth - adjust) / scale;
}

double ratkowsky_mu(double temperature, const RatkowskyParams& p) {
  p.require_valid();
  if (!(temperature > p.t_min))
    throw std::domain_error("ratkowsky: temperature must exceed t_min");
  const double root = p.b * (temperature - p.t_min);
  return root * root;
}

double extended_response(double temperature, double t, const ExtendedParams& p,
                         LogConvention conv) {
  const double mu = ratkowsky_mu(temperature, RatkowskyParams{p.b, p.t_min});
  return baranyi_response(t, BaranyiParams{p.y0, p.y_max, mu, p.lambda}, conv);
}

int GrowthModel::param_index(const std::string& name) const {
  const auto& names = param_names();
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return static_cast<int>(i);
  throw std::invalid_argument("unknown parameter name: " + name);
}

const std::vector<std::string>& BaranyiModel::param_names() const {
  static const std::vector<std::string> names{"y0", "y_max", "mu_max", "lambda"};
  return names;
}

double BaranyiModel::response(const DesignPoint& x, const Eigen::VectorXd& theta) const {
  return baranyi_response(x.obs_time(), unpack(theta), conv_);
}

bool BaranyiModel::params_valid(const Eigen::VectorXd& theta) const {
  return theta.size() == 4 && unpack(theta).valid();
}

Eigen::VectorXd BaranyiModel::pack(const BaranyiParams& p) {
  Eigen::VectorXd v(4);
  v << p.y0, p.y_max, p.mu_max, p.lambda;
  return v;
}

BaranyiParams BaranyiModel::unpack(const Eigen::VectorXd& theta) {
  return BaranyiParams{theta[0], theta[1], theta[2], theta[3]};
}

const std::vector<std::string>& ExtendedModel::param_names() const {
  static const std::vector<std::string> names{"y0", "y_max", "lambda", "b", "t_min"};
  return names;
}

double ExtendedModel::response(const DesignPoint& x, const Eigen::VectorXd& theta) const {
  if (x.dim() != 2) throw std::invalid_argument("extended model needs (T, t) points");
  return extended_response(x.temperature(), x.obs_time(), unpack(theta), conv_);
}

bool ExtendedModel::params_valid(const Eigen::VectorXd& theta) const {
  return theta.size() == 5 && unpack(theta).valid(min_temp_);
}

Eigen::VectorXd ExtendedModel::pack(const ExtendedParams& p) {
  Eigen::VectorXd v(5);
  v << p.y0, p.y_max, p.lambda, p.b, p.t_min;
  return v;
}

ExtendedParams ExtendedModel::unpack(const Eigen::VectorXd& theta) {
  return ExtendedParams{theta[0], theta[1], theta[2], theta[3], theta[4]};
}

GradientResult model_gradient(const GrowthModel& model, const DesignPoint& x,
                              const Eigen::VectorXd& theta) {
  if (!model.params_valid(theta))
    throw std::invalid_argument("model_gradient: invalid nominal parameters");

  const int k = model.num_params();
  static const double step_factor =
      std::cbrt(std::numeric_limits<double>::epsilon());

  GradientResult result;
  result.f.resize(k);
  Eigen::VectorXd work = theta;
  for (int i = 0; i < k; ++i) {
    double h = std::max(std::abs(theta[i]), 1.0) * step_factor;
    // snap to a representable step
    volatile double bumped = theta[i] + h;
    h = bumped - theta[i];

    work[i] = theta[i] + h;
    const bool plus_ok = model.params_valid(work);
    work[i] = theta[i] - h;
    const bool minus_ok = model.params_valid(work);

    if (plus_ok && minus_ok) {
      work[i] = theta[i] + h;
      const double fp = model.response(x, work);
      work[i] = theta[i] - h;
      const double fm = model.response(x, work);
      result.f[i] = (fp - fm) / (2.0 * h);
    } else if (plus_ok || minus_ok) {
      const double f0 = model.response(x, theta);
      work[i] = plus_ok ? theta[i] + h : theta[i] - h;
      const double f1 = model.response(x, work);
      result.f[i] = (f1 - f0) / (work[i] - theta[i]);
      result.one_sided = true;
    } else {
      throw std::domain_error(
          "model_gradient: no valid finite-difference step for parameter " +
          model.param_names()[static_cast<std::size_t>(i)]);
    }
    work[i] = theta[i];
  }
  return result;
}

}  // namespace oed
