#ifndef OED_MODELS_HPP
#define OED_MODELS_HPP

#include <Eigen/Dense>
#include <memory>
#include <string>
#include <vector>

#include "oed/design_point.hpp"

namespace oed {

// How log-concentration inputs are interpreted. `natural`: values are taken
// as natural-log concentrations exactly as written. `decimal`: values are
// log10 concentrations; the response is evaluated on the natural-log scale
// internally (span scaled by ln 10) and mapped back to log10 units.
enum class LogConvention { natural, decimal };

const char* to_string(LogConvention c);

struct BaranyiParams {
  double y0 = 0.0;      // initial log-concentration
  double y_max = 0.0;   // asymptotic log-concentration
  double mu_max = 0.0;  // maximum specific growth rate (1/h)
  double lambda = 0.0;  // lag duration (h)

  bool valid() const { return y_max > y0 && mu_max > 0.0 && lambda >= 0.0; }
  void require_valid() const;
};

struct RatkowskyParams {
  double b = 0.0;      // regression coefficient (1/(h^0.5 degC))
  double t_min = 0.0;  // theoretical minimum growth temperature (degC)

  bool valid() const { return b > 0.0; }
  void require_valid() const;
};

struct ExtendedParams {
  double y0 = 0.0;
  double y_max = 0.0;
  double lambda = 0.0;
  double b = 0.0;
  double t_min = 0.0;

  bool valid(double min_design_temperature) const {
    return y_max > y0 && lambda >= 0.0 && b > 0.0 && t_min < min_design_temperature;
  }
};

// Growth response at time t (hours). Evaluated in a log-sum-exp form so
// large mu*t products cannot overflow. y(0) == y0 exactly and
// y(t) -> y_max as t -> infinity.
double baranyi_response(double t, const BaranyiParams& p,
                        LogConvention conv = LogConvention::natural);

// mu_max implied by temperature T: the square of b*(T - t_min).
// T <= t_min is outside the model's validity range.
double ratkowsky_mu(double temperature, const RatkowskyParams& p);

double extended_response(double temperature, double t, const ExtendedParams& p,
                         LogConvention conv = LogConvention::natural);

// A response surface eta(x, theta) over the design space, exposing enough
// structure (parameter ordering, validity domain) for finite-difference
// gradients. Implementations are stateless value types; all evaluation is
// pure and thread-safe.
class GrowthModel {
 public:
  virtual ~GrowthModel() = default;

  virtual int point_dim() const = 0;
  virtual int num_params() const = 0;
  virtual const std::vector<std::string>& param_names() const = 0;
  virtual double response(const DesignPoint& x, const Eigen::VectorXd& theta) const = 0;
  virtual bool params_valid(const Eigen::VectorXd& theta) const = 0;
  virtual std::unique_ptr<GrowthModel> clone() const = 0;

  int param_index(const std::string& name) const;
};

// Parameter order: (y0, y_max, mu_max, lambda).
class BaranyiModel final : public GrowthModel {
 public:
  explicit BaranyiModel(LogConvention conv = LogConvention::natural) : conv_(conv) {}

  int point_dim() const override { return 1; }
  int num_params() const override { return 4; }
  const std::vector<std::string>& param_names() const override;
  double response(const DesignPoint& x, const Eigen::VectorXd& theta) const override;
  bool params_valid(const Eigen::VectorXd& theta) const override;
  std::unique_ptr<GrowthModel> clone() const override {
    return std::make_unique<BaranyiModel>(*this);
  }

  LogConvention convention() const { return conv_; }

  static Eigen::VectorXd pack(const BaranyiParams& p);
  static BaranyiParams unpack(const Eigen::VectorXd& theta);

 private:
  LogConvention conv_;
};

// Growth in temperature and time, with the rate parameter replaced by the
// square-root secondary model. Parameter order: (y0, y_max, lambda, b, t_min).
class ExtendedModel final : public GrowthModel {
 public:
  explicit ExtendedModel(LogConvention conv = LogConvention::natural,
                         double min_design_temperature = 4.0)
      : conv_(conv), min_temp_(min_design_temperature) {}

  int point_dim() const override { return 2; }
  int num_params() const override { return 5; }
  const std::vector<std::string>& param_names() const override;
  double response(const DesignPoint& x, const Eigen::VectorXd& theta) const override;
  bool params_valid(const Eigen::VectorXd& theta) const override;
  std::unique_ptr<GrowthModel> clone() const override {
    return std::make_unique<ExtendedModel>(*this);
  }

  LogConvention convention() const { return conv_; }
  double min_design_temperature() const { return min_temp_; }

  static Eigen::VectorXd pack(const ExtendedParams& p);
  static ExtendedParams unpack(const Eigen::VectorXd& theta);

 private:
  LogConvention conv_;
  double min_temp_;
};

struct GradientResult {
  Eigen::VectorXd f;            // df/dtheta_i at theta
  bool one_sided = false;       // some component fell back to a one-sided step
};

// Central finite differences with per-parameter step max(|theta_i|,1)*eps^(1/3).
// Steps that would leave the parameter validity domain fall back to a
// one-sided difference and are flagged.
GradientResult model_gradient(const GrowthModel& model, const DesignPoint& x,
                              const Eigen::VectorXd& theta);

}  // namespace oed

#endif
