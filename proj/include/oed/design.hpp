#ifndef OED_DESIGN_HPP
#define OED_DESIGN_HPP

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "oed/design_point.hpp"
#include "oed/models.hpp"

namespace oed {

// Discrete probability measure on the design space: support points with
// strictly positive weights summing to one.
struct ApproximateDesign {
  std::vector<DesignPoint> support;
  Eigen::VectorXd weights;

  int size() const { return static_cast<int>(support.size()); }
  void require_valid() const;

  static ApproximateDesign uniform(std::vector<DesignPoint> points);
};

// Gridded design space: an observation-time interval, optionally crossed
// with a temperature interval. The time upper bound may vary per
// temperature node (growth slows as temperature drops, so the horizon
// containing the stationary phase stretches).
class DesignSpace {
 public:
  struct Axis {
    double lo = 0.0;
    double hi = 1.0;
    int n = 2;
  };

  static DesignSpace time_interval(Axis time);
  static DesignSpace temperature_time(Axis temperature, Axis time);
  static DesignSpace temperature_time(Axis temperature, int time_points,
                                      std::vector<double> time_hi_per_temperature,
                                      double time_lo = 0.0);

  int dim() const { return temp_ ? 2 : 1; }
  const Axis& time_axis() const { return time_; }
  const std::optional<Axis>& temperature_axis() const { return temp_; }

  double time_upper(int temp_index) const;
  double time_upper_max() const;
  double axis_range(int axis) const;  // axis 0 = temperature when 2-D

  int grid_size() const;
  std::vector<DesignPoint> grid() const;  // lexicographic, temperature-major
  bool contains(const DesignPoint& p, double slack = 1e-9) const;

 private:
  Axis time_;
  std::optional<Axis> temp_;
  std::vector<double> time_hi_;  // per temperature node when 2-D
};

// Gradient vectors f(x) for every grid node, precomputed once per
// (space, model, theta) triple.
struct GradientTable {
  std::vector<DesignPoint> points;
  Eigen::MatrixXd g;  // one row per point
  bool any_one_sided = false;

  int size() const { return static_cast<int>(points.size()); }
  static GradientTable build(const DesignSpace& space, const GrowthModel& model,
                             const Eigen::VectorXd& theta);
};

struct InformationMatrix {
  Eigen::MatrixXd m;

  int dim() const { return static_cast<int>(m.rows()); }
  void require_valid(double sym_tol = 1e-12, double eig_tol = -1e-10) const;
};

InformationMatrix information_matrix(const ApproximateDesign& xi,
                                     const GrowthModel& model,
                                     const Eigen::VectorXd& theta);
InformationMatrix information_matrix(const Eigen::VectorXd& weights,
                                     const Eigen::MatrixXd& gradients);

// Optimality criterion. D targets the joint parameter estimate; c the
// variance of a single linear combination c'theta; linear criteria cover
// several combinations at once (columns of K), either as the summed
// variance (trace) or as the generalized variance of the subset
// (block determinant).
class Criterion {
 public:
  enum class Kind { D, c, linear };
  enum class LinearMode { trace, block_det };

  static Criterion d_optimal();
  static Criterion c_optimal(Eigen::VectorXd c);
  static Criterion linear(Eigen::MatrixXd K, LinearMode mode = LinearMode::trace);

  Kind kind() const { return kind_; }
  const Eigen::MatrixXd& coefficients() const { return k_; }
  LinearMode linear_mode() const { return lmode_; }
  std::string describe() const;

 private:
  Kind kind_ = Kind::D;
  Eigen::MatrixXd k_;  // empty for D; k x 1 for c; k x m for linear
  LinearMode lmode_ = LinearMode::trace;
};

enum class EffConvention { raw, homogeneous };

const char* to_string(EffConvention c);

// Shared machinery for criterion values, sensitivity functions and the
// multiplicative weight update: factorizes M once (Jacobi-equilibrated
// spectral decomposition, so parameter scales spanning several orders of
// magnitude stay well conditioned) and answers pointwise queries.
class CriterionContext {
 public:
  CriterionContext(const InformationMatrix& M, const Criterion& crit);

  // False when M is singular under D, or c (a column of K) lies outside
  // the range of M.
  bool estimable() const { return estimable_; }

  // Value being minimized. Log scale for D (-log|M|) and the block
  // determinant (log det K'M^-1 K); plain variance units for c/trace.
  double value() const;

  // GET threshold: k for D, Phi for c/trace, s for the block determinant.
  // Identity: sum_i w_i gain(f_i) == threshold for any design with matrix M.
  double threshold() const;

  double gain(const Eigen::VectorXd& f) const;           // psi(x, xi)
  double phi(const Eigen::VectorXd& f) const { return threshold() - gain(f); }

  double log_det_m() const;  // -inf when singular
  int dim() const { return static_cast<int>(scale_.size()); }

 private:
  Criterion crit_;
  Eigen::VectorXd scale_;      // Jacobi equilibration diag
  Eigen::MatrixXd m_inv_eq_;   // pseudo-inverse of equilibrated M
  Eigen::MatrixXd z_eq_;       // m_inv_eq * K_eq (c / linear)
  Eigen::MatrixXd block_inv_;  // (K'M^-1K)^-1 (block_det)
  double value_ = 0.0;
  double threshold_ = 0.0;
  double log_det_ = 0.0;
  bool estimable_ = false;
  bool singular_ = false;
};

struct CriterionValue {
  double value = 0.0;     // +inf when not estimable
  bool estimable = true;  // flagged per the c-estimability check
};

CriterionValue criterion_value(const InformationMatrix& M, const Criterion& crit);

double sensitivity(const DesignPoint& x, const ApproximateDesign& xi,
                   const GrowthModel& model, const Eigen::VectorXd& theta,
                   const Criterion& crit);

struct GetReport {
  double max_violation = 0.0;          // largest -phi over the grid (negative = margin)
  DesignPoint argmax;                  // grid point attaining it
  std::vector<double> support_phi;     // phi at each support point
  double tol = 0.0;
  bool passed = false;
};

GetReport verify_optimality(const ApproximateDesign& xi, const GradientTable& grid,
                            const GrowthModel& model, const Eigen::VectorXd& theta,
                            const Criterion& crit, double tol);
GetReport verify_optimality(const ApproximateDesign& xi, const DesignSpace& space,
                            const GrowthModel& model, const Eigen::VectorXd& theta,
                            const Criterion& crit, double tol);

// Criterion-ratio efficiency of xi against a reference design. `raw` is the
// plain criterion ratio; `homogeneous` takes the per-parameter root for the
// determinant-type criteria (D and block_det) and coincides with `raw`
// otherwise. Singular candidate designs score 0.
double efficiency(const InformationMatrix& M, const InformationMatrix& M_ref,
                  const Criterion& crit, EffConvention conv);
double efficiency(const ApproximateDesign& xi, const ApproximateDesign& xi_ref,
                  const GrowthModel& model, const Eigen::VectorXd& theta,
                  const Criterion& crit, EffConvention conv);

// Efficiency lower bound from the design itself: threshold / max gain over
// the grid. Bounds the homogeneous efficiency for determinant-type criteria
// and the raw efficiency for c/trace. Equals 1 at an optimum.
double atwood_lower_bound(const ApproximateDesign& xi, const GradientTable& grid,
                          const GrowthModel& model, const Eigen::VectorXd& theta,
                          const Criterion& crit);

}  // namespace oed

#endif
