#include "oed/design.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "oed/parallel.hpp"

namespace oed {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kEigCutoffRel = 1e-12;
constexpr double kEstimabilityTol = 1e-8;

}  // namespace

void ApproximateDesign::require_valid() const {
  if (support.empty()) throw std::invalid_argument("design: empty support");
  if (weights.size() != static_cast<Eigen::Index>(support.size()))
    throw std::invalid_argument("design: weight/support size mismatch");
  for (Eigen::Index i = 0; i < weights.size(); ++i)
    if (!(weights[i] > 0.0))
      throw std::invalid_argument("design: weights must be strictly positive");
  if (std::abs(weights.sum() - 1.0) > 1e-12)
    throw std::invalid_argument("design: weights must sum to 1");
  for (std::size_t i = 0; i < support.size(); ++i)
    for (std::size_t j = i + 1; j < support.size(); ++j)
      if (support[i] == support[j])
        throw std::invalid_argument("design: duplicate support points");
}

ApproximateDesign ApproximateDesign::uniform(std::vector<DesignPoint> points) {
  ApproximateDesign xi;
  xi.weights = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(points.size()),
                                         1.0 / static_cast<double>(points.size()));
  xi.support = std::move(points);
  return xi;
}

namespace {

void check_axis(const DesignSpace::Axis& a, const char* what) {
  if (!std::isfinite(a.lo) || !std::isfinite(a.hi) || !(a.lo < a.hi))
    throw std::invalid_argument(std::string("design space: bad bounds on ") + what);
  if (a.n < 2)
    throw std::invalid_argument(std::string("design space: need >= 2 grid points on ") + what);
}

}  // namespace

DesignSpace DesignSpace::time_interval(Axis time) {
  check_axis(time, "time");
  DesignSpace s;
  s.time_ = time;
  return s;
}

DesignSpace DesignSpace::temperature_time(Axis temperature, Axis time) {
  check_axis(temperature, "temperature");
  check_axis(time, "time");
  DesignSpace s;
  s.time_ = time;
  s.temp_ = temperature;
  s.time_hi_.assign(static_cast<std::size_t>(temperature.n), time.hi);
  return s;
}

DesignSpace DesignSpace::temperature_time(Axis temperature, int time_points,
                                          std::vector<double> time_hi_per_temperature,
                                          double time_lo) {
  check_axis(temperature, "temperature");
  if (time_points < 2) throw std::invalid_argument("design space: need >= 2 time points");
  if (time_hi_per_temperature.size() != static_cast<std::size_t>(temperature.n))
    throw std::invalid_argument("design space: one time bound per temperature node");
  double hi_max = -kInf;
  for (double hi : time_hi_per_temperature) {
    if (!std::isfinite(hi) || !(hi > time_lo))
      throw std::invalid_argument("design space: bad per-temperature time bound");
    hi_max = std::max(hi_max, hi);
  }
  DesignSpace s;
  s.time_ = Axis{time_lo, hi_max, time_points};
  s.temp_ = temperature;
  s.time_hi_ = std::move(time_hi_per_temperature);
  return s;
}

double DesignSpace::time_upper(int temp_index) const {
  if (!temp_) return time_.hi;
  return time_hi_.at(static_cast<std::size_t>(temp_index));
}

double DesignSpace::time_upper_max() const { return time_.hi; }

double DesignSpace::axis_range(int axis) const {
  if (dim() == 1) {
    if (axis != 0) throw std::out_of_range("axis");
    return time_.hi - time_.lo;
  }
  if (axis == 0) return temp_->hi - temp_->lo;
  if (axis == 1) return time_.hi - time_.lo;
  throw std::out_of_range("axis");
}

int DesignSpace::grid_size() const {
  return temp_ ? temp_->n * time_.n : time_.n;
}

namespace {

double lerp_node(double lo, double hi, int i, int n) {
  if (i == n - 1) return hi;
  return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
}

}  // namespace

std::vector<DesignPoint> DesignSpace::grid() const {
  std::vector<DesignPoint> pts;
  pts.reserve(static_cast<std::size_t>(grid_size()));
  if (!temp_) {
    for (int i = 0; i < time_.n; ++i)
      pts.push_back(DesignPoint::time(lerp_node(time_.lo, time_.hi, i, time_.n)));
    return pts;
  }
  for (int a = 0; a < temp_->n; ++a) {
    const double T = lerp_node(temp_->lo, temp_->hi, a, temp_->n);
    const double hi = time_hi_[static_cast<std::size_t>(a)];
    for (int i = 0; i < time_.n; ++i)
      pts.push_back(DesignPoint::temp_time(T, lerp_node(time_.lo, hi, i, time_.n)));
  }
  return pts;
}

bool DesignSpace::contains(const DesignPoint& p, double slack) const {
  if (p.dim() != dim()) return false;
  const double t = p.obs_time();
  if (t < time_.lo - slack) return false;
  if (!temp_) return t <= time_.hi + slack;
  const double T = p.temperature();
  if (T < temp_->lo - slack || T > temp_->hi + slack) return false;
  // conservative: accept any time below the per-temperature bound nearest T
  const double pos = (T - temp_->lo) / (temp_->hi - temp_->lo) *
                     static_cast<double>(temp_->n - 1);
  const int idx = std::clamp(static_cast<int>(std::lround(pos)), 0, temp_->n - 1);
  return t <= time_hi_[static_cast<std::size_t>(idx)] + slack;
}

GradientTable GradientTable::build(const DesignSpace& space, const GrowthModel& model,
                                   const Eigen::VectorXd& theta) {
  GradientTable table;
  table.points = space.grid();
  const int n = table.size();
  const int k = model.num_params();
  table.g.resize(n, k);
  std::vector<char> one_sided(static_cast<std::size_t>(n), 0);
  parallel_for(n, [&](int lo, int hi) {
    for (int i = lo; i < hi; ++i) {
      GradientResult r = model_gradient(model, table.points[static_cast<std::size_t>(i)], theta);
      table.g.row(i) = r.f.transpose();
      one_sided[static_cast<std::size_t>(i)] = r.one_sided ? 1 : 0;
    }
  });
  table.any_one_sided =
      std::any_of(one_sided.begin(), one_sided.end(), [](char c) { return c != 0; });
  return table;
}

void InformationMatrix::require_valid(double sym_tol, double eig_tol) const {
  if (m.rows() != m.cols()) throw std::invalid_argument("information matrix: not square");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > sym_tol * scale)
    throw std::invalid_argument("information matrix: not symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < eig_tol * scale)
    throw std::invalid_argument("information matrix: negative eigenvalue");
}

InformationMatrix information_matrix(const ApproximateDesign& xi,
                                     const GrowthModel& model,
                                     const Eigen::VectorXd& theta) {
  xi.require_valid();
  const int k = model.num_params();
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(k, k);
  for (int i = 0; i < xi.size(); ++i) {
    const Eigen::VectorXd f =
        model_gradient(model, xi.support[static_cast<std::size_t>(i)], theta).f;
    m.selfadjointView<Eigen::Lower>().rankUpdate(f, xi.weights[i]);
  }
  m.triangularView<Eigen::StrictlyUpper>() = m.transpose();
  return InformationMatrix{std::move(m)};
}

InformationMatrix information_matrix(const Eigen::VectorXd& weights,
                                     const Eigen::MatrixXd& gradients) {
  if (weights.size() != gradients.rows())
    throw std::invalid_argument("information_matrix: size mismatch");
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(gradients.cols(), gradients.cols());
  for (Eigen::Index i = 0; i < weights.size(); ++i) {
    if (weights[i] == 0.0) continue;
    m.selfadjointView<Eigen::Lower>().rankUpdate(gradients.row(i).transpose(), weights[i]);
  }
  m.triangularView<Eigen::StrictlyUpper>() = m.transpose();
  return InformationMatrix{std::move(m)};
}

Criterion Criterion::d_optimal() { return Criterion{}; }

Criterion Criterion::c_optimal(Eigen::VectorXd c) {
  if (c.size() == 0 || c.norm() == 0.0)
    throw std::invalid_argument("criterion: c must be nonzero");
  Criterion crit;
  crit.kind_ = Kind::c;
  crit.k_ = std::move(c);
  return crit;
}

Criterion Criterion::linear(Eigen::MatrixXd K, LinearMode mode) {
  if (K.size() == 0) throw std::invalid_argument("criterion: empty K");
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(K);
  const double tol = 1e-12 * svd.singularValues()[0];
  if (svd.singularValues().minCoeff() <= tol)
    throw std::invalid_argument("criterion: K must have full column rank");
  Criterion crit;
  crit.kind_ = Kind::linear;
  crit.k_ = std::move(K);
  crit.lmode_ = mode;
  return crit;
}

std::string Criterion::describe() const {
  switch (kind_) {
    case Kind::D:
      return "D";
    case Kind::c:
      return "c";
    case Kind::linear:
      return lmode_ == LinearMode::trace ? "L-trace" : "L-det";
  }
  return "?";
}

const char* to_string(EffConvention c) {
  return c == EffConvention::raw ? "raw" : "homogeneous";
}

CriterionContext::CriterionContext(const InformationMatrix& M, const Criterion& crit)
    : crit_(crit) {
  const int k = M.dim();
  if (crit.kind() != Criterion::Kind::D && crit.coefficients().rows() != k)
    throw std::invalid_argument("criterion dimension does not match information matrix");

  // Jacobi equilibration keeps mixed parameter scales (hours vs. rate
  // coefficients) from swamping the eigendecomposition.
  scale_.resize(k);
  for (int i = 0; i < k; ++i) {
    const double d = M.m(i, i);
    scale_[i] = d > 0.0 ? 1.0 / std::sqrt(d) : 1.0;
  }
  const Eigen::MatrixXd m_eq = scale_.asDiagonal() * M.m * scale_.asDiagonal();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m_eq);
  const Eigen::VectorXd& ev = es.eigenvalues();
  const double cutoff = std::max(ev.cwiseAbs().maxCoeff(), 0.0) * kEigCutoffRel;

  bool full_rank = true;
  log_det_ = 0.0;
  Eigen::VectorXd inv_ev(k);
  for (int i = 0; i < k; ++i) {
    if (ev[i] > cutoff && cutoff > 0.0) {
      inv_ev[i] = 1.0 / ev[i];
      log_det_ += std::log(ev[i]);
    } else {
      inv_ev[i] = 0.0;
      full_rank = false;
    }
  }
  // |M| = |M_eq| * prod(1/scale^2)
  for (int i = 0; i < k; ++i) log_det_ -= 2.0 * std::log(scale_[i]);
  if (!full_rank) log_det_ = -kInf;
  singular_ = !full_rank;

  m_inv_eq_ = es.eigenvectors() * inv_ev.asDiagonal() * es.eigenvectors().transpose();

  switch (crit_.kind()) {
    case Criterion::Kind::D: {
      estimable_ = full_rank;
      value_ = full_rank ? -log_det_ : kInf;
      threshold_ = static_cast<double>(k);
      break;
    }
    case Criterion::Kind::c:
    case Criterion::Kind::linear: {
      // coefficient columns move to the equilibrated basis: K_eq = S K
      Eigen::MatrixXd K_eq = scale_.asDiagonal() * crit_.coefficients();
      z_eq_ = m_inv_eq_ * K_eq;
      estimable_ = true;
      for (Eigen::Index j = 0; j < K_eq.cols(); ++j) {
        const double resid = (m_eq * z_eq_.col(j) - K_eq.col(j)).norm();
        if (resid > kEstimabilityTol * K_eq.col(j).norm()) estimable_ = false;
      }
      if (!estimable_) {
        value_ = kInf;
        threshold_ = kInf;
        break;
      }
      const Eigen::MatrixXd block = K_eq.transpose() * z_eq_;  // K' M^-1 K
      if (crit_.kind() == Criterion::Kind::c ||
          crit_.linear_mode() == Criterion::LinearMode::trace) {
        value_ = block.trace();
        threshold_ = value_;
      } else {
        Eigen::LLT<Eigen::MatrixXd> llt(block);
        if (llt.info() != Eigen::Success) {
          estimable_ = false;
          value_ = kInf;
          threshold_ = kInf;
          break;
        }
        double ld = 0.0;
        for (Eigen::Index i = 0; i < block.rows(); ++i)
          ld += 2.0 * std::log(llt.matrixL()(i, i));
        value_ = ld;
        threshold_ = static_cast<double>(block.rows());
        block_inv_ = llt.solve(Eigen::MatrixXd::Identity(block.rows(), block.cols()));
      }
      break;
    }
  }
}

double CriterionContext::value() const { return value_; }

double CriterionContext::threshold() const { return threshold_; }

double CriterionContext::gain(const Eigen::VectorXd& f) const {
  const Eigen::VectorXd f_eq = scale_.asDiagonal() * f;
  switch (crit_.kind()) {
    case Criterion::Kind::D:
      if (singular_)
        throw std::domain_error("sensitivity: singular information matrix under D");
      return f_eq.dot(m_inv_eq_ * f_eq);
    case Criterion::Kind::c: {
      const double t = z_eq_.col(0).dot(f_eq);
      return t * t;
    }
    case Criterion::Kind::linear: {
      const Eigen::VectorXd proj = z_eq_.transpose() * f_eq;
      if (crit_.linear_mode() == Criterion::LinearMode::trace) return proj.squaredNorm();
      return proj.dot(block_inv_ * proj);
    }
  }
  return 0.0;
}

double CriterionContext::log_det_m() const { return log_det_; }

CriterionValue criterion_value(const InformationMatrix& M, const Criterion& crit) {
  CriterionContext ctx(M, crit);
  return CriterionValue{ctx.value(), ctx.estimable()};
}

double sensitivity(const DesignPoint& x, const ApproximateDesign& xi,
                   const GrowthModel& model, const Eigen::VectorXd& theta,
                   const Criterion& crit) {
  CriterionContext ctx(information_matrix(xi, model, theta), crit);
  if (!ctx.estimable())
    throw std::domain_error("sensitivity: criterion not estimable under this design");
  return ctx.phi(model_gradient(model, x, theta).f);
}

namespace {

// Deterministic grid scan for the largest gain: per-row values are
// independent of chunking, merge prefers the smaller index on ties.
struct ScanResult {
  double max_gain = -kInf;
  int argmax = 0;
};

ScanResult scan_max_gain(const CriterionContext& ctx, const Eigen::MatrixXd& g) {
  const int n = static_cast<int>(g.rows());
  const int workers = std::max(1, std::min(max_threads(), n));
  std::vector<ScanResult> partial(static_cast<std::size_t>(workers));
  const int chunk = (n + workers - 1) / workers;
  parallel_for(n, [&](int lo, int hi) {
    const int slot = lo / chunk;
    ScanResult r;
    for (int i = lo; i < hi; ++i) {
      const double v = ctx.gain(g.row(i).transpose());
      if (v > r.max_gain) {
        r.max_gain = v;
        r.argmax = i;
      }
    }
    partial[static_cast<std::size_t>(slot)] = r;
  });
  ScanResult best;
  for (const ScanResult& r : partial)
    if (r.max_gain > best.max_gain ||
        (r.max_gain == best.max_gain && r.argmax < best.argmax))
      best = r;
  return best;
}

}  // namespace

GetReport verify_optimality(const ApproximateDesign& xi, const GradientTable& grid,
                            const GrowthModel& model, const Eigen::VectorXd& theta,
                            const Criterion& crit, double tol) {
  xi.require_valid();
  CriterionContext ctx(information_matrix(xi, model, theta), crit);
  GetReport report;
  report.tol = tol;
  if (!ctx.estimable()) {
    report.max_violation = kInf;
    report.passed = false;
    return report;
  }
  const ScanResult scan = scan_max_gain(ctx, grid.g);
  report.max_violation = scan.max_gain - ctx.threshold();  // -phi at the argmax
  report.argmax = grid.points[static_cast<std::size_t>(scan.argmax)];
  report.support_phi.reserve(static_cast<std::size_t>(xi.size()));
  double worst_support = 0.0;
  for (const DesignPoint& p : xi.support) {
    const double phi = ctx.phi(model_gradient(model, p, theta).f);
    report.support_phi.push_back(phi);
    worst_support = std::max(worst_support, std::abs(phi));
  }
  report.passed = report.max_violation <= tol && worst_support <= tol;
  return report;
}

GetReport verify_optimality(const ApproximateDesign& xi, const DesignSpace& space,
                            const GrowthModel& model, const Eigen::VectorXd& theta,
                            const Criterion& crit, double tol) {
  return verify_optimality(xi, GradientTable::build(space, model, theta), model, theta,
                           crit, tol);
}

double efficiency(const InformationMatrix& M, const InformationMatrix& M_ref,
                  const Criterion& crit, EffConvention conv) {
  CriterionContext ctx(M, crit);
  CriterionContext ref(M_ref, crit);
  switch (crit.kind()) {
    case Criterion::Kind::D: {
      if (!ctx.estimable()) return 0.0;
      if (!ref.estimable())
        throw std::invalid_argument("efficiency: reference design is singular");
      const double diff = ctx.log_det_m() - ref.log_det_m();
      return std::exp(conv == EffConvention::homogeneous ? diff / ctx.dim() : diff);
    }
    case Criterion::Kind::c:
      if (!ctx.estimable()) return 0.0;
      if (!ref.estimable())
        throw std::invalid_argument("efficiency: reference criterion not estimable");
      return ref.value() / ctx.value();
    case Criterion::Kind::linear:
      if (!ctx.estimable()) return 0.0;
      if (!ref.estimable())
        throw std::invalid_argument("efficiency: reference criterion not estimable");
      if (crit.linear_mode() == Criterion::LinearMode::trace)
        return ref.value() / ctx.value();
      {
        const double diff = ref.value() - ctx.value();
        const double s = static_cast<double>(crit.coefficients().cols());
        return std::exp(conv == EffConvention::homogeneous ? diff / s : diff);
      }
  }
  return 0.0;
}

double efficiency(const ApproximateDesign& xi, const ApproximateDesign& xi_ref,
                  const GrowthModel& model, const Eigen::VectorXd& theta,
                  const Criterion& crit, EffConvention conv) {
  return efficiency(information_matrix(xi, model, theta),
                    information_matrix(xi_ref, model, theta), crit, conv);
}

double atwood_lower_bound(const ApproximateDesign& xi, const GradientTable& grid,
                          const GrowthModel& model, const Eigen::VectorXd& theta,
                          const Criterion& crit) {
  CriterionContext ctx(information_matrix(xi, model, theta), crit);
  if (!ctx.estimable())
    throw std::domain_error("atwood bound: criterion not estimable under this design");
  const ScanResult scan = scan_max_gain(ctx, grid.g);
  return ctx.threshold() / scan.max_gain;
}

}  // namespace oed
