#pragma once

#include <functional>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mpmlab/characteristics.hpp"
#include "mpmlab/measure.hpp"
#include "mpmlab/model.hpp"
#include "mpmlab/paths.hpp"
#include "mpmlab/simulate.hpp"

namespace mpmlab {

enum class Family { SV, EK, EK_FTD, SMG_i, SMG_ii, SMG_iii, SMG_star, VOLTERRA };

const char* family_name(Family f);

/// Y°(companion, path, t). The companion is the control path L when the
/// ensemble carries controls, the driver Z for Volterra pairs, else null.
using Evaluator = std::function<double(const CadlagPath* companion, const CadlagPath& path, double t)>;

/// Canonical version of a test process: a functional of the path restricted to [0, t].
struct TestProcess {
  Family family = Family::SV;
  std::string label;
  Evaluator evaluator;
  /// Declared bound on |Y°_t| as a function of t; empty when unbounded.
  std::function<double(double)> bound;

  double operator()(const CadlagPath& path, double t, const CadlagPath* companion = nullptr) const {
    return evaluator(companion, path, t);
  }
};

/// Test function with derivatives; hessian is d x d row-major.
struct TestFunction {
  std::string name;
  std::function<double(std::span<const double>)> value;
  std::function<Vec(std::span<const double>)> gradient;
  std::function<Vec(std::span<const double>)> hessian;
};

TestFunction identity_function();  ///< f(x) = x (1-d)
TestFunction square_function();    ///< f(x) = x^2 (1-d)
TestFunction cosine_function();    ///< f(x) = cos x (1-d)

/// f(X_t) - f(X_0) - int_0^t (<b, grad f> + tr(sigma sigma^T hess f) / 2)(s, X_s) ds,
/// with the coefficients frozen at the left end of each constancy piece.
TestProcess build_sv_test(const TestFunction& f, StateFn drift, StateFn diffusion, std::size_t noise_dim = 1);

using ScalarFn = std::function<double(std::span<const double>)>;

/// f(X_t) - f(X_0) - int_0^t g(X_s) ds.
TestProcess build_ek_test(ScalarFn f, ScalarFn g, double f_sup = std::numeric_limits<double>::infinity(),
                          double g_sup = std::numeric_limits<double>::infinity());

/// f(X_t) - f(X_0) - int_0^t g(X_{s-}) q(ds).
TestProcess build_ek_ftd_test(ScalarFn f, ScalarFn g, LocallyFiniteMeasure q,
                              double f_sup = std::numeric_limits<double>::infinity(),
                              double g_sup = std::numeric_limits<double>::infinity());

/// X(h) = X - sum_{s <= t} (Delta X_s - h(Delta X_s)).
Vec truncated_process(const CadlagPath& path, double t, const TruncationSpec& h);

/// Semimartingale test families relative to the model's truncation:
/// M(h)^i for each i, M(h)^i M(h)^j - Ctilde^ij for i <= j, sum g(Delta X) - g*nu
/// for each g, and f(X) - f(X_0) - int Lf dA for each star function.
/// Every g must vanish on a neighbourhood of 0.
std::vector<TestProcess> build_smg_tests(std::shared_ptr<const CharModel> model, const std::vector<GFunction>& g_family,
                                         const std::vector<TestFunction>& star_functions = {});

/// f(Z_t) - f(Z_0) - int_0^t Lf(X_s, Z_s) ds for a Volterra pair; the
/// companion must be Z and the path X.
TestProcess build_volterra_test(const TestFunction& f, const VolterraModel& model, TruncationSpec h = {});

/// Determining function Z°_s: a product of bounded continuous factors of the
/// path at times in [0, s] (pointwise) or of int_0^{t_i} omega (integrated).
struct DeterminingFunction {
  enum class Mode { pointwise, integrated };
  Mode mode = Mode::pointwise;
  double anchor = 0.0;
  std::vector<double> times;
  std::vector<ScalarFn> factors;
  double bound = 1.0;  ///< sup |Z°|

  static DeterminingFunction one(double anchor);
  DeterminingFunction(Mode mode = Mode::pointwise, double anchor = 0.0, std::vector<double> times = {},
                      std::vector<ScalarFn> factors = {}, double bound = 1.0);

  double operator()(const CadlagPath& path) const;
};

/// Parses "one", or "pointwise:" / "integrated:" followed by comma-separated
/// factor@time items; factors: tanh, cos, sin, atan, sigmoid, clip; a time may
/// be written as a multiple of the anchor, e.g. "0.5s".
DeterminingFunction parse_determining_function(const std::string& text, double anchor);

/// Grid points k * step in [0, horizon] minus the atom times of q.
std::vector<double> dense_times(double step, double horizon, const LocallyFiniteMeasure* q = nullptr);

struct DefectReport {
  double s = 0.0;
  double t = 0.0;
  double estimate = 0.0;
  double std_error = 0.0;
  std::size_t n = 0;
  double z_threshold = 3.0;
  bool pass = false;
};

/// Sample mean and standard error of (Y°_t - Y°_s) Z°_s; pass iff |mean| <= z * se.
DefectReport defect_statistic(const SimOutput& ensemble, const TestProcess& Y, const DeterminingFunction& Z, double s,
                              double t, double z_threshold = 3.0, std::size_t threads = 0);

struct UiReport {
  std::vector<double> z;
  std::vector<double> excess;  ///< mean of |Z| - |Z| ^ z
  double threshold = 0.01;
  bool suspect = false;  ///< excess at the largest z above threshold
};

/// Empirical tail-excess curve E[|Z| - |Z| ^ z] over z_grid (sorted ascending).
UiReport ui_diagnostic(std::span<const double> samples, std::vector<double> z_grid, double threshold = 0.01);

struct GapReport {
  double probability = 0.0;
  double std_error = 0.0;
  double l1_mean = 0.0;
  std::size_t n = 0;
};

/// Frequency of |Y^n_t - Y°_t| >= epsilon with binomial SE, plus the mean |gap|.
GapReport mg_approx_gap(std::span<const std::pair<double, double>> pairs, double epsilon);

}  // namespace mpmlab
