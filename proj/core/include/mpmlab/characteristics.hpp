#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mpmlab/model.hpp"
#include "mpmlab/paths.hpp"
#include "mpmlab/simulate.hpp"

namespace mpmlab {

/// Bounded function vanishing near the origin, integrated against nu.
struct GFunction {
  std::string name;
  std::function<double(std::span<const double>)> fn;
};

/// g_a(x) = min(1, (||x|| - a)^+ / a).
GFunction ramp_g(double a);
/// Ramps for a = 2^-1, .., 2^-levels.
std::vector<GFunction> ramp_family(int levels);

/// Time quadrature for the continuous parts. The state is exact (step path);
/// only the time dependence of the coefficients is approximated.
enum class Quadrature {
  left_point,  ///< coefficients frozen at the left end of each piece (Euler-consistent)
  refined,     ///< composite Simpson on each piece
};

struct RealizedCharacteristics {
  CadlagPath B;        ///< d components
  CadlagPath C;        ///< d x d continuous part, row-major
  CadlagPath Ctilde;   ///< d x d, C + int h h^T dnu - sum Delta B Delta B^T
  std::vector<std::string> g_names;
  std::vector<CadlagPath> g_nu;
  CadlagPath B_variation;  ///< total variation of B (1 component)
};

/// Characteristics of `model` along `path` on [0, T]: events at every piece
/// boundary (path events, scheduled atoms) and at T.
RealizedCharacteristics realize(const CharModel& model, const CadlagPath& path, double T,
                                const std::vector<GFunction>& g_family = {},
                                Quadrature quadrature = Quadrature::left_point, int refinement = 16);

/// Candidate characteristics B(omega), Ctilde(omega), g*nu(omega): a model plus a quadrature.
struct CharacteristicsEvaluator {
  std::shared_ptr<const CharModel> model;
  Quadrature quadrature = Quadrature::left_point;
  int refinement = 16;

  RealizedCharacteristics operator()(const CadlagPath& path, double T,
                                     const std::vector<GFunction>& g_family = {}) const {
    return realize(*model, path, T, g_family, quadrature, refinement);
  }
};

/// inf{t : ||omega(t)|| >= m or ||omega(t-)|| >= m}; nullopt when beyond the horizon.
std::optional<double> stopping_T_m(const CadlagPath& path, double m);

struct Frequency {
  std::string characteristic;
  double frequency = 0.0;
  double std_error = 0.0;
};

struct ComparisonReport {
  double t = 0.0;
  double epsilon = 0.0;
  std::size_t n = 0;
  std::vector<Frequency> rows;  ///< "B", "Ctilde", then one per g

  const Frequency& row(const std::string& name) const;
};

/// Empirical P(||B^n_t - B_t(X^n)|| >= eps) and likewise for Ctilde and each
/// g*nu, with B^n from the ensemble's generating model (left-point, i.e. the
/// Euler scheme's own characteristics). With `m`, t becomes t ^ T_m(X^n).
ComparisonReport compare_characteristics(const SimOutput& sim, const CharacteristicsEvaluator& candidate, double t,
                                         double epsilon, std::optional<double> m = std::nullopt,
                                         const std::vector<GFunction>& g_family = {}, std::size_t threads = 0);

/// Real-vector functional of a path.
using PathFunctional = std::function<Vec(const CadlagPath&)>;

/// (B_t, Ctilde_t, g*nu_t) packed into one vector.
PathFunctional characteristics_functional(const CharacteristicsEvaluator& candidate, double t,
                                          const std::vector<GFunction>& g_family = {});

struct ModulusRow {
  double scale = 0.0;
  double modulus = 0.0;
};

/// For each scale delta: max over `draws` random perturbations of the path
/// values by independent uniforms in [-delta, delta]^d (event times fixed) of
/// ||F(path') - F(path)||.
std::vector<ModulusRow> local_uniform_continuity_probe(const PathFunctional& functional, const CadlagPath& base,
                                                       const std::vector<double>& scales, int draws = 64,
                                                       std::uint64_t seed = 0);

/// Companion probe: event times moved by independent uniforms in
/// [-delta, delta] (order and values kept), i.e. small J1 perturbations.
std::vector<ModulusRow> j1_jitter_probe(const PathFunctional& functional, const CadlagPath& base,
                                        const std::vector<double>& scales, int draws = 64, std::uint64_t seed = 0);

}  // namespace mpmlab
