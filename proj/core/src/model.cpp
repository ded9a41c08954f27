#include "mpmlab/model.hpp"

#include <stdexcept>

namespace mpmlab {

LocallyFiniteMeasure CharModel::base_measure(double horizon) const {
  std::vector<Atom> atoms;
  for (const auto& s : scheduled) {
    if (s.time <= horizon) atoms.push_back({s.time, 1.0});
  }
  return LocallyFiniteMeasure::mixed(1.0, std::move(atoms), horizon);
}

Vec CharModel::drift_at(double t, std::span<const double> x) const {
  if (!drift) return Vec(dim, 0.0);
  Vec b = drift(t, x);
  if (b.size() != dim) throw std::invalid_argument("CharModel: drift has wrong dimension");
  return b;
}

Vec CharModel::diffusion_at(double t, std::span<const double> x) const {
  if (!diffusion) return Vec(dim * noise_dim, 0.0);
  Vec s = diffusion(t, x);
  if (s.size() != dim * noise_dim) throw std::invalid_argument("CharModel: diffusion has wrong shape");
  return s;
}

double CharModel::intensity_at(double t, std::span<const double> x) const {
  if (!intensity) return 0.0;
  const double l = intensity(t, x);
  if (!(l >= 0.0)) throw std::domain_error("CharModel: negative or non-finite jump intensity");
  return l;
}

CharModel brownian_model(double mu, double sigma) {
  CharModel m;
  m.name = "brownian";
  if (mu != 0.0) m.drift = [mu](double, std::span<const double>) { return Vec{mu}; };
  m.diffusion = [sigma](double, std::span<const double>) { return Vec{sigma}; };
  return m;
}

CharModel compound_poisson_model(double rate, JumpLaw law, double radius) {
  CharModel m;
  m.name = "compound-poisson";
  m.dim = law.dim();
  m.intensity = [rate](double, std::span<const double>) { return rate; };
  m.jump_law = [law = std::move(law)](double, std::span<const double>) { return law; };
  m.truncation.radius = radius;
  return m;
}

CharModel scheduled_jump_model(std::vector<std::pair<double, JumpLaw>> atoms, double radius) {
  CharModel m;
  m.name = "scheduled-jumps";
  if (!atoms.empty()) m.dim = atoms.front().second.dim();
  for (auto& [t, law] : atoms) {
    m.scheduled.push_back({t, [law = std::move(law)](std::span<const double>) { return law; }});
  }
  m.truncation.radius = radius;
  return m;
}

}  // namespace mpmlab
