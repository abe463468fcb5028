#pragma once

// Explicit constants of the three lower bounds and the BoundReport record
// every verifier emits.

#include <json.hpp>

#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "discrepancy/core.hpp"

namespace discrepancy::bounds {

enum class ConstantSource { paper_explicit, convention, calibrated };

inline const char* to_string(ConstantSource s) {
  switch (s) {
    case ConstantSource::paper_explicit: return "paper-explicit";
    case ConstantSource::convention: return "convention";
    case ConstantSource::calibrated: return "calibrated";
  }
  return "unknown";
}

inline ConstantSource constant_source_from_string(const std::string& s) {
  if (s == "paper-explicit") return ConstantSource::paper_explicit;
  if (s == "convention") return ConstantSource::convention;
  if (s == "calibrated") return ConstantSource::calibrated;
  throw Error(ErrorCode::parse_error, "unknown constant source '" + s + "'");
}

struct Constant {
  std::string symbol;
  double value = 0.0;
  ConstantSource source = ConstantSource::paper_explicit;

  friend bool operator==(const Constant&, const Constant&) = default;
};

struct InputFingerprint {
  std::uint64_t n = 0;
  unsigned d = 0;
  std::int64_t m = 0;
  std::optional<std::uint64_t> b;
  std::optional<double> r;
  std::optional<std::uint64_t> seed;
  std::string tag;

  friend bool operator==(const InputFingerprint&, const InputFingerprint&) = default;
};

struct BoundReport {
  std::string theorem;  // "1", "1-linf", "2", "3"
  double lhs = 0.0;
  double rhs = 0.0;
  double lhs_squared = 0.0;
  double rhs_squared = 0.0;
  std::string lhs_squared_exact;  // rational string when the left side is exact
  std::string rhs_squared_exact;  // rational string when the constant chain is rational
  std::vector<Constant> constants;
  bool verdict = false;
  double margin = 0.0;  // lhs / rhs (infinity when rhs = 0)
  InputFingerprint input;
  nlohmann::json extra = nlohmann::json::object();

  friend bool operator==(const BoundReport&, const BoundReport&) = default;
};

/// Sets verdict and margin from lhs/rhs; verdict is pass iff lhs >= rhs.
inline void finalize(BoundReport& rep) {
  rep.verdict = rep.lhs >= rep.rhs;
  rep.margin = rep.rhs > 0 ? rep.lhs / rep.rhs : std::numeric_limits<double>::infinity();
}

inline nlohmann::json to_json(const BoundReport& rep) {
  nlohmann::json j;
  j["theorem"] = rep.theorem;
  j["lhs"] = rep.lhs;
  j["rhs"] = rep.rhs;
  j["lhs_squared"] = rep.lhs_squared;
  j["rhs_squared"] = rep.rhs_squared;
  if (!rep.lhs_squared_exact.empty()) j["lhs_squared_exact"] = rep.lhs_squared_exact;
  if (!rep.rhs_squared_exact.empty()) j["rhs_squared_exact"] = rep.rhs_squared_exact;
  if (std::isfinite(rep.margin)) {
    j["margin"] = rep.margin;
  } else {
    j["margin"] = nullptr;
  }
  j["verdict"] = rep.verdict ? "pass" : "fail";
  j["constants"] = nlohmann::json::array();
  for (const auto& c : rep.constants) {
    j["constants"].push_back({{"symbol", c.symbol}, {"value", c.value}, {"source", to_string(c.source)}});
  }
  nlohmann::json in;
  in["N"] = rep.input.n;
  in["d"] = rep.input.d;
  in["M"] = rep.input.m;
  in["b"] = rep.input.b ? nlohmann::json(*rep.input.b) : nlohmann::json(nullptr);
  in["r"] = rep.input.r ? nlohmann::json(*rep.input.r) : nlohmann::json(nullptr);
  in["seed"] = rep.input.seed ? nlohmann::json(*rep.input.seed) : nlohmann::json(nullptr);
  in["tag"] = rep.input.tag;
  j["input"] = in;
  if (!rep.extra.empty()) j["extra"] = rep.extra;
  return j;
}

inline BoundReport report_from_json(const nlohmann::json& j) {
  BoundReport rep;
  rep.theorem = j.at("theorem").get<std::string>();
  rep.lhs = j.at("lhs").get<double>();
  rep.rhs = j.at("rhs").get<double>();
  rep.lhs_squared = j.at("lhs_squared").get<double>();
  rep.rhs_squared = j.at("rhs_squared").get<double>();
  if (j.contains("lhs_squared_exact")) rep.lhs_squared_exact = j["lhs_squared_exact"].get<std::string>();
  if (j.contains("rhs_squared_exact")) rep.rhs_squared_exact = j["rhs_squared_exact"].get<std::string>();
  rep.margin = j.at("margin").is_null() ? std::numeric_limits<double>::infinity() : j["margin"].get<double>();
  rep.verdict = j.at("verdict").get<std::string>() == "pass";
  for (const auto& c : j.at("constants")) {
    rep.constants.push_back(
        {c.at("symbol").get<std::string>(), c.at("value").get<double>(), constant_source_from_string(c.at("source").get<std::string>())});
  }
  const auto& in = j.at("input");
  rep.input.n = in.at("N").get<std::uint64_t>();
  rep.input.d = in.at("d").get<unsigned>();
  rep.input.m = in.at("M").get<std::int64_t>();
  if (!in.at("b").is_null()) rep.input.b = in["b"].get<std::uint64_t>();
  if (!in.at("r").is_null()) rep.input.r = in["r"].get<double>();
  if (!in.at("seed").is_null()) rep.input.seed = in["seed"].get<std::uint64_t>();
  rep.input.tag = in.at("tag").get<std::string>();
  if (j.contains("extra")) rep.extra = j["extra"];
  return rep;
}

// ---------------------------------------------------------------- corner constants

/// (b-1)/b^(2d+3), exact.
inline Rational roth_pairing_constant(std::uint64_t b, unsigned d) {
  return make_rational(to_integer(b - 1), integer_pow(b, 2 * d + 3));
}

/// ((b-1)/b^(2d+3)) / sqrt((d-1)!)
inline double roth_constant(std::uint64_t b, unsigned d) {
  require(b >= 2 && d >= 1, ErrorCode::invalid_argument, "roth_constant needs b >= 2 and d >= 1");
  return roth_pairing_constant(b, d).get_d() / std::sqrt(static_cast<double>(factorial(d - 1)));
}

/// kappa [ (b-1) b^-7 - kappa b^-5 / (b-1-kappa) ]
inline double linf_objective(std::uint64_t b, double kappa) {
  const double bd = static_cast<double>(b);
  return kappa * ((bd - 1.0) / std::pow(bd, 7) - kappa / std::pow(bd, 5) / (bd - 1.0 - kappa));
}

/// Golden-section argmax of linf_objective on (0, min(1, b-1)), to 1e-9.
inline double kappa_opt(std::uint64_t b) {
  require(b >= 2, ErrorCode::invalid_argument, "kappa_opt needs b >= 2");
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = 0.0;
  double hi = std::min(1.0, static_cast<double>(b) - 1.0);
  double x1 = hi - invphi * (hi - lo);
  double x2 = lo + invphi * (hi - lo);
  double f1 = linf_objective(b, x1);
  double f2 = linf_objective(b, x2);
  while (hi - lo > 1e-9) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + invphi * (hi - lo);
      f2 = linf_objective(b, x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - invphi * (hi - lo);
      f1 = linf_objective(b, x1);
    }
  }
  return 0.5 * (lo + hi);
}

/// kappa (nu+1) [ (b-1) b^-7 - kappa b^-5 / (b-1-kappa) ] / 2
inline double linf_bound(std::uint64_t b, unsigned nu, double kappa) {
  return static_cast<double>(nu + 1) * linf_objective(b, kappa) / 2.0;
}

// ---------------------------------------------------------------- torus-cube constants

/// eta_d(eps) = (1 - 8 eps d)(1 - cos(2 pi eps))^d
inline double eta(unsigned d, double eps) {
  return (1.0 - 8.0 * eps * d) * std::pow(1.0 - std::cos(2.0 * kPi * eps), static_cast<double>(d));
}

/// (e/(d-1))^(d-1) with the d = 1 convention 1.
inline double e_factor(unsigned d) {
  if (d == 1) return 1.0;
  const double dm1 = static_cast<double>(d - 1);
  return std::pow(std::exp(1.0) / dm1, dm1);
}

/// eta_d(1/(9d)) / (2^(3d+4) pi^(2d)) * (e/(d-1))^(d-1); the bound is this times log(2N)^(d-1).
inline double halasz_constant_squared(unsigned d) {
  require(d >= 1, ErrorCode::invalid_argument, "dimension must be positive");
  const double eps = 1.0 / (9.0 * d);
  return eta(d, eps) / (std::pow(2.0, 3.0 * d + 4.0) * std::pow(kPi, 2.0 * d)) * e_factor(d);
}

inline double halasz_constant(unsigned d) { return std::sqrt(halasz_constant_squared(d)); }

/// Right-hand side squared of the torus-cube bound at N points.
inline double halasz_rhs_squared(unsigned d, std::uint64_t n) {
  const double lg = d == 1 ? 1.0 : std::pow(std::log(2.0 * static_cast<double>(n)), static_cast<double>(d - 1));
  return halasz_constant_squared(d) * lg;
}

/// Lower bound of the radius-summed squared cube transform:
/// 2 4^d eta_d(eps) / (pi^(2d) prod max(1,|k_u|)^2) floor(M/4)^(2d+1).
inline double radius_weight_lower_bound(std::span<const std::int64_t> k, std::int64_t m, double eps) {
  const unsigned d = static_cast<unsigned>(k.size());
  long double prod = 1.0L;
  for (auto ku : k) prod *= static_cast<long double>(std::max<std::int64_t>(1, ku < 0 ? -ku : ku));
  return static_cast<double>(2.0L * std::pow(4.0L, d) * eta(d, eps) / (std::pow(static_cast<long double>(kPiL), 2.0L * d) * prod * prod) *
                             std::pow(static_cast<long double>(m / 4), 2.0L * d + 1.0L));
}

// ---------------------------------------------------------------- registry

struct RegistryEntry {
  std::string symbol;
  std::string formula;
  double value = 0.0;
  ConstantSource source = ConstantSource::paper_explicit;
};

/// Re-derives the paper-explicit constants from their formulas at a few
/// reference points and returns false if any disagrees with the closed form.
inline bool registry_self_check() {
  bool ok = true;
  // (b-1)/b^(2d+3): b=2,d=1 -> 1/32, b=2,d=2 -> 1/128
  ok = ok && roth_pairing_constant(2, 1) == Rational(1, 32);
  ok = ok && roth_pairing_constant(2, 2) == Rational(1, 128);
  ok = ok && std::abs(roth_constant(2, 3) - (1.0 / 512.0) / std::sqrt(2.0)) < 1e-18;
  // eta_2(1/18) = (1/9)(1 - cos(pi/9))^2
  const double eta2 = (1.0 / 9.0) * std::pow(1.0 - std::cos(kPi / 9.0), 2.0);
  ok = ok && std::abs(eta(2, 1.0 / 18.0) - eta2) <= 1e-15 * eta2;
  ok = ok && std::abs(eta(3, 1.0 / 24.0)) < 1e-18;
  const double c2 = eta2 / (std::pow(2.0, 10.0) * std::pow(kPi, 4.0)) * std::exp(1.0);
  ok = ok && std::abs(halasz_constant_squared(2) - c2) <= 1e-14 * c2;
  const double k2 = kappa_opt(2);
  ok = ok && k2 > 0.0 && k2 < 0.2 && linf_objective(2, k2) > 0.0;
  return ok;
}

inline std::vector<RegistryEntry> registry(std::uint64_t b, unsigned d) {
  std::vector<RegistryEntry> out;
  out.push_back({"roth_c", "((b-1)/b^(2d+3))/sqrt((d-1)!)", roth_constant(b, d), ConstantSource::paper_explicit});
  out.push_back({"kappa_opt", "argmax kappa[(b-1)b^-7 - kappa b^-5/(b-1-kappa)]", kappa_opt(b), ConstantSource::calibrated});
  out.push_back({"eta_d(1/9d)", "(1-8 eps d)(1-cos 2 pi eps)^d", eta(d, 1.0 / (9.0 * d)), ConstantSource::paper_explicit});
  out.push_back({"halasz_c^2", "eta_d/(2^(3d+4) pi^(2d)) (e/(d-1))^(d-1)", halasz_constant_squared(d), ConstantSource::paper_explicit});
  out.push_back({"(e/(d-1))^(d-1)", "1 when d = 1", e_factor(d), d == 1 ? ConstantSource::convention : ConstantSource::paper_explicit});
  return out;
}

}  // namespace discrepancy::bounds
