// Command-line front end: generators, the three discrepancy engines, bound
// verification, identity suites and N-sweeps.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include "discrepancy/identity.hpp"
#include "discrepancy/suite.hpp"

using namespace discrepancy;
using nlohmann::json;

namespace {

constexpr int kConfigError = 2;
constexpr int kIdentityFailure = 3;
constexpr const char* kOutDirEnv = "DISCREPANCY_OUT_DIR";

struct Source {
  std::string points;
  std::string gen;
  std::size_t n = 0;
  unsigned d = 0;
  std::uint64_t base = 2;
  std::int64_t lattice = 0;
  std::uint64_t seed = 1;
};

void add_source(CLI::App* cmd, Source& s) {
  cmd->add_option("--points", s.points, "Point-set CSV ('-' for stdin; stdin is also the default)");
  cmd->add_option("--gen", s.gen, "Generate instead of reading: random, lattice, vdc, hammersley, hammersley23")
      ->check(CLI::IsMember({"random", "lattice", "vdc", "hammersley", "hammersley23"}));
  cmd->add_option("--n", s.n, "Number of points for --gen");
  cmd->add_option("--d", s.d, "Dimension for --gen");
  cmd->add_option("--gen-base", s.base, "Base of the van der Corput / Hammersley radical inverse")->check(CLI::Range(2, 1 << 20));
  cmd->add_option("--lattice", s.lattice, "Generate the K^d lattice (sets --gen lattice)");
  cmd->add_option("--seed", s.seed, "Seed for --gen random");
}

PointSet generate(const Source& s, PointMode mode) {
  std::string kind = s.gen;
  if (kind.empty() && s.lattice > 0) kind = "lattice";
  require(s.d >= 1, ErrorCode::invalid_argument, "--d is required with a generator");
  if (kind == "lattice") {
    require(s.lattice >= 1, ErrorCode::invalid_argument, "--lattice K is required for the lattice generator");
    return gen_lattice(s.lattice, s.d, mode);
  }
  require(s.n >= 1, ErrorCode::invalid_argument, "--n is required with a generator");
  if (kind == "random") return gen_uniform_random(s.n, s.d, s.seed, mode);
  if (kind == "vdc") {
    require(s.d == 1, ErrorCode::dimension_mismatch, "van der Corput sets are one-dimensional");
    return gen_van_der_corput(s.base, s.n, mode);
  }
  if (kind == "hammersley") {
    require(s.d == 2, ErrorCode::dimension_mismatch, "Hammersley sets are two-dimensional");
    return gen_hammersley(s.base, s.n, mode);
  }
  require(s.d == 3, ErrorCode::dimension_mismatch, "hammersley23 sets are three-dimensional");
  return gen_hammersley3(s.n, mode);
}

PointSet load(const Source& s, PointMode mode) {
  if (!s.gen.empty() || s.lattice > 0) return generate(s, mode);
  if (s.points.empty() || s.points == "-") return read_points_csv(std::cin).with_mode(mode);
  std::ifstream in(s.points);
  require(static_cast<bool>(in), ErrorCode::invalid_argument, "cannot open " + s.points);
  return read_points_csv(in).with_mode(mode);
}

std::filesystem::path resolve(const std::string& path) {
  std::filesystem::path p(path);
  if (p.is_relative()) {
    if (const char* dir = std::getenv(kOutDirEnv); dir != nullptr && *dir != '\0') return std::filesystem::path(dir) / p;
  }
  return p;
}

/// Writes through `fn` to `path`, or to stdout when the path is empty.
template <typename Fn>
void emit(const std::string& path, Fn&& fn) {
  if (path.empty()) {
    fn(std::cout);
    std::cout.flush();
    return;
  }
  const auto target = resolve(path);
  if (target.has_parent_path()) std::filesystem::create_directories(target.parent_path());
  std::ofstream out(target, std::ios::binary);
  require(static_cast<bool>(out), ErrorCode::invalid_argument, "cannot write " + target.string());
  fn(out);
}

void emit_json(const std::string& path, const json& j) {
  emit(path, [&](std::ostream& out) { out << j.dump(2) << '\n'; });
}

std::string fmt(double v) { return format_double(v); }

std::vector<std::size_t> parse_list(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t v = 0;
    const auto res = std::from_chars(item.data(), item.data() + item.size(), v);
    require(res.ec == std::errc{} && res.ptr == item.data() + item.size() && v > 0, ErrorCode::parse_error,
            "bad list entry '" + item + "'");
    out.push_back(v);
  }
  require(!out.empty(), ErrorCode::parse_error, "empty list");
  return out;
}

// ---------------------------------------------------------------- commands

struct GenArgs {
  Source src;
  std::string mode = "corner";
  std::string out;
};

int cmd_gen(const GenArgs& a) {
  require(!a.src.gen.empty() || a.src.lattice > 0, ErrorCode::invalid_argument, "gen needs --gen or --lattice");
  const auto p = generate(a.src, a.mode == "toroidal" ? PointMode::toroidal : PointMode::corner);
  emit(a.out, [&](std::ostream& out) { write_points_csv(out, p); });
  return 0;
}

struct CornerArgs {
  Source src;
  std::int64_t m = 0;
  std::string field, out;
};

int cmd_corner(const CornerArgs& a) {
  const auto p = load(a.src, PointMode::corner);
  require(a.m >= 2, ErrorCode::invalid_argument, "--m must be at least 2");
  const auto g = GridSpec::corner_resolution(p.dim(), a.m);
  const corner::CornerDiscrepancyField f(p, g);
  const auto norms = corner::grid_norms(f);
  json j;
  j["command"] = "corner";
  j["N"] = p.size();
  j["d"] = p.dim();
  j["M"] = a.m;
  j["l2_squared_exact"] = to_string(norms.l2_squared);
  j["l2"] = norms.l2;
  j["linf_exact"] = to_string(norms.linf);
  j["linf"] = norms.linf.get_d();
  j["argmax"] = norms.argmax;
  if (!a.field.empty()) emit(a.field, [&](std::ostream& out) { corner::write_field_csv(out, f); });
  j["continuous_l2"] = corner::continuous_l2_oracle(p);
  emit_json(a.out, j);
  return 0;
}

struct CubeArgs {
  Source src;
  std::int64_t m = 0;
  std::string path = "both";
  std::string field, spectrum, weights, out;
};

int cmd_cube(const CubeArgs& a) {
  const auto p = load(a.src, PointMode::toroidal);
  const std::int64_t m = a.m > 0 ? a.m : torus_cube::theorem2_resolution(p.dim(), p.size());
  const auto g = GridSpec::torus(p.dim(), m);
  require(m >= 4, ErrorCode::invalid_argument, "the cube ensemble needs M >= 4");
  json j;
  j["command"] = "cube";
  j["N"] = p.size();
  j["d"] = p.dim();
  j["M"] = m;
  const bool direct = a.path == "direct" || a.path == "both";
  const bool spec = a.path == "spectral" || a.path == "both";
  double dv = 0, sv = 0;
  if (direct) {
    const auto e = torus_cube::ensemble_l2_direct(p, g);
    j["direct_l2_squared_exact"] = to_string(e.l2_squared);
    j["direct_l2"] = e.l2;
    dv = static_cast<double>(to_long_double(e.l2_squared));
  }
  if (spec || !a.spectrum.empty()) {
    const auto table = spectral::exp_sums(snap_corner(p, g));
    if (spec) {
      sv = torus_cube::spectral_l2_squared(table);
      j["spectral_l2"] = std::sqrt(sv);
    }
    if (!a.spectrum.empty()) emit(a.spectrum, [&](std::ostream& out) { spectral::write_spectral_csv(out, table); });
  }
  if (direct && spec) j["relative_difference"] = std::abs(dv - sv) / std::max(dv, 1e-300);
  if (!a.field.empty()) emit(a.field, [&](std::ostream& out) { torus_cube::write_cube_field_csv(out, p, g); });
  if (!a.weights.empty()) emit(a.weights, [&](std::ostream& out) { torus_cube::write_radius_weight_csv(out, p.dim(), m); });
  emit_json(a.out, j);
  return 0;
}

struct BallArgs {
  Source src;
  std::int64_t m = 0;
  double r = 0.2;
  double c_res = torus_ball::kResolutionConstant;
  std::string path = "pairwise";
  std::string field, out;
};

torus_ball::BallPath ball_path(const std::string& s) {
  if (s == "field") return torus_ball::BallPath::field;
  if (s == "spectral") return torus_ball::BallPath::spectral;
  return torus_ball::BallPath::pairwise;
}

int cmd_ball(const BallArgs& a) {
  const auto p = load(a.src, PointMode::toroidal);
  require(a.r > 0.0 && a.r < 0.25, ErrorCode::invalid_argument, "--r must lie in (0, 1/4)");
  const std::int64_t floor_m = torus_ball::theorem3_resolution(p.dim(), p.size(), a.r, a.c_res);
  const std::int64_t m = a.m > 0 ? a.m : floor_m;
  const auto g = GridSpec::torus(p.dim(), m);
  const auto path = ball_path(a.path);
  const double s1 = torus_ball::mean_square(p, g, a.r, path), s2 = torus_ball::mean_square(p, g, 2 * a.r, path);
  json j;
  j["command"] = "ball";
  j["N"] = p.size();
  j["d"] = p.dim();
  j["M"] = m;
  j["r"] = a.r;
  j["path"] = a.path;
  j["mean_square_r"] = s1;
  j["mean_square_2r"] = s2;
  j["two_radius_l2"] = std::sqrt(s1 + s2);
  j["floor_M"] = floor_m;
  if (m < floor_m) {
    j["warning"] = "M below the C N^(1+1/(2d))/r floor; no verdict";
    std::cerr << "warning: M = " << m << " is below the resolution floor " << floor_m << '\n';
  }
  if (!a.field.empty()) emit(a.field, [&](std::ostream& out) { torus_ball::write_ball_field_csv(out, p, g, a.r); });
  emit_json(a.out, j);
  return 0;
}

struct VerifyArgs {
  Source src;
  std::string theorem;
  std::uint64_t b = 2;
  unsigned tau = 1;
  std::optional<double> kappa;
  std::int64_t m = 0;
  double r = 0.2;
  double c_res = torus_ball::kResolutionConstant;
  double c_bound = torus_ball::kCalibratedConstant;
  bool cross_check = false;
  std::string tag, out;
};

bounds::BoundReport run_verify(const std::string& theorem, const PointSet& p, const VerifyArgs& a, std::optional<std::uint64_t> seed) {
  std::optional<std::int64_t> m;
  if (a.m > 0) m = a.m;
  bounds::BoundReport rep;
  if (theorem == "1") {
    rep = corner::theorem1_verify(p.with_mode(PointMode::corner), a.b, a.tau, a.tag);
  } else if (theorem == "1-linf") {
    rep = corner::theorem1_linf_verify(p.with_mode(PointMode::corner), a.b, a.tau, a.kappa, a.tag);
  } else if (theorem == "2") {
    rep = torus_cube::theorem2_verify(p.with_mode(PointMode::toroidal), m, a.tag, a.cross_check);
  } else {
    rep = torus_ball::theorem3_verify(p.with_mode(PointMode::toroidal), a.r, m, a.c_res, a.c_bound, a.tag);
  }
  if (seed) rep.input.seed = seed;
  return rep;
}

std::optional<std::uint64_t> source_seed(const Source& s) {
  if (s.gen == "random") return s.seed;
  return std::nullopt;
}

int cmd_verify(const VerifyArgs& a) {
  const auto p = load(a.src, PointMode::corner);
  emit_json(a.out, bounds::to_json(run_verify(a.theorem, p, a, source_seed(a.src))));
  return 0;
}

struct IdentityArgs {
  std::string suite = "all";
  std::uint64_t b = 2;
  unsigned d = 2;
  unsigned nu = 4;
  unsigned tau = 1;
  std::size_t n = 0;
  std::uint64_t seed = 1;
  std::int64_t m = 32;
  double r = 0.2;
  std::string out;
};

int cmd_identity(const IdentityArgs& a) {
  require(a.nu >= 2, ErrorCode::invalid_argument, "--nu must be at least 2");
  std::vector<identity::SuiteResult> results;
  const bool all = a.suite == "all";
  if (all || a.suite == "haar") {
    // N in the window b^(nu-2) <= N < b^(nu-1).
    const std::uint64_t lo = ipow(a.b, a.nu - 2), hi = ipow(a.b, a.nu - 1);
    const std::uint64_t n = a.n > 0 ? a.n : lo + (hi - lo) / 2;
    require(n >= lo && n < hi, ErrorCode::invalid_argument, "--n must satisfy b^(nu-2) <= N < b^(nu-1)");
    results.push_back(identity::haar_empty_boxes(gen_uniform_random(n, a.d, a.seed), a.b, a.tau));
  }
  const std::size_t n = a.n > 0 ? a.n : 10;
  if (all || a.suite == "plancherel") {
    results.push_back(identity::cube_plancherel(gen_uniform_random(n, a.d, a.seed, PointMode::toroidal), a.m));
  }
  if (all || a.suite == "ball") {
    results.push_back(identity::ball_lemma(gen_uniform_random(n, a.d, a.seed, PointMode::toroidal), a.m, a.r));
  }
  json j = json::array();
  bool ok = true;
  for (const auto& s : results) {
    j.push_back({{"suite", s.suite}, {"checked", s.checked}, {"failures", s.failures}, {"max_error", s.max_error}, {"ok", s.ok()}});
    ok = ok && s.ok();
  }
  emit_json(a.out, j);
  return ok ? 0 : kIdentityFailure;
}

struct SweepArgs {
  VerifyArgs v;
  std::string ns = "4,8,16,32";
  unsigned d = 2;
  unsigned seeds = 5;
  bool structured = false;
  std::string summary;
};

int cmd_sweep(SweepArgs a) {
  const auto ns = parse_list(a.ns);
  const PointMode mode = a.v.theorem == "1" || a.v.theorem == "1-linf" ? PointMode::corner : PointMode::toroidal;
  struct Row {
    std::size_t n;
    std::string set;
    std::optional<std::uint64_t> seed;
    bounds::BoundReport rep;
  };
  std::vector<Row> rows;
  for (auto n : ns) {
    for (auto& s : point_suite(a.d, n, mode, a.seeds)) {
      if (!a.structured && s.name != "random") continue;
      rows.push_back({n, s.name, s.seed, run_verify(a.v.theorem, s.points, a.v, s.seed)});
    }
  }
  emit(a.v.out, [&](std::ostream& out) {
    out << "N,set,seed,M,lhs,rhs,margin,verdict\n";
    for (const auto& r : rows) {
      out << r.n << ',' << r.set << ',' << (r.seed ? std::to_string(*r.seed) : "") << ',' << r.rep.input.m << ',' << fmt(r.rep.lhs)
          << ',' << fmt(r.rep.rhs) << ',' << fmt(r.rep.margin) << ',' << (r.rep.verdict ? "pass" : "fail") << '\n';
    }
  });
  // Mean lhs of the random sets against N, with its log-log slope.
  std::map<std::size_t, std::pair<double, unsigned>> mean;
  for (const auto& r : rows)
    if (r.set == "random") {
      mean[r.n].first += r.rep.lhs;
      ++mean[r.n].second;
    }
  json j;
  j["theorem"] = a.v.theorem;
  j["d"] = a.d;
  j["mean_lhs"] = json::array();
  std::vector<double> xs, ys;
  for (const auto& [n, acc] : mean) {
    const double avg = acc.first / acc.second;
    j["mean_lhs"].push_back({{"N", n}, {"lhs", avg}});
    xs.push_back(static_cast<double>(n));
    ys.push_back(avg);
  }
  if (xs.size() >= 2) j["loglog_slope"] = torus_ball::loglog_slope(xs, ys);
  std::size_t failures = 0;
  for (const auto& r : rows) failures += r.rep.verdict ? 0 : 1;
  j["failures"] = failures;
  if (!a.summary.empty()) emit_json(a.summary, j);
  return 0;
}

void add_verify_options(CLI::App* cmd, VerifyArgs& v, bool need_theorem) {
  auto* t = cmd->add_option("--theorem", v.theorem, "1, 1-linf, 2 or 3")->check(CLI::IsMember({"1", "1-linf", "2", "3"}));
  if (need_theorem) t->required();
  cmd->add_option("--b", v.b, "Base of the b-adic grid (theorem 1)")->check(CLI::Range(2, 1 << 20));
  cmd->add_option("--tau", v.tau, "Grid refinement tau, M = b^(nu+tau) (theorem 1)")->check(CLI::Range(1, 16));
  cmd->add_option("--kappa", v.kappa, "kappa for the d = 2 linf bound (default: optimized)");
  cmd->add_option("--m", v.m, "Resolution override (theorems 2, 3)");
  cmd->add_option("--r", v.r, "Ball radius in (0, 1/4) (theorem 3)");
  cmd->add_option("--C", v.c_res, "Resolution multiplier C (theorem 3)");
  cmd->add_option("--c", v.c_bound, "Bound constant c (theorem 3; default is the calibrated value)");
  cmd->add_flag("--cross-check", v.cross_check, "Also run the direct path (theorem 2)");
  cmd->add_option("--tag", v.tag, "Free-form tag echoed into the report");
  cmd->add_option("--out", v.out, "Output file (relative paths go under $" + std::string(kOutDirEnv) + ")");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Discrepancy engines and lower-bound verification"};
  app.require_subcommand(1);
  unsigned threads = 0;
  app.add_option("--threads", threads, "Worker cap (0 = hardware concurrency)");

  GenArgs gen;
  auto* c_gen = app.add_subcommand("gen", "Write a generated point set as CSV");
  add_source(c_gen, gen.src);
  c_gen->add_option("--mode", gen.mode, "corner or toroidal")->check(CLI::IsMember({"corner", "toroidal"}));
  c_gen->add_option("--out", gen.out, "Output file");

  CornerArgs corner_args;
  auto* c_corner = app.add_subcommand("corner", "Grid l2 / linf corner discrepancy");
  add_source(c_corner, corner_args.src);
  c_corner->add_option("--m", corner_args.m, "Grid resolution M")->required();
  c_corner->add_option("--field", corner_args.field, "Write the discrepancy field CSV");
  c_corner->add_option("--out", corner_args.out, "Output file");

  CubeArgs cube;
  auto* c_cube = app.add_subcommand("cube", "Toroidal cube ensemble l2");
  add_source(c_cube, cube.src);
  c_cube->add_option("--m", cube.m, "Even resolution M (default 18 d N, even)");
  c_cube->add_option("--path", cube.path, "direct, spectral or both")->check(CLI::IsMember({"direct", "spectral", "both"}));
  c_cube->add_option("--field", cube.field, "Write the (j, r, s, D) CSV");
  c_cube->add_option("--spectrum", cube.spectrum, "Write the exponential sums W(k) CSV");
  c_cube->add_option("--weights", cube.weights, "Write the radius weights CSV");
  c_cube->add_option("--out", cube.out, "Output file");

  BallArgs ball;
  auto* c_ball = app.add_subcommand("ball", "Two-radius toroidal ball discrepancy");
  add_source(c_ball, ball.src);
  c_ball->add_option("--m", ball.m, "Even resolution M (default: the C N^(1+1/(2d))/r floor)");
  c_ball->add_option("--r", ball.r, "Radius in (0, 1/4)");
  c_ball->add_option("--C", ball.c_res, "Resolution multiplier C");
  c_ball->add_option("--path", ball.path, "pairwise, field or spectral")->check(CLI::IsMember({"pairwise", "field", "spectral"}));
  c_ball->add_option("--field", ball.field, "Write the (j, D_r, D_2r) CSV");
  c_ball->add_option("--out", ball.out, "Output file");

  VerifyArgs verify;
  auto* c_verify = app.add_subcommand("verify", "Check a lower bound and print its report as JSON");
  add_source(c_verify, verify.src);
  add_verify_options(c_verify, verify, true);

  IdentityArgs ident;
  auto* c_ident = app.add_subcommand("identity", "Run the exact-identity suites; exit 3 on failure");
  c_ident->add_option("--suite", ident.suite, "haar, plancherel, ball or all")->check(CLI::IsMember({"haar", "plancherel", "ball", "all"}));
  c_ident->add_option("--b", ident.b, "Base (haar)")->check(CLI::Range(2, 64));
  c_ident->add_option("--d", ident.d, "Dimension")->check(CLI::Range(1, 6));
  c_ident->add_option("--nu", ident.nu, "Haar resolution nu (haar)")->check(CLI::Range(2, 20));
  c_ident->add_option("--tau", ident.tau, "Grid refinement tau (haar)")->check(CLI::Range(1, 16));
  c_ident->add_option("--n", ident.n, "Number of random points");
  c_ident->add_option("--seed", ident.seed, "Seed of the random point set");
  c_ident->add_option("--m", ident.m, "Even torus resolution (plancherel, ball)");
  c_ident->add_option("--r", ident.r, "Ball radius (ball)");
  c_ident->add_option("--out", ident.out, "Output file");

  SweepArgs sweep;
  auto* c_sweep = app.add_subcommand("sweep", "Verify a bound over an N sweep and write (N, lhs, rhs, margin) CSV");
  add_verify_options(c_sweep, sweep.v, true);
  c_sweep->add_option("--ns", sweep.ns, "Comma-separated N values");
  c_sweep->add_option("--d", sweep.d, "Dimension")->check(CLI::Range(1, 6));
  c_sweep->add_option("--seeds", sweep.seeds, "Random sets per N");
  c_sweep->add_flag("--structured", sweep.structured, "Include lattice / van der Corput / Hammersley sets");
  c_sweep->add_option("--summary", sweep.summary, "Write mean lhs per N and its log-log slope as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }

  thread_limit() = threads;
  try {
    if (*c_gen) return cmd_gen(gen);
    if (*c_corner) return cmd_corner(corner_args);
    if (*c_cube) return cmd_cube(cube);
    if (*c_ball) return cmd_ball(ball);
    if (*c_verify) return cmd_verify(verify);
    if (*c_ident) return cmd_identity(ident);
    if (*c_sweep) return cmd_sweep(sweep);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
