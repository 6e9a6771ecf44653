// nilscope command-line front end.
//
// Exit codes: 0 clean / pass, 1 finding (violations, non-members, failed
// completion), 2 usage or input error. Nothing is written before all
// arguments and inputs have been validated.

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "nilscope/cubes.hpp"
#include "nilscope/io.hpp"
#include "nilscope/nilsequence.hpp"
#include "nilscope/proximality.hpp"
#include "nilscope/regularity.hpp"
#include "nilscope/systems.hpp"

namespace {

using namespace nilscope;

constexpr int kClean = 0;
constexpr int kFinding = 1;
constexpr int kUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Common {
  int workers{1};
  bool json{false};
  std::string out;
};

struct SystemArgs {
  std::string kind{"heisenberg"};
  double alpha{std::sqrt(2.0) - 1.0};
  double beta{std::sqrt(3.0) - 1.0};
  double gamma0{0.0};
  int dims{2};

  SystemSpec spec() const {
    SystemSpec s;
    s.kind = system_kind_from_string(kind);
    s.alpha = alpha;
    s.beta = beta;
    s.gamma0 = gamma0;
    s.dims = dims;
    s.validate();
    return s;
  }
};

constexpr const char* kWorkersEnv = "NILSCOPE_WORKERS";

struct WorkersSlot {
  CLI::App* sub;
  CLI::Option* opt;
  Common* common;
};

std::vector<WorkersSlot>& workers_slots() {
  static std::vector<WorkersSlot> slots;
  return slots;
}

void add_common(CLI::App* sub, Common& c, bool with_out = true) {
  auto* opt = sub->add_option("--workers", c.workers, "Worker threads (default from NILSCOPE_WORKERS, else 1)")
                  ->check(CLI::PositiveNumber);
  workers_slots().push_back({sub, opt, &c});
  sub->add_flag("--json", c.json, "Print the result as JSON on stdout");
  if (with_out) sub->add_option("--out", c.out, "Also write the JSON result to this file");
}

void add_system(CLI::App* sub, SystemArgs& s) {
  sub->add_option("--system", s.kind, "heisenberg | torus_rotation")->capture_default_str();
  sub->add_option("--alpha", s.alpha, "Translation, first coordinate")->capture_default_str();
  sub->add_option("--beta", s.beta, "Translation, second coordinate")->capture_default_str();
  sub->add_option("--gamma0", s.gamma0, "Translation, central coordinate")->capture_default_str();
  sub->add_option("--dims", s.dims, "Torus dimension (torus_rotation only)")->capture_default_str();
}

/// Env fallback for --workers on the parsed subcommand; flags and config win.
void apply_workers_env(const std::vector<CLI::App*>& parsed) {
  const char* env = std::getenv(kWorkersEnv);
  if (env == nullptr || *env == '\0') return;
  const std::string s(env);
  for (const auto& slot : workers_slots()) {
    if (std::find(parsed.begin(), parsed.end(), slot.sub) == parsed.end() || slot.opt->count() > 0) continue;
    int v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || v < 1) {
      throw UsageError(std::string(kWorkersEnv) + ": must be a positive integer, got '" + s + "'");
    }
    slot.common->workers = v;
  }
}

void check_workers(const Common& c) {
  if (c.workers < 1) throw UsageError("workers: must be >= 1");
}

std::string dumped(const Json& j) { return j.dump(2) + "\n"; }

/// Prints the JSON document or the text summary, then writes --out.
void emit(const Common& c, const Json& j, const std::string& text) {
  if (c.json) {
    std::cout << dumped(j);
  } else {
    std::cout << text;
  }
  if (!c.out.empty()) write_file_atomic(c.out, dumped(j));
}

NilPoint nil_point(const std::vector<double>& v, const char* what) {
  if (v.size() != 3) throw UsageError(std::string(what) + ": expected 3 coordinates for a heisenberg point");
  for (double c : v) {
    if (!std::isfinite(c)) throw UsageError(std::string(what) + ": coordinates must be finite");
  }
  return reduce({v[0], v[1], v[2]});
}

TorusPoint torus_point(const std::vector<double>& v, int dims, const char* what) {
  if (static_cast<int>(v.size()) != dims) {
    throw UsageError(std::string(what) + ": expected " + std::to_string(dims) + " coordinates for a torus point");
  }
  for (double c : v) {
    if (!std::isfinite(c)) throw UsageError(std::string(what) + ": coordinates must be finite");
  }
  return dims == 1 ? make_torus_point({v[0]}) : make_torus_point({v[0], v[1]});
}

template <class P>
P to_point(const std::vector<double>& v, const SystemSpec& spec, const char* what) {
  if constexpr (std::is_same_v<P, NilPoint>) {
    return nil_point(v, what);
  } else {
    return torus_point(v, spec.dims, what);
  }
}

std::vector<std::vector<double>> load_points(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open '" + path + "'");
  return read_points_csv(in);
}

std::string fmt(double v) { return format_double(v); }

// ---------------------------------------------------------------- generate

struct GenerateArgs {
  Common common;
  SystemArgs system;
  std::string observable{"vertical-theta"};
  int m_freq{1};
  int j_trunc{6};
  int k1{1};
  int k2{0};
  std::vector<double> base{0.0, 0.0, 0.0};
  std::int64_t N{1000};
  std::string format;
};

int cmd_generate(const GenerateArgs& a) {
  check_workers(a.common);
  if (a.N < 1) throw UsageError("n: must be >= 1");
  if (a.common.out.empty()) throw UsageError("out: an output path is required");
  std::string format = a.format;
  if (format.empty()) format = a.common.out.ends_with(".json") ? "json" : "csv";
  if (format != "csv" && format != "json") throw UsageError("format: must be csv or json");

  SequenceSample u;
  double bound = 1.0;
  std::string label;
  if (a.observable == "quadratic-phase") {
    if (!std::isfinite(a.system.alpha)) throw UsageError("alpha: must be finite");
    u = quadratic_phase(a.system.alpha, a.N);
    label = "quadratic-phase(alpha=" + fmt(a.system.alpha) + ")";
  } else {
    ObservableSpec obs;
    obs.kind = observable_kind_from_string(a.observable);
    obs.m_freq = a.m_freq;
    obs.j_trunc = a.j_trunc;
    obs.k1 = a.k1;
    obs.k2 = a.k2;
    obs.base = nil_point(a.base, "base");
    obs.validate();
    u = generate(a.system.spec(), obs, a.N, a.common.workers);
    bound = observable_bound(obs);
    label = obs.describe();
  }

  std::string content;
  if (format == "json") {
    content = dumped(sequence_to_json(u, bound));
  } else {
    std::ostringstream os;
    write_sequence_csv(os, u);
    content = os.str();
  }
  write_file_atomic(a.common.out, content);

  Json summary;
  summary["observable"] = label;
  summary["N"] = a.N;
  summary["count"] = u.size();
  summary["bound"] = bound;
  summary["format"] = format;
  summary["out"] = a.common.out;
  if (a.common.json) {
    std::cout << dumped(summary);
  } else {
    std::cout << "wrote " << u.size() << " samples of " << label << " (n = " << u.first_index << ".."
              << u.last_index() << ", bound " << fmt(bound) << ") to " << a.common.out << "\n";
  }
  return kClean;
}

// ------------------------------------------------------------------ sample

struct SampleArgs {
  Common common;
  SystemArgs system;
  std::string kind{"pgram"};
  int count{10};
  std::int64_t range{50};
  std::uint64_t seed{1};
  bool hide_last{false};
};

template <class System>
int sample_with(const SampleArgs& a, const System& sys) {
  using P = typename System::point_type;
  std::mt19937_64 rng(a.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<std::int64_t> shift(-a.range, a.range);
  const bool pped = a.kind == "pped";

  std::ostringstream os;
  os << "# " << a.kind << " samples, system " << a.system.kind << ", seed " << a.seed << "\n";
  const auto write_point = [&os](const P& p) {
    if constexpr (std::is_same_v<P, NilPoint>) {
      os << fmt(p.x()) << ',' << fmt(p.y()) << ',' << fmt(p.z()) << '\n';
    } else {
      for (int i = 0; i < p.dims; ++i) os << (i ? "," : "") << fmt(p.coords[static_cast<std::size_t>(i)]);
      os << '\n';
    }
  };
  if constexpr (std::is_same_v<P, NilPoint>) {
    os << "x,y,z\n";
  } else {
    os << (sys.spec().dims == 1 ? "x\n" : "x,y\n");
  }

  Json configs = Json::array();
  for (int c = 0; c < a.count; ++c) {
    P base;
    if constexpr (std::is_same_v<P, NilPoint>) {
      const double x = unit(rng), y = unit(rng);
      base = reduce({x, y, unit(rng)});
    } else {
      const double x = unit(rng);
      base = sys.spec().dims == 1 ? make_torus_point({x}) : make_torus_point({x, unit(rng)});
    }
    const std::int64_t m = shift(rng), n = shift(rng);
    const std::int64_t p = pped ? shift(rng) : 0;
    os << "# shifts " << m << ' ' << n << ' ' << p << '\n';
    if (pped) {
      const auto o = sample_pped(sys, base, m, n, p);
      for (int i = 0; i < (a.hide_last ? 7 : 8); ++i) write_point(o[static_cast<std::size_t>(i)]);
      configs.push_back({{"shifts", {m, n, p}}, {"hidden", to_json(o[7])}});
    } else {
      for (const auto& v : sample_pgram(sys, base, m, n)) write_point(v);
      configs.push_back({{"shifts", {m, n}}});
    }
  }
  write_file_atomic(a.common.out, os.str());
  if (a.common.json) {
    Json j;
    j["kind"] = a.kind;
    j["count"] = a.count;
    j["out"] = a.common.out;
    j["configurations"] = std::move(configs);
    std::cout << dumped(j);
  } else {
    std::cout << "wrote " << a.count << " " << a.kind << " configurations to " << a.common.out << "\n";
  }
  return kClean;
}

int cmd_sample(const SampleArgs& a) {
  check_workers(a.common);
  if (a.kind != "pgram" && a.kind != "pped") throw UsageError("kind: must be pgram or pped");
  if (a.count < 1) throw UsageError("count: must be >= 1");
  if (a.range < 0) throw UsageError("range: must be >= 0");
  if (a.common.out.empty()) throw UsageError("out: an output path is required");
  if (a.hide_last && a.kind != "pped") throw UsageError("hide-last: only meaningful for pped");
  const SystemSpec spec = a.system.spec();
  if (spec.kind == SystemKind::heisenberg) return sample_with(a, HeisenbergSystem(spec));
  return sample_with(a, RotationSystem(spec));
}

// -------------------------------------------------------------- pgram-test

struct PgramArgs {
  Common common;
  SystemArgs system;
  std::string input;
  double tol{kDefaultPgramTol};
};

template <class P>
int pgram_with(const PgramArgs& a, const SystemSpec& spec) {
  const auto rows = load_points(a.input);
  if (rows.empty() || rows.size() % 4 != 0) {
    throw UsageError("input: expected a positive multiple of 4 points, got " + std::to_string(rows.size()));
  }
  std::vector<P> pts;
  for (const auto& r : rows) pts.push_back(to_point<P>(r, spec, "input"));

  Json quads = Json::array();
  std::size_t members = 0;
  double worst = 0.0;
  for (std::size_t q = 0; q < pts.size() / 4; ++q) {
    const Quad<P> quad{pts[4 * q], pts[4 * q + 1], pts[4 * q + 2], pts[4 * q + 3]};
    const double r = pgram_residual(quad);
    const bool member = r < a.tol;
    members += member;
    worst = std::max(worst, r);
    quads.push_back({{"index", q}, {"residual", r}, {"member", member}});
  }
  const std::size_t count = pts.size() / 4;
  Json j;
  j["tol"] = a.tol;
  j["count"] = count;
  j["members"] = members;
  j["max_residual"] = worst;
  j["quads"] = std::move(quads);
  emit(a.common, j,
       std::to_string(members) + " of " + std::to_string(count) + " quadruples are parallelograms (max residual " +
           fmt(worst) + ", tol " + fmt(a.tol) + ")\n");
  return members == count ? kClean : kFinding;
}

int cmd_pgram(const PgramArgs& a) {
  check_workers(a.common);
  if (!(a.tol > 0.0)) throw UsageError("tol: must be > 0");
  const SystemSpec spec = a.system.spec();
  if (spec.kind == SystemKind::heisenberg) return pgram_with<NilPoint>(a, spec);
  return pgram_with<TorusPoint>(a, spec);
}

// ----------------------------------------------------------- pped-complete

struct PpedArgs {
  Common common;
  SystemArgs system;
  std::string input;
  CompletionOptions opts;
};

template <class System>
int pped_with(const PpedArgs& a, const System& sys) {
  using P = typename System::point_type;
  const auto rows = load_points(a.input);
  if (rows.size() != 7) throw UsageError("input: expected 7 points, got " + std::to_string(rows.size()));
  std::array<P, 7> seven;
  for (std::size_t i = 0; i < 7; ++i) seven[i] = to_point<P>(rows[i], sys.spec(), "input");
  CompletionOptions opts = a.opts;
  opts.workers = a.common.workers;
  const auto r = pped_complete(sys, seven, opts);

  Json j = completion_to_json(r);
  j["horizon"] = opts.horizon;
  std::ostringstream text;
  text << "status: " << to_string(r.status) << "\n";
  if (r.status == CompletionStatus::face_rejected) {
    const auto& f = *r.bad_face;
    text << "face (" << f[0] << "," << f[1] << "," << f[2] << "," << f[3] << ") is not a parallelogram, residual "
         << fmt(r.bad_face_residual) << "\n";
  } else {
    text << "x7 = " << to_json(r.x7).dump() << "\nresidual " << fmt(r.residual) << " at (m,n,p) = ("
         << r.witness.m << "," << r.witness.n << "," << r.witness.p << "), spread " << fmt(r.spread) << " over "
         << r.near_witnesses << " near witnesses\n";
  }
  emit(a.common, j, text.str());
  return r.status == CompletionStatus::complete ? kClean : kFinding;
}

int cmd_pped(const PpedArgs& a) {
  check_workers(a.common);
  if (a.opts.horizon < 1) throw UsageError("horizon: must be >= 1");
  if (!(a.opts.resid_tol > 0.0)) throw UsageError("resid-tol: must be > 0");
  if (!(a.opts.face_tol > 0.0)) throw UsageError("face-tol: must be > 0");
  if (!(a.opts.spread_factor >= 1.0)) throw UsageError("spread-factor: must be >= 1");
  const SystemSpec spec = a.system.spec();
  if (spec.kind == SystemKind::heisenberg) return pped_with(a, HeisenbergSystem(spec));
  return pped_with(a, RotationSystem(spec));
}

// --------------------------------------------------------------- searches

struct SearchArgs {
  Common common;
  SystemArgs system;
  std::vector<double> x;
  std::vector<double> y;
  SearchBudget budget;
  std::optional<double> accept_eps;
  bool cube{false};
};

template <class System>
int search_with(Relation rel, const SearchArgs& a, const System& sys) {
  using P = typename System::point_type;
  const P x = to_point<P>(a.x, sys.spec(), "x");
  const P y = to_point<P>(a.y, sys.spec(), "y");
  SearchBudget b = a.budget;
  b.workers = a.common.workers;
  b.validate();
  WitnessRecord<P> r;
  switch (rel) {
    case Relation::RP:
      r = rp_search(sys, x, y, b);
      break;
    case Relation::RP2:
      r = rp2_search(sys, x, y, b);
      break;
    case Relation::RPDS:
      r = rpds_search(sys, x, y, b);
      break;
  }
  Json j = witness_to_json(r);
  std::ostringstream text;
  text << to_string(rel) << " eps_achieved " << fmt(r.eps_achieved) << " at (m,n) = (" << r.m << "," << r.n
       << ")" << (r.exhausted ? "" : " [time cap reached]") << "\n";
  if (a.cube) {
    const auto cert = witness_to_cube(r, sys, b.workers);
    Json oct = Json::array();
    for (const auto& v : cert.oct) oct.push_back(to_json(v));
    j["cube"] = {{"oct", std::move(oct)}, {"residual", cert.fit.residual}, {"witness_mnp", to_json(cert.fit.witness)}};
    text << "cube residual " << fmt(cert.fit.residual) << "\n";
  }
  emit(a.common, j, text.str());
  if (a.accept_eps && r.eps_achieved > *a.accept_eps) return kFinding;
  return kClean;
}

int cmd_search(Relation rel, const SearchArgs& a) {
  check_workers(a.common);
  if (a.cube && rel != Relation::RP2) throw UsageError("cube: only available for rp2-search");
  if (a.accept_eps && !(*a.accept_eps >= 0.0)) throw UsageError("accept-eps: must be >= 0");
  a.budget.validate();
  const SystemSpec spec = a.system.spec();
  if (spec.kind == SystemKind::heisenberg) return search_with(rel, a, HeisenbergSystem(spec));
  return search_with(rel, a, RotationSystem(spec));
}

// ---------------------------------------------------------------- regtest

struct RegtestArgs {
  Common common;
  std::string input;
  RegularityParams params;
  std::optional<std::int64_t> k_lo;
  std::optional<std::int64_t> k_hi;
  bool calibrate{false};
  std::vector<std::int64_t> M_grid{5, 10, 25};
  std::vector<double> delta_grid{0.02, 0.05, 0.1};
  std::string csv;
  bool timing{false};
};

int cmd_regtest(const RegtestArgs& a) {
  check_workers(a.common);
  const SequenceSample u = load_sequence(a.input);
  RegularityParams p = a.params;
  p.k_lo = a.k_lo;
  p.k_hi = a.k_hi;

  RegularityReport report;
  Json j;
  if (a.calibrate) {
    if (a.k_lo || a.k_hi) throw UsageError("k-lo/k-hi: not supported with --calibrate");
    if (a.M_grid.empty()) throw UsageError("M-grid: must be nonempty");
    if (a.delta_grid.empty()) throw UsageError("delta-grid: must be nonempty");
    // validate every grid point before scanning
    for (auto M : a.M_grid) {
      for (double d : a.delta_grid) {
        RegularityParams q = p;
        q.M = M;
        q.delta = d;
        resolve_k_range(u, q);
      }
    }
    auto c = nilscope::calibrate(u, p.order, p.eps, a.M_grid, a.delta_grid, p.shift_max, a.common.workers);
    if (!a.timing) c.report.elapsed_ms = 0;
    report = c.report;
    j = calibration_to_json(c);
  } else {
    resolve_k_range(u, p);
    report = run_regularity(u, p, a.common.workers);
    if (!a.timing) report.elapsed_ms = 0;
    j = report_to_json(report);
  }

  std::ostringstream text;
  if (a.calibrate) text << "calibrated M = " << report.M << ", delta = " << fmt(report.delta) << "\n";
  text << "order " << report.order << " test, eps " << fmt(report.eps) << ", delta " << fmt(report.delta) << ", M "
       << report.M << ", shift_max " << report.shift_max << ", k in [" << report.k_range.lo << ", "
       << report.k_range.hi << "]\n"
       << report.violations.size() << " violations, " << report.hypothesis_count << " hypothesis hits ("
       << report.informative_count << " informative)" << (report.vacuous ? ", vacuous" : "") << "\n";
  if (a.timing) text << "elapsed " << report.elapsed_ms << " ms\n";

  if (!a.csv.empty()) {
    std::ostringstream os;
    write_violations_csv(os, report);
    write_file_atomic(a.csv, os.str());
  }
  emit(a.common, j, text.str());
  if (a.calibrate) return j["clean"].get<bool>() ? kClean : kFinding;
  return report.violations.empty() ? kClean : kFinding;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"nilscope: Heisenberg nilsystems, dynamical cubes, regional proximality and sequence regularity"};
  app.set_config("--config", "", "key = value configuration file; command-line flags take precedence");
  app.require_subcommand(1);
  std::function<int()> run;

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "Generate a sequence u_n = f(T^n e) and write it as CSV or JSON");
  add_common(g, gen.common);
  add_system(g, gen.system);
  g->add_option("--observable", gen.observable,
                "distance-to-base | vertical-theta | torus-character | quadratic-phase")
      ->capture_default_str();
  g->add_option("--m-freq", gen.m_freq, "Vertical frequency (vertical-theta)")->capture_default_str();
  g->add_option("--j-trunc", gen.j_trunc, "Theta truncation (vertical-theta)")->capture_default_str();
  g->add_option("--k1", gen.k1, "First character frequency")->capture_default_str();
  g->add_option("--k2", gen.k2, "Second character frequency")->capture_default_str();
  g->add_option("--base", gen.base, "Base point x,y,z (distance-to-base)")->delimiter(',')->expected(3);
  g->add_option("--n", gen.N, "Half-width N; indices run over [-N, N]")->capture_default_str();
  g->add_option("--format", gen.format, "csv | json (default from the --out extension)");
  g->callback([&] { run = [&] { return cmd_generate(gen); }; });

  SampleArgs smp;
  auto* s = app.add_subcommand("sample", "Write orbit-sampled parallelograms or parallelepipeds as a point file");
  add_common(s, smp.common);
  add_system(s, smp.system);
  s->add_option("--kind", smp.kind, "pgram | pped")->capture_default_str();
  s->add_option("--count", smp.count, "Number of configurations")->capture_default_str();
  s->add_option("--range", smp.range, "Bound on |m|, |n|, |p|")->capture_default_str();
  s->add_option("--seed", smp.seed, "Random seed")->capture_default_str();
  s->add_flag("--hide-last", smp.hide_last, "Omit the eighth vertex (input for pped-complete)");
  s->callback([&] { run = [&] { return cmd_sample(smp); }; });

  PgramArgs pg;
  auto* p = app.add_subcommand("pgram-test", "Test consecutive groups of 4 points for parallelogram membership");
  add_common(p, pg.common);
  add_system(p, pg.system);
  p->add_option("--input", pg.input, "Point file")->required();
  p->add_option("--tol", pg.tol, "Membership tolerance")->capture_default_str();
  p->callback([&] { run = [&] { return cmd_pgram(pg); }; });

  PpedArgs pp;
  auto* c = app.add_subcommand("pped-complete", "Complete 7 points to a parallelepiped by witness search");
  add_common(c, pp.common);
  add_system(c, pp.system);
  c->add_option("--input", pp.input, "Point file with 7 points")->required();
  c->add_option("--horizon", pp.opts.horizon, "Search box [-H, H]^3")->capture_default_str();
  c->add_option("--resid-tol", pp.opts.resid_tol, "Residual accepted as complete")->capture_default_str();
  c->add_option("--face-tol", pp.opts.face_tol, "Tolerance of the face precondition")->capture_default_str();
  c->add_option("--spread-factor", pp.opts.spread_factor, "Near-witness factor for the spread")
      ->capture_default_str();
  c->callback([&] { run = [&] { return cmd_pped(pp); }; });

  SearchArgs sa;
  const auto add_search = [&](const char* name, const char* help, Relation rel) {
    auto* sub = app.add_subcommand(name, help);
    add_common(sub, sa.common);
    add_system(sub, sa.system);
    sub->add_option("--x", sa.x, "First point")->delimiter(',')->required();
    sub->add_option("--y", sa.y, "Second point")->delimiter(',')->required();
    sub->add_option("--n-max", sa.budget.n_max, "Bound on |m|, |n|")->capture_default_str();
    sub->add_option("--perturb-samples", sa.budget.perturb_samples, "Perturbations per point")
        ->capture_default_str();
    sub->add_option("--perturb-radius", sa.budget.perturb_radius, "Perturbation radius")->capture_default_str();
    sub->add_option("--time-cap-ms", sa.budget.time_cap_ms, "Time cap")->capture_default_str();
    sub->add_option("--seed", sa.budget.seed, "Offset into the perturbation sequence")->capture_default_str();
    sub->add_option("--accept-eps", sa.accept_eps, "Exit 1 when eps_achieved exceeds this value");
    if (rel == Relation::RP2) sub->add_flag("--cube", sa.cube, "Also build and score the associated cube");
    sub->callback([&, rel] { run = [&, rel] { return cmd_search(rel, sa); }; });
  };
  add_search("rp-search", "Witness search for regional proximality", Relation::RP);
  add_search("rp2-search", "Witness search for double regional proximality", Relation::RP2);
  add_search("rpds-search", "Witness search for strong double regional proximality", Relation::RPDS);

  RegtestArgs rt;
  auto* r = app.add_subcommand("regtest", "Arithmetic-regularity test of a sequence file");
  add_common(r, rt.common);
  r->add_option("--input", rt.input, "Sequence file (CSV n,re,im or JSON)")->required();
  r->add_option("--order", rt.params.order, "1 (almost periodic) or 2 (nilsequence)")->capture_default_str();
  r->add_option("--eps", rt.params.eps, "Conclusion threshold")->capture_default_str();
  r->add_option("--delta", rt.params.delta, "Hypothesis threshold")->capture_default_str();
  r->add_option("--M", rt.params.M, "Hypothesis half-window")->capture_default_str();
  r->add_option("--shift-max", rt.params.shift_max, "Bound on |m|, |n|, |p|")->capture_default_str();
  r->add_option("--k-lo", rt.k_lo, "First k tested");
  r->add_option("--k-hi", rt.k_hi, "Last k tested");
  r->add_flag("--calibrate", rt.calibrate, "Scan the (M, delta) grid and report the best pair");
  r->add_option("--M-grid", rt.M_grid, "M values for --calibrate")->delimiter(',')->capture_default_str();
  r->add_option("--delta-grid", rt.delta_grid, "delta values for --calibrate")->delimiter(',')->capture_default_str();
  r->add_option("--csv", rt.csv, "Write violations as CSV k,m,n,p,gap");
  r->add_flag("--timing", rt.timing, "Report elapsed time (outputs are then not reproducible)");
  r->callback([&] { run = [&] { return cmd_regtest(rt); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    apply_workers_env(app.get_subcommands());
    return run();
  } catch (const std::exception& e) {
    std::cerr << "nilscope: error: " << e.what() << "\n";
    return kUsage;
  }
}
