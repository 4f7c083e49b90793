#include "crystal_flow/scenario.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <regex>
#include <set>

#include "crystal_flow/error.hpp"
#include "crystal_flow/io.hpp"

namespace crystal_flow {

using nlohmann::json;

const char* to_string(Action a) {
  switch (a) {
    case Action::Simulate: return "simulate";
    case Action::Catalog: return "catalog";
    case Action::Classify: return "classify";
    case Action::TranslatingCheck: return "translating-check";
    case Action::VerifyIdentity: return "verify-identity";
    case Action::Audit: return "audit";
  }
  return "unknown";
}

std::optional<Action> parse_action(std::string_view name) {
  for (Action a : {Action::Simulate, Action::Catalog, Action::Classify, Action::TranslatingCheck,
                   Action::VerifyIdentity, Action::Audit})
    if (name == to_string(a)) return a;
  return std::nullopt;
}

namespace {

[[noreturn]] void schema(const std::string& what) { throw Error(ErrorKind::SchemaError, what); }

void require_object(const json& j, const std::string& where) {
  if (!j.is_object()) schema(where + " must be an object");
}

void allow_keys(const json& j, const std::string& where, std::initializer_list<const char*> keys) {
  std::set<std::string> ok(keys.begin(), keys.end());
  for (const auto& [k, v] : j.items())
    if (!ok.count(k)) schema("unknown key '" + k + "' in " + where);
}

double num(const json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number()) schema(std::string("'") + key + "' must be a number");
  return j[key].get<double>();
}

int integer(const json& j, const char* key, int fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number_integer()) schema(std::string("'") + key + "' must be an integer");
  return j[key].get<int>();
}

bool boolean(const json& j, const char* key, bool fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_boolean()) schema(std::string("'") + key + "' must be a boolean");
  return j[key].get<bool>();
}

std::string str(const json& j, const char* key, const std::string& fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_string()) schema(std::string("'") + key + "' must be a string");
  return j[key].get<std::string>();
}

Vec2 point(const json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    schema(what + " must be a [x, y] pair");
  return Vec2(j[0].get<double>(), j[1].get<double>());
}

std::vector<Vec2> points(const json& j, const std::string& what) {
  if (!j.is_array()) schema(what + " must be an array of points");
  std::vector<Vec2> out;
  for (const auto& p : j) out.push_back(point(p, what));
  return out;
}

std::vector<double> numbers(const json& j, const char* key) {
  if (!j.contains(key)) return {};
  const json& a = j[key];
  if (!a.is_array()) schema(std::string("'") + key + "' must be an array of numbers");
  std::vector<double> out;
  for (const auto& v : a) {
    if (!v.is_number()) schema(std::string("'") + key + "' must be an array of numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

std::vector<int> integers(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_array()) schema(std::string("'") + key + "' must be an array of integers");
  std::vector<int> out;
  for (const auto& v : j[key]) {
    if (!v.is_number_integer()) schema(std::string("'") + key + "' must be an array of integers");
    out.push_back(v.get<int>());
  }
  return out;
}

// Anything the core raises while constructing objects from a scenario is a build error.
template <class F>
auto build(F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::SchemaError || e.kind() == ErrorKind::BuildError) throw;
    throw Error(ErrorKind::BuildError, e.what());
  }
}

StationaryKind stationary_kind(const std::string& s) {
  if (s == "staircase") return StationaryKind::Staircase;
  if (s == "right-angle-chain") return StationaryKind::RightAngleChain;
  if (s == "double-right-angle-chain") return StationaryKind::DoubleRightAngleChain;
  if (s == "wulff-square") return StationaryKind::WulffSquare;
  schema("unknown stationary class '" + s + "'");
}

TranslatingKind translating_kind(const std::string& s) {
  if (s == "single-step") return TranslatingKind::SingleStep;
  if (s == "convex-rect") return TranslatingKind::ConvexRect;
  if (s == "pocket") return TranslatingKind::Pocket;
  if (s == "convex-chain") return TranslatingKind::ConvexChain;
  schema("unknown translating kind '" + s + "'");
}

std::optional<double> declared_lambda(const json& curve_spec, const FlowParams& p) {
  if (!curve_spec.is_object() || !curve_spec.contains("generator")) return std::nullopt;
  const json& g = curve_spec["generator"];
  if (str(g, "type", "") != "translating") return std::nullopt;
  TranslatingParams tp;
  tp.kind = translating_kind(str(g, "kind", ""));
  tp.lambda = num(g, "lambda", 1.0);
  tp.a = num(g, "a", 0.0);
  tp.m = integer(g, "m", 2);
  return build([&] { return make_translating_square_aniso(tp, p.alpha).lambda; });
}

}  // namespace

std::shared_ptr<const Anisotropy> parse_anisotropy(const json& spec) {
  if (spec.is_string()) {
    const std::string s = spec.get<std::string>();
    if (s == "square") return square_anisotropy();
    std::smatch m;
    if (std::regex_match(s, m, std::regex(R"(regular-(\d+))"))) {
      const int n = std::stoi(m[1]);
      if (n < 3) schema("regular-N needs N >= 3");
      return build([&] { return std::make_shared<const Anisotropy>(Anisotropy::regular(n)); });
    }
    schema("unknown anisotropy preset '" + s + "'");
  }
  require_object(spec, "anisotropy");
  allow_keys(spec, "anisotropy", {"vertices"});
  if (!spec.contains("vertices")) schema("anisotropy needs 'vertices'");
  const auto v = points(spec["vertices"], "anisotropy.vertices");
  return build([&] { return std::make_shared<const Anisotropy>(Anisotropy::from_vertices(v)); });
}

FlowParams parse_params(const json& spec) {
  FlowParams p;
  if (spec.is_null()) return p;
  require_object(spec, "params");
  allow_keys(spec, "params", {"alpha", "window_radius"});
  p.alpha = num(spec, "alpha", p.alpha);
  p.window_radius = num(spec, "window_radius", p.window_radius);
  if (!(p.alpha > 0.0)) schema("alpha must be positive");
  if (!(p.window_radius > 0.0)) schema("window_radius must be positive");
  return p;
}

IntegratorOptions parse_integrator(const json& spec) {
  IntegratorOptions o;
  if (spec.is_null()) return o;
  require_object(spec, "integrator");
  allow_keys(spec, "integrator",
             {"rel_tol", "abs_tol", "vanish_fraction", "max_step", "min_step", "initial_step", "max_time",
              "stationarity_tol", "sample_stride", "window_fraction", "window_min_samples", "stop_on_convergence",
              "detect_divergence", "output_times", "max_steps"});
  o.rel_tol = num(spec, "rel_tol", o.rel_tol);
  o.abs_tol = num(spec, "abs_tol", o.abs_tol);
  o.vanish_fraction = num(spec, "vanish_fraction", o.vanish_fraction);
  o.max_step = num(spec, "max_step", o.max_step);
  o.min_step = num(spec, "min_step", o.min_step);
  o.initial_step = num(spec, "initial_step", o.initial_step);
  o.max_time = num(spec, "max_time", o.max_time);
  o.stationarity_tol = num(spec, "stationarity_tol", o.stationarity_tol);
  o.sample_stride = num(spec, "sample_stride", o.sample_stride);
  o.window_fraction = num(spec, "window_fraction", o.window_fraction);
  o.window_min_samples = integer(spec, "window_min_samples", o.window_min_samples);
  o.stop_on_convergence = boolean(spec, "stop_on_convergence", o.stop_on_convergence);
  o.detect_divergence = boolean(spec, "detect_divergence", o.detect_divergence);
  o.output_times = numbers(spec, "output_times");
  if (spec.contains("max_steps")) o.max_steps = integer(spec, "max_steps", 0);
  for (double v : {o.rel_tol, o.abs_tol, o.max_step, o.min_step, o.initial_step})
    if (!(v > 0.0)) schema("integrator tolerances and steps must be positive");
  if (!(o.max_time > 0.0)) schema("max_time must be positive");
  return o;
}

StationaryParams parse_stationary(const json& g) {
  require_object(g, "stationary generator");
  allow_keys(g, "stationary generator", {"type", "class", "m", "closed", "a", "b", "connectors", "stair", "origin"});
  StationaryParams sp;
  sp.cls.kind = stationary_kind(str(g, "class", ""));
  sp.cls.m = integer(g, "m", sp.cls.kind == StationaryKind::RightAngleChain ||
                                     sp.cls.kind == StationaryKind::DoubleRightAngleChain
                                 ? 1
                                 : 0);
  sp.cls.closed = boolean(g, "closed", sp.cls.kind == StationaryKind::WulffSquare);
  sp.cls.a = num(g, "a", 0.0);
  sp.cls.b = num(g, "b", 0.0);
  sp.connectors = numbers(g, "connectors");
  sp.stair = numbers(g, "stair");
  if (g.contains("origin")) sp.origin = point(g["origin"], "origin");
  return sp;
}

AdmissibleCurve parse_curve(const json& spec, const std::shared_ptr<const Anisotropy>& a, const FlowParams& p,
                            std::optional<std::uint64_t> seed_override) {
  require_object(spec, "curve");
  if (spec.contains("generator")) {
    allow_keys(spec, "curve", {"generator"});
    const json& g = spec["generator"];
    require_object(g, "generator");
    const std::string type = str(g, "type", "");
    if (type == "wulff") {
      allow_keys(g, "wulff generator", {"type", "radius", "center"});
      const double r = num(g, "radius", 1.0);
      const Vec2 c = g.contains("center") ? point(g["center"], "center") : Vec2::Zero();
      if (!(r > 0.0)) schema("radius must be positive");
      std::vector<Vec2> v;
      for (const Vec2& w : a->vertices()) v.push_back(c + r * w);
      return build([&] { return AdmissibleCurve::build(a, Topology::Closed, v); });
    }
    if (type == "stationary") {
      const StationaryParams sp = parse_stationary(g);
      return build([&] { return make_stationary_square_aniso(sp, p.alpha); });
    }
    if (type == "translating") {
      allow_keys(g, "translating generator", {"type", "kind", "lambda", "a", "m", "origin"});
      TranslatingParams tp;
      tp.kind = translating_kind(str(g, "kind", ""));
      tp.lambda = num(g, "lambda", tp.lambda);
      tp.a = num(g, "a", tp.a);
      tp.m = integer(g, "m", tp.m);
      if (g.contains("origin")) tp.origin = point(g["origin"], "origin");
      return build([&] { return make_translating_square_aniso(tp, p.alpha).curve; });
    }
    if (type == "two-rectangle") {
      allow_keys(g, "two-rectangle generator", {"type", "lengths"});
      const auto L = numbers(g, "lengths");
      return build([&] { return make_two_rectangle_square_aniso(L); });
    }
    if (type == "facets") {
      allow_keys(g, "facets generator", {"type", "topology", "facets", "lengths", "start"});
      const std::string topo = str(g, "topology", "closed");
      const auto f = integers(g, "facets");
      const auto L = numbers(g, "lengths");
      const Vec2 start = g.contains("start") ? point(g["start"], "start") : Vec2::Zero();
      if (topo == "closed") return build([&] { return make_closed_from_facets(a, f, L, start); });
      if (topo == "unbounded") return build([&] { return make_unbounded_from_facets(a, f, L, start); });
      schema("topology must be 'closed' or 'unbounded'");
    }
    if (type == "random") {
      allow_keys(g, "random generator", {"type", "segments", "index", "seed", "min_length"});
      const int segs = integer(g, "segments", 8);
      const int index = integer(g, "index", 1);
      std::uint64_t seed = 0;
      if (g.contains("seed")) {
        if (!g["seed"].is_number_unsigned()) schema("'seed' must be a non-negative integer");
        seed = g["seed"].get<std::uint64_t>();
      }
      if (seed_override) seed = *seed_override;
      const double min_len = num(g, "min_length", 0.3);
      return build([&] { return random_closed_curve(a, segs, index, seed, min_len); });
    }
    schema("unknown generator type '" + type + "'");
  }
  allow_keys(spec, "curve", {"vertices", "topology", "rays"});
  if (!spec.contains("vertices")) schema("curve needs 'vertices' or 'generator'");
  const auto v = points(spec["vertices"], "curve.vertices");
  const std::string topo = str(spec, "topology", "closed");
  if (topo == "closed") {
    if (spec.contains("rays")) schema("closed curves take no rays");
    return build([&] { return AdmissibleCurve::build(a, Topology::Closed, v); });
  }
  if (topo != "unbounded") schema("topology must be 'closed' or 'unbounded'");
  std::optional<std::pair<Vec2, Vec2>> rays;
  if (spec.contains("rays")) {
    const auto r = points(spec["rays"], "curve.rays");
    if (r.size() != 2) schema("rays must hold two directions");
    rays = std::make_pair(r[0], r[1]);
  }
  return build([&] { return AdmissibleCurve::build(a, Topology::Unbounded, v, rays); });
}

std::vector<CheckResult> evaluate_checks(const json& checks, const json& metrics) {
  std::vector<CheckResult> out;
  if (checks.is_null()) return out;
  if (!checks.is_array()) schema("checks must be an array");
  for (const json& c : checks) {
    require_object(c, "check");
    allow_keys(c, "check", {"metric", "max", "min", "equals", "target", "tol"});
    CheckResult r;
    r.metric = str(c, "metric", "");
    if (r.metric.empty()) schema("check needs a metric");
    if (c.contains("target") != c.contains("tol")) schema("target and tol go together");
    if (!metrics.contains(r.metric)) {
      r.detail = "metric not produced";
      out.push_back(r);
      continue;
    }
    const json& v = metrics[r.metric];
    r.passed = true;
    if (c.contains("equals")) {
      r.passed = v == c["equals"];
      r.detail = "value " + v.dump() + ", expected " + c["equals"].dump();
    }
    std::vector<json> values;
    if (v.is_array())
      for (const auto& e : v) values.push_back(e);
    else
      values.push_back(v);
    auto numeric = [&](const char* key, auto pred, const std::string& op) {
      if (!c.contains(key)) return;
      const double bound = num(c, key, 0.0);
      for (const json& e : values) {
        const bool ok = e.is_number() && pred(e.get<double>(), bound);
        if (!ok) r.passed = false;
        if (!ok || r.detail.empty()) r.detail = "value " + e.dump() + " " + op + " " + format_double(bound);
        if (!ok) break;
      }
    };
    numeric("max", [](double x, double b) { return x <= b; }, "<=");
    numeric("min", [](double x, double b) { return x >= b; }, ">=");
    if (c.contains("target")) {
      const double target = num(c, "target", 0.0), tol = num(c, "tol", 0.0);
      for (const json& e : values) {
        const bool ok = e.is_number() && std::abs(e.get<double>() - target) <= tol;
        if (!ok) r.passed = false;
        if (!ok || r.detail.empty())
          r.detail = "value " + e.dump() + " within " + format_double(tol) + " of " + format_double(target);
        if (!ok) break;
      }
    }
    out.push_back(r);
  }
  return out;
}

namespace {

struct Context {
  json scenario;
  std::string name;
  std::filesystem::path dir;
  std::shared_ptr<const Anisotropy> aniso;
  FlowParams params;
  IntegratorOptions integrator;
  const RunOptions* run = nullptr;
  ScenarioOutcome* outcome = nullptr;

  AdmissibleCurve curve() const {
    if (!scenario.contains("curve")) schema("scenario needs a curve");
    return parse_curve(scenario["curve"], aniso, params, run->seed);
  }
  void write(const std::string& file, const json& j) const {
    write_json(dir / file, j);
    outcome->written.push_back(dir / file);
  }
  void write_text_file(const std::string& file, const std::string& text) const {
    write_text(dir / file, text);
    outcome->written.push_back(dir / file);
  }
};

json bounded_lengths(const AdmissibleCurve& c) {
  json a = json::array();
  for (int i = 0; i < c.size(); ++i)
    if (!c.is_half_line(i)) a.push_back(c.length(i));
  return a;
}

void trajectory_metrics(const Trajectory& traj, const AdmissibleCurve& c0, json& m) {
  const Sample& last = traj.last();
  const AdmissibleCurve cf = traj.curve_at(traj.samples.size() - 1);
  m["status"] = to_string(traj.status);
  m["steps"] = traj.steps;
  m["rejected_steps"] = traj.rejected;
  m["samples"] = traj.samples.size();
  m["epochs"] = traj.epochs.size();
  m["restarts"] = traj.restarts.size();
  m["final_time"] = last.t;
  m["segments_initial"] = c0.size();
  m["segments_final"] = cf.size();
  m["final_lengths"] = bounded_lengths(cf);
  m["max_rate_final"] = last.rates.size() ? last.rates.cwiseAbs().maxCoeff() : 0.0;
  const double e0 = traj.samples.front().energy;
  if (std::isfinite(e0)) m["energy_initial"] = e0;
  if (std::isfinite(last.energy)) m["energy_final"] = last.energy;

  double rise = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k < traj.samples.size(); ++k) {
    const Sample &a = traj.samples[k - 1], &b = traj.samples[k];
    if (std::isfinite(a.energy) && std::isfinite(b.energy)) rise = std::max(rise, b.energy - a.energy);
  }
  if (std::isfinite(rise)) m["energy_increase_max"] = rise;

  bool restart_c_zero = true, restart_index_kept = true, restart_fewer = true;
  double restart_rise = -std::numeric_limits<double>::infinity();
  for (const RestartRecord& r : traj.restarts) {
    const AdmissibleCurve& before = traj.epochs[r.epoch_before];
    for (int i : r.vanished) restart_c_zero = restart_c_zero && before.transition(i) == 0;
    restart_index_kept = restart_index_kept && r.index_before == r.index_after;
    restart_fewer = restart_fewer && r.segments_after < r.segments_before;
    if (std::isfinite(r.energy_before) && std::isfinite(r.energy_after))
      restart_rise = std::max(restart_rise, r.energy_after - r.energy_before);
  }
  if (!traj.restarts.empty()) {
    m["restart_vanished_zero_transition"] = restart_c_zero;
    m["restart_index_preserved"] = restart_index_kept;
    m["restart_segments_decrease"] = restart_fewer;
    if (std::isfinite(restart_rise)) m["restart_energy_increase_max"] = restart_rise;
  }

  if (c0.closed()) {
    m["index_initial"] = curve_index(c0);
    m["index_final"] = curve_index(cf);
    bool convex = true;
    double margin = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < traj.samples.size(); ++k) {
      const Sample& s = traj.samples[k];
      const AdmissibleCurve& ref = traj.epochs[s.epoch];
      for (int i = 0; i < ref.size(); ++i) {
        const int ci = ref.transition(i);
        if (ci == 0) continue;
        margin = std::min(margin, s.lengths[i] - traj.params.alpha * ref.support(i) * ref.facet_length(i) *
                                                     ref.facet_length(i) / e0);
      }
      if (convex && !is_convex(traj.curve_at(k))) convex = false;
    }
    m["convex_initial"] = is_convex(c0);
    m["convex_all_samples"] = convex;
    if (std::isfinite(margin)) m["length_lower_bound_margin"] = margin;
    Eigen::AlignedBox2d box;
    for (const Vec2& v : cf.vertices()) box.extend(v);
    m["final_width"] = box.sizes().x();
    m["final_height"] = box.sizes().y();
  }
  if (traj.limit) {
    m["limit_generalized"] = traj.limit->generalized;
    m["limit_residual"] = traj.limit->residual;
  }
}

std::vector<double> snapshot_times(const json& outputs) {
  if (!outputs.is_object() || !outputs.contains("snapshots")) return {};
  return numbers(outputs, "snapshots");
}

void emit_trajectory(const Context& ctx, const Trajectory& traj, const std::string& prefix) {
  const json outputs = ctx.scenario.value("outputs", json::object());
  if (boolean(outputs, "series", true)) {
    ctx.write_text_file(prefix + "series.csv", series_csv(traj));
    ctx.write(prefix + "epochs.json", epochs_manifest(traj));
  }
  const auto times = snapshot_times(outputs);
  if (!times.empty()) ctx.write(prefix + "snapshots.json", snapshots_json(traj, times));
}

IntegratorOptions with_snapshots(const Context& ctx) {
  IntegratorOptions o = ctx.integrator;
  for (double t : snapshot_times(ctx.scenario.value("outputs", json::object())))
    if (t > 0.0 && t <= o.max_time) o.output_times.push_back(t);
  return o;
}

void action_simulate(const Context& ctx) {
  const AdmissibleCurve c0 = ctx.curve();
  json& m = ctx.outcome->metrics;
  Trajectory traj;
  try {
    traj = evolve(c0, ctx.params, with_snapshots(ctx));
  } catch (const Error& e) {
    m["error"] = to_string(e.kind());
    m["error_message"] = e.what();
    return;
  }
  trajectory_metrics(traj, c0, m);
  try {
    m["dissipation_residual"] = dissipation_residual(traj, ctx.params);
  } catch (const Error&) {
  }
  emit_trajectory(ctx, traj, "");
}

void action_audit(const Context& ctx) {
  const AdmissibleCurve c0 = ctx.curve();
  json& m = ctx.outcome->metrics;
  const json audit = ctx.scenario.value("audit", json::object());
  require_object(audit, "audit");
  allow_keys(audit, "audit", {"rel_tols"});
  std::vector<double> tols = numbers(audit, "rel_tols");
  if (tols.empty()) tols = {1e-8, 1e-10};
  json residuals = json::array();
  for (std::size_t k = 0; k < tols.size(); ++k) {
    IntegratorOptions o = with_snapshots(ctx);
    o.rel_tol = tols[k];
    Trajectory traj;
    try {
      traj = evolve(c0, ctx.params, o);
    } catch (const Error& e) {
      m["error"] = to_string(e.kind());
      m["error_message"] = e.what();
      return;
    }
    const double r = dissipation_residual(traj, ctx.params);
    residuals.push_back(r);
    if (k == 0) {
      trajectory_metrics(traj, c0, m);
      m["dissipation_residual"] = r;
      emit_trajectory(ctx, traj, "");
    }
  }
  m["rel_tols"] = tols;
  m["dissipation_residuals"] = residuals;
  const double first = residuals.front().get<double>(), last = residuals.back().get<double>();
  m["dissipation_shrink"] = last > 0.0 ? first / last : std::numeric_limits<double>::max();
}

std::vector<StationaryParams> default_catalog(double alpha) {
  std::vector<StationaryParams> out;
  auto add = [&](StationaryKind k, bool closed, int m, double a = 0.0, double b = 0.0) {
    StationaryParams sp;
    sp.cls = {k, closed, m, a, b};
    out.push_back(sp);
  };
  add(StationaryKind::Staircase, false, 0);
  for (int m = 1; m <= 4; ++m) {
    add(StationaryKind::RightAngleChain, false, m);
    add(StationaryKind::RightAngleChain, true, m);
  }
  const double s = std::sqrt(2.0 * alpha);
  for (int m = 1; m <= 3; ++m) {
    for (double f : {1.2, std::sqrt(2.0), 2.5}) add(StationaryKind::DoubleRightAngleChain, false, m, f * s);
    add(StationaryKind::DoubleRightAngleChain, true, m);
  }
  add(StationaryKind::WulffSquare, true, 0);
  return out;
}

json class_json(const StationaryClass& c) {
  json j;
  j["kind"] = to_string(c.kind);
  j["closed"] = c.closed;
  j["m"] = c.m;
  if (c.kind == StationaryKind::DoubleRightAngleChain) {
    j["a"] = c.a;
    j["b"] = c.b;
  }
  return j;
}

void action_catalog(const Context& ctx) {
  std::vector<StationaryParams> entries;
  if (ctx.scenario.contains("catalog")) {
    const json& list = ctx.scenario["catalog"];
    if (!list.is_array()) schema("catalog must be an array");
    for (const json& e : list) entries.push_back(parse_stationary(e));
  } else {
    entries = default_catalog(ctx.params.alpha);
  }
  json out = json::array();
  double worst = 0.0;
  int failures = 0;
  for (const StationaryParams& sp : entries) {
    const AdmissibleCurve c = build([&] { return make_stationary_square_aniso(sp, ctx.params.alpha); });
    const double r = stationarity_residual(c, ctx.params);
    StationaryClass got;
    try {
      got = classify_stationary_square(c, ctx.params.alpha);
    } catch (const Error&) {
    }
    const bool round_trip = got == sp.cls;
    worst = std::max(worst, r);
    failures += !round_trip;
    json e;
    e["class"] = class_json(sp.cls);
    e["classified"] = class_json(got);
    e["round_trip"] = round_trip;
    e["residual"] = r;
    e["curve"] = curve_json(c, ctx.params.window_radius);
    out.push_back(e);
  }
  ctx.write("catalog.json", out);
  json& m = ctx.outcome->metrics;
  m["entries"] = entries.size();
  m["max_residual"] = worst;
  m["round_trip_failures"] = failures;
}

void action_classify(const Context& ctx) {
  const AdmissibleCurve c = ctx.curve();
  json& m = ctx.outcome->metrics;
  m["residual"] = stationarity_residual(c, ctx.params);
  try {
    const StationaryClass cls = classify_stationary_square(c, ctx.params.alpha);
    m["kind"] = to_string(cls.kind);
    m["closed"] = cls.closed;
    m["m"] = cls.m;
    if (cls.kind == StationaryKind::DoubleRightAngleChain) {
      m["a"] = cls.a;
      m["b"] = cls.b;
    }
  } catch (const Error& e) {
    m["kind"] = to_string(e.kind());
  }
  ctx.write("classification.json", m);
}

void action_translating_check(const Context& ctx) {
  const AdmissibleCurve c = ctx.curve();
  Vec2 eta(0.0, 1.0);
  if (ctx.scenario.contains("eta")) eta = point(ctx.scenario["eta"], "eta");
  const double tol = num(ctx.scenario, "tolerance", 1e-10);
  json& m = ctx.outcome->metrics;
  try {
    const TranslationReport rep = translation_check(c, ctx.params, eta, tol);
    m["accepted"] = rep.accepted;
    m["lambda"] = rep.lambda;
    m["residual"] = rep.residual;
    if (!rep.reason.empty()) m["reason"] = rep.reason;
    if (const auto lam = declared_lambda(ctx.scenario["curve"], ctx.params)) {
      m["declared_lambda"] = *lam;
      m["lambda_error"] = std::abs(rep.lambda - *lam);
    }
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::BuildError || e.kind() == ErrorKind::SchemaError) throw;
    m["error"] = to_string(e.kind());
    m["error_message"] = e.what();
  }
  ctx.write("translation.json", m);
}

void action_verify_identity(const Context& ctx) {
  std::vector<std::shared_ptr<const Anisotropy>> shapes;
  std::vector<std::string> labels;
  if (ctx.scenario.contains("anisotropies")) {
    const json& list = ctx.scenario["anisotropies"];
    if (!list.is_array()) schema("anisotropies must be an array");
    for (const json& s : list) {
      shapes.push_back(parse_anisotropy(s));
      labels.push_back(s.is_string() ? s.get<std::string>() : s.dump());
    }
  } else {
    shapes.push_back(ctx.aniso);
    labels.push_back(ctx.scenario.contains("anisotropy") ? ctx.scenario["anisotropy"].dump() : "square");
  }
  json out = json::array();
  double worst = 0.0;
  long count = 0;
  for (std::size_t k = 0; k < shapes.size(); ++k) {
    const Anisotropy& a = *shapes[k];
    double shape_worst = 0.0;
    for (int j = 0; j < a.facet_count(); ++j) {
      const int p = a.prev(j), n = a.next(j);
      for (const FacetTriple t : {FacetTriple{p, j, n}, FacetTriple{n, j, p}, FacetTriple{p, j, p}, FacetTriple{n, j, n}}) {
        shape_worst = std::max(shape_worst, facet_identity_residual(a, t));
        ++count;
      }
    }
    worst = std::max(worst, shape_worst);
    out.push_back({{"anisotropy", labels[k]}, {"facets", a.facet_count()}, {"max_residual", shape_worst}});
  }
  ctx.write("identity.json", out);
  json& m = ctx.outcome->metrics;
  m["anisotropies"] = shapes.size();
  m["triples"] = count;
  m["max_residual"] = worst;
}

ScenarioOutcome fail(ScenarioOutcome o, int code, const std::string& msg) {
  o.exit_code = code;
  o.message = msg;
  return o;
}

}  // namespace

ScenarioOutcome run_scenario(const json& sc, Action action, const RunOptions& opts) {
  ScenarioOutcome out;
  try {
    require_object(sc, "scenario");
    allow_keys(sc, "scenario",
               {"schema", "name", "action", "description", "anisotropy", "anisotropies", "params", "integrator",
                "curve", "outputs", "checks", "catalog", "audit", "eta", "tolerance"});
    if (str(sc, "schema", "") != kScenarioSchema) schema(std::string("schema must be '") + kScenarioSchema + "'");
    out.name = str(sc, "name", "");
    if (!std::regex_match(out.name, std::regex(R"([A-Za-z0-9._-]+)"))) schema("name must match [A-Za-z0-9._-]+");
    if (sc.contains("action") && str(sc, "action", "") != to_string(action))
      schema("scenario is for '" + str(sc, "action", "") + "', not '" + to_string(action) + "'");

    Context ctx;
    ctx.scenario = sc;
    ctx.name = out.name;
    ctx.dir = opts.out_dir / out.name;
    ctx.aniso = parse_anisotropy(sc.value("anisotropy", json("square")));
    ctx.params = parse_params(sc.value("params", json()));
    ctx.integrator = parse_integrator(sc.value("integrator", json()));
    if (opts.max_time) ctx.integrator.max_time = *opts.max_time;
    ctx.run = &opts;
    ctx.outcome = &out;
    const json outputs = sc.value("outputs", json::object());
    require_object(outputs, "outputs");
    allow_keys(outputs, "outputs", {"series", "snapshots", "summary"});
    if (sc.contains("checks") && !sc["checks"].is_array()) schema("checks must be an array");

    switch (action) {
      case Action::Simulate: action_simulate(ctx); break;
      case Action::Audit: action_audit(ctx); break;
      case Action::Catalog: action_catalog(ctx); break;
      case Action::Classify: action_classify(ctx); break;
      case Action::TranslatingCheck: action_translating_check(ctx); break;
      case Action::VerifyIdentity: action_verify_identity(ctx); break;
    }

    bool failed = out.metrics.contains("error");
    if (opts.check) {
      out.checks = evaluate_checks(sc.value("checks", json()), out.metrics);
      bool covers_error = false;
      failed = false;
      for (const CheckResult& c : out.checks) {
        failed = failed || !c.passed;
        covers_error = covers_error || c.metric == "error";
      }
      if (out.metrics.contains("error") && !covers_error) failed = true;
    }
    if (boolean(outputs, "summary", true)) {
      json summary;
      summary["name"] = out.name;
      summary["action"] = to_string(action);
      summary["metrics"] = out.metrics;
      if (opts.check) {
        summary["checks"] = json::array();
        for (const CheckResult& c : out.checks)
          summary["checks"].push_back({{"metric", c.metric}, {"passed", c.passed}, {"detail", c.detail}});
      }
      ctx.write("summary.json", summary);
    }
    if (failed) {
      out.exit_code = 1;
      out.message = out.metrics.contains("error") && !opts.check
                        ? out.metrics["error_message"].get<std::string>()
                        : "check failed";
    }
    return out;
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::SchemaError || e.kind() == ErrorKind::BuildError ||
        e.kind() == ErrorKind::IOFailure || e.kind() == ErrorKind::TimeOutOfRange)
      return fail(std::move(out), 2, e.what());
    return fail(std::move(out), 1, e.what());
  } catch (const json::exception& e) {
    return fail(std::move(out), 2, std::string("SchemaError: ") + e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(std::move(out), 2, std::string("IOFailure: ") + e.what());
  }
}

ScenarioOutcome run_scenario(const std::filesystem::path& path, Action action, const RunOptions& opts) {
  std::ifstream f(path);
  if (!f) {
    ScenarioOutcome out;
    out.name = path.stem().string();
    return fail(std::move(out), 2, "IOFailure: cannot read " + path.string());
  }
  json sc;
  try {
    sc = json::parse(f);
  } catch (const json::parse_error& e) {
    ScenarioOutcome out;
    out.name = path.stem().string();
    return fail(std::move(out), 2, std::string("SchemaError: ") + e.what());
  }
  return run_scenario(sc, action, opts);
}

}  // namespace crystal_flow
