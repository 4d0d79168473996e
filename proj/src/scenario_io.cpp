#include "swarm_opt/scenario_io.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace swarm {

using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& where, const std::string& what) {
  throw ValidationError(where + ": " + what);
}

void only_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) bad(where, "expected an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, _] : j.items()) {
    if (!ok.count(key)) bad(where, "unknown key '" + key + "'");
  }
}

const json& need(const json& j, const char* key, const std::string& where) {
  const auto it = j.find(key);
  if (it == j.end()) bad(where, std::string("missing key '") + key + "'");
  return *it;
}

double number(const json& j, const std::string& where) {
  if (!j.is_number()) bad(where, "expected a number");
  return j.get<double>();
}

std::int64_t integer(const json& j, const std::string& where) {
  if (!j.is_number_integer()) bad(where, "expected an integer");
  return j.get<std::int64_t>();
}

Vec vector(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) bad(where, "expected a nonempty array of numbers");
  Vec out(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) out[static_cast<Eigen::Index>(i)] = number(j[i], where);
  return out;
}

json to_array(const Vec& x) { return json(std::vector<double>(x.data(), x.data() + x.size())); }

// Rewraps errors from the model constructors so they carry the key path.
template <class F>
auto at_path(const std::string& where, F&& build) {
  try {
    return build();
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    if (msg.rfind(where, 0) == 0) throw;
    bad(where, msg);
  }
}

std::pair<std::size_t, std::size_t> line_column(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t col = 1;
  const std::size_t end = std::min(byte == 0 ? 0 : byte - 1, text.size());
  for (std::size_t i = 0; i < end; ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

json tolerances_to_json(const EngineTolerances& t) {
  return {{"tol_eq", t.tol_eq}, {"tol_zero", t.tol_zero}, {"n_alpha", t.segment.n_alpha},
          {"tol_beta", t.segment.tol_beta}};
}

EngineTolerances tolerances_from_json(const json& j, const std::string& where) {
  only_keys(j, where, {"tol_eq", "tol_zero", "n_alpha", "tol_beta"});
  EngineTolerances t;
  if (j.contains("tol_eq")) t.tol_eq = number(j["tol_eq"], where + ".tol_eq");
  if (j.contains("tol_zero")) t.tol_zero = number(j["tol_zero"], where + ".tol_zero");
  if (j.contains("n_alpha")) t.segment.n_alpha = static_cast<int>(integer(j["n_alpha"], where + ".n_alpha"));
  if (j.contains("tol_beta")) t.segment.tol_beta = number(j["tol_beta"], where + ".tol_beta");
  if (!(t.tol_eq > 0.0) || !(t.tol_zero > 0.0) || !(t.segment.tol_beta > 0.0) || t.segment.n_alpha < 2) {
    bad(where, "tolerances must be positive and n_alpha at least 2");
  }
  return t;
}

}  // namespace

json region_to_json(const ConvexRegion& region) {
  const auto& s = region.shape();
  if (const auto* b = std::get_if<Ball>(&s)) return {{"ball", {{"center", to_array(b->center)}, {"radius", b->radius}}}};
  if (const auto* b = std::get_if<Box>(&s)) return {{"box", {{"lower", to_array(b->lower)}, {"upper", to_array(b->upper)}}}};
  if (const auto* h = std::get_if<HalfspaceIntersection>(&s)) {
    json normals = json::array();
    for (const auto& nrm : h->normals) normals.push_back(to_array(nrm));
    return {{"halfspaces", {{"normals", normals}, {"offsets", h->offsets}, {"witness", to_array(h->witness)}}}};
  }
  return {{"whole_space", {{"dim", std::get<WholeSpace>(s).dim}}}};
}

ConvexRegion region_from_json(const json& j, const std::string& where) {
  if (!j.is_object() || j.size() != 1) bad(where, "expected exactly one of ball, box, halfspaces, whole_space");
  const std::string kind = j.begin().key();
  const json& body = j.begin().value();
  const std::string at = where + "." + kind;
  if (kind == "ball") {
    only_keys(body, at, {"center", "radius"});
    return at_path(at, [&] {
      return ConvexRegion::ball(vector(need(body, "center", at), at + ".center"),
                                number(need(body, "radius", at), at + ".radius"));
    });
  }
  if (kind == "box") {
    only_keys(body, at, {"lower", "upper"});
    return at_path(at, [&] {
      return ConvexRegion::box(vector(need(body, "lower", at), at + ".lower"),
                               vector(need(body, "upper", at), at + ".upper"));
    });
  }
  if (kind == "halfspaces") {
    only_keys(body, at, {"normals", "offsets", "witness"});
    const json& jn = need(body, "normals", at);
    const json& jo = need(body, "offsets", at);
    if (!jn.is_array() || !jo.is_array()) bad(at, "normals and offsets must be arrays");
    std::vector<Vec> normals;
    std::vector<double> offsets;
    for (std::size_t i = 0; i < jn.size(); ++i) normals.push_back(vector(jn[i], at + ".normals[" + std::to_string(i) + "]"));
    for (std::size_t i = 0; i < jo.size(); ++i) offsets.push_back(number(jo[i], at + ".offsets[" + std::to_string(i) + "]"));
    return at_path(at, [&] {
      return ConvexRegion::halfspaces(std::move(normals), std::move(offsets),
                                      vector(need(body, "witness", at), at + ".witness"));
    });
  }
  if (kind == "whole_space") {
    only_keys(body, at, {"dim"});
    return at_path(at, [&] { return ConvexRegion::whole_space(integer(need(body, "dim", at), at + ".dim")); });
  }
  bad(where, "unknown region kind '" + kind + "'");
}

json velocity_set_to_json(const VelocitySet& set) {
  json pieces = json::array();
  for (const auto& p : set.pieces()) pieces.push_back(region_to_json(p));
  return {{"type", "union"}, {"pieces", pieces}, {"bounding_radius", set.bounding_radius()}};
}

VelocitySet velocity_set_from_json(const json& j, const std::string& where) {
  only_keys(j, where, {"type", "pieces", "bounding_radius"});
  const json& type = need(j, "type", where);
  if (type != "union") bad(where + ".type", "only \"union\" is supported");
  const json& jp = need(j, "pieces", where);
  if (!jp.is_array() || jp.empty()) bad(where + ".pieces", "expected a nonempty array");
  std::vector<ConvexRegion> pieces;
  for (std::size_t i = 0; i < jp.size(); ++i) {
    pieces.push_back(region_from_json(jp[i], where + ".pieces[" + std::to_string(i) + "]"));
  }
  std::optional<double> radius;
  if (j.contains("bounding_radius")) radius = number(j["bounding_radius"], where + ".bounding_radius");
  return at_path(where, [&] { return VelocitySet(std::move(pieces), radius); });
}

json objective_to_json(const Objective& f) {
  const auto& form = f.form();
  if (const auto* q = std::get_if<ShiftedQuadratic>(&form)) {
    return {{"quadratic", {{"center", to_array(q->center)}, {"weights", to_array(q->weights)}}}};
  }
  if (const auto* q = std::get_if<ShiftedQuartic>(&form)) {
    return {{"quartic", {{"center", to_array(q->center)}, {"weights", to_array(q->weights)}}}};
  }
  json members = json::array();
  for (const auto& m : std::get<ObjectiveSum>(form).members) members.push_back(objective_to_json(m));
  return {{"sum", members}};
}

Objective objective_from_json(const json& j, const std::string& where) {
  if (!j.is_object() || j.size() != 1) bad(where, "expected exactly one of quadratic, quartic, sum");
  const std::string kind = j.begin().key();
  const json& body = j.begin().value();
  const std::string at = where + "." + kind;
  if (kind == "quadratic" || kind == "quartic") {
    only_keys(body, at, {"center", "weights"});
    Vec center = vector(need(body, "center", at), at + ".center");
    Vec weights = body.contains("weights") ? vector(body["weights"], at + ".weights") : Vec::Ones(center.size());
    return at_path(at, [&] {
      return kind == "quadratic" ? Objective::quadratic(center, weights) : Objective::quartic(center, weights);
    });
  }
  if (kind == "sum") {
    if (!body.is_array() || body.empty()) bad(at, "expected a nonempty array");
    std::vector<Objective> members;
    for (std::size_t i = 0; i < body.size(); ++i) {
      members.push_back(objective_from_json(body[i], at + "[" + std::to_string(i) + "]"));
    }
    return at_path(at, [&] { return Objective::sum(std::move(members)); });
  }
  bad(where, "unknown objective kind '" + kind + "'");
}

json schedule_to_json(const GraphSchedule& s) {
  json entries = json::array();
  for (const auto& e : s.entries()) {
    json edges = json::array();
    for (const auto& edge : e.graph.edges()) edges.push_back({edge.from + 1, edge.to + 1, edge.weight});
    entries.push_back({{"dwell", e.dwell}, {"edges", edges}});
  }
  return {{"period_steps", s.period_steps()},
          {"mode", s.mode() == ScheduleMode::Cyclic ? "cyclic" : "random_permutation"},
          {"entries", entries}};
}

GraphSchedule schedule_from_json(const json& j, std::int64_t seed, const std::string& where) {
  only_keys(j, where, {"period_steps", "mode", "min_weight", "n", "entries"});
  const json& je = need(j, "entries", where);
  if (!je.is_array() || je.empty()) bad(where + ".entries", "expected a nonempty array");
  ScheduleMode mode = ScheduleMode::Cyclic;
  if (j.contains("mode")) {
    const json& jm = j["mode"];
    if (jm == "cyclic") {
      mode = ScheduleMode::Cyclic;
    } else if (jm == "random_permutation") {
      mode = ScheduleMode::RandomPermutation;
    } else {
      bad(where + ".mode", "expected \"cyclic\" or \"random_permutation\"");
    }
  }
  const double min_weight = j.contains("min_weight") ? number(j["min_weight"], where + ".min_weight") : kDefaultMinWeight;
  const int n = static_cast<int>(integer(need(j, "n", where), where + ".n"));

  std::vector<ScheduleEntry> entries;
  long total = 0;
  for (std::size_t e = 0; e < je.size(); ++e) {
    const std::string at = where + ".entries[" + std::to_string(e) + "]";
    only_keys(je[e], at, {"dwell", "edges"});
    const auto dwell = integer(need(je[e], "dwell", at), at + ".dwell");
    if (dwell < 1) bad(at + ".dwell", "must be at least 1");
    const json& jedges = need(je[e], "edges", at);
    if (!jedges.is_array()) bad(at + ".edges", "expected an array");
    std::vector<Edge> edges;
    for (std::size_t k = 0; k < jedges.size(); ++k) {
      const std::string ek = at + ".edges[" + std::to_string(k) + "]";
      const json& t = jedges[k];
      if (!t.is_array() || t.size() != 3) bad(ek, "expected [from, to, weight]");
      edges.push_back({static_cast<int>(integer(t[0], ek)) - 1, static_cast<int>(integer(t[1], ek)) - 1, number(t[2], ek)});
    }
    entries.push_back({static_cast<int>(dwell), at_path(at, [&] { return WeightedDigraph(n, std::move(edges), min_weight); })});
    total += dwell;
  }
  if (j.contains("period_steps") && integer(j["period_steps"], where + ".period_steps") != total) {
    bad(where + ".period_steps", "does not equal the sum of dwells (" + std::to_string(total) + ")");
  }
  return GraphSchedule(std::move(entries), mode, static_cast<std::uint64_t>(seed));
}

json scenario_file_to_json(const ScenarioFile& file) {
  const Scenario& sc = file.scenario;
  json agents = json::array();
  for (const auto& a : sc.agents) {
    json ja = {{"objective", objective_to_json(a.objective)},
               {"velocity_set", velocity_set_to_json(a.velocity_set)},
               {"r0", to_array(a.initial.r)},
               {"v0", to_array(a.initial.v)},
               {"y0", a.initial.y},
               {"p0", a.initial.p}};
    if (a.position_region) ja["position_region"] = region_to_json(*a.position_region);
    agents.push_back(std::move(ja));
  }
  const json schedule = schedule_to_json(sc.schedule);
  json out = {{"format_version", kFormatVersion},
              {"scenario",
               {{"name", sc.name},
                {"algorithm", to_string(sc.algorithm)},
                {"n", sc.n},
                {"m", sc.m},
                {"T", sc.T},
                {"horizon", sc.horizon},
                {"tolerances", tolerances_to_json(sc.tol)},
                {"schedule", schedule},
                {"agents", agents}}}};
  json outputs = {{"trajectory_csv", file.outputs.trajectory_csv},
                  {"metrics_csv", file.outputs.metrics_csv},
                  {"summary_json", file.outputs.summary_json}};
  outputs["plots_dir"] = file.outputs.plots_dir ? json(*file.outputs.plots_dir) : json(nullptr);
  out["outputs"] = outputs;
  if (file.seed) out["seed"] = *file.seed;
  return out;
}

ScenarioFile parse_scenario_file(const std::string& text, const std::string& origin) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, col] = line_column(text, e.byte);
    std::string detail = e.what();
    if (const auto pos = detail.find("parse error"); pos != std::string::npos) detail = detail.substr(pos);
    throw ValidationError(origin + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " + detail);
  }
  only_keys(root, "top level", {"format_version", "scenario", "outputs", "seed"});
  const json& version = need(root, "format_version", "top level");
  if (!version.is_string() || version.get<std::string>() != kFormatVersion) {
    bad("format_version", std::string("must be \"") + kFormatVersion + "\"");
  }

  ScenarioFile file;
  if (root.contains("seed")) file.seed = integer(root["seed"], "seed");

  if (root.contains("outputs")) {
    const json& jo = root["outputs"];
    only_keys(jo, "outputs", {"trajectory_csv", "metrics_csv", "summary_json", "plots_dir"});
    const auto path_of = [&](const char* key, std::string& dst) {
      if (!jo.contains(key)) return;
      if (!jo[key].is_string() || jo[key].get<std::string>().empty()) bad(std::string("outputs.") + key, "expected a path");
      dst = jo[key].get<std::string>();
    };
    path_of("trajectory_csv", file.outputs.trajectory_csv);
    path_of("metrics_csv", file.outputs.metrics_csv);
    path_of("summary_json", file.outputs.summary_json);
    if (jo.contains("plots_dir")) {
      if (jo["plots_dir"].is_null()) {
        file.outputs.plots_dir.reset();
      } else {
        std::string dir;
        path_of("plots_dir", dir);
        file.outputs.plots_dir = dir;
      }
    }
  }

  const json& js = need(root, "scenario", "top level");
  only_keys(js, "scenario", {"name", "algorithm", "n", "m", "T", "horizon", "tolerances", "schedule", "agents"});
  Scenario& sc = file.scenario;
  if (js.contains("name")) {
    if (!js["name"].is_string()) bad("scenario.name", "expected a string");
    sc.name = js["name"].get<std::string>();
  }
  const json& alg = need(js, "algorithm", "scenario");
  if (alg == "A") {
    sc.algorithm = Algorithm::A;
  } else if (alg == "B") {
    sc.algorithm = Algorithm::B;
  } else {
    bad("scenario.algorithm", "expected \"A\" or \"B\"");
  }
  sc.n = static_cast<int>(integer(need(js, "n", "scenario"), "scenario.n"));
  sc.m = static_cast<int>(integer(need(js, "m", "scenario"), "scenario.m"));
  if (sc.n < 1) bad("scenario.n", "must be positive");
  if (sc.m < 1) bad("scenario.m", "must be positive");
  sc.T = number(need(js, "T", "scenario"), "scenario.T");
  sc.horizon = integer(need(js, "horizon", "scenario"), "scenario.horizon");
  if (js.contains("tolerances")) sc.tol = tolerances_from_json(js["tolerances"], "scenario.tolerances");

  json jsched = need(js, "schedule", "scenario");
  if (!jsched.is_object()) bad("scenario.schedule", "expected an object");
  if (!jsched.contains("n")) jsched["n"] = sc.n;
  if (integer(jsched["n"], "scenario.schedule.n") != sc.n) bad("scenario.schedule.n", "does not match scenario.n");
  sc.schedule = schedule_from_json(jsched, file.seed.value_or(0), "scenario.schedule");

  const json& jagents = need(js, "agents", "scenario");
  if (!jagents.is_array()) bad("scenario.agents", "expected an array");
  if (static_cast<int>(jagents.size()) != sc.n) {
    bad("scenario.agents", "has " + std::to_string(jagents.size()) + " entries but n = " + std::to_string(sc.n));
  }
  for (std::size_t i = 0; i < jagents.size(); ++i) {
    const std::string at = "scenario.agents[" + std::to_string(i) + "]";
    const json& ja = jagents[i];
    only_keys(ja, at, {"objective", "velocity_set", "position_region", "r0", "v0", "y0", "p0"});
    std::optional<ConvexRegion> region;
    if (ja.contains("position_region") && !ja["position_region"].is_null()) {
      region = region_from_json(ja["position_region"], at + ".position_region");
    }
    sc.agents.push_back(AgentSpec{objective_from_json(need(ja, "objective", at), at + ".objective"),
                                  velocity_set_from_json(need(ja, "velocity_set", at), at + ".velocity_set"),
                                  std::move(region),
                                  AgentState{vector(need(ja, "r0", at), at + ".r0"), vector(need(ja, "v0", at), at + ".v0"),
                                             number(need(ja, "y0", at), at + ".y0"), number(need(ja, "p0", at), at + ".p0")}});
  }
  return file;
}

ScenarioFile load_scenario_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open scenario file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  ScenarioFile file = parse_scenario_file(buf.str(), path.string());
  validate_scenario(file.scenario);
  return file;
}

Scenario load_scenario(const std::filesystem::path& path) { return load_scenario_file(path).scenario; }

std::string dump_scenario_file(const ScenarioFile& file) { return scenario_file_to_json(file).dump(2) + "\n"; }

void save_scenario_file(const ScenarioFile& file, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << dump_scenario_file(file);
}

bool same_scenario(const Scenario& a, const Scenario& b) {
  if (a.name != b.name || a.n != b.n || a.m != b.m || a.T != b.T || a.horizon != b.horizon ||
      a.algorithm != b.algorithm || !(a.schedule == b.schedule) || a.agents.size() != b.agents.size()) {
    return false;
  }
  if (a.tol.tol_eq != b.tol.tol_eq || a.tol.tol_zero != b.tol.tol_zero || a.tol.segment.n_alpha != b.tol.segment.n_alpha ||
      a.tol.segment.tol_beta != b.tol.segment.tol_beta) {
    return false;
  }
  const auto same_vec = [](const Vec& x, const Vec& y) { return x.size() == y.size() && (x.array() == y.array()).all(); };
  for (std::size_t i = 0; i < a.agents.size(); ++i) {
    const auto& x = a.agents[i];
    const auto& y = b.agents[i];
    if (!(x.objective == y.objective) || !(x.velocity_set == y.velocity_set)) return false;
    if (x.position_region.has_value() != y.position_region.has_value()) return false;
    if (x.position_region && !(*x.position_region == *y.position_region)) return false;
    if (!same_vec(x.initial.r, y.initial.r) || !same_vec(x.initial.v, y.initial.v) || x.initial.y != y.initial.y ||
        x.initial.p != y.initial.p) {
      return false;
    }
  }
  return true;
}

}  // namespace swarm
