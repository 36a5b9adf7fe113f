// ncheat: configuration-driven experiment runner for heat-flow diagnostics on
// group algebras. One experiment per invocation; outputs are plain CSV/JSON
// written with full double precision so reruns with equal seeds are
// byte-identical.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "ncheat/content.hpp"
#include "ncheat/heat.hpp"

using namespace ncheat;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.3.0";
const double kPi = 3.14159265358979323846264338327950288;

// ---------------------------------------------------------------- helpers

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json json_num(double v) { return json::parse(fmt17(v)); }

std::uint64_t fnv64(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (char c : s) {
    h ^= (unsigned char)c;
    h *= 1099511628211ull;
  }
  return h;
}

double parse_angle(std::string tok) {
  // accepts "0", "1.25", "pi", "pi/3", "2pi/5", "0.5pi"
  double mult = 1.0, div = 1.0;
  auto pos = tok.find("pi");
  if (pos == std::string::npos) return std::stod(tok);
  std::string pre = tok.substr(0, pos), post = tok.substr(pos + 2);
  if (!pre.empty()) mult = std::stod(pre);
  if (!post.empty()) {
    if (post[0] != '/') throw std::invalid_argument("bad angle token: " + tok);
    div = std::stod(post.substr(1));
  }
  return mult * kPi / div;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

GroupDescriptor group_from_object(const json& obj) {
  std::string family = obj.at("family").get<std::string>();
  if (family == "free") return GroupDescriptor::free_group(obj.at("rank").get<int>());
  if (family == "zn" || family == "z" || family == "free_abelian")
    return GroupDescriptor::free_abelian(obj.at("rank").get<int>());
  if (family == "heis3" || family == "heisenberg3") return GroupDescriptor::heisenberg3();
  if (family == "fpf" || family == "free_product") {
    std::vector<FiniteGroupTable> tables;
    for (const auto& f : obj.at("factors")) {
      FiniteGroupTable t;
      t.order = f.at("order").get<int>();
      t.identity = f.value("identity", 0);
      t.table = f.at("table").get<std::vector<int>>();
      tables.push_back(std::move(t));
    }
    return GroupDescriptor::free_product(std::move(tables));
  }
  throw std::invalid_argument("unknown group family: " + family);
}

GroupDescriptor parse_group(const std::string& spec, const json& config) {
  if (config.contains("group") && config.at("group").is_object() && spec.empty())
    return group_from_object(config.at("group"));
  auto parts = split(spec, ':');
  const std::string& kind = parts[0];
  if (kind == "free") {
    if (parts.size() != 2) throw std::invalid_argument("group spec: use free:K");
    return GroupDescriptor::free_group(std::stoi(parts[1]));
  }
  if (kind == "z" || kind == "zn") {
    if (parts.size() != 2) throw std::invalid_argument("group spec: use zn:N");
    return GroupDescriptor::free_abelian(std::stoi(parts[1]));
  }
  if (kind == "heis3") return GroupDescriptor::heisenberg3();
  if (kind == "fpf") {
    if (!config.contains("factors"))
      throw std::invalid_argument("group fpf requires \"factors\" in the config file");
    std::vector<FiniteGroupTable> tables;
    for (const auto& f : config.at("factors")) {
      FiniteGroupTable t;
      t.order = f.at("order").get<int>();
      t.identity = f.value("identity", 0);
      t.table = f.at("table").get<std::vector<int>>();
      tables.push_back(std::move(t));
    }
    return GroupDescriptor::free_product(std::move(tables));
  }
  throw std::invalid_argument("unknown group spec: " + spec);
}

LengthSpec parse_length(const std::string& spec, const GroupDescriptor& g) {
  auto parts = split(spec, ':');
  const std::string& kind = parts[0];
  if (kind == "word") return LengthSpec::word(g);
  if (kind == "l1") return LengthSpec::l1(g);
  if (kind == "l2") return LengthSpec::l2(g);
  if (kind == "l2sq") return LengthSpec::l2_squared(g);
  if (kind == "block") return LengthSpec::block(g);
  if (kind == "log") return LengthSpec::log_length(g);
  if (kind == "indicator") return LengthSpec::indicator(g);
  if (kind == "power") {
    if (parts.size() != 2) throw std::invalid_argument("length spec: use power:ALPHA");
    return LengthSpec::power_law(g, std::stod(parts[1]));
  }
  if (kind == "sqrt") {
    if (parts.size() < 2) throw std::invalid_argument("length spec: use sqrt:INNER");
    return sqrt_transform(parse_length(spec.substr(5), g));
  }
  if (kind == "pullback") {
    // pullback:INNER:COORD with INNER a length on zn:1
    if (parts.size() < 3) throw std::invalid_argument("length spec: use pullback:INNER:COORD");
    int coord = std::stoi(parts.back());
    std::string inner = spec.substr(9, spec.size() - 9 - parts.back().size() - 1);
    return LengthSpec::pullback(parse_length(inner, GroupDescriptor::free_abelian(1)), coord,
                                g);
  }
  throw std::invalid_argument("unknown length spec: " + spec);
}

Cocycle parse_cocycle(const std::string& theta_spec, const GroupDescriptor& g) {
  if (theta_spec.empty()) return Cocycle::trivial(g);
  if (g.family != Family::FreeAbelian)
    throw std::invalid_argument("theta cocycles require a zn group");
  std::size_t n = (std::size_t)g.rank;
  auto tokens = split(theta_spec, ',');
  if (tokens.size() > n * (n + 1) / 2)
    throw std::invalid_argument(
        "theta expects the upper triangle (including diagonal), row-major, at most " +
        std::to_string(n * (n + 1) / 2) + " entries; trailing zeros may be omitted");
  const double two_pi = 2.0 * kPi;
  std::vector<double> theta(n * n, 0.0);
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      double v = k < tokens.size() ? parse_angle(tokens[k]) : 0.0;
      ++k;
      if (i == j && v != 0.0)
        throw std::invalid_argument("theta diagonal entries must be zero");
      theta[i * n + j] = v;
      if (i != j) theta[j * n + i] = v == 0.0 ? 0.0 : two_pi - v;
    }
  return Cocycle::theta(g, theta);
}

json element_to_json(const GroupElement& e) {
  json a = json::array();
  for (auto v : e.data) a.push_back(v);
  return a;
}

json fourier_to_json(const FourierElement& x) {
  json terms = json::array();
  for (auto& [e, c] : x.terms()) {
    json t;
    t["normal_form"] = element_to_json(e);
    t["re"] = json_num(c.real());
    t["im"] = json_num(c.imag());
    terms.push_back(std::move(t));
  }
  return json{{"terms", std::move(terms)}};
}

FourierElement fourier_from_json(const json& j, const GroupDescriptor& g,
                                 const Cocycle& sigma) {
  std::vector<std::pair<GroupElement, cplx>> terms;
  for (const auto& t : j.at("terms")) {
    GroupElement e{t.at("normal_form").get<std::vector<std::int32_t>>()};
    terms.emplace_back(std::move(e),
                       cplx(t.at("re").get<double>(), t.value("im", 0.0)));
  }
  return FourierElement::from_terms(g, sigma, std::move(terms));
}

void write_file(const std::string& path, const std::string& body,
                std::vector<std::string>& outputs) {
  std::filesystem::path p(path);
  if (p.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(p.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file " + path);
  out << body;
  outputs.push_back(path);
}

// initial datum selection shared by the heat-flow subcommands
FourierElement load_x0(const std::string& file, const std::string& kind, const Group& g,
                       const Cocycle& sigma, std::uint64_t seed) {
  if (!file.empty()) {
    std::ifstream in(file);
    if (!in) throw std::invalid_argument("cannot open x0 file " + file);
    json j;
    in >> j;
    return fourier_from_json(j, g.descriptor(), sigma);
  }
  auto parts = split(kind, ':');
  if (parts[0] == "gensum") {
    FourierElement x(g.descriptor(), sigma);
    for (const auto& s : g.generators()) x.add_term(s, 1.0);
    x.normalize();
    return x;
  }
  if (parts[0] == "equal-mass" && parts.size() == 2)
    return random_equal_sphere_mass(g, sigma, std::stoi(parts[1]), seed);
  throw std::invalid_argument("x0: pass --x0 FILE or --x0-kind gensum|equal-mass:R");
}

struct Manifest {
  json config;
  std::vector<std::string> outputs;
  std::string status = "ok";
  std::string note;
  std::uint64_t seed = 0;
  double wall_ms = 0.0;

  void write(const std::string& path) const {
    if (path.empty()) return;
    json m;
    m["tool"] = "ncheat";
    m["version"] = kVersion;
    m["config"] = config;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%016llx", (unsigned long long)fnv64(config.dump()));
    m["config_hash"] = std::string(buf);
    m["seed"] = seed;
    m["outputs"] = outputs;
    m["status"] = status;
    if (!note.empty()) m["note"] = note;
    m["wall_ms"] = wall_ms;
    std::filesystem::path p(path);
    if (p.has_parent_path()) {
      std::error_code ec;
      std::filesystem::create_directories(p.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary);
    if (out) out << m.dump(2) << "\n";
  }
};

json catalog() {
  auto entry = [](std::initializer_list<std::pair<const char*, const char*>> params) {
    json p = json::object();
    for (auto& [k, v] : params) p[k] = v;
    return p;
  };
  json c;
  c["version"] = kVersion;
  c["subcommands"] = json::object();
  c["subcommands"]["check-nd"] = entry(
      {{"group", "string"}, {"length", "string"}, {"ball", "int"}, {"tol", "float=1e-9"}});
  c["subcommands"]["schoenberg"] = entry({{"group", "string"},
                                          {"length", "string"},
                                          {"ball", "int"},
                                          {"t-grid", "floats=0.1,1,10"},
                                          {"tol", "float=1e-9"}});
  c["subcommands"]["poincare"] = entry(
      {{"group", "string"}, {"length", "string"}, {"rmax", "int"}, {"stol", "float=5e-3"}});
  c["subcommands"]["dominance"] = entry(
      {{"group", "string"}, {"length", "string"}, {"length2", "string"}, {"ball", "int"}});
  c["subcommands"]["norm"] = entry({{"group", "string"},
                                    {"theta", "angles, optional"},
                                    {"x0|x0-kind", "file or gensum|equal-mass:R"},
                                    {"radius", "int"},
                                    {"seed", "uint, required"},
                                    {"tol", "float=1e-10"},
                                    {"max-iters", "int=10000"}});
  c["subcommands"]["tail"] = entry({{"group", "string"},
                                    {"theta", "angles, optional"},
                                    {"length", "string"},
                                    {"t", "float"},
                                    {"x0|x0-kind", "file or gensum|equal-mass:R"},
                                    {"norm-radius", "int"},
                                    {"seed", "uint, required"}});
  c["subcommands"]["heat-evolve"] = entry({{"group", "string"},
                                           {"theta", "angles, optional"},
                                           {"length", "string"},
                                           {"t", "float"},
                                           {"x0|x0-kind", "file or gensum|equal-mass:R"},
                                           {"tail-csv", "path, optional"},
                                           {"norm-radius", "int, with tail-csv"}});
  c["subcommands"]["heat-residual"] = entry({{"group", "string"},
                                             {"length", "string"},
                                             {"t", "float"},
                                             {"h-list", "floats"},
                                             {"x0|x0-kind", "file or gensum|equal-mass:R"}});
  c["subcommands"]["content"] = entry({{"group", "string"},
                                       {"theta", "angles, optional"},
                                       {"set", "ball:R|sphere:R|interval:A:B"},
                                       {"radius", "int, certify radius"},
                                       {"restarts", "int=16"},
                                       {"seed", "uint, required"}});
  c["subcommands"]["kappa"] = entry({{"group", "string"},
                                     {"kappa", "onepluspow:P|exp:T|one"},
                                     {"length", "string, weight base"},
                                     {"support-radius", "int"},
                                     {"samples", "int=8"},
                                     {"radius", "int"},
                                     {"seed", "uint, required"}});
  c["subcommands"]["hgrowth"] = entry({{"group", "string"},
                                       {"theta", "angles, optional"},
                                       {"rmax", "int"},
                                       {"margin", "int=8"},
                                       {"restarts", "int=16"},
                                       {"seed", "uint, required"}});
  c["subcommands"]["sphere-bound"] = entry({{"group", "string (free only)"},
                                            {"t", "float"},
                                            {"rmax", "int"},
                                            {"norm-radius", "int"},
                                            {"x0|x0-kind", "file or gensum|equal-mass:R"},
                                            {"seed", "uint, required"}});
  c["subcommands"]["list"] = entry({});
  return c;
}

const std::vector<std::string> kSubcommands = {
    "check-nd",    "schoenberg",    "poincare", "dominance", "norm",    "tail",
    "heat-evolve", "heat-residual", "content",  "kappa",     "hgrowth", "sphere-bound",
    "list"};

int edit_distance(const std::string& a, const std::string& b) {
  std::vector<std::vector<int>> d(a.size() + 1, std::vector<int>(b.size() + 1));
  for (std::size_t i = 0; i <= a.size(); ++i) d[i][0] = (int)i;
  for (std::size_t j = 0; j <= b.size(); ++j) d[0][j] = (int)j;
  for (std::size_t i = 1; i <= a.size(); ++i)
    for (std::size_t j = 1; j <= b.size(); ++j)
      d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1,
                          d[i - 1][j - 1] + (a[i - 1] != b[j - 1])});
  return d[a.size()][b.size()];
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"heat-flow workbench on twisted group algebras"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(0, 1);

  // suggest the closest subcommand name before CLI11 rejects it
  if (argc > 1 && argv[1][0] != '-') {
    std::string given = argv[1];
    bool known = false;
    for (auto& s : kSubcommands) known = known || s == given;
    if (!known) {
      std::string best = kSubcommands[0];
      int best_d = 1 << 20;
      for (auto& s : kSubcommands) {
        int d = edit_distance(given, s);
        if (d < best_d) {
          best_d = d;
          best = s;
        }
      }
      std::cerr << "unknown subcommand '" << given << "'; did you mean '" << best << "'?\n";
      return 2;
    }
  }

  // shared options, merged later with the config file (flags win)
  struct {
    std::string config_path, group = "z:1", theta, length = "word", length2, out = "out.json";
    std::string manifest, x0_file, x0_kind, set_spec, kappa_spec = "one", tail_csv;
    std::optional<std::uint64_t> seed;
    double tol = -1.0, stol = 5e-3, t = 1.0;
    std::string t_grid = "0.1,1,10", h_list = "1e-2,5e-3,2.5e-3,1.25e-3";
    int ball = 2, rmax = 10, radius = -1, norm_radius = 6, restarts = 16, samples = 8;
    int margin = 8, support_radius = 4, max_iters = 10000, threads = 1;
  } o;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config_path, "JSON config; flags override its fields");
    sub->add_option("--group", o.group, "group spec: free:K, zn:N, z:N, heis3, fpf");
    sub->add_option("--theta", o.theta, "cocycle angles, upper triangle incl diagonal");
    sub->add_option("--out", o.out, "output file");
    sub->add_option("--manifest", o.manifest, "manifest path (default: <out>.manifest.json)");
    sub->add_option("--seed", o.seed, "seed for stochastic operations");
    sub->add_option("--threads", o.threads,
                    "worker cap (results are thread-count independent)");
    sub->add_option("--max-iters", o.max_iters, "power iteration cap");
    sub->add_option("--length", o.length, "length spec");
    sub->add_option("--length2", o.length2, "second length spec (dominance)");
    sub->add_option("--ball", o.ball, "sample/fit ball radius");
    sub->add_option("--rmax", o.rmax, "max sphere radius");
    sub->add_option("--radius", o.radius, "truncation radius");
    sub->add_option("--norm-radius", o.norm_radius, "norm estimate truncation radius");
    sub->add_option("--tol", o.tol, "tolerance");
    sub->add_option("--stol", o.stol, "bisection tolerance");
    sub->add_option("--t", o.t, "time value");
    sub->add_option("--t-grid", o.t_grid, "comma separated times");
    sub->add_option("--h-list", o.h_list, "comma separated step sizes");
    sub->add_option("--x0", o.x0_file, "initial datum JSON file");
    sub->add_option("--x0-kind", o.x0_kind, "gensum | equal-mass:R");
    sub->add_option("--set", o.set_spec, "content subset: ball:R | sphere:R | interval:A:B");
    sub->add_option("--kappa", o.kappa_spec, "onepluspow:P | exp:T | one");
    sub->add_option("--restarts", o.restarts, "ascent restarts");
    sub->add_option("--samples", o.samples, "samples per kind");
    sub->add_option("--margin", o.margin, "content truncation margin over max length");
    sub->add_option("--support-radius", o.support_radius, "sample support radius");
    sub->add_option("--tail-csv", o.tail_csv, "also write the sphere profile CSV here");
  };

  for (auto& name : kSubcommands) add_common(app.add_subcommand(name, ""));

  CLI11_PARSE(app, argc, argv);
  if (app.get_subcommands().empty()) {
    std::cout << app.help();
    return 0;
  }
  CLI::App* sub = app.get_subcommands().front();
  const std::string cmd = sub->get_name();

  auto t_start = std::chrono::steady_clock::now();
  Manifest manifest;
  std::string manifest_path;

  auto finish = [&](int code) {
    manifest.wall_ms = std::chrono::duration<double, std::milli>(
                           std::chrono::steady_clock::now() - t_start)
                           .count();
    manifest.write(manifest_path);
    return code;
  };

  try {
    // config file first, then flag overrides for the fields the user passed
    json config = json::object();
    if (!o.config_path.empty()) {
      std::ifstream in(o.config_path);
      if (!in) throw std::invalid_argument("cannot open config " + o.config_path);
      in >> config;
    }
    auto passed = [&](const std::string& flag) { return sub->count("--" + flag) > 0; };
    auto str_of = [&](const std::string& key, std::string& slot) {
      if (!passed(key) && config.contains(key)) slot = config.at(key).get<std::string>();
    };
    auto num_of = [&](const std::string& key, auto& slot) {
      using T = std::decay_t<decltype(slot)>;
      if (!passed(key) && config.contains(key)) slot = config.at(key).get<T>();
    };
    if (!passed("group") && config.contains("group") && config.at("group").is_object())
      o.group.clear();  // defer to the config object
    else
      str_of("group", o.group);
    str_of("theta", o.theta);
    str_of("length", o.length);
    str_of("length2", o.length2);
    str_of("out", o.out);
    str_of("x0", o.x0_file);
    str_of("x0-kind", o.x0_kind);
    str_of("set", o.set_spec);
    str_of("kappa", o.kappa_spec);
    str_of("t-grid", o.t_grid);
    str_of("h-list", o.h_list);
    num_of("ball", o.ball);
    num_of("rmax", o.rmax);
    num_of("radius", o.radius);
    num_of("norm-radius", o.norm_radius);
    num_of("tol", o.tol);
    num_of("stol", o.stol);
    num_of("t", o.t);
    num_of("restarts", o.restarts);
    num_of("samples", o.samples);
    num_of("margin", o.margin);
    num_of("support-radius", o.support_radius);
    num_of("max-iters", o.max_iters);
    if (!passed("seed") && config.contains("seed"))
      o.seed = config.at("seed").get<std::uint64_t>();

    manifest_path = o.manifest.empty() ? o.out + ".manifest.json" : o.manifest;

    // effective config, recorded in the manifest and hashed
    json eff;
    eff["subcommand"] = cmd;
    eff["group"] = o.group;
    if (!o.theta.empty()) eff["theta"] = o.theta;
    eff["length"] = o.length;
    if (!o.length2.empty()) eff["length2"] = o.length2;
    eff["out"] = o.out;
    if (o.seed) eff["seed"] = *o.seed;
    eff["t"] = json_num(o.t);
    eff["tol"] = json_num(o.tol);
    eff["stol"] = json_num(o.stol);
    eff["ball"] = o.ball;
    eff["rmax"] = o.rmax;
    eff["radius"] = o.radius;
    eff["norm_radius"] = o.norm_radius;
    eff["restarts"] = o.restarts;
    eff["samples"] = o.samples;
    eff["margin"] = o.margin;
    eff["support_radius"] = o.support_radius;
    eff["max_iters"] = o.max_iters;
    eff["threads"] = o.threads;
    if (!o.x0_file.empty()) eff["x0"] = o.x0_file;
    if (!o.x0_kind.empty()) eff["x0_kind"] = o.x0_kind;
    if (!o.set_spec.empty()) eff["set"] = o.set_spec;
    if (cmd == "kappa") eff["kappa"] = o.kappa_spec;
    manifest.config = eff;
    if (o.seed) manifest.seed = *o.seed;

    const std::vector<std::string> stochastic = {"norm",  "tail",    "content",
                                                 "kappa", "hgrowth", "sphere-bound"};
    bool needs_seed = false;
    for (auto& s : stochastic) needs_seed = needs_seed || s == cmd;
    if (o.x0_kind.rfind("equal-mass", 0) == 0) needs_seed = true;
    if (needs_seed && !o.seed) {
      manifest.status = "validation-error";
      manifest.note = "stochastic operation requires --seed";
      std::cerr << "error: subcommand '" << cmd << "' requires --seed\n";
      return finish(2);
    }
    std::uint64_t seed = o.seed.value_or(0);

    if (cmd == "list") {
      std::string body = catalog().dump(2) + "\n";
      std::cout << body;
      if (passed("out")) write_file(o.out, body, manifest.outputs);
      return finish(0);
    }

    GroupDescriptor gd = parse_group(o.group, config);
    Group grp(gd);
    Cocycle sigma = parse_cocycle(o.theta, gd);
    bool flagged = false;

    if (cmd == "check-nd") {
      auto d = parse_length(o.length, gd);
      Ball ball = Ball::build(grp, o.ball);
      std::vector<GroupElement> sample;
      for (std::uint32_t i = 0; i < ball.size(); ++i) sample.push_back(ball.element(i));
      double tol = o.tol > 0 ? o.tol : 1e-9;
      auto w = gram_nd_check(d, sample, tol);
      json out;
      out["kind"] = d.name();
      out["sample_size"] = w.sample_size;
      out["lambda_max"] = json_num(w.lambda_max);
      out["pass"] = w.pass;
      out["tol"] = json_num(tol);
      write_file(o.out, out.dump(2) + "\n", manifest.outputs);
    } else if (cmd == "schoenberg") {
      auto d = parse_length(o.length, gd);
      Ball ball = Ball::build(grp, o.ball);
      std::vector<GroupElement> sample;
      for (std::uint32_t i = 0; i < ball.size(); ++i) sample.push_back(ball.element(i));
      std::vector<double> ts;
      for (auto& tok : split(o.t_grid, ',')) ts.push_back(std::stod(tok));
      double tol = o.tol > 0 ? o.tol : 1e-9;
      auto rows = schoenberg_psd_check(d, sample, ts, tol);
      json out;
      out["kind"] = d.name();
      out["sample_size"] = sample.size();
      out["tol"] = json_num(tol);
      out["rows"] = json::array();
      for (auto& r : rows)
        out["rows"].push_back(
            {{"t", json_num(r.t)}, {"lambda_min", json_num(r.lambda_min)}, {"pass", r.pass}});
      write_file(o.out, out.dump(2) + "\n", manifest.outputs);
    } else if (cmd == "poincare") {
      auto d = parse_length(o.length, gd);
      auto thr = l2_threshold(d, grp, o.rmax, o.stol);
      json out;
      out["kind"] = d.name();
      out["rmax"] = o.rmax;
      out["lower"] = json_num(thr.base.lower);
      out["upper"] = json_num(thr.base.upper);
      out["infinite"] = thr.base.infinite;
      out["degenerate"] = thr.base.degenerate;
      out["insufficient_data"] = thr.base.insufficient_data;
      if (!thr.base.note.empty()) out["note"] = thr.base.note;
      out["delta_half"] = json_num(thr.delta_half);
      if (thr.exact_free_threshold)
        out["exact_free_threshold"] = json_num(*thr.exact_free_threshold);
      write_file(o.out, out.dump(2) + "\n", manifest.outputs);
    } else if (cmd == "dominance") {
      auto c = parse_length(o.length, gd);
      if (o.length2.empty()) throw std::invalid_argument("dominance requires --length2");
      auto cp = parse_length(o.length2, gd);
      Ball ball = Ball::build(grp, o.ball);
      auto fit = dominance_fit(c, cp, ball);
      json out;
      out["a"] = json_num(fit.a);
      out["b"] = json_num(fit.b);
      out["residual"] = json_num(fit.residual);
      out["line_dominates"] = fit.line_dominates;
      write_file(o.out, out.dump(2) + "\n", manifest.outputs);
    } else if (cmd == "norm") {
      auto x0 = load_x0(o.x0_file, o.x0_kind, grp, sigma, seed);
      int R = o.radius > 0 ? o.radius : o.norm_radius;
      double tol = o.tol > 0 ? o.tol : 1e-10;
      json hist = json::array();
      NormEstimate last{};
      for (int r = std::max(0, R - 2); r <= R; ++r) {
        last = norm_estimate(x0, r, seed, tol, o.max_iters);
        hist.push_back(json_num(last.nu));
        flagged = flagged || !last.converged;
      }
      json out;
      out["nu_R"] = json_num(last.nu);
      out["l1_upper"] = json_num(last.l1_upper);
      out["R"] = last.radius;
      out["iterations"] = last.iterations;
      out["converged"] = last.converged;
      out["seed"] = seed;
      out["nu_history"] = hist;
      write_file(o.out, out.dump(2) + "\n", manifest.outputs);
    } else if (cmd == "tail") {
      auto x0 = load_x0(o.x0_file, o.x0_kind, grp, sigma, seed);
      auto d = parse_length(o.length, gd);
      double tol = o.tol > 0 ? o.tol : 1e-8;
      auto prof = tail_profile(x0, d, o.t, o.norm_radius, seed, tol, o.max_iters);
      std::string csv = "r,sphere_norm,hgrowth_bound,t,seed\n";
      for (auto& row : prof.rows) {
        flagged = flagged || !row.converged;
        csv += std::to_string(row.r) + "," + fmt17(row.sphere_norm) + "," +
               fmt17(row.hgrowth_bound) + "," + fmt17(prof.t) + "," + std::to_string(seed) +
               "\n";
      }
      write_file(o.out, csv, manifest.outputs);
    } else if (cmd == "heat-evolve") {
      auto x0 = load_x0(o.x0_file, o.x0_kind, grp, sigma, seed);
      auto d = parse_length(o.length, gd);
      auto u = heat_evolve(x0, d, o.t);
      json out = fourier_to_json(u);
      out["t"] = json_num(o.t);
      out["length"] = d.name();
      write_file(o.out, out.dump(2) + "\n", manifest.outputs);
      if (!o.tail_csv.empty()) {
        double tol = o.tol > 0 ? o.tol : 1e-8;
        auto prof = tail_profile(x0, d, o.t, o.norm_radius, seed, tol, o.max_iters);
        std::string csv = "r,sphere_norm,hgrowth_bound,t,seed\n";
        for (auto& row : prof.rows)
          csv += std::to_string(row.r) + "," + fmt17(row.sphere_norm) + "," +
                 fmt17(row.hgrowth_bound) + "," + fmt17(prof.t) + "," +
                 std::to_string(seed) + "\n";
        write_file(o.tail_csv, csv, manifest.outputs);
      }
    } else if (cmd == "heat-residual") {
      auto x0 = load_x0(o.x0_file, o.x0_kind, grp, sigma, seed);
      auto d = parse_length(o.length, gd);
      std::vector<double> hs;
      for (auto& tok : split(o.h_list, ',')) hs.push_back(std::stod(tok));
      auto rows = heat_residual_check(x0, d, o.t, hs);
      std::string csv = "h,residual,ratio\n";
      for (std::size_t i = 0; i < rows.size(); ++i) {
        double ratio = i + 1 < rows.size() && rows[i + 1].residual > 0
                           ? rows[i].residual / rows[i + 1].residual
                           : 0.0;
        csv += fmt17(rows[i].h) + "," + fmt17(rows[i].residual) + "," + fmt17(ratio) + "\n";
      }
      write_file(o.out, csv, manifest.outputs);
    } else if (cmd == "content") {
      std::vector<GroupElement> E;
      auto parts = split(o.set_spec, ':');
      if (parts[0] == "ball" && parts.size() == 2) {
        Ball b = Ball::build(grp, std::stoi(parts[1]));
        for (std::uint32_t i = 0; i < b.size(); ++i) E.push_back(b.element(i));
      } else if (parts[0] == "sphere" && parts.size() == 2) {
        int r = std::stoi(parts[1]);
        Ball b = Ball::build(grp, r);
        for (std::size_t i = b.sphere_begin(r); i < b.sphere_end(r); ++i)
          E.push_back(b.element((std::uint32_t)i));
      } else if (parts[0] == "interval" && parts.size() == 3) {
        if (gd.family != Family::FreeAbelian || gd.rank != 1)
          throw std::invalid_argument("interval sets require the group z:1");
        for (int m = std::stoi(parts[1]); m <= std::stoi(parts[2]); ++m)
          E.push_back(GroupElement{{m}});
      } else {
        throw std::invalid_argument(
            "content requires --set ball:R | sphere:R | interval:A:B");
      }
      ContentOptions copts;
      if (o.tol > 0) copts.tol = o.tol;
      copts.max_iters = o.max_iters;
      std::vector<std::pair<GroupElement, cplx>> ts;
      for (auto& e : E) ts.emplace_back(e, 1.0);
      int maxlen = support_radius(FourierElement::from_terms(gd, sigma, std::move(ts)));
      int R = o.radius > 0 ? o.radius : maxlen + o.margin;
      auto est = haagerup_content_estimate(E, gd, sigma, R, o.restarts, seed, copts);
      flagged = !est.converged;
      // truncation sensitivity of the winning witness
      std::vector<std::pair<GroupElement, cplx>> wterms;
      for (std::size_t i = 0; i < E.size(); ++i) wterms.emplace_back(E[i], est.witness[i]);
      auto xw = FourierElement::from_terms(gd, sigma, std::move(wterms));
      json sens = json::array();
      for (int rr = std::max(maxlen + 1, R - 2); rr < R; ++rr)
        sens.push_back(json_num(
            norm_estimate(xw, rr, seed + 18, copts.tol, copts.max_iters).nu));
      sens.push_back(json_num(est.c_est));
      json out;
      out["set"] = o.set_spec;
      out["set_size"] = E.size();
      out["c_est"] = json_num(est.c_est);
      out["lower_bracket"] = json_num(est.lower);
      out["upper_bracket"] = json_num(est.upper);
      out["restarts"] = est.restarts_used;
      out["ascent_radius"] = est.ascent_radius;
      out["certify_radius"] = est.certify_radius;
      out["converged"] = est.converged;
      out["seed"] = seed;
      json wit = json::array();
      for (std::size_t i = 0; i < E.size(); ++i)
        wit.push_back({{"normal_form", element_to_json(E[i])},
                       {"re", json_num(est.witness[i].real())},
                       {"im", json_num(est.witness[i].imag())}});
      out["witness"] = std::move(wit);
      out["c_sensitivity"] = std::move(sens);
      write_file(o.out, out.dump(2) + "\n", manifest.outputs);
    } else if (cmd == "kappa") {
      auto base = parse_length(o.length, gd);
      auto parts = split(o.kappa_spec, ':');
      KappaWeight kappa = KappaWeight::one(base);
      if (parts[0] == "onepluspow" && parts.size() == 2)
        kappa = KappaWeight::one_plus_length_pow(base, std::stod(parts[1]));
      else if (parts[0] == "exp" && parts.size() == 2)
        kappa = KappaWeight::exp_length(base, std::stod(parts[1]));
      else if (parts[0] != "one")
        throw std::invalid_argument("kappa spec: onepluspow:P | exp:T | one");
      double tol = o.tol > 0 ? o.tol : 1e-8;
      int R = o.radius > 0 ? o.radius : o.norm_radius;
      auto rep = kappa_decay_ratio(grp, sigma, kappa, o.support_radius, o.samples, R, seed,
                                   tol, o.max_iters);
      flagged = !rep.converged;
      json out;
      out["kappa"] = o.kappa_spec;
      out["max_ratio"] = json_num(rep.max_ratio);
      out["converged"] = rep.converged;
      out["seed"] = seed;
      out["samples"] = json::array();
      for (auto& s : rep.samples)
        out["samples"].push_back({{"kind", s.kind},
                                  {"ratio", json_num(s.ratio)},
                                  {"nu", json_num(s.nu)},
                                  {"weighted_l2", json_num(s.weighted_l2)}});
      write_file(o.out, out.dump(2) + "\n", manifest.outputs);
    } else if (cmd == "hgrowth") {
      ContentOptions copts;
      if (o.tol > 0) copts.tol = o.tol;
      copts.max_iters = o.max_iters;
      auto dlen = parse_length(o.length, gd);
      auto prof = h_growth_profile(grp, dlen, sigma, o.rmax, o.margin, o.restarts, seed,
                                   copts);
      std::string csv = "r,ball_size,c_lower,c_upper,poly_fit_exponent,exp_fit_rate\n";
      for (auto& row : prof.rows)
        csv += std::to_string(row.r) + "," + std::to_string(row.ball_size) + "," +
               fmt17(row.c_lower) + "," + fmt17(row.c_upper) + "," +
               fmt17(prof.poly_exponent) + "," + fmt17(prof.exp_rate) + "\n";
      write_file(o.out, csv, manifest.outputs);
      json summary;
      summary["poly_exponent"] = json_num(prof.poly_exponent);
      summary["poly_residual"] = json_num(prof.poly_residual);
      summary["exp_rate"] = json_num(prof.exp_rate);
      summary["exp_residual"] = json_num(prof.exp_residual);
      summary["label"] = prof.label;
      summary["seed"] = seed;
      write_file(o.out + ".summary.json", summary.dump(2) + "\n", manifest.outputs);
    } else if (cmd == "sphere-bound") {
      auto x0 = load_x0(o.x0_file, o.x0_kind, grp, sigma, seed);
      double tol = o.tol > 0 ? o.tol : 1e-6;
      auto rows = sphere_multiplier_bound_check(x0, o.t, o.rmax, o.norm_radius, seed, tol,
                                                o.max_iters);
      std::string csv = "r,measured,bound,pass,converged\n";
      bool all_pass = true;
      for (auto& row : rows) {
        all_pass = all_pass && row.pass;
        flagged = flagged || !row.converged;
        csv += std::to_string(row.r) + "," + fmt17(row.measured) + "," + fmt17(row.bound) +
               "," + (row.pass ? "1" : "0") + "," + (row.converged ? "1" : "0") + "\n";
      }
      write_file(o.out, csv, manifest.outputs);
      if (!all_pass) {
        manifest.status = "computation-flagged";
        manifest.note = "a sphere bound failed";
        return finish(3);
      }
    }

    if (flagged) {
      manifest.status = "computation-flagged";
      manifest.note = "an estimate did not converge within the iteration cap";
      return finish(3);
    }
    return finish(0);
  } catch (const std::invalid_argument& e) {
    manifest.status = "validation-error";
    manifest.note = e.what();
    std::cerr << "error: " << e.what() << "\n";
    return finish(2);
  } catch (const std::exception& e) {
    manifest.status = "computation-error";
    manifest.note = e.what();
    std::cerr << "error: " << e.what() << "\n";
    return finish(3);
  }
}
