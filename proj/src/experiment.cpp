#include "qrotor/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include "qrotor/gauge.hpp"
#include "qrotor/rdm.hpp"
#include "qrotor/symbreak.hpp"

#ifndef QROTOR_VERSION
#define QROTOR_VERSION "0.0.0"
#endif

namespace qrotor {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) { throw ConfigError(path + ": " + what); }

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& path) {
  if (!obj.is_object()) fail(path, "expected an object");
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key())) fail(path + "." + it.key(), "unknown key");
}

template <class T>
T take(const json& src, json& dst, const char* key, T def, const std::string& path) {
  T v = def;
  if (src.contains(key)) {
    const json& x = src.at(key);
    try {
      if constexpr (std::is_same_v<T, double>) {
        if (!x.is_number()) throw std::exception();
      } else if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
        if (!x.is_number_integer()) throw std::exception();
      } else if constexpr (std::is_same_v<T, bool>) {
        if (!x.is_boolean()) throw std::exception();
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!x.is_string()) throw std::exception();
      }
      v = x.get<T>();
    } catch (const std::exception&) {
      fail(path + "." + key, "wrong type");
    }
  }
  dst[key] = v;
  return v;
}

std::vector<double> take_doubles(const json& src, json& dst, const char* key, std::vector<double> def,
                                 const std::string& path) {
  std::vector<double> v = std::move(def);
  if (src.contains(key)) {
    const json& x = src.at(key);
    if (!x.is_array()) fail(path + "." + key, "expected an array of numbers");
    v.clear();
    for (const auto& e : x) {
      if (!e.is_number()) fail(path + "." + key, "expected an array of numbers");
      v.push_back(e.get<double>());
    }
  }
  dst[key] = v;
  return v;
}

std::vector<int> take_ints(const json& src, json& dst, const char* key, std::vector<int> def,
                           const std::string& path) {
  std::vector<int> v = std::move(def);
  if (src.contains(key)) {
    const json& x = src.at(key);
    if (!x.is_array()) fail(path + "." + key, "expected an array of integers");
    v.clear();
    for (const auto& e : x) {
      if (!e.is_number_integer()) fail(path + "." + key, "expected an array of integers");
      v.push_back(e.get<int>());
    }
  }
  dst[key] = v;
  return v;
}

// Vertex selections: "origin", "box", or an explicit id list.
void take_vertices(const json& src, json& dst, const char* key, const char* def, const std::string& path) {
  if (!src.contains(key)) {
    dst[key] = def;
    return;
  }
  const json& x = src.at(key);
  if (x.is_string()) {
    const auto s = x.get<std::string>();
    if (s != "origin" && s != "box") fail(path + "." + key, "expected \"origin\", \"box\" or a list of vertex ids");
    dst[key] = s;
    return;
  }
  json tmp;
  take_ints(src, tmp, key, {}, path);
  dst[key] = tmp[key];
}

json resolve_model(const json& m) {
  const std::string p = "model";
  check_keys(m, {"graph", "dim", "beta", "slices", "potential", "coupling", "boundary", "region"}, p);
  json out;

  const json g = m.value("graph", json::object());
  check_keys(g, {"kind", "extent", "metric", "branching"}, p + ".graph");
  json go;
  const auto kind = take<std::string>(g, go, "kind", "square_box", p + ".graph");
  try {
    parse_lattice_kind(kind);
    parse_metric(take<std::string>(g, go, "metric", "graph", p + ".graph"));
  } catch (const std::invalid_argument& e) {
    fail(p + ".graph", e.what());
  }
  if (take<int>(g, go, "extent", 4, p + ".graph") < 1) fail(p + ".graph.extent", "must be positive");
  take<int>(g, go, "branching", 3, p + ".graph");
  out["graph"] = go;

  const int dim = take<int>(m, out, "dim", 1, p);
  if (dim < 1 || dim > kMaxDim) fail(p + ".dim", "out of range");
  if (!(take<double>(m, out, "beta", 1.0, p) > 0.0)) fail(p + ".beta", "must be positive");
  if (take<int>(m, out, "slices", 16, p) < 1) fail(p + ".slices", "must be positive");

  const json v = m.value("potential", json::object());
  check_keys(v, {"kind", "theta_hc", "table"}, p + ".potential");
  json vo;
  const auto vk = take<std::string>(v, vo, "kind", "cosine", p + ".potential");
  try {
    parse_potential_kind(vk);
  } catch (const std::invalid_argument& e) {
    fail(p + ".potential.kind", e.what());
  }
  const double theta_hc = take<double>(v, vo, "theta_hc", 0.2, p + ".potential");
  const auto table = take_doubles(v, vo, "table", {}, p + ".potential");
  if (vk == "tabulated" && table.size() < 2) fail(p + ".potential.table", "tabulated potential needs >= 2 values");
  out["potential"] = vo;

  const json c = m.value("coupling", json::object());
  check_keys(c, {"J", "metric"}, p + ".coupling");
  json co;
  take_doubles(c, co, "J", {0.0, 1.0}, p + ".coupling");
  try {
    parse_coupling_metric(take<std::string>(c, co, "metric", "graph_metric", p + ".coupling"));
  } catch (const std::invalid_argument& e) {
    fail(p + ".coupling.metric", e.what());
  }
  out["coupling"] = co;

  const json b = m.value("boundary", json::object());
  check_keys(b, {"kind", "x_star", "eta", "theta_hc"}, p + ".boundary");
  json bo;
  const auto bk = take<std::string>(b, bo, "kind", "free", p + ".boundary");
  if (bk != "free" && bk != "cooled" && bk != "tilted") fail(p + ".boundary.kind", "expected free, cooled or tilted");
  const auto xs = take_doubles(b, bo, "x_star", std::vector<double>(std::size_t(dim), 0.0), p + ".boundary");
  if (int(xs.size()) != dim) fail(p + ".boundary.x_star", "needs one coordinate per torus dimension");
  take<double>(b, bo, "eta", 0.0, p + ".boundary");
  take<double>(b, bo, "theta_hc", theta_hc, p + ".boundary");
  out["boundary"] = bo;

  take_vertices(m, out, "region", "box", p);
  return out;
}

json resolve_run(const json& r) {
  const std::string p = "run";
  check_keys(r, {"sweeps", "burn_in", "thin", "chains", "seed", "moves"}, p);
  json out;
  const auto sweeps = take<std::int64_t>(r, out, "sweeps", 10000, p);
  if (sweeps < 1) fail(p + ".sweeps", "must be positive");
  const auto burn = take<std::int64_t>(r, out, "burn_in", -1, p);
  if (burn >= sweeps) fail(p + ".burn_in", "must be shorter than the run");
  if (take<std::int64_t>(r, out, "thin", 1, p) < 1) fail(p + ".thin", "must be positive");
  if (take<int>(r, out, "chains", 1, p) < 1) fail(p + ".chains", "must be positive");
  if (r.contains("seed") && !(r.at("seed").is_number_unsigned() || r.at("seed").is_number_integer()))
    fail(p + ".seed", "wrong type");
  out["seed"] = r.value("seed", std::uint64_t(1));
  if (r.contains("moves") && !(r.at("moves").is_string() && r.at("moves") == "auto")) {
    const json& mv = r.at("moves");
    check_keys(mv, {"free", "shift", "segment", "shift_width", "segment_max"}, p + ".moves");
    json mo;
    take<double>(mv, mo, "free", 1.0, p + ".moves");
    take<double>(mv, mo, "shift", 0.0, p + ".moves");
    take<double>(mv, mo, "segment", 0.0, p + ".moves");
    take<double>(mv, mo, "shift_width", 0.05, p + ".moves");
    take<int>(mv, mo, "segment_max", 0, p + ".moves");
    out["moves"] = mo;
  } else {
    out["moves"] = "auto";
  }
  return out;
}

json resolve_task(const json& t) {
  const std::string p = "task";
  if (!t.is_object() || !t.contains("name")) fail(p + ".name", "missing");
  json out;
  const auto name = take<std::string>(t, out, "name", "", p);
  if (std::find(kTasks.begin(), kTasks.end(), name) == kTasks.end()) fail(p + ".name", "unknown task '" + name + "'");
  if (name == "validate-graph") {
    check_keys(t, {"name", "n_max", "degree_bound", "ratio_ceiling"}, p);
    take<int>(t, out, "n_max", 0, p);
    take<int>(t, out, "degree_bound", 12, p);
    take<double>(t, out, "ratio_ceiling", 8.0, p);
  } else if (name == "simulate") {
    check_keys(t, {"name", "bins", "dump", "dump_every"}, p);
    if (take<int>(t, out, "bins", 20, p) < 1) fail(p + ".bins", "must be positive");
    take<bool>(t, out, "dump", false, p);
    if (take<int>(t, out, "dump_every", 1, p) < 1) fail(p + ".dump_every", "must be positive");
  } else if (name == "rdm") {
    check_keys(t, {"name", "method", "samples", "batches", "sites", "pairs", "m", "inner_bridges", "inner_loops"}, p);
    const auto method = take<std::string>(t, out, "method", "reference", p);
    if (method != "reference" && method != "chain") fail(p + ".method", "expected reference or chain");
    if (take<std::int64_t>(t, out, "samples", 100000, p) < 4) fail(p + ".samples", "too small");
    take<int>(t, out, "batches", 50, p);
    take_vertices(t, out, "sites", "origin", p);
    const auto pairs = take<std::string>(t, out, "pairs", "grid", p);
    if (pairs != "grid" && pairs != "diagonal") fail(p + ".pairs", "expected grid or diagonal");
    if (take<int>(t, out, "m", 8, p) < 1) fail(p + ".m", "must be positive");
    take<int>(t, out, "inner_bridges", 16, p);
    take<int>(t, out, "inner_loops", 64, p);
  } else if (name == "dlr-check") {
    check_keys(t, {"name", "inner", "mid", "bins", "batches", "resample_every", "conditional_sweeps"}, p);
    take_vertices(t, out, "inner", "origin", p);
    take_vertices(t, out, "mid", "box", p);
    take<int>(t, out, "bins", 10, p);
    take<int>(t, out, "batches", 50, p);
    take<std::int64_t>(t, out, "resample_every", 10, p);
    take<std::int64_t>(t, out, "conditional_sweeps", 40, p);
  } else if (name == "gauge-sweep") {
    check_keys(t, {"name", "ns", "rbar", "J"}, p);
    take_ints(t, out, "ns", {8, 16, 32, 64}, p);
    take<int>(t, out, "rbar", 2, p);
    take<double>(t, out, "J", 1.0, p);
  } else if (name == "break-sym") {
    check_keys(t, {"name", "ns", "beta", "slices", "theta_hc", "x_star", "boundary", "eta", "interaction",
                   "half_width", "centers", "scan"},
               p);
    take_ints(t, out, "ns", {2}, p);
    take<double>(t, out, "beta", 4.0, p);
    take<int>(t, out, "slices", 16, p);
    take<double>(t, out, "theta_hc", 0.2, p);
    const double xs = take<double>(t, out, "x_star", 0.0, p);
    const auto b = take<std::string>(t, out, "boundary", "cooled", p);
    if (b != "cooled" && b != "tilted") fail(p + ".boundary", "expected cooled or tilted");
    take<double>(t, out, "eta", 0.0, p);
    take<bool>(t, out, "interaction", true, p);
    take<double>(t, out, "half_width", 0.005, p);
    take_doubles(t, out, "centers", {xs, wrap01(xs + 0.5)}, p);
    if (t.contains("scan") && !t.at("scan").is_null()) {
      const json& s = t.at("scan");
      check_keys(s, {"target", "tolerance", "max_iterations"}, p + ".scan");
      json so;
      take<double>(s, so, "target", 2.0 / 3.0, p + ".scan");
      take<double>(s, so, "tolerance", 0.02, p + ".scan");
      take<int>(s, so, "max_iterations", 10, p + ".scan");
      out["scan"] = so;
    } else {
      out["scan"] = nullptr;
    }
  } else if (name == "lemma11") {
    check_keys(t, {"name", "beta", "m", "n_max"}, p);
    take<double>(t, out, "beta", 1.0, p);
    take<int>(t, out, "m", 64, p);
    take<int>(t, out, "n_max", 8, p);
  }
  return out;
}

bool task_needs_model(const std::string& task) {
  return task == "validate-graph" || task == "simulate" || task == "rdm" || task == "dlr-check";
}

std::string hex16(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

}  // namespace

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string ExperimentConfig::hash() const {
  json h = resolved;
  h.erase("output");
  return hex16(fnv1a(h.dump()));
}

ExperimentConfig parse_config(const json& raw) {
  check_keys(raw, {"model", "run", "task", "output"}, "config");
  if (!raw.contains("task")) fail("task", "missing");
  ExperimentConfig cfg;
  json& r = cfg.resolved;
  r["task"] = resolve_task(raw.at("task"));
  cfg.task = r["task"]["name"].get<std::string>();
  if (raw.contains("model"))
    r["model"] = resolve_model(raw.at("model"));
  else if (task_needs_model(cfg.task))
    fail("model", "required by task " + cfg.task);
  r["run"] = resolve_run(raw.value("run", json::object()));
  const json o = raw.value("output", json::object());
  check_keys(o, {"dir"}, "output");
  json oo;
  cfg.out_dir = take<std::string>(o, oo, "dir", ".", "output");
  r["output"] = oo;
  cfg.seed = r["run"]["seed"].get<std::uint64_t>();
  cfg.chains = r["run"]["chains"].get<int>();
  if (cfg.task == "validate-graph" && r["task"]["n_max"].get<int>() <= 0)
    r["task"]["n_max"] = r["model"]["graph"]["extent"];
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  json raw;
  try {
    raw = json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return parse_config(raw);
}

ExperimentConfig apply_overrides(const ExperimentConfig& cfg, const Overrides& o) {
  json raw = cfg.resolved;
  if (o.seed) raw["run"]["seed"] = *o.seed;
  if (o.chains) raw["run"]["chains"] = *o.chains;
  if (o.out_dir) raw["output"]["dir"] = *o.out_dir;
  if (o.task && *o.task != cfg.task) {
    if (raw["task"].size() > 1) throw ConfigError("task: config is set up for " + cfg.task + ", not " + *o.task);
    raw["task"] = json{{"name", *o.task}};
  }
  ExperimentConfig out = parse_config(raw);
  out.threads = o.threads ? std::max(1, *o.threads) : cfg.threads;
  return out;
}

namespace {

std::vector<VertexId> select_vertices(const json& sel, const ModelSpec& model, const std::string& path) {
  if (sel.is_string()) {
    if (sel == "origin") return {model.graph->origin()};
    return model.region;
  }
  std::vector<VertexId> out;
  for (const auto& e : sel) {
    const int v = e.get<int>();
    if (v < 0 || std::size_t(v) >= model.graph->size()) fail(path, "vertex " + std::to_string(v) + " out of range");
    out.push_back(v);
  }
  return out;
}

}  // namespace

ModelSpec build_model(const ExperimentConfig& cfg) {
  if (!cfg.resolved.contains("model")) fail("model", "missing");
  const json& m = cfg.resolved.at("model");
  const json& g = m.at("graph");
  LatticeSpec ls;
  ls.kind = parse_lattice_kind(g.at("kind").get<std::string>());
  ls.extent = g.at("extent").get<int>();
  ls.metric = parse_metric(g.at("metric").get<std::string>());
  ls.branching = g.at("branching").get<int>();
  std::shared_ptr<const Graph> graph;
  try {
    graph = make_lattice(ls);
  } catch (const std::invalid_argument& e) {
    fail("model.graph", e.what());
  }
  const int dim = m.at("dim").get<int>();
  const json& v = m.at("potential");
  const auto vk = parse_potential_kind(v.at("kind").get<std::string>());
  Potential pot = Potential::zero(dim);
  try {
    if (vk == PotentialKind::cosine) pot = Potential::cosine(dim);
    if (vk == PotentialKind::singular_cosine) pot = Potential::singular_cosine(v.at("theta_hc").get<double>(), dim);
    if (vk == PotentialKind::tabulated) pot = Potential::tabulated(v.at("table").get<std::vector<double>>(), dim);
  } catch (const std::invalid_argument& e) {
    fail("model.potential", e.what());
  }
  InteractionProfile prof;
  try {
    prof = InteractionProfile(m.at("coupling").at("J").get<std::vector<double>>(),
                              parse_coupling_metric(m.at("coupling").at("metric").get<std::string>()));
  } catch (const std::invalid_argument& e) {
    fail("model.coupling", e.what());
  }
  const json& b = m.at("boundary");
  const auto xs = b.at("x_star").get<std::vector<double>>();
  const TorusPoint x(std::span<const double>(xs.data(), xs.size()));
  Boundary bnd;
  try {
    const auto bk = b.at("kind").get<std::string>();
    if (bk == "cooled") bnd = Boundary::cooled(x);
    if (bk == "tilted") bnd = Boundary::tilted(x, b.at("eta").get<double>(), b.at("theta_hc").get<double>());
  } catch (const std::invalid_argument& e) {
    fail("model.boundary", e.what());
  }
  ModelSpec model = box_model(graph, dim, m.at("beta").get<double>(), m.at("slices").get<int>(), pot, prof, bnd);
  if (!m.at("region").is_string() || m.at("region") != "box") {
    auto r = select_vertices(m.at("region"), model, "model.region");
    std::sort(r.begin(), r.end());
    r.erase(std::unique(r.begin(), r.end()), r.end());
    model.region = r;
  }
  try {
    model.validate();
  } catch (const std::invalid_argument& e) {
    fail("model", e.what());
  }
  return model;
}

json provenance_json(const ExperimentConfig& cfg, const std::string& task) {
  json c = cfg.resolved;
  c.erase("output");
  return json{{"version", QROTOR_VERSION},
              {"task", task},
              {"config_hash", cfg.hash()},
              {"seed", cfg.seed},
              {"config", c}};
}

std::string provenance_header(const ExperimentConfig& cfg, const std::string& task) {
  json c = cfg.resolved;
  c.erase("output");
  std::ostringstream os;
  os << "# qrotor " << QROTOR_VERSION << "\n"
     << "# task: " << task << "\n"
     << "# config_hash: " << cfg.hash() << "\n"
     << "# seed: " << cfg.seed << "\n"
     << "# config: " << c.dump() << "\n";
  return os.str();
}

namespace {

namespace fs = std::filesystem;

struct Out {
  std::string dir;
  std::vector<std::string> files;

  std::ofstream open(const std::string& name) {
    fs::create_directories(dir);
    const std::string path = (fs::path(dir) / name).string();
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path);
    files.push_back(path);
    return f;
  }
  void write_json(const std::string& name, const json& j) {
    auto f = open(name);
    f << j.dump(2) << "\n";
  }
};

RunOptions run_options(const ExperimentConfig& cfg) {
  const json& r = cfg.resolved.at("run");
  RunOptions ro;
  ro.sweeps = r.at("sweeps").get<std::uint64_t>();
  ro.burn_in = r.at("burn_in").get<std::int64_t>();
  ro.thin = r.at("thin").get<std::uint64_t>();
  if (r.at("moves").is_object()) {
    const json& mv = r.at("moves");
    ro.chain.moves.free = mv.at("free").get<double>();
    ro.chain.moves.shift = mv.at("shift").get<double>();
    ro.chain.moves.segment = mv.at("segment").get<double>();
    ro.chain.moves.shift_width = mv.at("shift_width").get<double>();
    ro.chain.moves.segment_max = mv.at("segment_max").get<int>();
    ro.chain.moves_set = true;
  }
  return ro;
}

std::size_t observed_index(const ModelSpec& model) {
  const auto it = std::lower_bound(model.region.begin(), model.region.end(), model.graph->origin());
  if (it != model.region.end() && *it == model.graph->origin()) return std::size_t(it - model.region.begin());
  return 0;
}

json dump_header(const ExperimentConfig& cfg, int chain) {
  json h = provenance_json(cfg, "simulate");
  h["chain"] = chain;
  return h;
}

std::string energy_csv_header() { return "chain,sweep,energy\n"; }

TaskOutcome task_validate_graph(const ExperimentConfig& cfg, Out& out) {
  const ModelSpec model = build_model(cfg);
  const json& t = cfg.resolved.at("task");
  BidimOptions bo;
  bo.degree_bound = t.at("degree_bound").get<int>();
  bo.ratio_ceiling = t.at("ratio_ceiling").get<double>();
  const BidimReport r = verify_bidimensional(*model.graph, t.at("n_max").get<int>(), bo);
  TaskOutcome o;
  o.pass = r.pass;
  o.summary = {{"max_degree", r.max_degree},         {"sphere_ratio_sup", r.sphere_ratio_sup},
               {"ball_ratio_sup", r.ball_ratio_sup}, {"n_tested", r.n_tested},
               {"pass", r.pass},                     {"vertices", model.graph->size()}};
  json doc = o.summary;
  doc["provenance"] = provenance_json(cfg, cfg.task);
  out.write_json("graph_report.json", doc);
  return o;
}

TaskOutcome task_simulate(const ExperimentConfig& cfg, Out& out) {
  const ModelSpec model = build_model(cfg);
  const RunOptions ro = run_options(cfg);
  const json& t = cfg.resolved.at("task");
  const int bins = t.at("bins").get<int>();
  const bool dump = t.at("dump").get<bool>();
  const auto dump_every = t.at("dump_every").get<std::uint64_t>();
  const std::size_t obs = observed_index(model);

  struct ChainOut {
    std::vector<std::uint64_t> sweeps;
    std::vector<double> energy;
    std::vector<int> bins;
    std::map<std::string, double> acceptance;
    double tau = 0.5;
    std::string error;
  };
  std::vector<ChainOut> results(std::size_t(cfg.chains));
  if (dump) fs::create_directories(out.dir);

  auto run_chain = [&](int c) {
    ChainOut& co = results[std::size_t(c)];
    try {
      GibbsChain chain(model, RngStream(cfg.seed, {std::uint64_t(Purpose::chain), std::uint64_t(c)}), ro.chain);
      std::unique_ptr<ConfigDumpWriter> writer;
      if (dump)
        writer = std::make_unique<ConfigDumpWriter>(
            (fs::path(out.dir) / ("configs_chain" + std::to_string(c) + ".qrcf")).string(),
            dump_header(cfg, c).dump());
      RunOptions local = ro;
      local.track_energy = true;
      std::uint64_t k = 0;
      const RunResult rr = mcmc_run(chain, local, [&](std::uint64_t s, const GibbsChain& ch) {
        co.sweeps.push_back(s);
        co.bins.push_back(bin_of(ch.path(obs).at(0, 0), bins));
        if (writer && k % dump_every == 0) writer->write(s, ch.state());
        ++k;
      });
      if (writer) writer->close();
      co.energy = rr.energy_trace;
      co.acceptance = rr.stats.acceptance_by_move;
      co.tau = rr.stats.autocorr.at("energy");
    } catch (const std::exception& e) {
      co.error = e.what();
    }
  };
  const int workers = std::min(cfg.threads, cfg.chains);
  if (workers <= 1) {
    for (int c = 0; c < cfg.chains; ++c) run_chain(c);
  } else {
    std::atomic<int> next{0};
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (int c; (c = next.fetch_add(1)) < cfg.chains;) run_chain(c);
      });
  }
  for (const auto& co : results)
    if (!co.error.empty()) throw std::runtime_error(co.error);

  {
    auto f = out.open("energy.csv");
    f << provenance_header(cfg, "simulate") << energy_csv_header();
    for (int c = 0; c < cfg.chains; ++c) {
      const auto& co = results[std::size_t(c)];
      for (std::size_t k = 0; k < co.energy.size(); ++k)
        f << c << ',' << co.sweeps[k] << ',' << format_double(co.energy[k]) << '\n';
    }
  }
  std::vector<int> pooled;
  for (const auto& co : results) pooled.insert(pooled.end(), co.bins.begin(), co.bins.end());
  const BinnedEstimate be = binned_marginal(pooled, bins);
  {
    auto f = out.open("marginal.csv");
    f << provenance_header(cfg, "simulate") << "bin,lo,hi,p,stderr\n";
    for (int b = 0; b < bins; ++b)
      f << b << ',' << format_double(double(b) / bins) << ',' << format_double(double(b + 1) / bins) << ','
        << format_double(be.p[std::size_t(b)]) << ',' << format_double(be.err[std::size_t(b)]) << '\n';
  }
  if (dump)
    for (int c = 0; c < cfg.chains; ++c)
      out.files.push_back((fs::path(out.dir) / ("configs_chain" + std::to_string(c) + ".qrcf")).string());
  TaskOutcome o;
  json chains = json::array();
  for (const auto& co : results) chains.push_back({{"acceptance", co.acceptance}, {"tau_energy", co.tau}});
  o.summary = {{"chains", chains}, {"observed_vertex", model.region[obs]}, {"samples", pooled.size()}};
  json doc = o.summary;
  doc["provenance"] = provenance_json(cfg, cfg.task);
  out.write_json("summary.json", doc);
  return o;
}

TaskOutcome task_rdm(const ExperimentConfig& cfg, Out& out) {
  const ModelSpec model = build_model(cfg);
  const json& t = cfg.resolved.at("task");
  const auto sites = select_vertices(t.at("sites"), model, "task.sites");
  const int m = t.at("m").get<int>();
  const bool grid = t.at("pairs") == "grid";
  const auto pairs = grid ? grid_pairs(m, int(sites.size()), model.dim) : diagonal_pairs(m, int(sites.size()), model.dim);
  RdmOptions ro;
  ro.method = parse_rdm_method(t.at("method").get<std::string>());
  ro.samples = t.at("samples").get<std::uint64_t>();
  ro.batches = t.at("batches").get<int>();
  ro.inner_bridges = t.at("inner_bridges").get<int>();
  ro.inner_loops = t.at("inner_loops").get<int>();
  const RunOptions run = run_options(cfg);
  ro.chain = run.chain;
  ro.thin = run.thin;
  ro.burn_in = run.burn_in;
  const RdmkEstimate est = estimate_rdmk(model, sites, pairs, ro, RngStream(cfg.seed, {std::uint64_t(Purpose::rdm)}));
  {
    auto f = out.open("rdmk.csv");
    f << provenance_header(cfg, "rdm");
    write_rdmk_csv(f, est);
  }
  TaskOutcome o;
  o.summary = {{"pairs", est.pairs.size()}, {"samples", est.samples}, {"method", to_string(est.method)}};
  if (grid) {
    const KernelMatrix k = kernel_matrix(est, m);
    const PsdReport psd = psd_check(k);
    o.summary["grid_trace"] = grid_trace(k);
    o.summary["min_eigenvalue"] = psd.min_eigenvalue;
  }
  json doc = o.summary;
  doc["provenance"] = provenance_json(cfg, cfg.task);
  out.write_json("rdm_summary.json", doc);
  return o;
}

TaskOutcome task_dlr(const ExperimentConfig& cfg, Out& out) {
  const ModelSpec model = build_model(cfg);
  const json& t = cfg.resolved.at("task");
  const auto inner = select_vertices(t.at("inner"), model, "task.inner");
  auto mid = select_vertices(t.at("mid"), model, "task.mid");
  std::sort(mid.begin(), mid.end());
  DlrOptions d;
  const RunOptions run = run_options(cfg);
  d.sweeps = run.sweeps;
  d.chain = run.chain;
  d.bins = t.at("bins").get<int>();
  d.batches = t.at("batches").get<int>();
  d.resample_every = t.at("resample_every").get<std::uint64_t>();
  d.conditional_sweeps = t.at("conditional_sweeps").get<std::uint64_t>();
  const DlrReport r = dlr_check(model, inner, mid, d, RngStream(cfg.seed, {std::uint64_t(Purpose::chain)}));
  TaskOutcome o;
  o.pass = r.pass;
  o.summary = {{"tv", r.tv},
               {"null_mean", r.null.mean},
               {"null_sd", r.null.sd},
               {"z", r.z},
               {"pass", r.pass},
               {"two_stage_samples", r.two_stage_samples},
               {"direct", r.direct.p},
               {"two_stage", r.two_stage.p}};
  json doc = o.summary;
  doc["provenance"] = provenance_json(cfg, cfg.task);
  out.write_json("dlr_report.json", doc);
  return o;
}

TaskOutcome task_gauge(const ExperimentConfig& cfg, Out& out) {
  const json& t = cfg.resolved.at("task");
  const auto rows = psi_sweep(t.at("ns").get<std::vector<int>>(), t.at("rbar").get<int>(), t.at("J").get<double>());
  auto f = out.open("psi.csv");
  f << provenance_header(cfg, "gauge-sweep") << "n,Q,psi,psi_Q\n";
  TaskOutcome o;
  o.summary = json::array();
  for (const auto& r : rows) {
    f << r.n << ',' << format_double(r.q) << ',' << format_double(r.psi) << ',' << format_double(r.psi_q) << '\n';
    o.summary.push_back({{"n", r.n}, {"psi_q", r.psi_q}});
  }
  return o;
}

TaskOutcome task_break_sym(const ExperimentConfig& cfg, Out& out) {
  const json& t = cfg.resolved.at("task");
  const RunOptions run = run_options(cfg);
  SymbreakSpec spec;
  spec.beta = t.at("beta").get<double>();
  spec.slices = t.at("slices").get<int>();
  spec.theta_hc = t.at("theta_hc").get<double>();
  spec.x_star = t.at("x_star").get<double>();
  spec.boundary = t.at("boundary") == "tilted" ? BoundaryKind::tilted : BoundaryKind::cooled;
  spec.eta = t.at("eta").get<double>();
  spec.interaction = t.at("interaction").get<bool>();
  const double hw = t.at("half_width").get<double>();
  const auto centers = t.at("centers").get<std::vector<double>>();
  ArcRunOptions ao;
  ao.sweeps = run.sweeps;
  ao.burn_in = run.burn_in;
  if (run.chain.moves_set) {
    ao.chain = run.chain;
    ao.chain_set = true;
  }
  const RngStream base(cfg.seed, {std::uint64_t(Purpose::scan)});
  TaskOutcome o;
  o.summary = json::object();
  auto f = out.open("arcs.csv");
  f << provenance_header(cfg, "break-sym") << "n,eta,center,half_width,p,stderr\n";
  json arcs = json::array();
  for (int n : t.at("ns").get<std::vector<int>>()) {
    spec.n = n;
    const ArcReport r = arc_probability(symbreak_model(spec), centers, hw, ao, base.substream({1, std::uint64_t(n)}));
    for (const auto& a : r.arcs) {
      f << n << ',' << format_double(spec.boundary == BoundaryKind::tilted ? spec.eta : 0.0) << ','
        << format_double(a.center) << ',' << format_double(a.half_width) << ',' << format_double(a.p) << ','
        << format_double(a.stderr_) << '\n';
      arcs.push_back({{"n", n}, {"center", a.center}, {"p", a.p}, {"stderr", a.stderr_}});
    }
    if (!r.feasible_throughout) throw std::runtime_error("break-sym: hard-core violation in an emitted configuration");
  }
  o.summary["arcs"] = arcs;
  if (!t.at("scan").is_null()) {
    const json& s = t.at("scan");
    EtaScanOptions eo;
    eo.half_width = hw;
    eo.max_iterations = s.at("max_iterations").get<int>();
    eo.run = ao;
    auto g = out.open("eta_scan.csv");
    g << provenance_header(cfg, "break-sym")
      << "n,target,eta,eta_lo,eta_hi,p,stderr,bracketed,converged,monotone\n";
    json scans = json::array();
    for (int n : t.at("ns").get<std::vector<int>>()) {
      spec.n = n;
      const EtaScanResult e = eta_scan(spec, s.at("target").get<double>(), s.at("tolerance").get<double>(), eo,
                                       base.substream({2, std::uint64_t(n)}));
      g << n << ',' << format_double(e.target) << ',' << format_double(e.eta) << ',' << format_double(e.eta_lo) << ','
        << format_double(e.eta_hi) << ',' << format_double(e.p) << ',' << format_double(e.p_err) << ','
        << e.bracketed << ',' << e.converged << ',' << e.monotone << '\n';
      scans.push_back({{"n", n}, {"eta", e.eta}, {"converged", e.converged}, {"bracketed", e.bracketed}});
    }
    o.summary["scan"] = scans;
  }
  return o;
}

TaskOutcome task_lemma11(const ExperimentConfig& cfg, Out& out) {
  const json& t = cfg.resolved.at("task");
  const auto d = lemma11_sweep(t.at("beta").get<double>(), t.at("m").get<int>(), t.at("n_max").get<int>());
  auto f = out.open("lemma11.csv");
  f << provenance_header(cfg, "lemma11") << "N,trace_norm_distance\n";
  for (std::size_t n = 0; n < d.size(); ++n) f << n << ',' << format_double(d[n]) << '\n';
  TaskOutcome o;
  o.summary = {{"distances", d}};
  return o;
}

}  // namespace

TaskOutcome run_experiment(const ExperimentConfig& cfg) {
  Out out{cfg.out_dir, {}};
  TaskOutcome o;
  if (cfg.task == "validate-graph") o = task_validate_graph(cfg, out);
  else if (cfg.task == "simulate") o = task_simulate(cfg, out);
  else if (cfg.task == "rdm") o = task_rdm(cfg, out);
  else if (cfg.task == "dlr-check") o = task_dlr(cfg, out);
  else if (cfg.task == "gauge-sweep") o = task_gauge(cfg, out);
  else if (cfg.task == "break-sym") o = task_break_sym(cfg, out);
  else if (cfg.task == "lemma11") o = task_lemma11(cfg, out);
  else throw ConfigError("task.name: unknown task " + cfg.task);
  o.files.insert(o.files.begin(), out.files.begin(), out.files.end());
  return o;
}

TaskOutcome replay(const std::vector<std::string>& dumps, const json& observable, const std::string& out_dir) {
  if (dumps.empty()) throw std::invalid_argument("replay: no dump files");
  const auto kind = observable.value("kind", std::string("energy"));
  if (kind != "energy" && kind != "arc") throw ConfigError("observable.kind: expected energy or arc");

  struct Loaded {
    int chain;
    ConfigDump dump;
  };
  std::vector<Loaded> loaded;
  std::optional<ExperimentConfig> cfg;
  for (const auto& path : dumps) {
    ConfigDump d = read_config_dump(path);
    const json h = json::parse(d.header);
    if (h.at("version") != QROTOR_VERSION)
      throw std::runtime_error("replay: dump written by version " + h.at("version").get<std::string>());
    ExperimentConfig c = parse_config(h.at("config"));
    if (c.hash() != h.at("config_hash")) throw std::runtime_error("replay: config hash mismatch in " + path);
    if (cfg && cfg->hash() != c.hash()) throw std::runtime_error("replay: dumps come from different configs");
    cfg = c;
    loaded.push_back({h.at("chain").get<int>(), std::move(d)});
  }
  std::sort(loaded.begin(), loaded.end(), [](const Loaded& a, const Loaded& b) { return a.chain < b.chain; });
  const ModelSpec model = build_model(*cfg);
  const PathConfiguration bnd = resolve_boundary(model);

  Out out{out_dir, {}};
  TaskOutcome o;
  if (kind == "energy") {
    auto f = out.open("energy.csv");
    f << provenance_header(*cfg, "simulate") << energy_csv_header();
    for (const auto& l : loaded)
      for (std::size_t k = 0; k < l.dump.configs.size(); ++k)
        f << l.chain << ',' << l.dump.sweeps[k] << ',' << format_double(model_energy(model, l.dump.configs[k], bnd))
          << '\n';
  } else {
    const double c = observable.at("center").get<double>();
    const double w = observable.at("half_width").get<double>();
    const VertexId v = observable.value("vertex", model.graph->origin());
    std::vector<double> xs;
    for (const auto& l : loaded)
      for (const auto& cf : l.dump.configs) xs.push_back(in_arc(cf.at(v).at(0, 0), c, w) ? 1.0 : 0.0);
    const MeanError me = batch_mean(xs, 50);
    auto f = out.open("arc_replay.csv");
    f << provenance_header(*cfg, "replay") << "vertex,center,half_width,p,stderr,samples\n"
      << v << ',' << format_double(c) << ',' << format_double(w) << ',' << format_double(me.mean) << ','
      << format_double(me.stderr_) << ',' << xs.size() << '\n';
    o.summary = {{"p", me.mean}, {"stderr", me.stderr_}, {"samples", xs.size()}};
  }
  o.files = out.files;
  return o;
}

}  // namespace qrotor
