#include "gnls/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <utility>

#include "gnls/corpus.hpp"
#include "gnls/graph_function.hpp"
#include "gnls/graph_io.hpp"

namespace gnls {

namespace {

using nlohmann::json;

MetricGraph experiment_graph(const std::string& source,
                             std::optional<double> length) {
  if (source == "pendant") return make_pendant(length.value_or(1.0));
  if (source == "tadpole") return make_tadpole(length.value_or(2.0));
  if (source == "double_bridge")
    return make_double_bridge(length.value_or(1.0), length.value_or(1.0));
  if (length)
    throw std::invalid_argument("experiment: graph '" + source +
                                "' takes no length parameter");
  if (source == "line" || source == "bubble_tower" || source == "showcase")
    return builtin_graph(source);
  return load_graph(source);
}

struct RunPoint {
  double p, mu, h, L;
  std::uint64_t seed;
  std::optional<double> length;
};

std::string resolve_output_dir(const ExperimentSpec& spec) {
  if (!spec.output_dir.empty()) return spec.output_dir;
  if (const char* env = std::getenv("GNLS_OUT_DIR"); env && *env) return env;
  return ".";
}

json spec_echo(const ExperimentSpec& spec) {
  json j;
  j["name"] = spec.name;
  j["graph"] = spec.graph;
  j["p"] = spec.p_values;
  j["mu"] = spec.mu_values;
  if (!spec.lengths.empty()) j["lengths"] = spec.lengths;
  j["h"] = spec.h_values;
  j["L"] = spec.L_values;
  j["seeds"] = spec.seeds;
  if (!spec.shifts.empty()) j["shifts"] = spec.shifts;
  j["hybrid"] = spec.base.use_hybrid;
  j["max_iterations"] = spec.base.max_iterations;
  j["energy_tolerance"] = spec.base.energy_tolerance;
  j["gradient_tolerance"] = spec.base.gradient_tolerance;
  j["write_profiles"] = spec.write_profiles;
  return j;
}

json run_record(const ExperimentSpec& spec, const RunPoint& pt,
                std::size_t index, const std::string& csv_name) {
  json r;
  r["index"] = index;
  r["p"] = pt.p;
  r["mu"] = pt.mu;
  r["h"] = pt.h;
  r["L"] = pt.L;
  r["seed"] = pt.seed;
  if (pt.length) r["length"] = *pt.length;

  MinimizeConfig cfg = spec.base;
  cfg.p = pt.p;
  cfg.mu = pt.mu;
  cfg.h = pt.h;
  cfg.truncation = pt.L;
  cfg.seed = pt.seed;

  try {
    MetricGraph graph = experiment_graph(spec.graph, pt.length);
    GroundStateReport rep = minimize(graph, cfg);
    r["graph_hash"] = rep.graph_hash;
    r["energy"] = rep.energy;
    r["energy_initial"] = rep.energy_history.front();
    r["lambda"] = rep.lambda;
    r["converged"] = rep.converged;
    r["iterations"] = rep.iterations;
    r["hybrid_steps"] = rep.hybrid_steps;
    r["probe_jumps"] = rep.probe_jumps;
    r["verdict"] = verdict_name(rep.verdict);
    r["escape_fraction"] = rep.escape_fraction;
    r["mass"] = rep.mass_value;
    r["bounds_lower"] = rep.bounds.lower;
    r["bounds_upper"] = rep.bounds.upper;
    r["el_residual"] = rep.residuals.el_residual;
    r["kirchhoff_residual"] = rep.residuals.kirchhoff_residual;
    if (!csv_name.empty()) {
      std::ofstream out(csv_name, std::ios::binary);
      if (!out)
        throw std::runtime_error("cannot write profile '" + csv_name + "'");
      dump_csv(rep.state, pt.p, pt.mu, out);
      r["profile_csv"] = std::filesystem::path(csv_name).filename().string();
    }
  } catch (const std::exception& ex) {
    r["error"] = ex.what();
  }
  return r;
}

template <typename T>
std::vector<T> scalar_or_array(const json& j, const char* key) {
  std::vector<T> out;
  const json& v = j.at(key);
  if (v.is_array())
    for (const json& x : v) out.push_back(x.get<T>());
  else
    out.push_back(v.get<T>());
  if (out.empty())
    throw std::invalid_argument(std::string("experiment spec: '") + key +
                                "' must not be empty");
  return out;
}

}  // namespace

ExperimentRecord run_experiment(const ExperimentSpec& spec) {
  if (spec.name.empty())
    throw std::invalid_argument("experiment spec: missing name");
  if (spec.graph.empty())
    throw std::invalid_argument("experiment spec: missing graph source");
  if (spec.p_values.empty() || spec.mu_values.empty() ||
      spec.h_values.empty() || spec.L_values.empty() || spec.seeds.empty())
    throw std::invalid_argument("experiment spec: empty parameter grid");

  std::vector<std::optional<double>> lengths;
  if (spec.lengths.empty())
    lengths.push_back(std::nullopt);
  else
    for (double l : spec.lengths) lengths.push_back(l);

  std::vector<RunPoint> points;
  for (double p : spec.p_values)
    for (double mu : spec.mu_values)
      for (const auto& len : lengths)
        for (double h : spec.h_values)
          for (double L : spec.L_values)
            for (std::uint64_t seed : spec.seeds)
              points.push_back({p, mu, h, L, seed, len});

  std::string dir = resolve_output_dir(spec);
  std::filesystem::create_directories(dir);
  auto path_in_dir = [&dir](const std::string& file) {
    return (std::filesystem::path(dir) / file).string();
  };

  std::vector<std::string> csv_names(points.size());
  if (spec.write_profiles)
    for (std::size_t i = 0; i < points.size(); ++i)
      csv_names[i] =
          path_in_dir(spec.name + "-run" + std::to_string(i) + ".csv");

  std::vector<json> runs(points.size());
  std::size_t workers = std::thread::hardware_concurrency();
  workers = std::min(std::max<std::size_t>(workers, 1), points.size());
  std::atomic<std::size_t> cursor{0};
  auto worker = [&] {
    for (;;) {
      std::size_t i = cursor.fetch_add(1);
      if (i >= points.size()) return;
      runs[i] = run_record(spec, points[i], i, csv_names[i]);
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (std::thread& t : pool) t.join();

  ExperimentRecord out;
  out.record["code_version"] = kCodeVersion;
  out.record["experiment"] = spec.name;
  out.record["spec"] = spec_echo(spec);
  out.record["runs"] = runs;

  // Derived tables along whichever grid axis actually varies, at the first
  // value of every other axis.
  auto first_axis_runs = [&](auto picker) {
    json table = json::array();
    for (std::size_t i = 0; i < points.size(); ++i) {
      const RunPoint& pt = points[i];
      if (pt.p != spec.p_values.front() || pt.mu != spec.mu_values.front() ||
          pt.h != spec.h_values.front() || pt.seed != spec.seeds.front())
        continue;
      if (!runs[i].contains("energy")) continue;
      json row = picker(pt);
      if (row.is_null()) continue;
      row["energy"] = runs[i]["energy"];
      row["verdict"] = runs[i]["verdict"];
      table.push_back(row);
    }
    return table;
  };
  json tables;
  if (spec.L_values.size() > 1) {
    tables["energy_vs_L"] = first_axis_runs([&](const RunPoint& pt) -> json {
      if (pt.length != lengths.front()) return nullptr;
      return json{{"L", pt.L}};
    });
    // Widening the window is the escape detector: if the minimum keeps
    // dropping as L grows, no fixed profile is being approached.
    const json& tl = tables["energy_vs_L"];
    if (tl.size() > 1) {
      std::string final_v = tl.back()["verdict"].get<std::string>();
      for (std::size_t i = 0; i + 1 < tl.size(); ++i) {
        double e0 = tl[i]["energy"].get<double>();
        double e1 = tl[i + 1]["energy"].get<double>();
        if (e1 < e0 - spec.base.escape_energy_drop_tol)
          final_v = verdict_name(Verdict::Escaping);
      }
      tables["final_verdict"] = final_v;
    }
  }
  if (lengths.size() > 1) {
    tables["energy_vs_length"] =
        first_axis_runs([&](const RunPoint& pt) -> json {
          if (pt.L != spec.L_values.front()) return nullptr;
          return json{{"length", *pt.length}};
        });
  }

  if (!spec.shifts.empty()) {
    MinimizeConfig cfg = spec.base;
    cfg.p = spec.p_values.front();
    cfg.mu = spec.mu_values.front();
    cfg.h = spec.h_values.front();
    cfg.truncation = spec.L_values.back();
    MetricGraph graph = experiment_graph(spec.graph, lengths.front());
    json curve = json::array();
    for (double s : spec.shifts) {
      json row{{"shift", s}};
      try {
        double W = std::min(25.0, cfg.truncation - s);
        row["energy"] = escaping_sequence_energy(graph, s, cfg, W, 2.0);
        row["support_halfwidth"] = W;
      } catch (const std::exception& ex) {
        row["error"] = ex.what();
      }
      curve.push_back(row);
    }
    tables["escape_curve"] = curve;
  }
  if (!tables.is_null()) out.record["tables"] = tables;

  std::string record_path = path_in_dir(spec.name + ".json");
  {
    std::ofstream rec(record_path, std::ios::binary);
    if (!rec)
      throw std::runtime_error("cannot write record '" + record_path + "'");
    rec << out.record.dump(2) << "\n";
  }
  out.files_written.push_back(record_path);
  for (std::size_t i = 0; i < points.size(); ++i)
    if (!csv_names[i].empty() && runs[i].contains("profile_csv"))
      out.files_written.push_back(csv_names[i]);
  return out;
}

const std::vector<std::string>& builtin_experiment_names() {
  static const std::vector<std::string> names = {
      "pendant-sweep", "bridge-escape", "line-exact", "tadpole-exact",
      "tower-exact"};
  return names;
}

ExperimentSpec builtin_experiment(const std::string& name) {
  ExperimentSpec spec;
  spec.name = name;
  if (name == "pendant-sweep") {
    spec.graph = "pendant";
    spec.lengths = {0.5, 1.0, 2.0};
    spec.base.use_hybrid = true;
    return spec;
  }
  if (name == "bridge-escape") {
    spec.graph = "double_bridge";
    spec.L_values = {20.0, 40.0, 80.0};
    spec.shifts = {0, 5, 10, 15, 20, 25, 30, 35, 40, 45, 50};
    return spec;
  }
  if (name == "line-exact") {
    spec.graph = "line";
    return spec;
  }
  if (name == "tadpole-exact") {
    spec.graph = "tadpole";
    return spec;
  }
  if (name == "tower-exact") {
    spec.graph = "bubble_tower";
    return spec;
  }
  throw std::invalid_argument("unknown builtin experiment '" + name + "'");
}

ExperimentSpec parse_experiment_spec(const nlohmann::json& j) {
  if (!j.is_object())
    throw std::invalid_argument("experiment spec: expected a JSON object");
  static const char* known[] = {
      "name",   "graph",  "p",          "mu",          "lengths",
      "h",      "L",      "seeds",      "shifts",      "hybrid",
      "output_dir",       "write_profiles",            "max_iterations",
      "energy_tolerance", "gradient_tolerance",        "hybrid_period"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : known) ok = ok || it.key() == k;
    if (!ok)
      throw std::invalid_argument("experiment spec: unknown key '" +
                                  it.key() + "'");
  }

  ExperimentSpec spec;
  if (!j.contains("name") || !j.at("name").is_string())
    throw std::invalid_argument("experiment spec: missing name");
  if (!j.contains("graph") || !j.at("graph").is_string())
    throw std::invalid_argument("experiment spec: missing graph source");
  spec.name = j.at("name").get<std::string>();
  spec.graph = j.at("graph").get<std::string>();
  if (j.contains("p")) spec.p_values = scalar_or_array<double>(j, "p");
  if (j.contains("mu")) spec.mu_values = scalar_or_array<double>(j, "mu");
  if (j.contains("lengths"))
    spec.lengths = scalar_or_array<double>(j, "lengths");
  if (j.contains("h")) spec.h_values = scalar_or_array<double>(j, "h");
  if (j.contains("L")) spec.L_values = scalar_or_array<double>(j, "L");
  if (j.contains("seeds"))
    spec.seeds = scalar_or_array<std::uint64_t>(j, "seeds");
  if (j.contains("shifts")) spec.shifts = scalar_or_array<double>(j, "shifts");
  if (j.contains("hybrid")) spec.base.use_hybrid = j.at("hybrid").get<bool>();
  if (j.contains("hybrid_period"))
    spec.base.hybrid_period = j.at("hybrid_period").get<int>();
  if (j.contains("output_dir"))
    spec.output_dir = j.at("output_dir").get<std::string>();
  if (j.contains("write_profiles"))
    spec.write_profiles = j.at("write_profiles").get<bool>();
  if (j.contains("max_iterations"))
    spec.base.max_iterations = j.at("max_iterations").get<int>();
  if (j.contains("energy_tolerance"))
    spec.base.energy_tolerance = j.at("energy_tolerance").get<double>();
  if (j.contains("gradient_tolerance"))
    spec.base.gradient_tolerance = j.at("gradient_tolerance").get<double>();
  return spec;
}

}  // namespace gnls
