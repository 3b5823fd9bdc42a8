#include "gnls/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "gnls/corpus.hpp"
#include "gnls/experiments.hpp"
#include "gnls/graph_function.hpp"
#include "gnls/graph_io.hpp"
#include "gnls/metric_graph.hpp"
#include "gnls/minimizer.hpp"
#include "gnls/rearrangement.hpp"
#include "gnls/soliton.hpp"

namespace gnls {

namespace {

// Accepts either a builtin corpus name or a path to a graph JSON file.
MetricGraph resolve_graph(const std::string& source) {
  for (const CorpusEntry& e : builtin_corpus())
    if (e.name == source) return e.graph;
  return load_graph(source);
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct CheckHArgs {
  std::string graph;
};

int cmd_check_h(const CheckHArgs& args) {
  MetricGraph g = resolve_graph(args.graph);
  ConditionHResult res = check_condition_h(g);
  if (res.satisfied) {
    std::cout << "condition-h: satisfied\n";
  } else if (res.compact) {
    std::cout << "condition-h: fails (compact graph, no half-lines)\n";
  } else {
    std::cout << "condition-h: fails (witness edge '" << res.witness_edge
              << "', infinity-free component:";
    for (const std::string& v : res.infinity_free_component)
      std::cout << " " << v;
    std::cout << ")\n";
  }
  return 0;
}

struct SolitonArgs {
  double p = 4.0, mass = 1.0;
  std::string sample;  // "a:b:n"
  std::string out;
};

int cmd_soliton(const SolitonArgs& args) {
  SolitonParams sp = soliton_params(args.p);
  double e = soliton_energy(sp, args.mass);
  double lam = soliton_lambda(sp, args.mass);

  std::ostream* os = &std::cout;
  std::ofstream file;
  if (!args.out.empty()) {
    file.open(args.out, std::ios::binary);
    if (!file)
      throw std::runtime_error("cannot write '" + args.out + "'");
    os = &file;
  }
  *os << "# p=" << fmt(args.p) << " mu=" << fmt(args.mass)
      << " energy=" << fmt(e) << " lambda=" << fmt(lam)
      << " alpha=" << fmt(sp.alpha) << " beta=" << fmt(sp.beta) << "\n";
  if (!args.sample.empty()) {
    double a = 0.0, b = 0.0;
    unsigned long n = 0;
    if (std::sscanf(args.sample.c_str(), "%lf:%lf:%lu", &a, &b, &n) != 3 ||
        n < 2 || !(b > a))
      throw std::invalid_argument(
          "soliton: --sample expects a:b:n with b > a and n >= 2");
    *os << "x,phi\n";
    for (unsigned long i = 0; i < n; ++i) {
      double x = a + (b - a) * static_cast<double>(i) /
                         static_cast<double>(n - 1);
      *os << fmt(x) << "," << fmt(soliton_value(sp, args.mass, x)) << "\n";
    }
  }
  return 0;
}

struct MinimizeArgs {
  std::string graph;
  MinimizeConfig cfg;
  std::string out;  // prefix for .json / .csv
};

nlohmann::json report_json(const GroundStateReport& rep) {
  nlohmann::json j;
  j["code_version"] = kCodeVersion;
  j["graph_hash"] = rep.graph_hash;
  j["p"] = rep.config.p;
  j["mu"] = rep.config.mu;
  j["h"] = rep.config.h;
  j["L"] = rep.config.truncation;
  j["seed"] = rep.config.seed;
  j["hybrid"] = rep.config.use_hybrid;
  j["energy"] = rep.energy;
  j["energy_initial"] = rep.energy_history.front();
  j["lambda"] = rep.lambda;
  j["verdict"] = verdict_name(rep.verdict);
  j["converged"] = rep.converged;
  j["iterations"] = rep.iterations;
  j["hybrid_steps"] = rep.hybrid_steps;
  j["probe_jumps"] = rep.probe_jumps;
  j["mass"] = rep.mass_value;
  j["escape_fraction"] = rep.escape_fraction;
  j["bounds"] = {{"lower", rep.bounds.lower},
                 {"upper", rep.bounds.upper},
                 {"satisfied", verify_bounds(rep)}};
  j["residuals"] = {{"el", rep.residuals.el_residual},
                    {"kirchhoff", rep.residuals.kirchhoff_residual}};
  return j;
}

int cmd_minimize(const MinimizeArgs& args) {
  MetricGraph g = resolve_graph(args.graph);
  GroundStateReport rep = minimize(g, args.cfg);
  if (!args.out.empty()) {
    std::ofstream js(args.out + ".json", std::ios::binary);
    if (!js)
      throw std::runtime_error("cannot write '" + args.out + ".json'");
    js << report_json(rep).dump(2) << "\n";
    std::ofstream csv(args.out + ".csv", std::ios::binary);
    if (!csv)
      throw std::runtime_error("cannot write '" + args.out + ".csv'");
    dump_csv(rep.state, args.cfg.p, args.cfg.mu, csv);
  }
  std::cout << "energy=" << fmt(rep.energy) << " lambda=" << fmt(rep.lambda)
            << " verdict=" << verdict_name(rep.verdict)
            << " converged=" << (rep.converged ? "yes" : "no")
            << " iterations=" << rep.iterations
            << " escape_fraction=" << fmt(rep.escape_fraction)
            << " bounds=[" << fmt(rep.bounds.lower) << ","
            << fmt(rep.bounds.upper) << "]"
            << (verify_bounds(rep) ? " bounds_ok" : " bounds_violated")
            << "\n";
  return rep.converged ? 0 : 2;
}

struct RearrangeArgs {
  std::string mode;
  std::string graph;
  std::string input;
  std::optional<double> pendant_length;
  std::string out;
};

int cmd_rearrange(const RearrangeArgs& args) {
  MetricGraph g = resolve_graph(args.graph);
  std::ifstream in(args.input, std::ios::binary);
  if (!in)
    throw std::invalid_argument("cannot read '" + args.input + "'");
  CsvFunction cf = read_csv(g, in);

  RearrangementResult res;
  if (args.mode == "dec")
    res = decreasing_rearrangement(cf.u, cf.p);
  else if (args.mode == "sym")
    res = symmetric_rearrangement(cf.u, cf.p);
  else if (args.mode == "hybrid")
    res = hybrid_rearrangement(cf.u, cf.p, args.pendant_length);
  else
    throw std::invalid_argument("rearrange: mode must be dec, sym or hybrid");

  std::ostringstream audit;
  audit << "mode=" << args.mode << " mass_in=" << fmt(res.input_mass)
        << " mass_out=" << fmt(res.output_mass)
        << " dirichlet_in=" << fmt(res.input_dirichlet)
        << " dirichlet_out=" << fmt(res.output_dirichlet)
        << " lp_in=" << fmt(res.input_lp) << " lp_out=" << fmt(res.output_lp);
  if (res.tau) audit << " tau=" << fmt(*res.tau);
  audit << " min_crossings=" << res.min_crossings
        << " already_shaped=" << (res.input_already_shaped ? "yes" : "no");

  if (args.out.empty()) {
    dump_csv(res.output, cf.p, mass(res.output), std::cout);
    std::cerr << audit.str() << "\n";
  } else {
    std::ofstream out(args.out, std::ios::binary);
    if (!out)
      throw std::runtime_error("cannot write '" + args.out + "'");
    dump_csv(res.output, cf.p, mass(res.output), out);
    std::cout << audit.str() << "\n";
  }
  return 0;
}

struct ExperimentArgs {
  std::string source;
  std::string out_dir;
};

int cmd_experiment(const ExperimentArgs& args) {
  ExperimentSpec spec;
  bool builtin = false;
  for (const std::string& n : builtin_experiment_names())
    if (n == args.source) builtin = true;
  if (builtin) {
    spec = builtin_experiment(args.source);
  } else {
    std::ifstream in(args.source, std::ios::binary);
    if (!in)
      throw std::invalid_argument("cannot read experiment spec '" +
                                  args.source + "'");
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& ex) {
      throw std::invalid_argument("experiment spec '" + args.source +
                                  "': " + ex.what());
    }
    spec = parse_experiment_spec(j);
  }
  if (!args.out_dir.empty()) spec.output_dir = args.out_dir;

  ExperimentRecord rec = run_experiment(spec);
  std::cout << "record=" << rec.files_written.front() << "\n";
  for (const auto& run : rec.record["runs"]) {
    std::cout << "run " << run["index"].get<std::size_t>() << ":";
    if (run.contains("error")) {
      std::cout << " error=" << run["error"].get<std::string>() << "\n";
      continue;
    }
    std::cout << " energy=" << fmt(run["energy"].get<double>())
              << " verdict=" << run["verdict"].get<std::string>()
              << " iterations=" << run["iterations"].get<int>() << "\n";
  }
  return 0;
}

int cmd_corpus_list() {
  for (const CorpusEntry& e : builtin_corpus()) {
    std::size_t half_lines = 0;
    for (const Edge& ed : e.graph.edges())
      if (ed.is_half_line()) ++half_lines;
    std::cout << e.name << ": " << e.note << " [" << e.graph.vertices().size()
              << " vertices, " << e.graph.edges().size() << " edges, "
              << half_lines << " half-lines, hash "
              << graph_hash_hex(e.graph) << "]\n";
  }
  return 0;
}

int cmd_corpus_dump(const std::string& name, const std::string& out) {
  MetricGraph g = builtin_graph(name);
  if (out.empty()) {
    std::cout << serialize_graph(g);
  } else {
    save_graph(g, out);
    std::cout << "wrote " << out << "\n";
  }
  return 0;
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{
      "Ground states of the subcritical NLS energy on metric graphs"};
  app.require_subcommand(1);

  CheckHArgs ch;
  auto* sub_ch = app.add_subcommand(
      "check-h", "Check the escape condition (every cut keeps half-lines)");
  sub_ch->add_option("--graph", ch.graph, "builtin name or graph JSON file")
      ->required();

  SolitonArgs sol;
  auto* sub_sol =
      app.add_subcommand("soliton", "Closed-form line soliton constants");
  sub_sol->add_option("--p", sol.p, "nonlinearity exponent in (2,6)");
  sub_sol->add_option("--mass", sol.mass, "mass constraint")
      ->check(CLI::PositiveNumber);
  sub_sol->add_option("--sample", sol.sample, "sample grid a:b:n");
  sub_sol->add_option("--out", sol.out, "write CSV here instead of stdout");

  MinimizeArgs mi;
  auto* sub_mi =
      app.add_subcommand("minimize", "Constrained energy minimization");
  sub_mi->set_help_flag("--help", "print help");  // frees -h for --h
  sub_mi->add_option("--graph", mi.graph, "builtin name or graph JSON file")
      ->required();
  sub_mi->add_option("--p", mi.cfg.p, "nonlinearity exponent in (2,6)");
  sub_mi->add_option("--mass", mi.cfg.mu, "mass constraint")
      ->check(CLI::PositiveNumber);
  sub_mi->add_option("--h", mi.cfg.h, "target mesh spacing")
      ->check(CLI::PositiveNumber);
  sub_mi->add_option("--L", mi.cfg.truncation, "half-line truncation window")
      ->check(CLI::PositiveNumber);
  sub_mi->add_flag("--hybrid", mi.cfg.use_hybrid,
                   "interleave the pendant rearrangement");
  sub_mi->add_option("--seed", mi.cfg.seed, "perturbation seed");
  sub_mi->add_option("--perturb", mi.cfg.perturb_amplitude,
                     "relative amplitude of the random perturbation");
  sub_mi->add_option("--init-vertex", mi.cfg.init_vertex,
                     "start from the soliton wrapped around this vertex");
  sub_mi->add_option("--max-iterations", mi.cfg.max_iterations,
                     "iteration budget");
  sub_mi->add_option("--out", mi.out, "prefix for the .json/.csv artifacts");

  RearrangeArgs re;
  double re_ell = 0.0;
  auto* sub_re = app.add_subcommand(
      "rearrange", "Monotone / symmetric / pendant rearrangement of a CSV "
                   "profile");
  sub_re->add_option("--mode", re.mode, "dec, sym or hybrid")->required();
  sub_re->add_option("--graph", re.graph, "builtin name or graph JSON file")
      ->required();
  sub_re->add_option("--input", re.input, "input profile CSV")->required();
  auto* ell_opt = sub_re->add_option("--pendant-length", re_ell,
                                     "expected pendant length (hybrid mode)");
  sub_re->add_option("--out", re.out, "write the rearranged CSV here");

  ExperimentArgs ex;
  auto* sub_ex = app.add_subcommand(
      "experiment", "Run a builtin or JSON-defined experiment grid");
  sub_ex->add_option("source", ex.source, "builtin name or spec JSON file")
      ->required();
  sub_ex->add_option("--out-dir", ex.out_dir, "output directory override");

  auto* sub_corpus = app.add_subcommand("corpus", "Built-in example graphs");
  sub_corpus->require_subcommand(1);
  auto* sub_list = sub_corpus->add_subcommand("list", "List builtin graphs");
  std::string dump_name, dump_out;
  auto* sub_dump =
      sub_corpus->add_subcommand("dump", "Write a builtin graph as JSON");
  sub_dump->add_option("name", dump_name, "corpus graph name")->required();
  sub_dump->add_option("--out", dump_out, "output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*sub_ch) return cmd_check_h(ch);
    if (*sub_sol) return cmd_soliton(sol);
    if (*sub_mi) return cmd_minimize(mi);
    if (*sub_re) {
      if (ell_opt->count() > 0) re.pendant_length = re_ell;
      return cmd_rearrange(re);
    }
    if (*sub_ex) return cmd_experiment(ex);
    if (*sub_corpus) {
      if (*sub_list) return cmd_corpus_list();
      if (*sub_dump) return cmd_corpus_dump(dump_name, dump_out);
    }
    std::cerr << "error: no subcommand\n";
    return 1;
  } catch (const GraphParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace gnls
