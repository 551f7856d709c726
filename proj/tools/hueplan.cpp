#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "hueplan/colormap.hpp"
#include "hueplan/engine.hpp"
#include "hueplan/error.hpp"
#include "hueplan/planner.hpp"
#include "hueplan/preference.hpp"
#include "hueplan/service.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace hueplan;

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitIo = 2;
constexpr int kExitInvariant = 3;

struct InvariantFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Globals {
  std::string corpus;
  std::uint64_t quantize_seed = 0;
  bool json = false;
};

Corpus corpus_of(const Globals& g) {
  return load_corpus(g.corpus.empty() ? default_corpus_path() : fs::path(g.corpus));
}

std::shared_ptr<const StateSpace> space_of(const Globals& g) {
  return std::make_shared<const StateSpace>(quantize_gamut(g.quantize_seed));
}

std::string fixed(double v, int digits = 6) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

Weights weights_from(const json& doc, const std::string& what) {
  const json& arr = doc.is_object() && doc.contains("theta") ? doc["theta"] : doc;
  if (!arr.is_array()) throw ValidationError(what + ": expected an array of " + std::to_string(kFeatureCount) + " numbers");
  if (arr.size() != kFeatureCount) {
    throw ValidationError(what + ": theta must have " + std::to_string(kFeatureCount) + " entries, got " +
                          std::to_string(arr.size()));
  }
  Weights w{};
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    if (!arr[i].is_number()) throw ValidationError(what + ": theta entries must be numbers");
    w[i] = arr[i].get<double>();
  }
  return w;
}

json weights_json(const Weights& w) { return json(std::vector<double>(w.begin(), w.end())); }

/// Seed color from --seed-color, else from the model document.
LabColor seed_of(const std::string& flag, const json& model, std::string& hex) {
  hex = flag;
  if (hex.empty()) {
    if (!model.contains("seed_color")) throw ValidationError("no --seed-color and the model names none");
    hex = model["seed_color"].get<std::string>();
  }
  return parse_hex_lab(hex);
}

/// A preference model document or a bare {"seed_color", "theta"} document.
Weights theta_of(const json& doc, const std::string& what) {
  if (doc.contains("samples")) return model_from_json(doc).mean();
  return weights_from(doc, what);
}

void write_colormap(const fs::path& out, std::span<const LabColor> colors, const std::string& name) {
  const auto ext = out.extension().string();
  if (ext == ".csv") {
    write_text_file(out, colormap_to_csv(colors));
  } else if (ext == ".txt") {
    std::string text;
    for (const auto& h : to_hex_list(colors)) text += h + "\n";
    write_text_file(out, text);
  } else {
    write_text_file(out, colormap_to_json(colors, name).dump(2) + "\n");
  }
}

std::vector<LabColor> read_colormap(const fs::path& path) {
  if (path.extension() == ".txt") {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::vector<LabColor> colors;
    for (std::string line; std::getline(in, line);) {
      if (!line.empty()) colors.push_back(parse_hex_lab(line));
    }
    return colors;
  }
  return colormap_from_json(read_json_file(path));
}

int cmd_quantize(const Globals& g, std::uint64_t seed, const std::string& out) {
  const StateSpace space = quantize_gamut(seed);
  write_text_file(out, state_space_to_json(space).dump(2) + "\n");
  const double nn = mean_nearest_neighbor_distance(space);
  const double nn2000 = mean_nearest_neighbor_delta_e_2000(space);
  if (g.json) {
    std::cout << json{{"states", space.states.size()}, {"mean_nn_lab", nn}, {"mean_nn_de2000", nn2000}, {"out", out}}.dump()
              << "\n";
  } else {
    std::cout << "states: " << space.states.size() << "\nmean nearest-neighbor Lab distance: " << fixed(nn, 3)
              << "\nmean nearest-neighbor dE2000: " << fixed(nn2000, 3) << "\nwrote " << out << "\n";
  }
  return 0;
}

struct TrainArgs {
  std::string seed_color;
  std::string oracle = "random";
  std::size_t n = 15;
  std::uint64_t rng = 0;
  std::string out;
  bool noiseless = false;
  std::size_t samples = 100;
};

int cmd_train(const Globals& g, const TrainArgs& a) {
  const LabColor seed = parse_hex_lab(a.seed_color);
  Weights theta{};
  if (a.oracle == "random") {
    Rng theta_rng(derive_seed(a.rng, 2));
    theta = random_unit_weights(theta_rng);
  } else {
    theta = weights_from(read_json_file(a.oracle), a.oracle);
  }
  const Engine e = Engine::create(corpus_of(g), seed, space_of(g));
  if (e.candidates().size() < 2) throw ValidationError("seed color unsupported: fewer than 2 candidates");

  PreferenceParams params;
  params.sample_count = a.samples;
  Rng rng(derive_seed(a.rng, 0));
  PreferenceModel model = PreferenceModel::prior(params, rng);
  SimulatedOracle oracle(theta, e.features, a.noiseless, params.delta, derive_seed(a.rng, 1));
  model = teach_loop(std::move(model), e.features, a.n, [&](const Query& q) { return oracle(q); }, rng);

  json doc = model_to_json(model);
  doc["seed_color"] = to_hex(seed);
  doc["candidate_ids"] = e.ids;
  doc["oracle"] = {{"theta", weights_json(theta)}, {"noiseless", a.noiseless}};
  write_text_file(a.out, doc.dump(2) + "\n");

  const double cos = cosine(model.mean(), theta);
  if (g.json) {
    std::cout << json{{"queries", model.history().size()}, {"cosine", cos}, {"candidates", e.candidates().size()}, {"out", a.out}}.dump()
              << "\n";
  } else {
    std::cout << "candidates: " << e.candidates().size() << "\nqueries answered: " << model.history().size()
              << "\ncosine(mean W, theta*): " << fixed(cos, 4) << "\nwrote " << a.out << "\n";
  }
  return 0;
}

int cmd_rank(const Globals& g, const std::string& model_path, const std::string& seed_flag, std::size_t top) {
  const json doc = read_json_file(model_path);
  std::string hex;
  const LabColor seed = seed_of(seed_flag, doc, hex);
  const PreferenceModel model = model_from_json(doc);
  const Engine e = Engine::create(corpus_of(g), seed, space_of(g));
  const auto ranked = rank_corpus(model, e.features, e.ids);
  const std::size_t k = std::min(top, ranked.size());
  if (g.json) {
    json arr = json::array();
    for (std::size_t i = 0; i < k; ++i) arr.push_back({{"id", e.ids[ranked[i].index]}, {"score", ranked[i].score}});
    std::cout << json{{"ranking", arr}}.dump() << "\n";
  } else {
    for (std::size_t i = 0; i < k; ++i) {
      std::cout << std::setw(3) << i + 1 << "  " << fixed(ranked[i].score) << "  " << e.ids[ranked[i].index] << "\n";
    }
  }
  return 0;
}

struct SearchArgs {
  std::string model;
  std::string seed_color;
  std::size_t episodes = 10000;
  std::uint64_t rng = 0;
  std::string out;
};

int cmd_search(const Globals& g, const SearchArgs& a) {
  const json doc = read_json_file(a.model);
  std::string hex;
  const LabColor seed = seed_of(a.seed_color, doc, hex);
  const Weights theta = theta_of(doc, a.model);
  const Engine e = Engine::create(corpus_of(g), seed, space_of(g));
  QLearningConfig cfg;
  cfg.episodes = a.episodes;
  const SearchResult r = search(e.graph(), e.reward, theta, cfg, e.candidates(), a.rng);

  json report = {{"found", r.best.has_value()}, {"episodes", r.episode_rewards.size()}};
  if (r.best) {
    std::set<std::vector<NodeId>> corpus_paths;
    for (const auto& t : e.candidates()) corpus_paths.insert(t.nodes);
    const CriteriaReport c = check_criteria(r.best->nodes, e.graph(), corpus_paths);
    const InvariantReport inv = check_invariants(r.colormap->colors, seed);
    report["reward"] = r.best_reward;
    report["utility"] = dot(theta, e.reward.featurize(*r.best));
    report["criteria"] = {{"novel", c.novel}, {"passes_seed", c.passes_seed}, {"in_gamut", c.in_gamut}};
    report["invariants_ok"] = inv.ok();
    report["flatness"] = inv.flatness;
    report["path"] = r.best->nodes;
    if (!a.out.empty()) write_colormap(a.out, r.colormap->colors, "novel " + hex);
  }
  if (g.json) {
    std::cout << report.dump() << "\n";
  } else if (!r.best) {
    std::cout << "no qualifying novel trajectory in " << r.episode_rewards.size() << " episodes\n";
  } else {
    const auto& c = report["criteria"];
    std::cout << "reward: " << fixed(r.best_reward) << " (utility " << fixed(report["utility"].get<double>()) << ")\n"
              << "criteria: novel=" << c["novel"] << " passes_seed=" << c["passes_seed"]
              << " in_gamut=" << c["in_gamut"] << "\n"
              << "flatness: " << fixed(report["flatness"].get<double>()) << "\n";
    if (!a.out.empty()) std::cout << "wrote " << a.out << "\n";
  }
  return 0;
}

struct BenchmarkArgs {
  std::string models;
  std::size_t reps = 10;
  std::size_t episodes = 10000;
  std::uint64_t rng = 0;
  std::string out;
  std::string traces;
};

int cmd_benchmark(const Globals& g, const BenchmarkArgs& a) {
  if (!fs::is_directory(a.models)) throw IoError("models directory not found: " + a.models);
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(a.models)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  }
  if (files.empty()) throw ValidationError("no model documents in " + a.models);
  std::sort(files.begin(), files.end());

  const Corpus corpus = corpus_of(g);
  const auto space = space_of(g);
  std::vector<BenchmarkRow> rows;
  for (std::size_t i = 0; i < files.size(); ++i) {
    const json doc = read_json_file(files[i]);
    std::string hex;
    const LabColor seed = seed_of("", doc, hex);
    const Engine e = Engine::create(corpus, seed, space);
    const std::vector<NamedWeights> thetas{{files[i].stem().string(), theta_of(doc, files[i].string())}};
    auto part = benchmark_variants(e.graph(), e.reward, e.candidates(), thetas, a.reps, a.episodes,
                                   derive_seed(a.rng, i));
    std::move(part.begin(), part.end(), std::back_inserter(rows));
  }

  std::ostringstream table;
  table << "variant,theta_id,rep,best_reward\n";
  for (const auto& r : rows) {
    table << r.variant << "," << r.theta_id << "," << r.repetition << ","
          << (std::isnan(r.best_reward) ? std::string("nan") : fixed(r.best_reward, 9)) << "\n";
  }
  write_text_file(a.out, table.str());

  const fs::path trace_dir = a.traces.empty() ? fs::path(fs::path(a.out).replace_extension("").string() + "_traces") : fs::path(a.traces);
  std::error_code ec;
  fs::create_directories(trace_dir, ec);
  if (ec) throw IoError("cannot create " + trace_dir.string());
  for (const auto& r : rows) {
    std::ostringstream trace;
    for (double v : r.trace) trace << (std::isfinite(v) ? fixed(v, 9) : std::string(v > 0 ? "inf" : "-inf")) << "\n";
    write_text_file(trace_dir / (r.variant + "_" + r.theta_id + "_" + std::to_string(r.repetition) + ".txt"),
                    trace.str());
  }

  const auto summary = summarize(rows);
  if (g.json) {
    json arr = json::array();
    for (const auto& s : summary) arr.push_back({{"variant", s.variant}, {"mean_best_reward", s.mean_best_reward}, {"runs", s.runs}});
    std::cout << json{{"summary", arr}, {"table", a.out}, {"traces", trace_dir.string()}}.dump() << "\n";
  } else {
    for (const auto& s : summary) {
      std::cout << std::left << std::setw(12) << s.variant << " mean best reward " << fixed(s.mean_best_reward)
                << " over " << s.runs << " runs\n";
    }
    std::cout << "wrote " << a.out << " and traces in " << trace_dir.string() << "\n";
  }
  return 0;
}

int cmd_profile(const Globals& g, const std::string& path, const std::string& seed_color) {
  const auto colors = read_colormap(path);
  std::optional<LabColor> seed;
  if (!seed_color.empty()) seed = parse_hex_lab(seed_color);
  const InvariantReport inv = check_invariants(colors, seed);
  const UniformityProfile p = profile(colors);
  double gmin = 0.0, gmax = 0.0, gmean = 0.0;
  if (!p.gaps.empty()) {
    gmin = *std::min_element(p.gaps.begin(), p.gaps.end());
    gmax = *std::max_element(p.gaps.begin(), p.gaps.end());
    gmean = p.total_length / static_cast<double>(p.gaps.size());
  }
  if (g.json) {
    json doc = profile_to_json(colors);
    doc["monotone"] = inv.monotone;
    doc["inversion_index"] = inv.inversion_index ? json(*inv.inversion_index) : json(nullptr);
    doc["in_gamut"] = inv.in_gamut;
    doc["truncated"] = inv.truncated;
    doc["seed_present"] = inv.seed_present ? json(*inv.seed_present) : json(nullptr);
    doc["ok"] = inv.ok();
    std::cout << doc.dump() << "\n";
  } else {
    std::cout << "samples: " << colors.size() << "\nflatness: " << fixed(p.flatness) << "\nlength (dE2000): "
              << fixed(p.total_length, 3) << "\ngaps min/mean/max: " << fixed(gmin, 4) << " / " << fixed(gmean, 4)
              << " / " << fixed(gmax, 4) << "\nlightness: ";
    if (inv.monotone) {
      std::cout << "strictly decreasing\n";
    } else {
      std::cout << "not strictly decreasing at index " << *inv.inversion_index << "\n";
    }
    std::cout << "in gamut: " << (inv.in_gamut ? "yes" : "no") << "\nends in L* [10, 12]: "
              << (inv.truncated ? "yes" : "no") << "\n";
    if (inv.seed_present) std::cout << "seed within 1 dE2000: " << (*inv.seed_present ? "yes" : "no") << "\n";
  }
  if (!inv.ok()) {
    std::string why;
    if (!inv.monotone) why += " lightness inversion at index " + std::to_string(*inv.inversion_index) + ";";
    if (!inv.uniform) why += " flatness below " + fixed(kMinFlatness, 2) + ";";
    if (!inv.in_gamut) why += " out of gamut at index " + std::to_string(*inv.out_of_gamut_index) + ";";
    if (!inv.truncated) why += " last L* outside [10, 12];";
    if (inv.seed_present == false) why += " seed color missing;";
    throw InvariantFailure("invariant failed:" + why);
  }
  return 0;
}

int cmd_serve(const Globals& g, const std::string& host, int port, std::uint64_t rng, std::size_t n,
              const std::string& static_dir) {
  ServiceConfig cfg;
  cfg.rng_seed = rng;
  cfg.quantize_seed = g.quantize_seed;
  cfg.default_queries = n;
  cfg.search.time_budget = 30.0;
  cfg.static_dir = static_dir.empty() ? fs::path(HUEPLAN_DATA_DIR).parent_path() / "web" : fs::path(static_dir);
  SessionService service(corpus_of(g), cfg);
  std::cerr << "listening on http://" << host << ":" << port << "\n";
  if (!serve(service, host, port)) throw IoError("cannot listen on " + host + ":" + std::to_string(port));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Seeded sequential colormap design by preference learning and path planning"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--corpus", g.corpus, "Corpus document (default: bundled starter corpus or $HUEPLAN_CORPUS)");
  app.add_option("--quantize-seed", g.quantize_seed, "Seed of the quantized state space");
  app.add_flag("--json", g.json, "Machine-readable output");

  std::uint64_t q_seed = 0;
  std::string q_out;
  auto* quantize = app.add_subcommand("quantize", "Write the 512-state quantized gamut");
  quantize->add_option("--seed-rng", q_seed, "Sampling seed");
  quantize->add_option("--out", q_out, "Output document")->required();

  TrainArgs t;
  auto* train = app.add_subcommand("train", "Train a preference model against a simulated oracle");
  train->add_option("--seed-color", t.seed_color, "Seed color #RRGGBB")->required();
  train->add_option("--oracle", t.oracle, "Hidden weights file, or 'random'");
  train->add_option("--n", t.n, "Number of queries");
  train->add_option("--rng", t.rng, "Random seed");
  train->add_option("--samples", t.samples, "Posterior sample count");
  train->add_option("--out", t.out, "Model document")->required();
  train->add_flag("--noiseless", t.noiseless, "Oracle answers deterministically");

  std::string r_model, r_seed;
  std::size_t r_top = 10;
  auto* rank = app.add_subcommand("rank", "Rank the aligned corpus under a model");
  rank->add_option("--model", r_model, "Model document")->required();
  rank->add_option("--seed-color", r_seed, "Seed color (default: the model's)");
  rank->add_option("--top", r_top, "Rows to print");

  SearchArgs s;
  auto* srch = app.add_subcommand("search", "Search for a novel colormap");
  srch->add_option("--model", s.model, "Model or theta document")->required();
  srch->add_option("--seed-color", s.seed_color, "Seed color (default: the model's)");
  srch->add_option("--episodes", s.episodes, "Episode limit");
  srch->add_option("--rng", s.rng, "Random seed");
  srch->add_option("--out", s.out, "Colormap export (.json, .csv or .txt)");

  BenchmarkArgs b;
  auto* bench = app.add_subcommand("benchmark", "Compare planner variants");
  bench->add_option("--models", b.models, "Directory of model or theta documents")->required();
  bench->add_option("--reps", b.reps, "Repetitions per model");
  bench->add_option("--episodes", b.episodes, "Episodes per search");
  bench->add_option("--rng", b.rng, "Random seed");
  bench->add_option("--out", b.out, "CSV table")->required();
  bench->add_option("--traces", b.traces, "Trace directory (default: <out>_traces)");

  std::string p_cmap, p_seed;
  auto* prof = app.add_subcommand("profile", "Check a colormap's uniformity and invariants");
  prof->add_option("--cmap", p_cmap, "Colormap document (.json or .txt)")->required();
  prof->add_option("--seed-color", p_seed, "Also require this color to be present");

  std::string v_host = "127.0.0.1", v_static;
  int v_port = 8080;
  std::uint64_t v_rng = 0;
  std::size_t v_n = 15;
  auto* srv = app.add_subcommand("serve", "Run the HTTP session service");
  srv->add_option("--host", v_host, "Listen address");
  srv->add_option("--port", v_port, "Listen port");
  srv->add_option("--rng", v_rng, "Process rng seed");
  srv->add_option("--n", v_n, "Default queries per session");
  srv->add_option("--static", v_static, "Static UI directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (*quantize) return cmd_quantize(g, q_seed, q_out);
    if (*train) return cmd_train(g, t);
    if (*rank) return cmd_rank(g, r_model, r_seed, r_top);
    if (*srch) return cmd_search(g, s);
    if (*bench) return cmd_benchmark(g, b);
    if (*prof) return cmd_profile(g, p_cmap, p_seed);
    if (*srv) return cmd_serve(g, v_host, v_port, v_rng, v_n, v_static);
  } catch (const InvariantFailure& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvariant;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: malformed document: " << e.what() << "\n";
    return kExitValidation;
  }
  return 0;
}
