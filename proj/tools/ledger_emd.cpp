// ledger-emd: command line front end over the ledger_emd library.
//
//   ledger-emd synth     --seed N [--companies 1000 --industries 12] --out-dir data/
//   ledger-emd distances --chart c.json --balances tb.csv --metric emd -o dist.csv
//   ledger-emd explain   --chart c.json --balances tb.csv --pair A,B -o flows.json
//   ledger-emd evaluate  --chart c.json --balances tb.csv --nace nace.csv --seed N -o results.csv
//   ledger-emd embed     --distances dist.csv --seed N -o emb.csv [--svg map.svg ...]
//   ledger-emd outliers  --distances dist.csv [--filter-nace CODE --nace nace.csv] -o lof.csv
//
// Every output file F gets a sibling F.manifest.json with the subcommand, the
// resolved flags, SHA-256 digests of the inputs and the tool version.
// Exit codes: 0 success, 1 invalid input or usage, 2 internal failure.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>
#include <openssl/evp.h>

#include "ledger_emd/ledger_emd.hpp"

#ifndef LEDGER_EMD_VERSION
#define LEDGER_EMD_VERSION "dev"
#endif

namespace fs = std::filesystem;
using namespace ledger_emd;

namespace {

constexpr const char* kProgram = "ledger-emd";

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot open '" + path + "' for reading");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) throw Error(Errc::io, "error while reading '" + path + "'");
  return buffer.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::io, "cannot open '" + path + "' for writing");
  out << content;
  out.close();
  if (!out) throw Error(Errc::io, "error while writing '" + path + "'");
}

std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    throw Error(Errc::io, "SHA-256 digest failed");
  }
  std::ostringstream hex;
  for (unsigned int i = 0; i < length; ++i) {
    hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  }
  return hex.str();
}

/// Collects what goes into a run manifest. File paths are recorded by base
/// name only so reruns from another directory produce the same bytes.
class Manifest {
 public:
  explicit Manifest(std::string subcommand) : subcommand_(std::move(subcommand)) {}

  void flag(const std::string& name, nlohmann::json value) { flags_[name] = std::move(value); }
  void path_flag(const std::string& name, const std::string& path) {
    if (!path.empty()) flags_[name] = fs::path(path).filename().string();
  }

  /// Reads an input file, records its digest and returns its contents.
  std::string input(const std::string& flag_name, const std::string& path) {
    std::string content = read_file(path);
    inputs_[flag_name] = {{"file", fs::path(path).filename().string()}, {"sha256", sha256_hex(content)}};
    path_flag(flag_name, path);
    return content;
  }

  void write_for(const std::string& output_path) const {
    nlohmann::ordered_json doc;
    doc["subcommand"] = subcommand_;
    doc["flags"] = flags_;
    doc["inputs"] = inputs_;
    doc["tool_version"] = LEDGER_EMD_VERSION;
    write_file(output_path + ".manifest.json", doc.dump(2) + "\n");
  }

 private:
  std::string subcommand_;
  nlohmann::json flags_ = nlohmann::json::object();
  nlohmann::json inputs_ = nlohmann::json::object();
};

unsigned resolve_cli_threads(int flag_value) {
  if (flag_value > 0) return static_cast<unsigned>(flag_value);
  if (const char* env = std::getenv("LEDGER_EMD_THREADS")) {
    const auto parsed = text::parse_double(env);
    if (!parsed || *parsed < 0 || *parsed != static_cast<unsigned>(*parsed)) {
      throw Error(Errc::invalid_argument, std::string("LEDGER_EMD_THREADS='") + env + "' is not a thread count");
    }
    return static_cast<unsigned>(*parsed);
  }
  return 0;
}

SignConvention parse_convention(const std::string& name) {
  if (name == "std") return SignConvention::StandardBelgian;
  if (name == "flipped") return SignConvention::Flipped;
  throw Error(Errc::invalid_argument, "sign convention must be 'std' or 'flipped', got '" + name + "'");
}

struct LedgerInputs {
  std::string chart_path;
  std::string balances_path;
  std::string convention = "std";
  int threads = 0;
};

void add_ledger_options(CLI::App* cmd, LedgerInputs& in) {
  cmd->add_option("--chart", in.chart_path, "Chart of accounts JSON")->required();
  cmd->add_option("--balances", in.balances_path, "Trial balance CSV")->required();
  cmd->add_option("--sign-convention", in.convention, "Sign convention: std or flipped")
      ->check(CLI::IsMember({"std", "flipped"}));
  cmd->add_option("--threads", in.threads, "Worker threads (default: LEDGER_EMD_THREADS or all cores)");
}

struct LoadedLedger {
  ChartOfAccounts chart;
  std::vector<WeightedSubtrees> companies;
};

LoadedLedger load_ledger(const LedgerInputs& in, Manifest& manifest) {
  std::istringstream chart_stream(manifest.input("chart", in.chart_path));
  LoadedLedger out;
  try {
    out.chart = parse_chart_of_accounts(chart_stream);
  } catch (const Error& e) {
    throw Error(e.code(), in.chart_path + ": " + e.what());
  }
  std::istringstream tb_stream(manifest.input("balances", in.balances_path));
  const auto balances = parse_trial_balance(tb_stream, out.chart, in.balances_path);
  out.companies = build_all_weighted_subtrees(balances, out.chart, parse_convention(in.convention));
  manifest.flag("sign-convention", in.convention);
  return out;
}

std::vector<CompanyMeta> load_nace(const std::string& path, Manifest& manifest) {
  std::istringstream stream(manifest.input("nace", path));
  return parse_nace_metadata(stream, path);
}

DistanceMatrix load_distances(const std::string& path, Manifest& manifest) {
  std::istringstream stream(manifest.input("distances", path));
  return read_distance_matrix(stream, path);
}

template <typename Writer>
void emit(const std::string& path, const Manifest& manifest, Writer&& writer) {
  std::ostringstream out;
  writer(out);
  write_file(path, out.str());
  manifest.write_for(path);
}

// distances -----------------------------------------------------------------

struct DistancesArgs {
  LedgerInputs ledger;
  std::string metric;
  std::optional<std::uint64_t> seed;
  std::string output;
};

void run_distances(const DistancesArgs& a) {
  Manifest manifest("distances");
  const auto loaded = load_ledger(a.ledger, manifest);
  manifest.flag("metric", a.metric);
  DistanceMatrix d;
  if (a.metric == "random") {
    if (!a.seed) throw Error(Errc::invalid_argument, "--metric random requires --seed");
    manifest.flag("seed", *a.seed);
    d = random_distance_matrix(detail::unique_ids(loaded.companies), *a.seed);
  } else {
    const auto metric = parse_metric(a.metric);
    if (!metric) throw Error(Errc::invalid_argument, "unknown metric '" + a.metric + "'");
    d = distance_matrix(loaded.companies, loaded.chart, *metric, resolve_cli_threads(a.ledger.threads));
  }
  manifest.path_flag("output", a.output);
  emit(a.output, manifest, [&](std::ostream& out) { write_distance_matrix(out, d); });
}

// explain -------------------------------------------------------------------

struct ExplainArgs {
  LedgerInputs ledger;
  std::string pair;
  std::string output;
};

void run_explain(const ExplainArgs& a) {
  Manifest manifest("explain");
  const auto loaded = load_ledger(a.ledger, manifest);
  const auto comma = a.pair.find(',');
  if (comma == std::string::npos || comma == 0 || comma + 1 == a.pair.size()) {
    throw Error(Errc::invalid_argument, "--pair expects 'company1,company2', got '" + a.pair + "'");
  }
  const std::string first = a.pair.substr(0, comma);
  const std::string second = a.pair.substr(comma + 1);
  const auto find = [&](const std::string& id) -> const WeightedSubtrees& {
    for (const auto& c : loaded.companies) {
      if (c.company_id == id) return c;
    }
    throw Error(Errc::unknown_company, "company '" + id + "' is not in " + a.ledger.balances_path);
  };
  const auto& ca = find(first);
  const auto& cb = find(second);
  const auto reports = explain_distance(ca, cb, loaded.chart);

  nlohmann::ordered_json doc;
  doc["pair"] = {first, second};
  double total = 0.0;
  nlohmann::json subtrees = nlohmann::json::array();
  for (SubtreeKind kind : kAllSubtreeKinds) {
    total += reports[kind_index(kind)].total_cost;
    subtrees.push_back(flow_report_to_json(reports[kind_index(kind)], kind, loaded.chart));
  }
  doc["distance"] = total;
  doc["subtrees"] = std::move(subtrees);

  manifest.flag("pair", a.pair);
  manifest.path_flag("output", a.output);
  emit(a.output, manifest, [&](std::ostream& out) { out << doc.dump(2) << '\n'; });
}

// evaluate ------------------------------------------------------------------

struct EvaluateArgs {
  LedgerInputs ledger;
  std::string nace_path;
  std::size_t q = 20;
  double r = 0.2;
  std::size_t k_max = 20;
  std::uint64_t seed = 0;
  std::string output;
};

void run_evaluate(const EvaluateArgs& a) {
  Manifest manifest("evaluate");
  const auto loaded = load_ledger(a.ledger, manifest);
  const auto meta = load_nace(a.nace_path, manifest);
  Experiment1Params params;
  params.eligibility = {a.q, a.r};
  params.k_max = a.k_max;
  params.seed = a.seed;
  params.threads = resolve_cli_threads(a.ledger.threads);
  const auto result = experiment1(loaded.companies, meta, loaded.chart, params);

  manifest.flag("q", a.q);
  manifest.flag("r", a.r);
  manifest.flag("k-max", a.k_max);
  manifest.flag("seed", a.seed);
  manifest.flag("eligible", result.eligible.size());
  manifest.path_flag("output", a.output);
  emit(a.output, manifest, [&](std::ostream& out) { write_experiment1(out, result); });
}

// embed ---------------------------------------------------------------------

struct EmbedArgs {
  std::string distances_path;
  double perplexity = 20.0;
  int iterations = 1000;
  double learning_rate = 200.0;
  std::uint64_t seed = 0;
  int threads = 0;
  std::string output;
  std::string svg_path;
  std::vector<std::string> highlight_nace;
  std::string nace_path;
  std::string circle_outliers;
};

void run_embed(const EmbedArgs& a) {
  Manifest manifest("embed");
  const auto d = load_distances(a.distances_path, manifest);
  TsneParams params;
  params.perplexity = a.perplexity;
  params.iterations = a.iterations;
  params.learning_rate = a.learning_rate;
  params.seed = a.seed;
  params.threads = resolve_cli_threads(a.threads);

  SvgOptions svg;
  if (!a.highlight_nace.empty()) {
    if (a.svg_path.empty()) throw Error(Errc::invalid_argument, "--highlight-nace only applies together with --svg");
    if (a.nace_path.empty()) throw Error(Errc::invalid_argument, "--highlight-nace requires --nace");
    for (const auto& entry : load_nace(a.nace_path, manifest)) {
      for (const auto& code : a.highlight_nace) {
        if (entry.nace_codes.count(code)) svg.highlighted.insert(entry.company_id);
      }
    }
  }
  if (!a.circle_outliers.empty()) {
    if (a.svg_path.empty()) throw Error(Errc::invalid_argument, "--circle-outliers only applies together with --svg");
    std::istringstream stream(manifest.input("circle-outliers", a.circle_outliers));
    for (auto& id : read_lof_outliers(stream, a.circle_outliers)) svg.circled.insert(std::move(id));
  }

  const auto emb = tsne_embed(d, params);

  manifest.flag("perplexity", a.perplexity);
  manifest.flag("iterations", a.iterations);
  manifest.flag("learning-rate", a.learning_rate);
  manifest.flag("seed", a.seed);
  if (!a.highlight_nace.empty()) manifest.flag("highlight-nace", a.highlight_nace);
  manifest.path_flag("output", a.output);
  manifest.path_flag("svg", a.svg_path);
  emit(a.output, manifest, [&](std::ostream& out) { write_embedding(out, emb); });
  if (!a.svg_path.empty()) {
    emit(a.svg_path, manifest, [&](std::ostream& out) { write_svg_scatter(out, emb, svg); });
  }
}

// outliers ------------------------------------------------------------------

struct OutliersArgs {
  std::string distances_path;
  std::size_t k = 5;
  double threshold = 1.5;
  std::string filter_nace;
  std::string nace_path;
  std::string output;
};

void run_outliers(const OutliersArgs& a) {
  Manifest manifest("outliers");
  auto d = load_distances(a.distances_path, manifest);
  if (!a.filter_nace.empty()) {
    if (a.nace_path.empty()) throw Error(Errc::invalid_argument, "--filter-nace requires --nace");
    const auto meta = load_nace(a.nace_path, manifest);
    std::set<std::string> members;
    for (const auto& entry : meta) {
      if (entry.nace_codes.count(a.filter_nace)) members.insert(entry.company_id);
    }
    std::vector<std::string> ids;
    for (const auto& id : d.company_ids()) {
      if (members.count(id)) ids.push_back(id);
    }
    if (ids.size() <= a.k) {
      throw Error(Errc::too_small, std::to_string(ids.size()) + " companies carry NACE code " + a.filter_nace +
                                       "; LOF with k=" + std::to_string(a.k) + " needs at least " +
                                       std::to_string(a.k + 1));
    }
    d = d.subset(ids);
    manifest.flag("filter-nace", a.filter_nace);
  }
  const auto scores = lof_scores(d, {a.k, a.threshold});

  manifest.flag("k", a.k);
  manifest.flag("threshold", a.threshold);
  manifest.path_flag("output", a.output);
  emit(a.output, manifest, [&](std::ostream& out) { write_lof_scores(out, scores); });
}

// synth ---------------------------------------------------------------------

struct SynthArgs {
  SynthConfig config;
  std::size_t chart_depth = 3;
  std::size_t chart_branching = 4;
  std::string out_dir;
};

void run_synth(const SynthArgs& a) {
  std::error_code ec;
  fs::create_directories(a.out_dir, ec);
  if (ec || !fs::is_directory(a.out_dir)) {
    throw Error(Errc::io, "cannot create output directory '" + a.out_dir + "'");
  }
  const auto chart = generate_chart(a.config.seed, a.chart_depth, a.chart_branching);
  const auto population = generate_population(chart, a.config);

  Manifest manifest("synth");
  manifest.flag("seed", a.config.seed);
  manifest.flag("companies", a.config.n_companies);
  manifest.flag("industries", a.config.n_industries);
  manifest.flag("noise", a.config.noise);
  manifest.flag("min-codes", a.config.min_codes);
  manifest.flag("max-codes", a.config.max_codes);
  manifest.flag("chart-depth", a.chart_depth);
  manifest.flag("chart-branching", a.chart_branching);

  const fs::path dir(a.out_dir);
  emit((dir / "chart.json").string(), manifest,
       [&](std::ostream& out) { out << chart_to_json(chart).dump(2) << '\n'; });
  emit((dir / "balances.csv").string(), manifest,
       [&](std::ostream& out) { write_trial_balances(out, population.balances); });
  emit((dir / "nace.csv").string(), manifest,
       [&](std::ostream& out) { write_nace_metadata(out, population.meta); });
}

int fail(std::string_view tag, const std::string& message, int code) {
  std::string flat = message;
  for (char& c : flat) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  std::cerr << kProgram << ": error[" << tag << "]: " << flat << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  // "-o-dir" is accepted as a spelling of --out-dir.
  std::vector<std::string> args(argv, argv + argc);
  for (auto& arg : args) {
    if (arg == "-o-dir") arg = "--out-dir";
  }
  std::vector<char*> argv_fixed;
  for (auto& arg : args) argv_fixed.push_back(arg.data());

  CLI::App app{"Earth mover's distance between hierarchical financial statements"};
  app.set_version_flag("--version", LEDGER_EMD_VERSION);
  app.require_subcommand(1);

  DistancesArgs distances;
  auto* cmd_distances = app.add_subcommand("distances", "Pairwise company distance matrix");
  add_ledger_options(cmd_distances, distances.ledger);
  cmd_distances->add_option("--metric", distances.metric, "emd, ygdm, sbsd or random")
      ->required()
      ->check(CLI::IsMember({"emd", "ygdm", "sbsd", "random"}));
  cmd_distances->add_option("--seed", distances.seed, "Seed for --metric random");
  cmd_distances->add_option("-o,--output", distances.output, "Distance matrix CSV")->required();

  ExplainArgs explain;
  auto* cmd_explain = app.add_subcommand("explain", "Optimal flows behind one company distance");
  add_ledger_options(cmd_explain, explain.ledger);
  cmd_explain->add_option("--pair", explain.pair, "Two company ids, comma separated")->required();
  cmd_explain->add_option("-o,--output", explain.output, "Flow report JSON")->required();

  EvaluateArgs evaluate;
  auto* cmd_evaluate = app.add_subcommand("evaluate", "Nearest-neighbour NACE Jaccard evaluation");
  add_ledger_options(cmd_evaluate, evaluate.ledger);
  cmd_evaluate->add_option("--nace", evaluate.nace_path, "NACE metadata CSV")->required();
  cmd_evaluate->add_option("--q", evaluate.q, "Minimum number of companies sharing a code")->capture_default_str();
  cmd_evaluate->add_option("--r", evaluate.r, "Minimum Jaccard to every sharer")->capture_default_str();
  cmd_evaluate->add_option("--k-max", evaluate.k_max, "Largest neighbourhood size")->capture_default_str();
  cmd_evaluate->add_option("--seed", evaluate.seed, "Seed for the random method")->required();
  cmd_evaluate->add_option("-o,--output", evaluate.output, "Results CSV")->required();

  EmbedArgs embed;
  auto* cmd_embed = app.add_subcommand("embed", "2D t-SNE map from a distance matrix");
  cmd_embed->add_option("--distances", embed.distances_path, "Distance matrix CSV")->required();
  cmd_embed->add_option("--perplexity", embed.perplexity)->capture_default_str();
  cmd_embed->add_option("--iterations", embed.iterations)->capture_default_str();
  cmd_embed->add_option("--learning-rate", embed.learning_rate)->capture_default_str();
  cmd_embed->add_option("--seed", embed.seed, "Initialization seed")->required();
  cmd_embed->add_option("--threads", embed.threads, "Worker threads");
  cmd_embed->add_option("-o,--output", embed.output, "Embedding CSV")->required();
  cmd_embed->add_option("--svg", embed.svg_path, "Also write an SVG scatter plot");
  cmd_embed->add_option("--highlight-nace", embed.highlight_nace, "Draw companies with this NACE code as diamonds");
  cmd_embed->add_option("--nace", embed.nace_path, "NACE metadata CSV for --highlight-nace");
  cmd_embed->add_option("--circle-outliers", embed.circle_outliers, "LOF CSV whose outliers get a ring");

  OutliersArgs outliers;
  auto* cmd_outliers = app.add_subcommand("outliers", "Local outlier factor scores");
  cmd_outliers->add_option("--distances", outliers.distances_path, "Distance matrix CSV")->required();
  cmd_outliers->add_option("--k", outliers.k, "Neighbourhood size")->capture_default_str();
  cmd_outliers->add_option("--threshold", outliers.threshold, "Flag scores above this")->capture_default_str();
  cmd_outliers->add_option("--filter-nace", outliers.filter_nace, "Score only companies with this NACE code");
  cmd_outliers->add_option("--nace", outliers.nace_path, "NACE metadata CSV for --filter-nace");
  cmd_outliers->add_option("-o,--output", outliers.output, "LOF CSV")->required();

  SynthArgs synth;
  auto* cmd_synth = app.add_subcommand("synth", "Seeded synthetic chart, balances and NACE metadata");
  cmd_synth->add_option("--seed", synth.config.seed)->required();
  cmd_synth->add_option("--companies", synth.config.n_companies)->capture_default_str();
  cmd_synth->add_option("--industries", synth.config.n_industries)->capture_default_str();
  cmd_synth->add_option("--noise", synth.config.noise, "Within-industry concentration")->capture_default_str();
  cmd_synth->add_option("--min-codes", synth.config.min_codes)->capture_default_str();
  cmd_synth->add_option("--max-codes", synth.config.max_codes)->capture_default_str();
  cmd_synth->add_option("--chart-depth", synth.chart_depth)->capture_default_str();
  cmd_synth->add_option("--chart-branching", synth.chart_branching)->capture_default_str();
  cmd_synth->add_option("--out-dir", synth.out_dir, "Output directory")->required();

  try {
    app.parse(static_cast<int>(argv_fixed.size()), argv_fixed.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("E_USAGE", e.what(), 1);
  }

  try {
    if (*cmd_distances) run_distances(distances);
    if (*cmd_explain) run_explain(explain);
    if (*cmd_evaluate) run_evaluate(evaluate);
    if (*cmd_embed) run_embed(embed);
    if (*cmd_outliers) run_outliers(outliers);
    if (*cmd_synth) run_synth(synth);
  } catch (const Error& e) {
    return fail(e.tag(), e.what(), is_internal(e.code()) ? 2 : 1);
  } catch (const std::exception& e) {
    return fail("E_INTERNAL", e.what(), 2);
  }
  return 0;
}
