// graphsearch: data-provision pipeline, batch queries, keyword baseline,
// latency bench and the HTTP service.

#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "graphsearch/bench.hpp"
#include "graphsearch/http.hpp"
#include "graphsearch/pipeline.hpp"
#include "graphsearch/query.hpp"
#include "graphsearch/service.hpp"

namespace gs = graphsearch;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kRuntime = 1, kValidation = 2 };

struct Overrides {
  std::string config_file;
  std::string data_dir;
  std::string corpus;
  std::vector<std::string> dictionaries;
  std::string citations;
  std::string journals;
  std::optional<double> similarity;
  std::optional<double> npmi_prune;
  std::optional<std::size_t> top_k;
  std::optional<unsigned> workers;
  std::string format = "json";
};

gs::pipeline::PipelineConfig make_config(const Overrides& o) {
  gs::pipeline::PipelineConfig cfg;
  if (!o.config_file.empty()) cfg = gs::pipeline::PipelineConfig::load(o.config_file);
  if (!o.data_dir.empty()) cfg.data_dir = o.data_dir;
  if (!o.corpus.empty()) cfg.corpus_csv = o.corpus;
  if (!o.dictionaries.empty()) cfg.dictionaries.assign(o.dictionaries.begin(), o.dictionaries.end());
  if (!o.citations.empty()) cfg.citations = fs::path(o.citations);
  if (!o.journals.empty()) cfg.journals = fs::path(o.journals);
  if (o.similarity) cfg.similarity_threshold = *o.similarity;
  if (o.npmi_prune) cfg.npmi_prune = *o.npmi_prune;
  if (o.top_k) cfg.top_k_paths = *o.top_k;
  if (o.workers) cfg.workers = *o.workers;
  cfg.validate();
  return cfg;
}

void print_stage(const gs::pipeline::StageReport& r, const std::string& format) {
  if (format == "table") {
    std::cout << r.stage << '\n';
    for (const auto& [k, v] : r.details.items())
      if (!v.is_structured()) std::cout << "  " << std::left << std::setw(24) << k << v.dump() << '\n';
    return;
  }
  std::cout << json{{"stage", r.stage}, {"report", r.details}}.dump(2) << '\n';
}

std::string fixed(double v, int digits) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

void print_results_table(const std::vector<gs::ScoredPublication>& results) {
  std::cout << std::left << std::setw(5) << "rank" << std::setw(16) << "pub_id" << std::setw(10) << "score"
            << std::setw(10) << "npmi_sum" << std::setw(12) << "date" << "title\n";
  std::size_t rank = 1;
  for (const auto& r : results) {
    std::cout << std::left << std::setw(5) << rank++ << std::setw(16) << r.pub_id << std::setw(10)
              << fixed(gs::score_value(r.score), 3) << std::setw(10) << fixed(r.npmi_sum, 3) << std::setw(12)
              << (r.publish_date ? r.publish_date->iso() : "-") << (r.record ? r.record->title : "") << '\n';
  }
}

void print_expansions_table(const std::vector<gs::Expansion>& expansions) {
  for (const auto& ex : expansions) {
    std::cout << ex.rel.first << " - " << ex.rel.second;
    if (ex.direct) std::cout << "  (direct)";
    if (ex.unreachable) std::cout << "  (unreachable)";
    std::cout << '\n';
    for (std::size_t i = 0; i < ex.candidates.size(); ++i) {
      const auto& c = ex.candidates[i];
      std::cout << "  [" << i << "] len=" << c.length() << " avg_npmi=" << fixed(c.avg_npmi, 4) << "  ";
      for (std::size_t k = 0; k < c.nodes.size(); ++k) std::cout << (k ? " > " : "") << c.nodes[k];
      std::cout << '\n';
    }
  }
}

int run_query(const std::string& data_dir, const std::string& query_file, std::vector<std::string> subset,
              bool expand_only, std::size_t top_k, const std::string& format) {
  auto artifacts = gs::pipeline::load_artifacts(data_dir);
  gs::PathSearchOptions opt;
  opt.top_k = top_k;
  gs::QueryEngine engine(artifacts.network, artifacts.index.inverted, artifacts.pubs, opt);
  auto file = gs::query_from_json(json::parse(gs::io::read_file(query_file)));
  if (subset.empty()) subset = file.subset;

  if (expand_only) {
    auto q = subset.empty() ? file.query : gs::induced_subquery(file.query, subset);
    auto expansions = engine.expand(q);
    if (format == "table")
      print_expansions_table(expansions);
    else
      std::cout << json{{"expansions", gs::expansions_to_json(expansions)}}.dump(2) << '\n';
    return kOk;
  }
  auto run = subset.empty() ? engine.run(file.query, file.selections)
                            : engine.run_subgraph(file.query, subset, file.selections);
  if (format == "table") {
    print_results_table(run.results);
  } else {
    std::cout << json{{"expansions", gs::expansions_to_json(run.expansions)},
                      {"results", gs::results_to_json(run.results)}}
                     .dump(2)
              << '\n';
  }
  return kOk;
}

std::vector<std::size_t> parse_sizes(const std::string& s) {
  std::vector<std::size_t> out;
  for (auto& part : gs::text::split(s, ',')) {
    auto t = gs::text::trim(part);
    if (!t.empty()) out.push_back(std::stoul(std::string(t)));
  }
  if (out.empty()) throw gs::Error("bench: --sizes is empty");
  return out;
}

std::function<void()> g_stop;
extern "C" void on_signal(int) {
  if (g_stop) g_stop();
}

std::string env_or(const char* name, std::string fallback) {
  const char* v = std::getenv(name);
  return v && *v ? std::string(v) : fallback;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Concept-graph literature search: pipeline, queries and service"};
  app.require_subcommand(0, 1);
  app.fallthrough();

  Overrides o;
  bool all = false;
  app.add_option("--config", o.config_file, "Pipeline configuration (JSON)")->check(CLI::ExistingFile);
  app.add_option("--data-dir", o.data_dir, "Artifact directory");
  app.add_option("--corpus", o.corpus, "Metadata CSV");
  app.add_option("--dictionary", o.dictionaries, "Ontology dictionary TSV (repeatable)");
  app.add_option("--citations", o.citations, "Citation snapshot CSV (doi,count)");
  app.add_option("--journals", o.journals, "Journal abbreviation table TSV");
  app.add_option("--similarity", o.similarity, "Entity similarity threshold");
  app.add_option("--npmi-prune", o.npmi_prune, "Edges with npmi <= this value are pruned");
  app.add_option("--top-k", o.top_k, "Candidate paths kept per relationship");
  app.add_option("--workers", o.workers, "Link-mining worker threads");
  app.add_option("--format", o.format, "Output format")->check(CLI::IsMember({"json", "table"}));
  app.add_flag("--all", all, "Run ingest, annotate, build-network and index");

  auto* ingest = app.add_subcommand("ingest", "Parse, clean, dedupe and augment the metadata CSV");
  auto* annotate = app.add_subcommand("annotate", "Mine and curate concept mentions");
  auto* build = app.add_subcommand("build-network", "Mine links and consolidate the co-occurrence network");
  auto* index = app.add_subcommand("index", "Build the relationship and keyword indexes");

  auto* query = app.add_subcommand("query", "Run a graph query with default or given selections");
  std::string query_file;
  std::vector<std::string> subset;
  bool expand_only = false;
  query->add_option("--query", query_file, "Query file (JSON)")->required()->check(CLI::ExistingFile);
  query->add_option("--subset", subset, "Restrict to the induced sub-query on these nodes");
  query->add_flag("--expand-only", expand_only, "Print candidate paths without retrieving");

  auto* bench = app.add_subcommand("bench", "Time matching and retrieval on sampled queries");
  std::string sizes = "2,4,6,8,10", csv_out;
  std::size_t reps = 10;
  std::uint64_t seed = 7;
  gs::bench::SyntheticSpec synth;
  bool synthetic = false;
  bench->add_option("--sizes", sizes, "Comma-separated query node counts");
  bench->add_option("--reps", reps, "Queries per size");
  bench->add_option("--seed", seed, "Sampling seed");
  bench->add_option("--csv", csv_out, "Write per-query timings as CSV");
  bench->add_flag("--synthetic", synthetic, "Benchmark a synthetic network instead of the data directory");
  bench->add_option("--synthetic-entities", synth.entities);
  bench->add_option("--synthetic-edges", synth.edges);
  bench->add_option("--synthetic-pubs", synth.publications);
  bench->add_option("--synthetic-seed", synth.seed);

  auto* keyword = app.add_subcommand("keyword", "Full-text keyword baseline over titles and abstracts");
  std::vector<std::string> terms;
  std::string mode = "and";
  keyword->add_option("--terms", terms, "Search terms")->required();
  keyword->add_option("--mode", mode, "and | or")->check(CLI::IsMember({"and", "or"}));

  auto* serve = app.add_subcommand("serve", "Serve the retrieval protocol over HTTP");
  int port = std::stoi(env_or("GRAPHSEARCH_PORT", "8080"));
  std::string host = env_or("GRAPHSEARCH_HOST", "127.0.0.1");
  std::int64_t ttl = std::stoll(env_or("GRAPHSEARCH_SESSION_TTL", "86400"));
  std::string snapshot;
  serve->add_option("--port", port, "Listen port (GRAPHSEARCH_PORT)");
  serve->add_option("--host", host, "Listen address (GRAPHSEARCH_HOST)");
  serve->add_option("--session-ttl", ttl, "Session lifetime in seconds (GRAPHSEARCH_SESSION_TTL)");
  serve->add_option("--snapshot", snapshot, "Restore sessions from and save them to this file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  if (o.data_dir.empty()) o.data_dir = env_or("GRAPHSEARCH_DATA_DIR", "");

  try {
    auto needs_config = all || *ingest || *annotate || *build || *index;
    if (needs_config) {
      auto cfg = make_config(o);
      fs::create_directories(cfg.data_dir);
      if (all) {
        for (const auto& r : gs::pipeline::run_all(cfg)) print_stage(r, o.format);
        return kOk;
      }
      auto hash = cfg.hash();
      if (*ingest) print_stage(gs::pipeline::run_ingest(cfg, hash), o.format);
      if (*annotate) print_stage(gs::pipeline::run_annotate(cfg, hash), o.format);
      if (*build) print_stage(gs::pipeline::run_build_network(cfg, hash), o.format);
      if (*index) print_stage(gs::pipeline::run_index(cfg, hash), o.format);
      return kOk;
    }

    auto cfg = make_config(o);
    if (*query) return run_query(cfg.data_dir.string(), query_file, subset, expand_only, cfg.top_k_paths, o.format);

    if (*keyword) {
      auto artifacts = gs::pipeline::load_artifacts(cfg.data_dir);
      std::string joined;
      for (const auto& t : terms) joined += t + " ";
      auto res = gs::keyword_query(artifacts.index.keyword, joined,
                                   mode == "and" ? gs::KeywordMode::conjunctive : gs::KeywordMode::disjunctive,
                                   cfg.tokenizer);
      if (o.format == "table") {
        for (const auto& h : res.hits) std::cout << h.pub_id << '\t' << h.matched_terms << '\n';
        std::cout << res.hits.size() << " publications\n";
      } else {
        json hits = json::array();
        for (const auto& h : res.hits) hits.push_back({{"pub_id", h.pub_id}, {"matched_terms", h.matched_terms}});
        std::cout << json{{"mode", mode}, {"count", res.hits.size()}, {"ignored_terms", res.ignored_terms},
                          {"ranking", res.ranking}, {"hits", hits}}
                         .dump(2)
                  << '\n';
      }
      return kOk;
    }

    if (*bench) {
      gs::bench::BenchOptions bo;
      bo.sizes = parse_sizes(sizes);
      bo.repetitions = reps;
      bo.seed = seed;
      gs::PathSearchOptions opt;
      opt.top_k = cfg.top_k_paths;
      gs::bench::BenchReport report;
      json source;
      if (synthetic) {
        auto data = gs::bench::make_synthetic(synth);
        gs::QueryEngine engine(data.network, data.index, data.pubs, opt);
        report = gs::bench::run_bench(engine, bo);
        source = {{"synthetic", {{"entities", synth.entities}, {"edges", synth.edges},
                                 {"publications", synth.publications}, {"seed", synth.seed}}}};
      } else {
        auto artifacts = gs::pipeline::load_artifacts(cfg.data_dir);
        gs::QueryEngine engine(artifacts.network, artifacts.index.inverted, artifacts.pubs, opt);
        report = gs::bench::run_bench(engine, bo);
        source = {{"data_dir", cfg.data_dir.string()}};
      }
      auto out = report.to_json();
      out["source"] = source;
      std::cout << out.dump(2) << '\n';
      if (!csv_out.empty()) gs::io::write_file_atomic(csv_out, report.to_csv());
      return kOk;
    }

    if (*serve) {
      auto artifacts = gs::pipeline::load_artifacts(cfg.data_dir);
      gs::PathSearchOptions opt;
      opt.top_k = cfg.top_k_paths;
      gs::QueryEngine engine(artifacts.network, artifacts.index.inverted, artifacts.pubs, opt);
      gs::service::ServiceConfig sc;
      sc.session_ttl = std::chrono::seconds(ttl);
      gs::service::Service service(engine, sc);
      if (!snapshot.empty() && fs::exists(snapshot)) service.restore(json::parse(gs::io::read_file(snapshot)));
      auto server = gs::service::make_http_server(service);
      g_stop = [&] { server->stop(); };
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::cerr << "listening on " << host << ':' << port << '\n';
      if (!server->listen(host, port)) throw gs::Error("cannot listen on " + host + ":" + std::to_string(port));
      if (!snapshot.empty()) gs::io::write_file_atomic(snapshot, service.snapshot().dump() + "\n");
      return kOk;
    }

    std::cerr << app.help();
    return kValidation;
  } catch (const gs::QueryValidationError& e) {
    std::cerr << "validation failed: " << e.what() << '\n';
    if (o.format == "json") std::cerr << e.report().to_json().dump(2) << '\n';
    return kValidation;
  } catch (const gs::SelectionError& e) {
    std::cerr << "invalid selection: " << e.what() << '\n';
    return kValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntime;
  }
}
