// Command-line front end: ingest, summarize, synth, index, bench, genqueries, serve.

#include <csignal>
#include <cstdio>
#include <iostream>
#include <map>
#include <memory>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "semask/eval.hpp"
#include "semask/geocoder.hpp"
#include "semask/ingestion.hpp"
#include "semask/mock_providers.hpp"
#include "semask/resources.hpp"
#include "semask/retrieval.hpp"
#include "semask/service.hpp"
#include "semask/synthetic.hpp"

using namespace semask;

namespace {

struct ProviderOpts {
  std::string mode = "mock";
  std::size_t dim = 1536;
};

void add_provider_opts(CLI::App* cmd, ProviderOpts& o) {
  cmd->add_option("--providers", o.mode, "mock or remote (remote falls back to mock without a key)")
      ->check(CLI::IsMember({"mock", "remote"}));
  cmd->add_option("--dim", o.dim, "embedding dimension for a freshly built index");
}

ProviderBundle providers_for(const ProviderOpts& o, std::size_t dim) {
  return make_provider_bundle(o.mode, ProviderConfig::from_env(), dim);
}

GeoRect parse_bbox(const std::string& s) {
  double v[4];
  if (std::sscanf(s.c_str(), "%lf,%lf,%lf,%lf", &v[0], &v[1], &v[2], &v[3]) != 4) {
    throw CLI::ValidationError("--bbox", "expected min_lat,max_lat,min_lon,max_lon");
  }
  return GeoRect(v[0], v[1], v[2], v[3]);
}

/// Corpus + vector index, from a snapshot when given, else embedded now.
std::shared_ptr<SearchIndex> load_index(const std::string& corpus_path, const std::string& index_path,
                                        Embedder& embedder) {
  auto objects = read_corpus_jsonl(corpus_path);
  if (!index_path.empty()) {
    return std::make_shared<SearchIndex>(SearchIndex::attach(std::move(objects), HnswIndex::load(index_path)));
  }
  spdlog::info("embedding {} objects", objects.size());
  return std::make_shared<SearchIndex>(SearchIndex::build(std::move(objects), embedder));
}

std::size_t snapshot_dim(const std::string& index_path, std::size_t fallback) {
  return index_path.empty() ? fallback : HnswIndex::load(index_path).dim();
}

std::atomic<HttpService*> g_service{nullptr};

}  // namespace

int main(int argc, char** argv) {
  spdlog::set_default_logger(spdlog::stderr_color_mt("semask"));
  CLI::App app{"Semantics-aware spatial keyword search"};
  app.require_subcommand(1);
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "debug logging");

  // ingest
  auto* ingest = app.add_subcommand("ingest", "parse business JSONL into a corpus");
  std::string in_path, out_path, report_path, geocoder_table, nominatim_url;
  bool do_summarize = false;
  std::size_t parallelism = 4;
  ProviderOpts prov;
  ingest->add_option("--input", in_path, "business records, one JSON object per line")->required();
  ingest->add_option("--out", out_path, "corpus JSONL")->required();
  ingest->add_option("--report", report_path, "ingest report JSON");
  ingest->add_option("--geocoder-table", geocoder_table, "offline reverse-geocoding table");
  ingest->add_option("--nominatim", nominatim_url, "reverse geocoding service base URL");
  ingest->add_flag("--summarize", do_summarize, "summarise tips while ingesting");
  ingest->add_option("--parallelism", parallelism, "concurrent summarisation calls");
  add_provider_opts(ingest, prov);

  // summarize
  auto* summarize = app.add_subcommand("summarize", "summarise tips of an existing corpus");
  std::string corpus_path;
  bool resummarize = false;
  summarize->add_option("--corpus", corpus_path)->required();
  summarize->add_option("--out", out_path)->required();
  summarize->add_option("--parallelism", parallelism);
  summarize->add_flag("--all", resummarize, "replace existing summaries");
  add_provider_opts(summarize, prov);

  // synth
  auto* synth = app.add_subcommand("synth", "generate a synthetic corpus");
  std::uint64_t seed = 1;
  std::size_t n = 500;
  std::string bbox_s = "36.10,36.28,-86.88,-86.66";
  std::string city = "Synthville";
  synth->add_option("--seed", seed);
  synth->add_option("--n", n);
  synth->add_option("--bbox", bbox_s, "min_lat,max_lat,min_lon,max_lon");
  synth->add_option("--city", city);
  synth->add_option("--out", out_path)->required();

  // index
  auto* index = app.add_subcommand("index", "embed a corpus and build the vector index snapshot");
  HnswParams hp;
  index->add_option("--corpus", corpus_path)->required();
  index->add_option("--out", out_path)->required();
  index->add_option("--M", hp.M);
  index->add_option("--ef-construction", hp.ef_construction);
  index->add_option("--ef-search", hp.ef_search);
  index->add_option("--seed", hp.rng_seed);
  add_provider_opts(index, prov);

  // bench
  auto* bench = app.add_subcommand("bench", "F1@k over a labelled query set");
  std::string method_s = "semask", queryset_path, index_path;
  std::vector<std::string> corpus_args;
  std::size_t k = 10;
  bench->add_option("--method", method_s)->check(CLI::IsMember({"tfidf", "lda", "embedding", "semask"}));
  bench->add_option("--queryset", queryset_path)->required();
  bench->add_option("--corpus", corpus_args, "PATH for every city, or CITY=PATH (repeatable)")->required();
  bench->add_option("--index", index_path, "vector index snapshot (single corpus only)");
  bench->add_option("--k", k);
  bench->add_option("--report", report_path);
  bench->add_option("--parallelism", parallelism);
  add_provider_opts(bench, prov);

  // genqueries
  auto* genq = app.add_subcommand("genqueries", "draft labelled queries with the generation prompt");
  genq->add_option("--corpus", corpus_path)->required();
  genq->add_option("--n", n);
  genq->add_option("--seed", seed);
  genq->add_option("--city", city);
  genq->add_option("--out", out_path)->required();
  add_provider_opts(genq, prov);

  // serve
  auto* serve = app.add_subcommand("serve", "HTTP query service");
  std::string regions_path, host = "127.0.0.1", static_dir;
  int port = 8080;
  ServiceConfig scfg;
  serve->add_option("--corpus", corpus_path)->required();
  serve->add_option("--index", index_path);
  serve->add_option("--regions", regions_path)->required();
  serve->add_option("--host", host);
  serve->add_option("--port", port);
  serve->add_option("--cors-origin", scfg.cors_origin);
  serve->add_option("--static-dir", static_dir);
  add_provider_opts(serve, prov);

  CLI11_PARSE(app, argc, argv);
  if (verbose) spdlog::set_level(spdlog::level::debug);

  try {
    if (ingest->parsed()) {
      auto result = ingest_jsonl(in_path);
      std::unique_ptr<ReverseGeocoder> geocoder;
      if (!geocoder_table.empty()) geocoder = std::make_unique<OfflineGeocoder>(OfflineGeocoder::load(geocoder_table));
      if (!nominatim_url.empty()) geocoder = std::make_unique<HttpReverseGeocoder>(nominatim_url);
      if (geocoder) {
        for (auto& obj : result.objects) obj = complete_address(std::move(obj), *geocoder);
      }
      if (do_summarize) {
        auto bundle = providers_for(prov, prov.dim);
        SummarizeOptions so;
        so.parallelism = parallelism;
        summarize_corpus(result.objects, *bundle.chat, PromptSet::load().summarize, result.report, so);
      }
      write_corpus_jsonl(out_path, result.objects);
      if (!report_path.empty()) write_file(report_path, result.report.to_json().dump(2) + "\n");
      fmt::print("parsed {}, rejected {}, summarized {}\n", result.report.parsed, result.report.rejected,
                 result.report.summarized);
    } else if (summarize->parsed()) {
      auto objects = read_corpus_jsonl(corpus_path);
      auto bundle = providers_for(prov, prov.dim);
      IngestReport report;
      SummarizeOptions so;
      so.parallelism = parallelism;
      so.skip_existing = !resummarize;
      summarize_corpus(objects, *bundle.chat, PromptSet::load().summarize, report, so);
      write_corpus_jsonl(out_path, objects);
      fmt::print("summarized {}, failures {}\n", report.summarized, report.summary_failures);
    } else if (synth->parsed()) {
      write_corpus_jsonl(out_path, generate_synthetic_corpus(seed, n, parse_bbox(bbox_s), default_profiles(), city));
      fmt::print("wrote {} objects to {}\n", n, out_path);
    } else if (index->parsed()) {
      auto objects = read_corpus_jsonl(corpus_path);
      auto bundle = providers_for(prov, prov.dim);
      embed_objects(objects, *bundle.embedder);
      HnswIndex vectors(bundle.embedder->dimension(), hp);
      for (const auto& obj : objects) vectors.insert(obj.id, *obj.embedding);
      vectors.save(out_path);
      fmt::print("indexed {} vectors (dim {}) into {}\n", vectors.size(), vectors.dim(), out_path);
    } else if (bench->parsed()) {
      const auto method = parse_method(method_s);
      std::map<std::string, std::string> paths;
      std::string shared_path;
      for (const auto& arg : corpus_args) {
        const auto eq = arg.find('=');
        if (eq == std::string::npos) {
          shared_path = arg;
        } else {
          paths[arg.substr(0, eq)] = arg.substr(eq + 1);
        }
      }
      if (!index_path.empty() && corpus_args.size() != 1) {
        throw std::invalid_argument("--index needs exactly one --corpus");
      }
      auto queries = load_queryset(queryset_path);
      if (!shared_path.empty()) {
        for (const auto& q : queries) paths.try_emplace(q.city, shared_path);
      }
      const std::size_t dim = snapshot_dim(index_path, prov.dim);
      auto bundle = providers_for(prov, dim);
      const auto prompts = PromptSet::load();
      std::map<std::string, std::shared_ptr<SearchIndex>> indexes;
      std::map<std::string, CitySystem, std::less<>> systems;
      CorpusByCity corpora;
      for (const auto& [c, p] : paths) {
        auto idx = load_index(p, index_path, *bundle.embedder);
        indexes[c] = idx;
        corpora[c] = &idx->corpus();
        systems[c] = CitySystem{idx.get(), bundle.embedder.get(), bundle.chat.get(), &prompts.refine, nullptr};
      }
      queries = load_queryset(queryset_path, corpora);
      BenchOptions bo;
      bo.k = k;
      bo.parallelism = parallelism;
      const auto report = run_benchmark(method, queries, systems, bo);
      fmt::print("{}", report.to_text());
      if (!report_path.empty()) write_file(report_path, report.to_json().dump(2) + "\n");
    } else if (genq->parsed()) {
      auto objects = read_corpus_jsonl(corpus_path);
      const auto grid = GridIndex::build(objects);
      const Corpus corpus(std::move(objects));
      auto bundle = providers_for(prov, prov.dim);
      const auto drafts = generate_query_drafts(corpus, grid, *bundle.chat, PromptSet::load().generate_query,
                                                DraftOptions{n, seed, city});
      save_queryset(out_path, drafts);
      fmt::print("wrote {} drafts to {}\n", drafts.size(), out_path);
    } else if (serve->parsed()) {
      // Signals go to a dedicated thread so shutdown runs outside a handler.
      sigset_t signals;
      sigemptyset(&signals);
      sigaddset(&signals, SIGINT);
      sigaddset(&signals, SIGTERM);
      pthread_sigmask(SIG_BLOCK, &signals, nullptr);

      if (!static_dir.empty()) scfg.static_dir = static_dir;
      ServiceCore core(load_regions(regions_path), scfg);
      HttpService http(core);
      const int bound = http.bind(host, port);
      g_service = &http;
      std::thread server([&http] { http.listen(); });
      std::thread watcher([signals] {
        int sig = 0;
        sigwait(&signals, &sig);
        spdlog::info("signal {}: draining and shutting down", sig);
        if (auto* s = g_service.load()) s->stop();
      });
      watcher.detach();
      spdlog::info("listening on {}:{}", host, bound);

      const std::size_t dim = snapshot_dim(index_path, prov.dim);
      auto bundle = providers_for(prov, dim);
      auto idx = load_index(corpus_path, index_path, *bundle.embedder);
      core.initialize(idx, bundle.embedder, bundle.chat, PromptSet::load().refine);
      spdlog::info("ready: {} objects, {} mode", idx->corpus().size(), bundle.offline ? "offline" : "remote");
      server.join();
      g_service = nullptr;
    }
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return 0;
}
