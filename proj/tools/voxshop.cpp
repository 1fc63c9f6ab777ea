// voxshop: score transcripts, serve the shop, replay scripted sessions.

#include <csignal>
#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "voxshop/error.hpp"
#include "voxshop/http_server.hpp"
#include "voxshop/provider.hpp"
#include "voxshop/report.hpp"
#include "voxshop/service.hpp"

namespace {

using namespace voxshop;

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kSchema:
    case ErrorCode::kInvalidGrammar:
    case ErrorCode::kConflict: return kExitUsage;
    default: return kExitRuntime;
  }
}

std::string default_path(const char* env, const char* file) {
  if (const char* v = std::getenv(env); v != nullptr && *v != '\0') return v;
  return std::string(VOXSHOP_DEFAULT_DATA_DIR) + "/" + file;
}

int run_eval(const std::string& ref, const std::vector<std::string>& hyps, bool as_json, bool per_utterance) {
  std::vector<srseval::NamedReport> reports;
  for (const auto& hyp : hyps) {
    auto corpus = srseval::read_corpus(ref, hyp);
    reports.push_back({std::filesystem::path(hyp).stem().string(), srseval::corpus_report(corpus)});
  }
  if (reports.size() == 1) {
    if (as_json) {
      std::cout << srseval::to_json(reports[0].report, per_utterance).dump() << "\n";
    } else {
      std::cout << srseval::render_table(reports[0].report, per_utterance);
    }
  } else if (as_json) {
    std::cout << srseval::comparison_json(reports, per_utterance).dump() << "\n";
  } else {
    std::cout << srseval::render_comparison(reports);
  }
  return kExitOk;
}

service::ShopService load_service(const std::string& catalog, const std::string& grammar,
                                  provider::PartialPolicy partials = provider::PartialPolicy::kFinalOnly) {
  auto c = shop::Catalog::load(catalog);
  auto g = command::load_grammar(grammar);
  service::ServiceConfig config;
  config.partial_policy = partials;
  return service::ShopService(std::move(c), std::move(g), std::move(config));
}

int run_replay(const std::string& script_path, const std::string& catalog, const std::string& grammar) {
  auto script = provider::load_script(script_path);
  auto svc = load_service(catalog, grammar);
  for (const auto& record : service::replay(script, svc)) std::cout << record.dump() << "\n";
  return kExitOk;
}

int run_serve(const std::string& catalog, const std::string& grammar, const std::string& host, std::uint16_t port,
              const std::string& partials) {
  auto policy = partials == "eager" ? provider::PartialPolicy::kEager : provider::PartialPolicy::kFinalOnly;
  auto svc = load_service(catalog, grammar, policy);
  spdlog::info("catalog {}: {} products", catalog, svc.catalog().size());
  spdlog::info("grammar {}: {} intents, {} trigger phrases, mode {}, vocab_class {}", grammar,
               svc.grammar().intents.size(), svc.grammar().distinct_phrase_count,
               command::to_string(svc.grammar().mode), command::to_string(svc.grammar().vocab_class));

  // Block the stop signals before any thread starts so only sigwait sees them.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  http::Server server(svc, host, port);
  server.start();
  spdlog::info("listening on http://{}:{}", host, server.port());
  int sig = 0;
  sigwait(&signals, &sig);
  spdlog::info("signal {}, shutting down", sig);
  server.stop();
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Voice-commanded shop engine and speech-recognition scoring"};
  app.require_subcommand(1);

  std::string ref;
  std::vector<std::string> hyps;
  bool as_json = false;
  bool per_utterance = false;
  auto* eval = app.add_subcommand("eval", "Score hypothesis transcripts against a reference");
  eval->add_option("--ref", ref, "Reference transcript file")->required()->check(CLI::ExistingFile);
  eval->add_option("--hyp", hyps, "Hypothesis file; repeat to compare systems")->required()->check(CLI::ExistingFile);
  eval->add_flag("--json", as_json, "Structured output");
  eval->add_flag("--per-utterance", per_utterance, "Include per-line scores");

  std::string catalog = default_path("VOXSHOP_CATALOG", "catalog.json");
  std::string grammar = default_path("VOXSHOP_GRAMMAR", "shop_grammar.json");
  std::string host = "127.0.0.1";
  std::uint16_t port = 8080;
  std::string partials = "final";
  auto* serve = app.add_subcommand("serve", "Run the HTTP and streaming API");
  serve->add_option("--catalog", catalog, "Catalog JSON (env VOXSHOP_CATALOG)")->capture_default_str();
  serve->add_option("--grammar", grammar, "Command grammar JSON (env VOXSHOP_GRAMMAR)")->capture_default_str();
  serve->add_option("--host", host, "Listen address")->capture_default_str();
  serve->add_option("--port", port, "Listen port, 0 for any free port")->capture_default_str();
  serve->add_option("--partials", partials, "Partial transcript policy")
      ->check(CLI::IsMember({"final", "eager"}))
      ->capture_default_str();

  std::string script;
  auto* replay = app.add_subcommand("replay", "Run a scripted session and print one JSON record per event");
  replay->add_option("--script", script, "JSONL transcript script")->required();
  replay->add_option("--catalog", catalog, "Catalog JSON")->capture_default_str();
  replay->add_option("--grammar", grammar, "Command grammar JSON")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*eval) return run_eval(ref, hyps, as_json, per_utterance);
    if (*serve) return run_serve(catalog, grammar, host, port, partials);
    if (*replay) return run_replay(script, catalog, grammar);
  } catch (const Error& e) {
    std::cerr << "voxshop: " << to_string(e.code()) << ": " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "voxshop: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
