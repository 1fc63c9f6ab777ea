#include <doctest.h>

#include <sys/wait.h>

#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <httplib.h>
#include <json.hpp>

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string out;
};

// Runs the CLI through the shell; stderr is discarded unless merged.
RunResult run(const std::string& args, bool merge_stderr = false) {
  std::string cmd = std::string(VOXSHOP_CLI) + " " + args + (merge_stderr ? " 2>&1" : " 2>/dev/null");
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  RunResult r;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string data(const std::string& rel) { return std::string(VOXSHOP_DATA_DIR) + "/" + rel; }

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() / ("voxshop-cli-" + std::to_string(::getpid()));
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  std::string write(const std::string& name, const std::string& content) const {
    fs::path p = path_ / name;
    std::ofstream(p) << content;
    return p.string();
  }

 private:
  fs::path path_;
};

std::vector<json> lines_of(const std::string& out) {
  std::vector<json> v;
  std::istringstream in(out);
  for (std::string line; std::getline(in, line);) v.push_back(json::parse(line));
  return v;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("eval") {
  TempDir tmp;
  SUBCASE("identical files") {
    auto f = tmp.write("same.txt", "search red shoes\ncheckout\n");
    auto r = run("eval --ref " + f + " --hyp " + f + " --json");
    CHECK(r.exit_code == 0);
    auto j = json::parse(r.out);
    CHECK(j["wer_percent"] == 0.0);
    CHECK(j["phrase_exact_match_rate_percent"] == 100.0);
  }
  SUBCASE("two pair corpus") {
    auto ref = tmp.write("ref.txt", "add red shoes to cart\ncheckout\n");
    auto hyp = tmp.write("hyp.txt", "add bread shoes cart\ncheck out\n");
    auto r = run("eval --ref " + ref + " --hyp " + hyp + " --json --per-utterance");
    CHECK(r.exit_code == 0);
    auto j = json::parse(r.out);
    CHECK(j["wer_percent"] == 66.7);
    CHECK(j["utterances"].size() == 2);
    auto table = run("eval --ref " + ref + " --hyp " + hyp);
    CHECK(table.exit_code == 0);
    CHECK(table.out.find("66.7%") != std::string::npos);
  }
  SUBCASE("mismatched line counts") {
    auto ref = tmp.write("ref2.txt", "a\nb\n");
    auto hyp = tmp.write("hyp2.txt", "a\n");
    auto r = run("eval --ref " + ref + " --hyp " + hyp, true);
    CHECK(r.exit_code == 2);
    CHECK(r.out.find("SCHEMA") != std::string::npos);
  }
  SUBCASE("empty files") {
    auto e = tmp.write("empty.txt", "");
    CHECK(run("eval --ref " + e + " --hyp " + e).exit_code != 0);
  }
  SUBCASE("comparison of several systems") {
    auto r = run("eval --ref " + data("sample/reference.txt") + " --hyp " + data("sample/system_a.txt") + " --hyp " +
                 data("sample/system_b.txt") + " --hyp " + data("sample/system_c.txt") + " --json");
    CHECK(r.exit_code == 0);
    auto j = json::parse(r.out);
    REQUIRE(j.size() == 3);
    CHECK(j[0]["system"] == "system_a");
    CHECK(j[0]["wer_percent"] == 0.0);
    CHECK(j[2]["phrase_recognized_rate_percent"] == 95.0);
  }
  SUBCASE("usage errors") {
    CHECK(run("eval --ref /nonexistent --hyp /nonexistent").exit_code == 2);
    CHECK(run("").exit_code == 2);
    CHECK(run("frobnicate").exit_code == 2);
  }
}

TEST_CASE("replay") {
  TempDir tmp;
  SUBCASE("golden script is byte-identical across runs and matches the checked-in output") {
    auto a = run("replay --script " + data("scripts/golden_purchase.jsonl"));
    auto b = run("replay --script " + data("scripts/golden_purchase.jsonl"));
    CHECK(a.exit_code == 0);
    CHECK(a.out == b.out);
    CHECK(a.out == slurp(std::string(VOXSHOP_TEST_DIR) + "/golden/golden_purchase.replay.jsonl"));
    auto records = lines_of(a.out);
    CHECK(records.back()["outcome"]["state"]["page"]["kind"] == "ORDER_PLACED");
  }
  SUBCASE("empty script") {
    auto s = tmp.write("empty.jsonl", "");
    auto r = run("replay --script " + s);
    CHECK(r.exit_code == 0);
    CHECK(r.out.empty());
  }
  SUBCASE("stale seq yields an ordering record") {
    auto s = tmp.write("stale.jsonl",
                       "{\"seq\": 2, \"text\": \"search red shoes\", \"is_final\": true}\n"
                       "{\"seq\": 2, \"text\": \"show my cart\", \"is_final\": true}\n");
    auto r = run("replay --script " + s);
    CHECK(r.exit_code == 0);
    auto records = lines_of(r.out);
    REQUIRE(records.size() == 2);
    CHECK(records[1]["error"]["code"] == "ORDERING");
    CHECK(records[0]["outcome"]["state"]["page"]["kind"] == "SEARCH_RESULTS");
  }
  SUBCASE("schema error replays nothing") {
    auto s = tmp.write("bad.jsonl", "{\"seq\": 1, \"text\": \"help\", \"is_final\": true}\n{broken\n");
    auto r = run("replay --script " + s);
    CHECK(r.exit_code == 2);
    CHECK(r.out.empty());
  }
}

TEST_CASE("serve") {
  TempDir tmp;
  SUBCASE("bad catalog fails before binding") {
    auto bad = tmp.write("catalog.json", R"([{"id": "p1"}])");
    auto r = run("serve --port 0 --catalog " + bad, true);
    CHECK(r.exit_code == 2);
    CHECK(r.out.find("SCHEMA") != std::string::npos);
  }
  SUBCASE("health responds and the vocabulary class is logged") {
    std::string cmd = "sh -c 'echo $$; exec " + std::string(VOXSHOP_CLI) + " serve --port 0' 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    char line[1024];
    REQUIRE(fgets(line, sizeof line, pipe) != nullptr);
    pid_t pid = std::stoi(line);
    std::string log;
    int port = 0;
    while (port == 0 && fgets(line, sizeof line, pipe) != nullptr) {
      log += line;
      std::string l(line);
      auto at = l.find("listening on http://127.0.0.1:");
      if (at != std::string::npos) port = std::stoi(l.substr(at + 30));
    }
    REQUIRE(port > 0);
    CHECK(log.find("vocab_class SMALL") != std::string::npos);
    httplib::Client client("127.0.0.1", port);
    auto health = client.Get("/health");
    REQUIRE(health);
    CHECK(health->status == 200);
    CHECK(json::parse(health->body)["status"] == "ok");
    ::kill(pid, SIGTERM);
    while (fgets(line, sizeof line, pipe) != nullptr) {
    }
    int status = pclose(pipe);
    CHECK(WIFEXITED(status));
    CHECK(WEXITSTATUS(status) == 0);
  }
}
