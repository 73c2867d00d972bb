#include <cstdlib>
#include <filesystem>
#include <string>
#include <sys/wait.h>

#include "doctest.h"

#include "dilog/io.hpp"

namespace fs = std::filesystem;
using dilog::io::json;

namespace {

struct Run {
  int code = -1;
  std::string err;
};

class Workspace {
 public:
  Workspace() : dir_(fs::temp_directory_path() / ("dilog_cli_" + std::to_string(::getpid()))) {
    fs::create_directories(dir_);
  }
  ~Workspace() { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  Run run(const std::string& args) const {
    const std::string err = path("stderr.txt");
    const std::string cmd = std::string(DILOG_CLI) + " " + args + " >/dev/null 2>" + err;
    const int status = std::system(cmd.c_str());
    Run r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.err = dilog::io::read_file(err);
    return r;
  }

 private:
  fs::path dir_;
};

}  // namespace

TEST_CASE("missing input file is a validation error") {
  Workspace ws;
  const Run r = ws.run("convert --in " + ws.path("absent.jsonl") + " --out " + ws.path("s.jsonl"));
  CHECK(r.code == 2);
  const json j = json::parse(r.err);
  CHECK(j.at("error") == "validation");
  CHECK(j.at("exit_code") == 2);
  CHECK(j.at("message").get<std::string>().find("absent.jsonl") != std::string::npos);
}

TEST_CASE("usage errors") {
  Workspace ws;
  CHECK(ws.run("frobnicate").code == 2);
  CHECK(ws.run("train --samples x").code == 2);
  CHECK(ws.run("generate --domain hotel --out " + ws.path("d.jsonl")).code == 2);
  CHECK(ws.run("--help").code == 0);
}

TEST_CASE("gradcheck") {
  Workspace ws;
  CHECK(ws.run("gradcheck --seed 1 --instances 20").code == 0);
}

TEST_CASE("end to end") {
  Workspace ws;
  dilog::io::write_file(ws.path("hp.json"), R"({"training_steps": 30})");
  REQUIRE(ws.run("generate --representative --domain restaurant --out " + ws.path("train.jsonl")).code == 0);
  REQUIRE(ws.run("generate --domain movie --n 20 --seed 3 --out " + ws.path("test.jsonl")).code == 0);
  REQUIRE(ws.run("convert --in " + ws.path("train.jsonl") + " --out " + ws.path("train_s.jsonl")).code == 0);
  REQUIRE(ws.run("convert --in " + ws.path("test.jsonl") + " --out " + ws.path("test_s.jsonl")).code == 0);
  REQUIRE(ws.run("train --samples " + ws.path("train_s.jsonl") + " --template " DILOG_SOURCE_DIR
                 "/configs/simdial_template.json --hp " + ws.path("hp.json") + " --out " + ws.path("model.json") +
                 " --trace " + ws.path("trace.csv"))
              .code == 0);
  REQUIRE(ws.run("extract --model " + ws.path("model.json") + " --out " + ws.path("program.txt")).code == 0);
  REQUIRE(ws.run("transfer --program " + ws.path("program.txt") + " --samples " + ws.path("test_s.jsonl") +
                 " --out " + ws.path("pred.jsonl"))
              .code == 0);
  REQUIRE(ws.run("eval --pred " + ws.path("pred.jsonl") + " --gold " + ws.path("test_s.jsonl") + " --report " +
                 ws.path("report.json"))
              .code == 0);
  const json report = json::parse(dilog::io::read_file(ws.path("report.json")));
  CHECK(report.contains("intent_f1"));
  CHECK(report.at("domains").contains("movie"));

  const std::string model = dilog::io::read_file(ws.path("model.json"));
  REQUIRE(ws.run("train --samples " + ws.path("train_s.jsonl") + " --template " DILOG_SOURCE_DIR
                 "/configs/simdial_template.json --hp " + ws.path("hp.json") + " --out " + ws.path("model2.json"))
              .code == 0);
  CHECK(dilog::io::read_file(ws.path("model2.json")) == model);

  dilog::io::write_file(ws.path("bad_hp.json"), R"({"steps": 30})");
  const Run bad = ws.run("train --samples " + ws.path("train_s.jsonl") + " --template " DILOG_SOURCE_DIR
                         "/configs/simdial_template.json --hp " + ws.path("bad_hp.json") + " --out " +
                         ws.path("m.json"));
  CHECK(bad.code == 2);
  CHECK(bad.err.find("steps") != std::string::npos);
}
