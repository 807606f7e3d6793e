#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <sys/wait.h>

#include "fairaudit/cli.hpp"
#include "oracle.hpp"

using namespace fairaudit;
namespace fs = std::filesystem;

namespace {

const std::string kDir = FAIRAUDIT_TEST_DATA;

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

struct TempDir {
  fs::path path;
  TempDir() {
    std::random_device rd;
    path = fs::temp_directory_path() / ("fairaudit-cli-" + std::to_string(rd()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

void write(const std::string& path, const std::string& text) {
  std::ofstream(path, std::ios::binary) << text;
}

const char* kManifest =
    "id,source,gender,race,age_years,age_bin,split\n"
    "a1,utk,Female,Black,25,,\n"
    "a2,utk,Female,Black,27,,\n"
    "a3,utk,Male,White,34,,\n"
    "a4,utk,Male,White,35,,\n"
    "a5,utk,Male,White,36,,\n"
    "a6,utk,Male,White,37,,\n"
    "a7,utk,Male,White,38,,\n"
    "a8,utk,Female,Indian,,0-2,\n";

}  // namespace

TEST_CASE("help snapshot") {
  const auto r = run({"--help"});
  CHECK(r.code == 0);
  CHECK(r.out == oracle::read_file(kDir + "/golden/help.txt"));
}

TEST_CASE("usage errors exit 2") {
  CHECK(run({}).code == 2);
  CHECK(run({"frobnicate"}).code == 2);
  CHECK(run({"audit"}).code == 2);
  CHECK(run({"balance", "--sources", "x.csv", "--plan-out", "p.json", "--quota", "0"}).code == 2);
}

TEST_CASE("data errors exit 1 with the location") {
  TempDir tmp;
  write(tmp / "bad.csv", "id,source,gender,race,age_years,age_bin,split\nx,s,Female,Plaid,20,,\n");
  const auto r = run({"audit", "--manifest", tmp / "bad.csv"});
  CHECK(r.code == 1);
  CHECK(r.err.find("UnknownSubgroup") != std::string::npos);
  CHECK(r.err.find("line 2") != std::string::npos);
  CHECK(run({"audit", "--manifest", tmp / "missing.csv"}).code == 1);
}

TEST_CASE("audit writes json") {
  TempDir tmp;
  write(tmp / "utk.csv", kManifest);
  const auto r = run({"audit", "--manifest", tmp / "utk.csv"});
  REQUIRE(r.code == 0);
  const auto doc = nlohmann::json::parse(r.out);
  CHECK(doc["dataset"] == "utk");
  CHECK(doc["n"] == 8);
  CHECK(doc["diversity"]["D"].get<double>() == doctest::Approx(0.2));
}

TEST_CASE("balance -> apply -> split pipeline is byte-identical on rerun") {
  TempDir tmp;
  write(tmp / "utk.csv", kManifest);
  const std::vector<std::string> outputs{"aplan.json", "abal.csv", "abal.csv.meta.json", "a_train.csv",
                                         "a_val.csv",  "a_test.csv", "a_split.json"};
  auto pipeline = [&] {
    REQUIRE(run({"balance", "--sources", tmp / "utk.csv", "--quota", "4", "--seed", "3", "--plan-out",
                 tmp / "aplan.json"})
                .code == 0);
    REQUIRE(run({"apply", "--plan", tmp / "aplan.json", "--sources", tmp / "utk.csv", "--out", tmp / "abal.csv"})
                .code == 0);
    REQUIRE(run({"split", "--manifest", tmp / "abal.csv", "--seed", "8", "--out-prefix", tmp / "a_"}).code == 0);
    std::vector<std::string> contents;
    for (const auto& f : outputs) contents.push_back(oracle::read_file(tmp / f));
    return contents;
  };
  const auto first = pipeline();
  const auto second = pipeline();
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    CHECK(!first[i].empty());
    CHECK(first[i] == second[i]);
  }
  const auto meta = nlohmann::json::parse(oracle::read_file(tmp / "abal.csv.meta.json"));
  CHECK(meta["seed"] == 3);

  // a source edited after planning is refused
  write(tmp / "utk.csv", std::string(kManifest) + "a9,utk,Male,White,39,,\n");
  const auto r = run({"apply", "--plan", tmp / "aplan.json", "--sources", tmp / "utk.csv", "--out", tmp / "c.csv"});
  CHECK(r.code == 1);
  CHECK(r.err.find("SourceMismatch") != std::string::npos);
}

TEST_CASE("synth -> evaluate -> compare") {
  TempDir tmp;
  write(tmp / "spec.json", R"({"groups":[
    {"gender":"Female","race":"White","age_bin":"20-29","count_pos":40,"count_neg":0,"tpr":0.8,"fpr":0.0},
    {"gender":"Male","race":"White","age_bin":"20-29","count_pos":0,"count_neg":40,"tpr":0.0,"fpr":0.25},
    {"gender":"Female","race":"Black","age_bin":"20-29","count_pos":40,"count_neg":0,"tpr":0.5,"fpr":0.0},
    {"gender":"Male","race":"Black","age_bin":"20-29","count_pos":0,"count_neg":40,"tpr":0.0,"fpr":0.1}]})");
  REQUIRE(run({"synth", "--spec", tmp / "spec.json", "--seed", "1", "--out", tmp / "log.csv"}).code == 0);
  const auto e = run({"evaluate", "--predictions", tmp / "log.csv", "--out", tmp / "rep.json"});
  REQUIRE(e.code == 0);
  const auto rep = nlohmann::json::parse(oracle::read_file(tmp / "rep.json"));
  CHECK(rep["dataset"] == "log");
  CHECK(rep["reference"] == "White");
  CHECK(rep["tpr_gap"].get<double>() == doctest::Approx(0.3));
  CHECK(rep["groups"][1]["di"].get<double>() == doctest::Approx(24.0 / 42.0));
  CHECK(rep["groups"][1]["flagged"] == true);

  const auto c = run({"compare", "--reports", kDir + "/fixtures/race_utkface.json", kDir + "/fixtures/race_fairface.json",
                      kDir + "/fixtures/race_balancedface.json", "--candidate", "BalancedFace"});
  REQUIRE(c.code == 0);
  CHECK(c.out.find("54.4%") != std::string::npos);
  CHECK(c.out.find("62.9%") != std::string::npos);

  CHECK(run({"compare", "--reports", kDir + "/fixtures/race_utkface.json", kDir + "/fixtures/age_utkface.json"}).code ==
        1);
}

TEST_CASE("installed binary exit codes") {
  const std::string exe = FAIRAUDIT_CLI_PATH;
  auto status = [](const std::string& cmd) {
    const int raw = std::system((cmd + " >/dev/null 2>&1").c_str());
    return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  };
  CHECK(status(exe + " --help") == 0);
  CHECK(status(exe + " audit") == 2);
  CHECK(status(exe + " audit --manifest /nonexistent/x.csv") == 1);
}
