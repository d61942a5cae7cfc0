#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "flowhawk/dataset.hpp"
#include "flowhawk/ingest.hpp"
#include "test_util.hpp"

using namespace flowhawk;
namespace fs = std::filesystem;

namespace {

const std::string kBin = FLOWHAWK_BIN;

fs::path scratch() {
  static fs::path dir = [] {
    auto d = fs::temp_directory_path() /
             ("flowhawk_cli_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

int run(const std::string& args, const std::string& out_file = "") {
  std::string cmd = kBin + " " + args;
  if (!out_file.empty()) cmd += " > " + out_file + " 2>&1";
  else cmd += " > /dev/null 2>&1";
  int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string make_flow_fixture() {
  auto path = (scratch() / "flows.binetflow").string();
  dataset::write_flow_file(path, testutil::synthetic_flows(120, 0.3, 5));
  return path;
}

}  // namespace

TEST_CASE("help exits zero everywhere") {
  CHECK(run("--help") == 0);
  for (const char* sub : {"extract", "train", "crossval", "select", "optimize",
                          "detect", "report"})
    CHECK(run(std::string(sub) + " --help") == 0);
}

TEST_CASE("usage errors exit with code one") {
  CHECK(run("train") == 1);                  // missing required options
  CHECK(run("no-such-command") == 1);
  CHECK(run("crossval --flows x --k notanumber") == 1);
}

TEST_CASE("data errors exit with code two") {
  CHECK(run("crossval --flows /nonexistent.binetflow") == 2);
  CHECK(run("detect -r /nonexistent --metadata /nonexistent.json") == 2);
}

TEST_CASE("extract converts a pcap into a parseable flow file") {
  auto pcap_path = (scratch() / "in.pcap").string();
  {
    using namespace ingest;
    PcapWriter w(pcap_path, LinkType::Ethernet);
    auto syn = build_ipv4_frame("10.0.0.1", "10.0.0.2", 6,
                                build_tcp_segment(40000, 80, tcp_flags::SYN, 64240));
    auto synack = build_ipv4_frame(
        "10.0.0.2", "10.0.0.1", 6,
        build_tcp_segment(80, 40000, tcp_flags::SYN | tcp_flags::ACK, 29200));
    w.write(syn, 1000000);
    w.write(synack, 1050000);
  }
  auto out = (scratch() / "out.binetflow").string();
  CHECK(run("extract " + pcap_path + " " + out) == 0);
  auto flows = dataset::read_flow_file(out);
  REQUIRE(flows.size() == 1);
  CHECK(flows[0].proto == "tcp");
}

TEST_CASE("crossval renders a table and writes machine rows") {
  auto flows = make_flow_fixture();
  auto rows = (scratch() / "rows.tsv").string();
  auto console = (scratch() / "crossval.out").string();
  CHECK(run("--seed 7 crossval --flows " + flows +
            " --kind random_forest --k 3 --out " + rows,
            console) == 0);
  auto table = slurp(console);
  CHECK(table.find("Precision") != std::string::npos);
  CHECK(table.find("mean") != std::string::npos);
  auto tsv = slurp(rows);
  CHECK(tsv.find("fold\tfit_time_s\tprecision") == 0);

  // report re-renders stored rows.
  CHECK(run("report " + rows, console) == 0);
  auto rendered = slurp(console);
  CHECK(rendered.find("precision") != std::string::npos);
  CHECK(rendered.find("mean") != std::string::npos);
}

TEST_CASE("select ranks features") {
  auto flows = make_flow_fixture();
  auto out = (scratch() / "importance.tsv").string();
  CHECK(run("--seed 7 select --flows " + flows + " --top 15 --out " + out) == 0);
  auto table = slurp(out);
  CHECK(std::count(table.begin(), table.end(), '\n') >= 15);
}

TEST_CASE("optimize runs the ga and random baselines") {
  auto flows = make_flow_fixture();
  auto history = (scratch() / "history.tsv").string();
  CHECK(run("--seed 7 optimize --flows " + flows +
            " --kind gaussian_nb --method random --n-iter 2 --k 2") == 0);
  CHECK(run("--seed 7 optimize --flows " + flows +
            " --kind knn --method ga --pop 4 --gen 2 --k 2 --history " +
            history) == 0);
  CHECK(slurp(history).find("generation\tbest_fitness") == 0);
}

TEST_CASE("train then detect on the same flows is self-consistent") {
  auto flows = make_flow_fixture();
  auto dir = scratch() / "models";
  fs::create_directories(dir);
  auto model = (dir / "rf.model").string();
  auto metadata = (dir / "metadata.json").string();
  CHECK(run("--seed 7 train --flows " + flows +
            " --kind random_forest --out " + model + " --metadata " + metadata +
            " --model-id rf") == 0);
  CHECK(fs::exists(model));

  auto alert_log = (scratch() / "alerts.log").string();
  auto flow_log = (scratch() / "flows.log").string();
  CHECK(run("detect -r " + flows + " --models-dir " + dir.string() +
            " --metadata " + metadata + " --alert-log " + alert_log +
            " --flow-log " + flow_log) == 0);

  // Every input flow is logged; the memorizing forest re-alerts on exactly
  // the botnet-labeled flows.
  auto in = dataset::read_flow_file(flows);
  std::size_t botnet = 0;
  for (const auto& f : in)
    botnet += normalize_label(*f.label) == LabelClass::Botnet;
  auto flog = slurp(flow_log);
  CHECK(std::size_t(std::count(flog.begin(), flog.end(), '\n')) == in.size());
  auto alog = slurp(alert_log);
  CHECK(std::size_t(std::count(alog.begin(), alog.end(), '\n')) == botnet);
}

TEST_CASE("cleanup") { fs::remove_all(scratch()); }
