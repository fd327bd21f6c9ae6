#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "cli.hpp"
#include "doctest.h"
#include "urerf/dataset_io.hpp"
#include "urerf/io.hpp"

namespace fs = std::filesystem;
using namespace urerf;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() /
           ("urerf_cli_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

int run(std::initializer_list<std::string> args, std::string* err_text = nullptr) {
  std::vector<std::string> owned{"urerf"};
  owned.insert(owned.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : owned) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  if (err_text) *err_text = err.str();
  return code;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

}  // namespace

TEST_SUITE_BEGIN("cli");

TEST_CASE("generate writes data and oracle deterministically") {
  TempDir dir;
  REQUIRE(run({"generate", "--dataset", "helix", "--n", "1000", "--seed", "7", "--out", dir / "a.csv"}) == 0);
  REQUIRE(run({"generate", "--dataset", "helix", "--n", "1000", "--seed", "7", "--out", dir / "b.csv"}) == 0);
  CHECK(slurp(dir / "a.csv") == slurp(dir / "b.csv"));
  CHECK(slurp(dir / "a.oracle.json") == slurp(dir / "b.oracle.json"));

  const auto ds = read_dataset(dir / "a.csv");
  CHECK(ds.data.rows() == 1000);
  CHECK(ds.data.cols() == 3);
  CHECK(ds.data == gen_helix(1000).data);
  CHECK(lines(slurp(dir / "a.csv")).front() == "x1,x2,x3,t");

  // No noise columns reproduce the plain generator.
  REQUIRE(run({"generate", "--dataset", "gmm", "--n", "200", "--seed", "3", "--noise-dims", "0", "--out", dir / "g.csv"}) == 0);
  CHECK(read_dataset(dir / "g.csv").data == gen_gmm(200, 3).data);

  REQUIRE(run({"generate", "--dataset", "sphere", "--n", "100", "--noise-dims", "5", "--rescale", "--out", dir / "s.csv"}) == 0);
  const auto s = read_dataset(dir / "s.csv");
  CHECK(s.data.cols() == 8);
  CHECK(s.oracle.distance(0, 1) == gen_sphere(100).oracle.distance(0, 1));
}

TEST_CASE("oracle round trip") {
  TempDir dir;
  for (const char* name : {"linear", "helix", "sphere", "gmm"}) {
    const auto ds = generate(name, 64, 11);
    write_dataset(dir / "d.csv", ds);
    const auto back = read_dataset(dir / "d.csv");
    REQUIRE(back.data == ds.data);
    REQUIRE(back.oracle.kind() == ds.oracle.kind());
    for (std::size_t i = 0; i < 64; i += 5) {
      for (std::size_t j = 0; j < 64; j += 3) {
        if (ds.oracle.kind() == OracleKind::Continuous) {
          REQUIRE(back.oracle.distance(i, j) == ds.oracle.distance(i, j));
        } else {
          REQUIRE(back.oracle.same_component(i, j) == ds.oracle.same_component(i, j));
        }
      }
    }
  }
}

TEST_CASE("fit and eval are deterministic") {
  TempDir dir;
  REQUIRE(run({"generate", "--dataset", "gmm", "--n", "300", "--seed", "1", "--out", dir / "d.csv"}) == 0);
  std::string log;
  REQUIRE(run({"fit", "--in", dir / "d.csv", "--out", dir / "a", "--criterion", "fastbic", "--trees", "20",
               "--minparent", "100", "--mtry", "auto", "--seed", "4", "--triplets"},
              &log) == 0);
  CHECK(log.find("leaf size histogram") != std::string::npos);
  CHECK(log.find("tree 19:") != std::string::npos);
  REQUIRE(run({"fit", "--in", dir / "d.csv", "--out", dir / "b", "--trees", "20", "--seed", "4", "--triplets",
               "--threads", "3"}) == 0);
  CHECK(slurp(dir / "a.forest.json") == slurp(dir / "b.forest.json"));
  CHECK(slurp(dir / "a.proximity.csv") == slurp(dir / "b.proximity.csv"));
  CHECK(slurp(dir / "a.proximity.triplets.csv") == slurp(dir / "b.proximity.triplets.csv"));

  for (const char* out : {"p1.csv", "p2.csv"}) {
    REQUIRE(run({"eval", "--in", dir / "d.csv", "--proximity", dir / "a.proximity.csv", "--method",
                 "proximity,euclidean", "--k", "50,10", "--out", dir / out}) == 0);
  }
  CHECK(slurp(dir / "p1.csv") == slurp(dir / "p2.csv"));
  const auto rows = lines(slurp(dir / "p1.csv"));
  REQUIRE(rows.size() == 5);
  CHECK(rows[0] == "method,k,precision,recall,chance");
  CHECK(rows[1].rfind("proximity,10,", 0) == 0);
  CHECK(rows[2].rfind("proximity,50,", 0) == 0);
  CHECK(rows[3].rfind("euclidean,10,", 0) == 0);
}

TEST_CASE("single tree proximity is binary") {
  TempDir dir;
  REQUIRE(run({"generate", "--dataset", "linear", "--n", "250", "--out", dir / "d.csv"}) == 0);
  REQUIRE(run({"fit", "--in", dir / "d.csv", "--out", dir / "f", "--trees", "1", "--minparent", "20"}) == 0);
  const auto table = read_csv(dir / "f.proximity.csv");
  bool saw_zero = false;
  for (double v : table.values.values()) {
    REQUIRE((v == 0.0 || v == 1.0));
    saw_zero |= v == 0.0;
  }
  CHECK(saw_zero);
}

TEST_CASE("k = N - 1 retrieves everything") {
  TempDir dir;
  REQUIRE(run({"generate", "--dataset", "helix", "--n", "40", "--out", dir / "d.csv"}) == 0);
  REQUIRE(run({"eval", "--in", dir / "d.csv", "--method", "euclidean", "--k", "39", "--out", dir / "pr.csv"}) == 0);
  CHECK(lines(slurp(dir / "pr.csv"))[1] == "euclidean,39,1,1,1");
}

TEST_CASE("external distance matrix matches euclidean") {
  TempDir dir;
  REQUIRE(run({"generate", "--dataset", "sphere", "--n", "120", "--noise-dims", "4", "--seed", "2", "--out", dir / "d.csv"}) == 0);
  const auto ds = read_dataset(dir / "d.csv");
  const auto dist = euclidean_distances(ds.data);
  {
    std::ofstream out(dir / "dist.csv");
    std::vector<std::string> header;
    for (std::size_t j = 0; j < 120; ++j) header.push_back("d" + std::to_string(j));
    write_csv_header(out, header);
    for (std::size_t i = 0; i < 120; ++i) write_csv_row(out, dist.row(i));
  }
  REQUIRE(run({"eval", "--in", dir / "d.csv", "--distance", dir / "dist.csv", "--method", "euclidean,external",
               "--k", "5,20", "--out", dir / "pr.csv"}) == 0);
  const auto rows = lines(slurp(dir / "pr.csv"));
  REQUIRE(rows.size() == 5);
  for (std::size_t q = 1; q <= 2; ++q) {
    CHECK(rows[q].substr(rows[q].find(',')) == rows[q + 2].substr(rows[q + 2].find(',')));
  }
}

TEST_CASE("sweep cells reproduce manual runs") {
  TempDir dir;
  std::string log;
  REQUIRE(run({"sweep", "--dataset", "helix,gmm", "--param", "minparent", "--values", "50,200", "--n", "200",
               "--seed", "9", "--trees", "10", "--k", "10,25", "--out", dir / "sw.csv"},
              &log) == 0);
  const auto rows = lines(slurp(dir / "sw.csv"));
  REQUIRE(rows.size() == 1 + 2 * 2 * 4);
  CHECK(rows[0] == "dataset,param,value,seed,method,k,precision,recall,chance,seconds");

  // Re-run the gmm / minparent=200 cell by hand.
  const std::uint64_t seed = cli::cell_seed(9, "minparent", "200", "gmm");
  const std::string s = std::to_string(seed);
  REQUIRE(run({"generate", "--dataset", "gmm", "--n", "200", "--seed", s, "--out", dir / "c.csv"}) == 0);
  REQUIRE(run({"fit", "--in", dir / "c.csv", "--out", dir / "c", "--trees", "10", "--minparent", "200",
               "--seed", s}) == 0);
  REQUIRE(run({"eval", "--in", dir / "c.csv", "--proximity", dir / "c.proximity.csv", "--k", "10,25",
               "--out", dir / "c.pr.csv"}) == 0);
  const auto manual = lines(slurp(dir / "c.pr.csv"));
  const std::string prefix = "gmm,minparent,200," + s + ",";
  std::vector<std::string> cell;
  for (const auto& r : rows) {
    if (r.rfind(prefix, 0) == 0) cell.push_back(r.substr(prefix.size()));
  }
  REQUIRE(cell.size() == 4);
  for (std::size_t q = 0; q < 4; ++q) CHECK(cell[q] == manual[q + 1] + ",");

  // Same flags, same bytes.
  REQUIRE(run({"sweep", "--dataset", "helix,gmm", "--param", "minparent", "--values", "50,200", "--n", "200",
               "--seed", "9", "--trees", "10", "--k", "10,25", "--out", dir / "sw2.csv"}) == 0);
  CHECK(slurp(dir / "sw.csv") == slurp(dir / "sw2.csv"));
}

TEST_CASE("sweep edge cases") {
  TempDir dir;
  REQUIRE(run({"sweep", "--param", "noise-dims", "--out", dir / "empty.csv"}) == 0);
  CHECK(slurp(dir / "empty.csv") == "dataset,param,value,seed,method,k,precision,recall,chance,seconds\n");

  // A failing cell is recorded and the sweep carries on.
  REQUIRE(run({"sweep", "--dataset", "sphere,linear", "--param", "noise-dims", "--values", "0", "--n", "7",
               "--trees", "2", "--k", "3", "--out", dir / "err.csv"}) == 0);
  const auto rows = lines(slurp(dir / "err.csv"));
  REQUIRE(rows.size() == 4);
  CHECK(rows[1].find(",error,") != std::string::npos);
  CHECK(rows[2].rfind("linear,noise-dims,0,", 0) == 0);

  REQUIRE(run({"sweep", "--dataset", "linear", "--param", "criterion", "--values", "twomeans", "--n", "60",
               "--trees", "2", "--k", "3", "--timing", "--out", dir / "t.csv"}) == 0);
  const auto timed = lines(slurp(dir / "t.csv"));
  CHECK(timed[1].back() != ',');
}

TEST_CASE("exit codes") {
  TempDir dir;
  std::string err;
  CHECK(run({"generate", "--dataset", "torus", "--out", dir / "x.csv"}, &err) == cli::kInvalidArgument);
  CHECK(err.find("torus") != std::string::npos);
  CHECK(run({"generate", "--n", "1", "--out", dir / "x.csv"}) == cli::kInvalidArgument);
  CHECK(run({"generate", "--bogus"}) == cli::kInvalidArgument);
  CHECK(run({"generate", "--out", dir / "missing/dir/x.csv"}, &err) == cli::kIoError);
  CHECK(err.find("missing/dir/x.csv") != std::string::npos);
  CHECK(run({"fit", "--in", dir / "nope.csv"}) == cli::kIoError);

  REQUIRE(run({"generate", "--dataset", "linear", "--n", "30", "--out", dir / "d.csv"}) == 0);
  CHECK(run({"fit", "--in", dir / "d.csv", "--out", dir / "f", "--subsample", "31"}) == cli::kInvalidArgument);
  CHECK(run({"fit", "--in", dir / "d.csv", "--out", dir / "f", "--criterion", "gini"}) == cli::kInvalidArgument);
  CHECK(run({"fit", "--in", dir / "d.csv", "--out", dir / "f", "--mtry", "-1"}) == cli::kInvalidArgument);
  CHECK(run({"eval", "--in", dir / "d.csv", "--method", "proximity", "--out", dir / "pr.csv"}) ==
        cli::kInvalidArgument);
  CHECK(run({"eval", "--in", dir / "d.csv", "--method", "euclidean", "--k", "30", "--out", dir / "pr.csv"}) ==
        cli::kInvalidArgument);

  // Features without any oracle information.
  {
    std::ofstream out(dir / "plain.csv");
    out << "x1,x2\n0,1\n1,2\n3,1\n";
  }
  CHECK(run({"eval", "--in", dir / "plain.csv", "--method", "euclidean", "--k", "1", "--out", dir / "pr.csv"}) ==
        cli::kOracleMismatch);
  CHECK(run({"fit", "--in", dir / "plain.csv", "--out", dir / "pf", "--trees", "2", "--minparent", "2"}) == 0);

  // Proximity of the wrong size.
  REQUIRE(run({"generate", "--dataset", "linear", "--n", "31", "--out", dir / "e.csv"}) == 0);
  REQUIRE(run({"fit", "--in", dir / "e.csv", "--out", dir / "g", "--trees", "2"}) == 0);
  CHECK(run({"eval", "--in", dir / "d.csv", "--proximity", dir / "g.proximity.csv", "--method", "proximity",
             "--k", "2", "--out", dir / "pr.csv"}) == cli::kOracleMismatch);

  // Labels-only CSV gives a discrete oracle.
  {
    std::ofstream out(dir / "lab.csv");
    out << "x1,label\n0,0\n0.1,0\n5,1\n5.2,1\n";
  }
  CHECK(run({"eval", "--in", dir / "lab.csv", "--method", "euclidean", "--k", "1", "--out", dir / "lab.pr.csv"}) == 0);
  CHECK(lines(slurp(dir / "lab.pr.csv"))[1] == "euclidean,1,1,1,0.3333333333333333");
}

TEST_SUITE_END();
