#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "simhaystack/blockhash.hpp"
#include "simhaystack/corpus.hpp"
#include "simhaystack/image_io.hpp"
#include "simhaystack/results.hpp"
#include "support.hpp"

using namespace simhaystack;
using namespace simhaystack::testing;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "simhaystack");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> lines_of(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    fs::create_directories(dir_.path() / "images");
    for (int i = 0; i < 4; ++i) {
      write_png(synthetic_scene(100 + i, 80, 64), image(i));
    }
  }
  fs::path image(int i) const { return dir_.path() / "images" / ("img" + std::to_string(i) + ".png"); }
  fs::path at(const std::string& name) const { return dir_.path() / name; }

  fs::path write_config(const std::string& extra = "") const {
    const fs::path p = at("exp.yaml");
    std::ofstream f(p);
    f << "name: cli\n"
         "dataset: synthetic\n"
         "synthetic: {count: 16, width: 48, height: 40, seed: 2}\n"
         "backends: [dhash/64, random/64]\n"
         "sample_count: 3\n"
         "seed: 9\n"
         "perturbations:\n"
         "  - {family: jpeg, parameter: 50}\n"
         "  - {family: gaussian_noise, parameter: 0.02}\n"
         "output_dir: out\n"
      << extra;
    return p;
  }

  TempDir dir_{"cli"};
};

}  // namespace

TEST_F(Cli, UsageErrors) {
  EXPECT_EQ(run_cli({}).code, cli::kExitUsage);
  EXPECT_EQ(run_cli({"frobnicate"}).code, cli::kExitUsage);
  const auto r = run_cli({"hash", "--no-such-flag", image(0).string()});
  EXPECT_EQ(r.code, cli::kExitUsage);
  EXPECT_FALSE(r.err.empty());
  EXPECT_EQ(run_cli({"hash", "--algo", "nope", image(0).string()}).code, cli::kExitUsage);
  EXPECT_EQ(run_cli({"hash", "--bits", "20", image(0).string()}).code, cli::kExitUsage);
  EXPECT_EQ(run_cli({"--help"}).code, cli::kExitOk);
}

TEST_F(Cli, HashPrintsOneLinePerImage) {
  const auto one = run_cli({"hash", image(0).string()});
  ASSERT_EQ(one.code, 0) << one.err;
  const auto expected = "dhash/" + dhash(read_image(image(0))).to_text() + "\n";
  EXPECT_EQ(one.out, expected);

  const auto two = run_cli({"hash", "-a", "phash", "-b", "16", image(0).string(), image(1).string()});
  ASSERT_EQ(two.code, 0) << two.err;
  const auto l = lines_of(two.out);
  ASSERT_EQ(l.size(), 2u);
  EXPECT_EQ(l[0].rfind("phash/16:", 0), 0u);
  EXPECT_NE(l[1].find(image(1).string()), std::string::npos);

  const auto crop = run_cli({"hash", "-a", "crop", image(2).string()});
  ASSERT_EQ(crop.code, 0) << crop.err;
  EXPECT_EQ(crop.out.rfind("crop/64:", 0), 0u);

  const auto orb = run_cli({"hash", "-a", "orb", "--features", "10", image(2).string()});
  ASSERT_EQ(orb.code, 0) << orb.err;
  EXPECT_EQ(orb.out.rfind("orb/10:", 0), 0u);
}

TEST_F(Cli, CorruptImageIsDataError) {
  { std::ofstream(at("bad.png")) << "not a png"; }
  EXPECT_EQ(run_cli({"hash", at("bad.png").string()}).code, cli::kExitData);
  EXPECT_EQ(run_cli({"hash", at("absent.png").string()}).code, cli::kExitUsage);
}

TEST_F(Cli, PerturbSingleAndSuite) {
  const auto one = run_cli({"perturb", "-f", "jpeg", "-p", "50", image(0).string(), "-o", at("j.png").string()});
  ASSERT_EQ(one.code, 0) << one.err;
  EXPECT_TRUE(fs::exists(at("j.png")));
  EXPECT_EQ(run_cli({"perturb", "-f", "jpeg", "-p", "51", image(0).string(), "-o", at("k.png").string()}).code,
            cli::kExitUsage);
  EXPECT_EQ(run_cli({"perturb", "--permissive", "-f", "jpeg", "-p", "51", image(0).string(), "-o",
                     at("k.png").string()})
                .code,
            0);
  EXPECT_EQ(run_cli({"perturb", image(0).string(), "-o", at("k.png").string()}).code, cli::kExitUsage);

  const auto suite = run_cli({"perturb", "--suite", "--seed", "4", image(1).string(), "-o", at("suite").string()});
  ASSERT_EQ(suite.code, 0) << suite.err;
  EXPECT_EQ(lines_of(suite.out).size(), 58u);
  const auto manifest = read_json(at("suite") / "manifest.json");
  EXPECT_EQ(manifest.at("images").size(), 58u);
  EXPECT_EQ(manifest.at("seed"), 4);
  for (const auto& e : manifest.at("images")) {
    EXPECT_TRUE(fs::exists(at("suite") / e.at("file").get<std::string>()));
  }
}

TEST_F(Cli, BuildDatabaseAndMatch) {
  const auto built = run_cli({"build-db", "-B", "dhash/64", "-i", (dir_.path() / "images").string(), "-o",
                              at("db.json").string()});
  ASSERT_EQ(built.code, 0) << built.err;
  ASSERT_TRUE(fs::exists(at("db.json")));

  ASSERT_EQ(run_cli({"perturb", "-f", "jpeg", "-p", "90", image(3).string(), "-o", at("q.png").string()}).code, 0);
  const auto m = run_cli({"match", "-d", at("db.json").string(), "-t", "0.1", at("q.png").string(),
                          image(1).string()});
  ASSERT_EQ(m.code, 0) << m.err;
  const auto l = lines_of(m.out);
  ASSERT_EQ(l.size(), 2u);
  EXPECT_NE(l[0].find("\timg3.png\t"), std::string::npos) << l[0];
  EXPECT_NE(l[1].find("\timg1.png\t0.000000"), std::string::npos) << l[1];

  const auto none = run_cli({"match", "-d", at("db.json").string(), "--threshold=-1", image(1).string()});
  ASSERT_EQ(none.code, 0);
  EXPECT_NE(none.out.find("\t-\t"), std::string::npos);

  { std::ofstream(at("junk.json")) << "{\"nope\": 1}"; }
  EXPECT_EQ(run_cli({"match", "-d", at("junk.json").string(), "-t", "0.1", image(1).string()}).code, cli::kExitData);
}

TEST_F(Cli, BenchVerifyAndExport) {
  const auto cfg = write_config();
  const auto out_dir = at("run");
  const auto r = run_cli({"bench-synthetic", "-c", cfg.string(), "-o", out_dir.string(), "-j", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(lines_of(r.out).size(), 3u);
  const auto results = out_dir / "results.json";
  ASSERT_TRUE(fs::exists(results));

  const auto v = run_cli({"verify", results.string()});
  EXPECT_EQ(v.code, 0) << v.err;
  EXPECT_EQ(v.out.rfind("ok ", 0), 0u);

  auto doc = read_json(results);
  doc["backends"][0]["overall"]["auc"] = 2.0;
  write_json(doc, at("broken.json"));
  const auto bad = run_cli({"verify", at("broken.json").string()});
  EXPECT_EQ(bad.code, cli::kExitData);
  EXPECT_EQ(bad.out.rfind("invalid ", 0), 0u);
  EXPECT_EQ(run_cli({"verify", at("absent.json").string()}).code, cli::kExitData);

  const auto e = run_cli({"export-plots", results.string(), "-o", at("plots").string(), "--svg"});
  ASSERT_EQ(e.code, 0) << e.err;
  EXPECT_EQ(lines_of(e.out).size(), 2u * 3u + 1u);

  // seed override changes the split, the same seed reproduces the bytes
  ASSERT_EQ(run_cli({"bench-synthetic", "-c", cfg.string(), "-o", at("again").string(), "-j", "2"}).code, 0);
  EXPECT_EQ(redact_timings(read_json(results)), redact_timings(read_json(at("again") / "results.json")));
  ASSERT_EQ(run_cli({"bench-synthetic", "-c", cfg.string(), "-o", at("other").string(), "--seed", "10"}).code, 0);
  EXPECT_EQ(read_json(at("other") / "results.json").at("seed"), 10);
}

TEST_F(Cli, BadConfigs) {
  { std::ofstream(at("unknown.yaml")) << "name: x\nbogus_key: 1\n"; }
  EXPECT_EQ(run_cli({"bench-synthetic", "-c", at("unknown.yaml").string()}).code, cli::kExitUsage);
  { std::ofstream(at("broken.yaml")) << "name: [unclosed\n"; }
  EXPECT_EQ(run_cli({"bench-synthetic", "-c", at("broken.yaml").string()}).code, cli::kExitData);
  EXPECT_EQ(run_cli({"bench-synthetic", "-c", at("absent.yaml").string()}).code, cli::kExitUsage);
}
