#include "cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <ostream>

#include <CLI11.hpp>

#include "simhaystack/bench.hpp"
#include "simhaystack/blockhash.hpp"
#include "simhaystack/config.hpp"
#include "simhaystack/corpus.hpp"
#include "simhaystack/error.hpp"
#include "simhaystack/image_io.hpp"
#include "simhaystack/keypoints.hpp"
#include "simhaystack/matching.hpp"
#include "simhaystack/perturb.hpp"
#include "simhaystack/results.hpp"

namespace simhaystack::cli {

namespace fs = std::filesystem;

namespace {

struct HashArgs {
  std::string algo = "dhash";
  int bits = 64;
  int features = 30;
  std::vector<std::string> images;
};

struct PerturbArgs {
  std::string family;
  double parameter = 0;
  std::uint64_t seed = 0;
  bool suite = false;
  bool permissive = false;
  std::string input;
  std::string output;
};

struct DbArgs {
  std::string backend = "dhash/64";
  std::string images;
  std::string db;
  std::vector<std::string> embeddings;
  std::uint64_t seed = 0;
  int jobs = 0;
  double threshold = 0;
  std::vector<std::string> queries;
};

struct BenchArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
  std::string output_dir;
};

struct PlotArgs {
  std::string results;
  std::string out = "plots";
  bool svg = false;
};

std::string fingerprint_line(const Fingerprint& fp) {
  if (const auto* h = std::get_if<BitHash>(&fp.value)) {
    return fp.backend.substr(0, fp.backend.find('/')) + "/" + h->to_text();
  }
  if (const auto* s = std::get_if<SegmentedHash>(&fp.value)) return format_hash(*s);
  if (const auto* f = std::get_if<FeatureSet>(&fp.value)) {
    std::string line = fp.backend + ":";
    for (std::size_t i = 0; i < f->features.size(); ++i) {
      const std::string text = f->features[i].descriptor.to_text();
      if (i > 0) line.push_back(',');
      line += text.substr(text.find(':') + 1);
    }
    return line;
  }
  return fp.backend;
}

int cmd_hash(const HashArgs& a, std::ostream& out) {
  std::string text = a.algo + "/" + std::to_string(a.algo == "orb" ? a.features : a.bits);
  const BackendSpec spec = BackendSpec::parse(text);
  if (!spec.is_block_hash() && spec.kind != BackendKind::Orb && spec.kind != BackendKind::Digest) {
    throw InvalidInput("hash supports ahash, phash, dhash, whash, crop, orb and digest");
  }
  const Backend backend(spec);
  for (const auto& path : a.images) {
    const RasterImage img = read_image(path);
    out << fingerprint_line(backend.fingerprint(fs::path(path).filename().string(), img));
    if (a.images.size() > 1) out << "  " << path;
    out << '\n';
  }
  return kExitOk;
}

int cmd_perturb(const PerturbArgs& a, std::ostream& out, std::ostream& err) {
  const RasterImage img = read_image(a.input);
  const std::string id = fs::path(a.input).filename().string();
  PerturbOptions options;
  options.permissive = a.permissive;
  if (a.suite) {
    std::error_code ec;
    fs::create_directories(a.output, ec);
    nlohmann::json manifest = {{"source", id}, {"seed", a.seed}, {"images", nlohmann::json::array()}};
    for (const auto& p : generate_suite(id, img, a.seed, options)) {
      const fs::path path = fs::path(a.output) / (p.name + ".png");
      write_png(p.image, path);
      nlohmann::json entry = {{"file", path.filename().string()},
                              {"family", std::string(to_string(p.spec.family))},
                              {"parameter", p.spec.parameter},
                              {"width", p.image.width()},
                              {"height", p.image.height()}};
      if (p.spec.seed) entry["seed"] = *p.spec.seed;
      manifest["images"].push_back(std::move(entry));
      out << path.string() << '\n';
    }
    write_json(manifest, fs::path(a.output) / "manifest.json");
    err << "simhaystack: wrote " << kSuiteSize << " images to " << a.output << '\n';
    return kExitOk;
  }
  if (a.family.empty()) throw InvalidInput("perturb needs --family and --param, or --suite");
  const PerturbationFamily family = parse_family(a.family);
  PerturbationSpec spec{family, a.parameter, std::nullopt};
  if (is_stochastic(family)) spec.seed = derive_seed(a.seed, family, a.parameter, id);
  write_png(apply(spec, img, options), a.output);
  out << a.output << '\n';
  return kExitOk;
}

std::vector<Backend> single_backend(const DbArgs& a, EmbeddingStore& store) {
  for (const auto& e : a.embeddings) store.add(load_embeddings(e));
  ExperimentConfig cfg;
  cfg.backends = {a.backend};
  cfg.seed = a.seed;
  return make_backends(cfg, store);
}

int cmd_build_db(const DbArgs& a, std::ostream& out, std::ostream& err) {
  EmbeddingStore store;
  const auto backends = single_backend(a, store);
  const DirectoryCorpus corpus(a.images);
  std::vector<RasterImage> pixels;
  std::vector<const RasterImage*> ptrs;
  if (backends.front().needs_pixels()) {
    pixels.reserve(corpus.ids().size());
    for (const auto& id : corpus.ids()) pixels.push_back(corpus.load(id));
    for (const auto& p : pixels) ptrs.push_back(&p);
  } else {
    ptrs.assign(corpus.ids().size(), nullptr);
  }
  const Database db = build_database(backends.front(), corpus.ids(), ptrs, a.jobs);
  save_database(db, a.db);
  err << "simhaystack: " << db.size() << " fingerprints of " << db.backend() << " in " << db.build_seconds() << " s\n";
  out << a.db << '\n';
  return kExitOk;
}

int cmd_match(const DbArgs& a, std::ostream& out) {
  const Database db = load_database(a.db);
  DbArgs with_backend = a;
  with_backend.backend = db.backend();
  EmbeddingStore store;
  const auto backends = single_backend(with_backend, store);
  const Backend& backend = backends.front();
  char buf[64];
  for (const auto& q : a.queries) {
    const std::string id = fs::path(q).filename().string();
    const Fingerprint fp = backend.needs_pixels() ? backend.fingerprint(id, read_image(q)) : backend.fingerprint(id);
    const auto m = nearest(backend, fp, db, a.jobs);
    out << q << '\t';
    if (m && m->distance <= a.threshold) {
      std::snprintf(buf, sizeof buf, "%.6f", m->distance);
      out << m->id << '\t' << buf << '\n';
    } else {
      out << "-\t";
      if (m) {
        std::snprintf(buf, sizeof buf, "%.6f", m->distance);
        out << buf << '\n';
      } else {
        out << "inf\n";
      }
    }
  }
  return kExitOk;
}

ExperimentConfig bench_config(const BenchArgs& a) {
  ExperimentConfig cfg = load_config(a.config);
  if (a.seed) cfg.seed = *a.seed;
  if (a.jobs) cfg.jobs = *a.jobs;
  if (!a.output_dir.empty()) cfg.output_dir = a.output_dir;
  cfg.validate();
  return cfg;
}

int finish_bench(const nlohmann::json& doc, const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
  const fs::path path = cfg.output_dir / "results.json";
  write_json(doc, path);
  err << "simhaystack: wrote " << path.string() << '\n';
  out << auc_table(doc);
  return kExitOk;
}

int cmd_bench(const std::string& which, const BenchArgs& a, std::ostream& out, std::ostream& err) {
  const ExperimentConfig cfg = bench_config(a);
  err << "simhaystack: running " << which << " experiment '" << cfg.name << "' (seed " << cfg.seed << ")\n";
  if (which == "synthetic") return finish_bench(result_to_json(run_synthetic(cfg)), cfg, out, err);
  if (which == "scaling") return finish_bench(scaling_to_json(run_scaling(cfg)), cfg, out, err);
  return finish_bench(result_to_json(run_templates(cfg)), cfg, out, err);
}

int cmd_export(const PlotArgs& a, std::ostream& out) {
  for (const auto& p : export_plots(read_json(a.results), a.out, a.svg)) out << p.string() << '\n';
  return kExitOk;
}

int cmd_verify(const std::string& path, std::ostream& out, std::ostream& err) {
  const auto report = verify_results(read_json(path));
  if (report.ok()) {
    out << "ok " << path << '\n';
    return kExitOk;
  }
  for (const auto& e : report.errors) err << path << ": " << e << '\n';
  out << "invalid " << path << " (" << report.errors.size() << " problems)\n";
  return kExitData;
}

void add_bench(CLI::App& app, const std::string& name, const std::string& about, BenchArgs& a) {
  auto* sub = app.add_subcommand(name, about);
  sub->add_option("--config,-c", a.config, "experiment YAML file")->required()->check(CLI::ExistingFile);
  sub->add_option("--seed", a.seed, "override the config seed");
  sub->add_option("--jobs,-j", a.jobs, "worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
  sub->add_option("--output-dir,-o", a.output_dir, "override the config output_dir");
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Near-duplicate image matching benchmark", "simhaystack"};
  app.require_subcommand(1);

  HashArgs hash_args;
  auto* hash = app.add_subcommand("hash", "fingerprint images and print one line per image");
  hash->add_option("--algo,-a", hash_args.algo, "ahash | phash | dhash | whash | crop | orb | digest");
  hash->add_option("--bits,-b", hash_args.bits, "hash length (perfect square)");
  hash->add_option("--features", hash_args.features, "ORB descriptors kept");
  hash->add_option("images", hash_args.images, "image files")->required()->check(CLI::ExistingFile);

  PerturbArgs perturb_args;
  auto* perturb = app.add_subcommand("perturb", "apply one perturbation, or the full suite");
  perturb->add_option("--family,-f", perturb_args.family, "perturbation family");
  perturb->add_option("--param,-p", perturb_args.parameter, "family parameter");
  perturb->add_option("--seed", perturb_args.seed, "base seed for stochastic families");
  perturb->add_flag("--suite", perturb_args.suite, "write all suite members into the output directory");
  perturb->add_flag("--permissive", perturb_args.permissive, "accept parameters outside the suite");
  perturb->add_option("input", perturb_args.input, "source image")->required()->check(CLI::ExistingFile);
  perturb->add_option("--output,-o", perturb_args.output, "output PNG, or directory with --suite")->required();

  DbArgs db_args;
  auto* build_db = app.add_subcommand("build-db", "fingerprint a directory of images into a database file");
  build_db->add_option("--backend,-B", db_args.backend, "backend id, e.g. dhash/64 or model/JS");
  build_db->add_option("--images,-i", db_args.images, "image directory")->required();
  build_db->add_option("--out,-o", db_args.db, "database file")->required();
  build_db->add_option("--embeddings,-e", db_args.embeddings, "EMB1 files")->check(CLI::ExistingFile);
  build_db->add_option("--seed", db_args.seed, "seed of the random backend");
  build_db->add_option("--jobs,-j", db_args.jobs, "worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);

  auto* match = app.add_subcommand("match", "look query images up in a database");
  match->add_option("--db,-d", db_args.db, "database file")->required()->check(CLI::ExistingFile);
  match->add_option("--threshold,-t", db_args.threshold, "match threshold")->required();
  match->add_option("--embeddings,-e", db_args.embeddings, "EMB1 files")->check(CLI::ExistingFile);
  match->add_option("--seed", db_args.seed, "seed of the random backend");
  match->add_option("--jobs,-j", db_args.jobs, "worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
  match->add_option("queries", db_args.queries, "query images")->required();

  BenchArgs synthetic_args, scaling_args, templates_args;
  add_bench(app, "bench-synthetic", "split, perturb, match and sweep thresholds", synthetic_args);
  add_bench(app, "bench-scaling", "repeat the synthetic experiment over database sizes", scaling_args);
  add_bench(app, "bench-templates", "match in-the-wild variants against their templates", templates_args);

  PlotArgs plot_args;
  auto* plots = app.add_subcommand("export-plots", "write CSV (and SVG) curves from a results file");
  plots->add_option("results", plot_args.results, "results JSON")->required()->check(CLI::ExistingFile);
  plots->add_option("--out,-o", plot_args.out, "output directory");
  plots->add_flag("--svg", plot_args.svg, "also write SVG line plots");

  std::string verify_path;
  auto* verify = app.add_subcommand("verify", "re-check a results file");
  verify->add_option("results", verify_path, "results JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "simhaystack: " << e.what() << "\n\n";
    const auto subs = app.get_subcommands();
    err << (subs.empty() ? app.help() : subs.front()->help());
    return kExitUsage;
  }

  try {
    if (*hash) return cmd_hash(hash_args, out);
    if (*perturb) return cmd_perturb(perturb_args, out, err);
    if (*build_db) return cmd_build_db(db_args, out, err);
    if (*match) return cmd_match(db_args, out);
    if (app.got_subcommand("bench-synthetic")) return cmd_bench("synthetic", synthetic_args, out, err);
    if (app.got_subcommand("bench-scaling")) return cmd_bench("scaling", scaling_args, out, err);
    if (app.got_subcommand("bench-templates")) return cmd_bench("templates", templates_args, out, err);
    if (*plots) return cmd_export(plot_args, out);
    if (*verify) return cmd_verify(verify_path, out, err);
  } catch (const InvalidInput& e) {
    err << "simhaystack: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "simhaystack: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace simhaystack::cli
