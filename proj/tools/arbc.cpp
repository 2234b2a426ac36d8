// arbc: preprocess, train, encode, search, evaluate and bench from the command line.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "arbc/autoencoder.hpp"
#include "arbc/error.hpp"
#include "arbc/image.hpp"
#include "arbc/index.hpp"
#include "arbc/irma.hpp"
#include "arbc/pipeline.hpp"
#include "arbc/store.hpp"
#include "arbc/synthetic.hpp"

namespace fs = std::filesystem;
using namespace arbc;

namespace {

constexpr int kExitData = 2;
constexpr int kExitUsage = 64;
constexpr int kExitInternal = 1;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunFlags {
  int side = 32;
  int angles = 8;
  std::string arch = "h/2";
  int epochs = 300;
  int batch = 10;
  double lr = 0.5;
  std::uint64_t seed = 0;
  std::string model_path;
  std::string method = "rbc";
  int jobs = default_jobs();
  bool lsh = false;
  int tables = 30;
  int keyfrac = 3;
};

CLI::Option* add_size(CLI::App* app, RunFlags& f) {
  return app->add_option("--size", f.side, "Normalized image side")->check(CLI::IsMember({32, 64}));
}
CLI::Option* add_angles(CLI::App* app, RunFlags& f) {
  return app->add_option("--angles", f.angles, "Number of projection angles")->check(CLI::IsMember({8, 16}));
}
CLI::Option* add_method(CLI::App* app, RunFlags& f) {
  return app->add_option("--method", f.method, "rbc or arbc:LAYER");
}
void add_jobs(CLI::App* app, RunFlags& f) {
  app->add_option("--jobs", f.jobs, "Worker threads")->check(CLI::PositiveNumber);
}
void add_training(CLI::App* app, RunFlags& f) {
  app->add_option("--arch", f.arch, "Hidden layers, e.g. h/2 or h/2,h/4,h/2");
  app->add_option("--epochs", f.epochs)->check(CLI::PositiveNumber);
  app->add_option("--batch", f.batch)->check(CLI::PositiveNumber);
  app->add_option("--lr", f.lr)->check(CLI::PositiveNumber);
  app->add_option("--seed", f.seed);
}
void add_lsh(CLI::App* app, RunFlags& f) {
  app->add_flag("--lsh", f.lsh, "Use bit-sampling LSH");
  app->add_option("--tables", f.tables, "LSH hash tables")->check(CLI::PositiveNumber);
  app->add_option("--keyfrac", f.keyfrac, "LSH key size is barcode length / N")->check(CLI::PositiveNumber);
}

MethodTag parse_method(const std::string& text) {
  try {
    return MethodTag::parse(text);
  } catch (const Error& e) {
    throw UsageError(std::string("--method: ") + e.what());
  }
}

// Loads the model an ARBC method needs; RBC ignores --model.
std::optional<AutoencoderModel> method_model(const MethodTag& tag, const RunFlags& f) {
  if (tag.method != BarcodeMethod::ARBC) return std::nullopt;
  if (f.model_path.empty()) throw UsageError("method " + tag.to_string() + " requires --model");
  return load_model(f.model_path);
}

EncoderSpec make_spec(const RunFlags& f, const MethodTag& tag, const std::optional<AutoencoderModel>& model) {
  EncoderSpec spec{f.side, RadonConfig{f.angles}, tag, model ? &*model : nullptr};
  spec.validate();
  return spec;
}

LshConfig lsh_config(const RunFlags& f, std::size_t length) {
  return LshConfig{f.tables, std::max<int>(1, static_cast<int>(length) / f.keyfrac), f.seed};
}

fs::path lsh_sidecar(const fs::path& index_path) { return fs::path(index_path.string() + ".lsh"); }

void print_hits(const std::vector<SearchHit>& hits) {
  for (std::size_t i = 0; i < hits.size(); ++i)
    std::cout << i + 1 << '\t' << hits[i].image_id << '\t' << hits[i].distance << '\n';
}

struct Timing {
  double mean = 0, stddev = 0;
};

Timing summarize(const std::vector<double>& xs) {
  Timing t;
  if (xs.empty()) return t;
  for (double x : xs) t.mean += x;
  t.mean /= static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0;
    for (double x : xs) ss += (x - t.mean) * (x - t.mean);
    t.stddev = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return t;
}

template <typename Fn>
double seconds(Fn&& fn) {
  const auto start = std::chrono::steady_clock::now();
  fn();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// ---------------------------------------------------------------------------

void cmd_prep(const std::string& manifest_path, bool synthetic, const fs::path& out, const RunFlags& f,
              const SyntheticConfig& syn, int train_count) {
  if (synthetic) {
    if (!manifest_path.empty()) throw UsageError("prep: give either a manifest or --synthetic");
    const auto images = generate_synthetic(syn);
    if (train_count < 0 || static_cast<std::size_t>(train_count) > images.size())
      throw UsageError("prep: --train-count exceeds the number of generated images");
    write_synthetic(images, static_cast<std::size_t>(train_count), out);
    std::cerr << "wrote " << images.size() << " images to " << out.string() << '\n';
    return;
  }
  if (manifest_path.empty()) throw UsageError("prep: a manifest or --synthetic is required");
  const auto manifest = load_manifest(manifest_path);
  DatasetManifest prepared;
  prepared.base_dir = out;
  prepared.entries.resize(manifest.entries.size());
  fs::create_directories(out / "images");
  parallel_for(manifest.entries.size(), f.jobs, [&](std::size_t i) {
    const auto& entry = manifest.entries[i];
    try {
      const auto image = normalize_image(load_grayscale(manifest.resolve(entry)), f.side);
      const fs::path rel = fs::path("images") / (entry.image_id + ".pgm");
      save_pgm(to_raster(image), out / rel);
      prepared.entries[i] = ManifestEntry{entry.image_id, rel.string(), entry.irma_code};
    } catch (const Error& e) {
      throw Error(e.kind(), "image " + entry.image_id + ": " + e.what());
    }
  });
  save_manifest(prepared, out / "manifest.tsv");
  std::cerr << "prepared " << prepared.entries.size() << " images at " << f.side << "x" << f.side << '\n';
}

void cmd_train(const std::string& manifest_path, const fs::path& out, std::string loss_path, const RunFlags& f) {
  const auto manifest = load_manifest(manifest_path);
  if (manifest.entries.empty()) throw Error(ErrorKind::EmptyDataset, "manifest has no entries");
  const int d = feature_length(f.side, RadonConfig{f.angles});
  std::vector<int> dims;
  try {
    dims = parse_architecture(f.arch, d);
  } catch (const Error& e) {
    throw UsageError(std::string("--arch: ") + e.what());
  }
  const Eigen::MatrixXd x = manifest_features(manifest, f.side, RadonConfig{f.angles}, f.jobs);

  auto model = init_model(dims, f.seed);
  TrainingConfig cfg;
  cfg.epochs = f.epochs;
  cfg.batch_size = f.batch;
  cfg.learning_rate = f.lr;
  cfg.seed = f.seed;
  const auto trace = train(model, x, cfg, [&](int epoch, double value) {
    if (epoch == 1 || epoch % 50 == 0 || epoch == f.epochs)
      std::cerr << "epoch " << epoch << " loss " << value << '\n';
  });
  save_model(model, out);
  if (loss_path.empty()) loss_path = out.string() + ".loss.tsv";
  write_file_atomic(loss_path, format_loss_trace(trace));
}

void cmd_encode(const std::string& manifest_path, const fs::path& out, const RunFlags& f) {
  const auto tag = parse_method(f.method);
  const auto model = method_model(tag, f);
  const auto spec = make_spec(f, tag, model);
  const auto manifest = load_manifest(manifest_path);
  const auto index = encode_manifest(manifest, spec, f.jobs);
  save_index(index, out);
  if (f.lsh) save_lsh(sample_lsh_layout(index.barcode_length(), lsh_config(f, index.barcode_length())), lsh_sidecar(out));
  std::cerr << "encoded " << index.size() << " images, " << index.barcode_length() << " bits each\n";
}

void cmd_search(const fs::path& index_path, const fs::path& query_path, std::size_t k, bool no_fallback,
                RunFlags f, const std::set<std::string>& given) {
  const auto index = load_index(index_path);
  const auto& stored = index.params();
  // flags left unset inherit from the index header; explicit ones must agree
  auto reconcile = [&](const char* name, int& flag, int header) {
    if (header == 0) return;
    if (!given.count(name)) {
      flag = header;
    } else if (flag != header) {
      throw Error(ErrorKind::ConfigMismatch, std::string(name) + " " + std::to_string(flag) + " but index was built with " +
                                                 std::to_string(header));
    }
  };
  reconcile("--size", f.side, stored.side);
  reconcile("--angles", f.angles, stored.num_angles);
  MethodTag tag = index.tag();
  if (given.count("--method")) {
    tag = parse_method(f.method);
    if (!index.empty() && !(tag == index.tag()))
      throw Error(ErrorKind::ConfigMismatch, "method " + tag.to_string() + " but index holds " + index.tag().to_string());
  }
  const auto model = method_model(tag, f);
  const auto spec = make_spec(f, tag, model);
  const auto query = encode_image(load_grayscale(query_path), spec);

  if (!f.lsh) {
    print_hits(search_exhaustive(index, query, k));
    return;
  }
  if (index.empty()) throw Error(ErrorKind::EmptyIndex, "index has no records");
  const fs::path sidecar = lsh_sidecar(index_path);
  const bool custom = given.count("--tables") || given.count("--keyfrac");
  const LshTables tables = fs::exists(sidecar) && !custom
                               ? lsh_build(index, load_lsh(sidecar))
                               : lsh_build(index, lsh_config(f, index.barcode_length()));
  auto hits = search_lsh(index, tables, query, k);
  if (hits.empty()) {
    if (no_fallback) {
      std::cerr << "warning: no LSH bucket matched the query\n";
      return;
    }
    std::cerr << "warning: no LSH bucket matched the query, falling back to exhaustive search\n";
    hits = search_exhaustive(index, query, k);
  }
  print_hits(hits);
}

void cmd_evaluate(const std::string& train_path, const std::string& test_path, const std::string& out,
                  const std::string& branching_path, const RunFlags& f) {
  const auto tag = parse_method(f.method);
  const auto model = method_model(tag, f);
  const auto spec = make_spec(f, tag, model);
  const auto train_set = load_manifest(train_path);
  const auto test_set = load_manifest(test_path);
  const auto train_codes = manifest_codes(train_set);
  const auto test_codes = manifest_codes(test_set);

  BranchingTable table;
  if (!branching_path.empty()) {
    table = load_branching(branching_path);
  } else {
    auto all = train_codes;
    all.insert(all.end(), test_codes.begin(), test_codes.end());
    table = build_branching(all);
  }
  const auto train_index = encode_manifest(train_set, spec, f.jobs);
  const auto test_index = encode_manifest(test_set, spec, f.jobs);
  const auto report = evaluate_retrieval(train_index, train_codes, test_index, test_codes, table, f.jobs);
  if (!out.empty()) write_file_atomic(out, format_report(report));
  std::cout << "TOTAL\t" << format_double(report.total_error) << '\n';
}

void cmd_bench(const std::string& manifest_path, int repeat, const std::string& methods, const RunFlags& f) {
  const auto manifest = load_manifest(manifest_path);
  if (manifest.entries.empty()) throw Error(ErrorKind::EmptyDataset, "manifest has no entries");
  std::vector<Raster> rasters;
  rasters.reserve(manifest.entries.size());
  for (const auto& entry : manifest.entries) {
    try {
      rasters.push_back(load_grayscale(manifest.resolve(entry)));
    } catch (const Error& e) {
      throw Error(e.kind(), "image " + entry.image_id + ": " + e.what());
    }
  }
  const double n = static_cast<double>(rasters.size());
  const RadonConfig radon{f.angles};

  std::cout << "task\tper_image_seconds_mean\tstd\tpasses\timages\n";
  auto report = [&](const std::string& name, const std::vector<double>& per_image) {
    const auto t = summarize(per_image);
    std::cout << name << '\t' << t.mean << '\t' << t.stddev << '\t' << per_image.size() << '\t' << rasters.size()
              << '\n';
  };
  auto encode_pass = [&](const EncoderSpec& spec) {
    std::vector<double> passes;
    for (int r = 0; r < repeat; ++r)
      passes.push_back(seconds([&] {
                         for (const auto& raster : rasters) (void)encode_image(raster, spec);
                       }) /
                       n);
    return passes;
  };

  for (const auto& name : CLI::detail::split(methods, ',')) {
    if (name == "rbc") {
      report("rbc-encode", encode_pass(make_spec(f, MethodTag{}, std::nullopt)));
    } else if (name == "arbc") {
      Eigen::MatrixXd x(feature_length(f.side, radon), static_cast<Eigen::Index>(rasters.size()));
      auto extract = [&] {
        for (std::size_t i = 0; i < rasters.size(); ++i)
          x.col(static_cast<Eigen::Index>(i)) = feature_vector(rasters[i], f.side, radon);
      };
      std::vector<int> dims;
      try {
        dims = parse_architecture(f.arch, static_cast<int>(x.rows()));
      } catch (const Error& e) {
        throw UsageError(std::string("--arch: ") + e.what());
      }
      TrainingConfig cfg;
      cfg.epochs = 1;
      cfg.batch_size = f.batch;
      cfg.learning_rate = f.lr;
      cfg.seed = f.seed;
      std::vector<double> train_passes;
      AutoencoderModel model = init_model(dims, f.seed);
      for (int r = 0; r < repeat; ++r) {
        model = init_model(dims, f.seed);
        // ARBC needs the Radon features as its input, so they are part of the cost
        train_passes.push_back(seconds([&] {
                                 extract();
                                 (void)train(model, x, cfg);
                               }) /
                               n);
      }
      report("arbc-train-epoch", train_passes);
      const AutoencoderModel encoder = f.model_path.empty() ? model : load_model(f.model_path);
      report("arbc-encode", encode_pass(make_spec(f, MethodTag{BarcodeMethod::ARBC, 1}, encoder)));
    } else {
      throw UsageError("--methods: unknown entry '" + name + "'");
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Radon and autoencoded Radon barcodes for image retrieval"};
  app.require_subcommand(1);
  RunFlags f;

  std::string manifest, second, out, loss_path, branching, methods = "rbc,arbc";
  bool synthetic = false, no_fallback = false;
  std::size_t k = 5;
  int repeat = 5, train_count = 300;
  SyntheticConfig syn;

  auto* prep = app.add_subcommand("prep", "Normalize a manifest's images, or generate the synthetic set");
  prep->add_option("manifest", manifest, "Input manifest (TSV)");
  prep->add_option("-o,--out", out, "Output directory")->required();
  prep->add_flag("--synthetic", synthetic, "Generate synthetic shape images instead");
  prep->add_option("--classes", syn.num_classes)->check(CLI::Range(1, 8));
  prep->add_option("--per-class", syn.images_per_class)->check(CLI::PositiveNumber);
  prep->add_option("--train-count", train_count, "Images written to train.tsv");
  prep->add_option("--seed", syn.seed);
  add_size(prep, f);
  add_jobs(prep, f);

  auto* train_cmd = app.add_subcommand("train", "Train an autoencoder on a manifest's Radon features");
  train_cmd->add_option("manifest", manifest)->required();
  train_cmd->add_option("-o,--out", out, "Model file")->required();
  train_cmd->add_option("--loss", loss_path, "Loss trace file (default: <model>.loss.tsv)");
  add_size(train_cmd, f);
  add_angles(train_cmd, f);
  add_training(train_cmd, f);
  add_jobs(train_cmd, f);

  auto* encode = app.add_subcommand("encode", "Encode a manifest into a barcode index");
  encode->add_option("manifest", manifest)->required();
  encode->add_option("-o,--out", out, "Index file")->required();
  encode->add_option("--model", f.model_path);
  encode->add_option("--seed", f.seed, "LSH sampling seed");
  add_size(encode, f);
  add_angles(encode, f);
  add_method(encode, f);
  add_lsh(encode, f);
  add_jobs(encode, f);

  auto* search = app.add_subcommand("search", "Rank indexed images by Hamming distance to a query image");
  search->add_option("index", manifest)->required();
  search->add_option("query", second)->required();
  search->add_option("-k", k, "Number of hits")->check(CLI::PositiveNumber);
  search->add_option("--model", f.model_path);
  search->add_option("--seed", f.seed, "LSH sampling seed");
  search->add_flag("--no-fallback", no_fallback, "Do not fall back to exhaustive search on an empty LSH result");
  add_size(search, f);
  add_angles(search, f);
  add_method(search, f);
  add_lsh(search, f);

  auto* evaluate = app.add_subcommand("evaluate", "Top-1 retrieval error of a test manifest against a train manifest");
  evaluate->add_option("train", manifest)->required();
  evaluate->add_option("test", second)->required();
  evaluate->add_option("-o,--out", out, "Report file");
  evaluate->add_option("--model", f.model_path);
  evaluate->add_option("--branching-table", branching, "Branching counts (default: derived from both manifests)");
  add_size(evaluate, f);
  add_angles(evaluate, f);
  add_method(evaluate, f);
  add_jobs(evaluate, f);

  auto* bench = app.add_subcommand("bench", "Per-image encoding and training time");
  bench->add_option("manifest", manifest)->required();
  bench->add_option("--repeat", repeat, "Measured passes")->check(CLI::PositiveNumber);
  bench->add_option("--methods", methods, "Comma-separated subset of rbc,arbc");
  bench->add_option("--model", f.model_path, "Model for arbc encoding (default: the freshly trained one)");
  add_size(bench, f);
  add_angles(bench, f);
  add_training(bench, f);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    if (*prep) {
      cmd_prep(manifest, synthetic, out, f, syn, train_count);
    } else if (*train_cmd) {
      cmd_train(manifest, out, loss_path, f);
    } else if (*encode) {
      cmd_encode(manifest, out, f);
    } else if (*search) {
      std::set<std::string> given;
      for (const char* name : {"--size", "--angles", "--method", "--tables", "--keyfrac"})
        if (search->count(name)) given.insert(name);
      cmd_search(manifest, second, k, no_fallback, f, given);
    } else if (*evaluate) {
      cmd_evaluate(manifest, second, out, branching, f);
    } else if (*bench) {
      cmd_bench(manifest, repeat, methods, f);
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    switch (e.kind()) {
      case ErrorKind::InvalidArchitecture:
      case ErrorKind::InvalidConfig:
      case ErrorKind::InvalidArgument:
        return kExitUsage;
      default:
        return kExitData;
    }
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return 0;
}
